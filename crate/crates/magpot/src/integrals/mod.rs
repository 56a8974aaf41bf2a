//! One-electron overlap and nuclear integrals, the two-electron coupling
//! integral, and the special functions and quadrature underneath them.

pub mod coupling;
pub mod quad;
pub mod radial;
pub mod special;

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::LazyLock;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydrogenic::{phi_norm, DeltaTriple, Shape};
use crate::quantum::Orbital;

pub use coupling::{coupling, coupling_shapes, CouplingValue};
pub use radial::{y3, y5, RadialSpec};
pub use special::{y1, y1_real, y2};

/// h1 r1^h2 r2^h3 r12^h4 times cos/sin powers of theta_1, theta_2, phi_1,
/// phi_2 (h5..h12 in the order cos th1, cos th2, sin th1, sin th2,
/// cos ph1, cos ph2, sin ph1, sin ph2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionTerm {
    pub h: [f64; 12],
}

impl InteractionTerm {
    pub const fn new(h: [f64; 12]) -> Self {
        InteractionTerm { h }
    }

    /// amp / r12
    pub const fn coulomb(amp: f64) -> Self {
        InteractionTerm {
            h: [amp, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.h[0]
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut h = self.h;
        h[0] *= f;
        InteractionTerm { h }
    }

    /// The same operator with the electron labels exchanged.
    pub fn swapped(&self) -> Self {
        let h = self.h;
        InteractionTerm {
            h: [
                h[0], h[2], h[1], h[3], h[5], h[4], h[7], h[6], h[9], h[8], h[11], h[10],
            ],
        }
    }

    /// h5..h12 as integers.
    pub fn integer_angular(&self) -> [i32; 8] {
        let mut out = [0; 8];
        for (o, v) in out.iter_mut().zip(&self.h[4..]) {
            *o = v.round() as i32;
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in self.h[4..].iter().enumerate() {
            if *v < 0.0 || v.fract() != 0.0 {
                return Err(Error::Invalid(format!(
                    "h{} = {v} must be a non-negative integer",
                    k + 5
                )));
            }
        }
        for (k, v) in self.h[1..4].iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Invalid(format!("h{} is not finite", k + 2)));
            }
        }
        Ok(())
    }
}

/// Round to 12 significant digits (decimal), the precision at which
/// exponents are treated as equal by the integral cache.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// Everything that determines a [`Shape`]: label, exponent and the
/// delta-dependent exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShapeKey {
    pub label: (u32, u32, i32, u8, u8),
    pub xi: u64,
    pub t: u64,
    pub sin_pow: u64,
    pub gamma: u64,
}

impl ShapeKey {
    pub fn of(s: &Shape) -> Self {
        let o = &s.orbital;
        ShapeKey {
            label: (o.n, o.l, o.m, o.j, o.p),
            xi: round_sig(s.xi).to_bits(),
            t: s.t.to_bits(),
            sin_pow: s.sin_pow.to_bits(),
            gamma: s.rad[0].1.to_bits(),
        }
    }

    /// The same key without the exponent (angular data only).
    pub fn angular(&self) -> Self {
        ShapeKey {
            xi: 0,
            gamma: 0,
            ..*self
        }
    }
}

/// Cache key of one coupling integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct IntegralKey {
    pub shapes: [ShapeKey; 4],
    pub h: [u64; 12],
}

impl IntegralKey {
    pub fn new(s: [&Shape; 4], h: &InteractionTerm) -> Self {
        IntegralKey {
            shapes: [
                ShapeKey::of(s[0]),
                ShapeKey::of(s[1]),
                ShapeKey::of(s[2]),
                ShapeKey::of(s[3]),
            ],
            h: h.h.map(f64::to_bits),
        }
    }
}

/// Entries kept before the value cache is flushed.
pub const CACHE_CAPACITY: usize = 1 << 18;

pub(crate) static CACHE: LazyLock<RwLock<HashMap<IntegralKey, CouplingValue>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));
pub(crate) static HITS: AtomicU64 = AtomicU64::new(0);
pub(crate) static MISSES: AtomicU64 = AtomicU64::new(0);
pub(crate) static FALLBACKS: AtomicU64 = AtomicU64::new(0);

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CacheStats {
    pub entries: usize,
    pub hits: u64,
    pub misses: u64,
    pub quadrature_fallbacks: u64,
}

pub fn cache_stats() -> CacheStats {
    CacheStats {
        entries: CACHE.read().len(),
        hits: HITS.load(Ordering::Relaxed),
        misses: MISSES.load(Ordering::Relaxed),
        quadrature_fallbacks: FALLBACKS.load(Ordering::Relaxed),
    }
}

pub fn clear_cache() {
    CACHE.write().clear();
    coupling::clear_angular_cache();
}

/// Integral of Theta_a Theta_b sin(theta) over [0, pi].
pub fn theta_overlap(a: &Shape, b: &Shape) -> Result<f64> {
    let mut s = 0.0;
    for &(ca, pa) in &a.ang {
        for &(cb, pb) in &b.ang {
            s += ca * cb * y1_real(a.sin_pow + b.sin_pow + 1.0, pa + pb)?;
        }
    }
    Ok(s)
}

/// Integral of Phi_a Phi_b over [0, 2 pi].
pub fn phi_overlap(a: &Shape, b: &Shape) -> f64 {
    if a.orbital.m == b.orbital.m {
        phi_norm(a.orbital.m)
    } else {
        0.0
    }
}

/// Integral of R_a R_b r^(2 + extra) over (0, inf).
pub fn radial_overlap(a: &Shape, b: &Shape, extra: f64) -> Result<f64> {
    let rate = a.xi + b.xi;
    let mut s = 0.0;
    for &(ca, pa) in &a.rad {
        for &(cb, pb) in &b.rad {
            s += ca * cb * special::gamma_integral(pa + pb + 2.0 + extra, rate)?;
        }
    }
    Ok(s)
}

pub fn angular_norm(s: &Shape) -> Result<f64> {
    Ok(phi_norm(s.orbital.m) * theta_overlap(s, s)?)
}

pub fn radial_norm(s: &Shape) -> Result<f64> {
    radial_overlap(s, s, 0.0)
}

/// Unnormalised integral of phi_a phi_b r^extra over all space.
pub fn shape_integral(a: &Shape, b: &Shape, extra: f64) -> Result<f64> {
    let phi = phi_overlap(a, b);
    if phi == 0.0 {
        return Ok(0.0);
    }
    Ok(phi * theta_overlap(a, b)? * radial_overlap(a, b, extra)?)
}

fn normalised(a: &Shape, b: &Shape, extra: f64) -> Result<f64> {
    let v = shape_integral(a, b, extra)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    let na = angular_norm(a)? * radial_norm(a)?;
    let nb = angular_norm(b)? * radial_norm(b)?;
    Ok(v / (na * nb).sqrt())
}

/// u = <phi_a|phi_b> with both orbitals normalised.
pub fn overlap_shapes(a: &Shape, b: &Shape) -> Result<f64> {
    normalised(a, b, 0.0)
}

/// V = <phi_a|1/r|phi_b> with both orbitals normalised.
pub fn nuclear_shapes(a: &Shape, b: &Shape) -> Result<f64> {
    normalised(a, b, -1.0)
}

pub fn overlap(a: &Orbital, b: &Orbital, d: &DeltaTriple) -> Result<f64> {
    overlap_shapes(&Shape::new(a, d)?, &Shape::new(b, d)?)
}

pub fn nuclear(a: &Orbital, b: &Orbital, d: &DeltaTriple) -> Result<f64> {
    nuclear_shapes(&Shape::new(a, d)?, &Shape::new(b, d)?)
}
