//! The monocentric two-electron coupling integral
//! <phi_a(r1) phi_b(r1)| h1 r1^h2 r2^h3 r12^h4 X |phi_c(r2) phi_e(r2)>.
//!
//! Electron 2 is rotated into the frame of electron 1:
//! n2 = cos(beta) n1 + sin(beta) (cos(chi) theta1_hat + sin(chi) phi1_hat).
//! Its angular factor is a polynomial in the Cartesian components of n2,
//! which become polynomials in the trig functions of (theta1, phi1, beta,
//! chi). Integrating phi1, chi and theta1 leaves a polynomial F(cos beta);
//! each power of cos(beta) is then a Y_III radial integral.

use std::collections::HashMap;
use std::sync::atomic::Ordering;
use std::sync::LazyLock;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use super::quad::{coupling_quadrature, rounding_kernel};
use super::radial::y3_kernel;
use super::special::{binom, y1_real, y2};
use super::{
    angular_norm, radial_norm, IntegralKey, InteractionTerm, ShapeKey, CACHE, CACHE_CAPACITY,
    FALLBACKS, HITS, MISSES,
};
use crate::error::{Error, Result};
use crate::hydrogenic::{DeltaTriple, Shape};
use crate::quantum::Orbital;

/// Largest distance from an integer tolerated in an electron-2 angular
/// exponent before the quadrature path is used.
pub const INTEGER_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingValue {
    pub value: f64,
    /// true when the 6-D quadrature fallback produced the value
    pub quadrature: bool,
}

// Variables: cos th1, sin th1, cos ph1, sin ph1, cos b, sin b, cos chi, sin chi
type Mono = [u8; 8];
type Poly = HashMap<Mono, f64>;
type Poly3 = HashMap<[u8; 3], f64>;

fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::with_capacity(a.len() * b.len());
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = *ma;
            for i in 0..8 {
                m[i] += mb[i];
            }
            *out.entry(m).or_insert(0.0) += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0.0);
    out
}

fn term(c: f64, m: Mono) -> (Mono, f64) {
    (m, c)
}

/// Components of n2 in the rotated frame.
fn n2_components() -> [Poly; 3] {
    let x: Poly = [
        term(1.0, [0, 1, 1, 0, 1, 0, 0, 0]),
        term(1.0, [1, 0, 1, 0, 0, 1, 1, 0]),
        term(-1.0, [0, 0, 0, 1, 0, 1, 0, 1]),
    ]
    .into_iter()
    .collect();
    let y: Poly = [
        term(1.0, [0, 1, 0, 1, 1, 0, 0, 0]),
        term(1.0, [1, 0, 0, 1, 0, 1, 1, 0]),
        term(1.0, [0, 0, 1, 0, 0, 1, 0, 1]),
    ]
    .into_iter()
    .collect();
    let z: Poly = [
        term(1.0, [1, 0, 0, 0, 1, 0, 0, 0]),
        term(-1.0, [0, 1, 0, 0, 0, 1, 1, 0]),
    ]
    .into_iter()
    .collect();
    [x, y, z]
}

fn one() -> Poly {
    [([0u8; 8], 1.0)].into_iter().collect()
}

/// Re or Im of (u + i v)^m as a polynomial in two variables, returned as
/// (u power, v power, coefficient).
fn complex_power(m: u32, imag: bool) -> Vec<(u32, u32, f64)> {
    let mut out = Vec::new();
    for k in 0..=m {
        let keep = if imag { k % 2 == 1 } else { k % 2 == 0 };
        if !keep {
            continue;
        }
        let half = if imag { (k - 1) / 2 } else { k / 2 };
        let sign = if half % 2 == 0 { 1.0 } else { -1.0 };
        out.push((m - k, k, sign * binom(m, k)));
    }
    out
}

/// Phi(phi) sin^|m|(theta) in Cartesian form: Re or Im of (x + i y)^|m|.
fn azimuthal(m: i32) -> Vec<(u32, u32, f64)> {
    complex_power(m.unsigned_abs(), m < 0)
}

fn near_int(x: f64) -> Option<i32> {
    let r = x.round();
    if (x - r).abs() <= INTEGER_TOL {
        Some(r as i32)
    } else {
        None
    }
}

/// Electron-2 factor as a polynomial in (x, y, z), or None when some
/// exponent is not close enough to an integer.
fn electron2_poly(c: &Shape, e: &Shape, hv: &[i32; 8]) -> Option<Poly3> {
    let (mc, me) = (c.orbital.m, e.orbital.m);
    if near_int(c.sin_pow)? != mc.abs() || near_int(e.sin_pow)? != me.abs() {
        return None;
    }
    let (h6, h8, h10, h12) = (hv[1], hv[3], hv[5], hv[7]);
    let rest = h8 - h10 - h12;
    if rest < 0 || rest % 2 != 0 {
        return None;
    }
    let mut zpoly: HashMap<u32, f64> = HashMap::new();
    for &(ac, pc) in &c.ang {
        for &(ae, pe) in &e.ang {
            let p = near_int(pc)? + near_int(pe)? + h6;
            if p < 0 {
                return None;
            }
            *zpoly.entry(p as u32).or_insert(0.0) += ac * ae;
        }
    }
    // (x^2 + y^2)^(rest/2)
    let half = (rest / 2) as u32;
    let mut rho: Vec<(u32, u32, f64)> = Vec::new();
    for k in 0..=half {
        rho.push((2 * (half - k), 2 * k, binom(half, k)));
    }
    let mut out = Poly3::new();
    for &(xc, yc, cc) in &azimuthal(mc) {
        for &(xe, ye, ce) in &azimuthal(me) {
            for &(xr, yr, cr) in &rho {
                for (&zp, &cz) in &zpoly {
                    let key = [
                        (xc + xe + xr + h10 as u32) as u8,
                        (yc + ye + yr + h12 as u32) as u8,
                        zp as u8,
                    ];
                    *out.entry(key).or_insert(0.0) += cc * ce * cr * cz;
                }
            }
        }
    }
    out.retain(|_, v| *v != 0.0);
    Some(out)
}

/// Phi_a Phi_b cos^h9 sin^h11 of phi_1 as a polynomial in (cos ph1, sin ph1).
fn electron1_phi_poly(a: &Shape, b: &Shape, hv: &[i32; 8]) -> Poly {
    let mut out = Poly::new();
    for &(ua, va, ca) in &complex_power(a.orbital.m.unsigned_abs(), a.orbital.m < 0) {
        for &(ub, vb, cb) in &complex_power(b.orbital.m.unsigned_abs(), b.orbital.m < 0) {
            let m: Mono = [
                0,
                0,
                (ua + ub + hv[4] as u32) as u8,
                (va + vb + hv[6] as u32) as u8,
                0,
                0,
                0,
                0,
            ];
            *out.entry(m).or_insert(0.0) += ca * cb;
        }
    }
    out
}

type AngularKey = ([ShapeKey; 4], [i32; 8]);

static ANGULAR: LazyLock<RwLock<HashMap<AngularKey, Option<Vec<f64>>>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

pub(crate) fn clear_angular_cache() {
    ANGULAR.write().clear();
}

/// Coefficients f_p of F(cos beta) = sum f_p cos^p(beta): the angular part
/// of the integrand integrated over theta1, phi1 and chi, divided by the
/// angular norms of the four orbitals. None if electron 2 cannot be written
/// as a polynomial.
fn angular_polynomial(s: [&Shape; 4], h: &InteractionTerm) -> Result<Option<Vec<f64>>> {
    let hv = h.integer_angular();
    let key: AngularKey = (
        [
            ShapeKey::of(s[0]).angular(),
            ShapeKey::of(s[1]).angular(),
            ShapeKey::of(s[2]).angular(),
            ShapeKey::of(s[3]).angular(),
        ],
        hv,
    );
    if let Some(v) = ANGULAR.read().get(&key) {
        return Ok(v.clone());
    }
    let v = build_angular(s, &hv)?;
    let mut map = ANGULAR.write();
    if map.len() >= CACHE_CAPACITY {
        map.clear();
    }
    map.insert(key, v.clone());
    Ok(v)
}

fn build_angular(s: [&Shape; 4], hv: &[i32; 8]) -> Result<Option<Vec<f64>>> {
    let [a, b, c, e] = s;
    let Some(p2) = electron2_poly(c, e, hv) else {
        return Ok(None);
    };
    let [x, y, z] = n2_components();
    let mut pow_cache: HashMap<(usize, u8), Poly> = HashMap::new();
    let mut power = |which: usize, k: u8| -> Poly {
        if let Some(p) = pow_cache.get(&(which, k)) {
            return p.clone();
        }
        let base = [&x, &y, &z][which];
        let mut r = one();
        for _ in 0..k {
            r = mul(&r, base);
        }
        pow_cache.insert((which, k), r.clone());
        r
    };
    let mut e2 = Poly::new();
    for (&[px, py, pz], &coef) in &p2 {
        let t = mul(&mul(&power(0, px), &power(1, py)), &power(2, pz));
        for (m, v) in t {
            *e2.entry(m).or_insert(0.0) += coef * v;
        }
    }
    let full = mul(&e2, &electron1_phi_poly(a, b, hv));

    // theta_1 moments over the real electron-1 exponents
    let sin1 = a.sin_pow + b.sin_pow + hv[2] as f64;
    let mut moments: HashMap<(u8, u8), f64> = HashMap::new();
    let mut moment = |i1: u8, i2: u8| -> Result<f64> {
        if let Some(v) = moments.get(&(i1, i2)) {
            return Ok(*v);
        }
        let mut s = 0.0;
        for &(ca, pa) in &a.ang {
            for &(cb, pb) in &b.ang {
                s += ca
                    * cb
                    * y1_real(sin1 + i2 as f64 + 1.0, pa + pb + (hv[0] + i1 as i32) as f64)?;
            }
        }
        moments.insert((i1, i2), s);
        Ok(s)
    };

    let mut f: Vec<f64> = Vec::new();
    for (m, coef) in &full {
        let phi = y2(m[3] as u32, m[2] as u32);
        if phi == 0.0 {
            continue;
        }
        let chi = y2(m[7] as u32, m[6] as u32);
        if chi == 0.0 {
            continue;
        }
        let th = moment(m[0], m[1])?;
        if th == 0.0 {
            continue;
        }
        // sin^(2k) beta = (1 - cos^2 beta)^k
        if m[5] % 2 != 0 {
            return Err(Error::Invalid(
                "odd sin(beta) power survived the chi integral".into(),
            ));
        }
        let k = (m[5] / 2) as u32;
        let w = coef * phi * chi * th;
        for j in 0..=k {
            let p = m[4] as usize + 2 * j as usize;
            if f.len() <= p {
                f.resize(p + 1, 0.0);
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            f[p] += w * sign * binom(k, j);
        }
    }
    add_rounding_correction(s, hv, &mut f);
    let norm = (angular_norm(a)? * angular_norm(b)? * angular_norm(c)? * angular_norm(e)?).sqrt();
    for v in f.iter_mut() {
        *v /= norm;
    }
    Ok(Some(f))
}

/// Chebyshev nodes used to fit the rounding correction in cos(beta).
const CORRECTION_NODES: usize = 8;

/// Electron 2's exact angular factor is the rounded one times
/// |cos th2|^E sin(th2)^S with E, S of order delta. The difference kernel
/// is integrated numerically (it only needs a few digits since it is O(E)),
/// fitted by a polynomial in cos(beta) and added to `f`.
fn add_rounding_correction(s: [&Shape; 4], hv: &[i32; 8], f: &mut Vec<f64>) {
    let [a, b, c, e] = s;
    if c.sin_pow.fract() == 0.0
        && e.sin_pow.fract() == 0.0
        && c.ang.iter().chain(&e.ang).all(|t| t.1.fract() == 0.0)
    {
        return;
    }
    let mut h = [0.0; 12];
    h[0] = 1.0;
    for (k, v) in hv.iter().enumerate() {
        h[4 + k] = *v as f64;
    }
    let h = InteractionTerm::new(h);
    let m = CORRECTION_NODES;
    let theta: Vec<f64> = (0..m)
        .map(|j| std::f64::consts::PI * (j as f64 + 0.5) / m as f64)
        .collect();
    let vals: Vec<f64> = theta
        .iter()
        .map(|th| rounding_kernel(a, b, c, e, &h, th.cos()))
        .collect();
    // Chebyshev coefficients, then monomial form
    let mut t_prev = vec![1.0];
    let mut t_cur = vec![0.0, 1.0];
    for k in 0..m {
        let ck = 2.0 / m as f64
            * vals
                .iter()
                .zip(&theta)
                .map(|(v, th)| v * (k as f64 * th).cos())
                .sum::<f64>()
            * if k == 0 { 0.5 } else { 1.0 };
        let tk = match k {
            0 => t_prev.clone(),
            1 => t_cur.clone(),
            _ => {
                let mut next = vec![0.0; k + 1];
                for (i, v) in t_cur.iter().enumerate() {
                    next[i + 1] += 2.0 * v;
                }
                for (i, v) in t_prev.iter().enumerate() {
                    next[i] -= v;
                }
                t_prev = std::mem::replace(&mut t_cur, next);
                t_cur.clone()
            }
        };
        if f.len() < tk.len() {
            f.resize(tk.len(), 0.0);
        }
        for (i, v) in tk.iter().enumerate() {
            f[i] += ck * v;
        }
    }
}

fn analytic(s: [&Shape; 4], h: &InteractionTerm, f: &[f64]) -> Result<f64> {
    let [a, b, c, e] = s;
    let q = h.h[3];
    if q.fract() != 0.0 {
        return Err(Error::Invalid(format!("non-integer r12 power {q}")));
    }
    let q = q as i32 + 1;
    let z1 = a.xi + b.xi;
    let z2 = c.xi + e.xi;
    let mut total = 0.0;
    for (p, &fp) in f.iter().enumerate() {
        if fp == 0.0 {
            continue;
        }
        let mut rad = 0.0;
        for &(ba, pa) in &a.rad {
            for &(bb, pb) in &b.rad {
                let a1 = pa + pb + h.h[1] + 1.0;
                for &(bc, pc) in &c.rad {
                    for &(be, pe) in &e.rad {
                        let a2 = pc + pe + h.h[2] + 1.0;
                        rad += ba * bb * bc * be * y3_kernel(q, a1, a2, z1, z2, p as u32)?;
                    }
                }
            }
        }
        total += fp * rad;
    }
    let norm = (radial_norm(a)? * radial_norm(b)? * radial_norm(c)? * radial_norm(e)?).sqrt();
    Ok(h.h[0] * total / norm)
}

/// Coupling integral of four normalised orbitals. Values are cached by
/// [`IntegralKey`].
pub fn coupling_shapes(
    a: &Shape,
    b: &Shape,
    c: &Shape,
    e: &Shape,
    h: &InteractionTerm,
) -> Result<CouplingValue> {
    if h.h[0] == 0.0 {
        return Ok(CouplingValue {
            value: 0.0,
            quadrature: false,
        });
    }
    let key = IntegralKey::new([a, b, c, e], h);
    if let Some(v) = CACHE.read().get(&key) {
        HITS.fetch_add(1, Ordering::Relaxed);
        return Ok(*v);
    }
    MISSES.fetch_add(1, Ordering::Relaxed);
    let v = coupling_uncached(a, b, c, e, h)?;
    let mut map = CACHE.write();
    if map.len() >= CACHE_CAPACITY {
        map.clear();
    }
    map.insert(key, v);
    Ok(v)
}

/// [`coupling_shapes`] without the value cache.
pub fn coupling_uncached(
    a: &Shape,
    b: &Shape,
    c: &Shape,
    e: &Shape,
    h: &InteractionTerm,
) -> Result<CouplingValue> {
    h.validate()?;
    let shapes = [a, b, c, e];
    let f = angular_polynomial(shapes, h)?;
    let analytic_value = match f {
        Some(f) => match analytic(shapes, h, &f) {
            Ok(v) => Some(v),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    match analytic_value {
        Some(value) => Ok(CouplingValue {
            value,
            quadrature: false,
        }),
        None => {
            FALLBACKS.fetch_add(1, Ordering::Relaxed);
            let value = coupling_quadrature(a, b, c, e, h, 1e-8)?;
            Ok(CouplingValue {
                value,
                quadrature: true,
            })
        }
    }
}

/// I_II(a, b, c, e; h) from orbital labels and exponents.
pub fn coupling(
    a: &Orbital,
    b: &Orbital,
    c: &Orbital,
    e: &Orbital,
    h: &InteractionTerm,
    d: &DeltaTriple,
) -> Result<CouplingValue> {
    let s = [
        Shape::new(a, d)?,
        Shape::new(b, d)?,
        Shape::new(c, d)?,
        Shape::new(e, d)?,
    ];
    coupling_shapes(&s[0], &s[1], &s[2], &s[3], h)
}
