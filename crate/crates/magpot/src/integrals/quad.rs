//! Adaptive Gauss-Kronrod quadrature and the brute-force coupling oracle.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hydrogenic::Shape;

use super::InteractionTerm;

/// Radii below this are treated as contributing nothing; the brute-force
/// integrands stay bounded there but evaluate as inf * 0 in floating point.
pub(crate) const TINY_RADIUS: f64 = 1e-100;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        QuadOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-300,
            max_intervals: 4000,
        }
    }
}

impl QuadOptions {
    pub fn rel(rel_tol: f64) -> Self {
        QuadOptions {
            rel_tol,
            ..Default::default()
        }
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> Ordering {
        self.err.partial_cmp(&o.err).unwrap_or(Ordering::Equal)
    }
}

/// Globally adaptive G7/K15 on a finite interval.
pub fn adaptive<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = gk15(&mut f, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Piece {
        a,
        b,
        val: v,
        err: e,
    });
    let (mut total, mut err) = (v, e);
    let mut n = 1;
    while err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if n >= opts.max_intervals {
            return Err(Error::Convergence(format!(
                "quadrature on [{a}, {b}]: error {err:e} after {n} intervals (value {total:e})"
            )));
        }
        let p = heap.pop().expect("heap never empty");
        let m = 0.5 * (p.a + p.b);
        let (v1, e1) = gk15(&mut f, p.a, m);
        let (v2, e2) = gk15(&mut f, m, p.b);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece {
            a: p.a,
            b: m,
            val: v1,
            err: e1,
        });
        heap.push(Piece {
            a: m,
            b: p.b,
            val: v2,
            err: e2,
        });
        n += 1;
        if !total.is_finite() {
            return Err(Error::Convergence(format!(
                "non-finite integrand on [{a}, {b}]"
            )));
        }
    }
    // Re-sum to shed the drift of the running total.
    Ok(heap.iter().map(|p| p.val).sum())
}

/// Integral over (a, inf) truncated at `cutoff`.
pub fn semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    cutoff: f64,
    opts: QuadOptions,
) -> Result<f64> {
    adaptive(f, a, cutoff, opts)
}

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 {
                1.0
            } else if n == 1 {
                z
            } else {
                p1
            };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Barycentric Chebyshev interpolant on [-1, 1] (first-kind nodes).
pub struct ChebInterp {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    values: Vec<f64>,
}

impl ChebInterp {
    pub fn nodes(m: usize) -> Vec<f64> {
        (0..m)
            .map(|j| (PI * (j as f64 + 0.5) / m as f64).cos())
            .collect()
    }

    pub fn new(values: Vec<f64>) -> Self {
        let m = values.len();
        let nodes = Self::nodes(m);
        let weights = (0..m)
            .map(|j| {
                let s = (PI * (j as f64 + 0.5) / m as f64).sin();
                if j % 2 == 0 {
                    s
                } else {
                    -s
                }
            })
            .collect();
        ChebInterp {
            nodes,
            weights,
            values,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (mut num, mut den) = (0.0, 0.0);
        for ((&x, &w), &v) in self.nodes.iter().zip(&self.weights).zip(&self.values) {
            let d = t - x;
            if d == 0.0 {
                return v;
            }
            num += w * v / d;
            den += w / d;
        }
        num / den
    }
}

/// Polar nodes and weights on (0, pi), graded towards the equator from both
/// sides (theta = pi/2 -+ pi/2 v^3) so that log |cos theta| factors are
/// integrated to high order.
fn graded_theta(nhalf: usize) -> Vec<(f64, f64)> {
    let (xg, wg) = gauss_legendre(nhalf);
    let mut out = Vec::with_capacity(2 * nhalf);
    for (&u, &wt) in xg.iter().zip(&wg) {
        let v = 0.5 * (u + 1.0);
        let d = 0.5 * PI * v * v * v;
        let jac = 0.5 * wt * 1.5 * PI * v * v;
        out.push((0.5 * PI - d, jac));
        out.push((0.5 * PI + d, jac));
    }
    out
}

/// Numerical norm integral of an orbital shape squared over all space.
pub fn norm_quadrature(s: &Shape, opts: QuadOptions) -> Result<f64> {
    let theta: f64 = graded_theta(48)
        .into_iter()
        .map(|(th, wt)| {
            let v = s.theta_part(th);
            wt * v * v * th.sin()
        })
        .sum();
    let nphi = 64;
    let phi: f64 = (0..nphi)
        .map(|k| {
            let v = s.phi_part(2.0 * PI * k as f64 / nphi as f64);
            v * v
        })
        .sum::<f64>()
        * 2.0
        * PI
        / nphi as f64;
    let cutoff = 60.0 / s.xi;
    let rad = semi_infinite(
        |r| {
            let v = s.radial_part(r);
            v * v * r * r
        },
        0.0,
        cutoff,
        opts,
    )?;
    Ok(theta * phi * rad)
}

fn unit(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

fn angular_factor(
    s1: &Shape,
    s2: &Shape,
    theta: f64,
    phi: f64,
    hc: i32,
    hs: i32,
    hpc: i32,
    hps: i32,
) -> f64 {
    let sin_t = theta.sin().max(1e-300);
    let th = |s: &Shape| {
        let c = theta.cos();
        let poly: f64 = s
            .ang
            .iter()
            .map(|&(a, p)| a * crate::hydrogenic::cos_pow(c, p))
            .sum();
        sin_t.powf(s.sin_pow) * poly
    };
    s1.phi_part(phi)
        * s2.phi_part(phi)
        * th(s1)
        * th(s2)
        * theta.cos().powi(hc)
        * sin_t.powi(hs)
        * phi.cos().powi(hpc)
        * phi.sin().powi(hps)
}

/// A shape with its angular exponents rounded to integers, and the dropped
/// fractions of the cos and sin powers.
pub(crate) fn split_rounding(s: &Shape) -> (Shape, f64, f64) {
    let mut r = s.clone();
    r.sin_pow = r.sin_pow.round();
    for t in r.ang.iter_mut() {
        t.1 = t.1.round();
    }
    let cos_frac = s.ang.first().map_or(0.0, |t| t.1 - t.1.round());
    let sin_frac = s.sin_pow - r.sin_pow;
    (r, cos_frac, sin_frac)
}

/// One electron's angular factor split as rounded * (1 + excess).
struct Factor<'a> {
    exact: [&'a Shape; 2],
    round: [Shape; 2],
    cos_frac: f64,
    sin_frac: f64,
    hv: [i32; 4],
}

impl<'a> Factor<'a> {
    fn new(s1: &'a Shape, s2: &'a Shape, hv: [i32; 4]) -> Self {
        let (r1, c1, n1) = split_rounding(s1);
        let (r2, c2, n2) = split_rounding(s2);
        Factor {
            exact: [s1, s2],
            round: [r1, r2],
            cos_frac: c1 + c2,
            sin_frac: n1 + n2,
            hv,
        }
    }

    fn exact(&self, th: f64, ph: f64) -> f64 {
        let [c, s, pc, ps] = self.hv;
        angular_factor(self.exact[0], self.exact[1], th, ph, c, s, pc, ps)
    }

    fn rounded(&self, th: f64, ph: f64) -> f64 {
        let [c, s, pc, ps] = self.hv;
        angular_factor(&self.round[0], &self.round[1], th, ph, c, s, pc, ps)
    }

    /// exact / rounded - 1, singular (logarithmically) at the poles and equator
    fn excess(&self, th: f64) -> f64 {
        let (st, ct) = th.sin_cos();
        (self.cos_frac * ct.abs().max(1e-300).ln() + self.sin_frac * st.max(1e-300).ln()).exp_m1()
    }

    fn is_integer(&self) -> bool {
        self.cos_frac == 0.0 && self.sin_frac == 0.0
    }
}

/// int d(n_out) int d(chi) outer(n_out) inner(n_in) with n_in at angle beta
/// from n_out. The outer polar grid is graded towards the equator from both
/// sides so log singularities of the outer factor there are resolved.
fn sphere_pair(
    outer: impl Fn(f64, f64) -> f64,
    inner: impl Fn(f64, f64) -> f64,
    t: f64,
    (nhalf, nphi, nchi): (usize, usize, usize),
) -> f64 {
    let sb = (1.0 - t * t).max(0.0).sqrt();
    let mut acc = 0.0;
    for (th, jac) in graded_theta(nhalf) {
        let (st, ct) = th.sin_cos();
        for k in 0..nphi {
            let ph = 2.0 * PI * k as f64 / nphi as f64;
            let fo = outer(th, ph);
            if fo == 0.0 {
                continue;
            }
            let (sp, cp) = ph.sin_cos();
            let n1 = unit(th, ph);
            let e1 = [ct * cp, ct * sp, -st];
            let e2 = [-sp, cp, 0.0];
            let mut sum = 0.0;
            for q in 0..nchi {
                let chi = 2.0 * PI * q as f64 / nchi as f64;
                let (sc, cc) = chi.sin_cos();
                let n2: Vec<f64> = (0..3)
                    .map(|i| t * n1[i] + sb * (cc * e1[i] + sc * e2[i]))
                    .collect();
                sum += inner(n2[2].clamp(-1.0, 1.0).acos(), n2[1].atan2(n2[0]));
            }
            acc += jac * st * fo * sum;
        }
    }
    acc * (2.0 * PI / nphi as f64) * (2.0 * PI / nchi as f64)
}

fn electron_factors<'a>(s: [&'a Shape; 4], h: &InteractionTerm) -> (Factor<'a>, Factor<'a>) {
    let hv = h.integer_angular();
    (
        Factor::new(s[0], s[1], [hv[0], hv[2], hv[4], hv[6]]),
        Factor::new(s[2], s[3], [hv[1], hv[3], hv[5], hv[7]]),
    )
}

/// G(cos beta): the angular part of the coupling integrand integrated over
/// both directions at fixed angle beta between the two electrons.
///
/// With each electron's factor written as rounded * (1 + excess), the
/// integrand splits into pieces whose singular factor depends on one
/// electron only, and that electron's sphere is taken as the outer grid.
pub fn angular_kernel(
    a: &Shape,
    b: &Shape,
    c: &Shape,
    e: &Shape,
    h: &InteractionTerm,
    t: f64,
) -> f64 {
    let (f1, f2) = electron_factors([a, b, c, e], h);
    let grid = (32, 36, 36);
    let main = sphere_pair(
        |th, ph| f1.exact(th, ph),
        |th, ph| f2.rounded(th, ph),
        t,
        grid,
    );
    if f2.is_integer() {
        return main;
    }
    main + excess_pieces(&f1, &f2, t, grid, (12, 24, 24))
}

/// int R1 R2 x2 + int R1 x1 R2 x2, the second of which is quadratic in the
/// dropped fractions.
fn excess_pieces(
    f1: &Factor,
    f2: &Factor,
    t: f64,
    grid: (usize, usize, usize),
    grid_quadratic: (usize, usize, usize),
) -> f64 {
    let lin = sphere_pair(
        |th, ph| f2.rounded(th, ph) * f2.excess(th),
        |th, ph| f1.rounded(th, ph),
        t,
        grid,
    );
    let quad = if f1.is_integer() {
        0.0
    } else {
        sphere_pair(
            |th, ph| f2.rounded(th, ph) * f2.excess(th),
            |th, ph| f1.rounded(th, ph) * f1.excess(th),
            t,
            grid_quadratic,
        )
    };
    lin + quad
}

/// The part of G(cos beta) lost when electron 2's angular exponents are
/// rounded to integers, with electron 1 kept exact.
pub fn rounding_kernel(
    a: &Shape,
    b: &Shape,
    c: &Shape,
    e: &Shape,
    h: &InteractionTerm,
    t: f64,
) -> f64 {
    let (f1, f2) = electron_factors([a, b, c, e], h);
    if f2.is_integer() {
        return 0.0;
    }
    excess_pieces(&f1, &f2, t, (12, 18, 18), (8, 14, 14))
}

/// Brute-force value of the normalised coupling integral: tabulated angular
/// kernel in cos(beta) plus nested adaptive quadrature over r1, r2, r12,
/// with the norms also computed numerically.
pub fn coupling_quadrature(
    a: &Shape,
    b: &Shape,
    c: &Shape,
    e: &Shape,
    h: &InteractionTerm,
    rel_tol: f64,
) -> Result<f64> {
    let m = 40;
    let g = ChebInterp::new(
        ChebInterp::nodes(m)
            .into_iter()
            .map(|t| angular_kernel(a, b, c, e, h, t))
            .collect(),
    );
    let z1 = a.xi + b.xi;
    let z2 = c.xi + e.xi;
    let cutoff = 80.0 / z1.min(z2);
    let (xr, wr) = gauss_legendre(32);
    let hh = h.h;
    let qo = QuadOptions::rel(1e-12);
    let norm = (norm_quadrature(a, qo)?
        * norm_quadrature(b, qo)?
        * norm_quadrature(c, qo)?
        * norm_quadrature(e, qo)?)
    .sqrt();
    // absolute floors keep integrals that cancel to zero from stalling
    let floor = 1e-3 * rel_tol * norm;
    let raw = adaptive(
        |r1| {
            if r1 < TINY_RADIUS {
                return 0.0;
            }
            let f1 = a.radial_part(r1) * b.radial_part(r1) * r1.powf(1.0 + hh[1]);
            if f1 == 0.0 {
                return 0.0;
            }
            let inner = |r2: f64| {
                if r2 < TINY_RADIUS {
                    return 0.0;
                }
                let f2 = c.radial_part(r2) * e.radial_part(r2) * r2.powf(1.0 + hh[2]);
                let lo = (r1 - r2).abs();
                let hi = r1 + r2;
                let half = 0.5 * (hi - lo);
                let mid = 0.5 * (hi + lo);
                let s: f64 = xr
                    .iter()
                    .zip(&wr)
                    .map(|(&u, &w)| {
                        let r12 = mid + half * u;
                        let t =
                            ((r1 * r1 + r2 * r2 - r12 * r12) / (2.0 * r1 * r2)).clamp(-1.0, 1.0);
                        w * r12.powf(1.0 + hh[3]) * g.eval(t)
                    })
                    .sum();
                f2 * s * half
            };
            let inner_opts = QuadOptions {
                rel_tol: rel_tol * 0.1,
                abs_tol: 0.1 * floor / (cutoff * f1.abs()),
                ..Default::default()
            };
            let lower = adaptive(inner, 0.0, r1.min(cutoff), inner_opts).unwrap_or(f64::NAN);
            let upper = if r1 < cutoff {
                adaptive(inner, r1, cutoff, inner_opts).unwrap_or(f64::NAN)
            } else {
                0.0
            };
            f1 * (lower + upper)
        },
        0.0,
        cutoff,
        QuadOptions {
            rel_tol,
            abs_tol: floor,
            ..Default::default()
        },
    )?;
    if !raw.is_finite() {
        return Err(Error::Convergence("inner radial quadrature failed".into()));
    }
    Ok(hh[0] * raw / norm)
}
