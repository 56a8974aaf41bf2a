//! Radial triple integrals over (r1, r2, r12): Y_V, Y_III and the exact
//! cos(beta)^p kernel used by the coupling integral.

use std::collections::HashMap;
use std::sync::LazyLock;

use num_rational::Ratio;
use parking_lot::RwLock;

use super::quad::{adaptive, gauss_legendre, QuadOptions, TINY_RADIUS};
use super::special::{binom, factorial, gamma_integral, half_domain};
use crate::error::{domain, Error, Result};

/// Argument vector of one of the two radial integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialSpec {
    /// (rate1, rate2, r1 power, r2 power, r12 power)
    V([f64; 5]),
    /// (r12 power, r1 power, r2 power, rate1, rate2, sin(beta) power, cos(beta) power)
    III([f64; 7]),
}

impl RadialSpec {
    pub fn eval(&self) -> Result<f64> {
        match self {
            RadialSpec::V(s) => y5(*s),
            RadialSpec::III(s) => y3(*s),
        }
    }

    /// Brute-force nested quadrature of the defining triple integral.
    ///
    /// A loose first pass over the absolute integrand sets an absolute error
    /// floor, so integrals that cancel to zero still terminate.
    pub fn quadrature(&self, rel_tol: f64) -> Result<f64> {
        let (rates, p1, p2, p12, sp, cp) = match *self {
            RadialSpec::V(s) => ((s[0], s[1]), s[2], s[3], s[4], 0.0, 0.0),
            RadialSpec::III(s) => ((s[3], s[4]), s[1], s[2], s[0], s[5], s[6]),
        };
        if rates.0 <= 0.0 || rates.1 <= 0.0 {
            return Err(domain("radial rates must be positive"));
        }
        let cutoff = 60.0 / rates.0.min(rates.1);
        let nested = |abs: bool, rel: f64, floor: f64| -> Result<f64> {
            let angular = |c: f64| {
                let s = (1.0 - c * c).max(0.0).sqrt();
                let v = s.powf(sp) * c.powi(cp as i32);
                if abs {
                    v.abs()
                } else {
                    v
                }
            };
            let mut failure = None;
            let inner_failure = std::cell::RefCell::new(None);
            let v = adaptive(
                |r1| {
                    if r1 < TINY_RADIUS {
                        return 0.0;
                    }
                    let pre1 = r1.powf(p1) * (-rates.0 * r1).exp();
                    let floor2 = 0.05 * floor / (cutoff * pre1).max(1e-300);
                    let f2 = |r2: f64| {
                        if r2 < TINY_RADIUS {
                            return 0.0;
                        }
                        let pre2 = r2.powf(p2) * (-rates.1 * r2).exp();
                        let hi = r1 + r2;
                        let lo = (r1 - r2).abs();
                        let floor3 = 0.05 * floor2 / (hi * pre2).max(1e-300);
                        let o = QuadOptions {
                            rel_tol: 0.05 * rel,
                            abs_tol: floor3,
                            ..Default::default()
                        };
                        let inner = if lo > 0.1 * hi {
                            // in c = cos(beta) directly; recovering c from r12 cancels badly when r1 >> r2
                            let g = |c: f64| {
                                let r12 = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * c).max(0.0).sqrt();
                                r12.powf(p12 - 1.0) * r1 * r2 * angular(c)
                            };
                            adaptive(g, -1.0, 1.0, o)
                        } else {
                            // r12 = e^y keeps the lower endpoint smooth when r1 ~ r2
                            let g = |y: f64| {
                                let r12 = y.exp();
                                let c = ((r1 * r1 + r2 * r2 - r12 * r12) / (2.0 * r1 * r2))
                                    .clamp(-1.0, 1.0);
                                r12.powf(p12 + 1.0) * angular(c)
                            };
                            adaptive(g, lo.max(hi * 1e-16).ln(), hi.ln(), o)
                        };
                        match inner {
                            Ok(v) => pre2 * v,
                            Err(e) => {
                                inner_failure.borrow_mut().get_or_insert(e);
                                f64::NAN
                            }
                        }
                    };
                    let o = QuadOptions {
                        rel_tol: 0.05 * rel,
                        abs_tol: floor2,
                        ..Default::default()
                    };
                    let a = adaptive(f2, 0.0, r1.min(cutoff), o);
                    let b = if r1 < cutoff {
                        adaptive(f2, r1, cutoff, o)
                    } else {
                        Ok(0.0)
                    };
                    match (a, b) {
                        (Ok(a), Ok(b)) => pre1 * (a + b),
                        (Err(e), _) | (_, Err(e)) => {
                            failure.get_or_insert(e);
                            f64::NAN
                        }
                    }
                },
                0.0,
                cutoff,
                QuadOptions {
                    rel_tol: rel,
                    abs_tol: floor,
                    ..Default::default()
                },
            );
            if let Some(e) = inner_failure.into_inner().or(failure) {
                return Err(e);
            }
            v
        };
        let magnitude = nested(true, 1e-3, 1e-300)?;
        let v = nested(false, rel_tol, rel_tol * magnitude)?;
        if !v.is_finite() {
            return Err(Error::Convergence(
                "radial quadrature produced a non-finite value".into(),
            ));
        }
        Ok(v)
    }
}

fn is_int(x: f64) -> bool {
    x == x.round()
}

/// Y_V: int r1^s3 e^(-s1 r1) int r2^s4 e^(-s2 r2) int_{|r1-r2|}^{r1+r2} r12^s5.
///
/// Integer s5 >= 0 is done in closed form through the two half-domains;
/// s5 = -1 and non-integer s5 integrate the closed inner integral in 2-D.
pub fn y5(s: [f64; 5]) -> Result<f64> {
    let [z1, z2, a, b, c] = s;
    if z1 <= 0.0 || z2 <= 0.0 {
        return Err(Error::Convergence(format!(
            "Y_V rates must be positive: {s:?}"
        )));
    }
    if c < -1.0 || a <= -2.0 || b <= -2.0 || a + b + c + 3.0 <= 0.0 {
        return Err(Error::Convergence(format!("Y_V diverges for {s:?}")));
    }
    if c >= 0.0 && is_int(c) {
        let n = c as u32 + 1;
        let mut sum = 0.0;
        let mut k = 1;
        while k <= n {
            let w = 2.0 * binom(n, k) / n as f64;
            let kf = k as f64;
            let rest = (n - k) as f64;
            sum += w
                * (half_domain(a + kf, z1, b + rest, z2)? + half_domain(b + kf, z2, a + rest, z1)?);
            k += 2;
        }
        return Ok(sum);
    }
    y5_by_quadrature(s, 1e-12)
}

fn y5_by_quadrature(s: [f64; 5], rel: f64) -> Result<f64> {
    let [z1, z2, a, b, c] = s;
    let inner = move |r1: f64, r2: f64| -> f64 {
        let (hi, lo) = (r1 + r2, (r1 - r2).abs());
        if c == -1.0 {
            (hi / lo).ln()
        } else {
            (hi.powf(c + 1.0) - lo.powf(c + 1.0)) / (c + 1.0)
        }
    };
    let cutoff = 60.0 / z1.min(z2);
    let opts = QuadOptions::rel(rel);
    let mut failure = None;
    let v = adaptive(
        |r1| {
            if r1 < TINY_RADIUS {
                return 0.0;
            }
            let f = |r2: f64| {
                if r2 <= 0.0 || r2 == r1 {
                    return 0.0;
                }
                r2.powf(b) * (-z2 * r2).exp() * inner(r1, r2)
            };
            let lo = adaptive(f, 0.0, r1.min(cutoff), opts);
            let hi = if r1 < cutoff {
                adaptive(f, r1, cutoff, opts)
            } else {
                Ok(0.0)
            };
            match (lo, hi) {
                (Ok(x), Ok(y)) => r1.powf(a) * (-z1 * r1).exp() * (x + y),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        cutoff,
        QuadOptions::rel(rel),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    v
}

/// Y_III. Even sin(beta) power: the finite triple sum of Y_V terms as
/// printed, used when every term converges on its own; otherwise the exact
/// kernel route. Odd sin(beta) power: exact Beta reduction for odd r12
/// power, quadrature in beta otherwise.
pub fn y3(s: [f64; 7]) -> Result<f64> {
    let [s1, s2, s3, s4, s5, s6, s7] = s;
    if s4 <= 0.0 || s5 <= 0.0 {
        return Err(Error::Convergence(format!(
            "Y_III rates must be positive: {s:?}"
        )));
    }
    if s6 < 0.0 || s7 < 0.0 || !is_int(s6) || !is_int(s7) {
        return Err(domain(format!(
            "Y_III angular powers must be non-negative integers: {s:?}"
        )));
    }
    let (h6, h7) = (s6 as u32, s7 as u32);
    if h6 % 2 == 0 {
        if let Some(v) = y3_printed_even(s)? {
            return Ok(v);
        }
        if is_int(s1) && s1 >= -1.0 {
            // (1 - c^2)^(s6/2) c^s7 expanded into pure cosine powers.
            let mut sum = 0.0;
            for k in 0..=h6 / 2 {
                let w = binom(h6 / 2, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
                sum += w * y3_kernel(s1 as i32, s2, s3, s4, s5, h7 + 2 * k)?;
            }
            return Ok(sum);
        }
        return RadialSpec::III(s).quadrature(1e-10);
    }
    if is_int(s1) && s1 >= 1.0 && (s1 as i64) % 2 == 1 {
        return y3_odd_beta(s1 as u32, s2, s3, s4, s5, h6, h7);
    }
    y3_beta_quadrature(s)
}

fn y5_converges(a: f64, b: f64, c: f64) -> bool {
    c >= 0.0 && is_int(c) && a > -2.0 && b > -2.0 && a + b + c + 3.0 > 0.0
}

/// The printed even-branch triple sum, or None if some Y_V term diverges.
fn y3_printed_even(s: [f64; 7]) -> Result<Option<f64>> {
    let [s1, s2, s3, s4, s5, s6, s7] = s;
    let (h6, h7) = (s6 as i64 / 2, s7 as i64);
    let mut terms = Vec::new();
    for k1 in 0..=h6 {
        let m = h7 + 2 * k1;
        for k2 in 0..=m {
            for k3 in 0..=k2 {
                let a = s2 + (2 * k2 - 2 * k3 - m) as f64;
                let b = s3 + (2 * k3 - m) as f64;
                let c = s1 + (2 * h7 + 4 * k1 - 2 * k2) as f64;
                if !y5_converges(a, b, c) {
                    return Ok(None);
                }
                let sign = if (h7 + k1 - k2).rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                };
                let num = factorial(h6 as u32) * factorial(m as u32);
                let den = 2f64.powi(m as i32)
                    * factorial((h6 - k1) as u32)
                    * factorial(k1 as u32)
                    * factorial((m - k2) as u32)
                    * factorial((k2 - k3) as u32)
                    * factorial(k3 as u32);
                terms.push((sign * num / den, [s4, s5, a, b, c]));
            }
        }
    }
    let mut sum = 0.0;
    for (w, arg) in terms {
        sum += w * y5(arg)?;
    }
    Ok(Some(sum))
}

/// Odd s6 with odd r12 power: the r12 integral becomes
/// r1 r2 int_{-1}^{1} (r1^2 + r2^2 - 2 r1 r2 c)^((s1-1)/2) (1-c^2)^(s6/2) c^s7 dc,
/// a polynomial in (r1, r2) with Beta-function coefficients.
fn y3_odd_beta(s1: u32, s2: f64, s3: f64, s4: f64, s5: f64, s6: u32, s7: u32) -> Result<f64> {
    let e = (s1 - 1) / 2;
    let mut sum = 0.0;
    // (r1^2 + r2^2 - 2 r1 r2 c)^e = sum over (i, j, k) with i + j + k = e
    for k in 0..=e {
        // int (1-c^2)^(s6/2) c^(s7+k) dc over [-1, 1]
        let p = s7 + k;
        if p % 2 == 1 {
            continue;
        }
        let ang = super::special::y1(s6 as f64 + 1.0, p as i32)?;
        let ck = binom(e, k) * (-2.0f64).powi(k as i32);
        for i in 0..=(e - k) {
            let j = e - k - i;
            let w = ck * binom(e - k, i) * ang;
            let pow1 = s2 + 1.0 + (2 * i + k) as f64;
            let pow2 = s3 + 1.0 + (2 * j + k) as f64;
            sum += w * gamma_integral(pow1, s4)? * gamma_integral(pow2, s5)?;
        }
    }
    Ok(sum)
}

/// Remaining case: r1 r2 int_0^pi r12^(s1-1) sin^(s6+1) cos^s7 dbeta by
/// Gauss-Legendre in beta, adaptive in r1 and r2.
fn y3_beta_quadrature(s: [f64; 7]) -> Result<f64> {
    let [s1, s2, s3, s4, s5, s6, s7] = s;
    let (x, w) = gauss_legendre(64);
    let nodes: Vec<(f64, f64, f64, f64)> = x
        .iter()
        .zip(&w)
        .map(|(&u, &wt)| {
            let b = 0.5 * std::f64::consts::PI * (u + 1.0);
            let (sb, cb) = b.sin_cos();
            (
                cb,
                sb.powf(s6 + 1.0) * cb.powi(s7 as i32),
                wt * 0.5 * std::f64::consts::PI,
                b,
            )
        })
        .collect();
    let cutoff = 60.0 / s4.min(s5);
    let opts = QuadOptions::rel(1e-11);
    let mut failure = None;
    let v = adaptive(
        |r1| {
            if r1 < TINY_RADIUS {
                return 0.0;
            }
            let f = |r2: f64| {
                if r2 < TINY_RADIUS {
                    return 0.0;
                }
                let ang: f64 = nodes
                    .iter()
                    .map(|&(c, g, wt, _)| {
                        let r12 = (r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * c).max(0.0).sqrt();
                        wt * g * r12.powf(s1 - 1.0)
                    })
                    .sum();
                r2.powf(s3 + 1.0) * (-s5 * r2).exp() * ang
            };
            let lo = adaptive(f, 0.0, r1.min(cutoff), opts);
            let hi = if r1 < cutoff {
                adaptive(f, r1, cutoff, opts)
            } else {
                Ok(0.0)
            };
            match (lo, hi) {
                (Ok(a), Ok(b)) => r1.powf(s2 + 1.0) * (-s4 * r1).exp() * (a + b),
                (Err(e), _) | (_, Err(e)) => {
                    failure.get_or_insert(e);
                    f64::NAN
                }
            }
        },
        0.0,
        cutoff,
        opts,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    v
}

type Kernel = Vec<(i32, f64)>;

static KERNELS: LazyLock<RwLock<HashMap<(i32, u32), Kernel>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// K_{q,p}(s, L) = int_{L-s}^{L+s} r12^q ((s^2 + L^2 - r12^2) / (2 s L))^p dr12
/// for s <= L, as (i, c_i) with K = sum c_i s^i L^(q+1-i). Coefficients are
/// built in exact rational arithmetic; the negative powers of s cancel.
pub fn kernel(q: i32, p: u32) -> Result<Kernel> {
    if let Some(k) = KERNELS.read().get(&(q, p)) {
        return Ok(k.clone());
    }
    if q < -1 || (q == -1 && p == 0) {
        return Err(domain(format!(
            "r12 kernel with power {q} is logarithmic or divergent"
        )));
    }
    type R = Ratio<i128>;
    let bin = |n: i64, k: i64| -> i128 {
        let mut r: i128 = 1;
        for i in 0..k {
            r = r * (n - i) as i128 / (i + 1) as i128;
        }
        r
    };
    let mut acc: HashMap<i32, R> = HashMap::new();
    let pp = p as i64;
    for j in 0..=pp {
        let n = q as i64 + 2 * j + 1;
        if n <= 0 {
            return Err(domain(format!("r12 kernel with power {q} is logarithmic")));
        }
        let sign: i128 = if j % 2 == 0 { 1 } else { -1 };
        let pre = R::new(sign * bin(pp, j), n as i128 * (1i128 << p));
        for m in 0..=(pp - j) {
            let cm = bin(pp - j, m);
            let mut k = 1;
            while k <= n {
                let c = pre * R::from_integer(2 * cm * bin(n, k));
                let i = (k + 2 * m - pp) as i32;
                *acc.entry(i).or_insert_with(|| R::from_integer(0)) += c;
                k += 2;
            }
        }
    }
    let mut out: Kernel = Vec::new();
    for (i, c) in acc {
        if *c.numer() == 0 {
            continue;
        }
        if i <= 0 {
            return Err(Error::Invalid(format!("kernel ({q},{p}) kept s^{i}")));
        }
        out.push((i, *c.numer() as f64 / *c.denom() as f64));
    }
    out.sort_by_key(|t| t.0);
    KERNELS.write().insert((q, p), out.clone());
    Ok(out)
}

/// Y_III with no sine factor and cos(beta)^p, through the exact kernel:
/// int int r1^a1 e^(-z1 r1) r2^a2 e^(-z2 r2) K_{q,p}(r<, r>) dr1 dr2.
pub fn y3_kernel(q: i32, a1: f64, a2: f64, z1: f64, z2: f64, p: u32) -> Result<f64> {
    let k = kernel(q, p)?;
    let tot = q + 1;
    let mut sum = 0.0;
    for &(i, c) in &k {
        let fi = i as f64;
        let rest = (tot - i) as f64;
        sum += c
            * (half_domain(a1 + fi, z1, a2 + rest, z2)? + half_domain(a2 + fi, z2, a1 + rest, z1)?);
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y5_closed_examples() {
        assert!((y5([1.0, 1.0, 0.0, 0.0, 0.0]).unwrap() - 1.0).abs() < 1e-14);
        assert!((y5([2.0, 2.0, 1.0, 1.0, 1.0]).unwrap() - 0.125).abs() < 1e-15);
    }

    #[test]
    fn kernel_p0_is_plain_r12_integral() {
        // int_{L-s}^{L+s} r12 dr = 2 s L
        assert_eq!(kernel(1, 0).unwrap(), vec![(1, 2.0)]);
        // p = 1, q = 1: int r12 (s^2+L^2-r12^2)/(2sL) = (2/3) s^2 ... check numerically
        let k = kernel(1, 1).unwrap();
        let (s, l) = (0.3, 1.1);
        let direct: f64 = {
            let (x, w) = gauss_legendre(20);
            x.iter()
                .zip(&w)
                .map(|(&u, &wt)| {
                    let r = l + s * u;
                    wt * s * r * (s * s + l * l - r * r) / (2.0 * s * l)
                })
                .sum()
        };
        let v: f64 = k.iter().map(|&(i, c)| c * s.powi(i) * l.powi(2 - i)).sum();
        assert!((v - direct).abs() < 1e-14);
    }

    #[test]
    fn y3_reduces_to_y5() {
        let s = [1.0, 0.5, 1.5, 1.3, 0.7, 0.0, 0.0];
        let a = y3(s).unwrap();
        let b = y5([1.3, 0.7, 0.5, 1.5, 1.0]).unwrap();
        assert!((a - b).abs() < 1e-14 * b.abs());
    }

    #[test]
    fn printed_and_kernel_routes_agree() {
        let s = [2.0, 3.0, 2.5, 1.1, 0.9, 2.0, 2.0];
        let printed = y3_printed_even(s).unwrap().unwrap();
        let mut k = 0.0;
        for j in 0..=1u32 {
            let w = if j == 0 { 1.0 } else { -1.0 };
            k += w * y3_kernel(2, 3.0, 2.5, 1.1, 0.9, 2 + 2 * j).unwrap();
        }
        assert!((printed - k).abs() < 1e-11 * k.abs(), "{printed} {k}");
    }
}
