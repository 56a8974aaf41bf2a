//! Beta/Gamma closed forms and the half-domain radial integral.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{domain, Error, Result};

fn beta_half(a: f64, b: f64) -> f64 {
    // B(a, b) through log-gamma; all arguments here are positive.
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// Integral of sin^a x cos^p x over [0, pi], real a > -1, integer p >= 0.
pub fn y1(a: f64, p: i32) -> Result<f64> {
    if p < 0 {
        return Err(domain(format!("y1: p = {p} must be >= 0")));
    }
    y1_real(a, p as f64)
}

/// [`y1`] with a real cosine power whose sign follows the nearest integer
/// (see [`crate::hydrogenic::cos_pow`]).
pub fn y1_real(a: f64, c: f64) -> Result<f64> {
    if a <= -1.0 {
        return Err(domain(format!("y1: sine power {a} <= -1")));
    }
    if c <= -1.0 {
        return Err(domain(format!("y1: cosine power {c} <= -1")));
    }
    if (c.round() as i64) % 2 != 0 {
        return Ok(0.0);
    }
    Ok(beta_half((a + 1.0) / 2.0, (c + 1.0) / 2.0))
}

/// Integral of sin^k x cos^p x over [0, 2 pi].
pub fn y2(k: u32, p: u32) -> f64 {
    if k % 2 == 1 || p % 2 == 1 {
        return 0.0;
    }
    if k == 0 && p == 0 {
        return 2.0 * PI;
    }
    // 2 pi (k-1)!! (p-1)!! / (k+p)!!
    let mut num = 1.0;
    let mut i = 1;
    while i < k {
        num *= i as f64;
        i += 2;
    }
    let mut i = 1;
    while i < p {
        num *= i as f64;
        i += 2;
    }
    let mut den = 1.0;
    let mut i = 2;
    while i <= k + p {
        den *= i as f64;
        i += 2;
    }
    2.0 * PI * num / den
}

/// Integral of r^a e^(-alpha r) over (0, inf).
pub fn gamma_integral(a: f64, alpha: f64) -> Result<f64> {
    if a <= -1.0 || alpha <= 0.0 {
        return Err(domain(format!(
            "gamma integral needs a > -1 and rate > 0 (a={a}, rate={alpha})"
        )));
    }
    Ok((ln_gamma(a + 1.0) - (a + 1.0) * alpha.ln()).exp())
}

/// 2F1(1, c; d; z) for 0 <= z < 1 by its power series.
pub fn hyp2f1_one(c: f64, d: f64, z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(domain(format!("2F1 argument {z} outside [0,1)")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..2_000_000 {
        let kf = k as f64;
        term *= (c + kf) / (d + kf) * z;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > 2 {
            return Ok(sum);
        }
    }
    Err(Error::Convergence(format!("2F1(1,{c};{d};{z}) series")))
}

/// H(a, alpha; b, beta) = int_0^inf y^b e^(-beta y) int_0^y x^a e^(-alpha x) dx dy.
///
/// Needs a > -1 and a + b + 2 > 0.
pub fn half_domain(a: f64, alpha: f64, b: f64, beta: f64) -> Result<f64> {
    if a <= -1.0 || a + b + 2.0 <= 0.0 || alpha <= 0.0 || beta <= 0.0 {
        return Err(domain(format!(
            "half-domain integral diverges (a={a}, b={b})"
        )));
    }
    let s = alpha + beta;
    let z = alpha / s;
    if z > 0.5 && b > -1.0 {
        let total = gamma_integral(a, alpha)? * gamma_integral(b, beta)?;
        return Ok(total - half_domain(b, beta, a, alpha)?);
    }
    let c = a + b + 2.0;
    let pre = (ln_gamma(c) - c * s.ln()).exp() / (a + 1.0);
    Ok(pre * hyp2f1_one(c, a + 2.0, z)?)
}

/// n! as f64.
pub fn factorial(n: u32) -> f64 {
    if n < 20 {
        (1..=n).map(|k| k as f64).product()
    } else {
        gamma(n as f64 + 1.0)
    }
}

/// Binomial coefficient as f64.
pub fn binom(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r.round()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y1_y2_closed_forms() {
        assert!((y1(0.0, 0).unwrap() - PI).abs() < 1e-14);
        assert_eq!(y1(1.0, 1).unwrap(), 0.0);
        assert!((y1(2.0, 2).unwrap() - PI / 8.0).abs() < 1e-14);
        assert!((y2(0, 0) - 2.0 * PI).abs() < 1e-14);
        assert_eq!(y2(1, 0), 0.0);
        assert!((y2(2, 2) - PI / 4.0).abs() < 1e-14);
        assert!(y1(-1.0, 0).is_err());
    }

    #[test]
    fn half_domains_add_to_product() {
        for &(a, al, b, be) in &[
            (0.0, 1.0, 0.0, 1.0),
            (1.3, 2.0, 0.4, 0.5),
            (2.0, 0.3, 3.5, 4.0),
        ] {
            let t = gamma_integral(a, al).unwrap() * gamma_integral(b, be).unwrap();
            let s = half_domain(a, al, b, be).unwrap() + half_domain(b, be, a, al).unwrap();
            assert!((s - t).abs() < 1e-13 * t, "{a} {b}");
        }
        // int_0^inf e^-y int_0^y e^-x dx dy = 1/2
        assert!((half_domain(0.0, 1.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
    }
}
