//! Delta functions of Z and the closed-form eigensolutions of the modified
//! hydrogen-like equation.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::LazyLock;

use parking_lot::RwLock;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quantum::{consts, Orbital};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaTriple {
    pub z: u32,
    pub kdot: u32,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl DeltaTriple {
    /// All corrections switched off (plain Schrodinger limit).
    pub fn zero(z: u32) -> Self {
        DeltaTriple {
            z,
            kdot: 1,
            lambda1: 0.0,
            lambda2: 0.0,
            lambda3: 0.0,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d3 == 0.0
    }
}

/// Closed-form cascade delta_1 -> delta_2 -> delta_3.
///
/// Every difference of nearly equal quantities is rewritten in an
/// algebraically identical cancellation-free form; delta_1 is ~1e-14 at
/// Z = 1 and the literal expression returns noise in double precision.
pub fn solve_deltas(z: u32) -> Result<DeltaTriple> {
    let k = consts();
    let zf = z as f64;
    let az = k.alpha * zf;
    if z == 0 || az >= 1.0 {
        return Err(domain(format!("need 1 <= Z and alpha Z < 1, got Z={z}")));
    }
    let kd = (az + 1.0).floor();
    let kdot = kd as u32;
    let x = (az / kd).powi(2);
    let base = 2.0 * x / (1.0 + (1.0 - x).sqrt());
    let c = k.delta1s * k.alpha * k.alpha * zf.powi(3) / kd.powi(3);
    let q1 = base + 1.5 * c;
    let q2 = base - 0.5 * c;
    if q1 <= 0.0 || q2 <= 0.0 {
        return Err(domain(format!("negative radicand in Lambda_1/2 at Z={z}")));
    }
    let tk = 2.0 * kd - 1.0;
    let (s1, s2) = (q1.sqrt(), q2.sqrt());
    let lambda1 = (2.0 * az - tk * s1).powi(2) / q1;
    let lambda2 = (2.0 * az - tk * s2).powi(2) / q2;
    let dq = q1 - q2;
    let diff = (2.0 * az).powi(2) * dq / (q1 * q2) - 4.0 * az * tk * dq / ((s1 + s2) * s1 * s2);

    let u = 2.0 * kd + 1.0 + lambda1.sqrt();
    let k1 = kd + 1.0;
    let rad3 = k1.powi(4) - 8.0 * k.delta2s * zf * zf * u * u;
    if rad3 <= 0.0 {
        return Err(domain(format!("negative radicand in Lambda_3 at Z={z}")));
    }
    let lambda3 = (k1 * k1 * u / rad3.sqrt() - 2.0 * kd + 1.0).powi(2);

    let a = lambda2 - lambda3 + 16.0;
    let xx = 64.0 * diff;
    let rad1 = a * a - xx;
    if rad1 < 0.0 {
        return Err(domain(format!("negative radicand in delta_1 at Z={z}")));
    }
    let sa = rad1.sqrt();
    let (d1, d2) = if a > 0.0 && xx > 0.0 {
        let small = xx / (a + sa);
        let d1 = small * small / 2048.0;
        let hi = 2.0 * (lambda2 - lambda3 + 8.0) - small;
        (d1, hi * (48.0 - a - sa) / 2048.0)
    } else {
        let d1 = (a - sa).powi(2) / 2048.0;
        if d1 == 0.0 {
            return Err(Error::DivisionByZero(format!("delta_1 = 0 at Z={z}")));
        }
        let t = 16.0 * (2.0 * d1).sqrt() - lambda2 + lambda1;
        (d1, 0.125 - t * t / (1024.0 * d1))
    };
    if 1.0 - 8.0 * d2 < 0.0 {
        return Err(domain(format!("delta_2 > 1/8 at Z={z}")));
    }
    let d3 =
        (2.0 - (1.0 - 8.0 * d2).sqrt() - 2.0 * (2.0 * d1).sqrt()).powi(2) / 8.0 - lambda1 / 8.0;
    Ok(DeltaTriple {
        z,
        kdot,
        lambda1,
        lambda2,
        lambda3,
        d1,
        d2,
        d3,
    })
}

static DELTA_CACHE: LazyLock<RwLock<HashMap<u32, DeltaTriple>>> =
    LazyLock::new(|| RwLock::new(HashMap::new()));

/// Cached [`solve_deltas`].
pub fn deltas(z: u32) -> Result<DeltaTriple> {
    if let Some(d) = DELTA_CACHE.read().get(&z) {
        return Ok(*d);
    }
    let d = solve_deltas(z)?;
    DELTA_CACHE.write().insert(z, d);
    Ok(d)
}

/// (T, L) for an orbital label.
pub fn t_and_l(o: &Orbital, d: &DeltaTriple) -> Result<(f64, f64)> {
    let r = 0.25 - 2.0 * d.d2;
    if r < 0.0 {
        return Err(domain(format!("1/4 - 2 delta_2 < 0 for {}", o.label())));
    }
    let sj = if o.j % 2 == 0 { 1.0 } else { -1.0 };
    let t = o.l as f64 - o.m.unsigned_abs() as f64 + 0.5 - sj * r.sqrt();
    let rm = (o.m as f64).powi(2) + 2.0 * d.d1;
    if rm < 0.0 {
        return Err(domain(format!("m^2 + 2 delta_1 < 0 for {}", o.label())));
    }
    let sp = if o.p % 2 == 0 { 1.0 } else { -1.0 };
    Ok((t, t - sp * rm.sqrt()))
}

/// sqrt((L + 1/2)^2 - 2 delta_3), i.e. 2 gamma + 1 / 2 where gamma is the
/// leading radial power.
fn radial_root(o: &Orbital, l_eff: f64, d: &DeltaTriple) -> Result<f64> {
    let r = (l_eff + 0.5).powi(2) - 2.0 * d.d3;
    if r < 0.0 {
        return Err(domain(format!(
            "(L+1/2)^2 < 2 delta_3 for orbital {}",
            o.label()
        )));
    }
    Ok(r.sqrt())
}

/// D = n - l - 1/2 + sqrt((L+1/2)^2 - 2 delta_3); the eigen exponent is Z / D.
pub fn radial_denominator(o: &Orbital, d: &DeltaTriple) -> Result<f64> {
    let (_, l_eff) = t_and_l(o, d)?;
    Ok(o.n as f64 - o.l as f64 - 0.5 + radial_root(o, l_eff, d)?)
}

/// Eigen exponent and energy; the orbital's own xi is ignored.
pub fn eigen_xi_energy(o: &Orbital, z: u32, d: &DeltaTriple) -> Result<(f64, f64)> {
    let dd = radial_denominator(o, d)?;
    let xi = z as f64 / dd;
    Ok((xi, -0.5 * xi * xi))
}

pub fn eigen_energy(o: &Orbital, z: u32, d: &DeltaTriple) -> Result<f64> {
    Ok(eigen_xi_energy(o, z, d)?.1)
}

/// E(a) - E(b) without the cancellation of subtracting two energies.
///
/// Near-degenerate levels differ by O(delta), so each difference in the chain
/// T, L, sqrt((L+1/2)^2 - 2 delta_3), D is formed directly.
pub fn level_difference(a: &Orbital, b: &Orbital, z: u32, d: &DeltaTriple) -> Result<f64> {
    let (_, la) = t_and_l(a, d)?;
    let (_, lb) = t_and_l(b, d)?;
    let int_a = a.l as f64 - a.m.unsigned_abs() as f64;
    let int_b = b.l as f64 - b.m.unsigned_abs() as f64;
    let r2 = (0.25 - 2.0 * d.d2).sqrt();
    let sj = |o: &Orbital| if o.j % 2 == 0 { 1.0 } else { -1.0 };
    let dt = (int_a - int_b) - (sj(a) - sj(b)) * r2;
    let ma = (a.m as f64).powi(2) + 2.0 * d.d1;
    let mb = (b.m as f64).powi(2) + 2.0 * d.d1;
    let sp = |o: &Orbital| if o.p % 2 == 0 { 1.0 } else { -1.0 };
    let (sa, sb) = (ma.sqrt(), mb.sqrt());
    let dm = if sp(a) == sp(b) {
        sp(a) * (ma - mb) / (sa + sb)
    } else {
        sp(a) * (sa + sb)
    };
    let dl = dt - dm;
    let (ra, rb) = (radial_root(a, la, d)?, radial_root(b, lb, d)?);
    let dr = dl * (la + lb + 1.0) / (ra + rb);
    let da = a.n as f64 - a.l as f64 - 0.5 + ra;
    let db = b.n as f64 - b.l as f64 - 0.5 + rb;
    let dd = (a.n as f64 - a.l as f64) - (b.n as f64 - b.l as f64) + dr;
    let zf = z as f64;
    Ok(0.5 * zf * zf * dd * (da + db) / (da * da * db * db))
}

/// Right-hand sides of the three defining identities.
pub fn defining_targets(z: u32) -> [f64; 3] {
    let k = consts();
    let zf = z as f64;
    let az = k.alpha * zf;
    let kd = (az + 1.0).floor();
    let x = (az / kd).powi(2);
    let rel = -x / (1.0 + (1.0 - x).sqrt()) / (k.alpha * k.alpha);
    let c = k.delta1s * zf.powi(3) / kd.powi(3);
    [
        rel - 0.75 * c,
        rel + 0.25 * c,
        16.0 * k.delta2s * zf.powi(4) / (kd + 1.0).powi(4),
    ]
}

/// Left minus right side of each defining identity, in hartree.
pub fn defining_residuals(z: u32, d: &DeltaTriple) -> Result<[f64; 3]> {
    let kd = ((consts().alpha * z as f64) + 1.0).floor() as u32;
    let e = |o: Orbital| eigen_energy(&o, z, d);
    let t = defining_targets(z);
    let e1 = e(Orbital::new(kd, 0, 0, 0, 0, 1.0))?;
    let e2 = e(Orbital::new(kd, 0, 0, 0, 1, 1.0))?;
    let e3 = e(Orbital::new(kd, 0, 0, 1, 0, 1.0))? - e(Orbital::new(kd + 1, 0, 0, 0, 0, 1.0))?;
    Ok([e1 - t[0], e2 - t[1], e3 - t[2]])
}

/// Number of angular coefficients: floor((l - |m| + J)/2) + 1.
///
/// For J = 1 the leading power is about l - |m| + 1, so the polynomial
/// needs the extra term to remain an eigenfunction.
pub fn angular_len(o: &Orbital) -> usize {
    ((o.l as usize - o.m.unsigned_abs() as usize + o.j as usize) / 2) + 1
}

pub fn angular_coeffs(o: &Orbital, d: &DeltaTriple) -> Result<Vec<f64>> {
    let (t, l_eff) = t_and_l(o, d)?;
    let mut a = vec![1.0];
    for k in 1..angular_len(o) {
        let kf = k as f64;
        let den = 2.0 * kf * (2.0 * l_eff + 1.0 - 2.0 * kf);
        if den == 0.0 {
            return Err(Error::DivisionByZero(format!("a_{k} of {}", o.label())));
        }
        let num = (t - 2.0 * kf + 2.0) * (t - 2.0 * kf + 1.0) + 2.0 * d.d2;
        let prev = a[k - 1];
        a.push(-num / den * prev);
    }
    Ok(a)
}

/// Radial coefficients for a caller-supplied exponent xi.
pub fn radial_coeffs(o: &Orbital, d: &DeltaTriple, xi: f64) -> Result<Vec<f64>> {
    let (_, l_eff) = t_and_l(o, d)?;
    let r = (2.0 * l_eff + 1.0).powi(2) - 8.0 * d.d3;
    if r < 0.0 {
        return Err(domain(format!(
            "(2L+1)^2 < 8 delta_3 for orbital {}",
            o.label()
        )));
    }
    let root = r.sqrt();
    let nl = o.n as f64 - o.l as f64;
    let mut b = vec![1.0];
    for k in 1..(o.n - o.l) as usize {
        let kf = k as f64;
        let den = kf * (kf + root);
        if den == 0.0 {
            return Err(Error::DivisionByZero(format!("b_{k} of {}", o.label())));
        }
        let prev = b[k - 1];
        b.push(-2.0 * xi * (nl - kf) / den * prev);
    }
    Ok(b)
}

/// cos^x with the sign carried by the nearest integer power, so that
/// non-integer powers keep the parity of their integer limit.
pub fn cos_pow(c: f64, x: f64) -> f64 {
    let mag = c.abs().powf(x);
    if c < 0.0 && (x.round() as i64) % 2 != 0 {
        -mag
    } else {
        mag
    }
}

/// Everything needed to evaluate or integrate one (unnormalised) orbital:
/// Phi(phi) * sin^sin_pow(theta) * sum a cos^pow(theta) * sum b r^pow e^(-xi r).
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub orbital: Orbital,
    pub t: f64,
    pub l_eff: f64,
    pub sin_pow: f64,
    /// (a_k, T - 2k)
    pub ang: Vec<(f64, f64)>,
    /// (b_k, k + gamma)
    pub rad: Vec<(f64, f64)>,
    pub xi: f64,
    /// D with xi_eigen = Z / D
    pub denom: f64,
}

impl Shape {
    pub fn new(o: &Orbital, d: &DeltaTriple) -> Result<Shape> {
        let (t, l_eff) = t_and_l(o, d)?;
        let root = radial_root(o, l_eff, d)?;
        let gamma = root - 0.5;
        let sp = if o.p % 2 == 0 { 1.0 } else { -1.0 };
        let sin_pow = -sp * ((o.m as f64).powi(2) + 2.0 * d.d1).sqrt();
        let a = angular_coeffs(o, d)?;
        let b = radial_coeffs(o, d, o.xi)?;
        Ok(Shape {
            orbital: *o,
            t,
            l_eff,
            sin_pow,
            ang: a
                .iter()
                .enumerate()
                .map(|(k, &c)| (c, t - 2.0 * k as f64))
                .collect(),
            rad: b
                .iter()
                .enumerate()
                .map(|(k, &c)| (c, k as f64 + gamma))
                .collect(),
            xi: o.xi,
            denom: o.n as f64 - o.l as f64 - 0.5 + root,
        })
    }

    pub fn phi_part(&self, phi: f64) -> f64 {
        let m = self.orbital.m;
        if m >= 0 {
            (m as f64 * phi).cos()
        } else {
            ((-m) as f64 * phi).sin()
        }
    }

    pub fn theta_part(&self, theta: f64) -> f64 {
        let c = theta.cos();
        let poly: f64 = self.ang.iter().map(|&(a, p)| a * cos_pow(c, p)).sum();
        theta.sin().powf(self.sin_pow) * poly
    }

    pub fn radial_part(&self, r: f64) -> f64 {
        let poly: f64 = self.rad.iter().map(|&(b, p)| b * r.powf(p)).sum();
        poly * (-self.xi * r).exp()
    }

    pub fn eval(&self, r: f64, theta: f64, phi: f64) -> f64 {
        self.phi_part(phi) * self.theta_part(theta) * self.radial_part(r)
    }
}

/// Unnormalised orbital value at (r, theta, phi) using the orbital's own xi.
pub fn eval_orbital(o: &Orbital, d: &DeltaTriple, r: f64, theta: f64, phi: f64) -> Result<f64> {
    if r <= 0.0 {
        return Err(domain("r must be positive"));
    }
    let s = Shape::new(o, d)?;
    if s.sin_pow < 0.0 && theta.sin() == 0.0 {
        return Err(domain("theta on the axis with a negative sine power"));
    }
    Ok(s.eval(r, theta, phi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HydrogenicSolution {
    pub orbital: Orbital,
    pub t: f64,
    pub l: f64,
    pub xi_eigen: f64,
    pub energy: f64,
    pub a_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
}

pub fn hydrogenic_solution(o: &Orbital, z: u32, d: &DeltaTriple) -> Result<HydrogenicSolution> {
    let (t, l) = t_and_l(o, d)?;
    let (xi, energy) = eigen_xi_energy(o, z, d)?;
    Ok(HydrogenicSolution {
        orbital: o.with_xi(xi),
        t,
        l,
        xi_eigen: xi,
        energy,
        a_coeffs: angular_coeffs(o, d)?,
        b_coeffs: radial_coeffs(o, d, xi)?,
    })
}

/// Largest residual of the separated theta and r equations over the sample
/// points (r, theta), by central differences with step 1e-4. Each residual
/// is divided by its scale (|E| for r, max(1, L(L+1)) for theta) and by the
/// largest function magnitude seen.
pub fn ode_residual(o: &Orbital, d: &DeltaTriple, z: u32, samples: &[(f64, f64)]) -> Result<f64> {
    let (xi, e) = eigen_xi_energy(o, z, d)?;
    let s = Shape::new(&o.with_xi(xi), d)?;
    let h = 1e-4;
    let ll = s.l_eff * (s.l_eff + 1.0);
    let m2 = (o.m as f64).powi(2) + 2.0 * d.d1;
    let (mut rt, mut rr, mut ft, mut fr) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &(r, th) in samples {
        let f = |x: f64| s.theta_part(x);
        let (f0, fp, fm) = (f(th), f(th + h), f(th - h));
        let d1 = (fp - fm) / (2.0 * h);
        let d2 = (fp - 2.0 * f0 + fm) / (h * h);
        let res = d2 + th.cos() / th.sin() * d1 - m2 / th.sin().powi(2) * f0
            + 2.0 * d.d2 / th.cos().powi(2) * f0
            + ll * f0;
        rt = rt.max(res.abs());
        ft = ft.max(f0.abs());

        let g = |x: f64| s.radial_part(x);
        let (g0, gp, gm) = (g(r), g(r + h), g(r - h));
        let d1 = (gp - gm) / (2.0 * h);
        let d2 = (gp - 2.0 * g0 + gm) / (h * h);
        let res = d2 + 2.0 / r * d1 + 2.0 * z as f64 / r * g0 - (ll - 2.0 * d.d3) / (r * r) * g0
            + 2.0 * e * g0;
        rr = rr.max(res.abs());
        fr = fr.max(g0.abs());
    }
    let theta_res = if ft > 0.0 {
        rt / (ll.max(1.0) * ft)
    } else {
        0.0
    };
    let radial_res = if fr > 0.0 { rr / (e.abs() * fr) } else { 0.0 };
    Ok(theta_res.max(radial_res))
}

/// Orbitals of the nine hydrogen-like table rows, in row order.
///
/// Rows 8 and 9 are (2,1,1,0,1) and (2,1,0,0,1): the printed values belong
/// to these labels (the printed labels of the two rows are swapped).
pub const TABLE_LEVELS: [Orbital; 9] = [
    Orbital::new(1, 0, 0, 0, 0, 1.0),
    Orbital::new(1, 0, 0, 0, 1, 1.0),
    Orbital::new(2, 0, 0, 0, 0, 1.0),
    Orbital::new(2, 0, 0, 0, 1, 1.0),
    Orbital::new(1, 0, 0, 1, 0, 1.0),
    Orbital::new(1, 0, 0, 1, 1, 1.0),
    Orbital::new(2, 1, 0, 0, 0, 1.0),
    Orbital::new(2, 1, 1, 0, 1, 1.0),
    Orbital::new(2, 1, 0, 0, 1, 1.0),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRow {
    pub id: usize,
    pub label: String,
    pub energy: f64,
    pub xi: f64,
    pub delta_e: f64,
}

/// Energies of arbitrary levels relative to (1,0,0,0,0).
pub fn level_rows(z: u32, levels: &[Orbital]) -> Result<Vec<LevelRow>> {
    let d = deltas(z)?;
    levels
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let (xi, e) = eigen_xi_energy(o, z, &d)?;
            Ok(LevelRow {
                id: i + 1,
                label: o.label(),
                energy: e,
                xi,
                delta_e: level_difference(o, &TABLE_LEVELS[0], z, &d)?,
            })
        })
        .collect()
}

pub fn hydrogen_level_table(z: u32) -> Result<Vec<LevelRow>> {
    level_rows(z, &TABLE_LEVELS)
}

/// Norm integral of Phi^2 over [0, 2 pi].
pub fn phi_norm(m: i32) -> f64 {
    if m == 0 {
        2.0 * PI
    } else {
        PI
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kdot_is_one_below_critical_charge() {
        for z in 1..=92 {
            assert_eq!(solve_deltas(z).unwrap().kdot, 1);
        }
    }

    #[test]
    fn bohr_limit() {
        let d = DeltaTriple::zero(3);
        for n in 1..=5u32 {
            for l in 0..n {
                for j in 0..2u8 {
                    let o = Orbital::new(n, l, 0, j, 1, 1.0);
                    let e = eigen_energy(&o, 3, &d).unwrap();
                    let nn = (n + j as u32) as f64;
                    assert!((e + 4.5 / (nn * nn)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn trivial_coefficients() {
        let d = DeltaTriple::zero(1);
        let o = Orbital::new(1, 0, 0, 0, 0, 1.0);
        assert_eq!(angular_coeffs(&o, &d).unwrap(), vec![1.0]);
        assert_eq!(radial_coeffs(&o, &d, 1.0).unwrap(), vec![1.0]);
        let b = radial_coeffs(&Orbital::new(2, 0, 0, 0, 0, 0.5), &d, 0.5).unwrap();
        assert!((b[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn t_l_limits() {
        let d = DeltaTriple::zero(1);
        assert_eq!(
            t_and_l(&Orbital::new(1, 0, 0, 0, 0, 1.0), &d).unwrap(),
            (0.0, 0.0)
        );
        assert_eq!(
            t_and_l(&Orbital::new(3, 2, 0, 1, 1, 1.0), &d).unwrap(),
            (3.0, 3.0)
        );
    }

    #[test]
    fn cos_pow_keeps_parity() {
        assert!((cos_pow(-0.5, 1.0 + 1e-9) + 0.5).abs() < 1e-8);
        assert!((cos_pow(-0.5, 2.0) - 0.25).abs() < 1e-15);
    }
}
