//! Reference energies for hydrogen-like ions: Dirac, Lamb and magnetic terms.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::quantum::consts;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QedLevel {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub j: u8,
    pub z: u32,
    pub dirac: f64,
    pub lamb: f64,
    pub magnetic: f64,
    pub energy: f64,
}

fn sgn(j: u8) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Dirac energy in hartree (rest mass removed).
///
/// Uses the algebraically identical form -Z^2 / (sqrt(D) (nr + s + sqrt(D)))
/// which avoids the 1 - 1 cancellation of the textbook expression.
pub fn dirac_energy(n: u32, l: u32, z: u32) -> Result<f64> {
    if l >= n {
        return Err(domain(format!("l={l} must be < n={n}")));
    }
    let az = consts().alpha * z as f64;
    let l1 = l as f64 + 1.0;
    let rad = l1 * l1 - az * az;
    if rad <= 0.0 {
        return Err(domain(format!("(l+1)^2 <= (alpha Z)^2 for l={l}, Z={z}")));
    }
    let s = rad.sqrt();
    let nr = (n - l - 1) as f64;
    let d = nr * nr + l1 * l1 + 2.0 * nr * s;
    let sd = d.sqrt();
    let zf = z as f64;
    Ok(-zf * zf / (sd * (nr + s + sd)))
}

/// Dirac energy exactly as the textbook expression is written. Kept for
/// comparison; loses about five digits at Z = 1.
pub fn dirac_energy_literal(n: u32, l: u32, z: u32) -> f64 {
    let a = consts().alpha;
    let az = a * z as f64;
    let l1 = l as f64 + 1.0;
    let s = (l1 * l1 - az * az).sqrt();
    let nr = (n - l - 1) as f64;
    ((nr + s) / (nr * nr + l1 * l1 + 2.0 * nr * s).sqrt() - 1.0) / (a * a)
}

pub fn lamb_term(n: u32, l: u32, j: u8, z: u32) -> f64 {
    if n > 1 && l == 0 {
        let zf = z as f64;
        4.0 * (1.0 - sgn(j)) * consts().delta2s * zf.powi(4) / (n as f64).powi(3)
    } else {
        0.0
    }
}

/// First branch when l = 0 or m is odd, second branch otherwise.
pub fn magnetic_term(n: u32, l: u32, m: i32, j: u8, z: u32) -> f64 {
    if l == 0 || m % 2 != 0 {
        magnetic_first_branch(n, l, j, z)
    } else {
        magnetic_second_branch(n, l, j, z)
    }
}

pub fn magnetic_first_branch(n: u32, l: u32, j: u8, z: u32) -> f64 {
    let (lf, s, zf, nf) = (l as f64, sgn(j), z as f64, n as f64);
    let num =
        (2.0 * lf - s + 1.0) * (2.0 * lf - s + 3.0) - (2.0 * lf + 1.0) * (2.0 * lf + 3.0) - 3.0;
    let den = 8.0 * (2.0 * lf + 3.0) * (2.0 * lf + 1.0).powi(2) * nf.powi(3);
    3.0 * consts().delta1s * num * zf.powi(3) / den
}

pub fn magnetic_second_branch(n: u32, l: u32, j: u8, z: u32) -> f64 {
    let (lf, s, zf, nf) = (l as f64, sgn(j), z as f64, n as f64);
    let num =
        (2.0 * lf - s - 1.0) * (2.0 * lf - s + 1.0) - (2.0 * lf - 1.0) * (2.0 * lf + 1.0) - 3.0;
    let den = 8.0 * (2.0 * lf - 1.0) * (2.0 * lf + 1.0).powi(2) * nf.powi(3);
    3.0 * consts().delta1s * num * zf.powi(3) / den
}

pub fn qed_level(n: u32, l: u32, m: i32, j: u8, z: u32) -> Result<QedLevel> {
    if m.unsigned_abs() > l || j > 1 {
        return Err(domain(format!("invalid level ({n},{l},{m},{j})")));
    }
    let dirac = dirac_energy(n, l, z)?;
    let lamb = lamb_term(n, l, j, z);
    let magnetic = magnetic_term(n, l, m, j, z);
    Ok(QedLevel {
        n,
        l,
        m,
        j,
        z,
        dirac,
        lamb,
        magnetic,
        energy: dirac + lamb + magnetic,
    })
}

pub fn qed_energy(n: u32, l: u32, m: i32, j: u8, z: u32) -> Result<f64> {
    Ok(qed_level(n, l, m, j, z)?.energy)
}

/// The eight (n, l, m, J) levels whose differences fill the QED column of
/// the hydrogen-like tables, in column order.
pub const QED_COLUMN_LEVELS: [(u32, u32, i32, u8); 8] = [
    (1, 0, 0, 0),
    (1, 0, 0, 1),
    (2, 0, 0, 0),
    (2, 0, 0, 1),
    (2, 1, 0, 0),
    (2, 1, 0, 1),
    (2, 1, 1, 0),
    (2, 1, 1, 1),
];

/// Level differences against (1,0,0,0) for [`QED_COLUMN_LEVELS`].
pub fn qed_column(z: u32) -> Result<Vec<f64>> {
    let e0 = qed_energy(1, 0, 0, 0, z)?;
    QED_COLUMN_LEVELS
        .iter()
        .map(|&(n, l, m, j)| Ok(qed_energy(n, l, m, j, z)? - e0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_form_matches_literal() {
        for z in [1, 2, 10, 92] {
            for n in 1..=4 {
                for l in 0..n {
                    let a = dirac_energy(n, l, z).unwrap();
                    let b = dirac_energy_literal(n, l, z);
                    assert!((a - b).abs() <= 1e-10 * a.abs(), "{n} {l} {z}: {a} {b}");
                }
            }
        }
    }

    #[test]
    fn lamb_branches() {
        let d2 = consts().delta2s;
        assert!((lamb_term(2, 0, 1, 1) - d2).abs() < 1e-20);
        assert_eq!(lamb_term(2, 1, 0, 1), 0.0);
        assert_eq!(lamb_term(1, 0, 1, 1), 0.0);
    }

    #[test]
    fn lamb_identity_at_k1() {
        for z in [1, 5, 92] {
            let d = qed_energy(1, 0, 0, 1, z).unwrap() - qed_energy(1, 0, 0, 0, z).unwrap();
            let want = consts().delta1s * (z as f64).powi(3);
            assert!((d - want).abs() <= 1e-9 * want, "{z}");
        }
    }

    #[test]
    fn domain_error_beyond_critical_charge() {
        assert!(dirac_energy(1, 0, 138).is_err());
    }
}
