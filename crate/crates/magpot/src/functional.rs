//! The pair-correlated, non-orthogonal energy functional
//! W = (1/A) sum_i <Psi|H_i|Psi> with the trial function built from
//! (Id - (-1)^S transposition) on every orbital pair.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hydrogenic::{deltas, DeltaTriple, Shape};
use crate::integrals::{
    cache_stats, coupling_shapes, nuclear_shapes, overlap_shapes, round_sig, CacheStats,
    InteractionTerm,
};
use crate::quantum::{validate_configuration, Configuration, Orbital};

/// Fitted constants of the monocentric repulsive potential.
pub const ETA: [f64; 7] = [
    0.47883387,
    -0.01397390,
    0.00769582,
    0.00000713,
    0.00231748,
    0.01837402,
    -0.1701,
];

/// |u| below which a pair counts as orthogonal for the S diagnostic.
pub const S_RULE_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FunctionalMode {
    /// delta terms plus the fitted 11-row repulsion
    ImprovedVtheta,
    /// delta terms plus 0.5 / r12
    ImprovedBare,
    /// no delta terms, 0.5 / r12
    SchrodingerBare,
}

impl FunctionalMode {
    pub const ALL: [FunctionalMode; 3] = [
        FunctionalMode::ImprovedVtheta,
        FunctionalMode::ImprovedBare,
        FunctionalMode::SchrodingerBare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            FunctionalMode::ImprovedVtheta => "improved-vtheta",
            FunctionalMode::ImprovedBare => "improved-bare",
            FunctionalMode::SchrodingerBare => "schrodinger-bare",
        }
    }

    /// The delta triple used by this mode (zero for the bare Schrodinger mode).
    pub fn deltas(&self, z: u32) -> Result<DeltaTriple> {
        match self {
            FunctionalMode::SchrodingerBare => Ok(DeltaTriple::zero(z)),
            _ => deltas(z),
        }
    }
}

impl fmt::Display for FunctionalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

impl FromStr for FunctionalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "improved-vtheta" | "vtheta" | "improved" => Ok(FunctionalMode::ImprovedVtheta),
            "improved-bare" | "bare" => Ok(FunctionalMode::ImprovedBare),
            "schrodinger-bare" | "schrodinger" => Ok(FunctionalMode::SchrodingerBare),
            _ => Err(Error::Invalid(format!("unknown mode {s:?}"))),
        }
    }
}

fn row(amp: f64, p1: f64, p2: f64, p12: f64, ang: [f64; 8]) -> InteractionTerm {
    let mut h = [0.0; 12];
    h[0] = amp;
    h[1] = p1;
    h[2] = p2;
    h[3] = p12;
    h[4..].copy_from_slice(&ang);
    InteractionTerm::new(h)
}

/// The interaction table: 11 rows for the fitted potential, one
/// 0.5 / r12 row for the bare modes.
pub fn interaction_rows(mode: FunctionalMode) -> Vec<InteractionTerm> {
    match mode {
        FunctionalMode::ImprovedVtheta => {
            let z = [0.0; 8];
            let e = ETA;
            vec![
                row(e[0], 0.0, 0.0, -1.0, z),
                row(e[1], -1.0, -1.0, 1.0, z),
                row(e[2], -1.0, 1.0, -1.0, z),
                row(e[2], 1.0, -1.0, -1.0, z),
                row(e[3], -1.0, -2.0, 2.0, z),
                row(e[4], -1.0, 0.0, -1.0, z),
                row(e[4], 0.0, -1.0, -1.0, z),
                row(e[5], 1.0, 1.0, -1.0, z),
                row(
                    e[6],
                    -1.0,
                    -1.0,
                    0.0,
                    [1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                ),
                row(
                    e[6],
                    -1.0,
                    -1.0,
                    0.0,
                    [0.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0, 0.0],
                ),
                row(
                    e[6],
                    -1.0,
                    -1.0,
                    0.0,
                    [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0],
                ),
            ]
        }
        _ => vec![InteractionTerm::coulomb(0.5)],
    }
}

/// Rows actually integrated. A row whose mirror image (electrons
/// exchanged) is missing from the table, i.e. row 5, is applied as two
/// half-amplitude mirror images so that the sum stays exchange symmetric.
pub fn effective_rows(mode: FunctionalMode) -> Vec<InteractionTerm> {
    let rows = interaction_rows(mode);
    let mut out = Vec::new();
    for h in &rows {
        let h = *h;
        if rows.contains(&h.swapped()) {
            out.push(h);
        } else {
            out.push(h.scaled(0.5));
            out.push(h.swapped().scaled(0.5));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairContribution {
    pub i: usize,
    pub j: usize,
    /// repulsion accumulated in X while (i3, j3) = (i, j)
    pub x: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mode: FunctionalMode,
    pub table: ExchangeTable,
    pub w: f64,
    pub a: f64,
    pub x: f64,
    /// accumulated one-electron potential part (before division by A)
    pub potential: f64,
    pub pairs: Vec<PairContribution>,
    pub overlaps: Vec<Vec<f64>>,
    pub warnings: Vec<String>,
    /// some coupling integral came from the quadrature fallback
    pub quadrature_fallback: bool,
    pub cache: CacheStats,
}

/// Orbital shapes and one-electron matrices shared by the functional and
/// its tests.
pub struct Prepared {
    pub shapes: Vec<Shape>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    /// v4 = xi D - Z per orbital
    pub v4: Vec<f64>,
}

pub fn prepare(c: &Configuration, d: &DeltaTriple) -> Result<Prepared> {
    let n = c.len();
    let shapes: Vec<Shape> = c
        .orbitals
        .iter()
        .map(|o| Shape::new(&o.with_xi(round_sig(o.xi)), d))
        .collect::<Result<_>>()?;
    let mut u = vec![vec![0.0; n]; n];
    let mut v = vec![vec![0.0; n]; n];
    for i in 0..n {
        u[i][i] = 1.0;
        v[i][i] = nuclear_shapes(&shapes[i], &shapes[i])?;
        for j in i + 1..n {
            let x = overlap_shapes(&shapes[i], &shapes[j])?;
            let y = nuclear_shapes(&shapes[i], &shapes[j])?;
            u[i][j] = x;
            u[j][i] = x;
            v[i][j] = y;
            v[j][i] = y;
        }
    }
    let v4 = shapes.iter().map(|s| s.xi * s.denom - c.z as f64).collect();
    Ok(Prepared { shapes, u, v, v4 })
}

/// N = 1: W = -xi^2/2 + (xi D - Z) <phi|1/r|phi>.
pub fn evaluate_single(o: &Orbital, z: u32, mode: FunctionalMode) -> Result<f64> {
    let d = mode.deltas(z)?;
    let s = Shape::new(&o.with_xi(round_sig(o.xi)), &d)?;
    let v = nuclear_shapes(&s, &s)?;
    Ok(-0.5 * s.xi * s.xi + (s.xi * s.denom - z as f64) * v)
}

fn sgn(s: u8) -> f64 {
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

struct Couplings<'a> {
    shapes: &'a [Shape],
    rows: Vec<InteractionTerm>,
    memo: HashMap<[usize; 4], f64>,
    fallback: bool,
}

impl Couplings<'_> {
    /// Sum over the interaction rows of I_II(a, b, c, e; h_k).
    fn get(&mut self, a: usize, b: usize, c: usize, e: usize) -> Result<f64> {
        // Every effective row is exchange symmetric and orbitals are real,
        // so the value depends only on the two unordered density pairs.
        let p1 = if a <= b { [a, b] } else { [b, a] };
        let p2 = if c <= e { [c, e] } else { [e, c] };
        let key = if p1 <= p2 {
            [p1[0], p1[1], p2[0], p2[1]]
        } else {
            [p2[0], p2[1], p1[0], p1[1]]
        };
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let s = self.shapes;
        let mut sum = 0.0;
        for h in &self.rows {
            let r = coupling_shapes(&s[key[0]], &s[key[1]], &s[key[2]], &s[key[3]], h)?;
            self.fallback |= r.quadrature;
            sum += r.value;
        }
        self.memo.insert(key, sum);
        Ok(sum)
    }
}

/// Which six-case index table drives the three-orbital exchange terms.
///
/// The printed table gives t9 = j1 in its second case, which pairs the
/// wrong orbitals on the middle electron when i2 = j1. `Printed` keeps it
/// (the published lithium energies follow it, and W then depends on the
/// orbital order for N >= 3). `Corrected` uses t9 = j2 and agrees with a
/// direct expansion of the trial function for any N and any order. The two
/// agree for N = 2.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ExchangeTable {
    #[default]
    Printed,
    Corrected,
}

impl ExchangeTable {
    pub fn name(&self) -> &'static str {
        match self {
            ExchangeTable::Corrected => "corrected",
            ExchangeTable::Printed => "printed",
        }
    }
}

impl FromStr for ExchangeTable {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "corrected" => Ok(ExchangeTable::Corrected),
            "printed" => Ok(ExchangeTable::Printed),
            _ => Err(Error::Invalid(format!("unknown exchange table {s:?}"))),
        }
    }
}

/// The energy functional for a configuration.
pub fn evaluate(c: &Configuration, mode: FunctionalMode) -> Result<FunctionalReport> {
    evaluate_with(c, mode, ExchangeTable::default())
}

pub fn evaluate_with(
    c: &Configuration,
    mode: FunctionalMode,
    table: ExchangeTable,
) -> Result<FunctionalReport> {
    let problems = validate_configuration(c);
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|p| p.to_string()).collect();
        return Err(Error::Invalid(text.join("; ")));
    }
    let d = mode.deltas(c.z)?;
    if c.len() == 1 {
        let w = evaluate_single(&c.orbitals[0], c.z, mode)?;
        return Ok(FunctionalReport {
            mode,
            table,
            w,
            a: 1.0,
            x: 0.0,
            potential: w + 0.5 * c.orbitals[0].xi.powi(2),
            pairs: Vec::new(),
            overlaps: vec![vec![1.0]],
            warnings: Vec::new(),
            quadrature_fallback: false,
            cache: cache_stats(),
        });
    }
    let p = prepare(c, &d)?;
    let n = c.len();
    let u = &p.u;
    let vm = &p.v;
    let s = |i: usize, j: usize| c.s(i, j);

    let mut warnings = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if s(i, j) == 0 && u[i][j].abs() >= S_RULE_THRESHOLD {
                warnings.push(format!(
                    "pair ({}, {}) has S = 0 but |u| = {:.3e} is not below {S_RULE_THRESHOLD:e}",
                    i + 1,
                    j + 1,
                    u[i][j].abs()
                ));
            }
        }
    }

    let mut ii = Couplings {
        shapes: &p.shapes,
        rows: effective_rows(mode),
        memo: HashMap::new(),
        fallback: false,
    };
    let mut a = 0.0;
    let mut w = 0.0;
    let mut x = 0.0;
    let mut pair_x = vec![vec![0.0; n]; n];

    for i1 in 0..n - 1 {
        for j1 in i1 + 1..n {
            for i2 in 0..n - 1 {
                for j2 in i2 + 1..n {
                    let v1 = -sgn(s(i2, j2));
                    let v2 = -sgn(s(i1, j1));
                    let v3 = sgn(s(i1, j1)) * sgn(s(i2, j2));

                    // Normalization coefficient
                    a += 1.0 + v1 * u[i2][j2].powi(2) + v2 * u[i1][j1].powi(2);
                    if i2 == i1 && j2 == j1 {
                        a += v3;
                    } else if i2 == i1 && j2 != j1 {
                        a += v3 * u[j1][j2] * u[i1][j1] * u[i1][j2];
                    } else if i2 == j1 {
                        a += v3 * u[i1][j1] * u[i1][j2] * u[j1][j2];
                    } else if j2 == i1 {
                        a += v3 * u[j1][i2] * u[i1][j1] * u[i2][i1];
                    } else if j2 == j1 {
                        a += v3 * u[j1][i1] * u[i1][i2] * u[i2][j1];
                    } else {
                        a += v3 * u[i1][j1].powi(2) * u[i2][j2].powi(2);
                    }

                    // Potential energy
                    for i3 in 0..n {
                        let v4 = p.v4[i3];
                        w += v4 * vm[i3][i3];
                        if i3 == i2 || i3 == j2 {
                            w += v1 * v4 * u[i2][j2] * vm[i2][j2];
                        } else {
                            w += v1 * v4 * u[i2][j2].powi(2) * vm[i3][i3];
                        }
                        if i3 == i1 || i3 == j1 {
                            w += v2 * v4 * u[i1][j1] * vm[i1][j1];
                        } else {
                            w += v2 * v4 * u[i1][j1].powi(2) * vm[i3][i3];
                        }
                        let k = v3 * v4;
                        if i2 == i1 {
                            if j2 == j1 {
                                w += k * vm[i3][i3];
                            } else if i3 == i1 {
                                w += k * u[i1][j1] * u[j1][j2] * vm[i3][j2];
                            } else if i3 == j1 {
                                w += k * u[j1][j2] * u[i1][j2] * vm[i3][i1];
                            } else if i3 == j2 {
                                w += k * u[i1][j1] * u[i1][j2] * vm[i3][j1];
                            } else {
                                w += k * u[i1][j1] * u[i1][j2] * u[j1][j2] * vm[i3][i3];
                            }
                        } else if i2 == j1 {
                            if i3 == i1 {
                                w += k * u[i1][j2] * u[j1][j2] * vm[i3][j1];
                            } else if i3 == j1 {
                                w += k * u[i1][j1] * u[i1][j2] * vm[i3][j2];
                            } else if i3 == j2 {
                                w += k * u[i1][j1] * u[j1][j2] * vm[i3][i1];
                            } else {
                                w += k * u[i1][j1] * u[i1][j2] * u[j1][j2] * vm[i3][i3];
                            }
                        } else if j2 == i1 {
                            if i3 == i1 {
                                w += k * u[i1][j1] * u[j1][i2] * vm[i3][i2];
                            } else if i3 == j1 {
                                w += k * u[i2][j1] * u[i1][i2] * vm[i3][i1];
                            } else if i3 == i2 {
                                w += k * u[i1][j1] * u[i1][i2] * vm[i3][j1];
                            } else {
                                w += k * u[i1][j1] * u[i1][i2] * u[j1][i2] * vm[i3][i3];
                            }
                        } else if j2 == j1 {
                            if i3 == i1 {
                                w += k * u[i2][j1] * u[i1][i2] * vm[i3][j1];
                            } else if i3 == j1 {
                                w += k * u[i1][j1] * u[i1][i2] * vm[i3][i2];
                            } else if i3 == i2 {
                                w += k * u[i1][j1] * u[j1][i2] * vm[i3][i1];
                            } else {
                                w += k * u[i1][j1] * u[i1][i2] * u[j1][i2] * vm[i3][i3];
                            }
                        } else if i3 == i1 {
                            w += k * u[i1][j1] * u[i2][j2].powi(2) * vm[i3][j1];
                        } else if i3 == j1 {
                            w += k * u[i1][j1] * u[i2][j2].powi(2) * vm[i3][i1];
                        } else if i3 == i2 {
                            w += k * u[i1][j1].powi(2) * u[j2][i2] * vm[i3][j2];
                        } else if i3 == j2 {
                            w += k * u[i1][j1].powi(2) * u[j2][i2] * vm[i3][i2];
                        } else {
                            w += k * u[i1][j1].powi(2) * u[i2][j2].powi(2) * vm[i3][i3];
                        }
                    }

                    // Repulsive energy between electrons (rows summed inside ii)
                    for i3 in 0..n - 1 {
                        for j3 in i3 + 1..n {
                            let before = x;
                            x += ii.get(i3, i3, j3, j3)?;
                            if i2 == i1 && j2 == j1 {
                                x += v3 * ii.get(i3, i3, j3, j3)?;
                            } else if i2 != i1 && i2 != j1 && j2 != j1 && j2 != i1 {
                                let (ua, ub) = (u[i1][j1], u[i2][j2]);
                                if i3 == i1 && j3 == j1 {
                                    x += v3 * ub * ub * ii.get(i1, j1, i1, j1)?;
                                } else if i3 == i2 && j3 == j2 {
                                    x += v3 * ua * ua * ii.get(i2, j2, i2, j2)?;
                                } else if (i3 == i1 || i3 == j1) && (j3 == i2 || j3 == j2) {
                                    x += v3 * ua * ub * ii.get(i1, j1, i2, j2)?;
                                } else if (i3 == i2 || i3 == j2) && (j3 == i1 || j3 == j1) {
                                    x += v3 * ua * ub * ii.get(i1, j1, i2, j2)?;
                                } else if i3 == i1 || i3 == j1 {
                                    x += v3 * ua * ub * ub * ii.get(i1, j1, j3, j3)?;
                                } else if i3 == i2 || i3 == j2 {
                                    x += v3 * ub * ua * ua * ii.get(i2, j2, j3, j3)?;
                                } else if j3 == i1 || j3 == j1 {
                                    x += v3 * ua * ub * ub * ii.get(i1, j1, i3, i3)?;
                                } else if j3 == i2 || j3 == j2 {
                                    x += v3 * ub * ua * ua * ii.get(i2, j2, i3, i3)?;
                                } else {
                                    x += v3 * ua * ua * ub * ub * ii.get(i3, i3, j3, j3)?;
                                }
                            }
                            for sidx in 1..3 {
                                let (t1, t2, vs) = if sidx == 1 {
                                    (i2, j2, v1)
                                } else {
                                    (i1, j1, v2)
                                };
                                let ut = u[t1][t2];
                                if i3 == t1 && j3 == t2 {
                                    x += vs * ii.get(t1, t2, t1, t2)?;
                                } else if j3 == t1 || (i3 != t1 && j3 == t2) {
                                    x += vs * ut * ii.get(i3, i3, t1, t2)?;
                                } else if i3 == t2 || (i3 == t1 && j3 != t2) {
                                    x += vs * ut * ii.get(t1, t2, j3, j3)?;
                                } else {
                                    x += vs * ut * ut * ii.get(i3, i3, j3, j3)?;
                                }
                            }
                            for sidx in 1..7 {
                                let t = match sidx {
                                    1 => [j2, i1, i2, i1, j1, i2, i1, i2, j1, i1, j1],
                                    2 => match table {
                                        ExchangeTable::Corrected => {
                                            [i2, j1, i1, j1, j2, i1, j1, i1, j2, j1, j2]
                                        }
                                        ExchangeTable::Printed => {
                                            [i2, j1, i1, j1, j2, i1, j1, i1, j1, j1, j2]
                                        }
                                    },
                                    3 => [i2, i1, i1, j1, j2, j1, j2, i1, j1, i1, j2],
                                    4 => [i2, i1, i1, j2, j1, j1, j2, i1, j2, i1, j1],
                                    5 => [j2, j1, i2, i1, j1, i2, j1, i1, j1, i1, i2],
                                    _ => [j2, j1, i1, i2, j1, i1, j1, i2, j1, i1, i2],
                                };
                                let [t1, t2, t3, t4, t5, t6, t7, t8, t9, t10, t11] = t;
                                if !(t1 == t2 && t3 < t4 && t4 < t5) {
                                    continue;
                                }
                                let (u67, u89, u1011) = (u[t6][t7], u[t8][t9], u[t10][t11]);
                                x += v3
                                    * if i3 == t3 && j3 == t4 {
                                        u1011 * ii.get(t6, t7, t8, t9)?
                                    } else if i3 == t3 && j3 == t5 {
                                        u89 * ii.get(t6, t7, t10, t11)?
                                    } else if i3 == t4 && j3 == t5 {
                                        u67 * ii.get(t8, t9, t10, t11)?
                                    } else if i3 == t3 {
                                        u89 * u1011 * ii.get(t6, t7, j3, j3)?
                                    } else if i3 == t4 {
                                        u67 * u1011 * ii.get(t8, t9, j3, j3)?
                                    } else if i3 == t5 {
                                        u67 * u89 * ii.get(t10, t11, j3, j3)?
                                    } else if j3 == t3 {
                                        u89 * u1011 * ii.get(t6, t7, i3, i3)?
                                    } else if j3 == t4 {
                                        u67 * u1011 * ii.get(t8, t9, i3, i3)?
                                    } else if j3 == t5 {
                                        u67 * u89 * ii.get(t10, t11, i3, i3)?
                                    } else {
                                        u67 * u89 * u1011 * ii.get(j3, j3, i3, i3)?
                                    };
                            }
                            pair_x[i3][j3] += x - before;
                        }
                    }
                }
            }
        }
    }

    if !(a.abs() >= 1e-12) {
        return Err(Error::ZeroNorm(a));
    }
    let xi_sq: f64 = p.shapes.iter().map(|s| s.xi * s.xi).sum();
    let total = (w + 2.0 * x) / a - 0.5 * xi_sq;
    if !total.is_finite() {
        return Err(Error::Invalid(format!(
            "non-finite energy (A = {a}, X = {x})"
        )));
    }
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            pairs.push(PairContribution {
                i,
                j,
                x: pair_x[i][j],
            });
        }
    }
    Ok(FunctionalReport {
        mode,
        table,
        w: total,
        a,
        x,
        potential: w,
        pairs,
        overlaps: p.u.clone(),
        warnings,
        quadrature_fallback: ii.fallback,
        cache: cache_stats(),
    })
}

/// Shorthand for `evaluate(c, mode)?.w`.
pub fn energy(c: &Configuration, mode: FunctionalMode) -> Result<f64> {
    Ok(evaluate(c, mode)?.w)
}

pub fn energy_with(c: &Configuration, mode: FunctionalMode, table: ExchangeTable) -> Result<f64> {
    Ok(evaluate_with(c, mode, table)?.w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_and_mirrors() {
        let r = interaction_rows(FunctionalMode::ImprovedVtheta);
        assert_eq!(r.len(), 11);
        assert_eq!(r[0].h[0], 0.47883387);
        assert_eq!(r[0].h[3], -1.0);
        for k in 8..11 {
            assert_eq!(r[k].h[0], -0.1701);
        }
        assert_eq!(effective_rows(FunctionalMode::ImprovedVtheta).len(), 12);
        let b = interaction_rows(FunctionalMode::SchrodingerBare);
        assert_eq!(b, vec![InteractionTerm::coulomb(0.5)]);
    }

    #[test]
    fn single_electron_at_eigen_exponent() {
        let d = deltas(1).unwrap();
        let o = Orbital::new(1, 0, 0, 0, 0, 1.0);
        let (xi, e) = crate::hydrogenic::eigen_xi_energy(&o, 1, &d).unwrap();
        let w = evaluate_single(&o.with_xi(xi), 1, FunctionalMode::ImprovedBare).unwrap();
        assert!((w - e).abs() < 1e-12);
    }

    #[test]
    fn mode_names_round_trip() {
        for m in FunctionalMode::ALL {
            assert_eq!(m.name().parse::<FunctionalMode>().unwrap(), m);
        }
    }
}
