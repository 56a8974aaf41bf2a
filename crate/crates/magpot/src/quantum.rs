//! Constants, orbital labels and configurations.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Working value of the fine-structure constant.
pub const ALPHA: f64 = 1.0 / 137.036;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConsts {
    pub alpha: f64,
    /// Ground-state Lamb shift of hydrogen, hartree.
    pub delta1s: f64,
    /// 2S Lamb shift of hydrogen, hartree.
    pub delta2s: f64,
}

impl PhysConsts {
    pub fn with_alpha(alpha: f64) -> Self {
        let a3 = alpha * alpha * alpha;
        PhysConsts {
            alpha,
            delta1s: 0.5556 * a3,
            delta2s: 0.4138 * a3,
        }
    }
}

impl Default for PhysConsts {
    fn default() -> Self {
        Self::with_alpha(ALPHA)
    }
}

pub fn consts() -> PhysConsts {
    PhysConsts::default()
}

/// One electron label (n, l, m, J, P) with its radial exponent xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Orbital {
    pub n: u32,
    pub l: u32,
    pub m: i32,
    pub j: u8,
    pub p: u8,
    pub xi: f64,
}

impl Orbital {
    pub const fn new(n: u32, l: u32, m: i32, j: u8, p: u8, xi: f64) -> Self {
        Orbital { n, l, m, j, p, xi }
    }

    pub fn with_xi(self, xi: f64) -> Self {
        Orbital { xi, ..self }
    }

    /// Label without the exponent, e.g. `2,1,0,0,1`.
    pub fn label(&self) -> String {
        format!("{},{},{},{},{}", self.n, self.l, self.m, self.j, self.p)
    }

    pub fn same_label(&self, other: &Orbital) -> bool {
        (self.n, self.l, self.m, self.j, self.p) == (other.n, other.l, other.m, other.j, other.p)
    }

    /// Parses `n,l,m,J,P` (commas or whitespace).
    pub fn parse_label(s: &str, xi: f64) -> Result<Orbital> {
        let v: Vec<i64> = s
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Invalid(format!("orbital label {s:?}: {e}")))?;
        if v.len() != 5 {
            return Err(Error::Invalid(format!(
                "orbital label {s:?} needs 5 integers"
            )));
        }
        if v[0] < 1 || v[1] < 0 || v[3] < 0 || v[4] < 0 {
            return Err(Error::Invalid(format!("orbital label {s:?} out of range")));
        }
        Ok(Orbital::new(
            v[0] as u32,
            v[1] as u32,
            v[2] as i32,
            v[3] as u8,
            v[4] as u8,
            xi,
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    PrincipalZero,
    LTooLarge {
        n: u32,
        l: u32,
    },
    MTooLarge {
        l: u32,
        m: i32,
    },
    SpinRange(u8),
    ParityRange(u8),
    ParityForNonzeroM {
        m: i32,
    },
    XiNotPositive,
    EmptyConfiguration,
    ChargeZero,
    SymmetryShape,
    SymmetryValue {
        i: usize,
        j: usize,
    },
    SymmetryAsymmetric {
        i: usize,
        j: usize,
    },
    ZeroNormPair {
        i: usize,
        j: usize,
    },
    Orbital {
        index: usize,
        violation: Box<Violation>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            PrincipalZero => write!(f, "n must be >= 1"),
            LTooLarge { n, l } => write!(f, "l <= n-1 violated (n={n}, l={l})"),
            MTooLarge { l, m } => write!(f, "|m| <= l violated (l={l}, m={m})"),
            SpinRange(j) => write!(f, "J must be 0 or 1, got {j}"),
            ParityRange(p) => write!(f, "P must be 0 or 1, got {p}"),
            ParityForNonzeroM { m } => write!(f, "P must be 1 when m != 0 (m={m})"),
            XiNotPositive => write!(f, "xi must be positive and finite"),
            EmptyConfiguration => write!(f, "configuration has no orbitals"),
            ChargeZero => write!(f, "Z must be >= 1"),
            SymmetryShape => write!(f, "symmetry matrix must be N x N"),
            SymmetryValue { i, j } => write!(f, "S[{i}][{j}] must be 0 or 1"),
            SymmetryAsymmetric { i, j } => write!(f, "S[{i}][{j}] != S[{j}][{i}]"),
            ZeroNormPair { i, j } => {
                write!(f, "orbitals {i} and {j} are identical with S=0 (zero norm)")
            }
            Orbital { index, violation } => write!(f, "orbital {index}: {violation}"),
        }
    }
}

/// Every violated orbital invariant; empty means valid.
pub fn validate_orbital(o: &Orbital) -> Vec<Violation> {
    let mut v = Vec::new();
    if o.n == 0 {
        v.push(Violation::PrincipalZero);
    }
    if o.l + 1 > o.n.max(1) {
        v.push(Violation::LTooLarge { n: o.n, l: o.l });
    }
    if o.m.unsigned_abs() > o.l {
        v.push(Violation::MTooLarge { l: o.l, m: o.m });
    }
    if o.j > 1 {
        v.push(Violation::SpinRange(o.j));
    }
    if o.p > 1 {
        v.push(Violation::ParityRange(o.p));
    }
    if o.m != 0 && o.p != 1 {
        v.push(Violation::ParityForNonzeroM { m: o.m });
    }
    if !(o.xi.is_finite() && o.xi > 0.0) {
        v.push(Violation::XiNotPositive);
    }
    v
}

/// The trial-function side condition: true when S = 0 and the label
/// inequality holds, i.e. the pair is meant to be (nearly) orthogonal.
pub fn eq15_orthogonality_hint(a: &Orbital, b: &Orbital, s: u8) -> bool {
    if s != 0 {
        return false;
    }
    let tri = |o: &Orbital| {
        let k = o.n as i64 + o.j as i64;
        (k - 1) * k
    };
    let num = tri(a) - tri(b);
    let rest = a.l as i64 + a.j as i64 - b.l as i64 - b.j as i64;
    // num is always even, so the half is exact.
    (num / 2 + rest).abs() < 3
}

/// Ordered orbitals with a pair-symmetry matrix and a nuclear charge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub z: u32,
    pub orbitals: Vec<Orbital>,
    pub symmetry: Vec<Vec<u8>>,
}

impl Configuration {
    /// All pairs symmetric (S = 1).
    pub fn new(z: u32, orbitals: Vec<Orbital>) -> Self {
        let n = orbitals.len();
        Configuration {
            z,
            orbitals,
            symmetry: vec![vec![1; n]; n],
        }
    }

    pub fn with_s(mut self, i: usize, j: usize, s: u8) -> Self {
        self.symmetry[i][j] = s;
        self.symmetry[j][i] = s;
        self
    }

    pub fn len(&self) -> usize {
        self.orbitals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orbitals.is_empty()
    }

    pub fn s(&self, i: usize, j: usize) -> u8 {
        self.symmetry[i][j]
    }

    pub fn xi(&self) -> Vec<f64> {
        self.orbitals.iter().map(|o| o.xi).collect()
    }

    pub fn with_xi(&self, xi: &[f64]) -> Configuration {
        let mut c = self.clone();
        for (o, &x) in c.orbitals.iter_mut().zip(xi) {
            o.xi = x;
        }
        c
    }

    /// Same configuration with orbitals reordered by `perm` (new i = old perm[i]).
    pub fn permuted(&self, perm: &[usize]) -> Configuration {
        let orbitals = perm.iter().map(|&k| self.orbitals[k]).collect();
        let symmetry = perm
            .iter()
            .map(|&a| perm.iter().map(|&b| self.symmetry[a][b]).collect())
            .collect();
        Configuration {
            z: self.z,
            orbitals,
            symmetry,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_configuration(self)
    }

    /// Text form: `Z <z>`, one `n l m J P xi` line per orbital, then
    /// `S i j v` lines (1-based) for entries that are not 1.
    pub fn to_text(&self) -> String {
        let mut s = format!("Z {}\n", self.z);
        for o in &self.orbitals {
            s += &format!("{} {} {} {} {} {}\n", o.n, o.l, o.m, o.j, o.p, o.xi);
        }
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                if self.symmetry[i][j] != 1 {
                    s += &format!("S {} {} {}\n", i + 1, j + 1, self.symmetry[i][j]);
                }
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Configuration> {
        let mut z = None;
        let mut orbitals = Vec::new();
        let mut overrides = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line_no = k + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| Error::Parse {
                line: line_no,
                msg: format!("{msg}: {raw:?}"),
            };
            match toks[0] {
                "Z" | "z" => {
                    if toks.len() != 2 {
                        return Err(err("expected `Z <charge>`"));
                    }
                    z = Some(toks[1].parse::<u32>().map_err(|_| err("bad charge"))?);
                }
                "S" | "s" => {
                    if toks.len() != 4 {
                        return Err(err("expected `S i j v`"));
                    }
                    let i: usize = toks[1].parse().map_err(|_| err("bad index"))?;
                    let j: usize = toks[2].parse().map_err(|_| err("bad index"))?;
                    let v: u8 = toks[3].parse().map_err(|_| err("bad value"))?;
                    if i == 0 || j == 0 {
                        return Err(err("indices are 1-based"));
                    }
                    overrides.push((line_no, i - 1, j - 1, v));
                }
                _ => {
                    if toks.len() != 6 {
                        return Err(err("expected `n l m J P xi`"));
                    }
                    let int = |t: &str| t.parse::<i64>().map_err(|_| err("bad integer"));
                    let (n, l, m, j, p) = (
                        int(toks[0])?,
                        int(toks[1])?,
                        int(toks[2])?,
                        int(toks[3])?,
                        int(toks[4])?,
                    );
                    if n < 1 || l < 0 || j < 0 || p < 0 || j > 255 || p > 255 {
                        return Err(err("quantum number out of range"));
                    }
                    let xi: f64 = toks[5].parse().map_err(|_| err("bad xi"))?;
                    orbitals.push(Orbital::new(
                        n as u32, l as u32, m as i32, j as u8, p as u8, xi,
                    ));
                }
            }
        }
        let z = z.ok_or(Error::Parse {
            line: 0,
            msg: "missing `Z` line".into(),
        })?;
        let mut c = Configuration::new(z, orbitals);
        for (line, i, j, v) in overrides {
            if i >= c.len() || j >= c.len() {
                return Err(Error::Parse {
                    line,
                    msg: "symmetry index past last orbital".into(),
                });
            }
            c = c.with_s(i, j, v);
        }
        Ok(c)
    }
}

/// Every violated configuration invariant; empty means valid.
pub fn validate_configuration(c: &Configuration) -> Vec<Violation> {
    let mut v = Vec::new();
    if c.z == 0 {
        v.push(Violation::ChargeZero);
    }
    if c.orbitals.is_empty() {
        v.push(Violation::EmptyConfiguration);
    }
    for (index, o) in c.orbitals.iter().enumerate() {
        for violation in validate_orbital(o) {
            v.push(Violation::Orbital {
                index,
                violation: Box::new(violation),
            });
        }
    }
    let n = c.orbitals.len();
    if c.symmetry.len() != n || c.symmetry.iter().any(|row| row.len() != n) {
        v.push(Violation::SymmetryShape);
        return v;
    }
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if c.symmetry[i][j] > 1 {
                v.push(Violation::SymmetryValue { i, j });
            }
            if j > i && c.symmetry[i][j] != c.symmetry[j][i] {
                v.push(Violation::SymmetryAsymmetric { i, j });
            }
            if j > i && c.symmetry[i][j] == 0 && c.orbitals[i] == c.orbitals[j] {
                v.push(Violation::ZeroNormPair { i, j });
            }
        }
    }
    v
}
