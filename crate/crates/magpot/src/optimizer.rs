//! Bounded Nelder-Mead minimisation of the energy functional over the
//! orbital exponents, with jittered restarts and the S = 0 orthogonality
//! side condition solved for dependent exponents.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{evaluate_with, ExchangeTable, FunctionalMode};
use crate::hydrogenic::{radial_denominator, DeltaTriple};
use crate::integrals::overlap;
use crate::quantum::{eq15_orthogonality_hint, validate_configuration, Configuration};

/// Points in the bracket scan for a dependent exponent.
const ROOT_SCAN: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub mode: FunctionalMode,
    pub table: ExchangeTable,
    /// Starting exponents; `None` uses screened eigen exponents.
    pub xi_init: Option<Vec<f64>>,
    /// Per-orbital bounds; `None` uses (1e-3, 3 Z) for every orbital.
    pub xi_bounds: Option<Vec<(f64, f64)>>,
    pub tol_f: f64,
    pub tol_x: f64,
    pub restarts: usize,
    /// Evaluation budget per simplex run.
    pub max_evals: usize,
    pub seed: u64,
    /// Solve u_ij = 0 for pairs the trial-function side condition marks as
    /// orthogonal instead of leaving both exponents free.
    pub enforce_orthogonality: bool,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            mode: FunctionalMode::ImprovedVtheta,
            table: ExchangeTable::default(),
            xi_init: None,
            xi_bounds: None,
            tol_f: 1e-9,
            tol_x: 1e-7,
            restarts: 5,
            max_evals: 20000,
            seed: 0,
            enforce_orthogonality: true,
        }
    }
}

impl MinimizeOptions {
    pub fn with_mode(mode: FunctionalMode) -> Self {
        MinimizeOptions {
            mode,
            ..Default::default()
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.tol_f > 0.0 && self.tol_x > 0.0) {
            return Err(Error::Invalid("tolerances must be positive".into()));
        }
        if let Some(x) = &self.xi_init {
            if x.len() != n {
                return Err(Error::Invalid(format!(
                    "xi_init has {} entries for {n} orbitals",
                    x.len()
                )));
            }
        }
        if let Some(b) = &self.xi_bounds {
            if b.len() != n {
                return Err(Error::Invalid(format!(
                    "xi_bounds has {} entries for {n} orbitals",
                    b.len()
                )));
            }
            for &(lo, hi) in b {
                if !(lo > 0.0 && lo < hi) {
                    return Err(Error::Invalid(format!("bad bounds ({lo}, {hi})")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub xi_star: Vec<f64>,
    pub energy: f64,
    pub evals: usize,
    pub converged: bool,
    /// best energy after each improving evaluation
    pub history: Vec<f64>,
    /// best energy of each simplex run (the first is the unjittered start)
    pub run_energies: Vec<f64>,
    /// (i, j) pairs whose exponent was solved from u_ij = 0
    pub constrained_pairs: Vec<(usize, usize)>,
}

/// Screened starting exponents: Z_eff / D with Z_eff = Z - 0.3 * inner,
/// where inner counts orbitals of lower n and earlier orbitals of equal n.
pub fn screened_xi(c: &Configuration, d: &DeltaTriple) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(c.len());
    for (k, o) in c.orbitals.iter().enumerate() {
        let inner = c
            .orbitals
            .iter()
            .enumerate()
            .filter(|&(j, p)| j != k && (p.n < o.n || (p.n == o.n && j < k)))
            .count();
        let z_eff = (c.z as f64 - 0.3 * inner as f64).max(0.3);
        out.push(z_eff / radial_denominator(o, d)?);
    }
    Ok(out)
}

/// Pairs (i, j) with S = 0 where the side condition asks for orthogonality
/// and the overlap is not already zero by symmetry.
pub fn orthogonality_pairs(c: &Configuration, d: &DeltaTriple) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for i in 0..c.len() {
        for j in i + 1..c.len() {
            let (a, b) = (c.orbitals[i], c.orbitals[j]);
            if !eq15_orthogonality_hint(&a, &b, c.s(i, j)) {
                continue;
            }
            let probe = |r: f64| overlap(&a.with_xi(1.0), &b.with_xi(r), d).map(|u| u.abs());
            if probe(0.5)? < 1e-12 && probe(1.7)? < 1e-12 {
                continue;
            }
            out.push((i, j));
        }
    }
    Ok(out)
}

/// How the full exponent vector is built from the free parameters.
struct Plan {
    free: Vec<usize>,
    /// (dependent, parent) in solve order
    solved: Vec<(usize, usize)>,
}

fn plan(n: usize, pairs: &[(usize, usize)]) -> Plan {
    let mut seen = vec![false; n];
    let mut free = Vec::new();
    let mut solved = Vec::new();
    for root in 0..n {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        free.push(root);
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(a, b) in pairs {
                let w = if a == v {
                    b
                } else if b == v {
                    a
                } else {
                    continue;
                };
                if !seen[w] {
                    seen[w] = true;
                    solved.push((w, v));
                    queue.push_back(w);
                }
            }
        }
    }
    Plan { free, solved }
}

/// Exponent of orbital `k` making it orthogonal to `parent`, nearest to `guess`.
fn solve_orthogonal(
    c: &Configuration,
    d: &DeltaTriple,
    k: usize,
    parent: usize,
    bounds: (f64, f64),
    guess: f64,
) -> Option<f64> {
    let a = c.orbitals[parent];
    let b = c.orbitals[k];
    let f = |x: f64| overlap(&a, &b.with_xi(x), d).ok();
    let (lo, hi) = bounds;
    let ratio = (hi / lo).powf(1.0 / (ROOT_SCAN - 1) as f64);
    let mut best: Option<f64> = None;
    let mut x0 = lo;
    let mut f0 = f(x0)?;
    for _ in 1..ROOT_SCAN {
        let x1 = (x0 * ratio).min(hi);
        let f1 = f(x1)?;
        if f0 == 0.0 || f0.signum() != f1.signum() {
            let (mut l, mut r, mut fl) = (x0, x1, f0);
            for _ in 0..200 {
                let m = 0.5 * (l + r);
                let fm = f(m)?;
                if fm == 0.0 {
                    l = m;
                    r = m;
                    break;
                }
                if fm.signum() == fl.signum() {
                    l = m;
                    fl = fm;
                } else {
                    r = m;
                }
                if r - l <= 1e-15 * r {
                    break;
                }
            }
            let root = 0.5 * (l + r);
            if best.is_none_or(|b| (root - guess).abs() < (b - guess).abs()) {
                best = Some(root);
            }
        }
        x0 = x1;
        f0 = f1;
    }
    best
}

struct Problem<'a> {
    c: &'a Configuration,
    d: DeltaTriple,
    opts: &'a MinimizeOptions,
    bounds: Vec<(f64, f64)>,
    guess: Vec<f64>,
    plan: Plan,
    evals: usize,
    best: f64,
    best_xi: Vec<f64>,
    history: Vec<f64>,
}

impl Problem<'_> {
    fn full_xi(&self, p: &[f64]) -> Option<Vec<f64>> {
        let mut xi = self.guess.clone();
        for (&k, &v) in self.plan.free.iter().zip(p) {
            xi[k] = v;
        }
        for &(k, parent) in &self.plan.solved {
            let cfg = self.c.with_xi(&xi);
            xi[k] = solve_orthogonal(&cfg, &self.d, k, parent, self.bounds[k], self.guess[k])?;
        }
        Some(xi)
    }

    fn clip(&self, p: &mut [f64]) {
        for (v, &k) in p.iter_mut().zip(&self.plan.free) {
            let (lo, hi) = self.bounds[k];
            *v = v.clamp(lo, hi);
        }
    }

    /// Energy at free parameters; points where the functional is undefined
    /// count as +inf so the simplex moves away from them.
    fn value(&mut self, p: &[f64]) -> Result<f64> {
        self.evals += 1;
        let Some(xi) = self.full_xi(p) else {
            return Ok(f64::INFINITY);
        };
        let e = match evaluate_with(&self.c.with_xi(&xi), self.opts.mode, self.opts.table) {
            Ok(r) => r.w,
            Err(Error::ZeroNorm(_)) | Err(Error::Domain(_)) | Err(Error::DivisionByZero(_)) => {
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };
        if e < self.best {
            self.best = e;
            self.best_xi = xi;
            self.history.push(e);
        }
        Ok(e)
    }

    /// One Nelder-Mead run. Returns (best point, best value, converged).
    fn simplex(&mut self, start: &[f64]) -> Result<(Vec<f64>, f64, bool)> {
        let k = start.len();
        let budget = self.evals + self.opts.max_evals;
        let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
        for i in 0..k {
            let mut p = start.to_vec();
            let step = 0.05 * p[i].abs().max(1e-3);
            p[i] += step;
            self.clip(&mut p);
            if p[i] == start[i] {
                p[i] -= 2.0 * step;
                self.clip(&mut p);
            }
            pts.push(p);
        }
        let mut vals = Vec::with_capacity(k + 1);
        for p in &pts {
            vals.push(self.value(p)?);
        }
        let mut converged = false;
        while self.evals < budget {
            let mut order: Vec<usize> = (0..=k).collect();
            order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]).then(a.cmp(&b)));
            pts = order.iter().map(|&i| pts[i].clone()).collect();
            vals = order.iter().map(|&i| vals[i]).collect();
            let spread_f = vals[k] - vals[0];
            let spread_x = pts[1..]
                .iter()
                .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            if vals[0].is_finite() && spread_f <= self.opts.tol_f && spread_x <= self.opts.tol_x {
                converged = true;
                break;
            }
            let centroid: Vec<f64> = (0..k)
                .map(|j| pts[..k].iter().map(|p| p[j]).sum::<f64>() / k as f64)
                .collect();
            let along = |t: f64, worst: &[f64]| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(worst)
                    .map(|(c, w)| c + t * (c - w))
                    .collect()
            };
            let worst = pts[k].clone();
            let mut xr = along(1.0, &worst);
            self.clip(&mut xr);
            let fr = self.value(&xr)?;
            if fr < vals[0] {
                let mut xe = along(2.0, &worst);
                self.clip(&mut xe);
                let fe = self.value(&xe)?;
                if fe < fr {
                    pts[k] = xe;
                    vals[k] = fe;
                } else {
                    pts[k] = xr;
                    vals[k] = fr;
                }
                continue;
            }
            if fr < vals[k - 1] {
                pts[k] = xr;
                vals[k] = fr;
                continue;
            }
            let (mut xc, outside) = if fr < vals[k] {
                (along(0.5, &worst), true)
            } else {
                (along(-0.5, &worst), false)
            };
            self.clip(&mut xc);
            let fc = self.value(&xc)?;
            if (outside && fc <= fr) || (!outside && fc < vals[k]) {
                pts[k] = xc;
                vals[k] = fc;
                continue;
            }
            for i in 1..=k {
                let mut p: Vec<f64> = pts[0]
                    .iter()
                    .zip(&pts[i])
                    .map(|(b, x)| b + 0.5 * (x - b))
                    .collect();
                self.clip(&mut p);
                vals[i] = self.value(&p)?;
                pts[i] = p;
            }
        }
        let i = (0..=k)
            .min_by(|&a, &b| vals[a].total_cmp(&vals[b]))
            .unwrap_or(0);
        Ok((pts[i].clone(), vals[i], converged))
    }
}

/// Minimise W over the exponents of `c` (its own xi values are ignored
/// unless passed through `opts.xi_init`).
pub fn minimize(c: &Configuration, opts: &MinimizeOptions) -> Result<MinimizeResult> {
    let problems = validate_configuration(&c.with_xi(&vec![1.0; c.len()]));
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|p| p.to_string()).collect();
        return Err(Error::Invalid(text.join("; ")));
    }
    opts.validate(c.len())?;
    let d = opts.mode.deltas(c.z)?;
    let bounds = opts
        .xi_bounds
        .clone()
        .unwrap_or_else(|| vec![(1e-3, 3.0 * c.z as f64); c.len()]);
    let guess = match &opts.xi_init {
        Some(x) => x.clone(),
        None => screened_xi(c, &d)?,
    };
    let guess: Vec<f64> = guess
        .iter()
        .zip(&bounds)
        .map(|(&x, &(lo, hi))| x.clamp(lo, hi))
        .collect();
    let pairs = if opts.enforce_orthogonality {
        orthogonality_pairs(c, &d)?
    } else {
        Vec::new()
    };
    let plan = plan(c.len(), &pairs);
    let mut pb = Problem {
        c,
        d,
        opts,
        bounds,
        guess: guess.clone(),
        plan,
        evals: 0,
        best: f64::INFINITY,
        best_xi: guess.clone(),
        history: Vec::new(),
    };
    let start: Vec<f64> = pb.plan.free.iter().map(|&k| guess[k]).collect();
    // The starting point itself must be evaluable.
    if let Some(xi) = pb.full_xi(&start) {
        evaluate_with(&c.with_xi(&xi), opts.mode, opts.table)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut best_p, mut best_f, mut converged) = pb.simplex(&start)?;
    let mut run_energies = vec![best_f];
    for _ in 0..opts.restarts {
        let mut p: Vec<f64> = best_p
            .iter()
            .map(|&v| v * (1.0 + rng.gen_range(-0.1..=0.1)))
            .collect();
        pb.clip(&mut p);
        let (q, f, conv) = pb.simplex(&p)?;
        run_energies.push(f);
        if f < best_f {
            best_p = q;
            best_f = f;
            converged = conv;
        }
    }
    if !best_f.is_finite() {
        return Err(Error::Convergence(
            "no finite energy found inside the bounds".into(),
        ));
    }
    let xi_star = pb.full_xi(&best_p).unwrap_or_else(|| pb.best_xi.clone());
    Ok(MinimizeResult {
        xi_star,
        energy: best_f,
        evals: pb.evals,
        converged,
        history: pb.history,
        run_energies,
        constrained_pairs: pairs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub config: Configuration,
    pub result: std::result::Result<MinimizeResult, String>,
    /// E_row - E_ground
    pub delta_e: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub ground: MinimizeResult,
    pub rows: Vec<ScanRow>,
}

/// Minimise a ground configuration and then every template, reporting
/// each excitation energy. Row failures are recorded and the scan goes on.
pub fn excited_scan(
    ground: &Configuration,
    templates: &[Configuration],
    opts: &MinimizeOptions,
) -> Result<ScanReport> {
    let g = minimize(ground, opts)?;
    let mut rows = Vec::with_capacity(templates.len());
    for t in templates {
        if t.z != ground.z {
            rows.push(ScanRow {
                config: t.clone(),
                result: Err("template Z differs from ground".into()),
                delta_e: None,
            });
            continue;
        }
        let row_opts = MinimizeOptions {
            xi_init: None,
            xi_bounds: None,
            ..opts.clone()
        };
        let r = minimize(t, &row_opts).map_err(|e| e.to_string());
        let delta_e = r.as_ref().ok().map(|m| m.energy - g.energy);
        rows.push(ScanRow {
            config: t.clone(),
            result: r,
            delta_e,
        });
    }
    Ok(ScanReport { ground: g, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Orbital;

    #[test]
    fn constraint_plan_is_a_tree() {
        let p = plan(3, &[(0, 2), (1, 2)]);
        assert_eq!(p.free, vec![0]);
        assert_eq!(p.solved, vec![(2, 0), (1, 2)]);
        let p = plan(3, &[]);
        assert_eq!(p.free, vec![0, 1, 2]);
    }

    #[test]
    fn one_s_two_s_root() {
        let d = DeltaTriple::zero(2);
        let c = Configuration::new(
            2,
            vec![
                Orbital::new(1, 0, 0, 0, 0, 1.9),
                Orbital::new(2, 0, 0, 0, 0, 0.5),
            ],
        );
        let x = solve_orthogonal(&c, &d, 1, 0, (1e-3, 6.0), 0.5).unwrap();
        assert!((x - 0.95).abs() < 1e-10, "{x}");
    }

    #[test]
    fn hydrogen_minimum_is_eigen() {
        let c = Configuration::new(1, vec![Orbital::new(1, 0, 0, 0, 0, 1.0)]);
        let r = minimize(
            &c,
            &MinimizeOptions {
                restarts: 1,
                ..MinimizeOptions::with_mode(FunctionalMode::ImprovedBare)
            },
        )
        .unwrap();
        assert!((r.xi_star[0] - 1.0).abs() < 1e-4);
        assert!((r.energy + 0.500007).abs() < 1e-6);
        assert!(r.converged);
    }
}
