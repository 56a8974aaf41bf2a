//! Reference data, table reproduction and the Tier-1 checks behind the
//! command line tool.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{evaluate_single, evaluate_with, ExchangeTable, FunctionalMode};
use crate::hydrogenic::{
    defining_residuals, defining_targets, deltas, eigen_energy, eigen_xi_energy,
    hydrogen_level_table, level_difference, DeltaTriple, TABLE_LEVELS,
};
use crate::optimizer::{minimize, MinimizeOptions, MinimizeResult};
use crate::qed::{magnetic_term, qed_column};
use crate::quantum::{Configuration, Orbital};

pub const PAPER_TABLES_CSV: &str = include_str!("../data/paper_tables.csv");
pub const PAPER_EXPONENTS_CSV: &str = include_str!("../data/paper_exponents.csv");

/// Printed error-rate column of the hydrogen table, row order.
pub const TABLE2_EPSILON: [&str; 9] = [
    "", "0", "-0.00033", "-0.00029", "0.00007", "0.00007", "-0.00009", "-0.00009", "",
];
/// Printed error-rate column of the U91+ table, row order.
pub const TABLE3_EPSILON: [&str; 9] = [
    "", "", "-3.46", "-3.13", "0.83", "0.83", "-0.75", "-0.75", "",
];

/// Lithium rows whose reference values the source itself disputes; they
/// are reported but never gate.
pub const DISPUTED_LI_ROWS: [u32; 5] = [12, 41, 42, 57, 58];

/// Table 4 rows held to the excited-scan target.
pub const HE_TARGET_ROWS: [u32; 5] = [2, 4, 16, 20, 38];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Source {
    Nist,
    Qed,
    Paper,
    Drake,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Nist => "NIST",
            Source::Qed => "QED",
            Source::Paper => "PAPER",
            Source::Drake => "DRAKE",
        })
    }
}

/// One reference energy. `system` is `<atom>:T<k>`, e.g. `He:T4`; the
/// bare-Schrodinger column of table 1 is `He:T1S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceLevel {
    pub system: String,
    pub row_id: u32,
    pub label: String,
    #[serde(rename = "energy_au")]
    pub energy: f64,
    pub source: Source,
}

/// Parses reference CSV text (header `system,row_id,label,energy_au,source`).
pub fn parse_reference(text: &str) -> Result<Vec<ReferenceLevel>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let want = ["system", "row_id", "label", "energy_au", "source"];
    let headers = rdr.headers()?.clone();
    if !text.trim().is_empty() && headers.iter().collect::<Vec<_>>() != want {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected header {}", want.join(",")),
        });
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let lvl: ReferenceLevel = rec.deserialize(Some(&headers)).map_err(|e| Error::Parse {
            line,
            msg: e.to_string(),
        })?;
        if !lvl.energy.is_finite() {
            return Err(Error::Parse {
                line,
                msg: "energy is not finite".into(),
            });
        }
        if !seen.insert((lvl.system.clone(), lvl.row_id, lvl.source)) {
            return Err(Error::Duplicate(format!(
                "{} row {} {} (line {line})",
                lvl.system, lvl.row_id, lvl.source
            )));
        }
        out.push(lvl);
    }
    Ok(out)
}

pub fn load_reference(path: impl AsRef<Path>) -> Result<Vec<ReferenceLevel>> {
    parse_reference(&std::fs::read_to_string(path)?)
}

/// The reference data shipped with the crate.
pub fn bundled_reference() -> Vec<ReferenceLevel> {
    parse_reference(PAPER_TABLES_CSV).expect("bundled reference data parses")
}

/// Exponents printed next to each row, keyed by (system, row).
pub fn paper_exponents() -> BTreeMap<(String, u32), Vec<f64>> {
    #[derive(Deserialize)]
    struct Row {
        system: String,
        row_id: u32,
        xi1: Option<f64>,
        xi2: Option<f64>,
        xi3: Option<f64>,
    }
    let mut rdr = csv::Reader::from_reader(PAPER_EXPONENTS_CSV.as_bytes());
    let mut out = BTreeMap::new();
    for r in rdr.deserialize::<Row>() {
        let r = r.expect("bundled exponent data parses");
        let xi: Vec<f64> = [r.xi1, r.xi2, r.xi3].into_iter().flatten().collect();
        out.insert((r.system, r.row_id), xi);
    }
    out
}

fn lookup<'a>(
    refs: &'a [ReferenceLevel],
    system: &str,
    row: u32,
    source: Source,
) -> Option<&'a ReferenceLevel> {
    refs.iter()
        .find(|r| r.system == system && r.row_id == row && r.source == source)
}

fn row_ids(refs: &[ReferenceLevel], system: &str) -> Vec<u32> {
    let mut ids: Vec<u32> = refs
        .iter()
        .filter(|r| r.system == system)
        .map(|r| r.row_id)
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ErrorForm {
    /// 100 (E - E_ref) / |E_ref|, for absolute energies
    Absolute,
    /// 100 (dE_ref - dE) / dE_ref, for level differences
    Difference,
}

/// Error rate in percent.
pub fn error_rate(computed: f64, reference: f64, form: ErrorForm) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::DivisionByZero("reference value is zero".into()));
    }
    Ok(match form {
        ErrorForm::Absolute => 100.0 * (computed - reference) / reference.abs(),
        ErrorForm::Difference => 100.0 * (reference - computed) / reference,
    })
}

/// One reproduced value next to the printed one and the external
/// reference used for the error rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub table: u8,
    pub system: String,
    pub row_id: u32,
    pub label: String,
    /// `dE`, `E` or `E_S`
    pub quantity: String,
    pub computed: f64,
    /// the printed reference value
    pub reference: Option<f64>,
    pub abs_diff: Option<f64>,
    /// external value the error rate is taken against
    pub baseline: Option<f64>,
    pub baseline_source: Option<Source>,
    pub epsilon: Option<f64>,
    pub tolerance: Option<f64>,
    pub pass: Option<bool>,
    /// acceptance tier this row belongs to (1 gates the exit code; 3 is a target)
    pub tier: u8,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub xi3: Option<f64>,
    pub note: String,
}

impl ComparisonRow {
    fn new(
        table: u8,
        system: &str,
        row_id: u32,
        label: &str,
        quantity: &str,
        computed: f64,
        tier: u8,
    ) -> Self {
        ComparisonRow {
            table,
            system: system.into(),
            row_id,
            label: label.into(),
            quantity: quantity.into(),
            computed,
            reference: None,
            abs_diff: None,
            baseline: None,
            baseline_source: None,
            epsilon: None,
            tolerance: None,
            pass: None,
            tier,
            xi1: None,
            xi2: None,
            xi3: None,
            note: String::new(),
        }
    }

    fn against(mut self, reference: Option<f64>, tolerance: Option<f64>) -> Self {
        self.reference = reference;
        if let Some(r) = reference {
            let d = (self.computed - r).abs();
            self.abs_diff = Some(d);
            if let Some(t) = tolerance {
                self.tolerance = Some(t);
                self.pass = Some(d <= t);
            }
        }
        self
    }

    fn baseline(mut self, b: Option<&ReferenceLevel>, form: ErrorForm) -> Self {
        if let Some(b) = b {
            self.baseline = Some(b.energy);
            self.baseline_source = Some(b.source);
            self.epsilon = error_rate(self.computed, b.energy, form).ok();
        }
        self
    }

    fn with_xi(mut self, xi: &[f64]) -> Self {
        self.xi1 = xi.first().copied();
        self.xi2 = xi.get(1).copied();
        self.xi3 = xi.get(2).copied();
        self
    }

    fn note(mut self, s: impl Into<String>) -> Self {
        let s = s.into();
        if !s.is_empty() {
            if !self.note.is_empty() {
                self.note.push_str("; ");
            }
            self.note.push_str(&s);
        }
        self
    }

    pub fn failed(&self) -> bool {
        self.pass == Some(false)
    }
}

pub fn write_rows_csv<W: std::io::Write>(rows: &[ComparisonRow], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[ComparisonRow]) -> Result<String> {
    let mut buf = Vec::new();
    write_rows_csv(rows, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ComparisonRow>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for r in rdr.deserialize() {
        out.push(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartPoint {
    /// screened eigen exponents
    Screened,
    /// the exponents printed next to the row
    Paper,
}

impl FromStr for StartPoint {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "screened" => Ok(StartPoint::Screened),
            "paper" => Ok(StartPoint::Paper),
            _ => Err(Error::Invalid(format!("unknown start point {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOptions {
    pub seed: u64,
    pub restarts: usize,
    pub table: ExchangeTable,
    /// overrides the functional mode of tables 4-6
    pub mode: Option<FunctionalMode>,
    /// overrides every row tolerance
    pub tol: Option<f64>,
    pub start: StartPoint,
    /// only these row ids (all when `None`)
    pub rows: Option<Vec<u32>>,
    pub threads: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            seed: 0,
            restarts: 5,
            table: ExchangeTable::default(),
            mode: None,
            tol: None,
            start: StartPoint::Screened,
            rows: None,
            threads: std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1),
        }
    }
}

impl TableOptions {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn wants(&self, id: u32) -> bool {
        self.rows.as_ref().is_none_or(|r| r.contains(&id))
    }

    fn minimize_opts(&self, mode: FunctionalMode, xi_init: Option<Vec<f64>>) -> MinimizeOptions {
        MinimizeOptions {
            mode,
            table: self.table,
            xi_init,
            restarts: self.restarts,
            seed: self.seed,
            ..MinimizeOptions::default()
        }
    }
}

/// Parallel map preserving input order.
fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                out.lock().expect("no poisoned lock")[i] = Some(r);
            });
        }
    });
    out.into_inner()
        .expect("no poisoned lock")
        .into_iter()
        .map(|r| r.expect("every item computed"))
        .collect()
}

fn parse_ints(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|_| Error::Invalid(format!("bad label field {t:?}")))
        })
        .collect()
}

fn orbital_from(v: &[i64]) -> Result<Orbital> {
    let p = if v.len() > 4 { v[4] } else { 0 };
    if v.len() < 4 || v.iter().any(|x| !(-8..=64).contains(x)) {
        return Err(Error::Invalid(format!("bad orbital {v:?}")));
    }
    Ok(Orbital::new(
        v[0] as u32,
        v[1] as u32,
        v[2] as i32,
        v[3] as u8,
        p as u8,
        1.0,
    ))
}

/// Helium configuration of a table 1 label `n,l,m,J;n,l,m,J;S`. Labels
/// carry no parity; identical labels use P = (0, 1) as in the ground row
/// of table 4, all others P = 0.
pub fn table1_config(label: &str) -> Result<Configuration> {
    let parts: Vec<&str> = label.split(';').collect();
    if parts.len() != 3 {
        return Err(Error::Invalid(format!("table 1 label {label:?}")));
    }
    let a = orbital_from(&parse_ints(parts[0])?)?;
    let mut b = orbital_from(&parse_ints(parts[1])?)?;
    if a.same_label(&b) {
        b.p = 1;
    }
    let s = parts[2]
        .trim()
        .parse::<u8>()
        .map_err(|_| Error::Invalid(format!("bad S in {label:?}")))?;
    Ok(Configuration::new(2, vec![a, b]).with_s(0, 1, s))
}

/// Helium configuration of a table 4 label `n,l,m,J,P;S`, first orbital (1,0,0,0,0).
pub fn table4_config(label: &str) -> Result<Configuration> {
    let (o, s) = label
        .split_once(';')
        .ok_or_else(|| Error::Invalid(format!("table 4 label {label:?}")))?;
    let b = orbital_from(&parse_ints(o)?)?;
    let s = s
        .trim()
        .parse::<u8>()
        .map_err(|_| Error::Invalid(format!("bad S in {label:?}")))?;
    Ok(Configuration::new(2, vec![Orbital::new(1, 0, 0, 0, 0, 1.0), b]).with_s(0, 1, s))
}

/// Lithium configuration of a table 5 label `n,l,m,J,P;S13,S23` with the
/// core (1,0,0,0,0), (1,0,0,0,1), S12 = 1.
pub fn table5_config(label: &str) -> Result<Configuration> {
    let (o, s) = label
        .split_once(';')
        .ok_or_else(|| Error::Invalid(format!("table 5 label {label:?}")))?;
    let c = orbital_from(&parse_ints(o)?)?;
    let s = parse_ints(s)?;
    if s.len() != 2 || s.iter().any(|&v| !(0..=1).contains(&v)) {
        return Err(Error::Invalid(format!("bad S pair in {label:?}")));
    }
    Ok(Configuration::new(
        3,
        vec![
            Orbital::new(1, 0, 0, 0, 0, 1.0),
            Orbital::new(1, 0, 0, 0, 1, 1.0),
            c,
        ],
    )
    .with_s(0, 2, s[0] as u8)
    .with_s(1, 2, s[1] as u8))
}

fn hydrogenic_table(
    k: u8,
    z: u32,
    refs: &[ReferenceLevel],
    opts: &TableOptions,
) -> Result<Vec<ComparisonRow>> {
    let system = if k == 2 { "H:T2" } else { "U91+:T3" };
    let eps = if k == 2 {
        &TABLE2_EPSILON
    } else {
        &TABLE3_EPSILON
    };
    let rows = hydrogen_level_table(z)?;
    let qed = qed_column(z)?;
    let mut out = Vec::new();
    for r in rows {
        let id = r.id as u32;
        if !opts.wants(id) {
            continue;
        }
        let paper = lookup(refs, system, id, Source::Paper);
        let label = paper.map(|p| p.label.clone()).unwrap_or(r.label.clone());
        let tol = if k == 2 {
            opts.tol(1e-9)
        } else {
            opts.tol(1e-6) * paper.map(|p| p.energy.abs()).unwrap_or(1.0)
        };
        let mut row = ComparisonRow::new(k, system, id, &label, "dE", r.delta_e, 1)
            .against(paper.map(|p| p.energy), Some(tol))
            .baseline(lookup(refs, system, id, Source::Qed), ErrorForm::Difference)
            .with_xi(&[r.xi]);
        if r.label != label {
            row = row.note(format!("computed with label {}", r.label));
        }
        if let (Some(q), Some(&e)) = (row.baseline, qed.get(r.id - 1)) {
            let s = format!("QED column {:.10}", e);
            row = row.note(if (q - e).abs() <= 0.5e-10 * (1.0 + 1e-6) {
                s
            } else {
                format!("{s} MISMATCH")
            });
        }
        if !eps[r.id - 1].is_empty() {
            row = row.note(format!("printed eps {}", eps[r.id - 1]));
        }
        out.push(row);
    }
    Ok(out)
}

fn table1(refs: &[ReferenceLevel], opts: &TableOptions) -> Result<Vec<ComparisonRow>> {
    let ids: Vec<u32> = row_ids(refs, "He:T1")
        .into_iter()
        .filter(|&i| opts.wants(i))
        .collect();
    let jobs: Vec<(u32, FunctionalMode)> = ids
        .iter()
        .flat_map(|&i| {
            [
                (i, FunctionalMode::ImprovedBare),
                (i, FunctionalMode::SchrodingerBare),
            ]
        })
        .collect();
    let results = par_map(
        &jobs,
        opts.threads,
        |&(id, mode)| -> Result<(ComparisonRow, Option<MinimizeResult>)> {
            let paper_sys = if mode == FunctionalMode::ImprovedBare {
                "He:T1"
            } else {
                "He:T1S"
            };
            let any = refs
                .iter()
                .find(|r| r.system == "He:T1" && r.row_id == id)
                .ok_or_else(|| Error::Invalid(format!("table 1 row {id} missing")))?;
            let c = table1_config(&any.label)?;
            let quantity = if mode == FunctionalMode::ImprovedBare {
                "E"
            } else {
                "E_S"
            };
            let (tier, tol) = if id == 1 { (2, 5e-5) } else { (3, 5e-4) };
            match minimize(&c, &opts.minimize_opts(mode, None)) {
                Ok(m) => {
                    let row =
                        ComparisonRow::new(1, paper_sys, id, &any.label, quantity, m.energy, tier)
                            .against(
                                lookup(refs, paper_sys, id, Source::Paper).map(|r| r.energy),
                                Some(opts.tol(tol)),
                            )
                            .baseline(
                                lookup(refs, "He:T1", id, Source::Drake),
                                ErrorForm::Absolute,
                            )
                            .with_xi(&m.xi_star)
                            .note(if m.converged { "" } else { "not converged" });
                    Ok((row, Some(m)))
                }
                Err(e) => Ok((
                    ComparisonRow::new(1, paper_sys, id, &any.label, quantity, f64::NAN, tier)
                        .note(format!("error: {e}")),
                    None,
                )),
            }
        },
    );
    results.into_iter().map(|r| r.map(|(row, _)| row)).collect()
}

/// Excitation table (4 or 5): every row minimised, dE against row 1.
fn scan_table(k: u8, refs: &[ReferenceLevel], opts: &TableOptions) -> Result<Vec<ComparisonRow>> {
    let system = if k == 4 { "He:T4" } else { "Li:T5" };
    let mode = opts.mode.unwrap_or(FunctionalMode::ImprovedVtheta);
    let xi_table = paper_exponents();
    let mut ids = row_ids(refs, system);
    ids.retain(|&i| i == 1 || opts.wants(i));
    let build = |id: u32| -> Result<(Configuration, String)> {
        let lvl = refs
            .iter()
            .find(|r| r.system == system && r.row_id == id)
            .ok_or_else(|| Error::Invalid(format!("{system} row {id} missing")))?;
        let c = if k == 4 {
            table4_config(&lvl.label)?
        } else {
            table5_config(&lvl.label)?
        };
        Ok((c, lvl.label.clone()))
    };
    let results = par_map(
        &ids,
        opts.threads,
        |&id| -> Result<(String, std::result::Result<MinimizeResult, String>)> {
            let (c, label) = build(id)?;
            let init = match opts.start {
                StartPoint::Paper => xi_table.get(&(system.to_string(), id)).cloned(),
                StartPoint::Screened => None,
            };
            Ok((
                label,
                minimize(&c, &opts.minimize_opts(mode, init)).map_err(|e| e.to_string()),
            ))
        },
    );
    let results: Vec<_> = results.into_iter().collect::<Result<_>>()?;
    let ground = match &results[0].1 {
        Ok(m) => m.energy,
        Err(e) => {
            return Err(Error::Convergence(format!(
                "{system} ground row failed: {e}"
            )))
        }
    };
    let mut out = Vec::new();
    for (id, (label, res)) in ids.iter().zip(results) {
        if !opts.wants(*id) {
            continue;
        }
        let gated_row = if k == 4 {
            HE_TARGET_ROWS.contains(id)
        } else {
            *id == 40
        };
        let mut row = match res {
            Ok(m) => ComparisonRow::new(k, system, *id, &label, "dE", m.energy - ground, 3)
                .with_xi(&m.xi_star)
                .note(if m.converged { "" } else { "not converged" }),
            Err(e) => ComparisonRow::new(k, system, *id, &label, "dE", f64::NAN, 3)
                .note(format!("error: {e}")),
        };
        let paper = lookup(refs, system, *id, Source::Paper).map(|r| r.energy);
        row = row.against(
            paper,
            if gated_row || opts.tol.is_some() {
                Some(opts.tol(5e-4))
            } else {
                None
            },
        );
        if *id != 1 {
            row = row.baseline(
                lookup(refs, system, *id, Source::Nist),
                ErrorForm::Difference,
            );
        }
        if k == 5 && DISPUTED_LI_ROWS.contains(id) {
            row = row.note("reference disputed; not gated");
        }
        out.push(row);
    }
    Ok(out)
}

fn table6(refs: &[ReferenceLevel], opts: &TableOptions) -> Result<Vec<ComparisonRow>> {
    let mut out = Vec::new();
    let xi_table = paper_exponents();
    for (id, system, z) in [(1u32, "H:T6", 1u32), (2, "U91+:T6", 92)] {
        if !opts.wants(id) {
            continue;
        }
        let d = deltas(z)?;
        let o = Orbital::new(1, 0, 0, 0, 0, 1.0);
        let (xi, e) = eigen_xi_energy(&o, z, &d)?;
        let paper = lookup(refs, system, 1, Source::Paper);
        let tol = if z == 1 {
            opts.tol(1e-6)
        } else {
            opts.tol(1e-8) * 4861.323984
        };
        let label = paper.map(|p| p.label.clone()).unwrap_or_default();
        let mut row = ComparisonRow::new(6, system, 1, &label, "E", e, 1)
            .against(paper.map(|p| p.energy), Some(tol))
            .baseline(lookup(refs, system, 1, Source::Nist), ErrorForm::Absolute)
            .with_xi(&[xi]);
        if let Some(px) = xi_table
            .get(&(system.to_string(), 1))
            .and_then(|v| v.first())
        {
            let ok = (xi - px).abs() <= 1e-4;
            row = row.note(format!(
                "eigen xi {xi:.6} vs printed {px}{}",
                if ok { "" } else { " MISMATCH" }
            ));
            if !ok {
                row.pass = Some(false);
            }
        }
        out.push(row);
    }
    let mode = opts.mode.unwrap_or(FunctionalMode::ImprovedVtheta);
    let many: Vec<(u32, &str, Configuration)> = [
        (3u32, "He:T6", table4_config("1,0,0,0,1;1")?),
        (4, "Li:T6", table5_config("2,0,0,0,1;1,1")?),
    ]
    .into_iter()
    .filter(|(id, _, _)| opts.wants(*id))
    .collect();
    let res = par_map(&many, opts.threads, |(_, system, c)| {
        let init = match opts.start {
            StartPoint::Paper => xi_table.get(&(system.to_string(), 1)).cloned(),
            StartPoint::Screened => None,
        };
        minimize(c, &opts.minimize_opts(mode, init))
    });
    for ((_, system, _), r) in many.iter().zip(res) {
        let paper = lookup(refs, system, 1, Source::Paper);
        let label = paper.map(|p| p.label.clone()).unwrap_or_default();
        let (tier, tol) = if *system == "He:T6" {
            (2, 1e-4)
        } else {
            (3, 5e-4)
        };
        let row = match r {
            Ok(m) => ComparisonRow::new(6, system, 1, &label, "E", m.energy, tier)
                .against(paper.map(|p| p.energy), Some(opts.tol(tol)))
                .baseline(lookup(refs, system, 1, Source::Nist), ErrorForm::Absolute)
                .with_xi(&m.xi_star)
                .note(if m.converged { "" } else { "not converged" }),
            Err(e) => ComparisonRow::new(6, system, 1, &label, "E", f64::NAN, tier)
                .note(format!("error: {e}")),
        };
        out.push(row);
    }
    Ok(out)
}

/// Recompute one of the six tables against `refs`, in row order.
pub fn reproduce_table(
    k: u8,
    refs: &[ReferenceLevel],
    opts: &TableOptions,
) -> Result<Vec<ComparisonRow>> {
    match k {
        1 => table1(refs, opts),
        2 => hydrogenic_table(2, 1, refs, opts),
        3 => hydrogenic_table(3, 92, refs, opts),
        4 | 5 => scan_table(k, refs, opts),
        6 => table6(refs, opts),
        _ => Err(Error::Invalid(format!("table {k} does not exist (1..6)"))),
    }
}

/// Tables mentioned by a reference set, from their system keys.
pub fn tables_in(refs: &[ReferenceLevel]) -> Vec<u8> {
    let mut t: Vec<u8> = refs
        .iter()
        .filter_map(|r| {
            r.system
                .rsplit_once(":T")
                .and_then(|(_, k)| k.trim_end_matches('S').parse().ok())
        })
        .collect();
    t.sort_unstable();
    t.dedup();
    t
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambReport {
    pub z: u32,
    /// dE_2 - dE_1
    pub first: f64,
    /// dE_5 - dE_3
    pub second: f64,
    pub reference: Option<[f64; 2]>,
}

pub fn lamb_report(z: u32) -> Result<LambReport> {
    let d = deltas(z)?;
    let gap = |a: usize, b: usize| level_difference(&TABLE_LEVELS[a], &TABLE_LEVELS[b], z, &d);
    let reference = match z {
        1 => Some([0.0000002159, 0.0000001608]),
        92 => Some([0.1681208972, 11.5196099879]),
        _ => None,
    };
    Ok(LambReport {
        z,
        first: gap(1, 0)?,
        second: gap(4, 2)?,
        reference,
    })
}

/// The two hydrogen splitting ratios: (dE4 - dE3) over the QED splitting and
/// over the magnetic-term splitting of (2,0,0,J).
pub fn splitting_ratios() -> Result<(f64, f64)> {
    let qed = qed_column(1)?;
    let ours = level_difference(&TABLE_LEVELS[3], &TABLE_LEVELS[2], 1, &deltas(1)?)?;
    let em = magnetic_term(2, 0, 0, 1, 1) - magnetic_term(2, 0, 0, 0, 1);
    Ok((ours / (qed[3] - qed[2]), ours / em))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn printed_equal(x: f64, printed: &str) -> bool {
    let decimals = printed.split_once('.').map(|(_, d)| d.len()).unwrap_or(0);
    let want: f64 = printed.parse().unwrap_or(f64::NAN);
    let half = 0.5 * 10f64.powi(-(decimals as i32));
    (x - want).abs() <= half * (1.0 + 1e-9) + 1e-15 * want.abs()
}

fn fmt_value(x: f64, printed: &str) -> String {
    let decimals = printed.split_once('.').map(|(_, d)| d.len()).unwrap_or(0);
    format!("{x:.decimals$}")
}

/// The analytic (Tier 1) acceptance checks. All run in well under a second.
pub fn tier1_checks(refs: &[ReferenceLevel]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let opts = TableOptions {
        threads: 1,
        ..TableOptions::default()
    };
    let mut push = |id: u8, name: &str, pass: bool, detail: String| {
        out.push(Check {
            id,
            name: name.into(),
            pass,
            detail,
        });
    };

    // 1. ground states of the one-electron systems
    let t6 = table6(
        refs,
        &TableOptions {
            rows: Some(vec![1, 2]),
            ..opts.clone()
        },
    )?;
    let ok = t6.iter().all(|r| r.pass == Some(true));
    let detail = t6
        .iter()
        .map(|r| {
            format!(
                "{} E={:.9} xi={:.6}",
                r.system,
                r.computed,
                r.xi1.unwrap_or(f64::NAN)
            )
        })
        .collect::<Vec<_>>()
        .join(", ");
    push(1, "one-electron ground states", ok, detail);

    // 2, 3. level tables
    for (id, k) in [(2u8, 2u8), (3, 3)] {
        let rows = reproduce_table(k, refs, &opts)?;
        let eps = if k == 2 {
            &TABLE2_EPSILON
        } else {
            &TABLE3_EPSILON
        };
        let mut ok = rows.len() == 9 && rows.iter().all(|r| r.pass == Some(true));
        let mut worst: f64 = 0.0;
        for r in &rows {
            let rel = r.abs_diff.unwrap_or(f64::INFINITY)
                / r.reference.map(|x| x.abs().max(1e-300)).unwrap_or(1.0);
            worst = worst.max(if k == 2 {
                r.abs_diff.unwrap_or(f64::INFINITY)
            } else {
                rel
            });
            let printed = eps[r.row_id as usize - 1];
            if k == 2 && !printed.is_empty() {
                ok &= r.epsilon.is_some_and(|e| printed_equal(e, printed));
            }
        }
        let what = if k == 2 { "max |diff|" } else { "max rel diff" };
        push(
            id,
            if k == 2 {
                "hydrogen level table"
            } else {
                "U91+ level table"
            },
            ok,
            format!("{} rows, {what} {worst:.3e}", rows.len()),
        );
    }

    // 4. QED column
    let mut ok = true;
    let mut detail = Vec::new();
    for (z, system) in [(1u32, "H:T2"), (92, "U91+:T3")] {
        let col = qed_column(z)?;
        for (i, e) in col.iter().enumerate() {
            let Some(r) = lookup(refs, system, i as u32 + 1, Source::Qed) else {
                continue;
            };
            let printed = format!("{}", r.energy);
            let text = PAPER_TABLES_CSV
                .lines()
                .find(|l| l.starts_with(&format!("{system},{},", i + 1)) && l.ends_with(",QED"))
                .and_then(|l| l.rsplit(',').nth(1))
                .map(str::to_string)
                .unwrap_or(printed);
            if !printed_equal(*e, &text) {
                ok = false;
                detail.push(format!(
                    "{system} row {}: {} vs {text}",
                    i + 1,
                    fmt_value(*e, &text)
                ));
            }
        }
    }
    push(
        4,
        "QED column",
        ok,
        if detail.is_empty() {
            "all entries equal to printed digits".into()
        } else {
            detail.join("; ")
        },
    );

    // 5. Lamb shifts
    let mut ok = true;
    let mut detail = Vec::new();
    for (z, printed) in [
        (1u32, ["0.0000002159", "0.0000001608"]),
        (92, ["0.1681208972", "11.5196099879"]),
    ] {
        let l = lamb_report(z)?;
        for (v, p) in [l.first, l.second].iter().zip(printed) {
            ok &= printed_equal(*v, p);
            detail.push(format!("Z={z}: {} vs {p}", fmt_value(*v, p)));
        }
    }
    push(5, "Lamb shifts", ok, detail.join(", "));

    // 6. splitting ratios
    let (r1, r2) = splitting_ratios()?;
    push(
        6,
        "hydrogen splitting ratios",
        (r1 - 0.14).abs() <= 0.01 && (r2 - 1.0).abs() <= 0.01,
        format!("{r1:.4}, {r2:.4}"),
    );

    // 7. delta identities
    let mut worst: f64 = 0.0;
    for z in [1u32, 2, 3, 10, 92] {
        let d = deltas(z)?;
        let res = defining_residuals(z, &d)?;
        let t = defining_targets(z);
        for (r, t) in res.iter().zip(t) {
            worst = worst.max(r.abs() / t.abs());
        }
    }
    push(
        7,
        "delta identities",
        worst <= 1e-9,
        format!("max relative residual {worst:.3e}"),
    );

    // 10. Bohr limit
    let mut worst: f64 = 0.0;
    for z in [1u32, 2, 3] {
        let d = DeltaTriple::zero(z);
        for n in 1..=5u32 {
            for l in 0..n {
                for j in 0..=1u8 {
                    let e = eigen_energy(&Orbital::new(n, l, 0, j, 0, 1.0), z, &d)?;
                    let nn = (n + j as u32) as f64;
                    let want = -(z as f64).powi(2) / (2.0 * nn * nn);
                    worst = worst.max((e - want).abs());
                }
            }
        }
    }
    push(
        10,
        "Bohr limit",
        worst <= 1e-12,
        format!("max |E + Z^2/2(n+J)^2| {worst:.3e}"),
    );
    Ok(out)
}

/// Functional at the printed optima (Tier 2, no minimisation).
pub fn functional_at_paper_points(table: ExchangeTable) -> Result<Vec<Check>> {
    let he = table4_config("1,0,0,0,1;1")?.with_xi(&[2.20144, 1.20162]);
    let w = evaluate_with(&he, FunctionalMode::ImprovedVtheta, table)?.w;
    let mut out = vec![Check {
        id: 9,
        name: "He ground at printed exponents".into(),
        pass: (w + 2.90374994).abs() <= 1e-4,
        detail: format!("{w:.8} vs -2.90374994"),
    }];
    let h = evaluate_single(
        &Orbital::new(1, 0, 0, 0, 0, 1.0),
        1,
        FunctionalMode::ImprovedBare,
    )?;
    out.push(Check {
        id: 9,
        name: "H single-electron functional".into(),
        pass: (h + 0.500007).abs() <= 1e-6,
        detail: format!("{h:.9}"),
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_counts() {
        let refs = bundled_reference();
        let count = |s: &str| row_ids(&refs, s).len();
        assert_eq!(
            [
                count("He:T1"),
                count("H:T2"),
                count("U91+:T3"),
                count("He:T4"),
                count("Li:T5")
            ],
            [13, 9, 9, 41, 60]
        );
        let t6 = ["H:T6", "U91+:T6", "He:T6", "Li:T6"]
            .iter()
            .map(|s| count(s))
            .sum::<usize>();
        assert_eq!(t6, 4);
        assert_eq!(tables_in(&refs), vec![1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn error_rate_forms() {
        let e = error_rate(-2.875821, -2.90375, ErrorForm::Absolute).unwrap();
        assert!((e - 0.96).abs() < 0.005);
        let e = error_rate(0.3750059662, 0.3750047181, ErrorForm::Difference).unwrap();
        assert!(printed_equal(e, "-0.00033"));
        assert!(error_rate(1.0, 0.0, ErrorForm::Absolute).is_err());
    }

    #[test]
    fn parse_errors() {
        assert!(parse_reference("").unwrap().is_empty());
        let bad = "system,row_id,label,energy_au,source\nH:T2,1,\"x\",abc,PAPER\n";
        match parse_reference(bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let dup = "system,row_id,label,energy_au,source\nH:T2,1,x,0,PAPER\nH:T2,1,y,0,PAPER\n";
        assert!(matches!(parse_reference(dup), Err(Error::Duplicate(_))));
    }

    #[test]
    fn labels_to_configurations() {
        let c = table5_config("3,2,1,1,1;1,0").unwrap();
        assert_eq!(c.orbitals[2], Orbital::new(3, 2, 1, 1, 1, 1.0));
        assert_eq!((c.s(0, 1), c.s(0, 2), c.s(1, 2)), (1, 1, 0));
        let c = table1_config("1,0,0,0;1,0,0,0;1").unwrap();
        assert_eq!(c.orbitals[1].p, 1);
    }
}
