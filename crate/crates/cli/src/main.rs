use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use magpot::functional::{effective_rows, evaluate_with, ExchangeTable, FunctionalMode};
use magpot::harness::{
    bundled_reference, error_rate, lamb_report, load_reference, reproduce_table, rows_to_csv,
    tables_in, tier1_checks, Check, ComparisonRow, ErrorForm, StartPoint, TableOptions,
};
use magpot::hydrogenic::{
    defining_residuals, defining_targets, deltas, level_rows, Shape, TABLE_LEVELS,
};
use magpot::integrals::quad::coupling_quadrature;
use magpot::integrals::{coupling_shapes, InteractionTerm};
use magpot::optimizer::{minimize, MinimizeOptions};
use magpot::qed::{qed_energy, qed_level};
use magpot::quantum::{Configuration, Orbital};
use serde::Serialize;

#[derive(Parser)]
#[command(
    name = "magpot",
    version,
    about = "Magnetic-potential hydrogenic levels and few-electron energies"
)]
struct Cli {
    /// RNG seed for optimizer restarts
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// tolerance override for pass/fail columns
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// functional mode: improved-vtheta, improved-bare or schrodinger-bare
    #[arg(long, global = true)]
    mode: Option<FunctionalMode>,
    /// write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// exchange table for three or more electrons: printed or corrected
    #[arg(long, global = true, default_value = "printed")]
    exchange: ExchangeTable,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Cmd {
    /// delta triple of Z and the residuals of its defining identities
    Delta {
        #[arg(long = "Z", alias = "z")]
        z: u32,
    },
    /// eigen exponents and energies of hydrogen-like levels
    Hydrogenic {
        #[arg(long = "Z", alias = "z")]
        z: u32,
        /// `n,l,m,J,P;...` (defaults to the nine table levels)
        #[arg(long)]
        levels: Option<String>,
    },
    /// Dirac, Lamb and magnetic parts of a reference level
    Qed {
        #[arg(long = "Z", alias = "z")]
        z: u32,
        /// `n,l,m,J`
        #[arg(long)]
        level: String,
    },
    /// one coupling integral, analytic and by quadrature
    Integral {
        #[arg(long = "Z", alias = "z")]
        z: u32,
        /// four orbitals `n,l,m,J,P,xi;...`
        #[arg(long)]
        orbitals: String,
        /// 1-based index into the effective interaction rows of --mode
        #[arg(long, conflicts_with = "h")]
        row: Option<usize>,
        /// explicit h1..h12, comma separated
        #[arg(long, allow_hyphen_values = true)]
        h: Option<String>,
        #[arg(long, default_value_t = 1e-8)]
        quad_tol: f64,
    },
    /// functional report for a configuration file
    Energy {
        #[arg(long)]
        config: PathBuf,
    },
    /// minimise the functional over the exponents of a configuration file
    Minimize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 5)]
        restarts: usize,
    },
    /// reproduce one of the six tables
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=6))]
        k: u8,
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// the two Lamb-shift differences
    Lamb {
        #[arg(long = "Z", alias = "z", default_value_t = 1)]
        z: u32,
    },
    /// Tier-1 checks plus every table present in a reference file
    Validate {
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// skip the minimisation tables
        #[arg(long)]
        tier1_only: bool,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// starting exponents: screened, or paper for the printed ones
    #[arg(long, default_value = "screened")]
    start: StartPoint,
    /// comma-separated row ids
    #[arg(long, value_delimiter = ',')]
    rows: Option<Vec<u32>>,
    #[arg(long)]
    threads: Option<usize>,
}

impl RunArgs {
    fn options(&self, cli: &Cli) -> TableOptions {
        let mut o = TableOptions {
            seed: cli.seed,
            restarts: self.restarts,
            table: cli.exchange,
            mode: cli.mode,
            tol: cli.tol,
            start: self.start,
            rows: self.rows.clone(),
            ..TableOptions::default()
        };
        if let Some(t) = self.threads {
            o.threads = t;
        }
        o
    }
}

type Res<T> = Result<T, Box<dyn std::error::Error>>;

struct Output {
    sink: Box<dyn Write>,
    format: Format,
}

impl Output {
    fn open(cli: &Cli) -> Res<Output> {
        let sink: Box<dyn Write> = match &cli.out {
            Some(p) => Box::new(fs::File::create(p)?),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Output {
            sink,
            format: cli.format,
        })
    }

    fn records<T: Serialize>(&mut self, rows: &[T]) -> Res<()> {
        match self.format {
            Format::Json => {
                for r in rows {
                    writeln!(self.sink, "{}", serde_json::to_string(r)?)?;
                }
            }
            Format::Csv => {
                let mut w = csv::Writer::from_writer(&mut self.sink);
                for r in rows {
                    w.serialize(r)?;
                }
                w.flush()?;
            }
        }
        Ok(())
    }

    fn comparison(&mut self, rows: &[ComparisonRow]) -> Res<()> {
        match self.format {
            Format::Csv => Ok(self.sink.write_all(rows_to_csv(rows)?.as_bytes())?),
            Format::Json => self.records(rows),
        }
    }
}

fn parse_ints(s: &str) -> Res<Vec<i64>> {
    Ok(s.split(',')
        .map(|t| t.trim().parse::<i64>())
        .collect::<Result<_, _>>()?)
}

fn parse_orbital(s: &str, with_xi: bool) -> Res<Orbital> {
    let f: Vec<&str> = s.split(',').map(str::trim).collect();
    let want = if with_xi { 6 } else { 5 };
    if f.len() != want {
        return Err(format!("orbital {s:?}: expected {want} comma-separated fields").into());
    }
    let q = parse_ints(&f[..5].join(","))?;
    if q[0] < 1 || q[1] < 0 || !(0..=1).contains(&q[3]) || q[4] < 0 {
        return Err(format!("orbital {s:?}: quantum number out of range").into());
    }
    let xi = if with_xi { f[5].parse()? } else { 1.0 };
    Ok(Orbital::new(
        q[0] as u32,
        q[1] as u32,
        q[2] as i32,
        q[3] as u8,
        q[4] as u8,
        xi,
    ))
}

fn read_config(p: &PathBuf) -> Res<Configuration> {
    Ok(Configuration::parse(&fs::read_to_string(p)?)?)
}

#[derive(Serialize)]
struct DeltaRow {
    z: u32,
    kdot: u32,
    delta1: f64,
    delta2: f64,
    delta3: f64,
    residual1: f64,
    residual2: f64,
    residual3: f64,
    max_rel_residual: f64,
}

#[derive(Serialize)]
struct LevelOut {
    id: usize,
    label: String,
    xi: f64,
    energy: f64,
    delta_e: f64,
    qed_delta_e: Option<f64>,
    epsilon: Option<f64>,
}

#[derive(Serialize)]
struct IntegralOut {
    analytic: f64,
    quadrature_fallback: bool,
    oracle: f64,
    rel_diff: f64,
}

#[derive(Serialize)]
struct LambOut {
    z: u32,
    which: &'static str,
    computed: f64,
    reference: Option<f64>,
    abs_diff: Option<f64>,
}

#[derive(Serialize)]
struct MinimizeRow {
    xi1: Option<f64>,
    xi2: Option<f64>,
    xi3: Option<f64>,
    energy: f64,
    converged: bool,
    evals: usize,
}

fn checks_out(out: &mut Output, checks: &[Check]) -> Res<bool> {
    out.records(checks)?;
    for c in checks {
        eprintln!(
            "{} [{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    Ok(checks.iter().all(|c| c.pass))
}

fn tier1_rows_pass(rows: &[ComparisonRow]) -> bool {
    rows.iter().filter(|r| r.tier == 1).all(|r| !r.failed())
}

fn run(cli: &Cli) -> Res<bool> {
    let mode = cli.mode.unwrap_or(FunctionalMode::ImprovedVtheta);
    let mut out = Output::open(cli)?;
    match &cli.cmd {
        Cmd::Delta { z } => {
            let d = deltas(*z)?;
            let r = defining_residuals(*z, &d)?;
            let t = defining_targets(*z);
            let max_rel = r
                .iter()
                .zip(t)
                .map(|(r, t)| (r / t).abs())
                .fold(0.0, f64::max);
            out.records(&[DeltaRow {
                z: *z,
                kdot: d.kdot,
                delta1: d.d1,
                delta2: d.d2,
                delta3: d.d3,
                residual1: r[0],
                residual2: r[1],
                residual3: r[2],
                max_rel_residual: max_rel,
            }])?;
            Ok(max_rel <= cli.tol.unwrap_or(1e-9))
        }
        Cmd::Hydrogenic { z, levels } => {
            let lv: Vec<Orbital> = match levels {
                Some(s) => s
                    .split(';')
                    .map(|o| parse_orbital(o, false))
                    .collect::<Res<_>>()?,
                None => TABLE_LEVELS.to_vec(),
            };
            let q0 = qed_energy(1, 0, 0, 0, *z)?;
            let rows = level_rows(*z, &lv)?;
            let rows: Vec<LevelOut> = rows
                .into_iter()
                .zip(&lv)
                .map(|(r, o)| {
                    let q = qed_energy(o.n, o.l, o.m, o.j, *z).ok().map(|e| e - q0);
                    let eps = q.and_then(|q| error_rate(r.delta_e, q, ErrorForm::Difference).ok());
                    LevelOut {
                        id: r.id,
                        label: r.label,
                        xi: r.xi,
                        energy: r.energy,
                        delta_e: r.delta_e,
                        qed_delta_e: q,
                        epsilon: eps,
                    }
                })
                .collect();
            out.records(&rows)?;
            Ok(true)
        }
        Cmd::Qed { z, level } => {
            let q = parse_ints(level)?;
            if q.len() != 4 || q[0] < 1 || q[1] < 0 || !(0..=1).contains(&q[3]) {
                return Err(format!("level {level:?}: expected n,l,m,J").into());
            }
            out.records(&[qed_level(
                q[0] as u32,
                q[1] as u32,
                q[2] as i32,
                q[3] as u8,
                *z,
            )?])?;
            Ok(true)
        }
        Cmd::Integral {
            z,
            orbitals,
            row,
            h,
            quad_tol,
        } => {
            let os: Vec<Orbital> = orbitals
                .split(';')
                .map(|o| parse_orbital(o, true))
                .collect::<Res<_>>()?;
            if os.len() != 4 {
                return Err("integral needs four orbitals".into());
            }
            let term = match (row, h) {
                (_, Some(h)) => {
                    let v: Vec<f64> = h
                        .split(',')
                        .map(|t| t.trim().parse::<f64>())
                        .collect::<Result<_, _>>()?;
                    let arr: [f64; 12] = v.try_into().map_err(|_| "h needs 12 values")?;
                    InteractionTerm::new(arr)
                }
                (Some(k), None) => {
                    let rows = effective_rows(mode);
                    *rows
                        .get(k.wrapping_sub(1))
                        .ok_or(format!("row {k} out of 1..={}", rows.len()))?
                }
                (None, None) => InteractionTerm::coulomb(1.0),
            };
            term.validate()?;
            let d = mode.deltas(*z)?;
            let s: Vec<Shape> = os
                .iter()
                .map(|o| Shape::new(o, &d))
                .collect::<Result<_, _>>()?;
            let a = coupling_shapes(&s[0], &s[1], &s[2], &s[3], &term)?;
            let q = coupling_quadrature(&s[0], &s[1], &s[2], &s[3], &term, *quad_tol)?;
            let rel = (a.value - q).abs() / q.abs().max(1e-300);
            out.records(&[IntegralOut {
                analytic: a.value,
                quadrature_fallback: a.quadrature,
                oracle: q,
                rel_diff: rel,
            }])?;
            Ok(true)
        }
        Cmd::Energy { config } => {
            let c = read_config(config)?;
            let r = evaluate_with(&c, mode, cli.exchange)?;
            writeln!(out.sink, "{}", serde_json::to_string(&r)?)?;
            Ok(true)
        }
        Cmd::Minimize { config, restarts } => {
            let c = read_config(config)?;
            let opts = MinimizeOptions {
                mode,
                table: cli.exchange,
                restarts: *restarts,
                seed: cli.seed,
                ..MinimizeOptions::default()
            };
            let r = minimize(&c, &opts)?;
            match cli.format {
                Format::Json => writeln!(out.sink, "{}", serde_json::to_string(&r)?)?,
                Format::Csv => out.records(&[MinimizeRow {
                    xi1: r.xi_star.first().copied(),
                    xi2: r.xi_star.get(1).copied(),
                    xi3: r.xi_star.get(2).copied(),
                    energy: r.energy,
                    converged: r.converged,
                    evals: r.evals,
                }])?,
            }
            Ok(true)
        }
        Cmd::Table { k, reference, run } => {
            let refs = match reference {
                Some(p) => load_reference(p)?,
                None => bundled_reference(),
            };
            let rows = reproduce_table(*k, &refs, &run.options(cli))?;
            out.comparison(&rows)?;
            Ok(tier1_rows_pass(&rows))
        }
        Cmd::Lamb { z } => {
            let l = lamb_report(*z)?;
            let rows: Vec<LambOut> = [("dE2-dE1", l.first), ("dE5-dE3", l.second)]
                .into_iter()
                .enumerate()
                .map(|(i, (which, v))| {
                    let reference = l.reference.map(|r| r[i]);
                    LambOut {
                        z: *z,
                        which,
                        computed: v,
                        reference,
                        abs_diff: reference.map(|r| (v - r).abs()),
                    }
                })
                .collect();
            out.records(&rows)?;
            Ok(true)
        }
        Cmd::Validate {
            reference,
            tier1_only,
            run,
        } => {
            let mut ok = checks_out(&mut out, &tier1_checks(&bundled_reference())?)?;
            if let Some(p) = reference {
                let refs = load_reference(p)?;
                let opts = run.options(cli);
                for k in tables_in(&refs) {
                    if *tier1_only && ![2, 3, 6].contains(&k) {
                        continue;
                    }
                    let rows = reproduce_table(k, &refs, &opts)?;
                    out.comparison(&rows)?;
                    let pass = tier1_rows_pass(&rows);
                    let failed = rows.iter().filter(|r| r.failed()).count();
                    eprintln!(
                        "table {k}: {} rows, {failed} outside tolerance, tier-1 {}",
                        rows.len(),
                        if pass { "ok" } else { "FAILED" }
                    );
                    ok &= pass;
                }
            }
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
