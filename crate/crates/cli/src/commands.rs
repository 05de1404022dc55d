//! The four subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use nonlocal_plap::diagnostics::{audit_trajectory, DiagnosticsReport};
use nonlocal_plap::evolve::evolve;
use nonlocal_plap::io::write_trajectory;
use nonlocal_plap::presets::{figure_one, figure_two, Datum, Experiment};
use nonlocal_plap::trajectory::Trajectory;
use nonlocal_plap::verify::{run_suite, Suite};

use crate::config::{parse_config, RunConfig};

/// Environment variable holding the sweep worker count.
pub const WORKERS_ENV: &str = "PLAP_WORKERS";

const PLOT_TEMPLATE: &str = include_str!("../../../docs/plot.gp");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error in {path}:\n{errors}")]
    Config { path: String, errors: String },
    #[error("{0}")]
    Usage(String),
    #[error("{run}: failed checks: {}", checks.join(", "))]
    Audit { run: String, checks: Vec<String> },
    #[error("{0} of {1} runs failed")]
    Sweep(usize, usize),
    #[error(transparent)]
    Core(#[from] nonlocal_plap::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

pub struct RunOutcome {
    pub name: String,
    pub report: Option<DiagnosticsReport>,
    pub dir: PathBuf,
}

impl RunOutcome {
    fn failures(&self) -> Vec<String> {
        self.report.as_ref().map_or_else(Vec::new, |r| r.failures().iter().map(|c| c.name.clone()).collect())
    }

    fn into_result(self) -> Result<Self, CliError> {
        let checks = self.failures();
        if checks.is_empty() {
            Ok(self)
        } else {
            Err(CliError::Audit { run: self.name, checks })
        }
    }
}

fn load(path: &Path) -> Result<RunConfig, CliError> {
    parse_config(path).map_err(|e| CliError::Config { path: path.display().to_string(), errors: e.to_string() })
}

fn header(cfg: &RunConfig, traj: &Trajectory) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "run: {}", cfg.name);
    let _ = writeln!(out, "problem: {}  p = {}  kernel: {} R = {}", cfg.spec.name(), cfg.p, cfg.kernel.profile().family(), cfg.kernel.radius());
    let g = cfg.grid;
    let _ = writeln!(out, "grid: dimension {}  half width {}  h = {}", g.dim(), g.half_width(), g.h());
    let _ = writeln!(out, "datum: {}  seed: {}", cfg.datum.family(), cfg.seed);
    let _ = writeln!(
        out,
        "scheme: {}  steps: {}  largest dt: {:e}  final time: {}",
        traj.scheme.name(),
        traj.accepted_steps(),
        traj.max_dt(),
        traj.final_time
    );
    for w in &traj.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

/// Executes one validated configuration and writes its output directory.
pub fn execute(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let u0 = cfg.datum.sample(cfg.grid)?;
    let mut stepper = cfg.stepper.clone();
    stepper.evi_probes = (0..cfg.evi_probes)
        .map(|k| {
            let probe = Datum::Random { seed: cfg.seed.wrapping_add(1 + k as u64), lower: -1.0, upper: 1.0, support: cfg.grid.half_width() };
            probe.sample(cfg.grid).map(|f| f.masked(&cfg.spec))
        })
        .collect::<Result<_, _>>()?;
    let traj = evolve(&u0, &cfg.spec, &cfg.kernel, cfg.p, cfg.final_time, &stepper)?;
    write_trajectory(&cfg.output_dir, &traj, cfg.stepper.dt_max)?;

    let mut summary = header(cfg, &traj);
    let report = cfg.audit.as_ref().map(|opts| {
        let mut r = audit_trajectory(&traj, opts);
        r.seed = Some(cfg.seed);
        r
    });
    match &report {
        Some(r) => {
            fs::write(cfg.output_dir.join("report.csv"), r.to_csv())?;
            summary.push_str(&r.summary());
        }
        None => summary.push_str("diagnostics disabled\n"),
    }
    fs::write(cfg.output_dir.join("summary.txt"), &summary)?;
    Ok(RunOutcome { name: cfg.name.clone(), report, dir: cfg.output_dir.clone() })
}

pub fn run(config: &Path) -> Result<(), CliError> {
    let cfg = load(config)?;
    let outcome = execute(&cfg)?;
    print!("{}", fs::read_to_string(outcome.dir.join("summary.txt"))?);
    println!("output written to {}", outcome.dir.display());
    outcome.into_result().map(|_| ())
}

fn worker_count() -> Result<usize, CliError> {
    match std::env::var(WORKERS_ENV) {
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Usage(format!("{WORKERS_ENV} = '{v}' is not a positive integer"))),
        },
    }
}

pub fn sweep(pattern: &str) -> Result<(), CliError> {
    let paths: Vec<PathBuf> = glob::glob(pattern)
        .map_err(|e| CliError::Usage(format!("bad pattern '{pattern}': {e}")))?
        .filter_map(|p| p.ok())
        .collect();
    if paths.is_empty() {
        return Err(CliError::Usage(format!("no config files match '{pattern}'")));
    }
    // validate everything before running anything
    let mut configs = Vec::new();
    let mut problems = Vec::new();
    for path in &paths {
        match parse_config(path) {
            Ok(c) => configs.push(c),
            Err(e) => problems.push(format!("{}:\n{e}", path.display())),
        }
    }
    for (k, a) in configs.iter().enumerate() {
        if let Some(b) = configs[..k].iter().find(|b| b.output_dir == a.output_dir) {
            problems.push(format!("{} and {} share output directory {}", b.name, a.name, a.output_dir.display()));
        }
    }
    if !problems.is_empty() {
        return Err(CliError::Config { path: pattern.to_string(), errors: problems.join("\n") });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count()?)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<RunOutcome, CliError>> = pool.install(|| configs.par_iter().map(execute).collect());

    let mut failed = 0;
    for (cfg, r) in configs.iter().zip(results) {
        match r.and_then(RunOutcome::into_result) {
            Ok(o) => println!("PASS {}  ({})", o.name, o.dir.display()),
            Err(e) => {
                failed += 1;
                println!("FAIL {}  {e}", cfg.name);
            }
        }
    }
    if failed > 0 {
        Err(CliError::Sweep(failed, configs.len()))
    } else {
        Ok(())
    }
}

pub fn verify(suite: &str, seed: u64, out: Option<&Path>) -> Result<(), CliError> {
    let suite = Suite::parse(suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_suite(suite, seed)?;
    let csv = report.to_csv();
    match out {
        Some(path) => fs::write(path, &csv)?,
        None => print!("{csv}"),
    }
    eprint!("{}", report.summary());
    let checks: Vec<String> = report.failures().iter().map(|c| c.name.clone()).collect();
    if checks.is_empty() {
        Ok(())
    } else {
        Err(CliError::Audit { run: "verify".into(), checks })
    }
}

fn run_experiment(e: &Experiment, dir: &Path) -> Result<RunOutcome, CliError> {
    let cfg = RunConfig {
        name: e.name.clone(),
        spec: e.spec,
        kernel: e.kernel,
        p: e.p,
        grid: e.grid,
        datum: e.datum.clone(),
        final_time: e.final_time,
        stepper: e.stepper.clone(),
        evi_probes: 0,
        audit: Some(e.audit.clone()),
        output_dir: dir.join(&e.name),
        seed: 0,
    };
    execute(&cfg)
}

pub fn figures(out: &Path) -> Result<(), CliError> {
    let mut checks = Vec::new();
    for e in [figure_one()?, figure_two()?] {
        let outcome = run_experiment(&e, out)?;
        println!("{}: {}", e.name, if outcome.failures().is_empty() { "PASS" } else { "FAIL" });
        checks.extend(outcome.failures().into_iter().map(|c| format!("{}/{c}", e.name)));
    }
    fs::write(out.join("plot.gp"), PLOT_TEMPLATE)?;
    println!("output written to {}; plot with: gnuplot -c {}/plot.gp {}/figure1", out.display(), out.display(), out.display());
    if checks.is_empty() {
        Ok(())
    } else {
        Err(CliError::Audit { run: "figures".into(), checks })
    }
}
