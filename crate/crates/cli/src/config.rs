//! Plain-text `key = value` run configuration.
//!
//! Every key is checked before anything is allocated, and all problems are
//! reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nonlocal_plap::diagnostics::AuditOptions;
use nonlocal_plap::evolve::StepperConfig;
use nonlocal_plap::grid::{Ball, BoxDomain, Grid, ProblemSpec};
use nonlocal_plap::kernel::Kernel;
use nonlocal_plap::presets::Datum;
use nonlocal_plap::trajectory::{log_schedule, uniform_schedule, Scheme};

/// Largest grid accepted from a config file.
pub const MAX_GRID_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<String>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub name: String,
    pub spec: ProblemSpec,
    pub kernel: Kernel,
    pub p: f64,
    pub grid: Grid,
    pub datum: Datum,
    pub final_time: f64,
    pub stepper: StepperConfig,
    /// Number of seeded random test functions for the per-step EVI residual.
    pub evi_probes: usize,
    /// `None` when auditing is switched off.
    pub audit: Option<AuditOptions>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Reads and validates a config file. The run name is the file stem.
pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigErrors> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigErrors(vec![format!("{}: {e}", path.display())]))?;
    let name = path.file_stem().map_or_else(|| "run".to_string(), |s| s.to_string_lossy().into_owned());
    parse_config_str(&text, &name)
}

struct Entry {
    line: usize,
    value: String,
    used: bool,
}

struct Fields {
    entries: BTreeMap<String, Entry>,
    errors: Vec<String>,
}

impl Fields {
    fn parse(text: &str) -> Self {
        let mut entries: BTreeMap<String, Entry> = BTreeMap::new();
        let mut errors = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let Some((key, value)) = body.split_once('=') else {
                errors.push(format!("line {line}: expected key = value, got '{body}'"));
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                errors.push(format!("line {line}: empty key"));
                continue;
            }
            if let Some(prev) = entries.get(key) {
                errors.push(format!("line {line}: duplicate key '{key}' (first set on line {})", prev.line));
                continue;
            }
            entries.insert(key.to_string(), Entry { line, value: value.to_string(), used: false });
        }
        Self { entries, errors }
    }

    fn raw(&mut self, key: &str) -> Option<(usize, String)> {
        self.entries.get_mut(key).map(|e| {
            e.used = true;
            (e.line, e.value.clone())
        })
    }

    fn error(&mut self, msg: String) {
        self.errors.push(msg);
    }

    fn string(&mut self, key: &str) -> Option<String> {
        let v = self.raw(key).map(|(_, v)| v);
        if v.is_none() {
            self.error(format!("missing required key '{key}'"));
        }
        v
    }

    fn parsed<T: std::str::FromStr>(&mut self, key: &str, what: &str) -> Option<Option<T>> {
        let (line, v) = self.raw(key)?;
        match v.parse::<T>() {
            Ok(x) => Some(Some(x)),
            Err(_) => {
                self.error(format!("line {line}: {key} = '{v}' is not {what}"));
                Some(None)
            }
        }
    }

    /// A number satisfying `ok`; `default` when absent (required if `None`).
    /// Returns `None` after recording an error.
    fn number(&mut self, key: &str, default: Option<f64>, ok: impl Fn(f64) -> bool, rule: &str) -> Option<f64> {
        match self.parsed::<f64>(key, "a number") {
            None => {
                if default.is_none() {
                    self.error(format!("missing required key '{key}'"));
                }
                default
            }
            Some(None) => None,
            Some(Some(x)) if x.is_finite() && ok(x) => Some(x),
            Some(Some(x)) => {
                let line = self.entries[key].line;
                self.error(format!("line {line}: {key} = {x} is out of range ({rule})"));
                None
            }
        }
    }

    fn count(&mut self, key: &str, default: usize, ok: impl Fn(usize) -> bool, rule: &str) -> Option<usize> {
        match self.parsed::<usize>(key, "a nonnegative integer") {
            None => Some(default),
            Some(None) => None,
            Some(Some(n)) if ok(n) => Some(n),
            Some(Some(n)) => {
                let line = self.entries[key].line;
                self.error(format!("line {line}: {key} = {n} is out of range ({rule})"));
                None
            }
        }
    }

    fn numbers(&mut self, key: &str) -> Option<Vec<f64>> {
        let (line, v) = self.raw(key)?;
        let parsed: Result<Vec<f64>, _> = v.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match parsed {
            Ok(xs) if !xs.is_empty() && xs.iter().all(|x| x.is_finite() && *x > 0.0) => Some(xs),
            _ => {
                self.error(format!("line {line}: {key} = '{v}' is not a comma-separated list of positive numbers"));
                None
            }
        }
    }

    fn flag(&mut self, key: &str, default: bool) -> bool {
        match self.raw(key) {
            None => default,
            Some((_, v)) if v == "true" => true,
            Some((_, v)) if v == "false" => false,
            Some((line, v)) => {
                self.error(format!("line {line}: {key} = '{v}' is not true or false"));
                default
            }
        }
    }

    fn finish(mut self) -> Vec<String> {
        let unused: Vec<String> = self
            .entries
            .iter()
            .filter(|(_, e)| !e.used)
            .map(|(k, e)| format!("line {}: unknown key '{k}'", e.line))
            .collect();
        self.errors.extend(unused);
        self.errors.sort_by_key(|e| line_of(e));
        self.errors
    }
}

fn line_of(msg: &str) -> usize {
    msg.strip_prefix("line ")
        .and_then(|s| s.split(':').next())
        .and_then(|n| n.parse().ok())
        .unwrap_or(0)
}

fn positive(x: f64) -> bool {
    x > 0.0
}

const EXPLICIT_P_REASON: &str = "the explicit scheme needs p >= 2: for p < 2 the flux |s|^(p-2) s is not \
     Lipschitz at s = 0, so no stable step exists; use stepper.scheme = proximal";

pub fn parse_config_str(text: &str, name: &str) -> Result<RunConfig, ConfigErrors> {
    let mut f = Fields::parse(text);

    let p = f.number("p", None, |p| p > 1.0, "p > 1");

    let dim = f.count("grid.dimension", 1, |d| d == 1 || d == 2, "1 or 2");
    let half_width = f.number("grid.half_width", None, positive, "must be positive");
    let h = f.number("grid.h", None, positive, "must be positive");
    let grid = match (dim, half_width, h) {
        (Some(d), Some(l), Some(h)) => {
            let per_axis = (2.0 * l / h).round() + 1.0;
            if h > l {
                f.error(format!("grid.h = {h} exceeds grid.half_width = {l}"));
                None
            } else if per_axis.powi(d as i32) > MAX_GRID_POINTS as f64 {
                f.error(format!("grid of {per_axis}^{d} points exceeds the limit of {MAX_GRID_POINTS}"));
                None
            } else {
                Grid::new(d, l, h).map_err(|e| f.error(format!("grid: {e}"))).ok()
            }
        }
        _ => None,
    };

    let spec = match f.string("problem").as_deref() {
        Some("cauchy") => {
            f.count("padding_layers", 2, |_| true, "").map(ProblemSpec::cauchy)
        }
        Some(kind @ ("dirichlet" | "neumann")) => {
            let lo = f.number("domain.min", None, |_| true, "");
            let hi = f.number("domain.max", None, |_| true, "");
            match (lo, hi) {
                (Some(lo), Some(hi)) => match BoxDomain::new(lo, hi) {
                    Ok(d) => {
                        if let Some(g) = grid {
                            if lo < -g.half_width() || hi > g.half_width() {
                                f.error(format!(
                                    "domain [{lo}, {hi}] does not fit inside the grid [-{0}, {0}]",
                                    g.half_width()
                                ));
                            }
                        }
                        Some(if kind == "dirichlet" { ProblemSpec::dirichlet(d) } else { ProblemSpec::neumann(d) })
                    }
                    Err(e) => {
                        f.error(format!("domain: {e}"));
                        None
                    }
                },
                _ => None,
            }
        }
        Some(other) => {
            f.error(format!("problem = '{other}' is not cauchy, dirichlet or neumann"));
            None
        }
        None => None,
    };

    let kernel = {
        let family = f.string("kernel.family");
        let radius = f.number("kernel.radius", None, positive, "must be positive");
        let exponent = match family.as_deref() {
            Some("power" | "bump") => f.number("kernel.exponent", Some(2.0), |a| a >= 0.0, "must be nonnegative"),
            _ => Some(0.0),
        };
        match (family, radius, exponent, dim) {
            (Some(fam), Some(r), Some(a), Some(d)) => match Kernel::from_family(&fam, r, a, d) {
                Ok(k) => Some(k),
                Err(e) => {
                    f.error(format!("kernel: {e}"));
                    None
                }
            },
            _ => None,
        }
    };
    if let (Some(k), Some(g)) = (kernel, grid) {
        if k.radius() < g.h() {
            f.error(format!("kernel.radius = {} is below the grid step {}", k.radius(), g.h()));
        }
    }

    let seed = f.parsed::<u64>("seed", "a nonnegative integer").unwrap_or(Some(0));
    let datum = parse_datum(&mut f, seed.unwrap_or(0));

    let final_time = f.number("time.final", None, positive, "must be positive");
    let n_snap = f.count("time.snapshots", 11, |n| n >= 1, "at least 1");
    let snapshots = match f.raw("time.schedule") {
        None => Some(Schedule::Uniform),
        Some((_, v)) if v == "uniform" => Some(Schedule::Uniform),
        Some((_, v)) if v == "log" => Some(Schedule::Log),
        Some((line, v)) => {
            f.error(format!("line {line}: time.schedule = '{v}' is not uniform or log"));
            None
        }
    };
    let first = match snapshots {
        Some(Schedule::Log) => {
            let def = final_time.map(|t| t / 1000.0);
            f.number("time.first", def.or(Some(1.0)), positive, "must be positive")
        }
        _ => Some(0.0),
    };
    let times = match (snapshots, final_time, n_snap, first) {
        (Some(Schedule::Uniform), Some(t), Some(n), _) => Some(uniform_schedule(0.0, t, n)),
        (Some(Schedule::Log), Some(t), Some(n), Some(t0)) if t0 < t => Some(log_schedule(t0, t, n)),
        (Some(Schedule::Log), Some(t), Some(_), Some(t0)) => {
            f.error(format!("time.first = {t0} must be below time.final = {t}"));
            None
        }
        _ => None,
    };

    let scheme = match f.raw("stepper.scheme") {
        None => Some(Scheme::Proximal),
        Some((line, v)) => match Scheme::parse(&v) {
            Some(s) => Some(s),
            None => {
                f.error(format!("line {line}: stepper.scheme = '{v}' is not explicit or proximal"));
                None
            }
        },
    };
    if let (Some(Scheme::Explicit), Some(p)) = (scheme, p) {
        if p < 2.0 {
            f.error(format!("p = {p} with stepper.scheme = explicit: {EXPLICIT_P_REASON}"));
        }
    }
    let dt_max = f.number("stepper.dt_max", None, positive, "must be positive");
    let theta = f.number("stepper.cfl_theta", Some(0.5), |t| t > 0.0 && t <= 1.0, "0 < theta <= 1");
    let prox_tol = f.number("stepper.prox_tol", Some(1e-10), positive, "must be positive");
    let prox_iters = f.count("stepper.prox_max_iters", 10_000, |n| n >= 1, "at least 1");
    let evi_probes = f.count("stepper.evi_probes", 0, |_| true, "");
    if evi_probes.is_some_and(|n| n > 0) && scheme == Some(Scheme::Explicit) {
        f.error("stepper.evi_probes needs stepper.scheme = proximal".to_string());
    }

    let audit = parse_audit(&mut f, final_time);

    let output_dir = f
        .raw("output.dir")
        .map_or_else(|| Path::new("output").join(name), |(_, v)| PathBuf::from(v));

    let errors = f.finish();
    if !errors.is_empty() {
        return Err(ConfigErrors(errors));
    }
    // every field is present once no error was recorded
    let (Some(spec), Some(kernel), Some(p), Some(grid), Some(datum), Some(final_time), Some(times)) =
        (spec, kernel, p, grid, datum, final_time, times)
    else {
        return Err(ConfigErrors(vec!["incomplete configuration".into()]));
    };
    let stepper = StepperConfig {
        scheme: scheme.unwrap_or(Scheme::Proximal),
        cfl_theta: theta.unwrap_or(0.5),
        dt_max: dt_max.unwrap_or(f64::NAN),
        prox_tol: prox_tol.unwrap_or(1e-10),
        prox_max_iters: prox_iters.unwrap_or(10_000),
        ..StepperConfig::proximal(1.0)
    }
    .with_snapshots(times);
    Ok(RunConfig {
        name: name.to_string(),
        spec,
        kernel,
        p,
        grid,
        datum,
        final_time,
        stepper,
        evi_probes: evi_probes.unwrap_or(0),
        audit: audit.flatten(),
        output_dir,
        seed: seed.unwrap_or(0),
    })
}

#[derive(Clone, Copy)]
enum Schedule {
    Uniform,
    Log,
}

fn parse_datum(f: &mut Fields, seed: u64) -> Option<Datum> {
    let family = f.string("datum")?;
    let any = |_: f64| true;
    let datum = match family.as_str() {
        "zero" => Datum::Zero,
        "figure" => Datum::Figure,
        "constant" => Datum::Constant { value: f.number("datum.value", None, any, "")? },
        "indicator" => {
            let lower = f.number("datum.lower", None, any, "");
            let upper = f.number("datum.upper", None, any, "");
            let height = f.number("datum.height", Some(1.0), any, "");
            let (lower, upper, height) = (lower?, upper?, height?);
            if lower >= upper {
                f.error(format!("datum.lower = {lower} must be below datum.upper = {upper}"));
                return None;
            }
            Datum::Indicator { lower, upper, height }
        }
        "spike" => {
            let center = f.number("datum.center", Some(0.0), any, "");
            let mass = f.number("datum.mass", Some(1.0), any, "");
            Datum::Spike { center: center?, mass: mass? }
        }
        "bump" => {
            let center = f.number("datum.center", Some(0.0), any, "");
            let radius = f.number("datum.radius", None, positive, "must be positive");
            let height = f.number("datum.height", Some(1.0), any, "");
            Datum::Bump { center: center?, radius: radius?, height: height? }
        }
        "cosine" => {
            let amplitude = f.number("datum.amplitude", Some(1.0), any, "");
            let frequency = f.number("datum.frequency", None, any, "");
            Datum::Cosine { amplitude: amplitude?, frequency: frequency? }
        }
        "random" => {
            let own = f.parsed::<u64>("datum.seed", "a nonnegative integer");
            let lower = f.number("datum.lower", Some(0.0), any, "");
            let upper = f.number("datum.upper", Some(1.0), any, "");
            let support = f.number("datum.support", None, positive, "must be positive");
            let seed = match own {
                None => seed,
                Some(s) => s?,
            };
            let (lower, upper, support) = (lower?, upper?, support?);
            if lower > upper {
                f.error(format!("datum.lower = {lower} must not exceed datum.upper = {upper}"));
                return None;
            }
            Datum::Random { seed, lower, upper, support }
        }
        other => {
            f.error(format!("datum = '{other}' is not one of {}", Datum::FAMILIES.join(", ")));
            return None;
        }
    };
    Some(datum)
}

/// `Some(None)` when auditing is disabled, `None` after an error.
fn parse_audit(f: &mut Fields, final_time: Option<f64>) -> Option<Option<AuditOptions>> {
    if !f.flag("diagnostics.enabled", true) {
        return Some(None);
    }
    let mut opts = AuditOptions::default();
    let mut ok = true;
    match f.number("diagnostics.q", Some(opts.q), |q| q >= 1.0, "q >= 1") {
        Some(q) => opts.q = q,
        None => ok = false,
    }
    match f.number("diagnostics.decay_slack", Some(opts.decay_slack), |s| s >= 0.0, "must be nonnegative") {
        Some(s) => opts.decay_slack = s,
        None => ok = false,
    }
    let start = f.parsed::<f64>("diagnostics.decay_start", "a number");
    let end = f.parsed::<f64>("diagnostics.decay_end", "a number");
    match (start, end) {
        (None, None) => {}
        (Some(Some(a)), Some(Some(b))) if a > 0.0 && a < b && final_time.is_none_or(|t| b <= t) => {
            opts.decay_window = Some((a, b));
        }
        (Some(Some(a)), Some(Some(b))) => {
            f.error(format!("decay window [{a}, {b}] must satisfy 0 < start < end <= time.final"));
            ok = false;
        }
        (Some(None), _) | (_, Some(None)) => ok = false,
        _ => {
            f.error("diagnostics.decay_start and diagnostics.decay_end must be given together".into());
            ok = false;
        }
    }
    let center = f.parsed::<f64>("diagnostics.modulus_center", "a number");
    let radius = f.parsed::<f64>("diagnostics.modulus_radius", "a number");
    match (center, radius) {
        (None, None) => {}
        (Some(Some(c)), Some(Some(r))) if r > 0.0 && c.is_finite() => {
            opts.modulus_region = Some(Ball { center: [c, c], radius: r });
        }
        (Some(Some(_)), Some(Some(r))) => {
            f.error(format!("diagnostics.modulus_radius = {r} must be positive"));
            ok = false;
        }
        (Some(None), _) | (_, Some(None)) => ok = false,
        _ => {
            f.error("diagnostics.modulus_center and diagnostics.modulus_radius must be given together".into());
            ok = false;
        }
    }
    if f.entries.contains_key("diagnostics.modulus_radii") {
        match f.numbers("diagnostics.modulus_radii") {
            Some(r) => opts.modulus_radii = r,
            None => ok = false,
        }
    }
    match f.parsed::<f64>("diagnostics.holder_probe", "a number") {
        None => {}
        Some(Some(x)) if x.is_finite() => opts.holder_probe = Some([x, x]),
        _ => ok = false,
    }
    ok.then_some(Some(opts))
}
