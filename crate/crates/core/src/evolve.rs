//! Time integration: forward Euler with a stability-derived step, and the
//! implicit proximal step (one minimizing-movement step of the energy).

use crate::error::{invalid, Error, Result};
use crate::grid::{ordered_sum, GridFunction, ProblemSpec, Variant};
use crate::kernel::{discrete_weights, kappa_from_stencil, Kernel, WeightStencil};
use crate::operator::PLaplacian;
use crate::trajectory::{
    Applicability, RunAudit, Scheme, SeriesRow, Snapshot, StepRecord, Trajectory,
};

const ARMIJO_C: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone)]
pub struct StepperConfig {
    pub scheme: Scheme,
    /// Fraction of the stability limit used by explicit steps.
    pub cfl_theta: f64,
    /// Cap on explicit steps; the fixed step of the proximal scheme.
    pub dt_max: f64,
    /// Stop when the L²_h norm of the proximal objective gradient is below this.
    pub prox_tol: f64,
    pub prox_max_iters: usize,
    pub snapshot_times: Vec<f64>,
    /// Comparison functions for the per-step variational inequality check
    /// (proximal scheme only). Empty: no check.
    pub evi_probes: Vec<GridFunction>,
    /// Time and step index of the initial state, for resumed runs.
    pub start_time: f64,
    pub start_step: usize,
}

impl StepperConfig {
    pub fn explicit(dt_max: f64) -> Self {
        Self {
            scheme: Scheme::Explicit,
            cfl_theta: 0.5,
            dt_max,
            prox_tol: 1e-10,
            prox_max_iters: 10_000,
            snapshot_times: Vec::new(),
            evi_probes: Vec::new(),
            start_time: 0.0,
            start_step: 0,
        }
    }

    pub fn proximal(dt: f64) -> Self {
        Self { scheme: Scheme::Proximal, ..Self::explicit(dt) }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    pub fn validate(&self, p: f64) -> Result<()> {
        if !(self.cfl_theta > 0.0 && self.cfl_theta <= 1.0) {
            return Err(invalid(format!("cfl_theta must lie in (0, 1], got {}", self.cfl_theta)));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(invalid(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !(self.prox_tol > 0.0) {
            return Err(invalid(format!("prox_tol must be positive, got {}", self.prox_tol)));
        }
        if self.prox_max_iters == 0 {
            return Err(invalid("prox_max_iters must be at least 1"));
        }
        if self.scheme == Scheme::Explicit && p < 2.0 {
            return Err(invalid(format!(
                "explicit scheme requires p >= 2 (got p = {p}); the right-hand side is not \
                 Lipschitz at sign crossings, use the proximal scheme"
            )));
        }
        if self.snapshot_times.iter().any(|t| !t.is_finite()) {
            return Err(invalid("snapshot times must be finite"));
        }
        Ok(())
    }
}

/// `θ / (2(p − 1)(2‖u‖_∞)^{p−2})`, capped by `dt_max`; `dt_max` when `u ≡ 0`.
pub fn stable_dt(u: &GridFunction, p: f64, theta: f64, dt_max: f64) -> f64 {
    stable_dt_from_max(u.max_abs(), p, theta, dt_max)
}

fn stable_dt_from_max(m: f64, p: f64, theta: f64, dt_max: f64) -> f64 {
    if m == 0.0 {
        return dt_max;
    }
    let dt = theta / (2.0 * (p - 1.0) * (2.0 * m).powf(p - 2.0));
    dt.min(dt_max)
}

/// `u + dt 𝓛_p u`.
pub fn explicit_step(
    u: &GridFunction,
    stencil: &WeightStencil,
    spec: &ProblemSpec,
    p: f64,
    dt: f64,
) -> Result<GridFunction> {
    let op = PLaplacian::new(*u.grid(), stencil.clone(), *spec, p)?;
    let lu = op.apply_raw(u.values());
    let (v, _, _) = guarded_euler(u.values(), &lu, dt)?;
    let out = GridFunction::from_raw(*u.grid(), v);
    out.ensure_finite("explicit step")?;
    Ok(out)
}

/// Forward Euler with the blow-up guard: a result with
/// `‖v‖_∞ > 2‖u‖_∞ + 1` is rejected and `dt` halved.
fn guarded_euler(u: &[f64], lu: &[f64], dt: f64) -> Result<(Vec<f64>, f64, usize)> {
    let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut dt = dt;
    for halvings in 0..=MAX_HALVINGS {
        let v: Vec<f64> = u.iter().zip(lu).map(|(a, b)| a + dt * b).collect();
        let mv = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        if mv.is_finite() && mv <= 2.0 * m + 1.0 {
            return Ok((v, dt, halvings));
        }
        dt *= 0.5;
    }
    Err(Error::NonFinite { context: "explicit step (guard exhausted)".into() })
}

/// Minimizer of `𝓘_p(v) + ‖v − u‖²/(2dt)` with its step record.
pub fn proximal_step(
    u: &GridFunction,
    stencil: &WeightStencil,
    spec: &ProblemSpec,
    p: f64,
    dt: f64,
    config: &StepperConfig,
) -> Result<(GridFunction, StepRecord)> {
    let op = PLaplacian::new(*u.grid(), stencil.clone(), *spec, p)?;
    let u = u.masked(spec);
    let (v, iters) = prox_solve(&op, u.values(), dt, config.prox_tol, config.prox_max_iters)?;
    let evi = evi_residual(&op, u.values(), &v, dt, &config.evi_probes);
    let v = GridFunction::from_raw(*u.grid(), v);
    v.ensure_finite("proximal step")?;
    let record = StepRecord {
        t: dt,
        dt,
        scheme: Scheme::Proximal,
        prox_iterations: Some(iters),
        evi_residual: evi,
        halvings: 0,
    };
    Ok((v, record))
}

struct ProxObjective<'a> {
    op: &'a PLaplacian,
    u: &'a [f64],
    dt: f64,
    vol: f64,
}

impl ProxObjective<'_> {
    fn value(&self, v: &[f64]) -> f64 {
        let dist = ordered_sum(v.iter().zip(self.u).map(|(a, b)| (a - b) * (a - b)));
        self.op.energy_raw(v, v) / self.op.p() + self.vol * dist / (2.0 * self.dt)
    }

    /// L²_h gradient `(v − u)/dt − 𝓛_p v` (zero off the active set).
    fn gradient(&self, v: &[f64]) -> Vec<f64> {
        let lv = self.op.apply_raw(v);
        let mask = self.op.active();
        v.iter()
            .zip(self.u)
            .zip(lv)
            .zip(mask)
            .map(|(((a, b), l), &m)| if m { (a - b) / self.dt - l } else { 0.0 })
            .collect()
    }

    fn norm(&self, g: &[f64]) -> f64 {
        (self.vol * ordered_sum(g.iter().map(|x| x * x))).sqrt()
    }
}

/// Gradient descent with Armijo backtracking. Once the predicted decrease
/// drops below the rounding level of the objective, a trial step is
/// accepted when it reduces the gradient norm instead.
fn prox_solve(op: &PLaplacian, u: &[f64], dt: f64, tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize)> {
    let obj = ProxObjective { op, u, dt, vol: op.grid().cell_volume() };
    let mut v = u.to_vec();
    let mut g = obj.gradient(&v);
    let mut gnorm = obj.norm(&g);
    let mut phi = obj.value(&v);
    let mut step: f64 = 1.0;
    let mut iters = 0;
    while gnorm > tol {
        if iters >= max_iters {
            return Err(Error::StepFailure { iterations: iters, grad_norm: gnorm });
        }
        iters += 1;
        let g2 = gnorm * gnorm;
        let noise = 1e-13 * phi.abs().max(f64::MIN_POSITIVE);
        let mut accepted = false;
        for _ in 0..200 {
            let trial: Vec<f64> = v.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            let predicted = ARMIJO_C * step * g2;
            if predicted > noise {
                let phi_t = obj.value(&trial);
                if phi_t <= phi - predicted {
                    g = obj.gradient(&trial);
                    gnorm = obj.norm(&g);
                    phi = phi_t;
                    v = trial;
                    accepted = true;
                    break;
                }
            } else {
                let g_t = obj.gradient(&trial);
                let n_t = obj.norm(&g_t);
                if n_t < gnorm {
                    phi = obj.value(&trial);
                    g = g_t;
                    gnorm = n_t;
                    v = trial;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted || !gnorm.is_finite() {
            return Err(Error::StepFailure { iterations: iters, grad_norm: gnorm });
        }
        step = (2.0 * step).min(1.0);
    }
    Ok((v, iters))
}

/// `max_w [(‖v − w‖² − ‖u − w‖²)/(2dt) − (𝓘_p(w) − 𝓘_p(v))]` over probes.
fn evi_residual(op: &PLaplacian, u: &[f64], v: &[f64], dt: f64, probes: &[GridFunction]) -> Option<f64> {
    if probes.is_empty() {
        return None;
    }
    let vol = op.grid().cell_volume();
    let mask = op.active();
    let iv = op.functional_raw(v);
    let worst = probes
        .iter()
        .map(|w| {
            let w = w.masked(op.spec());
            let w = w.values();
            let dv = ordered_sum((0..v.len()).filter(|&k| mask[k]).map(|k| (v[k] - w[k]).powi(2)));
            let du = ordered_sum((0..u.len()).filter(|&k| mask[k]).map(|k| (u[k] - w[k]).powi(2)));
            let lhs = vol * (dv - du) / (2.0 * dt);
            let iw = op.functional_raw(w);
            lhs - (iw - iv)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Some(worst)
}

fn series_row(op: &PLaplacian, u: &[f64], t: f64, dt: f64) -> SeriesRow {
    let vol = op.grid().cell_volume();
    let mask = op.active();
    let active = || u.iter().zip(mask).filter(|(_, m)| **m).map(|(v, _)| *v);
    SeriesRow {
        t,
        dt,
        l1: vol * ordered_sum(active().map(f64::abs)),
        l2: (vol * ordered_sum(active().map(|v| v * v))).sqrt(),
        linf: active().fold(0.0, |m, v| m.max(v.abs())),
        energy: op.energy_raw(u, u),
        mass: vol * ordered_sum(active()),
    }
}

fn boundary_activity(op: &PLaplacian, u: &[f64], radius: f64) -> Option<f64> {
    if !matches!(op.spec().variant, Variant::Cauchy { .. }) {
        return None;
    }
    let grid = op.grid();
    let edge = grid.half_width() - radius - 1e-9 * grid.h();
    let near = |k: usize| {
        let x = grid.point(k);
        x[0].abs() >= edge || (grid.dim() == 2 && x[1].abs() >= edge)
    };
    Some((0..u.len()).filter(|&k| near(k)).fold(0.0, |m, k| m.max(u[k].abs())))
}

/// Advances `u0` to time `final_time`, recording the series after every
/// accepted step and snapshots at the accepted step nearest each requested
/// time.
pub fn evolve(
    u0: &GridFunction,
    spec: &ProblemSpec,
    kernel: &Kernel,
    p: f64,
    final_time: f64,
    config: &StepperConfig,
) -> Result<Trajectory> {
    config.validate(p)?;
    let start = config.start_time;
    if !(final_time > start && final_time.is_finite()) {
        return Err(invalid(format!("final time {final_time} must exceed start time {start}")));
    }
    u0.ensure_finite("initial datum")?;
    let grid = *u0.grid();
    if kernel.dim() != grid.dim() {
        return Err(Error::GridMismatch(format!(
            "kernel dimension {} differs from grid dimension {}",
            kernel.dim(),
            grid.dim()
        )));
    }
    let stencil = discrete_weights(kernel, grid.h())?;
    let op = PLaplacian::new(grid, stencil.clone(), *spec, p)?;
    let kappa = if spec.is_neumann() {
        let k = kappa_from_stencil(&stencil, spec, &grid)?;
        if k <= 0.0 {
            return Err(Error::ConditionViolated { kappa: k });
        }
        Some(k)
    } else {
        None
    };

    let u_init = u0.masked(spec);
    let mut warnings = Vec::new();
    let mut pending: Vec<f64> = config.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    let before = pending.len();
    pending.retain(|&tau| tau >= start - 1e-12 && tau <= final_time + 1e-12);
    if pending.len() < before {
        warnings.push(format!(
            "{} snapshot time(s) outside [{start}, {final_time}] ignored",
            before - pending.len()
        ));
    }
    pending.reverse(); // pop from the back in increasing order

    let applicability = Applicability {
        nonnegative_datum: u_init.values().iter().all(|v| *v >= 0.0),
        degenerate: p > 2.0,
        one_dimensional: grid.dim() == 1,
    };

    let mut u = u_init.values().to_vec();
    let mut t = start;
    let mut step_index = config.start_step;
    let mut ut = op.apply_raw(&u);
    let mut series = vec![series_row(&op, &u, t, 0.0)];
    let mass0 = series[0].mass;
    let mass_scale = series[0].l1.max(f64::MIN_POSITIVE);
    let mut audit = RunAudit::default();
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();
    let mut worst_activity: f64 = 0.0;
    let radius = kernel.radius();
    let t_eps = 1e-12 * final_time.abs().max(1.0);

    let mut take_snapshot = |tau: f64, t: f64, step: usize, u: &[f64], ut: &[f64], snaps: &mut Vec<Snapshot>| {
        let activity = boundary_activity(&op, u, radius);
        if let Some(a) = activity {
            worst_activity = worst_activity.max(a);
        }
        snaps.push(Snapshot {
            requested: tau,
            t,
            step,
            u: GridFunction::from_raw(grid, u.to_vec()),
            ut: GridFunction::from_raw(grid, ut.to_vec()),
            boundary_activity: activity,
        });
    };

    while final_time - t > t_eps {
        let planned = match config.scheme {
            Scheme::Explicit => {
                let m = u.iter().fold(0.0f64, |a, v| a.max(v.abs()));
                stable_dt_from_max(m, p, config.cfl_theta, config.dt_max)
            }
            Scheme::Proximal => config.dt_max,
        };
        // a planned step landing within rounding of T is kept as is, so a
        // run split at a step boundary reproduces the same step sizes
        let mut dt = if planned > final_time - t + t_eps { final_time - t } else { planned };
        while let Some(&tau) = pending.last() {
            if tau <= t + 0.5 * dt {
                take_snapshot(tau, t, step_index, &u, &ut, &mut snapshots);
                pending.pop();
            } else {
                break;
            }
        }

        let (next, record) = match config.scheme {
            Scheme::Explicit => {
                let (v, used, halvings) = guarded_euler(&u, &ut, dt)?;
                if halvings > 0 {
                    warnings.push(format!("explicit step at t = {t} halved {halvings} time(s)"));
                }
                dt = used;
                let rec = StepRecord {
                    t: t + dt,
                    dt,
                    scheme: Scheme::Explicit,
                    prox_iterations: None,
                    evi_residual: None,
                    halvings,
                };
                (v, rec)
            }
            Scheme::Proximal => {
                let (v, iters) = prox_solve(&op, &u, dt, config.prox_tol, config.prox_max_iters)?;
                let evi = evi_residual(&op, &u, &v, dt, &config.evi_probes);
                let rec = StepRecord {
                    t: t + dt,
                    dt,
                    scheme: Scheme::Proximal,
                    prox_iterations: Some(iters),
                    evi_residual: evi,
                    halvings: 0,
                };
                (v, rec)
            }
        };
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { context: format!("step at t = {t}") });
        }
        ut = match config.scheme {
            Scheme::Explicit => op.apply_raw(&next),
            Scheme::Proximal => next.iter().zip(&u).map(|(a, b)| (a - b) / dt).collect(),
        };
        u = next;
        t = if record.t >= final_time - t_eps { final_time } else { record.t };
        step_index += 1;

        let row = series_row(&op, &u, t, dt);
        let prev = series.last().copied().unwrap_or(row);
        audit.max_linf_increase = audit.max_linf_increase.max(row.linf - prev.linf);
        audit.max_energy_increase = audit.max_energy_increase.max(row.energy - prev.energy);
        audit.max_mass_drift = audit.max_mass_drift.max((row.mass - mass0).abs() / mass_scale);
        if let Some(e) = record.evi_residual {
            audit.max_evi_residual = Some(audit.max_evi_residual.map_or(e, |m: f64| m.max(e)));
        }
        series.push(row);
        steps.push(StepRecord { t, ..record });
    }
    while let Some(tau) = pending.pop() {
        take_snapshot(tau, t, step_index, &u, &ut, &mut snapshots);
    }
    if worst_activity > 1e-6 {
        warnings.push(format!(
            "truncation: boundary activity {worst_activity:.3e} exceeds 1e-6; enlarge the padding"
        ));
    }

    Ok(Trajectory {
        p,
        kernel: *kernel,
        stencil,
        spec: *spec,
        scheme: config.scheme,
        start_time: start,
        start_step: config.start_step,
        final_time,
        u0: u_init,
        snapshots,
        series,
        steps,
        audit,
        applicability,
        kappa,
        final_state: GridFunction::from_raw(grid, u),
        warnings,
    })
}
