//! Recorded output of a time evolution: per-step series and state snapshots.

use crate::grid::{GridFunction, ProblemSpec};
use crate::kernel::{Kernel, WeightStencil};

/// Integration scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Explicit,
    Proximal,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Explicit => "explicit",
            Scheme::Proximal => "proximal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "explicit" => Some(Scheme::Explicit),
            "proximal" => Some(Scheme::Proximal),
            _ => None,
        }
    }
}

/// State at a requested time. `ut` is the time derivative actually used by
/// the scheme: `𝓛_p u` for explicit steps, `(v − u)/dt` for proximal ones.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub requested: f64,
    pub t: f64,
    pub step: usize,
    pub u: GridFunction,
    pub ut: GridFunction,
    /// Cauchy runs: `max |u|` within one kernel radius of the grid edge.
    pub boundary_activity: Option<f64>,
}

/// Scalar quantities recorded after every accepted step (and at t = 0).
/// Norms, mass and energy use the uniform measure `hⁿ` over active points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub dt: f64,
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
    pub energy: f64,
    pub mass: f64,
}

/// Per-step record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub scheme: Scheme,
    pub prox_iterations: Option<usize>,
    pub evi_residual: Option<f64>,
    /// Explicit steps: how many times the step was halved by the guard.
    pub halvings: usize,
}

/// Monotonicity flags tracked while the run advances.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunAudit {
    /// Largest step-to-step increase of `‖u‖_∞` (0 if never increasing).
    pub max_linf_increase: f64,
    /// Largest step-to-step increase of `𝓔_p(u, u)`.
    pub max_energy_increase: f64,
    /// Largest relative mass deviation from the initial mass.
    pub max_mass_drift: f64,
    pub max_evi_residual: Option<f64>,
}

/// Preconditions under which the positivity-based audits apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Applicability {
    pub nonnegative_datum: bool,
    pub degenerate: bool,
    pub one_dimensional: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub p: f64,
    pub kernel: Kernel,
    pub stencil: WeightStencil,
    pub spec: ProblemSpec,
    pub scheme: Scheme,
    pub start_time: f64,
    pub start_step: usize,
    pub final_time: f64,
    pub u0: GridFunction,
    pub snapshots: Vec<Snapshot>,
    pub series: Vec<SeriesRow>,
    pub steps: Vec<StepRecord>,
    pub audit: RunAudit,
    pub applicability: Applicability,
    pub kappa: Option<f64>,
    pub final_state: GridFunction,
    pub warnings: Vec<String>,
}

impl Trajectory {
    pub fn snapshot_times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps.len()
    }

    pub fn max_dt(&self) -> f64 {
        self.steps.iter().fold(0.0, |m, s| m.max(s.dt))
    }
}

/// `n` times evenly spaced on `[t0, t1]`, both ends included.
pub fn uniform_schedule(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t1],
        _ => (0..n).map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// `n` logarithmically spaced times on `[t0, t1]`, `t0 > 0`.
pub fn log_schedule(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![t1],
        _ => {
            let (a, b) = (t0.ln(), t1.ln());
            (0..n).map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(uniform_schedule(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let l = log_schedule(1.0, 100.0, 3);
        assert!((l[1] - 10.0).abs() < 1e-12 && (l[2] - 100.0).abs() < 1e-12);
        assert!(log_schedule(1.0, 2.0, 0).is_empty());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in [Scheme::Explicit, Scheme::Proximal] {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("rk4"), None);
    }
}
