//! Audits of recorded trajectories against the regularity and decay
//! estimates, with the explicit smoothing constants, and the report type
//! collecting them.

use std::fmt::Write as _;

use crate::error::{invalid, Error, Result};
use crate::grid::{
    modulus_estimate_in, ordered_sum, Ball, GridFunction, Jump, JumpDetector, ProblemSpec,
};
use crate::kernel::kernel_modulus;
use crate::operator::PLaplacian;
use crate::trajectory::{Scheme, Snapshot, Trajectory};

/// Base slack of every one-sided audit.
pub const BASE_TOLERANCE: f64 = 1e-8;

/// Constants of the `L^q → L^∞` smoothing estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingConstants {
    pub k_tilde: f64,
    pub k_pqj: f64,
    pub p: f64,
    pub q: f64,
    pub j_inf: f64,
}

/// `K̃_p = 2 (8/(p−2))^{1/((p−2)(p−1))}` and
/// `K_{p,q,J} = (q (8p)^{p(p+q)/q} ‖J‖_∞^{(p−1)/q})^{1/(p−1)}`.
pub fn smoothing_constants(p: f64, q: f64, j_inf: f64) -> Result<SmoothingConstants> {
    if !(p > 2.0) {
        return Err(Error::Inapplicable(format!("smoothing constants need p > 2, got {p}")));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return Err(invalid(format!("q must lie in [1, ∞), got {q}")));
    }
    if !(j_inf > 0.0 && j_inf.is_finite()) {
        return Err(invalid(format!("‖J‖_∞ must be positive, got {j_inf}")));
    }
    let k_tilde = 2.0 * (8.0 / (p - 2.0)).powf(1.0 / ((p - 2.0) * (p - 1.0)));
    let log_k = (q.ln() + p * (p + q) / q * (8.0 * p).ln() + (p - 1.0) / q * j_inf.ln()) / (p - 1.0);
    let k_pqj = log_k.exp();
    Ok(SmoothingConstants { k_tilde, k_pqj, p, q, j_inf })
}

impl SmoothingConstants {
    /// Crossover time `(K ‖u₀‖_q / K̃)^{2−p}` of the two-regime bound.
    pub fn crossover_time(&self, u0_lq: f64) -> f64 {
        (self.k_pqj * u0_lq / self.k_tilde).powf(2.0 - self.p)
    }
}

// ---------------------------------------------------------------------------
// Norm helpers (uniform measure over the active set)
// ---------------------------------------------------------------------------

fn active_values<'a>(u: &'a GridFunction, spec: &ProblemSpec) -> impl Iterator<Item = f64> + 'a {
    let mask = spec.active_mask(u.grid());
    u.values().iter().zip(mask).filter(|(_, m)| *m).map(|(v, _)| *v).collect::<Vec<_>>().into_iter()
}

fn sup_norm(u: &GridFunction, spec: &ProblemSpec) -> f64 {
    active_values(u, spec).fold(0.0f64, |m, v| m.max(v.abs()))
}

fn lq(u: &GridFunction, spec: &ProblemSpec, q: f64) -> f64 {
    let vol = u.grid().cell_volume();
    if q.is_infinite() {
        return sup_norm(u, spec);
    }
    (vol * ordered_sum(active_values(u, spec).map(|v| v.abs().powf(q)))).powf(1.0 / q)
}

fn mean(u: &GridFunction, spec: &ProblemSpec) -> f64 {
    let vals: Vec<f64> = active_values(u, spec).collect();
    ordered_sum(vals.iter().copied()) / vals.len() as f64
}

fn max_dt(traj: &Trajectory) -> f64 {
    traj.max_dt()
}

fn max_ut(traj: &Trajectory) -> f64 {
    traj.snapshots.iter().map(|s| s.ut.max_abs()).fold(0.0, f64::max)
}

/// Slack `10⁻⁸ + 2 dt ‖u_t‖_∞` for audits of continuous-time monotonicity
/// statements on time-stepped data.
pub fn step_tolerance(traj: &Trajectory) -> f64 {
    BASE_TOLERANCE + 2.0 * max_dt(traj) * max_ut(traj)
}

// ---------------------------------------------------------------------------
// Smoothing
// ---------------------------------------------------------------------------

/// Residual series of the smoothing bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingAudit {
    /// `(t, ‖u(t)‖_∞ − [c K̃ t^{−1/(p−2)} + K ‖u(t₀)‖_q]/κ)`, worst over
    /// snapshot times `t₀ ≤ t`; `c = 1` for nonnegative data, 2 otherwise.
    pub residuals: Vec<(f64, f64)>,
    /// `(t, ‖u(t)‖_∞ − two-regime bound)`.
    pub two_regime: Vec<(f64, f64)>,
    pub crossover_time: f64,
    pub worst: f64,
    pub worst_two_regime: f64,
}

pub fn check_smoothing(traj: &Trajectory, constants: &SmoothingConstants, q: f64) -> Result<SmoothingAudit> {
    if !(traj.p > 2.0) {
        return Err(Error::Inapplicable("smoothing bound needs p > 2".into()));
    }
    let spec = &traj.spec;
    let kappa = traj.kappa.unwrap_or(1.0);
    let signed_factor = if traj.applicability.nonnegative_datum { 1.0 } else { 2.0 };
    let exponent = 1.0 / (traj.p - 2.0);
    let u0_q = lq(&traj.u0, spec, q);
    let t_star = constants.crossover_time(u0_q);
    let norms: Vec<(f64, f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| (s.t, sup_norm(&s.u, spec), lq(&s.u, spec, q)))
        .collect();
    let mut residuals = Vec::new();
    let mut two_regime = Vec::new();
    for (idx, &(t, linf, _)) in norms.iter().enumerate() {
        if t <= 0.0 {
            continue;
        }
        let lq_min = norms[..=idx].iter().map(|n| n.2).fold(u0_q, f64::min);
        let bound = (signed_factor * constants.k_tilde * t.powf(-exponent) + constants.k_pqj * lq_min) / kappa;
        residuals.push((t, linf - bound));
        let regime = if t <= t_star {
            2.0 * constants.k_tilde * t.powf(-exponent)
        } else {
            2.0 * constants.k_pqj * u0_q
        };
        two_regime.push((t, linf - regime / kappa));
    }
    let worst = residuals.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    let worst_two_regime = two_regime.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    Ok(SmoothingAudit { residuals, two_regime, crossover_time: t_star, worst, worst_two_regime })
}

/// Worst `‖u_t(t)‖_∞ − 2^p ‖u(t₀)‖_∞^{p−1}` over snapshot pairs `t₀ ≤ t`.
pub fn check_ut_smoothing(traj: &Trajectory) -> f64 {
    let spec = &traj.spec;
    let p = traj.p;
    let mut best_sup = sup_norm(&traj.u0, spec);
    let mut worst = f64::NEG_INFINITY;
    for s in &traj.snapshots {
        best_sup = best_sup.min(sup_norm(&s.u, spec));
        let lhs = sup_norm(&s.ut, spec);
        worst = worst.max(lhs - 2f64.powf(p) * best_sup.powf(p - 1.0));
    }
    worst
}

fn positivity_applicable(traj: &Trajectory) -> Result<()> {
    if !(traj.p > 2.0) {
        return Err(Error::Inapplicable(format!("requires p > 2 (p = {})", traj.p)));
    }
    if !traj.applicability.nonnegative_datum {
        return Err(Error::Inapplicable("requires a nonnegative datum".into()));
    }
    Ok(())
}

/// Minimum over snapshots `t > 0` and active points of
/// `u_t + u/((p − 2)t)`.
pub fn check_benilan_crandall(traj: &Trajectory) -> Result<f64> {
    positivity_applicable(traj)?;
    let mask = traj.spec.active_mask(traj.u0.grid());
    let mut min_slack = f64::INFINITY;
    for s in traj.snapshots.iter().filter(|s| s.t > 0.0) {
        let c = 1.0 / ((traj.p - 2.0) * s.t);
        for (k, (&u, &ut)) in s.u.values().iter().zip(s.ut.values()).enumerate() {
            if mask[k] {
                min_slack = min_slack.min(ut + c * u);
            }
        }
    }
    Ok(min_slack)
}

/// Minimum over consecutive snapshots `t₁ < t₂` and active points of
/// `u(t₂) − (t₁/t₂)^{1/(p−2)} u(t₁)`, the increment of `t^{1/(p−2)}u`
/// divided by `t₂^{1/(p−2)}`.
pub fn check_time_monotonicity(traj: &Trajectory) -> Result<f64> {
    positivity_applicable(traj)?;
    let e = 1.0 / (traj.p - 2.0);
    let mask = traj.spec.active_mask(traj.u0.grid());
    let mut min_inc = f64::INFINITY;
    for w in traj.snapshots.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if b.t <= a.t || b.t <= 0.0 {
            continue;
        }
        let ratio = (a.t / b.t).powf(e);
        for (k, (&ua, &ub)) in a.u.values().iter().zip(b.u.values()).enumerate() {
            if mask[k] {
                min_inc = min_inc.min(ub - ratio * ua);
            }
        }
    }
    Ok(min_inc)
}

// ---------------------------------------------------------------------------
// Large-time decay
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayMode {
    /// `‖u(t)‖_∞`
    Dirichlet,
    /// `‖u(t) − ū₀‖_∞` with `ū₀` the mean of the datum over Ω.
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Least-squares slope of `log deviation` against `log t`; `None` when
    /// the deviation vanishes identically (exact equilibrium).
    pub slope: Option<f64>,
    /// `sup_t deviation(t) t^{1/p}` over the window.
    pub weighted_sup: f64,
    /// `deviation(t) t^{1/p}` at the window snapshots.
    pub weighted: Vec<(f64, f64)>,
    pub points: usize,
}

impl DecayFit {
    pub fn exact_equilibrium(&self) -> bool {
        self.slope.is_none()
    }

    /// Whether `t^{1/p}`-weighted deviations trend downwards (least-squares
    /// slope of the weighted values against `log t` is ≤ 0).
    pub fn weighted_trend_nonincreasing(&self) -> bool {
        let pts: Vec<(f64, f64)> = self.weighted.iter().map(|(t, w)| (t.ln(), *w)).collect();
        least_squares_slope(&pts).is_none_or(|s| s <= 1e-12 * self.weighted_sup.max(1e-300))
    }
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return None;
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn decay_rate_fit(traj: &Trajectory, window: (f64, f64), mode: DecayMode) -> Result<DecayFit> {
    let spec = &traj.spec;
    let shift = match mode {
        DecayMode::Dirichlet => 0.0,
        DecayMode::Neumann => mean(&traj.u0, spec),
    };
    let samples: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1 && s.t > 0.0)
        .map(|s| (s.t, active_values(&s.u, spec).fold(0.0f64, |m, v| m.max((v - shift).abs()))))
        .collect();
    if samples.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: samples.len() });
    }
    let p = traj.p;
    let weighted: Vec<(f64, f64)> = samples.iter().map(|(t, d)| (*t, d * t.powf(1.0 / p))).collect();
    let weighted_sup = weighted.iter().map(|w| w.1).fold(0.0, f64::max);
    let scale = sup_norm(&traj.u0, spec).max(f64::MIN_POSITIVE);
    let slope = if samples.iter().all(|(_, d)| *d <= 1e-14 * scale) {
        None
    } else {
        let pts: Vec<(f64, f64)> =
            samples.iter().filter(|(_, d)| *d > 0.0).map(|(t, d)| (t.ln(), d.ln())).collect();
        least_squares_slope(&pts)
    };
    Ok(DecayFit { slope, weighted_sup, weighted, points: samples.len() })
}

// ---------------------------------------------------------------------------
// Spatial regularity
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ModulusAudit {
    pub radii: Vec<f64>,
    /// `(t, sup_ρ ω_{u(t)}(ρ) / max(ω_{u₀}(ρ), ω_J(ρ), ρ, ρ^{p−2}))`.
    pub ratios: Vec<(f64, f64)>,
    /// Fitted exponential growth rate of the ratio in `t` (`None` if the
    /// ratio vanishes).
    pub growth_rate: Option<f64>,
    pub bounded: bool,
}

pub fn check_modulus_preservation(traj: &Trajectory, radii: &[f64], region: Ball) -> Result<ModulusAudit> {
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(invalid("modulus radii must be positive and nonempty"));
    }
    let omega_u0 = modulus_estimate_in(&traj.u0, radii, Some(region));
    let omega_j = kernel_modulus(&traj.kernel, radii);
    let denom: Vec<f64> = radii
        .iter()
        .enumerate()
        .map(|(i, &r)| omega_u0[i].max(omega_j[i]).max(r).max(r.powf(traj.p - 2.0)))
        .collect();
    let ratios: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .map(|s| {
            let om = modulus_estimate_in(&s.u, radii, Some(region));
            let r = om.iter().zip(&denom).map(|(a, b)| a / b).fold(0.0, f64::max);
            (s.t, r)
        })
        .collect();
    let bounded = ratios.iter().all(|r| r.1.is_finite());
    let pts: Vec<(f64, f64)> = ratios.iter().filter(|r| r.1 > 0.0).map(|r| (r.0, r.1.ln())).collect();
    Ok(ModulusAudit { radii: radii.to_vec(), ratios, growth_rate: least_squares_slope(&pts), bounded })
}

/// Oscillation of the first difference quotient over interfaces lying in
/// `[center − radius, center + radius]` (1D). Tends to 0 with the radius
/// where the profile is C¹ and stays of order one across a corner.
pub fn slope_oscillation(f: &GridFunction, center: f64, radius: f64) -> Result<f64> {
    let g = f.grid();
    if g.dim() != 1 {
        return Err(Error::Unsupported("slope oscillation is one-dimensional".into()));
    }
    let v = f.values();
    let h = g.h();
    let slopes: Vec<f64> = (0..v.len() - 1)
        .filter(|&i| {
            let (a, b) = (g.coord(i), g.coord(i + 1));
            a >= center - radius - 1e-9 * h && b <= center + radius + 1e-9 * h
        })
        .map(|i| (v[i + 1] - v[i]) / h)
        .collect();
    if slopes.is_empty() {
        return Err(invalid(format!("no interfaces within {radius} of {center}")));
    }
    let lo = slopes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = slopes.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(hi - lo)
}

/// Largest `|f(x) − f(y)| / |x − y|` over grid pairs in the ball, up to
/// separation `max_radius` (1D).
pub fn lipschitz_ratio(f: &GridFunction, region: Ball, max_radius: f64) -> Result<f64> {
    let g = f.grid();
    if g.dim() != 1 {
        return Err(Error::Unsupported("Lipschitz ratio is one-dimensional".into()));
    }
    let steps = (max_radius / g.h()).floor().max(1.0) as usize;
    let radii: Vec<f64> = (1..=steps).map(|k| k as f64 * g.h()).collect();
    let om = modulus_estimate_in(f, &radii, Some(region));
    Ok(om.iter().zip(&radii).map(|(w, r)| w / r).fold(0.0, f64::max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingularityAudit {
    pub initial: Vec<Jump>,
    /// Largest distance (in cells) from a detected jump to the nearest
    /// initial one, over all snapshots.
    pub max_drift_cells: f64,
    /// `(t, heights of the tracked initial jumps)`; a jump no longer
    /// detected has height 0.
    pub heights: Vec<(f64, Vec<f64>)>,
    pub heights_nonincreasing: bool,
    /// Jumps detected away from every initial jump.
    pub new_jumps: Vec<(f64, f64)>,
}

/// Jump detector used by the audit: default settings with the floor raised
/// to `10⁻³ ‖f‖_∞` so that steep but continuous fronts are not flagged.
pub fn audit_detector(f: &GridFunction) -> JumpDetector {
    JumpDetector { floor: (1e-3 * f.max_abs()).max(1e-6), ..JumpDetector::default() }
}

pub fn check_singularity_stationarity(traj: &Trajectory) -> Result<SingularityAudit> {
    let g = *traj.u0.grid();
    if g.dim() != 1 {
        return Err(Error::Inapplicable("jump tracking is one-dimensional".into()));
    }
    let h = g.h();
    let initial = audit_detector(&traj.u0).detect(&traj.u0)?;
    let mut max_drift: f64 = 0.0;
    let mut heights = Vec::new();
    let mut new_jumps = Vec::new();
    for s in &traj.snapshots {
        let found = audit_detector(&s.u).detect(&s.u)?;
        for j in &found {
            let d = initial
                .iter()
                .map(|i| (j.position - i.position).abs() / h)
                .fold(f64::INFINITY, f64::min);
            if d > 1.0 + 1e-9 {
                new_jumps.push((s.t, j.position));
            } else {
                max_drift = max_drift.max(d);
            }
        }
        let hs: Vec<f64> = initial
            .iter()
            .map(|i| {
                found
                    .iter()
                    .filter(|j| (j.position - i.position).abs() <= h * (1.0 + 1e-9))
                    .map(|j| j.height.abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        heights.push((s.t, hs));
    }
    let scale = traj.u0.max_abs().max(f64::MIN_POSITIVE);
    let heights_nonincreasing = heights
        .windows(2)
        .all(|w| w[0].1.iter().zip(&w[1].1).all(|(a, b)| *b <= *a + 1e-12 * scale));
    if !new_jumps.is_empty() {
        max_drift = f64::INFINITY;
    }
    Ok(SingularityAudit { initial, max_drift_cells: max_drift, heights, heights_nonincreasing, new_jumps })
}

// ---------------------------------------------------------------------------
// Time regularity
// ---------------------------------------------------------------------------

/// Hölder seminorm in time of the `k`-th derivative from samples
/// `(t, value)` sorted in time: `k`-th derivatives are estimated by divided
/// differences over `k + 1` consecutive samples (placed at their mean time),
/// and the sup of `|D(t₁) − D(t₂)|/|t₁ − t₂|^γ` over pairs is returned.
pub fn holder_seminorm_from_samples(samples: &[(f64, f64)], k: usize, gamma: f64) -> Result<f64> {
    if k == 0 || k > 3 {
        return Err(invalid(format!("derivative order must be 1..=3, got {k}")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(invalid(format!("Hölder exponent must lie in (0, 1], got {gamma}")));
    }
    if samples.len() < k + 3 {
        return Err(Error::InsufficientResolution(format!(
            "order {k} needs at least {} samples, got {}",
            k + 3,
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(invalid("sample times must be strictly increasing"));
    }
    let factorial = (1..=k).product::<usize>() as f64;
    let derivs: Vec<(f64, f64)> = samples
        .windows(k + 1)
        .map(|w| {
            let mut table: Vec<f64> = w.iter().map(|s| s.1).collect();
            for level in 1..=k {
                for i in 0..=(k - level) {
                    table[i] = (table[i + 1] - table[i]) / (w[i + level].0 - w[i].0);
                }
            }
            let tc = w.iter().map(|s| s.0).sum::<f64>() / w.len() as f64;
            (tc, factorial * table[0])
        })
        .collect();
    let mut sup: f64 = 0.0;
    for i in 0..derivs.len() {
        for j in (i + 1)..derivs.len() {
            let dt = (derivs[j].0 - derivs[i].0).abs();
            sup = sup.max((derivs[j].1 - derivs[i].1).abs() / dt.powf(gamma));
        }
    }
    Ok(sup)
}

/// Hölder seminorm of `∂ₜᵏu(x_probe, ·)` from the trajectory's snapshots.
pub fn time_holder_seminorm(traj: &Trajectory, x_probe: [f64; 2], k: usize, gamma: f64) -> Result<f64> {
    let g = traj.u0.grid();
    let idx = if g.dim() == 1 {
        g.nearest_index(x_probe[0])
    } else {
        g.flat_index([g.nearest_index(x_probe[0]), g.nearest_index(x_probe[1])])
    };
    let mut samples: Vec<(f64, f64)> = traj.snapshots.iter().map(|s| (s.t, s.u.values()[idx])).collect();
    samples.dedup_by(|a, b| a.0 == b.0);
    holder_seminorm_from_samples(&samples, k, gamma)
}

/// Derivative order and exponent audited for a given `p`.
pub fn holder_order(p: f64) -> (usize, f64) {
    if p < 2.0 {
        (1, p - 1.0)
    } else if p.fract() == 0.0 {
        ((p as usize - 1).clamp(1, 3), 1.0)
    } else {
        let k = (p.floor() as usize).min(3);
        if k < p.floor() as usize {
            (k, 1.0)
        } else {
            (k, p - p.floor())
        }
    }
}

// ---------------------------------------------------------------------------
// Functional inequality
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FunctionalCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub energy: f64,
    /// `𝓔_p(u, u) = 0` for a nonzero `u`; the right side is then infinite.
    pub zero_energy_nonzero: bool,
}

impl FunctionalCheck {
    pub fn residual(&self) -> f64 {
        if self.rhs.is_infinite() {
            return f64::NEG_INFINITY;
        }
        self.lhs - self.rhs
    }
}

/// `‖u‖₂² ≤ (K̃_p + 2) max{𝓔^{1/(p−1)}, 𝓔^{−(p−2)/(p−1)}} + K_{p,q,J} ‖u‖_q`.
pub fn check_functional_inequality(
    u: &GridFunction,
    op: &PLaplacian,
    q: f64,
    constants: &SmoothingConstants,
) -> Result<FunctionalCheck> {
    let p = op.p();
    if !(p > 2.0) {
        return Err(Error::Inapplicable("functional inequality needs p > 2".into()));
    }
    let spec = op.spec();
    let u = u.masked(spec);
    let lhs = lq(&u, spec, 2.0).powi(2);
    let energy = op.energy(&u, &u)?;
    let lq_norm = lq(&u, spec, q);
    if lhs == 0.0 {
        return Ok(FunctionalCheck { lhs, rhs: 0.0, energy, zero_energy_nonzero: false });
    }
    if energy <= 0.0 {
        return Ok(FunctionalCheck { lhs, rhs: f64::INFINITY, energy, zero_energy_nonzero: true });
    }
    let a = energy.powf(1.0 / (p - 1.0));
    let b = energy.powf(-(p - 2.0) / (p - 1.0));
    let rhs = (constants.k_tilde + 2.0) * a.max(b) + constants.k_pqj * lq_norm;
    Ok(FunctionalCheck { lhs, rhs, energy, zero_energy_nonzero: false })
}

// ---------------------------------------------------------------------------
// Pairs of trajectories
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct PairAudit {
    /// Largest step-to-step increase of `‖uⁿ − vⁿ‖_q` for q = 1, 2, ∞.
    pub max_increase: [f64; 3],
    /// Initial data ordered `u₀ ≤ v₀`.
    pub initially_ordered: bool,
    /// Largest `uⁿ − vⁿ` over matched snapshots (≤ 0 when order is kept).
    pub max_order_violation: f64,
    pub matched: usize,
}

/// Contraction and comparison between two runs on the same grid, compared
/// at snapshots with equal times.
pub fn pair_audit(a: &Trajectory, b: &Trajectory) -> Result<PairAudit> {
    a.u0.check_same_grid(&b.u0)?;
    if a.spec != b.spec {
        return Err(Error::GridMismatch("trajectories use different problem variants".into()));
    }
    let spec = &a.spec;
    let initially_ordered = a.u0.values().iter().zip(b.u0.values()).all(|(x, y)| x <= y);
    let pairs: Vec<(&Snapshot, &Snapshot)> = a
        .snapshots
        .iter()
        .filter_map(|s| b.snapshots.iter().find(|r| r.t == s.t).map(|r| (s, r)))
        .collect();
    let mut norms_prev: Option<[f64; 3]> = None;
    let d0 = a.u0.sub(&b.u0)?;
    let start = [lq(&d0, spec, 1.0), lq(&d0, spec, 2.0), lq(&d0, spec, f64::INFINITY)];
    let mut max_increase = [0.0f64; 3];
    let mut max_order_violation = f64::NEG_INFINITY;
    for (x, y) in &pairs {
        let d = x.u.sub(&y.u)?;
        let n = [lq(&d, spec, 1.0), lq(&d, spec, 2.0), lq(&d, spec, f64::INFINITY)];
        let prev = norms_prev.unwrap_or(start);
        for q in 0..3 {
            max_increase[q] = max_increase[q].max(n[q] - prev[q]);
        }
        norms_prev = Some(n);
        max_order_violation = max_order_violation.max(active_values(&d, spec).fold(f64::NEG_INFINITY, f64::max));
    }
    Ok(PairAudit { max_increase, initially_ordered, max_order_violation, matched: pairs.len() })
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Pass,
    Fail,
    Skipped(String),
}

impl Status {
    pub fn label(&self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Skipped(_) => "skipped",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckRecord {
    pub name: String,
    /// Estimate audited, in words.
    pub estimate: String,
    pub status: Status,
    /// Oriented so that `residual ≤ tolerance` passes.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub rate: Option<f64>,
    pub detail: String,
}

impl CheckRecord {
    fn judged(name: &str, estimate: &str, residual: f64, tolerance: f64, detail: String) -> Self {
        let status = if residual <= tolerance { Status::Pass } else { Status::Fail };
        Self {
            name: name.into(),
            estimate: estimate.into(),
            status,
            residual: Some(residual),
            tolerance: Some(tolerance),
            rate: None,
            detail,
        }
    }

    fn skipped(name: &str, estimate: &str, reason: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            estimate: estimate.into(),
            status: Status::Skipped(reason.into()),
            residual: None,
            tolerance: None,
            rate: None,
            detail: String::new(),
        }
    }

    fn from_result(name: &str, estimate: &str, r: Result<CheckRecord>) -> Self {
        match r {
            Ok(rec) => rec,
            Err(Error::Inapplicable(why)) => Self::skipped(name, estimate, why),
            Err(e) => Self::skipped(name, estimate, e.to_string()),
        }
    }

    pub fn passed(&self) -> bool {
        !matches!(self.status, Status::Fail)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DiagnosticsReport {
    pub records: Vec<CheckRecord>,
    pub seed: Option<u64>,
}

fn fmt_num(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v:e}"),
        None => String::new(),
    }
}

impl DiagnosticsReport {
    pub fn push(&mut self, rec: CheckRecord) {
        self.records.push(rec);
    }

    pub fn extend(&mut self, other: DiagnosticsReport) {
        self.records.extend(other.records);
        self.seed = self.seed.or(other.seed);
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn all_passed(&self) -> bool {
        self.records.iter().all(CheckRecord::passed)
    }

    pub fn failures(&self) -> Vec<&CheckRecord> {
        self.records.iter().filter(|r| !r.passed()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("check,theorem,status,residual,tolerance\n");
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.name,
                r.estimate.replace(',', ";"),
                r.status.label(),
                fmt_num(r.residual),
                fmt_num(r.tolerance)
            );
        }
        out
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        if let Some(seed) = self.seed {
            let _ = writeln!(out, "seed: {seed}");
        }
        for r in &self.records {
            let _ = write!(out, "{:<7} {:<28} {}", r.status.label().to_uppercase(), r.name, r.estimate);
            if let (Some(res), Some(tol)) = (r.residual, r.tolerance) {
                let _ = write!(out, "  residual {res:.3e} (tol {tol:.1e})");
            }
            if let Some(rate) = r.rate {
                let _ = write!(out, "  rate {rate:.4}");
            }
            if let Status::Skipped(why) = &r.status {
                let _ = write!(out, "  [{why}]");
            }
            if !r.detail.is_empty() {
                let _ = write!(out, "  {}", r.detail);
            }
            out.push('\n');
        }
        let failed = self.failures().len();
        let _ = writeln!(out, "{} checks, {} failed", self.records.len(), failed);
        out
    }
}

/// Settings for [`audit_trajectory`].
#[derive(Debug, Clone)]
pub struct AuditOptions {
    /// Exponent of the `L^q` norm in the smoothing and functional bounds.
    pub q: f64,
    /// Large-time fitting window; defaults to `[T/100, T]` when `T ≥ 100`.
    pub decay_window: Option<(f64, f64)>,
    /// Slack added to `−1/p` in the decay-slope test.
    pub decay_slack: f64,
    /// Region on which the datum is continuous, for the modulus audit.
    pub modulus_region: Option<Ball>,
    pub modulus_radii: Vec<f64>,
    /// Probe point for the time-regularity estimate.
    pub holder_probe: Option<[f64; 2]>,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            q: 1.0,
            decay_window: None,
            decay_slack: 0.15,
            modulus_region: None,
            modulus_radii: vec![0.05, 0.1, 0.2],
            holder_probe: None,
        }
    }
}

/// Runs every trajectory-level audit once, marking inapplicable ones as
/// skipped with the reason.
pub fn audit_trajectory(traj: &Trajectory, opts: &AuditOptions) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::default();
    let p = traj.p;
    let tol_step = step_tolerance(traj);
    let constants = smoothing_constants(p, opts.q, traj.kernel.sup_norm());

    report.push(CheckRecord::from_result(
        "smoothing",
        "Lq-Linf smoothing bound",
        constants.as_ref().map_err(clone_err).and_then(|c| {
            let a = check_smoothing(traj, c, opts.q)?;
            Ok(CheckRecord::judged(
                "smoothing",
                "Lq-Linf smoothing bound",
                a.worst,
                BASE_TOLERANCE,
                format!("K~={:.6} K={:.6e}", c.k_tilde, c.k_pqj),
            ))
        }),
    ));
    report.push(CheckRecord::from_result(
        "smoothing-two-regime",
        "two-regime smoothing bound",
        constants.as_ref().map_err(clone_err).and_then(|c| {
            let a = check_smoothing(traj, c, opts.q)?;
            Ok(CheckRecord::judged(
                "smoothing-two-regime",
                "two-regime smoothing bound",
                a.worst_two_regime,
                BASE_TOLERANCE,
                format!("t*={:.3e}", a.crossover_time),
            ))
        }),
    ));
    report.push(CheckRecord::judged(
        "ut-smoothing",
        "Linf bound on the time derivative",
        check_ut_smoothing(traj),
        BASE_TOLERANCE,
        String::new(),
    ));
    report.push(CheckRecord::from_result(
        "benilan-crandall",
        "lower bound u_t >= -u/((p-2)t)",
        check_benilan_crandall(traj)
            .map(|s| CheckRecord::judged("benilan-crandall", "lower bound u_t >= -u/((p-2)t)", -s, tol_step, String::new())),
    ));
    report.push(CheckRecord::from_result(
        "time-monotonicity",
        "t^(1/(p-2)) u nondecreasing",
        check_time_monotonicity(traj)
            .map(|s| CheckRecord::judged("time-monotonicity", "t^(1/(p-2)) u nondecreasing", -s, tol_step, String::new())),
    ));
    report.push(decay_record(traj, opts));
    report.push(modulus_record(traj, opts));
    report.push(CheckRecord::from_result(
        "singularity-stationarity",
        "singular set does not grow",
        check_singularity_stationarity(traj).map(|a| {
            let mut rec = CheckRecord::judged(
                "singularity-stationarity",
                "singular set does not grow",
                a.max_drift_cells,
                1.0,
                format!("{} initial jump(s), {} new", a.initial.len(), a.new_jumps.len()),
            );
            if !a.heights_nonincreasing {
                rec.status = Status::Fail;
                rec.detail.push_str(", jump height increased");
            }
            rec
        }),
    ));
    report.push(holder_record(traj, opts));
    report.push(CheckRecord::from_result(
        "functional-inequality",
        "L2 bound by energy and Lq norm",
        constants.as_ref().map_err(clone_err).and_then(|c| {
            let op = PLaplacian::new(*traj.u0.grid(), traj.stencil.clone(), traj.spec, p)?;
            let f = check_functional_inequality(&traj.final_state, &op, opts.q, c)?;
            let detail = if f.zero_energy_nonzero { "zero energy, nonzero state".into() } else { String::new() };
            Ok(CheckRecord::judged(
                "functional-inequality",
                "L2 bound by energy and Lq norm",
                f.residual(),
                BASE_TOLERANCE,
                detail,
            ))
        }),
    ));
    for rec in structural_records(traj) {
        report.push(rec);
    }
    report.push(CheckRecord::skipped("lq-contraction", "Lq contraction between solutions", "needs a pair of runs"));
    report.push(CheckRecord::skipped("comparison", "order preservation", "needs a pair of runs"));
    report
}

fn clone_err(e: &Error) -> Error {
    match e {
        Error::Inapplicable(s) => Error::Inapplicable(s.clone()),
        other => Error::InvalidParameter(other.to_string()),
    }
}

fn decay_record(traj: &Trajectory, opts: &AuditOptions) -> CheckRecord {
    const NAME: &str = "decay-rate";
    const EST: &str = "large-time decay t^(-1/p)";
    if !(traj.p > 2.0) {
        return CheckRecord::skipped(NAME, EST, format!("requires p > 2 (p = {})", traj.p));
    }
    let mode = match traj.spec.variant {
        crate::grid::Variant::Neumann { .. } => DecayMode::Neumann,
        crate::grid::Variant::Dirichlet { .. } => DecayMode::Dirichlet,
        crate::grid::Variant::Cauchy { .. } => {
            return CheckRecord::skipped(NAME, EST, "stated for bounded domains only");
        }
    };
    let window = match opts.decay_window {
        Some(w) => w,
        None if traj.final_time >= 100.0 => (traj.final_time / 100.0, traj.final_time),
        None => return CheckRecord::skipped(NAME, EST, "run too short for a large-time window"),
    };
    match decay_rate_fit(traj, window, mode) {
        Ok(fit) => match fit.slope {
            None => {
                let mut r = CheckRecord::judged(NAME, EST, 0.0, 0.0, "exact equilibrium".into());
                r.residual = None;
                r
            }
            Some(slope) => {
                let threshold = -1.0 / traj.p + opts.decay_slack;
                let mut r = CheckRecord::judged(
                    NAME,
                    EST,
                    slope - threshold,
                    0.0,
                    format!("slope {slope:.4}, sup t^(1/p)|dev| {:.4e}", fit.weighted_sup),
                );
                r.rate = Some(slope);
                if !fit.weighted_sup.is_finite() {
                    r.status = Status::Fail;
                }
                r
            }
        },
        Err(e) => CheckRecord::skipped(NAME, EST, e.to_string()),
    }
}

fn modulus_record(traj: &Trajectory, opts: &AuditOptions) -> CheckRecord {
    const NAME: &str = "modulus-preservation";
    const EST: &str = "local modulus of continuity preserved";
    let Some(region) = opts.modulus_region else {
        return CheckRecord::skipped(NAME, EST, "no continuity region configured");
    };
    match check_modulus_preservation(traj, &opts.modulus_radii, region) {
        Ok(a) => {
            let sup = a.ratios.iter().map(|r| r.1).fold(0.0, f64::max);
            let mut r = CheckRecord::judged(NAME, EST, 0.0, 0.0, format!("sup ratio {sup:.4e}"));
            r.residual = Some(sup);
            r.tolerance = Some(f64::INFINITY);
            r.status = if a.bounded { Status::Pass } else { Status::Fail };
            r.rate = a.growth_rate;
            r
        }
        Err(e) => CheckRecord::skipped(NAME, EST, e.to_string()),
    }
}

fn holder_record(traj: &Trajectory, opts: &AuditOptions) -> CheckRecord {
    const NAME: &str = "time-holder";
    const EST: &str = "Holder regularity in time";
    let Some(x) = opts.holder_probe else {
        return CheckRecord::skipped(NAME, EST, "no probe point configured");
    };
    let (k, gamma) = holder_order(traj.p);
    match time_holder_seminorm(traj, x, k, gamma) {
        Ok(v) => {
            let mut r = CheckRecord::judged(NAME, EST, v, f64::INFINITY, format!("k={k} gamma={gamma}"));
            if !v.is_finite() {
                r.status = Status::Fail;
            }
            r
        }
        Err(e) => CheckRecord::skipped(NAME, EST, e.to_string()),
    }
}

/// Post-hoc re-verification of the step-by-step monotonicity properties
/// from the recorded series, compared with the flags tracked during the run.
fn structural_records(traj: &Trajectory) -> Vec<CheckRecord> {
    let s = &traj.series;
    let first = s[0];
    let mut out = Vec::new();

    let linf_inc = s.windows(2).map(|w| w[1].linf - w[0].linf).fold(0.0, f64::max);
    let tol = 1e-12 * first.linf.max(f64::MIN_POSITIVE) + 1e-300;
    let mut rec = CheckRecord::judged("linf-nonincreasing", "Linf norm nonincreasing", linf_inc, tol, String::new());
    agree(&mut rec, linf_inc <= tol, traj.audit.max_linf_increase <= tol);
    out.push(rec);

    let e_inc = s.windows(2).map(|w| w[1].energy - w[0].energy).fold(0.0, f64::max);
    let tol = 1e-10 * first.energy.abs().max(1e-300);
    let mut rec = CheckRecord::judged("energy-dissipation", "energy nonincreasing", e_inc, tol, String::new());
    agree(&mut rec, e_inc <= tol, traj.audit.max_energy_increase <= tol);
    out.push(rec);

    if traj.spec.is_neumann() {
        let scale = first.l1.max(f64::MIN_POSITIVE);
        let drift = s.iter().map(|r| (r.mass - first.mass).abs() / scale).fold(0.0, f64::max);
        let mut rec = CheckRecord::judged("mass-conservation", "mass conserved", drift, 1e-12, String::new());
        agree(&mut rec, drift <= 1e-12, traj.audit.max_mass_drift <= 1e-12);
        out.push(rec);
    } else {
        out.push(CheckRecord::skipped("mass-conservation", "mass conserved", "only conserved for the Neumann problem"));
    }

    match (traj.scheme, traj.audit.max_evi_residual) {
        (Scheme::Proximal, Some(e)) => {
            out.push(CheckRecord::judged("evi", "evolution variational inequality", e, BASE_TOLERANCE, String::new()))
        }
        (Scheme::Proximal, None) => out.push(CheckRecord::skipped("evi", "evolution variational inequality", "no probes configured")),
        (Scheme::Explicit, _) => {
            out.push(CheckRecord::skipped("evi", "evolution variational inequality", "defined for proximal steps"))
        }
    }
    out
}

fn agree(rec: &mut CheckRecord, post_hoc: bool, in_run: bool) {
    if post_hoc != in_run {
        rec.status = Status::Fail;
        rec.detail = "post-hoc audit disagrees with the in-run flag".into();
    }
}
