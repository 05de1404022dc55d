//! Built-in verification suites: the scalar inequalities on random samples,
//! agreement with the linear reference solver, and the structural
//! invariants of the discrete flow.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{pair_audit, CheckRecord, DiagnosticsReport, Status};
use crate::error::{invalid, Result};
use crate::evolve::{evolve, StepperConfig};
use crate::grid::{BoxDomain, Grid, GridFunction, ProblemSpec};
use crate::kernel::{discrete_weights, Kernel};
use crate::operator::{inequality_suite, PLaplacian};
use crate::oracle::linear_evolve;
use crate::presets::Datum;
use crate::trajectory::{uniform_schedule, Scheme};

pub const INEQUALITY_EXPONENTS: [f64; 5] = [1.5, 2.0, 2.5, 3.0, 4.0];
pub const INEQUALITY_TOLERANCE: f64 = 1e-12;
pub const EXACTNESS_TOLERANCE: f64 = 1e-12;
pub const CONTRACTION_SLACK: f64 = 1e-10;
pub const EVI_SLACK: f64 = 1e-8;
pub const ORACLE_TOLERANCE: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Inequalities,
    Oracle,
    Invariants,
    All,
}

impl Suite {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "inequalities" => Ok(Suite::Inequalities),
            "oracle" => Ok(Suite::Oracle),
            "invariants" => Ok(Suite::Invariants),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!(
                "unknown suite '{other}' (expected inequalities, oracle, invariants or all)"
            ))),
        }
    }
}

pub fn run_suite(suite: Suite, seed: u64) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport { records: Vec::new(), seed: Some(seed) };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    if matches!(suite, Suite::Inequalities | Suite::All) {
        report.extend(inequalities(&mut rng, 100_000));
    }
    if matches!(suite, Suite::Oracle | Suite::All) {
        report.push(oracle_agreement()?);
    }
    if matches!(suite, Suite::Invariants | Suite::All) {
        report.extend(invariants(&mut rng)?);
    }
    Ok(report)
}

/// Sample pairs spread over several orders of magnitude and both signs,
/// with a share of coincident values, zeros and opposite pairs.
pub fn sample_pairs(rng: &mut impl Rng, n: usize) -> Vec<(f64, f64)> {
    let draw = |rng: &mut dyn rand::RngCore| -> f64 {
        let mag = 10f64.powf(rng.gen_range(-3.0..1.5));
        if rng.gen_bool(0.5) {
            mag
        } else {
            -mag
        }
    };
    (0..n)
        .map(|k| {
            let a = draw(rng);
            match k % 20 {
                0 => (a, a),
                1 => (a, 0.0),
                2 => (0.0, a),
                3 => (a, -a),
                _ => (a, draw(rng)),
            }
        })
        .collect()
}

fn inequalities(rng: &mut ChaCha8Rng, n: usize) -> DiagnosticsReport {
    let mut report = DiagnosticsReport::default();
    for p in INEQUALITY_EXPONENTS {
        let samples = sample_pairs(rng, n);
        for c in inequality_suite(&samples, p) {
            let name = format!("ineq-p{p}-{}", c.name);
            let status = if c.worst_residual <= INEQUALITY_TOLERANCE { Status::Pass } else { Status::Fail };
            report.push(CheckRecord {
                name,
                estimate: "scalar inequality on random pairs".into(),
                status,
                residual: Some(c.worst_residual),
                tolerance: Some(INEQUALITY_TOLERANCE),
                rate: None,
                detail: format!("{} samples, worst at ({:e}, {:e})", c.samples, c.worst_at.0, c.worst_at.1),
            });
        }
    }
    report
}

fn record(name: &str, estimate: &str, residual: f64, tolerance: f64, detail: String) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        estimate: estimate.into(),
        status: if residual <= tolerance { Status::Pass } else { Status::Fail },
        residual: Some(residual),
        tolerance: Some(tolerance),
        rate: None,
        detail,
    }
}

/// Explicit solver at `p = 2` against the linear reference solver:
/// Dirichlet on `[−2, 2]`, step kernel `R = ½`, indicator of `[−1, 1]`,
/// `h = 1/128`, `dt = 10⁻³` against `dt_fine = 10⁻⁴`, `T = 1`.
pub fn oracle_agreement() -> Result<CheckRecord> {
    let discrepancy = oracle_discrepancy()?;
    Ok(record(
        "oracle-p2",
        "explicit solver equals the linear reference at p = 2",
        discrepancy,
        ORACLE_TOLERANCE,
        String::new(),
    ))
}

pub fn oracle_discrepancy() -> Result<f64> {
    let grid = Grid::new(1, 2.0, 1.0 / 128.0)?;
    let spec = ProblemSpec::dirichlet(BoxDomain::new(-2.0, 2.0)?);
    let kernel = Kernel::step(0.5, 1)?;
    let u0 = Datum::Indicator { lower: -1.0, upper: 1.0, height: 1.0 }.sample(grid)?;
    let traj = evolve(&u0, &spec, &kernel, 2.0, 1.0, &StepperConfig::explicit(1e-3))?;
    let stencil = discrete_weights(&kernel, grid.h())?;
    let reference = linear_evolve(&u0, &stencil, &spec, 1.0, 1e-4)?;
    Ok(traj.final_state.sub(&reference)?.max_abs())
}

fn random_function(rng: &mut ChaCha8Rng, grid: Grid) -> GridFunction {
    let v = (0..grid.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    GridFunction::new(grid, v).expect("finite values")
}

fn test_specs() -> Result<Vec<ProblemSpec>> {
    Ok(vec![
        ProblemSpec::cauchy(1),
        ProblemSpec::dirichlet(BoxDomain::new(-1.0, 1.0)?),
        ProblemSpec::neumann(BoxDomain::new(-1.0, 1.0)?),
    ])
}

/// Relative residual `|a − b| / max(1, |a|, |b|)`.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / 1f64.max(a.abs()).max(b.abs())
}

/// Worst relative mismatch of `−Σ hⁿ v 𝓛ₚu = 𝓔ₚ(u, v)` over random pairs.
pub fn integration_by_parts_residual(rng: &mut ChaCha8Rng, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 32.0 } else { 1.0 / 8.0 };
        let grid = Grid::new(dim, 1.5, h)?;
        let stencil = discrete_weights(&Kernel::power(0.5, 1.0, dim)?, h)?;
        for spec in test_specs()? {
            for p in INEQUALITY_EXPONENTS {
                let op = PLaplacian::new(grid, stencil.clone(), spec, p)?;
                for _ in 0..trials {
                    let u = random_function(rng, grid).masked(&spec);
                    let v = random_function(rng, grid).masked(&spec);
                    let lu = op.apply(&u)?;
                    let lhs = -grid.cell_volume()
                        * lu.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>();
                    worst = worst.max(rel(lhs, op.energy(&u, &v)?));
                }
            }
        }
    }
    Ok(worst)
}

/// Worst relative `|𝓛ₚ(−u) + 𝓛ₚu|` over random functions.
pub fn oddness_residual(rng: &mut ChaCha8Rng, trials: usize) -> Result<f64> {
    let grid = Grid::new(1, 1.5, 1.0 / 32.0)?;
    let stencil = discrete_weights(&Kernel::bump(0.5, 2.0, 1)?, grid.h())?;
    let mut worst: f64 = 0.0;
    for spec in test_specs()? {
        for p in INEQUALITY_EXPONENTS {
            let op = PLaplacian::new(grid, stencil.clone(), spec, p)?;
            for _ in 0..trials {
                let u = random_function(rng, grid);
                let a = op.apply(&u)?;
                let b = op.apply(&u.map(|x| -x))?;
                let scale = a.max_abs().max(1.0);
                worst = worst.max(a.add_scaled(1.0, &b)?.max_abs() / scale);
            }
        }
    }
    Ok(worst)
}

/// Worst `|w(d) − w(−d)|` relative to the largest weight, over kernels.
pub fn stencil_symmetry_residual() -> Result<f64> {
    let mut worst: f64 = 0.0;
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 64.0 } else { 1.0 / 16.0 };
        for kernel in [Kernel::step(0.5, dim)?, Kernel::power(0.5, 1.5, dim)?, Kernel::bump(0.5, 4.0, dim)?] {
            let s = discrete_weights(&kernel, h)?;
            let top = s.weights().iter().cloned().fold(0.0, f64::max);
            for (o, w) in s.offsets().iter().zip(s.weights()) {
                worst = worst.max((w - s.weight_at([-o[0], -o[1]])).abs() / top);
            }
        }
    }
    Ok(worst)
}

/// Largest relative mass drift over Neumann runs of both schemes.
pub fn neumann_mass_drift(rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = Grid::new(1, 1.0, 1.0 / 32.0)?;
    let spec = ProblemSpec::neumann(BoxDomain::new(-1.0, 1.0)?);
    let kernel = Kernel::step(0.5, 1)?;
    let mut worst: f64 = 0.0;
    for (p, config) in [
        (3.0, StepperConfig::explicit(0.05)),
        (2.0, StepperConfig::explicit(0.05)),
        (1.5, StepperConfig::proximal(0.05)),
        (3.0, StepperConfig::proximal(0.05)),
    ] {
        let u0 = random_function(rng, grid).map(|x| x + 0.3);
        let traj = evolve(&u0, &spec, &kernel, p, 1.0, &config)?;
        worst = worst.max(traj.audit.max_mass_drift);
    }
    Ok(worst)
}

/// Contraction and comparison on `pairs` random datum pairs for each `p`,
/// proximal scheme with the snapshot schedule on every step.
/// Returns `(worst norm increase, worst order violation)`.
pub fn contraction_and_comparison(rng: &mut ChaCha8Rng, pairs: usize, exponents: &[f64]) -> Result<(f64, f64)> {
    let grid = Grid::new(1, 1.0, 1.0 / 32.0)?;
    let spec = ProblemSpec::dirichlet(BoxDomain::new(-1.0, 1.0)?);
    let kernel = Kernel::step(0.25, 1)?;
    let (dt, steps) = (0.05, 10);
    let t_final = dt * steps as f64;
    let config = StepperConfig::proximal(dt).with_snapshots(uniform_schedule(0.0, t_final, steps + 1));
    let mut worst_inc: f64 = f64::NEG_INFINITY;
    let mut worst_order: f64 = f64::NEG_INFINITY;
    for &p in exponents {
        for _ in 0..pairs {
            let u0 = random_function(rng, grid);
            let w0 = random_function(rng, grid);
            let v0 = GridFunction::new(grid, u0.values().iter().zip(w0.values()).map(|(a, b)| a + b.abs()).collect())?;
            let a = evolve(&u0, &spec, &kernel, p, t_final, &config)?;
            let b = evolve(&w0, &spec, &kernel, p, t_final, &config)?;
            let c = evolve(&v0, &spec, &kernel, p, t_final, &config)?;
            let contraction = pair_audit(&a, &b)?;
            worst_inc = worst_inc.max(contraction.max_increase.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            let order = pair_audit(&a, &c)?;
            debug_assert!(order.initially_ordered);
            worst_order = worst_order.max(order.max_order_violation);
        }
    }
    Ok((worst_inc, worst_order))
}

/// Largest per-step variational-inequality residual over a ten-step
/// proximal run at `p = 3` with five probes (zero, the mean, the datum, a
/// cosine and a random function).
pub fn evi_worst(rng: &mut ChaCha8Rng) -> Result<f64> {
    let grid = Grid::new(1, 1.0, 1.0 / 32.0)?;
    let spec = ProblemSpec::dirichlet(BoxDomain::new(-1.0, 1.0)?);
    let kernel = Kernel::step(0.5, 1)?;
    let u0 = Datum::Bump { center: 0.2, radius: 0.7, height: 1.0 }.sample(grid)?;
    let mean = u0.values().iter().sum::<f64>() / grid.len() as f64;
    let mut config = StepperConfig::proximal(0.05);
    config.evi_probes = vec![
        GridFunction::zeros(grid),
        GridFunction::constant(grid, mean),
        u0.clone(),
        Datum::Cosine { amplitude: 0.5, frequency: 3.0 }.sample(grid)?,
        random_function(rng, grid),
    ];
    let traj = evolve(&u0, &spec, &kernel, 3.0, 0.5, &config)?;
    debug_assert_eq!(traj.scheme, Scheme::Proximal);
    Ok(traj
        .steps
        .iter()
        .filter_map(|s| s.evi_residual)
        .fold(f64::NEG_INFINITY, f64::max))
}

fn invariants(rng: &mut ChaCha8Rng) -> Result<DiagnosticsReport> {
    let mut report = DiagnosticsReport::default();
    report.push(record(
        "integration-by-parts",
        "summation by parts against the energy form",
        integration_by_parts_residual(rng, 3)?,
        EXACTNESS_TOLERANCE,
        String::new(),
    ));
    report.push(record(
        "operator-oddness",
        "operator is odd",
        oddness_residual(rng, 3)?,
        EXACTNESS_TOLERANCE,
        String::new(),
    ));
    report.push(record(
        "stencil-symmetry",
        "discrete weights are symmetric",
        stencil_symmetry_residual()?,
        EXACTNESS_TOLERANCE,
        String::new(),
    ));
    report.push(record(
        "neumann-mass",
        "mass conserved along Neumann runs",
        neumann_mass_drift(rng)?,
        EXACTNESS_TOLERANCE,
        String::new(),
    ));
    let (inc, order) = contraction_and_comparison(rng, 3, &[1.5, 3.0])?;
    report.push(record("lq-contraction", "Lq contraction between solutions", inc, CONTRACTION_SLACK, String::new()));
    report.push(record("comparison", "order preservation", order, CONTRACTION_SLACK, String::new()));
    report.push(record("evi", "evolution variational inequality", evi_worst(rng)?, EVI_SLACK, String::new()));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        for s in ["inequalities", "oracle", "invariants", "all"] {
            assert!(Suite::parse(s).is_ok());
        }
        assert!(Suite::parse("everything").is_err());
    }

    #[test]
    fn sampled_pairs_cover_special_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let s = sample_pairs(&mut rng, 100);
        assert!(s.iter().any(|(a, b)| a == b));
        assert!(s.iter().any(|(_, b)| *b == 0.0));
        assert!(s.iter().any(|(a, b)| *a == -*b && *a != 0.0));
        assert!(s.iter().any(|(a, _)| *a < 0.0));
    }

    #[test]
    fn small_inequality_sample_passes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rep = inequalities(&mut rng, 2000);
        assert!(rep.all_passed(), "{}", rep.summary());
        assert!(rep.records.len() >= 5 * 2);
    }

    #[test]
    fn invariants_suite_passes() {
        let rep = run_suite(Suite::Invariants, 11).unwrap();
        assert!(rep.all_passed(), "{}", rep.summary());
        assert_eq!(rep.seed, Some(11));
    }
}
