//! Acceptance criteria, one test per criterion. Each prints a single
//! `criterion N (...): PASS|FAIL` line; run with
//! `cargo test -p nonlocal-plap --test acceptance -- --nocapture`.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nonlocal_plap::diagnostics::{
    audit_detector, check_benilan_crandall, check_modulus_preservation, check_singularity_stationarity,
    check_smoothing, check_time_monotonicity, decay_rate_fit, holder_seminorm_from_samples, lipschitz_ratio,
    slope_oscillation, smoothing_constants, step_tolerance, DecayMode,
};
use nonlocal_plap::evolve::{evolve, StepperConfig};
use nonlocal_plap::grid::{Ball, BoxDomain, Grid, GridFunction, ProblemSpec};
use nonlocal_plap::kernel::{discrete_weights, Kernel};
use nonlocal_plap::operator::{inequality_suite, PLaplacian};
use nonlocal_plap::oracle::linear_evolve;
use nonlocal_plap::presets::{figure_one, figure_two, Datum, FIGURE_PROBE};
use nonlocal_plap::trajectory::{log_schedule, uniform_schedule, Trajectory};
use nonlocal_plap::verify::sample_pairs;

fn verdict(n: u32, name: &str, pass: bool, detail: String) {
    println!("criterion {n} ({name}): {}  {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {n} failed: {detail}");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_fn(rng: &mut ChaCha8Rng, grid: Grid, lo: f64, hi: f64) -> GridFunction {
    GridFunction::new(grid, (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect()).unwrap()
}

fn unit_interval() -> BoxDomain {
    BoxDomain::new(-1.0, 1.0).unwrap()
}

/// `h Σ |f|^q` over the active set, or the max for `q = ∞`.
fn norm(f: &GridFunction, spec: &ProblemSpec, q: f64) -> f64 {
    let mask = spec.active_mask(f.grid());
    let vals = f.values().iter().zip(&mask).filter(|(_, m)| **m).map(|(v, _)| v.abs());
    if q.is_infinite() {
        vals.fold(0.0, f64::max)
    } else {
        (f.grid().cell_volume() * vals.map(|v| v.powf(q)).sum::<f64>()).powf(1.0 / q)
    }
}

#[test]
fn criterion_01_inequalities() {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0;
    let mut smoothing_mismatch: f64 = 0.0;
    for p in [1.5, 2.0, 2.5, 3.0, 4.0] {
        let samples = sample_pairs(&mut r, 100_000);
        for c in inequality_suite(&samples, p) {
            assert!(c.samples > 0);
            worst = worst.max(c.worst_residual);
            checks += 1;
        }
        if p >= 2.0 {
            // the smoothing inequality restated directly on nonnegative pairs
            for &(a, b) in samples.iter().take(1000) {
                let (a, b) = (a.abs(), b.abs());
                let lhs = a.powf(p - 1.0) - (a - b).abs().powf(p - 2.0) * (a - b);
                let rhs = (p - 1.0) * a.max(b).powf(p - 2.0) * b;
                // rounding is relative to the largest term entering the difference
                let scale = 1f64.max(a.powf(p - 1.0)).max((a - b).abs().powf(p - 1.0)).max(rhs.abs());
                smoothing_mismatch = smoothing_mismatch.max((lhs - rhs) / scale);
            }
        }
    }
    let elapsed = start.elapsed();
    let pass = worst <= 1e-12 && smoothing_mismatch <= 1e-12 && elapsed < Duration::from_secs(5) && checks >= 15;
    verdict(
        1,
        "inequality suite",
        pass,
        format!("{checks} checks, worst residual {worst:.3e}, direct restatement {smoothing_mismatch:.3e}, {elapsed:.2?}"),
    );
}

#[test]
fn criterion_02_discrete_structure() {
    let mut r = rng(2);
    // integration by parts and oddness on every variant, 1D and 2D
    let mut ibp: f64 = 0.0;
    let mut odd: f64 = 0.0;
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 32.0 } else { 1.0 / 8.0 };
        let grid = Grid::new(dim, 1.5, h).unwrap();
        let stencil = discrete_weights(&Kernel::power(0.5, 1.0, dim).unwrap(), h).unwrap();
        for spec in [ProblemSpec::cauchy(1), ProblemSpec::dirichlet(unit_interval()), ProblemSpec::neumann(unit_interval())] {
            for p in [1.5, 2.0, 2.5, 3.0, 4.0] {
                let op = PLaplacian::new(grid, stencil.clone(), spec, p).unwrap();
                for _ in 0..4 {
                    let u = random_fn(&mut r, grid, -1.0, 1.0).masked(&spec);
                    let v = random_fn(&mut r, grid, -1.0, 1.0).masked(&spec);
                    let lu = op.apply(&u).unwrap();
                    let lhs = -grid.cell_volume() * lu.values().iter().zip(v.values()).map(|(a, b)| a * b).sum::<f64>();
                    let e = op.energy(&u, &v).unwrap();
                    ibp = ibp.max((lhs - e).abs() / 1f64.max(lhs.abs()).max(e.abs()));
                    let lneg = op.apply(&u.map(|x| -x)).unwrap();
                    let gap = lu.values().iter().zip(lneg.values()).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
                    odd = odd.max(gap / lu.max_abs().max(1.0));
                }
            }
        }
    }
    // stencil symmetry
    let mut sym: f64 = 0.0;
    for dim in [1, 2] {
        let h = if dim == 1 { 1.0 / 64.0 } else { 1.0 / 16.0 };
        for k in [Kernel::step(0.5, dim).unwrap(), Kernel::power(0.5, 1.5, dim).unwrap(), Kernel::bump(0.5, 4.0, dim).unwrap()] {
            let s = discrete_weights(&k, h).unwrap();
            let top = s.weights().iter().cloned().fold(0.0, f64::max);
            for (o, w) in s.offsets().iter().zip(s.weights()) {
                sym = sym.max((w - s.weight_at([-o[0], -o[1]])).abs() / top);
            }
        }
    }
    // Neumann mass along full runs, recomputed from every step's snapshot
    let grid = Grid::new(1, 1.0, 1.0 / 32.0).unwrap();
    let spec = ProblemSpec::neumann(unit_interval());
    let kernel = Kernel::step(0.5, 1).unwrap();
    let mut drift: f64 = 0.0;
    for (p, cfg) in [
        (3.0, StepperConfig::explicit(0.05)),
        (2.0, StepperConfig::explicit(0.05)),
        (1.5, StepperConfig::proximal(0.05)),
        (3.0, StepperConfig::proximal(0.05)),
    ] {
        let u0 = random_fn(&mut r, grid, -0.5, 1.0);
        let cfg = cfg.with_snapshots(uniform_schedule(0.0, 1.0, 21));
        let tr = evolve(&u0, &spec, &kernel, p, 1.0, &cfg).unwrap();
        let mass = |f: &GridFunction| f.masked(&spec).values().iter().sum::<f64>() * grid.cell_volume();
        let m0 = mass(&tr.u0);
        let scale = norm(&tr.u0, &spec, 1.0);
        for s in &tr.snapshots {
            drift = drift.max((mass(&s.u) - m0).abs() / scale);
        }
        drift = drift.max(tr.audit.max_mass_drift);
    }
    let pass = ibp <= 1e-12 && odd <= 1e-12 && sym <= 1e-12 && drift <= 1e-12;
    verdict(
        2,
        "discrete structure",
        pass,
        format!("by-parts {ibp:.2e}, oddness {odd:.2e}, symmetry {sym:.2e}, Neumann mass drift {drift:.2e}"),
    );
}

#[test]
fn criterion_03_oracle() {
    let start = Instant::now();
    let grid = Grid::new(1, 2.0, 1.0 / 128.0).unwrap();
    let spec = ProblemSpec::dirichlet(BoxDomain::new(-2.0, 2.0).unwrap());
    let kernel = Kernel::step(0.5, 1).unwrap();
    let u0 = Datum::Indicator { lower: -1.0, upper: 1.0, height: 1.0 }.sample(grid).unwrap();
    let tr = evolve(&u0, &spec, &kernel, 2.0, 1.0, &StepperConfig::explicit(1e-3)).unwrap();
    assert!(tr.steps.iter().all(|s| s.dt <= 1e-3 + 1e-15));
    let stencil = discrete_weights(&kernel, grid.h()).unwrap();
    let reference = linear_evolve(&u0, &stencil, &spec, 1.0, 1e-4).unwrap();
    let err = tr.final_state.sub(&reference).unwrap().max_abs();
    let elapsed = start.elapsed();
    verdict(
        3,
        "oracle equivalence",
        err <= 5e-3 && elapsed < Duration::from_secs(30),
        format!("max discrepancy {err:.3e} (tol 5e-3), {} steps, {elapsed:.2?}", tr.steps.len()),
    );
}

#[test]
fn criterion_04_contraction_and_comparison() {
    let mut r = rng(4);
    let grid = Grid::new(1, 1.0, 1.0 / 32.0).unwrap();
    let spec = ProblemSpec::dirichlet(unit_interval());
    let kernel = Kernel::step(0.25, 1).unwrap();
    let (dt, steps) = (0.05, 10);
    let t_final = dt * steps as f64;
    let cfg = StepperConfig::proximal(dt).with_snapshots(uniform_schedule(0.0, t_final, steps + 1));
    let mut worst_increase = f64::NEG_INFINITY;
    let mut worst_order = f64::NEG_INFINITY;
    let mut matched = 0;
    for p in [1.5, 3.0] {
        for _ in 0..20 {
            let u0 = random_fn(&mut r, grid, -1.0, 1.0);
            let w0 = random_fn(&mut r, grid, -1.0, 1.0);
            let bump = random_fn(&mut r, grid, 0.0, 0.5);
            let v0 = u0.add_scaled(1.0, &bump).unwrap();
            let a = evolve(&u0, &spec, &kernel, p, t_final, &cfg).unwrap();
            let b = evolve(&w0, &spec, &kernel, p, t_final, &cfg).unwrap();
            let c = evolve(&v0, &spec, &kernel, p, t_final, &cfg).unwrap();
            assert_eq!(a.snapshots.len(), steps + 1);
            for q in [1.0, 2.0, f64::INFINITY] {
                let d: Vec<f64> = a
                    .snapshots
                    .iter()
                    .zip(&b.snapshots)
                    .map(|(x, y)| {
                        assert_eq!(x.t, y.t);
                        norm(&x.u.sub(&y.u).unwrap(), &spec, q)
                    })
                    .collect();
                for w in d.windows(2) {
                    worst_increase = worst_increase.max(w[1] - w[0]);
                }
                matched += d.len();
            }
            for (x, z) in a.snapshots.iter().zip(&c.snapshots) {
                let gap = x.u.values().iter().zip(z.u.values()).map(|(l, h)| l - h).fold(f64::NEG_INFINITY, f64::max);
                worst_order = worst_order.max(gap);
            }
        }
    }
    let pass = worst_increase <= 1e-10 && worst_order <= 1e-10;
    verdict(
        4,
        "contraction and comparison",
        pass,
        format!("worst norm increase {worst_increase:.2e}, worst order violation {worst_order:.2e} over {matched} matched norms"),
    );
}

fn spike_run() -> Trajectory {
    let grid = Grid::new(1, 4.0, 1.0 / 64.0).unwrap();
    let kernel = Kernel::step(0.5, 1).unwrap();
    let u0 = Datum::Spike { center: 0.0, mass: 1.0 }.sample(grid).unwrap();
    let cfg = StepperConfig::explicit(0.05).with_snapshots(log_schedule(1e-3, 10.0, 30));
    evolve(&u0, &ProblemSpec::cauchy(6), &kernel, 3.0, 10.0, &cfg).unwrap()
}

#[test]
fn criterion_05_smoothing_bound() {
    let tr = spike_run();
    let k = tr.kernel.sup_norm();
    let c = smoothing_constants(3.0, 1.0, k).unwrap();
    // constants recomputed by hand for p = 3, q = 1
    let k_tilde = 2.0 * 8f64.sqrt();
    let k_big = (1.0 * 24f64.powi(12) * k.powf(2.0)).sqrt();
    let constants_ok = (c.k_tilde / k_tilde - 1.0).abs() < 1e-12 && (c.k_pqj / k_big - 1.0).abs() < 1e-12;
    let audit = check_smoothing(&tr, &c, 1.0).unwrap();
    // independent two-regime evaluation
    let u0_l1 = norm(&tr.u0, &tr.spec, 1.0);
    assert!((u0_l1 - 1.0).abs() < 1e-12);
    let t_star = (k_big * u0_l1 / k_tilde).powf(-1.0);
    let mut two_regime = f64::NEG_INFINITY;
    for s in tr.snapshots.iter().filter(|s| s.t > 0.0) {
        let bound = if s.t <= t_star { 2.0 * k_tilde / s.t } else { 2.0 * k_big * u0_l1 };
        two_regime = two_regime.max(norm(&s.u, &tr.spec, f64::INFINITY) - bound);
    }
    let pass = constants_ok
        && audit.worst <= 0.0
        && audit.worst_two_regime <= 0.0
        && two_regime <= 0.0
        && (audit.crossover_time / t_star - 1.0).abs() < 1e-12
        && audit.residuals.len() >= 20;
    verdict(
        5,
        "smoothing bound",
        pass,
        format!(
            "worst residual {:.3e}, two-regime {:.3e} (t* = {t_star:.3e}), {} snapshots",
            audit.worst,
            two_regime,
            audit.residuals.len()
        ),
    );
}

#[test]
fn criterion_06_benilan_crandall() {
    let mut details = Vec::new();
    let mut pass = true;
    let indicator = {
        let grid = Grid::new(1, 1.0, 1.0 / 64.0).unwrap();
        let u0 = Datum::Indicator { lower: -0.5, upper: 0.5, height: 1.0 }.sample(grid).unwrap();
        let cfg = StepperConfig::explicit(0.01).with_snapshots(uniform_schedule(0.0, 2.0, 41));
        evolve(&u0, &ProblemSpec::dirichlet(unit_interval()), &Kernel::step(0.5, 1).unwrap(), 3.0, 2.0, &cfg).unwrap()
    };
    for (name, tr) in [("spike", spike_run()), ("indicator", indicator)] {
        let tol = step_tolerance(&tr);
        // recompute both slacks directly from the snapshots
        let mut bc = f64::INFINITY;
        let mut mono = f64::INFINITY;
        let mask = tr.spec.active_mask(tr.u0.grid());
        for (k, s) in tr.snapshots.iter().enumerate().filter(|(_, s)| s.t > 0.0) {
            for i in (0..mask.len()).filter(|&i| mask[i]) {
                bc = bc.min(s.ut.values()[i] + s.u.values()[i] / s.t);
            }
            if k > 0 && tr.snapshots[k - 1].t > 0.0 {
                let prev = &tr.snapshots[k - 1];
                for i in (0..mask.len()).filter(|&i| mask[i]) {
                    mono = mono.min(s.u.values()[i] - prev.t / s.t * prev.u.values()[i]);
                }
            }
        }
        let lib_bc = check_benilan_crandall(&tr).unwrap();
        let lib_mono = check_time_monotonicity(&tr).unwrap();
        let ok = bc >= -tol && mono >= -tol && lib_bc >= -tol && lib_mono >= -tol;
        pass &= ok;
        details.push(format!("{name}: slack {bc:.2e}, increment {mono:.2e}, tol {tol:.2e}"));
    }
    verdict(6, "Benilan-Crandall and time monotonicity", pass, details.join("; "));
}

#[test]
fn criterion_07_decay() {
    let start = Instant::now();
    let grid = Grid::new(1, 1.0, 1.0 / 64.0).unwrap();
    let kernel = Kernel::step(0.5, 1).unwrap();
    let datum = Datum::Indicator { lower: -0.5, upper: 0.5, height: 1.0 }.sample(grid).unwrap();
    let cfg = StepperConfig::explicit(1.0).with_snapshots(log_schedule(1.0, 1000.0, 31));
    let mut pass = true;
    let mut details = Vec::new();
    for (spec, mode) in [
        (ProblemSpec::dirichlet(unit_interval()), DecayMode::Dirichlet),
        (ProblemSpec::neumann(unit_interval()), DecayMode::Neumann),
    ] {
        let tr = evolve(&datum, &spec, &kernel, 3.0, 1000.0, &cfg).unwrap();
        let fit = decay_rate_fit(&tr, (10.0, 1000.0), mode).unwrap();
        // independent least-squares slope
        let mean = match mode {
            DecayMode::Dirichlet => 0.0,
            DecayMode::Neumann => {
                let m = spec.active_mask(&grid);
                let vals: Vec<f64> = tr.u0.values().iter().zip(&m).filter(|(_, a)| **a).map(|(v, _)| *v).collect();
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        let pts: Vec<(f64, f64)> = tr
            .snapshots
            .iter()
            .filter(|s| s.t >= 10.0 && s.t <= 1000.0)
            .map(|s| (s.t.ln(), norm(&s.u.map(|v| v - mean), &spec, f64::INFINITY).ln()))
            .collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
            / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let lib_slope = fit.slope.expect("nontrivial decay");
        let ok = (slope - lib_slope).abs() < 1e-9
            && slope <= -1.0 / 3.0 + 0.15
            && fit.weighted_sup.is_finite()
            && fit.weighted_trend_nonincreasing();
        pass &= ok;
        details.push(format!("{}: slope {slope:.4}, sup t^(1/3)|dev| {:.3e}", spec.name(), fit.weighted_sup));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(300);
    verdict(7, "asymptotic decay", pass, format!("{} ({elapsed:.2?})", details.join("; ")));
}

#[test]
fn criterion_08_figures() {
    let radii = [0.25, 0.125, 0.0625, 0.03125];
    let run = |e: nonlocal_plap::presets::Experiment| {
        let u0 = e.datum.sample(e.grid).unwrap();
        let tr = evolve(&u0, &e.spec, &e.kernel, e.p, e.final_time, &e.stepper).unwrap();
        (e, tr)
    };
    let (e1, fig1) = run(figure_one().unwrap());
    let (_, fig2) = run(figure_two().unwrap());

    // figure 1: jumps at ±1 in every snapshot, drift ≤ 1 cell, heights nonincreasing
    let h = e1.grid.h();
    let s1 = check_singularity_stationarity(&fig1).unwrap();
    let mut jumps_everywhere = true;
    for snap in &fig1.snapshots {
        let found = audit_detector(&snap.u).detect(&snap.u).unwrap();
        for x in [-1.0, 1.0] {
            jumps_everywhere &= found.iter().any(|j| (j.position - x).abs() <= h);
        }
    }
    // corner at 1.5: slope oscillation does not shrink with the window
    let last1 = &fig1.snapshots.last().unwrap().u;
    let osc1: Vec<f64> = radii.iter().map(|r| slope_oscillation(last1, FIGURE_PROBE, *r).unwrap()).collect();
    let corner = osc1[3] >= 0.5 * osc1[0] && osc1[3] > 1e-3;
    let region = Ball { center: [FIGURE_PROBE, 0.0], radius: 0.25 };
    let lip = lipschitz_ratio(last1, region, 0.125).unwrap();
    let modulus = check_modulus_preservation(&fig1, &e1.audit.modulus_radii, region).unwrap();
    let fig1_ok = s1.initial.len() == 2
        && s1.new_jumps.is_empty()
        && s1.max_drift_cells <= 1.0
        && s1.heights_nonincreasing
        && s1.heights.last().unwrap().1.iter().all(|hgt| *hgt < 0.25)
        && jumps_everywhere
        && corner
        && lip.is_finite()
        && modulus.bounded;

    // figure 2: no new jumps, smooth near ±1.5
    let s2 = check_singularity_stationarity(&fig2).unwrap();
    let mut smooth = true;
    let mut ratios = Vec::new();
    for snap in fig2.snapshots.iter().filter(|s| s.t > 0.0) {
        for c in [-FIGURE_PROBE, FIGURE_PROBE] {
            let osc: Vec<f64> = radii.iter().map(|r| slope_oscillation(&snap.u, c, *r).unwrap()).collect();
            // C¹: oscillation of the slope shrinks at least linearly with the window
            let ratio = osc[3] / osc[0];
            smooth &= ratio <= 0.25;
            ratios.push(ratio);
        }
    }
    let worst_ratio = ratios.iter().cloned().fold(0.0, f64::max);
    let fig2_ok = s2.new_jumps.is_empty() && s2.max_drift_cells <= 1.0 && smooth;
    verdict(
        8,
        "figure reproduction",
        fig1_ok && fig2_ok,
        format!(
            "fig1: drift {} cells, heights {:?}, corner slope oscillation {:.3e}/{:.3e}, Lipschitz ratio {lip:.3e}; \
             fig2: {} new jumps, worst slope-oscillation ratio {worst_ratio:.3e}",
            s1.max_drift_cells,
            s1.heights.last().unwrap().1,
            osc1[3],
            osc1[0],
            s2.new_jumps.len()
        ),
    );
}

#[test]
fn criterion_09_evi() {
    let mut r = rng(9);
    let grid = Grid::new(1, 1.0, 1.0 / 32.0).unwrap();
    let spec = ProblemSpec::dirichlet(unit_interval());
    let kernel = Kernel::step(0.5, 1).unwrap();
    let u0 = Datum::Bump { center: 0.2, radius: 0.7, height: 1.0 }.sample(grid).unwrap();
    let mean = u0.values().iter().sum::<f64>() / grid.len() as f64;
    let probes = vec![
        GridFunction::zeros(grid),
        GridFunction::constant(grid, mean),
        u0.clone(),
        Datum::Cosine { amplitude: 0.5, frequency: 3.0 }.sample(grid).unwrap(),
        random_fn(&mut r, grid, -1.0, 1.0),
    ];
    let dt = 0.05;
    let mut cfg = StepperConfig::proximal(dt).with_snapshots(uniform_schedule(0.0, 0.5, 11));
    cfg.evi_probes = probes.clone();
    let tr = evolve(&u0, &spec, &kernel, 3.0, 0.5, &cfg).unwrap();
    assert_eq!(tr.steps.len(), 10);
    let lib_worst = tr.steps.iter().map(|s| s.evi_residual.unwrap()).fold(f64::NEG_INFINITY, f64::max);

    // recompute from consecutive snapshots with an independent energy sum
    let stencil = discrete_weights(&kernel, grid.h()).unwrap();
    let mask = spec.active_mask(&grid);
    let n = grid.points_per_axis() as isize;
    let functional = |f: &GridFunction| -> f64 {
        let v = f.masked(&spec);
        let v = v.values();
        let mut e = 0.0;
        for i in 0..grid.len() {
            if !mask[i] {
                continue;
            }
            for (o, w) in stencil.offsets().iter().zip(stencil.weights()) {
                let j = i as isize + o[0];
                let vj = if j >= 0 && j < n && mask[j as usize] { v[j as usize] } else { 0.0 };
                // each active pair counted twice, exterior pairs once
                let weight = if j >= 0 && j < n && mask[j as usize] { 0.5 } else { 1.0 };
                e += weight * w * (v[i] - vj).abs().powi(3);
            }
        }
        grid.cell_volume() * e / 3.0
    };
    let dist2 = |a: &GridFunction, b: &GridFunction| -> f64 {
        grid.cell_volume() * (0..grid.len()).filter(|&k| mask[k]).map(|k| (a.values()[k] - b.values()[k]).powi(2)).sum::<f64>()
    };
    let mut worst = f64::NEG_INFINITY;
    for pair in tr.snapshots.windows(2) {
        let (u, v) = (&pair[0].u, &pair[1].u);
        for w in &probes {
            let w = w.masked(&spec);
            let lhs = (dist2(v, &w) - dist2(u, &w)) / (2.0 * dt);
            worst = worst.max(lhs - (functional(&w) - functional(v)));
        }
    }
    verdict(
        9,
        "EVI residual",
        worst <= 1e-8 && lib_worst <= 1e-8,
        format!("worst residual {worst:.3e} (in-run {lib_worst:.3e}), 10 steps x 5 probes"),
    );
}

#[test]
fn criterion_10_holder_stability() {
    let grid = Grid::new(1, 1.0, 1.0 / 64.0).unwrap();
    let spec = ProblemSpec::dirichlet(unit_interval());
    let kernel = Kernel::step(0.5, 1).unwrap();
    let u0 = Datum::Bump { center: 0.0, radius: 0.8, height: 1.0 }.sample(grid).unwrap();
    let cfg = StepperConfig::explicit(1e-3).with_snapshots(uniform_schedule(0.0, 1.0, 1001));
    let tr = evolve(&u0, &spec, &kernel, 2.5, 1.0, &cfg).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for x in [0.0, 0.3, 0.6] {
        let i = grid.nearest_index(x);
        let series: Vec<(f64, f64)> =
            tr.snapshots.iter().filter(|s| s.t >= 0.2).map(|s| (s.t, s.u.values()[i])).collect();
        let coarse: Vec<(f64, f64)> = series.iter().step_by(40).cloned().collect();
        let fine: Vec<(f64, f64)> = series.iter().step_by(20).cloned().collect();
        let a = holder_seminorm_from_samples(&coarse, 2, 0.5).unwrap();
        let b = holder_seminorm_from_samples(&fine, 2, 0.5).unwrap();
        let change = (b - a).abs() / a;
        pass &= a.is_finite() && b.is_finite() && a > 0.0 && change < 0.2;
        details.push(format!("x={x}: {a:.4e} -> {b:.4e} ({:.1}%)", 100.0 * change));
    }
    verdict(10, "time-regularity estimator stability", pass, details.join("; "));
}
