//! Named initial data and the two built-in figure experiments.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::AuditOptions;
use crate::error::{invalid, Result};
use crate::evolve::StepperConfig;
use crate::grid::{Ball, Grid, GridFunction, ProblemSpec};
use crate::kernel::Kernel;
use crate::trajectory::uniform_schedule;

/// Initial-datum families. Coordinates refer to every axis in 2D (boxes and
/// balls centred on the diagonal point `(c, c)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Datum {
    Zero,
    Constant { value: f64 },
    /// `height` on `[lower, upper]ⁿ`, 0 elsewhere.
    Indicator { lower: f64, upper: f64, height: f64 },
    /// Point mass: `mass / hⁿ` at the grid point nearest `center`.
    Spike { center: f64, mass: f64 },
    /// `height (1 − |x − c|²/r²)²₊`, a C¹ bump.
    Bump { center: f64, radius: f64, height: f64 },
    /// `amplitude cos(frequency x₁)`.
    Cosine { amplitude: f64, frequency: f64 },
    /// Independent values, uniform on `[lower, upper]`, inside `[−support, support]ⁿ`.
    Random { seed: u64, lower: f64, upper: f64, support: f64 },
    /// `½ + ¼ cos(π x)` on `[−1, 1]`, 0 outside: jumps of height ¼ at ±1
    /// and smooth (zero) around ±1.5.
    Figure,
}

impl Datum {
    pub fn family(&self) -> &'static str {
        match self {
            Datum::Zero => "zero",
            Datum::Constant { .. } => "constant",
            Datum::Indicator { .. } => "indicator",
            Datum::Spike { .. } => "spike",
            Datum::Bump { .. } => "bump",
            Datum::Cosine { .. } => "cosine",
            Datum::Random { .. } => "random",
            Datum::Figure => "figure",
        }
    }

    pub const FAMILIES: [&'static str; 8] =
        ["zero", "constant", "indicator", "spike", "bump", "cosine", "random", "figure"];

    pub fn sample(&self, grid: Grid) -> Result<GridFunction> {
        let dim = grid.dim();
        let in_box = |x: [f64; 2], lo: f64, hi: f64| x.iter().take(dim).all(|c| *c >= lo && *c <= hi);
        match *self {
            Datum::Zero => Ok(GridFunction::zeros(grid)),
            Datum::Constant { value } => GridFunction::from_fn(grid, |_| value),
            Datum::Indicator { lower, upper, height } => {
                if !(lower < upper) {
                    return Err(invalid(format!("indicator needs lower < upper, got [{lower}, {upper}]")));
                }
                GridFunction::from_fn(grid, |x| if in_box(x, lower, upper) { height } else { 0.0 })
            }
            Datum::Spike { center, mass } => {
                let mut v = vec![0.0; grid.len()];
                let i = grid.nearest_index(center);
                let k = if dim == 1 { i } else { grid.flat_index([i, i]) };
                v[k] = mass / grid.cell_volume();
                GridFunction::new(grid, v)
            }
            Datum::Bump { center, radius, height } => {
                if !(radius > 0.0) {
                    return Err(invalid(format!("bump radius must be positive, got {radius}")));
                }
                GridFunction::from_fn(grid, |x| {
                    let r2: f64 = x.iter().take(dim).map(|c| (c - center).powi(2)).sum::<f64>() / (radius * radius);
                    height * (1.0 - r2).max(0.0).powi(2)
                })
            }
            Datum::Cosine { amplitude, frequency } => GridFunction::from_fn(grid, |x| amplitude * (frequency * x[0]).cos()),
            Datum::Random { seed, lower, upper, support } => {
                if !(lower <= upper) {
                    return Err(invalid(format!("random datum needs lower <= upper, got [{lower}, {upper}]")));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let v = (0..grid.len())
                    .map(|k| {
                        let draw = rng.gen_range(0.0..=1.0);
                        if in_box(grid.point(k), -support, support) {
                            lower + (upper - lower) * draw
                        } else {
                            0.0
                        }
                    })
                    .collect();
                GridFunction::new(grid, v)
            }
            Datum::Figure => GridFunction::from_fn(grid, |x| {
                if in_box(x, -1.0, 1.0) {
                    0.5 + 0.25 * (std::f64::consts::PI * x[0]).cos()
                } else {
                    0.0
                }
            }),
        }
    }
}

/// A complete, ready-to-run experiment.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub name: String,
    pub grid: Grid,
    pub spec: ProblemSpec,
    pub kernel: Kernel,
    pub p: f64,
    pub datum: Datum,
    pub final_time: f64,
    pub stepper: StepperConfig,
    pub audit: AuditOptions,
}

/// Centre of the smooth region examined in the figure experiments.
pub const FIGURE_PROBE: f64 = 1.5;

fn figure(name: &str, kernel: Kernel) -> Result<Experiment> {
    let grid = Grid::new(1, 3.0, 1.0 / 64.0)?;
    let final_time = 2.0;
    let stepper = StepperConfig::explicit(0.01).with_snapshots(uniform_schedule(0.0, final_time, 9));
    let audit = AuditOptions {
        modulus_region: Some(Ball { center: [FIGURE_PROBE, 0.0], radius: 0.25 }),
        modulus_radii: vec![1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0, 0.125],
        holder_probe: None,
        ..AuditOptions::default()
    };
    Ok(Experiment {
        name: name.into(),
        grid,
        spec: ProblemSpec::cauchy(4),
        kernel,
        p: 3.0,
        datum: Datum::Figure,
        final_time,
        stepper,
        audit,
    })
}

/// `p = 3`, step kernel on `[−½, ½]`, datum with jumps at ±1.
pub fn figure_one() -> Result<Experiment> {
    figure("figure1", Kernel::step(0.5, 1)?)
}

/// `p = 3`, kernel `630 (¼ − x²)⁴` on `[−½, ½]`, same datum.
pub fn figure_two() -> Result<Experiment> {
    figure("figure2", Kernel::bump(0.5, 4.0, 1)?)
}
