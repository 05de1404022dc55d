//! Reference solver for the linear case `p = 2`.
//!
//! With unit interior row sums, `𝓛₂u = J∗u − u` (zero extension outside the
//! active set), so `v = eᵗu` solves the pure convolution equation `v_t = J∗v`.
//! That equation is integrated with classical RK4 and `e^{−T}v(T)` returned.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{GridFunction, ProblemSpec, Variant};
use crate::kernel::WeightStencil;

fn convolve(v: &[f64], stencil: &WeightStencil, grid: &crate::grid::Grid, mask: &[bool]) -> Vec<f64> {
    let n = grid.points_per_axis() as isize;
    let two_d = grid.dim() == 2;
    let point = |k: usize| -> f64 {
        if !mask[k] {
            return 0.0;
        }
        let [i, j] = grid.multi_index(k);
        let mut acc = 0.0;
        for (o, w) in stencil.offsets().iter().zip(stencil.weights()) {
            let (ni, nj) = (i as isize + o[0], j as isize + o[1]);
            if ni < 0 || ni >= n || (two_d && (nj < 0 || nj >= n)) {
                continue;
            }
            let m = grid.flat_index([ni as usize, nj as usize]);
            if mask[m] {
                acc += w * v[m];
            }
        }
        acc
    };
    if v.len() * stencil.len() >= 1 << 15 {
        (0..v.len()).into_par_iter().map(point).collect()
    } else {
        (0..v.len()).map(point).collect()
    }
}

/// Linear evolution to time `final_time` by integrating-factor RK4 with
/// step at most `dt_fine`.
pub fn linear_evolve(
    u0: &GridFunction,
    stencil: &WeightStencil,
    spec: &ProblemSpec,
    final_time: f64,
    dt_fine: f64,
) -> Result<GridFunction> {
    if let Variant::Neumann { .. } = spec.variant {
        return Err(Error::Unsupported(
            "the linear reference solver needs constant row sums; Neumann rows vary near the boundary".into(),
        ));
    }
    if !(final_time >= 0.0 && final_time.is_finite()) {
        return Err(invalid(format!("final time must be >= 0, got {final_time}")));
    }
    if !(dt_fine > 0.0 && dt_fine.is_finite()) {
        return Err(invalid(format!("dt_fine must be positive, got {dt_fine}")));
    }
    u0.ensure_finite("initial datum")?;
    let grid = *u0.grid();
    stencil.check_grid(&grid)?;
    spec.validate(&grid)?;
    let mask = spec.active_mask(&grid);
    let mut v = u0.masked(spec).into_values();
    if final_time == 0.0 {
        return GridFunction::new(grid, v);
    }

    let steps = (final_time / dt_fine).ceil().max(1.0) as usize;
    let dt = final_time / steps as f64;
    let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + s * y).collect() };
    for _ in 0..steps {
        let k1 = convolve(&v, stencil, &grid, &mask);
        let k2 = convolve(&axpy(&v, 0.5 * dt, &k1), stencil, &grid, &mask);
        let k3 = convolve(&axpy(&v, 0.5 * dt, &k2), stencil, &grid, &mask);
        let k4 = convolve(&axpy(&v, dt, &k3), stencil, &grid, &mask);
        for i in 0..v.len() {
            v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    let decay = (-final_time).exp();
    GridFunction::new(grid, v.into_iter().map(|x| decay * x).collect())
}
