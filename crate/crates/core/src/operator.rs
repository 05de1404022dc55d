//! The discrete nonlocal p-Laplacian, its energy form, and the scalar
//! nonlinearities `L_p`, `M_p` together with the numerical inequalities the
//! regularity estimates rest on.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::grid::{ordered_sum, Exterior, Grid, GridFunction, ProblemSpec};
use crate::kernel::WeightStencil;

/// Grid sizes (points × stencil entries) above which evaluation goes parallel.
const PARALLEL_WORK: usize = 1 << 15;

/// Exponent `p > 1` with its regime flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearityParams {
    p: f64,
}

impl NonlinearityParams {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(invalid(format!("p must be > 1, got {p}")));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_singular(&self) -> bool {
        self.p < 2.0
    }

    pub fn is_linear(&self) -> bool {
        self.p == 2.0
    }

    pub fn is_degenerate(&self) -> bool {
        self.p > 2.0
    }

    pub fn is_integer(&self) -> bool {
        self.p.fract() == 0.0
    }
}

/// `L_p(τ) = |τ|^{p−2} τ`, with `L_p(0) = 0` for every `p > 1`.
#[inline]
pub fn lp_scalar(tau: f64, p: f64) -> f64 {
    if tau == 0.0 {
        0.0
    } else if p == 2.0 {
        tau
    } else if p == 3.0 {
        tau.abs() * tau
    } else {
        tau.abs().powf(p - 2.0) * tau
    }
}

/// `M_p(τ) = |τ|^{p−2}`; singular at 0 when `p < 2`.
pub fn mp_scalar(tau: f64, p: f64) -> Result<f64> {
    if tau == 0.0 {
        return match p {
            p if p > 2.0 => Ok(0.0),
            p if p == 2.0 => Ok(1.0),
            p => Err(Error::Singularity { p }),
        };
    }
    Ok(tau.abs().powf(p - 2.0))
}

/// Discrete `𝓛_p` bound to a grid, stencil, problem variant and exponent.
#[derive(Debug, Clone)]
pub struct PLaplacian {
    grid: Grid,
    stencil: WeightStencil,
    spec: ProblemSpec,
    p: f64,
    mask: Vec<bool>,
}

impl PLaplacian {
    pub fn new(grid: Grid, stencil: WeightStencil, spec: ProblemSpec, p: f64) -> Result<Self> {
        NonlinearityParams::new(p)?;
        stencil.check_grid(&grid)?;
        spec.validate(&grid)?;
        let mask = spec.active_mask(&grid);
        Ok(Self { grid, stencil, spec, p, mask })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn stencil(&self) -> &WeightStencil {
        &self.stencil
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn active(&self) -> &[bool] {
        &self.mask
    }

    /// Same operator with another exponent.
    pub fn with_p(&self, p: f64) -> Result<Self> {
        NonlinearityParams::new(p)?;
        Ok(Self { p, ..self.clone() })
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch("grid function does not match operator grid".into()));
        }
        Ok(())
    }

    /// Visits the stencil neighbours of active point `k`: `f(weight, Some(j))`
    /// for active neighbours, `f(weight, None)` for exterior neighbours taken
    /// as zero. Skipped neighbours (Neumann) are not visited.
    #[inline]
    fn for_each_neighbour(&self, k: usize, mut f: impl FnMut(f64, Option<usize>)) {
        let n = self.grid.points_per_axis() as isize;
        let [i, j] = self.grid.multi_index(k);
        let zero_exterior = self.spec.exterior() == Exterior::Zero;
        let two_d = self.grid.dim() == 2;
        for (o, &w) in self.stencil.offsets().iter().zip(self.stencil.weights()) {
            let ni = i as isize + o[0];
            let nj = j as isize + o[1];
            let on_grid = ni >= 0 && ni < n && (!two_d || (nj >= 0 && nj < n));
            let nb = if on_grid { Some(self.grid.flat_index([ni as usize, nj as usize])) } else { None };
            match nb {
                Some(m) if self.mask[m] => f(w, Some(m)),
                _ if zero_exterior => f(w, None),
                _ => {}
            }
        }
    }

    fn point_value(&self, u: &[f64], k: usize) -> f64 {
        if !self.mask[k] {
            return 0.0;
        }
        let uk = u[k];
        let p = self.p;
        let mut acc = 0.0;
        self.for_each_neighbour(k, |w, nb| {
            let other = nb.map_or(0.0, |m| u[m]);
            acc += w * lp_scalar(other - uk, p);
        });
        acc
    }

    /// `(𝓛_p u)_i = Σ_d w(d) L_p(u_{i+d} − u_i)` on active points, 0 elsewhere.
    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check(u)?;
        let values = self.apply_raw(u.values());
        let out = GridFunction::from_raw(self.grid, values);
        out.ensure_finite("operator evaluation")?;
        Ok(out)
    }

    pub(crate) fn apply_raw(&self, u: &[f64]) -> Vec<f64> {
        let len = self.grid.len();
        if len * self.stencil.len() >= PARALLEL_WORK {
            (0..len).into_par_iter().map(|k| self.point_value(u, k)).collect()
        } else {
            (0..len).map(|k| self.point_value(u, k)).collect()
        }
    }

    /// `𝓔_p(u, v) = ½ Σ_i Σ_d hⁿ w(d) L_p(u_i − u_{i+d})(v_i − v_{i+d})`, summed
    /// over the pairs the variant couples (zero-extended pairs for
    /// Cauchy/Dirichlet, in-domain pairs for Neumann).
    pub fn energy(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        let e = self.energy_raw(u.values(), v.values());
        if !e.is_finite() {
            return Err(Error::NonFinite { context: "energy".into() });
        }
        Ok(e)
    }

    pub(crate) fn energy_raw(&self, u: &[f64], v: &[f64]) -> f64 {
        let p = self.p;
        let per_point = |k: usize| -> f64 {
            if !self.mask[k] {
                return 0.0;
            }
            let mut acc = 0.0;
            self.for_each_neighbour(k, |w, nb| match nb {
                Some(m) => acc += 0.5 * w * lp_scalar(u[k] - u[m], p) * (v[k] - v[m]),
                // both orderings of an (inside, outside) pair land here once
                None => acc += w * lp_scalar(u[k], p) * v[k],
            });
            acc
        };
        let len = self.grid.len();
        let parts: Vec<f64> = if len * self.stencil.len() >= PARALLEL_WORK {
            (0..len).into_par_iter().map(per_point).collect()
        } else {
            (0..len).map(per_point).collect()
        };
        self.grid.cell_volume() * ordered_sum(parts.into_iter())
    }

    /// `𝓘_p(u) = 𝓔_p(u, u) / p`, the functional whose gradient flow is the
    /// evolution.
    pub fn functional(&self, u: &GridFunction) -> Result<f64> {
        Ok(self.energy(u, u)? / self.p)
    }

    pub(crate) fn functional_raw(&self, u: &[f64]) -> f64 {
        self.energy_raw(u, u) / self.p
    }
}

/// One-shot evaluation of the discrete operator.
pub fn apply_operator(
    u: &GridFunction,
    stencil: &WeightStencil,
    spec: &ProblemSpec,
    p: f64,
) -> Result<GridFunction> {
    PLaplacian::new(*u.grid(), stencil.clone(), *spec, p)?.apply(u)
}

/// One-shot evaluation of the energy form.
pub fn energy(
    u: &GridFunction,
    v: &GridFunction,
    stencil: &WeightStencil,
    spec: &ProblemSpec,
    p: f64,
) -> Result<f64> {
    u.check_same_grid(v)?;
    PLaplacian::new(*u.grid(), stencil.clone(), *spec, p)?.energy(u, v)
}

// ---------------------------------------------------------------------------
// Numerical inequalities
// ---------------------------------------------------------------------------

/// Left and right side of a one-sided inequality `lhs ≤ rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sides {
    pub lhs: f64,
    pub rhs: f64,
    /// Largest magnitude among the terms combined into either side; a
    /// difference of such terms carries rounding error of order `ε·scale`.
    pub scale: f64,
}

impl Sides {
    /// `lhs − rhs` scaled by `max(1, |lhs|, |rhs|, scale)`, so rounding
    /// slack is comparable across magnitudes.
    pub fn residual(&self) -> f64 {
        (self.lhs - self.rhs) / 1f64.max(self.lhs.abs()).max(self.rhs.abs()).max(self.scale)
    }
}

/// Pointwise inequality behind the smoothing effect, `p ≥ 2`, `a, b ≥ 0`:
/// `a^{p−1} − L_p(a − b) ≤ (p − 1) max{a^{p−2}, b^{p−2}} b`.
pub fn pointwise_smoothing_inequality(a: f64, b: f64, p: f64) -> Sides {
    let lhs = a.powf(p - 1.0) - lp_scalar(a - b, p);
    let rhs = (p - 1.0) * a.powf(p - 2.0).max(b.powf(p - 2.0)) * b;
    let scale = a.powf(p - 1.0).max((a - b).abs().powf(p - 1.0));
    Sides { lhs, rhs, scale }
}

/// Constant in `|L_p(a) − L_p(b)| ≤ c_p |a − b|^{p−1}` for `p ∈ (1, 2]`.
pub fn holder_constant(p: f64) -> f64 {
    2f64.powf(2.0 - p)
}

/// Hölder/Lipschitz bound for `L_p`.
pub fn lp_difference_bound(a: f64, b: f64, p: f64) -> Sides {
    let scale = lp_scalar(a, p).abs().max(lp_scalar(b, p).abs());
    let lhs = (lp_scalar(a, p) - lp_scalar(b, p)).abs();
    let rhs = if p <= 2.0 {
        holder_constant(p) * (a - b).abs().powf(p - 1.0)
    } else {
        2f64.powf(p - 2.0) * (p - 1.0) * (a - b).abs() * (a.abs() + b.abs()).powf(p - 2.0)
    };
    Sides { lhs, rhs, scale }
}

/// Bound for `M_p` differences, `p ≥ 2`.
pub fn mp_difference_bound(a: f64, b: f64, p: f64) -> Sides {
    let m = |t: f64| t.abs().powf(p - 2.0);
    let lhs = (m(a) - m(b)).abs();
    let rhs = if p >= 3.0 {
        (p - 1.0) * (a - b).abs() * (a.abs().powf(p - 3.0) + b.abs().powf(p - 3.0))
    } else {
        (a - b).abs().powf(p - 2.0)
    };
    Sides { lhs, rhs, scale: m(a).max(m(b)) }
}

/// Strong monotonicity of `L_p` for `p ∈ (1, 2]`, `b > a`:
/// `(p − 1)(b − a)/(1 + a² + b²)^{(2−p)/2} ≤ L_p(b) − L_p(a)`.
pub fn lp_monotonicity_bound(a: f64, b: f64, p: f64) -> Sides {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    let gap = lp_scalar(b, p) - lp_scalar(a, p);
    let lower = (p - 1.0) * (b - a) / (1.0 + a * a + b * b).powf(0.5 * (2.0 - p));
    let scale = lp_scalar(a, p).abs().max(lp_scalar(b, p).abs());
    Sides { lhs: lower, rhs: gap, scale }
}

/// `c_{r,p} = (p − 1)(p − 2)⋯(p − r)`.
pub fn falling_factor(r: u32, p: f64) -> f64 {
    (1..=r).map(|k| p - k as f64).product()
}

/// `r`-th derivative of `L_p` for `r < p − 1`: `c_{r,p} L_{p−r}` for even
/// `r` and `c_{r,p} M_{p−r+1}` for odd `r`.
pub fn lp_derivative(t: f64, p: f64, r: u32) -> f64 {
    let c = falling_factor(r, p);
    if r.is_multiple_of(2) {
        c * lp_scalar(t, p - r as f64)
    } else if t == 0.0 {
        0.0
    } else {
        c * t.abs().powf(p - r as f64 - 1.0)
    }
}

/// Bound on differences of `L_p^{(r)}`, `p ≥ 2`, `1 ≤ r < p − 1`. Returns
/// `None` where no bound is claimed (even `r` with `p − r < 2`).
pub fn lp_derivative_bound(a: f64, b: f64, p: f64, r: u32) -> Option<Sides> {
    let rf = r as f64;
    let c = falling_factor(r, p);
    let lhs = (lp_derivative(a, p, r) - lp_derivative(b, p, r)).abs();
    let gap = (a - b).abs();
    let rhs = if r.is_multiple_of(2) {
        if p - rf < 2.0 {
            return None;
        }
        let cbar = c * (p - rf - 1.0) * 2f64.powf(p - rf - 2.0);
        cbar * gap * (a.abs() + b.abs()).powf(p - rf - 2.0)
    } else if p - rf >= 2.0 {
        let cbar = c * (p - rf + 1.0);
        cbar * gap * (a.abs().powf(p - rf - 2.0) + b.abs().powf(p - rf - 2.0))
    } else {
        c * gap.powf(p - rf - 1.0)
    };
    let scale = lp_derivative(a, p, r).abs().max(lp_derivative(b, p, r).abs());
    Some(Sides { lhs, rhs, scale })
}

/// For even integer `p`, `L_p(t) = t^{p−1}` and derivatives of order
/// `r ≥ p − 1` are constant. Returns `|L_p^{(r)}(a) − L_p^{(r)}(b)|`.
pub fn polynomial_derivative_gap(a: f64, b: f64, p: u32, r: u32) -> f64 {
    let deg = p - 1;
    let d = |t: f64| -> f64 {
        if r > deg {
            return 0.0;
        }
        let coeff: f64 = ((deg - r + 1)..=deg).map(|k| k as f64).product();
        coeff * t.powi((deg - r) as i32)
    };
    (d(a) - d(b)).abs()
}

/// Worst residual of one inequality over a sample set.
#[derive(Debug, Clone, PartialEq)]
pub struct InequalityCheck {
    pub name: String,
    pub p: f64,
    pub samples: usize,
    pub worst_residual: f64,
    pub worst_at: (f64, f64),
}

/// Evaluates every numerical inequality applicable at `p` on the samples
/// and returns the worst normalized residual of each (must be ≤ 0 up to
/// rounding).
pub fn inequality_suite(samples: &[(f64, f64)], p: f64) -> Vec<InequalityCheck> {
    let mut out = Vec::new();
    let mut run = |name: String, f: &dyn Fn(f64, f64) -> Option<f64>| {
        let mut worst = f64::NEG_INFINITY;
        let mut at = (f64::NAN, f64::NAN);
        let mut count = 0;
        for &(a, b) in samples {
            if let Some(r) = f(a, b) {
                count += 1;
                if r > worst {
                    worst = r;
                    at = (a, b);
                }
            }
        }
        if count > 0 {
            out.push(InequalityCheck { name, p, samples: count, worst_residual: worst, worst_at: at });
        }
    };

    if p >= 2.0 {
        run("pointwise-smoothing".into(), &|a, b| {
            Some(pointwise_smoothing_inequality(a.abs(), b.abs(), p).residual())
        });
        run("mp-difference".into(), &|a, b| Some(mp_difference_bound(a, b, p).residual()));
    }
    run("lp-difference".into(), &|a, b| Some(lp_difference_bound(a, b, p).residual()));
    if p <= 2.0 {
        run("lp-monotonicity".into(), &|a, b| {
            (a != b).then(|| lp_monotonicity_bound(a, b, p).residual())
        });
    }
    if p >= 2.0 {
        let mut r = 1u32;
        while (r as f64) < p - 1.0 {
            let rr = r;
            run(format!("lp-derivative-r{rr}"), &|a, b| {
                lp_derivative_bound(a, b, p, rr).map(|s| s.residual())
            });
            r += 1;
        }
        if p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
            let pi = p as u32;
            for rr in (pi - 1)..=pi {
                run(format!("lp-derivative-r{rr}-polynomial"), &|a, b| {
                    let gap = polynomial_derivative_gap(a, b, pi, rr);
                    Some(gap / 1f64.max(a.abs()).max(b.abs()))
                });
            }
        }
    }
    out
}
