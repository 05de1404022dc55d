//! Convolution kernels `J`, their discrete stencils, and the kernel-derived
//! quantities used by the estimates (modulus of continuity, Neumann lower
//! bound κ).

use std::f64::consts::PI;

use statrs::function::beta::beta;

use crate::error::{invalid, Error, Result};
use crate::grid::{BoxDomain, Grid, ProblemSpec};
use crate::quadrature::{piecewise_gauss, tanh_sinh};

/// Radial shape of an un-normalized kernel on `|z| ≤ R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    /// Indicator of the closed ball.
    Step,
    /// `(R − |z|)^a`.
    Power { exponent: f64 },
    /// `(R² − |z|²)^a`, smooth at the edge of its support for large `a`.
    Bump { exponent: f64 },
}

impl Profile {
    pub fn family(&self) -> &'static str {
        match self {
            Profile::Step => "step",
            Profile::Power { .. } => "power",
            Profile::Bump { .. } => "bump",
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self {
            Profile::Step => None,
            Profile::Power { exponent } | Profile::Bump { exponent } => Some(*exponent),
        }
    }

    fn raw(&self, r: f64, radius: f64) -> f64 {
        if r > radius * (1.0 + 1e-12) {
            return 0.0;
        }
        match *self {
            Profile::Step => 1.0,
            Profile::Power { exponent } => (radius - r).max(0.0).powf(exponent),
            Profile::Bump { exponent } => (radius * radius - r * r).max(0.0).powf(exponent),
        }
    }
}

/// Volume of the unit ball in dimension 1 or 2.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        2 => PI,
        _ => unreachable!("dimension validated at construction"),
    }
}

/// Nonnegative, radial, compactly supported kernel with unit mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kernel {
    profile: Profile,
    radius: f64,
    dim: usize,
    /// Closed-form `∫ raw profile`; `J = raw / normalizer`.
    normalizer: f64,
    l1_mass: f64,
}

impl Kernel {
    /// Normalized indicator of `|z| ≤ radius`.
    pub fn step(radius: f64, dim: usize) -> Result<Self> {
        Self::build(Profile::Step, radius, dim)
    }

    /// `(R − |z|)^a / c_{n,a,R}` with `c_{n,a,R} = n ω_n R^{n+a} B(n, a+1)`.
    pub fn power(radius: f64, exponent: f64, dim: usize) -> Result<Self> {
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(invalid(format!("power kernel exponent must be > 0, got {exponent}")));
        }
        Self::build(Profile::Power { exponent }, radius, dim)
    }

    /// `c (R² − |z|²)^a`, normalized to unit mass.
    pub fn bump(radius: f64, exponent: f64, dim: usize) -> Result<Self> {
        if !(exponent >= 1.0 && exponent.is_finite()) {
            return Err(invalid(format!("bump kernel exponent must be >= 1, got {exponent}")));
        }
        Self::build(Profile::Bump { exponent }, radius, dim)
    }

    pub fn from_family(family: &str, radius: f64, exponent: f64, dim: usize) -> Result<Self> {
        match family {
            "step" => Self::step(radius, dim),
            "power" => Self::power(radius, exponent, dim),
            "bump" => Self::bump(radius, exponent, dim),
            other => Err(invalid(format!("unknown kernel family '{other}'"))),
        }
    }

    fn build(profile: Profile, radius: f64, dim: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("kernel radius must be positive, got {radius}")));
        }
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("kernel dimension must be 1 or 2, got {dim}")));
        }
        let n = dim as f64;
        let omega = unit_ball_volume(dim);
        let normalizer = match profile {
            Profile::Step => omega * radius.powi(dim as i32),
            Profile::Power { exponent: a } => n * omega * radius.powf(n + a) * beta(n, a + 1.0),
            Profile::Bump { exponent: a } => {
                0.5 * n * omega * radius.powf(2.0 * a + n) * beta(0.5 * n, a + 1.0)
            }
        };
        let mut k = Self { profile, radius, dim, normalizer, l1_mass: f64::NAN };
        k.l1_mass = k.quadrature_mass();
        if (k.l1_mass - 1.0).abs() > 1e-10 {
            return Err(invalid(format!(
                "kernel normalization failed: quadrature mass {} (normalizer {normalizer})",
                k.l1_mass
            )));
        }
        Ok(k)
    }

    /// Radial quadrature `n ω_n ∫_0^R J(r) r^{n−1} dr`, independent of the
    /// closed-form normalizer.
    fn quadrature_mass(&self) -> f64 {
        let n = self.dim as f64;
        let omega = unit_ball_volume(self.dim);
        let integrand = |r: f64| self.radial(r) * r.powf(n - 1.0);
        n * omega * tanh_sinh(integrand, 0.0, self.radius, 1e-15)
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Quadrature estimate of `∫ J` after normalization.
    pub fn l1_mass(&self) -> f64 {
        self.l1_mass
    }

    /// Normalizing constant: the mass of the raw profile.
    pub fn normalizer(&self) -> f64 {
        self.normalizer
    }

    /// `J` as a function of `|z|`.
    pub fn radial(&self, r: f64) -> f64 {
        self.profile.raw(r.abs(), self.radius) / self.normalizer
    }

    pub fn eval(&self, z: [f64; 2]) -> f64 {
        self.radial((z[0] * z[0] + z[1] * z[1]).sqrt())
    }

    /// `‖J‖_∞`; every profile peaks at the origin.
    pub fn sup_norm(&self) -> f64 {
        self.radial(0.0)
    }
}

/// Discretized convolution weights on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightStencil {
    offsets: Vec<[isize; 2]>,
    weights: Vec<f64>,
    row_sum_interior: f64,
    grid_spacing: f64,
    rescale: f64,
    dim: usize,
}

impl WeightStencil {
    pub fn offsets(&self) -> &[[isize; 2]] {
        &self.offsets
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn row_sum_interior(&self) -> f64 {
        self.row_sum_interior
    }

    pub fn grid_spacing(&self) -> f64 {
        self.grid_spacing
    }

    /// Global factor `c_h` applied to the raw weights `hⁿ J(d h)`.
    pub fn rescale(&self) -> f64 {
        self.rescale
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Weight at a given offset (0 if not in the stencil).
    pub fn weight_at(&self, d: [isize; 2]) -> f64 {
        self.offsets
            .iter()
            .position(|o| *o == d)
            .map_or(0.0, |k| self.weights[k])
    }

    pub(crate) fn check_grid(&self, grid: &Grid) -> Result<()> {
        if grid.dim() != self.dim || (grid.h() - self.grid_spacing).abs() > 1e-12 * grid.h() {
            return Err(Error::GridMismatch(format!(
                "stencil built for n = {}, h = {} used on grid with n = {}, h = {}",
                self.dim,
                self.grid_spacing,
                grid.dim(),
                grid.h()
            )));
        }
        Ok(())
    }
}

/// Samples `hⁿ J(d h)` on the cube `|d h| ≤ R_J` and rescales by one
/// global constant so the interior row sum is 1. Offsets with zero weight
/// (outside the ball) are dropped, except the centre.
pub fn discrete_weights(kernel: &Kernel, h: f64) -> Result<WeightStencil> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(invalid(format!("grid spacing must be positive, got {h}")));
    }
    let radius = kernel.radius();
    if h > radius * (1.0 + 1e-12) {
        return Err(Error::DegenerateStencil { h, radius });
    }
    let reach = (radius / h + 1e-9).floor() as isize;
    let vol = h.powi(kernel.dim() as i32);
    let dy_range = if kernel.dim() == 2 { -reach..=reach } else { 0..=0 };
    let mut offsets = Vec::new();
    let mut raw = Vec::new();
    for dx in -reach..=reach {
        for dy in dy_range.clone() {
            // |d| from integer arithmetic keeps w(d) = w(-d) bit-exact
            let r = h * ((dx * dx + dy * dy) as f64).sqrt();
            let w = vol * kernel.radial(r);
            if w > 0.0 || (dx == 0 && dy == 0) {
                offsets.push([dx, dy]);
                raw.push(w);
            }
        }
    }
    let raw_sum: f64 = raw.iter().sum();
    let rescale = 1.0 / raw_sum;
    let weights: Vec<f64> = raw.iter().map(|w| w * rescale).collect();
    let row_sum_interior = weights.iter().sum();
    Ok(WeightStencil { offsets, weights, row_sum_interior, grid_spacing: h, rescale, dim: kernel.dim() })
}

/// Sampled modulus `ω_J(ρ) = sup_{|x−y|=ρ} ∫ |J(x−z) − J(y−z)| dz`.
///
/// The integral depends only on `|x − y|` for radial kernels, so it is
/// evaluated along the first axis. The running maximum over the sorted radii
/// is returned, which makes the output nondecreasing.
pub fn kernel_modulus(kernel: &Kernel, radii: &[f64]) -> Vec<f64> {
    let mut running: f64 = 0.0;
    radii
        .iter()
        .map(|&rho| {
            let v = if rho <= 0.0 { 0.0 } else { translate_l1(kernel, rho) };
            running = running.max(v);
            running
        })
        .collect()
}

fn translate_l1(kernel: &Kernel, rho: f64) -> f64 {
    let r = kernel.radius();
    match kernel.dim() {
        1 => {
            let f = |z: f64| (kernel.radial(z + rho) - kernel.radial(z)).abs();
            let breaks = [-r - rho, -r, -rho, -0.5 * rho, 0.0, r - rho, r];
            piecewise_gauss(f, &breaks, 8, 10)
        }
        _ => {
            // outer integral in y, inner in x with the circle crossings as breakpoints
            let inner = |y: f64| {
                let s = (r * r - y * y).max(0.0).sqrt();
                let f = |x: f64| (kernel.eval([x + rho, y]) - kernel.eval([x, y])).abs();
                let breaks = [-s - rho, -s, -rho, -0.5 * rho, 0.0, s - rho, s];
                piecewise_gauss(f, &breaks, 4, 10)
            };
            tanh_sinh(inner, -r, r, 1e-10)
        }
    }
}

/// Neumann lower bound `κ_{J,Ω} = min_{x∈Ω} ∫_Ω J(x − y) dy`, computed with
/// the discrete stencil on the grid points of `Ω`.
pub fn neumann_kappa(kernel: &Kernel, domain: BoxDomain, grid: &Grid) -> Result<f64> {
    let stencil = discrete_weights(kernel, grid.h())?;
    let spec = ProblemSpec::neumann(domain);
    spec.validate(grid)?;
    let kappa = kappa_from_stencil(&stencil, &spec, grid)?;
    if kappa <= 0.0 {
        return Err(Error::ConditionViolated { kappa });
    }
    Ok(kappa)
}

/// Minimum over active points of the in-domain stencil row sum.
pub fn kappa_from_stencil(stencil: &WeightStencil, spec: &ProblemSpec, grid: &Grid) -> Result<f64> {
    stencil.check_grid(grid)?;
    let mask = spec.active_mask(grid);
    let n = grid.points_per_axis() as isize;
    let mut kappa = f64::INFINITY;
    for k in 0..grid.len() {
        if !mask[k] {
            continue;
        }
        let [i, j] = grid.multi_index(k);
        let mut row = 0.0;
        for (o, w) in stencil.offsets().iter().zip(stencil.weights()) {
            let (ni, nj) = (i as isize + o[0], j as isize + o[1]);
            if ni < 0 || ni >= n || (grid.dim() == 2 && (nj < 0 || nj >= n)) {
                continue;
            }
            if mask[grid.flat_index([ni as usize, nj as usize])] {
                row += w;
            }
        }
        kappa = kappa.min(row);
    }
    Ok(kappa)
}
