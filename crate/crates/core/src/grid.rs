//! Uniform Cartesian grids, grid functions, problem variants and the
//! pointwise estimators (norms, oscillation, modulus, jump detection).

use crate::error::{invalid, Error, Result};

const COORD_EPS: f64 = 1e-9;

/// Uniform grid on `[-L, L]^n` with spacing `h`, `n ∈ {1, 2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    h: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, h: f64) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(invalid(format!("grid dimension must be 1 or 2, got {dim}")));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid(format!("grid spacing must be positive, got {h}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(invalid(format!("grid half width must be positive, got {half_width}")));
        }
        let cells = 2.0 * half_width / h;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-6 * rounded.max(1.0) {
            return Err(invalid(format!(
                "2L/h = {cells} is not an integer (L = {half_width}, h = {h})"
            )));
        }
        let n = rounded as usize + 1;
        if n < 3 {
            return Err(invalid(format!("grid needs at least 3 points per axis, got {n}")));
        }
        Ok(Self { dim, half_width, h, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// Points per axis.
    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    /// Total number of grid points, `Nⁿ`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.h.powi(self.dim as i32)
    }

    /// Coordinate of the `i`-th point along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.h
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        if self.dim == 1 {
            [flat, 0]
        } else {
            [flat / self.n, flat % self.n]
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        if self.dim == 1 {
            idx[0]
        } else {
            idx[0] * self.n + idx[1]
        }
    }

    /// Spatial position of a grid point; the second component is 0 in 1D.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let [i, j] = self.multi_index(flat);
        if self.dim == 1 {
            [self.coord(i), 0.0]
        } else {
            [self.coord(i), self.coord(j)]
        }
    }

    /// Index of the grid point nearest to `x` along one axis (clamped).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x + self.half_width) / self.h).round();
        i.clamp(0.0, (self.n - 1) as f64) as usize
    }

    /// Euclidean distance between two grid points.
    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let pa = self.point(a);
        let pb = self.point(b);
        ((pa[0] - pb[0]).powi(2) + (pa[1] - pb[1]).powi(2)).sqrt()
    }
}

/// Axis-aligned cube `[lower, upper]ⁿ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxDomain {
    pub lower: f64,
    pub upper: f64,
}

impl BoxDomain {
    pub fn new(lower: f64, upper: f64) -> Result<Self> {
        if !(lower < upper) || !lower.is_finite() || !upper.is_finite() {
            return Err(invalid(format!("empty or non-finite box [{lower}, {upper}]")));
        }
        Ok(Self { lower, upper })
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains_coord(&self, x: f64, h: f64) -> bool {
        x >= self.lower - COORD_EPS * h && x <= self.upper + COORD_EPS * h
    }

    fn on_boundary(&self, x: f64, h: f64) -> bool {
        (x - self.lower).abs() <= COORD_EPS * h || (x - self.upper).abs() <= COORD_EPS * h
    }
}

/// Which boundary semantics the operator uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    /// Whole-space problem simulated on the grid box with zero extension.
    /// `padding_layers` counts kernel radii of margin around the datum.
    Cauchy { padding_layers: usize },
    /// Zero exterior condition outside `domain`.
    Dirichlet { domain: BoxDomain },
    /// Interaction restricted to `domain`.
    Neumann { domain: BoxDomain },
}

/// How neighbours outside the active set enter the operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exterior {
    /// Neighbour contributes with value 0.
    Zero,
    /// Neighbour is skipped entirely.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub variant: Variant,
}

impl ProblemSpec {
    pub fn cauchy(padding_layers: usize) -> Self {
        Self { variant: Variant::Cauchy { padding_layers } }
    }

    pub fn dirichlet(domain: BoxDomain) -> Self {
        Self { variant: Variant::Dirichlet { domain } }
    }

    pub fn neumann(domain: BoxDomain) -> Self {
        Self { variant: Variant::Neumann { domain } }
    }

    pub fn name(&self) -> &'static str {
        match self.variant {
            Variant::Cauchy { .. } => "cauchy",
            Variant::Dirichlet { .. } => "dirichlet",
            Variant::Neumann { .. } => "neumann",
        }
    }

    pub fn is_neumann(&self) -> bool {
        matches!(self.variant, Variant::Neumann { .. })
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        match self.variant {
            Variant::Cauchy { padding_layers } => {
                if padding_layers < 1 {
                    return Err(invalid("Cauchy problems need at least one padding layer"));
                }
            }
            Variant::Dirichlet { domain } | Variant::Neumann { domain } => {
                let l = grid.half_width();
                let eps = COORD_EPS * grid.h();
                if domain.lower < -l - eps || domain.upper > l + eps {
                    return Err(invalid(format!(
                        "domain [{}, {}] exceeds grid extent [{}, {}]",
                        domain.lower, domain.upper, -l, l
                    )));
                }
            }
        }
        let active = self.active_mask(grid).iter().filter(|a| **a).count();
        if active == 0 {
            return Err(invalid("domain contains no grid points"));
        }
        Ok(())
    }

    pub fn exterior(&self) -> Exterior {
        match self.variant {
            Variant::Neumann { .. } => Exterior::Skip,
            _ => Exterior::Zero,
        }
    }

    /// Box over which integrals and norms are taken.
    pub fn integration_box(&self, grid: &Grid) -> BoxDomain {
        match self.variant {
            Variant::Cauchy { .. } => BoxDomain { lower: -grid.half_width(), upper: grid.half_width() },
            Variant::Dirichlet { domain } | Variant::Neumann { domain } => domain,
        }
    }

    /// Grid points carrying unknowns. Outside this set the state is 0.
    pub fn active_mask(&self, grid: &Grid) -> Vec<bool> {
        let bx = self.integration_box(grid);
        (0..grid.len())
            .map(|k| {
                let [i, j] = grid.multi_index(k);
                let inside_x = bx.contains_coord(grid.coord(i), grid.h());
                if grid.dim() == 1 {
                    inside_x
                } else {
                    inside_x && bx.contains_coord(grid.coord(j), grid.h())
                }
            })
            .collect()
    }

    /// Per-point quadrature weights (0 outside the active set).
    pub fn weights(&self, grid: &Grid, measure: Measure) -> Vec<f64> {
        let bx = self.integration_box(grid);
        let mask = self.active_mask(grid);
        let vol = grid.cell_volume();
        (0..grid.len())
            .map(|k| {
                if !mask[k] {
                    return 0.0;
                }
                match measure {
                    Measure::Uniform => vol,
                    Measure::Trapezoid => {
                        let [i, j] = grid.multi_index(k);
                        let mut w = vol;
                        if bx.on_boundary(grid.coord(i), grid.h()) {
                            w *= 0.5;
                        }
                        if grid.dim() == 2 && bx.on_boundary(grid.coord(j), grid.h()) {
                            w *= 0.5;
                        }
                        w
                    }
                }
            })
            .collect()
    }

    /// Measure of the integration region under the given quadrature.
    pub fn domain_measure(&self, grid: &Grid, measure: Measure) -> f64 {
        self.weights(grid, measure).iter().sum()
    }
}

/// Quadrature convention for finite-q norms.
///
/// `Trapezoid` halves the weight of points on the box boundary and is the
/// reporting default. `Uniform` gives every active point weight `hⁿ`; it is
/// the measure the discrete operator is symmetric in, so mass, energy and
/// contraction identities are exact under it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Measure {
    Uniform,
    #[default]
    Trapezoid,
}

/// Real-valued state sampled on a grid. Values are always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let f = Self { grid, values };
        f.ensure_finite("grid function construction")?;
        Ok(f)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every grid point (`f` receives `[x, y]`, `y = 0` in 1D).
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let values = (0..grid.len()).map(|k| f(grid.point(k))).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn ensure_finite(&self, context: &str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite { context: context.to_string() })
        }
    }

    pub fn check_same_grid(&self, other: &GridFunction) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("grid functions live on different grids".into()));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect() }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &GridFunction) -> Result<Self> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + alpha * b).collect();
        let out = Self { grid: self.grid, values };
        out.ensure_finite("linear combination")?;
        Ok(out)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<Self> {
        self.add_scaled(-1.0, other)
    }

    /// Zeroes every point outside the active set of `spec`.
    pub fn masked(&self, spec: &ProblemSpec) -> Self {
        let mask = spec.active_mask(&self.grid);
        let values = self.values.iter().zip(mask).map(|(v, m)| if m { *v } else { 0.0 }).collect();
        Self { grid: self.grid, values }
    }

    /// Quadrature of the function over the integration region of `spec`.
    pub fn integral(&self, spec: &ProblemSpec, measure: Measure) -> f64 {
        let w = spec.weights(&self.grid, measure);
        ordered_sum(self.values.iter().zip(&w).map(|(v, w)| v * w))
    }
}

/// Sequential left-to-right sum; keeps reductions bit-reproducible.
pub(crate) fn ordered_sum(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0, |acc, v| acc + v)
}

/// Lq norm with the trapezoid convention at the boundary of the integration
/// box (grid box for Cauchy, Ω otherwise). `q = f64::INFINITY` gives the max.
///
/// On `[-1, 1]` with `h = 1/2`, the constant 1 has L1 norm exactly 2.
pub fn lq_norm(f: &GridFunction, q: f64, spec: &ProblemSpec) -> Result<f64> {
    lq_norm_with(f, q, spec, Measure::Trapezoid)
}

pub fn lq_norm_with(f: &GridFunction, q: f64, spec: &ProblemSpec, measure: Measure) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(invalid(format!("norm exponent must be >= 1, got {q}")));
    }
    let w = spec.weights(f.grid(), measure);
    Ok(lq_norm_weighted(f.values(), &w, q))
}

pub(crate) fn lq_norm_weighted(values: &[f64], weights: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        return values
            .iter()
            .zip(weights)
            .filter(|(_, w)| **w > 0.0)
            .fold(0.0, |m, (v, _)| m.max(v.abs()));
    }
    let s = ordered_sum(values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(q)));
    s.powf(1.0 / q)
}

/// `sup − inf` of `f` over grid points in the closed ball `B_radius(center)`.
pub fn oscillation(f: &GridFunction, center: [f64; 2], radius: f64) -> Result<f64> {
    let g = f.grid();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for k in 0..g.len() {
        let p = g.point(k);
        let d = ((p[0] - center[0]).powi(2) + (p[1] - center[1]).powi(2)).sqrt();
        if d <= radius + COORD_EPS * g.h() {
            lo = lo.min(f.values()[k]);
            hi = hi.max(f.values()[k]);
        }
    }
    if lo > hi {
        return Err(invalid(format!(
            "ball of radius {radius} around {center:?} contains no grid points"
        )));
    }
    Ok(hi - lo)
}

/// Ball used to restrict estimators to a sub-region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ball {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Ball {
    fn contains(&self, p: [f64; 2], h: f64) -> bool {
        let d = ((p[0] - self.center[0]).powi(2) + (p[1] - self.center[1]).powi(2)).sqrt();
        d <= self.radius + COORD_EPS * h
    }
}

/// Sampled modulus of continuity: for each ρ, the largest `|f(x) − f(y)|`
/// over grid pairs with `|x − y| ≤ ρ`. Nondecreasing in ρ.
pub fn modulus_estimate(f: &GridFunction, radii: &[f64]) -> Vec<f64> {
    modulus_estimate_in(f, radii, None)
}

/// As [`modulus_estimate`], with both points restricted to `region`.
pub fn modulus_estimate_in(f: &GridFunction, radii: &[f64], region: Option<Ball>) -> Vec<f64> {
    let g = f.grid();
    let h = g.h();
    let n = g.points_per_axis() as isize;
    let rho_max = radii.iter().cloned().fold(0.0, f64::max);
    let reach = (rho_max / h + COORD_EPS).floor() as isize;
    let inside: Vec<bool> = (0..g.len())
        .map(|k| region.is_none_or(|b| b.contains(g.point(k), h)))
        .collect();

    // Largest difference per offset (only half the offsets; |f(x)-f(y)| is symmetric).
    let mut per_offset: Vec<(f64, f64)> = Vec::new();
    let dy_range = if g.dim() == 2 { -reach..=reach } else { 0..=0 };
    for dx in 0..=reach {
        for dy in dy_range.clone() {
            if dx == 0 && dy <= 0 {
                continue;
            }
            let dist = h * ((dx * dx + dy * dy) as f64).sqrt();
            if dist > rho_max + COORD_EPS * h {
                continue;
            }
            let mut best: f64 = 0.0;
            for k in 0..g.len() {
                if !inside[k] {
                    continue;
                }
                let [i, j] = g.multi_index(k);
                let (ni, nj) = (i as isize + dx, j as isize + dy);
                if ni < 0 || ni >= n || (g.dim() == 2 && (nj < 0 || nj >= n)) {
                    continue;
                }
                let other = g.flat_index([ni as usize, nj as usize]);
                if !inside[other] {
                    continue;
                }
                best = best.max((f.values()[k] - f.values()[other]).abs());
            }
            per_offset.push((dist, best));
        }
    }
    radii
        .iter()
        .map(|&rho| {
            per_offset
                .iter()
                .filter(|(d, _)| *d <= rho + COORD_EPS * h)
                .fold(0.0f64, |m, (_, v)| m.max(*v))
        })
        .collect()
}

/// A detected discontinuity at a cell interface (1D).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    /// Interface midpoint `x_i + h/2`.
    pub position: f64,
    /// Left grid index `i` of the interface `(i, i+1)`.
    pub index: usize,
    /// Signed difference `f_{i+1} − f_i`.
    pub height: f64,
}

/// Thresholds for the discrete jump detector.
///
/// An interface `(i, i+1)` is a jump when `|f_{i+1} − f_i|` exceeds both
/// `floor` and `factor` times the median of the neighbouring interface
/// differences within `half_window` interfaces on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpDetector {
    pub factor: f64,
    pub floor: f64,
    pub half_window: usize,
}

impl Default for JumpDetector {
    fn default() -> Self {
        Self { factor: 10.0, floor: 1e-6, half_window: 4 }
    }
}

impl JumpDetector {
    pub fn detect(&self, f: &GridFunction) -> Result<Vec<Jump>> {
        let g = f.grid();
        if g.dim() != 1 {
            return Err(Error::Unsupported("jump detection is one-dimensional".into()));
        }
        let v = f.values();
        let diffs: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        let mut jumps = Vec::new();
        let mut neighbours = Vec::with_capacity(2 * self.half_window);
        for (i, &d) in diffs.iter().enumerate() {
            if d <= self.floor {
                continue;
            }
            neighbours.clear();
            let lo = i.saturating_sub(self.half_window);
            let hi = (i + self.half_window).min(diffs.len() - 1);
            neighbours.extend((lo..=hi).filter(|&j| j != i).map(|j| diffs[j]));
            let med = median(&mut neighbours);
            if d > self.factor * med {
                jumps.push(Jump { position: g.coord(i) + 0.5 * g.h(), index: i, height: v[i + 1] - v[i] });
            }
        }
        Ok(jumps)
    }
}

/// Interface positions where `f` jumps, using the default detector with the
/// given ratio factor.
pub fn jump_detect(f: &GridFunction, factor: f64) -> Result<Vec<f64>> {
    let det = JumpDetector { factor, ..JumpDetector::default() };
    Ok(det.detect(f)?.into_iter().map(|j| j.position).collect())
}

fn median(xs: &mut [f64]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len().is_multiple_of(2) {
        0.5 * (xs[m - 1] + xs[m])
    } else {
        xs[m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(l: f64, h: f64) -> Grid {
        Grid::new(1, l, h).unwrap()
    }

    #[test]
    fn grid_points_are_exact_multiples() {
        let g = line(1.0, 0.25);
        assert_eq!(g.points_per_axis(), 9);
        assert_eq!(g.coord(0), -1.0);
        assert_eq!(g.coord(8), 1.0);
        assert!(Grid::new(1, 1.0, 0.3).is_err());
        assert!(Grid::new(3, 1.0, 0.5).is_err());
        assert!(Grid::new(1, 1.0, 2.0).is_err());
    }

    #[test]
    fn l1_norm_of_one_uses_trapezoid_ends() {
        let g = line(1.0, 0.5);
        let spec = ProblemSpec::cauchy(1);
        let f = GridFunction::constant(g, 1.0);
        assert!((lq_norm(&f, 1.0, &spec).unwrap() - 2.0).abs() < 1e-15);
        // uniform weights count the two end cells fully
        assert!((lq_norm_with(&f, 1.0, &spec, Measure::Uniform).unwrap() - 2.5).abs() < 1e-15);
    }

    #[test]
    fn zero_and_spike_norms() {
        let g = line(1.0, 0.25);
        let spec = ProblemSpec::cauchy(1);
        let z = GridFunction::zeros(g);
        for q in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lq_norm(&z, q, &spec).unwrap(), 0.0);
        }
        let mut v = vec![0.0; g.len()];
        v[3] = 5.0;
        let f = GridFunction::new(g, v).unwrap();
        assert_eq!(lq_norm(&f, f64::INFINITY, &spec).unwrap(), 5.0);
        assert!(lq_norm(&f, 0.5, &spec).is_err());
    }

    #[test]
    fn norms_restrict_to_domain() {
        let g = line(2.0, 0.5);
        let spec = ProblemSpec::dirichlet(BoxDomain::new(-1.0, 1.0).unwrap());
        let f = GridFunction::constant(g, 1.0);
        assert!((lq_norm(&f, 1.0, &spec).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn non_finite_values_are_rejected() {
        let g = line(1.0, 0.5);
        let mut v = vec![0.0; g.len()];
        v[1] = f64::NAN;
        assert!(matches!(GridFunction::new(g, v), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn oscillation_examples() {
        let g = line(1.0, 0.25);
        let c = GridFunction::constant(g, 3.0);
        assert_eq!(oscillation(&c, [0.0, 0.0], 0.5).unwrap(), 0.0);
        let x = GridFunction::from_fn(g, |p| p[0]).unwrap();
        assert!((oscillation(&x, [0.0, 0.0], 0.5).unwrap() - 1.0).abs() < 1e-15);
        let ind = GridFunction::from_fn(g, |p| if p[0] > 0.1 { 1.0 } else { 0.0 }).unwrap();
        assert_eq!(oscillation(&ind, [0.0, 0.0], 0.5).unwrap(), 1.0);
        assert!(oscillation(&x, [5.0, 0.0], 0.1).is_err());
    }

    #[test]
    fn modulus_of_lipschitz_and_step() {
        let g = line(1.0, 1.0 / 32.0);
        let radii = [1.0 / 32.0, 0.1, 0.25, 0.5];
        let x = GridFunction::from_fn(g, |p| p[0]).unwrap();
        for (rho, w) in radii.iter().zip(modulus_estimate(&x, &radii)) {
            assert!(w <= rho + g.h() + 1e-12);
        }
        let c = GridFunction::constant(g, 2.0);
        assert!(modulus_estimate(&c, &radii).iter().all(|w| *w == 0.0));
        let step = GridFunction::from_fn(g, |p| if p[0] > 0.0 { 1.0 } else { 0.0 }).unwrap();
        let w = modulus_estimate(&step, &radii);
        assert!(w.iter().all(|v| *v == 1.0));
    }

    #[test]
    fn jump_detector_examples() {
        let g = line(2.0, 1.0 / 32.0);
        let smooth = GridFunction::from_fn(g, |p| (2.0 * p[0]).sin()).unwrap();
        assert!(jump_detect(&smooth, 10.0).unwrap().is_empty());
        assert!(jump_detect(&GridFunction::zeros(g), 10.0).unwrap().is_empty());
        let kink = GridFunction::from_fn(g, |p| p[0].max(0.0)).unwrap();
        assert!(jump_detect(&kink, 10.0).unwrap().is_empty());
        let datum = GridFunction::from_fn(g, |p| if p[0].abs() <= 1.0 { 1.0 - 0.3 * p[0] * p[0] } else { 0.0 }).unwrap();
        let jumps = jump_detect(&datum, 10.0).unwrap();
        assert_eq!(jumps.len(), 2);
        assert!((jumps[0] + 1.0).abs() <= g.h());
        assert!((jumps[1] - 1.0).abs() <= g.h());
    }

    #[test]
    fn jump_detector_rejects_two_dimensions() {
        let g = Grid::new(2, 1.0, 0.25).unwrap();
        assert!(jump_detect(&GridFunction::zeros(g), 10.0).is_err());
    }
}
