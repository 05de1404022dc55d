//! One-dimensional quadrature rules used for kernel constants and moduli.

use std::f64::consts::{FRAC_PI_2, PI};

/// Gauss–Legendre nodes and weights on [-1, 1], computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` split into `panels` equal panels.
pub fn composite_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        let mut s = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(mid + 0.5 * width * xi);
        }
        total += 0.5 * width * s;
    }
    total
}

/// Composite Gauss rule over consecutive breakpoints; integrands that are
/// smooth between breakpoints are integrated to near machine precision.
pub fn piecewise_gauss<F: Fn(f64) -> f64>(f: F, breaks: &[f64], panels: usize, order: usize) -> f64 {
    let mut pts: Vec<f64> = breaks.to_vec();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    pts.windows(2)
        .map(|w| composite_gauss(&f, w[0], w[1], panels, order))
        .sum()
}

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`.
///
/// Robust to algebraic endpoint singularities of the integrand or its
/// derivatives, which the power and bump profiles have at the support edge.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let half = 0.5 * (b - a);
    // Abscissae are evaluated through the distance to the nearer endpoint so
    // that points crowding the edges keep full relative precision.
    let eval = |t: f64| -> f64 {
        let s = FRAC_PI_2 * t.sinh();
        let cosh_s = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (cosh_s * cosh_s);
        let dist = half / (s.exp() * cosh_s); // half * (1 - tanh(s))
        let xp = b - dist;
        let xm = a + dist;
        let mut v = 0.0;
        if xp > a && xp < b {
            v += f(xp);
        }
        if t != 0.0 && xm > a && xm < b {
            v += f(xm);
        }
        w * v
    };
    let t_max = 4.5;
    let mut step = 0.5;
    let mut sum = eval(0.0);
    let mut k = 1;
    while k as f64 * step <= t_max {
        sum += eval(k as f64 * step);
        k += 1;
    }
    let mut estimate = half * step * sum;
    for _level in 0..12 {
        step *= 0.5;
        let mut extra = 0.0;
        let mut k = 1;
        while k as f64 * step <= t_max {
            extra += eval(k as f64 * step);
            k += 2;
        }
        sum += extra;
        let next = half * step * sum;
        let converged = (next - estimate).abs() <= tol * next.abs().max(1e-300);
        estimate = next;
        if converged {
            break;
        }
    }
    estimate
}
