//! The gradient method, its accelerated variant, a zoo of test functions
//! with certified class constants, and empirical rate measurement.
//!
//! Zoo constants follow a level-set discipline: each entry's constants are
//! valid on `domain_box`, and bound-compliance checks only use trajectories
//! whose initial level set stays inside that box (gradient steps with
//! `t ∈ (0, 2/L)` never increase `f`, so they never leave it). Constants
//! that come from a grid oracle rather than analysis carry a 1% safety
//! margin, since a grid infimum can overestimate the true one.

use crate::classes::{CurvatureClass, FunctionClassSpec};
use crate::{Error, Result};

/// A differentiable test function with certified class constants.
pub struct TestFunction {
    pub name: &'static str,
    eval: Box<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    grad: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    pub f_star: f64,
    pub known_constants: FunctionClassSpec,
    /// Per-coordinate bounds for oracle scans and start sampling.
    pub domain_box: Vec<(f64, f64)>,
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        self.domain_box.len()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.eval)(x)
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    /// Central-difference gradient for validation.
    pub fn grad_fd(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut xp = x.to_vec();
        for i in 0..x.len() {
            xp[i] = x[i] + h;
            let fp = self.eval(&xp);
            xp[i] = x[i] - h;
            let fm = self.eval(&xp);
            xp[i] = x[i];
            out.push((fp - fm) / (2.0 * h));
        }
        out
    }
}

impl std::fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TestFunction")
            .field("name", &self.name)
            .field("f_star", &self.f_star)
            .field("dim", &self.dim())
            .finish()
    }
}

/// Iterates, values and gradient norms of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub iterates: Vec<Vec<f64>>,
    pub fvals: Vec<f64>,
    pub gnorms: Vec<f64>,
    pub schedule: Vec<f64>,
}

impl Trajectory {
    /// CSV rows `iteration,f_gap,gradient_norm`, with header.
    pub fn to_csv(&self, f_star: f64) -> String {
        let mut out = String::from("iteration,f_gap,gradient_norm\n");
        for (k, (f, g)) in self.fvals.iter().zip(&self.gnorms).enumerate() {
            out.push_str(&format!("{k},{},{}\n", f - f_star, g));
        }
        out
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Gradient method with the given step schedule: `x_{k+1} = x_k − t_k ∇f(x_k)`.
///
/// Non-finite values abort with an error: divergence is reported, never
/// clipped.
pub fn gd_run(f: &TestFunction, x1: &[f64], schedule: &[f64]) -> Result<Trajectory> {
    if schedule.is_empty() {
        return Err(Error::OutOfRange("empty step schedule".into()));
    }
    if schedule.iter().any(|&t| t <= 0.0 || !t.is_finite()) {
        return Err(Error::OutOfRange("step lengths must be positive".into()));
    }
    let mut iterates = vec![x1.to_vec()];
    let mut fvals = vec![f.eval(x1)];
    let mut gnorms = Vec::new();
    let mut x = x1.to_vec();
    for &t in schedule {
        let g = f.grad(&x);
        gnorms.push(norm(&g));
        for i in 0..x.len() {
            x[i] -= t * g[i];
        }
        let fx = f.eval(&x);
        if !fx.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "divergence after {} steps of {}",
                iterates.len(),
                f.name
            )));
        }
        iterates.push(x.clone());
        fvals.push(fx);
    }
    gnorms.push(norm(&f.grad(&x)));
    Ok(Trajectory {
        iterates,
        fvals,
        gnorms,
        schedule: schedule.to_vec(),
    })
}

/// Accelerated gradient method:
/// `y_{k+1} = x_k − (1/L)∇f(x_k)`,
/// `x_{k+1} = y_{k+1} + ((√L − √mu_p)/(√L + √mu_p))(y_{k+1} − y_k)`, `y¹ = x¹`.
///
/// Its first iterate coincides with one plain gradient step of length
/// `2/(L + √(L·mu_p))`.
pub fn fgm_run(f: &TestFunction, x1: &[f64], l: f64, mu_p: f64, n: u32) -> Result<Trajectory> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_p > 0.0 && mu_p <= l) {
        return Err(Error::OutOfRange(format!("mu_p = {mu_p} must lie in (0, L]")));
    }
    if n < 1 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let momentum = (l.sqrt() - mu_p.sqrt()) / (l.sqrt() + mu_p.sqrt());
    let mut iterates = vec![x1.to_vec()];
    let mut fvals = vec![f.eval(x1)];
    let mut gnorms = Vec::new();
    let mut x = x1.to_vec();
    let mut y_prev = x1.to_vec();
    for _ in 0..n {
        let g = f.grad(&x);
        gnorms.push(norm(&g));
        let y_next: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - gi / l).collect();
        let x_next: Vec<f64> = y_next
            .iter()
            .zip(&y_prev)
            .map(|(yn, yp)| yn + momentum * (yn - yp))
            .collect();
        let fx = f.eval(&x_next);
        if !fx.is_finite() || x_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "divergence after {} accelerated steps of {}",
                iterates.len(),
                f.name
            )));
        }
        iterates.push(x_next.clone());
        fvals.push(fx);
        y_prev = y_next;
        x = x_next;
    }
    gnorms.push(norm(&f.grad(&x)));
    Ok(Trajectory {
        iterates,
        fvals,
        gnorms,
        schedule: Vec::new(),
    })
}

/// Per-step gap ratios `(f^{k+1} − f*)/(f^k − f*)`.
///
/// Steps whose starting gap is below `1e−14·(1 + |f*|)` are treated as
/// converged and excluded; this avoids 0/0 noise at the double-precision
/// floor.
pub fn empirical_rate(traj: &Trajectory, f_star: f64) -> Vec<f64> {
    let cutoff = 1e-14 * (1.0 + f_star.abs());
    let mut out = Vec::new();
    for w in traj.fvals.windows(2) {
        let den = w[0] - f_star;
        if den > cutoff {
            out.push((w[1] - f_star) / den);
        }
    }
    out
}

/// Sampling specification for grid oracles.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub points_per_dim: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points_per_dim: 2001 }
    }
}

/// Certified PŁ constant on the sampled grid:
/// `inf ‖∇f(x)‖² / (2 (f(x) − f*))` over grid points with a meaningful gap.
///
/// This is an upper bound on the best constant valid on the sampled set; it
/// converges to the true one as the grid refines.
pub fn estimate_pl_constant(f: &TestFunction, grid: &GridSpec) -> Result<f64> {
    let dim = f.dim();
    if grid.points_per_dim < 2 {
        return Err(Error::OutOfRange("grid needs at least 2 points per dim".into()));
    }
    let n = grid.points_per_dim;
    let total = n.pow(dim as u32);
    let mut best = f64::INFINITY;
    let mut x = vec![0.0; dim];
    for idx in 0..total {
        let mut rem = idx;
        for d in 0..dim {
            let i = rem % n;
            rem /= n;
            let (lo, hi) = f.domain_box[d];
            x[d] = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        }
        let gap = f.eval(&x) - f.f_star;
        if gap < 1e-12 {
            continue;
        }
        let g = f.grad(&x);
        let ratio = g.iter().map(|v| v * v).sum::<f64>() / (2.0 * gap);
        best = best.min(ratio);
    }
    if best.is_infinite() {
        return Err(Error::EmptyGrid(
            "no grid point with f(x) - f* above the cutoff".into(),
        ));
    }
    Ok(best)
}

fn quadratic(name: &'static str, eigs: &'static [f64]) -> TestFunction {
    let lam_max = eigs.iter().cloned().fold(0.0_f64, f64::max);
    let lam_min = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
    let lam_min_pos = eigs
        .iter()
        .cloned()
        .filter(|&l| l > 0.0)
        .fold(f64::INFINITY, f64::min);
    // scope restricts reported minimum curvature to mu <= 0; convex
    // quadratics report mu = 0 (still a valid lower curvature bound)
    let cls = CurvatureClass::new(lam_min.min(0.0), lam_max).unwrap();
    let mut spec = FunctionClassSpec::new(cls)
        .with_pl(lam_min_pos)
        .with_quad_func_growth(lam_min_pos)
        .with_quad_grad_growth(lam_min_pos);
    spec.quasar = None;
    TestFunction {
        name,
        eval: Box::new(move |x| {
            x.iter().zip(eigs).map(|(xi, l)| 0.5 * l * xi * xi).sum()
        }),
        grad: Box::new(move |x| x.iter().zip(eigs).map(|(xi, l)| l * xi).collect()),
        f_star: 0.0,
        known_constants: spec,
        domain_box: vec![(-10.0, 10.0); eigs.len()],
    }
}

/// Grid-oracle PŁ constant of `x² + 3 sin²(x)` on `[−10, 10]`, shrunk by 1%.
/// The raw infimum 0.17553098588 is attained near `x = ±2.2017`.
pub const NONCONVEX_PL_CONSTANT: f64 = 0.17377567602;

fn nonconvex_pl_1d() -> TestFunction {
    // f'' = 2 + 6 cos(2x) ranges over [-4, 8]
    let cls = CurvatureClass::new(-4.0, 8.0).unwrap();
    TestFunction {
        name: "nonconvex-pl-1d",
        eval: Box::new(|x| x[0] * x[0] + 3.0 * x[0].sin().powi(2)),
        grad: Box::new(|x| vec![2.0 * x[0] + 3.0 * (2.0 * x[0]).sin()]),
        f_star: 0.0,
        known_constants: FunctionClassSpec::new(cls).with_pl(NONCONVEX_PL_CONSTANT),
        domain_box: vec![(-10.0, 10.0)],
    }
}

fn homogeneous_quartic() -> TestFunction {
    // ||x||^4 on the unit-ish box: Hessian 4||x||² I + 8 x xᵀ, so the maximum
    // curvature on ||x|| <= sqrt(2) is 24. Non-negative homogeneous of degree
    // 4, hence (1, 0)-quasar-convex with x* = 0. No PŁ constant: the gradient
    // flattens faster than the value near the minimizer.
    let cls = CurvatureClass::new(0.0, 24.0).unwrap();
    let mut spec = FunctionClassSpec::new(cls);
    spec.quasar = Some((1.0, 0.0));
    TestFunction {
        name: "homogeneous-quartic-2d",
        eval: Box::new(|x| {
            let n2: f64 = x.iter().map(|v| v * v).sum();
            n2 * n2
        }),
        grad: Box::new(|x| {
            let n2: f64 = x.iter().map(|v| v * v).sum();
            x.iter().map(|v| 4.0 * n2 * v).collect()
        }),
        f_star: 0.0,
        known_constants: spec,
        domain_box: vec![(-1.0, 1.0); 2],
    }
}

fn huber_growth_1d() -> TestFunction {
    // half squared distance to [-1, 1]: convex, C^1 with 1-Lipschitz
    // gradient, flat (non-strongly-convex) minimum set, quadratic functional
    // growth with constant exactly 1
    let cls = CurvatureClass::new(0.0, 1.0).unwrap();
    let spec = FunctionClassSpec::new(cls)
        .with_pl(1.0)
        .with_quad_func_growth(1.0)
        .with_quad_grad_growth(1.0);
    TestFunction {
        name: "flat-bottom-growth-1d",
        eval: Box::new(|x| {
            let d = (x[0].abs() - 1.0).max(0.0);
            0.5 * d * d
        }),
        grad: Box::new(|x| {
            let d = (x[0].abs() - 1.0).max(0.0);
            vec![x[0].signum() * d]
        }),
        f_star: 0.0,
        known_constants: spec,
        domain_box: vec![(-6.0, 6.0)],
    }
}

/// The built-in zoo: diagonal quadratics (including a singular one), the
/// 1-D non-convex PŁ function, a non-negative homogeneous quartic, and a
/// convex flat-bottom function with quadratic functional growth.
pub fn builtin_zoo() -> Vec<TestFunction> {
    vec![
        quadratic("quadratic-0.5-1", &[0.5, 1.0]),
        quadratic("quadratic-iso", &[1.0, 1.0]),
        quadratic("quadratic-singular", &[0.0, 1.0]),
        quadratic("quadratic-0.75-1", &[0.75, 1.0]),
        nonconvex_pl_1d(),
        homogeneous_quartic(),
        huber_growth_1d(),
    ]
}
