//! Function classes and the conversion theorems between their constants.
//!
//! A function belongs to the curvature class `F_{mu,L}` when both
//! `L/2·‖·‖² − f` and `f − mu/2·‖·‖²` are convex. On top of that class the
//! analysis uses four growth conditions — the PŁ inequality, quadratic
//! functional growth, quadratic gradient growth and quasar convexity — whose
//! constants convert into one another. Every conversion here is a statement
//! about constants under the hypothesis of the source condition; none of
//! these functions inspects an actual function (the simulator's oracles do
//! that).

use crate::{Error, Result};

/// Curvature bounds `(mu, L)` of a smooth function class.
///
/// Scope is `L ∈ (0, ∞)` and `mu ∈ (−∞, 0]`: the non-convex-to-convex range
/// that the rate bounds cover. `mu ≥ 0` would mean convexity, and positive
/// `mu` is deliberately rejected here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureClass {
    mu: f64,
    l: f64,
}

impl CurvatureClass {
    /// Validates `(mu, L)` and constructs the class.
    ///
    /// Rejects non-finite inputs, `L ≤ 0`, `mu > 0` and `mu ≥ L`.
    pub fn new(mu: f64, l: f64) -> Result<Self> {
        if !mu.is_finite() || !l.is_finite() {
            return Err(Error::NonFinite(format!("curvature pair ({mu}, {l})")));
        }
        if l <= 0.0 {
            return Err(Error::OutOfRange(format!("L = {l} must be positive")));
        }
        if mu > 0.0 {
            return Err(Error::OutOfRange(format!(
                "mu = {mu} must be non-positive (convex case is mu = 0)"
            )));
        }
        if mu >= l {
            return Err(Error::OutOfRange(format!("mu = {mu} must be below L = {l}")));
        }
        Ok(Self { mu, l })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn l(&self) -> f64 {
        self.l
    }
}

/// Validates a curvature pair. Thin alias for [`CurvatureClass::new`].
pub fn validate_class(mu: f64, l: f64) -> Result<CurvatureClass> {
    CurvatureClass::new(mu, l)
}

/// A growth condition with its constant(s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GrowthSpec {
    /// PŁ inequality `f(x) − f* ≤ 1/(2 mu_p) ‖∇f(x)‖²` with `mu_p ∈ (0, L]`.
    Pl { mu_p: f64 },
    /// Quadratic functional growth `f(x) − f* ≥ mu_q/2 · dist(x, X*)²`.
    QuadFuncGrowth { mu_q: f64 },
    /// Quadratic gradient growth `⟨∇f(x), x − x*⟩ ≥ mu_g · dist(x, X*)²`
    /// with `mu_g ∈ (0, L]`.
    QuadGradGrowth { mu_g: f64 },
    /// `(gamma, mu_s)`-quasar convexity with `gamma ∈ (0, 1]`, `mu_s ≥ 0`.
    Quasar { gamma: f64, mu_s: f64 },
}

impl GrowthSpec {
    /// PŁ spec validated against the curvature class.
    ///
    /// Applies the harmless normalization `mu_p = max(mu, mu_p)`; with
    /// `mu ≤ 0` in scope this is a no-op, but it keeps the constructor
    /// correct should positive minimum curvature ever be admitted.
    pub fn pl(cls: &CurvatureClass, mu_p: f64) -> Result<Self> {
        let mu_p = mu_p.max(cls.mu());
        if !(mu_p > 0.0 && mu_p <= cls.l()) {
            return Err(Error::OutOfRange(format!(
                "mu_p = {mu_p} must lie in (0, L] = (0, {}]",
                cls.l()
            )));
        }
        Ok(Self::Pl { mu_p })
    }

    pub fn quad_func_growth(mu_q: f64) -> Result<Self> {
        if !(mu_q > 0.0 && mu_q.is_finite()) {
            return Err(Error::OutOfRange(format!("mu_q = {mu_q} must be positive")));
        }
        Ok(Self::QuadFuncGrowth { mu_q })
    }

    pub fn quad_grad_growth(cls: &CurvatureClass, mu_g: f64) -> Result<Self> {
        if !(mu_g > 0.0 && mu_g <= cls.l()) {
            return Err(Error::OutOfRange(format!(
                "mu_g = {mu_g} must lie in (0, L] = (0, {}]",
                cls.l()
            )));
        }
        Ok(Self::QuadGradGrowth { mu_g })
    }

    pub fn quasar(gamma: f64, mu_s: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1]")));
        }
        if !(mu_s >= 0.0 && mu_s.is_finite()) {
            return Err(Error::OutOfRange(format!("mu_s = {mu_s} must be non-negative")));
        }
        Ok(Self::Quasar { gamma, mu_s })
    }
}

/// Curvature pair plus whatever growth constants are known for a function.
///
/// Single source of truth for the rate formulas: every bound takes its
/// constants from here instead of ad-hoc parameters scattered around.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionClassSpec {
    pub curvature: CurvatureClass,
    pub pl: Option<f64>,
    pub quad_func_growth: Option<f64>,
    pub quad_grad_growth: Option<f64>,
    pub quasar: Option<(f64, f64)>,
}

impl FunctionClassSpec {
    pub fn new(curvature: CurvatureClass) -> Self {
        Self {
            curvature,
            pl: None,
            quad_func_growth: None,
            quad_grad_growth: None,
            quasar: None,
        }
    }

    pub fn with_pl(mut self, mu_p: f64) -> Self {
        self.pl = Some(mu_p);
        self
    }

    pub fn with_quad_func_growth(mut self, mu_q: f64) -> Self {
        self.quad_func_growth = Some(mu_q);
        self
    }

    pub fn with_quad_grad_growth(mut self, mu_g: f64) -> Self {
        self.quad_grad_growth = Some(mu_g);
        self
    }

    pub fn with_quasar(mut self, gamma: f64, mu_s: f64) -> Self {
        self.quasar = Some((gamma, mu_s));
        self
    }
}

/// A first-order sample `(x, ∇f(x), f(x))`.
#[derive(Debug, Clone, PartialEq)]
pub struct DataPoint {
    pub x: Vec<f64>,
    pub g: Vec<f64>,
    pub f: f64,
}

impl DataPoint {
    pub fn new(x: Vec<f64>, g: Vec<f64>, f: f64) -> Result<Self> {
        if x.len() != g.len() {
            return Err(Error::DimensionMismatch(x.len(), g.len()));
        }
        Ok(Self { x, g, f })
    }

    fn dim(&self) -> usize {
        self.x.len()
    }
}

fn diff_norm_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Interpolation residual for the ordered pair `(p_i, p_j)`.
///
/// Returns LHS − RHS of the two-point inequality characterizing membership
/// in `F_{mu,L}`:
///
/// ```text
/// 1/(2(1 − mu/L)) · ( 1/L ‖g_i − g_j‖² + mu ‖x_i − x_j‖²
///                     − 2 mu/L ⟨g_j − g_i, x_j − x_i⟩ )
///   ≤  f_i − f_j − ⟨g_j, x_i − x_j⟩.
/// ```
///
/// A value `≤ 0` means the ordered pair satisfies the inequality. A finite
/// data set extends to a member of the class iff every ordered pair does.
pub fn interpolation_residual(
    cls: &CurvatureClass,
    p_i: &DataPoint,
    p_j: &DataPoint,
) -> Result<f64> {
    if p_i.dim() != p_j.dim() {
        return Err(Error::DimensionMismatch(p_i.dim(), p_j.dim()));
    }
    let (mu, l) = (cls.mu(), cls.l());
    let gg = diff_norm_sq(&p_i.g, &p_j.g);
    let xx = diff_norm_sq(&p_i.x, &p_j.x);
    // <g_j - g_i, x_j - x_i>, expanded without temporaries
    let mut cross = 0.0;
    for k in 0..p_i.dim() {
        cross += (p_j.g[k] - p_i.g[k]) * (p_j.x[k] - p_i.x[k]);
    }
    // single division by 2(1 - mu/L) = 2(L - mu)/L; mu < L so no singularity
    let lhs = (gg / l + mu * xx - 2.0 * mu / l * cross) * l / (2.0 * (l - mu));
    let mut gx = 0.0;
    for k in 0..p_i.dim() {
        gx += p_j.g[k] * (p_i.x[k] - p_j.x[k]);
    }
    let rhs = p_i.f - p_j.f - gx;
    Ok(lhs - rhs)
}

/// Quadratic gradient growth implies PŁ: `mu_p = mu_g² / L`.
pub fn pl_from_quad_grad_growth(cls: &CurvatureClass, mu_g: f64) -> Result<f64> {
    if !(mu_g > 0.0 && mu_g <= cls.l()) {
        return Err(Error::OutOfRange(format!(
            "mu_g = {mu_g} must lie in (0, L] = (0, {}]",
            cls.l()
        )));
    }
    Ok(mu_g * mu_g / cls.l())
}

/// PŁ implies quadratic functional growth with the same constant.
pub fn qfg_from_pl(mu_p: f64) -> Result<f64> {
    if !(mu_p > 0.0 && mu_p.is_finite()) {
        return Err(Error::OutOfRange(format!("mu_p = {mu_p} must be positive")));
    }
    Ok(mu_p)
}

/// Quadratic functional growth implies quadratic gradient growth:
/// `mu_g = (mu_q/2)(1 − mu/L) + mu/2`, valid for `mu_q > −mu·L/(L − mu)`.
pub fn qgg_from_qfg(cls: &CurvatureClass, mu_q: f64) -> Result<f64> {
    let (mu, l) = (cls.mu(), cls.l());
    let floor = -mu * l / (l - mu);
    if !(mu_q > floor && mu_q.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "mu_q = {mu_q} must exceed -mu*L/(L-mu) = {floor}"
        )));
    }
    Ok(mu_q / 2.0 * (1.0 - mu / l) + mu / 2.0)
}

/// Quadratic functional growth implies gradient growth with `mu_g = mu_q/2`,
/// under the extra hypothesis `f(x) − f(x*) ≤ ⟨∇f(x), x − x*⟩` for a
/// projection point `x*`.
///
/// The hypothesis is not checkable from constants; the caller asserts it for
/// the intended function.
pub fn qgg_from_qfg_star(mu_q: f64) -> Result<f64> {
    if !(mu_q > 0.0 && mu_q.is_finite()) {
        return Err(Error::OutOfRange(format!("mu_q = {mu_q} must be positive")));
    }
    Ok(mu_q / 2.0)
}

/// Quasar convexity implies quadratic gradient growth:
/// `mu_g = mu_s·gamma/2 + mu_s·gamma²/4`.
pub fn qgg_from_quasar(gamma: f64, mu_s: f64) -> Result<f64> {
    check_quasar_pair(gamma, mu_s)?;
    Ok(mu_s * gamma / 2.0 + mu_s * gamma * gamma / 4.0)
}

/// Quadratic gradient growth implies quasar convexity:
/// `(gamma, mu_s) = (mu_g/ell, ell − L/2)` for any `ell > max(L/2, mu_g)`.
pub fn quasar_from_qgg(cls: &CurvatureClass, mu_g: f64, ell: f64) -> Result<(f64, f64)> {
    if !(mu_g > 0.0 && mu_g <= cls.l()) {
        return Err(Error::OutOfRange(format!(
            "mu_g = {mu_g} must lie in (0, L] = (0, {}]",
            cls.l()
        )));
    }
    let floor = (cls.l() / 2.0).max(mu_g);
    if !(ell > floor && ell.is_finite()) {
        return Err(Error::OutOfRange(format!(
            "ell = {ell} must strictly exceed max(L/2, mu_g) = {floor}"
        )));
    }
    Ok((mu_g / ell, ell - cls.l() / 2.0))
}

/// Quasar convexity implies PŁ with `mu_p = mu_s·gamma²`.
pub fn pl_from_quasar(gamma: f64, mu_s: f64) -> Result<f64> {
    check_quasar_pair(gamma, mu_s)?;
    if mu_s == 0.0 {
        return Err(Error::OutOfRange(
            "mu_s must be positive for a non-trivial PŁ constant".into(),
        ));
    }
    Ok(mu_s * gamma * gamma)
}

fn check_quasar_pair(gamma: f64, mu_s: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    if !(mu_s >= 0.0 && mu_s.is_finite()) {
        return Err(Error::OutOfRange(format!("mu_s = {mu_s} must be non-negative")));
    }
    Ok(())
}

/// PŁ constant certified by observed linear convergence.
///
/// If one gradient step with `t = 1/L` contracts the optimality gap by a
/// factor `gamma_rate ∈ [0, 1)` everywhere on the initial level set, then
/// the function satisfies the PŁ inequality there with
/// `mu_p = L²(1 − gamma_rate)/(2L − mu)`.
pub fn pl_from_linear_convergence(cls: &CurvatureClass, gamma_rate: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&gamma_rate) {
        return Err(Error::OutOfRange(format!(
            "gamma_rate = {gamma_rate} must lie in [0, 1)"
        )));
    }
    let (mu, l) = (cls.mu(), cls.l());
    Ok(l * l * (1.0 - gamma_rate) / (2.0 * l - mu))
}
