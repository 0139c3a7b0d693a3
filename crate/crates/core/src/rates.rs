//! Closed-form worst-case contraction bounds for the fixed-step gradient
//! method, the piecewise rate curve `h(t)`, and the optimal step length.
//!
//! The central object is the three-regime per-step bound on
//! `(f(x²) − f*)/(f(x¹) − f*)` under curvature `(mu, L)` and the PŁ constant
//! `mu_p`. The regime split is by step length:
//!
//! * case I: `t ∈ (0, 1/L)`;
//! * case II: `t ∈ [1/L, 3/(mu + L + sqrt(mu² − L·mu + L²))]`;
//! * case III: above that threshold up to `2/L`.
//!
//! Boundaries evaluate through case II (its interval is closed). The curve
//! is continuous across both seams and convex on the middle interval, which
//! is what makes the optimal-step computation a bracketed root find.

use crate::classes::CurvatureClass;
use crate::{Error, Result};

/// Which formula produced a bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    CaseI,
    CaseII,
    CaseIII,
    /// The classical descent-lemma rate used as a comparison baseline.
    Baseline,
    /// A bound on an N-step product rather than a single step.
    NStep,
}

/// A worst-case contraction factor on `f − f*`, with provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct RateBound {
    /// Contraction factor; lies in `[0, 1]` whenever the hypotheses hold.
    pub rho: f64,
    pub regime: Regime,
    /// Echo of the inputs the bound was evaluated at.
    pub params: Vec<(&'static str, f64)>,
}

/// Step-length thresholds separating the three regimes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRegime {
    /// `1/L`: seam between case I and case II.
    pub threshold_low: f64,
    /// `3/(mu + L + sqrt(mu² − L·mu + L²))`: seam between case II and III.
    pub threshold_high: f64,
}

impl StepRegime {
    pub fn of(cls: &CurvatureClass) -> Self {
        let (mu, l) = (cls.mu(), cls.l());
        let disc = (mu * mu - l * mu + l * l).sqrt();
        Self {
            threshold_low: 1.0 / l,
            threshold_high: 3.0 / (mu + l + disc),
        }
    }
}

fn check_step(cls: &CurvatureClass, t: f64) -> Result<()> {
    if !(t > 0.0 && t < 2.0 / cls.l()) {
        return Err(Error::OutOfRange(format!(
            "step t = {t} must lie in (0, 2/L) = (0, {})",
            2.0 / cls.l()
        )));
    }
    Ok(())
}

fn check_pl(cls: &CurvatureClass, mu_p: f64) -> Result<()> {
    if !(mu_p > 0.0 && mu_p <= cls.l()) {
        return Err(Error::OutOfRange(format!(
            "mu_p = {mu_p} must lie in (0, L] = (0, {}]",
            cls.l()
        )));
    }
    Ok(())
}

/// Regime tag for a step length `t ∈ (0, 2/L)`.
pub fn regime_of(cls: &CurvatureClass, t: f64) -> Result<Regime> {
    check_step(cls, t)?;
    let thresholds = StepRegime::of(cls);
    Ok(if t < thresholds.threshold_low {
        Regime::CaseI
    } else if t <= thresholds.threshold_high {
        Regime::CaseII
    } else {
        Regime::CaseIII
    })
}

fn case_i(mu: f64, l: f64, mu_p: f64, t: f64) -> f64 {
    let radicand = (l - mu) * (mu - mu_p) * (2.0 - l * t) * mu_p * t + (l - mu) * (l - mu);
    assert!(
        radicand >= 0.0,
        "case I radicand negative at mu={mu}, L={l}, mu_p={mu_p}, t={t}"
    );
    let num = mu_p * (1.0 - l * t) + radicand.sqrt();
    let frac = num / (l - mu + mu_p);
    frac * frac
}

fn case_ii(mu: f64, l: f64, mu_p: f64, t: f64) -> f64 {
    (l * t - 2.0) * (mu * t - 2.0) * mu_p * t / ((l + mu - mu_p) * t - 2.0) + 1.0
}

fn case_iii(l: f64, mu_p: f64, t: f64) -> f64 {
    let a = l * t - 1.0;
    a * a / (a * a + mu_p * t * (2.0 - l * t))
}

/// Per-step worst-case bound under the PŁ inequality (three-regime form).
pub fn rate_pl(cls: &CurvatureClass, mu_p: f64, t: f64) -> Result<RateBound> {
    check_step(cls, t)?;
    check_pl(cls, mu_p)?;
    let (mu, l) = (cls.mu(), cls.l());
    let regime = regime_of(cls, t)?;
    let rho = match regime {
        Regime::CaseI => case_i(mu, l, mu_p, t),
        Regime::CaseII => case_ii(mu, l, mu_p, t),
        Regime::CaseIII => case_iii(l, mu_p, t),
        _ => unreachable!(),
    };
    Ok(RateBound {
        rho,
        regime,
        params: vec![("mu", mu), ("L", l), ("mu_p", mu_p), ("t", t)],
    })
}

/// Evaluates one case's closed form at `t` without enforcing the regime
/// split, for seam-continuity checks and curve exploration.
pub fn rate_pl_formula(cls: &CurvatureClass, mu_p: f64, t: f64, regime: Regime) -> Result<f64> {
    check_step(cls, t)?;
    check_pl(cls, mu_p)?;
    let (mu, l) = (cls.mu(), cls.l());
    match regime {
        Regime::CaseI => Ok(case_i(mu, l, mu_p, t)),
        Regime::CaseII => Ok(case_ii(mu, l, mu_p, t)),
        Regime::CaseIII => Ok(case_iii(l, mu_p, t)),
        _ => Err(Error::OutOfRange(
            "only the three case formulas can be forced".into(),
        )),
    }
}

/// Classical baseline rate `1 − tL(2 − tL)·mu_p/L`.
pub fn rate_pl_polyak(l: f64, mu_p: f64, t: f64) -> Result<RateBound> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(t > 0.0 && t < 2.0 / l) {
        return Err(Error::OutOfRange(format!("step t = {t} must lie in (0, 2/L)")));
    }
    if !(mu_p > 0.0 && mu_p <= l) {
        return Err(Error::OutOfRange(format!("mu_p = {mu_p} must lie in (0, L]")));
    }
    Ok(RateBound {
        rho: 1.0 - t * l * (2.0 - t * l) * mu_p / l,
        regime: Regime::Baseline,
        params: vec![("L", l), ("mu_p", mu_p), ("t", t)],
    })
}

/// Evaluates the piecewise rate curve `h(t)` on a grid.
pub fn h_curve(cls: &CurvatureClass, mu_p: f64, grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    grid.iter()
        .map(|&t| rate_pl(cls, mu_p, t).map(|b| (t, b.rho)))
        .collect()
}

/// Cubic whose root in `[1/L, threshold_high]` is the optimal step.
fn r_cubic(mu: f64, l: f64, mu_p: f64, t: f64) -> f64 {
    l * mu * (l + mu - mu_p) * t * t * t
        - (l * l - mu_p * (l + mu) + 5.0 * l * mu + mu * mu) * t * t
        + 4.0 * (l + mu) * t
        - 4.0
}

/// Optimal fixed step length with respect to the worst-case rate.
///
/// `h` decreases on `(0, 1/L)` and increases past `threshold_high`, and is
/// convex in between, so the minimizer is the root of the cubic `r` on
/// `[1/L, threshold_high]` when a sign change exists there, else the upper
/// threshold. Bisection to 1e−12: the root is unique on the bracket, and the
/// closed-form cubic solution invites cancellation.
pub fn optimal_step(cls: &CurvatureClass, mu_p: f64) -> Result<f64> {
    check_pl(cls, mu_p)?;
    let (mu, l) = (cls.mu(), cls.l());
    let thresholds = StepRegime::of(cls);
    let (mut lo, mut hi) = (thresholds.threshold_low, thresholds.threshold_high);
    let (r_lo, r_hi) = (r_cubic(mu, l, mu_p, lo), r_cubic(mu, l, mu_p, hi));
    if r_lo == 0.0 {
        return Ok(lo);
    }
    if r_hi == 0.0 {
        return Ok(hi);
    }
    if r_lo * r_hi > 0.0 {
        return Ok(thresholds.threshold_high);
    }
    // orient so that r(lo) < 0 < r(hi)
    if r_lo > 0.0 {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo).abs() < 1e-12 {
            return Ok(mid);
        }
        if r_cubic(mu, l, mu_p, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// One-step bound under quadratic gradient growth at `t = 1/L`, `mu = −L`:
/// `(2L² − 2 mu_g²)/(2L² + mu_g²)`.
pub fn rate_qgg(l: f64, mu_g: f64) -> Result<RateBound> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_g > 0.0 && mu_g <= l) {
        return Err(Error::OutOfRange(format!("mu_g = {mu_g} must lie in (0, L]")));
    }
    Ok(RateBound {
        rho: (2.0 * l * l - 2.0 * mu_g * mu_g) / (2.0 * l * l + mu_g * mu_g),
        regime: Regime::CaseII,
        params: vec![("L", l), ("mu_g", mu_g)],
    })
}

/// N-step bound under quadratic functional growth at `t = 1/L`, `mu = −L`:
/// `(L/mu_q)(2 − 2 mu_q/L)^N`, valid for `mu_q ∈ (L/2, L)`.
pub fn rate_qfg_nstep(l: f64, mu_q: f64, n: u32) -> Result<RateBound> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_q > l / 2.0 && mu_q < l) {
        return Err(Error::OutOfRange(format!("mu_q = {mu_q} must lie in (L/2, L)")));
    }
    if n < 1 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    Ok(RateBound {
        rho: l / mu_q * (2.0 - 2.0 * mu_q / l).powi(n as i32),
        regime: Regime::NStep,
        params: vec![("L", l), ("mu_q", mu_q), ("N", n as f64)],
    })
}

/// N-th power of the naive per-step factor obtained by converting `mu_q`
/// into a gradient-growth constant: `((2L² − 2(mu_q − L/2)²)/(2L² + (mu_q − L/2)²))^N`.
///
/// Accepts `mu_q ∈ (L/2, L]` (at `mu_q = L` the per-step factor is still
/// meaningful, unlike the N-step bound above whose hypothesis is open).
pub fn rate_qfg_naive(l: f64, mu_q: f64, n: u32) -> Result<RateBound> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_q > l / 2.0 && mu_q <= l) {
        return Err(Error::OutOfRange(format!("mu_q = {mu_q} must lie in (L/2, L]")));
    }
    if n < 1 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let m = mu_q - l / 2.0;
    let per_step = (2.0 * l * l - 2.0 * m * m) / (2.0 * l * l + m * m);
    Ok(RateBound {
        rho: per_step.powi(n as i32),
        regime: Regime::NStep,
        params: vec![("L", l), ("mu_q", mu_q), ("N", n as f64)],
    })
}

/// One-step bounds under `(gamma, mu_s)`-quasar convexity at `t = 1/L`.
///
/// Returns `(baseline, improved)` where baseline is `1 − gamma²·mu_s/L` and
/// improved is `(2L − 2 mu_s gamma²)/(2L + mu_s gamma²)`; the improved bound
/// never exceeds the baseline.
pub fn rate_quasar(l: f64, gamma: f64, mu_s: f64) -> Result<(RateBound, RateBound)> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::OutOfRange(format!("gamma = {gamma} must lie in (0, 1]")));
    }
    let mu_p = mu_s * gamma * gamma;
    if !(mu_p > 0.0 && mu_p <= l) {
        return Err(Error::OutOfRange(format!(
            "mu_s·gamma² = {mu_p} must lie in (0, L]"
        )));
    }
    let params = vec![("L", l), ("gamma", gamma), ("mu_s", mu_s)];
    let baseline = RateBound {
        rho: 1.0 - mu_p / l,
        regime: Regime::Baseline,
        params: params.clone(),
    };
    let improved = RateBound {
        rho: (2.0 * l - 2.0 * mu_p) / (2.0 * l + mu_p),
        regime: Regime::CaseII,
        params,
    };
    debug_assert!(improved.rho <= baseline.rho + 1e-15);
    Ok((baseline, improved))
}
