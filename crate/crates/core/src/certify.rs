//! Explicit Lagrange-multiplier certificates behind the closed-form bounds.
//!
//! Each per-step bound comes with a family of non-negative multipliers such
//! that the weighted combination of constraint expressions collapses to the
//! bound minus a non-positive quadratic form (exactly zero in the middle
//! step-length regime). This module evaluates those families, verifies the
//! underlying algebraic identities by random sampling, and converts each
//! family into a dual vector for the corresponding SDP so that
//! [`crate::sdp::check_dual_feasibility`] can confirm it certifies the rate.
//!
//! The identities are polynomial in the sampled vectors and function values,
//! so sampling at modest dimension with many draws catches any transcription
//! error with overwhelming probability.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classes::CurvatureClass;
use crate::pep::{ConstraintLabel, PepProblem, PointId};
use crate::rates::StepRegime;
use crate::{Error, Result};

/// Which proof a certificate comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateCase {
    PlCaseI,
    PlCaseII,
    PlCaseIII,
    QfgNStep,
}

/// Parameter set identifying one certificate instance.
#[derive(Debug, Clone, Copy)]
pub enum CertificateParams {
    PlCaseI { cls: CurvatureClass, mu_p: f64, t: f64 },
    PlCaseII { cls: CurvatureClass, mu_p: f64, t: f64 },
    PlCaseIII { cls: CurvatureClass, mu_p: f64, t: f64 },
    QfgNStep { l: f64, mu_q: f64, n: u32 },
}

impl CertificateParams {
    pub fn case(&self) -> CertificateCase {
        match self {
            CertificateParams::PlCaseI { .. } => CertificateCase::PlCaseI,
            CertificateParams::PlCaseII { .. } => CertificateCase::PlCaseII,
            CertificateParams::PlCaseIII { .. } => CertificateCase::PlCaseIII,
            CertificateParams::QfgNStep { .. } => CertificateCase::QfgNStep,
        }
    }
}

/// Multipliers for the short-step regime `t ∈ (0, 1/L)`.
#[derive(Debug, Clone, Copy)]
pub struct CaseIMultipliers {
    pub b1: f64,
    pub b2: f64,
    pub alpha: f64,
}

/// Multipliers for the middle regime (exact identity, no slack form).
#[derive(Debug, Clone, Copy)]
pub struct CaseIiMultipliers {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub a4: f64,
}

/// Scaled weights for the long-step regime.
#[derive(Debug, Clone, Copy)]
pub struct CaseIiiMultipliers {
    /// `(Lt−1)²/β`: weight on the initial gap; equals the rate.
    pub w_f1: f64,
    /// `mu_p·t(2−Lt)/β`: weight on the PŁ bound at the second iterate.
    pub w_pl2: f64,
    /// `(Lt−1)(2−Lt)/β`: weight on the first interpolation inequality.
    pub w_interp_21: f64,
    /// `(Lt−1)/β`: weight on the second interpolation inequality.
    pub w_interp_12: f64,
    pub beta: f64,
}

/// The N-step functional-growth family.
#[derive(Debug, Clone)]
pub struct QfgMultipliers {
    /// Weight on the interpolation pair `(y¹, x^j)`, `j = 1..=N+1`.
    pub interp_y1: Vec<f64>,
    /// Weights on pairs `(y^i, x^j)` for `i = 2..=N`, `j = i..=N+1`.
    pub interp_yi: Vec<(u32, u32, f64)>,
    /// Weight on the growth inequality at `k = j`, `j = 2..=N`.
    pub growth: Vec<(u32, f64)>,
    /// Weight on the growth inequality at `k = 1` (the f¹ coefficient).
    pub growth_first: f64,
    /// Certified N-step rate `(L/mu_q)(2 − 2 mu_q/L)^N`.
    pub rate: f64,
}

fn check_pl_params(cls: &CurvatureClass, mu_p: f64) -> Result<()> {
    if !(mu_p > 0.0 && mu_p <= cls.l()) {
        return Err(Error::OutOfRange(format!("mu_p = {mu_p} must lie in (0, L]")));
    }
    Ok(())
}

/// `alpha = sqrt((L−mu)(mu_p t (mu_p − mu)(Lt − 2) + (L − mu)))` and the
/// derived pair `(b1, b2)`; valid for `t ∈ (0, 1/L)`.
pub fn multipliers_case_i(cls: &CurvatureClass, mu_p: f64, t: f64) -> Result<CaseIMultipliers> {
    check_pl_params(cls, mu_p)?;
    let (mu, l) = (cls.mu(), cls.l());
    if !(t > 0.0 && t < 1.0 / l) {
        return Err(Error::OutOfRange(format!("t = {t} outside case-I regime (0, 1/L)")));
    }
    let radicand = (l - mu) * (mu_p * t * (mu_p - mu) * (l * t - 2.0) + (l - mu));
    if radicand <= 0.0 {
        return Err(Error::OutOfRange(format!(
            "degenerate certificate: radicand {radicand} not positive"
        )));
    }
    let alpha = radicand.sqrt();
    let b1 = (l - mu) * (alpha + mu_p * (1.0 - l * t)) / (alpha * (l - mu + mu_p));
    let b2 = b1 - (alpha * b1 / (l - mu)).powi(2);
    Ok(CaseIMultipliers { b1, b2, alpha })
}

/// The four multipliers of the middle regime `t ∈ [1/L, threshold_high]`.
pub fn multipliers_case_ii(cls: &CurvatureClass, mu_p: f64, t: f64) -> Result<CaseIiMultipliers> {
    check_pl_params(cls, mu_p)?;
    let (mu, l) = (cls.mu(), cls.l());
    let th = StepRegime::of(cls).threshold_high;
    if !(t >= 1.0 / l && t <= th) {
        return Err(Error::OutOfRange(format!(
            "t = {t} outside case-II regime [1/L, {th}]"
        )));
    }
    let den = (l + mu - mu_p) * t - 2.0;
    let a1 = (mu * t - 1.0) / den;
    // -0 -> +0 at the inner seam
    let a2 = (1.0 - l * t) / den + 0.0;
    let a3 = -((l * t - 2.0) * (mu * t - 2.0) - 1.0) * mu_p * t / den;
    let a4 = -mu_p * t / den;
    Ok(CaseIiMultipliers { a1, a2, a3, a4 })
}

/// The `beta`-scaled weights of the long-step regime `t ∈ (threshold_high, 2/L)`.
pub fn multipliers_case_iii(cls: &CurvatureClass, mu_p: f64, t: f64) -> Result<CaseIiiMultipliers> {
    check_pl_params(cls, mu_p)?;
    let l = cls.l();
    let th = StepRegime::of(cls).threshold_high;
    if !(t > th && t < 2.0 / l) {
        return Err(Error::OutOfRange(format!(
            "t = {t} outside case-III regime ({th}, 2/L)"
        )));
    }
    let beta = (l * t - 1.0).powi(2) + mu_p * t * (2.0 - l * t);
    Ok(CaseIiiMultipliers {
        w_f1: (l * t - 1.0).powi(2) / beta,
        w_pl2: mu_p * t * (2.0 - l * t) / beta,
        w_interp_21: (l * t - 1.0) * (2.0 - l * t) / beta,
        w_interp_12: (l * t - 1.0) / beta,
        beta,
    })
}

/// The full weight family of the N-step functional-growth proof.
pub fn multipliers_qfg(l: f64, mu_q: f64, n: u32) -> Result<QfgMultipliers> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_q > l / 2.0 && mu_q < l) {
        return Err(Error::OutOfRange(format!("mu_q = {mu_q} must lie in (L/2, L)")));
    }
    if n < 1 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    let u = 1.0 - mu_q / l;
    let rate = l / mu_q * (2.0 * u).powi(n as i32);
    let pw2 = |e: u32| 2.0_f64.powi(e as i32);
    let interp_y1 = (1..=n + 1)
        .map(|j| pw2(n + 1 - j) * u.powi(n as i32 - 1))
        .collect();
    let mut interp_yi = Vec::new();
    for i in 2..=n {
        for j in i..=n + 1 {
            interp_yi.push((i, j, pw2(n + 1 - j) * (mu_q / l) * u.powi((n - i) as i32)));
        }
    }
    let growth = (2..=n)
        .map(|j| (j, pw2(n + 1 - j) * u.powi((n - j) as i32)))
        .collect();
    let growth_first = pw2(n) * u.powi(n as i32 - 1) + rate;
    Ok(QfgMultipliers {
        interp_y1,
        interp_yi,
        growth,
        growth_first,
        rate,
    })
}

/// Named multiplier family plus the rate it certifies.
#[derive(Debug, Clone)]
pub struct Certificate {
    pub params: CertificateParams,
    /// Flat named view of the multipliers, for reporting.
    pub multipliers: Vec<(String, f64)>,
    rate: f64,
}

impl Certificate {
    /// Evaluates the multiplier family for the given parameters and checks
    /// the non-negativity the proofs assert.
    pub fn new(params: CertificateParams) -> Result<Self> {
        let mut named = Vec::new();
        let rate;
        match params {
            CertificateParams::PlCaseI { cls, mu_p, t } => {
                let m = multipliers_case_i(&cls, mu_p, t)?;
                named.push(("b1".to_string(), m.b1));
                named.push(("b2".to_string(), m.b2));
                named.push(("alpha".to_string(), m.alpha));
                named.push(("1-b1".to_string(), 1.0 - m.b1));
                rate = m.b1 - m.b2;
            }
            CertificateParams::PlCaseII { cls, mu_p, t } => {
                let m = multipliers_case_ii(&cls, mu_p, t)?;
                named.push(("a1".to_string(), m.a1));
                named.push(("a2".to_string(), m.a2));
                named.push(("a3".to_string(), m.a3));
                named.push(("a4".to_string(), m.a4));
                rate = 1.0 - m.a3 - m.a4;
            }
            CertificateParams::PlCaseIII { cls, mu_p, t } => {
                let m = multipliers_case_iii(&cls, mu_p, t)?;
                named.push(("w_f1".to_string(), m.w_f1));
                named.push(("w_pl2".to_string(), m.w_pl2));
                named.push(("w_interp_21".to_string(), m.w_interp_21));
                named.push(("w_interp_12".to_string(), m.w_interp_12));
                rate = m.w_f1;
            }
            CertificateParams::QfgNStep { l, mu_q, n } => {
                let m = multipliers_qfg(l, mu_q, n)?;
                for (j, w) in m.interp_y1.iter().enumerate() {
                    named.push((format!("interp(y1,x{})", j + 1), *w));
                }
                for (i, j, w) in &m.interp_yi {
                    named.push((format!("interp(y{i},x{j})"), *w));
                }
                for (j, w) in &m.growth {
                    named.push((format!("growth({j})"), *w));
                }
                named.push(("growth(1)".to_string(), m.growth_first));
                rate = m.rate;
            }
        }
        for (name, v) in &named {
            if name != "alpha" && *v < -1e-12 {
                return Err(Error::OutOfRange(format!(
                    "multiplier {name} = {v} negative beyond tolerance"
                )));
            }
        }
        Ok(Self {
            params,
            multipliers: named,
            rate,
        })
    }

    /// The contraction factor this certificate proves.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// Verifies the proof identity on random data; see [`verify_identity`].
    pub fn verify_identity(&self, n_samples: usize, dim: usize, seed: u64) -> Result<f64> {
        verify_identity(&self.params, n_samples, dim, seed)
    }

    /// Dual vector for the matching PEP, addressed by constraint label.
    pub fn dual_vector(&self, prob: &PepProblem) -> Result<DVector<f64>> {
        let mut duals = DVector::zeros(prob.constraints.len());
        let mut set = |label: ConstraintLabel, v: f64| -> Result<()> {
            let idx = prob.constraint_index(label).ok_or_else(|| {
                Error::Solver(format!("problem lacks constraint {label}"))
            })?;
            duals[idx] = v;
            Ok(())
        };
        let interp = |i, j| ConstraintLabel::Interp {
            i: PointId::Iterate(i),
            j: PointId::Iterate(j),
        };
        match self.params {
            CertificateParams::PlCaseI { cls, mu_p, t } => {
                let m = multipliers_case_i(&cls, mu_p, t)?;
                set(interp(1, 2), m.b1)?;
                set(ConstraintLabel::PlBound { k: 1 }, m.b2)?;
                set(ConstraintLabel::PlBound { k: 2 }, 1.0 - m.b1)?;
            }
            CertificateParams::PlCaseII { cls, mu_p, t } => {
                let m = multipliers_case_ii(&cls, mu_p, t)?;
                set(interp(1, 2), m.a1)?;
                set(interp(2, 1), m.a2)?;
                set(ConstraintLabel::PlBound { k: 1 }, m.a3)?;
                set(ConstraintLabel::PlBound { k: 2 }, m.a4)?;
            }
            CertificateParams::PlCaseIII { cls, mu_p, t } => {
                let m = multipliers_case_iii(&cls, mu_p, t)?;
                set(interp(2, 1), m.w_interp_21)?;
                set(interp(1, 2), m.w_interp_12)?;
                set(ConstraintLabel::PlBound { k: 2 }, m.w_pl2)?;
            }
            CertificateParams::QfgNStep { l, mu_q, n } => {
                let m = multipliers_qfg(l, mu_q, n)?;
                for (j, w) in m.interp_y1.iter().enumerate() {
                    set(
                        ConstraintLabel::Interp {
                            i: PointId::Optimal(1),
                            j: PointId::Iterate(j as u32 + 1),
                        },
                        *w,
                    )?;
                }
                for (i, j, w) in &m.interp_yi {
                    set(
                        ConstraintLabel::Interp {
                            i: PointId::Optimal(*i),
                            j: PointId::Iterate(*j),
                        },
                        *w,
                    )?;
                }
                for (j, w) in &m.growth {
                    set(ConstraintLabel::Growth { k: *j }, *w)?;
                }
                set(ConstraintLabel::Growth { k: 1 }, m.growth_first)?;
            }
        }
        Ok(duals)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller; the identities are polynomial so the exact law is irrelevant
    let u1: f64 = rng.gen::<f64>().max(1e-12);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

fn rand_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim).map(|_| scale * normal(rng)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

/// Samples random first-order data and returns the maximum normalized
/// residual of the proof identity over the samples.
///
/// Residuals are normalized by `1 + max |term|` per sample so the tolerance
/// is dimensionless. `scale` inflates all sampled quantities (used by the
/// homogeneity test).
pub fn verify_identity_scaled(
    params: &CertificateParams,
    n_samples: usize,
    dim: usize,
    seed: u64,
    scale: f64,
) -> Result<f64> {
    if dim < 2 {
        return Err(Error::OutOfRange("sampling dimension must be at least 2".into()));
    }
    let cert = Certificate::new(*params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..n_samples {
        let (raw, magnitude) = match params {
            CertificateParams::PlCaseI { cls, mu_p, t }
            | CertificateParams::PlCaseII { cls, mu_p, t }
            | CertificateParams::PlCaseIII { cls, mu_p, t } => {
                pl_identity_residual(params.case(), cls, *mu_p, *t, &cert, &mut rng, dim, scale)
            }
            CertificateParams::QfgNStep { l, mu_q, n } => {
                qfg_identity_residual(*l, *mu_q, *n, &mut rng, dim, scale)?
            }
        };
        worst = worst.max(raw.abs() / (1.0 + magnitude));
    }
    Ok(worst)
}

/// [`verify_identity_scaled`] at unit scale.
pub fn verify_identity(
    params: &CertificateParams,
    n_samples: usize,
    dim: usize,
    seed: u64,
) -> Result<f64> {
    verify_identity_scaled(params, n_samples, dim, seed, 1.0)
}

#[allow(clippy::too_many_arguments)]
fn pl_identity_residual(
    case: CertificateCase,
    cls: &CurvatureClass,
    mu_p: f64,
    t: f64,
    cert: &Certificate,
    rng: &mut ChaCha8Rng,
    dim: usize,
    scale: f64,
) -> (f64, f64) {
    let (mu, l) = (cls.mu(), cls.l());
    let g1 = rand_vec(rng, dim, scale);
    let g2 = rand_vec(rng, dim, scale);
    let f1 = scale * scale * normal(rng);
    let f2 = scale * scale * normal(rng);
    let fstar = scale * scale * normal(rng);

    let q = (norm_sq(&g2)
        + (1.0 + mu * l * t * t - 2.0 * mu * t) * norm_sq(&g1)
        + 2.0 * (mu * t - 1.0) * dot(&g1, &g2))
        / (2.0 * (l - mu));
    let pl1 = f1 - fstar - norm_sq(&g1) / (2.0 * mu_p);
    let pl2 = f2 - fstar - norm_sq(&g2) / (2.0 * mu_p);
    let interp_21 = q - f2 + f1 - t * norm_sq(&g1);
    let interp_12 = q - f1 + f2 + t * dot(&g1, &g2);

    let by = |name: &str| {
        cert.multipliers
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| *v)
            .expect("multiplier present")
    };

    let raw = match case {
        CertificateCase::PlCaseI => {
            let (b1, b2, alpha) = (by("b1"), by("b2"), by("alpha"));
            let c1 = (alpha + mu_p * (1.0 - l * t)) / (l - mu + mu_p);
            let w: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| c1 * a - b).collect();
            (f2 - fstar) - (b1 - b2) * (f1 - fstar) - b2 * pl1 - (1.0 - b1) * pl2
                - b1 * interp_12
                + (1.0 - l * t) / (2.0 * alpha) * norm_sq(&w)
        }
        CertificateCase::PlCaseII => {
            let (a1, a2, a3, a4) = (by("a1"), by("a2"), by("a3"), by("a4"));
            (f2 - fstar) - (1.0 - a3 - a4) * (f1 - fstar) - a3 * pl1 - a4 * pl2
                - a1 * interp_12
                - a2 * interp_21
        }
        CertificateCase::PlCaseIII => {
            let beta = (l * t - 1.0).powi(2) + mu_p * t * (2.0 - l * t);
            let s = (l * t - 1.0).sqrt();
            let w: Vec<f64> = g1.iter().zip(&g2).map(|(a, b)| s * a + b / s).collect();
            let coef = (1.0 - l * t) * (mu * t * (l * t - 2.0) + 2.0 * (1.0 - l * t) + 1.0)
                / (2.0 * beta * (l - mu));
            (f2 - fstar) - by("w_f1") * (f1 - fstar) - by("w_pl2") * pl2
                - by("w_interp_21") * interp_21
                - by("w_interp_12") * interp_12
                + coef * norm_sq(&w)
        }
        CertificateCase::QfgNStep => unreachable!(),
    };
    let magnitude = norm_sq(&g1) + norm_sq(&g2) + f1.abs() + f2.abs() + fstar.abs();
    (raw, magnitude)
}

fn qfg_identity_residual(
    l: f64,
    mu_q: f64,
    n: u32,
    rng: &mut ChaCha8Rng,
    dim: usize,
    scale: f64,
) -> Result<(f64, f64)> {
    let m = multipliers_qfg(l, mu_q, n)?;
    let np = (n + 1) as usize;
    let x1 = rand_vec(rng, dim, scale);
    let gs: Vec<Vec<f64>> = (0..np).map(|_| rand_vec(rng, dim, scale)).collect();
    let ys: Vec<Vec<f64>> = (0..np).map(|_| rand_vec(rng, dim, scale)).collect();
    let fs: Vec<f64> = (0..np).map(|_| scale * scale * normal(rng)).collect();
    let fstar = scale * scale * normal(rng);

    // x^j = x1 - (1/L) sum_{l<j} g^l
    let mut xs = vec![x1.clone()];
    for j in 1..np {
        let prev = &xs[j - 1];
        let x: Vec<f64> = prev
            .iter()
            .zip(&gs[j - 1])
            .map(|(p, g)| p - g / l)
            .collect();
        xs.push(x);
    }

    // interpolation expression for the pair (y^i, x^j), mu = -L, t = 1/L
    let ie = |i: usize, j: usize| -> f64 {
        let dyx: Vec<f64> = ys[i].iter().zip(&xs[j]).map(|(y, x)| y - x).collect();
        let shifted: Vec<f64> = dyx.iter().zip(&gs[j]).map(|(d, g)| d + g / l).collect();
        fstar - fs[j] - dot(&gs[j], &dyx) - norm_sq(&gs[j]) / (2.0 * l)
            + l / 4.0 * norm_sq(&shifted)
    };
    // growth expression at iterate k
    let gr = |k: usize| -> f64 {
        let d: Vec<f64> = ys[k].iter().zip(&xs[k]).map(|(y, x)| y - x).collect();
        fs[k] - fstar - mu_q / 2.0 * norm_sq(&d)
    };

    let u = 1.0 - mu_q / l;
    let mut lhs = (fs[np - 1] - fstar) - m.rate * (fs[0] - fstar);
    for (j, w) in m.interp_y1.iter().enumerate() {
        lhs += w * ie(0, j);
    }
    for (i, j, w) in &m.interp_yi {
        lhs += w * ie(*i as usize - 1, *j as usize - 1);
    }
    for (j, w) in &m.growth {
        lhs += w * gr(*j as usize - 1);
    }
    lhs += m.growth_first * gr(0);

    // the negative-quadratic right-hand side
    let total_g: Vec<f64> = (0..dim)
        .map(|k| gs.iter().map(|g| g[k]).sum::<f64>() / l)
        .collect();
    let dev = |i: usize| -> f64 {
        let v: Vec<f64> = (0..dim)
            .map(|k| ys[i][k] - x1[k] + total_g[k])
            .collect();
        norm_sq(&v)
    };
    let mut rhs = -(l / 4.0) * u.powi(n as i32 - 1) * dev(0);
    for i in 2..=n as usize {
        rhs -= mu_q / 4.0 * u.powi((n as usize - i) as i32) * dev(i - 1);
    }

    let magnitude = gs.iter().map(|g| norm_sq(g)).sum::<f64>()
        + ys.iter().map(|y| norm_sq(y)).sum::<f64>()
        + norm_sq(&x1)
        + fs.iter().map(|f| f.abs()).sum::<f64>()
        + fstar.abs();
    Ok((lhs - rhs, magnitude))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cls(mu: f64, l: f64) -> CurvatureClass {
        CurvatureClass::new(mu, l).unwrap()
    }

    #[test]
    fn case_i_alpha_spot_value() {
        let m = multipliers_case_i(&cls(-1.0, 1.0), 0.5, 0.5).unwrap();
        assert_relative_eq!(m.alpha, 2.875_f64.sqrt(), epsilon = 1e-15);
        assert!(m.b1 >= 0.0 && m.b2 >= 0.0);
    }

    #[test]
    fn case_i_degenerates_smoothly_to_seam() {
        // the residual quadratic's coefficient (1 - Lt)/(2 alpha) -> 0
        let c = cls(-1.0, 1.0);
        let m = multipliers_case_i(&c, 0.5, 1.0 - 1e-9).unwrap();
        let coef = (1.0 - 1.0 * (1.0 - 1e-9)) / (2.0 * m.alpha);
        assert!(coef.abs() < 1e-9);
        assert!(multipliers_case_i(&c, 0.5, 1.0).is_err());
    }

    #[test]
    fn case_i_b2_nonnegative_on_grid() {
        for &(mu, l) in &[(-1.0, 1.0), (0.0, 1.0), (-3.0, 2.0)] {
            let c = cls(mu, l);
            for j in 1..=10 {
                let mu_p = j as f64 / 10.0 * l;
                for k in 1..20 {
                    let t = k as f64 / 20.0 / l;
                    let m = multipliers_case_i(&c, mu_p, t).unwrap();
                    assert!(m.b1 >= -1e-12, "b1 < 0 at mu={mu} L={l} mu_p={mu_p} t={t}");
                    assert!(m.b2 >= -1e-12, "b2 < 0 at mu={mu} L={l} mu_p={mu_p} t={t}");
                }
            }
        }
    }

    #[test]
    fn case_ii_spot_values() {
        let m = multipliers_case_ii(&cls(-1.0, 1.0), 0.5, 1.0).unwrap();
        assert_relative_eq!(m.a1, 0.8, epsilon = 1e-15);
        assert_relative_eq!(m.a2, 0.0, epsilon = 1e-15);
        assert_relative_eq!(m.a3, 0.4, epsilon = 1e-15);
        assert_relative_eq!(m.a4, 0.2, epsilon = 1e-15);
        // 1 - a3 - a4 equals the case-II rate
        let rate = crate::rates::rate_pl(&cls(-1.0, 1.0), 0.5, 1.0).unwrap().rho;
        assert_relative_eq!(1.0 - m.a3 - m.a4, rate, epsilon = 1e-15);
    }

    #[test]
    fn case_ii_a2_vanishes_at_inner_seam() {
        let m = multipliers_case_ii(&cls(-2.0, 1.0), 0.7, 1.0).unwrap();
        assert_relative_eq!(m.a2, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn case_ii_denominator_negative_throughout_regime() {
        for &(mu, l) in &[(-1.0, 1.0), (0.0, 1.0), (-4.0, 1.5)] {
            let c = cls(mu, l);
            let th = StepRegime::of(&c).threshold_high;
            for j in 1..=10 {
                let mu_p = j as f64 / 10.0 * l;
                for k in 0..=20 {
                    let t = 1.0 / l + k as f64 / 20.0 * (th - 1.0 / l);
                    let den = (l + mu - mu_p) * t - 2.0;
                    assert!(den < 0.0, "den = {den} at mu={mu} L={l} mu_p={mu_p} t={t}");
                    let m = multipliers_case_ii(&c, mu_p, t).unwrap();
                    for v in [m.a1, m.a2, m.a3, m.a4] {
                        assert!(v >= -1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn case_iii_spot_values() {
        let m = multipliers_case_iii(&cls(-1.0, 1.0), 0.5, 1.8).unwrap();
        assert_relative_eq!(m.beta, 0.82, epsilon = 1e-15);
        assert_relative_eq!(m.w_f1, 0.64 / 0.82, epsilon = 1e-14);
        let rate = crate::rates::rate_pl(&cls(-1.0, 1.0), 0.5, 1.8).unwrap().rho;
        assert_relative_eq!(m.w_f1, rate, epsilon = 1e-14);
    }

    #[test]
    fn case_iii_weights_nonnegative_and_beta_positive() {
        for &(mu, l) in &[(-1.0, 1.0), (0.0, 1.0), (-2.0, 1.0)] {
            let c = cls(mu, l);
            let th = StepRegime::of(&c).threshold_high;
            for j in 1..=10 {
                let mu_p = j as f64 / 10.0 * l;
                for k in 1..20 {
                    let t = th + k as f64 / 20.0 * (2.0 / l - th) * 0.999;
                    let m = multipliers_case_iii(&c, mu_p, t).unwrap();
                    assert!(m.beta > 0.0);
                    for v in [m.w_f1, m.w_pl2, m.w_interp_21, m.w_interp_12] {
                        assert!(v >= -1e-12);
                    }
                }
            }
        }
        // weight on the PŁ bound fades out toward t = 2/L
        let m = multipliers_case_iii(&cls(-1.0, 1.0), 0.5, 2.0 - 1e-9).unwrap();
        assert!(m.w_pl2 < 1e-8);
    }

    #[test]
    fn qfg_multiplier_spot_values() {
        let m = multipliers_qfg(1.0, 0.75, 1).unwrap();
        assert_relative_eq!(m.growth_first, 2.0 + 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(m.interp_y1.len(), 2);
        assert_relative_eq!(m.interp_y1[0], 2.0);
        assert_relative_eq!(m.interp_y1[1], 1.0);
        assert!(m.interp_yi.is_empty());
        assert!(m.growth.is_empty());
        assert_relative_eq!(m.rate, 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn qfg_weights_nonnegative_and_vanish_as_muq_tends_to_l() {
        for n in 1..=5u32 {
            for k in 1..100 {
                let mu_q = 0.51 + k as f64 / 100.0 * 0.48;
                let m = multipliers_qfg(1.0, mu_q, n).unwrap();
                for w in &m.interp_y1 {
                    assert!(*w >= 0.0);
                }
                for (_, _, w) in &m.interp_yi {
                    assert!(*w >= 0.0);
                }
                for (_, w) in &m.growth {
                    assert!(*w >= 0.0);
                }
                assert!(m.growth_first >= 0.0);
            }
        }
        let m = multipliers_qfg(1.0, 1.0 - 1e-12, 3).unwrap();
        for w in &m.interp_y1 {
            assert!(*w < 1e-11); // u^{N-1} factor kills them
        }
    }

    #[test]
    fn identities_hold_for_all_cases() {
        let c = cls(-1.0, 1.0);
        let cases = [
            CertificateParams::PlCaseI { cls: c, mu_p: 0.5, t: 0.5 },
            CertificateParams::PlCaseII { cls: c, mu_p: 0.5, t: 1.0 },
            CertificateParams::PlCaseIII { cls: c, mu_p: 0.5, t: 1.8 },
            CertificateParams::QfgNStep { l: 1.0, mu_q: 0.75, n: 2 },
        ];
        for params in &cases {
            let res = verify_identity(params, 1000, 3, 42).unwrap();
            assert!(res <= 1e-10, "residual {res} for {:?}", params.case());
        }
    }

    #[test]
    fn identity_zero_at_zero_gradients() {
        // case I with g1 = g2 = 0 and equal values: every term vanishes
        let c = cls(-1.0, 1.0);
        let cert = Certificate::new(CertificateParams::PlCaseI { cls: c, mu_p: 0.5, t: 0.5 })
            .unwrap();
        let by = |name: &str| {
            cert.multipliers
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .unwrap()
        };
        let (b1, b2) = (by("b1"), by("b2"));
        // f1 = f2 = fstar = 0, g = 0: combination reduces to 0
        let raw: f64 = 0.0 - (b1 - b2) * 0.0 - b2 * 0.0 - (1.0 - b1) * 0.0 - b1 * 0.0;
        assert_eq!(raw, 0.0);
    }

    #[test]
    fn qfg_identity_deeper_horizons() {
        for n in 1..=4u32 {
            let params = CertificateParams::QfgNStep { l: 1.0, mu_q: 0.8, n };
            let res = verify_identity(&params, 500, 4, 7).unwrap();
            assert!(res <= 1e-10, "N = {n}: residual {res}");
        }
    }

    #[test]
    fn residual_scales_quadratically_at_worst() {
        let c = cls(-1.0, 1.0);
        let params = CertificateParams::PlCaseII { cls: c, mu_p: 0.5, t: 1.2 };
        let r1 = verify_identity_scaled(&params, 200, 4, 11, 1.0).unwrap();
        let r2 = verify_identity_scaled(&params, 200, 4, 11, 2.0).unwrap();
        // doubling all sampled data multiplies the raw residual by at most ~4
        // (quadratic forms); the normalization absorbs most of it
        assert!(r2 <= 5.0 * r1 + 1e-13, "r1 = {r1}, r2 = {r2}");
    }

    #[test]
    fn certificates_are_valid_sdp_duals() {
        use crate::pep::{build_pep_pl, build_pep_qfg};
        use crate::sdp::{check_dual_feasibility, dual_objective};

        let c = cls(-1.0, 1.0);
        for (params, prob) in [
            (
                CertificateParams::PlCaseI { cls: c, mu_p: 0.5, t: 0.5 },
                build_pep_pl(&c, 0.5, 0.5).unwrap(),
            ),
            (
                CertificateParams::PlCaseII { cls: c, mu_p: 0.5, t: 1.0 },
                build_pep_pl(&c, 0.5, 1.0).unwrap(),
            ),
            (
                CertificateParams::PlCaseIII { cls: c, mu_p: 0.5, t: 1.8 },
                build_pep_pl(&c, 0.5, 1.8).unwrap(),
            ),
            (
                CertificateParams::QfgNStep { l: 1.0, mu_q: 0.75, n: 2 },
                build_pep_qfg(1.0, 0.75, 2).unwrap(),
            ),
        ] {
            let cert = Certificate::new(params).unwrap();
            let duals = cert.dual_vector(&prob).unwrap();
            let res = check_dual_feasibility(&prob, &duals).unwrap();
            assert!(res <= 1e-8, "dual residual {res} for {:?}", params.case());
            let dobj = dual_objective(&prob, &duals).unwrap();
            assert_relative_eq!(dobj, cert.rate(), epsilon = 1e-10);
        }
    }
}
