//! Builders for the performance-estimation SDPs.
//!
//! Each builder emits a [`PepProblem`]: a semidefinite program over a Gram
//! matrix `G ⪰ 0` of abstract gradient / optimal-point vectors and a short
//! vector of free function values, whose optimum is the worst-case ratio
//! `(f(x_last) − f*)/(f(x¹) − f*)` over the function class.
//!
//! Two normalizations are baked into every problem:
//!
//! * `f* = 0` and `f¹ = 1`. The constraint system is positively homogeneous
//!   in `(G, f)`, so fixing the initial gap turns the fractional objective
//!   into a linear one.
//! * translation gauge: `x¹` is pinned to the origin and every position is
//!   expressed relative to it (all constraints depend on differences only),
//!   so positions of iterates are combinations of gradient basis vectors.
//!
//! Every constraint is of the form `tr(M·G) + c·f + d ≤ 0` and carries a
//! structural label so that certificates can address constraints by meaning
//! rather than by index.

use nalgebra::{DMatrix, DVector};

use crate::classes::CurvatureClass;
use crate::{Error, Result};

/// Hard cap on the horizon of the N-step builder; the all-pairs constraint
/// set grows quadratically and the solver is dense.
pub const MAX_QFG_STEPS: u32 = 10;

/// Identifies one of the abstract points of a PEP.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointId {
    /// `x^k` with its gradient `g^k` and value `f^k`; 1-based.
    Iterate(u32),
    /// `y^k`, a projection of `x^k` onto the optimal set: gradient 0, value `f*`.
    Optimal(u32),
}

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PointId::Iterate(k) => write!(f, "x{k}"),
            PointId::Optimal(k) => write!(f, "y{k}"),
        }
    }
}

/// What a constraint encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintLabel {
    /// Two-point interpolation inequality for the ordered pair `(i, j)`.
    Interp { i: PointId, j: PointId },
    /// PŁ bound `f^k − f* ≤ 1/(2 mu_p) ‖g^k‖²` at iterate `k`.
    PlBound { k: u32 },
    /// Growth inequality (functional or gradient, per problem kind) at iterate `k`.
    Growth { k: u32 },
    /// Projection comparison `‖x^k − y^k‖² ≤ ‖x^k − y^l‖²`.
    ProjCompare { k: u32, other: u32 },
    /// `f^k ≥ f*`.
    FvalNonneg { k: u32 },
}

impl std::fmt::Display for ConstraintLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConstraintLabel::Interp { i, j } => write!(f, "interp({i},{j})"),
            ConstraintLabel::PlBound { k } => write!(f, "pl({k})"),
            ConstraintLabel::Growth { k } => write!(f, "growth({k})"),
            ConstraintLabel::ProjCompare { k, other } => write!(f, "proj({k},{other})"),
            ConstraintLabel::FvalNonneg { k } => write!(f, "fnonneg({k})"),
        }
    }
}

/// One inequality `tr(M·G) + c·f + d ≤ 0`.
#[derive(Debug, Clone)]
pub struct PepConstraint {
    pub label: ConstraintLabel,
    pub m: DMatrix<f64>,
    pub c: DVector<f64>,
    pub d: f64,
}

/// Which abstract vector each Gram row stands for, and the pinned gauge.
#[derive(Debug, Clone)]
pub struct GramBasis {
    pub labels: Vec<String>,
    /// Vector fixed at the origin by translation invariance.
    pub pinned: String,
}

/// A finite-dimensional performance-estimation SDP.
///
/// Maximize `objective · f` over `G ⪰ 0` (size `gram_dim`) and the free
/// function values `f` (length `n_fvals`), subject to the constraints.
#[derive(Debug, Clone)]
pub struct PepProblem {
    pub gram_dim: usize,
    pub n_fvals: usize,
    pub basis: GramBasis,
    pub fval_labels: Vec<String>,
    pub constraints: Vec<PepConstraint>,
    pub objective: DVector<f64>,
}

impl PepProblem {
    /// Looks a constraint up by its structural label.
    pub fn constraint_index(&self, label: ConstraintLabel) -> Option<usize> {
        self.constraints.iter().position(|c| c.label == label)
    }

    /// Residual `tr(M·G) + c·f + d` of every constraint at a candidate point.
    pub fn residuals(&self, g: &DMatrix<f64>, fvals: &DVector<f64>) -> Vec<f64> {
        self.constraints
            .iter()
            .map(|con| (&con.m * g).trace() + con.c.dot(fvals) + con.d)
            .collect()
    }

    /// Plain-text record form, one constraint per line:
    /// `label | M row-major | c | d | <=0`, then an `objective` line.
    ///
    /// Meant for cross-checking against an external solver; the format is
    /// documented in the README and is not bit-critical.
    pub fn to_text(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "pep gram_dim={} n_fvals={} basis=[{}] pinned={}",
            self.gram_dim,
            self.n_fvals,
            self.basis.labels.join(","),
            self.basis.pinned
        );
        for con in &self.constraints {
            let m_entries: Vec<String> = con.m.row_iter()
                .flat_map(|r| r.iter().map(|v| format!("{v}")).collect::<Vec<_>>())
                .collect();
            let c_entries: Vec<String> = con.c.iter().map(|v| format!("{v}")).collect();
            let _ = writeln!(
                out,
                "{} | {} | {} | {} | <=0",
                con.label,
                m_entries.join(" "),
                c_entries.join(" "),
                con.d
            );
        }
        let obj: Vec<String> = self.objective.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(out, "objective maximize | {}", obj.join(" "));
        out
    }
}

/// Affine expression of one PEP point over the Gram basis and f-values.
#[derive(Debug, Clone)]
struct PointExpr {
    id: PointId,
    pos: DVector<f64>,
    grad: DVector<f64>,
    fval_coeff: DVector<f64>,
    fval_const: f64,
}

fn outer_sym(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    let ab = a * b.transpose();
    (&ab + ab.transpose()) * 0.5
}

/// Interpolation constraint for the ordered pair `(p, q)` as a Gram-form row.
fn interp_constraint(cls: &CurvatureClass, p: &PointExpr, q: &PointExpr) -> PepConstraint {
    let (mu, l) = (cls.mu(), cls.l());
    let dg = &p.grad - &q.grad;
    let dx = &p.pos - &q.pos;
    let scale = l / (2.0 * (l - mu));
    // LHS quadratic form of the two-point inequality
    let mut m = outer_sym(&dg, &dg) * (scale / l);
    m += outer_sym(&dx, &dx) * (scale * mu);
    // -(2 mu / L) <g_q - g_p, x_q - x_p> = -(2 mu / L) <dg, dx>
    m += outer_sym(&dg, &dx) * (-2.0 * mu / l * scale);
    // move RHS over: - f_p + f_q + <g_q, x_p - x_q>
    m += outer_sym(&q.grad, &dx);
    let c = &q.fval_coeff - &p.fval_coeff;
    let d = q.fval_const - p.fval_const;
    PepConstraint {
        label: ConstraintLabel::Interp { i: p.id, j: q.id },
        m,
        c,
        d,
    }
}

/// `f^k − f* − 1/(2 mu_p)·‖g^k‖² ≤ 0` (with `f* = 0` baked in).
fn pl_constraint(mu_p: f64, p: &PointExpr, k: u32) -> PepConstraint {
    PepConstraint {
        label: ConstraintLabel::PlBound { k },
        m: outer_sym(&p.grad, &p.grad) * (-1.0 / (2.0 * mu_p)),
        c: p.fval_coeff.clone(),
        d: p.fval_const,
    }
}

/// `−f^k ≤ 0` (with `f* = 0`).
fn fval_nonneg(p: &PointExpr, k: u32) -> PepConstraint {
    PepConstraint {
        label: ConstraintLabel::FvalNonneg { k },
        m: DMatrix::zeros(p.pos.nrows(), p.pos.nrows()),
        c: -&p.fval_coeff,
        d: -p.fval_const,
    }
}

/// Worst-case one-step PEP under the PŁ inequality.
///
/// Gram basis `[g¹, g²]`; constraints in the display order of the underlying
/// problem: the two interpolation inequalities (matrices `A1`, `A2`), the two
/// PŁ bounds (`A3`, `A4`), then `f¹ ≥ f*` and `f² ≥ f*`. Objective:
/// maximize `f²`.
pub fn build_pep_pl(cls: &CurvatureClass, mu_p: f64, t: f64) -> Result<PepProblem> {
    if !(t > 0.0 && t < 2.0 / cls.l()) {
        return Err(Error::OutOfRange(format!("step t = {t} must lie in (0, 2/L)")));
    }
    if !(mu_p > 0.0 && mu_p <= cls.l()) {
        return Err(Error::OutOfRange(format!("mu_p = {mu_p} must lie in (0, L]")));
    }
    let gram_dim = 2;
    let e = |i: usize| DVector::from_fn(gram_dim, |r, _| if r == i { 1.0 } else { 0.0 });
    let zero = DVector::zeros(gram_dim);
    let it1 = PointExpr {
        id: PointId::Iterate(1),
        pos: zero.clone(),
        grad: e(0),
        fval_coeff: DVector::zeros(1),
        fval_const: 1.0,
    };
    let it2 = PointExpr {
        id: PointId::Iterate(2),
        pos: e(0) * (-t),
        grad: e(1),
        fval_coeff: DVector::from_element(1, 1.0),
        fval_const: 0.0,
    };
    let constraints = vec![
        interp_constraint(cls, &it2, &it1), // A1
        interp_constraint(cls, &it1, &it2), // A2
        pl_constraint(mu_p, &it1, 1),       // A3
        pl_constraint(mu_p, &it2, 2),       // A4
        fval_nonneg(&it1, 1),
        fval_nonneg(&it2, 2),
    ];
    Ok(PepProblem {
        gram_dim,
        n_fvals: 1,
        basis: GramBasis {
            labels: vec!["g1".into(), "g2".into()],
            pinned: "x1".into(),
        },
        fval_labels: vec!["f2".into()],
        constraints,
        objective: DVector::from_element(1, 1.0),
    })
}

/// One-step PEP under quadratic gradient growth, at `t = 1/L`, `mu = −L`.
///
/// Gram basis `[g¹, g², y¹, y²]` with `x¹` pinned at the origin and
/// `x² = −(1/L)·g¹`. Constraints: the interpolation inequalities over all
/// ordered pairs of `{x¹, x², y¹, y²}`, the two gradient-growth
/// inequalities, the two projection comparisons, and the value bounds.
pub fn build_pep_qgg(l: f64, mu_g: f64) -> Result<PepProblem> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_g > 0.0 && mu_g <= l) {
        return Err(Error::OutOfRange(format!("mu_g = {mu_g} must lie in (0, L]")));
    }
    let cls = CurvatureClass::new(-l, l)?;
    let gram_dim = 4;
    let e = |i: usize| DVector::from_fn(gram_dim, |r, _| if r == i { 1.0 } else { 0.0 });
    let it1 = PointExpr {
        id: PointId::Iterate(1),
        pos: DVector::zeros(gram_dim),
        grad: e(0),
        fval_coeff: DVector::zeros(1),
        fval_const: 1.0,
    };
    let it2 = PointExpr {
        id: PointId::Iterate(2),
        pos: e(0) * (-1.0 / l),
        grad: e(1),
        fval_coeff: DVector::from_element(1, 1.0),
        fval_const: 0.0,
    };
    let opt = |k: u32| PointExpr {
        id: PointId::Optimal(k),
        pos: e(1 + k as usize),
        grad: DVector::zeros(gram_dim),
        fval_coeff: DVector::zeros(1),
        fval_const: 0.0,
    };
    let points = [it1, it2, opt(1), opt(2)];
    let mut constraints = Vec::new();
    for p in &points {
        for q in &points {
            if p.id != q.id {
                constraints.push(interp_constraint(&cls, p, q));
            }
        }
    }
    // <g^k, x^k - y^k> >= mu_g ||y^k - x^k||^2
    for k in 0..2u32 {
        let it = &points[k as usize];
        let y = &points[2 + k as usize];
        let dx = &it.pos - &y.pos;
        let m = outer_sym(&dx, &dx) * mu_g - outer_sym(&it.grad, &dx);
        constraints.push(PepConstraint {
            label: ConstraintLabel::Growth { k: k + 1 },
            m,
            c: DVector::zeros(1),
            d: 0.0,
        });
    }
    // ||x^k - y^k||^2 <= ||x^k - y^l||^2
    for (k, other) in [(1u32, 2u32), (2, 1)] {
        let it = &points[(k - 1) as usize];
        let own = &points[(1 + k) as usize];
        let oth = &points[(1 + other) as usize];
        let d_own = &it.pos - &own.pos;
        let d_oth = &it.pos - &oth.pos;
        constraints.push(PepConstraint {
            label: ConstraintLabel::ProjCompare { k, other },
            m: outer_sym(&d_own, &d_own) - outer_sym(&d_oth, &d_oth),
            c: DVector::zeros(1),
            d: 0.0,
        });
    }
    constraints.push(fval_nonneg(&points[0], 1));
    constraints.push(fval_nonneg(&points[1], 2));
    Ok(PepProblem {
        gram_dim,
        n_fvals: 1,
        basis: GramBasis {
            labels: vec!["g1".into(), "g2".into(), "y1".into(), "y2".into()],
            pinned: "x1".into(),
        },
        fval_labels: vec!["f2".into()],
        constraints,
        objective: DVector::from_element(1, 1.0),
    })
}

/// N-step PEP under quadratic functional growth, at `t_k = 1/L`, `mu = −L`.
///
/// Gram basis `[g¹..g^{N+1}, y¹..y^{N+1}]` with `x¹` pinned at the origin,
/// so `x^k = −(1/L)·Σ_{l<k} g^l` and `gram_dim = 2N + 2`. Constraints:
/// interpolation over all ordered pairs of the `2(N+1)` points, the growth
/// inequalities for `k = 1..N+1`, projection comparisons for all ordered
/// pairs, and `f^k ≥ f*` for every k (the value at `N+1` included: `f*` is
/// the infimum). Objective: maximize `f^{N+1}`.
pub fn build_pep_qfg(l: f64, mu_q: f64, n: u32) -> Result<PepProblem> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::OutOfRange(format!("L = {l} must be positive")));
    }
    if !(mu_q > l / 2.0 && mu_q < l) {
        return Err(Error::OutOfRange(format!("mu_q = {mu_q} must lie in (L/2, L)")));
    }
    if n < 1 {
        return Err(Error::OutOfRange("N must be at least 1".into()));
    }
    if n > MAX_QFG_STEPS {
        return Err(Error::OutOfRange(format!(
            "N = {n} exceeds the problem size guard ({MAX_QFG_STEPS})"
        )));
    }
    let cls = CurvatureClass::new(-l, l)?;
    let np = (n + 1) as usize;
    let gram_dim = 2 * np;
    let n_fvals = n as usize; // f^2 .. f^{N+1}; f^1 = 1 pinned
    let e = |i: usize| DVector::from_fn(gram_dim, |r, _| if r == i { 1.0 } else { 0.0 });
    let mut points = Vec::with_capacity(2 * np);
    for k in 1..=np {
        // x^k = -(1/L) (g^1 + ... + g^{k-1})
        let mut pos = DVector::zeros(gram_dim);
        for l_idx in 0..(k - 1) {
            pos[l_idx] = -1.0 / l;
        }
        let (fval_coeff, fval_const) = if k == 1 {
            (DVector::zeros(n_fvals), 1.0)
        } else {
            (
                DVector::from_fn(n_fvals, |r, _| if r == k - 2 { 1.0 } else { 0.0 }),
                0.0,
            )
        };
        points.push(PointExpr {
            id: PointId::Iterate(k as u32),
            pos,
            grad: e(k - 1),
            fval_coeff,
            fval_const,
        });
    }
    for k in 1..=np {
        points.push(PointExpr {
            id: PointId::Optimal(k as u32),
            pos: e(np + k - 1),
            grad: DVector::zeros(gram_dim),
            fval_coeff: DVector::zeros(n_fvals),
            fval_const: 0.0,
        });
    }
    let mut constraints = Vec::new();
    for p in &points {
        for q in &points {
            if p.id != q.id {
                constraints.push(interp_constraint(&cls, p, q));
            }
        }
    }
    // f^k - f* >= (mu_q/2) ||x^k - y^k||^2
    for k in 0..np {
        let it = &points[k];
        let y = &points[np + k];
        let dx = &it.pos - &y.pos;
        constraints.push(PepConstraint {
            label: ConstraintLabel::Growth { k: (k + 1) as u32 },
            m: outer_sym(&dx, &dx) * (mu_q / 2.0),
            c: -&it.fval_coeff,
            d: -it.fval_const,
        });
    }
    // ||x^k - y^k||^2 <= ||x^k - y^l||^2 for all ordered pairs; k = l is 0 <= 0
    for k in 0..np {
        for other in 0..np {
            if k == other {
                continue;
            }
            let it = &points[k];
            let d_own = &it.pos - &points[np + k].pos;
            let d_oth = &it.pos - &points[np + other].pos;
            constraints.push(PepConstraint {
                label: ConstraintLabel::ProjCompare {
                    k: (k + 1) as u32,
                    other: (other + 1) as u32,
                },
                m: outer_sym(&d_own, &d_own) - outer_sym(&d_oth, &d_oth),
                c: DVector::zeros(n_fvals),
                d: 0.0,
            });
        }
    }
    for k in 0..np {
        constraints.push(fval_nonneg(&points[k], (k + 1) as u32));
    }
    let mut labels: Vec<String> = (1..=np).map(|k| format!("g{k}")).collect();
    labels.extend((1..=np).map(|k| format!("y{k}")));
    Ok(PepProblem {
        gram_dim,
        n_fvals,
        basis: GramBasis {
            labels,
            pinned: "x1".into(),
        },
        fval_labels: (2..=np).map(|k| format!("f{k}")).collect(),
        constraints,
        objective: DVector::from_fn(n_fvals, |r, _| if r == n_fvals - 1 { 1.0 } else { 0.0 }),
    })
}
