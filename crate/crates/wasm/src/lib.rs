//! Browser bindings for the gradrate toolkit.
//!
//! Three interactive surfaces, all returning flat `f64` buffers that the
//! demo page plots on canvases:
//!
//! * [`rate_curve`] / [`optimal_step_point`]: the piecewise worst-case rate
//!   `h(t)` against the classical baseline, with the optimal step;
//! * [`qgg_pep_curve`]: the performance-estimation bound under gradient
//!   growth, solved by the embedded SDP solver right in the browser,
//!   against its closed-form counterpart;
//! * [`simulate`]: gradient descent on a zoo function with the worst-case
//!   envelope overlaid.
//!
//! Everything runs at `L = 1`; rates only depend on the ratios `mu/L`,
//! `mu_p/L`, `mu_g/L`.

use wasm_bindgen::prelude::*;

use gradrate::classes::CurvatureClass;
use gradrate::pep::build_pep_qgg;
use gradrate::rates::{optimal_step, rate_pl, rate_pl_polyak, rate_qgg};
use gradrate::sdp::{solve, SdpStatus, SolveOptions};
use gradrate::sim::{builtin_zoo, gd_run};

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

/// Worst-case rate curve at `L = 1`: `n` rows `[t, h(t), classical(t)]`,
/// flattened.
#[wasm_bindgen]
pub fn rate_curve(mu: f64, mu_p: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    let cls = CurvatureClass::new(mu, 1.0).map_err(err)?;
    let mut out = Vec::with_capacity(3 * n);
    for i in 0..n {
        let t = 2.0 * (i + 1) as f64 / (n + 1) as f64;
        let h = rate_pl(&cls, mu_p, t).map_err(err)?.rho;
        let p = rate_pl_polyak(1.0, mu_p, t).map_err(err)?.rho;
        out.extend_from_slice(&[t, h, p]);
    }
    Ok(out)
}

/// `[t*, h(t*)]` for the class `(mu, 1)` with PŁ constant `mu_p`.
#[wasm_bindgen]
pub fn optimal_step_point(mu: f64, mu_p: f64) -> Result<Vec<f64>, JsValue> {
    let cls = CurvatureClass::new(mu, 1.0).map_err(err)?;
    let t = optimal_step(&cls, mu_p).map_err(err)?;
    let h = rate_pl(&cls, mu_p, t).map_err(err)?.rho;
    Ok(vec![t, h])
}

/// Performance-estimation bound under gradient growth on a `points`-point
/// grid of `mu_g/L ∈ (0.02, 0.98)`: rows `[ratio, pep, closed]`, flattened.
#[wasm_bindgen]
pub fn qgg_pep_curve(points: usize) -> Result<Vec<f64>, JsValue> {
    let mut out = Vec::with_capacity(3 * points);
    for i in 0..points {
        let x = if points == 1 {
            0.5
        } else {
            0.02 + (0.98 - 0.02) * i as f64 / (points - 1) as f64
        };
        let prob = build_pep_qgg(1.0, x).map_err(err)?;
        let sol = solve(&prob, &SolveOptions::default()).map_err(err)?;
        if sol.status != SdpStatus::Optimal {
            return Err(err(format!("solver returned {:?} at {x}", sol.status)));
        }
        let closed = rate_qgg(1.0, x).map_err(err)?.rho;
        out.extend_from_slice(&[x, sol.objective, closed]);
    }
    Ok(out)
}

/// Names of the built-in zoo functions, comma separated.
#[wasm_bindgen]
pub fn zoo_names() -> String {
    builtin_zoo()
        .iter()
        .map(|f| f.name)
        .collect::<Vec<_>>()
        .join(",")
}

/// Gradient descent on a zoo function from `(x, y)` (second coordinate
/// ignored for 1-D entries) with step `t = t_frac·(2/L)`.
///
/// Returns `steps + 1` rows `[gap_k, envelope_k]`, flattened; the envelope
/// is the worst-case bound `gap_0 · rho^k` when a PŁ constant is certified,
/// `NaN` otherwise.
#[wasm_bindgen]
pub fn simulate(
    name: &str,
    x: f64,
    y: f64,
    t_frac: f64,
    steps: usize,
) -> Result<Vec<f64>, JsValue> {
    let zoo = builtin_zoo();
    let f = zoo
        .iter()
        .find(|f| f.name == name)
        .ok_or_else(|| err(format!("unknown function `{name}`")))?;
    let start: Vec<f64> = match f.dim() {
        1 => vec![x],
        _ => vec![x, y],
    };
    let cls = f.known_constants.curvature;
    if !(0.0 < t_frac && t_frac < 1.0) {
        return Err(err("t_frac must lie in (0, 1)"));
    }
    let t = 2.0 * t_frac / cls.l();
    let traj = gd_run(f, &start, &vec![t; steps]).map_err(err)?;
    let rho = match f.known_constants.pl {
        Some(mu_p) => rate_pl(&cls, mu_p, t).map_err(err)?.rho,
        None => f64::NAN,
    };
    let gap0 = traj.fvals[0] - f.f_star;
    let mut out = Vec::with_capacity(2 * traj.fvals.len());
    let mut envelope = gap0;
    for fv in &traj.fvals {
        out.extend_from_slice(&[fv - f.f_star, envelope]);
        envelope *= rho;
    }
    Ok(out)
}
