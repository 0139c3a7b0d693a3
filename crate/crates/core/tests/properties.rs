//! Property tests over randomized inputs.

use gradrate::classes::{
    interpolation_residual, pl_from_quad_grad_growth, pl_from_quasar, quasar_from_qgg,
    CurvatureClass, DataPoint,
};
use gradrate::rates::{rate_pl, rate_pl_polyak};
use gradrate::sim::{builtin_zoo, empirical_rate, gd_run};
use proptest::prelude::*;

/// Exact first-order data of the diagonal quadratic `x ↦ ½ Σ λ_i x_i²`.
fn quad_point(eigs: &[f64], x: &[f64]) -> DataPoint {
    let g: Vec<f64> = x.iter().zip(eigs).map(|(xi, l)| l * xi).collect();
    let f = x.iter().zip(eigs).map(|(xi, l)| 0.5 * l * xi * xi).sum();
    DataPoint::new(x.to_vec(), g, f).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Data sampled exactly from a quadratic with spectrum inside [mu, L]
    /// satisfies the interpolation inequality for every ordered pair.
    #[test]
    fn interpolation_accepts_exact_quadratic_data(
        lam1 in -0.95_f64..0.95,
        lam2 in -0.95_f64..0.95,
        x1 in proptest::array::uniform2(-3.0_f64..3.0),
        x2 in proptest::array::uniform2(-3.0_f64..3.0),
    ) {
        let cls = CurvatureClass::new(-1.0, 1.0).unwrap();
        let eigs = [lam1, lam2];
        let p = quad_point(&eigs, &x1);
        let q = quad_point(&eigs, &x2);
        let r_pq = interpolation_residual(&cls, &p, &q).unwrap();
        let r_qp = interpolation_residual(&cls, &q, &p).unwrap();
        prop_assert!(r_pq <= 1e-12, "residual {r_pq}");
        prop_assert!(r_qp <= 1e-12, "residual {r_qp}");
    }

    /// The sharpened per-step bound never exceeds the classical one and
    /// stays inside [0, 1].
    #[test]
    fn rate_bound_dominates_and_contracts(
        mu in -3.0_f64..0.0,
        mu_p_frac in 0.01_f64..1.0,
        t_frac in 0.01_f64..0.999,
    ) {
        let l = 1.0;
        let cls = CurvatureClass::new(mu, l).unwrap();
        let mu_p = mu_p_frac * l;
        let t = 2.0 * t_frac / l;
        let ours = rate_pl(&cls, mu_p, t).unwrap().rho;
        let classical = rate_pl_polyak(l, mu_p, t).unwrap().rho;
        prop_assert!(ours <= classical + 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ours));
    }

    /// Converting gradient growth to quasar convexity and back never
    /// inflates the constant, and both PŁ routes stay in (0, L].
    #[test]
    fn conversion_chain_contractive_and_in_range(
        mu_g_frac in 0.01_f64..1.0,
        ell_extra in 0.001_f64..5.0,
    ) {
        let l = 1.0;
        let cls = CurvatureClass::new(-l, l).unwrap();
        let mu_g = mu_g_frac * l;
        let ell = (l / 2.0).max(mu_g) + ell_extra;
        let (gamma, mu_s) = quasar_from_qgg(&cls, mu_g, ell).unwrap();
        let back = gradrate::classes::qgg_from_quasar(gamma, mu_s).unwrap();
        prop_assert!(back <= mu_g + 1e-12, "round trip expanded {mu_g} -> {back}");
        let via_qgg = pl_from_quad_grad_growth(&cls, mu_g).unwrap();
        prop_assert!(via_qgg > 0.0 && via_qgg <= l);
        let via_quasar = pl_from_quasar(gamma, mu_s).unwrap();
        prop_assert!(via_quasar > 0.0 && via_quasar <= l);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Random starts and steps on a zoo quadratic: measured contraction
    /// never beats the worst-case bound.
    #[test]
    fn empirical_ratios_respect_bound(
        x0 in -3.0_f64..3.0,
        y0 in -3.0_f64..3.0,
        t_frac in 0.05_f64..0.95,
    ) {
        let zoo = builtin_zoo();
        let f = zoo.iter().find(|f| f.name == "quadratic-0.5-1").unwrap();
        let cls = f.known_constants.curvature;
        let mu_p = f.known_constants.pl.unwrap();
        let t = 2.0 * t_frac / cls.l();
        let start = [x0, y0];
        if f.eval(&start) - f.f_star < 1e-10 {
            return Ok(());
        }
        let traj = gd_run(f, &start, &vec![t; 6]).unwrap();
        let bound = rate_pl(&cls, mu_p, t).unwrap().rho;
        for r in empirical_rate(&traj, f.f_star) {
            prop_assert!(r <= bound + 1e-10, "ratio {r} above bound {bound} at t={t}");
        }
    }
}
