use std::f64::consts::PI;

mod common;

use cmc_core::geometry::{conformal_ricci_check, ricci, tcc_sample};
use cmc_core::spacetime::{
    core_inequality, counterexample_f, counterexample_fddot, counterexample_fdot, counterexample_tau, Model,
};
use cmc_core::{make_spec, Chart, Family, Point, SpacetimeSpec};
use common::{christoffel_gap, config, counterexample, simpson, warped_ricci};
use proptest::prelude::*;

fn expression() -> SpacetimeSpec {
    make_spec(&Family::Expression {
        psi: "0.1*sin(x)*t + 0.05*t^2".into(),
        sigma: "exp(-t^2)*(1 + 0.3*cos(x)*t)".into(),
        t_min: -0.5,
        t_max: 0.5,
    })
    .unwrap()
}

fn sphere_coords(n: usize, angles: &[f64]) -> Vec<f64> {
    angles[..n].to_vec()
}

#[test]
fn warp_matches_quadrature_of_its_derivative() {
    for eps in [0.5, 0.8, 1.0] {
        for frac in [-0.95, -0.6, -0.1, 0.3, 0.9] {
            let t = frac * eps;
            let want = simpson(|s| -s.powi(3) / (eps * eps - s * s), 0.0, t, 20_000);
            let got = counterexample_f(t, eps).unwrap();
            assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "eps {eps} t {t}: {got} vs {want}");
            let h = 1e-5;
            let fd = (counterexample_f(t + h, eps).unwrap() - counterexample_f(t - h, eps).unwrap()) / (2.0 * h);
            let fdd = (counterexample_fdot(t + h, eps).unwrap() - counterexample_fdot(t - h, eps).unwrap()) / (2.0 * h);
            let dot = counterexample_fdot(t, eps).unwrap();
            let ddot = counterexample_fddot(t, eps).unwrap();
            assert!((dot - fd).abs() <= 1e-6 * (1.0 + dot.abs()));
            assert!((ddot - fdd).abs() <= 1e-5 * (1.0 + ddot.abs()));
            // core inequality is f̈ + ḟ²
            let core = core_inequality(t, eps).unwrap();
            assert!((core - (ddot + dot * dot)).abs() <= 1e-10 * (1.0 + core.abs()));
        }
    }
}

#[test]
fn level_set_mean_curvature_is_minus_n_fdot() {
    for n in 1..4 {
        for t in [-0.7, -0.2, 0.0, 0.45] {
            let tau = counterexample_tau(t, 0.8, n).unwrap();
            assert!((tau + n as f64 * counterexample_fdot(t, 0.8).unwrap()).abs() < 1e-14);
        }
    }
    assert!(counterexample_tau(0.8, 0.8, 2).is_err());
}

#[test]
fn conformal_clock_matches_quadrature() {
    let spec = counterexample(0.8, 2, Chart::Conformal);
    let Model::ConformalWarped { clock, .. } = &spec.model else { panic!("conformal chart expected") };
    let pairs = [(-0.7, -0.2), (-0.3, 0.4), (0.1, 0.75), (-0.79, 0.79)];
    for (a, b) in pairs {
        let want = simpson(|s| (-counterexample_f(s, 0.8).unwrap()).exp(), a, b, 200_000);
        let got = clock.x0_of_t(b) - clock.x0_of_t(a);
        assert!((got - want).abs() <= 1e-9, "[{a}, {b}]: {got} vs {want}");
    }
    for t in [-0.79, -0.5, 0.0, 0.33, 0.79] {
        assert!((clock.t_of_x0(clock.x0_of_t(t)) - t).abs() <= 1e-10);
    }
    let (lo, hi) = clock.x0_range();
    assert!(lo < clock.x0_of_t(-0.79) && clock.x0_of_t(0.79) < hi);
}

#[test]
fn flat_product_has_sphere_ricci_only() {
    let spec = make_spec(&Family::Flat { n: 3, t_min: -1.0, t_max: 1.0 }).unwrap();
    let space = vec![1.1, 0.7, 2.0];
    let r = ricci(&spec, &Point::new(0.2, space.clone())).unwrap().rbar;
    let sigma = [1.0, 1.1f64.sin().powi(2), (1.1f64.sin() * 0.7f64.sin()).powi(2)];
    for a in 0..4 {
        for b in 0..4 {
            let want = if a == b && a > 0 { 2.0 * sigma[a - 1] } else { 0.0 };
            assert!((r[a][b] - want).abs() < 1e-12, "R[{a}][{b}] = {}", r[a][b]);
        }
    }
}

#[test]
fn counterexample_tcc_holds_on_samples() {
    for eps in [0.5, 0.8, 1.0] {
        for n in [1, 2, 3] {
            let r = tcc_sample(&counterexample(eps, n, Chart::Gaussian), 2000, 11).unwrap();
            assert!(r.min >= -1e-10, "eps {eps} n {n}: {}", r.min);
            assert_eq!(r.accepted, 2000);
        }
    }
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn christoffels_match_metric_differences(
        n in 1usize..4,
        conformal in any::<bool>(),
        frac in -0.9f64..0.9,
        angles in prop::collection::vec(0.4f64..(PI - 0.4), 3),
    ) {
        let chart = if conformal { Chart::Conformal } else { Chart::Gaussian };
        let spec = counterexample(0.8, n, chart);
        let (lo, hi) = spec.interval;
        let x0 = 0.5 * (lo + hi) + 0.5 * frac * (hi - lo);
        let mut coords = vec![x0];
        coords.extend(sphere_coords(n, &angles));
        prop_assert!(christoffel_gap(&spec, &coords) <= 1e-6);
    }

    #[test]
    fn expression_christoffels_match_metric_differences(t in -0.45f64..0.45, x in -3.0f64..3.0) {
        prop_assert!(christoffel_gap(&expression(), &[t, x]) <= 1e-6);
    }

    #[test]
    fn ricci_matches_closed_forms(
        n in 1usize..4,
        eps in 0.5f64..1.0,
        conformal in any::<bool>(),
        frac in -0.95f64..0.95,
        angles in prop::collection::vec(0.4f64..(PI - 0.4), 3),
    ) {
        let chart = if conformal { Chart::Conformal } else { Chart::Gaussian };
        let spec = counterexample(eps, n, chart);
        let (lo, hi) = spec.interval;
        let x0 = 0.5 * (lo + hi) + 0.5 * frac * (hi - lo);
        let space = sphere_coords(n, &angles);
        let got = ricci(&spec, &Point::new(x0, space.clone())).unwrap();
        let want = warped_ricci(&spec, eps, x0, &space);
        let scale = want.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.rbar.iter().flatten().zip(want.iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-6 * scale, "{a} vs {b}");
        }
        prop_assert!(conformal_ricci_check(&got) <= 1e-6 * scale);
    }

    #[test]
    fn ricci_is_symmetric_and_conformally_consistent(t in -0.45f64..0.45, x in -3.0f64..3.0) {
        let data = ricci(&expression(), &Point::new(t, vec![x])).unwrap();
        prop_assert!((data.rbar[0][1] - data.rbar[1][0]).abs() <= 1e-12);
        prop_assert!(conformal_ricci_check(&data) <= 1e-6);
    }
}
