use cmc_core::expr::{parse, Expr};
use cmc_core::foliation::{check_ordering, initial_seed, phi_determinant, tau_targets};
use cmc_core::graph::{lorentz_factor, mean_curvature_from_embedding};
use cmc_core::quad::bisect_increasing;
use cmc_core::solver::{harnack_check, jacobian, residual};
use cmc_core::spacetime::counterexample_tau;
use cmc_core::{
    assemble_stability_operator, graph_geometry, make_spec, newton_solve, slice_velocity, sweep, Chart, CmcError,
    Family, Orientation, SliceLayout, SolverOptions, SpacetimeSpec, SweepOptions,
};
use proptest::prelude::*;

const PSI: &str = "0.05*sin(x)*t + 0.02*cos(2*x)";
const SIGMA: &str = "exp(-t^2)*(1 + 0.1*sin(x)*t)";

fn perturbed() -> SpacetimeSpec {
    make_spec(&Family::Expression { psi: PSI.into(), sigma: SIGMA.into(), t_min: -0.5, t_max: 0.5 }).unwrap()
}

fn counterexample(n: usize) -> SpacetimeSpec {
    make_spec(&Family::Counterexample { eps: 0.8, n, chart: Chart::Gaussian }).unwrap()
}

fn tau_inverse(tau: f64, n: usize) -> f64 {
    let edge = 0.8 * (1.0 - 1e-12);
    bisect_increasing(|t| counterexample_tau(t, 0.8, n).unwrap(), tau, -edge, edge)
}

fn tau_prime(t: f64, n: usize) -> f64 {
    let h = 1e-5;
    (counterexample_tau(t + h, 0.8, n).unwrap() - counterexample_tau(t - h, 0.8, n).unwrap()) / (2.0 * h)
}

fn grid_x(spec: &SpacetimeSpec, layout: SliceLayout) -> Vec<f64> {
    (0..layout.len()).map(|i| layout.space::<f64>(spec, i)[0]).collect()
}

/// Trigonometric profile `Σ (a_k sin kx + b_k cos kx)` and its derivative.
#[derive(Clone, Debug)]
struct Profile {
    c: f64,
    modes: Vec<(f64, f64)>,
}

impl Profile {
    fn value(&self, x: f64) -> f64 {
        self.c
            + self
                .modes
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let k = (k + 1) as f64;
                    a * (k * x).sin() + b * (k * x).cos()
                })
                .sum::<f64>()
    }

    fn slope(&self, x: f64) -> f64 {
        self.modes
            .iter()
            .enumerate()
            .map(|(k, (a, b))| {
                let k = (k + 1) as f64;
                k * (a * (k * x).cos() - b * (k * x).sin())
            })
            .sum()
    }
}

/// Length of the graph of `u + s w` in the perturbed metric, by a fine
/// periodic trapezoid rule on the exact profiles.
fn area(psi: &Expr, sigma: &Expr, u: &Profile, w: &Profile, s: f64) -> f64 {
    let m = 4096;
    let h = std::f64::consts::TAU / m as f64;
    (0..m)
        .map(|k| {
            let x = k as f64 * h;
            let t = u.value(x) + s * w.value(x);
            let dt = u.slope(x) + s * w.slope(x);
            psi.eval(t, x).unwrap().exp() * (sigma.eval(t, x).unwrap() - dt * dt).sqrt() * h
        })
        .sum()
}

#[test]
fn homogeneous_leaves_match_bisection() {
    for n in [1, 2, 3] {
        let spec = counterexample(n);
        for tau in [-3.0, -0.5, -0.01, 0.2, 1.7] {
            let seed = initial_seed(&spec, SliceLayout::Homogeneous, tau);
            let (slice, rep) =
                newton_solve(&spec, SliceLayout::Homogeneous, tau, &seed, &SolverOptions::default()).unwrap();
            assert!(rep.converged && !rep.degenerate);
            let want = tau_inverse(tau, n);
            assert!((slice.u[0] - want).abs() <= 1e-10, "n {n} tau {tau}: {} vs {want}", slice.u[0]);
            let v = slice_velocity(&spec, &slice).unwrap();
            let expect = 1.0 / tau_prime(want, n);
            assert!((v.udot[0] - expect).abs() <= 1e-6 * expect, "udot {} vs {expect}", v.udot[0]);
            let geom = graph_geometry(&spec, SliceLayout::Homogeneous, &slice.u).unwrap();
            let op = assemble_stability_operator(&geom, &spec).unwrap();
            assert!((op.lambda_min - tau_prime(want, n)).abs() <= 1e-6 * (1.0 + op.lambda_min));
        }
    }
}

#[test]
fn newton_rejects_a_degenerate_seed() {
    // the constant slice t = 0 is the degenerate maximal slice, where J = 0
    match newton_solve(&counterexample(2), SliceLayout::Homogeneous, -3.0, &[0.0], &SolverOptions::default()) {
        Err(CmcError::DegenerateSlice { lambda_min, .. }) => assert!(lambda_min <= 1e-8),
        other => panic!("expected a degenerate slice, got {other:?}"),
    }
}

#[test]
fn newton_converges_quadratically_on_circle() {
    let spec = counterexample(1);
    let layout = SliceLayout::Circle { n_grid: 64 };
    let x = grid_x(&spec, layout);
    let seed: Vec<f64> = x.iter().map(|x| 0.35 + 0.03 * x.sin()).collect();
    let tau = counterexample_tau(0.4, 0.8, 1).unwrap();
    let (slice, rep) = newton_solve(&spec, layout, tau, &seed, &SolverOptions::default()).unwrap();
    assert!(slice.u.iter().all(|u| (u - 0.4).abs() <= 1e-9));
    let r = &rep.residuals;
    // once in the basin, each residual is at most a constant times the square of the previous
    let k = r.iter().position(|&v| v < 1e-2).unwrap();
    for w in r[k..].windows(2).filter(|w| w[1] > 1e-13) {
        assert!(w[1] <= 10.0 * w[0] * w[0], "{r:?}");
    }
}

#[test]
fn mean_curvature_is_the_first_variation_of_area() {
    let spec = perturbed();
    let (psi, sigma) = (parse(PSI).unwrap(), parse(SIGMA).unwrap());
    let u = Profile { c: 0.1, modes: vec![(0.05, 0.02), (0.0, 0.03)] };
    let w = Profile { c: 0.3, modes: vec![(0.0, 1.0), (0.2, 0.0), (0.5, 0.0)] };
    let s = 1e-4;
    let want = (area(&psi, &sigma, &u, &w, s) - area(&psi, &sigma, &u, &w, -s)) / (2.0 * s);
    let layout = SliceLayout::Circle { n_grid: 256 };
    let x = grid_x(&spec, layout);
    let uu: Vec<f64> = x.iter().map(|&x| u.value(x)).collect();
    let geom = graph_geometry(&spec, layout, &uu).unwrap();
    let h = layout.spacing();
    // dA/ds = −∫ H ⟨w ∂_0, ν⟩ dμ with ⟨∂_0, ν⟩ = e^ψ / v for the past normal
    let got: f64 = -geom
        .points
        .iter()
        .zip(&x)
        .map(|(p, &x)| p.mean_curvature * w.value(x) * p.psi.exp() / p.v * p.g[0][0].sqrt() * h)
        .sum::<f64>();
    assert!((got - want).abs() <= 1e-5 * want.abs().max(1e-3), "{got} vs {want}");
}

#[test]
fn embedding_formula_agrees_and_orientation_flips_sign() {
    let spec = perturbed();
    let layout = SliceLayout::Circle { n_grid: 128 };
    let u: Vec<f64> = grid_x(&spec, layout).iter().map(|x| 0.05 * (2.0 * x).sin() - 0.1).collect();
    let h = graph_geometry(&spec, layout, &u).unwrap().mean_curvature();
    let past = mean_curvature_from_embedding(&spec, layout, &u, Orientation::Past).unwrap();
    let future = mean_curvature_from_embedding(&spec, layout, &u, Orientation::Future).unwrap();
    for i in 0..u.len() {
        assert!((h[i] - past[i]).abs() <= 1e-6 * (1.0 + h[i].abs()));
        assert_eq!(future[i], -past[i]);
    }
}

#[test]
fn perturbed_slice_converges_under_refinement() {
    let spec = perturbed();
    let tau = 0.15;
    let solve = |n_grid: usize| {
        let layout = SliceLayout::Circle { n_grid };
        let seed = vec![0.0; n_grid];
        newton_solve(&spec, layout, tau, &seed, &SolverOptions::default()).unwrap().0
    };
    let (coarse, fine, finest) = (solve(32), solve(64), solve(128));
    assert!(coarse.max_u() - coarse.min_u() > 1e-3, "solution should not be a coordinate slice");
    let e1 = (0..32).map(|i| (coarse.u[i] - fine.u[2 * i]).abs()).fold(0.0, f64::max);
    let e2 = (0..64).map(|i| (fine.u[i] - finest.u[2 * i]).abs()).fold(0.0, f64::max);
    assert!(e2 < 1e-6 && e1 / e2 > 8.0, "refinement errors {e1:e} {e2:e}");
    let v = slice_velocity(&spec, &fine).unwrap();
    assert!(v.positive && v.min > 0.0);
}

#[test]
fn flat_sweep_records_one_degenerate_leaf() {
    let spec = make_spec(&Family::Flat { n: 2, t_min: -1.0, t_max: 1.0 }).unwrap();
    let fol = sweep(&spec, SliceLayout::Homogeneous, 0.0, 0.0, 1, &SweepOptions::default()).unwrap();
    assert_eq!(fol.leaves.len(), 1);
    assert!(fol.leaves[0].degenerate && fol.leaves[0].udot.is_none());
    assert_eq!(fol.gaps.len(), 1);
    let flat_circle = make_spec(&Family::Flat { n: 1, t_min: -1.0, t_max: 1.0 }).unwrap();
    let layout = SliceLayout::Circle { n_grid: 16 };
    match newton_solve(&flat_circle, layout, 0.5, &vec![0.0; 16], &SolverOptions::default()) {
        Err(CmcError::DegenerateSlice { .. }) | Err(CmcError::NonConvergence { .. }) => {}
        other => panic!("no closed slice of nonzero mean curvature exists, got {other:?}"),
    }
}

#[test]
fn sweep_is_ordered_and_hits_every_target() {
    let spec = counterexample(2);
    let fol = sweep(&spec, SliceLayout::Homogeneous, -2.0, 2.0, 41, &SweepOptions::default()).unwrap();
    check_ordering(&fol).unwrap();
    let targets = tau_targets(-2.0, 2.0, 41);
    assert_eq!(fol.grid_leaves().count(), 41);
    for (leaf, t) in fol.grid_leaves().zip(&targets) {
        assert_eq!(leaf.tau, *t);
    }
    assert_eq!(fol.degenerate_leaves().count(), 1);
    assert_eq!(fol.degenerate_leaves().next().unwrap().tau, 0.0);
    let phi = phi_determinant(&fol);
    assert!(phi.leaves.iter().all(|l| l.degenerate || l.min.unwrap() > 0.0));
    // the degenerate leaf is excluded from the flag
    assert!(phi.diffeomorphism);
    for w in fol.leaves.windows(2) {
        let ratio = harnack_check(&w[0].slice, &w[1].slice).unwrap();
        assert!(ratio.is_finite() && ratio >= 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(24) })]

    #[test]
    fn jacobian_matches_directional_differences(
        c in -0.3f64..0.3,
        a in -0.05f64..0.05,
        b in -0.05f64..0.05,
        phase in 0.0f64..6.0,
    ) {
        let spec = perturbed();
        let layout = SliceLayout::Circle { n_grid: 48 };
        let x = grid_x(&spec, layout);
        let u: Vec<f64> = x.iter().map(|x| c + a * x.sin() + b * (2.0 * x + phase).cos()).collect();
        let w: Vec<f64> = x.iter().map(|x| (x + phase).cos() + 0.3 * (3.0 * x).sin()).collect();
        let jac = jacobian(&spec, layout, &u).unwrap();
        let jw: Vec<f64> = jac.iter().map(|r| r.iter().zip(&w).map(|(p, q)| p * q).sum()).collect();
        let eps = 1e-6;
        let shifted = |s: f64| -> Vec<f64> {
            let v: Vec<f64> = u.iter().zip(&w).map(|(p, q)| p + s * q).collect();
            residual(&spec, layout, &v, 0.0).unwrap()
        };
        let (p, m) = (shifted(eps), shifted(-eps));
        let scale = jw.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        for i in 0..u.len() {
            let fd = (p[i] - m[i]) / (2.0 * eps);
            prop_assert!((jw[i] - fd).abs() <= 1e-6 * scale, "row {i}: {} vs {fd}", jw[i]);
        }
    }

    #[test]
    fn lorentz_factor_stays_in_unit_interval(slope in -2.0f64..2.0, sigma in 0.2f64..3.0) {
        let v = lorentz_factor(&[vec![slope]], &[vec![vec![sigma]]]);
        if slope * slope < sigma {
            let v = v.unwrap()[0];
            prop_assert!(v > 0.0 && v <= 1.0);
            prop_assert!((v * v - (1.0 - slope * slope / sigma)).abs() <= 1e-14);
        } else {
            let is_violation = matches!(v, Err(CmcError::SpacelikeViolation { .. }));
            prop_assert!(is_violation);
        }
    }
}
