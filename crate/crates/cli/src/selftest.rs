//! Reproduction checks on the builtin counterexample.

use std::time::Instant;

use cmc_core::foliation::DTAU_MIN;
use cmc_core::geometry::{ricci, tcc_sample};
use cmc_core::quad::bisect_increasing;
use cmc_core::spacetime::counterexample_tau;
use cmc_core::{
    build_time_function, make_spec, sweep, Family, Point, SliceLayout, SpacetimeGrid, SweepOptions, Verdict,
};

use crate::core_inequality_max;

const EPS: f64 = 0.8;
const N: usize = 2;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn tau_inverse(tau: f64) -> f64 {
    let edge = EPS * (1.0 - 1e-12);
    bisect_increasing(|t| counterexample_tau(t, EPS, N).unwrap_or(f64::NAN), tau, -edge, edge)
}

fn failure(name: &'static str, e: impl std::fmt::Display) -> Check {
    Check { name, pass: false, detail: e.to_string() }
}

fn sweep_checks() -> Vec<Check> {
    let family = Family::Counterexample { eps: EPS, n: N, chart: Default::default() };
    let spec = match make_spec(&family) {
        Ok(s) => s,
        Err(e) => return vec![failure("tau-curve", e)],
    };
    let start = Instant::now();
    let fol = match sweep(&spec, SliceLayout::Homogeneous, -2.0, 2.0, 41, &SweepOptions::default()) {
        Ok(f) => f,
        Err(e) => return vec![failure("tau-curve", e)],
    };
    let elapsed = start.elapsed().as_secs_f64();
    let err = fol.regular_leaves().map(|l| (l.slice.u[0] - tau_inverse(l.tau)).abs()).fold(0.0f64, f64::max);
    let mut checks = vec![Check {
        name: "tau-curve",
        pass: err <= 1e-8 && elapsed <= 5.0,
        detail: format!("max |u - t(tau)| = {err:.3e}, {} leaves in {elapsed:.3} s", fol.leaves.len()),
    }];
    let nearest = fol.leaves.iter().min_by(|a, b| a.tau.abs().total_cmp(&b.tau.abs()));
    let lambda = nearest.map_or(f64::NAN, |l| l.lambda_min.abs());
    let verdict = SpacetimeGrid::covering(&fol, 81, 1)
        .ok_or("leaves do not cover a time interval".to_string())
        .and_then(|g| build_time_function(&fol, &spec, &g).map_err(|e| e.to_string()));
    checks.push(match verdict {
        Ok(r) => Check {
            name: "degenerate-maximal-slice",
            pass: lambda <= 1e-6 && r.verdict == Verdict::DegenerateAtMaximalSlice,
            detail: format!(
                "lambda_min = {lambda:.3e}, min |Dtau| = {:.3e} (away from zero {:.3e}, delta {:.0e}), verdict {}",
                r.min_grad,
                r.min_grad_away,
                10.0 * DTAU_MIN,
                r.verdict
            ),
        },
        Err(e) => failure("degenerate-maximal-slice", e),
    });
    checks
}

fn tcc_check(seed: u64) -> Check {
    let mut worst = f64::INFINITY;
    let mut core = f64::NEG_INFINITY;
    for eps in [0.5, 0.8, 1.0] {
        let spec = match make_spec(&Family::Counterexample { eps, n: N, chart: Default::default() }) {
            Ok(s) => s,
            Err(e) => return failure("tcc", e),
        };
        match (tcc_sample(&spec, 10_000, seed), core_inequality_max(eps, 20_001)) {
            (Ok(r), Ok(c)) => {
                worst = worst.min(r.min);
                core = core.max(c);
            }
            (Err(e), _) | (_, Err(e)) => return failure("tcc", e),
        }
    }
    Check {
        name: "tcc",
        pass: worst >= -1e-10 && core <= 0.0,
        detail: format!("min Ric(eta, eta) = {worst:.3e}, max core inequality = {core:.3e}"),
    }
}

fn curvature_check() -> Check {
    let spec = match make_spec(&Family::Counterexample { eps: EPS, n: N, chart: Default::default() }) {
        Ok(s) => s,
        Err(e) => return failure("ricci-closed-form", e),
    };
    let space = spec.representative_space::<f64>();
    let mut worst = 0.0f64;
    for k in 0..21 {
        let t = -0.75 + 0.075 * k as f64;
        let got = ricci(&spec, &Point::new(t, space.clone()));
        let want = spec.warped_ricci_closed_form(t, &space);
        let (got, want) = match (got, want) {
            (Ok(g), Ok(Some(w))) => (g.rbar, w),
            (Err(e), _) | (_, Err(e)) => return failure("ricci-closed-form", e),
            (_, Ok(None)) => return failure("ricci-closed-form", "no closed form"),
        };
        let scale = want.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in got.iter().flatten().zip(want.iter().flatten()) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Check { name: "ricci-closed-form", pass: worst <= 1e-6, detail: format!("max rel. err = {worst:.3e}") }
}

/// Prints one PASS/FAIL line per check and returns the number of failures.
pub fn run(seed: u64) -> usize {
    let mut checks = sweep_checks();
    checks.push(tcc_check(seed));
    checks.push(curvature_check());
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    checks.iter().filter(|c| !c.pass).count()
}
