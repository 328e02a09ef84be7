use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{eval_metric, quadratic_form, ricci};
use crate::error::Result;
use crate::linalg::cholesky;
use crate::spacetime::{Point, SpacetimeSpec};

/// Minimum of `R̄(η, η)` above which the convergence condition counts as strict.
pub const TCC_STRICT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct TccSample {
    pub point: Point<f64>,
    /// Contravariant components `(η⁰, η¹, …, ηⁿ)`.
    pub eta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TccReport {
    pub min: f64,
    pub witness: Option<TccSample>,
    pub accepted: usize,
    pub rejected: usize,
    pub strict: bool,
}

/// Evaluates the Ricci quadratic form on the given samples; samples that are
/// not timelike for ḡ are counted and skipped.
pub fn tcc_check(spec: &SpacetimeSpec, samples: &[TccSample]) -> Result<TccReport> {
    let mut report = TccReport { min: f64::INFINITY, witness: None, accepted: 0, rejected: 0, strict: false };
    for s in samples {
        let m = eval_metric(spec, &s.point)?;
        if quadratic_form(&m.g, &s.eta) >= 0.0 {
            report.rejected += 1;
            continue;
        }
        let r = ricci(spec, &s.point)?;
        let q = quadratic_form(&r.rbar, &s.eta);
        report.accepted += 1;
        if q < report.min {
            report.min = q;
            report.witness = Some(s.clone());
        }
    }
    report.strict = report.accepted > 0 && report.min > TCC_STRICT_THRESHOLD;
    Ok(report)
}

/// Draws `count` seeded timelike samples with `η⁰ = 1` and `σ(η, η) < 1`
/// and checks them.  Times stay within the central 99.9% of the interval.
pub fn tcc_sample(spec: &SpacetimeSpec, count: usize, seed: u64) -> Result<TccReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lo, hi) = spec.interval;
    let pad = 5e-4 * (hi - lo);
    let n = spec.n;
    let two_pi = std::f64::consts::TAU;
    let mut samples = Vec::with_capacity(count);
    for _ in 0..count {
        let t = rng.gen_range(lo + pad..=hi - pad);
        let space: Vec<f64> = if n == 1 {
            vec![rng.gen_range(0.0..two_pi)]
        } else {
            (0..n)
                .map(|k| {
                    if k + 1 < n {
                        rng.gen_range(0.1..std::f64::consts::PI - 0.1)
                    } else {
                        rng.gen_range(0.0..two_pi)
                    }
                })
                .collect()
        };
        let point = Point::new(t, space);
        let w = loop {
            let w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            if w.iter().map(|x| x * x).sum::<f64>() < 1.0 {
                break w;
            }
        };
        let fields = spec.fields(&point)?;
        let sigma: Vec<Vec<f64>> = fields.sigma.iter().map(|r| r.iter().map(|j| j.v).collect()).collect();
        let l = cholesky(&sigma).expect("sigma positive definite");
        // σ = L Lᵀ, η = L^{-T} w  gives  σ(η, η) = |w|²
        let mut eta_s = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = w[i];
            for k in i + 1..n {
                s -= l[k][i] * eta_s[k];
            }
            eta_s[i] = s / l[i][i];
        }
        let mut eta = vec![1.0];
        eta.extend(eta_s);
        samples.push(TccSample { point, eta });
    }
    tcc_check(spec, &samples)
}
