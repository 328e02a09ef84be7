//! Serializable summaries of solver results.

use cmc_core::foliation::{LeafRecord, TimeFunctionReport};
use cmc_core::spacetime::Model;
use cmc_core::{Family, Foliation, SliceLayout, SpacetimeSpec, Verdict};
use serde::{Deserialize, Serialize};

/// Non-finite values become `None` so that reports read back cleanly.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

/// Proper time of chart time `x0` (they differ in conformal charts only).
pub fn chart_to_t(spec: &SpacetimeSpec, x0: f64) -> f64 {
    match &spec.model {
        Model::ConformalWarped { clock, .. } => clock.t_of_x0(x0),
        _ => x0,
    }
}

pub fn layout_name(layout: SliceLayout) -> String {
    match layout {
        SliceLayout::Circle { n_grid } => format!("circle-{n_grid}"),
        SliceLayout::Homogeneous => "homogeneous".into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeafRow {
    pub tau: f64,
    /// Mean height in proper time.
    pub t_mean: f64,
    pub u_min: f64,
    pub u_max: f64,
    pub udot_min: Option<f64>,
    pub lambda_min: Option<f64>,
    pub converged: bool,
    pub degenerate: bool,
    pub kind: String,
}

impl LeafRow {
    pub fn new(spec: &SpacetimeSpec, leaf: &LeafRecord) -> Self {
        LeafRow {
            tau: leaf.tau,
            t_mean: chart_to_t(spec, leaf.slice.mean_u()),
            u_min: leaf.slice.min_u(),
            u_max: leaf.slice.max_u(),
            udot_min: leaf.udot_min().and_then(finite),
            lambda_min: finite(leaf.lambda_min),
            converged: leaf.slice.converged,
            degenerate: leaf.degenerate,
            kind: serde_json::to_value(leaf.kind).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub t: f64,
    pub space_index: usize,
    pub tau: f64,
    pub grad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeFunctionSummary {
    pub verdict: Verdict,
    pub min_grad: Option<f64>,
    pub min_grad_away: Option<f64>,
    pub min_grad_near_zero: Option<f64>,
    pub delta: f64,
    pub threshold: f64,
    pub samples: Vec<SampleRow>,
}

impl From<&TimeFunctionReport> for TimeFunctionSummary {
    fn from(r: &TimeFunctionReport) -> Self {
        TimeFunctionSummary {
            verdict: r.verdict,
            min_grad: finite(r.min_grad),
            min_grad_away: finite(r.min_grad_away),
            min_grad_near_zero: finite(r.min_grad_near_zero),
            delta: r.delta,
            threshold: r.threshold,
            samples: r
                .samples
                .iter()
                .map(|s| SampleRow { t: s.t, space_index: s.space_index, tau: s.tau, grad: s.grad })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationReport {
    pub spacetime: Family,
    pub layout: String,
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
    /// Every leaf of the sweep (grid targets, refinements and probes).
    pub leaves: Vec<LeafRow>,
    pub gaps: Vec<GapRow>,
    pub phi_diffeomorphism: bool,
    /// Absent when the leaves do not cover an open time interval.
    pub time_function: Option<TimeFunctionSummary>,
}

impl FoliationReport {
    pub fn new(spec: &SpacetimeSpec, fol: &Foliation, tf: Option<&TimeFunctionReport>) -> Self {
        FoliationReport {
            spacetime: spec.family.clone(),
            layout: layout_name(fol.layout),
            tau_min: fol.tau_min,
            tau_max: fol.tau_max,
            steps: fol.steps,
            leaves: fol.leaves.iter().map(|l| LeafRow::new(spec, l)).collect(),
            gaps: fol
                .gaps
                .iter()
                .map(|g| GapRow { tau_lo: g.tau_lo, tau_hi: g.tau_hi, reason: g.reason.clone() })
                .collect(),
            phi_diffeomorphism: cmc_core::foliation::phi_determinant(fol).diffeomorphism,
            time_function: tf.map(TimeFunctionSummary::from),
        }
    }

    pub fn verdict(&self) -> Option<Verdict> {
        self.time_function.as_ref().map(|t| t.verdict)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlicePoint {
    pub x: Option<f64>,
    pub u: f64,
    pub udot: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SliceReport {
    pub spacetime: Family,
    pub layout: String,
    pub tau: f64,
    pub converged: bool,
    pub degenerate: bool,
    pub iterations: usize,
    pub residual: f64,
    pub lambda_min: Option<f64>,
    pub t_mean: f64,
    pub points: Vec<SlicePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TccSummary {
    pub spacetime: Family,
    pub samples: usize,
    pub seed: u64,
    pub accepted: usize,
    pub rejected: usize,
    pub min: Option<f64>,
    pub strict: bool,
    pub witness_x0: Option<f64>,
    pub witness_eta: Option<Vec<f64>>,
    /// Largest value of `f̈ + ḟ²` over `|t| ≤ 0.999 ε` (builtin counterexample only).
    pub core_inequality_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureRow {
    pub x0: f64,
    pub ricci: Vec<Vec<f64>>,
    /// `christoffel[a][b][c] = Γ^a_bc`
    pub christoffel: Vec<Vec<Vec<f64>>>,
    pub conformal_residual: f64,
}
