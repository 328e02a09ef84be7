//! Continuation in τ, leaf bookkeeping and reconstruction of τ as a
//! function on spacetime.

use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};
use crate::graph::{graph_geometry, SliceGraph, SliceLayout};
use crate::quad::bisect_increasing;
use crate::solver::{
    assemble_stability_operator, newton_solve, residual, slice_velocity, SolverOptions, UDOT_POSITIVITY,
};
use crate::spacetime::SpacetimeSpec;

/// Smallest continuation step.
pub const DTAU_MIN: f64 = 1e-6;
/// Half width of the excluded band `{|τ| ≤ δ}`.
pub const DELTA_ZERO: f64 = 10.0 * DTAU_MIN;
/// `|Dτ|` above this counts as non-vanishing.
pub const GRADIENT_THRESHOLD: f64 = 1e-6;
/// Time step of the centered difference for `∂_t τ`.
pub const FD_STEP_T: f64 = 1e-5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafKind {
    /// One of the requested `τ_k`.
    Grid,
    /// Intermediate leaf inserted by step control.
    Refinement,
    /// Attempt at `τ = 0` that is not one of the requested values.
    Probe,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LeafRecord {
    pub tau: f64,
    pub slice: SliceGraph,
    /// `None` on degenerate leaves.
    pub udot: Option<Vec<f64>>,
    pub lambda_min: f64,
    pub degenerate: bool,
    pub kind: LeafKind,
}

impl LeafRecord {
    pub fn regular(&self) -> bool {
        self.slice.converged && !self.degenerate
    }

    pub fn udot_min(&self) -> Option<f64> {
        self.udot.as_ref().map(|d| d.iter().copied().fold(f64::INFINITY, f64::min))
    }
}

/// Part of the τ range without a regular leaf.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRecord {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub reason: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepOptions {
    pub solver: SolverOptions,
    pub dtau_min: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions { solver: SolverOptions::default(), dtau_min: DTAU_MIN }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Foliation {
    pub layout: SliceLayout,
    pub tau_min: f64,
    pub tau_max: f64,
    pub steps: usize,
    pub dtau_min: f64,
    /// All leaves, ordered by τ.
    pub leaves: Vec<LeafRecord>,
    pub gaps: Vec<GapRecord>,
}

impl Foliation {
    /// Leaves at the requested `τ_k`.
    pub fn grid_leaves(&self) -> impl Iterator<Item = &LeafRecord> {
        self.leaves.iter().filter(|l| l.kind == LeafKind::Grid)
    }

    pub fn regular_leaves(&self) -> impl Iterator<Item = &LeafRecord> {
        self.leaves.iter().filter(|l| l.regular())
    }

    pub fn degenerate_leaves(&self) -> impl Iterator<Item = &LeafRecord> {
        self.leaves.iter().filter(|l| l.degenerate)
    }
}

enum Outcome {
    Regular(LeafRecord),
    Degenerate(LeafRecord),
    Failed(CmcError),
}

fn solve_leaf(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    tau: f64,
    seed: &[f64],
    opts: &SweepOptions,
    kind: LeafKind,
) -> Outcome {
    let first = newton_solve(spec, layout, tau, seed, &opts.solver);
    // near a degenerate slice keep iterating through the singular Jacobian
    let retry_from = match &first {
        Ok((slice, rep)) if rep.degenerate => Some(slice.u.clone()),
        Err(CmcError::DegenerateSlice { u, .. }) => Some(u.clone()),
        _ => None,
    };
    let result = match retry_from {
        Some(u) if !opts.solver.allow_singular => {
            // the root is not simple here, so Newton converges only linearly
            let relaxed = SolverOptions {
                allow_singular: true,
                step_factor: opts.solver.step_factor * 1e-5,
                max_iter: opts.solver.max_iter.max(200),
                ..opts.solver
            };
            match newton_solve(spec, layout, tau, &u, &relaxed) {
                Ok(r) => Ok(r),
                Err(_) => first,
            }
        }
        _ => first,
    };
    match result {
        Ok((slice, rep)) => {
            let lambda = stability_lambda(spec, &slice.u).unwrap_or(f64::NAN);
            if rep.degenerate {
                return Outcome::Degenerate(degenerate_record(slice, lambda, kind));
            }
            match slice_velocity(spec, &slice) {
                Ok(v) => Outcome::Regular(LeafRecord {
                    tau,
                    slice,
                    udot: Some(v.udot),
                    lambda_min: lambda,
                    degenerate: false,
                    kind,
                }),
                Err(CmcError::DegenerateSlice { .. }) => Outcome::Degenerate(degenerate_record(slice, lambda, kind)),
                Err(e) => Outcome::Failed(e),
            }
        }
        Err(CmcError::DegenerateSlice { tau, lambda_min, u }) => {
            let res = residual(spec, layout, &u, tau)
                .map(|r| r.iter().fold(0.0f64, |m, x| m.max(x.abs())))
                .unwrap_or(f64::NAN);
            let lambda = stability_lambda(spec, &u).unwrap_or(lambda_min);
            let slice = SliceGraph { u, tau, residual: res, converged: false, layout };
            Outcome::Degenerate(degenerate_record(slice, lambda, kind))
        }
        Err(e) => Outcome::Failed(e),
    }
}

fn degenerate_record(slice: SliceGraph, lambda_min: f64, kind: LeafKind) -> LeafRecord {
    LeafRecord { tau: slice.tau, slice, udot: None, lambda_min, degenerate: true, kind }
}

fn stability_lambda(spec: &SpacetimeSpec, u: &[f64]) -> Result<f64> {
    let layout = layout_of(spec, u.len());
    let geom = graph_geometry(spec, layout, u)?;
    Ok(assemble_stability_operator(&geom, spec)?.lambda_min)
}

fn layout_of(spec: &SpacetimeSpec, len: usize) -> SliceLayout {
    if spec.n == 1 && len > 1 {
        SliceLayout::Circle { n_grid: len }
    } else {
        SliceLayout::Homogeneous
    }
}

/// Constant graph whose mean curvature averages to `tau`, by bracketing
/// and bisection over the time interval.
pub fn initial_seed(spec: &SpacetimeSpec, layout: SliceLayout, tau: f64) -> Vec<f64> {
    let (lo, hi) = spec.interval;
    let mean_h = |t: f64| {
        residual(spec, layout, &vec![t; layout.len()], tau)
            .map(|r| r.iter().sum::<f64>() / r.len() as f64)
            .unwrap_or(f64::NAN)
    };
    let samples = 64;
    let ts: Vec<f64> = (0..samples).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / samples as f64).collect();
    let gs: Vec<f64> = ts.iter().map(|&t| mean_h(t)).collect();
    let center = 0.5 * (lo + hi);
    for j in 0..samples - 1 {
        let (a, b) = (gs[j], gs[j + 1]);
        if a.is_finite() && b.is_finite() && a <= 0.0 && b >= 0.0 && a < b {
            let t = bisect_increasing(mean_h, 0.0, ts[j], ts[j + 1]);
            return vec![t; layout.len()];
        }
    }
    let flat = gs.iter().all(|g| (g - gs[0]).abs() <= 1e-12 * (1.0 + g.abs()));
    let best = (0..samples)
        .filter(|&j| gs[j].is_finite())
        .min_by(|&a, &b| {
            let ka = (gs[a].abs(), (ts[a] - center).abs());
            let kb = (gs[b].abs(), (ts[b] - center).abs());
            ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
        })
        .map_or(center, |j| ts[j]);
    vec![if flat { center } else { best }; layout.len()]
}

struct Sweeper<'a> {
    spec: &'a SpacetimeSpec,
    layout: SliceLayout,
    opts: SweepOptions,
    leaves: Vec<LeafRecord>,
    gaps: Vec<GapRecord>,
    /// Last regular leaf, continuation starts from it.
    current: Option<LeafRecord>,
}

enum Advance {
    Reached,
    Degenerate,
    Failed(CmcError),
}

impl<'a> Sweeper<'a> {
    fn predictor(&self, from: &LeafRecord, tau: f64) -> Vec<f64> {
        let d = tau - from.tau;
        match &from.udot {
            Some(udot) => from.slice.u.iter().zip(udot).map(|(u, v)| u + d * v).collect(),
            None => from.slice.u.clone(),
        }
    }

    /// Continuation from the current leaf to `target`, halving the step on
    /// failure.
    fn advance(&mut self, target: f64, kind: LeafKind) -> Advance {
        loop {
            let Some(cur) = self.current.clone() else {
                let seed = initial_seed(self.spec, self.layout, target);
                return match solve_leaf(self.spec, self.layout, target, &seed, &self.opts, kind) {
                    Outcome::Regular(l) => {
                        self.current = Some(l.clone());
                        self.leaves.push(l);
                        Advance::Reached
                    }
                    Outcome::Degenerate(l) => {
                        self.leaves.push(l);
                        Advance::Degenerate
                    }
                    Outcome::Failed(e) => Advance::Failed(e),
                };
            };
            if cur.tau == target {
                return Advance::Reached;
            }
            let mut dtau = target - cur.tau;
            let mut last_err = None;
            let mut reached = None;
            while dtau.abs() >= self.opts.dtau_min || dtau == target - cur.tau {
                let tau = cur.tau + dtau;
                let k = if tau == target { kind } else { LeafKind::Refinement };
                match solve_leaf(self.spec, self.layout, tau, &self.predictor(&cur, tau), &self.opts, k) {
                    Outcome::Regular(l) => {
                        reached = Some(l);
                        break;
                    }
                    Outcome::Degenerate(l) => {
                        self.leaves.push(l);
                        return Advance::Degenerate;
                    }
                    Outcome::Failed(e) => {
                        last_err = Some(e);
                        dtau *= 0.5;
                        if dtau.abs() < self.opts.dtau_min {
                            break;
                        }
                    }
                }
            }
            match reached {
                Some(l) => {
                    self.current = Some(l.clone());
                    self.leaves.push(l);
                }
                None => {
                    return Advance::Failed(
                        last_err.unwrap_or_else(|| CmcError::Argument("continuation step below the minimum".into())),
                    )
                }
            }
        }
    }

    fn gap(&mut self, lo: f64, hi: f64, reason: String) {
        self.gaps.push(GapRecord { tau_lo: lo, tau_hi: hi, reason });
    }

    /// Crossing of `τ = 0` from the current (negative) leaf.  `target` is the
    /// next requested value (≥ 0) and `next_positive` the first requested
    /// value above zero, if any.
    fn cross_zero(&mut self, target: f64, next_positive: Option<f64>) {
        let zero_kind = if target == 0.0 { LeafKind::Grid } else { LeafKind::Probe };
        let cur = self.current.clone().expect("crossing needs a leaf");
        let probe = solve_leaf(self.spec, self.layout, 0.0, &self.predictor(&cur, 0.0), &self.opts, zero_kind);
        if let Outcome::Regular(l) = probe {
            if target == 0.0 {
                self.leaves.push(l.clone());
            }
            self.current = Some(l);
            return;
        }

        // approach the degenerate leaf geometrically from below
        let dmin = self.opts.dtau_min;
        let mut ladder = Vec::new();
        let mut t = cur.tau;
        while t.abs() > 2.0 * dmin {
            t *= 0.5;
            ladder.push(t);
        }
        ladder.push(-dmin);
        let mut degenerate_hit = false;
        for &tau in &ladder {
            match self.advance(tau, LeafKind::Refinement) {
                Advance::Reached => {}
                Advance::Degenerate => {
                    degenerate_hit = true;
                    break;
                }
                Advance::Failed(_) => break,
            }
        }
        let near = self.current.clone().expect("leaf below zero");
        let below = near.tau;
        if !degenerate_hit {
            match solve_leaf(self.spec, self.layout, 0.0, &self.predictor(&near, 0.0), &self.opts, zero_kind) {
                Outcome::Regular(l) => {
                    if target == 0.0 {
                        self.leaves.push(l.clone());
                    }
                    self.current = Some(l);
                    return;
                }
                Outcome::Degenerate(l) => self.leaves.push(l),
                Outcome::Failed(_) => {}
            }
        }

        // far side: reflect the near leaf through the degenerate one
        let pivot = self.leaves.last().filter(|l| l.degenerate).map(|l| l.slice.u.clone());
        let seed: Vec<f64> = match &pivot {
            Some(p) => p.iter().zip(&near.slice.u).map(|(g, n)| 2.0 * g - n).collect(),
            None => near.slice.u.clone(),
        };
        let above = dmin;
        match solve_leaf(self.spec, self.layout, above, &seed, &self.opts, LeafKind::Refinement) {
            Outcome::Regular(l) => {
                self.gap(below, above, "degenerate maximal slice".into());
                self.current = Some(l.clone());
                self.leaves.push(l);
            }
            other => {
                let reason = match other {
                    Outcome::Failed(e) => e.to_string(),
                    _ => "degenerate maximal slice".into(),
                };
                self.gap(below, target.max(above), reason);
                self.current = None;
                return;
            }
        }
        if let Some(stop) = next_positive {
            let mut t = 2.0 * dmin;
            while t < 0.5 * stop {
                if !matches!(self.advance(t, LeafKind::Refinement), Advance::Reached) {
                    break;
                }
                t *= 2.0;
            }
        }
    }
}

/// Evenly spaced targets; values within rounding of zero snap to zero.
pub fn tau_targets(tau_min: f64, tau_max: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![tau_min];
    }
    let span = tau_max - tau_min;
    (0..steps)
        .map(|k| {
            let t = if k + 1 == steps { tau_max } else { tau_min + span * k as f64 / (steps - 1) as f64 };
            if t.abs() <= 1e-12 * span.abs() {
                0.0
            } else {
                t
            }
        })
        .collect()
}

/// Sweeps `τ` over `steps` evenly spaced values in `[tau_min, tau_max]`.
pub fn sweep(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    tau_min: f64,
    tau_max: f64,
    steps: usize,
    opts: &SweepOptions,
) -> Result<Foliation> {
    if !(tau_min.is_finite() && tau_max.is_finite()) || steps == 0 {
        return Err(CmcError::Argument("tau range must be finite with at least one step".into()));
    }
    if (steps == 1 && tau_min != tau_max) || (steps > 1 && tau_min >= tau_max) {
        return Err(CmcError::Argument(format!("invalid tau range [{tau_min}, {tau_max}] with {steps} steps")));
    }
    if !(opts.dtau_min > 0.0) {
        return Err(CmcError::Argument("minimum tau step must be positive".into()));
    }
    let targets = tau_targets(tau_min, tau_max, steps);
    let mut sw = Sweeper { spec, layout, opts: *opts, leaves: Vec::new(), gaps: Vec::new(), current: None };
    for (k, &target) in targets.iter().enumerate() {
        let crossing = sw.current.as_ref().is_some_and(|c| c.tau < 0.0 && target >= 0.0);
        if crossing {
            let next_positive = targets[k..].iter().copied().find(|&t| t > 0.0);
            sw.cross_zero(target, next_positive);
            if target == 0.0 {
                continue;
            }
        }
        let from = sw.current.as_ref().map_or(target, |c| c.tau);
        match sw.advance(target, LeafKind::Grid) {
            Advance::Reached => {}
            Advance::Degenerate => {
                sw.gap(from, target, "degenerate slice".into());
                // stay on the last regular leaf; the next target reseeds past it
            }
            Advance::Failed(e) => {
                sw.gap(from, target, e.to_string());
                sw.current = None;
            }
        }
    }
    let mut leaves = sw.leaves;
    leaves.sort_by(|a, b| a.tau.partial_cmp(&b.tau).unwrap_or(std::cmp::Ordering::Equal));
    leaves.dedup_by(|b, a| a.tau == b.tau);
    let fol = Foliation { layout, tau_min, tau_max, steps, dtau_min: opts.dtau_min, leaves, gaps: sw.gaps };
    check_ordering(&fol)?;
    Ok(fol)
}

/// Leaves with larger τ lie (weakly) to the future: `u_k ≤ u_{k+1}` pointwise.
pub fn check_ordering(fol: &Foliation) -> Result<()> {
    for w in fol.leaves.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        for (i, (x, y)) in a.slice.u.iter().zip(&b.slice.u).enumerate() {
            if *x > *y + 1e-9 * (1.0 + x.abs()) {
                return Err(CmcError::Consistency(format!(
                    "leaves at tau = {} and {} cross at grid point {i} ({x} > {y})",
                    a.tau, b.tau
                )));
            }
        }
    }
    Ok(())
}

/// Per-leaf `det DΦ = u̇` extremes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiLeaf {
    pub tau: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiSummary {
    pub leaves: Vec<PhiLeaf>,
    /// Every non-degenerate leaf has `min u̇ > 0`.
    pub diffeomorphism: bool,
}

pub fn phi_determinant(fol: &Foliation) -> PhiSummary {
    let leaves: Vec<PhiLeaf> = fol
        .leaves
        .iter()
        .map(|l| {
            let ext = l.udot.as_ref().map(|d| {
                (d.iter().copied().fold(f64::INFINITY, f64::min), d.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            });
            PhiLeaf { tau: l.tau, min: ext.map(|e| e.0), max: ext.map(|e| e.1), degenerate: l.degenerate }
        })
        .collect();
    let diffeomorphism = leaves.iter().any(|l| !l.degenerate)
        && leaves.iter().filter(|l| !l.degenerate).all(|l| l.min.is_some_and(|m| m > UDOT_POSITIVITY));
    PhiSummary { leaves, diffeomorphism }
}

/// Sample points of the reconstructed time function.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeGrid {
    /// Chart times.
    pub times: Vec<f64>,
    /// Every `space_stride`-th spatial grid point is sampled.
    pub space_stride: usize,
}

impl SpacetimeGrid {
    pub fn uniform(t_lo: f64, t_hi: f64, count: usize, space_stride: usize) -> Self {
        let times = if count == 1 {
            vec![0.5 * (t_lo + t_hi)]
        } else {
            (0..count).map(|k| t_lo + (t_hi - t_lo) * k as f64 / (count - 1) as f64).collect()
        };
        SpacetimeGrid { times, space_stride: space_stride.max(1) }
    }

    /// Times strictly inside the region swept by the foliation, plus the
    /// mean height of every degenerate leaf in that range.
    pub fn covering(fol: &Foliation, count: usize, space_stride: usize) -> Option<Self> {
        let first = fol.leaves.first()?;
        let last = fol.leaves.last()?;
        let lo = first.slice.max_u() + 2.0 * FD_STEP_T;
        let hi = last.slice.min_u() - 2.0 * FD_STEP_T;
        if !(lo < hi) {
            return None;
        }
        let mut grid = Self::uniform(lo, hi, count, space_stride);
        let extra = fol.degenerate_leaves().map(|l| l.slice.mean_u()).filter(|t| (lo..=hi).contains(t));
        grid.times.extend(extra);
        grid.times.sort_by(f64::total_cmp);
        grid.times.dedup();
        Some(grid)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    GlobalTimeFunction,
    TimeFunctionAwayFromZero,
    DegenerateAtMaximalSlice,
    /// `Dτ` vanishes away from `τ = 0` or nothing was sampled.
    Inconclusive,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::GlobalTimeFunction => "global-time-function",
            Verdict::TimeFunctionAwayFromZero => "time-function-away-from-zero",
            Verdict::DegenerateAtMaximalSlice => "degenerate-at-maximal-slice",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FieldSample {
    pub t: f64,
    pub space_index: usize,
    pub tau: f64,
    pub grad: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimeFunctionReport {
    pub samples: Vec<FieldSample>,
    pub min_grad: f64,
    /// Minimum over `{|τ| > δ}`.
    pub min_grad_away: f64,
    /// Minimum over `{|τ| ≤ δ}` (infinite when no sample falls there).
    pub min_grad_near_zero: f64,
    pub delta: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Monotone cubic through `(x_k, y_k)` with suggested slopes `m_k`.
struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    fn new(knots: Vec<(f64, f64, f64)>) -> Self {
        let mut x = Vec::with_capacity(knots.len());
        let mut y = Vec::with_capacity(knots.len());
        let mut m = Vec::with_capacity(knots.len());
        for (a, b, s) in knots {
            if x.last().is_some_and(|&l| a <= l) {
                continue;
            }
            x.push(a);
            y.push(b);
            m.push(s.max(0.0));
        }
        MonotoneCubic { x, y, m }
    }

    fn range(&self) -> Option<(f64, f64)> {
        Some((*self.x.first()?, *self.x.last()?))
    }

    fn eval(&self, t: f64) -> Option<f64> {
        let (lo, hi) = self.range()?;
        if t < lo || t > hi {
            return None;
        }
        if self.x.len() == 1 {
            return Some(self.y[0]);
        }
        let k = self.x.partition_point(|&a| a <= t).clamp(1, self.x.len() - 1) - 1;
        let h = self.x[k + 1] - self.x[k];
        let delta = (self.y[k + 1] - self.y[k]) / h;
        let (mut m0, mut m1) = (self.m[k], self.m[k + 1]);
        if delta <= 0.0 {
            m0 = 0.0;
            m1 = 0.0;
        } else {
            let (a, b) = (m0 / delta, m1 / delta);
            let r = a * a + b * b;
            if r > 9.0 {
                let s = 3.0 / r.sqrt();
                m0 = s * a * delta;
                m1 = s * b * delta;
            }
        }
        let s = (t - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        Some(
            (2.0 * s3 - 3.0 * s2 + 1.0) * self.y[k]
                + (s3 - 2.0 * s2 + s) * h * m0
                + (-2.0 * s3 + 3.0 * s2) * self.y[k + 1]
                + (s3 - s2) * h * m1,
        )
    }
}

fn isolated_degenerate_zero(fol: &Foliation, delta: f64) -> bool {
    let degenerate: Vec<&LeafRecord> = fol.degenerate_leaves().collect();
    degenerate.len() == 1
        && degenerate[0].tau.abs() <= delta
        && fol.regular_leaves().any(|l| l.tau < 0.0)
        && fol.regular_leaves().any(|l| l.tau > 0.0)
}

/// Interpolates τ through the leaves at every sampled point and classifies
/// the result.
pub fn build_time_function(fol: &Foliation, spec: &SpacetimeSpec, grid: &SpacetimeGrid) -> Result<TimeFunctionReport> {
    build_time_function_with(fol, spec, grid, GRADIENT_THRESHOLD)
}

/// [`build_time_function`] with an explicit `|Dτ|` threshold.
pub fn build_time_function_with(
    fol: &Foliation,
    spec: &SpacetimeSpec,
    grid: &SpacetimeGrid,
    threshold: f64,
) -> Result<TimeFunctionReport> {
    if !(threshold > 0.0) {
        return Err(CmcError::Argument(format!("gradient threshold must be positive, got {threshold}")));
    }
    let npts = fol.layout.len();
    if fol.leaves.iter().any(|l| l.slice.u.len() != npts) {
        return Err(CmcError::Argument("leaves do not match the foliation layout".into()));
    }
    let curves: Vec<MonotoneCubic> = (0..npts)
        .map(|s| {
            MonotoneCubic::new(
                fol.leaves
                    .iter()
                    .map(|l| {
                        let slope = match &l.udot {
                            Some(d) if d[s] > 0.0 => 1.0 / d[s],
                            _ => 0.0,
                        };
                        (l.slice.u[s], l.tau, slope)
                    })
                    .collect(),
            )
        })
        .collect();
    let dx = fol.layout.spacing();
    let circle = matches!(fol.layout, SliceLayout::Circle { .. });
    let mut samples = Vec::new();
    let mut uncovered = Vec::new();
    for &t in &grid.times {
        spec.check_time(t)?;
        for s in (0..npts).step_by(grid.space_stride) {
            let at = |idx: usize, time: f64| curves[idx].eval(time);
            let x = fol.layout.space::<f64>(spec, s)[0];
            let (Some(tau), Some(tp), Some(tm)) = (at(s, t), at(s, t + FD_STEP_T), at(s, t - FD_STEP_T)) else {
                uncovered.push((t, x));
                continue;
            };
            let tau_t = (tp - tm) / (2.0 * FD_STEP_T);
            let tau_x = if circle {
                match (at((s + 1) % npts, t), at((s + npts - 1) % npts, t)) {
                    (Some(a), Some(b)) => (a - b) / (2.0 * dx),
                    _ => {
                        uncovered.push((t, x));
                        continue;
                    }
                }
            } else {
                0.0
            };
            samples.push(FieldSample { t, space_index: s, tau, grad: tau_t.hypot(tau_x) });
        }
    }
    if !uncovered.is_empty() {
        return Err(CmcError::Coverage { points: uncovered });
    }
    let delta = 10.0 * fol.dtau_min;
    let min_of = |pred: &dyn Fn(&FieldSample) -> bool| {
        samples.iter().filter(|s| pred(s)).map(|s| s.grad).fold(f64::INFINITY, f64::min)
    };
    let min_grad = min_of(&|_| true);
    let min_grad_away = min_of(&|s| s.tau.abs() > delta);
    let min_grad_near_zero = min_of(&|s| s.tau.abs() <= delta);
    let thr = threshold;
    let verdict = if samples.is_empty() {
        Verdict::Inconclusive
    } else if min_grad > thr {
        Verdict::GlobalTimeFunction
    } else if min_grad_away > thr {
        if isolated_degenerate_zero(fol, delta) {
            Verdict::DegenerateAtMaximalSlice
        } else {
            Verdict::TimeFunctionAwayFromZero
        }
    } else {
        Verdict::Inconclusive
    };
    Ok(TimeFunctionReport { samples, min_grad, min_grad_away, min_grad_near_zero, delta, threshold: thr, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn targets_snap_to_zero() {
        let t = tau_targets(-2.0, 2.0, 41);
        assert_eq!(t.len(), 41);
        assert_eq!(t[20], 0.0);
        assert_eq!((t[0], t[40]), (-2.0, 2.0));
    }

    #[test]
    fn monotone_cubic_reproduces_linear_data() {
        let c = MonotoneCubic::new(vec![(0.0, 0.0, 2.0), (1.0, 2.0, 2.0), (3.0, 6.0, 2.0)]);
        for t in [0.0, 0.3, 1.7, 3.0] {
            assert!((c.eval(t).unwrap() - 2.0 * t).abs() < 1e-14);
        }
        assert!(c.eval(3.1).is_none());
    }

    #[test]
    fn monotone_cubic_stays_monotone_with_wild_slopes() {
        let c = MonotoneCubic::new(vec![(0.0, 0.0, 50.0), (1.0, 1.0, 0.0), (2.0, 1.5, 40.0)]);
        let mut last = -1.0;
        for k in 0..=200 {
            let v = c.eval(k as f64 * 0.01).unwrap();
            assert!(v >= last);
            last = v;
        }
    }
}
