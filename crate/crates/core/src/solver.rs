//! Newton solver for `H(u) = τ`, the stability operator and slice velocity.

use crate::error::{CmcError, Result};
use crate::geometry::{quadratic_form, ricci};
use crate::graph::{graph_geometry, GraphGeometry, SliceGraph, SliceLayout};
use crate::linalg::{sup_norm, zeros, CyclicTridiag, Lu, Mat};
use crate::scalar::Dual;
use crate::spacetime::SpacetimeSpec;

/// Degeneracy threshold relative to the grid Laplacian scale.
pub const DEGENERACY_FACTOR: f64 = 1e-8;
/// `u̇` counts as positive above this value.
pub const UDOT_POSITIVITY: f64 = 1e-10;
/// LU pivot ratio below which the Jacobian is treated as singular.
const PIVOT_RATIO_MIN: f64 = 1e-14;
const INVERSE_POWER_STEPS: usize = 12;
const EIGEN_MAX_ITER: usize = 2000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Residual tolerance; `None` picks 1e-10 for homogeneous slices and 1e-8 on grids.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub max_halvings: usize,
    /// Converged steps must also satisfy `|δ| ≤ step_factor · tol`.
    pub step_factor: f64,
    /// Keep iterating through a singular (but factorizable) Jacobian instead
    /// of stopping with a degenerate-slice error.
    pub allow_singular: bool,
    /// Jacobian counts as singular when `min |λ| ≤ degeneracy · (Laplacian scale)`.
    pub degeneracy: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: None,
            max_iter: 60,
            max_halvings: 20,
            step_factor: 1e3,
            allow_singular: false,
            degeneracy: DEGENERACY_FACTOR,
        }
    }
}

impl SolverOptions {
    pub fn tol_for(&self, layout: SliceLayout) -> f64 {
        self.tol.unwrap_or(match layout {
            SliceLayout::Homogeneous => 1e-10,
            SliceLayout::Circle { .. } => 1e-8,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    /// `sup |H(u) − τ|` before the first and after every accepted step.
    pub residuals: Vec<f64>,
    pub final_residual: f64,
    /// Step length factor used at each iteration (1 = undamped).
    pub damping: Vec<f64>,
    pub converged: bool,
    /// Jacobian was singular at the returned slice.
    pub degenerate: bool,
    /// Estimate of the smallest |eigenvalue| of the Jacobian at the end.
    pub lambda_estimate: Option<f64>,
}

/// `H(u) − τ` at every grid point.
pub fn residual<T: crate::Real>(spec: &SpacetimeSpec, layout: SliceLayout, u: &[T], tau: f64) -> Result<Vec<T>> {
    let geom = graph_geometry(spec, layout, u)?;
    Ok(geom.points.iter().map(|p| p.mean_curvature - T::lit(tau)).collect())
}

fn cyclic_dist(i: usize, j: usize, n: usize) -> usize {
    let d = if i > j { i - j } else { j - i };
    d.min(n - d)
}

/// Column groups whose stencils (half width 4) do not overlap.
fn column_colors(n: usize) -> Vec<Vec<usize>> {
    let reach = 8;
    let mut color = vec![usize::MAX; n];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for j in 0..n {
        let c = (0..)
            .find(|&c| groups.get(c).map_or(true, |g: &Vec<usize>| g.iter().all(|&k| cyclic_dist(j, k, n) > reach)))
            .unwrap();
        if c == groups.len() {
            groups.push(Vec::new());
        }
        groups[c].push(j);
        color[j] = c;
    }
    groups
}

/// Exact Jacobian of the discrete mean curvature, one dual evaluation per
/// column group.
pub fn jacobian(spec: &SpacetimeSpec, layout: SliceLayout, u: &[f64]) -> Result<Mat<f64>> {
    let n = u.len();
    let mut jac = zeros(n, n);
    let groups = if n == 1 { vec![vec![0]] } else { column_colors(n) };
    for group in &groups {
        let mut seed: Vec<Dual<f64>> = u.iter().map(|&x| Dual::constant(x)).collect();
        for &j in group {
            seed[j].eps = 1.0;
        }
        let h = residual(spec, layout, &seed, 0.0)?;
        for (i, hi) in h.iter().enumerate() {
            if let Some(&j) = group.iter().find(|&&j| n == 1 || cyclic_dist(i, j, n) <= 4) {
                jac[i][j] = hi.eps;
            }
        }
    }
    Ok(jac)
}

/// Largest diagonal entry of the discrete `−Δ` (1 for homogeneous slices).
pub fn laplacian_scale(geom: &GraphGeometry<f64>) -> f64 {
    match geom.layout {
        SliceLayout::Homogeneous => 1.0,
        SliceLayout::Circle { .. } => {
            let (w, k) = flux_weights(geom);
            let n = w.len();
            (0..n).map(|i| (k[i] + k[(i + n - 1) % n]) / w[i]).fold(0.0, f64::max)
        }
    }
}

/// Volume weights `√g h` and face conductances `avg(g^{-1/2}) / h`.
fn flux_weights(geom: &GraphGeometry<f64>) -> (Vec<f64>, Vec<f64>) {
    let h = geom.layout.spacing();
    let n = geom.points.len();
    let sq: Vec<f64> = geom.points.iter().map(|p| p.g[0][0].sqrt()).collect();
    let w = sq.iter().map(|s| s * h).collect();
    let k = (0..n).map(|i| 0.5 * (1.0 / sq[i] + 1.0 / sq[(i + 1) % n]) / h).collect();
    (w, k)
}

/// Estimate of `min |λ(J)|` by inverse power iteration on an LU factor.
fn smallest_modulus(lu: &Lu<f64>, n: usize) -> f64 {
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i as f64) * 0.7).sin()).collect();
    let norm = |y: &[f64]| y.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nx = norm(&x);
    x.iter_mut().for_each(|a| *a /= nx);
    let mut est = f64::INFINITY;
    for _ in 0..INVERSE_POWER_STEPS {
        let y = lu.solve(&x);
        let ny = norm(&y);
        if !ny.is_finite() || ny == 0.0 {
            return 0.0;
        }
        est = 1.0 / ny;
        x = y.iter().map(|a| a / ny).collect();
    }
    est
}

enum JacobianState {
    Regular(Lu<f64>, f64),
    /// Below the degeneracy threshold but still factorizable.
    NearSingular(Lu<f64>, f64),
    Singular(f64),
}

fn classify_jacobian(jac: Mat<f64>, threshold: f64) -> JacobianState {
    let n = jac.len();
    match Lu::factor(jac) {
        None => JacobianState::Singular(0.0),
        Some(lu) => {
            let est = smallest_modulus(&lu, n);
            if lu.pivot_ratio() <= PIVOT_RATIO_MIN {
                JacobianState::Singular(est)
            } else if est <= threshold {
                JacobianState::NearSingular(lu, est)
            } else {
                JacobianState::Regular(lu, est)
            }
        }
    }
}

/// Singularity threshold for the Jacobian at `u`.
fn degeneracy_threshold(spec: &SpacetimeSpec, layout: SliceLayout, u: &[f64], factor: f64) -> Result<f64> {
    let geom = graph_geometry(spec, layout, u)?;
    Ok(factor * laplacian_scale(&geom))
}

/// Damped Newton iteration for `H(u) = τ` from `u0`.
pub fn newton_solve(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    tau: f64,
    u0: &[f64],
    opts: &SolverOptions,
) -> Result<(SliceGraph, NewtonReport)> {
    if !tau.is_finite() {
        return Err(CmcError::Argument(format!("target mean curvature {tau} is not finite")));
    }
    let tol = opts.tol_for(layout);
    let mut u = u0.to_vec();
    let mut r = residual(spec, layout, &u, tau)?;
    let mut res = sup_norm(&r);
    let mut report = NewtonReport {
        iterations: 0,
        residuals: vec![res],
        final_residual: res,
        damping: Vec::new(),
        converged: false,
        degenerate: false,
        lambda_estimate: None,
    };
    let finish = |u: Vec<f64>, res: f64, mut report: NewtonReport| {
        report.final_residual = res;
        report.converged = true;
        let slice = SliceGraph { u, tau, residual: res, converged: true, layout };
        Ok((slice, report))
    };

    for iter in 1..=opts.max_iter {
        report.iterations = iter;
        let threshold = degeneracy_threshold(spec, layout, &u, opts.degeneracy)?;
        let state = classify_jacobian(jacobian(spec, layout, &u)?, threshold);
        report.degenerate = !matches!(state, JacobianState::Regular(..));
        let (lu, est) = match state {
            JacobianState::Regular(lu, est) => (lu, est),
            JacobianState::NearSingular(lu, est) if opts.allow_singular => (lu, est),
            JacobianState::NearSingular(_, est) | JacobianState::Singular(est) => {
                report.lambda_estimate = Some(est);
                if res <= tol {
                    return finish(u, res, report);
                }
                return Err(CmcError::DegenerateSlice { tau, lambda_min: est, u });
            }
        };
        report.lambda_estimate = Some(est);
        let delta = lu.solve(&r);
        let step = sup_norm(&delta);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, d)| a - alpha * d).collect();
            if let Ok(rt) = residual(spec, layout, &trial, tau) {
                let rs = sup_norm(&rt);
                if rs <= (1.0 - 1e-4 * alpha) * res || (rs <= res && res <= tol) {
                    accepted = Some((trial, rt, rs));
                    break;
                }
            }
            alpha *= 0.5;
        }
        let Some((trial, rt, rs)) = accepted else {
            if res <= tol {
                return finish(u, res, report);
            }
            return Err(CmcError::NonConvergence {
                tau,
                iterations: iter,
                residual: res,
                reason: format!("no acceptable step after {} halvings", opts.max_halvings),
            });
        };
        u = trial;
        r = rt;
        res = rs;
        report.residuals.push(res);
        report.damping.push(alpha);
        if res <= tol && alpha * step <= opts.step_factor * tol {
            return finish(u, res, report);
        }
    }
    Err(CmcError::NonConvergence {
        tau,
        iterations: opts.max_iter,
        residual: res,
        reason: "iteration limit reached".into(),
    })
}

/// Discrete `φ ↦ −Δφ + cφ` on a slice, with `c = ‖A‖² + Ric(ν, ν)`.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityOperator {
    pub layout: SliceLayout,
    pub coeff: Vec<f64>,
    /// Induced volume weights (`[1]` for homogeneous slices).
    pub weights: Vec<f64>,
    /// Conductance of the face between `i` and `i + 1`.
    pub flux: Vec<f64>,
    pub lap_scale: f64,
    pub threshold: f64,
    pub lambda_min: f64,
    pub eigenvector: Vec<f64>,
    pub degenerate: bool,
}

impl StabilityOperator {
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let n = phi.len();
        (0..n)
            .map(|i| {
                let lap = if n == 1 {
                    0.0
                } else {
                    let ip = (i + 1) % n;
                    let im = (i + n - 1) % n;
                    (self.flux[i] * (phi[ip] - phi[i]) - self.flux[im] * (phi[i] - phi[im])) / self.weights[i]
                };
                -lap + self.coeff[i] * phi[i]
            })
            .collect()
    }

    /// `Σ w_i a_i b_i`.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a).zip(b).map(|((w, x), y)| w * x * y).sum()
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.coeff.len();
        let mut m = zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = self.apply(&e);
            for i in 0..n {
                m[i][j] = col[i];
            }
            e[j] = 0.0;
        }
        m
    }

    /// `W^{1/2} L W^{-1/2}` as a symmetric cyclic tridiagonal matrix.
    fn symmetrized(&self) -> CyclicTridiag<f64> {
        let n = self.coeff.len();
        let w = &self.weights;
        let diag = (0..n).map(|i| (self.flux[i] + self.flux[(i + n - 1) % n]) / w[i] + self.coeff[i]).collect();
        let off = (0..n).map(|i| -self.flux[i] / (w[i] * w[(i + 1) % n]).sqrt()).collect();
        CyclicTridiag { diag, off }
    }
}

/// `c = ‖A‖² + R̄_αβ ν^α ν^β` at every grid point.
pub fn stability_coefficient(spec: &SpacetimeSpec, geom: &GraphGeometry<f64>) -> Result<Vec<f64>> {
    geom.points
        .iter()
        .map(|p| {
            let r = ricci(spec, &p.point)?;
            Ok(p.a2 + quadratic_form(&r.rbar, &p.nu_up))
        })
        .collect()
}

pub fn assemble_stability_operator(geom: &GraphGeometry<f64>, spec: &SpacetimeSpec) -> Result<StabilityOperator> {
    let coeff = stability_coefficient(spec, geom)?;
    let lap_scale = laplacian_scale(geom);
    let threshold = DEGENERACY_FACTOR * lap_scale;
    let mut op = StabilityOperator {
        layout: geom.layout,
        coeff,
        weights: vec![1.0],
        flux: vec![0.0],
        lap_scale,
        threshold,
        lambda_min: f64::NAN,
        eigenvector: vec![1.0],
        degenerate: false,
    };
    if let SliceLayout::Circle { .. } = geom.layout {
        let (w, k) = flux_weights(geom);
        op.weights = w;
        op.flux = k;
        let (lambda, vec) = smallest_eigenpair(&op)?;
        op.lambda_min = lambda;
        op.eigenvector = vec;
    } else {
        op.lambda_min = op.coeff[0];
    }
    op.degenerate = op.lambda_min <= threshold;
    Ok(op)
}

/// Shifted inverse iteration on the symmetrized operator; the shift sits
/// below `min c`, which bounds the spectrum from below.
fn smallest_eigenpair(op: &StabilityOperator) -> Result<(f64, Vec<f64>)> {
    let s = op.symmetrized();
    let n = s.len();
    let cmin = op.coeff.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = cmin - 1e-2 * (1.0 + cmin.abs());
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * ((i as f64) * 1.3).cos()).collect();
    let norm = |y: &[f64]| y.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut lambda = f64::NAN;
    for _ in 0..EIGEN_MAX_ITER {
        let nx = norm(&x);
        x.iter_mut().for_each(|a| *a /= nx);
        let y = s.solve_shifted(shift, &x).ok_or(CmcError::EigenSolve { iterations: 0 })?;
        let ny = norm(&y);
        let yn: Vec<f64> = y.iter().map(|a| a / ny).collect();
        let sy = s.apply(&yn);
        let rq: f64 = sy.iter().zip(&yn).map(|(a, b)| a * b).sum();
        let resid = norm(&sy.iter().zip(&yn).map(|(a, b)| a - rq * b).collect::<Vec<_>>());
        let done = resid <= 1e-10 * (1.0 + rq.abs()) || (rq - lambda).abs() <= 1e-15 * (1.0 + rq.abs());
        lambda = rq;
        x = yn;
        if done {
            // back to the unsymmetrized eigenvector φ = W^{-1/2} x
            let phi = x.iter().zip(&op.weights).map(|(a, w)| a / w.sqrt()).collect();
            return Ok((lambda, phi));
        }
    }
    Err(CmcError::EigenSolve { iterations: EIGEN_MAX_ITER })
}

/// `u̇` on a slice: the solution of `J u̇ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceVelocity {
    pub udot: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub positive: bool,
}

pub fn slice_velocity(spec: &SpacetimeSpec, slice: &SliceGraph) -> Result<SliceVelocity> {
    let layout = slice.layout;
    let threshold = degeneracy_threshold(spec, layout, &slice.u, DEGENERACY_FACTOR)?;
    match classify_jacobian(jacobian(spec, layout, &slice.u)?, threshold) {
        JacobianState::Singular(est) | JacobianState::NearSingular(_, est) => {
            Err(CmcError::DegenerateSlice { tau: slice.tau, lambda_min: est, u: slice.u.clone() })
        }
        JacobianState::Regular(lu, _) => {
            let udot = lu.solve(&vec![1.0; slice.u.len()]);
            let min = udot.iter().copied().fold(f64::INFINITY, f64::min);
            let max = udot.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            Ok(SliceVelocity { udot, min, max, positive: min > UDOT_POSITIVITY })
        }
    }
}

/// `|τ − τ̄| / inf |u − ū|` for two slices on the same grid.
pub fn harnack_check(a: &SliceGraph, b: &SliceGraph) -> Result<f64> {
    if a.layout != b.layout || a.u.len() != b.u.len() {
        return Err(CmcError::Argument("slices live on different grids".into()));
    }
    let dtau = (a.tau - b.tau).abs();
    if dtau == 0.0 {
        return Ok(0.0);
    }
    let gap = a.u.iter().zip(&b.u).map(|(x, y)| (x - y).abs()).fold(f64::INFINITY, f64::min);
    if gap == 0.0 {
        return Err(CmcError::HarnackViolation { dtau });
    }
    Ok(dtau / gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{make_spec, Chart, Family};

    #[test]
    fn coloring_separates_stencils() {
        for n in [16, 17, 30, 64, 65] {
            let groups = column_colors(n);
            assert!(groups.len() <= 17);
            for g in &groups {
                for (a, &i) in g.iter().enumerate() {
                    for &j in &g[a + 1..] {
                        assert!(cyclic_dist(i, j, n) > 8);
                    }
                }
            }
            assert_eq!(groups.iter().map(Vec::len).sum::<usize>(), n);
        }
    }

    #[test]
    fn homogeneous_newton_hits_closed_form() {
        let spec = make_spec(&Family::Counterexample { eps: 0.8, n: 2, chart: Chart::Gaussian }).unwrap();
        let (s, rep) =
            newton_solve(&spec, SliceLayout::Homogeneous, 4.0 / 15.0, &[0.2], &SolverOptions::default()).unwrap();
        assert!((s.u[0] - 0.4).abs() < 1e-10, "{}", s.u[0]);
        assert!(rep.converged && !rep.degenerate);
        assert!(rep.residuals.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn flat_maximal_slice_is_degenerate() {
        let spec = make_spec(&Family::Flat { n: 1, t_min: -1.0, t_max: 1.0 }).unwrap();
        let layout = SliceLayout::Circle { n_grid: 32 };
        let u0 = vec![0.25; 32];
        let (s, rep) = newton_solve(&spec, layout, 0.0, &u0, &SolverOptions::default()).unwrap();
        assert_eq!(s.u, u0);
        assert!(rep.degenerate);
        let geom = graph_geometry(&spec, layout, &u0).unwrap();
        let op = assemble_stability_operator(&geom, &spec).unwrap();
        assert!(op.lambda_min.abs() < 1e-12 && op.degenerate);
    }

    #[test]
    fn harnack_examples() {
        let mk = |u: f64, tau: f64| SliceGraph {
            u: vec![u],
            tau,
            residual: 0.0,
            converged: true,
            layout: SliceLayout::Homogeneous,
        };
        assert_eq!(harnack_check(&mk(0.3, 1.0), &mk(0.3, 1.0)).unwrap(), 0.0);
        assert!((harnack_check(&mk(0.3, 1.0), &mk(0.35, 1.5)).unwrap() - 10.0).abs() < 1e-12);
        assert!(matches!(harnack_check(&mk(0.3, 1.0), &mk(0.3, 2.0)), Err(CmcError::HarnackViolation { .. })));
    }
}
