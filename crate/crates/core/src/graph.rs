//! Spacelike graphs `x0 = u(x)` over the Cauchy surface and their geometry.
//!
//! Two layouts are supported: a uniform periodic grid on the circle (n = 1,
//! arbitrary `u`) and homogeneous slices `u ≡ const` of warped products.

use crate::error::{CmcError, Result};
use crate::geometry::{christoffels, metric_from_fields, MetricPointData};
use crate::linalg::{invert, zeros, Mat};
use crate::scalar::Real;
use crate::spacetime::{Point, SpacetimeSpec};

/// Where the graph function lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceLayout {
    /// `n_grid` equispaced points `x_i = 2π i / n_grid` on the circle.
    Circle { n_grid: usize },
    /// A single value: the slice `x0 = u` of a warped product.
    Homogeneous,
}

impl SliceLayout {
    /// Layout used for `spec`: the circle grid for n = 1, homogeneous otherwise.
    pub fn for_spec(spec: &SpacetimeSpec, n_grid: usize) -> Result<Self> {
        if spec.n == 1 {
            if n_grid < 16 {
                return Err(CmcError::Argument(format!("grid needs at least 16 points, got {n_grid}")));
            }
            Ok(SliceLayout::Circle { n_grid })
        } else if spec.is_warped() {
            Ok(SliceLayout::Homogeneous)
        } else {
            Err(CmcError::Argument("n >= 2 is supported for warped products only".into()))
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SliceLayout::Circle { n_grid } => *n_grid,
            SliceLayout::Homogeneous => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid spacing (zero for homogeneous slices).
    pub fn spacing(&self) -> f64 {
        match self {
            SliceLayout::Circle { n_grid } => std::f64::consts::TAU / *n_grid as f64,
            SliceLayout::Homogeneous => 0.0,
        }
    }

    /// Spatial coordinates of grid point `i`.
    pub fn space<T: Real>(&self, spec: &SpacetimeSpec, i: usize) -> Vec<T> {
        match self {
            SliceLayout::Circle { .. } => vec![T::lit(self.spacing() * i as f64)],
            SliceLayout::Homogeneous => spec.representative_space(),
        }
    }

    fn check(&self, spec: &SpacetimeSpec, len: usize) -> Result<()> {
        match self {
            SliceLayout::Circle { n_grid } if spec.n != 1 => Err(CmcError::Argument(format!(
                "circle grid of {n_grid} points needs n = 1, spacetime has n = {}",
                spec.n
            ))),
            SliceLayout::Homogeneous if !spec.is_warped() => {
                Err(CmcError::Argument("homogeneous slices need a warped product".into()))
            }
            _ if len != self.len() => {
                Err(CmcError::Argument(format!("graph has {len} values, layout expects {}", self.len())))
            }
            _ => Ok(()),
        }
    }
}

/// A solved (or attempted) slice `graph u` with target mean curvature.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceGraph {
    pub u: Vec<f64>,
    pub tau: f64,
    /// `sup |H(u) − τ|`.
    pub residual: f64,
    pub converged: bool,
    pub layout: SliceLayout,
}

impl SliceGraph {
    pub fn mean_u(&self) -> f64 {
        self.u.iter().sum::<f64>() / self.u.len() as f64
    }

    pub fn min_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Which of the two unit normals is used for `h_ij`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Orientation {
    #[default]
    Past,
    Future,
}

/// Geometry of the graph at one grid point.
#[derive(Clone, Debug)]
pub struct PointGeometry<T> {
    pub point: Point<T>,
    /// `u_i`
    pub du: Vec<T>,
    /// `u^i = σ^{ij} u_j`
    pub du_up: Vec<T>,
    pub v: T,
    pub psi: T,
    pub g: Mat<T>,
    pub g_inv: Mat<T>,
    pub nu_up: Vec<T>,
    pub nu_down: Vec<T>,
    pub h: Mat<T>,
    pub mean_curvature: T,
    pub a2: T,
    /// `e^ψ v`, normal speed of the graph under `u → u + 1`.
    pub lapse: T,
    pub ambient: MetricPointData<T>,
}

#[derive(Clone, Debug)]
pub struct GraphGeometry<T> {
    pub layout: SliceLayout,
    pub points: Vec<PointGeometry<T>>,
    /// `max |h_A − h_B|` between the general formula and the ψ ≡ 0
    /// formula; `None` where the latter does not apply.
    pub path_gap: Option<f64>,
}

impl<T: Real> GraphGeometry<T> {
    pub fn mean_curvature(&self) -> Vec<T> {
        self.points.iter().map(|p| p.mean_curvature).collect()
    }

    pub fn lorentz(&self) -> Vec<T> {
        self.points.iter().map(|p| p.v).collect()
    }
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];

fn periodic_stencil<T: Real>(f: &[T], w: &[f64; 5], scale: f64) -> Vec<T> {
    let n = f.len();
    let s = T::lit(scale);
    (0..n)
        .map(|i| {
            let mut acc = T::zero();
            for (k, &wk) in w.iter().enumerate() {
                if wk != 0.0 {
                    acc = acc + T::lit(wk) * f[(i + n + k - 2) % n];
                }
            }
            acc * s
        })
        .collect()
}

/// Fourth-order central first derivative on a periodic grid of spacing `h`.
pub fn periodic_d1<T: Real>(f: &[T], h: f64) -> Vec<T> {
    periodic_stencil(f, &D1, 1.0 / h)
}

/// Fourth-order central second derivative on a periodic grid of spacing `h`.
pub fn periodic_d2<T: Real>(f: &[T], h: f64) -> Vec<T> {
    periodic_stencil(f, &D2, 1.0 / (h * h))
}

/// `v = sqrt(1 − σ^{ij} u_i u_j)` at each point; fails at the worst
/// non-spacelike point.
pub fn lorentz_factor<T: Real>(du: &[Vec<T>], sigma: &[Mat<T>]) -> Result<Vec<T>> {
    let mut worst: Option<(usize, f64)> = None;
    let mut out = Vec::with_capacity(du.len());
    for (i, (d, s)) in du.iter().zip(sigma).enumerate() {
        let s_inv = invert(s).ok_or_else(|| CmcError::InvalidMetric("singular spatial metric".into()))?;
        let du2 = norm2(&s_inv, d);
        if !(du2.re() < 1.0) {
            if worst.map_or(true, |(_, w)| du2.re() > w || du2.re().is_nan()) {
                worst = Some((i, du2.re()));
            }
            out.push(T::nan());
        } else {
            out.push((T::one() - du2).sqrt());
        }
    }
    match worst {
        Some((index, du2)) => Err(CmcError::SpacelikeViolation { index, du2 }),
        None => Ok(out),
    }
}

fn norm2<T: Real>(m: &Mat<T>, d: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..d.len() {
        for j in 0..d.len() {
            s = s + m[i][j] * d[i] * d[j];
        }
    }
    s
}

/// Geometry of `graph u` using the past-directed normal.
pub fn graph_geometry<T: Real>(spec: &SpacetimeSpec, layout: SliceLayout, u: &[T]) -> Result<GraphGeometry<T>> {
    layout.check(spec, u.len())?;
    match layout {
        SliceLayout::Circle { .. } => circle_geometry(spec, layout, u),
        SliceLayout::Homogeneous => homogeneous_geometry(spec, u[0]),
    }
}

fn circle_geometry<T: Real>(spec: &SpacetimeSpec, layout: SliceLayout, u: &[T]) -> Result<GraphGeometry<T>> {
    let n = u.len();
    let h = layout.spacing();
    let ux = periodic_d1(u, h);
    let uxx = periodic_d2(u, h);
    let mut fields = Vec::with_capacity(n);
    for i in 0..n {
        let p = Point::new(u[i], layout.space(spec, i));
        let f = spec.fields(&p)?;
        fields.push((p, f));
    }
    let du: Vec<Vec<T>> = ux.iter().map(|&d| vec![d]).collect();
    let sig: Vec<Mat<T>> = fields.iter().map(|(_, f)| vec![vec![f.sigma[0][0].v]]).collect();
    let v = lorentz_factor(&du, &sig)?;

    // induced metric g11 = e^{2ψ}(σ − u_x²) and its derivative along the grid
    let g11: Vec<T> = (0..n)
        .map(|i| {
            let f = &fields[i].1;
            (f.psi.v + f.psi.v).exp() * (f.sigma[0][0].v - ux[i] * ux[i])
        })
        .collect();
    let dg11 = periodic_d1(&g11, h);
    let dg11_low: Vec<f64> = (0..n).map(|i| (g11[(i + 1) % n].re() - g11[(i + n - 1) % n].re()) / (2.0 * h)).collect();
    let fd_err = (0..n).map(|i| (dg11[i].re() - dg11_low[i]).abs()).fold(0.0, f64::max);

    let mut points = Vec::with_capacity(n);
    let mut gap: Option<f64> = None;
    let mut gap_excess = 0.0f64;
    for (i, (p, f)) in fields.into_iter().enumerate() {
        let ambient = metric_from_fields(&f, true)?;
        let gm = &ambient.gamma;
        let (psi, sigma) = (f.psi.v, f.sigma[0][0].v);
        let e_psi = psi.exp();
        let vi = v[i];
        let ux_i = ux[i];
        let induced = christoffels(&vec![vec![g11[i]]], &[vec![vec![dg11[i]]]])?;
        let hess = uxx[i] - induced[0][0][0] * ux_i;
        let two = T::lit(2.0);
        let h_a = e_psi * vi * (-hess - gm[0][0][0] * ux_i * ux_i - two * gm[0][0][1] * ux_i - gm[0][1][1]);

        if f.psi.is_zero() {
            let (st, sx) = (f.sigma[0][0].d[0], f.sigma[0][0].d[1]);
            let gt = T::lit(0.5) * (st * ux_i + sx) / sigma;
            let h_b = -uxx[i] / vi + gt * ux_i / vi - vi * gm[0][1][1];
            let diff = (h_a - h_b).re().abs();
            let allowed =
                10.0 * (e_psi * vi * ux_i.abs()).re() * 0.5 * fd_err / g11[i].re() + 1e-10 * (1.0 + h_a.re().abs());
            gap = Some(gap.unwrap_or(0.0).max(diff));
            if diff > allowed {
                gap_excess = gap_excess.max(diff / allowed);
            }
        }

        let g_inv = T::one() / g11[i];
        let u_up = ux_i / sigma;
        let scale = -T::one() / (vi * e_psi);
        let nu_up = vec![scale, scale * u_up];
        let nu_down = lower(&ambient.g, &nu_up);
        let mean = g_inv * h_a;
        points.push(PointGeometry {
            point: p,
            du: vec![ux_i],
            du_up: vec![u_up],
            v: vi,
            psi,
            g: vec![vec![g11[i]]],
            g_inv: vec![vec![g_inv]],
            nu_up,
            nu_down,
            h: vec![vec![h_a]],
            mean_curvature: mean,
            a2: mean * mean,
            lapse: e_psi * vi,
            ambient,
        });
    }
    if gap_excess > 0.0 {
        return Err(CmcError::Consistency(format!(
            "second fundamental form formulas disagree by {gap_excess:.3}x the discretization allowance"
        )));
    }
    Ok(GraphGeometry { layout, points, path_gap: gap })
}

fn homogeneous_geometry<T: Real>(spec: &SpacetimeSpec, u: T) -> Result<GraphGeometry<T>> {
    let n = spec.n;
    let p = Point::new(u, spec.representative_space());
    let f = spec.fields(&p)?;
    let ambient = metric_from_fields(&f, true)?;
    let psi = f.psi.v;
    let e_psi = psi.exp();
    let e2 = e_psi * e_psi;
    let g: Mat<T> = (0..n).map(|i| (0..n).map(|j| e2 * f.sigma[i][j].v).collect()).collect();
    let g_inv = invert(&g).ok_or_else(|| CmcError::InvalidMetric("singular induced metric".into()))?;
    let h: Mat<T> = (0..n).map(|i| (0..n).map(|j| -e_psi * ambient.gamma[0][i + 1][j + 1]).collect()).collect();
    let (mean, a2) = trace_and_norm(&g_inv, &h);
    let mut nu_up = vec![T::zero(); n + 1];
    nu_up[0] = -T::one() / e_psi;
    let nu_down = lower(&ambient.g, &nu_up);
    let point = PointGeometry {
        point: p,
        du: vec![T::zero(); n],
        du_up: vec![T::zero(); n],
        v: T::one(),
        psi,
        g,
        g_inv,
        nu_up,
        nu_down,
        h,
        mean_curvature: mean,
        a2,
        lapse: e_psi,
        ambient,
    };
    Ok(GraphGeometry { layout: SliceLayout::Homogeneous, points: vec![point], path_gap: None })
}

fn lower<T: Real>(g: &Mat<T>, up: &[T]) -> Vec<T> {
    (0..up.len()).map(|a| (0..up.len()).fold(T::zero(), |s, b| s + g[a][b] * up[b])).collect()
}

/// `(g^{ij} h_ij, h_ij h^{ij})`.
fn trace_and_norm<T: Real>(g_inv: &Mat<T>, h: &Mat<T>) -> (T, T) {
    let n = h.len();
    let mut tr = T::zero();
    let mut mixed: Mat<T> = zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            tr = tr + g_inv[i][j] * h[i][j];
            for k in 0..n {
                mixed[i][j] = mixed[i][j] + g_inv[i][k] * h[k][j];
            }
        }
    }
    let mut a2 = T::zero();
    for i in 0..n {
        for j in 0..n {
            a2 = a2 + mixed[i][j] * mixed[j][i];
        }
    }
    (tr, a2)
}

/// Lorentz factor field of `graph u`.
pub fn lorentz_field(spec: &SpacetimeSpec, layout: SliceLayout, u: &[f64]) -> Result<Vec<f64>> {
    Ok(graph_geometry(spec, layout, u)?.lorentz())
}

/// `(g_ij, g^ij)` at each grid point.
pub fn induced_metric(spec: &SpacetimeSpec, layout: SliceLayout, u: &[f64]) -> Result<Vec<(Mat<f64>, Mat<f64>)>> {
    let geom = graph_geometry(spec, layout, u)?;
    Ok(geom.points.into_iter().map(|p| (p.g, p.g_inv)).collect())
}

/// Unit normal `(ν^α, ν_α)` at each grid point for the given orientation.
pub fn normals(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    u: &[f64],
    orientation: Orientation,
) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
    let sign = orientation_sign(orientation);
    let geom = graph_geometry(spec, layout, u)?;
    Ok(geom
        .points
        .into_iter()
        .map(|p| (p.nu_up.iter().map(|x| sign * x).collect(), p.nu_down.iter().map(|x| sign * x).collect()))
        .collect())
}

fn orientation_sign(o: Orientation) -> f64 {
    match o {
        Orientation::Past => 1.0,
        Orientation::Future => -1.0,
    }
}

/// `(h_ij, H, ‖A‖²)` at each grid point.
pub fn second_fundamental_form(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    u: &[f64],
) -> Result<Vec<(Mat<f64>, f64, f64)>> {
    let geom = graph_geometry(spec, layout, u)?;
    Ok(geom.points.into_iter().map(|p| (p.h, p.mean_curvature, p.a2)).collect())
}

/// Mean curvature from the embedding, `h_ij = −ν_α(x^α_{,ij} + Γ̄^α_βγ x^β_i x^γ_j)`,
/// with a chosen normal.  Independent of the covariant-Hessian formula.
pub fn mean_curvature_from_embedding(
    spec: &SpacetimeSpec,
    layout: SliceLayout,
    u: &[f64],
    orientation: Orientation,
) -> Result<Vec<f64>> {
    let nrm = normals(spec, layout, u, orientation)?;
    let geom = graph_geometry(spec, layout, u)?;
    let n = spec.n;
    let (ux, uxx) = match layout {
        SliceLayout::Circle { .. } => {
            let h = layout.spacing();
            (periodic_d1(u, h), periodic_d2(u, h))
        }
        SliceLayout::Homogeneous => (vec![0.0], vec![0.0]),
    };
    let mut out = Vec::with_capacity(u.len());
    for (k, (p, (_, nu_down))) in geom.points.iter().zip(&nrm).enumerate() {
        // tangent vectors x_i = (u_i, e_i)
        let tangent = |i: usize| {
            let mut t = vec![0.0; n + 1];
            t[0] = if n == 1 { ux[k] } else { 0.0 };
            t[i + 1] = 1.0;
            t
        };
        let gm = &p.ambient.gamma;
        let mut h = zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (ti, tj) = (tangent(i), tangent(j));
                let mut s = 0.0;
                for a in 0..=n {
                    let mut acc = if a == 0 && n == 1 { uxx[k] } else { 0.0 };
                    for b in 0..=n {
                        for c in 0..=n {
                            acc += gm[a][b][c] * ti[b] * tj[c];
                        }
                    }
                    s += nu_down[a] * acc;
                }
                h[i][j] = -s;
            }
        }
        out.push(trace_and_norm(&p.g_inv, &h).0);
    }
    Ok(out)
}

/// Second fundamental form of the coordinate slice `x0 = t` at `space`:
/// `h̄_ij = e^ψ(−½ σ̇_ij − ψ̇ σ_ij)`.
pub fn coordinate_slice_sff(spec: &SpacetimeSpec, t: f64, space: &[f64]) -> Result<Mat<f64>> {
    let f = spec.fields(&Point::new(t, space.to_vec()))?;
    let n = spec.n;
    let e_psi = f.psi.v.exp();
    let psi_t = f.psi.d[0];
    Ok((0..n)
        .map(|i| (0..n).map(|j| e_psi * (-0.5 * f.sigma[i][j].d[0] - psi_t * f.sigma[i][j].v)).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spacetime::{counterexample_fdot, counterexample_tau, make_spec, Chart, Family};

    fn circle_counterexample() -> SpacetimeSpec {
        make_spec(&Family::Counterexample { eps: 0.8, n: 1, chart: Chart::Gaussian }).unwrap()
    }

    #[test]
    fn lorentz_examples() {
        let s: Vec<Mat<f64>> = vec![vec![vec![1.0]]; 2];
        let v = lorentz_factor(&[vec![0.0], vec![0.6]], &s).unwrap();
        assert_eq!(v[0], 1.0);
        assert!((v[1] - 0.8).abs() < 1e-15);
        match lorentz_factor(&[vec![0.2], vec![1.0]], &s) {
            Err(CmcError::SpacelikeViolation { index, du2 }) => assert_eq!((index, du2), (1, 1.0)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn constant_graph_in_counterexample_is_umbilic() {
        let spec = circle_counterexample();
        let layout = SliceLayout::Circle { n_grid: 32 };
        let t = 0.4;
        let geom = graph_geometry(&spec, layout, &vec![t; 32]).unwrap();
        let tau: f64 = counterexample_tau(t, 0.8, 1).unwrap();
        for p in &geom.points {
            assert!((p.mean_curvature - tau).abs() < 1e-12);
            assert_eq!(p.v, 1.0);
            assert!((p.a2 - p.mean_curvature.powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_matches_closed_form() {
        for chart in [Chart::Gaussian, Chart::Conformal] {
            let spec = make_spec(&Family::Counterexample { eps: 0.8, n: 3, chart }).unwrap();
            let t = 0.35;
            let x0 = match &spec.model {
                crate::spacetime::Model::ConformalWarped { clock, .. } => clock.x0_of_t(t),
                _ => t,
            };
            let g = graph_geometry(&spec, SliceLayout::Homogeneous, &[x0]).unwrap();
            let p = &g.points[0];
            let fd: f64 = counterexample_fdot(t, 0.8).unwrap();
            assert!((p.mean_curvature + 3.0 * fd).abs() < 1e-9, "{chart:?}");
            assert!((p.a2 - p.mean_curvature.powi(2) / 3.0).abs() < 1e-9);
        }
    }

    #[test]
    fn induced_metric_and_normal_for_tilted_graph() {
        let spec = make_spec(&Family::Flat { n: 1, t_min: -1.0, t_max: 1.0 }).unwrap();
        let layout = SliceLayout::Circle { n_grid: 64 };
        let u: Vec<f64> = (0..64).map(|i| 0.3 * (layout.spacing() * i as f64).sin()).collect();
        let geom = graph_geometry(&spec, layout, &u).unwrap();
        for p in &geom.points {
            assert!((p.g[0][0] * p.g_inv[0][0] - 1.0).abs() < 1e-12);
            let gn = crate::geometry::quadratic_form(&p.ambient.g, &p.nu_up);
            assert!((gn + 1.0).abs() < 1e-10);
            assert!(p.nu_up[0] < 0.0);
        }
    }

    #[test]
    fn flat_constant_slice_is_totally_geodesic() {
        let spec = make_spec(&Family::Flat { n: 2, t_min: -1.0, t_max: 1.0 }).unwrap();
        let g = graph_geometry(&spec, SliceLayout::Homogeneous, &[0.2]).unwrap();
        assert!(g.points[0].h.iter().flatten().all(|&x| x == 0.0));
        assert_eq!(g.points[0].mean_curvature, 0.0);
    }

    #[test]
    fn spacelike_guard() {
        let spec = make_spec(&Family::Flat { n: 1, t_min: -1.0, t_max: 1.0 }).unwrap();
        let layout = SliceLayout::Circle { n_grid: 32 };
        let u: Vec<f64> = (0..32).map(|i| 0.9 * (layout.spacing() * i as f64 * 2.0).sin()).collect();
        assert!(matches!(graph_geometry(&spec, layout, &u), Err(CmcError::SpacelikeViolation { .. })));
    }

    #[test]
    fn layout_validation() {
        let spec = circle_counterexample();
        assert!(SliceLayout::for_spec(&spec, 8).is_err());
        let expr =
            make_spec(&Family::Expression { psi: "0".into(), sigma: "1".into(), t_min: -1.0, t_max: 1.0 }).unwrap();
        assert!(graph_geometry(&expr, SliceLayout::Homogeneous, &[0.1]).is_err());
        assert!(graph_geometry(&spec, SliceLayout::Circle { n_grid: 32 }, &[0.1; 31]).is_err());
    }

    #[test]
    fn three_formulas_agree_on_perturbed_graph() {
        let spec = circle_counterexample();
        let mut gaps = Vec::new();
        for n in [64, 128] {
            let layout = SliceLayout::Circle { n_grid: n };
            let u: Vec<f64> = (0..n).map(|i| 0.3 + 0.05 * (layout.spacing() * i as f64).sin()).collect();
            let geom = graph_geometry(&spec, layout, &u).unwrap();
            gaps.push(geom.path_gap.unwrap());
            let past = mean_curvature_from_embedding(&spec, layout, &u, Orientation::Past).unwrap();
            let fut = mean_curvature_from_embedding(&spec, layout, &u, Orientation::Future).unwrap();
            for ((p, a), b) in geom.points.iter().zip(&past).zip(&fut) {
                assert!((p.mean_curvature - a).abs() < 1e-6, "{} vs {a}", p.mean_curvature);
                assert_eq!(*a, -*b);
            }
        }
        assert!(gaps[1] < gaps[0] / 8.0, "{gaps:?}");
    }

    #[test]
    fn periodic_derivatives_of_sine() {
        let n = 64;
        let h = std::f64::consts::TAU / n as f64;
        let f: Vec<f64> = (0..n).map(|i| (h * i as f64).sin()).collect();
        let d1 = periodic_d1(&f, h);
        let d2 = periodic_d2(&f, h);
        for i in 0..n {
            let x = h * i as f64;
            assert!((d1[i] - x.cos()).abs() < 1e-5);
            assert!((d2[i] + x.sin()).abs() < 1e-5);
        }
    }
}
