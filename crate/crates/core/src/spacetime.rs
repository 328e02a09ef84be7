//! Builtin spacetime families and user-defined 1+1 expression spacetimes.
//!
//! Every spacetime is stored in conformal Gaussian form
//! `ds² = e^{2ψ}(-dx0² + σ_ij dx^i dx^j)`.  Warped products over the unit
//! sphere use hyperspherical angles as spatial coordinates.

use serde::{Deserialize, Serialize};

use crate::error::{CmcError, Result};
use crate::expr::{parse, Expr};
use crate::geometry::MultiJet;
use crate::linalg::{zeros, Mat};
use crate::quad::{bisect_increasing, gauss_legendre8};
use crate::scalar::Real;

/// Coordinate chart for warped products.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    /// `-dt² + e^{2f(t)} σ̂`, ψ ≡ 0.
    #[default]
    Gaussian,
    /// `e^{2f}(-dx0² + σ̂)` with `dx0/dt = e^{-f}`.
    Conformal,
}

fn default_psi() -> String {
    "0".to_string()
}

/// Family tag plus parameters, as read from run configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Family {
    /// `f(t) = -∫₀ᵗ s³/(ε²-s²) ds` over the unit `Sⁿ`, `t ∈ (-ε, ε)`.
    Counterexample {
        eps: f64,
        n: usize,
        #[serde(default)]
        chart: Chart,
    },
    /// Static product `-dt² + σ̂` (f ≡ 0).
    Flat { n: usize, t_min: f64, t_max: f64 },
    /// Warped product with a user warp expression `f(t)`.
    Warped {
        warp: String,
        n: usize,
        t_min: f64,
        t_max: f64,
        #[serde(default)]
        chart: Chart,
    },
    /// n = 1 spacetime `e^{2ψ(t,x)}(-dt² + σ(t,x) dx²)` on `(t_min, t_max) × S¹`.
    Expression {
        #[serde(default = "default_psi")]
        psi: String,
        sigma: String,
        t_min: f64,
        t_max: f64,
    },
}

/// Warp function `f(t)` of a warped product.
#[derive(Clone, Debug, PartialEq)]
pub enum Warp {
    Flat,
    Counterexample { eps: f64 },
    Expr(Expr),
}

impl Warp {
    /// `(f, ḟ, f̈)` at `t`.
    pub fn derivs<T: Real>(&self, t: T) -> Result<[T; 3]> {
        match self {
            Warp::Flat => Ok([T::zero(); 3]),
            Warp::Counterexample { eps } => {
                Ok([counterexample_f(t, *eps)?, counterexample_fdot(t, *eps)?, counterexample_fddot(t, *eps)?])
            }
            Warp::Expr(e) => {
                let j = e.eval_jet(t, T::zero())?;
                Ok([j.v, j.t, j.tt])
            }
        }
    }
}

fn check_counterexample_domain<T: Real>(t: T, eps: f64) -> Result<()> {
    if !(t.re().abs() < eps) {
        return Err(CmcError::Domain { x0: t.re(), lo: -eps, hi: eps });
    }
    Ok(())
}

/// `f(t) = -∫₀ᵗ s³/(ε²-s²) ds = t²/2 + (ε²/2) ln(1 - t²/ε²)`.
pub fn counterexample_f<T: Real>(t: T, eps: f64) -> Result<T> {
    check_counterexample_domain(t, eps)?;
    let e2 = T::lit(eps * eps);
    let s = t * t / e2;
    let half_e2 = e2 * T::lit(0.5);
    if s.re() < 1e-2 {
        // s + ln(1 - s) = -Σ_{k≥2} s^k / k
        let mut acc = T::zero();
        let mut pow = s * s;
        for k in 2..40 {
            acc = acc + pow / T::lit(k as f64);
            pow = pow * s;
        }
        Ok(-half_e2 * acc)
    } else {
        Ok(t * t * T::lit(0.5) + half_e2 * (-s).ln_1p())
    }
}

/// `ḟ(t) = -t³/(ε²-t²)`.
pub fn counterexample_fdot<T: Real>(t: T, eps: f64) -> Result<T> {
    check_counterexample_domain(t, eps)?;
    let d = T::lit(eps * eps) - t * t;
    Ok(-(t * t * t) / d)
}

/// `f̈(t) = -(3t²ε² - t⁴)/(ε²-t²)²`.
pub fn counterexample_fddot<T: Real>(t: T, eps: f64) -> Result<T> {
    check_counterexample_domain(t, eps)?;
    let e2 = T::lit(eps * eps);
    let t2 = t * t;
    let d = e2 - t2;
    Ok(-(T::lit(3.0) * t2 * e2 - t2 * t2) / (d * d))
}

/// Mean curvature of the level set `{t = const}`: `τ = n t³/(ε² - t²)`.
pub fn counterexample_tau<T: Real>(t: T, eps: f64, n: usize) -> Result<T> {
    check_counterexample_domain(t, eps)?;
    Ok(T::lit(n as f64) * t * t * t / (T::lit(eps * eps) - t * t))
}

/// `f̈ + ḟ²` in the expanded three-term form.
pub fn core_inequality<T: Real>(t: T, eps: f64) -> Result<T> {
    check_counterexample_domain(t, eps)?;
    let t2 = t * t;
    let d = T::lit(eps * eps) - t2;
    let d2 = d * d;
    Ok(-T::lit(3.0) * t2 / d - T::lit(2.0) * t2 * t2 / d2 + t2 * t2 * t2 / d2)
}

/// Conformal time `x0(t) = ∫_{t_ref}^t e^{-f(s)} ds` and its inverse.
///
/// The integral is tabulated in the angle `θ` with `t = c + r sin θ`, which
/// removes the integrable endpoint blow-up of `e^{-f}` for the builtin warp.
#[derive(Clone, Debug, PartialEq)]
pub struct ConformalClock {
    warp: Warp,
    center: f64,
    radius: f64,
    theta_max: f64,
    /// `cum[k] = ∫` from `-theta_max` to node `k`, shifted so that `x0(t_ref) = 0`.
    cum: Vec<f64>,
}

const CLOCK_PANELS: usize = 2048;

impl ConformalClock {
    pub fn new(warp: Warp, t_lo: f64, t_hi: f64) -> Self {
        let center = 0.5 * (t_lo + t_hi);
        let radius = 0.5 * (t_hi - t_lo);
        let theta_max = (1.0 - 2e-9f64).asin();
        let mut clock = ConformalClock { warp, center, radius, theta_max, cum: Vec::new() };
        let mut cum = Vec::with_capacity(CLOCK_PANELS + 1);
        cum.push(0.0);
        for k in 0..CLOCK_PANELS {
            let (a, b) = (clock.node(k), clock.node(k + 1));
            let last = cum[k];
            cum.push(last + gauss_legendre8(&|th| clock.integrand(th), a, b));
        }
        clock.cum = cum;
        let t_ref = if t_lo < 0.0 && 0.0 < t_hi { 0.0 } else { center };
        let shift = clock.x0_of_t(t_ref);
        for c in &mut clock.cum {
            *c -= shift;
        }
        clock
    }

    fn node(&self, k: usize) -> f64 {
        -self.theta_max + 2.0 * self.theta_max * k as f64 / CLOCK_PANELS as f64
    }

    /// `e^{-f(t(θ))} dt/dθ`.
    fn integrand(&self, th: f64) -> f64 {
        let t = self.center + self.radius * th.sin();
        let f = self.warp.derivs(t).map(|[f, _, _]| f).unwrap_or(f64::NAN);
        (-f).exp() * self.radius * th.cos()
    }

    fn theta_of_t(&self, t: f64) -> f64 {
        ((t - self.center) / self.radius).clamp(-1.0, 1.0).asin()
    }

    fn x0_of_theta(&self, th: f64) -> f64 {
        let th = th.clamp(-self.theta_max, self.theta_max);
        let w = 2.0 * self.theta_max / CLOCK_PANELS as f64;
        let k = (((th + self.theta_max) / w).floor() as usize).min(CLOCK_PANELS - 1);
        let a = self.node(k);
        let base = self.cum.get(k).copied().unwrap_or(0.0);
        base + gauss_legendre8(&|s| self.integrand(s), a, th)
    }

    pub fn x0_of_t(&self, t: f64) -> f64 {
        self.x0_of_theta(self.theta_of_t(t))
    }

    /// Admissible `t` range, shrunk slightly off the (possibly singular) ends.
    fn t_range(&self) -> (f64, f64) {
        let d = self.radius * self.theta_max.sin();
        (self.center - d, self.center + d)
    }

    pub fn x0_range(&self) -> (f64, f64) {
        (self.cum[0], self.cum[CLOCK_PANELS])
    }

    pub fn t_of_x0(&self, x0: f64) -> f64 {
        let k = self.cum.partition_point(|&c| c <= x0).clamp(1, CLOCK_PANELS) - 1;
        let th = bisect_increasing(|th| self.x0_of_theta(th), x0, self.node(k), self.node(k + 1));
        let (lo, hi) = self.t_range();
        let mut t = (self.center + self.radius * th.sin()).clamp(lo, hi);
        // polish: dx0/dt = e^{-f}
        for _ in 0..2 {
            let r = self.x0_of_t(t) - x0;
            let f = self.warp.derivs(t).map(|[f, _, _]| f).unwrap_or(f64::NAN);
            let step = r * f.exp();
            if !step.is_finite() {
                break;
            }
            t = (t - step).clamp(lo, hi);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Warped { warp: Warp },
    ConformalWarped { warp: Warp, clock: ConformalClock },
    Expression { psi: Expr, sigma: Expr },
}

/// A point `(x0, x^1, …, x^n)` of spacetime.
#[derive(Clone, Debug, PartialEq)]
pub struct Point<T> {
    pub x0: T,
    pub space: Vec<T>,
}

impl<T: Real> Point<T> {
    pub fn new(x0: T, space: Vec<T>) -> Self {
        Point { x0, space }
    }
}

/// `ψ` and `σ_ij` as second-order jets in all `n + 1` coordinates.
#[derive(Clone, Debug)]
pub struct ConformalFields<T> {
    pub psi: MultiJet<T>,
    pub sigma: Mat<MultiJet<T>>,
}

/// A spacetime in conformal Gaussian form.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeSpec {
    pub family: Family,
    pub n: usize,
    /// Open interval of the time coordinate of the chart.
    pub interval: (f64, f64),
    pub model: Model,
}

/// Builds the spacetime described by `family`.
pub fn make_spec(family: &Family) -> Result<SpacetimeSpec> {
    let check_n = |n: usize| {
        if n < 1 {
            Err(CmcError::Argument("spatial dimension n must be >= 1".into()))
        } else {
            Ok(())
        }
    };
    let check_interval = |lo: f64, hi: f64| {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            Err(CmcError::Argument(format!("time interval ({lo}, {hi}) is empty or not finite")))
        } else {
            Ok(())
        }
    };
    let warped = |warp: Warp, n: usize, lo: f64, hi: f64, chart: Chart| match chart {
        Chart::Gaussian => {
            SpacetimeSpec { family: family.clone(), n, interval: (lo, hi), model: Model::Warped { warp } }
        }
        Chart::Conformal => {
            let clock = ConformalClock::new(warp.clone(), lo, hi);
            SpacetimeSpec {
                family: family.clone(),
                n,
                interval: clock.x0_range(),
                model: Model::ConformalWarped { warp, clock },
            }
        }
    };
    match family {
        Family::Counterexample { eps, n, chart } => {
            check_n(*n)?;
            if !(*eps > 0.0 && *eps <= 1.0) {
                return Err(CmcError::Argument(format!("eps must lie in (0, 1], got {eps}")));
            }
            Ok(warped(Warp::Counterexample { eps: *eps }, *n, -eps, *eps, *chart))
        }
        Family::Flat { n, t_min, t_max } => {
            check_n(*n)?;
            check_interval(*t_min, *t_max)?;
            Ok(warped(Warp::Flat, *n, *t_min, *t_max, Chart::Gaussian))
        }
        Family::Warped { warp, n, t_min, t_max, chart } => {
            check_n(*n)?;
            check_interval(*t_min, *t_max)?;
            let e = parse(warp)?;
            if !e.is_x_free() {
                return Err(CmcError::Argument("warp expression must depend on t only".into()));
            }
            Ok(warped(Warp::Expr(e), *n, *t_min, *t_max, *chart))
        }
        Family::Expression { psi, sigma, t_min, t_max } => {
            check_interval(*t_min, *t_max)?;
            Ok(SpacetimeSpec {
                family: family.clone(),
                n: 1,
                interval: (*t_min, *t_max),
                model: Model::Expression { psi: parse(psi)?, sigma: parse(sigma)? },
            })
        }
    }
}

impl SpacetimeSpec {
    /// Dimension of spacetime, `n + 1`.
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// True for warped products, whose constant graphs are CMC leaves.
    pub fn is_warped(&self) -> bool {
        !matches!(self.model, Model::Expression { .. })
    }

    pub fn warp(&self) -> Option<&Warp> {
        match &self.model {
            Model::Warped { warp } | Model::ConformalWarped { warp, .. } => Some(warp),
            Model::Expression { .. } => None,
        }
    }

    pub fn check_time<T: Real>(&self, x0: T) -> Result<()> {
        let (lo, hi) = self.interval;
        let v = x0.re();
        if !(v > lo && v < hi) {
            return Err(CmcError::Domain { x0: v, lo, hi });
        }
        Ok(())
    }

    /// Spatial point where the round sphere metric is the identity.
    pub fn representative_space<T: Real>(&self) -> Vec<T> {
        if self.n == 1 {
            vec![T::zero()]
        } else {
            let mut s = vec![T::FRAC_PI_2(); self.n];
            s[self.n - 1] = T::zero();
            s
        }
    }

    /// Round metric of the unit `Sⁿ` in hyperspherical angles, as jets.
    fn sphere_metric<T: Real>(&self, space: &[T]) -> Result<Mat<MultiJet<T>>> {
        let n = self.n;
        let dim = n + 1;
        let zero = MultiJet::constant(dim, T::zero());
        let mut s = vec![vec![zero; n]; n];
        let mut acc = MultiJet::constant(dim, T::one());
        for k in 0..n {
            s[k][k] = acc.clone();
            if k + 1 < n {
                let th = space[k];
                let sin2 = th.sin() * th.sin();
                let d1 = (th + th).sin();
                let d2 = T::lit(2.0) * (th + th).cos();
                acc = acc.mul(&MultiJet::univariate(dim, k + 1, sin2, d1, d2));
            }
        }
        if s.iter().enumerate().any(|(k, r)| r[k].v <= T::zero()) {
            return Err(CmcError::InvalidMetric("sphere coordinates at a pole".into()));
        }
        Ok(s)
    }

    /// `ψ` and `σ_ij` with derivatives to second order at `p`.
    pub fn fields<T: Real>(&self, p: &Point<T>) -> Result<ConformalFields<T>> {
        self.check_time(p.x0)?;
        if p.space.len() != self.n {
            return Err(CmcError::Argument(format!(
                "point has {} spatial coordinates, spacetime has n = {}",
                p.space.len(),
                self.n
            )));
        }
        let dim = self.dim();
        match &self.model {
            Model::Warped { warp } => {
                let [f, fd, fdd] = warp.derivs(p.x0)?;
                let a = (f + f).exp();
                let two = T::lit(2.0);
                let scale = MultiJet::univariate(dim, 0, a, two * fd * a, (two * fdd + two * two * fd * fd) * a);
                let sigma = self
                    .sphere_metric(&p.space)?
                    .into_iter()
                    .map(|row| row.iter().map(|s| s.mul(&scale)).collect())
                    .collect();
                Ok(ConformalFields { psi: MultiJet::constant(dim, T::zero()), sigma })
            }
            Model::ConformalWarped { warp, clock } => {
                let x0 = p.x0.re();
                let t_re = clock.t_of_x0(x0);
                let [f_re, _, _] = warp.derivs(t_re)?;
                // first-order lift of t(x0) so dual-number perturbations propagate
                let t = T::lit(t_re) + (p.x0 - T::lit(x0)) * T::lit(f_re.exp());
                let [f, fd, fdd] = warp.derivs(t)?;
                let ef = f.exp();
                let psi = MultiJet::univariate(dim, 0, f, fd * ef, (fdd + fd * fd) * ef * ef);
                Ok(ConformalFields { psi, sigma: self.sphere_metric(&p.space)? })
            }
            Model::Expression { psi, sigma } => {
                let (t, x) = (p.x0, p.space[0]);
                let pj = psi.eval_jet(t, x)?;
                let sj = sigma.eval_jet(t, x)?;
                if sj.v <= T::zero() {
                    return Err(CmcError::InvalidMetric(format!(
                        "sigma = {} is not positive at (t, x) = ({}, {})",
                        sj.v.re(),
                        t.re(),
                        x.re()
                    )));
                }
                Ok(ConformalFields {
                    psi: MultiJet::from_jet2(dim, 0, 1, &pj),
                    sigma: vec![vec![MultiJet::from_jet2(dim, 0, 1, &sj)]],
                })
            }
        }
    }

    /// Closed-form Ricci tensor of a warped product at chart time `x0` and
    /// spatial point `space`, for comparison with the generic computation.
    pub fn warped_ricci_closed_form<T: Real>(&self, x0: T, space: &[T]) -> Result<Option<Mat<T>>> {
        let (warp, conformal) = match &self.model {
            Model::Warped { warp } => (warp, None),
            Model::ConformalWarped { warp, clock } => (warp, Some(clock)),
            Model::Expression { .. } => return Ok(None),
        };
        self.check_time(x0)?;
        let t = match conformal {
            Some(c) => T::lit(c.t_of_x0(x0.re())),
            None => x0,
        };
        let [f, fd, fdd] = warp.derivs(t)?;
        let n = self.n;
        let nf = T::lit(n as f64);
        let e2f = (f + f).exp();
        let sphere = self.sphere_metric(space)?;
        let mut r = zeros(n + 1, n + 1);
        r[0][0] = -nf * (fdd + fd * fd);
        if conformal.is_some() {
            r[0][0] = r[0][0] * e2f;
        }
        for i in 0..n {
            r[i + 1][i + 1] = sphere[i][i].v * (nf - T::one() + e2f * (fdd + nf * fd * fd));
        }
        Ok(Some(r))
    }
}
