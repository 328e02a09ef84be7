//! Ambient Lorentzian geometry: metric with two derivative orders,
//! Christoffel symbols, Ricci tensor and the timelike convergence check.

mod multijet;
mod tcc;

pub use multijet::MultiJet;
pub use tcc::{tcc_check, tcc_sample, TccReport, TccSample, TCC_STRICT_THRESHOLD};

use crate::error::{CmcError, Result};
use crate::linalg::{invert, zeros, Mat};
use crate::scalar::Real;
use crate::spacetime::{ConformalFields, Point, SpacetimeSpec};

/// `Γ^a_bc` stored as `gamma[a][b][c]`.
pub type Christoffels<T> = Vec<Mat<T>>;

/// Metric components and their partial derivatives at one point.
#[derive(Clone, Debug)]
pub struct MetricPointData<T> {
    pub g: Mat<T>,
    pub g_inv: Mat<T>,
    /// `dg[a][b][c] = ∂_a g_bc`
    pub dg: Vec<Mat<T>>,
    /// `ddg[a][b][c][d] = ∂_a ∂_b g_cd`
    pub ddg: Vec<Vec<Mat<T>>>,
    pub gamma: Christoffels<T>,
    /// Coordinates are future oriented (x0 increases to the future).
    pub future_oriented: bool,
}

impl<T: Real> MetricPointData<T> {
    pub fn dim(&self) -> usize {
        self.g.len()
    }
}

/// Assembles `e^{2ψ}(-dx0² + σ)` (or the bare product metric when
/// `with_conformal_factor` is false) from field jets.
pub(crate) fn metric_from_fields<T: Real>(
    fields: &ConformalFields<T>,
    with_conformal_factor: bool,
) -> Result<MetricPointData<T>> {
    let n = fields.sigma.len();
    let dim = n + 1;
    let factor =
        if with_conformal_factor { fields.psi.scale(T::lit(2.0)).exp() } else { MultiJet::constant(dim, T::one()) };
    let mut comps: Vec<Vec<MultiJet<T>>> = vec![vec![MultiJet::constant(dim, T::zero()); dim]; dim];
    comps[0][0] = factor.scale(-T::one());
    for i in 0..n {
        for j in 0..n {
            comps[i + 1][j + 1] = factor.mul(&fields.sigma[i][j]);
        }
    }
    let g: Mat<T> = comps.iter().map(|r| r.iter().map(|c| c.v).collect()).collect();
    let mut dg = vec![zeros(dim, dim); dim];
    let mut ddg = vec![vec![zeros(dim, dim); dim]; dim];
    for b in 0..dim {
        for c in 0..dim {
            for a in 0..dim {
                dg[a][b][c] = comps[b][c].d[a];
                for e in 0..dim {
                    ddg[a][e][b][c] = comps[b][c].dd[a][e];
                }
            }
        }
    }
    let g_inv = invert(&g).ok_or_else(|| CmcError::InvalidMetric("singular metric".into()))?;
    let gamma = christoffel_symbols(&g_inv, &dg);
    Ok(MetricPointData { g, g_inv, dg, ddg, gamma, future_oriented: true })
}

/// Metric, derivatives and Christoffels of the spacetime at `p`.
pub fn eval_metric<T: Real>(spec: &SpacetimeSpec, p: &Point<T>) -> Result<MetricPointData<T>> {
    let fields = spec.fields(p)?;
    metric_from_fields(&fields, true)
}

fn christoffel_symbols<T: Real>(g_inv: &Mat<T>, dg: &[Mat<T>]) -> Christoffels<T> {
    let dim = g_inv.len();
    let half = T::lit(0.5);
    let mut gamma = vec![zeros(dim, dim); dim];
    for a in 0..dim {
        for b in 0..dim {
            for c in b..dim {
                let mut s = T::zero();
                for d in 0..dim {
                    s = s + g_inv[a][d] * (dg[b][d][c] + dg[c][d][b] - dg[d][b][c]);
                }
                gamma[a][b][c] = half * s;
                gamma[a][c][b] = half * s;
            }
        }
    }
    gamma
}

/// `Γ^a_bc = ½ g^{ad}(∂_b g_dc + ∂_c g_db − ∂_d g_bc)` for any metric given
/// with its first derivatives (`dg[a] = ∂_a g`).
pub fn christoffels<T: Real>(g: &Mat<T>, dg: &[Mat<T>]) -> Result<Christoffels<T>> {
    let g_inv = invert(g).ok_or_else(|| CmcError::InvalidMetric("singular metric".into()))?;
    Ok(christoffel_symbols(&g_inv, dg))
}

/// Ricci tensor `R_bd = ∂_a Γ^a_bd − ∂_d Γ^a_ba + Γ^a_ae Γ^e_bd − Γ^a_de Γ^e_ba`.
pub fn ricci_from_metric<T: Real>(m: &MetricPointData<T>) -> Mat<T> {
    let dim = m.dim();
    let half = T::lit(0.5);
    // ∂_e g^{ad} = -g^{ap} ∂_e g_pq g^{qd}
    let mut dginv = vec![zeros(dim, dim); dim];
    for e in 0..dim {
        for a in 0..dim {
            for d in 0..dim {
                let mut s = T::zero();
                for p in 0..dim {
                    for q in 0..dim {
                        s = s + m.g_inv[a][p] * m.dg[e][p][q] * m.g_inv[q][d];
                    }
                }
                dginv[e][a][d] = -s;
            }
        }
    }
    // dgamma[e][a][b][c] = ∂_e Γ^a_bc
    let mut dgamma = vec![vec![zeros(dim, dim); dim]; dim];
    for e in 0..dim {
        for a in 0..dim {
            for b in 0..dim {
                for c in b..dim {
                    let mut s = T::zero();
                    for d in 0..dim {
                        let sym = m.dg[b][d][c] + m.dg[c][d][b] - m.dg[d][b][c];
                        let dsym = m.ddg[e][b][d][c] + m.ddg[e][c][d][b] - m.ddg[e][d][b][c];
                        s = s + dginv[e][a][d] * sym + m.g_inv[a][d] * dsym;
                    }
                    dgamma[e][a][b][c] = half * s;
                    dgamma[e][a][c][b] = half * s;
                }
            }
        }
    }
    let gm = &m.gamma;
    let mut r = zeros(dim, dim);
    for b in 0..dim {
        for d in b..dim {
            let mut s = T::zero();
            for a in 0..dim {
                s = s + dgamma[a][a][b][d] - dgamma[d][a][b][a];
                for e in 0..dim {
                    s = s + gm[a][a][e] * gm[e][b][d] - gm[a][d][e] * gm[e][b][a];
                }
            }
            r[b][d] = s;
            r[d][b] = s;
        }
    }
    r
}

/// Ricci data at a point, with the conformal split `ḡ = e^{2ψ} g`.
#[derive(Clone, Debug)]
pub struct RicciData<T> {
    /// Ricci tensor of the full metric ḡ.
    pub rbar: Mat<T>,
    /// Ricci tensor of `g = -dx0² + σ`.
    pub r_product: Mat<T>,
    pub product: MetricPointData<T>,
    pub psi: MultiJet<T>,
}

pub fn ricci<T: Real>(spec: &SpacetimeSpec, p: &Point<T>) -> Result<RicciData<T>> {
    let fields = spec.fields(p)?;
    let full = metric_from_fields(&fields, true)?;
    let product = metric_from_fields(&fields, false)?;
    Ok(RicciData { rbar: ricci_from_metric(&full), r_product: ricci_from_metric(&product), product, psi: fields.psi })
}

/// Max-norm residual of
/// `R̄_ab − [R_ab − (n−1)(ψ_ab − ψ_a ψ_b) − g_ab (Δψ + (n−1)|Dψ|²)]`,
/// with covariant derivatives and norms taken in the product metric `g`.
pub fn conformal_ricci_check<T: Real>(data: &RicciData<T>) -> T {
    let g = &data.product;
    let dim = g.dim();
    let nm1 = T::lit(dim as f64 - 2.0);
    let psi = &data.psi;
    let mut hess = zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut s = psi.dd[a][b];
            for c in 0..dim {
                s = s - g.gamma[c][a][b] * psi.d[c];
            }
            hess[a][b] = s;
        }
    }
    let mut lap = T::zero();
    let mut grad2 = T::zero();
    for a in 0..dim {
        for b in 0..dim {
            lap = lap + g.g_inv[a][b] * hess[a][b];
            grad2 = grad2 + g.g_inv[a][b] * psi.d[a] * psi.d[b];
        }
    }
    let mut res = T::zero();
    for a in 0..dim {
        for b in 0..dim {
            let predicted =
                data.r_product[a][b] - nm1 * (hess[a][b] - psi.d[a] * psi.d[b]) - g.g[a][b] * (lap + nm1 * grad2);
            res = res.max((data.rbar[a][b] - predicted).abs());
        }
    }
    res
}

/// `R̄_ab v^a v^b`.
pub fn quadratic_form<T: Real>(r: &Mat<T>, v: &[T]) -> T {
    let mut s = T::zero();
    for a in 0..v.len() {
        for b in 0..v.len() {
            s = s + r[a][b] * v[a] * v[b];
        }
    }
    s
}
