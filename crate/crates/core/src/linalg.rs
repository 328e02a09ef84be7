//! Dense and cyclic-tridiagonal kernels used by the solvers.

use crate::scalar::Real;

pub type Mat<T> = Vec<Vec<T>>;

pub fn zeros<T: Real>(rows: usize, cols: usize) -> Mat<T> {
    vec![vec![T::zero(); cols]; rows]
}

pub fn identity<T: Real>(n: usize) -> Mat<T> {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = T::one();
    }
    m
}

pub fn mat_vec<T: Real>(a: &Mat<T>, x: &[T]) -> Vec<T> {
    a.iter().map(|row| row.iter().zip(x).fold(T::zero(), |s, (&a, &b)| s + a * b)).collect()
}

pub fn mat_mul<T: Real>(a: &Mat<T>, b: &Mat<T>) -> Mat<T> {
    let (n, m, k) = (a.len(), b[0].len(), b.len());
    let mut c = zeros(n, m);
    for i in 0..n {
        for l in 0..k {
            let ail = a[i][l];
            for j in 0..m {
                c[i][j] = c[i][j] + ail * b[l][j];
            }
        }
    }
    c
}

pub fn sup_norm<T: Real>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |m, v| m.max(v.abs()))
}

/// LU factorisation with partial pivoting.
#[derive(Clone, Debug)]
pub struct Lu<T> {
    lu: Mat<T>,
    perm: Vec<usize>,
}

impl<T: Real> Lu<T> {
    /// Returns `None` when a pivot is exactly zero.
    pub fn factor(mut a: Mat<T>) -> Option<Self> {
        let n = a.len();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().partial_cmp(&a[j][k].abs()).unwrap_or(std::cmp::Ordering::Less))?;
            if a[p][k] == T::zero() || !a[p][k].is_finite() {
                return None;
            }
            a.swap(k, p);
            perm.swap(k, p);
            let pivot = a[k][k];
            for i in k + 1..n {
                let f = a[i][k] / pivot;
                a[i][k] = f;
                if f != T::zero() {
                    for j in k + 1..n {
                        let akj = a[k][j];
                        a[i][j] = a[i][j] - f * akj;
                    }
                }
            }
        }
        Some(Lu { lu: a, perm })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.lu.len();
        let mut x: Vec<T> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s = s - self.lu[i][j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s = s - self.lu[i][j] * x[j];
            }
            x[i] = s / self.lu[i][i];
        }
        x
    }

    /// Smallest |pivot| relative to the largest.
    pub fn pivot_ratio(&self) -> T {
        let piv = self.lu.iter().enumerate().map(|(i, r)| r[i].abs());
        let (lo, hi) = piv.fold((T::infinity(), T::zero()), |(lo, hi), p| (lo.min(p), hi.max(p)));
        if hi == T::zero() {
            T::zero()
        } else {
            lo / hi
        }
    }
}

/// Inverse of a small dense matrix; `None` if singular.
pub fn invert<T: Real>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.len();
    let lu = Lu::factor(a.clone())?;
    let mut inv = zeros(n, n);
    let mut e = vec![T::zero(); n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = T::zero());
        e[j] = T::one();
        let col = lu.solve(&e);
        for i in 0..n {
            inv[i][j] = col[i];
        }
    }
    Some(inv)
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky<T: Real>(a: &Mat<T>) -> Option<Mat<T>> {
    let n = a.len();
    let mut l = zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut s = a[i][j];
            for k in 0..j {
                s = s - l[i][k] * l[j][k];
            }
            if i == j {
                if s <= T::zero() {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    Some(l)
}

/// Symmetric cyclic tridiagonal matrix: `diag[i]` on the diagonal and
/// `off[i]` coupling `i` with `i + 1 (mod n)`.
#[derive(Clone, Debug)]
pub struct CyclicTridiag<T> {
    pub diag: Vec<T>,
    pub off: Vec<T>,
}

impl<T: Real> CyclicTridiag<T> {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let n = self.len();
        if n == 1 {
            return vec![self.diag[0] * x[0]];
        }
        (0..n)
            .map(|i| {
                let ip = (i + 1) % n;
                let im = (i + n - 1) % n;
                self.diag[i] * x[i] + self.off[i] * x[ip] + self.off[im] * x[im]
            })
            .collect()
    }

    /// Solves `(A - shift I) x = b` by Sherman-Morrison on the periodic corner.
    pub fn solve_shifted(&self, shift: T, b: &[T]) -> Option<Vec<T>> {
        let n = self.len();
        if n < 3 {
            let mut m = zeros(n, n);
            for i in 0..n {
                m[i][i] = self.diag[i] - shift;
            }
            if n == 2 {
                m[0][1] = self.off[0] + self.off[1];
                m[1][0] = m[0][1];
            }
            return Lu::factor(m).map(|lu| lu.solve(b));
        }
        let corner = self.off[n - 1];
        let d0 = self.diag[0] - shift;
        let gamma = if d0 != T::zero() { -d0 } else { -T::one() };
        let mut a: Vec<T> = self.diag.iter().map(|&d| d - shift).collect();
        a[0] = a[0] - gamma;
        a[n - 1] = a[n - 1] - corner * corner / gamma;
        let y = thomas(&a, &self.off[..n - 1], b)?;
        let mut w = vec![T::zero(); n];
        w[0] = gamma;
        w[n - 1] = corner;
        let z = thomas(&a, &self.off[..n - 1], &w)?;
        let vy = y[0] + corner / gamma * y[n - 1];
        let vz = z[0] + corner / gamma * z[n - 1];
        let denom = T::one() + vz;
        if denom == T::zero() {
            return None;
        }
        let k = vy / denom;
        Some(y.iter().zip(&z).map(|(&yi, &zi)| yi - k * zi).collect())
    }
}

/// Symmetric tridiagonal solve (diagonal `a`, off-diagonal `c`).
fn thomas<T: Real>(a: &[T], c: &[T], b: &[T]) -> Option<Vec<T>> {
    let n = a.len();
    let mut cp = vec![T::zero(); n];
    let mut dp = vec![T::zero(); n];
    let mut denom = a[0];
    if denom == T::zero() {
        return None;
    }
    cp[0] = if n > 1 { c[0] / denom } else { T::zero() };
    dp[0] = b[0] / denom;
    for i in 1..n {
        denom = a[i] - c[i - 1] * cp[i - 1];
        if denom == T::zero() {
            return None;
        }
        cp[i] = if i < n - 1 { c[i] / denom } else { T::zero() };
        dp[i] = (b[i] - c[i - 1] * dp[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        dp[i] = dp[i] - cp[i] * dp[i + 1];
    }
    Some(dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_dense_system() {
        let a: Mat<f64> = vec![vec![0.0, 2.0, 1.0], vec![1.0, 1.0, 0.0], vec![3.0, 0.0, 1.0]];
        let x = vec![1.0, -2.0, 0.5];
        let b = mat_vec(&a, &x);
        let got = Lu::factor(a).unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn cyclic_solve_matches_dense() {
        let n = 7;
        let m = CyclicTridiag {
            diag: (0..n).map(|i| 3.0 + 0.1 * i as f64).collect(),
            off: (0..n).map(|i| -1.0 - 0.05 * i as f64).collect(),
        };
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = m.solve_shifted(0.3, &b).unwrap();
        let mut r = m.apply(&x);
        for i in 0..n {
            r[i] -= 0.3 * x[i];
        }
        for i in 0..n {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_and_cholesky() {
        let a: Mat<f64> = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let inv = invert(&a).unwrap();
        let p = mat_mul(&a, &inv);
        assert!((p[0][0] - 1.0).abs() < 1e-15 && p[0][1].abs() < 1e-15);
        let l = cholesky(&a).unwrap();
        assert!((l[0][0] * l[0][0] - 4.0).abs() < 1e-15);
        assert!(cholesky::<f64>(&vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_none());
        assert!(invert::<f64>(&vec![vec![1.0, 2.0], vec![2.0, 4.0]]).is_none());
    }
}
