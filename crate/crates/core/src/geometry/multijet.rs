use crate::expr::Jet2;
use crate::scalar::Real;

/// Second-order jet in `dim` coordinates: value, gradient, Hessian.
#[derive(Clone, Debug, PartialEq)]
pub struct MultiJet<T> {
    pub v: T,
    pub d: Vec<T>,
    pub dd: Vec<Vec<T>>,
}

impl<T: Real> MultiJet<T> {
    pub fn constant(dim: usize, v: T) -> Self {
        MultiJet { v, d: vec![T::zero(); dim], dd: vec![vec![T::zero(); dim]; dim] }
    }

    /// Lifts a univariate function of coordinate `axis` given its value and two derivatives.
    pub fn univariate(dim: usize, axis: usize, f0: T, f1: T, f2: T) -> Self {
        let mut j = Self::constant(dim, f0);
        j.d[axis] = f1;
        j.dd[axis][axis] = f2;
        j
    }

    /// Lifts a `(t, x)` jet into coordinates `(axis_t, axis_x)`.
    pub fn from_jet2(dim: usize, axis_t: usize, axis_x: usize, j: &Jet2<T>) -> Self {
        let mut m = Self::constant(dim, j.v);
        m.d[axis_t] = j.t;
        m.d[axis_x] = j.x;
        m.dd[axis_t][axis_t] = j.tt;
        m.dd[axis_t][axis_x] = j.tx;
        m.dd[axis_x][axis_t] = j.tx;
        m.dd[axis_x][axis_x] = j.xx;
        m
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.dim();
        let mut r = Self::constant(n, self.v * o.v);
        for a in 0..n {
            r.d[a] = self.d[a] * o.v + self.v * o.d[a];
            for b in 0..n {
                r.dd[a][b] = self.dd[a][b] * o.v + self.d[a] * o.d[b] + self.d[b] * o.d[a] + self.v * o.dd[a][b];
            }
        }
        r
    }

    pub fn scale(&self, k: T) -> Self {
        MultiJet {
            v: self.v * k,
            d: self.d.iter().map(|&x| x * k).collect(),
            dd: self.dd.iter().map(|r| r.iter().map(|&x| x * k).collect()).collect(),
        }
    }

    pub fn chain(&self, g0: T, g1: T, g2: T) -> Self {
        let n = self.dim();
        let mut r = Self::constant(n, g0);
        for a in 0..n {
            r.d[a] = g1 * self.d[a];
            for b in 0..n {
                r.dd[a][b] = g2 * self.d[a] * self.d[b] + g1 * self.dd[a][b];
            }
        }
        r
    }

    pub fn exp(&self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn is_zero(&self) -> bool {
        self.v == T::zero()
            && self.d.iter().all(|x| *x == T::zero())
            && self.dd.iter().flatten().all(|x| *x == T::zero())
    }
}
