use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::scalar::Real;

/// Second-order jet of a scalar field in `(t, x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet2<T> {
    pub v: T,
    pub t: T,
    pub x: T,
    pub tt: T,
    pub tx: T,
    pub xx: T,
}

impl<T: Real> Jet2<T> {
    pub fn constant(v: T) -> Self {
        let z = T::zero();
        Jet2 { v, t: z, x: z, tt: z, tx: z, xx: z }
    }

    pub fn var_t(t: T) -> Self {
        Jet2 { t: T::one(), ..Self::constant(t) }
    }

    pub fn var_x(x: T) -> Self {
        Jet2 { x: T::one(), ..Self::constant(x) }
    }

    /// Composition `g(self)` given `g`, `g'`, `g''` at `self.v`.
    pub fn chain(self, g0: T, g1: T, g2: T) -> Self {
        // a vanishing inner derivative stays exactly zero even if g' or g'' overflow
        let m = |g: T, d: T| if d == T::zero() { T::zero() } else { g * d };
        Jet2 {
            v: g0,
            t: m(g1, self.t),
            x: m(g1, self.x),
            tt: m(g2, self.t * self.t) + m(g1, self.tt),
            tx: m(g2, self.t * self.x) + m(g1, self.tx),
            xx: m(g2, self.x * self.x) + m(g1, self.xx),
        }
    }

    pub fn scale(self, k: T) -> Self {
        Jet2 { v: self.v * k, t: self.t * k, x: self.x * k, tt: self.tt * k, tx: self.tx * k, xx: self.xx * k }
    }

    pub fn recip(self) -> Self {
        let r = self.v.recip();
        self.chain(r, -r * r, T::lit(2.0) * r * r * r)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Self {
        let r = self.v.recip();
        self.chain(self.v.ln(), r, -r * r)
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn tan(self) -> Self {
        let t = self.v.tan();
        let d = T::one() + t * t;
        self.chain(t, d, T::lit(2.0) * t * d)
    }

    pub fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        let d1 = T::lit(0.5) / s;
        self.chain(s, d1, -d1 / (T::lit(2.0) * self.v))
    }

    pub fn powi(self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            1 => self,
            _ => {
                let nf = T::lit(n as f64);
                let p2 = self.v.powi(n - 2);
                let p1 = p2 * self.v;
                self.chain(p1 * self.v, nf * p1, nf * (nf - T::one()) * p2)
            }
        }
    }

    pub fn powf(self, e: Self) -> Self {
        (self.ln() * e).exp()
    }

    pub fn components(&self) -> [T; 6] {
        [self.v, self.t, self.x, self.tt, self.tx, self.xx]
    }

    pub fn is_finite(&self) -> bool {
        self.components().iter().all(|c| c.is_finite())
    }
}

impl<T: Real> Add for Jet2<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet2 {
            v: self.v + o.v,
            t: self.t + o.t,
            x: self.x + o.x,
            tt: self.tt + o.tt,
            tx: self.tx + o.tx,
            xx: self.xx + o.xx,
        }
    }
}

impl<T: Real> Sub for Jet2<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl<T: Real> Neg for Jet2<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul for Jet2<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Jet2 {
            v: self.v * o.v,
            t: self.t * o.v + self.v * o.t,
            x: self.x * o.v + self.v * o.x,
            tt: self.tt * o.v + T::lit(2.0) * self.t * o.t + self.v * o.tt,
            tx: self.tx * o.v + self.t * o.x + self.x * o.t + self.v * o.tx,
            xx: self.xx * o.v + T::lit(2.0) * self.x * o.x + self.v * o.xx,
        }
    }
}

impl<T: Real> Div for Jet2<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_second_order() {
        // f = t^2 x^3 at (t, x) = (1.5, 0.5)
        let t = Jet2::var_t(1.5_f64);
        let x = Jet2::var_x(0.5_f64);
        let f = t * t * x * x * x;
        assert!((f.tt - 2.0 * 0.125).abs() < 1e-14);
        assert!((f.tx - 2.0 * 1.5 * 3.0 * 0.25).abs() < 1e-14);
        assert!((f.xx - 2.25 * 6.0 * 0.5).abs() < 1e-14);
    }

    #[test]
    fn constants_keep_zero_derivatives_when_coefficients_overflow() {
        // 1 / 1e-116 is finite though 2 / v^3 is not
        let f = Jet2::constant(1.0) / Jet2::constant(1e-116_f64);
        assert!(f.is_finite());
        assert_eq!(f.tt, 0.0);
    }

    #[test]
    fn reciprocal_and_division() {
        let t = Jet2::var_t(2.0_f64);
        let f = Jet2::constant(1.0) / t;
        assert_eq!(f.v, 0.5);
        assert_eq!(f.t, -0.25);
        assert_eq!(f.tt, 0.25);
    }
}
