//! Double-double arithmetic for oracle evaluations.
//!
//! [`Dd`] carries an unevaluated sum `hi + lo` with about 32 significant
//! digits. [`Cdd`] is the complex counterpart. The [`Scalar`] trait lets a
//! closed-form product formula be written once and evaluated either in
//! binary64 or in double-double.

use crate::{c64, C64};
use std::ops::{Add, Div, Mul, Neg, Sub};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

/// Real double-double number `hi + lo`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Dd {
        if self.hi < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn sqrt(self) -> Dd {
        if self.hi <= 0.0 {
            return Dd::ZERO;
        }
        let y = Dd::new(self.hi.sqrt());
        y + (self - y * y) / (y * Dd::new(2.0))
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, o: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, o.hi);
        let (t, f) = two_sum(self.lo, o.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, o: Dd) -> Dd {
        self + (-o)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p) + (self.hi * o.lo + self.lo * o.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self - o * Dd::new(q1);
        let q2 = r.hi / o.hi;
        let r = r - o * Dd::new(q2);
        let q3 = r.hi / o.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Complex double-double number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Cdd {
    pub re: Dd,
    pub im: Dd,
}

impl Cdd {
    pub fn new(re: Dd, im: Dd) -> Cdd {
        Cdd { re, im }
    }

    pub fn conj(self) -> Cdd {
        Cdd { re: self.re, im: -self.im }
    }

    pub fn norm_sqr(self) -> Dd {
        self.re * self.re + self.im * self.im
    }
}

impl Add for Cdd {
    type Output = Cdd;
    fn add(self, o: Cdd) -> Cdd {
        Cdd { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for Cdd {
    type Output = Cdd;
    fn sub(self, o: Cdd) -> Cdd {
        Cdd { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Neg for Cdd {
    type Output = Cdd;
    fn neg(self) -> Cdd {
        Cdd { re: -self.re, im: -self.im }
    }
}

impl Mul for Cdd {
    type Output = Cdd;
    fn mul(self, o: Cdd) -> Cdd {
        Cdd { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Div for Cdd {
    type Output = Cdd;
    fn div(self, o: Cdd) -> Cdd {
        let n = o.norm_sqr();
        let t = self * o.conj();
        Cdd { re: t.re / n, im: t.im / n }
    }
}

/// Field operations shared by [`C64`] and [`Cdd`].
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self> + Neg<Output = Self> {
    /// Relative size below which product tails are dropped.
    const EPS: f64;
    fn from_c64(z: C64) -> Self;
    fn to_c64(self) -> C64;
    /// Principal square root.
    fn sqrt(self) -> Self;

    fn from_f64(x: f64) -> Self {
        Self::from_c64(c64(x, 0.0))
    }

    fn mag(self) -> f64 {
        self.to_c64().norm()
    }

    fn powi(self, n: i32) -> Self {
        let mut out = Self::from_f64(1.0);
        let base = if n < 0 { Self::from_f64(1.0) / self } else { self };
        for _ in 0..n.unsigned_abs() {
            out = out * base;
        }
        out
    }
}

impl Scalar for C64 {
    const EPS: f64 = 1e-17;
    fn from_c64(z: C64) -> Self {
        z
    }
    fn to_c64(self) -> C64 {
        self
    }
    fn sqrt(self) -> Self {
        num_complex::Complex::sqrt(self)
    }
}

impl Scalar for Cdd {
    const EPS: f64 = 1e-33;
    fn from_c64(z: C64) -> Self {
        Cdd { re: Dd::new(z.re), im: Dd::new(z.im) }
    }
    fn to_c64(self) -> C64 {
        c64(self.re.to_f64(), self.im.to_f64())
    }
    fn sqrt(self) -> Self {
        let z0 = self.to_c64();
        if z0.norm() == 0.0 {
            return self;
        }
        let mut y = Cdd::from_c64(z0.sqrt());
        let half = Cdd::from_f64(0.5);
        for _ in 0..2 {
            y = half * (y + self / y);
        }
        y
    }
}

/// `(x; q)_∞` in the arithmetic of `T`.
pub fn qpoch_inf<T: Scalar>(x: T, q: f64) -> T {
    let one = T::from_f64(1.0);
    let qd = T::from_f64(q);
    let mut prod = one;
    let mut y = x;
    for _ in 0..crate::qcore::MAX_TERMS {
        if y.mag() / (1.0 - q) < T::EPS {
            break;
        }
        prod = prod * (one - y);
        y = y * qd;
    }
    prod
}

/// `∏ (x_i; q)_∞`.
pub fn qpoch_inf_prod<T: Scalar>(xs: &[T], q: f64) -> T {
    xs.iter().fold(T::from_f64(1.0), |acc, &x| acc * qpoch_inf(x, q))
}

/// `θ(x) = (x, q/x; q)_∞`.
pub fn theta<T: Scalar>(x: T, q: f64) -> T {
    qpoch_inf(x, q) * qpoch_inf(T::from_f64(q) / x, q)
}

/// `∏ θ(x_i)`.
pub fn theta_prod<T: Scalar>(xs: &[T], q: f64) -> T {
    xs.iter().fold(T::from_f64(1.0), |acc, &x| acc * theta(x, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_division_and_sqrt() {
        let three = Dd::new(3.0);
        let third = Dd::ONE / three;
        let back = third * three - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
        let r = Dd::new(2.0).sqrt();
        assert!((r * r - Dd::new(2.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn complex_sqrt_is_principal() {
        let z = Cdd::from_c64(c64(-3.0, 4.0));
        let r = z.sqrt();
        assert!((r * r - z).to_c64().norm() < 1e-30);
        assert!(r.re.to_f64() > 0.0);
    }

    #[test]
    fn extended_product_agrees_with_binary64() {
        let x = c64(0.37, -0.21);
        let a = qpoch_inf(x, 0.5);
        let b = qpoch_inf(Cdd::from_c64(x), 0.5).to_c64();
        assert!((a - b).norm() < 1e-15);
        let t = theta(Cdd::from_c64(c64(2.3, 0.4)), 0.5);
        let t2 = crate::qcore::theta(c64(2.3, 0.4), 0.5).unwrap();
        assert!((t.to_c64() - t2).norm() < 1e-14 * t2.norm());
    }
}
