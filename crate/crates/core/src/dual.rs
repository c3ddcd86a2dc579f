//! First-order dual numbers for forward-mode differentiation.

use core::ops::{Add, Div, Mul, Neg, Sub};

/// `re + eps·ε` with `ε² = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub const fn new(re: f64, eps: f64) -> Self {
        Self { re, eps }
    }

    pub const fn constant(re: f64) -> Self {
        Self { re, eps: 0.0 }
    }

    pub const fn variable(re: f64) -> Self {
        Self { re, eps: 1.0 }
    }

    /// Lifts a scalar function through its known derivative.
    pub fn chain(self, value: f64, derivative: f64) -> Self {
        Self::new(value, derivative * self.eps)
    }

    pub fn exp(self) -> Self {
        let e = libm::exp(self.re);
        self.chain(e, e)
    }

    pub fn ln(self) -> Self {
        self.chain(libm::log(self.re), 1.0 / self.re)
    }

    pub fn sqrt(self) -> Self {
        let s = libm::sqrt(self.re);
        self.chain(s, 0.5 / s)
    }

    pub fn powf(self, p: f64) -> Self {
        self.chain(libm::pow(self.re, p), p * libm::pow(self.re, p - 1.0))
    }

    pub fn powi(self, n: i32) -> Self {
        let mut acc = Dual::constant(1.0);
        let base = if n < 0 { self.recip() } else { self };
        for _ in 0..n.unsigned_abs() {
            acc = acc * base;
        }
        acc
    }

    pub fn recip(self) -> Self {
        self.chain(1.0 / self.re, -1.0 / (self.re * self.re))
    }
}

impl From<f64> for Dual {
    fn from(re: f64) -> Self {
        Self::constant(re)
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, rhs: Dual) -> Dual {
        Dual::new(self.re + rhs.re, self.eps + rhs.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, rhs: Dual) -> Dual {
        Dual::new(self.re - rhs.re, self.eps - rhs.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        Dual::new(self.re * rhs.re, self.re * rhs.eps + self.eps * rhs.re)
    }
}

impl Div for Dual {
    type Output = Dual;
    fn div(self, rhs: Dual) -> Dual {
        let inv = 1.0 / rhs.re;
        Dual::new(self.re * inv, (self.eps * rhs.re - self.re * rhs.eps) * inv * inv)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Add<f64> for Dual {
    type Output = Dual;
    fn add(self, rhs: f64) -> Dual {
        Dual::new(self.re + rhs, self.eps)
    }
}

impl Sub<f64> for Dual {
    type Output = Dual;
    fn sub(self, rhs: f64) -> Dual {
        Dual::new(self.re - rhs, self.eps)
    }
}

impl Mul<f64> for Dual {
    type Output = Dual;
    fn mul(self, rhs: f64) -> Dual {
        Dual::new(self.re * rhs, self.eps * rhs)
    }
}

impl Div<f64> for Dual {
    type Output = Dual;
    fn div(self, rhs: f64) -> Dual {
        Dual::new(self.re / rhs, self.eps / rhs)
    }
}

impl Mul<Dual> for f64 {
    type Output = Dual;
    fn mul(self, rhs: Dual) -> Dual {
        rhs * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let x = Dual::variable(3.0);
        let y = x * x * x;
        assert_eq!(y.re, 27.0);
        assert_eq!(y.eps, 27.0);
    }

    #[test]
    fn quotient_and_powers() {
        let x = Dual::variable(2.0);
        let y = Dual::constant(1.0) / x;
        assert!((y.eps + 0.25).abs() < 1e-15);
        let z = x.powi(-2);
        assert!((z.eps + 0.25).abs() < 1e-15);
        let w = x.powf(1.5);
        assert!((w.eps - 1.5 * libm::sqrt(2.0)).abs() < 1e-14);
    }

    #[test]
    fn transcendental() {
        let x = Dual::variable(0.5);
        assert!((x.exp().eps - libm::exp(0.5)).abs() < 1e-15);
        assert!((x.ln().eps - 2.0).abs() < 1e-15);
        assert!((x.sqrt().eps - 0.5 / libm::sqrt(0.5)).abs() < 1e-15);
    }
}
