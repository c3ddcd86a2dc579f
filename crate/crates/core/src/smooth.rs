//! Functions of one variable carrying analytic derivatives.
//!
//! A [`SmoothFn`] is a finite sum of elementary terms, each of which knows
//! its derivatives of every order in closed form. Arbitrary functions can be
//! supplied as a list of closures, one per derivative order; such terms only
//! support the orders they were given.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Term {
    /// `Σ cᵢ rⁱ`
    Polynomial(Vec<f64>),
    /// `c · r^p`
    Power { coef: f64, exponent: f64 },
    /// `c · ln r`
    Log { coef: f64 },
    /// `c · r ln r`, continued by 0 at `r = 0`
    RLogR { coef: f64 },
    /// `c · e^{λr}`
    Exp { coef: f64, rate: f64 },
    /// Closures for orders `0..len`.
    Custom(Arc<[ScalarFn]>),
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            Term::Power { coef, exponent } => f
                .debug_struct("Power")
                .field("coef", coef)
                .field("exponent", exponent)
                .finish(),
            Term::Log { coef } => f.debug_struct("Log").field("coef", coef).finish(),
            Term::RLogR { coef } => f.debug_struct("RLogR").field("coef", coef).finish(),
            Term::Exp { coef, rate } => f
                .debug_struct("Exp")
                .field("coef", coef)
                .field("rate", rate)
                .finish(),
            Term::Custom(slots) => write!(f, "Custom({} slots)", slots.len()),
        }
    }
}

/// Falling factorial `p (p-1) ... (p-n+1)`.
fn falling(p: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, j| acc * (p - j as f64))
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, j| acc * j as f64)
}

fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Term {
    fn max_order(&self) -> Option<usize> {
        match self {
            Term::Custom(slots) => Some(slots.len().saturating_sub(1)),
            _ => None,
        }
    }

    fn derivative(&self, order: usize, r: f64) -> Result<f64> {
        let n = order;
        Ok(match self {
            Term::Polynomial(c) => {
                // Horner on the n-times differentiated coefficients.
                let mut acc = 0.0;
                for (i, &ci) in c.iter().enumerate().skip(n).rev() {
                    acc = acc * r + ci * falling(i as f64, n);
                }
                acc
            }
            Term::Power { coef, exponent } => {
                let f = falling(*exponent, n);
                if f == 0.0 {
                    0.0
                } else {
                    coef * f * libm::pow(r, exponent - n as f64)
                }
            }
            Term::Log { coef } => match n {
                0 => coef * libm::log(r),
                _ => coef * sign(n - 1) * factorial(n - 1) / libm::pow(r, n as f64),
            },
            Term::RLogR { coef } => match n {
                0 if r == 0.0 => 0.0,
                0 => coef * r * libm::log(r),
                1 => coef * (libm::log(r) + 1.0),
                _ => coef * sign(n) * factorial(n - 2) / libm::pow(r, (n - 1) as f64),
            },
            Term::Exp { coef, rate } => coef * libm::pow(*rate, n as f64) * libm::exp(rate * r),
            Term::Custom(slots) => match slots.get(n) {
                Some(f) => f(r),
                None => {
                    return Err(Error::UnsupportedOrder {
                        order: n,
                        max: slots.len().saturating_sub(1),
                    })
                }
            },
        })
    }
}

/// A scalar function of `r` with analytic derivatives.
#[derive(Clone, Debug, Default)]
pub struct SmoothFn {
    terms: Vec<Term>,
}

impl SmoothFn {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn from_term(term: Term) -> Self {
        Self { terms: vec![term] }
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// `c₀ + c₁ r + c₂ r² + ...`
    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self::from_term(Term::Polynomial(coeffs))
    }

    pub fn power(coef: f64, exponent: f64) -> Self {
        Self::from_term(Term::Power { coef, exponent })
    }

    pub fn log(coef: f64) -> Self {
        Self::from_term(Term::Log { coef })
    }

    pub fn r_log_r(coef: f64) -> Self {
        Self::from_term(Term::RLogR { coef })
    }

    pub fn exp(coef: f64, rate: f64) -> Self {
        Self::from_term(Term::Exp { coef, rate })
    }

    /// Builds a function from closures `[f, f', f'', ...]`.
    pub fn from_derivatives(slots: Vec<ScalarFn>) -> Self {
        Self::from_term(Term::Custom(slots.into()))
    }

    /// Sum of two functions.
    pub fn plus(mut self, other: SmoothFn) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Highest supported derivative order, `None` when unbounded.
    pub fn max_order(&self) -> Option<usize> {
        self.terms.iter().filter_map(Term::max_order).min()
    }

    pub fn supports_order(&self, order: usize) -> bool {
        self.max_order().is_none_or(|m| order <= m)
    }

    pub fn derivative(&self, order: usize, r: f64) -> Result<f64> {
        self.terms
            .iter()
            .try_fold(0.0, |acc, t| Ok(acc + t.derivative(order, r)?))
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.derivative(0, r)
    }

    /// Derivatives `0..N` at `r`.
    pub fn jet<const N: usize>(&self, r: f64) -> Result<[f64; N]> {
        let mut out = [0.0; N];
        for (d, slot) in out.iter_mut().enumerate() {
            *slot = self.derivative(d, r)?;
        }
        Ok(out)
    }
}
