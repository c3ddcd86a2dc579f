//! Sparse multivariate polynomials with exact differentiation.

use alloc::vec;
use alloc::vec::Vec;

use crate::dual::Dual;

#[derive(Clone, Debug, PartialEq)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Polynomial {
    dim: usize,
    terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    /// Terms given as `(coefficient, exponents)`; exponent lists shorter than
    /// `dim` are padded with zeros.
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (f64, Vec<u32>)>) -> Self {
        let mut p = Self::zero(dim);
        for (coef, mut powers) in terms {
            powers.resize(dim, 0);
            p.push(coef, powers);
        }
        p
    }

    /// `x^{axis}`.
    pub fn coordinate(dim: usize, axis: usize) -> Self {
        let mut powers = vec![0; dim];
        powers[axis] = 1;
        Self::new(dim, [(1.0, powers)])
    }

    /// `|x|²`.
    pub fn squared_norm(dim: usize) -> Self {
        Self::new(
            dim,
            (0..dim).map(|i| {
                let mut p = vec![0; dim];
                p[i] = 2;
                (1.0, p)
            }),
        )
    }

    fn push(&mut self, coef: f64, powers: Vec<u32>) {
        if coef == 0.0 {
            return;
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.powers == powers) {
            t.coef += coef;
        } else {
            self.terms.push(Monomial { coef, powers });
        }
        self.terms.retain(|t| t.coef != 0.0);
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                t.powers
                    .iter()
                    .zip(x)
                    .fold(t.coef, |acc, (&p, &xi)| acc * libm::pow(xi, p as f64))
            })
            .sum()
    }

    pub fn eval_dual(&self, x: &[Dual]) -> Dual {
        self.terms.iter().fold(Dual::constant(0.0), |acc, t| {
            let m = t
                .powers
                .iter()
                .zip(x)
                .fold(Dual::constant(t.coef), |m, (&p, &xi)| m * xi.powi(p as i32));
            acc + m
        })
    }

    pub fn partial(&self, axis: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for t in &self.terms {
            let p = t.powers[axis];
            if p > 0 {
                let mut powers = t.powers.clone();
                powers[axis] = p - 1;
                out.push(t.coef * p as f64, powers);
            }
        }
        out
    }

    pub fn gradient(&self) -> Vec<Self> {
        (0..self.dim).map(|i| self.partial(i)).collect()
    }

    /// Flat Laplacian `Σ ∂ᵢ∂ᵢ`.
    pub fn laplacian(&self) -> Self {
        let mut out = Self::zero(self.dim);
        for i in 0..self.dim {
            for t in self.partial(i).partial(i).terms {
                out.push(t.coef, t.powers);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_saddle() {
        let p = Polynomial::new(2, [(1.0, vec![2, 0]), (-1.0, vec![0, 2])]);
        assert!(p.laplacian().is_zero());
        assert_eq!(p.eval(&[3.0, 1.0]), 8.0);
    }

    #[test]
    fn squared_norm_laplacian_is_2d() {
        let p = Polynomial::squared_norm(4);
        let lap = p.laplacian();
        assert_eq!(lap.eval(&[0.3, -1.0, 2.0, 5.0]), 8.0);
        assert!(lap.laplacian().is_zero());
    }

    #[test]
    fn dual_matches_partial() {
        let p = Polynomial::new(2, [(3.0, vec![2, 1]), (-2.0, vec![0, 3]), (1.0, vec![1, 0])]);
        let x = [1.5, -0.5];
        let d = p.eval_dual(&[Dual::variable(x[0]), Dual::constant(x[1])]);
        assert!((d.eps - p.partial(0).eval(&x)).abs() < 1e-14);
        assert!((d.re - p.eval(&x)).abs() < 1e-14);
    }
}
