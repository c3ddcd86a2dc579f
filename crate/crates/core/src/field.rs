//! Scalar and vector fields on chart coordinates.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::bundle::MetricField;
use crate::closed_form::{BaseFunction, RadialFunction};
use crate::dual::Dual;
use crate::error::{Error, Result};

pub type CoordFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type DualCoordFn = Arc<dyn Fn(&[Dual]) -> Dual + Send + Sync>;
pub type VecFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type DualVecFn = Arc<dyn Fn(&[Dual]) -> Vec<Dual> + Send + Sync>;

/// A scalar field in chart coordinates, as consumed by the numerical oracle.
pub trait CoordinateField: Send + Sync {
    fn value(&self, c: &[f64]) -> Result<f64>;

    /// Forward-mode evaluation; `None` if the field cannot be lifted to duals.
    fn value_dual(&self, _c: &[Dual]) -> Option<Result<Dual>> {
        None
    }
}

impl<F> CoordinateField for F
where
    F: Fn(&[f64]) -> Result<f64> + Send + Sync,
{
    fn value(&self, c: &[f64]) -> Result<f64> {
        self(c)
    }
}

/// A vector field given by contravariant components in chart coordinates.
pub trait VectorField: Send + Sync {
    fn value(&self, c: &[f64]) -> Result<Vec<f64>>;

    fn value_dual(&self, _c: &[Dual]) -> Option<Result<Vec<Dual>>> {
        None
    }
}

/// `r = uᵀ h u` on dual coordinates.
fn dual_radius(h: &DMatrix<f64>, u: &[Dual]) -> Dual {
    let mut r = Dual::constant(0.0);
    for (p, &up) in u.iter().enumerate() {
        for (q, &uq) in u.iter().enumerate() {
            r = r + up * uq * h[(p, q)];
        }
    }
    r
}

pub(crate) fn quadratic_form(h: &DMatrix<f64>, u: &[f64]) -> f64 {
    let mut r = 0.0;
    for (p, &up) in u.iter().enumerate() {
        for (q, &uq) in u.iter().enumerate() {
            r += up * uq * h[(p, q)];
        }
    }
    r
}

/// Scalar fields on the total space, addressed by coordinates `(x, u)`.
#[derive(Clone)]
pub enum ScalarFieldOnE {
    /// `f ∘ π`
    VerticalLift { base_dim: usize, f: BaseFunction },
    /// `α(uᵀ h u)`
    RRadial {
        base_dim: usize,
        fiber_metric: DMatrix<f64>,
        alpha: RadialFunction,
    },
    RawCoordinate { f: CoordFn, dual: Option<DualCoordFn> },
}

impl ScalarFieldOnE {
    pub fn vertical_lift(field: &MetricField, f: BaseFunction) -> Self {
        Self::VerticalLift { base_dim: field.m(), f }
    }

    pub fn r_radial(field: &MetricField, alpha: RadialFunction) -> Self {
        Self::RRadial {
            base_dim: field.m(),
            fiber_metric: field.bundle().fiber_metric().clone(),
            alpha,
        }
    }

    pub fn raw(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::RawCoordinate { f: Arc::new(f), dual: None }
    }

    pub fn raw_with_dual(
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        dual: impl Fn(&[Dual]) -> Dual + Send + Sync + 'static,
    ) -> Self {
        Self::RawCoordinate {
            f: Arc::new(f),
            dual: Some(Arc::new(dual)),
        }
    }
}

impl CoordinateField for ScalarFieldOnE {
    fn value(&self, c: &[f64]) -> Result<f64> {
        match self {
            Self::VerticalLift { base_dim, f } => f.value(&c[..*base_dim]),
            Self::RRadial { base_dim, fiber_metric, alpha } => {
                alpha.value(quadratic_form(fiber_metric, &c[*base_dim..]))
            }
            Self::RawCoordinate { f, .. } => Ok(f(c)),
        }
    }

    fn value_dual(&self, c: &[Dual]) -> Option<Result<Dual>> {
        match self {
            Self::VerticalLift { base_dim, f } => f.value_dual(&c[..*base_dim]),
            Self::RRadial { base_dim, fiber_metric, alpha } => {
                let r = dual_radius(fiber_metric, &c[*base_dim..]);
                Some(alpha.derivs(r.re).map(|d| r.chain(d[0], d[1])))
            }
            Self::RawCoordinate { dual, .. } => dual.as_ref().map(|d| Ok(d(c))),
        }
    }
}

/// Vector field on the total space with optional forward-mode evaluation.
#[derive(Clone)]
pub struct VectorFieldOnE {
    f: VecFn,
    dual: Option<DualVecFn>,
}

impl VectorFieldOnE {
    pub fn new(f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), dual: None }
    }

    pub fn with_dual(mut self, d: impl Fn(&[Dual]) -> Vec<Dual> + Send + Sync + 'static) -> Self {
        self.dual = Some(Arc::new(d));
        self
    }

    pub fn constant(v: Vec<f64>) -> Self {
        let w = v.clone();
        Self::new(move |_| v.clone()).with_dual(move |_| w.iter().map(|&x| Dual::constant(x)).collect())
    }

    /// The tautological vertical field: components `(0, u)`.
    pub fn tautological(m: usize, k: usize) -> Self {
        Self::new(move |c| {
            let mut v = vec![0.0; m + k];
            v[m..].copy_from_slice(&c[m..m + k]);
            v
        })
        .with_dual(move |c| {
            let mut v = vec![Dual::constant(0.0); m + k];
            v[m..].copy_from_slice(&c[m..m + k]);
            v
        })
    }
}

impl VectorField for VectorFieldOnE {
    fn value(&self, c: &[f64]) -> Result<Vec<f64>> {
        let v = (self.f)(c);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("vector field is not finite at {c:?}")));
        }
        Ok(v)
    }

    fn value_dual(&self, c: &[Dual]) -> Option<Result<Vec<Dual>>> {
        self.dual.as_ref().map(|d| Ok(d(c)))
    }
}
