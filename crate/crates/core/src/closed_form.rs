//! Closed-form gradients, Laplacians and bilaplacians of vertical lifts and
//! r-radial functions on the total space.
//!
//! Gradients are returned as contravariant components in raw `(x, u)`
//! coordinates. The radial bilaplacian is computed by applying the radial
//! Laplacian twice; [`bihar_radial_transcription`] evaluates the long-hand
//! expression term by term and is kept only for comparison.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::bundle::{BaseChart, MetricField, TotalPoint};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::field::{CoordFn, CoordinateField, DualCoordFn, VecFn};
use crate::linalg::Spd;
use crate::oracle::{self, DiffConfig};
use crate::poly::Polynomial;
use crate::smooth::{ScalarFn, SmoothFn};
use crate::weights::{WeightJet, WeightProfile};

/// Default lower bound on `r` for functions singular on the zero section.
pub const SINGULAR_DOMAIN_MIN: f64 = 1e-3;

/// Number of analytic derivative slots carried by a radial function.
pub const RADIAL_ORDER: usize = 4;

/// `α(r)` with derivatives up to order four.
#[derive(Debug, Clone)]
pub struct RadialFunction {
    alpha: SmoothFn,
    singular_at_zero: bool,
    domain_min: f64,
}

impl RadialFunction {
    pub fn new(alpha: SmoothFn) -> Result<Self> {
        if !alpha.supports_order(RADIAL_ORDER) {
            return Err(Error::Config(format!(
                "radial function must supply derivatives up to order {RADIAL_ORDER}"
            )));
        }
        Ok(Self {
            alpha,
            singular_at_zero: false,
            domain_min: 0.0,
        })
    }

    /// A function undefined on the zero section, valid for `r ≥ SINGULAR_DOMAIN_MIN`.
    pub fn singular(alpha: SmoothFn) -> Result<Self> {
        Ok(Self {
            singular_at_zero: true,
            domain_min: SINGULAR_DOMAIN_MIN,
            ..Self::new(alpha)?
        })
    }

    pub fn with_domain_min(mut self, domain_min: f64) -> Result<Self> {
        if !(domain_min >= 0.0) {
            return Err(Error::Config(format!("domain minimum {domain_min} must be non-negative")));
        }
        self.domain_min = domain_min;
        Ok(self)
    }

    pub fn constant(c: f64) -> Self {
        Self::polynomial(vec![c])
    }

    /// `a r + b`
    pub fn linear(a: f64, b: f64) -> Self {
        Self::polynomial(vec![b, a])
    }

    pub fn polynomial(coeffs: Vec<f64>) -> Self {
        Self {
            alpha: SmoothFn::polynomial(coeffs),
            singular_at_zero: false,
            domain_min: 0.0,
        }
    }

    /// From closures `[α, α', α'', α⁽³⁾, α⁽⁴⁾]`.
    pub fn from_derivatives(slots: [ScalarFn; 5]) -> Self {
        Self {
            alpha: SmoothFn::from_derivatives(slots.into()),
            singular_at_zero: false,
            domain_min: 0.0,
        }
    }

    pub fn function(&self) -> &SmoothFn {
        &self.alpha
    }

    pub fn singular_at_zero(&self) -> bool {
        self.singular_at_zero
    }

    pub fn domain_min(&self) -> f64 {
        self.domain_min
    }

    fn check_domain(&self, r: f64) -> Result<()> {
        if r < self.domain_min || r.is_nan() {
            return Err(Error::Domain(format!(
                "r = {r} is below the domain minimum {}",
                self.domain_min
            )));
        }
        Ok(())
    }

    pub fn derivative(&self, order: usize, r: f64) -> Result<f64> {
        self.check_domain(r)?;
        if order > RADIAL_ORDER {
            return Err(Error::UnsupportedOrder { order, max: RADIAL_ORDER });
        }
        self.alpha.derivative(order, r)
    }

    pub fn value(&self, r: f64) -> Result<f64> {
        self.derivative(0, r)
    }

    /// `[α, α', α'', α⁽³⁾, α⁽⁴⁾]` at `r`.
    pub fn derivs(&self, r: f64) -> Result<[f64; 5]> {
        self.check_domain(r)?;
        self.alpha.jet::<5>(r)
    }

    /// Largest relative mismatch between slot `d` and a central difference of
    /// slot `d − 1`, `d = 1..=4`. Samples whose stencil leaves the domain are skipped.
    pub fn check_derivatives(&self, samples: &[f64]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for &r in samples {
            let h = 1e-3 * r.max(1.0);
            if r - 2.0 * h < self.domain_min {
                continue;
            }
            for d in 1..=RADIAL_ORDER {
                let fd = oracle::derivative(|s| self.derivative(d - 1, s), r, h, 3)?;
                let an = self.derivative(d, r)?;
                worst = worst.max(libm::fabs(fd - an) / libm::fabs(an).max(1.0));
            }
        }
        Ok(worst)
    }
}

/// A function on the base with optional Laplacian, bilaplacian and differential.
#[derive(Clone)]
pub struct BaseFunction {
    name: String,
    dim: usize,
    f: CoordFn,
    dual: Option<DualCoordFn>,
    lap: Option<CoordFn>,
    bilap: Option<CoordFn>,
    grad: Option<VecFn>,
}

impl core::fmt::Debug for BaseFunction {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BaseFunction")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("laplacian", &self.lap.is_some())
            .field("bilaplacian", &self.bilap.is_some())
            .field("gradient", &self.grad.is_some())
            .finish()
    }
}

impl BaseFunction {
    pub fn new(name: impl Into<String>, dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            name: name.into(),
            dim,
            f: Arc::new(f),
            dual: None,
            lap: None,
            bilap: None,
            grad: None,
        }
    }

    pub fn with_dual(mut self, d: impl Fn(&[Dual]) -> Dual + Send + Sync + 'static) -> Self {
        self.dual = Some(Arc::new(d));
        self
    }

    pub fn with_laplacian(mut self, lap: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.lap = Some(Arc::new(lap));
        self
    }

    pub fn with_bilaplacian(mut self, bilap: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        self.bilap = Some(Arc::new(bilap));
        self
    }

    /// Coordinate differential `∂f`.
    pub fn with_gradient(mut self, grad: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.grad = Some(Arc::new(grad));
        self
    }

    /// A polynomial on Euclidean space with its flat Laplacians.
    pub fn euclidean_polynomial(name: impl Into<String>, p: Polynomial) -> Self {
        let dim = p.dim();
        let lap = p.laplacian();
        let bilap = lap.laplacian();
        let grad = p.gradient();
        let (pv, pd) = (p.clone(), p);
        Self::new(name, dim, move |x| pv.eval(x))
            .with_dual(move |x| pd.eval_dual(x))
            .with_laplacian(move |x| lap.eval(x))
            .with_bilaplacian(move |x| bilap.eval(x))
            .with_gradient(move |x| grad.iter().map(|g| g.eval(x)).collect())
    }

    /// Fills the Laplacian and bilaplacian slots with the numerical oracle on `chart`.
    pub fn with_numeric_laplacians(self, chart: &BaseChart, cfg: DiffConfig) -> Self {
        let plain = Self {
            lap: None,
            bilap: None,
            ..self.clone()
        };
        let (c1, f1, cfg1) = (chart.clone(), plain.clone(), cfg);
        let (c2, f2) = (chart.clone(), plain);
        self.with_laplacian(move |x| {
            oracle::laplace_beltrami_numeric(&c1, &f1, x, &cfg1).unwrap_or(f64::NAN)
        })
        .with_bilaplacian(move |x| oracle::bilaplacian_numeric(&c2, &f2, x, &cfg).unwrap_or(f64::NAN))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn finite(what: &str, x: &[f64], v: f64) -> Result<f64> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("{what} is not finite at {x:?}")))
        }
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        Self::finite("base function", x, (self.f)(x))
    }

    pub fn value_dual(&self, x: &[Dual]) -> Option<Result<Dual>> {
        self.dual.as_ref().map(|d| {
            let v = d(x);
            if v.re.is_finite() && v.eps.is_finite() {
                Ok(v)
            } else {
                Err(Error::Domain("base function is not finite".into()))
            }
        })
    }

    pub fn laplacian(&self, x: &[f64]) -> Result<f64> {
        let lap = self.lap.as_ref().ok_or(Error::Capability("base Laplacian"))?;
        Self::finite("base Laplacian", x, lap(x))
    }

    pub fn bilaplacian(&self, x: &[f64]) -> Result<f64> {
        let bilap = self.bilap.as_ref().ok_or(Error::Capability("base bilaplacian"))?;
        Self::finite("base bilaplacian", x, bilap(x))
    }

    pub fn differential(&self, x: &[f64]) -> Result<Vec<f64>> {
        let grad = self.grad.as_ref().ok_or(Error::Capability("base gradient"))?;
        let g = grad(x);
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("base gradient is not finite at {x:?}")));
        }
        Ok(g)
    }

    /// Largest `|lap_f − Δ_g f|` against the numerical oracle on `chart`.
    pub fn check_laplacian(&self, chart: &BaseChart, samples: &[Vec<f64>], cfg: &DiffConfig) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in samples {
            let num = oracle::laplace_beltrami_numeric(chart, self, x, cfg)?;
            worst = worst.max(libm::fabs(self.laplacian(x)? - num));
        }
        Ok(worst)
    }
}

impl CoordinateField for BaseFunction {
    fn value(&self, c: &[f64]) -> Result<f64> {
        BaseFunction::value(self, c)
    }

    fn value_dual(&self, c: &[Dual]) -> Option<Result<Dual>> {
        BaseFunction::value_dual(self, c)
    }
}

/// Gradient of `f ∘ π`: the horizontal lift of `e^{-2φ₁} ∇f`.
pub fn grad_vertical_lift(bf: &BaseFunction, field: &MetricField, p: &TotalPoint) -> Result<Vec<f64>> {
    let df = bf.differential(&p.x)?;
    let g = Spd::factor(field.base().metric_at(&p.x)?)?;
    let scale = libm::exp(-2.0 * field.weights().jet(field.radius(p))?.phi1[0]);
    let v: Vec<f64> = g.solve(&df).into_iter().map(|c| c * scale).collect();
    let (m, k) = (field.m(), field.k());
    let gam = field.bundle().connection().coefficients(&p.x, k);
    let mut out = v.clone();
    out.resize(m + k, 0.0);
    for (i, gi) in gam.iter().enumerate().take(m) {
        for s in 0..k {
            let gu: f64 = (0..k).map(|q| gi[(s, q)] * p.u[q]).sum();
            out[m + s] -= gu * v[i];
        }
    }
    Ok(out)
}

/// `e^{-2φ₁} (Δ_g f)(x)`.
pub fn laplacian_vertical_lift(bf: &BaseFunction, field: &MetricField, p: &TotalPoint) -> Result<f64> {
    let jet = field.weights().jet(field.radius(p))?;
    Ok(libm::exp(-2.0 * jet.phi1[0]) * bf.laplacian(&p.x)?)
}

fn lift_defect_from_jet(j: &WeightJet, m: usize, k: usize, r: f64) -> f64 {
    let (m, k) = (m as f64, k as f64);
    let (d1, dd1, d2) = (j.phi1[1], j.phi1[2], j.phi2[1]);
    2.0 * r * dd1 - 4.0 * r * d1 * (d1 + d2) + 2.0 * m * r * d1 * d1 + 2.0 * k * r * d1 * d2 + k * d1
}

/// `2rφ₁'' − 4rφ₁'(φ₁+φ₂)' + 2mr(φ₁')² + 2krφ₁'φ₂' + kφ₁'`: the coefficient
/// of `Δ_g f` that obstructs biharmonicity of vertical lifts.
pub fn lift_defect(w: &WeightProfile, m: usize, k: usize, r: f64) -> Result<f64> {
    Ok(lift_defect_from_jet(&w.jet(r)?, m, k, r))
}

/// `e^{-4φ₁}(Δ_g² f) − 4e^{-2(φ₁+φ₂)} · defect · (Δ_g f)`.
pub fn bilaplacian_vertical_lift(bf: &BaseFunction, field: &MetricField, p: &TotalPoint) -> Result<f64> {
    let r = field.radius(p);
    let j = field.weights().jet(r)?;
    let defect = lift_defect_from_jet(&j, field.m(), field.k(), r);
    let bilap = bf.bilaplacian(&p.x)?;
    let lap = bf.laplacian(&p.x)?;
    let correction = if defect == 0.0 || lap == 0.0 {
        0.0
    } else {
        4.0 * libm::exp(-2.0 * (j.phi1[0] + j.phi2[0])) * defect * lap
    };
    Ok(libm::exp(-4.0 * j.phi1[0]) * bilap - correction)
}

/// Gradient of `α(r)`: `2e^{-2φ₂} α'(r) ξ`, i.e. `(0, 2e^{-2φ₂}α' u)` in raw coordinates.
pub fn grad_radial(rf: &RadialFunction, field: &MetricField, p: &TotalPoint) -> Result<Vec<f64>> {
    let r = field.radius(p);
    let d = rf.derivs(r)?;
    let phi2 = field.weights().jet(r)?.phi2[0];
    let c = 2.0 * libm::exp(-2.0 * phi2) * d[1];
    let mut out = vec![0.0; field.m()];
    out.extend(p.u.iter().map(|v| c * v));
    Ok(out)
}

/// The coefficient `mrφ₁' + (k−2)rφ₂' + k/2` of `α'` and its first two derivatives.
fn drift_jet(j: &WeightJet, m: f64, k: f64, r: f64) -> [f64; 3] {
    let (f1, f2) = (&j.phi1, &j.phi2);
    [
        m * r * f1[1] + (k - 2.0) * r * f2[1] + k / 2.0,
        m * (f1[1] + r * f1[2]) + (k - 2.0) * (f2[1] + r * f2[2]),
        m * (2.0 * f1[2] + r * f1[3]) + (k - 2.0) * (2.0 * f2[2] + r * f2[3]),
    ]
}

/// `Δ_G F` at radius `r`.
pub fn laplacian_radial(rf: &RadialFunction, w: &WeightProfile, m: usize, k: usize, r: f64) -> Result<f64> {
    let a = rf.derivs(r)?;
    let j = w.jet(r)?;
    let p = drift_jet(&j, m as f64, k as f64, r)[0];
    Ok(4.0 * libm::exp(-2.0 * j.phi2[0]) * (r * a[2] + p * a[1]))
}

/// `Δ_G F` as a function of `r` with its first two `r`-derivatives.
pub fn laplacian_radial_jet(
    rf: &RadialFunction,
    w: &WeightProfile,
    m: usize,
    k: usize,
    r: f64,
) -> Result<[f64; 3]> {
    let a = rf.derivs(r)?;
    let j = w.jet(r)?;
    let p = drift_jet(&j, m as f64, k as f64, r);
    let l0 = r * a[2] + p[0] * a[1];
    let l1 = a[2] + r * a[3] + p[1] * a[1] + p[0] * a[2];
    let l2 = 2.0 * a[3] + r * a[4] + p[2] * a[1] + 2.0 * p[1] * a[2] + p[0] * a[3];
    let (e, d1, d2) = (4.0 * libm::exp(-2.0 * j.phi2[0]), j.phi2[1], j.phi2[2]);
    Ok([
        e * l0,
        e * (l1 - 2.0 * d1 * l0),
        e * (l2 - 4.0 * d1 * l1 + (4.0 * d1 * d1 - 2.0 * d2) * l0),
    ])
}

/// `Δ_G² F`, obtained by applying the radial Laplacian to `Δ_G F`.
pub fn bilaplacian_radial(rf: &RadialFunction, w: &WeightProfile, m: usize, k: usize, r: f64) -> Result<f64> {
    let beta = laplacian_radial_jet(rf, w, m, k, r)?;
    let j = w.jet(r)?;
    let p = drift_jet(&j, m as f64, k as f64, r)[0];
    Ok(4.0 * libm::exp(-2.0 * j.phi2[0]) * (r * beta[2] + p * beta[1]))
}

/// The long-hand bilaplacian expression, evaluated literally term by term.
pub fn bihar_radial_transcription(
    rf: &RadialFunction,
    w: &WeightProfile,
    m: usize,
    k: usize,
    r: f64,
) -> Result<f64> {
    let a = rf.derivs(r)?;
    let j = w.jet(r)?;
    let (mf, kf) = (m as f64, k as f64);
    let (f1, f2) = (&j.phi1, &j.phi2);
    let e2 = libm::exp(-2.0 * f2[0]);
    let e4 = libm::exp(-4.0 * f2[0]);
    let e6 = libm::exp(-6.0 * f2[0]);
    let lap = r * a[2] + (mf * r * f1[1] + (kf - 2.0) * r * f2[1] + kf / 2.0) * a[1];
    let q = mf * f1[1] + mf * r * f1[2] + (kf - 2.0) * f2[1] + r * (kf - 2.0) * f2[2];
    let s = mf * r * f1[1] + r * (kf - 2.0) * f2[1] + kf / 2.0 + 1.0;
    let q2 = 2.0 * mf * f1[2] + mf * r * f1[3] + 2.0 * (kf - 2.0) * f2[2] + r * (kf - 2.0) * f2[3];
    let div_xi = 2.0 * mf * r * f1[1] + (1.0 + 2.0 * r * f2[1]) * kf;
    let block = r * a[3] + q * a[1] + s * a[2];

    let t1 = -16.0 * f2[1] * e4 * lap * a[1];
    // As displayed, the middle coefficient here carries no factor of α'.
    let t2 = 4.0 * e2 * (e2 * (r * a[3] + q + s * a[2])) * div_xi;
    let t3 = -8.0 * f2[1] * r * e2 * block;
    let t4 = 4.0 * r * e2 * (a[3] + r * a[4] + q2 * a[1] + 2.0 * q * a[2] + s * a[3]);
    let t5 = -8.0 * r * f2[1] * e6 * block;
    Ok(t1 + t2 + t3 + t4 + t5)
}

/// One row of the transcription-versus-composition comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranscriptionRow {
    pub r: f64,
    pub composition: f64,
    pub transcription: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
}

/// Evaluates both bilaplacian routes on a grid; differences are reported, not judged.
pub fn compare_transcription(
    rf: &RadialFunction,
    w: &WeightProfile,
    m: usize,
    k: usize,
    grid: &[f64],
) -> Result<Vec<TranscriptionRow>> {
    grid.iter()
        .map(|&r| {
            let composition = bilaplacian_radial(rf, w, m, k, r)?;
            let transcription = bihar_radial_transcription(rf, w, m, k, r)?;
            let abs_diff = libm::fabs(composition - transcription);
            Ok(TranscriptionRow {
                r,
                composition,
                transcription,
                abs_diff,
                rel_diff: abs_diff / libm::fabs(composition).max(1.0),
            })
        })
        .collect()
}
