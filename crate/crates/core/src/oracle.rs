//! Coordinate-based numerical differential operators.
//!
//! Everything here works on raw chart coordinates and a metric supplied as a
//! matrix-valued function. Derivatives are central differences refined by
//! Richardson extrapolation; the scalar-field differential can alternatively
//! be taken in forward mode with dual numbers.
//!
//! The Laplace–Beltrami operator uses the divergence form
//! `Δf = |G|^{-1/2} ∂_I (|G|^{1/2} G^{IJ} ∂_J f)`, so the only geometric input
//! is the metric itself: no Christoffel symbols or closed-form expressions.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::field::{CoordinateField, VectorField};
use crate::linalg::Spd;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DiffScheme {
    #[default]
    CentralFd,
    ForwardMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffConfig {
    pub scheme: DiffScheme,
    /// Step relative to `max(1, |coordinate|)`.
    pub base_step: f64,
    pub richardson_levels: usize,
    /// Outer/inner step ratio for the nested bilaplacian.
    pub nested_step_ratio: f64,
}

impl Default for DiffConfig {
    fn default() -> Self {
        Self {
            scheme: DiffScheme::CentralFd,
            base_step: 1e-3,
            richardson_levels: 3,
            nested_step_ratio: 8.0,
        }
    }
}

impl DiffConfig {
    pub fn forward_mode() -> Self {
        Self {
            scheme: DiffScheme::ForwardMode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::Config(format!("base_step must be positive, got {}", self.base_step)));
        }
        if self.richardson_levels == 0 {
            return Err(Error::Config("richardson_levels must be at least 1".into()));
        }
        if !(self.nested_step_ratio > 0.0 && self.nested_step_ratio.is_finite()) {
            return Err(Error::Config(format!(
                "nested_step_ratio must be positive, got {}",
                self.nested_step_ratio
            )));
        }
        Ok(())
    }

    /// Finest step per coordinate, rounded to a power of two so that shifted
    /// coordinates are exact.
    pub fn steps(&self, c: &[f64]) -> Vec<f64> {
        c.iter()
            .map(|x| {
                let h = self.base_step * libm::fabs(*x).max(1.0);
                libm::exp2(libm::round(libm::log2(h)))
            })
            .collect()
    }

    fn outer(&self) -> Self {
        Self {
            scheme: DiffScheme::CentralFd,
            base_step: self.base_step * self.nested_step_ratio,
            ..*self
        }
    }
}

/// A chart with a metric tensor field.
pub trait MetricSource: Send + Sync {
    fn dim(&self) -> usize;
    /// Metric matrix at chart coordinates `c`; domain violations are errors.
    fn metric(&self, c: &[f64]) -> Result<DMatrix<f64>>;
}

/// The identity metric on `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct FlatMetric(pub usize);

impl MetricSource for FlatMetric {
    fn dim(&self) -> usize {
        self.0
    }

    fn metric(&self, _c: &[f64]) -> Result<DMatrix<f64>> {
        Ok(DMatrix::identity(self.0, self.0))
    }
}

/// Derivative at `s = 0` of a vector-valued `f(s)` from central differences
/// at `2^{levels-1}h, ..., 2h, h`, extrapolated to order `2·levels`.
pub fn richardson_central<F>(mut f: F, h: f64, levels: usize) -> Result<Vec<f64>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    let levels = levels.max(1);
    let mut prev: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for i in 0..levels {
        let hi = h * libm::pow(2.0, (levels - 1 - i) as f64);
        let plus = f(hi)?;
        let minus = f(-hi)?;
        let mut row: Vec<Vec<f64>> = Vec::with_capacity(i + 1);
        row.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * hi)).collect());
        for j in 1..=i {
            let factor = libm::pow(4.0, j as f64) - 1.0;
            let next = row[j - 1]
                .iter()
                .zip(&prev[j - 1])
                .map(|(fine, coarse)| fine + (fine - coarse) / factor)
                .collect();
            row.push(next);
        }
        prev = row;
    }
    Ok(prev.pop().expect("at least one level"))
}

/// Scalar derivative of `f` at `t`.
pub fn derivative<F>(mut f: F, t: f64, h: f64, levels: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    richardson_central(|s| Ok(vec![f(t + s)?]), h, levels).map(|v| v[0])
}

/// Derivative of `field` at `c` along `direction`.
pub fn directional_derivative(
    field: &dyn CoordinateField,
    c: &[f64],
    direction: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    cfg.validate()?;
    let scale = c.iter().fold(1.0f64, |m, x| m.max(libm::fabs(*x)));
    let norm = libm::sqrt(direction.iter().map(|d| d * d).sum::<f64>()).max(f64::MIN_POSITIVE);
    let h = cfg.base_step * scale / norm;
    let mut q = c.to_vec();
    derivative(
        |t| {
            for ((qi, ci), di) in q.iter_mut().zip(c).zip(direction) {
                *qi = ci + t * di;
            }
            field.value(&q)
        },
        0.0,
        h,
        cfg.richardson_levels,
    )
}

fn shifted(c: &[f64], axis: usize, s: f64) -> Vec<f64> {
    let mut q = c.to_vec();
    q[axis] += s;
    q
}

/// Coordinate differential `∂_J f` at `c`.
pub fn differential(field: &dyn CoordinateField, c: &[f64], cfg: &DiffConfig) -> Result<Vec<f64>> {
    match cfg.scheme {
        DiffScheme::CentralFd => {
            let steps = cfg.steps(c);
            (0..c.len())
                .map(|j| derivative(|s| field.value(&shifted(c, j, s)), 0.0, steps[j], cfg.richardson_levels))
                .collect()
        }
        DiffScheme::ForwardMode => {
            let mut seeds: Vec<Dual> = c.iter().map(|&x| Dual::constant(x)).collect();
            let mut out = Vec::with_capacity(c.len());
            for j in 0..c.len() {
                seeds[j].eps = 1.0;
                let v = field
                    .value_dual(&seeds)
                    .ok_or(Error::Capability("field has no forward-mode evaluation"))??;
                out.push(v.eps);
                seeds[j].eps = 0.0;
            }
            Ok(out)
        }
    }
}

fn check_dim(metric: &dyn MetricSource, c: &[f64]) -> Result<()> {
    if metric.dim() != c.len() {
        return Err(Error::Config(format!(
            "point has {} coordinates, chart has dimension {}",
            c.len(),
            metric.dim()
        )));
    }
    Ok(())
}

/// Contravariant gradient `G^{-1} dF`.
pub fn gradient_numeric(
    metric: &dyn MetricSource,
    field: &dyn CoordinateField,
    c: &[f64],
    cfg: &DiffConfig,
) -> Result<Vec<f64>> {
    cfg.validate()?;
    check_dim(metric, c)?;
    let g = Spd::factor(metric.metric(c)?)?;
    Ok(g.solve(&differential(field, c, cfg)?))
}

/// `|G|^{-1/2} ∂_I (|G|^{1/2} V^I)`, differentiated by central differences.
fn divergence_of<F>(metric: &dyn MetricSource, flux_density: F, c: &[f64], cfg: &DiffConfig) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let steps = cfg.steps(c);
    let sqrt_det = Spd::factor(metric.metric(c)?)?.sqrt_det();
    let mut total = 0.0;
    for (i, &h) in steps.iter().enumerate() {
        let d = richardson_central(
            |s| Ok(vec![flux_density(&shifted(c, i, s))?[i]]),
            h,
            cfg.richardson_levels,
        )?;
        total += d[0];
    }
    Ok(total / sqrt_det)
}

/// Numerical Laplace–Beltrami operator of a scalar field.
pub fn laplace_beltrami_numeric(
    metric: &dyn MetricSource,
    field: &dyn CoordinateField,
    c: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_dim(metric, c)?;
    divergence_of(
        metric,
        |q| {
            let g = Spd::factor(metric.metric(q)?)?;
            let sd = g.sqrt_det();
            Ok(g.solve(&differential(field, q, cfg)?).into_iter().map(|v| v * sd).collect())
        },
        c,
        cfg,
    )
}

/// `Δ(Δf)`: the inner Laplacian is evaluated with `cfg`, the outer one by
/// central differences with steps scaled by `nested_step_ratio`.
pub fn bilaplacian_numeric(
    metric: &dyn MetricSource,
    field: &dyn CoordinateField,
    c: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_dim(metric, c)?;
    let inner = |q: &[f64]| laplace_beltrami_numeric(metric, field, q, cfg);
    laplace_beltrami_numeric(metric, &inner, c, &cfg.outer())
}

/// Riemannian divergence of a vector field given by contravariant components.
pub fn divergence_numeric(
    metric: &dyn MetricSource,
    field: &dyn VectorField,
    c: &[f64],
    cfg: &DiffConfig,
) -> Result<f64> {
    cfg.validate()?;
    check_dim(metric, c)?;
    divergence_of(
        metric,
        |q| {
            let sd = Spd::factor(metric.metric(q)?)?.sqrt_det();
            let v = field.value(q)?;
            if v.len() != q.len() {
                return Err(Error::Config(format!(
                    "vector field has {} components, expected {}",
                    v.len(),
                    q.len()
                )));
            }
            Ok(v.into_iter().map(|x| x * sd).collect())
        },
        c,
        cfg,
    )
}

/// Christoffel symbols of the second kind, `Γ^k_{ij}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Christoffel {
    dim: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.dim + i) * self.dim + j]
    }

    pub fn set(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] = v;
    }

    pub fn add(&mut self, k: usize, i: usize, j: usize, v: f64) {
        self.data[(k * self.dim + i) * self.dim + j] += v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(libm::fabs(*v)))
    }

    pub fn max_abs_diff(&self, other: &Christoffel) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max(libm::fabs(a - b)))
    }

    /// Symbols from a metric and its partials `∂_l g` by the Koszul formula.
    pub fn from_metric(g: &DMatrix<f64>, partials: &[DMatrix<f64>]) -> Result<Self> {
        let n = g.nrows();
        let ginv = Spd::factor(g.clone())?.inverse();
        let mut out = Self::zeros(n);
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)]
                            * (partials[i][(l, j)] + partials[j][(l, i)] - partials[l][(i, j)]);
                    }
                    out.set(k, i, j, 0.5 * s);
                }
            }
        }
        Ok(out)
    }
}

/// Partials `∂_l G` of a metric, by central differences.
pub fn metric_partials_numeric(
    metric: &dyn MetricSource,
    c: &[f64],
    cfg: &DiffConfig,
) -> Result<Vec<DMatrix<f64>>> {
    cfg.validate()?;
    check_dim(metric, c)?;
    let n = c.len();
    let steps = cfg.steps(c);
    (0..n)
        .map(|l| {
            let d = richardson_central(
                |s| Ok(metric.metric(&shifted(c, l, s))?.as_slice().to_vec()),
                steps[l],
                cfg.richardson_levels,
            )?;
            Ok(DMatrix::from_column_slice(n, n, &d))
        })
        .collect()
}

/// Christoffel symbols of the metric from finite differences of its entries.
pub fn christoffel_numeric(metric: &dyn MetricSource, c: &[f64], cfg: &DiffConfig) -> Result<Christoffel> {
    let partials = metric_partials_numeric(metric, c, cfg)?;
    Christoffel::from_metric(&metric.metric(c)?, &partials)
}

/// Jacobian `∂V^I/∂c^J` by forward-mode evaluation; exact for fields built
/// from arithmetic on the coordinates.
pub fn jacobian_forward(field: &dyn VectorField, c: &[f64]) -> Result<DMatrix<f64>> {
    let n = c.len();
    let mut seeds: Vec<Dual> = c.iter().map(|&x| Dual::constant(x)).collect();
    let mut jac: Option<DMatrix<f64>> = None;
    for j in 0..n {
        seeds[j].eps = 1.0;
        let v = field
            .value_dual(&seeds)
            .ok_or(Error::Capability("vector field has no forward-mode evaluation"))??;
        let m = jac.get_or_insert_with(|| DMatrix::zeros(v.len(), n));
        for (i, vi) in v.iter().enumerate() {
            m[(i, j)] = vi.eps;
        }
        seeds[j].eps = 0.0;
    }
    Ok(jac.unwrap_or_else(|| DMatrix::zeros(0, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::VectorFieldOnE;

    fn sum_of_squares(c: &[f64]) -> Result<f64> {
        Ok(c.iter().map(|x| x * x).sum())
    }

    #[test]
    fn richardson_is_exact_for_low_degree() {
        let d = derivative(|t| Ok(t * t * t * t * t), 1.3, 0.1, 3).unwrap();
        assert!((d - 5.0 * libm::pow(1.3, 4.0)).abs() < 1e-10);
    }

    #[test]
    fn flat_laplacian_of_squared_norm() {
        for d in 1..=5 {
            let c: Vec<f64> = (0..d).map(|i| 0.3 * i as f64 - 0.4).collect();
            let lap = laplace_beltrami_numeric(&FlatMetric(d), &sum_of_squares, &c, &DiffConfig::default())
                .unwrap();
            assert!((lap - 2.0 * d as f64).abs() < 1e-8, "d={d}: {lap}");
        }
    }

    #[test]
    fn flat_laplacian_of_harmonic_polynomial() {
        let f = |c: &[f64]| Ok(c[0] * c[0] - c[1] * c[1]);
        let lap = laplace_beltrami_numeric(&FlatMetric(2), &f, &[0.7, -1.2], &DiffConfig::default()).unwrap();
        assert!(lap.abs() < 1e-10, "{lap}");
    }

    #[test]
    fn flat_bilaplacian_of_squared_norm() {
        let b = bilaplacian_numeric(&FlatMetric(3), &sum_of_squares, &[0.1, 0.2, 0.3], &DiffConfig::default())
            .unwrap();
        // Nested differences of rounding noise leave a floor of a few 1e-6 here.
        assert!(b.abs() < 1e-5, "{b}");
    }

    #[test]
    fn gradient_of_constant_and_linear() {
        let cfg = DiffConfig::default();
        let constant = |_: &[f64]| Ok(4.0);
        let g = gradient_numeric(&FlatMetric(3), &constant, &[1.0, 2.0, 3.0], &cfg).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-12));
        let linear = |c: &[f64]| Ok(2.0 * c[0] - 3.0 * c[1] + 0.5 * c[2]);
        let g = gradient_numeric(&FlatMetric(3), &linear, &[1.0, -2.0, 3.0], &cfg).unwrap();
        for (a, b) in g.iter().zip([2.0, -3.0, 0.5]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn divergence_of_constant_field_is_zero() {
        let v = VectorFieldOnE::constant(vec![1.0, -2.0]);
        let d = divergence_numeric(&FlatMetric(2), &v, &[0.5, 0.5], &DiffConfig::default()).unwrap();
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn polar_metric_christoffels() {
        // Euclidean plane in polar coordinates (ρ, θ): Γ^ρ_θθ = -ρ, Γ^θ_ρθ = 1/ρ.
        struct Polar;
        impl MetricSource for Polar {
            fn dim(&self) -> usize {
                2
            }
            fn metric(&self, c: &[f64]) -> Result<DMatrix<f64>> {
                Ok(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, c[0] * c[0]]))
            }
        }
        let gam = christoffel_numeric(&Polar, &[2.0, 0.3], &DiffConfig::default()).unwrap();
        assert!((gam.get(0, 1, 1) + 2.0).abs() < 1e-9);
        assert!((gam.get(1, 0, 1) - 0.5).abs() < 1e-9);
        assert!((gam.get(1, 1, 0) - 0.5).abs() < 1e-9);
        assert!(gam.get(0, 0, 0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = DiffConfig { richardson_levels: 0, ..DiffConfig::default() };
        assert!(matches!(
            laplace_beltrami_numeric(&FlatMetric(1), &sum_of_squares, &[0.0], &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn forward_mode_needs_dual_capability() {
        let cfg = DiffConfig::forward_mode();
        assert!(matches!(
            gradient_numeric(&FlatMetric(1), &sum_of_squares, &[1.0], &cfg),
            Err(Error::Capability(_))
        ));
    }
}
