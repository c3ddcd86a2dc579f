//! Spherically symmetric metrics on the total space of a vector bundle,
//! assembled in adapted local coordinates `(x, u)` over a single base chart.
//!
//! Raw coordinates are `x ∈ R^m` on the base and `u ∈ R^k` in a fixed
//! trivialization. The adapted coframe is `(dx^i, δu^p = du^p + Γ^p_{iq} u^q dx^i)`,
//! in which the metric is block diagonal `e^{2φ₁} g ⊕ e^{2φ₂} h`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use crate::closed_form::RadialFunction;
use crate::error::{Error, Result};
use crate::field::{quadratic_form, CoordinateField, ScalarFieldOnE, VectorFieldOnE};
use crate::linalg::Spd;
use crate::oracle::{self, Christoffel, DiffConfig, MetricSource};
use crate::smooth::SmoothFn;
use crate::weights::WeightProfile;

pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type MatrixListFn = Arc<dyn Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync>;

/// A coordinate box on the base with a Riemannian metric.
#[derive(Clone)]
pub struct BaseChart {
    name: String,
    dim: usize,
    domain: Vec<(f64, f64)>,
    metric: MatrixFn,
    partials: Option<MatrixListFn>,
}

impl core::fmt::Debug for BaseChart {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BaseChart")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("analytic_partials", &self.partials.is_some())
            .finish()
    }
}

impl BaseChart {
    pub fn new(
        name: impl Into<String>,
        domain: Vec<(f64, f64)>,
        metric: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    ) -> Result<Self> {
        if domain.is_empty() {
            return Err(Error::Config("base chart needs at least one coordinate".into()));
        }
        if let Some((lo, hi)) = domain.iter().find(|(lo, hi)| !(lo < hi)) {
            return Err(Error::Config(format!("empty coordinate interval [{lo}, {hi}]")));
        }
        Ok(Self {
            name: name.into(),
            dim: domain.len(),
            domain,
            metric: Arc::new(metric),
            partials: None,
        })
    }

    /// Supplies `[∂₁g, ..., ∂ₘg]` analytically.
    pub fn with_partials(mut self, p: impl Fn(&[f64]) -> Vec<DMatrix<f64>> + Send + Sync + 'static) -> Self {
        self.partials = Some(Arc::new(p));
        self
    }

    pub fn euclidean(domain: Vec<(f64, f64)>) -> Result<Self> {
        let m = domain.len();
        Ok(Self::new("euclidean", domain, move |_| DMatrix::identity(m, m))?
            .with_partials(move |_| vec![DMatrix::zeros(m, m); m]))
    }

    /// `g = diag(p₁(x¹), ..., pₘ(xᵐ))` with each entry a polynomial in its own coordinate.
    pub fn diagonal_polynomial(entries: Vec<Vec<f64>>, domain: Vec<(f64, f64)>) -> Result<Self> {
        let m = domain.len();
        if entries.len() != m {
            return Err(Error::Config(format!(
                "diagonal metric has {} entries for a {m}-dimensional chart",
                entries.len()
            )));
        }
        let polys: Arc<[SmoothFn]> = entries.into_iter().map(SmoothFn::polynomial).collect();
        let dpolys = polys.clone();
        let eval = move |x: &[f64]| {
            DMatrix::from_fn(m, m, |i, j| {
                if i == j {
                    polys[i].value(x[i]).unwrap_or(f64::NAN)
                } else {
                    0.0
                }
            })
        };
        Ok(Self::new("diagonal", domain, eval)?.with_partials(move |x| {
            (0..m)
                .map(|l| {
                    let mut d = DMatrix::zeros(m, m);
                    d[(l, l)] = dpolys[l].derivative(1, x[l]).unwrap_or(f64::NAN);
                    d
                })
                .collect()
        }))
    }

    /// Upper half-space model `g = δ / (xᵐ)²`, requiring `xᵐ > 0` on the box.
    pub fn hyperbolic_half_space(domain: Vec<(f64, f64)>) -> Result<Self> {
        let m = domain.len();
        if domain.last().is_none_or(|(lo, _)| *lo <= 0.0) {
            return Err(Error::Config("half-space chart needs a positive last coordinate".into()));
        }
        Ok(Self::new("hyperbolic_half_space", domain, move |x| {
            DMatrix::identity(m, m) / (x[m - 1] * x[m - 1])
        })?
        .with_partials(move |x| {
            let y = x[m - 1];
            (0..m)
                .map(|l| {
                    if l == m - 1 {
                        DMatrix::identity(m, m) * (-2.0 / (y * y * y))
                    } else {
                        DMatrix::zeros(m, m)
                    }
                })
                .collect()
        }))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn center(&self) -> Vec<f64> {
        self.domain.iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && x.iter().zip(&self.domain).all(|(v, (lo, hi))| *lo <= *v && *v <= *hi)
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::Domain(format!("base point {x:?} lies outside the chart domain {:?}", self.domain)))
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        Ok((self.metric)(x))
    }

    pub fn has_analytic_partials(&self) -> bool {
        self.partials.is_some()
    }

    /// `∂ₗg` at `x`, analytic when supplied and central differences otherwise.
    pub fn metric_partials(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(x)?;
        match &self.partials {
            Some(p) => Ok(p(x)),
            None => oracle::metric_partials_numeric(self, x, &DiffConfig::default()),
        }
    }

    /// Levi-Civita symbols of `g`.
    pub fn christoffel(&self, x: &[f64]) -> Result<Christoffel> {
        Christoffel::from_metric(&self.metric_at(x)?, &self.metric_partials(x)?)
    }

    /// Verifies symmetric positive definiteness at the given points.
    pub fn check_spd(&self, samples: &[Vec<f64>]) -> Result<()> {
        for x in samples {
            Spd::factor(self.metric_at(x)?)
                .map_err(|e| Error::Geometry(format!("base metric at {x:?}: {e}")))?;
        }
        Ok(())
    }
}

impl MetricSource for BaseChart {
    fn dim(&self) -> usize {
        self.dim
    }

    fn metric(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        self.metric_at(c)
    }
}

/// Connection coefficients: for base axis `i`, a `k×k` matrix with entry
/// `(p, q) = Γ^p_{iq}`.
#[derive(Clone, Default)]
pub enum Connection {
    #[default]
    Flat,
    Coefficients(MatrixListFn),
}

impl core::fmt::Debug for Connection {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            Connection::Flat => f.write_str("Flat"),
            Connection::Coefficients(_) => f.write_str("Coefficients(..)"),
        }
    }
}

impl Connection {
    pub fn constant(mats: Vec<DMatrix<f64>>) -> Self {
        Self::Coefficients(Arc::new(move |_| mats.clone()))
    }

    pub fn is_flat(&self) -> bool {
        matches!(self, Connection::Flat)
    }

    pub fn coefficients(&self, x: &[f64], k: usize) -> Vec<DMatrix<f64>> {
        match self {
            Connection::Flat => vec![DMatrix::zeros(k, k); x.len()],
            Connection::Coefficients(f) => f(x),
        }
    }
}

/// Rank, constant fiber metric and connection of the bundle.
#[derive(Debug, Clone)]
pub struct BundleConfig {
    rank: usize,
    fiber_metric: DMatrix<f64>,
    connection: Connection,
}

impl BundleConfig {
    pub fn new(rank: usize, fiber_metric: DMatrix<f64>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Config("bundle rank must be positive".into()));
        }
        if fiber_metric.nrows() != rank || fiber_metric.ncols() != rank {
            return Err(Error::Config(format!(
                "fiber metric is {}x{}, expected {rank}x{rank}",
                fiber_metric.nrows(),
                fiber_metric.ncols()
            )));
        }
        Spd::factor(fiber_metric.clone())
            .map_err(|e| Error::Config(format!("fiber metric: {e}")))?;
        Ok(Self {
            rank,
            fiber_metric,
            connection: Connection::Flat,
        })
    }

    /// Flat trivial bundle with the identity fiber metric.
    pub fn trivial(rank: usize) -> Result<Self> {
        Self::new(rank, DMatrix::identity(rank, rank))
    }

    pub fn with_connection(mut self, connection: Connection) -> Self {
        self.connection = connection;
        self
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn fiber_metric(&self) -> &DMatrix<f64> {
        &self.fiber_metric
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    /// Largest entry of `hΓᵢ + (hΓᵢ)ᵀ` over the samples; zero for a compatible connection.
    pub fn compatibility_defect(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for x in samples {
            let gam = self.connection.coefficients(x, self.rank);
            if gam.len() != x.len() {
                return Err(Error::Config(format!(
                    "connection supplies {} coefficient matrices for a {}-dimensional base",
                    gam.len(),
                    x.len()
                )));
            }
            for g in &gam {
                if g.nrows() != self.rank || g.ncols() != self.rank {
                    return Err(Error::Config("connection coefficient matrix has the wrong size".into()));
                }
                let hg = &self.fiber_metric * g;
                worst = worst.max((&hg + hg.transpose()).amax());
            }
        }
        Ok(worst)
    }
}

/// A point `e` of the total space in coordinates `(x, u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TotalPoint {
    pub x: Vec<f64>,
    pub u: Vec<f64>,
}

impl TotalPoint {
    pub fn new(x: Vec<f64>, u: Vec<f64>) -> Self {
        Self { x, u }
    }

    pub fn from_coords(m: usize, c: &[f64]) -> Self {
        Self::new(c[..m].to_vec(), c[m..].to_vec())
    }

    pub fn coords(&self) -> Vec<f64> {
        let mut c = self.x.clone();
        c.extend_from_slice(&self.u);
        c
    }

    /// The point `t·e` in the same fiber.
    pub fn scale_fiber(&self, t: f64) -> Self {
        Self::new(self.x.clone(), self.u.iter().map(|v| t * v).collect())
    }
}

/// `r = uᵀ h u`.
pub fn radius(bundle: &BundleConfig, p: &TotalPoint) -> f64 {
    quadratic_form(&bundle.fiber_metric, &p.u)
}

/// Fiber components of the tautological field at `p`.
pub fn tautological_components(p: &TotalPoint) -> Vec<f64> {
    p.u.clone()
}

/// `div ξ = 2 m r φ₁' + (1 + 2 r φ₂') k`.
pub fn div_xi_closed_form(w: &WeightProfile, m: usize, k: usize, r: f64) -> Result<f64> {
    let j = w.jet(r)?;
    Ok(2.0 * m as f64 * r * j.phi1[1] + (1.0 + 2.0 * r * j.phi2[1]) * k as f64)
}

/// The spherically symmetric metric built from a base chart, a bundle and weights.
#[derive(Debug, Clone)]
pub struct MetricField {
    base: BaseChart,
    bundle: BundleConfig,
    weights: WeightProfile,
}

impl MetricField {
    /// Checks connection compatibility at the chart center and the midpoints
    /// of its faces.
    pub fn new(base: BaseChart, bundle: BundleConfig, weights: WeightProfile) -> Result<Self> {
        if !bundle.connection.is_flat() {
            let center = base.center();
            let mut samples = vec![center.clone()];
            for (i, (lo, hi)) in base.domain().iter().enumerate() {
                for v in [*lo, *hi] {
                    let mut x = center.clone();
                    x[i] = v;
                    samples.push(x);
                }
            }
            let defect = bundle.compatibility_defect(&samples)?;
            if defect > 1e-10 {
                return Err(Error::Config(format!(
                    "connection is not compatible with the fiber metric (defect {defect:e})"
                )));
            }
        }
        Ok(Self { base, bundle, weights })
    }

    pub fn base(&self) -> &BaseChart {
        &self.base
    }

    pub fn bundle(&self) -> &BundleConfig {
        &self.bundle
    }

    pub fn weights(&self) -> &WeightProfile {
        &self.weights
    }

    pub fn m(&self) -> usize {
        self.base.dim()
    }

    pub fn k(&self) -> usize {
        self.bundle.rank()
    }

    pub fn dim(&self) -> usize {
        self.m() + self.k()
    }

    pub fn radius(&self, p: &TotalPoint) -> f64 {
        radius(&self.bundle, p)
    }

    fn check_point(&self, p: &TotalPoint) -> Result<()> {
        if p.x.len() != self.m() || p.u.len() != self.k() {
            return Err(Error::Config(format!(
                "point has ({}, {}) coordinates, expected ({}, {})",
                p.x.len(),
                p.u.len(),
                self.m(),
                self.k()
            )));
        }
        Ok(())
    }

    /// `(Γu)^p_i = Γ^p_{iq} u^q` as a `k×m` matrix.
    fn connection_form(&self, p: &TotalPoint) -> DMatrix<f64> {
        let (m, k) = (self.m(), self.k());
        let gam = self.bundle.connection.coefficients(&p.x, k);
        let u = nalgebra::DVector::from_column_slice(&p.u);
        let mut out = DMatrix::zeros(k, m);
        for (i, g) in gam.iter().enumerate().take(m) {
            out.set_column(i, &(g * &u));
        }
        out
    }

    /// Jacobian of the adapted coframe `(dx, δu)` with respect to `(dx, du)`.
    pub fn coframe_jacobian(&self, p: &TotalPoint) -> DMatrix<f64> {
        let (m, n) = (self.m(), self.dim());
        let mut j = DMatrix::identity(n, n);
        j.view_mut((m, 0), (self.k(), m)).copy_from(&self.connection_form(p));
        j
    }

    fn assemble(&self, p: &TotalPoint) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let (m, k, n) = (self.m(), self.k(), self.dim());
        let g = self.base.metric_at(&p.x)?;
        let jet = self.weights.jet(self.radius(p))?;
        let mut block = DMatrix::zeros(n, n);
        block
            .view_mut((0, 0), (m, m))
            .copy_from(&(g * libm::exp(2.0 * jet.phi1[0])));
        block
            .view_mut((m, m), (k, k))
            .copy_from(&(&self.bundle.fiber_metric * libm::exp(2.0 * jet.phi2[0])));
        if self.bundle.connection.is_flat() {
            return Ok(block);
        }
        let j = self.coframe_jacobian(p);
        Ok(j.transpose() * block * j)
    }

    /// Metric matrix in raw coordinates, checked to be SPD.
    pub fn metric_matrix(&self, p: &TotalPoint) -> Result<DMatrix<f64>> {
        let g = self.assemble(p)?;
        Spd::factor(g.clone())?;
        Ok(g)
    }

    /// Columns `E_i = e^{-φ₁} e_i^h`, `E_{m+p} = e^{-φ₂} σ_p^v` in raw
    /// coordinates, with `{e_i}` and `{σ_p}` orthonormalized by Cholesky.
    pub fn adapted_frame(&self, p: &TotalPoint) -> Result<DMatrix<f64>> {
        self.check_point(p)?;
        let (m, k, n) = (self.m(), self.k(), self.dim());
        let jet = self.weights.jet(self.radius(p))?;
        let eg = Spd::factor(self.base.metric_at(&p.x)?)?.orthonormal_frame();
        let eh = Spd::factor(self.bundle.fiber_metric.clone())?.orthonormal_frame();
        let mut frame = DMatrix::zeros(n, n);
        frame
            .view_mut((0, 0), (m, m))
            .copy_from(&(eg * libm::exp(-jet.phi1[0])));
        frame
            .view_mut((m, m), (k, k))
            .copy_from(&(eh * libm::exp(-jet.phi2[0])));
        // Horizontal lift of X is (X, -(Γu)X).
        let gu = self.connection_form(p);
        let top = frame.view((0, 0), (m, m)).clone_owned();
        frame.view_mut((m, 0), (k, m)).copy_from(&(-(gu * top)));
        Ok(frame)
    }
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        MetricField::dim(self)
    }

    fn metric(&self, c: &[f64]) -> Result<DMatrix<f64>> {
        if c.len() != self.dim() {
            return Err(Error::Config(format!("expected {} coordinates, got {}", self.dim(), c.len())));
        }
        self.assemble(&TotalPoint::from_coords(self.m(), c))
    }
}

/// Christoffel symbols predicted by `∇̃ = D̃ + C` for a flat connection:
/// base symbols on the horizontal block plus the tensor `C` with
/// `a = 2φ₁'`, `b = 2φ₂'`, `c₁ = −2φ₁' e^{2(φ₁−φ₂)}`, `c₂ = −2φ₂'`.
pub fn predicted_christoffel_flat(field: &MetricField, p: &TotalPoint) -> Result<Christoffel> {
    if !field.bundle.connection.is_flat() {
        return Err(Error::Unsupported(
            "Levi-Civita decomposition is only available for a flat connection".into(),
        ));
    }
    let (m, k, n) = (field.m(), field.k(), field.dim());
    let r = field.radius(p);
    let jet = field.weights.jet(r)?;
    let a = 2.0 * jet.phi1[1];
    let b = 2.0 * jet.phi2[1];
    let c1 = -2.0 * jet.phi1[1] * libm::exp(2.0 * (jet.phi1[0] - jet.phi2[0]));
    let c2 = -2.0 * jet.phi2[1];
    let g = field.base.metric_at(&p.x)?;
    let h = &field.bundle.fiber_metric;
    let hu: Vec<f64> = (0..k).map(|s| (0..k).map(|q| h[(s, q)] * p.u[q]).sum()).collect();

    let mut out = Christoffel::zeros(n);
    let base = field.base.christoffel(&p.x)?;
    for l in 0..m {
        for i in 0..m {
            for j in 0..m {
                out.set(l, i, j, base.get(l, i, j));
            }
        }
    }
    // C(∂_i, ∂_j) = c₁ g_ij ξ
    for i in 0..m {
        for j in 0..m {
            for s in 0..k {
                out.add(m + s, i, j, c1 * g[(i, j)] * p.u[s]);
            }
        }
    }
    // C(∂_i, ∂_{u^q}) = a (hu)_q ∂_i
    for i in 0..m {
        for q in 0..k {
            out.add(i, i, m + q, a * hu[q]);
            out.add(i, m + q, i, a * hu[q]);
        }
    }
    // C(∂_{u^p}, ∂_{u^q}) = b((hu)_p ∂_{u^q} + (hu)_q ∂_{u^p}) + c₂ h_pq ξ
    for pi in 0..k {
        for q in 0..k {
            out.add(m + q, m + pi, m + q, b * hu[pi]);
            out.add(m + pi, m + pi, m + q, b * hu[q]);
            for s in 0..k {
                out.add(m + s, m + pi, m + q, c2 * h[(pi, q)] * p.u[s]);
            }
        }
    }
    Ok(out)
}

/// Max entrywise deviation between finite-difference Christoffel symbols of
/// the assembled metric and the decomposition prediction.
pub fn check_levi_civita_flat(field: &MetricField, p: &TotalPoint, cfg: &DiffConfig) -> Result<f64> {
    let predicted = predicted_christoffel_flat(field, p)?;
    let numeric = oracle::christoffel_numeric(field, &p.coords(), cfg)?;
    Ok(predicted.max_abs_diff(&numeric))
}

/// Directional derivatives of `F = α(r)` along the adapted frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerFunReport {
    /// Largest `|E_i(F)|` over horizontal frame vectors.
    pub horizontal_max: f64,
    /// Largest `|∂F/∂u^p − 2α'(r)(hu)_p|`.
    pub vertical_max_dev: f64,
}

/// Horizontal derivatives of an r-radial function vanish and vertical ones
/// equal `2α'(r)(hu)_p`.
pub fn der_fun_check(
    field: &MetricField,
    alpha: &RadialFunction,
    p: &TotalPoint,
    cfg: &DiffConfig,
) -> Result<DerFunReport> {
    let (m, k) = (field.m(), field.k());
    let f = ScalarFieldOnE::r_radial(field, alpha.clone());
    let c = p.coords();
    let frame = field.adapted_frame(p)?;
    let mut horizontal_max: f64 = 0.0;
    for i in 0..m {
        let dir: Vec<f64> = frame.column(i).iter().copied().collect();
        let d = oracle::directional_derivative(&f, &c, &dir, cfg)?;
        horizontal_max = horizontal_max.max(libm::fabs(d));
    }
    let dalpha = alpha.derivs(field.radius(p))?[1];
    let h = field.bundle.fiber_metric();
    let grad = oracle::differential(&f, &c, cfg)?;
    let mut vertical_max_dev: f64 = 0.0;
    for q in 0..k {
        let hu: f64 = (0..k).map(|s| h[(q, s)] * p.u[s]).sum();
        let expected = 2.0 * dalpha * hu;
        vertical_max_dev = vertical_max_dev.max(libm::fabs(grad[m + q] - expected));
    }
    Ok(DerFunReport { horizontal_max, vertical_max_dev })
}

/// Forward-mode Jacobian of the tautological field at `p`.
pub fn der_xi_jacobian(field: &MetricField, p: &TotalPoint) -> Result<DMatrix<f64>> {
    oracle::jacobian_forward(&VectorFieldOnE::tautological(field.m(), field.k()), &p.coords())
}

/// Largest deviation of the ξ Jacobian from `[0 | 0; 0 | I]`; exact for flat connections.
pub fn der_xi_deviation(field: &MetricField, p: &TotalPoint) -> Result<f64> {
    let jac = der_xi_jacobian(field, p)?;
    let m = field.m();
    let n = field.dim();
    let mut expected = DMatrix::zeros(n, n);
    for s in m..n {
        expected[(s, s)] = 1.0;
    }
    Ok((jac - expected).amax())
}

/// Evaluates `F` at a total-space point.
pub fn eval_field(f: &ScalarFieldOnE, p: &TotalPoint) -> Result<f64> {
    f.value(&p.coords())
}
