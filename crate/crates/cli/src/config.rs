//! TOML run configuration and its resolution into core objects.

use std::path::Path;

use bihar_core::families::{base_example_inverse_norm, radial_family};
use bihar_core::poly::Polynomial;
use bihar_core::{
    BaseChart, BaseFunction, BundleConfig, Connection, DiffConfig, DiffScheme, FamilyCase, FamilyParams,
    MetricField, RadialFunction, SmoothFn, WeightProfile,
};
use nalgebra::DMatrix;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub base: BaseSpec,
    #[serde(default)]
    pub bundle: BundleSpec,
    #[serde(default)]
    pub weights: WeightSpec,
    pub function: Option<FunctionSpec>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub diff: DiffSpec,
    #[serde(default)]
    pub tolerance: ToleranceSpec,
    pub family: Option<FamilySpec>,
    pub sweep: Option<SweepSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn field(&self) -> Result<MetricField, CliError> {
        let base = self.base.build()?;
        let bundle = self.bundle.build(base.dim())?;
        let weights = self.weights.build()?;
        Ok(MetricField::new(base, bundle, weights)?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MetricSpec {
    /// `"euclidean"` or `"hyperbolic"`.
    Named(String),
    /// Polynomial coefficients in `xᵢ` for each diagonal entry `gᵢᵢ`.
    Diagonal { diagonal: Vec<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaseSpec {
    pub dim: usize,
    #[serde(default = "default_metric")]
    pub metric: MetricSpec,
    /// One `[lo, hi]` per coordinate; defaults to `[-2, 2]`.
    pub domain: Option<Vec<[f64; 2]>>,
}

fn default_metric() -> MetricSpec {
    MetricSpec::Named("euclidean".into())
}

impl Default for BaseSpec {
    fn default() -> Self {
        Self { dim: 1, metric: default_metric(), domain: None }
    }
}

impl BaseSpec {
    pub fn build(&self) -> Result<BaseChart, CliError> {
        if self.dim == 0 {
            return Err(CliError::Config("base.dim must be at least 1".into()));
        }
        let domain: Vec<(f64, f64)> = match &self.domain {
            Some(d) if d.len() != self.dim => {
                return Err(CliError::Config(format!(
                    "base.domain has {} intervals for dimension {}",
                    d.len(),
                    self.dim
                )))
            }
            Some(d) => d.iter().map(|[lo, hi]| (*lo, *hi)).collect(),
            None => vec![(-2.0, 2.0); self.dim],
        };
        let chart = match &self.metric {
            MetricSpec::Named(name) => match name.as_str() {
                "euclidean" => BaseChart::euclidean(domain)?,
                "hyperbolic" => BaseChart::hyperbolic_half_space(domain)?,
                other => return Err(CliError::Config(format!("unknown base metric `{other}`"))),
            },
            MetricSpec::Diagonal { diagonal } => {
                if diagonal.len() != self.dim {
                    return Err(CliError::Config("base.metric.diagonal needs one entry per coordinate".into()));
                }
                BaseChart::diagonal_polynomial(diagonal.clone(), domain)?
            }
        };
        Ok(chart)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum ConnectionSpec {
    /// `"zero"`.
    Named(String),
    /// Constant `Γ_i`, one `k × k` matrix per base coordinate.
    Coefficients { coefficients: Vec<Vec<Vec<f64>>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub rank: usize,
    pub fiber_metric: Option<Vec<Vec<f64>>>,
    pub connection: Option<ConnectionSpec>,
}

impl Default for BundleSpec {
    fn default() -> Self {
        Self { rank: 1, fiber_metric: None, connection: None }
    }
}

fn square(rows: &[Vec<f64>], n: usize, what: &str) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(CliError::Config(format!("{what} must be {n}×{n}")));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl BundleSpec {
    pub fn build(&self, m: usize) -> Result<BundleConfig, CliError> {
        let k = self.rank;
        let h = match &self.fiber_metric {
            Some(rows) => square(rows, k, "bundle.fiber_metric")?,
            None => DMatrix::identity(k.max(1), k.max(1)),
        };
        let mut bundle = BundleConfig::new(k, h)?;
        match &self.connection {
            None => {}
            Some(ConnectionSpec::Named(n)) if n == "zero" => {}
            Some(ConnectionSpec::Named(n)) => {
                return Err(CliError::Config(format!("unknown connection `{n}`")));
            }
            Some(ConnectionSpec::Coefficients { coefficients }) => {
                if coefficients.len() != m {
                    return Err(CliError::Config(format!(
                        "bundle.connection needs {m} coefficient matrices, got {}",
                        coefficients.len()
                    )));
                }
                let mats = coefficients
                    .iter()
                    .map(|c| square(c, k, "connection coefficient"))
                    .collect::<Result<Vec<_>, _>>()?;
                bundle = bundle.with_connection(Connection::constant(mats));
            }
        }
        Ok(bundle)
    }
}

/// A function of `r` as a sum of built-in terms.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmoothSpec {
    pub polynomial: Option<Vec<f64>>,
    /// `c · ln r`
    pub log: Option<f64>,
    /// `c · r ln r`
    pub r_log_r: Option<f64>,
    /// `[c, p]` for `c · r^p`
    pub power: Option<[f64; 2]>,
    /// `[c, λ]` for `c · e^{λr}`
    pub exp: Option<[f64; 2]>,
}

impl SmoothSpec {
    pub fn build(&self) -> SmoothFn {
        let mut f = SmoothFn::zero();
        if let Some(c) = &self.polynomial {
            f = f.plus(SmoothFn::polynomial(c.clone()));
        }
        if let Some(c) = self.log {
            f = f.plus(SmoothFn::log(c));
        }
        if let Some(c) = self.r_log_r {
            f = f.plus(SmoothFn::r_log_r(c));
        }
        if let Some([c, p]) = self.power {
            f = f.plus(SmoothFn::power(c, p));
        }
        if let Some([c, l]) = self.exp {
            f = f.plus(SmoothFn::exp(c, l));
        }
        f
    }

    fn is_singular(&self) -> bool {
        self.log.is_some() || self.power.is_some_and(|[_, p]| p < 0.0)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSpec {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub phi1: Option<SmoothSpec>,
    pub phi2: Option<SmoothSpec>,
}

impl WeightSpec {
    pub fn build(&self) -> Result<WeightProfile, CliError> {
        let profile = match &self.preset {
            Some(p) => {
                if self.phi1.is_some() {
                    return Err(CliError::Config("weights.phi1 cannot be combined with a preset".into()));
                }
                if self.phi2.is_some() && p != "vertical_conformal" {
                    return Err(CliError::Config(format!("preset `{p}` takes no phi2")));
                }
                WeightProfile::preset(p, self.phi2.as_ref().map(SmoothSpec::build))?
            }
            None => WeightProfile::new(
                self.name.clone().unwrap_or_else(|| "custom".into()),
                self.phi1.as_ref().map(SmoothSpec::build).unwrap_or_else(SmoothFn::zero),
                self.phi2.as_ref().map(SmoothSpec::build).unwrap_or_else(SmoothFn::zero),
            )?,
        };
        Ok(match &self.name {
            Some(n) => profile.renamed(n),
            None => profile,
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FunctionSpec {
    /// Vertical lift of a Euclidean polynomial; each term is `[coef, e₁, …, e_m]`.
    Polynomial { terms: Vec<Vec<f64>> },
    /// Vertical lift of `|x|⁻¹`.
    InverseNorm,
    /// `α(r)` from built-in terms.
    Radial {
        #[serde(flatten)]
        alpha: SmoothSpec,
    },
    /// `α(r)` from a radial family; its rank is the bundle rank.
    Family {
        case: String,
        beta: f64,
        #[serde(default)]
        gamma: f64,
        #[serde(default)]
        delta: f64,
    },
}

pub enum ResolvedFunction {
    Lift(BaseFunction),
    Radial(RadialFunction),
}

impl FunctionSpec {
    pub fn build(&self, m: usize, k: usize) -> Result<ResolvedFunction, CliError> {
        Ok(match self {
            FunctionSpec::Polynomial { terms } => {
                let terms = terms
                    .iter()
                    .map(|t| polynomial_term(t, m))
                    .collect::<Result<Vec<_>, _>>()?;
                ResolvedFunction::Lift(BaseFunction::euclidean_polynomial("polynomial", Polynomial::new(m, terms)))
            }
            FunctionSpec::InverseNorm => ResolvedFunction::Lift(base_example_inverse_norm(m)?),
            FunctionSpec::Radial { alpha } => {
                let f = alpha.build();
                ResolvedFunction::Radial(if alpha.is_singular() {
                    RadialFunction::singular(f)?
                } else {
                    RadialFunction::new(f)?
                })
            }
            FunctionSpec::Family { case, beta, gamma, delta } => {
                let case: FamilyCase = case.parse()?;
                let params = FamilyParams::new(k, case, *beta, *gamma, *delta)?;
                ResolvedFunction::Radial(radial_family(&params)?)
            }
        })
    }
}

fn polynomial_term(t: &[f64], m: usize) -> Result<(f64, Vec<u32>), CliError> {
    if t.len() != m + 1 {
        return Err(CliError::Config(format!(
            "polynomial term needs a coefficient and {m} exponents, got {} numbers",
            t.len()
        )));
    }
    let powers = t[1..]
        .iter()
        .map(|&e| {
            if e >= 0.0 && e.fract() == 0.0 && e <= 16.0 {
                Ok(e as u32)
            } else {
                Err(CliError::Config(format!("polynomial exponent {e} is not a small non-negative integer")))
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((t[0], powers))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "default_points")]
    pub points: usize,
    /// Radius range `[lo, hi]` with `r = uᵀhu`.
    #[serde(default = "default_r")]
    pub r: [f64; 2],
    /// Explicit radii; replaces the sampled range where radii alone are needed.
    pub radii: Option<Vec<f64>>,
    /// Fraction of each base interval, centred, from which base points are drawn.
    #[serde(default = "default_shrink")]
    pub base_fraction: f64,
}

fn default_points() -> usize {
    20
}

fn default_r() -> [f64; 2] {
    [0.5, 3.0]
}

fn default_shrink() -> f64 {
    0.8
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: default_points(), r: default_r(), radii: None, base_fraction: default_shrink() }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        let [lo, hi] = self.r;
        if self.points == 0 {
            return Err(CliError::Config("grid.points must be positive".into()));
        }
        if !(lo >= 0.0 && hi >= lo && hi.is_finite()) {
            return Err(CliError::Config(format!("grid.r = [{lo}, {hi}] is not a valid radius range")));
        }
        if !(self.base_fraction > 0.0 && self.base_fraction <= 1.0) {
            return Err(CliError::Config("grid.base_fraction must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Explicit radii, or `points` evenly spaced radii over the range.
    pub fn radii(&self) -> Vec<f64> {
        if let Some(r) = &self.radii {
            return r.clone();
        }
        let [lo, hi] = self.r;
        if self.points == 1 {
            return vec![lo];
        }
        (0..self.points)
            .map(|i| lo + (hi - lo) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffSpec {
    /// `"central"` or `"forward"`.
    pub scheme: Option<String>,
    pub base_step: Option<f64>,
    pub richardson_levels: Option<usize>,
    pub nested_step_ratio: Option<f64>,
}

impl DiffSpec {
    pub fn build(&self) -> Result<DiffConfig, CliError> {
        let mut cfg = DiffConfig::default();
        if let Some(s) = &self.scheme {
            cfg.scheme = match s.as_str() {
                "central" => DiffScheme::CentralFd,
                "forward" => DiffScheme::ForwardMode,
                other => return Err(CliError::Config(format!("unknown diff scheme `{other}`"))),
            };
        }
        if let Some(v) = self.base_step {
            cfg.base_step = v;
        }
        if let Some(v) = self.richardson_levels {
            cfg.richardson_levels = v;
        }
        if let Some(v) = self.nested_step_ratio {
            cfg.nested_step_ratio = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Relative tolerances, applied as `|a − b| ≤ tol · (1 + |a|)`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    #[serde(default = "default_lap_tol")]
    pub laplacian: f64,
    #[serde(default = "default_bilap_tol")]
    pub bilaplacian: f64,
    #[serde(default = "default_residual_tol")]
    pub residual: f64,
    #[serde(default = "default_regularity_tol")]
    pub regularity: f64,
}

fn default_lap_tol() -> f64 {
    1e-6
}

fn default_bilap_tol() -> f64 {
    1e-3
}

fn default_residual_tol() -> f64 {
    1e-12
}

fn default_regularity_tol() -> f64 {
    1e-6
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            laplacian: default_lap_tol(),
            bilaplacian: default_bilap_tol(),
            residual: default_residual_tol(),
            regularity: default_regularity_tol(),
        }
    }
}

impl ToleranceSpec {
    pub fn override_all(&mut self, tol: f64) -> Result<(), CliError> {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Config(format!("tolerance must be positive, got {tol}")));
        }
        self.laplacian = tol;
        self.bilaplacian = tol;
        self.residual = tol;
        self.regularity = tol;
        Ok(())
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub k: Option<usize>,
    pub case: Option<String>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepCheck {
    EquationE,
    SasakiRadial,
    Exponents,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub check: SweepCheck,
    #[serde(default = "default_ranks")]
    pub m: Vec<usize>,
    #[serde(default = "default_ranks")]
    pub k: Vec<usize>,
    /// Expected value of (E) at every sample, when one is known.
    pub expect: Option<f64>,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub gamma: f64,
    #[serde(default)]
    pub delta: f64,
}

fn default_ranks() -> Vec<usize> {
    vec![1, 2]
}

fn default_beta() -> f64 {
    1.0
}
