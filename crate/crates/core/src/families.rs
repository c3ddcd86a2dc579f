//! Radial biharmonic families under the Sasaki metric, the exponent
//! quadratic with exact roots, the vertical-lift obstruction equation and
//! classification of radial functions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_integer::Roots;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use crate::bundle::{MetricField, TotalPoint};
use crate::closed_form::{
    bilaplacian_radial, bilaplacian_vertical_lift, laplacian_radial, laplacian_vertical_lift, lift_defect,
    BaseFunction, RadialFunction,
};
use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::smooth::SmoothFn;
use crate::weights::WeightProfile;

pub type Rational = Ratio<i64>;

/// Relative agreement required between the two forms of the obstruction equation.
pub const EQUATION_AGREEMENT: f64 = 1e-12;

/// Which family of radial solutions to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyCase {
    /// Line bundles: `β(r ln r − r)`.
    K1,
    /// Plane bundles: `−β ln r`.
    K2,
    /// Odd rank `k ≥ 3`, second derivative `β r^{−k}`.
    KOdd,
    /// Even rank `k ≥ 4`, second derivative `β r^{−k}`.
    KEvenA,
    /// Even rank `k ≥ 4`, second derivative `β r^{−k/2}`.
    KEvenB,
}

impl FamilyCase {
    pub const ALL: [FamilyCase; 5] = [
        FamilyCase::K1,
        FamilyCase::K2,
        FamilyCase::KOdd,
        FamilyCase::KEvenA,
        FamilyCase::KEvenB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyCase::K1 => "k1",
            FamilyCase::K2 => "k2",
            FamilyCase::KOdd => "kOdd",
            FamilyCase::KEvenA => "kEvenA",
            FamilyCase::KEvenB => "kEvenB",
        }
    }

    pub fn admits(self, k: usize) -> bool {
        match self {
            FamilyCase::K1 => k == 1,
            FamilyCase::K2 => k == 2,
            FamilyCase::KOdd => k >= 3 && k % 2 == 1,
            FamilyCase::KEvenA | FamilyCase::KEvenB => k >= 4 && k.is_multiple_of(2),
        }
    }

    /// All cases available for rank `k`.
    pub fn for_rank(k: usize) -> Vec<FamilyCase> {
        Self::ALL.iter().copied().filter(|c| c.admits(k)).collect()
    }

    /// Exponent `n` of the second derivative `α'' = β rⁿ`.
    pub fn exponent(self, k: usize) -> Result<i64> {
        if !self.admits(k) {
            return Err(Error::Config(format!("family case {} does not apply to rank {k}", self.name())));
        }
        let k = k as i64;
        Ok(match self {
            FamilyCase::K1 => -1,
            FamilyCase::K2 => -2,
            FamilyCase::KOdd | FamilyCase::KEvenA => -k,
            FamilyCase::KEvenB => -k / 2,
        })
    }
}

impl fmt::Display for FamilyCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyCase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|c| c.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown family case '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyParams {
    pub k: usize,
    pub case: FamilyCase,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl FamilyParams {
    pub fn new(k: usize, case: FamilyCase, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        let fp = Self { k, case, beta, gamma, delta };
        fp.validate()?;
        Ok(fp)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("bundle rank must be positive".into()));
        }
        if !self.case.admits(self.k) {
            return Err(Error::Config(format!(
                "family case {} does not apply to rank {}",
                self.case, self.k
            )));
        }
        if ![self.beta, self.gamma, self.delta].iter().all(|v| v.is_finite()) {
            return Err(Error::Config("family coefficients must be finite".into()));
        }
        if self.beta == 0.0 {
            return Err(Error::Config("family coefficient beta must be nonzero".into()));
        }
        Ok(())
    }
}

/// Twice-integrated `β rⁿ` plus `γ r + δ`.
pub fn radial_family(fp: &FamilyParams) -> Result<RadialFunction> {
    fp.validate()?;
    let n = fp.case.exponent(fp.k)?;
    let FamilyParams { beta, gamma, delta, .. } = *fp;
    let alpha = match n {
        -1 => SmoothFn::r_log_r(beta).plus(SmoothFn::polynomial(alloc::vec![delta, gamma - beta])),
        -2 => SmoothFn::log(-beta).plus(SmoothFn::polynomial(alloc::vec![delta, gamma])),
        _ => {
            let c = beta / ((n + 1) * (n + 2)) as f64;
            SmoothFn::power(c, (n + 2) as f64).plus(SmoothFn::polynomial(alloc::vec![delta, gamma]))
        }
    };
    RadialFunction::singular(alpha)
}

/// Both forms of the vertical-lift obstruction at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquationE {
    /// `2rφ₁'' − 4rφ₁'(φ₁+φ₂)' + 2mr(φ₁')² + 2krφ₁'φ₂' + kφ₁'`
    pub e: f64,
    /// `2rφ₁'' + 2r(m−2)(φ₁')² + 2r(k−2)φ₁'φ₂' + kφ₁'`
    pub e_prime: f64,
}

/// Evaluates both forms and fails if they disagree beyond rounding.
pub fn equation_e_residual(w: &WeightProfile, m: usize, k: usize, r: f64) -> Result<EquationE> {
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("r = {r} must be non-negative")));
    }
    let e = lift_defect(w, m, k, r)?;
    let j = w.jet(r)?;
    let (mf, kf) = (m as f64, k as f64);
    let (d1, dd1, d2) = (j.phi1[1], j.phi1[2], j.phi2[1]);
    let e_prime = 2.0 * r * dd1 + 2.0 * r * (mf - 2.0) * d1 * d1 + 2.0 * r * (kf - 2.0) * d1 * d2 + kf * d1;
    let scale = 1.0 + libm::fabs(e).max(libm::fabs(e_prime));
    if libm::fabs(e - e_prime) > EQUATION_AGREEMENT * scale {
        return Err(Error::Numeric(format!(
            "obstruction forms disagree at r = {r}: {e} vs {e_prime}"
        )));
    }
    Ok(EquationE { e, e_prime })
}

/// `2r²α⁽⁴⁾ + (3k+4)rα⁽³⁾ + k(k+2)α''`.
pub fn sasaki_radial_residual(rf: &RadialFunction, k: usize, r: f64) -> Result<f64> {
    let a = rf.derivs(r)?;
    let kf = k as f64;
    Ok(2.0 * r * r * a[4] + (3.0 * kf + 4.0) * r * a[3] + kf * (kf + 2.0) * a[2])
}

/// `1 + 2r²|α⁽⁴⁾| + (3k+4)r|α⁽³⁾| + k(k+2)|α''|`, the size the Sasaki residual is measured against.
pub fn sasaki_radial_scale(rf: &RadialFunction, k: usize, r: f64) -> Result<f64> {
    let a = rf.derivs(r)?;
    let kf = k as f64;
    Ok(1.0 + 2.0 * r * r * libm::fabs(a[4]) + (3.0 * kf + 4.0) * r * libm::fabs(a[3]) + kf * (kf + 2.0) * libm::fabs(a[2]))
}

/// `2r²ψ'' + (3k+4)rψ' + k(k+2)ψ` for `ψ = rⁿ`.
pub fn power_residual(k: usize, n: f64, r: f64) -> f64 {
    let kf = k as f64;
    let psi = libm::pow(r, n);
    let d1 = n * libm::pow(r, n - 1.0);
    let d2 = n * (n - 1.0) * libm::pow(r, n - 2.0);
    2.0 * r * r * d2 + (3.0 * kf + 4.0) * r * d1 + kf * (kf + 2.0) * psi
}

/// `2n² + (3k+2)n + k(k+2)` in exact arithmetic.
pub fn exponent_quadratic(k: usize, n: Rational) -> Rational {
    let k = k as i64;
    n * n * 2 + n * (3 * k + 2) + Rational::from_integer(k * (k + 2))
}

fn rational_sqrt(q: Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let (n, d) = (*q.numer(), *q.denom());
    let (sn, sd) = (n.sqrt(), d.sqrt());
    (sn * sn == n && sd * sd == d).then(|| Rational::new(sn, sd))
}

/// `rⁿ` when it is rational: integer `n`, or half-integer `n` at a square `r`.
pub fn rational_power(r: Rational, n: Rational) -> Option<Rational> {
    if r.is_zero() || r.is_negative() {
        return None;
    }
    let (base, twice) = if n.is_integer() {
        (r, *n.numer())
    } else if (n * 2).is_integer() {
        (rational_sqrt(r)?, *(n * 2).numer())
    } else {
        return None;
    };
    let exp = i32::try_from(twice).ok()?;
    Some(if exp >= 0 { base.pow(exp) } else { base.recip().pow(-exp) })
}

/// `2r²ψ'' + (3k+4)rψ' + k(k+2)ψ` for `ψ = rⁿ`, term by term in exact arithmetic.
pub fn power_residual_exact(k: usize, n: Rational, r: Rational) -> Option<Rational> {
    let ki = k as i64;
    let psi = rational_power(r, n)?;
    let d1 = n * rational_power(r, n - Rational::one())?;
    let d2 = n * (n - Rational::one()) * rational_power(r, n - 2)?;
    Some(r * r * d2 * 2 + r * d1 * (3 * ki + 4) + psi * (ki * (ki + 2)))
}

/// Rational roots of the exponent quadratic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExponentRoots {
    pub k: usize,
    /// `(3k+2)² − 8k(k+2)`
    pub discriminant: i64,
    /// Distinct roots, `−k` first.
    pub roots: Vec<Rational>,
    pub double: bool,
}

impl ExponentRoots {
    pub fn case_label(&self) -> &'static str {
        match self.k {
            1 => "line bundle",
            2 => "plane bundle",
            k if k % 2 == 1 => "odd rank",
            _ => "even rank",
        }
    }
}

impl fmt::Display for ExponentRoots {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for n in &self.roots {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{n}")?;
        }
        if self.double {
            f.write_str(" (double)")?;
        }
        Ok(())
    }
}

pub fn exponent_roots(k: usize) -> Result<ExponentRoots> {
    if k == 0 {
        return Err(Error::Domain("bundle rank must be at least 1".into()));
    }
    let ki = i64::try_from(k).map_err(|_| Error::Domain(format!("rank {k} is too large")))?;
    let b = 3 * ki + 2;
    let discriminant = b * b - 8 * ki * (ki + 2);
    let s = discriminant.sqrt();
    if s * s != discriminant {
        return Err(Error::Numeric(format!("discriminant {discriminant} is not a perfect square")));
    }
    let minus = Rational::new(-b - s, 4);
    let plus = Rational::new(-b + s, 4);
    let neg_k = Rational::from_integer(-ki);
    let other = if minus == neg_k { plus } else { minus };
    let mut roots = alloc::vec![neg_k];
    if other != neg_k {
        roots.push(other);
    }
    let double = roots.len() == 1;
    debug_assert!(roots.iter().all(|n| exponent_quadratic(k, *n).is_zero()));
    Ok(ExponentRoots { k, discriminant, roots, double })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Harmonic,
    ProperBiharmonic,
    NotBiharmonic,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Harmonic => "harmonic",
            Classification::ProperBiharmonic => "proper_biharmonic",
            Classification::NotBiharmonic => "not_biharmonic",
        }
    }

    fn from_maxima(max_lap: f64, max_bilap: f64, tol: f64) -> Self {
        if max_lap <= tol {
            Classification::Harmonic
        } else if max_bilap <= tol {
            Classification::ProperBiharmonic
        } else {
            Classification::NotBiharmonic
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyReport {
    pub class: Classification,
    pub max_laplacian: f64,
    pub max_bilaplacian: f64,
    pub tol_abs: f64,
}

/// Scale of the radial bilaplacian relative to `α''`.
pub fn residual_scale(k: usize) -> f64 {
    let kf = k as f64 + 2.0;
    16.0 * kf * kf
}

fn check_finite(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("{what} is not finite")))
    }
}

/// Classifies `α(r)` over a radius grid with `tol = 1e−9 (1 + max|α''| · 16(k+2)²)`.
pub fn classify(rf: &RadialFunction, w: &WeightProfile, m: usize, k: usize, grid: &[f64]) -> Result<ClassifyReport> {
    if grid.is_empty() {
        return Err(Error::Config("classification grid is empty".into()));
    }
    let (mut max_lap, mut max_bilap, mut max_a2) = (0.0f64, 0.0f64, 0.0f64);
    for &r in grid {
        max_lap = max_lap.max(libm::fabs(check_finite(laplacian_radial(rf, w, m, k, r)?, "Laplacian")?));
        max_bilap = max_bilap.max(libm::fabs(check_finite(bilaplacian_radial(rf, w, m, k, r)?, "bilaplacian")?));
        max_a2 = max_a2.max(libm::fabs(rf.derivative(2, r)?));
    }
    let tol_abs = 1e-9 * (1.0 + max_a2 * residual_scale(k));
    Ok(ClassifyReport {
        class: Classification::from_maxima(max_lap, max_bilap, tol_abs),
        max_laplacian: max_lap,
        max_bilaplacian: max_bilap,
        tol_abs,
    })
}

/// Classifies `f ∘ π` over total-space points with `tol = 1e−9 (1 + max|Δ_g f|)`.
pub fn classify_vertical_lift(bf: &BaseFunction, field: &MetricField, points: &[TotalPoint]) -> Result<ClassifyReport> {
    if points.is_empty() {
        return Err(Error::Config("classification point set is empty".into()));
    }
    let (mut max_lap, mut max_bilap, mut max_base) = (0.0f64, 0.0f64, 0.0f64);
    for p in points {
        max_lap = max_lap.max(libm::fabs(laplacian_vertical_lift(bf, field, p)?));
        max_bilap = max_bilap.max(libm::fabs(bilaplacian_vertical_lift(bf, field, p)?));
        max_base = max_base.max(libm::fabs(bf.laplacian(&p.x)?));
    }
    let tol_abs = 1e-9 * (1.0 + max_base);
    Ok(ClassifyReport {
        class: Classification::from_maxima(max_lap, max_bilap, tol_abs),
        max_laplacian: max_lap,
        max_bilaplacian: max_bilap,
        tol_abs,
    })
}

/// `f(x) = |x|⁻¹` on punctured `Rⁿ`, with `Δf = (3−n) f³` and
/// `Δ²f = 3(n−5)(n−3) |x|⁻⁵`.
pub fn base_example_inverse_norm(n: usize) -> Result<BaseFunction> {
    if n < 2 {
        return Err(Error::Config(format!("inverse norm example needs dimension ≥ 2, got {n}")));
    }
    let norm = |x: &[f64]| libm::sqrt(x.iter().map(|v| v * v).sum::<f64>());
    let nf = n as f64;
    let name: String = format!("inverse_norm_{n}");
    Ok(BaseFunction::new(name, n, move |x| 1.0 / norm(x))
        .with_dual(|x: &[Dual]| {
            let sq = x.iter().fold(Dual::constant(0.0), |acc, v| acc + *v * *v);
            sq.powf(-0.5)
        })
        .with_laplacian(move |x| (3.0 - nf) * libm::pow(norm(x), -3.0))
        .with_bilaplacian(move |x| 3.0 * (nf - 5.0) * (nf - 3.0) * libm::pow(norm(x), -5.0))
        .with_gradient(move |x| {
            let c = -libm::pow(norm(x), -3.0);
            x.iter().map(|v| c * v).collect()
        }))
}
