//! Weight functions of a spherically symmetric metric.
//!
//! A [`WeightProfile`] holds the pair `(φ₁, φ₂)`; the metric on the total
//! space is `e^{2φ₁(r)} π*g ⊕ e^{2φ₂(r)} π*h` where `r` is the squared fiber
//! norm. Derivatives up to order three are supplied analytically.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::oracle;
use crate::smooth::SmoothFn;

pub const MAX_WEIGHT_ORDER: usize = 3;

/// Base step of the right-limit extrapolation at `r = 0`.
pub const RIGHT_LIMIT_STEP: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightSlot {
    Phi1,
    Phi2,
}

impl WeightSlot {
    pub const ALL: [WeightSlot; 2] = [WeightSlot::Phi1, WeightSlot::Phi2];

    pub fn name(self) -> &'static str {
        match self {
            WeightSlot::Phi1 => "phi1",
            WeightSlot::Phi2 => "phi2",
        }
    }
}

/// Derivatives `0..=3` of both weights at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightJet {
    pub phi1: [f64; 4],
    pub phi2: [f64; 4],
}

#[derive(Debug, Clone)]
pub struct WeightProfile {
    name: String,
    phi1: SmoothFn,
    phi2: SmoothFn,
}

impl WeightProfile {
    pub fn new(name: impl Into<String>, phi1: SmoothFn, phi2: SmoothFn) -> Result<Self> {
        for (slot, f) in [(WeightSlot::Phi1, &phi1), (WeightSlot::Phi2, &phi2)] {
            if !f.supports_order(MAX_WEIGHT_ORDER) {
                return Err(Error::Config(format!(
                    "{} must supply derivatives up to order {MAX_WEIGHT_ORDER}",
                    slot.name()
                )));
            }
        }
        Ok(Self { name: name.into(), phi1, phi2 })
    }

    /// `φ₁ = φ₂ = 0`.
    pub fn sasaki() -> Self {
        Self::new("sasaki", SmoothFn::zero(), SmoothFn::zero()).expect("zero weights")
    }

    /// `φ₁ = 0` with an arbitrary fiber weight.
    pub fn vertical_conformal(phi2: SmoothFn) -> Result<Self> {
        Self::new("vertical_conformal", SmoothFn::zero(), phi2)
    }

    /// `φ₁(r) = r`, `φ₂ = 0`.
    pub fn linear_horizontal() -> Self {
        Self::new(
            "linear_horizontal",
            SmoothFn::polynomial(alloc::vec![0.0, 1.0]),
            SmoothFn::zero(),
        )
        .expect("polynomial weights")
    }

    /// Looks up a preset by name. `vertical_conformal` takes its fiber weight
    /// from `phi2` and defaults to `r²`.
    pub fn preset(name: &str, phi2: Option<SmoothFn>) -> Result<Self> {
        match name {
            "sasaki" => Ok(Self::sasaki()),
            "vertical_conformal" => Self::vertical_conformal(
                phi2.unwrap_or_else(|| SmoothFn::polynomial(alloc::vec![0.0, 0.0, 1.0])),
            ),
            "linear_horizontal" => Ok(Self::linear_horizontal()),
            other => Err(Error::Config(format!("unknown weight preset `{other}`"))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn slot(&self, which: WeightSlot) -> &SmoothFn {
        match which {
            WeightSlot::Phi1 => &self.phi1,
            WeightSlot::Phi2 => &self.phi2,
        }
    }

    /// Derivative of the requested order of one weight.
    pub fn eval(&self, which: WeightSlot, order: usize, r: f64) -> Result<f64> {
        if order > MAX_WEIGHT_ORDER {
            return Err(Error::UnsupportedOrder { order, max: MAX_WEIGHT_ORDER });
        }
        self.slot(which).derivative(order, r)
    }

    pub fn jet(&self, r: f64) -> Result<WeightJet> {
        Ok(WeightJet {
            phi1: self.phi1.jet(r)?,
            phi2: self.phi2.jet(r)?,
        })
    }
}

/// Regularity findings for one weight and one derivative order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCheck {
    pub slot: WeightSlot,
    pub order: usize,
    /// Largest `|fd − analytic| / max(1, |analytic|)` over the grid; zero for order 0.
    pub max_mismatch: f64,
    /// Grid points where the central stencil would leave `[0, ∞)`.
    pub skipped: usize,
    /// Extrapolated value at `r → 0⁺`.
    pub right_limit: f64,
    pub divergent: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub profile: String,
    pub checks: Vec<OrderCheck>,
}

impl RegularityReport {
    pub fn max_mismatch(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.max_mismatch))
    }

    pub fn has_divergent_limit(&self) -> bool {
        self.checks.iter().any(|c| c.divergent)
    }

    pub fn passes(&self, tolerance: f64) -> bool {
        !self.has_divergent_limit() && self.checks.iter().all(|c| c.max_mismatch <= tolerance)
    }
}

/// Right limit at 0 from samples at `h, h/2, h/4`, with a divergence flag
/// raised when the two first-order extrapolants disagree.
pub fn right_limit<F>(f: F, h: f64) -> (f64, bool)
where
    F: Fn(f64) -> Result<f64>,
{
    let samples: Vec<f64> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&t| f(t).unwrap_or(f64::NAN))
        .collect();
    if samples.iter().any(|v| !v.is_finite()) {
        return (f64::NAN, true);
    }
    let e1 = 2.0 * samples[1] - samples[0];
    let e2 = 2.0 * samples[2] - samples[1];
    let limit = (4.0 * e2 - e1) / 3.0;
    let divergent = libm::fabs(e2 - e1) > 1e-3 * (1.0 + libm::fabs(limit));
    (limit, divergent)
}

/// Compares every analytic derivative slot with finite differences of the
/// slot below it and extrapolates each slot to `r = 0⁺`.
pub fn check_regularity(profile: &WeightProfile, grid: &[f64]) -> Result<RegularityReport> {
    if grid.is_empty() {
        return Err(Error::Config("regularity grid is empty".into()));
    }
    if let Some(r) = grid.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::Domain(format!("regularity grid contains r = {r}")));
    }
    let fd = oracle::DiffConfig::default();
    let mut checks = Vec::new();
    for slot in WeightSlot::ALL {
        let f = profile.slot(slot);
        for order in 0..=MAX_WEIGHT_ORDER {
            let mut max_mismatch: f64 = 0.0;
            let mut skipped = 0;
            if order > 0 {
                for &r in grid {
                    let h = fd.base_step * r.max(1.0);
                    if r - h <= 0.0 {
                        skipped += 1;
                        continue;
                    }
                    let analytic = f.derivative(order, r)?;
                    let numeric =
                        oracle::derivative(|t| f.derivative(order - 1, t), r, h, fd.richardson_levels)?;
                    let mismatch = libm::fabs(numeric - analytic) / libm::fabs(analytic).max(1.0);
                    max_mismatch = max_mismatch.max(if mismatch.is_nan() { f64::INFINITY } else { mismatch });
                }
            }
            let (right_limit, divergent) = right_limit(|t| f.derivative(order, t), RIGHT_LIMIT_STEP);
            checks.push(OrderCheck {
                slot,
                order,
                max_mismatch,
                skipped,
                right_limit,
                divergent,
            });
        }
    }
    Ok(RegularityReport {
        profile: profile.name().into(),
        checks,
    })
}
