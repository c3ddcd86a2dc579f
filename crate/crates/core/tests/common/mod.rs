#![allow(dead_code)]

use bihar_core::{BaseChart, BundleConfig, MetricField, SmoothFn, TotalPoint, WeightProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn euclidean(m: usize, half_width: f64) -> BaseChart {
    BaseChart::euclidean(vec![(-half_width, half_width); m]).unwrap()
}

pub fn flat_field(m: usize, k: usize, w: WeightProfile) -> MetricField {
    MetricField::new(euclidean(m, 4.0), BundleConfig::trivial(k).unwrap(), w).unwrap()
}

pub fn phi1_linear() -> WeightProfile {
    WeightProfile::linear_horizontal()
}

pub fn phi2_linear() -> WeightProfile {
    WeightProfile::vertical_conformal(SmoothFn::polynomial(vec![0.0, 1.0])).unwrap()
}

pub fn vertical_r2() -> WeightProfile {
    WeightProfile::preset("vertical_conformal", None).unwrap()
}

/// A weight profile with both slots nonconstant.
pub fn mixed() -> WeightProfile {
    WeightProfile::new(
        "mixed",
        SmoothFn::polynomial(vec![0.1, 0.3, -0.05]),
        SmoothFn::exp(0.2, -0.5),
    )
    .unwrap()
}

/// Point with the given base coordinates and `uᵀu = r`, `u` along a fixed tilted direction.
pub fn point(x: Vec<f64>, k: usize, r: f64) -> TotalPoint {
    let dir: Vec<f64> = (0..k).map(|i| 1.0 + 0.37 * i as f64).collect();
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    let s = r.sqrt() / norm;
    TotalPoint::new(x, dir.into_iter().map(|d| d * s).collect())
}

/// Random point with base coordinates in `[-1, 1]^m` and `r` in `[r_lo, r_hi]`.
pub fn random_point(rng: &mut ChaCha8Rng, m: usize, k: usize, r_lo: f64, r_hi: f64) -> TotalPoint {
    let x: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut u: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut n2: f64 = u.iter().map(|v| v * v).sum();
    while n2 < 1e-6 {
        u = (0..k).map(|_| rng.gen_range(-1.0..1.0)).collect();
        n2 = u.iter().map(|v| v * v).sum();
    }
    let r = rng.gen_range(r_lo..r_hi);
    let s = (r / n2).sqrt();
    TotalPoint::new(x, u.into_iter().map(|v| v * s).collect())
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}
