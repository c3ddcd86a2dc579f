use std::time::Instant;

use bihar_core::closed_form::{bilaplacian_radial, bilaplacian_vertical_lift, laplacian_radial, laplacian_vertical_lift};
use bihar_core::families::{
    classify, classify_vertical_lift, equation_e_residual, exponent_roots, power_residual_exact, radial_family,
    sasaki_radial_residual, sasaki_radial_scale, ClassifyReport, Rational,
};
use bihar_core::oracle::{bilaplacian_numeric, laplace_beltrami_numeric};
use bihar_core::weights::check_regularity;
use bihar_core::{FamilyCase, FamilyParams, MetricField, ScalarFieldOnE, TotalPoint, WeightProfile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{GridSpec, ResolvedFunction, RunConfig, SweepCheck, ToleranceSpec};
use crate::error::CliError;
use crate::report::{format_point, write_rows, Tally};
use crate::Globals;

pub struct Outcome {
    pub pass: bool,
    /// False when the command prints only its summary.
    pub wrote_rows: bool,
    pub summary: Vec<String>,
}

#[derive(Serialize)]
struct VerifyRow {
    index: usize,
    point: String,
    r: f64,
    quantity: &'static str,
    closed_form: f64,
    oracle: f64,
    abs_error: f64,
    rel_error: f64,
    pass: bool,
}

/// Base coordinates uniform in the centred fraction of the domain, `u`
/// along a uniform direction scaled to `uᵀhu = r` with `r` uniform in range.
fn sample_points(field: &MetricField, grid: &GridSpec, seed: u64) -> Vec<TotalPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let [lo, hi] = grid.r;
    (0..grid.points)
        .map(|_| {
            let x: Vec<f64> = field
                .base()
                .domain()
                .iter()
                .map(|&(a, b)| {
                    let mid = 0.5 * (a + b);
                    let half = 0.5 * grid.base_fraction * (b - a);
                    if half > 0.0 {
                        rng.gen_range(mid - half..=mid + half)
                    } else {
                        mid
                    }
                })
                .collect();
            let dir = loop {
                let d: Vec<f64> = (0..field.k()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                if d.iter().map(|v| v * v).sum::<f64>() > 1e-6 {
                    break d;
                }
            };
            let r = if hi > lo { rng.gen_range(lo..=hi) } else { lo };
            let unit = TotalPoint::new(x, dir);
            let q = field.radius(&unit);
            unit.scale_fiber((r / q).sqrt())
        })
        .collect()
}

pub fn verify(cfg: &RunConfig, g: &Globals) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let tol = tolerances(cfg, g)?;
    cfg.grid.validate()?;
    let diff = cfg.diff.build()?;
    let field = cfg.field()?;
    let spec = cfg
        .function
        .as_ref()
        .ok_or_else(|| CliError::Config("verify needs a [function] table".into()))?;
    let function = spec.build(field.m(), field.k())?;
    let points = sample_points(&field, &cfg.grid, g.seed.unwrap_or(cfg.seed));

    let (scalar, class) = match &function {
        ResolvedFunction::Lift(f) => (
            ScalarFieldOnE::vertical_lift(&field, f.clone()),
            classify_vertical_lift(f, &field, &points)?,
        ),
        ResolvedFunction::Radial(rf) => {
            let radii: Vec<f64> = points.iter().map(|p| field.radius(p)).collect();
            (
                ScalarFieldOnE::r_radial(&field, rf.clone()),
                classify(rf, field.weights(), field.m(), field.k(), &radii)?,
            )
        }
    };

    let mut rows = Vec::with_capacity(2 * points.len());
    let mut tally = Tally::default();
    for (index, p) in points.iter().enumerate() {
        let r = field.radius(p);
        let c = p.coords();
        let (lap, bilap) = match &function {
            ResolvedFunction::Lift(f) => (
                laplacian_vertical_lift(f, &field, p)?,
                bilaplacian_vertical_lift(f, &field, p)?,
            ),
            ResolvedFunction::Radial(rf) => {
                let w = field.weights();
                (
                    laplacian_radial(rf, w, field.m(), field.k(), r)?,
                    bilaplacian_radial(rf, w, field.m(), field.k(), r)?,
                )
            }
        };
        let oracles = [
            ("laplacian", lap, laplace_beltrami_numeric(&field, &scalar, &c, &diff)?, tol.laplacian),
            ("bilaplacian", bilap, bilaplacian_numeric(&field, &scalar, &c, &diff)?, tol.bilaplacian),
        ];
        for (quantity, closed_form, oracle, t) in oracles {
            let abs_error = (closed_form - oracle).abs();
            let rel_error = abs_error / (1.0 + closed_form.abs());
            let pass = rel_error <= t;
            tally.record(rel_error, pass);
            rows.push(VerifyRow {
                index,
                point: format_point(&p.x, &p.u),
                r,
                quantity,
                closed_form,
                oracle,
                abs_error,
                rel_error,
                pass,
            });
        }
    }
    write_rows(&rows, g.format, g.out.as_deref())?;
    Ok(Outcome {
        pass: tally.all_pass(),
        wrote_rows: true,
        summary: vec![classification_line(&class), tally.summary("verify", started)],
    })
}

fn classification_line(c: &ClassifyReport) -> String {
    format!(
        "classification: {} (max |Δ| {:.3e}, max |Δ²| {:.3e}, threshold {:.3e})",
        c.class, c.max_laplacian, c.max_bilaplacian, c.tol_abs
    )
}

fn tolerances(cfg: &RunConfig, g: &Globals) -> Result<ToleranceSpec, CliError> {
    let mut t = ToleranceSpec { ..cfg.tolerance };
    if let Some(x) = g.tolerance {
        t.override_all(x)?;
    }
    Ok(t)
}

pub fn roots(k: usize) -> Result<Outcome, CliError> {
    if k == 0 {
        return Err(CliError::Config("--k must be at least 1".into()));
    }
    let roots = exponent_roots(k)?;
    Ok(Outcome {
        pass: true,
        wrote_rows: false,
        summary: vec![
            roots.to_string(),
            format!("case: {}, discriminant {}", roots.case_label(), roots.discriminant),
        ],
    })
}

pub struct FamilyArgs {
    pub k: Option<usize>,
    pub case: Option<String>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Serialize)]
struct FamilyRow {
    r: f64,
    alpha: f64,
    alpha_prime: f64,
    laplacian: f64,
    bilaplacian: f64,
    sasaki_residual: f64,
    scaled_residual: f64,
    pass: bool,
}

fn default_case(k: usize) -> FamilyCase {
    match k {
        1 => FamilyCase::K1,
        2 => FamilyCase::K2,
        k if k % 2 == 1 => FamilyCase::KOdd,
        _ => FamilyCase::KEvenA,
    }
}

/// Sasaki weights; the grid is `[grid]` from the config when given, else 50 radii on `[0.1, 10]`.
pub fn families(cfg: Option<&RunConfig>, args: FamilyArgs, g: &Globals) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let from_cfg = cfg.and_then(|c| c.family.as_ref());
    let pick = |flag: Option<f64>, c: Option<f64>, d: f64| flag.or(c).unwrap_or(d);
    let k = args
        .k
        .or(from_cfg.and_then(|f| f.k))
        .ok_or_else(|| CliError::Config("families needs --k".into()))?;
    if k == 0 {
        return Err(CliError::Config("--k must be at least 1".into()));
    }
    let case = match args.case.as_deref().or(from_cfg.and_then(|f| f.case.as_deref())) {
        Some(s) => s.parse()?,
        None => default_case(k),
    };
    let params = FamilyParams::new(
        k,
        case,
        pick(args.beta, from_cfg.and_then(|f| f.beta), 1.0),
        pick(args.gamma, from_cfg.and_then(|f| f.gamma), 0.0),
        pick(args.delta, from_cfg.and_then(|f| f.delta), 0.0),
    )?;
    let m = args.m.or(from_cfg.and_then(|f| f.m)).unwrap_or(1);
    if m == 0 {
        return Err(CliError::Config("--m must be at least 1".into()));
    }
    let radii = match cfg {
        Some(c) => {
            c.grid.validate()?;
            c.grid.radii()
        }
        None => GridSpec { points: 50, r: [0.1, 10.0], ..GridSpec::default() }.radii(),
    };
    let tol = match cfg {
        Some(c) => tolerances(c, g)?.residual,
        None => {
            let mut t = ToleranceSpec::default();
            if let Some(x) = g.tolerance {
                t.override_all(x)?;
            }
            t.residual
        }
    };
    let rf = radial_family(&params)?;
    let w = WeightProfile::sasaki();
    let mut rows = Vec::with_capacity(radii.len());
    let mut tally = Tally::default();
    for &r in &radii {
        let sasaki_residual = sasaki_radial_residual(&rf, k, r)?;
        let scaled_residual = sasaki_residual.abs() / sasaki_radial_scale(&rf, k, r)?;
        let pass = scaled_residual <= tol;
        tally.record(scaled_residual, pass);
        rows.push(FamilyRow {
            r,
            alpha: rf.value(r)?,
            alpha_prime: rf.derivative(1, r)?,
            laplacian: laplacian_radial(&rf, &w, m, k, r)?,
            bilaplacian: bilaplacian_radial(&rf, &w, m, k, r)?,
            sasaki_residual,
            scaled_residual,
            pass,
        });
    }
    write_rows(&rows, g.format, g.out.as_deref())?;
    let class = classify(&rf, &w, m, k, &radii)?;
    Ok(Outcome {
        pass: tally.all_pass(),
        wrote_rows: true,
        summary: vec![
            format!("family: k={k}, case {case}, beta {}, gamma {}, delta {}", params.beta, params.gamma, params.delta),
            classification_line(&class),
            tally.summary("families", started),
        ],
    })
}

#[derive(Serialize)]
struct SweepRow {
    check: &'static str,
    m: Option<usize>,
    k: usize,
    label: String,
    r: f64,
    value: f64,
    alternate: Option<f64>,
    expected: Option<f64>,
    error: f64,
    pass: bool,
}

pub fn sweep(cfg: &RunConfig, g: &Globals) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs a [sweep] table".into()))?;
    cfg.grid.validate()?;
    if spec.k.iter().chain(&spec.m).any(|&d| d == 0) || spec.k.is_empty() {
        return Err(CliError::Config("sweep.m and sweep.k must be nonempty lists of positive integers".into()));
    }
    let tol = tolerances(cfg, g)?.residual;
    let radii = cfg.grid.radii();
    let mut rows = Vec::new();
    let mut tally = Tally::default();
    match spec.check {
        SweepCheck::EquationE => {
            let w = cfg.weights.build()?;
            for &m in &spec.m {
                for &k in &spec.k {
                    for &r in &radii {
                        let e = equation_e_residual(&w, m, k, r)?;
                        let (error, pass) = match spec.expect {
                            Some(x) => {
                                let err = (e.e - x).abs() / (1.0 + x.abs());
                                (err, err <= tol)
                            }
                            None => ((e.e - e.e_prime).abs(), true),
                        };
                        tally.record(error, pass);
                        rows.push(SweepRow {
                            check: "equation_e",
                            m: Some(m),
                            k,
                            label: w.name().to_string(),
                            r,
                            value: e.e,
                            alternate: Some(e.e_prime),
                            expected: spec.expect,
                            error,
                            pass,
                        });
                    }
                }
            }
        }
        SweepCheck::SasakiRadial => {
            for &k in &spec.k {
                for case in FamilyCase::for_rank(k) {
                    let rf = radial_family(&FamilyParams::new(k, case, spec.beta, spec.gamma, spec.delta)?)?;
                    for &r in &radii {
                        let value = sasaki_radial_residual(&rf, k, r)?;
                        let error = value.abs() / sasaki_radial_scale(&rf, k, r)?;
                        let pass = error <= tol;
                        tally.record(error, pass);
                        rows.push(SweepRow {
                            check: "sasaki_radial",
                            m: None,
                            k,
                            label: case.to_string(),
                            r,
                            value,
                            alternate: None,
                            expected: Some(0.0),
                            error,
                            pass,
                        });
                    }
                }
            }
        }
        SweepCheck::Exponents => {
            // Perfect-square rationals keep half-integer powers exact.
            let samples: Vec<Rational> = (1..=cfg.grid.points as i64).map(|i| Rational::new(i * i, 4)).collect();
            for &k in &spec.k {
                for n in exponent_roots(k)?.roots {
                    for &r in &samples {
                        let res = power_residual_exact(k, n, r)
                            .ok_or_else(|| CliError::Core(bihar_core::Error::Numeric(format!("r^{n} at {r} is irrational"))))?;
                        let value = *res.numer() as f64 / *res.denom() as f64;
                        let pass = res == Rational::from_integer(0);
                        tally.record(value.abs(), pass);
                        rows.push(SweepRow {
                            check: "exponents",
                            m: None,
                            k,
                            label: format!("n={n}"),
                            r: *r.numer() as f64 / *r.denom() as f64,
                            value,
                            alternate: None,
                            expected: Some(0.0),
                            error: value.abs(),
                            pass,
                        });
                    }
                }
            }
        }
    }
    write_rows(&rows, g.format, g.out.as_deref())?;
    Ok(Outcome { pass: tally.all_pass(), wrote_rows: true, summary: vec![tally.summary("sweep", started)] })
}

#[derive(Serialize)]
struct RegularityRow {
    profile: String,
    slot: &'static str,
    order: usize,
    max_mismatch: f64,
    skipped: usize,
    right_limit: f64,
    divergent: bool,
    pass: bool,
}

/// Weights from `--preset` or the config; radii from `grid.radii` or a default spread.
pub fn regularity(cfg: Option<&RunConfig>, preset: Option<&str>, g: &Globals) -> Result<Outcome, CliError> {
    let started = Instant::now();
    let profile = match (preset, cfg) {
        (Some(p), _) => WeightProfile::preset(p, None)?,
        (None, Some(c)) => c.weights.build()?,
        (None, None) => return Err(CliError::Config("regularity needs --preset or --config".into())),
    };
    let radii = cfg
        .and_then(|c| c.grid.radii.clone())
        .unwrap_or_else(|| vec![0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0]);
    let tol = match cfg {
        Some(c) => tolerances(c, g)?.regularity,
        None => {
            let mut t = ToleranceSpec::default();
            if let Some(x) = g.tolerance {
                t.override_all(x)?;
            }
            t.regularity
        }
    };
    let report = check_regularity(&profile, &radii)?;
    let mut tally = Tally::default();
    let rows: Vec<RegularityRow> = report
        .checks
        .iter()
        .map(|c| {
            let pass = !c.divergent && c.max_mismatch <= tol;
            tally.record(c.max_mismatch, pass);
            RegularityRow {
                profile: report.profile.clone(),
                slot: c.slot.name(),
                order: c.order,
                max_mismatch: c.max_mismatch,
                skipped: c.skipped,
                right_limit: c.right_limit,
                divergent: c.divergent,
                pass,
            }
        })
        .collect();
    write_rows(&rows, g.format, g.out.as_deref())?;
    let mut summary = Vec::new();
    if report.has_divergent_limit() {
        summary.push("right limit at r = 0 diverges".to_string());
    }
    summary.push(tally.summary("regularity", started));
    Ok(Outcome { pass: tally.all_pass(), wrote_rows: true, summary })
}
