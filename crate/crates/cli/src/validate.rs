//! Self-check battery run by `probesched validate`.

use std::time::{Duration, Instant};

use probesched::analytic::{self, AnalyticParams, InterferenceDistribution};
use probesched::geometry::SimWindow;
use probesched::montecarlo::{estimate_capacity, SimPlan};
use probesched::quad::{adaptive, Tolerance};
use probesched::scheduling::{run_reference, run_sir_threshold, SchemeConfig};

use crate::experiment::probing_schedule;

#[derive(Debug, Clone)]
pub struct ValidateOptions {
    pub realizations: usize,
    pub seed: u64,
    /// Replaces ρ in the closed-form reference success probability. Only
    /// useful to confirm that the battery catches a wrong constant.
    pub rho_override: Option<f64>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            realizations: 300,
            seed: crate::settings::DEFAULT_SEED,
            rho_override: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub runtime: Duration,
}

#[derive(Debug, Clone)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_names(&self) -> Vec<&'static str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&format!(
                "{} {:<34} {:>9.1} ms  {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.runtime.as_secs_f64() * 1e3,
                c.detail
            ));
        }
        let failed = self.failed_names();
        if failed.is_empty() {
            s.push_str(&format!("all {} checks passed\n", self.checks.len()));
        } else {
            s.push_str(&format!("{} of {} checks failed: {}\n", failed.len(), self.checks.len(), failed.join(", ")));
        }
        s
    }
}

type Check = Box<dyn Fn(&ValidateOptions) -> Result<String, String>>;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, detail: String) -> Result<String, String> {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rho_used(opts: &ValidateOptions, alpha: f64) -> Result<f64, String> {
    match opts.rho_override {
        Some(r) => Ok(r),
        None => analytic::rho(alpha).map_err(|e| e.to_string()),
    }
}

fn defaults() -> AnalyticParams {
    AnalyticParams::defaults()
}

fn check_rho(_: &ValidateOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for alpha in [2.5, 3.0, 4.0, 5.0, 6.0] {
        let q = analytic::rho_by_quadrature(alpha).map_err(|e| e.to_string())?;
        let c = analytic::rho(alpha).map_err(|e| e.to_string())?;
        worst = worst.max(rel(q, c));
    }
    ensure(worst < 1e-8, format!("max relative gap {worst:.2e}"))
}

fn check_pdf_mass(_: &ValidateOptions) -> Result<String, String> {
    let dist = InterferenceDistribution::new(0.0025, 4.0).map_err(|e| e.to_string())?;
    let mass = adaptive(
        |t| {
            if t <= 0.0 {
                0.0
            } else {
                dist.density_at(1.0 / (t * t)).unwrap_or(f64::NAN) * 2.0 / (t * t * t)
            }
        },
        0.0,
        1e4,
        Tolerance::new(1e-12, 1e-12),
    )
    .map_err(|e| e.to_string())?
    .value;
    ensure((mass - 1.0).abs() < 1e-6, format!("total mass {mass:.9}"))
}

fn check_cdf_vs_pdf(_: &ValidateOptions) -> Result<String, String> {
    let dist = InterferenceDistribution::new(0.0025, 4.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for x in [1e-5, 1e-4, 1e-3, 1e-2] {
        let num = adaptive(
            |t| dist.density_at(t.max(1e-300)).unwrap_or(f64::NAN),
            0.0,
            x,
            Tolerance::new(1e-13, 1e-11),
        )
        .map_err(|e| e.to_string())?
        .value;
        worst = worst.max((num - dist.cdf_at(x).map_err(|e| e.to_string())?).abs());
    }
    ensure(worst < 1e-6, format!("max abs gap {worst:.2e}"))
}

fn check_reference_identity(opts: &ValidateOptions) -> Result<String, String> {
    let mut worst = 0.0f64;
    for (lambda0, beta, d) in [(0.001, 2.5, 10.0), (0.0025, 1.0, 8.0), (0.004, 4.0, 5.0)] {
        let p = AnalyticParams::new(lambda0, d, 4.0, beta).map_err(|e| e.to_string())?;
        let dist = InterferenceDistribution::new(lambda0, 4.0).map_err(|e| e.to_string())?;
        let s = beta * d.powi(4);
        let via_cdf = adaptive(
            |y| {
                if y <= 0.0 {
                    0.0
                } else {
                    (-y).exp() * dist.cdf_at(y / s).unwrap_or(f64::NAN)
                }
            },
            0.0,
            60.0,
            Tolerance::new(1e-14, 1e-12),
        )
        .map_err(|e| e.to_string())?
        .value;
        let closed = analytic::reference_success_prob_with_rho(&p, rho_used(opts, 4.0)?);
        worst = worst.max(rel(closed, via_cdf));
    }
    ensure(worst < 1e-6, format!("max relative gap {worst:.2e}"))
}

fn check_series(_: &ValidateOptions) -> Result<String, String> {
    let levy = InterferenceDistribution::new(0.001, 4.0).map_err(|e| e.to_string())?;
    let series = InterferenceDistribution::series_only(0.001, 4.0).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for x in [5e-4, 1e-3, 1e-2, 1.0] {
        let a = levy.density_at(x).map_err(|e| e.to_string())?;
        let b = series.density_at(x).map_err(|e| e.to_string())?;
        worst = worst.max(rel(b, a));
    }
    ensure(worst < 1e-8, format!("max relative gap {worst:.2e}"))
}

fn check_reference_mc(opts: &ValidateOptions) -> Result<String, String> {
    let p = defaults();
    let plan = SimPlan::new(
        p.clone(),
        SchemeConfig::reference(p.beta()).map_err(|e| e.to_string())?,
        SimWindow::default(),
        opts.realizations,
        opts.seed,
    )
    .map_err(|e| e.to_string())?;
    let est = estimate_capacity(&plan).map_err(|e| e.to_string())?;
    let exact = p.lambda0() * analytic::reference_success_prob_with_rho(&p, rho_used(opts, 4.0)?);
    let z = (est.mean - exact) / est.std_error;
    ensure(
        z.abs() < 3.0,
        format!("MC {:.4e} ± {:.1e} vs closed form {exact:.4e} (z = {z:.2})", est.mean, est.std_error),
    )
}

fn subset(a: &[bool], b: &[bool]) -> bool {
    a.iter().zip(b).all(|(&x, &y)| !x || y)
}

fn check_regimes(opts: &ValidateOptions) -> Result<String, String> {
    let p = defaults();
    let reference = SchemeConfig::reference(2.5).map_err(|e| e.to_string())?;
    let plan = SimPlan::new(p, reference.clone(), SimWindow::default(), 1, opts.seed).map_err(|e| e.to_string())?;
    let n = 50;
    for r in 0..n {
        let real = plan.realization(r).map_err(|e| e.to_string())?;
        let v = real.view();
        let base = run_reference(&v, &reference).map_err(|e| e.to_string())?.success;
        for (gamma, relation) in [(0.0, "equal"), (0.6, "superset"), (2.5, "equal"), (4.0, "subset")] {
            let cfg = SchemeConfig::sir_threshold(vec![gamma], 2.5).map_err(|e| e.to_string())?;
            let got = run_sir_threshold(&v, &cfg, &mut plan.streams(r).decisions())
                .map_err(|e| e.to_string())?
                .success;
            let ok = match relation {
                "equal" => got == base,
                "superset" => subset(&base, &got),
                _ => subset(&got, &base),
            };
            if !ok {
                return Err(format!("realization {r}: gamma1 = {gamma} breaks the {relation} relation"));
            }
        }
    }
    Ok(format!("{n} realizations, gamma1 in {{0, 0.6, 2.5, 4}}"))
}

fn check_stages(opts: &ValidateOptions) -> Result<String, String> {
    let p = defaults().with_beta(2.0).map_err(|e| e.to_string())?;
    let base = SchemeConfig::reference(2.0).map_err(|e| e.to_string())?;
    let plan = SimPlan::new(p, base, SimWindow::default(), 1, opts.seed).map_err(|e| e.to_string())?;
    let n = 10;
    for r in 0..n {
        let real = plan.realization(r).map_err(|e| e.to_string())?;
        let v = real.view();
        let mut prev: Option<Vec<bool>> = None;
        for stages in 1..=19 {
            let cfg = SchemeConfig::sir_threshold(probing_schedule(stages), 2.0).map_err(|e| e.to_string())?;
            let s = run_sir_threshold(&v, &cfg, &mut plan.streams(r).decisions())
                .map_err(|e| e.to_string())?
                .success;
            if let Some(p) = &prev {
                if !subset(p, &s) {
                    return Err(format!("realization {r}: {stages} stages lose a success"));
                }
            }
            prev = Some(s);
        }
    }
    Ok(format!("{n} realizations, N = 1..19"))
}

fn check_determinism(opts: &ValidateOptions) -> Result<String, String> {
    let p = defaults();
    let plan = SimPlan::new(
        p,
        SchemeConfig::sir_threshold(vec![0.6], 2.5).map_err(|e| e.to_string())?,
        SimWindow::default(),
        20,
        opts.seed,
    )
    .map_err(|e| e.to_string())?;
    let a = estimate_capacity(&plan).map_err(|e| e.to_string())?;
    let b = estimate_capacity(&plan).map_err(|e| e.to_string())?;
    ensure(a == b, "two runs of one plan".to_string())
}

fn check_approx_order(_: &ValidateOptions) -> Result<String, String> {
    let mut count = 0;
    for lambda0 in [0.001, 0.0025, 0.005] {
        let p = defaults().with_lambda0(lambda0).map_err(|e| e.to_string())?;
        for k in 1..50 {
            let g = 0.05 * k as f64;
            let cf = analytic::closedform_capacity_approx(&p, g).map_err(|e| e.to_string())?;
            let cv = analytic::conventional_capacity_approx(&p, g).map_err(|e| e.to_string())?;
            if cf <= cv {
                return Err(format!("lambda0 = {lambda0}, gamma1 = {g}: {cf:e} <= {cv:e}"));
            }
            count += 1;
        }
    }
    Ok(format!("{count} grid points"))
}

/// Runs every check and collects verdicts with timings.
pub fn validate_suite(opts: &ValidateOptions) -> Report {
    let checks: Vec<(&'static str, Check)> = vec![
        ("rho-closed-form-vs-quadrature", Box::new(check_rho)),
        ("levy-pdf-normalization", Box::new(check_pdf_mass)),
        ("levy-cdf-vs-pdf-integral", Box::new(check_cdf_vs_pdf)),
        ("reference-success-oracle", Box::new(check_reference_identity)),
        ("series-vs-levy-pdf", Box::new(check_series)),
        ("reference-mc-vs-closed-form", Box::new(check_reference_mc)),
        ("regime-inclusions", Box::new(check_regimes)),
        ("multi-stage-monotonicity", Box::new(check_stages)),
        ("determinism", Box::new(check_determinism)),
        ("closedform-dominates-conventional", Box::new(check_approx_order)),
    ];
    let checks = checks
        .into_iter()
        .map(|(name, f)| {
            let t = Instant::now();
            let outcome = f(opts);
            let runtime = t.elapsed();
            let (passed, detail) = match outcome {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
                runtime,
            }
        })
        .collect();
    Report { checks }
}

