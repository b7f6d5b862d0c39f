//! Acceptance criteria, one PASS/FAIL line each.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use supersym_core::brownian::{crossover_sweep, CrossoverSpec, InitialCondition};
use supersym_core::ensembles::{
    bin_average, default_edges, estimate_r1, ks_two_sample, local_statistics, sample, spacings, unfold, uniform_edges,
    CorrelationEstimate, UnfoldMethod,
};
use supersym_core::genfun::{ingham_siegel_fit, pastur_saddle};
use supersym_core::quadrature::gauss_legendre;
use supersym_core::{run_suite, CheckResult, EnsembleClass, EnsembleSpec, Suite, SuiteReport, VerifyConfig};

struct Outcome {
    passed: bool,
    summary: String,
    elapsed: Duration,
    budget: Duration,
}

impl Outcome {
    fn ok(&self) -> bool {
        self.passed && self.elapsed <= self.budget
    }
}

fn timed(budget_s: u64, f: impl FnOnce() -> (bool, String)) -> Outcome {
    let t = Instant::now();
    let (passed, summary) = f();
    Outcome { passed, summary, elapsed: t.elapsed(), budget: Duration::from_secs(budget_s) }
}

fn select(report: &SuiteReport, pred: impl Fn(&str) -> bool) -> Vec<&CheckResult> {
    report.checks.iter().filter(|c| pred(&c.name)).collect()
}

fn summarize(checks: &[&CheckResult]) -> (bool, String) {
    let worst = checks.iter().map(|c| c.max_deviation).fold(0.0f64, f64::max);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    let passed = !checks.is_empty() && failed.is_empty();
    let mut s = format!("{} checks, worst deviation {worst:.2e}", checks.len());
    if !failed.is_empty() {
        s.push_str(&format!(", failing: {}", failed.join(", ")));
    }
    (passed, s)
}

const SUPERMATRIX: [&str; 6] =
    ["str-cyclicity", "sdet-multiplicativity", "sdet-two-forms", "dagger-involution", "sdet-exp-str", "scalar-product-reality"];

/// Bins whose centres lie in the central 80% of the support.
fn central_bins(est: &CorrelationEstimate, radius: f64) -> Vec<usize> {
    est.centers().iter().enumerate().filter(|(_, c)| c.abs() < 0.8 * radius).map(|(i, _)| i).collect()
}

fn fraction_within(est: &CorrelationEstimate, bins: &[usize], reference: impl Fn(f64) -> f64) -> f64 {
    let ok = bins
        .iter()
        .filter(|&&i| {
            let r = bin_average(&reference, est.edges[i], est.edges[i + 1]);
            (est.values[i] - r).abs() <= 3.0 * est.stderr[i]
        })
        .count();
    ok as f64 / bins.len() as f64
}

/// Least-squares fit of `rho^2 = A - B x^2` over the central bins; the
/// support edge is `sqrt(A / B)`.
fn fitted_edge(est: &CorrelationEstimate, bins: &[usize]) -> f64 {
    let c = est.centers();
    let xs: Vec<f64> = bins.iter().map(|&i| c[i] * c[i]).collect();
    let ys: Vec<f64> = bins.iter().map(|&i| est.values[i] * est.values[i]).collect();
    let (slope, intercept) = linear_fit(&xs, &ys);
    (intercept / -slope).sqrt()
}

fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// `Y_2` of the sine kernel from `sin(pi xi) / (pi xi) = ∫_0^1 cos(pi xi u) du`.
fn sine_kernel_oracle(xi: f64) -> f64 {
    let rule = gauss_legendre(40).mapped(0.0, 1.0);
    let k: f64 = rule.iter().map(|(u, w)| w * (PI * xi * u).cos()).sum();
    k * k
}

fn criterion_7() -> (bool, String) {
    let spec = EnsembleSpec::new(EnsembleClass::Gue, 50, 7, 10_000);
    let batch = sample(&spec).unwrap();
    let est = estimate_r1(&batch, &default_edges(&batch)).unwrap();
    let radius = spec.radius();
    let gamma = spec.beta().gamma();
    let bins = central_bins(&est, radius);
    let im_s0 = |x: f64| pastur_saddle(x, 50, gamma).0.im.abs();
    // amplitude fixed by ∫R1 = N
    let frac = fraction_within(&est, &bins, |x| 2.0 / PI * im_s0(x));
    let literal = fraction_within(&est, &bins, |x| im_s0(x) / PI);
    let edge = fitted_edge(&est, &bins);
    let width = est.width(est.values.len() / 2);
    let (integral, ierr) = est.integral();
    let passed = frac >= 0.95 && (edge - radius).abs() <= width;
    (
        passed,
        format!(
            "{:.1}% of {} central bins within 3 sigma of (2/pi) Im s0 (prefactor 1/pi: {:.1}%), edge {edge:.3} vs {radius:.3} (bin {width:.3}), integral {integral:.2} +- {ierr:.2}",
            100.0 * frac,
            bins.len(),
            100.0 * literal
        ),
    )
}

fn criterion_8() -> (bool, String) {
    let gue = sample(&EnsembleSpec::new(EnsembleClass::Gue, 100, 8, 5000)).unwrap();
    let (unfolded, _) = unfold(&gue, &UnfoldMethod::default()).unwrap();
    let y2 = local_statistics(&unfolded, &uniform_edges(0.0, 3.0, 30)).unwrap();
    let centers = y2.centers();
    let mut outside = Vec::new();
    for i in 0..y2.values.len() {
        if y2.edges[i] < 0.1 - 1e-12 {
            continue;
        }
        let r = bin_average(sine_kernel_oracle, y2.edges[i], y2.edges[i + 1]);
        if (y2.values[i] - r).abs() > 3.0 * y2.stderr[i] {
            outside.push(format!("{:.2}", centers[i]));
        }
    }
    let small: Vec<usize> = (0..y2.values.len()).filter(|&i| centers[i] < 0.5).collect();
    let xs: Vec<f64> = small.iter().map(|&i| centers[i] * centers[i]).collect();
    let ys: Vec<f64> = small.iter().map(|&i| y2.values[i]).collect();
    let (_, y0) = linear_fit(&xs, &ys);

    let cue = sample(&EnsembleSpec::new(EnsembleClass::Cue, 100, 9, 600)).unwrap();
    let (cu, _) = unfold(&cue, &UnfoldMethod::CircleUniform).unwrap();
    let ks = ks_two_sample(&spacings(&cu), &spacings(&unfolded));

    let passed = outside.is_empty() && ks <= 0.02 && (y0 - 1.0).abs() <= 0.05;
    let mut s = format!("Y2 bins beyond 3 sigma: {}, KS {ks:.4}, Y2(0) {y0:.4}", outside.len());
    if !outside.is_empty() {
        s.push_str(&format!(" at {}", outside.join(" ")));
    }
    (passed, s)
}

fn criterion_11() -> (bool, String) {
    let mut worst = 0.0f64;
    let mut passed = true;
    for n in [1, 2] {
        for m in [0, 1] {
            let r = ingham_siegel_fit(n, m, 1e-6).unwrap();
            worst = worst.max(r.exponent_error);
            passed &= r.passed;
        }
    }
    (passed, format!("worst exponent error {worst:.2e}"))
}

fn criterion_12() -> (bool, String) {
    let spec = EnsembleSpec::new(EnsembleClass::Gue, 20, 12, 200);
    let edges = uniform_edges(-7.0, 7.0, 28);
    let config = serde_json::to_value(&spec).unwrap();
    let csv = || estimate_r1(&sample(&spec).unwrap(), &edges).unwrap().to_csv(&config);
    let cue = EnsembleSpec::new(EnsembleClass::Cue, 20, 12, 100);
    let y2 = || {
        let (u, _) = unfold(&sample(&cue).unwrap(), &UnfoldMethod::CircleUniform).unwrap();
        local_statistics(&u, &uniform_edges(0.0, 3.0, 30)).unwrap().to_csv(&config)
    };
    let base = CrossoverSpec {
        initial: InitialCondition::Poisson { width: 1.0 },
        class: EnsembleClass::Gue,
        n: 10,
        t: 0.0,
        seed: 12,
        samples: 50,
    };
    let sweep = || serde_json::to_string(&crossover_sweep(&base, &[0.0, 0.5, 1.0]).unwrap()).unwrap();
    let cfg = VerifyConfig { algebra_cases: 50, matrix_cases: 20, ..VerifyConfig::default() };
    let report = || serde_json::to_string(&run_suite(Suite::Algebra, &cfg).unwrap()).unwrap();
    let same = [csv() == csv(), y2() == y2(), sweep() == sweep(), report() == report()];
    let passed = same.iter().all(|&b| b);
    (passed, format!("{} of {} rerun outputs byte-identical", same.iter().filter(|&&b| b).count(), same.len()))
}

fn main() -> ExitCode {
    let cfg = VerifyConfig::default();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();

    let t = Instant::now();
    let algebra = run_suite(Suite::Algebra, &cfg).unwrap();
    let algebra_time = t.elapsed();
    let core = select(&algebra, |n| !SUPERMATRIX.contains(&n));
    let sm = select(&algebra, |n| SUPERMATRIX.contains(&n));
    let (p, s) = summarize(&core);
    results.push((1, "algebra", Outcome { passed: p, summary: s, elapsed: algebra_time, budget: Duration::from_secs(10) }));
    let (p, s) = summarize(&sm);
    results.push((2, "supermatrix", Outcome { passed: p, summary: s, elapsed: algebra_time, budget: Duration::from_secs(30) }));

    results.push((3, "duality", timed(120, || summarize(&select(&run_suite(Suite::Duality, &cfg).unwrap(), |_| true)))));

    let t = Instant::now();
    let genfun = run_suite(Suite::Genfun, &cfg).unwrap();
    let genfun_time = t.elapsed();
    for (id, label, budget, names) in [
        (4, "keystone", 60, &["keystone-exact", "keystone-float"][..]),
        (5, "hubbard-stratonovich", 60, &["hubbard-stratonovich", "hubbard-stratonovich-convergence"][..]),
        (6, "normalization", 120, &["z-super-normalization", "zk-direct-normalization"][..]),
    ] {
        let checks = select(&genfun, |n| names.iter().any(|p| n == *p || n.starts_with(&format!("{p} "))));
        let (p, s) = summarize(&checks);
        results.push((id, label, Outcome { passed: p, summary: s, elapsed: genfun_time, budget: Duration::from_secs(budget) }));
    }

    results.push((7, "one-point function", timed(60, criterion_7)));
    results.push((8, "two-point function", timed(300, criterion_8)));
    results.push((9, "superspace diffusion", timed(300, || summarize(&select(&run_suite(Suite::Brownian, &cfg).unwrap(), |_| true)))));
    results.push((10, "color-flavor", timed(120, || summarize(&select(&run_suite(Suite::Colorflavor, &cfg).unwrap(), |_| true)))));
    results.push((11, "ingham-siegel", timed(10, criterion_11)));
    results.push((12, "determinism", timed(60, criterion_12)));

    results.sort_by_key(|r| r.0);
    let mut all = true;
    for (id, label, o) in &results {
        all &= o.ok();
        let verdict = if o.ok() { "PASS" } else { "FAIL" };
        println!("{verdict} criterion {id:>2} {label}: {} [{:.1}s, budget {}s]", o.summary, o.elapsed.as_secs_f64(), o.budget.as_secs());
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
