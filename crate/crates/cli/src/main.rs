//! `supersym`: verification suites, spectral-statistics pipelines and
//! conventions dump.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use supersym_core::brownian::{crossover_sweep, CrossoverSpec, InitialCondition};
use supersym_core::ensembles::{
    default_edges, estimate_r1, local_statistics, sample, spacing_distribution, unfold, uniform_edges, UnfoldMethod,
};
use supersym_core::genfun::hs_measure_constant;
use supersym_core::grassmann::default_berezin_norm;
use supersym_core::{run_suite, Beta, EnsembleClass, EnsembleSpec, Fault, Suite, VerifyConfig, SCHEMA_VERSION};

const DEFAULT_SEED: u64 = 42;
const SEED_ENV: &str = "SUPERSYM_SEED";

#[derive(Parser, Debug)]
#[command(name = "supersym", version, about = "Supersymmetry checks for random matrix ensembles")]
struct Cli {
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Sample an ensemble and write spectral statistics.
    Pipeline(PipelineArgs),
    /// Print the conventions in force.
    DumpConventions(DumpArgs),
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict the duality suite to one symmetry class.
    #[arg(long)]
    beta: Option<u8>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// Report path.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: Option<FaultArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FaultArg {
    SdetSign,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum PipelineKind {
    Density,
    Spacing,
    Y2,
    Crossover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    kind: PipelineKind,
    #[arg(long)]
    class: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Number of histogram bins; Freedman-Diaconis when absent.
    #[arg(long)]
    bins: Option<usize>,
    /// Time grid `start:stop:step` for the crossover sweep.
    #[arg(long)]
    t_grid: Option<String>,
    /// Half-width of the uniform diagonal initial condition.
    #[arg(long)]
    initial_width: Option<f64>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

/// Contents of the optional TOML file.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    seed: Option<u64>,
    #[serde(default)]
    verify: FileVerify,
    #[serde(default)]
    pipeline: FilePipeline,
    /// Tolerance overrides keyed by check name.
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileVerify {
    suite: Option<String>,
    beta: Option<u8>,
    n: Option<usize>,
    k: Option<usize>,
    output: Option<PathBuf>,
    algebra_cases: Option<usize>,
    matrix_cases: Option<usize>,
    bundles: Option<usize>,
    mc_samples: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FilePipeline {
    class: Option<String>,
    n: Option<usize>,
    samples: Option<usize>,
    out_dir: Option<PathBuf>,
    format: Option<Format>,
    bins: Option<usize>,
    t_grid: Option<String>,
    initial_width: Option<f64>,
}

/// Fully resolved pipeline settings, echoed into every output.
#[derive(Clone, Debug, Serialize)]
struct PipelineConfig {
    schema_version: u32,
    kind: PipelineKind,
    class: EnsembleClass,
    n: usize,
    samples: usize,
    seed: u64,
    format: Format,
    bins: Option<usize>,
    t_grid: Option<Vec<f64>>,
    initial_width: Option<f64>,
}

enum Failure {
    Usage(String),
    Numeric(String),
}

impl From<supersym_core::Error> for Failure {
    fn from(e: supersym_core::Error) -> Self {
        match e {
            supersym_core::Error::Config(_) | supersym_core::Error::Parse(_) | supersym_core::Error::Resource(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Numeric(format!("i/o: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(m)) => {
            eprintln!("numeric failure: {m}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Verify(a) => verify(a, &file),
        Command::Pipeline(a) => pipeline(a, &file),
        Command::DumpConventions(a) => {
            dump_conventions(a.format);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn load_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn resolve_seed(flag: Option<u64>, file: &FileConfig) -> Result<u64, Failure> {
    if let Some(s) = flag.or(file.seed) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Failure::Usage(format!("{SEED_ENV}={v} is not an integer"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn verify(a: VerifyArgs, file: &FileConfig) -> Result<ExitCode, Failure> {
    let fv = &file.verify;
    let suite_name = a.suite.or(fv.suite.clone()).unwrap_or_else(|| "all".into());
    let suite = Suite::parse(&suite_name)?;
    let beta = match a.beta.or(fv.beta) {
        Some(b) => Some(Beta::try_from(b)?),
        None => None,
    };
    let d = VerifyConfig::default();
    let cfg = VerifyConfig {
        seed: resolve_seed(a.seed, file)?,
        algebra_cases: fv.algebra_cases.unwrap_or(d.algebra_cases),
        matrix_cases: fv.matrix_cases.unwrap_or(d.matrix_cases),
        bundles: fv.bundles.unwrap_or(d.bundles),
        beta,
        n: a.n.or(fv.n),
        k: a.k.or(fv.k),
        mc_samples: fv.mc_samples.unwrap_or(d.mc_samples),
        cft_seeds: d.cft_seeds,
        fault: a.inject_fault.map(|FaultArg::SdetSign| Fault::SdetSign),
    };
    let mut report = run_suite(suite, &cfg)?;
    for c in report.checks.iter_mut() {
        if let Some(&t) = file.tolerances.get(&c.name) {
            c.tolerance = t;
            c.passed = c.max_deviation <= t;
        }
    }
    for c in &report.checks {
        println!("{}", c.line());
    }
    let out = a.output.or(fv.output.clone()).unwrap_or_else(|| PathBuf::from(format!("verify-{}.json", suite.name())));
    write_file(&out, &(serde_json::to_string_pretty(&report).expect("json") + "\n"))?;
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        let names: Vec<&str> = report.failures().map(|c| c.name.as_str()).collect();
        eprintln!("failing checks: {}", names.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse_grid(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::Usage(format!("time grid {s:?} is not start:stop:step"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [a, b, h] = parts[..] else { return Err(bad()) };
    if !(h > 0.0) || b < a || a < 0.0 {
        return Err(bad());
    }
    let steps = ((b - a) / h + 1e-9).floor() as usize;
    // rounded to the step's decimal resolution so grid values print cleanly
    Ok((0..=steps).map(|i| ((a + i as f64 * h) * 1e12).round() / 1e12).collect())
}

fn pipeline(a: PipelineArgs, file: &FileConfig) -> Result<ExitCode, Failure> {
    let fp = &file.pipeline;
    let class = EnsembleClass::parse(&a.class.or(fp.class.clone()).unwrap_or_else(|| "gue".into()))?;
    let t_grid = match a.t_grid.or(fp.t_grid.clone()) {
        Some(g) => Some(parse_grid(&g)?),
        None if a.kind == PipelineKind::Crossover => Some(parse_grid("0:2:0.1")?),
        None => None,
    };
    let crossover = a.kind == PipelineKind::Crossover;
    let cfg = PipelineConfig {
        schema_version: SCHEMA_VERSION,
        kind: a.kind,
        class,
        n: a.n.or(fp.n).unwrap_or(if crossover { 40 } else { 100 }),
        samples: a.samples.or(fp.samples).unwrap_or(if crossover { 200 } else { 1000 }),
        seed: resolve_seed(a.seed, file)?,
        format: a.format.or(fp.format).unwrap_or(Format::Csv),
        bins: a.bins.or(fp.bins),
        t_grid: if crossover { t_grid } else { None },
        initial_width: if crossover { Some(a.initial_width.or(fp.initial_width).unwrap_or(1.0)) } else { None },
    };
    let out_dir = a.out_dir.or(fp.out_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    let config = serde_json::to_value(&cfg).expect("json");
    let spec = EnsembleSpec::new(cfg.class, cfg.n, cfg.seed, cfg.samples);
    spec.validate()?;

    let (name, table, metadata) = match cfg.kind {
        PipelineKind::Density => {
            let batch = sample(&spec)?;
            let edges = match cfg.bins {
                Some(b) => {
                    let r = spec.radius() * 1.1;
                    uniform_edges(-r, r, b)
                }
                None => default_edges(&batch),
            };
            let est = estimate_r1(&batch, &edges)?;
            (
                "density",
                table_rows(&est.centers(), &est.values, &est.stderr),
                serde_json::json!({ "estimator": est.metadata, "low_statistics": est.low_statistics, "spec_digest": spec.digest() }),
            )
        }
        PipelineKind::Spacing | PipelineKind::Y2 => {
            let batch = sample(&spec)?;
            let method = if class.is_circular() { UnfoldMethod::CircleUniform } else { UnfoldMethod::default() };
            let (unfolded, _) = unfold(&batch, &method)?;
            let bins = cfg.bins.unwrap_or(if cfg.kind == PipelineKind::Y2 { 30 } else { 40 });
            let est = if cfg.kind == PipelineKind::Y2 {
                local_statistics(&unfolded, &uniform_edges(0.0, 3.0, bins))?
            } else {
                spacing_distribution(&unfolded, &uniform_edges(0.0, 4.0, bins))
            };
            let name = if cfg.kind == PipelineKind::Y2 { "y2" } else { "spacing" };
            (
                name,
                table_rows(&est.centers(), &est.values, &est.stderr),
                serde_json::json!({
                    "unfolding": method,
                    "estimator": est.metadata,
                    "low_statistics": est.low_statistics,
                    "spec_digest": spec.digest(),
                }),
            )
        }
        PipelineKind::Crossover => {
            let base = CrossoverSpec {
                initial: InitialCondition::Poisson { width: cfg.initial_width.unwrap_or(1.0) },
                class,
                n: cfg.n,
                t: 0.0,
                seed: cfg.seed,
                samples: cfg.samples,
            };
            let times = cfg.t_grid.clone().unwrap_or_default();
            let points = crossover_sweep(&base, &times)?;
            let mut rows = String::from("t,tau,ratio,stderr\n");
            for p in &points {
                rows.push_str(&format!("{:.10e},{:.10e},{:.10e},{:.10e}\n", p.t, p.tau, p.ratio, p.ratio_stderr));
            }
            ("crossover", rows, serde_json::json!({ "statistic": "mean spacing ratio", "points": points.len() }))
        }
    };

    let header = format!("# config: {}\n", serde_json::to_string(&config).expect("json"));
    let meta = serde_json::json!({ "schema_version": SCHEMA_VERSION, "config": config, "metadata": metadata });
    match cfg.format {
        Format::Csv => {
            write_file(&out_dir.join(format!("{name}.csv")), &(header + &table))?;
            write_file(&out_dir.join(format!("{name}.json")), &(serde_json::to_string_pretty(&meta).expect("json") + "\n"))?;
        }
        Format::Json => {
            let mut doc = meta;
            doc["table"] = csv_to_json(&table);
            write_file(&out_dir.join(format!("{name}.json")), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
        }
    }
    if let Some(true) = metadata.get("low_statistics").and_then(|v| v.as_bool()) {
        eprintln!("warning: low statistics in {name}");
    }
    println!("wrote {name} to {}", out_dir.display());
    Ok(ExitCode::SUCCESS)
}

fn table_rows(x: &[f64], v: &[f64], e: &[f64]) -> String {
    let mut s = String::from("x,value,stderr\n");
    for i in 0..x.len() {
        s.push_str(&format!("{:.10e},{:.10e},{:.10e}\n", x[i], v[i], e[i]));
    }
    s
}

fn csv_to_json(table: &str) -> serde_json::Value {
    let mut lines = table.lines();
    let cols: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let mut out = serde_json::Map::new();
    for c in &cols {
        out.insert((*c).into(), serde_json::Value::Array(Vec::new()));
    }
    for line in lines {
        for (c, v) in cols.iter().zip(line.split(',')) {
            let x: f64 = v.parse().unwrap_or(f64::NAN);
            if let Some(serde_json::Value::Array(a)) = out.get_mut(*c) {
                a.push(serde_json::json!(x));
            }
        }
    }
    serde_json::Value::Object(out)
}

fn dump_conventions(format: Format) {
    let norm = default_berezin_norm::<supersym_core::Complex64>().re;
    let kappa = hs_measure_constant();
    let entries: Vec<(&str, String)> = vec![
        ("berezin_normalization", format!("{norm:.17} (1/sqrt(2 pi) per generator)")),
        ("berezin_order", "integral d g_1 d g_2 ...: the differential next to the integrand is taken first".into()),
        ("conjugation", "minus-sign: (z*)* = -z, (z1 z2)* = z1* z2*".into()),
        ("supertranspose", "nu-minus: [[a, mu], [nu, b]]^T = [[a^T, -nu^T], [mu^T, b^T]]".into()),
        ("adjoint", "mu-minus supertranspose followed by minus-sign conjugation".into()),
        ("ensemble_weight", "P(H) ~ exp(-beta tr H^2 / 2); gamma = 1 for beta 1, 2 and gamma = 2 for beta 4; semicircle radius sqrt(2N / gamma)".into()),
        ("ensemble_variances", "GOE diag 1 offdiag 1/2; GUE diag 1/2 offdiag re/im 1/4; GSE diag 1/8 offdiag components 1/16".into()),
        ("quaternion_layout", "2N x 2N complex blocks [[A, B], [-B*, A*]]".into()),
        ("hs_measure_constant", format!("{:.15} {:+.15}i", kappa.re, kappa.im)),
    ];
    match format {
        Format::Csv => {
            for (k, v) in entries {
                println!("{k}: {v}");
            }
        }
        Format::Json => {
            let m: serde_json::Map<String, serde_json::Value> = entries.into_iter().map(|(k, v)| (k.to_string(), v.into())).collect();
            println!("{}", serde_json::to_string_pretty(&m).expect("json"));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid("0:1:0.25").ok().unwrap(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(parse_grid("0:2:0.1").ok().unwrap().len(), 21);
        assert!(parse_grid("1:0:0.1").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("0:1:0").is_err());
    }
}
