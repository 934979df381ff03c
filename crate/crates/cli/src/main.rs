//! `susyj`: run verification suites on built-in or JSON-specified models.

mod config;
mod report;
mod suites;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use susyj::models::MODEL_NAMES;
use susyj::operators::sample;
use susyj::ComplexScalar;

use config::{parse_axis, parse_grid, parse_tolerance, ParamValue, RunConfig, Suite};
use report::{ModelInfo, Provenance, Report, SweepReport, SweepRow, CHECK_HEADER};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("model error: {0}")]
    Model(#[from] susyj::Error),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Model(_) => 2,
            CliError::Config(_) => 3,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "susyj", version, about = "Verify Darboux-Crum partner models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites and write a report.
    Verify(RunArgs),
    /// Dump the partner potential and the ker q⁺ basis on a grid.
    Grid(RunArgs),
    /// Repeat `verify` over a list of values of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// `name=v1,v2,...`; any model parameter, or `eps` for the regulator.
        #[arg(long, value_parser = parse_axis)]
        axis: (String, Vec<ParamValue>),
    },
    /// List the built-in models and their parameters.
    ListModels,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// JSON run configuration; flags given on the command line win.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = MODEL_NAMES)]
    model: Option<String>,
    #[arg(long, value_delimiter = ',')]
    suites: Vec<Suite>,
    /// `name=value`, repeatable.
    #[arg(long, value_parser = parse_tolerance)]
    tol: Vec<(String, f64)>,
    /// `x_min:x_max:n`
    #[arg(long, value_parser = parse_grid, allow_hyphen_values = true)]
    grid: Option<susyj::operators::GridSpec>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long, value_parser = ParamValue::parse, allow_hyphen_values = true)]
    alpha: Option<ParamValue>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    /// Complex literal `a+bi`.
    #[arg(long, value_parser = ParamValue::parse, allow_hyphen_values = true)]
    z: Option<ParamValue>,
    #[arg(long)]
    n: Option<u32>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(p) => config::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.model {
            if c.model.as_deref() != Some(m) {
                c.params.clear();
            }
            c.model = Some(m.clone());
        }
        if !self.suites.is_empty() {
            c.suites = self.suites.clone();
        }
        for (k, v) in &self.tol {
            c.tolerances.insert(k.clone(), *v);
        }
        if self.grid.is_some() {
            c.grid = self.grid;
        }
        let flags = [
            ("alpha", self.alpha),
            ("beta", self.beta.map(ParamValue::Real)),
            ("x0", self.x0.map(ParamValue::Real)),
            ("z", self.z),
            ("n", self.n.map(|n| ParamValue::Real(n as f64))),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                c.params.insert(k.to_string(), v);
            }
        }
        Ok(c)
    }
}

fn build_report(c: &RunConfig) -> Result<Report, CliError> {
    let tolerances = c.tolerances()?;
    let params = c.resolved_params()?;
    let bundle = c.build()?;
    let ctx = suites::Context {
        grid: bundle.grid,
        quad: c.quadrature.unwrap_or_default(),
        tol: tolerances.clone(),
        roi: c.roi.clone(),
        k_values: c.k_values.clone().unwrap_or_else(|| vec![0.7, 1.3]),
    };
    // suites run one after another so the report order is fixed
    let results: BTreeMap<String, report::SuiteResult> = c
        .suites()
        .into_iter()
        .map(|s| (s.name().to_string(), suites::run(s, &bundle, &ctx)))
        .collect();
    Ok(Report {
        passed: Report::verdict(&results),
        model: ModelInfo {
            name: bundle.name.clone(),
            params,
            notes: bundle.notes.clone(),
        },
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            grid: bundle.grid,
            quadrature: ctx.quad,
            tolerances,
            seed: None,
        },
        suites: results,
    })
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, CliError> {
    match out {
        Some(p) => std::fs::File::create(p)
            .map(|f| Box::new(std::io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => Ok(Box::new(std::io::stdout().lock())),
    }
}

fn io_err(path: &Option<PathBuf>) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| {
        let name = path.as_deref().unwrap_or(Path::new("stdout"));
        CliError::Config(format!("cannot write {}: {e}", name.display()))
    }
}

fn write_json<T: serde::Serialize>(value: &T, out: &Option<PathBuf>) -> Result<(), CliError> {
    let mut w = sink(out)?;
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(w, "{text}").and_then(|_| w.flush()).map_err(io_err(out))
}

fn write_csv(header: &[String], rows: &[Vec<String>], out: &Option<PathBuf>) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(sink(out)?);
    let res = (|| {
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok::<_, csv::Error>(())
    })();
    res.map_err(|e| CliError::Config(format!("csv output failed: {e}")))
}

fn verify(args: &RunArgs) -> Result<bool, CliError> {
    let c = args.config()?;
    let report = build_report(&c)?;
    match args.format.unwrap_or(Format::Json) {
        Format::Json => write_json(&report, &args.out)?,
        Format::Csv => {
            let header: Vec<String> = CHECK_HEADER.iter().map(|s| s.to_string()).collect();
            let rows: Vec<Vec<String>> = report.csv_rows().into_iter().map(Vec::from).collect();
            write_csv(&header, &rows, &args.out)?;
        }
    }
    Ok(report.passed)
}

fn grid(args: &RunArgs) -> Result<bool, CliError> {
    let c = args.config()?;
    let b = c.build()?;
    let xs = b.grid.points();
    let mut columns = vec![("V2".to_string(), sample(&b.h_minus.potential, &xs)?)];
    for (i, e) in b.kernel_plus.entries.iter().enumerate() {
        columns.push((format!("phi{i}_plus"), sample(&e.expr, &xs)?));
    }
    match args.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut header = vec!["x".to_string()];
            for (name, _) in &columns {
                header.push(format!("re_{name}"));
                header.push(format!("im_{name}"));
            }
            let rows: Vec<Vec<String>> = xs
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let mut row = vec![format!("{x:e}")];
                    for (_, v) in &columns {
                        row.push(format!("{:e}", v[j].re));
                        row.push(format!("{:e}", v[j].im));
                    }
                    row
                })
                .collect();
            write_csv(&header, &rows, &args.out)?;
        }
        Format::Json => {
            let mut obj: BTreeMap<String, serde_json::Value> = BTreeMap::new();
            obj.insert("x".into(), serde_json::json!(xs));
            for (name, v) in columns {
                let v: Vec<ComplexScalar> = v.into_iter().map(Into::into).collect();
                obj.insert(name, serde_json::json!(v));
            }
            write_json(&obj, &args.out)?;
        }
    }
    Ok(true)
}

fn sweep(args: &RunArgs, axis: &(String, Vec<ParamValue>)) -> Result<bool, CliError> {
    let (name, values) = axis;
    if values.is_empty() {
        return Err(CliError::Config(format!("sweep axis `{name}` has no values")));
    }
    let base = args.config()?;
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    for &v in values {
        let mut c = base.clone();
        if name == "eps" {
            let ParamValue::Real(e) = v else {
                return Err(CliError::Config("eps values must be real".into()));
            };
            let mut roi = c.roi.clone().unwrap_or_else(|| susyj::models::RoiSpec {
                grid: susyj::operators::GridSpec {
                    x_min: -4.0,
                    x_max: 4.0,
                    n_points: 9,
                },
                ..Default::default()
            });
            roi.eps = vec![e];
            c.roi = Some(roi);
        } else {
            if !c.resolved_params()?.contains_key(name) {
                return Err(CliError::Config(format!(
                    "axis `{name}` is not a parameter of model `{}`",
                    c.model_name()
                )));
            }
            c.params.insert(name.clone(), v);
        }
        let r = build_report(&c)?;
        summary.push(SweepRow {
            value: v,
            passed: r.passed,
            suites: r.suites.iter().map(|(k, s)| (k.clone(), s.status)).collect(),
            metrics: metrics(&r),
        });
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    match args.format.unwrap_or(Format::Json) {
        Format::Json => write_json(
            &SweepReport {
                axis: name.clone(),
                passed,
                summary,
                reports,
            },
            &args.out,
        )?,
        Format::Csv => {
            let keys: Vec<String> = summary
                .iter()
                .flat_map(|r| r.metrics.keys().cloned())
                .collect::<std::collections::BTreeSet<_>>()
                .into_iter()
                .collect();
            let mut header = vec![format!("re_{name}"), format!("im_{name}"), "passed".into()];
            header.extend(keys.iter().cloned());
            let rows: Vec<Vec<String>> = summary
                .iter()
                .map(|r| {
                    let v = r.value.complex();
                    let mut row = vec![format!("{:e}", v.re), format!("{:e}", v.im), r.passed.to_string()];
                    row.extend(
                        keys.iter()
                            .map(|k| r.metrics.get(k).map(|m| format!("{m:e}")).unwrap_or_default()),
                    );
                    row
                })
                .collect();
            write_csv(&header, &rows, &args.out)?;
        }
    }
    Ok(passed)
}

/// Every check of every suite, flattened to `suite.check`.
fn metrics(r: &Report) -> BTreeMap<String, f64> {
    let mut m = BTreeMap::new();
    for (s, res) in &r.suites {
        for c in &res.checks {
            m.insert(format!("{s}.{}", c.name), c.measured);
        }
        if s == "binorms" {
            if let Some(extra) = res.details.get("two_level").and_then(|v| v.as_array()) {
                for e in extra {
                    let label = e["state"].as_str().unwrap_or("?");
                    for key in ["measured", "expected"] {
                        m.insert(format!("binorm_{label}_{key}_re"), e[key]["re"].as_f64().unwrap_or(f64::NAN));
                        m.insert(format!("binorm_{label}_{key}_im"), e[key]["im"].as_f64().unwrap_or(f64::NAN));
                    }
                }
            }
        }
    }
    m
}

fn list_models() -> Result<bool, CliError> {
    let rows = [
        ("rank2", "alpha (real > 0), x0, z (Im z != 0)"),
        ("two_level", "alpha (> 0 or imaginary), beta in [0, alpha), x0, z (Im z != 0)"),
        ("single", "alpha (real > 0), x0"),
        ("inverse_square", "z (Im z != 0), n (1..=6)"),
        ("custom", "source potential and kernel as expression trees (--config)"),
    ];
    let mut out = std::io::stdout().lock();
    for (name, params) in rows {
        writeln!(out, "{name:16} {params}").map_err(io_err(&None))?;
    }
    Ok(true)
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("SUSYJ_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Config(format!("SUSYJ_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let res = init_threads().and_then(|_| match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Grid(a) => grid(a),
        Command::Sweep { run, axis } => sweep(run, axis),
        Command::ListModels => list_models(),
    });
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("susyj: {e}");
            ExitCode::from(e.code())
        }
    }
}
