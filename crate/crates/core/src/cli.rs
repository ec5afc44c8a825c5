//! Command-line front end: argument parsing, config merging, output files
//! and the run manifest.
//!
//! Options resolve in the order flag, config file, built-in default. The
//! config file is TOML; keys are flag names (`degree`, `batch-size`, ...)
//! either at top level or in a table named after the subcommand, the latter
//! taking precedence. The seed additionally falls back to `RICHSING_SEED`.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::ensembles::{sample, EnsembleKind, EnsembleSpec, PolynomialSample};
use crate::error::{Error, Result};
use crate::kernels::{convergence_report, radius_grid};
use crate::montecarlo::{estimate_with_threads, reverse_markov_bound, EstimatorConfig, Task};
use crate::svg::{histogram, LineChart, Series};
use crate::mesh::{SphereMesh, MAX_LEVEL};
use crate::topology::{circle_zeros, critical_points, nodal_level, nodal_report_at, resolve_nodal_topology};
use crate::umbilics::{find_umbilics_with, MultiplicityPattern, UmbilicChart, UmbilicOptions};

pub const SEED_ENV: &str = "RICHSING_SEED";

/// Exit status for results flagged as unreliable.
pub const EXIT_UNRELIABLE: i32 = 2;
pub const EXIT_ERROR: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "richsing", version, about = "Random polynomials on spheres: zero sets, critical points, umbilics")]
pub struct Cli {
    /// TOML file of option defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files (default: current directory).
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Skip SVG plots.
    #[arg(long, global = true)]
    pub no_plot: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw polynomials from an ensemble and write them as JSON.
    Sample(SampleArgs),
    /// Count zero-curve components of a polynomial on S².
    CountOvals(PolyArgs),
    /// Zeros of a polynomial on S¹.
    Zeros(PolyArgs),
    /// Critical points of a polynomial on S².
    Critical(PolyArgs),
    /// Umbilics of the zero surface of a polynomial on S³.
    Umbilics(UmbilicArgs),
    /// Rescaled covariance curves against the limit kernel.
    Covariance(CovarianceArgs),
    /// Monte Carlo estimate of an expected count.
    Estimate(EstimateArgs),
    /// Reverse-Markov probability lower bound.
    Bound(BoundArgs),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// First sample index.
    #[arg(long)]
    pub index: Option<u64>,
    #[arg(long)]
    pub count: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PolyArgs {
    /// Sample JSON written by `sample`; otherwise one is drawn.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub index: Option<u64>,
    /// Starting icosphere level (count-ovals only).
    #[arg(long)]
    pub level: Option<u32>,
}

#[derive(Debug, Args)]
pub struct UmbilicArgs {
    #[command(flatten)]
    pub poly: PolyArgs,
    /// sphere, exp or stereo.
    #[arg(long)]
    pub chart: Option<String>,
    #[arg(long)]
    pub cells_per_wavelength: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated degrees.
    #[arg(long)]
    pub degrees: Option<String>,
    #[arg(long)]
    pub r_max: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// ovals, zeros, critical, umbilics or local-event.
    #[arg(long)]
    pub task: Option<String>,
    #[arg(long)]
    pub ensemble: Option<String>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub degree: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (default: available parallelism). Results do not
    /// depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub c: Option<f64>,
}

/// Record of one run: enough to reproduce every data file it lists.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    /// Fully resolved options.
    pub config: serde_json::Map<String, serde_json::Value>,
    pub version: String,
    pub seed: Option<u64>,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
}

/// Option lookup: flag, then config file, then default.
struct Resolver {
    section: Option<toml::Table>,
    top: toml::Table,
    resolved: serde_json::Map<String, serde_json::Value>,
}

fn toml_to_string(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Array(a) => a.iter().map(toml_to_string).collect::<Vec<_>>().join(","),
        other => other.to_string(),
    }
}

impl Resolver {
    fn load(path: Option<&Path>, command: &str) -> Result<Self> {
        let mut top = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?
            }
            None => toml::Table::new(),
        };
        let section = match top.remove(command) {
            Some(toml::Value::Table(t)) => Some(t),
            Some(_) => return Err(Error::Config(format!("'{command}' must be a table"))),
            None => None,
        };
        Ok(Resolver { section, top, resolved: Default::default() })
    }

    fn lookup(&self, flag: &str) -> Option<&toml::Value> {
        self.section
            .as_ref()
            .and_then(|s| s.get(flag))
            .or_else(|| self.top.get(flag))
    }

    fn opt<T: FromStr + Serialize>(&mut self, flag: &str, cli: Option<T>) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        let v = match cli {
            Some(v) => Some(v),
            None => match self.lookup(flag) {
                Some(raw) => Some(toml_to_string(raw).parse::<T>().map_err(|e| Error::Validation {
                    flag: flag.into(),
                    message: format!("config value: {e}"),
                })?),
                None => None,
            },
        };
        if let Some(v) = &v {
            self.resolved.insert(flag.into(), serde_json::to_value(v)?);
        }
        Ok(v)
    }

    fn get<T: FromStr + Serialize>(&mut self, flag: &str, cli: Option<T>, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.opt(flag, cli)?.unwrap_or(default);
        self.resolved.insert(flag.into(), serde_json::to_value(&v)?);
        Ok(v)
    }

    fn need<T: FromStr + Serialize>(&mut self, flag: &str, cli: Option<T>) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        self.opt(flag, cli)?.ok_or_else(|| Error::Validation {
            flag: flag.into(),
            message: "required (flag or config)".into(),
        })
    }

    fn seed(&mut self, cli: Option<u64>) -> Result<u64> {
        let seed = match self.opt("seed", cli)? {
            Some(s) => s,
            None => match std::env::var(SEED_ENV) {
                Ok(s) => s.trim().parse().map_err(|e| Error::Validation {
                    flag: "seed".into(),
                    message: format!("{SEED_ENV}: {e}"),
                })?,
                Err(_) => 0,
            },
        };
        self.resolved.insert("seed".into(), seed.into());
        Ok(seed)
    }

    /// Parses a string option with the library's `FromStr`, reporting the flag.
    fn parsed<T: FromStr<Err = Error>>(&mut self, flag: &str, cli: Option<String>, default: &str) -> Result<T> {
        let s = self.get(flag, cli, default.to_string())?;
        s.parse().map_err(|e: Error| Error::Validation { flag: flag.into(), message: e.to_string() })
    }
}

fn check(flag: &str, ok: bool, message: impl Into<String>) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Validation { flag: flag.into(), message: message.into() })
    }
}

struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
    plots: bool,
}

impl Outputs {
    fn path(&mut self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        self.files.push(name.to_string());
        Ok(self.dir.join(name))
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        std::fs::write(self.path(name)?, s)?;
        Ok(())
    }

    fn csv<T: Serialize>(&mut self, name: &str, rows: impl IntoIterator<Item = T>) -> Result<()> {
        let mut w = csv::Writer::from_path(self.path(name)?)?;
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }

    fn svg(&mut self, name: &str, body: impl FnOnce() -> String) -> Result<()> {
        if self.plots {
            std::fs::write(self.path(name)?, body())?;
        }
        Ok(())
    }
}

struct Outcome {
    summary: String,
    unreliable: bool,
    seed: Option<u64>,
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status: 0 on success, 2 for results flagged unreliable, 1 on
/// errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, argv) {
        Ok(o) => {
            println!("{}", o.summary);
            if o.unreliable {
                EXIT_UNRELIABLE
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Sample(_) => "sample",
        Command::CountOvals(_) => "count-ovals",
        Command::Zeros(_) => "zeros",
        Command::Critical(_) => "critical",
        Command::Umbilics(_) => "umbilics",
        Command::Covariance(_) => "covariance",
        Command::Estimate(_) => "estimate",
        Command::Bound(_) => "bound",
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<Outcome> {
    let name = command_name(&cli.command);
    let mut res = Resolver::load(cli.config.as_deref(), name)?;
    let dir = res.get("out-dir", cli.out_dir.map(|p| p.to_string_lossy().into_owned()), ".".into())?;
    let mut out = Outputs { dir: PathBuf::from(dir), files: Vec::new(), plots: !cli.no_plot };
    let started = chrono::Utc::now().to_rfc3339();
    let outcome = match cli.command {
        Command::Sample(a) => cmd_sample(a, &mut res, &mut out)?,
        Command::CountOvals(a) => cmd_count_ovals(a, &mut res, &mut out)?,
        Command::Zeros(a) => cmd_zeros(a, &mut res, &mut out)?,
        Command::Critical(a) => cmd_critical(a, &mut res, &mut out)?,
        Command::Umbilics(a) => cmd_umbilics(a, &mut res, &mut out)?,
        Command::Covariance(a) => cmd_covariance(a, &mut res, &mut out)?,
        Command::Estimate(a) => cmd_estimate(a, &mut res, &mut out)?,
        Command::Bound(a) => return cmd_bound(a, &mut res),
    };
    let manifest = RunManifest {
        command: name.into(),
        argv,
        config: res.resolved.clone(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: outcome.seed,
        started,
        finished: chrono::Utc::now().to_rfc3339(),
        outputs: out.files.clone(),
    };
    let mut s = serde_json::to_string_pretty(&manifest)?;
    s.push('\n');
    std::fs::write(out.dir.join("manifest.json"), s)?;
    Ok(outcome)
}

fn ensemble_spec(res: &mut Resolver, ensemble: Option<String>, n: usize, degree: Option<usize>, seed: Option<u64>) -> Result<EnsembleSpec> {
    let kind: EnsembleKind = res.parsed("ensemble", ensemble, "harmonic")?;
    let d = res.need("degree", degree)?;
    check("degree", d >= 1, "must be at least 1")?;
    let seed = res.seed(seed)?;
    Ok(EnsembleSpec { kind, n, k: 1, d, seed })
}

fn load_poly(a: &PolyArgs, res: &mut Resolver, n: usize) -> Result<PolynomialSample> {
    if let Some(path) = res.opt("input", a.input.as_ref().map(|p| p.to_string_lossy().into_owned()))? {
        let text = std::fs::read_to_string(&path)?;
        let p = PolynomialSample::from_json(&text)?;
        check("input", p.spec().n == n, format!("needs a sample on S^{n}, got n = {}", p.spec().n))?;
        check("input", p.spec().k == 1, "needs a single polynomial (k = 1)")?;
        return Ok(p);
    }
    let spec = ensemble_spec(res, a.ensemble.clone(), n, a.degree, a.seed)?;
    let index = res.get("index", a.index, 0)?;
    sample(&spec, index)
}

fn describe(p: &PolynomialSample) -> String {
    let s = p.spec();
    format!("{} n={} d={} seed={} index={}", s.kind, s.n, s.d, s.seed, p.index())
}

fn cmd_sample(a: SampleArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let kind: EnsembleKind = res.parsed("ensemble", a.ensemble, "harmonic")?;
    let n = res.get("n", a.n, 2)?;
    check("n", (1..=3).contains(&n), "must be 1, 2 or 3")?;
    let k = res.get("k", a.k, 1)?;
    check("k", k >= 1, "must be at least 1")?;
    let d = res.need("degree", a.degree)?;
    check("degree", d >= 1, "must be at least 1")?;
    let seed = res.seed(a.seed)?;
    let first = res.get("index", a.index, 0)?;
    let count = res.get("count", a.count, 1)?;
    check("count", count >= 1, "must be at least 1")?;
    let spec = EnsembleSpec { kind, n, k, d, seed };
    for i in first..first + count {
        let p = sample(&spec, i)?;
        out.json(&format!("sample-{i}.json"), &p.to_record())?;
    }
    Ok(Outcome {
        summary: format!("sample: {count} {kind} draw(s) n={n} k={k} d={d} seed={seed}"),
        unreliable: false,
        seed: Some(seed),
    })
}

fn cmd_count_ovals(a: PolyArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let p = load_poly(&a, res, 2)?;
    let d = p.spec().d;
    let start = res.get("level", a.level, nodal_level(d))?;
    check("level", start + 2 <= MAX_LEVEL, format!("must be at most {}", MAX_LEVEL - 2))?;
    let (report, stable) = match resolve_nodal_topology(&p, start, start + 2) {
        Ok(r) => (r, true),
        Err(Error::UnresolvedTopology(_)) => (nodal_report_at(&p, &*SphereMesh::shared(start)?), false),
        Err(e) => return Err(e),
    };
    out.json("ovals.json", &report)?;
    let ovals = report.projective_components.unwrap_or(report.b0);
    Ok(Outcome {
        summary: format!(
            "count-ovals {}: {ovals} projective ovals, b0 = {} on S^2 (level {}){}",
            describe(&p),
            report.b0,
            report.level,
            if stable { "" } else { ", UNSTABLE across mesh levels" }
        ),
        unreliable: !stable || report.flagged,
        seed: Some(p.spec().seed),
    })
}

fn cmd_zeros(a: PolyArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let p = load_poly(&a, res, 1)?;
    let z = circle_zeros(&p)?;
    out.json("zeros.json", &z)?;
    #[derive(Serialize)]
    struct Row {
        angle: f64,
    }
    out.csv("zeros.csv", z.angles.iter().map(|&angle| Row { angle }))?;
    Ok(Outcome {
        summary: format!("zeros {}: {} zeros on S^1", describe(&p), z.count),
        unreliable: false,
        seed: Some(p.spec().seed),
    })
}

fn cmd_critical(a: PolyArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let p = load_poly(&a, res, 2)?;
    let r = critical_points(&p)?;
    out.json("critical.json", &r)?;
    #[derive(Serialize)]
    struct Row {
        x0: f64,
        x1: f64,
        x2: f64,
        value: f64,
        kind: crate::topology::CriticalKind,
    }
    out.csv(
        "critical.csv",
        r.points.iter().map(|c| Row { x0: c.x[0], x1: c.x[1], x2: c.x[2], value: c.value, kind: c.kind }),
    )?;
    Ok(Outcome {
        summary: format!(
            "critical {}: {} points ({} minima, {} saddles, {} maxima), Morse sum {}",
            describe(&p),
            r.count,
            r.minima,
            r.saddles,
            r.maxima,
            r.morse_sum
        ),
        unreliable: !r.fully_converged,
        seed: Some(p.spec().seed),
    })
}

fn cmd_umbilics(a: UmbilicArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let p = load_poly(&a.poly, res, 3)?;
    let chart: UmbilicChart = res.parsed("chart", a.chart, "sphere")?;
    let defaults = UmbilicOptions::default();
    let cpw = res.get("cells-per-wavelength", a.cells_per_wavelength, defaults.cells_per_wavelength)?;
    check("cells-per-wavelength", cpw.is_finite() && cpw >= 4.0, "must be at least 4")?;
    let opts = UmbilicOptions { cells_per_wavelength: cpw, ..defaults };
    let r = find_umbilics_with(&p, &MultiplicityPattern::umbilic(), chart, &opts)?;
    out.json("umbilics.json", &r)?;
    #[derive(Serialize)]
    struct Row {
        x0: f64,
        x1: f64,
        x2: f64,
        x3: f64,
        k1: f64,
        k2: f64,
    }
    out.csv(
        "umbilics.csv",
        r.points.iter().map(|u| Row { x0: u.x[0], x1: u.x[1], x2: u.x[2], x3: u.x[3], k1: u.curvatures[0], k2: u.curvatures[1] }),
    )?;
    Ok(Outcome {
        summary: format!("umbilics {} chart={chart:?}: {} umbilics", describe(&p), r.count).to_lowercase(),
        unreliable: false,
        seed: Some(p.spec().seed),
    })
}

fn cmd_covariance(a: CovarianceArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let n = res.get("n", a.n, 2)?;
    check("n", (1..=3).contains(&n), "must be 1, 2 or 3")?;
    let list = res.get("degrees", a.degrees, "10,20,40,80".into())?;
    let degrees = list
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Validation { flag: "degrees".into(), message: e.to_string() })?;
    check("degrees", !degrees.is_empty() && degrees.iter().all(|&d| d >= 1), "need positive degrees")?;
    let r_max = res.get("r-max", a.r_max, 4.0)?;
    check("r-max", r_max.is_finite() && r_max > 0.0, "must be positive")?;
    let points = res.get("points", a.points, 401)?;
    check("points", points >= 2, "must be at least 2")?;
    let rep = convergence_report(n, &degrees, &radius_grid(r_max, points))?;
    out.json("covariance.json", &rep)?;
    out.csv("covariance.csv", rep.curves.iter())?;
    out.svg("covariance.svg", || {
        let mut series: Vec<Series> = degrees
            .iter()
            .map(|&d| Series {
                label: format!("d = {d}"),
                points: rep.curves.iter().filter(|c| c.d == d).map(|c| (c.r, c.rho_d)).collect(),
                dashed: false,
            })
            .collect();
        series.push(Series {
            label: "limit".into(),
            points: rep.curves.iter().filter(|c| c.d == degrees[0]).map(|c| (c.r, c.rho_inf)).collect(),
            dashed: true,
        });
        LineChart {
            title: format!("rescaled correlation, n = {n}"),
            x_label: "r".into(),
            y_label: "correlation".into(),
            series,
        }
        .render()
    })?;
    let sups: Vec<String> = rep.sup_distance.iter().map(|s| format!("{s:.3e}")).collect();
    Ok(Outcome {
        summary: format!("covariance n={n}: sup distance {} ({})", sups.join(", "), if rep.monotone { "decreasing" } else { "not decreasing" }),
        unreliable: false,
        seed: None,
    })
}

fn cmd_estimate(a: EstimateArgs, res: &mut Resolver, out: &mut Outputs) -> Result<Outcome> {
    let task: Task = res.parsed("task", a.task, "ovals")?;
    let n = res.get("n", a.n, task.required_dim().unwrap_or(2))?;
    if let Some(req) = task.required_dim() {
        check("n", n == req, format!("task {task} needs n = {req}"))?;
    }
    check("n", (1..=3).contains(&n), "must be 1, 2 or 3")?;
    let spec = ensemble_spec(res, a.ensemble, n, a.degree, a.seed)?;
    let samples = res.need("samples", a.samples)?;
    check("samples", samples >= 2, "must be at least 2")?;
    let mut config = EstimatorConfig::new(spec, task, samples);
    config.batch_size = res.get("batch-size", a.batch_size, config.batch_size)?;
    check("batch-size", config.batch_size >= 1 && samples / config.batch_size >= 2, "must leave at least 2 batches")?;
    let default_threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let threads = res.get("threads", a.threads, default_threads)?;
    check("threads", threads >= 1, "must be at least 1")?;
    let rep = estimate_with_threads(&config, threads)?;
    out.json("estimate.json", &rep)?;
    out.csv("estimate.csv", rep.outcomes.iter())?;
    out.svg("estimate.svg", || {
        let vals: Vec<f64> = rep.outcomes.iter().filter_map(|o| o.value).collect();
        histogram(&format!("{task}, {} d = {}", spec.kind, spec.d), &task.to_string(), &vals)
    })?;
    Ok(Outcome {
        summary: format!(
            "estimate {task} {} n={n} d={} N={}: mean {:.6} ± {:.6}, mean/d^{n} {:.6} ± {:.6}, excluded {}{}",
            spec.kind,
            spec.d,
            samples,
            rep.mean,
            rep.std_error,
            rep.normalized_mean,
            rep.normalized_std_error,
            rep.excluded,
            if rep.unreliable { " (UNRELIABLE)" } else { "" }
        ),
        unreliable: rep.unreliable,
        seed: Some(spec.seed),
    })
}

fn cmd_bound(a: BoundArgs, res: &mut Resolver) -> Result<Outcome> {
    let c1 = res.need("c1", a.c1)?;
    let c2 = res.need("c2", a.c2)?;
    let c = res.need("c", a.c)?;
    check("c1", c1.is_finite() && c1 >= 0.0, "must be finite and nonnegative")?;
    check("c2", c2.is_finite() && c2 >= 0.0 && c2 <= c1, "must lie in [0, c1]")?;
    check("c", c.is_finite() && c >= 0.0 && c < c1, "must lie in [0, c1)")?;
    let b = reverse_markov_bound(c1, c2, c)?;
    Ok(Outcome { summary: format!("{b}"), unreliable: false, seed: None })
}
