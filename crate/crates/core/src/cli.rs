//! The `plabench` command line.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails, 2 for invalid
//! input or configuration. Settings resolve as defaults, then `--config`, then
//! explicit flags; the resolved settings are embedded in every JSON output.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::alpha::{AlphaConstruction, AlphaError, LacunarySequence, RatioString};
use crate::cone::{cone_kappa_max, ArcSet, PrivalovDomain};
use crate::constructions::{
    build_thm1, build_thm2, build_thm4, BuildError, EpsilonModel, ScheduleBundle, DEFAULT_SEARCH_CAP,
};
use crate::harmonic::{
    arc_histogram, disk_oracle_passes, sample_exits, subharmonic_check, HmEstimate, HmError, WalkOptions,
};
use crate::series::{CoefficientSeries, WeightSequence};
use crate::verify::{self, abel_bound_sweep, CriterionResult, Status, VerifyConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "plabench", version, about = "Numerical checks for Privalov-type arguments")]
pub struct Cli {
    /// Grid size M for sampled series.
    #[arg(long, global = true)]
    pub grid_size: Option<usize>,
    /// Monte-Carlo sample count.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Walk-on-spheres stopping distance.
    #[arg(long, global = true)]
    pub delta: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Margin factor for finite-depth schedule conditions.
    #[arg(long, global = true)]
    pub margin: Option<f64>,
    /// Schedule depth.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// JSON file with any of the resolved-config fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Thm1,
    Thm2,
    Thm4,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact alpha construction from a sequence file (one integer per line).
    Alpha { sequence: PathBuf },
    /// Cone constant search and Abel-bound sweep.
    Cone {
        /// Bound checked against both the cone maximum and the sweep.
        #[arg(long, default_value_t = 3.0)]
        tolerance: f64,
        #[arg(long, default_value_t = 20_000)]
        kappa_samples: usize,
        #[arg(long, default_value_t = 1000)]
        polys: usize,
        #[arg(long, default_value_t = 100)]
        points: usize,
    },
    /// Harmonic measure of the Privalov domain over an arc file.
    Hm {
        arcs: PathBuf,
        /// Analytic series for the subharmonic check (JSON or CSV).
        #[arg(long)]
        series: Option<PathBuf>,
        /// Equal arcs for the disk comparison.
        #[arg(long, default_value_t = 8)]
        bins: usize,
    },
    /// Builds and self-checks a schedule bundle.
    Build {
        #[arg(value_enum)]
        variant: VariantArg,
        /// `log:N`, `linear:N`, or a file with one value per line.
        #[arg(long)]
        table: Option<String>,
        /// Sequence file for thm2.
        #[arg(long)]
        sequence: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_CAP)]
        search_cap: u64,
    },
    /// Runs the acceptance checks.
    Verify {
        /// Restrict to these criterion ids.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
        /// Extra series file to check for Parseval and prefix consistency.
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

/// Fields accepted in a `--config` file.
///
/// `subcommand` and `inputs` are accepted so a resolved config can be fed back,
/// but the command line always decides them.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(dead_code)]
struct ConfigFile {
    subcommand: Option<String>,
    inputs: Option<Vec<String>>,
    grid_size: Option<usize>,
    mc_samples: Option<usize>,
    delta: Option<f64>,
    seed: Option<u64>,
    margin: Option<f64>,
    depth: Option<usize>,
    format: Option<Format>,
    out: Option<PathBuf>,
}

/// Fully resolved settings.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: Vec<String>,
    pub grid_size: usize,
    pub mc_samples: usize,
    pub delta: f64,
    pub seed: u64,
    pub margin: f64,
    pub depth: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    /// Exit code 2.
    Invalid(String),
    /// Exit code 1.
    Failed(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

impl From<AlphaError> for CliError {
    fn from(e: AlphaError) -> Self {
        invalid(e)
    }
}

impl From<BuildError> for CliError {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Unverified(_) | BuildError::SearchCap { .. } | BuildError::CaseAssertion { .. } => {
                CliError::Failed(e.to_string())
            }
            other => invalid(other),
        }
    }
}

impl From<HmError> for CliError {
    fn from(e: HmError) -> Self {
        match e {
            HmError::MaxSteps { .. } => CliError::Failed(e.to_string()),
            other => invalid(other),
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

impl RunConfig {
    fn resolve(cli: &Cli) -> Result<Self, CliError> {
        let file: ConfigFile = match &cli.config {
            Some(p) => serde_json::from_str(&read(p)?).map_err(|e| invalid(format!("{}: {e}", p.display())))?,
            None => ConfigFile::default(),
        };
        let (subcommand, inputs) = describe(&cli.command);
        let cfg = Self {
            subcommand,
            inputs,
            grid_size: cli.grid_size.or(file.grid_size).unwrap_or(65536),
            mc_samples: cli.samples.or(file.mc_samples).unwrap_or(100_000),
            delta: cli.delta.or(file.delta).unwrap_or(1e-5),
            seed: cli.seed.or(file.seed).unwrap_or(0),
            margin: cli.margin.or(file.margin).unwrap_or(2.0),
            depth: cli.depth.or(file.depth).unwrap_or(8),
            format: cli.format.or(file.format).unwrap_or(Format::Json),
            out: cli.out.clone().or(file.out),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(invalid(format!("{name} must be positive, got {v}")))
            }
        };
        positive("grid_size", self.grid_size as f64)?;
        positive("mc_samples", self.mc_samples as f64)?;
        positive("delta", self.delta)?;
        positive("margin", self.margin)?;
        positive("depth", self.depth as f64)
    }

    fn verify_config(&self) -> VerifyConfig {
        VerifyConfig {
            grid_size: self.grid_size,
            samples: self.mc_samples,
            delta: self.delta,
            seed: self.seed,
            margin: self.margin,
        }
    }
}

fn describe(cmd: &Command) -> (String, Vec<String>) {
    let path = |p: &Path| p.display().to_string();
    match cmd {
        Command::Alpha { sequence } => ("alpha".into(), vec![path(sequence)]),
        Command::Cone { .. } => ("cone".into(), vec![]),
        Command::Hm { arcs, series, .. } => (
            "hm".into(),
            std::iter::once(path(arcs)).chain(series.as_deref().map(path)).collect(),
        ),
        Command::Build { table, sequence, .. } => (
            "build".into(),
            table.iter().cloned().chain(sequence.as_deref().map(path)).collect(),
        ),
        Command::Verify { series, .. } => ("verify".into(), series.as_deref().map(path).into_iter().collect()),
    }
}

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| f.write_all(contents.as_bytes()).and_then(|_| f.sync_all()))
        .and_then(|_| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// A command's artifact in both formats and its verdict.
struct Report {
    json: Value,
    csv: String,
    pass: bool,
    failure: String,
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    let text = match cfg.format {
        Format::Json => {
            let mut v = report.json.clone();
            v["config"] = serde_json::to_value(cfg).expect("config serializes");
            serde_json::to_string_pretty(&v).expect("report serializes") + "\n"
        }
        Format::Csv => report.csv.clone(),
    };
    match &cfg.out {
        Some(p) => write_atomic(p, &text).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| invalid(format!("stdout: {e}")))
        }
    }
}

fn csv_of<T: Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("plain rows serialize");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
}

fn cmd_alpha(sequence: &Path) -> Result<Report, CliError> {
    let seq = LacunarySequence::parse(&read(sequence)?)?;
    let a = AlphaConstruction::construct(&seq);
    let report = a.report()?;
    let enc = a.frac_parts(true);
    let integral = a.integrality_holds();
    let in_unit = enc.iter().all(|e| !(e.lo < BigRational::zero()) && e.hi < BigRational::one());
    let non_increasing = enc.windows(2).all(|w| w[1].hi <= w[0].hi);
    let uniform = if a.depth() >= 2 {
        let u = a.uniform_bound_check(&BigRational::from_integer(BigInt::from(2)))?;
        Some((u.pass, RatioString(u.observed)))
    } else {
        None
    };
    let uniform_pass = uniform.as_ref().is_none_or(|u| u.0);
    let pass = integral && in_unit && uniform_pass;
    let json = json!({
        "alpha": report,
        "checks": {
            "integrality": integral,
            "enclosures_in_unit_interval": in_unit,
            "upper_bounds_non_increasing": non_increasing,
            "uniform_bound_c2": uniform.as_ref().map(|u| json!({ "pass": u.0, "observed": u.1.to_string() })),
        },
    });
    #[derive(Serialize)]
    struct Row {
        k: usize,
        lo: String,
        hi: String,
    }
    let rows: Vec<Row> = report
        .frac_bounds
        .iter()
        .map(|b| Row {
            k: b.k,
            lo: b.lo.to_string(),
            hi: b.hi.to_string(),
        })
        .collect();
    Ok(Report {
        json,
        csv: csv_of(&rows),
        pass,
        failure: "alpha invariant check failed".into(),
    })
}

fn cmd_cone(cfg: &RunConfig, tolerance: f64, kappa_samples: usize, polys: usize, points: usize) -> Result<Report, CliError> {
    if !(tolerance > 0.0) {
        return Err(invalid(format!("tolerance must be positive, got {tolerance}")));
    }
    let kappa = cone_kappa_max(kappa_samples);
    let sweep = abel_bound_sweep(polys, points, tolerance, cfg.seed);
    let kappa_ok = kappa.value <= tolerance + 1e-9;
    let pass = kappa_ok && sweep.failures == 0;
    let json = json!({ "tolerance": tolerance, "kappa": kappa, "abel": sweep, "pass": pass });
    #[derive(Serialize)]
    struct Row {
        metric: &'static str,
        value: f64,
    }
    let rows = [
        Row { metric: "kappa_max", value: kappa.value },
        Row { metric: "argmax_re", value: kappa.argmax.re },
        Row { metric: "argmax_im", value: kappa.argmax.im },
        Row { metric: "low_sampling", value: f64::from(u8::from(kappa.low_sampling)) },
        Row { metric: "abel_worst_ratio", value: sweep.worst_ratio },
        Row { metric: "abel_failures", value: sweep.failures as f64 },
    ];
    Ok(Report {
        json,
        csv: csv_of(&rows),
        pass,
        failure: format!(
            "cone max {} against tolerance {tolerance}, {} Abel-bound failures",
            kappa.value, sweep.failures
        ),
    })
}

fn load_series(path: &Path) -> Result<CoefficientSeries, CliError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let f = fs::File::open(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        CoefficientSeries::from_csv(f).map_err(|e| invalid(format!("{}: {e}", path.display())))
    } else {
        CoefficientSeries::from_json_str(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}

fn cmd_hm(cfg: &RunConfig, arcs: &Path, series: Option<&Path>, bins: usize) -> Result<Report, CliError> {
    if bins == 0 {
        return Err(invalid("bins must be positive"));
    }
    let base = ArcSet::from_json_str(&read(arcs)?).map_err(|e| invalid(format!("{}: {e}", arcs.display())))?;
    let g = series.map(load_series).transpose()?;
    let domain = PrivalovDomain::from_arcs(base);
    let opts = WalkOptions::with_delta(cfg.delta);
    let origin = Complex64::new(0.0, 0.0);
    let exits = sample_exits(&domain, origin, cfg.mc_samples, &opts, cfg.seed)?;
    let est = HmEstimate::from_exits(&domain, &exits, cfg.delta, cfg.seed);
    let gaps = est.gap_table(&domain);
    let partition = est.partition_holds();
    let mut pass = partition;
    let mut json = json!({
        "domain": domain.to_json(),
        "estimate": est,
        "gaps": gaps,
        "partition": partition,
    });
    let mut csv = csv_of(&gaps);
    if domain.base().is_full() {
        let hist = arc_histogram(&exits, bins);
        let ok = disk_oracle_passes(&hist, est.samples, verify::SIGMAS);
        pass &= ok;
        csv = csv_of(&hist);
        json["disk_oracle"] = json!({ "bins": hist, "pass": ok });
    }
    if let Some(g) = g {
        let r = subharmonic_check(&domain, &g, origin, cfg.mc_samples, &opts, cfg.seed)?;
        pass &= r.holds(verify::SIGMAS);
        json["subharmonic"] = serde_json::to_value(&r).expect("report serializes");
    }
    Ok(Report {
        json,
        csv,
        pass,
        failure: "harmonic-measure check failed".into(),
    })
}

/// `log:N`, `linear:N`, or a file of values.
pub fn parse_table(spec: &str) -> Result<WeightSequence, CliError> {
    let builtin = |s: &str| -> Result<usize, CliError> {
        let n: usize = s.parse().map_err(|_| invalid(format!("bad table length {s:?}")))?;
        if n < 2 {
            return Err(invalid("table length must be at least 2"));
        }
        Ok(n)
    };
    if let Some(n) = spec.strip_prefix("log:") {
        return Ok(verify::log_table(builtin(n)?));
    }
    if let Some(n) = spec.strip_prefix("linear:") {
        return Ok(verify::linear_table(builtin(n)?));
    }
    let text = read(Path::new(spec))?;
    let mut values = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(
            line.parse::<f64>()
                .map_err(|_| invalid(format!("{spec}:{}: not a number: {line:?}", i + 1)))?,
        );
    }
    WeightSequence::new(values).map_err(|e| invalid(format!("{spec}: {e}")))
}

fn cmd_build(
    cfg: &RunConfig,
    variant: VariantArg,
    table: Option<&str>,
    sequence: Option<&Path>,
    search_cap: u64,
) -> Result<Report, CliError> {
    let model = EpsilonModel::default();
    if !(cfg.margin > 1.0) {
        return Err(invalid(format!("margin must be > 1, got {}", cfg.margin)));
    }
    let bundle: ScheduleBundle = match variant {
        VariantArg::Thm1 => build_thm1(&parse_table(table.unwrap_or("log:1048576"))?, cfg.depth, cfg.margin, &model)?,
        VariantArg::Thm2 => {
            let path = sequence.ok_or_else(|| invalid("thm2 needs --sequence"))?;
            let seq = LacunarySequence::parse(&read(path)?)?;
            build_thm2(&AlphaConstruction::construct(&seq), cfg.depth, cfg.margin, &model, search_cap)?
        }
        VariantArg::Thm4 => build_thm4(&parse_table(table.unwrap_or("linear:1048576"))?, cfg.depth, cfg.margin, &model)?,
    };
    let pass = bundle.all_pass();
    Ok(Report {
        json: bundle.to_json(),
        csv: csv_of(&bundle.checks),
        pass,
        failure: "schedule check failed".into(),
    })
}

fn input_series_row(path: &Path, grid: usize) -> Result<CriterionResult, CliError> {
    let s = load_series(path)?;
    let parseval = (s.l2_norm() - s.sample(grid).mean_square().sqrt()).abs();
    let m = 64;
    let fast = s.maximal_partial_sum(m);
    let prefix = (0..m)
        .map(|j| (fast.samples()[j] - verify::exhaustive_prefix_max(&s, fast.t(j))).abs())
        .fold(0.0, f64::max);
    let pass = parseval <= 1e-10 * (1.0 + s.l2_norm()) && prefix <= 1e-12 * (1.0 + s.wiener_norm());
    Ok(CriterionResult {
        id: 0,
        name: "input series",
        status: if pass { Status::Pass } else { Status::Fail },
        detail: format!("parseval {parseval:.1e}, prefix {prefix:.1e}"),
        seconds: 0.0,
    })
}

fn cmd_verify(cfg: &RunConfig, only: &[u8], series: Option<&Path>) -> Result<Report, CliError> {
    let extra = series.map(|p| input_series_row(p, cfg.grid_size)).transpose()?;
    if let Some(bad) = only.iter().find(|&&id| !(1..=10).contains(&id)) {
        return Err(invalid(format!("no criterion {bad}")));
    }
    let vc = cfg.verify_config();
    let mut rows: Vec<CriterionResult> = Vec::new();
    rows.extend(extra);
    for &(id, ..) in verify::CRITERIA.iter() {
        if only.is_empty() || only.contains(&id) {
            let r = verify::run_criterion(id, &vc).expect("known criterion");
            eprintln!(
                "criterion {:>2} {:<28} {:<5} {:>7.2}s  {}",
                r.id,
                r.name,
                format!("{:?}", r.status).to_lowercase(),
                r.seconds,
                r.detail
            );
            rows.push(r);
        }
    }
    let pass = rows.iter().all(CriterionResult::passed);
    let table: Vec<Value> = rows
        .iter()
        .map(|r| json!({ "id": r.id, "name": r.name, "status": r.status, "detail": r.detail }))
        .collect();
    #[derive(Serialize)]
    struct Row<'a> {
        id: u8,
        name: &'a str,
        status: Status,
        detail: &'a str,
    }
    let csv_rows: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            id: r.id,
            name: r.name,
            status: r.status,
            detail: &r.detail,
        })
        .collect();
    let mut failure = String::from("failed criteria:");
    for r in rows.iter().filter(|r| !r.passed()) {
        let _ = write!(failure, " {}", r.id);
    }
    Ok(Report {
        json: json!({ "criteria": table, "pass": pass }),
        csv: csv_of(&csv_rows),
        pass,
        failure,
    })
}

fn dispatch(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(cli)?;
    let report = match &cli.command {
        Command::Alpha { sequence } => cmd_alpha(sequence)?,
        Command::Cone {
            tolerance,
            kappa_samples,
            polys,
            points,
        } => cmd_cone(&cfg, *tolerance, *kappa_samples, *polys, *points)?,
        Command::Hm { arcs, series, bins } => cmd_hm(&cfg, arcs, series.as_deref(), *bins)?,
        Command::Build {
            variant,
            table,
            sequence,
            search_cap,
        } => cmd_build(&cfg, *variant, table.as_deref(), sequence.as_deref(), *search_cap)?,
        Command::Verify { only, series } => cmd_verify(&cfg, only, series.as_deref())?,
    };
    emit(&cfg, &report)?;
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Failed(report.failure))
    }
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(e) => {
            match &e {
                CliError::Invalid(m) => eprintln!("error: {m}"),
                CliError::Failed(m) => eprintln!("check failed: {m}"),
            }
            e.code()
        }
    }
}
