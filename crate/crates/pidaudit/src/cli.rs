//! Command-line entry points: `audit`, `pid`, and `generate`.
//!
//! Configuration precedence: command-line flags override the plain-text
//! key=value file passed with `--config`, which overrides defaults. Exit
//! codes are a stable contract: 0 clean, 1 error, 2 success with
//! solver-quality or oracle warnings. Errors are emitted as a JSON object
//! on standard error.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::attribution::{self, AuditConfig, AuditMode};
use crate::data::synth::{
    generate, pmf_table, GeneratedData, GeneratorName, SampleMode, SyntheticSpec,
};
use crate::data::{self, AuditSchema, BinningStrategy, Table};
use crate::dist::JointDistribution;
use crate::error::{AuditError, Result};
use crate::oracle::ModelOracle;
use crate::pid::{self, SolverBackend, SolverConfig};
use crate::report::ReportEnvelope;

#[derive(Parser)]
#[command(
    name = "pidaudit",
    version,
    about = "Quantify feature contributions to decision disparity I(Z;Yhat)"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a disparity audit and write report files
    Audit(AuditArgs),
    /// Decompose I(Z;(A,B)) into unique, redundant, and synergistic parts
    Pid(PidArgs),
    /// Generate a synthetic dataset (or its exact pmf) as CSV
    Generate(GenerateArgs),
}

#[derive(Args, Default)]
pub struct AuditArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in generator: canonical1|canonical2|canonical3|case_study
    #[arg(long)]
    pub generate: Option<String>,
    /// Sample count for generated data; omit for the exact analytic pmf
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Protected attribute column (Z)
    #[arg(long)]
    pub protected: Option<String>,
    /// Decision column (Yhat)
    #[arg(long)]
    pub decision: Option<String>,
    /// Comma-separated feature columns (X)
    #[arg(long, value_delimiter = ',')]
    pub features: Option<Vec<String>>,
    /// Bin directives for numeric columns, e.g. score=4,age=3
    #[arg(long, value_delimiter = ',')]
    pub bins: Option<Vec<String>>,
    /// quantile|equal_width
    #[arg(long)]
    pub binning: Option<String>,
    /// distributional|interventional
    #[arg(long)]
    pub mode: Option<String>,
    /// builtin:<first|diff|xor> | table:<csv path> | exec:<command line>
    #[arg(long)]
    pub oracle: Option<String>,
    /// Per-batch timeout for external oracles, in seconds
    #[arg(long)]
    pub oracle_timeout: Option<u64>,
    /// Early-truncation threshold in bits (0 disables truncation)
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Additive smoothing applied to estimated pmfs
    #[arg(long)]
    pub smoothing: Option<f64>,
    /// Worker threads for subset-level computations
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Also write plot-ready subsets.csv and features.csv
    #[arg(long)]
    pub plot_data: bool,
    /// Plain-text key=value configuration file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for report files (default: current directory)
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct PidArgs {
    /// Input CSV with a header row
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Built-in generator (pid_example fits this command directly)
    #[arg(long)]
    pub generate: Option<String>,
    /// Sample count for generated data; omit for the exact analytic pmf
    #[arg(long)]
    pub samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Target variable column
    #[arg(long, default_value = "z")]
    pub z: String,
    /// First source column
    #[arg(long, default_value = "a")]
    pub a: String,
    /// Second source column (comma-separated list is grouped)
    #[arg(long, value_delimiter = ',', default_value = "b")]
    pub b: Vec<String>,
    #[arg(long, default_value_t = 0.0)]
    pub smoothing: f64,
    /// Write pid.json here in addition to the text output
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// canonical1|canonical2|canonical3|case_study|pid_example
    pub name: String,
    /// Rows to sample (ignored with --analytic)
    #[arg(long, default_value_t = 10_000)]
    pub samples: u64,
    /// Emit the exact pmf (one row per cell with a probability column)
    #[arg(long)]
    pub analytic: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file (default: <name>.csv under --out-dir)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

/// Effective audit settings after merging defaults, config file, flags.
#[derive(Debug, Clone)]
pub struct AuditSettings {
    pub input: Option<PathBuf>,
    pub generator: Option<GeneratorName>,
    pub samples: Option<u64>,
    pub seed: u64,
    pub protected: Option<String>,
    pub decision: Option<String>,
    pub features: Option<Vec<String>>,
    pub bins: HashMap<String, usize>,
    pub binning: BinningStrategy,
    pub mode: AuditMode,
    pub oracle: Option<String>,
    pub oracle_timeout: Duration,
    pub epsilon: f64,
    pub smoothing: f64,
    pub jobs: usize,
    pub plot_data: bool,
    pub out_dir: PathBuf,
    pub solver_backend: SolverBackend,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub check_determinism: bool,
    pub impute_overrides: HashMap<String, String>,
}

impl Default for AuditSettings {
    fn default() -> Self {
        let solver = SolverConfig::default();
        AuditSettings {
            input: None,
            generator: None,
            samples: None,
            seed: 0,
            protected: None,
            decision: None,
            features: None,
            bins: HashMap::new(),
            binning: BinningStrategy::Quantile,
            mode: AuditMode::Distributional,
            oracle: None,
            oracle_timeout: crate::oracle::DEFAULT_BATCH_TIMEOUT,
            epsilon: 0.0,
            smoothing: 0.0,
            jobs: 1,
            plot_data: false,
            out_dir: PathBuf::from("."),
            solver_backend: solver.backend,
            max_iterations: solver.max_iterations,
            rel_tol: solver.rel_tol,
            check_determinism: true,
            impute_overrides: HashMap::new(),
        }
    }
}

fn parse_mode(s: &str) -> Result<AuditMode> {
    match s {
        "distributional" => Ok(AuditMode::Distributional),
        "interventional" => Ok(AuditMode::Interventional),
        other => Err(AuditError::InvalidArgument(format!(
            "unknown mode {other:?} (expected distributional|interventional)"
        ))),
    }
}

fn parse_binning(s: &str) -> Result<BinningStrategy> {
    match s {
        "quantile" => Ok(BinningStrategy::Quantile),
        "equal_width" => Ok(BinningStrategy::EqualWidth),
        other => Err(AuditError::InvalidArgument(format!(
            "unknown binning {other:?} (expected quantile|equal_width)"
        ))),
    }
}

fn parse_backend(s: &str) -> Result<SolverBackend> {
    match s {
        "projected_gradient" | "pg" => Ok(SolverBackend::ProjectedGradient),
        "alternating_min" | "am" => Ok(SolverBackend::AlternatingMin),
        other => Err(AuditError::InvalidArgument(format!(
            "unknown solver backend {other:?}"
        ))),
    }
}

fn parse_bins(items: &[String], into: &mut HashMap<String, usize>) -> Result<()> {
    for item in items {
        let (col, k) = item.split_once('=').ok_or_else(|| {
            AuditError::InvalidArgument(format!("bin directive {item:?} is not col=count"))
        })?;
        let k: usize = k.parse().map_err(|_| {
            AuditError::InvalidArgument(format!("bin count in {item:?} is not an integer"))
        })?;
        into.insert(col.to_string(), k);
    }
    Ok(())
}

/// Parses a plain-text key=value config file ('#' starts a comment).
fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            AuditError::InvalidArgument(format!(
                "{}:{}: expected key=value, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        out.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(out)
}

impl AuditSettings {
    fn apply_config_entry(&mut self, key: &str, value: &str) -> Result<()> {
        let bad_num = |k: &str, v: &str| {
            AuditError::InvalidArgument(format!("config key {k} has non-numeric value {v:?}"))
        };
        match key {
            "input" => self.input = Some(PathBuf::from(value)),
            "generate" => self.generator = Some(value.parse()?),
            "samples" => self.samples = Some(value.parse().map_err(|_| bad_num(key, value))?),
            "seed" => self.seed = value.parse().map_err(|_| bad_num(key, value))?,
            "protected" => self.protected = Some(value.to_string()),
            "decision" => self.decision = Some(value.to_string()),
            "features" => {
                self.features = Some(value.split(',').map(|s| s.trim().to_string()).collect())
            }
            "bins" => {
                let items: Vec<String> = value.split(',').map(|s| s.trim().to_string()).collect();
                parse_bins(&items, &mut self.bins)?;
            }
            "binning" => self.binning = parse_binning(value)?,
            "mode" => self.mode = parse_mode(value)?,
            "oracle" => self.oracle = Some(value.to_string()),
            "oracle_timeout" => {
                self.oracle_timeout =
                    Duration::from_secs(value.parse().map_err(|_| bad_num(key, value))?)
            }
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad_num(key, value))?,
            "smoothing" => self.smoothing = value.parse().map_err(|_| bad_num(key, value))?,
            "jobs" => self.jobs = value.parse().map_err(|_| bad_num(key, value))?,
            "plot_data" => {
                self.plot_data = value.parse().map_err(|_| {
                    AuditError::InvalidArgument(format!(
                        "plot_data must be true|false, got {value:?}"
                    ))
                })?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "solver_backend" => self.solver_backend = parse_backend(value)?,
            "max_iterations" => {
                self.max_iterations = value.parse().map_err(|_| bad_num(key, value))?
            }
            "rel_tol" => self.rel_tol = value.parse().map_err(|_| bad_num(key, value))?,
            "check_determinism" => {
                self.check_determinism = value.parse().map_err(|_| {
                    AuditError::InvalidArgument(format!(
                        "check_determinism must be true|false, got {value:?}"
                    ))
                })?
            }
            _ => {
                if let Some(feature) = key.strip_prefix("impute.") {
                    self.impute_overrides
                        .insert(feature.to_string(), value.to_string());
                } else {
                    return Err(AuditError::InvalidArgument(format!(
                        "unknown config key {key:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn resolve(args: &AuditArgs) -> Result<Self> {
        let mut s = AuditSettings::default();
        if let Some(path) = &args.config {
            for (key, value) in parse_config_file(path)? {
                s.apply_config_entry(&key, &value)?;
            }
        }
        if let Some(v) = &args.input {
            s.input = Some(v.clone());
        }
        if let Some(v) = &args.generate {
            s.generator = Some(v.parse()?);
        }
        if let Some(v) = args.samples {
            s.samples = Some(v);
        }
        if let Some(v) = args.seed {
            s.seed = v;
        }
        if let Some(v) = &args.protected {
            s.protected = Some(v.clone());
        }
        if let Some(v) = &args.decision {
            s.decision = Some(v.clone());
        }
        if let Some(v) = &args.features {
            s.features = Some(v.clone());
        }
        if let Some(items) = &args.bins {
            parse_bins(items, &mut s.bins)?;
        }
        if let Some(v) = &args.binning {
            s.binning = parse_binning(v)?;
        }
        if let Some(v) = &args.mode {
            s.mode = parse_mode(v)?;
        }
        if let Some(v) = &args.oracle {
            s.oracle = Some(v.clone());
        }
        if let Some(v) = args.oracle_timeout {
            s.oracle_timeout = Duration::from_secs(v);
        }
        if let Some(v) = args.epsilon {
            s.epsilon = v;
        }
        if let Some(v) = args.smoothing {
            s.smoothing = v;
        }
        if let Some(v) = args.jobs {
            s.jobs = v;
        }
        if args.plot_data {
            s.plot_data = true;
        }
        if let Some(v) = &args.out_dir {
            s.out_dir = v.clone();
        }
        Ok(s)
    }

    fn solver_config(&self) -> SolverConfig {
        SolverConfig {
            backend: self.solver_backend,
            max_iterations: self.max_iterations,
            rel_tol: self.rel_tol,
            ..SolverConfig::default()
        }
    }

    fn audit_config(&self) -> AuditConfig {
        AuditConfig {
            solver: self.solver_config(),
            epsilon: self.epsilon,
            jobs: self.jobs,
            check_determinism: self.check_determinism,
            impute_overrides: self.impute_overrides.clone(),
            ..AuditConfig::default()
        }
    }

    /// Echo of every effective setting, embedded in the report.
    fn echo(&self, schema: &AuditSchema) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert(
            "source".into(),
            match (&self.input, self.generator) {
                (Some(p), _) => format!("input:{}", p.display()),
                (None, Some(g)) => format!("generate:{g}"),
                (None, None) => "unset".into(),
            },
        );
        m.insert(
            "samples".into(),
            self.samples.map_or("analytic".into(), |n| n.to_string()),
        );
        m.insert("seed".into(), self.seed.to_string());
        m.insert("protected".into(), schema.protected.clone());
        m.insert("decision".into(), schema.decision.clone());
        m.insert("features".into(), schema.features.join(","));
        if !schema.bins.is_empty() {
            let mut bins: Vec<String> =
                schema.bins.iter().map(|(c, k)| format!("{c}={k}")).collect();
            bins.sort();
            m.insert("bins".into(), bins.join(","));
        }
        m.insert(
            "binning".into(),
            match self.binning {
                BinningStrategy::Quantile => "quantile".into(),
                BinningStrategy::EqualWidth => "equal_width".into(),
            },
        );
        m.insert("mode".into(), self.mode.to_string());
        if let Some(o) = &self.oracle {
            m.insert("oracle".into(), o.clone());
            m.insert(
                "oracle_timeout_s".into(),
                self.oracle_timeout.as_secs().to_string(),
            );
            m.insert(
                "check_determinism".into(),
                self.check_determinism.to_string(),
            );
        }
        m.insert("epsilon".into(), self.epsilon.to_string());
        m.insert("smoothing".into(), self.smoothing.to_string());
        m.insert("jobs".into(), self.jobs.to_string());
        m.insert(
            "solver_backend".into(),
            match self.solver_backend {
                SolverBackend::ProjectedGradient => "projected_gradient".into(),
                SolverBackend::AlternatingMin => "alternating_min".into(),
            },
        );
        m.insert("max_iterations".into(), self.max_iterations.to_string());
        m.insert("rel_tol".into(), self.rel_tol.to_string());
        for (f, v) in &self.impute_overrides {
            m.insert(format!("impute.{f}"), v.clone());
        }
        m
    }
}

/// Data resolved for an audit: the estimated (or analytic) joint and the
/// concrete schema.
struct ResolvedInput {
    dist: JointDistribution,
    schema: AuditSchema,
}

fn apply_smoothing(dist: &JointDistribution, smoothing: f64) -> Result<JointDistribution> {
    if smoothing <= 0.0 {
        return Ok(dist.clone());
    }
    let k = dist.len() as f64;
    let total = 1.0 + smoothing * k;
    let pmf = dist.pmf().iter().map(|&p| (p + smoothing) / total).collect();
    JointDistribution::new(dist.variables().to_vec(), pmf, dist.sample_count())
}

fn resolve_audit_input(s: &AuditSettings) -> Result<ResolvedInput> {
    match (&s.input, s.generator) {
        (Some(path), _) => {
            let schema = AuditSchema {
                protected: s.protected.clone().ok_or_else(|| {
                    AuditError::InvalidSchema("--protected is required with --input".into())
                })?,
                decision: s.decision.clone().ok_or_else(|| {
                    AuditError::InvalidSchema("--decision is required with --input".into())
                })?,
                features: s.features.clone().ok_or_else(|| {
                    AuditError::InvalidSchema("--features is required with --input".into())
                })?,
                bins: s.bins.clone(),
                binning: s.binning,
            };
            schema.validate()?;
            let (table, _resolved) = data::load_csv(path, &schema)?;
            let dist = data::estimate_joint(&table, &schema, s.smoothing)?;
            Ok(ResolvedInput { dist, schema })
        }
        (None, Some(name)) => {
            let generated = generate(&SyntheticSpec {
                name,
                mode: match s.samples {
                    Some(n) => SampleMode::Samples(n),
                    None => SampleMode::Analytic,
                },
                seed: s.seed,
            })?;
            let mut schema = generated.schema.ok_or_else(|| {
                AuditError::InvalidSchema(format!(
                    "generator {name} is not an audit scenario; use the pid subcommand"
                ))
            })?;
            if let Some(p) = &s.protected {
                schema.protected = p.clone();
            }
            if let Some(d) = &s.decision {
                schema.decision = d.clone();
            }
            if let Some(f) = &s.features {
                schema.features = f.clone();
            }
            schema.validate()?;
            let dist = match generated.data {
                GeneratedData::Analytic(d) => apply_smoothing(&d, s.smoothing)?,
                GeneratedData::Rows(table) => data::estimate_joint(&table, &schema, s.smoothing)?,
            };
            Ok(ResolvedInput { dist, schema })
        }
        (None, None) => Err(AuditError::InvalidArgument(
            "one of --input or --generate is required".into(),
        )),
    }
}

/// Builds a model oracle from an `--oracle` specification.
pub fn parse_oracle_spec(
    spec: &str,
    features: Vec<String>,
    decision_column: &str,
    timeout: Duration,
) -> Result<ModelOracle> {
    if let Some(name) = spec.strip_prefix("builtin:") {
        ModelOracle::builtin(name, features)
    } else if let Some(path) = spec.strip_prefix("table:") {
        ModelOracle::from_table_csv(Path::new(path), features, decision_column)
    } else if let Some(cmd) = spec.strip_prefix("exec:") {
        let parts: Vec<String> = cmd.split_whitespace().map(str::to_string).collect();
        ModelOracle::external(parts, features, timeout)
    } else {
        Err(AuditError::Oracle(format!(
            "oracle spec {spec:?} must start with builtin:, table:, or exec:"
        )))
    }
}

pub fn cmd_audit(args: &AuditArgs) -> Result<i32> {
    let settings = AuditSettings::resolve(args)?;
    let started = Instant::now();
    let input = resolve_audit_input(&settings)?;
    let load_ms = started.elapsed().as_secs_f64() * 1e3;

    let cfg = settings.audit_config();
    let attribution_started = Instant::now();
    let report = match settings.mode {
        AuditMode::Distributional => {
            attribution::potential_contributions(&input.dist, &input.schema, &cfg)?
        }
        AuditMode::Interventional => {
            let spec = settings.oracle.as_deref().ok_or_else(|| {
                AuditError::InvalidArgument("interventional mode requires --oracle".into())
            })?;
            let oracle = parse_oracle_spec(
                spec,
                input.schema.features.clone(),
                &input.schema.decision,
                settings.oracle_timeout,
            )?;
            attribution::interventional_contributions(&input.dist, &oracle, &input.schema, &cfg)?
        }
    };
    let attribution_ms = attribution_started.elapsed().as_secs_f64() * 1e3;

    let mut timings = BTreeMap::new();
    timings.insert("load_ms".to_string(), load_ms);
    timings.insert("attribution_ms".to_string(), attribution_ms);
    timings.insert(
        "total_ms".to_string(),
        started.elapsed().as_secs_f64() * 1e3,
    );
    let envelope =
        ReportEnvelope::from_attribution(&report, settings.echo(&input.schema), timings);

    std::fs::create_dir_all(&settings.out_dir)?;
    std::fs::write(settings.out_dir.join("report.json"), envelope.to_json()?)?;
    let text = envelope.render_text();
    std::fs::write(settings.out_dir.join("report.txt"), &text)?;
    if settings.plot_data {
        data::write_csv(
            settings.out_dir.join("subsets.csv"),
            &envelope.subsets_plot_table(),
        )?;
        data::write_csv(
            settings.out_dir.join("features.csv"),
            &envelope.features_plot_table(),
        )?;
    }
    print!("{text}");
    Ok(if report.has_warnings() { 2 } else { 0 })
}

fn resolve_triple_input(
    input: &Option<PathBuf>,
    generator: &Option<String>,
    samples: Option<u64>,
    seed: u64,
    smoothing: f64,
    z: &str,
    a: &str,
    b: &[String],
) -> Result<JointDistribution> {
    let schema = AuditSchema {
        protected: z.to_string(),
        decision: a.to_string(),
        features: b.to_vec(),
        bins: HashMap::new(),
        binning: BinningStrategy::Quantile,
    };
    schema.validate()?;
    match (input, generator) {
        (Some(path), _) => {
            let (table, _) = data::load_csv(path, &schema)?;
            data::estimate_joint(&table, &schema, smoothing)
        }
        (None, Some(name)) => {
            let generated = generate(&SyntheticSpec {
                name: name.parse()?,
                mode: match samples {
                    Some(n) => SampleMode::Samples(n),
                    None => SampleMode::Analytic,
                },
                seed,
            })?;
            match generated.data {
                GeneratedData::Analytic(d) => apply_smoothing(&d, smoothing),
                GeneratedData::Rows(table) => data::estimate_joint(&table, &schema, smoothing),
            }
        }
        (None, None) => Err(AuditError::InvalidArgument(
            "one of --input or --generate is required".into(),
        )),
    }
}

pub fn cmd_pid(args: &PidArgs) -> Result<i32> {
    let dist = resolve_triple_input(
        &args.input,
        &args.generate,
        args.samples,
        args.seed,
        args.smoothing,
        &args.z,
        &args.a,
        &args.b,
    )?;
    let (scoped, b_name): (JointDistribution, String) = if args.b.len() == 1 {
        (dist, args.b[0].clone())
    } else {
        let refs: Vec<&str> = args.b.iter().map(String::as_str).collect();
        (dist.group(&refs, "__b")?, "__b".to_string())
    };
    let result = pid::decompose(&scoped, &args.z, &args.a, &b_name, &SolverConfig::default())?;

    println!("uni_a_given_b: {} bits", result.uni_a_given_b);
    println!("uni_b_given_a: {} bits", result.uni_b_given_a);
    println!("red:           {} bits", result.red);
    println!("syn:           {} bits", result.syn);
    println!("total:         {} bits", result.total);
    println!("identity residual: {:.3e}", result.identity_residual());
    println!(
        "converged: {} (iterations {}, gap estimate {:.3e})",
        result.converged, result.solver_iterations, result.objective_gap_estimate
    );

    if let Some(dir) = &args.out_dir {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_value(&result).expect("pid result serializes");
        json["identity_residual"] = serde_json::json!(result.identity_residual());
        std::fs::write(
            dir.join("pid.json"),
            serde_json::to_string_pretty(&json).expect("pid json"),
        )?;
    }
    Ok(if result.converged { 0 } else { 2 })
}

pub fn cmd_generate(args: &GenerateArgs) -> Result<i32> {
    let name: GeneratorName = args.name.parse()?;
    let generated = generate(&SyntheticSpec {
        name,
        mode: if args.analytic {
            SampleMode::Analytic
        } else {
            SampleMode::Samples(args.samples)
        },
        seed: args.seed,
    })?;
    let table: Table = match generated.data {
        GeneratedData::Rows(t) => t,
        GeneratedData::Analytic(d) => pmf_table(&d),
    };
    let out = match &args.out {
        Some(p) => p.clone(),
        None => {
            let dir = args.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
            dir.join(format!("{name}.csv"))
        }
    };
    if let Some(parent) = out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    data::write_csv(&out, &table)?;
    println!("wrote {} rows to {}", table.rows.len(), out.display());
    Ok(0)
}

/// Top-level dispatch; returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            return 1;
        }
    };
    let result = match &cli.command {
        Command::Audit(args) => cmd_audit(args),
        Command::Pid(args) => cmd_pid(args),
        Command::Generate(args) => cmd_generate(args),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", serde_json::json!({ "error": e.to_string() }));
            1
        }
    }
}
