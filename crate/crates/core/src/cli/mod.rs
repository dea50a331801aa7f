//! Experiment driver: `eqloc run <config> [--suite NAME]... [--out DIR]
//! [--seed N] [--list-suites]`.
//!
//! Exit status 0 when every selected check passes, 1 on a failed check and
//! 2 on a configuration error. The output directory receives `report.json`
//! and one `<suite>.csv` per suite.

pub mod config;
mod suites;

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
pub use config::{ExperimentConfig, SUITES};

/// Environment variable overriding the output directory of the config.
pub const OUT_DIR_ENV: &str = "EQLOC_OUT_DIR";

pub const CSV_HEADER: [&str; 11] =
    ["suite", "experiment", "param_name", "param_value", "re", "im", "abs_err", "rel_err", "oracle_re", "oracle_im", "pass"];

#[derive(Debug, Parser)]
#[command(name = "eqloc", version, about = "Regularized integrals of equivariant forms: direct, localized and distributional")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run verification suites from a config file.
    Run {
        #[arg(required_unless_present = "list_suites")]
        config: Option<PathBuf>,
        /// Restrict to the named suite (repeatable).
        #[arg(long = "suite", value_name = "NAME")]
        suites: Vec<String>,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        list_suites: bool,
    },
}

/// One checked quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub suite: String,
    pub experiment: String,
    pub param_name: String,
    pub param_value: String,
    pub value: Complex64,
    /// Numerical error estimate of `value`.
    pub error_estimate: f64,
    pub oracle: Option<Complex64>,
    pub abs_err: Option<f64>,
    pub rel_err: Option<f64>,
    pub tolerance_name: String,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub details: Option<serde_json::Value>,
}

impl Record {
    pub fn new(experiment: impl Into<String>, param_name: impl Into<String>, param_value: impl Into<String>) -> Self {
        Record {
            suite: String::new(),
            experiment: experiment.into(),
            param_name: param_name.into(),
            param_value: param_value.into(),
            value: Complex64::new(0.0, 0.0),
            error_estimate: 0.0,
            oracle: None,
            abs_err: None,
            rel_err: None,
            tolerance_name: String::new(),
            tolerance: f64::NAN,
            pass: false,
            note: None,
            details: None,
        }
    }

    pub fn value(mut self, v: Complex64, err: f64) -> Self {
        self.value = v;
        self.error_estimate = err;
        self
    }

    pub fn real(self, v: f64, err: f64) -> Self {
        self.value(Complex64::new(v, 0.0), err)
    }

    /// Fills the oracle columns.
    pub fn oracle(mut self, o: Complex64) -> Self {
        let abs = (self.value - o).norm();
        self.oracle = Some(o);
        self.abs_err = Some(abs);
        self.rel_err = Some(if o.norm() > 0.0 { abs / o.norm() } else { abs });
        self
    }

    pub fn check(mut self, tolerance_name: &str, tolerance: f64, pass: bool) -> Self {
        self.tolerance_name = tolerance_name.into();
        self.tolerance = tolerance;
        self.pass = pass;
        self
    }

    pub fn note(mut self, n: impl Into<String>) -> Self {
        self.note = Some(n.into());
        self
    }

    pub fn failed(experiment: impl Into<String>, param_name: &str, param_value: &str, err: &Error) -> Self {
        let mut r = Record::new(experiment, param_name, param_value).check("error", 0.0, false);
        r.value = Complex64::new(f64::NAN, f64::NAN);
        r.error_estimate = f64::NAN;
        r.note = Some(err.to_string());
        r
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub passed: bool,
    pub wall_ms: f64,
    pub records: Vec<Record>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub name: String,
    pub manifold: String,
    pub seed: u64,
    /// FNV-1a digest of the config text.
    pub config_digest: String,
    pub suites: Vec<SuiteReport>,
    pub passed: bool,
    pub n_records: usize,
    pub n_failed: usize,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ u64::from(*b)).wrapping_mul(0x0000_0100_0000_01b3))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// CSV rows in the fixed column order of [`CSV_HEADER`].
pub fn write_csv(path: &Path, records: &[Record]) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("cannot write {}: {e}", path.display()));
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    w.write_record(CSV_HEADER).map_err(io)?;
    for r in records {
        w.write_record([
            r.suite.clone(),
            r.experiment.clone(),
            r.param_name.clone(),
            r.param_value.clone(),
            r.value.re.to_string(),
            r.value.im.to_string(),
            fmt_opt(r.abs_err.or(Some(r.error_estimate))),
            fmt_opt(r.rel_err),
            fmt_opt(r.oracle.map(|o| o.re)),
            fmt_opt(r.oracle.map(|o| o.im)),
            r.pass.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

/// Runs the selected suites and writes the outputs. Configuration problems
/// are returned as errors; failed checks are recorded in the report.
pub fn run(config_path: &Path, suites: &[String], out: Option<&Path>, seed: Option<u64>) -> Result<(RunReport, PathBuf)> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", config_path.display())))?;
    let mut cfg = ExperimentConfig::from_toml(&text)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    for s in suites {
        if !SUITES.contains(&s.as_str()) {
            return Err(Error::Config(format!("unknown suite `{s}`; known suites: {}", SUITES.join(", "))));
        }
    }
    let m = cfg.manifold.build().map_err(|e| Error::Config(format!("manifold: {e}")))?;
    cfg.validate(&m)?;
    let ctx = suites::Context::new(&cfg, m)?;
    let out_dir = out
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .or_else(|| cfg.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from("out").join(&cfg.name));
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Config(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut reports = Vec::new();
    for name in cfg.selected(suites) {
        let t0 = Instant::now();
        let mut records = ctx.run_suite(&name);
        for r in &mut records {
            r.suite = name.clone();
        }
        records.sort_by(|a, b| a.experiment.cmp(&b.experiment));
        write_csv(&out_dir.join(format!("{name}.csv")), &records)?;
        reports.push(SuiteReport {
            passed: records.iter().all(|r| r.pass),
            name,
            wall_ms: t0.elapsed().as_secs_f64() * 1e3,
            records,
        });
    }
    let n_records = reports.iter().map(|s| s.records.len()).sum();
    let n_failed = reports.iter().flat_map(|s| &s.records).filter(|r| !r.pass).count();
    let report = RunReport {
        name: cfg.name.clone(),
        manifold: ctx.manifold_name(),
        seed: cfg.seed,
        config_digest: format!("{:016x}", fnv1a(text.as_bytes())),
        passed: n_failed == 0,
        suites: reports,
        n_records,
        n_failed,
    };
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(out_dir.join("report.json"), json)
        .map_err(|e| Error::Config(format!("cannot write report.json: {e}")))?;
    Ok((report, out_dir))
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let Command::Run { config, suites, out, seed, list_suites } = cli.command;
    if list_suites {
        let mut o = std::io::stdout().lock();
        for s in SUITES {
            let _ = writeln!(o, "{s}");
        }
        return 0;
    }
    let config = config.expect("clap enforces the config argument");
    match run(&config, &suites, out.as_deref(), seed) {
        Ok((report, dir)) => {
            for s in &report.suites {
                let failed = s.records.iter().filter(|r| !r.pass).count();
                println!(
                    "{:<9} {}  {} records, {failed} failed, {:.0} ms",
                    s.name,
                    if s.passed { "PASS" } else { "FAIL" },
                    s.records.len(),
                    s.wall_ms
                );
                for r in s.records.iter().filter(|r| !r.pass) {
                    println!(
                        "    {} [{}={}] {} {}",
                        r.experiment,
                        r.param_name,
                        r.param_value,
                        r.tolerance_name,
                        r.note.as_deref().unwrap_or("")
                    );
                }
            }
            println!("report: {}", dir.join("report.json").display());
            if report.passed {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("eqloc: {e}");
            2
        }
    }
}
