//! Batch driver for the looplab identity checks: flag parsing, report
//! assembly and the JSON and Markdown report formats.

use clap::{ArgAction, Parser, ValueEnum};
use looplab::geometry::ConnectionPreset;
use looplab::suite::{
    convergence_study, default_grid, parse_group, registry, run_check, CheckConfig, CheckResult, ConvergencePoint,
    SuiteError, REPORT_VERSION,
};
use looplab::FdConfig;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::PathBuf;

/// Exit code when every selected check passes.
pub const EXIT_PASS: i32 = 0;
/// Exit code when at least one check fails.
pub const EXIT_FAIL: i32 = 1;
/// Exit code for usage and configuration errors.
pub const EXIT_USAGE: i32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Md,
}

/// Run identity checks for Chern–Simons forms on loop groups and report residuals.
#[derive(Clone, Debug, Parser)]
#[command(name = "verify", version)]
pub struct Cli {
    /// Run every registered check (the default when no --check is given).
    #[arg(long, conflicts_with = "check")]
    pub all: bool,
    /// Run the named check; repeatable.
    #[arg(long = "check", value_name = "NAME", action = ArgAction::Append)]
    pub check: Vec<String>,
    /// Matrix group: su2, su3, …
    #[arg(long, default_value = "su2")]
    pub group: String,
    /// Samples per loop N (even).
    #[arg(long, default_value_t = 256)]
    pub samples: usize,
    /// Steps S of loop families.
    #[arg(long, default_value_t = 256)]
    pub steps: usize,
    /// Finite-difference step h.
    #[arg(long = "fd-step", default_value_t = 1e-3)]
    pub fd_step: f64,
    /// Master seed.
    #[arg(long, default_value_t = 20_240_601)]
    pub seed: u64,
    /// Level of the invariant pairing.
    #[arg(long, default_value_t = 1.0)]
    pub level: f64,
    /// Connection preset: zero, mc or scaled:α.
    #[arg(long, default_value = "scaled:0.7", value_parser = parse_preset)]
    pub connection: ConnectionPreset,
    /// Random trials per check.
    #[arg(long, default_value_t = 32)]
    pub trials: usize,
    /// Transport parameter x (C16 defaults to 1, C17 to 0).
    #[arg(long)]
    pub x: Option<f64>,
    /// Report format.
    #[arg(long, value_enum, default_value = "json")]
    pub report: ReportFormat,
    /// Output path; standard output when absent.
    #[arg(short = 'o', long = "output", value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Run a convergence study of the named check instead of the suite.
    #[arg(long, value_name = "NAME")]
    pub convergence: Option<String>,
}

fn parse_preset(s: &str) -> Result<ConnectionPreset, String> {
    s.parse()
}

impl Cli {
    /// The suite configuration described by the flags.
    pub fn config(&self) -> Result<CheckConfig, SuiteError> {
        let cfg = CheckConfig {
            n: parse_group(&self.group)?,
            samples: self.samples,
            steps: self.steps,
            fd: FdConfig { h: self.fd_step, ..FdConfig::default() },
            seed: self.seed,
            level: self.level,
            connection: self.connection,
            trials: self.trials,
            x: self.x,
            ..CheckConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Selected check names in registry order, validated against the registry.
    pub fn selected_checks(&self) -> Result<Vec<String>, SuiteError> {
        let reg = registry();
        if self.all || self.check.is_empty() {
            return Ok(reg.iter().map(|s| s.name.to_string()).collect());
        }
        for c in &self.check {
            if !reg.iter().any(|s| s.name.eq_ignore_ascii_case(c)) {
                return Err(SuiteError::UnknownCheck(c.clone()));
            }
        }
        Ok(reg
            .iter()
            .filter(|s| self.check.iter().any(|c| s.name.eq_ignore_ascii_case(c)))
            .map(|s| s.name.to_string())
            .collect())
    }
}

/// A suite report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: u32,
    pub config: CheckConfig,
    pub results: Vec<CheckResult>,
}

impl Report {
    pub fn new(config: CheckConfig, results: Vec<CheckResult>) -> Self {
        Self { version: REPORT_VERSION, config, results }
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

/// A convergence-study report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub version: u32,
    pub config: CheckConfig,
    pub check: String,
    pub points: Vec<ConvergencePoint>,
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

pub fn parse_report(text: &str) -> Result<Report, serde_json::Error> {
    serde_json::from_str(text)
}

fn fmt_sci(x: f64) -> String {
    if x == 0.0 {
        "0".into()
    } else {
        format!("{x:.3e}")
    }
}

fn config_lines(out: &mut String, cfg: &CheckConfig) {
    let _ = writeln!(out, "| parameter | value |\n|---|---|");
    let rows = [
        ("group", cfg.group_label()),
        ("N", cfg.samples.to_string()),
        ("S", cfg.steps.to_string()),
        ("h", format!("{:e}", cfg.fd.h)),
        ("Richardson", cfg.fd.richardson.to_string()),
        ("seed", cfg.seed.to_string()),
        ("level", cfg.level.to_string()),
        ("connection", cfg.connection.to_string()),
        ("trials", cfg.trials.to_string()),
        ("x", cfg.x.map_or("check default".into(), |x| x.to_string())),
        ("modes", cfg.modes.to_string()),
        ("amplitude", cfg.amplitude.to_string()),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "| {k} | {v} |");
    }
}

/// Markdown rendering of a suite report: configuration, then one row per check
/// with the identity it verifies.
pub fn to_markdown(report: &Report) -> String {
    let mut out = String::new();
    let passed = report.results.iter().filter(|r| r.pass).count();
    let _ = writeln!(out, "# Identity check report\n");
    let _ = writeln!(out, "Report version {}. {passed} of {} checks pass.\n", report.version, report.results.len());
    let _ = writeln!(out, "## Configuration\n");
    config_lines(&mut out, &report.config);
    let _ = writeln!(out, "\n## Results\n");
    let _ = writeln!(
        out,
        "| check | title | identity | class | trials | skipped | max rel. residual | tolerance | thinness defect | result |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|---|---|---|---|---|");
    for r in &report.results {
        let _ = writeln!(
            out,
            "| {} | {} | `{}` | {} | {} | {} | {} | {:.0e} | {} | {}{} |",
            r.name,
            r.title,
            r.anchor.replace('|', "\\|"),
            r.class.label(),
            r.trials,
            r.skipped,
            fmt_sci(r.max_rel_residual),
            r.tolerance,
            r.thinness_defect.map_or("".into(), fmt_sci),
            if r.pass { "PASS" } else { "FAIL" },
            if r.under_resolved { " (under-resolved)" } else { "" },
        );
    }
    let aux: Vec<&CheckResult> = report.results.iter().filter(|r| !r.aux.is_empty()).collect();
    if !aux.is_empty() {
        let _ = writeln!(out, "\n## Auxiliary measurements\n");
        for r in aux {
            let items: Vec<String> = r.aux.iter().map(|(k, v)| format!("{k} = {}", fmt_sci(*v))).collect();
            let _ = writeln!(out, "- {}: {}", r.name, items.join(", "));
        }
    }
    if report.results.iter().any(|r| r.name == "C15" || r.name == "C16") {
        let _ = writeln!(
            out,
            "\nThin-family statements are tested on rotation and reparametrization families only; \
             vanishing on every thin family is not finitely checkable."
        );
    }
    out
}

/// Markdown rendering of a convergence study.
pub fn convergence_markdown(report: &ConvergenceReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Convergence study of {}\n", report.check);
    config_lines(&mut out, &report.config);
    let _ = writeln!(out, "\n| N | h | max rel. residual | ratio to previous |\n|---|---|---|---|");
    for p in &report.points {
        let _ = writeln!(
            out,
            "| {} | {:e} | {} | {} |",
            p.samples,
            p.h,
            fmt_sci(p.max_rel_residual),
            p.ratio.map_or("".into(), |r| format!("{r:.3}"))
        );
    }
    out
}

/// Outcome of a CLI invocation: the rendered document and the exit code.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub document: String,
    pub exit_code: i32,
    pub summary: String,
}

/// Runs the selected checks or convergence study described by `cli`.
pub fn execute(cli: &Cli) -> Result<Outcome, SuiteError> {
    let cfg = cli.config()?;
    if let Some(name) = &cli.convergence {
        let spec = looplab::suite::spec(name).ok_or_else(|| SuiteError::UnknownCheck(name.clone()))?;
        let grid = default_grid(spec.name, &cfg)?;
        let points = convergence_study(spec.name, &grid, &cfg)?;
        let config = CheckConfig { fd: FdConfig { richardson: false, ..cfg.fd }, ..cfg };
        let report = ConvergenceReport { version: REPORT_VERSION, config, check: spec.name.into(), points };
        let document = match cli.report {
            ReportFormat::Json => to_json(&report),
            ReportFormat::Md => convergence_markdown(&report),
        };
        let summary = format!("convergence study of {} over {} grid points", spec.name, report.points.len());
        return Ok(Outcome { document, exit_code: EXIT_PASS, summary });
    }
    let names = cli.selected_checks()?;
    let results = names.iter().map(|n| run_check(n, &cfg)).collect::<Result<Vec<_>, _>>()?;
    let report = Report::new(cfg, results);
    let passed = report.results.iter().filter(|r| r.pass).count();
    let summary = format!("{passed} of {} checks pass", report.results.len());
    let document = match cli.report {
        ReportFormat::Json => to_json(&report),
        ReportFormat::Md => to_markdown(&report),
    };
    Ok(Outcome { document, exit_code: if report.all_pass() { EXIT_PASS } else { EXIT_FAIL }, summary })
}
