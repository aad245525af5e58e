//! Subcommand dispatch, run checks and the JSON run report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use ph_core::scenario::{Scenario, ScenarioPlant};
use ph_core::sim::{simulate, Integrator, SimOptions, Trajectory};
use ph_core::verify::{self, Bound, CheckEntry, CheckReport};
use ph_core::Error;

use crate::args::{CheckKind, Cli, Command, RunArgs, VerifyArgs};
use crate::config::{parse_config, ScenarioConfig, StepChoice};
use crate::error::CliError;
use crate::output::{csv_precision, emit_plot_data, write_file};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub bound_kind: &'static str,
    pub pass: bool,
}

impl CheckOutcome {
    fn from_entry(check: &str, e: &CheckEntry) -> Self {
        Self {
            check: check.to_string(),
            name: e.name.clone(),
            value: e.value,
            bound: e.bound,
            bound_kind: match e.kind {
                Bound::AtMost => "at_most",
                Bound::AtLeast => "at_least",
            },
            pass: e.pass(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: Option<String>,
    pub status: String,
    pub exit_code: i32,
    pub checks: Vec<CheckOutcome>,
    /// File names relative to the output directory.
    pub files: Vec<String>,
    pub wall_clock_s: f64,
    pub dt: Option<f64>,
    pub steps: Option<usize>,
    pub integrator: Option<String>,
    pub notes: Vec<String>,
    pub config: ScenarioConfig,
    #[serde(skip)]
    pub out_dir: PathBuf,
}

impl RunReport {
    fn new(command: &str, config: ScenarioConfig, out_dir: PathBuf) -> Self {
        Self {
            command: command.to_string(),
            scenario: config.scenario.clone(),
            status: "ok".into(),
            exit_code: 0,
            checks: Vec::new(),
            files: Vec::new(),
            wall_clock_s: 0.0,
            dt: None,
            steps: None,
            integrator: None,
            notes: Vec::new(),
            config,
            out_dir,
        }
    }

    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    fn add_file(&mut self, path: &Path) {
        if let Some(name) = path.file_name() {
            self.files.push(name.to_string_lossy().into_owned());
        }
    }

    fn finish(&mut self, start: Instant) -> Result<(), CliError> {
        self.wall_clock_s = start.elapsed().as_secs_f64();
        self.files.push("report.json".into());
        let text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        write_file(&self.out_dir, "report.json", |w| {
            use std::io::Write;
            writeln!(w, "{text}")
        })?;
        Ok(())
    }
}

/// Config file (or defaults) with the command-line overrides applied.
pub fn resolve_config(args: &RunArgs) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match &args.config {
        Some(p) => parse_config(p)?,
        None => ScenarioConfig::default(),
    };
    if let Some(s) = &args.scenario {
        cfg.scenario = Some(s.clone());
    }
    if let Some(n) = args.grid_n {
        cfg.plate.n1 = n;
        cfg.plate.n2 = n;
        cfg.beam.n = n;
    }
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    if let Some(t) = args.t_final {
        cfg.t_final = t;
    }
    if let Some(k) = args.log_every {
        cfg.log_every = k;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.to_string_lossy().into_owned());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn prepare_out(cfg: &ScenarioConfig, fallback: &str) -> Result<PathBuf, CliError> {
    let dir = PathBuf::from(cfg.out.clone().unwrap_or_else(|| format!("runs/{fallback}")));
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

fn write_resolved(report: &mut RunReport) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(&report.config).map_err(|e| CliError::Io(e.to_string()))?;
    let path = write_file(&report.out_dir, "config_resolved.json", |w| {
        use std::io::Write;
        writeln!(w, "{text}")
    })?;
    report.add_file(&path);
    Ok(())
}

/// Runs the command and writes its artifacts. Blow-ups and failed
/// verification still produce a report; their exit code is on it.
pub fn run_cli(cli: &Cli) -> Result<RunReport, CliError> {
    match &cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Verify(a) => run_verify(a),
    }
}

pub fn run(cli: &Cli) -> i32 {
    match run_cli(cli) {
        Ok(r) => {
            print_summary(&r);
            r.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn print_summary(r: &RunReport) {
    let scenario = r.scenario.as_deref().unwrap_or("-");
    println!("{} {scenario}: {}", r.command, r.status);
    for c in &r.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        println!("  {verdict} {}: {} = {:.3e} (bound {:.3e})", c.check, c.name, c.value, c.bound);
    }
    println!("  wrote {} files to {}", r.files.len(), r.out_dir.display());
}

pub fn run_simulate(args: &RunArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = resolve_config(args)?;
    let params = cfg.to_params()?;
    let digits = csv_precision()?;
    let kind = params.kind;
    let scenario = Scenario::build(params)?;
    let dt = match cfg.dt {
        StepChoice::Auto => scenario.auto_dt()?,
        StepChoice::Fixed(v) => v,
    };
    let integrator = scenario.params.integrator;
    let opts = SimOptions {
        t_final: cfg.t_final,
        dt,
        log_every: cfg.log_every,
        integrator,
    };
    let out = prepare_out(&cfg, kind.name())?;
    let mut report = RunReport::new("simulate", cfg, out);
    report.notes = scenario.notes.clone();
    report.integrator = Some(
        match integrator {
            Integrator::Rk4 => "rk4",
            Integrator::Exponential => "exponential",
        }
        .into(),
    );
    write_resolved(&mut report)?;

    match simulate(&scenario.closed_loop, scenario.initial.clone(), &opts) {
        Ok(traj) => {
            for f in emit_plot_data(&scenario, &traj, &report.out_dir, digits)? {
                report.add_file(&f);
            }
            report.dt = Some(traj.dt);
            report.steps = Some(traj.steps);
            report.checks = run_checks(&scenario, &traj)
                .iter()
                .map(|e| CheckOutcome::from_entry("run", e))
                .collect();
        }
        Err(e @ Error::BlowUp { .. }) => {
            report.status = "blow-up".into();
            report.exit_code = 2;
            report.notes.push(e.to_string());
            eprintln!("error: {e}");
        }
        Err(e) => return Err(e.into()),
    }
    report.finish(start)?;
    Ok(report)
}

/// Tolerances applied to a finished run: dissipation, Casimir drift and
/// regulation for closed loops, energy conservation for open ones.
pub fn run_checks(scenario: &Scenario, traj: &Trajectory) -> Vec<CheckEntry> {
    let cl = &scenario.closed_loop;
    let first = &traj.records[0];
    let last = traj.records.last().unwrap_or(first);
    let mut out = Vec::new();
    if !scenario.params.kind.is_closed_loop() {
        let rel = (last.h - first.h).abs() / first.h.abs().max(f64::MIN_POSITIVE);
        out.push(CheckEntry::at_most("relative energy change", rel, 1e-5));
        return out;
    }
    let max_dhcl = traj.records.iter().map(|r| r.dhcl).fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckEntry::at_most(
        "max dHcl",
        max_dhcl,
        1e-9 * first.hcl.max(1.0),
    ));
    let c0 = cl.casimirs(&scenario.initial);
    let scale = c0.iter().fold(1.0f64, |m, c| m.max(c.abs()));
    let drift = traj
        .records
        .iter()
        .flat_map(|r| r.casimir_drift.iter())
        .fold(0.0f64, |m, d| m.max(d.abs()));
    out.push(CheckEntry::at_most("max Casimir drift", drift, 1e-8 * scale));
    match &scenario.plant {
        ScenarioPlant::Beam(b) => {
            let w = &traj.final_state.plant.w;
            let target = cl.target();
            for (i, k) in b.actuator_nodes().into_iter().enumerate() {
                out.push(CheckEntry::at_most(
                    format!("|w(A{}) - target| at T", i + 1),
                    (w[k] - target[k]).abs(),
                    0.01 * target[k].abs().max(0.01),
                ));
            }
        }
        ScenarioPlant::Plate(_) => {
            out.push(CheckEntry::at_most("eq_error at T", last.eq_error, 0.15));
            let reduction = first.eq_error / last.eq_error.max(f64::MIN_POSITIVE);
            out.push(CheckEntry::at_least("eq_error reduction factor", reduction, 5.0));
        }
    }
    out
}

fn suite(kind: CheckKind, cfg: &ScenarioConfig) -> Result<CheckReport, CliError> {
    Ok(match kind {
        CheckKind::Casimir => verify::casimir_suite(&cfg.plate_params(), &cfg.beam_params())?,
        CheckKind::Decomposition => verify::decomposition_convergence()?,
        CheckKind::Gradient => verify::gradient_consistency()?,
        CheckKind::Power => verify::power_identity()?,
    })
}

pub fn run_verify(args: &VerifyArgs) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let cfg = resolve_config(&args.common)?;
    if cfg.scenario.is_some() {
        cfg.kind()?;
    }
    let checks: Vec<CheckKind> = if args.checks.is_empty() {
        CheckKind::ALL.to_vec()
    } else {
        args.checks.clone()
    };
    let out = prepare_out(&cfg, "verify")?;
    let mut report = RunReport::new("verify", cfg, out);
    write_resolved(&mut report)?;
    for kind in checks {
        let rep = suite(kind, &report.config)?;
        let path = write_file(&report.out_dir, &format!("verify_{}.csv", kind.name()), |w| rep.write_csv(w))?;
        report.add_file(&path);
        report
            .checks
            .extend(rep.entries.iter().map(|e| CheckOutcome::from_entry(kind.name(), e)));
        if !rep.passes() {
            report.status = "verification-failed".into();
            report.exit_code = 3;
        }
    }
    report.finish(start)?;
    Ok(report)
}
