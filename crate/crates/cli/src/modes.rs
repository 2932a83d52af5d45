//! Run orchestration: one output directory per run.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qsteer::decoherence::tabulate;
use qsteer::feedback::{ensemble_average, integrate_master, simulate_trajectory, transition_time, TrajectoryRecord};
use qsteer::io::{write_control_log, write_curve, write_file, write_trajectory};
use qsteer::state::{fidelity_bloch, pure_state, PureStateAngle};
use qsteer::targeting::{run_composite, run_targeting, ControlLog};

use crate::config::{parse_config, render, FeedbackRun, Method, Mode, Plan};
use crate::error::CliError;

pub const OUT_ROOT_ENV: &str = "QSTEER_OUT_ROOT";
pub const RESOLVED_CONFIG: &str = "resolved_config.toml";
pub const FAILED_MARKER: &str = "FAILED";
pub const SUMMARY: &str = "summary.txt";

/// One invocation of the command line.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub mode: Mode,
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub out_dir: PathBuf,
    pub summary: String,
    /// All thresholds named by the configuration were met.
    pub success: bool,
}

/// `--out`, else `$QSTEER_OUT_ROOT/<mode>`, else `./qsteer-out/<mode>`.
pub fn output_dir(mode: Mode, out: Option<&Path>) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("qsteer-out"));
            root.join(mode.name())
        }
    }
}

/// Parses, validates and executes `spec`. Configuration errors leave the
/// filesystem untouched; failures after the output directory exists leave a
/// `FAILED` marker next to whatever was written.
pub fn run(spec: &RunSpec) -> Result<Outcome, CliError> {
    let text = match &spec.config {
        Some(p) => fs::read_to_string(p).map_err(|e| CliError::Parse(format!("cannot read {}: {e}", p.display())))?,
        None => String::new(),
    };
    let (doc, plan) = parse_config(&text, spec.mode, &spec.overrides, spec.seed)?;
    let resolved = render(&doc)?;

    let dir = output_dir(spec.mode, spec.out.as_deref());
    fs::create_dir_all(&dir)?;
    let marker = dir.join(FAILED_MARKER);
    if marker.exists() {
        fs::remove_file(&marker)?;
    }
    fs::write(dir.join(RESOLVED_CONFIG), resolved)?;

    match execute(&plan, &dir) {
        Ok((summary, success)) => {
            fs::write(dir.join(SUMMARY), &summary)?;
            if !success {
                fs::write(&marker, format!("thresholds not met\n{summary}"))?;
            }
            Ok(Outcome { out_dir: dir, summary, success })
        }
        Err(e) => {
            fs::write(&marker, format!("{e}\n"))?;
            Err(e)
        }
    }
}

fn execute(plan: &Plan, dir: &Path) -> Result<(String, bool), CliError> {
    match plan {
        Plan::Decoherence { regime, spectral, dt, n } => {
            let curve = tabulate(*regime, spectral, *dt, *n)?;
            write_file(&dir.join("curve.csv"), |w| write_curve(w, &curve))?;
            let last = curve.values().last().copied().unwrap_or(0.0);
            Ok((format!("regime={} points={} g_last={}\n", regime.name(), curve.len(), last), true))
        }
        Plan::Target(cfg) => {
            let log = run_targeting(cfg)?;
            write_file(&dir.join("control_log.csv"), |w| write_control_log(w, &log))?;
            Ok((targeting_summary(&log), log.converged))
        }
        Plan::Composite(leg1, leg2) => {
            let log = run_composite(leg1, leg2)?;
            write_file(&dir.join("control_log.csv"), |w| write_control_log(w, &log))?;
            Ok((targeting_summary(&log), log.converged))
        }
        Plan::Feedback(run) => {
            let (name, record) = feedback_record(run)?;
            write_file(&dir.join(name), |w| write_trajectory(w, &record, &run.target))?;
            let met = feedback_met(run, &record);
            Ok((format!("{}\n", record.summary_line(&run.target)), met))
        }
        Plan::Compare { open_loop, feedback } => {
            let log = run_targeting(open_loop)?;
            write_file(&dir.join("open_loop.csv"), |w| write_control_log(w, &log))?;
            let (_, record) = feedback_record(feedback)?;
            write_file(&dir.join("feedback.csv"), |w| write_trajectory(w, &record, &feedback.target))?;
            let summary = compare_summary(&log, &record, &feedback.target);
            Ok((summary, log.converged && feedback_met(feedback, &record)))
        }
    }
}

fn targeting_summary(log: &ControlLog) -> String {
    format!(
        "{}\nconverged={} max_abs_pulse_area={} transition_time={}\n",
        log.summary_line(),
        log.converged,
        log.max_abs_pulse_area(),
        log.transition_steps.map_or_else(|| "none".to_string(), |k| (k as f64 * log.dt).to_string()),
    )
}

fn feedback_record(run: &FeedbackRun) -> Result<(&'static str, TrajectoryRecord), CliError> {
    let rho0 = pure_state(&run.initial);
    let mut cfg = run.cfg;
    if !run.with_feedback {
        cfg.lambda = 0.0;
    }
    Ok(match run.method {
        Method::Trajectory => ("trajectory.csv", simulate_trajectory(&rho0, &cfg, run.t_end)?),
        Method::Ensemble => ("ensemble.csv", ensemble_average(&cfg, &rho0, run.t_end)?),
        Method::Master => ("master.csv", integrate_master(&rho0, &run.cfg, run.t_end, run.with_feedback)?),
    })
}

fn feedback_met(run: &FeedbackRun, record: &TrajectoryRecord) -> bool {
    match (run.fidelity_threshold, record.last()) {
        (None, _) => true,
        (Some(th), Some(last)) => fidelity_bloch(last, &run.target.bloch()) >= th,
        (Some(_), None) => false,
    }
}

fn compare_summary(log: &ControlLog, record: &TrajectoryRecord, target: &PureStateAngle) -> String {
    let open_t0 = log.transition_steps.map_or_else(|| "none".to_string(), |k| (k as f64 * log.dt).to_string());
    let fb_t0 = transition_time(record, target).map_or_else(|| "none".to_string(), |t| t.to_string());
    let fb_final = record.last().map_or(f64::NAN, |v| fidelity_bloch(v, &target.bloch()));
    let mut s = String::new();
    writeln!(s, "open_loop t0={open_t0} final_fidelity={} units=rabi", log.final_fidelity).unwrap();
    writeln!(s, "feedback t0={fb_t0} final_fidelity={fb_final} units=1/gamma").unwrap();
    s
}
