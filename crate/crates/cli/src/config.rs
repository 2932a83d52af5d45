//! Configuration documents: parsing, overrides, defaults and validation.

use std::f64::consts::PI;

use qsteer::decoherence::{Regime, SpectralConfig};
use qsteer::evolution::ControlAxis;
use qsteer::feedback::FeedbackConfig;
use qsteer::state::PureStateAngle;
use qsteer::targeting::{Arc, Interpolation, TargetingConfig};
use serde::{Deserialize, Deserializer, Serialize};
use toml::{Table, Value};

use crate::error::CliError;
use crate::schema::check_keys;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Decoherence,
    Target,
    Composite,
    Feedback,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Decoherence => "decoherence",
            Mode::Target => "target",
            Mode::Composite => "composite",
            Mode::Feedback => "feedback",
            Mode::Compare => "compare",
        }
    }
}

/// Angle in radians; the config may also write `"pi"`, `"-pi/2"`, `"3pi/4"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Angle(pub f64);

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Angle(x)),
            Raw::Text(s) => parse_angle(&s).map(Angle).ok_or_else(|| serde::de::Error::custom(format!("cannot read angle `{s}`"))),
        }
    }
}

fn parse_angle(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    if let Ok(x) = s.parse() {
        return Some(x);
    }
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.to_string(), d.parse::<f64>().ok()?),
        None => (s.clone(), 1.0),
    };
    let coef = num.strip_suffix("pi")?.trim_end_matches('*');
    let coef = match coef {
        "" | "+" => 1.0,
        "-" => -1.0,
        c => c.parse().ok()?,
    };
    Some(coef * PI / den)
}

/// `"x"`, `"y"` or `[cx, cy]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Axis(pub ControlAxis);

impl<'de> Deserialize<'de> for Axis {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Name(String),
            Pair([f64; 2]),
        }
        match Raw::deserialize(d)? {
            Raw::Name(n) if n.eq_ignore_ascii_case("x") => Ok(Axis(ControlAxis::X)),
            Raw::Name(n) if n.eq_ignore_ascii_case("y") => Ok(Axis(ControlAxis::Y)),
            Raw::Name(n) => Err(serde::de::Error::custom(format!("axis must be \"x\", \"y\" or [cx, cy], got `{n}`"))),
            Raw::Pair([cx, cy]) => ControlAxis::new(cx, cy).map(Axis).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSection {
    pub coupling_gamma: f64,
    #[serde(default = "d_beta0")]
    pub beta0: f64,
    #[serde(default = "d_omega_c")]
    pub omega_c: f64,
    #[serde(default = "d_omega_12")]
    pub omega_12: f64,
    #[serde(default = "d_one")]
    pub spectral_exponent: f64,
}

fn d_beta0() -> f64 {
    1.0
}
fn d_omega_c() -> f64 {
    5.0
}
fn d_omega_12() -> f64 {
    10.0
}
fn d_one() -> f64 {
    1.0
}

impl SpectralSection {
    pub fn config(&self) -> SpectralConfig {
        SpectralConfig {
            coupling_gamma: self.coupling_gamma,
            beta0: self.beta0,
            omega_c: self.omega_c,
            omega_12: self.omega_12,
            spectral_exponent: self.spectral_exponent,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecoherenceSection {
    pub regime: Regime,
    pub dt: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TargetSection {
    pub regime: Regime,
    pub axis: Axis,
    pub n_intermediates: usize,
    pub cycles_per_intermediate: usize,
    pub i_max: f64,
    pub dt: f64,
    pub hold_cycles: usize,
    pub fidelity_threshold: f64,
    pub interpolation: Interpolation,
    pub arc: Arc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_theta: Option<Angle>,
}

impl Default for TargetSection {
    fn default() -> Self {
        Self {
            regime: Regime::Thermal,
            axis: Axis(ControlAxis::Y),
            n_intermediates: 100,
            cycles_per_intermediate: 2,
            i_max: 0.01,
            dt: 0.01,
            hold_cycles: 0,
            fidelity_threshold: 0.99,
            interpolation: Interpolation::Angular,
            arc: Arc::Shorter,
            initial_theta: None,
            target_theta: None,
        }
    }
}

fn in_plane(name: &str, theta: Angle, phi: f64) -> Result<PureStateAngle, CliError> {
    PureStateAngle::new(theta.0, phi).map_err(|e| CliError::Validation(format!("{name}: {e}")))
}

impl TargetSection {
    fn thetas(&self, section: &str) -> Result<(Angle, Angle), CliError> {
        let need = |v: Option<Angle>, key: &str| v.ok_or_else(|| CliError::Validation(format!("missing key `{section}.{key}`")));
        Ok((need(self.initial_theta, "initial_theta")?, need(self.target_theta, "target_theta")?))
    }

    pub fn config(&self, section: &str, spectral: SpectralConfig) -> Result<TargetingConfig, CliError> {
        let (ti, tt) = self.thetas(section)?;
        let phi = self.axis.0.phi();
        let cfg = TargetingConfig {
            regime: self.regime,
            axis: self.axis.0,
            n_intermediates: self.n_intermediates,
            cycles_per_intermediate: self.cycles_per_intermediate,
            i_max: self.i_max,
            dt: self.dt,
            spectral,
            initial: in_plane(&format!("{section}.initial_theta"), ti, phi)?,
            target: in_plane(&format!("{section}.target_theta"), tt, phi)?,
            hold_cycles: self.hold_cycles,
            fidelity_threshold: self.fidelity_threshold,
            interpolation: self.interpolation,
            arc: self.arc,
        };
        cfg.validate().map_err(|e| CliError::Validation(format!("[{section}] {e}")))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Trajectory,
    Ensemble,
    Master,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeedbackSection {
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub eta: f64,
    pub delay: f64,
    pub phi: f64,
    pub dt: f64,
    pub master_dt: f64,
    pub sample_dt: f64,
    pub seed: u64,
    pub n_traj: usize,
    pub t_end: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_theta: Option<Angle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_theta: Option<Angle>,
    pub method: Method,
    pub with_feedback: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_threshold: Option<f64>,
}

impl Default for FeedbackSection {
    fn default() -> Self {
        let d = FeedbackConfig::default();
        Self {
            gamma: d.gamma,
            alpha: None,
            lambda: None,
            eta: d.eta,
            delay: d.delay,
            phi: d.phi,
            dt: d.dt,
            master_dt: d.master_dt,
            sample_dt: d.sample_dt,
            seed: d.seed,
            n_traj: d.n_traj,
            t_end: 10.0,
            initial_theta: None,
            target_theta: None,
            method: Method::Trajectory,
            with_feedback: true,
            fidelity_threshold: None,
        }
    }
}

/// A validated feedback run.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRun {
    pub cfg: FeedbackConfig,
    pub initial: PureStateAngle,
    pub target: PureStateAngle,
    pub t_end: f64,
    pub method: Method,
    pub with_feedback: bool,
    pub fidelity_threshold: Option<f64>,
}

impl FeedbackSection {
    /// Fills `alpha`/`lambda` from the target when absent and validates.
    pub fn resolve(&mut self, section: &str) -> Result<FeedbackRun, CliError> {
        let initial = self.initial_theta.get_or_insert(Angle(PI)).0;
        let target = self.target_theta.ok_or_else(|| CliError::Validation(format!("missing key `{section}.target_theta`")))?.0;
        if self.alpha.is_none() || self.lambda.is_none() {
            let (a, l) = qsteer::feedback::feedback_params_for_target(target, self.gamma)
                .map_err(|e| CliError::Validation(format!("[{section}] {e}; set alpha and lambda explicitly")))?;
            self.alpha.get_or_insert(a);
            self.lambda.get_or_insert(l);
        }
        let cfg = FeedbackConfig {
            gamma: self.gamma,
            alpha: self.alpha.unwrap_or_default(),
            lambda: self.lambda.unwrap_or_default(),
            eta: self.eta,
            delay: self.delay,
            phi: self.phi,
            dt: self.dt,
            master_dt: self.master_dt,
            sample_dt: self.sample_dt,
            seed: self.seed,
            n_traj: self.n_traj,
        };
        let v = |e: qsteer::Error| CliError::Validation(format!("[{section}] {e}"));
        if self.method == Method::Master {
            cfg.validate().map_err(v)?;
        } else {
            cfg.validate_sde().map_err(v)?;
        }
        if self.n_traj < 1 {
            return Err(CliError::Validation(format!("[{section}] n_traj >= 1 violated")));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(CliError::Validation(format!("[{section}] t_end > 0 violated")));
        }
        let phi = self.phi.rem_euclid(std::f64::consts::TAU);
        Ok(FeedbackRun {
            cfg,
            initial: in_plane(&format!("{section}.initial_theta"), Angle(initial), phi)?,
            target: in_plane(&format!("{section}.target_theta"), Angle(target), phi)?,
            t_end: self.t_end,
            method: self.method,
            with_feedback: self.with_feedback,
            fidelity_threshold: self.fidelity_threshold,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompositeSection {
    pub leg1: TargetSection,
    pub leg2: TargetSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CompareSection {
    pub initial_theta: Angle,
    pub target_theta: Angle,
    pub open_loop: TargetSection,
    pub feedback: FeedbackSection,
}

impl Default for CompareSection {
    fn default() -> Self {
        Self { initial_theta: Angle(PI), target_theta: Angle(0.0), open_loop: TargetSection::default(), feedback: FeedbackSection::default() }
    }
}

/// The full document after defaults; written back as `resolved_config.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectral: Option<SpectralSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decoherence: Option<DecoherenceSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<TargetSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub composite: Option<CompositeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedback: Option<FeedbackSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

/// Validated, ready-to-run experiment.
#[derive(Debug, Clone)]
pub enum Plan {
    Decoherence { regime: Regime, spectral: SpectralConfig, dt: f64, n: usize },
    Target(TargetingConfig),
    Composite(TargetingConfig, TargetingConfig),
    Feedback(FeedbackRun),
    Compare { open_loop: TargetingConfig, feedback: FeedbackRun },
}

/// Applies one `key.path=value` override. The value is read as TOML and
/// falls back to a plain string.
pub fn apply_override(table: &mut Table, assignment: &str) -> Result<(), CliError> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| CliError::Parse(format!("override `{assignment}` is not of the form key=value")))?;
    let path: Vec<&str> = path.trim().split('.').collect();
    if path.iter().any(|p| p.is_empty()) {
        return Err(CliError::Parse(format!("override `{assignment}` has an empty key segment")));
    }
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let (last, parents) = path.split_last().expect("non-empty path");
    let mut node = table;
    for p in parents {
        let entry = node.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
        node = entry.as_table_mut().ok_or_else(|| CliError::Parse(format!("override `{assignment}`: `{p}` is not a table")))?;
    }
    node.insert(last.to_string(), value);
    Ok(())
}

fn section<T: for<'de> Deserialize<'de>>(table: &Table, key: &str) -> Result<Option<T>, CliError> {
    match table.get(key) {
        None => Ok(None),
        Some(v) => v.clone().try_into().map(Some).map_err(|e: toml::de::Error| CliError::Validation(format!("[{key}] {}", e.message()))),
    }
}

fn require<T>(v: Option<T>, key: &str, mode: Mode) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Validation(format!("mode `{}` requires section [{key}]", mode.name())))
}

/// Parses, overrides and validates a configuration for `mode`.
pub fn parse_config(text: &str, mode: Mode, overrides: &[String], seed: Option<u64>) -> Result<(Document, Plan), CliError> {
    let mut table: Table = text.parse().map_err(|e: toml::de::Error| CliError::Parse(e.to_string()))?;
    for o in overrides {
        apply_override(&mut table, o)?;
    }
    if let Some(s) = seed {
        let key = if mode == Mode::Compare { "compare.feedback.seed" } else { "feedback.seed" };
        apply_override(&mut table, &format!("{key}={s}"))?;
    }
    check_keys(&table, text)?;
    if let Some(m) = table.get("mode") {
        let declared: Mode = m.clone().try_into().map_err(|_| CliError::Validation(format!("unknown mode {m}")))?;
        if declared != mode {
            return Err(CliError::Validation(format!("config declares mode `{}` but `{}` was requested", declared.name(), mode.name())));
        }
    }

    let spectral: Option<SpectralSection> = section(&table, "spectral")?;
    let mut doc = Document { mode, spectral: None, decoherence: None, target: None, composite: None, feedback: None, compare: None };
    let spectral_cfg = |s: &Option<SpectralSection>| -> Result<SpectralConfig, CliError> {
        let cfg = require(s.as_ref(), "spectral", mode)?.config();
        cfg.validate().map_err(|e| CliError::Validation(format!("[spectral] {e}")))?;
        Ok(cfg)
    };

    let plan = match mode {
        Mode::Decoherence => {
            let sc = spectral_cfg(&spectral)?;
            let d: DecoherenceSection = require(section(&table, "decoherence")?, "decoherence", mode)?;
            if !(d.dt > 0.0 && d.dt.is_finite()) {
                return Err(CliError::Validation("[decoherence] dt > 0 violated".into()));
            }
            if d.n < 1 {
                return Err(CliError::Validation("[decoherence] n >= 1 violated".into()));
            }
            let plan = Plan::Decoherence { regime: d.regime, spectral: sc, dt: d.dt, n: d.n };
            doc.decoherence = Some(d);
            doc.spectral = spectral;
            plan
        }
        Mode::Target => {
            let sc = spectral_cfg(&spectral)?;
            let t: TargetSection = require(section(&table, "target")?, "target", mode)?;
            let cfg = t.config("target", sc)?;
            doc.target = Some(t);
            doc.spectral = spectral;
            Plan::Target(cfg)
        }
        Mode::Composite => {
            let sc = spectral_cfg(&spectral)?;
            let c: CompositeSection = require(section(&table, "composite")?, "composite", mode)?;
            let l1 = c.leg1.config("composite.leg1", sc)?;
            let l2 = c.leg2.config("composite.leg2", sc)?;
            if l1.axis == l2.axis {
                return Err(CliError::Validation("[composite] legs must use different axes".into()));
            }
            doc.composite = Some(c);
            doc.spectral = spectral;
            Plan::Composite(l1, l2)
        }
        Mode::Feedback => {
            let mut f: FeedbackSection = require(section(&table, "feedback")?, "feedback", mode)?;
            let run = f.resolve("feedback")?;
            doc.feedback = Some(f);
            Plan::Feedback(run)
        }
        Mode::Compare => {
            let sc = spectral_cfg(&spectral)?;
            let mut c: CompareSection = require(section(&table, "compare")?, "compare", mode)?;
            if c.open_loop.initial_theta.is_some() || c.open_loop.target_theta.is_some() {
                return Err(CliError::Validation("[compare.open_loop] endpoints are set by compare.initial_theta/target_theta".into()));
            }
            if c.feedback.initial_theta.is_some() || c.feedback.target_theta.is_some() {
                return Err(CliError::Validation("[compare.feedback] endpoints are set by compare.initial_theta/target_theta".into()));
            }
            let mut open = c.open_loop.clone();
            open.initial_theta = Some(c.initial_theta);
            open.target_theta = Some(c.target_theta);
            let open_cfg = open.config("compare.open_loop", sc)?;
            let plane = c.open_loop.axis.0.phi();
            if (c.feedback.phi.rem_euclid(std::f64::consts::TAU) - plane).abs() > 1e-12 {
                return Err(CliError::Validation("[compare] feedback.phi must equal the open-loop plane azimuth".into()));
            }
            let mut fb = c.feedback.clone();
            fb.initial_theta = Some(c.initial_theta);
            fb.target_theta = Some(c.target_theta);
            let run = fb.resolve("compare.feedback")?;
            c.feedback.alpha = fb.alpha;
            c.feedback.lambda = fb.lambda;
            doc.compare = Some(c);
            doc.spectral = spectral;
            Plan::Compare { open_loop: open_cfg, feedback: run }
        }
    };
    Ok((doc, plan))
}

/// Serializes the resolved document.
pub fn render(doc: &Document) -> Result<String, CliError> {
    toml::to_string(doc).map_err(|e| CliError::Validation(format!("cannot render resolved config: {e}")))
}
