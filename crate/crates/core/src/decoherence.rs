//! Adiabatic and thermal decoherence functions of the spin-boson environment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::quad::{self, Estimate};

/// Relative accuracy requested from the quadrature.
pub const DEFAULT_REL_TOL: f64 = 1e-8;
/// Upper integration limit in units of the cutoff frequency.
pub const CUTOFF_MULTIPLE: f64 = 60.0;
/// Integrand evaluations allowed per decoherence value.
pub const EVAL_BUDGET: usize = 2_000_000;
/// Below this frequency the integrands are replaced by their series.
const SERIES_BELOW: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Adiabatic,
    Thermal,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Adiabatic => "adiabatic",
            Regime::Thermal => "thermal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub coupling_gamma: f64,
    pub beta0: f64,
    pub omega_c: f64,
    pub omega_12: f64,
    #[serde(default = "default_exponent")]
    pub spectral_exponent: f64,
}

fn default_exponent() -> f64 {
    1.0
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { coupling_gamma: 0.0, beta0: 1.0, omega_c: 5.0, omega_12: 10.0, spectral_exponent: 1.0 }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("coupling_gamma", self.coupling_gamma),
            ("beta0", self.beta0),
            ("omega_c", self.omega_c),
            ("omega_12", self.omega_12),
            ("spectral_exponent", self.spectral_exponent),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.coupling_gamma < 0.0 {
            return Err(Error::InvalidParameter("coupling_gamma >= 0 violated".into()));
        }
        if self.beta0 <= 0.0 {
            return Err(Error::InvalidParameter("beta0 > 0 violated".into()));
        }
        if self.omega_c <= 0.0 {
            return Err(Error::InvalidParameter("omega_c > 0 violated".into()));
        }
        if self.omega_12 <= 0.0 {
            return Err(Error::InvalidParameter("omega_12 > 0 violated".into()));
        }
        if self.spectral_exponent <= -1.0 {
            return Err(Error::InvalidParameter("spectral_exponent > -1 violated".into()));
        }
        Ok(())
    }

    pub fn omega_max(&self) -> f64 {
        CUTOFF_MULTIPLE * self.omega_c
    }
}

fn coth(x: f64) -> f64 {
    1.0 / x.tanh()
}

/// `sin(x)/x`.
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Adiabatic integrand without the coupling prefactor.
pub(crate) fn adiabatic_integrand(w: f64, tau: f64, cfg: &SpectralConfig) -> f64 {
    let s = cfg.spectral_exponent;
    let damp = (-w / cfg.omega_c).exp();
    if w < SERIES_BELOW {
        // (1 - cos w tau) coth(b w / 2) ~ w tau^2 / b * (1 - (w tau)^2 / 12 + (b w)^2 / 12)
        let b = cfg.beta0;
        let wt = w * tau;
        let bw = b * w;
        return w.powf(s) * damp * w * tau * tau / b * (1.0 - wt * wt / 12.0 + bw * bw / 12.0);
    }
    let half = (0.5 * w * tau).sin();
    w.powf(s) * damp * 2.0 * half * half * coth(0.5 * cfg.beta0 * w)
}

/// Thermal integrand without the coupling prefactor.
pub(crate) fn thermal_integrand(w: f64, tau: f64, cfg: &SpectralConfig) -> f64 {
    let u = cfg.omega_12 - w;
    let sc = sinc(0.5 * u * tau);
    let kernel = 0.5 * tau * tau * sc * sc;
    let damp = (-w / cfg.omega_c).exp();
    if w < SERIES_BELOW {
        // w^3 coth(b w / 2) ~ 2 w^2 / b * (1 + (b w)^2 / 12)
        let bw = cfg.beta0 * w;
        return kernel * damp * 2.0 * w * w / cfg.beta0 * (1.0 + bw * bw / 12.0);
    }
    kernel * w * w * w * coth(0.5 * cfg.beta0 * w) * damp
}

fn breakpoints(regime: Regime, tau: f64, cfg: &SpectralConfig) -> Vec<f64> {
    let w_max = cfg.omega_max();
    let period = std::f64::consts::TAU / tau;
    let panels = (w_max / period).ceil().clamp(1.0, 1e6) as usize;
    let mut pts: Vec<f64> = (0..=panels).map(|k| w_max * k as f64 / panels as f64).collect();
    if regime == Regime::Thermal && cfg.omega_12 < w_max {
        pts.push(cfg.omega_12);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
    }
    pts
}

/// Evaluates `g(tau)` with its quadrature error estimate at relative
/// tolerance `rel_tol`.
pub fn estimate(regime: Regime, tau: f64, cfg: &SpectralConfig, rel_tol: f64) -> Result<Estimate> {
    cfg.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidParameter(format!("tau={tau} must be finite and >= 0")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidParameter("rel_tol > 0 violated".into()));
    }
    if tau == 0.0 || cfg.coupling_gamma == 0.0 {
        return Ok(Estimate { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true });
    }
    let bp = breakpoints(regime, tau, cfg);
    let est = match regime {
        Regime::Adiabatic => quad::integrate(|w| adiabatic_integrand(w, tau, cfg), &bp, rel_tol, EVAL_BUDGET),
        Regime::Thermal => quad::integrate(|w| thermal_integrand(w, tau, cfg), &bp, rel_tol, EVAL_BUDGET),
    };
    if !est.converged {
        return Err(Error::QuadratureFailure { tau, abs_error: est.abs_error, evaluations: est.evaluations });
    }
    let gamma = cfg.coupling_gamma;
    Ok(Estimate { value: gamma * est.value, abs_error: gamma * est.abs_error, ..est })
}

pub fn g(regime: Regime, tau: f64, cfg: &SpectralConfig) -> Result<f64> {
    estimate(regime, tau, cfg, DEFAULT_REL_TOL).map(|e| e.value)
}

pub fn g_adiabatic(tau: f64, cfg: &SpectralConfig) -> Result<f64> {
    g(Regime::Adiabatic, tau, cfg)
}

pub fn g_thermal(tau: f64, cfg: &SpectralConfig) -> Result<f64> {
    g(Regime::Thermal, tau, cfg)
}

/// `g(k dt)` sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceCurve {
    regime: Regime,
    dt: f64,
    values: Vec<f64>,
}

impl DecoherenceCurve {
    pub fn new(regime: Regime, dt: f64, values: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter("dt > 0 violated".into()));
        }
        match values.first() {
            Some(&0.0) => {}
            Some(_) => return Err(Error::InvalidParameter("curve must start at g(0) = 0".into())),
            None => return Err(Error::InvalidParameter("curve must not be empty".into())),
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("curve values must be finite and >= 0".into()));
        }
        Ok(Self { regime, dt, values })
    }

    /// A curve with no decoherence.
    pub fn zero(regime: Regime, dt: f64, n: usize) -> Result<Self> {
        Self::new(regime, dt, vec![0.0; n.max(1)])
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn tau(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

pub fn tabulate(regime: Regime, cfg: &SpectralConfig, dt: f64, n: usize) -> Result<DecoherenceCurve> {
    tabulate_with(Execution::default(), regime, cfg, dt, n)
}

pub fn tabulate_with(exec: Execution, regime: Regime, cfg: &SpectralConfig, dt: f64, n: usize) -> Result<DecoherenceCurve> {
    cfg.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidParameter("dt > 0 violated".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n >= 1 violated".into()));
    }
    let values: Result<Vec<f64>> = exec.map_indexed(n, |k| g(regime, k as f64 * dt, cfg)).into_iter().collect();
    DecoherenceCurve::new(regime, dt, values?)
}
