use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use super::{from_operator, lindblad, lowering, to_operator, FeedbackConfig, Operator, RecordKind, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::state::{bloch_of, BlochVector, DensityMatrix};

const MAX_HALVINGS: u32 = 6;
const TRACE_TOL: f64 = 1e-9;
const EIGEN_TOL: f64 = 1e-9;

/// Right-hand side of the master equation, with or without the Markovian
/// feedback term.
///
/// With feedback the jump operator becomes `sqrt(gamma) sigma - i lambda
/// sigma_phi`; finite detection efficiency adds the feedback noise term
/// `lambda^2 (1 - eta) / eta D[sigma_phi]`.
pub fn master_rhs(rho: &DensityMatrix, cfg: &FeedbackConfig, with_feedback: bool) -> Operator {
    rhs(&to_operator(rho), cfg, with_feedback)
}

fn rhs(rho: &Operator, cfg: &FeedbackConfig, with_feedback: bool) -> Operator {
    let s_phi = cfg.sigma_phi();
    let h = s_phi * Complex64::new(cfg.alpha, 0.0);
    let mut c = lowering() * Complex64::new(cfg.gamma.sqrt(), 0.0);
    if with_feedback {
        c -= s_phi * Complex64::new(0.0, cfg.lambda);
    }
    let mut out = (h * rho - rho * h) * Complex64::new(0.0, -1.0) + lindblad(&c, rho);
    if with_feedback && cfg.eta < 1.0 && cfg.lambda != 0.0 {
        let k = cfg.lambda * cfg.lambda * (1.0 - cfg.eta) / cfg.eta;
        out += lindblad(&s_phi, rho) * Complex64::new(k, 0.0);
    }
    out
}

fn rk4_step(rho: &Operator, cfg: &FeedbackConfig, with_feedback: bool, h: f64) -> Operator {
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let k1 = rhs(rho, cfg, with_feedback);
    let k2 = rhs(&(rho + k1 * half), cfg, with_feedback);
    let k3 = rhs(&(rho + k2 * half), cfg, with_feedback);
    let k4 = rhs(&(rho + k3 * full), cfg, with_feedback);
    rho + (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4) * Complex64::new(h / 6.0, 0.0)
}

/// Fixed-step fourth-order Runge-Kutta integration sampled every
/// `cfg.sample_dt`. The step is halved (at most six times) if the trace or
/// positivity bounds are violated.
pub fn integrate_master(rho0: &DensityMatrix, cfg: &FeedbackConfig, t_end: f64, with_feedback: bool) -> Result<TrajectoryRecord> {
    cfg.validate()?;
    rho0.validate()?;
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::InvalidParameter("t_end > 0 violated".into()));
    }
    let mut h = cfg.master_dt.min(t_end);
    let mut last_reason = String::new();
    for _ in 0..=MAX_HALVINGS {
        match attempt_integration(rho0, cfg, t_end, with_feedback, h) {
            Ok(rec) => return Ok(rec),
            Err(reason) => last_reason = reason,
        }
        h *= 0.5;
    }
    Err(Error::StepInstability { retries: MAX_HALVINGS, reason: last_reason })
}

fn attempt_integration(
    rho0: &DensityMatrix,
    cfg: &FeedbackConfig,
    t_end: f64,
    with_feedback: bool,
    h: f64,
) -> std::result::Result<TrajectoryRecord, String> {
    let n_steps = (t_end / h).round().max(1.0) as usize;
    let h = t_end / n_steps as f64;
    let every = ((cfg.sample_dt / h).round() as usize).max(1);
    let mut rho = to_operator(rho0);
    let mut times = vec![0.0];
    let mut states = vec![bloch_of(rho0)];
    for k in 1..=n_steps {
        rho = rk4_step(&rho, cfg, with_feedback, h);
        let state = from_operator(&rho);
        let tr = state.trace();
        if !((tr.re - 1.0).abs() < TRACE_TOL && tr.im.abs() < TRACE_TOL) {
            return Err(format!("trace {tr} at t={}", k as f64 * h));
        }
        let lo = state.eigenvalues()[0];
        if !(lo >= -EIGEN_TOL) {
            return Err(format!("eigenvalue {lo:e} at t={}", k as f64 * h));
        }
        if k % every == 0 || k == n_steps {
            times.push(k as f64 * h);
            states.push(bloch_of(&state));
        }
    }
    Ok(TrajectoryRecord { kind: RecordKind::MasterEquation, times, states, stderr: None })
}

/// Fixed point of the driven master equation without feedback, rotated into
/// the plane with azimuth `phi`.
pub fn stationary_solution(alpha: f64, gamma: f64, phi: f64) -> BlochVector {
    let den = gamma * gamma + 8.0 * alpha * alpha;
    let (s, c) = phi.sin_cos();
    BlochVector::new(4.0 * alpha * gamma * c / den, -4.0 * alpha * gamma * s / den, -gamma * gamma / den)
}

/// Drive and feedback strengths `(alpha, lambda)` whose feedback fixed point
/// is the pure state at in-plane angle `theta`.
///
/// In this crate's basis (`sigma_y = [[0, -i], [i, 0]]`, ground at z = -1)
/// this reads `alpha = -gamma/4 sin(theta) cos(theta)` and
/// `lambda = sqrt(gamma)/2 (1 + cos(theta))`.
pub fn feedback_params_for_target(theta: f64, gamma: f64) -> Result<(f64, f64)> {
    if !theta.is_finite() {
        return Err(Error::InvalidParameter("theta must be finite".into()));
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter("gamma > 0 violated".into()));
    }
    if (theta - FRAC_PI_2).abs() <= 1e-6 || (theta + FRAC_PI_2).abs() <= 1e-6 {
        return Err(Error::DegenerateTarget(theta));
    }
    let (s, c) = theta.sin_cos();
    Ok((-0.25 * gamma * s * c, 0.5 * gamma.sqrt() * (1.0 + c)))
}
