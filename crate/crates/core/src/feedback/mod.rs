//! Homodyne-mediated feedback on a driven, spontaneously decaying qubit.
//!
//! Time is measured in units of the inverse decay rate when `gamma = 1`.

mod master;
mod trajectory;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{fidelity_bloch, BlochVector, DensityMatrix, PureStateAngle};

pub use master::{feedback_params_for_target, integrate_master, master_rhs, stationary_solution};
pub use trajectory::{ensemble_average, ensemble_average_with, simulate_trajectory, simulate_trajectory_stream, WienerStream};

/// Complex 2x2 operator in the (|1>, |2>) basis.
pub type Operator = Matrix2<Complex64>;

/// Largest stochastic step accepted, in units of `1/gamma`.
pub const MAX_SDE_STEP: f64 = 1e-3;
/// Fidelity defining the transition time.
pub const TRANSITION_FIDELITY: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeedbackConfig {
    pub gamma: f64,
    pub alpha: f64,
    pub lambda: f64,
    pub eta: f64,
    pub delay: f64,
    pub phi: f64,
    /// Stochastic integration step.
    pub dt: f64,
    /// Deterministic integration step.
    pub master_dt: f64,
    /// Spacing of recorded samples.
    pub sample_dt: f64,
    pub seed: u64,
    pub n_traj: usize,
}

impl Default for FeedbackConfig {
    fn default() -> Self {
        Self {
            gamma: 1.0,
            alpha: 0.0,
            lambda: 0.0,
            eta: 1.0,
            delay: 0.0,
            phi: 0.0,
            dt: 1e-4,
            master_dt: 1e-3,
            sample_dt: 0.01,
            seed: 0,
            n_traj: 1,
        }
    }
}

impl FeedbackConfig {
    /// Drive and feedback strengths that stabilize the in-plane angle `theta`.
    pub fn for_target(theta: f64, phi: f64, gamma: f64) -> Result<Self> {
        let (alpha, lambda) = feedback_params_for_target(theta, gamma)?;
        Ok(Self { gamma, alpha, lambda, phi, ..Self::default() })
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gamma", self.gamma),
            ("alpha", self.alpha),
            ("lambda", self.lambda),
            ("eta", self.eta),
            ("delay", self.delay),
            ("phi", self.phi),
            ("dt", self.dt),
            ("master_dt", self.master_dt),
            ("sample_dt", self.sample_dt),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be finite")));
            }
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidParameter("gamma > 0 violated".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter("eta in [0, 1] violated".into()));
        }
        if self.eta == 0.0 && self.lambda != 0.0 {
            return Err(Error::InvalidParameter("feedback (lambda != 0) requires eta > 0".into()));
        }
        if self.delay < 0.0 {
            return Err(Error::InvalidParameter("delay >= 0 violated".into()));
        }
        if self.dt <= 0.0 || self.master_dt <= 0.0 || self.sample_dt <= 0.0 {
            return Err(Error::InvalidParameter("dt > 0, master_dt > 0 and sample_dt > 0 required".into()));
        }
        Ok(())
    }

    /// Additional check for stochastic runs.
    pub fn validate_sde(&self) -> Result<()> {
        self.validate()?;
        if self.dt > MAX_SDE_STEP / self.gamma * (1.0 + 1e-12) {
            return Err(Error::InvalidParameter(format!("dt <= 1e-3/gamma violated (dt={})", self.dt)));
        }
        Ok(())
    }

    /// Control operator `sin(phi) sigma_x + cos(phi) sigma_y`.
    pub fn sigma_phi(&self) -> Operator {
        sigma_phi(self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordKind {
    SingleConditioned,
    EnsembleMean,
    MasterEquation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub kind: RecordKind,
    pub times: Vec<f64>,
    pub states: Vec<BlochVector>,
    /// Standard error of the mean, for ensembles only.
    pub stderr: Option<Vec<BlochVector>>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&BlochVector> {
        self.states.last()
    }

    pub fn fidelities(&self, target: &PureStateAngle) -> Vec<f64> {
        let n = target.bloch();
        self.states.iter().map(|v| fidelity_bloch(v, &n)).collect()
    }

    /// `t0=<v|none> final_fidelity=<v> final_purity=<v>`.
    pub fn summary_line(&self, target: &PureStateAngle) -> String {
        let t0 = transition_time(self, target).map_or_else(|| "none".to_string(), |t| t.to_string());
        let last = self.last().copied().unwrap_or(BlochVector::new(0.0, 0.0, 0.0));
        format!("t0={} final_fidelity={} final_purity={}", t0, fidelity_bloch(&last, &target.bloch()), last.norm())
    }
}

/// First time the fidelity with `target` reaches 0.99, interpolated
/// linearly between samples.
pub fn transition_time(record: &TrajectoryRecord, target: &PureStateAngle) -> Option<f64> {
    transition_time_at(record, target, TRANSITION_FIDELITY)
}

pub fn transition_time_at(record: &TrajectoryRecord, target: &PureStateAngle, threshold: f64) -> Option<f64> {
    let f = record.fidelities(target);
    let k = f.iter().position(|&x| x >= threshold)?;
    if k == 0 {
        return Some(record.times[0]);
    }
    let (f0, f1) = (f[k - 1], f[k]);
    let (t0, t1) = (record.times[k - 1], record.times[k]);
    Some(t0 + (threshold - f0) / (f1 - f0) * (t1 - t0))
}

pub fn sigma_x() -> Operator {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    Operator::new(o, l, l, o)
}

pub fn sigma_y() -> Operator {
    let (o, i) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    Operator::new(o, -i, i, o)
}

pub fn sigma_z() -> Operator {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    Operator::new(-l, o, o, l)
}

/// Lowering operator `|1><2|`.
pub fn lowering() -> Operator {
    let (o, l) = (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    Operator::new(o, l, o, o)
}

pub fn sigma_phi(phi: f64) -> Operator {
    let (s, c) = phi.sin_cos();
    sigma_x() * Complex64::new(s, 0.0) + sigma_y() * Complex64::new(c, 0.0)
}

pub fn to_operator(rho: &DensityMatrix) -> Operator {
    Operator::new(rho.r11(), rho.r12(), rho.r21(), rho.r22())
}

pub(crate) fn from_operator(m: &Operator) -> DensityMatrix {
    DensityMatrix::new_unchecked(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

/// `D[a] rho = a rho a^dagger - (a^dagger a rho + rho a^dagger a) / 2`.
pub fn lindblad(a: &Operator, rho: &Operator) -> Operator {
    let ad = a.adjoint();
    let ada = ad * a;
    a * rho * ad - (ada * rho + rho * ada) * Complex64::new(0.5, 0.0)
}
