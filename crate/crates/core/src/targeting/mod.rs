//! Open-loop targeting: intermediate-state planning and the eight-step
//! control cycle.

mod plan;
mod run;
mod solver;

use serde::{Deserialize, Serialize};

use crate::decoherence::{Regime, SpectralConfig};
use crate::error::{Error, Result};
use crate::evolution::ControlAxis;
use crate::state::PureStateAngle;

pub use plan::{plan_intermediates, plan_intermediates_with, plane_angle, Arc, Interpolation, PlanOptions};
pub use run::{
    curve_for, run_composite, run_cycle, run_targeting, run_targeting_with_curve, transition_index, ControlLog,
    CycleRecord, StepRecord,
};
pub use solver::{solve_step, StepSolution, GRID_INTERVALS, ROOT_TOL};

/// Steps per control cycle.
pub const STEPS_PER_CYCLE: usize = 8;

/// One real component of the density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    R11,
    I11,
    R12,
    I12,
    R21,
    I21,
    R22,
    I22,
}

impl Component {
    /// Cycle order.
    pub const ALL: [Component; 8] = [
        Component::R11,
        Component::I11,
        Component::R12,
        Component::I12,
        Component::R21,
        Component::I21,
        Component::R22,
        Component::I22,
    ];

    /// Position in `DensityMatrix::components`.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        ["11R", "11I", "12R", "12I", "21R", "21I", "22R", "22I"][self.index()]
    }
}

impl std::fmt::Display for Component {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetingConfig {
    pub regime: Regime,
    pub axis: ControlAxis,
    pub n_intermediates: usize,
    pub cycles_per_intermediate: usize,
    pub i_max: f64,
    pub dt: f64,
    pub spectral: SpectralConfig,
    pub initial: PureStateAngle,
    pub target: PureStateAngle,
    /// Maintenance cycles holding the target after the last intermediate.
    pub hold_cycles: usize,
    pub fidelity_threshold: f64,
    pub interpolation: Interpolation,
    pub arc: Arc,
}

impl TargetingConfig {
    /// Thermal drive with the given structure and no decoherence.
    pub fn new(
        axis: ControlAxis,
        initial: PureStateAngle,
        target: PureStateAngle,
        n_intermediates: usize,
        cycles_per_intermediate: usize,
        i_max: f64,
    ) -> Self {
        Self {
            regime: Regime::Thermal,
            axis,
            n_intermediates,
            cycles_per_intermediate,
            i_max,
            dt: 0.01,
            spectral: SpectralConfig::default(),
            initial,
            target,
            hold_cycles: 0,
            fidelity_threshold: 0.99,
            interpolation: Interpolation::Angular,
            arc: Arc::Shorter,
        }
    }

    pub fn plan_options(&self) -> PlanOptions {
        PlanOptions { phi: self.axis.phi(), interpolation: self.interpolation, arc: self.arc }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_intermediates < 1 {
            return Err(Error::InvalidParameter("n_intermediates >= 1 violated".into()));
        }
        if self.cycles_per_intermediate < 1 {
            return Err(Error::InvalidParameter("cycles_per_intermediate >= 1 violated".into()));
        }
        if !(self.i_max > 0.0 && self.i_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("i_max > 0 violated (i_max={})", self.i_max)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt > 0 violated (dt={})", self.dt)));
        }
        if !(0.0..=1.0).contains(&self.fidelity_threshold) {
            return Err(Error::InvalidParameter("fidelity_threshold in [0, 1] violated".into()));
        }
        if self.regime == Regime::Adiabatic && self.axis != ControlAxis::X {
            return Err(Error::InvalidParameter("adiabatic regime requires axis (1, 0)".into()));
        }
        self.spectral.validate()?;
        let phi = self.axis.phi();
        for (name, s) in [("initial", self.initial), ("target", self.target)] {
            plane_angle(&s.bloch(), phi).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "{name} state is off the control plane of axis ({}, {}); use composite driving",
                    self.axis.cx(),
                    self.axis.cy()
                ))
            })?;
        }
        Ok(())
    }
}
