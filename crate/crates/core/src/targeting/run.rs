use crate::decoherence::{tabulate, DecoherenceCurve};
use crate::error::{Error, Result};
use crate::evolution::evolve_unchecked;
use crate::state::{bloch_of, fidelity_bloch, pure_state, BlochVector, DensityMatrix};

use super::plan::plan_intermediates_with;
use super::solver::solve_step;
use super::{Component, TargetingConfig, STEPS_PER_CYCLE};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    /// Absolute step index, starting at 1 for the first control step.
    pub step: usize,
    pub time: f64,
    pub cycle: usize,
    /// 1-based intermediate index; maintenance cycles carry the last index.
    pub intermediate: usize,
    pub component: Component,
    pub pulse_area: f64,
    pub residual: f64,
    pub fallback: bool,
    /// Fidelity against the final target of the run.
    pub fidelity: f64,
    pub bloch: BlochVector,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleRecord {
    pub cycle: usize,
    pub intermediate: usize,
    pub hold: bool,
    /// Fidelity of the end-of-cycle state against the cycle's waypoint.
    pub waypoint_fidelity: f64,
    /// Fidelity of the end-of-cycle state against the final target.
    pub fidelity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlLog {
    pub dt: f64,
    pub initial_fidelity: f64,
    pub steps: Vec<StepRecord>,
    pub cycles: Vec<CycleRecord>,
    pub final_state: DensityMatrix,
    pub final_fidelity: f64,
    /// First sample index whose fidelity stays at or above the threshold for
    /// a full cycle. Index 0 is the initial state, index k the state after
    /// step k.
    pub transition_steps: Option<usize>,
    pub fallback_steps: usize,
    pub threshold: f64,
    pub converged: bool,
}

impl ControlLog {
    /// Fidelity series: initial state followed by every step.
    pub fn fidelity_series(&self) -> Vec<f64> {
        std::iter::once(self.initial_fidelity).chain(self.steps.iter().map(|s| s.fidelity)).collect()
    }

    pub fn max_abs_pulse_area(&self) -> f64 {
        self.steps.iter().map(|s| s.pulse_area.abs()).fold(0.0, f64::max)
    }

    pub fn summary_line(&self) -> String {
        let t0 = self.transition_steps.map_or_else(|| "none".to_string(), |t| t.to_string());
        format!("final_fidelity={} transition_steps={} fallback_steps={}", self.final_fidelity, t0, self.fallback_steps)
    }

    fn finish(
        dt: f64,
        initial_fidelity: f64,
        steps: Vec<StepRecord>,
        cycles: Vec<CycleRecord>,
        final_state: DensityMatrix,
        target: &BlochVector,
        threshold: f64,
    ) -> Self {
        let final_fidelity = fidelity_bloch(&bloch_of(&final_state), target);
        let series: Vec<f64> = std::iter::once(initial_fidelity).chain(steps.iter().map(|s| s.fidelity)).collect();
        let fallback_steps = steps.iter().filter(|s| s.fallback).count();
        Self {
            dt,
            initial_fidelity,
            transition_steps: transition_index(&series, threshold, STEPS_PER_CYCLE),
            fallback_steps,
            converged: final_fidelity >= threshold,
            steps,
            cycles,
            final_state,
            final_fidelity,
            threshold,
        }
    }
}

/// First index from which `window` consecutive samples (fewer at the tail)
/// are all at or above `threshold`.
pub fn transition_index(series: &[f64], threshold: f64, window: usize) -> Option<usize> {
    let mut run = 0;
    for (k, &f) in series.iter().enumerate() {
        if f >= threshold {
            run += 1;
            if run >= window {
                return Some(k + 1 - window);
            }
        } else {
            run = 0;
        }
    }
    (run > 0).then(|| series.len() - run)
}

/// Decoherence values needed by one cycle: `g(k dt)` for `k = 0..=8`.
pub fn curve_for(cfg: &TargetingConfig) -> Result<DecoherenceCurve> {
    tabulate(cfg.regime, &cfg.spectral, cfg.dt, STEPS_PER_CYCLE + 1)
}

/// Runs one eight-step cycle from `rho_start` toward `zeta`.
///
/// Step `j` (1-based) evolves with `g = curve[j]` and the pulse area
/// accumulated over steps `1..=j`. Records are numbered from `step_offset + 1`
/// and their fidelity is taken against `target`.
#[allow(clippy::too_many_arguments)]
pub fn run_cycle(
    rho_start: &DensityMatrix,
    zeta: &DensityMatrix,
    curve: &DecoherenceCurve,
    cfg: &TargetingConfig,
    step_offset: usize,
    cycle: usize,
    intermediate: usize,
    target: &BlochVector,
) -> Result<(DensityMatrix, Vec<StepRecord>)> {
    if curve.len() < STEPS_PER_CYCLE + 1 {
        return Err(Error::InvalidParameter(format!(
            "decoherence curve has {} points, a cycle needs {}",
            curve.len(),
            STEPS_PER_CYCLE + 1
        )));
    }
    let z = zeta.components();
    let mut i_acc = 0.0;
    let mut state = *rho_start;
    let mut records = Vec::with_capacity(STEPS_PER_CYCLE);
    for (j, component) in Component::ALL.into_iter().enumerate() {
        let g = curve.values()[j + 1];
        let sol = solve_step(component, z[component.index()], rho_start, g, i_acc, cfg);
        i_acc += sol.pulse_area;
        state = evolve_unchecked(cfg.regime, rho_start, g, i_acc, cfg.axis);
        let bloch = bloch_of(&state);
        let step = step_offset + j + 1;
        records.push(StepRecord {
            step,
            time: step as f64 * cfg.dt,
            cycle,
            intermediate,
            component,
            pulse_area: sol.pulse_area,
            residual: sol.residual,
            fallback: sol.fallback,
            fidelity: fidelity_bloch(&bloch, target),
            bloch,
        });
    }
    Ok((state, records))
}

struct Leg {
    steps: Vec<StepRecord>,
    cycles: Vec<CycleRecord>,
    state: DensityMatrix,
}

fn run_leg(
    cfg: &TargetingConfig,
    curve: &DecoherenceCurve,
    start: DensityMatrix,
    step_offset: usize,
    cycle_offset: usize,
    target: &BlochVector,
) -> Result<Leg> {
    let waypoints = plan_intermediates_with(&cfg.initial, &cfg.target, cfg.n_intermediates, &cfg.plan_options())?;
    let last = waypoints.len();
    let hold = pure_state(&cfg.target);
    let schedule = waypoints
        .iter()
        .enumerate()
        .flat_map(|(k, w)| std::iter::repeat_n((k + 1, w, false), cfg.cycles_per_intermediate))
        .chain(std::iter::repeat_n((last, &hold, true), cfg.hold_cycles));

    let mut state = start;
    let mut steps = Vec::new();
    let mut cycles = Vec::new();
    for (n, (intermediate, zeta, is_hold)) in schedule.enumerate() {
        let cycle = cycle_offset + n + 1;
        let offset = step_offset + steps.len();
        let (next, records) = run_cycle(&state, zeta, curve, cfg, offset, cycle, intermediate, target)?;
        state = next;
        let v = bloch_of(&state);
        cycles.push(CycleRecord {
            cycle,
            intermediate,
            hold: is_hold,
            waypoint_fidelity: overlap(&state, zeta),
            fidelity: fidelity_bloch(&v, target),
        });
        steps.extend(records);
    }
    Ok(Leg { steps, cycles, state })
}

/// `tr(rho sigma)`; equals the fidelity when `sigma` is pure.
fn overlap(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    let (a, b) = (bloch_of(rho), bloch_of(sigma));
    0.5 * (1.0 + a.dot(&b))
}

pub fn run_targeting(cfg: &TargetingConfig) -> Result<ControlLog> {
    cfg.validate()?;
    let curve = curve_for(cfg)?;
    run_targeting_with_curve(cfg, &curve)
}

/// As [`run_targeting`] with a precomputed decoherence curve.
pub fn run_targeting_with_curve(cfg: &TargetingConfig, curve: &DecoherenceCurve) -> Result<ControlLog> {
    cfg.validate()?;
    let start = pure_state(&cfg.initial);
    let target = cfg.target.bloch();
    let leg = run_leg(cfg, curve, start, 0, 0, &target)?;
    let f0 = fidelity_bloch(&bloch_of(&start), &target);
    Ok(ControlLog::finish(cfg.dt, f0, leg.steps, leg.cycles, leg.state, &target, cfg.fidelity_threshold))
}

/// Drives through two orthogonal control planes: leg 1 ends at the state
/// leg 2 starts from (normally the ground state), and leg 2 continues from
/// the actual end state of leg 1.
pub fn run_composite(leg1: &TargetingConfig, leg2: &TargetingConfig) -> Result<ControlLog> {
    leg1.validate()?;
    leg2.validate()?;
    if leg1.target.bloch().distance(&leg2.initial.bloch()) > 1e-9 {
        return Err(Error::InvalidParameter("leg 1 target must equal leg 2 initial state".into()));
    }
    if leg1.dt != leg2.dt {
        return Err(Error::InvalidParameter("legs must share dt".into()));
    }
    let target = leg2.target.bloch();
    let start = pure_state(&leg1.initial);
    let first = run_leg(leg1, &curve_for(leg1)?, start, 0, 0, &target)?;
    let second = run_leg(leg2, &curve_for(leg2)?, first.state, first.steps.len(), first.cycles.len(), &target)?;
    let mut steps = first.steps;
    steps.extend(second.steps);
    let mut cycles = first.cycles;
    cycles.extend(second.cycles);
    let f0 = fidelity_bloch(&bloch_of(&start), &target);
    Ok(ControlLog::finish(leg2.dt, f0, steps, cycles, second.state, &target, leg2.fidelity_threshold))
}
