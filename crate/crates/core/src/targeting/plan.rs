use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{from_bloch_unchecked, pure_state, wrap_angle, BlochVector, DensityMatrix, PureStateAngle};

/// Tolerance for a state to count as lying on a control plane.
const PLANE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Interpolation {
    /// Uniform steps in angle along the great circle; intermediates are pure.
    #[default]
    Angular,
    /// Uniform steps along the straight chord; intermediates are mixed.
    Chordal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Arc {
    /// Take the shorter arc. For antipodal endpoints the sign of
    /// `theta_target - theta_initial` decides the direction.
    #[default]
    Shorter,
    /// Sweep exactly `theta_target - theta_initial`, which may exceed pi.
    AsGiven,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanOptions {
    /// Azimuth of the control plane.
    pub phi: f64,
    pub interpolation: Interpolation,
    pub arc: Arc,
}

/// In-plane angle of a Bloch vector on the plane with azimuth `phi`.
pub fn plane_angle(v: &BlochVector, phi: f64) -> Option<f64> {
    PureStateAngle::in_plane(v, phi, PLANE_TOL).map(|a| a.theta())
}

/// Intermediate states in the plane of `initial`, angular, shorter arc.
pub fn plan_intermediates(initial: &PureStateAngle, target: &PureStateAngle, n: usize) -> Result<Vec<DensityMatrix>> {
    let opts = PlanOptions { phi: initial.phi(), interpolation: Interpolation::Angular, arc: Arc::Shorter };
    plan_intermediates_with(initial, target, n, &opts)
}

/// `n` waypoints from `initial` (excluded) to `target` (included, exact).
///
/// Coincident endpoints yield the single state `[target]`.
pub fn plan_intermediates_with(
    initial: &PureStateAngle,
    target: &PureStateAngle,
    n: usize,
    opts: &PlanOptions,
) -> Result<Vec<DensityMatrix>> {
    if n == 0 {
        return Err(Error::InvalidParameter("n >= 1 violated".into()));
    }
    let vi = initial.bloch();
    let vt = target.bloch();
    let end = pure_state(target);
    if vi.distance(&vt) < 1e-12 {
        return Ok(vec![end]);
    }
    let off_plane = |name: &str| Error::InvalidParameter(format!("{name} state is off the control plane"));
    let ti = plane_angle(&vi, opts.phi).ok_or_else(|| off_plane("initial"))?;
    let tt = plane_angle(&vt, opts.phi).ok_or_else(|| off_plane("target"))?;
    let delta = match opts.arc {
        Arc::AsGiven => tt - ti,
        Arc::Shorter => {
            let raw = tt - ti;
            if (raw.abs() - PI).abs() < 1e-12 {
                raw
            } else {
                wrap_angle(raw)
            }
        }
    };
    let mut out = Vec::with_capacity(n);
    for k in 1..n {
        let f = k as f64 / n as f64;
        let state = match opts.interpolation {
            Interpolation::Angular => pure_state(&PureStateAngle::wrapped(ti + f * delta, opts.phi)),
            Interpolation::Chordal => from_bloch_unchecked(&BlochVector::new(
                vi.x + f * (vt.x - vi.x),
                vi.y + f * (vt.y - vi.y),
                vi.z + f * (vt.z - vi.z),
            )),
        };
        out.push(state);
    }
    out.push(end);
    Ok(out)
}
