//! First-order reduced density-matrix maps for an accumulated pulse area.
//!
//! Both maps take `g` and `I` cumulatively from the start of the current
//! control cycle.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::decoherence::Regime;
use crate::error::{Error, Result};
use crate::state::DensityMatrix;

/// Direction `(cx, cy)` of the control field in the sigma_x/sigma_y plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ControlAxis {
    cx: f64,
    cy: f64,
}

impl ControlAxis {
    /// sigma_x drive; rotates within the y-z plane.
    pub const X: ControlAxis = ControlAxis { cx: 1.0, cy: 0.0 };
    /// sigma_y drive; rotates within the x-z plane.
    pub const Y: ControlAxis = ControlAxis { cx: 0.0, cy: 1.0 };

    /// Normalizes `(cx, cy)` to unit length.
    pub fn new(cx: f64, cy: f64) -> Result<Self> {
        let n = cx.hypot(cy);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidParameter("control axis (cx, cy) must be finite and nonzero".into()));
        }
        Ok(Self { cx: cx / n, cy: cy / n })
    }

    /// Axis for plane azimuth `phi`: `(sin phi, cos phi)`.
    pub fn from_phi(phi: f64) -> Self {
        let (s, c) = phi.sin_cos();
        Self { cx: s, cy: c }
    }

    pub fn cx(&self) -> f64 {
        self.cx
    }

    pub fn cy(&self) -> f64 {
        self.cy
    }

    /// Azimuth of the plane of states reachable from the poles, in [0, 2pi).
    pub fn phi(&self) -> f64 {
        self.cx.atan2(self.cy).rem_euclid(std::f64::consts::TAU) % std::f64::consts::TAU
    }
}

impl TryFrom<[f64; 2]> for ControlAxis {
    type Error = Error;

    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<ControlAxis> for [f64; 2] {
    fn from(a: ControlAxis) -> Self {
        [a.cx, a.cy]
    }
}

/// Accumulated control pulse area, bounded by the run's `i_max`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PulseArea(f64);

impl PulseArea {
    pub fn new(value: f64, i_max: f64) -> Result<Self> {
        if !value.is_finite() || value.abs() > i_max {
            return Err(Error::InvalidParameter(format!("|pulse area| {value} exceeds i_max {i_max}")));
        }
        Ok(Self(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check(rho: &DensityMatrix, g: f64) -> Result<()> {
    rho.validate()?;
    if !(g >= 0.0 && g.is_finite()) {
        return Err(Error::InvalidParameter(format!("g={g} must be finite and >= 0")));
    }
    Ok(())
}

pub fn evolve_adiabatic(rho0: &DensityMatrix, g: f64, i: f64) -> Result<DensityMatrix> {
    check(rho0, g)?;
    Ok(adiabatic_map(rho0, g, i))
}

pub fn evolve_thermal(rho0: &DensityMatrix, g: f64, i: f64, axis: ControlAxis) -> Result<DensityMatrix> {
    check(rho0, g)?;
    Ok(thermal_map(rho0, g, i, axis))
}

/// Dispatches on the regime. The adiabatic map is defined for the sigma_x
/// drive only and ignores `axis`.
pub fn evolve(regime: Regime, rho0: &DensityMatrix, g: f64, i: f64, axis: ControlAxis) -> Result<DensityMatrix> {
    check(rho0, g)?;
    Ok(evolve_unchecked(regime, rho0, g, i, axis))
}

pub(crate) fn evolve_unchecked(regime: Regime, rho0: &DensityMatrix, g: f64, i: f64, axis: ControlAxis) -> DensityMatrix {
    match regime {
        Regime::Adiabatic => adiabatic_map(rho0, g, i),
        Regime::Thermal => thermal_map(rho0, g, i, axis),
    }
}

pub(crate) fn adiabatic_map(rho0: &DensityMatrix, g: f64, i: f64) -> DensityMatrix {
    let [r11, r12, r21, r22] = rho0.elements();
    let e = (-g).exp();
    let (s, c) = i.sin_cos();
    let (c2, s2, cs) = (c * c, s * s, c * s);
    let j = Complex64::i();
    let n11 = r11 * c2 + r22 * s2 - j * (r12 - r21) * e * cs;
    let n22 = r22 * c2 + r11 * s2 + j * (r12 - r21) * e * cs;
    let n12 = r12 * e * c2 + r21 * e * s2 + j * (r22 - r11) * cs;
    let n21 = r21 * e * c2 + r12 * e * s2 - j * (r22 - r11) * cs;
    DensityMatrix::new_unchecked(n11, n12, n21, n22)
}

pub(crate) fn thermal_map(rho0: &DensityMatrix, g: f64, i: f64, axis: ControlAxis) -> DensityMatrix {
    let d = rho0.r11().re - rho0.r22().re;
    let a = rho0.r12().re;
    let b = rho0.r12().im;
    let e1 = (-g).exp();
    let e2 = (-2.0 * g).exp();
    let (sx, cx) = (2.0 * axis.cx() * i).sin_cos();
    let (sy, cy) = (2.0 * axis.cy() * i).sin_cos();
    let n11 = 0.5 + 0.5 * d * e2 * cx * cy - a * e2 * cx * sy + b * e1 * sx;
    let n12 = Complex64::new(a * cy, b * cx) * e1
        + Complex64::new(0.0, a * sx * sy * e2)
        + 0.5 * d * Complex64::new(e1 * sy, -e2 * sx * cy);
    DensityMatrix::new_unchecked(Complex64::new(n11, 0.0), n12, n12.conj(), Complex64::new(1.0 - n11, 0.0))
}
