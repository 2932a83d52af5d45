//! Qubit states: density matrices, Bloch vectors and pure-state angles.
//!
//! Basis: |1> is the ground state (Bloch z = -1), |2> the excited state
//! (z = +1). Matrices are indexed in the order (1, 2), so
//! rho = [[(1-z)/2, (x-iy)/2], [(x+iy)/2, (1+z)/2]].

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on trace and Hermiticity checks.
pub const STATE_TOL: f64 = 1e-12;
/// Smallest eigenvalue accepted as non-negative.
pub const POSITIVITY_TOL: f64 = 1e-9;
/// Largest Bloch radius accepted as physical.
pub const RADIUS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    r11: Complex64,
    r12: Complex64,
    r21: Complex64,
    r22: Complex64,
}

impl DensityMatrix {
    /// Builds a density matrix and checks trace, Hermiticity and positivity.
    pub fn new(r11: Complex64, r12: Complex64, r21: Complex64, r22: Complex64) -> Result<Self> {
        let rho = Self::new_unchecked(r11, r12, r21, r22);
        rho.validate()?;
        Ok(rho)
    }

    pub const fn new_unchecked(r11: Complex64, r12: Complex64, r21: Complex64, r22: Complex64) -> Self {
        Self { r11, r12, r21, r22 }
    }

    /// Hermitian state from real populations and the upper coherence.
    pub fn from_parts(p11: f64, r12: Complex64) -> Result<Self> {
        Self::new(Complex64::new(p11, 0.0), r12, r12.conj(), Complex64::new(1.0 - p11, 0.0))
    }

    pub fn ground() -> Self {
        Self::new_unchecked(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }

    pub fn excited() -> Self {
        Self::new_unchecked(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    }

    pub fn maximally_mixed() -> Self {
        Self::new_unchecked(Complex64::new(0.5, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0))
    }

    pub fn r11(&self) -> Complex64 {
        self.r11
    }

    pub fn r12(&self) -> Complex64 {
        self.r12
    }

    pub fn r21(&self) -> Complex64 {
        self.r21
    }

    pub fn r22(&self) -> Complex64 {
        self.r22
    }

    /// Elements in row-major order.
    pub fn elements(&self) -> [Complex64; 4] {
        [self.r11, self.r12, self.r21, self.r22]
    }

    /// The eight real components in the order 11R, 11I, 12R, 12I, 21R, 21I, 22R, 22I.
    pub fn components(&self) -> [f64; 8] {
        [
            self.r11.re, self.r11.im, self.r12.re, self.r12.im, self.r21.re, self.r21.im, self.r22.re, self.r22.im,
        ]
    }

    pub fn trace(&self) -> Complex64 {
        self.r11 + self.r22
    }

    /// Largest deviation from Hermiticity over all elements.
    pub fn hermiticity_error(&self) -> f64 {
        (self.r21 - self.r12.conj()).norm().max(self.r11.im.abs()).max(self.r22.im.abs())
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.r11.re;
        let d = self.r22.re;
        let b = 0.5 * (self.r12 + self.r21.conj());
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half, mean + half]
    }

    pub fn validate(&self) -> Result<()> {
        let elems = self.elements();
        if elems.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidState("non-finite element".into()));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > STATE_TOL {
            return Err(Error::InvalidState(format!("non-Hermitian by {herm:e}")));
        }
        let lo = self.eigenvalues()[0];
        if lo < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {lo:e}")));
        }
        Ok(())
    }

    /// Hermitian projection `(rho + rho^dagger)/2` rescaled to unit trace.
    pub fn normalized(&self) -> Self {
        let p11 = self.r11.re;
        let p22 = self.r22.re;
        let tr = p11 + p22;
        let c = 0.5 * (self.r12 + self.r21.conj()) / tr;
        Self::new_unchecked(Complex64::new(p11 / tr, 0.0), c, c.conj(), Complex64::new(p22 / tr, 0.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, other: &BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn distance(&self, other: &BlochVector) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// A pure state on the great circle of the control plane S_phi.
///
/// `theta` is the polar angle measured within the plane, `phi` the plane's
/// azimuth (0 for the x-z plane, pi/2 for the y-z plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureStateAngle {
    theta: f64,
    phi: f64,
}

impl PureStateAngle {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidParameter("angle must be finite".into()));
        }
        if !(-PI..=PI).contains(&theta) {
            return Err(Error::InvalidParameter(format!("theta={theta} outside [-pi, pi]")));
        }
        if !(0.0..TAU).contains(&phi) {
            return Err(Error::InvalidParameter(format!("phi={phi} outside [0, 2pi)")));
        }
        Ok(Self { theta, phi })
    }

    /// Wraps arbitrary finite angles into the canonical ranges.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        Self { theta: wrap_angle(theta), phi: phi.rem_euclid(TAU) % TAU }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn bloch(&self) -> BlochVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        BlochVector::new(st * cp, -st * sp, ct)
    }

    /// In-plane angle of `v` for the plane with azimuth `phi`, or `None` if
    /// `v` lies off that plane by more than `tol`.
    pub fn in_plane(v: &BlochVector, phi: f64, tol: f64) -> Option<Self> {
        let (sp, cp) = phi.sin_cos();
        let normal = v.x * sp + v.y * cp;
        if normal.abs() > tol {
            return None;
        }
        let mut along = v.x * cp - v.y * sp;
        if along.abs() < 1e-15 {
            along = 0.0;
        }
        Some(Self::wrapped(along.atan2(v.z), phi))
    }
}

/// Wraps an angle into [-pi, pi].
pub fn wrap_angle(a: f64) -> f64 {
    if (-PI..=PI).contains(&a) {
        return a;
    }
    let w = (a + PI).rem_euclid(TAU) - PI;
    if w < -PI {
        w + TAU
    } else {
        w
    }
}

pub fn to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    rho.validate()?;
    Ok(bloch_of(rho))
}

/// Bloch vector without validation; used on hot paths of already valid states.
pub fn bloch_of(rho: &DensityMatrix) -> BlochVector {
    let c = 0.5 * (rho.r12 + rho.r21.conj());
    BlochVector::new(2.0 * c.re, -2.0 * c.im, rho.r22.re - rho.r11.re)
}

pub fn from_bloch(v: &BlochVector) -> Result<DensityMatrix> {
    if !(v.x.is_finite() && v.y.is_finite() && v.z.is_finite()) {
        return Err(Error::InvalidState("non-finite Bloch vector".into()));
    }
    let r = v.norm();
    if r > 1.0 + RADIUS_TOL {
        return Err(Error::InvalidState(format!("Bloch radius {r} exceeds 1")));
    }
    Ok(from_bloch_unchecked(v))
}

pub(crate) fn from_bloch_unchecked(v: &BlochVector) -> DensityMatrix {
    let r12 = Complex64::new(0.5 * v.x, -0.5 * v.y);
    DensityMatrix::new_unchecked(Complex64::new(0.5 * (1.0 - v.z), 0.0), r12, r12.conj(), Complex64::new(0.5 * (1.0 + v.z), 0.0))
}

pub fn pure_state(angle: &PureStateAngle) -> DensityMatrix {
    from_bloch_unchecked(&angle.bloch())
}

/// Overlap `<target|rho|target>`.
pub fn fidelity(rho: &DensityMatrix, target: &PureStateAngle) -> f64 {
    fidelity_bloch(&bloch_of(rho), &target.bloch())
}

/// Fidelity of a state with Bloch vector `v` against the pure state `n`.
pub fn fidelity_bloch(v: &BlochVector, n: &BlochVector) -> f64 {
    0.5 * (1.0 + v.dot(n))
}

/// Bloch radius.
pub fn purity(rho: &DensityMatrix) -> f64 {
    bloch_of(rho).norm()
}
