//! Conversion of normalized drive parameters into waveguide fabrication numbers.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs and derived fabrication parameters. Lengths in the units named by
/// each field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Waveguide spacing (m).
    pub d: f64,
    /// Vacuum wavelength (m).
    pub lambda: f64,
    /// Substrate refractive index.
    pub n_s: f64,
    /// Reference hopping rate (cm⁻¹).
    pub j: f64,
    pub gamma: f64,
    pub order: i64,
    /// Modulation angular frequency (cm⁻¹).
    pub omega: f64,
    /// Transverse index-gradient rate `F = Mω` (cm⁻¹).
    pub gradient: f64,
    /// Bending radius producing `F` (cm).
    pub radius: f64,
    /// Longitudinal modulation period `2π/ω` (mm).
    pub lambda_mod: f64,
    /// Modulation amplitude `Γω` (cm⁻¹).
    pub amplitude: f64,
    /// Index contrast of the modulation.
    pub delta_n: f64,
    /// Sample length `J·t_max / J` (cm).
    pub length: f64,
}

impl PhysicalParams {
    /// Gradient rate (cm⁻¹) produced by a bend of radius `radius_cm`.
    pub fn gradient_for_radius(&self, radius_cm: f64) -> f64 {
        TAU * self.n_s * self.d / (self.lambda * radius_cm * 1e-2) * 1e-2
    }

    /// Replaces the reported sample length with `jt_max / J`.
    pub fn with_propagation(mut self, jt_max: f64) -> Result<Self> {
        if !(jt_max > 0.0 && jt_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("J*t must be positive, got {jt_max}")));
        }
        self.length = jt_max / self.j;
        Ok(self)
    }
}

/// Default propagation distance, in units of `1/J`, behind the reported length.
pub const DEFAULT_JT_MAX: f64 = 10.0;

/// Fabrication parameters for rate `j` (cm⁻¹), `Γ`, `ω/J`, resonance order
/// `M`, spacing `d` (m), wavelength `lambda` (m) and substrate index `n_s`.
pub fn physical_units(
    j: f64,
    gamma: f64,
    omega_over_j: f64,
    order: i64,
    d: f64,
    lambda: f64,
    n_s: f64,
) -> Result<PhysicalParams> {
    for (name, v) in [("J", j), ("omega/J", omega_over_j), ("d", d), ("lambda", lambda), ("n_s", n_s)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")));
        }
    }
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidArgument(format!("Gamma must be nonnegative, got {gamma}")));
    }
    if order < 1 {
        return Err(Error::InvalidArgument(format!("resonance order must be >= 1, got {order}")));
    }
    let omega = omega_over_j * j;
    let gradient = order as f64 * omega;
    let radius_m = TAU * n_s * d / (lambda * gradient * 1e2);
    let amplitude = gamma * omega;
    Ok(PhysicalParams {
        d,
        lambda,
        n_s,
        j,
        gamma,
        order,
        omega,
        gradient,
        radius: radius_m * 1e2,
        lambda_mod: TAU / omega * 10.0,
        amplitude,
        delta_n: lambda * 1e2 * amplitude / TAU,
        length: DEFAULT_JT_MAX / j,
    })
}
