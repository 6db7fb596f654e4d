//! Renormalized hopping rates of the effective magnetic lattice.
//!
//! The rates are period averages of the rotating-frame hopping phase. Two
//! independent routes are provided: generic quadrature over one drive
//! period, and the closed forms for the sinusoidal and alternating
//! delta-kick waveforms. Each route is used to check the other.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::model::DriveSpec;
use crate::waveform::Waveform;

/// Uniform nodes for smooth-waveform quadrature.
pub const QUADRATURE_NODES: usize = 4096;
/// Node count of the refinement check.
pub const RICHARDSON_NODES: usize = 8192;
/// Largest tolerated gap between the two node counts.
pub const CONVERGENCE_TOL: f64 = 1e-9;

/// Effective hoppings and the flux they carry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveHoppings {
    pub kappa_x: Complex64,
    pub kappa_y: Complex64,
    /// Flux number `α = σM/(2π)`.
    pub alpha: f64,
    pub order: i64,
    pub sigma: f64,
    pub rho: f64,
}

impl EffectiveHoppings {
    pub fn new(kappa_x: Complex64, kappa_y: Complex64, order: i64, sigma: f64, rho: f64) -> Self {
        Self {
            kappa_x,
            kappa_y,
            alpha: sigma * order as f64 / TAU,
            order,
            sigma,
            rho,
        }
    }

    /// Hoppings with prescribed flux number, for band-structure work where
    /// no drive is involved (`M = 1`, `σ = 2πα`).
    pub fn with_flux(kappa_x: Complex64, kappa_y: Complex64, alpha: f64) -> Self {
        Self {
            kappa_x,
            kappa_y,
            alpha,
            order: 1,
            sigma: TAU * alpha,
            rho: 0.0,
        }
    }

    /// Phase `Mσ = 2πα` picked up per column by the y-hopping.
    pub fn peierls_phase(&self) -> f64 {
        self.sigma * self.order as f64
    }

    /// Effective hoppings of a resonant drive.
    pub fn from_drive(drive: &DriveSpec, jx: f64, jy: f64, method: HoppingMethod) -> Result<HoppingEstimate> {
        drive.ensure_resonant()?;
        let gamma = drive.gamma();
        match (method, &drive.waveform) {
            (HoppingMethod::ClosedForm, Waveform::Sinusoidal) => Ok(HoppingEstimate::exact(
                kappa_closed_sinusoidal(jx, jy, gamma, drive.sigma, drive.rho, drive.order),
            )),
            (HoppingMethod::ClosedForm, Waveform::AlternatingDeltaKicks) => Ok(HoppingEstimate::exact(
                kappa_closed_delta(jx, jy, gamma, drive.sigma, drive.rho, drive.order)?,
            )),
            (HoppingMethod::ClosedForm, Waveform::SampledPeriodic(_)) => Err(Error::InvalidArgument(
                "no closed form for sampled waveforms; use quadrature".to_string(),
            )),
            (HoppingMethod::Quadrature, waveform) => {
                let kx = kappa_x_quadrature(jx, gamma, drive.sigma, waveform);
                let ky = kappa_y_quadrature(jy, gamma, drive.rho, drive.order, waveform);
                let discrepancy = kx.discrepancy.max(ky.discrepancy);
                Ok(HoppingEstimate {
                    hoppings: Self::new(kx.value, ky.value, drive.order, drive.sigma, drive.rho),
                    warning: (discrepancy > CONVERGENCE_TOL).then_some(ConvergenceWarning { discrepancy }),
                })
            }
        }
    }
}

/// How effective hoppings are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HoppingMethod {
    #[default]
    ClosedForm,
    Quadrature,
}

/// Quadrature refinement gap above [`CONVERGENCE_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceWarning {
    pub discrepancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoppingEstimate {
    pub hoppings: EffectiveHoppings,
    pub warning: Option<ConvergenceWarning>,
}

impl HoppingEstimate {
    fn exact(hoppings: EffectiveHoppings) -> Self {
        Self { hoppings, warning: None }
    }
}

/// A period average and the gap to its refined estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureValue {
    pub value: Complex64,
    pub discrepancy: f64,
}

impl QuadratureValue {
    pub fn converged(&self) -> bool {
        self.discrepancy <= CONVERGENCE_TOL
    }
}

/// `κ_x = (J_x/2π) ∫₀^{2π} exp{iΓ[G(x) - G(x+σ)]} dx`.
pub fn kappa_x_quadrature(jx: f64, gamma: f64, sigma: f64, waveform: &Waveform) -> QuadratureValue {
    period_average(waveform, gamma, sigma, 0).scale(jx)
}

/// `κ_y = (J_y/2π) ∫₀^{2π} exp{-iMx + iΓ[G(x) - G(x+ρ)]} dx`.
pub fn kappa_y_quadrature(jy: f64, gamma: f64, rho: f64, order: i64, waveform: &Waveform) -> QuadratureValue {
    period_average(waveform, gamma, rho, order).scale(jy)
}

impl QuadratureValue {
    fn scale(self, factor: f64) -> Self {
        Self {
            value: self.value * factor,
            discrepancy: self.discrepancy * factor.abs(),
        }
    }
}

fn period_average(waveform: &Waveform, gamma: f64, shift: f64, order: i64) -> QuadratureValue {
    match waveform {
        Waveform::AlternatingDeltaKicks => QuadratureValue {
            value: staircase_average(gamma, shift, order),
            discrepancy: 0.0,
        },
        _ => {
            let coarse = uniform_average(waveform, gamma, shift, order, QUADRATURE_NODES);
            let fine = uniform_average(waveform, gamma, shift, order, RICHARDSON_NODES);
            QuadratureValue {
                value: coarse,
                discrepancy: (coarse - fine).norm(),
            }
        }
    }
}

fn uniform_average(waveform: &Waveform, gamma: f64, shift: f64, order: i64, nodes: usize) -> Complex64 {
    let h = TAU / nodes as f64;
    let sum: Complex64 = (0..nodes)
        .map(|j| {
            let x = j as f64 * h;
            let phase = -(order as f64) * x + gamma * (waveform.g(x) - waveform.g(x + shift));
            Complex64::from_polar(1.0, phase)
        })
        .sum();
    sum / nodes as f64
}

/// Exact average for the staircase `G`: the phase is piecewise constant
/// between the breakpoints of `G(x)` and `G(x + shift)`.
fn staircase_average(gamma: f64, shift: f64, order: i64) -> Complex64 {
    let waveform = Waveform::AlternatingDeltaKicks;
    let mut cuts = vec![0.0, PI, (-shift).rem_euclid(TAU), (PI - shift).rem_euclid(TAU)];
    cuts.retain(|&c| c < TAU);
    cuts.push(TAU);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut total = Complex64::new(0.0, 0.0);
    for pair in cuts.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        if b <= a {
            continue;
        }
        let mid = 0.5 * (a + b);
        let level = Complex64::from_polar(1.0, gamma * (waveform.g(mid) - waveform.g(mid + shift)));
        let weight = if order == 0 {
            Complex64::new(b - a, 0.0)
        } else {
            // ∫_a^b e^{-iMx} dx
            let mf = order as f64;
            (Complex64::from_polar(1.0, -mf * b) - Complex64::from_polar(1.0, -mf * a)) / Complex64::new(0.0, -mf)
        };
        total += level * weight;
    }
    total / TAU
}

/// Closed forms for `H(x) = cos x`:
/// `κ_x = J_x 𝒥₀(2Γ sin(σ/2))`, `κ_y = J_y 𝒥_M(2Γ sin(ρ/2)) e^{iM(ρ-π)/2}`.
pub fn kappa_closed_sinusoidal(jx: f64, jy: f64, gamma: f64, sigma: f64, rho: f64, order: i64) -> EffectiveHoppings {
    let kx = jx * bessel_j(0, 2.0 * gamma * (0.5 * sigma).sin());
    let ky_mag = jy * bessel_j(order, 2.0 * gamma * (0.5 * rho).sin());
    let ky = ky_mag * y_phase(order, rho);
    EffectiveHoppings::new(Complex64::new(kx, 0.0), ky, order, sigma, rho)
}

/// Closed forms for the alternating delta-kick train.
pub fn kappa_closed_delta(jx: f64, jy: f64, gamma: f64, sigma: f64, rho: f64, order: i64) -> Result<EffectiveHoppings> {
    if rho == 0.0 {
        return Err(Error::DegenerateDrive("rho = 0 has no kick-restored y tunneling".to_string()));
    }
    if order == 0 {
        return Err(Error::DegenerateDrive("resonance order M = 0".to_string()));
    }
    let half_gamma = 0.5 * gamma;
    let kx = jx * (1.0 - 2.0 * sigma.abs() / PI * half_gamma.sin().powi(2));
    let mf = order as f64;
    let ky_mag = 4.0 * jy / (mf * PI)
        * (0.5 * mf * rho).sin()
        * half_gamma.sin()
        * (0.5 * mf * PI - rho.signum() * half_gamma).sin();
    Ok(EffectiveHoppings::new(
        Complex64::new(kx, 0.0),
        ky_mag * y_phase(order, rho),
        order,
        sigma,
        rho,
    ))
}

fn y_phase(order: i64, rho: f64) -> Complex64 {
    Complex64::from_polar(1.0, 0.5 * order as f64 * (rho - PI))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_drive_leaves_x_untouched_and_blocks_y() {
        let kx = kappa_x_quadrature(1.0, 0.0, 1.234, &Waveform::Sinusoidal);
        assert!((kx.value - 1.0).norm() < 1e-15);
        let ky = kappa_y_quadrature(1.0, 0.0, 0.8, 1, &Waveform::Sinusoidal);
        assert!(ky.value.norm() < 1e-14);
        let closed = kappa_closed_sinusoidal(1.0, 1.0, 0.0, 1.0, 2.0, 2);
        assert_eq!(closed.kappa_x, Complex64::new(1.0, 0.0));
        assert_eq!(closed.kappa_y.norm(), 0.0);
    }

    #[test]
    fn fringe_drive_rates() {
        let kx = kappa_x_quadrature(1.0, 0.717, PI, &Waveform::Sinusoidal);
        assert!(kx.converged());
        assert!((kx.value.re - 0.548_327_588_720_333_5).abs() < 1e-12);
        assert!(kx.value.im.abs() < 1e-12);
        let ky = kappa_y_quadrature(1.0, 0.717, PI, 1, &Waveform::Sinusoidal);
        assert!((ky.value.re - 0.547_830_860_546_080_3).abs() < 1e-12);
        assert!(ky.value.im.abs() < 1e-12);
    }

    #[test]
    fn cyclotron_drive_rates() {
        let ky = kappa_y_quadrature(2.0, 0.9, PI, 1, &Waveform::Sinusoidal);
        assert!((ky.value.norm() - 1.163_033_903_462_330_5).abs() < 1e-12);
        let h = kappa_closed_sinusoidal(1.0, 2.0, 0.9, -PI / 25.0, PI, 1);
        assert!((h.kappa_x.re - 0.996_809_002_811_780_2).abs() < 1e-12);
        assert!((h.kappa_y.norm() - 1.163_033_903_462_330_5).abs() < 1e-12);
    }

    #[test]
    fn delta_examples() {
        let kx = kappa_x_quadrature(1.0, PI, PI, &Waveform::AlternatingDeltaKicks);
        assert!((kx.value - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        let closed = kappa_closed_delta(1.0, 1.0, PI, PI, 1.0, 1).unwrap();
        assert!((closed.kappa_x.re + 1.0).abs() < 1e-14);

        let h = kappa_closed_delta(1.0, 1.0, 1.3, 0.0, 2.0, 1).unwrap();
        assert_eq!(h.kappa_x.re, 1.0);
        let h = kappa_closed_delta(1.0, 1.0, 0.0, 1.0, 2.0, 1).unwrap();
        assert_eq!(h.kappa_y.norm(), 0.0);

        let h = kappa_closed_delta(1.0, 1.0, PI / 2.0, PI, PI, 1).unwrap();
        assert!((h.kappa_y - Complex64::new(2.0 / PI, 0.0)).norm() < 1e-14);
        let q = kappa_y_quadrature(1.0, PI / 2.0, PI, 1, &Waveform::AlternatingDeltaKicks);
        assert!((q.value - h.kappa_y).norm() < 1e-10);
    }

    #[test]
    fn delta_rejects_degenerate_drives() {
        assert!(matches!(kappa_closed_delta(1.0, 1.0, 1.0, 1.0, 0.0, 1), Err(Error::DegenerateDrive(_))));
        assert!(matches!(kappa_closed_delta(1.0, 1.0, 1.0, 1.0, 1.0, 0), Err(Error::DegenerateDrive(_))));
    }

    #[test]
    fn closed_form_keeps_negative_magnitude() {
        // 𝒥₁ < 0 past its first zero: the complex value keeps the sign.
        let h = kappa_closed_sinusoidal(1.0, 1.0, 2.5, 0.0, PI, 1);
        assert!(h.kappa_y.re < 0.0);
        let q = kappa_y_quadrature(1.0, 2.5, PI, 1, &Waveform::Sinusoidal);
        assert!((q.value - h.kappa_y).norm() < 1e-12);
    }

    #[test]
    fn from_drive_requires_resonance() {
        let d = DriveSpec::new(0.0, 7.0, 8.0, 1.0, 1, 0.0, 1.0, Waveform::Sinusoidal).unwrap();
        assert!(EffectiveHoppings::from_drive(&d, 1.0, 1.0, HoppingMethod::ClosedForm).is_err());
        let d = DriveSpec::resonant(8.0, 1, 0.717, PI, PI, Waveform::Sinusoidal).unwrap();
        let est = EffectiveHoppings::from_drive(&d, 1.0, 1.0, HoppingMethod::Quadrature).unwrap();
        assert!(est.warning.is_none());
        assert!((est.hoppings.alpha - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sampled_waveform_quadrature_matches_sinusoid() {
        let samples: Vec<(f64, f64)> = (0..4096)
            .map(|i| {
                let x = TAU * i as f64 / 4096.0;
                (x, x.cos())
            })
            .collect();
        let w = Waveform::sampled(&samples).unwrap();
        let q = kappa_x_quadrature(1.0, 0.717, PI, &w);
        assert!((q.value.re - 0.548_327_588_720_333_5).abs() < 1e-6);
    }
}
