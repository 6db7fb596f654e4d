//! Lattice, drive and field types, plus the on-site detuning and the gauge
//! phase that maps the driven frame onto the static magnetic lattice.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::waveform::Waveform;

/// Slack allowed on the `|σ|, |ρ| ≤ π` bound for values computed in floating point.
const PHASE_BOUND_SLACK: f64 = 1e-12;

/// Boundary treatment at the edges of a [`LatticeWindow`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BoundaryPolicy {
    /// Amplitudes outside the window are identically zero.
    #[default]
    HardWall,
}

/// A finite rectangular block of lattice sites `(n, m)`, inclusive bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeWindow {
    pub n_min: i64,
    pub n_max: i64,
    pub m_min: i64,
    pub m_max: i64,
    pub boundary: BoundaryPolicy,
}

impl LatticeWindow {
    pub fn new(n_min: i64, n_max: i64, m_min: i64, m_max: i64) -> Result<Self> {
        if n_max < n_min || m_max < m_min {
            return Err(Error::InvalidWindow(format!(
                "n in [{n_min}, {n_max}], m in [{m_min}, {m_max}]"
            )));
        }
        Ok(Self {
            n_min,
            n_max,
            m_min,
            m_max,
            boundary: BoundaryPolicy::HardWall,
        })
    }

    /// Square window `[-half, half]²`; `half = 30` gives the default 61×61 grid.
    pub fn centered(half: i64) -> Result<Self> {
        if half < 0 {
            return Err(Error::InvalidWindow(format!("negative half width {half}")));
        }
        Self::new(-half, half, -half, half)
    }

    pub fn nx(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn ny(&self) -> usize {
        (self.m_max - self.m_min + 1) as usize
    }

    pub fn len(&self) -> usize {
        self.nx() * self.ny()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, n: i64, m: i64) -> bool {
        (self.n_min..=self.n_max).contains(&n) && (self.m_min..=self.m_max).contains(&m)
    }

    /// Flat storage index, rows ordered by `m` and columns by `n`.
    pub fn index(&self, n: i64, m: i64) -> Result<usize> {
        if !self.contains(n, m) {
            return Err(Error::SiteOutOfWindow { n, m });
        }
        Ok((m - self.m_min) as usize * self.nx() + (n - self.n_min) as usize)
    }

    /// Site coordinates of a flat index.
    pub fn site(&self, idx: usize) -> (i64, i64) {
        let nx = self.nx();
        (
            self.n_min + (idx % nx) as i64,
            self.m_min + (idx / nx) as i64,
        )
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (self.m_min..=self.m_max).flat_map(move |m| (self.n_min..=self.n_max).map(move |n| (n, m)))
    }

    pub fn is_edge(&self, n: i64, m: i64) -> bool {
        n == self.n_min || n == self.n_max || m == self.m_min || m == self.m_max
    }

    fn check(&self, n: i64, m: i64) -> Result<()> {
        if self.contains(n, m) {
            Ok(())
        } else {
            Err(Error::SiteOutOfWindow { n, m })
        }
    }
}

impl Default for LatticeWindow {
    fn default() -> Self {
        Self::centered(30).expect("static window")
    }
}

/// All drive parameters: reference propagation constant `β₀`, gradient rate
/// `F`, modulation frequency `ω` and amplitude `A`, resonance order `M`,
/// phase gradients `σ` (along x) and `ρ` (along y), and the waveform.
///
/// Rates are in units of the reference hopping `J`.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveSpec {
    pub beta0: f64,
    pub gradient: f64,
    pub omega: f64,
    pub amplitude: f64,
    pub order: i64,
    pub sigma: f64,
    pub rho: f64,
    pub waveform: Waveform,
}

impl DriveSpec {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        beta0: f64,
        gradient: f64,
        omega: f64,
        amplitude: f64,
        order: i64,
        sigma: f64,
        rho: f64,
        waveform: Waveform,
    ) -> Result<Self> {
        let drive = Self {
            beta0,
            gradient,
            omega,
            amplitude,
            order,
            sigma,
            rho,
            waveform,
        };
        drive.validate()?;
        Ok(drive)
    }

    /// Resonant drive with `F = Mω` and `β₀ = 0`, parameterized by
    /// `Γ = A/ω` rather than `A`.
    pub fn resonant(
        omega: f64,
        order: i64,
        gamma: f64,
        sigma: f64,
        rho: f64,
        waveform: Waveform,
    ) -> Result<Self> {
        Self::new(
            0.0,
            order as f64 * omega,
            omega,
            gamma * omega,
            order,
            sigma,
            rho,
            waveform,
        )
    }

    pub fn with_beta0(mut self, beta0: f64) -> Result<Self> {
        self.beta0 = beta0;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            ("beta0", self.beta0),
            ("gradient", self.gradient),
            ("omega", self.omega),
            ("amplitude", self.amplitude),
            ("sigma", self.sigma),
            ("rho", self.rho),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::InvalidDrive(format!("{name} is not finite")));
            }
        }
        if self.omega <= 0.0 {
            return Err(Error::InvalidDrive("omega must be positive".to_string()));
        }
        if self.sigma.abs() > PI + PHASE_BOUND_SLACK || self.rho.abs() > PI + PHASE_BOUND_SLACK {
            return Err(Error::InvalidDrive(format!(
                "phase gradients must satisfy |sigma|, |rho| <= pi (got {}, {})",
                self.sigma, self.rho
            )));
        }
        Ok(())
    }

    /// `Γ = A/ω`.
    pub fn gamma(&self) -> f64 {
        self.amplitude / self.omega
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega.abs()
    }

    pub fn is_resonant(&self) -> bool {
        let target = self.order as f64 * self.omega;
        (self.gradient - target).abs() <= 1e-12 * target.abs().max(1.0)
    }

    pub fn ensure_resonant(&self) -> Result<()> {
        if self.is_resonant() {
            Ok(())
        } else {
            Err(Error::NotResonant {
                f: self.gradient,
                m_omega: self.order as f64 * self.omega,
            })
        }
    }

    /// Flux number `α = σM/(2π)`.
    pub fn flux(&self) -> f64 {
        self.sigma * self.order as f64 / (2.0 * PI)
    }

    /// Drive phase offset `φ = nσ + mρ` of a site (no window check).
    pub fn phase_offset(&self, n: i64, m: i64) -> f64 {
        n as f64 * self.sigma + m as f64 * self.rho
    }

    /// Static phase imprint `Γ·G(φ) + (M/2)ρ m(m-1)`.
    pub fn static_imprint(&self, n: i64, m: i64) -> f64 {
        let staircase = 0.5 * self.order as f64 * self.rho * (m * (m - 1)) as f64;
        self.gamma() * self.waveform.g(self.phase_offset(n, m)) + staircase
    }

    /// `∫₀ᵗ β_{n,m}(t') dt'`, with the modulation integrated through `G`.
    pub fn accumulated_detuning(&self, n: i64, m: i64, t: f64) -> f64 {
        let phi = self.phase_offset(n, m);
        let modulation = self.gamma() * (self.waveform.g(self.omega * t + phi) - self.waveform.g(phi));
        (self.beta0 + self.gradient * m as f64) * t + modulation
    }
}

/// Phase offset `φ_{n,m} = nσ + mρ` of a site inside `window`.
pub fn phase_offsets(drive: &DriveSpec, window: &LatticeWindow, n: i64, m: i64) -> Result<f64> {
    window.check(n, m)?;
    Ok(drive.phase_offset(n, m))
}

/// On-site propagation constant `β₀ + Fm + A·H(ωt + φ)`.
pub fn beta_site(drive: &DriveSpec, n: i64, m: i64, t: f64) -> Result<f64> {
    let h = drive.waveform.h(drive.omega * t + drive.phase_offset(n, m))?;
    Ok(drive.beta0 + drive.gradient * m as f64 + drive.amplitude * h)
}

/// Full gauge phase `θ_{n,m}(t)` with `c = f·exp(-iθ)`: the static imprint
/// plus the accumulated detuning.
pub fn gauge_phase(drive: &DriveSpec, window: &LatticeWindow, n: i64, m: i64, t: f64) -> Result<f64> {
    window.check(n, m)?;
    Ok(drive.static_imprint(n, m) + drive.accumulated_detuning(n, m, t))
}

/// Complex amplitudes on a lattice window.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    window: LatticeWindow,
    amplitudes: Vec<Complex64>,
}

impl WaveField {
    pub fn zeros(window: LatticeWindow) -> Self {
        Self {
            amplitudes: vec![Complex64::new(0.0, 0.0); window.len()],
            window,
        }
    }

    pub fn from_fn(window: LatticeWindow, mut f: impl FnMut(i64, i64) -> Complex64) -> Self {
        let amplitudes = window.sites().map(|(n, m)| f(n, m)).collect();
        Self { window, amplitudes }
    }

    pub fn from_amplitudes(window: LatticeWindow, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != window.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} amplitudes, got {}",
                window.len(),
                amplitudes.len()
            )));
        }
        Ok(Self { window, amplitudes })
    }

    /// Field with unit amplitude on one site.
    pub fn single_site(window: LatticeWindow, n: i64, m: i64) -> Result<Self> {
        let mut field = Self::zeros(window);
        field.set(n, m, Complex64::new(1.0, 0.0))?;
        Ok(field)
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn get(&self, n: i64, m: i64) -> Result<Complex64> {
        Ok(self.amplitudes[self.window.index(n, m)?])
    }

    pub fn set(&mut self, n: i64, m: i64, value: Complex64) -> Result<()> {
        let idx = self.window.index(n, m)?;
        self.amplitudes[idx] = value;
        Ok(())
    }

    /// `Σ |c|²`.
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let norm = self.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / norm;
        for c in &mut self.amplitudes {
            *c *= scale;
        }
        Ok(())
    }

    /// Probability on the outermost ring of sites.
    pub fn edge_mass(&self) -> f64 {
        self.window
            .sites()
            .zip(&self.amplitudes)
            .filter(|((n, m), _)| self.window.is_edge(*n, *m))
            .map(|(_, c)| c.norm_sqr())
            .sum()
    }

    pub fn moduli(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm()).collect()
    }

    /// `⟨self, other⟩ = Σ conj(self)·other`.
    pub fn inner(&self, other: &WaveField) -> Result<Complex64> {
        if self.window != other.window {
            return Err(Error::Mismatch("fields live on different windows".to_string()));
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}
