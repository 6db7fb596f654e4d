//! Scenario configuration: TOML files, or the JSON metadata written by a
//! previous run, resolved and validated before anything is computed.
//!
//! ```toml
//! kind = "full_evolve"        # full_evolve | effective_evolve | semiclassical
//!                             # | hoppings | spectrum | compare | units
//! name = "fringes"
//!
//! [drive]
//! omega = 8
//! order = 1
//! gamma = 0.717               # or amplitude = ...
//! sigma = "pi"                # numbers or expressions in pi
//! rho = "pi"
//! waveform = "sinusoidal"     # sinusoidal | delta_kicks | sampled
//!
//! [lattice]
//! jx = 1
//! jy = 1
//! half = 30                   # or n_min/n_max/m_min/m_max
//!
//! [input]
//! width = 5
//! tilt = 0
//! imprint = true
//!
//! [time]
//! t_end = 10
//! step = 0.05                 # or periods = k, or times = [...]
//! ```
//!
//! The full grammar, section by section, is in the crate README.

use std::path::Path;

use evalexpr::{ContextWithMutableVariables, DefaultNumericTypes, HashMapContext, Value};
use serde::{Deserialize, Deserializer, Serialize};

use crate::full::gaussian_input;
use crate::hopping::{EffectiveHoppings, HoppingEstimate, HoppingMethod};
use crate::integrator::IntegratorOptions;
use crate::model::{DriveSpec, LatticeWindow, WaveField};
use crate::spectrum::{RationalFlux, MIN_K_GRID};
use crate::units::{physical_units, PhysicalParams};
use crate::waveform::Waveform;

/// Config failures, split by the exit status they map to.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Half width of the default square window.
pub const DEFAULT_HALF: i64 = 30;

type ConfigResult<T> = std::result::Result<T, ConfigError>;

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// A real parameter, written as a number or as an arithmetic expression
/// that may use `pi`. Serialized back as a plain number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Real(pub f64);

impl Real {
    pub fn get(self) -> f64 {
        self.0
    }
}

impl From<f64> for Real {
    fn from(v: f64) -> Self {
        Self(v)
    }
}

/// Evaluates a numeric expression such as `-pi/25` or `2*pi/5`.
pub fn eval_expr(expr: &str) -> Result<f64, String> {
    let mut ctx = HashMapContext::<DefaultNumericTypes>::new();
    ctx.set_value("pi".into(), Value::Float(std::f64::consts::PI))
        .map_err(|e| e.to_string())?;
    let v = evalexpr::eval_number_with_context(expr, &ctx).map_err(|e| format!("`{expr}`: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{expr}` is not finite"))
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Expr(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(Real(v)),
            Repr::Expr(s) => eval_expr(&s).map(Real).map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FullEvolve,
    EffectiveEvolve,
    Semiclassical,
    Hoppings,
    Spectrum,
    Compare,
    Units,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveformKind {
    #[default]
    Sinusoidal,
    DeltaKicks,
    Sampled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodKind {
    #[default]
    ClosedForm,
    Quadrature,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub omega: Real,
    #[serde(default = "one")]
    pub order: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<Real>,
    /// Defaults to the resonant value `order * omega`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gradient: Option<Real>,
    #[serde(default = "zero")]
    pub beta0: Real,
    pub sigma: Real,
    pub rho: Real,
    #[serde(default)]
    pub waveform: WaveformKind,
    /// `(x, H(x))` nodes on `[0, 2π]` for `waveform = "sampled"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<[Real; 2]>>,
    #[serde(default)]
    pub center_samples: bool,
    #[serde(default)]
    pub hopping_method: MethodKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    #[serde(default = "unit")]
    pub jx: Real,
    #[serde(default = "unit")]
    pub jy: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_min: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_max: Option<i64>,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            jx: unit(),
            jy: unit(),
            half: None,
            n_min: None,
            n_max: None,
            m_min: None,
            m_max: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    #[serde(default = "five")]
    pub width: Real,
    /// Momentum `p` of the factor `exp(-ipn)`.
    #[serde(default = "zero")]
    pub tilt: Real,
    #[serde(default = "yes")]
    pub imprint: bool,
}

impl Default for InputConfig {
    fn default() -> Self {
        Self {
            width: five(),
            tilt: zero(),
            imprint: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<Real>,
    /// Uniform spacing of samples up to `t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<Real>,
    /// Sample every `periods` drive periods up to `t_end`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<u32>,
    /// Explicit sample times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<Real>>,
    #[serde(default = "yes")]
    pub include_zero: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_max: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_drift_tol: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_mass_tol: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    #[serde(default = "default_k_grid")]
    pub k_grid: usize,
    /// `"p/q"`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux: Option<String>,
    /// Irrational or decimal flux, replaced by its best approximant with `q ≤ 64`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Real>,
    /// Butterfly over the Farey fractions of this order.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub farey: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_x: Option<Real>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa_y: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareConfig {
    /// Drive frequencies to rerun at fixed `Γ`, `M`, `σ`, `ρ`.
    pub omegas: Vec<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub j: Real,
    pub gamma: Real,
    pub omega_over_j: Real,
    #[serde(default = "one")]
    pub order: i64,
    pub d: Real,
    pub lambda: Real,
    pub n_s: Real,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jt_max: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Write one modulus matrix per sample.
    #[serde(default = "yes")]
    pub frames: bool,
    #[serde(default = "one_usize")]
    pub frame_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            frames: true,
            frame_stride: 1,
        }
    }
}

/// A scenario as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    #[serde(default = "default_name")]
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub input: InputConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<TimeConfig>,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<UnitsConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn one() -> i64 {
    1
}
fn one_usize() -> usize {
    1
}
fn zero() -> Real {
    Real(0.0)
}
fn unit() -> Real {
    Real(1.0)
}
fn five() -> Real {
    Real(5.0)
}
fn yes() -> bool {
    true
}
fn default_k_grid() -> usize {
    64
}
fn default_name() -> String {
    "scenario".to_string()
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> ConfigResult<Self> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Accepts a bare scenario object or run metadata with a `scenario` key.
    pub fn from_json(text: &str) -> ConfigResult<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        if let Some(inner) = value.get_mut("scenario") {
            value = inner.take();
        }
        serde_json::from_value(value).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    /// Reads `.json` files as JSON and anything else as TOML.
    pub fn load(path: &Path) -> ConfigResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Parse(format!("{}: {e}", path.display())))?;
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            Self::from_json(&text)
        } else {
            Self::from_toml(&text)
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario configs serialize")
    }
}

/// Sample times of a scenario.
#[derive(Debug, Clone, PartialEq)]
pub enum Schedule {
    Times(Vec<f64>),
    /// Every `stride` periods of each compared drive, up to `t_end`.
    Stroboscopic { t_end: f64, stride: u32 },
}

/// A validated scenario with every derived object built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub drive: Option<DriveSpec>,
    pub window: LatticeWindow,
    pub jx: f64,
    pub jy: f64,
    pub method: HoppingMethod,
    pub schedule: Option<Schedule>,
    pub units: Option<PhysicalParams>,
}

impl Scenario {
    /// Validates `config` and resolves defaults.
    pub fn resolve(config: ScenarioConfig) -> ConfigResult<Self> {
        let kind = config.kind;
        let needs_drive = !matches!(kind, ScenarioKind::Units | ScenarioKind::Spectrum);
        let drive = match &config.drive {
            Some(d) => Some(build_drive(d)?),
            None if needs_drive => return Err(invalid("[drive] section is required")),
            None => None,
        };
        let window = build_window(&config.lattice)?;
        let (jx, jy) = (config.lattice.jx.get(), config.lattice.jy.get());
        if !(jx > 0.0 && jy >= 0.0 && jx.is_finite() && jy.is_finite()) {
            return Err(invalid(format!("hoppings must satisfy jx > 0, jy >= 0 (got {jx}, {jy})")));
        }
        let width = config.input.width.get();
        if !(width > 0.0 && width.is_finite()) {
            return Err(invalid(format!("input width must be positive, got {width}")));
        }
        if !config.input.tilt.get().is_finite() {
            return Err(invalid("input tilt must be finite"));
        }
        if config.output.frame_stride == 0 {
            return Err(invalid("output.frame_stride must be >= 1"));
        }
        let method = match config.drive.as_ref().map(|d| d.hopping_method).unwrap_or_default() {
            MethodKind::ClosedForm => HoppingMethod::ClosedForm,
            MethodKind::Quadrature => HoppingMethod::Quadrature,
        };

        let uses_effective = matches!(
            kind,
            ScenarioKind::EffectiveEvolve | ScenarioKind::Semiclassical | ScenarioKind::Hoppings | ScenarioKind::Compare
        );
        if uses_effective {
            if let Some(d) = &drive {
                d.ensure_resonant().map_err(|e| invalid(e.to_string()))?;
            }
        }

        let schedule = match kind {
            ScenarioKind::FullEvolve | ScenarioKind::EffectiveEvolve | ScenarioKind::Semiclassical => {
                Some(build_times(config.time.as_ref(), drive.as_ref())?)
            }
            ScenarioKind::Compare => Some(build_stroboscopic(config.time.as_ref())?),
            _ => None,
        };

        let units = match kind {
            ScenarioKind::Units => {
                let u = config.units.as_ref().ok_or_else(|| invalid("[units] section is required"))?;
                let p = physical_units(
                    u.j.get(),
                    u.gamma.get(),
                    u.omega_over_j.get(),
                    u.order,
                    u.d.get(),
                    u.lambda.get(),
                    u.n_s.get(),
                )
                .map_err(|e| invalid(e.to_string()))?;
                Some(match u.jt_max {
                    Some(jt) => p.with_propagation(jt.get()).map_err(|e| invalid(e.to_string()))?,
                    None => p,
                })
            }
            _ => None,
        };

        let scenario = Self {
            config,
            drive,
            window,
            jx,
            jy,
            method,
            schedule,
            units,
        };
        scenario.check_kind_sections()?;
        Ok(scenario)
    }

    fn check_kind_sections(&self) -> ConfigResult<()> {
        match self.config.kind {
            ScenarioKind::Spectrum => {
                let s = self.spectrum_config()?;
                if s.k_grid < MIN_K_GRID {
                    return Err(invalid(format!("spectrum.k_grid must be >= {MIN_K_GRID}")));
                }
                let chosen = [s.flux.is_some(), s.alpha.is_some(), s.farey.is_some()]
                    .iter()
                    .filter(|b| **b)
                    .count();
                if chosen > 1 {
                    return Err(invalid("give at most one of spectrum.flux, spectrum.alpha, spectrum.farey"));
                }
                if chosen == 0 && self.drive.is_none() {
                    return Err(invalid("spectrum needs flux, alpha, farey or a [drive] section"));
                }
                if let Some(f) = &s.farey {
                    if !(1..=64).contains(f) {
                        return Err(invalid("spectrum.farey must be in 1..=64"));
                    }
                }
                self.fluxes()?;
                self.spectrum_hoppings()?;
                Ok(())
            }
            ScenarioKind::Compare => {
                let c = self
                    .config
                    .compare
                    .as_ref()
                    .ok_or_else(|| invalid("[compare] section is required"))?;
                if c.omegas.is_empty() {
                    return Err(invalid("compare.omegas is empty"));
                }
                for w in &c.omegas {
                    self.drive_at(w.get())?;
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn spectrum_config(&self) -> ConfigResult<SpectrumConfig> {
        Ok(self.config.spectrum.clone().unwrap_or(SpectrumConfig {
            k_grid: default_k_grid(),
            flux: None,
            alpha: None,
            farey: None,
            kappa_x: None,
            kappa_y: None,
        }))
    }

    pub fn k_grid(&self) -> usize {
        self.config.spectrum.as_ref().map_or(default_k_grid(), |s| s.k_grid)
    }

    /// Fluxes of a spectrum scenario; more than one means a butterfly.
    pub fn fluxes(&self) -> ConfigResult<Vec<RationalFlux>> {
        let s = self.spectrum_config()?;
        if let Some(order) = s.farey {
            return Ok(RationalFlux::farey(order));
        }
        if let Some(text) = &s.flux {
            return Ok(vec![parse_flux(text)?]);
        }
        let alpha = match (s.alpha, &self.drive) {
            (Some(a), _) => a.get(),
            (None, Some(d)) => d.flux(),
            (None, None) => return Err(invalid("no flux given")),
        };
        RationalFlux::approximate(alpha)
            .map(|f| vec![f])
            .map_err(|e| invalid(e.to_string()))
    }

    /// `(κ_x, κ_y)` for band structure: explicit values or the drive's hoppings.
    pub fn spectrum_hoppings(&self) -> ConfigResult<(num_complex::Complex64, num_complex::Complex64)> {
        let s = self.spectrum_config()?;
        match (s.kappa_x, s.kappa_y, &self.drive) {
            (Some(x), Some(y), _) => Ok((x.get().into(), y.get().into())),
            (None, None, Some(_)) => {
                let h = self.hoppings()?.hoppings;
                Ok((h.kappa_x, h.kappa_y))
            }
            (None, None, None) => Ok((1.0.into(), 1.0.into())),
            _ => Err(invalid("give both spectrum.kappa_x and spectrum.kappa_y, or neither")),
        }
    }

    pub fn hoppings(&self) -> ConfigResult<HoppingEstimate> {
        let drive = self.drive.as_ref().ok_or_else(|| invalid("[drive] section is required"))?;
        EffectiveHoppings::from_drive(drive, self.jx, self.jy, self.method).map_err(|e| invalid(e.to_string()))
    }

    /// The configured drive moved to frequency `omega` at fixed `Γ`.
    pub fn drive_at(&self, omega: f64) -> ConfigResult<DriveSpec> {
        let d = self.drive.as_ref().ok_or_else(|| invalid("[drive] section is required"))?;
        let moved = DriveSpec::new(
            d.beta0,
            d.order as f64 * omega,
            omega,
            d.gamma() * omega,
            d.order,
            d.sigma,
            d.rho,
            d.waveform.clone(),
        )
        .map_err(|e| invalid(e.to_string()))?;
        Ok(moved)
    }

    /// Lab-frame input field for `drive`.
    pub fn input_field(&self, drive: &DriveSpec) -> crate::Result<WaveField> {
        let i = &self.config.input;
        gaussian_input(&self.window, i.width.get(), i.tilt.get(), drive, i.imprint)
    }

    /// Integrator options with config overrides applied.
    pub fn integrator(&self, drive: Option<&DriveSpec>) -> ConfigResult<IntegratorOptions> {
        let j_ref = self.jx.max(self.jy);
        let mut opts = match drive {
            Some(d) => IntegratorOptions::for_drive(j_ref, d.omega),
            None => IntegratorOptions::for_rate(j_ref),
        };
        let c = &self.config.integrator;
        if let Some(v) = c.dt_max {
            opts.dt_max = v.get();
        }
        if let Some(v) = c.norm_drift_tol {
            opts.norm_drift_tol = v.get();
        }
        if let Some(v) = c.edge_mass_tol {
            opts.edge_mass_tol = v.get();
        }
        opts.validate().map_err(|e| invalid(e.to_string()))?;
        Ok(opts)
    }

    /// Sample times for `drive` (`None` unless the scenario evolves fields).
    pub fn times_for(&self, drive: &DriveSpec) -> Option<Vec<f64>> {
        match self.schedule.as_ref()? {
            Schedule::Times(t) => Some(t.clone()),
            Schedule::Stroboscopic { t_end, stride } => Some(stroboscopic_times(drive.period(), *t_end, *stride, true)),
        }
    }
}

fn parse_flux(text: &str) -> ConfigResult<RationalFlux> {
    let (p, q) = text
        .split_once('/')
        .ok_or_else(|| invalid(format!("flux `{text}` is not of the form p/q")))?;
    let p: i64 = p.trim().parse().map_err(|_| invalid(format!("bad flux numerator in `{text}`")))?;
    let q: i64 = q.trim().parse().map_err(|_| invalid(format!("bad flux denominator in `{text}`")))?;
    RationalFlux::new(p, q).map_err(|e| invalid(e.to_string()))
}

fn build_drive(d: &DriveConfig) -> ConfigResult<DriveSpec> {
    let omega = d.omega.get();
    let amplitude = match (d.gamma, d.amplitude) {
        (Some(g), None) => g.get() * omega,
        (None, Some(a)) => a.get(),
        (None, None) => return Err(invalid("drive needs gamma or amplitude")),
        (Some(_), Some(_)) => return Err(invalid("give drive.gamma or drive.amplitude, not both")),
    };
    let waveform = match d.waveform {
        WaveformKind::Sinusoidal => Waveform::Sinusoidal,
        WaveformKind::DeltaKicks => Waveform::AlternatingDeltaKicks,
        WaveformKind::Sampled => {
            let samples: Vec<(f64, f64)> = d
                .samples
                .as_ref()
                .ok_or_else(|| invalid("waveform = \"sampled\" needs drive.samples"))?
                .iter()
                .map(|[x, h]| (x.get(), h.get()))
                .collect();
            let built = if d.center_samples {
                Waveform::sampled_centered(&samples)
            } else {
                Waveform::sampled(&samples)
            };
            built.map_err(|e| invalid(e.to_string()))?
        }
    };
    if d.samples.is_some() && d.waveform != WaveformKind::Sampled {
        return Err(invalid("drive.samples given for a non-sampled waveform"));
    }
    let gradient = d.gradient.map_or(d.order as f64 * omega, Real::get);
    DriveSpec::new(
        d.beta0.get(),
        gradient,
        omega,
        amplitude,
        d.order,
        d.sigma.get(),
        d.rho.get(),
        waveform,
    )
    .map_err(|e| invalid(e.to_string()))
}

fn build_window(l: &LatticeConfig) -> ConfigResult<LatticeWindow> {
    let bounds = [l.n_min, l.n_max, l.m_min, l.m_max];
    let window = match (l.half, bounds.iter().any(Option::is_some)) {
        (Some(_), true) => return Err(invalid("give lattice.half or explicit bounds, not both")),
        (Some(h), false) => LatticeWindow::centered(h),
        (None, false) => LatticeWindow::centered(DEFAULT_HALF),
        (None, true) => match bounds {
            [Some(a), Some(b), Some(c), Some(d)] => LatticeWindow::new(a, b, c, d),
            _ => return Err(invalid("explicit lattice bounds need all of n_min, n_max, m_min, m_max")),
        },
    };
    window.map_err(|e| invalid(e.to_string()))
}

fn stroboscopic_times(period: f64, t_end: f64, stride: u32, include_zero: bool) -> Vec<f64> {
    let step = period * stride as f64;
    let count = (t_end / step + 1e-9).floor() as usize;
    let first = if include_zero { 0 } else { 1 };
    (first..=count).map(|k| k as f64 * step).collect()
}

fn build_times(t: Option<&TimeConfig>, drive: Option<&DriveSpec>) -> ConfigResult<Schedule> {
    let t = t.ok_or_else(|| invalid("[time] section is required"))?;
    let chosen = [t.step.is_some(), t.periods.is_some(), t.times.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if chosen != 1 {
        return Err(invalid("give exactly one of time.step, time.periods, time.times"));
    }
    let times = if let Some(list) = &t.times {
        list.iter().map(|r| r.get()).collect()
    } else {
        let t_end = t
            .t_end
            .ok_or_else(|| invalid("time.t_end is required with step or periods"))?
            .get();
        if !(t_end > 0.0 && t_end.is_finite()) {
            return Err(invalid(format!("time.t_end must be positive, got {t_end}")));
        }
        if let Some(step) = t.step {
            let step = step.get();
            if !(step > 0.0 && step.is_finite()) {
                return Err(invalid(format!("time.step must be positive, got {step}")));
            }
            let count = (t_end / step + 1e-9).floor() as usize;
            let first = if t.include_zero { 0 } else { 1 };
            (first..=count).map(|k| k as f64 * step).collect()
        } else {
            let stride = t.periods.unwrap_or(1);
            if stride == 0 {
                return Err(invalid("time.periods must be >= 1"));
            }
            let drive = drive.ok_or_else(|| invalid("time.periods needs a [drive] section"))?;
            stroboscopic_times(drive.period(), t_end, stride, t.include_zero)
        }
    };
    crate::integrator::check_samples(&times).map_err(|e| invalid(e.to_string()))?;
    Ok(Schedule::Times(times))
}

fn build_stroboscopic(t: Option<&TimeConfig>) -> ConfigResult<Schedule> {
    let t = t.ok_or_else(|| invalid("[time] section is required"))?;
    if t.step.is_some() || t.times.is_some() {
        return Err(invalid("compare samples whole drive periods; use time.t_end with optional time.periods"));
    }
    let t_end = t.t_end.ok_or_else(|| invalid("time.t_end is required"))?.get();
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(invalid(format!("time.t_end must be positive, got {t_end}")));
    }
    let stride = t.periods.unwrap_or(1);
    if stride == 0 {
        return Err(invalid("time.periods must be >= 1"));
    }
    Ok(Schedule::Stroboscopic { t_end, stride })
}
