//! Fixed-step fourth-order Runge-Kutta stepping shared by the exact and
//! effective lattice models, plus the trajectory container.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{DriveSpec, LatticeWindow, WaveField};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Step cap, units of 1/J.
    pub dt_max: f64,
    /// Allowed norm drift per unit `J·t`.
    pub norm_drift_tol: f64,
    /// Edge-ring probability above which a run is flagged as truncated.
    pub edge_mass_tol: f64,
}

impl IntegratorOptions {
    pub const DEFAULT_NORM_DRIFT_TOL: f64 = 1e-8;
    pub const DEFAULT_EDGE_MASS_TOL: f64 = 1e-6;

    /// Defaults for a driven run: `dt_max = min(0.01/J, 0.02·2π/ω)`.
    pub fn for_drive(j_ref: f64, omega: f64) -> Self {
        let period = 2.0 * std::f64::consts::PI / omega.abs();
        Self {
            dt_max: (0.01 / j_ref).min(0.02 * period),
            ..Self::for_rate(j_ref)
        }
    }

    /// Defaults for a static Hamiltonian with largest rate `j_ref`.
    pub fn for_rate(j_ref: f64) -> Self {
        Self {
            dt_max: 0.01 / j_ref,
            norm_drift_tol: Self::DEFAULT_NORM_DRIFT_TOL,
            edge_mass_tol: Self::DEFAULT_EDGE_MASS_TOL,
        }
    }

    pub fn with_dt_max(mut self, dt_max: f64) -> Self {
        self.dt_max = dt_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(Error::InvalidArgument(format!("dt_max must be positive, got {}", self.dt_max)));
        }
        if !(self.norm_drift_tol > 0.0) || !(self.edge_mass_tol > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".to_string()));
        }
        Ok(())
    }
}

/// Run-level health checks.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Largest `|‖ψ(t)‖² - ‖ψ(0)‖²|` over the samples.
    pub norm_drift: f64,
    /// Drift budget `norm_drift_tol · J · T` of this run.
    pub norm_drift_budget: f64,
    pub max_edge_mass: f64,
    /// Edge mass exceeded `edge_mass_tol` at some sample.
    pub truncation_warning: bool,
    pub steps: usize,
}

impl Diagnostics {
    pub fn norm_drift_exceeded(&self) -> bool {
        self.norm_drift > self.norm_drift_budget
    }
}

/// Time-stamped fields from one evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub fields: Vec<WaveField>,
    /// Drive of an exact run; `None` for runs of the effective model.
    pub drive: Option<DriveSpec>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn window(&self) -> Option<&LatticeWindow> {
        self.fields.first().map(WaveField::window)
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }
}

/// Checks sample times: finite, nonnegative, strictly increasing.
pub fn check_samples(t_samples: &[f64]) -> Result<()> {
    if t_samples.is_empty() {
        return Err(Error::InvalidArgument("no sample times".to_string()));
    }
    if t_samples.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidArgument("sample times must be finite and >= 0".to_string()));
    }
    if t_samples.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("sample times must be strictly increasing".to_string()));
    }
    Ok(())
}

pub(crate) fn check_normalized(field: &WaveField) -> Result<()> {
    let norm = field.norm_sqr();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("initial field must be normalized (norm {norm})")));
    }
    Ok(())
}

/// Right-hand side `dψ/dt = f(t, ψ)` of a linear lattice system.
pub(crate) trait Rhs {
    fn eval(&mut self, t: f64, psi: &[Complex64], out: &mut [Complex64]);
}

/// Classical RK4 with reusable stage buffers.
pub(crate) struct Rk4 {
    k1: Vec<Complex64>,
    k2: Vec<Complex64>,
    k3: Vec<Complex64>,
    k4: Vec<Complex64>,
    tmp: Vec<Complex64>,
    pub steps: usize,
}

impl Rk4 {
    pub fn new(len: usize) -> Self {
        let z = vec![Complex64::new(0.0, 0.0); len];
        Self {
            k1: z.clone(),
            k2: z.clone(),
            k3: z.clone(),
            k4: z.clone(),
            tmp: z,
            steps: 0,
        }
    }

    pub fn step(&mut self, rhs: &mut impl Rhs, t: f64, h: f64, psi: &mut [Complex64]) {
        let half = 0.5 * h;
        rhs.eval(t, psi, &mut self.k1);
        axpy(&mut self.tmp, psi, half, &self.k1);
        rhs.eval(t + half, &self.tmp, &mut self.k2);
        axpy(&mut self.tmp, psi, half, &self.k2);
        rhs.eval(t + half, &self.tmp, &mut self.k3);
        axpy(&mut self.tmp, psi, h, &self.k3);
        rhs.eval(t + h, &self.tmp, &mut self.k4);
        let w = h / 6.0;
        for (i, p) in psi.iter_mut().enumerate() {
            *p += w * (self.k1[i] + 2.0 * (self.k2[i] + self.k3[i]) + self.k4[i]);
        }
        self.steps += 1;
    }

    /// Advances from `t0` to `t1` in equal substeps no longer than `dt_max`.
    pub fn advance(
        &mut self,
        rhs: &mut impl Rhs,
        t0: f64,
        t1: f64,
        dt_max: f64,
        psi: &mut [Complex64],
    ) -> Result<()> {
        let span = t1 - t0;
        if span <= 0.0 {
            return Ok(());
        }
        let n = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
        let h = span / n as f64;
        if t0 + h == t0 {
            return Err(Error::StepUnderflow(t0));
        }
        for k in 0..n {
            self.step(rhs, t0 + k as f64 * h, h, psi);
        }
        Ok(())
    }
}

fn axpy(out: &mut [Complex64], x: &[Complex64], a: f64, y: &[Complex64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// Tracks norm and edge mass over the samples of a run.
pub(crate) struct Monitor {
    norm0: f64,
    diag: Diagnostics,
    edge_mass_tol: f64,
}

impl Monitor {
    pub fn new(initial: &WaveField, opts: &IntegratorOptions, j_ref: f64, t_end: f64) -> Self {
        Self {
            norm0: initial.norm_sqr(),
            diag: Diagnostics {
                norm_drift_budget: opts.norm_drift_tol * j_ref * t_end.max(0.0),
                ..Diagnostics::default()
            },
            edge_mass_tol: opts.edge_mass_tol,
        }
    }

    pub fn record(&mut self, field: &WaveField) {
        self.diag.norm_drift = self.diag.norm_drift.max((field.norm_sqr() - self.norm0).abs());
        let edge = field.edge_mass();
        self.diag.max_edge_mass = self.diag.max_edge_mass.max(edge);
        if edge > self.edge_mass_tol {
            self.diag.truncation_warning = true;
        }
    }

    pub fn finish(mut self, steps: usize) -> Diagnostics {
        self.diag.steps = steps;
        self.diag
    }
}
