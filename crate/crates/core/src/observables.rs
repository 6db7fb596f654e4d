//! Column-integrated intensity, fringe visibility and revivals, centre-of-mass
//! paths, and the deviation between exact and effective runs.

use crate::effective::gauge_unmap;
use crate::error::{Error, Result};
use crate::integrator::Trajectory;
use crate::model::{DriveSpec, WaveField};

/// Minimum autocorrelation of a revival peak, relative to zero lag.
pub const REVIVAL_THRESHOLD: f64 = 0.5;
/// Relative tolerance on sample times being whole drive periods.
const STROBOSCOPIC_TOL: f64 = 1e-6;

/// Half-open range `[start, end)` of profile columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ColumnWindow {
    pub start: usize,
    pub end: usize,
}

impl ColumnWindow {
    /// Central half of `columns`, leaving a quarter margin on each side.
    pub fn central(columns: usize) -> Self {
        let margin = columns / 4;
        Self {
            start: margin,
            end: columns - margin,
        }
    }
}

/// `I_n(t) = Σ_m |c_{n,m}(t)|²` per sample, with derived fringe data.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeRecord {
    pub times: Vec<f64>,
    /// Column index of `profiles[k][0]`.
    pub n_min: i64,
    pub profiles: Vec<Vec<f64>>,
    pub visibility: Vec<f64>,
    pub revival_period: Option<f64>,
}

impl FringeRecord {
    /// Fills `visibility` over `window` and the autocorrelation revival period.
    pub fn analyze(mut self, window: Option<ColumnWindow>) -> Result<Self> {
        let cols = self.profiles.first().map_or(0, Vec::len);
        let window = window.unwrap_or_else(|| ColumnWindow::central(cols));
        self.visibility = self
            .profiles
            .iter()
            .map(|p| fringe_visibility(p, window))
            .collect::<Result<_>>()?;
        self.revival_period = revival_period(&self);
        Ok(self)
    }

    /// Boxcar average of profiles and visibility over `samples_per_cycle`
    /// consecutive samples, stamped at the window centre. With samples
    /// spaced at `period / samples_per_cycle` this removes the micromotion of
    /// a driven run. The revival period is recomputed on the averaged series.
    pub fn cycle_averaged(&self, samples_per_cycle: usize) -> Result<Self> {
        let k = samples_per_cycle;
        let n = self.times.len();
        if k == 0 || k > n || self.visibility.len() != n || self.profiles.len() != n {
            return Err(Error::InvalidArgument(format!(
                "cannot average {n} analyzed samples over windows of {k}"
            )));
        }
        let count = n - k + 1;
        let scale = 1.0 / k as f64;
        let mut out = Self {
            times: Vec::with_capacity(count),
            n_min: self.n_min,
            profiles: Vec::with_capacity(count),
            visibility: Vec::with_capacity(count),
            revival_period: None,
        };
        for start in 0..count {
            let span = start..start + k;
            out.times.push(0.5 * (self.times[start] + self.times[start + k - 1]));
            out.visibility.push(self.visibility[span.clone()].iter().sum::<f64>() * scale);
            let mut avg = vec![0.0; self.profiles[start].len()];
            for p in &self.profiles[span] {
                for (a, v) in avg.iter_mut().zip(p) {
                    *a += v * scale;
                }
            }
            out.profiles.push(avg);
        }
        out.revival_period = revival_period(&out);
        Ok(out)
    }
}

/// Column sums of `|c|²` over `m` at every sample.
pub fn vertical_profile(traj: &Trajectory) -> Result<FringeRecord> {
    let window = traj
        .window()
        .ok_or_else(|| Error::InvalidArgument("empty trajectory".to_string()))?;
    let nx = window.nx();
    let profiles = traj
        .fields
        .iter()
        .map(|field| {
            let mut cols = vec![0.0; nx];
            for (i, c) in field.amplitudes().iter().enumerate() {
                cols[i % nx] += c.norm_sqr();
            }
            cols
        })
        .collect();
    Ok(FringeRecord {
        times: traj.times.clone(),
        n_min: window.n_min,
        profiles,
        visibility: Vec::new(),
        revival_period: None,
    })
}

/// Local fringe contrast `Σ|I_n - Ī_n| / Σ Ī_n` over `window`, with the
/// smoothed envelope `Ī_n = (I_{n-1} + 2I_n + I_{n+1})/4`.
///
/// Zero for a profile that is linear across each triple of columns, one for
/// `{a, 0, a, 0, ...}`; always within `[0, 1]` for nonnegative input.
pub fn fringe_visibility(profile: &[f64], window: ColumnWindow) -> Result<f64> {
    if window.start < 1 || window.end + 1 > profile.len() || window.start >= window.end {
        return Err(Error::InvalidArgument(format!(
            "visibility window [{}, {}) must lie inside the {} columns and away from the edges",
            window.start,
            window.end,
            profile.len()
        )));
    }
    let (mut dev, mut env) = (0.0, 0.0);
    for n in window.start..window.end {
        let smooth = 0.25 * (profile[n - 1] + 2.0 * profile[n] + profile[n + 1]);
        dev += (profile[n] - smooth).abs();
        env += smooth;
    }
    if !(env > 0.0) {
        return Err(Error::ZeroNorm);
    }
    Ok((dev / env).clamp(0.0, 1.0))
}

/// Lag of the first autocorrelation peak of the visibility series after the
/// autocorrelation first turns negative, when that peak reaches
/// [`REVIVAL_THRESHOLD`] of the zero-lag value. Needs uniformly spaced
/// samples; returns `None` otherwise.
pub fn revival_period(record: &FringeRecord) -> Option<f64> {
    let v = &record.visibility;
    let t = &record.times;
    let n = v.len();
    if n < 4 || t.len() != n {
        return None;
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(dt > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return None;
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let x: Vec<f64> = v.iter().map(|a| a - mean).collect();
    let max_lag = n / 2;
    let acf: Vec<f64> = (0..=max_lag)
        .map(|k| (0..n - k).map(|i| x[i] * x[i + k]).sum::<f64>() / (n - k) as f64)
        .collect();
    if !(acf[0] > 1e-14) {
        return None;
    }
    let r: Vec<f64> = acf.iter().map(|a| a / acf[0]).collect();

    let decorrelated = (1..max_lag).find(|&k| r[k] < 0.0)?;
    let peak = (decorrelated + 1..max_lag).find(|&k| r[k] >= r[k - 1] && r[k] > r[k + 1])?;
    if r[peak] < REVIVAL_THRESHOLD {
        return None;
    }
    let (a, b, c) = (r[peak - 1], r[peak], r[peak + 1]);
    let denom = a - 2.0 * b + c;
    let offset = if denom.abs() > 1e-15 { 0.5 * (a - c) / denom } else { 0.0 };
    Some((peak as f64 + offset.clamp(-0.5, 0.5)) * dt)
}

/// Normalized first moments `(⟨n⟩, ⟨m⟩)` of a field.
pub fn center_of_mass(field: &WaveField) -> Result<(f64, f64)> {
    let norm = field.norm_sqr();
    if !(norm > 0.0) {
        return Err(Error::ZeroNorm);
    }
    let window = field.window();
    let (mut n_sum, mut m_sum) = (0.0, 0.0);
    for ((n, m), c) in window.sites().zip(field.amplitudes()) {
        let p = c.norm_sqr();
        n_sum += n as f64 * p;
        m_sum += m as f64 * p;
    }
    Ok((n_sum / norm, m_sum / norm))
}

/// Centre-of-mass path of a trajectory.
pub fn com_path(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    traj.fields.iter().map(center_of_mass).collect()
}

/// Per-sample distance between an exact run and an effective run mapped back
/// into the driven frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviationSeries {
    pub times: Vec<f64>,
    /// `max_{n,m} ||c| - |f||`.
    pub max_abs: Vec<f64>,
    /// `1 - |⟨f_mapped, c⟩|² / (‖f‖²‖c‖²)`.
    pub infidelity: Vec<f64>,
}

impl DeviationSeries {
    pub fn max_abs_peak(&self) -> f64 {
        self.max_abs.iter().copied().fold(0.0, f64::max)
    }

    pub fn infidelity_peak(&self) -> f64 {
        self.infidelity.iter().copied().fold(0.0, f64::max)
    }
}

/// Compares `full` against `effective` at their common stroboscopic samples.
pub fn model_deviation(full: &Trajectory, effective: &Trajectory, drive: &DriveSpec) -> Result<DeviationSeries> {
    if full.len() != effective.len() || full.fields.len() != effective.fields.len() {
        return Err(Error::Mismatch(format!(
            "{} exact samples vs {} effective samples",
            full.len(),
            effective.len()
        )));
    }
    if full.window() != effective.window() {
        return Err(Error::Mismatch("trajectories live on different windows".to_string()));
    }
    let period = drive.period();
    let mut out = DeviationSeries::default();
    for ((&t, c), (&te, f)) in full
        .times
        .iter()
        .zip(&full.fields)
        .zip(effective.times.iter().zip(&effective.fields))
    {
        if (t - te).abs() > 1e-12 * t.abs().max(1.0) {
            return Err(Error::Mismatch(format!("sample times {t} and {te} differ")));
        }
        let cycles = t / period;
        if (cycles - cycles.round()).abs() > STROBOSCOPIC_TOL * cycles.abs().max(1.0) {
            return Err(Error::Mismatch(format!("sample time {t} is not a whole number of drive periods")));
        }
        let max_abs = c
            .amplitudes()
            .iter()
            .zip(f.amplitudes())
            .map(|(a, b)| (a.norm() - b.norm()).abs())
            .fold(0.0, f64::max);
        let mapped = gauge_unmap(f, t, drive);
        let norms = c.norm_sqr() * mapped.norm_sqr();
        if !(norms > 0.0) {
            return Err(Error::ZeroNorm);
        }
        let overlap = mapped.inner(c)?.norm_sqr() / norms;
        out.times.push(t);
        out.max_abs.push(max_abs);
        out.infidelity.push((1.0 - overlap).max(0.0));
    }
    Ok(out)
}
