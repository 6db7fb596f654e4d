//! Periodic drive waveforms `H(x)` (period 2π, zero mean) and their running
//! integrals `G(x) = ∫₀ˣ H`.

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Kick positions closer than this (in units of π) to a multiple of π are
/// treated as lying exactly on it.
pub(crate) const KICK_SNAP: f64 = 1e-9;

/// Tolerance on the trapezoidal mean of sampled waveforms.
pub const SAMPLED_MEAN_TOL: f64 = 1e-12;

/// A 2π-periodic, zero-mean drive profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    /// `H(x) = cos x`, `G(x) = sin x`.
    Sinusoidal,
    /// `H(x) = Σ_l (-1)^l δ(x - lπ)`. `G` is the right-continuous staircase
    /// equal to 1 on `[0, π)` and 0 on `[π, 2π)`.
    AlternatingDeltaKicks,
    /// Piecewise-linear interpolation of user samples over one period.
    SampledPeriodic(SampledWaveform),
}

impl Waveform {
    pub fn name(&self) -> &'static str {
        match self {
            Waveform::Sinusoidal => "sinusoidal",
            Waveform::AlternatingDeltaKicks => "alternating_delta_kicks",
            Waveform::SampledPeriodic(_) => "sampled_periodic",
        }
    }

    /// Builds a sampled waveform, rejecting samples whose period mean is
    /// not zero.
    pub fn sampled(samples: &[(f64, f64)]) -> Result<Self> {
        SampledWaveform::new(samples).map(Waveform::SampledPeriodic)
    }

    /// Like [`Waveform::sampled`], but subtracts the trapezoidal mean first.
    pub fn sampled_centered(samples: &[(f64, f64)]) -> Result<Self> {
        let raw = SampledWaveform::build(samples)?;
        let mean = raw.mean();
        let shifted: Vec<(f64, f64)> = samples.iter().map(|&(x, h)| (x, h - mean)).collect();
        Self::sampled(&shifted)
    }

    pub fn is_pointwise(&self) -> bool {
        !matches!(self, Waveform::AlternatingDeltaKicks)
    }

    /// Evaluates `H(x)`. The delta train has no pointwise value.
    pub fn h(&self, x: f64) -> Result<f64> {
        match self {
            Waveform::Sinusoidal => Ok(x.cos()),
            Waveform::AlternatingDeltaKicks => Err(Error::NonPointwiseWaveform(self.name())),
            Waveform::SampledPeriodic(s) => Ok(s.h(x)),
        }
    }

    /// `max |H|` over a period; zero for the delta train, whose kicks are
    /// applied as discrete events.
    pub fn peak(&self) -> f64 {
        match self {
            Waveform::Sinusoidal => 1.0,
            Waveform::AlternatingDeltaKicks => 0.0,
            Waveform::SampledPeriodic(s) => s.hs.iter().fold(0.0, |a, h| a.max(h.abs())),
        }
    }

    /// Evaluates `G(x)`, periodically extended.
    pub fn g(&self, x: f64) -> f64 {
        match self {
            Waveform::Sinusoidal => x.sin(),
            Waveform::AlternatingDeltaKicks => staircase(x),
            Waveform::SampledPeriodic(s) => s.g(x),
        }
    }
}

/// Index `k` of the half-period `[kπ, (k+1)π)` containing `x`, with values
/// within [`KICK_SNAP`] of a kick position snapped onto it.
pub(crate) fn half_period_index(x: f64) -> i64 {
    let u = x / PI;
    let r = u.round();
    let u = if (u - r).abs() < KICK_SNAP { r } else { u };
    u.floor() as i64
}

fn staircase(x: f64) -> f64 {
    if half_period_index(x).rem_euclid(2) == 0 {
        1.0
    } else {
        0.0
    }
}

/// Samples `(x, H(x))` over one period, linearly interpolated and
/// periodically wrapped.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledWaveform {
    // Nodes on [0, 2π] with explicit end points at 0 and 2π.
    xs: Vec<f64>,
    hs: Vec<f64>,
    // Running integral at each node.
    cumulative: Vec<f64>,
}

impl SampledWaveform {
    pub fn new(samples: &[(f64, f64)]) -> Result<Self> {
        let s = Self::build(samples)?;
        let mean = s.mean();
        if mean.abs() > SAMPLED_MEAN_TOL {
            return Err(Error::InvalidWaveform(format!(
                "sampled waveform has nonzero mean {mean:e}"
            )));
        }
        Ok(s)
    }

    fn build(samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidWaveform(
                "need at least two samples".to_string(),
            ));
        }
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
        for &(x, h) in samples {
            if !x.is_finite() || !h.is_finite() {
                return Err(Error::InvalidWaveform("non-finite sample".to_string()));
            }
            pts.push((x.rem_euclid(TAU), h));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        if pts.windows(2).any(|w| w[1].0 - w[0].0 <= 0.0) {
            return Err(Error::InvalidWaveform(
                "sample positions must be distinct modulo 2π".to_string(),
            ));
        }

        // Value at the period boundary from the wrap-around segment.
        let (x_first, h_first) = pts[0];
        let (x_last, h_last) = pts[pts.len() - 1];
        let gap = x_first + TAU - x_last;
        let h_edge = h_last + (h_first - h_last) * (TAU - x_last) / gap;

        let mut xs = Vec::with_capacity(pts.len() + 2);
        let mut hs = Vec::with_capacity(pts.len() + 2);
        if x_first > 0.0 {
            xs.push(0.0);
            hs.push(h_edge);
        }
        for &(x, h) in &pts {
            xs.push(x);
            hs.push(h);
        }
        xs.push(TAU);
        hs.push(if x_first > 0.0 { h_edge } else { h_first });

        let mut cumulative = Vec::with_capacity(xs.len());
        cumulative.push(0.0);
        for i in 1..xs.len() {
            let seg = 0.5 * (xs[i] - xs[i - 1]) * (hs[i] + hs[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        Ok(Self { xs, hs, cumulative })
    }

    /// Trapezoidal mean over one period.
    pub fn mean(&self) -> f64 {
        self.cumulative[self.cumulative.len() - 1] / TAU
    }

    fn segment(&self, y: f64) -> usize {
        let i = self.xs.partition_point(|&x| x <= y);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn h(&self, x: f64) -> f64 {
        let y = x.rem_euclid(TAU);
        let i = self.segment(y);
        let t = (y - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
        self.hs[i] + t * (self.hs[i + 1] - self.hs[i])
    }

    pub fn g(&self, x: f64) -> f64 {
        let periods = (x / TAU).floor();
        let y = x - periods * TAU;
        let i = self.segment(y);
        let h_y = {
            let t = (y - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
            self.hs[i] + t * (self.hs[i + 1] - self.hs[i])
        };
        let partial = self.cumulative[i] + 0.5 * (y - self.xs[i]) * (self.hs[i] + h_y);
        partial + periods * self.cumulative[self.cumulative.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine_samples(n: usize) -> Vec<(f64, f64)> {
        (0..n)
            .map(|i| {
                let x = TAU * i as f64 / n as f64;
                (x, x.cos())
            })
            .collect()
    }

    #[test]
    fn g_examples() {
        assert_eq!(Waveform::Sinusoidal.g(0.0), 0.0);
        assert!((Waveform::Sinusoidal.g(PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(Waveform::AlternatingDeltaKicks.g(PI / 2.0), 1.0);
    }

    #[test]
    fn staircase_is_right_continuous_and_periodic() {
        let w = Waveform::AlternatingDeltaKicks;
        assert_eq!(w.g(0.0), 1.0);
        assert_eq!(w.g(PI), 0.0);
        assert_eq!(w.g(PI - 1e-6), 1.0);
        assert_eq!(w.g(TAU), 1.0);
        assert_eq!(w.g(-0.1), 0.0);
        assert_eq!(w.g(-PI), 0.0);
        assert_eq!(w.g(-TAU), 1.0);
        // 3π computed in floating point still lands on the kick.
        assert_eq!(w.g(3.0 * PI), 0.0);
        assert_eq!(w.g(PI + 2.0 * PI), 0.0);
    }

    #[test]
    fn delta_has_no_pointwise_value() {
        assert_eq!(
            Waveform::AlternatingDeltaKicks.h(0.3),
            Err(Error::NonPointwiseWaveform("alternating_delta_kicks"))
        );
    }

    #[test]
    fn sampled_cosine_tracks_sine() {
        let w = Waveform::sampled(&cosine_samples(4096)).unwrap();
        for &x in &[0.0, 0.3, 1.7, 3.2, 5.9, 7.5, -2.0] {
            assert!((w.g(x) - x.sin()).abs() < 1e-6, "x = {x}");
            assert!((w.h(x).unwrap() - x.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn sampled_handles_offset_nodes() {
        // Nodes not including x = 0; wrap segment supplies the boundary.
        let n = 2048;
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let x = TAU * (i as f64 + 0.37) / n as f64;
                (x, x.cos())
            })
            .collect();
        let w = Waveform::sampled_centered(&samples).unwrap();
        assert!(w.g(0.0).abs() < 1e-15);
        assert!((w.g(1.0) - 1.0f64.sin()).abs() < 1e-5);
        assert!((w.g(TAU) - w.g(0.0)).abs() < 1e-12);
    }

    #[test]
    fn sampled_rejects_nonzero_mean() {
        let samples: Vec<(f64, f64)> = cosine_samples(64)
            .into_iter()
            .map(|(x, h)| (x, h + 0.01))
            .collect();
        assert!(matches!(
            Waveform::sampled(&samples),
            Err(Error::InvalidWaveform(_))
        ));
        assert!(Waveform::sampled_centered(&samples).is_ok());
    }

    #[test]
    fn sampled_rejects_duplicates() {
        let samples = vec![(0.0, 1.0), (TAU, -1.0), (1.0, 0.0)];
        assert!(Waveform::sampled(&samples).is_err());
    }

    #[test]
    fn zero_mean_for_all_kinds() {
        let kinds = [
            Waveform::Sinusoidal,
            Waveform::AlternatingDeltaKicks,
            Waveform::sampled(&cosine_samples(256)).unwrap(),
        ];
        for w in &kinds {
            for &x in &[0.0, 0.4, 2.0, 4.0] {
                assert!((w.g(x + TAU) - w.g(x)).abs() < 1e-12, "{}", w.name());
            }
        }
    }
}
