//! Exact driven coupled-mode dynamics.
//!
//! The on-site term `β_{n,m}(t)` reaches `F·m`, far above the hopping rates
//! on any realistic window, so the equations are integrated in the frame
//! that removes it exactly: with `c = g·exp(-iΘ)` and `Θ = ∫₀ᵗ β`, the
//! amplitudes `g` only see the hoppings dressed by the phase differences
//! `Θ_a - Θ_b`. `Θ` is known in closed form through `G`, so no
//! approximation is made by the change of frame.
//!
//! For the alternating delta train `Θ` is piecewise constant in the
//! modulation part; the kicks are applied as discrete events from a
//! precomputed, time-sorted schedule.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::integrator::{check_normalized, check_samples, IntegratorOptions, Monitor, Rhs, Rk4, Trajectory};
use crate::model::{DriveSpec, LatticeWindow, WaveField};
use crate::waveform::{half_period_index, Waveform};

/// Largest phase advance of the dressed hoppings per RK4 step.
pub const MAX_PHASE_STEP: f64 = 0.05;

/// Fastest rate at which neighbouring dressed hopping phases rotate:
/// `|F| + 2|A|·max|H|`.
pub fn dressed_phase_rate(drive: &DriveSpec) -> f64 {
    drive.gradient.abs() + 2.0 * drive.amplitude.abs() * drive.waveform.peak()
}

/// Gaussian beam `exp[-(n²+m²)/w² - ipn]`, optionally multiplied by the
/// static gauge imprint `exp(-iφ̄_{n,m})` of `drive`, normalized.
pub fn gaussian_input(
    window: &LatticeWindow,
    width: f64,
    tilt: f64,
    drive: &DriveSpec,
    imprint: bool,
) -> Result<WaveField> {
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidArgument(format!("beam width must be positive, got {width}")));
    }
    let w2 = width * width;
    let mut field = WaveField::from_fn(*window, |n, m| {
        let envelope = (-((n * n + m * m) as f64) / w2).exp();
        let mut phase = -tilt * n as f64;
        if imprint {
            phase -= drive.static_imprint(n, m);
        }
        Complex64::from_polar(envelope, phase)
    });
    field.normalize()?;
    Ok(field)
}

/// Kicks sharing one time, each `(site index, ±Γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KickBatch {
    pub time: f64,
    pub kicks: Vec<(usize, f64)>,
}

/// Kick events in `(0, t_end]`: site `(n, m)` is kicked at
/// `t = (lπ - φ_{n,m})/ω` with phase `(-1)^l Γ`. Kicks at `t = 0` are
/// already contained in the right-continuous imprint and are not listed.
pub fn kick_schedule(window: &LatticeWindow, drive: &DriveSpec, t_end: f64) -> Vec<KickBatch> {
    let gamma = drive.gamma();
    let mut events: Vec<(f64, usize, f64)> = Vec::new();
    for (idx, (n, m)) in window.sites().enumerate() {
        let phi = drive.phase_offset(n, m);
        let first = half_period_index(phi) + 1;
        let last = half_period_index(drive.omega * t_end + phi);
        for l in first..=last {
            let t = (l as f64 * PI - phi) / drive.omega;
            let sign = if l.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            events.push((t.max(0.0), idx, sign * gamma));
        }
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));

    let tol = time_tol(drive, t_end);
    let mut batches: Vec<KickBatch> = Vec::new();
    for (t, idx, kick) in events {
        match batches.last_mut() {
            Some(b) if t - b.time <= tol => b.kicks.push((idx, kick)),
            _ => batches.push(KickBatch {
                time: t,
                kicks: vec![(idx, kick)],
            }),
        }
    }
    batches
}

fn time_tol(drive: &DriveSpec, t_end: f64) -> f64 {
    (1e-9 * PI / drive.omega.abs()).max(1e-13 * t_end.max(1.0))
}

/// Sum of bare hoppings `J_x(h_{n+1} + h_{n-1}) + J_y(h_{m+1} + h_{m-1})`
/// with hard walls.
pub(crate) fn bare_hop_sum(window: &LatticeWindow, jx: f64, jy: f64, h: &[Complex64], out: &mut [Complex64]) {
    let nx = window.nx();
    let ny = window.ny();
    for row in 0..ny {
        let base = row * nx;
        for col in 0..nx {
            let i = base + col;
            let mut sx = Complex64::new(0.0, 0.0);
            if col + 1 < nx {
                sx += h[i + 1];
            }
            if col > 0 {
                sx += h[i - 1];
            }
            let mut sy = Complex64::new(0.0, 0.0);
            if row + 1 < ny {
                sy += h[i + nx];
            }
            if row > 0 {
                sy += h[i - nx];
            }
            out[i] = jx * sx + jy * sy;
        }
    }
}

/// Right-hand side in the detuning-free frame.
struct ExactFrame<'a> {
    window: LatticeWindow,
    drive: &'a DriveSpec,
    jx: f64,
    jy: f64,
    phi: Vec<f64>,
    g_phi: Vec<f64>,
    row: Vec<f64>,
    // Accumulated kick phase per site (delta train only).
    kicks: Option<Vec<f64>>,
    phases: Vec<Complex64>,
    lab: Vec<Complex64>,
    sums: Vec<Complex64>,
}

impl<'a> ExactFrame<'a> {
    fn new(window: LatticeWindow, drive: &'a DriveSpec, jx: f64, jy: f64) -> Self {
        let phi: Vec<f64> = window.sites().map(|(n, m)| drive.phase_offset(n, m)).collect();
        let g_phi = phi.iter().map(|&p| drive.waveform.g(p)).collect();
        let row = window.sites().map(|(_, m)| m as f64).collect();
        let kicks = matches!(drive.waveform, Waveform::AlternatingDeltaKicks).then(|| vec![0.0; window.len()]);
        let z = vec![Complex64::new(0.0, 0.0); window.len()];
        Self {
            window,
            drive,
            jx,
            jy,
            phi,
            g_phi,
            row,
            kicks,
            phases: z.clone(),
            lab: z.clone(),
            sums: z,
        }
    }

    /// `Θ_a(t) = ∫₀ᵗ β_a`.
    fn theta(&self, idx: usize, t: f64) -> f64 {
        let d = self.drive;
        let modulation = match &self.kicks {
            Some(k) => k[idx],
            None => d.gamma() * (d.waveform.g(d.omega * t + self.phi[idx]) - self.g_phi[idx]),
        };
        (d.beta0 + d.gradient * self.row[idx]) * t + modulation
    }

    fn fill_phases(&mut self, t: f64) {
        for i in 0..self.phases.len() {
            self.phases[i] = Complex64::from_polar(1.0, self.theta(i, t));
        }
    }

    fn to_lab(&self, g: &[Complex64], t: f64) -> Vec<Complex64> {
        g.iter()
            .enumerate()
            .map(|(i, gi)| gi * Complex64::from_polar(1.0, -self.theta(i, t)))
            .collect()
    }

    fn apply(&mut self, batch: &KickBatch) {
        if let Some(k) = self.kicks.as_mut() {
            for &(idx, kick) in &batch.kicks {
                k[idx] += kick;
            }
        }
    }
}

impl Rhs for ExactFrame<'_> {
    fn eval(&mut self, t: f64, g: &[Complex64], out: &mut [Complex64]) {
        self.fill_phases(t);
        for ((lab, phase), gi) in self.lab.iter_mut().zip(&self.phases).zip(g) {
            *lab = phase.conj() * gi;
        }
        bare_hop_sum(&self.window, self.jx, self.jy, &self.lab, &mut self.sums);
        for ((o, phase), sum) in out.iter_mut().zip(&self.phases).zip(&self.sums) {
            *o = Complex64::i() * phase * sum;
        }
    }
}

/// Integrates `i dc/dt = -J_x(c_{n+1,m} + c_{n-1,m}) - J_y(c_{n,m+1} + c_{n,m-1}) + β_{n,m}(t) c`
/// from `t = 0` and samples the field at `t_samples`.
///
/// Steps are capped by `opts.dt_max` and by [`MAX_PHASE_STEP`] over
/// [`dressed_phase_rate`].
pub fn evolve_full(
    initial: &WaveField,
    drive: &DriveSpec,
    jx: f64,
    jy: f64,
    t_samples: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_samples(t_samples)?;
    check_normalized(initial)?;
    opts.validate()?;
    drive.validate()?;

    let window = *initial.window();
    let t_end = t_samples[t_samples.len() - 1];
    let mut frame = ExactFrame::new(window, drive, jx, jy);
    let schedule = if frame.kicks.is_some() {
        kick_schedule(&window, drive, t_end)
    } else {
        Vec::new()
    };
    let tol = time_tol(drive, t_end);
    let rate = dressed_phase_rate(drive);
    let dt_max = if rate > 0.0 { opts.dt_max.min(MAX_PHASE_STEP / rate) } else { opts.dt_max };

    let mut g: Vec<Complex64> = initial.amplitudes().to_vec();
    let mut rk = Rk4::new(g.len());
    let mut monitor = Monitor::new(initial, opts, jx.abs().max(jy.abs()), t_end);
    let mut fields = Vec::with_capacity(t_samples.len());
    let mut t = 0.0;
    let mut next_event = 0;

    for &ts in t_samples {
        while next_event < schedule.len() && schedule[next_event].time <= ts + tol {
            let batch = &schedule[next_event];
            let te = if (batch.time - ts).abs() <= tol { ts } else { batch.time.max(t) };
            rk.advance(&mut frame, t, te, dt_max, &mut g)?;
            t = te;
            frame.apply(batch);
            next_event += 1;
        }
        rk.advance(&mut frame, t, ts, dt_max, &mut g)?;
        t = ts;
        let field = WaveField::from_amplitudes(window, frame.to_lab(&g, t))?;
        monitor.record(&field);
        fields.push(field);
    }

    Ok(Trajectory {
        times: t_samples.to_vec(),
        fields,
        drive: Some(drive.clone()),
        diagnostics: monitor.finish(rk.steps),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hopping::kappa_closed_sinusoidal;

    #[test]
    fn isolated_site_only_rotates() {
        let w = LatticeWindow::new(0, 0, 0, 0).unwrap();
        let d = DriveSpec::new(1.7, 0.0, 8.0, 0.0, 0, 0.0, 0.0, Waveform::Sinusoidal).unwrap();
        let f = WaveField::single_site(w, 0, 0).unwrap();
        let times = [0.5, 1.0, 3.0];
        let tr = evolve_full(&f, &d, 0.0, 0.0, &times, &IntegratorOptions::for_drive(1.0, 8.0)).unwrap();
        for (t, field) in tr.times.iter().zip(&tr.fields) {
            let c = field.get(0, 0).unwrap();
            assert!((c - Complex64::from_polar(1.0, -1.7 * t)).norm() < 1e-14);
            assert!((field.norm_sqr() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn resonant_pair_oscillates_with_renormalized_coupling() {
        let w = LatticeWindow::new(0, 0, 0, 1).unwrap();
        let d = DriveSpec::resonant(20.0, 1, 0.717, 0.0, PI, Waveform::Sinusoidal).unwrap();
        let kappa = kappa_closed_sinusoidal(1.0, 1.0, 0.717, 0.0, PI, 1).kappa_y.norm();
        let period = PI / kappa;
        let f = WaveField::single_site(w, 0, 0).unwrap();
        let tr = evolve_full(&f, &d, 1.0, 1.0, &[0.5 * period, period], &IntegratorOptions::for_drive(1.0, 20.0))
            .unwrap();
        let transferred = tr.fields[0].get(0, 1).unwrap().norm_sqr();
        let returned = tr.fields[1].get(0, 0).unwrap().norm_sqr();
        assert!(transferred > 0.97, "transferred {transferred}");
        assert!(returned > 0.97, "returned {returned}");
    }

    #[test]
    fn gaussian_examples() {
        let w = LatticeWindow::default();
        let d = DriveSpec::resonant(8.0, 1, 0.717, PI, PI, Waveform::Sinusoidal).unwrap();
        let g = gaussian_input(&w, 5.0, 0.0, &d, false).unwrap();
        assert!((g.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(g.amplitudes().iter().all(|c| c.im == 0.0 && c.re > 0.0));
        assert!(gaussian_input(&w, 0.0, 0.0, &d, false).is_err());

        let broad = gaussian_input(&w, 1e4, 0.0, &d, false).unwrap();
        let (mut n_mean, mut m_mean) = (0.0, 0.0);
        for ((n, m), c) in w.sites().zip(broad.amplitudes()) {
            n_mean += n as f64 * c.norm_sqr();
            m_mean += m as f64 * c.norm_sqr();
        }
        assert!(n_mean.abs() < 1e-10 && m_mean.abs() < 1e-10);
        let moduli = broad.moduli();
        let spread = moduli.iter().cloned().fold(0.0, f64::max) / moduli.iter().cloned().fold(1.0, f64::min);
        assert!(spread < 1.0 + 1e-4);
    }

    #[test]
    fn imprint_matches_static_gauge_phase() {
        let w = LatticeWindow::centered(4).unwrap();
        let d = DriveSpec::resonant(20.0, 1, 0.9, -PI / 25.0, PI, Waveform::Sinusoidal).unwrap();
        let plain = gaussian_input(&w, 5.0, PI / 2.0, &d, false).unwrap();
        let imprinted = gaussian_input(&w, 5.0, PI / 2.0, &d, true).unwrap();
        for (n, m) in w.sites() {
            let ratio = imprinted.get(n, m).unwrap() / plain.get(n, m).unwrap();
            let theta0 = crate::model::gauge_phase(&d, &w, n, m, 0.0).unwrap();
            assert!((ratio - Complex64::from_polar(1.0, -theta0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kick_schedule_is_sorted_and_consistent_with_staircase() {
        let w = LatticeWindow::centered(3).unwrap();
        let d = DriveSpec::resonant(10.0, 1, 0.6, 0.7, -1.9, Waveform::AlternatingDeltaKicks).unwrap();
        let t_end = 3.3;
        let sched = kick_schedule(&w, &d, t_end);
        assert!(sched.windows(2).all(|p| p[0].time < p[1].time));
        assert!(sched.iter().all(|b| b.time > 0.0 && b.time <= t_end));
        let mut acc = vec![0.0; w.len()];
        for b in &sched {
            for &(i, k) in &b.kicks {
                acc[i] += k;
            }
        }
        for (i, (n, m)) in w.sites().enumerate() {
            let phi = d.phase_offset(n, m);
            let expect = d.gamma() * (d.waveform.g(d.omega * t_end + phi) - d.waveform.g(phi));
            assert!((acc[i] - expect).abs() < 1e-12, "site ({n},{m})");
        }
    }

    #[test]
    fn simultaneous_kicks_batch_together() {
        let w = LatticeWindow::centered(2).unwrap();
        let d = DriveSpec::resonant(8.0, 1, 0.717, PI, PI, Waveform::AlternatingDeltaKicks).unwrap();
        let sched = kick_schedule(&w, &d, 2.0 * d.period());
        // Every site is kicked at each half period.
        assert_eq!(sched.len(), 4);
        assert!(sched.iter().all(|b| b.kicks.len() == w.len()));
        assert!((sched[3].time - 2.0 * d.period()).abs() < 1e-12);
    }

    #[test]
    fn kicks_are_unitary() {
        let w = LatticeWindow::centered(5).unwrap();
        let d = DriveSpec::resonant(10.0, 1, 1.1, 0.9, 1.7, Waveform::AlternatingDeltaKicks).unwrap();
        let f = gaussian_input(&w, 2.0, 0.3, &d, true).unwrap();
        let tr = evolve_full(&f, &d, 1.0, 1.0, &[0.5, 1.0], &IntegratorOptions::for_drive(1.0, 10.0)).unwrap();
        assert!(tr.diagnostics.norm_drift < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        let w = LatticeWindow::centered(2).unwrap();
        let d = DriveSpec::resonant(8.0, 1, 0.7, 0.0, 0.0, Waveform::Sinusoidal).unwrap();
        let f = WaveField::from_fn(w, |_, _| Complex64::new(1.0, 0.0));
        let opts = IntegratorOptions::for_drive(1.0, 8.0);
        assert!(evolve_full(&f, &d, 1.0, 1.0, &[1.0], &opts).is_err());
        let g = WaveField::single_site(w, 0, 0).unwrap();
        assert!(evolve_full(&g, &d, 1.0, 1.0, &[1.0, 0.5], &opts).is_err());
    }
}
