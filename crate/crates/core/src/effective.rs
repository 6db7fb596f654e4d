//! Averaged magnetic-lattice model, the gauge map into its frame, and the
//! semiclassical mean-value equations.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hopping::EffectiveHoppings;
use crate::integrator::{check_normalized, check_samples, IntegratorOptions, Monitor, Rhs, Rk4, Trajectory};
use crate::model::{DriveSpec, LatticeWindow, WaveField};

struct MagneticLattice {
    window: LatticeWindow,
    kappa_x: Complex64,
    // κ_y e^{inMσ} per column.
    kappa_y_col: Vec<Complex64>,
}

impl MagneticLattice {
    fn new(window: LatticeWindow, h: &EffectiveHoppings) -> Self {
        let peierls = h.peierls_phase();
        let kappa_y_col = (window.n_min..=window.n_max)
            .map(|n| h.kappa_y * Complex64::from_polar(1.0, n as f64 * peierls))
            .collect();
        Self {
            window,
            kappa_x: h.kappa_x,
            kappa_y_col,
        }
    }
}

impl Rhs for MagneticLattice {
    // i df/dt = -κ_x f_{n+1} - κ_x* f_{n-1} - κ_y e^{inMσ} f_{m+1} - κ_y* e^{-inMσ} f_{m-1}
    fn eval(&mut self, _t: f64, f: &[Complex64], out: &mut [Complex64]) {
        let nx = self.window.nx();
        let ny = self.window.ny();
        let kx = self.kappa_x;
        let kx_c = kx.conj();
        for row in 0..ny {
            let base = row * nx;
            for col in 0..nx {
                let i = base + col;
                let ky = self.kappa_y_col[col];
                let mut s = Complex64::new(0.0, 0.0);
                if col + 1 < nx {
                    s += kx * f[i + 1];
                }
                if col > 0 {
                    s += kx_c * f[i - 1];
                }
                if row + 1 < ny {
                    s += ky * f[i + nx];
                }
                if row > 0 {
                    s += ky.conj() * f[i - nx];
                }
                out[i] = Complex64::i() * s;
            }
        }
    }
}

/// Integrates the effective magnetic lattice from `t = 0`.
pub fn evolve_effective(
    initial: &WaveField,
    hoppings: &EffectiveHoppings,
    t_samples: &[f64],
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    check_samples(t_samples)?;
    check_normalized(initial)?;
    opts.validate()?;

    let window = *initial.window();
    let t_end = t_samples[t_samples.len() - 1];
    let mut lattice = MagneticLattice::new(window, hoppings);
    let mut f = initial.amplitudes().to_vec();
    let mut rk = Rk4::new(f.len());
    let rate = hoppings.kappa_x.norm().max(hoppings.kappa_y.norm());
    let mut monitor = Monitor::new(initial, opts, rate, t_end);
    let mut fields = Vec::with_capacity(t_samples.len());
    let mut t = 0.0;
    for &ts in t_samples {
        rk.advance(&mut lattice, t, ts, opts.dt_max, &mut f)?;
        t = ts;
        let field = WaveField::from_amplitudes(window, f.clone())?;
        monitor.record(&field);
        fields.push(field);
    }
    Ok(Trajectory {
        times: t_samples.to_vec(),
        fields,
        drive: None,
        diagnostics: monitor.finish(rk.steps),
    })
}

fn rephase(field: &WaveField, t: f64, drive: &DriveSpec, sign: f64) -> WaveField {
    let window = *field.window();
    let amps = window
        .sites()
        .zip(field.amplitudes())
        .map(|((n, m), c)| {
            let theta = drive.static_imprint(n, m) + drive.accumulated_detuning(n, m, t);
            c * Complex64::from_polar(1.0, sign * theta)
        })
        .collect();
    WaveField::from_amplitudes(window, amps).expect("same window")
}

/// Exact field → effective frame: `f = c·exp(+iθ(t))`.
pub fn gauge_map(exact: &WaveField, t: f64, drive: &DriveSpec) -> WaveField {
    rephase(exact, t, drive, 1.0)
}

/// Effective frame → exact field: `c = f·exp(-iθ(t))`.
pub fn gauge_unmap(effective: &WaveField, t: f64, drive: &DriveSpec) -> WaveField {
    rephase(effective, t, drive, -1.0)
}

/// Mean position and generalized momenta of a wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SemiclassicalState {
    pub n_mean: f64,
    pub m_mean: f64,
    /// Unwrapped; a field factor `e^{-ipn}` corresponds to `P_n = -p`.
    pub p_n: f64,
    pub p_m: f64,
}

impl SemiclassicalState {
    pub fn new(n_mean: f64, m_mean: f64, p_n: f64, p_m: f64) -> Self {
        Self { n_mean, m_mean, p_n, p_m }
    }

    /// Band energy `-2|κ_x|cos(P_n + arg κ_x) - 2|κ_y|cos(P_m + arg κ_y)`.
    pub fn energy(&self, h: &EffectiveHoppings) -> f64 {
        -2.0 * h.kappa_x.norm() * (self.p_n + h.kappa_x.arg()).cos()
            - 2.0 * h.kappa_y.norm() * (self.p_m + h.kappa_y.arg()).cos()
    }

    fn as_array(&self) -> [f64; 4] {
        [self.n_mean, self.m_mean, self.p_n, self.p_m]
    }

    fn from_array(a: [f64; 4]) -> Self {
        Self::new(a[0], a[1], a[2], a[3])
    }
}

/// Integrates the closed mean-value equations
/// `dn/dt = 2κ_x sin P_n`, `dm/dt = 2κ_y sin P_m`,
/// `dP_n/dt = -2κ_y σ sin P_m`, `dP_m/dt = 2κ_x σ sin P_n`,
/// where `sigma` is the Peierls phase per column (`Mσ`). Complex rates
/// enter through their modulus with the phase added to the momentum.
pub fn semiclassical_evolve(
    initial: SemiclassicalState,
    hoppings: &EffectiveHoppings,
    sigma: f64,
    t_samples: &[f64],
) -> Result<Vec<SemiclassicalState>> {
    check_samples(t_samples)?;
    let (kx, chi_x) = (hoppings.kappa_x.norm(), hoppings.kappa_x.arg());
    let (ky, chi_y) = (hoppings.kappa_y.norm(), hoppings.kappa_y.arg());
    let rate = [kx * sigma, ky * sigma, kx, ky]
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    let deriv = |s: &[f64; 4]| -> [f64; 4] {
        let vn = 2.0 * kx * (s[2] + chi_x).sin();
        let vm = 2.0 * ky * (s[3] + chi_y).sin();
        [vn, vm, -sigma * vm, sigma * vn]
    };

    let mut state = initial.as_array();
    let mut t = 0.0;
    let mut out = Vec::with_capacity(t_samples.len());
    for &ts in t_samples {
        let span = ts - t;
        if span > 0.0 && rate > 0.0 {
            let dt_max = 0.001 / rate;
            let steps = (span / dt_max - 1e-9).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = deriv(&state);
                let k2 = deriv(&shift(&state, 0.5 * h, &k1));
                let k3 = deriv(&shift(&state, 0.5 * h, &k2));
                let k4 = deriv(&shift(&state, h, &k3));
                for i in 0..4 {
                    state[i] += h / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
                }
            }
        }
        t = ts;
        out.push(SemiclassicalState::from_array(state));
    }
    Ok(out)
}

fn shift(s: &[f64; 4], h: f64, k: &[f64; 4]) -> [f64; 4] {
    [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]]
}

/// Quantum expectation values matching the semiclassical variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics {
    /// Positions, and momenta taken as the phases of `⟨e^{iP̂}⟩`.
    pub state: SemiclassicalState,
    /// `⟨e^{iP̂_n}⟩ = Σ f*_{n,m} f_{n+1,m} / Σ|f|²`.
    pub shift_n: Complex64,
    /// `⟨e^{iP̂_m}⟩ = Σ e^{inMσ} f*_{n,m} f_{n,m+1} / Σ|f|²`.
    pub shift_m: Complex64,
    /// `d⟨n⟩/dt = 2 Im(κ_x ⟨e^{iP̂_n}⟩)`.
    pub velocity_n: f64,
    pub velocity_m: f64,
}

impl Kinematics {
    pub fn sin_pn(&self) -> f64 {
        self.shift_n.im
    }

    pub fn sin_pm(&self) -> f64 {
        self.shift_m.im
    }
}

/// Mean position, `⟨sin P̂⟩` and the induced velocities of a field in the
/// effective frame. `P̂_m` includes the Peierls offset.
pub fn expectation_kinematics(field: &WaveField, hoppings: &EffectiveHoppings) -> Result<Kinematics> {
    let norm = field.norm_sqr();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::ZeroNorm);
    }
    let window = field.window();
    let nx = window.nx();
    let ny = window.ny();
    let amps = field.amplitudes();
    let peierls = hoppings.peierls_phase();
    let (mut n_sum, mut m_sum) = (0.0, 0.0);
    let mut shift_n = Complex64::new(0.0, 0.0);
    let mut shift_m = Complex64::new(0.0, 0.0);
    for row in 0..ny {
        for col in 0..nx {
            let i = row * nx + col;
            let (n, m) = window.site(i);
            let p = amps[i].norm_sqr();
            n_sum += n as f64 * p;
            m_sum += m as f64 * p;
            if col + 1 < nx {
                shift_n += amps[i].conj() * amps[i + 1];
            }
            if row + 1 < ny {
                shift_m += Complex64::from_polar(1.0, n as f64 * peierls) * amps[i].conj() * amps[i + nx];
            }
        }
    }
    let shift_n = shift_n / norm;
    let shift_m = shift_m / norm;
    Ok(Kinematics {
        state: SemiclassicalState::new(n_sum / norm, m_sum / norm, shift_n.arg(), shift_m.arg()),
        shift_n,
        shift_m,
        velocity_n: 2.0 * (hoppings.kappa_x * shift_n).im,
        velocity_m: 2.0 * (hoppings.kappa_y * shift_m).im,
    })
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::full::gaussian_input;
    use crate::model::gauge_phase;
    use crate::waveform::Waveform;

    fn real_hop(kx: f64, ky: f64, sigma: f64) -> EffectiveHoppings {
        EffectiveHoppings::new(Complex64::new(kx, 0.0), Complex64::new(ky, 0.0), 1, sigma, PI)
    }

    fn static_drive() -> DriveSpec {
        DriveSpec::resonant(8.0, 1, 0.717, PI, PI, Waveform::Sinusoidal).unwrap()
    }

    #[test]
    fn decoupled_rows_follow_a_chain() {
        let w = LatticeWindow::new(-15, 15, -2, 2).unwrap();
        let h = real_hop(0.8, 0.0, 0.3);
        let f0 = WaveField::single_site(w, 0, 1).unwrap();
        let tr = evolve_effective(&f0, &h, &[1.0, 2.0], &IntegratorOptions::for_rate(1.0)).unwrap();
        for field in &tr.fields {
            for (n, m) in w.sites() {
                let c = field.get(n, m).unwrap();
                if m != 1 {
                    assert_eq!(c.norm(), 0.0);
                }
            }
        }
        // Infinite chain: f_n(t) = i^n J_n(2κt).
        let c = tr.fields[1].get(3, 1).unwrap().norm();
        let expect = crate::bessel::bessel_j(3, 2.0 * 0.8 * 2.0).abs();
        assert!((c - expect).abs() < 1e-7);
    }

    #[test]
    fn free_tilted_packet_moves_linearly() {
        let w = LatticeWindow::centered(30).unwrap();
        let h = real_hop(1.0, 1.0, 0.0);
        let f0 = gaussian_input(&w, 5.0, PI / 2.0, &static_drive(), false).unwrap();
        let times = [0.0, 1.0, 2.0, 3.0];
        let tr = evolve_effective(&f0, &h, &times, &IntegratorOptions::for_rate(1.0)).unwrap();
        let means: Vec<f64> = tr
            .fields
            .iter()
            .map(|f| expectation_kinematics(f, &h).unwrap().state.n_mean)
            .collect();
        let v1 = means[1] - means[0];
        let v3 = means[3] - means[2];
        assert!(v1 < -1.5, "moves toward -x, got {v1}");
        assert!((v1 - v3).abs() < 1e-3);
    }

    #[test]
    fn gauge_map_round_trip_and_modulus() {
        let w = LatticeWindow::centered(6).unwrap();
        let d = static_drive();
        let f = gaussian_input(&w, 3.0, 0.4, &d, true).unwrap();
        let t = d.period();
        let mapped = gauge_map(&f, t, &d);
        let back = gauge_unmap(&mapped, t, &d);
        for (a, b) in f.amplitudes().iter().zip(back.amplitudes()) {
            assert!((a - b).norm() < 1e-14);
        }
        for (a, b) in f.amplitudes().iter().zip(mapped.amplitudes()) {
            assert!((a.norm() - b.norm()).abs() < 1e-15);
        }
        for (n, m) in w.sites() {
            let theta = gauge_phase(&d, &w, n, m, t).unwrap();
            let ratio = mapped.get(n, m).unwrap() / f.get(n, m).unwrap();
            assert!((ratio - Complex64::from_polar(1.0, theta)).norm() < 1e-12);
        }
    }

    #[test]
    fn gauge_map_is_identity_without_drive_on_low_rows() {
        let w = LatticeWindow::new(-3, 3, 0, 1).unwrap();
        let d = DriveSpec::new(0.0, 0.0, 8.0, 0.0, 0, 0.5, 0.5, Waveform::Sinusoidal).unwrap();
        let f = WaveField::from_fn(w, |n, m| Complex64::new(n as f64, m as f64 + 1.0));
        assert_eq!(gauge_map(&f, 0.0, &d), f);
    }

    #[test]
    fn straight_line_without_field() {
        let h = real_hop(0.9, 1.1, 0.0);
        let s0 = SemiclassicalState::new(1.0, 2.0, PI / 2.0, 0.0);
        let path = semiclassical_evolve(s0, &h, 0.0, &[1.0, 2.5]).unwrap();
        for (s, t) in path.iter().zip([1.0, 2.5]) {
            assert!((s.n_mean - (1.0 + 1.8 * t)).abs() < 1e-12);
            assert!((s.m_mean - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn complex_rates_shift_momenta() {
        let chi = 0.7;
        let h = EffectiveHoppings::new(
            Complex64::from_polar(1.0, chi),
            Complex64::from_polar(0.8, -0.3),
            1,
            0.2,
            PI,
        );
        let real = EffectiveHoppings::new(Complex64::new(1.0, 0.0), Complex64::new(0.8, 0.0), 1, 0.2, PI);
        let s0 = SemiclassicalState::new(0.0, 0.0, 0.4, 0.1);
        let shifted = SemiclassicalState::new(0.0, 0.0, 0.4 + chi, 0.1 - 0.3);
        let a = semiclassical_evolve(s0, &h, 0.2, &[3.0]).unwrap()[0];
        let b = semiclassical_evolve(shifted, &real, 0.2, &[3.0]).unwrap()[0];
        assert!((a.n_mean - b.n_mean).abs() < 1e-12);
        assert!((a.m_mean - b.m_mean).abs() < 1e-12);
        assert!((a.p_n + chi - b.p_n).abs() < 1e-12);
    }

    #[test]
    fn kinematics_examples() {
        let w = LatticeWindow::centered(30).unwrap();
        let h = real_hop(1.0, 1.0, -PI / 25.0);
        let sym = gaussian_input(&w, 5.0, 0.0, &static_drive(), false).unwrap();
        let k = expectation_kinematics(&sym, &h).unwrap();
        assert!(k.state.n_mean.abs() < 1e-12 && k.state.m_mean.abs() < 1e-12);
        assert!(k.sin_pn().abs() < 1e-14);
        assert!(k.sin_pm().abs() < 1e-14);

        let single = WaveField::single_site(w, 3, -2).unwrap();
        let k = expectation_kinematics(&single, &h).unwrap();
        assert_eq!(k.sin_pn(), 0.0);
        assert_eq!((k.state.n_mean, k.state.m_mean), (3.0, -2.0));

        assert_eq!(expectation_kinematics(&WaveField::zeros(w), &h), Err(Error::ZeroNorm));
    }

    #[test]
    fn tilted_gaussian_momentum_matches_overlap_oracle() {
        // Brute-force overlap of exp(-2(n² + n'²)/w²) over a long chain.
        let (w, p) = (5.0f64, PI / 2.0);
        let window = LatticeWindow::centered(30).unwrap();
        let field = gaussian_input(&window, w, p, &static_drive(), false).unwrap();
        let h = real_hop(1.0, 1.0, 0.0);
        let k = expectation_kinematics(&field, &h).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for n in -30i64..=30 {
            let a = (-((n * n) as f64) / (w * w)).exp();
            den += a * a;
            if n < 30 {
                num += a * (-(((n + 1) * (n + 1)) as f64) / (w * w)).exp();
            }
        }
        let expect = -p.sin() * num / den;
        assert!((k.sin_pn() - expect).abs() < 1e-12);
        assert!(k.sin_pn() < -0.95 && k.sin_pn() > -1.0);
        assert!((k.state.p_n + p).abs() < 1e-12);
    }
}
