use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use photon_gauge::effective::{evolve_effective, expectation_kinematics, gauge_map, semiclassical_evolve};
use photon_gauge::full::{evolve_full, gaussian_input};
use photon_gauge::hopping::{EffectiveHoppings, HoppingMethod};
use photon_gauge::integrator::IntegratorOptions;
use photon_gauge::observables::com_path;
use photon_gauge::{DriveSpec, LatticeWindow, WaveField, Waveform};

fn mean_m(field: &WaveField) -> f64 {
    field
        .window()
        .sites()
        .zip(field.amplitudes())
        .map(|((_, m), c)| m as f64 * c.norm_sqr())
        .sum::<f64>()
        / field.norm_sqr()
}

fn edge_row_input(window: LatticeWindow) -> WaveField {
    let mut f = WaveField::from_fn(window, |n, m| {
        if m == window.m_min {
            Complex64::new((-((n * n) as f64) / 9.0).exp(), 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    f.normalize().unwrap();
    f
}

#[test]
fn gradient_blocks_vertical_tunneling_until_driven() {
    let window = LatticeWindow::new(-12, 12, 0, 16).unwrap();
    let input = edge_row_input(window);
    // Whole drive periods up to J·t = 10; the undriven tilt has Bloch period 2π/F.
    let times: Vec<f64> = (0..=12).map(|k| k as f64 * TAU / 8.0).collect();

    let static_tilt = DriveSpec::new(0.0, 8.0, 8.0, 0.0, 1, PI, PI, Waveform::Sinusoidal).unwrap();
    let opts = IntegratorOptions::for_drive(1.0, 8.0);
    let run = evolve_full(&input, &static_tilt, 1.0, 1.0, &times, &opts).unwrap();
    let undriven = run.fields.iter().map(mean_m).fold(0.0, f64::max);
    let dense: Vec<f64> = (0..=200).map(|k| k as f64 * 0.05).collect();
    let run = evolve_full(&input, &static_tilt, 1.0, 1.0, &dense, &opts).unwrap();
    let swing = run.fields.iter().map(mean_m).fold(0.0, f64::max);
    // Two-level bound 4J²/(F² + 4J²) on the micromotion in between.
    assert!(swing < 4.0 / 68.0 + 0.005, "{swing}");

    let driven = DriveSpec::resonant(8.0, 1, 0.717, PI, PI, Waveform::Sinusoidal).unwrap();
    let run = evolve_full(&input, &driven, 1.0, 1.0, &times, &opts).unwrap();
    let moved = mean_m(run.fields.last().unwrap());

    assert!(undriven < 0.05, "{undriven}");
    assert!(moved > 0.5, "{moved}");
}

#[test]
fn mean_velocity_obeys_ehrenfest() {
    let drive = DriveSpec::resonant(40.0, 1, 0.9, -PI / 25.0, PI, Waveform::Sinusoidal).unwrap();
    let h = EffectiveHoppings::from_drive(&drive, 1.0, 2.0, HoppingMethod::ClosedForm)
        .unwrap()
        .hoppings;
    let window = LatticeWindow::centered(25).unwrap();
    let input = gauge_map(&gaussian_input(&window, 5.0, PI / 2.0, &drive, true).unwrap(), 0.0, &drive);
    let dt = 1e-3;
    let times: Vec<f64> = (0..=3000).map(|k| k as f64 * dt).collect();
    let traj = evolve_effective(&input, &h, &times, &IntegratorOptions::for_rate(2.0).with_dt_max(dt)).unwrap();
    let kin: Vec<_> = traj.fields.iter().map(|f| expectation_kinematics(f, &h).unwrap()).collect();
    let mut worst: f64 = 0.0;
    for k in (1..times.len() - 1).step_by(50) {
        let dn = (kin[k + 1].state.n_mean - kin[k - 1].state.n_mean) / (2.0 * dt);
        let dm = (kin[k + 1].state.m_mean - kin[k - 1].state.m_mean) / (2.0 * dt);
        worst = worst.max((dn - kin[k].velocity_n).abs()).max((dm - kin[k].velocity_m).abs());
        let vn = 2.0 * (h.kappa_x * kin[k].shift_n).im;
        assert!((vn - kin[k].velocity_n).abs() < 1e-12);
    }
    assert!(worst < 1e-5, "{worst}");
}

fn semiclassical_gap(width: f64, sigma: f64) -> f64 {
    let drive = DriveSpec::resonant(40.0, 1, 0.9, sigma, PI, Waveform::Sinusoidal).unwrap();
    let h = EffectiveHoppings::from_drive(&drive, 1.0, 2.0, HoppingMethod::ClosedForm)
        .unwrap()
        .hoppings;
    let window = LatticeWindow::centered(45).unwrap();
    let input = gauge_map(&gaussian_input(&window, width, PI / 2.0, &drive, true).unwrap(), 0.0, &drive);
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.1).collect();
    let traj = evolve_effective(&input, &h, &times, &IntegratorOptions::for_rate(2.0)).unwrap();
    let quantum = com_path(&traj).unwrap();
    let start = expectation_kinematics(&input, &h).unwrap().state;
    let classical = semiclassical_evolve(start, &h, h.peierls_phase(), &times).unwrap();
    quantum
        .iter()
        .zip(&classical)
        .map(|((x, y), s)| (x - s.n_mean).hypot(y - s.m_mean))
        .fold(0.0, f64::max)
}

#[test]
fn semiclassics_improve_with_beam_width() {
    let weak: Vec<f64> = [3.0, 5.0, 8.0].iter().map(|&w| semiclassical_gap(w, -PI / 100.0)).collect();
    assert!(weak[0] > weak[1] && weak[1] > weak[2], "{weak:?}");
    // At σ = -π/25 the spread of kinetic y-momentum, about |σ|·w, outgrows
    // the gain in localization beyond w ≈ 5.
    let strong: Vec<f64> = [3.0, 5.0].iter().map(|&w| semiclassical_gap(w, -PI / 25.0)).collect();
    assert!(strong[0] > strong[1], "{strong:?}");
}

fn smooth_kicks(width: f64, nodes: usize) -> Waveform {
    let norm = 1.0 / (width * TAU.sqrt());
    let pulse = |u: f64| (-0.5 * (u / width).powi(2)).exp() * norm;
    let samples: Vec<(f64, f64)> = (0..nodes)
        .map(|k| {
            let x = TAU * k as f64 / nodes as f64;
            let up: f64 = [-TAU, 0.0, TAU].iter().map(|c| pulse(x - c)).sum();
            let down: f64 = [-PI, PI].iter().map(|c| pulse(x - c)).sum();
            (x, up - down)
        })
        .collect();
    Waveform::sampled_centered(&samples).unwrap()
}

fn max_abs_gap(a: &[WaveField], b: &[WaveField]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.moduli().into_iter().zip(y.moduli()).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

fn pulse_gap(omega: f64, fraction: f64) -> (f64, f64) {
    let window = LatticeWindow::centered(10).unwrap();
    let kicked = DriveSpec::resonant(omega, 1, 1.0, PI / 2.0, PI, Waveform::AlternatingDeltaKicks).unwrap();
    let smooth = DriveSpec::resonant(omega, 1, 1.0, PI / 2.0, PI, smooth_kicks(fraction * TAU, 8192)).unwrap();
    let times: Vec<f64> = (0..=4).map(|k| k as f64 * TAU / omega).collect();
    let opts = IntegratorOptions::for_drive(1.0, omega);
    // Each run starts from its own imprint so pulses straddling t = 0 match
    // the kick convention.
    let a = evolve_full(&gaussian_input(&window, 3.0, 0.0, &kicked, true).unwrap(), &kicked, 1.0, 1.0, &times, &opts).unwrap();
    let b = evolve_full(&gaussian_input(&window, 3.0, 0.0, &smooth, true).unwrap(), &smooth, 1.0, 1.0, &times, &opts).unwrap();
    let motion = max_abs_gap(&a.fields[..1], &a.fields[4..]);
    (max_abs_gap(&a.fields, &b.fields), motion)
}

#[test]
fn narrow_pulses_reproduce_delta_kicks() {
    let (gap, motion) = pulse_gap(40.0, 0.01);
    assert!(motion > 1e-2, "{motion}");
    assert!(gap < 1e-3, "{gap}");
    let (half, _) = pulse_gap(40.0, 0.005);
    let ratio = half / gap;
    assert!((0.4..0.6).contains(&ratio), "{ratio}");
}
