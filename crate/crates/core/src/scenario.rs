//! Scenario execution and artifact output.
//!
//! Every run writes `meta.json` plus the CSV files of its kind into one
//! directory. Numbers are printed with 12 significant digits.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::{ConfigError, Scenario, ScenarioKind};
use crate::effective::{evolve_effective, expectation_kinematics, gauge_map, semiclassical_evolve};
use crate::error::Error;
use crate::full::evolve_full;
use crate::hopping::EffectiveHoppings;
use crate::integrator::Trajectory;
use crate::model::{DriveSpec, LatticeWindow, WaveField};
use crate::observables::{com_path, model_deviation, vertical_profile, FringeRecord};
use crate::spectrum::harper_bands;

/// Failures while executing a validated scenario.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub out_dir: PathBuf,
    /// File names relative to `out_dir`, in write order.
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
    /// Some trajectory exceeded the edge-mass tolerance.
    pub truncated: bool,
    pub results: Value,
}

/// Formats `v` with 12 significant digits, in `%g` style.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    if v == 0.0 {
        return "0".to_string();
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..12).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (11 - exp) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

struct Sink {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl Sink {
    fn new(dir: &Path) -> Result<Self, RunError> {
        fs::create_dir_all(dir).map_err(|source| RunError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
        Ok(Self {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn csv(&mut self, name: &str, header: Option<&[String]>, rows: impl IntoIterator<Item = Vec<f64>>) -> Result<(), RunError> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|source| RunError::Io {
                path: parent.to_path_buf(),
                source,
            })?;
        }
        let wrap = |source| RunError::Csv {
            path: path.clone(),
            source,
        };
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(&path).map_err(wrap)?;
        if let Some(h) = header {
            w.write_record(h).map_err(wrap)?;
        }
        for row in rows {
            w.write_record(row.iter().map(|v| format_number(*v))).map_err(wrap)?;
        }
        w.flush().map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, value: &Value) -> Result<(), RunError> {
        let path = self.dir.join(name);
        let text = serde_json::to_string_pretty(value).expect("json values serialize");
        fs::write(&path, text + "\n").map_err(|source| RunError::Io { path, source })?;
        Ok(())
    }
}

fn header(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn window_json(w: &LatticeWindow) -> Value {
    json!({ "n_min": w.n_min, "n_max": w.n_max, "m_min": w.m_min, "m_max": w.m_max })
}

fn drive_json(d: &DriveSpec) -> Value {
    json!({
        "beta0": d.beta0,
        "gradient": d.gradient,
        "omega": d.omega,
        "amplitude": d.amplitude,
        "gamma": d.gamma(),
        "order": d.order,
        "sigma": d.sigma,
        "rho": d.rho,
        "waveform": d.waveform.name(),
        "flux": d.flux(),
    })
}

fn complex_json(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn hoppings_json(h: &EffectiveHoppings) -> Value {
    json!({ "kappa_x": complex_json(h.kappa_x), "kappa_y": complex_json(h.kappa_y), "alpha": h.alpha })
}

/// Executes `scenario` and writes its artifacts into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunReport, RunError> {
    let mut sink = Sink::new(out_dir)?;
    let mut warnings = Vec::new();
    let mut truncated = false;
    let mut resolved = json!({ "window": window_json(&scenario.window), "jx": scenario.jx, "jy": scenario.jy });
    if let Some(d) = &scenario.drive {
        resolved["drive"] = drive_json(d);
    }

    let results = match scenario.config.kind {
        ScenarioKind::FullEvolve | ScenarioKind::EffectiveEvolve => {
            let drive = scenario.drive.as_ref().expect("validated");
            let times = scenario.times_for(drive).expect("validated");
            let input = scenario.input_field(drive)?;
            let traj = if scenario.config.kind == ScenarioKind::FullEvolve {
                let opts = scenario.integrator(Some(drive))?;
                resolved["integrator"] = json!({ "dt_max": opts.dt_max });
                evolve_full(&input, drive, scenario.jx, scenario.jy, &times, &opts)?
            } else {
                let est = scenario.hoppings()?;
                note_convergence(&est, &mut warnings);
                resolved["hoppings"] = hoppings_json(&est.hoppings);
                let opts = scenario.integrator(None)?;
                resolved["integrator"] = json!({ "dt_max": opts.dt_max });
                evolve_effective(&gauge_map(&input, 0.0, drive), &est.hoppings, &times, &opts)?
            };
            truncated |= note_diagnostics("run", &traj, &mut warnings);
            write_trajectory(&mut sink, scenario, &traj)?
        }
        ScenarioKind::Semiclassical => {
            let drive = scenario.drive.as_ref().expect("validated");
            let times = scenario.times_for(drive).expect("validated");
            let est = scenario.hoppings()?;
            note_convergence(&est, &mut warnings);
            resolved["hoppings"] = hoppings_json(&est.hoppings);
            let h = est.hoppings;
            let field = gauge_map(&scenario.input_field(drive)?, 0.0, drive);
            let start = expectation_kinematics(&field, &h)?.state;
            let path = semiclassical_evolve(start, &h, h.peierls_phase(), &times)?;
            sink.csv(
                "semiclassical.csv",
                Some(&header(&["t", "x", "y"])),
                times.iter().zip(&path).map(|(t, s)| vec![*t, s.n_mean, s.m_mean]),
            )?;
            sink.csv(
                "semiclassical_momenta.csv",
                Some(&header(&["t", "p_x", "p_y"])),
                times.iter().zip(&path).map(|(t, s)| vec![*t, s.p_n, s.p_m]),
            )?;
            let energy: Vec<f64> = path.iter().map(|s| s.energy(&h)).collect();
            let drift = energy.iter().map(|e| (e - energy[0]).abs()).fold(0.0, f64::max);
            json!({
                "initial": { "x": start.n_mean, "y": start.m_mean, "p_x": start.p_n, "p_y": start.p_m },
                "energy": energy[0],
                "energy_drift": drift,
            })
        }
        ScenarioKind::Hoppings => {
            let est = scenario.hoppings()?;
            note_convergence(&est, &mut warnings);
            let h = est.hoppings;
            sink.csv(
                "hoppings.csv",
                Some(&header(&["kappa_x_re", "kappa_x_im", "kappa_y_re", "kappa_y_im", "alpha"])),
                [vec![h.kappa_x.re, h.kappa_x.im, h.kappa_y.re, h.kappa_y.im, h.alpha]],
            )?;
            json!({
                "hoppings": hoppings_json(&h),
                "abs_kappa_x": h.kappa_x.norm(),
                "abs_kappa_y": h.kappa_y.norm(),
                "quadrature_discrepancy": est.warning.map(|w| w.discrepancy),
            })
        }
        ScenarioKind::Spectrum => {
            let (kx, ky) = scenario.spectrum_hoppings()?;
            let fluxes = scenario.fluxes()?;
            let k_grid = scenario.k_grid();
            resolved["spectrum"] = json!({ "kappa_x": complex_json(kx), "kappa_y": complex_json(ky), "k_grid": k_grid });
            let mut rows = Vec::new();
            let mut counts = Vec::new();
            for flux in &fluxes {
                let h = EffectiveHoppings::with_flux(kx, ky, flux.alpha());
                let set = harper_bands(&h, *flux, k_grid)?;
                counts.push(json!({ "p": flux.p, "q": flux.q, "bands": set.len(), "total_width": set.total_width() }));
                rows.extend(set.bands.iter().map(|b| vec![flux.alpha(), b.e_min, b.e_max]));
            }
            sink.csv("bands.csv", Some(&header(&["alpha", "e_min", "e_max"])), rows)?;
            json!({ "fluxes": counts })
        }
        ScenarioKind::Compare => {
            let omegas = &scenario.config.compare.as_ref().expect("validated").omegas;
            let mut rows = Vec::new();
            let mut peaks = Vec::new();
            for omega in omegas.iter().map(|w| w.get()) {
                let drive = scenario.drive_at(omega)?;
                let times = scenario.times_for(&drive).expect("validated");
                let input = scenario.input_field(&drive)?;
                let est = scenario_hoppings_at(scenario, &drive)?;
                note_convergence(&est, &mut warnings);
                let exact = evolve_full(&input, &drive, scenario.jx, scenario.jy, &times, &scenario.integrator(Some(&drive))?)?;
                let eff = evolve_effective(&gauge_map(&input, 0.0, &drive), &est.hoppings, &times, &scenario.integrator(None)?)?;
                truncated |= note_diagnostics(&format!("omega = {omega} (exact)"), &exact, &mut warnings);
                truncated |= note_diagnostics(&format!("omega = {omega} (effective)"), &eff, &mut warnings);
                let dev = model_deviation(&exact, &eff, &drive)?;
                rows.extend(
                    dev.times
                        .iter()
                        .zip(dev.max_abs.iter().zip(&dev.infidelity))
                        .map(|(t, (a, f))| vec![omega, *t, *a, *f]),
                );
                peaks.push(json!({
                    "omega": omega,
                    "max_abs_peak": dev.max_abs_peak(),
                    "infidelity_peak": dev.infidelity_peak(),
                }));
            }
            sink.csv("deviation.csv", Some(&header(&["omega", "t", "max_abs", "infidelity"])), rows)?;
            json!({ "deviation": peaks })
        }
        ScenarioKind::Units => {
            let p = scenario.units.expect("validated");
            write_units(&mut sink, &p)?;
            serde_json::to_value(p).expect("units serialize")
        }
    };

    let meta = json!({
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": scenario.config,
        "resolved": resolved,
        "warnings": warnings,
        "truncated": truncated,
        "outputs": sink.outputs,
        "results": results,
    });
    sink.json("meta.json", &meta)?;
    Ok(RunReport {
        out_dir: out_dir.to_path_buf(),
        outputs: sink.outputs,
        warnings,
        truncated,
        results,
    })
}

fn scenario_hoppings_at(scenario: &Scenario, drive: &DriveSpec) -> Result<crate::hopping::HoppingEstimate, RunError> {
    Ok(EffectiveHoppings::from_drive(drive, scenario.jx, scenario.jy, scenario.method)?)
}

fn note_convergence(est: &crate::hopping::HoppingEstimate, warnings: &mut Vec<String>) {
    if let Some(w) = est.warning {
        warnings.push(format!("hopping quadrature not converged (discrepancy {:e})", w.discrepancy));
    }
}

fn note_diagnostics(label: &str, traj: &Trajectory, warnings: &mut Vec<String>) -> bool {
    let d = traj.diagnostics;
    if d.norm_drift_exceeded() {
        warnings.push(format!("{label}: norm drift {:e} exceeds budget {:e}", d.norm_drift, d.norm_drift_budget));
    }
    if d.truncation_warning {
        warnings.push(format!("{label}: edge mass {:e} exceeds tolerance (window truncation)", d.max_edge_mass));
    }
    d.truncation_warning
}

fn write_trajectory(sink: &mut Sink, scenario: &Scenario, traj: &Trajectory) -> Result<Value, RunError> {
    let record: FringeRecord = vertical_profile(traj)?.analyze(None)?;
    let window = scenario.window;
    let mut cols = vec!["t".to_string()];
    cols.extend((window.n_min..=window.n_max).map(|n| format!("n={n}")));
    sink.csv(
        "profile.csv",
        Some(&cols),
        record.times.iter().zip(&record.profiles).map(|(t, p)| {
            let mut row = Vec::with_capacity(p.len() + 1);
            row.push(*t);
            row.extend_from_slice(p);
            row
        }),
    )?;
    sink.csv(
        "fringes.csv",
        Some(&header(&["t", "visibility"])),
        record.times.iter().zip(&record.visibility).map(|(t, v)| vec![*t, *v]),
    )?;
    let com = com_path(traj)?;
    sink.csv(
        "com.csv",
        Some(&header(&["t", "x", "y"])),
        traj.times.iter().zip(&com).map(|(t, (x, y))| vec![*t, *x, *y]),
    )?;
    let output = &scenario.config.output;
    if output.frames {
        for (k, field) in traj.fields.iter().enumerate().step_by(output.frame_stride) {
            sink.csv(&format!("frames/frame_{k:05}.csv"), None, frame_rows(field))?;
        }
    }
    let d = traj.diagnostics;
    Ok(json!({
        "samples": traj.len(),
        "revival_period": record.revival_period,
        "final_com": com.last().map(|(x, y)| json!([x, y])),
        "diagnostics": {
            "norm_drift": d.norm_drift,
            "norm_drift_budget": d.norm_drift_budget,
            "max_edge_mass": d.max_edge_mass,
            "truncation_warning": d.truncation_warning,
            "steps": d.steps,
        },
    }))
}

/// `|c|` with rows indexed by `m` and columns by `n`.
fn frame_rows(field: &WaveField) -> Vec<Vec<f64>> {
    let nx = field.window().nx();
    field.moduli().chunks(nx).map(<[f64]>::to_vec).collect()
}

fn write_units(sink: &mut Sink, p: &crate::units::PhysicalParams) -> Result<(), RunError> {
    sink.csv(
        "units.csv",
        Some(&header(&[
            "d_m", "lambda_m", "n_s", "j_per_cm", "gamma", "order", "omega_per_cm", "gradient_per_cm", "radius_cm",
            "lambda_mod_mm", "amplitude_per_cm", "delta_n", "length_cm",
        ])),
        [vec![
            p.d,
            p.lambda,
            p.n_s,
            p.j,
            p.gamma,
            p.order as f64,
            p.omega,
            p.gradient,
            p.radius,
            p.lambda_mod,
            p.amplitude,
            p.delta_n,
            p.length,
        ]],
    )
}

/// Writes `units.csv` for a standalone conversion.
pub fn write_units_csv(p: &crate::units::PhysicalParams, out_dir: &Path) -> Result<PathBuf, RunError> {
    let mut sink = Sink::new(out_dir)?;
    write_units(&mut sink, p)?;
    Ok(out_dir.join("units.csv"))
}
