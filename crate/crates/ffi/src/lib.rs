//! C interface to `photon-gauge`.
//!
//! Objects cross the boundary as opaque handles created by `pg_*_new` style
//! functions and released with the matching `pg_*_free`. Every fallible
//! function returns a [`PgStatus`]; on failure [`pg_last_error`] describes
//! the problem. Output arrays are caller-allocated, with their capacity
//! passed alongside.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;
use photon_gauge::effective::{evolve_effective, gauge_map};
use photon_gauge::full::{evolve_full, gaussian_input};
use photon_gauge::hopping::{EffectiveHoppings, HoppingMethod};
use photon_gauge::integrator::{IntegratorOptions, Trajectory};
use photon_gauge::model::{DriveSpec, LatticeWindow, WaveField};
use photon_gauge::observables::{com_path, model_deviation, vertical_profile};
use photon_gauge::spectrum::{harper_bands, RationalFlux};
use photon_gauge::units::physical_units;
use photon_gauge::waveform::Waveform;
use photon_gauge::Error;

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotResonant = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Values for the `waveform` argument of [`pg_drive_new`].
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgWaveform {
    Sinusoidal = 0,
    DeltaKicks = 1,
}

/// Values for `method` arguments.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PgHoppingMethod {
    ClosedForm = 0,
    Quadrature = 1,
}

/// Effective hoppings; `quadrature_discrepancy` is 0 for closed forms.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgHoppings {
    pub kappa_x_re: f64,
    pub kappa_x_im: f64,
    pub kappa_y_re: f64,
    pub kappa_y_im: f64,
    pub alpha: f64,
    pub quadrature_discrepancy: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgDiagnostics {
    pub norm_drift: f64,
    pub norm_drift_budget: f64,
    pub max_edge_mass: f64,
    /// Nonzero when the edge mass exceeded its tolerance.
    pub truncation_warning: u8,
    pub steps: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgBand {
    pub e_min: f64,
    pub e_max: f64,
    /// Nonzero when the band touches the next one up.
    pub touches_next: u8,
}

/// Fabrication numbers; units as in `photon_gauge::units::PhysicalParams`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PgPhysicalParams {
    pub omega: f64,
    pub gradient: f64,
    pub radius_cm: f64,
    pub lambda_mod_mm: f64,
    pub amplitude: f64,
    pub delta_n: f64,
    pub length_cm: f64,
}

/// Opaque drive handle.
pub struct PgDrive(DriveSpec);

/// Opaque field handle.
pub struct PgField(WaveField);

/// Opaque trajectory handle.
pub struct PgTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(PgStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NotResonant { .. } => PgStatus::NotResonant,
            Error::StepUnderflow(_) | Error::ZeroNorm => PgStatus::Numerical,
            _ => PgStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let text = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(text));
}

/// Runs `f` with panics contained and errors recorded.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PgStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            PgStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(PgStatus::NullPointer, format!("{name} is null"))
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn slice<'a>(p: *const f64, len: usize, name: &str) -> Result<&'a [f64], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a>(p: *mut f64, len: usize, name: &str) -> Result<&'a mut [f64], Failure> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn write_out<T>(out: *mut T, value: T, name: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(name));
    }
    out.write(value);
    Ok(())
}

fn need(capacity: usize, required: usize, what: &str) -> Result<(), Failure> {
    if capacity < required {
        Err(Failure(
            PgStatus::BufferTooSmall,
            format!("{what} needs {required} entries, got {capacity}"),
        ))
    } else {
        Ok(())
    }
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next `pg_*` call on the same thread.
#[no_mangle]
pub extern "C" fn pg_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static nul-terminated string.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a drive with `β_{n,m}(t) = beta0 + gradient·m + amplitude·H(ωt + nσ + mρ)`;
/// `waveform` is a [`PgWaveform`] value.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_drive_new(
    beta0: f64,
    gradient: f64,
    omega: f64,
    amplitude: f64,
    order: i64,
    sigma: f64,
    rho: f64,
    waveform: u32,
    out: *mut *mut PgDrive,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let waveform = match waveform {
            w if w == PgWaveform::Sinusoidal as u32 => Waveform::Sinusoidal,
            w if w == PgWaveform::DeltaKicks as u32 => Waveform::AlternatingDeltaKicks,
            w => return Err(Failure(PgStatus::InvalidArgument, format!("unknown waveform {w}"))),
        };
        let d = DriveSpec::new(beta0, gradient, omega, amplitude, order, sigma, rho, waveform)?;
        write_out(out, Box::into_raw(Box::new(PgDrive(d))), "out")
    })
}

/// Creates a drive with a sampled waveform given by `len` nodes `(xs[i], hs[i])`
/// on `[0, 2π]`. With `center` nonzero the sample mean is removed first.
///
/// # Safety
/// `xs` and `hs` must point to `len` values; `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_drive_new_sampled(
    beta0: f64,
    gradient: f64,
    omega: f64,
    amplitude: f64,
    order: i64,
    sigma: f64,
    rho: f64,
    xs: *const f64,
    hs: *const f64,
    len: usize,
    center: u8,
    out: *mut *mut PgDrive,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let xs = slice(xs, len, "xs")?;
        let hs = slice(hs, len, "hs")?;
        let nodes: Vec<(f64, f64)> = xs.iter().copied().zip(hs.iter().copied()).collect();
        let waveform = if center != 0 {
            Waveform::sampled_centered(&nodes)?
        } else {
            Waveform::sampled(&nodes)?
        };
        let d = DriveSpec::new(beta0, gradient, omega, amplitude, order, sigma, rho, waveform)?;
        write_out(out, Box::into_raw(Box::new(PgDrive(d))), "out")
    })
}

/// # Safety
/// `drive` must come from `pg_drive_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pg_drive_free(drive: *mut PgDrive) {
    if !drive.is_null() {
        drop(Box::from_raw(drive));
    }
}

/// Effective hoppings of a resonant drive.
///
/// # Safety
/// `drive` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pg_hoppings(
    drive: *const PgDrive,
    jx: f64,
    jy: f64,
    method: u32,
    out: *mut PgHoppings,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = &deref(drive, "drive")?.0;
        let method = hopping_method(method)?;
        let est = EffectiveHoppings::from_drive(d, jx, jy, method)?;
        let h = est.hoppings;
        write_out(
            out,
            PgHoppings {
                kappa_x_re: h.kappa_x.re,
                kappa_x_im: h.kappa_x.im,
                kappa_y_re: h.kappa_y.re,
                kappa_y_im: h.kappa_y.im,
                alpha: h.alpha,
                quadrature_discrepancy: est.warning.map_or(0.0, |w| w.discrepancy),
            },
            "out",
        )
    })
}

/// Normalized Gaussian beam `exp[-(n²+m²)/w² - i·tilt·n]` on the window
/// `[n_min, n_max] × [m_min, m_max]`, times the static imprint of `drive`
/// when `imprint` is nonzero.
///
/// # Safety
/// `drive` must be a live handle; `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_field_gaussian(
    n_min: i64,
    n_max: i64,
    m_min: i64,
    m_max: i64,
    width: f64,
    tilt: f64,
    drive: *const PgDrive,
    imprint: u8,
    out: *mut *mut PgField,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let d = &deref(drive, "drive")?.0;
        let window = LatticeWindow::new(n_min, n_max, m_min, m_max)?;
        let f = gaussian_input(&window, width, tilt, d, imprint != 0)?;
        write_out(out, Box::into_raw(Box::new(PgField(f))), "out")
    })
}

/// # Safety
/// `field` must come from `pg_field_gaussian` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pg_field_free(field: *mut PgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// Window dimensions: `nx` columns (n) and `ny` rows (m).
///
/// # Safety
/// `field` must be a live handle; `nx` and `ny` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pg_field_dims(field: *const PgField, nx: *mut usize, ny: *mut usize) -> PgStatus {
    guard(|| {
        let w = deref(field, "field")?.0.window();
        write_out(nx, w.nx(), "nx")?;
        write_out(ny, w.ny(), "ny")
    })
}

/// Interleaved real and imaginary parts, row-major with rows indexed by
/// `m`; `len` counts doubles and must be at least `2·nx·ny`.
///
/// # Safety
/// `field` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_field_amplitudes(field: *const PgField, out: *mut f64, len: usize) -> PgStatus {
    guard(|| {
        let amps = deref(field, "field")?.0.amplitudes();
        need(len, 2 * amps.len(), "amplitude buffer")?;
        let buf = slice_mut(out, len, "out")?;
        for (pair, c) in buf.chunks_exact_mut(2).zip(amps) {
            pair[0] = c.re;
            pair[1] = c.im;
        }
        Ok(())
    })
}

fn hopping_method(method: u32) -> Result<HoppingMethod, Failure> {
    match method {
        m if m == PgHoppingMethod::ClosedForm as u32 => Ok(HoppingMethod::ClosedForm),
        m if m == PgHoppingMethod::Quadrature as u32 => Ok(HoppingMethod::Quadrature),
        m => Err(Failure(PgStatus::InvalidArgument, format!("unknown hopping method {m}"))),
    }
}

fn default_options(jx: f64, jy: f64, drive: Option<&DriveSpec>) -> IntegratorOptions {
    let j_ref = jx.abs().max(jy.abs());
    match drive {
        Some(d) => IntegratorOptions::for_drive(j_ref, d.omega),
        None => IntegratorOptions::for_rate(j_ref),
    }
}

/// Exact driven evolution of `field`, sampled at `n_times` increasing times.
///
/// # Safety
/// Handles must be live; `times` must point to `n_times` doubles; `out` must
/// be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pg_evolve_full(
    field: *const PgField,
    drive: *const PgDrive,
    jx: f64,
    jy: f64,
    times: *const f64,
    n_times: usize,
    out: *mut *mut PgTrajectory,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = &deref(field, "field")?.0;
        let d = &deref(drive, "drive")?.0;
        let t = slice(times, n_times, "times")?;
        let traj = evolve_full(f, d, jx, jy, t, &default_options(jx, jy, Some(d)))?;
        write_out(out, Box::into_raw(Box::new(PgTrajectory(traj))), "out")
    })
}

/// Effective-model evolution of the lab-frame `field`. The field is mapped
/// into the effective frame at `t = 0`; samples stay in that frame.
///
/// # Safety
/// As for [`pg_evolve_full`].
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_evolve_effective(
    field: *const PgField,
    drive: *const PgDrive,
    jx: f64,
    jy: f64,
    method: u32,
    times: *const f64,
    n_times: usize,
    out: *mut *mut PgTrajectory,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let f = &deref(field, "field")?.0;
        let d = &deref(drive, "drive")?.0;
        let t = slice(times, n_times, "times")?;
        let method = hopping_method(method)?;
        let h = EffectiveHoppings::from_drive(d, jx, jy, method)?.hoppings;
        let traj = evolve_effective(&gauge_map(f, 0.0, d), &h, t, &default_options(jx, jy, None))?;
        write_out(out, Box::into_raw(Box::new(PgTrajectory(traj))), "out")
    })
}

/// # Safety
/// `traj` must come from a `pg_evolve_*` call and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_free(traj: *mut PgTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples, or 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_len(traj: *const PgTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// # Safety
/// `traj` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_diagnostics(traj: *const PgTrajectory, out: *mut PgDiagnostics) -> PgStatus {
    guard(|| {
        let d = deref(traj, "traj")?.0.diagnostics;
        write_out(
            out,
            PgDiagnostics {
                norm_drift: d.norm_drift,
                norm_drift_budget: d.norm_drift_budget,
                max_edge_mass: d.max_edge_mass,
                truncation_warning: d.truncation_warning as u8,
                steps: d.steps,
            },
            "out",
        )
    })
}

/// `|c|` at sample `index`, row-major with rows indexed by `m`.
///
/// # Safety
/// `traj` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_moduli(
    traj: *const PgTrajectory,
    index: usize,
    out: *mut f64,
    len: usize,
) -> PgStatus {
    guard(|| {
        let t = &deref(traj, "traj")?.0;
        let field = t.fields.get(index).ok_or_else(|| {
            Failure(
                PgStatus::InvalidArgument,
                format!("sample {index} out of range ({} samples)", t.len()),
            )
        })?;
        let moduli = field.moduli();
        need(len, moduli.len(), "moduli buffer")?;
        slice_mut(out, len, "out")?[..moduli.len()].copy_from_slice(&moduli);
        Ok(())
    })
}

/// Centre of mass per sample as interleaved `(x, y)`; `len` counts doubles.
///
/// # Safety
/// `traj` must be a live handle; `out` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_com(traj: *const PgTrajectory, out: *mut f64, len: usize) -> PgStatus {
    guard(|| {
        let path = com_path(&deref(traj, "traj")?.0)?;
        need(len, 2 * path.len(), "path buffer")?;
        let buf = slice_mut(out, len, "out")?;
        for (pair, (x, y)) in buf.chunks_exact_mut(2).zip(path) {
            pair[0] = x;
            pair[1] = y;
        }
        Ok(())
    })
}

/// Fringe visibility per sample over the central half of the columns, and
/// the revival period (NaN when none is detected).
///
/// # Safety
/// `traj` must be a live handle; `out` must point to `len` doubles and
/// `revival` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn pg_trajectory_visibility(
    traj: *const PgTrajectory,
    out: *mut f64,
    len: usize,
    revival: *mut f64,
) -> PgStatus {
    guard(|| {
        let record = vertical_profile(&deref(traj, "traj")?.0)?.analyze(None)?;
        need(len, record.visibility.len(), "visibility buffer")?;
        slice_mut(out, len, "out")?[..record.visibility.len()].copy_from_slice(&record.visibility);
        write_out(revival, record.revival_period.unwrap_or(f64::NAN), "revival")
    })
}

/// Per-sample `max |c| - |f|` and infidelity between an exact and an
/// effective trajectory sampled at the same whole drive periods.
///
/// # Safety
/// Handles must be live; `max_abs` and `infidelity` must point to `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn pg_model_deviation(
    full: *const PgTrajectory,
    effective: *const PgTrajectory,
    drive: *const PgDrive,
    max_abs: *mut f64,
    infidelity: *mut f64,
    len: usize,
) -> PgStatus {
    guard(|| {
        let dev = model_deviation(
            &deref(full, "full")?.0,
            &deref(effective, "effective")?.0,
            &deref(drive, "drive")?.0,
        )?;
        need(len, dev.times.len(), "deviation buffers")?;
        let n = dev.times.len();
        slice_mut(max_abs, len, "max_abs")?[..n].copy_from_slice(&dev.max_abs);
        slice_mut(infidelity, len, "infidelity")?[..n].copy_from_slice(&dev.infidelity);
        Ok(())
    })
}

/// Magnetic bands at flux `p/q` for hoppings `κ_x`, `κ_y`. Writes up to
/// `capacity` bands and the total count to `count`; a short buffer returns
/// `BufferTooSmall` with `count` still set.
///
/// # Safety
/// `out` must point to `capacity` bands; `count` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_harper_bands(
    kappa_x_re: f64,
    kappa_x_im: f64,
    kappa_y_re: f64,
    kappa_y_im: f64,
    p: i64,
    q: i64,
    k_grid: usize,
    out: *mut PgBand,
    capacity: usize,
    count: *mut usize,
) -> PgStatus {
    guard(|| {
        let flux = RationalFlux::new(p, q)?;
        let h = EffectiveHoppings::with_flux(
            Complex64::new(kappa_x_re, kappa_x_im),
            Complex64::new(kappa_y_re, kappa_y_im),
            flux.alpha(),
        );
        let set = harper_bands(&h, flux, k_grid)?;
        write_out(count, set.len(), "count")?;
        need(capacity, set.len(), "band buffer")?;
        if set.is_empty() {
            return Ok(());
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let buf = std::slice::from_raw_parts_mut(out, capacity);
        for (slot, b) in buf.iter_mut().zip(&set.bands) {
            *slot = PgBand {
                e_min: b.e_min,
                e_max: b.e_max,
                touches_next: b.touches_next as u8,
            };
        }
        Ok(())
    })
}

/// Fabrication numbers for hopping rate `j` (1/cm), `Γ`, `ω/J`, order `M`,
/// spacing `d` (m), wavelength `lambda` (m) and substrate index `n_s`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
#[allow(clippy::too_many_arguments)]
pub unsafe extern "C" fn pg_physical_units(
    j: f64,
    gamma: f64,
    omega_over_j: f64,
    order: i64,
    d: f64,
    lambda: f64,
    n_s: f64,
    out: *mut PgPhysicalParams,
) -> PgStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let p = physical_units(j, gamma, omega_over_j, order, d, lambda, n_s)?;
        write_out(
            out,
            PgPhysicalParams {
                omega: p.omega,
                gradient: p.gradient,
                radius_cm: p.radius,
                lambda_mod_mm: p.lambda_mod,
                amplitude: p.amplitude,
                delta_n: p.delta_n,
                length_cm: p.length,
            },
            "out",
        )
    })
}
