use std::ffi::CStr;
use std::path::Path;
use std::process::Command;
use std::ptr;

use photon_gauge_ffi::*;

const PI: f64 = std::f64::consts::PI;

unsafe fn last_error() -> String {
    let p = pg_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn fringe_drive(omega: f64) -> *mut PgDrive {
    let mut d = ptr::null_mut();
    let s = pg_drive_new(0.0, omega, omega, 0.717 * omega, 1, PI, PI, PgWaveform::Sinusoidal as u32, &mut d);
    assert_eq!(s, PgStatus::Ok);
    d
}

#[test]
fn hoppings_match_fringe_parameters() {
    unsafe {
        let d = fringe_drive(8.0);
        let mut h = PgHoppings::default();
        assert_eq!(pg_hoppings(d, 1.0, 1.0, PgHoppingMethod::ClosedForm as u32, &mut h), PgStatus::Ok);
        assert!((h.kappa_x_re - 0.5483).abs() < 1e-3);
        assert!(((h.kappa_y_re.powi(2) + h.kappa_y_im.powi(2)).sqrt() - 0.5478).abs() < 1e-3);
        assert_eq!(h.alpha, 0.5);
        let mut q = PgHoppings::default();
        assert_eq!(pg_hoppings(d, 1.0, 1.0, PgHoppingMethod::Quadrature as u32, &mut q), PgStatus::Ok);
        assert!((q.kappa_x_re - h.kappa_x_re).abs() < 1e-9);
        pg_drive_free(d);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut d = ptr::null_mut();
        let s = pg_drive_new(0.0, 8.0, 8.0, 1.0, 1, 4.0, 0.0, 0, &mut d);
        assert_eq!(s, PgStatus::InvalidArgument);
        assert!(d.is_null());
        assert!(last_error().contains("phase gradients"));

        assert_eq!(pg_drive_new(0.0, 8.0, 8.0, 1.0, 1, 0.0, 0.0, 7, &mut d), PgStatus::InvalidArgument);
        assert!(last_error().contains("waveform"));

        assert_eq!(
            pg_drive_new(0.0, 7.0, 8.0, 1.0, 1, 0.0, 0.0, 0, &mut d),
            PgStatus::Ok
        );
        assert!(pg_last_error().is_null());
        let mut h = PgHoppings::default();
        assert_eq!(pg_hoppings(d, 1.0, 1.0, 0, &mut h), PgStatus::NotResonant);
        assert_eq!(pg_hoppings(ptr::null(), 1.0, 1.0, 0, &mut h), PgStatus::NullPointer);
        assert_eq!(pg_hoppings(d, 1.0, 1.0, 0, ptr::null_mut()), PgStatus::NullPointer);
        pg_drive_free(d);
        pg_drive_free(ptr::null_mut());
    }
}

#[test]
fn evolve_and_compare() {
    unsafe {
        let d = fringe_drive(8.0);
        let mut f = ptr::null_mut();
        assert_eq!(pg_field_gaussian(-12, 12, -10, 10, 3.0, 0.0, d, 1, &mut f), PgStatus::Ok);
        let (mut nx, mut ny) = (0usize, 0usize);
        assert_eq!(pg_field_dims(f, &mut nx, &mut ny), PgStatus::Ok);
        assert_eq!((nx, ny), (25, 21));
        let mut amps = vec![0.0; 2 * nx * ny];
        assert_eq!(pg_field_amplitudes(f, amps.as_mut_ptr(), amps.len()), PgStatus::Ok);
        let norm: f64 = amps.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12);
        assert_eq!(pg_field_amplitudes(f, amps.as_mut_ptr(), 3), PgStatus::BufferTooSmall);

        let period = 2.0 * PI / 8.0;
        let times: Vec<f64> = (0..=4).map(|k| k as f64 * period).collect();
        let mut exact = ptr::null_mut();
        let mut eff = ptr::null_mut();
        assert_eq!(pg_evolve_full(f, d, 1.0, 1.0, times.as_ptr(), times.len(), &mut exact), PgStatus::Ok);
        assert_eq!(
            pg_evolve_effective(f, d, 1.0, 1.0, 0, times.as_ptr(), times.len(), &mut eff),
            PgStatus::Ok
        );
        assert_eq!(pg_trajectory_len(exact), 5);
        assert_eq!(pg_trajectory_len(ptr::null()), 0);

        let mut diag = PgDiagnostics::default();
        assert_eq!(pg_trajectory_diagnostics(exact, &mut diag), PgStatus::Ok);
        assert!(diag.norm_drift <= diag.norm_drift_budget);
        assert!(diag.steps > 0);

        let mut moduli = vec![0.0; nx * ny];
        assert_eq!(pg_trajectory_moduli(exact, 4, moduli.as_mut_ptr(), moduli.len()), PgStatus::Ok);
        assert!((moduli.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-8);
        assert_eq!(pg_trajectory_moduli(exact, 5, moduli.as_mut_ptr(), moduli.len()), PgStatus::InvalidArgument);

        let mut com = vec![0.0; 10];
        assert_eq!(pg_trajectory_com(exact, com.as_mut_ptr(), com.len()), PgStatus::Ok);
        assert!(com[0].abs() < 1e-12 && com[1].abs() < 1e-12);

        let mut vis = vec![0.0; 5];
        let mut revival = 0.0;
        assert_eq!(pg_trajectory_visibility(exact, vis.as_mut_ptr(), vis.len(), &mut revival), PgStatus::Ok);
        assert!(vis.iter().all(|v| (0.0..=1.0).contains(v)));

        let mut max_abs = vec![0.0; 5];
        let mut infid = vec![0.0; 5];
        assert_eq!(
            pg_model_deviation(exact, eff, d, max_abs.as_mut_ptr(), infid.as_mut_ptr(), 5),
            PgStatus::Ok
        );
        assert_eq!(max_abs[0], 0.0);
        assert!(max_abs[4] > 0.0 && max_abs[4] < 0.1);
        assert!(infid.iter().all(|v| (0.0..1.0).contains(v)));

        pg_trajectory_free(exact);
        pg_trajectory_free(eff);
        pg_field_free(f);
        pg_drive_free(d);
    }
}

#[test]
fn bands_and_units() {
    unsafe {
        let mut count = 0usize;
        let mut bands = [PgBand::default(); 4];
        assert_eq!(
            pg_harper_bands(1.0, 0.0, 1.0, 0.0, 1, 3, 32, bands.as_mut_ptr(), 4, &mut count),
            PgStatus::Ok
        );
        assert_eq!(count, 3);
        assert!(bands[0].e_min < bands[1].e_min && bands[1].e_max < bands[2].e_max);
        assert_eq!(
            pg_harper_bands(1.0, 0.0, 1.0, 0.0, 1, 3, 32, bands.as_mut_ptr(), 2, &mut count),
            PgStatus::BufferTooSmall
        );
        assert_eq!(count, 3);
        assert_eq!(
            pg_harper_bands(1.0, 0.0, 1.0, 0.0, 2, 4, 32, bands.as_mut_ptr(), 4, &mut count),
            PgStatus::InvalidArgument
        );

        let mut p = PgPhysicalParams::default();
        assert_eq!(pg_physical_units(1.0, 0.717, 8.0, 1, 19e-6, 633e-9, 1.45, &mut p), PgStatus::Ok);
        assert!((p.radius_cm - 34.18).abs() < 0.01);
        assert!((p.lambda_mod_mm - 7.854).abs() < 1e-3);
        assert_eq!(pg_physical_units(-1.0, 0.717, 8.0, 1, 19e-6, 633e-9, 1.45, &mut p), PgStatus::InvalidArgument);
        assert!(!CStr::from_ptr(pg_version()).to_bytes().is_empty());
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/photon_gauge.h");
    assert!(header.exists());
    let src = std::env::temp_dir().join(format!("pg_header_check_{}.c", std::process::id()));
    std::fs::write(
        &src,
        "#include \"photon_gauge.h\"\nint main(void) { PgDrive *d = 0; return pg_drive_new(0, 1, 1, 0, 1, 0, 0, PG_WAVEFORM_SINUSOIDAL, &d) == PG_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let status = match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(dir.join("include"))
        .arg(&src)
        .status()
    {
        Ok(s) => s,
        Err(_) => {
            eprintln!("no C compiler found; skipping header check");
            return;
        }
    };
    std::fs::remove_file(&src).ok();
    assert!(status.success());
}
