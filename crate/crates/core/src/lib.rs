//! Synthetic magnetic fields for photons in driven square lattices.
//!
//! A square lattice of coupled waveguides (or resonators) with a static
//! detuning gradient along `y` and a phase-shifted periodic modulation of
//! the propagation constants behaves, at high modulation frequency, like a
//! charged particle on a lattice in a uniform magnetic field. This crate
//! integrates the exact driven coupled-mode equations, builds the averaged
//! magnetic-lattice model and its band structure, integrates the
//! semiclassical equations of motion, and extracts the fringe and
//! cyclotron observables used to compare them.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bessel;
pub mod config;
pub mod effective;
pub mod error;
pub mod full;
pub mod hopping;
pub mod integrator;
pub mod model;
pub mod observables;
pub mod scenario;
pub mod spectrum;
pub mod units;
pub mod waveform;

pub use effective::{evolve_effective, expectation_kinematics, gauge_map, gauge_unmap, semiclassical_evolve, SemiclassicalState};
pub use error::{Error, Result};
pub use full::{evolve_full, gaussian_input};
pub use hopping::{EffectiveHoppings, HoppingMethod};
pub use integrator::{Diagnostics, IntegratorOptions, Trajectory};
pub use observables::{com_path, fringe_visibility, model_deviation, revival_period, vertical_profile, FringeRecord};
pub use spectrum::{band_count, butterfly, harper_bands, BandSet, RationalFlux};
pub use model::{DriveSpec, LatticeWindow, WaveField};
pub use units::{physical_units, PhysicalParams};
pub use waveform::Waveform;
