use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice window: {0}")]
    InvalidWindow(String),

    #[error("site ({n}, {m}) lies outside the lattice window")]
    SiteOutOfWindow { n: i64, m: i64 },

    #[error("invalid drive: {0}")]
    InvalidDrive(String),

    #[error("invalid waveform: {0}")]
    InvalidWaveform(String),

    #[error("waveform {0} cannot be evaluated pointwise")]
    NonPointwiseWaveform(&'static str),

    #[error("degenerate drive: {0}")]
    DegenerateDrive(String),

    #[error("drive is not resonant: F = {f} but M*omega = {m_omega}")]
    NotResonant { f: f64, m_omega: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("time step underflow at t = {0}")]
    StepUnderflow(f64),

    #[error("field has zero norm")]
    ZeroNorm,

    #[error("mismatched trajectories: {0}")]
    Mismatch(String),

    #[error("non-coprime flux {p}/{q}")]
    NonCoprimeFlux { p: i64, q: i64 },
}

pub type Result<T> = std::result::Result<T, Error>;
