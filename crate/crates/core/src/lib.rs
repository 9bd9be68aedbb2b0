//! Floquet spectral data of `-d²/dx² + V` on `[0, π]` with complex `V`.
//!
//! The pipeline runs bottom-up: a [`potential::Potential`] feeds the
//! fundamental-system integrator in [`fundsys`], whose endpoint data give the
//! Floquet discriminant in [`floquet`]. [`spectra`] localizes periodic,
//! antiperiodic, Dirichlet and Neumann eigenvalues by the argument principle,
//! [`criterion`] evaluates the Riesz-basis ratio, [`rootbasis`] builds the
//! biorthogonal root-vector systems and [`resolvent`] checks everything
//! against contour-integrated Riesz projections. [`oracle`] is an
//! independent Fourier-truncation eigensolver used for cross-validation.

pub mod cli;
pub mod criterion;
pub mod error;
pub mod floquet;
pub mod fundsys;
pub mod oracle;
pub mod par;
pub mod potential;
pub mod quad;
pub mod resolvent;
pub mod rootbasis;
pub mod spectra;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Default number of grid nodes on `[0, π]`.
pub const DEFAULT_GRID: usize = 1025;

/// Square root of `λ` normalized to `Re ≥ 0`, ties broken towards `Im ≥ 0`.
pub fn sqrt_value(lambda: C64) -> C64 {
    let s = lambda.sqrt();
    if s.re < 0.0 || (s.re == 0.0 && s.im < 0.0) {
        -s
    } else {
        s
    }
}
