//! Block matrices whose blocks are (rectangular) Toeplitz matrices
//! generated by matrix-valued symbols, the distribution symbol `F` that
//! governs their singular values and eigenvalues, and the numerical tools
//! used to compare the two.
//!
//! * [`symbol`]: matrix-valued generating functions and their algebra.
//! * [`symparse`]: a small expression language for scalar symbols.
//! * [`assembly`]: Toeplitz, Hankel and block assemblies, permutations.
//! * [`spectra`]: spectra, symbol sampling, distribution comparison.

pub mod assembly;
pub mod spectra;
pub mod symbol;
pub mod symparse;

pub use num_complex::Complex64;

/// Dense complex matrix used throughout the crate.
pub type CMat = faer::Mat<Complex64>;
