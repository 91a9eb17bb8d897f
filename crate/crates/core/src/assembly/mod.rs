//! Concrete matrices: Toeplitz and Hankel blocks, flips, the interleaving
//! permutation `Π`, the block assemblies `Aₙ`, `Ãₙ`, `Âₙ`, and
//! compressions.
//!
//! Everything is dense. Builders are pure functions of their inputs.

mod export;
mod permutation;
mod structure;
mod toeplitz;

pub use export::{read_binary, write_binary, write_csv};
pub use permutation::{conjugate, copies_interleave, interleave, permutation_pi, permutation_pi_matrix, Permutation};
pub use structure::{
    assemble_a, assemble_hat, assemble_tilde, hat_interleaving, AssembledMatrix, BlockProvenance, BlockStructureSpec,
    Construction, SizeLaw,
};
pub use toeplitz::{flip, hankel, identity, kron, place, toeplitz, toeplitz_rect};

use thiserror::Error;

use crate::symbol::SymbolError;
use crate::CMat;

#[derive(Debug, Error)]
pub enum AssemblyError {
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error("nu = {nu} does not divide n = {n}")]
    Divisibility { n: usize, nu: usize },
    #[error("size law for block {block} at eta = {eta}: {reason}")]
    SizeLaw { block: usize, eta: usize, reason: String },
    #[error("block sizes {sizes:?} are not m_j·n/m for multiplicities {multiplicities:?}")]
    NotExactlyDivisible {
        sizes: Vec<usize>,
        multiplicities: Vec<usize>,
    },
    #[error("size error: {0}")]
    Size(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, AssemblyError>;

/// `[I_{n_keep}; O]`, an `n × n_keep` matrix with orthonormal columns.
pub fn truncation_projector(n: usize, n_keep: usize) -> Result<CMat> {
    if n_keep > n {
        return Err(AssemblyError::Size(format!("cannot keep {n_keep} of {n} columns")));
    }
    Ok(CMat::from_fn(n, n_keep, |i, j| {
        if i == j {
            crate::Complex64::new(1.0, 0.0)
        } else {
            crate::Complex64::new(0.0, 0.0)
        }
    }))
}

/// Leading principal `rows × cols` submatrix, i.e. `P_rᵀ X P_c` for
/// truncation projectors.
pub fn compress(x: &CMat, rows: usize, cols: usize) -> Result<CMat> {
    if rows > x.nrows() || cols > x.ncols() {
        return Err(AssemblyError::Size(format!(
            "cannot compress a {}x{} matrix to {rows}x{cols}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(x.as_ref().submatrix(0, 0, rows, cols).to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Complex64;

    #[test]
    fn compress_identity() {
        assert_eq!(compress(&identity(4), 2, 2).unwrap(), identity(2));
        assert!(compress(&identity(4), 5, 2).is_err());
    }

    #[test]
    fn projector_has_orthonormal_columns() {
        let p = truncation_projector(10, 7).unwrap();
        assert_eq!(p.adjoint() * &p, identity(7));
        assert!(truncation_projector(3, 4).is_err());
    }

    #[test]
    fn compress_equals_projection() {
        let n = 8;
        let x = CMat::from_fn(n, n, |i, j| if i == j { Complex64::new((i + 1) as f64 / n as f64, 0.0) } else { Complex64::new(0.0, 0.0) });
        let p = truncation_projector(n, n / 2).unwrap();
        let projected = p.transpose() * &x * &p;
        let c = compress(&x, n / 2, n / 2).unwrap();
        assert_eq!(c, projected);
        for i in 0..n / 2 {
            assert_eq!(c[(i, i)].re, (i + 1) as f64 / n as f64);
        }
    }
}
