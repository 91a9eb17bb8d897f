//! Spectra of assembled matrices and of symbols, and the metrics that
//! compare them.
//!
//! Matrix spectra come from dense decompositions. Real input takes a
//! real code path, which is roughly twice as fast for the large SVDs.
//! Symbol spectra are sampled pointwise: `F(θ)` is a small matrix whose
//! eigenvalues or singular values are computed at each grid point.

mod compare;
mod sampling;

pub use compare::{
    compare_sorted, outlier_ratio, outlier_ratio_from_sample, reference_sample, weyl_gap, weyl_gap_from_sample,
    zero_distribution_profile, Comparison, DistributionReport, GridPolicy, OutlierReport, TestFunction,
    QUANTILE_LEVELS,
};
pub use sampling::{grid_theta, rearrangement, symbol_curves, symbol_spectral_samples, uniform_grid, RearrangedSymbol};

use std::io::Write;

use faer::{Mat, Side};
use serde::Serialize;
use thiserror::Error;

use crate::symbol::SymbolError;
use crate::CMat;

#[derive(Debug, Error)]
pub enum SpectraError {
    #[error("matrix is not Hermitian (max |a_ij - conj(a_ji)| = {deviation:e} > {tol:e}); only singular value comparisons apply")]
    NotHermitian { deviation: f64, tol: f64 },
    #[error("symbol '{0}' is not Hermitian-valued; only singular value comparisons apply")]
    NotHermitianSymbol(String),
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("samples have lengths {left} and {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("decomposition failed: {0}")]
    Decomposition(String),
    #[error(transparent)]
    Symbol(#[from] SymbolError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SpectraError>;

/// Absolute Hermitian tolerance used when a caller has no better value.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    MatrixEigenvalues,
    MatrixSingularValues,
    SymbolEigSamples,
    SymbolSvSamples,
    Rearrangement,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::MatrixEigenvalues => "matrix-eig",
            Origin::MatrixSingularValues => "matrix-sv",
            Origin::SymbolEigSamples => "symbol-eig",
            Origin::SymbolSvSamples => "symbol-sv",
            Origin::Rearrangement => "rearrangement",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpectrumKind {
    Eig,
    Sv,
}

/// Sorted real spectrum. `tags[i]` records where `values[i]` came from:
/// the curve index `l` for symbol samples, zero for matrix spectra.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralSample {
    values: Vec<f64>,
    tags: Vec<u32>,
    origin: Origin,
    meta: String,
}

impl SpectralSample {
    /// Sorts by value, ties by tag. Non-finite values are rejected.
    pub fn new(values: Vec<f64>, tags: Vec<u32>, origin: Origin, meta: impl Into<String>) -> Result<Self> {
        if values.len() != tags.len() {
            return Err(SpectraError::LengthMismatch {
                left: values.len(),
                right: tags.len(),
            });
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(SpectraError::Decomposition(format!("non-finite value {bad}")));
        }
        let mut pairs: Vec<(f64, u32)> = values.into_iter().zip(tags).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let (values, tags) = pairs.into_iter().unzip();
        Ok(Self {
            values,
            tags,
            origin,
            meta: meta.into(),
        })
    }

    pub fn untagged(values: Vec<f64>, origin: Origin, meta: impl Into<String>) -> Result<Self> {
        let tags = vec![0; values.len()];
        Self::new(values, tags, origin, meta)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tags(&self) -> &[u32] {
        &self.tags
    }

    pub fn origin(&self) -> Origin {
        self.origin
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The `k` smallest entries.
    pub fn leading(&self, k: usize) -> Self {
        let k = k.min(self.len());
        Self {
            values: self.values[..k].to_vec(),
            tags: self.tags[..k].to_vec(),
            origin: self.origin,
            meta: self.meta.clone(),
        }
    }

    /// CSV with header `index,value,origin,tag`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "index,value,origin,tag")?;
        for (i, (v, t)) in self.values.iter().zip(&self.tags).enumerate() {
            writeln!(w, "{i},{v:?},{},{t}", self.origin.as_str())?;
        }
        Ok(())
    }
}

fn real_part(a: &CMat) -> Option<Mat<f64>> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if a[(i, j)].im != 0.0 {
                return None;
            }
        }
    }
    Some(Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)].re))
}

/// `max |a_ij − conj(a_ji)|`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    let mut dev = 0.0f64;
    for j in 0..a.ncols() {
        for i in j..a.nrows() {
            dev = dev.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    dev
}

/// Ascending eigenvalues of a Hermitian matrix (within `tol`).
pub fn eigenvalues_hermitian(a: &CMat, tol: f64) -> Result<SpectralSample> {
    if a.nrows() != a.ncols() {
        return Err(SpectraError::NotSquare {
            rows: a.nrows(),
            cols: a.ncols(),
        });
    }
    let deviation = hermitian_deviation(a);
    if deviation > tol {
        return Err(SpectraError::NotHermitian { deviation, tol });
    }
    let values = raw_eigenvalues(a)?;
    SpectralSample::untagged(values, Origin::MatrixEigenvalues, format!("{}x{}", a.nrows(), a.ncols()))
}

pub(crate) fn raw_eigenvalues(a: &CMat) -> Result<Vec<f64>> {
    let err = |e| SpectraError::Decomposition(format!("{e:?}"));
    match real_part(a) {
        Some(r) => r.self_adjoint_eigenvalues(Side::Lower).map_err(err),
        None => a.self_adjoint_eigenvalues(Side::Lower).map_err(err),
    }
}

pub(crate) fn raw_singular_values(a: &CMat) -> Result<Vec<f64>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(Vec::new());
    }
    let err = |e| SpectraError::Decomposition(format!("{e:?}"));
    let mut v = match real_part(a) {
        Some(r) => r.singular_values().map_err(err)?,
        None => a.singular_values().map_err(err)?,
    };
    v.reverse();
    Ok(v)
}

/// Ascending singular values, `min(rows, cols)` of them.
pub fn singular_values(a: &CMat) -> Result<SpectralSample> {
    let values = raw_singular_values(a)?;
    SpectralSample::untagged(values, Origin::MatrixSingularValues, format!("{}x{}", a.nrows(), a.ncols()))
}

/// Eigenvalues or singular values according to `kind`.
pub fn matrix_spectrum(a: &CMat, kind: SpectrumKind, tol: f64) -> Result<SpectralSample> {
    match kind {
        SpectrumKind::Eig => eigenvalues_hermitian(a, tol),
        SpectrumKind::Sv => singular_values(a),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{hankel, identity};
    use crate::symparse::parse_scalar;
    use crate::Complex64;

    fn diag(d: &[f64]) -> CMat {
        CMat::from_fn(d.len(), d.len(), |i, j| Complex64::new(if i == j { d[i] } else { 0.0 }, 0.0))
    }

    #[test]
    fn trivial_spectra() {
        assert_eq!(eigenvalues_hermitian(&identity(3), 0.0).unwrap().values(), &[1.0, 1.0, 1.0]);
        assert_eq!(eigenvalues_hermitian(&diag(&[3.0, -1.0]), 0.0).unwrap().values(), &[-1.0, 3.0]);
        assert_eq!(singular_values(&diag(&[-2.0, 1.0])).unwrap().values(), &[1.0, 2.0]);
        assert_eq!(singular_values(&CMat::zeros(3, 5)).unwrap().values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn non_hermitian_is_refused() {
        let mut a = identity(2);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(eigenvalues_hermitian(&a, 1e-12), Err(SpectraError::NotHermitian { .. })));
        assert!(matches!(eigenvalues_hermitian(&CMat::zeros(2, 3), 1.0), Err(SpectraError::NotSquare { .. })));
    }

    #[test]
    fn hankel_single_singular_value() {
        let f = parse_scalar("1 - exp(i*t)").unwrap();
        let sv = singular_values(&hankel(&f, 6).unwrap()).unwrap();
        assert_eq!(sv.values()[5], 1.0);
        assert!(sv.values()[..5].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn complex_path_matches_real_structure() {
        let a = CMat::from_fn(4, 4, |i, j| {
            let (i, j) = (i as f64, j as f64);
            if i == j {
                Complex64::new(2.0 + i, 0.0)
            } else {
                Complex64::new(0.5 / (1.0 + (i - j).abs()), 0.25 * (i - j))
            }
        });
        let ev = eigenvalues_hermitian(&a, 1e-14).unwrap();
        let trace: f64 = (0..4).map(|i| a[(i, i)].re).sum();
        assert!((ev.values().iter().sum::<f64>() - trace).abs() < 1e-12);
        assert!(ev.values().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn ties_sorted_by_tag() {
        let s = SpectralSample::new(vec![1.0, 0.0, 1.0], vec![2, 5, 1], Origin::SymbolSvSamples, "").unwrap();
        assert_eq!(s.values(), &[0.0, 1.0, 1.0]);
        assert_eq!(s.tags(), &[5, 1, 2]);
        assert!(SpectralSample::untagged(vec![f64::NAN], Origin::Rearrangement, "").is_err());
    }

    #[test]
    fn csv_output() {
        let s = SpectralSample::untagged(vec![0.5, -1.0], Origin::MatrixEigenvalues, "2x2").unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "index,value,origin,tag\n0,-1.0,matrix-eig,0\n1,0.5,matrix-eig,0\n"
        );
    }
}
