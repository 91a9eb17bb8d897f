//! In-memory analyses for a single η. The runner writes their results to
//! disk; tests call them directly.

use serde::Serialize;
use thiserror::Error;

use toepblock::assembly::{
    assemble_a, assemble_hat, assemble_tilde, conjugate, hat_interleaving, permutation_pi, toeplitz, AssemblyError,
};
use toepblock::spectra::{
    compare_sorted, matrix_spectrum, rearrangement as rearrange, reference_sample, weyl_gap_from_sample,
    zero_distribution_profile, Comparison, GridPolicy, OutlierReport, SpectraError, SpectralSample, SpectrumKind,
    TestFunction,
};
use toepblock::CMat;

use crate::config::ExperimentConfig;

#[derive(Debug, Error)]
pub enum TaskError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, TaskError>;

/// Sorted matrix spectrum against sorted symbol samples.
#[derive(Debug, Clone)]
pub struct CompareOutcome {
    pub kind: SpectrumKind,
    pub sizes: Vec<usize>,
    pub shape: (usize, usize),
    pub policy: GridPolicy,
    pub matrix: SpectralSample,
    pub reference: SpectralSample,
    pub comparison: Comparison,
}

impl CompareOutcome {
    /// Number of distinct symbol curves in the reference.
    pub fn curve_count(&self) -> usize {
        let mut tags: Vec<u32> = self.reference.tags().to_vec();
        tags.sort_unstable();
        tags.dedup();
        tags.len()
    }
}

fn reference_policy(cfg: &ExperimentConfig, eta: usize) -> Result<GridPolicy> {
    cfg.reference.at(eta).map_err(TaskError::Unsupported)
}

pub fn compare(cfg: &ExperimentConfig, eta: usize, kind: SpectrumKind) -> Result<CompareOutcome> {
    let a = assemble_a(&cfg.structure, eta)?;
    let matrix = matrix_spectrum(a.data(), kind, cfg.parameters.hermitian_tol)?;
    let policy = reference_policy(cfg, eta)?;
    let reference = reference_sample(&cfg.distribution_symbol, matrix.len(), &policy, kind)?;
    let matrix = matrix.leading(reference.len());
    let comparison = compare_sorted(&matrix, &reference)?;
    Ok(CompareOutcome {
        kind,
        sizes: cfg.structure.sizes(eta)?,
        shape: (a.nrows(), a.ncols()),
        policy,
        matrix,
        reference,
        comparison,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OutlierRow {
    pub eta: usize,
    pub sizes: Vec<usize>,
    #[serde(flatten)]
    pub report: OutlierReport,
}

pub fn outlier(cfg: &ExperimentConfig, eta: usize) -> Result<OutlierRow> {
    let a = assemble_a(&cfg.structure, eta)?;
    let spectrum = matrix_spectrum(a.data(), SpectrumKind::Sv, 0.0)?;
    let policy = reference_policy(cfg, eta)?;
    let report = toepblock::spectra::outlier_ratio_from_sample(
        &spectrum,
        &cfg.distribution_symbol,
        cfg.parameters.h,
        &policy,
        SpectrumKind::Sv,
    )?;
    Ok(OutlierRow {
        eta,
        sizes: cfg.structure.sizes(eta)?,
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PermIdentityOutcome {
    pub eta: usize,
    pub sizes: Vec<usize>,
    /// `"pi"` for equal sizes, `"hat"` for the interleaved copies form.
    pub route: &'static str,
    pub block_count: usize,
    pub max_deviation: f64,
}

fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m: f64 = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// `max |Π_s A_n Π_tᵀ − T_q(F)|` for equal sizes; otherwise the same for
/// the interleaved `Â_n` when the sizes are exact multiples.
pub fn perm_identity(cfg: &ExperimentConfig, eta: usize) -> Result<PermIdentityOutcome> {
    let spec = &cfg.structure;
    let sizes = spec.sizes(eta)?;
    let (s, t) = spec.block_shape();
    let nu = spec.nu();
    let f = &cfg.distribution_symbol;
    if sizes.iter().all(|&n| n == sizes[0]) {
        let q = sizes[0];
        let a = assemble_a(spec, eta)?;
        let rows = permutation_pi(nu * q, nu, s)?;
        let cols = permutation_pi(nu * q, nu, t)?;
        let permuted = conjugate(&rows, a.data(), &cols)?;
        let expected = toeplitz(f, q)?;
        return Ok(PermIdentityOutcome {
            eta,
            sizes,
            route: "pi",
            block_count: q,
            max_deviation: max_abs_diff(&permuted, &expected),
        });
    }
    let hat = assemble_hat(spec, eta).map_err(|e| match e {
        AssemblyError::NotExactlyDivisible { .. } => {
            TaskError::Unsupported(format!("sizes {sizes:?} are neither equal nor exact multiples: {e}"))
        }
        other => other.into(),
    })?;
    let (rows, cols) = hat_interleaving(spec, eta)?;
    let q = sizes[0] / spec.ratios().multiplicities()[0];
    let permuted = conjugate(&rows, hat.data(), &cols)?;
    let expected = toeplitz(f, q)?;
    Ok(PermIdentityOutcome {
        eta,
        sizes,
        route: "hat",
        block_count: q,
        max_deviation: max_abs_diff(&permuted, &expected),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroDistRow {
    pub eta: usize,
    pub d_n: usize,
    pub eps: f64,
    /// Fraction of `σ(A_n − Ã_n) ≥ eps`.
    pub tilde: f64,
    /// Fraction of `σ(A_n − Â_n) ≥ eps`, when `Â_n` exists.
    pub hat: Option<f64>,
}

pub fn zero_dist(cfg: &ExperimentConfig, eta: usize) -> Result<ZeroDistRow> {
    let spec = &cfg.structure;
    let a = assemble_a(spec, eta)?;
    let eps = cfg.parameters.eps;
    let tilde = assemble_tilde(spec, eta)?;
    let diff = a.data() - tilde.data();
    let tilde_frac = zero_distribution_profile(&[diff], eps)?[0];
    let hat_frac = match assemble_hat(spec, eta) {
        Ok(hat) => {
            let diff = a.data() - hat.data();
            Some(zero_distribution_profile(&[diff], eps)?[0])
        }
        Err(AssemblyError::NotExactlyDivisible { .. }) => None,
        Err(e) => return Err(e.into()),
    };
    Ok(ZeroDistRow {
        eta,
        d_n: a.d_n(),
        eps,
        tilde: tilde_frac,
        hat: hat_frac,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylOutcome {
    pub eta: usize,
    pub kind: SpectrumKind,
    pub gaps: Vec<(String, f64)>,
}

/// Test functions used when the config lists none: a hat and a bump
/// spanning the symbol range.
fn default_test_functions(reference: &SpectralSample) -> Vec<TestFunction> {
    let v = reference.values();
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let pad = 0.1 * (hi - lo).max(1.0);
    let (lo, hi) = (lo - pad, hi + pad);
    vec![
        TestFunction::Hat {
            lo,
            peak: 0.5 * (lo + hi),
            hi,
        },
        TestFunction::Hat {
            lo,
            peak: lo + 0.25 * (hi - lo),
            hi: 0.5 * (lo + hi),
        },
        TestFunction::TruncatedPolynomial {
            lo,
            hi,
            coefficients: vec![1.0 / (hi - lo).powi(2)],
        },
    ]
}

pub fn weyl(cfg: &ExperimentConfig, eta: usize) -> Result<WeylOutcome> {
    let kind = cfg.parameters.spectrum;
    let a = assemble_a(&cfg.structure, eta)?;
    let spectrum = matrix_spectrum(a.data(), kind, cfg.parameters.hermitian_tol)?;
    let testfns = if cfg.parameters.weyl.is_empty() {
        let grid = toepblock::spectra::uniform_grid(cfg.parameters.resolution)?;
        default_test_functions(&toepblock::spectra::symbol_spectral_samples(
            &cfg.distribution_symbol,
            &grid,
            kind,
        )?)
    } else {
        cfg.parameters.weyl.clone()
    };
    let gaps = weyl_gap_from_sample(&spectrum, &cfg.distribution_symbol, &testfns, cfg.parameters.quadrature, kind)?;
    Ok(WeylOutcome {
        eta,
        kind,
        gaps: testfns.iter().map(TestFunction::name).zip(gaps).collect(),
    })
}

/// Matrix spectrum against the nondecreasing rearrangement `φ` of the
/// symbol, both indexed by `x = (i − ½)/d_n`.
#[derive(Debug, Clone)]
pub struct RearrangementOutcome {
    pub kind: SpectrumKind,
    pub x: Vec<f64>,
    pub matrix: Vec<f64>,
    pub phi: Vec<f64>,
    pub sup: f64,
}

pub fn rearrangement(cfg: &ExperimentConfig, eta: usize) -> Result<RearrangementOutcome> {
    let kind = cfg.parameters.spectrum;
    let a = assemble_a(&cfg.structure, eta)?;
    let spectrum = matrix_spectrum(a.data(), kind, cfg.parameters.hermitian_tol)?;
    let r = rearrange(&cfg.distribution_symbol, cfg.parameters.resolution, kind)?;
    let d = spectrum.len();
    let m = r.values.len();
    let mut x = Vec::with_capacity(d);
    let mut phi = Vec::with_capacity(d);
    for i in 0..d {
        let xi = (i as f64 + 0.5) / d as f64;
        x.push(xi);
        let k = ((xi * m as f64) as usize).min(m - 1);
        phi.push(r.values[k]);
    }
    let sup = spectrum
        .values()
        .iter()
        .zip(&phi)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(RearrangementOutcome {
        kind,
        x,
        matrix: spectrum.values().to_vec(),
        phi,
        sup,
    })
}
