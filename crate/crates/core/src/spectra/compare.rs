use std::collections::BTreeMap;

use serde::Serialize;

use super::sampling::{grid_theta, symbol_curves, uniform_grid};
use super::{
    matrix_spectrum, raw_singular_values, Origin, Result, SpectraError, SpectralSample, SpectrumKind,
    DEFAULT_HERMITIAN_TOL,
};
use crate::assembly::AssembledMatrix;
use crate::symbol::MatrixSymbol;
use crate::CMat;

/// Quantile levels reported by [`compare_sorted`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];

/// Elementwise comparison of two sorted samples of equal length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    /// `|empirical_i − reference_i|`, in sorted position order.
    pub out: Vec<f64>,
    pub sup: f64,
    /// `(level, quantile of out)`, linear interpolation between order
    /// statistics.
    pub quantiles: Vec<(f64, f64)>,
    /// `(p, |Q_emp(p) − Q_ref(p)|)` for `p` in [`QUANTILE_LEVELS`]: the two
    /// quantile functions compared at fixed levels.
    pub level_gaps: Vec<(f64, f64)>,
    /// Largest of `level_gaps`; the levels span the interior 90% of the
    /// spectrum, so edge outliers do not enter.
    pub interior_sup: f64,
}

impl Comparison {
    pub fn quantile(&self, level: f64) -> Option<f64> {
        self.quantiles.iter().find(|(l, _)| *l == level).map(|(_, q)| *q)
    }

    pub fn median(&self) -> f64 {
        quantile_of(&self.out, 0.5)
    }
}

fn quantile_of(values: &[f64], level: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let pos = level * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}

pub fn compare_sorted(empirical: &SpectralSample, reference: &SpectralSample) -> Result<Comparison> {
    if empirical.len() != reference.len() {
        return Err(SpectraError::LengthMismatch {
            left: empirical.len(),
            right: reference.len(),
        });
    }
    let out: Vec<f64> = empirical
        .values()
        .iter()
        .zip(reference.values())
        .map(|(a, b)| (a - b).abs())
        .collect();
    let sup = out.iter().copied().fold(0.0, f64::max);
    let quantiles = QUANTILE_LEVELS.iter().map(|&l| (l, quantile_of(&out, l))).collect();
    let level_gaps: Vec<(f64, f64)> = QUANTILE_LEVELS
        .iter()
        .map(|&l| (l, (quantile_of(empirical.values(), l) - quantile_of(reference.values(), l)).abs()))
        .collect();
    let interior_sup = level_gaps.iter().map(|g| g.1).fold(0.0, f64::max);
    Ok(Comparison {
        out,
        sup,
        quantiles,
        level_gaps,
        interior_sup,
    })
}

/// Continuous compactly supported test functions.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum TestFunction {
    /// Piecewise linear, 0 outside `[lo, hi]`, 1 at `peak`.
    Hat { lo: f64, peak: f64, hi: f64 },
    /// `p(x)·(x − lo)(hi − x)` on `[lo, hi]`, 0 elsewhere; `p` given by
    /// ascending coefficients.
    TruncatedPolynomial { lo: f64, hi: f64, coefficients: Vec<f64> },
    Zero,
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            TestFunction::Hat { lo, peak, hi } => {
                if x <= *lo || x >= *hi {
                    0.0
                } else if x <= *peak {
                    (x - lo) / (peak - lo)
                } else {
                    (hi - x) / (hi - peak)
                }
            }
            TestFunction::TruncatedPolynomial { lo, hi, coefficients } => {
                if x <= *lo || x >= *hi {
                    return 0.0;
                }
                let p = coefficients.iter().rev().fold(0.0, |acc, c| acc * x + c);
                p * (x - lo) * (hi - x)
            }
            TestFunction::Zero => 0.0,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::Hat { lo, peak, hi } => format!("hat[{lo},{peak},{hi}]"),
            TestFunction::TruncatedPolynomial { lo, hi, coefficients } => {
                format!("poly{coefficients:?}[{lo},{hi}]")
            }
            TestFunction::Zero => "zero".into(),
        }
    }
}

/// Per test function `G`: `|(1/d) Σ_j G(v_j) − (1/2π)∫ (1/r) Σ_l G(σ_l(F(θ))) dθ|`,
/// the integral by the `quadrature`-node periodic trapezoid rule.
pub fn weyl_gap_from_sample(
    spectrum: &SpectralSample,
    f: &MatrixSymbol,
    testfns: &[TestFunction],
    quadrature: usize,
    kind: SpectrumKind,
) -> Result<Vec<f64>> {
    let grid = uniform_grid(quadrature)?;
    let curves = symbol_curves(f, &grid, kind)?;
    let pooled: Vec<f64> = curves.into_iter().flatten().collect();
    Ok(testfns
        .iter()
        .map(|g| {
            let lhs = mean(spectrum.values().iter().map(|&v| g.eval(v)), spectrum.len());
            let rhs = mean(pooled.iter().map(|&v| g.eval(v)), pooled.len());
            (lhs - rhs).abs()
        })
        .collect())
}

fn mean(it: impl Iterator<Item = f64>, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        it.sum::<f64>() / n as f64
    }
}

pub fn weyl_gap(
    a: &CMat,
    f: &MatrixSymbol,
    testfns: &[TestFunction],
    quadrature: usize,
    kind: SpectrumKind,
) -> Result<Vec<f64>> {
    let spectrum = matrix_spectrum(a, kind, DEFAULT_HERMITIAN_TOL)?;
    weyl_gap_from_sample(&spectrum, f, testfns, quadrature, kind)
}

/// How the reference sample for the outlier ratio is laid out: curve `l`
/// (ascending) is sampled on `θ_{sizes[l]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "policy", content = "sizes", rename_all = "kebab-case")]
pub enum GridPolicy {
    /// `⌊d_n/r⌋` points per curve, the remainder spread one each over
    /// the last curves; total exactly `d_n`.
    EqualSplit,
    /// Explicit grid sizes summing to `d_n`.
    PerCurve(Vec<usize>),
    /// Explicit grid sizes whose total `R` may be below `d_n`; the
    /// reference is compared against the `R` smallest matrix values and
    /// the count is still divided by `d_n`.
    Leading(Vec<usize>),
}

impl GridPolicy {
    pub fn describe(&self) -> String {
        match self {
            GridPolicy::EqualSplit => "equal-split".into(),
            GridPolicy::PerCurve(s) => format!("per-curve{s:?}"),
            GridPolicy::Leading(s) => format!("leading{s:?}"),
        }
    }

    fn sizes(&self, curves: usize, d_n: usize) -> Result<Vec<usize>> {
        let check_len = |s: &Vec<usize>| {
            if s.len() != curves {
                Err(SpectraError::InvalidParameter(format!(
                    "{} grid sizes for {curves} curves",
                    s.len()
                )))
            } else {
                Ok(())
            }
        };
        match self {
            GridPolicy::EqualSplit => {
                let base = d_n / curves;
                let rem = d_n % curves;
                Ok((0..curves).map(|l| base + usize::from(l >= curves - rem)).collect())
            }
            GridPolicy::PerCurve(s) => {
                check_len(s)?;
                let total: usize = s.iter().sum();
                if total != d_n {
                    return Err(SpectraError::InvalidParameter(format!(
                        "per-curve grid sizes sum to {total}, expected d_n = {d_n}"
                    )));
                }
                Ok(s.clone())
            }
            GridPolicy::Leading(s) => {
                check_len(s)?;
                let total: usize = s.iter().sum();
                if total > d_n {
                    return Err(SpectraError::InvalidParameter(format!(
                        "leading grid sizes sum to {total} > d_n = {d_n}"
                    )));
                }
                Ok(s.clone())
            }
        }
    }
}

/// Symbol samples laid out by `policy` for a matrix with `d_n` values.
pub fn reference_sample(f: &MatrixSymbol, d_n: usize, policy: &GridPolicy, kind: SpectrumKind) -> Result<SpectralSample> {
    let r = match kind {
        SpectrumKind::Sv => f.rows().min(f.cols()),
        SpectrumKind::Eig => f.rows(),
    };
    let sizes = policy.sizes(r, d_n)?;
    let mut by_size: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
    for &size in &sizes {
        if size > 0 && !by_size.contains_key(&size) {
            by_size.insert(size, symbol_curves(f, &grid_theta(size)?, kind)?);
        }
    }
    let mut values = Vec::with_capacity(sizes.iter().sum());
    let mut tags = Vec::with_capacity(values.capacity());
    for (l, &size) in sizes.iter().enumerate() {
        if size == 0 {
            continue;
        }
        let curve = &by_size[&size][l];
        values.extend_from_slice(curve);
        tags.extend(std::iter::repeat_n(l as u32, curve.len()));
    }
    let origin = match kind {
        SpectrumKind::Eig => Origin::SymbolEigSamples,
        SpectrumKind::Sv => Origin::SymbolSvSamples,
    };
    SpectralSample::new(values, tags, origin, format!("{} ({})", f.label(), policy.describe()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    pub ratio: f64,
    pub count: usize,
    pub d_n: usize,
    pub reference_len: usize,
    pub h: f64,
    pub policy: GridPolicy,
}

/// `#{out_i ≥ h} / d_n` for a matrix spectrum already computed.
pub fn outlier_ratio_from_sample(
    spectrum: &SpectralSample,
    f: &MatrixSymbol,
    h: f64,
    policy: &GridPolicy,
    kind: SpectrumKind,
) -> Result<OutlierReport> {
    if h.is_nan() || h <= 0.0 {
        return Err(SpectraError::InvalidParameter(format!("h must be positive, got {h}")));
    }
    let d_n = spectrum.len();
    let reference = reference_sample(f, d_n, policy, kind)?;
    let compared = spectrum.leading(reference.len());
    let cmp = compare_sorted(&compared, &reference)?;
    let count = cmp.out.iter().filter(|&&o| o >= h).count();
    Ok(OutlierReport {
        ratio: if d_n == 0 { 0.0 } else { count as f64 / d_n as f64 },
        count,
        d_n,
        reference_len: reference.len(),
        h,
        policy: policy.clone(),
    })
}

/// Singular-value outlier ratio of an assembled matrix against `F`.
pub fn outlier_ratio(a: &AssembledMatrix, f: &MatrixSymbol, h: f64, policy: &GridPolicy) -> Result<OutlierReport> {
    let spectrum = matrix_spectrum(a.data(), SpectrumKind::Sv, 0.0)?;
    outlier_ratio_from_sample(&spectrum, f, h, policy, SpectrumKind::Sv)
}

/// For each matrix, the fraction of its singular values that are `≥ eps`.
pub fn zero_distribution_profile(matrices: &[CMat], eps: f64) -> Result<Vec<f64>> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(SpectraError::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    matrices
        .iter()
        .map(|m| {
            let sv = raw_singular_values(m)?;
            Ok(if sv.is_empty() {
                0.0
            } else {
                sv.iter().filter(|&&s| s >= eps).count() as f64 / sv.len() as f64
            })
        })
        .collect()
}

/// Summary of one matrix-versus-symbol comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub kind: SpectrumKind,
    pub sizes: Vec<usize>,
    pub grid: String,
    pub sup_discrepancy: f64,
    pub interior_sup_discrepancy: f64,
    /// `|Q_matrix(p) − Q_symbol(p)|` per level.
    pub quantile_discrepancies: Vec<(f64, f64)>,
    /// Quantiles of the elementwise `out` vector.
    pub out_quantiles: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub weyl_gaps: Vec<(String, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outliers: Option<OutlierReport>,
}

impl DistributionReport {
    pub fn from_comparison(kind: SpectrumKind, sizes: Vec<usize>, grid: impl Into<String>, cmp: &Comparison) -> Self {
        Self {
            kind,
            sizes,
            grid: grid.into(),
            sup_discrepancy: cmp.sup,
            interior_sup_discrepancy: cmp.interior_sup,
            quantile_discrepancies: cmp.level_gaps.clone(),
            out_quantiles: cmp.quantiles.clone(),
            weyl_gaps: Vec::new(),
            outliers: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
