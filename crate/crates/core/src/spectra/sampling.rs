use std::f64::consts::PI;

use serde::Serialize;

use super::{raw_eigenvalues, raw_singular_values, Origin, Result, SpectraError, SpectralSample, SpectrumKind};
use crate::symbol::MatrixSymbol;

/// `θ_η = {−πη/(η+1) + 2jηπ/((η+1)(η−1)) : j = 0, …, η−1}`.
pub fn grid_theta(eta: usize) -> Result<Vec<f64>> {
    if eta < 2 {
        return Err(SpectraError::InvalidGrid(format!("eta must be at least 2, got {eta}")));
    }
    let e = eta as f64;
    Ok((0..eta)
        .map(|j| -PI * e / (e + 1.0) + 2.0 * j as f64 * e * PI / ((e + 1.0) * (e - 1.0)))
        .collect())
}

/// `N` midpoints of a uniform partition of `[−π, π]`.
pub fn uniform_grid(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(SpectraError::InvalidGrid("empty uniform grid".into()));
    }
    Ok((0..n).map(|i| -PI + 2.0 * PI * (i as f64 + 0.5) / n as f64).collect())
}

fn curve_count(f: &MatrixSymbol, kind: SpectrumKind) -> Result<usize> {
    match kind {
        SpectrumKind::Sv => Ok(f.rows().min(f.cols())),
        SpectrumKind::Eig => {
            if f.rows() != f.cols() || !f.is_hermitian() {
                return Err(SpectraError::NotHermitianSymbol(f.label().to_string()));
            }
            Ok(f.rows())
        }
    }
}

/// `curves[l][g]`: the `l`-th smallest eigenvalue or singular value of
/// `F(grid[g])`, so curve `l` is `λ_{l+1}(F)` or `σ_{l+1}(F)` in
/// ascending order.
pub fn symbol_curves(f: &MatrixSymbol, grid: &[f64], kind: SpectrumKind) -> Result<Vec<Vec<f64>>> {
    let r = curve_count(f, kind)?;
    let mut curves = vec![Vec::with_capacity(grid.len()); r];
    for &theta in grid {
        let m = f.evaluate(theta);
        let vals = match kind {
            SpectrumKind::Eig => raw_eigenvalues(&m)?,
            SpectrumKind::Sv => raw_singular_values(&m)?,
        };
        for (l, v) in vals.into_iter().enumerate() {
            curves[l].push(v);
        }
    }
    Ok(curves)
}

/// All `r·|grid|` values of the curves, pooled and sorted; tags are the
/// curve indices.
pub fn symbol_spectral_samples(f: &MatrixSymbol, grid: &[f64], kind: SpectrumKind) -> Result<SpectralSample> {
    let curves = symbol_curves(f, grid, kind)?;
    let mut values = Vec::with_capacity(curves.len() * grid.len());
    let mut tags = Vec::with_capacity(values.capacity());
    for (l, c) in curves.into_iter().enumerate() {
        tags.extend(std::iter::repeat_n(l as u32, c.len()));
        values.extend(c);
    }
    let origin = match kind {
        SpectrumKind::Eig => Origin::SymbolEigSamples,
        SpectrumKind::Sv => Origin::SymbolSvSamples,
    };
    SpectralSample::new(values, tags, origin, format!("{} on {} points", f.label(), grid.len()))
}

/// Nondecreasing rearrangement `φ` sampled at `x_i = (i − ½)/(rN)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RearrangedSymbol {
    pub x: Vec<f64>,
    pub values: Vec<f64>,
    pub resolution: usize,
}

impl RearrangedSymbol {
    pub fn as_sample(&self) -> Result<SpectralSample> {
        SpectralSample::untagged(self.values.clone(), Origin::Rearrangement, format!("N = {}", self.resolution))
    }
}

pub fn rearrangement(f: &MatrixSymbol, resolution: usize, kind: SpectrumKind) -> Result<RearrangedSymbol> {
    let grid = uniform_grid(resolution)?;
    let pooled = symbol_spectral_samples(f, &grid, kind)?;
    let total = pooled.len() as f64;
    let x = (0..pooled.len()).map(|i| (i as f64 + 0.5) / total).collect();
    Ok(RearrangedSymbol {
        x,
        values: pooled.values().to_vec(),
        resolution,
    })
}
