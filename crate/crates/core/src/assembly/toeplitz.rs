use num_complex::Complex64;

use super::Result;
use crate::symbol::MatrixSymbol;
use crate::CMat;

/// Copies `block` into `target` with its top-left corner at `(r0, c0)`.
pub fn place(target: &mut CMat, r0: usize, c0: usize, block: &CMat) {
    for j in 0..block.ncols() {
        for i in 0..block.nrows() {
            target[(r0 + i, c0 + j)] = block[(i, j)];
        }
    }
}

/// Square block Toeplitz matrix `T_n(f) = [f̂_{i-j}]`, of size `(s·n) × (t·n)`.
pub fn toeplitz(f: &MatrixSymbol, n: usize) -> Result<CMat> {
    toeplitz_rect(f, n, n)
}

/// Rectangular block Toeplitz matrix `T_{n_rows, n_cols}(f)`, of size
/// `(s·n_rows) × (t·n_cols)`, with block `(i, j)` equal to `f̂_{i-j}`.
pub fn toeplitz_rect(f: &MatrixSymbol, n_rows: usize, n_cols: usize) -> Result<CMat> {
    let (s, t) = f.shape();
    let mut out = CMat::zeros(s * n_rows, t * n_cols);
    if n_rows == 0 || n_cols == 0 {
        return Ok(out);
    }
    let lo = -(n_cols as i64 - 1);
    let hi = n_rows as i64 - 1;
    let table = f.fourier_coefficients(lo, hi)?;
    let nonzero: Vec<bool> = table
        .iter()
        .map(|m| (0..s).any(|a| (0..t).any(|b| m[(a, b)] != Complex64::new(0.0, 0.0))))
        .collect();
    for j in 0..n_cols {
        for i in 0..n_rows {
            let idx = (i as i64 - j as i64 - lo) as usize;
            if nonzero[idx] {
                place(&mut out, i * s, j * t, &table[idx]);
            }
        }
    }
    Ok(out)
}

/// Block Hankel matrix `H_n(f) = Σ_{k=1}^{2n-1} K_n^{(k)} ⊗ f̂_k`; block
/// `(i, j)` (one-based) is `f̂_{i+j-1}`.
pub fn hankel(f: &MatrixSymbol, n: usize) -> Result<CMat> {
    let (s, t) = f.shape();
    let mut out = CMat::zeros(s * n, t * n);
    if n == 0 {
        return Ok(out);
    }
    let table = f.fourier_coefficients(1, 2 * n as i64 - 1)?;
    for j in 0..n {
        for i in 0..n {
            place(&mut out, i * s, j * t, &table[i + j]);
        }
    }
    Ok(out)
}

/// Anti-identity `W_μ`.
pub fn flip(mu: usize) -> CMat {
    CMat::from_fn(mu, mu, |i, j| {
        if i + j + 1 == mu {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

pub fn identity(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) })
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    let (p, q) = (b.nrows(), b.ncols());
    CMat::from_fn(a.nrows() * p, a.ncols() * q, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)])
}
