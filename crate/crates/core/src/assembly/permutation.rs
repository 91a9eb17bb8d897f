use num_complex::Complex64;

use super::{AssemblyError, Result};
use crate::CMat;

/// A permutation matrix stored as an index map: row `r` of `P` has its
/// single 1 in column `map[r]`, so `(P·x)[r] = x[map[r]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for &m in &map {
            if m >= map.len() || std::mem::replace(&mut seen[m], true) {
                return Err(AssemblyError::Size(format!("not a permutation: index {m} repeated or out of range")));
            }
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self { map: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn transpose(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (r, &c) in self.map.iter().enumerate() {
            inv[c] = r;
        }
        Self { map: inv }
    }

    pub fn to_matrix(&self) -> CMat {
        let n = self.map.len();
        let mut m = CMat::zeros(n, n);
        for (r, &c) in self.map.iter().enumerate() {
            m[(r, c)] = Complex64::new(1.0, 0.0);
        }
        m
    }
}

/// `P_rows · a · P_colsᵀ`, computed by index mapping (bit-exact).
pub fn conjugate(rows: &Permutation, a: &CMat, cols: &Permutation) -> Result<CMat> {
    if rows.len() != a.nrows() || cols.len() != a.ncols() {
        return Err(AssemblyError::Size(format!(
            "permutations of size {}x{} cannot act on a {}x{} matrix",
            rows.len(),
            cols.len(),
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(CMat::from_fn(a.nrows(), a.ncols(), |i, j| a[(rows.map[i], cols.map[j])]))
}

/// Interleaving permutation for `groups` consecutive segments of an
/// index range, segment `g` holding `block_count` chunks of
/// `widths[g]` entries each. It sends chunk `p` of segment `g` to slot
/// `g` of output block `p`.
pub fn interleave(block_count: usize, widths: &[usize]) -> Permutation {
    let total: usize = widths.iter().sum();
    let mut map = vec![0; total * block_count];
    let mut offset = 0;
    for &w in widths {
        for p in 0..block_count {
            for i in 0..w {
                map[p * total + offset + i] = offset * block_count + p * w + i;
            }
        }
        offset += w;
    }
    Permutation { map }
}

/// `Π_{n,ν,μ} = [I_ν ⊗ e_1ᵀ; …; I_ν ⊗ e_{n/ν}ᵀ] ⊗ I_μ`.
pub fn permutation_pi(n: usize, nu: usize, mu: usize) -> Result<Permutation> {
    if nu == 0 || !n.is_multiple_of(nu) {
        return Err(AssemblyError::Divisibility { n, nu });
    }
    Ok(interleave(n / nu, &vec![mu; nu]))
}

/// Same as [`permutation_pi`] but as an explicit matrix.
pub fn permutation_pi_matrix(n: usize, nu: usize, mu: usize) -> Result<CMat> {
    Ok(permutation_pi(n, nu, mu)?.to_matrix())
}

/// Permutation that reorders a "copies" layout into symbol order.
///
/// The source layout has `multiplicities.len()` segments; segment `j`
/// holds `m_j` consecutive copies, each of `block_count` chunks of `width`
/// entries. The target groups, for each chunk position `p`, all copies of
/// all segments in order. With every `m_j = 1` this is `Π`.
pub fn copies_interleave(block_count: usize, multiplicities: &[usize], width: usize) -> Permutation {
    let m: usize = multiplicities.iter().sum();
    let stride = m * width;
    let mut map = vec![0; stride * block_count];
    let mut seg_offset = 0;
    for &mj in multiplicities {
        for c in 0..mj {
            for p in 0..block_count {
                for a in 0..width {
                    let target = p * stride + (seg_offset + c) * width + a;
                    let source = seg_offset * block_count * width + (c * block_count + p) * width + a;
                    map[target] = source;
                }
            }
        }
        seg_offset += mj;
    }
    Permutation { map }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::toeplitz::identity;

    #[test]
    fn pi_small_case() {
        let p = permutation_pi(4, 2, 1).unwrap();
        assert_eq!(p.map(), &[0, 2, 1, 3]);
        let m = p.to_matrix();
        let expected = [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(m[(i, j)].re, expected[i][j] as f64);
            }
        }
    }

    #[test]
    fn pi_matches_kronecker_formula() {
        // build [I_ν ⊗ e_1ᵀ; …] ⊗ I_μ literally
        use crate::assembly::toeplitz::kron;
        let (n, nu, mu) = (6, 3, 2);
        let nn = n / nu;
        let mut stacked = CMat::zeros(n, n);
        for p in 0..nn {
            let mut e = CMat::zeros(1, nn);
            e[(0, p)] = Complex64::new(1.0, 0.0);
            let block = kron(&identity(nu), &e);
            crate::assembly::toeplitz::place(&mut stacked, p * nu, 0, &block);
        }
        let literal = kron(&stacked, &identity(mu));
        assert_eq!(permutation_pi_matrix(n, nu, mu).unwrap(), literal);
    }

    #[test]
    fn pi_is_orthogonal() {
        let p = permutation_pi_matrix(6, 3, 2).unwrap();
        let pt = p.transpose().to_owned();
        assert_eq!(&p * &pt, identity(12));
        assert_eq!(permutation_pi(5, 1, 1).unwrap(), Permutation::identity(5));
        assert!(matches!(permutation_pi(5, 2, 1), Err(AssemblyError::Divisibility { .. })));
    }

    #[test]
    fn conjugate_agrees_with_matrix_products() {
        let a = CMat::from_fn(6, 4, |i, j| Complex64::new(i as f64, j as f64 * 0.5));
        let rp = permutation_pi(6, 3, 1).unwrap();
        let cp = permutation_pi(4, 2, 1).unwrap();
        let via_map = conjugate(&rp, &a, &cp).unwrap();
        let via_mul = &(&rp.to_matrix() * &a) * cp.to_matrix().transpose();
        assert_eq!(via_map, via_mul);
        assert_eq!(rp.transpose().transpose(), rp);
    }

    #[test]
    fn copies_interleave_reduces_to_pi() {
        assert_eq!(copies_interleave(5, &[1, 1, 1], 2), permutation_pi(15, 3, 2).unwrap());
        let p = copies_interleave(3, &[1, 2], 1);
        assert!(Permutation::from_map(p.map().to_vec()).is_ok());
    }
}
