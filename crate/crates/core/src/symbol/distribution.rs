use super::{MatrixSymbol, RationalRatioVector, Result, SymbolError};

/// A ν×ν array of symbols sharing one `s × t` shape.
#[derive(Debug, Clone)]
pub struct SymbolGrid {
    nu: usize,
    entries: Vec<MatrixSymbol>,
}

impl SymbolGrid {
    pub fn new(rows: Vec<Vec<MatrixSymbol>>) -> Result<Self> {
        let nu = rows.len();
        if nu < 2 {
            return Err(SymbolError::InvalidGrid(format!("nu must be at least 2, got {nu}")));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != nu) {
            return Err(SymbolError::InvalidGrid(format!(
                "row {} has {} entries, expected {nu}",
                bad + 1,
                rows[bad].len()
            )));
        }
        let entries: Vec<MatrixSymbol> = rows.into_iter().flatten().collect();
        let shape = entries[0].shape();
        if let Some(bad) = entries.iter().position(|e| e.shape() != shape) {
            return Err(SymbolError::ShapeMismatch {
                op: "symbol grid",
                left: shape,
                right: entries[bad].shape(),
            });
        }
        Ok(Self { nu, entries })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    /// `(s, t)`.
    pub fn block_shape(&self) -> (usize, usize) {
        self.entries[0].shape()
    }

    /// Entry `(i, j)`, zero-based.
    pub fn get(&self, i: usize, j: usize) -> &MatrixSymbol {
        &self.entries[i * self.nu + j]
    }

    /// Whether `A_n` built from this grid is Hermitian for every size
    /// choice: `s = t`, each diagonal symbol Hermitian-valued and
    /// `f_{k,j} = f_{j,k}*`.
    pub fn is_hermitian_structure(&self, tol: f64) -> bool {
        let (s, t) = self.block_shape();
        if s != t {
            return false;
        }
        for j in 0..self.nu {
            if !self.get(j, j).is_hermitian_valued(tol) {
                return false;
            }
            for k in (j + 1)..self.nu {
                let diff = self.get(k, j).sum(&self.get(j, k).adjoint().scale((-1.0).into()));
                match diff {
                    Ok(d) => match d.coefficients() {
                        Some(c) => {
                            if c.values().any(|m| super::max_abs(m) > tol) {
                                return false;
                            }
                        }
                        None => {
                            let grid = 257;
                            let bad = (0..grid).any(|i| {
                                let theta = -std::f64::consts::PI
                                    + 2.0 * std::f64::consts::PI * (i as f64 + 0.5) / grid as f64;
                                super::max_abs(&d.evaluate(theta)) > tol
                            });
                            if bad {
                                return false;
                            }
                        }
                    },
                    Err(_) => return false,
                }
            }
        }
        true
    }
}

/// Row and column offsets of the E-blocks inside `F`: block row `j`
/// starts at `s·Σ_{h<j} m_h`, block column `k` at `t·Σ_{h<k} m_h`. The
/// final entry of each vector is the total size.
pub fn e_block_offsets(ratios: &RationalRatioVector, s: usize, t: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rows = vec![0];
    let mut cols = vec![0];
    for &mj in ratios.multiplicities() {
        rows.push(rows.last().unwrap() + s * mj);
        cols.push(cols.last().unwrap() + t * mj);
    }
    (rows, cols)
}

/// The `(s·m) × (t·m)` symbol `F = (E_{j,k})`, where `E_{j,j} = I_{m_j} ⊗
/// f_{j,j}` and, for `j ≠ k`, `E_{j,k}` is `I_{min(m_j, m_k)} ⊗ f_{j,k}`
/// padded with zeros on the right (`m_k > m_j`) or at the bottom
/// (`m_j > m_k`) to `s·m_j × t·m_k`.
pub fn build_distribution_symbol(grid: &SymbolGrid, ratios: &RationalRatioVector) -> Result<MatrixSymbol> {
    if ratios.nu() != grid.nu() {
        return Err(SymbolError::RatioMismatch {
            expected: grid.nu(),
            got: ratios.nu(),
        });
    }
    let (s, t) = grid.block_shape();
    let (row_off, col_off) = e_block_offsets(ratios, s, t);
    let mult = ratios.multiplicities();
    let mut placements = Vec::new();
    for j in 0..grid.nu() {
        for k in 0..grid.nu() {
            let copies = mult[j].min(mult[k]);
            for c in 0..copies {
                placements.push((row_off[j] + c * s, col_off[k] + c * t, grid.get(j, k)));
            }
        }
    }
    let m = ratios.lcm();
    let label = format!("F[nu={}, m={:?}]", grid.nu(), mult);
    Ok(MatrixSymbol::from_blocks(s * m, t * m, &placements)?.with_label(label))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::CMat;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn group_one() -> SymbolGrid {
        let f11 = MatrixSymbol::scalar_trig(&[(0, c(2.0)), (1, c(-1.0)), (-1, c(-1.0))]);
        let f22 = MatrixSymbol::scalar_trig(&[(0, c(2.0)), (1, c(-1.0)), (-1, c(-1.0)), (2, c(-3.0)), (-2, c(-3.0))]);
        let f12 = MatrixSymbol::scalar_trig(&[(0, c(1.0)), (-1, c(-1.0))]);
        let f21 = MatrixSymbol::scalar_trig(&[(0, c(1.0)), (1, c(-1.0))]);
        SymbolGrid::new(vec![vec![f11, f12], vec![f21, f22]]).unwrap()
    }

    #[test]
    fn group_one_symbol_layout() {
        let grid = group_one();
        let r = RationalRatioVector::from_pairs(&[(1, 3), (2, 3)]).unwrap();
        let f = build_distribution_symbol(&grid, &r).unwrap();
        assert_eq!(f.shape(), (3, 3));
        for theta in [-2.1, 0.3, 1.7] {
            let v = f.evaluate(theta);
            let e = |i: usize, j: usize| grid.get(i, j).evaluate(theta)[(0, 0)];
            let expected = [
                [e(0, 0), e(0, 1), c(0.0)],
                [e(1, 0), e(1, 1), c(0.0)],
                [c(0.0), c(0.0), e(1, 1)],
            ];
            for i in 0..3 {
                for j in 0..3 {
                    assert!((v[(i, j)] - expected[i][j]).norm() < 1e-14);
                }
            }
        }
        assert!(f.is_hermitian());
        assert!(grid.is_hermitian_structure(1e-12));
    }

    #[test]
    fn equal_ratios_give_plain_block_symbol() {
        let grid = group_one();
        let r = RationalRatioVector::from_pairs(&[(1, 2), (1, 2)]).unwrap();
        let f = build_distribution_symbol(&grid, &r).unwrap();
        assert_eq!(f.shape(), (2, 2));
        let direct = MatrixSymbol::from_blocks(
            2,
            2,
            &[(0, 0, grid.get(0, 0)), (0, 1, grid.get(0, 1)), (1, 0, grid.get(1, 0)), (1, 1, grid.get(1, 1))],
        )
        .unwrap();
        assert_eq!(f.coefficients(), direct.coefficients());
    }

    #[test]
    fn ratio_mismatch() {
        let r = RationalRatioVector::from_pairs(&[(1, 3), (1, 3), (1, 3)]).unwrap();
        assert!(matches!(
            build_distribution_symbol(&group_one(), &r),
            Err(SymbolError::RatioMismatch { .. })
        ));
    }

    #[test]
    fn e_blocks_have_expected_extent() {
        // s = 1, t = 2 with multiplicities (2, 1, 4)
        let row = |k: i64| MatrixSymbol::trig(1, 2, [(k, CMat::from_fn(1, 2, |_, j| c(j as f64 + 1.0)))]).unwrap();
        let grid = SymbolGrid::new((0..3).map(|i| (0..3).map(|j| row(i * 3 + j)).collect()).collect()).unwrap();
        let r = RationalRatioVector::from_pairs(&[(2, 7), (1, 7), (4, 7)]).unwrap();
        let (ro, co) = e_block_offsets(&r, 1, 2);
        assert_eq!(ro, vec![0, 2, 3, 7]);
        assert_eq!(co, vec![0, 4, 6, 14]);
        let f = build_distribution_symbol(&grid, &r).unwrap();
        assert_eq!(f.shape(), (7, 14));
        // E_{1,2} is 2×2 (in 1×2 units): only copy 0 present, row 1 padded
        let coeffs = f.coefficients().unwrap();
        let e12 = &coeffs[&1];
        assert_eq!(e12[(0, 4)], c(1.0));
        assert_eq!(e12[(0, 5)], c(2.0));
        assert_eq!(e12[(1, 4)], c(0.0));
        // E_{3,1}: two copies stacked, rows 5 and 6 padded
        let e31 = &coeffs[&6];
        assert_eq!(e31[(3, 0)], c(1.0));
        assert_eq!(e31[(4, 2)], c(1.0));
        assert_eq!(e31[(5, 0)], c(0.0));
        assert_eq!(e31[(5, 2)], c(0.0));
    }

    #[test]
    fn grid_validation() {
        let f = MatrixSymbol::identity(1).unwrap();
        assert!(SymbolGrid::new(vec![vec![f.clone()]]).is_err());
        assert!(SymbolGrid::new(vec![vec![f.clone(), f.clone()], vec![f.clone()]]).is_err());
        let wide = MatrixSymbol::zero(1, 2).unwrap();
        assert!(SymbolGrid::new(vec![vec![f.clone(), wide], vec![f.clone(), f]]).is_err());
    }
}
