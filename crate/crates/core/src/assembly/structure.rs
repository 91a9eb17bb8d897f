use num_rational::Rational64;
use serde::Serialize;

use super::permutation::{copies_interleave, Permutation};
use super::toeplitz::{place, toeplitz, toeplitz_rect};
use super::{AssemblyError, Result};
use crate::symbol::{RationalRatioVector, SymbolGrid};
use crate::CMat;

/// `n_j(η) = a·η + b (+ ⌈√η⌉)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SizeLaw {
    #[serde(serialize_with = "ser_rational")]
    pub scale: Rational64,
    pub offset: i64,
    pub sqrt: bool,
}

fn ser_rational<S: serde::Serializer>(r: &Rational64, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

fn ceil_sqrt(eta: usize) -> usize {
    let mut r = (eta as f64).sqrt() as usize;
    while r * r < eta {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= eta {
        r -= 1;
    }
    r
}

impl SizeLaw {
    pub fn new(scale: Rational64, offset: i64, sqrt: bool) -> Self {
        Self { scale, offset, sqrt }
    }

    /// `n = a·η`.
    pub fn linear(a: i64) -> Self {
        Self::new(Rational64::from_integer(a), 0, false)
    }

    /// Block size at `η`, or the reason it is undefined.
    pub fn size(&self, eta: usize) -> std::result::Result<usize, String> {
        let scaled = self.scale * Rational64::from_integer(eta as i64);
        if !scaled.is_integer() {
            return Err(format!(
                "{}/{}·{eta} is not an integer",
                self.scale.numer(),
                self.scale.denom()
            ));
        }
        let mut n = scaled.to_integer() + self.offset;
        if self.sqrt {
            n += ceil_sqrt(eta) as i64;
        }
        if n < 1 {
            return Err(format!("size {n} is not positive"));
        }
        Ok(n as usize)
    }
}

/// ν×ν symbol grid together with per-block size laws.
#[derive(Debug, Clone)]
pub struct BlockStructureSpec {
    symbols: SymbolGrid,
    size_laws: Vec<SizeLaw>,
    ratios: RationalRatioVector,
}

impl BlockStructureSpec {
    /// The ratios `c_j` are the normalised leading coefficients `a_j`.
    pub fn new(symbols: SymbolGrid, size_laws: Vec<SizeLaw>) -> Result<Self> {
        if size_laws.len() != symbols.nu() {
            return Err(AssemblyError::Size(format!(
                "{} size laws for nu = {}",
                size_laws.len(),
                symbols.nu()
            )));
        }
        let weights: Vec<Rational64> = size_laws.iter().map(|l| l.scale).collect();
        let ratios = RationalRatioVector::from_weights(&weights)?;
        Ok(Self {
            symbols,
            size_laws,
            ratios,
        })
    }

    pub fn nu(&self) -> usize {
        self.symbols.nu()
    }

    pub fn block_shape(&self) -> (usize, usize) {
        self.symbols.block_shape()
    }

    pub fn symbols(&self) -> &SymbolGrid {
        &self.symbols
    }

    pub fn size_laws(&self) -> &[SizeLaw] {
        &self.size_laws
    }

    pub fn ratios(&self) -> &RationalRatioVector {
        &self.ratios
    }

    /// `(n_1(η), …, n_ν(η))`.
    pub fn sizes(&self, eta: usize) -> Result<Vec<usize>> {
        self.size_laws
            .iter()
            .enumerate()
            .map(|(block, law)| {
                law.size(eta)
                    .map_err(|reason| AssemblyError::SizeLaw { block: block + 1, eta, reason })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Construction {
    /// `T_{n_i}(f)`.
    Toeplitz,
    /// `T_{n_i, n_j}(f)`.
    RectToeplitz,
    /// `T_{min(n_i, n_j)}(f)` padded with zeros.
    PaddedSquare,
    /// `copies` copies of `T_{n/m}(f)` along the diagonal, then padding.
    Copies { copies: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlockProvenance {
    pub row_block: usize,
    pub col_block: usize,
    pub symbol: String,
    pub construction: Construction,
}

/// A dense matrix with its ν×ν block partition and per-block origin.
#[derive(Debug, Clone)]
pub struct AssembledMatrix {
    data: CMat,
    row_partition: Vec<usize>,
    col_partition: Vec<usize>,
    provenance: Vec<BlockProvenance>,
}

impl AssembledMatrix {
    pub fn data(&self) -> &CMat {
        &self.data
    }

    pub fn into_data(self) -> CMat {
        self.data
    }

    pub fn row_partition(&self) -> &[usize] {
        &self.row_partition
    }

    pub fn col_partition(&self) -> &[usize] {
        &self.col_partition
    }

    pub fn provenance(&self) -> &[BlockProvenance] {
        &self.provenance
    }

    pub fn nrows(&self) -> usize {
        self.data.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.data.ncols()
    }

    /// `d_n = min(rows, cols)`, the number of singular values.
    pub fn d_n(&self) -> usize {
        self.nrows().min(self.ncols())
    }

    /// Copy of block `(i, j)`, zero-based.
    pub fn block(&self, i: usize, j: usize) -> CMat {
        let r0: usize = self.row_partition[..i].iter().sum();
        let c0: usize = self.col_partition[..j].iter().sum();
        self.data
            .as_ref()
            .submatrix(r0, c0, self.row_partition[i], self.col_partition[j])
            .to_owned()
    }
}

fn offsets(parts: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(parts.len() + 1);
    out.push(0);
    for p in parts {
        out.push(out.last().unwrap() + p);
    }
    out
}

fn assemble_with<F>(spec: &BlockStructureSpec, sizes: &[usize], mut block: F) -> Result<AssembledMatrix>
where
    F: FnMut(usize, usize) -> Result<(CMat, Construction)>,
{
    let (s, t) = spec.block_shape();
    let row_partition: Vec<usize> = sizes.iter().map(|n| s * n).collect();
    let col_partition: Vec<usize> = sizes.iter().map(|n| t * n).collect();
    let (ro, co) = (offsets(&row_partition), offsets(&col_partition));
    let mut data = CMat::zeros(ro[spec.nu()], co[spec.nu()]);
    let mut provenance = Vec::with_capacity(spec.nu() * spec.nu());
    for i in 0..spec.nu() {
        for j in 0..spec.nu() {
            let (b, construction) = block(i, j)?;
            debug_assert!(b.nrows() <= row_partition[i] && b.ncols() <= col_partition[j]);
            place(&mut data, ro[i], co[j], &b);
            provenance.push(BlockProvenance {
                row_block: i,
                col_block: j,
                symbol: spec.symbols().get(i, j).label().to_string(),
                construction,
            });
        }
    }
    Ok(AssembledMatrix {
        data,
        row_partition,
        col_partition,
        provenance,
    })
}

/// `Aₙ`: block `(i, j)` is `T_{n_i, n_j}(f_{i,j})`.
pub fn assemble_a(spec: &BlockStructureSpec, eta: usize) -> Result<AssembledMatrix> {
    let sizes = spec.sizes(eta)?;
    assemble_with(spec, &sizes, |i, j| {
        let f = spec.symbols().get(i, j);
        if i == j {
            Ok((toeplitz(f, sizes[i])?, Construction::Toeplitz))
        } else {
            Ok((toeplitz_rect(f, sizes[i], sizes[j])?, Construction::RectToeplitz))
        }
    })
}

/// `Ãₙ`: off-diagonal blocks are square `T_{min(n_i, n_j)}(f_{i,j})`,
/// zero-padded at the bottom or on the right.
pub fn assemble_tilde(spec: &BlockStructureSpec, eta: usize) -> Result<AssembledMatrix> {
    let sizes = spec.sizes(eta)?;
    assemble_with(spec, &sizes, |i, j| {
        let f = spec.symbols().get(i, j);
        if i == j {
            Ok((toeplitz(f, sizes[i])?, Construction::Toeplitz))
        } else {
            Ok((toeplitz(f, sizes[i].min(sizes[j]))?, Construction::PaddedSquare))
        }
    })
}

fn exact_block_count(spec: &BlockStructureSpec, sizes: &[usize]) -> Result<usize> {
    let m = spec.ratios().lcm();
    let mult = spec.ratios().multiplicities();
    let n: usize = sizes.iter().sum();
    let fail = || AssemblyError::NotExactlyDivisible {
        sizes: sizes.to_vec(),
        multiplicities: mult.to_vec(),
    };
    if !n.is_multiple_of(m) {
        return Err(fail());
    }
    let q = n / m;
    if sizes.iter().zip(mult).any(|(&nj, &mj)| nj != mj * q) {
        return Err(fail());
    }
    Ok(q)
}

/// `Âₙ` for sizes `n_j = m_j·n/m`: block `(j, k)` holds
/// `min(m_j, m_k)` diagonal copies of `T_{n/m}(f_{j,k})`, zero-padded.
/// Up to the interleaving of [`hat_interleaving`] this is `T_{n/m}(F)`.
pub fn assemble_hat(spec: &BlockStructureSpec, eta: usize) -> Result<AssembledMatrix> {
    let sizes = spec.sizes(eta)?;
    let q = exact_block_count(spec, &sizes)?;
    let (s, t) = spec.block_shape();
    let mult = spec.ratios().multiplicities().to_vec();
    assemble_with(spec, &sizes, |j, k| {
        let copies = mult[j].min(mult[k]);
        let tq = toeplitz(spec.symbols().get(j, k), q)?;
        let mut b = CMat::zeros(copies * s * q, copies * t * q);
        for c in 0..copies {
            place(&mut b, c * s * q, c * t * q, &tq);
        }
        let construction = if copies == 1 && j == k {
            Construction::Toeplitz
        } else {
            Construction::Copies { copies }
        };
        Ok((b, construction))
    })
}

/// Row and column permutations `(P_s, P_t)` with
/// `conjugate(P_s, Âₙ, P_t) = T_{n/m}(F)`.
pub fn hat_interleaving(spec: &BlockStructureSpec, eta: usize) -> Result<(Permutation, Permutation)> {
    let sizes = spec.sizes(eta)?;
    let q = exact_block_count(spec, &sizes)?;
    let (s, t) = spec.block_shape();
    let mult = spec.ratios().multiplicities();
    Ok((copies_interleave(q, mult, s), copies_interleave(q, mult, t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{conjugate, permutation_pi};
    use crate::symbol::build_distribution_symbol;
    use crate::symparse::parse_scalar;

    fn group1() -> SymbolGrid {
        let p = |s| parse_scalar(s).unwrap();
        SymbolGrid::new(vec![
            vec![p("2 - 2*cos(t)"), p("1 - exp(-i*t)")],
            vec![p("1 - exp(i*t)"), p("2 - 2*cos(t) - 6*cos(2*t)")],
        ])
        .unwrap()
    }

    fn spec(laws: Vec<SizeLaw>) -> BlockStructureSpec {
        BlockStructureSpec::new(group1(), laws).unwrap()
    }

    #[test]
    fn size_laws() {
        let half = SizeLaw::new(Rational64::new(1, 2), 0, false);
        assert_eq!(half.size(20), Ok(10));
        assert!(half.size(21).is_err());
        assert_eq!(SizeLaw::new(Rational64::from_integer(2), 0, true).size(81), Ok(171));
        assert_eq!(SizeLaw::new(Rational64::from_integer(2), 0, true).size(82), Ok(174));
        assert_eq!(SizeLaw::new(Rational64::from_integer(2), -2, false).size(20), Ok(38));
        assert!(SizeLaw::new(Rational64::from_integer(1), -5, false).size(3).is_err());
        for eta in 0..2000 {
            let r = ceil_sqrt(eta);
            assert!(r * r >= eta && (r == 0 || (r - 1) * (r - 1) < eta));
        }
    }

    #[test]
    fn group1_a_is_symmetric_with_partition() {
        let a = assemble_a(&spec(vec![SizeLaw::linear(1), SizeLaw::linear(2)]), 20).unwrap();
        assert_eq!((a.nrows(), a.ncols()), (60, 60));
        assert_eq!(a.row_partition(), &[20, 40]);
        let d = a.data();
        for i in 0..60 {
            for j in 0..60 {
                assert_eq!(d[(i, j)], d[(j, i)].conj());
                assert_eq!(d[(i, j)].im, 0.0);
            }
        }
        assert_eq!(a.provenance().len(), 4);
        assert_eq!(a.provenance()[1].construction, Construction::RectToeplitz);
    }

    #[test]
    fn zero_off_diagonal_is_block_diagonal() {
        let p = |s| parse_scalar(s).unwrap();
        let grid = SymbolGrid::new(vec![vec![p("2 - 2*cos(t)"), p("0")], vec![p("0"), p("3")]]).unwrap();
        let spec = BlockStructureSpec::new(grid, vec![SizeLaw::linear(1), SizeLaw::linear(1)]).unwrap();
        let a = assemble_a(&spec, 5).unwrap();
        assert_eq!(a.block(0, 1), CMat::zeros(5, 5));
        assert_eq!(a.block(0, 0), toeplitz(spec.symbols().get(0, 0), 5).unwrap());
    }

    #[test]
    fn tilde_pads_off_diagonal_blocks() {
        let spec = spec(vec![SizeLaw::linear(1), SizeLaw::linear(2)]);
        let t = assemble_tilde(&spec, 4).unwrap();
        let a = assemble_a(&spec, 4).unwrap();
        let b12 = t.block(0, 1);
        let t4 = toeplitz(spec.symbols().get(0, 1), 4).unwrap();
        for i in 0..4 {
            for j in 0..8 {
                let expected = if j < 4 { t4[(i, j)] } else { crate::Complex64::new(0.0, 0.0) };
                assert_eq!(b12[(i, j)], expected);
            }
        }
        assert_eq!(t.block(0, 0), a.block(0, 0));
        assert_eq!(t.block(1, 1), a.block(1, 1));
        let equal = spec_equal();
        assert_eq!(assemble_tilde(&equal, 7).unwrap().data(), assemble_a(&equal, 7).unwrap().data());
    }

    fn spec_equal() -> BlockStructureSpec {
        spec(vec![SizeLaw::linear(1), SizeLaw::linear(1)])
    }

    #[test]
    fn a_minus_tilde_lives_outside_leading_squares() {
        let spec = spec(vec![SizeLaw::linear(1), SizeLaw::linear(2)]);
        let a = assemble_a(&spec, 6).unwrap();
        let t = assemble_tilde(&spec, 6).unwrap();
        for (bi, bj) in [(0, 1), (1, 0)] {
            let d = &a.block(bi, bj) - &t.block(bi, bj);
            for i in 0..d.nrows() {
                for j in 0..d.ncols() {
                    if i < 6 && j < 6 {
                        assert_eq!(d[(i, j)], crate::Complex64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn permutation_identity_equal_sizes() {
        let spec = spec_equal();
        for q in [1, 5, 20] {
            let a = assemble_a(&spec, q).unwrap();
            let f = build_distribution_symbol(spec.symbols(), spec.ratios()).unwrap();
            let p = permutation_pi(2 * q, 2, 1).unwrap();
            assert_eq!(conjugate(&p, a.data(), &p).unwrap(), toeplitz(&f, q).unwrap());
        }
    }

    #[test]
    fn hat_group1_and_interleaving() {
        let spec = spec(vec![SizeLaw::linear(1), SizeLaw::linear(2)]);
        let q = 4;
        let hat = assemble_hat(&spec, q).unwrap();
        assert_eq!((hat.nrows(), hat.ncols()), (3 * q, 3 * q));
        let f = spec.symbols();
        let tq = |i, j| toeplitz(f.get(i, j), q).unwrap();
        let d = hat.data();
        let sub = |r: usize, c: usize| d.as_ref().submatrix(r * q, c * q, q, q).to_owned();
        // F1 pattern: [[f11, f12, 0], [f21, f22, 0], [0, 0, f22]]
        assert_eq!(sub(0, 0), tq(0, 0));
        assert_eq!(sub(0, 1), tq(0, 1));
        assert_eq!(sub(0, 2), CMat::zeros(q, q));
        assert_eq!(sub(1, 0), tq(1, 0));
        assert_eq!(sub(2, 0), CMat::zeros(q, q));
        assert_eq!(sub(1, 1), tq(1, 1));
        assert_eq!(sub(2, 2), tq(1, 1));
        assert_eq!(sub(1, 2), CMat::zeros(q, q));

        let fsym = build_distribution_symbol(spec.symbols(), spec.ratios()).unwrap();
        let (ps, pt) = hat_interleaving(&spec, q).unwrap();
        assert_eq!(conjugate(&ps, d, &pt).unwrap(), toeplitz(&fsym, q).unwrap());
    }

    #[test]
    fn hat_rejects_inexact_sizes() {
        let spec = spec(vec![SizeLaw::linear(1), SizeLaw::new(Rational64::from_integer(2), 4, false)]);
        assert!(matches!(assemble_hat(&spec, 5), Err(AssemblyError::NotExactlyDivisible { .. })));
        let equal = spec_equal();
        assert_eq!(assemble_hat(&equal, 6).unwrap().data(), assemble_a(&equal, 6).unwrap().data());
    }
}
