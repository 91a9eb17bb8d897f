use num_integer::Integer;
use num_rational::Rational64;
use serde::Serialize;

use super::{Result, SymbolError};

/// Block-size ratios `c_j = α_j/β_j` with `Σ c_j = 1`, together with the
/// common denominator `m = lcm(β_j)` and multiplicities `m_j = c_j·m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RationalRatioVector {
    #[serde(serialize_with = "ser_ratios")]
    ratios: Vec<Rational64>,
    lcm_denominator: u64,
    multiplicities: Vec<usize>,
}

fn ser_ratios<S: serde::Serializer>(r: &[Rational64], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(r.iter().map(|q| format!("{}/{}", q.numer(), q.denom())))
}

impl RationalRatioVector {
    /// Builds the vector from `(α_j, β_j)` pairs. The pairs are reduced;
    /// they must be positive and sum to exactly one.
    pub fn from_pairs(pairs: &[(i64, i64)]) -> Result<Self> {
        let mut ratios = Vec::with_capacity(pairs.len());
        for &(a, b) in pairs {
            if a <= 0 || b <= 0 {
                return Err(SymbolError::InvalidRatio(format!("{a}/{b} is not a positive rational")));
            }
            ratios.push(Rational64::new(a, b));
        }
        Self::from_ratios(ratios)
    }

    /// Normalises positive weights `w_j` to `c_j = w_j / Σ w_k`.
    pub fn from_weights(weights: &[Rational64]) -> Result<Self> {
        let zero = Rational64::from_integer(0);
        if weights.iter().any(|w| *w <= zero) {
            return Err(SymbolError::InvalidRatio("weights must be positive".into()));
        }
        let total: Rational64 = weights.iter().copied().fold(zero, |a, b| a + b);
        Self::from_ratios(weights.iter().map(|w| w / total).collect())
    }

    fn from_ratios(ratios: Vec<Rational64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(SymbolError::InvalidRatio("empty ratio vector".into()));
        }
        let total: Rational64 = ratios.iter().copied().fold(Rational64::from_integer(0), |a, b| a + b);
        if total != Rational64::from_integer(1) {
            return Err(SymbolError::InvalidRatio(format!(
                "ratios sum to {}/{} instead of 1",
                total.numer(),
                total.denom()
            )));
        }
        let m = ratios.iter().fold(1i64, |acc, r| acc.lcm(r.denom()));
        let multiplicities = ratios
            .iter()
            .map(|r| (r.numer() * (m / r.denom())) as usize)
            .collect();
        Ok(Self {
            ratios,
            lcm_denominator: m as u64,
            multiplicities,
        })
    }

    pub fn nu(&self) -> usize {
        self.ratios.len()
    }

    pub fn ratios(&self) -> &[Rational64] {
        &self.ratios
    }

    /// `m = lcm(β_1, …, β_ν)`.
    pub fn lcm(&self) -> usize {
        self.lcm_denominator as usize
    }

    /// `m_j = c_j·m`.
    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }
}
