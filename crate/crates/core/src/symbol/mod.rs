//! Matrix-valued 2π-periodic generating functions.
//!
//! A [`MatrixSymbol`] maps θ to a complex `rows × cols` matrix. Two
//! representations are supported:
//!
//! * trigonometric polynomials, stored as a finite map `k → f̂_k`, where
//!   `f(θ) = Σ_k f̂_k e^{ikθ}`;
//! * general L¹ symbols, stored as a pointwise evaluator plus an optional
//!   closed-form coefficient rule. Without a rule the coefficients are
//!   obtained by composite trapezoid quadrature.
//!
//! Symbols are immutable once built and cheap to clone; all closures are
//! shared behind `Arc`.

mod distribution;
mod ratio;

pub use distribution::{build_distribution_symbol, e_block_offsets, SymbolGrid};
pub use ratio::RationalRatioVector;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::CMat;

/// Default node count for the trapezoid fallback.
pub const DEFAULT_QUADRATURE_NODES: usize = 8192;
/// Default tolerance of the quadrature self-check.
pub const QUADRATURE_TOLERANCE: f64 = 1e-6;
/// Default Hermitian tolerance for trigonometric polynomials.
pub const HERMITIAN_TOL_TRIG: f64 = 1e-12;
/// Default Hermitian tolerance for sampled L¹ symbols.
pub const HERMITIAN_TOL_ANALYTIC: f64 = 1e-9;

const HERMITIAN_SAMPLE_POINTS: usize = 1024;

pub type EvalFn = Arc<dyn Fn(f64) -> CMat + Send + Sync>;
pub type RuleFn = Arc<dyn Fn(i64) -> CMat + Send + Sync>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("coefficient for k = {k} has shape {got:?}, expected {expected:?}")]
    CoefficientShape {
        k: i64,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("symbol must have at least one row and one column")]
    EmptyShape,
    #[error("quadrature did not converge at k = {k}: discrepancy {discrepancy:e} > {tol:e}")]
    QuadratureNotConverged { k: i64, discrepancy: f64, tol: f64 },
    #[error("ratio vector has {got} entries but the symbol grid has nu = {expected}")]
    RatioMismatch { expected: usize, got: usize },
    #[error("invalid ratio vector: {0}")]
    InvalidRatio(String),
    #[error("invalid symbol grid: {0}")]
    InvalidGrid(String),
}

pub type Result<T> = std::result::Result<T, SymbolError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    TrigPolynomial,
    AnalyticL1,
}

#[derive(Clone)]
enum Body {
    Trig(BTreeMap<i64, CMat>),
    Analytic {
        eval: EvalFn,
        rule: Option<RuleFn>,
        nodes: usize,
    },
}

/// A 2π-periodic matrix-valued function `[-π, π] → ℂ^{rows × cols}`.
#[derive(Clone)]
pub struct MatrixSymbol {
    rows: usize,
    cols: usize,
    label: String,
    body: Body,
}

impl fmt::Debug for MatrixSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("MatrixSymbol");
        d.field("label", &self.label)
            .field("shape", &(self.rows, self.cols))
            .field("kind", &self.kind());
        if let Body::Trig(c) = &self.body {
            d.field("support", &c.keys().collect::<Vec<_>>());
        }
        d.finish()
    }
}

/// `e^{i·angle}`, exact when `angle` is an integer multiple of π/2.
pub(crate) fn unit_phase(angle: f64) -> Complex64 {
    let quarter = angle / (PI / 2.0);
    let r = quarter.round();
    if (quarter - r).abs() < 1e-12 && r.abs() < 1e15 {
        match (r as i64).rem_euclid(4) {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        }
    } else {
        Complex64::cis(angle)
    }
}

/// Maps θ into `[-π, π)`.
pub fn wrap_angle(theta: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let mut x = (theta + PI).rem_euclid(two_pi) - PI;
    if x >= PI {
        x -= two_pi;
    }
    x
}

fn zeros(rows: usize, cols: usize) -> CMat {
    CMat::zeros(rows, cols)
}

fn is_zero(m: &CMat) -> bool {
    (0..m.nrows()).all(|i| (0..m.ncols()).all(|j| m[(i, j)] == Complex64::new(0.0, 0.0)))
}

fn scaled(m: &CMat, c: Complex64) -> CMat {
    CMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * c)
}

fn add_into(acc: &mut CMat, m: &CMat) {
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            acc[(i, j)] += m[(i, j)];
        }
    }
}

fn adjoint_of(m: &CMat) -> CMat {
    CMat::from_fn(m.ncols(), m.nrows(), |i, j| m[(j, i)].conj())
}

fn mat_mul(a: &CMat, b: &CMat) -> CMat {
    let mut out = zeros(a.nrows(), b.ncols());
    for i in 0..a.nrows() {
        for l in 0..a.ncols() {
            let x = a[(i, l)];
            if x == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..b.ncols() {
                out[(i, j)] += x * b[(l, j)];
            }
        }
    }
    out
}

/// Largest entrywise modulus.
pub(crate) fn max_abs(m: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

impl MatrixSymbol {
    /// Trigonometric polynomial from its Fourier coefficients. Repeated
    /// indices are summed; exactly-zero coefficients are dropped.
    pub fn trig<I>(rows: usize, cols: usize, coefficients: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, CMat)>,
    {
        if rows == 0 || cols == 0 {
            return Err(SymbolError::EmptyShape);
        }
        let mut map: BTreeMap<i64, CMat> = BTreeMap::new();
        for (k, m) in coefficients {
            if m.nrows() != rows || m.ncols() != cols {
                return Err(SymbolError::CoefficientShape {
                    k,
                    expected: (rows, cols),
                    got: (m.nrows(), m.ncols()),
                });
            }
            match map.get_mut(&k) {
                Some(acc) => add_into(acc, &m),
                None => {
                    map.insert(k, m);
                }
            }
        }
        map.retain(|_, m| !is_zero(m));
        Ok(Self {
            rows,
            cols,
            label: String::new(),
            body: Body::Trig(map),
        })
    }

    /// Scalar (1×1) trigonometric polynomial.
    pub fn scalar_trig(coefficients: &[(i64, Complex64)]) -> Self {
        Self::trig(
            1,
            1,
            coefficients
                .iter()
                .map(|&(k, c)| (k, CMat::from_fn(1, 1, |_, _| c))),
        )
        .expect("1x1 coefficients always match")
    }

    pub fn constant(value: CMat) -> Result<Self> {
        Self::trig(value.nrows(), value.ncols(), [(0, value)])
    }

    pub fn zero(rows: usize, cols: usize) -> Result<Self> {
        Self::trig(rows, cols, std::iter::empty())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::constant(CMat::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// General L¹ symbol. `eval` must be 2π-periodic in θ (or wrap its
    /// argument itself); `rule`, if given, returns the exact Fourier
    /// coefficients.
    pub fn analytic(rows: usize, cols: usize, eval: EvalFn, rule: Option<RuleFn>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SymbolError::EmptyShape);
        }
        Ok(Self {
            rows,
            cols,
            label: String::new(),
            body: Body::Analytic {
                eval,
                rule,
                nodes: DEFAULT_QUADRATURE_NODES,
            },
        })
    }

    /// The scalar symbol θ² on `[-π, π]`, extended periodically, with
    /// coefficients π²/3 at k = 0 and 2(−1)^k/k² otherwise.
    pub fn theta_squared() -> Self {
        let eval: EvalFn = Arc::new(|theta: f64| {
            let x = wrap_angle(theta);
            CMat::from_fn(1, 1, |_, _| Complex64::new(x * x, 0.0))
        });
        let rule: RuleFn = Arc::new(|k: i64| {
            let v = theta_squared_coefficient(k);
            CMat::from_fn(1, 1, |_, _| Complex64::new(v, 0.0))
        });
        Self::analytic(1, 1, eval, Some(rule))
            .expect("1x1 shape")
            .with_label("t^2")
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Node count used by the quadrature fallback (no effect on
    /// trigonometric polynomials or symbols with a coefficient rule).
    pub fn with_quadrature_nodes(mut self, n: usize) -> Self {
        if let Body::Analytic { nodes, .. } = &mut self.body {
            *nodes = n.max(4);
        }
        self
    }

    /// Drops the closed-form rule so coefficients come from quadrature.
    pub fn without_rule(mut self) -> Self {
        if let Body::Analytic { rule, .. } = &mut self.body {
            *rule = None;
        }
        self
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> SymbolKind {
        match self.body {
            Body::Trig(_) => SymbolKind::TrigPolynomial,
            Body::Analytic { .. } => SymbolKind::AnalyticL1,
        }
    }

    /// Stored coefficients of a trigonometric polynomial.
    pub fn coefficients(&self) -> Option<&BTreeMap<i64, CMat>> {
        match &self.body {
            Body::Trig(map) => Some(map),
            Body::Analytic { .. } => None,
        }
    }

    /// Smallest and largest index with a nonzero coefficient.
    pub fn support(&self) -> Option<(i64, i64)> {
        let map = self.coefficients()?;
        Some((*map.keys().next()?, *map.keys().next_back()?))
    }

    pub fn has_coefficient_rule(&self) -> bool {
        match &self.body {
            Body::Trig(_) => true,
            Body::Analytic { rule, .. } => rule.is_some(),
        }
    }

    pub fn evaluate(&self, theta: f64) -> CMat {
        match &self.body {
            Body::Trig(map) => {
                let mut out = zeros(self.rows, self.cols);
                for (&k, c) in map {
                    let phase = unit_phase(k as f64 * theta);
                    for j in 0..self.cols {
                        for i in 0..self.rows {
                            out[(i, j)] += c[(i, j)] * phase;
                        }
                    }
                }
                out
            }
            Body::Analytic { eval, .. } => eval(theta),
        }
    }

    /// The k-th Fourier coefficient `(1/2π) ∫ f(θ) e^{-ikθ} dθ`.
    pub fn fourier_coefficient(&self, k: i64) -> Result<CMat> {
        Ok(self.fourier_coefficients(k, k)?.pop().expect("one coefficient"))
    }

    /// Coefficients for `k = lo..=hi`, in order.
    pub fn fourier_coefficients(&self, lo: i64, hi: i64) -> Result<Vec<CMat>> {
        if hi < lo {
            return Ok(Vec::new());
        }
        match &self.body {
            Body::Trig(map) => Ok((lo..=hi)
                .map(|k| map.get(&k).cloned().unwrap_or_else(|| zeros(self.rows, self.cols)))
                .collect()),
            Body::Analytic {
                rule: Some(rule), ..
            } => Ok((lo..=hi).map(|k| rule(k)).collect()),
            Body::Analytic {
                eval,
                rule: None,
                nodes,
            } => {
                let max_k = lo.unsigned_abs().max(hi.unsigned_abs()) as usize;
                let mut n = *nodes;
                // Keep every requested index well below the Nyquist limit of
                // the coarse (n/2) pass.
                while n / 2 < 4 * (max_k + 1) {
                    n *= 2;
                }
                if n % 2 == 1 {
                    n += 1;
                }
                let samples: Vec<CMat> = (0..n)
                    .map(|j| eval(-PI + 2.0 * PI * j as f64 / n as f64))
                    .collect();
                let mut out = Vec::with_capacity((hi - lo + 1) as usize);
                for k in lo..=hi {
                    let fine = trapezoid(&samples, k, 1, self.rows, self.cols);
                    let coarse = trapezoid(&samples, k, 2, self.rows, self.cols);
                    let discrepancy = max_abs_diff(&fine, &coarse);
                    if discrepancy > QUADRATURE_TOLERANCE {
                        return Err(SymbolError::QuadratureNotConverged {
                            k,
                            discrepancy,
                            tol: QUADRATURE_TOLERANCE,
                        });
                    }
                    out.push(fine);
                }
                Ok(out)
            }
        }
    }

    /// Compares the closed-form rule against trapezoid quadrature of the
    /// evaluator with `nodes` points, for each `k` in `ks`. Succeeds
    /// trivially for trigonometric polynomials and rule-less symbols.
    pub fn check_rule_consistency(&self, ks: &[i64], nodes: usize, tol: f64) -> Result<()> {
        let (eval, rule) = match &self.body {
            Body::Analytic {
                eval,
                rule: Some(rule),
                ..
            } => (eval, rule),
            _ => return Ok(()),
        };
        let samples: Vec<CMat> = (0..nodes)
            .map(|j| eval(-PI + 2.0 * PI * j as f64 / nodes as f64))
            .collect();
        for &k in ks {
            let quad = trapezoid(&samples, k, 1, self.rows, self.cols);
            let discrepancy = max_abs_diff(&quad, &rule(k));
            if discrepancy > tol {
                return Err(SymbolError::QuadratureNotConverged { k, discrepancy, tol });
            }
        }
        Ok(())
    }

    fn eval_fn(&self) -> EvalFn {
        match &self.body {
            Body::Analytic { eval, .. } => eval.clone(),
            Body::Trig(_) => {
                let me = self.clone();
                Arc::new(move |theta| me.evaluate(theta))
            }
        }
    }

    fn rule_fn(&self) -> Option<RuleFn> {
        match &self.body {
            Body::Analytic { rule, .. } => rule.clone(),
            Body::Trig(map) => {
                let map = map.clone();
                let (r, c) = (self.rows, self.cols);
                Some(Arc::new(move |k| map.get(&k).cloned().unwrap_or_else(|| zeros(r, c))))
            }
        }
    }

    fn derived(&self, rows: usize, cols: usize, label: String, body: Body) -> Self {
        let body = match (body, &self.body) {
            (Body::Analytic { eval, rule, .. }, Body::Analytic { nodes, .. }) => Body::Analytic {
                eval,
                rule,
                nodes: *nodes,
            },
            (b, _) => b,
        };
        Self {
            rows,
            cols,
            label,
            body,
        }
    }

    /// `f^R(θ) = f(-θ)`.
    pub fn reverse(&self) -> Self {
        let label = format!("reverse({})", self.label);
        match &self.body {
            Body::Trig(map) => {
                let map = map.iter().map(|(&k, c)| (-k, c.clone())).collect();
                self.derived(self.rows, self.cols, label, Body::Trig(map))
            }
            Body::Analytic { eval, rule, nodes } => {
                let e = eval.clone();
                let eval: EvalFn = Arc::new(move |theta| e(-theta));
                let rule = rule.clone().map(|r| -> RuleFn { Arc::new(move |k| r(-k)) });
                self.derived(
                    self.rows,
                    self.cols,
                    label,
                    Body::Analytic {
                        eval,
                        rule,
                        nodes: *nodes,
                    },
                )
            }
        }
    }

    /// Pointwise conjugate transpose; the result is `cols × rows`.
    pub fn adjoint(&self) -> Self {
        let label = format!("adjoint({})", self.label);
        match &self.body {
            Body::Trig(map) => {
                let map = map.iter().map(|(&k, c)| (-k, adjoint_of(c))).collect();
                self.derived(self.cols, self.rows, label, Body::Trig(map))
            }
            Body::Analytic { eval, rule, nodes } => {
                let e = eval.clone();
                let eval: EvalFn = Arc::new(move |theta| adjoint_of(&e(theta)));
                let rule = rule
                    .clone()
                    .map(|r| -> RuleFn { Arc::new(move |k| adjoint_of(&r(-k))) });
                self.derived(
                    self.cols,
                    self.rows,
                    label,
                    Body::Analytic {
                        eval,
                        rule,
                        nodes: *nodes,
                    },
                )
            }
        }
    }

    /// `θ ↦ f(θ + φ)`; coefficients pick up the phase `e^{ikφ}`.
    pub fn shift(&self, phi: f64) -> Self {
        let label = format!("shift({}, {phi})", self.label);
        match &self.body {
            Body::Trig(map) => {
                let map = map
                    .iter()
                    .map(|(&k, c)| (k, scaled(c, unit_phase(k as f64 * phi))))
                    .collect();
                self.derived(self.rows, self.cols, label, Body::Trig(map))
            }
            Body::Analytic { eval, rule, nodes } => {
                let e = eval.clone();
                let eval: EvalFn = Arc::new(move |theta| e(theta + phi));
                let rule = rule.clone().map(|r| -> RuleFn {
                    Arc::new(move |k| scaled(&r(k), unit_phase(k as f64 * phi)))
                });
                self.derived(
                    self.rows,
                    self.cols,
                    label,
                    Body::Analytic {
                        eval,
                        rule,
                        nodes: *nodes,
                    },
                )
            }
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let label = format!("{factor}*{}", self.label);
        match &self.body {
            Body::Trig(map) => {
                let map = map
                    .iter()
                    .map(|(&k, c)| (k, scaled(c, factor)))
                    .filter(|(_, c)| !is_zero(c))
                    .collect();
                self.derived(self.rows, self.cols, label, Body::Trig(map))
            }
            Body::Analytic { eval, rule, nodes } => {
                let e = eval.clone();
                let eval: EvalFn = Arc::new(move |theta| scaled(&e(theta), factor));
                let rule = rule
                    .clone()
                    .map(|r| -> RuleFn { Arc::new(move |k| scaled(&r(k), factor)) });
                self.derived(
                    self.rows,
                    self.cols,
                    label,
                    Body::Analytic {
                        eval,
                        rule,
                        nodes: *nodes,
                    },
                )
            }
        }
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        if self.shape() != other.shape() {
            return Err(SymbolError::ShapeMismatch {
                op: "sum",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let label = format!("({} + {})", self.label, other.label);
        if let (Body::Trig(a), Body::Trig(b)) = (&self.body, &other.body) {
            let merged = a.iter().chain(b.iter()).map(|(&k, c)| (k, c.clone()));
            return Ok(Self::trig(self.rows, self.cols, merged)?.with_label(label));
        }
        let (ea, eb) = (self.eval_fn(), other.eval_fn());
        let eval: EvalFn = Arc::new(move |theta| {
            let mut m = ea(theta);
            add_into(&mut m, &eb(theta));
            m
        });
        let rule = match (self.rule_fn(), other.rule_fn()) {
            (Some(ra), Some(rb)) => Some(Arc::new(move |k| {
                let mut m = ra(k);
                add_into(&mut m, &rb(k));
                m
            }) as RuleFn),
            _ => None,
        };
        let nodes = self.nodes().max(other.nodes());
        Ok(Self::analytic(self.rows, self.cols, eval, rule)?
            .with_quadrature_nodes(nodes)
            .with_label(label))
    }

    /// Pointwise product `f(θ)·g(θ)`; coefficients are the Cauchy
    /// convolution of the two coefficient sequences.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(SymbolError::ShapeMismatch {
                op: "product",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let (rows, cols) = (self.rows, other.cols);
        let label = format!("{}*{}", self.label, other.label);
        match (&self.body, &other.body) {
            (Body::Trig(a), Body::Trig(b)) => {
                let mut terms = Vec::with_capacity(a.len() * b.len());
                for (&ka, ca) in a {
                    for (&kb, cb) in b {
                        terms.push((ka + kb, mat_mul(ca, cb)));
                    }
                }
                Ok(Self::trig(rows, cols, terms)?.with_label(label))
            }
            _ => {
                let (ea, eb) = (self.eval_fn(), other.eval_fn());
                let eval: EvalFn = Arc::new(move |theta| mat_mul(&ea(theta), &eb(theta)));
                let rule: Option<RuleFn> = match (&self.body, &other.body) {
                    (Body::Trig(a), _) => other.rule_fn().map(|rb| -> RuleFn {
                        let a = a.clone();
                        Arc::new(move |k| {
                            let mut acc = zeros(rows, cols);
                            for (&ka, ca) in &a {
                                add_into(&mut acc, &mat_mul(ca, &rb(k - ka)));
                            }
                            acc
                        })
                    }),
                    (_, Body::Trig(b)) => self.rule_fn().map(|ra| -> RuleFn {
                        let b = b.clone();
                        Arc::new(move |k| {
                            let mut acc = zeros(rows, cols);
                            for (&kb, cb) in &b {
                                add_into(&mut acc, &mat_mul(&ra(k - kb), cb));
                            }
                            acc
                        })
                    }),
                    _ => None,
                };
                let nodes = self.nodes().max(other.nodes());
                Ok(Self::analytic(rows, cols, eval, rule)?
                    .with_quadrature_nodes(nodes)
                    .with_label(label))
            }
        }
    }

    fn nodes(&self) -> usize {
        match &self.body {
            Body::Analytic { nodes, .. } => *nodes,
            Body::Trig(_) => DEFAULT_QUADRATURE_NODES,
        }
    }

    /// Places `blocks` (row offset, column offset, symbol) into a zero
    /// `rows × cols` symbol. Overlapping blocks are summed.
    pub fn from_blocks(rows: usize, cols: usize, blocks: &[(usize, usize, &MatrixSymbol)]) -> Result<Self> {
        for (r0, c0, b) in blocks {
            if r0 + b.rows > rows || c0 + b.cols > cols {
                return Err(SymbolError::ShapeMismatch {
                    op: "from_blocks",
                    left: (rows, cols),
                    right: (r0 + b.rows, c0 + b.cols),
                });
            }
        }
        let place = |target: &mut CMat, r0: usize, c0: usize, m: &CMat| {
            for j in 0..m.ncols() {
                for i in 0..m.nrows() {
                    target[(r0 + i, c0 + j)] += m[(i, j)];
                }
            }
        };
        if blocks.iter().all(|(_, _, b)| b.kind() == SymbolKind::TrigPolynomial) {
            let mut terms = Vec::new();
            for (r0, c0, b) in blocks {
                for (&k, c) in b.coefficients().expect("trig") {
                    let mut m = zeros(rows, cols);
                    place(&mut m, *r0, *c0, c);
                    terms.push((k, m));
                }
            }
            return Self::trig(rows, cols, terms);
        }
        let evals: Vec<(usize, usize, EvalFn)> = blocks.iter().map(|(r, c, b)| (*r, *c, b.eval_fn())).collect();
        let eval: EvalFn = Arc::new(move |theta| {
            let mut m = zeros(rows, cols);
            for (r0, c0, e) in &evals {
                place(&mut m, *r0, *c0, &e(theta));
            }
            m
        });
        let rules: Option<Vec<(usize, usize, RuleFn)>> = blocks
            .iter()
            .map(|(r, c, b)| b.rule_fn().map(|f| (*r, *c, f)))
            .collect();
        let rule = rules.map(|rules| -> RuleFn {
            Arc::new(move |k| {
                let mut m = zeros(rows, cols);
                for (r0, c0, f) in &rules {
                    place(&mut m, *r0, *c0, &f(k));
                }
                m
            })
        });
        let nodes = blocks.iter().map(|(_, _, b)| b.nodes()).max().unwrap_or(DEFAULT_QUADRATURE_NODES);
        Ok(Self::analytic(rows, cols, eval, rule)?.with_quadrature_nodes(nodes))
    }

    /// Whether `f(θ) = f(θ)*` for all θ, checked on the stored
    /// coefficients (trigonometric polynomials) or on a 1024-point grid.
    pub fn is_hermitian_valued(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        match &self.body {
            Body::Trig(map) => {
                let zero = zeros(self.rows, self.cols);
                map.iter().all(|(&k, c)| {
                    let mirror = map.get(&-k).unwrap_or(&zero);
                    max_abs_diff(mirror, &adjoint_of(c)) <= tol
                })
            }
            Body::Analytic { eval, .. } => (0..HERMITIAN_SAMPLE_POINTS).all(|j| {
                let theta = -PI + 2.0 * PI * (j as f64 + 0.5) / HERMITIAN_SAMPLE_POINTS as f64;
                let m = eval(theta);
                max_abs_diff(&m, &adjoint_of(&m)) <= tol
            }),
        }
    }

    /// Hermitian check with the default tolerance for this symbol's kind.
    pub fn is_hermitian(&self) -> bool {
        let tol = match self.kind() {
            SymbolKind::TrigPolynomial => HERMITIAN_TOL_TRIG,
            SymbolKind::AnalyticL1 => HERMITIAN_TOL_ANALYTIC,
        };
        self.is_hermitian_valued(tol)
    }
}

/// `(1/2π)∫_{-π}^{π} θ² e^{-ikθ} dθ`.
pub fn theta_squared_coefficient(k: i64) -> f64 {
    if k == 0 {
        PI * PI / 3.0
    } else {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        2.0 * sign / (k as f64 * k as f64)
    }
}

/// Periodic trapezoid rule on `samples` taken at `θ_j = -π + 2πj/n`,
/// using every `stride`-th node.
fn trapezoid(samples: &[CMat], k: i64, stride: usize, rows: usize, cols: usize) -> CMat {
    let n = samples.len();
    let used = n / stride;
    let mut acc = zeros(rows, cols);
    for j in (0..n).step_by(stride) {
        let theta = -PI + 2.0 * PI * j as f64 / n as f64;
        let w = Complex64::cis(-(k as f64) * theta);
        let s = &samples[j];
        for c in 0..cols {
            for r in 0..rows {
                acc[(r, c)] += s[(r, c)] * w;
            }
        }
    }
    scaled(&acc, Complex64::new(1.0 / used as f64, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn scalar(m: &CMat) -> Complex64 {
        m[(0, 0)]
    }

    fn one_minus_exp_minus() -> MatrixSymbol {
        MatrixSymbol::scalar_trig(&[(0, c(1.0)), (-1, c(-1.0))])
    }

    fn one_minus_exp_plus() -> MatrixSymbol {
        MatrixSymbol::scalar_trig(&[(0, c(1.0)), (1, c(-1.0))])
    }

    fn laplacian() -> MatrixSymbol {
        MatrixSymbol::scalar_trig(&[(0, c(2.0)), (1, c(-1.0)), (-1, c(-1.0))])
    }

    #[test]
    fn evaluate_examples() {
        let f = one_minus_exp_minus();
        assert_abs_diff_eq!(scalar(&f.evaluate(0.0)).norm(), 0.0, epsilon = 1e-15);
        assert_eq!(scalar(&f.evaluate(PI)), c(2.0));
        let g = MatrixSymbol::scalar_trig(&[
            (0, c(2.0)),
            (1, c(-1.0)),
            (-1, c(-1.0)),
            (2, c(-3.0)),
            (-2, c(-3.0)),
        ]);
        assert_eq!(scalar(&g.evaluate(0.0)), c(-6.0));
    }

    #[test]
    fn coefficients_of_laplacian() {
        let f = laplacian();
        assert_eq!(scalar(&f.fourier_coefficient(0).unwrap()), c(2.0));
        assert_eq!(scalar(&f.fourier_coefficient(1).unwrap()), c(-1.0));
        assert_eq!(scalar(&f.fourier_coefficient(-1).unwrap()), c(-1.0));
        assert_eq!(scalar(&f.fourier_coefficient(2).unwrap()), c(0.0));
    }

    #[test]
    fn theta_squared_rule_matches_quadrature() {
        // independent oracle: fine trapezoid on the evaluator
        let f = MatrixSymbol::theta_squared();
        f.check_rule_consistency(&[0, 1, 2, 3, -5, 17], 1 << 16, 1e-6).unwrap();
        assert_abs_diff_eq!(scalar(&f.fourier_coefficient(0).unwrap()).re, PI * PI / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scalar(&f.fourier_coefficient(1).unwrap()).re, -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scalar(&f.fourier_coefficient(2).unwrap()).re, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn theta_squared_quadrature_fallback() {
        let f = MatrixSymbol::theta_squared().without_rule();
        for (k, expected) in [(0, PI * PI / 3.0), (1, -2.0), (2, 0.5), (-3, -2.0 / 9.0)] {
            let got = scalar(&f.fourier_coefficient(k).unwrap());
            assert_abs_diff_eq!(got.re, expected, epsilon = 1e-6);
            assert_abs_diff_eq!(got.im, 0.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn quadrature_self_check_rejects_rough_symbols() {
        // a jump at θ = 0 converges only like 1/N
        let eval: EvalFn = Arc::new(|theta: f64| {
            let v = if wrap_angle(theta) >= 0.0 { 1.0 } else { 0.0 };
            CMat::from_fn(1, 1, |_, _| Complex64::new(v, 0.0))
        });
        let f = MatrixSymbol::analytic(1, 1, eval, None).unwrap().with_quadrature_nodes(64);
        assert!(matches!(
            f.fourier_coefficient(1),
            Err(SymbolError::QuadratureNotConverged { .. })
        ));
    }

    #[test]
    fn reverse_and_adjoint_examples() {
        let f = one_minus_exp_plus();
        assert_eq!(f.reverse().coefficients(), one_minus_exp_minus().coefficients());
        assert_eq!(f.adjoint().coefficients(), one_minus_exp_minus().coefficients());
        assert_eq!(laplacian().reverse().coefficients(), laplacian().coefficients());
        assert_eq!(laplacian().adjoint().coefficients(), laplacian().coefficients());

        let row = MatrixSymbol::trig(1, 2, [(1, CMat::from_fn(1, 2, |_, j| c(j as f64 + 1.0)))]).unwrap();
        assert_eq!(row.adjoint().shape(), (2, 1));
    }

    #[test]
    fn shift_examples() {
        let f = one_minus_exp_plus();
        assert_eq!(f.shift(0.0).coefficients(), f.coefficients());
        let expected = MatrixSymbol::scalar_trig(&[(0, c(1.0)), (1, c(1.0))]);
        assert_eq!(f.shift(PI).coefficients(), expected.coefficients());
    }

    #[test]
    fn sum_and_product_identities() {
        let f = laplacian();
        let zero = MatrixSymbol::zero(1, 1).unwrap();
        assert_eq!(f.sum(&zero).unwrap().coefficients(), f.coefficients());
        let id = MatrixSymbol::identity(1).unwrap();
        assert_eq!(f.product(&id).unwrap().coefficients(), f.coefficients());
        let wide = MatrixSymbol::zero(1, 2).unwrap();
        assert!(matches!(f.sum(&wide), Err(SymbolError::ShapeMismatch { .. })));
        assert!(matches!(wide.product(&f), Err(SymbolError::ShapeMismatch { .. })));
    }

    #[test]
    fn mixed_product_keeps_a_rule() {
        let t2 = MatrixSymbol::theta_squared();
        let p = one_minus_exp_plus().product(&t2).unwrap();
        assert!(p.has_coefficient_rule());
        p.check_rule_consistency(&[-3, 0, 1, 4], 1 << 16, 1e-6).unwrap();
        let theta = 0.7;
        let direct = scalar(&one_minus_exp_plus().evaluate(theta)) * theta * theta;
        assert_abs_diff_eq!((scalar(&p.evaluate(theta)) - direct).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn hermitian_checks() {
        assert!(laplacian().is_hermitian());
        assert!(!one_minus_exp_minus().is_hermitian());
        assert!(MatrixSymbol::theta_squared().is_hermitian());
        assert!(!MatrixSymbol::zero(1, 2).unwrap().is_hermitian());
    }

    #[test]
    fn wrap_angle_range() {
        for x in [-10.0, -PI, 0.0, PI, 3.0 * PI, 7.5] {
            let w = wrap_angle(x);
            assert!((-PI..PI).contains(&w), "{x} -> {w}");
        }
    }
}
