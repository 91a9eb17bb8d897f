//! Declarative experiment configuration (TOML).
//!
//! ```toml
//! name = "example"
//! nu = 2
//! eta = [20, 40, 80]
//! tasks = ["eig-compare", "sv-compare"]
//! blocks = [["f11", "1 - exp(-i*t)"], ["f21", "f22"]]
//! sizes = [{ scale = "1" }, { scale = "2", offset = 4 }]
//!
//! [symbols.f11]
//! expr = "2 - 2*cos(t)"
//! ```
//!
//! Block entries name a symbol from `[symbols]` or are inline scalar
//! expressions. A symbol definition uses exactly one of `expr`, `grid`,
//! `coefficients`, `sum`, `product`, `adjoint`, `reverse`, `shift`, and
//! may add a `scale` factor.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Deserialize;
use thiserror::Error;

use toepblock::assembly::{BlockStructureSpec, SizeLaw};
use toepblock::spectra::{GridPolicy, SpectrumKind, TestFunction, DEFAULT_HERMITIAN_TOL};
use toepblock::symbol::{build_distribution_symbol, MatrixSymbol, SymbolGrid};
use toepblock::symparse::{parse_constant, parse_matrix_symbol, parse_scalar, MatrixSymbolSpec, ParseError};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config syntax: {0}")]
    Syntax(String),
    #[error("{path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{path}: {message}")]
    Validation { path: String, message: String },
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Task {
    EigCompare,
    SvCompare,
    OutlierTable,
    PermIdentity,
    ZeroDist,
    WeylGaps,
    Rearrangement,
}

impl Task {
    pub const ALL: [Task; 7] = [
        Task::EigCompare,
        Task::SvCompare,
        Task::OutlierTable,
        Task::PermIdentity,
        Task::ZeroDist,
        Task::WeylGaps,
        Task::Rearrangement,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Task::EigCompare => "eig-compare",
            Task::SvCompare => "sv-compare",
            Task::OutlierTable => "outlier-table",
            Task::PermIdentity => "perm-identity",
            Task::ZeroDist => "zero-dist",
            Task::WeylGaps => "weyl-gaps",
            Task::Rearrangement => "rearrangement",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown task '{s}'"))
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(v) => v.to_string(),
            Scalar::Float(v) => format!("{v:?}"),
            Scalar::Text(s) => s.clone(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCoefficient {
    k: i64,
    m: Vec<Vec<Scalar>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShift {
    of: String,
    phi: Scalar,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymbol {
    expr: Option<String>,
    grid: Option<Vec<Vec<Scalar>>>,
    coefficients: Option<Vec<RawCoefficient>>,
    sum: Option<Vec<String>>,
    product: Option<Vec<String>>,
    adjoint: Option<String>,
    reverse: Option<String>,
    shift: Option<RawShift>,
    scale: Option<Scalar>,
    label: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSize {
    #[serde(default = "one")]
    scale: String,
    #[serde(default)]
    offset: i64,
    #[serde(default)]
    sqrt: bool,
}

fn one() -> String {
    "1".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    count: usize,
    #[serde(flatten)]
    size: RawSize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReference {
    policy: Option<String>,
    #[serde(default)]
    grids: Vec<RawGrid>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "type", rename_all = "kebab-case")]
enum RawTestFunction {
    Hat { lo: f64, peak: f64, hi: f64 },
    TruncatedPolynomial { lo: f64, hi: f64, coefficients: Vec<f64> },
    Zero,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParameters {
    #[serde(default = "default_h")]
    h: f64,
    #[serde(default = "default_h")]
    eps: f64,
    #[serde(default = "default_tol")]
    hermitian_tol: f64,
    #[serde(default = "default_quadrature")]
    quadrature: usize,
    #[serde(default = "default_resolution")]
    resolution: usize,
    spectrum: Option<String>,
    #[serde(default)]
    weyl: Vec<RawTestFunction>,
}

impl Default for RawParameters {
    fn default() -> Self {
        Self {
            h: default_h(),
            eps: default_h(),
            hermitian_tol: default_tol(),
            quadrature: default_quadrature(),
            resolution: default_resolution(),
            spectrum: None,
            weyl: Vec::new(),
        }
    }
}

fn default_h() -> f64 {
    0.1
}
fn default_tol() -> f64 {
    DEFAULT_HERMITIAN_TOL
}
fn default_quadrature() -> usize {
    4096
}
fn default_resolution() -> usize {
    1024
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    name: String,
    #[serde(default)]
    description: String,
    nu: usize,
    eta: Vec<usize>,
    tasks: Vec<String>,
    blocks: Vec<Vec<String>>,
    sizes: Vec<RawSize>,
    #[serde(default)]
    symbols: BTreeMap<String, RawSymbol>,
    #[serde(default)]
    parameters: RawParameters,
    #[serde(default)]
    reference: RawReference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    EqualSplit,
    PerCurve,
    Leading,
}

impl PolicyKind {
    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::EqualSplit => "equal-split",
            PolicyKind::PerCurve => "per-curve",
            PolicyKind::Leading => "leading",
        }
    }
}

/// Reference grid layout as a function of η: `count` consecutive curves
/// share the grid `θ_{law(η)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePolicy {
    pub kind: PolicyKind,
    pub grids: Vec<(usize, SizeLaw)>,
}

impl ReferencePolicy {
    pub fn at(&self, eta: usize) -> Result<GridPolicy, String> {
        let mut sizes = Vec::new();
        for (count, law) in &self.grids {
            let n = law.size(eta)?;
            sizes.extend(std::iter::repeat_n(n, *count));
        }
        Ok(match self.kind {
            PolicyKind::EqualSplit => GridPolicy::EqualSplit,
            PolicyKind::PerCurve => GridPolicy::PerCurve(sizes),
            PolicyKind::Leading => GridPolicy::Leading(sizes),
        })
    }

    pub fn describe(&self) -> String {
        if self.grids.is_empty() {
            return self.kind.name().to_string();
        }
        let parts: Vec<String> = self
            .grids
            .iter()
            .map(|(c, l)| {
                let mut s = format!("{c}x theta_({}/{} eta", l.scale.numer(), l.scale.denom());
                if l.offset != 0 {
                    s.push_str(&format!(" {:+}", l.offset));
                }
                if l.sqrt {
                    s.push_str(" + ceil(sqrt(eta))");
                }
                s.push(')');
                s
            })
            .collect();
        format!("{}: {}", self.kind.name(), parts.join(", "))
    }
}

#[derive(Debug, Clone)]
pub struct Parameters {
    pub h: f64,
    pub eps: f64,
    pub hermitian_tol: f64,
    pub quadrature: usize,
    pub resolution: usize,
    /// Spectrum used by weyl-gaps and rearrangement.
    pub spectrum: SpectrumKind,
    pub weyl: Vec<TestFunction>,
}

/// A validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub description: String,
    pub source: String,
    pub structure: BlockStructureSpec,
    pub distribution_symbol: MatrixSymbol,
    pub eta: Vec<usize>,
    pub tasks: Vec<Task>,
    pub parameters: Parameters,
    pub reference: ReferencePolicy,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

fn parse_rational(path: &str, s: &str) -> Result<Rational64, ConfigError> {
    let s = s.trim();
    let parsed = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<i64>().ok().zip(b.trim().parse::<i64>().ok()),
        None => s.parse::<i64>().ok().map(|a| (a, 1)),
    };
    match parsed {
        Some((_, 0)) | None => Err(invalid(path, format!("'{s}' is not a rational number like 1/2"))),
        Some((a, b)) => Ok(Rational64::new(a, b)),
    }
}

fn size_law(path: &str, raw: &RawSize) -> Result<SizeLaw, ConfigError> {
    let scale = parse_rational(&format!("{path}.scale"), &raw.scale)?;
    Ok(SizeLaw::new(scale, raw.offset, raw.sqrt))
}

fn constant(path: &str, s: &Scalar) -> Result<Complex64, ConfigError> {
    parse_constant(&s.text()).map_err(|source| ConfigError::Parse {
        path: path.to_string(),
        source,
    })
}

struct SymbolResolver<'a> {
    raw: &'a BTreeMap<String, RawSymbol>,
    done: BTreeMap<String, MatrixSymbol>,
    active: BTreeSet<String>,
}

impl SymbolResolver<'_> {
    fn get(&mut self, name: &str, path: &str) -> Result<MatrixSymbol, ConfigError> {
        if let Some(s) = self.done.get(name) {
            return Ok(s.clone());
        }
        let raw = self
            .raw
            .get(name)
            .ok_or_else(|| invalid(path, format!("unknown symbol '{name}'")))?;
        if !self.active.insert(name.to_string()) {
            return Err(invalid(path, format!("symbol '{name}' is defined in terms of itself")));
        }
        let built = self.build(name, raw)?;
        self.active.remove(name);
        self.done.insert(name.to_string(), built.clone());
        Ok(built)
    }

    fn build(&mut self, name: &str, raw: &RawSymbol) -> Result<MatrixSymbol, ConfigError> {
        let path = format!("symbols.{name}");
        let defined = [
            raw.expr.is_some(),
            raw.grid.is_some(),
            raw.coefficients.is_some(),
            raw.sum.is_some(),
            raw.product.is_some(),
            raw.adjoint.is_some(),
            raw.reverse.is_some(),
            raw.shift.is_some(),
        ]
        .iter()
        .filter(|&&b| b)
        .count();
        if defined != 1 {
            return Err(invalid(
                &path,
                "exactly one of expr, grid, coefficients, sum, product, adjoint, reverse, shift is required",
            ));
        }
        let parse_err = |field: &str| {
            let p = format!("{path}.{field}");
            move |source| ConfigError::Parse { path: p, source }
        };
        let sym_err = |field: &str| {
            let p = format!("{path}.{field}");
            move |e: toepblock::symbol::SymbolError| invalid(p, e.to_string())
        };
        let mut sym = if let Some(e) = &raw.expr {
            parse_scalar(e).map_err(parse_err("expr"))?
        } else if let Some(g) = &raw.grid {
            let rows = g.iter().map(|r| r.iter().map(Scalar::text).collect()).collect();
            parse_matrix_symbol(&MatrixSymbolSpec::Grid(rows)).map_err(parse_err("grid"))?
        } else if let Some(c) = &raw.coefficients {
            let list = c
                .iter()
                .map(|rc| (rc.k, rc.m.iter().map(|r| r.iter().map(Scalar::text).collect()).collect()))
                .collect();
            parse_matrix_symbol(&MatrixSymbolSpec::Coefficients(list)).map_err(parse_err("coefficients"))?
        } else if let Some(names) = raw.sum.as_ref().or(raw.product.as_ref()) {
            let field = if raw.sum.is_some() { "sum" } else { "product" };
            if names.len() < 2 {
                return Err(invalid(format!("{path}.{field}"), "needs at least two operands"));
            }
            let mut acc = self.get(&names[0], &format!("{path}.{field}[0]"))?;
            for (i, n) in names.iter().enumerate().skip(1) {
                let next = self.get(n, &format!("{path}.{field}[{i}]"))?;
                acc = if field == "sum" { acc.sum(&next) } else { acc.product(&next) }.map_err(sym_err(field))?;
            }
            acc
        } else if let Some(of) = &raw.adjoint {
            self.get(of, &format!("{path}.adjoint"))?.adjoint()
        } else if let Some(of) = &raw.reverse {
            self.get(of, &format!("{path}.reverse"))?.reverse()
        } else {
            let shift = raw.shift.as_ref().expect("one field is set");
            let phi = constant(&format!("{path}.shift.phi"), &shift.phi)?;
            if phi.im != 0.0 {
                return Err(invalid(format!("{path}.shift.phi"), "shift must be real"));
            }
            self.get(&shift.of, &format!("{path}.shift.of"))?.shift(phi.re)
        };
        if let Some(s) = &raw.scale {
            sym = sym.scale(constant(&format!("{path}.scale"), s)?);
        }
        Ok(sym.with_label(raw.label.clone().unwrap_or_else(|| name.to_string())))
    }
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    if raw.nu < 2 {
        return Err(invalid("nu", "the case nu=1 is not of interest"));
    }
    if raw.blocks.len() != raw.nu {
        return Err(invalid("blocks", format!("expected {} rows, found {}", raw.nu, raw.blocks.len())));
    }
    if raw.sizes.len() != raw.nu {
        return Err(invalid("sizes", format!("expected {} size laws, found {}", raw.nu, raw.sizes.len())));
    }
    if raw.tasks.is_empty() {
        return Err(invalid("tasks", "at least one task is required"));
    }
    if raw.eta.is_empty() {
        return Err(invalid("eta", "at least one eta is required"));
    }
    let mut tasks = Vec::new();
    for (i, t) in raw.tasks.iter().enumerate() {
        let task = t.parse::<Task>().map_err(|m| invalid(format!("tasks[{i}]"), m))?;
        if !tasks.contains(&task) {
            tasks.push(task);
        }
    }

    let mut resolver = SymbolResolver {
        raw: &raw.symbols,
        done: BTreeMap::new(),
        active: BTreeSet::new(),
    };
    for name in raw.symbols.keys() {
        resolver.get(name, &format!("symbols.{name}"))?;
    }
    let mut grid_rows = Vec::with_capacity(raw.nu);
    for (i, row) in raw.blocks.iter().enumerate() {
        if row.len() != raw.nu {
            return Err(invalid(format!("blocks[{i}]"), format!("expected {} entries, found {}", raw.nu, row.len())));
        }
        let mut out = Vec::with_capacity(raw.nu);
        for (j, entry) in row.iter().enumerate() {
            let path = format!("blocks[{i}][{j}]");
            let sym = if raw.symbols.contains_key(entry.trim()) {
                resolver.get(entry.trim(), &path)?
            } else {
                parse_scalar(entry).map_err(|source| ConfigError::Parse { path, source })?
            };
            out.push(sym);
        }
        grid_rows.push(out);
    }
    let grid = SymbolGrid::new(grid_rows).map_err(|e| invalid("blocks", e.to_string()))?;

    let laws = raw
        .sizes
        .iter()
        .enumerate()
        .map(|(i, s)| size_law(&format!("sizes[{i}]"), s))
        .collect::<Result<Vec<_>, _>>()?;
    let structure = BlockStructureSpec::new(grid, laws).map_err(|e| invalid("sizes", e.to_string()))?;
    for (i, &eta) in raw.eta.iter().enumerate() {
        structure.sizes(eta).map_err(|e| invalid(format!("eta[{i}]"), e.to_string()))?;
    }
    let distribution_symbol =
        build_distribution_symbol(structure.symbols(), structure.ratios()).map_err(|e| invalid("sizes", e.to_string()))?;

    let p = raw.parameters;
    if p.h.is_nan() || p.h <= 0.0 {
        return Err(invalid("parameters.h", "must be positive"));
    }
    if p.eps.is_nan() || p.eps <= 0.0 {
        return Err(invalid("parameters.eps", "must be positive"));
    }
    if p.quadrature == 0 || p.resolution == 0 {
        return Err(invalid("parameters", "quadrature and resolution must be positive"));
    }
    let hermitian = structure.symbols().is_hermitian_structure(p.hermitian_tol);
    let spectrum = match p.spectrum.as_deref() {
        None => {
            if hermitian {
                SpectrumKind::Eig
            } else {
                SpectrumKind::Sv
            }
        }
        Some("eig") => SpectrumKind::Eig,
        Some("sv") => SpectrumKind::Sv,
        Some(other) => return Err(invalid("parameters.spectrum", format!("expected 'eig' or 'sv', found '{other}'"))),
    };
    let needs_eig = tasks.contains(&Task::EigCompare)
        || (spectrum == SpectrumKind::Eig && (tasks.contains(&Task::WeylGaps) || tasks.contains(&Task::Rearrangement)));
    if needs_eig && !hermitian {
        return Err(invalid(
            "tasks",
            "eigenvalue tasks need Hermitian A_n (s = t, Hermitian diagonal symbols, f_kj = f_jk*); use sv-compare",
        ));
    }
    let weyl = p
        .weyl
        .into_iter()
        .map(|w| match w {
            RawTestFunction::Hat { lo, peak, hi } => TestFunction::Hat { lo, peak, hi },
            RawTestFunction::TruncatedPolynomial { lo, hi, coefficients } => {
                TestFunction::TruncatedPolynomial { lo, hi, coefficients }
            }
            RawTestFunction::Zero => TestFunction::Zero,
        })
        .collect();
    let parameters = Parameters {
        h: p.h,
        eps: p.eps,
        hermitian_tol: p.hermitian_tol,
        quadrature: p.quadrature,
        resolution: p.resolution,
        spectrum,
        weyl,
    };

    let kind = match raw.reference.policy.as_deref().unwrap_or("equal-split") {
        "equal-split" => PolicyKind::EqualSplit,
        "per-curve" => PolicyKind::PerCurve,
        "leading" => PolicyKind::Leading,
        other => return Err(invalid("reference.policy", format!("unknown policy '{other}'"))),
    };
    let grids = raw
        .reference
        .grids
        .iter()
        .enumerate()
        .map(|(i, g)| Ok((g.count, size_law(&format!("reference.grids[{i}]"), &g.size)?)))
        .collect::<Result<Vec<_>, ConfigError>>()?;
    if kind != PolicyKind::EqualSplit && grids.is_empty() {
        return Err(invalid("reference.grids", format!("policy '{}' needs grids", kind.name())));
    }
    let reference = ReferencePolicy { kind, grids };
    for (i, &eta) in raw.eta.iter().enumerate() {
        reference.at(eta).map_err(|m| invalid(format!("reference.grids (eta[{i}] = {eta})"), m))?;
    }

    Ok(ExperimentConfig {
        name: raw.name,
        description: raw.description,
        source: text.to_string(),
        structure,
        distribution_symbol,
        eta: raw.eta,
        tasks,
        parameters,
        reference,
    })
}

impl ExperimentConfig {
    /// Same experiment on a different η sweep; sizes are revalidated.
    pub fn with_eta(mut self, eta: Vec<usize>) -> Result<Self, ConfigError> {
        for (i, &e) in eta.iter().enumerate() {
            self.structure.sizes(e).map_err(|err| invalid(format!("eta[{i}]"), err.to_string()))?;
            self.reference.at(e).map_err(|m| invalid(format!("eta[{i}]"), m))?;
        }
        self.eta = eta;
        Ok(self)
    }

    pub fn with_tasks(mut self, tasks: Vec<Task>) -> Self {
        self.tasks = tasks;
        self
    }
}
