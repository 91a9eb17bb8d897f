//! Sweeps η for each task and writes value files plus a manifest.
//!
//! Layout of an output directory:
//!
//! ```text
//! manifest.json
//! eta20/eig-compare.csv     index,x,matrix,symbol,curve,out
//! eta20/eig-compare.json    distribution summary
//! eta20/rearrangement.csv   index,x,matrix,phi
//! eta20/<task>.json         per-task summary
//! outlier-table.csv         eta,sizes,d_n,reference_len,count,ratio
//! zero-dist.csv             eta,d_n,eps,tilde,hat
//! perm-identity.csv         eta,sizes,route,block_count,max_deviation
//! weyl-gaps.csv             eta,test_function,gap
//! ```
//!
//! Value files depend only on the config, never on timing or worker count.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use toepblock::spectra::{DistributionReport, SpectrumKind};

use crate::config::{ExperimentConfig, Task};
use crate::tasks::{self, TaskError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot write {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot build worker pool: {0}")]
    Pool(String),
    #[error("invalid manifest {path}: {message}")]
    Manifest { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub eta: usize,
    pub task: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Paths relative to the manifest directory.
    pub artifacts: Vec<String>,
    pub seconds: f64,
    #[serde(default)]
    pub summary: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policies {
    pub h: f64,
    pub eps: f64,
    pub hermitian_tol: f64,
    pub quadrature: usize,
    pub resolution: usize,
    pub spectrum: String,
    pub reference_grid: String,
    pub interior_trim: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config_name: String,
    pub config_sha256: String,
    pub policies: Policies,
    pub eta: Vec<usize>,
    pub tasks: Vec<String>,
    pub entries: Vec<ManifestEntry>,
    /// Aggregated tables across η.
    pub tables: Vec<String>,
    pub partial: bool,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Io {
            path: path.display().to_string(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| RunError::Manifest {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }

    pub fn failures(&self) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(|e| e.status == Status::Failed)
    }
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.source.as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_file(root: &Path, rel: &str, contents: &str) -> Result<(), RunError> {
    let path = root.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| RunError::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    fs::write(&path, contents).map_err(|source| RunError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn sizes_field(sizes: &[usize]) -> String {
    sizes.iter().map(usize::to_string).collect::<Vec<_>>().join(";")
}

/// Result of one (η, task) pair before it is written out.
struct TaskOutput {
    files: Vec<(String, String)>,
    summary: Value,
    rows: Vec<String>,
}

/// `(task, outcome, seconds)`.
type TaskRun = (Task, Result<TaskOutput, TaskError>, f64);

fn compare_output(cfg: &ExperimentConfig, eta: usize, task: Task, kind: SpectrumKind) -> Result<TaskOutput, TaskError> {
    let o = tasks::compare(cfg, eta, kind)?;
    let mut csv = String::from("index,x,matrix,symbol,curve,out\n");
    let len = o.matrix.len();
    for i in 0..len {
        let _ = writeln!(
            csv,
            "{i},{},{},{},{},{}",
            (i as f64 + 0.5) / len as f64,
            o.matrix.values()[i],
            o.reference.values()[i],
            o.reference.tags()[i],
            o.comparison.out[i]
        );
    }
    let report = DistributionReport::from_comparison(kind, o.sizes.clone(), o.policy.describe(), &o.comparison);
    let dir = format!("eta{eta}");
    let summary = json!({
        "shape": [o.shape.0, o.shape.1],
        "curves": o.curve_count(),
        "median": o.comparison.median(),
        "sup": o.comparison.sup,
        "interior_sup": o.comparison.interior_sup,
    });
    Ok(TaskOutput {
        files: vec![
            (format!("{dir}/{task}.csv"), csv),
            (format!("{dir}/{task}.json"), to_json(&report)),
        ],
        summary,
        rows: Vec::new(),
    })
}

fn run_task(cfg: &ExperimentConfig, eta: usize, task: Task) -> Result<TaskOutput, TaskError> {
    let dir = format!("eta{eta}");
    match task {
        Task::EigCompare => compare_output(cfg, eta, task, SpectrumKind::Eig),
        Task::SvCompare => compare_output(cfg, eta, task, SpectrumKind::Sv),
        Task::OutlierTable => {
            let row = tasks::outlier(cfg, eta)?;
            let r = &row.report;
            Ok(TaskOutput {
                files: vec![(format!("{dir}/{task}.json"), to_json(&row))],
                summary: json!({ "ratio": r.ratio, "count": r.count, "d_n": r.d_n }),
                rows: vec![format!(
                    "{eta},{},{},{},{},{}",
                    sizes_field(&row.sizes),
                    r.d_n,
                    r.reference_len,
                    r.count,
                    r.ratio
                )],
            })
        }
        Task::PermIdentity => {
            let o = tasks::perm_identity(cfg, eta)?;
            Ok(TaskOutput {
                files: vec![(format!("{dir}/{task}.json"), to_json(&o))],
                summary: json!({ "route": o.route, "max_deviation": o.max_deviation }),
                rows: vec![format!(
                    "{eta},{},{},{},{}",
                    sizes_field(&o.sizes),
                    o.route,
                    o.block_count,
                    o.max_deviation
                )],
            })
        }
        Task::ZeroDist => {
            let o = tasks::zero_dist(cfg, eta)?;
            let hat = o.hat.map(|h| h.to_string()).unwrap_or_default();
            Ok(TaskOutput {
                files: vec![(format!("{dir}/{task}.json"), to_json(&o))],
                summary: json!({ "tilde": o.tilde, "hat": o.hat }),
                rows: vec![format!("{eta},{},{},{},{hat}", o.d_n, o.eps, o.tilde)],
            })
        }
        Task::WeylGaps => {
            let o = tasks::weyl(cfg, eta)?;
            let rows = o.gaps.iter().map(|(name, g)| format!("{eta},\"{name}\",{g}")).collect();
            Ok(TaskOutput {
                files: vec![(format!("{dir}/{task}.json"), to_json(&o))],
                summary: json!({ "max_gap": o.gaps.iter().map(|g| g.1).fold(0.0, f64::max) }),
                rows,
            })
        }
        Task::Rearrangement => {
            let o = tasks::rearrangement(cfg, eta)?;
            let mut csv = String::from("index,x,matrix,phi\n");
            for i in 0..o.x.len() {
                let _ = writeln!(csv, "{i},{},{},{}", o.x[i], o.matrix[i], o.phi[i]);
            }
            Ok(TaskOutput {
                files: vec![(format!("{dir}/{task}.csv"), csv)],
                summary: json!({ "sup": o.sup }),
                rows: Vec::new(),
            })
        }
    }
}

fn table_header(task: Task) -> Option<&'static str> {
    match task {
        Task::OutlierTable => Some("eta,sizes,d_n,reference_len,count,ratio"),
        Task::PermIdentity => Some("eta,sizes,route,block_count,max_deviation"),
        Task::ZeroDist => Some("eta,d_n,eps,tilde,hat"),
        Task::WeylGaps => Some("eta,test_function,gap"),
        _ => None,
    }
}

/// Runs every (η, task) pair on `workers` threads. Task failures are
/// recorded in the manifest; only I/O problems abort the run.
pub fn run_experiment(cfg: &ExperimentConfig, out: &Path, workers: usize) -> Result<RunManifest, RunError> {
    faer::set_global_parallelism(faer::Par::Seq);
    fs::create_dir_all(out).map_err(|source| RunError::Io {
        path: out.display().to_string(),
        source,
    })?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;

    let results: Vec<Vec<TaskRun>> = pool.install(|| {
        cfg.eta
            .par_iter()
            .map(|&eta| {
                cfg.tasks
                    .iter()
                    .map(|&task| {
                        let start = Instant::now();
                        let r = run_task(cfg, eta, task);
                        (task, r, start.elapsed().as_secs_f64())
                    })
                    .collect()
            })
            .collect()
    });

    let mut entries = Vec::new();
    let mut tables: Vec<(Task, Vec<String>)> = Vec::new();
    for (&eta, per_eta) in cfg.eta.iter().zip(results) {
        for (task, result, seconds) in per_eta {
            let entry = match result {
                Ok(output) => {
                    let mut artifacts = Vec::new();
                    for (rel, contents) in &output.files {
                        write_file(out, rel, contents)?;
                        artifacts.push(rel.clone());
                    }
                    if table_header(task).is_some() {
                        match tables.iter_mut().find(|(t, _)| *t == task) {
                            Some((_, rows)) => rows.extend(output.rows),
                            None => tables.push((task, output.rows)),
                        }
                    }
                    ManifestEntry {
                        eta,
                        task: task.to_string(),
                        status: Status::Ok,
                        error: None,
                        artifacts,
                        seconds,
                        summary: output.summary,
                    }
                }
                Err(e) => ManifestEntry {
                    eta,
                    task: task.to_string(),
                    status: Status::Failed,
                    error: Some(e.to_string()),
                    artifacts: Vec::new(),
                    seconds,
                    summary: Value::Null,
                },
            };
            entries.push(entry);
        }
    }

    let mut table_files = Vec::new();
    for task in &cfg.tasks {
        if let (Some(header), Some((_, rows))) = (table_header(*task), tables.iter().find(|(t, _)| t == task)) {
            let mut text = format!("{header}\n");
            for r in rows {
                text.push_str(r);
                text.push('\n');
            }
            let rel = format!("{task}.csv");
            write_file(out, &rel, &text)?;
            table_files.push(rel);
        }
    }

    let p = &cfg.parameters;
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        config_name: cfg.name.clone(),
        config_sha256: config_hash(cfg),
        policies: Policies {
            h: p.h,
            eps: p.eps,
            hermitian_tol: p.hermitian_tol,
            quadrature: p.quadrature,
            resolution: p.resolution,
            spectrum: match p.spectrum {
                SpectrumKind::Eig => "eig".into(),
                SpectrumKind::Sv => "sv".into(),
            },
            reference_grid: cfg.reference.describe(),
            interior_trim: "quantile levels 5%, 25%, 50%, 75%, 95%".into(),
        },
        eta: cfg.eta.clone(),
        tasks: cfg.tasks.iter().map(Task::to_string).collect(),
        partial: entries.iter().any(|e| e.status == Status::Failed),
        entries,
        tables: table_files,
    };
    write_file(out, MANIFEST_FILE, &to_json(&manifest))?;
    Ok(manifest)
}

/// `manifest.json` inside `p` if `p` is a directory, else `p` itself.
pub fn manifest_path(p: &Path) -> PathBuf {
    if p.is_dir() {
        p.join(MANIFEST_FILE)
    } else {
        p.to_path_buf()
    }
}
