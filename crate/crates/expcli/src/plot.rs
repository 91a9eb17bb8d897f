//! Plot-ready data from a finished run. Rendering is left to gnuplot or
//! any tool that reads whitespace-separated columns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::runner::{RunManifest, Status};

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("manifest has no successful '{figure}' artifacts")]
    MissingArtifact { figure: String },
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed artifact {path}: {message}")]
    Malformed { path: String, message: String },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PlotError + '_ {
    move |source| PlotError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Series of one panel: `(name, points)`.
type Panel = Vec<(String, Vec<(f64, f64)>)>;

fn read_panel(path: &Path) -> Result<Panel, PlotError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let malformed = |message: String| PlotError::Malformed {
        path: path.display().to_string(),
        message,
    };
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
    let col = |name: &str| header.iter().position(|h| *h == name);
    let x = col("x").ok_or_else(|| malformed("no 'x' column".into()))?;
    let matrix = col("matrix").ok_or_else(|| malformed("no 'matrix' column".into()))?;
    let (value, curve) = match (col("symbol"), col("curve"), col("phi")) {
        (Some(s), Some(c), _) => (s, Some(c)),
        (_, _, Some(p)) => (p, None),
        _ => return Err(malformed("no symbol or phi column".into())),
    };

    let mut panel: Panel = vec![("matrix".into(), Vec::new())];
    for (n, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        let num = |i: usize| -> Result<f64, PlotError> {
            fields
                .get(i)
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| malformed(format!("line {}: bad field {i}", n + 2)))
        };
        let xv = num(x)?;
        panel[0].1.push((xv, num(matrix)?));
        let name = match curve {
            Some(c) => format!("curve {}", num(c)? as usize + 1),
            None => "phi".into(),
        };
        match panel.iter_mut().find(|(s, _)| *s == name) {
            Some((_, pts)) => pts.push((xv, num(value)?)),
            None => panel.push((name, vec![(xv, num(value)?)])),
        }
    }
    panel[1..].sort_by(|a, b| a.0.cmp(&b.0));
    Ok(panel)
}

/// For every η where `figure` (a task name with a CSV artifact, such as
/// `eig-compare` or `rearrangement`) succeeded, writes
/// `<figure>_eta<η>.dat` with one gnuplot index block per series, plus a
/// `<figure>.gp` script. Returns the written paths.
pub fn emit_plotdata(manifest: &RunManifest, manifest_dir: &Path, figure: &str, out: &Path) -> Result<Vec<PathBuf>, PlotError> {
    let panels: Vec<(usize, PathBuf)> = manifest
        .entries
        .iter()
        .filter(|e| e.task == figure && e.status == Status::Ok)
        .filter_map(|e| {
            e.artifacts
                .iter()
                .find(|a| a.ends_with(".csv"))
                .map(|a| (e.eta, manifest_dir.join(a)))
        })
        .collect();
    if panels.is_empty() {
        return Err(PlotError::MissingArtifact { figure: figure.into() });
    }
    fs::create_dir_all(out).map_err(io_err(out))?;

    let mut written = Vec::new();
    let mut script = format!(
        "# {} ({}), {figure}\nset key left top\nset xlabel 'sorted position'\n",
        manifest.config_name, manifest.config_sha256
    );
    for (eta, csv) in panels {
        let panel = read_panel(&csv)?;
        let mut dat = String::new();
        for (name, points) in &panel {
            let _ = writeln!(dat, "# {name}");
            for (x, y) in points {
                let _ = writeln!(dat, "{x} {y}");
            }
            dat.push_str("\n\n");
        }
        let file = format!("{figure}_eta{eta}.dat");
        let path = out.join(&file);
        fs::write(&path, dat).map_err(io_err(&path))?;
        written.push(path);

        let _ = writeln!(script, "set title 'eta = {eta}'");
        let plots: Vec<String> = panel
            .iter()
            .enumerate()
            .map(|(i, (name, _))| {
                let style = if i == 0 { "points pt 7 ps 0.5" } else { "lines lw 2" };
                format!("'{file}' index {i} with {style} title '{name}'")
            })
            .collect();
        let _ = writeln!(script, "plot {}\npause -1", plots.join(", \\\n     "));
    }
    let path = out.join(format!("{figure}.gp"));
    fs::write(&path, script).map_err(io_err(&path))?;
    written.push(path);
    Ok(written)
}
