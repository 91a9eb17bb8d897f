use std::fs;
use std::path::Path;
use std::process::Command;

use toepblock::spectra::SpectrumKind;
use toepblock_exp::config::Task;
use toepblock_exp::runner::{RunManifest, Status, MANIFEST_FILE};
use toepblock_exp::{builtin, builtin_source, emit_plotdata, load_config, parse_config, run_experiment, tasks, ConfigError, PlotError};

fn value_files(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.file_name().unwrap() != MANIFEST_FILE {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn value_files_identical_across_workers_and_reruns() {
    let cfg = builtin("group1").unwrap().unwrap();
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let m1 = run_experiment(&cfg, dirs[0].path(), 1).unwrap();
    let m3 = run_experiment(&cfg, dirs[1].path(), 3).unwrap();
    run_experiment(&cfg, dirs[2].path(), 1).unwrap();
    let files = value_files(dirs[0].path());
    assert!(files.len() > 10);
    assert_eq!(files, value_files(dirs[1].path()));
    assert_eq!(files, value_files(dirs[2].path()));
    assert!(!m1.partial);
    assert_eq!(m1.config_sha256, m3.config_sha256);
    assert_eq!(m1.entries.len(), cfg.eta.len() * cfg.tasks.len());

    // every emitted file is listed
    let mut listed: Vec<String> = m1.entries.iter().flat_map(|e| e.artifacts.clone()).collect();
    listed.extend(m1.tables.clone());
    listed.sort();
    let on_disk: Vec<String> = files.into_iter().map(|f| f.0).collect();
    assert_eq!(listed, on_disk);

    let reloaded = RunManifest::load(&dirs[0].path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(reloaded.entries.len(), m1.entries.len());
    assert_eq!(reloaded.config_name, "group1");
}

#[test]
fn compare_csv_layout() {
    let cfg = builtin("group1").unwrap().unwrap().with_tasks(vec![Task::EigCompare]);
    let cfg = cfg.with_eta(vec![20]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    run_experiment(&cfg, dir.path(), 1).unwrap();
    let text = fs::read_to_string(dir.path().join("eta20/eig-compare.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("index,x,matrix,symbol,curve,out"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 60);
    for w in rows.windows(2) {
        assert!(w[0][2] <= w[1][2] && w[0][3] <= w[1][3]);
    }
    for r in &rows {
        assert!(((r[2] - r[3]).abs() - r[5]).abs() < 1e-12);
    }
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("eta20/eig-compare.json")).unwrap()).unwrap();
    assert_eq!(report["kind"], "eig");
    assert_eq!(report["quantile_discrepancies"].as_array().unwrap().len(), 5);
}

#[test]
fn interior_quantiles_exclude_edge_outliers() {
    let cfg = builtin("group1").unwrap().unwrap();
    let o = tasks::compare(&cfg, 80, SpectrumKind::Eig).unwrap();
    assert!(o.comparison.interior_sup < o.comparison.sup);
}

#[test]
fn failed_tasks_mark_partial_manifest() {
    // law c sizes are not multiples of a common block, so perm-identity fails
    let text = builtin_source("group1c")
        .unwrap()
        .replace(r#"tasks = ["eig-compare", "sv-compare", "zero-dist", "weyl-gaps"]"#, r#"tasks = ["perm-identity", "zero-dist"]"#)
        .replace("eta = [25, 49, 81]", "eta = [25, 49]");
    let cfg = parse_config(&text).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let m = run_experiment(&cfg, dir.path(), 2).unwrap();
    assert!(m.partial);
    assert_eq!(m.failures().count(), 2);
    let ok: Vec<_> = m.entries.iter().filter(|e| e.status == Status::Ok).collect();
    assert_eq!(ok.len(), 2);
    assert!(ok.iter().all(|e| e.task == "zero-dist"));
    let table = fs::read_to_string(dir.path().join("zero-dist.csv")).unwrap();
    assert_eq!(table.lines().count(), 3);
    assert!(!dir.path().join("perm-identity.csv").exists());
}

#[test]
fn plot_data_panels() {
    let cfg = builtin("group1").unwrap().unwrap().with_tasks(vec![Task::SvCompare, Task::Rearrangement]);
    let run = tempfile::tempdir().unwrap();
    let m = run_experiment(&cfg, run.path(), 1).unwrap();
    let plots = tempfile::tempdir().unwrap();
    let files = emit_plotdata(&m, run.path(), "sv-compare", plots.path()).unwrap();
    assert_eq!(files.len(), 4);
    let dat = fs::read_to_string(plots.path().join("sv-compare_eta40.dat")).unwrap();
    // matrix series plus one series per curve
    assert_eq!(dat.matches("# ").count(), 4);
    let points = dat.lines().filter(|l| !l.is_empty() && !l.starts_with('#')).count();
    assert_eq!(points, 2 * 120);
    let again = tempfile::tempdir().unwrap();
    emit_plotdata(&m, run.path(), "sv-compare", again.path()).unwrap();
    assert_eq!(value_files(plots.path()), value_files(again.path()));

    emit_plotdata(&m, run.path(), "rearrangement", plots.path()).unwrap();
    assert!(matches!(
        emit_plotdata(&m, run.path(), "eig-compare", plots.path()),
        Err(PlotError::MissingArtifact { .. })
    ));
}

#[test]
fn empty_manifest_has_no_plot_data() {
    let m: RunManifest = serde_json::from_value(serde_json::json!({
        "tool": "toepblock-exp", "version": "0", "config_name": "none", "config_sha256": "",
        "policies": { "h": 0.1, "eps": 0.1, "hermitian_tol": 1e-10, "quadrature": 1, "resolution": 1,
                      "spectrum": "sv", "reference_grid": "", "interior_trim": "" },
        "eta": [], "tasks": [], "entries": [], "tables": [], "partial": false
    }))
    .unwrap();
    let out = tempfile::tempdir().unwrap();
    assert!(matches!(
        emit_plotdata(&m, out.path(), "sv-compare", out.path()),
        Err(PlotError::MissingArtifact { .. })
    ));
}

#[test]
fn config_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.toml");
    fs::write(&path, builtin_source("group2").unwrap()).unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.distribution_symbol.shape(), (3, 6));
    assert!(matches!(load_config(&dir.path().join("missing.toml")), Err(ConfigError::Io { .. })));

    let odd = builtin_source("group3").unwrap().replace("eta = [20, 40, 80]", "eta = [20, 41]");
    match parse_config(&odd) {
        Err(ConfigError::Validation { path, .. }) => assert_eq!(path, "eta[1]"),
        other => panic!("{other:?}"),
    }
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_toepblock-exp")).args(args).output().unwrap()
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let out_s = out.to_str().unwrap();

    let listed = cli(&["list-builtin"]);
    assert!(listed.status.success());
    assert!(String::from_utf8_lossy(&listed.stdout).contains("group3-hermitian"));

    assert!(cli(&["validate", "builtin:table1"]).status.success());
    assert_eq!(cli(&["validate", "builtin:nope"]).status.code(), Some(1));
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, builtin_source("group1").unwrap().replace("nu = 2", "nu = 1")).unwrap();
    let v = cli(&["validate", bad.to_str().unwrap()]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("nu=1 is not of interest"));

    let run = cli(&["run", "builtin:group2", "--out", out_s, "--workers", "2", "--tasks", "sv-compare", "--eta", "10,20"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("eta10/sv-compare.csv").exists());
    assert!(!out.join("eta10/zero-dist.json").exists());
    assert_eq!(cli(&["run", "builtin:group2", "--out", out_s, "--tasks", "eig-compare"]).status.code(), Some(1));

    let plots = dir.path().join("plots");
    let p = cli(&["plot", out_s, "sv-compare", "--out", plots.to_str().unwrap()]);
    assert!(p.status.success());
    assert!(plots.join("sv-compare.gp").exists());
    assert_eq!(cli(&["plot", out_s, "outlier-table", "--out", plots.to_str().unwrap()]).status.code(), Some(2));

    let partial = cli(&["run", "builtin:group3", "--out", out_s, "--eta", "20"]);
    assert!(partial.status.success());
    fs::write(
        &bad,
        builtin_source("group1c").unwrap().replace(r#"["eig-compare", "sv-compare", "zero-dist", "weyl-gaps"]"#, r#"["perm-identity"]"#),
    )
    .unwrap();
    assert_eq!(cli(&["run", bad.to_str().unwrap(), "--out", out_s, "--eta", "25"]).status.code(), Some(2));
}
