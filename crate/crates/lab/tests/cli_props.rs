use std::path::Path;
use std::process::{Command, Output};

use sff_lab::config::RunConfig;
use sff_lab::formats::CurveTable;
use sff_lab::manifest::{execute, export, replay, Format, RunManifest, MANIFEST_FILE};
use sff_lab::recipes::recipe;
use sff_lab::run::run_ensemble;
use sff_lab::svg::parse_paths;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sff-lab")).args(args).env_remove("SFF_LAB_WORKERS").output().unwrap()
}

fn small(count: &str, out: &Path) -> Vec<String> {
    ["--dim", "8", "--count", count, "--points", "30", "--tmax", "100", "--out", out.to_str().unwrap()]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn files(dir: &Path) -> Vec<String> {
    let mut v: Vec<String> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    v.sort();
    v
}

#[test]
fn empty_export_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let mut m = RunManifest::new(RunConfig::default());
    assert!(export(&[], Format::Csv, dir.path(), &mut m).unwrap().is_empty());
    let out = lab(&["export", "--format", "csv", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(files(dir.path()).is_empty());
}

#[test]
fn csv_export_reparses_bit_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json(r#"{"ensemble":{"dim":6,"count":12,"base_seed":3},"grid":{"points":40}}"#).unwrap();
    let r = run_ensemble(&cfg.ensemble.goe().unwrap(), 0.3, None, &cfg.grid.build().unwrap(), 2).unwrap();
    let table = CurveTable::from_result(&r);
    let mut m = RunManifest::new(cfg);
    let paths = export(&[("one".into(), table.clone())], Format::Csv, dir.path(), &mut m).unwrap();
    assert_eq!(paths.len(), 1);
    let back = CurveTable::read(&paths[0]).unwrap();
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&back.t), bits(&table.t));
    assert_eq!(bits(&back.sff_mean), bits(&table.sff_mean));
    assert_eq!(bits(&back.sff_sq_mean), bits(&table.sff_sq_mean));
    assert_eq!(back.rv.iter().map(|x| x.map(f64::to_bits)).collect::<Vec<_>>(), table.rv.iter().map(|x| x.map(f64::to_bits)).collect::<Vec<_>>());
}

#[test]
fn fig1a_svg_has_two_log_series() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = recipe("fig1a").unwrap();
    cfg.ensemble.count = 40;
    let r = run_ensemble(&cfg.ensemble.goe().unwrap(), 0.1, None, &cfg.grid.build().unwrap(), 1).unwrap();
    let table = CurveTable::from_result(&r);
    let mut m = RunManifest::new(cfg);
    let paths = export(&[("fig1a".into(), table.clone())], Format::Svg, dir.path(), &mut m).unwrap();
    let svg = std::fs::read_to_string(&paths[0]).unwrap();
    assert!(svg.contains(r#"data-xscale="log""#) && svg.contains(r#"data-yscale="log""#));
    let (frame, series) = parse_paths(&svg);
    let frame = frame.unwrap();
    let names: Vec<&str> = series.iter().map(|(n, _)| n.as_str()).collect();
    assert_eq!(names, ["mean SFF", "RV"]);

    // Pixel coordinates map back onto the plotted data.
    let (_, pts) = &series[0];
    assert_eq!(pts.len(), table.t.len());
    for (&(px, py), (&t, &y)) in pts.iter().zip(table.t.iter().zip(&table.sff_mean)) {
        let (x, v) = frame.from_px(px, py);
        assert!((x.log10() - t.log10()).abs() < 1e-2, "{x} vs {t}");
        assert!((v.log10() - y.log10()).abs() < 1e-2, "{v} vs {y}");
    }
}

#[test]
fn manifest_replay_reproduces_digests() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = RunConfig::from_json(
        r#"{"ensemble":{"dim":6,"count":10,"base_seed":5},"filter":{"domain":"frequency","kind":"gaussian","kappa":0.1},"betas":[0.1,0.5],"grid":{"points":30}}"#,
    )
    .unwrap();
    let (m, _) = execute(&cfg, a.path(), 1).unwrap();
    assert_eq!(m.outputs.len(), 2);
    let saved = RunManifest::read(&a.path().join(MANIFEST_FILE)).unwrap();
    assert_eq!(saved, m);
    assert!(replay(&saved, b.path(), 3).unwrap().is_empty());

    // The CLI accepts the manifest as a config and reproduces the same files.
    let c = tempfile::tempdir().unwrap();
    let manifest_path = a.path().join(MANIFEST_FILE);
    let out = lab(&["sff", "--config", manifest_path.to_str().unwrap(), "--out", c.path().to_str().unwrap(), "--workers", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(RunManifest::read(&c.path().join(MANIFEST_FILE)).unwrap().outputs, m.outputs);

    let mut tampered = saved.clone();
    tampered.outputs.values_mut().next().unwrap().replace_range(0..1, "x");
    assert_eq!(replay(&tampered, b.path(), 1).unwrap().len(), 1);
}

#[test]
fn worker_env_does_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["rv".to_string()];
    args.extend(small("9", a.path()));
    let one = Command::new(env!("CARGO_BIN_EXE_sff-lab")).args(&args).env("SFF_LAB_WORKERS", "1").output().unwrap();
    let mut args = vec!["rv".to_string()];
    args.extend(small("9", b.path()));
    let four = Command::new(env!("CARGO_BIN_EXE_sff-lab")).args(&args).env("SFF_LAB_WORKERS", "4").output().unwrap();
    assert!(one.status.success() && four.status.success());
    let read = |d: &Path| std::fs::read(d.join("b0.1_none.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();

    let ok = lab(&["sample", "--dim", "4", "--count", "2", "--out", d]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(files(dir.path()), ["manifest.json", "spectra.json"]);

    assert_eq!(lab(&["sff", "--dim", "0", "--out", d]).status.code(), Some(1));
    assert_eq!(lab(&["rv", "--count", "1", "--out", d]).status.code(), Some(1));
    assert_eq!(lab(&["sff", "--filter", "bogus", "--out", d]).status.code(), Some(1));
    assert_eq!(lab(&["sff", "--workers", "0", "--out", d]).status.code(), Some(1));
    assert_eq!(lab(&["sff", "--recipe", "fig1a", "--config", "x.json", "--out", d]).status.code(), Some(1));

    // Negative levels under a fractional power deformation fail inside a
    // realization.
    let bad = lab(&["sff", "--dim", "4", "--count", "3", "--points", "10", "--filter", "eig-gauss", "--kappa", "0.1", "--f", "power:0.5", "--out", d]);
    let stderr = String::from_utf8_lossy(&bad.stderr);
    assert!(stderr.contains("realization 0"), "{stderr}");
    assert_eq!(bad.status.code(), Some(1));

    let numerical = sff_lab::LabError::Realization { index: 3, source: sff_core::Error::PartitionUnderflow };
    assert_eq!(numerical.exit_code(), 2);
    assert_eq!(sff_lab::LabError::ChecksFailed("x".into()).exit_code(), 2);
    assert_eq!(sff_lab::LabError::Validation("x".into()).exit_code(), 1);

    let v = lab(&["verify"]);
    assert_eq!(v.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&v.stdout).unwrap();
    assert_eq!(report["passed"], serde_json::Value::Bool(true));
}

#[test]
fn dephase_and_deconvolve_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = lab(&["dephase", "--dim", "6", "--kappa", "0.2", "--beta", "0.3", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("dephase.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,survival,purity,closed_form_survival"));
    let mut prev_purity = f64::INFINITY;
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[1] - v[3]).abs() < 1e-8);
        assert!(v[2] <= prev_purity);
        prev_purity = v[2];
    }

    // Filtered two-level curve in, unfiltered curve out.
    let n = 1024;
    let dt = 10.0 * std::f64::consts::PI / n as f64;
    let mut csv = String::from("t,value\n");
    for j in 0..n {
        let t = j as f64 * dt;
        csv.push_str(&format!("{:.16e},{:.16e}\n", t, 0.5 * (1.0 + (-1.0f64).exp() * (2.0 * t).cos())));
    }
    let input = dir.path().join("filtered.csv");
    std::fs::write(&input, csv).unwrap();
    let out = lab(&["deconvolve", "--input", input.to_str().unwrap(), "--filter", "freq-gauss", "--kappa", "0.25", "--eps", "1e-8", "--out", d]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("deconvolved.csv")).unwrap();
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let (a, b) = l.split_once(',').unwrap();
            (a.parse().unwrap(), b.parse().unwrap())
        })
        .collect();
    let edge = n / 10;
    for &(t, v) in &rows[edge..n - edge] {
        assert!((v - 0.5 * (1.0 + (2.0 * t).cos())).abs() < 1e-3);
    }

    let out = lab(&["deconvolve", "--input", input.to_str().unwrap(), "--filter", "eig-gauss", "--kappa", "0.1", "--out", d]);
    assert_eq!(out.status.code(), Some(1));
}
