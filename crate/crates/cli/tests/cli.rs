//! End-to-end checks of the command-line surface on small grids.

use std::path::{Path, PathBuf};
use std::process::Command;

use sphq::grid::{RadialFunction, RadialGrid, SpectralFunction};
use sphq::symbol::{Bump, ExponentSpec, GridSpec, PsiSpec, Q2TermSpec, SymbolSpec};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sphq"))
}

fn small_grids() -> GridSpec {
    GridSpec {
        r_max: 10.0,
        lambda_max: 16.0,
        radial_panels: 60,
        spectral_panels: 60,
        nodes_per_panel: 8,
    }
}

fn grid_args(cmd: &mut Command, g: &GridSpec) {
    cmd.args([
        "--rmax",
        &g.r_max.to_string(),
        "--lmax",
        &g.lambda_max.to_string(),
        "--panels",
        &g.radial_panels.to_string(),
    ]);
}

fn write_bump(dir: &Path, grids: &GridSpec) -> PathBuf {
    let (rg, _) = grids.build();
    let f = RadialFunction::from_fn(&rg, |r| (-r * r).exp());
    let path = dir.join("f.csv");
    f.write_csv(&path).unwrap();
    path
}

#[test]
fn transform_roundtrip_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let grids = small_grids();
    let f_path = write_bump(dir.path(), &grids);
    let spec_path = dir.path().join("F.csv");
    let back_path = dir.path().join("g.csv");

    let mut fwd = bin();
    fwd.args(["transform", "--space", "h3", "--dir", "fwd"])
        .arg("--in")
        .arg(&f_path)
        .arg("--out")
        .arg(&spec_path);
    grid_args(&mut fwd, &grids);
    let out = fwd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let mut inv = bin();
    inv.args(["transform", "--space", "h3", "--dir", "inv"])
        .arg("--in")
        .arg(&spec_path)
        .arg("--out")
        .arg(&back_path);
    grid_args(&mut inv, &grids);
    assert!(inv.output().unwrap().status.success());

    let back = RadialFunction::read_csv(&back_path).unwrap();
    let (rg, _) = grids.build();
    let mut worst: f64 = 0.0;
    for (i, &r) in rg.nodes.iter().enumerate() {
        worst = worst.max((back.values[i] - (-r * r).exp()).abs());
    }
    assert!(worst < 1e-6, "file roundtrip sup error {worst:.3e}");
    // The spectral CSV round-trips bit-exactly and carries the header.
    let text = std::fs::read_to_string(&spec_path).unwrap();
    assert!(text.starts_with("node,value_re,value_im"));
    let reread = SpectralFunction::read_csv(&spec_path).unwrap();
    assert_eq!(reread.values.len(), reread.grid.nodes.len());
}

#[test]
fn evolve_and_psdo_apply_from_spec_files() {
    let dir = tempfile::tempdir().unwrap();
    let grids = small_grids();
    let f_path = write_bump(dir.path(), &grids);

    let psi = PsiSpec {
        dimension: 3,
        psi: ExponentSpec::Bm,
        grids: grids.clone(),
    };
    let psi_path = dir.path().join("psi.json");
    std::fs::write(&psi_path, serde_json::to_string_pretty(&psi).unwrap()).unwrap();
    let evolved_path = dir.path().join("evolved.csv");
    let out = bin()
        .args(["evolve", "--t", "0.4"])
        .arg("--psi")
        .arg(&psi_path)
        .arg("--in")
        .arg(&f_path)
        .arg("--out")
        .arg(&evolved_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let evolved = RadialFunction::read_csv(&evolved_path).unwrap();
    assert!(evolved.values[0] < 1.0 && evolved.values[0] > 0.0);

    let symbol = SymbolSpec {
        dimension: 3,
        kappa: 1.5,
        psi: ExponentSpec::Bm,
        q2_terms: vec![Q2TermSpec {
            u: Bump::new(0.4, 1.2).unwrap(),
            v: ExponentSpec::Bm,
        }],
        m_order: 6,
        grids: grids.clone(),
    };
    let sym_path = dir.path().join("q.json");
    std::fs::write(&sym_path, serde_json::to_string_pretty(&symbol).unwrap()).unwrap();
    let applied_path = dir.path().join("qf.csv");
    let out = bin()
        .arg("psdo-apply")
        .arg("--symbol")
        .arg(&sym_path)
        .arg("--in")
        .arg(&f_path)
        .arg("--out")
        .arg(&applied_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(RadialFunction::read_csv(&applied_path).is_ok());
}

#[test]
fn frac_laplacian_routes_agree_via_cli() {
    let dir = tempfile::tempdir().unwrap();
    let grids = small_grids();
    let f_path = write_bump(dir.path(), &grids);
    let mul_path = dir.path().join("mul.csv");
    let sub_path = dir.path().join("sub.csv");
    for (route, path) in [("multiplier", &mul_path), ("subordination", &sub_path)] {
        let mut cmd = bin();
        cmd.args(["frac-laplacian", "--space", "h3", "--beta", "1", "--route", route])
            .arg("--in")
            .arg(&f_path)
            .arg("--out")
            .arg(path);
        grid_args(&mut cmd, &grids);
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = RadialFunction::read_csv(&mul_path).unwrap();
    let b = RadialFunction::read_csv(&sub_path).unwrap();
    let sup = a.sup_norm();
    let worst = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0f64, f64::max);
    assert!(worst / sup < 1e-2, "routes differ by {worst:.3e}");
}

#[test]
fn solve_writes_solution_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let grids = small_grids();
    let f_path = write_bump(dir.path(), &grids);
    let symbol = SymbolSpec {
        dimension: 3,
        kappa: 2.0,
        psi: ExponentSpec::Bm,
        q2_terms: vec![],
        m_order: 6,
        grids: grids.clone(),
    };
    let sym_path = dir.path().join("q.json");
    std::fs::write(&sym_path, serde_json::to_string_pretty(&symbol).unwrap()).unwrap();
    let u_path = dir.path().join("u.csv");
    let rep_path = dir.path().join("report.json");
    let out = bin()
        .args(["solve", "--alpha", "auto", "--nbasis", "64", "--lambda-gal", "8"])
        .arg("--symbol")
        .arg(&sym_path)
        .arg("--in")
        .arg(&f_path)
        .arg("--out")
        .arg(&u_path)
        .arg("--report")
        .arg(&rep_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&rep_path).unwrap()).unwrap();
    assert!(report["residual_rel"].as_f64().unwrap() < 1e-3);
    assert!(RadialFunction::read_csv(&u_path).is_ok());
}

#[test]
fn suite_filter_and_export_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "dimensions": [3],
        "grids": {
            "r_max": 10.0, "lambda_max": 16.0,
            "radial_panels": 60, "spectral_panels": 60, "nodes_per_panel": 8,
        },
        "seed": 5,
    });
    let cfg_path = dir.path().join("suite.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let manifest_path = dir.path().join("manifest.json");
    let out = bin()
        .args(["suite", "--only", "transform.plancherel"])
        .arg("--config")
        .arg(&cfg_path)
        .arg("--out")
        .arg(&manifest_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&manifest_path).unwrap()).unwrap();
    assert_eq!(manifest["all_pass"], serde_json::json!(true));

    let plots_path = dir.path().join("heat.csv");
    let mut cmd = bin();
    cmd.args(["export-plots", "--space", "h3", "--kind", "heat"])
        .arg("--out")
        .arg(&plots_path);
    grid_args(&mut cmd, &small_grids());
    assert!(cmd.output().unwrap().status.success());
    let text = std::fs::read_to_string(&plots_path).unwrap();
    assert!(text.starts_with("r,h_0.1,h_0.5,h_1"));

    // Unknown plot kind is a usage error with nonzero exit.
    let mut cmd = bin();
    cmd.args(["export-plots", "--space", "h3", "--kind", "nope"])
        .arg("--out")
        .arg(dir.path().join("x.csv"));
    grid_args(&mut cmd, &small_grids());
    assert!(!cmd.output().unwrap().status.success());
}
