use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use feti_bench::{report, run_grid, verify, BenchError, RunArgs, RunConfig};
use feti_core::dual::{build_fetidp, BuildOptions};
use feti_core::problems::{academic_preset, AcademicOptions};
use feti_core::solver::{solve, SolveOptions};

fn config(dir: &Path, args: RunArgs) -> RunConfig {
    RunConfig::from_args(RunArgs { out: Some(dir.to_path_buf()), ..args }).unwrap()
}

fn read(path: PathBuf) -> String {
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

#[test]
fn homogeneous_scalings_write_identical_traces() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        RunArgs {
            problem: Some("grid3x3".into()),
            method: Some("tfeti".into()),
            directions: Some("single".into()),
            contrast: Some(1.0),
            elems: Some(4),
            ..Default::default()
        },
    );
    let summary = run_grid(&cfg).unwrap();
    assert_eq!(summary.rows.len(), 2);
    let mult = read(dir.path().join("trace_grid3x3_tfeti-mult-single.csv"));
    let k = read(dir.path().join("trace_grid3x3_tfeti-k-single.csv"));
    assert!(mult.starts_with("iter,eps_r,kept_dirs,F_applies,cum_local_solves\n"));
    assert_eq!(mult, k);
}

#[test]
fn full_grid_on_inclusion_converges_and_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), RunArgs { problem: Some("inclusion".into()), ..Default::default() });
    let summary = run_grid(&cfg).unwrap();
    assert!(summary.all_terminated());
    assert_eq!(summary.rows.len(), 12);
    for row in &summary.rows {
        assert_eq!(row.status, "converged", "{}", row.variant);
        assert_eq!(row.oracle_ok, Some(true), "{}: {:e}", row.variant, row.oracle_error);
    }
    // The simultaneous variants need the fewest iterations of each method.
    for method in ["tfeti", "fetidp"] {
        let its = |d: &str| summary.rows.iter().find(|r| r.variant == format!("{method}-k-{d}")).unwrap().iterations;
        assert!(its("rrs") < its("single") && its("rrs") < its("fo"), "{method}");
    }
    let lines = read(dir.path().join("summary.csv"));
    assert_eq!(lines.lines().count(), 13);

    let out = tempfile::tempdir().unwrap();
    let flags = report(&[dir.path().to_path_buf()], out.path()).unwrap();
    let mut labels: Vec<_> = flags.iter().map(|f| f.variant.clone()).collect();
    labels.dedup();
    assert_eq!(labels.len(), 12);
    let long = read(out.path().join("convergence_long.csv"));
    assert!(long.starts_with("variant,iter,eps_r\n"));
    let rows: usize = summary.rows.iter().map(|r| r.iterations + 1).sum();
    assert_eq!(long.lines().count(), rows + 1);
}

#[test]
fn identical_configs_give_identical_files() {
    let args = RunArgs {
        problem: Some("laminated".into()),
        elems: Some(7),
        directions: Some("rrs,fo".into()),
        seed: Some(3),
        ..Default::default()
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    run_grid(&config(a.path(), args.clone())).unwrap();
    run_grid(&config(b.path(), args)).unwrap();
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 9);
    for name in names {
        if name == "run.toml" {
            continue;
        }
        assert_eq!(fs::read(a.path().join(&name)).unwrap(), fs::read(b.path().join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn verify_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let rep = verify(&config(dir.path(), RunArgs::default())).unwrap();
    let failed: Vec<_> = rep.failures().map(|c| format!("{} {}", c.problem, c.check)).collect();
    assert!(failed.is_empty(), "{failed:?}");
    for preset in ["laminated", "grid3x3", "inclusion", "mbb"] {
        assert!(rep.checks.iter().any(|c| c.problem == preset && c.check == "negative_inner_product_detected"));
    }
    assert!(dir.path().join("verify.csv").exists());
}

#[test]
fn sign_flipped_preconditioner_is_reported() {
    let p = academic_preset("grid3x3", &AcademicOptions::with_elems(4)).unwrap();
    let subs = p.substructure().unwrap();
    let sys = build_fetidp(&subs, &BuildOptions::default()).unwrap();
    let res = solve(&feti_bench::verify::NegatedPreconditioner(&sys), &SolveOptions::default());
    assert!(matches!(res, Err(feti_core::Error::NegativeInnerProduct { .. })));
}

#[test]
fn missing_output_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent");
    let cfg = config(&missing, RunArgs { elems: Some(4), ..Default::default() });
    assert!(matches!(verify(&cfg), Err(BenchError::Io { .. })));
    assert!(matches!(run_grid(&cfg), Err(BenchError::Io { .. })));
    assert!(matches!(report(&[], &missing), Err(BenchError::Io { .. })));
}

#[test]
fn report_handles_empty_and_non_monotone_input() {
    let dir = tempfile::tempdir().unwrap();
    report(&[], dir.path()).unwrap();
    assert_eq!(read(dir.path().join("convergence_long.csv")), "variant,iter,eps_r\n");
    assert_eq!(read(dir.path().join("monotone.csv")), "variant,monotone\n");

    let trace = dir.path().join("trace_x.csv");
    fs::write(&trace, "iter,eps_r,kept_dirs,F_applies,cum_local_solves\n0,1.0,0,1,4\n1,2.0,1,2,8\n2,0.5,1,3,12\n").unwrap();
    let flags = report(&[trace], dir.path()).unwrap();
    assert_eq!(flags.len(), 1);
    assert_eq!(flags[0].variant, "x");
    assert!(!flags[0].monotone);
    assert_eq!(read(dir.path().join("monotone.csv")), "variant,monotone\nx,false\n");
}

#[test]
fn mbb_snapshots_are_written_and_solved() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        dir.path(),
        RunArgs {
            problem: Some("mbb".into()),
            elems: Some(2),
            snapshot_iters: Some("0,3".into()),
            method: Some("fetidp".into()),
            scaling: Some("k".into()),
            directions: Some("rrs".into()),
            ..Default::default()
        },
    );
    let summary = run_grid(&cfg).unwrap();
    assert_eq!(summary.rows.len(), 2);
    assert!(summary.rows.iter().all(|r| r.status == "converged" && r.oracle_ok == Some(true)));
    for k in [0, 3] {
        assert!(dir.path().join(format!("snapshot_{k}.problem")).exists());
        assert!(dir.path().join(format!("trace_mbb{k}_fetidp-k-rrs.csv")).exists());
    }
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_feti-bench"));
    c.stdout(Stdio::null()).stderr(Stdio::null());
    c
}

#[test]
fn binary_merges_config_file_with_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bench.toml");
    fs::write(&cfg, "problem = \"grid3x3\"\nelems = 4\nmethod = \"fetidp\"\ndirections = [\"single\"]\nmaxit = 3\n").unwrap();
    let status = bin()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--maxit", "500", "--scaling", "k", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let settings = read(dir.path().join("run.toml"));
    assert!(settings.contains("maxit = 500"), "{settings}");
    let summary = read(dir.path().join("summary.csv"));
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.contains("fetidp-k-single"));
    assert!(summary.contains("converged"));
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = bin().args(["run", "--problem", "bridge", "--out"]).arg(dir.path()).status().unwrap();
    assert!(!bad.success());
    let missing = bin().args(["verify", "--out"]).arg(dir.path().join("nope")).status().unwrap();
    assert!(!missing.success());
    // Hitting the iteration cap is a recorded outcome, not a failure.
    let capped = bin()
        .args(["run", "--problem", "grid3x3", "--elems", "4", "--method", "tfeti", "--directions", "single"])
        .args(["--maxit", "2", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(capped.success());
    assert!(read(dir.path().join("summary.csv")).contains("max_iter"));
}
