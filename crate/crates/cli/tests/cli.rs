use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use ergolab::commands::{cmd_cesaro, cmd_matrix, cmd_simulate, cmd_verify, read_metadata_config};
use ergolab::config::{GeometricGrid, LinearGrid, MatrixSource, MeanMode};
use ergolab::{CliError, ExperimentConfig};
use ergolab_core::diagnostics::{Subject, VerdictKind};

fn config_in(dir: &Path, subject: Subject, dim: usize) -> ExperimentConfig {
    // r grid reaching r = dim at most
    let count = 2 * dim.ilog2() as usize + 1;
    let r_grid = GeometricGrid {
        start: 1.0,
        factor: std::f64::consts::SQRT_2,
        count: count.min(16),
    };
    ExperimentConfig {
        subject,
        dim,
        r_grid,
        output_dir: dir.to_path_buf(),
        ..Default::default()
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(
        r.records()
            .map(|rec| rec.unwrap().iter().map(String::from).collect()),
    );
    rows
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ergolab"))
}

#[test]
fn simulate_m_gives_exponential_column() {
    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), Subject::M, 8);
    cmd_simulate(&c).unwrap();
    let rows = read_csv(&dir.path().join("trajectory.csv"));
    assert_eq!(
        rows[0][..5],
        ["t", "norm_l1", "f_value", "trunc_error", "x_1"]
    );
    assert_eq!(rows.len(), 12);
    for row in &rows[1..] {
        let t: f64 = row[0].parse().unwrap();
        let x1: f64 = row[4].parse().unwrap();
        assert!((x1 - (-t).exp()).abs() <= 1e-16);
    }
}

#[test]
fn simulate_t_column_sums() {
    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), Subject::T, 1024);
    cmd_simulate(&c).unwrap();
    let rows = read_csv(&dir.path().join("trajectory.csv"));
    for row in &rows[1..] {
        let t: f64 = row[0].parse().unwrap();
        let f: f64 = row[2].parse().unwrap();
        let err: f64 = row[3].parse().unwrap();
        let deficit = -(-t / 1024.0f64).exp_m1();
        assert!((1.0 - f - deficit).abs() <= 1e-14, "t = {t}");
        assert!((err - deficit).abs() <= 1e-16);
    }
}

#[test]
fn simulate_s_identity_rows_constant() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config_in(dir.path(), Subject::S, 4);
    c.input = vec![(1, 0.5), (3, -2.0)];
    cmd_simulate(&c).unwrap();
    let rows = read_csv(&dir.path().join("trajectory.csv"));
    for row in &rows[2..] {
        for k in 4..8 {
            let a: f64 = row[k].parse().unwrap();
            let b: f64 = rows[1][k].parse().unwrap();
            assert!((a - b).abs() <= 1e-9);
        }
    }
}

#[test]
fn metadata_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config_in(dir.path(), Subject::S, 16);
    c.matrix = MatrixSource::TMatrix { t: 1.0 };
    c.input = vec![(2, 1.0), (5, 0.25)];
    c.seed = 99;
    c.tolerances.quadrature_tol = 1e-8;
    cmd_simulate(&c).unwrap();
    assert_eq!(
        read_metadata_config(&dir.path().join("metadata.json")).unwrap(),
        c
    );
}

#[test]
fn cesaro_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config_in(dir.path(), Subject::M, 4096);
    c.mode = MeanMode::Opnorm;
    c.r_grid = GeometricGrid {
        start: 1.0,
        factor: 2.0,
        count: 13,
    };
    let (_, summary) = cmd_cesaro(&c).unwrap();
    assert_eq!(summary.convergence.unwrap().verdict, VerdictKind::Diverges);
    let rows = read_csv(&dir.path().join("cesaro.csv"));
    assert_eq!(
        rows[0],
        [
            "r",
            "value_or_norm",
            "trunc_error",
            "max_coordinate",
            "f_value"
        ]
    );
    for row in &rows[1..] {
        assert!(row[1].parse::<f64>().unwrap() >= 0.632);
    }

    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), Subject::T, 4096);
    let (_, summary) = cmd_cesaro(&c).unwrap();
    assert_eq!(summary.report.verdicts.mean, VerdictKind::Diverges);
    for row in &read_csv(&dir.path().join("cesaro.csv"))[1..] {
        assert!((row[4].parse::<f64>().unwrap() - 1.0).abs() < 0.05);
    }
    let v: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap())
            .unwrap();
    assert!(v["report"]["evidence"].as_array().unwrap().len() >= 3);

    let mut c = config_in(dir.path(), Subject::T, 64);
    c.r_grid.count = 0;
    assert!(matches!(cmd_cesaro(&c), Err(CliError::Validation(_))));
}

#[test]
fn cesaro_s_converges_for_stochastic_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config_in(dir.path(), Subject::S, 8);
    c.matrix = MatrixSource::TMatrix { t: 1.0 };
    c.r_grid = GeometricGrid {
        start: 0.5,
        factor: 2.0,
        count: 4,
    };
    c.tolerances.quadrature_tol = 1e-7;
    let (_, summary) = cmd_cesaro(&c).unwrap();
    assert_eq!(summary.report.verdicts.mean, VerdictKind::Converges);
}

#[test]
fn matrix_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), Subject::T, 1);
    cmd_matrix(&c).unwrap();
    let dense = ergolab::commands::read_dense_export(&dir.path().join("matrix_b.json")).unwrap();
    assert_eq!(dense.rows, vec![vec![-1.0]]);

    let dir = tempfile::tempdir().unwrap();
    let c = config_in(dir.path(), Subject::T, 100);
    cmd_matrix(&c).unwrap();
    assert!(!dir.path().join("matrix_b.json").exists());
    let mtx = fs::read_to_string(dir.path().join("matrix_b.mtx")).unwrap();
    let op = ergolab_core::semigroups::TruncatedOperator::from_matrix_market(&mtx).unwrap();
    assert_eq!(op.nnz(), 5050);
}

#[test]
fn verify_timing_and_determinism() {
    let start = Instant::now();
    for dim in [16usize, 256, 4096] {
        let dir = tempfile::tempdir().unwrap();
        let c = config_in(dir.path(), Subject::T, dim);
        let (_, report) = cmd_verify(&c).unwrap();
        assert!(report.passed);
    }
    assert!(
        start.elapsed().as_secs_f64() < 60.0,
        "{:?}",
        start.elapsed()
    );

    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    cmd_verify(&config_in(a.path(), Subject::T, 64)).unwrap();
    cmd_verify(&config_in(b.path(), Subject::T, 64)).unwrap();
    let report = "verify_report.json";
    assert_eq!(
        fs::read(a.path().join(report)).unwrap(),
        fs::read(b.path().join(report)).unwrap()
    );
}

#[test]
fn verify_tiny_dim() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = config_in(dir.path(), Subject::T, 1);
    c.r_grid = GeometricGrid {
        start: 1.0,
        factor: 2.0,
        count: 1,
    };
    let (_, report) = cmd_verify(&c).unwrap();
    assert!(report.passed);
    assert!(!report.caveats.is_empty());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let status = bin()
        .args(["matrix", "--dim", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("matrix_b.mtx").exists());

    let status = bin()
        .args(["cesaro", "--dim", "4", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));

    let cfg = dir.path().join("fault.json");
    fs::write(
        &cfg,
        r#"{"dim": 32, "inject_fault": true, "r_grid": {"start": 1, "factor": 2, "count": 4}}"#,
    )
    .unwrap();
    let status = bin()
        .args(["verify", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(1));
    assert!(out.join("verify_report.json").exists());

    let status = bin()
        .args(["simulate", "--config"])
        .arg(dir.path().join("missing.json"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let status = bin()
        .args(["matrix", "--dim", "2", "--out"])
        .arg(blocker.join("sub"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn t_grid_is_linear() {
    let g = LinearGrid {
        start: 0.0,
        stop: 1.0,
        count: 3,
    };
    assert_eq!(g.points(), vec![0.0, 0.5, 1.0]);
}

#[test]
fn random_configs_round_trip() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let dim = rng.random_range(1..5000);
        let c = ExperimentConfig {
            subject: [Subject::M, Subject::T, Subject::S][rng.random_range(0..3)],
            dim,
            r_grid: GeometricGrid {
                start: rng.random(),
                factor: 1.0 + rng.random::<f64>(),
                count: rng.random_range(1..30),
            },
            t_grid: LinearGrid {
                start: rng.random(),
                stop: 1.0 + 9.0 * rng.random::<f64>(),
                count: rng.random_range(1..20),
            },
            input: (0..rng.random_range(1..5))
                .map(|_| (rng.random_range(1..=dim), rng.random_range(-1e3..1e3)))
                .collect(),
            matrix: MatrixSource::TMatrix { t: 1.0 / 3.0 },
            seed: rng.random(),
            ..Default::default()
        };
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }
}
