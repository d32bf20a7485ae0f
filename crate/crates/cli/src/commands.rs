//! The four subcommands. Each computes everything first and then writes its
//! files in one pass.

use std::fs;
use std::path::{Path, PathBuf};

use ergolab_core::cesaro::{curve_m, curve_m_opnorm, curve_s, format_sci, CesaroCurve};
use ergolab_core::diagnostics::{
    cauchy_convergence_test, mass_escape_profile_of, report_m, report_s, report_t,
    ConvergenceVerdict, ErgodicityReport, Subject,
};
use ergolab_core::semigroups::{apply_m, apply_t, matrix_b, truncation_error_t, DenseMatrixExport};
use ergolab_core::{DualFunctional, TruncatedVector};
use serde::Serialize;

use crate::config::{ExperimentConfig, MeanMode};
use crate::error::{CliError, Result};
use crate::suite::{run_suite, SuiteOptions, VerifyReport};

/// Largest dimension `matrix` writes at all.
pub const MAX_MATRIX_DIM: usize = 10_000;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Metadata<'a> {
    version: &'a str,
    command: &'a str,
    config: &'a ExperimentConfig,
}

/// Files produced by a command, in write order.
#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub files: Vec<PathBuf>,
}

struct Pending {
    dir: PathBuf,
    files: Vec<(String, Vec<u8>)>,
}

impl Pending {
    fn new(config: &ExperimentConfig) -> Self {
        Self {
            dir: config.output_dir.clone(),
            files: Vec::new(),
        }
    }

    fn add(&mut self, name: &str, bytes: Vec<u8>) {
        self.files.push((name.to_string(), bytes));
    }

    fn add_json<T: Serialize>(&mut self, name: &str, value: &T) {
        let mut text = serde_json::to_string_pretty(value).expect("report serializes");
        text.push('\n');
        self.add(name, text.into_bytes());
    }

    fn metadata(&mut self, command: &str, config: &ExperimentConfig) {
        self.add_json(
            "metadata.json",
            &Metadata {
                version: VERSION,
                command,
                config,
            },
        );
    }

    fn write(self) -> Result<Outputs> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let mut files = Vec::with_capacity(self.files.len());
        for (name, bytes) in self.files {
            let path = self.dir.join(name);
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
            files.push(path);
        }
        Ok(Outputs { files })
    }
}

fn csv_bytes(
    write: impl FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> csv::Result<()>,
) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        write(&mut w)
            .and_then(|_| w.flush().map_err(csv::Error::from))
            .map_err(|e| CliError::io("<csv buffer>", std::io::Error::other(e.to_string())))?;
    }
    Ok(buf)
}

/// Trajectory `t ↦ U(t)x` of the configured subject.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<Outputs> {
    config.validate()?;
    let x = config.input_vector()?;
    let times = config.t_grid.points();
    let tol = config.tolerances.quadrature_tol;
    let op = match config.subject {
        Subject::S => Some(config.operator()?),
        _ => None,
    };
    let rows = times
        .iter()
        .map(|&t| {
            let (y, err) = match config.subject {
                Subject::M => (apply_m(t, &x)?, 0.0),
                Subject::T => (apply_t(t, &x)?, truncation_error_t(t, &x)?),
                Subject::S => (
                    op.as_ref().expect("operator built").apply_s(t, &x, tol)?,
                    tol,
                ),
            };
            Ok((t, y, err))
        })
        .collect::<Result<Vec<(f64, TruncatedVector, f64)>>>()?;

    let csv = csv_bytes(|w| {
        let mut header = vec![
            "t".to_string(),
            "norm_l1".into(),
            "f_value".into(),
            "trunc_error".into(),
        ];
        header.extend((1..=config.dim).map(|k| format!("x_{k}")));
        w.write_record(&header)?;
        for (t, y, err) in &rows {
            let f = DualFunctional::ConstantOne.pair(y).expect("same dimension");
            let mut record = vec![
                format_sci(*t),
                format_sci(y.norm_l1()),
                format_sci(f),
                format_sci(*err),
            ];
            record.extend(y.coords().iter().map(|&c| format_sci(c)));
            w.write_record(&record)?;
        }
        Ok(())
    })?;
    let mut out = Pending::new(config);
    out.add("trajectory.csv", csv);
    out.metadata("simulate", config);
    out.write()
}

#[derive(Debug, Clone, Serialize)]
pub struct CesaroSummary {
    pub subject: Subject,
    pub dim: usize,
    pub mode: MeanMode,
    pub window: usize,
    pub convergence: Option<ConvergenceVerdict>,
    pub report: ErgodicityReport,
    pub warnings: Vec<String>,
}

pub fn cesaro_curve(config: &ExperimentConfig) -> Result<CesaroCurve> {
    let grid = config.r_grid.points()?;
    let x = config.input_vector()?;
    Ok(match (config.subject, config.mode) {
        (Subject::M, MeanMode::Opnorm) => curve_m_opnorm(&grid, config.dim)?,
        (Subject::M, MeanMode::Vector) => curve_m(&grid, &x)?,
        (Subject::T, _) => mass_escape_profile_of(&x, &grid)?,
        (Subject::S, _) => curve_s(
            &grid,
            &x,
            &config.operator()?,
            config.tolerances.quadrature_tol,
        )?,
    })
}

/// Cesàro curve CSV plus the convergence verdict and ergodicity report.
pub fn cmd_cesaro(config: &ExperimentConfig) -> Result<(Outputs, CesaroSummary)> {
    config.validate()?;
    let curve = cesaro_curve(config)?;
    let grid = curve.r_grid();
    let window = (curve.len() / 2).min(4);
    let convergence = if window > 0 {
        Some(cauchy_convergence_test(
            &curve,
            window,
            config.tolerances.convergence_tol,
        )?)
    } else {
        None
    };
    let report = match config.subject {
        Subject::M => report_m(config.dim, &grid)?,
        Subject::T => report_t(config.dim, &grid)?,
        Subject::S => report_s(&config.operator()?)?,
    };
    let mut warnings = curve.warnings().to_vec();
    if convergence.is_none() {
        warnings.push("r_grid has fewer than 2 points; no convergence verdict".into());
    }
    let summary = CesaroSummary {
        subject: config.subject,
        dim: config.dim,
        mode: config.mode,
        window,
        convergence,
        report,
        warnings,
    };
    let mut csv = Vec::new();
    curve
        .write_csv(&mut csv)
        .map_err(|e| CliError::io("<csv buffer>", e))?;
    let mut out = Pending::new(config);
    out.add("cesaro.csv", csv);
    out.add_json("verdict.json", &summary);
    out.metadata("cesaro", config);
    Ok((out.write()?, summary))
}

/// Runs the invariant suite; the report is written even when checks fail.
pub fn cmd_verify(config: &ExperimentConfig) -> Result<(Outputs, VerifyReport)> {
    config.validate()?;
    let opts = SuiteOptions {
        dim: config.dim,
        seed: config.seed,
        r_grid: config.r_grid.points()?,
        convergence_tol: config.tolerances.convergence_tol,
        inject_fault: config.inject_fault,
    };
    let report = run_suite(&opts)?;
    let mut out = Pending::new(config);
    out.add_json("verify_report.json", &report);
    out.metadata("verify", config);
    let outputs = out.write()?;
    if !report.passed {
        return Err(CliError::InvariantFailure {
            failed: report.failed,
            report: outputs.files[0].clone(),
        });
    }
    Ok((outputs, report))
}

#[derive(Debug, Clone, Serialize)]
struct MatrixNote {
    dim: usize,
    nnz: usize,
    dense_written: bool,
    note: String,
}

/// Generator matrix of `T` as MatrixMarket, plus dense JSON for small `N`.
pub fn cmd_matrix(config: &ExperimentConfig) -> Result<Outputs> {
    if config.dim == 0 || config.dim > MAX_MATRIX_DIM {
        return Err(CliError::validation(format!(
            "matrix needs 1 <= dim <= {MAX_MATRIX_DIM}, got {}",
            config.dim
        )));
    }
    let b = matrix_b(config.dim)?;
    let mut out = Pending::new(config);
    out.add("matrix_b.mtx", b.to_matrix_market().into_bytes());
    let dense = config.dim <= DenseMatrixExport::MAX_DIM;
    if dense {
        out.add_json("matrix_b.json", &b.to_dense_export(true)?);
    }
    let note = if dense {
        "column-action convention: entry (j, k) is the coefficient of e_j in B e_k; the row-vector display is the transpose".to_string()
    } else {
        format!(
            "dense JSON omitted: dim {} exceeds {}",
            config.dim,
            DenseMatrixExport::MAX_DIM
        )
    };
    out.add_json(
        "matrix_b_note.json",
        &MatrixNote {
            dim: config.dim,
            nnz: b.nnz(),
            dense_written: dense,
            note,
        },
    );
    out.metadata("matrix", config);
    out.write()
}

/// Reads back a dense matrix export.
pub fn read_dense_export(path: &Path) -> Result<DenseMatrixExport> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Reads back the config echoed in `metadata.json`.
pub fn read_metadata_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: {e}", path.display())))?;
    ExperimentConfig::from_json(&value["config"].to_string())
}
