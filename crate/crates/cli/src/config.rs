//! JSON experiment configuration.

use std::path::{Path, PathBuf};

use ergolab_core::cesaro::geometric_grid;
use ergolab_core::diagnostics::Subject;
use ergolab_core::exp_semigroup::PowerBoundedOperator;
use ergolab_core::semigroups::{matrix_t, TruncatedOperator};
use ergolab_core::TruncatedVector;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub start: f64,
    pub factor: f64,
    pub count: usize,
}

impl GeometricGrid {
    pub fn points(&self) -> Result<Vec<f64>> {
        Ok(geometric_grid(self.start, self.factor, self.count)?)
    }
}

/// `count` equally spaced times from `start` to `stop` inclusive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LinearGrid {
    pub fn points(&self) -> Vec<f64> {
        match self.count {
            0 => vec![],
            1 => vec![self.start],
            n => (0..n)
                .map(|i| {
                    if i == n - 1 {
                        self.stop
                    } else {
                        self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                    }
                })
                .collect(),
        }
    }
}

/// Matrix whose exponential semigroup is studied when `subject` is `S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MatrixSource {
    Identity,
    /// The truncated `T(t)` matrix at the configured dimension.
    TMatrix {
        t: f64,
    },
    /// MatrixMarket coordinate file.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanMode {
    Vector,
    Opnorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub quadrature_tol: f64,
    #[serde(default = "default_convergence_tol")]
    pub convergence_tol: f64,
}

fn default_convergence_tol() -> f64 {
    1e-3
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature_tol: 1e-9,
            convergence_tol: default_convergence_tol(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub subject: Subject,
    #[serde(alias = "N")]
    pub dim: usize,
    pub r_grid: GeometricGrid,
    pub t_grid: LinearGrid,
    /// Sparse input vector as 1-based `[index, value]` pairs.
    pub input: Vec<(usize, f64)>,
    pub matrix: MatrixSource,
    pub mode: MeanMode,
    pub tolerances: Tolerances,
    pub output_dir: PathBuf,
    pub seed: u64,
    /// Negative control for `verify`: corrupts one matrix entry.
    pub inject_fault: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            subject: Subject::T,
            dim: 1024,
            r_grid: GeometricGrid {
                start: 1.0,
                factor: std::f64::consts::SQRT_2,
                count: 16,
            },
            t_grid: LinearGrid {
                start: 0.0,
                stop: 5.0,
                count: 11,
            },
            input: vec![(1, 1.0)],
            matrix: MatrixSource::Identity,
            mode: MeanMode::Vector,
            tolerances: Tolerances::default(),
            output_dir: PathBuf::from("out"),
            seed: 0,
            inject_fault: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| CliError::validation(format!("config is not valid JSON: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Every violated constraint, each with a hint on how to fix it.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.dim == 0 {
            v.push("dim must be >= 1".to_string());
        }
        let g = &self.r_grid;
        if g.count == 0 {
            v.push("r_grid.count must be >= 1".into());
        }
        if !(g.start.is_finite() && g.start > 0.0) {
            v.push(format!(
                "r_grid.start must be finite and > 0, got {}",
                g.start
            ));
        }
        if !(g.factor.is_finite() && g.factor > 1.0) {
            v.push(format!(
                "r_grid.factor must be finite and > 1, got {}",
                g.factor
            ));
        }
        let t = &self.t_grid;
        if t.count == 0 {
            v.push("t_grid.count must be >= 1".into());
        }
        if !(t.start.is_finite() && t.start >= 0.0 && t.stop.is_finite() && t.stop >= t.start) {
            v.push(format!(
                "t_grid needs 0 <= start <= stop, got [{}, {}]",
                t.start, t.stop
            ));
        }
        for (name, tol) in [
            ("tolerances.quadrature_tol", self.tolerances.quadrature_tol),
            (
                "tolerances.convergence_tol",
                self.tolerances.convergence_tol,
            ),
        ] {
            if !(tol.is_finite() && tol > 0.0) {
                v.push(format!("{name} must be finite and > 0, got {tol}"));
            }
        }
        if let (true, Ok(points)) = (self.dim > 0, g.points()) {
            let r_max = points.last().copied().unwrap_or(0.0);
            let ratio = r_max / (2.0 * self.dim as f64);
            // grids built by repeated multiplication overshoot by a few ulps
            if ratio > 0.5 * (1.0 + 1e-12) {
                v.push(format!(
                    "largest r = {r_max} gives r/(2N) = {ratio:.3} > 0.5, which makes the truncation \
                     certificate vacuous; raise dim to at least {} or shorten r_grid",
                    r_max.ceil()
                ));
            }
        }
        if self.input.is_empty() {
            v.push("input needs at least one [index, value] pair".into());
        }
        for &(k, val) in &self.input {
            if k == 0 || k > self.dim {
                v.push(format!("input index {k} outside 1..={}", self.dim));
            }
            if !val.is_finite() {
                v.push(format!("input value at index {k} is not finite"));
            }
        }
        if self.mode == MeanMode::Opnorm && self.subject != Subject::M {
            v.push("mode \"opnorm\" is only available for subject M".into());
        }
        if let MatrixSource::TMatrix { t } = self.matrix {
            if !(t.is_finite() && t >= 0.0) {
                v.push(format!("matrix.t must be finite and >= 0, got {t}"));
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(CliError::Validation(v))
        }
    }

    pub fn input_vector(&self) -> Result<TruncatedVector> {
        Ok(TruncatedVector::from_sparse(self.dim, &self.input)?)
    }

    /// The power-bounded operator for subject `S`; its dimension must match `dim`.
    pub fn operator(&self) -> Result<PowerBoundedOperator> {
        let matrix = match &self.matrix {
            MatrixSource::Identity => TruncatedOperator::identity(self.dim),
            MatrixSource::TMatrix { t } => matrix_t(*t, self.dim)?,
            MatrixSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                TruncatedOperator::from_matrix_market(&text)?
            }
        };
        if matrix.dim() != self.dim {
            return Err(CliError::validation(format!(
                "matrix has dimension {} but dim is {}; set dim to match the matrix",
                matrix.dim(),
                self.dim
            )));
        }
        Ok(PowerBoundedOperator::with_default_horizon(matrix)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid_and_round_trips() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn partial_json_uses_defaults() {
        let c = ExperimentConfig::from_json(
            r#"{"subject": "M", "N": 32, "r_grid": {"start": 1, "factor": 2, "count": 5}}"#,
        )
        .unwrap();
        assert_eq!(c.subject, Subject::M);
        assert_eq!(c.dim, 32);
        assert_eq!(c.tolerances.convergence_tol, 1e-3);
        c.validate().unwrap();
        assert!(ExperimentConfig::from_json(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn violations_are_listed() {
        let mut c = ExperimentConfig {
            dim: 4,
            ..Default::default()
        };
        c.r_grid.count = 0;
        c.tolerances.quadrature_tol = 0.0;
        c.input = vec![(9, 1.0)];
        let v = c.violations();
        assert_eq!(v.len(), 3, "{v:?}");

        let c = ExperimentConfig {
            dim: 8,
            ..Default::default()
        };
        let v = c.violations();
        assert!(v.iter().any(|m| m.contains("vacuous")), "{v:?}");
    }

    #[test]
    fn grids() {
        let t = LinearGrid {
            start: 0.0,
            stop: 5.0,
            count: 11,
        };
        let p = t.points();
        assert_eq!(p.len(), 11);
        assert_eq!(p[1], 0.5);
        assert_eq!(p[10], 5.0);
        assert_eq!(
            LinearGrid {
                start: 2.0,
                stop: 3.0,
                count: 1
            }
            .points(),
            vec![2.0]
        );
        let g = GeometricGrid {
            start: 1.0,
            factor: 2.0,
            count: 4,
        };
        assert_eq!(g.points().unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
    }
}
