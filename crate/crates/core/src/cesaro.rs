//! Cesàro means `C(r)x = (1/r)∫₀^r T(s)x ds`.
//!
//! The means of `M` and `T` have closed forms built from
//! `∫₀^r e^{-s/h} ds = h(1 - e^{-r/h})` and [`integral_b`](crate::coeffs::integral_b);
//! those are the production path. Adaptive Simpson quadrature is kept as an
//! independent oracle and as the only route for `S`.

use std::io;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coeffs::{exp_second_remainder, integral_b_unchecked};
use crate::error::{check_positive, LabError, Result};
use crate::exp_semigroup::PowerBoundedOperator;
use crate::space::{DualFunctional, TruncatedVector};
use crate::sum::CompensatedSum;

/// `(h/r)(1 - e^{-r/h})`, the mean of `s ↦ e^{-s/h}` over `[0, r]`.
#[inline]
fn mean_exp(h: usize, r: f64) -> f64 {
    let z = r / h as f64;
    -(-z).exp_m1() / z
}

pub fn cesaro_m(r: f64, x: &TruncatedVector) -> Result<TruncatedVector> {
    check_positive("r", r)?;
    Ok(TruncatedVector::from_raw(
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| mean_exp(i + 1, r) * c)
            .collect(),
    ))
}

/// Exact ℓ¹ operator norm of `C_M(r)` at truncation `N`: `max_{h≤N} (h/r)(1-e^{-r/h})`.
pub fn cesaro_m_opnorm(r: f64, dim: usize) -> Result<f64> {
    check_positive("r", r)?;
    if dim == 0 {
        return Err(LabError::InvalidInput(
            "truncation dimension must be >= 1".into(),
        ));
    }
    Ok((1..=dim).map(|h| mean_exp(h, r)).fold(0.0, f64::max))
}

/// Closed-form mean of `T`: the `M` part plus
/// `(1/r) Σ_h f(P_h x)·∫₀^r b_{h+1,s} ds · e_{h+1}`, truncated at `N`.
pub fn cesaro_t(r: f64, x: &TruncatedVector) -> Result<TruncatedVector> {
    check_positive("r", r)?;
    let coords = x.coords();
    let mut prefix = CompensatedSum::new();
    let mut out = Vec::with_capacity(x.dim());
    for (i, &c) in coords.iter().enumerate() {
        let j = i + 1;
        let escaped = if j >= 2 {
            prefix.value() * integral_b_unchecked(j, r) / r
        } else {
            0.0
        };
        out.push(mean_exp(j, r) * c + escaped);
        prefix.add(c);
    }
    Ok(TruncatedVector::from_raw(out))
}

/// ℓ¹ truncation certificate of [`cesaro_t`]:
/// `‖x‖₁·(1/r)∫₀^r (1 - e^{-s/N}) ds ≤ ‖x‖₁·r/(2N)`.
pub fn cesaro_t_truncation_error(r: f64, x: &TruncatedVector) -> Result<f64> {
    check_positive("r", r)?;
    let n = x.dim() as f64;
    Ok(x.norm_l1() * n * exp_second_remainder(r / n) / r)
}

/// Result of a vector-valued quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub value: Vec<f64>,
    /// Estimated ℓ¹ error of `value`.
    pub error_estimate: f64,
    pub evaluations: usize,
}

pub const DEFAULT_EVALUATION_BUDGET: usize = 1 << 20;
const INITIAL_PANELS: usize = 8;

struct Panel {
    a: f64,
    b: f64,
    fa: Vec<f64>,
    fm: Vec<f64>,
    fb: Vec<f64>,
    whole: Vec<f64>,
    tol: f64,
    /// Share of the parent's error estimate, infinite for initial panels.
    err_hint: f64,
}

fn simpson(width: f64, fa: &[f64], fm: &[f64], fb: &[f64]) -> Vec<f64> {
    fa.iter()
        .zip(fm)
        .zip(fb)
        .map(|((a, m), b)| width / 6.0 * (a + 4.0 * m + b))
        .collect()
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Adaptive Simpson quadrature of a vector-valued integrand over `[a, b]`,
/// bisecting until the ℓ¹ Richardson error estimate is below `tol`.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64, budget: usize) -> Result<Quadrature>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    check_positive("tol", tol)?;
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(LabError::Domain(format!(
            "need a finite interval a < b, got [{a}, {b}]"
        )));
    }
    let count = std::cell::Cell::new(0usize);
    let eval = |s: f64| {
        count.set(count.get() + 1);
        f(s)
    };
    let width = (b - a) / INITIAL_PANELS as f64;
    let mut nodes = Vec::with_capacity(2 * INITIAL_PANELS + 1);
    for i in 0..=2 * INITIAL_PANELS {
        let s = if i == 2 * INITIAL_PANELS {
            b
        } else {
            a + 0.5 * width * i as f64
        };
        nodes.push((s, eval(s)?));
    }
    let dim = nodes[0].1.len();
    let mut stack: Vec<Panel> = (0..INITIAL_PANELS)
        .rev()
        .map(|p| {
            let (pa, fa) = &nodes[2 * p];
            let (_, fm) = &nodes[2 * p + 1];
            let (pb, fb) = &nodes[2 * p + 2];
            Panel {
                a: *pa,
                b: *pb,
                whole: simpson(pb - pa, fa, fm, fb),
                fa: fa.clone(),
                fm: fm.clone(),
                fb: fb.clone(),
                tol: tol / INITIAL_PANELS as f64,
                err_hint: f64::INFINITY,
            }
        })
        .collect();

    let mut total = vec![CompensatedSum::new(); dim];
    let mut error = 0.0;
    let min_width = (b - a) * 1e-14;
    while let Some(p) = stack.pop() {
        let evaluations = count.get();
        if evaluations + 2 > budget {
            let mut estimate: Vec<f64> = total.iter().map(|s| s.value()).collect();
            let mut achieved = error;
            for q in std::iter::once(&p).chain(stack.iter()) {
                for (e, w) in estimate.iter_mut().zip(&q.whole) {
                    *e += w;
                }
                achieved += q.err_hint;
            }
            return Err(LabError::Convergence {
                estimate,
                achieved,
                evaluations,
            });
        }
        let mid = 0.5 * (p.a + p.b);
        let fl = eval(0.5 * (p.a + mid))?;
        let fr = eval(0.5 * (mid + p.b))?;
        let left = simpson(mid - p.a, &p.fa, &fl, &p.fm);
        let right = simpson(p.b - mid, &p.fm, &fr, &p.fb);
        let refined: Vec<f64> = left.iter().zip(&right).map(|(l, r)| l + r).collect();
        let diff = l1_diff(&refined, &p.whole);
        if diff <= 15.0 * p.tol || p.b - p.a <= min_width {
            for ((acc, r), w) in total.iter_mut().zip(&refined).zip(&p.whole) {
                acc.add(r + (r - w) / 15.0);
            }
            error += diff / 15.0;
        } else {
            let half = 0.5 * p.tol;
            let err_hint = diff / 30.0;
            stack.push(Panel {
                a: mid,
                b: p.b,
                fa: p.fm.clone(),
                fm: fr,
                fb: p.fb,
                whole: right,
                tol: half,
                err_hint,
            });
            stack.push(Panel {
                a: p.a,
                b: mid,
                fa: p.fa,
                fm: fl,
                fb: p.fm,
                whole: left,
                tol: half,
                err_hint,
            });
        }
    }
    let value: Vec<f64> = total.iter().map(|s| s.value()).collect();
    let evaluations = count.get();
    if error > tol {
        return Err(LabError::Convergence {
            estimate: value,
            achieved: error,
            evaluations,
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: error,
        evaluations,
    })
}

/// `(1/r)∫₀^r semigroup(s, x) ds` by adaptive Simpson; `tol` bounds the ℓ¹
/// error of the mean, hence of every coordinate.
pub fn cesaro_quadrature<F>(
    semigroup: F,
    r: f64,
    x: &TruncatedVector,
    tol: f64,
) -> Result<TruncatedVector>
where
    F: Fn(f64, &TruncatedVector) -> Result<TruncatedVector>,
{
    check_positive("r", r)?;
    check_positive("tol", tol)?;
    let q = adaptive_simpson(
        |s| semigroup(s, x).map(Vec::from),
        0.0,
        r,
        tol * r,
        DEFAULT_EVALUATION_BUDGET,
    )
    .map_err(|e| match e {
        LabError::Convergence {
            estimate,
            achieved,
            evaluations,
        } => LabError::Convergence {
            estimate: estimate.into_iter().map(|v| v / r).collect(),
            achieved: achieved / r,
            evaluations,
        },
        other => other,
    })?;
    TruncatedVector::new(q.value.into_iter().map(|v| v / r).collect())
}

/// Mean of `S(t) = e^{-t}e^{tT}`, by quadrature over [`PowerBoundedOperator::apply_s`].
pub fn cesaro_s(
    r: f64,
    x: &TruncatedVector,
    op: &PowerBoundedOperator,
    tol: f64,
) -> Result<TruncatedVector> {
    check_positive("tol", tol)?;
    let inner = 0.1 * tol;
    cesaro_quadrature(|s, v| op.apply_s(s, v, inner), r, x, 0.9 * tol)
}

/// `r_j = start·factor^j` for `j = 0..count`.
pub fn geometric_grid(start: f64, factor: f64, count: usize) -> Result<Vec<f64>> {
    check_positive("start", start)?;
    if !(factor.is_finite() && factor > 1.0) {
        return Err(LabError::Domain(format!(
            "grid factor must be > 1, got {factor}"
        )));
    }
    Ok((0..count).map(|j| start * factor.powi(j as i32)).collect())
}

/// Default spacing `r₀·2^{j/2}`.
pub fn default_grid(start: f64, count: usize) -> Result<Vec<f64>> {
    geometric_grid(start, std::f64::consts::SQRT_2, count)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveMode {
    /// Samples are the vectors `C(r)x`.
    Vector,
    /// Samples are operator norms `‖C(r)‖`.
    OperatorNorm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    /// `‖C(r)x‖₁` in vector mode, `‖C(r)‖` in norm mode.
    pub value: f64,
    pub trunc_error: f64,
    pub max_coordinate: Option<f64>,
    pub max_index: Option<usize>,
    pub median_index: Option<usize>,
    pub f_value: Option<f64>,
}

/// Sampled `r ↦ C(r)x` or `r ↦ ‖C(r)‖`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroCurve {
    mode: CurveMode,
    points: Vec<CurvePoint>,
    #[serde(skip)]
    vectors: Vec<TruncatedVector>,
    warnings: Vec<String>,
}

fn check_grid(r_grid: &[f64]) -> Result<()> {
    if r_grid.is_empty() {
        return Err(LabError::InvalidInput("r grid is empty".into()));
    }
    if r_grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(LabError::InvalidInput(
            "r grid values must be finite and > 0".into(),
        ));
    }
    if r_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::InvalidInput(
            "r grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_errors(errors: &[f64]) -> Result<()> {
    if errors.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
        return Err(LabError::InvalidInput(
            "truncation errors must be finite and >= 0".into(),
        ));
    }
    Ok(())
}

impl CesaroCurve {
    pub fn from_vectors(
        r_grid: &[f64],
        vectors: Vec<TruncatedVector>,
        trunc_errors: Vec<f64>,
    ) -> Result<Self> {
        check_grid(r_grid)?;
        check_errors(&trunc_errors)?;
        if vectors.len() != r_grid.len() || trunc_errors.len() != r_grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: r_grid.len(),
                found: vectors.len(),
            });
        }
        let f = DualFunctional::ConstantOne;
        let points = r_grid
            .iter()
            .zip(&vectors)
            .zip(&trunc_errors)
            .map(|((&r, v), &trunc_error)| {
                let (max_index, max_coordinate) = v.max_coordinate();
                Ok(CurvePoint {
                    r,
                    value: v.norm_l1(),
                    trunc_error,
                    max_coordinate: Some(max_coordinate),
                    max_index: Some(max_index),
                    median_index: v.median_index(),
                    f_value: Some(f.pair(v)?),
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            mode: CurveMode::Vector,
            points,
            vectors,
            warnings: Vec::new(),
        })
    }

    pub fn from_norms(r_grid: &[f64], norms: Vec<f64>, trunc_errors: Vec<f64>) -> Result<Self> {
        check_grid(r_grid)?;
        check_errors(&trunc_errors)?;
        if norms.len() != r_grid.len() || trunc_errors.len() != r_grid.len() {
            return Err(LabError::DimensionMismatch {
                expected: r_grid.len(),
                found: norms.len(),
            });
        }
        let points = r_grid
            .iter()
            .zip(norms)
            .zip(trunc_errors)
            .map(|((&r, value), trunc_error)| CurvePoint {
                r,
                value,
                trunc_error,
                max_coordinate: None,
                max_index: None,
                median_index: None,
                f_value: None,
            })
            .collect();
        Ok(Self {
            mode: CurveMode::OperatorNorm,
            points,
            vectors: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub fn mode(&self) -> CurveMode {
        self.mode
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    /// Sampled vectors (empty in norm mode).
    pub fn vectors(&self) -> &[TruncatedVector] {
        &self.vectors
    }

    pub fn r_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.r).collect()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn push_warning(&mut self, warning: impl Into<String>) {
        self.warnings.push(warning.into());
    }

    /// CSV with columns `r, value_or_norm, trunc_error, max_coordinate, f_value`,
    /// 17 significant digits, empty fields where a column does not apply.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record([
            "r",
            "value_or_norm",
            "trunc_error",
            "max_coordinate",
            "f_value",
        ])?;
        let opt = |v: Option<f64>| v.map(format_sci).unwrap_or_default();
        for p in &self.points {
            w.write_record([
                format_sci(p.r),
                format_sci(p.value),
                format_sci(p.trunc_error),
                opt(p.max_coordinate),
                opt(p.f_value),
            ])?;
        }
        w.flush()
    }
}

/// Full-precision scientific notation (17 significant digits).
pub fn format_sci(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn curve_m(r_grid: &[f64], x: &TruncatedVector) -> Result<CesaroCurve> {
    check_grid(r_grid)?;
    let vectors = r_grid
        .par_iter()
        .map(|&r| cesaro_m(r, x))
        .collect::<Result<Vec<_>>>()?;
    CesaroCurve::from_vectors(r_grid, vectors, vec![0.0; r_grid.len()])
}

pub fn curve_m_opnorm(r_grid: &[f64], dim: usize) -> Result<CesaroCurve> {
    check_grid(r_grid)?;
    let norms = r_grid
        .par_iter()
        .map(|&r| cesaro_m_opnorm(r, dim))
        .collect::<Result<Vec<_>>>()?;
    CesaroCurve::from_norms(r_grid, norms, vec![0.0; r_grid.len()])
}

pub fn curve_t(r_grid: &[f64], x: &TruncatedVector) -> Result<CesaroCurve> {
    check_grid(r_grid)?;
    let samples = r_grid
        .par_iter()
        .map(|&r| Ok((cesaro_t(r, x)?, cesaro_t_truncation_error(r, x)?)))
        .collect::<Result<Vec<_>>>()?;
    let (vectors, errors) = samples.into_iter().unzip();
    CesaroCurve::from_vectors(r_grid, vectors, errors)
}

/// Mean curve of `S`; the per-sample error column carries the quadrature tolerance.
pub fn curve_s(
    r_grid: &[f64],
    x: &TruncatedVector,
    op: &PowerBoundedOperator,
    tol: f64,
) -> Result<CesaroCurve> {
    check_grid(r_grid)?;
    let vectors = r_grid
        .par_iter()
        .map(|&r| cesaro_s(r, x, op, tol))
        .collect::<Result<Vec<_>>>()?;
    CesaroCurve::from_vectors(r_grid, vectors, vec![tol; r_grid.len()])
}
