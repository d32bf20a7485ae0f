//! The concrete operators on truncated ℓ¹ with the functional `f = (1,1,…)`.
//!
//! * `M(t)` is diagonal with entries `e^{-t/h}`; its generator `A` is
//!   diagonal with entries `-1/h` and `A⁻¹` with entries `-h`.
//! * `N_t x = Σ_h f(P_h x) b_{h+1,t} e_{h+1}`, strictly lower triangular.
//! * `T(t) = M(t) + N_t` with generator `B = A + Ṅ`, where
//!   `Ṅ x = Σ_h f(P_h x)/(h²+h) e_{h+1}`.
//!
//! All `apply_*` functions are matrix-free and run in `O(N)` using prefix
//! sums of the input. Terms whose target index exceeds the truncation are
//! dropped, so every truncated operator here is exactly the compression of
//! the infinite one to the first `N` coordinates. Because all of them are
//! lower triangular, truncations compose exactly as well.
//!
//! Matrices use the column-action convention: column `k` is the image of
//! `e_k`. Displays that act on row vectors show the transpose.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::coeffs::{b_unchecked, tail_sum_b_unchecked};
use crate::error::{check_time, LabError, Result};
use crate::space::{check_same_dim, DualFunctional, TruncatedVector};
use crate::sum::CompensatedSum;

/// Prefix sums `f(P_h x)` for `h = 1..=N`.
fn prefix_sums(x: &TruncatedVector) -> Vec<f64> {
    let mut acc = CompensatedSum::new();
    x.coords()
        .iter()
        .map(|&c| {
            acc.add(c);
            acc.value()
        })
        .collect()
}

pub fn apply_m(t: f64, x: &TruncatedVector) -> Result<TruncatedVector> {
    check_time("t", t)?;
    Ok(TruncatedVector::from_raw(
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| (-t / (i + 1) as f64).exp() * c)
            .collect(),
    ))
}

pub fn apply_a(x: &TruncatedVector) -> TruncatedVector {
    TruncatedVector::from_raw(
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| -c / (i + 1) as f64)
            .collect(),
    )
}

pub fn apply_a_inverse(x: &TruncatedVector) -> TruncatedVector {
    TruncatedVector::from_raw(
        x.coords()
            .iter()
            .enumerate()
            .map(|(i, &c)| -c * (i + 1) as f64)
            .collect(),
    )
}

pub fn apply_n(t: f64, x: &TruncatedVector) -> Result<TruncatedVector> {
    check_time("t", t)?;
    let prefix = prefix_sums(x);
    let mut out = vec![0.0; x.dim()];
    for j in 2..=x.dim() {
        out[j - 1] = prefix[j - 2] * b_unchecked(j, t);
    }
    Ok(TruncatedVector::from_raw(out))
}

pub fn apply_t(t: f64, x: &TruncatedVector) -> Result<TruncatedVector> {
    check_time("t", t)?;
    let prefix = prefix_sums(x);
    let coords = x.coords();
    let mut out = Vec::with_capacity(x.dim());
    out.push((-t).exp() * coords[0]);
    for j in 2..=x.dim() {
        out.push((-t / j as f64).exp() * coords[j - 1] + prefix[j - 2] * b_unchecked(j, t));
    }
    Ok(TruncatedVector::from_raw(out))
}

#[inline]
fn ndot_weight(h: usize) -> f64 {
    let h = h as f64;
    1.0 / (h * (h + 1.0))
}

pub fn apply_ndot(x: &TruncatedVector) -> TruncatedVector {
    let prefix = prefix_sums(x);
    let mut out = vec![0.0; x.dim()];
    for h in 1..x.dim() {
        out[h] = prefix[h - 1] * ndot_weight(h);
    }
    TruncatedVector::from_raw(out)
}

pub fn apply_b(x: &TruncatedVector) -> TruncatedVector {
    let prefix = prefix_sums(x);
    let coords = x.coords();
    let mut out = Vec::with_capacity(x.dim());
    out.push(-coords[0]);
    for j in 2..=x.dim() {
        out.push(-coords[j - 1] / j as f64 + prefix[j - 2] * ndot_weight(j - 1));
    }
    TruncatedVector::from_raw(out)
}

/// `B′ y`, i.e. `(B′y)_k = -y_k/k + Σ_{j>k} y_j/((j-1)j)`.
///
/// Suffix sums are accumulated from the small end with compensation; with
/// `y = f` every entry of the result is `-1/N` to a few ulps.
pub fn apply_b_adjoint(y: &TruncatedVector) -> TruncatedVector {
    let n = y.dim();
    let coords = y.coords();
    let mut out = vec![0.0; n];
    let mut suffix = CompensatedSum::new();
    for k in (1..=n).rev() {
        out[k - 1] = -coords[k - 1] / k as f64 + suffix.value();
        if k >= 2 {
            suffix.add(coords[k - 1] * ndot_weight(k - 1));
        }
    }
    TruncatedVector::from_raw(out)
}

/// ℓ¹ discrepancy bound of `apply_n(t, x)` or `apply_t(t, x)` against the
/// untruncated operator: exactly `|f(x)|·(1 - e^{-t/N})`.
pub fn truncation_error_t(t: f64, x: &TruncatedVector) -> Result<f64> {
    check_time("t", t)?;
    Ok(DualFunctional::ConstantOne.pair(x)?.abs() * tail_sum_b_unchecked(x.dim(), t))
}

/// ℓ¹ discrepancy certificate of a truncated operator, per unit input norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TailBound {
    /// No discrepancy: diagonal operators, or matrices without an infinite parent.
    Exact,
    /// Dropped mass of `N_t`: `‖f‖(1 - e^{-t/N})`.
    CoefficientTail { t: f64 },
    /// Dropped mass of `Ṅ`: `Σ_{h>=N} 1/(h²+h) = 1/N`.
    GeneratorTail,
}

impl TailBound {
    pub fn per_unit_norm(&self, dim: usize) -> f64 {
        match *self {
            TailBound::Exact => 0.0,
            TailBound::CoefficientTail { t } => tail_sum_b_unchecked(dim, t),
            TailBound::GeneratorTail => 1.0 / dim as f64,
        }
    }
}

/// `N×N` sparse matrix in compressed-column form, column-action convention.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOperator {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
    tail: TailBound,
}

impl TruncatedOperator {
    /// Builds from 1-based `(row, col, value)` triples; duplicates accumulate
    /// and exact zeros are dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidInput(
                "truncation dimension must be >= 1".into(),
            ));
        }
        let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for (i, &(row, col, value)) in triplets.iter().enumerate() {
            for index in [row, col] {
                if !(1..=dim).contains(&index) {
                    return Err(LabError::IndexOutOfRange { index, dim });
                }
            }
            if !value.is_finite() {
                return Err(LabError::NonFinite { position: i + 1 });
            }
            columns[col - 1].push((row - 1, value));
        }
        let mut builder = ColumnBuilder::new(dim);
        for mut col in columns {
            col.sort_by_key(|&(r, _)| r);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(col.len());
            for (r, v) in col {
                match merged.last_mut() {
                    Some((last, acc)) if *last == r => *acc += v,
                    _ => merged.push((r, v)),
                }
            }
            builder.push_column(merged.into_iter());
        }
        Ok(builder.finish(TailBound::Exact))
    }

    /// Column-major dense input.
    pub fn from_dense(matrix: &DMatrix<f64>) -> Result<Self> {
        check_same_dim(matrix.nrows(), matrix.ncols())?;
        let mut builder = ColumnBuilder::new(matrix.nrows());
        for col in matrix.column_iter() {
            builder.push_column(col.iter().copied().enumerate());
        }
        Ok(builder.finish(TailBound::Exact))
    }

    /// Dense rows, `rows[i][j]` = entry at (row i+1, column j+1).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        for row in rows {
            check_same_dim(n, row.len())?;
        }
        if n == 0 {
            return Err(LabError::InvalidInput(
                "truncation dimension must be >= 1".into(),
            ));
        }
        Self::from_dense(&DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        let mut builder = ColumnBuilder::new(dim);
        for k in 0..dim {
            builder.push_column(std::iter::once((k, 1.0)));
        }
        builder.finish(TailBound::Exact)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn tail_bound(&self) -> TailBound {
        self.tail
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzero entries of column `k` (1-based) as `(row, value)`, rows ascending.
    pub fn column(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[k - 1]..self.col_ptr[k];
        self.rows[range.clone()]
            .iter()
            .map(|&r| r + 1)
            .zip(self.values[range].iter().copied())
    }

    /// All stored entries as 1-based `(row, col, value)`, column by column.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..=self.dim).flat_map(move |k| self.column(k).map(move |(r, v)| (r, k, v)))
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.column(col)
            .find(|&(r, _)| r == row)
            .map_or(0.0, |(_, v)| v)
    }

    pub fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, x.dim())?;
        let mut out = vec![0.0; self.dim];
        for (k, &xk) in x.coords().iter().enumerate() {
            if xk == 0.0 {
                continue;
            }
            for idx in self.col_ptr[k]..self.col_ptr[k + 1] {
                out[self.rows[idx]] += self.values[idx] * xk;
            }
        }
        // user matrices can overflow
        TruncatedVector::new(out)
    }

    /// Action of the transpose (the adjoint on ℓ^∞ restricted to `N` coordinates).
    pub fn apply_transpose(&self, y: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, y.dim())?;
        let coords = y.coords();
        TruncatedVector::new(
            (1..=self.dim)
                .map(|k| {
                    self.column(k)
                        .map(|(r, v)| v * coords[r - 1])
                        .collect::<CompensatedSum>()
                        .value()
                })
                .collect(),
        )
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (1..=self.dim)
            .map(|k| {
                self.column(k)
                    .map(|(_, v)| v)
                    .collect::<CompensatedSum>()
                    .value()
            })
            .collect()
    }

    /// ℓ¹ operator norm: the largest absolute column sum.
    pub fn norm_l1(&self) -> f64 {
        (1..=self.dim)
            .map(|k| {
                self.column(k)
                    .map(|(_, v)| v.abs())
                    .collect::<CompensatedSum>()
                    .value()
            })
            .fold(0.0, f64::max)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (1..=self.dim).map(|k| self.get(k, k)).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_lower_triangular(&self) -> bool {
        self.triplets().all(|(r, c, _)| r >= c)
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.triplets().all(|(r, c, _)| r <= c)
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.triplets().map(|(r, c, v)| (c, r, v)).collect();
        let mut t = Self::from_triplets(self.dim, &triplets).expect("transpose of a valid matrix");
        t.tail = self.tail;
        t
    }

    /// `self - I`.
    pub fn minus_identity(&self) -> Self {
        let mut triplets: Vec<_> = self.triplets().collect();
        triplets.extend((1..=self.dim).map(|k| (k, k, -1.0)));
        Self::from_triplets(self.dim, &triplets).expect("shift of a valid matrix")
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r - 1, c - 1)] = v;
        }
        m
    }

    /// Row-major dense rows of the stored (column-action) matrix.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let mut rows = vec![vec![0.0; self.dim]; self.dim];
        for (r, c, v) in self.triplets() {
            rows[r - 1][c - 1] = v;
        }
        rows
    }

    /// Copy with one entry overwritten (zero allowed).
    pub fn with_entry(&self, row: usize, col: usize, value: f64) -> Result<Self> {
        let mut triplets: Vec<_> = self
            .triplets()
            .filter(|&(r, c, _)| (r, c) != (row, col))
            .collect();
        triplets.push((row, col, value));
        let mut out = Self::from_triplets(self.dim, &triplets)?;
        out.tail = self.tail;
        Ok(out)
    }

    /// MatrixMarket coordinate text, 1-based, 17 significant digits.
    pub fn to_matrix_market(&self) -> String {
        let mut s = String::new();
        s.push_str("%%MatrixMarket matrix coordinate real general\n");
        s.push_str("% column-action convention: column k is the image of e_k\n");
        let _ = writeln!(s, "{} {} {}", self.dim, self.dim, self.nnz());
        for (r, c, v) in self.triplets() {
            let _ = writeln!(s, "{r} {c} {v:.16e}");
        }
        s
    }

    pub fn from_matrix_market(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
        let (line, header) = lines.next().ok_or(LabError::Parse {
            line: 0,
            message: "missing size line".into(),
        })?;
        let sizes = parse_fields::<usize>(line, header, 3)?;
        let (rows, cols, nnz) = (sizes[0], sizes[1], sizes[2]);
        check_same_dim(rows, cols)?;
        let mut triplets = Vec::with_capacity(nnz);
        for (line, entry) in lines {
            let fields: Vec<&str> = entry.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(parse_error(line, "expected `row col value`"));
            }
            let r = fields[0]
                .parse::<usize>()
                .map_err(|e| parse_error(line, e))?;
            let c = fields[1]
                .parse::<usize>()
                .map_err(|e| parse_error(line, e))?;
            let v = fields[2].parse::<f64>().map_err(|e| parse_error(line, e))?;
            triplets.push((r, c, v));
        }
        if triplets.len() != nnz {
            return Err(LabError::Parse {
                line: 0,
                message: format!("header declares {nnz} entries, found {}", triplets.len()),
            });
        }
        Self::from_triplets(rows, &triplets)
    }

    pub fn to_dense_export(&self, transpose_of_displayed: bool) -> Result<DenseMatrixExport> {
        if self.dim > DenseMatrixExport::MAX_DIM {
            return Err(LabError::InvalidInput(format!(
                "dense export is limited to N <= {}, got {}",
                DenseMatrixExport::MAX_DIM,
                self.dim
            )));
        }
        Ok(DenseMatrixExport {
            dim: self.dim,
            convention: "column_action".into(),
            transpose_of_displayed,
            rows: self.to_rows(),
        })
    }
}

fn parse_error(line: usize, e: impl std::fmt::Display) -> LabError {
    LabError::Parse {
        line,
        message: e.to_string(),
    }
}

fn parse_fields<T: std::str::FromStr>(line: usize, text: &str, count: usize) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let fields: Vec<T> = text
        .split_whitespace()
        .map(|f| f.parse::<T>().map_err(|e| parse_error(line, e)))
        .collect::<Result<_>>()?;
    if fields.len() != count {
        return Err(parse_error(line, format!("expected {count} fields")));
    }
    Ok(fields)
}

struct ColumnBuilder {
    dim: usize,
    col_ptr: Vec<usize>,
    rows: Vec<usize>,
    values: Vec<f64>,
}

impl ColumnBuilder {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            col_ptr: vec![0],
            rows: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Entries must come with 0-based rows in ascending order.
    fn push_column(&mut self, entries: impl Iterator<Item = (usize, f64)>) {
        for (r, v) in entries {
            if v != 0.0 {
                self.rows.push(r);
                self.values.push(v);
            }
        }
        self.col_ptr.push(self.rows.len());
    }

    fn finish(self, tail: TailBound) -> TruncatedOperator {
        debug_assert_eq!(self.col_ptr.len(), self.dim + 1);
        TruncatedOperator {
            dim: self.dim,
            col_ptr: self.col_ptr,
            rows: self.rows,
            values: self.values,
            tail,
        }
    }
}

/// Dense JSON form of a small matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrixExport {
    pub dim: usize,
    pub convention: String,
    /// The stored matrix is the transpose of the conventional row-vector display.
    pub transpose_of_displayed: bool,
    pub rows: Vec<Vec<f64>>,
}

impl DenseMatrixExport {
    pub const MAX_DIM: usize = 64;
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        Err(LabError::InvalidInput(
            "truncation dimension must be >= 1".into(),
        ))
    } else {
        Ok(())
    }
}

fn diagonal_operator(
    dim: usize,
    entry: impl Fn(usize) -> f64,
    tail: TailBound,
) -> TruncatedOperator {
    let mut builder = ColumnBuilder::new(dim);
    for k in 1..=dim {
        builder.push_column(std::iter::once((k - 1, entry(k))));
    }
    builder.finish(tail)
}

/// Lower triangular operator with column `k` = `diag(k)` at row `k` and
/// `below(j)` at rows `j > k`.
fn lower_operator(
    dim: usize,
    diag: impl Fn(usize) -> f64,
    below: impl Fn(usize) -> f64,
    tail: TailBound,
) -> TruncatedOperator {
    let weights: Vec<f64> = (1..=dim)
        .map(|j| if j >= 2 { below(j) } else { 0.0 })
        .collect();
    let mut builder = ColumnBuilder::new(dim);
    for k in 1..=dim {
        let column = std::iter::once((k - 1, diag(k)))
            .chain(((k + 1)..=dim).map(|j| (j - 1, weights[j - 1])));
        builder.push_column(column);
    }
    builder.finish(tail)
}

pub fn matrix_m(t: f64, dim: usize) -> Result<TruncatedOperator> {
    check_time("t", t)?;
    check_dim(dim)?;
    Ok(diagonal_operator(
        dim,
        |h| (-t / h as f64).exp(),
        TailBound::Exact,
    ))
}

pub fn matrix_a(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    Ok(diagonal_operator(
        dim,
        |h| -1.0 / h as f64,
        TailBound::Exact,
    ))
}

pub fn matrix_a_inverse(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    Ok(diagonal_operator(dim, |h| -(h as f64), TailBound::Exact))
}

pub fn matrix_n(t: f64, dim: usize) -> Result<TruncatedOperator> {
    check_time("t", t)?;
    check_dim(dim)?;
    Ok(lower_operator(
        dim,
        |_| 0.0,
        |j| b_unchecked(j, t),
        TailBound::CoefficientTail { t },
    ))
}

pub fn matrix_t(t: f64, dim: usize) -> Result<TruncatedOperator> {
    check_time("t", t)?;
    check_dim(dim)?;
    Ok(lower_operator(
        dim,
        |k| (-t / k as f64).exp(),
        |j| b_unchecked(j, t),
        TailBound::CoefficientTail { t },
    ))
}

pub fn matrix_ndot(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    Ok(lower_operator(
        dim,
        |_| 0.0,
        |j| ndot_weight(j - 1),
        TailBound::GeneratorTail,
    ))
}

/// The generator `B` as a matrix: column `k` holds `-1/k` on the diagonal and
/// `1/((j-1)j)` at every row `j > k`.
pub fn matrix_b(dim: usize) -> Result<TruncatedOperator> {
    check_dim(dim)?;
    Ok(lower_operator(
        dim,
        |k| -1.0 / k as f64,
        |j| ndot_weight(j - 1),
        TailBound::GeneratorTail,
    ))
}

/// Solution set of `Bx = 0` at truncation `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelResult {
    pub is_trivial: bool,
    pub witness: Option<TruncatedVector>,
}

/// Solves `Bx = 0` by forward substitution.
///
/// Row 1 forces `x_1 = 0`; row `k` reads `x_k = f(P_{k-1}x)/(k-1)`, so once
/// `P_{k-1}x = 0` also `x_k = 0`. The running prefix sum makes this `O(N)`.
pub fn kernel_b(dim: usize) -> Result<KernelResult> {
    check_dim(dim)?;
    let mut x = vec![0.0; dim];
    let mut prefix = CompensatedSum::new();
    for k in 1..=dim {
        x[k - 1] = if k == 1 {
            0.0
        } else {
            prefix.value() / (k - 1) as f64
        };
        prefix.add(x[k - 1]);
    }
    let x = TruncatedVector::from_raw(x);
    let is_trivial = x.is_zero();
    Ok(KernelResult {
        is_trivial,
        witness: (!is_trivial).then_some(x),
    })
}

/// Kernel of a lower triangular matrix by forward substitution.
///
/// If some pivot vanishes, the last zero pivot `p` gives a witness: `x_i = 0`
/// for `i < p`, `x_p = 1`, and the remaining rows are solved forward.
pub fn lower_triangular_kernel(op: &TruncatedOperator) -> Result<KernelResult> {
    if !op.is_lower_triangular() {
        return Err(LabError::InvalidInput(
            "matrix is not lower triangular".into(),
        ));
    }
    let n = op.dim();
    let diag = op.diagonal();
    let Some(p) = (1..=n).rev().find(|&k| diag[k - 1] == 0.0) else {
        return Ok(KernelResult {
            is_trivial: true,
            witness: None,
        });
    };
    // residual[j] accumulates Σ_{k<j} B_{jk} x_k
    let mut residual = vec![0.0; n];
    let mut x = vec![0.0; n];
    for k in p..=n {
        x[k - 1] = if k == p {
            1.0
        } else {
            -residual[k - 1] / diag[k - 1]
        };
        for (r, v) in op.column(k).filter(|&(r, _)| r > k) {
            residual[r - 1] += v * x[k - 1];
        }
    }
    Ok(KernelResult {
        is_trivial: false,
        witness: Some(TruncatedVector::from_raw(x)),
    })
}

/// A linear map on a fixed truncation.
pub trait LinearMap: Sync {
    fn dim(&self) -> usize;

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector>;

    /// The diagonal, when the map is known to be (upper or lower) triangular.
    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        None
    }

    /// Dense matrix obtained by applying the map to each basis vector.
    fn to_dense(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for k in 1..=n {
            let col = self.apply(&TruncatedVector::basis(k, n)?)?;
            m.set_column(k - 1, &nalgebra::DVector::from_column_slice(col.coords()));
        }
        Ok(m)
    }
}

impl LinearMap for TruncatedOperator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        TruncatedOperator::apply(self, x)
    }

    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        (self.is_lower_triangular() || self.is_upper_triangular()).then(|| self.diagonal())
    }

    fn to_dense(&self) -> Result<DMatrix<f64>> {
        Ok(TruncatedOperator::to_dense(self))
    }
}

/// The transpose of a stored matrix, without materializing it.
#[derive(Debug, Clone, Copy)]
pub struct Transposed<'a>(pub &'a TruncatedOperator);

impl LinearMap for Transposed<'_> {
    fn dim(&self) -> usize {
        self.0.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        self.0.apply_transpose(x)
    }

    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        LinearMap::triangular_diagonal(self.0)
    }

    fn to_dense(&self) -> Result<DMatrix<f64>> {
        Ok(self.0.to_dense().transpose())
    }
}

/// Matrix-free generator `A` (diagonal, hence self-adjoint).
#[derive(Debug, Clone, Copy)]
pub struct GeneratorA {
    pub dim: usize,
}

impl LinearMap for GeneratorA {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, x.dim())?;
        Ok(apply_a(x))
    }

    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        Some((1..=self.dim).map(|h| -1.0 / h as f64).collect())
    }
}

/// Matrix-free generator `B`.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorB {
    pub dim: usize,
}

impl LinearMap for GeneratorB {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, x.dim())?;
        Ok(apply_b(x))
    }

    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        Some((1..=self.dim).map(|h| -1.0 / h as f64).collect())
    }
}

/// Matrix-free `B′`.
#[derive(Debug, Clone, Copy)]
pub struct GeneratorBAdjoint {
    pub dim: usize,
}

impl LinearMap for GeneratorBAdjoint {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, x.dim())?;
        Ok(apply_b_adjoint(x))
    }

    fn triangular_diagonal(&self) -> Option<Vec<f64>> {
        Some((1..=self.dim).map(|h| -1.0 / h as f64).collect())
    }
}

/// Adapts a closure to [`LinearMap`].
pub struct FnMap<F> {
    dim: usize,
    map: F,
}

impl<F> FnMap<F>
where
    F: Fn(&TruncatedVector) -> Result<TruncatedVector> + Sync,
{
    pub fn new(dim: usize, map: F) -> Self {
        Self { dim, map }
    }
}

impl<F> LinearMap for FnMap<F>
where
    F: Fn(&TruncatedVector) -> Result<TruncatedVector> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &TruncatedVector) -> Result<TruncatedVector> {
        check_same_dim(self.dim, x.dim())?;
        (self.map)(x)
    }
}
