//! Exponential semigroups `S(t) = e^{-t} e^{tT}` of power-bounded matrices.
//!
//! `S` is generated by `G = T - I`. Under the renorm
//! `|||x||| = sup_n ‖Tⁿx‖₁` the matrix `T` is a contraction, hence
//! `|||S(t)||| ≤ e^{t(|||T|||-1)} ≤ 1`. The supremum is taken over
//! `n = 0..=horizon`, so the renorm always dominates `‖·‖₁`.

use rayon::prelude::*;

use crate::error::{check_positive, check_time, LabError, Result};
use crate::semigroups::TruncatedOperator;
use crate::space::{check_same_dim, TruncatedVector};

/// Longest time step of a single Taylor expansion.
const MAX_STEP: f64 = 1.0;

#[derive(Debug, Clone)]
pub struct PowerBoundedOperator {
    matrix: TruncatedOperator,
    power_bound: f64,
    horizon: usize,
}

impl PowerBoundedOperator {
    pub const DEFAULT_HORIZON: usize = 256;

    /// Estimates `sup_{n≤horizon} ‖Tⁿ‖₁` column by column.
    pub fn new(matrix: TruncatedOperator, horizon: usize) -> Result<Self> {
        if horizon == 0 {
            return Err(LabError::InvalidInput("renorm horizon must be >= 1".into()));
        }
        let n = matrix.dim();
        let power_bound = (1..=n)
            .into_par_iter()
            .map(|k| {
                let e = TruncatedVector::basis(k, n)?;
                Ok(max_power_norm(&matrix, &e, horizon))
            })
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(1.0, f64::max);
        if !power_bound.is_finite() {
            return Err(LabError::InvalidInput(format!(
                "powers of the matrix overflow within horizon {horizon}; not power bounded"
            )));
        }
        Ok(Self {
            matrix,
            power_bound,
            horizon,
        })
    }

    pub fn with_default_horizon(matrix: TruncatedOperator) -> Result<Self> {
        Self::new(matrix, Self::DEFAULT_HORIZON)
    }

    pub fn matrix(&self) -> &TruncatedOperator {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn power_bound(&self) -> f64 {
        self.power_bound
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `‖Tⁿx‖₁` for `n = 0..=horizon`.
    pub fn power_norms(&self, x: &TruncatedVector) -> Result<Vec<f64>> {
        check_same_dim(self.dim(), x.dim())?;
        let mut norms = Vec::with_capacity(self.horizon + 1);
        let mut v = x.clone();
        norms.push(v.norm_l1());
        for _ in 0..self.horizon {
            v = self.matrix.apply(&v)?;
            norms.push(v.norm_l1());
        }
        Ok(norms)
    }

    /// `|||x||| = max_{0≤n≤horizon} ‖Tⁿx‖₁`.
    pub fn renorm(&self, x: &TruncatedVector) -> Result<f64> {
        Ok(self.power_norms(x)?.into_iter().fold(0.0, f64::max))
    }

    /// True when the last 10% of powers do not raise the running maximum.
    pub fn horizon_stabilized(&self, x: &TruncatedVector) -> Result<bool> {
        let norms = self.power_norms(x)?;
        let cut = norms.len() - (norms.len() / 10).max(1);
        let head = norms[..cut].iter().copied().fold(0.0, f64::max);
        let tail = norms[cut..].iter().copied().fold(0.0, f64::max);
        Ok(tail <= head)
    }

    /// `S(t)x = e^{-t} Σ_j (t^j/j!) T^j x` to ℓ¹ accuracy `tol`.
    ///
    /// Long times are split as `S(t) = S(t/m)^m` with steps at most one time
    /// unit. Each step stops once the Taylor remainder bound
    /// `e^{-τ}·K‖x‖·τ^{J+1}/(J+1)!·1/(1-τ/(J+2))` is below `tol/(mK)`;
    /// since `‖S(τ)^i‖ ≤ K`, the accumulated error stays below `tol`.
    pub fn apply_s(&self, t: f64, x: &TruncatedVector, tol: f64) -> Result<TruncatedVector> {
        check_time("t", t)?;
        check_positive("tol", tol)?;
        check_same_dim(self.dim(), x.dim())?;
        if t == 0.0 {
            return Ok(x.clone());
        }
        let steps = (t / MAX_STEP).ceil().max(1.0) as usize;
        let tau = t / steps as f64;
        let step_tol = tol / (steps as f64 * self.power_bound);
        let mut v = x.clone();
        for _ in 0..steps {
            v = self.taylor_step(tau, &v, step_tol)?;
        }
        Ok(v)
    }

    fn taylor_step(&self, tau: f64, x: &TruncatedVector, tol: f64) -> Result<TruncatedVector> {
        let scale = (-tau).exp();
        let bound = scale * self.power_bound * x.norm_l1();
        let mut acc = x.clone();
        let mut term = x.clone();
        // c = τ^j / j!
        let mut c = 1.0;
        for j in 1.. {
            term = self.matrix.apply(&term)?.scale(tau / j as f64);
            acc.axpy(1.0, &term)?;
            c *= tau / j as f64;
            let next = (j + 2) as f64;
            if next > tau {
                let remainder = bound * c * tau / (j + 1) as f64 / (1.0 - tau / next);
                if remainder < tol {
                    break;
                }
            }
        }
        Ok(acc.scale(scale))
    }

    /// `‖S(t+s)x − S(t)S(s)x‖₁`.
    pub fn semigroup_defect_s(&self, t: f64, s: f64, x: &TruncatedVector, tol: f64) -> Result<f64> {
        check_time("s", s)?;
        let joint = self.apply_s(t + s, x, tol)?;
        let split = self.apply_s(t, &self.apply_s(s, x, tol)?, tol)?;
        joint.distance_l1(&split)
    }

    /// Lower estimate of `|||S(t)|||`: the largest ratio `|||S(t)x|||/|||x|||`
    /// over every basis vector and the supplied probes.
    pub fn renorm_opnorm_estimate(
        &self,
        t: f64,
        tol: f64,
        probes: &[TruncatedVector],
    ) -> Result<f64> {
        let n = self.dim();
        let basis = (1..=n)
            .map(|k| TruncatedVector::basis(k, n))
            .collect::<Result<Vec<_>>>()?;
        basis
            .par_iter()
            .chain(probes.par_iter())
            .map(|x| {
                let denom = self.renorm(x)?;
                if denom == 0.0 {
                    return Ok(0.0);
                }
                Ok(self.renorm(&self.apply_s(t, x, tol)?)? / denom)
            })
            .collect::<Result<Vec<f64>>>()
            .map(|r| r.into_iter().fold(0.0, f64::max))
    }
}

fn max_power_norm(matrix: &TruncatedOperator, x: &TruncatedVector, horizon: usize) -> f64 {
    let mut v = x.clone();
    let mut best = v.norm_l1();
    for _ in 0..horizon {
        v = match matrix.apply(&v) {
            Ok(next) => next,
            Err(_) => return f64::INFINITY,
        };
        let norm = v.norm_l1();
        if !norm.is_finite() {
            return f64::INFINITY;
        }
        best = best.max(norm);
    }
    best
}
