//! The coefficient family `b_{n,t}`.
//!
//! `b_{1,t} = e^{-t}` and `b_{n,t} = e^{-t/n} - e^{-t/(n-1)}` for `n >= 2`.
//! Partial sums telescope, so every sum over a block of indices has a closed
//! form, and so does the time integral of each coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{check_time, LabError, Result};

/// Address `(n, t)` of one coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientQuery {
    n: usize,
    t: f64,
}

impl CoefficientQuery {
    pub fn new(n: usize, t: f64) -> Result<Self> {
        check_index_positive("n", n)?;
        check_time("t", t)?;
        Ok(Self { n, t })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn value(&self) -> f64 {
        b_unchecked(self.n, self.t)
    }

    /// `∫₀^t b_{n,s} ds`.
    pub fn integral(&self) -> f64 {
        integral_b_unchecked(self.n, self.t)
    }
}

fn check_index_positive(name: &str, n: usize) -> Result<()> {
    if n == 0 {
        Err(LabError::Domain(format!("{name} must be >= 1")))
    } else {
        Ok(())
    }
}

/// `b_{n,t}`; always nonnegative.
pub fn b(n: usize, t: f64) -> Result<f64> {
    Ok(CoefficientQuery::new(n, t)?.value())
}

#[inline]
pub(crate) fn b_unchecked(n: usize, t: f64) -> f64 {
    if n == 1 {
        (-t).exp()
    } else {
        // e^{-t/n}(1 - e^{-t/(n(n-1))}) avoids subtracting two close exponentials
        let nf = n as f64;
        (-t / nf).exp() * -(-t / (nf * (nf - 1.0))).exp_m1()
    }
}

/// `Σ_{h=m+1}^n b_{h,t} = e^{-t/n} - e^{-t/m}`.
///
/// `m = 0` is allowed and yields `Σ_{h=1}^n b_{h,t} = e^{-t/n}` for every
/// `t >= 0`, i.e. `e^{-t/0}` is read as `0`.
pub fn partial_sum_b(m: usize, n: usize, t: f64) -> Result<f64> {
    check_time("t", t)?;
    if m >= n {
        return Err(LabError::Domain(format!(
            "partial sum needs m < n, got m={m}, n={n}"
        )));
    }
    let nf = n as f64;
    if m == 0 {
        return Ok((-t / nf).exp());
    }
    let mf = m as f64;
    Ok((-t / nf).exp() * -(-t * (nf - mf) / (mf * nf)).exp_m1())
}

/// `Σ_{h>m} b_{h,t} = 1 - e^{-t/m}`, the ℓ¹ mass of the coefficient tail
/// past index `m`. Bounded above by `t/m`.
pub fn tail_sum_b(m: usize, t: f64) -> Result<f64> {
    check_index_positive("m", m)?;
    check_time("t", t)?;
    Ok(tail_sum_b_unchecked(m, t))
}

#[inline]
pub(crate) fn tail_sum_b_unchecked(m: usize, t: f64) -> f64 {
    -(-t / m as f64).exp_m1()
}

/// `∫₀^r b_{h,s} ds`.
///
/// Equals `1 - e^{-r}` for `h = 1` and
/// `h(1 - e^{-r/h}) - (h-1)(1 - e^{-r/(h-1)})` for `h >= 2`.
pub fn integral_b(h: usize, r: f64) -> Result<f64> {
    Ok(CoefficientQuery::new(h, r)?.integral())
}

pub(crate) fn integral_b_unchecked(h: usize, r: f64) -> f64 {
    if h == 1 {
        return -(-r).exp_m1();
    }
    let hf = h as f64;
    let c = 1.0 / (hf - 1.0);
    let z = r * c;
    if z > 0.5 {
        return hf * -(-r / hf).exp_m1() - (hf - 1.0) * -(-z).exp_m1();
    }
    // Writing φ(a) = (1 - e^{-ra})/a, the integral is φ(1/h) - φ(1/(h-1)).
    // Expanding φ in powers of r and factoring a^m - c^m = -(c - a)·S_{m-1}
    // with S_m = Σ_j a^j c^{m-j} leaves only nonnegative inner sums:
    //   I = δ r² Σ_{k>=2} (-1)^k A_{k-2} / k!,  A_m = r^m S_m,  δ = 1/(h(h-1)).
    let y = r / hf;
    let delta = 1.0 / (hf * (hf - 1.0));
    let mut a_m = 1.0; // A_0
    let mut y_pow = 1.0;
    let mut inv_fact = 0.5; // 1/2!
    let mut sum = 0.0f64;
    for k in 2..64usize {
        let term = a_m * inv_fact;
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
        if term <= 1e-18 * sum.abs() {
            break;
        }
        y_pow *= y;
        a_m = z * a_m + y_pow;
        inv_fact /= (k + 1) as f64;
    }
    delta * r * r * sum
}

/// `e^{-z} - 1 + z`, accurate for small `z`.
pub(crate) fn exp_second_remainder(z: f64) -> f64 {
    if z > 0.5 {
        return (-z).exp_m1() + z;
    }
    let mut term = z * z / 2.0;
    let mut sum = 0.0f64;
    for k in 2..64usize {
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
        term *= -z / (k + 1) as f64;
    }
    sum
}

/// `∫₀^r (1 - e^{-s/m}) ds = r - m(1 - e^{-r/m})`, at most `r²/(2m)`.
pub fn integral_tail_sum_b(m: usize, r: f64) -> Result<f64> {
    check_index_positive("m", m)?;
    check_time("r", r)?;
    let mf = m as f64;
    Ok(mf * exp_second_remainder(r / mf))
}
