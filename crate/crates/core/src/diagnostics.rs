//! Ergodicity verdicts from finite-truncation evidence.
//!
//! Every truncation of `M` or `T` is a matrix and therefore uniformly mean
//! ergodic. Statements about the infinite-dimensional semigroups are made
//! through quantities that scale with `N`: the adjoint residual `B′f = -1/N`,
//! the operator-norm floor `1 - 1/e` of the means of `M` for `r ≤ N`, and
//! the escape of mass of `C_T(r)e_1` to ever higher coordinates while the
//! conserved functional `f` stays at 1.

use serde::{Deserialize, Serialize};

use crate::cesaro::{
    cesaro_m_opnorm, cesaro_t, cesaro_t_truncation_error, curve_t, CesaroCurve, CurveMode,
};
use crate::error::{LabError, Result};
use crate::exp_semigroup::PowerBoundedOperator;
use crate::linalg::{numerical_kernels, separates};
use crate::semigroups::{
    kernel_b, matrix_a, matrix_a_inverse, GeneratorA, GeneratorB, GeneratorBAdjoint, LinearMap,
    Transposed,
};
use crate::space::{DualFunctional, TruncatedVector};

/// `1 - 1/e`, the floor of `‖C_M(r)‖` for `r ≤ N`.
pub const OPNORM_FLOOR: f64 = 0.632_120_558_828_557_7;

/// Lower-bound threshold for divergence witnesses of [`cauchy_convergence_test`].
pub const DIVERGENCE_FLOOR: f64 = 0.5;

/// Largest dimension for which dense SVD kernels are attempted.
pub const MAX_DENSE_DIM: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subject {
    M,
    T,
    S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictKind {
    Converges,
    Diverges,
    Inconclusive,
}

/// One named numerical fact. `bound` is the threshold the value is compared
/// against; the name says in which direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub name: String,
    pub value: f64,
    pub bound: Option<f64>,
    /// The criterion the fact feeds; serialized under the schema key `paper_ref`.
    #[serde(rename = "paper_ref")]
    pub criterion: String,
}

impl Evidence {
    pub fn new(
        name: impl Into<String>,
        value: f64,
        bound: Option<f64>,
        criterion: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            criterion: criterion.into(),
        }
    }

    /// A lower-bound witness: `value ≥ bound`.
    pub fn lower_bound(
        name: impl Into<String>,
        value: f64,
        bound: f64,
        criterion: impl Into<String>,
    ) -> Self {
        Self::new(name, value, Some(bound), criterion)
    }

    pub fn is_lower_bound_witness(&self) -> bool {
        self.bound.is_some_and(|b| self.value >= b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdicts {
    pub mean: VerdictKind,
    pub uniform: VerdictKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErgodicityReport {
    pub subject: Subject,
    pub truncation: usize,
    pub verdicts: Verdicts,
    pub evidence: Vec<Evidence>,
    pub caveats: Vec<String>,
}

impl ErgodicityReport {
    /// Rejects reports without evidence, and `Diverges` verdicts without a
    /// lower-bound witness among the evidence.
    pub fn new(
        subject: Subject,
        truncation: usize,
        verdicts: Verdicts,
        evidence: Vec<Evidence>,
        caveats: Vec<String>,
    ) -> Result<Self> {
        if evidence.is_empty() {
            return Err(LabError::InvalidInput(
                "a verdict needs at least one evidence entry".into(),
            ));
        }
        let diverges =
            verdicts.mean == VerdictKind::Diverges || verdicts.uniform == VerdictKind::Diverges;
        if diverges && !evidence.iter().any(Evidence::is_lower_bound_witness) {
            return Err(LabError::InvalidInput(
                "a diverges verdict needs a lower-bound witness".into(),
            ));
        }
        Ok(Self {
            subject,
            truncation,
            verdicts,
            evidence,
            caveats,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelMethod {
    /// Triangular with nonzero diagonal: nullity 0 by forward substitution.
    Triangular,
    /// Numerical rank from a dense SVD.
    Svd,
}

/// Null spaces of a generator and its adjoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelEvidence {
    pub kernel_dim: usize,
    pub adjoint_kernel_dim: usize,
    /// `ker(G)` separates `ker(G′)`; vacuous when the adjoint kernel is trivial.
    pub separation: bool,
    pub method: KernelMethod,
    /// `G′f` for `f = (1,…,1)`.
    pub adjoint_on_f: Vec<f64>,
}

fn nonzero_triangular(map: &dyn LinearMap) -> bool {
    map.triangular_diagonal()
        .is_some_and(|d| d.iter().all(|&v| v != 0.0))
}

/// A bounded semigroup is mean ergodic iff the kernel of its generator
/// separates the kernel of the adjoint; in particular when the adjoint kernel
/// is trivial.
pub fn kernel_criterion(
    generator: &dyn LinearMap,
    adjoint: &dyn LinearMap,
    dim: usize,
) -> Result<KernelEvidence> {
    for found in [generator.dim(), adjoint.dim()] {
        if found != dim {
            return Err(LabError::DimensionMismatch {
                expected: dim,
                found,
            });
        }
    }
    let ones = TruncatedVector::new(vec![1.0; dim])?;
    let adjoint_on_f = Vec::from(adjoint.apply(&ones)?);
    if nonzero_triangular(generator) && nonzero_triangular(adjoint) {
        return Ok(KernelEvidence {
            kernel_dim: 0,
            adjoint_kernel_dim: 0,
            separation: true,
            method: KernelMethod::Triangular,
            adjoint_on_f,
        });
    }
    if dim > MAX_DENSE_DIM {
        return Err(LabError::InvalidInput(format!(
            "dense kernel computation is limited to N <= {MAX_DENSE_DIM}, got {dim}"
        )));
    }
    let kernel = numerical_kernels(&generator.to_dense()?).kernel;
    let adjoint_kernel = numerical_kernels(&adjoint.to_dense()?).kernel;
    Ok(KernelEvidence {
        kernel_dim: kernel.len(),
        adjoint_kernel_dim: adjoint_kernel.len(),
        separation: separates(&kernel, &adjoint_kernel),
        method: KernelMethod::Svd,
        adjoint_on_f,
    })
}

/// Kernel evidence for the generator `A` of `M`.
pub fn kernel_criterion_a(dim: usize) -> Result<KernelEvidence> {
    let a = GeneratorA { dim };
    kernel_criterion(&a, &a, dim)
}

/// Kernel evidence for the generator `B` of `T`; the adjoint residual is `-1/N`.
pub fn kernel_criterion_b(dim: usize) -> Result<KernelEvidence> {
    kernel_criterion(&GeneratorB { dim }, &GeneratorBAdjoint { dim }, dim)
}

/// Fixed spaces of a matrix and its transpose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineEvidence {
    pub fixed_dim: usize,
    pub adjoint_fixed_dim: usize,
    pub separation: bool,
    pub method: KernelMethod,
}

/// A power-bounded operator is mean ergodic iff `fix(T)` separates `fix(T′)`.
pub fn sine_criterion(op: &PowerBoundedOperator) -> Result<SineEvidence> {
    let shifted = op.matrix().minus_identity();
    let k = kernel_criterion(&shifted, &Transposed(&shifted), op.dim())?;
    Ok(SineEvidence {
        fixed_dim: k.kernel_dim,
        adjoint_fixed_dim: k.adjoint_kernel_dim,
        separation: k.separation,
        method: k.method,
    })
}

/// Finite shadows of the failure of uniform mean ergodicity of `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformEvidence {
    /// `‖A_N⁻¹‖₁`, equal to `N`.
    pub inverse_norm: f64,
    /// `min_h |−1/h| = 1/N`, read off the diagonal.
    pub min_abs_eigenvalue: f64,
    /// `min ‖C_M(r)‖` over the grid points with `r ≤ N` (None if there are none).
    pub opnorm_floor: Option<f64>,
    /// The `r` with `‖C_M(r)‖ = 1 - 1/e`.
    pub crossover_r: f64,
    pub crossover_ratio: f64,
}

pub fn uniform_criterion_m(dim: usize, r_grid: &[f64]) -> Result<UniformEvidence> {
    let inverse_norm = matrix_a_inverse(dim)?.norm_l1();
    let min_abs_eigenvalue = matrix_a(dim)?
        .diagonal()
        .iter()
        .fold(f64::INFINITY, |m, d| m.min(d.abs()));
    let mut floor: Option<f64> = None;
    for &r in r_grid.iter().filter(|&&r| r <= dim as f64) {
        let v = cesaro_m_opnorm(r, dim)?;
        floor = Some(floor.map_or(v, |f| f.min(v)));
    }
    let crossover_r = opnorm_crossover(dim)?;
    Ok(UniformEvidence {
        inverse_norm,
        min_abs_eigenvalue,
        opnorm_floor: floor,
        crossover_r,
        crossover_ratio: crossover_r / dim as f64,
    })
}

/// Bisection for `‖C_M(r)‖ = 1 - 1/e`; the norm is decreasing in `r`.
fn opnorm_crossover(dim: usize) -> Result<f64> {
    let n = dim as f64;
    let (mut lo, mut hi) = (n / 16.0, 16.0 * n);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cesaro_m_opnorm(mid, dim)? > OPNORM_FLOOR {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * n {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Mean-curve profile `r ↦ C_T(r)x` recording norm, largest coordinate,
/// median mass index and `f`-value.
pub fn mass_escape_profile_of(x: &TruncatedVector, r_grid: &[f64]) -> Result<CesaroCurve> {
    let mut curve = curve_t(r_grid, x)?;
    let n = x.dim() as f64;
    for &r in r_grid {
        if r / (2.0 * n) > 0.1 {
            curve.push_warning(format!(
                "certificate degraded at r = {r}: r/(2N) = {:.3} exceeds 0.1",
                r / (2.0 * n)
            ));
        }
    }
    Ok(curve)
}

/// [`mass_escape_profile_of`] for `x = e_1`.
pub fn mass_escape_profile(r_grid: &[f64], dim: usize) -> Result<CesaroCurve> {
    mass_escape_profile_of(&TruncatedVector::basis(1, dim)?, r_grid)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceVerdict {
    pub verdict: VerdictKind,
    /// Largest successive-sample difference over the last window.
    pub max_tail_difference: f64,
    /// Decay exponent `p` of a fit `difference ∝ r^{-p}` over the window.
    pub fitted_exponent: Option<f64>,
    pub witness: Option<Evidence>,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Numerical stand-in for convergence as `r → ∞`.
///
/// Converges when the successive differences over the last `window` steps
/// are below `tol` and either vanish or decay along a fitted power law.
/// Diverges only with a stored witness: in vector mode the ℓ¹ norm stays at
/// or above [`DIVERGENCE_FLOOR`] while the largest coordinate shrinks at least
/// twofold across the window (mass escape); in norm mode the values stay at
/// or above the floor (a norm bounded away from the strong limit 0).
pub fn cauchy_convergence_test(
    curve: &CesaroCurve,
    window: usize,
    tol: f64,
) -> Result<ConvergenceVerdict> {
    if window == 0 || curve.len() < 2 * window {
        return Err(LabError::InvalidInput(format!(
            "need at least {} samples for window {window}, got {}",
            2 * window,
            curve.len()
        )));
    }
    let points = curve.points();
    let start = points.len() - window - 1;
    let diffs: Vec<f64> = match curve.mode() {
        CurveMode::Vector => curve.vectors()[start..]
            .windows(2)
            .map(|w| w[0].distance_l1(&w[1]))
            .collect::<Result<_>>()?,
        CurveMode::OperatorNorm => points[start..]
            .windows(2)
            .map(|w| (w[1].value - w[0].value).abs())
            .collect(),
    };
    let rs: Vec<f64> = points[start + 1..].iter().map(|p| p.r).collect();
    let max_tail_difference = diffs.iter().copied().fold(0.0, f64::max);
    let scale = points[start..]
        .iter()
        .map(|p| p.value.abs())
        .fold(1.0, f64::max);
    let negligible = max_tail_difference <= f64::EPSILON * scale;
    let fitted_exponent = log_log_slope(&rs, &diffs).map(|s| -s);

    if max_tail_difference < tol && (negligible || fitted_exponent.is_some_and(|p| p > 0.0)) {
        return Ok(ConvergenceVerdict {
            verdict: VerdictKind::Converges,
            max_tail_difference,
            fitted_exponent,
            witness: None,
        });
    }

    let tail = &points[start..];
    let min_value = tail.iter().map(|p| p.value).fold(f64::INFINITY, f64::min);
    let witness = match curve.mode() {
        CurveMode::Vector => {
            let first = tail[0].max_coordinate.unwrap_or(0.0).abs();
            let last = tail[tail.len() - 1].max_coordinate.unwrap_or(0.0).abs();
            (min_value >= DIVERGENCE_FLOOR && first > 0.0 && last <= 0.5 * first).then(|| {
                Evidence::lower_bound(
                    "min l1 norm over window while max coordinate decays",
                    min_value,
                    DIVERGENCE_FLOOR,
                    "mass escape",
                )
            })
        }
        CurveMode::OperatorNorm => (min_value >= DIVERGENCE_FLOOR).then(|| {
            Evidence::lower_bound(
                "min operator norm over window",
                min_value,
                DIVERGENCE_FLOOR,
                "norm floor",
            )
        }),
    };
    let verdict = if witness.is_some() {
        VerdictKind::Diverges
    } else {
        VerdictKind::Inconclusive
    };
    Ok(ConvergenceVerdict {
        verdict,
        max_tail_difference,
        fitted_exponent,
        witness,
    })
}

fn truncation_caveats(dim: usize) -> Vec<String> {
    vec![
        format!("finite truncation N = {dim}: every truncated semigroup is uniformly mean ergodic as a matrix"),
        "verdicts concern the untruncated semigroup and rest on quantities that scale with N".into(),
    ]
}

/// Report for `M`: mean ergodic, not uniformly mean ergodic.
pub fn report_m(dim: usize, r_grid: &[f64]) -> Result<ErgodicityReport> {
    let kernel = kernel_criterion_a(dim)?;
    let uniform = uniform_criterion_m(dim, r_grid)?;
    let x = TruncatedVector::basis(dim, dim)?;
    let mut evidence = vec![
        Evidence::new(
            "generator kernel dimension",
            kernel.kernel_dim as f64,
            Some(0.0),
            "generator kernel criterion",
        ),
        Evidence::new(
            "adjoint generator kernel dimension",
            kernel.adjoint_kernel_dim as f64,
            Some(0.0),
            "generator kernel criterion",
        ),
        Evidence::new(
            "norm of truncated inverse generator",
            uniform.inverse_norm,
            Some(dim as f64),
            "unbounded inverse",
        ),
        Evidence::new(
            "smallest eigenvalue modulus",
            uniform.min_abs_eigenvalue,
            Some(1.0 / dim as f64),
            "eigenvalues accumulate at 0",
        ),
        Evidence::new(
            "opnorm crossover r / N",
            uniform.crossover_ratio,
            Some(1.0),
            "uniform ergodicity",
        ),
    ];
    if let Some(&r_max) = r_grid.last() {
        let strong = crate::cesaro::cesaro_m(r_max, &x)?.norm_l1();
        evidence.push(Evidence::new(
            format!("r * ||C(r) e_N|| / N at r = {r_max}"),
            strong * r_max / dim as f64,
            Some(1.0),
            "strong convergence rate",
        ));
    }
    let uniform_verdict = match uniform.opnorm_floor {
        Some(floor) if floor >= OPNORM_FLOOR * (1.0 - 1e-12) => {
            evidence.push(Evidence::lower_bound(
                "min opnorm of Cesaro means over r <= N",
                floor,
                OPNORM_FLOOR * (1.0 - 1e-12),
                "uniform ergodicity",
            ));
            VerdictKind::Diverges
        }
        _ => VerdictKind::Inconclusive,
    };
    let mean = if kernel.adjoint_kernel_dim == 0 {
        VerdictKind::Converges
    } else {
        VerdictKind::Inconclusive
    };
    let mut caveats = truncation_caveats(dim);
    if uniform.opnorm_floor.is_none() {
        caveats.push("no grid point with r <= N; operator-norm floor not sampled".into());
    }
    ErgodicityReport::new(
        Subject::M,
        dim,
        Verdicts {
            mean,
            uniform: uniform_verdict,
        },
        evidence,
        caveats,
    )
}

/// Report for `T`: not mean ergodic, hence not uniformly mean ergodic.
pub fn report_t(dim: usize, r_grid: &[f64]) -> Result<ErgodicityReport> {
    let kernel = kernel_criterion_b(dim)?;
    let forward = kernel_b(dim)?;
    let residual_dev = kernel
        .adjoint_on_f
        .iter()
        .map(|v| (v + 1.0 / dim as f64).abs())
        .fold(0.0, f64::max);
    let mut evidence = vec![
        Evidence::new(
            "generator kernel dimension (forward substitution)",
            if forward.is_trivial { 0.0 } else { 1.0 },
            Some(0.0),
            "triangular kernel system",
        ),
        Evidence::new(
            "max deviation of B'f from -1/N",
            residual_dev,
            Some(1e-15),
            "f in the adjoint kernel",
        ),
        Evidence::new(
            "adjoint residual magnitude 1/N",
            1.0 / dim as f64,
            None,
            "f in the adjoint kernel",
        ),
    ];
    let mut caveats = truncation_caveats(dim);
    let Some(&r_max) = r_grid.last() else {
        return ErgodicityReport::new(
            Subject::T,
            dim,
            Verdicts {
                mean: VerdictKind::Inconclusive,
                uniform: VerdictKind::Inconclusive,
            },
            evidence,
            caveats,
        );
    };
    let e1 = TruncatedVector::basis(1, dim)?;
    let mean_vec = cesaro_t(r_max, &e1)?;
    let f_value = DualFunctional::ConstantOne.pair(&mean_vec)?;
    let bound = 1.0 - r_max / (2.0 * dim as f64);
    let (_, max_coord) = mean_vec.max_coordinate();
    evidence.push(Evidence::lower_bound(
        format!("f-value of C(r) e_1 at r = {r_max}"),
        f_value,
        bound,
        "conserved functional",
    ));
    evidence.push(Evidence::new(
        format!("max coordinate of C(r) e_1 at r = {r_max}"),
        max_coord,
        None,
        "mass escape",
    ));
    evidence.push(Evidence::new(
        "truncation certificate",
        cesaro_t_truncation_error(r_max, &e1)?,
        Some(r_max / (2.0 * dim as f64)),
        "truncation",
    ));
    let witnessed = forward.is_trivial && f_value >= bound && bound > 0.0;
    if r_max / (2.0 * dim as f64) > 0.1 {
        caveats.push(format!(
            "r/(2N) = {:.3} > 0.1: truncation certificate degraded",
            r_max / (2.0 * dim as f64)
        ));
    }
    let verdict = if witnessed {
        VerdictKind::Diverges
    } else {
        VerdictKind::Inconclusive
    };
    ErgodicityReport::new(
        Subject::T,
        dim,
        Verdicts {
            mean: verdict,
            uniform: verdict,
        },
        evidence,
        caveats,
    )
}

/// Report for `S(t) = e^{-t}e^{tT}` of a user matrix.
pub fn report_s(op: &PowerBoundedOperator) -> Result<ErgodicityReport> {
    let sine = sine_criterion(op)?;
    let dim = op.dim();
    let standard = (1..=dim)
        .map(|k| op.horizon_stabilized(&TruncatedVector::basis(k, dim)?))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|b| b);
    let mut evidence = vec![
        Evidence::new(
            "fixed space dimension",
            sine.fixed_dim as f64,
            None,
            "fixed-space separation",
        ),
        Evidence::new(
            "adjoint fixed space dimension",
            sine.adjoint_fixed_dim as f64,
            None,
            "fixed-space separation",
        ),
        Evidence::new(
            "power bound over horizon",
            op.power_bound(),
            None,
            "renorming",
        ),
    ];
    let mut caveats = vec![format!(
        "finite-dimensional matrix N = {dim}: power-bounded matrices are always mean ergodic; \
         the non-ergodic obstruction exists only in infinite dimensions"
    )];
    if !standard {
        caveats.push(
            "power norms still grow over the last 10% of the horizon; power bound unreliable"
                .into(),
        );
    }
    let verdicts = if sine.separation {
        evidence.push(Evidence::new(
            "fixed space separates adjoint fixed space",
            1.0,
            Some(1.0),
            "fixed-space separation",
        ));
        Verdicts {
            mean: VerdictKind::Converges,
            uniform: VerdictKind::Converges,
        }
    } else if standard {
        let deficit = sine
            .adjoint_fixed_dim
            .saturating_sub(sine.fixed_dim.min(sine.adjoint_fixed_dim))
            .max(1);
        evidence.push(Evidence::lower_bound(
            "unseparated adjoint fixed vectors",
            deficit as f64,
            1.0,
            "fixed-space separation",
        ));
        Verdicts {
            mean: VerdictKind::Diverges,
            uniform: VerdictKind::Diverges,
        }
    } else {
        Verdicts {
            mean: VerdictKind::Inconclusive,
            uniform: VerdictKind::Inconclusive,
        }
    };
    ErgodicityReport::new(Subject::S, dim, verdicts, evidence, caveats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cesaro::{curve_m, curve_m_opnorm, geometric_grid};
    use crate::semigroups::{matrix_t, FnMap, TruncatedOperator};

    #[test]
    fn kernel_criterion_for_a_and_b() {
        let a = kernel_criterion_a(100).unwrap();
        assert_eq!((a.kernel_dim, a.adjoint_kernel_dim), (0, 0));
        assert!(a.separation);
        for n in [10usize, 100, 1000] {
            let b = kernel_criterion_b(n).unwrap();
            assert_eq!((b.kernel_dim, b.adjoint_kernel_dim), (0, 0));
            assert_eq!(b.method, KernelMethod::Triangular);
            assert!(b
                .adjoint_on_f
                .iter()
                .all(|v| (v + 1.0 / n as f64).abs() <= 1e-15));
        }
    }

    #[test]
    fn kernel_criterion_zero_generator() {
        let n = 6;
        let zero = TruncatedOperator::from_triplets(n, &[]).unwrap();
        let k = kernel_criterion(&zero, &Transposed(&zero), n).unwrap();
        assert_eq!((k.kernel_dim, k.adjoint_kernel_dim), (n, n));
        assert!(k.separation);
        assert_eq!(k.method, KernelMethod::Svd);
    }

    #[test]
    fn kernel_criterion_dimension_errors() {
        let b = GeneratorB { dim: 4 };
        let adj = GeneratorBAdjoint { dim: 5 };
        assert!(matches!(
            kernel_criterion(&b, &adj, 4),
            Err(LabError::DimensionMismatch { .. })
        ));
        let closure = FnMap::new(3, |x: &TruncatedVector| Ok(x.clone()));
        assert!(kernel_criterion(&closure, &closure, 4).is_err());
        let k = kernel_criterion(&closure, &closure, 3).unwrap();
        assert_eq!(k.kernel_dim, 0);
    }

    #[test]
    fn jordan_block_fails_separation() {
        // G = [[0,0],[1,0]]: ker G = span(e_2), ker G' = span(e_1)
        let g = TruncatedOperator::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
        let k = kernel_criterion(&g, &Transposed(&g), 2).unwrap();
        assert_eq!((k.kernel_dim, k.adjoint_kernel_dim), (1, 1));
        assert!(!k.separation);
    }

    #[test]
    fn sine_criterion_cases() {
        let id = PowerBoundedOperator::new(TruncatedOperator::identity(4), 8).unwrap();
        let s = sine_criterion(&id).unwrap();
        assert_eq!((s.fixed_dim, s.adjoint_fixed_dim), (4, 4));
        assert!(s.separation);

        let t = PowerBoundedOperator::new(matrix_t(1.0, 64).unwrap(), 32).unwrap();
        let s = sine_criterion(&t).unwrap();
        assert_eq!((s.fixed_dim, s.adjoint_fixed_dim), (0, 0));
        assert_eq!(s.method, KernelMethod::Triangular);
        assert!(s.separation);

        let d = PowerBoundedOperator::new(
            TruncatedOperator::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.5]]).unwrap(),
            8,
        )
        .unwrap();
        let s = sine_criterion(&d).unwrap();
        assert_eq!((s.fixed_dim, s.adjoint_fixed_dim), (1, 1));
        assert!(s.separation);
    }

    #[test]
    fn uniform_criterion_values() {
        let u = uniform_criterion_m(10, &[1.0, 5.0, 10.0, 20.0]).unwrap();
        assert_eq!(u.inverse_norm, 10.0);
        assert!((u.min_abs_eigenvalue - 0.1).abs() < 1e-16);
        assert!(u.opnorm_floor.unwrap() >= OPNORM_FLOOR - 1e-15);
        let u = uniform_criterion_m(10_000, &[1.0]).unwrap();
        assert_eq!(u.inverse_norm, 10_000.0);
        assert!((u.min_abs_eigenvalue - 1e-4).abs() < 1e-19);
        for n in [1usize, 16, 1000, 4096] {
            let u = uniform_criterion_m(n, &[]).unwrap();
            assert!((0.5..=2.0).contains(&u.crossover_ratio));
            assert!((u.crossover_ratio - 1.0).abs() < 1e-9);
        }
        // N = 1: C_M(r) = (1 - e^{-r})/r -> 0
        assert!(cesaro_m_opnorm(1e4, 1).unwrap() <= 1e-4 * (1.0 + 1e-12));
    }

    #[test]
    fn mass_escape_profile_contract() {
        let n = 1024;
        let grid = geometric_grid(1.0, 2.0, 8).unwrap();
        let profile = mass_escape_profile(&grid, n).unwrap();
        let p0 = &profile.points()[0];
        assert!(p0.f_value.unwrap() >= 1.0 - 1.0 / 2048.0 && p0.f_value.unwrap() <= 1.0);
        for p in profile.points() {
            let f = p.f_value.unwrap();
            assert!(f >= 1.0 - p.r / (2.0 * n as f64));
            assert!(p.value + p.trunc_error >= 1.0 - 1e-14 && p.value <= 1.0 + 1e-14);
        }
        let maxima: Vec<f64> = profile
            .points()
            .iter()
            .map(|p| p.max_coordinate.unwrap())
            .collect();
        assert!(maxima.windows(2).all(|w| w[1] <= w[0]));
        let medians: Vec<usize> = profile
            .points()
            .iter()
            .map(|p| p.median_index.unwrap())
            .collect();
        assert!(medians.windows(2).all(|w| w[1] >= w[0]));
        assert!(medians.last() > medians.first());
        assert!(profile.warnings().is_empty());
        let degraded = mass_escape_profile(&[500.0], n).unwrap();
        assert_eq!(degraded.warnings().len(), 1);
        let zero = mass_escape_profile_of(&TruncatedVector::zeros(8).unwrap(), &grid).unwrap();
        assert!(zero
            .points()
            .iter()
            .all(|p| p.value == 0.0 && p.f_value == Some(0.0)));
    }

    #[test]
    fn fixed_coordinate_decays() {
        let n = 256;
        let grid = geometric_grid(10.0, 2.0, 6).unwrap();
        for j in [1usize, 2, 5] {
            for &r in &grid {
                let c = cesaro_t(r, &TruncatedVector::basis(1, n).unwrap()).unwrap();
                assert!(c.get(j).unwrap() <= 2.0 * j as f64 / r);
            }
        }
    }

    #[test]
    fn cauchy_test_examples() {
        let e1 = TruncatedVector::basis(1, 8).unwrap();
        let grid = geometric_grid(1.0, std::f64::consts::SQRT_2, 21).unwrap();
        let v = cauchy_convergence_test(&curve_m(&grid, &e1).unwrap(), 2, 1e-3).unwrap();
        assert_eq!(v.verdict, VerdictKind::Converges);
        let grid = geometric_grid(1.0, std::f64::consts::SQRT_2, 31).unwrap();
        let v = cauchy_convergence_test(&curve_m(&grid, &e1).unwrap(), 4, 1e-3).unwrap();
        assert_eq!(v.verdict, VerdictKind::Converges);
        assert!(v.fitted_exponent.unwrap() > 0.5);

        let grid_n = geometric_grid(1.0, std::f64::consts::SQRT_2, 25).unwrap();
        let v = cauchy_convergence_test(&curve_m_opnorm(&grid_n, 4096).unwrap(), 4, 1e-3).unwrap();
        assert_eq!(v.verdict, VerdictKind::Diverges);
        let w = v.witness.unwrap();
        assert!(w.value >= OPNORM_FLOOR - 1e-12 && w.is_lower_bound_witness());

        let constant = CesaroCurve::from_norms(&grid[..8], vec![1.0; 8], vec![0.0; 8]).unwrap();
        let v = cauchy_convergence_test(&constant, 4, 1e-6).unwrap();
        assert_eq!(v.verdict, VerdictKind::Converges);

        assert!(cauchy_convergence_test(&constant, 5, 1e-6).is_err());
        assert!(cauchy_convergence_test(&constant, 0, 1e-6).is_err());

        let escape = mass_escape_profile(
            &geometric_grid(1.0, std::f64::consts::SQRT_2, 16).unwrap(),
            65536,
        )
        .unwrap();
        let v = cauchy_convergence_test(&escape, 4, 1e-3).unwrap();
        assert_eq!(v.verdict, VerdictKind::Diverges);
    }

    #[test]
    fn inconclusive_without_witness() {
        // slowly drifting norms below the floor
        let grid = geometric_grid(1.0, 2.0, 8).unwrap();
        let norms: Vec<f64> = (0..8).map(|i| 0.1 + 0.01 * i as f64).collect();
        let curve = CesaroCurve::from_norms(&grid, norms, vec![0.0; 8]).unwrap();
        let v = cauchy_convergence_test(&curve, 3, 1e-6).unwrap();
        assert_eq!(v.verdict, VerdictKind::Inconclusive);
        assert!(v.witness.is_none());
    }

    #[test]
    fn reports() {
        let grid = geometric_grid(1.0, 2.0, 8).unwrap();
        let m = report_m(256, &grid).unwrap();
        assert_eq!(
            m.verdicts,
            Verdicts {
                mean: VerdictKind::Converges,
                uniform: VerdictKind::Diverges
            }
        );
        let t = report_t(4096, &grid).unwrap();
        assert_eq!(t.verdicts.mean, VerdictKind::Diverges);
        let json = serde_json::to_value(&t).unwrap();
        for key in ["subject", "truncation", "verdicts", "evidence", "caveats"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert_eq!(json["verdicts"]["mean"], "diverges");
        assert!(json["evidence"][0].get("paper_ref").is_some());
        let op = PowerBoundedOperator::new(matrix_t(1.0, 16).unwrap(), 32).unwrap();
        let s = report_s(&op).unwrap();
        assert_eq!(s.verdicts.mean, VerdictKind::Converges);
        assert!(ErgodicityReport::new(
            Subject::M,
            1,
            Verdicts {
                mean: VerdictKind::Diverges,
                uniform: VerdictKind::Inconclusive
            },
            vec![Evidence::new("x", 0.0, None, "")],
            vec![],
        )
        .is_err());
        assert!(ErgodicityReport::new(
            Subject::M,
            1,
            Verdicts {
                mean: VerdictKind::Converges,
                uniform: VerdictKind::Converges
            },
            vec![],
            vec![],
        )
        .is_err());
    }
}
