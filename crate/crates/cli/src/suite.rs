//! Invariant suite behind `verify`.

use ergolab_core::cesaro::{
    adaptive_simpson, cesaro_m, cesaro_m_opnorm, cesaro_quadrature, cesaro_t, curve_m,
    curve_m_opnorm, DEFAULT_EVALUATION_BUDGET,
};
use ergolab_core::coeffs::{b, integral_b, partial_sum_b, tail_sum_b};
use ergolab_core::diagnostics::{
    cauchy_convergence_test, kernel_criterion_b, mass_escape_profile, uniform_criterion_m,
    VerdictKind, OPNORM_FLOOR,
};
use ergolab_core::exp_semigroup::PowerBoundedOperator;
use ergolab_core::semigroups::{
    apply_b_adjoint, apply_m, apply_t, matrix_b, matrix_m, matrix_n, matrix_t, GeneratorB,
    LinearMap, TruncatedOperator,
};
use ergolab_core::sum::CompensatedSum;
use ergolab_core::{DualFunctional, Result, TruncatedVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Explicitly assembled matrices are checked at most at this dimension.
pub const ASSEMBLY_DIM: usize = 1024;
/// Dimension of the `T(1)` matrix used for the exponential semigroup checks.
pub const EXP_DIM: usize = 32;
/// Support bound for quadrature oracle checks.
pub const ORACLE_DIM: usize = 100;

const COEFF_N: usize = 1000;
const COEFF_TIMES: [f64; 5] = [0.0, 0.1, 1.0, 10.0, 100.0];
const EXP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub version: String,
    pub dim: usize,
    pub seed: u64,
    pub inject_fault: bool,
    pub passed: bool,
    pub failed: usize,
    pub checks: Vec<Check>,
    pub caveats: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub dim: usize,
    pub seed: u64,
    pub r_grid: Vec<f64>,
    pub convergence_tol: f64,
    pub inject_fault: bool,
}

struct Suite {
    module: &'static str,
    checks: Vec<Check>,
}

impl Suite {
    fn module(&mut self, module: &'static str) {
        self.module = module;
    }

    fn push(
        &mut self,
        name: &str,
        measured: f64,
        lower: Option<f64>,
        upper: Option<f64>,
        note: Option<String>,
    ) {
        let passed = !measured.is_nan()
            && lower.is_none_or(|l| measured >= l)
            && upper.is_none_or(|u| measured <= u);
        self.checks.push(Check {
            module: self.module.into(),
            name: name.into(),
            passed,
            measured,
            lower,
            upper,
            note,
        });
    }

    fn at_most(&mut self, name: &str, measured: f64, upper: f64) {
        self.push(name, measured, None, Some(upper), None);
    }

    fn at_least(&mut self, name: &str, measured: f64, lower: f64) {
        self.push(name, measured, Some(lower), None, None);
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize, support: usize) -> Result<TruncatedVector> {
    let coords = (1..=dim)
        .map(|k| {
            if k <= support {
                rng.random_range(-1.0..1.0)
            } else {
                0.0
            }
        })
        .collect();
    TruncatedVector::new(coords)
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Sample of truncation levels `h` in `1..=dim`.
fn levels(dim: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut hs = vec![1, 2.min(dim), (dim / 2).max(1), dim];
    hs.extend((0..4).map(|_| rng.random_range(1..=dim)));
    hs.sort_unstable();
    hs.dedup();
    hs
}

pub fn run_suite(opts: &SuiteOptions) -> Result<VerifyReport> {
    let n = opts.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut s = Suite {
        module: "space",
        checks: Vec::new(),
    };
    let mut caveats = Vec::new();
    if n == 1 {
        caveats.push(
            "N = 1 is a degenerate truncation: projections, escape and ordering checks are vacuous"
                .into(),
        );
    }
    let nd = n.min(ASSEMBLY_DIM);
    if nd < n {
        caveats.push(format!(
            "matrix assembly checks ran at N = {nd}; matrix-free checks at N = {n}"
        ));
    }

    space_checks(&mut s, n, &mut rng)?;
    coeff_checks(&mut s)?;
    semigroup_checks(&mut s, n, nd, opts.inject_fault, &mut rng)?;
    exp_checks(&mut s, n.min(EXP_DIM), &mut rng)?;
    cesaro_checks(&mut s, n, &opts.r_grid, &mut rng)?;
    diagnostics_checks(&mut s, n, &opts.r_grid, opts.convergence_tol)?;

    let failed = s.checks.iter().filter(|c| !c.passed).count();
    Ok(VerifyReport {
        version: env!("CARGO_PKG_VERSION").into(),
        dim: n,
        seed: opts.seed,
        inject_fault: opts.inject_fault,
        passed: failed == 0,
        failed,
        checks: s.checks,
        caveats,
    })
}

fn space_checks(s: &mut Suite, n: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    s.module("space");
    let mut ratio: f64 = 0.0;
    for _ in 0..16 {
        let x = random_vector(rng, n, n)?;
        let f = DualFunctional::sequence((0..n).map(|_| rng.random_range(-2.0..2.0)).collect())?;
        let bound = f.sup_norm() * x.norm_l1();
        if bound > 0.0 {
            ratio = ratio.max(f.pair(&x)?.abs() / bound);
        }
        let one = DualFunctional::ConstantOne;
        ratio = ratio.max(one.pair(&x)?.abs() / x.norm_l1());
    }
    s.at_most("holder_inequality_ratio", ratio, 1.0 + 1e-12);

    let x = random_vector(rng, n, n)?;
    let hs = levels(n, rng);
    let mut acc = TruncatedVector::zeros(n)?;
    let mut sum_defect: f64 = 0.0;
    let mut idem: f64 = 0.0;
    let mut contract: f64 = 0.0;
    let mut next = hs.iter().peekable();
    for h in 1..=n {
        acc.axpy(1.0, &x.project_q(h)?)?;
        if next.peek() == Some(&&h) {
            next.next();
            let p = x.project_p(h)?;
            sum_defect = sum_defect.max(p.distance_l1(&acc)?);
            idem = idem.max(p.project_p(h)?.distance_l1(&p)?);
            let q = x.project_q(h)?;
            idem = idem.max(q.project_q(h)?.distance_l1(&q)?);
            contract = contract
                .max(p.norm_l1() / x.norm_l1())
                .max(q.norm_l1() / x.norm_l1());
        }
    }
    s.at_most("partial_projection_is_sum_of_blocks", sum_defect, 0.0);
    s.at_most("projections_idempotent", idem, 0.0);
    s.at_most("projections_contractive_ratio", contract, 1.0);

    let mut violations = 0usize;
    let zero = TruncatedVector::zeros(n)?;
    if !(1..=n).all(|h| zero.project_p(h).is_ok_and(|p| p.is_zero())) {
        violations += 1;
    }
    let last = TruncatedVector::basis(n, n)?;
    for h in 1..=n {
        if last.project_p(h)?.is_zero() != (h < n) {
            violations += 1;
        }
    }
    if x.project_p(n)?.is_zero() != x.is_zero() {
        violations += 1;
    }
    s.at_most(
        "zero_iff_all_partial_projections_vanish",
        violations as f64,
        0.0,
    );
    Ok(())
}

fn coeff_checks(s: &mut Suite) -> Result<()> {
    s.module("coeffs");
    let mut worst: f64 = 0.0;
    let mut min_b = f64::INFINITY;
    for &t in &COEFF_TIMES {
        let bs = (1..=COEFF_N).map(|h| b(h, t)).collect::<Result<Vec<_>>>()?;
        min_b = bs.iter().copied().fold(min_b, f64::min);
        for m in 1..COEFF_N {
            let mut acc = CompensatedSum::new();
            for nn in (m + 1)..=COEFF_N {
                acc.add(bs[nn - 1]);
                let err = (acc.value() - partial_sum_b(m, nn, t)?).abs();
                worst = worst.max(err / (1e-13 * nn as f64));
            }
        }
    }
    s.push(
        "partial_sum_identity",
        worst,
        None,
        Some(1.0),
        Some(format!("max |err|/(1e-13 n) over 1 <= m < n <= {COEFF_N}")),
    );
    s.at_least("coefficients_nonnegative", min_b, 0.0);

    let mut tail: f64 = 0.0;
    for &t in &COEFF_TIMES {
        for &(m, nn) in &[
            (1usize, 2usize),
            (1, 1000),
            (3, 17),
            (10, 100),
            (99, 1000),
            (500, 501),
        ] {
            tail =
                tail.max((partial_sum_b(m, nn, t)? + tail_sum_b(nn, t)? - tail_sum_b(m, t)?).abs());
        }
    }
    s.at_most("tail_consistency", tail, 1e-14);

    let hs = [1usize, 2, 3, 10, 50, 100];
    let rs = [0.5, 1.0, 5.0, 20.0, 100.0];
    let step = 1e-5;
    let mut deriv: f64 = 0.0;
    let mut oracle: f64 = 0.0;
    for &h in &hs {
        for &r in &rs {
            let fd = (integral_b(h, r + step)? - integral_b(h, r - step)?) / (2.0 * step);
            deriv = deriv.max((fd - b(h, r)?).abs());
            let exact = integral_b(h, r)?;
            let q = adaptive_simpson(
                |u| Ok(vec![b(h, u)?]),
                0.0,
                r,
                1e-13 * exact,
                DEFAULT_EVALUATION_BUDGET,
            )?;
            oracle = oracle.max((q.value[0] - exact).abs() / exact);
        }
    }
    s.at_most("integral_derivative_matches_coefficient", deriv, 1e-8);
    s.at_most("integral_matches_quadrature_relative", oracle, 1e-10);
    Ok(())
}

fn semigroup_checks(
    s: &mut Suite,
    n: usize,
    nd: usize,
    inject_fault: bool,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    s.module("semigroups");
    let x = random_vector(rng, n, n)?;
    let nx = x.norm_l1();
    let mut law_m: f64 = 0.0;
    for &(t, u) in &[(0.0, 0.0), (0.3, 1.7), (1.0, 1.0), (5.0, 0.1)] {
        let joint = apply_m(t + u, &x)?;
        let split = apply_m(t, &apply_m(u, &x)?)?;
        law_m = law_m.max(joint.distance_l1(&split)? / nx);
    }
    s.at_most("m_semigroup_law_relative", law_m, 1e-14);

    let half = random_vector(rng, n, (n / 2).max(1))?;
    let mut law_t: f64 = 0.0;
    for v in [TruncatedVector::basis(1, n)?, half] {
        let joint = apply_t(2.0, &v)?;
        let split = apply_t(1.0, &apply_t(1.0, &v)?)?;
        law_t = law_t.max(joint.distance_l1(&split)? / (tail_sum_b(n, 2.0)? * v.norm_l1()));
    }
    s.push(
        "t_semigroup_defect_over_tail",
        law_t,
        None,
        Some(2.0),
        Some("defect / (tail_sum_b(N, t+s) ||x||) at t = s = 1".into()),
    );

    let mut norm_err: f64 = 0.0;
    let mut norm_m: f64 = 0.0;
    for &t in &[0.01, 0.5, 1.0, 5.0] {
        let m = matrix_m(t, n)?;
        norm_err = norm_err.max((m.minus_identity().norm_l1() - (-(-t).exp_m1())).abs());
        norm_m = norm_m.max(m.norm_l1());
    }
    s.at_most("m_minus_identity_norm_error", norm_err, 1e-14);
    s.at_most("m_norm", norm_m, 1.0);

    let mut min_entry = f64::INFINITY;
    let mut stochastic: f64 = 0.0;
    for &t in &[0.5, 2.0] {
        let mut tm = matrix_t(t, nd)?;
        if inject_fault && nd >= 2 {
            tm = tm.with_entry(2, 1, tm.get(2, 1) + 0.25)?;
        }
        for op in [matrix_m(t, nd)?, matrix_n(t, nd)?, tm.clone()] {
            min_entry = min_entry.min(op.min_entry());
        }
        let lo = (-t / nd as f64).exp();
        for c in tm.column_sums() {
            stochastic = stochastic.max(lo - 1e-14 - c).max(c - 1.0 - 1e-14);
        }
    }
    s.at_least("matrix_entries_nonnegative", min_entry, 0.0);
    s.push(
        "t_column_sums_outside_interval",
        stochastic,
        None,
        Some(0.0),
        inject_fault.then(|| "fault injected into entry (2,1)".to_string()),
    );

    let mut deficit: f64 = 0.0;
    let mut deficit_min: f64 = 0.0;
    for &t in &[0.5, 2.0] {
        let cap = -(-t / n as f64).exp_m1();
        for &k in &levels(n, rng) {
            let sum = apply_t(t, &TruncatedVector::basis(k, n)?)?
                .coords()
                .iter()
                .copied()
                .collect::<CompensatedSum>()
                .value();
            let d = 1.0 - sum;
            deficit = deficit.max(d - cap);
            deficit_min = deficit_min.min(d);
        }
    }
    s.at_most("t_column_deficit_above_tail", deficit, 1e-14);
    s.at_least("t_column_deficit_min", deficit_min, -1e-14);

    let residual = apply_b_adjoint(&TruncatedVector::new(vec![1.0; n])?);
    let inv = 1.0 / n as f64;
    s.at_most(
        "adjoint_residual_deviation",
        max_of(residual.coords().iter().map(|v| (v + inv).abs())),
        1e-15,
    );

    let mut conserve: f64 = 0.0;
    for &t in &[0.5, 1.0, 2.0] {
        let y = apply_t(t, &x)?;
        let diff =
            (DualFunctional::ConstantOne.pair(&y)? - DualFunctional::ConstantOne.pair(&x)?).abs();
        conserve = conserve.max(diff / ((tail_sum_b(n, t)? + 1e-14) * nx));
    }
    s.at_most("functional_conservation_over_tail", conserve, 1.0);

    let diag = GeneratorB { dim: n }
        .triangular_diagonal()
        .unwrap_or_default();
    let deviation = diag
        .iter()
        .enumerate()
        .map(|(i, d)| (d + 1.0 / (i + 1) as f64).abs());
    s.at_most("b_diagonal_eigenvalues_deviation", max_of(deviation), 0.0);
    let min_mod = diag.iter().fold(f64::INFINITY, |m, d| m.min(d.abs()));
    s.at_most(
        "smallest_eigenvalue_modulus_deviation",
        (min_mod - inv).abs(),
        0.0,
    );

    let nnz = matrix_b(nd)?.nnz();
    s.at_most(
        "b_sparse_entry_count_deviation",
        (nnz as f64 - (nd * (nd + 1) / 2) as f64).abs(),
        0.0,
    );
    Ok(())
}

fn exp_checks(s: &mut Suite, ns: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    s.module("exp_semigroup");
    let op = PowerBoundedOperator::new(matrix_t(1.0, ns)?, 64)?;
    let probes = (0..4)
        .map(|_| random_vector(rng, ns, ns))
        .collect::<Result<Vec<_>>>()?;

    let mut contraction: f64 = 0.0;
    for x in &probes {
        let norms = op.power_norms(x)?;
        let shifted = max_of(norms[1..].iter().copied());
        contraction = contraction.max(shifted - max_of(norms.iter().copied()));
    }
    s.at_most("renorm_contraction_excess", contraction, 0.0);

    let mut norm_defect: f64 = 0.0;
    for pair in probes.windows(2) {
        let (x, y) = (&pair[0], &pair[1]);
        let alpha: f64 = rng.random_range(-3.0..3.0);
        let rx = op.renorm(x)?;
        norm_defect =
            norm_defect.max((op.renorm(&x.scale(alpha))? - alpha.abs() * rx).abs() / rx.max(1.0));
        let excess = op.renorm(&x.add(y)?)? - rx - op.renorm(y)?;
        norm_defect = norm_defect.max(excess);
    }
    s.at_most("renorm_norm_axioms_defect", norm_defect, 1e-12);

    let swap = TruncatedOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    let damped = TruncatedOperator::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.5, 0.0],
        vec![0.0, 0.25, 0.5],
    ])?;
    let fixed_cases = [
        (TruncatedOperator::identity(ns), probes[0].clone()),
        (swap, TruncatedVector::new(vec![1.0, 1.0])?),
        (damped, TruncatedVector::basis(1, 3)?),
    ];
    let mut fixed: f64 = 0.0;
    for (m, v) in fixed_cases {
        let p = PowerBoundedOperator::new(m, 64)?;
        for &t in &[0.1, 1.0, 10.0] {
            fixed = fixed.max(p.apply_s(t, &v, EXP_TOL)?.distance_l1(&v)?);
        }
    }
    s.at_most("fixed_vectors_moved_by_s", fixed, EXP_TOL);

    let mut renorm_s: f64 = 0.0;
    for &t in &[0.1, 1.0, 10.0, 100.0] {
        renorm_s = renorm_s.max(op.renorm_opnorm_estimate(t, EXP_TOL, &probes)?);
    }
    s.at_most("s_renorm_operator_norm", renorm_s, 1.0 + 10.0 * EXP_TOL);

    let mut defect: f64 = 0.0;
    for &(t, u) in &[(0.5, 1.5), (2.0, 3.0)] {
        for x in &probes {
            defect = defect
                .max(op.semigroup_defect_s(t, u, x, EXP_TOL)? / (op.power_bound() * x.norm_l1()));
        }
    }
    s.at_most("s_semigroup_defect_relative", defect, 4.0 * EXP_TOL);
    Ok(())
}

fn cesaro_checks(s: &mut Suite, n: usize, r_grid: &[f64], rng: &mut ChaCha8Rng) -> Result<()> {
    s.module("cesaro");
    let dq = n.min(ORACLE_DIM);
    let tol = 1e-10;
    let mut oracle_m: f64 = 0.0;
    let mut oracle_t: f64 = 0.0;
    for &h in [1usize, 2, 5, 10, 50, 100].iter().filter(|&&h| h <= dq) {
        let e = TruncatedVector::basis(h, dq)?;
        for &r in &[0.5, 1.0, 5.0, 20.0, 100.0] {
            let qm = cesaro_quadrature(apply_m, r, &e, tol)?;
            oracle_m = oracle_m.max(qm.distance_l1(&cesaro_m(r, &e)?)?);
            let qt = cesaro_quadrature(apply_t, r, &e, tol)?;
            oracle_t = oracle_t.max(qt.distance_l1(&cesaro_t(r, &e)?)?);
        }
    }
    let bound = (10.0 * tol).max(1e-9);
    s.at_most("quadrature_vs_closed_form_m", oracle_m, bound);
    s.at_most("quadrature_vs_closed_form_t", oracle_t, bound);

    let k = n.min(100);
    let x = random_vector(rng, n, k)?;
    let mut rate: f64 = 0.0;
    for &r in r_grid {
        rate = rate.max(cesaro_m(r, &x)?.norm_l1() * r / (k as f64 * x.norm_l1()));
    }
    s.push(
        "m_strong_rate_ratio",
        rate,
        None,
        Some(1.0),
        Some(format!("r ||C(r)x|| / (K ||x||), K = {k}")),
    );

    let in_range: Vec<f64> = r_grid
        .iter()
        .copied()
        .filter(|&r| (1.0..=n as f64).contains(&r))
        .collect();
    let floor = in_range
        .iter()
        .map(|&r| cesaro_m_opnorm(r, n))
        .collect::<Result<Vec<_>>>()?;
    let floor_min = floor.iter().copied().fold(f64::INFINITY, f64::min);
    let note = in_range
        .is_empty()
        .then(|| "no grid point in [1, N]".to_string());
    s.push(
        "m_opnorm_floor",
        if in_range.is_empty() {
            OPNORM_FLOOR
        } else {
            floor_min
        },
        Some(OPNORM_FLOOR * (1.0 - 1e-15)),
        None,
        note,
    );

    let e1 = TruncatedVector::basis(1, n)?;
    let means = r_grid
        .iter()
        .map(|&r| cesaro_t(r, &e1))
        .collect::<Result<Vec<_>>>()?;
    let mut f_gap = f64::NEG_INFINITY;
    for (c, &r) in means.iter().zip(r_grid) {
        let f = DualFunctional::ConstantOne.pair(c)?;
        f_gap = f_gap.max(1.0 - r / (2.0 * n as f64) - f);
    }
    s.push(
        "t_functional_shortfall",
        f_gap,
        None,
        Some(0.0),
        Some("max (1 - r/(2N)) - f(C_T(r)e_1)".into()),
    );
    let maxima: Vec<f64> = means.iter().map(|c| c.max_coordinate().1).collect();
    let rises = max_of(maxima.windows(2).map(|w| w[1] - w[0]));
    s.at_most("t_max_coordinate_increase", rises, 0.0);

    let y = random_vector(rng, n, n)?;
    let (alpha, beta) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let z = x.scale(alpha).add(&y.scale(beta))?;
    let mut lin: f64 = 0.0;
    for &r in r_grid {
        for mean in [cesaro_m, cesaro_t] {
            let lhs = mean(r, &z)?;
            let rhs = mean(r, &x)?.scale(alpha).add(&mean(r, &y)?.scale(beta))?;
            lin = lin.max(lhs.distance_l1(&rhs)? / z.norm_l1().max(1.0));
        }
    }
    s.at_most("linearity_defect", lin, 1e-12);
    Ok(())
}

fn diagnostics_checks(s: &mut Suite, n: usize, r_grid: &[f64], tol: f64) -> Result<()> {
    s.module("diagnostics");
    let window = (r_grid.len() / 2).min(4);
    if window > 0 {
        let curves = [
            curve_m_opnorm(r_grid, n)?,
            curve_m(r_grid, &TruncatedVector::basis(1, n)?)?,
            mass_escape_profile(r_grid, n)?,
        ];
        let mut unsound = 0usize;
        for c in &curves {
            let v = cauchy_convergence_test(c, window, tol)?;
            if v.verdict == VerdictKind::Diverges
                && !v
                    .witness
                    .as_ref()
                    .is_some_and(|w| w.is_lower_bound_witness())
            {
                unsound += 1;
            }
        }
        s.at_most("unwitnessed_divergence_verdicts", unsound as f64, 0.0);
    } else {
        s.push(
            "unwitnessed_divergence_verdicts",
            0.0,
            None,
            Some(0.0),
            Some("r_grid too short for a window".into()),
        );
    }

    let mut kernel_dims = 0usize;
    let mut residual: f64 = 0.0;
    for m in [10usize, 100, 1000, n] {
        let k = kernel_criterion_b(m)?;
        kernel_dims += k.kernel_dim + k.adjoint_kernel_dim;
        residual = residual.max(max_of(
            k.adjoint_on_f.iter().map(|v| (v + 1.0 / m as f64).abs()),
        ));
    }
    s.at_most("b_kernel_dimensions_across_n", kernel_dims as f64, 0.0);
    s.at_most("b_adjoint_residual_scaling_deviation", residual, 1e-15);

    let u = uniform_criterion_m(n, r_grid)?;
    s.push(
        "opnorm_crossover_ratio",
        u.crossover_ratio,
        Some(0.5),
        Some(2.0),
        None,
    );
    s.at_most(
        "inverse_generator_norm_deviation",
        (u.inverse_norm - n as f64).abs(),
        0.0,
    );

    let profile = mass_escape_profile(r_grid, n)?;
    let mut accounting: f64 = 0.0;
    for p in profile.points() {
        accounting = accounting
            .max(1.0 - (p.value + p.trunc_error))
            .max(p.value - 1.0);
    }
    let min_coord = profile
        .vectors()
        .iter()
        .flat_map(|v| v.coords().iter().copied())
        .fold(f64::INFINITY, f64::min);
    s.at_most("mass_accounting_violation", accounting, 1e-14);
    s.at_least("mass_profile_min_entry", min_coord, 0.0);
    Ok(())
}
