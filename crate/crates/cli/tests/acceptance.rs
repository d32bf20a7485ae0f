//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use ergolab::commands::{cmd_matrix, cmd_verify, read_dense_export};
use ergolab::config::GeometricGrid;
use ergolab::ExperimentConfig;
use ergolab_core::cesaro::{
    adaptive_simpson, cesaro_m, cesaro_m_opnorm, cesaro_quadrature, cesaro_t,
    DEFAULT_EVALUATION_BUDGET,
};
use ergolab_core::coeffs::{b, integral_b, partial_sum_b};
use ergolab_core::diagnostics::{log_log_slope, Subject};
use ergolab_core::exp_semigroup::PowerBoundedOperator;
use ergolab_core::semigroups::{
    apply_b_adjoint, apply_m, apply_t, kernel_b, matrix_a_inverse, matrix_m, matrix_t,
    TruncatedOperator,
};
use ergolab_core::sum::CompensatedSum;
use ergolab_core::{DualFunctional, TruncatedVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: impl std::fmt::Display) -> String {
    err.to_string()
}

/// Stand-alone geometric grid with exact endpoints.
fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..count)
        .map(|j| (a + (b - a) * j as f64 / (count - 1) as f64).exp())
        .collect();
    g[0] = lo;
    g[count - 1] = hi;
    g
}

fn coefficient_identities() -> Outcome {
    let mut worst: f64 = 0.0;
    for &t in &[0.0, 0.1, 1.0, 10.0, 100.0] {
        let bs: Vec<f64> = (1..=1000)
            .map(|h| b(h, t))
            .collect::<Result<_, _>>()
            .map_err(e)?;
        for m in 0..1000usize {
            let mut acc = CompensatedSum::new();
            for n in (m + 1)..=1000 {
                acc.add(bs[n - 1]);
                let err = (acc.value() - partial_sum_b(m, n, t).map_err(e)?).abs();
                worst = worst.max(err / n as f64);
            }
        }
    }
    ensure(worst <= 1e-13, || format!("max |err|/n = {worst:e}"))?;
    Ok(format!("max |err|/n = {worst:.3e} <= 1e-13"))
}

fn m_norm_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    for &n in &[1usize, 2, 10, 1000, 65536] {
        for &t in &[0.01, 0.5, 1.0, 5.0] {
            let norm = matrix_m(t, n).map_err(e)?.minus_identity().norm_l1();
            worst = worst.max((norm - (1.0 - (-t).exp())).abs());
        }
    }
    ensure(worst <= 1e-14, || format!("deviation {worst:e}"))?;
    Ok(format!("max |‖M(t)-I‖ - (1-e^-t)| = {worst:.3e}"))
}

fn semigroup_laws() -> Outcome {
    let n = 4096;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let x =
        TruncatedVector::new((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).map_err(e)?;
    let mut law_m: f64 = 0.0;
    for &(t, s) in &[(0.0, 1.0), (1.0, 1.0), (0.25, 3.5), (10.0, 7.0)] {
        let joint = apply_m(t + s, &x).map_err(e)?;
        let split = apply_m(t, &apply_m(s, &x).map_err(e)?).map_err(e)?;
        law_m = law_m.max(joint.distance_l1(&split).map_err(e)? / x.norm_l1());
    }
    ensure(law_m <= 1e-14, || format!("M defect {law_m:e}"))?;
    let e1 = TruncatedVector::basis(1, n).map_err(e)?;
    let joint = apply_t(2.0, &e1).map_err(e)?;
    let split = apply_t(1.0, &apply_t(1.0, &e1).map_err(e)?).map_err(e)?;
    let defect = joint.distance_l1(&split).map_err(e)?;
    let bound = 2.0 * (1.0 - (-2.0 / n as f64).exp());
    ensure(defect <= bound && defect < 1e-5, || {
        format!("T defect {defect:e}")
    })?;
    // regression pin from the first verified run
    ensure(defect <= 1e-13, || {
        format!("T defect {defect:e} above the 1e-13 regression pin")
    })?;
    Ok(format!(
        "M {law_m:.3e}; T defect {defect:.3e} (bound {bound:.3e}, pin 1e-13)"
    ))
}

fn column_stochasticity() -> Outcome {
    let n = 1024;
    let mut summary = Vec::new();
    for &t in &[0.5, 2.0] {
        let op = matrix_t(t, n).map_err(e)?;
        let lo = 1.0 - (1.0 - (-t / n as f64).exp());
        let sums = op.column_sums();
        let (min, max) = sums
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &s| {
                (a.min(s), b.max(s))
            });
        ensure(min >= lo - 1e-14 && max <= 1.0 + 1e-14, || {
            format!("t = {t}: sums in [{min}, {max}], want [{lo}, 1]")
        })?;
        ensure(op.min_entry() >= 0.0, || format!("t = {t}: negative entry"))?;
        // truncated norm plus the escaped tail recovers the untruncated norm 1
        let norm = op.norm_l1();
        let tail = -(-t / n as f64).exp_m1();
        ensure(
            (norm + tail - 1.0).abs() <= 1e-14 && norm <= 1.0 && norm < 3.0,
            || format!("t = {t}: norm {norm}"),
        )?;
        summary.push(format!("t={t}: sums in [{min:.15}, {max:.15}]"));
    }
    Ok(summary.join("; "))
}

fn mean_ergodicity_m() -> Outcome {
    let grid = log_grid(1.0, 1e4, 33);
    for h in 1..=100usize {
        let x = TruncatedVector::basis(h, 100).map_err(e)?;
        for &r in &grid {
            let norm = cesaro_m(r, &x).map_err(e)?.norm_l1();
            // one rounding of h/r versus (1/z)(1-e^{-z})
            ensure(norm <= h as f64 / r * (1.0 + 4.0 * f64::EPSILON), || {
                format!("h = {h}, r = {r}: {norm} > h/r")
            })?;
        }
    }
    let e1 = TruncatedVector::basis(1, 100).map_err(e)?;
    let norms: Vec<f64> = grid
        .iter()
        .map(|&r| cesaro_m(r, &e1).map(|v| v.norm_l1()))
        .collect::<Result<_, _>>()
        .map_err(e)?;
    let slope = log_log_slope(&grid, &norms).ok_or("slope fit failed")?;
    ensure((slope + 1.0).abs() <= 0.05, || {
        format!("decay exponent {slope}")
    })?;
    Ok(format!(
        "‖C_M(r)e_h‖ <= h/r on 100 x 33 points; exponent {slope:.4}"
    ))
}

fn uniform_failure_m() -> Outcome {
    let n = 4096;
    let floor = 1.0 - (-1.0f64).exp();
    let grid = log_grid(1.0, n as f64, 40);
    let mut min = f64::INFINITY;
    for &r in &grid {
        min = min.min(cesaro_m_opnorm(r, n).map_err(e)?);
    }
    ensure(min >= floor, || {
        format!("min opnorm {min:.17} < {floor:.17}")
    })?;
    for &m in &[10usize, 100, 1000] {
        let norm = matrix_a_inverse(m).map_err(e)?.norm_l1();
        ensure(norm == m as f64, || format!("‖A_N^-1‖ = {norm} at N = {m}"))?;
    }
    Ok(format!(
        "min opnorm over 40 points = {min:.16}; ‖A_N^-1‖ = N exactly"
    ))
}

fn non_ergodicity_t() -> Outcome {
    let n = 65536;
    let e1 = TruncatedVector::basis(1, n).map_err(e)?;
    let mut maxima = Vec::new();
    let mut details = Vec::new();
    for &r in &[10.0, 100.0, 1000.0] {
        let c = cesaro_t(r, &e1).map_err(e)?;
        let f = DualFunctional::ConstantOne.pair(&c).map_err(e)?;
        let bound = 1.0 - r / (2.0 * n as f64);
        ensure(f >= bound, || format!("r = {r}: f = {f} < {bound}"))?;
        let (_, max) = c.max_coordinate();
        maxima.push(max);
        details.push(format!("r={r}: f={f:.8}, max={max:.6e}"));
    }
    ensure(maxima.windows(2).all(|w| w[1] < w[0]), || {
        format!("max coordinates {maxima:?}")
    })?;
    ensure(kernel_b(n).map_err(e)?.is_trivial, || {
        "kernel_B not trivial".into()
    })?;
    let residual = apply_b_adjoint(&TruncatedVector::new(vec![1.0; n]).map_err(e)?);
    let dev = residual
        .coords()
        .iter()
        .map(|v| (v + 1.0 / n as f64).abs())
        .fold(0.0, f64::max);
    ensure(dev <= 1e-15, || {
        format!("adjoint residual deviation {dev:e}")
    })?;
    Ok(format!("{}; residual dev {dev:.1e}", details.join(", ")))
}

fn oracle_equivalence() -> Outcome {
    let dim = 100;
    let tol = 1e-11;
    let mut worst: f64 = 0.0;
    for h in 1..=100usize {
        let x = TruncatedVector::basis(h, dim).map_err(e)?;
        for &r in &[0.5, 5.0, 50.0] {
            let qm = cesaro_quadrature(apply_m, r, &x, tol).map_err(e)?;
            worst = worst.max(qm.distance_l1(&cesaro_m(r, &x).map_err(e)?).map_err(e)?);
            let qt = cesaro_quadrature(apply_t, r, &x, tol).map_err(e)?;
            worst = worst.max(qt.distance_l1(&cesaro_t(r, &x).map_err(e)?).map_err(e)?);
            let qi = adaptive_simpson(
                |s| Ok(vec![b(h, s)?]),
                0.0,
                r,
                tol,
                DEFAULT_EVALUATION_BUDGET,
            )
            .map_err(e)?;
            worst = worst.max((qi.value[0] - integral_b(h, r).map_err(e)?).abs());
        }
    }
    ensure(worst <= 1e-9, || format!("max deviation {worst:e}"))?;
    Ok(format!("max deviation {worst:.3e} <= 1e-9"))
}

fn example_matrix() -> Outcome {
    let dir = tempfile::tempdir().map_err(e)?;
    let config = ExperimentConfig {
        dim: 3,
        output_dir: dir.path().to_path_buf(),
        ..Default::default()
    };
    cmd_matrix(&config).map_err(e)?;
    let dense = read_dense_export(&dir.path().join("matrix_b.json")).map_err(e)?;
    let expected = vec![
        vec![-1.0, 0.0, 0.0],
        vec![1.0 / 2.0, -1.0 / 2.0, 0.0],
        vec![1.0 / 6.0, 1.0 / 6.0, -1.0 / 3.0],
    ];
    ensure(dense.rows == expected, || format!("rows {:?}", dense.rows))?;
    ensure(
        dense.transpose_of_displayed && dense.convention == "column_action",
        || "convention flags".into(),
    )?;
    let mtx = std::fs::read_to_string(dir.path().join("matrix_b.mtx")).map_err(e)?;
    let sparse = TruncatedOperator::from_matrix_market(&mtx).map_err(e)?;
    ensure(sparse.to_rows() == expected && sparse.nnz() == 6, || {
        "sparse output differs".into()
    })?;
    Ok(format!("rows {:?}, transpose flag set", dense.rows))
}

fn exponential_semigroup() -> Outcome {
    let tol = 1e-10;
    let op =
        PowerBoundedOperator::with_default_horizon(matrix_t(1.0, 64).map_err(e)?).map_err(e)?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let probes: Vec<TruncatedVector> = (0..4)
        .map(|_| {
            let v = TruncatedVector::new((0..64).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            Ok(v.scale(1.0 / v.norm_l1()))
        })
        .collect::<Result<_, ergolab_core::LabError>>()
        .map_err(e)?;
    let mut norm: f64 = 0.0;
    for &t in &[0.1, 1.0, 10.0] {
        norm = norm.max(op.renorm_opnorm_estimate(t, tol, &probes).map_err(e)?);
    }
    ensure(norm <= 1.0 + 1e-9, || format!("|||S(t)||| = {norm}"))?;

    let swap = TruncatedOperator::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).map_err(e)?;
    let block = TruncatedOperator::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.5, 0.5],
        vec![0.0, 0.5, 0.5],
    ])
    .map_err(e)?;
    let fixed = [
        (swap, TruncatedVector::new(vec![0.5, 0.5]).map_err(e)?),
        (block, TruncatedVector::new(vec![0.2, 0.4, 0.4]).map_err(e)?),
        (TruncatedOperator::identity(64), probes[0].clone()),
    ];
    let mut moved: f64 = 0.0;
    for (m, v) in fixed {
        let p = PowerBoundedOperator::with_default_horizon(m).map_err(e)?;
        for &t in &[0.1, 1.0, 10.0] {
            moved = moved.max(
                p.apply_s(t, &v, tol)
                    .map_err(e)?
                    .distance_l1(&v)
                    .map_err(e)?,
            );
        }
    }
    ensure(moved <= tol, || format!("fixed vector moved by {moved:e}"))?;

    let mut defect: f64 = 0.0;
    for x in &probes {
        for &(t, s) in &[(0.1, 0.2), (1.0, 2.0), (4.0, 6.0)] {
            defect = defect.max(op.semigroup_defect_s(t, s, x, tol).map_err(e)?);
        }
    }
    ensure(op.power_bound() == 1.0, || {
        format!("power bound {}", op.power_bound())
    })?;
    ensure(defect <= 4.0 * tol, || format!("defect {defect:e}"))?;
    Ok(format!(
        "|||S||| <= {norm:.12}; fixed moved {moved:.1e}; defect {defect:.1e} (tol {tol:e})"
    ))
}

fn determinism() -> Outcome {
    let run = || -> Result<Vec<u8>, String> {
        let dir = tempfile::tempdir().map_err(e)?;
        let config = ExperimentConfig {
            subject: Subject::T,
            dim: 256,
            seed: 20261014,
            r_grid: GeometricGrid {
                start: 1.0,
                factor: 2.0,
                count: 8,
            },
            output_dir: dir.path().to_path_buf(),
            ..Default::default()
        };
        let (outputs, _) = cmd_verify(&config).map_err(e)?;
        std::fs::read(&outputs.files[0]).map_err(e)
    };
    let (a, b) = (run()?, run()?);
    ensure(a == b, || "verify reports differ".into())?;
    Ok(format!("two reports of {} bytes are identical", a.len()))
}

fn main() {
    let criteria: [Criterion; 11] = [
        (
            "coefficient sum identities",
            Duration::from_secs(5),
            coefficient_identities,
        ),
        (
            "exact norm of M(t) - I",
            Duration::from_secs(1),
            m_norm_identity,
        ),
        (
            "semigroup laws for M and T",
            Duration::from_secs(2),
            semigroup_laws,
        ),
        (
            "column-stochasticity of T(t)",
            Duration::from_secs(2),
            column_stochasticity,
        ),
        (
            "strong mean ergodicity of M",
            Duration::from_secs(2),
            mean_ergodicity_m,
        ),
        (
            "no uniform mean ergodicity for M",
            Duration::from_secs(2),
            uniform_failure_m,
        ),
        (
            "non-mean-ergodicity witness for T",
            Duration::from_secs(30),
            non_ergodicity_t,
        ),
        (
            "quadrature oracle equivalence",
            Duration::from_secs(30),
            oracle_equivalence,
        ),
        (
            "generator matrix at N = 3",
            Duration::from_secs(1),
            example_matrix,
        ),
        (
            "exponential semigroup",
            Duration::from_secs(5),
            exponential_semigroup,
        ),
        (
            "deterministic verify reports",
            Duration::from_secs(60),
            determinism,
        ),
    ];
    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = outcome.and_then(|msg| {
            if elapsed <= *budget {
                Ok(msg)
            } else {
                Err(format!(
                    "{msg}; runtime {elapsed:.2?} over budget {budget:?}"
                ))
            }
        });
        match outcome {
            Ok(msg) => println!("PASS [{:>2}] {name}: {msg} ({elapsed:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL [{:>2}] {name}: {msg} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
