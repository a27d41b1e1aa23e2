//! Acceptance suite: one PASS/FAIL line per criterion. Runs without the
//! libtest harness so the report is always printed.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use fermat_bias::arith::{is_prime, sieve_primes};
use fermat_bias::curves::{ap_from_jacobi, count_points_bruteforce, local_factor_over_q};
use fermat_bias::export::{write_level_series, DEFAULT_FIT_FROM};
use fermat_bias::fields::DEFAULT_TABLE_CAP;
use fermat_bias::jacobi::{compute_jacobi_prime, even_degree_value, Strategy};
use fermat_bias::lfunc::{
    bias_decomposition_series, bias_sum, default_grid, loglog_fit, partial_euler_product, predicted_slope,
    second_moment_over_q,
};
use fermat_bias::verify::{verify_level, VerifyOptions};
use fermat_bias::{CurveId, CurveKind, CycInt, EulerTarget, LevelData};
use num_bigint::BigInt;
use num_complex::Complex64;

/// Largest prime for the big runs.
const X_BIG: u64 = 1_000_000;
const FACTORIZATION_TOL: f64 = 1e-10;
const DECOMPOSITION_TOL: f64 = 1e-9;
const BASE_CHANGE_TOL: f64 = 1e-9;
const FIT_TOL: f64 = 0.5;

struct Outcome {
    passed: bool,
    /// Exploratory criteria are reported but never fail the run.
    hard: bool,
    detail: String,
}

fn hard(passed: bool, detail: String) -> Outcome {
    Outcome {
        passed,
        hard: true,
        detail,
    }
}

fn soft(passed: bool, detail: String) -> Outcome {
    Outcome {
        passed,
        hard: false,
        detail,
    }
}

fn level(ell: u32, x: u64) -> LevelData {
    LevelData::compute(ell, x, DEFAULT_TABLE_CAP, None).expect("level data")
}

fn big_level(ell: u32) -> &'static LevelData {
    static L3: OnceLock<LevelData> = OnceLock::new();
    static L5: OnceLock<LevelData> = OnceLock::new();
    static L7: OnceLock<LevelData> = OnceLock::new();
    let cell = match ell {
        3 => &L3,
        5 => &L5,
        7 => &L7,
        _ => unreachable!(),
    };
    cell.get_or_init(|| level(ell, X_BIG))
}

fn verify_family(level: &LevelData, opts: &VerifyOptions, name: &str) -> (usize, Vec<String>) {
    let report = verify_level(level, opts).expect("verify");
    let fam = report.family(name).expect("family present");
    let mut problems = fam.witnesses.clone();
    if fam.failures > 0 {
        problems.insert(0, format!("{} of {} checks failed", fam.failures, fam.checks));
    }
    (fam.checks, problems)
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let opts = VerifyOptions {
        oracle_cap: 2000,
        ..Default::default()
    };
    let mut checks = 0;
    let mut problems = Vec::new();
    for ell in [3, 5, 7] {
        let l = level(ell, 2000);
        for name in ["trace-vs-count", "vanishing-trace"] {
            let (n, p) = verify_family(&l, &opts, name);
            checks += n;
            problems.extend(p.into_iter().map(|w| format!("l = {ell}: {w}")));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    hard(
        problems.is_empty() && checks > 0,
        format!(
            "{checks} exact comparisons, p <= 2000, {secs:.1}s {}",
            problems.join("; ")
        ),
    )
}

fn jacobi_norm() -> Outcome {
    let mut checks = 0usize;
    let mut problems = Vec::new();
    for ell in [3, 5, 7] {
        for d in &big_level(ell).primes {
            let Some(j) = &d.jacobi else { continue };
            if d.q > X_BIG as u128 {
                continue;
            }
            let q = CycInt::from_int(ell, j.norm());
            for (k1, k2) in j.index_set().pairs() {
                let v = j.value(k1 as u64, k2 as u64).unwrap();
                checks += 1;
                if v.abs_square() != q {
                    problems.push(format!("l = {ell}, p = {}, ({k1}, {k2})", d.p));
                }
            }
        }
    }
    hard(
        problems.is_empty(),
        format!("{checks} sums, zero tolerance {}", problems.join("; ")),
    )
}

fn even_degree() -> Outcome {
    let mut checks = 0usize;
    let mut problems = Vec::new();
    for ell in (3..=251u32).filter(|&l| is_prime(l as u64)) {
        for p in sieve_primes(10_000).filter(|&p| p != ell as u64) {
            let f = fermat_bias::arith::residue_degree(p, ell).unwrap();
            if f % 2 == 1 || (p as u128).checked_pow(f).is_none_or(|q| q > 10_000) {
                continue;
            }
            let j = compute_jacobi_prime(p, ell, DEFAULT_TABLE_CAP, Strategy::Table).unwrap();
            let expected = even_degree_value(p, f, ell);
            for (k1, k2) in j.index_set().pairs() {
                checks += 1;
                if j.value(k1 as u64, k2 as u64).unwrap() != expected {
                    problems.push(format!("l = {ell}, p = {p}, ({k1}, {k2})"));
                }
            }
        }
    }
    hard(
        problems.is_empty() && checks > 0,
        format!("{checks} table sums equal -p^(f/2) {}", problems.join("; ")),
    )
}

fn non_real() -> Outcome {
    let mut checks = 0usize;
    let mut problems = Vec::new();
    for ell in [3, 5, 7] {
        for d in big_level(ell).primes.iter().filter(|d| d.f == 1 && d.p <= 10_000) {
            let j = d.jacobi();
            for (k1, k2) in j.index_set().pairs() {
                let v = j.value(k1 as u64, k2 as u64).unwrap();
                let sq = &v * &v;
                checks += 1;
                if v.conj() == v || sq.conj() == sq {
                    problems.push(format!("l = {ell}, p = {}, ({k1}, {k2})", d.p));
                }
            }
        }
    }
    hard(
        problems.is_empty(),
        format!("{checks} sums with J and J^2 off the real line {}", problems.join("; ")),
    )
}

fn galois_equivariance() -> Outcome {
    let opts = VerifyOptions::default();
    let mut checks = 0;
    let mut problems = Vec::new();
    for ell in [3, 5, 7] {
        let (n, p) = verify_family(&level(ell, 10_000), &opts, "galois-equivariance");
        checks += n;
        problems.extend(p.into_iter().map(|w| format!("l = {ell}: {w}")));
    }
    hard(
        problems.is_empty() && checks > 0,
        format!(
            "{checks} direct sums equal their orbit images, q <= 1e4 {}",
            problems.join("; ")
        ),
    )
}

fn factorization() -> Outcome {
    let ell = 5;
    let l = level(ell, 10_000);
    let mut worst = 0f64;
    let mut checks = 0;
    for s in [0.5, 0.75] {
        let s = Complex64::new(s, 0.0);
        for x in default_grid(10_000) {
            let fermat = partial_euler_product(&l, EulerTarget::Curve(CurveId::fermat(ell)), s, x, 0).unwrap();
            let mut by_quotient = Complex64::new(1.0, 0.0);
            let mut by_character = Complex64::new(1.0, 0.0);
            for c in CurveId::all(ell).into_iter().skip(1) {
                by_quotient *= partial_euler_product(&l, EulerTarget::Curve(c), s, x, 0).unwrap();
                for t in EulerTarget::characters_of(c) {
                    by_character *= partial_euler_product(&l, t, s, x, 0).unwrap();
                }
            }
            for other in [by_quotient, by_character] {
                worst = worst.max((fermat - other).norm() / fermat.norm());
                checks += 1;
            }
        }
    }
    hard(
        worst <= FACTORIZATION_TOL,
        format!("{checks} comparisons, worst relative error {worst:.1e} (tol {FACTORIZATION_TOL:.0e})"),
    )
}

fn decomposition() -> Outcome {
    let mut worst = 0f64;
    let mut worst_ratio = 0f64;
    let mut checks = 0;
    for ell in [3, 5, 7] {
        let l = big_level(ell);
        for c in CurveId::all(ell) {
            for d in bias_decomposition_series(l, EulerTarget::Curve(c), &default_grid(X_BIG), 0).unwrap() {
                worst = worst.max((d.total() - d.neg_log_product).norm());
                worst_ratio = worst_ratio.max(d.term_iii.norm() / d.bound_iii);
                checks += 1;
            }
        }
    }
    hard(
        worst <= DECOMPOSITION_TOL && worst_ratio < 1.0,
        format!(
            "{checks} grid points, worst |I + II + III - log product| = {worst:.1e} (tol {DECOMPOSITION_TOL:.0e}), max |III| / bound = {worst_ratio:.3}"
        ),
    )
}

fn base_change() -> Outcome {
    let opts = VerifyOptions {
        oracle_cap: 500,
        ..Default::default()
    };
    let mut checks = 0;
    let mut problems = Vec::new();
    for ell in [3, 5] {
        let (n, p) = verify_family(&level(ell, 500), &opts, "base-change");
        checks += n;
        problems.extend(p.into_iter().map(|w| format!("l = {ell}: {w}")));
    }
    let fermat = CurveId::fermat(3);
    let j = compute_jacobi_prime(2, 3, DEFAULT_TABLE_CAP, Strategy::Auto).unwrap();
    let factor = local_factor_over_q(&j, fermat).unwrap().integer_coeffs();
    let expected: Vec<BigInt> = [1, 0, 2].map(BigInt::from).to_vec();
    if factor.as_ref() != Some(&expected) {
        problems.push(format!("l = 3, p = 2: P(T) = {factor:?}"));
    }
    let counts = (
        count_points_bruteforce(fermat, 2, 1).unwrap(),
        count_points_bruteforce(fermat, 2, 2).unwrap(),
    );
    if counts != (3, 9) {
        problems.push(format!("#C(F_2), #C(F_4) = {counts:?}"));
    }
    hard(
        problems.is_empty() && checks > 0,
        format!(
            "{checks} checks (tol {BASE_CHANGE_TOL:.0e}), P(T) = 1 + 2T^2 at l = 3, p = 2, #C(F_2) = 3, #C(F_4) = 9 {}",
            problems.join("; ")
        ),
    )
}

fn weil_bound() -> Outcome {
    let mut checks = 0usize;
    let mut problems = Vec::new();
    for ell in [3, 5, 7] {
        for d in big_level(ell).primes.iter().filter(|d| d.f == 1) {
            for c in CurveId::all(ell) {
                let ap = ap_from_jacobi(d.jacobi(), c).unwrap() as i128;
                let two_g = 2 * c.genus() as i128;
                checks += 1;
                if ap * ap > two_g * two_g * d.p as i128 {
                    problems.push(format!("l = {ell}, p = {}, {c}: a_p = {ap}", d.p));
                }
            }
        }
    }
    hard(
        problems.is_empty(),
        format!("{checks} records up to p = {X_BIG} {}", problems.join("; ")),
    )
}

fn exploratory_fit() -> Outcome {
    let ell = 3;
    let l = big_level(ell);
    let grid = default_grid(X_BIG);
    let mut lines = Vec::new();
    let mut pass = true;
    for c in CurveId::all(ell) {
        let fit = loglog_fit(&bias_sum(l, c, &grid).unwrap(), DEFAULT_FIT_FROM, X_BIG as f64).unwrap();
        let predicted = predicted_slope(c, 0);
        pass &= fit.slope > 0.0 && (fit.slope - predicted).abs() <= FIT_TOL;
        let label = if c.kind == CurveKind::Fermat {
            "(g - m)/(l - 1)"
        } else {
            "(g' - m_k)/(l - 1)"
        };
        lines.push(format!(
            "{c}: A = {:.3}, c = {:.3}, predicted {label} = {predicted}, residual {:.1e}",
            fit.slope, fit.intercept, fit.residual_rms
        ));
    }
    soft(
        pass,
        format!(
            "l = 3, m = 0, x in [1e3, 1e6], |A - 0.5| <= {FIT_TOL}: {}",
            lines.join("; ")
        ),
    )
}

fn second_moment_drift() -> Outcome {
    let grid = default_grid(X_BIG);
    let mut lines = Vec::new();
    let mut pass = true;
    for ell in [3, 5] {
        let c = CurveId::fermat(ell);
        let series = second_moment_over_q(big_level(ell), c, &grid).unwrap();
        let fit = loglog_fit(&series, DEFAULT_FIT_FROM, X_BIG as f64).unwrap();
        pass &= fit.slope < 0.0;
        lines.push(format!("l = {ell}: slope {:.3}", fit.slope));
    }
    soft(
        pass,
        format!("negative drift over Q, report only: {}", lines.join(", ")),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for threads in [1, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        let l = pool.install(|| level(3, 50_000));
        let out = dir.path().join(threads.to_string());
        let curves: Vec<_> = CurveId::all(3).into_iter().map(|c| (c, 0)).collect();
        let paths = write_level_series(&out, &l, &curves, &default_grid(50_000), None).unwrap();
        files.push(paths.iter().map(|p| std::fs::read(p).unwrap()).collect::<Vec<_>>());
    }
    hard(files[0] == files[1], "1 and 4 threads, l = 3, x <= 5e4".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("oracle-equivalence", oracle_equivalence),
        ("jacobi-norm", jacobi_norm),
        ("even-degree-value", even_degree),
        ("non-real", non_real),
        ("galois-equivariance", galois_equivariance),
        ("factorization", factorization),
        ("decomposition", decomposition),
        ("base-change", base_change),
        ("weil-bound", weil_bound),
        ("exploratory-fit", exploratory_fit),
        ("second-moment-drift", second_moment_drift),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let start = Instant::now();
        let o = run();
        let tag = match (o.passed, o.hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (exploratory)",
        };
        println!(
            "{tag} {name} [{:.1}s] {}",
            start.elapsed().as_secs_f64(),
            o.detail.trim_end()
        );
        if !o.passed && o.hard {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
