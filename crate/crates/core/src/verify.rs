//! Invariant checks over computed data, grouped into named families. Each
//! failure carries a witness naming the prime and the values involved.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;

use crate::curves::{
    ap_from_jacobi, base_change_roots, count_points_bruteforce, eigenvalues_over_q, predicted_count, CurveId, CurveKind,
};
use crate::cyclotomic::CycInt;
use crate::dataset::{LevelData, PrimeData};
use crate::error::Result;
use crate::fields::build_extension_field_table;
use crate::jacobi::{compute_jacobi_prime, even_degree_value, jacobi_prime_from_table, jacobi_sum, JacobiPrime};
use crate::lfunc::{bias_decomposition_series, bias_sum, default_grid, partial_euler_product, EulerTarget};

/// Witnesses kept per family; the failure count is always exact.
const MAX_WITNESSES: usize = 5;

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Brute-force counts run for `p` up to this.
    pub oracle_cap: u64,
    pub table_cap: u64,
    /// Direct recomputation of every pair runs for `q` up to this.
    pub direct_cap: u64,
    /// Extension tables for the even-degree check run for `q` up to this.
    pub even_degree_cap: u64,
    /// Field size bound for brute-force counts over extensions.
    pub extension_count_cap: u64,
    pub base_change_cap: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            oracle_cap: crate::curves::DEFAULT_ORACLE_CAP,
            table_cap: crate::fields::DEFAULT_TABLE_CAP,
            direct_cap: 100_000,
            even_degree_cap: 10_000,
            extension_count_cap: 10_000,
            base_change_cap: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyResult {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    pub witnesses: Vec<String>,
}

impl FamilyResult {
    fn new(name: &'static str) -> Self {
        FamilyResult {
            name,
            checks: 0,
            failures: 0,
            witnesses: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(witness());
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl fmt::Display for FamilyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            write!(f, "PASS {} ({} checks)", self.name, self.checks)
        } else {
            write!(
                f,
                "FAIL {} ({} of {} checks failed)",
                self.name, self.failures, self.checks
            )?;
            for w in &self.witnesses {
                write!(f, "\n    {w}")?;
            }
            Ok(())
        }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub ell: u32,
    pub p_max: u64,
    pub families: Vec<FamilyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyResult::passed)
    }

    pub fn family(&self, name: &str) -> Option<&FamilyResult> {
        self.families.iter().find(|f| f.name == name)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "level {}, p <= {}", self.ell, self.p_max)?;
        for fam in &self.families {
            writeln!(f, "{fam}")?;
        }
        Ok(())
    }
}

fn with_data(level: &LevelData) -> impl Iterator<Item = (&PrimeData, &JacobiPrime)> {
    level.primes.iter().filter_map(|d| d.jacobi.as_ref().map(|j| (d, j)))
}

fn jacobi_norm(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("jacobi-norm");
    for (d, j) in with_data(level) {
        let q = CycInt::from_int(level.ell, j.norm());
        let ell = level.ell as u64;
        for (k, rep) in (1..).zip(j.reps()) {
            // Every pair is (kt, t) for one k; an integer value is its own
            // conjugate, so one check covers its whole orbit.
            let twists = if rep.as_integer().is_some() { 1 } else { ell - 1 };
            for t in 1..=twists {
                let (k1, k2) = ((k as u64 * t) % ell, t);
                let v = j.value(k1, k2)?;
                let n = v.abs_square();
                fam.check(n == q, || {
                    format!(
                        "p = {}, (k1, k2) = ({k1}, {k2}): J = {v}, |J|^2 = {n}, q = {}",
                        d.p,
                        j.norm()
                    )
                });
            }
        }
    }
    Ok(fam)
}

fn galois_equivariance(level: &LevelData, opts: &VerifyOptions) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("galois-equivariance");
    for (d, j) in with_data(level) {
        if d.f % 2 == 0 || d.q > opts.direct_cap as u128 {
            continue;
        }
        let table = build_extension_field_table(d.p, d.f, level.ell, opts.table_cap)?;
        for (k1, k2) in j.index_set().pairs() {
            let direct = jacobi_sum(&table, k1 as u64, k2 as u64)?;
            let derived = j.value(k1 as u64, k2 as u64)?;
            fam.check(direct == derived, || {
                format!(
                    "p = {}, (k1, k2) = ({k1}, {k2}): direct {direct}, from orbit {derived}",
                    d.p
                )
            });
        }
    }
    Ok(fam)
}

fn even_degree(level: &LevelData, opts: &VerifyOptions) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("even-degree-value");
    for d in level
        .primes
        .iter()
        .filter(|d| d.f % 2 == 0 && d.q <= opts.even_degree_cap as u128)
    {
        let table = build_extension_field_table(d.p, d.f, level.ell, opts.table_cap)?;
        let j = jacobi_prime_from_table(&table)?;
        let expected = even_degree_value(d.p, d.f, level.ell);
        for (k1, k2) in j.index_set().pairs() {
            let v = j.value(k1 as u64, k2 as u64)?;
            fam.check(v == expected, || {
                format!("p = {}, f = {}, (k1, k2) = ({k1}, {k2}): J = {v}", d.p, d.f)
            });
        }
        if let Some(stored) = &d.jacobi {
            fam.check(stored.reps() == j.reps(), || {
                format!("p = {}: stored values differ from the table", d.p)
            });
        }
    }
    Ok(fam)
}

fn non_real(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("non-real");
    for (d, j) in with_data(level).filter(|(d, _)| d.f == 1) {
        for (k, v) in j.reps().iter().enumerate() {
            let sq = v * v;
            fam.check(v.conj() != *v && sq.conj() != sq, || {
                format!("p = {}, k = {}: J = {v} or J^2 = {sq} is real", d.p, k + 1)
            });
        }
    }
    Ok(fam)
}

fn trace_vs_count(level: &LevelData, opts: &VerifyOptions) -> Result<(FamilyResult, FamilyResult)> {
    let mut traces = FamilyResult::new("trace-vs-count");
    let mut vanishing = FamilyResult::new("vanishing-trace");
    let curves = CurveId::all(level.ell);
    for d in level.primes.iter().filter(|d| d.p <= opts.oracle_cap) {
        let mut sum = 0i64;
        let mut fermat = 0i64;
        for &c in &curves {
            let count = count_points_bruteforce(c, d.p, 1)? as i64;
            let brute = d.p as i64 + 1 - count;
            if d.f == 1 {
                let j = d.jacobi.as_ref().expect("split primes carry data");
                let ap = ap_from_jacobi(j, c)?;
                traces.check(ap == brute, || {
                    format!("p = {}, {c}: Jacobi trace {ap}, point count gives {brute}", d.p)
                });
                match c.kind {
                    CurveKind::Fermat => fermat = ap,
                    _ => sum += ap,
                }
            } else {
                vanishing.check(brute == 0, || format!("p = {}, {c}: #C(F_p) = {count}", d.p));
            }
        }
        if d.f == 1 {
            traces.check(fermat == sum, || {
                format!("p = {}: a_p(C) = {fermat}, sum over quotients {sum}", d.p)
            });
        }
    }
    Ok((traces, vanishing))
}

fn inert_trace(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("inert-trace");
    let ell = level.ell as u64;
    let expected = -BigInt::from((ell - 1) * (ell - 2));
    for (d, j) in with_data(level).filter(|(d, _)| d.p % ell == ell - 1) {
        let mut sum = CycInt::zero(level.ell);
        for (k1, k2) in j.index_set().pairs() {
            sum = &sum + &j.value(k1 as u64, k2 as u64)?;
        }
        // f = 2, so sqrt(q) = p
        let target = CycInt::from_int(level.ell, &expected * BigInt::from(d.p));
        fam.check(sum == target, || {
            format!("p = {}: sum of J = {sum}, expected {target}", d.p)
        });
    }
    Ok(fam)
}

fn factorization(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("factorization");
    let x = level.x_max as f64;
    let fermat_curve = CurveId::fermat(level.ell);
    for s in [0.5, 0.75] {
        let s = Complex64::new(s, 0.0);
        let fermat = partial_euler_product(level, EulerTarget::Curve(fermat_curve), s, x, 0)?;
        let mut by_quotient = Complex64::new(1.0, 0.0);
        let mut by_character = Complex64::new(1.0, 0.0);
        for c in CurveId::all(level.ell).into_iter().skip(1) {
            by_quotient *= partial_euler_product(level, EulerTarget::Curve(c), s, x, 0)?;
            for t in EulerTarget::characters_of(c) {
                by_character *= partial_euler_product(level, t, s, x, 0)?;
            }
        }
        let scale = fermat.norm();
        fam.check((fermat - by_quotient).norm() <= 1e-10 * scale, || {
            format!("s = {}, x = {x}: curve {fermat}, quotients {by_quotient}", s.re)
        });
        fam.check((fermat - by_character).norm() <= 1e-10 * scale, || {
            format!("s = {}, x = {x}: curve {fermat}, characters {by_character}", s.re)
        });
    }
    Ok(fam)
}

/// Arguments this close to `pi` may land on either end of the branch cut.
const CUT_SLACK: f64 = 1e-6;

/// Above this many roots the Fermat spectrum is left to the quotients.
const MAX_DIRECT_ROOTS: u64 = 200_000;

/// Largest distance when two multisets of equal size are paired in order
/// of argument; `None` if the sizes differ. Entries near the branch cut can
/// sort to either end, so the cyclic shifts they allow are also tried.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> Option<f64> {
    if a.len() != b.len() {
        return None;
    }
    let sorted = |v: &[Complex64]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.arg().total_cmp(&y.arg()).then(x.norm().total_cmp(&y.norm())));
        v
    };
    let (a, b) = (sorted(a), sorted(b));
    let near_cut = |v: &[Complex64]| {
        v.iter()
            .filter(|z| std::f64::consts::PI - z.arg().abs() < CUT_SLACK)
            .count()
    };
    let w = near_cut(&a).max(near_cut(&b)) as isize;
    let n = a.len() as isize;
    if n == 0 {
        return Some(0.0);
    }
    (-w..=w)
        .map(|shift| {
            a.iter()
                .enumerate()
                .map(|(i, x)| (x - b[(i as isize + shift).rem_euclid(n) as usize]).norm())
                .fold(0.0, f64::max)
        })
        .min_by(f64::total_cmp)
}

fn base_change(level: &LevelData, opts: &VerifyOptions) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("base-change");
    for d in &level.primes {
        let j = match &d.jacobi {
            Some(j) => j.clone(),
            None if d.q <= opts.base_change_cap as u128 => {
                compute_jacobi_prime(d.p, level.ell, opts.table_cap, Default::default())?
            }
            None => continue,
        };
        let scale = (d.p as f64).sqrt();
        for c in CurveId::all(level.ell) {
            // Frobenius orbits never mix quotient indices, so the Fermat
            // spectrum is the union of the quotient spectra already checked.
            let roots = (level.ell as u64 - 1) * 2 * c.genus() as u64;
            if c.kind != CurveKind::Fermat || roots <= MAX_DIRECT_ROOTS {
                let over_q = eigenvalues_over_q(&j, c)?;
                let repeated: Vec<Complex64> = (0..level.ell - 1)
                    .flat_map(|_| over_q.iter().map(|e| e / scale))
                    .collect();
                let over_f: Vec<Complex64> = base_change_roots(&j, c)?.iter().map(|e| e / scale).collect();
                let dist = multiset_distance(&repeated, &over_f);
                fam.check(dist.is_some_and(|e| e <= 1e-9), || {
                    format!("p = {}, {c}: eigenvalue mismatch {dist:?}", d.p)
                });
            }

            let mut n = 1;
            while (d.p as u128).pow(n) <= opts.extension_count_cap as u128 {
                let brute = BigInt::from(count_points_bruteforce(c, d.p, n)?);
                let predicted = predicted_count(&j, c, n)?;
                fam.check(brute == predicted, || {
                    format!(
                        "p = {}, {c}, n = {n}: #C(F_p^n) = {brute}, local factor predicts {predicted}",
                        d.p
                    )
                });
                n += 1;
            }
        }
    }
    Ok(fam)
}

fn decomposition(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("decomposition");
    let grid = default_grid(level.x_max);
    for c in CurveId::all(level.ell) {
        let bias = bias_sum(level, c, &grid)?;
        let series = bias_decomposition_series(level, EulerTarget::Curve(c), &grid, 0)?;
        for (dec, b) in series.iter().zip(&bias) {
            let gap = (dec.total() - dec.neg_log_product).norm();
            fam.check(gap <= 1e-9, || {
                format!(
                    "{c}, x = {}: I + II + III differs from the log product by {gap:e}",
                    dec.x
                )
            });
            fam.check(dec.term_iii.norm() < dec.bound_iii, || {
                format!(
                    "{c}, x = {}: |III| = {} exceeds {}",
                    dec.x,
                    dec.term_iii.norm(),
                    dec.bound_iii
                )
            });
            let split: Complex64 = dec.term_i_f.values().sum();
            fam.check(
                (split - dec.term_i).norm() <= 1e-12 * dec.term_i.norm().max(1.0),
                || format!("{c}, x = {}: I = {}, sum of I_f = {split}", dec.x, dec.term_i),
            );
            let i1 = dec.term_i_f.get(&1).copied().unwrap_or_default();
            let expected = (level.ell - 1) as f64 * b.value;
            fam.check((i1.re - expected).abs() <= 1e-9 * expected.abs().max(1.0), || {
                format!("{c}, x = {}: I_1 = {}, (l - 1) * bias = {expected}", dec.x, i1.re)
            });
        }
    }
    Ok(fam)
}

fn weil_bound(level: &LevelData) -> Result<FamilyResult> {
    let mut fam = FamilyResult::new("weil-bound");
    for (d, j) in with_data(level).filter(|(d, _)| d.f == 1) {
        for c in CurveId::all(level.ell) {
            let ap = ap_from_jacobi(j, c)? as i128;
            let two_g = 2 * c.genus() as i128;
            fam.check(ap * ap <= two_g * two_g * d.p as i128, || {
                format!(
                    "p = {}, {c}: a_p = {ap}, 2g sqrt(p) = {}",
                    d.p,
                    two_g as f64 * (d.p as f64).sqrt()
                )
            });
        }
    }
    Ok(fam)
}

/// Runs every family over `level` (whose `x_max` bounds the primes).
pub fn verify_level(level: &LevelData, opts: &VerifyOptions) -> Result<VerifyReport> {
    let (traces, vanishing) = trace_vs_count(level, opts)?;
    let families = vec![
        jacobi_norm(level)?,
        galois_equivariance(level, opts)?,
        even_degree(level, opts)?,
        non_real(level)?,
        traces,
        vanishing,
        inert_trace(level)?,
        factorization(level)?,
        base_change(level, opts)?,
        decomposition(level)?,
        weil_bound(level)?,
    ];
    Ok(VerifyReport {
        ell: level.ell,
        p_max: level.x_max,
        families,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::JacobiCache;
    use crate::fields::DEFAULT_TABLE_CAP;
    use crate::jacobi::JacobiRecord;

    #[test]
    fn clean_data_passes() {
        for (ell, p_max) in [(3, 2000), (5, 1000), (7, 300)] {
            let level = LevelData::compute(ell, p_max, DEFAULT_TABLE_CAP, None).unwrap();
            let report = verify_level(&level, &VerifyOptions::default()).unwrap();
            assert!(report.passed(), "{report}");
            assert!(report.families.iter().all(|f| f.checks > 0), "{report}");
        }
    }

    #[test]
    fn flipped_coefficient_is_caught() {
        let mut cache = JacobiCache::in_memory();
        LevelData::compute(3, 500, DEFAULT_TABLE_CAP, Some(&mut cache)).unwrap();
        let good = cache.get(3, 13, 1, 1, 1).unwrap().clone();
        let mut coeffs = good.coeffs().to_vec();
        coeffs[1] += 1;
        cache
            .put(&JacobiRecord {
                ell: 3,
                p: 13,
                f: 1,
                k1: 1,
                k2: 1,
                value: CycInt::from_coeffs(3, coeffs).unwrap(),
            })
            .unwrap();
        let level = LevelData::compute(3, 500, DEFAULT_TABLE_CAP, Some(&mut cache)).unwrap();
        let report = verify_level(&level, &VerifyOptions::default()).unwrap();
        let norm = report.family("jacobi-norm").unwrap();
        assert!(!norm.passed());
        assert!(norm.witnesses[0].contains("p = 13"), "{}", norm.witnesses[0]);
        assert!(!report.passed());
    }

    #[test]
    fn multiset_matching() {
        let a = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)];
        let b = [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1e-12)];
        assert!(multiset_distance(&a, &b).unwrap() < 1e-11);
        assert!(multiset_distance(&a, &b[..1]).is_none());
        // -1 approached from both sides of the cut
        let a = [
            Complex64::new(-1.0, 1e-13),
            Complex64::new(-1.0, -1e-13),
            Complex64::new(0.0, 1.0),
        ];
        let b = [
            Complex64::new(-1.0, -1e-13),
            Complex64::new(0.0, 1.0),
            Complex64::new(-1.0, -2e-13),
        ];
        assert!(multiset_distance(&a, &b).unwrap() < 1e-11);
        let c = [
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, -1.0),
        ];
        assert!(multiset_distance(&a, &c).unwrap() > 1.0);
    }
}
