//! Jacobi data for every prime up to a cutoff at one level, computed in
//! parallel and optionally backed by a [`JacobiCache`].

use num_complex::Complex64;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::arith::{residue_degree, sieve_primes};
use crate::cache::JacobiCache;
use crate::error::{Error, Result};
use crate::fields::{primes_above, PrimeOfF};
use crate::jacobi::{compute_jacobi_prime, JacobiPrime, Strategy};

/// Per-prime numbers the series need, derived once from the Jacobi data.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeSummary {
    ell: u32,
    /// `J_(k,1)` under `zeta -> exp(2 pi i u / l)` at `(k - 1) * l + u`.
    embedded: Vec<Complex64>,
    /// `Tr(J_(k,1))` at `k - 1`. Summing `J_(kt,t)` over `t` at any prime
    /// above `p` runs over all conjugates, so this is `a_p(C_k)` for split
    /// `p`.
    pub traces: Vec<i128>,
    /// `Tr(J_(k,1)^2)` at `k - 1`.
    pub square_traces: Vec<i128>,
}

fn to_i128(n: &num_bigint::BigInt, p: u64) -> Result<i128> {
    n.to_i128()
        .ok_or_else(|| Error::Inconsistent(format!("trace overflows at p = {p}")))
}

impl PrimeSummary {
    pub fn new(data: &JacobiPrime) -> Result<Self> {
        let ell = data.ell;
        let mut embedded = Vec::with_capacity(((ell - 2) * ell) as usize);
        let mut traces = Vec::new();
        let mut square_traces = Vec::new();
        for rep in data.reps() {
            embedded.extend((0..ell).map(|u| rep.embed_at(u)));
            traces.push(to_i128(&rep.trace(), data.p)?);
            square_traces.push(to_i128(&(rep * rep).trace(), data.p)?);
        }
        Ok(PrimeSummary {
            ell,
            embedded,
            traces,
            square_traces,
        })
    }

    /// `sigma_u(J_(k,1))` as a complex number.
    pub fn value(&self, k: u32, u: u32) -> Complex64 {
        self.embedded[((k - 1) * self.ell + u % self.ell) as usize]
    }
}

/// One rational prime `p != l`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimeData {
    pub p: u64,
    pub f: u32,
    /// `p^f`, saturating at `u128::MAX`.
    pub q: u128,
    /// Present for `f = 1`, for even `f` and whenever `q <= x_max`; odd
    /// `f >= 3` with `q` beyond the cutoff never enters any sum.
    pub jacobi: Option<JacobiPrime>,
    /// Present for `f <= 2` and whenever `q <= x_max`.
    pub summary: Option<PrimeSummary>,
}

impl PrimeData {
    pub fn jacobi(&self) -> &JacobiPrime {
        self.jacobi.as_ref().expect("Jacobi data present")
    }

    pub fn summary(&self) -> &PrimeSummary {
        self.summary.as_ref().expect("Jacobi data present")
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ComputeStats {
    pub tables_built: usize,
    pub cache_hits: usize,
}

#[derive(Debug, Clone)]
pub struct LevelData {
    pub ell: u32,
    pub x_max: u64,
    pub primes: Vec<PrimeData>,
    pub stats: ComputeStats,
}

fn needs_data(f: u32, q: u128, x_max: u64) -> bool {
    f == 1 || f % 2 == 0 || q <= x_max as u128
}

fn needs_table(f: u32, q: u128, x_max: u64) -> bool {
    f % 2 == 1 && q <= x_max as u128
}

impl LevelData {
    /// Runs on the current rayon pool; results do not depend on its size.
    pub fn compute(ell: u32, x_max: u64, table_cap: u64, mut cache: Option<&mut JacobiCache>) -> Result<LevelData> {
        let mut primes: Vec<PrimeData> = sieve_primes(x_max)
            .filter(|&p| p != ell as u64)
            .map(|p| {
                let f = residue_degree(p, ell).expect("p != ell");
                PrimeData {
                    p,
                    f,
                    q: (p as u128).saturating_pow(f),
                    jacobi: None,
                    summary: None,
                }
            })
            .collect();

        let mut stats = ComputeStats::default();
        let mut missing = Vec::new();
        for (i, pd) in primes.iter_mut().enumerate() {
            if !needs_data(pd.f, pd.q, x_max) {
                continue;
            }
            if !needs_table(pd.f, pd.q, x_max) {
                pd.jacobi = Some(compute_jacobi_prime(pd.p, ell, table_cap, Strategy::Auto)?);
                continue;
            }
            match cache.as_ref().and_then(|c| c.get_prime(ell, pd.p, pd.f)) {
                Some(d) => {
                    pd.jacobi = Some(d);
                    stats.cache_hits += 1;
                }
                None => missing.push(i),
            }
        }

        let computed: Vec<JacobiPrime> = missing
            .par_iter()
            .map(|&i| compute_jacobi_prime(primes[i].p, ell, table_cap, Strategy::Auto))
            .collect::<Result<_>>()?;
        stats.tables_built = computed.len();
        for (i, d) in missing.into_iter().zip(computed) {
            if let Some(c) = cache.as_deref_mut() {
                c.put_prime(&d)?;
            }
            primes[i].jacobi = Some(d);
        }
        if let Some(c) = cache {
            c.flush()?;
        }
        // Sums only read summaries for f <= 2 or q within range; elsewhere
        // the traces need not fit in an i128.
        primes.par_iter_mut().try_for_each(|d| -> Result<()> {
            if let Some(j) = d.jacobi.as_ref().filter(|_| d.f <= 2 || d.q <= x_max as u128) {
                d.summary = Some(PrimeSummary::new(j)?);
            }
            Ok(())
        })?;
        log::info!(
            "level {ell}, x <= {x_max}: {} tables built, {} cache hits",
            stats.tables_built,
            stats.cache_hits
        );
        Ok(LevelData {
            ell,
            x_max,
            primes,
            stats,
        })
    }

    pub fn get(&self, p: u64) -> Option<&PrimeData> {
        self.primes
            .binary_search_by_key(&p, |d| d.p)
            .ok()
            .map(|i| &self.primes[i])
    }

    /// Primes of `F` with norm at most `x`, ordered by `(q, p, t)`, with
    /// the data of the prime below.
    pub fn primes_of_f(&self, x: u64) -> Vec<(PrimeOfF, &PrimeData)> {
        let mut out: Vec<_> = self
            .primes
            .iter()
            .filter(|d| d.q <= x as u128)
            .flat_map(|d| primes_above(d.p, self.ell).into_iter().map(move |pr| (pr, d)))
            .collect();
        out.sort_by_key(|(pr, _)| (pr.q, pr.p, pr.t));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::DEFAULT_TABLE_CAP;

    #[test]
    fn covers_the_right_primes() {
        let d = LevelData::compute(7, 200, DEFAULT_TABLE_CAP, None).unwrap();
        assert!(d.get(7).is_none());
        // 2 has degree 3 and 2^3 <= 200
        assert!(d.get(2).unwrap().jacobi.is_some());
        // 11 has degree 3 and 11^3 > 200
        assert_eq!(d.get(11).unwrap().f, 3);
        assert!(d.get(11).unwrap().jacobi.is_none());
        // 13 has degree 2
        assert!(d.get(13).unwrap().jacobi.is_some());
        let local = d.primes_of_f(200);
        assert!(local.windows(2).all(|w| w[0].0.q <= w[1].0.q));
        assert_eq!(local[0].0.q, 8);
    }

    #[test]
    fn summaries_match_exact_values() {
        use crate::curves::{ap_from_jacobi, CurveId};
        let d = LevelData::compute(5, 3000, DEFAULT_TABLE_CAP, None).unwrap();
        for (pr, pd) in d.primes_of_f(3000) {
            let (j, s) = (pd.jacobi(), pd.summary());
            for (k1, k2) in j.index_set().pairs() {
                let (k, t) = j.index_set().decompose(k1 as u64, k2 as u64).unwrap();
                let exact = j.value_at(&pr, k1 as u64, k2 as u64).unwrap().embed_at(1);
                assert!((s.value(k, t * pr.t) - exact).norm() < 1e-9);
            }
        }
        for pd in d.primes.iter().filter(|pd| pd.f == 1) {
            for k in 1..=3 {
                let c = CurveId::quotient(5, k).unwrap();
                assert_eq!(
                    ap_from_jacobi(pd.jacobi(), c).unwrap() as i128,
                    pd.summary().traces[k as usize - 1]
                );
            }
        }
    }

    #[test]
    fn cache_is_reused_and_results_agree() {
        let mut cache = JacobiCache::in_memory();
        let cold = LevelData::compute(5, 2000, DEFAULT_TABLE_CAP, Some(&mut cache)).unwrap();
        assert!(cold.stats.tables_built > 0);
        assert_eq!(cold.stats.cache_hits, 0);
        let warm = LevelData::compute(5, 2000, DEFAULT_TABLE_CAP, Some(&mut cache)).unwrap();
        assert_eq!(warm.stats.tables_built, 0);
        assert_eq!(warm.stats.cache_hits, cold.stats.tables_built);
        assert_eq!(warm.primes, cold.primes);
    }

    #[test]
    fn independent_of_thread_count() {
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = one.install(|| LevelData::compute(3, 5000, DEFAULT_TABLE_CAP, None).unwrap());
        let b = four.install(|| LevelData::compute(3, 5000, DEFAULT_TABLE_CAP, None).unwrap());
        assert_eq!(a.primes, b.primes);
    }
}
