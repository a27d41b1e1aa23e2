//! Exact Jacobi sums `J_(k1,k2)(p) = -sum_x chi(x)^k1 chi(1-x)^k2`.
//!
//! Only the orbit representatives `(k, 1)` are computed from a field table;
//! every other pair `(kt, t)` is `sigma_t` of its representative, and the
//! conjugate primes `sigma_s(p)` are reached through the same action.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::arith::residue_degree;
use crate::cyclotomic::CycInt;
use crate::error::{Error, Result};
use crate::fields::{build_extension_field_table, primes_above, FqTable, PrimeOfF, ZERO_INDEX};

pub fn inv_mod(a: u32, ell: u32) -> u32 {
    crate::arith::pow_mod(a as u64, (ell - 2) as u64, ell as u64) as u32
}

/// The index set `I_ell = {(k1, k2) in G x G : k1 + k2 != 0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSet {
    ell: u32,
}

impl IndexSet {
    pub fn new(ell: u32) -> Self {
        IndexSet { ell }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn len(&self) -> usize {
        ((self.ell - 1) * (self.ell - 2)) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, k1: u64, k2: u64) -> bool {
        let l = self.ell as u64;
        k1 % l != 0 && k2 % l != 0 && (k1 + k2) % l != 0
    }

    /// All pairs, reduced mod `ell`, in lexicographic order.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        let l = self.ell;
        (1..l)
            .flat_map(|a| (1..l).map(move |b| (a, b)))
            .filter(|&(a, b)| (a + b) % l != 0)
            .collect()
    }

    /// `(k, 1)` for `1 <= k <= ell - 2`.
    pub fn orbit_reps(&self) -> Vec<(u32, u32)> {
        (1..self.ell - 1).map(|k| (k, 1)).collect()
    }

    /// Writes `(k1, k2) = (k t, t)`, returning `(k, t)`.
    pub fn decompose(&self, k1: u64, k2: u64) -> Result<(u32, u32)> {
        if !self.contains(k1, k2) {
            return Err(Error::OutsideIndexSet { k1, k2, ell: self.ell });
        }
        let l = self.ell as u64;
        let t = (k2 % l) as u32;
        let k = ((k1 % l) * inv_mod(t, self.ell) as u64 % l) as u32;
        Ok((k, t))
    }
}

/// One stored Jacobi sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiRecord {
    pub ell: u32,
    pub p: u64,
    pub f: u32,
    pub k1: u32,
    pub k2: u32,
    pub value: CycInt,
}

/// Direct evaluation from the table: counts
/// `c_j = #{x not in {0, 1} : k1 ind(x) + k2 ind(1 - x) = j mod ell}`
/// and returns `-sum c_j zeta^j`.
pub fn jacobi_sum(table: &FqTable, k1: u64, k2: u64) -> Result<CycInt> {
    let ell = table.ell();
    if !IndexSet::new(ell).contains(k1, k2) {
        return Err(Error::OutsideIndexSet { k1, k2, ell });
    }
    let l = ell as usize;
    let (a, b) = ((k1 % ell as u64) as usize, (k2 % ell as u64) as usize);
    let mut counts = vec![0i64; l];
    let idx = table.indices();
    for x in 2..table.q() {
        let i = idx[x];
        let j = idx[table.one_minus(x)];
        debug_assert!(i != ZERO_INDEX && j != ZERO_INDEX);
        counts[(a * i as usize + b * j as usize) % l] += 1;
    }
    for c in &mut counts {
        *c = -*c;
    }
    Ok(CycInt::from_full_counts(ell, &counts))
}

/// The `ell x ell` matrix of cyclotomic numbers
/// `h[a][b] = #{x not in {0, 1} : ind(x) = a, ind(1 - x) = b}`, row-major.
///
/// This is the single O(q) pass from which every Jacobi sum at the prime
/// follows in O(ell^2).
pub fn pair_histogram(table: &FqTable) -> Vec<u64> {
    let l = table.ell() as usize;
    let idx = table.indices();
    let mut h = vec![0u32; l * l];
    if table.is_prime_field() {
        // x and 1 - x = p + 1 - x pair up; x = (p + 1) / 2 is its own partner.
        let p = table.q();
        let half = (p - 1) / 2;
        let (lo, hi) = (&idx[2..=half], &idx[half + 2..p]);
        for (&a, &b) in lo.iter().zip(hi.iter().rev()) {
            let (a, b) = (a as usize, b as usize);
            h[a * l + b] += 1;
            h[b * l + a] += 1;
        }
        let mid = idx[half + 1] as usize;
        h[mid * l + mid] += 1;
    } else {
        for x in 2..table.q() {
            let a = idx[x] as usize;
            let b = idx[table.one_minus(x)] as usize;
            h[a * l + b] += 1;
        }
    }
    h.into_iter().map(u64::from).collect()
}

/// `J_(k1,k2)` from the cyclotomic numbers.
pub fn jacobi_from_histogram(hist: &[u64], ell: u32, k1: u32, k2: u32) -> CycInt {
    let l = ell as usize;
    let mut counts = vec![0i64; l];
    for a in 0..l {
        for b in 0..l {
            let h = hist[a * l + b];
            if h != 0 {
                counts[(k1 as usize * a + k2 as usize * b) % l] -= h as i64;
            }
        }
    }
    CycInt::from_full_counts(ell, &counts)
}

/// How to obtain the sums at a prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Use `J = -sqrt(q)` for even residue degree, tables otherwise.
    #[default]
    Auto,
    /// Always scan a field table.
    Table,
}

/// Jacobi data at the canonical prime above `p`: the orbit representatives
/// `J_(k,1)`, `k = 1..=ell-2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobiPrime {
    pub ell: u32,
    pub p: u64,
    pub f: u32,
    /// `p^f`, saturating at `u128::MAX`; see [`JacobiPrime::norm`].
    pub q: u128,
    reps: Vec<CycInt>,
}

impl JacobiPrime {
    pub fn from_reps(ell: u32, p: u64, reps: Vec<CycInt>) -> Result<Self> {
        let f = residue_degree(p, ell)?;
        if reps.len() != (ell - 2) as usize || reps.iter().any(|r| r.ell() != ell) {
            return Err(Error::Inconsistent(format!(
                "expected {} orbit representatives at level {ell}",
                ell - 2
            )));
        }
        Ok(JacobiPrime {
            ell,
            p,
            f,
            q: (p as u128).saturating_pow(f),
            reps,
        })
    }

    /// `J_(k,1)` at the canonical prime.
    /// `p^f` exactly.
    pub fn norm(&self) -> BigInt {
        BigInt::from(self.p).pow(self.f)
    }

    pub fn rep(&self, k: u32) -> &CycInt {
        &self.reps[(k - 1) as usize]
    }

    pub fn reps(&self) -> &[CycInt] {
        &self.reps
    }

    pub fn index_set(&self) -> IndexSet {
        IndexSet::new(self.ell)
    }

    /// `J_(k1,k2)` at the canonical prime.
    pub fn value(&self, k1: u64, k2: u64) -> Result<CycInt> {
        let (k, t) = self.index_set().decompose(k1, k2)?;
        Ok(self.rep(k).galois_unchecked(t))
    }

    /// `J_(k1,k2)` at the prime `sigma_s(p0)`, which equals
    /// `J_(s k1, s k2)` at the canonical prime.
    pub fn value_at(&self, prime: &PrimeOfF, k1: u64, k2: u64) -> Result<CycInt> {
        let s = prime.t as u64;
        self.value(k1 * s, k2 * s)
    }

    pub fn records(&self) -> Vec<JacobiRecord> {
        self.reps
            .iter()
            .enumerate()
            .map(|(i, v)| JacobiRecord {
                ell: self.ell,
                p: self.p,
                f: self.f,
                k1: i as u32 + 1,
                k2: 1,
                value: v.clone(),
            })
            .collect()
    }

    /// Every value over every prime above `p` and every pair in `I_ell`.
    pub fn all_values(&self) -> BTreeMap<(PrimeOfF, (u32, u32)), CycInt> {
        let mut out = BTreeMap::new();
        for prime in primes_above(self.p, self.ell) {
            for (k1, k2) in self.index_set().pairs() {
                let v = self
                    .value_at(&prime, k1 as u64, k2 as u64)
                    .expect("pairs() stays inside I_ell");
                out.insert((prime, (k1, k2)), v);
            }
        }
        out
    }

    /// Whether the data came from the even-degree closed form.
    pub fn is_even_degree(&self) -> bool {
        self.f % 2 == 0
    }
}

/// `-p^(f/2)`, the value of every Jacobi sum at a prime of even degree.
pub fn even_degree_value(p: u64, f: u32, ell: u32) -> CycInt {
    CycInt::from_int(ell, -BigInt::from(p).pow(f / 2))
}

/// Orbit representatives from a prebuilt table.
pub fn jacobi_prime_from_table(table: &FqTable) -> Result<JacobiPrime> {
    let ell = table.ell();
    let hist = pair_histogram(table);
    let reps = (1..ell - 1).map(|k| jacobi_from_histogram(&hist, ell, k, 1)).collect();
    JacobiPrime::from_reps(ell, table.p(), reps)
}

/// Computes the Jacobi data at the canonical prime above `p`.
pub fn compute_jacobi_prime(p: u64, ell: u32, cap: u64, strategy: Strategy) -> Result<JacobiPrime> {
    let f = residue_degree(p, ell)?;
    if f % 2 == 0 && strategy == Strategy::Auto {
        let v = even_degree_value(p, f, ell);
        return JacobiPrime::from_reps(ell, p, vec![v; (ell - 2) as usize]);
    }
    let table = build_extension_field_table(p, f, ell, cap)?;
    jacobi_prime_from_table(&table)
}

/// Complete Jacobi data above `p`: one value per (prime above `p`, pair).
pub fn jacobi_sums_at_p(p: u64, ell: u32, cap: u64) -> Result<BTreeMap<(PrimeOfF, (u32, u32)), CycInt>> {
    Ok(compute_jacobi_prime(p, ell, cap, Strategy::Auto)?.all_values())
}
