//! Rational primes, modular arithmetic and multiplicative orders.

use crate::error::{Error, Result};

/// Default number of sieve entries per segment.
pub const DEFAULT_SEGMENT: usize = 1 << 20;

/// Segmented sieve of Eratosthenes over `[2, limit]`.
///
/// Memory is `O(sqrt(limit) + segment)`; primes are yielded in increasing
/// order, each exactly once.
#[derive(Debug, Clone)]
pub struct PrimeStream {
    limit: u64,
    segment: usize,
    base: Vec<u64>,
    low: u64,
    buf: Vec<u64>,
    pos: usize,
}

impl PrimeStream {
    pub fn new(limit: u64) -> Self {
        Self::with_segment(limit, DEFAULT_SEGMENT)
    }

    pub fn with_segment(limit: u64, segment: usize) -> Self {
        let segment = segment.max(64);
        let root = isqrt(limit);
        PrimeStream {
            limit,
            segment,
            base: simple_sieve(root),
            low: 2,
            buf: Vec::new(),
            pos: 0,
        }
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    fn fill(&mut self) -> bool {
        self.buf.clear();
        self.pos = 0;
        while self.buf.is_empty() {
            if self.low > self.limit {
                return false;
            }
            let high = self.limit.min(self.low + self.segment as u64 - 1);
            let len = (high - self.low + 1) as usize;
            let mut composite = vec![false; len];
            for &p in &self.base {
                if p * p > high {
                    break;
                }
                let mut m = (p * p).max(self.low.div_ceil(p) * p);
                while m <= high {
                    composite[(m - self.low) as usize] = true;
                    m += p;
                }
            }
            let low = self.low;
            self.buf.extend(
                composite
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| !c)
                    .map(|(i, _)| low + i as u64),
            );
            self.low = high + 1;
        }
        true
    }
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        if self.pos >= self.buf.len() && !self.fill() {
            return None;
        }
        let p = self.buf[self.pos];
        self.pos += 1;
        Some(p)
    }
}

/// All primes `<= limit`, streamed. `limit < 2` yields nothing.
pub fn sieve_primes(limit: u64) -> PrimeStream {
    PrimeStream::new(limit)
}

fn simple_sieve(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut m = i * i;
            while m <= n {
                composite[m] = true;
                m += i;
            }
        }
    }
    out
}

pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &w in &WITNESSES {
        if n % w == 0 {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Trial-division factorization `n = prod p^e`, primes ascending.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n).into_iter().map(|(p, _)| p).collect()
}

/// Multiplicative order of `a` modulo `m`; `a` must be a unit.
pub fn multiplicative_order(a: u64, m: u64) -> u64 {
    let mut x = a % m;
    let mut k = 1;
    while x != 1 % m {
        x = mul_mod(x, a, m);
        k += 1;
    }
    k
}

/// The residue degree `f_p`: the order of `p` modulo `ell`.
pub fn residue_degree(p: u64, ell: u32) -> Result<u32> {
    if p % ell as u64 == 0 {
        return Err(Error::RamifiedPrime { p, ell });
    }
    Ok(multiplicative_order(p, ell as u64) as u32)
}

/// Least primitive root modulo the prime `p` (`1` for `p = 2`).
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let divisors = prime_divisors(p - 1);
    (2..p)
        .find(|&g| divisors.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1))
        .expect("a prime modulus has a primitive root")
}

/// Primitive roots modulo `p` in increasing order.
pub fn primitive_roots(p: u64) -> impl Iterator<Item = u64> {
    let divisors = prime_divisors(p - 1);
    (1..p).filter(move |&g| p == 2 || (g > 1 && divisors.iter().all(|&r| pow_mod(g, (p - 1) / r, p) != 1)))
}

/// The level `ell` together with the two genera it determines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelConfig {
    pub ell: u32,
    /// Genus of the Fermat curve, `(ell-1)(ell-2)/2`.
    pub genus_g: u32,
    /// Genus of each quotient curve, `(ell-1)/2`.
    pub genus_gp: u32,
}

impl LevelConfig {
    pub fn new(ell: u64) -> Result<Self> {
        if ell < 3 || ell > 251 || !is_prime(ell) {
            return Err(Error::InvalidLevel(ell));
        }
        let l = ell as u32;
        Ok(LevelConfig {
            ell: l,
            genus_g: (l - 1) * (l - 2) / 2,
            genus_gp: (l - 1) / 2,
        })
    }
}
