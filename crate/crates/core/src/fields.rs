//! Residue fields `F_q` and the `ell`-th power-residue index tables that
//! realize the characters `chi_p`.
//!
//! Prime-field elements are the integers `0..p`. Elements of `F_(p^n)` are
//! integers in `0..p^n` read as base-`p` digit vectors `c_0 + c_1 X + ...`
//! of polynomial representatives modulo the canonical irreducible, which is
//! the monic degree-`n` irreducible whose lower coefficients, read as a
//! base-`p` integer, are least.

use crate::arith::{pow_mod, prime_divisors, primitive_root, residue_degree};
use crate::error::{Error, Result};

/// Default cap on index-table entries (one byte each).
pub const DEFAULT_TABLE_CAP: u64 = 1 << 27;

/// Index-table entry for the zero element, where the character vanishes.
pub const ZERO_INDEX: u8 = u8::MAX;

// ---------------------------------------------------------------------------
// Polynomials over F_p, coefficient vectors low degree first.

fn poly_trim(a: &mut Vec<u64>) {
    while a.last() == Some(&0) {
        a.pop();
    }
}

fn poly_mulmod(a: &[u64], b: &[u64], m: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut prod = vec![0u64; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    poly_rem(prod, m, p)
}

/// Remainder modulo a monic polynomial.
fn poly_rem(mut a: Vec<u64>, m: &[u64], p: u64) -> Vec<u64> {
    let n = m.len() - 1;
    while a.len() > n {
        let lead = a.pop().unwrap();
        if lead != 0 {
            let shift = a.len() - n;
            for (i, &c) in m[..n].iter().enumerate() {
                a[shift + i] = (a[shift + i] + (p - c) * lead) % p;
            }
        }
    }
    poly_trim(&mut a);
    a
}

fn poly_powmod(base: &[u64], mut e: u64, m: &[u64], p: u64) -> Vec<u64> {
    let mut acc = vec![1u64];
    let mut b = poly_rem(base.to_vec(), m, p);
    while e > 0 {
        if e & 1 == 1 {
            acc = poly_mulmod(&acc, &b, m, p);
        }
        e >>= 1;
        if e > 0 {
            b = poly_mulmod(&b, &b, m, p);
        }
    }
    acc
}

fn poly_gcd(mut a: Vec<u64>, mut b: Vec<u64>, p: u64) -> Vec<u64> {
    poly_trim(&mut a);
    poly_trim(&mut b);
    while !b.is_empty() {
        let inv = pow_mod(*b.last().unwrap(), p - 2, p);
        let monic: Vec<u64> = b.iter().map(|&c| c * inv % p).collect();
        let r = poly_rem(a, &monic, p);
        a = monic;
        b = r;
    }
    a
}

/// Rabin's irreducibility test for a monic polynomial of degree `n >= 1`.
pub fn is_irreducible(m: &[u64], p: u64) -> bool {
    let n = (m.len() - 1) as u64;
    if n == 1 {
        return true;
    }
    let x = vec![0, 1];
    // X^(p^k) mod m
    let frob = |k: u64| {
        let mut h = x.clone();
        for _ in 0..k {
            h = poly_powmod(&h, p, m, p);
        }
        h
    };
    let sub_x = |mut h: Vec<u64>| {
        h.resize(h.len().max(2), 0);
        h[1] = (h[1] + p - 1) % p;
        poly_trim(&mut h);
        h
    };
    if !sub_x(frob(n)).is_empty() {
        return false;
    }
    for r in prime_divisors(n) {
        let g = poly_gcd(m.to_vec(), sub_x(frob(n / r)), p);
        if g.len() != 1 {
            return false;
        }
    }
    true
}

/// The least monic irreducible of degree `n` over `F_p`.
pub fn canonical_irreducible(p: u64, n: u32) -> Vec<u64> {
    let count = p.pow(n);
    (0..count)
        .map(|code| {
            let mut m = digits(code as usize, p, n as usize);
            m.push(1);
            m
        })
        .find(|m| is_irreducible(m, p))
        .expect("irreducible polynomials exist in every degree")
}

fn digits(mut x: usize, p: u64, n: usize) -> Vec<u64> {
    let mut out = Vec::with_capacity(n + 1);
    for _ in 0..n {
        out.push((x % p as usize) as u64);
        x /= p as usize;
    }
    out
}

// ---------------------------------------------------------------------------

/// The finite field `F_(p^n)` with elements encoded as integers.
#[derive(Debug, Clone)]
pub struct ExtField {
    p: u64,
    n: u32,
    q: usize,
    modulus: Vec<u64>,
}

impl ExtField {
    /// `F_(p^n)` presented by the canonical irreducible.
    pub fn canonical(p: u64, n: u32) -> Self {
        let modulus = if n == 1 {
            vec![0, 1]
        } else {
            canonical_irreducible(p, n)
        };
        ExtField {
            p,
            n,
            q: p.pow(n) as usize,
            modulus,
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn modulus(&self) -> &[u64] {
        &self.modulus
    }

    pub fn decode(&self, x: usize) -> Vec<u64> {
        let mut d = digits(x, self.p, self.n as usize);
        poly_trim(&mut d);
        d
    }

    pub fn encode(&self, poly: &[u64]) -> usize {
        poly.iter()
            .rev()
            .fold(0usize, |acc, &c| acc * self.p as usize + c as usize)
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.zip_digits(a, b, |x, y| (x + y) % self.p)
    }

    pub fn sub(&self, a: usize, b: usize) -> usize {
        self.zip_digits(a, b, |x, y| (x + self.p - y) % self.p)
    }

    pub fn neg(&self, a: usize) -> usize {
        self.sub(0, a)
    }

    /// `1 - a`.
    pub fn one_minus(&self, a: usize) -> usize {
        self.sub(1, a)
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        if self.n == 1 {
            return ((a as u64 * b as u64) % self.p) as usize;
        }
        let prod = poly_mulmod(&self.decode(a), &self.decode(b), &self.modulus, self.p);
        self.encode(&prod)
    }

    pub fn pow(&self, a: usize, mut e: u64) -> usize {
        let mut acc = 1usize;
        let mut base = a;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(base, base);
            }
        }
        acc
    }

    pub fn is_generator(&self, g: usize) -> bool {
        let n = self.q as u64 - 1;
        g != 0 && prime_divisors(n).iter().all(|&r| self.pow(g, n / r) != 1)
    }

    /// Generators of `F_q^*` in increasing encoding order.
    pub fn generators(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.q).filter(move |&g| self.q == 2 || self.is_generator(g))
    }

    /// The least generator of `F_q^*`.
    pub fn canonical_generator(&self) -> usize {
        if self.n == 1 {
            return primitive_root(self.p) as usize;
        }
        self.generators().next().expect("F_q^* is cyclic")
    }

    fn zip_digits(&self, mut a: usize, mut b: usize, op: impl Fn(u64, u64) -> u64) -> usize {
        let p = self.p as usize;
        let mut out = 0usize;
        let mut place = 1usize;
        for _ in 0..self.n {
            let d = op((a % p) as u64, (b % p) as u64) as usize;
            out += d * place;
            place *= p;
            a /= p;
            b /= p;
        }
        out
    }
}

// ---------------------------------------------------------------------------

/// `ell`-th power-residue index table of `F_q`, `q = p^f`.
///
/// `index[x] = log_g(x) mod ell` for the chosen generator `g`, so the
/// character is `chi(x) = zeta^index[x]`; `index[0] = ZERO_INDEX`. The
/// choice of `g` fixes the prime of `Q(zeta)` above `p` implicitly.
#[derive(Debug, Clone)]
pub struct FqTable {
    p: u64,
    f: u32,
    q: usize,
    ell: u32,
    generator: usize,
    field: ExtField,
    index: Vec<u8>,
}

impl FqTable {
    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn f(&self) -> u32 {
        self.f
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn generator(&self) -> usize {
        self.generator
    }

    pub fn field(&self) -> &ExtField {
        &self.field
    }

    pub fn is_prime_field(&self) -> bool {
        self.f == 1
    }

    /// Raw table, `ZERO_INDEX` at 0.
    pub fn indices(&self) -> &[u8] {
        &self.index
    }

    /// `ind(x) mod ell`, or `None` for `x = 0`.
    pub fn index(&self, x: usize) -> Option<u32> {
        match self.index[x] {
            ZERO_INDEX => None,
            i => Some(i as u32),
        }
    }

    #[inline]
    pub fn one_minus(&self, x: usize) -> usize {
        if self.f == 1 {
            let p = self.p as usize;
            (p + 1 - x) % p
        } else {
            self.field.one_minus(x)
        }
    }

    /// Rebuilds the table of `F_p` using a caller-chosen generator.
    pub fn prime_field_with_generator(p: u64, ell: u32, g: u64) -> Result<FqTable> {
        check_level(p, 1, ell)?;
        Ok(FqTable {
            p,
            f: 1,
            q: p as usize,
            ell,
            generator: g as usize,
            field: ExtField::canonical(p, 1),
            index: prime_index_table(p, g, ell),
        })
    }

    /// Rebuilds the table of `F_(p^f)` using a caller-chosen generator.
    pub fn extension_with_generator(field: ExtField, ell: u32, g: usize) -> Result<FqTable> {
        check_level(field.p(), field.degree(), ell)?;
        if !field.is_generator(g) {
            return Err(Error::Inconsistent(format!(
                "{g} does not generate F_{}^*",
                field.order()
            )));
        }
        let q = field.order();
        let mut index = vec![ZERO_INDEX; q];
        let mut x = 1usize;
        let mut j = 0u8;
        for _ in 0..q - 1 {
            index[x] = j;
            j += 1;
            if j as u32 == ell {
                j = 0;
            }
            x = field.mul(x, g);
        }
        Ok(FqTable {
            p: field.p(),
            f: field.degree(),
            q,
            ell,
            generator: g,
            field,
            index,
        })
    }
}

fn check_level(p: u64, f: u32, ell: u32) -> Result<()> {
    let q = (p as u128).saturating_pow(f);
    if p == ell as u64 || q % ell as u128 != 1 {
        return Err(Error::NoCharacter {
            q: q.min(u64::MAX as u128) as u64,
            ell,
        });
    }
    Ok(())
}

/// Discrete-log table mod `ell` for `F_p`, walking eight interleaved chains
/// of powers of `g` so the modular multiplications pipeline. Each step is a
/// multiplication by the fixed `g` with a precomputed quotient estimate
/// `floor(g 2^64 / p)`.
fn prime_index_table(p: u64, g: u64, ell: u32) -> Vec<u8> {
    const CHAINS: usize = 8;
    let mut index = vec![ZERO_INDEX; p as usize];
    let n = (p - 1) as usize;
    let g_shoup = (((g as u128) << 64) / p as u128) as u64;
    let step = |x: u64| -> u64 {
        let est = ((x as u128 * g_shoup as u128) >> 64) as u64;
        let r = x.wrapping_mul(g).wrapping_sub(est.wrapping_mul(p));
        if r >= p {
            r - p
        } else {
            r
        }
    };
    let chunk = n / CHAINS;
    let mut xs = [0u64; CHAINS];
    let mut js = [0u32; CHAINS];
    for c in 0..CHAINS {
        let start = (c * chunk) as u64;
        xs[c] = pow_mod(g, start, p);
        js[c] = (start % ell as u64) as u32;
    }
    for _ in 0..chunk {
        for c in 0..CHAINS {
            index[xs[c] as usize] = js[c] as u8;
            xs[c] = step(xs[c]);
            js[c] = if js[c] + 1 == ell { 0 } else { js[c] + 1 };
        }
    }
    let start = CHAINS * chunk;
    let mut x = pow_mod(g, start as u64, p);
    let mut j = (start % ell as usize) as u32;
    for _ in start..n {
        index[x as usize] = j as u8;
        x = step(x);
        j += 1;
        if j == ell {
            j = 0;
        }
    }
    index
}

/// Index table of `F_p` under the least primitive root.
pub fn build_prime_field_table(p: u64, ell: u32) -> Result<FqTable> {
    FqTable::prime_field_with_generator(p, ell, primitive_root(p))
}

/// Index table of `F_(p^f)` under the canonical irreducible and its least
/// generator.
pub fn build_extension_field_table(p: u64, f: u32, ell: u32, cap: u64) -> Result<FqTable> {
    let expected = residue_degree(p, ell)?;
    if f != expected {
        return Err(Error::ResidueDegree {
            p,
            ell,
            got: f,
            expected,
        });
    }
    let q = (p as u128).saturating_pow(f);
    if q > cap as u128 {
        return Err(Error::TableCap { required: q, cap });
    }
    if f == 1 {
        return build_prime_field_table(p, ell);
    }
    let field = ExtField::canonical(p, f);
    let g = field.canonical_generator();
    FqTable::extension_with_generator(field, ell, g)
}

/// A prime of `Q(zeta_ell)` above `p`, realized as the Galois twist
/// `sigma_t` of the canonical prime fixed by the index-table normalization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimeOfF {
    pub p: u64,
    pub f: u32,
    /// Least member of its coset of `<p>` in `(Z/ell)^*`.
    pub t: u32,
    /// `p^f`, saturating at `u128::MAX`.
    pub q: u128,
}

/// The `(ell - 1) / f_p` primes above `p`; empty for the ramified `p = ell`.
pub fn primes_above(p: u64, ell: u32) -> Vec<PrimeOfF> {
    let Ok(f) = residue_degree(p, ell) else {
        return Vec::new();
    };
    let q = (p as u128).saturating_pow(f);
    coset_representatives(p, ell)
        .into_iter()
        .map(|t| PrimeOfF { p, f, t, q })
        .collect()
}

/// Least members of the cosets of `<p>` in `(Z/ell)^*`, ascending.
pub fn coset_representatives(p: u64, ell: u32) -> Vec<u32> {
    let l = ell as u64;
    let mut seen = vec![false; ell as usize];
    let mut reps = Vec::new();
    for t in 1..l {
        if seen[t as usize] {
            continue;
        }
        reps.push(t as u32);
        let mut x = t;
        loop {
            seen[x as usize] = true;
            x = x * (p % l) % l;
            if x == t {
                break;
            }
        }
    }
    reps
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_table_mod_7() {
        let t = build_prime_field_table(7, 3).unwrap();
        assert_eq!(t.generator(), 3);
        // 3^1 = 3, 3^2 = 2, 3^3 = 6, 3^4 = 4, 3^5 = 5, 3^6 = 1
        let expected = [None, Some(0), Some(2), Some(1), Some(1), Some(2), Some(0)];
        for (x, e) in expected.iter().enumerate() {
            assert_eq!(t.index(x), *e, "x = {x}");
        }
        assert!(matches!(build_prime_field_table(5, 3), Err(Error::NoCharacter { .. })));
        assert!(build_prime_field_table(3, 3).is_err());
    }

    #[test]
    fn class_sizes() {
        let t = build_prime_field_table(31, 5).unwrap();
        let mut counts = [0; 5];
        for x in 1..31 {
            counts[t.index(x).unwrap() as usize] += 1;
        }
        assert_eq!(counts, [6; 5]);

        let t = build_extension_field_table(3, 4, 5, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(t.q(), 81);
        let mut counts = [0; 5];
        for x in 1..81 {
            counts[t.index(x).unwrap() as usize] += 1;
        }
        assert_eq!(counts, [16; 5]);
    }

    #[test]
    fn f4_by_hand() {
        let t = build_extension_field_table(2, 2, 3, DEFAULT_TABLE_CAP).unwrap();
        assert_eq!(t.field().modulus(), &[1, 1, 1]);
        // 0, 1, X, X + 1; X generates, X^2 = X + 1.
        assert_eq!(t.generator(), 2);
        assert_eq!(t.index(0), None);
        assert_eq!(t.index(1), Some(0));
        assert_eq!(t.index(2), Some(1));
        assert_eq!(t.index(3), Some(2));
        assert_eq!(t.one_minus(2), 3);
        assert_eq!(t.one_minus(3), 2);
    }

    #[test]
    fn extension_errors() {
        assert!(matches!(
            build_extension_field_table(2, 3, 3, DEFAULT_TABLE_CAP),
            Err(Error::ResidueDegree { expected: 2, .. })
        ));
        assert!(matches!(
            build_extension_field_table(3, 4, 5, 80),
            Err(Error::TableCap { required: 81, cap: 80 })
        ));
    }

    #[test]
    fn chained_table_matches_naive_powers() {
        for (p, ell) in [(7u64, 3u32), (31, 5), (43, 7), (10007, 3), (100003, 3), (1000003, 3)] {
            if (p - 1) % ell as u64 != 0 {
                continue;
            }
            let t = build_prime_field_table(p, ell).unwrap();
            let g = primitive_root(p);
            let mut x = 1u64;
            for j in 0..p - 1 {
                assert_eq!(t.indices()[x as usize] as u64, j % ell as u64);
                x = x * g % p;
            }
            assert_eq!(t.indices()[0], ZERO_INDEX);
        }
    }

    #[test]
    fn index_is_multiplicative() {
        for (p, f, ell) in [(61u64, 1u32, 5u32), (2, 3, 7), (3, 4, 5), (5, 2, 3)] {
            let t = build_extension_field_table(p, f, ell, DEFAULT_TABLE_CAP).unwrap();
            let fld = t.field();
            for a in 1..t.q() {
                for b in (1..t.q()).step_by(3) {
                    let lhs = t.index(fld.mul(a, b)).unwrap();
                    assert_eq!(lhs, (t.index(a).unwrap() + t.index(b).unwrap()) % ell);
                }
            }
        }
    }

    #[test]
    fn canonical_irreducibles() {
        assert_eq!(canonical_irreducible(2, 2), vec![1, 1, 1]);
        assert_eq!(canonical_irreducible(2, 3), vec![1, 1, 0, 1]);
        assert_eq!(canonical_irreducible(3, 2), vec![1, 0, 1]);
        // X^4 + X + 1 is irreducible over F_2, X^4 + 1 = (X + 1)^4 is not
        assert!(is_irreducible(&[1, 1, 0, 0, 1], 2));
        assert!(!is_irreducible(&[1, 0, 0, 0, 1], 2));
        // brute-force: no roots and no quadratic factor check for degree 4 over F_3
        let m = canonical_irreducible(3, 4);
        let fld = ExtField::canonical(3, 4);
        assert_eq!(fld.modulus(), &m[..]);
        assert!(fld.is_generator(fld.canonical_generator()));
        // the multiplicative group really has order 80
        let g = fld.canonical_generator();
        assert_eq!(fld.pow(g, 80), 1);
    }

    #[test]
    fn field_axioms_small() {
        let fld = ExtField::canonical(3, 3);
        for a in 0..27 {
            assert_eq!(fld.add(a, fld.neg(a)), 0);
            assert_eq!(fld.one_minus(fld.one_minus(a)), a);
            if a != 0 {
                assert_eq!(fld.pow(a, 26), 1);
            }
            for b in 0..27 {
                assert_eq!(fld.mul(a, b), fld.mul(b, a));
                assert_eq!(fld.sub(fld.add(a, b), b), a);
            }
        }
    }

    #[test]
    fn prime_splitting() {
        let ps = primes_above(7, 3);
        assert_eq!(ps.len(), 2);
        assert_eq!(ps.iter().map(|x| x.t).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(primes_above(2, 3).len(), 1);
        assert_eq!(primes_above(2, 3)[0].q, 4);
        let ps = primes_above(2, 7);
        assert_eq!(ps.iter().map(|x| x.t).collect::<Vec<_>>(), vec![1, 3]);
        assert!(primes_above(7, 7).is_empty());
        for ell in [3u32, 5, 7, 11, 13] {
            for p in crate::arith::sieve_primes(500).filter(|&p| p != ell as u64) {
                let ps = primes_above(p, ell);
                assert_eq!(ps.len() as u32 * ps[0].f, ell - 1);
            }
        }
    }
}
