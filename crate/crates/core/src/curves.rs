//! The Fermat curve `X^l + Y^l = Z^l` and its quotients
//! `v^l = u (u + 1)^(l - k - 1)`: point counts, traces of Frobenius and
//! local factors.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::cyclotomic::CycInt;
use crate::error::{Error, Result};
use crate::fields::{primes_above, ExtField, PrimeOfF};
use crate::jacobi::JacobiPrime;

/// Default bound on `p` for the brute-force counters.
pub const DEFAULT_ORACLE_CAP: u64 = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CurveKind {
    Fermat,
    Quotient(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CurveId {
    pub kind: CurveKind,
    pub ell: u32,
}

impl CurveId {
    pub fn fermat(ell: u32) -> Self {
        CurveId {
            kind: CurveKind::Fermat,
            ell,
        }
    }

    pub fn quotient(ell: u32, k: u32) -> Result<Self> {
        if k == 0 || k > ell - 2 {
            return Err(Error::InvalidQuotient { k, max: ell - 2 });
        }
        Ok(CurveId {
            kind: CurveKind::Quotient(k),
            ell,
        })
    }

    /// The Fermat curve followed by every quotient.
    pub fn all(ell: u32) -> Vec<CurveId> {
        std::iter::once(Self::fermat(ell))
            .chain((1..ell - 1).map(|k| CurveId {
                kind: CurveKind::Quotient(k),
                ell,
            }))
            .collect()
    }

    pub fn genus(&self) -> u32 {
        match self.kind {
            CurveKind::Fermat => (self.ell - 1) * (self.ell - 2) / 2,
            CurveKind::Quotient(_) => (self.ell - 1) / 2,
        }
    }

    /// Quotient indices `k` whose characters make up this curve.
    pub fn ks(&self) -> Vec<u32> {
        match self.kind {
            CurveKind::Fermat => (1..self.ell - 1).collect(),
            CurveKind::Quotient(k) => vec![k],
        }
    }

    /// The `(k, t)` labels of the characters `psi_(kt,t)`, lexicographic.
    pub fn characters(&self) -> Vec<(u32, u32)> {
        self.ks()
            .into_iter()
            .flat_map(|k| (1..self.ell).map(move |t| (k, t)))
            .collect()
    }

    /// The pairs `(kt mod l, t)` in character order.
    pub fn pairs(&self) -> Vec<(u32, u32)> {
        self.characters()
            .into_iter()
            .map(|(k, t)| ((k * t) % self.ell, t))
            .collect()
    }

    /// Short name used in file names and CSV columns.
    pub fn name(&self) -> String {
        match self.kind {
            CurveKind::Fermat => "fermat".to_string(),
            CurveKind::Quotient(k) => format!("quotient{k}"),
        }
    }

    pub fn parse(ell: u32, s: &str) -> Result<Self> {
        if s == "fermat" {
            return Ok(Self::fermat(ell));
        }
        let k = s
            .strip_prefix("quotient")
            .unwrap_or(s)
            .parse::<u32>()
            .map_err(|_| Error::Config(format!("unknown curve {s:?}")))?;
        Self::quotient(ell, k)
    }
}

impl fmt::Display for CurveId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// `a_p` of one curve at one prime.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApRecord {
    pub p: u64,
    pub curve: CurveId,
    pub ap: i64,
}

// ---------------------------------------------------------------------------
// Brute-force point counts.

/// `n[a] = #{v in F : v^l = a}`, by enumerating every `v`.
fn power_fibres(field: &ExtField, ell: u32) -> Vec<u64> {
    let mut n = vec![0u64; field.order()];
    for v in 0..field.order() {
        n[field.pow(v, ell as u64)] += 1;
    }
    n
}

fn fermat_count_in(field: &ExtField, ell: u32) -> u64 {
    let fib = power_fibres(field, ell);
    // (x : y : 1)
    let affine: u64 = (0..field.order())
        .map(|x| fib[field.one_minus(field.pow(x, ell as u64))])
        .sum();
    // (x : 1 : 0) with x^l = -1
    let at_infinity = fib[field.neg(1)];
    // (1 : 0 : 0) lies on the curve only if 1 = 0
    let corner = u64::from(field.one_minus(0) == 1 && field.order() == 1);
    affine + at_infinity + corner
}

fn quotient_count_in(field: &ExtField, ell: u32, k: u32) -> u64 {
    let fib = power_fibres(field, ell);
    let e = (ell - k - 1) as u64;
    let affine: u64 = (0..field.order())
        .map(|u| {
            let rhs = field.mul(u, field.pow(field.add(u, 1), e));
            fib[rhs]
        })
        .sum();
    // one totally ramified point above u = infinity
    affine + 1
}

fn check_oracle(p: u64, ell: u32, cap: u64) -> Result<()> {
    if p == ell as u64 {
        return Err(Error::RamifiedPrime { p, ell });
    }
    if p > cap {
        return Err(Error::OracleCap { p, cap });
    }
    Ok(())
}

/// `#C(F_p)` for the Fermat curve by direct enumeration.
pub fn count_fermat_bruteforce(p: u64, ell: u32, cap: u64) -> Result<u64> {
    check_oracle(p, ell, cap)?;
    Ok(fermat_count_in(&ExtField::canonical(p, 1), ell))
}

/// `#C_k(F_p)` on the smooth model: affine solutions plus one point at
/// infinity.
pub fn count_quotient_bruteforce(p: u64, ell: u32, k: u32, cap: u64) -> Result<u64> {
    check_oracle(p, ell, cap)?;
    CurveId::quotient(ell, k)?;
    Ok(quotient_count_in(&ExtField::canonical(p, 1), ell, k))
}

/// `#C(F_(p^n))` by direct enumeration; intended for small fields.
pub fn count_points_bruteforce(curve: CurveId, p: u64, n: u32) -> Result<u64> {
    if p == curve.ell as u64 {
        return Err(Error::RamifiedPrime { p, ell: curve.ell });
    }
    let field = ExtField::canonical(p, n);
    Ok(match curve.kind {
        CurveKind::Fermat => fermat_count_in(&field, curve.ell),
        CurveKind::Quotient(k) => quotient_count_in(&field, curve.ell, k),
    })
}

// ---------------------------------------------------------------------------
// Traces from Jacobi sums.

/// Sum of `J` over the curve's pairs at the given prime.
fn trace_over(data: &JacobiPrime, prime: &PrimeOfF, curve: CurveId) -> Result<CycInt> {
    curve.pairs().iter().try_fold(CycInt::zero(data.ell), |acc, &(a, b)| {
        Ok(&acc + &data.value_at(prime, a as u64, b as u64)?)
    })
}

fn canonical_prime(data: &JacobiPrime) -> PrimeOfF {
    PrimeOfF {
        p: data.p,
        f: data.f,
        t: 1,
        q: data.q,
    }
}

/// `a_p` from Jacobi sums: the trace of Frobenius at a prime above a split
/// `p`, and `0` when `p` is not `1 mod l`.
pub fn ap_from_jacobi(data: &JacobiPrime, curve: CurveId) -> Result<i64> {
    if data.f != 1 {
        return Ok(0);
    }
    let tr = trace_over(data, &canonical_prime(data), curve)?;
    let a = tr
        .as_integer()
        .ok_or_else(|| Error::Inconsistent(format!("trace of {curve} at p = {} is not rational: {tr}", data.p)))?;
    a.to_i64()
        .ok_or_else(|| Error::Inconsistent(format!("a_p overflows at p = {}", data.p)))
}

/// `Tr(M(p))` in units of `sqrt(q)`, i.e. the exact sum of the Jacobi sums.
pub fn trace_sum(data: &JacobiPrime, prime: &PrimeOfF, curve: CurveId) -> Result<BigInt> {
    let tr = trace_over(data, prime, curve)?;
    tr.as_integer()
        .cloned()
        .ok_or_else(|| Error::Inconsistent(format!("trace of {curve} at p = {} is not rational", data.p)))
}

// ---------------------------------------------------------------------------
// Local factors.

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FactorBase {
    OverF(PrimeOfF),
    OverQ(u64),
    /// A prime above `l`, where the factor is 1.
    Ramified,
}

/// `P(T) = sum c_i T^i` with cyclotomic coefficients; `c_0 = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalFactor {
    pub coeffs: Vec<CycInt>,
    pub base: FactorBase,
}

impl LocalFactor {
    pub fn trivial(ell: u32) -> Self {
        LocalFactor {
            coeffs: vec![CycInt::one(ell)],
            base: FactorBase::Ramified,
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients as rational integers, if they all are.
    pub fn integer_coeffs(&self) -> Option<Vec<BigInt>> {
        self.coeffs.iter().map(|c| c.as_integer().cloned()).collect()
    }

    /// Multiplies by `1 - a T^d`.
    fn mul_binomial(&mut self, a: &CycInt, d: usize) {
        let ell = a.ell();
        let mut out = vec![CycInt::zero(ell); self.coeffs.len() + d];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] = &out[i] + c;
            out[i + d] = &out[i + d] - &(c * a);
        }
        self.coeffs = out;
    }

    /// Evaluates at a complex `T` under `zeta -> exp(2 pi i / l)`.
    pub fn eval(&self, t: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::zero(), |acc, c| acc * t + c.embed_at(1))
    }
}

/// `P_p(T) = prod (1 - J(p) T)` over the curve's pairs, at a prime of `F`.
pub fn local_factor_over_f(data: &JacobiPrime, prime: &PrimeOfF, curve: CurveId) -> Result<LocalFactor> {
    let mut lf = LocalFactor {
        coeffs: vec![CycInt::one(data.ell)],
        base: FactorBase::OverF(*prime),
    };
    for (a, b) in curve.pairs() {
        lf.mul_binomial(&data.value_at(prime, a as u64, b as u64)?, 1);
    }
    Ok(lf)
}

/// A Frobenius orbit `{(k1 p^i, k2 p^i)}` of size `f` with its common value.
#[derive(Debug, Clone)]
pub struct FrobeniusOrbit {
    pub pairs: Vec<(u32, u32)>,
    pub value: CycInt,
}

/// Splits the curve's pairs into `<p>`-orbits, checking that each has size
/// `f_p` and that `J` is constant along it.
pub fn frobenius_orbits(data: &JacobiPrime, curve: CurveId) -> Result<Vec<FrobeniusOrbit>> {
    let ell = data.ell;
    let pm = (data.p % ell as u64) as u32;
    let mut remaining = curve.pairs();
    let mut orbits = Vec::new();
    while let Some(&start) = remaining.first() {
        let mut pairs = vec![start];
        let mut cur = ((start.0 * pm) % ell, (start.1 * pm) % ell);
        while cur != start {
            pairs.push(cur);
            cur = ((cur.0 * pm) % ell, (cur.1 * pm) % ell);
        }
        if pairs.len() != data.f as usize {
            return Err(Error::Inconsistent(format!(
                "orbit of {start:?} under p = {} has size {}, expected {}",
                data.p,
                pairs.len(),
                data.f
            )));
        }
        let value = data.value(start.0 as u64, start.1 as u64)?;
        for &(a, b) in &pairs[1..] {
            if data.value(a as u64, b as u64)? != value {
                return Err(Error::Inconsistent(format!(
                    "J is not constant on the Frobenius orbit of {start:?} at p = {}",
                    data.p
                )));
            }
        }
        remaining.retain(|x| !pairs.contains(x));
        orbits.push(FrobeniusOrbit { pairs, value });
    }
    Ok(orbits)
}

/// `P_p(T)` over `Q`: each Frobenius orbit of size `f` contributes
/// `1 - J_O T^f`.
pub fn local_factor_over_q(data: &JacobiPrime, curve: CurveId) -> Result<LocalFactor> {
    let mut lf = LocalFactor {
        coeffs: vec![CycInt::one(data.ell)],
        base: FactorBase::OverQ(data.p),
    };
    for orbit in frobenius_orbits(data, curve)? {
        lf.mul_binomial(&orbit.value, data.f as usize);
    }
    if lf.integer_coeffs().is_none() {
        return Err(Error::Inconsistent(format!(
            "local factor of {curve} over Q at p = {} has non-rational coefficients",
            data.p
        )));
    }
    Ok(lf)
}

/// All complex `f`-th roots of `z`.
fn roots_of(z: Complex64, f: u32) -> impl Iterator<Item = Complex64> {
    let (r, theta) = z.to_polar();
    let r = r.powf(1.0 / f as f64);
    (0..f).map(move |j| Complex64::from_polar(r, (theta + std::f64::consts::TAU * j as f64) / f as f64))
}

fn sort_by_argument(v: &mut [Complex64]) {
    v.sort_by(|a, b| a.arg().total_cmp(&b.arg()).then(a.norm().total_cmp(&b.norm())));
}

/// Frobenius eigenvalues on `H^1` over `Q` (unnormalized, absolute value
/// `sqrt(p)`), sorted by argument.
pub fn eigenvalues_over_q(data: &JacobiPrime, curve: CurveId) -> Result<Vec<Complex64>> {
    let mut out: Vec<_> = frobenius_orbits(data, curve)?
        .iter()
        .flat_map(|o| roots_of(o.value.embed_at(1), data.f))
        .collect();
    sort_by_argument(&mut out);
    Ok(out)
}

/// The `f`-th roots of every `J(P)` over all primes `P | p` and all pairs;
/// as a multiset this is the over-`Q` spectrum repeated `l - 1` times.
pub fn base_change_roots(data: &JacobiPrime, curve: CurveId) -> Result<Vec<Complex64>> {
    let mut out = Vec::new();
    for prime in primes_above(data.p, data.ell) {
        for (a, b) in curve.pairs() {
            let j = data.value_at(&prime, a as u64, b as u64)?;
            out.extend(roots_of(j.embed_at(1), data.f));
        }
    }
    sort_by_argument(&mut out);
    Ok(out)
}

/// `#C(F_(p^n))` predicted from the over-`Q` factor:
/// `p^n + 1 - sum_O [f | n] f J_O^(n/f)`.
pub fn predicted_count(data: &JacobiPrime, curve: CurveId, n: u32) -> Result<BigInt> {
    let mut acc = CycInt::zero(data.ell);
    if n % data.f == 0 {
        for orbit in frobenius_orbits(data, curve)? {
            let term = orbit.value.pow(n / data.f).scale(&BigInt::from(data.f));
            acc = &acc + &term;
        }
    }
    let s = acc
        .as_integer()
        .cloned()
        .ok_or_else(|| Error::Inconsistent(format!("power sum at p = {} is not rational", data.p)))?;
    Ok(BigInt::from(data.p).pow(n) + 1 - s)
}
