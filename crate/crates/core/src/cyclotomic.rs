//! Exact arithmetic in `Z[zeta]` for an odd prime level `ell`.
//!
//! Elements are stored on the power basis `1, zeta, ..., zeta^(ell-2)`,
//! which makes the representation unique: `zeta^(ell-1)` is always rewritten
//! as `-(1 + zeta + ... + zeta^(ell-2))`.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of `Z[zeta_ell]` with arbitrary-precision coefficients.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycInt {
    ell: u32,
    coeffs: Vec<BigInt>,
}

/// The automorphism `sigma_t: zeta -> zeta^t` for a unit `t` mod `ell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GaloisElement {
    t: u32,
    ell: u32,
}

impl GaloisElement {
    pub fn new(t: i64, ell: u32) -> Result<Self> {
        let r = t.rem_euclid(ell as i64) as u32;
        if r == 0 {
            return Err(Error::InvalidTwist {
                t: t.unsigned_abs(),
                ell,
            });
        }
        Ok(GaloisElement { t: r, ell })
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `sigma_t` followed by `sigma_s` is `sigma_(ts)`.
    pub fn compose(&self, other: &GaloisElement) -> GaloisElement {
        GaloisElement {
            t: ((self.t as u64 * other.t as u64) % self.ell as u64) as u32,
            ell: self.ell,
        }
    }

    /// Complex conjugation, `sigma_(-1)`.
    pub fn conjugation(ell: u32) -> GaloisElement {
        GaloisElement { t: ell - 1, ell }
    }
}

impl CycInt {
    pub fn zero(ell: u32) -> Self {
        CycInt {
            ell,
            coeffs: vec![BigInt::zero(); (ell - 1) as usize],
        }
    }

    pub fn one(ell: u32) -> Self {
        Self::from_int(ell, 1)
    }

    pub fn from_int(ell: u32, n: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(ell);
        z.coeffs[0] = n.into();
        z
    }

    /// `zeta^j` for any integer `j`.
    pub fn zeta_pow(ell: u32, j: i64) -> Self {
        let mut full = vec![0i64; ell as usize];
        full[j.rem_euclid(ell as i64) as usize] = 1;
        Self::from_full_counts(ell, &full)
    }

    /// Builds `a_0 + a_1 zeta + ... + a_(ell-2) zeta^(ell-2)`.
    pub fn from_coeffs(ell: u32, coeffs: Vec<BigInt>) -> Result<Self> {
        if coeffs.len() != (ell - 1) as usize {
            return Err(Error::Inconsistent(format!(
                "expected {} power-basis coefficients at level {ell}, got {}",
                ell - 1,
                coeffs.len()
            )));
        }
        Ok(CycInt { ell, coeffs })
    }

    pub fn from_i64s(ell: u32, coeffs: &[i64]) -> Result<Self> {
        Self::from_coeffs(ell, coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// Reduces `sum_(j < ell) c_j zeta^j` to the power basis.
    pub fn from_full_counts(ell: u32, full: &[i64]) -> Self {
        debug_assert_eq!(full.len(), ell as usize);
        let top = full[ell as usize - 1];
        CycInt {
            ell,
            coeffs: full[..ell as usize - 1]
                .iter()
                .map(|&c| BigInt::from(c - top))
                .collect(),
        }
    }

    fn from_full(ell: u32, mut full: Vec<BigInt>) -> Self {
        let top = full.pop().expect("level >= 3");
        if !top.is_zero() {
            for c in &mut full {
                *c -= &top;
            }
        }
        CycInt { ell, coeffs: full }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// `Some(n)` when the element is the rational integer `n`.
    pub fn as_integer(&self) -> Option<&BigInt> {
        self.coeffs[1..].iter().all(Zero::is_zero).then(|| &self.coeffs[0])
    }

    pub fn checked_add(&self, other: &CycInt) -> Result<CycInt> {
        self.same_level(other)?;
        Ok(CycInt {
            ell: self.ell,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn checked_sub(&self, other: &CycInt) -> Result<CycInt> {
        self.same_level(other)?;
        Ok(CycInt {
            ell: self.ell,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn checked_mul(&self, other: &CycInt) -> Result<CycInt> {
        self.same_level(other)?;
        let l = self.ell as usize;
        let mut full = vec![BigInt::zero(); l];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    full[(i + j) % l] += a * b;
                }
            }
        }
        Ok(Self::from_full(self.ell, full))
    }

    pub fn scale(&self, n: &BigInt) -> CycInt {
        CycInt {
            ell: self.ell,
            coeffs: self.coeffs.iter().map(|c| c * n).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> CycInt {
        let mut acc = CycInt::one(self.ell);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Applies `sigma_t`.
    pub fn galois(&self, sigma: GaloisElement) -> Result<CycInt> {
        if sigma.ell != self.ell {
            return Err(Error::LevelMismatch(self.ell, sigma.ell));
        }
        Ok(self.galois_unchecked(sigma.t))
    }

    pub(crate) fn galois_unchecked(&self, t: u32) -> CycInt {
        let l = self.ell as usize;
        if t == 1 {
            return self.clone();
        }
        let mut full = vec![BigInt::zero(); l];
        for (j, c) in self.coeffs.iter().enumerate() {
            full[(t as usize * j) % l] = c.clone();
        }
        Self::from_full(self.ell, full)
    }

    /// Complex conjugate, `sigma_(-1)`.
    pub fn conj(&self) -> CycInt {
        self.galois_unchecked(self.ell - 1)
    }

    /// `a * conj(a)`; for a Jacobi sum over `F_q` this is the integer `q`.
    pub fn abs_square(&self) -> CycInt {
        self * &self.conj()
    }

    /// Field trace down to `Q`: the sum of all Galois conjugates.
    pub fn trace(&self) -> BigInt {
        // Tr(1) = ell - 1, Tr(zeta^j) = -1 for j != 0.
        let rest: BigInt = self.coeffs[1..].iter().sum();
        &self.coeffs[0] * BigInt::from(self.ell - 1) - rest
    }

    /// Complex embedding `zeta -> exp(2 pi i t / ell)`.
    pub fn embed(&self, sigma: GaloisElement) -> Complex64 {
        self.embed_at(sigma.t)
    }

    pub(crate) fn embed_at(&self, t: u32) -> Complex64 {
        let l = self.ell as u64;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| {
                let angle = TAU * ((t as u64 * j as u64) % l) as f64 / l as f64;
                Complex64::from_polar(c.to_f64().unwrap_or(f64::NAN), angle)
            })
            .sum()
    }

    /// Sum of squared coefficients, a cheap size measure.
    pub fn coeff_norm_sq(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::INFINITY).powi(2))
            .sum()
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.coeffs.iter().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn to_decimal_strings(&self) -> Vec<String> {
        self.coeffs.iter().map(|c| c.to_string()).collect()
    }

    pub fn from_decimal_strings(ell: u32, strings: &[String]) -> Result<CycInt> {
        let coeffs = strings
            .iter()
            .map(|s| {
                s.parse::<BigInt>()
                    .map_err(|e| Error::Inconsistent(format!("bad coefficient {s:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_coeffs(ell, coeffs)
    }

    fn same_level(&self, other: &CycInt) -> Result<()> {
        if self.ell != other.ell {
            return Err(Error::LevelMismatch(self.ell, other.ell));
        }
        Ok(())
    }
}

/// Exact product; errors on mismatched levels.
pub fn cyc_mul(a: &CycInt, b: &CycInt) -> Result<CycInt> {
    a.checked_mul(b)
}

pub fn galois_apply(sigma: GaloisElement, a: &CycInt) -> Result<CycInt> {
    a.galois(sigma)
}

pub fn abs_square(a: &CycInt) -> CycInt {
    a.abs_square()
}

pub fn embed(a: &CycInt, sigma: GaloisElement) -> Complex64 {
    a.embed(sigma)
}

// The operator impls panic on mismatched levels; use the `checked_*`
// methods when levels come from untrusted input.

impl Add for &CycInt {
    type Output = CycInt;
    fn add(self, rhs: &CycInt) -> CycInt {
        self.checked_add(rhs).expect("cyclotomic levels must agree")
    }
}

impl Sub for &CycInt {
    type Output = CycInt;
    fn sub(self, rhs: &CycInt) -> CycInt {
        self.checked_sub(rhs).expect("cyclotomic levels must agree")
    }
}

impl Mul for &CycInt {
    type Output = CycInt;
    fn mul(self, rhs: &CycInt) -> CycInt {
        self.checked_mul(rhs).expect("cyclotomic levels must agree")
    }
}

impl Neg for &CycInt {
    type Output = CycInt;
    fn neg(self) -> CycInt {
        CycInt {
            ell: self.ell,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl fmt::Debug for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycInt<{}>{:?}", self.ell, self.to_decimal_strings())
    }
}

impl fmt::Display for CycInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (j, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let (sign, mag) = if c.is_negative() { ("-", -c) } else { ("+", c.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match j {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if j == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{j}")?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// JSON form: an array of decimal-string coefficients (the level is implied
/// by the array length plus one).
impl Serialize for CycInt {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_decimal_strings().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CycInt {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let strings = Vec::<String>::deserialize(d)?;
        let ell = strings.len() as u32 + 1;
        if ell < 3 {
            return Err(serde::de::Error::custom("too few coefficients"));
        }
        CycInt::from_decimal_strings(ell, &strings).map_err(serde::de::Error::custom)
    }
}
