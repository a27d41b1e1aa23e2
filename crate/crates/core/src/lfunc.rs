//! Partial Euler products, bias sums and their decomposition, second
//! moments and log-log regression.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Zero;

use crate::curves::{frobenius_orbits, local_factor_over_f, CurveId};
use crate::cyclotomic::CycInt;
use crate::dataset::{LevelData, PrimeSummary};
use crate::error::{Error, Result};
use crate::fields::PrimeOfF;
use crate::jacobi::JacobiPrime;

/// Increments of the third-order term below this are dropped.
pub const TERM_III_CUTOFF: f64 = 1e-15;

/// A local factor `det(1 - M u)` smaller than this counts as vanishing.
pub const VANISHING_THRESHOLD: f64 = 1e-14;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompSum {
    sum: f64,
    c: f64,
}

impl CompSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CompSumC {
    re: CompSum,
    im: CompSum,
}

impl CompSumC {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

// ---------------------------------------------------------------------------
// Local matrices.

/// Diagonal of `M(P)`: the normalized values `J / sqrt(q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalMatrix {
    /// `None` for a prime above `l`, where the matrix is zero.
    pub prime: Option<PrimeOfF>,
    pub entries: Vec<Complex64>,
}

impl LocalMatrix {
    pub fn zero() -> Self {
        LocalMatrix {
            prime: None,
            entries: Vec::new(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.iter().sum()
    }

    pub fn trace_pow(&self, n: u32) -> Complex64 {
        self.entries.iter().map(|e| e.powu(n)).sum()
    }

    /// `det(1 - M u)`.
    pub fn det_one_minus(&self, u: Complex64) -> Complex64 {
        self.entries.iter().map(|e| Complex64::new(1.0, 0.0) - e * u).product()
    }

    /// `-log det(1 - M u)` as a sum of principal logarithms, one per entry.
    pub fn neg_log_det(&self, u: Complex64) -> Result<Complex64> {
        if self.det_one_minus(u).norm() < VANISHING_THRESHOLD {
            let (p, t) = self.prime.map(|pr| (pr.p, pr.t)).unwrap_or((0, 0));
            return Err(Error::VanishingFactor { p, twist: t });
        }
        Ok(-self
            .entries
            .iter()
            .map(|e| (Complex64::new(1.0, 0.0) - e * u).ln())
            .sum::<Complex64>())
    }
}

fn normalized(j: &CycInt, q: u128) -> Complex64 {
    j.embed_at(1) / (q as f64).sqrt()
}

/// `M(P)` for a curve, entries `psi_(kt,t)(P)` in `(k, t)` order.
pub fn local_matrix(data: &JacobiPrime, prime: &PrimeOfF, curve: CurveId) -> Result<LocalMatrix> {
    let entries = curve
        .pairs()
        .into_iter()
        .map(|(a, b)| Ok(normalized(&data.value_at(prime, a as u64, b as u64)?, prime.q)))
        .collect::<Result<_>>()?;
    Ok(LocalMatrix {
        prime: Some(*prime),
        entries,
    })
}

/// What an Euler product runs over: a curve, or one character
/// `psi_(kt,t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerTarget {
    Curve(CurveId),
    Character { ell: u32, k: u32, t: u32 },
}

impl EulerTarget {
    pub fn ell(&self) -> u32 {
        match *self {
            EulerTarget::Curve(c) => c.ell,
            EulerTarget::Character { ell, .. } => ell,
        }
    }

    /// Every character of a curve, in `(k, t)` order.
    pub fn characters_of(curve: CurveId) -> Vec<EulerTarget> {
        curve
            .characters()
            .into_iter()
            .map(|(k, t)| EulerTarget::Character { ell: curve.ell, k, t })
            .collect()
    }

    /// The same matrix read off precomputed embeddings.
    pub fn matrix_from_summary(&self, summary: &PrimeSummary, prime: &PrimeOfF) -> LocalMatrix {
        let scale = (prime.q as f64).sqrt().recip();
        let entries = match *self {
            EulerTarget::Curve(c) => c
                .characters()
                .into_iter()
                .map(|(k, t)| summary.value(k, t * prime.t) * scale)
                .collect(),
            EulerTarget::Character { k, t, .. } => vec![summary.value(k, t * prime.t) * scale],
        };
        LocalMatrix {
            prime: Some(*prime),
            entries,
        }
    }

    pub fn matrix(&self, data: &JacobiPrime, prime: &PrimeOfF) -> Result<LocalMatrix> {
        match *self {
            EulerTarget::Curve(c) => local_matrix(data, prime, c),
            EulerTarget::Character { ell, k, t } => {
                let j = data.value_at(prime, ((k * t) % ell) as u64, t as u64)?;
                Ok(LocalMatrix {
                    prime: Some(*prime),
                    entries: vec![normalized(&j, prime.q)],
                })
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Grids and samples.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSample<T = f64> {
    pub x: f64,
    pub value: T,
}

/// `10^(j/per_decade)` for every such value in `(e, x_max]`, plus `x_max`.
pub fn geometric_grid(x_max: u64, per_decade: u32) -> Vec<f64> {
    let mut out = Vec::new();
    for j in 1.. {
        let x = if j % per_decade == 0 {
            10f64.powi((j / per_decade) as i32)
        } else {
            10f64.powf(j as f64 / per_decade as f64)
        };
        if x > x_max as f64 {
            break;
        }
        if x > std::f64::consts::E {
            out.push(x);
        }
    }
    if out.last() != Some(&(x_max as f64)) {
        out.push(x_max as f64);
    }
    out
}

pub fn default_grid(x_max: u64) -> Vec<f64> {
    geometric_grid(x_max, 4)
}

fn check_grid(level: &LevelData, grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config("grid must be strictly increasing".into()));
    }
    match grid.last() {
        Some(&x) if x.floor() > level.x_max as f64 => Err(Error::Config(format!(
            "grid reaches {x} but data only covers x <= {}",
            level.x_max
        ))),
        _ => Ok(()),
    }
}

/// Walks `events` (keyed by norm, ascending) and snapshots the state at
/// each cutoff `floor(x)`.
fn sample_along<E, S: Clone>(
    grid: &[f64],
    events: impl IntoIterator<Item = (u128, E)>,
    mut state: S,
    mut step: impl FnMut(&mut S, E) -> Result<()>,
) -> Result<Vec<(f64, S)>> {
    let mut events = events.into_iter().peekable();
    let mut out = Vec::with_capacity(grid.len());
    for &x in grid {
        let cut = x.floor() as u128;
        while let Some((_, e)) = events.next_if(|(key, _)| *key <= cut) {
            step(&mut state, e)?;
        }
        out.push((x, state.clone()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Euler products.

/// `-sum log det(1 - M(P) q^-s)` over `q <= x`, sampled along `grid`.
pub fn log_euler_product_series(
    level: &LevelData,
    target: EulerTarget,
    s: Complex64,
    grid: &[f64],
) -> Result<Vec<SeriesSample<Complex64>>> {
    check_grid(level, grid)?;
    let x_top = grid.last().map_or(0, |x| x.floor() as u64);
    let events = level.primes_of_f(x_top).into_iter().map(|(pr, d)| (pr.q, (pr, d)));
    let samples = sample_along(grid, events, CompSumC::default(), |acc, (pr, d)| {
        let u = (-s * (pr.q as f64).ln()).exp();
        acc.add(target.matrix_from_summary(d.summary(), &pr).neg_log_det(u)?);
        Ok(())
    })?;
    Ok(samples
        .into_iter()
        .map(|(x, acc)| SeriesSample { x, value: acc.value() })
        .collect())
}

/// `(log x)^m prod_{q <= x} det(1 - M(P) q^-s)^-1`.
pub fn partial_euler_product(
    level: &LevelData,
    target: EulerTarget,
    s: Complex64,
    x: f64,
    m: u32,
) -> Result<Complex64> {
    if x < 2.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let log = log_euler_product_series(level, target, s, &[x])?[0].value;
    Ok(log.exp() * x.ln().powi(m as i32))
}

/// The same product from the exact local factors `P_P(T)` evaluated at
/// `T = q^(-s - 1/2)`.
pub fn partial_euler_product_from_factors(
    level: &LevelData,
    curve: CurveId,
    s: Complex64,
    x: f64,
) -> Result<Complex64> {
    if x < 2.0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let mut acc = CompSumC::default();
    for (pr, d) in level.primes_of_f(x.floor() as u64) {
        let t = (-(s + 0.5) * (pr.q as f64).ln()).exp();
        let v = local_factor_over_f(d.jacobi(), &pr, curve)?.eval(t);
        if v.norm() < VANISHING_THRESHOLD {
            return Err(Error::VanishingFactor { p: pr.p, twist: pr.t });
        }
        acc.add(-v.ln());
    }
    Ok(acc.value().exp())
}

// ---------------------------------------------------------------------------
// Bias sums.

/// `sum J(P)` over the curve's pairs, the same at every prime above `p`.
fn curve_trace(summary: &PrimeSummary, curve: CurveId) -> i128 {
    curve.ks().iter().map(|&k| summary.traces[k as usize - 1]).sum()
}

/// `sum J(P)^2` over the curve's pairs.
fn curve_square_trace(summary: &PrimeSummary, curve: CurveId) -> i128 {
    curve.ks().iter().map(|&k| summary.square_traces[k as usize - 1]).sum()
}

/// `sum_{p <= x} a_p / p` along `grid`.
pub fn bias_sum(level: &LevelData, curve: CurveId, grid: &[f64]) -> Result<Vec<SeriesSample>> {
    check_grid(level, grid)?;
    let events = level.primes.iter().filter(|d| d.f == 1).map(|d| (d.p as u128, d));
    let samples = sample_along(grid, events, CompSum::default(), |acc, d| {
        acc.add(curve_trace(d.summary(), curve) as f64 / d.p as f64);
        Ok(())
    })?;
    Ok(samples
        .into_iter()
        .map(|(x, acc)| SeriesSample { x, value: acc.value() })
        .collect())
}

/// `-log prod det(1 - M q^-1/2) = I + II + III` with the first-order term
/// split by residue degree.
#[derive(Debug, Clone, PartialEq)]
pub struct BiasDecomposition {
    pub x: f64,
    pub m: u32,
    pub term_i: Complex64,
    pub term_ii: Complex64,
    pub term_iii: Complex64,
    pub term_i_f: BTreeMap<u32, Complex64>,
    /// Bound on `|III(x)|` valid for every `x`.
    pub bound_iii: f64,
    /// Bound on what truncating the inner series of III dropped.
    pub truncation_iii: f64,
    /// `-sum log det(1 - M q^-1/2)`, computed independently of the terms.
    pub neg_log_product: Complex64,
}

impl BiasDecomposition {
    pub fn total(&self) -> Complex64 {
        self.term_i + self.term_ii + self.term_iii
    }

    /// `log` of the `(log x)^m`-normalized partial product.
    pub fn log_normalized_product(&self) -> Complex64 {
        self.neg_log_product + self.m as f64 * self.x.ln().ln()
    }
}

#[derive(Debug, Clone, Default)]
struct DecompState {
    i: CompSumC,
    ii: CompSumC,
    iii: CompSumC,
    by_degree: BTreeMap<u32, CompSumC>,
    truncation: f64,
    log: CompSumC,
}

/// Dimension of the local matrices of a target.
fn target_dim(target: EulerTarget) -> usize {
    match target {
        EulerTarget::Curve(c) => 2 * c.genus() as usize,
        EulerTarget::Character { .. } => 1,
    }
}

/// `dim * (sum_{q <= x_max} q^-3/2 + 2 (l - 1) / sqrt(x_max))`: the
/// enumerated part of the Dedekind-zeta-at-3/2 sum plus a tail estimate by
/// the integral of `(l - 1) t^-3/2`.
pub fn term_iii_bound(level: &LevelData, target: EulerTarget) -> f64 {
    let mut acc = CompSum::default();
    for d in level.primes.iter().filter(|d| d.q <= level.x_max as u128) {
        let count = (level.ell - 1) / d.f;
        acc.add(count as f64 * (d.q as f64).powf(-1.5));
    }
    let tail = 2.0 * (level.ell - 1) as f64 / (level.x_max as f64).sqrt();
    target_dim(target) as f64 * (acc.value() + tail)
}

/// The decomposition at every point of `grid`.
pub fn bias_decomposition_series(
    level: &LevelData,
    target: EulerTarget,
    grid: &[f64],
    m: u32,
) -> Result<Vec<BiasDecomposition>> {
    check_grid(level, grid)?;
    let x_top = grid.last().map_or(0, |x| x.floor() as u64);
    let dim = target_dim(target) as f64;
    let events = level.primes_of_f(x_top).into_iter().map(|(pr, d)| (pr.q, (pr, d)));
    let samples = sample_along(grid, events, DecompState::default(), |st, (pr, d)| {
        let q = pr.q as f64;
        let u = q.sqrt().recip();
        let mat = target.matrix_from_summary(d.summary(), &pr);
        // First and second order exactly where the traces are integers.
        let (t1, t2) = match target {
            EulerTarget::Curve(c) => (
                Complex64::new(curve_trace(d.summary(), c) as f64 / q, 0.0),
                Complex64::new(curve_square_trace(d.summary(), c) as f64 / (q * q) / 2.0, 0.0),
            ),
            EulerTarget::Character { .. } => (mat.trace() * u, mat.trace_pow(2) / q / 2.0),
        };
        st.i.add(t1);
        st.by_degree.entry(pr.f).or_default().add(t1);
        st.ii.add(t2);

        let mut third = Complex64::zero();
        let mut powers: Vec<Complex64> = mat.entries.iter().map(|e| e * e * e).collect();
        let mut un = u * u * u;
        let mut n = 3u32;
        while dim * un / n as f64 >= TERM_III_CUTOFF {
            third += powers.iter().sum::<Complex64>() * (un / n as f64);
            for (pw, e) in powers.iter_mut().zip(&mat.entries) {
                *pw *= e;
            }
            un *= u;
            n += 1;
        }
        st.iii.add(third);
        st.truncation += dim * un / (n as f64 * (1.0 - u));

        st.log.add(mat.neg_log_det(Complex64::new(u, 0.0))?);
        Ok(())
    })?;
    let bound_iii = term_iii_bound(level, target);
    Ok(samples
        .into_iter()
        .map(|(x, st)| BiasDecomposition {
            x,
            m,
            term_i: st.i.value(),
            term_ii: st.ii.value(),
            term_iii: st.iii.value(),
            term_i_f: st.by_degree.iter().map(|(&f, v)| (f, v.value())).collect(),
            bound_iii,
            truncation_iii: st.truncation,
            neg_log_product: st.log.value(),
        })
        .collect())
}

pub fn bias_decomposition(level: &LevelData, target: EulerTarget, x: f64, m: u32) -> Result<BiasDecomposition> {
    Ok(bias_decomposition_series(level, target, &[x], m)?.remove(0))
}

// ---------------------------------------------------------------------------
// Second moments.

/// `sum_{q <= x} Tr(M(P)^2) / q` over the primes of `F`.
pub fn second_moment_over_f(level: &LevelData, curve: CurveId, grid: &[f64]) -> Result<Vec<SeriesSample>> {
    check_grid(level, grid)?;
    let x_top = grid.last().map_or(0, |x| x.floor() as u64);
    let events = level.primes_of_f(x_top).into_iter().map(|(pr, d)| (pr.q, (pr, d)));
    let samples = sample_along(grid, events, CompSum::default(), |acc, (pr, d)| {
        let q = pr.q as f64;
        acc.add(curve_square_trace(d.summary(), curve) as f64 / (q * q));
        Ok(())
    })?;
    Ok(samples
        .into_iter()
        .map(|(x, acc)| SeriesSample { x, value: acc.value() })
        .collect())
}

/// `p Tr(M(p)^2)` over `Q`. The eigenvalues on an orbit of size `f` are the
/// `f`-th roots of `J_O`, so their squares sum to `f J_O^(2/f)` when `f`
/// divides 2 and to zero otherwise.
pub fn trace_square_over_q(data: &JacobiPrime, curve: CurveId) -> Result<BigInt> {
    if data.f > 2 {
        return Ok(BigInt::zero());
    }
    let mut acc = CycInt::zero(data.ell);
    for orbit in frobenius_orbits(data, curve)? {
        let term = if data.f == 1 {
            &orbit.value * &orbit.value
        } else {
            orbit.value.scale(&BigInt::from(2))
        };
        acc = &acc + &term;
    }
    acc.as_integer()
        .cloned()
        .ok_or_else(|| Error::Inconsistent(format!("Tr(M(p)^2) at p = {} is not rational", data.p)))
}

/// `sum_{p <= x} Tr(M(p)^2) / p` over `Q`.
pub fn second_moment_over_q(level: &LevelData, curve: CurveId, grid: &[f64]) -> Result<Vec<SeriesSample>> {
    check_grid(level, grid)?;
    let events = level.primes.iter().map(|d| (d.p as u128, d));
    let samples = sample_along(grid, events, CompSum::default(), |acc, d| {
        if d.f <= 2 {
            // On degree 2 the orbits pair up equal values, so the doubled
            // orbit sum is the plain sum over pairs.
            let n = if d.f == 1 {
                curve_square_trace(d.summary(), curve)
            } else {
                curve_trace(d.summary(), curve)
            };
            let p = d.p as f64;
            acc.add(n as f64 / (p * p));
        }
        Ok(())
    })?;
    Ok(samples
        .into_iter()
        .map(|(x, acc)| SeriesSample { x, value: acc.value() })
        .collect())
}

// ---------------------------------------------------------------------------
// Regression and predictions.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    pub samples: usize,
}

/// Least squares `y = A log log x + c` over samples with `x` in
/// `[x_lo, x_hi]` and `x > e`.
pub fn loglog_fit(samples: &[SeriesSample], x_lo: f64, x_hi: f64) -> Result<RegressionFit> {
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.x >= x_lo && s.x <= x_hi && s.x > std::f64::consts::E)
        .map(|s| (s.x.ln().ln(), s.value))
        .collect();
    if pts.len() < 3 {
        return Err(Error::TooFewSamples(pts.len()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= f64::EPSILON * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = pts.iter().map(|p| (p.1 - slope * p.0 - intercept).powi(2)).sum();
    Ok(RegressionFit {
        slope,
        intercept,
        residual_rms: (rss / n).sqrt(),
        x_lo,
        x_hi,
        samples: pts.len(),
    })
}

/// `(g - m) / (l - 1)`, the slope of the bias sum against `log log x` when
/// `L(s, C_F)` vanishes to order `m` at the centre.
pub fn predicted_slope(curve: CurveId, m: u32) -> f64 {
    (curve.genus() as f64 - m as f64) / (curve.ell - 1) as f64
}

/// Assumed analytic data: the central order `m` over `F`, optionally the
/// order `m0` over `Q` (then `m = (l - 1) m0`), and `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct AnalyticParams {
    pub m: u32,
    pub m0: Option<u32>,
    pub delta: Option<i64>,
}

impl AnalyticParams {
    pub fn over_f(m: u32) -> Self {
        AnalyticParams {
            m,
            ..Default::default()
        }
    }

    pub fn over_q(ell: u32, m0: u32) -> Self {
        AnalyticParams {
            m: (ell - 1) * m0,
            m0: Some(m0),
            delta: None,
        }
    }

    pub fn validate(&self, ell: u32) -> Result<()> {
        match self.m0 {
            Some(m0) if self.m != (ell - 1) * m0 => Err(Error::Config(format!(
                "m = {} is not (l - 1) m0 = {}",
                self.m,
                (ell - 1) * m0
            ))),
            _ => Ok(()),
        }
    }
}
