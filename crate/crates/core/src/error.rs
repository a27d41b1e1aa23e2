use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("level {0} is not an odd prime")]
    InvalidLevel(u64),

    #[error("p = {p} equals the level {ell}; the ramified prime is handled separately")]
    RamifiedPrime { p: u64, ell: u32 },

    #[error("no character of order {ell} on F_{q}: q is not 1 mod {ell}")]
    NoCharacter { q: u64, ell: u32 },

    #[error("residue degree mismatch: got f = {got}, residue degree of {p} mod {ell} is {expected}")]
    ResidueDegree { p: u64, ell: u32, got: u32, expected: u32 },

    #[error("field table of size {required} exceeds the table cap {cap}; raise the cap to at least {required}")]
    TableCap { required: u128, cap: u64 },

    #[error("brute-force oracle is limited to p <= {cap}, got p = {p}")]
    OracleCap { p: u64, cap: u64 },

    #[error("cyclotomic level mismatch: {0} vs {1}")]
    LevelMismatch(u32, u32),

    #[error("t = {t} is not a unit modulo {ell}")]
    InvalidTwist { t: u64, ell: u32 },

    #[error("pair ({k1}, {k2}) lies outside I_{ell}")]
    OutsideIndexSet { k1: u64, k2: u64, ell: u32 },

    #[error("quotient index k = {k} out of range 1..={max}")]
    InvalidQuotient { k: u32, max: u32 },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error("local factor vanishes at the evaluation point (p = {p}, twist {twist})")]
    VanishingFactor { p: u64, twist: u32 },

    #[error("regression needs at least 3 samples with x > e in the window, got {0}")]
    TooFewSamples(usize),

    #[error("degenerate regression design: all log log x are equal")]
    DegenerateFit,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing series file {0}; run `bias compute` first")]
    MissingSeries(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
