//! Jacobi-sum Grössencharacters attached to Fermat curves and their
//! quotients, with tools to measure the Chebyshev bias of their Frobenius
//! traces and compare it against partial Euler products.

pub mod arith;
pub mod cache;
pub mod curves;
pub mod cyclotomic;
pub mod dataset;
pub mod error;
pub mod export;
pub mod fields;
pub mod jacobi;
pub mod lfunc;
pub mod verify;

pub use cache::JacobiCache;
pub use curves::{ApRecord, CurveId, CurveKind, LocalFactor};
pub use cyclotomic::{CycInt, GaloisElement};
pub use dataset::LevelData;
pub use error::{Error, Result};
pub use fields::{FqTable, PrimeOfF};
pub use jacobi::{IndexSet, JacobiPrime, JacobiRecord};
pub use lfunc::{BiasDecomposition, EulerTarget, LocalMatrix, RegressionFit, SeriesSample};
pub use verify::{VerifyOptions, VerifyReport};
