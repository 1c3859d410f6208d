//! Unit vectors that escape complex planks.
//!
//! Given unit vectors `v_1..v_n` in C^d and half-widths `t_k > 0` with
//! `sum t_k^2 = 1`, there is a unit vector `u` with `|<v_k, u>| >= t_k` for
//! every `k`. This crate finds such a `u` by maximizing
//! `sum t_k^2 ln |<v_k, u>|` on the sphere, escaping violated planks along
//! circles of unit perturbations, and verifies the result independently.
//!
//! Modules:
//!
//! * [`complex`], [`rng`]: scalar and vector arithmetic, deterministic sampling.
//! * [`instance`]: problem data, generators, JSON.
//! * [`solver`]: objective, stationarity map, ascent methods, escapes, [`solve`].
//! * [`diagnostics`]: the perturbation circle, the polynomial `p`, its
//!   derivative at zero and maximum-modulus probes.
//! * [`oracle`]: brute-force maximizers for cross-checking.
//! * [`certificate`]: margin verification.
//! * [`exec`]: parallel/sequential execution.

// `!(x > y)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certificate;
pub mod complex;
pub mod diagnostics;
pub mod error;
pub mod exec;
pub mod instance;
pub mod json;
pub mod oracle;
pub mod rng;
pub mod solver;

pub use certificate::{margins, verify, Certificate, Verdict};
pub use complex::{CVector, Complex};
pub use error::{PlankError, Result};
pub use exec::Exec;
pub use instance::{gen_random, gen_repeated, gen_tight, validate, PlankInstance, WeightMode};
pub use rng::RngState;
pub use solver::{solve, SolveConfig, SolveResult, SolveStatus};
