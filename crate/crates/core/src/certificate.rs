//! Post-hoc verification of a claimed solution vector.
//!
//! A certificate is recomputed from the instance and the vector alone. It
//! passes when `u` is a unit vector and every margin `|<v_k, u>| - t_k` is
//! non-negative, both up to tolerance. Stationarity is reported but does not
//! gate the verdict.

use serde::{Deserialize, Serialize};

use crate::complex::CVector;
use crate::error::{PlankError, Result};
use crate::instance::PlankInstance;
use crate::solver;

pub const DEFAULT_TOL_NORM: f64 = 1e-9;
pub const DEFAULT_TOL_MARGIN: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub unit_norm_defect: f64,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub residual: f64,
    pub verdict: Verdict,
    pub failing_checks: Vec<String>,
}

impl Certificate {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// `m_k = |<v_k, u>| - t_k`, in instance order.
pub fn margins(inst: &PlankInstance, u: &CVector) -> Result<Vec<f64>> {
    if u.dim() != inst.d {
        return Err(PlankError::DimensionMismatch {
            expected: inst.d,
            found: u.dim(),
        });
    }
    Ok(inst
        .vectors
        .iter()
        .zip(&inst.weights)
        .map(|(vk, t)| vk.inner_unchecked(u).abs() - t)
        .collect())
}

pub fn verify(inst: &PlankInstance, u: &CVector, tol_norm: f64, tol_margin: f64) -> Certificate {
    let unit_norm_defect = (u.norm() - 1.0).abs();
    let mut failing_checks = Vec::new();
    let (margins, min_margin) = match margins(inst, u) {
        Ok(m) => {
            let min = m.iter().copied().fold(f64::INFINITY, f64::min);
            (m, min)
        }
        Err(_) => {
            failing_checks.push("dimension".to_owned());
            (Vec::new(), f64::NEG_INFINITY)
        }
    };
    if !(unit_norm_defect <= tol_norm) {
        failing_checks.push("unit_norm".to_owned());
    }
    if !(min_margin >= -tol_margin) && !margins.is_empty() {
        failing_checks.push("margins".to_owned());
    }
    let residual = solver::residual(inst, u).unwrap_or(f64::INFINITY);
    let verdict = if failing_checks.is_empty() {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Certificate {
        unit_norm_defect,
        margins,
        min_margin,
        residual,
        verdict,
        failing_checks,
    }
}

/// [`verify`] at the default tolerances.
pub fn verify_default(inst: &PlankInstance, u: &CVector) -> Certificate {
    verify(inst, u, DEFAULT_TOL_NORM, DEFAULT_TOL_MARGIN)
}
