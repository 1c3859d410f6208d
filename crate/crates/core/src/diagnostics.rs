//! The objects behind the escape step, exposed for testing and the `diag`
//! command.
//!
//! For a unit vector `u` and plank `j`, the perturbations `u_z = z v_j + u`
//! satisfy
//!
//! ```text
//! ||u_z||^2 = |z|^2 + 2 Re(z <v_j, u>) + 1,
//! ```
//!
//! so `u_z` is a unit vector exactly when `z` lies on the circle `C` with
//! center `-<u, v_j>` and radius `|<v_j, u>|`; `z = 0` is on `C`, and
//! `|<u_z, v_j>| = |z + <u, v_j>|` is constant there.
//!
//! With equal weights the remaining factors form the polynomial
//!
//! ```text
//! p(z) = prod_{k != j} <u_z, v_k> / <u, v_k>,      p(0) = 1,
//! p'(0) = sum_{k != j} <v_j, v_k> / <u, v_k>,
//! ```
//!
//! and at a critical point `p'(0) = <v_j, u> (n - 1 / |<v_j, u>|^2)`. General
//! weights use `ln p(z) = sum_{k != j} t_k^2 (ln |<v_k, u_z>| - ln |<v_k, u>|)`,
//! which is subharmonic in `z`.

use serde::{Deserialize, Serialize};

use crate::complex::{CVector, Complex};
use crate::error::{PlankError, Result};
use crate::exec::{self, Exec};
use crate::instance::PlankInstance;
use crate::rng::RngState;
use crate::solver::golden_max;

/// Slack by which the interior maximum must beat the boundary maximum before
/// a probe reports a violation.
pub const PROBE_SLACK: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircleSpec {
    pub center: Complex,
    pub radius: f64,
    pub j: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProbeVariant {
    /// `ln |p(z)|` for the polynomial of an equal-weight instance.
    Holomorphic,
    /// The weighted `ln p(z)`.
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub boundary_max: f64,
    pub interior_max: f64,
    pub interior_exceeds_boundary: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProbeOptions {
    pub boundary_samples: usize,
    pub interior_samples: usize,
    pub variant: ProbeVariant,
    pub exec: Exec,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions {
            boundary_samples: 512,
            interior_samples: 2000,
            variant: ProbeVariant::Weighted,
            exec: Exec::default(),
        }
    }
}

/// `z v_j + u`, not normalized.
pub fn perturbed_vector(u: &CVector, vj: &CVector, z: Complex) -> Result<CVector> {
    vj.axpy(z, u)
}

fn check_index(inst: &PlankInstance, j: usize) -> Result<()> {
    if j >= inst.n() {
        return Err(PlankError::IndexOutOfRange {
            index: j,
            n: inst.n(),
        });
    }
    Ok(())
}

fn check_dim(inst: &PlankInstance, u: &CVector) -> Result<()> {
    if u.dim() != inst.d {
        return Err(PlankError::DimensionMismatch {
            expected: inst.d,
            found: u.dim(),
        });
    }
    Ok(())
}

fn check_equal_weight(inst: &PlankInstance) -> Result<()> {
    if !inst.is_equal_weight() {
        return Err(PlankError::UnequalWeights);
    }
    Ok(())
}

/// The circle of coefficients `z` keeping `z v_j + u` on the unit sphere.
pub fn circle_of(u: &CVector, inst: &PlankInstance, j: usize) -> Result<CircleSpec> {
    check_index(inst, j)?;
    let a = inst.vector(j).inner(u)?;
    Ok(CircleSpec {
        center: -a.conj(),
        radius: a.abs(),
        j,
    })
}

/// `center + radius e^{i theta}`.
pub fn circle_point(spec: &CircleSpec, theta: f64) -> Complex {
    spec.center + Complex::from_polar(spec.radius, theta)
}

/// The angle at which [`circle_point`] returns `z = 0`.
pub fn theta_of_origin(spec: &CircleSpec) -> f64 {
    (-spec.center).arg()
}

/// Per-plank data for evaluating `p` quickly: for every `k != j`, the
/// coefficient `<v_j, v_k>`, the value `<u, v_k>` and `t_k^2`.
#[derive(Clone, Debug)]
pub struct PFactors {
    terms: Vec<(Complex, Complex, f64)>,
}

impl PFactors {
    pub fn new(inst: &PlankInstance, u: &CVector, j: usize) -> Result<Self> {
        check_index(inst, j)?;
        check_dim(inst, u)?;
        let vj = inst.vector(j);
        let mut terms = Vec::with_capacity(inst.n().saturating_sub(1));
        for (k, (vk, t)) in inst.vectors.iter().zip(&inst.weights).enumerate() {
            if k == j {
                continue;
            }
            let den = u.inner_unchecked(vk);
            if den == Complex::ZERO {
                return Err(PlankError::ZeroDenominator { index: k });
            }
            terms.push((vj.inner_unchecked(vk), den, t * t));
        }
        Ok(PFactors { terms })
    }

    /// `p(z) = prod (z c_k + d_k) / d_k`.
    pub fn eval(&self, z: Complex) -> Complex {
        self.terms
            .iter()
            .map(|&(c, den, _)| (z * c + den) / den)
            .product()
    }

    /// `sum t_k^2 ln |(z c_k + d_k) / d_k|`.
    pub fn weighted_logabs(&self, z: Complex) -> f64 {
        let mut acc = 0.0;
        for &(c, den, w) in &self.terms {
            let ratio = ((z * c + den).abs() / den.abs()).ln();
            acc += w * ratio;
        }
        acc
    }

    /// `ln |p(z)|`.
    pub fn logabs(&self, z: Complex) -> f64 {
        self.terms
            .iter()
            .map(|&(c, den, _)| ((z * c + den).abs() / den.abs()).ln())
            .sum()
    }

    /// `p'(0) = sum c_k / d_k`.
    pub fn derivative_at_zero(&self) -> Complex {
        self.terms.iter().map(|&(c, den, _)| c / den).sum()
    }

    fn log_p(&self, variant: ProbeVariant, z: Complex) -> f64 {
        match variant {
            ProbeVariant::Holomorphic => self.logabs(z),
            ProbeVariant::Weighted => self.weighted_logabs(z),
        }
    }
}

/// `p(z) = prod_{k != j} <u_z, v_k> / <u, v_k>` for an equal-weight instance.
pub fn p_holomorphic(inst: &PlankInstance, u: &CVector, j: usize, z: Complex) -> Result<Complex> {
    check_equal_weight(inst)?;
    Ok(PFactors::new(inst, u, j)?.eval(z))
}

/// `ln p(z) = sum_{k != j} t_k^2 (ln |<v_k, u_z>| - ln |<v_k, u>|)`; `-inf` at
/// zeros of a factor.
pub fn p_weighted_logabs(inst: &PlankInstance, u: &CVector, j: usize, z: Complex) -> Result<f64> {
    Ok(PFactors::new(inst, u, j)?.weighted_logabs(z))
}

/// `sum_{k != j} <v_j, v_k> / <u, v_k>`, valid at any `u`.
pub fn p_prime_zero_raw(inst: &PlankInstance, u: &CVector, j: usize) -> Result<Complex> {
    check_equal_weight(inst)?;
    Ok(PFactors::new(inst, u, j)?.derivative_at_zero())
}

/// `<v_j, u> (n - 1 / |<v_j, u>|^2)`. Equals [`p_prime_zero_raw`] only when
/// `u` is a critical point of the objective.
pub fn p_prime_zero_stationary(inst: &PlankInstance, u: &CVector, j: usize) -> Result<Complex> {
    check_equal_weight(inst)?;
    check_index(inst, j)?;
    let a = inst.vector(j).inner(u)?;
    if a == Complex::ZERO {
        return Err(PlankError::ZeroDenominator { index: j });
    }
    Ok(a * stationary_derivative_factor(inst.n(), a.abs()))
}

/// The real factor `n - 1/r^2`; negative exactly when `r < 1/sqrt(n)`.
pub fn stationary_derivative_factor(n: usize, r: f64) -> f64 {
    n as f64 - 1.0 / (r * r)
}

/// Compares the maximum of `ln p` over the circle `C` with its maximum over
/// random points of the open disc it bounds.
///
/// The boundary is sampled at equispaced angles and every sampled local
/// maximum is refined by golden-section search, so the reported boundary
/// maximum is a sharp lower bound of the true one. Interior points are uniform
/// in the disc.
pub fn max_modulus_probe(
    inst: &PlankInstance,
    u: &CVector,
    j: usize,
    options: &ProbeOptions,
    rng: &mut RngState,
) -> Result<ProbeReport> {
    if options.variant == ProbeVariant::Holomorphic {
        check_equal_weight(inst)?;
    }
    if options.boundary_samples < 3 {
        return Err(PlankError::InvalidArgument(
            "boundary_samples must be at least 3".into(),
        ));
    }
    let spec = circle_of(u, inst, j)?;
    let factors = PFactors::new(inst, u, j)?;
    let variant = options.variant;
    let f = |theta: f64| factors.log_p(variant, circle_point(&spec, theta));

    let m = options.boundary_samples;
    let h = std::f64::consts::TAU / m as f64;
    let boundary: Vec<f64> = exec::map_indexed(options.exec, m, |i| f(i as f64 * h));
    let peaks: Vec<usize> = (0..m)
        .filter(|&i| {
            let prev = boundary[(i + m - 1) % m];
            let next = boundary[(i + 1) % m];
            boundary[i] >= prev && boundary[i] >= next
        })
        .collect();
    let refined = exec::map_indexed(options.exec, peaks.len(), |p| {
        let theta = peaks[p] as f64 * h;
        golden_max(&f, theta - h, theta + h, 1e-13).1
    });
    let boundary_max = boundary
        .iter()
        .chain(&refined)
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);

    let points: Vec<Complex> = (0..options.interior_samples)
        .map(|_| {
            let r = spec.radius * rng.uniform().sqrt();
            let phi = std::f64::consts::TAU * rng.uniform();
            spec.center + Complex::from_polar(r, phi)
        })
        .collect();
    let interior: Vec<f64> = exec::map_indexed(options.exec, points.len(), |i| {
        factors.log_p(variant, points[i])
    });
    let interior_max = interior.into_iter().fold(f64::NEG_INFINITY, f64::max);

    Ok(ProbeReport {
        boundary_max,
        interior_max,
        interior_exceeds_boundary: interior_max > boundary_max + PROBE_SLACK,
    })
}
