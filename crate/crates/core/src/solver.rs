//! Maximization of the weighted log-product
//!
//! ```text
//! F(v) = sum_k t_k^2 ln |<v_k, v>|
//! ```
//!
//! over the unit sphere of C^d. Critical points satisfy `v = T(v)` with the
//! stationarity map
//!
//! ```text
//! T(v) = sum_k (t_k^2 / <v_k, v>) v_k,
//! ```
//!
//! and `<T(v), v> = sum_k t_k^2 = 1` holds at every `v`. `T(v)` is also the
//! Euclidean gradient of `F`, so its tangential part `T(v) - <T(v), v> v` is the
//! sphere gradient used by [`tangent_ascent`].
//!
//! At a critical point, a plank `j` with `|<v_j, u>| < t_j` can always be
//! escaped: on the circle of coefficients `z` for which `u + z v_j` stays a unit
//! vector the `j`-th factor is constant while the product of the others exceeds
//! its value at `z = 0` somewhere. [`circle_escape`] searches that circle, and
//! [`solve`] alternates ascent and escapes until every margin is non-negative.

use serde::{Deserialize, Serialize};

use crate::certificate::margins;
use crate::complex::{CVector, Complex};
use crate::error::{PlankError, Result};
use crate::exec::{self, Exec};
use crate::instance::PlankInstance;
use crate::rng::RngState;

/// Factors `|<v_k, v>|` at or below this value make `T(v)` unusable.
pub const FACTOR_FLOOR: f64 = 1e-150;
/// Size of the random kick applied when an iterate hits a near-zero factor.
pub const JITTER_SCALE: f64 = 1e-8;
pub const JITTER_ATTEMPTS: usize = 10;
/// Minimum objective gain for an escape to count as an improvement.
pub const ESCAPE_GAIN_TOL: f64 = 1e-14;
/// Sufficient-increase constant of the backtracking line search.
pub const ARMIJO_C: f64 = 1e-4;
/// Bracket width at which the golden-section refinement on the circle stops.
pub const ESCAPE_REFINE_WIDTH: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub residual_tol: f64,
    pub margin_tol: f64,
    pub max_iters: usize,
    pub multistart: usize,
    pub escape_rounds_cap: usize,
    pub escape_samples: usize,
    pub step_shrink: f64,
    pub min_step: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            residual_tol: 1e-10,
            margin_tol: 1e-8,
            max_iters: 10_000,
            multistart: 8,
            escape_rounds_cap: 50,
            escape_samples: 256,
            step_shrink: 0.5,
            min_step: 1e-14,
            seed: 0,
            exec: Exec::default(),
        }
    }
}

impl SolveConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn check(&self) -> Result<()> {
        let positive = [
            ("residual_tol", self.residual_tol),
            ("margin_tol", self.margin_tol),
            ("min_step", self.min_step),
        ];
        for (name, value) in positive {
            if !(value > 0.0) {
                return Err(PlankError::InvalidArgument(format!(
                    "{name} must be positive"
                )));
            }
        }
        let caps = [
            ("max_iters", self.max_iters),
            ("multistart", self.multistart),
            ("escape_rounds_cap", self.escape_rounds_cap),
            ("escape_samples", self.escape_samples),
        ];
        for (name, value) in caps {
            if value < 1 {
                return Err(PlankError::InvalidArgument(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if !(self.step_shrink > 0.0 && self.step_shrink < 1.0) {
            return Err(PlankError::InvalidArgument(
                "step_shrink must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Converged,
    MarginShortfall,
    IterationCap,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub u: CVector,
    pub objective: f64,
    pub margins: Vec<f64>,
    pub min_margin: f64,
    pub residual: f64,
    pub iterations: usize,
    pub escapes_used: usize,
    pub status: SolveStatus,
    /// Objective after every accepted step, escape included. Not serialized.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

impl SolveResult {
    pub fn is_converged(&self) -> bool {
        self.status == SolveStatus::Converged
    }
}

/// Outcome of a search on the unit circle of perturbations for one plank.
#[derive(Clone, Debug, PartialEq)]
pub enum Escape {
    Improved { u: CVector, gain: f64 },
    NoImprovement,
}

fn check_dim(inst: &PlankInstance, v: &CVector) -> Result<()> {
    if v.dim() != inst.d {
        return Err(PlankError::DimensionMismatch {
            expected: inst.d,
            found: v.dim(),
        });
    }
    Ok(())
}

/// `<v_k, v>` for every plank.
pub fn factors(inst: &PlankInstance, v: &CVector) -> Result<Vec<Complex>> {
    check_dim(inst, v)?;
    Ok(inst
        .vectors
        .iter()
        .map(|vk| vk.inner_unchecked(v))
        .collect())
}

/// `F(v) = sum_k t_k^2 ln |<v_k, v>|`; `-inf` when some factor is exactly zero.
pub fn objective(inst: &PlankInstance, v: &CVector) -> Result<f64> {
    check_dim(inst, v)?;
    Ok(objective_unchecked(inst, v))
}

fn objective_unchecked(inst: &PlankInstance, v: &CVector) -> f64 {
    let mut f = 0.0;
    for (vk, t) in inst.vectors.iter().zip(&inst.weights) {
        let a = vk.inner_unchecked(v).abs();
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        // Cauchy–Schwarz bounds each factor by 1; rounding may not
        f += t * t * a.min(1.0).ln();
    }
    f
}

/// `F(normalize(v + w)) - F(v)` for unit `v`, evaluated without cancellation
/// so that gains far below the rounding level of `F` keep their sign.
pub fn objective_gain(inst: &PlankInstance, v: &CVector, w: &CVector) -> Result<f64> {
    check_dim(inst, v)?;
    check_dim(inst, w)?;
    Ok(objective_gain_unchecked(inst, v, w))
}

fn objective_gain_unchecked(inst: &PlankInstance, v: &CVector, w: &CVector) -> f64 {
    let mut gain = 0.0;
    let mut weight_sum = 0.0;
    for (vk, t) in inst.vectors.iter().zip(&inst.weights) {
        let a = vk.inner_unchecked(v);
        let b = vk.inner_unchecked(w);
        // |a + b|^2 / |a|^2 - 1
        let rel = (2.0 * (b * a.conj()).re + b.norm_sqr()) / a.norm_sqr();
        let w2 = t * t;
        gain += w2 * 0.5 * rel.max(-1.0).ln_1p();
        weight_sum += w2;
    }
    let stretch = 2.0 * w.inner_unchecked(v).re + w.norm_sqr();
    gain - weight_sum * 0.5 * stretch.ln_1p()
}

/// `T(v) = sum_k (t_k^2 / <v_k, v>) v_k`.
pub fn stationarity_map(inst: &PlankInstance, v: &CVector) -> Result<CVector> {
    check_dim(inst, v)?;
    let mut out = CVector::zeros(inst.d);
    for (k, (vk, t)) in inst.vectors.iter().zip(&inst.weights).enumerate() {
        let a = vk.inner_unchecked(v);
        if !(a.abs() > FACTOR_FLOOR) {
            return Err(PlankError::NearZeroFactor { index: k });
        }
        let coef = a.recip() * (t * t);
        out = vk.axpy_unchecked(coef, &out);
    }
    Ok(out)
}

/// `||v - T(v)||`; zero exactly at critical points.
pub fn residual(inst: &PlankInstance, v: &CVector) -> Result<f64> {
    let t = stationarity_map(inst, v)?;
    Ok((v - &t).norm())
}

fn min_of(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Most violated plank, lowest index on ties.
fn most_violated(margins: &[f64]) -> usize {
    let min = min_of(margins);
    margins.iter().position(|&m| m == min).unwrap_or(0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    /// `v <- normalize(v + s (T(v) - v))`, `s` halved until `F` increases.
    DampedFixedPoint,
    /// `v <- normalize(v + s g)` with Armijo backtracking on the sphere gradient.
    Tangent,
}

#[derive(Debug)]
struct AscentRun {
    v: CVector,
    iterations: usize,
}

/// Runs one local ascent from `v` until the residual drops to `residual_tol`,
/// the step size collapses, or `max_iters` steps have been accepted.
fn ascend(
    inst: &PlankInstance,
    v0: CVector,
    cfg: &SolveConfig,
    method: Method,
    rng: &mut RngState,
    trace: &mut Vec<f64>,
) -> AscentRun {
    let mut v = v0;
    let mut iterations = 0;
    let mut jitters = 0;
    trace.push(objective_unchecked(inst, &v));
    'outer: loop {
        let t = match stationarity_map(inst, &v) {
            Ok(t) => t,
            Err(_) => {
                if jitters == JITTER_ATTEMPTS {
                    break;
                }
                jitters += 1;
                let kick = rng.unit_vector(inst.d).scale_real(JITTER_SCALE);
                v = (&v + &kick).normalize().unwrap_or(v);
                continue;
            }
        };
        let diff = &t - &v;
        if diff.norm() <= cfg.residual_tol || iterations >= cfg.max_iters {
            break;
        }
        let (direction, slope) = match method {
            Method::DampedFixedPoint => (diff, 0.0),
            Method::Tangent => {
                let lambda = t.inner_unchecked(&v);
                let g = v.axpy_unchecked(-lambda, &t);
                let g2 = g.norm_sqr();
                (g, g2)
            }
        };
        let mut step = 1.0;
        loop {
            let w = direction.scale_real(step);
            let gain = objective_gain_unchecked(inst, &v, &w);
            let accepted = match method {
                Method::DampedFixedPoint => gain > 0.0,
                Method::Tangent => gain > 0.0 && gain >= ARMIJO_C * step * slope,
            };
            if accepted {
                v = match (&v + &w).normalize() {
                    Ok(next) => next,
                    Err(_) => break 'outer,
                };
                iterations += 1;
                trace.push(objective_unchecked(inst, &v));
                break;
            }
            step *= cfg.step_shrink;
            if step < cfg.min_step {
                break 'outer;
            }
        }
    }
    AscentRun { v, iterations }
}

fn finish(
    inst: &PlankInstance,
    v: &CVector,
    iterations: usize,
    escapes_used: usize,
    cfg: &SolveConfig,
    trace: Vec<f64>,
) -> SolveResult {
    let u = v
        .normalize()
        .and_then(|u| u.gauge_fix())
        .unwrap_or_else(|_| v.clone());
    let objective = objective_unchecked(inst, &u);
    let margins = margins(inst, &u).expect("dimension checked on entry");
    let min_margin = min_of(&margins);
    let residual = residual(inst, &u).unwrap_or(f64::INFINITY);
    let stationary = residual <= cfg.residual_tol;
    let status = if !stationary {
        SolveStatus::IterationCap
    } else if min_margin >= -cfg.margin_tol {
        SolveStatus::Converged
    } else {
        SolveStatus::MarginShortfall
    };
    SolveResult {
        u,
        objective,
        margins,
        min_margin,
        residual,
        iterations,
        escapes_used,
        status,
        trace,
    }
}

fn start_point(inst: &PlankInstance, v0: &CVector) -> Result<CVector> {
    check_dim(inst, v0)?;
    v0.normalize()
}

/// Damped fixed-point iteration on `v = T(v)`. Each step starts at the plain
/// update `normalize(T(v))` and is halved until the objective increases.
pub fn fixed_point_iterate(
    inst: &PlankInstance,
    v0: &CVector,
    config: &SolveConfig,
) -> Result<SolveResult> {
    config.check()?;
    let v = start_point(inst, v0)?;
    let mut rng = RngState::new(config.seed);
    let mut trace = Vec::new();
    let run = ascend(
        inst,
        v,
        config,
        Method::DampedFixedPoint,
        &mut rng,
        &mut trace,
    );
    Ok(finish(inst, &run.v, run.iterations, 0, config, trace))
}

/// Riemannian gradient ascent with Armijo backtracking, retraction by
/// normalization.
pub fn tangent_ascent(
    inst: &PlankInstance,
    v0: &CVector,
    config: &SolveConfig,
) -> Result<SolveResult> {
    config.check()?;
    let v = start_point(inst, v0)?;
    let mut rng = RngState::new(config.seed);
    let mut trace = Vec::new();
    let run = ascend(inst, v, config, Method::Tangent, &mut rng, &mut trace);
    Ok(finish(inst, &run.v, run.iterations, 0, config, trace))
}

/// Searches the circle `z(theta) = -<u, v_j> + |<v_j, u>| e^{i theta}` of
/// perturbations `u + z v_j` (all unit vectors with `|<v_j, .>|` fixed) for a
/// point of larger objective.
///
/// `escape_samples` equispaced angles are evaluated, together with the angle
/// where `z` points from 0 toward the center of the circle. The best angle is
/// refined by golden-section search.
pub fn circle_escape(
    inst: &PlankInstance,
    u: &CVector,
    j: usize,
    config: &SolveConfig,
) -> Result<Escape> {
    check_dim(inst, u)?;
    if j >= inst.n() {
        return Err(PlankError::IndexOutOfRange {
            index: j,
            n: inst.n(),
        });
    }
    let vj = inst.vector(j);
    let a = vj.inner_unchecked(u);
    let radius = a.abs();
    if !(radius > 0.0) {
        return Err(PlankError::NearZeroFactor { index: j });
    }
    let center = -a.conj();
    let samples = config.escape_samples.max(1);
    let gain_at = |theta: f64| -> f64 {
        let z = center + Complex::from_polar(radius, theta);
        objective_gain_unchecked(inst, u, &vj.scale(z))
    };

    let h = std::f64::consts::TAU / samples as f64;
    let mut thetas: Vec<f64> = (0..samples).map(|i| i as f64 * h).collect();
    thetas.push(center.arg());
    let gains: Vec<f64> = thetas.iter().map(|&th| gain_at(th)).collect();
    let Some(best) = exec::argmax_first(gains.iter().copied()) else {
        return Err(PlankError::NearZeroFactor { index: j });
    };
    if gains[best] == f64::NEG_INFINITY {
        return Err(PlankError::NearZeroFactor { index: j });
    }
    let (theta, gain) = {
        let (th, g) = golden_max(
            &gain_at,
            thetas[best] - h,
            thetas[best] + h,
            ESCAPE_REFINE_WIDTH,
        );
        if g > gains[best] {
            (th, g)
        } else {
            (thetas[best], gains[best])
        }
    };
    if gain > ESCAPE_GAIN_TOL {
        let z = center + Complex::from_polar(radius, theta);
        let moved = vj.axpy_unchecked(z, u).normalize()?.gauge_fix()?;
        Ok(Escape::Improved { u: moved, gain })
    } else {
        Ok(Escape::NoImprovement)
    }
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`; returns the best
/// point seen and its value.
pub(crate) fn golden_max<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, width: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while b - a > width {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

fn ascend_with_escapes(
    inst: &PlankInstance,
    v0: CVector,
    config: &SolveConfig,
    rng: &mut RngState,
) -> SolveResult {
    let mut trace = Vec::new();
    let mut run = ascend(inst, v0, config, Method::Tangent, rng, &mut trace);
    let mut iterations = run.iterations;
    let mut escapes = 0;
    while escapes < config.escape_rounds_cap {
        let Ok(m) = margins(inst, &run.v) else { break };
        if min_of(&m) >= -config.margin_tol {
            break;
        }
        let j = most_violated(&m);
        match circle_escape(inst, &run.v, j, config) {
            Ok(Escape::Improved { u, .. }) => {
                escapes += 1;
                run = ascend(inst, u, config, Method::Tangent, rng, &mut trace);
                iterations += run.iterations;
            }
            Ok(Escape::NoImprovement) | Err(_) => break,
        }
    }
    finish(inst, &run.v, iterations, escapes, config, trace)
}

/// Tangent ascent from `v0`, then, while some margin is below `-margin_tol`,
/// an escape on the most violated plank (lowest index on ties) followed by a
/// new ascent. Jitter draws from the stream seeded `config.seed`.
pub fn ascend_from(
    inst: &PlankInstance,
    v0: &CVector,
    config: &SolveConfig,
) -> Result<SolveResult> {
    config.check()?;
    let v = start_point(inst, v0)?;
    let mut rng = RngState::new(config.seed);
    Ok(ascend_with_escapes(inst, v, config, &mut rng))
}

/// Multistart ascent with circle escapes. Start `k` draws its initial point
/// and any jitter from the stream seeded `seed XOR k`; the result with the
/// largest objective wins, lowest start index on ties.
pub fn solve(inst: &PlankInstance, config: &SolveConfig) -> Result<SolveResult> {
    config.check()?;
    if inst.n() == 0 || inst.vectors.len() != inst.n() {
        return Err(PlankError::InvalidInstance("instance has no planks".into()));
    }
    if let Some(v) = inst.vectors.iter().find(|v| v.dim() != inst.d) {
        return Err(PlankError::DimensionMismatch {
            expected: inst.d,
            found: v.dim(),
        });
    }
    let results = exec::map_indexed(config.exec, config.multistart, |k| {
        let mut rng = RngState::stream(config.seed, k as u64);
        let v0 = rng.unit_vector(inst.d);
        ascend_with_escapes(inst, v0, config, &mut rng)
    });
    let best = exec::argmax_first(results.iter().map(|r| r.objective)).unwrap_or(0);
    Ok(results.into_iter().nth(best).expect("multistart >= 1"))
}

/// Solves every instance with the same configuration, instances in parallel
/// under `exec`.
pub fn solve_batch(
    instances: &[PlankInstance],
    config: &SolveConfig,
    exec: Exec,
) -> Vec<Result<SolveResult>> {
    exec::map_indexed(exec, instances.len(), |i| solve(&instances[i], config))
}
