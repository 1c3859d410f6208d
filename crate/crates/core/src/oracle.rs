//! Brute-force maximizers of the log-product objective, used to cross-check
//! the solver.

use serde::{Deserialize, Serialize};

use crate::certificate::margins;
use crate::complex::{CVector, Complex};
use crate::error::{PlankError, Result};
use crate::exec::{self, Exec};
use crate::instance::PlankInstance;
use crate::rng::RngState;
use crate::solver::{self, SolveConfig};

pub const MIN_GRID: usize = 64;
/// Local zoom rounds after the coarse grid, each shrinking the step tenfold.
pub const REFINE_ROUNDS: usize = 3;
const REFINE_FACTOR: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub u_star: CVector,
    pub objective_star: f64,
    pub min_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_count: Option<usize>,
}

/// `(cos a, e^{i b} sin a)`. Every point of CP^1 has such a representative.
fn d2_point(alpha: f64, beta: f64) -> CVector {
    let (s, c) = alpha.sin_cos();
    CVector::new(vec![Complex::real(c), Complex::from_polar(s, beta)])
}

fn d2_objective(inst: &PlankInstance, alpha: f64, beta: f64) -> f64 {
    let (s, c) = alpha.sin_cos();
    let phase = Complex::from_polar(s, -beta);
    let mut f = 0.0;
    for (vk, t) in inst.vectors.iter().zip(&inst.weights) {
        // <v_k, u> with u = (c, e^{ib} s)
        let a = (vk[0] * c + vk[1] * phase).abs();
        if a == 0.0 {
            return f64::NEG_INFINITY;
        }
        f += t * t * a.min(1.0).ln();
    }
    f
}

/// Evaluates the objective on `alphas x betas` and returns the best
/// `(alpha, beta, value)`, lowest linear index on ties.
fn grid_best(inst: &PlankInstance, alphas: &[f64], betas: &[f64], exec: Exec) -> (f64, f64, f64) {
    let rows = exec::map_indexed(exec, alphas.len(), |i| {
        let vals: Vec<f64> = betas
            .iter()
            .map(|&b| d2_objective(inst, alphas[i], b))
            .collect();
        let j = exec::argmax_first(vals.iter().copied()).unwrap_or(0);
        (j, vals[j])
    });
    let i = exec::argmax_first(rows.iter().map(|r| r.1)).unwrap_or(0);
    let (j, v) = rows[i];
    (alphas[i], betas[j], v)
}

/// Dense search over `(alpha, beta) in [0, pi/2] x [0, 2 pi)` for `d = 2`,
/// `grid` points in `alpha` and `2 grid` in `beta`, followed by
/// [`REFINE_ROUNDS`] tenfold zooms around the best point.
pub fn brute_force_d2(inst: &PlankInstance, grid: usize, exec: Exec) -> Result<OracleResult> {
    if inst.d != 2 {
        return Err(PlankError::WrongDimension {
            expected: 2,
            found: inst.d,
        });
    }
    if grid < MIN_GRID {
        return Err(PlankError::InvalidArgument(format!(
            "grid must be at least {MIN_GRID}"
        )));
    }
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut h_alpha = half_pi / (grid - 1) as f64;
    let mut h_beta = std::f64::consts::TAU / (2 * grid) as f64;
    let alphas: Vec<f64> = (0..grid).map(|i| i as f64 * h_alpha).collect();
    let betas: Vec<f64> = (0..2 * grid).map(|j| j as f64 * h_beta).collect();
    let (mut alpha, mut beta, mut best) = grid_best(inst, &alphas, &betas, exec);

    let zoom = REFINE_FACTOR as i32;
    for _ in 0..REFINE_ROUNDS {
        let (ha, hb) = (h_alpha / REFINE_FACTOR, h_beta / REFINE_FACTOR);
        let alphas: Vec<f64> = (-zoom..=zoom)
            .map(|m| (alpha + m as f64 * ha).clamp(0.0, half_pi))
            .collect();
        let betas: Vec<f64> = (-zoom..=zoom).map(|m| beta + m as f64 * hb).collect();
        let (a, b, v) = grid_best(inst, &alphas, &betas, exec);
        if v > best {
            (alpha, beta, best) = (a, b, v);
        }
        h_alpha = ha;
        h_beta = hb;
    }

    let u_star = d2_point(alpha, beta).gauge_fix()?;
    let min_margin = min_margin(inst, &u_star);
    Ok(OracleResult {
        objective_star: best,
        u_star,
        min_margin,
        grid_resolution: Some(grid),
        sample_count: None,
    })
}

/// Best of `samples` tangent ascents from independent uniform starts. The
/// starts are drawn in order from one stream seeded with `seed`, so a larger
/// sample count only adds starts; ascent `i` jitters with seed `seed XOR i`.
pub fn random_restart_oracle(
    inst: &PlankInstance,
    samples: usize,
    seed: u64,
    exec: Exec,
) -> Result<OracleResult> {
    if samples == 0 {
        return Err(PlankError::InvalidArgument(
            "samples must be at least 1".into(),
        ));
    }
    let mut rng = RngState::new(seed);
    let starts: Vec<CVector> = (0..samples).map(|_| rng.unit_vector(inst.d)).collect();
    let runs = exec::map_indexed(exec, samples, |i| {
        let cfg = SolveConfig::default()
            .with_seed(seed ^ i as u64)
            .with_exec(Exec::Sequential);
        solver::tangent_ascent(inst, &starts[i], &cfg)
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let best = exec::argmax_first(runs.iter().map(|r| r.objective)).unwrap_or(0);
    let r = &runs[best];
    Ok(OracleResult {
        u_star: r.u.clone(),
        objective_star: r.objective,
        min_margin: r.min_margin,
        grid_resolution: None,
        sample_count: Some(samples),
    })
}

/// The starting points [`random_restart_oracle`] uses for `samples` and `seed`.
pub fn restart_starts(d: usize, samples: usize, seed: u64) -> Vec<CVector> {
    let mut rng = RngState::new(seed);
    (0..samples).map(|_| rng.unit_vector(d)).collect()
}

fn min_margin(inst: &PlankInstance, u: &CVector) -> f64 {
    margins(inst, u)
        .map(|m| m.into_iter().fold(f64::INFINITY, f64::min))
        .unwrap_or(f64::NEG_INFINITY)
}
