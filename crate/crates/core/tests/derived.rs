//! Checks against independently computed references: brute force grids,
//! Monte Carlo means, finite differences and polynomial identities.

use plank_core::complex::{CVector, Complex};
use plank_core::diagnostics::{self, ProbeOptions, ProbeVariant};
use plank_core::exec::Exec;
use plank_core::instance::{gen_random, gen_repeated, gen_tight, PlankInstance, WeightMode};
use plank_core::oracle;
use plank_core::rng::RngState;
use plank_core::solver::{self, Escape, SolveConfig, SolveStatus};

fn seq() -> SolveConfig {
    SolveConfig::default().with_exec(Exec::Sequential)
}

/// Critical points of the objective for `d = 2`, found by Gauss–Newton on
/// `v - T(v)` in the chart `(cos a, e^{ib} sin a)` from a grid of starts.
/// Returns every distinct point with residual below `1e-12`, maxima and
/// saddles alike.
fn critical_points_d2(inst: &PlankInstance) -> Vec<CVector> {
    let point = |a: f64, b: f64| {
        CVector::new(vec![
            Complex::real(a.cos()),
            Complex::from_polar(a.sin(), b),
        ])
    };
    let resid = |a: f64, b: f64| -> Option<[f64; 4]> {
        let v = point(a, b);
        let t = solver::stationarity_map(inst, &v).ok()?;
        let r = &v - &t;
        Some([r[0].re, r[0].im, r[1].re, r[1].im])
    };
    let mut found: Vec<CVector> = Vec::new();
    let steps = 24;
    for ia in 1..steps {
        for ib in 0..2 * steps {
            let mut a = ia as f64 * std::f64::consts::FRAC_PI_2 / steps as f64;
            let mut b = ib as f64 * std::f64::consts::PI / steps as f64;
            for _ in 0..60 {
                let Some(r) = resid(a, b) else { break };
                let h = 1e-7;
                let (Some(ra), Some(rb)) = (resid(a + h, b), resid(a, b + h)) else {
                    break;
                };
                let (Some(ra2), Some(rb2)) = (resid(a - h, b), resid(a, b - h)) else {
                    break;
                };
                let ja: Vec<f64> = (0..4).map(|i| (ra[i] - ra2[i]) / (2.0 * h)).collect();
                let jb: Vec<f64> = (0..4).map(|i| (rb[i] - rb2[i]) / (2.0 * h)).collect();
                let (mut g11, mut g12, mut g22, mut q1, mut q2) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for i in 0..4 {
                    g11 += ja[i] * ja[i];
                    g12 += ja[i] * jb[i];
                    g22 += jb[i] * jb[i];
                    q1 += ja[i] * r[i];
                    q2 += jb[i] * r[i];
                }
                let det = g11 * g22 - g12 * g12;
                if det.abs() < 1e-300 {
                    break;
                }
                a -= (g22 * q1 - g12 * q2) / det;
                b -= (g11 * q2 - g12 * q1) / det;
                if !(a > 1e-6 && a < std::f64::consts::FRAC_PI_2 - 1e-6) {
                    break;
                }
            }
            if !(a > 1e-6 && a < std::f64::consts::FRAC_PI_2 - 1e-6) {
                continue;
            }
            let v = point(a, b).gauge_fix().unwrap();
            match solver::residual(inst, &v) {
                Ok(r) if r < 1e-12 => {}
                _ => continue,
            }
            if found.iter().all(|w| (&v - w).norm() > 1e-6) {
                found.push(v);
            }
        }
    }
    found
}

#[test]
fn tight_d3_optimum_by_constrained_brute_force() {
    // F depends only on the moduli r_k = |u_k|, which range over the positive
    // octant of the real unit sphere.
    let inst = gen_tight(3);
    let m = 2000;
    let h = std::f64::consts::FRAC_PI_2 / m as f64;
    let mut best = f64::NEG_INFINITY;
    for i in 1..m {
        let a = i as f64 * h;
        for j in 1..m {
            let b = j as f64 * h;
            let r = [a.sin() * b.cos(), a.sin() * b.sin(), a.cos()];
            let f: f64 = r.iter().map(|x| x.ln() / 3.0).sum();
            best = best.max(f);
        }
    }
    let frozen = -0.549_306_144_334_054_8; // -(ln 3)/2
    assert!((best - frozen).abs() < 1e-5, "grid max {best}");
    let solved = solver::solve(&inst, &seq()).unwrap();
    assert!((solved.objective - frozen).abs() < 1e-12);
    assert!(solved.objective >= best);
}

#[test]
fn random_pairs_have_mean_square_overlap_one_over_d() {
    let d = 5;
    let mean = (0..10_000u64)
        .map(|seed| {
            let inst = gen_random(d, 2, seed, WeightMode::Equal);
            inst.vectors[0].inner(&inst.vectors[1]).unwrap().norm_sqr()
        })
        .sum::<f64>()
        / 10_000.0;
    assert!((mean - 0.2).abs() <= 0.01, "mean {mean}");
}

#[test]
fn stationarity_identity_on_random_points() {
    for seed in 0..100u64 {
        let inst = gen_random(
            2 + seed as usize % 5,
            1 + seed as usize % 12,
            seed,
            WeightMode::Random,
        );
        let v = RngState::new(seed + 500).unit_vector(inst.d);
        let t = solver::stationarity_map(&inst, &v).unwrap();
        let s = t.inner(&v).unwrap();
        assert!((s - Complex::ONE).abs() <= 1e-12, "seed {seed}: {s:?}");
    }
}

#[test]
fn fixed_point_and_tangent_agree_on_d3_n5() {
    let inst = gen_random(3, 5, 1, WeightMode::Random);
    let v0 = RngState::new(1).unit_vector(3);
    let fp = solver::fixed_point_iterate(&inst, &v0, &seq()).unwrap();
    let ta = solver::tangent_ascent(&inst, &v0, &seq()).unwrap();
    assert!(fp.residual <= 1e-10, "fixed point residual {}", fp.residual);
    assert!(ta.residual <= 1e-10);
    assert!((fp.objective - ta.objective).abs() <= 1e-8);
    // regression value recorded from a converged run
    let full = solver::solve(&inst, &seq()).unwrap();
    assert!(full.objective >= ta.objective - 1e-12);
    assert!(
        (full.objective - (-0.235_187_307_679_947_5)).abs() < 1e-9,
        "{}",
        full.objective
    );
}

#[test]
fn repeated_from_random_start() {
    let inst = gen_repeated(2, 3);
    for seed in 0..5 {
        let v0 = RngState::new(seed).unit_vector(2);
        let r = solver::fixed_point_iterate(&inst, &v0, &seq()).unwrap();
        assert!(r.objective.abs() <= 1e-12);
        assert!((&r.u - &CVector::basis(2, 0)).norm() <= 1e-6);
    }
}

#[test]
fn derivative_matches_central_differences() {
    let mut rng = RngState::new(31);
    for case in 0..100 {
        let d = 2 + case % 4;
        let n = 1 + case % 9;
        let inst = gen_random(d, n, 3000 + case as u64, WeightMode::Equal);
        let u = rng.unit_vector(d);
        let j = rng.index(n);
        let raw = diagnostics::p_prime_zero_raw(&inst, &u, j).unwrap();
        let h = 1e-6;
        let fd = (diagnostics::p_holomorphic(&inst, &u, j, Complex::real(h)).unwrap()
            - diagnostics::p_holomorphic(&inst, &u, j, Complex::real(-h)).unwrap())
            / (2.0 * h);
        let rel = (raw - fd).abs() / raw.abs().max(1.0);
        assert!(rel <= 1e-6, "case {case}: raw {raw:?} fd {fd:?}");
        // holomorphic: the imaginary direction gives i p'(0)
        let fdi = (diagnostics::p_holomorphic(&inst, &u, j, Complex::new(0.0, h)).unwrap()
            - diagnostics::p_holomorphic(&inst, &u, j, Complex::new(0.0, -h)).unwrap())
            / (2.0 * h);
        assert!((fdi - Complex::I * raw).abs() / raw.abs().max(1.0) <= 1e-6);
    }
}

/// Coefficients of `prod (c_k z + d_k) / d_k` by repeated convolution.
fn expand_product(inst: &PlankInstance, u: &CVector, j: usize) -> Vec<Complex> {
    let mut coeffs = vec![Complex::ONE];
    for (k, vk) in inst.vectors.iter().enumerate() {
        if k == j {
            continue;
        }
        let den = u.inner(vk).unwrap();
        let c = inst.vector(j).inner(vk).unwrap() / den;
        let mut next = vec![Complex::ZERO; coeffs.len() + 1];
        for (i, &a) in coeffs.iter().enumerate() {
            next[i] += a;
            next[i + 1] += a * c;
        }
        coeffs = next;
    }
    coeffs
}

fn horner(coeffs: &[Complex], z: Complex) -> Complex {
    coeffs
        .iter()
        .rev()
        .fold(Complex::ZERO, |acc, &c| acc * z + c)
}

fn lagrange(xs: &[Complex], ys: &[Complex], z: Complex) -> Complex {
    let mut acc = Complex::ZERO;
    for i in 0..xs.len() {
        let mut w = ys[i];
        for k in 0..xs.len() {
            if k != i {
                w = w * (z - xs[k]) / (xs[i] - xs[k]);
            }
        }
        acc += w;
    }
    acc
}

#[test]
fn p_is_a_polynomial_of_degree_n_minus_one() {
    let mut rng = RngState::new(17);
    for case in 0..20 {
        let n = 1 + case % 7;
        let inst = gen_random(3, n, 40 + case as u64, WeightMode::Equal);
        let u = rng.unit_vector(3);
        let j = rng.index(n);
        let coeffs = expand_product(&inst, &u, j);
        assert_eq!(coeffs.len(), n);
        let pts: Vec<Complex> = (0..3 * n)
            .map(|_| rng.complex_normal().scale(0.5))
            .collect();
        let vals: Vec<Complex> = pts
            .iter()
            .map(|&z| diagnostics::p_holomorphic(&inst, &u, j, z).unwrap())
            .collect();
        for (&z, &p) in pts.iter().zip(&vals) {
            let e = horner(&coeffs, z);
            assert!((p - e).abs() <= 1e-9 * e.abs().max(1.0), "case {case}");
        }
        // degree n-1 interpolant through the first n samples reproduces the rest
        for i in n..3 * n {
            let e = lagrange(&pts[..n], &vals[..n], pts[i]);
            assert!(
                (vals[i] - e).abs() <= 1e-6 * e.abs().max(1.0),
                "case {case} point {i}"
            );
        }
        // p'(0) is the linear coefficient
        if n > 1 {
            let raw = diagnostics::p_prime_zero_raw(&inst, &u, j).unwrap();
            assert!((raw - coeffs[1]).abs() <= 1e-12 * raw.abs().max(1.0));
        }
    }
}

#[test]
fn perturbation_norm_expansion() {
    let mut rng = RngState::new(3);
    for _ in 0..100 {
        let d = 1 + rng.index(5);
        let u = rng.unit_vector(d);
        let v = rng.unit_vector(d);
        let z = rng.complex_normal();
        let uz = diagnostics::perturbed_vector(&u, &v, z).unwrap();
        let expected = z.norm_sqr() + 2.0 * (z * v.inner(&u).unwrap()).re + 1.0;
        assert!((uz.norm_sqr() - expected).abs() <= 1e-12 * expected.max(1.0));
    }
}

#[test]
fn d2_oracle_agrees_with_solver_seed_11() {
    let inst = gen_random(2, 4, 11, WeightMode::Random);
    let grid = oracle::brute_force_d2(&inst, 512, Exec::default()).unwrap();
    let solved = solver::solve(&inst, &seq()).unwrap();
    assert!(solved.objective >= grid.objective_star - 1e-4);
    assert!(grid.objective_star >= solved.objective - 1e-4);
    assert!(grid.min_margin >= -1e-3);
}

#[test]
fn restart_oracle_agrees_with_solver_d4_n8() {
    let inst = gen_random(4, 8, 3, WeightMode::Random);
    let orc = oracle::random_restart_oracle(&inst, 64, 3, Exec::default()).unwrap();
    let solved = solver::solve(&inst, &seq().with_seed(3)).unwrap();
    assert!((orc.objective_star - solved.objective).abs() <= 1e-6);
    assert!((orc.u_star.norm() - 1.0).abs() <= 1e-12);
}

#[test]
fn escapes_succeed_at_saddles_with_violated_margins() {
    let cfg = seq();
    let mut saddles_checked = 0;
    for seed in 0..30u64 {
        let mode = if seed % 2 == 0 {
            WeightMode::Equal
        } else {
            WeightMode::Random
        };
        let inst = gen_random(2, 3, seed, mode);
        for u in critical_points_d2(&inst) {
            let m = plank_core::margins(&inst, &u).unwrap();
            let min = m.iter().copied().fold(f64::INFINITY, f64::min);
            if min >= -1e-3 {
                continue;
            }
            let j = m.iter().position(|&x| x == min).unwrap();
            let f0 = solver::objective(&inst, &u).unwrap();
            match solver::circle_escape(&inst, &u, j, &cfg).unwrap() {
                Escape::Improved { u: moved, gain } => {
                    assert!(gain > 0.0);
                    let f1 = solver::objective(&inst, &moved).unwrap();
                    assert!(f1 > f0, "seed {seed}");
                    let r0 = inst.vector(j).inner(&u).unwrap().abs();
                    let r1 = inst.vector(j).inner(&moved).unwrap().abs();
                    assert!((r0 - r1).abs() <= 1e-12);
                }
                Escape::NoImprovement => {
                    panic!("seed {seed}: no escape from violated critical point")
                }
            }
            if mode == WeightMode::Equal {
                // at a critical point the closed form matches the raw derivative,
                // and points into the disc for a violated plank
                let raw = diagnostics::p_prime_zero_raw(&inst, &u, j).unwrap();
                let closed = diagnostics::p_prime_zero_stationary(&inst, &u, j).unwrap();
                assert!((raw - closed).abs() <= 1e-6 * 3.0);
                let a = inst.vector(j).inner(&u).unwrap();
                assert!(diagnostics::stationary_derivative_factor(3, a.abs()) < 0.0);
                // moving from 0 toward the center of C increases |p|
                let spec = diagnostics::circle_of(&u, &inst, j).unwrap();
                let p = diagnostics::p_holomorphic(&inst, &u, j, spec.center.scale(1e-3)).unwrap();
                assert!(p.abs() > 1.0);
                let probe = diagnostics::max_modulus_probe(
                    &inst,
                    &u,
                    j,
                    &ProbeOptions {
                        variant: ProbeVariant::Holomorphic,
                        ..ProbeOptions::default()
                    },
                    &mut RngState::new(seed),
                )
                .unwrap();
                assert!(!probe.interior_exceeds_boundary);
                assert!(probe.boundary_max > 0.0, "seed {seed}: {probe:?}");
            } else {
                let on_circle = diagnostics::max_modulus_probe(
                    &inst,
                    &u,
                    j,
                    &ProbeOptions::default(),
                    &mut RngState::new(seed),
                )
                .unwrap();
                assert!(on_circle.boundary_max > 0.0);
            }
            saddles_checked += 1;
        }
    }
    assert!(
        saddles_checked >= 5,
        "only {saddles_checked} violated critical points found"
    );
}

#[test]
fn solve_escapes_from_a_violated_start() {
    // A plain ascent from a critical point stays there; the escape loop must
    // leave it and finish with every margin cleared.
    let inst = gen_random(2, 3, 0, WeightMode::Equal);
    let saddle = critical_points_d2(&inst)
        .into_iter()
        .find(|u| {
            plank_core::margins(&inst, u)
                .unwrap()
                .iter()
                .any(|&m| m < -1e-3)
        })
        .expect("instance has a violated critical point");
    let stuck = solver::tangent_ascent(&inst, &saddle, &seq()).unwrap();
    assert_eq!(stuck.status, SolveStatus::MarginShortfall);
    assert_eq!(stuck.iterations, 0);
    let escaped = solver::ascend_from(&inst, &saddle, &seq()).unwrap();
    assert_eq!(escaped.status, SolveStatus::Converged);
    assert!(escaped.escapes_used >= 1);
    assert!(escaped.objective > stuck.objective);
    assert!(escaped.trace.windows(2).all(|w| w[1] >= w[0] - 1e-14));
    let solved = solver::solve(&inst, &seq()).unwrap();
    assert!(solved.objective >= escaped.objective - 1e-9);
}
