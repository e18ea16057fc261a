//! Reference problem instances.
//!
//! Four two-variable instances share the same flavor — a convex quadratic
//! objective over a feasible set carved out by one parametric quadratic
//! constraint — and differ in the index set: box, ball, sphere, and a
//! triangle.  Their optima are known in closed form, which makes them the
//! anchor points for the integration tests.
//!
//! [`perturbed_quartic_instance`] generates a scalable family: a quartic
//! over a fractional objective whose feasible set is the unit ball cut by a
//! halfspace, with randomly shifted index weights.  The shift vector is
//! drawn from a seeded generator so that a fixture file, once written, is
//! reproducible bit for bit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::schema::{BiTerm, ConfigFile, IndexSetFile, PolyTerm, ProblemFile, VertexData};

/// Seed used for the shipped perturbed-quartic fixture.
pub const PERTURBATION_SEED: u64 = 17;

fn term(exp: &[u32], coef: f64) -> PolyTerm {
    PolyTerm {
        exp: exp.to_vec(),
        coef,
    }
}

fn biterm(xexp: &[u32], yexp: &[u32], coef: f64) -> BiTerm {
    BiTerm {
        xexp: xexp.to_vec(),
        yexp: yexp.to_vec(),
        coef,
    }
}

fn config(r: f64, gstar: f64) -> ConfigFile {
    ConfigFile {
        r,
        gstar,
        tol: 1e-8,
    }
}

/// min (x1+1)² + (x2+1)² subject to
/// x1² + y1² x2² + 2 y1 y2 x1 x2 + x1 + x2 ≤ 0 for all y in [−1,1]².
/// The feasible set is the region between a pair of lines and inside an
/// ellipse; the minimum is 0.5 at (−0.5, −0.5).
pub fn box_instance() -> ProblemFile {
    ProblemFile {
        m: 2,
        n: 2,
        f: vec![
            term(&[2, 0], 1.0),
            term(&[1, 0], 2.0),
            term(&[0, 2], 1.0),
            term(&[0, 1], 2.0),
            term(&[0, 0], 2.0),
        ],
        g: None,
        phi: vec![],
        p: vec![
            biterm(&[2, 0], &[0, 0], 1.0),
            biterm(&[0, 2], &[2, 0], 1.0),
            biterm(&[1, 1], &[1, 1], 2.0),
            biterm(&[1, 0], &[0, 0], 1.0),
            biterm(&[0, 1], &[0, 0], 1.0),
        ],
        index_set: IndexSetFile {
            kind: "box".to_string(),
            vertices: None,
        },
        config: config(2.0, 0.5),
    }
}

/// min (x1+1)² + (x2+1)² subject to
/// x1² + 2 y1 x1 x2 + (1 − y2²) x2² + x1 + x2 ≤ 0 for all ‖y‖ ≤ 1.
/// The minimum is 0.5 at (−0.5, −0.5).
pub fn ball_instance() -> ProblemFile {
    ProblemFile {
        m: 2,
        n: 2,
        f: vec![
            term(&[2, 0], 1.0),
            term(&[1, 0], 2.0),
            term(&[0, 2], 1.0),
            term(&[0, 1], 2.0),
            term(&[0, 0], 2.0),
        ],
        g: None,
        phi: vec![],
        p: vec![
            biterm(&[2, 0], &[0, 0], 1.0),
            biterm(&[1, 1], &[1, 0], 2.0),
            biterm(&[0, 2], &[0, 0], 1.0),
            biterm(&[0, 2], &[0, 2], -1.0),
            biterm(&[1, 0], &[0, 0], 1.0),
            biterm(&[0, 1], &[0, 0], 1.0),
        ],
        index_set: IndexSetFile {
            kind: "ball".to_string(),
            vertices: None,
        },
        config: config(2.0, 0.5),
    }
}

/// min (x1−1)² + (x2−1)² subject to
/// (y1 x1 − y2 x2)²/4 + (y2 x1 + y1 x2)² ≤ 1 for all ‖y‖ = 1:
/// the feasible set is the intersection of all rotations of an ellipse.
/// The minimum is 2(√2/2 − 1)² ≈ 0.1716 at (√2/2, √2/2).
pub fn sphere_instance() -> ProblemFile {
    ProblemFile {
        m: 2,
        n: 2,
        f: vec![
            term(&[2, 0], 1.0),
            term(&[1, 0], -2.0),
            term(&[0, 2], 1.0),
            term(&[0, 1], -2.0),
            term(&[0, 0], 2.0),
        ],
        g: None,
        phi: vec![],
        p: vec![
            biterm(&[2, 0], &[2, 0], 0.25),
            biterm(&[2, 0], &[0, 2], 1.0),
            biterm(&[0, 2], &[2, 0], 1.0),
            biterm(&[0, 2], &[0, 2], 0.25),
            biterm(&[1, 1], &[1, 1], 1.5),
            biterm(&[0, 0], &[0, 0], -1.0),
        ],
        index_set: IndexSetFile {
            kind: "sphere".to_string(),
            vertices: None,
        },
        config: config(2.0, 0.5),
    }
}

/// min (x1+1)² + (x2−1)² subject to
/// 2x1² + 2x2² − (y1 − y2)² x1 x2 ≤ 1 for all y in the triangle with
/// vertices (−1,−1), (1,1), (−1,1).  The feasible set is a lens between
/// the lines √2(x2−x1) = ±1 and the circle of radius √2/2; the minimum is
/// 2(√2/4 − 1)² ≈ 0.8358 at (−√2/4, √2/4).
pub fn triangle_instance() -> ProblemFile {
    ProblemFile {
        m: 2,
        n: 2,
        f: vec![
            term(&[2, 0], 1.0),
            term(&[1, 0], 2.0),
            term(&[0, 2], 1.0),
            term(&[0, 1], -2.0),
            term(&[0, 0], 2.0),
        ],
        g: None,
        phi: vec![],
        p: vec![
            biterm(&[0, 0], &[0, 0], -1.0),
            biterm(&[2, 0], &[0, 0], 2.0),
            biterm(&[0, 2], &[0, 0], 2.0),
            biterm(&[1, 1], &[2, 0], -1.0),
            biterm(&[1, 1], &[1, 1], 2.0),
            biterm(&[1, 1], &[0, 2], -1.0),
        ],
        index_set: IndexSetFile {
            kind: "simplices".to_string(),
            vertices: Some(VertexData::Polytope(vec![
                vec![-1.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
            ])),
        },
        config: config(2.0, 0.5),
    }
}

/// min Σ(x_i−1)⁴ / (Σx_i + 1) subject to Σx_i ≥ 0 and
/// Σ (1 − (y_i − a_i)²/4) x_i² ≤ 1 for all y in [−1,1]^n, with the shifts
/// a_i drawn uniformly from [−1,1] by a seeded generator.
///
/// Worst case over y is y = a, so the feasible set is the unit ball cut by
/// the halfspace Σx_i ≥ 0 regardless of the shifts; the minimum is
/// n(√(1/n) − 1)⁴ / (1 + √n) at x_i = √(1/n).
pub fn perturbed_quartic_instance(n: usize, seed: u64) -> ProblemFile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let e = |i: usize, v: u32| -> Vec<u32> {
        let mut exp = vec![0u32; n];
        exp[i] = v;
        exp
    };
    let zero = vec![0u32; n];

    let mut f = Vec::new();
    for i in 0..n {
        // (x_i − 1)⁴ without its constant part.
        f.push(term(&e(i, 4), 1.0));
        f.push(term(&e(i, 3), -4.0));
        f.push(term(&e(i, 2), 6.0));
        f.push(term(&e(i, 1), -4.0));
    }
    f.push(term(&zero, n as f64));

    let mut g = Vec::new();
    for i in 0..n {
        g.push(term(&e(i, 1), 1.0));
    }
    g.push(term(&zero, 1.0));

    let phi: Vec<PolyTerm> = (0..n).map(|i| term(&e(i, 1), -1.0)).collect();

    let mut p = Vec::new();
    for (i, &ai) in a.iter().enumerate() {
        // (1 − (y_i − a_i)²/4) x_i² expanded in y_i.
        p.push(biterm(&e(i, 2), &zero, 1.0 - ai * ai / 4.0));
        p.push(biterm(&e(i, 2), &e(i, 1), ai / 2.0));
        p.push(biterm(&e(i, 2), &e(i, 2), -0.25));
    }
    p.push(biterm(&zero, &zero, -1.0));

    ProblemFile {
        m: n,
        n,
        f,
        g: Some(g),
        phi: vec![phi],
        p,
        index_set: IndexSetFile {
            kind: "box".to_string(),
            vertices: None,
        },
        // The feasible set sits in the unit ball and the denominator is at
        // least 1 on it (Σx_i ≥ 0 there).
        config: config(2.0, 1.0),
    }
}

/// Closed-form optimum of [`perturbed_quartic_instance`].
pub fn perturbed_quartic_optimum(n: usize) -> f64 {
    let nf = n as f64;
    nf * ((1.0 / nf).sqrt() - 1.0).powi(4) / (1.0 + nf.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_build_problems() {
        for (pf, minimum) in [
            (box_instance(), 0.5),
            (ball_instance(), 0.5),
            (sphere_instance(), 2.0 * (0.5f64.sqrt() - 1.0).powi(2)),
            (
                triangle_instance(),
                2.0 * (2.0f64.sqrt() / 4.0 - 1.0).powi(2),
            ),
        ] {
            let prob = pf.to_problem().unwrap();
            assert_eq!(prob.m(), 2);
            assert_eq!(prob.n(), 2);
            assert!(minimum > 0.0);
        }
    }

    #[test]
    fn instance_optima_are_attained_where_stated() {
        // Evaluate f/g at the known minimizer and compare with the closed
        // form; the parametric constraint must hold there for a sample of
        // index points.
        let cases: Vec<(ProblemFile, Vec<f64>, f64)> = vec![
            (box_instance(), vec![-0.5, -0.5], 0.5),
            (ball_instance(), vec![-0.5, -0.5], 0.5),
            (
                sphere_instance(),
                vec![0.5f64.sqrt(), 0.5f64.sqrt()],
                2.0 * (0.5f64.sqrt() - 1.0).powi(2),
            ),
            (
                triangle_instance(),
                vec![-2.0f64.sqrt() / 4.0, 2.0f64.sqrt() / 4.0],
                2.0 * (2.0f64.sqrt() / 4.0 - 1.0).powi(2),
            ),
        ];
        for (pf, u, want) in cases {
            let prob = pf.to_problem().unwrap();
            let val = prob.f().evaluate(&u) / prob.g().evaluate(&u);
            assert!(
                (val - want).abs() < 1e-12,
                "objective at the stated minimizer: {val} vs {want}"
            );
            assert!(
                fsipp::relax::feasibility_residual(&prob, &u) < 1e-9,
                "stated minimizer must be feasible"
            );
        }
    }

    #[test]
    fn perturbed_quartic_is_deterministic_and_consistent() {
        let a = perturbed_quartic_instance(6, PERTURBATION_SEED);
        let b = perturbed_quartic_instance(6, PERTURBATION_SEED);
        assert_eq!(a, b, "same seed must reproduce the same instance");
        let c = perturbed_quartic_instance(6, PERTURBATION_SEED + 1);
        assert_ne!(a, c, "different seeds must differ");

        let prob = a.to_problem().unwrap();
        assert_eq!(prob.m(), 6);
        // The closed-form minimizer is feasible and attains the optimum.
        let u = vec![(1.0f64 / 6.0).sqrt(); 6];
        let val = prob.f().evaluate(&u) / prob.g().evaluate(&u);
        assert!((val - perturbed_quartic_optimum(6)).abs() < 1e-12);
        assert!(fsipp::relax::feasibility_residual(&prob, &u) < 1e-9);
        assert!((perturbed_quartic_optimum(6) - 0.2133).abs() < 5e-5);
    }
}
