//! Convergence diagnostics for the index-set cone approximations.
//!
//! The quality of the order-k outer cone is measured per functional L by
//! comparing two numbers for ψ = −L(p(x,·)):
//!
//!   - p̃*_k, the smallest expected value of ψ under SOS densities of degree
//!     ≤ 2k on Y — a measure-based *upper* bound on min_Y ψ, computable as
//!     the smallest generalized eigenvalue of the pencil (A_k(ψ), B_k);
//!   - p*_k = min_Y ψ itself, estimated by a dense grid scan with local
//!     refinement.
//!
//! Their difference E = p̃*_k − p*_k ≥ 0 simultaneously bounds the
//! infeasibility of the extracted point (max_Y L(p) ≤ E) and, up to a
//! problem-dependent constant, the optimality gap of the hierarchy. E decays
//! like O(log k / k) with an explicit constant ([`rate_bound`]), a fact
//! proved with the Chebyshev "needle" polynomials implemented at the bottom
//! of this module.

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::moments::{IndexSet, MomentTable};
use crate::poly::Polynomial;
use crate::relax::{FsippProblem, MomentFunctional};

#[derive(Error, Debug)]
pub enum DiagError {
    #[error("grid oracle supports dimension ≤ {max}, got {got}")]
    DimensionTooLarge { max: usize, got: usize },
    #[error("rate bound undefined: {0}")]
    UnsupportedSet(String),
    #[error("rate bound requires order ≥ 2, got {0}")]
    OrderTooSmall(u32),
}

/// Smallest expected value of ψ under unit-mass SOS densities of degree
/// ≤ 2k on the set: the minimum generalized eigenvalue λ of
/// A_k(ψ) v = λ B_k v with A_k the ψ-localized moment matrix and B_k the
/// plain moment matrix. Non-increasing in k and an upper bound on min_Y ψ.
///
/// The pencil is formed over a basis of functions linearly independent on
/// the set (on the sphere the plain monomial basis is not: anything
/// divisible by 1 − ‖y‖² vanishes identically), so B_k is positive definite
/// and Cholesky applies. Should factorization still fail numerically at
/// high degree, the pencil is solved on B_k's numerically positive
/// eigenspace instead — the kernel of B_k lies in the kernel of every
/// A_k(ψ), so no generalized eigenvalue is lost.
pub fn lasserre_upper(set: &IndexSet, psi: &Polynomial, k: u32) -> f64 {
    assert_eq!(psi.dim(), set.n(), "ψ dimension mismatch");
    let table = MomentTable::new(set.clone());
    let basis = crate::moments::support_basis(set, k);
    let a = table.localized_gram(psi, &basis);
    let b = table.gram_matrix(&basis);
    if let Some(chol) = b.clone().cholesky() {
        let l = chol.l();
        let y = l.solve_lower_triangular(&a).expect("L is nonsingular");
        let m = l
            .solve_lower_triangular(&y.transpose())
            .expect("L is nonsingular");
        return sym_min_eig(&m);
    }
    // singular B_k: project onto its positive eigenspace
    let nrows = b.nrows();
    let eig = b.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    assert!(lmax > 0.0, "moment matrix of a positive measure is nonzero");
    let keep: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i] > 1e-12 * lmax)
        .collect();
    let mut w = DMatrix::zeros(nrows, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        let scale = 1.0 / eig.eigenvalues[i].sqrt();
        w.set_column(c, &(eig.eigenvectors.column(i) * scale));
    }
    let m = w.transpose() * &a * &w;
    sym_min_eig(&m)
}

fn sym_min_eig(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    sym.symmetric_eigenvalues()
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

/// min_Y ψ via dense scan (step 1/200 per axis) plus 20 halving refinement
/// steps around the best point. Only exact set members are evaluated; the
/// sphere is scanned in angular coordinates at equivalent resolution.
pub fn inner_min(set: &IndexSet, psi: &Polynomial) -> Result<f64, DiagError> {
    let n = set.n();
    if n > 3 {
        return Err(DiagError::DimensionTooLarge { max: 3, got: n });
    }
    Ok(grid_min_adaptive(set, psi))
}

/// The same oracle without the dimension gate, at resolution degrading with
/// n so the scan stays tractable; used internally for feasibility residuals
/// in any dimension.
pub(crate) fn grid_min_adaptive(set: &IndexSet, psi: &Polynomial) -> f64 {
    assert_eq!(psi.dim(), set.n(), "ψ dimension mismatch");
    let n = set.n();
    let per_axis: usize = match n {
        0..=3 => 401,
        4 => 21,
        5 => 11,
        6 => 9,
        _ => 5,
    };
    match set {
        IndexSet::Sphere { n } if *n <= 3 => sphere_min(*n, psi, per_axis),
        _ => box_like_min(set, psi, per_axis),
    }
}

const REFINE_STEPS: usize = 20;
const MAX_SWEEPS: usize = 200;

fn box_like_min(set: &IndexSet, psi: &Polynomial, per_axis: usize) -> f64 {
    let n = set.n();
    let eval = FlatPoly::new(psi);
    let axis: Vec<f64> = (0..per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
        .collect();
    // candidate anchors that a coarse grid may miss entirely
    let mut best: Option<(f64, Vec<f64>)> = None;
    let consider = |y: &[f64], best: &mut Option<(f64, Vec<f64>)>| {
        let v = eval.eval(y);
        if best.as_ref().is_none_or(|(b, _)| v < *b) {
            *best = Some((v, y.to_vec()));
        }
    };
    match set {
        IndexSet::SimplexUnion { simplices, .. } => {
            for s in simplices {
                let verts = s.vertices();
                let mut centroid = vec![0.0; n];
                for v in verts {
                    for i in 0..n {
                        centroid[i] += v[i] / verts.len() as f64;
                    }
                }
                for v in verts {
                    consider(v, &mut best);
                }
                consider(&centroid, &mut best);
            }
        }
        IndexSet::Ball { .. } => consider(&vec![0.0; n], &mut best),
        _ => {}
    }
    let project: &dyn Fn(&mut Vec<f64>) -> bool = match set {
        IndexSet::Box { .. } => &|y: &mut Vec<f64>| {
            for c in y.iter_mut() {
                *c = c.clamp(-1.0, 1.0);
            }
            true
        },
        IndexSet::Ball { .. } => &|y: &mut Vec<f64>| {
            let norm2: f64 = y.iter().map(|c| c * c).sum();
            if norm2 > 1.0 {
                let s = 1.0 / norm2.sqrt();
                for c in y.iter_mut() {
                    *c *= s;
                }
            }
            true
        },
        IndexSet::Sphere { .. } => &|y: &mut Vec<f64>| {
            let norm2: f64 = y.iter().map(|c| c * c).sum();
            if norm2 == 0.0 {
                return false;
            }
            let s = 1.0 / norm2.sqrt();
            for c in y.iter_mut() {
                *c *= s;
            }
            true
        },
        IndexSet::SimplexUnion { .. } => &|_y: &mut Vec<f64>| true,
    };
    let admit = |y: &[f64]| set.contains(y);

    // dense scan over the grid restricted to the set (sphere: normalized)
    let mut point = vec![0usize; n];
    loop {
        let mut y: Vec<f64> = point.iter().map(|&i| axis[i]).collect();
        let ok = match set {
            IndexSet::Sphere { .. } => project(&mut y),
            _ => admit(&y),
        };
        if ok {
            consider(&y, &mut best);
        }
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                break;
            }
            point[pos] += 1;
            if point[pos] < per_axis {
                break;
            }
            point[pos] = 0;
            pos += 1;
        }
        if pos == n {
            break;
        }
    }
    let (mut best_v, mut best_y) = best.expect("set anchors guarantee a candidate");

    // pattern search: sweep each scale until no axis move improves,
    // then halve; the sweep cap keeps wall time bounded
    let mut delta = 2.0 / (per_axis - 1) as f64;
    for _ in 0..REFINE_STEPS {
        delta *= 0.5;
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for i in 0..n {
                for s in [-1.0, 1.0] {
                    let mut cand = best_y.clone();
                    cand[i] += s * delta;
                    if !project(&mut cand) || !admit(&cand) {
                        continue;
                    }
                    let v = eval.eval(&cand);
                    if v < best_v {
                        best_v = v;
                        best_y = cand;
                        moved = true;
                    }
                }
            }
            if !moved {
                break;
            }
        }
    }
    best_v
}

/// Exact minimization over the sphere in angular coordinates (n ≤ 3): the
/// grid resolution matches the 1/200 box step as arc length.
fn sphere_min(n: usize, psi: &Polynomial, per_axis: usize) -> f64 {
    let eval = FlatPoly::new(psi);
    match n {
        1 => eval.eval(&[-1.0]).min(eval.eval(&[1.0])),
        2 => {
            let count = per_axis * 3; // ≈ 2π / (1/200)
            let at = |t: f64| {
                let y = [t.cos(), t.sin()];
                eval.eval(&y)
            };
            let mut best_t = 0.0;
            let mut best_v = f64::INFINITY;
            for i in 0..count {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                let v = at(t);
                if v < best_v {
                    best_v = v;
                    best_t = t;
                }
            }
            let mut delta = 2.0 * std::f64::consts::PI / count as f64;
            for _ in 0..REFINE_STEPS {
                delta *= 0.5;
                for _ in 0..MAX_SWEEPS {
                    let mut moved = false;
                    for s in [-1.0, 1.0] {
                        let t = best_t + s * delta;
                        let v = at(t);
                        if v < best_v {
                            best_v = v;
                            best_t = t;
                            moved = true;
                        }
                    }
                    if !moved {
                        break;
                    }
                }
            }
            best_v
        }
        3 => {
            let half = per_axis * 3 / 2; // ≈ π / (1/200)
            let count = per_axis * 3;
            let at = |th: f64, ph: f64| {
                let y = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
                eval.eval(&y)
            };
            let mut best = (0.0, 0.0, f64::INFINITY);
            for i in 0..=half {
                let th = std::f64::consts::PI * i as f64 / half as f64;
                for j in 0..count {
                    let ph = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                    let v = at(th, ph);
                    if v < best.2 {
                        best = (th, ph, v);
                    }
                }
            }
            let (mut th, mut ph, mut best_v) = best;
            let mut delta = std::f64::consts::PI / half as f64;
            for _ in 0..REFINE_STEPS {
                delta *= 0.5;
                for _ in 0..MAX_SWEEPS {
                    let mut moved = false;
                    for (dt, dp) in [(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)] {
                        let v = at(th + dt * delta, ph + dp * delta);
                        if v < best_v {
                            best_v = v;
                            th += dt * delta;
                            ph += dp * delta;
                            moved = true;
                        }
                    }
                    if !moved {
                        break;
                    }
                }
            }
            best_v
        }
        _ => unreachable!("angular scan is n ≤ 3 only"),
    }
}

/// Dense-iteration-friendly polynomial: flat term arrays and per-call
/// exponentiation by squaring beat the BTreeMap walk by a wide margin on
/// grid scans.
struct FlatPoly {
    terms: Vec<(Vec<u32>, f64)>,
}

impl FlatPoly {
    fn new(p: &Polynomial) -> Self {
        FlatPoly {
            terms: p.terms().map(|(m, c)| (m.exps().to_vec(), c)).collect(),
        }
    }

    fn eval(&self, y: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (exps, c) in &self.terms {
            let mut t = *c;
            for (e, v) in exps.iter().zip(y) {
                match e {
                    0 => {}
                    1 => t *= v,
                    2 => t *= v * v,
                    _ => t *= v.powi(*e as i32),
                }
            }
            acc += t;
        }
        acc
    }
}

/// The diagnostic gap E = p̃*_k − p*_k for one functional, together with the
/// two sides that define it.
#[derive(Clone, Copy, Debug)]
pub struct GapReport {
    /// E = upper − inner ≥ 0; bounds max_Y L(p(x,·)) from above.
    pub e: f64,
    /// p̃*_k, the measure-based upper bound on min_Y ψ.
    pub upper: f64,
    /// p*_k = min_Y ψ from the grid oracle.
    pub inner: f64,
}

impl GapReport {
    /// The certified bound: the extracted point violates the semi-infinite
    /// constraint by at most this much (max_Y L(p) ≤ E).
    pub fn infeasibility_bound(&self) -> f64 {
        self.e
    }

    /// The observed max_Y L(p(x,·)) = −p*_k itself.
    pub fn max_lp(&self) -> f64 {
        -self.inner
    }
}

/// Evaluate the convergence gap E for a functional produced at order k.
/// ψ = −L(p(x,·)) is formed by pushing L through the x-block of p.
pub fn gap_e(
    prob: &FsippProblem,
    l: &MomentFunctional,
    k: u32,
    tol: f64,
) -> Result<GapReport, DiagError> {
    let psi = l.apply_x(prob.p()).scale(-1.0);
    let upper = lasserre_upper(prob.index_set(), &psi, k);
    let inner = inner_min(prob.index_set(), &psi)?;
    let e = upper - inner;
    assert!(
        e >= -10.0 * tol,
        "measure-based upper bound fell below the grid minimum: E = {e}"
    );
    Ok(GapReport { e, upper, inner })
}

/// Uniform gradient/Hessian bounds of the functional family plus the
/// geometry constants of the index set, feeding [`rate_bound`].
#[derive(Clone, Copy, Debug)]
pub struct RateConstants {
    pub b1: f64,
    pub b2: f64,
    pub eta_y: f64,
    pub eps_y: f64,
    pub n: usize,
}

impl RateConstants {
    pub fn new(b1: f64, b2: f64, eta_y: f64, eps_y: f64, n: usize) -> Self {
        assert!(b1 >= 0.0 && b2 >= 0.0, "derivative bounds must be ≥ 0");
        assert!(eta_y > 0.0 && eta_y <= 1.0, "η_Y must lie in (0, 1]");
        assert!(eps_y > 0.0, "ε_Y must be positive");
        RateConstants {
            b1,
            b2,
            eta_y,
            eps_y,
            n,
        }
    }

    /// Estimate B1/B2 for a concrete ψ as grid maxima of ‖∇ψ‖ and the
    /// spectral norm of ∇²ψ; η_Y = 1 for the full-dimensional supported
    /// sets. The sphere is refused: its geometry constant under the volume
    /// definition is zero, so the rate bound does not apply.
    pub fn estimate(set: &IndexSet, psi: &Polynomial) -> Result<Self, DiagError> {
        let n = set.n();
        if n > 3 {
            return Err(DiagError::DimensionTooLarge { max: 3, got: n });
        }
        if matches!(set, IndexSet::Sphere { .. }) {
            return Err(DiagError::UnsupportedSet(
                "the sphere has empty interior, so the geometry constant vanishes".into(),
            ));
        }
        let grad = psi.gradient();
        let hess = psi.hessian();
        let per_axis = 51usize;
        let axis: Vec<f64> = (0..per_axis)
            .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
            .collect();
        let mut b1 = 0.0f64;
        let mut b2 = 0.0f64;
        let mut point = vec![0usize; n];
        loop {
            let y: Vec<f64> = point.iter().map(|&i| axis[i]).collect();
            if set.contains(&y) {
                let g2: f64 = grad.iter().map(|d| d.evaluate(&y).powi(2)).sum();
                b1 = b1.max(g2.sqrt());
                let mut h = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        h[(i, j)] = hess[i][j].evaluate(&y);
                    }
                }
                let spec = h
                    .symmetric_eigenvalues()
                    .iter()
                    .map(|l| l.abs())
                    .fold(0.0f64, f64::max);
                b2 = b2.max(spec);
            }
            let mut pos = 0;
            loop {
                if pos == n {
                    break;
                }
                point[pos] += 1;
                if point[pos] < per_axis {
                    break;
                }
                point[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        Ok(RateConstants::new(b1, b2, 1.0, 1.0, n))
    }
}

/// Closed-form decay bound on the gap:
/// E ≤ 2√n·B₁·((4n+2)·log k / ⌊k/2⌋ + C/k) with
/// C = 2^{3n+3}·vol([−1,1]^n) / (η_Y · n^{n/2} · vol(unit ball)).
pub fn rate_bound(c: &RateConstants, k: u32) -> Result<f64, DiagError> {
    if k < 2 {
        return Err(DiagError::OrderTooSmall(k));
    }
    let n = c.n as f64;
    let vol_cube = 2f64.powi(c.n as i32);
    let vol_ball = (0.5 * n * std::f64::consts::PI.ln() - ln_gamma(0.5 * n + 1.0)).exp();
    let big_c = 2f64.powi(3 * c.n as i32 + 3) * vol_cube / (c.eta_y * n.powf(n / 2.0) * vol_ball);
    let kf = k as f64;
    let half = (k / 2) as f64;
    Ok(2.0 * n.sqrt() * c.b1 * ((4.0 * n + 2.0) * kf.ln() / half + big_c / kf))
}

/// Chebyshev polynomial of the first kind, T_k(t) = cos(k·arccos t) on
/// [−1, 1], continued by the hyperbolic form ½(w^k + w^{−k}) with
/// w = |t| + √(t²−1) outside (sign by parity).
pub fn chebyshev(k: u32, t: f64) -> f64 {
    if t.abs() <= 1.0 {
        return (k as f64 * t.acos()).cos();
    }
    let a = t.abs();
    let w = a + (a * a - 1.0).sqrt();
    let v = 0.5 * (w.powi(k as i32) + w.powi(-(k as i32)));
    if t < 0.0 && k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// The needle polynomial v_k^h(t) = T_k(1+h²−t²)² / T_k(1+h²)²: equals 1 at
/// t = 0, stays within [0, 1] on [−1, 1], and is ≤ 4e^{−kh/2} once |t| ≥ h —
/// a polynomial bump of width h with degree-driven decay.
pub fn needle(k: u32, h: f64, t: f64) -> f64 {
    assert!(h > 0.0 && h < 1.0, "needle width must lie in (0, 1)");
    let num = chebyshev(k, 1.0 + h * h - t * t);
    let den = chebyshev(k, 1.0 + h * h);
    (num / den).powi(2)
}

/// Piecewise-linear minorant floor: the largest value any degree-k
/// polynomial that is nonnegative on [0, ∞), equals 1 at 0, and is ≤ 1 on
/// [0, 1] must still exceed near zero: 1 − 2k²t for t ≤ 1/(2k²), else 0.
pub fn phi_lower(k: u32, t: f64) -> f64 {
    assert!(k >= 1, "degree must be positive");
    let cutoff = 1.0 / (2.0 * (k as f64).powi(2));
    if t <= cutoff {
        1.0 - 2.0 * (k as f64).powi(2) * t
    } else {
        0.0
    }
}
