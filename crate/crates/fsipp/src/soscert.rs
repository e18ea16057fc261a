//! Sum-of-squares and s.o.s-convexity certification.
//!
//! A polynomial h is a sum of squares (SOS) iff it admits a Gram
//! representation h(u) = v_d(u)ᵀ G v_d(u) with G ⪰ 0, where v_d stacks the
//! monomials of degree ≤ deg(h)/2.  Matching coefficients on both sides turns
//! the search for G into a semidefinite feasibility problem, which we solve
//! with a minimum-trace objective so the returned certificate is unique and
//! well centered.
//!
//! h is s.o.s-convex iff the Hessian form q(u, z) = zᵀ ∇²h(u) z is SOS as a
//! polynomial in the joint variables (u, z).  Since q is a quadratic form in
//! z, its Gram basis only needs monomials that are linear in z, which keeps
//! the certification problem small.
//!
//! [`validate_problem`] runs these checks on every piece of data a solver run
//! relies on: the numerator, the negated denominator, and the explicit
//! constraints must be s.o.s-convex, and the parametric constraint p(·, y)
//! must be s.o.s-convex in x for the relevant y.  For the parametric check we
//! first try the one-shot sufficient condition — zᵀ ∇²ₓ p(x, y) z SOS jointly
//! in (x, z, y) — and fall back to a pointwise grid over the index set when
//! the joint certificate does not exist.
//!
//! Certification is three-valued: a clean Gram matrix yields `Certified`, a
//! provably impossible representation (infeasible SDP, odd degree, or a
//! witnessed negative value) yields `Rejected`, and everything at the
//! tolerance boundary — including solver numerical trouble — is reported
//! `Inconclusive` rather than silently classified either way.

use nalgebra::DMatrix;

use crate::moments::IndexSet;
use crate::poly::{Block, Monomial, MonomialBasis, Polynomial};
use crate::relax::FsippProblem;
use crate::sdp::{self, ConicProgram, PsdBlock, Status};

/// Target accuracy for the Gram-matrix SDP solve.
const GRAM_SOLVE_TOL: f64 = 1e-9;

/// Accepted coefficient mismatch between the reconstruction and the target.
const RESIDUAL_TOL: f64 = 1e-7;

/// Accepted eigenvalue slack below zero for a "PSD" Gram matrix.
const PSD_TOL: f64 = 1e-8;

/// Hessian eigenvalues below this at a sampled point witness non-convexity.
const CONVEXITY_TOL: f64 = 1e-6;

/// Outcome of a certification attempt.
///
/// `Rejected` carries a proof-backed reason (odd degree, a witnessed negative
/// value, or an infeasible Gram SDP); `Inconclusive` covers tolerance-boundary
/// and numerical-trouble outcomes where neither a certificate nor a
/// refutation is in hand.
#[derive(Clone, Debug)]
pub enum Certification {
    Certified(SosCertificate),
    Rejected { reason: String },
    Inconclusive { reason: String },
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }

    pub fn is_rejected(&self) -> bool {
        matches!(self, Certification::Rejected { .. })
    }

    pub fn certificate(&self) -> Option<&SosCertificate> {
        match self {
            Certification::Certified(c) => Some(c),
            _ => None,
        }
    }

    /// Human-readable label for reports.
    pub fn label(&self) -> String {
        match self {
            Certification::Certified(_) => "certified".to_string(),
            Certification::Rejected { reason } => format!("rejected ({reason})"),
            Certification::Inconclusive { reason } => format!("inconclusive ({reason})"),
        }
    }
}

/// A Gram-matrix SOS certificate: target ≈ v(u)ᵀ · gram · v(u) where v
/// stacks `basis`.
///
/// Invariants: `gram` is symmetric with λ_min ≥ −1e-8, and `residual` — the
/// largest coefficient mismatch between [`Self::reconstruct`] and the
/// certified target — is at most 1e-7.
#[derive(Clone, Debug)]
pub struct SosCertificate {
    pub basis: MonomialBasis,
    pub gram: DMatrix<f64>,
    pub residual: f64,
}

impl SosCertificate {
    /// Expand v(u)ᵀ · gram · v(u) back into a polynomial.
    pub fn reconstruct(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.basis.dim());
        for (i, bi) in self.basis.iter().enumerate() {
            for (j, bj) in self.basis.iter().enumerate() {
                let g = self.gram[(i, j)];
                if g != 0.0 {
                    out.add_term(bi.mul(bj), g);
                }
            }
        }
        out
    }
}

fn residual_against(cert_basis: &MonomialBasis, gram: &DMatrix<f64>, target: &Polynomial) -> f64 {
    let cert = SosCertificate {
        basis: cert_basis.clone(),
        gram: gram.clone(),
        residual: 0.0,
    };
    cert.reconstruct().sub(target).max_abs_coeff()
}

fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()).scale(0.5);
    sym.symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Search for a PSD Gram matrix representing `target` over `basis`.
///
/// The SDP minimizes tr G subject to the coefficient-matching equalities and
/// G ⪰ 0.  Infeasibility is a proof that no representation over this basis
/// exists; numerical trouble is not.
fn gram_certify(target: &Polynomial, basis: &MonomialBasis) -> Certification {
    if target.is_zero() {
        return Certification::Certified(SosCertificate {
            basis: MonomialBasis::from_list(target.dim(), []),
            gram: DMatrix::zeros(0, 0),
            residual: 0.0,
        });
    }
    let size = basis.len();
    let nvars = size * (size + 1) / 2;
    // Upper-triangular packing of the Gram variables.
    let var_of = |i: usize, j: usize| -> usize {
        debug_assert!(i <= j);
        i * size - (i * i - i) / 2 + (j - i)
    };

    // One coefficient-matching row per distinct product monomial; symmetric
    // off-diagonal pairs contribute twice.
    let mut rows: std::collections::BTreeMap<Monomial, Vec<(usize, f64)>> = Default::default();
    for i in 0..size {
        for j in i..size {
            let prod = basis.list()[i].mul(&basis.list()[j]);
            let mult = if i == j { 1.0 } else { 2.0 };
            rows.entry(prod).or_default().push((var_of(i, j), mult));
        }
    }
    for (mono, _) in target.terms() {
        if !rows.contains_key(mono) {
            return Certification::Rejected {
                reason: format!(
                    "monomial {} lies outside every product of basis monomials",
                    Polynomial::from_terms(target.dim(), [(mono.exps().to_vec(), 1.0)])
                        .display_with("u")
                ),
            };
        }
    }

    let mut prog = ConicProgram::new(nvars);
    let mut block = PsdBlock::new(size);
    for i in 0..size {
        for j in i..size {
            block.add_var(var_of(i, j), i, j, 1.0);
        }
    }
    prog.add_psd_block(block);
    for (mono, terms) in &rows {
        prog.add_eq(terms.iter().copied(), target.coeff(mono));
    }
    let mut obj = vec![0.0; nvars];
    for i in 0..size {
        obj[var_of(i, i)] = 1.0;
    }
    prog.set_objective(obj);

    let sol = sdp::solve(&prog, GRAM_SOLVE_TOL);
    match sol.status {
        Status::Optimal => {
            let gram = DMatrix::from_fn(size, size, |i, j| sol.z[var_of(i.min(j), i.max(j))]);
            let residual = residual_against(basis, &gram, target);
            let lmin = min_eigenvalue(&gram);
            if residual <= RESIDUAL_TOL && lmin >= -PSD_TOL {
                Certification::Certified(SosCertificate {
                    basis: basis.clone(),
                    gram,
                    residual,
                })
            } else {
                Certification::Inconclusive {
                    reason: format!(
                        "Gram solve converged but residual {residual:.2e} / min eigenvalue \
                         {lmin:.2e} sit outside certification tolerances"
                    ),
                }
            }
        }
        Status::Infeasible => Certification::Rejected {
            reason: "no PSD Gram matrix exists over the full degree basis".to_string(),
        },
        _ => Certification::Inconclusive {
            reason: "Gram solve ran into numerical trouble".to_string(),
        },
    }
}

/// Deterministic sample points used to hunt for negativity witnesses before
/// paying for an SDP solve: origin, ±e_i, ±e_i/2, ±(1,…,1).
fn probe_points(dim: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; dim]];
    for i in 0..dim {
        for s in [1.0, -1.0, 0.5, -0.5] {
            let mut u = vec![0.0; dim];
            u[i] = s;
            pts.push(u);
        }
    }
    pts.push(vec![1.0; dim]);
    pts.push(vec![-1.0; dim]);
    pts
}

fn format_point(u: &[f64]) -> String {
    let coords: Vec<String> = u.iter().map(|v| format!("{v:.4}")).collect();
    format!("({})", coords.join(", "))
}

/// Certify that `h` is a sum of squares.
///
/// Odd degree and witnessed negative values are rejected outright; otherwise
/// a Gram matrix is sought over the monomials of degree ≤ deg(h)/2.
pub fn certify_sos(h: &Polynomial) -> Certification {
    if h.is_zero() {
        return Certification::Certified(SosCertificate {
            basis: MonomialBasis::from_list(h.dim(), []),
            gram: DMatrix::zeros(0, 0),
            residual: 0.0,
        });
    }
    let deg = h.degree();
    if deg % 2 == 1 {
        return Certification::Rejected {
            reason: format!("degree {deg} is odd"),
        };
    }
    // A negative value anywhere refutes SOS without touching the SDP.
    let scale = 1.0 + h.max_abs_coeff();
    for u in probe_points(h.dim()) {
        let val = h.evaluate(&u);
        if val < -1e-12 * scale {
            return Certification::Rejected {
                reason: format!("h{} = {val:.6} < 0", format_point(&u)),
            };
        }
    }
    let basis = MonomialBasis::new(h.dim(), deg / 2);
    gram_certify(h, &basis)
}

/// Lift a Hessian entry H_ij(u) (a polynomial in u alone) into the joint
/// (u, z) space and accumulate H_ij · z_i z_j onto `q`.
fn accumulate_hessian_form(
    q: &mut Polynomial,
    h_ij: &Polynomial,
    dim_u: usize,
    i: usize,
    j: usize,
) {
    for (mono, c) in h_ij.terms() {
        let mut exps = mono.exps().to_vec();
        exps.resize(2 * dim_u, 0);
        exps[dim_u + i] += 1;
        exps[dim_u + j] += 1;
        q.add_term(Monomial::new(exps), c);
    }
}

/// Certify that `h` is s.o.s-convex: zᵀ ∇²h(u) z is SOS in (u, z).
///
/// Degree ≤ 1 is trivially convex.  Quadratics reduce to a constant-Hessian
/// eigenvalue check.  Higher degrees first probe the Hessian for negative
/// eigenvalues at sample points (a witness refutes convexity, hence
/// s.o.s-convexity) and then run the joint Gram certification with a basis
/// restricted to monomials linear in z.
pub fn certify_sos_convex(h: &Polynomial) -> Certification {
    let dim = h.dim();
    let deg = h.degree();
    if deg <= 1 {
        return Certification::Certified(SosCertificate {
            basis: MonomialBasis::from_list(2 * dim, []),
            gram: DMatrix::zeros(0, 0),
            residual: 0.0,
        });
    }

    let hess = h.hessian();
    if deg == 2 {
        // Constant Hessian: convexity is a single eigendecomposition.
        let hmat = DMatrix::from_fn(dim, dim, |i, j| hess[i][j].coeff(&Monomial::one(dim)));
        let sym = (&hmat + hmat.transpose()).scale(0.5);
        let eig = sym.clone().symmetric_eigen();
        let lmin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let scale = 1.0 + sym.amax();
        if lmin < -CONVEXITY_TOL * scale {
            return Certification::Rejected {
                reason: format!("Hessian eigenvalue {lmin:.6} < 0"),
            };
        }
        if lmin < -PSD_TOL * scale {
            return Certification::Inconclusive {
                reason: format!(
                    "Hessian eigenvalue {lmin:.2e} sits between the rejection and \
                     certification tolerances"
                ),
            };
        }
        // Clip the spectrum at zero so the certificate itself is PSD.
        let mut vals = eig.eigenvalues.clone();
        for v in vals.iter_mut() {
            *v = v.max(0.0);
        }
        let gram = &eig.eigenvectors * DMatrix::from_diagonal(&vals) * eig.eigenvectors.transpose();
        let basis = MonomialBasis::from_list(2 * dim, (0..dim).map(|i| Monomial::var(2 * dim, dim + i)));
        let mut target = Polynomial::zero(2 * dim);
        for i in 0..dim {
            for j in 0..dim {
                accumulate_hessian_form(&mut target, &hess[i][j], dim, i, j);
            }
        }
        let residual = residual_against(&basis, &gram, &target);
        return Certification::Certified(SosCertificate {
            basis,
            gram,
            residual,
        });
    }

    // Witness hunt: a negative Hessian eigenvalue at any point refutes
    // convexity, and s.o.s-convexity with it.
    for u in probe_points(dim) {
        let hmat = DMatrix::from_fn(dim, dim, |i, j| hess[i][j].evaluate(&u));
        let sym = (&hmat + hmat.transpose()).scale(0.5);
        let lmin = min_eigenvalue(&sym);
        let scale = 1.0 + sym.amax();
        if lmin < -CONVEXITY_TOL * scale {
            return Certification::Rejected {
                reason: format!(
                    "Hessian at {} has eigenvalue {lmin:.6} < 0",
                    format_point(&u)
                ),
            };
        }
    }

    // Joint certification of q(u, z) = zᵀ ∇²h(u) z with z-linear basis
    // monomials x^α z_i, |α| ≤ ⌈(deg − 2)/2⌉.
    let mut q = Polynomial::zero(2 * dim);
    for i in 0..dim {
        for j in 0..dim {
            accumulate_hessian_form(&mut q, &hess[i][j], dim, i, j);
        }
    }
    let half = (deg - 2).div_ceil(2);
    let mut monos = Vec::new();
    for alpha in MonomialBasis::new(dim, half).iter() {
        for i in 0..dim {
            let mut exps = alpha.exps().to_vec();
            exps.resize(2 * dim, 0);
            exps[dim + i] = 1;
            monos.push(Monomial::new(exps));
        }
    }
    gram_certify(&q, &MonomialBasis::from_list(2 * dim, monos))
}

/// Outcome of the pointwise fallback check of x ↦ p(x, y) over a grid on the
/// index set.
#[derive(Clone, Debug)]
pub struct PointwiseReport {
    /// Number of index points checked.
    pub points: usize,
    /// Points whose slice was rejected.
    pub failures: usize,
    /// Points whose slice came back inconclusive.
    pub inconclusive: usize,
    /// First non-certified point and its reason, if any.
    pub witness: Option<(Vec<f64>, String)>,
}

impl PointwiseReport {
    pub fn passed(&self) -> bool {
        self.failures == 0 && self.inconclusive == 0
    }
}

/// Certification status of every data item of a problem instance.
#[derive(Clone, Debug)]
pub struct ValidationReport {
    /// Numerator of the objective.
    pub f: Certification,
    /// Negated denominator (−g must be s.o.s-convex; constants pass trivially).
    pub g: Certification,
    /// Explicit constraints φ_j.
    pub phi: Vec<Certification>,
    /// One-shot joint certificate for zᵀ ∇²ₓ p(x, y) z in (x, z, y).
    pub p_joint: Certification,
    /// Grid fallback, populated only when the joint certificate is missing.
    pub p_pointwise: Option<PointwiseReport>,
}

impl ValidationReport {
    /// True when every item certifies, accepting the pointwise fallback for
    /// the parametric constraint.
    pub fn passed(&self) -> bool {
        let p_ok = self.p_joint.is_certified()
            || self.p_pointwise.as_ref().is_some_and(PointwiseReport::passed);
        self.f.is_certified()
            && self.g.is_certified()
            && self.phi.iter().all(Certification::is_certified)
            && p_ok
    }

    /// True when the parametric constraint only passed the grid fallback.
    pub fn pointwise_only(&self) -> bool {
        !self.p_joint.is_certified()
            && self.p_pointwise.as_ref().is_some_and(PointwiseReport::passed)
    }

    /// One line per item, suitable for terminal output.
    pub fn summary(&self) -> String {
        let mut lines = vec![format!("f: {}", self.f.label())];
        lines.push(format!("-g: {}", self.g.label()));
        for (j, c) in self.phi.iter().enumerate() {
            lines.push(format!("phi_{}: {}", j + 1, c.label()));
        }
        match (&self.p_joint, &self.p_pointwise) {
            (c @ Certification::Certified(_), _) => {
                lines.push(format!("p(., y): jointly {}", c.label()));
            }
            (c, Some(pw)) if pw.passed() => {
                lines.push(format!(
                    "p(., y): joint check {}; pointwise certified at all {} grid points",
                    c.label(),
                    pw.points
                ));
            }
            (c, Some(pw)) => {
                let (y, reason) = pw
                    .witness
                    .clone()
                    .unwrap_or_else(|| (vec![], "unknown".to_string()));
                lines.push(format!(
                    "p(., y): joint check {}; pointwise check failed at {} of {} grid points \
                     (first: y = {} — {})",
                    c.label(),
                    pw.failures + pw.inconclusive,
                    pw.points,
                    format_point(&y),
                    reason
                ));
            }
            (c, None) => lines.push(format!("p(., y): {}", c.label())),
        }
        lines.join("\n")
    }
}

/// Grid resolution per axis, chosen so the total point count stays tame as
/// the index dimension grows.
fn grid_per_axis(n: usize) -> usize {
    match n {
        0 | 1 => 33,
        2 => 13,
        3 => 7,
        4 => 5,
        _ => 3,
    }
}

/// Sample points covering the index set: a box grid filtered/projected onto
/// the set, plus set-specific anchor points (vertices, centroid, poles).
fn index_grid(set: &IndexSet) -> Vec<Vec<f64>> {
    let n = set.n();
    let per_axis = grid_per_axis(n);
    let coords: Vec<f64> = (0..per_axis)
        .map(|i| -1.0 + 2.0 * i as f64 / (per_axis - 1) as f64)
        .collect();
    let mut pts: Vec<Vec<f64>> = Vec::new();
    let mut push = |y: Vec<f64>| {
        if set.contains(&y) && !pts.iter().any(|q| q == &y) {
            pts.push(y);
        }
    };
    let mut idx = vec![0usize; n];
    loop {
        let y: Vec<f64> = idx.iter().map(|&i| coords[i]).collect();
        match set {
            IndexSet::Sphere { .. } => {
                let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm > 1e-9 {
                    push(y.iter().map(|v| v / norm).collect());
                }
            }
            _ => push(y),
        }
        // Odometer increment over the n-fold grid.
        let mut k = 0;
        loop {
            if k == n {
                break;
            }
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n {
            break;
        }
    }
    match set {
        IndexSet::Sphere { .. } => {
            for i in 0..n {
                for s in [1.0, -1.0] {
                    let mut y = vec![0.0; n];
                    y[i] = s;
                    push(y);
                }
            }
        }
        IndexSet::SimplexUnion { simplices, .. } => {
            for s in simplices {
                let verts = s.vertices();
                let mut centroid = vec![0.0; n];
                for v in verts {
                    push(v.clone());
                    for (c, vi) in centroid.iter_mut().zip(v) {
                        *c += vi / verts.len() as f64;
                    }
                }
                push(centroid);
            }
        }
        _ => {}
    }
    pts
}

/// Certify every data item of `prob`.
///
/// The objective pieces and explicit constraints must be s.o.s-convex.  The
/// parametric constraint is checked jointly first; when that fails, each
/// slice p(·, y) over a grid on the index set is certified separately and the
/// result is reported as pointwise-only.
pub fn validate_problem(prob: &FsippProblem) -> ValidationReport {
    let f = certify_sos_convex(prob.f());
    let g = certify_sos_convex(&prob.g().scale(-1.0));
    let phi: Vec<Certification> = prob.phi().iter().map(certify_sos_convex).collect();

    let m = prob.m();
    let n = prob.n();
    // Joint form q(x, z, y) = zᵀ ∇²ₓ p(x, y) z over variables
    // (x_1..x_m, z_1..z_m, y_1..y_n).
    let hess = prob.p().hessian_x();
    let mut q = Polynomial::zero(2 * m + n);
    for i in 0..m {
        for j in 0..m {
            for (xm, ym, c) in hess[i][j].terms() {
                let mut exps = xm.exps().to_vec();
                exps.resize(2 * m, 0);
                exps[m + i] += 1;
                exps[m + j] += 1;
                exps.extend_from_slice(ym.exps());
                q.add_term(Monomial::new(exps), c);
            }
        }
    }
    let p_joint = if q.is_zero() {
        Certification::Certified(SosCertificate {
            basis: MonomialBasis::from_list(2 * m + n, []),
            gram: DMatrix::zeros(0, 0),
            residual: 0.0,
        })
    } else {
        let half_x = prob.p().deg_x().saturating_sub(2).div_ceil(2);
        let half_y = prob.p().deg_y().div_ceil(2);
        let mut monos = Vec::new();
        for alpha in MonomialBasis::new(m, half_x).iter() {
            for delta in MonomialBasis::new(n, half_y).iter() {
                for i in 0..m {
                    let mut exps = alpha.exps().to_vec();
                    exps.resize(2 * m, 0);
                    exps[m + i] = 1;
                    exps.extend_from_slice(delta.exps());
                    monos.push(Monomial::new(exps));
                }
            }
        }
        gram_certify(&q, &MonomialBasis::from_list(2 * m + n, monos))
    };

    let p_pointwise = if p_joint.is_certified() {
        None
    } else {
        let grid = index_grid(prob.index_set());
        let mut failures = 0usize;
        let mut inconclusive = 0usize;
        let mut witness = None;
        for y in &grid {
            let slice = prob.p().apply_point(Block::Y, y);
            match certify_sos_convex(&slice) {
                Certification::Certified(_) => {}
                Certification::Rejected { reason } => {
                    failures += 1;
                    if witness.is_none() {
                        witness = Some((y.clone(), reason));
                    }
                }
                Certification::Inconclusive { reason } => {
                    inconclusive += 1;
                    if witness.is_none() {
                        witness = Some((y.clone(), reason));
                    }
                }
            }
        }
        Some(PointwiseReport {
            points: grid.len(),
            failures,
            inconclusive,
            witness,
        })
    };

    ValidationReport {
        f,
        g,
        phi,
        p_joint,
        p_pointwise,
    }
}
