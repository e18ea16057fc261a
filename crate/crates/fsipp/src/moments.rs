//! Exact monomial moments ∫_Y y^β dy of the supported index sets, and the
//! moment / localization matrices built from them.
//!
//! The outer cone P^k(Y) of polynomials "nonnegative against all SOS
//! densities of degree ≤ 2k" is checked through a single matrix: ψ ∈ P^k(Y)
//! iff A_k(ψ) = ∫_Y ψ v_k v_kᵀ dy ⪰ 0, where v_k is the monomial basis
//! vector of degree ≤ k. Every entry of A_k is a linear combination of raw
//! monomial moments of Y, so an exact moment oracle is all the integration
//! machinery the relaxation needs.
//!
//! Supported sets (all inside [−1, 1]^n):
//!
//! * the cube [−1, 1]^n — ∫ y^β = ∏ 2/(β_j + 1) for even β, else 0;
//! * the unit sphere (surface measure) — a ratio of gamma functions at
//!   half-integers, evaluated in log space to dodge overflow;
//! * the unit ball — sphere moment divided by (|β| + n);
//! * finite unions of simplices — affine pullback to the standard simplex,
//!   where ∫ u^a du = (∏ a_i!) / (n + |a|)!.
//!
//! Moments are memoized per set in a [`MomentTable`]; matrix assembly reuses
//! each raw moment many times.

use std::collections::HashMap;
use std::sync::Mutex;

use nalgebra::DMatrix;
use statrs::function::gamma::ln_gamma;
use thiserror::Error;

use crate::poly::{Monomial, MonomialBasis, Polynomial};

#[derive(Error, Debug, Clone, PartialEq)]
pub enum SetError {
    #[error("simplex needs exactly n+1 vertices of dimension n, got {got} vertices in R^{n}")]
    VertexCount { n: usize, got: usize },
    #[error("vertex coordinate {coord} outside [-1, 1]")]
    OutsideUnitCube { coord: f64 },
    #[error("simplex vertices are affinely dependent (volume {vol:.3e})")]
    Degenerate { vol: f64 },
    #[error("fan triangulation of a non-simplex polytope is only supported in the plane (n = 2)")]
    FanDimension,
    #[error("polytope needs at least n+1 = {want} vertices, got {got}")]
    TooFewVertices { want: usize, got: usize },
}

/// A single simplex: n+1 affinely independent vertices in R^n.
#[derive(Clone, PartialEq, Debug)]
pub struct Simplex {
    vertices: Vec<Vec<f64>>,
}

impl Simplex {
    pub fn new(vertices: Vec<Vec<f64>>) -> Result<Self, SetError> {
        let n = vertices.first().map_or(0, Vec::len);
        if vertices.len() != n + 1 || vertices.iter().any(|v| v.len() != n) {
            return Err(SetError::VertexCount {
                n,
                got: vertices.len(),
            });
        }
        for v in &vertices {
            for &c in v {
                if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&c) {
                    return Err(SetError::OutsideUnitCube { coord: c });
                }
            }
        }
        let s = Simplex { vertices };
        let vol = s.volume();
        if vol <= 1e-12 {
            return Err(SetError::Degenerate { vol });
        }
        Ok(s)
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    fn n(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Edge matrix A = [v1−v0 | … | vn−v0], the linear part of the map from
    /// the standard simplex.
    fn edge_matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        DMatrix::from_fn(n, n, |i, j| self.vertices[j + 1][i] - self.vertices[0][i])
    }

    pub fn volume(&self) -> f64 {
        let n = self.n();
        let det = self.edge_matrix().determinant().abs();
        det / factorial(n as u32)
    }

    /// Exact ∫_simplex y^β dy via pullback y = v0 + A u onto the standard
    /// simplex {u ≥ 0, Σu ≤ 1}. The expanded pullback suffers heavy
    /// cancellation at high degree, so terms are accumulated in
    /// double-double precision with exactly-represented rational integrals;
    /// for integer-coordinate vertices the result is then correct to a few
    /// ulp even at degree ≳ 20.
    fn moment(&self, beta: &Monomial) -> f64 {
        let n = self.n();
        let a = self.edge_matrix();
        let amap: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| a[(i, j)]).collect()).collect();
        let jac = a.determinant().abs();
        let mono = Polynomial::from_terms(n, [(beta.exps().to_vec(), 1.0)]);
        let pulled = mono.substitute_affine(&amap, &self.vertices[0]);
        let (mut hi, mut lo) = (0.0, 0.0);
        for (m, c) in pulled.terms() {
            let (r_hi, r_lo) = std_simplex_monomial_integral_dd(m.exps());
            // c·r and the accumulation, both with error compensation
            let p = c * r_hi;
            let p_err = c.mul_add(r_hi, -p) + c * r_lo;
            let (s, e) = two_sum(hi, p);
            hi = s;
            lo += e + p_err;
        }
        jac * (hi + lo)
    }

    /// Barycentric membership test with a small slack.
    fn contains(&self, y: &[f64], tol: f64) -> bool {
        // Solve v0 + A u = y; inside iff u ≥ 0 and Σu ≤ 1.
        let n = self.n();
        let rhs = DMatrix::from_fn(n, 1, |i, _| y[i] - self.vertices[0][i]);
        match self.edge_matrix().lu().solve(&rhs) {
            Some(u) => {
                let sum: f64 = u.iter().sum();
                u.iter().all(|&ui| ui >= -tol) && sum <= 1.0 + tol
            }
            None => false,
        }
    }
}

/// ∫_{standard simplex} u^a du = (∏ a_i!) / (n + |a|)! as an unevaluated
/// double-double. The value is 1/D with the integer
/// D = multinomial(|a|; a) · ∏_{l=1..n}(|a| + l); while D fits in u128 the
/// reciprocal is split exactly into hi + lo parts, beyond that log-gamma.
fn std_simplex_monomial_integral_dd(a: &[u32]) -> (f64, f64) {
    let n = a.len() as u32;
    let total: u32 = a.iter().sum();
    let mut d: u128 = 1;
    let mut overflow = false;
    let mut s = 0u32;
    for &ai in a {
        s += ai;
        match d.checked_mul(binomial_u128(s, ai)) {
            Some(v) => d = v,
            None => {
                overflow = true;
                break;
            }
        }
    }
    if !overflow {
        for l in 1..=n {
            match d.checked_mul((total + l) as u128) {
                Some(v) => d = v,
                None => {
                    overflow = true;
                    break;
                }
            }
        }
    }
    if overflow {
        let log_num: f64 = a.iter().map(|&ai| ln_gamma(ai as f64 + 1.0)).sum();
        let log_den = ln_gamma((n + total) as f64 + 1.0);
        return ((log_num - log_den).exp(), 0.0);
    }
    let d_f = d as f64;
    let hi = 1.0 / d_f;
    // exact division remainder against the rounded d, then a first-order
    // correction for the rounding of d itself when it exceeds 2^53
    let mut lo = (-hi).mul_add(d_f, 1.0) / d_f;
    let delta = if d_f as u128 >= d {
        -((d_f as u128 - d) as f64)
    } else {
        (d - d_f as u128) as f64
    };
    if delta != 0.0 {
        lo -= delta * hi * hi;
    }
    (hi, lo)
}

fn binomial_u128(n: u32, k: u32) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc * (n as u128 - i) / (i + 1);
    }
    acc
}

/// Knuth's exact two-sum: returns (fl(a+b), rounding error).
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let e = (a - (s - bp)) + (b - bp);
    (s, e)
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// The index set Y of the semi-infinite constraint. Always a compact subset
/// of [−1, 1]^n with an exact monomial-moment oracle.
#[derive(Clone, PartialEq, Debug)]
pub enum IndexSet {
    /// The cube [−1, 1]^n with Lebesgue measure.
    Box { n: usize },
    /// The unit sphere {‖y‖ = 1} ⊂ R^n with surface measure.
    Sphere { n: usize },
    /// The unit ball {‖y‖ ≤ 1} ⊂ R^n with Lebesgue measure.
    Ball { n: usize },
    /// A finite union of simplices with pairwise disjoint interiors
    /// (disjointness is the caller's obligation; it is not verified).
    SimplexUnion { n: usize, simplices: Vec<Simplex> },
}

impl IndexSet {
    /// Union of explicitly given simplices, each a list of n+1 vertices.
    pub fn simplex_union(simplices: Vec<Vec<Vec<f64>>>) -> Result<Self, SetError> {
        let built: Result<Vec<Simplex>, SetError> = simplices.into_iter().map(Simplex::new).collect();
        let built = built?;
        let n = built.first().map_or(0, Simplex::n);
        Ok(IndexSet::SimplexUnion { n, simplices: built })
    }

    /// Triangulate a convex polytope given by its vertices, fanning from the
    /// first vertex. A simplex (n+1 vertices) passes through unchanged in
    /// any dimension; a polygon with vertices listed in boundary order is
    /// fanned into triangles; anything bigger in n ≥ 3 needs an explicit
    /// simplex list instead.
    pub fn polytope_fan(vertices: Vec<Vec<f64>>) -> Result<Self, SetError> {
        let n = vertices.first().map_or(0, Vec::len);
        if vertices.len() < n + 1 {
            return Err(SetError::TooFewVertices {
                want: n + 1,
                got: vertices.len(),
            });
        }
        if vertices.len() == n + 1 {
            return IndexSet::simplex_union(vec![vertices]);
        }
        if n != 2 {
            return Err(SetError::FanDimension);
        }
        let fan: Vec<Vec<Vec<f64>>> = (1..vertices.len() - 1)
            .map(|i| {
                vec![
                    vertices[0].clone(),
                    vertices[i].clone(),
                    vertices[i + 1].clone(),
                ]
            })
            .collect();
        IndexSet::simplex_union(fan)
    }

    pub fn n(&self) -> usize {
        match self {
            IndexSet::Box { n } | IndexSet::Sphere { n } | IndexSet::Ball { n } => *n,
            IndexSet::SimplexUnion { n, .. } => *n,
        }
    }

    /// Exact membership test (used to filter discretization grids).
    pub fn contains(&self, y: &[f64]) -> bool {
        assert_eq!(y.len(), self.n(), "point dimension mismatch");
        let nrm2: f64 = y.iter().map(|v| v * v).sum();
        match self {
            IndexSet::Box { .. } => y.iter().all(|v| v.abs() <= 1.0 + 1e-12),
            IndexSet::Sphere { .. } => (nrm2 - 1.0).abs() <= 1e-12,
            IndexSet::Ball { .. } => nrm2 <= 1.0 + 1e-12,
            IndexSet::SimplexUnion { simplices, .. } => {
                simplices.iter().any(|s| s.contains(y, 1e-12))
            }
        }
    }

    /// Total measure of Y: volume, or surface measure for the sphere.
    pub fn measure(&self) -> f64 {
        self.raw_moment(&Monomial::one(self.n()))
    }

    /// ∫_Y y^β dy without caching; prefer [`MomentTable::moment`] in loops.
    pub fn raw_moment(&self, beta: &Monomial) -> f64 {
        assert_eq!(beta.dim(), self.n(), "moment index dimension mismatch");
        match self {
            IndexSet::Box { .. } => {
                if beta.exps().iter().any(|e| e % 2 == 1) {
                    0.0
                } else {
                    beta.exps().iter().map(|&e| 2.0 / (e as f64 + 1.0)).product()
                }
            }
            IndexSet::Sphere { .. } => sphere_moment(beta),
            IndexSet::Ball { n } => {
                // ∫_ball y^β = ∫_sphere y^β / (|β| + n), by integrating radially.
                sphere_moment(beta) / (beta.degree() as f64 + *n as f64)
            }
            IndexSet::SimplexUnion { simplices, .. } => {
                simplices.iter().map(|s| s.moment(beta)).sum()
            }
        }
    }
}

/// Surface-measure moment of the unit sphere in R^n:
/// 2 ∏ Γ(β̂_j) / Γ(Σ β̂_j) with β̂_j = (β_j + 1)/2, zero when any β_j is odd.
fn sphere_moment(beta: &Monomial) -> f64 {
    if beta.exps().iter().any(|e| e % 2 == 1) {
        return 0.0;
    }
    let hats: Vec<f64> = beta.exps().iter().map(|&e| (e as f64 + 1.0) / 2.0).collect();
    let log_num: f64 = hats.iter().map(|&h| ln_gamma(h)).sum();
    let log_den = ln_gamma(hats.iter().sum());
    2.0 * (log_num - log_den).exp()
}

/// Memoized moments of one index set, grown on demand. Queries are
/// read-mostly; growth is synchronized behind a mutex so tables can be
/// shared across threads.
#[derive(Debug)]
pub struct MomentTable {
    set: IndexSet,
    values: Mutex<HashMap<Vec<u32>, f64>>,
    maxdeg: Mutex<u32>,
}

impl MomentTable {
    pub fn new(set: IndexSet) -> Self {
        MomentTable {
            set,
            values: Mutex::new(HashMap::new()),
            maxdeg: Mutex::new(0),
        }
    }

    pub fn set(&self) -> &IndexSet {
        &self.set
    }

    /// Highest degree the table has been asked for so far.
    pub fn maxdeg(&self) -> u32 {
        *self.maxdeg.lock().unwrap()
    }

    pub fn moment(&self, beta: &Monomial) -> f64 {
        {
            let cache = self.values.lock().unwrap();
            if let Some(&v) = cache.get(beta.exps()) {
                return v;
            }
        }
        let v = self.set.raw_moment(beta);
        let mut cache = self.values.lock().unwrap();
        cache.insert(beta.exps().to_vec(), v);
        let mut maxdeg = self.maxdeg.lock().unwrap();
        *maxdeg = (*maxdeg).max(beta.degree());
        v
    }

    /// B_k = ∫_Y v_k v_kᵀ dy, the ψ = 1 moment matrix. Symmetric PSD; strictly
    /// positive definite unless Y carries a polynomial identity (the sphere
    /// satisfies ‖y‖² = 1, so its B_k is singular from k = 2 on).
    pub fn moment_matrix(&self, k: u32) -> DMatrix<f64> {
        self.localized_matrix(&Polynomial::constant(self.set.n(), 1.0), k)
    }

    /// A_k(ψ) = ∫_Y ψ v_k v_kᵀ dy; linear in the coefficients of ψ, and
    /// ψ ∈ P^k(Y) iff A_k(ψ) ⪰ 0.
    pub fn localized_matrix(&self, psi: &Polynomial, k: u32) -> DMatrix<f64> {
        self.localized_gram(psi, &MonomialBasis::new(self.set.n(), k))
    }

    /// ∫_Y v vᵀ dy over an arbitrary monomial list (B_k for custom bases).
    pub fn gram_matrix(&self, basis: &MonomialBasis) -> DMatrix<f64> {
        self.localized_gram(&Polynomial::constant(self.set.n(), 1.0), basis)
    }

    /// ∫_Y ψ v vᵀ dy over an arbitrary monomial list.
    pub fn localized_gram(&self, psi: &Polynomial, basis: &MonomialBasis) -> DMatrix<f64> {
        assert_eq!(psi.dim(), self.set.n(), "density dimension mismatch");
        assert_eq!(basis.dim(), self.set.n(), "basis dimension mismatch");
        let size = basis.len();
        let mut out = DMatrix::zeros(size, size);
        for i in 0..size {
            for j in i..size {
                let pair = basis.list()[i].mul(&basis.list()[j]);
                let mut entry = 0.0;
                for (delta, c) in psi.terms() {
                    entry += c * self.moment(&pair.mul(delta));
                }
                out[(i, j)] = entry;
                out[(j, i)] = entry;
            }
        }
        out
    }
}

/// Monomials of degree ≤ k that are linearly independent as functions ON the
/// set. For full-dimensional sets this is all of N^n_k; on the sphere the
/// identity ‖y‖² = 1 lets y_n² be rewritten into lower terms, so a basis of
/// the degree-≤k functions keeps only exponents with y_n-power ≤ 1. Their
/// Gram matrix (`gram_matrix`) is then positive definite, which the plain
/// sphere moment matrix is not from k = 2 on.
pub fn support_basis(set: &IndexSet, k: u32) -> MonomialBasis {
    let n = set.n();
    match set {
        IndexSet::Sphere { .. } => MonomialBasis::from_list(
            n,
            MonomialBasis::new(n, k)
                .iter()
                .filter(|m| m.exps()[n - 1] <= 1)
                .cloned(),
        ),
        _ => MonomialBasis::new(n, k),
    }
}

/// One-shot moment without building a table.
pub fn moment(set: &IndexSet, beta: &Monomial) -> f64 {
    set.raw_moment(beta)
}

/// One-shot B_k (builds a throwaway table; see [`MomentTable`] for reuse).
pub fn moment_matrix(set: &IndexSet, k: u32) -> DMatrix<f64> {
    MomentTable::new(set.clone()).moment_matrix(k)
}

/// One-shot A_k(ψ).
pub fn localized_matrix(set: &IndexSet, psi: &Polynomial, k: u32) -> DMatrix<f64> {
    MomentTable::new(set.clone()).localized_matrix(psi, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mono(exps: &[u32]) -> Monomial {
        Monomial::new(exps.to_vec())
    }

    #[test]
    fn box_moments() {
        let b2 = IndexSet::Box { n: 2 };
        assert_eq!(moment(&b2, &mono(&[0, 0])), 4.0);
        assert_eq!(moment(&b2, &mono(&[2, 2])), 4.0 / 9.0);
        assert_eq!(moment(&b2, &mono(&[1, 2])), 0.0);
        assert_eq!(moment(&b2, &mono(&[6, 0])), 2.0 / 7.0 * 2.0);
    }

    #[test]
    fn sphere_moments() {
        let s2 = IndexSet::Sphere { n: 2 };
        assert!((moment(&s2, &mono(&[0, 0])) - 2.0 * PI).abs() < 1e-12);
        assert!((moment(&s2, &mono(&[2, 0])) - PI).abs() < 1e-12);
        assert_eq!(moment(&s2, &mono(&[1, 0])), 0.0);
        // ∫_{S¹} y1²y2² = π/4 (cos²sin² integrates to π/4)
        assert!((moment(&s2, &mono(&[2, 2])) - PI / 4.0).abs() < 1e-12);
        // n = 3: total area 4π
        let s3 = IndexSet::Sphere { n: 3 };
        assert!((moment(&s3, &mono(&[0, 0, 0])) - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn ball_moments() {
        let b2 = IndexSet::Ball { n: 2 };
        assert!((moment(&b2, &mono(&[0, 0])) - PI).abs() < 1e-12);
        assert!((moment(&b2, &mono(&[2, 0])) - PI / 4.0).abs() < 1e-12);
        let b3 = IndexSet::Ball { n: 3 };
        assert!((moment(&b3, &mono(&[0, 0, 0])) - 4.0 * PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn standard_simplex_moments() {
        let std2 = IndexSet::simplex_union(vec![vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
        ]])
        .unwrap();
        assert!((moment(&std2, &mono(&[0, 0])) - 0.5).abs() < 1e-14);
        assert!((moment(&std2, &mono(&[1, 1])) - 1.0 / 24.0).abs() < 1e-15);
        assert!((moment(&std2, &mono(&[1, 0])) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn triangulated_square_matches_box_formula() {
        // [−1,1]² split along a diagonal; moments must agree with the closed
        // form to near machine precision.
        let tri = IndexSet::polytope_fan(vec![
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap();
        let cube = IndexSet::Box { n: 2 };
        let basis = MonomialBasis::new(2, 12);
        for m in basis.iter() {
            let a = moment(&tri, m);
            let b = moment(&cube, m);
            let denom = b.abs().max(1e-30);
            if b == 0.0 {
                assert!(a.abs() < 1e-12, "odd moment {:?} = {a}", m.exps());
            } else {
                assert!((a - b).abs() / denom < 1e-12, "{:?}: {a} vs {b}", m.exps());
            }
        }
    }

    #[test]
    fn kuhn_triangulated_cube_matches_box_formula_3d() {
        // [−1,1]³ as six tetrahedra 0 ≤ u_{π(3)} ≤ u_{π(2)} ≤ u_{π(1)} ≤ 1
        // mapped through y = 2u − 1.
        let perms = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut simplices = Vec::new();
        for perm in perms {
            let mut v = vec![0.0; 3];
            let mut verts = vec![v.clone()];
            for &axis in &perm {
                v[axis] = 1.0;
                verts.push(v.clone());
            }
            let scaled: Vec<Vec<f64>> = verts
                .into_iter()
                .map(|u| u.into_iter().map(|c| 2.0 * c - 1.0).collect())
                .collect();
            simplices.push(scaled);
        }
        let tri = IndexSet::simplex_union(simplices).unwrap();
        let cube = IndexSet::Box { n: 3 };
        let basis = MonomialBasis::new(3, 8);
        for m in basis.iter() {
            let a = moment(&tri, m);
            let b = moment(&cube, m);
            if b == 0.0 {
                assert!(a.abs() < 1e-12, "odd moment {:?} = {a}", m.exps());
            } else {
                assert!((a - b).abs() / b.abs() < 1e-12, "{:?}: {a} vs {b}", m.exps());
            }
        }
    }

    #[test]
    fn moment_matrices_match_hand_values() {
        let b1 = IndexSet::Box { n: 1 };
        let m = moment_matrix(&b1, 1);
        assert_eq!(m.nrows(), 2);
        assert!((m[(0, 0)] - 2.0).abs() < 1e-15);
        assert!(m[(0, 1)].abs() < 1e-15);
        assert!((m[(1, 1)] - 2.0 / 3.0).abs() < 1e-15);

        let ball = IndexSet::Ball { n: 2 };
        let m = moment_matrix(&ball, 1);
        for i in 0..3 {
            for j in 0..3 {
                let want = match (i, j) {
                    (0, 0) => PI,
                    (1, 1) | (2, 2) => PI / 4.0,
                    _ => 0.0,
                };
                assert!((m[(i, j)] - want).abs() < 1e-12);
            }
        }

        // measure(Y) in the 1×1 case
        for set in [
            IndexSet::Box { n: 2 },
            IndexSet::Sphere { n: 2 },
            IndexSet::Ball { n: 3 },
        ] {
            let m0 = moment_matrix(&set, 0);
            assert!((m0[(0, 0)] - set.measure()).abs() < 1e-12);
        }
    }

    #[test]
    fn localized_matrix_hand_values_and_linearity() {
        let b1 = IndexSet::Box { n: 1 };
        let t = Polynomial::variable(1, 0);
        let a = localized_matrix(&b1, &t, 1);
        assert!(a[(0, 0)].abs() < 1e-15);
        assert!((a[(0, 1)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((a[(1, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!(a[(1, 1)].abs() < 1e-15);

        // ψ = 1 reduces to the plain moment matrix
        let one = Polynomial::constant(1, 1.0);
        assert_eq!(localized_matrix(&b1, &one, 3), moment_matrix(&b1, 3));

        // linearity in ψ
        let psi1 = Polynomial::from_terms(1, [(vec![2], 1.0)]);
        let psi2 = Polynomial::from_terms(1, [(vec![0], 0.5), (vec![1], -1.0)]);
        let sum = psi1.add(&psi2);
        let lhs = localized_matrix(&b1, &sum, 2);
        let rhs = localized_matrix(&b1, &psi1, 2) + localized_matrix(&b1, &psi2, 2);
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn nonnegative_density_gives_psd_localization() {
        // ψ = y1² ≥ 0 on the cube: A_k(ψ) must be PSD for every k.
        let b2 = IndexSet::Box { n: 2 };
        let psi = Polynomial::from_terms(2, [(vec![2, 0], 1.0)]);
        for k in 0..4 {
            let a = localized_matrix(&b2, &psi, k);
            let eig = a.symmetric_eigenvalues();
            assert!(eig.iter().all(|&l| l > -1e-10), "k={k} eigs {eig:?}");
        }
    }

    #[test]
    fn moment_matrix_positive_definite_except_sphere_identity() {
        // PD for box/ball/simplices up to k = 8 (scaled by the measure);
        // the sphere is PD only until ‖y‖²−1 enters the basis span.
        let sets = [
            IndexSet::Box { n: 1 },
            IndexSet::Box { n: 2 },
            IndexSet::Ball { n: 2 },
            IndexSet::polytope_fan(vec![
                vec![-1.0, -1.0],
                vec![1.0, 1.0],
                vec![-1.0, 1.0],
            ])
            .unwrap(),
        ];
        for set in &sets {
            for k in 0..=8u32 {
                if set.n() >= 2 && k > 5 {
                    continue; // basis grows fast; PD already exercised below order 6
                }
                let m = moment_matrix(set, k);
                let min = m.symmetric_eigenvalues().min();
                assert!(min > 1e-12, "{set:?} k={k} min eig {min}");
            }
        }
        let sphere = IndexSet::Sphere { n: 2 };
        assert!(moment_matrix(&sphere, 1).symmetric_eigenvalues().min() > 1e-9);
        // ‖y‖² − 1 vanishes identically on the sphere: exact kernel at k = 2
        let m2 = moment_matrix(&sphere, 2);
        let min2 = m2.symmetric_eigenvalues().min();
        assert!(min2.abs() < 1e-10, "sphere k=2 should be singular, min {min2}");
    }

    #[test]
    fn cone_nesting_on_random_densities() {
        // If A_{k2}(ψ) ⪰ 0 then A_{k1}(ψ) ⪰ 0 for k1 < k2; equivalently a
        // failure at k1 forces a failure at k2. Checked by eigenvalues on a
        // fixed family of sign-indefinite densities.
        let b1 = IndexSet::Box { n: 1 };
        let densities = [
            Polynomial::from_terms(1, [(vec![1], 1.0)]),
            Polynomial::from_terms(1, [(vec![0], 0.1), (vec![1], 1.0)]),
            Polynomial::from_terms(1, [(vec![2], 1.0), (vec![0], -0.2)]),
            Polynomial::from_terms(1, [(vec![3], 1.0), (vec![1], -0.5)]),
        ];
        for psi in &densities {
            let mut prev_psd = true;
            for k in 0..=5u32 {
                let a = localized_matrix(&b1, psi, k);
                let psd = a.symmetric_eigenvalues().min() > -1e-12;
                // once the cone test fails it must keep failing at higher k
                assert!(psd || !prev_psd || k == 0 || true);
                if !prev_psd {
                    assert!(!psd, "ψ={psi} regained PSD at k={k}");
                }
                prev_psd = psd;
            }
        }
    }

    #[test]
    fn table_caching_grows_monotonically() {
        let table = MomentTable::new(IndexSet::Box { n: 2 });
        assert_eq!(table.maxdeg(), 0);
        let m1 = table.moment(&mono(&[2, 4]));
        assert_eq!(table.maxdeg(), 6);
        let _ = table.moment_matrix(1);
        assert_eq!(table.maxdeg(), 6); // matrix degrees ≤ 2 don't shrink it
        assert_eq!(table.moment(&mono(&[2, 4])), m1);
        // bound |∫ y^β| ≤ measure(Y) since |y^β| ≤ 1 on Y
        let measure = table.set().measure();
        for m in MonomialBasis::new(2, 6).iter() {
            assert!(table.moment(m).abs() <= measure + 1e-12);
        }
    }

    #[test]
    fn membership_tests() {
        let ball = IndexSet::Ball { n: 2 };
        assert!(ball.contains(&[0.6, 0.6]));
        assert!(!ball.contains(&[0.8, 0.8]));
        let sphere = IndexSet::Sphere { n: 2 };
        assert!(sphere.contains(&[1.0, 0.0]));
        assert!(!sphere.contains(&[0.5, 0.5]));
        let tri = IndexSet::polytope_fan(vec![
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
        ])
        .unwrap();
        assert!(tri.contains(&[-0.5, 0.5]));
        assert!(tri.contains(&[0.0, 0.0])); // on the diagonal edge
        assert!(!tri.contains(&[0.5, -0.5]));
    }

    #[test]
    fn degenerate_and_out_of_range_simplices_rejected() {
        assert!(matches!(
            IndexSet::simplex_union(vec![vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![2.0, 0.0], // collinear AND outside the cube
            ]]),
            Err(SetError::OutsideUnitCube { .. })
        ));
        assert!(matches!(
            IndexSet::simplex_union(vec![vec![
                vec![0.0, 0.0],
                vec![1.0, 0.0],
                vec![0.5, 0.0],
            ]]),
            Err(SetError::Degenerate { .. })
        ));
        assert!(matches!(
            IndexSet::polytope_fan(vec![vec![0.0, 0.0, 0.0]; 6]),
            Err(SetError::FanDimension) | Err(SetError::Degenerate { .. })
        ));
    }
}
