//! Fractional semi-infinite polynomial programming (FSIPP) with s.o.s-convex data.
//!
//! The problem class: minimize f(x)/g(x) over x ∈ R^m subject to finitely many
//! polynomial constraints φ_j(x) ≤ 0 and a *semi-infinite* constraint
//! p(x, y) ≤ 0 required for every y in a compact index set Y ⊆ [−1, 1]^n.
//! When f, −g, each φ_j, and p(·, y) are s.o.s-convex this crate computes
//!
//! * a convergent, monotone sequence of SDP lower bounds r_k of the optimum,
//! * approximate minimizers extracted from the optimal moment functionals,
//! * nested outer semidefinite-representable approximations Λ_k of the
//!   feasible set, with membership tests and boundary tracing,
//! * convergence diagnostics (measure-based upper/inner bounds, rate bounds).
//!
//! The semi-infinite constraint is handled without discretization: a linear
//! functional L acts on p in x, leaving a polynomial −L(p(x, ·)) in y, and the
//! requirement "nonnegative on Y" is relaxed to membership in an outer cone
//! P^k(Y) checked through exact moments of Y — a single PSD condition per
//! order k. Everything reduces to one conic program per order.
//!
//! Module map:
//!
//! * [`poly`] — sparse multivariate polynomials over the x/y variable blocks;
//! * [`moments`] — exact monomial moments of box/sphere/ball/simplex sets and
//!   the derived moment and localization matrices;
//! * [`sdp`] — backend-neutral conic program model, interior-point solve, and
//!   SDPA sparse-format export/import;
//! * [`soscert`] — SOS and s.o.s-convexity certification of the input data;
//! * [`relax`] — the relaxation hierarchy itself: build, solve, extract,
//!   membership, boundary tracing, grid-discretization baseline;
//! * [`diag`] — convergence diagnostics and Chebyshev/needle utilities.

pub mod diag;
pub mod moments;
pub mod poly;
pub mod relax;
pub mod sdp;
pub mod soscert;

pub use moments::IndexSet;
pub use poly::{BiPolynomial, Monomial, MonomialBasis, Polynomial};
pub use relax::{FsippProblem, HierarchyResult, MomentFunctional};
pub use soscert::{Certification, SosCertificate, ValidationReport};
