//! On-disk JSON formats: problem instances in, per-order results out.
//!
//! A problem file fixes the variable counts, the polynomial data as explicit
//! term lists, the index set, and the solver constants (R, g*, tolerance).
//! Parsing is strict about dimensions — every exponent vector must match the
//! declared variable counts — so that a malformed file fails at load time
//! with a message naming the offending entry, never deep inside a solve.
//!
//! A result file carries one record per relaxation order plus provenance
//! (tool version and the effective configuration).  Records are sorted by
//! order and every number is finite: non-finite values from failed solves
//! are mapped to `null` rather than leaking NaN into the JSON.

use anyhow::{anyhow, bail, Result};
use serde::{Deserialize, Serialize};

use fsipp::moments::IndexSet;
use fsipp::poly::{BiPolynomial, Polynomial};
use fsipp::relax::{FsippProblem, HierarchyResult};
use fsipp::sdp::Status;

/// One monomial of a polynomial in the decision variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyTerm {
    pub exp: Vec<u32>,
    pub coef: f64,
}

/// One monomial of the parametric constraint, split into its x and y parts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiTerm {
    pub xexp: Vec<u32>,
    pub yexp: Vec<u32>,
    pub coef: f64,
}

/// Vertex payload for simplex-based index sets: either a convex polytope as
/// a flat vertex list (triangulated by fanning) or an explicit list of
/// simplices, each given by its n+1 vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexData {
    Simplices(Vec<Vec<Vec<f64>>>),
    Polytope(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexSetFile {
    /// One of "box", "sphere", "ball", "simplices".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<VertexData>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigFile {
    /// Radius of the ball in which the feasible set is assumed to live.
    #[serde(rename = "R")]
    pub r: f64,
    /// Positive lower bound for the denominator on the feasible set.
    pub gstar: f64,
    /// Solver tolerance; 1e-8 when absent.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    1e-8
}

/// A complete problem instance as stored on disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    /// Number of decision variables.
    pub m: usize,
    /// Number of index variables.
    pub n: usize,
    /// Numerator of the objective.
    pub f: Vec<PolyTerm>,
    /// Denominator; the constant 1 when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<Vec<PolyTerm>>,
    /// Explicit constraints φ_j ≤ 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<Vec<PolyTerm>>,
    /// The parametric constraint p(x, y) ≤ 0 for all y in the index set.
    pub p: Vec<BiTerm>,
    pub index_set: IndexSetFile,
    pub config: ConfigFile,
}

fn poly_from(dim: usize, terms: &[PolyTerm], what: &str) -> Result<Polynomial> {
    for (i, t) in terms.iter().enumerate() {
        if t.exp.len() != dim {
            bail!(
                "{what}: term {i} has {} exponents, expected {dim}",
                t.exp.len()
            );
        }
        if !t.coef.is_finite() {
            bail!("{what}: term {i} has non-finite coefficient");
        }
    }
    Ok(Polynomial::from_terms(
        dim,
        terms.iter().map(|t| (t.exp.clone(), t.coef)),
    ))
}

impl ProblemFile {
    /// Validate dimensions and build the in-memory problem.
    pub fn to_problem(&self) -> Result<FsippProblem> {
        if self.m == 0 {
            bail!("m must be at least 1");
        }
        if self.n == 0 {
            bail!("n must be at least 1");
        }
        let f = poly_from(self.m, &self.f, "f")?;
        let g = match &self.g {
            Some(terms) => poly_from(self.m, terms, "g")?,
            None => Polynomial::constant(self.m, 1.0),
        };
        let phi: Vec<Polynomial> = self
            .phi
            .iter()
            .enumerate()
            .map(|(j, terms)| poly_from(self.m, terms, &format!("phi[{j}]")))
            .collect::<Result<_>>()?;
        for (i, t) in self.p.iter().enumerate() {
            if t.xexp.len() != self.m || t.yexp.len() != self.n {
                bail!(
                    "p: term {i} has ({}, {}) exponents, expected ({}, {})",
                    t.xexp.len(),
                    t.yexp.len(),
                    self.m,
                    self.n
                );
            }
            if !t.coef.is_finite() {
                bail!("p: term {i} has non-finite coefficient");
            }
        }
        let p = BiPolynomial::from_terms(
            self.m,
            self.n,
            self.p.iter().map(|t| (t.xexp.clone(), t.yexp.clone(), t.coef)),
        );
        let set = match self.index_set.kind.as_str() {
            "box" => IndexSet::Box { n: self.n },
            "sphere" => IndexSet::Sphere { n: self.n },
            "ball" => IndexSet::Ball { n: self.n },
            "simplices" => match &self.index_set.vertices {
                Some(VertexData::Polytope(v)) => IndexSet::polytope_fan(v.clone())
                    .map_err(|e| anyhow!("index_set: {e}"))?,
                Some(VertexData::Simplices(s)) => IndexSet::simplex_union(s.clone())
                    .map_err(|e| anyhow!("index_set: {e}"))?,
                None => bail!("index_set: kind \"simplices\" requires vertices"),
            },
            other => bail!(
                "index_set: unknown kind {other:?} (expected box, sphere, ball, or simplices)"
            ),
        };
        if set.n() != self.n {
            bail!(
                "index_set has dimension {} but n = {} was declared",
                set.n(),
                self.n
            );
        }
        FsippProblem::new(f, g, phi, p, set, self.config.r, self.config.gstar)
            .map_err(|e| anyhow!("{e}"))
    }
}

/// One record of a hierarchy run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub k: u32,
    /// "optimal", "infeasible", "unbounded", or "numerical-trouble".
    pub status: String,
    pub lower_bound: Option<f64>,
    pub minimizer: Option<Vec<f64>>,
    pub feas_residual: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_e: Option<f64>,
    pub wall_time_s: f64,
}

pub fn status_str(status: Status) -> &'static str {
    match status {
        Status::Optimal => "optimal",
        Status::Infeasible => "infeasible",
        Status::Unbounded => "unbounded",
        Status::NumericalTrouble => "numerical-trouble",
    }
}

fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

impl ResultRecord {
    pub fn from_hierarchy(r: &HierarchyResult, gap_e: Option<f64>) -> Self {
        ResultRecord {
            k: r.k,
            status: status_str(r.status).to_string(),
            lower_bound: finite(r.lower_bound),
            minimizer: r.minimizer.clone(),
            feas_residual: r.feas_residual.and_then(finite),
            gap_e: gap_e.and_then(finite),
            wall_time_s: r.wall_time_s,
        }
    }
}

/// The machine-readable output of a solve run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub tool: String,
    pub version: String,
    /// Path of the problem file the run was started from.
    pub problem: String,
    /// Effective configuration (tolerance reflects any command-line override).
    pub config: ConfigFile,
    pub records: Vec<ResultRecord>,
}

impl ResultFile {
    pub fn new(problem: String, config: ConfigFile, mut records: Vec<ResultRecord>) -> Self {
        records.sort_by_key(|r| r.k);
        ResultFile {
            tool: "fsipp".to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            problem,
            config,
            records,
        }
    }
}
