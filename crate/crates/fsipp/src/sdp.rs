//! Backend-neutral conic programs and their solution.
//!
//! Everything the rest of the crate needs from semidefinite programming goes
//! through one data model: scalar decision variables z, affine PSD
//! constraints F_0 + Σ_i z_i F_i ⪰ 0, and scalar equalities/inequalities.
//! [`solve`] hands the assembled program to an interior-point backend
//! (Clarabel, direct factorization — deterministic for fixed input), and
//! [`feasible`] answers pure feasibility questions through a phase-I
//! reformulation: minimize the uniform margin t that makes every constraint
//! hold with slack t, then compare the optimal margin against the tolerance.
//!
//! The [`sdpa`] submodule serializes programs to the SDPA sparse ".dat-s"
//! interchange format and back.

pub mod sdpa;

use std::collections::BTreeMap;

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use nalgebra::DMatrix;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum SdpError {
    #[error("interior-point method failed to converge: {0}")]
    NumericalTrouble(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

/// One affine-matrix constraint F_0 + Σ_i z_i F_i ⪰ 0. All matrices are
/// symmetric and stored by their upper triangles; add each off-diagonal
/// position once (entries accumulate).
#[derive(Clone, PartialEq, Debug)]
pub struct PsdBlock {
    size: usize,
    f0: BTreeMap<(usize, usize), f64>,
    fi: BTreeMap<(usize, usize, usize), f64>,
}

impl PsdBlock {
    pub fn new(size: usize) -> Self {
        assert!(size > 0, "empty PSD block");
        PsdBlock {
            size,
            f0: BTreeMap::new(),
            fi: BTreeMap::new(),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Add `v` to the constant part at (i, j) ≡ (j, i).
    pub fn add_const(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.size && j < self.size, "index out of block");
        assert!(v.is_finite(), "non-finite coefficient");
        if v == 0.0 {
            return;
        }
        let key = (i.min(j), i.max(j));
        let e = self.f0.entry(key).or_insert(0.0);
        *e += v;
        if *e == 0.0 {
            self.f0.remove(&key);
        }
    }

    /// Add `v` to variable `var`'s coefficient matrix at (i, j) ≡ (j, i).
    pub fn add_var(&mut self, var: usize, i: usize, j: usize, v: f64) {
        assert!(i < self.size && j < self.size, "index out of block");
        assert!(v.is_finite(), "non-finite coefficient");
        if v == 0.0 {
            return;
        }
        let key = (var, i.min(j), i.max(j));
        let e = self.fi.entry(key).or_insert(0.0);
        *e += v;
        if *e == 0.0 {
            self.fi.remove(&key);
        }
    }

    /// Upper-triangle triplets of F_0.
    pub fn const_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.f0.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// Upper-triangle triplets (var, i, j, v) of the F_i.
    pub fn var_entries(&self) -> impl Iterator<Item = (usize, usize, usize, f64)> + '_ {
        self.fi.iter().map(|(&(k, i, j), &v)| (k, i, j, v))
    }

    /// Evaluate F_0 + Σ z_i F_i at a concrete point.
    pub fn evaluate(&self, z: &[f64]) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.size, self.size);
        for (i, j, v) in self.const_entries() {
            m[(i, j)] += v;
            if i != j {
                m[(j, i)] += v;
            }
        }
        for (k, i, j, v) in self.var_entries() {
            let add = v * z[k];
            m[(i, j)] += add;
            if i != j {
                m[(j, i)] += add;
            }
        }
        m
    }

    fn max_var(&self) -> Option<usize> {
        self.fi.keys().map(|&(k, _, _)| k).max()
    }
}

/// A scalar affine relation Σ coefs·z (= or ≤) rhs.
#[derive(Clone, PartialEq, Debug)]
pub struct LinearConstraint {
    terms: BTreeMap<usize, f64>,
    rhs: f64,
}

impl LinearConstraint {
    pub fn new(terms: impl IntoIterator<Item = (usize, f64)>, rhs: f64) -> Self {
        let mut map = BTreeMap::new();
        for (k, v) in terms {
            assert!(v.is_finite() && rhs.is_finite(), "non-finite coefficient");
            if v == 0.0 {
                continue;
            }
            let e = map.entry(k).or_insert(0.0);
            *e += v;
            if *e == 0.0 {
                map.remove(&k);
            }
        }
        LinearConstraint { terms: map, rhs }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms.iter().map(|(&k, &v)| (k, v))
    }

    pub fn rhs(&self) -> f64 {
        self.rhs
    }

    pub fn evaluate(&self, z: &[f64]) -> f64 {
        self.terms().map(|(k, v)| v * z[k]).sum()
    }
}

/// Conic program: minimize cᵀz subject to PSD blocks and scalar relations.
#[derive(Clone, PartialEq, Debug)]
pub struct ConicProgram {
    nvars: usize,
    objective: Vec<f64>,
    psd_blocks: Vec<PsdBlock>,
    eqs: Vec<LinearConstraint>,
    ineqs: Vec<LinearConstraint>,
}

impl ConicProgram {
    pub fn new(nvars: usize) -> Self {
        ConicProgram {
            nvars,
            objective: vec![0.0; nvars],
            psd_blocks: Vec::new(),
            eqs: Vec::new(),
            ineqs: Vec::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Minimize cᵀz.
    pub fn set_objective(&mut self, c: Vec<f64>) {
        assert_eq!(c.len(), self.nvars, "objective length mismatch");
        assert!(c.iter().all(|v| v.is_finite()), "non-finite objective");
        self.objective = c;
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn add_psd_block(&mut self, block: PsdBlock) -> usize {
        if let Some(maxv) = block.max_var() {
            assert!(maxv < self.nvars, "variable index out of range");
        }
        self.psd_blocks.push(block);
        self.psd_blocks.len() - 1
    }

    /// Σ terms·z = rhs.
    pub fn add_eq(&mut self, terms: impl IntoIterator<Item = (usize, f64)>, rhs: f64) {
        let c = LinearConstraint::new(terms, rhs);
        assert!(c.terms.keys().all(|&k| k < self.nvars));
        self.eqs.push(c);
    }

    /// Σ terms·z ≤ rhs.
    pub fn add_ineq(&mut self, terms: impl IntoIterator<Item = (usize, f64)>, rhs: f64) {
        let c = LinearConstraint::new(terms, rhs);
        assert!(c.terms.keys().all(|&k| k < self.nvars));
        self.ineqs.push(c);
    }

    pub fn psd_blocks(&self) -> &[PsdBlock] {
        &self.psd_blocks
    }

    pub fn eqs(&self) -> &[LinearConstraint] {
        &self.eqs
    }

    pub fn ineqs(&self) -> &[LinearConstraint] {
        &self.ineqs
    }

    fn num_rows(&self) -> usize {
        self.eqs.len()
            + self.ineqs.len()
            + self
                .psd_blocks
                .iter()
                .map(|b| b.size * (b.size + 1) / 2)
                .sum::<usize>()
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalTrouble,
}

/// Solver output. Dual multipliers are populated only on `Optimal`: one PSD
/// matrix per PSD block, one scalar per equality (free sign) and per
/// inequality (nonnegative).
#[derive(Clone, Debug)]
pub struct ConicSolution {
    pub status: Status,
    pub z: Vec<f64>,
    pub objective_value: f64,
    pub dual_objective_value: f64,
    /// |primal − dual| / (1 + |primal|), meaningful on Optimal.
    pub gap: f64,
    pub psd_duals: Vec<DMatrix<f64>>,
    pub eq_duals: Vec<f64>,
    pub ineq_duals: Vec<f64>,
}

impl ConicSolution {
    fn trouble() -> Self {
        ConicSolution {
            status: Status::NumericalTrouble,
            z: Vec::new(),
            objective_value: f64::NAN,
            dual_objective_value: f64::NAN,
            gap: f64::NAN,
            psd_duals: Vec::new(),
            eq_duals: Vec::new(),
            ineq_duals: Vec::new(),
        }
    }
}

/// A stalled interior-point iterate still counts as optimal when its measured
/// residuals and duality gap pass the backend's own convergence test at this
/// multiple of the requested tolerance. Ill-conditioned instances routinely
/// stop with one residual a small factor above target while the iterate is
/// converged for every practical purpose.
const STALL_ACCEPT_FACTOR: f64 = 100.0;

/// Solve the program with the interior-point backend. `tol` is used for the
/// relative/absolute duality-gap and feasibility targets; on [`Status::Optimal`]
/// the reported `gap` is ≤ `tol` for a cleanly converged solve and at worst
/// [`STALL_ACCEPT_FACTOR`]·`tol` for an accepted stalled one. Deterministic
/// for identical inputs and tolerance.
pub fn solve(prog: &ConicProgram, tol: f64) -> ConicSolution {
    assert!(tol > 0.0, "tolerance must be positive");
    let nrows = prog.num_rows();
    if nrows == 0 {
        // No constraints: either the zero objective (any point optimal) or
        // an unbounded linear functional over free variables.
        return if prog.objective.iter().all(|&c| c == 0.0) {
            ConicSolution {
                status: Status::Optimal,
                z: vec![0.0; prog.nvars],
                objective_value: 0.0,
                dual_objective_value: 0.0,
                gap: 0.0,
                psd_duals: Vec::new(),
                eq_duals: Vec::new(),
                ineq_duals: Vec::new(),
            }
        } else {
            ConicSolution {
                status: Status::Unbounded,
                ..ConicSolution::trouble()
            }
        };
    }

    // Stack rows: equalities (zero cone), inequalities (nonnegative cone,
    // slack b − aᵀz), then one scaled-triangle section per PSD block with
    // s = svec(F_0 + Σ z_i F_i), i.e. A = −svec(F_i) columns, b = svec(F_0).
    let ne = prog.eqs.len();
    let ni = prog.ineqs.len();
    let mut b = vec![0.0; nrows];
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();

    for (r, eq) in prog.eqs.iter().enumerate() {
        b[r] = eq.rhs;
        for (k, v) in eq.terms() {
            triplets.push((r, k, v));
        }
    }
    for (idx, ineq) in prog.ineqs.iter().enumerate() {
        let r = ne + idx;
        b[r] = ineq.rhs;
        for (k, v) in ineq.terms() {
            triplets.push((r, k, v));
        }
    }
    let mut base = ne + ni;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut cones: Vec<SupportedConeT<f64>> = Vec::new();
    if ne > 0 {
        cones.push(SupportedConeT::ZeroConeT(ne));
    }
    if ni > 0 {
        cones.push(SupportedConeT::NonnegativeConeT(ni));
    }
    for block in &prog.psd_blocks {
        // svec packs the upper triangle column-major with √2 off-diagonals
        let tri_index = |i: usize, j: usize| j * (j + 1) / 2 + i;
        for (i, j, v) in block.const_entries() {
            let scale = if i == j { 1.0 } else { sqrt2 };
            b[base + tri_index(i, j)] = v * scale;
        }
        for (k, i, j, v) in block.var_entries() {
            let scale = if i == j { 1.0 } else { sqrt2 };
            triplets.push((base + tri_index(i, j), k, -v * scale));
        }
        cones.push(SupportedConeT::PSDTriangleConeT(block.size));
        base += block.size * (block.size + 1) / 2;
    }

    let a = csc_from_triplets(nrows, prog.nvars, &mut triplets);
    let p = CscMatrix::zeros((prog.nvars, prog.nvars));
    // FSIPP_SOLVER_VERBOSE=1 streams the interior-point iteration log to
    // stdout for debugging stalled solves.
    let settings = DefaultSettingsBuilder::default()
        .verbose(std::env::var_os("FSIPP_SOLVER_VERBOSE").is_some())
        .tol_gap_abs(tol)
        .tol_gap_rel(tol)
        .tol_feas(tol)
        .build()
        .expect("static settings are valid");
    let Ok(mut solver) = DefaultSolver::new(&p, &prog.objective, &a, &b, &cones, settings) else {
        return ConicSolution::trouble();
    };
    solver.solve();
    let sol = &solver.solution;

    // Residuals in `info` always describe the returned iterate: the backend
    // restores them together with the variables when it backtracks a stall.
    let info = &solver.info;
    let relaxed = STALL_ACCEPT_FACTOR * tol;
    let near_optimal = info.ktratio <= 1.0
        && (info.gap_abs < relaxed || info.gap_rel < relaxed)
        && info.res_primal < relaxed
        && info.res_dual < relaxed;
    let status = match sol.status {
        SolverStatus::Solved => Status::Optimal,
        SolverStatus::PrimalInfeasible => Status::Infeasible,
        SolverStatus::DualInfeasible => Status::Unbounded,
        _ if near_optimal => Status::Optimal,
        _ => Status::NumericalTrouble,
    };
    let gap = (sol.obj_val - sol.obj_val_dual).abs() / (1.0 + sol.obj_val.abs());

    let mut out = ConicSolution {
        status,
        z: sol.x.clone(),
        objective_value: sol.obj_val,
        dual_objective_value: sol.obj_val_dual,
        gap,
        psd_duals: Vec::new(),
        eq_duals: Vec::new(),
        ineq_duals: Vec::new(),
    };
    if status == Status::Optimal {
        out.eq_duals = sol.z[..ne].to_vec();
        out.ineq_duals = sol.z[ne..ne + ni].to_vec();
        let mut base = ne + ni;
        for block in &prog.psd_blocks {
            let mut m = DMatrix::zeros(block.size, block.size);
            let mut idx = base;
            for j in 0..block.size {
                for i in 0..=j {
                    let v = if i == j {
                        sol.z[idx]
                    } else {
                        sol.z[idx] / sqrt2
                    };
                    m[(i, j)] = v;
                    m[(j, i)] = v;
                    idx += 1;
                }
            }
            out.psd_duals.push(m);
            base += block.size * (block.size + 1) / 2;
        }
    }
    out
}

/// Phase-I feasibility: is there a point satisfying every constraint to
/// tolerance? Minimizes a uniform margin t added to all PSD blocks and
/// inequalities (equalities stay exact) and reports t* ≤ tol. Numerical
/// failure is an error so callers can stay honestly tri-state.
pub fn feasible(prog: &ConicProgram, tol: f64) -> Result<bool, SdpError> {
    if prog.num_rows() == 0 {
        return Ok(true);
    }
    let t = prog.nvars;
    let mut phase1 = ConicProgram::new(prog.nvars + 1);
    let mut c = vec![0.0; prog.nvars + 1];
    c[t] = 1.0;
    phase1.set_objective(c);
    for block in &prog.psd_blocks {
        let mut shifted = block.clone();
        for i in 0..block.size {
            shifted.add_var(t, i, i, 1.0);
        }
        phase1.add_psd_block(shifted);
    }
    for eq in &prog.eqs {
        phase1.add_eq(eq.terms(), eq.rhs);
    }
    for ineq in &prog.ineqs {
        let terms = ineq.terms().chain(std::iter::once((t, -1.0)));
        phase1.add_ineq(terms, ineq.rhs);
    }
    // keep the margin bounded below so the phase-I problem is never unbounded
    phase1.add_ineq([(t, -1.0)], 1.0);

    let sol = solve(&phase1, tol);
    match sol.status {
        Status::Optimal => Ok(sol.objective_value <= tol),
        Status::Infeasible => Ok(false), // inconsistent equalities
        Status::Unbounded | Status::NumericalTrouble => Err(SdpError::NumericalTrouble(format!(
            "phase-I feasibility solve ended with {:?}",
            sol.status
        ))),
    }
}

/// Write the program in SDPA sparse format; see [`sdpa`].
pub fn export_sdpa(prog: &ConicProgram, path: impl AsRef<std::path::Path>) -> Result<(), SdpError> {
    sdpa::export(prog, path.as_ref())
}

/// Read a program back from SDPA sparse format; see [`sdpa`].
pub fn import_sdpa(path: impl AsRef<std::path::Path>) -> Result<ConicProgram, SdpError> {
    sdpa::import(path.as_ref())
}

fn csc_from_triplets(
    nrows: usize,
    ncols: usize,
    triplets: &mut Vec<(usize, usize, f64)>,
) -> CscMatrix<f64> {
    triplets.sort_by_key(|&(r, c, _)| (c, r));
    let mut colptr = vec![0usize; ncols + 1];
    let mut rowval = Vec::with_capacity(triplets.len());
    let mut nzval: Vec<f64> = Vec::with_capacity(triplets.len());
    let mut last = None;
    for &(r, c, v) in triplets.iter() {
        if last == Some((c, r)) {
            // accumulate duplicates defensively; builders shouldn't produce any
            *nzval.last_mut().unwrap() += v;
        } else {
            rowval.push(r);
            nzval.push(v);
            colptr[c + 1] = rowval.len();
            last = Some((c, r));
        }
    }
    // carry forward column boundaries across empty columns
    for c in 1..=ncols {
        if colptr[c] < colptr[c - 1] {
            colptr[c] = colptr[c - 1];
        }
    }
    CscMatrix::new(nrows, ncols, colptr, rowval, nzval)
}
