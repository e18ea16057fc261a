//! Sparse multivariate polynomial arithmetic over named variable blocks.
//!
//! Two blocks appear throughout the crate: decision variables x ∈ R^m and
//! index variables y ∈ R^n. [`Polynomial`] lives in a single block,
//! [`BiPolynomial`] couples both (the semi-infinite constraint p(x, y)).
//! Coefficients are `f64`; arithmetic on integer-representable inputs is
//! exact because only products and sums of representable values occur.
//!
//! Monomials are ordered graded-lexicographically: ascending total degree,
//! ties broken by giving earlier variables precedence, so a basis enumerates
//! as 1, x1, x2, x1², x1x2, x2², … That one canonical order indexes moment
//! vectors, Gram bases, and file formats alike.

use std::collections::BTreeMap;
use std::fmt;

/// Exponent vector of a single monomial, e.g. x1²x3 ↦ [2, 0, 1].
///
/// Equality, hashing, and ordering (graded-lex, see module docs) are all
/// derived from the exponent vector; the block dimension is its length.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial {
    exps: Vec<u32>,
}

impl Monomial {
    pub fn new(exps: Vec<u32>) -> Self {
        Monomial { exps }
    }

    /// The monomial 1 in a block of `dim` variables.
    pub fn one(dim: usize) -> Self {
        Monomial { exps: vec![0; dim] }
    }

    /// The single variable x_i (0-based) in a block of `dim` variables.
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index {i} out of range for dimension {dim}");
        let mut exps = vec![0; dim];
        exps[i] = 1;
        Monomial { exps }
    }

    pub fn exps(&self) -> &[u32] {
        &self.exps
    }

    pub fn dim(&self) -> usize {
        self.exps.len()
    }

    /// Total degree |α| = α_1 + ⋯ + α_dim.
    pub fn degree(&self) -> u32 {
        self.exps.iter().sum()
    }

    /// Product of monomials: exponent vectors add.
    pub fn mul(&self, other: &Monomial) -> Monomial {
        assert_eq!(self.dim(), other.dim(), "monomial dimension mismatch");
        Monomial {
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Value of x^α at the point `u`.
    pub fn evaluate(&self, u: &[f64]) -> f64 {
        assert_eq!(self.dim(), u.len(), "point dimension mismatch");
        self.exps
            .iter()
            .zip(u)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Graded lex: degree first; within a degree, x1^d sorts before
        // x1^{d-1}x2 etc., which is reversed plain-lex on exponent vectors.
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.exps.cmp(&self.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial in one variable block: a map from monomials to nonzero
/// coefficients. The zero polynomial stores no terms and has degree 0 by
/// convention.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Polynomial::zero(dim);
        p.add_term(Monomial::one(dim), c);
        p
    }

    /// The polynomial x_i (0-based variable index).
    pub fn variable(dim: usize, i: usize) -> Self {
        let mut p = Polynomial::zero(dim);
        p.add_term(Monomial::var(dim, i), 1.0);
        p
    }

    /// Build from (exponent vector, coefficient) pairs; repeated monomials
    /// accumulate.
    pub fn from_terms(dim: usize, terms: impl IntoIterator<Item = (Vec<u32>, f64)>) -> Self {
        let mut p = Polynomial::zero(dim);
        for (exps, c) in terms {
            assert_eq!(exps.len(), dim, "exponent vector length mismatch");
            p.add_term(Monomial::new(exps), c);
        }
        p
    }

    /// Add `c·mono` in place, dropping the entry if the coefficient cancels
    /// to exactly zero.
    pub fn add_term(&mut self, mono: Monomial, c: f64) {
        assert_eq!(mono.dim(), self.dim, "monomial dimension mismatch");
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry(mono).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            let key = self
                .terms
                .iter()
                .find(|(_, &v)| v == 0.0)
                .map(|(k, _)| k.clone());
            if let Some(key) = key {
                self.terms.remove(&key);
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of a monomial (0 when absent).
    pub fn coeff(&self, mono: &Monomial) -> f64 {
        self.terms.get(mono).copied().unwrap_or(0.0)
    }

    /// Max total degree over stored terms; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Largest coefficient magnitude; 0 for the zero polynomial.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut out = self.clone();
        for (m, c) in other.terms() {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, c: f64) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (m, v) in self.terms() {
            out.add_term(m.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, other.dim, "polynomial dimension mismatch");
        let mut out = Polynomial::zero(self.dim);
        for (ma, ca) in self.terms() {
            for (mb, cb) in other.terms() {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn powi(&self, e: u32) -> Polynomial {
        let mut out = Polynomial::constant(self.dim, 1.0);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    pub fn evaluate(&self, u: &[f64]) -> f64 {
        assert_eq!(u.len(), self.dim, "point dimension mismatch");
        self.terms().map(|(m, c)| c * m.evaluate(u)).sum()
    }

    /// Partial derivative ∂/∂x_i.
    pub fn diff(&self, i: usize) -> Polynomial {
        assert!(i < self.dim, "variable index out of range");
        let mut out = Polynomial::zero(self.dim);
        for (m, c) in self.terms() {
            let e = m.exps()[i];
            if e > 0 {
                let mut exps = m.exps().to_vec();
                exps[i] = e - 1;
                out.add_term(Monomial::new(exps), c * e as f64);
            }
        }
        out
    }

    /// Gradient as a vector of polynomials.
    pub fn gradient(&self) -> Vec<Polynomial> {
        (0..self.dim).map(|i| self.diff(i)).collect()
    }

    /// Hessian as a symmetric matrix of polynomials (row-major `dim × dim`).
    pub fn hessian(&self) -> Vec<Vec<Polynomial>> {
        let grad = self.gradient();
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| grad[i].diff(j)).collect())
            .collect()
    }

    /// Compose with the affine map y = A z + b: returns h(A z + b) as a
    /// polynomial in z. `a` is row-major with one row per y-variable; the
    /// number of columns is the z-dimension.
    pub fn substitute_affine(&self, a: &[Vec<f64>], b: &[f64]) -> Polynomial {
        assert_eq!(a.len(), self.dim, "affine map row count mismatch");
        assert_eq!(b.len(), self.dim, "offset length mismatch");
        let zdim = a.first().map_or(0, Vec::len);
        assert!(a.iter().all(|row| row.len() == zdim), "ragged affine map");

        // Affine images of each variable, expanded term by term.
        let images: Vec<Polynomial> = (0..self.dim)
            .map(|i| {
                let mut img = Polynomial::constant(zdim, b[i]);
                for (j, &aij) in a[i].iter().enumerate() {
                    img.add_term(Monomial::var(zdim, j), aij);
                }
                img
            })
            .collect();

        let mut out = Polynomial::zero(zdim);
        for (m, c) in self.terms() {
            let mut term = Polynomial::constant(zdim, c);
            for (i, &e) in m.exps().iter().enumerate() {
                if e > 0 {
                    term = term.mul(&images[i].powi(e));
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Render with a chosen variable letter, e.g. `"y"` → `2 y1^2 y2 - 1`.
    pub fn display_with(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (idx, (m, c)) in self.terms().enumerate() {
            let mag = c.abs();
            if idx == 0 {
                if c < 0.0 {
                    s.push('-');
                }
            } else {
                s.push_str(if c < 0.0 { " - " } else { " + " });
            }
            let vars: Vec<String> = m
                .exps()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(i, &e)| {
                    if e == 1 {
                        format!("{var}{}", i + 1)
                    } else {
                        format!("{var}{}^{e}", i + 1)
                    }
                })
                .collect();
            if vars.is_empty() {
                s.push_str(&format!("{mag}"));
            } else {
                if (mag - 1.0).abs() > 0.0 {
                    s.push_str(&format!("{mag} "));
                }
                s.push_str(&vars.join(" "));
            }
        }
        s
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with("x"))
    }
}

/// Which block of a [`BiPolynomial`] an operation acts on.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Block {
    X,
    Y,
}

/// Sparse polynomial in two variable blocks x ∈ R^xdim, y ∈ R^ydim, keyed by
/// pairs of monomials. Models the coupling constraint p(x, y).
#[derive(Clone, PartialEq, Debug)]
pub struct BiPolynomial {
    xdim: usize,
    ydim: usize,
    terms: BTreeMap<(Monomial, Monomial), f64>,
}

impl BiPolynomial {
    pub fn zero(xdim: usize, ydim: usize) -> Self {
        BiPolynomial {
            xdim,
            ydim,
            terms: BTreeMap::new(),
        }
    }

    /// Build from (x-exponents, y-exponents, coefficient) triples.
    pub fn from_terms(
        xdim: usize,
        ydim: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Vec<u32>, f64)>,
    ) -> Self {
        let mut p = BiPolynomial::zero(xdim, ydim);
        for (xe, ye, c) in terms {
            assert_eq!(xe.len(), xdim, "x-exponent length mismatch");
            assert_eq!(ye.len(), ydim, "y-exponent length mismatch");
            p.add_term(Monomial::new(xe), Monomial::new(ye), c);
        }
        p
    }

    pub fn add_term(&mut self, xm: Monomial, ym: Monomial, c: f64) {
        assert_eq!(xm.dim(), self.xdim, "x-monomial dimension mismatch");
        assert_eq!(ym.dim(), self.ydim, "y-monomial dimension mismatch");
        if c == 0.0 {
            return;
        }
        let entry = self.terms.entry((xm, ym)).or_insert(0.0);
        *entry += c;
        if *entry == 0.0 {
            let key = self
                .terms
                .iter()
                .find(|(_, &v)| v == 0.0)
                .map(|(k, _)| k.clone());
            if let Some(key) = key {
                self.terms.remove(&key);
            }
        }
    }

    pub fn xdim(&self) -> usize {
        self.xdim
    }

    pub fn ydim(&self) -> usize {
        self.ydim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Monomial, f64)> {
        self.terms.iter().map(|((xm, ym), &c)| (xm, ym, c))
    }

    pub fn deg_x(&self) -> u32 {
        self.terms.keys().map(|(xm, _)| xm.degree()).max().unwrap_or(0)
    }

    pub fn deg_y(&self) -> u32 {
        self.terms.keys().map(|(_, ym)| ym.degree()).max().unwrap_or(0)
    }

    pub fn add(&self, other: &BiPolynomial) -> BiPolynomial {
        assert_eq!((self.xdim, self.ydim), (other.xdim, other.ydim));
        let mut out = self.clone();
        for (xm, ym, c) in other.terms() {
            out.add_term(xm.clone(), ym.clone(), c);
        }
        out
    }

    pub fn scale(&self, c: f64) -> BiPolynomial {
        let mut out = BiPolynomial::zero(self.xdim, self.ydim);
        for (xm, ym, v) in self.terms() {
            out.add_term(xm.clone(), ym.clone(), v * c);
        }
        out
    }

    pub fn mul(&self, other: &BiPolynomial) -> BiPolynomial {
        assert_eq!((self.xdim, self.ydim), (other.xdim, other.ydim));
        let mut out = BiPolynomial::zero(self.xdim, self.ydim);
        for (xa, ya, ca) in self.terms() {
            for (xb, yb, cb) in other.terms() {
                out.add_term(xa.mul(xb), ya.mul(yb), ca * cb);
            }
        }
        out
    }

    /// Lift a polynomial in x (resp. y) into the two-block ring.
    pub fn lift(block: Block, p: &Polynomial, other_dim: usize) -> BiPolynomial {
        let (xdim, ydim) = match block {
            Block::X => (p.dim(), other_dim),
            Block::Y => (other_dim, p.dim()),
        };
        let mut out = BiPolynomial::zero(xdim, ydim);
        for (m, c) in p.terms() {
            let (xm, ym) = match block {
                Block::X => (m.clone(), Monomial::one(ydim)),
                Block::Y => (Monomial::one(xdim), m.clone()),
            };
            out.add_term(xm, ym, c);
        }
        out
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        self.terms()
            .map(|(xm, ym, c)| c * xm.evaluate(x) * ym.evaluate(y))
            .sum()
    }

    /// View as a polynomial in x with coefficients in R[y]: one y-polynomial
    /// per x-monomial. The converse view is [`BiPolynomial::y_sections`];
    /// both round-trip exactly.
    pub fn x_sections(&self) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (xm, ym, c) in self.terms() {
            out.entry(xm.clone())
                .or_insert_with(|| Polynomial::zero(self.ydim))
                .add_term(ym.clone(), c);
        }
        out
    }

    /// View as a polynomial in y with coefficients in R[x].
    pub fn y_sections(&self) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (xm, ym, c) in self.terms() {
            out.entry(ym.clone())
                .or_insert_with(|| Polynomial::zero(self.xdim))
                .add_term(xm.clone(), c);
        }
        out
    }

    /// Apply a linear functional to one block, leaving a polynomial in the
    /// other: a functional L on x-monomials yields Σ_α L(x^α)·p_α(y) ∈ R[y],
    /// and symmetrically for y.
    pub fn apply_functional(&self, block: Block, l: &dyn Fn(&Monomial) -> f64) -> Polynomial {
        let out_dim = match block {
            Block::X => self.ydim,
            Block::Y => self.xdim,
        };
        let mut out = Polynomial::zero(out_dim);
        for (xm, ym, c) in self.terms() {
            match block {
                Block::X => out.add_term(ym.clone(), c * l(xm)),
                Block::Y => out.add_term(xm.clone(), c * l(ym)),
            }
        }
        out
    }

    /// Fix a point in one block: p(·, y0) ∈ R[x] or p(x0, ·) ∈ R[y].
    /// Point evaluation is the special case of [`Self::apply_functional`]
    /// with the evaluation functional.
    pub fn apply_point(&self, block: Block, point: &[f64]) -> Polynomial {
        match block {
            Block::Y => {
                assert_eq!(point.len(), self.ydim, "point dimension mismatch");
                self.apply_functional(Block::Y, &|ym: &Monomial| ym.evaluate(point))
            }
            Block::X => {
                assert_eq!(point.len(), self.xdim, "point dimension mismatch");
                self.apply_functional(Block::X, &|xm: &Monomial| xm.evaluate(point))
            }
        }
    }

    /// Gradient in the x block; entries are bi-polynomials.
    pub fn gradient_x(&self) -> Vec<BiPolynomial> {
        (0..self.xdim).map(|i| self.diff_x(i)).collect()
    }

    /// Hessian in the x block (row-major `xdim × xdim`).
    pub fn hessian_x(&self) -> Vec<Vec<BiPolynomial>> {
        let grad = self.gradient_x();
        (0..self.xdim)
            .map(|i| (0..self.xdim).map(|j| grad[i].diff_x(j)).collect())
            .collect()
    }

    pub fn diff_x(&self, i: usize) -> BiPolynomial {
        assert!(i < self.xdim, "variable index out of range");
        let mut out = BiPolynomial::zero(self.xdim, self.ydim);
        for (xm, ym, c) in self.terms() {
            let e = xm.exps()[i];
            if e > 0 {
                let mut exps = xm.exps().to_vec();
                exps[i] = e - 1;
                out.add_term(Monomial::new(exps), ym.clone(), c * e as f64);
            }
        }
        out
    }
}

/// All monomials of degree ≤ `order` in `dim` variables, graded-lex sorted,
/// with O(1)-ish position lookup. This is the basis vector v_k of the moment
/// machinery; its length is binomial(dim + order, order).
#[derive(Clone, Debug)]
pub struct MonomialBasis {
    dim: usize,
    order: u32,
    list: Vec<Monomial>,
}

impl MonomialBasis {
    pub fn new(dim: usize, order: u32) -> Self {
        let mut list = Vec::with_capacity(binomial(dim + order as usize, order as usize) as usize);
        let mut exps = vec![0u32; dim];
        enumerate_rec(&mut exps, 0, order, &mut list);
        list.sort();
        MonomialBasis { dim, order, list }
    }

    /// A basis over an explicit monomial list (e.g. a structured subset such
    /// as the z-linear monomials of a convexity certificate). The list is
    /// sorted and deduplicated; `order` becomes the largest degree present.
    pub fn from_list(dim: usize, monos: impl IntoIterator<Item = Monomial>) -> Self {
        let mut list: Vec<Monomial> = monos.into_iter().collect();
        for m in &list {
            assert_eq!(m.dim(), dim, "basis monomial dimension mismatch");
        }
        list.sort();
        list.dedup();
        let order = list.iter().map(|m| m.degree()).max().unwrap_or(0);
        MonomialBasis { dim, order, list }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn list(&self) -> &[Monomial] {
        &self.list
    }

    pub fn iter(&self) -> impl Iterator<Item = &Monomial> {
        self.list.iter()
    }

    /// Position of a monomial in the basis, if its degree fits.
    pub fn index(&self, m: &Monomial) -> Option<usize> {
        self.list.binary_search_by(|probe| probe.cmp(m)).ok()
    }
}

fn enumerate_rec(exps: &mut Vec<u32>, pos: usize, budget: u32, out: &mut Vec<Monomial>) {
    if pos == exps.len() {
        out.push(Monomial::new(exps.clone()));
        return;
    }
    for e in 0..=budget {
        exps[pos] = e;
        enumerate_rec(exps, pos + 1, budget - e, out);
    }
    exps[pos] = 0;
}

/// Binomial coefficient with u128 accumulation; panics on overflow, which is
/// far beyond any basis size this crate can solve anyway.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
