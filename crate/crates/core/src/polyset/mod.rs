//! Polynomial and rationomial functions stored as coefficients over exponent terms.

mod orthonormal;
mod spaces;

pub use orthonormal::{legendre_values, LegendreSet, OrthonormalBasis};
pub use spaces::{complete_space, complete_space_on, natural_indices, natural_space, pyramid_lagrange_space};

use crate::cells::{AffineMap, ReferenceCell};
use crate::error::{domain, Error, Result};
use crate::linalg;
use crate::numfmt::format_sig;
use crate::tabulation::{FunctionSet, Tabulation};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// `x^p0 y^p1 z^p2 / (1 - z)^e`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Term {
    pub p: [u32; 3],
    pub e: u32,
}

impl Term {
    pub const ONE: Term = Term { p: [0, 0, 0], e: 0 };

    pub fn new(p: [u32; 3], e: u32) -> Self {
        Self { p, e }
    }

    pub fn monomial(p: &[u32]) -> Self {
        let mut q = [0; 3];
        q[..p.len()].copy_from_slice(p);
        Self { p: q, e: 0 }
    }

    /// Total degree, counting the denominator power.
    pub fn total(&self) -> u32 {
        self.p.iter().sum::<u32>() + self.e
    }

    fn key(&self) -> (u32, u32, u32, u32, u32) {
        (self.total(), self.p[0], self.p[1], self.p[2], self.e)
    }

    fn times(&self, o: &Term) -> Term {
        Term {
            p: [self.p[0] + o.p[0], self.p[1] + o.p[1], self.p[2] + o.p[2]],
            e: self.e + o.e,
        }
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mut v = 1.0;
        for (i, &pi) in self.p.iter().enumerate() {
            if pi > 0 {
                v *= x[i].powi(pi as i32);
            }
        }
        if self.e > 0 {
            let d = 1.0 - x[2];
            if d == 0.0 {
                return Err(Error::Singularity(format!(
                    "(1 - z)^{} vanishes at z = 1",
                    self.e
                )));
            }
            v /= d.powi(self.e as i32);
        }
        Ok(v)
    }
}

impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A scalar expansion over terms, used for symbolic work.
pub(crate) type Poly = BTreeMap<Term, f64>;

fn poly_add(a: &mut Poly, b: &Poly, s: f64) {
    for (t, c) in b {
        *a.entry(*t).or_insert(0.0) += s * c;
    }
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ta, ca) in a {
        for (tb, cb) in b {
            *out.entry(ta.times(tb)).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// A scalar, vector or matrix valued function whose components share one term list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFunction {
    pub nvars: usize,
    pub value_shape: Vec<usize>,
    pub terms: Vec<Term>,
    /// `coefficients[component][term]`.
    pub coefficients: Vec<Vec<f64>>,
}

impl PolyFunction {
    pub(crate) fn from_polys(nvars: usize, value_shape: Vec<usize>, comps: Vec<Poly>) -> Self {
        let mut all = Poly::new();
        for c in &comps {
            for (t, v) in c {
                if *v != 0.0 {
                    all.insert(*t, 0.0);
                }
            }
        }
        let terms: Vec<Term> = all.keys().copied().collect();
        let coefficients = comps
            .iter()
            .map(|c| terms.iter().map(|t| c.get(t).copied().unwrap_or(0.0)).collect())
            .collect();
        Self {
            nvars,
            value_shape,
            terms,
            coefficients,
        }
    }

    pub(crate) fn component_poly(&self, c: usize) -> Poly {
        self.terms
            .iter()
            .zip(&self.coefficients[c])
            .filter(|(_, v)| **v != 0.0)
            .map(|(t, v)| (*t, *v))
            .collect()
    }

    fn polys(&self) -> Vec<Poly> {
        (0..self.value_size()).map(|c| self.component_poly(c)).collect()
    }

    pub fn zero(nvars: usize, value_shape: Vec<usize>) -> Self {
        let s = value_shape.iter().product();
        Self::from_polys(nvars, value_shape, vec![Poly::new(); s])
    }

    /// A scalar function with a single term.
    pub fn term(nvars: usize, term: Term, coef: f64) -> Self {
        Self::from_polys(nvars, vec![], vec![Poly::from([(term, coef)])])
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::term(nvars, Term::ONE, c)
    }

    /// Scalar coordinate function `x_i`.
    pub fn coordinate(nvars: usize, i: usize) -> Self {
        let mut p = [0; 3];
        p[i] = 1;
        Self::term(nvars, Term::new(p, 0), 1.0)
    }

    /// Vector function from scalar components.
    pub fn vector(components: &[PolyFunction]) -> Result<Self> {
        let nvars = components.first().map_or(0, |c| c.nvars);
        if components.iter().any(|c| !c.value_shape.is_empty() || c.nvars != nvars) {
            return domain("vector components must be scalar functions of equal arity");
        }
        Ok(Self::from_polys(
            nvars,
            vec![components.len()],
            components.iter().map(|c| c.component_poly(0)).collect(),
        ))
    }

    /// The vector `f e_c` of length `size`.
    pub fn unit_vector(f: &PolyFunction, c: usize, size: usize) -> Self {
        let mut comps = vec![Poly::new(); size];
        comps[c] = f.component_poly(0);
        Self::from_polys(f.nvars, vec![size], comps)
    }

    pub fn value_size(&self) -> usize {
        self.value_shape.iter().product()
    }

    pub fn is_scalar(&self) -> bool {
        self.value_shape.is_empty()
    }

    pub fn component(&self, c: usize) -> PolyFunction {
        Self::from_polys(self.nvars, vec![], vec![self.component_poly(c)])
    }

    pub fn has_denominator(&self) -> bool {
        self.terms.iter().any(|t| t.e > 0)
    }

    /// Largest total degree (numerator exponents only).
    pub fn total_degree(&self) -> usize {
        self.nonzero_terms().map(|t| t.p.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    /// Largest exponent of any single variable.
    pub fn max_exponent(&self) -> usize {
        self.nonzero_terms()
            .map(|t| *t.p.iter().max().expect("three exponents") as usize)
            .max()
            .unwrap_or(0)
    }

    fn nonzero_terms(&self) -> impl Iterator<Item = &Term> {
        self.terms
            .iter()
            .enumerate()
            .filter(|(j, _)| self.coefficients.iter().any(|c| c[*j] != 0.0))
            .map(|(_, t)| t)
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() < self.nvars {
            return domain(format!("point {x:?} has fewer than {} coordinates", self.nvars));
        }
        let tv: Vec<f64> = self.terms.iter().map(|t| t.eval(x)).collect::<Result<_>>()?;
        Ok(self
            .coefficients
            .iter()
            .map(|c| c.iter().zip(&tv).map(|(a, b)| a * b).sum())
            .collect())
    }

    pub fn add(&self, other: &PolyFunction) -> Result<PolyFunction> {
        self.check_compatible(other)?;
        let mut a = self.polys();
        for (ac, bc) in a.iter_mut().zip(other.polys()) {
            poly_add(ac, &bc, 1.0);
        }
        Ok(Self::from_polys(self.nvars, self.value_shape.clone(), a))
    }

    pub fn scale(&self, s: f64) -> PolyFunction {
        let mut out = self.clone();
        out.coefficients.iter_mut().flatten().for_each(|c| *c *= s);
        out
    }

    /// Product of a scalar function with this function.
    pub fn mul_scalar(&self, f: &PolyFunction) -> Result<PolyFunction> {
        if !f.is_scalar() {
            return domain("the left factor of a product must be scalar");
        }
        let fp = f.component_poly(0);
        let comps = self.polys().iter().map(|c| poly_mul(&fp, c)).collect();
        Ok(Self::from_polys(self.nvars.max(f.nvars), self.value_shape.clone(), comps))
    }

    fn check_compatible(&self, other: &PolyFunction) -> Result<()> {
        if self.value_shape != other.value_shape {
            return domain(format!(
                "value shapes {:?} and {:?} differ",
                self.value_shape, other.value_shape
            ));
        }
        Ok(())
    }

    /// Partial derivative along axis `dir`. On the pyramid the quotient rule raises the
    /// denominator power.
    pub fn derivative(&self, dir: usize) -> Result<PolyFunction> {
        if dir >= self.nvars {
            return domain(format!("direction {dir} out of range for {} variables", self.nvars));
        }
        let comps = self
            .polys()
            .iter()
            .map(|c| {
                let mut out = Poly::new();
                for (t, v) in c {
                    if t.p[dir] > 0 {
                        let mut p = t.p;
                        p[dir] -= 1;
                        *out.entry(Term::new(p, t.e)).or_insert(0.0) += v * t.p[dir] as f64;
                    }
                    if dir == 2 && t.e > 0 {
                        *out.entry(Term::new(t.p, t.e + 1)).or_insert(0.0) += v * t.e as f64;
                    }
                }
                out
            })
            .collect();
        Ok(Self::from_polys(self.nvars, self.value_shape.clone(), comps))
    }

    pub fn grad(&self) -> Result<PolyFunction> {
        if !self.is_scalar() {
            return domain("grad requires a scalar function");
        }
        let parts: Vec<PolyFunction> =
            (0..self.nvars).map(|d| self.derivative(d)).collect::<Result<_>>()?;
        Self::vector(&parts)
    }

    pub fn div(&self) -> Result<PolyFunction> {
        if self.value_shape != [self.nvars] {
            return domain(format!("div requires value shape ({})", self.nvars));
        }
        let mut acc = PolyFunction::zero(self.nvars, vec![]);
        for d in 0..self.nvars {
            acc = acc.add(&self.component(d).derivative(d)?)?;
        }
        Ok(acc)
    }

    /// Scalar curl `d f1/dx - d f0/dy`.
    pub fn curl2d(&self) -> Result<PolyFunction> {
        if self.value_shape != [2] || self.nvars != 2 {
            return domain("curl2d requires a 2-vector field in two variables");
        }
        self.component(1)
            .derivative(0)?
            .add(&self.component(0).derivative(1)?.scale(-1.0))
    }

    pub fn curl3d(&self) -> Result<PolyFunction> {
        if self.value_shape != [3] || self.nvars != 3 {
            return domain("curl3d requires a 3-vector field in three variables");
        }
        let d = |c: usize, dir: usize| self.component(c).derivative(dir);
        let parts = [
            d(2, 1)?.add(&d(1, 2)?.scale(-1.0))?,
            d(0, 2)?.add(&d(2, 0)?.scale(-1.0))?,
            d(1, 0)?.add(&d(0, 1)?.scale(-1.0))?,
        ];
        Self::vector(&parts)
    }

    /// `f ∘ map`, expanded over the source variables of `map`.
    pub fn compose_affine(&self, map: &AffineMap) -> Result<PolyFunction> {
        if map.target_dim() < self.nvars {
            return domain("affine map target dimension is smaller than the function arity");
        }
        if self.has_denominator() {
            return crate::error::capability("rationomials can only be evaluated, not composed");
        }
        let m = map.source_dim();
        // Each variable as an affine form in the source variables.
        let forms: Vec<Poly> = (0..self.nvars)
            .map(|i| {
                let mut f = Poly::new();
                if map.origin[i] != 0.0 {
                    f.insert(Term::ONE, map.origin[i]);
                }
                for (j, axis) in map.axes.iter().enumerate() {
                    if axis[i] != 0.0 {
                        let mut p = [0; 3];
                        p[j] = 1;
                        *f.entry(Term::new(p, 0)).or_insert(0.0) += axis[i];
                    }
                }
                f
            })
            .collect();
        let mut powers: Vec<Vec<Poly>> = forms
            .iter()
            .map(|f| vec![Poly::from([(Term::ONE, 1.0)]), f.clone()])
            .collect();
        let mut power = |i: usize, k: usize| -> Poly {
            while powers[i].len() <= k {
                let next = poly_mul(powers[i].last().expect("nonempty"), &forms[i]);
                powers[i].push(next);
            }
            powers[i][k].clone()
        };
        let mut comps = vec![Poly::new(); self.value_size()];
        for (j, t) in self.terms.iter().enumerate() {
            if self.coefficients.iter().all(|c| c[j] == 0.0) {
                continue;
            }
            let mut prod = Poly::from([(Term::ONE, 1.0)]);
            for i in 0..self.nvars {
                if t.p[i] > 0 {
                    prod = poly_mul(&prod, &power(i, t.p[i] as usize));
                }
            }
            for (c, comp) in comps.iter_mut().enumerate() {
                let a = self.coefficients[c][j];
                if a != 0.0 {
                    poly_add(comp, &prod, a);
                }
            }
        }
        for comp in comps.iter_mut() {
            comp.retain(|_, v| v.abs() > 1e-15);
        }
        Ok(Self::from_polys(m, self.value_shape.clone(), comps))
    }

    /// Restriction to a sub-entity through its (affine) entity map.
    pub fn restrict(&self, map: &AffineMap) -> Result<PolyFunction> {
        self.compose_affine(map)
    }

    /// Applies a constant matrix to the flattened value: `v -> m v`.
    pub fn apply_matrix(&self, m: &DMatrix<f64>, value_shape: Vec<usize>) -> Result<PolyFunction> {
        if m.ncols() != self.value_size() || m.nrows() != value_shape.iter().product::<usize>() {
            return domain("matrix does not match the value size");
        }
        let src = self.polys();
        let comps = (0..m.nrows())
            .map(|r| {
                let mut acc = Poly::new();
                for (c, p) in src.iter().enumerate() {
                    if m[(r, c)] != 0.0 {
                        poly_add(&mut acc, p, m[(r, c)]);
                    }
                }
                acc
            })
            .collect();
        Ok(Self::from_polys(self.nvars, value_shape, comps))
    }

    /// Text form such as `2 * x^2 y - 0.5 * z / (1-z)^2`; vectors are bracketed.
    pub fn to_text(&self) -> String {
        let comps: Vec<String> = (0..self.value_size())
            .map(|c| poly_text(&self.component_poly(c)))
            .collect();
        if self.is_scalar() {
            comps.into_iter().next().unwrap_or_else(|| "0".into())
        } else {
            format!("({})", comps.join(", "))
        }
    }
}

fn poly_text(p: &Poly) -> String {
    const VARS: [&str; 3] = ["x", "y", "z"];
    let mut out = String::new();
    for (t, &c) in p.iter().filter(|(_, c)| c.abs() > 1e-14) {
        let mut factors: Vec<String> = Vec::new();
        for (i, &pi) in t.p.iter().enumerate() {
            match pi {
                0 => {}
                1 => factors.push(VARS[i].to_string()),
                _ => factors.push(format!("{}^{}", VARS[i], pi)),
            }
        }
        let mut body = factors.join(" ");
        let mag = format_sig(c.abs(), 15);
        if body.is_empty() {
            body = mag;
        } else if mag != "1" {
            body = format!("{mag} * {body}");
        }
        if t.e > 0 {
            body = if t.e == 1 {
                format!("{body} / (1-z)")
            } else {
                format!("{body} / (1-z)^{}", t.e)
            };
        }
        if out.is_empty() {
            if c < 0.0 {
                out.push('-');
            }
        } else {
            out.push_str(if c < 0.0 { " - " } else { " + " });
        }
        out.push_str(&body);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

/// An ordered, linearly independent sequence of functions on a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySet {
    cell: ReferenceCell,
    value_shape: Vec<usize>,
    functions: Vec<PolyFunction>,
}

impl PolySet {
    /// Builds a set, rejecting dependent or inconsistently shaped functions.
    pub fn new(cell: ReferenceCell, value_shape: Vec<usize>, functions: Vec<PolyFunction>) -> Result<Self> {
        let set = Self::unchecked(cell, value_shape, functions)?;
        let r = set.rank();
        if r != set.functions.len() {
            return domain(format!(
                "functions are linearly dependent (rank {r} of {})",
                set.functions.len()
            ));
        }
        Ok(set)
    }

    /// A basis (in reduced row echelon form over the term coefficients) of the span of
    /// `functions`.
    pub fn spanning(cell: ReferenceCell, value_shape: Vec<usize>, functions: Vec<PolyFunction>) -> Result<Self> {
        let set = Self::unchecked(cell, value_shape, functions)?;
        if set.functions.iter().any(|f| f.has_denominator()) {
            return crate::error::capability("rationomial sets cannot be reduced symbolically");
        }
        let (terms, m) = set.coefficient_matrix();
        let r = linalg::rank(&m, 1e-12);
        let basis = linalg::row_space_rref(&m, r);
        let s = set.value_shape.iter().product::<usize>();
        let nvars = set.cell.tdim();
        let functions = (0..basis.nrows())
            .map(|i| {
                let comps = (0..s)
                    .map(|c| {
                        terms
                            .iter()
                            .enumerate()
                            .map(|(j, t)| (*t, basis[(i, c * terms.len() + j)]))
                            .filter(|(_, v)| *v != 0.0)
                            .collect()
                    })
                    .collect();
                PolyFunction::from_polys(nvars, set.value_shape.clone(), comps)
            })
            .collect();
        Ok(Self {
            cell: set.cell,
            value_shape: set.value_shape,
            functions,
        })
    }

    fn unchecked(cell: ReferenceCell, value_shape: Vec<usize>, functions: Vec<PolyFunction>) -> Result<Self> {
        if let Some(f) = functions.iter().find(|f| f.value_shape != value_shape) {
            return domain(format!(
                "function value shape {:?} differs from the set's {value_shape:?}",
                f.value_shape
            ));
        }
        if functions.iter().any(|f| f.nvars > cell.tdim()) {
            return domain("function arity exceeds the cell dimension");
        }
        Ok(Self {
            cell,
            value_shape,
            functions,
        })
    }

    pub(crate) fn from_parts(cell: ReferenceCell, value_shape: Vec<usize>, functions: Vec<PolyFunction>) -> Self {
        Self {
            cell,
            value_shape,
            functions,
        }
    }

    pub fn empty(cell: ReferenceCell, value_shape: Vec<usize>) -> Self {
        Self {
            cell,
            value_shape,
            functions: Vec::new(),
        }
    }

    pub fn cell(&self) -> &ReferenceCell {
        &self.cell
    }

    pub fn functions(&self) -> &[PolyFunction] {
        &self.functions
    }

    pub fn into_functions(self) -> Vec<PolyFunction> {
        self.functions
    }

    /// Coefficients with one function per row; column `c * nterms + j` holds component
    /// `c` of term `j` of the merged term list.
    pub fn coefficient_matrix(&self) -> (Vec<Term>, DMatrix<f64>) {
        let mut all = Poly::new();
        for f in &self.functions {
            for t in &f.terms {
                all.insert(*t, 0.0);
            }
        }
        let terms: Vec<Term> = all.keys().copied().collect();
        let s = self.value_shape.iter().product::<usize>();
        let nt = terms.len();
        let mut m = DMatrix::zeros(self.functions.len(), s * nt);
        for (i, f) in self.functions.iter().enumerate() {
            for (j, t) in f.terms.iter().enumerate() {
                let col = terms.binary_search(t).expect("term is in the merged list");
                for c in 0..s {
                    m[(i, c * nt + col)] = f.coefficients[c][j];
                }
            }
        }
        (terms, m)
    }

    /// Rank of the set. Rationomial terms are not independent as functions, so sets with
    /// denominators are ranked by evaluation on a lattice instead of by coefficients.
    pub fn rank(&self) -> usize {
        if self.functions.is_empty() {
            return 0;
        }
        if self.functions.iter().any(|f| f.has_denominator()) {
            let n = 2 * self.lattice_degree() + 4;
            let pts = self.cell.lattice_points(n, true);
            match self.tabulate(&pts) {
                Ok(t) => linalg::rank(&t.function_rows(), 1e-10),
                Err(_) => 0,
            }
        } else {
            linalg::rank(&self.coefficient_matrix().1, 1e-12)
        }
    }
}

impl FunctionSet for PolySet {
    fn value_shape(&self) -> Vec<usize> {
        self.value_shape.clone()
    }

    fn len(&self) -> usize {
        self.functions.len()
    }

    fn nvars(&self) -> usize {
        self.cell.tdim()
    }

    fn degree(&self) -> usize {
        self.functions.iter().map(|f| f.total_degree()).max().unwrap_or(0)
    }

    fn lattice_degree(&self) -> usize {
        if self.cell.kind().is_simplex() {
            self.degree()
        } else {
            self.functions.iter().map(|f| f.max_exponent()).max().unwrap_or(0)
        }
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let s = self.value_size();
        let mut out = Tabulation::zeros(points.len(), self.functions.len(), s);
        for (p, x) in points.iter().enumerate() {
            for (f, func) in self.functions.iter().enumerate() {
                let v = func.eval(x)?;
                out.value_mut(p, f).copy_from_slice(&v);
            }
        }
        Ok(out)
    }
}
