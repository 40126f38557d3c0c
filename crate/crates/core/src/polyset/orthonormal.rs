//! Orthonormal bases of natural spaces.
//!
//! The starting functions are products of orthonormal shifted Legendre polynomials over
//! the natural index set rather than plain monomials: they are already orthogonal on
//! tensor cells and far better conditioned on simplices, and they can be evaluated by the
//! three-term recurrence. Modified Gram-Schmidt (run twice) against a quadrature inner
//! product then makes them orthonormal on the cell.

use super::{natural_indices, Poly, PolyFunction, PolySet, Term};
use crate::cells::{AffineMap, CellKind, ReferenceCell};
use crate::error::{capability, Result};
use crate::quadrature::cell_rule;
use crate::tabulation::{FunctionSet, Tabulation};
use nalgebra::DMatrix;

/// Values `L_0(x), ..., L_n(x)` of the orthonormal shifted Legendre polynomials on
/// `[0, 1]`, `L_j(x) = sqrt(2j + 1) P_j(2x - 1)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let t = 2.0 * x - 1.0;
    let mut p = Vec::with_capacity(n + 1);
    p.push(1.0);
    if n >= 1 {
        p.push(t);
    }
    for j in 1..n {
        let next = ((2 * j + 1) as f64 * t * p[j] - j as f64 * p[j - 1]) / (j + 1) as f64;
        p.push(next);
    }
    p.iter()
        .enumerate()
        .map(|(j, v)| v * ((2 * j + 1) as f64).sqrt())
        .collect()
}

/// Monomial coefficients of `L_0, ..., L_n` in one variable.
fn legendre_monomials(n: usize) -> Vec<Vec<f64>> {
    // P_j(t) with t = 2x - 1, expanded in x.
    let mut p: Vec<Vec<f64>> = vec![vec![1.0]];
    if n >= 1 {
        p.push(vec![-1.0, 2.0]);
    }
    for j in 1..n {
        let mut next = vec![0.0; j + 2];
        let a = (2 * j + 1) as f64 / (j + 1) as f64;
        let b = j as f64 / (j + 1) as f64;
        for (i, c) in p[j].iter().enumerate() {
            next[i] -= a * c;
            next[i + 1] += 2.0 * a * c;
        }
        for (i, c) in p[j - 1].iter().enumerate() {
            next[i] -= b * c;
        }
        p.push(next);
    }
    p.into_iter()
        .enumerate()
        .map(|(j, c)| c.into_iter().map(|v| v * ((2 * j + 1) as f64).sqrt()).collect())
        .collect()
}

/// Products `prod_i L_{a_i}(x_i)` in the canonical coordinates of a cell, for an
/// arbitrary set of multi-indices. With total-degree indices this is a well conditioned
/// basis of the complete space on any cell.
#[derive(Debug, Clone)]
pub struct LegendreSet {
    cell: ReferenceCell,
    indices: Vec<[u32; 3]>,
    pullback: Option<AffineMap>,
}

impl LegendreSet {
    pub fn new(cell: &ReferenceCell, indices: Vec<[u32; 3]>) -> Result<Self> {
        let pullback = if cell.is_canonical() {
            None
        } else {
            Some(cell.reference_map().inverse()?)
        };
        Ok(Self {
            cell: cell.clone(),
            indices,
            pullback,
        })
    }

    /// The natural degree-`k` index set of the cell.
    pub fn natural(cell: &ReferenceCell, k: usize) -> Result<Self> {
        if cell.kind() == CellKind::Pyramid {
            return capability("Legendre product sets are not defined on the pyramid");
        }
        Self::new(cell, natural_indices(cell.kind(), k))
    }

    /// Total-degree-`k` indices: a basis of the complete space on any cell.
    pub fn complete(cell: &ReferenceCell, k: usize) -> Result<Self> {
        let kind = match cell.tdim() {
            0 => CellKind::Point,
            1 => CellKind::Interval,
            2 => CellKind::Triangle,
            _ => CellKind::Tetrahedron,
        };
        Self::new(cell, natural_indices(kind, k))
    }

    pub fn indices(&self) -> &[[u32; 3]] {
        &self.indices
    }

    fn max_index(&self) -> usize {
        self.indices
            .iter()
            .flat_map(|p| p.iter())
            .copied()
            .max()
            .unwrap_or(0) as usize
    }

    /// Values at canonical coordinates, one row per function, one column per point.
    pub(crate) fn values_canonical(&self, points: &[Vec<f64>]) -> DMatrix<f64> {
        let tdim = self.cell.tdim();
        let n = self.max_index();
        let mut out = DMatrix::zeros(self.indices.len(), points.len());
        for (j, x) in points.iter().enumerate() {
            let lv: Vec<Vec<f64>> = (0..tdim).map(|d| legendre_values(n, x[d])).collect();
            for (i, p) in self.indices.iter().enumerate() {
                let mut v = 1.0;
                for d in 0..tdim {
                    v *= lv[d][p[d] as usize];
                }
                out[(i, j)] = v;
            }
        }
        out
    }

    pub(crate) fn canonical_points(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match &self.pullback {
            None => points.to_vec(),
            Some(m) => points.iter().map(|x| m.apply(x)).collect(),
        }
    }

    /// Monomial expansions over canonical coordinates.
    fn canonical_polys(&self) -> Vec<Poly> {
        let tdim = self.cell.tdim();
        let lm = legendre_monomials(self.max_index());
        self.indices
            .iter()
            .map(|p| {
                let mut acc = Poly::from([(Term::ONE, 1.0)]);
                for d in 0..tdim {
                    let mut factor = Poly::new();
                    for (e, c) in lm[p[d] as usize].iter().enumerate() {
                        let mut q = [0; 3];
                        q[d] = e as u32;
                        factor.insert(Term::new(q, 0), *c);
                    }
                    acc = super::poly_mul(&acc, &factor);
                }
                acc
            })
            .collect()
    }
}

impl FunctionSet for LegendreSet {
    fn value_shape(&self) -> Vec<usize> {
        vec![]
    }

    fn len(&self) -> usize {
        self.indices.len()
    }

    fn nvars(&self) -> usize {
        self.cell.tdim()
    }

    fn degree(&self) -> usize {
        self.indices
            .iter()
            .map(|p| p.iter().sum::<u32>() as usize)
            .max()
            .unwrap_or(0)
    }

    fn lattice_degree(&self) -> usize {
        if self.cell.kind().is_simplex() {
            self.degree()
        } else {
            self.max_index()
        }
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let v = self.values_canonical(&self.canonical_points(points));
        Ok(Tabulation {
            npoints: points.len(),
            nfunctions: self.indices.len(),
            value_size: 1,
            // Column-major storage of a function-by-point matrix is point-major.
            data: v.as_slice().to_vec(),
        })
    }
}

/// Orthonormal basis (in the cell's L2 inner product) of the natural degree-`k` space,
/// ordered so that the first functions span the lower-degree natural spaces.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    start: LegendreSet,
    degree: usize,
    /// Row `i` holds the coefficients of function `i` over the Legendre products.
    coeffs: DMatrix<f64>,
    scale: f64,
}

impl OrthonormalBasis {
    pub fn new(cell: &ReferenceCell, k: usize) -> Result<Self> {
        let kind = cell.kind();
        if kind == CellKind::Pyramid {
            return capability("orthonormal bases are not available on the pyramid");
        }
        let start = LegendreSet::natural(cell, k)?;
        let rule = cell_rule(kind, 2 * k);
        let v = start.values_canonical(&rule.points);
        let m = start.len();
        let w = &rule.weights;
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).zip(w).map(|((x, y), z)| x * y * z).sum() };
        let mut vals: Vec<Vec<f64>> = (0..m).map(|i| v.row(i).iter().copied().collect()).collect();
        let mut coeffs = DMatrix::<f64>::identity(m, m);
        for i in 0..m {
            for _pass in 0..2 {
                for j in 0..i {
                    let r = dot(&vals[i], &vals[j]);
                    let (vj, vi) = (vals[j].clone(), &mut vals[i]);
                    vi.iter_mut().zip(&vj).for_each(|(a, b)| *a -= r * b);
                    let cj = coeffs.row(j).clone_owned();
                    let mut ci = coeffs.row_mut(i);
                    ci -= cj * r;
                }
            }
            let norm = dot(&vals[i], &vals[i]).sqrt();
            vals[i].iter_mut().for_each(|a| *a /= norm);
            coeffs.row_mut(i).scale_mut(1.0 / norm);
        }
        let det = cell.reference_map().jacobian().determinant().abs();
        let scale = if cell.tdim() == 0 { 1.0 } else { 1.0 / det.sqrt() };
        Ok(Self {
            start,
            degree: k,
            coeffs,
            scale,
        })
    }

    pub fn cell(&self) -> &ReferenceCell {
        &self.start.cell
    }

    /// The natural degree of the space this basis spans.
    pub fn natural_degree(&self) -> usize {
        self.degree
    }

    /// Monomial expansion of every basis function (for symbolic work such as
    /// differentiation; tabulation uses the recurrence instead).
    pub fn to_polyset(&self) -> Result<PolySet> {
        let cell = self.cell().clone();
        let tdim = cell.tdim();
        let base = self.start.canonical_polys();
        let mut funcs = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let mut acc = Poly::new();
            for (j, p) in base.iter().enumerate() {
                let c = self.coeffs[(i, j)] * self.scale;
                if c != 0.0 {
                    super::poly_add(&mut acc, p, c);
                }
            }
            acc.retain(|_, v| v.abs() > 1e-14);
            let f = PolyFunction::from_polys(tdim, vec![], vec![acc]);
            funcs.push(match &self.start.pullback {
                None => f,
                Some(m) => f.compose_affine(m)?,
            });
        }
        Ok(PolySet::from_parts(cell, vec![], funcs))
    }
}

impl FunctionSet for OrthonormalBasis {
    fn value_shape(&self) -> Vec<usize> {
        vec![]
    }

    fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    fn nvars(&self) -> usize {
        self.start.cell.tdim()
    }

    fn degree(&self) -> usize {
        self.start.degree()
    }

    fn lattice_degree(&self) -> usize {
        self.degree
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let v = self.start.values_canonical(&self.start.canonical_points(points));
        let q = (&self.coeffs * v) * self.scale;
        Ok(Tabulation {
            npoints: points.len(),
            nfunctions: self.len(),
            value_size: 1,
            data: q.as_slice().to_vec(),
        })
    }
}
