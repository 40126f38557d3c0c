//! Tables of function values and the trait for anything that can fill one.

use crate::error::Result;
use nalgebra::DMatrix;

/// Values of `nfunctions` functions at `npoints` points, each with `value_size`
/// components, stored point-major: `data[(p * nfunctions + f) * value_size + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulation {
    pub npoints: usize,
    pub nfunctions: usize,
    pub value_size: usize,
    pub data: Vec<f64>,
}

impl Tabulation {
    pub fn zeros(npoints: usize, nfunctions: usize, value_size: usize) -> Self {
        Self {
            npoints,
            nfunctions,
            value_size,
            data: vec![0.0; npoints * nfunctions * value_size],
        }
    }

    #[inline]
    fn offset(&self, p: usize, f: usize) -> usize {
        (p * self.nfunctions + f) * self.value_size
    }

    #[inline]
    pub fn get(&self, p: usize, f: usize, c: usize) -> f64 {
        self.data[self.offset(p, f) + c]
    }

    #[inline]
    pub fn set(&mut self, p: usize, f: usize, c: usize, v: f64) {
        let o = self.offset(p, f);
        self.data[o + c] = v;
    }

    /// All components of function `f` at point `p`.
    pub fn value(&self, p: usize, f: usize) -> &[f64] {
        let o = self.offset(p, f);
        &self.data[o..o + self.value_size]
    }

    pub fn value_mut(&mut self, p: usize, f: usize) -> &mut [f64] {
        let o = self.offset(p, f);
        let s = self.value_size;
        &mut self.data[o..o + s]
    }

    /// One function per row, columns ordered point-major then component.
    pub fn function_rows(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.nfunctions, self.npoints * self.value_size, |f, col| {
            let (p, c) = (col / self.value_size, col % self.value_size);
            self.get(p, f, c)
        })
    }

    /// Table whose functions are `coeffs * self` (coeffs is `new_n x nfunctions`).
    pub fn recombine(&self, coeffs: &DMatrix<f64>) -> Tabulation {
        assert_eq!(coeffs.ncols(), self.nfunctions);
        let mut out = Tabulation::zeros(self.npoints, coeffs.nrows(), self.value_size);
        for p in 0..self.npoints {
            for i in 0..coeffs.nrows() {
                for j in 0..self.nfunctions {
                    let a = coeffs[(i, j)];
                    if a == 0.0 {
                        continue;
                    }
                    for c in 0..self.value_size {
                        let v = self.get(p, j, c);
                        let o = out.offset(p, i) + c;
                        out.data[o] += a * v;
                    }
                }
            }
        }
        out
    }

    /// Concatenate tables over the same functions along the point axis.
    pub fn concat_points(parts: Vec<Tabulation>) -> Option<Tabulation> {
        let first = parts.first()?;
        let (nf, vs) = (first.nfunctions, first.value_size);
        let mut out = Tabulation {
            npoints: 0,
            nfunctions: nf,
            value_size: vs,
            data: Vec::new(),
        };
        for t in parts {
            assert_eq!((t.nfunctions, t.value_size), (nf, vs));
            out.npoints += t.npoints;
            out.data.extend(t.data);
        }
        Some(out)
    }
}

/// An ordered, evaluable family of functions on a cell.
pub trait FunctionSet: Sync {
    fn value_shape(&self) -> Vec<usize>;

    fn value_size(&self) -> usize {
        self.value_shape().iter().product()
    }

    /// Number of functions.
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of coordinates a point must have.
    fn nvars(&self) -> usize;

    /// Largest total polynomial degree, used to size quadrature rules.
    fn degree(&self) -> usize;

    /// Per-direction (Lagrange) degree, used to size evaluation lattices.
    fn lattice_degree(&self) -> usize {
        self.degree()
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation>;
}
