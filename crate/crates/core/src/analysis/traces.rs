//! Controlled and uncontrolled trace spaces on sub-entities.
//!
//! Restrictions of basis functions to an entity are expanded in an orthonormal basis of
//! the entity's natural space, so the Euclidean inner product of coefficient rows is the
//! L2 inner product on the entity. At a vertex the "restriction" is the value tuple and
//! the inner product is the dot product.

use crate::cells::{CellKind, EntityRef, ReferenceCell};
use crate::elements::CiarletElement;
use crate::error::{capability, Result};
use crate::polyset::{OrthonormalBasis, PolyFunction, PolySet};
use crate::quadrature::cell_rule;
use crate::tabulation::{FunctionSet, Tabulation};
use crate::verify::DEFAULT_RANK_TOLERANCE;
use nalgebra::DMatrix;
use serde::Serialize;

/// Functions on the reference cell of an entity, stored as coefficient rows over an
/// orthonormal basis (column `c * m + j` is component `c` of basis function `j`).
#[derive(Debug, Clone)]
pub struct TraceSet {
    domain: ReferenceCell,
    value_shape: Vec<usize>,
    basis: Option<OrthonormalBasis>,
    coeffs: DMatrix<f64>,
}

impl TraceSet {
    /// The canonical reference cell of the entity, on which these functions live.
    pub fn domain(&self) -> &ReferenceCell {
        &self.domain
    }

    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    fn basis_len(&self) -> usize {
        self.basis.as_ref().map_or(1, |b| b.len())
    }

    /// `[<f_i, g_j>]` on the entity.
    pub fn cross_gram(&self, other: &TraceSet) -> DMatrix<f64> {
        &self.coeffs * other.coeffs.transpose()
    }

    /// Monomial form in reduced row echelon order, for display.
    pub fn to_polyset(&self) -> Result<PolySet> {
        let s = self.value_size();
        let nvars = self.domain.tdim();
        let scalars: Vec<PolyFunction> = match &self.basis {
            Some(b) => b.to_polyset()?.into_functions(),
            None => vec![PolyFunction::constant(0, 1.0)],
        };
        let m = scalars.len();
        let mut funcs = Vec::with_capacity(self.len());
        for i in 0..self.len() {
            let comps = (0..s)
                .map(|c| {
                    let mut acc = PolyFunction::zero(nvars, vec![]);
                    for (j, q) in scalars.iter().enumerate() {
                        let a = self.coeffs[(i, c * m + j)];
                        if a != 0.0 {
                            acc = acc.add(&q.scale(a))?;
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<Vec<_>>>()?;
            funcs.push(if self.value_shape.is_empty() {
                comps.into_iter().next().expect("one component")
            } else {
                let mut v = PolyFunction::vector(&comps)?;
                v.value_shape = self.value_shape.clone();
                v
            });
        }
        PolySet::spanning(self.domain.clone(), self.value_shape.clone(), funcs)
    }

    /// Text form of every function of the reduced basis.
    pub fn describe(&self) -> Result<Vec<String>> {
        Ok(self.to_polyset()?.functions().iter().map(|f| f.to_text()).collect())
    }
}

impl FunctionSet for TraceSet {
    fn value_shape(&self) -> Vec<usize> {
        self.value_shape.clone()
    }

    fn len(&self) -> usize {
        self.coeffs.nrows()
    }

    fn nvars(&self) -> usize {
        self.domain.tdim()
    }

    fn degree(&self) -> usize {
        self.basis.as_ref().map_or(0, |b| b.degree())
    }

    fn lattice_degree(&self) -> usize {
        self.basis.as_ref().map_or(0, |b| b.lattice_degree())
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let s = self.value_size();
        let m = self.basis_len();
        let q = match &self.basis {
            Some(b) => b.tabulate(points)?,
            None => Tabulation {
                npoints: points.len(),
                nfunctions: 1,
                value_size: 1,
                data: vec![1.0; points.len()],
            },
        };
        let mut out = Tabulation::zeros(points.len(), self.len(), s);
        for p in 0..points.len() {
            for i in 0..self.len() {
                for c in 0..s {
                    let v = (0..m).map(|j| self.coeffs[(i, c * m + j)] * q.get(p, j, 0)).sum();
                    out.set(p, i, c, v);
                }
            }
        }
        Ok(out)
    }
}

/// Both trace spaces of an element on one entity.
#[derive(Debug, Clone)]
pub struct TraceSpaces {
    pub entity: EntityRef,
    pub entity_kind: CellKind,
    /// Dimension of the space of all restrictions to the entity.
    pub restricted_dim: usize,
    uncontrolled: TraceSet,
    controlled: TraceSet,
}

impl TraceSpaces {
    pub fn uncontrolled(&self) -> &TraceSet {
        &self.uncontrolled
    }

    pub fn controlled(&self) -> &TraceSet {
        &self.controlled
    }

    /// Text summary for reports.
    pub fn summary(&self) -> Result<TraceSummary> {
        Ok(TraceSummary {
            dim: self.entity.dim,
            index: self.entity.index,
            entity_kind: self.entity_kind.name().to_string(),
            restricted_dim: self.restricted_dim,
            uncontrolled_dim: self.uncontrolled.len(),
            controlled_dim: self.controlled.len(),
            uncontrolled: self.uncontrolled.describe()?,
            controlled: self.controlled.describe()?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceSummary {
    pub dim: usize,
    pub index: usize,
    pub entity_kind: String,
    pub restricted_dim: usize,
    pub uncontrolled_dim: usize,
    pub controlled_dim: usize,
    pub uncontrolled: Vec<String>,
    pub controlled: Vec<String>,
}

/// Restrictions of every basis function to `e`, one coefficient row per function.
fn restrictions(el: &CiarletElement, e: EntityRef) -> Result<(ReferenceCell, Option<OrthonormalBasis>, DMatrix<f64>)> {
    let cell = el.cell();
    if cell.kind() == CellKind::Pyramid {
        return capability("trace spaces are not available on the pyramid");
    }
    let s = el.value_size();
    if e.dim == 0 {
        let v = cell.entity_vertices(e)?[0];
        let t = el.tabulate(&[cell.vertices()[v].clone()])?;
        let mut r = DMatrix::zeros(el.dim(), s);
        for i in 0..el.dim() {
            for c in 0..s {
                r[(i, c)] = t.get(0, i, c);
            }
        }
        return Ok((ReferenceCell::new(CellKind::Point), None, r));
    }
    let kind = cell.entity_kind(e)?;
    let map = cell.entity_map(e)?;
    let domain = ReferenceCell::new(kind);
    let k = el.superdegree();
    let basis = OrthonormalBasis::new(&domain, k)?;
    let rule = cell_rule(kind, 2 * k + 2);
    let mapped: Vec<Vec<f64>> = rule.points.iter().map(|p| map.apply(p)).collect();
    let t = el.tabulate(&mapped)?;
    let q = basis.tabulate(&rule.points)?;
    let m = basis.len();
    let mut r = DMatrix::zeros(el.dim(), s * m);
    for (p, w) in rule.weights.iter().enumerate() {
        for i in 0..el.dim() {
            for c in 0..s {
                let v = w * t.get(p, i, c);
                if v == 0.0 {
                    continue;
                }
                for j in 0..m {
                    r[(i, c * m + j)] += v * q.get(p, j, 0);
                }
            }
        }
    }
    Ok((domain, Some(basis), r))
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

/// Orthonormal basis (as rows) of the row space of `m`, counting singular values above
/// `tol * scale`.
fn orthonormal_rows(m: &DMatrix<f64>, tol: f64, scale: f64) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 || scale == 0.0 {
        return DMatrix::zeros(0, m.ncols());
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > tol * scale)
        .collect();
    select_rows(&v_t, &keep)
}

fn largest_singular_value(m: &DMatrix<f64>) -> f64 {
    crate::linalg::singular_values(m).first().copied().unwrap_or(0.0)
}

/// Trace spaces of `el` on `e` with the default rank tolerance.
pub fn trace_spaces(el: &CiarletElement, e: EntityRef) -> Result<TraceSpaces> {
    trace_spaces_with(el, e, DEFAULT_RANK_TOLERANCE)
}

/// The uncontrolled trace spans the restrictions of basis functions whose DOFs are not
/// associated with the closure of `e`; the controlled trace is the orthogonal complement
/// of it in the space of all restrictions, spanned by the projected restrictions of the
/// closure-associated basis functions.
pub fn trace_spaces_with(el: &CiarletElement, e: EntityRef, tol: f64) -> Result<TraceSpaces> {
    let cell = el.cell();
    let entity_kind = cell.entity_kind(e)?;
    let closure = cell.entity_closure(e)?;
    let (domain, basis, r) = restrictions(el, e)?;
    let (inside, outside): (Vec<usize>, Vec<usize>) =
        (0..el.dim()).partition(|&i| closure.contains(&el.functionals()[i].entity));
    let scale = largest_singular_value(&r);
    let unc = orthonormal_rows(&select_rows(&r, &outside), tol, scale);
    let closure_rows = select_rows(&r, &inside);
    let projected = &closure_rows - (&closure_rows * unc.transpose()) * &unc;
    let ctrl = orthonormal_rows(&projected, tol, scale);
    let restricted_dim = crate::linalg::rank_with_scale(&r, tol, scale);
    let shape = el.value_shape();
    let make = |coeffs| TraceSet {
        domain: domain.clone(),
        value_shape: shape.clone(),
        basis: basis.clone(),
        coeffs,
    };
    Ok(TraceSpaces {
        entity: e,
        entity_kind,
        restricted_dim,
        uncontrolled: make(unc),
        controlled: make(ctrl),
    })
}

pub fn uncontrolled_trace(el: &CiarletElement, e: EntityRef) -> Result<TraceSet> {
    Ok(trace_spaces(el, e)?.uncontrolled)
}

pub fn controlled_trace(el: &CiarletElement, e: EntityRef) -> Result<TraceSet> {
    Ok(trace_spaces(el, e)?.controlled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{make_family, Family};

    #[test]
    fn rt1_edge_two() {
        let el = make_family(Family::RaviartThomas, CellKind::Triangle, 1, None).unwrap();
        let t = trace_spaces(&el, EntityRef::new(1, 2)).unwrap();
        assert_eq!(t.restricted_dim, 5);
        assert_eq!(t.uncontrolled().describe().unwrap(), vec!["(1, 0)", "(x, 0)", "(x^2, 0)"]);
        assert_eq!(t.controlled().describe().unwrap(), vec!["(0, 1)", "(0, x)"]);
    }

    #[test]
    fn lagrange_and_dg_traces() {
        let el = make_family(Family::Lagrange, CellKind::Triangle, 3, None).unwrap();
        for e in el.cell().sub_entities() {
            let t = trace_spaces(&el, e).unwrap();
            assert_eq!(t.uncontrolled().len(), 0, "{e}");
            assert_eq!(t.controlled().len(), t.restricted_dim);
        }
        let edge = trace_spaces(&el, EntityRef::new(1, 0)).unwrap();
        assert_eq!(edge.controlled().len(), 4);
        let p1 = make_family(Family::Lagrange, CellKind::Interval, 2, None).unwrap();
        let v = trace_spaces(&p1, EntityRef::new(0, 1)).unwrap();
        assert_eq!(v.controlled().describe().unwrap(), vec!["1"]);
        let dg = make_family(Family::DiscontinuousLagrange, CellKind::Triangle, 2, None).unwrap();
        let f = trace_spaces(&dg, EntityRef::new(1, 1)).unwrap();
        assert_eq!((f.uncontrolled().len(), f.controlled().len()), (3, 0));
        let v = trace_spaces(&dg, EntityRef::new(0, 0)).unwrap();
        assert_eq!(v.controlled().len(), 0);
    }
}
