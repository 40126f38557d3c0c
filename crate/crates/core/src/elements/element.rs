//! Assembly of Ciarlet elements from a space and a set of functionals.

use super::functional::Functional;
use crate::cells::{CellKind, EntityRef, ReferenceCell};
use crate::error::{domain, Error, Result};
use crate::mapping::MapKind;
use crate::numfmt::format_sig;
use crate::polyset::{OrthonormalBasis, PolyFunction, PolySet};
use crate::quadrature::rule_on;
use crate::tabulation::{FunctionSet, Tabulation};
use nalgebra::DMatrix;

/// Smallest accepted `sigma_min / sigma_max` of a dual matrix.
pub const DUAL_SINGULAR_RATIO: f64 = 1e-10;

/// The vector functions `e_c q_j` (index `c * m + j`) built from a scalar set `q`.
pub struct VectorSet<'a> {
    pub scalar: &'a dyn FunctionSet,
    pub value_shape: Vec<usize>,
}

impl FunctionSet for VectorSet<'_> {
    fn value_shape(&self) -> Vec<usize> {
        self.value_shape.clone()
    }

    fn len(&self) -> usize {
        self.value_size() * self.scalar.len()
    }

    fn nvars(&self) -> usize {
        self.scalar.nvars()
    }

    fn degree(&self) -> usize {
        self.scalar.degree()
    }

    fn lattice_degree(&self) -> usize {
        self.scalar.lattice_degree()
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let q = self.scalar.tabulate(points)?;
        let (s, m) = (self.value_size(), q.nfunctions);
        let mut out = Tabulation::zeros(points.len(), s * m, s);
        for p in 0..points.len() {
            for c in 0..s {
                for j in 0..m {
                    out.set(p, c * m + j, c, q.get(p, j, 0));
                }
            }
        }
        Ok(out)
    }
}

/// The dual matrix `D[i][j] = l_j(p_i)` together with its condition number.
#[derive(Debug, Clone, PartialEq)]
pub struct DualMatrix {
    pub entries: DMatrix<f64>,
    pub condition_estimate: f64,
}

/// Builds the dual matrix of `space` (functions on `cell`) and the functionals `ls`,
/// failing when it is singular to working tolerance.
pub fn dual_matrix(cell: &ReferenceCell, space: &dyn FunctionSet, ls: &[Functional]) -> Result<DualMatrix> {
    if ls.len() != space.len() {
        return domain(format!(
            "{} functionals for a space of dimension {}",
            ls.len(),
            space.len()
        ));
    }
    let entries = Functional::action_matrix(ls, cell, space)?.transpose();
    check_dual(entries)
}

/// Orthonormal basis of the row space of a full row rank matrix.
fn orthonormal_rows(c: DMatrix<f64>) -> DMatrix<f64> {
    if c.nrows() == 0 {
        return c;
    }
    let qr = c.transpose().qr();
    qr.q().transpose()
}

fn check_dual(entries: DMatrix<f64>) -> Result<DualMatrix> {
    let n = entries.nrows();
    if n == 0 {
        return Ok(DualMatrix {
            entries,
            condition_estimate: 1.0,
        });
    }
    let svd = entries.clone().svd(false, true);
    let s = &svd.singular_values;
    let (imax, imin) = (s.imax(), s.imin());
    let ratio = if s[imax] > 0.0 { s[imin] / s[imax] } else { 0.0 };
    if ratio < DUAL_SINGULAR_RATIO {
        // D a ~ 0 for the right singular vector a: the combination sum a_j l_j
        // vanishes on the whole space.
        let v_t = svd.v_t.expect("right singular vectors requested");
        let a: Vec<f64> = v_t.row(imin).iter().copied().collect();
        let amax = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut parts = Vec::new();
        for (j, x) in a.iter().enumerate() {
            if x.abs() > 1e-6 * amax {
                parts.push(format!("{}*l{j}", format_sig(*x, 4)));
            }
        }
        return Err(Error::DegenerateElement {
            ratio,
            combination: parts.join(" + ").replace("+ -", "- "),
        });
    }
    Ok(DualMatrix {
        entries,
        condition_estimate: 1.0 / ratio,
    })
}

/// Family name, variant and indexing degree attached to a built element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ElementInfo {
    pub family: String,
    pub variant: Option<String>,
    pub degree: usize,
}

/// A Ciarlet element: cell, space, functionals and the expansion coefficients of the
/// dual basis over an orthonormal generating basis.
#[derive(Debug, Clone)]
pub struct CiarletElement {
    info: ElementInfo,
    cell: ReferenceCell,
    space: PolySet,
    functionals: Vec<Functional>,
    basis: OrthonormalBasis,
    coeffs: DMatrix<f64>,
    value_shape: Vec<usize>,
    map_kind: MapKind,
    entity_dofs: Vec<Vec<Vec<usize>>>,
    dual_condition: f64,
}

/// Assembles an element. `superdegree` is a natural degree whose space contains
/// `space`; the generating basis is the orthonormal basis of that space.
pub fn build_element(
    info: ElementInfo,
    cell: &ReferenceCell,
    space: PolySet,
    functionals: Vec<Functional>,
    map_kind: MapKind,
    superdegree: usize,
) -> Result<CiarletElement> {
    let value_shape = space.value_shape();
    let n = space.len();
    if functionals.len() != n {
        return domain(format!(
            "{} functionals for a space of dimension {n}",
            functionals.len()
        ));
    }
    if let Some(l) = functionals.iter().find(|l| cell.entity_vertices(l.entity).is_err()) {
        return domain(format!("functional associated with missing entity {}", l.entity));
    }
    let basis = OrthonormalBasis::new(cell, superdegree)?;
    let generating = VectorSet {
        scalar: &basis,
        value_shape: value_shape.clone(),
    };
    let s = generating.value_size();
    let m = basis.len();

    // C[i, c m + j] = <p_i[c], q_j>.
    let rule = rule_on(cell, EntityRef::new(cell.tdim(), 0), space.degree() + basis.degree())?;
    let pt = space.tabulate(&rule.points)?;
    let qt = basis.tabulate(&rule.points)?;
    let mut c_mat = DMatrix::zeros(n, s * m);
    for (p, w) in rule.weights.iter().enumerate() {
        for i in 0..n {
            let v = pt.value(p, i);
            for c in 0..s {
                if v[c] == 0.0 {
                    continue;
                }
                for j in 0..m {
                    c_mat[(i, c * m + j)] += w * v[c] * qt.get(p, j, 0);
                }
            }
        }
    }
    // The space must lie in the span of the generating basis.
    let recon = pt.function_rows();
    let mut fitted = DMatrix::zeros(n, rule.points.len() * s);
    for p in 0..rule.points.len() {
        for i in 0..n {
            for c in 0..s {
                fitted[(i, p * s + c)] = (0..m).map(|j| c_mat[(i, c * m + j)] * qt.get(p, j, 0)).sum();
            }
        }
    }
    let scale = recon.abs().max().max(1.0);
    if (&recon - &fitted).abs().max() > 1e-8 * scale {
        return domain(format!(
            "the space is not contained in the natural space of degree {superdegree}"
        ));
    }

    // Any basis of the space gives the same dual basis. An orthonormal one keeps D as
    // well conditioned as the functionals allow, whatever the conditioning of the
    // given (often monomial) basis.
    let c_mat = orthonormal_rows(c_mat);
    let q_actions = Functional::action_matrix(&functionals, cell, &generating)?;
    let dual = check_dual(&c_mat * q_actions.transpose())?;
    let lu = dual.entries.clone().lu();
    let coeffs = lu
        .solve(&c_mat)
        .ok_or_else(|| Error::Domain("dual matrix could not be factorised".into()))?;

    let tdim = cell.tdim();
    let mut entity_dofs: Vec<Vec<Vec<usize>>> =
        (0..=tdim).map(|d| vec![Vec::new(); cell.entity_count(d)]).collect();
    for (i, l) in functionals.iter().enumerate() {
        entity_dofs[l.entity.dim][l.entity.index].push(i);
    }
    Ok(CiarletElement {
        info,
        cell: cell.clone(),
        space,
        functionals,
        basis,
        coeffs,
        value_shape,
        map_kind,
        entity_dofs,
        dual_condition: dual.condition_estimate,
    })
}

impl CiarletElement {
    pub fn info(&self) -> &ElementInfo {
        &self.info
    }

    pub fn family(&self) -> &str {
        &self.info.family
    }

    pub fn variant(&self) -> Option<&str> {
        self.info.variant.as_deref()
    }

    /// The family's indexing degree.
    pub fn degree_hint(&self) -> usize {
        self.info.degree
    }

    /// Degree of the natural space holding the generating basis.
    pub fn superdegree(&self) -> usize {
        self.basis.natural_degree()
    }

    pub fn cell(&self) -> &ReferenceCell {
        &self.cell
    }

    pub fn space(&self) -> &PolySet {
        &self.space
    }

    pub fn functionals(&self) -> &[Functional] {
        &self.functionals
    }

    pub fn generating_basis(&self) -> &OrthonormalBasis {
        &self.basis
    }

    /// Expansion coefficients `D^{-1} C`: row `i` expresses basis function `i` over the
    /// vector generating set (column `c * m + j`).
    pub fn coefficients(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn map_kind(&self) -> MapKind {
        self.map_kind
    }

    pub fn dim(&self) -> usize {
        self.functionals.len()
    }

    pub fn dual_condition(&self) -> f64 {
        self.dual_condition
    }

    /// DOF indices grouped as `[dim][entity index]`.
    pub fn entity_dofs(&self) -> &[Vec<Vec<usize>>] {
        &self.entity_dofs
    }

    pub fn dofs_on(&self, e: EntityRef) -> &[usize] {
        self.entity_dofs
            .get(e.dim)
            .and_then(|d| d.get(e.index))
            .map_or(&[], |v| v.as_slice())
    }

    /// Human-readable name such as `lagrange:triangle:2:gll`.
    pub fn spec_string(&self) -> String {
        let mut s = format!("{}:{}:{}", self.info.family, self.cell.kind(), self.info.degree);
        if let Some(v) = &self.info.variant {
            s.push(':');
            s.push_str(v);
        }
        s
    }

    /// `[l_i(phi_j)]`, evaluated by applying every functional to the tabulated basis.
    pub fn kronecker_matrix(&self) -> Result<DMatrix<f64>> {
        Functional::action_matrix(&self.functionals, &self.cell, self)
    }

    /// `max |l_i(phi_j) - delta_ij|`.
    pub fn kronecker_error(&self) -> Result<f64> {
        let k = self.kronecker_matrix()?;
        Ok((k - DMatrix::identity(self.dim(), self.dim())).abs().max())
    }

    /// Monomial expansions of the basis functions (for differentiation and display).
    pub fn basis_functions(&self) -> Result<Vec<PolyFunction>> {
        let q = self.basis.to_polyset()?;
        let m = q.len();
        let s = self.value_size();
        let nvars = self.cell.tdim();
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let comps: Vec<PolyFunction> = (0..s)
                .map(|c| {
                    let mut acc = PolyFunction::zero(nvars, vec![]);
                    for (j, qj) in q.functions().iter().enumerate() {
                        let a = self.coeffs[(i, c * m + j)];
                        if a != 0.0 {
                            acc = acc.add(&qj.scale(a))?;
                        }
                    }
                    Ok(acc)
                })
                .collect::<Result<_>>()?;
            out.push(if self.value_shape.is_empty() {
                comps.into_iter().next().expect("one component")
            } else {
                let mut v = PolyFunction::vector(&comps)?;
                v.value_shape = self.value_shape.clone();
                v
            });
        }
        Ok(out)
    }

    /// Rebuilds the element with different parts; used when changing conventions.
    pub(crate) fn rebuilt(
        &self,
        cell: &ReferenceCell,
        space: PolySet,
        functionals: Vec<Functional>,
    ) -> Result<CiarletElement> {
        build_element(self.info.clone(), cell, space, functionals, self.map_kind, self.superdegree())
    }

    /// Tabulation with an explicit execution mode for large point sets.
    pub fn tabulate_with(&self, points: &[Vec<f64>], exec: crate::parallel::Execution) -> Result<Tabulation> {
        let parts = crate::parallel::map_chunks(points, 256, exec, |chunk| self.tabulate(chunk))?;
        Ok(Tabulation::concat_points(parts).unwrap_or_else(|| Tabulation::zeros(0, self.dim(), self.value_size())))
    }
}

fn total_degree_factor(kind: CellKind) -> usize {
    match kind {
        CellKind::Quadrilateral | CellKind::Prism => 2,
        CellKind::Hexahedron | CellKind::Pyramid => 3,
        _ => 1,
    }
}

impl FunctionSet for CiarletElement {
    fn value_shape(&self) -> Vec<usize> {
        self.value_shape.clone()
    }

    fn len(&self) -> usize {
        self.dim()
    }

    fn nvars(&self) -> usize {
        self.cell.tdim()
    }

    fn degree(&self) -> usize {
        self.superdegree() * total_degree_factor(self.cell.kind())
    }

    fn lattice_degree(&self) -> usize {
        self.superdegree()
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        if let Some(p) = points.iter().find(|p| p.len() != self.cell.tdim()) {
            return domain(format!("point {p:?} does not have {} coordinates", self.cell.tdim()));
        }
        let q = self.basis.tabulate(points)?;
        let m = q.nfunctions;
        let s = self.value_size();
        let n = self.dim();
        // Q is m x npoints; values of component c are coeffs[:, c m .. (c+1) m] * Q.
        let qm = DMatrix::from_column_slice(m, points.len(), &q.data);
        let mut out = Tabulation::zeros(points.len(), n, s);
        for c in 0..s {
            let block = self.coeffs.columns(c * m, m) * &qm;
            for p in 0..points.len() {
                for f in 0..n {
                    out.set(p, f, c, block[(f, p)]);
                }
            }
        }
        Ok(out)
    }
}
