//! Geometric maps, push-forwards and pull-backs, and change of reference convention.

use crate::cells::{AffineMap, CellKind, ReferenceCell};
use crate::elements::{make_family, CiarletElement, Family, Functional, FunctionalKind};
use crate::error::{domain, Error, Result};
use crate::polyset::{PolyFunction, PolySet};
use crate::tabulation::{FunctionSet, Tabulation};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// How basis functions are carried from the reference cell to a physical cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MapKind {
    Identity,
    L2Piola,
    Covariant,
    Contravariant,
    DoubleCovariant,
    DoubleContravariant,
    CovariantContravariant,
}

impl MapKind {
    pub const ALL: [MapKind; 7] = [
        MapKind::Identity,
        MapKind::L2Piola,
        MapKind::Covariant,
        MapKind::Contravariant,
        MapKind::DoubleCovariant,
        MapKind::DoubleContravariant,
        MapKind::CovariantContravariant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MapKind::Identity => "identity",
            MapKind::L2Piola => "l2_piola",
            MapKind::Covariant => "covariant",
            MapKind::Contravariant => "contravariant",
            MapKind::DoubleCovariant => "double_covariant",
            MapKind::DoubleContravariant => "double_contravariant",
            MapKind::CovariantContravariant => "covariant_contravariant",
        }
    }

    /// 0 for scalar, 1 for vector and 2 for matrix valued functions.
    pub fn value_rank(self) -> usize {
        match self {
            MapKind::Identity | MapKind::L2Piola => 0,
            MapKind::Covariant | MapKind::Contravariant => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for MapKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MapKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MapKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown map kind '{s}'")))
    }
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn square_parts(kind: MapKind, j: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
    if j.nrows() != j.ncols() {
        return domain(format!(
            "{kind} maps need a square Jacobian, got {}x{}",
            j.nrows(),
            j.ncols()
        ));
    }
    let det = j.determinant();
    let inv = j
        .clone()
        .try_inverse()
        .filter(|_| det.abs() > 1e-14)
        .ok_or_else(|| Error::Domain("singular Jacobian".into()))?;
    Ok((det, inv))
}

fn check_size(kind: MapKind, d: usize, value_size: usize) -> Result<()> {
    let expected = match kind.value_rank() {
        0 => return Ok(()),
        1 => d,
        _ => d * d,
    };
    if value_size != expected {
        return domain(format!("{kind} maps act on values of size {expected}, got {value_size}"));
    }
    Ok(())
}

/// Matrix acting on flattened (row-major) values that pushes them forward through a map
/// with Jacobian `j`.
pub fn push_forward_matrix(kind: MapKind, j: &DMatrix<f64>, value_size: usize) -> Result<DMatrix<f64>> {
    if kind == MapKind::Identity {
        return Ok(DMatrix::identity(value_size, value_size));
    }
    let (det, inv) = square_parts(kind, j)?;
    check_size(kind, j.nrows(), value_size)?;
    let inv_t = inv.transpose();
    Ok(match kind {
        MapKind::Identity => unreachable!(),
        MapKind::L2Piola => DMatrix::identity(value_size, value_size) / det,
        MapKind::Contravariant => j / det,
        MapKind::Covariant => inv_t,
        MapKind::DoubleContravariant => kron(j, j) / (det * det),
        MapKind::DoubleCovariant => kron(&inv_t, &inv_t),
        MapKind::CovariantContravariant => kron(&inv_t, j) / det,
    })
}

/// Inverse of [`push_forward_matrix`], built from the closed-form pull-back.
pub fn pull_back_matrix(kind: MapKind, j: &DMatrix<f64>, value_size: usize) -> Result<DMatrix<f64>> {
    if kind == MapKind::Identity {
        return Ok(DMatrix::identity(value_size, value_size));
    }
    let (det, inv) = square_parts(kind, j)?;
    check_size(kind, j.nrows(), value_size)?;
    let jt = j.transpose();
    Ok(match kind {
        MapKind::Identity => unreachable!(),
        MapKind::L2Piola => DMatrix::identity(value_size, value_size) * det,
        MapKind::Contravariant => inv * det,
        MapKind::Covariant => jt,
        MapKind::DoubleContravariant => kron(&inv, &inv) * (det * det),
        MapKind::DoubleCovariant => kron(&jt, &jt),
        MapKind::CovariantContravariant => kron(&jt, &inv) * det,
    })
}

fn apply_per_point(
    table: &Tabulation,
    mut matrix_at: impl FnMut(usize) -> Result<DMatrix<f64>>,
) -> Result<Tabulation> {
    let mut out: Option<Tabulation> = None;
    for p in 0..table.npoints {
        let m = matrix_at(p)?;
        if m.ncols() != table.value_size {
            return domain("map does not match the value size of the table");
        }
        let o = out.get_or_insert_with(|| Tabulation::zeros(table.npoints, table.nfunctions, m.nrows()));
        for f in 0..table.nfunctions {
            let v = table.value(p, f);
            let dst = o.value_mut(p, f);
            for (r, d) in dst.iter_mut().enumerate() {
                *d = (0..v.len()).map(|c| m[(r, c)] * v[c]).sum();
            }
        }
    }
    Ok(out.unwrap_or_else(|| Tabulation::zeros(0, table.nfunctions, table.value_size)))
}

/// Push-forward of a table of reference values with a constant Jacobian.
pub fn push_forward_affine(kind: MapKind, j: &DMatrix<f64>, table: &Tabulation) -> Result<Tabulation> {
    let m = push_forward_matrix(kind, j, table.value_size)?;
    apply_per_point(table, |_| Ok(m.clone()))
}

pub fn pull_back_affine(kind: MapKind, j: &DMatrix<f64>, table: &Tabulation) -> Result<Tabulation> {
    let m = pull_back_matrix(kind, j, table.value_size)?;
    apply_per_point(table, |_| Ok(m.clone()))
}

/// A map from a reference cell into `R^{d_g}` interpolated by the degree-one Lagrange
/// element through the target vertices.
#[derive(Debug, Clone)]
pub struct GeometricMap {
    source: ReferenceCell,
    target_vertices: Vec<Vec<f64>>,
    geometry: CiarletElement,
    gradients: Vec<PolyFunction>,
}

impl GeometricMap {
    pub fn new(kind: CellKind, target_vertices: Vec<Vec<f64>>) -> Result<Self> {
        let geometry = make_family(Family::Lagrange, kind, 1, None)?;
        if target_vertices.len() != geometry.dim() {
            return domain(format!(
                "a {kind} needs {} target vertices, got {}",
                geometry.dim(),
                target_vertices.len()
            ));
        }
        let dg = target_vertices[0].len();
        if dg < kind.tdim() || target_vertices.iter().any(|v| v.len() != dg) {
            return domain("target vertices must share a dimension at least the cell dimension");
        }
        let gradients = geometry
            .basis_functions()?
            .iter()
            .map(|f| f.grad())
            .collect::<Result<_>>()?;
        Ok(Self {
            source: ReferenceCell::new(kind),
            target_vertices,
            geometry,
            gradients,
        })
    }

    /// The map whose vertex images are given by an affine map.
    pub fn from_affine(kind: CellKind, map: &AffineMap) -> Result<Self> {
        let verts = ReferenceCell::new(kind).vertices().iter().map(|v| map.apply(v)).collect();
        Self::new(kind, verts)
    }

    pub fn identity(kind: CellKind) -> Result<Self> {
        Self::new(kind, ReferenceCell::new(kind).vertices().to_vec())
    }

    pub fn source(&self) -> &ReferenceCell {
        &self.source
    }

    pub fn target_vertices(&self) -> &[Vec<f64>] {
        &self.target_vertices
    }

    pub fn apply(&self, xi: &[f64]) -> Result<Vec<f64>> {
        let t = self.geometry.tabulate(&[xi.to_vec()])?;
        let mut x = vec![0.0; self.target_vertices[0].len()];
        for (v, coords) in self.target_vertices.iter().enumerate() {
            for (xi, c) in x.iter_mut().zip(coords) {
                *xi += t.get(0, v, 0) * c;
            }
        }
        Ok(x)
    }

    /// `d_g x d` Jacobian at reference point `xi`.
    pub fn jacobian(&self, xi: &[f64]) -> Result<DMatrix<f64>> {
        let dg = self.target_vertices[0].len();
        let d = self.source.tdim();
        let mut j = DMatrix::zeros(dg, d);
        for (v, g) in self.gradients.iter().enumerate() {
            let gv = g.eval(xi)?;
            for r in 0..dg {
                for c in 0..d {
                    j[(r, c)] += self.target_vertices[v][r] * gv[c];
                }
            }
        }
        Ok(j)
    }

    /// Affine if the geometry is degree one on a simplex, or if the Jacobian is constant
    /// (to 1e-12) at ten sample points.
    pub fn is_affine(&self) -> bool {
        if self.source.kind().is_simplex() {
            return true;
        }
        let pts: Vec<Vec<f64>> = self.source.lattice_points(4, true).into_iter().take(10).collect();
        let Ok(j0) = self.jacobian(&pts[0]) else { return false };
        pts.iter().all(|p| {
            self.jacobian(p)
                .map(|j| (j - &j0).abs().max() <= 1e-12 * (1.0 + j0.abs().max()))
                .unwrap_or(false)
        })
    }

    /// Pushes reference values tabulated at `points` forward.
    pub fn push_forward(&self, kind: MapKind, points: &[Vec<f64>], table: &Tabulation) -> Result<Tabulation> {
        if points.len() != table.npoints {
            return domain("one reference point per table row is required");
        }
        apply_per_point(table, |p| push_forward_matrix(kind, &self.jacobian(&points[p])?, table.value_size))
    }

    /// Inverse of [`Self::push_forward`] for physical values at the images of `points`.
    pub fn pull_back(&self, kind: MapKind, points: &[Vec<f64>], table: &Tabulation) -> Result<Tabulation> {
        if points.len() != table.npoints {
            return domain("one reference point per table row is required");
        }
        apply_per_point(table, |p| pull_back_matrix(kind, &self.jacobian(&points[p])?, table.value_size))
    }
}

/// Re-expresses `el` on `target`, a cell of the same kind with different vertices: the
/// space is pulled back through the affine vertex correspondence with the element's map
/// kind, and every functional is wrapped so that it pushes its argument forward before
/// acting. Entity numbering is shared, so DOF associations carry over unchanged.
pub fn align_convention(el: &CiarletElement, target: &ReferenceCell) -> Result<CiarletElement> {
    let source = el.cell();
    if source.kind() != target.kind() {
        return domain(format!(
            "cannot align a {} element to a {}",
            source.kind(),
            target.kind()
        ));
    }
    if source == target {
        return Ok(el.clone());
    }
    // g: target -> source.
    let g = source.reference_map().compose(&target.reference_map().inverse()?);
    let g_inv = g.inverse()?;
    let j = g.jacobian();
    let s = el.value_size();
    let shape = el.value_shape();
    let pull = pull_back_matrix(el.map_kind(), &j, s)?;
    let push = push_forward_matrix(el.map_kind(), &j, s)?;
    let functions = el
        .space()
        .functions()
        .iter()
        .map(|f| f.compose_affine(&g)?.apply_matrix(&pull, shape.clone()))
        .collect::<Result<Vec<_>>>()?;
    let space = PolySet::new(target.clone(), shape, functions)?;
    let functionals = el
        .functionals()
        .iter()
        .map(|l| Functional {
            entity: l.entity,
            kind: FunctionalKind::Pushed {
                inner: Box::new(l.clone()),
                source: source.clone(),
                point_map: g_inv.clone(),
                value_map: push.clone(),
            },
        })
        .collect();
    el.rebuilt(target, space, functionals)
}
