//! Natural, complete and pyramid Lagrange spaces.

use super::{PolyFunction, PolySet, Term};
use crate::cells::{CellKind, ReferenceCell};
use crate::error::{capability, domain, Result};

/// Exponent tuples of the natural degree-`k` space of a cell kind, graded by total degree
/// and then lexicographic. On the pyramid the tuple is the numerator exponent.
pub fn natural_indices(kind: CellKind, k: usize) -> Vec<[u32; 3]> {
    let k = k as u32;
    let tdim = kind.tdim();
    let mut out = Vec::new();
    let r = |d: usize| if d < tdim { 0..=k } else { 0..=0 };
    for p0 in r(0) {
        for p1 in r(1) {
            for p2 in r(2) {
                let keep = match kind {
                    CellKind::Point => true,
                    CellKind::Interval | CellKind::Quadrilateral | CellKind::Hexahedron => true,
                    CellKind::Pyramid => true,
                    CellKind::Triangle | CellKind::Tetrahedron => p0 + p1 + p2 <= k,
                    CellKind::Prism => p0 + p1 <= k,
                };
                if keep {
                    out.push([p0, p1, p2]);
                }
            }
        }
    }
    out.sort_by_key(|p| (p[0] + p[1] + p[2], p[0], p[1], p[2]));
    out
}

fn complete_indices(tdim: usize, k: usize) -> Vec<[u32; 3]> {
    let kind = match tdim {
        0 => CellKind::Point,
        1 => CellKind::Interval,
        2 => CellKind::Triangle,
        _ => CellKind::Tetrahedron,
    };
    natural_indices(kind, k)
}

fn monomials(tdim: usize, idx: &[[u32; 3]]) -> Vec<PolyFunction> {
    idx.iter()
        .map(|p| PolyFunction::term(tdim, Term::new(*p, 0), 1.0))
        .collect()
}

/// The natural degree-`k` space of `cell`. On a cell with non-canonical vertices the
/// canonical space is composed with the inverse reference map.
pub fn natural_space(cell: &ReferenceCell, k: usize) -> Result<PolySet> {
    let kind = cell.kind();
    let tdim = cell.tdim();
    let idx = natural_indices(kind, k);
    let functions: Vec<PolyFunction> = if kind == CellKind::Pyramid {
        if !cell.is_canonical() {
            return capability("the pyramid natural space is only available on the canonical pyramid");
        }
        idx.iter()
            .map(|p| PolyFunction::term(3, Term::new(*p, p[0] + p[1]), 1.0))
            .collect()
    } else if cell.is_canonical() || kind.is_simplex() {
        // Complete spaces are invariant under affine maps.
        monomials(tdim, &idx)
    } else {
        let inv = cell.reference_map().inverse()?;
        monomials(tdim, &idx)
            .iter()
            .map(|f| f.compose_affine(&inv))
            .collect::<Result<_>>()?
    };
    PolySet::new(cell.clone(), vec![], functions)
}

/// The complete space of polynomials of total degree at most `k` in `tdim` variables, on
/// the canonical simplex of that dimension.
pub fn complete_space(tdim: usize, k: usize) -> Result<PolySet> {
    let kind = match tdim {
        1 => CellKind::Interval,
        2 => CellKind::Triangle,
        3 => CellKind::Tetrahedron,
        _ => return domain(format!("complete spaces need 1 <= tdim <= 3, got {tdim}")),
    };
    complete_space_on(&ReferenceCell::new(kind), k)
}

/// The complete degree-`k` space on any cell (in the cell's coordinates).
pub fn complete_space_on(cell: &ReferenceCell, k: usize) -> Result<PolySet> {
    let tdim = cell.tdim();
    PolySet::new(cell.clone(), vec![], monomials(tdim, &complete_indices(tdim, k)))
}

/// The space spanned by the degree-`k` Lagrange element on the pyramid.
pub fn pyramid_lagrange_space(k: usize) -> Result<PolySet> {
    let k = k as u32;
    let mut idx = Vec::new();
    for p2 in 0..=k {
        for p1 in 0..=k - p2 {
            for p0 in 0..=k - p2 {
                idx.push([p0, p1, p2]);
            }
        }
    }
    idx.sort_by_key(|p| (p[0] + p[1] + p[2], p[0], p[1], p[2]));
    let functions = idx
        .iter()
        .map(|p| PolyFunction::term(3, Term::new(*p, p[0].min(p[1])), 1.0))
        .collect();
    PolySet::new(ReferenceCell::new(CellKind::Pyramid), vec![], functions)
}
