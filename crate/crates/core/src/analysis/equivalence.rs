//! Equivalence of functional sets over a space.

use crate::cells::ReferenceCell;
use crate::elements::Functional;
use crate::error::Result;
use crate::linalg;
use crate::tabulation::FunctionSet;
use nalgebra::DMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Equivalence {
    pub equivalent: bool,
    /// `A` with `l_b[i] = sum_j A[i][j] l_a[j]` on the space, when equivalent.
    pub matrix: Option<DMatrix<f64>>,
}

/// Whether `ls_a` and `ls_b` span the same set of functionals on `space`: both action
/// matrices `[l_i(p_j)]` have the rank of their stack. Sets of different sizes are never
/// equivalent.
pub fn functionals_equivalent(
    ls_a: &[Functional],
    ls_b: &[Functional],
    space: &dyn FunctionSet,
    cell: &ReferenceCell,
    tol: f64,
) -> Result<Equivalence> {
    let no = Equivalence {
        equivalent: false,
        matrix: None,
    };
    if ls_a.len() != ls_b.len() {
        return Ok(no);
    }
    let aa = Functional::action_matrix(ls_a, cell, space)?;
    let ab = Functional::action_matrix(ls_b, cell, space)?;
    let (ra, rb) = (linalg::rank(&aa, tol), linalg::rank(&ab, tol));
    let rs = linalg::rank(&linalg::vstack(&aa, &ab), tol);
    if ra != rb || ra != rs {
        return Ok(no);
    }
    let a = &ab * linalg::pseudo_inverse(&aa);
    Ok(Equivalence {
        equivalent: true,
        matrix: Some(a),
    })
}
