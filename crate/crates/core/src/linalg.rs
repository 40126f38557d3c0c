//! Dense linear algebra helpers on top of `nalgebra`.

use nalgebra::DMatrix;

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Number of singular values above `rel_tol * max(sigma_max, scale)`.
///
/// With `scale = 0` this is the usual relative rank. A positive `scale` lets a matrix
/// whose entries are all roundoff (relative to some larger reference) have rank 0.
pub fn rank_with_scale(m: &DMatrix<f64>, rel_tol: f64, scale: f64) -> usize {
    let s = singular_values(m);
    let Some(&smax) = s.first() else { return 0 };
    let reference = smax.max(scale);
    if reference == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * reference).count()
}

pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    rank_with_scale(m, rel_tol, 0.0)
}

/// Ratio `sigma_max / sigma_min` of a square matrix (infinite when singular).
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let s = singular_values(m);
    match (s.first(), s.last()) {
        (Some(&a), Some(&b)) if b > 0.0 => a / b,
        _ => f64::INFINITY,
    }
}

/// Stack two matrices with equal column counts vertically.
pub fn vstack(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.ncols(), b.ncols());
    let mut out = DMatrix::zeros(a.nrows() + b.nrows(), a.ncols());
    out.rows_mut(0, a.nrows()).copy_from(a);
    out.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    out
}

/// A reduced row echelon basis of the row space of `m`, with `rank` rows.
///
/// The row space is first orthonormalised through the SVD so that elimination runs on a
/// well conditioned matrix; entries below `1e-12` are flushed to zero afterwards.
pub fn row_space_rref(m: &DMatrix<f64>, rank: usize) -> DMatrix<f64> {
    let ncols = m.ncols();
    if rank == 0 || m.nrows() == 0 {
        return DMatrix::zeros(0, ncols);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut basis = DMatrix::from_fn(rank, ncols, |i, j| v_t[(order[i], j)]);
    rref_in_place(&mut basis);
    basis.iter_mut().for_each(|x| {
        if x.abs() < 1e-12 {
            *x = 0.0
        }
    });
    basis
}

/// Gauss-Jordan elimination with row pivoting, scanning columns left to right. Assumes
/// full row rank.
fn rref_in_place(a: &mut DMatrix<f64>) {
    let (nrows, ncols) = a.shape();
    let mut row = 0;
    for col in 0..ncols {
        if row == nrows {
            break;
        }
        let (piv, val) = (row..nrows)
            .map(|r| (r, a[(r, col)].abs()))
            .fold((row, -1.0), |best, c| if c.1 > best.1 { c } else { best });
        // Columns that are (numerically) dependent on earlier pivots are skipped.
        if val < 1e-9 {
            continue;
        }
        a.swap_rows(row, piv);
        let p = a[(row, col)];
        for j in 0..ncols {
            a[(row, j)] /= p;
        }
        for r in 0..nrows {
            if r != row {
                let f = a[(r, col)];
                if f != 0.0 {
                    for j in 0..ncols {
                        let v = a[(row, j)];
                        a[(r, j)] -= f * v;
                    }
                }
            }
        }
        row += 1;
    }
}

/// Moore-Penrose pseudo-inverse.
pub fn pseudo_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return DMatrix::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    svd.pseudo_inverse(1e-14 * smax.max(f64::MIN_POSITIVE))
        .expect("non-negative epsilon")
}
