//! Span checks for the discrete de Rham sequence on the triangle.

use crate::cells::{CellKind, EntityRef, ReferenceCell};
use crate::elements::{make_family, Family};
use crate::error::{domain, Result};
use crate::polyset::{complete_space, PolyFunction, PolySet};
use crate::verify::{compare_spans, SpanTestConfig};
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerhamReport {
    pub k: usize,
    /// Gradients of the Lagrange degree-`k` basis lie in the Nedelec degree-`k-1` space.
    pub grad_in_nedelec: bool,
    /// Curls of the Nedelec degree-`k-1` space span exactly `P_{k-1}`.
    pub curl_is_complete: bool,
    pub curl_rank: usize,
    /// `max |curl grad phi|` over a lattice.
    pub curl_grad_max: f64,
    pub passed: bool,
}

pub fn derham_containment(k: usize, cfg: &SpanTestConfig) -> Result<DerhamReport> {
    if k == 0 {
        return domain("the sequence starts at Lagrange degree 1");
    }
    let cell = ReferenceCell::new(CellKind::Triangle);
    let whole = EntityRef::new(2, 0);
    let lagrange = make_family(Family::Lagrange, CellKind::Triangle, k, None)?;
    let nedelec = make_family(Family::Nedelec, CellKind::Triangle, k - 1, None)?;

    let grads: Vec<PolyFunction> = lagrange
        .basis_functions()?
        .iter()
        .map(|f| f.grad())
        .collect::<Result<_>>()?;
    let grad_set = PolySet::from_parts(cell.clone(), vec![2], grads.clone());
    let g = compare_spans(nedelec.space(), &grad_set, &cell, whole, cfg)?;

    let curls: Vec<PolyFunction> = nedelec
        .space()
        .functions()
        .iter()
        .map(|f| f.curl2d())
        .collect::<Result<_>>()?;
    let curl_set = PolySet::from_parts(cell.clone(), vec![], curls);
    let c = compare_spans(&complete_space(2, k - 1)?, &curl_set, &cell, whole, cfg)?;

    let pts = cell.lattice_points(2 * k + 3, true);
    let mut curl_grad_max = 0.0f64;
    for g in &grads {
        let cg = g.curl2d()?;
        for p in &pts {
            curl_grad_max = curl_grad_max.max(cg.eval(p)?[0].abs());
        }
    }
    let grad_in_nedelec = g.b_in_a();
    let curl_is_complete = c.same;
    Ok(DerhamReport {
        k,
        grad_in_nedelec,
        curl_is_complete,
        curl_rank: c.rank_b,
        curl_grad_max,
        passed: grad_in_nedelec && curl_is_complete && curl_grad_max < 1e-10,
    })
}
