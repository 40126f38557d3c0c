//! Polynomial and Lagrange sub- and superdegrees by span containment.

use crate::elements::{CiarletElement, VectorSet};
use crate::error::Result;
use crate::linalg;
use crate::polyset::LegendreSet;
use crate::tabulation::FunctionSet;
use crate::verify::{evaluation_matrix, DEFAULT_RANK_TOLERANCE};
use nalgebra::DMatrix;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A degree, or `None` when the search found no valid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Degree(pub Option<usize>);

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Some(k) => write!(f, "{k}"),
            None => f.write_str("undefined"),
        }
    }
}

impl Serialize for Degree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            Some(k) => s.serialize_u64(k as u64),
            None => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Degree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(k) => Ok(Degree(Some(k))),
            Raw::Text(t) if t == "undefined" => Ok(Degree(None)),
            Raw::Text(t) => Err(serde::de::Error::custom(format!("unexpected degree '{t}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeReport {
    #[serde(rename = "poly_sub")]
    pub polynomial_subdegree: Degree,
    #[serde(rename = "poly_super")]
    pub polynomial_superdegree: Degree,
    #[serde(rename = "lagrange_sub")]
    pub lagrange_subdegree: Degree,
    #[serde(rename = "lagrange_super")]
    pub lagrange_superdegree: Degree,
}

/// Default search bound: twice the Lagrange superdegree plus two, raised to
/// `tdim * superdegree` so tensor-product cells can report their full polynomial
/// superdegree.
pub fn default_k_cap(el: &CiarletElement) -> usize {
    let k = el.superdegree();
    (2 * k + 2).max(el.cell().tdim() * k)
}

pub fn degrees(el: &CiarletElement) -> Result<DegreeReport> {
    degrees_with_cap(el, default_k_cap(el))
}

struct Containment {
    points: Vec<Vec<f64>>,
    space: DMatrix<f64>,
    space_rank: usize,
    tol: f64,
}

impl Containment {
    fn candidate(&self, el: &CiarletElement, set: &LegendreSet) -> Result<(DMatrix<f64>, usize)> {
        let v = VectorSet {
            scalar: set,
            value_shape: el.value_shape(),
        };
        let m = evaluation_matrix(&v, &self.points, self.tol)?;
        let r = linalg::rank(&m, self.tol);
        Ok((m, r))
    }

    /// Whether the candidate space lies inside the element space.
    fn inside(&self, c: &(DMatrix<f64>, usize)) -> bool {
        linalg::rank(&linalg::vstack(&self.space, &c.0), self.tol) == self.space_rank
    }

    /// Whether the element space lies inside the candidate space.
    fn contains(&self, c: &(DMatrix<f64>, usize)) -> bool {
        linalg::rank(&linalg::vstack(&c.0, &self.space), self.tol) == c.1
    }
}

/// Degrees with superdegree searches stopped at `k_cap`.
pub fn degrees_with_cap(el: &CiarletElement, k_cap: usize) -> Result<DegreeReport> {
    let cell = el.cell();
    let points = cell.lattice_points(k_cap + 3, true);
    let tol = DEFAULT_RANK_TOLERANCE;
    let space = evaluation_matrix(el.space(), &points, tol)?;
    let space_rank = linalg::rank(&space, tol);
    let c = Containment {
        points,
        space,
        space_rank,
        tol,
    };
    let complete = |k| LegendreSet::complete(cell, k);
    let natural = |k| LegendreSet::natural(cell, k);

    let sub = |make: &dyn Fn(usize) -> Result<LegendreSet>| -> Result<Degree> {
        let mut best = None;
        for k in 0..=k_cap {
            let cand = c.candidate(el, &make(k)?)?;
            if cand.1 > c.space_rank || !c.inside(&cand) {
                break;
            }
            best = Some(k);
        }
        Ok(Degree(best))
    };
    let sup = |make: &dyn Fn(usize) -> Result<LegendreSet>| -> Result<Degree> {
        for k in 0..=k_cap {
            if c.contains(&c.candidate(el, &make(k)?)?) {
                return Ok(Degree(Some(k)));
            }
        }
        Ok(Degree(None))
    };
    Ok(DegreeReport {
        polynomial_subdegree: sub(&complete)?,
        polynomial_superdegree: sup(&complete)?,
        lagrange_subdegree: sub(&natural)?,
        lagrange_superdegree: sup(&natural)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellKind;
    use crate::elements::{make_family, Family};

    fn report(f: Family, c: CellKind, k: usize) -> [Option<usize>; 4] {
        let r = degrees(&make_family(f, c, k, None).unwrap()).unwrap();
        [
            r.polynomial_subdegree.0,
            r.polynomial_superdegree.0,
            r.lagrange_subdegree.0,
            r.lagrange_superdegree.0,
        ]
    }

    #[test]
    fn examples() {
        assert_eq!(report(Family::Lagrange, CellKind::Triangle, 3), [Some(3); 4]);
        assert_eq!(report(Family::Lagrange, CellKind::Quadrilateral, 1), [Some(1), Some(2), Some(1), Some(1)]);
        assert_eq!(report(Family::Lagrange, CellKind::Quadrilateral, 2), [Some(2), Some(4), Some(2), Some(2)]);
        assert_eq!(report(Family::Lagrange, CellKind::Hexahedron, 1), [Some(1), Some(3), Some(1), Some(1)]);
        assert_eq!(report(Family::RaviartThomas, CellKind::Triangle, 1), [Some(1), Some(2), Some(1), Some(2)]);
        assert_eq!(report(Family::DiscontinuousLagrange, CellKind::Interval, 0), [Some(0); 4]);
    }

    #[test]
    fn undefined_is_text() {
        let r = DegreeReport {
            polynomial_subdegree: Degree(None),
            polynomial_superdegree: Degree(Some(2)),
            lagrange_subdegree: Degree(Some(0)),
            lagrange_superdegree: Degree(Some(2)),
        };
        let j = serde_json::to_string(&r).unwrap();
        assert_eq!(j, r#"{"poly_sub":"undefined","poly_super":2,"lagrange_sub":0,"lagrange_super":2}"#);
        assert_eq!(serde_json::from_str::<DegreeReport>(&j).unwrap(), r);
    }
}
