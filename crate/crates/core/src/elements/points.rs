//! Lagrange point sets.

use crate::cells::CellKind;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Placement of Lagrange points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LagrangeVariant {
    #[default]
    Equispaced,
    Gll,
}

impl fmt::Display for LagrangeVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LagrangeVariant::Equispaced => "equispaced",
            LagrangeVariant::Gll => "gll",
        })
    }
}

impl FromStr for LagrangeVariant {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equispaced" | "equi" => Ok(Self::Equispaced),
            "gll" | "lobatto" => Ok(Self::Gll),
            _ => Err(crate::Error::Parse(format!(
                "unknown Lagrange variant '{s}' (expected equispaced or gll)"
            ))),
        }
    }
}

/// Gauss-Lobatto-Legendre points on `[0, 1]`, ascending.
pub fn gll_points(n: usize) -> Vec<f64> {
    let n = n.max(2);
    let m = n - 1;
    let mut t = vec![0.0; n];
    t[0] = -1.0;
    t[m] = 1.0;
    // Interior points are the roots of P_m'; Newton with P_m'' from Legendre's equation.
    for i in 1..m {
        let mut x = -(std::f64::consts::PI * i as f64 / m as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(m, x);
            let d2p = (2.0 * x * dp - (m * (m + 1)) as f64 * p) / (1.0 - x * x);
            let dx = dp / d2p;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        t[i] = x;
    }
    // Enforce exact symmetry.
    for i in 0..n / 2 {
        let a = 0.5 * (t[n - 1 - i] - t[i]);
        t[i] = -a;
        t[n - 1 - i] = a;
    }
    if n % 2 == 1 {
        t[n / 2] = 0.0;
    }
    t.into_iter().map(|x| (x + 1.0) / 2.0).collect()
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for j in 1..n {
        let p2 = ((2 * j + 1) as f64 * x * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// The `k + 1` one-dimensional nodes of a variant.
pub fn nodes_1d(k: usize, variant: LagrangeVariant) -> Vec<f64> {
    match variant {
        LagrangeVariant::Equispaced => (0..=k).map(|i| i as f64 / k as f64).collect(),
        LagrangeVariant::Gll => gll_points(k + 1),
    }
}

/// Points strictly inside the canonical cell of `kind` for degree `k`, built from 1D
/// nodes `v` (warped simplex points follow Blyth and Pozrikidis).
pub fn interior_points(kind: CellKind, k: usize, v: &[f64]) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let inner = || 1..k;
    match kind {
        CellKind::Point => out.push(vec![]),
        CellKind::Interval => {
            for i in inner() {
                out.push(vec![v[i]]);
            }
        }
        CellKind::Triangle => {
            for j in inner() {
                for i in 1..k.saturating_sub(j) {
                    let l = k - i - j;
                    out.push(vec![
                        (1.0 + 2.0 * v[i] - v[j] - v[l]) / 3.0,
                        (1.0 + 2.0 * v[j] - v[i] - v[l]) / 3.0,
                    ]);
                }
            }
        }
        CellKind::Tetrahedron => {
            for l in inner() {
                for j in 1..k.saturating_sub(l) {
                    for i in 1..k.saturating_sub(l + j) {
                        let m = k - i - j - l;
                        out.push(vec![
                            (1.0 + 3.0 * v[i] - v[j] - v[l] - v[m]) / 4.0,
                            (1.0 + 3.0 * v[j] - v[i] - v[l] - v[m]) / 4.0,
                            (1.0 + 3.0 * v[l] - v[i] - v[j] - v[m]) / 4.0,
                        ]);
                    }
                }
            }
        }
        CellKind::Quadrilateral => {
            for j in inner() {
                for i in inner() {
                    out.push(vec![v[i], v[j]]);
                }
            }
        }
        CellKind::Hexahedron => {
            for l in inner() {
                for j in inner() {
                    for i in inner() {
                        out.push(vec![v[i], v[j], v[l]]);
                    }
                }
            }
        }
        CellKind::Prism => {
            let tri = interior_points(CellKind::Triangle, k, v);
            for l in inner() {
                for p in &tri {
                    out.push(vec![p[0], p[1], v[l]]);
                }
            }
        }
        CellKind::Pyramid => {}
    }
    out
}
