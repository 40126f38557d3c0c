//! Quadrature rules on reference cells and their sub-entities.

use crate::cells::{CellKind, EntityRef, ReferenceCell};
use crate::error::{domain, Result};
use crate::polyset::PolyFunction;

/// Points and weights integrating polynomials up to `exact_degree` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exact_degree: usize,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Sum of `w_i f(x_i)`.
    pub fn integrate(&self, mut f: impl FnMut(&[f64]) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }
}

/// Legendre polynomial `P_n` and its derivative at `t` in `[-1, 1]`.
fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 1..n {
        let p2 = ((2 * j + 1) as f64 * t * p1 - j as f64 * p0) / (j + 1) as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, dp)
}

/// Gauss-Legendre rule with `n` points on `[0, 1]`, found by Newton iteration.
pub fn gauss_legendre(n: usize) -> QuadRule {
    let n = n.max(1);
    let mut pts = vec![0.0; n];
    let mut wts = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, t);
            let dt = p / dp;
            t -= dt;
            if dt.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, t);
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // Descending t, mirrored; map to [0, 1].
        pts[i] = (1.0 - t) / 2.0;
        pts[n - 1 - i] = (1.0 + t) / 2.0;
        wts[i] = w / 2.0;
        wts[n - 1 - i] = w / 2.0;
    }
    if n % 2 == 1 {
        pts[n / 2] = 0.5;
    }
    QuadRule {
        points: pts.into_iter().map(|x| vec![x]).collect(),
        weights: wts,
        exact_degree: 2 * n - 1,
    }
}

fn gl_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = gauss_legendre(n);
    (r.points.into_iter().map(|p| p[0]).collect(), r.weights)
}

/// Rule on the canonical cell of `kind`, exact for polynomials of total degree
/// `degree` (and, on tensor cells, of that degree in each variable).
pub fn cell_rule(kind: CellKind, degree: usize) -> QuadRule {
    let nt = degree / 2 + 1;
    // Collapsed directions carry up to two extra Jacobian factors.
    let nc = degree / 2 + 2;
    let (mut points, mut weights) = (Vec::new(), Vec::new());
    match kind {
        CellKind::Point => {
            points.push(vec![]);
            weights.push(1.0);
        }
        CellKind::Interval => {
            let (x, w) = gl_1d(nt);
            for i in 0..x.len() {
                points.push(vec![x[i]]);
                weights.push(w[i]);
            }
        }
        CellKind::Quadrilateral => {
            let (x, w) = gl_1d(nt);
            for j in 0..x.len() {
                for i in 0..x.len() {
                    points.push(vec![x[i], x[j]]);
                    weights.push(w[i] * w[j]);
                }
            }
        }
        CellKind::Hexahedron => {
            let (x, w) = gl_1d(nt);
            for k in 0..x.len() {
                for j in 0..x.len() {
                    for i in 0..x.len() {
                        points.push(vec![x[i], x[j], x[k]]);
                        weights.push(w[i] * w[j] * w[k]);
                    }
                }
            }
        }
        CellKind::Triangle => {
            let (x, w) = gl_1d(nc);
            for j in 0..x.len() {
                for i in 0..x.len() {
                    let (u, v) = (x[i], x[j]);
                    points.push(vec![u * (1.0 - v), v]);
                    weights.push(w[i] * w[j] * (1.0 - v));
                }
            }
        }
        CellKind::Tetrahedron => {
            let (x, w) = gl_1d(nc);
            for k in 0..x.len() {
                for j in 0..x.len() {
                    for i in 0..x.len() {
                        let (u, v, s) = (x[i], x[j], x[k]);
                        points.push(vec![u * (1.0 - v) * (1.0 - s), v * (1.0 - s), s]);
                        weights.push(w[i] * w[j] * w[k] * (1.0 - v) * (1.0 - s) * (1.0 - s));
                    }
                }
            }
        }
        CellKind::Prism => {
            let tri = cell_rule(CellKind::Triangle, degree);
            let (z, wz) = gl_1d(nt);
            for k in 0..z.len() {
                for (p, w) in tri.points.iter().zip(&tri.weights) {
                    points.push(vec![p[0], p[1], z[k]]);
                    weights.push(w * wz[k]);
                }
            }
        }
        CellKind::Pyramid => {
            let (x, w) = gl_1d(nc);
            for k in 0..x.len() {
                for j in 0..x.len() {
                    for i in 0..x.len() {
                        let (u, v, s) = (x[i], x[j], x[k]);
                        points.push(vec![u * (1.0 - s), v * (1.0 - s), s]);
                        weights.push(w[i] * w[j] * w[k] * (1.0 - s) * (1.0 - s));
                    }
                }
            }
        }
    }
    QuadRule {
        points,
        weights,
        exact_degree: degree,
    }
}

/// Rule on sub-entity `e` of `cell` (points in cell coordinates, weights in the
/// entity's own measure). A vertex gets the one-point rule with weight 1.
pub fn rule_on(cell: &ReferenceCell, e: EntityRef, degree: usize) -> Result<QuadRule> {
    if e.dim == 0 {
        let v = cell.entity_vertices(e)?[0];
        return Ok(QuadRule {
            points: vec![cell.vertices()[v].clone()],
            weights: vec![1.0],
            exact_degree: usize::MAX,
        });
    }
    let kind = cell.entity_kind(e)?;
    let map = cell.entity_map(e)?;
    let scale = map.metric();
    let r = cell_rule(kind, degree);
    Ok(QuadRule {
        points: r.points.iter().map(|t| map.apply(t)).collect(),
        weights: r.weights.iter().map(|w| w * scale).collect(),
        exact_degree: degree,
    })
}

/// `∫_E f · g` for functions given on the reference cell of entity `e`.
pub fn inner_product(f: &PolyFunction, g: &PolyFunction, e: EntityRef, cell: &ReferenceCell) -> Result<f64> {
    if f.value_shape != g.value_shape {
        return domain(format!(
            "value shapes {:?} and {:?} differ",
            f.value_shape, g.value_shape
        ));
    }
    if e.dim == 0 {
        cell.entity_vertices(e)?;
        let (a, b) = (f.eval(&[])?, g.eval(&[])?);
        return Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum());
    }
    let kind = cell.entity_kind(e)?;
    let metric = cell.entity_map(e)?.metric();
    let degree = f.total_degree() + g.total_degree();
    let rule = cell_rule(kind, degree);
    let mut acc = 0.0;
    for (t, w) in rule.points.iter().zip(&rule.weights) {
        let (a, b) = (f.eval(t)?, g.eval(t)?);
        acc += w * a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
    }
    Ok(acc * metric)
}
