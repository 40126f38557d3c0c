//! Reference cells.
//!
//! The canonical reference cells are
//! - interval: `0 <= x <= 1`
//! - triangle: `0 <= x, 0 <= y, x + y <= 1`
//! - quadrilateral: `[0, 1]^2`
//! - tetrahedron: `0 <= x, y, z` and `x + y + z <= 1`
//! - hexahedron: `[0, 1]^3`
//! - prism: triangle times `[0, 1]`
//! - pyramid: `0 <= x, y`, `0 <= z <= 1`, `x + z <= 1`, `y + z <= 1`
//!
//! Sub-entities are numbered as in the tables below (vertex tuples per entity). A
//! [`ReferenceCell`] may also carry vertices other than the canonical ones; this is how
//! alternative reference conventions (e.g. `[-1, 1]^2`) are represented.

use crate::error::{capability, domain, Error, Result};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// Geometric tolerance used when comparing vertex coordinates.
const GEOM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Point,
    Interval,
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Hexahedron,
    Prism,
    Pyramid,
}

impl CellKind {
    pub const ALL: [CellKind; 7] = [
        CellKind::Interval,
        CellKind::Triangle,
        CellKind::Quadrilateral,
        CellKind::Tetrahedron,
        CellKind::Hexahedron,
        CellKind::Prism,
        CellKind::Pyramid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CellKind::Point => "point",
            CellKind::Interval => "interval",
            CellKind::Triangle => "triangle",
            CellKind::Quadrilateral => "quadrilateral",
            CellKind::Tetrahedron => "tetrahedron",
            CellKind::Hexahedron => "hexahedron",
            CellKind::Prism => "prism",
            CellKind::Pyramid => "pyramid",
        }
    }

    pub fn tdim(self) -> usize {
        match self {
            CellKind::Point => 0,
            CellKind::Interval => 1,
            CellKind::Triangle | CellKind::Quadrilateral => 2,
            _ => 3,
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(
            self,
            CellKind::Point | CellKind::Interval | CellKind::Triangle | CellKind::Tetrahedron
        )
    }

    /// Measure of the canonical cell.
    pub fn volume(self) -> f64 {
        match self {
            CellKind::Point => 1.0,
            CellKind::Interval | CellKind::Quadrilateral | CellKind::Hexahedron => 1.0,
            CellKind::Triangle | CellKind::Prism => 0.5,
            CellKind::Tetrahedron => 1.0 / 6.0,
            CellKind::Pyramid => 1.0 / 3.0,
        }
    }

    fn canonical_vertices(self) -> Vec<Vec<f64>> {
        let v = |c: &[f64]| c.to_vec();
        match self {
            CellKind::Point => vec![vec![]],
            CellKind::Interval => vec![v(&[0.0]), v(&[1.0])],
            CellKind::Triangle => vec![v(&[0.0, 0.0]), v(&[1.0, 0.0]), v(&[0.0, 1.0])],
            CellKind::Quadrilateral => vec![
                v(&[0.0, 0.0]),
                v(&[1.0, 0.0]),
                v(&[0.0, 1.0]),
                v(&[1.0, 1.0]),
            ],
            CellKind::Tetrahedron => vec![
                v(&[0.0, 0.0, 0.0]),
                v(&[1.0, 0.0, 0.0]),
                v(&[0.0, 1.0, 0.0]),
                v(&[0.0, 0.0, 1.0]),
            ],
            CellKind::Hexahedron => vec![
                v(&[0.0, 0.0, 0.0]),
                v(&[1.0, 0.0, 0.0]),
                v(&[0.0, 1.0, 0.0]),
                v(&[1.0, 1.0, 0.0]),
                v(&[0.0, 0.0, 1.0]),
                v(&[1.0, 0.0, 1.0]),
                v(&[0.0, 1.0, 1.0]),
                v(&[1.0, 1.0, 1.0]),
            ],
            CellKind::Prism => vec![
                v(&[0.0, 0.0, 0.0]),
                v(&[1.0, 0.0, 0.0]),
                v(&[0.0, 1.0, 0.0]),
                v(&[0.0, 0.0, 1.0]),
                v(&[1.0, 0.0, 1.0]),
                v(&[0.0, 1.0, 1.0]),
            ],
            CellKind::Pyramid => vec![
                v(&[0.0, 0.0, 0.0]),
                v(&[1.0, 0.0, 0.0]),
                v(&[0.0, 1.0, 0.0]),
                v(&[1.0, 1.0, 0.0]),
                v(&[0.0, 0.0, 1.0]),
            ],
        }
    }

    /// Vertex tuples of the entities of each dimension.
    fn canonical_topology(self) -> Vec<Vec<Vec<usize>>> {
        let t = |rows: &[&[usize]]| rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
        let verts = |n: usize| (0..n).map(|i| vec![i]).collect::<Vec<_>>();
        match self {
            CellKind::Point => vec![vec![vec![0]]],
            CellKind::Interval => vec![verts(2), t(&[&[0, 1]])],
            CellKind::Triangle => vec![verts(3), t(&[&[1, 2], &[0, 2], &[0, 1]]), t(&[&[0, 1, 2]])],
            CellKind::Quadrilateral => vec![
                verts(4),
                t(&[&[0, 1], &[0, 2], &[1, 3], &[2, 3]]),
                t(&[&[0, 1, 2, 3]]),
            ],
            CellKind::Tetrahedron => vec![
                verts(4),
                t(&[&[2, 3], &[1, 3], &[1, 2], &[0, 3], &[0, 2], &[0, 1]]),
                t(&[&[1, 2, 3], &[0, 2, 3], &[0, 1, 3], &[0, 1, 2]]),
                t(&[&[0, 1, 2, 3]]),
            ],
            CellKind::Hexahedron => vec![
                verts(8),
                t(&[
                    &[0, 1],
                    &[0, 2],
                    &[0, 4],
                    &[1, 3],
                    &[1, 5],
                    &[2, 3],
                    &[2, 6],
                    &[3, 7],
                    &[4, 5],
                    &[4, 6],
                    &[5, 7],
                    &[6, 7],
                ]),
                t(&[
                    &[0, 1, 2, 3],
                    &[0, 1, 4, 5],
                    &[0, 2, 4, 6],
                    &[1, 3, 5, 7],
                    &[2, 3, 6, 7],
                    &[4, 5, 6, 7],
                ]),
                t(&[&[0, 1, 2, 3, 4, 5, 6, 7]]),
            ],
            CellKind::Prism => vec![
                verts(6),
                t(&[
                    &[0, 1],
                    &[0, 2],
                    &[0, 3],
                    &[1, 2],
                    &[1, 4],
                    &[2, 5],
                    &[3, 4],
                    &[3, 5],
                    &[4, 5],
                ]),
                t(&[&[0, 1, 2], &[0, 1, 3, 4], &[0, 2, 3, 5], &[1, 2, 4, 5], &[3, 4, 5]]),
                t(&[&[0, 1, 2, 3, 4, 5]]),
            ],
            CellKind::Pyramid => vec![
                verts(5),
                t(&[
                    &[0, 1],
                    &[0, 2],
                    &[0, 4],
                    &[1, 3],
                    &[1, 4],
                    &[2, 3],
                    &[2, 4],
                    &[3, 4],
                ]),
                t(&[&[0, 1, 2, 3], &[0, 1, 4], &[0, 2, 4], &[1, 3, 4], &[2, 3, 4]]),
                t(&[&[0, 1, 2, 3, 4]]),
            ],
        }
    }

    /// Local vertex indices whose offsets from vertex 0 span the cell's reference axes.
    fn axis_vertices(self) -> &'static [usize] {
        match self {
            CellKind::Point => &[],
            CellKind::Interval => &[1],
            CellKind::Triangle | CellKind::Quadrilateral => &[1, 2],
            CellKind::Tetrahedron | CellKind::Prism => &[1, 2, 3],
            CellKind::Hexahedron | CellKind::Pyramid => &[1, 2, 4],
        }
    }

    /// The kind of a sub-entity with `nverts` vertices and dimension `dim`.
    fn sub_kind(dim: usize, nverts: usize) -> CellKind {
        match (dim, nverts) {
            (0, _) => CellKind::Point,
            (1, _) => CellKind::Interval,
            (2, 3) => CellKind::Triangle,
            (2, _) => CellKind::Quadrilateral,
            (3, 4) => CellKind::Tetrahedron,
            (3, 5) => CellKind::Pyramid,
            (3, 6) => CellKind::Prism,
            _ => CellKind::Hexahedron,
        }
    }

    /// Whether an integer lattice index (out of `n` subdivisions per direction) lies in
    /// the closed (or open) canonical cell.
    fn lattice_contains(self, idx: &[usize], n: usize, include_boundary: bool) -> bool {
        // Closed cell: sums <= n. Open cell: every coordinate > 0 and sums < n.
        let le = |s: usize| if include_boundary { s <= n } else { s < n };
        let pos = |i: usize| include_boundary || i > 0;
        match self {
            CellKind::Point => true,
            CellKind::Interval => pos(idx[0]) && le(idx[0]),
            CellKind::Triangle => pos(idx[0]) && pos(idx[1]) && le(idx[0] + idx[1]),
            CellKind::Quadrilateral => idx.iter().all(|&i| pos(i) && le(i)),
            CellKind::Tetrahedron => idx.iter().all(|&i| pos(i)) && le(idx[0] + idx[1] + idx[2]),
            CellKind::Hexahedron => idx.iter().all(|&i| pos(i) && le(i)),
            CellKind::Prism => {
                pos(idx[0]) && pos(idx[1]) && le(idx[0] + idx[1]) && pos(idx[2]) && le(idx[2])
            }
            CellKind::Pyramid => {
                // Apex guard: drop points with 1 - z below half a grid spacing, i.e. z = 1.
                idx.iter().all(|&i| pos(i))
                    && le(idx[0] + idx[2])
                    && le(idx[1] + idx[2])
                    && idx[2] < n
            }
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "point" | "vertex" => CellKind::Point,
            "interval" => CellKind::Interval,
            "triangle" => CellKind::Triangle,
            "quadrilateral" => CellKind::Quadrilateral,
            "tetrahedron" => CellKind::Tetrahedron,
            "hexahedron" => CellKind::Hexahedron,
            "prism" => CellKind::Prism,
            "pyramid" => CellKind::Pyramid,
            _ => return Err(Error::Parse(format!("unknown cell kind '{s}'"))),
        })
    }
}

/// A sub-entity of a cell, identified by dimension and index within that dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityRef {
    pub dim: usize,
    pub index: usize,
}

impl EntityRef {
    pub fn new(dim: usize, index: usize) -> Self {
        Self { dim, index }
    }
}

impl fmt::Display for EntityRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.dim, self.index)
    }
}

/// Name of an entity by codimension (Table-style "facet", "ridge", ...) and by dimension.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EntityName {
    pub by_codim: &'static str,
    pub by_dim: &'static str,
}

/// Names the entities of codimension `codim` in a cell of topological dimension `tdim`.
pub fn entity_name(tdim: usize, codim: usize) -> Result<EntityName> {
    if tdim > 3 {
        return domain(format!("topological dimension {tdim} exceeds 3"));
    }
    if codim > tdim {
        return domain(format!("codimension {codim} exceeds topological dimension {tdim}"));
    }
    let by_codim = ["the cell", "facet", "ridge", "peak"][codim];
    let by_dim = ["vertex", "edge", "face", "volume"][tdim - codim];
    Ok(EntityName { by_codim, by_dim })
}

/// Affine map `t -> origin + sum_i t_i axes[i]` from a reference cell into ambient space.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub origin: Vec<f64>,
    /// Columns of the Jacobian; one per source dimension.
    pub axes: Vec<Vec<f64>>,
}

impl AffineMap {
    pub fn identity(dim: usize) -> Self {
        let axes = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { origin: vec![0.0; dim], axes }
    }

    pub fn source_dim(&self) -> usize {
        self.axes.len()
    }

    pub fn target_dim(&self) -> usize {
        self.origin.len()
    }

    pub fn apply(&self, t: &[f64]) -> Vec<f64> {
        let mut x = self.origin.clone();
        for (ti, axis) in t.iter().zip(&self.axes) {
            for (xj, aj) in x.iter_mut().zip(axis) {
                *xj += ti * aj;
            }
        }
        x
    }

    /// Jacobian as a `target_dim x source_dim` matrix.
    pub fn jacobian(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.target_dim(), self.source_dim(), |i, j| self.axes[j][i])
    }

    /// Volume scaling `sqrt(det(J^T J))`; 1 for a map from a point.
    pub fn metric(&self) -> f64 {
        if self.source_dim() == 0 {
            return 1.0;
        }
        let j = self.jacobian();
        (j.transpose() * &j).determinant().abs().sqrt()
    }

    /// Inverse of a square affine map.
    pub fn inverse(&self) -> Result<AffineMap> {
        let n = self.source_dim();
        if n != self.target_dim() {
            return domain("only square affine maps can be inverted");
        }
        let inv = self
            .jacobian()
            .try_inverse()
            .ok_or_else(|| Error::Domain("singular affine map".into()))?;
        let b = nalgebra::DVector::from_column_slice(&self.origin);
        let o = -(&inv * b);
        Ok(AffineMap {
            origin: o.iter().copied().collect(),
            axes: (0..n).map(|j| inv.column(j).iter().copied().collect()).collect(),
        })
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &AffineMap) -> AffineMap {
        let origin = self.apply(&inner.origin);
        let axes = inner
            .axes
            .iter()
            .map(|a| {
                let mut v = vec![0.0; self.target_dim()];
                for (ai, col) in a.iter().zip(&self.axes) {
                    for (vj, cj) in v.iter_mut().zip(col) {
                        *vj += ai * cj;
                    }
                }
                v
            })
            .collect();
        AffineMap { origin, axes }
    }
}

/// Topology and geometry of a reference cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceCell {
    kind: CellKind,
    vertices: Vec<Vec<f64>>,
    topology: Vec<Vec<Vec<usize>>>,
}

impl ReferenceCell {
    /// The canonical cell of the given kind.
    pub fn new(kind: CellKind) -> Self {
        Self {
            kind,
            vertices: kind.canonical_vertices(),
            topology: kind.canonical_topology(),
        }
    }

    /// A cell of the given kind with the given vertex coordinates (same numbering as the
    /// canonical cell). The vertices must be an affine image of the canonical vertices.
    pub fn with_vertices(kind: CellKind, vertices: Vec<Vec<f64>>) -> Result<Self> {
        let canonical = Self::new(kind);
        if vertices.len() != canonical.vertices.len() {
            return domain(format!(
                "a {kind} has {} vertices, got {}",
                canonical.vertices.len(),
                vertices.len()
            ));
        }
        if vertices.iter().any(|v| v.len() != kind.tdim()) {
            return domain(format!("{kind} vertices must have {} coordinates", kind.tdim()));
        }
        let cell = Self {
            kind,
            vertices,
            topology: kind.canonical_topology(),
        };
        let map = cell.reference_map();
        if kind.tdim() > 0 && map.jacobian().determinant().abs() < GEOM_TOL {
            return domain("cell vertices are degenerate");
        }
        if !cell.is_affine_image() {
            return capability(format!(
                "vertices {:?} are not an affine image of the reference {kind}",
                cell.vertices
            ));
        }
        Ok(cell)
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn tdim(&self) -> usize {
        self.kind.tdim()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn topology(&self) -> &[Vec<Vec<usize>>] {
        &self.topology
    }

    pub fn entity_count(&self, dim: usize) -> usize {
        self.topology.get(dim).map_or(0, |e| e.len())
    }

    /// Every sub-entity, ordered by dimension then index.
    pub fn sub_entities(&self) -> Vec<EntityRef> {
        (0..=self.tdim())
            .flat_map(|d| (0..self.entity_count(d)).map(move |i| EntityRef::new(d, i)))
            .collect()
    }

    pub fn entity_vertices(&self, e: EntityRef) -> Result<&[usize]> {
        self.topology
            .get(e.dim)
            .and_then(|ents| ents.get(e.index))
            .map(|v| v.as_slice())
            .ok_or_else(|| Error::Domain(format!("entity {e} does not exist on a {}", self.kind)))
    }

    /// Kind of the reference cell of a sub-entity.
    pub fn entity_kind(&self, e: EntityRef) -> Result<CellKind> {
        let v = self.entity_vertices(e)?;
        Ok(CellKind::sub_kind(e.dim, v.len()))
    }

    /// `e` together with every lower-dimensional entity contained in it.
    pub fn entity_closure(&self, e: EntityRef) -> Result<BTreeSet<EntityRef>> {
        let verts: BTreeSet<usize> = self.entity_vertices(e)?.iter().copied().collect();
        let mut out = BTreeSet::new();
        for d in 0..=e.dim {
            for (i, ev) in self.topology[d].iter().enumerate() {
                if ev.iter().all(|v| verts.contains(v)) {
                    out.insert(EntityRef::new(d, i));
                }
            }
        }
        Ok(out)
    }

    pub fn is_canonical(&self) -> bool {
        self.vertices
            .iter()
            .zip(self.kind.canonical_vertices())
            .all(|(a, b)| a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= GEOM_TOL))
    }

    /// Affine map from the canonical cell onto this cell.
    pub fn reference_map(&self) -> AffineMap {
        let v0 = self.vertices[0].clone();
        let axes = self
            .kind
            .axis_vertices()
            .iter()
            .map(|&i| self.vertices[i].iter().zip(&v0).map(|(a, b)| a - b).collect())
            .collect();
        AffineMap { origin: v0, axes }
    }

    /// True when every vertex is the image of the canonical vertex under [`Self::reference_map`].
    pub fn is_affine_image(&self) -> bool {
        let map = self.reference_map();
        self.kind
            .canonical_vertices()
            .iter()
            .zip(&self.vertices)
            .all(|(c, v)| {
                map.apply(c)
                    .iter()
                    .zip(v)
                    .all(|(a, b)| (a - b).abs() <= GEOM_TOL * (1.0 + b.abs()))
            })
    }

    /// Measure of this cell.
    pub fn volume(&self) -> f64 {
        self.kind.volume() * self.reference_map().metric()
    }

    /// Affine map from the reference cell of `e` onto `e`, sending reference vertices to
    /// `e`'s vertices in topology order.
    pub fn entity_map(&self, e: EntityRef) -> Result<AffineMap> {
        if e.dim == 0 {
            return domain("vertices have no entity map; use the vertex coordinates directly");
        }
        if e.dim == self.tdim() {
            self.entity_vertices(e)?;
            return Ok(self.reference_map());
        }
        let kind = self.entity_kind(e)?;
        let verts = self.entity_vertices(e)?;
        let v0 = &self.vertices[verts[0]];
        let axes = kind
            .axis_vertices()
            .iter()
            .map(|&i| self.vertices[verts[i]].iter().zip(v0).map(|(a, b)| a - b).collect())
            .collect();
        Ok(AffineMap {
            origin: v0.clone(),
            axes,
        })
    }

    pub fn entity_midpoint(&self, e: EntityRef) -> Result<Vec<f64>> {
        let verts = self.entity_vertices(e)?;
        let mut m = vec![0.0; self.tdim()];
        for &v in verts {
            for (mi, x) in m.iter_mut().zip(&self.vertices[v]) {
                *mi += x / verts.len() as f64;
            }
        }
        Ok(m)
    }

    /// Unit outward normal of facet `index`.
    pub fn facet_normal(&self, index: usize) -> Result<Vec<f64>> {
        let tdim = self.tdim();
        if tdim == 0 {
            return domain("a point has no facets");
        }
        let e = EntityRef::new(tdim - 1, index);
        let mid = self.entity_midpoint(e)?;
        let centre = self.entity_midpoint(EntityRef::new(tdim, 0))?;
        let mut n = match tdim {
            1 => vec![1.0],
            2 => {
                let t = &self.entity_map(e)?.axes[0];
                vec![t[1], -t[0]]
            }
            _ => {
                let m = self.entity_map(e)?;
                let (a, b) = (&m.axes[0], &m.axes[1]);
                vec![
                    a[1] * b[2] - a[2] * b[1],
                    a[2] * b[0] - a[0] * b[2],
                    a[0] * b[1] - a[1] * b[0],
                ]
            }
        };
        let outward: f64 = n.iter().zip(mid.iter().zip(&centre)).map(|(ni, (m, c))| ni * (m - c)).sum();
        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = if outward < 0.0 { -1.0 } else { 1.0 } / norm;
        n.iter_mut().for_each(|x| *x *= s);
        Ok(n)
    }

    /// Unit tangent of edge `index`, from its lower-numbered to its higher-numbered vertex.
    pub fn edge_tangent(&self, index: usize) -> Result<Vec<f64>> {
        let verts = self.entity_vertices(EntityRef::new(1, index))?;
        let (a, b) = (verts[0].min(verts[1]), verts[0].max(verts[1]));
        let t: Vec<f64> = self.vertices[b].iter().zip(&self.vertices[a]).map(|(x, y)| x - y).collect();
        let norm = t.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(t.into_iter().map(|x| x / norm).collect())
    }

    /// Regular lattice with `n_per_dir` points per direction over the bounding box of the
    /// canonical cell, filtered (in exact integer arithmetic) to the closed or open cell
    /// and mapped onto this cell. Ordered with `x` varying fastest.
    pub fn lattice_points(&self, n_per_dir: usize, include_boundary: bool) -> Vec<Vec<f64>> {
        let tdim = self.tdim();
        if tdim == 0 {
            return vec![self.vertices[0].clone()];
        }
        let n = n_per_dir.max(2) - 1;
        let canonical = self.is_canonical();
        let map = self.reference_map();
        let mut pts = Vec::new();
        let mut idx = vec![0usize; tdim];
        let total = (n + 1).pow(tdim as u32);
        for flat in 0..total {
            let mut r = flat;
            for i in idx.iter_mut() {
                *i = r % (n + 1);
                r /= n + 1;
            }
            if self.kind.lattice_contains(&idx, n, include_boundary) {
                let p: Vec<f64> = idx.iter().map(|&i| i as f64 / n as f64).collect();
                pts.push(if canonical { p } else { map.apply(&p) });
            }
        }
        pts
    }

    /// Whether a point lies in the closed cell, to tolerance `tol`.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        if point.len() != self.tdim() {
            return false;
        }
        let p = if self.is_canonical() {
            point.to_vec()
        } else {
            match self.reference_map().inverse() {
                Ok(inv) => inv.apply(point),
                Err(_) => return false,
            }
        };
        let ge = |a: f64| a >= -tol;
        match self.kind {
            CellKind::Point => true,
            CellKind::Interval => ge(p[0]) && ge(1.0 - p[0]),
            CellKind::Triangle => ge(p[0]) && ge(p[1]) && ge(1.0 - p[0] - p[1]),
            CellKind::Quadrilateral | CellKind::Hexahedron => p.iter().all(|&x| ge(x) && ge(1.0 - x)),
            CellKind::Tetrahedron => p.iter().all(|&x| ge(x)) && ge(1.0 - p[0] - p[1] - p[2]),
            CellKind::Prism => {
                ge(p[0]) && ge(p[1]) && ge(1.0 - p[0] - p[1]) && ge(p[2]) && ge(1.0 - p[2])
            }
            CellKind::Pyramid => {
                p.iter().all(|&x| ge(x)) && ge(1.0 - p[0] - p[2]) && ge(1.0 - p[1] - p[2])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_edges_follow_numbering() {
        let cell = ReferenceCell::new(CellKind::Triangle);
        assert_eq!(cell.topology()[1], vec![vec![1, 2], vec![0, 2], vec![0, 1]]);
    }

    #[test]
    fn interval_topology() {
        let cell = ReferenceCell::new(CellKind::Interval);
        assert_eq!(cell.topology()[0], vec![vec![0], vec![1]]);
        assert_eq!(cell.topology()[1], vec![vec![0, 1]]);
    }

    #[test]
    fn point_cell_is_its_own_entity() {
        let cell = ReferenceCell::new(CellKind::Point);
        assert_eq!(cell.sub_entities(), vec![EntityRef::new(0, 0)]);
    }

    #[test]
    fn entity_counts() {
        let expected: [(CellKind, &[usize]); 7] = [
            (CellKind::Interval, &[2, 1]),
            (CellKind::Triangle, &[3, 3, 1]),
            (CellKind::Quadrilateral, &[4, 4, 1]),
            (CellKind::Tetrahedron, &[4, 6, 4, 1]),
            (CellKind::Hexahedron, &[8, 12, 6, 1]),
            (CellKind::Prism, &[6, 9, 5, 1]),
            (CellKind::Pyramid, &[5, 8, 5, 1]),
        ];
        for (kind, counts) in expected {
            let cell = ReferenceCell::new(kind);
            let got: Vec<usize> = (0..=kind.tdim()).map(|d| cell.entity_count(d)).collect();
            assert_eq!(got, counts, "{kind}");
            let euler: i64 = got
                .iter()
                .enumerate()
                .map(|(d, &c)| if d % 2 == 0 { c as i64 } else { -(c as i64) })
                .sum();
            // closed cells are contractible: V - E + F - C = 1
            assert_eq!(euler, 1, "{kind}");
            for d in 0..=kind.tdim() {
                for e in &cell.topology()[d] {
                    assert!(e.iter().all(|&v| v < cell.vertices().len()));
                }
            }
        }
    }

    #[test]
    fn entity_names() {
        assert_eq!(entity_name(3, 1).unwrap().by_codim, "facet");
        assert_eq!(entity_name(3, 1).unwrap().by_dim, "face");
        assert_eq!(entity_name(2, 2).unwrap().by_codim, "ridge");
        assert_eq!(entity_name(2, 2).unwrap().by_dim, "vertex");
        assert_eq!(entity_name(1, 0).unwrap().by_codim, "the cell");
        assert_eq!(entity_name(3, 3).unwrap().by_codim, "peak");
        assert!(matches!(entity_name(1, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn closures() {
        let tri = ReferenceCell::new(CellKind::Triangle);
        let c: Vec<_> = tri.entity_closure(EntityRef::new(1, 2)).unwrap().into_iter().collect();
        assert_eq!(c, vec![EntityRef::new(0, 0), EntityRef::new(0, 1), EntityRef::new(1, 2)]);
        let v = tri.entity_closure(EntityRef::new(0, 2)).unwrap();
        assert_eq!(v.len(), 1);
        let tet = ReferenceCell::new(CellKind::Tetrahedron);
        assert_eq!(tet.entity_closure(EntityRef::new(3, 0)).unwrap().len(), 15);
        assert!(tri.entity_closure(EntityRef::new(1, 3)).is_err());
    }

    #[test]
    fn closure_is_idempotent_and_contains_entity() {
        for kind in CellKind::ALL {
            let cell = ReferenceCell::new(kind);
            for e in cell.sub_entities() {
                let c = cell.entity_closure(e).unwrap();
                assert!(c.contains(&e));
                let mut cc = BTreeSet::new();
                for f in &c {
                    cc.extend(cell.entity_closure(*f).unwrap());
                }
                assert_eq!(c, cc);
            }
        }
    }

    #[test]
    fn entity_maps() {
        let tri = ReferenceCell::new(CellKind::Triangle);
        let m = tri.entity_map(EntityRef::new(1, 1)).unwrap();
        assert_eq!(m.apply(&[0.3]), vec![0.0, 0.3]);
        let quad = ReferenceCell::new(CellKind::Quadrilateral);
        let m = quad.entity_map(EntityRef::new(1, 0)).unwrap();
        assert_eq!(m.apply(&[0.3]), vec![0.3, 0.0]);
        let int = ReferenceCell::new(CellKind::Interval);
        assert_eq!(int.entity_map(EntityRef::new(1, 0)).unwrap(), AffineMap::identity(1));
        assert!(tri.entity_map(EntityRef::new(0, 0)).is_err());
    }

    #[test]
    fn entity_maps_hit_vertices_exactly() {
        for kind in CellKind::ALL {
            let cell = ReferenceCell::new(kind);
            for e in cell.sub_entities().into_iter().filter(|e| e.dim > 0) {
                let map = cell.entity_map(e).unwrap();
                let sub = ReferenceCell::new(cell.entity_kind(e).unwrap());
                let verts = cell.entity_vertices(e).unwrap();
                for (rv, &v) in sub.vertices().iter().zip(verts) {
                    assert_eq!(map.apply(rv), cell.vertices()[v], "{kind} {e}");
                }
            }
        }
    }

    #[test]
    fn lattices() {
        let int = ReferenceCell::new(CellKind::Interval);
        assert_eq!(int.lattice_points(3, true), vec![vec![0.0], vec![0.5], vec![1.0]]);
        let tri = ReferenceCell::new(CellKind::Triangle);
        assert_eq!(
            tri.lattice_points(3, true),
            vec![
                vec![0.0, 0.0],
                vec![0.5, 0.0],
                vec![1.0, 0.0],
                vec![0.0, 0.5],
                vec![0.5, 0.5],
                vec![0.0, 1.0]
            ]
        );
        let quad = ReferenceCell::new(CellKind::Quadrilateral);
        assert_eq!(quad.lattice_points(2, true).len(), 4);
        assert_eq!(tri.lattice_points(4, false), vec![vec![1.0 / 3.0, 1.0 / 3.0]]);
    }

    #[test]
    fn lattice_points_are_inside() {
        for kind in CellKind::ALL {
            let cell = ReferenceCell::new(kind);
            for n in 2..7 {
                for p in cell.lattice_points(n, true) {
                    // Recover the integer grid indices and check the inequalities exactly.
                    let idx: Vec<i64> = p.iter().map(|x| (x * (n - 1) as f64).round() as i64).collect();
                    let m = (n - 1) as i64;
                    let ok = idx.iter().all(|&i| (0..=m).contains(&i))
                        && match kind {
                            CellKind::Triangle => idx[0] + idx[1] <= m,
                            CellKind::Tetrahedron => idx.iter().sum::<i64>() <= m,
                            CellKind::Prism => idx[0] + idx[1] <= m,
                            CellKind::Pyramid => idx[0] + idx[2] <= m && idx[1] + idx[2] <= m,
                            _ => true,
                        };
                    assert!(ok, "{kind} {p:?}");
                    assert!(cell.contains(&p, 1e-15), "{kind} {p:?}");
                }
            }
        }
        let pyr = ReferenceCell::new(CellKind::Pyramid);
        assert!(pyr.lattice_points(5, true).iter().all(|p| 1.0 - p[2] >= 0.125));
    }

    #[test]
    fn normals_point_outward() {
        let tri = ReferenceCell::new(CellKind::Triangle);
        assert_eq!(tri.facet_normal(2).unwrap(), vec![0.0, -1.0]);
        assert_eq!(tri.facet_normal(1).unwrap(), vec![-1.0, 0.0]);
        let n0 = tri.facet_normal(0).unwrap();
        assert!((n0[0] - 0.5f64.sqrt()).abs() < 1e-15 && (n0[1] - 0.5f64.sqrt()).abs() < 1e-15);
        let tet = ReferenceCell::new(CellKind::Tetrahedron);
        assert_eq!(tet.facet_normal(3).unwrap(), vec![0.0, 0.0, -1.0]);
        let int = ReferenceCell::new(CellKind::Interval);
        assert_eq!(int.facet_normal(0).unwrap(), vec![-1.0]);
        assert_eq!(int.facet_normal(1).unwrap(), vec![1.0]);
    }

    #[test]
    fn alternative_vertices() {
        let sq = ReferenceCell::with_vertices(
            CellKind::Quadrilateral,
            vec![vec![-1.0, -1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![1.0, 1.0]],
        )
        .unwrap();
        assert!(!sq.is_canonical());
        assert!((sq.volume() - 4.0).abs() < 1e-14);
        assert_eq!(sq.lattice_points(2, true)[3], vec![1.0, 1.0]);
        let bad = ReferenceCell::with_vertices(
            CellKind::Quadrilateral,
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 2.0]],
        );
        assert!(matches!(bad, Err(Error::Capability(_))));
    }
}
