//! Built-in element families.

use super::element::{build_element, CiarletElement, ElementInfo};
use super::functional::{Functional, MomentComponent};
use super::points::{interior_points, nodes_1d, LagrangeVariant};
use crate::cells::{CellKind, EntityRef, ReferenceCell};
use crate::error::{capability, Error, Result};
use crate::mapping::MapKind;
use crate::polyset::{natural_indices, natural_space, OrthonormalBasis, PolyFunction, PolySet, Term};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Lagrange,
    DiscontinuousLagrange,
    CrouzeixRaviart,
    RaviartThomas,
    Nedelec,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Lagrange,
        Family::DiscontinuousLagrange,
        Family::CrouzeixRaviart,
        Family::RaviartThomas,
        Family::Nedelec,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Lagrange => "lagrange",
            Family::DiscontinuousLagrange => "discontinuous_lagrange",
            Family::CrouzeixRaviart => "crouzeix_raviart",
            Family::RaviartThomas => "raviart_thomas",
            Family::Nedelec => "nedelec",
        }
    }

    pub fn map_kind(self) -> MapKind {
        match self {
            Family::RaviartThomas => MapKind::Contravariant,
            Family::Nedelec => MapKind::Covariant,
            _ => MapKind::Identity,
        }
    }

    /// Cells on which the family is implemented.
    pub fn cells(self) -> &'static [CellKind] {
        use CellKind::*;
        match self {
            Family::Lagrange | Family::DiscontinuousLagrange => {
                &[Interval, Triangle, Quadrilateral, Tetrahedron, Hexahedron, Prism]
            }
            _ => &[Triangle, Tetrahedron],
        }
    }

    /// Smallest and largest supported indexing degree (`None` means unbounded).
    pub fn degrees(self) -> (usize, Option<usize>) {
        match self {
            Family::Lagrange => (1, None),
            Family::CrouzeixRaviart => (1, Some(1)),
            _ => (0, None),
        }
    }

    pub fn has_variants(self) -> bool {
        matches!(self, Family::Lagrange | Family::DiscontinuousLagrange)
    }

    /// Degree of the natural space containing the family's space of degree `k`.
    pub fn superdegree(self, k: usize) -> usize {
        match self {
            Family::RaviartThomas | Family::Nedelec => k + 1,
            _ => k,
        }
    }

    fn supported_list() -> String {
        Family::ALL
            .iter()
            .map(|f| {
                let cells: Vec<&str> = f.cells().iter().map(|c| c.name()).collect();
                let (lo, hi) = f.degrees();
                let deg = match hi {
                    Some(h) if h == lo => format!("degree {lo}"),
                    Some(h) => format!("degrees {lo}..={h}"),
                    None => format!("degree >= {lo}"),
                };
                format!("{} on {{{}}} ({deg})", f.name(), cells.join(", "))
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match norm.as_str() {
            "lagrange" | "p" | "cg" => Family::Lagrange,
            "discontinuous_lagrange" | "dlagrange" | "dg" | "dp" => Family::DiscontinuousLagrange,
            "crouzeix_raviart" | "cr" => Family::CrouzeixRaviart,
            "raviart_thomas" | "rt" => Family::RaviartThomas,
            "nedelec" | "nedelec_first_kind" | "n1curl" | "n1" => Family::Nedelec,
            _ => return Err(Error::Parse(format!("unknown element family '{s}'"))),
        })
    }
}

/// Basis used for the weights of integral moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentBasis {
    /// Orthonormal polynomials on the entity (the default; keeps the dual matrix well
    /// conditioned).
    #[default]
    Orthonormal,
    /// Plain monomials. Gives an equivalent element; useful for testing invariance.
    Monomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FamilyOptions {
    pub moment_basis: MomentBasis,
}

/// Builds `family` of degree `k` on the canonical cell of kind `cell`.
pub fn make_family(family: Family, cell: CellKind, k: usize, variant: Option<LagrangeVariant>) -> Result<CiarletElement> {
    make_family_on(family, &ReferenceCell::new(cell), k, variant, &FamilyOptions::default())
}

/// Builds `family` of degree `k` on `cell`, which may carry non-canonical vertices.
pub fn make_family_on(
    family: Family,
    cell: &ReferenceCell,
    k: usize,
    variant: Option<LagrangeVariant>,
    options: &FamilyOptions,
) -> Result<CiarletElement> {
    let kind = cell.kind();
    let (lo, hi) = family.degrees();
    if !family.cells().contains(&kind) || k < lo || hi.is_some_and(|h| k > h) {
        return capability(format!(
            "{family} of degree {k} on a {kind} is not supported; supported: {}",
            Family::supported_list()
        ));
    }
    if variant.is_some() && !family.has_variants() {
        return capability(format!("{family} has no point variants"));
    }
    let variant_name = family
        .has_variants()
        .then(|| variant.unwrap_or_default().to_string());
    let info = ElementInfo {
        family: family.name().to_string(),
        variant: variant_name,
        degree: k,
    };
    let v = variant.unwrap_or_default();
    let (space, functionals) = match family {
        Family::Lagrange => (natural_space(cell, k)?, lagrange_functionals(cell, k, v, false)?),
        Family::DiscontinuousLagrange => {
            (natural_space(cell, k)?, lagrange_functionals(cell, k, v, true)?)
        }
        Family::CrouzeixRaviart => (natural_space(cell, 1)?, cr_functionals(cell)?),
        Family::RaviartThomas => (rt_space(cell, k)?, rt_functionals(cell, k, options)?),
        Family::Nedelec => (n1_space(cell, k)?, n1_functionals(cell, k, options)?),
    };
    build_element(info, cell, space, functionals, family.map_kind(), family.superdegree(k))
}

fn lagrange_functionals(cell: &ReferenceCell, k: usize, v: LagrangeVariant, interior: bool) -> Result<Vec<Functional>> {
    let tdim = cell.tdim();
    let whole = EntityRef::new(tdim, 0);
    if k == 0 {
        return Ok(vec![Functional::point_eval(whole, cell.entity_midpoint(whole)?)]);
    }
    let nodes = nodes_1d(k, v);
    let mut out = Vec::new();
    for d in 0..=tdim {
        for i in 0..cell.entity_count(d) {
            let e = EntityRef::new(d, i);
            let owner = if interior { whole } else { e };
            if d == 0 {
                let vtx = cell.entity_vertices(e)?[0];
                out.push(Functional::point_eval(owner, cell.vertices()[vtx].clone()));
                continue;
            }
            let map = cell.entity_map(e)?;
            for p in interior_points(cell.entity_kind(e)?, k, &nodes) {
                out.push(Functional::point_eval(owner, map.apply(&p)));
            }
        }
    }
    Ok(out)
}

fn cr_functionals(cell: &ReferenceCell) -> Result<Vec<Functional>> {
    let f = cell.tdim() - 1;
    (0..cell.entity_count(f))
        .map(|i| {
            let e = EntityRef::new(f, i);
            Ok(Functional::point_eval(e, cell.entity_midpoint(e)?))
        })
        .collect()
}

fn monomial(tdim: usize, p: [u32; 3]) -> PolyFunction {
    PolyFunction::term(tdim, Term::new(p, 0), 1.0)
}

/// Monomials of total degree exactly `k` in `tdim` variables.
fn homogeneous(tdim: usize, k: usize) -> Vec<PolyFunction> {
    let kind = if tdim == 2 { CellKind::Triangle } else { CellKind::Tetrahedron };
    natural_indices(kind, k)
        .into_iter()
        .filter(|p| p.iter().sum::<u32>() as usize == k)
        .map(|p| monomial(tdim, p))
        .collect()
}

/// `(P_k)^d`, one vector monomial per component and exponent.
fn vector_complete(tdim: usize, k: usize) -> Vec<PolyFunction> {
    let kind = if tdim == 2 { CellKind::Triangle } else { CellKind::Tetrahedron };
    let idx = natural_indices(kind, k);
    (0..tdim)
        .flat_map(|c| idx.iter().map(move |p| PolyFunction::unit_vector(&monomial(tdim, *p), c, tdim)))
        .collect()
}

fn rt_space(cell: &ReferenceCell, k: usize) -> Result<PolySet> {
    let d = cell.tdim();
    let mut fs = vector_complete(d, k);
    for m in homogeneous(d, k) {
        let comps: Vec<PolyFunction> = (0..d)
            .map(|c| m.mul_scalar(&PolyFunction::coordinate(d, c)))
            .collect::<Result<_>>()?;
        fs.push(PolyFunction::vector(&comps)?);
    }
    PolySet::new(cell.clone(), vec![d], fs)
}

fn n1_space(cell: &ReferenceCell, k: usize) -> Result<PolySet> {
    let d = cell.tdim();
    let mut fs = vector_complete(d, k);
    let x = |i: usize| PolyFunction::coordinate(d, i);
    for m in homogeneous(d, k) {
        if d == 2 {
            fs.push(PolyFunction::vector(&[m.mul_scalar(&x(1))?.scale(-1.0), m.mul_scalar(&x(0))?])?);
        } else {
            // x × (m e_c) for each c.
            for c in 0..3 {
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                let mut comps = vec![PolyFunction::zero(3, vec![]); 3];
                comps[b] = m.mul_scalar(&x(a))?;
                comps[a] = m.mul_scalar(&x(b))?.scale(-1.0);
                fs.push(PolyFunction::vector(&comps)?);
            }
        }
    }
    if d == 2 {
        PolySet::new(cell.clone(), vec![d], fs)
    } else {
        PolySet::spanning(cell.clone(), vec![d], fs)
    }
}

/// Scalar weights spanning `P_k` on the canonical cell of `kind`.
fn scalar_weights(kind: CellKind, k: usize, options: &FamilyOptions) -> Result<Vec<PolyFunction>> {
    match options.moment_basis {
        MomentBasis::Orthonormal => Ok(OrthonormalBasis::new(&ReferenceCell::new(kind), k)?
            .to_polyset()?
            .into_functions()),
        MomentBasis::Monomial => Ok(natural_space(&ReferenceCell::new(kind), k)?.into_functions()),
    }
}

/// Vector weights `e_c w_j` spanning `(P_k)^size`, ordered by component then `j`.
fn vector_weights(kind: CellKind, k: usize, size: usize, options: &FamilyOptions) -> Result<Vec<PolyFunction>> {
    let scalars = scalar_weights(kind, k, options)?;
    Ok((0..size)
        .flat_map(|c| scalars.iter().map(move |w| PolyFunction::unit_vector(w, c, size)))
        .collect())
}

fn rt_functionals(cell: &ReferenceCell, k: usize, options: &FamilyOptions) -> Result<Vec<Functional>> {
    let d = cell.tdim();
    let facet_kind = if d == 2 { CellKind::Interval } else { CellKind::Triangle };
    let mut out = Vec::new();
    let weights = scalar_weights(facet_kind, k, options)?;
    for i in 0..cell.entity_count(d - 1) {
        for w in &weights {
            out.push(Functional::moment(EntityRef::new(d - 1, i), w.clone(), MomentComponent::Normal));
        }
    }
    if k >= 1 {
        for w in vector_weights(cell.kind(), k - 1, d, options)? {
            out.push(Functional::moment(EntityRef::new(d, 0), w, MomentComponent::Full));
        }
    }
    Ok(out)
}

fn n1_functionals(cell: &ReferenceCell, k: usize, options: &FamilyOptions) -> Result<Vec<Functional>> {
    let d = cell.tdim();
    let mut out = Vec::new();
    let edge_weights = scalar_weights(CellKind::Interval, k, options)?;
    for i in 0..cell.entity_count(1) {
        for w in &edge_weights {
            out.push(Functional::moment(EntityRef::new(1, i), w.clone(), MomentComponent::Tangent));
        }
    }
    if d == 3 && k >= 1 {
        let face_weights = vector_weights(CellKind::Triangle, k - 1, 2, options)?;
        for i in 0..cell.entity_count(2) {
            for w in &face_weights {
                out.push(Functional::moment(EntityRef::new(2, i), w.clone(), MomentComponent::Tangent));
            }
        }
    }
    let interior_degree = if d == 2 { k.checked_sub(1) } else { k.checked_sub(2) };
    if let Some(q) = interior_degree {
        for w in vector_weights(cell.kind(), q, d, options)? {
            out.push(Functional::moment(EntityRef::new(d, 0), w, MomentComponent::Full));
        }
    }
    Ok(out)
}

/// A textual element description `family:cell:degree[:variant]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ElementSpec {
    pub family: Family,
    pub cell: CellKind,
    pub degree: usize,
    pub variant: Option<LagrangeVariant>,
}

impl ElementSpec {
    pub fn build(&self) -> Result<CiarletElement> {
        make_family(self.family, self.cell, self.degree, self.variant)
    }

    /// Builds on a cell with the given vertices (same numbering as the canonical cell).
    pub fn build_on(&self, vertices: Option<Vec<Vec<f64>>>) -> Result<CiarletElement> {
        match vertices {
            None => self.build(),
            Some(v) => {
                let cell = ReferenceCell::with_vertices(self.cell, v)?;
                make_family_on(self.family, &cell, self.degree, self.variant, &FamilyOptions::default())
            }
        }
    }
}

/// Every supported family, cell, degree (up to `max_degree`) and point variant.
pub fn supported_specs(max_degree: usize) -> Vec<ElementSpec> {
    let mut out = Vec::new();
    for family in Family::ALL {
        let (lo, hi) = family.degrees();
        let top = hi.map_or(max_degree, |h| h.min(max_degree));
        let variants: Vec<Option<LagrangeVariant>> = if family.has_variants() {
            vec![Some(LagrangeVariant::Equispaced), Some(LagrangeVariant::Gll)]
        } else {
            vec![None]
        };
        for &cell in family.cells() {
            for degree in lo..=top {
                for &variant in &variants {
                    out.push(ElementSpec {
                        family,
                        cell,
                        degree,
                        variant,
                    });
                }
            }
        }
    }
    out
}

impl FromStr for ElementSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(Error::Parse(format!(
                "element spec '{s}' must look like family:cell:degree[:variant]"
            )));
        }
        let family: Family = parts[0].parse()?;
        let cell: CellKind = parts[1].parse()?;
        let degree: usize = parts[2]
            .parse()
            .map_err(|_| Error::Parse(format!("degree '{}' is not a non-negative integer", parts[2])))?;
        let variant = parts.get(3).map(|v| v.parse()).transpose()?;
        Ok(Self {
            family,
            cell,
            degree,
            variant,
        })
    }
}

impl TryFrom<String> for ElementSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<ElementSpec> for String {
    fn from(s: ElementSpec) -> String {
        s.to_string()
    }
}

impl fmt::Display for ElementSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.family, self.cell, self.degree)?;
        if let Some(v) = self.variant {
            write!(f, ":{v}")?;
        }
        Ok(())
    }
}
