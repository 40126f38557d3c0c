//! Rank-based span equality and variant verification.

use crate::analysis::traces::{trace_spaces_with, TraceSet};
use crate::cells::{EntityRef, ReferenceCell};
use crate::elements::{CiarletElement, ElementSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::mapping::align_convention;
use crate::parallel::{map_ordered, Execution};
use crate::tabulation::FunctionSet;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

pub const DEFAULT_RANK_TOLERANCE: f64 = 1e-8;

/// Lattice density and rank tolerance shared by every span test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpanTestConfig {
    /// Lattice points per direction; `None` picks `2 * degree + 3` for the sets involved.
    pub points_per_direction: Option<usize>,
    pub rank_rel_tolerance: f64,
}

impl Default for SpanTestConfig {
    fn default() -> Self {
        Self {
            points_per_direction: None,
            rank_rel_tolerance: DEFAULT_RANK_TOLERANCE,
        }
    }
}

impl SpanTestConfig {
    pub fn with_points(n: usize) -> Self {
        Self {
            points_per_direction: Some(n),
            ..Self::default()
        }
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.rank_rel_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.rank_rel_tolerance;
        if !(t > 0.0 && t <= 1e-4) {
            return Err(Error::Config(format!("rank tolerance {t} is outside (0, 1e-4]")));
        }
        if let Some(n) = self.points_per_direction {
            if n < 2 {
                return Err(Error::Config("at least 2 lattice points per direction are needed".into()));
            }
        }
        Ok(())
    }

    /// Lattice density for sets of (per-direction) degree at most `degree`, failing when
    /// an explicit density is too coarse to separate them.
    pub fn points_for(&self, degree: usize) -> Result<usize> {
        self.validate()?;
        let minimum = 2 * degree + 3;
        match self.points_per_direction {
            None => Ok(minimum),
            Some(n) if n >= minimum => Ok(n),
            Some(n) => Err(Error::Config(format!(
                "{n} lattice points per direction is below 2 * {degree} + 3 = {minimum}"
            ))),
        }
    }
}

/// Number of singular values above `rank_rel_tolerance` times the largest.
pub fn matrix_rank(m: &DMatrix<f64>, cfg: &SpanTestConfig) -> usize {
    linalg::rank(m, cfg.rank_rel_tolerance)
}

/// Ranks gathered while comparing two spans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanComparison {
    pub same: bool,
    pub rank_a: usize,
    pub rank_b: usize,
    pub stacked_rank: usize,
}

impl SpanComparison {
    /// Whether the span of `b` lies inside the span of `a`.
    pub fn b_in_a(&self) -> bool {
        self.rank_a == self.stacked_rank
    }

    pub fn a_in_b(&self) -> bool {
        self.rank_b == self.stacked_rank
    }
}

/// Evaluation matrix with one function per row and `s * npoints` columns. Rows are
/// scaled to unit length, which leaves ranks unchanged but keeps sets with very
/// different magnitudes comparable under a relative tolerance. Rows below `tol` times
/// the largest one (functions vanishing on the sampled entity) become zero.
pub fn evaluation_matrix(set: &dyn FunctionSet, points: &[Vec<f64>], tol: f64) -> Result<DMatrix<f64>> {
    let mut m = set.tabulate(points)?.function_rows();
    let norms: Vec<f64> = m.row_iter().map(|r| r.norm()).collect();
    let largest = norms.iter().fold(0.0f64, |a, &b| a.max(b));
    for (mut row, n) in m.row_iter_mut().zip(norms) {
        if n > tol * largest {
            row /= n;
        } else {
            row.fill(0.0);
        }
    }
    Ok(m)
}

/// Compares the spans of two sets evaluated at `points`.
pub fn compare_at(
    a: &dyn FunctionSet,
    b: &dyn FunctionSet,
    points: &[Vec<f64>],
    tol: f64,
) -> Result<SpanComparison> {
    if points.is_empty() {
        return Err(Error::Config("the evaluation lattice is empty".into()));
    }
    if a.value_size() != b.value_size() {
        return Ok(SpanComparison {
            same: false,
            rank_a: 0,
            rank_b: 0,
            stacked_rank: 0,
        });
    }
    let ma = evaluation_matrix(a, points, tol)?;
    let mb = evaluation_matrix(b, points, tol)?;
    let rank_a = linalg::rank(&ma, tol);
    let rank_b = linalg::rank(&mb, tol);
    let stacked_rank = linalg::rank(&linalg::vstack(&ma, &mb), tol);
    Ok(SpanComparison {
        same: rank_a == rank_b && rank_a == stacked_rank,
        rank_a,
        rank_b,
        stacked_rank,
    })
}

/// Lattice on entity `e` of `cell`, in the cell's coordinates.
pub fn entity_lattice(cell: &ReferenceCell, e: EntityRef, n: usize) -> Result<Vec<Vec<f64>>> {
    if e.dim == 0 {
        let v = cell.entity_vertices(e)?[0];
        return Ok(vec![cell.vertices()[v].clone()]);
    }
    let map = cell.entity_map(e)?;
    if e.dim == cell.tdim() {
        return Ok(cell.lattice_points(n, true));
    }
    let sub = ReferenceCell::new(cell.entity_kind(e)?);
    Ok(sub.lattice_points(n, true).iter().map(|p| map.apply(p)).collect())
}

/// Full span comparison of two sets of functions on `cell`, sampled on entity `e`.
pub fn compare_spans(
    a: &dyn FunctionSet,
    b: &dyn FunctionSet,
    cell: &ReferenceCell,
    e: EntityRef,
    cfg: &SpanTestConfig,
) -> Result<SpanComparison> {
    let n = cfg.points_for(a.lattice_degree().max(b.lattice_degree()))?;
    compare_at(a, b, &entity_lattice(cell, e, n)?, cfg.rank_rel_tolerance)
}

/// Whether `a` and `b` span the same space on entity `e` of `cell`. Sets with different
/// value sizes never do.
pub fn spans_same_space(
    a: &dyn FunctionSet,
    b: &dyn FunctionSet,
    cell: &ReferenceCell,
    e: EntityRef,
    cfg: &SpanTestConfig,
) -> Result<bool> {
    Ok(compare_spans(a, b, cell, e, cfg)?.same)
}

/// The check that failed first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    SpaceMismatch,
    DofCountMismatch,
    TraceMismatch,
    MapKindMismatch,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::SpaceMismatch => "space_mismatch",
            Stage::DofCountMismatch => "dof_count_mismatch",
            Stage::TraceMismatch => "trace_mismatch",
            Stage::MapKindMismatch => "map_kind_mismatch",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityReport {
    pub dim: usize,
    pub index: usize,
    pub dofs_a: usize,
    pub dofs_b: usize,
    pub unc_rank_a: usize,
    pub unc_rank_b: usize,
    pub stacked_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpaceReport {
    pub dim_a: usize,
    pub dim_b: usize,
    pub value_size_a: usize,
    pub value_size_b: usize,
    pub rank_a: usize,
    pub rank_b: usize,
    pub stacked_rank: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigReport {
    pub points_per_direction: usize,
    pub rank_rel_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub dual_condition_a: f64,
    pub dual_condition_b: f64,
}

/// Outcome of a variant check. `result` is true exactly when `stage` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub result: bool,
    pub stage: Option<Stage>,
    /// Entity at which a DOF-count or trace check failed.
    pub stage_entity: Option<EntityRef>,
    pub element_a: String,
    pub element_b: String,
    pub aligned: bool,
    pub space: Option<SpaceReport>,
    pub entities: Vec<EntityReport>,
    pub config: ConfigReport,
    pub condition: ConditionReport,
    pub message: String,
}

fn aligned_to_canonical(el: &CiarletElement) -> Result<CiarletElement> {
    if el.cell().is_canonical() {
        Ok(el.clone())
    } else {
        align_convention(el, &ReferenceCell::new(el.cell().kind()))
    }
}

/// Checks whether `b` is a variant of `a`: same cell, same space, equal DOF counts on
/// every sub-entity and equal uncontrolled traces on every sub-entity. Elements given on
/// non-canonical cells are first carried to the canonical cell.
pub fn verify_variants(a: &CiarletElement, b: &CiarletElement, cfg: &SpanTestConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let degree = a.lattice_degree().max(b.lattice_degree());
    let n = cfg.points_for(degree)?;
    let mut report = VerificationReport {
        result: false,
        stage: None,
        stage_entity: None,
        element_a: a.spec_string(),
        element_b: b.spec_string(),
        aligned: false,
        space: None,
        entities: Vec::new(),
        config: ConfigReport {
            points_per_direction: n,
            rank_rel_tolerance: cfg.rank_rel_tolerance,
        },
        condition: ConditionReport {
            dual_condition_a: a.dual_condition(),
            dual_condition_b: b.dual_condition(),
        },
        message: String::new(),
    };
    let fail = |mut r: VerificationReport, stage: Stage, entity: Option<EntityRef>, msg: String| {
        r.stage = Some(stage);
        r.stage_entity = entity;
        r.message = msg;
        Ok(r)
    };

    if a.cell().kind() != b.cell().kind() {
        let msg = format!("cells differ: {} vs {}", a.cell().kind(), b.cell().kind());
        return fail(report, Stage::SpaceMismatch, None, msg);
    }
    let (a, b) = if a.cell() != b.cell() {
        if a.map_kind() != b.map_kind() {
            let msg = format!("cannot align a {} element with a {} element", a.map_kind(), b.map_kind());
            return fail(report, Stage::MapKindMismatch, None, msg);
        }
        report.aligned = true;
        (aligned_to_canonical(a)?, aligned_to_canonical(b)?)
    } else {
        (a.clone(), b.clone())
    };
    let cell = a.cell().clone();

    let whole = EntityRef::new(cell.tdim(), 0);
    let cmp = compare_at(a.space(), b.space(), &entity_lattice(&cell, whole, n)?, cfg.rank_rel_tolerance)?;
    report.space = Some(SpaceReport {
        dim_a: a.dim(),
        dim_b: b.dim(),
        value_size_a: a.value_size(),
        value_size_b: b.value_size(),
        rank_a: cmp.rank_a,
        rank_b: cmp.rank_b,
        stacked_rank: cmp.stacked_rank,
    });
    if a.value_size() != b.value_size() {
        let msg = format!("value sizes differ: {} vs {}", a.value_size(), b.value_size());
        return fail(report, Stage::SpaceMismatch, None, msg);
    }
    if !cmp.same || a.space().len() != b.space().len() {
        let msg = format!(
            "spaces differ: ranks {} and {}, stacked {}; dimensions {} and {}",
            cmp.rank_a,
            cmp.rank_b,
            cmp.stacked_rank,
            a.space().len(),
            b.space().len()
        );
        return fail(report, Stage::SpaceMismatch, None, msg);
    }
    if a.map_kind() != b.map_kind() {
        let msg = format!("map kinds differ: {} vs {}", a.map_kind(), b.map_kind());
        return fail(report, Stage::MapKindMismatch, None, msg);
    }

    let mut first_dof: Option<EntityRef> = None;
    let mut first_trace: Option<EntityRef> = None;
    for e in cell.sub_entities() {
        let (dofs_a, dofs_b) = (a.dofs_on(e).len(), b.dofs_on(e).len());
        let ta = trace_spaces_with(&a, e, cfg.rank_rel_tolerance)?;
        let tb = trace_spaces_with(&b, e, cfg.rank_rel_tolerance)?;
        let c = compare_traces(ta.uncontrolled(), tb.uncontrolled(), n, cfg.rank_rel_tolerance)?;
        if dofs_a != dofs_b && first_dof.is_none() {
            first_dof = Some(e);
        }
        if !c.same && first_trace.is_none() {
            first_trace = Some(e);
        }
        report.entities.push(EntityReport {
            dim: e.dim,
            index: e.index,
            dofs_a,
            dofs_b,
            unc_rank_a: c.rank_a,
            unc_rank_b: c.rank_b,
            stacked_rank: c.stacked_rank,
        });
    }
    if let Some(e) = first_dof {
        let r = report.entities.iter().find(|r| r.dim == e.dim && r.index == e.index).copied();
        let (da, db) = r.map_or((0, 0), |r| (r.dofs_a, r.dofs_b));
        return fail(report, Stage::DofCountMismatch, Some(e), format!("{e} carries {da} and {db} DOFs"));
    }
    if let Some(e) = first_trace {
        return fail(report, Stage::TraceMismatch, Some(e), format!("uncontrolled traces differ on {e}"));
    }
    report.result = true;
    report.message = "variants".into();
    Ok(report)
}

fn compare_traces(a: &TraceSet, b: &TraceSet, n: usize, tol: f64) -> Result<SpanComparison> {
    if a.is_empty() || b.is_empty() {
        // An empty span equals only another empty span.
        let (ra, rb) = (a.len(), b.len());
        return Ok(SpanComparison {
            same: ra == rb,
            rank_a: ra,
            rank_b: rb,
            stacked_rank: ra.max(rb),
        });
    }
    let domain = a.domain();
    let pts = domain.lattice_points(n, true);
    compare_at(a, b, &pts, tol)
}

/// One job in a batch run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJob {
    pub a: ElementSpec,
    pub b: ElementSpec,
    #[serde(default)]
    pub a_vertices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub b_vertices: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub config: SpanTestConfig,
}

impl VerifyJob {
    pub fn run(&self) -> Result<VerificationReport> {
        let a = self.a.build_on(self.a_vertices.clone())?;
        let b = self.b.build_on(self.b_vertices.clone())?;
        verify_variants(&a, &b, &self.config)
    }
}

/// Runs every job; results are returned in job order whatever the execution mode.
pub fn verify_batch(jobs: &[VerifyJob], exec: Execution) -> Vec<Result<VerificationReport>> {
    map_ordered(jobs, exec, |j| Ok(j.run())).expect("jobs report their own errors")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cells::CellKind;
    use crate::elements::{make_family, Family, LagrangeVariant};
    use crate::polyset::{PolyFunction, PolySet};

    fn interval_set(fs: Vec<PolyFunction>) -> PolySet {
        PolySet::new(ReferenceCell::new(CellKind::Interval), vec![], fs).unwrap()
    }

    #[test]
    fn rank_examples() {
        let cfg = SpanTestConfig::default();
        assert_eq!(matrix_rank(&DMatrix::identity(2, 2), &cfg), 2);
        assert_eq!(matrix_rank(&DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]), &cfg), 1);
        let near = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0 + 1e-14]);
        assert_eq!(matrix_rank(&near, &cfg), 1);
    }

    #[test]
    fn span_examples() {
        let cell = ReferenceCell::new(CellKind::Interval);
        let whole = EntityRef::new(1, 0);
        let cfg = SpanTestConfig::default();
        let one = PolyFunction::constant(1, 1.0);
        let x = PolyFunction::coordinate(1, 0);
        let a = interval_set(vec![one.clone(), x.clone()]);
        let b = interval_set(vec![one.add(&x).unwrap(), one.add(&x.scale(-1.0)).unwrap()]);
        assert!(spans_same_space(&a, &b, &cell, whole, &cfg).unwrap());
        let c = interval_set(vec![one.clone(), x.mul_scalar(&x).unwrap()]);
        let cmp = compare_spans(&a, &c, &cell, whole, &cfg).unwrap();
        assert!(!cmp.same);
        assert_eq!(cmp.stacked_rank, 3);
        let v = PolySet::new(cell.clone(), vec![1], vec![PolyFunction::vector(&[one]).unwrap()]).unwrap();
        let tri = ReferenceCell::new(CellKind::Triangle);
        let lag = make_family(Family::Lagrange, CellKind::Triangle, 1, None).unwrap();
        let rt = make_family(Family::RaviartThomas, CellKind::Triangle, 0, None).unwrap();
        assert!(!spans_same_space(&lag, &rt, &tri, EntityRef::new(2, 0), &cfg).unwrap());
        let _ = v;
    }

    #[test]
    fn config_validation() {
        assert!(SpanTestConfig::default().with_tolerance(0.0).validate().is_err());
        assert!(SpanTestConfig::default().with_tolerance(1e-3).validate().is_err());
        assert!(SpanTestConfig::with_points(1).validate().is_err());
        assert!(SpanTestConfig::with_points(4).points_for(1).is_err());
        assert_eq!(SpanTestConfig::default().points_for(3).unwrap(), 9);
    }

    #[test]
    fn variant_examples() {
        let cfg = SpanTestConfig::default();
        let eq = make_family(Family::Lagrange, CellKind::Interval, 7, None).unwrap();
        let gll = make_family(Family::Lagrange, CellKind::Interval, 7, Some(LagrangeVariant::Gll)).unwrap();
        let r = verify_variants(&eq, &gll, &cfg).unwrap();
        assert!(r.result, "{r:?}");
        let lag = make_family(Family::Lagrange, CellKind::Triangle, 2, None).unwrap();
        let dg = make_family(Family::DiscontinuousLagrange, CellKind::Triangle, 2, None).unwrap();
        let r = verify_variants(&lag, &dg, &cfg).unwrap();
        assert_eq!(r.stage, Some(Stage::DofCountMismatch));
        assert_eq!(r.stage_entity, Some(EntityRef::new(0, 0)));
        let rt = make_family(Family::RaviartThomas, CellKind::Triangle, 1, None).unwrap();
        let r = verify_variants(&lag, &rt, &cfg).unwrap();
        assert_eq!(r.stage, Some(Stage::SpaceMismatch));
        assert!(!r.result);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["stage"], "space_mismatch");
    }

    #[test]
    fn batch_keeps_job_order() {
        let jobs: Vec<VerifyJob> = ["lagrange:interval:2", "lagrange:triangle:1", "rt:triangle:0"]
            .iter()
            .map(|s| VerifyJob {
                a: s.parse().unwrap(),
                b: "lagrange:interval:2:gll".parse().unwrap(),
                a_vertices: None,
                b_vertices: None,
                config: SpanTestConfig::default(),
            })
            .collect();
        let seq = verify_batch(&jobs, Execution::Sequential);
        let par = verify_batch(&jobs, Execution::Parallel);
        let results: Vec<bool> = seq.iter().map(|r| r.as_ref().unwrap().result).collect();
        assert_eq!(results, vec![true, false, false]);
        assert_eq!(format!("{seq:?}"), format!("{par:?}"));
    }

    #[test]
    fn job_json() {
        let j: VerifyJob = serde_json::from_str(
            r#"{"a": "lagrange:interval:3", "b": "lagrange:interval:3:gll", "config": {"points_per_direction": 11}}"#,
        )
        .unwrap();
        assert_eq!(j.config.points_per_direction, Some(11));
        assert_eq!(j.config.rank_rel_tolerance, DEFAULT_RANK_TOLERANCE);
        assert!(j.run().unwrap().result);
        assert!(serde_json::from_str::<VerifyJob>(r#"{"a": "lagrange:pyramid", "b": "x"}"#).is_err());
        let back: VerifyJob = serde_json::from_str(&serde_json::to_string(&j).unwrap()).unwrap();
        assert_eq!(back, j);
    }
}
