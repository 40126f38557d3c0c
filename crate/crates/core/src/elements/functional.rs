//! Degrees of freedom.

use crate::cells::{AffineMap, EntityRef, ReferenceCell};
use crate::error::{domain, Result};
use crate::numfmt::format_sig;
use crate::polyset::PolyFunction;
use crate::quadrature::cell_rule;
use crate::tabulation::{FunctionSet, Tabulation};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Which part of a function an integral moment sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentComponent {
    /// `f · n` against a scalar weight, `n` the unit outward facet normal.
    Normal,
    /// `f · t` against a scalar weight on an edge (unit tangent), or `f · (A w)` for a
    /// vector weight `w` given in the coordinates of the entity with axes `A`.
    Tangent,
    /// `f · w` with a weight of the element's value size.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FunctionalKind {
    PointEval {
        point: Vec<f64>,
    },
    DotPointEval {
        point: Vec<f64>,
        direction: Vec<f64>,
    },
    /// `∫_E (component of f) w`, with `w` a function on the reference cell of `E`.
    IntegralMoment {
        weight: PolyFunction,
        component: MomentComponent,
    },
    /// `f -> inner(value_map f(point_map y))`: a functional defined on `source` applied
    /// to functions living on another cell. Used to carry functionals across a change of
    /// reference convention.
    Pushed {
        inner: Box<Functional>,
        source: ReferenceCell,
        point_map: AffineMap,
        value_map: DMatrix<f64>,
    },
}

/// One degree of freedom, tagged with the sub-entity it is associated with.
#[derive(Debug, Clone, PartialEq)]
pub struct Functional {
    pub entity: EntityRef,
    pub kind: FunctionalKind,
}

impl Functional {
    pub fn point_eval(entity: EntityRef, point: Vec<f64>) -> Self {
        Self {
            entity,
            kind: FunctionalKind::PointEval { point },
        }
    }

    pub fn dot_point_eval(entity: EntityRef, point: Vec<f64>, direction: Vec<f64>) -> Self {
        Self {
            entity,
            kind: FunctionalKind::DotPointEval { point, direction },
        }
    }

    pub fn moment(entity: EntityRef, weight: PolyFunction, component: MomentComponent) -> Self {
        Self {
            entity,
            kind: FunctionalKind::IntegralMoment { weight, component },
        }
    }

    /// Short kind name used in reports.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            FunctionalKind::PointEval { .. } => "point_eval",
            FunctionalKind::DotPointEval { .. } => "dot_point_eval",
            FunctionalKind::IntegralMoment { .. } => "integral_moment",
            FunctionalKind::Pushed { inner, .. } => inner.kind_name(),
        }
    }

    pub fn describe(&self) -> String {
        let pt = |p: &[f64]| {
            let v: Vec<String> = p.iter().map(|x| format_sig(*x, 6)).collect();
            format!("({})", v.join(", "))
        };
        match &self.kind {
            FunctionalKind::PointEval { point } => format!("evaluation at {}", pt(point)),
            FunctionalKind::DotPointEval { point, direction } => {
                format!("evaluation at {} along {}", pt(point), pt(direction))
            }
            FunctionalKind::IntegralMoment { weight, component } => format!(
                "{} moment on entity {} against {}",
                match component {
                    MomentComponent::Normal => "normal",
                    MomentComponent::Tangent => "tangential",
                    MomentComponent::Full => "integral",
                },
                self.entity,
                weight.to_text()
            ),
            FunctionalKind::Pushed { inner, .. } => format!("pushed {}", inner.describe()),
        }
    }

    /// Applies the functional to every function of `set`, which lives on `cell`.
    pub fn apply(&self, cell: &ReferenceCell, set: &dyn FunctionSet) -> Result<Vec<f64>> {
        let s = set.value_size();
        match &self.kind {
            FunctionalKind::PointEval { point } => {
                if s != 1 {
                    return domain("point evaluation needs a scalar function set");
                }
                Ok(set.tabulate(std::slice::from_ref(point))?.data)
            }
            FunctionalKind::DotPointEval { point, direction } => {
                if direction.len() != s {
                    return domain(format!(
                        "direction has {} components, values have {s}",
                        direction.len()
                    ));
                }
                let t = set.tabulate(std::slice::from_ref(point))?;
                Ok((0..t.nfunctions)
                    .map(|f| t.value(0, f).iter().zip(direction).map(|(a, b)| a * b).sum())
                    .collect())
            }
            FunctionalKind::IntegralMoment { weight, component } => {
                self.apply_moment(cell, set, weight, *component)
            }
            FunctionalKind::Pushed {
                inner,
                source,
                point_map,
                value_map,
            } => {
                let pushed = PushedSet {
                    set,
                    point_map,
                    value_map,
                };
                inner.apply(source, &pushed)
            }
        }
    }

    fn apply_moment(
        &self,
        cell: &ReferenceCell,
        set: &dyn FunctionSet,
        weight: &PolyFunction,
        component: MomentComponent,
    ) -> Result<Vec<f64>> {
        let e = self.entity;
        if e.dim == 0 {
            return domain("integral moments need an entity of positive dimension");
        }
        let s = set.value_size();
        let kind = cell.entity_kind(e)?;
        let map = cell.entity_map(e)?;
        let metric = map.metric();
        let ws = weight.value_size();
        let fixed: Option<Vec<f64>> = match component {
            MomentComponent::Normal => {
                if e.dim + 1 != cell.tdim() || ws != 1 {
                    return domain("normal moments need a scalar weight on a facet");
                }
                Some(cell.facet_normal(e.index)?)
            }
            MomentComponent::Tangent if ws == 1 => {
                if e.dim != 1 {
                    return domain("scalar tangential moments need an edge");
                }
                Some(cell.edge_tangent(e.index)?)
            }
            MomentComponent::Tangent => {
                if ws != e.dim {
                    return domain("vector tangential weights need one component per entity axis");
                }
                None
            }
            MomentComponent::Full => {
                if ws != s {
                    return domain(format!("weight value size {ws} differs from function value size {s}"));
                }
                None
            }
        };
        if let Some(d) = &fixed {
            if d.len() != s {
                return domain(format!("direction has {} components, values have {s}", d.len()));
            }
        }
        let rule = cell_rule(kind, set.degree() + weight.total_degree() + 2);
        let points: Vec<Vec<f64>> = rule.points.iter().map(|t| map.apply(t)).collect();
        let tab = set.tabulate(&points)?;
        let mut out = vec![0.0; tab.nfunctions];
        for (q, (t, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let wv = weight.eval(t)?;
            let dir: Vec<f64> = match (&fixed, component) {
                (Some(d), _) => d.iter().map(|x| x * wv[0]).collect(),
                (None, MomentComponent::Tangent) => (0..s)
                    .map(|i| map.axes.iter().zip(&wv).map(|(a, b)| a[i] * b).sum())
                    .collect(),
                _ => wv,
            };
            let scale = w * metric;
            for (f, o) in out.iter_mut().enumerate() {
                *o += scale * tab.value(q, f).iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        Ok(out)
    }

    /// The matrix `[l_i(f_j)]` for functionals `ls` and the functions of `set`.
    pub fn action_matrix(ls: &[Functional], cell: &ReferenceCell, set: &dyn FunctionSet) -> Result<DMatrix<f64>> {
        let mut m = DMatrix::zeros(ls.len(), set.len());
        for (i, l) in ls.iter().enumerate() {
            for (j, v) in l.apply(cell, set)?.into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        Ok(m)
    }
}

/// `y -> value_map f(point_map y)` for every `f` of a wrapped set.
pub(crate) struct PushedSet<'a> {
    pub set: &'a dyn FunctionSet,
    pub point_map: &'a AffineMap,
    pub value_map: &'a DMatrix<f64>,
}

impl FunctionSet for PushedSet<'_> {
    fn value_shape(&self) -> Vec<usize> {
        let n = self.value_map.nrows();
        if n == 1 {
            vec![]
        } else if self.set.value_shape().len() == 2 {
            let d = (n as f64).sqrt().round() as usize;
            vec![d, d]
        } else {
            vec![n]
        }
    }

    fn len(&self) -> usize {
        self.set.len()
    }

    fn nvars(&self) -> usize {
        self.point_map.source_dim()
    }

    fn degree(&self) -> usize {
        self.set.degree()
    }

    fn lattice_degree(&self) -> usize {
        self.set.lattice_degree()
    }

    fn tabulate(&self, points: &[Vec<f64>]) -> Result<Tabulation> {
        let mapped: Vec<Vec<f64>> = points.iter().map(|y| self.point_map.apply(y)).collect();
        let t = self.set.tabulate(&mapped)?;
        let s = self.value_map.nrows();
        let mut out = Tabulation::zeros(t.npoints, t.nfunctions, s);
        for p in 0..t.npoints {
            for f in 0..t.nfunctions {
                let v = t.value(p, f);
                let o = out.value_mut(p, f);
                for (r, oi) in o.iter_mut().enumerate() {
                    *oi = (0..v.len()).map(|c| self.value_map[(r, c)] * v[c]).sum();
                }
            }
        }
        Ok(out)
    }
}
