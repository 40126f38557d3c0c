use ciarlet::cells::AffineMap;
use ciarlet::elements::{make_family, Family, LagrangeVariant};
use ciarlet::mapping::{pull_back_affine, push_forward_affine, MapKind};
use ciarlet::polyset::natural_space;
use ciarlet::verify::compare_at;
use ciarlet::{CellKind, FunctionSet, ReferenceCell, Tabulation};
use nalgebra::DMatrix;
use proptest::prelude::*;

const CELLS: [CellKind; 6] = [
    CellKind::Interval,
    CellKind::Triangle,
    CellKind::Quadrilateral,
    CellKind::Tetrahedron,
    CellKind::Hexahedron,
    CellKind::Prism,
];

/// A point in the canonical cell built from three numbers in [0, 1].
fn point_in(kind: CellKind, u: [f64; 3]) -> Vec<f64> {
    match kind {
        CellKind::Interval => vec![u[0]],
        CellKind::Triangle => vec![u[0] * (1.0 - u[1]), u[1]],
        CellKind::Quadrilateral => vec![u[0], u[1]],
        CellKind::Tetrahedron => vec![u[0] * (1.0 - u[1]) * (1.0 - u[2]), u[1] * (1.0 - u[2]), u[2]],
        CellKind::Hexahedron => u.to_vec(),
        CellKind::Prism => vec![u[0] * (1.0 - u[1]), u[1], u[2]],
        _ => unreachable!(),
    }
}

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    [0.0..=1.0f64, 0.0..=1.0f64, 0.0..=1.0f64]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lagrange_partition_of_unity(c in 0..6usize, k in 1..=4usize, gll: bool, u in unit3()) {
        let v = if gll { LagrangeVariant::Gll } else { LagrangeVariant::Equispaced };
        let el = make_family(Family::Lagrange, CELLS[c], k, Some(v)).unwrap();
        let t = el.tabulate(&[point_in(CELLS[c], u)]).unwrap();
        let s: f64 = (0..el.dim()).map(|f| t.get(0, f, 0)).sum();
        prop_assert!((s - 1.0).abs() < 1e-10);
    }

    #[test]
    fn restriction_commutes_with_evaluation(c in 0..6usize, k in 0..=4usize, t in unit3(), f in 0..200usize) {
        let cell = ReferenceCell::new(CELLS[c]);
        let space = natural_space(&cell, k).unwrap();
        let p = &space.functions()[f % space.len()];
        for e in cell.sub_entities().into_iter().filter(|e| e.dim >= 1) {
            let map = cell.entity_map(e).unwrap();
            let sub = cell.entity_kind(e).unwrap();
            let x = point_in(sub, t);
            let r = p.restrict(&map).unwrap();
            let a = r.eval(&x).unwrap()[0];
            let b = p.eval(&map.apply(&x)).unwrap()[0];
            prop_assert!((a - b).abs() < 1e-12, "{} vs {}", a, b);
        }
    }

    #[test]
    fn derivatives_match_finite_differences(c in 0..6usize, k in 1..=4usize, u in unit3(), f in 0..200usize) {
        let cell = ReferenceCell::new(CELLS[c]);
        let el = make_family(Family::Lagrange, CELLS[c], k, None).unwrap();
        let fs = el.basis_functions().unwrap();
        let phi = &fs[f % fs.len()];
        // Keep the stencil inside the cell.
        let x: Vec<f64> = point_in(CELLS[c], u).iter().map(|v| 0.1 + 0.6 * v).collect();
        prop_assume!(cell.contains(&x, 0.0));
        let h = 1e-5;
        for d in 0..cell.tdim() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[d] += h;
            xm[d] -= h;
            let fd = (phi.eval(&xp).unwrap()[0] - phi.eval(&xm).unwrap()[0]) / (2.0 * h);
            let exact = phi.derivative(d).unwrap().eval(&x).unwrap()[0];
            prop_assert!((fd - exact).abs() <= 1e-5 * exact.abs().max(1.0), "{} vs {}", fd, exact);
        }
    }

    #[test]
    fn push_pull_round_trip(kind in 0..7usize, entries in prop::collection::vec(-0.4..0.4f64, 9), data in prop::collection::vec(-5.0..5.0f64, 18)) {
        let kind = MapKind::ALL[kind];
        let j = DMatrix::from_fn(3, 3, |r, c| entries[3 * r + c] + if r == c { 1.0 } else { 0.0 });
        prop_assume!(j.determinant().abs() > 0.2);
        let s = 3usize.pow(kind.value_rank() as u32);
        let n = 18 / s;
        let t = Tabulation { npoints: n, nfunctions: 1, value_size: s, data: data[..n * s].to_vec() };
        let back = pull_back_affine(kind, &j, &push_forward_affine(kind, &j, &t).unwrap()).unwrap();
        for (a, b) in back.data.iter().zip(&t.data) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn recombination_keeps_the_span(k in 1..=3usize, m in prop::collection::vec(-1.0..1.0f64, 100)) {
        let el = make_family(Family::RaviartThomas, CellKind::Triangle, k, None).unwrap();
        let n = el.dim();
        let mut mat = DMatrix::from_fn(n, n, |i, j| m[(i * n + j) % m.len()] * 0.2);
        mat += DMatrix::identity(n, n);
        prop_assume!(mat.determinant().abs() > 1e-3);
        let pts = el.cell().lattice_points(2 * k + 5, true);
        let t = el.tabulate(&pts).unwrap();
        let mixed = t.recombine(&mat);
        let direct = compare_at(&el, &el, &pts, 1e-8).unwrap();
        struct Fixed(Tabulation);
        impl FunctionSet for Fixed {
            fn value_shape(&self) -> Vec<usize> { vec![self.0.value_size] }
            fn len(&self) -> usize { self.0.nfunctions }
            fn nvars(&self) -> usize { 2 }
            fn degree(&self) -> usize { 0 }
            fn tabulate(&self, _: &[Vec<f64>]) -> ciarlet::Result<Tabulation> { Ok(self.0.clone()) }
        }
        let cmp = compare_at(&Fixed(t), &Fixed(mixed), &pts, 1e-8).unwrap();
        prop_assert!(cmp.same && cmp.rank_a == direct.rank_a);
    }

    #[test]
    fn affine_composition_matches_points(entries in prop::collection::vec(-2.0..2.0f64, 12), x in unit3()) {
        let a = AffineMap { origin: entries[0..3].to_vec(), axes: vec![entries[3..6].to_vec(), entries[6..9].to_vec(), entries[9..12].to_vec()] };
        let b = AffineMap { origin: vec![1.0, 0.0, -1.0], axes: vec![vec![0.0, 1.0, 0.0], vec![2.0, 0.0, 0.0], vec![0.0, 0.0, 1.0]] };
        let ab = a.compose(&b).apply(&x);
        let direct = a.apply(&b.apply(&x));
        for (p, q) in ab.iter().zip(&direct) {
            prop_assert!((p - q).abs() < 1e-12);
        }
    }
}

#[test]
fn pyramid_rationomials_differentiate_like_finite_differences() {
    let space = natural_space(&ReferenceCell::new(CellKind::Pyramid), 2).unwrap();
    let x = [0.2, 0.25, 0.4];
    let h = 1e-6;
    for f in space.functions() {
        for d in 0..3 {
            let (mut xp, mut xm) = (x.to_vec(), x.to_vec());
            xp[d] += h;
            xm[d] -= h;
            let fd = (f.eval(&xp).unwrap()[0] - f.eval(&xm).unwrap()[0]) / (2.0 * h);
            let exact = f.derivative(d).unwrap().eval(&x).unwrap()[0];
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{}: {fd} vs {exact}", f.to_text());
        }
    }
}
