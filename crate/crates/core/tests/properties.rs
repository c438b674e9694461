use proptest::prelude::*;
use sigma_consensus::assumptions::{check_containment, check_monotonicity};
use sigma_consensus::geometry::{euclidean_diameter, Point, PointSet};
use sigma_consensus::graph::{is_connected, root, union_over, DelayArc, DelayGraph, GraphSchedule};
use sigma_consensus::sigma::{build_sigma, d_s, Side, SigmaKind, WarpMap};

fn kinds() -> Vec<SigmaKind> {
    vec![
        SigmaKind::ConvexHull,
        SigmaKind::axis_box(2),
        SigmaKind::right_triangles(Side::Max),
        SigmaKind::norm_rotation(0.04, SigmaKind::ConvexHull),
        SigmaKind::intersection(SigmaKind::ConvexHull, SigmaKind::axis_box(2)),
    ]
}

fn kind() -> impl Strategy<Value = SigmaKind> {
    (0..5usize).prop_map(|i| kinds()[i].clone())
}

fn coords(max: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..=max)
}

fn set(c: &[(f64, f64)]) -> PointSet {
    PointSet::from_xy(c).unwrap()
}

fn graph(n: usize, h: usize) -> impl Strategy<Value = DelayGraph> {
    prop::collection::vec((0..n, 0..h, 0..n), 0..3 * n).prop_map(move |raw| {
        let arcs = raw
            .into_iter()
            .filter(|&(k, j, l)| !(k == l && j == 0))
            .map(|(k, j, l)| DelayArc::new(k, j, l));
        DelayGraph::with_arcs(n, h, arcs).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn every_source_point_is_in_its_hull(k in kind(), c in coords(7)) {
        prop_assert!(check_containment(&k, &set(&c)).unwrap());
    }

    #[test]
    fn singleton_hull_is_the_point(k in kind(), x in -5.0..5.0f64, y in -5.0..5.0f64) {
        let h = build_sigma(&k, &set(&[(x, y)])).unwrap();
        prop_assert!(h.is_singleton());
        prop_assert_eq!(h.mu(), 0.0);
    }

    #[test]
    fn hull_of_a_subset_is_nested(k in kind(), c in coords(7), mask in prop::collection::vec(any::<bool>(), 7)) {
        let s = set(&c);
        let mut sub: Vec<(f64, f64)> = c.iter().zip(&mask).filter(|(_, &m)| m).map(|(p, _)| *p).collect();
        if sub.is_empty() {
            sub.push(c[0]);
        }
        prop_assert!(check_monotonicity(&k, &set(&sub), &s).unwrap());
    }

    #[test]
    fn intrinsic_distance_is_symmetric(k in kind(), c in coords(6)) {
        let s = set(&c);
        let h = build_sigma(&k, &s).unwrap();
        let pts = s.points();
        let (a, b) = (&pts[0], &pts[pts.len() - 1]);
        let ab = d_s(&h, a, b, 400).unwrap();
        let ba = d_s(&h, b, a, 400).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab), "{ab} vs {ba}");
        prop_assert!(ab >= a.distance(b) - 1e-12);
    }

    #[test]
    fn critical_set_excludes_its_base_and_meets_the_source(c in coords(6), i in 0..6usize) {
        let s = set(&c);
        prop_assume!(!s.is_singleton());
        for k in kinds().into_iter().take(4) {
            let h = build_sigma(&k, &s).unwrap();
            let x = &s.points()[i % s.len()];
            prop_assert!(!h.sigma_x_contains(x, x, 1e-9).unwrap());
            let met = s.points().iter().any(|y| h.sigma_x_contains(x, y, 1e-9).unwrap());
            prop_assert!(met, "{}: no source point in the critical set of {:?}", k.label(), x);
        }
    }

    #[test]
    fn mu_dominates_the_source_diameter(k in kind(), c in coords(6)) {
        let s = set(&c);
        let h = build_sigma(&k, &s).unwrap();
        prop_assert!(h.mu() >= euclidean_diameter(&s) - 1e-6);
    }

    #[test]
    fn norm_rotation_round_trips(alpha in -0.1..0.1f64, x in -10.0..10.0f64, y in -10.0..10.0f64) {
        let w = WarpMap::NormRotation { alpha };
        let back = w.inverse(w.forward([x, y]));
        prop_assert!((back[0] - x).abs() < 1e-10 && (back[1] - y).abs() < 1e-10);
        let fwd = w.forward([x, y]);
        prop_assert!(((fwd[0] * fwd[0] + fwd[1] * fwd[1]).sqrt() - (x * x + y * y).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn triples_round_trip(g in graph(4, 3)) {
        let again = DelayGraph::from_triples(4, 3, &g.to_triples()).unwrap();
        prop_assert_eq!(again, g);
    }

    #[test]
    fn root_reaches_every_other_node(g in graph(5, 2)) {
        if let Some(r) = root(&g) {
            for l in (0..5).filter(|&l| l != r) {
                prop_assert!(is_connected(&g, r, l));
            }
            for k in 0..r {
                prop_assert!((0..5).any(|l| l != k && !is_connected(&g, k, l)));
            }
        }
    }

    #[test]
    fn union_keeps_roots(a in graph(4, 2), b in graph(4, 2)) {
        let u = union_over(&GraphSchedule::periodic(vec![a.clone(), b.clone()]).unwrap(), 0, 1).unwrap();
        for arc in a.arcs().iter().chain(b.arcs()) {
            prop_assert!(u.arcs().contains(arc));
        }
        if root(&a).is_some() {
            prop_assert!(root(&u).is_some());
        }
    }
}

fn max_mu_jump(k: &SigmaKind, c: &[(f64, f64)], delta: f64, dirs: &[(f64, f64)]) -> f64 {
    let base = build_sigma(k, &set(c)).unwrap().mu();
    let moved: Vec<(f64, f64)> = c
        .iter()
        .zip(dirs.iter().cycle())
        .map(|(&(x, y), &(dx, dy))| (x + delta * dx, y + delta * dy))
        .collect();
    (build_sigma(k, &set(&moved)).unwrap().mu() - base).abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mu_of_hull_moves_proportionally(
        k in kind(),
        c in coords(5),
        dirs in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 5),
    ) {
        let dirs: Vec<(f64, f64)> = dirs
            .into_iter()
            .map(|(x, y)| {
                let r = (x * x + y * y).sqrt().max(1e-3);
                (x / r / 2f64.sqrt(), y / r / 2f64.sqrt())
            })
            .collect();
        let s = set(&c);
        prop_assume!(s.len() == c.len() && s.len() >= 2);
        let min_gap = s
            .points()
            .iter()
            .enumerate()
            .flat_map(|(i, p)| s.points()[i + 1..].iter().map(move |q| p.distance(q)))
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 1e-2);
        let slack = if k.is_warped() { 1e-6 } else { 1e-12 };
        for delta in [1e-3, 1e-4, 1e-5] {
            let jump = max_mu_jump(&k, &c, delta, &dirs);
            prop_assert!(jump <= 60.0 * delta + slack, "{}: delta {delta} moved mu by {jump}", k.label());
        }
    }
}

#[test]
fn points_reject_non_finite_coordinates() {
    assert!(Point::new(vec![f64::NAN, 0.0]).is_err());
}
