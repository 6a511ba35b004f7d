mod common;

use common::recount_profile;
use matfin::coarse::*;
use matfin::expander::random_regular_graph;
use matfin::{c64, SparsityProfile};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn free_group_action_profile(n in 1usize..80, seed: u64) {
        let act = FiniteAction::free_group(n, seed);
        let coeffs = vec![c64(1.0), c64(-0.5), c64(0.25), c64(2.0)];
        let a = action_operator(&act, &coeffs, None).unwrap();
        let (r, c) = recount_profile(&a);
        prop_assert!(r <= 4 && c <= 4);
        prop_assert_eq!(a.profile(), SparsityProfile::new(r, c));
        // generators 2 and 3 invert 0 and 1
        for m in 0..2 {
            let g = &act.generators()[m];
            let h = &act.generators()[m + 2];
            prop_assert!((0..n).all(|x| h[g[x].unwrap()] == Some(x)));
        }
    }

    #[test]
    fn translation_operators_are_shifts(n in 2usize..60, step in -5i64..=5) {
        for boundary in [Boundary::Cyclic, Boundary::Drop] {
            let a = action_operator(&FiniteAction::translation(n, step, boundary), &[c64(1.0)], None).unwrap();
            prop_assert!(a.profile().within(SparsityProfile::new(1, 1)));
            for (i, j, _) in a.iter() {
                match boundary {
                    Boundary::Cyclic => prop_assert_eq!(i as i64, (j as i64 + step).rem_euclid(n as i64)),
                    Boundary::Drop => prop_assert_eq!(i as i64, j as i64 + step),
                }
            }
        }
    }

    #[test]
    fn band_products_add_radii(half in 4usize..16, seed: u64, r1 in 0u64..3, r2 in 0u64..3) {
        let g = random_regular_graph(2 * half, 3, seed).unwrap();
        let Ok(space) = MetricSpace::from_graph(g.adjacency()) else { return Ok(()) };
        let kernel = |x: usize, y: usize| c64(1.0 + (x * 7 + y) as f64 / 100.0);
        let b1 = band_operator(&space, kernel, r1);
        let b2 = band_operator(&space, kernel, r2);
        prop_assert!(b1.op.profile().within(b1.profile_bound()));
        prop_assert_eq!(band_violations(&b1.op, &space, r1), 0);
        let p = b1.op.mul(&b2.op).unwrap();
        prop_assert_eq!(band_violations(&p, &space, r1 + r2), 0);
        // the ball bound is attained by the full-support band operator
        prop_assert_eq!(b1.op.profile().k(), space.max_ball(r1));
    }
}

#[test]
fn adjacency_of_a_cycle() {
    let n = 7;
    let edges: Vec<(usize, usize)> = (0..n).map(|v| (v, (v + 1) % n)).collect();
    let adj = adjacency_from_edges(n, &edges).unwrap();
    let a = adjacency_operator(&adj).unwrap();
    assert_eq!(a.profile(), SparsityProfile::new(2, 2));
    assert_eq!(a.max_entry_diff(&a.adjoint()).unwrap(), 0.0);
    let space = MetricSpace::from_graph(&adj).unwrap();
    assert_eq!(space.distance(0, 3), 3);
    assert_eq!(space.distance(0, 4), 3);
    assert_eq!(band_violations(&a, &space, 1), 0);
    assert_eq!(band_violations(&a, &space, 0), 2 * n);
}

#[test]
fn invalid_metrics_are_rejected() {
    assert!(MetricSpace::from_table(vec![vec![0, 1], vec![2, 0]]).is_err());
    assert!(MetricSpace::from_table(vec![vec![1]]).is_err());
    assert!(MetricSpace::from_table(vec![vec![0, 1, 5], vec![1, 0, 1], vec![5, 1, 0]]).is_err());
    assert!(FiniteAction::new(3, vec![vec![Some(0), Some(0), None]]).is_err());
}

#[test]
fn witness_table_is_used() {
    let space = MetricSpace::path(10).with_witness(&[2]);
    let b = band_operator(&space, |_, _| c64(1.0), 2);
    assert!(!b.recomputed);
    assert_eq!(b.ball_bound, 5);
    let c = band_operator(&space, |_, _| c64(1.0), 3);
    assert!(c.recomputed);
    assert_eq!(c.ball_bound, 7);
}
