mod common;

use common::{dense, random_sparse, svd};
use matfin::ghost::*;
use matfin::rng::Rng;
use matfin::{c64, Complex64, Error, SparseOp};
use proptest::prelude::*;
use rand::{Rng as _, SeedableRng};

fn hermitian(n: usize, k: usize, seed: u64) -> SparseOp {
    let a = random_sparse(&mut Rng::seed_from_u64(seed), n, k, 1.0);
    a.add(&a.adjoint()).unwrap().scale(c64(0.5))
}

/// Tail profile straight from the definition: sup over entries with
/// `min(i, j) >= t`.
fn tail_oracle(a: &SparseOp, t: usize) -> f64 {
    a.iter().filter(|&(i, j, _)| i.min(j) >= t).map(|e| e.2.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tail_matches_definition(n in 1usize..40, k in 1usize..4, seed: u64) {
        let a = random_sparse(&mut Rng::seed_from_u64(seed), n, k, 1.0);
        let tail = tail_profile(&a);
        for t in 0..n {
            prop_assert_eq!(tail.values[t], tail_oracle(&a, t));
        }
        prop_assert!(tail.values.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn tail_is_subadditive_and_adjoint_invariant(n in 1usize..40, s1: u64, s2: u64, c in -3.0f64..3.0) {
        let a = random_sparse(&mut Rng::seed_from_u64(s1), n, 3, 1.0);
        let b = random_sparse(&mut Rng::seed_from_u64(s2), n, 3, 1.0);
        let (ta, tb) = (tail_profile(&a), tail_profile(&b));
        let ts = tail_profile(&a.add(&b).unwrap());
        let tc = tail_profile(&a.scale(c64(c)));
        prop_assert_eq!(tail_profile(&a.adjoint()), ta.clone());
        for t in 0..n {
            prop_assert!(ts.values[t] <= ta.values[t] + tb.values[t] + 1e-15);
            prop_assert!((tc.values[t] - c.abs() * ta.values[t]).abs() <= 1e-15);
        }
    }

    #[test]
    fn product_estimate_holds(n in 2usize..40, k in 1usize..4, s1: u64, s2: u64, split in 1usize..40) {
        let a = random_sparse(&mut Rng::seed_from_u64(s1), n, k, 1.0);
        let b = random_sparse(&mut Rng::seed_from_u64(s2), n, k, 1.0);
        let split = split.min(n);
        let pb = ideal_product_bound(&a, &b, split).unwrap();
        prop_assert!(pb.holds);
        let c = dense(&a) * dense(&b);
        for i in split..n {
            for l in pb.column_cut..n {
                prop_assert!(c[(i, l)].norm() <= pb.bound + 1e-12);
            }
        }
    }

    #[test]
    fn approximant_is_self_adjoint_and_sparse(n in 1usize..40, k in 1usize..6, keep in 1usize..4, seed: u64) {
        let a = hermitian(n, k, seed);
        let ak = sparse_approximant(&a, keep);
        prop_assert!(ak.profile().within(matfin::SparsityProfile::new(keep, keep)));
        prop_assert!(ak.max_entry_diff(&ak.adjoint()).unwrap() == 0.0);
        prop_assert!(ak.iter().all(|(i, j, z)| a.get(i, j) == z));
    }
}

#[test]
fn l1_bound_against_row_and_column_sums() {
    let a = SparseOp::from_triplets(3, [(0, 0, c64(1.0)), (0, 2, c64(-2.0)), (1, 2, Complex64::new(0.0, 3.0))]).unwrap();
    assert_eq!(l1_bound(&a), (3.0, 5.0));
}

#[test]
fn planted_diagonal_extraction_certified_by_dense_svd() {
    let mut rng = Rng::seed_from_u64(11);
    for _ in 0..20 {
        let n = 48;
        let delta = 0.4;
        let mut trip: Vec<(usize, usize, Complex64)> = Vec::new();
        for i in 0..n {
            let v = if rng.gen_bool(0.5) { rng.gen_range(0.8..1.5) } else { rng.gen_range(0.0..0.05) };
            trip.push((i, i, c64(v)));
        }
        let a = SparseOp::from_triplets(n, trip).unwrap();
        let cert = extract(&a, delta, 2).unwrap();
        let m = cert.indices.len();
        let u = dense(&cert.u);
        let uc = u.columns(0, m).into_owned();
        let c = uc.adjoint() * dense(&a) * &uc;
        let smin = *svd(&c).last().unwrap();
        assert!(smin > delta / 2.0);
        assert!((smin - cert.sigma_min).abs() < 1e-12);
        assert!(cert.indices.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn ghost_inputs_have_insufficient_data() {
    let layout = matfin::constructions::BlockLayout::standard(12);
    let p = matfin::constructions::make_block_projection(&layout).to_sparse(layout.total()).unwrap();
    assert!(matches!(extract(&p, 0.5, 3), Err(Error::InsufficientData(_))));
    let tail = tail_profile(&p);
    assert!(tail.at(tail.len()) < 0.1);
}

#[test]
fn non_self_adjoint_input_is_rejected() {
    let a = SparseOp::from_triplets(4, [(0, 1, c64(1.0))]).unwrap();
    assert!(matches!(extract(&a, 0.5, 2), Err(Error::ContractViolation(_))));
}
