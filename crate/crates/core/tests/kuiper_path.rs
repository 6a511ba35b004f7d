mod common;

use common::{dense, norm, svd};
use matfin::kuiper::*;
use matfin::rng::Rng;
use matfin::{c64, Complex64, SparseOp};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;

/// Every certificate of `path` against dense SVDs of the recorded steps.
fn check_certificates(path: &HomotopyPath) {
    for (i, (s, c)) in path.steps.iter().zip(&path.certificates).enumerate() {
        let sv = svd(&dense(s));
        assert!((sv.last().unwrap() - c.sigma_min).abs() <= 1e-9 * sv[0], "step {i}");
        assert!((sv[0] - c.sigma_max).abs() <= 1e-9 * sv[0], "step {i}");
        assert_eq!(s.profile(), c.profile);
        if i > 0 {
            let prev = dense(&path.steps[i - 1]);
            let jump = norm(&(dense(s) - &prev)) / norm(&prev);
            assert!(jump <= c.jump + 1e-12, "step {i}: measured {jump} > recorded {}", c.jump);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contraction_certificates_hold(n in 5usize..24, k in 1usize..4, complex: bool, seed: u64) {
        let g = random_gl(n, k, complex, &mut Rng::seed_from_u64(seed));
        let c = contract(&g, &ContractConfig { steps: 16, ..ContractConfig::default() }).unwrap();
        prop_assert_eq!(&c.path.steps[0], &g);
        prop_assert!(c.path.min_sigma() > 1e-6);
        prop_assert!(c.path.max_jump() <= 0.1);
        prop_assert!(c.path.endpoint_error() <= 1e-8);
        prop_assert!(c.path.max_profile() <= c.budget);
        c.selection.verify(&g).unwrap();
        check_certificates(&c.path);
    }
}

#[test]
fn whitehead_closed_form_is_the_commutator() {
    let mut rng = Rng::seed_from_u64(4);
    let u = random_gl(5, 2, true, &mut rng);
    let u_inv = sparse_inverse(&u).unwrap();
    let m = 5;
    let ud = dense(&u);
    let ui = dense(&u_inv);
    assert!((&ud * &ui - DMatrix::<Complex64>::identity(m, m)).iter().all(|z| z.norm() < 1e-12));
    for t in [0.0, 0.2, 0.5, 0.9, 1.0] {
        let th = t * std::f64::consts::FRAC_PI_2;
        let (c, s) = (th.cos(), th.sin());
        let id = DMatrix::<Complex64>::identity(m, m);
        let zero = DMatrix::<Complex64>::zeros(m, m);
        let blocks = |a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, cc: &DMatrix<Complex64>, d: &DMatrix<Complex64>| {
            let mut out = DMatrix::zeros(2 * m, 2 * m);
            out.view_mut((0, 0), (m, m)).copy_from(a);
            out.view_mut((0, m), (m, m)).copy_from(b);
            out.view_mut((m, 0), (m, m)).copy_from(cc);
            out.view_mut((m, m), (m, m)).copy_from(d);
            out
        };
        let r = blocks(&(&id * c64(c)), &(&id * c64(-s)), &(&id * c64(s)), &(&id * c64(c)));
        let r_inv = r.adjoint();
        let prod = blocks(&ud, &zero, &zero, &id) * r * blocks(&ui, &zero, &zero, &id) * r_inv;
        let w = dense(&whitehead_rotation(&u, &u_inv, t).unwrap());
        let gap = (&w - &prod).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(gap < 1e-12, "t = {t}: {gap}");
    }
}

#[test]
fn whitehead_stage_is_certified() {
    let u = random_gl(6, 2, false, &mut Rng::seed_from_u64(8));
    let path = whitehead_stage(&u, &ContractConfig { steps: 16, ..ContractConfig::default() }).unwrap();
    assert_eq!(path.steps[0], direct_sum(&u, &sparse_inverse(&u).unwrap()).unwrap());
    assert!(path.endpoint_error() < 1e-10);
    check_certificates(&path);
}

#[test]
fn singular_input_is_refused() {
    let mut d = vec![c64(1.0); 6];
    d[2] = c64(0.0);
    assert!(contract(&SparseOp::diagonal(&d), &ContractConfig::default()).is_err());
    assert!(contract(&SparseOp::identity(2).scale(c64(2.0)), &ContractConfig::default()).is_err());
}
