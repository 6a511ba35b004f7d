#![allow(dead_code)]

use matfin::rng::Rng;
use matfin::{Complex64, SparseOp};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;

/// Sum of `k` random partial permutations with entries of modulus at most
/// `c`. The profile is at most `(k, k)`.
pub fn random_sparse(rng: &mut Rng, n: usize, k: usize, c: f64) -> SparseOp {
    let density: f64 = rng.gen_range(0.3..1.0);
    let mut trip = Vec::new();
    for _ in 0..k {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        for (j, &i) in perm.iter().enumerate() {
            if rng.gen_bool(density) {
                let z = Complex64::from_polar(rng.gen_range(0.0..=c), rng.gen_range(0.0..std::f64::consts::TAU));
                trip.push((i, j, z));
            }
        }
    }
    SparseOp::from_triplets(n, trip).unwrap()
}

/// Dense copy built straight from the stored entries.
pub fn dense(a: &SparseOp) -> DMatrix<Complex64> {
    let n = a.window();
    let mut m = DMatrix::zeros(n, n);
    for (i, j, z) in a.iter() {
        m[(i, j)] = z;
    }
    m
}

/// Singular values of the full dense matrix, descending.
pub fn svd(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut sv: Vec<f64> = m.clone().singular_values().iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

pub fn norm(m: &DMatrix<Complex64>) -> f64 {
    svd(m).first().copied().unwrap_or(0.0)
}

/// Row and column nonzero counts recomputed from the entries.
pub fn recount_profile(a: &SparseOp) -> (usize, usize) {
    let n = a.window();
    let (mut r, mut c) = (vec![0; n], vec![0; n]);
    for (i, j, _) in a.iter() {
        r[i] += 1;
        c[j] += 1;
    }
    (r.into_iter().max().unwrap_or(0), c.into_iter().max().unwrap_or(0))
}
