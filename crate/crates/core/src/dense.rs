//! Dense linear algebra on windows: singular values, Hermitian spectra and
//! inverses, backed by nalgebra.
//!
//! Singular values are computed per connected component of the bipartite
//! row/column graph of the stored entries. Up to a permutation of rows and
//! columns the operator is block diagonal over these components, so the
//! union of the component spectra is the spectrum of the whole operator.

use crate::{Complex64, SparseOp};
use nalgebra::DMatrix;

pub fn to_dense(a: &SparseOp) -> DMatrix<Complex64> {
    let n = a.window();
    let mut m = DMatrix::zeros(n, n);
    for (i, j, z) in a.iter() {
        m[(i, j)] = z;
    }
    m
}

pub fn to_dense_real(a: &SparseOp) -> DMatrix<f64> {
    let n = a.window();
    let mut m = DMatrix::zeros(n, n);
    for (i, j, z) in a.iter() {
        m[(i, j)] = z.re;
    }
    m
}

/// Converts back, dropping entries with modulus `<= eps`.
pub fn from_dense(m: &DMatrix<Complex64>, eps: f64) -> SparseOp {
    assert_eq!(m.nrows(), m.ncols());
    let n = m.nrows();
    SparseOp::from_triplets(
        n,
        (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter_map(|(i, j)| {
            let z = m[(i, j)];
            (z.norm() > eps).then_some((i, j, z))
        }),
    )
    .expect("indices inside window")
}

fn singular_values_of(m: DMatrix<Complex64>) -> Vec<f64> {
    if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).singular_values().iter().copied().collect()
    } else {
        m.singular_values().iter().copied().collect()
    }
}

/// One block of the row/column decomposition: the rows and columns it uses.
#[derive(Clone, Debug)]
pub struct Component {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

/// Connected components of the bipartite graph rows <-> cols. Empty rows
/// and empty columns are left out.
pub fn components(a: &SparseOp) -> Vec<Component> {
    let n = a.window();
    // nodes: rows 0..n, cols n..2n
    let mut parent: Vec<usize> = (0..2 * n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, j, _) in a.iter() {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, n + j));
        if ri != rj {
            parent[ri] = rj;
        }
    }
    let mut index = std::collections::HashMap::new();
    let mut comps: Vec<Component> = Vec::new();
    for i in 0..n {
        if a.row(i).is_empty() {
            continue;
        }
        let r = find(&mut parent, i);
        let id = *index.entry(r).or_insert_with(|| {
            comps.push(Component { rows: Vec::new(), cols: Vec::new() });
            comps.len() - 1
        });
        comps[id].rows.push(i);
    }
    for j in 0..n {
        if a.col(j).is_empty() {
            continue;
        }
        let r = find(&mut parent, n + j);
        let id = index[&r];
        comps[id].cols.push(j);
    }
    comps
}

/// All `n` singular values, descending.
pub fn singular_values(a: &SparseOp) -> Vec<f64> {
    let n = a.window();
    let mut out = Vec::with_capacity(n);
    for c in components(a) {
        let (r, k) = (c.rows.len(), c.cols.len());
        let size = r.max(k);
        // pad to square; padded rows/cols are zero and add zero singular values,
        // which we drop again below by keeping min(r, k) of them
        let mut m = DMatrix::<Complex64>::zeros(size, size);
        let col_pos: std::collections::HashMap<usize, usize> =
            c.cols.iter().enumerate().map(|(p, &j)| (j, p)).collect();
        for (p, &i) in c.rows.iter().enumerate() {
            for &(j, z) in a.row(i) {
                m[(p, col_pos[&j])] = z;
            }
        }
        let mut sv = singular_values_of(m);
        sv.sort_by(|x, y| y.total_cmp(x));
        sv.truncate(r.min(k));
        out.extend(sv);
    }
    // zero rows and rectangular components account for the rest
    out.resize(n, 0.0);
    out.sort_by(|x, y| y.total_cmp(x));
    out
}

/// `(sigma_max, sigma_min)` over the whole window.
pub fn extreme_singular_values(a: &SparseOp) -> (f64, f64) {
    let sv = singular_values(a);
    (sv.first().copied().unwrap_or(0.0), sv.last().copied().unwrap_or(0.0))
}

/// Spectral norm via dense SVD.
pub fn norm(a: &SparseOp) -> f64 {
    extreme_singular_values(a).0
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian operator.
pub fn hermitian_eigen(a: &SparseOp) -> (Vec<f64>, DMatrix<Complex64>) {
    let n = a.window();
    let eig = to_dense(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&p, &q| eig.eigenvalues[p].total_cmp(&eig.eigenvalues[q]));
    let values = order.iter().map(|&p| eig.eigenvalues[p]).collect();
    let vectors = DMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Eigenvalues (ascending) of a Hermitian operator.
pub fn hermitian_eigenvalues(a: &SparseOp) -> Vec<f64> {
    let mut v: Vec<f64> = if a.is_real() {
        to_dense_real(a).symmetric_eigenvalues().iter().copied().collect()
    } else {
        to_dense(a).symmetric_eigenvalues().iter().copied().collect()
    };
    v.sort_by(f64::total_cmp);
    v
}

/// Spectral norm of a dense matrix.
pub fn dense_norm(m: &DMatrix<Complex64>) -> f64 {
    singular_values_of(m.clone()).into_iter().fold(0.0, f64::max)
}
