use super::SparseOp;
use crate::{Complex64, Error, Result};
use nalgebra::DMatrix;

/// Which line family the `C k^{3/2}` bound was run over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundRoute {
    /// Decompose by rows: `||a|| <= row_max * C * sqrt(col_max)`.
    Rows,
    /// Same argument on the adjoint: `||a|| <= col_max * C * sqrt(row_max)`.
    Columns,
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct NormBound {
    pub bound: f64,
    pub max_modulus: f64,
    pub route: BoundRoute,
    /// Number of single-entry-per-line parts in the chosen route.
    pub parts: usize,
    /// Max multiplicity of an index inside one part.
    pub multiplicity: usize,
}

const MAX_ITERATIONS: usize = 20_000;
const BLOCK: usize = 8;
const STALL_ROUNDS: usize = 5;

impl SparseOp {
    /// Upper bound on the operator norm from the line decomposition: each of
    /// the `row_max` parts has norm at most `C * sqrt(col_max)`, with `C` the
    /// largest entry modulus. Equals `C k^{3/2}` when both profile components
    /// are `k`.
    pub fn norm_bound(&self) -> NormBound {
        let c = self.max_modulus();
        let (r, k) = (self.profile.row_max, self.profile.col_max);
        let rows = r as f64 * (k as f64).sqrt();
        let cols = k as f64 * (r as f64).sqrt();
        if cols < rows {
            NormBound { bound: c * cols, max_modulus: c, route: BoundRoute::Columns, parts: k, multiplicity: r }
        } else {
            NormBound { bound: c * rows, max_modulus: c, route: BoundRoute::Rows, parts: r, multiplicity: k }
        }
    }

    pub fn norm_upper_bound(&self) -> f64 {
        self.norm_bound().bound
    }

    /// Largest singular value by block power iteration on `a^* a`.
    ///
    /// The operator splits into connected components of its row/column
    /// graph and each is handled on its own. On a component a block of up
    /// to `BLOCK` vectors is pushed through `a^* a` and re-orthonormalized,
    /// with a Rayleigh-Ritz step each round; this keeps the iteration fast
    /// when the top singular values are clustered. Start vectors are fixed,
    /// so results are deterministic. A component stops once the residual of
    /// its top Ritz pair is below `tol` relative to the Ritz value, or once
    /// the value has stalled for a few rounds.
    pub fn operator_norm(&self, tol: f64) -> Result<f64> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
        }
        let mut best = 0.0_f64;
        for comp in crate::dense::components(self) {
            best = best.max(self.component_norm(&comp.rows, &comp.cols, tol)?);
        }
        Ok(best)
    }

    fn component_norm(&self, rows: &[usize], cols: &[usize], tol: f64) -> Result<f64> {
        let (nr, nc) = (rows.len(), cols.len());
        let mut col_pos = std::collections::HashMap::with_capacity(nc);
        for (p, &j) in cols.iter().enumerate() {
            col_pos.insert(j, p);
        }
        let local: Vec<Vec<(usize, Complex64)>> =
            rows.iter().map(|&i| self.rows[i].iter().map(|&(j, z)| (col_pos[&j], z)).collect()).collect();
        let apply = |x: &DMatrix<Complex64>| -> DMatrix<Complex64> {
            let mut y = DMatrix::zeros(nr, x.ncols());
            for (r, row) in local.iter().enumerate() {
                for &(c, z) in row {
                    for q in 0..x.ncols() {
                        y[(r, q)] += z * x[(c, q)];
                    }
                }
            }
            y
        };
        let apply_adj = |y: &DMatrix<Complex64>| -> DMatrix<Complex64> {
            let mut x = DMatrix::zeros(nc, y.ncols());
            for (r, row) in local.iter().enumerate() {
                for &(c, z) in row {
                    for q in 0..y.ncols() {
                        x[(c, q)] += z.conj() * y[(r, q)];
                    }
                }
            }
            x
        };
        let p = nc.min(BLOCK);
        let start = DMatrix::from_fn(nc, p, |i, q| {
            let v = if q == 0 { 1.0 + i as f64 / nc as f64 } else { ((i + 1) as f64 * (q as f64 + 0.5) * 0.618_033_988_7).fract() - 0.5 };
            Complex64::new(v, 0.0)
        });
        let mut x = start.qr().q();
        let (mut est, mut stalled) = (0.0_f64, 0);
        for _ in 0..MAX_ITERATIONS {
            let z = apply(&x);
            let h = z.adjoint() * &z;
            let eig = h.symmetric_eigen();
            let top = (0..p).max_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b])).unwrap();
            let theta = eig.eigenvalues[top].max(0.0);
            let ritz = &x * &eig.eigenvectors;
            let y = apply_adj(&(&z * &eig.eigenvectors));
            let resid = (y.column(top) - ritz.column(top) * Complex64::new(theta, 0.0)).norm();
            if theta == 0.0 || resid <= tol * theta {
                return Ok(theta.sqrt());
            }
            stalled = if (theta - est).abs() <= tol * 1e-3 * theta { stalled + 1 } else { 0 };
            if stalled >= STALL_ROUNDS {
                return Ok(theta.sqrt());
            }
            est = theta;
            x = y.qr().q();
        }
        Err(Error::NoConvergence { iterations: MAX_ITERATIONS, last_estimate: est.sqrt() })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;

    #[test]
    fn identity_bound_is_attained() {
        let id = SparseOp::identity(8);
        assert_eq!(id.norm_upper_bound(), 1.0);
        assert!((id.operator_norm(1e-12).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_row_uses_the_sound_route() {
        // one dense row: true norm sqrt(n)
        let n = 9;
        let a = SparseOp::from_triplets(n, (0..n).map(|j| (0, j, c64(1.0)))).unwrap();
        let nb = a.norm_bound();
        assert_eq!(nb.route, BoundRoute::Columns);
        assert!((nb.bound - 3.0).abs() < 1e-12);
        assert!((a.operator_norm(1e-12).unwrap() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn profile_three_bound() {
        let n = 12;
        let a = SparseOp::from_triplets(
            n,
            (0..n).flat_map(|i| (0..3).map(move |s| (i, (i + 4 * s) % n, c64(if s == 1 { -1.0 } else { 1.0 })))),
        )
        .unwrap();
        assert!((a.norm_upper_bound() - 27f64.sqrt()).abs() < 1e-12);
        assert!(a.operator_norm(1e-10).unwrap() <= a.norm_upper_bound());
    }

    #[test]
    fn zero_and_bad_tolerance() {
        assert_eq!(SparseOp::zeros(3).operator_norm(1e-9).unwrap(), 0.0);
        assert_eq!(SparseOp::zeros(3).norm_upper_bound(), 0.0);
        assert!(SparseOp::identity(3).operator_norm(0.0).is_err());
    }

    #[test]
    fn nilpotent_start_vector_in_kernel() {
        // a single entry off the diagonal; the start block must not miss it
        let a = SparseOp::from_triplets(2, [(0, 1, c64(2.0))]).unwrap();
        assert!((a.operator_norm(1e-12).unwrap() - 2.0).abs() < 1e-12);
    }
}
