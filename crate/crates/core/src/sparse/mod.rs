//! Sparse operators on a finite window with exact sparsity profiles.
//!
//! A [`SparseOp`] keeps its entries twice, once indexed by row and once by
//! column, both sorted. Stored entries are exactly nonzero: arithmetic prunes
//! entries that come out as `0.0 + 0.0i` and nothing else. Approximate pruning
//! is only done through [`SparseOp::prune`].

mod norm;

pub use norm::{BoundRoute, NormBound};

use crate::{Complex64, Error, Result};
use std::collections::BTreeMap;
use std::fmt;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Maximum stored entries per row and per column.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct SparsityProfile {
    pub row_max: usize,
    pub col_max: usize,
}

impl SparsityProfile {
    pub const ZERO: SparsityProfile = SparsityProfile { row_max: 0, col_max: 0 };

    pub fn new(row_max: usize, col_max: usize) -> Self {
        SparsityProfile { row_max, col_max }
    }

    /// The `k` for which the operator is in `B^(k)`: the larger of the two.
    pub fn k(&self) -> usize {
        self.row_max.max(self.col_max)
    }

    pub fn swapped(&self) -> Self {
        SparsityProfile { row_max: self.col_max, col_max: self.row_max }
    }

    /// Componentwise `<=`.
    pub fn within(&self, bound: SparsityProfile) -> bool {
        self.row_max <= bound.row_max && self.col_max <= bound.col_max
    }

    /// Bound for a sum of operators with these profiles.
    pub fn sum_bound(&self, other: SparsityProfile) -> Self {
        SparsityProfile {
            row_max: self.row_max + other.row_max,
            col_max: self.col_max + other.col_max,
        }
    }

    /// Bound for a product of operators with these profiles.
    pub fn product_bound(&self, other: SparsityProfile) -> Self {
        SparsityProfile {
            row_max: self.row_max * other.row_max,
            col_max: self.col_max * other.col_max,
        }
    }
}

impl fmt::Display for SparsityProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row_max, self.col_max)
    }
}

/// A finite-window truncation of a matrix-finite operator.
#[derive(Clone, PartialEq)]
pub struct SparseOp {
    n: usize,
    rows: Vec<Vec<(usize, Complex64)>>,
    cols: Vec<Vec<(usize, Complex64)>>,
    profile: SparsityProfile,
}

impl fmt::Debug for SparseOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SparseOp")
            .field("window", &self.n)
            .field("nnz", &self.nnz())
            .field("profile", &self.profile)
            .finish()
    }
}

impl SparseOp {
    pub fn zeros(n: usize) -> Self {
        SparseOp {
            n,
            rows: vec![Vec::new(); n],
            cols: vec![Vec::new(); n],
            profile: SparsityProfile::ZERO,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![Complex64::new(1.0, 0.0); n])
    }

    /// Diagonal operator; zero diagonal entries are not stored.
    pub fn diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut rows = vec![Vec::new(); n];
        for (i, &z) in diag.iter().enumerate() {
            if z != ZERO {
                rows[i].push((i, z));
            }
        }
        Self::from_sorted_rows(n, rows)
    }

    /// Builds an operator from `(row, col, value)` triplets. Duplicates are
    /// summed; entries that end up exactly zero are dropped.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, Complex64)>,
    {
        let mut acc: Vec<BTreeMap<usize, Complex64>> = vec![BTreeMap::new(); n];
        for (i, j, z) in triplets {
            if i >= n || j >= n {
                return Err(Error::IndexOutOfWindow { row: i, col: j, window: n });
            }
            *acc[i].entry(j).or_insert(ZERO) += z;
        }
        let rows = acc
            .into_iter()
            .map(|r| r.into_iter().filter(|&(_, z)| z != ZERO).collect())
            .collect();
        Ok(Self::from_sorted_rows(n, rows))
    }

    /// Dense row-major data, exact zeros skipped.
    pub fn from_dense(n: usize, data: &[Complex64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "dense data of length {} for window {}",
                data.len(),
                n
            )));
        }
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let z = data[i * n + j];
                        (z != ZERO).then_some((j, z))
                    })
                    .collect()
            })
            .collect();
        Ok(Self::from_sorted_rows(n, rows))
    }

    /// Rows must be sorted by column, free of duplicates and of zeros.
    pub(crate) fn from_sorted_rows(n: usize, rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        debug_assert_eq!(rows.len(), n);
        let mut cols: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        for (i, row) in rows.iter().enumerate() {
            debug_assert!(row.windows(2).all(|w| w[0].0 < w[1].0));
            for &(j, z) in row {
                debug_assert!(z != ZERO);
                cols[j].push((i, z));
            }
        }
        let profile = SparsityProfile {
            row_max: rows.iter().map(Vec::len).max().unwrap_or(0),
            col_max: cols.iter().map(Vec::len).max().unwrap_or(0),
        };
        SparseOp { n, rows, cols, profile }
    }

    pub fn window(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(Vec::is_empty)
    }

    /// The exact profile of the stored entries.
    pub fn profile(&self) -> SparsityProfile {
        self.profile
    }

    pub fn row(&self, i: usize) -> &[(usize, Complex64)] {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &[(usize, Complex64)] {
        &self.cols[j]
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.rows[i].binary_search_by_key(&j, |&(c, _)| c) {
            Ok(pos) => self.rows[i][pos].1,
            Err(_) => ZERO,
        }
    }

    /// Stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(j, z)| (i, j, z)))
    }

    /// Largest entry modulus, 0 for the zero operator.
    pub fn max_modulus(&self) -> f64 {
        self.iter().map(|(_, _, z)| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_entry_diff(&self, other: &SparseOp) -> Result<f64> {
        Ok(self.sub(other)?.max_modulus())
    }

    pub fn is_real(&self) -> bool {
        self.iter().all(|(_, _, z)| z.im == 0.0)
    }

    fn check_window(&self, other: &SparseOp) -> Result<()> {
        if self.n != other.n {
            return Err(Error::WindowMismatch { left: self.n, right: other.n });
        }
        Ok(())
    }

    fn merge_with<F>(&self, other: &SparseOp, f: F) -> Result<SparseOp>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        self.check_window(other)?;
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(ra, rb)| {
                let mut out = Vec::with_capacity(ra.len() + rb.len());
                let (mut p, mut q) = (0, 0);
                while p < ra.len() || q < rb.len() {
                    let (j, z) = match (ra.get(p), rb.get(q)) {
                        (Some(&(ja, za)), Some(&(jb, zb))) if ja == jb => {
                            p += 1;
                            q += 1;
                            (ja, f(za, zb))
                        }
                        (Some(&(ja, za)), Some(&(jb, _))) if ja < jb => {
                            p += 1;
                            (ja, f(za, ZERO))
                        }
                        (Some(&(ja, za)), None) => {
                            p += 1;
                            (ja, f(za, ZERO))
                        }
                        (_, Some(&(jb, zb))) => {
                            q += 1;
                            (jb, f(ZERO, zb))
                        }
                        (None, None) => unreachable!(),
                    };
                    if z != ZERO {
                        out.push((j, z));
                    }
                }
                out
            })
            .collect();
        Ok(SparseOp::from_sorted_rows(self.n, rows))
    }

    /// Entrywise sum; the profile is at most the sum of the two profiles.
    pub fn add(&self, other: &SparseOp) -> Result<SparseOp> {
        self.merge_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SparseOp) -> Result<SparseOp> {
        self.merge_with(other, |a, b| a - b)
    }

    /// `alpha * self + beta * other`.
    pub fn axpby(&self, alpha: Complex64, other: &SparseOp, beta: Complex64) -> Result<SparseOp> {
        self.merge_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn scale(&self, s: Complex64) -> SparseOp {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(j, z)| (j, z * s)).filter(|&(_, z)| z != ZERO).collect())
            .collect();
        SparseOp::from_sorted_rows(self.n, rows)
    }

    /// Matrix product. Row `i` of the result only touches the columns reached
    /// through the (at most `k`) nonzeros of row `i`, so the row profile is at
    /// most the product of the row profiles; dually for columns.
    pub fn mul(&self, other: &SparseOp) -> Result<SparseOp> {
        self.check_window(other)?;
        let mut acc: BTreeMap<usize, Complex64> = BTreeMap::new();
        let rows = self
            .rows
            .iter()
            .map(|ra| {
                acc.clear();
                for &(j, a) in ra {
                    for &(l, b) in &other.rows[j] {
                        *acc.entry(l).or_insert(ZERO) += a * b;
                    }
                }
                acc.iter().filter(|(_, &z)| z != ZERO).map(|(&l, &z)| (l, z)).collect()
            })
            .collect();
        Ok(SparseOp::from_sorted_rows(self.n, rows))
    }

    /// Conjugate transpose; swaps the profile components.
    pub fn adjoint(&self) -> SparseOp {
        let rows = self
            .cols
            .iter()
            .map(|c| c.iter().map(|&(i, z)| (i, z.conj())).collect())
            .collect();
        SparseOp::from_sorted_rows(self.n, rows)
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n, "vector length must match window");
        self.rows
            .iter()
            .map(|r| r.iter().map(|&(j, z)| z * x[j]).sum())
            .collect()
    }

    /// `self^* x` without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n, "vector length must match window");
        self.cols
            .iter()
            .map(|c| c.iter().map(|&(i, z)| z.conj() * x[i]).sum())
            .collect()
    }

    /// Column `j` as a dense vector.
    pub fn column_vector(&self, j: usize) -> Vec<Complex64> {
        let mut v = vec![ZERO; self.n];
        for &(i, z) in &self.cols[j] {
            v[i] = z;
        }
        v
    }

    /// Drops entries with modulus `<= eps`. Never applied implicitly.
    pub fn prune(&self, eps: f64) -> SparseOp {
        let rows = self
            .rows
            .iter()
            .map(|r| r.iter().copied().filter(|&(_, z)| z.norm() > eps).collect())
            .collect();
        SparseOp::from_sorted_rows(self.n, rows)
    }

    /// Keeps entries with both indices `< r` (the `[1..r]` corner).
    pub fn truncate_compact(&self, r: usize) -> SparseOp {
        let rows = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                if i < r {
                    row.iter().copied().take_while(|&(j, _)| j < r).collect()
                } else {
                    Vec::new()
                }
            })
            .collect();
        SparseOp::from_sorted_rows(self.n, rows)
    }

    /// Copies the operator into a larger window; existing entries unchanged.
    pub fn extend_window(&self, n: usize) -> Result<SparseOp> {
        if n < self.n {
            return Err(Error::WindowTooSmall { window: n, needed: self.n });
        }
        let mut rows = self.rows.clone();
        rows.resize(n, Vec::new());
        Ok(SparseOp::from_sorted_rows(n, rows))
    }

    /// Splits the operator into `k = row_max` parts with one entry per row:
    /// part `m` holds the `m`-th stored entry of every row that has one, in
    /// ascending column order.
    pub fn line_decompose(&self) -> LineDecomposition {
        let k = self.profile.row_max;
        let parts = (0..k)
            .map(|m| {
                let rows = self
                    .rows
                    .iter()
                    .map(|r| r.get(m).map(|&e| vec![e]).unwrap_or_default())
                    .collect();
                SparseOp::from_sorted_rows(self.n, rows)
            })
            .collect();
        LineDecomposition { window: self.n, parts }
    }

    /// The interleaved block flattening of the `m x m` operator matrix
    /// `blocks`: entry `(i, j)` of block `(r, s)` lands at `(i*m + r, j*m + s)`.
    pub fn embed_blocks(blocks: &[Vec<SparseOp>]) -> Result<SparseOp> {
        let m = blocks.len();
        if m == 0 || blocks.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidArgument("block matrix must be square and nonempty".into()));
        }
        let n = blocks[0][0].window();
        let mut triplets = Vec::new();
        for (r, brow) in blocks.iter().enumerate() {
            for (s, b) in brow.iter().enumerate() {
                if b.window() != n {
                    return Err(Error::WindowMismatch { left: n, right: b.window() });
                }
                triplets.extend(b.iter().map(|(i, j, z)| (i * m + r, j * m + s, z)));
            }
        }
        SparseOp::from_triplets(n * m, triplets)
    }

    /// `diag(a, ..., a)` with `m` copies under the interleaved index map.
    pub fn embed_block(&self, m: usize) -> Result<SparseOp> {
        if m == 0 {
            return Err(Error::InvalidArgument("m must be positive".into()));
        }
        let zero = SparseOp::zeros(self.n);
        let blocks: Vec<Vec<SparseOp>> = (0..m)
            .map(|r| (0..m).map(|s| if r == s { self.clone() } else { zero.clone() }).collect())
            .collect();
        Self::embed_blocks(&blocks)
    }
}

/// Parts `a^(1), ..., a^(k)` of a [`SparseOp::line_decompose`] call.
#[derive(Clone, Debug)]
pub struct LineDecomposition {
    pub window: usize,
    pub parts: Vec<SparseOp>,
}

impl LineDecomposition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn sum(&self) -> SparseOp {
        self.parts
            .iter()
            .fold(SparseOp::zeros(self.window), |acc, p| acc.add(p).expect("parts share a window"))
    }
}

/// Exact l2 distance from `x` to the set of vectors with at most `k`
/// nonzeros: the norm of everything but the `k` largest-modulus coordinates
/// (ties go to the lower index).
pub fn best_k_sparse_column_error(x: &[Complex64], k: usize) -> f64 {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&p, &q| x[q].norm().total_cmp(&x[p].norm()).then(p.cmp(&q)));
    order.iter().skip(k).map(|&i| x[i].norm_sqr()).fold(0.0, |s, v| s + v).sqrt()
}
