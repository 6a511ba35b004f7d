//! Explicit truncations of the averaging isometry, the interleaved unitary,
//! the block projection and related operators.
//!
//! The window is `H = C^1 + C^2 + ... + C^B` with blocks laid out
//! consecutively; `a_n` is the unit vector with all entries `1/sqrt(n)` on
//! block `n`.

use crate::{c64, Complex64, Error, Result, SparseOp};
use nalgebra::DMatrix;

/// Consecutive blocks of the given sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be positive".into()));
        }
        let offsets = sizes
            .iter()
            .scan(0, |acc, &s| {
                let o = *acc;
                *acc += s;
                Some(o)
            })
            .collect();
        Ok(BlockLayout { sizes, offsets })
    }

    /// Blocks of sizes `1, 2, ..., blocks`.
    pub fn standard(blocks: usize) -> Self {
        Self::new((1..=blocks).collect()).expect("positive sizes")
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    pub fn total(&self) -> usize {
        self.offsets.last().zip(self.sizes.last()).map_or(0, |(o, s)| o + s)
    }

    pub fn range(&self, block: usize) -> std::ops::Range<usize> {
        self.offsets[block]..self.offsets[block] + self.sizes[block]
    }

    /// Block containing `index`, if any.
    pub fn block_of(&self, index: usize) -> Option<usize> {
        if index >= self.total() {
            return None;
        }
        Some(self.offsets.partition_point(|&o| o <= index) - 1)
    }
}

/// Block diagonal operator with dense square blocks.
#[derive(Clone, Debug)]
pub struct BlockDiagOp {
    pub layout: BlockLayout,
    pub blocks: Vec<DMatrix<Complex64>>,
}

impl BlockDiagOp {
    pub fn new(layout: BlockLayout, blocks: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if blocks.len() != layout.block_count()
            || blocks.iter().zip(layout.sizes()).any(|(b, &s)| b.nrows() != s || b.ncols() != s)
        {
            return Err(Error::InvalidArgument("blocks do not match layout".into()));
        }
        Ok(BlockDiagOp { layout, blocks })
    }

    /// Exact conversion onto a window of at least `layout.total()`.
    pub fn to_sparse(&self, window: usize) -> Result<SparseOp> {
        let total = self.layout.total();
        if window < total {
            return Err(Error::WindowTooSmall { window, needed: total });
        }
        let triplets = self.blocks.iter().enumerate().flat_map(|(b, m)| {
            let off = self.layout.offsets()[b];
            (0..m.nrows()).flat_map(move |i| (0..m.ncols()).map(move |j| (off + i, off + j, m[(i, j)])))
        });
        SparseOp::from_triplets(window, triplets)
    }
}

fn check_window(layout: &BlockLayout, window: usize) -> Result<()> {
    if window < layout.total() {
        return Err(Error::WindowTooSmall { window, needed: layout.total() });
    }
    Ok(())
}

/// The isometry `v(e_n) = a_n`: column `n` is constant `1/sqrt(s_n)` on
/// block `n`. Columns past the last block are zero.
pub fn make_averaging_isometry(layout: &BlockLayout, window: usize) -> Result<SparseOp> {
    check_window(layout, window)?;
    let triplets = layout.sizes().iter().enumerate().flat_map(|(n, &s)| {
        let v = c64(1.0 / (s as f64).sqrt());
        layout.range(n).map(move |i| (i, n, v))
    });
    SparseOp::from_triplets(window, triplets)
}

/// Helmert vectors of size `s`: `h_j = (1, ..., 1, -j, 0, ...) / sqrt(j(j+1))`
/// with `j` leading ones, `j = 1..s-1`. Orthonormal and orthogonal to the
/// constant vector.
pub fn helmert_vectors(s: usize) -> Vec<Vec<f64>> {
    (1..s)
        .map(|j| {
            let norm = ((j * (j + 1)) as f64).sqrt();
            (0..=j).map(|t| if t < j { 1.0 / norm } else { -(j as f64) / norm }).collect()
        })
        .collect()
}

/// Columns `b_1, b_2, ...`: an orthonormal basis of the complement of
/// `span{a_n}`, block by block (Helmert basis inside each block).
pub fn make_complement_basis(layout: &BlockLayout, window: usize) -> Result<SparseOp> {
    check_window(layout, window)?;
    let mut triplets = Vec::new();
    let mut col = 0;
    for (n, &s) in layout.sizes().iter().enumerate() {
        let off = layout.offsets()[n];
        for h in helmert_vectors(s) {
            triplets.extend(h.iter().enumerate().map(|(t, &x)| (off + t, col, c64(x))));
            col += 1;
        }
    }
    SparseOp::from_triplets(window, triplets)
}

/// The unitary `u(e_{2n-1}) = a_n`, `u(e_{2n}) = b_n` on a block-aligned
/// window.
#[derive(Clone, Debug)]
pub struct InterleavedUnitary {
    pub op: SparseOp,
    /// Leading columns where the truncation agrees with the infinite `u`.
    pub interior_cols: usize,
    /// Leading rows on which every `a_n`, `b_m` touching them sits in an
    /// interior column.
    pub interior_rows: usize,
}

/// Builds the interleaved unitary on the window `layout.total()`. Odd and
/// even columns alternate between `a_n` and `b_n` while both exist; after
/// that the remaining `b` vectors fill the tail columns in order, so the
/// truncation is exactly unitary.
pub fn make_interleaved_unitary(layout: &BlockLayout) -> InterleavedUnitary {
    let window = layout.total();
    let nb = layout.block_count();
    let b = make_complement_basis(layout, window).expect("window matches layout");
    let v = make_averaging_isometry(layout, window).expect("window matches layout");
    let nbasis = window - nb;
    let pairs = nb.min(nbasis);
    let mut triplets = Vec::with_capacity(v.nnz() + b.nnz());
    let mut place = |src: &SparseOp, from: usize, to: usize| {
        triplets.extend(src.col(from).iter().map(|&(i, z)| (i, to, z)));
    };
    for n in 0..pairs {
        place(&v, n, 2 * n);
        place(&b, n, 2 * n + 1);
    }
    let mut next = 2 * pairs;
    for n in pairs..nb {
        place(&v, n, next);
        next += 1;
    }
    for m in pairs..nbasis {
        place(&b, m, next);
        next += 1;
    }
    debug_assert_eq!(next, window);
    let op = SparseOp::from_triplets(window, triplets).expect("inside window");

    // rows of block n are interior when a_n and all of its Helmert vectors
    // sit in the first 2 * pairs columns
    let mut seen_b = 0;
    let mut interior_rows = 0;
    for (n, &s) in layout.sizes().iter().enumerate() {
        seen_b += s - 1;
        if n < pairs && seen_b <= pairs {
            interior_rows = layout.range(n).end;
        } else {
            break;
        }
    }
    InterleavedUnitary { op, interior_cols: 2 * pairs, interior_rows }
}

/// `p = (+) p_n` with `p_n` the all-`1/n` matrix on block `n`.
pub fn make_block_projection(layout: &BlockLayout) -> BlockDiagOp {
    let blocks = layout
        .sizes()
        .iter()
        .map(|&s| DMatrix::from_element(s, s, c64(1.0 / s as f64)))
        .collect();
    BlockDiagOp::new(layout.clone(), blocks).expect("blocks match layout")
}

/// `max(||u^* u - 1||_max, ||u u^* - 1||_max)`.
pub fn unitarity_defect(u: &SparseOp) -> f64 {
    let id = SparseOp::identity(u.window());
    let a = u.adjoint();
    let l = a.mul(u).and_then(|m| m.sub(&id)).map(|d| d.max_modulus()).unwrap_or(f64::INFINITY);
    let r = u.mul(&a).and_then(|m| m.sub(&id)).map(|d| d.max_modulus()).unwrap_or(f64::INFINITY);
    l.max(r)
}

/// `p = (1/2) [[1, u], [u^*, 1]]` flattened with the interleaved map.
/// `u` must be unitary to `1e-10` (entrywise on `u^*u - 1`, `uu^* - 1`).
pub fn make_m2_projection(u: &SparseOp) -> Result<SparseOp> {
    let defect = unitarity_defect(u);
    if defect > 1e-10 {
        return Err(Error::ContractViolation(format!("input is not unitary (defect {defect:.3e})")));
    }
    let half = c64(0.5);
    let id = SparseOp::identity(u.window()).scale(half);
    SparseOp::embed_blocks(&[vec![id.clone(), u.scale(half)], vec![u.adjoint().scale(half), id]])
}

/// `v_1(e_n) = e_{2n-1}`, `v_2(e_n) = e_{2n}` on a window of size `n`.
/// Columns whose image leaves the window are dropped.
pub fn make_shift_isometries(window: usize) -> (SparseOp, SparseOp) {
    let one = c64(1.0);
    let v1 = (0..window).filter(|j| 2 * j < window).map(|j| (2 * j, j, one));
    let v2 = (0..window).filter(|j| 2 * j + 1 < window).map(|j| (2 * j + 1, j, one));
    (
        SparseOp::from_triplets(window, v1).expect("inside window"),
        SparseOp::from_triplets(window, v2).expect("inside window"),
    )
}

/// `a = v h` with `h(e_n) = lambda_n e_n`: a compact operator whose polar
/// part is the averaging isometry.
#[derive(Clone, Debug)]
pub struct PolarCounterexample {
    pub a: SparseOp,
    pub v: SparseOp,
    pub h: SparseOp,
}

/// Default weights `lambda_n = 1/n`.
pub fn default_lambdas(window: usize) -> Vec<f64> {
    (1..=window).map(|n| 1.0 / n as f64).collect()
}

pub fn make_polar_counterexample(layout: &BlockLayout, lambdas: &[f64]) -> Result<PolarCounterexample> {
    let window = lambdas.len();
    check_window(layout, window)?;
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidArgument("lambdas must be strictly positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidArgument("lambdas must be non-increasing".into()));
    }
    let v = make_averaging_isometry(layout, window)?;
    let h = SparseOp::diagonal(&lambdas.iter().map(|&l| c64(l)).collect::<Vec<_>>());
    let a = v.mul(&h)?;
    Ok(PolarCounterexample { a, v, h })
}

impl PolarCounterexample {
    /// Recovers `v` from `a` by normalizing its nonzero columns.
    pub fn recover_isometry(&self) -> SparseOp {
        let n = self.a.window();
        let triplets = (0..n).flat_map(|j| {
            let col = self.a.col(j);
            let norm: f64 = col.iter().map(|(_, z)| z.norm_sqr()).sum::<f64>().sqrt();
            col.iter().map(move |&(i, z)| (i, j, z / norm))
        });
        SparseOp::from_triplets(n, triplets).expect("inside window")
    }

    /// `lambda_m`, with `m` the first column whose block leaves `[1..r]`:
    /// a bound for `||a - truncate_compact(a, r)||`.
    pub fn truncation_bound(&self, layout: &BlockLayout, r: usize) -> f64 {
        let lambda = |j: usize| self.h.get(j, j).re;
        let cols = self.a.window();
        let first_cut = (0..layout.block_count().min(cols)).find(|&n| layout.range(n).end > r);
        // columns are supported on disjoint blocks, so the error is the largest
        // lost column; with lambda non-increasing that is the first cut column
        // or, if it starts past r, column r itself
        match first_cut {
            Some(n) => lambda(n.min(r)),
            None => 0.0,
        }
    }
}
