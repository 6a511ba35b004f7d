//! Expander Laplacians and the even-block projection.
//!
//! For a connected `d`-regular graph on `m` vertices the kernel of the
//! normalized Laplacian is spanned by the constant vector, so the kernel
//! projection is the averaging projection `p_m`. A polynomial filter that is
//! 1 at 0 and small on `[lambda_1, 2]` approximates that projection with an
//! operator of bounded sparsity.

mod filter;
mod graph;

pub use filter::{apply_filter, chebyshev_filter, PolyFilter};
pub use graph::{laplacian, random_regular_graph, RegularGraph, PAIRING_ATTEMPTS};

use crate::dense;
use crate::rng::child_seed;
use crate::{Complex64, Error, Result, SparseOp};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// Two smallest eigenvalues by a dense symmetric eigensolver.
pub fn spectral_gap(l: &SparseOp) -> (f64, f64) {
    let ev = dense::hermitian_eigenvalues(l);
    (ev.first().copied().unwrap_or(0.0), ev.get(1).copied().unwrap_or(f64::INFINITY))
}

/// The `m x m` matrix with every entry `1/m`.
pub fn averaging_projection(m: usize) -> DMatrix<f64> {
    DMatrix::from_element(m, m, 1.0 / m as f64)
}

/// Norm of `p_{2n+1} - diag(p_{2n}, 0)` and its closed-form bound
/// `(2 + 2 sqrt(2n)) / (2n + 1)`.
pub fn corner_compression_error(n: usize) -> (f64, f64) {
    let m = 2 * n;
    let mut diff = averaging_projection(m + 1);
    let inner = averaging_projection(m);
    diff.view_mut((0, 0), (m, m)).zip_apply(&inner, |x, y| *x -= y);
    let exact = diff.singular_values().max();
    let bound = (2.0 + 2.0 * (m as f64).sqrt()) / (m as f64 + 1.0);
    (exact, bound)
}

/// Dense projection onto the eigenvectors of `l` with eigenvalue `<= tol`.
pub fn kernel_projection(l: &SparseOp, tol: f64) -> DMatrix<Complex64> {
    let (values, vectors) = dense::hermitian_eigen(l);
    let n = values.len();
    let mut p = DMatrix::zeros(n, n);
    for (k, _) in values.iter().enumerate().filter(|(_, &v)| v <= tol) {
        let v = vectors.column(k);
        p += v * v.adjoint();
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineParams {
    pub n_max: usize,
    pub degree: usize,
    pub s: u32,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockReport {
    /// Vertex count `2n`.
    pub m: usize,
    pub graph_degree: usize,
    pub lambda1: f64,
    /// `||f(L_m) - P_ker||` against the dense kernel projection.
    pub err: f64,
    /// `||P_ker - p_m||`, max entry difference.
    pub kernel_vs_average: f64,
    pub laplacian_norm: f64,
    /// Largest number of nonzeros in a row of the filtered block.
    pub row_support: usize,
    /// Whether every row support lies in the BFS ball of radius `degree(f)`.
    pub support_in_ball: bool,
    pub reseeds: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CornerReport {
    pub n: usize,
    pub exact: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub params: PipelineParams,
    pub per_block: Vec<BlockReport>,
    pub delta_hat: f64,
    pub filter_degree: usize,
    pub profile_bound: f64,
    pub measured_profile: usize,
    pub max_err: f64,
    pub corner: Vec<CornerReport>,
}

/// Graph used for the block with `m` vertices: a random `d`-regular graph,
/// or `K_m` when `m <= d`. Disconnected draws are redrawn with the next seed.
pub fn block_graph(m: usize, d: usize, seed: u64) -> Result<(RegularGraph, usize)> {
    if m <= d {
        return Ok((RegularGraph::complete(m), 0));
    }
    let base = child_seed(seed, &format!("graph-{m}"));
    for reseeds in 0..64 {
        let g = random_regular_graph(m, d, base.wrapping_add(reseeds as u64))?;
        if g.is_connected() {
            return Ok((g, reseeds));
        }
        log::info!("graph on {m} vertices disconnected, redrawing");
    }
    Err(Error::RetryExhausted { attempts: 64 })
}

fn block_of(a: &SparseOp, offset: usize, m: usize) -> DMatrix<Complex64> {
    let mut out = DMatrix::zeros(m, m);
    for i in 0..m {
        for &(j, z) in a.row(offset + i) {
            assert!((offset..offset + m).contains(&j), "filtered operator leaks between blocks");
            out[(i, j - offset)] = z;
        }
    }
    out
}

/// Builds `L = (+)_n L_n` over graphs on `2n` vertices, `n = 1..=n_max`,
/// filters it at the measured gap and compares each block with its kernel
/// projection.
pub fn build_even_projection_pipeline(n_max: usize, d: usize, s: u32, seed: u64) -> Result<PipelineReport> {
    if n_max == 0 || d == 0 {
        return Err(Error::InvalidArgument("n_max and degree must be positive".into()));
    }
    let mut graphs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        graphs.push(block_graph(2 * n, d, seed)?);
    }
    let laps: Vec<SparseOp> = graphs.iter().map(|(g, _)| laplacian(g)).collect();
    let gaps: Vec<(f64, f64)> = laps.iter().map(spectral_gap).collect();
    let delta_hat = gaps.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    if delta_hat <= 1e-10 {
        return Err(Error::ContractViolation(format!("no spectral gap: lambda_1 = {delta_hat:e}")));
    }
    let filter = chebyshev_filter(delta_hat.min(2.0 - 1e-12), s)?;

    let window: usize = laps.iter().map(SparseOp::window).sum();
    let mut triplets = Vec::new();
    let mut offset = 0;
    for l in &laps {
        triplets.extend(l.iter().map(|(i, j, z)| (i + offset, j + offset, z)));
        offset += l.window();
    }
    let big = SparseOp::from_triplets(window, triplets)?;
    let filtered = apply_filter(&filter, &big)?;

    let mut per_block = Vec::with_capacity(n_max);
    let mut offset = 0;
    for ((l, (g, reseeds)), gap) in laps.iter().zip(&graphs).zip(&gaps) {
        let m = l.window();
        let fb = block_of(&filtered, offset, m);
        let pk = kernel_projection(l, 1e-8);
        let err = dense::dense_norm(&(&fb - &pk));
        let avg = averaging_projection(m);
        let kernel_vs_average = pk.iter().zip(avg.iter()).map(|(a, b)| (a.re - b).hypot(a.im)).fold(0.0, f64::max);
        let mut row_support = 0;
        let mut support_in_ball = true;
        for v in 0..m {
            let dist = g.bfs(v);
            let row = filtered.row(offset + v);
            row_support = row_support.max(row.len());
            support_in_ball &= row.iter().all(|&(j, _)| dist[j - offset] <= filter.degree);
        }
        per_block.push(BlockReport {
            m,
            graph_degree: g.degree(),
            lambda1: gap.1,
            err,
            kernel_vs_average,
            laplacian_norm: dense::norm(l),
            row_support,
            support_in_ball,
            reseeds: *reseeds,
        });
        offset += m;
    }
    let max_err = per_block.iter().map(|b| b.err).fold(0.0, f64::max);
    let corner = (1..=n_max)
        .map(|n| {
            let (exact, bound) = corner_compression_error(n);
            CornerReport { n, exact, bound }
        })
        .collect();
    Ok(PipelineReport {
        params: PipelineParams { n_max, degree: d, s, seed },
        per_block,
        delta_hat,
        filter_degree: filter.degree,
        profile_bound: filter.profile_bound(big.profile()),
        measured_profile: filtered.profile().k(),
        max_err,
        corner,
    })
}
