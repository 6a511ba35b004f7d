use crate::rng::Rng;
use crate::{c64, Error, Result, SparseOp};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use std::collections::VecDeque;

/// Simple `d`-regular graph on `0..m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegularGraph {
    degree: usize,
    adjacency: Vec<Vec<usize>>,
}

impl RegularGraph {
    /// Checks simplicity, symmetry and regularity.
    pub fn from_adjacency(degree: usize, mut adjacency: Vec<Vec<usize>>) -> Result<Self> {
        let m = adjacency.len();
        for (v, nb) in adjacency.iter_mut().enumerate() {
            nb.sort_unstable();
            if nb.len() != degree {
                return Err(Error::InvalidArgument(format!("vertex {v} has degree {}, expected {degree}", nb.len())));
            }
            if nb.windows(2).any(|w| w[0] == w[1]) || nb.contains(&v) || nb.iter().any(|&w| w >= m) {
                return Err(Error::InvalidArgument(format!("vertex {v}: loop, multi-edge or bad neighbor")));
            }
        }
        for (v, nb) in adjacency.iter().enumerate() {
            if nb.iter().any(|&w| adjacency[w].binary_search(&v).is_err()) {
                return Err(Error::InvalidArgument(format!("adjacency of {v} is not symmetric")));
            }
        }
        Ok(RegularGraph { degree, adjacency })
    }

    pub fn from_edges(m: usize, degree: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); m];
        for &(u, v) in edges {
            if u >= m || v >= m {
                return Err(Error::InvalidArgument(format!("edge ({u}, {v}) outside 0..{m}")));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Self::from_adjacency(degree, adjacency)
    }

    /// The complete graph `K_m`, which is `(m-1)`-regular.
    pub fn complete(m: usize) -> Self {
        let adjacency = (0..m).map(|v| (0..m).filter(|&w| w != v).collect()).collect();
        RegularGraph { degree: m.saturating_sub(1), adjacency }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Edges `(u, v)` with `u < v`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, nb)| nb.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
            .collect()
    }

    /// Distances from `src` (unreachable: `usize::MAX`).
    pub fn bfs(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut q = VecDeque::from([src]);
        dist[src] = 0;
        while let Some(u) = q.pop_front() {
            for &w in &self.adjacency[u] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.bfs(0).iter().all(|&d| d != usize::MAX)
    }
}

/// Attempts allowed before the pairing model gives up.
pub const PAIRING_ATTEMPTS: usize = 1_000_000;

/// Random simple `d`-regular graph on `m` vertices from the pairing model:
/// `m d` half-edges are matched uniformly at random and the matching is
/// rejected as soon as it produces a loop or a repeated edge. Conditioned on
/// acceptance the result is uniform over simple `d`-regular graphs.
pub fn random_regular_graph(m: usize, d: usize, seed: u64) -> Result<RegularGraph> {
    if d >= m || !(m * d).is_multiple_of(2) || m == 0 {
        return Err(Error::InvalidArgument(format!("no simple {d}-regular graph on {m} vertices")));
    }
    let mut rng = Rng::seed_from_u64(seed);
    let mut points: Vec<usize> = (0..m * d).map(|p| p / d).collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::with_capacity(d); m];
    'attempt: for _ in 0..PAIRING_ATTEMPTS {
        points.shuffle(&mut rng);
        adjacency.iter_mut().for_each(Vec::clear);
        for pair in points.chunks_exact(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adjacency[u].contains(&v) {
                continue 'attempt;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        return RegularGraph::from_adjacency(d, adjacency);
    }
    Err(Error::RetryExhausted { attempts: PAIRING_ATTEMPTS })
}

/// Degree-normalized Laplacian: `1` on the diagonal, `-1/d` on edges.
pub fn laplacian(g: &RegularGraph) -> SparseOp {
    let d = g.degree() as f64;
    let triplets = g.adjacency().iter().enumerate().flat_map(|(v, nb)| {
        std::iter::once((v, v, c64(1.0))).chain(nb.iter().map(move |&w| (v, w, c64(-1.0 / d))))
    });
    SparseOp::from_triplets(g.vertex_count(), triplets).expect("vertices inside window")
}
