//! Matrix-finite operators from group actions, graphs and metric spaces.

use crate::rng::Rng;
use crate::{c64, Complex64, Error, Result, SparseOp, SparsityProfile};
use rand::seq::SliceRandom;
use rand::{Rng as _, SeedableRng};
use std::collections::{BTreeMap, VecDeque};

/// How a truncated generator treats points pushed out of the window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Wrap around, keeping every generator a bijection.
    #[default]
    Cyclic,
    /// Send them nowhere; the matching columns of the operator are empty.
    Drop,
}

/// Generators `g_1, ..., g_r` acting on `0..point_count`. A generator maps
/// `x` to `g[x]`, or nowhere when `g[x]` is `None`; it is always injective.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteAction {
    point_count: usize,
    generators: Vec<Vec<Option<usize>>>,
}

impl FiniteAction {
    pub fn new(point_count: usize, generators: Vec<Vec<Option<usize>>>) -> Result<Self> {
        for (m, g) in generators.iter().enumerate() {
            if g.len() != point_count {
                return Err(Error::InvalidArgument(format!("generator {m} has length {}", g.len())));
            }
            let mut seen = vec![false; point_count];
            for y in g.iter().flatten() {
                if *y >= point_count || std::mem::replace(&mut seen[*y], true) {
                    return Err(Error::InvalidArgument(format!("generator {m} is not injective")));
                }
            }
        }
        Ok(FiniteAction { point_count, generators })
    }

    /// From permutation arrays.
    pub fn from_permutations(point_count: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        Self::new(point_count, perms.into_iter().map(|p| p.into_iter().map(Some).collect()).collect())
    }

    /// `Z` acting by `x -> x + step` on `0..n`.
    pub fn translation(n: usize, step: i64, boundary: Boundary) -> Self {
        let g = (0..n)
            .map(|x| {
                let y = x as i64 + step;
                match boundary {
                    Boundary::Cyclic => Some(y.rem_euclid(n as i64) as usize),
                    Boundary::Drop => (0..n as i64).contains(&y).then_some(y as usize),
                }
            })
            .collect();
        FiniteAction { point_count: n, generators: vec![g] }
    }

    /// Two random permutations `a, b` of `0..n` with their inverses, in the
    /// order `a, b, a^-1, b^-1`: a truncated action of the free group.
    pub fn free_group(n: usize, seed: u64) -> Self {
        let mut rng = Rng::seed_from_u64(seed);
        let mut perms = Vec::with_capacity(4);
        for _ in 0..2 {
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut rng);
            perms.push(p);
        }
        let inverses: Vec<Vec<usize>> = perms.iter().map(|p| invert(p)).collect();
        perms.extend(inverses);
        Self::from_permutations(n, perms).expect("permutations")
    }

    pub fn point_count(&self) -> usize {
        self.point_count
    }

    pub fn generator_count(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[Vec<Option<usize>>] {
        &self.generators
    }

    /// Inverse of generator `m` as a partial map.
    pub fn inverse(&self, m: usize) -> Vec<Option<usize>> {
        let mut inv = vec![None; self.point_count];
        for (x, y) in self.generators[m].iter().enumerate() {
            if let Some(y) = y {
                inv[*y] = Some(x);
            }
        }
        inv
    }
}

fn invert(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (x, &y) in p.iter().enumerate() {
        inv[y] = x;
    }
    inv
}

/// `diag * sum_m coeffs[m] P_{g_m}`, where `P_g e_x = e_{g x}`.
pub fn action_operator(act: &FiniteAction, coeffs: &[Complex64], diag: Option<&[Complex64]>) -> Result<SparseOp> {
    if coeffs.len() != act.generator_count() {
        return Err(Error::InvalidArgument(format!(
            "{} coefficients for {} generators",
            coeffs.len(),
            act.generator_count()
        )));
    }
    let n = act.point_count();
    let triplets = act
        .generators()
        .iter()
        .zip(coeffs)
        .flat_map(|(g, &c)| g.iter().enumerate().filter_map(move |(x, y)| y.map(|y| (y, x, c))));
    let a = SparseOp::from_triplets(n, triplets)?;
    match diag {
        None => Ok(a),
        Some(d) if d.len() == n => SparseOp::diagonal(d).mul(&a),
        Some(d) => Err(Error::WindowMismatch { left: n, right: d.len() }),
    }
}

/// 0/1 adjacency operator of an undirected graph given by neighbor lists.
pub fn adjacency_operator(adjacency: &[Vec<usize>]) -> Result<SparseOp> {
    let n = adjacency.len();
    for (v, nb) in adjacency.iter().enumerate() {
        for &w in nb {
            if w >= n || !adjacency[w].contains(&v) {
                return Err(Error::InvalidArgument(format!("adjacency of {v} is not symmetric")));
            }
        }
    }
    let triplets = adjacency.iter().enumerate().flat_map(|(v, nb)| nb.iter().map(move |&w| (v, w, c64(1.0))));
    let a = SparseOp::from_triplets(n, triplets)?;
    if a.iter().any(|(_, _, z)| z != c64(1.0)) {
        return Err(Error::InvalidArgument("repeated edge in adjacency lists".into()));
    }
    Ok(a)
}

/// Adjacency lists from an edge list on `0..n`.
pub fn adjacency_from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Vec<Vec<usize>>> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v) in edges {
        if u >= n || v >= n {
            return Err(Error::InvalidArgument(format!("edge ({u}, {v}) outside 0..{n}")));
        }
        adj[u].push(v);
        if u != v {
            adj[v].push(u);
        }
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    Ok(adj)
}

/// Triples checked when the space is too large for all of them.
const SAMPLED_TRIPLES: usize = 200_000;
const FULL_CHECK_POINTS: usize = 96;

/// Finite metric space with integer distances and a table of ball sizes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetricSpace {
    dist: Vec<Vec<u64>>,
    /// `R -> max_x |B(x, R)|`.
    witness: BTreeMap<u64, usize>,
}

impl MetricSpace {
    /// Validates the table: square, zero diagonal, symmetric, triangle
    /// inequality (on all triples for small spaces, a seeded sample otherwise).
    pub fn from_table(dist: Vec<Vec<u64>>) -> Result<Self> {
        let n = dist.len();
        for (x, row) in dist.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidArgument(format!("row {x} has {} entries, expected {n}", row.len())));
            }
            if row[x] != 0 {
                return Err(Error::InvalidArgument(format!("d({x}, {x}) = {}", row[x])));
            }
            if let Some(y) = (0..n).find(|&y| dist[y][x] != row[y]) {
                return Err(Error::InvalidArgument(format!("d({x}, {y}) is not symmetric")));
            }
        }
        let violated = |x: usize, y: usize, z: usize| dist[x][z] > dist[x][y].saturating_add(dist[y][z]);
        let bad = if n <= FULL_CHECK_POINTS {
            (0..n).flat_map(|x| (0..n).flat_map(move |y| (0..n).map(move |z| (x, y, z)))).find(|&(x, y, z)| violated(x, y, z))
        } else {
            let mut rng = Rng::seed_from_u64(0x6d65_7472_6963);
            (0..SAMPLED_TRIPLES)
                .map(|_| (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n)))
                .find(|&(x, y, z)| violated(x, y, z))
        };
        if let Some((x, y, z)) = bad {
            return Err(Error::InvalidArgument(format!("triangle inequality fails at ({x}, {y}, {z})")));
        }
        Ok(MetricSpace { dist, witness: BTreeMap::new() })
    }

    /// `0..n` with `d(x, y) = |x - y|`.
    pub fn path(n: usize) -> Self {
        let dist = (0..n).map(|x| (0..n).map(|y| x.abs_diff(y) as u64).collect()).collect();
        MetricSpace { dist, witness: BTreeMap::new() }
    }

    /// Path metric of a connected graph, by breadth-first search.
    pub fn from_graph(adjacency: &[Vec<usize>]) -> Result<Self> {
        let n = adjacency.len();
        let mut dist = Vec::with_capacity(n);
        for src in 0..n {
            let mut d = vec![u64::MAX; n];
            d[src] = 0;
            let mut q = VecDeque::from([src]);
            while let Some(u) = q.pop_front() {
                for &w in &adjacency[u] {
                    if w >= n {
                        return Err(Error::InvalidArgument(format!("neighbor {w} outside 0..{n}")));
                    }
                    if d[w] == u64::MAX {
                        d[w] = d[u] + 1;
                        q.push_back(w);
                    }
                }
            }
            if d.contains(&u64::MAX) {
                return Err(Error::InvalidArgument("graph is not connected".into()));
            }
            dist.push(d);
        }
        Self::from_table(dist)
    }

    /// Records the max ball size for each radius.
    pub fn with_witness(mut self, radii: &[u64]) -> Self {
        for &r in radii {
            let b = self.max_ball(r);
            self.witness.insert(r, b);
        }
        self
    }

    pub fn point_count(&self) -> usize {
        self.dist.len()
    }

    pub fn distance(&self, x: usize, y: usize) -> u64 {
        self.dist[x][y]
    }

    pub fn table(&self) -> &[Vec<u64>] {
        &self.dist
    }

    pub fn witness(&self) -> &BTreeMap<u64, usize> {
        &self.witness
    }

    pub fn ball_size(&self, x: usize, r: u64) -> usize {
        self.dist[x].iter().filter(|&&d| d <= r).count()
    }

    pub fn max_ball(&self, r: u64) -> usize {
        (0..self.point_count()).map(|x| self.ball_size(x, r)).max().unwrap_or(0)
    }
}

/// Result of [`band_operator`].
#[derive(Clone, Debug)]
pub struct BandOperator {
    pub op: SparseOp,
    pub radius: u64,
    /// Max ball size at `radius`; the profile is at most `(ball_bound, ball_bound)`.
    pub ball_bound: usize,
    /// Whether the radius was missing from the witness table.
    pub recomputed: bool,
}

impl BandOperator {
    pub fn profile_bound(&self) -> SparsityProfile {
        SparsityProfile::new(self.ball_bound, self.ball_bound)
    }
}

/// `a_xy = kernel(x, y)` when `d(x, y) <= radius`, zero otherwise.
pub fn band_operator<F>(space: &MetricSpace, kernel: F, radius: u64) -> BandOperator
where
    F: Fn(usize, usize) -> Complex64,
{
    let n = space.point_count();
    let (ball_bound, recomputed) = match space.witness().get(&radius) {
        Some(&b) => (b, false),
        None => {
            if !space.witness().is_empty() {
                log::warn!("radius {radius} not in the ball-size table, recomputing");
            }
            (space.max_ball(radius), true)
        }
    };
    let kernel = &kernel;
    let triplets = (0..n).flat_map(|x| {
        (0..n).filter(move |&y| space.distance(x, y) <= radius).map(move |y| (x, y, kernel(x, y)))
    });
    let op = SparseOp::from_triplets(n, triplets).expect("points inside window");
    BandOperator { op, radius, ball_bound, recomputed }
}

/// Number of stored entries `(x, y)` of `a` with `d(x, y) > radius`.
pub fn band_violations(a: &SparseOp, space: &MetricSpace, radius: u64) -> usize {
    a.iter().filter(|&(x, y, _)| space.distance(x, y) > radius).count()
}
