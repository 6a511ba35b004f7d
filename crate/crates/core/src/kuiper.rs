//! Certified paths from an invertible matrix-finite operator to the identity.
//!
//! The path has four parts:
//!
//! 1. pick basis vectors `a_i`, `a'_i` whose planes do not interact;
//! 2. rotate `g a_i` onto `a'_i` and then onto `a_i`, so that afterwards
//!    `f a_i = |g a_i| a_i`;
//! 3. scale those columns to 1 and cut the rows of `H' = span{a_i}` down
//!    to the identity, leaving `p' + p_1 f p_1`;
//! 4. close the remaining block on `H_1` through its polar decomposition.
//!
//! Every recorded step carries its extreme singular values, its profile and
//! the relative jump from the previous step. These are measured by dense SVD,
//! except on the closing stage, where they follow from the polar
//! decomposition in closed form and the jump is an upper bound.

use crate::dense;
use crate::rng::Rng;
use crate::{c64, Complex64, Error, Result, SparseOp, SparsityProfile};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::Serialize;
use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Select,
    Rotate1,
    Rotate2,
    Compress,
    Whitehead,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Select => "select",
            Stage::Rotate1 => "rotate1",
            Stage::Rotate2 => "rotate2",
            Stage::Compress => "compress",
            Stage::Whitehead => "whitehead",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepCertificate {
    pub stage: Stage,
    /// Parameter inside the stage, in `[0, 1]`.
    pub t: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub profile: SparsityProfile,
    /// `||f_i - f_{i-1}|| / ||f_{i-1}||`, or an upper bound for it; zero for
    /// the first step.
    pub jump: f64,
}

#[derive(Clone, Debug, Default)]
pub struct HomotopyPath {
    pub steps: Vec<SparseOp>,
    pub certificates: Vec<StepCertificate>,
}

impl HomotopyPath {
    fn start(g: &SparseOp) -> Self {
        let (sigma_max, sigma_min) = dense::extreme_singular_values(g);
        HomotopyPath {
            steps: vec![g.clone()],
            certificates: vec![StepCertificate {
                stage: Stage::Select,
                t: 0.0,
                sigma_min,
                sigma_max,
                profile: g.profile(),
                jump: 0.0,
            }],
        }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn last(&self) -> &SparseOp {
        self.steps.last().expect("paths start with their input")
    }

    pub fn min_sigma(&self) -> f64 {
        self.certificates.iter().map(|c| c.sigma_min).fold(f64::INFINITY, f64::min)
    }

    pub fn max_jump(&self) -> f64 {
        self.certificates.iter().map(|c| c.jump).fold(0.0, f64::max)
    }

    pub fn max_profile(&self) -> usize {
        self.certificates.iter().map(|c| c.profile.k()).max().unwrap_or(0)
    }

    /// `||last - I||` by dense SVD.
    pub fn endpoint_error(&self) -> f64 {
        let last = self.last();
        dense::norm(&last.sub(&SparseOp::identity(last.window())).expect("same window"))
    }

    /// `(stage, first step, one past the last step)` for each stage present.
    pub fn stage_spans(&self) -> Vec<(Stage, usize, usize)> {
        let mut spans: Vec<(Stage, usize, usize)> = Vec::new();
        for (i, c) in self.certificates.iter().enumerate() {
            match spans.last_mut() {
                Some(s) if s.0 == c.stage => s.2 = i + 1,
                _ => spans.push((c.stage, i, i + 1)),
            }
        }
        spans
    }
}

/// Basis vectors for the rotation stage: `u e_i = e_{a[i]}`, partner `a'[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Selection {
    pub a: Vec<usize>,
    pub a_prime: Vec<usize>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// Checks the orthogonality conditions on basis vectors: `a'_i` is off
    /// the support of `g a_i` and differs from `a_i`, and the sets
    /// `{a_i} + supp(g a_i) + {a'_i}` are pairwise disjoint.
    pub fn verify(&self, g: &SparseOp) -> Result<()> {
        let mut seen = BTreeSet::new();
        for (&a, &ap) in self.a.iter().zip(&self.a_prime) {
            let col: Vec<usize> = g.col(a).iter().map(|e| e.0).collect();
            if a == ap || col.contains(&ap) {
                return Err(Error::ContractViolation(format!("a' = {ap} is not orthogonal to a = {a} or g a")));
            }
            let mut set: BTreeSet<usize> = col.into_iter().collect();
            set.insert(a);
            set.insert(ap);
            if set.iter().any(|x| seen.contains(x)) {
                return Err(Error::ContractViolation(format!("plane of a = {a} meets an earlier plane")));
            }
            seen.extend(set);
        }
        Ok(())
    }
}

/// Greedy scan over ascending basis vectors. `count = None` takes as many as
/// fit in the window.
pub fn select_basis_vectors(g: &SparseOp, count: Option<usize>) -> Result<Selection> {
    let n = g.window();
    let mut used = vec![false; n];
    let mut sel = Selection { a: Vec::new(), a_prime: Vec::new() };
    for m in 0..n {
        if count.is_some_and(|c| sel.len() >= c) {
            break;
        }
        let col = g.col(m);
        if used[m] || col.iter().any(|&(j, _)| used[j]) {
            continue;
        }
        let Some(ap) = (0..n).find(|&j| !used[j] && j != m && col.binary_search_by_key(&j, |e| e.0).is_err()) else {
            continue;
        };
        used[m] = true;
        used[ap] = true;
        col.iter().for_each(|&(j, _)| used[j] = true);
        sel.a.push(m);
        sel.a_prime.push(ap);
    }
    if let Some(c) = count {
        if sel.len() < c {
            return Err(Error::WindowTooSmall { window: n, needed: c });
        }
    }
    Ok(sel)
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractConfig {
    /// Steps per stage before refinement.
    pub steps: usize,
    pub max_jump: f64,
    /// Times the step count may be doubled.
    pub refinements: usize,
    pub min_sigma: f64,
    /// Number of `a_i`; `None` selects as many as fit.
    pub count: Option<usize>,
}

impl Default for ContractConfig {
    fn default() -> Self {
        ContractConfig { steps: 64, max_jump: 0.1, refinements: 3, min_sigma: 1e-8, count: None }
    }
}

impl ContractConfig {
    /// Smallest window on which one plane fits for profile `k`.
    pub fn min_window(k: usize) -> usize {
        k + 2
    }
}

/// Profile bound for the rotation and compression stages.
pub fn rotation_budget(k: usize) -> usize {
    2 * k * (k + 1)
}

/// Bound on the profile along a contraction of a profile-`k` operator whose
/// closing block has dimension `h1_dim`.
pub fn profile_budget(k: usize, h1_dim: usize) -> usize {
    rotation_budget(k).max(h1_dim)
}

#[derive(Clone, Debug)]
pub struct Contraction {
    pub path: HomotopyPath,
    pub selection: Selection,
    pub h1_dim: usize,
    pub k: usize,
    /// `profile_budget(k, h1_dim)`.
    pub budget: usize,
}

/// `(cos, sin)` of `t pi / 2`, exact at both ends.
fn quarter_turn(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (1.0, 0.0)
    } else if t >= 1.0 {
        (0.0, 1.0)
    } else {
        let th = t * FRAC_PI_2;
        (th.cos(), th.sin())
    }
}

type SparseVec = Vec<(usize, Complex64)>;

/// Orthonormal pair `(x, y)` spanning a rotation plane.
#[derive(Clone, Debug)]
struct Plane {
    x: SparseVec,
    y: SparseVec,
}

/// `I + sum over planes of (c - 1)(xx* + yy*) + s(yx* - xy*)`, which turns
/// `x` towards `y` by the angle `t pi / 2`.
fn rotation(n: usize, planes: &[Plane], t: f64) -> SparseOp {
    let (c, s) = quarter_turn(t);
    let mut trip: Vec<(usize, usize, Complex64)> = (0..n).map(|i| (i, i, c64(1.0))).collect();
    let outer = |trip: &mut Vec<_>, u: &SparseVec, v: &SparseVec, w: f64| {
        for &(p, up) in u {
            for &(q, vq) in v {
                trip.push((p, q, up * vq.conj() * w));
            }
        }
    };
    for pl in planes {
        outer(&mut trip, &pl.x, &pl.x, c - 1.0);
        outer(&mut trip, &pl.y, &pl.y, c - 1.0);
        outer(&mut trip, &pl.y, &pl.x, s);
        outer(&mut trip, &pl.x, &pl.y, -s);
    }
    SparseOp::from_triplets(n, trip).expect("plane indices inside window")
}

fn unit(i: usize) -> SparseVec {
    vec![(i, c64(1.0))]
}

/// Whether column `a` of `g` is a positive multiple of `e_a`.
fn fixed_column(g: &SparseOp, a: usize) -> bool {
    matches!(g.col(a), [(i, z)] if *i == a && z.im == 0.0 && z.re > 0.0)
}

/// Drops rounding residue well below the scale of `f`.
fn clean(f: SparseOp, scale: f64) -> SparseOp {
    f.prune(1e-13 * scale)
}

struct Segments<'a> {
    cfg: &'a ContractConfig,
    path: HomotopyPath,
}

/// Singular value bounds and step size for a stage known in closed form.
struct Analytic<'a> {
    /// `(sigma_max, sigma_min)` at `t`.
    sigma: &'a dyn Fn(f64) -> (f64, f64),
    /// Upper bound on `||f(t) - f(s)||`.
    step: &'a dyn Fn(f64, f64) -> f64,
}

impl Segments<'_> {
    /// Appends `f(t)` for `t` in `(0, 1]` on a grid refined until every jump
    /// is within `max_jump` and every step keeps `sigma_min > min_sigma`.
    /// Singular values and jumps are measured by dense SVD.
    fn run<F: Fn(f64) -> SparseOp>(&mut self, stage: Stage, f: F) -> Result<()> {
        self.run_with(stage, f, None)
    }

    /// As [`Segments::run`], but with certificates from `analytic` when given.
    /// A step is then checked before its operator is built.
    fn run_with<F: Fn(f64) -> SparseOp>(&mut self, stage: Stage, f: F, analytic: Option<Analytic>) -> Result<()> {
        let start = self.path.last().clone();
        if f(1.0) == start {
            return Ok(());
        }
        let mut steps = self.cfg.steps.max(1);
        for attempt in 0..=self.cfg.refinements {
            let mut prev = start.clone();
            let mut prev_max = self.path.certificates.last().expect("nonempty").sigma_max;
            let mut ops = Vec::with_capacity(steps);
            let mut certs = Vec::with_capacity(steps);
            let mut failure = None;
            for i in 1..=steps {
                let t = i as f64 / steps as f64;
                let (op, sigma_max, sigma_min, jump) = match &analytic {
                    Some(a) => {
                        let (sigma_max, sigma_min) = (a.sigma)(t);
                        let jump = (a.step)((i - 1) as f64 / steps as f64, t) / prev_max;
                        if jump > self.cfg.max_jump || sigma_min <= self.cfg.min_sigma {
                            failure = Some((jump, sigma_min));
                            break;
                        }
                        (f(t), sigma_max, sigma_min, jump)
                    }
                    None => {
                        let op = f(t);
                        let jump = dense::norm(&op.sub(&prev)?) / prev_max;
                        let (sigma_max, sigma_min) = dense::extreme_singular_values(&op);
                        (op, sigma_max, sigma_min, jump)
                    }
                };
                if jump > self.cfg.max_jump || sigma_min <= self.cfg.min_sigma {
                    failure = Some((jump, sigma_min));
                    break;
                }
                certs.push(StepCertificate { stage, t, sigma_min, sigma_max, profile: op.profile(), jump });
                prev = op.clone();
                prev_max = sigma_max;
                ops.push(op);
            }
            match failure {
                None => {
                    self.path.steps.extend(ops);
                    self.path.certificates.extend(certs);
                    return Ok(());
                }
                Some((jump, sigma_min)) if attempt == self.cfg.refinements => {
                    return Err(if sigma_min <= self.cfg.min_sigma {
                        Error::Singular { stage: stage.to_string(), sigma_min }
                    } else {
                        Error::ContractViolation(format!("stage {stage}: jump {jump:e} after {steps} steps"))
                    });
                }
                Some(_) => {
                    log::debug!("stage {stage}: refining {steps} -> {}", 2 * steps);
                    steps *= 2;
                }
            }
        }
        unreachable!("loop returns on the last attempt")
    }
}

/// Both rotation stages. Returns the end operator, in which column `a_i` is
/// `|g a_i| e_{a_i}`.
pub fn rotation_stage(g: &SparseOp, selection: &Selection, cfg: &ContractConfig) -> Result<HomotopyPath> {
    let mut seg = Segments { cfg, path: HomotopyPath::start(g) };
    rotations(&mut seg, selection)?;
    Ok(seg.path)
}

fn rotations(seg: &mut Segments, selection: &Selection) -> Result<()> {
    let g = seg.path.last().clone();
    let n = g.window();
    let scale = g.max_modulus();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for (&a, &ap) in selection.a.iter().zip(&selection.a_prime) {
        if fixed_column(&g, a) {
            continue;
        }
        let col = g.col(a);
        let norm = col.iter().map(|e| e.1.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Singular { stage: "select".into(), sigma_min: 0.0 });
        }
        first.push(Plane { x: col.iter().map(|&(i, z)| (i, z / norm)).collect(), y: unit(ap) });
        second.push(Plane { x: unit(ap), y: unit(a) });
    }
    seg.run(Stage::Rotate1, |t| clean(rotation(n, &first, t).mul(&g).expect("same window"), scale))?;
    let f1 = seg.path.last().clone();
    seg.run(Stage::Rotate2, |t| clean(rotation(n, &second, t).mul(&f1).expect("same window"), scale))?;
    Ok(())
}

/// Scales the `a_i` columns to 1, then removes the `H'` rows outside `H'`.
/// Ends at `p' + p_1 f p_1`.
pub fn normalize_and_compress(f2: &SparseOp, selection: &Selection, cfg: &ContractConfig) -> Result<HomotopyPath> {
    let mut seg = Segments { cfg, path: HomotopyPath::start(f2) };
    compress(&mut seg, selection)?;
    Ok(seg.path)
}

fn compress(seg: &mut Segments, selection: &Selection) -> Result<()> {
    let f2 = seg.path.last().clone();
    let n = f2.window();
    let mut in_h = vec![false; n];
    let mut scale = vec![None; n];
    for &a in &selection.a {
        in_h[a] = true;
        match f2.col(a) {
            [(i, z)] if *i == a => scale[a] = Some(*z),
            _ => return Err(Error::ContractViolation(format!("column {a} is not a multiple of e_{a}"))),
        }
    }
    seg.run(Stage::Compress, |t| {
        let trip = f2.iter().map(|(i, j, z)| match scale[j] {
            Some(c) => (i, j, c * (1.0 - t) + c64(t)),
            None => (i, j, z),
        });
        SparseOp::from_triplets(n, trip).expect("inside window")
    })?;
    let f3 = seg.path.last().clone();
    seg.run(Stage::Compress, |t| {
        let trip = f3.iter().map(|(i, j, z)| if in_h[i] && !in_h[j] { (i, j, z * (1.0 - t)) } else { (i, j, z) });
        SparseOp::from_triplets(n, trip).expect("inside window")
    })?;
    Ok(())
}

/// `Q(t) P(t)` with `P(t) = (1-t) P + t`, `Q(t) = Z diag(lambda_j^(1-t)) Z*`,
/// from the polar decomposition `d = Q P` and a Schur basis `Z` of `Q`.
///
/// Since `Q(t)` is unitary, the singular values of `Q(t) P(t)` are
/// `(1-t) sigma_j + t` with `sigma_j` those of `d`.
struct PolarPath {
    z: DMatrix<Complex64>,
    /// `Z* P` and `Z*`, so that `Q(t) P(t) = Z diag(..) ((1-t) Z* P + t Z*)`.
    zp: DMatrix<Complex64>,
    zh: DMatrix<Complex64>,
    angles: Vec<f64>,
    sigma: Vec<f64>,
}

impl PolarPath {
    fn new(d: DMatrix<Complex64>) -> Self {
        let svd = d.svd(true, true);
        let (w, vt) = (svd.u.expect("requested"), svd.v_t.expect("requested"));
        let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
        let q = &w * &vt;
        let p = vt.adjoint() * DMatrix::from_diagonal(&svd.singular_values.map(c64)) * &vt;
        let (z, tri) = q.schur().unpack();
        let angles = tri.diagonal().iter().map(|l| l.arg()).collect();
        let zh = z.adjoint();
        let zp = &zh * p;
        PolarPath { z, zp, zh, angles, sigma }
    }

    fn at(&self, t: f64) -> DMatrix<Complex64> {
        let mut zq = self.z.clone();
        for (j, mut col) in zq.column_iter_mut().enumerate() {
            col *= Complex64::from_polar(1.0, (1.0 - t) * self.angles[j]);
        }
        zq * (&self.zp * c64(1.0 - t) + &self.zh * c64(t))
    }

    /// `(sigma_max, sigma_min)` at `t`.
    fn sigma(&self, t: f64) -> (f64, f64) {
        let s = |x: f64| (1.0 - t) * x + t;
        let hi = self.sigma.iter().map(|&x| s(x)).fold(0.0, f64::max);
        let lo = self.sigma.iter().map(|&x| s(x)).fold(f64::INFINITY, f64::min);
        (hi, lo)
    }

    /// `||Q(t) - Q(s)|| ||P(t)|| + ||P(t) - P(s)||`, a bound on the step norm.
    fn step_bound(&self, s: f64, t: f64) -> f64 {
        let dq = self.angles.iter().map(|&th| 2.0 * ((t - s) * th / 2.0).sin().abs()).fold(0.0, f64::max);
        let dp = (t - s).abs() * self.sigma.iter().map(|&x| (x - 1.0).abs()).fold(0.0, f64::max);
        dq * self.sigma(t).0 + dp
    }
}

/// Closes `f4 = p' + d` (with `d` living on the complement `h1` of `H'`)
/// through the polar decomposition of `d`.
fn close(seg: &mut Segments, h1: &[usize]) -> Result<()> {
    let f4 = seg.path.last().clone();
    let n = f4.window();
    let mut pos = vec![usize::MAX; n];
    for (p, &i) in h1.iter().enumerate() {
        pos[i] = p;
    }
    let m = h1.len();
    let mut d = DMatrix::zeros(m, m);
    let mut head = Vec::new();
    for (i, j, z) in f4.iter() {
        match (pos[i], pos[j]) {
            (usize::MAX, usize::MAX) => head.push((i, j, z)),
            (p, q) if p != usize::MAX && q != usize::MAX => d[(p, q)] = z,
            _ => return Err(Error::ContractViolation(format!("entry ({i}, {j}) couples H' with H_1"))),
        }
    }
    let identity = SparseOp::identity(n);
    let polar = PolarPath::new(d);
    // the head is fixed along the stage and splits off as a direct summand
    let rest: Vec<usize> = (0..n).filter(|&i| pos[i] == usize::MAX).collect();
    let (head_max, head_min) = if rest.is_empty() {
        (0.0, f64::INFINITY)
    } else {
        let mut at = vec![0; n];
        rest.iter().enumerate().for_each(|(p, &i)| at[i] = p);
        let mut h = DMatrix::zeros(rest.len(), rest.len());
        head.iter().for_each(|&(i, j, z)| h[(at[i], at[j])] = z);
        let sv = h.singular_values();
        (sv.max(), sv.min())
    };
    let sigma = |t: f64| {
        let (hi, lo) = polar.sigma(t);
        (hi.max(head_max), lo.min(head_min))
    };
    let step = |s: f64, t: f64| polar.step_bound(s, t);
    let analytic = Analytic { sigma: &sigma, step: &step };
    seg.run_with(
        Stage::Whitehead,
        |t| {
            if t >= 1.0 {
                return identity.clone();
            }
            let dt = polar.at(t);
            let block = (0..m).flat_map(|p| (0..m).map(move |q| (p, q))).map(|(p, q)| (h1[p], h1[q], dt[(p, q)]));
            SparseOp::from_triplets(n, head.iter().copied().chain(block)).expect("inside window")
        },
        Some(analytic),
    )
}

/// The full contraction of `g` to the identity.
pub fn contract(g: &SparseOp, cfg: &ContractConfig) -> Result<Contraction> {
    let n = g.window();
    let k = g.profile().k();
    if n < ContractConfig::min_window(k) {
        return Err(Error::WindowTooSmall { window: n, needed: ContractConfig::min_window(k) });
    }
    let (_, sigma_min) = dense::extreme_singular_values(g);
    if sigma_min <= 1e-6 {
        return Err(Error::Singular { stage: "select".into(), sigma_min });
    }
    let selection = select_basis_vectors(g, cfg.count)?;
    selection.verify(g)?;
    let mut seg = Segments { cfg, path: HomotopyPath::start(g) };
    rotations(&mut seg, &selection)?;
    compress(&mut seg, &selection)?;
    let in_h: BTreeSet<usize> = selection.a.iter().copied().collect();
    let h1: Vec<usize> = (0..n).filter(|i| !in_h.contains(i)).collect();
    close(&mut seg, &h1)?;
    let h1_dim = h1.len();
    Ok(Contraction { path: seg.path, selection, h1_dim, k, budget: profile_budget(k, h1_dim) })
}

/// Dense inverse of `u` with the check `||u u^-1 - I|| <= 1e-8`, pruned at
/// `1e-12` relative to its largest entry.
pub fn sparse_inverse(u: &SparseOp) -> Result<SparseOp> {
    let m = u.window();
    let d = dense::to_dense(u);
    let inv = d.clone().try_inverse().ok_or(Error::Singular { stage: "whitehead".into(), sigma_min: 0.0 })?;
    let defect = dense::dense_norm(&(&d * &inv - DMatrix::identity(m, m)));
    if defect > 1e-8 {
        return Err(Error::ContractViolation(format!("inverse defect {defect:e}")));
    }
    let scale = inv.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(dense::from_dense(&inv, 1e-12 * scale))
}

/// `diag(u, v)` on the doubled window, `u` on `0..m` and `v` on `m..2m`.
pub fn direct_sum(u: &SparseOp, v: &SparseOp) -> Result<SparseOp> {
    if u.window() != v.window() {
        return Err(Error::WindowMismatch { left: u.window(), right: v.window() });
    }
    let m = u.window();
    SparseOp::from_triplets(2 * m, u.iter().chain(v.iter().map(|(i, j, z)| (i + m, j + m, z))))
}

/// `W(t)` with `W(1) = diag(u, u^-1)` and `W(0) = I`:
///
/// ```text
/// [ c^2 + s^2 u     cs (1 - u)        ]
/// [ cs (u^-1 - 1)   s^2 u^-1 + c^2    ]
/// ```
///
/// where `(c, s)` is the cosine and sine of `t pi / 2`. This is
/// `diag(u, 1) R diag(u^-1, 1) R^-1` for the rotation `R` by that angle.
pub fn whitehead_rotation(u: &SparseOp, u_inv: &SparseOp, t: f64) -> Result<SparseOp> {
    let m = u.window();
    let (c, s) = quarter_turn(t);
    let id = SparseOp::identity(m);
    let top_left = id.axpby(c64(c * c), u, c64(s * s))?;
    let top_right = id.sub(u)?.scale(c64(c * s));
    let bottom_left = u_inv.sub(&id)?.scale(c64(c * s));
    let bottom_right = id.axpby(c64(c * c), u_inv, c64(s * s))?;
    let trip = top_left
        .iter()
        .chain(top_right.iter().map(|(i, j, z)| (i, j + m, z)))
        .chain(bottom_left.iter().map(|(i, j, z)| (i + m, j, z)))
        .chain(bottom_right.iter().map(|(i, j, z)| (i + m, j + m, z)));
    SparseOp::from_triplets(2 * m, trip)
}

/// Certified path from `diag(u, u^-1)` to the identity on the doubled window.
pub fn whitehead_stage(u: &SparseOp, cfg: &ContractConfig) -> Result<HomotopyPath> {
    let u_inv = sparse_inverse(u)?;
    let start = direct_sum(u, &u_inv)?;
    let mut seg = Segments { cfg, path: HomotopyPath::start(&start) };
    seg.run(Stage::Whitehead, |t| whitehead_rotation(u, &u_inv, 1.0 - t).expect("same window"))?;
    Ok(seg.path)
}

/// `D + P_1 + ... + P_{k-1}`: a random diagonal with moduli in `[1, 2]` plus
/// `k - 1` random permutation matrices with coefficients of modulus at most
/// `0.4`. The profile is at most `(k, k)` and `sigma_min >= 1 - 0.4 (k - 1)`.
pub fn random_gl(window: usize, k: usize, complex: bool, rng: &mut Rng) -> SparseOp {
    let scalar = |rng: &mut Rng, lo: f64, hi: f64| {
        let r = rng.gen_range(lo..hi);
        if complex {
            Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
        } else if rng.gen_bool(0.5) {
            c64(r)
        } else {
            c64(-r)
        }
    };
    let mut trip: Vec<(usize, usize, Complex64)> = (0..window).map(|i| (i, i, scalar(rng, 1.0, 2.0))).collect();
    for _ in 1..k {
        let mut perm: Vec<usize> = (0..window).collect();
        perm.shuffle(rng);
        for (j, &i) in perm.iter().enumerate() {
            trip.push((i, j, scalar(rng, 0.0, 0.4)));
        }
    }
    SparseOp::from_triplets(window, trip).expect("inside window")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn quick() -> ContractConfig {
        ContractConfig { steps: 16, ..ContractConfig::default() }
    }

    #[test]
    fn identity_selection_pairs_neighbours() {
        let sel = select_basis_vectors(&SparseOp::identity(10), Some(3)).unwrap();
        assert_eq!(sel.a, vec![0, 2, 4]);
        assert_eq!(sel.a_prime, vec![1, 3, 5]);
        assert!(select_basis_vectors(&SparseOp::identity(4), Some(3)).is_err());
        let all = select_basis_vectors(&SparseOp::identity(10), None).unwrap();
        assert_eq!(all.len(), 5);
    }

    #[test]
    fn random_selection_verifies() {
        let mut rng = Rng::seed_from_u64(3);
        let g = random_gl(512, 3, false, &mut rng);
        let sel = select_basis_vectors(&g, Some(8)).unwrap();
        sel.verify(&g).unwrap();
        let full = select_basis_vectors(&g, None).unwrap();
        full.verify(&g).unwrap();
        assert!(full.len() >= 8);
    }

    #[test]
    fn identity_contracts_trivially() {
        let c = contract(&SparseOp::identity(8), &quick()).unwrap();
        assert_eq!(c.path.len(), 1);
        assert_eq!(c.path.endpoint_error(), 0.0);
    }

    #[test]
    fn diagonal_contracts() {
        let mut d = vec![c64(1.0); 12];
        d[0] = c64(2.0);
        d[1] = c64(0.5);
        d[5] = c64(-1.0);
        let g = SparseOp::diagonal(&d);
        let c = contract(&g, &quick()).unwrap();
        assert!(c.path.min_sigma() > 0.4);
        assert!(c.path.endpoint_error() < 1e-8);
        assert!(c.path.max_jump() <= 0.1);
        assert_eq!(c.path.steps[0], g);
    }

    #[test]
    fn quarter_turn_rotation() {
        // g e_0 = e_1 exactly: the first rotation is a genuine quarter turn
        let g = SparseOp::from_triplets(6, [(1, 0, c64(1.0)), (0, 1, c64(1.0))].into_iter().chain((2..6).map(|i| (i, i, c64(1.0))))).unwrap();
        let sel = select_basis_vectors(&g, Some(1)).unwrap();
        assert_eq!((sel.a[0], sel.a_prime[0]), (0, 2));
        let path = rotation_stage(&g, &sel, &quick()).unwrap();
        let end = path.last();
        assert_eq!(end.col(0), &[(0, c64(1.0))]);
        for c in &path.certificates {
            assert!((c.sigma_min - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn normalize_of_diagonal() {
        let g = SparseOp::diagonal(&[c64(3.0), c64(2.0), c64(1.0), c64(4.0)]);
        let sel = select_basis_vectors(&g, None).unwrap();
        let path = normalize_and_compress(&g, &sel, &quick()).unwrap();
        let end = path.last();
        for &a in &sel.a {
            assert_eq!(end.get(a, a), c64(1.0));
        }
        assert!(path.certificates.windows(2).all(|w| w[1].profile.within(w[0].profile)));
    }

    #[test]
    fn random_contraction() {
        let mut rng = Rng::seed_from_u64(9);
        let g = random_gl(48, 3, true, &mut rng);
        let c = contract(&g, &quick()).unwrap();
        assert!(c.path.min_sigma() > 1e-6);
        assert!(c.path.max_jump() <= 0.1);
        assert!(c.path.endpoint_error() < 1e-8);
        assert!(c.path.max_profile() <= c.budget);
        let stages: Vec<Stage> = c.path.stage_spans().iter().map(|s| s.0).collect();
        assert_eq!(stages, vec![Stage::Select, Stage::Rotate1, Stage::Rotate2, Stage::Compress, Stage::Whitehead]);
    }

    #[test]
    fn whitehead_scalar_two() {
        let u = SparseOp::identity(3).scale(c64(2.0));
        let path = whitehead_stage(&u, &quick()).unwrap();
        assert!(path.endpoint_error() < 1e-10);
        // closed form on one coordinate pair against the dense product
        let t = 0.3;
        let (c, s) = quarter_turn(t);
        let r = nalgebra::Matrix2::new(c, -s, s, c);
        let prod = nalgebra::Matrix2::new(2.0, 0.0, 0.0, 1.0)
            * r
            * nalgebra::Matrix2::new(0.5, 0.0, 0.0, 1.0)
            * r.try_inverse().unwrap();
        let w = whitehead_rotation(&u, &sparse_inverse(&u).unwrap(), t).unwrap();
        for (p, q) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            assert!((w.get(p * 3, q * 3).re - prod[(p, q)]).abs() < 1e-14);
        }
        let bound = 2 * u.profile().k().max(1) + 2;
        assert!(path.max_profile() <= bound);
    }

    #[test]
    fn identity_whitehead_is_constant() {
        let path = whitehead_stage(&SparseOp::identity(4), &quick()).unwrap();
        assert_eq!(path.len(), 1);
    }
}
