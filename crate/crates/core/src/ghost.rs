//! Tail diagnostics for the ideal of operators whose entries vanish at
//! infinity, and the extraction of an invertible compression from operators
//! that stay away from it.
//!
//! Indices in [`TailProfile`] are 1-based (`s(1)` is the max entry modulus);
//! everything else is 0-based.

use crate::dense;
use crate::{Complex64, Error, Result, SparseOp};
use nalgebra::DMatrix;
use serde::Serialize;
use std::collections::BTreeSet;

/// `s(t) = sup_{i,j >= t} |a_ij|` for `t = 1..=N`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailProfile {
    pub values: Vec<f64>,
}

impl TailProfile {
    /// `s(t)`, 1-based; zero past the window.
    pub fn at(&self, t: usize) -> f64 {
        assert!(t >= 1, "tail profile is indexed from 1");
        self.values.get(t - 1).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the profile decreases by at least `factor` over the second
    /// half of the window. A window-level hint only.
    pub fn decays(&self, factor: f64) -> bool {
        let n = self.len();
        n >= 2 && self.at(n) <= factor * self.at(n / 2 + 1)
    }
}

pub fn tail_profile(a: &SparseOp) -> TailProfile {
    let n = a.window();
    let mut values = vec![0.0_f64; n];
    for (i, j, z) in a.iter() {
        let t = i.min(j);
        values[t] = values[t].max(z.norm());
    }
    for t in (0..n.saturating_sub(1)).rev() {
        values[t] = values[t].max(values[t + 1]);
    }
    TailProfile { values }
}

/// Outcome of [`ideal_product_bound`].
#[derive(Clone, Debug, Serialize)]
pub struct ProductBound {
    pub bound: f64,
    pub epsilon: f64,
    pub k: usize,
    pub b_norm: f64,
    /// Largest column (1-based) used by the first `n_split` rows of `b`.
    pub column_cut: usize,
    /// Largest `|c_il|` over `i > n_split`, `l > column_cut`.
    pub far_max: f64,
    pub far_entries: usize,
    pub holds: bool,
}

/// `eps * k * ||b||` with `eps = s_a(n_split)`, together with an exact check
/// of the far corner of `c = ab`. Both cut points are 1-based.
pub fn ideal_product_bound(a: &SparseOp, b: &SparseOp, n_split: usize) -> Result<ProductBound> {
    if a.window() != b.window() {
        return Err(Error::WindowMismatch { left: a.window(), right: b.window() });
    }
    if n_split == 0 {
        return Err(Error::InvalidArgument("n_split is 1-based".into()));
    }
    let epsilon = tail_profile(a).at(n_split);
    let k = b.profile().k();
    let b_norm = b.operator_norm(1e-10)?;
    let bound = epsilon * k as f64 * b_norm;
    let column_cut = (0..n_split.min(b.window()))
        .filter_map(|j| b.row(j).last().map(|&(l, _)| l + 1))
        .max()
        .unwrap_or(0);
    let c = a.mul(b)?;
    let (mut far_max, mut far_entries) = (0.0_f64, 0);
    for (i, l, z) in c.iter() {
        if i + 1 > n_split && l + 1 > column_cut {
            far_max = far_max.max(z.norm());
            far_entries += 1;
        }
    }
    Ok(ProductBound { bound, epsilon, k, b_norm, column_cut, far_max, far_entries, holds: far_max <= bound + 1e-12 })
}

/// Sup of absolute row sums and of absolute column sums.
pub fn l1_bound(a: &SparseOp) -> (f64, f64) {
    let sup = |lines: &mut dyn Iterator<Item = &[(usize, Complex64)]>| {
        lines.map(|l| l.iter().map(|e| e.1.norm()).sum::<f64>()).fold(0.0, f64::max)
    };
    let n = a.window();
    (sup(&mut (0..n).map(|i| a.row(i))), sup(&mut (0..n).map(|j| a.col(j))))
}

/// Keeps `(i, j)` when it is among the `k` largest-modulus entries of row
/// `i` and `(j, i)` is among those of row `j` (ties go to the lower column).
/// Self-adjoint input gives self-adjoint output with profile at most `(k, k)`.
pub fn sparse_approximant(a: &SparseOp, k: usize) -> SparseOp {
    let n = a.window();
    let top: Vec<BTreeSet<usize>> = (0..n)
        .map(|i| {
            let mut row: Vec<(usize, f64)> = a.row(i).iter().map(|&(j, z)| (j, z.norm())).collect();
            row.sort_by(|x, y| y.1.total_cmp(&x.1).then(x.0.cmp(&y.0)));
            row.into_iter().take(k).map(|e| e.0).collect()
        })
        .collect();
    SparseOp::from_triplets(n, a.iter().filter(|&(i, j, _)| top[i].contains(&j) && top[j].contains(&i)))
        .expect("entries inside window")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CaseTag {
    Diagonal,
    Offdiagonal,
}

/// Certificate that `u^* p_L a u` is invertible with smallest singular value
/// above `delta / 2`.
#[derive(Clone, Debug)]
pub struct ExtractionCertificate {
    pub case: CaseTag,
    /// `u e_m = e_{indices[m]}`.
    pub indices: Vec<usize>,
    /// Selected pairs in the off-diagonal case.
    pub pairs: Vec<(usize, usize)>,
    pub delta: f64,
    pub k: usize,
    pub approx_error: f64,
    pub sigma_min: f64,
    pub u: SparseOp,
}

fn check_self_adjoint(a: &SparseOp) -> Result<()> {
    let d = a.max_entry_diff(&a.adjoint())?;
    if d > 1e-10 {
        return Err(Error::ContractViolation(format!("input is not self-adjoint (defect {d:e})")));
    }
    Ok(())
}

fn approximant_within(a: &SparseOp, k: usize, budget: f64) -> Result<(SparseOp, f64)> {
    let ak = sparse_approximant(a, k);
    let error = dense::norm(&a.sub(&ak)?);
    if error >= budget {
        return Err(Error::ApproximationBudget { error, budget });
    }
    Ok((ak, error))
}

/// Packing isometry `e_m -> e_{indices[m]}` on the window.
pub fn packing_isometry(window: usize, indices: &[usize]) -> Result<SparseOp> {
    SparseOp::from_triplets(window, indices.iter().enumerate().map(|(m, &i)| (i, m, Complex64::new(1.0, 0.0))))
}

/// Dense `u^* a u` restricted to the selected coordinates.
pub fn compressed(a: &SparseOp, indices: &[usize]) -> DMatrix<Complex64> {
    DMatrix::from_fn(indices.len(), indices.len(), |p, q| a.get(indices[p], indices[q]))
}

fn smallest_singular_value(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

fn certify(
    a: &SparseOp,
    case: CaseTag,
    indices: Vec<usize>,
    pairs: Vec<(usize, usize)>,
    delta: f64,
    k: usize,
    approx_error: f64,
) -> Result<ExtractionCertificate> {
    let sigma_min = smallest_singular_value(&compressed(a, &indices));
    if sigma_min <= delta / 2.0 {
        return Err(Error::ContractViolation(format!(
            "compressed operator has sigma_min {sigma_min:e}, need more than {:e}",
            delta / 2.0
        )));
    }
    let u = packing_isometry(a.window(), &indices)?;
    Ok(ExtractionCertificate { case, indices, pairs, delta, k, approx_error, sigma_min, u })
}

fn validate(a: &SparseOp, delta: f64, k: usize) -> Result<()> {
    if !(delta > 0.0) || k == 0 {
        return Err(Error::InvalidArgument("delta and k must be positive".into()));
    }
    check_self_adjoint(a)
}

/// First index scanned by default: the second half of the window.
pub fn default_scan_start(window: usize) -> usize {
    window / 2
}

pub fn extract_diagonal_case(a: &SparseOp, delta: f64, k: usize) -> Result<ExtractionCertificate> {
    extract_diagonal_case_from(a, delta, k, default_scan_start(a.window()))
}

/// Diagonal case, scanning indices `>= start`.
pub fn extract_diagonal_case_from(a: &SparseOp, delta: f64, k: usize, start: usize) -> Result<ExtractionCertificate> {
    validate(a, delta, k)?;
    let n = a.window();
    let threshold = 0.75 * delta;
    let hits = (start..n).filter(|&i| a.get(i, i).norm() > threshold).count();
    if hits < 2 {
        return Err(Error::InsufficientData(format!(
            "{hits} diagonal entries above {threshold} in indices {start}..{n}"
        )));
    }
    let (ak, approx_error) = approximant_within(a, k, delta / 4.0)?;
    let mut used = BTreeSet::new();
    let mut indices = Vec::new();
    for i in start..n {
        if ak.get(i, i).norm() <= threshold || used.contains(&i) {
            continue;
        }
        let support = ak.row(i);
        if support.iter().any(|(j, _)| used.contains(j)) {
            continue;
        }
        used.extend(support.iter().map(|e| e.0));
        used.insert(i);
        indices.push(i);
    }
    if indices.len() < 2 {
        return Err(Error::InsufficientData(format!("only {} disjoint diagonal indices", indices.len())));
    }
    certify(a, CaseTag::Diagonal, indices, Vec::new(), delta, k, approx_error)
}

pub fn extract_offdiagonal_case(a: &SparseOp, delta: f64, k: usize) -> Result<ExtractionCertificate> {
    extract_offdiagonal_case_from(a, delta, k, default_scan_start(a.window()))
}

/// Off-diagonal case, scanning pairs with both indices `>= start`.
pub fn extract_offdiagonal_case_from(
    a: &SparseOp,
    delta: f64,
    k: usize,
    start: usize,
) -> Result<ExtractionCertificate> {
    validate(a, delta, k)?;
    let n = a.window();
    let threshold = 5.0 * delta / 6.0;
    let hits = a.iter().filter(|&(i, j, z)| i >= start && j > i && z.norm() > threshold).count();
    if hits < 2 {
        return Err(Error::InsufficientData(format!(
            "{hits} off-diagonal entries above {threshold} in indices {start}..{n}"
        )));
    }
    let (ak, approx_error) = approximant_within(a, k, delta / 6.0)?;
    // first index from which every diagonal entry stays below delta/6
    let n0 = (0..n).rev().take_while(|&i| ak.get(i, i).norm() < delta / 6.0).last().unwrap_or(n);
    let from = start.max(n0);
    let mut used = BTreeSet::new();
    let mut pairs = Vec::new();
    for i in from..n {
        for &(j, z) in ak.row(i) {
            if j <= i || z.norm() <= threshold || used.contains(&i) || used.contains(&j) {
                continue;
            }
            let (ri, rj) = (ak.row(i), ak.row(j));
            if ri.iter().chain(rj).any(|(l, _)| used.contains(l)) {
                continue;
            }
            let block = DMatrix::from_row_slice(2, 2, &[ak.get(i, i), z, ak.get(j, i), ak.get(j, j)]);
            if smallest_singular_value(&block) <= 2.0 * delta / 3.0 {
                continue;
            }
            used.extend(ri.iter().chain(rj).map(|e| e.0));
            used.insert(i);
            used.insert(j);
            pairs.push((i, j));
        }
    }
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(format!("only {} disjoint off-diagonal pairs", pairs.len())));
    }
    let indices = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    certify(a, CaseTag::Offdiagonal, indices, pairs, delta, k, approx_error)
}

/// Diagonal case first, then the off-diagonal case.
pub fn extract(a: &SparseOp, delta: f64, k: usize) -> Result<ExtractionCertificate> {
    match extract_diagonal_case(a, delta, k) {
        Err(Error::InsufficientData(_)) => extract_offdiagonal_case(a, delta, k),
        other => other,
    }
}
