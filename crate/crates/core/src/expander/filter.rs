use crate::{c64, Error, Result, SparseOp, SparsityProfile};
use serde::{Deserialize, Serialize};

/// Polynomial `f(x) = sum_j c_j T_j(y(x))` with `y(x) = (2x - delta - 2) / (2 - delta)`,
/// so that `[delta, 2]` maps onto `[-1, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolyFilter {
    pub degree: usize,
    pub coefficients: Vec<f64>,
    pub delta: f64,
    pub s: u32,
}

/// Largest degree tried before giving up.
const MAX_DEGREE: usize = 10_000;

fn chebyshev_t(t: usize, y: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, y);
    if t == 0 {
        return 1.0;
    }
    for _ in 1..t {
        (prev, cur) = (cur, 2.0 * y * cur - prev);
    }
    cur
}

/// Minimal-degree scaled Chebyshev polynomial with `f(0) = 1` and
/// `|f| <= 1/s` on `[delta, 2]`.
pub fn chebyshev_filter(delta: f64, s: u32) -> Result<PolyFilter> {
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::InvalidArgument(format!("gap {delta} must lie in (0, 2)")));
    }
    if s == 0 {
        return Err(Error::InvalidArgument("s must be positive".into()));
    }
    let y0 = map(delta, 0.0);
    let degree = (0..=MAX_DEGREE)
        .find(|&t| chebyshev_t(t, y0).abs() >= s as f64)
        .ok_or(Error::NoConvergence { iterations: MAX_DEGREE, last_estimate: delta })?;
    let mut coefficients = vec![0.0; degree + 1];
    coefficients[degree] = 1.0 / chebyshev_t(degree, y0);
    Ok(PolyFilter { degree, coefficients, delta, s })
}

fn map(delta: f64, x: f64) -> f64 {
    (2.0 * x - delta - 2.0) / (2.0 - delta)
}

impl PolyFilter {
    pub fn eval(&self, x: f64) -> f64 {
        let y = map(self.delta, x);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coefficients[1..].iter().rev() {
            (b1, b2) = (c + 2.0 * y * b1 - b2, b1);
        }
        self.coefficients[0] + y * b1 - b2
    }

    /// Max of `|f|` over `points` equispaced points of `[lo, hi]`.
    pub fn sup_on_grid(&self, lo: f64, hi: f64, points: usize) -> f64 {
        let step = if points > 1 { (hi - lo) / (points - 1) as f64 } else { 0.0 };
        (0..points).map(|i| self.eval(lo + step * i as f64).abs()).fold(0.0, f64::max)
    }

    /// Profile bound for `f(l)` when `l` has profile `p`.
    pub fn profile_bound(&self, p: SparsityProfile) -> f64 {
        (p.k() as f64).powi(self.degree as i32)
    }
}

/// `f(l)` by Clenshaw's recurrence carried out in sparse arithmetic.
pub fn apply_filter(f: &PolyFilter, l: &SparseOp) -> Result<SparseOp> {
    let n = l.window();
    let id = SparseOp::identity(n);
    let y = l.axpby(c64(2.0 / (2.0 - f.delta)), &id, c64(-(f.delta + 2.0) / (2.0 - f.delta)))?;
    let mut b1 = SparseOp::zeros(n);
    let mut b2 = SparseOp::zeros(n);
    for &c in f.coefficients[1..].iter().rev() {
        let next = y.mul(&b1)?.scale(c64(2.0)).sub(&b2)?.add(&id.scale(c64(c)))?;
        b2 = b1;
        b1 = next;
    }
    y.mul(&b1)?.sub(&b2)?.add(&id.scale(c64(f.coefficients[0])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expander::{laplacian, RegularGraph};

    #[test]
    fn s_one_is_constant() {
        let f = chebyshev_filter(0.5, 1).unwrap();
        assert_eq!(f.degree, 0);
        assert_eq!(f.eval(1.3), 1.0);
        let l = laplacian(&RegularGraph::complete(4));
        assert_eq!(apply_filter(&f, &l).unwrap(), SparseOp::identity(4));
    }

    #[test]
    fn normalization_and_sup() {
        for &(delta, s) in &[(0.5, 10), (0.1, 100), (1.9, 3), (0.25, 10)] {
            let f = chebyshev_filter(delta, s).unwrap();
            assert!((f.eval(0.0) - 1.0).abs() < 1e-12);
            assert!(f.sup_on_grid(delta, 2.0, 10_000) <= 1.0 / s as f64 + 1e-9);
            // one degree less would not do
            if f.degree > 0 {
                assert!(chebyshev_t(f.degree - 1, map(delta, 0.0)).abs() < s as f64);
            }
        }
    }

    #[test]
    fn monomial_expansion_oracle() {
        // T_3(y) = 4y^3 - 3y
        let f = chebyshev_filter(0.5, 10).unwrap();
        let y0 = map(0.5, 0.0);
        let t3 = |y: f64| 4.0 * y.powi(3) - 3.0 * y;
        if f.degree == 3 {
            let x = 0.77;
            assert!((f.eval(x) - t3(map(0.5, x)) / t3(y0)).abs() < 1e-12);
        }
        assert!(chebyshev_filter(2.0, 3).is_err());
        assert!(chebyshev_filter(0.0, 3).is_err());
    }

    #[test]
    fn filter_of_k4_matches_scalar() {
        // K4 Laplacian = (4/3)(I - J/4); f(L) = f(0) J/4 + f(4/3)(I - J/4)
        let l = laplacian(&RegularGraph::complete(4));
        let f = chebyshev_filter(4.0 / 3.0, 10).unwrap();
        let fl = apply_filter(&f, &l).unwrap();
        let (a, b) = (f.eval(0.0), f.eval(4.0 / 3.0));
        for i in 0..4 {
            for j in 0..4 {
                let want = a / 4.0 + if i == j { b * 0.75 } else { -b / 4.0 };
                assert!((fl.get(i, j).re - want).abs() < 1e-12);
            }
        }
    }
}
