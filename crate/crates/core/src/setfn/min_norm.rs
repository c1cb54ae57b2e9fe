//! Wolfe's minimum-norm-point algorithm on a base polytope, in exact rational
//! arithmetic.
//!
//! For a submodular `g` with `g(∅) = 0`, the minimum-norm base `x*` of `B(g)`
//! determines the minimizers of `g`: `{e : x*_e < 0}` is the smallest one and
//! `{e : x*_e ≤ 0}` the largest.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::subset::Subset;

const MAX_MAJOR_ITERATIONS: usize = 100_000;

fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combination(points: &[Vec<BigRational>], weights: &[BigRational]) -> Vec<BigRational> {
    let n = points[0].len();
    let mut out = vec![BigRational::zero(); n];
    for (p, w) in points.iter().zip(weights) {
        if w.is_zero() {
            continue;
        }
        for (o, v) in out.iter_mut().zip(p) {
            *o += w * v;
        }
    }
    out
}

/// Greedy vertex of `B(g)` minimizing `<weights, q>`.
fn greedy_vertex(
    elements: &[usize],
    weights: &[BigRational],
    g: &impl Fn(Subset) -> BigRational,
) -> Vec<BigRational> {
    let mut order: Vec<usize> = (0..elements.len()).collect();
    order.sort_by(|&a, &b| weights[a].cmp(&weights[b]).then(a.cmp(&b)));
    let mut q = vec![BigRational::zero(); elements.len()];
    let mut prefix = Subset::EMPTY;
    let mut prev = BigRational::zero();
    for k in order {
        prefix = prefix.with(elements[k]);
        let value = g(prefix);
        q[k] = &value - &prev;
        prev = value;
    }
    q
}

/// Affine combination coefficients (summing to one) of the point of minimum
/// norm in the affine hull of `points`.
fn affine_minimizer(points: &[Vec<BigRational>]) -> Option<Vec<BigRational>> {
    let m = points.len();
    let size = m + 1;
    let mut a = vec![vec![BigRational::zero(); size + 1]; size];
    for i in 0..m {
        for j in i..m {
            let d = dot(&points[i], &points[j]);
            a[i][j] = d.clone();
            a[j][i] = d;
        }
        a[i][m] = BigRational::one();
        a[m][i] = BigRational::one();
    }
    a[m][size] = BigRational::one();

    for col in 0..size {
        let pivot = (col..size).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        let inv = a[col][col].recip();
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
        }
    }
    Some(a[..m].iter().map(|row| row[size].clone()).collect())
}

/// Minimum-norm point of `B(g)` over `elements`; coordinate `k` belongs to
/// `elements[k]`. `g` must be submodular with `g(∅) = 0`.
pub fn min_norm_base(
    elements: &[usize],
    g: impl Fn(Subset) -> BigRational,
) -> Result<Vec<BigRational>> {
    let n = elements.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut points = vec![greedy_vertex(elements, &vec![BigRational::zero(); n], &g)];
    let mut lambda = vec![BigRational::one()];
    let mut x = points[0].clone();

    for _ in 0..MAX_MAJOR_ITERATIONS {
        let q = greedy_vertex(elements, &x, &g);
        if dot(&x, &x) <= dot(&x, &q) || points.contains(&q) {
            return Ok(x);
        }
        points.push(q);
        lambda.push(BigRational::zero());

        loop {
            let alpha = affine_minimizer(&points).ok_or_else(|| {
                Error::Inconsistent("affinely dependent corral in min-norm-point".into())
            })?;
            if alpha.iter().all(Signed::is_positive) {
                x = combination(&points, &alpha);
                lambda = alpha;
                break;
            }
            let theta = lambda
                .iter()
                .zip(&alpha)
                .filter(|(_, a)| !a.is_positive())
                .map(|(l, a)| l / (l - a))
                .min()
                .expect("some coefficient is nonpositive");
            let keep = BigRational::one() - &theta;
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = &theta * a + &keep * &*l;
            }
            let mut k = 0;
            while k < points.len() {
                if lambda[k].is_positive() {
                    k += 1;
                } else {
                    points.remove(k);
                    lambda.remove(k);
                }
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_MAJOR_ITERATIONS,
        gap: f64::NAN,
    })
}
