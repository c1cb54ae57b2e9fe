//! Frank–Wolfe with away steps for `min Σ r_i² / w_i` over the core.
//!
//! The linear minimization oracle is the greedy vertex for the order of
//! increasing gradient. Once the duality gap falls below the tolerance the
//! iterate is refined by minimizing over the affine hull of the active
//! vertices, which recovers the optimum to machine precision whenever the
//! active face is the optimal one.

use super::WeightVector;
use crate::error::{Error, Result};
use crate::omniscience::Subgame;
use crate::rate::RateVector;
use crate::shapley::edmonds_greedy_vertex;
use crate::value::Value;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousOptions {
    /// Stop once the Frank–Wolfe duality gap is at most this.
    pub tol: f64,
    pub max_iterations: usize,
}

impl Default for ContinuousOptions {
    fn default() -> Self {
        ContinuousOptions {
            tol: 1e-9,
            max_iterations: 100_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuousOutcome {
    pub rates: RateVector<f64>,
    pub iterations: usize,
    /// Duality gap at the returned point.
    pub gap: f64,
}

struct Atom<T> {
    exact: RateVector<T>,
    point: Vec<f64>,
    weight: f64,
}

fn dot_w(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), wi)| x * y / wi).sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Coefficients (summing to one) of the point of smallest weighted norm in
/// the affine hull of `points`, or `None` if they are affinely dependent.
fn affine_minimizer(points: &[&[f64]], w: &[f64]) -> Option<Vec<f64>> {
    let m = points.len();
    let size = m + 1;
    let mut a = vec![vec![0.0; size + 1]; size];
    for i in 0..m {
        for j in 0..m {
            a[i][j] = dot_w(points[i], points[j], w);
        }
        a[i][m] = 1.0;
        a[m][i] = 1.0;
    }
    a[m][size] = 1.0;
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    for col in 0..size {
        let pivot = (col..size).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        let head = a[col].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == col {
                continue;
            }
            let factor = row[col] / head[col];
            for (v, h) in row.iter_mut().zip(&head) {
                *v -= factor * h;
            }
        }
    }
    Some((0..m).map(|i| a[i][size] / a[i][i]).collect())
}

/// Minimizes `Σ r_i² / w_i` over the core of `game`.
pub fn egalitarian_continuous<T: Value>(
    game: &Subgame<'_, T>,
    w: &WeightVector<T>,
    options: &ContinuousOptions,
) -> Result<ContinuousOutcome> {
    if !(options.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let n = game.context().n();
    if w.values().len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} users",
            w.values().len(),
            n
        )));
    }
    let ground: Vec<usize> = game.ground().iter().collect();
    let wf: Vec<f64> = ground.iter().map(|&i| w.get(i).to_f64()).collect();
    let vertex = |grad: &[f64]| -> Result<Atom<T>> {
        let mut order: Vec<usize> = (0..ground.len()).collect();
        order.sort_by(|&a, &b| grad[a].total_cmp(&grad[b]).then(a.cmp(&b)));
        let order: Vec<usize> = order.into_iter().map(|k| ground[k]).collect();
        let exact = edmonds_greedy_vertex(game, &order)?;
        let point = ground.iter().map(|&i| exact.get(i).to_f64()).collect();
        Ok(Atom {
            exact,
            point,
            weight: 0.0,
        })
    };
    let gradient = |x: &[f64]| -> Vec<f64> {
        x.iter().zip(&wf).map(|(v, wi)| 2.0 * v / wi).collect()
    };
    let combine = |atoms: &[Atom<T>]| -> Vec<f64> {
        let mut x = vec![0.0; ground.len()];
        for a in atoms {
            for (xi, p) in x.iter_mut().zip(&a.point) {
                *xi += a.weight * p;
            }
        }
        x
    };

    let mut first = vertex(&vec![0.0; ground.len()])?;
    first.weight = 1.0;
    let mut x = first.point.clone();
    let mut atoms = vec![first];
    let mut gap = f64::INFINITY;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        let grad = gradient(&x);
        let s = vertex(&grad)?;
        gap = dot(&grad, &x) - dot(&grad, &s.point);
        if gap <= options.tol {
            break;
        }
        iterations += 1;

        let (away_k, away_gap) = atoms
            .iter()
            .enumerate()
            .map(|(k, a)| (k, dot(&grad, &a.point) - dot(&grad, &x)))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("active set is nonempty");

        let toward = gap >= away_gap;
        let (d, gamma_max): (Vec<f64>, f64) = if toward {
            (s.point.iter().zip(&x).map(|(p, xi)| p - xi).collect(), 1.0)
        } else {
            let a = &atoms[away_k];
            let alpha = a.weight;
            (
                x.iter().zip(&a.point).map(|(xi, p)| xi - p).collect(),
                alpha / (1.0 - alpha),
            )
        };
        let curvature = 2.0 * dot_w(&d, &d, &wf);
        let slope = dot(&grad, &d);
        let gamma = if curvature > 0.0 {
            (-slope / curvature).clamp(0.0, gamma_max)
        } else {
            gamma_max
        };

        if toward {
            for a in atoms.iter_mut() {
                a.weight *= 1.0 - gamma;
            }
            match atoms.iter_mut().find(|a| a.exact == s.exact) {
                Some(a) => a.weight += gamma,
                None => atoms.push(Atom { weight: gamma, ..s }),
            }
        } else {
            for a in atoms.iter_mut() {
                a.weight *= 1.0 + gamma;
            }
            atoms[away_k].weight -= gamma;
        }
        atoms.retain(|a| a.weight > 1e-15);
        x = combine(&atoms);
    }
    if gap > options.tol {
        return Err(Error::NonConvergence {
            iterations,
            gap,
        });
    }

    // Refine on the affine hull of the active vertices.
    let points: Vec<&[f64]> = atoms.iter().map(|a| a.point.as_slice()).collect();
    if let Some(lambda) = affine_minimizer(&points, &wf) {
        if lambda.iter().all(|&l| l >= 0.0) {
            let mut y = vec![0.0; ground.len()];
            for (a, l) in atoms.iter().zip(&lambda) {
                for (yi, p) in y.iter_mut().zip(&a.point) {
                    *yi += l * p;
                }
            }
            let grad = gradient(&y);
            let s = vertex(&grad)?;
            let refined_gap = dot(&grad, &y) - dot(&grad, &s.point);
            if refined_gap <= gap {
                x = y;
                gap = refined_gap.max(0.0);
            }
        }
    }

    let mut rates = RateVector::zeros(n, game.ground());
    for (&i, v) in ground.iter().zip(&x) {
        rates.set(i, *v);
    }
    Ok(ContinuousOutcome {
        rates,
        iterations,
        gap,
    })
}
