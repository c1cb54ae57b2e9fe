//! Extreme points of the core and the Shapley value.

use std::collections::HashSet;

use itertools::Itertools;
use num_rational::BigRational;
use num_traits::Zero;
use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::omniscience::{truncation_incremental, GameContext, Subgame};
use crate::rate::RateVector;
use crate::subset::Subset;
use crate::value::{Rational, Value};

/// Largest ground set for which all permutations are enumerated.
pub const ENUMERATION_LIMIT: usize = 8;

/// Largest ground set for the subset-sum form of the Shapley value.
pub const EXACT_LIMIT: usize = 20;

fn check_order<T: Value>(game: &Subgame<'_, T>, order: &[usize]) -> Result<()> {
    let as_set = Subset::from_positions(order.iter().copied());
    if order.len() != game.len() || as_set != game.ground() {
        return Err(Error::InvalidArgument(format!(
            "{order:?} is not a permutation of {:?}",
            game.ground()
        )));
    }
    Ok(())
}

/// Vertex of the core generated by `order`: each user is charged the
/// increase of `f̂` when it joins the users before it.
pub fn edmonds_greedy_vertex<T: Value>(
    game: &Subgame<'_, T>,
    order: &[usize],
) -> Result<RateVector<T>> {
    check_order(game, order)?;
    let ctx = game.context();
    let mut r = RateVector::zeros(ctx.n(), game.ground());
    let mut prefix = Subset::EMPTY;
    let mut prev = T::zero();
    for &i in order {
        prefix = prefix.with(i);
        let value = ctx.truncation(prefix);
        r.set(i, value.clone() - prev);
        prev = value;
    }
    Ok(r)
}

/// As [`edmonds_greedy_vertex`], computed along the prefix chain with one
/// constrained minimization per user instead of cached truncations.
pub fn edmonds_greedy_vertex_chain<T: Value>(
    game: &Subgame<'_, T>,
    order: &[usize],
) -> Result<RateVector<T>> {
    check_order(game, order)?;
    let ctx = game.context();
    let f = ctx.f_alpha_fn(ctx.r_co().clone());
    let chain = truncation_incremental(&f, order, ctx.options().sfm)?;
    let mut r = RateVector::zeros(ctx.n(), game.ground());
    for (i, v) in chain.increments {
        r.set(i, v);
    }
    Ok(r)
}

fn all_orders(ground: Subset) -> impl Iterator<Item = Vec<usize>> {
    let elements: Vec<usize> = ground.iter().collect();
    let k = elements.len();
    elements.into_iter().permutations(k)
}

fn check_enumerable(game: &Subgame<'_, impl Value>) -> Result<()> {
    if game.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            op: "permutation enumeration",
            size: game.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    Ok(())
}

fn dedup<T: Value>(vectors: Vec<RateVector<T>>) -> Vec<RateVector<T>> {
    let mut out: Vec<RateVector<T>> = Vec::new();
    for v in vectors {
        if !out.iter().any(|u| u.tol_eq(&v)) {
            out.push(v);
        }
    }
    out
}

/// Distinct vertices of the core, in order of first appearance over the
/// lexicographically ordered permutations.
pub fn enumerate_extreme_points<T: Value>(game: &Subgame<'_, T>) -> Result<Vec<RateVector<T>>> {
    check_enumerable(game)?;
    let orders: Vec<Vec<usize>> = all_orders(game.ground()).collect();
    let vertices = orders
        .par_iter()
        .map(|o| edmonds_greedy_vertex(game, o))
        .collect::<Result<Vec<_>>>()?;
    Ok(dedup(vertices))
}

/// Shapley value from the subset-sum definition.
pub fn shapley_exact<T: Value>(game: &Subgame<'_, T>) -> Result<RateVector<T>> {
    let n = game.len();
    if n > EXACT_LIMIT {
        return Err(Error::TooLarge {
            op: "exact Shapley value",
            size: n,
            limit: EXACT_LIMIT,
        });
    }
    // weight(k) = k!(n−k−1)!/n! = 1 / (n · C(n−1, k))
    let weights: Vec<T> = (0..n)
        .map(|k| {
            let binom = (0..k).fold(1i64, |acc, j| acc * (n - 1 - j) as i64 / (j + 1) as i64);
            T::from_frac(1, n as i64 * binom)
        })
        .collect();
    let ctx = game.context();
    let ground = game.ground();
    let values: Vec<(usize, T)> = ground
        .iter()
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|i| {
            let others = ground.without(i);
            let v: T = others
                .subsets()
                .map(|x| {
                    weights[x.len()].clone()
                        * (ctx.truncation(x.with(i)) - ctx.truncation(x))
                })
                .sum();
            (i, v)
        })
        .collect();
    let mut r = RateVector::zeros(ctx.n(), ground);
    for (i, v) in values {
        r.set(i, v);
    }
    Ok(r)
}

/// Mean of the distinct core vertices.
///
/// This ignores how many orders reach each vertex, so it matches the Shapley
/// value only when every vertex is reached equally often.
pub fn shapley_mean_of_vertices<T: Value>(game: &Subgame<'_, T>) -> Result<RateVector<T>> {
    let vertices = enumerate_extreme_points(game)?;
    Ok(RateVector::mean(&vertices).expect("the core has a vertex"))
}

/// Mean of the greedy vertices over all permutations, counted with
/// multiplicity.
pub fn shapley_permutation_average<T: Value>(game: &Subgame<'_, T>) -> Result<RateVector<T>> {
    check_enumerable(game)?;
    let orders: Vec<Vec<usize>> = all_orders(game.ground()).collect();
    mean_over(game, &orders)
}

fn mean_over<T: Value>(game: &Subgame<'_, T>, orders: &[Vec<usize>]) -> Result<RateVector<T>> {
    if orders.is_empty() {
        return Err(Error::EmptyPermutations);
    }
    let vertices = orders
        .par_iter()
        .map(|o| edmonds_greedy_vertex(game, o))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateVector::mean(&vertices).expect("nonempty"))
}

/// Permutations used by [`shapley_approx`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PermutationSample {
    /// Given orders of the ground set, used as a multiset.
    Explicit(Vec<Vec<usize>>),
    /// `count` uniformly random orders; distinct when `count` does not exceed
    /// the number of orders.
    Random { count: usize, seed: u64 },
}

fn factorial_at_most(n: usize, bound: usize) -> bool {
    let mut f: usize = 1;
    for k in 2..=n {
        f = match f.checked_mul(k) {
            Some(v) => v,
            None => return false,
        };
        if f > bound {
            return false;
        }
    }
    true
}

/// `count` random orders of `ground`, reproducible from `seed`.
pub fn sample_orders(ground: Subset, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements: Vec<usize> = ground.iter().collect();
    let n = elements.len();
    if count > 0 && factorial_at_most(n, count - 1) {
        // Fewer orders exist than requested draws.
        return (0..count)
            .map(|_| {
                let mut o = elements.clone();
                o.shuffle(&mut rng);
                o
            })
            .collect();
    }
    if n <= ENUMERATION_LIMIT {
        let all: Vec<Vec<usize>> = all_orders(ground).collect();
        return index::sample(&mut rng, all.len(), count)
            .into_iter()
            .map(|k| all[k].clone())
            .collect();
    }
    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut o = elements.clone();
        o.shuffle(&mut rng);
        if seen.insert(o.clone()) {
            out.push(o);
        }
    }
    out
}

/// Mean of the greedy vertices over a multiset of permutations; always a
/// point of the core.
pub fn shapley_approx<T: Value>(
    game: &Subgame<'_, T>,
    sample: &PermutationSample,
) -> Result<RateVector<T>> {
    match sample {
        PermutationSample::Explicit(orders) => mean_over(game, orders),
        PermutationSample::Random { count, seed } => {
            if *count == 0 {
                return Err(Error::EmptyPermutations);
            }
            mean_over(game, &sample_orders(game.ground(), *count, *seed))
        }
    }
}

/// How each block is valued in [`shapley_decomposed`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DecomposedMode {
    Exact,
    /// `count` random orders per block (default: the block size), with seed
    /// `seed + block index`.
    Random { count: Option<usize>, seed: u64 },
    /// Orders of individual blocks; blocks without any use the exact value.
    Explicit(Vec<Vec<usize>>),
}

/// Direct sum of the per-block Shapley values over the fundamental
/// partition.
pub fn shapley_decomposed<T: Value>(
    ctx: &GameContext<T>,
    mode: &DecomposedMode,
) -> Result<RateVector<T>> {
    let games = ctx.decompose()?;
    let parts = games
        .par_iter()
        .enumerate()
        .map(|(k, game)| match mode {
            DecomposedMode::Exact => shapley_exact(game),
            DecomposedMode::Random { count, seed } => shapley_approx(
                game,
                &PermutationSample::Random {
                    count: count.unwrap_or(game.len()),
                    seed: seed.wrapping_add(k as u64),
                },
            ),
            DecomposedMode::Explicit(orders) => {
                let mine: Vec<Vec<usize>> = orders
                    .iter()
                    .filter(|o| Subset::from_positions(o.iter().copied()) == game.ground())
                    .cloned()
                    .collect();
                if mine.is_empty() {
                    shapley_exact(game)
                } else {
                    mean_over(game, &mine)
                }
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = RateVector::zeros(ctx.n(), Subset::EMPTY);
    for p in &parts {
        out = out.direct_sum(p)?;
    }
    Ok(out)
}

/// Dimension of the affine hull of `points`, computed exactly.
pub fn affine_rank(points: &[RateVector<Rational>]) -> usize {
    let Some(base) = points.first() else {
        return 0;
    };
    let mut rows: Vec<Vec<BigRational>> = points[1..]
        .iter()
        .map(|p| {
            (0..p.dimension())
                .map(|i| (p.get(i) - base.get(i)).to_big())
                .collect()
        })
        .collect();
    let cols = base.dimension();
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, pivot);
        let head = rows[rank].clone();
        for row in rows.iter_mut().skip(rank + 1) {
            if row[c].is_zero() {
                continue;
            }
            let factor = &row[c] / &head[c];
            for (v, h) in row.iter_mut().zip(&head) {
                *v -= &factor * h;
            }
        }
        rank += 1;
    }
    rank
}

/// Whether every vertex is a point of the core, per [`Subgame::core_membership`].
pub fn all_in_core<T: Value>(game: &Subgame<'_, T>, vertices: &[RateVector<T>]) -> Result<bool> {
    for v in vertices {
        if !game.core_membership(v)?.member {
            return Ok(false);
        }
    }
    Ok(true)
}
