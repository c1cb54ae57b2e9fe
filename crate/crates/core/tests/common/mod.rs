//! Shared helpers for the integration tests: random sources and
//! independent reference computations.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use omnifair::egalitarian::{objective_g, WeightVector};
use omnifair::omniscience::{min_sum_rate, GameContext, SolveOptions, Subgame};
use omnifair::source_model::{LinearSource, PmfSource};
use omnifair::{RateVector, Rational, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

pub fn rates(values: &[Rational]) -> RateVector<Rational> {
    RateVector::from_values(values.to_vec())
}

pub fn solve(src: LinearSource) -> GameContext<Rational> {
    min_sum_rate(Arc::new(src), SolveOptions::default()).unwrap()
}

pub fn solve_with(src: LinearSource, options: SolveOptions) -> GameContext<Rational> {
    min_sum_rate(Arc::new(src), options).unwrap()
}

pub fn ids_to_set(ctx: &GameContext<Rational>, ids: &[u32]) -> Subset {
    ctx.users().subset(ids).unwrap()
}

pub fn ids_to_positions(ctx: &GameContext<Rational>, ids: &[u32]) -> Vec<usize> {
    ids.iter().map(|&i| ctx.users().position(i).unwrap()).collect()
}

/// Packet-subset instance: `holdings[u]` lists the packet indices of user
/// `u + 1`.
#[derive(Clone, Debug)]
pub struct PacketInstance {
    pub packets: usize,
    pub holdings: Vec<BTreeSet<usize>>,
}

impl PacketInstance {
    pub fn source(&self) -> LinearSource {
        let names: Vec<String> = (0..self.packets).map(|p| format!("p{p}")).collect();
        let users = self
            .holdings
            .iter()
            .enumerate()
            .map(|(u, held)| {
                (
                    u as u32 + 1,
                    held.iter().map(|&p| names[p].clone()).collect(),
                )
            })
            .collect();
        LinearSource::from_packets(2, names, users).unwrap()
    }

    /// `|∪_{u∈X} Z_u|` computed with hash sets.
    pub fn entropy(&self, set: Subset) -> Rational {
        let union: HashSet<usize> = set
            .iter()
            .flat_map(|u| self.holdings[u].iter().copied())
            .collect();
        Rational::from_integer(union.len() as i128)
    }

    /// The same source as a joint pmf of independent uniform bits. Each user
    /// observes the tuple of its packets.
    pub fn pmf_source(&self) -> PmfSource {
        let n = self.holdings.len();
        let alphabets: Vec<(u32, Vec<String>)> = self
            .holdings
            .iter()
            .enumerate()
            .map(|(u, held)| {
                let symbols = (0..1usize << held.len()).map(|s| format!("{s}")).collect();
                (u as u32 + 1, symbols)
            })
            .collect();
        let sizes: Vec<usize> = self.holdings.iter().map(|h| 1 << h.len()).collect();
        let total: usize = sizes.iter().product();
        let covered: BTreeSet<usize> = self.holdings.iter().flatten().copied().collect();
        let mass = 0.5f64.powi(covered.len() as i32);
        let mut table = vec![0.0; total];
        for (cell, p) in table.iter_mut().enumerate() {
            // Decode the cell into one symbol per user (last user fastest).
            let mut rest = cell;
            let mut symbols = vec![0usize; n];
            for u in (0..n).rev() {
                symbols[u] = rest % sizes[u];
                rest /= sizes[u];
            }
            // Consistent iff shared packets get the same bit everywhere.
            let mut bits: Vec<Option<bool>> = vec![None; self.packets];
            let consistent = self.holdings.iter().zip(&symbols).all(|(held, &s)| {
                held.iter().enumerate().all(|(k, &packet)| {
                    let bit = (s >> k) & 1 == 1;
                    match bits[packet] {
                        Some(b) => b == bit,
                        None => {
                            bits[packet] = Some(bit);
                            true
                        }
                    }
                })
            });
            if consistent {
                *p = mass;
            }
        }
        PmfSource::new(alphabets, table).unwrap()
    }
}

/// Random packet instance with `users` users and at most `max_packets`
/// packets.
pub fn random_packet_instance(rng: &mut impl Rng, users: usize, max_packets: usize) -> PacketInstance {
    let packets = rng.random_range(1..=max_packets);
    let density = [0.3, 0.5, 0.7][rng.random_range(0..3)];
    let holdings = (0..users)
        .map(|_| (0..packets).filter(|_| rng.random_bool(density)).collect())
        .collect();
    PacketInstance { packets, holdings }
}

/// `count` reproducible instances with 3 to 6 users and at most 12 packets.
pub fn instance_family(seed: u64, count: usize) -> Vec<PacketInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| random_packet_instance(&mut rng, 3 + k % 4, 12))
        .collect()
}

/// Random vector-form source over GF(q).
pub fn random_vector_source(rng: &mut impl Rng, users: usize, field: u64) -> (LinearSource, Vec<Vec<Vec<u64>>>) {
    let packets = rng.random_range(1..=6usize);
    let names: Vec<String> = (0..packets).map(|p| format!("x{p}")).collect();
    let rows: Vec<Vec<Vec<u64>>> = (0..users)
        .map(|_| {
            let k = rng.random_range(0..=3usize);
            (0..k)
                .map(|_| (0..packets).map(|_| rng.random_range(0..field)).collect())
                .collect()
        })
        .collect();
    let spec = rows
        .iter()
        .enumerate()
        .map(|(u, r)| (u as u32 + 1, r.clone()))
        .collect();
    (LinearSource::from_vectors(field, names, spec).unwrap(), rows)
}

/// Dimension of the span of `rows` over GF(q), by counting the span for
/// small cases.
pub fn span_dimension(rows: &[Vec<u64>], field: u64) -> usize {
    let Some(len) = rows.first().map(Vec::len) else {
        return 0;
    };
    let mut span: HashSet<Vec<u64>> = HashSet::new();
    span.insert(vec![0; len]);
    for row in rows {
        let current: Vec<Vec<u64>> = span.iter().cloned().collect();
        for v in current {
            for c in 1..field {
                let w: Vec<u64> = v
                    .iter()
                    .zip(row)
                    .map(|(a, b)| (a + c * b) % field)
                    .collect();
                span.insert(w);
            }
        }
    }
    let mut dim = 0;
    let mut size = 1usize;
    while size < span.len() {
        size *= field as usize;
        dim += 1;
    }
    dim
}

/// All points of the core of `game` on the `1/K` grid, enumerated from
/// the coordinate bounds `f̂(G) − f̂(G∖i) ≤ r_i ≤ f̂({i})`.
pub fn grid_points(game: &Subgame<'_, Rational>, k: u64, limit: usize) -> Option<Vec<RateVector<Rational>>> {
    let ctx = game.context();
    let ground: Vec<usize> = game.ground().iter().collect();
    let kk = k as i128;
    let bounds: Vec<(i128, i128)> = ground
        .iter()
        .map(|&i| {
            let lo = game.sum_cost() - ctx.truncation(game.ground().without(i));
            let hi = ctx.truncation(Subset::singleton(i));
            ((lo * kk).ceil().to_integer(), (hi * kk).floor().to_integer())
        })
        .collect();
    let count: usize = bounds
        .iter()
        .map(|(lo, hi)| (hi - lo + 1).max(0) as usize)
        .try_fold(1usize, |acc, c| acc.checked_mul(c))?;
    if count > limit {
        return None;
    }
    let mut out = Vec::new();
    let mut current = vec![0i128; ground.len()];
    fn walk(
        depth: usize,
        bounds: &[(i128, i128)],
        current: &mut Vec<i128>,
        visit: &mut dyn FnMut(&[i128]),
    ) {
        if depth == bounds.len() {
            visit(current);
            return;
        }
        for v in bounds[depth].0..=bounds[depth].1 {
            current[depth] = v;
            walk(depth + 1, bounds, current, visit);
        }
    }
    let total = game.sum_cost() * kk;
    walk(0, &bounds, &mut current, &mut |point| {
        if Rational::from_integer(point.iter().sum::<i128>()) != total {
            return;
        }
        let values = point.iter().map(|&v| Rational::new(v, kk)).collect();
        let r = RateVector::on_support(ctx.n(), game.ground(), values).unwrap();
        if game.core_membership(&r).unwrap().member {
            out.push(r);
        }
    });
    Some(out)
}

/// Smallest objective over the grid points of the core.
pub fn grid_minimum(
    game: &Subgame<'_, Rational>,
    k: u64,
    w: &WeightVector<Rational>,
    limit: usize,
) -> Option<Rational> {
    grid_points(game, k, limit)?
        .iter()
        .map(|r| objective_g(r, w).unwrap())
        .min()
}

/// Every set partition of `0..n`, by restricted growth strings.
pub fn partitions_of(n: usize) -> Vec<Vec<Vec<usize>>> {
    fn grow(i: usize, n: usize, labels: &mut Vec<usize>, out: &mut Vec<Vec<Vec<usize>>>) {
        if i == n {
            let blocks = labels.iter().max().map_or(0, |m| m + 1);
            let mut p = vec![Vec::new(); blocks];
            for (u, &l) in labels.iter().enumerate() {
                p[l].push(u);
            }
            out.push(p);
            return;
        }
        let next = labels.iter().max().map_or(0, |m| m + 1);
        for l in 0..=next {
            labels.push(l);
            grow(i + 1, n, labels, out);
            labels.pop();
        }
    }
    let mut out = Vec::new();
    grow(0, n, &mut Vec::new(), &mut out);
    out
}

fn set_of(users: &[usize]) -> Subset {
    users.iter().fold(Subset::EMPTY, |s, &u| s.with(u))
}

/// `R_CO` as the largest partition ratio, from hash-set entropies only.
pub fn reference_rate(inst: &PacketInstance) -> Rational {
    let n = inst.holdings.len();
    let full = Subset::full(n);
    let h_full = inst.entropy(full);
    partitions_of(n)
        .into_iter()
        .filter(|p| p.len() >= 2)
        .map(|p| {
            let gain: Rational = p.iter().map(|c| h_full - inst.entropy(set_of(c))).sum();
            gain / Rational::from_integer(p.len() as i128 - 1)
        })
        .max()
        .unwrap()
}

/// Smallest `Σ r_i²/w_i` over the `1/K` grid points `r` with
/// `r(V) = R_CO` and `r(X) ≥ H(V) − H(V∖X)` for every coalition, using only
/// hash-set entropies. `None` if the search box exceeds `limit` points.
pub fn independent_grid_minimum(
    inst: &PacketInstance,
    k: u64,
    weights: &[Rational],
    limit: usize,
) -> Option<Rational> {
    let n = inst.holdings.len();
    let full = Subset::full(n);
    let kk = k as i128;
    let total = reference_rate(inst);
    let h_full = inst.entropy(full);
    let lower: Vec<Rational> = (0..n).map(|i| h_full - inst.entropy(full.without(i))).collect();
    let lower_sum: Rational = lower.iter().sum();
    let bounds: Vec<(i128, i128)> = (0..n)
        .map(|i| {
            let hi = total - (lower_sum - lower[i]);
            ((lower[i] * kk).ceil().to_integer(), (hi * kk).floor().to_integer())
        })
        .collect();
    // The last coordinate is fixed by the total.
    let count = bounds[..n - 1]
        .iter()
        .map(|(lo, hi)| (hi - lo + 1).max(0) as usize)
        .try_fold(1usize, |acc, c| acc.checked_mul(c))?;
    if count > limit {
        return None;
    }
    let target = (total * kk).to_integer();
    let constraints: Vec<(Subset, i128)> = full
        .subsets()
        .filter(|x| !x.is_empty() && *x != full)
        .map(|x| (x, ((h_full - inst.entropy(full - x)) * kk).ceil().to_integer()))
        .collect();
    let mut best: Option<Rational> = None;
    let mut point = vec![0i128; n];
    fn walk(
        depth: usize,
        partial: i128,
        bounds: &[(i128, i128)],
        target: i128,
        point: &mut Vec<i128>,
        visit: &mut dyn FnMut(&[i128]),
    ) {
        if depth + 1 == bounds.len() {
            let last = target - partial;
            if bounds[depth].0 <= last && last <= bounds[depth].1 {
                point[depth] = last;
                visit(point);
            }
            return;
        }
        for v in bounds[depth].0..=bounds[depth].1 {
            point[depth] = v;
            walk(depth + 1, partial + v, bounds, target, point, visit);
        }
    }
    walk(0, 0, &bounds, target, &mut point, &mut |p| {
        let feasible = constraints
            .iter()
            .all(|(x, bound)| x.iter().map(|u| p[u]).sum::<i128>() >= *bound);
        if feasible {
            let g: Rational = p
                .iter()
                .zip(weights)
                .map(|(&v, w)| Rational::new(v * v, kk * kk) / w)
                .sum();
            if best.is_none_or(|b| g < b) {
                best = Some(g);
            }
        }
    });
    best
}
