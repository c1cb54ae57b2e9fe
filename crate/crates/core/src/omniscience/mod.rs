//! Communication for omniscience: minimum sum-rate, fundamental partition,
//! the optimal rate region as the core of a convex game, and its
//! decomposition into subgames.

mod dilworth;
mod partition;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::rate::RateVector;
use crate::setfn::{SetFunction, SfmBackend};
use crate::source_model::{EntropyOracle, UserSet};
use crate::subset::Subset;
use crate::value::Value;

pub use dilworth::{
    truncation_by_enumeration, truncation_incremental, Truncation, TruncationChain,
    ENUMERATION_LIMIT,
};
pub use partition::{set_partitions, Partition};

/// Largest instance on which [`GameContext::decompose`] checks the
/// decomposition identity on every subset.
pub const DECOMPOSITION_CHECK_LIMIT: usize = 10;

/// How the minimum sum-rate is searched for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RateSearch {
    /// Brute force up to 8 users, iterative above.
    #[default]
    Auto,
    /// Maximize `Σ_C (H(V) − H(C)) / (|P| − 1)` over all partitions `P`
    /// of `V` with at least two blocks.
    BruteForce,
    /// Raise `α` to the ratio of the current minimizing partition until
    /// `f̂_α(V) = f_α(V)`.
    Iterative,
}

/// How Dilworth truncations are evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TruncationBackend {
    /// Enumeration up to [`ENUMERATION_LIMIT`] elements, incremental above.
    #[default]
    Auto,
    Enumeration,
    Incremental,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolveOptions {
    pub search: RateSearch,
    pub truncation: TruncationBackend,
    pub sfm: SfmBackend,
}

const BRUTE_FORCE_AUTO_LIMIT: usize = 8;
const MAX_SEARCH_ROUNDS: usize = 10_000;

/// Thread-safe memo of `H` over user subsets.
struct EntropyCache<T: Value> {
    oracle: Arc<dyn EntropyOracle<T>>,
    memo: RwLock<HashMap<Subset, T>>,
}

impl<T: Value> EntropyCache<T> {
    fn get(&self, set: Subset) -> T {
        if let Some(v) = self.memo.read().get(&set) {
            return v.clone();
        }
        let v = self.oracle.entropy(set);
        self.memo.write().insert(set, v.clone());
        v
    }
}

/// `f_α(X) = α − H(V) + H(X)` for nonempty `X`, `f_α(∅) = 0`.
pub struct FAlpha<'a, T: Value> {
    ctx: &'a EntropyCache<T>,
    h_full: T,
    alpha: T,
    ground: Subset,
}

impl<T: Value> SetFunction<T> for FAlpha<'_, T> {
    fn ground(&self) -> Subset {
        self.ground
    }

    fn eval(&self, set: Subset) -> T {
        if set.is_empty() {
            T::zero()
        } else {
            self.alpha.clone() - self.h_full.clone() + self.ctx.get(set)
        }
    }
}

fn truncate<T: Value>(
    f: &FAlpha<'_, T>,
    set: Subset,
    backend: TruncationBackend,
    sfm: SfmBackend,
) -> Result<Truncation<T>> {
    let enumerate = match backend {
        TruncationBackend::Auto => set.len() <= ENUMERATION_LIMIT,
        TruncationBackend::Enumeration => true,
        TruncationBackend::Incremental => false,
    };
    if set.is_empty() {
        return Ok(Truncation {
            value: T::zero(),
            partition: Partition::new(Vec::new())?,
        });
    }
    if enumerate {
        truncation_by_enumeration(f, set)
    } else {
        let order: Vec<usize> = set.iter().collect();
        let chain = truncation_incremental(f, &order, sfm)?;
        Ok(Truncation {
            value: chain.value,
            partition: chain.partition,
        })
    }
}

/// `Σ_{C∈P} (H(V) − H(C)) / (|P| − 1)` for a partition with at least two
/// blocks.
fn partition_ratio<T: Value>(h: &EntropyCache<T>, h_full: &T, p: &Partition) -> T {
    let gain: T = p
        .blocks()
        .iter()
        .map(|&c| h_full.clone() - h.get(c))
        .sum();
    gain / T::from_int(p.len() as i64 - 1)
}

fn search_brute_force<T: Value>(h: &EntropyCache<T>, h_full: &T, full: Subset) -> Result<T> {
    if full.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            op: "brute-force sum-rate search",
            size: full.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let mut best: Option<T> = None;
    for p in set_partitions(full) {
        if p.len() < 2 {
            continue;
        }
        let ratio = partition_ratio(h, h_full, &p);
        if best.as_ref().is_none_or(|b| ratio > *b) {
            best = Some(ratio);
        }
    }
    Ok(best.expect("at least two users"))
}

fn search_iterative<T: Value>(
    h: &EntropyCache<T>,
    h_full: &T,
    full: Subset,
    options: &SolveOptions,
) -> Result<T> {
    let mut alpha = partition_ratio(h, h_full, &Partition::singletons(full));
    for _ in 0..MAX_SEARCH_ROUNDS {
        let f = FAlpha {
            ctx: h,
            h_full: h_full.clone(),
            alpha: alpha.clone(),
            ground: full,
        };
        let t = truncate(&f, full, options.truncation, options.sfm)?;
        if !t.value.tol_lt(&alpha) {
            return Ok(alpha);
        }
        // f̂_α(V) < α forces a minimizer with two or more blocks, whose
        // ratio strictly exceeds α.
        alpha = partition_ratio(h, h_full, &t.partition);
    }
    Err(Error::NonConvergence {
        iterations: MAX_SEARCH_ROUNDS,
        gap: f64::NAN,
    })
}

/// A solved instance: minimum sum-rate `R_CO`, fundamental partition `P*`,
/// and the truncation `f̂ = f̂_{R_CO}` that defines the cost game.
pub struct GameContext<T: Value> {
    users: UserSet,
    entropy: EntropyCache<T>,
    options: SolveOptions,
    h_full: T,
    r_co: T,
    partition: Partition,
    truncations: RwLock<HashMap<Subset, T>>,
    vertex: RateVector<T>,
}

impl<T: Value> fmt::Debug for GameContext<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GameContext")
            .field("users", &self.users)
            .field("r_co", &self.r_co)
            .field("partition", &self.partition)
            .finish_non_exhaustive()
    }
}

/// Solves the instance given by `oracle`.
pub fn min_sum_rate<T: Value>(
    oracle: Arc<dyn EntropyOracle<T>>,
    options: SolveOptions,
) -> Result<GameContext<T>> {
    let users = oracle.users().clone();
    let full = users.full();
    let entropy = EntropyCache {
        oracle,
        memo: RwLock::new(HashMap::new()),
    };
    let h_full = entropy.get(full);

    let brute = match options.search {
        RateSearch::Auto => full.len() <= BRUTE_FORCE_AUTO_LIMIT,
        RateSearch::BruteForce => true,
        RateSearch::Iterative => false,
    };
    let r_co = if brute {
        search_brute_force(&entropy, &h_full, full)?
    } else {
        search_iterative(&entropy, &h_full, full, &options)?
    };

    let f = FAlpha {
        ctx: &entropy,
        h_full: h_full.clone(),
        alpha: r_co.clone(),
        ground: full,
    };
    let t = truncate(&f, full, options.truncation, options.sfm)?;
    if !t.value.tol_eq(&r_co) {
        return Err(Error::Inconsistent(format!(
            "f̂(V) = {} differs from R_CO = {}",
            t.value, r_co
        )));
    }

    let mut ctx = GameContext {
        users,
        entropy,
        options,
        h_full,
        r_co,
        partition: t.partition,
        truncations: RwLock::new(HashMap::new()),
        vertex: RateVector::zeros(0, Subset::EMPTY),
    };
    let identity: Vec<usize> = full.iter().collect();
    ctx.vertex = crate::shapley::edmonds_greedy_vertex(&ctx.whole(), &identity)?;
    Ok(ctx)
}

impl<T: Value> GameContext<T> {
    pub fn users(&self) -> &UserSet {
        &self.users
    }

    /// Number of users.
    pub fn n(&self) -> usize {
        self.users.len()
    }

    pub fn options(&self) -> &SolveOptions {
        &self.options
    }

    pub fn entropy(&self, set: Subset) -> T {
        self.entropy.get(set)
    }

    /// `H(V)`.
    pub fn total_entropy(&self) -> &T {
        &self.h_full
    }

    pub fn r_co(&self) -> &T {
        &self.r_co
    }

    /// Fundamental partition `P*`.
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    /// Amount of common randomness `I = H(V) − R_CO`.
    pub fn shared_randomness(&self) -> T {
        self.h_full.clone() - self.r_co.clone()
    }

    /// Core vertex for the identity order.
    pub fn vertex(&self) -> &RateVector<T> {
        &self.vertex
    }

    /// `f_α` on the full user set.
    pub fn f_alpha_fn(&self, alpha: T) -> FAlpha<'_, T> {
        FAlpha {
            ctx: &self.entropy,
            h_full: self.h_full.clone(),
            alpha,
            ground: self.users.full(),
        }
    }

    pub fn f_alpha(&self, alpha: &T, set: Subset) -> T {
        self.f_alpha_fn(alpha.clone()).eval(set)
    }

    /// `f_{R_CO}(X)`.
    pub fn f(&self, set: Subset) -> T {
        self.f_alpha(&self.r_co, set)
    }

    /// `f̂_α(X)` with its finest minimizing partition.
    pub fn truncation_at(&self, alpha: &T, set: Subset) -> Result<Truncation<T>> {
        self.truncation_with(alpha, set, self.options.truncation)
    }

    /// As [`Self::truncation_at`] with an explicit backend.
    pub fn truncation_with(
        &self,
        alpha: &T,
        set: Subset,
        backend: TruncationBackend,
    ) -> Result<Truncation<T>> {
        if !set.is_subset_of(self.users.full()) {
            return Err(Error::InvalidArgument(format!(
                "{set:?} is not a set of user positions"
            )));
        }
        truncate(&self.f_alpha_fn(alpha.clone()), set, backend, self.options.sfm)
    }

    /// `f̂(X) = f̂_{R_CO}(X)`, cached.
    pub fn truncation(&self, set: Subset) -> T {
        if set.is_empty() {
            return T::zero();
        }
        if let Some(v) = self.truncations.read().get(&set) {
            return v.clone();
        }
        let v = self
            .truncation_at(&self.r_co, set)
            .expect("truncation of a set of user positions")
            .value;
        self.truncations.write().insert(set, v.clone());
        v
    }

    /// The whole game on `V`.
    pub fn whole(&self) -> Subgame<'_, T> {
        Subgame {
            ctx: self,
            ground: self.users.full(),
        }
    }

    /// Game restricted to `ground`.
    pub fn subgame(&self, ground: Subset) -> Result<Subgame<'_, T>> {
        if ground.is_empty() || !ground.is_subset_of(self.users.full()) {
            return Err(Error::InvalidArgument(format!(
                "{ground:?} is not a nonempty set of user positions"
            )));
        }
        Ok(Subgame { ctx: self, ground })
    }

    /// One subgame per block of `P*`, after checking
    /// `f̂(X) = Σ_{C∈P*} f̂(X ∩ C)` on every subset (up to
    /// [`DECOMPOSITION_CHECK_LIMIT`] users).
    pub fn decompose(&self) -> Result<Vec<Subgame<'_, T>>> {
        if self.n() <= DECOMPOSITION_CHECK_LIMIT {
            if let Some(x) = self.decomposition_violation() {
                return Err(Error::Inconsistent(format!(
                    "f̂ does not split over the fundamental partition at {x:?}"
                )));
            }
        }
        Ok(self
            .partition
            .blocks()
            .iter()
            .map(|&c| Subgame { ctx: self, ground: c })
            .collect())
    }

    /// First subset on which `f̂` fails to split over `P*`.
    pub fn decomposition_violation(&self) -> Option<Subset> {
        self.users.full().subsets().find(|&x| {
            let split: T = self
                .partition
                .blocks()
                .iter()
                .map(|&c| self.truncation(x & c))
                .sum();
            !split.tol_eq(&self.truncation(x))
        })
    }

    /// `I(X; Y | U) = f̂(X) + f̂(Y) − f̂(X ⊔ Y)` for disjoint nonempty sets.
    pub fn conditional_mi_given_u(&self, x: Subset, y: Subset) -> Result<T> {
        if x.intersects(y) {
            return Err(Error::Overlap);
        }
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidArgument("arguments must be nonempty".into()));
        }
        Ok(self.truncation(x) + self.truncation(y) - self.truncation(x | y))
    }

    /// Core membership in the whole game.
    pub fn core_membership(&self, r: &RateVector<T>) -> Result<CoreCheck<T>> {
        self.whole().core_membership(r)
    }
}

/// The cost game `X ↦ f̂(X)` on a ground set, typically a block of `P*`.
#[derive(Clone, Copy)]
pub struct Subgame<'a, T: Value> {
    ctx: &'a GameContext<T>,
    ground: Subset,
}

impl<T: Value> fmt::Debug for Subgame<'_, T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Subgame{:?}", self.ctx.users.ids_of(self.ground))
    }
}

impl<T: Value> SetFunction<T> for Subgame<'_, T> {
    fn ground(&self) -> Subset {
        self.ground
    }

    fn eval(&self, set: Subset) -> T {
        self.ctx.truncation(set)
    }
}

/// A violated constraint of the core.
#[derive(Clone, Debug, PartialEq)]
pub enum CoreViolation<T> {
    /// The rate vector has the wrong support.
    Support { expected: Subset, actual: Subset },
    /// `r(G) ≠ f̂(G)` on the ground set `G`.
    SumRate { expected: T, actual: T },
    /// `r(X)` below the rate needed by the users outside `X`.
    LowerBound { set: Subset, bound: T, actual: T },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoreCheck<T> {
    pub member: bool,
    pub violation: Option<CoreViolation<T>>,
}

impl<'a, T: Value> Subgame<'a, T> {
    pub fn context(&self) -> &'a GameContext<T> {
        self.ctx
    }

    pub fn ground(&self) -> Subset {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.ground.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ground.is_empty()
    }

    /// User ids of the ground set, ascending.
    pub fn user_ids(&self) -> Vec<u32> {
        self.ctx.users.ids_of(self.ground)
    }

    /// `f̂(G)`, the total rate charged to the subgame.
    pub fn sum_cost(&self) -> T {
        self.ctx.truncation(self.ground)
    }

    /// Whether `r` lies in the core `{r : r(G) = f̂(G), r(X) ≤ f̂(X)}`.
    ///
    /// Two equivalent tests are run and must agree: the source-coding form
    /// `r(X) ≥ f̂(G) − f_{R_CO}(G∖X)` for `∅ ≠ X ⊊ G` (for `G = V` this is
    /// `r(X) ≥ H(X | V∖X)`), and the upper bounds `r(X) ≤ f̂(X)`.
    pub fn core_membership(&self, r: &RateVector<T>) -> Result<CoreCheck<T>> {
        if r.support() != self.ground || r.dimension() != self.ctx.n() {
            return Ok(CoreCheck {
                member: false,
                violation: Some(CoreViolation::Support {
                    expected: self.ground,
                    actual: r.support(),
                }),
            });
        }
        let total = self.sum_cost();
        let actual = r.total();
        if !actual.tol_eq(&total) {
            return Ok(CoreCheck {
                member: false,
                violation: Some(CoreViolation::SumRate {
                    expected: total,
                    actual,
                }),
            });
        }

        let mut lower = None;
        let mut upper_ok = true;
        for x in self.ground.subsets() {
            if x.is_empty() || x == self.ground {
                continue;
            }
            let rx = r.sum(x);
            if lower.is_none() {
                let bound = total.clone() - self.ctx.f(self.ground - x);
                if rx.tol_lt(&bound) {
                    lower = Some(CoreViolation::LowerBound {
                        set: x,
                        bound,
                        actual: rx.clone(),
                    });
                }
            }
            if upper_ok && self.ctx.truncation(x).tol_lt(&rx) {
                upper_ok = false;
            }
        }
        if lower.is_none() != upper_ok {
            return Err(Error::Inconsistent(format!(
                "core tests disagree on {:?}",
                r.support_values()
            )));
        }
        Ok(CoreCheck {
            member: upper_ok,
            violation: lower,
        })
    }

    /// Largest `ℓ1` distance between two points of the core.
    pub fn l1_size(&self) -> Result<T> {
        let vertices = crate::shapley::enumerate_extreme_points(self)?;
        let mut best = T::zero();
        for (k, a) in vertices.iter().enumerate() {
            for b in &vertices[k + 1..] {
                let d = a.l1_distance(b);
                if d > best {
                    best = d;
                }
            }
        }
        Ok(best)
    }
}
