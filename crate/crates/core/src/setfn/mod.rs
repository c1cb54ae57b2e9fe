//! Set functions over subsets of user positions: memoized oracles,
//! submodularity checks and submodular function minimization.

mod min_norm;
mod sfm;

use std::collections::HashMap;

use parking_lot::RwLock;

use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::value::Value;

pub use min_norm::min_norm_base;
pub use sfm::{sfm_min, SfmBackend, SfmResult};

/// Largest ground set accepted by the exhaustive checks.
pub const EXHAUSTIVE_LIMIT: usize = 20;

/// A real- or rational-valued function on the subsets of a ground set.
///
/// Evaluation must be deterministic.
pub trait SetFunction<T: Value>: Sync {
    fn ground(&self) -> Subset;

    fn eval(&self, set: Subset) -> T;
}

impl<T: Value, F: SetFunction<T> + ?Sized> SetFunction<T> for &F {
    fn ground(&self) -> Subset {
        (**self).ground()
    }

    fn eval(&self, set: Subset) -> T {
        (**self).eval(set)
    }
}

/// Set function backed by a closure.
pub struct FnSetFunction<F> {
    ground: Subset,
    f: F,
}

impl<F> FnSetFunction<F> {
    pub fn new(ground: Subset, f: F) -> Self {
        FnSetFunction { ground, f }
    }
}

impl<T: Value, F: Fn(Subset) -> T + Sync> SetFunction<T> for FnSetFunction<F> {
    fn ground(&self) -> Subset {
        self.ground
    }

    fn eval(&self, set: Subset) -> T {
        (self.f)(set)
    }
}

/// Memoizing wrapper. Concurrent readers share the cache; concurrent writers
/// of the same subset store the same value, so races are harmless.
pub struct Memoized<T, F> {
    inner: F,
    cache: RwLock<HashMap<Subset, T>>,
}

impl<T: Value, F: SetFunction<T>> Memoized<T, F> {
    pub fn new(inner: F) -> Self {
        Memoized {
            inner,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn cached_len(&self) -> usize {
        self.cache.read().len()
    }

    pub fn inner(&self) -> &F {
        &self.inner
    }
}

impl<T: Value, F: SetFunction<T>> SetFunction<T> for Memoized<T, F> {
    fn ground(&self) -> Subset {
        self.inner.ground()
    }

    fn eval(&self, set: Subset) -> T {
        if let Some(v) = self.cache.read().get(&set) {
            return v.clone();
        }
        let v = self.inner.eval(set);
        self.cache.write().entry(set).or_insert_with(|| v.clone());
        v
    }
}

/// Outcome of an exhaustive pairwise inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCheck {
    pub holds: bool,
    /// First violating pair `(X, Y)` in increasing bitmask order.
    pub witness: Option<(Subset, Subset)>,
}

impl PairCheck {
    fn from_witness(witness: Option<(Subset, Subset)>) -> Self {
        PairCheck {
            holds: witness.is_none(),
            witness,
        }
    }
}

fn exhaustive_pairs<T: Value>(
    f: &impl SetFunction<T>,
    intersecting_only: bool,
) -> Result<PairCheck> {
    let ground = f.ground();
    if ground.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            op: "exhaustive submodularity check",
            size: ground.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let subsets: Vec<Subset> = ground.subsets().collect();
    let values: HashMap<Subset, T> = subsets.iter().map(|&s| (s, f.eval(s))).collect();
    for (k, &x) in subsets.iter().enumerate() {
        for &y in &subsets[k + 1..] {
            // Nested pairs satisfy the inequality with equality.
            if x.is_subset_of(y) || y.is_subset_of(x) {
                continue;
            }
            if intersecting_only && !x.intersects(y) {
                continue;
            }
            let lhs = values[&x].clone() + values[&y].clone();
            let rhs = values[&(x & y)].clone() + values[&(x | y)].clone();
            if lhs.tol_lt(&rhs) {
                return Ok(PairCheck::from_witness(Some((x, y))));
            }
        }
    }
    Ok(PairCheck::from_witness(None))
}

/// Checks `f(X) + f(Y) ≥ f(X ∩ Y) + f(X ∪ Y)` for every pair of subsets.
pub fn is_submodular<T: Value>(f: &impl SetFunction<T>) -> Result<PairCheck> {
    exhaustive_pairs(f, false)
}

/// As [`is_submodular`], restricted to pairs with `X ∩ Y ≠ ∅`.
pub fn is_intersecting_submodular<T: Value>(f: &impl SetFunction<T>) -> Result<PairCheck> {
    exhaustive_pairs(f, true)
}
