//! Dilworth truncation `f̂(X) = min over partitions P of X of Σ_{C∈P} f(C)`.
//!
//! Two backends: plain enumeration of all partitions (the reference), and an
//! element-by-element construction that needs one constrained SFM per element.
//! The latter requires `f` to be intersecting submodular with `f(∅) = 0`.

use super::partition::{set_partitions, Partition};
use crate::error::{Error, Result};
use crate::setfn::{sfm_min, FnSetFunction, SetFunction, SfmBackend};
use crate::subset::Subset;
use crate::value::Value;

/// Largest set handled by [`truncation_by_enumeration`].
pub const ENUMERATION_LIMIT: usize = 10;

/// Value of the truncation together with its finest minimizing partition.
#[derive(Clone, Debug, PartialEq)]
pub struct Truncation<T> {
    pub value: T,
    pub partition: Partition,
}

/// Output of the incremental construction along an element order.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncationChain<T> {
    pub value: T,
    pub partition: Partition,
    /// `(element, f̂(prefix ending at element) − f̂(prefix before it))`, in
    /// processing order.
    pub increments: Vec<(usize, T)>,
}

/// Truncation by enumerating all partitions of `set`.
pub fn truncation_by_enumeration<T: Value>(
    f: &impl SetFunction<T>,
    set: Subset,
) -> Result<Truncation<T>> {
    if set.len() > ENUMERATION_LIMIT {
        return Err(Error::TooLarge {
            op: "partition enumeration",
            size: set.len(),
            limit: ENUMERATION_LIMIT,
        });
    }
    let scored: Vec<(T, Partition)> = set_partitions(set)
        .into_iter()
        .map(|p| (p.blocks().iter().map(|&c| f.eval(c)).sum::<T>(), p))
        .collect();
    let min = scored
        .iter()
        .map(|(v, _)| v)
        .fold(None::<&T>, |best, v| match best {
            Some(b) if !(v < b) => Some(b),
            _ => Some(v),
        })
        .expect("at least one partition")
        .clone();
    let minimizers: Vec<&Partition> = scored
        .iter()
        .filter(|(v, _)| v.tol_eq(&min))
        .map(|(_, p)| p)
        .collect();
    let finest = *minimizers
        .iter()
        .max_by_key(|p| p.len())
        .expect("at least one minimizer");
    if let Some(other) = minimizers.iter().find(|p| !finest.refines(p)) {
        return Err(Error::Inconsistent(format!(
            "minimizing partitions {finest:?} and {other:?} have no common refinement among minimizers"
        )));
    }
    Ok(Truncation {
        value: min,
        partition: finest.clone(),
    })
}

/// Incremental truncation along `order` (the elements of the set, each once).
///
/// Builds the greedy vector `x` of `P(f)`: element `e` receives
/// `min{ f(U) − x(U∖e) : e ∈ U ⊆ prefix }`, which equals the increment of `f̂`
/// along the chain of prefixes. The minimal minimizer at each step is the
/// smallest tight set containing `e`; merging the blocks it touches yields the
/// finest minimizing partition.
pub fn truncation_incremental<T: Value>(
    f: &impl SetFunction<T>,
    order: &[usize],
    backend: SfmBackend,
) -> Result<TruncationChain<T>> {
    let n_max = order.iter().copied().max().map_or(0, |m| m + 1);
    let mut x: Vec<T> = vec![T::zero(); n_max];
    let mut prefix = Subset::EMPTY;
    let mut blocks: Vec<Subset> = Vec::new();
    let mut increments = Vec::with_capacity(order.len());
    let mut total = T::zero();

    for &e in order {
        if prefix.contains(e) {
            return Err(Error::InvalidArgument(format!(
                "element {e} repeated in order"
            )));
        }
        prefix = prefix.with(e);
        let xs = &x;
        let h = FnSetFunction::new(prefix, |u: Subset| {
            f.eval(u) - u.iter().map(|k| xs[k].clone()).sum::<T>()
        });
        let res = sfm_min(&h, Subset::singleton(e), Subset::EMPTY, backend)?;
        x[e] = res.value.clone();
        total = total + res.value.clone();
        increments.push((e, res.value));

        let tight = res.minimal;
        let mut merged = tight;
        blocks.retain(|&b| {
            if b.intersects(tight) {
                merged = merged | b;
                false
            } else {
                true
            }
        });
        blocks.push(merged);
    }
    Ok(TruncationChain {
        value: total,
        partition: Partition::new(blocks)?,
        increments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Rational;

    /// Each block costs 1/2 plus its size, so one block is cheapest.
    #[test]
    fn positive_offset_prefers_one_block() {
        let f = FnSetFunction::new(Subset::full(4), |s: Subset| {
            if s.is_empty() {
                Rational::from_integer(0)
            } else {
                Rational::new(1, 2) + Rational::from_integer(s.len() as i128)
            }
        });
        let e = truncation_by_enumeration(&f, Subset::full(4)).unwrap();
        assert_eq!(e.value, Rational::new(9, 2));
        assert_eq!(e.partition, Partition::new(vec![Subset::full(4)]).unwrap());
        let i = truncation_incremental(&f, &[0, 1, 2, 3], SfmBackend::Exhaustive).unwrap();
        assert_eq!(i.value, e.value);
        assert_eq!(i.partition, e.partition);
    }

    #[test]
    fn negative_offset_prefers_singletons() {
        let f = FnSetFunction::new(Subset::full(3), |s: Subset| {
            if s.is_empty() {
                Rational::from_integer(0)
            } else {
                Rational::from_integer(s.len() as i128 - 1)
            }
        });
        // Every partition of a 3-set into blocks costs 3 - |P|.
        let e = truncation_by_enumeration(&f, Subset::full(3)).unwrap();
        assert_eq!(e.value, Rational::from_integer(0));
        assert_eq!(e.partition, Partition::singletons(Subset::full(3)));
        let i = truncation_incremental(&f, &[2, 0, 1], SfmBackend::MinNorm).unwrap();
        assert_eq!(i.value, e.value);
        assert_eq!(i.partition, e.partition);
    }

    #[test]
    fn repeated_element_is_rejected() {
        let f = FnSetFunction::new(Subset::full(2), |_| Rational::from_integer(0));
        assert!(truncation_incremental(&f, &[0, 0], SfmBackend::Exhaustive).is_err());
    }
}
