use num_rational::BigRational;
use num_traits::Signed;

use super::{min_norm_base, SetFunction, EXHAUSTIVE_LIMIT};
use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::value::Value;

/// Algorithm used by [`sfm_min`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SfmBackend {
    /// Enumerate the whole lattice.
    #[default]
    Exhaustive,
    /// Exact minimum-norm-point algorithm; minimal and maximal minimizers
    /// are found by re-solving with each element forced out or in.
    MinNorm,
}

/// Minimum of a set function over a lattice, with the smallest and largest
/// minimizers.
#[derive(Clone, Debug, PartialEq)]
pub struct SfmResult<T> {
    pub value: T,
    pub minimal: Subset,
    pub maximal: Subset,
}

/// Minimizes `f` over `{X : forced_in ⊆ X ⊆ ground ∖ forced_out}`.
///
/// `f` must be submodular on that lattice.
pub fn sfm_min<T: Value>(
    f: &impl SetFunction<T>,
    forced_in: Subset,
    forced_out: Subset,
    backend: SfmBackend,
) -> Result<SfmResult<T>> {
    let ground = f.ground();
    if forced_in.intersects(forced_out) || !forced_in.is_subset_of(ground) {
        return Err(Error::InfeasibleLattice);
    }
    let free = ground - forced_in - forced_out;
    match backend {
        SfmBackend::Exhaustive => exhaustive(f, forced_in, free),
        SfmBackend::MinNorm => min_norm(f, forced_in, free),
    }
}

fn exhaustive<T: Value>(
    f: &impl SetFunction<T>,
    base: Subset,
    free: Subset,
) -> Result<SfmResult<T>> {
    if free.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::TooLarge {
            op: "exhaustive SFM",
            size: free.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let values: Vec<(Subset, T)> = free
        .subsets()
        .map(|y| {
            let x = base | y;
            (x, f.eval(x))
        })
        .collect();
    let min = values
        .iter()
        .map(|(_, v)| v)
        .fold(None::<&T>, |best, v| match best {
            Some(b) if !(v < b) => Some(b),
            _ => Some(v),
        })
        .expect("lattice is nonempty")
        .clone();
    let mut minimal = base | free;
    let mut maximal = base;
    for (x, v) in &values {
        if v.tol_eq(&min) {
            minimal = minimal & *x;
            maximal = maximal | *x;
        }
    }
    Ok(SfmResult {
        value: min,
        minimal,
        maximal,
    })
}

/// One minimum-norm solve on `{base ∪ Y : Y ⊆ free}`, returning a minimizer.
fn min_norm_minimizer<T: Value>(
    f: &impl SetFunction<T>,
    base: Subset,
    free: Subset,
) -> Result<Subset> {
    let offset = f.eval(base).to_big();
    let elements: Vec<usize> = free.iter().collect();
    let g = |y: Subset| -> BigRational { f.eval(base | y).to_big() - &offset };
    let x = min_norm_base(&elements, g)?;
    Ok(elements
        .iter()
        .zip(&x)
        .filter(|(_, v)| v.is_negative())
        .fold(base, |s, (&e, _)| s.with(e)))
}

fn min_norm<T: Value>(
    f: &impl SetFunction<T>,
    base: Subset,
    free: Subset,
) -> Result<SfmResult<T>> {
    let argmin = min_norm_minimizer(f, base, free)?;
    let value = f.eval(argmin);

    let mut minimal = base;
    let mut maximal = base;
    for e in free.iter() {
        // e belongs to every minimizer iff excluding it raises the minimum.
        let without = f.eval(min_norm_minimizer(f, base, free.without(e))?);
        if value.tol_lt(&without) {
            minimal = minimal.with(e);
        }
        // e belongs to some minimizer iff including it keeps the minimum.
        let with = f.eval(min_norm_minimizer(f, base.with(e), free.without(e))?);
        if with.tol_eq(&value) {
            maximal = maximal.with(e);
        }
    }
    Ok(SfmResult {
        value,
        minimal,
        maximal,
    })
}
