use crate::error::{Error, Result};
use crate::subset::Subset;
use crate::value::Value;

/// Per-user rates on a support set of user positions.
///
/// Storage is dense over all `n` users of the instance; entries outside the
/// support are zero and never read.
#[derive(Clone, Debug, PartialEq)]
pub struct RateVector<T> {
    support: Subset,
    values: Vec<T>,
}

impl<T: Value> RateVector<T> {
    /// Zero vector on `support`, for an instance with `n` users.
    pub fn zeros(n: usize, support: Subset) -> Self {
        RateVector {
            support,
            values: vec![T::zero(); n],
        }
    }

    /// Vector supported on all `values.len()` users.
    pub fn from_values(values: Vec<T>) -> Self {
        RateVector {
            support: Subset::full(values.len()),
            values,
        }
    }

    /// Vector on `support` with one value per support element, in
    /// increasing position order.
    pub fn on_support(n: usize, support: Subset, values: Vec<T>) -> Result<Self> {
        if values.len() != support.len() {
            return Err(Error::InvalidArgument(format!(
                "{} values for a support of size {}",
                values.len(),
                support.len()
            )));
        }
        let mut r = Self::zeros(n, support);
        for (i, v) in support.iter().zip(values) {
            r.values[i] = v;
        }
        Ok(r)
    }

    pub fn support(&self) -> Subset {
        self.support
    }

    /// Number of users in the instance (not the support size).
    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn get(&self, i: usize) -> &T {
        &self.values[i]
    }

    pub fn set(&mut self, i: usize, value: T) {
        debug_assert!(self.support.contains(i));
        self.values[i] = value;
    }

    /// `r(X)` for `X` within the support.
    pub fn sum(&self, set: Subset) -> T {
        (set & self.support)
            .iter()
            .map(|i| self.values[i].clone())
            .sum()
    }

    pub fn total(&self) -> T {
        self.sum(self.support)
    }

    /// `(position, value)` over the support.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &T)> + '_ {
        self.support.iter().map(move |i| (i, &self.values[i]))
    }

    /// Values over the support, in increasing position order.
    pub fn support_values(&self) -> Vec<T> {
        self.iter().map(|(_, v)| v.clone()).collect()
    }

    /// `r ⊕ r'` for vectors on disjoint supports.
    pub fn direct_sum(&self, other: &RateVector<T>) -> Result<RateVector<T>> {
        if self.support.intersects(other.support) || self.dimension() != other.dimension() {
            return Err(Error::Overlap);
        }
        let mut out = self.clone();
        out.support = self.support | other.support;
        for (i, v) in other.iter() {
            out.values[i] = v.clone();
        }
        Ok(out)
    }

    /// Restriction to a subset of the support.
    pub fn restrict(&self, set: Subset) -> RateVector<T> {
        let mut out = RateVector::zeros(self.dimension(), set & self.support);
        for (i, v) in self.iter() {
            if set.contains(i) {
                out.values[i] = v.clone();
            }
        }
        out
    }

    /// `Σ |r_i − r'_i|` over the common support.
    pub fn l1_distance(&self, other: &RateVector<T>) -> T {
        (self.support & other.support)
            .iter()
            .map(|i| (self.values[i].clone() - other.values[i].clone()).abs())
            .sum()
    }

    /// Whether the vectors agree (within tolerance for floats).
    pub fn tol_eq(&self, other: &RateVector<T>) -> bool {
        self.support == other.support
            && self
                .iter()
                .all(|(i, v)| v.tol_eq(&other.values[i]))
    }

    pub fn to_f64(&self) -> RateVector<f64> {
        RateVector {
            support: self.support,
            values: self.values.iter().map(Value::to_f64).collect(),
        }
    }

    /// Mean of a nonempty list of vectors on the same support.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a RateVector<T>>) -> Option<RateVector<T>> {
        let mut iter = vectors.into_iter();
        let first = iter.next()?.clone();
        let mut count = 1i64;
        let mut acc = first;
        for v in iter {
            for i in acc.support.iter() {
                acc.values[i] = acc.values[i].clone() + v.values[i].clone();
            }
            count += 1;
        }
        let denom = T::from_int(count);
        for i in acc.support.iter() {
            acc.values[i] = acc.values[i].clone() / denom.clone();
        }
        Some(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::Rational;

    fn q(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn direct_sum_follows_positions() {
        // (r1, r3) = (3, 7) and (r2, r5) = (2, 4) fuse to (3, 2, 7, 4).
        let a = RateVector::on_support(5, Subset::from_positions([0, 2]), vec![q(3, 1), q(7, 1)])
            .unwrap();
        let b = RateVector::on_support(5, Subset::from_positions([1, 4]), vec![q(2, 1), q(4, 1)])
            .unwrap();
        let ab = a.direct_sum(&b).unwrap();
        assert_eq!(ab.support(), Subset::from_positions([0, 1, 2, 4]));
        assert_eq!(
            ab.support_values(),
            vec![q(3, 1), q(2, 1), q(7, 1), q(4, 1)]
        );
        assert!(a.direct_sum(&a).is_err());
    }

    #[test]
    fn sums_and_means() {
        let a = RateVector::from_values(vec![q(1, 1), q(1, 2), q(0, 1)]);
        let b = RateVector::from_values(vec![q(2, 1), q(1, 2), q(1, 1)]);
        assert_eq!(a.total(), q(3, 2));
        assert_eq!(a.sum(Subset::from_positions([0, 1])), q(3, 2));
        assert_eq!(a.l1_distance(&b), q(2, 1));
        let m = RateVector::mean([&a, &b]).unwrap();
        assert_eq!(m.support_values(), vec![q(3, 2), q(1, 2), q(1, 2)]);
        assert!(RateVector::<Rational>::mean([]).is_none());
    }
}
