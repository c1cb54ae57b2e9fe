use crate::error::{Error, Result};
use crate::subset::Subset;

/// A set of disjoint nonempty blocks. Blocks are kept sorted by their
/// smallest element, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Partition {
    blocks: Vec<Subset>,
}

impl Partition {
    pub fn new(mut blocks: Vec<Subset>) -> Result<Self> {
        let mut seen = Subset::EMPTY;
        for &b in &blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block in partition".into()));
            }
            if b.intersects(seen) {
                return Err(Error::InvalidArgument("overlapping blocks in partition".into()));
            }
            seen = seen | b;
        }
        blocks.sort_by_key(|b| b.first());
        Ok(Partition { blocks })
    }

    /// Partition of `set` into singletons.
    pub fn singletons(set: Subset) -> Self {
        Partition {
            blocks: set.iter().map(Subset::singleton).collect(),
        }
    }

    pub fn blocks(&self) -> &[Subset] {
        &self.blocks
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Union of the blocks.
    pub fn ground(&self) -> Subset {
        self.blocks.iter().fold(Subset::EMPTY, |acc, &b| acc | b)
    }

    pub fn block_of(&self, element: usize) -> Option<Subset> {
        self.blocks.iter().copied().find(|b| b.contains(element))
    }

    /// Whether every block of `self` lies inside a block of `other`.
    pub fn refines(&self, other: &Partition) -> bool {
        self.blocks
            .iter()
            .all(|&b| other.blocks.iter().any(|&c| b.is_subset_of(c)))
    }
}

/// All partitions of `set`, generated from restricted growth strings.
pub fn set_partitions(set: Subset) -> Vec<Partition> {
    let elements: Vec<usize> = set.iter().collect();
    let mut out = Vec::new();
    if elements.is_empty() {
        out.push(Partition { blocks: Vec::new() });
        return out;
    }
    let mut blocks: Vec<Subset> = Vec::with_capacity(elements.len());
    extend(&elements, 0, &mut blocks, &mut out);
    out
}

fn extend(elements: &[usize], k: usize, blocks: &mut Vec<Subset>, out: &mut Vec<Partition>) {
    if k == elements.len() {
        out.push(Partition {
            blocks: blocks.clone(),
        });
        return;
    }
    let e = elements[k];
    for b in 0..blocks.len() {
        blocks[b] = blocks[b].with(e);
        extend(elements, k + 1, blocks, out);
        blocks[b] = blocks[b].without(e);
    }
    blocks.push(Subset::singleton(e));
    extend(elements, k + 1, blocks, out);
    blocks.pop();
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let counts: Vec<usize> = (0..=6)
            .map(|n| set_partitions(Subset::full(n)).len())
            .collect();
        assert_eq!(counts, vec![1, 1, 2, 5, 15, 52, 203]);
    }

    #[test]
    fn generated_partitions_are_valid_and_distinct() {
        let set = Subset::from_positions([1, 3, 4, 6]);
        let parts = set_partitions(set);
        for p in &parts {
            assert_eq!(p.ground(), set);
            assert!(Partition::new(p.blocks().to_vec()).is_ok());
        }
        let unique: std::collections::HashSet<_> = parts.iter().collect();
        assert_eq!(unique.len(), parts.len());
    }

    #[test]
    fn refinement() {
        let fine = Partition::singletons(Subset::full(3));
        let coarse = Partition::new(vec![Subset::from_positions([0, 2]), Subset::singleton(1)])
            .unwrap();
        assert!(fine.refines(&coarse));
        assert!(!coarse.refines(&fine));
        assert!(coarse.refines(&coarse));
        assert_eq!(coarse.block_of(2), Some(Subset::from_positions([0, 2])));
    }

    #[test]
    fn invalid_partitions() {
        assert!(Partition::new(vec![Subset::EMPTY]).is_err());
        assert!(Partition::new(vec![Subset::full(2), Subset::singleton(1)]).is_err());
    }
}
