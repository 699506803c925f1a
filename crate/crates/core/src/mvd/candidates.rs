use crate::geometry::DistOrder;

/// Fixed-capacity list of the best candidates seen so far, kept sorted
/// ascending by `(dist2, id)`.
#[derive(Clone, Debug)]
pub struct CandidateList {
    entries: Vec<DistOrder>,
    capacity: usize,
}

impl CandidateList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "candidate list capacity must be positive");
        CandidateList {
            entries: Vec::with_capacity(capacity + 1),
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Current worst kept candidate.
    pub fn last(&self) -> Option<&DistOrder> {
        self.entries.last()
    }

    pub fn get(&self, rank: usize) -> Option<&DistOrder> {
        self.entries.get(rank)
    }

    /// Sorted insertion. Returns `false` when the candidate is already
    /// present or cannot beat a full list's worst entry.
    pub fn insert(&mut self, cand: DistOrder) -> bool {
        if self.is_full() && cand >= self.entries[self.capacity - 1] {
            return false;
        }
        match self.entries.binary_search(&cand) {
            Ok(_) => false,
            Err(pos) => {
                self.entries.insert(pos, cand);
                self.entries.truncate(self.capacity);
                true
            }
        }
    }

    pub fn as_slice(&self) -> &[DistOrder] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<DistOrder> {
        self.entries
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PointId;
    use proptest::prelude::*;

    fn d(dist2: f64, id: u64) -> DistOrder {
        DistOrder::new(dist2, PointId(id))
    }

    #[test]
    fn keeps_best_and_rejects_duplicates() {
        let mut c = CandidateList::new(2);
        assert!(c.insert(d(3.0, 1)));
        assert!(c.insert(d(1.0, 2)));
        assert!(!c.insert(d(1.0, 2)));
        assert!(!c.insert(d(5.0, 3)));
        assert!(c.insert(d(2.0, 4)));
        assert_eq!(c.as_slice(), &[d(1.0, 2), d(2.0, 4)]);
        // equal distance, larger id loses to the current worst
        assert!(!c.insert(d(2.0, 9)));
        assert!(c.insert(d(2.0, 0)));
        assert_eq!(c.as_slice(), &[d(1.0, 2), d(2.0, 0)]);
    }

    proptest! {
        #[test]
        fn matches_sorted_prefix(cap in 1usize..20, raw in prop::collection::vec((0u8..30, 0u64..40), 0..80)) {
            let mut c = CandidateList::new(cap);
            let mut all: Vec<DistOrder> = Vec::new();
            for (dist, id) in raw {
                let e = d(f64::from(dist), id);
                c.insert(e);
                if !all.contains(&e) {
                    all.push(e);
                }
                prop_assert!(c.len() <= cap);
                prop_assert!(c.as_slice().windows(2).all(|w| w[0] < w[1]));
            }
            all.sort();
            all.truncate(cap);
            prop_assert_eq!(c.as_slice(), all.as_slice());
        }
    }
}
