use smallvec::SmallVec;

/// A fixed-universe bitset over slot indices `0..universe`.
///
/// Teams and relations are both stored as a `SlotSet` over the lexicographic
/// index of their tuples, so subset tests, unions and hashing are word
/// operations.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct SlotSet {
    universe: usize,
    words: SmallVec<[u64; 4]>,
}

fn word_count(universe: usize) -> usize {
    universe.div_ceil(64)
}

impl SlotSet {
    pub fn new(universe: usize) -> Self {
        SlotSet {
            universe,
            words: SmallVec::from_elem(0, word_count(universe)),
        }
    }

    pub fn full(universe: usize) -> Self {
        let mut set = Self::new(universe);
        for i in 0..set.words.len() {
            set.words[i] = u64::MAX;
        }
        set.trim();
        set
    }

    /// Builds a set from the low bits of `mask`. Panics if `universe > 64`.
    pub fn from_mask(universe: usize, mask: u64) -> Self {
        assert!(universe <= 64, "mask form needs at most 64 slots");
        let mut set = Self::new(universe);
        if universe > 0 {
            set.words[0] = mask;
            set.trim();
        }
        set
    }

    pub fn from_slots(universe: usize, slots: impl IntoIterator<Item = usize>) -> Self {
        let mut set = Self::new(universe);
        for s in slots {
            set.insert(s);
        }
        set
    }

    fn trim(&mut self) {
        let rem = self.universe % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    /// Low 64 bits as a mask, when the universe fits.
    pub fn as_mask(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    #[inline]
    pub fn contains(&self, slot: usize) -> bool {
        slot < self.universe && self.words[slot / 64] >> (slot % 64) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, slot: usize) {
        assert!(slot < self.universe, "slot {slot} outside universe {}", self.universe);
        self.words[slot / 64] |= 1 << (slot % 64);
    }

    #[inline]
    pub fn remove(&mut self, slot: usize) {
        if slot < self.universe {
            self.words[slot / 64] &= !(1 << (slot % 64));
        }
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let bit = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + bit)
                }
            })
        })
    }

    fn check_universe(&self, other: &SlotSet) {
        assert_eq!(self.universe, other.universe, "slot sets over different universes");
    }

    pub fn union(&self, other: &SlotSet) -> SlotSet {
        self.check_universe(other);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        out
    }

    pub fn intersection(&self, other: &SlotSet) -> SlotSet {
        self.check_universe(other);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
        out
    }

    pub fn difference(&self, other: &SlotSet) -> SlotSet {
        self.check_universe(other);
        let mut out = self.clone();
        for (a, b) in out.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
        out
    }

    pub fn is_subset(&self, other: &SlotSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &SlotSet) -> bool {
        self.check_universe(other);
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }
}


/// Iterates over all submasks of `mask` (including `mask` and 0), decreasing.
pub(crate) fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}
