//! Finite integer domains and set-variable bounds.
//!
//! Everything here is a bitset over a contiguous window of small integers.
//! The window grows on insertion, so sets built from arbitrary values work,
//! but the representation is only sensible for dense, small universes.

use std::fmt;

/// An integer value. Domains and set elements are made of these.
pub type Value = i64;

/// A finite set of values stored as a bitset with an offset.
#[derive(Clone, Default)]
pub struct ValueSet {
    lo: Value,
    words: Vec<u64>,
    len: usize,
}

impl ValueSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// The interval `lo..=hi` (empty when `hi < lo`).
    pub fn interval(lo: Value, hi: Value) -> Self {
        let mut set = Self::with_window(lo, hi);
        if hi >= lo {
            for v in lo..=hi {
                set.insert(v);
            }
        }
        set
    }

    /// An empty set whose storage already covers `lo..=hi`.
    pub fn with_window(lo: Value, hi: Value) -> Self {
        let width = if hi >= lo { (hi - lo + 1) as usize } else { 0 };
        Self {
            lo,
            words: vec![0; width.div_ceil(64)],
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    fn slot(&self, v: Value) -> Option<(usize, u64)> {
        if v < self.lo {
            return None;
        }
        let off = (v - self.lo) as usize;
        let w = off / 64;
        if w >= self.words.len() {
            return None;
        }
        Some((w, 1u64 << (off % 64)))
    }

    #[inline]
    pub fn contains(&self, v: Value) -> bool {
        match self.slot(v) {
            Some((w, bit)) => self.words[w] & bit != 0,
            None => false,
        }
    }

    fn grow_to(&mut self, v: Value) {
        if self.words.is_empty() {
            self.lo = v;
            self.words.push(0);
            return;
        }
        if v < self.lo {
            let extra = ((self.lo - v) as usize).div_ceil(64);
            let mut words = vec![0u64; extra];
            words.extend_from_slice(&self.words);
            self.words = words;
            self.lo -= (extra * 64) as Value;
        }
        let off = (v - self.lo) as usize;
        if off / 64 >= self.words.len() {
            self.words.resize(off / 64 + 1, 0);
        }
    }

    /// Returns true when the value was not already present.
    pub fn insert(&mut self, v: Value) -> bool {
        if self.slot(v).is_none() {
            self.grow_to(v);
        }
        let (w, bit) = self.slot(v).expect("window covers value after growth");
        if self.words[w] & bit != 0 {
            return false;
        }
        self.words[w] |= bit;
        self.len += 1;
        true
    }

    /// Returns true when the value was present.
    pub fn remove(&mut self, v: Value) -> bool {
        match self.slot(v) {
            Some((w, bit)) if self.words[w] & bit != 0 => {
                self.words[w] &= !bit;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
        self.len = 0;
    }

    pub fn min(&self) -> Option<Value> {
        self.next_from(self.lo)
    }

    pub fn max(&self) -> Option<Value> {
        self.prev_from(self.lo + (self.words.len() * 64) as Value - 1)
    }

    /// Smallest member `>= v`.
    pub fn next_from(&self, v: Value) -> Option<Value> {
        if self.len == 0 {
            return None;
        }
        let start = if v < self.lo { 0 } else { (v - self.lo) as usize };
        let mut w = start / 64;
        if w >= self.words.len() {
            return None;
        }
        let mut word = self.words[w] & (!0u64 << (start % 64));
        loop {
            if word != 0 {
                return Some(self.lo + (w * 64) as Value + word.trailing_zeros() as Value);
            }
            w += 1;
            if w >= self.words.len() {
                return None;
            }
            word = self.words[w];
        }
    }

    /// Largest member `<= v`.
    pub fn prev_from(&self, v: Value) -> Option<Value> {
        if self.len == 0 || v < self.lo {
            return None;
        }
        let top = self.lo + (self.words.len() * 64) as Value - 1;
        let v = v.min(top);
        let off = (v - self.lo) as usize;
        let mut w = off / 64;
        let shift = 63 - (off % 64);
        let mut word = (self.words[w] << shift) >> shift;
        loop {
            if word != 0 {
                return Some(self.lo + (w * 64) as Value + (63 - word.leading_zeros()) as Value);
            }
            if w == 0 {
                return None;
            }
            w -= 1;
            word = self.words[w];
        }
    }

    pub fn iter(&self) -> Iter<'_> {
        Iter {
            set: self,
            word: 0,
            bits: self.words.first().copied().unwrap_or(0),
        }
    }

    pub fn to_vec(&self) -> Vec<Value> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.len <= other.len && self.iter().all(|v| other.contains(v))
    }

    pub fn intersects(&self, other: &ValueSet) -> bool {
        let (small, big) = if self.len <= other.len { (self, other) } else { (other, self) };
        small.iter().any(|v| big.contains(v))
    }

    pub fn union_with(&mut self, other: &ValueSet) {
        for v in other.iter() {
            self.insert(v);
        }
    }

    pub fn intersect_with(&mut self, other: &ValueSet) {
        let doomed: Vec<Value> = self.iter().filter(|v| !other.contains(*v)).collect();
        for v in doomed {
            self.remove(v);
        }
    }

    pub fn subtract(&mut self, other: &ValueSet) {
        let doomed: Vec<Value> = self.iter().filter(|v| other.contains(*v)).collect();
        for v in doomed {
            self.remove(v);
        }
    }

    /// Number of members inside `lo..=hi`.
    pub fn count_in(&self, lo: Value, hi: Value) -> usize {
        let mut n = 0;
        let mut cur = self.next_from(lo);
        while let Some(v) = cur {
            if v > hi {
                break;
            }
            n += 1;
            cur = self.next_from(v + 1);
        }
        n
    }
}

impl PartialEq for ValueSet {
    fn eq(&self, other: &Self) -> bool {
        self.len == other.len && self.iter().all(|v| other.contains(v))
    }
}

impl Eq for ValueSet {}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

impl FromIterator<Value> for ValueSet {
    fn from_iter<I: IntoIterator<Item = Value>>(iter: I) -> Self {
        let mut set = ValueSet::new();
        for v in iter {
            set.insert(v);
        }
        set
    }
}

impl<'a> IntoIterator for &'a ValueSet {
    type Item = Value;
    type IntoIter = Iter<'a>;
    fn into_iter(self) -> Iter<'a> {
        self.iter()
    }
}

pub struct Iter<'a> {
    set: &'a ValueSet,
    word: usize,
    bits: u64,
}

impl Iterator for Iter<'_> {
    type Item = Value;

    fn next(&mut self) -> Option<Value> {
        loop {
            if self.bits != 0 {
                let tz = self.bits.trailing_zeros();
                self.bits &= self.bits - 1;
                return Some(self.set.lo + (self.word * 64) as Value + tz as Value);
            }
            self.word += 1;
            if self.word >= self.set.words.len() {
                return None;
            }
            self.bits = self.set.words[self.word];
        }
    }
}

/// Domain of an integer variable with cached bounds and size.
#[derive(Clone, PartialEq, Eq)]
pub struct IntDomain {
    values: ValueSet,
    min: Value,
    max: Value,
}

impl IntDomain {
    pub fn new(values: ValueSet) -> Self {
        let min = values.min().unwrap_or(0);
        let max = values.max().unwrap_or(-1);
        Self { values, min, max }
    }

    pub fn interval(lo: Value, hi: Value) -> Self {
        Self::new(ValueSet::interval(lo, hi))
    }

    #[inline]
    pub fn min(&self) -> Value {
        self.min
    }

    #[inline]
    pub fn max(&self) -> Value {
        self.max
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn contains(&self, v: Value) -> bool {
        self.values.contains(v)
    }

    pub fn is_fixed(&self) -> bool {
        self.values.len() == 1
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self) -> Option<Value> {
        self.is_fixed().then_some(self.min)
    }

    pub fn values(&self) -> &ValueSet {
        &self.values
    }

    pub fn iter(&self) -> Iter<'_> {
        self.values.iter()
    }

    pub(crate) fn remove(&mut self, v: Value) -> bool {
        if !self.values.remove(v) {
            return false;
        }
        if !self.values.is_empty() {
            if v == self.min {
                self.min = self.values.next_from(v).expect("non-empty");
            }
            if v == self.max {
                self.max = self.values.prev_from(v).expect("non-empty");
            }
        }
        true
    }

    pub(crate) fn restore(&mut self, v: Value) {
        let was_empty = self.values.is_empty();
        self.values.insert(v);
        if was_empty {
            self.min = v;
            self.max = v;
        } else {
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
    }
}

impl fmt::Debug for IntDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.values)
    }
}

/// Lower and upper bound of a set variable: `lb ⊆ S ⊆ ub`.
#[derive(Clone, PartialEq, Eq)]
pub struct SetBounds {
    pub(crate) lb: ValueSet,
    pub(crate) ub: ValueSet,
}

impl SetBounds {
    /// Builds bounds; `lb` is folded into `ub` so the invariant holds.
    pub fn new(lb: ValueSet, mut ub: ValueSet) -> Self {
        ub.union_with(&lb);
        Self { lb, ub }
    }

    pub fn lb(&self) -> &ValueSet {
        &self.lb
    }

    pub fn ub(&self) -> &ValueSet {
        &self.ub
    }

    pub fn is_fixed(&self) -> bool {
        self.lb.len() == self.ub.len()
    }

    /// Elements in `ub \ lb`.
    pub fn undecided(&self) -> impl Iterator<Item = Value> + '_ {
        self.ub.iter().filter(|v| !self.lb.contains(*v))
    }
}

impl fmt::Debug for SetBounds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ⊆ S ⊆ {}", self.lb, self.ub)
    }
}
