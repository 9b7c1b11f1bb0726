//! Variable store with a value-level trail.
//!
//! Every mutation records one undo entry per value it moves, and one event
//! describing the delta. A mutation that would empty a domain or break
//! `lb ⊆ ub` is not applied; the store is flagged failed instead and stays
//! failed until it is rolled back.

use std::fmt;

use thiserror::Error;

use crate::domain::{IntDomain, SetBounds, Value, ValueSet};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVar(pub u32);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetVar(pub u32);

impl IntVar {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

impl SetVar {
    #[inline]
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

/// A single change to the store.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Event {
    IntRemoved(IntVar, Value),
    IntFixed(IntVar, Value),
    SetIncluded(SetVar, Value),
    SetExcluded(SetVar, Value),
}

/// The store (or a propagator acting on it) detected that no solution exists
/// below the current node.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Error)]
#[error("inconsistent store")]
pub struct Inconsistency;

/// Result of a store mutation: `Ok(true)` when something changed,
/// `Ok(false)` for a no-op.
pub type Outcome = Result<bool, Inconsistency>;

/// Token returned by [`Store::checkpoint`].
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Level(usize);

#[derive(Copy, Clone, Debug)]
enum Undo {
    Int(IntVar, Value),
    Lb(SetVar, Value),
    Ub(SetVar, Value),
}

#[derive(Clone, Default)]
pub struct Store {
    ints: Vec<IntDomain>,
    sets: Vec<SetBounds>,
    int_names: Vec<String>,
    set_names: Vec<String>,
    trail: Vec<Undo>,
    levels: Vec<usize>,
    events: Vec<Event>,
    failed: bool,
    universe: Option<(Value, Value)>,
    removals: u64,
}

/// Plain copy of all domains and bounds, for comparisons in tests and oracles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snapshot {
    pub ints: Vec<IntDomain>,
    pub sets: Vec<SetBounds>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares the global value universe. The Range dummy value sits just
    /// above it.
    pub fn set_universe(&mut self, lo: Value, hi: Value) {
        self.universe = Some((lo, hi));
    }

    /// The declared universe, or the hull of every domain and bound.
    pub fn universe(&self) -> (Value, Value) {
        if let Some(u) = self.universe {
            return u;
        }
        let mut lo = Value::MAX;
        let mut hi = Value::MIN;
        for d in &self.ints {
            if !d.is_empty() {
                lo = lo.min(d.min());
                hi = hi.max(d.max());
            }
        }
        for s in &self.sets {
            if let (Some(a), Some(b)) = (s.ub.min(), s.ub.max()) {
                lo = lo.min(a);
                hi = hi.max(b);
            }
        }
        if lo > hi {
            (0, 0)
        } else {
            (lo, hi)
        }
    }

    pub fn declared_universe(&self) -> Option<(Value, Value)> {
        self.universe
    }

    pub fn new_int(&mut self, name: impl Into<String>, values: ValueSet) -> IntVar {
        let id = IntVar(self.ints.len() as u32);
        self.ints.push(IntDomain::new(values));
        self.int_names.push(name.into());
        id
    }

    pub fn new_int_range(&mut self, name: impl Into<String>, lo: Value, hi: Value) -> IntVar {
        self.new_int(name, ValueSet::interval(lo, hi))
    }

    pub fn new_set(&mut self, name: impl Into<String>, lb: ValueSet, ub: ValueSet) -> SetVar {
        let id = SetVar(self.sets.len() as u32);
        self.sets.push(SetBounds::new(lb, ub));
        self.set_names.push(name.into());
        id
    }

    pub fn num_ints(&self) -> usize {
        self.ints.len()
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn int_vars(&self) -> impl Iterator<Item = IntVar> {
        (0..self.ints.len() as u32).map(IntVar)
    }

    pub fn set_vars(&self) -> impl Iterator<Item = SetVar> {
        (0..self.sets.len() as u32).map(SetVar)
    }

    #[inline]
    pub fn dom(&self, x: IntVar) -> &IntDomain {
        &self.ints[x.idx()]
    }

    #[inline]
    pub fn bounds(&self, s: SetVar) -> &SetBounds {
        &self.sets[s.idx()]
    }

    #[inline]
    pub fn lb(&self, s: SetVar) -> &ValueSet {
        &self.sets[s.idx()].lb
    }

    #[inline]
    pub fn ub(&self, s: SetVar) -> &ValueSet {
        &self.sets[s.idx()].ub
    }

    pub fn int_name(&self, x: IntVar) -> &str {
        &self.int_names[x.idx()]
    }

    pub fn set_name(&self, s: SetVar) -> &str {
        &self.set_names[s.idx()]
    }

    pub fn find_int(&self, name: &str) -> Option<IntVar> {
        self.int_names.iter().position(|n| n == name).map(|i| IntVar(i as u32))
    }

    pub fn find_set(&self, name: &str) -> Option<SetVar> {
        self.set_names.iter().position(|n| n == name).map(|i| SetVar(i as u32))
    }

    pub fn is_failed(&self) -> bool {
        self.failed
    }

    /// Marks the store failed, for propagators that detect inconsistency
    /// without a failing mutation.
    pub fn fail(&mut self) -> Inconsistency {
        self.failed = true;
        Inconsistency
    }

    /// Total number of integer values removed so far (not undone by rollback).
    pub fn removals(&self) -> u64 {
        self.removals
    }

    pub fn all_fixed(&self) -> bool {
        self.ints.iter().all(|d| d.is_fixed()) && self.sets.iter().all(|s| s.is_fixed())
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            ints: self.ints.clone(),
            sets: self.sets.clone(),
        }
    }

    /// Events produced since the last call.
    pub fn take_events(&mut self) -> Vec<Event> {
        std::mem::take(&mut self.events)
    }

    pub(crate) fn drain_events_into(&mut self, out: &mut Vec<Event>) {
        out.append(&mut self.events);
    }

    pub fn checkpoint(&mut self) -> Level {
        debug_assert!(!self.failed, "checkpoint on a failed store");
        self.levels.push(self.trail.len());
        Level(self.levels.len() - 1)
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    /// Restores the state captured by `level` and discards newer checkpoints.
    pub fn rollback(&mut self, level: Level) {
        let mark = self.levels[level.0];
        while self.trail.len() > mark {
            match self.trail.pop().expect("trail above mark") {
                Undo::Int(x, v) => self.ints[x.idx()].restore(v),
                Undo::Lb(s, v) => {
                    self.sets[s.idx()].lb.remove(v);
                }
                Undo::Ub(s, v) => {
                    self.sets[s.idx()].ub.insert(v);
                }
            }
        }
        self.levels.truncate(level.0);
        self.events.clear();
        self.failed = false;
    }

    /// Removes `v` from `D(x)`.
    pub fn remove(&mut self, x: IntVar, v: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        let d = &mut self.ints[x.idx()];
        if !d.contains(v) {
            return Ok(false);
        }
        if d.size() == 1 {
            return Err(self.fail());
        }
        d.remove(v);
        let fixed = d.value();
        self.trail.push(Undo::Int(x, v));
        self.events.push(Event::IntRemoved(x, v));
        if let Some(w) = fixed {
            self.events.push(Event::IntFixed(x, w));
        }
        self.removals += 1;
        Ok(true)
    }

    /// Restricts `D(x)` to `{v}`.
    pub fn assign(&mut self, x: IntVar, v: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        if !self.dom(x).contains(v) {
            return Err(self.fail());
        }
        let others: Vec<Value> = self.dom(x).iter().filter(|&w| w != v).collect();
        for w in &others {
            self.remove(x, *w)?;
        }
        Ok(!others.is_empty())
    }

    /// Removes every value of `D(x)` below `lo`.
    pub fn remove_below(&mut self, x: IntVar, lo: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        if self.dom(x).max() < lo {
            return Err(self.fail());
        }
        let mut changed = false;
        while self.dom(x).min() < lo {
            let m = self.dom(x).min();
            changed |= self.remove(x, m)?;
        }
        Ok(changed)
    }

    /// Removes every value of `D(x)` above `hi`.
    pub fn remove_above(&mut self, x: IntVar, hi: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        if self.dom(x).min() > hi {
            return Err(self.fail());
        }
        let mut changed = false;
        while self.dom(x).max() > hi {
            let m = self.dom(x).max();
            changed |= self.remove(x, m)?;
        }
        Ok(changed)
    }

    /// Intersects `D(x)` with `keep`.
    pub fn restrict(&mut self, x: IntVar, keep: &ValueSet) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        if !self.dom(x).values().intersects(keep) {
            return Err(self.fail());
        }
        let doomed: Vec<Value> = self.dom(x).iter().filter(|v| !keep.contains(*v)).collect();
        for v in &doomed {
            self.remove(x, *v)?;
        }
        Ok(!doomed.is_empty())
    }

    /// Adds `v` to `lb(s)`.
    pub fn include(&mut self, s: SetVar, v: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        let b = &mut self.sets[s.idx()];
        if b.lb.contains(v) {
            return Ok(false);
        }
        if !b.ub.contains(v) {
            return Err(self.fail());
        }
        b.lb.insert(v);
        self.trail.push(Undo::Lb(s, v));
        self.events.push(Event::SetIncluded(s, v));
        Ok(true)
    }

    /// Removes `v` from `ub(s)`.
    pub fn exclude(&mut self, s: SetVar, v: Value) -> Outcome {
        if self.failed {
            return Err(Inconsistency);
        }
        let b = &mut self.sets[s.idx()];
        if !b.ub.contains(v) {
            return Ok(false);
        }
        if b.lb.contains(v) {
            return Err(self.fail());
        }
        b.ub.remove(v);
        self.trail.push(Undo::Ub(s, v));
        self.events.push(Event::SetExcluded(s, v));
        Ok(true)
    }

    /// Applies `direction` to element `v` of `s`.
    pub fn tighten_set(&mut self, s: SetVar, v: Value, direction: Direction) -> Outcome {
        match direction {
            Direction::Include => self.include(s, v),
            Direction::Exclude => self.exclude(s, v),
        }
    }

    /// Intersects `ub(s)` with `keep`.
    pub fn restrict_ub(&mut self, s: SetVar, keep: &ValueSet) -> Outcome {
        let doomed: Vec<Value> = self.ub(s).iter().filter(|v| !keep.contains(*v)).collect();
        let mut changed = false;
        for v in doomed {
            changed |= self.exclude(s, v)?;
        }
        Ok(changed)
    }

    /// Adds every member of `add` to `lb(s)`.
    pub fn include_all(&mut self, s: SetVar, add: &ValueSet) -> Outcome {
        let mut changed = false;
        for v in add.iter() {
            changed |= self.include(s, v)?;
        }
        Ok(changed)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    Include,
    Exclude,
}

impl fmt::Debug for Store {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, d) in self.ints.iter().enumerate() {
            writeln!(f, "{} ∈ {:?}", self.int_names[i], d)?;
        }
        for (i, s) in self.sets.iter().enumerate() {
            writeln!(f, "{}: {:?}", self.set_names[i], s)?;
        }
        if self.failed {
            writeln!(f, "(failed)")?;
        }
        Ok(())
    }
}

/// Rebuilds a snapshot by replaying events on top of an earlier one.
pub fn replay(base: &Snapshot, events: &[Event]) -> Snapshot {
    let mut out = base.clone();
    for e in events {
        match *e {
            Event::IntRemoved(x, v) => {
                out.ints[x.idx()].remove(v);
            }
            Event::IntFixed(..) => {}
            Event::SetIncluded(s, v) => {
                out.sets[s.idx()].lb.insert(v);
            }
            Event::SetExcluded(s, v) => {
                out.sets[s.idx()].ub.remove(v);
            }
        }
    }
    out
}
