//! Propagator registry and the event-driven fixpoint loop.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::domain::Value;
use crate::store::{Event, Inconsistency, IntVar, Level, SetVar, Store};

pub type PropId = usize;

/// What a propagator wants to be woken by.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Watch {
    /// Any removal from `D(x)`.
    Int(IntVar),
    /// `x` became fixed.
    IntFixed(IntVar),
    /// Any inclusion into `lb(s)`.
    Included(SetVar),
    /// Any exclusion from `ub(s)`.
    Excluded(SetVar),
    /// Inclusion of one specific element.
    IncludedElem(SetVar, Value),
    /// Exclusion of one specific element.
    ExcludedElem(SetVar, Value),
}

impl Watch {
    fn int(&self) -> Option<IntVar> {
        match *self {
            Watch::Int(x) | Watch::IntFixed(x) => Some(x),
            _ => None,
        }
    }

    fn set(&self) -> Option<SetVar> {
        match *self {
            Watch::Included(s)
            | Watch::Excluded(s)
            | Watch::IncludedElem(s, _)
            | Watch::ExcludedElem(s, _) => Some(s),
            _ => None,
        }
    }
}

/// Queue band. Cheap propagators drain before expensive ones are run.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Priority {
    Cheap = 0,
    Expensive = 1,
}

pub trait Propagator: Send {
    fn name(&self) -> &'static str;

    fn watches(&self) -> Vec<Watch>;

    fn priority(&self) -> Priority {
        Priority::Cheap
    }

    /// Called for every event that matches one of the watches, before the
    /// propagator is queued. Used to accumulate deltas.
    fn notify(&mut self, _event: &Event) {}

    /// Brings the store to this propagator's local fixpoint, or fails.
    fn propagate(&mut self, store: &mut Store) -> Result<(), Inconsistency>;

    /// Called after a rollback; cached state must be treated as stale.
    fn reset(&mut self) {}

    /// An idempotent propagator is not re-queued by its own events.
    fn idempotent(&self) -> bool {
        false
    }

    /// Elementary work units spent so far (membership tests, augmentations).
    fn work(&self) -> u64 {
        0
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("model has no variables")]
    Empty,
    #[error("unknown integer variable {0}")]
    UnknownInt(u32),
    #[error("unknown set variable {0}")]
    UnknownSet(u32),
    #[error("{0}")]
    Malformed(String),
}

/// A store plus the propagators posted on it.
pub struct Model {
    pub store: Store,
    props: Vec<Box<dyn Propagator>>,
    on_int: Vec<Vec<PropId>>,
    on_fixed: Vec<Vec<PropId>>,
    on_incl: Vec<Vec<PropId>>,
    on_excl: Vec<Vec<PropId>>,
    on_incl_elem: HashMap<(SetVar, Value), Vec<PropId>>,
    on_excl_elem: HashMap<(SetVar, Value), Vec<PropId>>,
    queues: [VecDeque<PropId>; 2],
    queued: Vec<bool>,
    runs: Vec<u64>,
    events: Vec<Event>,
    shuffle: Option<ChaCha8Rng>,
    globals: usize,
    /// Static variable order for Lex branching; defaults to declaration order.
    pub decision_vars: Vec<IntVar>,
}

impl Model {
    pub fn new(store: Store) -> Self {
        Self {
            store,
            props: Vec::new(),
            on_int: Vec::new(),
            on_fixed: Vec::new(),
            on_incl: Vec::new(),
            on_excl: Vec::new(),
            on_incl_elem: HashMap::new(),
            on_excl_elem: HashMap::new(),
            queues: [VecDeque::new(), VecDeque::new()],
            queued: Vec::new(),
            runs: Vec::new(),
            events: Vec::new(),
            shuffle: None,
            globals: 0,
            decision_vars: Vec::new(),
        }
    }

    /// Picks queued propagators in random order instead of FIFO.
    pub fn shuffle_queue(&mut self, seed: u64) {
        self.shuffle = Some(ChaCha8Rng::seed_from_u64(seed));
    }

    /// Ordinal for the next global constraint, used to name hidden variables.
    pub fn next_global(&mut self) -> usize {
        self.globals += 1;
        self.globals
    }

    pub fn num_propagators(&self) -> usize {
        self.props.len()
    }

    pub fn propagator(&self, id: PropId) -> &dyn Propagator {
        self.props[id].as_ref()
    }

    pub fn runs(&self, id: PropId) -> u64 {
        self.runs[id]
    }

    pub fn total_runs(&self) -> u64 {
        self.runs.iter().sum()
    }

    pub fn total_work(&self) -> u64 {
        self.props.iter().map(|p| p.work()).sum()
    }

    /// Registers a propagator and schedules its first run.
    pub fn post(&mut self, prop: Box<dyn Propagator>) -> Result<PropId, ModelError> {
        if self.store.num_ints() == 0 && self.store.num_sets() == 0 {
            return Err(ModelError::Empty);
        }
        let watches = prop.watches();
        for w in &watches {
            if let Some(x) = w.int() {
                if x.idx() >= self.store.num_ints() {
                    return Err(ModelError::UnknownInt(x.0));
                }
            }
            if let Some(s) = w.set() {
                if s.idx() >= self.store.num_sets() {
                    return Err(ModelError::UnknownSet(s.0));
                }
            }
        }
        self.on_int.resize(self.store.num_ints(), Vec::new());
        self.on_fixed.resize(self.store.num_ints(), Vec::new());
        self.on_incl.resize(self.store.num_sets(), Vec::new());
        self.on_excl.resize(self.store.num_sets(), Vec::new());
        let id = self.props.len();
        for w in watches {
            let list = match w {
                Watch::Int(x) => &mut self.on_int[x.idx()],
                Watch::IntFixed(x) => &mut self.on_fixed[x.idx()],
                Watch::Included(s) => &mut self.on_incl[s.idx()],
                Watch::Excluded(s) => &mut self.on_excl[s.idx()],
                Watch::IncludedElem(s, v) => self.on_incl_elem.entry((s, v)).or_default(),
                Watch::ExcludedElem(s, v) => self.on_excl_elem.entry((s, v)).or_default(),
            };
            if list.last() != Some(&id) {
                list.push(id);
            }
        }
        self.props.push(prop);
        self.queued.push(false);
        self.runs.push(0);
        self.schedule(id);
        Ok(id)
    }

    fn schedule(&mut self, id: PropId) {
        if !self.queued[id] {
            self.queued[id] = true;
            let band = self.props[id].priority() as usize;
            self.queues[band].push_back(id);
        }
    }

    fn pop(&mut self) -> Option<PropId> {
        if let Some(rng) = self.shuffle.as_mut() {
            let total = self.queues[0].len() + self.queues[1].len();
            if total == 0 {
                return None;
            }
            let k = rng.gen_range(0..total);
            let id = if k < self.queues[0].len() {
                self.queues[0].remove(k)
            } else {
                self.queues[1].remove(k - self.queues[0].len())
            };
            return id;
        }
        self.queues[0].pop_front().or_else(|| self.queues[1].pop_front())
    }

    fn dispatch(&mut self, source: Option<PropId>) {
        self.store.drain_events_into(&mut self.events);
        let events = std::mem::take(&mut self.events);
        let skip = source.filter(|&p| self.props[p].idempotent());
        let mut targets: Vec<PropId> = Vec::new();
        for e in &events {
            targets.clear();
            match *e {
                Event::IntRemoved(x, _) => {
                    if let Some(l) = self.on_int.get(x.idx()) {
                        targets.extend_from_slice(l);
                    }
                }
                Event::IntFixed(x, _) => {
                    if let Some(l) = self.on_fixed.get(x.idx()) {
                        targets.extend_from_slice(l);
                    }
                }
                Event::SetIncluded(s, v) => {
                    if let Some(l) = self.on_incl.get(s.idx()) {
                        targets.extend_from_slice(l);
                    }
                    if let Some(l) = self.on_incl_elem.get(&(s, v)) {
                        targets.extend_from_slice(l);
                    }
                }
                Event::SetExcluded(s, v) => {
                    if let Some(l) = self.on_excl.get(s.idx()) {
                        targets.extend_from_slice(l);
                    }
                    if let Some(l) = self.on_excl_elem.get(&(s, v)) {
                        targets.extend_from_slice(l);
                    }
                }
            }
            for &p in &targets {
                self.props[p].notify(e);
                if Some(p) != skip {
                    self.schedule(p);
                }
            }
        }
        self.events = events;
        self.events.clear();
    }

    /// Runs queued propagators until none is left or one fails. On failure
    /// the queue is emptied and the store stays failed.
    pub fn fixpoint(&mut self) -> Result<(), Inconsistency> {
        if self.store.is_failed() {
            return Err(Inconsistency);
        }
        self.dispatch(None);
        while let Some(id) = self.pop() {
            self.queued[id] = false;
            self.runs[id] += 1;
            let res = self.props[id].propagate(&mut self.store);
            if res.is_err() || self.store.is_failed() {
                self.clear_queue();
                self.store.fail();
                return Err(Inconsistency);
            }
            self.dispatch(Some(id));
        }
        Ok(())
    }

    fn clear_queue(&mut self) {
        for q in &mut self.queues {
            for id in q.drain(..) {
                self.queued[id] = false;
            }
        }
        self.store.take_events();
    }

    /// Schedules every propagator, e.g. after building a model by hand.
    pub fn schedule_all(&mut self) {
        for id in 0..self.props.len() {
            self.schedule(id);
        }
    }

    pub fn checkpoint(&mut self) -> Level {
        self.store.checkpoint()
    }

    pub fn rollback(&mut self, level: Level) {
        self.store.rollback(level);
        self.clear_queue();
        for p in &mut self.props {
            p.reset();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::ValueSet;

    struct Mirror {
        a: IntVar,
        b: IntVar,
    }

    impl Propagator for Mirror {
        fn name(&self) -> &'static str {
            "mirror"
        }
        fn watches(&self) -> Vec<Watch> {
            vec![Watch::Int(self.a), Watch::Int(self.b)]
        }
        fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
            let da = st.dom(self.a).values().clone();
            let db = st.dom(self.b).values().clone();
            st.restrict(self.a, &db)?;
            st.restrict(self.b, &da)?;
            Ok(())
        }
    }

    #[test]
    fn post_rejects_unknown_and_empty() {
        let mut m = Model::new(Store::new());
        let err = m.post(Box::new(Mirror { a: IntVar(0), b: IntVar(1) }));
        assert_eq!(err.err(), Some(ModelError::Empty));
        let mut st = Store::new();
        st.new_int_range("A", 1, 3);
        let mut m = Model::new(st);
        let err = m.post(Box::new(Mirror { a: IntVar(0), b: IntVar(1) }));
        assert_eq!(err.err(), Some(ModelError::UnknownInt(1)));
    }

    #[test]
    fn fixpoint_propagates_chain() {
        let mut st = Store::new();
        let a = st.new_int_range("A", 1, 5);
        let b = st.new_int("B", [2, 3, 9].into_iter().collect::<ValueSet>());
        let c = st.new_int_range("C", 3, 8);
        let mut m = Model::new(st);
        let p = m.post(Box::new(Mirror { a, b })).unwrap();
        let q = m.post(Box::new(Mirror { a: b, b: c })).unwrap();
        assert_ne!(p, q);
        m.fixpoint().unwrap();
        for x in [a, b, c] {
            assert_eq!(m.store.dom(x).value(), Some(3));
        }
        let before = m.store.snapshot();
        m.fixpoint().unwrap();
        assert_eq!(m.store.snapshot(), before);
    }
}
