//! `Roots(X, S, T)`: `S = { i | X_i ∈ T }`, decomposed into `2n`
//! implications
//!
//! ```text
//! i ∈ S   → X_i ∈ T      (IndexToValue)
//! X_i ∈ T → i ∈ S        (ValueToIndex)
//! ```
//!
//! Each implication keeps a witness value so that repeated calls along a
//! branch do not rescan the domain, and consumes the `T` delta (values
//! removed from `ub(T)` or added to `lb(T)`) instead of recomputing the
//! whole intersection. In `Bc` mode the tests use `[min, max]` and only
//! bounds are removed.
//!
//! Hybrid consistency on Roots is NP-hard in general. The decomposition is
//! exact when one of [`ConditionReport`]'s conditions holds, and `Bc` mode
//! is always exact for bound consistency.

use crate::domain::{Value, ValueSet};
use crate::engine::{Model, ModelError, PropId, Propagator, Watch};
use crate::store::{Event, Inconsistency, IntVar, SetVar, Store};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Mode {
    Hc,
    Bc,
}

/// Which of the tractable cases hold in the current state.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq)]
pub struct ConditionReport {
    /// Every `i ∈ lb(S)` has `D(X_i) ⊆ lb(T)`.
    pub c1: bool,
    /// Every `i ∉ ub(S)` has `D(X_i) ∩ ub(T) = ∅`.
    pub c2: bool,
    /// All `X_i` are fixed.
    pub c3: bool,
    /// `T` is fixed.
    pub c4: bool,
}

impl ConditionReport {
    pub fn any(&self) -> bool {
        self.c1 || self.c2 || self.c3 || self.c4
    }
}

pub fn classify_conditions(st: &Store, xs: &[IntVar], s: SetVar, t: SetVar) -> ConditionReport {
    let (lb_s, ub_s) = (st.lb(s), st.ub(s));
    let (lb_t, ub_t) = (st.lb(t), st.ub(t));
    let idx = |k: usize| (k + 1) as Value;
    ConditionReport {
        c1: xs
            .iter()
            .enumerate()
            .filter(|(k, _)| lb_s.contains(idx(*k)))
            .all(|(_, &x)| st.dom(x).values().is_subset(lb_t)),
        c2: xs
            .iter()
            .enumerate()
            .filter(|(k, _)| !ub_s.contains(idx(*k)))
            .all(|(_, &x)| !st.dom(x).values().intersects(ub_t)),
        c3: xs.iter().all(|&x| st.dom(x).is_fixed()),
        c4: lb_t.len() == ub_t.len(),
    }
}

/// First member of `dom` accepted by `ok`, scanning circularly from `from`.
fn scan(dom: &ValueSet, from: Value, tests: &mut u64, ok: impl Fn(Value) -> bool) -> Option<Value> {
    let mut cur = dom.next_from(from);
    while let Some(v) = cur {
        *tests += 1;
        if ok(v) {
            return Some(v);
        }
        cur = dom.next_from(v + 1);
    }
    cur = dom.min();
    while let Some(v) = cur {
        if v >= from {
            break;
        }
        *tests += 1;
        if ok(v) {
            return Some(v);
        }
        cur = dom.next_from(v + 1);
    }
    None
}

/// `i ∈ S → X_i ∈ T`.
pub struct IndexToValue {
    x: IntVar,
    i: Value,
    s: SetVar,
    t: SetVar,
    mode: Mode,
    /// Last value seen in `D(X_i) ∩ ub(T)`.
    support: Value,
    /// `D(X_i) ⊆ ub(T)` was established at the end of the last run.
    synced: bool,
    removed: Vec<Value>,
    tests: u64,
}

/// `X_i ∈ T → i ∈ S`.
pub struct ValueToIndex {
    x: IntVar,
    i: Value,
    s: SetVar,
    t: SetVar,
    mode: Mode,
    /// Last value seen in `D(X_i) \ lb(T)`.
    escape: Value,
    /// `D(X_i) ∩ lb(T) = ∅` was established at the end of the last run.
    synced: bool,
    added: Vec<Value>,
    tests: u64,
}

impl IndexToValue {
    pub fn new(x: IntVar, i: Value, s: SetVar, t: SetVar, mode: Mode) -> Self {
        Self {
            x,
            i,
            s,
            t,
            mode,
            support: Value::MIN,
            synced: false,
            removed: Vec::new(),
            tests: 0,
        }
    }

    fn hc(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let x = self.x;
        if st.lb(self.s).contains(self.i) {
            if self.synced {
                for v in std::mem::take(&mut self.removed) {
                    self.tests += 1;
                    st.remove(x, v)?;
                }
            } else {
                self.tests += st.dom(x).size() as u64;
                let ub = st.ub(self.t).clone();
                st.restrict(x, &ub)?;
            }
            self.synced = true;
            if let Some(v) = st.dom(x).value() {
                st.include(self.t, v)?;
            }
            return Ok(());
        }
        self.synced = false;
        if st.ub(self.s).contains(self.i) {
            self.tests += 1;
            let ub = st.ub(self.t);
            let dom = st.dom(x).values();
            if !(dom.contains(self.support) && ub.contains(self.support)) {
                match scan(dom, self.support, &mut self.tests, |v| ub.contains(v)) {
                    Some(w) => self.support = w,
                    None => {
                        st.exclude(self.s, self.i)?;
                    }
                }
            }
        }
        Ok(())
    }

    fn bc(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let x = self.x;
        if st.lb(self.s).contains(self.i) {
            loop {
                let m = st.dom(x).min();
                self.tests += 1;
                if st.ub(self.t).contains(m) {
                    break;
                }
                st.remove(x, m)?;
            }
            loop {
                let m = st.dom(x).max();
                self.tests += 1;
                if st.ub(self.t).contains(m) {
                    break;
                }
                st.remove(x, m)?;
            }
            if let Some(v) = st.dom(x).value() {
                st.include(self.t, v)?;
            }
            return Ok(());
        }
        if st.ub(self.s).contains(self.i) {
            let d = st.dom(x);
            self.tests += 1;
            if st.ub(self.t).next_from(d.min()).is_none_or(|v| v > d.max()) {
                st.exclude(self.s, self.i)?;
            }
        }
        Ok(())
    }
}

impl Propagator for IndexToValue {
    fn name(&self) -> &'static str {
        "roots: i∈S→X∈T"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![
            Watch::Int(self.x),
            Watch::IncludedElem(self.s, self.i),
            Watch::Excluded(self.t),
        ]
    }

    fn notify(&mut self, event: &Event) {
        if let Event::SetExcluded(t, v) = *event {
            if t == self.t && self.synced {
                self.removed.push(v);
            }
        }
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let res = match self.mode {
            Mode::Hc => self.hc(st),
            Mode::Bc => self.bc(st),
        };
        self.removed.clear();
        if res.is_err() {
            self.synced = false;
        }
        res
    }

    fn reset(&mut self) {
        self.synced = false;
        self.removed.clear();
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn work(&self) -> u64 {
        self.tests
    }
}

impl ValueToIndex {
    pub fn new(x: IntVar, i: Value, s: SetVar, t: SetVar, mode: Mode) -> Self {
        Self {
            x,
            i,
            s,
            t,
            mode,
            escape: Value::MIN,
            synced: false,
            added: Vec::new(),
            tests: 0,
        }
    }

    fn hc(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let x = self.x;
        if !st.lb(self.s).contains(self.i) {
            self.tests += 1;
            let lb = st.lb(self.t);
            let dom = st.dom(x).values();
            if !(dom.contains(self.escape) && !lb.contains(self.escape)) {
                match scan(dom, self.escape, &mut self.tests, |v| !lb.contains(v)) {
                    Some(w) => self.escape = w,
                    None => {
                        st.include(self.s, self.i)?;
                    }
                }
            }
        }
        if st.ub(self.s).contains(self.i) {
            self.synced = false;
            return Ok(());
        }
        if self.synced {
            for v in std::mem::take(&mut self.added) {
                self.tests += 1;
                st.remove(x, v)?;
            }
        } else {
            self.tests += st.dom(x).size() as u64;
            let doomed: Vec<Value> = st.dom(x).iter().filter(|&v| st.lb(self.t).contains(v)).collect();
            for v in doomed {
                st.remove(x, v)?;
            }
        }
        self.synced = true;
        if let Some(v) = st.dom(x).value() {
            st.exclude(self.t, v)?;
        }
        Ok(())
    }

    fn bc(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let x = self.x;
        if !st.lb(self.s).contains(self.i) {
            let d = st.dom(x);
            let (lo, hi) = (d.min(), d.max());
            self.tests += 1;
            if st.lb(self.t).count_in(lo, hi) as Value == hi - lo + 1 {
                st.include(self.s, self.i)?;
            }
        }
        if st.ub(self.s).contains(self.i) {
            return Ok(());
        }
        loop {
            let m = st.dom(x).min();
            self.tests += 1;
            if !st.lb(self.t).contains(m) {
                break;
            }
            st.remove(x, m)?;
        }
        loop {
            let m = st.dom(x).max();
            self.tests += 1;
            if !st.lb(self.t).contains(m) {
                break;
            }
            st.remove(x, m)?;
        }
        if let Some(v) = st.dom(x).value() {
            st.exclude(self.t, v)?;
        }
        Ok(())
    }
}

impl Propagator for ValueToIndex {
    fn name(&self) -> &'static str {
        "roots: X∈T→i∈S"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![
            Watch::Int(self.x),
            Watch::ExcludedElem(self.s, self.i),
            Watch::Included(self.t),
        ]
    }

    fn notify(&mut self, event: &Event) {
        if let Event::SetIncluded(t, v) = *event {
            if t == self.t && self.synced {
                self.added.push(v);
            }
        }
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let res = match self.mode {
            Mode::Hc => self.hc(st),
            Mode::Bc => self.bc(st),
        };
        self.added.clear();
        if res.is_err() {
            self.synced = false;
        }
        res
    }

    fn reset(&mut self) {
        self.synced = false;
        self.added.clear();
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn work(&self) -> u64 {
        self.tests
    }
}

/// Posts the `2n` implications of `Roots(xs, s, t)`. Elements of `ub(s)`
/// outside `1..=n` are removed first.
pub fn post_roots(
    model: &mut Model,
    xs: &[IntVar],
    s: SetVar,
    t: SetVar,
    mode: Mode,
) -> Result<Vec<PropId>, ModelError> {
    if s.idx() >= model.store.num_sets() || t.idx() >= model.store.num_sets() {
        return Err(ModelError::UnknownSet(s.0.max(t.0)));
    }
    if crate::range::trim_indices(&mut model.store, s, xs.len()).is_err() {
        model.store.fail();
    }
    let mut ids = Vec::with_capacity(2 * xs.len());
    for (k, &x) in xs.iter().enumerate() {
        let i = (k + 1) as Value;
        ids.push(model.post(Box::new(IndexToValue::new(x, i, s, t, mode)))?);
        ids.push(model.post(Box::new(ValueToIndex::new(x, i, s, t, mode)))?);
    }
    Ok(ids)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[Value]) -> ValueSet {
        v.iter().copied().collect()
    }

    fn model(doms: &[&[Value]], s: (&[Value], &[Value]), t: (&[Value], &[Value])) -> (Model, Vec<IntVar>, SetVar, SetVar) {
        let mut st = Store::new();
        let xs: Vec<IntVar> = doms
            .iter()
            .enumerate()
            .map(|(k, d)| st.new_int(format!("X{}", k + 1), vs(d)))
            .collect();
        let sv = st.new_set("S", vs(s.0), vs(s.1));
        let tv = st.new_set("T", vs(t.0), vs(t.1));
        (Model::new(st), xs, sv, tv)
    }

    #[test]
    fn decomposition_section_example() {
        for mode in [Mode::Hc, Mode::Bc] {
            let (mut m, xs, s, t) = model(&[&[1, 2, 3], &[1, 2, 3]], (&[1, 2], &[1, 2]), (&[], &[1, 3]));
            post_roots(&mut m, &xs, s, t, mode).unwrap();
            m.fixpoint().unwrap();
            let expect = if mode == Mode::Hc { vs(&[1, 3]) } else { vs(&[1, 2, 3]) };
            assert_eq!(m.store.dom(xs[0]).values(), &expect);
            assert_eq!(m.store.dom(xs[1]).values(), &expect);
        }
    }

    #[test]
    fn four_vars_give_eight_propagators() {
        let (mut m, xs, s, t) = model(&[&[1], &[1], &[2], &[3]], (&[], &[1, 2, 3, 4]), (&[], &[1, 2, 3]));
        assert_eq!(post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap().len(), 8);
    }

    #[test]
    fn ground_examples() {
        let (mut m, xs, s, t) = model(&[&[1], &[1], &[1]], (&[1, 2, 3], &[1, 2, 3]), (&[], &[1, 2, 3]));
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert_eq!(m.store.lb(t), &vs(&[1]));
        assert!(m.store.ub(t).contains(2));

        let (mut m, xs, s, t) = model(&[&[1], &[1]], (&[], &[1, 2]), (&[1], &[1]));
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert_eq!(m.store.lb(s), &vs(&[1, 2]));
    }

    #[test]
    fn hinder_instance_prunes_nothing() {
        let (mut m, xs, s, t) = model(
            &[&[1, 2], &[3, 4], &[1, 3], &[2, 3]],
            (&[3, 4], &[3, 4]),
            (&[], &[1, 2, 3, 4]),
        );
        let before = m.store.snapshot();
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert_eq!(m.store.snapshot(), before);
        let c = classify_conditions(&m.store, &xs, s, t);
        assert!(!c.any());
    }

    #[test]
    fn single_rules() {
        let (mut m, xs, s, t) = model(&[&[7]], (&[], &[1]), (&[], &[1, 2]));
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert!(m.store.ub(s).is_empty());

        let (mut m, xs, s, t) = model(&[&[2, 5]], (&[], &[]), (&[2], &[2, 5, 6]));
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert_eq!(m.store.dom(xs[0]).value(), Some(5));
        assert!(!m.store.ub(t).contains(5));

        let (mut m, xs, s, t) = model(&[&[2, 3]], (&[], &[1]), (&[2, 3], &[2, 3]));
        post_roots(&mut m, &xs, s, t, Mode::Hc).unwrap();
        m.fixpoint().unwrap();
        assert_eq!(m.store.lb(s), &vs(&[1]));
    }

    #[test]
    fn no_variables_forces_empty_s() {
        let mut st = Store::new();
        let s = st.new_set("S", vs(&[]), vs(&[1, 2]));
        let t = st.new_set("T", vs(&[]), vs(&[1]));
        let mut m = Model::new(st);
        post_roots(&mut m, &[], s, t, Mode::Hc).unwrap();
        assert!(m.store.ub(s).is_empty());
    }
}
