//! Hybrid consistency for `Occurs(X, T)` and `Range(X, S, T)`.
//!
//! `Occurs(X, T)` holds when `T ⊆ {X_i}`. Range is reduced to it: every
//! index `i ∈ ub(S)` gets a shadow `Y_i` with domain `D(X_i) ∪ {dummy}`,
//! where the dummy value stands for "`X_i` is not needed in `T`". One
//! filtering pass over the shadows, followed by channelling back to `S`, `T`
//! and `X`, is enough for hybrid consistency on Range.
//!
//! Indices in `S` are 1-based: element `i` refers to `xs[i - 1]`.

use crate::domain::{Value, ValueSet};
use crate::engine::{Priority, Propagator, Watch};
use crate::flow::{build_occurs_network, classify_arcs, maximize_flow_from};
use crate::store::{Event, Inconsistency, IntVar, Outcome, SetVar, Store};

/// Prunes `domains` to hybrid consistency for Occurs against `lb`. The
/// `seed` holds `(value, position)` pairs of a previous flow; on return it
/// holds the pairs of the new one. Returns the number of augmenting-path
/// searches.
fn occurs_filter(
    domains: &mut [ValueSet],
    lb: &ValueSet,
    seed: &mut Vec<(Value, usize)>,
) -> Result<usize, Inconsistency> {
    let refs: Vec<&ValueSet> = domains.iter().collect();
    let net = build_occurs_network(&refs, lb)?;
    let (flow, searches) = maximize_flow_from(&net, seed);
    if !flow.is_saturating() {
        return Err(Inconsistency);
    }
    let dead: Vec<(Value, usize)> = classify_arcs(&net, &flow).dead_arcs(&net).collect();
    *seed = flow.pairs(&net);
    for (v, i) in dead {
        domains[i].remove(v);
    }
    Ok(searches)
}

/// Enforces hybrid consistency on `Occurs(xs, t)`.
pub fn occurs_hc(st: &mut Store, xs: &[IntVar], t: SetVar) -> Outcome {
    let mut doms: Vec<ValueSet> = xs.iter().map(|&x| st.dom(x).values().clone()).collect();
    let lb = st.lb(t).clone();
    if occurs_filter(&mut doms, &lb, &mut Vec::new()).is_err() {
        return Err(st.fail());
    }
    let mut changed = false;
    let mut union = ValueSet::new();
    for (k, &x) in xs.iter().enumerate() {
        changed |= st.restrict(x, &doms[k])?;
        union.union_with(&doms[k]);
    }
    changed |= st.restrict_ub(t, &union)?;
    Ok(changed)
}

/// Reusable state for Propag-Range: the dummy value and the last flow.
#[derive(Clone, Debug)]
pub struct RangeScratch {
    dummy: Value,
    /// `(value, index)` pairs of the previous flow, `index` 1-based.
    cache: Vec<(Value, usize)>,
    searches: u64,
}

impl RangeScratch {
    pub fn new(dummy: Value) -> Self {
        Self {
            dummy,
            cache: Vec::new(),
            searches: 0,
        }
    }

    pub fn dummy(&self) -> Value {
        self.dummy
    }

    /// Augmenting-path searches performed over the lifetime of this scratch.
    pub fn searches(&self) -> u64 {
        self.searches
    }

    /// One pass of Propag-Range.
    pub fn run(&mut self, st: &mut Store, xs: &[IntVar], s: SetVar, t: SetVar) -> Outcome {
        let n = xs.len() as Value;
        let idx: Vec<usize> = st
            .ub(s)
            .iter()
            .filter(|&i| i >= 1 && i <= n)
            .map(|i| i as usize)
            .collect();
        // Line 1: shadows.
        let mut ys: Vec<ValueSet> = idx
            .iter()
            .map(|&i| {
                let mut d = st.dom(xs[i - 1]).values().clone();
                d.insert(self.dummy);
                d
            })
            .collect();
        // Line 2: Occurs on the shadows.
        let mut pos = vec![usize::MAX; xs.len() + 1];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let mut seed: Vec<(Value, usize)> = self
            .cache
            .iter()
            .filter(|(_, i)| *i <= xs.len() && pos[*i] != usize::MAX)
            .map(|&(v, i)| (v, pos[i]))
            .collect();
        let lb = st.lb(t).clone();
        match occurs_filter(&mut ys, &lb, &mut seed) {
            Ok(k) => self.searches += k as u64,
            Err(_) => return Err(st.fail()),
        }
        self.cache = seed.iter().map(|&(v, k)| (v, idx[k])).collect();
        let mut changed = false;
        let mut union = ValueSet::new();
        for y in &ys {
            union.union_with(y);
        }
        changed |= st.restrict_ub(t, &union)?;
        // Line 3: i ∈ S ↔ Y_i ∈ T.
        for (k, &i) in idx.iter().enumerate() {
            let iv = i as Value;
            let y = &mut ys[k];
            if st.lb(s).contains(iv) {
                y.intersect_with(st.ub(t));
                if y.is_empty() {
                    return Err(st.fail());
                }
                if y.len() == 1 {
                    let v = y.min().expect("singleton");
                    changed |= st.include(t, v)?;
                }
            }
            if !y.intersects(st.ub(t)) {
                changed |= st.exclude(s, iv)?;
            }
            if y.is_subset(st.lb(t)) {
                changed |= st.include(s, iv)?;
            }
            if !st.ub(s).contains(iv) {
                y.subtract(st.lb(t));
                if y.is_empty() {
                    return Err(st.fail());
                }
            }
        }
        // Line 4: (Y_i = dummy) ∨ (Y_i = X_i).
        for (k, &i) in idx.iter().enumerate() {
            if !ys[k].contains(self.dummy) {
                changed |= st.restrict(xs[i - 1], &ys[k])?;
            }
        }
        Ok(changed)
    }
}

/// Enforces hybrid consistency on `Range(xs, s, t)` with a fresh scratch.
/// `dummy` must lie outside every domain and outside `ub(t)`.
pub fn propag_range(st: &mut Store, xs: &[IntVar], s: SetVar, t: SetVar, dummy: Value) -> Outcome {
    RangeScratch::new(dummy).run(st, xs, s, t)
}

/// A value no domain or bound in the store can contain.
pub fn dummy_for(st: &Store) -> Value {
    st.universe().1 + 1
}

/// Removes elements of `ub(s)` that are not valid 1-based indices.
pub(crate) fn trim_indices(st: &mut Store, s: SetVar, n: usize) -> Outcome {
    let bad: Vec<Value> = st.ub(s).iter().filter(|&i| i < 1 || i > n as Value).collect();
    let mut changed = false;
    for i in bad {
        changed |= st.exclude(s, i)?;
    }
    Ok(changed)
}

pub struct RangeProp {
    xs: Vec<IntVar>,
    s: SetVar,
    t: SetVar,
    scratch: RangeScratch,
}

impl RangeProp {
    pub fn new(st: &mut Store, xs: Vec<IntVar>, s: SetVar, t: SetVar) -> Result<Self, Inconsistency> {
        trim_indices(st, s, xs.len())?;
        let scratch = RangeScratch::new(dummy_for(st));
        Ok(Self { xs, s, t, scratch })
    }
}

impl Propagator for RangeProp {
    fn name(&self) -> &'static str {
        "range"
    }

    fn watches(&self) -> Vec<Watch> {
        let mut w: Vec<Watch> = self.xs.iter().map(|&x| Watch::Int(x)).collect();
        w.extend([
            Watch::Included(self.s),
            Watch::Excluded(self.s),
            Watch::Included(self.t),
            Watch::Excluded(self.t),
        ]);
        w
    }

    fn priority(&self) -> Priority {
        Priority::Expensive
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        self.scratch.run(st, &self.xs, self.s, self.t).map(|_| ())
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn work(&self) -> u64 {
        self.scratch.searches()
    }
}

pub struct OccursProp {
    xs: Vec<IntVar>,
    t: SetVar,
}

impl OccursProp {
    pub fn new(xs: Vec<IntVar>, t: SetVar) -> Self {
        Self { xs, t }
    }
}

impl Propagator for OccursProp {
    fn name(&self) -> &'static str {
        "occurs"
    }

    fn watches(&self) -> Vec<Watch> {
        let mut w: Vec<Watch> = self.xs.iter().map(|&x| Watch::Int(x)).collect();
        w.extend([Watch::Included(self.t), Watch::Excluded(self.t)]);
        w
    }

    fn priority(&self) -> Priority {
        Priority::Expensive
    }

    fn notify(&mut self, _event: &Event) {}

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        occurs_hc(st, &self.xs, self.t).map(|_| ())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[Value]) -> ValueSet {
        v.iter().copied().collect()
    }

    #[test]
    fn figure_one_occurs() {
        let mut st = Store::new();
        let xs = vec![
            st.new_int("X1", vs(&[1, 2])),
            st.new_int("X2", vs(&[2, 3, 4])),
            st.new_int("X3", vs(&[3, 4])),
        ];
        let t = st.new_set("T", vs(&[3, 4]), vs(&[1, 2, 3, 4]));
        assert_eq!(occurs_hc(&mut st, &xs, t), Ok(true));
        assert_eq!(st.dom(xs[0]).values(), &vs(&[1, 2]));
        assert_eq!(st.dom(xs[1]).values(), &vs(&[3, 4]));
        assert_eq!(st.dom(xs[2]).values(), &vs(&[3, 4]));
    }

    #[test]
    fn occurs_without_lb_only_trims_ub() {
        let mut st = Store::new();
        let xs = vec![st.new_int("X1", vs(&[1, 2])), st.new_int("X2", vs(&[2]))];
        let t = st.new_set("T", vs(&[]), vs(&[1, 2, 3, 7]));
        occurs_hc(&mut st, &xs, t).unwrap();
        assert_eq!(st.ub(t), &vs(&[1, 2]));
        assert_eq!(st.dom(xs[0]).size(), 2);
    }

    #[test]
    fn occurs_pigeonhole_fails() {
        let mut st = Store::new();
        let xs = vec![st.new_int("X1", vs(&[1, 2]))];
        let t = st.new_set("T", vs(&[1, 2]), vs(&[1, 2]));
        assert!(occurs_hc(&mut st, &xs, t).is_err());
    }

    #[test]
    fn section_two_example() {
        let mut st = Store::new();
        st.set_universe(1, 4);
        let xs = vec![st.new_int("X1", vs(&[1, 3])), st.new_int("X2", vs(&[2, 4]))];
        let s = st.new_set("S", vs(&[1, 2]), vs(&[1, 2]));
        let t = st.new_set("T", vs(&[2]), vs(&[1, 2, 3, 4]));
        propag_range(&mut st, &xs, s, t, 5).unwrap();
        assert_eq!(st.dom(xs[1]).values(), &vs(&[2]));
        assert_eq!(st.ub(t), &vs(&[1, 2, 3]));
        assert_eq!(st.dom(xs[0]).values(), &vs(&[1, 3]));
        let before = st.snapshot();
        propag_range(&mut st, &xs, s, t, 5).unwrap();
        assert_eq!(st.snapshot(), before);
    }

    #[test]
    fn ground_image_forces_lb() {
        let mut st = Store::new();
        let xs = vec![st.new_int("X1", vs(&[1])), st.new_int("X2", vs(&[1]))];
        let s = st.new_set("S", vs(&[1]), vs(&[1]));
        let t = st.new_set("T", vs(&[]), vs(&[1]));
        propag_range(&mut st, &xs, s, t, 2).unwrap();
        assert_eq!(st.lb(t), &vs(&[1]));
    }

    #[test]
    fn empty_ub_s_forces_empty_t() {
        let mut st = Store::new();
        let xs = vec![st.new_int("X1", vs(&[1, 2]))];
        let s = st.new_set("S", vs(&[]), vs(&[]));
        let t = st.new_set("T", vs(&[]), vs(&[1, 2]));
        propag_range(&mut st, &xs, s, t, 3).unwrap();
        assert!(st.ub(t).is_empty());
        let t2 = st.new_set("T2", vs(&[1]), vs(&[1, 2]));
        assert!(propag_range(&mut st, &xs, s, t2, 3).is_err());
    }
}
