//! Set primitives used by the catalog decompositions.
//!
//! Each propagator loops to its own fixpoint, so all of them are idempotent.

use crate::arith::Rel;
use crate::domain::{Value, ValueSet};
use crate::engine::{Propagator, Watch};
use crate::store::{Inconsistency, IntVar, SetVar, Store};

/// Forces `lb(s) = ub(s)` by excluding everything undecided.
fn close_to_lb(st: &mut Store, s: SetVar) -> Result<bool, Inconsistency> {
    let lb = st.lb(s).clone();
    st.restrict_ub(s, &lb)
}

/// Forces `lb(s) = ub(s)` by including everything undecided.
fn close_to_ub(st: &mut Store, s: SetVar) -> Result<bool, Inconsistency> {
    let ub = st.ub(s).clone();
    st.include_all(s, &ub)
}

/// `|s| rel n`.
pub struct CardLink {
    s: SetVar,
    n: IntVar,
    rel: Rel,
}

impl CardLink {
    pub fn new(s: SetVar, n: IntVar, rel: Rel) -> Self {
        Self { s, n, rel }
    }
}

impl Propagator for CardLink {
    fn name(&self) -> &'static str {
        "card"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Included(self.s), Watch::Excluded(self.s), Watch::Int(self.n)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let lo = st.lb(self.s).len() as Value;
        let hi = st.ub(self.s).len() as Value;
        match self.rel {
            Rel::Eq => {
                st.remove_below(self.n, lo)?;
                st.remove_above(self.n, hi)?;
                let d = st.dom(self.n);
                let (nmin, nmax) = (d.min(), d.max());
                if nmax == lo {
                    close_to_lb(st, self.s)?;
                } else if nmin == hi {
                    close_to_ub(st, self.s)?;
                }
            }
            Rel::Le => {
                st.remove_below(self.n, lo)?;
                if st.dom(self.n).max() == lo {
                    close_to_lb(st, self.s)?;
                }
            }
            Rel::Ge => {
                st.remove_above(self.n, hi)?;
                if st.dom(self.n).min() == hi {
                    close_to_ub(st, self.s)?;
                }
            }
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `s ⊆ t`.
pub struct SubsetLink {
    s: SetVar,
    t: SetVar,
}

impl SubsetLink {
    pub fn new(s: SetVar, t: SetVar) -> Self {
        Self { s, t }
    }
}

impl Propagator for SubsetLink {
    fn name(&self) -> &'static str {
        "subset"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Included(self.s), Watch::Excluded(self.t)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let lb = st.lb(self.s).clone();
        st.include_all(self.t, &lb)?;
        let ub = st.ub(self.t).clone();
        st.restrict_ub(self.s, &ub)?;
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `s ∩ t = ∅`.
pub struct DisjointLink {
    s: SetVar,
    t: SetVar,
}

impl DisjointLink {
    pub fn new(s: SetVar, t: SetVar) -> Self {
        Self { s, t }
    }
}

impl Propagator for DisjointLink {
    fn name(&self) -> &'static str {
        "disjoint"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Included(self.s), Watch::Included(self.t)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        for v in st.lb(self.s).to_vec() {
            st.exclude(self.t, v)?;
        }
        for v in st.lb(self.t).to_vec() {
            st.exclude(self.s, v)?;
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `s = ⋃ parts`.
pub struct UnionLink {
    s: SetVar,
    parts: Vec<SetVar>,
}

impl UnionLink {
    pub fn new(s: SetVar, parts: Vec<SetVar>) -> Self {
        Self { s, parts }
    }
}

impl Propagator for UnionLink {
    fn name(&self) -> &'static str {
        "union"
    }

    fn watches(&self) -> Vec<Watch> {
        let mut w = vec![Watch::Included(self.s), Watch::Excluded(self.s)];
        for &p in &self.parts {
            w.push(Watch::Included(p));
            w.push(Watch::Excluded(p));
        }
        w
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        loop {
            let mut changed = false;
            for &p in &self.parts {
                let lb = st.lb(p).clone();
                changed |= st.include_all(self.s, &lb)?;
                let ub = st.ub(self.s).clone();
                changed |= st.restrict_ub(p, &ub)?;
            }
            let mut covered = ValueSet::new();
            for &p in &self.parts {
                covered.union_with(st.ub(p));
            }
            changed |= st.restrict_ub(self.s, &covered)?;
            for v in st.lb(self.s).to_vec() {
                let mut holders = self.parts.iter().filter(|&&p| st.ub(p).contains(v));
                let first = holders.next();
                if holders.next().is_none() {
                    match first {
                        Some(&p) => changed |= st.include(p, v)?,
                        None => return Err(st.fail()),
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `s = a ∩ b`.
pub struct IntersectLink {
    s: SetVar,
    a: SetVar,
    b: SetVar,
}

impl IntersectLink {
    pub fn new(s: SetVar, a: SetVar, b: SetVar) -> Self {
        Self { s, a, b }
    }
}

impl Propagator for IntersectLink {
    fn name(&self) -> &'static str {
        "intersect"
    }

    fn watches(&self) -> Vec<Watch> {
        [self.s, self.a, self.b]
            .iter()
            .flat_map(|&v| [Watch::Included(v), Watch::Excluded(v)])
            .collect()
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let (s, a, b) = (self.s, self.a, self.b);
        loop {
            let mut changed = false;
            let mut both = st.lb(a).clone();
            both.intersect_with(st.lb(b));
            changed |= st.include_all(s, &both)?;
            let mut either = st.ub(a).clone();
            either.intersect_with(st.ub(b));
            changed |= st.restrict_ub(s, &either)?;
            let lb = st.lb(s).clone();
            changed |= st.include_all(a, &lb)?;
            changed |= st.include_all(b, &lb)?;
            // An element required in one side but barred from s must leave the other.
            for (x, y) in [(a, b), (b, a)] {
                let doomed: Vec<Value> = st.lb(x).iter().filter(|&v| !st.ub(s).contains(v)).collect();
                for v in doomed {
                    changed |= st.exclude(y, v)?;
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `x ∈ s`. With `singleton` set the constraint is read as `s = {x}`, which
/// is what the surrounding decomposition guarantees through `|s| = 1`.
pub struct IntMember {
    x: IntVar,
    s: SetVar,
    singleton: bool,
}

impl IntMember {
    pub fn new(x: IntVar, s: SetVar, singleton: bool) -> Self {
        Self { x, s, singleton }
    }
}

impl Propagator for IntMember {
    fn name(&self) -> &'static str {
        "member"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Int(self.x), Watch::Included(self.s), Watch::Excluded(self.s)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let ub = st.ub(self.s).clone();
        st.restrict(self.x, &ub)?;
        if self.singleton {
            let dom = st.dom(self.x).values().clone();
            st.restrict_ub(self.s, &dom)?;
            match st.lb(self.s).len() {
                0 => {}
                1 => {
                    let v = st.lb(self.s).min().unwrap_or_default();
                    st.assign(self.x, v)?;
                }
                _ => return Err(st.fail()),
            }
        }
        if let Some(v) = st.dom(self.x).value() {
            st.include(self.s, v)?;
            if self.singleton {
                close_to_lb(st, self.s)?;
            }
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Extreme {
    Max,
    Min,
}

/// `x = max(s)` or `x = min(s)`; `s` must be non-empty.
pub struct ExtremeLink {
    s: SetVar,
    x: IntVar,
    which: Extreme,
}

impl ExtremeLink {
    pub fn new(s: SetVar, x: IntVar, which: Extreme) -> Self {
        Self { s, x, which }
    }
}

impl Propagator for ExtremeLink {
    fn name(&self) -> &'static str {
        match self.which {
            Extreme::Max => "max-of",
            Extreme::Min => "min-of",
        }
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Int(self.x), Watch::Included(self.s), Watch::Excluded(self.s)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        let ub = st.ub(self.s).clone();
        st.restrict(self.x, &ub)?;
        let lb = st.lb(self.s);
        match self.which {
            Extreme::Max => {
                if let Some(m) = lb.max() {
                    st.remove_below(self.x, m)?;
                }
                let top = st.dom(self.x).max();
                let beyond: Vec<Value> = st.ub(self.s).iter().filter(|&v| v > top).collect();
                for v in beyond {
                    st.exclude(self.s, v)?;
                }
            }
            Extreme::Min => {
                if let Some(m) = lb.min() {
                    st.remove_above(self.x, m)?;
                }
                let bottom = st.dom(self.x).min();
                let beyond: Vec<Value> = st.ub(self.s).iter().filter(|&v| v < bottom).collect();
                for v in beyond {
                    st.exclude(self.s, v)?;
                }
            }
        }
        if let Some(v) = st.dom(self.x).value() {
            st.include(self.s, v)?;
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `v ∈ t → ∃i. x_i = v`, for every value `v`.
pub struct Cover {
    t: SetVar,
    xs: Vec<IntVar>,
}

impl Cover {
    pub fn new(t: SetVar, xs: Vec<IntVar>) -> Self {
        Self { t, xs }
    }
}

impl Propagator for Cover {
    fn name(&self) -> &'static str {
        "cover"
    }

    fn watches(&self) -> Vec<Watch> {
        let mut w: Vec<Watch> = self.xs.iter().map(|&x| Watch::Int(x)).collect();
        w.push(Watch::Included(self.t));
        w
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        loop {
            let mut union = ValueSet::new();
            for &x in &self.xs {
                union.union_with(st.dom(x).values());
            }
            st.restrict_ub(self.t, &union)?;
            let mut changed = false;
            for v in st.lb(self.t).to_vec() {
                let mut holders = self.xs.iter().filter(|&&x| st.dom(x).contains(v));
                let first = holders.next().copied();
                if holders.next().is_none() {
                    match first {
                        Some(x) => changed |= st.assign(x, v)?,
                        None => return Err(st.fail()),
                    }
                }
            }
            if !changed {
                return Ok(());
            }
        }
    }

    fn idempotent(&self) -> bool {
        true
    }
}
