//! Brute-force ground truth.
//!
//! Everything here enumerates assignments and checks [`holds`] on each one.
//! It is slow on purpose: the code follows the consistency definitions
//! literally so that propagators can be tested against it.
//!
//! * HC keeps an integer value when it appears in some solution, and
//!   narrows a set variable to the union (`ub`) and intersection (`lb`) of
//!   its values over all solutions.
//! * BC does the same with every integer ranging over `[min, max]` of its
//!   domain, keeps only real domain values between the smallest and the
//!   largest supported one, and repeats until nothing moves.

use std::collections::HashSet;

use thiserror::Error;

use crate::catalog::ConstraintSpec;
use crate::domain::{Value, ValueSet};
use crate::store::{Inconsistency, IntVar, SetVar, Store};

/// Largest number of candidate assignments a single enumeration may visit.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assignment {
    pub ints: Vec<Value>,
    pub sets: Vec<ValueSet>,
}

impl Assignment {
    pub fn int(&self, x: IntVar) -> Value {
        self.ints[x.idx()]
    }

    pub fn set(&self, s: SetVar) -> &ValueSet {
        &self.sets[s.idx()]
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("enumeration would visit {size} assignments, cap is {cap}")]
    CapExceeded { size: u128, cap: u64 },
}

/// Filtered state of the variables an oracle call looked at.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FilterResult {
    /// False when no support exists at all.
    pub consistent: bool,
    pub ints: Vec<(IntVar, ValueSet)>,
    pub sets: Vec<(SetVar, ValueSet, ValueSet)>,
}

impl FilterResult {
    pub fn int(&self, x: IntVar) -> Option<&ValueSet> {
        self.ints.iter().find(|e| e.0 == x).map(|e| &e.1)
    }

    pub fn set(&self, s: SetVar) -> Option<(&ValueSet, &ValueSet)> {
        self.sets.iter().find(|e| e.0 == s).map(|e| (&e.1, &e.2))
    }

    /// Checks a propagated store against this result. `failed` tells
    /// whether propagation reported an inconsistency. Only the variables
    /// covered by the result are compared.
    pub fn compare(&self, st: &Store, failed: bool) -> Result<(), String> {
        if failed || !self.consistent {
            return if failed == !self.consistent {
                Ok(())
            } else if failed {
                Err("propagation failed but a solution exists".into())
            } else {
                Err("propagation missed an inconsistency".into())
            };
        }
        for (x, want) in &self.ints {
            let got = st.dom(*x).values();
            if got != want {
                return Err(format!("{}: got {got}, oracle {want}", st.int_name(*x)));
            }
        }
        for (s, lb, ub) in &self.sets {
            if st.lb(*s) != lb || st.ub(*s) != ub {
                return Err(format!(
                    "{}: got {:?}, oracle {lb} ⊆ S ⊆ {ub}",
                    st.set_name(*s),
                    st.bounds(*s)
                ));
            }
        }
        Ok(())
    }

    /// Checks that the store is no tighter than this result: every value the
    /// oracle keeps is still present.
    pub fn is_sound_for(&self, st: &Store, failed: bool) -> bool {
        if !self.consistent {
            return true;
        }
        if failed {
            return false;
        }
        self.ints.iter().all(|(x, want)| want.is_subset(st.dom(*x).values()))
            && self
                .sets
                .iter()
                .all(|(s, lb, ub)| st.lb(*s).is_subset(lb) && ub.is_subset(st.ub(*s)))
    }

    /// Narrows the store to this result.
    pub fn apply(&self, st: &mut Store) -> Result<bool, Inconsistency> {
        if !self.consistent {
            return Err(st.fail());
        }
        let mut changed = false;
        for (x, keep) in &self.ints {
            changed |= st.restrict(*x, keep)?;
        }
        for (s, lb, ub) in &self.sets {
            changed |= st.restrict_ub(*s, ub)?;
            changed |= st.include_all(*s, lb)?;
        }
        Ok(changed)
    }
}

fn count_distinct(vals: impl Iterator<Item = Value>) -> usize {
    vals.collect::<HashSet<_>>().len()
}

fn image(a: &Assignment, xs: &[IntVar]) -> ValueSet {
    xs.iter().map(|&x| a.int(x)).collect()
}

fn indices_ok(s: &ValueSet, n: usize) -> bool {
    s.iter().all(|i| i >= 1 && i <= n as Value)
}

/// Declarative truth of `spec` under a complete assignment.
pub fn holds(spec: &ConstraintSpec, a: &Assignment) -> bool {
    use ConstraintSpec::*;
    let v = |x: &IntVar| a.int(*x);
    match spec {
        AllDifferent { xs } | AllDifferentBinary { xs } => count_distinct(xs.iter().map(v)) == xs.len(),
        Permutation { xs, values } => {
            let mut got: Vec<Value> = xs.iter().map(v).collect();
            got.sort_unstable();
            got == values.to_vec()
        }
        NValue { xs, n } => count_distinct(xs.iter().map(v)) as Value == v(n),
        Among { xs, values, n } | AmongSum { xs, values, n } => {
            xs.iter().filter(|x| values.contains(v(x))).count() as Value == v(n)
        }
        AtMost { xs, value, n } => xs.iter().filter(|x| v(x) == *value).count() as Value <= v(n),
        AtLeast { xs, value, n } => xs.iter().filter(|x| v(x) == *value).count() as Value >= v(n),
        Gcc { xs, values, counts } | GccSum { xs, values, counts } => values
            .iter()
            .zip(counts)
            .all(|(d, o)| xs.iter().filter(|x| v(x) == *d).count() as Value == v(o)),
        DisjointVars { xs, ys } => !image(a, xs).intersects(&image(a, ys)),
        UsesViaRange { xs, ys } | UsesViaRoots { xs, ys } | UsesPrimitive { xs, ys } => {
            image(a, ys).is_subset(&image(a, xs))
        }
        Common { n, m, xs, ys } => {
            let (ix, iy) = (image(a, xs), image(a, ys));
            xs.iter().filter(|x| iy.contains(v(x))).count() as Value == v(n)
                && ys.iter().filter(|y| ix.contains(v(y))).count() as Value == v(m)
        }
        AssignNValues { xs, ys, n } => image(a, xs).iter().all(|j| {
            let used = xs.iter().zip(ys).filter(|(x, _)| v(x) == j).map(|(_, y)| v(y));
            count_distinct(used) as Value <= v(n)
        }),
        SymAllDiff { xs } => {
            let n = xs.len() as Value;
            xs.iter().enumerate().all(|(k, x)| {
                let j = v(x);
                j >= 1 && j <= n && v(&xs[(j - 1) as usize]) == k as Value + 1
            })
        }
        Element { index, xs, value } => {
            let i = v(index);
            i >= 1 && i <= xs.len() as Value && v(&xs[(i - 1) as usize]) == v(value)
        }
        Contiguity { xs } => {
            let ones: Vec<usize> = xs.iter().enumerate().filter(|(_, x)| v(x) == 1).map(|(k, _)| k).collect();
            match (ones.first(), ones.last()) {
                (Some(&lo), Some(&hi)) => hi - lo + 1 == ones.len(),
                _ => false,
            }
        }
        OpenGcc { xs, s, values, counts } => {
            let s = a.set(*s);
            indices_ok(s, xs.len())
                && s.iter().all(|i| values.contains(&v(&xs[(i - 1) as usize])))
                && values.iter().zip(counts).all(|(d, o)| {
                    s.iter().filter(|&i| v(&xs[(i - 1) as usize]) == *d).count() as Value == v(o)
                })
        }
        OpenAllDifferent { xs, s } => {
            let s = a.set(*s);
            indices_ok(s, xs.len()) && count_distinct(s.iter().map(|i| v(&xs[(i - 1) as usize]))) == s.len()
        }
        Range { xs, s, t } => {
            let s = a.set(*s);
            indices_ok(s, xs.len()) && s.iter().map(|i| v(&xs[(i - 1) as usize])).collect::<ValueSet>() == *a.set(*t)
        }
        Roots { xs, s, t } => {
            let t = a.set(*t);
            let pre: ValueSet = (1..=xs.len())
                .filter(|&i| t.contains(v(&xs[i - 1])))
                .map(|i| i as Value)
                .collect();
            pre == *a.set(*s)
        }
        Occurs { xs, t } => a.set(*t).is_subset(&image(a, xs)),
        Card { s, rel, n } => rel.holds(a.set(*s).len() as Value, v(n)),
        Subset { s, t } => a.set(*s).is_subset(a.set(*t)),
        Disjoint { s, t } => !a.set(*s).intersects(a.set(*t)),
        Union { s, parts } => {
            let mut u = ValueSet::new();
            for p in parts {
                u.union_with(a.set(*p));
            }
            u == *a.set(*s)
        }
        Member { x, s } => a.set(*s).contains(v(x)),
        Linear { terms, rel, rhs } => rel.holds(terms.iter().map(|(c, x)| c * v(x)).sum(), *rhs),
        NotEqual { x, y } => v(x) != v(y),
        Forbidden { x, y, pairs } => !pairs.contains(&(v(x), v(y))),
    }
}

/// Variables an enumeration walks over; everything else keeps a fixed
/// placeholder value.
struct Scope {
    ints: Vec<IntVar>,
    sets: Vec<SetVar>,
}

impl Scope {
    fn all(st: &Store) -> Self {
        Self {
            ints: st.int_vars().collect(),
            sets: st.set_vars().collect(),
        }
    }

    fn of(specs: &[ConstraintSpec]) -> Self {
        let mut ints = Vec::new();
        let mut sets = Vec::new();
        let mut seen_i = HashSet::new();
        let mut seen_s = HashSet::new();
        for s in specs {
            ints.extend(s.int_vars().into_iter().filter(|x| seen_i.insert(*x)));
            sets.extend(s.set_vars().into_iter().filter(|x| seen_s.insert(*x)));
        }
        Self { ints, sets }
    }
}

/// Visits every assignment of the scope that satisfies all specs. With
/// `intervals` set, integers range over `[min, max]` of their domain.
fn walk(
    specs: &[ConstraintSpec],
    st: &Store,
    scope: &Scope,
    intervals: bool,
    cap: u64,
    mut visit: impl FnMut(&Assignment),
) -> Result<(), OracleError> {
    let choices: Vec<Vec<Value>> = scope
        .ints
        .iter()
        .map(|&x| {
            let d = st.dom(x);
            if intervals {
                (d.min()..=d.max()).collect()
            } else {
                d.iter().collect()
            }
        })
        .collect();
    let free: Vec<Vec<Value>> = scope.sets.iter().map(|&s| st.bounds(s).undecided().collect()).collect();
    let mut size: u128 = 1;
    for c in &choices {
        size = size.saturating_mul(c.len() as u128);
    }
    for f in &free {
        size = size.saturating_mul(1u128 << f.len().min(100));
    }
    if size > cap as u128 {
        return Err(OracleError::CapExceeded { size, cap });
    }
    if choices.iter().any(|c| c.is_empty()) {
        return Ok(());
    }
    let mut a = Assignment {
        ints: st.int_vars().map(|x| st.dom(x).min()).collect(),
        sets: st.set_vars().map(|s| st.lb(s).clone()).collect(),
    };
    let mut int_pos = vec![0usize; choices.len()];
    let mut set_mask = vec![0u64; free.len()];
    for (k, &x) in scope.ints.iter().enumerate() {
        a.ints[x.idx()] = choices[k][0];
    }
    loop {
        if specs.iter().all(|sp| holds(sp, &a)) {
            visit(&a);
        }
        // Advance the odometer: integers first, then set masks.
        let mut carried = true;
        for (k, &x) in scope.ints.iter().enumerate() {
            int_pos[k] += 1;
            if int_pos[k] < choices[k].len() {
                a.ints[x.idx()] = choices[k][int_pos[k]];
                carried = false;
                break;
            }
            int_pos[k] = 0;
            a.ints[x.idx()] = choices[k][0];
        }
        if carried {
            for (k, &s) in scope.sets.iter().enumerate() {
                set_mask[k] += 1;
                let wrapped = set_mask[k] >> free[k].len() != 0;
                if wrapped {
                    set_mask[k] = 0;
                }
                let mut value = st.lb(s).clone();
                for (b, &e) in free[k].iter().enumerate() {
                    if set_mask[k] >> b & 1 == 1 {
                        value.insert(e);
                    }
                }
                a.sets[s.idx()] = value;
                if !wrapped {
                    carried = false;
                    break;
                }
            }
        }
        if carried {
            return Ok(());
        }
    }
}

/// Every solution of `specs` over all variables of the store.
pub fn enumerate_solutions(specs: &[ConstraintSpec], st: &Store) -> Result<Vec<Assignment>, OracleError> {
    let mut out = Vec::new();
    walk(specs, st, &Scope::all(st), false, DEFAULT_CAP, |a| out.push(a.clone()))?;
    Ok(out)
}

/// Accumulates support unions and intersections over visited solutions.
struct Supports {
    ints: Vec<ValueSet>,
    lbs: Vec<Option<ValueSet>>,
    ubs: Vec<ValueSet>,
    any: bool,
}

impl Supports {
    fn new(scope: &Scope) -> Self {
        Self {
            ints: vec![ValueSet::new(); scope.ints.len()],
            lbs: vec![None; scope.sets.len()],
            ubs: vec![ValueSet::new(); scope.sets.len()],
            any: false,
        }
    }

    fn add(&mut self, scope: &Scope, a: &Assignment) {
        self.any = true;
        for (k, &x) in scope.ints.iter().enumerate() {
            self.ints[k].insert(a.int(x));
        }
        for (k, &s) in scope.sets.iter().enumerate() {
            let v = a.set(s);
            self.ubs[k].union_with(v);
            match &mut self.lbs[k] {
                Some(lb) => lb.intersect_with(v),
                slot => *slot = Some(v.clone()),
            }
        }
    }

    fn finish(self, scope: &Scope) -> FilterResult {
        FilterResult {
            consistent: self.any,
            ints: scope.ints.iter().copied().zip(self.ints).collect(),
            sets: scope
                .sets
                .iter()
                .zip(self.lbs.into_iter().zip(self.ubs))
                .map(|(&s, (lb, ub))| (s, lb.unwrap_or_default(), ub))
                .collect(),
        }
    }
}

/// Hybrid consistency on the conjunction of `specs`, over the variables
/// they mention.
pub fn filter_hc(specs: &[ConstraintSpec], st: &Store) -> Result<FilterResult, OracleError> {
    filter_hc_with_cap(specs, st, DEFAULT_CAP)
}

pub fn filter_hc_with_cap(specs: &[ConstraintSpec], st: &Store, cap: u64) -> Result<FilterResult, OracleError> {
    let scope = Scope::of(specs);
    let mut sup = Supports::new(&scope);
    walk(specs, st, &scope, false, cap, |a| sup.add(&scope, a))?;
    Ok(sup.finish(&scope))
}

/// Keeps the real domain values between the smallest and largest
/// supported value.
fn clip(dom: &ValueSet, supported: &ValueSet) -> ValueSet {
    let lo = dom.iter().find(|&v| supported.contains(v));
    let hi = dom.iter().filter(|&v| supported.contains(v)).last();
    match (lo, hi) {
        (Some(lo), Some(hi)) => dom.iter().filter(|&v| v >= lo && v <= hi).collect(),
        _ => ValueSet::new(),
    }
}

/// Bound consistency on the conjunction of `specs`, iterated until stable.
pub fn filter_bc(specs: &[ConstraintSpec], st: &Store) -> Result<FilterResult, OracleError> {
    let scope = Scope::of(specs);
    let mut work = st.clone();
    loop {
        let mut sup = Supports::new(&scope);
        walk(specs, &work, &scope, true, DEFAULT_CAP, |a| sup.add(&scope, a))?;
        let mut res = sup.finish(&scope);
        if !res.consistent {
            return Ok(res);
        }
        let mut moved = false;
        for (x, supported) in &mut res.ints {
            let dom = work.dom(*x).values();
            let kept = clip(dom, supported);
            moved |= kept.len() != dom.len();
            *supported = kept;
        }
        if kept_empty(&res) {
            res.consistent = false;
            return Ok(res);
        }
        if !moved {
            return Ok(res);
        }
        if res.apply(&mut work).is_err() {
            res.consistent = false;
            return Ok(res);
        }
    }
}

fn kept_empty(res: &FilterResult) -> bool {
    res.ints.iter().any(|(_, d)| d.is_empty())
}

/// Exact filtering for a single `Roots(xs, s, t)`.
///
/// For a fixed value of `T` the indices are independent: index `j` may take
/// the values of `D(X_j) ∩ T` if it must be in `S`, of `D(X_j) \ T` if it
/// must stay out, and anything otherwise. So it is enough to enumerate the
/// completions of `T`. With `bc` set, integers range over intervals and the
/// result is iterated to a fixpoint as in [`filter_bc`].
pub fn roots_filter(st: &Store, xs: &[IntVar], s: SetVar, t: SetVar, bc: bool) -> FilterResult {
    let n = xs.len();
    let mut doms: Vec<ValueSet> = xs.iter().map(|&x| st.dom(x).values().clone()).collect();
    let s_lb = st.lb(s).clone();
    let s_ub: ValueSet = st.ub(s).iter().filter(|&i| i >= 1 && i <= n as Value).collect();
    let (t_lb, t_ub) = (st.lb(t).clone(), st.ub(t).clone());
    let failed = |xs: &[IntVar], doms: Vec<ValueSet>| FilterResult {
        consistent: false,
        ints: xs.iter().copied().zip(doms).collect(),
        sets: vec![(s, s_lb.clone(), s_ub.clone()), (t, t_lb.clone(), t_ub.clone())],
    };
    if !indices_ok(&s_lb, n) {
        return failed(xs, doms);
    }
    let free: Vec<Value> = st.bounds(t).undecided().collect();
    loop {
        let cands: Vec<ValueSet> = doms
            .iter()
            .map(|d| match (bc, d.min(), d.max()) {
                (true, Some(lo), Some(hi)) => ValueSet::interval(lo, hi),
                _ => d.clone(),
            })
            .collect();
        let mut vals = vec![ValueSet::new(); n];
        let (mut slb, mut sub): (Option<ValueSet>, ValueSet) = (None, ValueSet::new());
        let (mut tlb, mut tub): (Option<ValueSet>, ValueSet) = (None, ValueSet::new());
        for mask in 0u64..(1u64 << free.len()) {
            let mut tv = t_lb.clone();
            for (b, &e) in free.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    tv.insert(e);
                }
            }
            let mut inside = Vec::with_capacity(n);
            let mut outside = Vec::with_capacity(n);
            let mut ok = true;
            for (j, c) in cands.iter().enumerate() {
                let idx = j as Value + 1;
                let may_in = s_ub.contains(idx);
                let may_out = !s_lb.contains(idx);
                let can_in = may_in && c.intersects(&tv);
                let can_out = may_out && !c.is_subset(&tv);
                if !can_in && !can_out {
                    ok = false;
                    break;
                }
                inside.push(can_in);
                outside.push(can_out);
            }
            if !ok {
                continue;
            }
            let mut forced = ValueSet::new();
            for (j, c) in cands.iter().enumerate() {
                let idx = j as Value + 1;
                for v in c.iter() {
                    if (tv.contains(v) && inside[j]) || (!tv.contains(v) && outside[j]) {
                        vals[j].insert(v);
                    }
                }
                if inside[j] {
                    sub.insert(idx);
                    if !outside[j] {
                        forced.insert(idx);
                    }
                }
            }
            match &mut slb {
                Some(l) => l.intersect_with(&forced),
                slot => *slot = Some(forced),
            }
            tub.union_with(&tv);
            match &mut tlb {
                Some(l) => l.intersect_with(&tv),
                slot => *slot = Some(tv),
            }
        }
        let Some(tlb) = tlb else {
            return failed(xs, doms);
        };
        let slb = slb.unwrap_or_default();
        let next: Vec<ValueSet> = if bc {
            doms.iter().zip(&vals).map(|(d, v)| clip(d, v)).collect()
        } else {
            vals
        };
        if next.iter().any(|d| d.is_empty()) {
            return failed(xs, doms);
        }
        let stable = !bc || next.iter().zip(&doms).all(|(a, b)| a.len() == b.len());
        doms = next;
        if stable {
            return FilterResult {
                consistent: true,
                ints: xs.iter().copied().zip(doms).collect(),
                sets: vec![(s, slb, sub), (t, tlb, tub)],
            };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vs(v: &[Value]) -> ValueSet {
        v.iter().copied().collect()
    }

    fn ground(xs: &[Value], s: &[Value], t: &[Value]) -> (Assignment, Vec<IntVar>, SetVar, SetVar) {
        let a = Assignment {
            ints: xs.to_vec(),
            sets: vec![vs(s), vs(t)],
        };
        let vars = (0..xs.len() as u32).map(IntVar).collect();
        (a, vars, SetVar(0), SetVar(1))
    }

    #[test]
    fn range_and_roots_differ() {
        let (a, xs, s, t) = ground(&[1, 1], &[1], &[1]);
        assert!(holds(&ConstraintSpec::Range { xs: xs.clone(), s, t }, &a));
        assert!(!holds(&ConstraintSpec::Roots { xs, s, t }, &a));
        let (a, xs, s, t) = ground(&[1, 1, 1], &[1, 2, 3], &[1, 2]);
        assert!(holds(&ConstraintSpec::Roots { xs: xs.clone(), s, t }, &a));
        assert!(!holds(&ConstraintSpec::Range { xs, s, t }, &a));
    }

    #[test]
    fn among_counts_directly() {
        let a = Assignment {
            ints: vec![2, 2, 5, 2],
            sets: vec![],
        };
        let xs = vec![IntVar(0), IntVar(1), IntVar(2)];
        assert!(holds(&ConstraintSpec::Among { xs, values: vs(&[2]), n: IntVar(3) }, &a));
    }

    #[test]
    fn section_two_example_hc_and_bc() {
        let mut st = Store::new();
        let x1 = st.new_int("X1", vs(&[1, 3]));
        let x2 = st.new_int("X2", vs(&[2, 4]));
        let s = st.new_set("S", vs(&[1, 2]), vs(&[1, 2]));
        let t = st.new_set("T", vs(&[2]), vs(&[1, 2, 3, 4]));
        let spec = [ConstraintSpec::Range { xs: vec![x1, x2], s, t }];
        let hc = filter_hc(&spec, &st).unwrap();
        assert_eq!(hc.int(x2), Some(&vs(&[2])));
        assert_eq!(hc.set(t).map(|b| b.1.clone()), Some(vs(&[1, 2, 3])));
        let bc = filter_bc(&spec, &st).unwrap();
        assert_eq!(bc.int(x2), Some(&vs(&[2, 4])));
        assert_eq!(bc.set(t).map(|b| b.1.clone()), Some(vs(&[1, 2, 3, 4])));
    }

    #[test]
    fn empty_spec_enumerates_full_product() {
        let mut st = Store::new();
        st.new_int_range("X", 1, 3);
        st.new_set("S", vs(&[]), vs(&[1, 2]));
        assert_eq!(enumerate_solutions(&[], &st).unwrap().len(), 12);
    }

    #[test]
    fn cap_is_a_hard_error() {
        let mut st = Store::new();
        let xs: Vec<IntVar> = (0..8).map(|k| st.new_int_range(format!("X{k}"), 1, 10)).collect();
        let spec = [ConstraintSpec::AllDifferent { xs }];
        assert!(matches!(filter_hc(&spec, &st), Err(OracleError::CapExceeded { .. })));
    }

    #[test]
    fn roots_specialised_matches_generic() {
        let mut st = Store::new();
        let x1 = st.new_int("X1", vs(&[1, 2, 3]));
        let x2 = st.new_int("X2", vs(&[1, 2, 3]));
        let s = st.new_set("S", vs(&[1, 2]), vs(&[1, 2]));
        let t = st.new_set("T", vs(&[]), vs(&[1, 3]));
        let xs = vec![x1, x2];
        let generic = filter_hc(&[ConstraintSpec::Roots { xs: xs.clone(), s, t }], &st).unwrap();
        assert_eq!(roots_filter(&st, &xs, s, t, false), generic);
        assert_eq!(generic.int(x1), Some(&vs(&[1, 3])));
        let bc = roots_filter(&st, &xs, s, t, true);
        assert_eq!(bc.int(x1), Some(&vs(&[1, 2, 3])));
    }
}
