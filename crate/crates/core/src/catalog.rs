//! Declarative constraint descriptions and their decompositions.
//!
//! A [`ConstraintSpec`] names a constraint and its arguments. The same value
//! is read by [`post_global`], which posts the Range/Roots decomposition, and
//! by [`crate::oracle`], which checks the declarative meaning directly.
//!
//! Hidden variables created by a decomposition are named
//! `{tag}#{k}.{role}`, where `k` counts the globals posted on the model.

use crate::arith::{self, ReifMember, Rel};
use crate::domain::{Value, ValueSet};
use crate::engine::{Model, ModelError, PropId};
use crate::range::{OccursProp, RangeProp};
use crate::roots::{post_roots, Mode};
use crate::sets::{CardLink, Cover, DisjointLink, Extreme, ExtremeLink, IntMember, IntersectLink, SubsetLink, UnionLink};
use crate::store::{IntVar, SetVar};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstraintSpec {
    /// Pairwise distinct, via Range and `|T| = n`.
    AllDifferent { xs: Vec<IntVar> },
    /// Pairwise distinct, as a clique of disequalities.
    AllDifferentBinary { xs: Vec<IntVar> },
    /// The multiset of `xs` equals `values`.
    Permutation { xs: Vec<IntVar>, values: ValueSet },
    /// `xs` take exactly `n` distinct values.
    NValue { xs: Vec<IntVar>, n: IntVar },
    /// Exactly `n` of `xs` take a value in `values`.
    Among { xs: Vec<IntVar>, values: ValueSet, n: IntVar },
    /// Among, with reified membership and a sum.
    AmongSum { xs: Vec<IntVar>, values: ValueSet, n: IntVar },
    /// At most `n` of `xs` equal `value`.
    AtMost { xs: Vec<IntVar>, value: Value, n: IntVar },
    /// At least `n` of `xs` equal `value`.
    AtLeast { xs: Vec<IntVar>, value: Value, n: IntVar },
    /// `counts[j]` of `xs` equal `values[j]`.
    Gcc { xs: Vec<IntVar>, values: Vec<Value>, counts: Vec<IntVar> },
    /// Gcc, with reified equalities and sums.
    GccSum { xs: Vec<IntVar>, values: Vec<Value>, counts: Vec<IntVar> },
    /// No value is shared between `xs` and `ys`.
    DisjointVars { xs: Vec<IntVar>, ys: Vec<IntVar> },
    /// Every value taken by `ys` is taken by some `xs`; Range on both sides.
    UsesViaRange { xs: Vec<IntVar>, ys: Vec<IntVar> },
    /// Same meaning; Range on `xs`, Roots on `ys`.
    UsesViaRoots { xs: Vec<IntVar>, ys: Vec<IntVar> },
    /// Same meaning; membership and cover primitives only.
    UsesPrimitive { xs: Vec<IntVar>, ys: Vec<IntVar> },
    /// `n` of `xs` take a value of `ys`, `m` of `ys` take a value of `xs`.
    Common { n: IntVar, m: IntVar, xs: Vec<IntVar>, ys: Vec<IntVar> },
    /// Items with the same `xs` value use at most `n` distinct `ys` values.
    AssignNValues { xs: Vec<IntVar>, ys: Vec<IntVar>, n: IntVar },
    /// `x_i = j` iff `x_j = i`.
    SymAllDiff { xs: Vec<IntVar> },
    /// `xs[index] = value`, with `index` 1-based.
    Element { index: IntVar, xs: Vec<IntVar>, value: IntVar },
    /// The positions holding 1 form a non-empty contiguous block.
    Contiguity { xs: Vec<IntVar> },
    /// Gcc restricted to the positions in `s`.
    OpenGcc { xs: Vec<IntVar>, s: SetVar, values: Vec<Value>, counts: Vec<IntVar> },
    /// The positions in `s` take distinct values.
    OpenAllDifferent { xs: Vec<IntVar>, s: SetVar },
    /// `t = { xs_i | i ∈ s }`.
    Range { xs: Vec<IntVar>, s: SetVar, t: SetVar },
    /// `s = { i | xs_i ∈ t }`.
    Roots { xs: Vec<IntVar>, s: SetVar, t: SetVar },
    /// `t ⊆ { xs_i }`.
    Occurs { xs: Vec<IntVar>, t: SetVar },
    /// `|s| rel n`.
    Card { s: SetVar, rel: Rel, n: IntVar },
    Subset { s: SetVar, t: SetVar },
    Disjoint { s: SetVar, t: SetVar },
    /// `s` is the union of `parts`.
    Union { s: SetVar, parts: Vec<SetVar> },
    /// `x ∈ s`.
    Member { x: IntVar, s: SetVar },
    /// `Σ a·x rel rhs`.
    Linear { terms: Vec<(i64, IntVar)>, rel: Rel, rhs: i64 },
    NotEqual { x: IntVar, y: IntVar },
    /// `(x, y)` avoids every listed pair.
    Forbidden { x: IntVar, y: IntVar, pairs: Vec<(Value, Value)> },
}

impl ConstraintSpec {
    /// Stable lowercase tag, shared with the instance file format.
    pub fn tag(&self) -> &'static str {
        use ConstraintSpec::*;
        match self {
            AllDifferent { .. } => "alldifferent",
            AllDifferentBinary { .. } => "alldifferent-binary",
            Permutation { .. } => "permutation",
            NValue { .. } => "nvalue",
            Among { .. } => "among",
            AmongSum { .. } => "among-sum",
            AtMost { .. } => "atmost",
            AtLeast { .. } => "atleast",
            Gcc { .. } => "gcc",
            GccSum { .. } => "gcc-sum",
            DisjointVars { .. } => "disjoint-vars",
            UsesViaRange { .. } => "uses-range",
            UsesViaRoots { .. } => "uses-roots",
            UsesPrimitive { .. } => "uses-primitive",
            Common { .. } => "common",
            AssignNValues { .. } => "assign-nvalues",
            SymAllDiff { .. } => "symalldiff",
            Element { .. } => "element",
            Contiguity { .. } => "contiguity",
            OpenGcc { .. } => "open-gcc",
            OpenAllDifferent { .. } => "open-alldifferent",
            Range { .. } => "range",
            Roots { .. } => "roots",
            Occurs { .. } => "occurs",
            Card { .. } => "card",
            Subset { .. } => "subset",
            Disjoint { .. } => "disjoint",
            Union { .. } => "union",
            Member { .. } => "member",
            Linear { .. } => "linear",
            NotEqual { .. } => "neq",
            Forbidden { .. } => "forbidden",
        }
    }

    /// Integer variables the declarative meaning depends on, in argument
    /// order, without repeats.
    pub fn int_vars(&self) -> Vec<IntVar> {
        use ConstraintSpec::*;
        let mut out: Vec<IntVar> = Vec::new();
        match self {
            AllDifferent { xs }
            | AllDifferentBinary { xs }
            | Permutation { xs, .. }
            | SymAllDiff { xs }
            | Contiguity { xs }
            | OpenAllDifferent { xs, .. }
            | Range { xs, .. }
            | Roots { xs, .. }
            | Occurs { xs, .. } => out.extend(xs),
            NValue { xs, n } | Among { xs, n, .. } | AmongSum { xs, n, .. } | AtMost { xs, n, .. } | AtLeast { xs, n, .. } => {
                out.extend(xs);
                out.push(*n);
            }
            Gcc { xs, counts, .. } | GccSum { xs, counts, .. } | OpenGcc { xs, counts, .. } => {
                out.extend(xs);
                out.extend(counts);
            }
            DisjointVars { xs, ys } | UsesViaRange { xs, ys } | UsesViaRoots { xs, ys } | UsesPrimitive { xs, ys } => {
                out.extend(xs);
                out.extend(ys);
            }
            Common { n, m, xs, ys } => {
                out.extend([*n, *m]);
                out.extend(xs);
                out.extend(ys);
            }
            AssignNValues { xs, ys, n } => {
                out.extend(xs);
                out.extend(ys);
                out.push(*n);
            }
            Element { index, xs, value } => {
                out.push(*index);
                out.extend(xs);
                out.push(*value);
            }
            Card { n, .. } => out.push(*n),
            Member { x, .. } => out.push(*x),
            Linear { terms, .. } => out.extend(terms.iter().map(|t| t.1)),
            NotEqual { x, y } | Forbidden { x, y, .. } => out.extend([*x, *y]),
            Subset { .. } | Disjoint { .. } | Union { .. } => {}
        }
        let mut seen = std::collections::HashSet::new();
        out.retain(|x| seen.insert(*x));
        out
    }

    /// Set variables the declarative meaning depends on.
    pub fn set_vars(&self) -> Vec<SetVar> {
        use ConstraintSpec::*;
        let mut out = match self {
            OpenGcc { s, .. } | OpenAllDifferent { s, .. } | Card { s, .. } | Member { s, .. } => vec![*s],
            Range { s, t, .. } | Roots { s, t, .. } | Subset { s, t } | Disjoint { s, t } => vec![*s, *t],
            Occurs { t, .. } => vec![*t],
            Union { s, parts } => {
                let mut v = vec![*s];
                v.extend(parts);
                v
            }
            _ => Vec::new(),
        };
        let mut seen = std::collections::HashSet::new();
        out.retain(|s| seen.insert(*s));
        out
    }
}

/// Posts `spec` as its decomposition. Returns the ids of every propagator
/// posted. If a hidden variable is born inconsistent, the store is left
/// failed and the next fixpoint reports it.
pub fn post_global(model: &mut Model, spec: &ConstraintSpec) -> Result<Vec<PropId>, ModelError> {
    check(model, spec)?;
    let k = model.next_global();
    let mut p = Poster {
        model,
        prefix: format!("{}#{}", spec.tag(), k),
        ids: Vec::new(),
    };
    p.spec(spec)?;
    Ok(p.ids)
}

fn check(model: &Model, spec: &ConstraintSpec) -> Result<(), ModelError> {
    use ConstraintSpec::*;
    let st = &model.store;
    for x in spec.int_vars() {
        if x.idx() >= st.num_ints() {
            return Err(ModelError::UnknownInt(x.0));
        }
    }
    for s in spec.set_vars() {
        if s.idx() >= st.num_sets() {
            return Err(ModelError::UnknownSet(s.0));
        }
    }
    let bad = |msg: String| Err(ModelError::Malformed(msg));
    match spec {
        Permutation { xs, values } if values.len() != xs.len() => {
            bad(format!("permutation of {} variables over {} values", xs.len(), values.len()))
        }
        Gcc { values, counts, .. } | GccSum { values, counts, .. } | OpenGcc { values, counts, .. }
            if values.len() != counts.len() =>
        {
            bad(format!("{} values but {} counts", values.len(), counts.len()))
        }
        AssignNValues { xs, ys, .. } if xs.len() != ys.len() => {
            bad(format!("assign-nvalues needs equal lengths, got {} and {}", xs.len(), ys.len()))
        }
        _ => Ok(()),
    }
}

fn union_of(model: &Model, xs: &[IntVar]) -> ValueSet {
    let mut u = ValueSet::new();
    for &x in xs {
        u.union_with(model.store.dom(x).values());
    }
    u
}

fn indices(n: usize) -> ValueSet {
    ValueSet::interval(1, n as Value)
}

struct Poster<'a> {
    model: &'a mut Model,
    prefix: String,
    ids: Vec<PropId>,
}

impl Poster<'_> {
    fn set(&mut self, role: &str, lb: ValueSet, ub: ValueSet) -> SetVar {
        let name = format!("{}.{}", self.prefix, role);
        self.model.store.new_set(name, lb, ub)
    }

    fn free_set(&mut self, role: &str, ub: ValueSet) -> SetVar {
        self.set(role, ValueSet::new(), ub)
    }

    fn fixed_set(&mut self, role: &str, v: ValueSet) -> SetVar {
        self.set(role, v.clone(), v)
    }

    fn int(&mut self, role: &str, lo: Value, hi: Value) -> IntVar {
        let name = format!("{}.{}", self.prefix, role);
        self.model.store.new_int_range(name, lo, hi)
    }

    fn push(&mut self, p: Box<dyn crate::engine::Propagator>) -> Result<(), ModelError> {
        let id = self.model.post(p)?;
        self.ids.push(id);
        Ok(())
    }

    fn range(&mut self, xs: &[IntVar], s: SetVar, t: SetVar) -> Result<(), ModelError> {
        match RangeProp::new(&mut self.model.store, xs.to_vec(), s, t) {
            Ok(p) => self.push(Box::new(p)),
            Err(_) => {
                self.model.store.fail();
                Ok(())
            }
        }
    }

    fn roots(&mut self, xs: &[IntVar], s: SetVar, t: SetVar) -> Result<(), ModelError> {
        let ids = post_roots(self.model, xs, s, t, Mode::Hc)?;
        self.ids.extend(ids);
        Ok(())
    }

    fn card(&mut self, s: SetVar, rel: Rel, n: IntVar) -> Result<(), ModelError> {
        self.push(Box::new(CardLink::new(s, n, rel)))
    }

    fn card_const(&mut self, s: SetVar, role: &str, rel: Rel, n: Value) -> Result<(), ModelError> {
        let c = self.int(role, n, n);
        self.card(s, rel, c)
    }

    /// Range over all positions with a fresh image variable.
    fn image(&mut self, xs: &[IntVar], role: &str) -> Result<SetVar, ModelError> {
        let all = self.fixed_set(&format!("{role}idx"), indices(xs.len()));
        let ub = union_of(self.model, xs);
        let t = self.free_set(role, ub);
        self.range(xs, all, t)?;
        Ok(t)
    }

    /// Reified `b_i ↔ x_i ∈ values` plus `Σ b_i = n`.
    fn count_sum(&mut self, xs: &[IntVar], values: &ValueSet, n: IntVar, role: &str) -> Result<(), ModelError> {
        let mut terms = vec![(-1, n)];
        for (i, &x) in xs.iter().enumerate() {
            let b = self.int(&format!("{role}{}", i + 1), 0, 1);
            self.push(Box::new(ReifMember::new(b, x, values.clone())))?;
            terms.push((1, b));
        }
        self.push(Box::new(arith::Linear::new(terms, Rel::Eq, 0)))
    }

    fn spec(&mut self, spec: &ConstraintSpec) -> Result<(), ModelError> {
        use ConstraintSpec::*;
        match spec {
            AllDifferent { xs } => {
                let t = self.image(xs, "T")?;
                self.card_const(t, "N", Rel::Eq, xs.len() as Value)?;
            }
            AllDifferentBinary { xs } => {
                for i in 0..xs.len() {
                    for j in i + 1..xs.len() {
                        self.push(Box::new(arith::NotEqual::new(xs[i], xs[j])))?;
                    }
                }
            }
            Permutation { xs, values } => {
                let all = self.fixed_set("S", indices(xs.len()));
                let r = self.fixed_set("R", values.clone());
                self.range(xs, all, r)?;
            }
            NValue { xs, n } => {
                let t = self.image(xs, "T")?;
                self.card(t, Rel::Eq, *n)?;
            }
            Among { xs, values, n } => {
                let s = self.free_set("S", indices(xs.len()));
                let d = self.fixed_set("D", values.clone());
                self.roots(xs, s, d)?;
                self.card(s, Rel::Eq, *n)?;
            }
            AmongSum { xs, values, n } => self.count_sum(xs, values, *n, "B")?,
            AtMost { xs, value, n } | AtLeast { xs, value, n } => {
                let s = self.free_set("S", indices(xs.len()));
                let d = self.fixed_set("D", ValueSet::interval(*value, *value));
                self.roots(xs, s, d)?;
                let rel = if matches!(spec, AtMost { .. }) { Rel::Le } else { Rel::Ge };
                self.card(s, rel, *n)?;
            }
            Gcc { xs, values, counts } => {
                for (j, (&d, &o)) in values.iter().zip(counts).enumerate() {
                    let s = self.free_set(&format!("S{}", j + 1), indices(xs.len()));
                    let t = self.fixed_set(&format!("D{}", j + 1), ValueSet::interval(d, d));
                    self.roots(xs, s, t)?;
                    self.card(s, Rel::Eq, o)?;
                }
            }
            GccSum { xs, values, counts } => {
                for (j, (&d, &o)) in values.iter().zip(counts).enumerate() {
                    self.count_sum(xs, &ValueSet::interval(d, d), o, &format!("B{}_", j + 1))?;
                }
            }
            DisjointVars { xs, ys } => {
                let s = self.image(xs, "S")?;
                let t = self.image(ys, "T")?;
                self.push(Box::new(DisjointLink::new(s, t)))?;
            }
            UsesViaRange { xs, ys } => {
                let t = self.image(xs, "T")?;
                let t2 = self.image(ys, "U")?;
                self.push(Box::new(SubsetLink::new(t2, t)))?;
            }
            UsesViaRoots { xs, ys } => {
                let t = self.image(xs, "T")?;
                let all = self.fixed_set("Uidx", indices(ys.len()));
                self.roots(ys, all, t)?;
            }
            UsesPrimitive { xs, ys } => {
                let ux = union_of(self.model, xs);
                let uy = union_of(self.model, ys);
                let t = self.free_set("T", ux);
                let t2 = self.free_set("U", uy);
                for (set, vars) in [(t, xs), (t2, ys)] {
                    for &x in vars {
                        self.push(Box::new(IntMember::new(x, set, false)))?;
                    }
                    self.push(Box::new(Cover::new(set, vars.clone())))?;
                }
                self.push(Box::new(SubsetLink::new(t2, t)))?;
            }
            Common { n, m, xs, ys } => {
                let t = self.image(ys, "T")?;
                let s = self.free_set("S", indices(xs.len()));
                self.roots(xs, s, t)?;
                self.card(s, Rel::Eq, *n)?;
                let v = self.image(xs, "V")?;
                let u = self.free_set("U", indices(ys.len()));
                self.roots(ys, u, v)?;
                self.card(u, Rel::Eq, *m)?;
            }
            AssignNValues { xs, ys, n } => {
                let values = union_of(self.model, xs);
                let image = union_of(self.model, ys);
                for j in values.iter() {
                    let s = self.free_set(&format!("S{j}"), indices(xs.len()));
                    let d = self.fixed_set(&format!("D{j}"), ValueSet::interval(j, j));
                    self.roots(xs, s, d)?;
                    let t = self.free_set(&format!("T{j}"), image.clone());
                    self.range(ys, s, t)?;
                    self.card(t, Rel::Le, *n)?;
                }
            }
            SymAllDiff { xs } => {
                let n = xs.len();
                let all = self.fixed_set("S", indices(n));
                let vals = self.fixed_set("T", indices(n));
                self.range(xs, all, vals)?;
                for (k, &x) in xs.iter().enumerate() {
                    let i = (k + 1) as Value;
                    let si = self.free_set(&format!("S{i}"), indices(n));
                    let di = self.fixed_set(&format!("D{i}"), ValueSet::interval(i, i));
                    self.roots(xs, si, di)?;
                    self.push(Box::new(IntMember::new(x, si, true)))?;
                    self.card_const(si, &format!("N{i}"), Rel::Eq, 1)?;
                }
            }
            Element { index, xs, value } => {
                let s = self.free_set("S", indices(xs.len()));
                let t = self.free_set("T", union_of(self.model, xs));
                self.card_const(s, "NS", Rel::Eq, 1)?;
                self.card_const(t, "NT", Rel::Eq, 1)?;
                self.push(Box::new(IntMember::new(*index, s, true)))?;
                self.push(Box::new(IntMember::new(*value, t, true)))?;
                self.range(xs, s, t)?;
            }
            Contiguity { xs } => {
                let n = xs.len() as Value;
                let s = self.free_set("S", indices(xs.len()));
                let one = self.fixed_set("D", ValueSet::interval(1, 1));
                self.roots(xs, s, one)?;
                let hi = self.int("X", 1, n.max(1));
                let lo = self.int("Y", 1, n.max(1));
                let c = self.int("C", 1, n.max(1));
                self.push(Box::new(ExtremeLink::new(s, hi, Extreme::Max)))?;
                self.push(Box::new(ExtremeLink::new(s, lo, Extreme::Min)))?;
                self.card(s, Rel::Eq, c)?;
                self.push(Box::new(arith::Linear::new(vec![(1, c), (-1, hi), (1, lo)], Rel::Eq, 1)))?;
            }
            OpenGcc { xs, s, values, counts } => {
                // S_j counts only positions in S, hence S_j = R_j ∩ S with
                // R_j the Roots preimage of d_j over all positions.
                if crate::range::trim_indices(&mut self.model.store, *s, xs.len()).is_err() {
                    self.model.store.fail();
                }
                let mut parts = Vec::with_capacity(values.len());
                for (j, (&d, &o)) in values.iter().zip(counts).enumerate() {
                    let rj = self.free_set(&format!("R{}", j + 1), indices(xs.len()));
                    let dj = self.fixed_set(&format!("D{}", j + 1), ValueSet::interval(d, d));
                    self.roots(xs, rj, dj)?;
                    let sj = self.free_set(&format!("S{}", j + 1), indices(xs.len()));
                    self.push(Box::new(IntersectLink::new(sj, rj, *s)))?;
                    self.card(sj, Rel::Eq, o)?;
                    parts.push(sj);
                }
                self.push(Box::new(UnionLink::new(*s, parts)))?;
            }
            OpenAllDifferent { xs, s } => {
                let t = self.free_set("T", union_of(self.model, xs));
                self.range(xs, *s, t)?;
                let n = self.int("N", 0, xs.len() as Value);
                self.card(*s, Rel::Eq, n)?;
                self.card(t, Rel::Eq, n)?;
            }
            Range { xs, s, t } => self.range(xs, *s, *t)?,
            Roots { xs, s, t } => self.roots(xs, *s, *t)?,
            Occurs { xs, t } => self.push(Box::new(OccursProp::new(xs.clone(), *t)))?,
            Card { s, rel, n } => self.card(*s, *rel, *n)?,
            Subset { s, t } => self.push(Box::new(SubsetLink::new(*s, *t)))?,
            Disjoint { s, t } => self.push(Box::new(DisjointLink::new(*s, *t)))?,
            Union { s, parts } => self.push(Box::new(UnionLink::new(*s, parts.clone())))?,
            Member { x, s } => self.push(Box::new(IntMember::new(*x, *s, false)))?,
            Linear { terms, rel, rhs } => self.push(Box::new(arith::Linear::new(terms.clone(), *rel, *rhs)))?,
            NotEqual { x, y } => self.push(Box::new(arith::NotEqual::new(*x, *y)))?,
            Forbidden { x, y, pairs } => self.push(Box::new(arith::Forbidden::new(*x, *y, pairs)))?,
        }
        Ok(())
    }
}

/// Posts every spec in order.
pub fn post_all(model: &mut Model, specs: &[ConstraintSpec]) -> Result<Vec<PropId>, ModelError> {
    let mut ids = Vec::new();
    for s in specs {
        ids.extend(post_global(model, s)?);
    }
    Ok(ids)
}
