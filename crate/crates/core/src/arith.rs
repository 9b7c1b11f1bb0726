//! Integer primitives: linear bounds reasoning, disequality, reified
//! membership and binary tables of forbidden pairs.

use std::collections::HashMap;
use std::fmt;

use crate::domain::{Value, ValueSet};
use crate::engine::{Propagator, Watch};
use crate::store::{Inconsistency, IntVar, Store};

/// Comparison used by linear and cardinality constraints.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Rel {
    Eq,
    Le,
    Ge,
}

impl Rel {
    pub fn holds(self, lhs: i64, rhs: i64) -> bool {
        match self {
            Rel::Eq => lhs == rhs,
            Rel::Le => lhs <= rhs,
            Rel::Ge => lhs >= rhs,
        }
    }
}

impl fmt::Display for Rel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rel::Eq => "=",
            Rel::Le => "<=",
            Rel::Ge => ">=",
        })
    }
}

impl std::str::FromStr for Rel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "=" | "==" => Ok(Rel::Eq),
            "<=" => Ok(Rel::Le),
            ">=" => Ok(Rel::Ge),
            other => Err(format!("unknown relation `{other}`")),
        }
    }
}

/// `Σ a_i·x_i rel rhs`, propagated on bounds.
pub struct Linear {
    terms: Vec<(i64, IntVar)>,
    rel: Rel,
    rhs: i64,
}

impl Linear {
    pub fn new(terms: Vec<(i64, IntVar)>, rel: Rel, rhs: i64) -> Self {
        let terms = terms.into_iter().filter(|&(a, _)| a != 0).collect();
        Self { terms, rel, rhs }
    }

    fn term_bounds(st: &Store, a: i64, x: IntVar) -> (i64, i64) {
        let d = st.dom(x);
        if a > 0 {
            (a * d.min(), a * d.max())
        } else {
            (a * d.max(), a * d.min())
        }
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    -div_floor(-a, b)
}

impl Propagator for Linear {
    fn name(&self) -> &'static str {
        "linear"
    }

    fn watches(&self) -> Vec<Watch> {
        self.terms.iter().map(|&(_, x)| Watch::Int(x)).collect()
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        loop {
            let bounds: Vec<(i64, i64)> = self.terms.iter().map(|&(a, x)| Self::term_bounds(st, a, x)).collect();
            let lo: i64 = bounds.iter().map(|b| b.0).sum();
            let hi: i64 = bounds.iter().map(|b| b.1).sum();
            let upper = matches!(self.rel, Rel::Eq | Rel::Le);
            let lower = matches!(self.rel, Rel::Eq | Rel::Ge);
            if (upper && lo > self.rhs) || (lower && hi < self.rhs) {
                return Err(st.fail());
            }
            let mut changed = false;
            for (k, &(a, x)) in self.terms.iter().enumerate() {
                // Term k must satisfy rhs - (hi - hi_k) <= a·x <= rhs - (lo - lo_k).
                if upper {
                    let cap = self.rhs - (lo - bounds[k].0);
                    changed |= if a > 0 {
                        st.remove_above(x, div_floor(cap, a))?
                    } else {
                        st.remove_below(x, div_ceil(cap, a))?
                    };
                }
                if lower {
                    let floor = self.rhs - (hi - bounds[k].1);
                    changed |= if a > 0 {
                        st.remove_below(x, div_ceil(floor, a))?
                    } else {
                        st.remove_above(x, div_floor(floor, a))?
                    };
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

/// `x ≠ y`.
pub struct NotEqual {
    x: IntVar,
    y: IntVar,
}

impl NotEqual {
    pub fn new(x: IntVar, y: IntVar) -> Self {
        Self { x, y }
    }
}

impl Propagator for NotEqual {
    fn name(&self) -> &'static str {
        "not-equal"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::IntFixed(self.x), Watch::IntFixed(self.y)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        if let Some(v) = st.dom(self.x).value() {
            st.remove(self.y, v)?;
        }
        if let Some(v) = st.dom(self.y).value() {
            st.remove(self.x, v)?;
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// `b ↔ x ∈ values`, with `b` a 0/1 variable.
pub struct ReifMember {
    b: IntVar,
    x: IntVar,
    values: ValueSet,
}

impl ReifMember {
    pub fn new(b: IntVar, x: IntVar, values: ValueSet) -> Self {
        Self { b, x, values }
    }
}

impl Propagator for ReifMember {
    fn name(&self) -> &'static str {
        "reif-member"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Int(self.b), Watch::Int(self.x)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        st.remove_below(self.b, 0)?;
        st.remove_above(self.b, 1)?;
        let dom = st.dom(self.x).values();
        let inside = dom.intersects(&self.values);
        let outside = !dom.is_subset(&self.values);
        if !inside {
            st.remove(self.b, 1)?;
        }
        if !outside {
            st.remove(self.b, 0)?;
        }
        match st.dom(self.b).value() {
            Some(1) => {
                st.restrict(self.x, &self.values)?;
            }
            Some(0) => {
                let keep: ValueSet = st.dom(self.x).iter().filter(|&v| !self.values.contains(v)).collect();
                st.restrict(self.x, &keep)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn idempotent(&self) -> bool {
        true
    }
}

/// A binary constraint given by its forbidden pairs, kept arc consistent.
pub struct Forbidden {
    x: IntVar,
    y: IntVar,
    by_x: HashMap<Value, ValueSet>,
    by_y: HashMap<Value, ValueSet>,
    checks: u64,
}

impl Forbidden {
    pub fn new(x: IntVar, y: IntVar, pairs: &[(Value, Value)]) -> Self {
        let mut by_x: HashMap<Value, ValueSet> = HashMap::new();
        let mut by_y: HashMap<Value, ValueSet> = HashMap::new();
        for &(a, b) in pairs {
            by_x.entry(a).or_default().insert(b);
            by_y.entry(b).or_default().insert(a);
        }
        Self {
            x,
            y,
            by_x,
            by_y,
            checks: 0,
        }
    }

    fn revise(st: &mut Store, x: IntVar, y: IntVar, forbidden: &HashMap<Value, ValueSet>, checks: &mut u64) -> Result<bool, Inconsistency> {
        let other = st.dom(y).values();
        let size = other.len();
        let dead: Vec<Value> = st
            .dom(x)
            .iter()
            .filter(|v| {
                *checks += 1;
                forbidden.get(v).is_some_and(|f| {
                    let blocked = if f.len() < size {
                        f.iter().filter(|&b| other.contains(b)).count()
                    } else {
                        other.iter().filter(|&b| f.contains(b)).count()
                    };
                    blocked == size
                })
            })
            .collect();
        let mut changed = false;
        for v in dead {
            changed |= st.remove(x, v)?;
        }
        Ok(changed)
    }
}

impl Propagator for Forbidden {
    fn name(&self) -> &'static str {
        "forbidden"
    }

    fn watches(&self) -> Vec<Watch> {
        vec![Watch::Int(self.x), Watch::Int(self.y)]
    }

    fn propagate(&mut self, st: &mut Store) -> Result<(), Inconsistency> {
        loop {
            let a = Self::revise(st, self.x, self.y, &self.by_x, &mut self.checks)?;
            let b = Self::revise(st, self.y, self.x, &self.by_y, &mut self.checks)?;
            if !a && !b {
                return Ok(());
            }
        }
    }

    fn idempotent(&self) -> bool {
        true
    }

    fn work(&self) -> u64 {
        self.checks
    }
}
