//! Depth-first binary branching search.

use std::time::{Duration, Instant};

use crate::domain::Value;
use crate::engine::Model;
use crate::oracle::Assignment;
use crate::store::{IntVar, Level, Outcome, SetVar, Store};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Smallest domain first, ties by declaration order; smallest value.
    Dom,
    /// `Model::decision_vars` in order; smallest value.
    Lex,
    /// Set variables first (smallest `ub \ lb`), then `Dom` on integers.
    SetFirst,
}

impl std::str::FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "dom" => Ok(Strategy::Dom),
            "lex" => Ok(Strategy::Lex),
            "set" => Ok(Strategy::SetFirst),
            _ => Err(format!("unknown strategy `{s}` (expected dom, lex or set)")),
        }
    }
}

#[derive(Copy, Clone, Debug, Default)]
pub struct Limits {
    pub time: Option<Duration>,
    pub fails: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct SearchStats {
    pub nodes: u64,
    pub fails: u64,
    pub time: Duration,
    pub pruned: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchResult {
    Solution(Assignment),
    Unsat,
    Cutoff,
}

#[derive(Copy, Clone, Debug)]
enum Decision {
    Assign(IntVar, Value),
    Include(SetVar, Value),
}

impl Decision {
    fn apply(self, st: &mut Store) -> Outcome {
        match self {
            Decision::Assign(x, v) => st.assign(x, v),
            Decision::Include(s, v) => st.include(s, v),
        }
    }

    fn refute(self, st: &mut Store) -> Outcome {
        match self {
            Decision::Assign(x, v) => st.remove(x, v),
            Decision::Include(s, v) => st.exclude(s, v),
        }
    }
}

fn smallest_int(st: &Store, vars: impl Iterator<Item = IntVar>) -> Option<IntVar> {
    let mut best: Option<(usize, IntVar)> = None;
    for x in vars {
        let size = st.dom(x).size();
        if size > 1 && best.is_none_or(|(b, _)| size < b) {
            best = Some((size, x));
        }
    }
    best.map(|(_, x)| x)
}

fn smallest_set(st: &Store) -> Option<SetVar> {
    let mut best: Option<(usize, SetVar)> = None;
    for s in st.set_vars() {
        let b = st.bounds(s);
        let free = b.ub().len() - b.lb().len();
        if free > 0 && best.is_none_or(|(f, _)| free < f) {
            best = Some((free, s));
        }
    }
    best.map(|(_, s)| s)
}

fn include_first(st: &Store, s: SetVar) -> Decision {
    let v = st.bounds(s).undecided().next().expect("set has undecided elements");
    Decision::Include(s, v)
}

fn choose(model: &Model, strategy: Strategy) -> Option<Decision> {
    let st = &model.store;
    let assign = |x: IntVar| Decision::Assign(x, st.dom(x).min());
    let primary = match strategy {
        Strategy::Dom => smallest_int(st, model.decision_vars.iter().copied()).map(assign),
        Strategy::Lex => model
            .decision_vars
            .iter()
            .copied()
            .find(|&x| !st.dom(x).is_fixed())
            .map(assign),
        Strategy::SetFirst => smallest_set(st).map(|s| include_first(st, s)),
    };
    primary
        .or_else(|| smallest_int(st, st.int_vars()).map(assign))
        .or_else(|| smallest_set(st).map(|s| include_first(st, s)))
}

fn extract(st: &Store) -> Assignment {
    Assignment {
        ints: st.int_vars().map(|x| st.dom(x).min()).collect(),
        sets: st.set_vars().map(|s| st.lb(s).clone()).collect(),
    }
}

/// Searches for one solution. The model is left at the root checkpoint
/// state when the search ends.
pub fn solve(model: &mut Model, strategy: Strategy, limits: Limits) -> (SearchResult, SearchStats) {
    let start = Instant::now();
    let removals0 = model.store.removals();
    if model.decision_vars.is_empty() {
        model.decision_vars = model.store.int_vars().collect();
    }
    let mut stats = SearchStats {
        nodes: 1,
        ..SearchStats::default()
    };
    let root = model.checkpoint();
    let result = run(model, strategy, limits, start, &mut stats);
    model.rollback(root);
    stats.time = start.elapsed();
    stats.pruned = model.store.removals() - removals0;
    (result, stats)
}

fn run(
    model: &mut Model,
    strategy: Strategy,
    limits: Limits,
    start: Instant,
    stats: &mut SearchStats,
) -> SearchResult {
    if model.fixpoint().is_err() {
        stats.fails += 1;
        return SearchResult::Unsat;
    }
    let mut stack: Vec<(Level, Decision)> = Vec::new();
    loop {
        if limits.fails.is_some_and(|f| stats.fails >= f)
            || limits.time.is_some_and(|t| start.elapsed() >= t)
        {
            return SearchResult::Cutoff;
        }
        let Some(d) = choose(model, strategy) else {
            return SearchResult::Solution(extract(&model.store));
        };
        stats.nodes += 1;
        let level = model.checkpoint();
        stack.push((level, d));
        if d.apply(&mut model.store).is_ok() && model.fixpoint().is_ok() {
            continue;
        }
        stats.fails += 1;
        loop {
            let Some((level, d)) = stack.pop() else {
                return SearchResult::Unsat;
            };
            model.rollback(level);
            stats.nodes += 1;
            if d.refute(&mut model.store).is_ok() && model.fixpoint().is_ok() {
                break;
            }
            stats.fails += 1;
        }
    }
}
