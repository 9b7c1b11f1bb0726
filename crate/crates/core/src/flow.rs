//! Unit-capacity network behind the Occurs constraint.
//!
//! Nodes are the source, one node per value in the union of the domains, one
//! escape node `z_v` for each value outside `lb(T)`, one node per variable,
//! and the sink. A value node routes its unit either through its escape
//! node or through one variable that has it in its domain. Since every arc
//! has capacity one, a flow is just a partial matching of value nodes onto
//! escapes and variables.

use crate::domain::{Value, ValueSet};
use crate::store::Inconsistency;

/// The network for `Occurs(X, T)` (every value of `lb(T)` taken by some
/// `X_i`). Value nodes are stored in increasing order.
#[derive(Clone, Debug)]
pub struct OccursNetwork {
    values: Vec<Value>,
    escape: Vec<bool>,
    /// For each value node, the variables whose domain contains it.
    adj: Vec<Vec<u32>>,
    /// For each variable, its value nodes.
    var_adj: Vec<Vec<u32>>,
}

/// Where a value node sends its unit of flow.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Target {
    Escape,
    Var(usize),
    Unmatched,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitFlow {
    of_value: Vec<Target>,
    of_var: Vec<Option<usize>>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum ArcClass {
    InFlow,
    ViaCycle,
    Dead,
}

/// Class of every arc `(v, x_i)`, aligned with [`OccursNetwork::arcs_of`].
#[derive(Clone, Debug)]
pub struct ArcClassification {
    classes: Vec<Vec<ArcClass>>,
}

impl OccursNetwork {
    pub fn num_values(&self) -> usize {
        self.values.len()
    }

    pub fn num_vars(&self) -> usize {
        self.var_adj.len()
    }

    pub fn value(&self, node: usize) -> Value {
        self.values[node]
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn node_of(&self, v: Value) -> Option<usize> {
        self.values.binary_search(&v).ok()
    }

    pub fn has_escape(&self, node: usize) -> bool {
        self.escape[node]
    }

    /// Variables adjacent to a value node.
    pub fn arcs_of(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[node].iter().map(|&i| i as usize)
    }

    pub fn num_arcs(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>()
            + self.values.len()
            + self.escape.iter().filter(|&&e| e).count() * 2
            + self.var_adj.len()
    }
}

/// Builds the network for the given domains. Fails when some value of `lb`
/// appears in no domain.
pub fn build_occurs_network(
    domains: &[&ValueSet],
    lb: &ValueSet,
) -> Result<OccursNetwork, Inconsistency> {
    let mut all = ValueSet::new();
    for d in domains {
        all.union_with(d);
    }
    if !lb.is_subset(&all) {
        return Err(Inconsistency);
    }
    let values = all.to_vec();
    let escape = values.iter().map(|v| !lb.contains(*v)).collect();
    let mut adj = vec![Vec::new(); values.len()];
    let mut var_adj = vec![Vec::new(); domains.len()];
    for (i, d) in domains.iter().enumerate() {
        for v in d.iter() {
            let node = values.binary_search(&v).expect("value in union");
            adj[node].push(i as u32);
            var_adj[i].push(node as u32);
        }
    }
    Ok(OccursNetwork {
        values,
        escape,
        adj,
        var_adj,
    })
}

impl UnitFlow {
    pub fn empty(net: &OccursNetwork) -> Self {
        Self {
            of_value: vec![Target::Unmatched; net.num_values()],
            of_var: vec![None; net.num_vars()],
        }
    }

    pub fn target(&self, node: usize) -> Target {
        self.of_value[node]
    }

    pub fn value_of_var(&self, i: usize) -> Option<usize> {
        self.of_var[i]
    }

    /// Number of value nodes carrying a unit.
    pub fn value(&self) -> usize {
        self.of_value.iter().filter(|t| **t != Target::Unmatched).count()
    }

    pub fn is_saturating(&self) -> bool {
        self.of_value.iter().all(|t| *t != Target::Unmatched)
    }

    fn link(&mut self, node: usize, i: usize) {
        self.of_value[node] = Target::Var(i);
        self.of_var[i] = Some(node);
    }

    /// Value→variable pairs, by value.
    pub fn pairs(&self, net: &OccursNetwork) -> Vec<(Value, usize)> {
        self.of_value
            .iter()
            .enumerate()
            .filter_map(|(n, t)| match t {
                Target::Var(i) => Some((net.values[n], *i)),
                _ => None,
            })
            .collect()
    }
}

/// Computes a maximum flow from scratch.
pub fn maximize_flow(net: &OccursNetwork) -> UnitFlow {
    maximize_flow_from(net, &[]).0
}

/// Computes a maximum flow, first reusing those `(value, variable)` pairs
/// from `seed` that are still arcs of the network. Returns the flow and the
/// number of augmenting-path searches performed.
pub fn maximize_flow_from(net: &OccursNetwork, seed: &[(Value, usize)]) -> (UnitFlow, usize) {
    let mut flow = UnitFlow::empty(net);
    for (node, e) in net.escape.iter().enumerate() {
        if *e {
            flow.of_value[node] = Target::Escape;
        }
    }
    for &(v, i) in seed {
        let Some(node) = net.node_of(v) else { continue };
        if net.escape[node] || i >= net.num_vars() || flow.of_var[i].is_some() {
            continue;
        }
        if flow.of_value[node] == Target::Unmatched && net.adj[node].contains(&(i as u32)) {
            flow.link(node, i);
        }
    }
    let mut searches = 0;
    let mut bfs = Bfs::new(net);
    for node in 0..net.num_values() {
        if flow.of_value[node] == Target::Unmatched {
            searches += 1;
            bfs.augment(net, &mut flow, node);
        }
    }
    (flow, searches)
}

/// Scratch space for augmenting-path searches over value nodes.
struct Bfs {
    parent: Vec<usize>,
    seen: Vec<u32>,
    stamp: u32,
    queue: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl Bfs {
    fn new(net: &OccursNetwork) -> Self {
        Self {
            parent: vec![NONE; net.num_values()],
            seen: vec![0; net.num_values()],
            stamp: 0,
            queue: Vec::new(),
        }
    }

    /// Searches a path from an unmatched value node to the sink, either
    /// through a free variable or by pushing a matched value back onto its
    /// escape. Applies it if found.
    fn augment(&mut self, net: &OccursNetwork, flow: &mut UnitFlow, root: usize) -> bool {
        self.stamp += 1;
        self.queue.clear();
        self.queue.push(root);
        self.seen[root] = self.stamp;
        self.parent[root] = NONE;
        let mut head = 0;
        while head < self.queue.len() {
            let w = self.queue[head];
            head += 1;
            if w != root && net.escape[w] {
                self.apply(flow, w, None);
                return true;
            }
            for &i in &net.adj[w] {
                let i = i as usize;
                match flow.of_var[i] {
                    None => {
                        self.apply(flow, w, Some(i));
                        return true;
                    }
                    Some(u) if u != w && self.seen[u] != self.stamp => {
                        self.seen[u] = self.stamp;
                        self.parent[u] = w;
                        self.queue.push(u);
                    }
                    Some(_) => {}
                }
            }
        }
        false
    }

    /// `w` moves to `take` (a variable, or its escape when `None`); each
    /// value on the way back to the root takes over the variable its
    /// successor released.
    fn apply(&self, flow: &mut UnitFlow, mut w: usize, mut take: Option<usize>) {
        loop {
            let old = match flow.of_value[w] {
                Target::Var(i) => Some(i),
                _ => None,
            };
            match take {
                Some(i) => flow.link(w, i),
                None => flow.of_value[w] = Target::Escape,
            }
            let p = self.parent[w];
            if p == NONE {
                return;
            }
            take = Some(old.expect("interior path nodes are matched"));
            w = p;
        }
    }
}

/// Classifies every arc `(v, x_i)` with respect to a maximum flow.
pub fn classify_arcs(net: &OccursNetwork, flow: &UnitFlow) -> ArcClassification {
    let comp = residual_scc(net, flow);
    let nv = net.num_values();
    let var_node = |i: usize| 2 + 2 * nv + i;
    let classes = (0..nv)
        .map(|node| {
            net.adj[node]
                .iter()
                .map(|&i| {
                    let i = i as usize;
                    if flow.of_value[node] == Target::Var(i) {
                        ArcClass::InFlow
                    } else if comp[2 + node] == comp[var_node(i)] {
                        ArcClass::ViaCycle
                    } else {
                        ArcClass::Dead
                    }
                })
                .collect()
        })
        .collect();
    ArcClassification { classes }
}

impl ArcClassification {
    pub fn class(&self, net: &OccursNetwork, v: Value, i: usize) -> Option<ArcClass> {
        let node = net.node_of(v)?;
        let k = net.adj[node].iter().position(|&j| j as usize == i)?;
        Some(self.classes[node][k])
    }

    /// `(value, variable)` pairs that belong to no maximum flow.
    pub fn dead_arcs<'a>(&'a self, net: &'a OccursNetwork) -> impl Iterator<Item = (Value, usize)> + 'a {
        self.classes.iter().enumerate().flat_map(move |(node, cs)| {
            cs.iter()
                .zip(&net.adj[node])
                .filter(|(c, _)| **c == ArcClass::Dead)
                .map(move |(_, &i)| (net.values[node], i as usize))
        })
    }
}

/// Strongly connected components of the residual graph. Node layout:
/// 0 = s, 1 = t, 2.. value nodes, then escape nodes, then variable nodes.
fn residual_scc(net: &OccursNetwork, flow: &UnitFlow) -> Vec<u32> {
    let nv = net.num_values();
    let n = net.num_vars();
    let total = 2 + 2 * nv + n;
    let val = |k: usize| 2 + k;
    let esc = |k: usize| 2 + nv + k;
    let var = |i: usize| 2 + 2 * nv + i;
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); total];
    let mut add = |a: usize, b: usize| adj[a].push(b as u32);
    for k in 0..nv {
        if flow.of_value[k] == Target::Unmatched {
            add(0, val(k));
        } else {
            add(val(k), 0);
        }
        if net.escape[k] {
            if flow.of_value[k] == Target::Escape {
                add(esc(k), val(k));
                add(1, esc(k));
            } else {
                add(val(k), esc(k));
                add(esc(k), 1);
            }
        }
        for &i in &net.adj[k] {
            let i = i as usize;
            if flow.of_value[k] == Target::Var(i) {
                add(var(i), val(k));
            } else {
                add(val(k), var(i));
            }
        }
    }
    for i in 0..n {
        if flow.of_var[i].is_some() {
            add(1, var(i));
        } else {
            add(var(i), 1);
        }
    }
    tarjan(&adj)
}

/// Iterative Tarjan. Returns a component id per node.
pub(crate) fn tarjan(adj: &[Vec<u32>]) -> Vec<u32> {
    const UNSEEN: u32 = u32::MAX;
    let n = adj.len();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, u32)> = Vec::new();
    let mut next = 0u32;
    let mut ncomp = 0u32;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root as u32);
        on_stack[root] = true;
        while let Some(&mut (u, ref mut k)) = call.last_mut() {
            let u = u as usize;
            if let Some(&w) = adj[u].get(*k as usize) {
                *k += 1;
                let w = w as usize;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[u] = low[u].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(p, _)) = call.last() {
                    let p = p as usize;
                    low[p] = low[p].min(low[u]);
                }
                if low[u] == index[u] {
                    loop {
                        let w = stack.pop().expect("scc stack") as usize;
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == u {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}
