//! Weight pushing for the specialized composition.
//!
//! The per-state sums `S(q)` are path aggregates in a graph that spells out
//! completed transitions with one clone vertex per failure arc. In
//! plus-times the machine is first cut at the states whose left coordinate
//! is the initial state of `V` (their sums are 1), which makes the graph
//! acyclic for acyclic `V`, and the sums come from a dynamic program over a
//! topological order. In max-times the sums are best-path weights over the
//! uncut machine, computed with Dijkstra on `-log` weights.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap};
use std::fmt::Write as _;

use crate::algebra::{Alphabet, Semiring, Symbol, Weight};
use crate::compose::ProductMachine;
use crate::error::{Error, Result};
use crate::failure::FailureTransducer;
use crate::transducer::{Automaton, StateId};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vertex {
    State(StateId),
    /// Clone `<p, f(p)>` of a state with a failure arc.
    Clone(StateId, StateId),
    /// The extra source of the augmented graph.
    Source,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    /// Input symbol, `None` for failure edges and source edges.
    pub label: Option<Symbol>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

impl Graph {
    fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.src].push(i);
        }
        adj
    }

    /// Kahn's method, smallest ready vertex first. `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut indeg = vec![0usize; n];
        for e in &self.edges {
            indeg[e.dst] += 1;
        }
        let adj = self.adjacency();
        let mut ready: BTreeSet<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = ready.pop_first() {
            order.push(v);
            for &i in &adj[v] {
                let d = self.edges[i].dst;
                indeg[d] -= 1;
                if indeg[d] == 0 {
                    ready.insert(d);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// One edge per line: `src dst label weight`, with `-` for no label.
    pub fn dump(&self, alphabet: &Alphabet) -> String {
        let name = |v: usize| match self.vertices[v] {
            Vertex::State(q) => q.to_string(),
            Vertex::Clone(p, q) => format!("<{p},{q}>"),
            Vertex::Source => "x".to_string(),
        };
        let mut out = String::new();
        for e in &self.edges {
            let label = e.label.map_or("-", |a| alphabet.label(a));
            writeln!(
                out,
                "{} {} {} {}",
                name(e.src),
                name(e.dst),
                label,
                crate::text::format_weight(e.weight)
            )
            .unwrap();
        }
        out
    }
}

/// The cloned-states graph. Vertex `q < |Q|` is state `q`; clones follow in
/// order of their origin state.
#[derive(Debug, Clone, PartialEq)]
pub struct ClonedGraph {
    pub graph: Graph,
    pub num_states: usize,
}

/// The reversed cloned-states graph plus a source `x` with an edge to every
/// final state, weighted by its final output. `x` is the last vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedGraph {
    pub graph: Graph,
    pub num_states: usize,
    pub source: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumTable {
    pub semiring: Semiring,
    pub sums: Vec<f64>,
}

/// States whose left coordinate is the left initial state.
pub fn initial_class(m: &ProductMachine) -> Vec<bool> {
    let s1 = m.pairs[m.fst.start()].0;
    m.pairs.iter().map(|&(p1, _)| p1 == s1).collect()
}

/// Cuts `m` at its initial class: those states become final with output 1
/// and lose their arcs and failure arc.
pub fn truncate_at_s1(m: &ProductMachine) -> FailureTransducer<Weight> {
    let cut = initial_class(m);
    let mut out = m.fst.clone();
    for (q, &c) in cut.iter().enumerate() {
        if c {
            out.base_mut().states[q].arcs.clear();
            out.base_mut().set_final(q, Weight::ONE).unwrap();
            out.clear_failure(q);
        } else {
            out.base_mut().clear_final(q);
        }
    }
    out
}

pub fn build_cloned_graph(wt: &FailureTransducer<Weight>) -> Result<ClonedGraph> {
    if let Some(q) = wt.find_failure_cycle() {
        return Err(Error::FailureCycle(q));
    }
    let n = wt.num_states();
    let mut vertices: Vec<Vertex> = (0..n).map(Vertex::State).collect();
    let mut clone_of = vec![usize::MAX; n];
    for (p, slot) in clone_of.iter_mut().enumerate() {
        if let Some(f) = wt.failure(p) {
            *slot = vertices.len();
            vertices.push(Vertex::Clone(p, f.next));
        }
    }
    let t = wt.base();
    let mut edges = Vec::new();
    for p in 0..n {
        for (a, tr) in t.arcs(p) {
            edges.push(Edge {
                src: p,
                dst: tr.next,
                label: Some(a),
                weight: tr.output.value(),
            });
        }
        let Some(f) = wt.failure(p) else { continue };
        let c = clone_of[p];
        edges.push(Edge {
            src: p,
            dst: c,
            label: None,
            weight: f.output.value(),
        });
        let q = f.next;
        for (a, tr) in t.arcs(q) {
            if t.transition(p, a).is_none() {
                edges.push(Edge {
                    src: c,
                    dst: tr.next,
                    label: Some(a),
                    weight: tr.output.value(),
                });
            }
        }
        if let Some(g) = wt.failure(q) {
            edges.push(Edge {
                src: c,
                dst: clone_of[q],
                label: None,
                weight: g.output.value(),
            });
        }
    }
    Ok(ClonedGraph {
        graph: Graph { vertices, edges },
        num_states: n,
    })
}

pub fn augment_graph(g: &ClonedGraph, wt: &FailureTransducer<Weight>) -> AugmentedGraph {
    let mut vertices = g.graph.vertices.clone();
    let source = vertices.len();
    vertices.push(Vertex::Source);
    let mut edges: Vec<Edge> = g
        .graph
        .edges
        .iter()
        .map(|e| Edge {
            src: e.dst,
            dst: e.src,
            label: e.label,
            weight: e.weight,
        })
        .collect();
    for q in 0..g.num_states {
        if let Some(rho) = wt.final_output(q) {
            edges.push(Edge {
                src: source,
                dst: q,
                label: None,
                weight: rho.value(),
            });
        }
    }
    AugmentedGraph {
        graph: Graph { vertices, edges },
        num_states: g.num_states,
        source,
    }
}

/// Sums of path weights from the source, by dynamic programming in
/// topological order.
pub fn state_sums_plus(ag: &AugmentedGraph) -> Result<SumTable> {
    let order = ag.graph.topological_order().ok_or(Error::CyclicGraph)?;
    let adj = ag.graph.adjacency();
    let mut s = vec![0.0; ag.graph.vertices.len()];
    s[ag.source] = 1.0;
    for v in order {
        for &i in &adj[v] {
            let e = &ag.graph.edges[i];
            s[e.dst] += s[v] * e.weight;
        }
    }
    s.truncate(ag.num_states);
    Ok(SumTable {
        semiring: Semiring::PlusTimes,
        sums: s,
    })
}

#[derive(PartialEq)]
struct Item {
    cost: f64,
    vertex: usize,
}

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Best path weights from the source: Dijkstra on `-log` weights. Each
/// sum is the product of the weights along the chosen path.
pub fn state_sums_max(ag: &AugmentedGraph) -> Result<SumTable> {
    if let Some(e) = ag.graph.edges.iter().find(|e| e.weight > 1.0) {
        return Err(Error::NegativeLogWeight(e.weight));
    }
    let n = ag.graph.vertices.len();
    let adj = ag.graph.adjacency();
    let mut dist = vec![f64::INFINITY; n];
    let mut best = vec![0.0; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[ag.source] = 0.0;
    best[ag.source] = 1.0;
    heap.push(Item {
        cost: 0.0,
        vertex: ag.source,
    });
    while let Some(Item { cost, vertex }) = heap.pop() {
        if done[vertex] {
            continue;
        }
        done[vertex] = true;
        for &i in &adj[vertex] {
            let e = &ag.graph.edges[i];
            if e.weight <= 0.0 {
                continue;
            }
            let c = cost - e.weight.ln();
            if c < dist[e.dst] {
                dist[e.dst] = c;
                best[e.dst] = best[vertex] * e.weight;
                heap.push(Item {
                    cost: c,
                    vertex: e.dst,
                });
            }
        }
    }
    best.truncate(ag.num_states);
    Ok(SumTable {
        semiring: Semiring::MaxTimes,
        sums: best,
    })
}

/// The augmented graph used for `semiring`: built from the cut machine in
/// plus-times and from the whole machine in max-times.
pub fn sum_graph(m: &ProductMachine, semiring: Semiring) -> Result<AugmentedGraph> {
    let wt = match semiring {
        Semiring::PlusTimes => truncate_at_s1(m),
        Semiring::MaxTimes => m.fst.clone(),
    };
    let g = build_cloned_graph(&wt)?;
    Ok(augment_graph(&g, &wt))
}

pub fn compute_sums(m: &ProductMachine, semiring: Semiring) -> Result<SumTable> {
    let ag = sum_graph(m, semiring)?;
    match semiring {
        Semiring::PlusTimes => state_sums_plus(&ag),
        Semiring::MaxTimes => state_sums_max(&ag),
    }
}

/// Re-weights `w` by the sums: arcs by `S(next) / S(src)`, failure arcs by
/// `S(f(p)) / S(p)`, final outputs by `1 / S(q)`, the initial output by
/// `S(s)`.
pub fn push_weights(
    w: &FailureTransducer<Weight>,
    sums: &SumTable,
) -> Result<FailureTransducer<Weight>> {
    let s = &sums.sums;
    if s.len() != w.num_states() {
        return Err(Error::InvariantViolation(
            "sum table does not match the machine".into(),
        ));
    }
    if let Some(q) = s.iter().position(|&v| v <= 0.0 || v.is_nan()) {
        return Err(Error::ZeroSumState(q));
    }
    let mut out = w.clone();
    for p in 0..w.num_states() {
        for (_, tr) in out.base_mut().arcs_mut(p) {
            tr.output = Weight::new(tr.output.value() * s[tr.next] / s[p]);
        }
        if let Some(rho) = out.base_mut().final_output_mut(p) {
            *rho = Weight::new(rho.value() / s[p]);
        }
        if let Some(f) = out.failure_mut(p) {
            f.output = Weight::new(f.output.value() * s[f.next] / s[p]);
        }
    }
    let start = w.start();
    out.base_mut()
        .set_initial_output(Weight::new(w.initial_output().value() * s[start]));
    Ok(out)
}

/// Sums and re-weighting in one step.
pub fn push(m: &ProductMachine, semiring: Semiring) -> Result<ProductMachine> {
    let sums = compute_sums(m, semiring)?;
    Ok(ProductMachine {
        fst: push_weights(&m.fst, &sums)?,
        pairs: m.pairs.clone(),
    })
}
