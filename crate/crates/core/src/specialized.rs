//! Direct construction of `star(V) o F` that only creates co-accessible
//! states.
//!
//! Every complete path of a star-ready `V` emits exactly one output symbol,
//! on a single crossing arc. States before that arc form the left class of
//! the symbol and states after it the right class. Pairing left-class states
//! with the source of an `F` arc and right-class states with its target
//! gives every state of the product a way to finish.

use std::collections::{BTreeMap, BTreeSet};

use crate::algebra::{Monoid, Symbol, Weight};
use crate::compose::ProductMachine;
use crate::error::{Error, Result};
use crate::failure::FailureTransducer;
use crate::star::StarReadyTransducer;
use crate::transducer::{Automaton, StateId, Transducer};

/// An arc `(source, input symbol, target)` of `V`.
pub type ArcRef = (StateId, Symbol, StateId);

/// Per output symbol: the arcs emitting it and the left and right state
/// classes. Vectors are indexed by output symbol id.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPartition {
    pub delta: Vec<Vec<ArcRef>>,
    pub left: Vec<Vec<bool>>,
    pub right: Vec<Vec<bool>>,
}

impl SymbolPartition {
    pub fn left_states(&self, omega: Symbol) -> Vec<StateId> {
        members(&self.left[omega as usize])
    }

    pub fn right_states(&self, omega: Symbol) -> Vec<StateId> {
        members(&self.right[omega as usize])
    }

    /// Checks the four structural properties of the classes against `v`.
    pub fn check_invariants(&self, v: &Transducer<crate::algebra::PairOutput>) -> Result<()> {
        let n = v.num_states();
        let fail = |msg: String| Err(Error::InvariantViolation(msg));
        for q in 0..n {
            let covered = self.left.iter().chain(&self.right).any(|c| c[q]);
            if !covered {
                return fail(format!("state {q} is in no class"));
            }
            let in_left = self.left.iter().any(|c| c[q]);
            let in_right = self.right.iter().any(|c| c[q]);
            if in_left && in_right {
                return fail(format!("state {q} is in a left and a right class"));
            }
        }
        // A state can sit in the left class of several symbols, so an empty
        // arc only has to stay inside one of the classes of its source.
        for p in 0..n {
            for (_, tr) in v.arcs(p) {
                let mut shared = self
                    .left
                    .iter()
                    .chain(&self.right)
                    .filter(|c| c[p] && c[tr.next]);
                let eps = tr.output.word.is_epsilon();
                if eps && shared.next().is_none() {
                    return fail(format!("empty-output arc leaves every class of {p}"));
                }
                if !eps && shared.next().is_some() {
                    return fail(format!("arc inside a class of {p} emits a symbol"));
                }
            }
        }
        Ok(())
    }
}

fn members(flags: &[bool]) -> Vec<StateId> {
    flags
        .iter()
        .enumerate()
        .filter_map(|(q, &b)| b.then_some(q))
        .collect()
}

/// Computes `Delta_w`, the left classes (states reaching a source of
/// `Delta_w`) and the right classes (states reachable from a target).
pub fn partition_states(v: &StarReadyTransducer) -> Result<SymbolPartition> {
    let t = v.base();
    let omega = t
        .output_alphabet()
        .ok_or_else(|| Error::AlphabetMismatch("machine has no output alphabet".into()))?;
    let n = t.num_states();
    let width = omega.id_bound();
    let mut delta: Vec<Vec<ArcRef>> = vec![Vec::new(); width];
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for p in 0..n {
        for (a, tr) in t.arcs(p) {
            let word = tr.output.word.symbols();
            if word.len() >= 2 {
                return Err(Error::MultiSymbolOutput {
                    state: p,
                    symbol: a,
                    len: word.len(),
                });
            }
            if let Some(&w) = word.first() {
                delta[w as usize].push((p, a, tr.next));
            }
            preds[tr.next].push(p);
        }
    }
    let mut left = vec![vec![false; n]; width];
    let mut right = vec![vec![false; n]; width];
    for w in 0..width {
        let sources: Vec<StateId> = delta[w].iter().map(|d| d.0).collect();
        left[w] = reach(n, &sources, |q| preds[q].clone());
        let targets: Vec<StateId> = delta[w].iter().map(|d| d.2).collect();
        right[w] = reach(n, &targets, |q| t.arcs(q).map(|(_, tr)| tr.next).collect());
    }
    Ok(SymbolPartition { delta, left, right })
}

fn reach<F: Fn(StateId) -> Vec<StateId>>(n: usize, roots: &[StateId], next: F) -> Vec<bool> {
    let mut seen = vec![false; n];
    let mut stack = roots.to_vec();
    for &r in roots {
        seen[r] = true;
    }
    while let Some(q) = stack.pop() {
        for r in next(q) {
            if !seen[r] {
                seen[r] = true;
                stack.push(r);
            }
        }
    }
    seen
}

/// Maps final states of `V` to its initial state.
pub fn e_map(v: &StarReadyTransducer, p: StateId) -> StateId {
    if v.base().is_final(p) {
        v.base().start()
    } else {
        p
    }
}

type Pair = (StateId, StateId);

#[derive(Default)]
struct Builder {
    states: BTreeSet<Pair>,
    arcs: BTreeMap<(Pair, Symbol), (Pair, Weight)>,
    failures: BTreeMap<Pair, (Pair, Weight)>,
}

impl Builder {
    fn arc(&mut self, src: Pair, a: Symbol, dst: Pair, w: Weight) -> Result<()> {
        match self.arcs.insert((src, a), (dst, w)) {
            Some(old) if old != (dst, w) => Err(Error::InvariantViolation(format!(
                "conflicting arcs from {src:?} on symbol {a}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Builds the specialized composition of `star(v)` with `ft`.
///
/// Assumptions on `ft` that can be checked exactly (no failure cycles,
/// monotonic, every state co-accessible) are checked; the probabilistic
/// assumptions on both operands are the caller's responsibility.
pub fn compose_specialized(
    v: &StarReadyTransducer,
    ft: &FailureTransducer<Weight>,
) -> Result<ProductMachine> {
    let t = v.base();
    if t.output_alphabet() != Some(ft.input_alphabet()) {
        return Err(Error::AlphabetMismatch(
            "left output alphabet differs from right input alphabet".into(),
        ));
    }
    if let Some(q) = ft.find_failure_cycle() {
        return Err(Error::FailureCycle(q));
    }
    if !ft.check_monotonic().passed() {
        return Err(Error::PreconditionViolation(
            "right operand is not monotonic".into(),
        ));
    }
    if ft.coaccessible_states().iter().any(|c| !c) {
        return Err(Error::PreconditionViolation(
            "right operand has a state that is not co-accessible".into(),
        ));
    }
    let part = partition_states(v)?;
    part.check_invariants(t)?;

    let s1 = t.start();
    let e = |p: StateId| e_map(v, p);
    let mut b = Builder::default();
    let start = (s1, ft.start());
    b.states.insert(start);

    for p2 in 0..ft.num_states() {
        for (w, tr2) in ft.base().arcs(p2) {
            let q2 = tr2.next;
            let lambda2 = tr2.output;
            let left = part.left_states(w);
            let right = part.right_states(w);
            for &p1 in &left {
                b.states.insert((p1, p2));
                for (a, tr1) in t.arcs(p1) {
                    if part.left[w as usize][tr1.next] {
                        b.arc((p1, p2), a, (tr1.next, p2), tr1.output.weight)?;
                    }
                }
            }
            for &(p1, a, q1) in &part.delta[w as usize] {
                let o1 = t.transition(p1, a).unwrap().output.weight;
                b.arc((p1, p2), a, (e(q1), q2), o1.times(&lambda2))?;
            }
            for &r in &right {
                b.states.insert((e(r), q2));
                for (a, tr1) in t.arcs(r) {
                    if part.right[w as usize][tr1.next] {
                        b.arc((r, q2), a, (e(tr1.next), q2), tr1.output.weight)?;
                    }
                }
            }
        }
    }

    // Failure arcs go on every state whose left coordinate lies in a left
    // class, not only on those created from an explicit arc of `p2`: a
    // right state with a failure arc and no explicit arcs still backs off.
    let is_left = |p1: StateId| part.left.iter().any(|c| c[p1]);
    let mut todo: Vec<Pair> = b.states.iter().copied().collect();
    while let Some((p1, p2)) = todo.pop() {
        if !is_left(p1) {
            continue;
        }
        if let Some(f) = ft.failure(p2) {
            let target = (p1, f.next);
            b.failures.insert((p1, p2), (target, f.output));
            if b.states.insert(target) {
                todo.push(target);
            }
        }
    }

    let mut pairs = vec![start];
    pairs.extend(b.states.iter().copied().filter(|&p| p != start));
    let index: BTreeMap<Pair, StateId> = pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let lookup = |p: &Pair| {
        index
            .get(p)
            .copied()
            .ok_or_else(|| Error::InvariantViolation(format!("state {p:?} was never created")))
    };

    let mut base = Transducer::new(t.input_alphabet().clone(), None);
    base.add_states(pairs.len() - 1);
    base.set_initial_output(*ft.initial_output());
    let mut fst = FailureTransducer::from_transducer(base);
    for ((src, a), (dst, w)) in &b.arcs {
        let (src, dst) = (lookup(src)?, lookup(dst)?);
        fst.base_mut().add_arc(src, *a, dst, *w)?;
    }
    for (src, (dst, phi)) in &b.failures {
        let (src, dst) = (lookup(src)?, lookup(dst)?);
        fst.set_failure(src, dst, *phi)?;
    }
    for (q, &(p1, p2)) in pairs.iter().enumerate() {
        if p1 == s1 {
            if let Some(rho) = ft.final_output(p2) {
                fst.base_mut().set_final(q, *rho)?;
            }
        }
    }
    let machine = ProductMachine { fst, pairs };
    check_coaccessible(&machine)?;
    Ok(machine)
}

/// Fails on the first state from which no input reaches a final state.
pub fn check_coaccessible(m: &ProductMachine) -> Result<()> {
    match m.fst.coaccessible_states().iter().position(|c| !c) {
        Some(q) => Err(Error::InvariantViolation(format!(
            "state {q} {:?} is not co-accessible",
            m.pairs[q]
        ))),
        None => Ok(()),
    }
}
