//! Subsequential transducers and the evaluation machinery shared with
//! failure transducers.
//!
//! Everything that only needs "take one input symbol from a state" lives on
//! the [`Automaton`] trait, so evaluation, bounded enumeration and
//! co-accessibility work the same way for plain machines (explicit arcs) and
//! failure machines (completed arcs).

use std::collections::BTreeMap;

use crate::algebra::{Alphabet, Monoid, Symbol};
use crate::error::{Error, Result};

pub type StateId = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Transition<M> {
    pub next: StateId,
    pub output: M,
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct State<M> {
    pub(crate) arcs: BTreeMap<Symbol, Transition<M>>,
    pub(crate) final_output: Option<M>,
}

impl<M> Default for State<M> {
    fn default() -> Self {
        State {
            arcs: BTreeMap::new(),
            final_output: None,
        }
    }
}

/// A subsequential transducer over the output monoid `M`.
///
/// The transition and output functions share one map, so their domains are
/// equal by construction. Final outputs are stored per state, so the final
/// output function is defined exactly on the final states.
#[derive(Debug, Clone, PartialEq)]
pub struct Transducer<M> {
    pub(crate) input: Alphabet,
    pub(crate) output: Option<Alphabet>,
    pub(crate) states: Vec<State<M>>,
    pub(crate) start: StateId,
    pub(crate) initial_output: M,
}

impl<M: Monoid> Transducer<M> {
    /// A machine with one state (the initial one), no arcs and no finals.
    pub fn new(input: Alphabet, output: Option<Alphabet>) -> Self {
        Transducer {
            input,
            output,
            states: vec![State::default()],
            start: 0,
            initial_output: M::one(),
        }
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::default());
        self.states.len() - 1
    }

    pub fn add_states(&mut self, n: usize) {
        self.states.extend((0..n).map(|_| State::default()));
    }

    fn check_state(&self, q: StateId) -> Result<()> {
        if q < self.states.len() {
            Ok(())
        } else {
            Err(Error::UnknownState(q))
        }
    }

    pub fn set_start(&mut self, q: StateId) -> Result<()> {
        self.check_state(q)?;
        self.start = q;
        Ok(())
    }

    pub fn set_initial_output(&mut self, output: M) {
        self.initial_output = output;
    }

    pub fn set_final(&mut self, q: StateId, output: M) -> Result<()> {
        self.check_state(q)?;
        self.states[q].final_output = Some(output);
        Ok(())
    }

    pub fn clear_final(&mut self, q: StateId) {
        self.states[q].final_output = None;
    }

    /// Adds `src --symbol/output--> dst`. A second arc on the same
    /// `(src, symbol)` is rejected since the transition function is partial.
    pub fn add_arc(&mut self, src: StateId, symbol: Symbol, dst: StateId, output: M) -> Result<()> {
        self.check_state(src)?;
        self.check_state(dst)?;
        if !self.input.contains(symbol) {
            return Err(Error::UnknownSymbol(symbol));
        }
        if self.states[src].arcs.contains_key(&symbol) {
            return Err(Error::InvariantViolation(format!(
                "duplicate arc on ({src}, {})",
                self.input.label(symbol)
            )));
        }
        self.states[src]
            .arcs
            .insert(symbol, Transition { next: dst, output });
        Ok(())
    }

    /// Replaces the target and output of an existing arc, or inserts it.
    pub(crate) fn put_arc(&mut self, src: StateId, symbol: Symbol, dst: StateId, output: M) {
        self.states[src]
            .arcs
            .insert(symbol, Transition { next: dst, output });
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn output_alphabet(&self) -> Option<&Alphabet> {
        self.output.as_ref()
    }

    pub(crate) fn set_input_alphabet(&mut self, input: Alphabet) {
        self.input = input;
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn initial_output(&self) -> &M {
        &self.initial_output
    }

    pub fn final_output(&self, q: StateId) -> Option<&M> {
        self.states[q].final_output.as_ref()
    }

    pub fn is_final(&self, q: StateId) -> bool {
        self.states[q].final_output.is_some()
    }

    pub fn finals(&self) -> impl Iterator<Item = StateId> + '_ {
        (0..self.states.len()).filter(|&q| self.is_final(q))
    }

    pub fn transition(&self, q: StateId, symbol: Symbol) -> Option<&Transition<M>> {
        self.states[q].arcs.get(&symbol)
    }

    /// Explicit arcs of `q` in ascending symbol order.
    pub fn arcs(&self, q: StateId) -> impl Iterator<Item = (Symbol, &Transition<M>)> + '_ {
        self.states[q].arcs.iter().map(|(&a, t)| (a, t))
    }

    pub(crate) fn arcs_mut(
        &mut self,
        q: StateId,
    ) -> impl Iterator<Item = (&Symbol, &mut Transition<M>)> + '_ {
        self.states[q].arcs.iter_mut()
    }

    pub(crate) fn final_output_mut(&mut self, q: StateId) -> Option<&mut M> {
        self.states[q].final_output.as_mut()
    }

    /// Symbols with an explicit arc at `q`.
    pub fn signature(&self, q: StateId) -> Vec<Symbol> {
        self.states[q].arcs.keys().copied().collect()
    }

    /// States that have at least one arc entering them.
    pub fn has_in_arcs(&self, q: StateId) -> bool {
        self.states
            .iter()
            .any(|s| s.arcs.values().any(|t| t.next == q))
    }

    /// Restricts the machine to states that are both accessible and
    /// co-accessible, keeping their relative order.
    pub fn trim(&self) -> Result<Transducer<M>> {
        let live = self.accessible_states();
        let coacc = self.coaccessible_states();
        let keep: Vec<bool> = live.iter().zip(&coacc).map(|(a, b)| *a && *b).collect();
        if !keep[self.start] {
            return Err(Error::EmptyMachine);
        }
        Ok(self.restrict(&keep))
    }

    /// Keeps only the states flagged in `keep`, renumbered in order.
    pub(crate) fn restrict(&self, keep: &[bool]) -> Transducer<M> {
        let mut map = vec![usize::MAX; self.states.len()];
        let mut next = 0;
        for (q, &k) in keep.iter().enumerate() {
            if k {
                map[q] = next;
                next += 1;
            }
        }
        let states = self
            .states
            .iter()
            .enumerate()
            .filter(|(q, _)| keep[*q])
            .map(|(_, s)| State {
                arcs: s
                    .arcs
                    .iter()
                    .filter(|(_, t)| keep[t.next])
                    .map(|(&a, t)| {
                        (
                            a,
                            Transition {
                                next: map[t.next],
                                output: t.output.clone(),
                            },
                        )
                    })
                    .collect(),
                final_output: s.final_output.clone(),
            })
            .collect();
        Transducer {
            input: self.input.clone(),
            output: self.output.clone(),
            states,
            start: map[self.start],
            initial_output: self.initial_output.clone(),
        }
    }
}

/// One entry of a bounded enumeration: an input word and its output.
#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationEntry<M> {
    pub input: Vec<Symbol>,
    pub value: M,
}

/// Result of a bounded depth-first walk.
#[derive(Debug, Clone)]
pub struct Exploration<M> {
    /// Accepted words with their outputs, in lexicographic order.
    pub entries: Vec<EnumerationEntry<M>>,
    /// Prefixes of exactly the horizon length that end in a co-accessible
    /// state with a live continuation, with the output accumulated so far.
    pub frontier: Vec<EnumerationEntry<M>>,
}

/// Anything that consumes one input symbol at a time from a finite state set.
///
/// For plain transducers `step` follows explicit arcs; for failure
/// transducers it follows completed arcs, which makes every provided method
/// below operate on the expanded machine without materializing it.
pub trait Automaton {
    type Output: Monoid;

    fn input_alphabet(&self) -> &Alphabet;
    fn num_states(&self) -> usize;
    fn start(&self) -> StateId;
    fn initial_output(&self) -> &Self::Output;
    fn final_output(&self, q: StateId) -> Option<&Self::Output>;
    fn step(&self, q: StateId, symbol: Symbol) -> Option<(StateId, Self::Output)>;

    /// Defined steps out of `q` in ascending symbol order.
    fn successors(&self, q: StateId) -> Vec<(Symbol, StateId, Self::Output)> {
        self.input_alphabet()
            .symbols()
            .filter_map(|a| self.step(q, a).map(|(r, o)| (a, r, o)))
            .collect()
    }

    /// Generalized transition and output from `q` on `alpha`.
    fn run(&self, q: StateId, alpha: &[Symbol]) -> Result<(StateId, Self::Output)> {
        if q >= self.num_states() {
            return Err(Error::UnknownState(q));
        }
        let mut state = q;
        let mut acc = Self::Output::one();
        for &a in alpha {
            if !self.input_alphabet().contains(a) {
                return Err(Error::UnknownSymbol(a));
            }
            let (next, out) = self.step(state, a).ok_or(Error::UndefinedPath)?;
            acc = acc.times(&out);
            state = next;
        }
        Ok((state, acc))
    }

    /// `O^q(alpha)`: the output from `q` including the final output.
    fn output_from(&self, q: StateId, alpha: &[Symbol]) -> Option<Self::Output> {
        let (end, acc) = self.run(q, alpha).ok()?;
        let rho = self.final_output(end)?;
        Some(acc.times(rho))
    }

    /// The function represented by the machine.
    fn output_of(&self, alpha: &[Symbol]) -> Option<Self::Output> {
        let tail = self.output_from(self.start(), alpha)?;
        Some(self.initial_output().times(&tail))
    }

    /// All accepted words of length at most `max_len`, lexicographic by
    /// symbol id, with their outputs (initial output included).
    fn enumerate(&self, max_len: usize) -> Vec<EnumerationEntry<Self::Output>> {
        explore(
            self,
            self.start(),
            max_len,
            Some(self.initial_output().clone()),
        )
        .entries
    }

    /// Entries of `O^q` up to `max_len`, without the initial output.
    fn enumerate_from(&self, q: StateId, max_len: usize) -> Vec<EnumerationEntry<Self::Output>> {
        explore(self, q, max_len, None).entries
    }

    fn accessible_states(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.start()];
        seen[self.start()] = true;
        while let Some(q) = stack.pop() {
            for (_, r, _) in self.successors(q) {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    }

    /// States from which some input reaches a final state, found by reverse
    /// reachability from the finals.
    fn coaccessible_states(&self) -> Vec<bool> {
        let n = self.num_states();
        let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for q in 0..n {
            for (_, r, _) in self.successors(q) {
                preds[r].push(q);
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<StateId> = (0..n).filter(|&q| self.final_output(q).is_some()).collect();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &preds[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Whether the transition graph restricted to co-accessible states has
    /// no cycle.
    fn is_acyclic(&self) -> bool {
        let coacc = self.coaccessible_states();
        find_cycle(self.num_states(), |q| {
            self.successors(q)
                .into_iter()
                .map(|(_, r, _)| r)
                .filter(|&r| coacc[r])
                .collect()
        })
        .is_none()
    }
}

/// Three-color DFS; returns a state on a cycle if one exists.
pub(crate) fn find_cycle<F>(n: usize, mut succ: F) -> Option<StateId>
where
    F: FnMut(StateId) -> Vec<StateId>,
{
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Grey,
        Black,
    }
    let mut color = vec![Color::White; n];
    for root in 0..n {
        if color[root] != Color::White {
            continue;
        }
        let mut stack: Vec<(StateId, Vec<StateId>, usize)> = vec![(root, succ(root), 0)];
        color[root] = Color::Grey;
        while let Some((q, next, i)) = stack.last_mut() {
            if *i < next.len() {
                let r = next[*i];
                *i += 1;
                match color[r] {
                    Color::Grey => return Some(r),
                    Color::White => {
                        color[r] = Color::Grey;
                        let succs = succ(r);
                        stack.push((r, succs, 0));
                    }
                    Color::Black => {}
                }
            } else {
                color[*q] = Color::Black;
                stack.pop();
            }
        }
    }
    None
}

pub(crate) fn explore<A: Automaton + ?Sized>(
    machine: &A,
    q: StateId,
    max_len: usize,
    initial: Option<A::Output>,
) -> Exploration<A::Output> {
    let coacc = machine.coaccessible_states();
    let mut entries = Vec::new();
    let mut frontier = Vec::new();
    if !coacc[q] {
        return Exploration { entries, frontier };
    }
    let mut prefix = Vec::new();
    let acc = initial.unwrap_or_else(A::Output::one);
    walk(
        machine,
        &coacc,
        q,
        acc,
        &mut prefix,
        max_len,
        &mut entries,
        &mut frontier,
    );
    Exploration { entries, frontier }
}

#[allow(clippy::too_many_arguments)]
fn walk<A: Automaton + ?Sized>(
    machine: &A,
    coacc: &[bool],
    q: StateId,
    acc: A::Output,
    prefix: &mut Vec<Symbol>,
    remaining: usize,
    entries: &mut Vec<EnumerationEntry<A::Output>>,
    frontier: &mut Vec<EnumerationEntry<A::Output>>,
) {
    if let Some(rho) = machine.final_output(q) {
        entries.push(EnumerationEntry {
            input: prefix.clone(),
            value: acc.times(rho),
        });
    }
    let succs: Vec<_> = machine
        .successors(q)
        .into_iter()
        .filter(|(_, r, _)| coacc[*r])
        .collect();
    if remaining == 0 {
        if !succs.is_empty() {
            frontier.push(EnumerationEntry {
                input: prefix.clone(),
                value: acc,
            });
        }
        return;
    }
    for (a, r, out) in succs {
        prefix.push(a);
        walk(
            machine,
            coacc,
            r,
            acc.times(&out),
            prefix,
            remaining - 1,
            entries,
            frontier,
        );
        prefix.pop();
    }
}

impl<M: Monoid> Automaton for Transducer<M> {
    type Output = M;

    fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    fn num_states(&self) -> usize {
        self.states.len()
    }

    fn start(&self) -> StateId {
        self.start
    }

    fn initial_output(&self) -> &M {
        &self.initial_output
    }

    fn final_output(&self, q: StateId) -> Option<&M> {
        self.states[q].final_output.as_ref()
    }

    fn step(&self, q: StateId, symbol: Symbol) -> Option<(StateId, M)> {
        self.states[q]
            .arcs
            .get(&symbol)
            .map(|t| (t.next, t.output.clone()))
    }

    fn successors(&self, q: StateId) -> Vec<(Symbol, StateId, M)> {
        self.states[q]
            .arcs
            .iter()
            .map(|(&a, t)| (a, t.next, t.output.clone()))
            .collect()
    }
}
