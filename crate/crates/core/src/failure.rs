//! Failure transducers: a transducer plus a partial failure arc per state.
//!
//! When a state has no explicit arc on the input symbol, the failure arc is
//! followed (emitting its failure output) and the lookup is retried at the
//! failure target. The resulting completed functions are what evaluation,
//! expansion and enumeration use.

use crate::algebra::{Alphabet, Monoid, Symbol};
use crate::error::{Error, Result};
use crate::transducer::{find_cycle, Automaton, StateId, Transducer};

#[derive(Debug, Clone, PartialEq)]
pub struct Failure<M> {
    pub next: StateId,
    pub output: M,
}

#[derive(Debug, Clone)]
pub struct FailureTransducer<M> {
    pub(crate) base: Transducer<M>,
    pub(crate) failure: Vec<Option<Failure<M>>>,
}

impl<M: Monoid> PartialEq for FailureTransducer<M> {
    fn eq(&self, other: &Self) -> bool {
        self.base == other.base
            && (0..self.base.num_states()).all(|q| self.failure(q) == other.failure(q))
    }
}

/// A violation of the monotonicity conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonotonicViolation {
    /// `q` is final but its failure target is not.
    FinalityLost { state: StateId },
    /// `q` has an arc on `symbol` but its failure target does not.
    MissingArc { state: StateId, symbol: Symbol },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonotonicReport {
    pub violations: Vec<MonotonicViolation>,
}

impl MonotonicReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Dense `(state, symbol) -> completed step` table.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletedTable<M> {
    width: usize,
    cells: Vec<Option<(StateId, M)>>,
}

impl<M: Monoid> CompletedTable<M> {
    pub fn get(&self, q: StateId, a: Symbol) -> Option<&(StateId, M)> {
        self.cells.get(q * self.width + a as usize)?.as_ref()
    }
}

impl<M: Monoid> FailureTransducer<M> {
    pub fn new(input: Alphabet, output: Option<Alphabet>) -> Self {
        Self::from_transducer(Transducer::new(input, output))
    }

    /// Wraps a plain transducer; no state has a failure arc.
    pub fn from_transducer(base: Transducer<M>) -> Self {
        FailureTransducer {
            base,
            failure: Vec::new(),
        }
    }

    pub fn base(&self) -> &Transducer<M> {
        &self.base
    }

    pub fn base_mut(&mut self) -> &mut Transducer<M> {
        &mut self.base
    }

    pub fn into_base(self) -> Transducer<M> {
        self.base
    }

    pub fn set_failure(&mut self, q: StateId, next: StateId, output: M) -> Result<()> {
        let n = self.base.num_states();
        if q >= n {
            return Err(Error::UnknownState(q));
        }
        if next >= n {
            return Err(Error::UnknownState(next));
        }
        if self.failure.len() < n {
            self.failure.resize(n, None);
        }
        self.failure[q] = Some(Failure { next, output });
        Ok(())
    }

    pub fn clear_failure(&mut self, q: StateId) {
        if let Some(slot) = self.failure.get_mut(q) {
            *slot = None;
        }
    }

    pub fn failure(&self, q: StateId) -> Option<&Failure<M>> {
        self.failure.get(q)?.as_ref()
    }

    pub(crate) fn failure_mut(&mut self, q: StateId) -> Option<&mut Failure<M>> {
        self.failure.get_mut(q)?.as_mut()
    }

    pub fn num_failures(&self) -> usize {
        self.failure.iter().flatten().count()
    }

    /// Explicit arcs only; failure arcs are not consulted.
    pub fn signature(&self, q: StateId) -> Vec<Symbol> {
        self.base.signature(q)
    }

    /// Completed step from `q` on `a`.
    ///
    /// The failure chain is walked at most `|Q|` times, so a chain that runs
    /// into a failure cycle without meeting an arc on `a` is undefined.
    pub fn completed_step(&self, q: StateId, a: Symbol) -> Option<(StateId, M)> {
        let mut phis: Vec<&M> = Vec::new();
        let mut cur = q;
        for _ in 0..=self.base.num_states() {
            if let Some(t) = self.base.transition(cur, a) {
                // phi(q) * (phi(f(q)) * (... * lambda(r, a)))
                let mut out = t.output.clone();
                for phi in phis.iter().rev() {
                    out = phi.times(&out);
                }
                return Some((t.next, out));
            }
            let fail = self.failure(cur)?;
            phis.push(&fail.output);
            cur = fail.next;
        }
        None
    }

    pub fn completed_run(&self, q: StateId, alpha: &[Symbol]) -> Result<(StateId, M)> {
        self.run(q, alpha)
    }

    pub fn output_of_failure(&self, alpha: &[Symbol]) -> Option<M> {
        self.output_of(alpha)
    }

    /// A state on a failure cycle, if any.
    pub fn find_failure_cycle(&self) -> Option<StateId> {
        find_cycle(self.base.num_states(), |q| {
            self.failure(q).map(|f| f.next).into_iter().collect()
        })
    }

    pub fn has_failure_cycles(&self) -> bool {
        self.find_failure_cycle().is_some()
    }

    fn require_acyclic(&self) -> Result<()> {
        match self.find_failure_cycle() {
            Some(q) => Err(Error::FailureCycle(q)),
            None => Ok(()),
        }
    }

    /// Number of failure arcs from `q` to the end of its chain.
    pub fn level(&self, q: StateId) -> Result<usize> {
        if q >= self.base.num_states() {
            return Err(Error::UnknownState(q));
        }
        let mut level = 0;
        let mut cur = q;
        while let Some(f) = self.failure(cur) {
            level += 1;
            if level > self.base.num_states() {
                return Err(Error::FailureCycle(q));
            }
            cur = f.next;
        }
        Ok(level)
    }

    /// Levels of all states, computed with memoization along chains.
    pub fn levels(&self) -> Result<Vec<usize>> {
        self.require_acyclic()?;
        let n = self.base.num_states();
        let mut levels: Vec<Option<usize>> = vec![None; n];
        for q in 0..n {
            let mut chain = Vec::new();
            let mut cur = q;
            let base = loop {
                if let Some(l) = levels[cur] {
                    break l;
                }
                match self.failure(cur) {
                    Some(f) => {
                        chain.push(cur);
                        cur = f.next;
                    }
                    None => {
                        levels[cur] = Some(0);
                        break 0;
                    }
                }
            };
            for (i, &p) in chain.iter().rev().enumerate() {
                levels[p] = Some(base + i + 1);
            }
        }
        Ok(levels.into_iter().map(|l| l.unwrap_or(0)).collect())
    }

    /// Completed steps for every state and symbol, filled in increasing
    /// level order so each failing cell reuses the cell of its target.
    pub fn completed_table(&self) -> Result<CompletedTable<M>> {
        let levels = self.levels()?;
        let n = self.base.num_states();
        let width = self.base.input_alphabet().id_bound();
        let mut order: Vec<StateId> = (0..n).collect();
        order.sort_by_key(|&q| (levels[q], q));
        let mut cells: Vec<Option<(StateId, M)>> = vec![None; n * width];
        let symbols: Vec<Symbol> = self.base.input_alphabet().symbols().collect();
        for q in order {
            for &a in &symbols {
                let cell = match self.base.transition(q, a) {
                    Some(t) => Some((t.next, t.output.clone())),
                    None => self.failure(q).and_then(|f| {
                        cells[f.next * width + a as usize]
                            .as_ref()
                            .map(|(r, out)| (*r, f.output.times(out)))
                    }),
                };
                cells[q * width + a as usize] = cell;
            }
        }
        Ok(CompletedTable { width, cells })
    }

    /// The plain transducer over the completed functions.
    pub fn expand(&self) -> Result<Transducer<M>> {
        let table = self.completed_table()?;
        let mut out = self.base.clone();
        let symbols: Vec<Symbol> = self.base.input_alphabet().symbols().collect();
        for q in 0..self.base.num_states() {
            for &a in &symbols {
                if let Some((r, o)) = table.get(q, a) {
                    out.put_arc(q, a, *r, o.clone());
                }
            }
        }
        Ok(out)
    }

    pub fn check_monotonic(&self) -> MonotonicReport {
        let mut violations = Vec::new();
        for q in 0..self.base.num_states() {
            let Some(f) = self.failure(q) else { continue };
            if self.base.is_final(q) && !self.base.is_final(f.next) {
                violations.push(MonotonicViolation::FinalityLost { state: q });
            }
            for (a, _) in self.base.arcs(q) {
                if self.base.transition(f.next, a).is_none() {
                    violations.push(MonotonicViolation::MissingArc {
                        state: q,
                        symbol: a,
                    });
                }
            }
        }
        MonotonicReport { violations }
    }

    /// States lying on a failure cycle.
    pub fn failure_cycle_states(&self) -> Vec<bool> {
        let n = self.base.num_states();
        // 0 = unvisited, 1 = on the current walk, 2 = done
        let mut mark = vec![0u8; n];
        let mut on_cycle = vec![false; n];
        for root in 0..n {
            let mut walk = Vec::new();
            let mut cur = Some(root);
            while let Some(q) = cur {
                match mark[q] {
                    0 => {
                        mark[q] = 1;
                        walk.push(q);
                        cur = self.failure(q).map(|f| f.next);
                    }
                    1 => {
                        let start = walk.iter().position(|&p| p == q).unwrap();
                        for &p in &walk[start..] {
                            on_cycle[p] = true;
                        }
                        break;
                    }
                    _ => break,
                }
            }
            for q in walk {
                mark[q] = 2;
            }
        }
        on_cycle
    }

    /// Drops the failure arc of every state on a failure cycle.
    pub fn remove_failure_cycles(&self) -> Result<FailureTransducer<M>> {
        let report = self.check_monotonic();
        if !report.passed() {
            return Err(Error::NotMonotonic(report.violations.len()));
        }
        let mut out = self.clone();
        for (q, cyc) in self.failure_cycle_states().into_iter().enumerate() {
            if cyc {
                out.clear_failure(q);
            }
        }
        Ok(out)
    }
}

impl<M: Monoid> Automaton for FailureTransducer<M> {
    type Output = M;

    fn input_alphabet(&self) -> &Alphabet {
        self.base.input_alphabet()
    }

    fn num_states(&self) -> usize {
        self.base.num_states()
    }

    fn start(&self) -> StateId {
        self.base.start()
    }

    fn initial_output(&self) -> &M {
        self.base.initial_output()
    }

    fn final_output(&self, q: StateId) -> Option<&M> {
        self.base.final_output(q)
    }

    fn step(&self, q: StateId, symbol: Symbol) -> Option<(StateId, M)> {
        self.completed_step(q, symbol)
    }
}
