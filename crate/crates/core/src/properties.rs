//! Checkers for the stochastic, probabilistic, conditional probabilistic and
//! canonical properties.
//!
//! All checkers work through [`Automaton`], so a failure transducer is
//! checked on its completed functions, i.e. as its expanded machine.
//! Infinite sums are approximated by bounded enumeration and the horizon is
//! part of every report.

use std::collections::BTreeMap;

use crate::algebra::{PairOutput, Semiring, Symbol, Weight, Word};
use crate::transducer::{explore, Automaton, StateId};

#[derive(Debug, Clone, PartialEq)]
pub struct StochasticReport {
    /// `|e(q) + sum_a lambda(q, a) - 1|` per state.
    pub residuals: Vec<f64>,
    pub tol: f64,
}

impl StochasticReport {
    pub fn passed(&self) -> bool {
        self.residuals.iter().all(|r| *r <= self.tol)
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}

pub fn check_stochastic<A>(t: &A, tol: f64) -> StochasticReport
where
    A: Automaton<Output = Weight>,
{
    let residuals = (0..t.num_states())
        .map(|q| {
            let stop = t.final_output(q).map_or(0.0, |w| w.value());
            let out: f64 = t.successors(q).iter().map(|(_, _, w)| w.value()).sum();
            (stop + out - 1.0).abs()
        })
        .collect();
    StochasticReport { residuals, tol }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilisticReport {
    pub max_len: usize,
    /// Sum of `O(alpha)` over enumerated inputs.
    pub partial_sum: f64,
    /// Whether the enumeration covers the whole domain.
    pub exhaustive: bool,
    /// Inputs whose value lies outside `[0, 1 + tol]`.
    pub out_of_range: Vec<(Vec<Symbol>, f64)>,
    pub tol: f64,
}

impl ProbabilisticReport {
    pub fn passed(&self) -> bool {
        self.out_of_range.is_empty()
            && self.partial_sum <= 1.0 + self.tol
            && (!self.exhaustive || (self.partial_sum - 1.0).abs() <= self.tol)
    }
}

/// Whether every accepted word has length below `max_len`.
fn horizon_is_exhaustive<A: Automaton + ?Sized>(t: &A, max_len: usize) -> bool {
    t.is_acyclic() && max_len >= t.num_states()
}

pub fn check_probabilistic<A>(t: &A, max_len: usize, tol: f64) -> ProbabilisticReport
where
    A: Automaton<Output = Weight>,
{
    let entries = t.enumerate(max_len);
    let partial_sum = entries.iter().map(|e| e.value.value()).sum();
    let out_of_range = entries
        .iter()
        .filter(|e| e.value.value() > 1.0 + tol)
        .map(|e| (e.input.clone(), e.value.value()))
        .collect();
    ProbabilisticReport {
        max_len,
        partial_sum,
        exhaustive: horizon_is_exhaustive(t, max_len),
        out_of_range,
        tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupStatus {
    Pass,
    Fail,
    /// Some longer input may still produce this output word.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalGroup {
    pub word: Word,
    pub sum: f64,
    pub status: GroupStatus,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalReport {
    pub max_len: usize,
    pub groups: Vec<ConditionalGroup>,
}

impl ConditionalReport {
    pub fn passed(&self) -> bool {
        self.groups.iter().all(|g| g.status != GroupStatus::Fail)
    }

    pub fn group(&self, word: &Word) -> Option<&ConditionalGroup> {
        self.groups.iter().find(|g| &g.word == word)
    }
}

/// Groups enumerated entries by output word and checks that the input
/// weights of each group sum to 1.
///
/// Output words only grow along a path, so a group is fully covered unless
/// some unfinished prefix at the horizon has emitted a prefix of it.
pub fn check_conditional_probabilistic<A>(t: &A, max_len: usize, tol: f64) -> ConditionalReport
where
    A: Automaton<Output = PairOutput>,
{
    let exploration = explore(t, t.start(), max_len, Some(t.initial_output().clone()));
    let mut sums: BTreeMap<Word, f64> = BTreeMap::new();
    for e in &exploration.entries {
        *sums.entry(e.value.word.clone()).or_insert(0.0) += e.value.weight.value();
    }
    let groups = sums
        .into_iter()
        .map(|(word, sum)| {
            let open = exploration
                .frontier
                .iter()
                .any(|f| f.value.word.is_prefix_of(&word));
            let status = if sum > 1.0 + tol {
                GroupStatus::Fail
            } else if (sum - 1.0).abs() <= tol {
                GroupStatus::Pass
            } else if open {
                GroupStatus::Inconclusive
            } else {
                GroupStatus::Fail
            };
            ConditionalGroup { word, sum, status }
        })
        .collect();
    ConditionalReport { max_len, groups }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalReport {
    pub semiring: Semiring,
    pub max_len: usize,
    /// Partial sum of `O^q` per state.
    pub sums: Vec<f64>,
    /// Whether the enumeration from `q` covers its whole domain.
    pub exhaustive: Vec<bool>,
    pub tol: f64,
}

impl CanonicalReport {
    pub fn state_passed(&self, q: StateId) -> bool {
        let s = self.sums[q];
        s <= 1.0 + self.tol && (!self.exhaustive[q] || s >= 1.0 - self.tol)
    }

    pub fn passed(&self) -> bool {
        (0..self.sums.len()).all(|q| self.state_passed(q))
    }
}

pub fn check_canonical<A>(t: &A, semiring: Semiring, max_len: usize, tol: f64) -> CanonicalReport
where
    A: Automaton<Output = Weight>,
{
    let n = t.num_states();
    let acyclic = t.is_acyclic();
    let mut sums = Vec::with_capacity(n);
    let mut exhaustive = Vec::with_capacity(n);
    for q in 0..n {
        let entries = t.enumerate_from(q, max_len);
        sums.push(semiring.sum(entries.iter().map(|e| e.value.value())));
        exhaustive.push(acyclic && max_len >= n);
    }
    CanonicalReport {
        semiring,
        max_len,
        sums,
        exhaustive,
        tol,
    }
}

/// Per-state `|e(q) (+) (+)_a lambda(q, a) - 1|`, the one-step form of
/// canonicality.
pub fn local_canonical_residuals<A>(t: &A, semiring: Semiring) -> Vec<f64>
where
    A: Automaton<Output = Weight>,
{
    (0..t.num_states())
        .map(|q| {
            let stop = t.final_output(q).map_or(0.0, |w| w.value());
            let outs = t.successors(q).into_iter().map(|(_, _, w)| w.value());
            let total = semiring.plus(stop, semiring.sum(outs));
            (total - 1.0).abs()
        })
        .collect()
}
