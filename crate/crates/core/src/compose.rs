//! Composition of a pair-output transducer with a failure transducer.
//!
//! States of the result are pairs `<p1, p2>`. An arc of the left machine
//! that emits nothing keeps `p2`; an arc emitting `w a..` moves `p2` along
//! `w a..` with the completed functions of the right machine, provided `p2`
//! has an explicit arc on `w`. Failure arcs are inherited from the right
//! coordinate, so the right machine's back-off structure survives.

use std::collections::{HashMap, VecDeque};

use crate::algebra::{Monoid, PairOutput, Symbol, Weight};
use crate::error::{Error, Result};
use crate::failure::FailureTransducer;
use crate::transducer::{Automaton, StateId, Transducer};

/// A failure transducer whose states are pairs of operand states.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductMachine {
    pub fst: FailureTransducer<Weight>,
    /// `pairs[q]` is the `(left, right)` origin of state `q`.
    pub pairs: Vec<(StateId, StateId)>,
}

impl ProductMachine {
    pub fn state_of(&self, pair: (StateId, StateId)) -> Option<StateId> {
        self.pairs.iter().position(|&p| p == pair)
    }
}

/// One arc of the product, before numbering.
struct PairArc {
    symbol: Symbol,
    target: (StateId, StateId),
    weight: Weight,
}

struct Composer<'a> {
    t: &'a Transducer<PairOutput>,
    ft: &'a FailureTransducer<Weight>,
}

impl Composer<'_> {
    fn arcs(&self, (p1, p2): (StateId, StateId)) -> Vec<PairArc> {
        let mut out = Vec::new();
        for (a, tr) in self.t.arcs(p1) {
            let word = tr.output.word.symbols();
            let o1 = tr.output.weight;
            match word.first() {
                None => out.push(PairArc {
                    symbol: a,
                    target: (tr.next, p2),
                    weight: o1,
                }),
                Some(&omega) => {
                    if self.ft.base().transition(p2, omega).is_none() {
                        continue;
                    }
                    if let Ok((q2, o2)) = self.ft.completed_run(p2, word) {
                        out.push(PairArc {
                            symbol: a,
                            target: (tr.next, q2),
                            weight: o1.times(&o2),
                        });
                    }
                }
            }
        }
        out
    }

    fn final_output(&self, (p1, p2): (StateId, StateId)) -> Option<Weight> {
        let rho1 = self.t.final_output(p1)?;
        let (q2, o2) = self.ft.completed_run(p2, rho1.word.symbols()).ok()?;
        let rho2 = self.ft.final_output(q2)?;
        Some(rho1.weight.times(&o2).times(rho2))
    }

    fn failure(&self, (p1, p2): (StateId, StateId)) -> Option<((StateId, StateId), Weight)> {
        self.ft.failure(p2).map(|f| ((p1, f.next), f.output))
    }
}

/// Composes `t` with `ft`.
///
/// With `accessible_only` the result holds the states reachable from the
/// initial state through arcs and failure arcs; otherwise it holds all of
/// `Q1 x Q2`, numbered `p1 * |Q2| + p2`.
pub fn compose(
    t: &Transducer<PairOutput>,
    ft: &FailureTransducer<Weight>,
    accessible_only: bool,
) -> Result<ProductMachine> {
    let omega = t
        .output_alphabet()
        .ok_or_else(|| Error::AlphabetMismatch("left operand has no output alphabet".into()))?;
    if omega != ft.input_alphabet() {
        return Err(Error::AlphabetMismatch(
            "left output alphabet differs from right input alphabet".into(),
        ));
    }
    if let Some(q) = ft.find_failure_cycle() {
        return Err(Error::FailureCycle(q));
    }

    let iota1 = t.initial_output();
    let (s2, walk_out) = ft
        .completed_run(ft.start(), iota1.word.symbols())
        .map_err(|_| Error::InitialUndefined)?;
    let start = (t.start(), s2);
    let iota = iota1.weight.times(ft.initial_output()).times(&walk_out);

    let c = Composer { t, ft };
    let n2 = ft.num_states();
    let pairs: Vec<(StateId, StateId)> = if accessible_only {
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut order = vec![start];
        index.insert(start, 0);
        let mut queue = VecDeque::from([start]);
        while let Some(p) = queue.pop_front() {
            let succ = c
                .arcs(p)
                .into_iter()
                .map(|arc| arc.target)
                .chain(c.failure(p).map(|(r, _)| r));
            for r in succ {
                if let std::collections::hash_map::Entry::Vacant(e) = index.entry(r) {
                    e.insert(order.len());
                    order.push(r);
                    queue.push_back(r);
                }
            }
        }
        order
    } else {
        (0..t.num_states())
            .flat_map(|p1| (0..n2).map(move |p2| (p1, p2)))
            .collect()
    };
    let index: HashMap<(StateId, StateId), StateId> =
        pairs.iter().enumerate().map(|(i, &p)| (p, i)).collect();

    let mut base = Transducer::new(t.input_alphabet().clone(), None);
    base.add_states(pairs.len() - 1);
    base.set_start(index[&start])?;
    base.set_initial_output(iota);
    let mut fst = FailureTransducer::from_transducer(base);
    for (q, &p) in pairs.iter().enumerate() {
        for arc in c.arcs(p) {
            fst.base_mut()
                .add_arc(q, arc.symbol, index[&arc.target], arc.weight)?;
        }
        if let Some(rho) = c.final_output(p) {
            fst.base_mut().set_final(q, rho)?;
        }
        if let Some((r, phi)) = c.failure(p) {
            fst.set_failure(q, index[&r], phi)?;
        }
    }
    Ok(ProductMachine { fst, pairs })
}

/// A disagreement found by [`verify_composition`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionMismatch {
    pub input: Vec<Symbol>,
    pub expected: Option<f64>,
    pub actual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub max_len: usize,
    pub checked: usize,
    pub mismatches: Vec<CompositionMismatch>,
}

impl CompositionReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares `result` with `alpha -> w1 * O_F(beta)` where
/// `O_T(alpha) = <beta, w1>`, for every input up to `max_len`.
pub fn verify_composition<A>(
    t: &Transducer<PairOutput>,
    ft: &FailureTransducer<Weight>,
    result: &A,
    max_len: usize,
    tol: f64,
) -> CompositionReport
where
    A: Automaton<Output = Weight>,
{
    let symbols: Vec<Symbol> = t.input_alphabet().symbols().collect();
    let mut mismatches = Vec::new();
    let mut checked = 0;
    let mut word = Vec::new();
    let mut check = |alpha: &[Symbol]| {
        checked += 1;
        let expected = t.output_of(alpha).and_then(|o| {
            ft.output_of(o.word.symbols())
                .map(|v| o.weight.times(&v).value())
        });
        let actual = result.output_of(alpha).map(|v| v.value());
        let agree = match (expected, actual) {
            (None, None) => true,
            (Some(e), Some(a)) => (e - a).abs() <= tol,
            _ => false,
        };
        if !agree {
            mismatches.push(CompositionMismatch {
                input: alpha.to_vec(),
                expected,
                actual,
            });
        }
    };
    all_words(&symbols, max_len, &mut word, &mut check);
    CompositionReport {
        max_len,
        checked,
        mismatches,
    }
}

/// Calls `visit` on every word over `symbols` of length at most `max_len`,
/// in lexicographic order.
pub fn all_words<F: FnMut(&[Symbol])>(
    symbols: &[Symbol],
    max_len: usize,
    word: &mut Vec<Symbol>,
    visit: &mut F,
) {
    visit(word);
    if word.len() == max_len {
        return;
    }
    for &a in symbols {
        word.push(a);
        all_words(symbols, max_len, word, visit);
        word.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Alphabet, Word};
    use crate::fixtures;
    use crate::star::{normalize_for_star, star};

    fn pair(word: &[Symbol], v: f64) -> PairOutput {
        PairOutput::new(Word(word.to_vec()), Weight::new(v))
    }

    fn v_star() -> Transducer<PairOutput> {
        star(&normalize_for_star(&fixtures::v()).unwrap())
    }

    #[test]
    fn epsilon_arcs_keep_right_state() {
        let sigma = Alphabet::new(["a", "b"]).unwrap();
        let mut t = Transducer::new(sigma, Some(fixtures::omega()));
        t.add_states(2);
        t.add_arc(0, 1, 1, pair(&[], 0.4)).unwrap();
        t.add_arc(1, 2, 2, pair(&[], 0.5)).unwrap();
        t.set_final(2, PairOutput::one()).unwrap();
        let m = compose(&t, &fixtures::f1(), true).unwrap();
        for (q, &(_, p2)) in m.pairs.iter().enumerate() {
            for (_, tr) in m.fst.base().arcs(q) {
                assert_eq!(m.pairs[tr.next].1, p2);
            }
        }
        let (_, o) = m.fst.base().run(m.fst.start(), &[1, 2]).unwrap();
        assert!((o.value() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn v_star_with_f1() {
        let vs = v_star();
        let f1 = fixtures::f1();
        let m = compose(&vs, &f1, true).unwrap();
        let alpha = vs.input_alphabet().parse_word("a$").unwrap();
        let o = m.fst.output_of_failure(&alpha).unwrap();
        assert!((o.value() - 0.126).abs() < 1e-12);
        assert!(verify_composition(&vs, &f1, &m.fst, 6, 1e-9).passed());
    }

    #[test]
    fn literal_product_agrees() {
        let vs = v_star();
        let f1 = fixtures::f1();
        let full = compose(&vs, &f1, false).unwrap();
        assert_eq!(full.fst.num_states(), vs.num_states() * f1.num_states());
        assert!(verify_composition(&vs, &f1, &full.fst, 5, 1e-9).passed());
    }

    #[test]
    fn perturbed_result_is_caught() {
        let vs = v_star();
        let f1 = fixtures::f1();
        let mut m = compose(&vs, &f1, true).unwrap();
        let q = m.fst.start();
        let (_, tr) = m.fst.base_mut().arcs_mut(q).next().unwrap();
        tr.output = Weight::new(tr.output.value() + 1e-3);
        let r = verify_composition(&vs, &f1, &m.fst, 4, 1e-9);
        assert!(!r.passed());
        assert!(!r.mismatches[0].input.is_empty());
    }

    #[test]
    fn empty_domain_is_vacuous() {
        let t = Transducer::<PairOutput>::new(fixtures::sigma_v(), Some(fixtures::omega()));
        let f1 = fixtures::f1();
        let m = compose(&t, &f1, true).unwrap();
        assert!(verify_composition(&t, &f1, &m.fst, 3, 1e-9).passed());
    }

    #[test]
    fn levels_follow_right_coordinate() {
        let f1 = fixtures::f1();
        let m = compose(&v_star(), &f1, true).unwrap();
        let levels = m.fst.levels().unwrap();
        for (q, &(_, p2)) in m.pairs.iter().enumerate() {
            assert_eq!(levels[q], f1.level(p2).unwrap());
        }
    }

    #[test]
    fn initial_walk_must_exist() {
        let mut t = fixtures::v();
        t.set_initial_output(pair(&[2, 1], 1.0));
        let mut ft = FailureTransducer::<Weight>::new(fixtures::omega(), None);
        ft.base_mut().add_arc(0, 2, 0, Weight::new(0.5)).unwrap();
        assert_eq!(compose(&t, &ft, true), Err(Error::InitialUndefined));
    }

    #[test]
    fn alphabet_mismatch() {
        let t = fixtures::v();
        let ft = FailureTransducer::<Weight>::new(Alphabet::new(["z"]).unwrap(), None);
        assert!(matches!(
            compose(&t, &ft, true),
            Err(Error::AlphabetMismatch(_))
        ));
    }
}
