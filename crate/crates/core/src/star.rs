//! Kleene star of a conditional probabilistic transducer.
//!
//! The star is only defined for machines in a normal form: prefix-free
//! domain, no arcs into the initial state, the initial state not final, and
//! unit initial and final outputs. [`normalize_for_star`] brings a trimmed
//! machine into that form without changing its function (up to the `$` end
//! marker it may append).

use crate::algebra::{Monoid, PairOutput, Symbol, END_MARKER};
use crate::error::{Error, Result};
use crate::transducer::{Automaton, StateId, Transducer};

/// A machine that satisfies the star normal form.
#[derive(Debug, Clone, PartialEq)]
pub struct StarReadyTransducer {
    base: Transducer<PairOutput>,
    dollar: bool,
}

impl StarReadyTransducer {
    /// Checks the normal form and wraps `base`.
    pub fn new(base: Transducer<PairOutput>) -> Result<Self> {
        validate(&base)?;
        Ok(StarReadyTransducer {
            base,
            dollar: false,
        })
    }

    pub fn base(&self) -> &Transducer<PairOutput> {
        &self.base
    }

    pub fn into_base(self) -> Transducer<PairOutput> {
        self.base
    }

    /// Whether normalization appended the `$` end marker.
    pub fn dollar_added(&self) -> bool {
        self.dollar
    }

    /// Output symbols that no arc or final output emits.
    pub fn missing_output_symbols(&self) -> Vec<Symbol> {
        missing_output_symbols(&self.base)
    }
}

/// Output symbols of `t`'s output alphabet that never occur in an output.
pub fn missing_output_symbols(t: &Transducer<PairOutput>) -> Vec<Symbol> {
    let Some(omega) = t.output_alphabet() else {
        return Vec::new();
    };
    let mut seen = vec![false; omega.id_bound()];
    let mut mark = |o: &PairOutput| {
        for &s in o.word.symbols() {
            seen[s as usize] = true;
        }
    };
    mark(t.initial_output());
    for q in 0..t.num_states() {
        for (_, tr) in t.arcs(q) {
            mark(&tr.output);
        }
        if let Some(rho) = t.final_output(q) {
            mark(rho);
        }
    }
    omega.symbols().filter(|&s| !seen[s as usize]).collect()
}

fn violation(msg: &str) -> Error {
    Error::PreconditionViolation(msg.to_string())
}

/// Checks every clause of the star normal form.
pub fn validate(t: &Transducer<PairOutput>) -> Result<()> {
    let s = t.start();
    let accessible = t.accessible_states();
    let coaccessible = t.coaccessible_states();
    if accessible.iter().zip(&coaccessible).any(|(a, c)| !(a & c)) {
        return Err(violation("machine is not trim"));
    }
    if t.has_in_arcs(s) {
        return Err(violation("an arc enters the initial state"));
    }
    if t.is_final(s) {
        return Err(violation("the initial state is final"));
    }
    if t.initial_output() != &PairOutput::one() {
        return Err(violation("initial output is not the unit"));
    }
    for q in t.finals() {
        if t.final_output(q) != Some(&PairOutput::one()) {
            return Err(violation("a final output is not the unit"));
        }
        if t.arcs(q).next().is_some() {
            return Err(violation("an arc leaves a final state"));
        }
    }
    Ok(())
}

/// Whether no final state has an outgoing path to a final state. On a trim
/// machine that is the same as no final state having an outgoing arc.
fn is_prefix_free(t: &Transducer<PairOutput>) -> bool {
    t.finals().all(|q| t.arcs(q).next().is_none())
}

pub fn normalize_for_star(v: &Transducer<PairOutput>) -> Result<StarReadyTransducer> {
    let mut t = v.trim()?;
    if t.is_final(t.start()) {
        return Err(Error::EpsilonInDomain);
    }

    let mut dollar = false;
    if !is_prefix_free(&t) {
        if t.input_alphabet().has_end_marker() {
            return Err(violation(
                "domain is not prefix-free and $ is already an input symbol",
            ));
        }
        t.set_input_alphabet(t.input_alphabet().with_end_marker());
        let finals: Vec<StateId> = t.finals().collect();
        let q_dollar = t.add_state();
        t.set_final(q_dollar, PairOutput::one())?;
        for q in finals {
            let rho = t.final_output(q).cloned().unwrap();
            t.clear_final(q);
            t.add_arc(q, END_MARKER, q_dollar, rho)?;
        }
        dollar = true;
    }

    if t.has_in_arcs(t.start()) {
        t = with_super_initial(&t);
    }

    let s = t.start();
    let iota = t.initial_output().clone();
    if iota != PairOutput::one() {
        for (_, tr) in t.arcs_mut(s) {
            tr.output = iota.times(&tr.output);
        }
        t.set_initial_output(PairOutput::one());
    }

    let finals: Vec<StateId> = t.finals().collect();
    for &q in &finals {
        let rho = t.final_output(q).cloned().unwrap();
        if rho == PairOutput::one() {
            continue;
        }
        for p in 0..t.num_states() {
            for (_, tr) in t.arcs_mut(p) {
                if tr.next == q {
                    tr.output = tr.output.times(&rho);
                }
            }
        }
        t.set_final(q, PairOutput::one())?;
    }

    validate(&t)?;
    Ok(StarReadyTransducer { base: t, dollar })
}

/// Copy of `t` with a fresh initial state at index 0 that has the arcs and
/// finality of the old initial state and no incoming arcs.
fn with_super_initial(t: &Transducer<PairOutput>) -> Transducer<PairOutput> {
    let n = t.num_states();
    let mut out = Transducer::new(t.input_alphabet().clone(), t.output_alphabet().cloned());
    out.add_states(n);
    let s = t.start();
    for q in 0..n {
        for (a, tr) in t.arcs(q) {
            out.put_arc(q + 1, a, tr.next + 1, tr.output.clone());
        }
        if let Some(rho) = t.final_output(q) {
            out.states[q + 1].final_output = Some(rho.clone());
        }
    }
    for (a, tr) in t.arcs(s) {
        out.put_arc(0, a, tr.next + 1, tr.output.clone());
    }
    out.states[0].final_output = t.final_output(s).cloned();
    out.start = 0;
    out.initial_output = t.initial_output().clone();
    out
}

/// The star of `v`: final states are removed, arcs into them go back to the
/// initial state, and the initial state becomes the only final state.
pub fn star(v: &StarReadyTransducer) -> Transducer<PairOutput> {
    let t = &v.base;
    let n = t.num_states();
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for (q, slot) in map.iter_mut().enumerate() {
        if !t.is_final(q) {
            *slot = next;
            next += 1;
        }
    }
    let s = map[t.start()];
    let mut out = Transducer::new(t.input_alphabet().clone(), t.output_alphabet().cloned());
    out.add_states(next - 1);
    for q in (0..n).filter(|&q| !t.is_final(q)) {
        for (a, tr) in t.arcs(q) {
            let target = if t.is_final(tr.next) { s } else { map[tr.next] };
            out.put_arc(map[q], a, target, tr.output.clone());
        }
    }
    out.start = s;
    out.states[s].final_output = Some(PairOutput::one());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{Alphabet, Weight, Word};
    use crate::fixtures;

    fn pair(word: &[Symbol], v: f64) -> PairOutput {
        PairOutput::new(Word(word.to_vec()), Weight::new(v))
    }

    #[test]
    fn fixture_v_is_already_normal() {
        let v = fixtures::v();
        let n = normalize_for_star(&v).unwrap();
        assert_eq!(n.base(), &v);
        assert!(!n.dollar_added());
        assert!(n.missing_output_symbols().is_empty());
    }

    #[test]
    fn idempotent() {
        let mut t = Transducer::new(Alphabet::new(["a", "b"]).unwrap(), Some(fixtures::omega()));
        t.add_states(1);
        t.add_arc(0, 1, 1, pair(&[1], 0.5)).unwrap();
        t.add_arc(1, 2, 1, pair(&[2], 0.5)).unwrap();
        t.set_final(1, pair(&[], 0.5)).unwrap();
        t.set_initial_output(pair(&[], 2.0));
        let once = normalize_for_star(&t).unwrap();
        let twice = normalize_for_star(once.base()).unwrap();
        assert_eq!(once.base(), twice.base());
    }

    #[test]
    fn dollar_augmentation() {
        let mut t = Transducer::new(Alphabet::new(["a", "b"]).unwrap(), Some(fixtures::omega()));
        t.add_states(1);
        t.add_arc(0, 1, 1, pair(&[1], 1.0)).unwrap();
        t.add_arc(1, 2, 1, pair(&[], 0.5)).unwrap();
        t.set_final(1, pair(&[], 0.5)).unwrap();
        let n = normalize_for_star(&t).unwrap();
        assert!(n.dollar_added());
        let b = n.base();
        let q_dollar = 2;
        let tr = b.transition(1, END_MARKER).unwrap();
        assert_eq!(tr.next, q_dollar);
        assert_eq!(tr.output, pair(&[], 0.5));
        assert_eq!(b.final_output(q_dollar), Some(&PairOutput::one()));
        assert_eq!(b.finals().collect::<Vec<_>>(), vec![q_dollar]);
    }

    #[test]
    fn super_initial_state() {
        let mut u = Transducer::new(
            Alphabet::new(["a", "b", "$"]).unwrap(),
            Some(fixtures::omega()),
        );
        u.add_states(2);
        u.add_arc(0, 1, 1, pair(&[1], 1.0)).unwrap();
        u.add_arc(1, 2, 0, pair(&[], 0.5)).unwrap();
        u.add_arc(1, END_MARKER, 2, pair(&[], 0.5)).unwrap();
        u.set_final(2, PairOutput::one()).unwrap();
        let n = normalize_for_star(&u).unwrap();
        let b = n.base();
        assert_eq!(b.num_states(), 4);
        assert_eq!(b.start(), 0);
        assert!(!b.has_in_arcs(0));
        assert_eq!(b.signature(0), u.signature(0));
        let ab_a = b.input_alphabet().parse_word("aba$").unwrap();
        assert_eq!(b.output_of(&ab_a), u.output_of(&ab_a));
    }

    #[test]
    fn epsilon_in_domain() {
        let mut t = Transducer::new(Alphabet::new(["a"]).unwrap(), Some(fixtures::omega()));
        t.set_final(0, PairOutput::one()).unwrap();
        assert_eq!(normalize_for_star(&t), Err(Error::EpsilonInDomain));
    }

    #[test]
    fn star_of_v() {
        let v = normalize_for_star(&fixtures::v()).unwrap();
        let s = star(&v);
        assert_eq!(s.num_states(), 2);
        assert_eq!(s.transition(1, END_MARKER).unwrap().next, 0);
        assert_eq!(s.finals().collect::<Vec<_>>(), vec![0]);
        let sigma = s.input_alphabet().clone();
        let o = s.output_of(&sigma.parse_word("a$b$").unwrap()).unwrap();
        assert_eq!(o.word, Word(vec![1, 2]));
        assert!((o.weight.value() - 0.7).abs() < 1e-15);
        assert_eq!(s.output_of(&[]).unwrap(), PairOutput::one());
    }

    #[test]
    fn star_keeps_conditional_property() {
        let v = normalize_for_star(&fixtures::v()).unwrap();
        let r = crate::properties::check_conditional_probabilistic(&star(&v), 6, 1e-9);
        assert!(r.passed());
    }

    #[test]
    fn missing_symbols_reported() {
        let mut t = Transducer::new(Alphabet::new(["a"]).unwrap(), Some(fixtures::omega()));
        t.add_states(1);
        t.add_arc(0, 1, 1, pair(&[1], 1.0)).unwrap();
        t.set_final(1, PairOutput::one()).unwrap();
        assert_eq!(missing_output_symbols(&t), vec![2]);
    }
}
