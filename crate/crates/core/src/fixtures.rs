//! Small hand-built machines used by tests, examples and the documentation.

use crate::algebra::{Alphabet, Monoid, PairOutput, Weight, Word, END_MARKER};
use crate::failure::FailureTransducer;
use crate::transducer::Transducer;

fn w(v: f64) -> Weight {
    Weight::new(v)
}

fn pair(word: &[u32], v: f64) -> PairOutput {
    PairOutput::new(Word(word.to_vec()), w(v))
}

/// The output alphabet `{x, y}` shared by the fixtures (x = 1, y = 2).
pub fn omega() -> Alphabet {
    Alphabet::new(["x", "y"]).unwrap()
}

/// Stochastic back-off machine over `{x, y}`.
///
/// ```text
/// 0: rho 0.1   x/0.6 -> 1   y/0.3 -> 2
/// 1: rho 0.3   x/0.25 -> 1  fail/1.5 -> 0
/// 2: rho 0.2   y/0.2 -> 2   fail/1.0 -> 0
/// ```
pub fn f1() -> FailureTransducer<Weight> {
    let mut ft = FailureTransducer::new(omega(), None);
    let t = ft.base_mut();
    t.add_states(2);
    t.add_arc(0, 1, 1, w(0.6)).unwrap();
    t.add_arc(0, 2, 2, w(0.3)).unwrap();
    t.add_arc(1, 1, 1, w(0.25)).unwrap();
    t.add_arc(2, 2, 2, w(0.2)).unwrap();
    t.set_final(0, w(0.1)).unwrap();
    t.set_final(1, w(0.3)).unwrap();
    t.set_final(2, w(0.2)).unwrap();
    ft.set_failure(1, 0, w(1.5)).unwrap();
    ft.set_failure(2, 0, w(1.0)).unwrap();
    ft
}

/// Back-off machine whose weights (failure outputs included) are all at
/// most 1, for max-times pushing.
///
/// ```text
/// 0: rho 0.2   x/0.5 -> 1   y/0.3 -> 0
/// 1: rho 0.5   x/0.2 -> 1   fail/1.0 -> 0
/// ```
pub fn f_max() -> FailureTransducer<Weight> {
    let mut ft = FailureTransducer::new(omega(), None);
    let t = ft.base_mut();
    t.add_states(1);
    t.add_arc(0, 1, 1, w(0.5)).unwrap();
    t.add_arc(0, 2, 0, w(0.3)).unwrap();
    t.add_arc(1, 1, 1, w(0.2)).unwrap();
    t.set_final(0, w(0.2)).unwrap();
    t.set_final(1, w(0.5)).unwrap();
    ft.set_failure(1, 0, w(1.0)).unwrap();
    ft
}

/// Input alphabet `{$, a, b, c}` of fixture V (a = 1, b = 2, c = 3).
pub fn sigma_v() -> Alphabet {
    Alphabet::new(["$", "a", "b", "c"]).unwrap()
}

/// Star-ready conditional model: `a` and `c` both spell `x`, `b` spells `y`,
/// and every word ends with `$`.
///
/// ```text
/// 0 -a/<x,0.7>-> 1   0 -c/<x,0.3>-> 1   0 -b/<y,1.0>-> 1   1 -$/<eps,1>-> 2
/// ```
pub fn v() -> Transducer<PairOutput> {
    let mut t = Transducer::new(sigma_v(), Some(omega()));
    t.add_states(2);
    t.add_arc(0, 1, 1, pair(&[1], 0.7)).unwrap();
    t.add_arc(0, 2, 1, pair(&[2], 1.0)).unwrap();
    t.add_arc(0, 3, 1, pair(&[1], 0.3)).unwrap();
    t.add_arc(1, END_MARKER, 2, pair(&[], 1.0)).unwrap();
    t.set_final(2, PairOutput::one()).unwrap();
    t
}

/// Fixture V with an extra `d/<eps,0.5>` self-loop on the middle state and
/// the `$` arc halved, so that the star has a loop that stays inside one
/// composed state class.
pub fn v_cyclic() -> Transducer<PairOutput> {
    let sigma = Alphabet::new(["$", "a", "b", "c", "d"]).unwrap();
    let mut t = Transducer::new(sigma, Some(omega()));
    t.add_states(2);
    t.add_arc(0, 1, 1, pair(&[1], 0.7)).unwrap();
    t.add_arc(0, 2, 1, pair(&[2], 1.0)).unwrap();
    t.add_arc(0, 3, 1, pair(&[1], 0.3)).unwrap();
    t.add_arc(1, 4, 1, pair(&[], 0.5)).unwrap();
    t.add_arc(1, END_MARKER, 2, pair(&[], 0.5)).unwrap();
    t.set_final(2, PairOutput::one()).unwrap();
    t
}

/// Star-ready model where `y` needs a left context: `a` emits nothing, then
/// `b` spells `y`. `c` spells `x` directly.
///
/// ```text
/// 0 -a/<eps,1>-> 1   1 -b/<y,1>-> 2   0 -c/<x,1>-> 2   2 -$/<eps,1>-> 3
/// ```
pub fn v_context() -> Transducer<PairOutput> {
    let mut t = Transducer::new(sigma_v(), Some(omega()));
    t.add_states(3);
    t.add_arc(0, 1, 1, pair(&[], 1.0)).unwrap();
    t.add_arc(1, 2, 2, pair(&[2], 1.0)).unwrap();
    t.add_arc(0, 3, 2, pair(&[1], 1.0)).unwrap();
    t.add_arc(2, END_MARKER, 3, pair(&[], 1.0)).unwrap();
    t.set_final(3, PairOutput::one()).unwrap();
    t
}

/// One-state machine over `{x, y}` that only accepts strings of `x`.
pub fn f_x_only() -> FailureTransducer<Weight> {
    let mut ft = FailureTransducer::new(omega(), None);
    let t = ft.base_mut();
    t.add_arc(0, 1, 0, w(0.5)).unwrap();
    t.set_final(0, w(0.5)).unwrap();
    ft
}
