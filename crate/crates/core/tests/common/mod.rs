//! Seeded random machines for the integration tests.
#![allow(dead_code)]

use phi_fst::compose::ProductMachine;
use phi_fst::star::{normalize_for_star, StarReadyTransducer};
use phi_fst::{
    Alphabet, Automaton, FailureTransducer, Monoid, PairOutput, StateId, Symbol, Transducer,
    Weight, Word, END_MARKER,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn letters(n: usize) -> Alphabet {
    let labels: Vec<String> = (0..n)
        .map(|i| ((b'a' + i as u8) as char).to_string())
        .collect();
    Alphabet::new(labels).unwrap()
}

pub fn omega(n: usize) -> Alphabet {
    let labels: Vec<String> = (0..n)
        .map(|i| ((b'x' + i as u8) as char).to_string())
        .collect();
    Alphabet::new(labels).unwrap()
}

fn weight(rng: &mut ChaCha8Rng) -> Weight {
    // Multiples of 1/8 keep the arithmetic exact where it can be.
    Weight::new(rng.gen_range(1..=16) as f64 / 8.0)
}

fn random_word(rng: &mut ChaCha8Rng, omega: &Alphabet, max: usize) -> Word {
    let symbols: Vec<Symbol> = omega.symbols().collect();
    let len = rng.gen_range(0..=max);
    Word((0..len).map(|_| *symbols.choose(rng).unwrap()).collect())
}

/// Failure transducer whose failure arcs always go to a lower state.
pub fn acyclic_failure_transducer(seed: u64) -> FailureTransducer<Weight> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=12);
    let sigma = letters(rng.gen_range(1..=4));
    let symbols: Vec<Symbol> = sigma.symbols().collect();
    let mut ft = FailureTransducer::new(sigma, None);
    ft.base_mut().add_states(n - 1);
    for q in 0..n {
        for &a in &symbols {
            if rng.gen_bool(0.45) {
                let r = rng.gen_range(0..n);
                let w = weight(&mut rng);
                ft.base_mut().add_arc(q, a, r, w).unwrap();
            }
        }
        if rng.gen_bool(0.4) {
            let w = weight(&mut rng);
            ft.base_mut().set_final(q, w).unwrap();
        }
        if q > 0 && rng.gen_bool(0.7) {
            let r = rng.gen_range(0..q);
            let w = weight(&mut rng);
            ft.set_failure(q, r, w).unwrap();
        }
    }
    let w = weight(&mut rng);
    ft.base_mut().set_initial_output(w);
    ft
}

/// Monotonic failure transducer with a failure cycle through two or three
/// states that share their signature and finality.
pub fn monotonic_with_cycle(seed: u64) -> FailureTransducer<Weight> {
    let mut rng = rng(seed);
    let n = rng.gen_range(4..=10);
    let sigma = letters(rng.gen_range(2..=4));
    let symbols: Vec<Symbol> = sigma.symbols().collect();
    let mut ft = FailureTransducer::new(sigma, None);
    ft.base_mut().add_states(n - 1);

    let mut order: Vec<StateId> = (0..n).collect();
    order.shuffle(&mut rng);
    let k = rng.gen_range(2..=3);
    let cycle = order[..k].to_vec();
    let sig: Vec<Symbol> = symbols
        .iter()
        .copied()
        .filter(|_| rng.gen_bool(0.5))
        .collect();
    let cycle_final = rng.gen_bool(0.5);

    for q in 0..n {
        let arcs: Vec<Symbol> = if cycle.contains(&q) {
            sig.clone()
        } else {
            symbols
                .iter()
                .copied()
                .filter(|_| rng.gen_bool(0.5))
                .collect()
        };
        for a in arcs {
            let r = rng.gen_range(0..n);
            let w = weight(&mut rng);
            ft.base_mut().add_arc(q, a, r, w).unwrap();
        }
        let fin = if cycle.contains(&q) {
            cycle_final
        } else {
            rng.gen_bool(0.4)
        };
        if fin {
            let w = weight(&mut rng);
            ft.base_mut().set_final(q, w).unwrap();
        }
    }
    for i in 0..k {
        let w = weight(&mut rng);
        ft.set_failure(cycle[i], cycle[(i + 1) % k], w).unwrap();
    }
    // Other states fail to any state that keeps monotonicity.
    for q in 0..n {
        if cycle.contains(&q) || !rng.gen_bool(0.6) {
            continue;
        }
        let t = ft.base();
        let ok: Vec<StateId> = (0..n)
            .filter(|&r| r != q)
            .filter(|&r| !t.is_final(q) || t.is_final(r))
            .filter(|&r| t.arcs(q).all(|(a, _)| t.transition(r, a).is_some()))
            .collect();
        if let Some(&r) = ok.choose(&mut rng) {
            let w = weight(&mut rng);
            ft.set_failure(q, r, w).unwrap();
        }
    }
    ft
}

/// Stochastic back-off machine over `omega`: state 0 has an arc on every
/// symbol, every other state fails to a state whose signature contains its
/// own, and all states are final. With `max_weights_le_one` every weight,
/// failure outputs included, is at most 1 and the machine is only
/// substochastic.
pub fn backoff(seed: u64, omega: &Alphabet, max_weights_le_one: bool) -> FailureTransducer<Weight> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=5);
    let symbols: Vec<Symbol> = omega.symbols().collect();
    // Structure first: signatures, then failure targets among lower states
    // whose signature contains the state's own, so chains end at 0 and the
    // machine is monotonic.
    let sigs: Vec<Vec<Symbol>> = (0..n)
        .map(|q| {
            if q == 0 {
                symbols.clone()
            } else {
                symbols
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.5))
                    .collect()
            }
        })
        .collect();
    let fails: Vec<Option<StateId>> = (0..n)
        .map(|q| {
            if q == 0 || sigs[q].len() == symbols.len() {
                return None;
            }
            let ok: Vec<StateId> = (0..q)
                .filter(|&r| sigs[q].iter().all(|a| sigs[r].contains(a)))
                .collect();
            ok.choose(&mut rng).copied()
        })
        .collect();
    let mut ft = FailureTransducer::new(omega.clone(), None);
    ft.base_mut().add_states(n - 1);
    // Weights go in state order, so the completed steps of a failure
    // target are known when its mass is needed.
    for q in 0..n {
        let parts = sigs[q].len() + 1 + usize::from(fails[q].is_some());
        let mut raw: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|x| *x /= total);
        ft.base_mut().set_final(q, Weight::new(raw[0])).unwrap();
        for (i, &a) in sigs[q].iter().enumerate() {
            let r = rng.gen_range(0..n);
            ft.base_mut()
                .add_arc(q, a, r, Weight::new(raw[i + 1]))
                .unwrap();
        }
        if let Some(f) = fails[q] {
            let rest: f64 = symbols
                .iter()
                .filter(|a| !sigs[q].contains(a))
                .map(|&a| ft.completed_step(f, a).unwrap().1.value())
                .sum();
            let mut phi = raw[parts - 1] / rest;
            if max_weights_le_one {
                phi = phi.min(1.0);
            }
            ft.set_failure(q, f, Weight::new(phi)).unwrap();
        }
    }
    ft
}

/// Random subsequential transducer over `sigma` with outputs in `omega*`
/// (words of length 0 to 2) and random initial and final words.
pub fn random_pair_transducer(seed: u64, omega: &Alphabet) -> Transducer<PairOutput> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=5);
    let sigma = letters(rng.gen_range(1..=3));
    let symbols: Vec<Symbol> = sigma.symbols().collect();
    let mut t = Transducer::new(sigma, Some(omega.clone()));
    t.add_states(n - 1);
    let out = |rng: &mut ChaCha8Rng| PairOutput::new(random_word(rng, omega, 2), weight(rng));
    for q in 0..n {
        for &a in &symbols {
            if rng.gen_bool(0.6) {
                let r = rng.gen_range(0..n);
                let o = out(&mut rng);
                t.add_arc(q, a, r, o).unwrap();
            }
        }
        if rng.gen_bool(0.5) {
            let o = PairOutput::new(random_word(&mut rng, omega, 1), weight(&mut rng));
            t.set_final(q, o).unwrap();
        }
    }
    let o = PairOutput::new(random_word(&mut rng, omega, 1), weight(&mut rng));
    t.set_initial_output(o);
    t
}

/// Acyclic conditional probabilistic transducer whose range is every word
/// over `omega` of length at most `depth`. Each output symbol has a few
/// spellings, some of them two input symbols long.
pub fn spelling_transducer(seed: u64, omega: &Alphabet, depth: usize) -> Transducer<PairOutput> {
    let mut rng = rng(seed);
    let outs: Vec<Symbol> = omega.symbols().collect();
    // spellings[i] = (output symbol, weight, has a second input symbol)
    let mut spellings = Vec::new();
    for &w in &outs {
        let k = rng.gen_range(1..=2);
        let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        for r in raw {
            spellings.push((w, r / total, rng.gen_bool(0.3)));
        }
    }
    let sigma = letters(spellings.len() + 1);
    let tail = spellings.len() as Symbol + 1;
    let mut t = Transducer::new(sigma, Some(omega.clone()));
    t.add_states(depth);
    for d in 0..=depth {
        t.set_final(d, PairOutput::one()).unwrap();
        if d == depth {
            continue;
        }
        for (i, &(w, p, two)) in spellings.iter().enumerate() {
            let out = PairOutput::new(Word::symbol(w), Weight::new(p));
            let a = i as Symbol + 1;
            if two {
                let mid = t.add_state();
                t.add_arc(d, a, mid, out).unwrap();
                t.add_arc(mid, tail, d + 1, PairOutput::one()).unwrap();
            } else {
                t.add_arc(d, a, d + 1, out).unwrap();
            }
        }
    }
    t
}

/// Acyclic stochastic failure transducer over `omega` whose arcs go from
/// depth `d` to depth `d + 1`; states at the last depth only stop.
pub fn layered_backoff(seed: u64, omega: &Alphabet, depth: usize) -> FailureTransducer<Weight> {
    let mut rng = rng(seed);
    let symbols: Vec<Symbol> = omega.symbols().collect();
    let mut ft = FailureTransducer::new(omega.clone(), None);
    // layers[d] = states at depth d; the first state of a layer is complete.
    let mut layers: Vec<Vec<StateId>> = vec![vec![0]];
    for _ in 1..=depth {
        let width = rng.gen_range(1..=2);
        let layer: Vec<StateId> = (0..width).map(|_| ft.base_mut().add_state()).collect();
        layers.push(layer);
    }
    for layer in layers.iter_mut().take(depth) {
        for _ in 0..rng.gen_range(0..=1) {
            layer.push(ft.base_mut().add_state());
        }
    }
    for d in (0..=depth).rev() {
        let layer = layers[d].clone();
        for (i, &q) in layer.iter().enumerate() {
            if d == depth {
                ft.base_mut().set_final(q, Weight::ONE).unwrap();
                continue;
            }
            let sig: Vec<Symbol> = if i == 0 {
                symbols.clone()
            } else {
                let s: Vec<Symbol> = symbols
                    .iter()
                    .copied()
                    .filter(|_| rng.gen_bool(0.5))
                    .collect();
                if s.len() == symbols.len() {
                    s[..s.len() - 1].to_vec()
                } else {
                    s
                }
            };
            let parts = sig.len() + 1 + usize::from(i > 0);
            let mut raw: Vec<f64> = (0..parts).map(|_| rng.gen_range(0.2..1.0)).collect();
            let total: f64 = raw.iter().sum();
            raw.iter_mut().for_each(|x| *x /= total);
            ft.base_mut().set_final(q, Weight::new(raw[0])).unwrap();
            for (j, &a) in sig.iter().enumerate() {
                let r = *layers[d + 1].choose(&mut rng).unwrap();
                ft.base_mut()
                    .add_arc(q, a, r, Weight::new(raw[j + 1]))
                    .unwrap();
            }
            if i > 0 {
                let root = layer[0];
                let rest: f64 = symbols
                    .iter()
                    .filter(|a| !sig.contains(a))
                    .map(|&a| ft.base().transition(root, a).unwrap().output.value())
                    .sum();
                ft.set_failure(q, root, Weight::new(raw[parts - 1] / rest))
                    .unwrap();
            }
        }
    }
    ft
}

/// Star-ready conditional model over `omega`. The initial state may reach
/// further left states through empty-output arcs; crossing arcs emit one
/// output symbol each; right states end in `$` with completion mass 1.
/// With `acyclic` false some right state gets an empty-output self-loop.
pub fn star_ready(seed: u64, omega: &Alphabet, acyclic: bool) -> StarReadyTransducer {
    let mut rng = rng(seed);
    let outs: Vec<Symbol> = omega.symbols().collect();
    let sigma = letters(8).with_end_marker();
    let pool: Vec<Symbol> = (1..=8).collect();
    let mut t = Transducer::new(sigma, Some(omega.clone()));

    let n_left = rng.gen_range(1..=3);
    let n_right = rng.gen_range(1..=3);
    let left: Vec<StateId> = std::iter::once(0)
        .chain((1..n_left).map(|_| t.add_state()))
        .collect();
    let right: Vec<StateId> = (0..n_right).map(|_| t.add_state()).collect();
    let fin = t.add_state();
    t.set_final(fin, PairOutput::one()).unwrap();

    // Left states: each later one hangs off an earlier one by an empty arc.
    let mut free: Vec<Vec<Symbol>> = vec![pool.clone(); t.num_states()];
    for s in free.iter_mut() {
        s.shuffle(&mut rng);
    }
    for i in 1..n_left {
        let parent = left[rng.gen_range(0..i)];
        let a = free[parent].pop().unwrap();
        t.add_arc(parent, a, left[i], PairOutput::one()).unwrap();
    }
    // Crossing arcs; each output symbol gets at least one, each left state
    // at least one.
    let mut crossing: Vec<(StateId, Symbol, Symbol)> = Vec::new();
    let mut pending: Vec<Symbol> = outs.clone();
    for &l in &left {
        let w = pending
            .pop()
            .unwrap_or_else(|| *outs.choose(&mut rng).unwrap());
        crossing.push((l, free[l].pop().unwrap(), w));
    }
    for w in pending {
        let l = *left.choose(&mut rng).unwrap();
        crossing.push((l, free[l].pop().unwrap(), w));
    }
    for _ in 0..rng.gen_range(0..=2) {
        let l = *left.choose(&mut rng).unwrap();
        if let Some(a) = free[l].pop() {
            crossing.push((l, a, *outs.choose(&mut rng).unwrap()));
        }
    }
    let mut raw: Vec<f64> = crossing.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
    for &w in &outs {
        let total: f64 = crossing
            .iter()
            .zip(&raw)
            .filter(|(c, _)| c.2 == w)
            .map(|(_, r)| r)
            .sum();
        for (c, r) in crossing.iter().zip(raw.iter_mut()) {
            if c.2 == w {
                *r /= total;
            }
        }
    }
    let targets: Vec<StateId> = crossing
        .iter()
        .map(|_| *right.choose(&mut rng).unwrap())
        .collect();
    for ((&(l, a, w), &p), &r) in crossing.iter().zip(&raw).zip(&targets) {
        t.add_arc(l, a, r, PairOutput::new(Word::symbol(w), Weight::new(p)))
            .unwrap();
    }
    // Right states: `$` to the final state plus empty arcs to later right
    // states, weights summing to 1.
    // The loop goes on a right state that some crossing arc reaches, so
    // trimming keeps it.
    let looped = if acyclic {
        None
    } else {
        right.iter().position(|r| *r == targets[0])
    };
    for (i, &r) in right.iter().enumerate() {
        let mut targets: Vec<(Symbol, StateId)> = vec![(END_MARKER, fin)];
        for &r2 in &right[i + 1..] {
            if rng.gen_bool(0.5) {
                targets.push((free[r].pop().unwrap(), r2));
            }
        }
        if looped == Some(i) {
            targets.push((free[r].pop().unwrap(), r));
        }
        let mut raw: Vec<f64> = targets.iter().map(|_| rng.gen_range(0.2..1.0)).collect();
        let total: f64 = raw.iter().sum();
        raw.iter_mut().for_each(|x| *x /= total);
        for (&(a, r2), &p) in targets.iter().zip(&raw) {
            t.add_arc(r, a, r2, PairOutput::new(Word::epsilon(), Weight::new(p)))
                .unwrap();
        }
    }
    normalize_for_star(&t).unwrap()
}

/// Every state pair `(left, right)` of `m` whose left coordinate is the
/// initial state of the left operand.
pub fn initial_pairs(m: &ProductMachine) -> Vec<StateId> {
    let s1 = m.pairs[m.fst.start()].0;
    (0..m.pairs.len()).filter(|&q| m.pairs[q].0 == s1).collect()
}

/// Enumeration table with weights rounded to 1e-9, one line per entry.
pub fn rounded_table<A: Automaton<Output = Weight>>(m: &A, max_len: usize) -> String {
    m.enumerate(max_len)
        .iter()
        .map(|e| format!("{:?} {:.9}\n", e.input, e.value.value()))
        .collect()
}

pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
