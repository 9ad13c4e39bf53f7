//! Line-oriented text format for machines.
//!
//! ```text
//! # comment
//! T weight-only | pair
//! A <input labels...>
//! O <output labels...>          (pair machines only)
//! N <count>                     (optional: number of states)
//! P <state> <left> <right>      (optional: origin of a product state)
//! I <state> [<word>] <weight>   (initial state and output)
//! E <state> [<word>] <weight>   (final output)
//! arc <src> <sym> <dst> [<word>] <weight>
//! fail <src> <dst> [<word>] <weight>
//! ```
//!
//! Words appear only in pair machines: `-` is the empty word, longer words
//! are comma-separated labels. The number of states is one more than the
//! largest state index mentioned, or the `N` count if that is larger; the
//! printer writes `N` only when trailing states would otherwise be lost.
//! Printing orders records by state and then by symbol and writes weights
//! with 17 significant digits, so equal machines print to identical bytes
//! and parsing a printed machine gives it back exactly.

use std::fmt::Write as _;

use crate::algebra::{Alphabet, Monoid, PairOutput, Weight, Word};
use crate::error::{Error, Result};
use crate::failure::FailureTransducer;
use crate::transducer::{Automaton, StateId, Transducer};

/// Largest state index accepted by the parser.
const MAX_STATE: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub enum Machine {
    Weight(FailureTransducer<Weight>),
    Pair(FailureTransducer<PairOutput>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub machine: Machine,
    /// Pair origins of product states, when the file has `P` records.
    pub pairs: Option<Vec<(StateId, StateId)>>,
}

impl Document {
    pub fn weight(machine: FailureTransducer<Weight>) -> Self {
        Document {
            machine: Machine::Weight(machine),
            pairs: None,
        }
    }

    pub fn pair(machine: FailureTransducer<PairOutput>) -> Self {
        Document {
            machine: Machine::Pair(machine),
            pairs: None,
        }
    }
}

/// Formats like C's `%.17g`.
pub fn format_weight(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.16e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (16 - exp) as usize, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Output values that can be written and read in the text format.
pub trait TextOutput: Monoid {
    const KIND: &'static str;
    /// Number of tokens one value takes.
    const TOKENS: usize;
    fn write(&self, omega: Option<&Alphabet>) -> String;
    fn read(tokens: &[&str], omega: Option<&Alphabet>, line: usize) -> Result<Self>;
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn read_weight(token: &str, line: usize) -> Result<Weight> {
    let v: f64 = token
        .parse()
        .map_err(|_| syntax(line, format!("bad weight {token:?}")))?;
    Weight::try_new(v).ok_or_else(|| {
        Error::InvariantViolation(format!(
            "line {line}: weight {token} is outside the non-negative reals"
        ))
    })
}

impl TextOutput for Weight {
    const KIND: &'static str = "weight-only";
    const TOKENS: usize = 1;

    fn write(&self, _: Option<&Alphabet>) -> String {
        format_weight(self.value())
    }

    fn read(tokens: &[&str], _: Option<&Alphabet>, line: usize) -> Result<Self> {
        read_weight(tokens[0], line)
    }
}

impl TextOutput for PairOutput {
    const KIND: &'static str = "pair";
    const TOKENS: usize = 2;

    fn write(&self, omega: Option<&Alphabet>) -> String {
        let word = if self.word.is_epsilon() {
            "-".to_string()
        } else {
            omega.unwrap().render(self.word.symbols(), ",")
        };
        format!("{word} {}", format_weight(self.weight.value()))
    }

    fn read(tokens: &[&str], omega: Option<&Alphabet>, line: usize) -> Result<Self> {
        let omega = omega.ok_or_else(|| syntax(line, "missing O record"))?;
        let word = if tokens[0] == "-" {
            Word::epsilon()
        } else {
            let symbols = tokens[0]
                .split(',')
                .map(|l| {
                    omega
                        .id(l)
                        .ok_or_else(|| syntax(line, format!("unknown output symbol {l:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            Word(symbols)
        };
        Ok(PairOutput::new(word, read_weight(tokens[1], line)?))
    }
}

pub fn print_machine<M: TextOutput>(
    ft: &FailureTransducer<M>,
    pairs: Option<&[(StateId, StateId)]>,
) -> String {
    let t = ft.base();
    let sigma = t.input_alphabet();
    let omega = t.output_alphabet();
    let mut out = String::new();
    writeln!(out, "T {}", M::KIND).unwrap();
    let labels: Vec<&str> = sigma.symbols().map(|a| sigma.label(a)).collect();
    writeln!(out, "A {}", labels.join(" ")).unwrap();
    if M::TOKENS == 2 {
        if let Some(omega) = omega {
            let labels: Vec<&str> = omega.symbols().map(|a| omega.label(a)).collect();
            writeln!(out, "O {}", labels.join(" ")).unwrap();
        }
    }
    let n = t.num_states();
    if pairs.is_none() && referenced_bound(ft) < n {
        writeln!(out, "N {n}").unwrap();
    }
    if let Some(pairs) = pairs {
        for (q, (l, r)) in pairs.iter().enumerate() {
            writeln!(out, "P {q} {l} {r}").unwrap();
        }
    }
    writeln!(out, "I {} {}", t.start(), t.initial_output().write(omega)).unwrap();
    for q in 0..t.num_states() {
        if let Some(rho) = t.final_output(q) {
            writeln!(out, "E {q} {}", rho.write(omega)).unwrap();
        }
        for (a, tr) in t.arcs(q) {
            writeln!(
                out,
                "arc {q} {} {} {}",
                sigma.label(a),
                tr.next,
                tr.output.write(omega)
            )
            .unwrap();
        }
        if let Some(f) = ft.failure(q) {
            writeln!(out, "fail {q} {} {}", f.next, f.output.write(omega)).unwrap();
        }
    }
    out
}

/// One more than the largest state index a printed record mentions.
fn referenced_bound<M: Monoid>(ft: &FailureTransducer<M>) -> usize {
    let t = ft.base();
    let mut top = t.start();
    for q in 0..t.num_states() {
        let used = t.is_final(q) || t.arcs(q).next().is_some() || ft.failure(q).is_some();
        if used {
            top = top.max(q);
        }
        for (_, tr) in t.arcs(q) {
            top = top.max(tr.next);
        }
        if let Some(f) = ft.failure(q) {
            top = top.max(f.next);
        }
    }
    top + 1
}

pub fn print(doc: &Document) -> String {
    let pairs = doc.pairs.as_deref();
    match &doc.machine {
        Machine::Weight(m) => print_machine(m, pairs),
        Machine::Pair(m) => print_machine(m, pairs),
    }
}

struct Header {
    sigma: Alphabet,
    omega: Option<Alphabet>,
    pair: bool,
}

enum Record<'a> {
    Count(usize),
    Pair(StateId, StateId, StateId),
    Initial(StateId, Vec<&'a str>),
    Final(StateId, Vec<&'a str>),
    Arc(StateId, &'a str, StateId, Vec<&'a str>),
    Fail(StateId, StateId, Vec<&'a str>),
}

fn state(token: &str, line: usize) -> Result<StateId> {
    let q: StateId = token
        .parse()
        .map_err(|_| syntax(line, format!("bad state {token:?}")))?;
    if q > MAX_STATE {
        return Err(syntax(line, format!("state {q} is too large")));
    }
    Ok(q)
}

pub fn parse(text: &str) -> Result<Document> {
    let mut kind: Option<bool> = None;
    let mut sigma: Option<Alphabet> = None;
    let mut omega: Option<Alphabet> = None;
    let mut records: Vec<(usize, Record)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap();
        let tokens: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, rest)) = tokens.split_first() else {
            continue;
        };
        let in_body = |what: &str| -> Result<()> {
            if kind.is_none() || sigma.is_none() {
                Err(syntax(line, format!("{what} before the T and A records")))
            } else {
                Ok(())
            }
        };
        let header_err = |what: &str| -> Result<()> {
            if records.is_empty() {
                Ok(())
            } else {
                Err(syntax(line, format!("{what} after body records")))
            }
        };
        match head {
            "T" => {
                if kind.is_some() {
                    return Err(syntax(line, "duplicate T record"));
                }
                kind = Some(match rest {
                    ["weight-only"] => false,
                    ["pair"] => true,
                    _ => return Err(syntax(line, "expected `T weight-only` or `T pair`")),
                });
            }
            "A" => {
                header_err("A")?;
                if kind.is_none() {
                    return Err(syntax(line, "A before T"));
                }
                if sigma.is_some() {
                    return Err(syntax(line, "duplicate A record"));
                }
                sigma = Some(
                    Alphabet::new(rest.iter().copied()).map_err(|e| syntax(line, e.to_string()))?,
                );
            }
            "O" => {
                header_err("O")?;
                if kind != Some(true) {
                    return Err(syntax(line, "O record in a weight-only machine"));
                }
                if omega.is_some() {
                    return Err(syntax(line, "duplicate O record"));
                }
                omega = Some(
                    Alphabet::new(rest.iter().copied()).map_err(|e| syntax(line, e.to_string()))?,
                );
            }
            _ => {
                in_body(head)?;
                let value = |slice: &[&'_ str]| -> Result<()> {
                    let want = if kind == Some(true) { 2 } else { 1 };
                    if slice.len() == want {
                        Ok(())
                    } else {
                        Err(syntax(line, format!("expected {want} output token(s)")))
                    }
                };
                let rec = match head {
                    "N" => match rest {
                        [n] => Record::Count(state(n, line)?),
                        _ => return Err(syntax(line, "expected `N <count>`")),
                    },
                    "P" => match rest {
                        [q, l, r] => {
                            Record::Pair(state(q, line)?, state(l, line)?, state(r, line)?)
                        }
                        _ => return Err(syntax(line, "expected `P <state> <left> <right>`")),
                    },
                    "I" | "E" if !rest.is_empty() => {
                        value(&rest[1..])?;
                        let q = state(rest[0], line)?;
                        if head == "I" {
                            Record::Initial(q, rest[1..].to_vec())
                        } else {
                            Record::Final(q, rest[1..].to_vec())
                        }
                    }
                    "arc" if rest.len() >= 3 => {
                        value(&rest[3..])?;
                        Record::Arc(
                            state(rest[0], line)?,
                            rest[1],
                            state(rest[2], line)?,
                            rest[3..].to_vec(),
                        )
                    }
                    "fail" if rest.len() >= 2 => {
                        value(&rest[2..])?;
                        Record::Fail(
                            state(rest[0], line)?,
                            state(rest[1], line)?,
                            rest[2..].to_vec(),
                        )
                    }
                    "I" | "E" | "arc" | "fail" => {
                        return Err(syntax(line, format!("too few fields in {head} record")))
                    }
                    _ => return Err(syntax(line, format!("unknown record {head:?}"))),
                };
                records.push((line, rec));
            }
        }
    }
    let pair = kind.ok_or_else(|| syntax(1, "missing T record"))?;
    let sigma = sigma.ok_or_else(|| syntax(1, "missing A record"))?;
    if pair && omega.is_none() {
        return Err(syntax(1, "pair machine without an O record"));
    }
    let header = Header { sigma, omega, pair };
    if header.pair {
        build::<PairOutput>(&header, &records).map(|(m, pairs)| Document {
            machine: Machine::Pair(m),
            pairs,
        })
    } else {
        build::<Weight>(&header, &records).map(|(m, pairs)| Document {
            machine: Machine::Weight(m),
            pairs,
        })
    }
}

type Built<M> = (FailureTransducer<M>, Option<Vec<(StateId, StateId)>>);

fn build<M: TextOutput>(header: &Header, records: &[(usize, Record)]) -> Result<Built<M>> {
    let omega = header.omega.as_ref();
    let mut n = 1;
    for (_, rec) in records {
        let bound = match rec {
            Record::Count(count) => *count,
            Record::Pair(q, ..) | Record::Initial(q, _) | Record::Final(q, _) => *q + 1,
            Record::Arc(p, _, q, _) | Record::Fail(p, q, _) => *p.max(q) + 1,
        };
        n = n.max(bound);
    }
    let mut t: Transducer<M> = Transducer::new(header.sigma.clone(), omega.cloned());
    t.add_states(n - 1);
    let mut ft = FailureTransducer::from_transducer(t);
    let mut pairs: Vec<Option<(StateId, StateId)>> = vec![None; n];
    let mut any_pair = false;
    let mut seen_initial = false;
    let mut seen_count = false;
    for (line, rec) in records {
        let line = *line;
        match rec {
            Record::Count(_) => {
                if std::mem::replace(&mut seen_count, true) {
                    return Err(syntax(line, "duplicate N record"));
                }
            }
            Record::Pair(q, l, r) => {
                if pairs[*q].replace((*l, *r)).is_some() {
                    return Err(syntax(line, format!("duplicate P record for state {q}")));
                }
                any_pair = true;
            }
            Record::Initial(q, v) => {
                if seen_initial {
                    return Err(syntax(line, "duplicate I record"));
                }
                seen_initial = true;
                ft.base_mut().set_start(*q)?;
                ft.base_mut().set_initial_output(M::read(v, omega, line)?);
            }
            Record::Final(q, v) => {
                if ft.final_output(*q).is_some() {
                    return Err(syntax(line, format!("duplicate E record for state {q}")));
                }
                let rho = M::read(v, omega, line)?;
                ft.base_mut().set_final(*q, rho)?;
            }
            Record::Arc(p, sym, q, v) => {
                let a = header
                    .sigma
                    .id(sym)
                    .ok_or_else(|| syntax(line, format!("unknown input symbol {sym:?}")))?;
                if ft.base().transition(*p, a).is_some() {
                    return Err(syntax(line, format!("duplicate arc on ({p}, {sym})")));
                }
                let out = M::read(v, omega, line)?;
                ft.base_mut().add_arc(*p, a, *q, out)?;
            }
            Record::Fail(p, q, v) => {
                if ft.failure(*p).is_some() {
                    return Err(syntax(line, format!("duplicate fail record for state {p}")));
                }
                let out = M::read(v, omega, line)?;
                ft.set_failure(*p, *q, out)?;
            }
        }
    }
    let pairs =
        if any_pair {
            let all: Option<Vec<_>> = pairs.into_iter().collect();
            Some(all.ok_or_else(|| {
                Error::InvariantViolation("P records must cover every state".into())
            })?)
        } else {
            None
        };
    Ok((ft, pairs))
}

/// Parses a weight-only machine.
pub fn parse_weight_machine(text: &str) -> Result<FailureTransducer<Weight>> {
    match parse(text)?.machine {
        Machine::Weight(m) => Ok(m),
        Machine::Pair(_) => Err(syntax(1, "expected a weight-only machine")),
    }
}

/// Parses a pair machine.
pub fn parse_pair_machine(text: &str) -> Result<FailureTransducer<PairOutput>> {
    match parse(text)?.machine {
        Machine::Pair(m) => Ok(m),
        Machine::Weight(_) => Err(syntax(1, "expected a pair machine")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::properties::check_stochastic;

    #[test]
    fn weights_use_17_digits() {
        assert_eq!(format_weight(0.0), "0");
        assert_eq!(format_weight(1.0), "1");
        assert_eq!(format_weight(1.5), "1.5");
        assert_eq!(format_weight(0.7), "0.69999999999999996");
        assert_eq!(format_weight(0.126), "0.126");
        assert_eq!(format_weight(1e-5), "1.0000000000000001e-05");
        assert_eq!(format_weight(1e20), "1e+20");
        assert_eq!(format_weight(123456.0), "123456");
        for v in [0.1, 0.3, 1.0 / 3.0, 2.5e-7, 6.02e23, 0.054] {
            assert_eq!(format_weight(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn round_trip_f1() {
        let f1 = fixtures::f1();
        let text = print_machine(&f1, None);
        let back = parse_weight_machine(&text).unwrap();
        assert_eq!(back, f1);
        assert_eq!(print_machine(&back, None), text);
        assert!(check_stochastic(&back, 1e-9).passed());
    }

    #[test]
    fn round_trip_v() {
        let v = FailureTransducer::from_transducer(fixtures::v());
        let text = print_machine(&v, None);
        assert_eq!(text.lines().count(), 9);
        let back = parse_pair_machine(&text).unwrap();
        assert_eq!(back, v);
        assert_eq!(print_machine(&back, None), text);
    }

    #[test]
    fn round_trip_pairs() {
        let f1 = fixtures::f1();
        let pairs = vec![(0, 0), (0, 1), (1, 2)];
        let text = print_machine(&f1, Some(&pairs));
        let doc = parse(&text).unwrap();
        assert_eq!(doc.pairs, Some(pairs));
        assert_eq!(print(&doc), text);
    }

    #[test]
    fn trailing_isolated_states_survive() {
        let mut ft = fixtures::f1();
        ft.base_mut().add_states(2);
        let text = print_machine(&ft, None);
        assert!(text.contains("\nN 5\n"));
        assert_eq!(parse_weight_machine(&text).unwrap(), ft);
        assert!(!print_machine(&fixtures::f1(), None).contains("\nN "));
        assert!(matches!(
            parse("T weight-only\nA x\nN 2\nN 3\n"),
            Err(Error::Syntax { line: 4, .. })
        ));
    }

    #[test]
    fn negative_weight_is_invariant_violation() {
        let text = "T weight-only\nA x\narc 0 x 1 -0.1\nE 1 1\n";
        assert!(matches!(parse(text), Err(Error::InvariantViolation(_))));
    }

    #[test]
    fn duplicate_arc_is_syntax_error() {
        let text = "T weight-only\nA x\narc 0 x 1 0.5\narc 0 x 0 0.5\n";
        assert_eq!(parse(text).unwrap_err().name(), "syntax-error");
        match parse(text) {
            Err(Error::Syntax { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_symbol_and_garbage() {
        assert!(matches!(
            parse("T weight-only\nA x\narc 0 z 1 0.5\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse("T weight-only\nA x\nbogus 1\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse("T pair\nA a\nO x\narc 0 a 1 0.5\n"),
            Err(Error::Syntax { line: 4, .. })
        ));
        assert!(matches!(parse("A x\n"), Err(Error::Syntax { .. })));
    }

    #[test]
    fn comments_and_canonical_order() {
        let text = "# back-off\nT weight-only\nA x y\n\nE 1 0.5 # stop\narc 1 y 0 1\narc 0 x 1 1\narc 1 x 1 0.5\nI 0 1\n";
        let doc = parse(text).unwrap();
        let printed = print(&doc);
        assert_eq!(
            printed,
            "T weight-only\nA x y\nI 0 1\narc 0 x 1 1\nE 1 0.5\narc 1 x 1 0.5\narc 1 y 0 1\n"
        );
        assert_eq!(print(&parse(&printed).unwrap()), printed);
    }
}
