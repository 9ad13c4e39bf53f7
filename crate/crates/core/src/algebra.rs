//! Output monoids, the two weight semirings and symbol tables.
//!
//! Weights live in the non-negative reals under multiplication. Pair outputs
//! combine an output word with a weight and multiply componentwise.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Dense symbol id. Id 0 is reserved for the end marker `$`.
pub type Symbol = u32;

/// The reserved end-marker symbol used to make domains prefix-free.
pub const END_MARKER: Symbol = 0;
pub const END_MARKER_LABEL: &str = "$";

/// A symbol table with a reserved slot for `$` at id 0.
///
/// Ordinary symbols get ids `1..`. The end marker is a member of the alphabet
/// only when `has_end_marker` is set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<String>,
    has_end_marker: bool,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut alphabet = Alphabet {
            labels: vec![END_MARKER_LABEL.to_string()],
            has_end_marker: false,
        };
        for label in labels {
            alphabet.push(label.into())?;
        }
        Ok(alphabet)
    }

    fn push(&mut self, label: String) -> Result<Symbol> {
        if label == END_MARKER_LABEL {
            if self.has_end_marker {
                return Err(Error::InvariantViolation("duplicate symbol $".into()));
            }
            self.has_end_marker = true;
            return Ok(END_MARKER);
        }
        if label.is_empty()
            || label == "-"
            || label.contains(|c: char| c.is_whitespace() || c == ',' || c == '#')
        {
            return Err(Error::InvariantViolation(format!(
                "invalid symbol label {label:?}"
            )));
        }
        if self.labels.contains(&label) {
            return Err(Error::InvariantViolation(format!(
                "duplicate symbol {label}"
            )));
        }
        self.labels.push(label);
        Ok((self.labels.len() - 1) as Symbol)
    }

    /// The same alphabet with `$` added.
    pub fn with_end_marker(&self) -> Self {
        Alphabet {
            labels: self.labels.clone(),
            has_end_marker: true,
        }
    }

    pub fn has_end_marker(&self) -> bool {
        self.has_end_marker
    }

    pub fn contains(&self, symbol: Symbol) -> bool {
        match symbol {
            END_MARKER => self.has_end_marker,
            s => (s as usize) < self.labels.len(),
        }
    }

    /// Member symbols in ascending id order.
    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        let first = if self.has_end_marker { 0 } else { 1 };
        (first..self.labels.len() as Symbol).filter(move |&s| self.contains(s))
    }

    /// Number of member symbols.
    pub fn len(&self) -> usize {
        self.labels.len() - 1 + usize::from(self.has_end_marker)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Exclusive upper bound on symbol ids, for dense tables.
    pub fn id_bound(&self) -> usize {
        self.labels.len()
    }

    pub fn label(&self, symbol: Symbol) -> &str {
        &self.labels[symbol as usize]
    }

    pub fn id(&self, label: &str) -> Option<Symbol> {
        let id = self.labels.iter().position(|l| l == label)? as Symbol;
        self.contains(id).then_some(id)
    }

    /// Splits `text` into symbols: whitespace-separated labels when the text
    /// contains whitespace, otherwise one symbol per character.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Symbol>> {
        let lookup = |tok: &str| {
            self.id(tok)
                .ok_or_else(|| Error::InvariantViolation(format!("symbol {tok:?} not in alphabet")))
        };
        if text.contains(char::is_whitespace) {
            text.split_whitespace().map(lookup).collect()
        } else {
            let mut buf = [0u8; 4];
            text.chars()
                .map(|c| lookup(c.encode_utf8(&mut buf)))
                .collect()
        }
    }

    /// Concatenates labels, separated by `sep`.
    pub fn render(&self, word: &[Symbol], sep: &str) -> String {
        word.iter()
            .map(|&s| self.label(s))
            .collect::<Vec<_>>()
            .join(sep)
    }
}

/// A non-negative real weight.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Weight(f64);

impl Weight {
    pub const ZERO: Weight = Weight(0.0);
    pub const ONE: Weight = Weight(1.0);

    /// Panics if `value` is negative, infinite or NaN.
    pub fn new(value: f64) -> Self {
        Self::try_new(value)
            .unwrap_or_else(|| panic!("weight {value} is not a finite non-negative real"))
    }

    pub fn try_new(value: f64) -> Option<Self> {
        (value.is_finite() && value >= 0.0).then_some(Weight(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Weight {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let value: f64 = s
            .parse()
            .map_err(|_| Error::InvariantViolation(format!("bad weight {s:?}")))?;
        Weight::try_new(value).ok_or_else(|| {
            Error::InvariantViolation(format!("weight {s} is not a non-negative real"))
        })
    }
}

impl From<Weight> for f64 {
    fn from(w: Weight) -> f64 {
        w.0
    }
}

/// A word over an output alphabet. The empty word is the monoid unit.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<Symbol>);

impl Word {
    pub fn epsilon() -> Self {
        Word(Vec::new())
    }

    pub fn symbol(s: Symbol) -> Self {
        Word(vec![s])
    }

    pub fn is_epsilon(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn first(&self) -> Option<Symbol> {
        self.0.first().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        out.extend_from_slice(&self.0);
        out.extend_from_slice(&other.0);
        Word(out)
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }
}

/// Element of the product monoid of output words and weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairOutput {
    pub word: Word,
    pub weight: Weight,
}

impl PairOutput {
    pub fn new(word: Word, weight: Weight) -> Self {
        PairOutput { word, weight }
    }
}

/// A monoid whose elements carry a non-negative weight component.
pub trait Monoid: Clone + PartialEq + fmt::Debug {
    fn one() -> Self;
    fn times(&self, rhs: &Self) -> Self;
    fn weight(&self) -> Weight;
    /// The output word, if this monoid has one.
    fn word(&self) -> Option<&Word> {
        None
    }
}

impl Monoid for Weight {
    fn one() -> Self {
        Weight::ONE
    }

    fn times(&self, rhs: &Self) -> Self {
        Weight(self.0 * rhs.0)
    }

    fn weight(&self) -> Weight {
        *self
    }
}

impl Monoid for PairOutput {
    fn one() -> Self {
        PairOutput::new(Word::epsilon(), Weight::ONE)
    }

    fn times(&self, rhs: &Self) -> Self {
        PairOutput::new(self.word.concat(&rhs.word), self.weight.times(&rhs.weight))
    }

    fn weight(&self) -> Weight {
        self.weight
    }

    fn word(&self) -> Option<&Word> {
        Some(&self.word)
    }
}

/// The two semirings over the non-negative reals used for pushing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Semiring {
    /// `+` and `×`, identity 0 and 1.
    PlusTimes,
    /// `max` and `×`, identity 0 and 1.
    MaxTimes,
}

impl Semiring {
    pub fn zero(self) -> f64 {
        0.0
    }

    pub fn one(self) -> f64 {
        1.0
    }

    pub fn plus(self, a: f64, b: f64) -> f64 {
        match self {
            Semiring::PlusTimes => a + b,
            Semiring::MaxTimes => a.max(b),
        }
    }

    pub fn times(self, a: f64, b: f64) -> f64 {
        a * b
    }

    pub fn sum<I: IntoIterator<Item = f64>>(self, values: I) -> f64 {
        values
            .into_iter()
            .fold(self.zero(), |acc, v| self.plus(acc, v))
    }
}

impl FromStr for Semiring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "plus-times" => Ok(Semiring::PlusTimes),
            "max" | "max-times" => Ok(Semiring::MaxTimes),
            other => Err(Error::InvariantViolation(format!(
                "unknown semiring {other}"
            ))),
        }
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semiring::PlusTimes => "plus",
            Semiring::MaxTimes => "max",
        })
    }
}
