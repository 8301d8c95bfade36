//! Free-group words, pairs of words in F₂×F₂, finite presentations and
//! quotient oracles `π: F₂ → H`.
//!
//! A [`Word`] is stored as a list of syllables `g^n` (generator, nonzero
//! exponent) with no two adjacent syllables on the same generator, which is
//! exactly the freely reduced form. Generators are 0-based internally and
//! 1-based in every textual format.

mod oracle;
mod presentation;

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use oracle::{
    apply_oracle, is_central, AbelianZ2, FreeQuotient, Perm3, QuotientOracle, SymmetricThree,
};
pub use presentation::Presentation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("malformed word: {0}")]
    Malformed(String),
    #[error("generator index {index} out of range for rank {rank}")]
    GeneratorOutOfRange { index: usize, rank: usize },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("expected a word of rank 2, got rank {0}")]
    NotRankTwo(usize),
    #[error("rank must be positive")]
    ZeroRank,
    #[error("duplicate generator name `{0}`")]
    DuplicateName(String),
    #[error("oracle `{0}` does not support centrality tests")]
    Capability(String),
    #[error("exponent overflow")]
    ExponentOverflow,
}

/// A single generator or inverse generator. `generator` is 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }

    pub fn inverse(self) -> Self {
        Letter {
            generator: self.generator,
            inverse: !self.inverse,
        }
    }

    fn exponent(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub generator: usize,
    pub exponent: i64,
}

/// Freely reduced word in the free group of the given rank.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    syllables: Vec<Syllable>,
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        Word {
            rank,
            syllables: Vec::new(),
        }
    }

    /// The generator `index` (0-based) raised to `exponent`.
    pub fn generator_power(rank: usize, index: usize, exponent: i64) -> Result<Self, WordError> {
        if index >= rank {
            return Err(WordError::GeneratorOutOfRange {
                index: index + 1,
                rank,
            });
        }
        let mut w = Word::identity(rank);
        w.push_syllable(index, exponent)?;
        Ok(w)
    }

    pub fn generator(rank: usize, index: usize) -> Self {
        Self::generator_power(rank, index, 1).expect("generator index within rank")
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn from_letters<I>(rank: usize, letters: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = Letter>,
    {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let mut w = Word::identity(rank);
        for l in letters {
            if l.generator >= rank {
                return Err(WordError::GeneratorOutOfRange {
                    index: l.generator + 1,
                    rank,
                });
            }
            w.push_syllable(l.generator, l.exponent())?;
        }
        Ok(w)
    }

    /// Freely reduces a sequence of signed 1-based generator indices
    /// (`3` is g₃, `-3` is g₃⁻¹).
    pub fn from_signed(rank: usize, letters: &[i64]) -> Result<Self, WordError> {
        let mut out = Vec::with_capacity(letters.len());
        for &s in letters {
            if s == 0 {
                return Err(WordError::Malformed("zero is not a generator index".into()));
            }
            out.push(Letter::new(s.unsigned_abs() as usize - 1, s < 0));
        }
        Self::from_letters(rank, out)
    }

    pub fn from_syllables<I>(rank: usize, syllables: I) -> Result<Self, WordError>
    where
        I: IntoIterator<Item = Syllable>,
    {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let mut w = Word::identity(rank);
        for s in syllables {
            if s.generator >= rank {
                return Err(WordError::GeneratorOutOfRange {
                    index: s.generator + 1,
                    rank,
                });
            }
            w.push_syllable(s.generator, s.exponent)?;
        }
        Ok(w)
    }

    fn push_syllable(&mut self, generator: usize, exponent: i64) -> Result<(), WordError> {
        if exponent == 0 {
            return Ok(());
        }
        match self.syllables.last_mut() {
            Some(last) if last.generator == generator => {
                let e = last
                    .exponent
                    .checked_add(exponent)
                    .ok_or(WordError::ExponentOverflow)?;
                if e == 0 {
                    self.syllables.pop();
                } else {
                    last.exponent = e;
                }
            }
            _ => self.syllables.push(Syllable {
                generator,
                exponent,
            }),
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syllables
    }

    /// Letter-by-letter expansion.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syllables.iter().flat_map(|s| {
            let l = Letter::new(s.generator, s.exponent < 0);
            std::iter::repeat_n(l, s.exponent.unsigned_abs() as usize)
        })
    }

    /// Letters as signed 1-based indices.
    pub fn signed_letters(&self) -> Vec<i64> {
        self.letters()
            .map(|l| {
                let i = l.generator as i64 + 1;
                if l.inverse {
                    -i
                } else {
                    i
                }
            })
            .collect()
    }

    /// Reduced length.
    pub fn len(&self) -> u64 {
        self.syllables
            .iter()
            .map(|s| s.exponent.unsigned_abs())
            .sum()
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn multiply(&self, other: &Word) -> Result<Word, WordError> {
        if self.rank != other.rank {
            return Err(WordError::RankMismatch {
                left: self.rank,
                right: other.rank,
            });
        }
        let mut w = self.clone();
        for s in &other.syllables {
            w.push_syllable(s.generator, s.exponent)?;
        }
        Ok(w)
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            syllables: self
                .syllables
                .iter()
                .rev()
                .map(|s| Syllable {
                    generator: s.generator,
                    exponent: -s.exponent,
                })
                .collect(),
        }
    }

    /// `self^n` for any integer `n`.
    pub fn pow(&self, n: i64) -> Word {
        let base = if n < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..n.unsigned_abs() {
            out = &out * &base;
        }
        out
    }

    /// `c · self · c⁻¹`.
    pub fn conjugate_by(&self, c: &Word) -> Word {
        &(c * self) * &c.inverse()
    }

    /// Shortest cyclic conjugate obtained by cancelling the ends.
    pub fn cyclically_reduced(&self) -> Word {
        let mut syl = self.syllables.clone();
        while syl.len() >= 2 && syl[0].generator == syl[syl.len() - 1].generator {
            let last = syl.pop().expect("length checked");
            let e = syl[0].exponent + last.exponent;
            if e == 0 {
                syl.remove(0);
            } else {
                syl[0].exponent = e;
            }
        }
        Word {
            rank: self.rank,
            syllables: syl,
        }
    }

    /// Same element viewed in a free group of larger rank.
    pub fn widen(&self, rank: usize) -> Result<Word, WordError> {
        Word::from_syllables(rank, self.syllables.iter().copied())
    }

    /// Substitutes `images[i]` for generator `i`.
    pub fn substitute(&self, images: &[Word]) -> Result<Word, WordError> {
        if images.len() != self.rank {
            return Err(WordError::RankMismatch {
                left: self.rank,
                right: images.len(),
            });
        }
        let target_rank = images.first().map(|w| w.rank).unwrap_or(1);
        let mut out = Word::identity(target_rank);
        for s in &self.syllables {
            let piece = images[s.generator].pow(s.exponent);
            out = out.multiply(&piece)?;
        }
        Ok(out)
    }

    /// Parses the default syntax: lowercase letter = generator, uppercase =
    /// inverse (`a`, `B`, or runs such as `abA`), or indexed forms `g3`,
    /// `x3` (`G3`, `X3` inverted), with an optional `^n` power suffix on any single generator.
    /// `1` and the empty string denote the identity.
    pub fn parse(text: &str, rank: usize) -> Result<Word, WordError> {
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let mut w = Word::identity(rank);
        for token in text.split_whitespace() {
            if token == "1" {
                continue;
            }
            let (base, power) = split_power(token)?;
            if let Some(idx) = indexed_generator(base) {
                let (idx, sign) = idx?;
                if idx == 0 || idx > rank {
                    return Err(WordError::GeneratorOutOfRange { index: idx, rank });
                }
                w.push_syllable(idx - 1, sign * power)?;
                continue;
            }
            if !base.chars().all(|c| c.is_ascii_alphabetic()) || base.is_empty() {
                return Err(WordError::Malformed(token.to_string()));
            }
            if power != 1 && base.len() != 1 {
                return Err(WordError::Malformed(format!(
                    "power applied to a run of letters: {token}"
                )));
            }
            for c in base.chars() {
                let idx = (c.to_ascii_lowercase() as u8 - b'a') as usize;
                if idx >= rank {
                    return Err(WordError::GeneratorOutOfRange {
                        index: idx + 1,
                        rank,
                    });
                }
                let sign = if c.is_ascii_uppercase() { -1 } else { 1 };
                w.push_syllable(idx, sign * power)?;
            }
        }
        Ok(w)
    }

    /// Parses whitespace-separated tokens `name`, `name^-1` or `name^n`
    /// against an explicit list of generator names.
    pub fn parse_named<S: AsRef<str>>(text: &str, names: &[S]) -> Result<Word, WordError> {
        let rank = names.len();
        if rank == 0 {
            return Err(WordError::ZeroRank);
        }
        let mut w = Word::identity(rank);
        for token in text.split_whitespace() {
            if token == "1" {
                continue;
            }
            let (base, power) = split_power(token)?;
            let idx = names
                .iter()
                .position(|n| n.as_ref() == base)
                .ok_or_else(|| WordError::Malformed(format!("unknown generator `{base}`")))?;
            w.push_syllable(idx, power)?;
        }
        Ok(w)
    }

    /// Renders with explicit generator names; inverse of [`Word::parse_named`].
    pub fn display_named<S: AsRef<str>>(&self, names: &[S]) -> String {
        let parts: Vec<String> = self
            .syllables
            .iter()
            .map(|s| {
                let name = names[s.generator].as_ref();
                if s.exponent == 1 {
                    name.to_string()
                } else {
                    format!("{name}^{}", s.exponent)
                }
            })
            .collect();
        parts.join(" ")
    }
}

fn split_power(token: &str) -> Result<(&str, i64), WordError> {
    match token.split_once('^') {
        None => Ok((token, 1)),
        Some((base, exp)) => {
            let e: i64 = exp
                .parse()
                .map_err(|_| WordError::Malformed(token.to_string()))?;
            if base.is_empty() {
                return Err(WordError::Malformed(token.to_string()));
            }
            Ok((base, e))
        }
    }
}

/// `g12` / `x12` style tokens (`G12` / `X12` for inverses) as
/// `(index, sign)`; `None` when the token has another shape.
fn indexed_generator(base: &str) -> Option<Result<(usize, i64), WordError>> {
    let mut chars = base.chars();
    let head = chars.next()?;
    if !matches!(head, 'g' | 'x' | 'G' | 'X') {
        return None;
    }
    let sign = if head.is_ascii_uppercase() { -1 } else { 1 };
    let digits = chars.as_str();
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    Some(
        digits
            .parse::<usize>()
            .map(|i| (i, sign))
            .map_err(|_| WordError::Malformed(base.to_string())),
    )
}

impl<'a> Mul<&'a Word> for &'a Word {
    type Output = Word;

    /// Panics on rank mismatch; use [`Word::multiply`] for a checked product.
    fn mul(self, rhs: &'a Word) -> Word {
        self.multiply(rhs).expect("word ranks must agree")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.rank <= 26 {
            let parts: Vec<String> = self
                .syllables
                .iter()
                .map(|s| {
                    let c = (b'a' + s.generator as u8) as char;
                    match s.exponent {
                        1 => c.to_string(),
                        -1 => c.to_ascii_uppercase().to_string(),
                        e => format!("{c}^{e}"),
                    }
                })
                .collect();
            write!(f, "{}", parts.join(" "))
        } else {
            let names: Vec<String> = (1..=self.rank).map(|i| format!("g{i}")).collect();
            write!(f, "{}", self.display_named(&names))
        }
    }
}

/// Element `(left, right)` of F₂×F₂.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairWord {
    left: Word,
    right: Word,
}

impl PairWord {
    pub fn new(left: Word, right: Word) -> Result<Self, WordError> {
        for w in [&left, &right] {
            if w.rank() != 2 {
                return Err(WordError::NotRankTwo(w.rank()));
            }
        }
        Ok(PairWord { left, right })
    }

    pub fn identity() -> Self {
        PairWord {
            left: Word::identity(2),
            right: Word::identity(2),
        }
    }

    pub fn diagonal(w: &Word) -> Result<Self, WordError> {
        PairWord::new(w.clone(), w.clone())
    }

    pub fn parse(left: &str, right: &str) -> Result<Self, WordError> {
        PairWord::new(Word::parse(left, 2)?, Word::parse(right, 2)?)
    }

    pub fn left(&self) -> &Word {
        &self.left
    }

    pub fn right(&self) -> &Word {
        &self.right
    }

    pub fn is_identity(&self) -> bool {
        self.left.is_identity() && self.right.is_identity()
    }

    pub fn multiply(&self, other: &PairWord) -> PairWord {
        PairWord {
            left: &self.left * &other.left,
            right: &self.right * &other.right,
        }
    }

    pub fn inverse(&self) -> PairWord {
        PairWord {
            left: self.left.inverse(),
            right: self.right.inverse(),
        }
    }

    pub fn pow(&self, n: i64) -> PairWord {
        PairWord {
            left: self.left.pow(n),
            right: self.right.pow(n),
        }
    }

    /// `c · self · c⁻¹`.
    pub fn conjugate_by(&self, c: &PairWord) -> PairWord {
        c.multiply(self).multiply(&c.inverse())
    }

    pub fn len(&self) -> u64 {
        self.left.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }
}

impl<'a> Mul<&'a PairWord> for &'a PairWord {
    type Output = PairWord;

    fn mul(self, rhs: &'a PairWord) -> PairWord {
        self.multiply(rhs)
    }
}

impl fmt::Display for PairWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.left, self.right)
    }
}

#[derive(Serialize, Deserialize)]
struct PairWordText {
    left: String,
    right: String,
}

impl Serialize for PairWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PairWordText {
            left: self.left.to_string(),
            right: self.right.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PairWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let t = PairWordText::deserialize(d)?;
        PairWord::parse(&t.left, &t.right).map_err(serde::de::Error::custom)
    }
}

impl FromStr for PairWord {
    type Err = WordError;

    /// `left | right`, each side in the default word syntax.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, r) = s
            .split_once('|')
            .ok_or_else(|| WordError::Malformed(format!("expected `left | right`: {s}")))?;
        PairWord::parse(l, r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    #[test]
    fn cancellation() {
        assert!(w("a A").is_identity());
        assert_eq!(w("a b B a"), w("a a"));
        assert_eq!(w("a b B a"), w("a^2"));
    }

    #[test]
    fn inverse_and_product() {
        assert_eq!(&w("a") * &w("b"), w("ab"));
        assert_eq!(w("ab").inverse(), w("B A"));
        let u = w("a b A b b");
        assert!((&u * &u.inverse()).is_identity());
    }

    #[test]
    fn out_of_range_letters() {
        assert!(matches!(
            Word::parse("c", 2),
            Err(WordError::GeneratorOutOfRange { index: 3, rank: 2 })
        ));
        assert!(Word::from_signed(2, &[1, 3]).is_err());
        assert!(Word::from_signed(2, &[0]).is_err());
        assert!(Word::parse("a?", 2).is_err());
    }

    #[test]
    fn rank_mismatch_is_reported() {
        let u = Word::generator(2, 0);
        let v = Word::generator(3, 0);
        assert_eq!(
            u.multiply(&v),
            Err(WordError::RankMismatch { left: 2, right: 3 })
        );
        assert!(PairWord::new(v.clone(), u).is_err());
    }

    #[test]
    fn indexed_syntax_and_display_round_trip() {
        let long = Word::parse("g27 g3^-1 g3^-1 g1^4", 30).unwrap();
        assert_eq!(long.to_string(), "g27 g3^-2 g1^4");
        assert_eq!(Word::parse(&long.to_string(), 30).unwrap(), long);
        assert_eq!(w("X1 x2"), w("A b"));
        let short = w("x1 x2^-1 x2^-1");
        assert_eq!(short.to_string(), "a b^-2");
        assert_eq!(w(&short.to_string()), short);
    }

    #[test]
    fn named_syntax() {
        let names = ["h1", "h2", "h3"];
        let x = Word::parse_named("h1 h3^-1 h3^-1 h2", &names).unwrap();
        assert_eq!(x.display_named(&names), "h1 h3^-2 h2");
        assert!(Word::parse_named("h4", &names).is_err());
    }

    #[test]
    fn cyclic_reduction() {
        assert_eq!(w("a b a^-2").cyclically_reduced(), w("A b"));
        assert!(w("a b B A").cyclically_reduced().is_identity());
        assert_eq!(w("a b A").cyclically_reduced(), w("b"));
    }

    #[test]
    fn substitution() {
        let x = w("a B");
        let images = [w("a b"), w("b b")];
        assert_eq!(x.substitute(&images).unwrap(), w("a B"));
    }

    fn raw_letters(rank: usize, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
        prop::collection::vec((0..rank, any::<bool>()), 0..max_len)
            .prop_map(|v| v.into_iter().map(|(g, i)| Letter::new(g, i)).collect())
    }

    /// Free reduction with an explicit stack, independent of the syllable code.
    fn stack_reduce(letters: &[Letter]) -> Vec<Letter> {
        let mut out: Vec<Letter> = Vec::new();
        for &l in letters {
            if out.last() == Some(&l.inverse()) {
                out.pop();
            } else {
                out.push(l);
            }
        }
        out
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent(raw in raw_letters(3, 40)) {
            let once = Word::from_letters(3, raw).unwrap();
            let twice = Word::from_letters(3, once.letters()).unwrap();
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn reduction_is_confluent(raw in raw_letters(2, 40), seed in any::<u64>()) {
            // cancel adjacent inverse pairs in a pseudo-random order
            let mut letters = raw.clone();
            let mut state = seed | 1;
            loop {
                let spots: Vec<usize> = (0..letters.len().saturating_sub(1))
                    .filter(|&i| letters[i + 1] == letters[i].inverse())
                    .collect();
                if spots.is_empty() {
                    break;
                }
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                let i = spots[(state % spots.len() as u64) as usize];
                letters.drain(i..i + 2);
            }
            let w = Word::from_letters(2, raw.clone()).unwrap();
            prop_assert_eq!(w.letters().collect::<Vec<_>>(), letters.clone());
            prop_assert_eq!(letters, stack_reduce(&raw));
        }

        #[test]
        fn group_axioms(a in raw_letters(2, 12), b in raw_letters(2, 12), c in raw_letters(2, 12)) {
            let (a, b, c) = (
                Word::from_letters(2, a).unwrap(),
                Word::from_letters(2, b).unwrap(),
                Word::from_letters(2, c).unwrap(),
            );
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert!((&a * &a.inverse()).is_identity());
            prop_assert!((&a.inverse() * &a).is_identity());
            prop_assert_eq!(&a * &Word::identity(2), a.clone());
            let (p, q) = (
                PairWord::new(a.clone(), b.clone()).unwrap(),
                PairWord::new(c.clone(), a.clone()).unwrap(),
            );
            prop_assert_eq!(&(&p * &q) * &p, &p * &(&q * &p));
            prop_assert!((&p * &p.inverse()).is_identity());
        }
    }
}
