//! Quotient oracles `π: F₂ → H` with a decidable word problem.
//!
//! The groups of interest have unsolvable word problems, so everything
//! downstream is parametric in the oracle. The shipped fixtures are
//! stand-ins: S₃, the abelianization ℤ², and the identity quotient F₂ → F₂.

use std::fmt::Debug;
use std::hash::Hash;

use super::{Presentation, Word, WordError};

pub trait QuotientOracle {
    type Token: Clone + Eq + Hash + Debug;

    fn name(&self) -> &'static str;

    fn identity(&self) -> Self::Token;

    /// Image of generator `index` (0 or 1), or of its inverse.
    fn generator(&self, index: usize, inverse: bool) -> Self::Token;

    fn product(&self, x: &Self::Token, y: &Self::Token) -> Self::Token;

    /// The presentation of H that this oracle decides.
    fn presentation(&self) -> Presentation;

    fn supports_centrality(&self) -> bool {
        true
    }

    fn power(&self, x: &Self::Token, n: u64) -> Self::Token {
        let mut acc = self.identity();
        let mut base = x.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = self.product(&acc, &base);
            }
            base = self.product(&base, &base);
            n >>= 1;
        }
        acc
    }
}

/// Evaluates `π(u)`.
pub fn apply_oracle<O: QuotientOracle>(o: &O, u: &Word) -> Result<O::Token, WordError> {
    if u.rank() != 2 {
        return Err(WordError::NotRankTwo(u.rank()));
    }
    Ok(u.syllables().iter().fold(o.identity(), |acc, s| {
        let g = o.generator(s.generator, s.exponent < 0);
        o.product(&acc, &o.power(&g, s.exponent.unsigned_abs()))
    }))
}

/// Whether `π(u)` commutes with both generator images, i.e. is central in H.
pub fn is_central<O: QuotientOracle>(o: &O, u: &Word) -> Result<bool, WordError> {
    if !o.supports_centrality() {
        return Err(WordError::Capability(o.name().to_string()));
    }
    let t = apply_oracle(o, u)?;
    Ok((0..2).all(|i| {
        let g = o.generator(i, false);
        o.product(&t, &g) == o.product(&g, &t)
    }))
}

/// Permutation of {0, 1, 2}, stored as the image list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Perm3(pub [u8; 3]);

impl Perm3 {
    pub const IDENTITY: Perm3 = Perm3([0, 1, 2]);

    /// Left-to-right composition: `self` is applied first, then `other`.
    pub fn then(self, other: Perm3) -> Perm3 {
        Perm3(self.0.map(|i| other.0[i as usize]))
    }

    pub fn inverse(self) -> Perm3 {
        let mut out = [0u8; 3];
        for (i, &j) in self.0.iter().enumerate() {
            out[j as usize] = i as u8;
        }
        Perm3(out)
    }
}

/// `H = ⟨x₁, x₂ | x₁², x₂³, (x₁x₂)²⟩ ≅ S₃` with `x₁ ↦ (1 2)`,
/// `x₂ ↦ (1 2 3)`. Products apply permutations left to right.
#[derive(Debug, Clone, Copy, Default)]
pub struct SymmetricThree;

impl QuotientOracle for SymmetricThree {
    type Token = Perm3;

    fn name(&self) -> &'static str {
        "s3"
    }

    fn identity(&self) -> Perm3 {
        Perm3::IDENTITY
    }

    fn generator(&self, index: usize, inverse: bool) -> Perm3 {
        let p = match index {
            0 => Perm3([1, 0, 2]),
            1 => Perm3([1, 2, 0]),
            _ => panic!("S3 oracle has two generators"),
        };
        if inverse {
            p.inverse()
        } else {
            p
        }
    }

    fn product(&self, x: &Perm3, y: &Perm3) -> Perm3 {
        x.then(*y)
    }

    fn presentation(&self) -> Presentation {
        Presentation::from_strings(&["x1", "x2"], &["x1 x1", "x2 x2 x2", "x1 x2 x1 x2"])
            .expect("fixture presentation is well formed")
    }
}

/// Abelianization `F₂ → ℤ²`, presented as `⟨x₁, x₂ | [x₁, x₂]⟩`.
#[derive(Debug, Clone, Copy, Default)]
pub struct AbelianZ2;

impl QuotientOracle for AbelianZ2 {
    type Token = (i128, i128);

    fn name(&self) -> &'static str {
        "zsq"
    }

    fn identity(&self) -> (i128, i128) {
        (0, 0)
    }

    fn generator(&self, index: usize, inverse: bool) -> (i128, i128) {
        let s = if inverse { -1 } else { 1 };
        match index {
            0 => (s, 0),
            1 => (0, s),
            _ => panic!("Z^2 oracle has two generators"),
        }
    }

    fn product(&self, x: &(i128, i128), y: &(i128, i128)) -> (i128, i128) {
        (x.0 + y.0, x.1 + y.1)
    }

    fn power(&self, x: &(i128, i128), n: u64) -> (i128, i128) {
        (x.0 * n as i128, x.1 * n as i128)
    }

    fn presentation(&self) -> Presentation {
        Presentation::from_strings(&["x1", "x2"], &["x1 x2 x1^-1 x2^-1"])
            .expect("fixture presentation is well formed")
    }
}

/// The identity quotient `F₂ → F₂`; tokens are reduced words and the
/// resulting fiber product is the diagonal.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreeQuotient;

impl QuotientOracle for FreeQuotient {
    type Token = Word;

    fn name(&self) -> &'static str {
        "free"
    }

    fn identity(&self) -> Word {
        Word::identity(2)
    }

    fn generator(&self, index: usize, inverse: bool) -> Word {
        Word::generator_power(2, index, if inverse { -1 } else { 1 })
            .expect("free oracle has two generators")
    }

    fn product(&self, x: &Word, y: &Word) -> Word {
        x * y
    }

    fn power(&self, x: &Word, n: u64) -> Word {
        x.pow(n as i64)
    }

    fn presentation(&self) -> Presentation {
        Presentation::from_strings::<&str>(&["x1", "x2"], &[])
            .expect("fixture presentation is well formed")
    }
}
