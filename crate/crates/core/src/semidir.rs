//! The gadget groups `G_h = ℤ⁴⋊F_{p+1}`.
//!
//! Stable letters `t₁, …, t_p, t` act on ℤ⁴ through 4×4 integer matrices
//! acting on column vectors from the left. Elements are kept in the normal
//! form `(v, w)`, `v ∈ ℤ⁴` and `w` a reduced word in the stable letters,
//! which decides the word problem and lets homomorphisms between gadget
//! groups be checked relator by relator.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeMap;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::fiber::MihailovaGens;
use crate::matrep::{eval4, IntMatrix, MatrepError};
use crate::words::{PairWord, Presentation, Syllable, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SemidirError {
    #[error("action needs at least one stable letter")]
    EmptyAction,
    #[error("action matrix {index} is not a unimodular 4x4 matrix")]
    BadMatrix { index: usize },
    #[error("word rank {got} does not match {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("witness shape: {0}")]
    Shape(String),
    #[error("matrix entry {0} does not fit a relator exponent")]
    ExponentTooLarge(BigInt),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error(transparent)]
    Matrix(#[from] MatrepError),
}

/// Images of the stable letters `t₁, …, t_p, t` in GL(4,ℤ).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSpec {
    matrices: Vec<IntMatrix>,
    inverses: Vec<IntMatrix>,
}

impl ActionSpec {
    pub fn new(matrices: Vec<IntMatrix>) -> Result<Self, SemidirError> {
        if matrices.is_empty() {
            return Err(SemidirError::EmptyAction);
        }
        let mut inverses = Vec::with_capacity(matrices.len());
        for (index, m) in matrices.iter().enumerate() {
            if m.dim() != 4 {
                return Err(SemidirError::BadMatrix { index });
            }
            inverses.push(m.inverse().map_err(|_| SemidirError::BadMatrix { index })?);
        }
        Ok(ActionSpec { matrices, inverses })
    }

    /// `t_i ↦ eval4(h_i)` for the generators of L, and `t ↦ eval4(h)`.
    pub fn gadget(gens: &MihailovaGens, h: &PairWord) -> Self {
        let matrices = gens
            .gens()
            .iter()
            .chain(std::iter::once(h))
            .map(eval4)
            .collect();
        ActionSpec::new(matrices).expect("images of F2xF2 are unimodular")
    }

    pub fn matrices(&self) -> &[IntMatrix] {
        &self.matrices
    }

    /// Number of stable letters, `p + 1`.
    pub fn stable_count(&self) -> usize {
        self.matrices.len()
    }

    /// Total generator count `4 + (p + 1)` of the presented group.
    pub fn generator_count(&self) -> usize {
        4 + self.stable_count()
    }

    /// `a1..a4, t1..tp, t`.
    pub fn generator_names(&self) -> Vec<String> {
        let p = self.stable_count() - 1;
        (1..=4)
            .map(|i| format!("a{i}"))
            .chain((1..=p).map(|i| format!("t{i}")))
            .chain(std::iter::once("t".to_string()))
            .collect()
    }

    /// The matrix `Φ(w)` by which a word in the stable letters acts.
    pub fn phi(&self, w: &Word) -> Result<IntMatrix, SemidirError> {
        if w.rank() != self.stable_count() {
            return Err(SemidirError::RankMismatch {
                expected: self.stable_count(),
                got: w.rank(),
            });
        }
        let mut acc = IntMatrix::identity(4);
        for s in w.syllables() {
            let base = if s.exponent < 0 {
                &self.inverses[s.generator]
            } else {
                &self.matrices[s.generator]
            };
            acc = acc.mul(&base.pow(s.exponent.unsigned_abs()))?;
        }
        Ok(acc)
    }
}

impl Serialize for ActionSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.matrices.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActionSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let ms = Vec::<IntMatrix>::deserialize(d)?;
        ActionSpec::new(ms).map_err(serde::de::Error::custom)
    }
}

/// Normal form `(v, w)` of an element of `ℤ⁴⋊F_q`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemiElem {
    pub v: [BigInt; 4],
    pub w: Word,
}

impl SemiElem {
    pub fn identity(a: &ActionSpec) -> Self {
        SemiElem {
            v: Default::default(),
            w: Word::identity(a.stable_count()),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.v.iter().all(Zero::is_zero) && self.w.is_identity()
    }

    /// `a_i^n`, `i` 0-based.
    pub fn translation(a: &ActionSpec, i: usize, n: BigInt) -> Self {
        let mut e = Self::identity(a);
        e.v[i] = n;
        e
    }

    /// Generator `index` of the presentation (`a1..a4` first, then stable letters).
    pub fn generator(a: &ActionSpec, index: usize) -> Result<Self, SemidirError> {
        Self::generator_power(a, index, 1)
    }

    fn generator_power(a: &ActionSpec, index: usize, n: i64) -> Result<Self, SemidirError> {
        if index < 4 {
            return Ok(Self::translation(a, index, BigInt::from(n)));
        }
        Ok(SemiElem {
            v: Default::default(),
            w: Word::generator_power(a.stable_count(), index - 4, n)?,
        })
    }
}

fn check_rank(a: &ActionSpec, x: &SemiElem) -> Result<(), SemidirError> {
    if x.w.rank() != a.stable_count() {
        return Err(SemidirError::RankMismatch {
            expected: a.stable_count(),
            got: x.w.rank(),
        });
    }
    Ok(())
}

/// `(v₁, w₁)·(v₂, w₂) = (v₁ + Φ(w₁)v₂, w₁w₂)`.
pub fn semi_mul(a: &ActionSpec, x: &SemiElem, y: &SemiElem) -> Result<SemiElem, SemidirError> {
    check_rank(a, x)?;
    check_rank(a, y)?;
    let moved = a.phi(&x.w)?.apply(&y.v);
    let v = std::array::from_fn(|i| &x.v[i] + &moved[i]);
    Ok(SemiElem {
        v,
        w: x.w.multiply(&y.w)?,
    })
}

/// `(v, w)⁻¹ = (−Φ(w)⁻¹v, w⁻¹)`.
pub fn semi_inv(a: &ActionSpec, x: &SemiElem) -> Result<SemiElem, SemidirError> {
    check_rank(a, x)?;
    let w_inv = x.w.inverse();
    let moved = a.phi(&w_inv)?.apply(&x.v);
    Ok(SemiElem {
        v: std::array::from_fn(|i| -&moved[i]),
        w: w_inv,
    })
}

pub fn semi_pow(a: &ActionSpec, x: &SemiElem, n: i64) -> Result<SemiElem, SemidirError> {
    let mut base = if n < 0 { semi_inv(a, x)? } else { x.clone() };
    let mut acc = SemiElem::identity(a);
    let mut k = n.unsigned_abs();
    while k > 0 {
        if k & 1 == 1 {
            acc = semi_mul(a, &acc, &base)?;
        }
        k >>= 1;
        if k > 0 {
            base = semi_mul(a, &base, &base)?;
        }
    }
    Ok(acc)
}

/// Evaluates a word in the generators `a1..a4, t1..tp, t`.
pub fn evaluate_word(a: &ActionSpec, word: &Word) -> Result<SemiElem, SemidirError> {
    if word.rank() != a.generator_count() {
        return Err(SemidirError::RankMismatch {
            expected: a.generator_count(),
            got: word.rank(),
        });
    }
    let mut acc = SemiElem::identity(a);
    for s in word.syllables() {
        let piece = SemiElem::generator_power(a, s.generator, s.exponent)?;
        acc = semi_mul(a, &acc, &piece)?;
    }
    Ok(acc)
}

fn exponent(x: &BigInt) -> Result<i64, SemidirError> {
    x.to_i64()
        .ok_or_else(|| SemidirError::ExponentTooLarge(x.clone()))
}

/// Presentation of `ℤ⁴⋊F_{p+1}`: the six commutators `[a_i, a_j]`, then for
/// every stable letter `s` with matrix `M` and every `i`, the relator
/// `s a_i s⁻¹ (a₁^{M₁ᵢ} a₂^{M₂ᵢ} a₃^{M₃ᵢ} a₄^{M₄ᵢ})⁻¹`.
pub fn build_gh(a: &ActionSpec) -> Result<Presentation, SemidirError> {
    let rank = a.generator_count();
    let gen = |i: usize| Word::generator(rank, i);
    let mut relators = Vec::with_capacity(6 + 4 * a.stable_count());
    for i in 0..4 {
        for j in i + 1..4 {
            let (x, y) = (gen(i), gen(j));
            relators.push(&(&(&x * &y) * &x.inverse()) * &y.inverse());
        }
    }
    for (k, m) in a.matrices().iter().enumerate() {
        let s = gen(4 + k);
        for i in 0..4 {
            let column = (0..4)
                .map(|r| {
                    Ok(Syllable {
                        generator: r,
                        exponent: exponent(m.get(r, i))?,
                    })
                })
                .collect::<Result<Vec<_>, SemidirError>>()?;
            let column = Word::from_syllables(rank, column)?;
            relators.push(&gen(i).conjugate_by(&s) * &column.inverse());
        }
    }
    Ok(Presentation::new(a.generator_names(), relators)?)
}

/// A map on generators, each image a word in the target's generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomWitness {
    pub source: Vec<String>,
    pub target: Vec<String>,
    pub images: Vec<Word>,
}

impl HomWitness {
    pub fn identity(names: Vec<String>) -> Self {
        let rank = names.len();
        HomWitness {
            images: (0..rank).map(|i| Word::generator(rank, i)).collect(),
            source: names.clone(),
            target: names,
        }
    }

    /// `other ∘ self`: first apply `self`, then `other`.
    pub fn then(&self, other: &HomWitness) -> Result<HomWitness, SemidirError> {
        if self.target != other.source {
            return Err(SemidirError::Shape("composition of mismatched maps".into()));
        }
        let images = self
            .images
            .iter()
            .map(|w| w.substitute(&other.images))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(HomWitness {
            source: self.source.clone(),
            target: other.target.clone(),
            images,
        })
    }
}

impl Serialize for HomWitness {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        struct Images<'a>(&'a HomWitness);
        impl Serialize for Images<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                let mut map = s.serialize_map(Some(self.0.source.len()))?;
                for (name, img) in self.0.source.iter().zip(&self.0.images) {
                    map.serialize_entry(name, &img.display_named(&self.0.target))?;
                }
                map.end()
            }
        }
        let mut map = s.serialize_map(Some(3))?;
        map.serialize_entry("source", &self.source)?;
        map.serialize_entry("target", &self.target)?;
        map.serialize_entry("images", &Images(self))?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for HomWitness {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        #[derive(Deserialize)]
        struct File {
            source: Vec<String>,
            target: Vec<String>,
            images: BTreeMap<String, String>,
        }
        let f = File::deserialize(d)?;
        let images =
            f.source
                .iter()
                .map(|name| {
                    let text = f.images.get(name).ok_or_else(|| {
                        D::Error::custom(format!("no image for generator {name}"))
                    })?;
                    Word::parse_named(text, &f.target).map_err(D::Error::custom)
                })
                .collect::<Result<Vec<_>, _>>()?;
        Ok(HomWitness {
            source: f.source,
            target: f.target,
            images,
        })
    }
}

/// The map `G_h → G₁` fixing `a_i`, `t_i` and sending `t ↦ w(t_i^{±1})·t`,
/// together with its inverse `t ↦ w(t_i^{±1})⁻¹·t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoWitness {
    pub forward: HomWitness,
    pub backward: HomWitness,
}

pub fn iso_witness(gens: &MihailovaGens, symbol_word: &Word) -> Result<IsoWitness, SemidirError> {
    let p = gens.len();
    if symbol_word.rank() != p {
        return Err(SemidirError::RankMismatch {
            expected: p,
            got: symbol_word.rank(),
        });
    }
    let rank = 4 + p + 1;
    let names = ActionSpec::gadget(gens, &PairWord::identity()).generator_names();
    // h_j ↦ t_j sits at generator index 4 + j
    let lifted = Word::from_syllables(
        rank,
        symbol_word.syllables().iter().map(|s| Syllable {
            generator: 4 + s.generator,
            exponent: s.exponent,
        }),
    )?;
    let t = Word::generator(rank, rank - 1);
    let mut forward = HomWitness::identity(names.clone());
    forward.images[rank - 1] = &lifted * &t;
    let mut backward = HomWitness::identity(names);
    backward.images[rank - 1] = &lifted.inverse() * &t;
    Ok(IsoWitness { forward, backward })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomCheck {
    pub ok: bool,
    /// Relators of the source whose image is not the identity.
    pub violated: Vec<String>,
}

/// Checks that every relator of `src` maps to the identity of the target.
pub fn verify_hom(
    src: &Presentation,
    tgt: &ActionSpec,
    w: &HomWitness,
) -> Result<HomCheck, SemidirError> {
    if w.source != src.generator_names() {
        return Err(SemidirError::Shape(
            "witness source generators differ from the presentation".into(),
        ));
    }
    if w.target.len() != tgt.generator_count() {
        return Err(SemidirError::Shape(format!(
            "witness target has {} generators, action gives {}",
            w.target.len(),
            tgt.generator_count()
        )));
    }
    let images = w
        .images
        .iter()
        .map(|img| evaluate_word(tgt, img))
        .collect::<Result<Vec<_>, _>>()?;
    let mut violated = Vec::new();
    for (r, text) in src.relators().iter().zip(src.relator_strings()) {
        let mut acc = SemiElem::identity(tgt);
        for s in r.syllables() {
            acc = semi_mul(tgt, &acc, &semi_pow(tgt, &images[s.generator], s.exponent)?)?;
        }
        if !acc.is_identity() {
            violated.push(text);
        }
    }
    Ok(HomCheck {
        ok: violated.is_empty(),
        violated,
    })
}

/// Whether a self-map of a gadget group fixes every generator as an element.
pub fn fixes_generators(a: &ActionSpec, w: &HomWitness) -> Result<bool, SemidirError> {
    for (i, img) in w.images.iter().enumerate() {
        if evaluate_word(a, img)? != SemiElem::generator(a, i)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoCertificate {
    pub forward: HomCheck,
    pub backward: HomCheck,
    pub backward_after_forward_is_identity: bool,
    pub forward_after_backward_is_identity: bool,
}

impl IsoCertificate {
    pub fn is_isomorphism(&self) -> bool {
        self.forward.ok
            && self.backward.ok
            && self.backward_after_forward_is_identity
            && self.forward_after_backward_is_identity
    }
}

/// Verifies `forward: G_h → G₁` and `backward: G₁ → G_h` as mutually inverse
/// homomorphisms.
pub fn certify_isomorphism(
    action_h: &ActionSpec,
    action_1: &ActionSpec,
    witness: &IsoWitness,
) -> Result<IsoCertificate, SemidirError> {
    let src_h = build_gh(action_h)?;
    let src_1 = build_gh(action_1)?;
    Ok(IsoCertificate {
        forward: verify_hom(&src_h, action_1, &witness.forward)?,
        backward: verify_hom(&src_1, action_h, &witness.backward)?,
        backward_after_forward_is_identity: fixes_generators(
            action_h,
            &witness.forward.then(&witness.backward)?,
        )?,
        forward_after_backward_is_identity: fixes_generators(
            action_1,
            &witness.backward.then(&witness.forward)?,
        )?,
    })
}
