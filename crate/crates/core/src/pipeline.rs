//! Instance emission and the end-to-end checks behind the CLI.
//!
//! From a 2-generator presentation of H and an element `h ∈ F₂×F₂` this
//! builds the pair of gadget groups `(G_h, G₁)` and the pair of finite
//! subsets of GL(4,ℤ) generating `⟨L, h⟩` and `L`. The two pipelines then
//! exercise both directions of the reduction on decidable fixtures.

use serde::Serialize;
use thiserror::Error;

use crate::fiber::{
    self, express_in_generators, lemma1_report, member_l, mihailova_generators, ContainmentReport,
    ExpressBounds, Expression, FiberError, MihailovaGens, SearchMethod,
};
use crate::matrep::{
    eval4, member_f2xf2, power_into_f2xf2, EmbeddingChart, IntMatrix, MatrepError, PowerOutcome,
};
use crate::planes::{decomposition_verdict, DecompositionVerdict};
use crate::semidir::{
    build_gh, certify_isomorphism, iso_witness, ActionSpec, IsoCertificate, IsoWitness,
    SemidirError,
};
use crate::words::{PairWord, Presentation, QuotientOracle, Word, WordError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Fiber(#[from] FiberError),
    #[error(transparent)]
    Semidir(#[from] SemidirError),
    #[error(transparent)]
    Matrix(#[from] MatrepError),
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("{0}")]
    Shape(String),
}

/// The element `h`, given either as a word in the generators `h_i` of L or
/// directly as a pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HInput {
    Symbol(String),
    Pair(PairWord),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HProvenance {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    pub pair: PairWord,
}

impl HInput {
    pub fn resolve(&self, gens: &MihailovaGens) -> Result<(PairWord, HProvenance), PipelineError> {
        match self {
            HInput::Symbol(text) => {
                let w = gens.parse_symbol_word(text)?;
                let pair = gens.evaluate(&w)?;
                Ok((
                    pair.clone(),
                    HProvenance {
                        symbol: Some(gens.format_symbol_word(&w)),
                        pair,
                    },
                ))
            }
            HInput::Pair(p) => Ok((
                p.clone(),
                HProvenance {
                    symbol: None,
                    pair: p.clone(),
                },
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub presentation: Presentation,
    pub h: HProvenance,
    pub chart: &'static str,
    /// Number of generators of L.
    pub p: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoInstance {
    pub g_h: Presentation,
    pub g_1: Presentation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjInstance {
    pub with_h: Vec<IntMatrix>,
    pub without_h: Vec<IntMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceBundle {
    pub theorem1: IsoInstance,
    pub theorem2: ConjInstance,
    pub provenance: Provenance,
}

pub fn emit_instance(
    h_pres: &Presentation,
    h_input: &HInput,
) -> Result<InstanceBundle, PipelineError> {
    let gens = mihailova_generators(h_pres)?;
    let (h, h_prov) = h_input.resolve(&gens)?;
    let action_h = ActionSpec::gadget(&gens, &h);
    let action_1 = ActionSpec::gadget(&gens, &PairWord::identity());
    let without_h: Vec<IntMatrix> = gens.gens().iter().map(eval4).collect();
    let mut with_h = without_h.clone();
    with_h.push(eval4(&h));
    Ok(InstanceBundle {
        theorem1: IsoInstance {
            g_h: build_gh(&action_h)?,
            g_1: build_gh(&action_1)?,
        },
        theorem2: ConjInstance { with_h, without_h },
        provenance: Provenance {
            presentation: h_pres.clone(),
            h: h_prov,
            chart: EmbeddingChart::ID,
            p: gens.len(),
        },
    })
}

/// Checks that the gadget groups have the `ℤ⁴⋊F_{free_rank}` shape.
pub fn check_shape(bundle: &InstanceBundle, free_rank: usize) -> Result<(), PipelineError> {
    let want_gens = 4 + free_rank;
    let want_rels = 6 + 4 * free_rank;
    for g in [&bundle.theorem1.g_h, &bundle.theorem1.g_1] {
        if g.generator_count() != want_gens || g.relators().len() != want_rels {
            return Err(PipelineError::Shape(format!(
                "expected Z^4 x| F_{free_rank} ({want_gens} generators, {want_rels} relators), got {} generators and {} relators; the input presentation needs {} relators",
                g.generator_count(),
                g.relators().len(),
                free_rank.saturating_sub(3)
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Every check passed and the branches agree.
    Consistent,
    /// The input is a negative instance (not a member, or the conjugacy
    /// hypothesis fails on the given witness).
    Negative,
    /// A search bound was exhausted.
    Inconclusive,
    /// Two branches disagree; indicates a bug or an oracle that does not
    /// match the presentation.
    Inconsistent,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Consistent => 0,
            Status::Inconclusive => 2,
            Status::Negative => 3,
            Status::Inconsistent => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub express: ExpressBounds,
    pub power: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            express: ExpressBounds::default(),
            power: crate::matrep::DEFAULT_POWER_BOUND,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MemberBranch {
    pub witness: String,
    pub method: SearchMethod,
    pub iso_witness: IsoWitness,
    pub certificate: IsoCertificate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NonMemberBranch {
    /// Symbol words up to this length were enumerated; none evaluates to h.
    /// This is a bounded check, not a proof.
    pub enumerated_depth: usize,
    pub no_word_within_depth: bool,
    /// Lemma 1 diagnostics with h itself as the conjugator.
    pub conjugation: ContainmentReport,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Lemma2Report {
    pub oracle: &'static str,
    pub h: HProvenance,
    pub p: usize,
    pub member: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub member_branch: Option<MemberBranch>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub non_member_branch: Option<NonMemberBranch>,
    pub status: Status,
}

/// Membership in L, and for members an explicit verified isomorphism
/// `G_h ≅ G₁`.
pub fn pipeline_lemma2<O: QuotientOracle>(
    h_pres: &Presentation,
    o: &O,
    h_input: &HInput,
    bounds: Bounds,
) -> Result<Lemma2Report, PipelineError> {
    let gens = mihailova_generators(h_pres)?;
    let (h, h_prov) = h_input.resolve(&gens)?;
    let member = member_l(o, &h);
    let mut report = Lemma2Report {
        oracle: o.name(),
        h: h_prov,
        p: gens.len(),
        member,
        member_branch: None,
        non_member_branch: None,
        status: Status::Consistent,
    };
    if member {
        match express_in_generators(&gens, o, &h, bounds.express)? {
            Expression::Found { word, method } => {
                let witness = iso_witness(&gens, &word)?;
                let certificate = certify_isomorphism(
                    &ActionSpec::gadget(&gens, &h),
                    &ActionSpec::gadget(&gens, &PairWord::identity()),
                    &witness,
                )?;
                if !certificate.is_isomorphism() {
                    report.status = Status::Inconsistent;
                }
                report.member_branch = Some(MemberBranch {
                    witness: gens.format_symbol_word(&word),
                    method,
                    iso_witness: witness,
                    certificate,
                });
            }
            Expression::NotFoundWithinBound => report.status = Status::Inconclusive,
        }
    } else {
        let found = fiber::expressible_within(&gens, &h, bounds.express.depth);
        report.non_member_branch = Some(NonMemberBranch {
            enumerated_depth: bounds.express.depth,
            no_word_within_depth: found.is_none(),
            conjugation: lemma1_report(&gens, o, &h)?,
        });
        report.status = if found.is_none() {
            Status::Negative
        } else {
            Status::Inconsistent
        };
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PowerStep {
    /// Exponent `k` with `g^k ∈ F₂×F₂` (counted in powers of `g`).
    pub k: u64,
    pub pair: PairWord,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ThreeToOneReport {
    pub oracle: &'static str,
    pub h: HProvenance,
    pub conjugator: IntMatrix,
    pub decomposition: DecompositionVerdict,
    /// `g·h_i·g⁻¹ ∈ L` for each generator, i.e. `L ⊂ g⁻¹Lg`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub generators_in_conjugate: Vec<bool>,
    /// `g·h·g⁻¹ ∈ L`, i.e. `h ∈ g⁻¹Lg`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h_in_conjugate: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerStep>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma1: Option<ContainmentReport>,
    /// `h ∈ L` as concluded from the chain `L ⊂ g⁻¹Lg ⊂ … ⊂ g⁻ᵏLgᵏ = L`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub derived_member: Option<bool>,
    pub member: bool,
    pub note: String,
    pub status: Status,
}

fn conjugate_in_l<O: QuotientOracle>(
    o: &O,
    g: &IntMatrix,
    g_inv: &IntMatrix,
    x: &PairWord,
) -> Result<bool, PipelineError> {
    let m = g.mul(&eval4(x))?.mul(g_inv)?;
    Ok(member_f2xf2(&m).is_some_and(|p| member_l(o, &p)))
}

/// Runs the conjugacy-to-membership argument on an explicit conjugator `g`
/// for the hypothesis `⟨L, h⟩ = g⁻¹Lg`.
pub fn pipeline_3to1<O: QuotientOracle>(
    h_pres: &Presentation,
    o: &O,
    h_input: &HInput,
    g: &IntMatrix,
    power_bound: u64,
) -> Result<ThreeToOneReport, PipelineError> {
    let gens = mihailova_generators(h_pres)?;
    let (h, h_prov) = h_input.resolve(&gens)?;
    if g.dim() != 4 {
        return Err(MatrepError::WrongDimension {
            expected: 4,
            got: g.dim(),
        }
        .into());
    }
    let g_inv = g.inverse()?;
    let decomposition = decomposition_verdict(g);
    let member = member_l(o, &h);
    let mut report = ThreeToOneReport {
        oracle: o.name(),
        h: h_prov,
        conjugator: g.clone(),
        decomposition,
        generators_in_conjugate: Vec::new(),
        h_in_conjugate: None,
        power: None,
        lemma1: None,
        derived_member: None,
        member,
        note: String::new(),
        status: Status::Consistent,
    };
    if decomposition == DecompositionVerdict::Neither {
        report.note =
            "g mixes the two Q^2 summands, so it cannot conjugate L onto an overgroup of L".into();
        report.status = Status::Negative;
        return Ok(report);
    }
    report.generators_in_conjugate = gens
        .gens()
        .iter()
        .map(|x| conjugate_in_l(o, g, &g_inv, x))
        .collect::<Result<_, _>>()?;
    let h_in = conjugate_in_l(o, g, &g_inv, &h)?;
    report.h_in_conjugate = Some(h_in);
    if !report.generators_in_conjugate.iter().all(|&b| b) || !h_in {
        report.note =
            "g^-1 L g does not contain <L, h>, so g is not a conjugator for the hypothesis".into();
        report.status = Status::Negative;
        return Ok(report);
    }

    let (base, factor) = match decomposition {
        DecompositionVerdict::Swaps => (g.pow(2), 2),
        _ => (g.clone(), 1),
    };
    let (k, a) = match power_into_f2xf2(&base, power_bound)? {
        PowerOutcome::Found { k, pair } => (k * factor, pair),
        PowerOutcome::NotFoundWithinBound { bound } => {
            report.note = format!("no power of g up to {} lies in F2xF2", bound * factor);
            report.status = Status::Inconclusive;
            return Ok(report);
        }
    };
    report.power = Some(PowerStep { k, pair: a.clone() });
    let lemma1 = lemma1_report(&gens, o, &a)?;
    // L ⊂ g⁻ᵏLgᵏ = a⁻¹La, so every forward conjugate must lie in L
    let equal = lemma1.forward_contained() && lemma1.backward_contained();
    report.lemma1 = Some(lemma1);
    if !equal {
        report.note =
            "containment chain does not close up; oracle and presentation disagree?".into();
        report.status = Status::Inconsistent;
        return Ok(report);
    }
    report.derived_member = Some(true);
    if member {
        report.note =
            "L = g^-k L g^k, hence L = g^-1 L g contains h; agrees with the oracle".into();
    } else {
        report.note = "derived h in L but the oracle disagrees".into();
        report.status = Status::Inconsistent;
    }
    Ok(report)
}

/// Convenience: the generators of L for a presentation, re-exported so the
/// CLI does not need to reach into `fiber`.
pub fn generators(h_pres: &Presentation) -> Result<MihailovaGens, PipelineError> {
    Ok(mihailova_generators(h_pres)?)
}

/// The symbol word for `h` when given as text over `h1..hp`.
pub fn parse_symbol(gens: &MihailovaGens, text: &str) -> Result<Word, PipelineError> {
    Ok(gens.parse_symbol_word(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{AbelianZ2, FreeQuotient, SymmetricThree};

    fn s3() -> Presentation {
        SymmetricThree.presentation()
    }

    fn twelve() -> Presentation {
        let rels: Vec<String> = (1..=12).map(|i| format!("x1^{} x2^{}", i + 1, i)).collect();
        Presentation::from_strings(&["x1".to_string(), "x2".to_string()], &rels).unwrap()
    }

    #[test]
    fn bundle_for_s3() {
        let b = emit_instance(&s3(), &HInput::Symbol("h1".into())).unwrap();
        assert_eq!(b.provenance.p, 5);
        check_shape(&b, 6).unwrap();
        assert!(check_shape(&b, 15).is_err());
        assert_eq!(b.theorem2.with_h.len(), b.theorem2.without_h.len() + 1);
        assert_eq!(b.theorem2.with_h[..5], b.theorem2.without_h[..]);
        let (gh, g1) = (&b.theorem1.g_h, &b.theorem1.g_1);
        assert_eq!(gh.relators()[..26], g1.relators()[..26]);
        assert_ne!(gh.relators()[26..], g1.relators()[26..]);
    }

    #[test]
    fn bundle_for_identity_h() {
        let b = emit_instance(&s3(), &HInput::Pair(PairWord::identity())).unwrap();
        assert!(b.theorem2.with_h.last().unwrap().is_identity());
        assert_eq!(b.theorem1.g_h, b.theorem1.g_1);
    }

    #[test]
    fn twelve_relators_give_f15() {
        let b = emit_instance(&twelve(), &HInput::Symbol("h3 h14^-1".into())).unwrap();
        check_shape(&b, 15).unwrap();
        assert_eq!(b.theorem1.g_h.generator_count(), 19);
        assert_eq!(b.theorem1.g_h.relators().len(), 66);
    }

    #[test]
    fn deterministic_json() {
        let a = serde_json::to_string(
            &emit_instance(&twelve(), &HInput::Symbol("h1 h5".into())).unwrap(),
        )
        .unwrap();
        let b = serde_json::to_string(
            &emit_instance(&twelve(), &HInput::Symbol("h1 h5".into())).unwrap(),
        )
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn lemma2_examples() {
        let gens = mihailova_generators(&s3()).unwrap();
        let h = gens
            .evaluate(&gens.parse_symbol_word("h2 h3^-1").unwrap())
            .unwrap();
        let r =
            pipeline_lemma2(&s3(), &SymmetricThree, &HInput::Pair(h), Bounds::default()).unwrap();
        assert!(r.member);
        assert_eq!(r.status, Status::Consistent);
        assert!(r.member_branch.unwrap().certificate.is_isomorphism());

        let r = pipeline_lemma2(
            &s3(),
            &SymmetricThree,
            &HInput::Pair(PairWord::parse("x1", "x2").unwrap()),
            Bounds::default(),
        )
        .unwrap();
        assert!(!r.member);
        assert_eq!(r.status, Status::Negative);
        let nm = r.non_member_branch.unwrap();
        assert!(nm.no_word_within_depth);
        assert!(!nm.conjugation.central_witness);

        let r = pipeline_lemma2(
            &s3(),
            &SymmetricThree,
            &HInput::Pair(PairWord::identity()),
            Bounds::default(),
        )
        .unwrap();
        assert_eq!(r.status, Status::Consistent);
        assert_eq!(r.member_branch.unwrap().witness, "");
    }

    #[test]
    fn lemma2_other_fixtures() {
        let zsq = AbelianZ2.presentation();
        let h = PairWord::parse("a b", "b a").unwrap();
        let r = pipeline_lemma2(&zsq, &AbelianZ2, &HInput::Pair(h), Bounds::default()).unwrap();
        assert_eq!(r.status, Status::Consistent);
        let free = FreeQuotient.presentation();
        let r = pipeline_lemma2(
            &free,
            &FreeQuotient,
            &HInput::Pair(PairWord::parse("a b", "b a").unwrap()),
            Bounds::default(),
        )
        .unwrap();
        assert_eq!(r.status, Status::Negative);
    }

    #[test]
    fn three_to_one_examples() {
        let h = HInput::Symbol("h1 h4 h1^-1".into());
        let r = pipeline_3to1(&s3(), &SymmetricThree, &h, &IntMatrix::identity(4), 100).unwrap();
        assert_eq!(r.status, Status::Consistent);
        assert_eq!(r.power.as_ref().unwrap().k, 1);

        let g = eval4(&PairWord::parse("a B a", "a B a").unwrap());
        let r = pipeline_3to1(&s3(), &SymmetricThree, &h, &g, 100).unwrap();
        assert_eq!(r.status, Status::Consistent);
        assert_eq!(r.power.as_ref().unwrap().k, 1);
        let l1 = r.lemma1.unwrap();
        assert!(l1.forward_contained() && l1.backward_contained());

        let mut leak = IntMatrix::identity(4);
        leak.set(2, 0, 1.into());
        let r = pipeline_3to1(&s3(), &SymmetricThree, &h, &leak, 100).unwrap();
        assert_eq!(r.decomposition, DecompositionVerdict::Neither);
        assert_eq!(r.status, Status::Negative);

        // h outside L cannot lie in g^-1 L g for g = identity
        let out = HInput::Pair(PairWord::parse("x1", "x2").unwrap());
        let r = pipeline_3to1(&s3(), &SymmetricThree, &out, &IntMatrix::identity(4), 100).unwrap();
        assert_eq!(r.status, Status::Negative);
    }

    #[test]
    fn three_to_one_swap_on_diagonal_subgroup() {
        // for L = Δ the swap J normalizes L, and J² = I
        let free = FreeQuotient.presentation();
        let (i2, z) = (IntMatrix::identity(2), IntMatrix::zero(2));
        let j = IntMatrix::from_blocks(&z, &i2, &i2, &z);
        let h = HInput::Symbol("h1 h2".into());
        let r = pipeline_3to1(&free, &FreeQuotient, &h, &j, 10).unwrap();
        assert_eq!(r.decomposition, DecompositionVerdict::Swaps);
        assert_eq!(r.power.unwrap().k, 2);
        assert_eq!(r.status, Status::Consistent);
    }
}
