//! The fiber product `L = {(u, v) ∈ F₂×F₂ : π(u) = π(v)}` of a quotient
//! `π: F₂ → H`.
//!
//! For `H = ⟨x₁, x₂ | r₁, …, r_k⟩` the subgroup L is generated by the
//! `k + 2` pairs `(x₁, x₁)`, `(x₂, x₂)`, `(1, r_j)`. Membership is decided by
//! the oracle; expressing a member in those generators is a bounded search.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use serde::Serialize;
use thiserror::Error;

use crate::words::{
    apply_oracle, is_central, Letter, PairWord, Presentation, QuotientOracle, Word, WordError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FiberError {
    #[error("presentation must have exactly 2 generators, found {0}")]
    Shape(usize),
    #[error("{0} is not in the fiber product")]
    NotAMember(PairWord),
    #[error("symbol word has rank {got}, expected {expected}")]
    SymbolRank { expected: usize, got: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Generators `h₁, …, h_p` of L, diagonal pairs first, then one relator pair
/// per relator in presentation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MihailovaGens {
    source: Presentation,
    #[serde(rename = "generators")]
    gens: Vec<PairWord>,
}

pub fn mihailova_generators(h_pres: &Presentation) -> Result<MihailovaGens, FiberError> {
    if h_pres.generator_count() != 2 {
        return Err(FiberError::Shape(h_pres.generator_count()));
    }
    let mut gens = vec![
        PairWord::diagonal(&Word::generator(2, 0))?,
        PairWord::diagonal(&Word::generator(2, 1))?,
    ];
    for r in h_pres.relators() {
        gens.push(PairWord::new(Word::identity(2), r.clone())?);
    }
    Ok(MihailovaGens {
        source: h_pres.clone(),
        gens,
    })
}

impl MihailovaGens {
    pub fn source(&self) -> &Presentation {
        &self.source
    }

    pub fn gens(&self) -> &[PairWord] {
        &self.gens
    }

    /// Number of generators, `p = k + 2`.
    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn symbol_names(&self) -> Vec<String> {
        (1..=self.gens.len()).map(|i| format!("h{i}")).collect()
    }

    pub fn parse_symbol_word(&self, text: &str) -> Result<Word, FiberError> {
        Ok(Word::parse_named(text, &self.symbol_names())?)
    }

    pub fn format_symbol_word(&self, w: &Word) -> String {
        w.display_named(&self.symbol_names())
    }

    /// Evaluates a word in the symbols `h_i` to an element of F₂×F₂.
    pub fn evaluate(&self, symbol_word: &Word) -> Result<PairWord, FiberError> {
        if symbol_word.rank() != self.gens.len() {
            return Err(FiberError::SymbolRank {
                expected: self.gens.len(),
                got: symbol_word.rank(),
            });
        }
        let lefts: Vec<Word> = self.gens.iter().map(|g| g.left().clone()).collect();
        let rights: Vec<Word> = self.gens.iter().map(|g| g.right().clone()).collect();
        Ok(PairWord::new(
            symbol_word.substitute(&lefts)?,
            symbol_word.substitute(&rights)?,
        )?)
    }

    /// The symbol word `w(h₁, h₂)` whose evaluation is the diagonal pair `(w, w)`.
    fn diagonal_symbols(&self, w: &Word) -> Word {
        let p = self.gens.len();
        Word::from_syllables(p, w.syllables().iter().copied()).expect("rank 2 fits in rank p")
    }
}

pub fn member_l<O: QuotientOracle>(o: &O, p: &PairWord) -> bool {
    apply_oracle(o, p.left()).expect("pair words have rank 2")
        == apply_oracle(o, p.right()).expect("pair words have rank 2")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ExpressBounds {
    /// Maximum symbol-word length for the breadth-first stage.
    pub depth: usize,
    /// Maximum number of expanded states in the relator-insertion stage;
    /// zero disables that stage.
    pub kernel_budget: usize,
}

impl Default for ExpressBounds {
    fn default() -> Self {
        ExpressBounds {
            depth: 8,
            kernel_budget: 200_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    /// Shortest symbol word, found by meet-in-the-middle breadth-first search.
    Breadth,
    /// Diagonal part read off directly, kernel part found by relator insertion.
    Kernel,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expression {
    Found { word: Word, method: SearchMethod },
    NotFoundWithinBound,
}

/// Writes a member of L as a word in `h₁^{±1}, …, h_p^{±1}`.
///
/// First a breadth-first search over symbol words of length ≤ `depth`,
/// which returns a shortest witness. If that fails, `(u, v)` is split as
/// `(u, u)·(1, u⁻¹v)` and `u⁻¹v` is written as a product of conjugates of
/// relators by a best-first relator-insertion search. Every returned word
/// has been evaluated and compared with `p`. A miss is not a proof of
/// non-membership.
pub fn express_in_generators<O: QuotientOracle>(
    g: &MihailovaGens,
    o: &O,
    p: &PairWord,
    bounds: ExpressBounds,
) -> Result<Expression, FiberError> {
    if !member_l(o, p) {
        return Err(FiberError::NotAMember(p.clone()));
    }
    if let Some(word) = breadth_first(g, p, bounds.depth) {
        debug_assert_eq!(g.evaluate(&word).as_ref(), Ok(p));
        return Ok(Expression::Found {
            word,
            method: SearchMethod::Breadth,
        });
    }
    if bounds.kernel_budget > 0 {
        if let Some(word) = kernel_search(g, p, bounds.kernel_budget) {
            if g.evaluate(&word)? == *p {
                return Ok(Expression::Found {
                    word,
                    method: SearchMethod::Kernel,
                });
            }
        }
    }
    Ok(Expression::NotFoundWithinBound)
}

/// Whether some symbol word of length ≤ `depth` evaluates to `p`. Works for
/// any pair, member or not; used to confirm non-expressibility up to a bound.
pub fn expressible_within(g: &MihailovaGens, p: &PairWord, depth: usize) -> Option<Word> {
    breadth_first(g, p, depth)
}

struct Frontier {
    nodes: Vec<(PairWord, usize, Option<Letter>)>,
    index: HashMap<PairWord, usize>,
    depth: Vec<usize>,
    level: Vec<usize>,
}

impl Frontier {
    fn new(root: PairWord) -> Self {
        let mut index = HashMap::new();
        index.insert(root.clone(), 0);
        Frontier {
            nodes: vec![(root, usize::MAX, None)],
            index,
            depth: vec![0],
            level: vec![0],
        }
    }

    /// Letters on the path from the root to `node`, root end first.
    fn path(&self, mut node: usize) -> Vec<Letter> {
        let mut out = Vec::new();
        while let (_, parent, Some(l)) = &self.nodes[node] {
            out.push(*l);
            node = *parent;
        }
        out.reverse();
        out
    }
}

fn breadth_first(g: &MihailovaGens, target: &PairWord, depth: usize) -> Option<Word> {
    let rank = g.len();
    let steps: Vec<(Letter, PairWord)> = g
        .gens()
        .iter()
        .enumerate()
        .flat_map(|(i, h)| {
            [
                (Letter::new(i, false), h.clone()),
                (Letter::new(i, true), h.inverse()),
            ]
        })
        .collect();
    // forward nodes are eval(W1); backward nodes are target·eval(W2)⁻¹
    let mut sides = [
        Frontier::new(PairWord::identity()),
        Frontier::new(target.clone()),
    ];
    let join = |sides: &[Frontier; 2], f: usize, b: usize| -> Word {
        let mut letters = sides[0].path(f);
        let mut back = sides[1].path(b);
        back.reverse();
        letters.extend(back);
        Word::from_letters(rank, letters).expect("symbol letters within rank")
    };
    if let Some(&b) = sides[1].index.get(&PairWord::identity()) {
        return Some(join(&sides, 0, b));
    }
    let mut radius = [0usize; 2];
    while radius[0] + radius[1] < depth {
        let side = if radius[0] <= radius[1] { 0 } else { 1 };
        let mut next_level = Vec::new();
        let mut best: Option<(usize, usize, usize)> = None;
        for &node in &sides[side].level.clone() {
            let here = sides[side].nodes[node].0.clone();
            for (letter, h) in &steps {
                let child = if side == 0 {
                    here.multiply(h)
                } else {
                    here.multiply(&h.inverse())
                };
                if sides[side].index.contains_key(&child) {
                    continue;
                }
                let id = sides[side].nodes.len();
                sides[side].index.insert(child.clone(), id);
                sides[side].nodes.push((child.clone(), node, Some(*letter)));
                sides[side].depth.push(radius[side] + 1);
                next_level.push(id);
                if let Some(&other) = sides[1 - side].index.get(&child) {
                    let total = radius[side] + 1 + sides[1 - side].depth[other];
                    if best.is_none_or(|(t, _, _)| total < t) {
                        best = Some((total, id, other));
                    }
                }
            }
        }
        if let Some((_, id, other)) = best {
            let (f, b) = if side == 0 { (id, other) } else { (other, id) };
            return Some(join(&sides, f, b));
        }
        if next_level.is_empty() {
            return None;
        }
        sides[side].level = next_level;
        radius[side] += 1;
    }
    None
}

/// One factor `c · r_j^sign · c⁻¹` of a product of relator conjugates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelatorConjugate {
    pub conjugator: Word,
    pub relator: usize,
    pub sign: i64,
}

/// Writes `n` as a product of conjugates of the relators (and inverses), in
/// order, by best-first search over relator insertions with free reduction.
pub fn relator_decomposition(
    relators: &[Word],
    n: &Word,
    budget: usize,
) -> Option<Vec<RelatorConjugate>> {
    let rank = n.rank();
    // (letters of a cyclic conjugate ρ, relator index, exponent e, prefix q) with ρ = q·r^e·q⁻¹
    let mut moves: Vec<(Vec<Letter>, usize, i64, Word)> = Vec::new();
    for (j, r) in relators.iter().enumerate() {
        for e in [1i64, -1] {
            let base: Vec<Letter> = r.pow(e).letters().collect();
            let mut seen = HashSet::new();
            for k in 0..base.len() {
                let rho: Vec<Letter> = base[k..].iter().chain(&base[..k]).copied().collect();
                if !seen.insert(rho.clone()) {
                    continue;
                }
                let head = Word::from_letters(rank, base[..k].iter().copied())
                    .expect("relator letters within rank");
                moves.push((rho, j, e, head.inverse()));
            }
        }
    }

    struct State {
        word: Vec<Letter>,
        parent: usize,
        factor: Option<RelatorConjugate>,
    }
    let start: Vec<Letter> = n.letters().collect();
    let mut states = vec![State {
        word: start.clone(),
        parent: usize::MAX,
        factor: None,
    }];
    let mut seen: HashSet<Vec<Letter>> = HashSet::new();
    seen.insert(start.clone());
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((start.len(), 0usize, 0usize)));
    let mut expanded = 0usize;

    while let Some(Reverse((_, steps, id))) = heap.pop() {
        if states[id].word.is_empty() {
            let mut factors = Vec::new();
            let mut node = id;
            while let Some(f) = states[node].factor.clone() {
                factors.push(f);
                node = states[node].parent;
            }
            factors.reverse();
            return Some(factors);
        }
        expanded += 1;
        if expanded > budget {
            return None;
        }
        let m = states[id].word.clone();
        for (rho, j, e, q) in &moves {
            for i in 0..=m.len() {
                let cancels_left = i > 0 && m[i - 1] == rho[0].inverse();
                let cancels_right = i < m.len() && m[i] == rho[rho.len() - 1].inverse();
                if !cancels_left && !cancels_right {
                    continue;
                }
                let next = Word::from_letters(
                    rank,
                    m[..i]
                        .iter()
                        .chain(rho.iter())
                        .chain(m[i..].iter())
                        .copied(),
                )
                .expect("letters within rank");
                let next: Vec<Letter> = next.letters().collect();
                if !seen.insert(next.clone()) {
                    continue;
                }
                // m = (α q) r^{-e} (α q)⁻¹ · m'  with α = m[..i]
                let alpha =
                    Word::from_letters(rank, m[..i].iter().copied()).expect("letters within rank");
                let factor = RelatorConjugate {
                    conjugator: &alpha * q,
                    relator: *j,
                    sign: -e,
                };
                let len = next.len();
                states.push(State {
                    word: next,
                    parent: id,
                    factor: Some(factor),
                });
                heap.push(Reverse((len, steps + 1, states.len() - 1)));
            }
        }
    }
    None
}

fn kernel_search(g: &MihailovaGens, p: &PairWord, budget: usize) -> Option<Word> {
    let (u, v) = (p.left(), p.right());
    let n = &u.inverse() * v;
    let factors = relator_decomposition(g.source().relators(), &n, budget)?;
    let rank = g.len();
    let mut word = g.diagonal_symbols(u);
    for f in factors {
        let c = g.diagonal_symbols(&f.conjugator);
        let r = Word::generator_power(rank, 2 + f.relator, f.sign).ok()?;
        word = &word * &r.conjugate_by(&c);
    }
    Some(word)
}

/// Conjugation data for one `a = (x, y)`: which `a·h_i·a⁻¹` and `a⁻¹·h_i·a`
/// lie in L, and whether `π(x⁻¹y)` is central.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ContainmentReport {
    pub element: PairWord,
    pub forward: Vec<bool>,
    pub backward: Vec<bool>,
    pub central_witness: bool,
}

impl ContainmentReport {
    /// `a·L·a⁻¹ ⊂ L`, i.e. `L ⊂ a⁻¹La`.
    pub fn forward_contained(&self) -> bool {
        self.forward.iter().all(|&b| b)
    }

    pub fn backward_contained(&self) -> bool {
        self.backward.iter().all(|&b| b)
    }

    /// Forward containment forces equality and a central `π(x⁻¹y)`.
    pub fn lemma_holds(&self) -> bool {
        !self.forward_contained() || (self.backward_contained() && self.central_witness)
    }
}

pub fn lemma1_report<O: QuotientOracle>(
    g: &MihailovaGens,
    o: &O,
    a: &PairWord,
) -> Result<ContainmentReport, FiberError> {
    let a_inv = a.inverse();
    let forward = g
        .gens()
        .iter()
        .map(|h| member_l(o, &h.conjugate_by(a)))
        .collect();
    let backward = g
        .gens()
        .iter()
        .map(|h| member_l(o, &h.conjugate_by(&a_inv)))
        .collect();
    let central_witness = is_central(o, &(&a.left().inverse() * a.right()))?;
    let report = ContainmentReport {
        element: a.clone(),
        forward,
        backward,
        central_witness,
    };
    assert!(
        report.lemma_holds(),
        "forward containment without equality for {a}"
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{AbelianZ2, FreeQuotient, SymmetricThree};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn s3_gens() -> MihailovaGens {
        mihailova_generators(&SymmetricThree.presentation()).unwrap()
    }

    fn twelve_relators() -> Presentation {
        let rels: Vec<String> = (1..=12).map(|i| format!("x1^{} x2^{}", i + 1, i)).collect();
        Presentation::from_strings(&["x1".to_string(), "x2".to_string()], &rels).unwrap()
    }

    #[test]
    fn generator_counts() {
        assert_eq!(mihailova_generators(&twelve_relators()).unwrap().len(), 14);
        let free = mihailova_generators(&FreeQuotient.presentation()).unwrap();
        assert_eq!(
            free.gens(),
            &[
                PairWord::parse("a", "a").unwrap(),
                PairWord::parse("b", "b").unwrap()
            ]
        );
        let g = s3_gens();
        let expect = [
            ("a", "a"),
            ("b", "b"),
            ("", "a a"),
            ("", "b b b"),
            ("", "a b a b"),
        ];
        let expect: Vec<PairWord> = expect
            .iter()
            .map(|(l, r)| PairWord::parse(l, r).unwrap())
            .collect();
        assert_eq!(g.gens(), expect.as_slice());
        let three = Presentation::from_strings(&["x", "y", "z"], &[]).unwrap();
        assert_eq!(mihailova_generators(&three), Err(FiberError::Shape(3)));
    }

    #[test]
    fn generators_are_members() {
        for h in s3_gens().gens() {
            assert!(member_l(&SymmetricThree, h));
        }
        for h in mihailova_generators(&AbelianZ2.presentation())
            .unwrap()
            .gens()
        {
            assert!(member_l(&AbelianZ2, h));
        }
    }

    #[test]
    fn membership_examples() {
        let o = SymmetricThree;
        assert!(member_l(&o, &PairWord::diagonal(&w("a b A b")).unwrap()));
        assert!(!member_l(&o, &PairWord::parse("x1", "x2").unwrap()));
        assert!(member_l(&o, &PairWord::parse("x1 x1", "").unwrap()));
    }

    #[test]
    fn express_generator_itself() {
        let g = s3_gens();
        let got =
            express_in_generators(&g, &SymmetricThree, &g.gens()[0], ExpressBounds::default())
                .unwrap();
        assert_eq!(
            got,
            Expression::Found {
                word: g.parse_symbol_word("h1").unwrap(),
                method: SearchMethod::Breadth
            }
        );
    }

    #[test]
    fn express_conjugated_relator() {
        let g = s3_gens();
        let p = PairWord::new(Word::identity(2), w("x1 x2 x2 x2 X1")).unwrap();
        let Expression::Found { word, .. } =
            express_in_generators(&g, &SymmetricThree, &p, ExpressBounds::default()).unwrap()
        else {
            panic!("expected a witness");
        };
        assert_eq!(g.format_symbol_word(&word), "h1 h4 h1^-1");
    }

    #[test]
    fn express_rejects_non_members() {
        let g = s3_gens();
        let p = PairWord::parse("x1", "x2").unwrap();
        assert_eq!(
            express_in_generators(&g, &SymmetricThree, &p, ExpressBounds::default()),
            Err(FiberError::NotAMember(p))
        );
    }

    #[test]
    fn kernel_stage_alone() {
        let g = s3_gens();
        let sym = g
            .parse_symbol_word("h2 h3 h1 h5^-1 h2^-1 h4 h1^-1 h2 h5 h1 h3 h2")
            .unwrap();
        let p = g.evaluate(&sym).unwrap();
        let bounds = ExpressBounds {
            depth: 0,
            kernel_budget: 100_000,
        };
        match express_in_generators(&g, &SymmetricThree, &p, bounds).unwrap() {
            Expression::Found { word, method } => {
                assert_eq!(method, SearchMethod::Kernel);
                assert_eq!(g.evaluate(&word).unwrap(), p);
            }
            Expression::NotFoundWithinBound => panic!("kernel search failed"),
        }
    }

    #[test]
    fn relator_decomposition_multiplies_back() {
        let rels = SymmetricThree.presentation().relators().to_vec();
        let n = &w("b a a B").conjugate_by(&w("a b")) * &w("a b a b").inverse();
        let factors = relator_decomposition(&rels, &n, 10_000).unwrap();
        let product = factors.iter().fold(Word::identity(2), |acc, f| {
            &acc * &rels[f.relator].pow(f.sign).conjugate_by(&f.conjugator)
        });
        assert_eq!(product, n);
    }

    #[test]
    fn lemma1_examples() {
        let g = s3_gens();
        let o = SymmetricThree;
        let r = lemma1_report(&g, &o, &PairWord::identity()).unwrap();
        assert!(r.forward_contained() && r.backward_contained() && r.central_witness);
        let r = lemma1_report(&g, &o, &PairWord::parse("x1", "x1").unwrap()).unwrap();
        assert!(r.forward_contained() && r.backward_contained());
        let r = lemma1_report(&g, &o, &PairWord::parse("x1", "x2").unwrap()).unwrap();
        assert!(!r.central_witness);
        assert!(!r.forward_contained());
    }

    fn word2(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(prop::sample::select(vec![1i64, -1, 2, -2]), 0..max)
            .prop_map(|v| Word::from_signed(2, &v).unwrap())
    }

    fn symbol_word(p: usize, max: usize) -> impl Strategy<Value = Word> {
        let letters: Vec<i64> = (1..=p as i64).flat_map(|i| [i, -i]).collect();
        prop::collection::vec(prop::sample::select(letters), 0..max)
            .prop_map(move |v| Word::from_signed(p, &v).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn express_round_trip(sym in symbol_word(5, 7)) {
            let g = s3_gens();
            let p = g.evaluate(&sym).unwrap();
            match express_in_generators(&g, &SymmetricThree, &p, ExpressBounds::default()).unwrap() {
                Expression::Found { word, .. } => {
                    prop_assert_eq!(g.evaluate(&word).unwrap(), p);
                    prop_assert!(word.len() <= sym.len());
                }
                Expression::NotFoundWithinBound => prop_assert!(false, "no witness for {}", sym),
            }
        }

        #[test]
        fn members_are_closed(a in symbol_word(5, 6), b in symbol_word(5, 6)) {
            let g = s3_gens();
            let (x, y) = (g.evaluate(&a).unwrap(), g.evaluate(&b).unwrap());
            prop_assert!(member_l(&SymmetricThree, &(&x * &y)));
            prop_assert!(member_l(&SymmetricThree, &x.inverse()));
        }

        #[test]
        fn lemma1_property(x in word2(9), y in word2(9)) {
            let a = PairWord::new(x, y).unwrap();
            let zsq = mihailova_generators(&AbelianZ2.presentation()).unwrap();
            for report in [
                lemma1_report(&s3_gens(), &SymmetricThree, &a).unwrap(),
                lemma1_report(&zsq, &AbelianZ2, &a).unwrap(),
            ] {
                if report.forward_contained() {
                    prop_assert!(report.backward_contained());
                    prop_assert!(report.central_witness);
                }
            }
        }
    }
}
