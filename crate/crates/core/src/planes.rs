//! Exact linear algebra over ℚ for the invariant-plane argument: commutants
//! of matrix sets, the planes `H_λ = {(x, λx)}` in ℚ⁴ = ℚ²⊕ℚ², and whether
//! a matrix preserves or swaps the two summands.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::matrep::{EmbeddingChart, IntMatrix};

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanesError {
    #[error("vectors do not span a plane")]
    NotAPlane,
    #[error("unsupported input: {0}")]
    Unsupported(String),
}

fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

fn rational_string(x: &Rational) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(mut rows: Vec<Vec<Rational>>) -> (Vec<Vec<Rational>>, Vec<usize>) {
    let cols = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..cols {
                    let t = &f * &rows[r][j];
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    rows.truncate(r);
    (rows, pivots)
}

/// Basis of `{x : A x = 0}` for `A` given by rows over `cols` unknowns.
pub fn nullspace(rows: Vec<Vec<Rational>>, cols: usize) -> Vec<Vec<Rational>> {
    let (reduced, pivots) = rref(rows);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rational::zero(); cols];
            v[f] = Rational::one();
            for (row, &pc) in reduced.iter().zip(&pivots) {
                v[pc] = -row[f].clone();
            }
            v
        })
        .collect()
}

fn rank(rows: Vec<Vec<Rational>>) -> usize {
    rref(rows).0.len()
}

fn to_rational(m: &IntMatrix) -> Vec<Vec<Rational>> {
    m.rows()
        .into_iter()
        .map(|r| r.into_iter().map(Rational::from_integer).collect())
        .collect()
}

fn apply(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

/// Two-dimensional subspace of ℚ⁴ in reduced row echelon form, so equal
/// subspaces have equal representations.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlaneQ {
    basis: [Vec<Rational>; 2],
}

impl PlaneQ {
    pub fn from_vectors(u: Vec<Rational>, v: Vec<Rational>) -> Result<Self, PlanesError> {
        if u.len() != 4 || v.len() != 4 {
            return Err(PlanesError::NotAPlane);
        }
        let (rows, _) = rref(vec![u, v]);
        let [a, b]: [Vec<Rational>; 2] = rows.try_into().map_err(|_| PlanesError::NotAPlane)?;
        Ok(PlaneQ { basis: [a, b] })
    }

    pub fn basis(&self) -> &[Vec<Rational>; 2] {
        &self.basis
    }

    /// `m · self`; `NotAPlane` when `m` is singular on the plane.
    pub fn image(&self, m: &IntMatrix) -> Result<PlaneQ, PlanesError> {
        let m = to_rational(m);
        PlaneQ::from_vectors(apply(&m, &self.basis[0]), apply(&m, &self.basis[1]))
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        rank(vec![
            self.basis[0].clone(),
            self.basis[1].clone(),
            v.to_vec(),
        ]) == 2
    }
}

impl Serialize for PlaneQ {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .basis
            .iter()
            .map(|r| r.iter().map(rational_string).collect())
            .collect();
        rows.serialize(s)
    }
}

impl fmt::Display for PlaneQ {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .basis
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("({})", cells.join(", "))
            })
            .collect();
        write!(f, "span{{{}}}", rows.join(", "))
    }
}

/// Slope of `H_λ`; `Infinity` names the vertical plane `{0}×ℚ²`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Lambda {
    Finite(Rational),
    Infinity,
}

impl Lambda {
    pub fn integer(n: i64) -> Self {
        Lambda::Finite(q(n))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Lambda::Finite(Rational::new(BigInt::from(n), BigInt::from(d)))
    }
}

impl fmt::Display for Lambda {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Lambda::Finite(x) => f.write_str(&rational_string(x)),
            Lambda::Infinity => f.write_str("infinity"),
        }
    }
}

impl Serialize for Lambda {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// `H_λ = {(x, λx) : x ∈ ℚ²}`, with `H_∞ = {0}×ℚ²`.
pub fn plane_h(lambda: &Lambda) -> PlaneQ {
    let (z, o) = (Rational::zero(), Rational::one());
    let (u, v) = match lambda {
        Lambda::Finite(l) => (
            vec![o.clone(), z.clone(), l.clone(), z.clone()],
            vec![z.clone(), o, z, l.clone()],
        ),
        Lambda::Infinity => (
            vec![z.clone(), z.clone(), o.clone(), z.clone()],
            vec![z.clone(), z, Rational::zero(), o],
        ),
    };
    PlaneQ::from_vectors(u, v).expect("H_lambda is a plane")
}

pub fn is_invariant(p: &PlaneQ, ms: &[IntMatrix]) -> bool {
    ms.iter().all(|m| p.image(m).as_ref() == Ok(p))
}

/// The algebra `{X : XM = MX for all M}` with an explicit basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Commutant {
    pub basis: Vec<Vec<Vec<Rational>>>,
}

impl Commutant {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Whether `x` lies in the span of the basis.
    pub fn contains(&self, x: &[Vec<Rational>]) -> bool {
        let flat = |m: &[Vec<Rational>]| m.iter().flatten().cloned().collect::<Vec<_>>();
        let mut rows: Vec<Vec<Rational>> = self.basis.iter().map(|b| flat(b)).collect();
        let before = rank(rows.clone());
        rows.push(flat(x));
        rank(rows) == before
    }
}

impl Serialize for Commutant {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let basis: Vec<Vec<Vec<String>>> = self
            .basis
            .iter()
            .map(|m| {
                m.iter()
                    .map(|r| r.iter().map(rational_string).collect())
                    .collect()
            })
            .collect();
        basis.serialize(s)
    }
}

pub fn commutant(ms: &[IntMatrix]) -> Commutant {
    let n = ms.first().map_or(4, IntMatrix::dim);
    let mut eqs = Vec::new();
    for m in ms {
        let m = to_rational(m);
        for i in 0..n {
            for j in 0..n {
                // (XM - MX)_ij over unknowns x_ab at index a*n + b
                let mut row = vec![Rational::zero(); n * n];
                for k in 0..n {
                    row[i * n + k] += &m[k][j];
                    row[k * n + j] -= &m[i][k];
                }
                eqs.push(row);
            }
        }
    }
    let basis = nullspace(eqs, n * n)
        .into_iter()
        .map(|v| v.chunks(n).map(<[Rational]>::to_vec).collect())
        .collect();
    Commutant { basis }
}

pub fn commutant_dim(ms: &[IntMatrix]) -> usize {
    commutant(ms).dim()
}

fn delta_generators() -> [IntMatrix; 2] {
    let (a, b) = (EmbeddingChart::a(), EmbeddingChart::b());
    [
        IntMatrix::block_diag(&a, &a).expect("2x2"),
        IntMatrix::block_diag(&b, &b).expect("2x2"),
    ]
}

/// Whether a 4×4 rational matrix has the form `[[aI, bI], [cI, dI]]`.
fn is_block_scalar(x: &[Vec<Rational>]) -> bool {
    (0..2).all(|bi| {
        (0..2).all(|bj| {
            let (r, c) = (2 * bi, 2 * bj);
            x[r][c] == x[r + 1][c + 1] && x[r][c + 1].is_zero() && x[r + 1][c].is_zero()
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanesReport {
    /// Dimension of the commutant of the diagonal generators alone.
    pub delta_commutant_dim: usize,
    pub commutant_dim: usize,
    /// Every `H_λ`, λ ∈ ℚ ∪ {∞}, is invariant.
    pub family: bool,
    /// The invariant `H_λ` when `family` is false.
    pub lambdas: Vec<Lambda>,
    pub planes: Vec<PlaneQ>,
    /// Invariant planes outside the `H_λ` family.
    pub extra_planes: Vec<PlaneQ>,
}

/// Rational roots of `c2 λ² + c1 λ + c0`, which must not be identically zero.
fn rational_roots(c2: &Rational, c1: &Rational, c0: &Rational) -> Vec<Rational> {
    if c2.is_zero() {
        if c1.is_zero() {
            return Vec::new();
        }
        return vec![-c0 / c1];
    }
    let disc = c1 * c1 - q(4) * c2 * c0;
    if disc.is_negative() {
        return Vec::new();
    }
    let (num, den) = (disc.numer().clone(), disc.denom().clone());
    let (rn, rd) = (num.sqrt(), den.sqrt());
    if &rn * &rn != num || &rd * &rd != den {
        return Vec::new();
    }
    let s = Rational::new(rn, rd);
    let two_c2 = q(2) * c2;
    let mut roots = vec![(-c1 - &s) / &two_c2, (-c1 + &s) / &two_c2];
    roots.sort();
    roots.dedup();
    roots
}

/// Classifies the 2-planes invariant under a set containing the images of
/// the diagonal generators `(a, a)` and `(b, b)`.
///
/// The commutant of the diagonal pair is checked to be exactly the
/// block-scalar matrices, so ℚ² is absolutely irreducible under the chart
/// and every diagonal-invariant plane is some `H_λ`. Each remaining matrix
/// `[[P, Q], [S, T]]` fixes `H_λ` iff `λ²Q + λ(P − T) − S = 0`, and fixes
/// `H_∞` iff `Q = 0`; those conditions are solved exactly.
pub fn invariant_planes_report(ms: &[IntMatrix]) -> Result<PlanesReport, PlanesError> {
    let delta = delta_generators();
    if !delta.iter().all(|d| ms.contains(d)) {
        return Err(PlanesError::Unsupported(
            "generator set must contain the images of (a,a) and (b,b)".into(),
        ));
    }
    if ms.iter().any(|m| m.dim() != 4) {
        return Err(PlanesError::Unsupported("matrices must be 4x4".into()));
    }
    let delta_comm = commutant(&delta);
    if delta_comm.dim() != 4 || !delta_comm.basis.iter().all(|x| is_block_scalar(x)) {
        return Err(PlanesError::Unsupported(
            "diagonal representation is not absolutely irreducible".into(),
        ));
    }
    let full = commutant(ms);

    let mut polys: Vec<[Rational; 3]> = Vec::new();
    let mut infinity = true;
    for m in ms {
        let r = to_rational(m);
        for i in 0..2 {
            for j in 0..2 {
                let (p, qq, s, t) = (&r[i][j], &r[i][j + 2], &r[i + 2][j], &r[i + 2][j + 2]);
                if !qq.is_zero() {
                    infinity = false;
                }
                let poly = [qq.clone(), p - t, -s.clone()];
                if poly.iter().any(|c| !c.is_zero()) {
                    polys.push(poly);
                }
            }
        }
    }
    let family = polys.is_empty() && infinity;
    let mut lambdas = Vec::new();
    if !family {
        if polys.is_empty() {
            return Err(PlanesError::Unsupported(
                "every finite slope is invariant but the vertical plane is not".into(),
            ));
        }
        let [c2, c1, c0] = &polys[0];
        for root in rational_roots(c2, c1, c0) {
            let vanishes = polys
                .iter()
                .all(|[a, b, c]| (a * &root * &root + b * &root + c).is_zero());
            if vanishes {
                lambdas.push(Lambda::Finite(root));
            }
        }
        if infinity {
            lambdas.push(Lambda::Infinity);
        }
    }
    let planes: Vec<PlaneQ> = lambdas.iter().map(plane_h).collect();
    debug_assert!(planes.iter().all(|p| is_invariant(p, ms)));
    Ok(PlanesReport {
        delta_commutant_dim: delta_comm.dim(),
        commutant_dim: full.dim(),
        family,
        lambdas,
        planes,
        extra_planes: Vec::new(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionVerdict {
    Preserves,
    Swaps,
    Neither,
}

/// How `g` acts on the summands `H₀ = ℚ²×{0}` and `H_∞ = {0}×ℚ²`.
pub fn decomposition_verdict(g: &IntMatrix) -> DecompositionVerdict {
    let h0 = plane_h(&Lambda::integer(0));
    let hinf = plane_h(&Lambda::Infinity);
    let (Ok(g0), Ok(ginf)) = (h0.image(g), hinf.image(g)) else {
        return DecompositionVerdict::Neither;
    };
    if g0 == h0 && ginf == hinf {
        DecompositionVerdict::Preserves
    } else if g0 == hinf && ginf == h0 {
        DecompositionVerdict::Swaps
    } else {
        DecompositionVerdict::Neither
    }
}
