//! Exact integer matrices and the faithful picture of F₂×F₂ inside GL(4,ℤ).
//!
//! F₂ is charted into SL(2,ℤ) by `a ↦ A = [[1,2],[0,1]]`, `b ↦ B = [[1,0],[2,1]]`.
//! The image is the level-2 congruence subgroup modulo `±I`, which has
//! finite index in GL(2,ℤ). Pairs go to block-diagonal 4×4 matrices.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::words::{PairWord, Syllable, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrepError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("ragged or empty matrix rows")]
    Shape,
    #[error("matrix is not unimodular (determinant {0})")]
    NotUnimodular(BigInt),
    #[error("expected a {expected}x{expected} matrix, got {got}x{got}")]
    WrongDimension { expected: usize, got: usize },
}

/// Square matrix over ℤ, row-major, arbitrary precision.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    dim: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut m = IntMatrix::zero(dim);
        for i in 0..dim {
            m.entries[i * dim + i] = BigInt::one();
        }
        m
    }

    pub fn zero(dim: usize) -> Self {
        IntMatrix {
            dim,
            entries: vec![BigInt::zero(); dim * dim],
        }
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, MatrepError> {
        let dim = rows.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(MatrepError::Shape);
        }
        Ok(IntMatrix {
            dim,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Convenience constructor for small literal matrices. Panics on ragged input.
    pub fn from_i64<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
        .expect("square literal matrix")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.dim + j] = v;
    }

    pub fn rows(&self) -> Vec<Vec<BigInt>> {
        self.entries.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntMatrix::identity(self.dim)
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            dim: self.dim,
            entries: self.entries.iter().map(|x| -x).collect(),
        }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, MatrepError> {
        if self.dim != other.dim {
            return Err(MatrepError::DimensionMismatch(self.dim, other.dim));
        }
        let n = self.dim;
        let mut out = IntMatrix::zero(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.entries[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    /// `self · v` for a column vector `v`.
    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.dim, "vector length must match dimension");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * &v[j]).sum())
            .collect()
    }

    /// Nonnegative powers by repeated squaring.
    pub fn pow(&self, n: u64) -> IntMatrix {
        let mut acc = IntMatrix::identity(self.dim);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base).expect("same dimension");
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base).expect("same dimension");
            }
        }
        acc
    }

    /// Fraction-free (Bareiss) determinant.
    pub fn det(&self) -> BigInt {
        let n = self.dim;
        let mut a = self.rows();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        sign * &a[n - 1][n - 1]
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().abs().is_one()
    }

    /// Exact inverse of a unimodular matrix.
    pub fn inverse(&self) -> Result<IntMatrix, MatrepError> {
        let d = self.det();
        if !d.abs().is_one() {
            return Err(MatrepError::NotUnimodular(d));
        }
        let n = self.dim;
        let mut a: Vec<Vec<BigRational>> = (0..n)
            .map(|i| {
                (0..2 * n)
                    .map(|j| {
                        if j < n {
                            BigRational::from_integer(self.get(i, j).clone())
                        } else if j - n == i {
                            BigRational::one()
                        } else {
                            BigRational::zero()
                        }
                    })
                    .collect()
            })
            .collect();
        for col in 0..n {
            let piv = (col..n)
                .find(|&r| !a[r][col].is_zero())
                .expect("nonsingular matrix has a pivot");
            a.swap(col, piv);
            let inv = a[col][col].recip();
            for x in a[col].iter_mut() {
                *x *= &inv;
            }
            for r in 0..n {
                if r != col && !a[r][col].is_zero() {
                    let f = a[r][col].clone();
                    for j in 0..2 * n {
                        let t = &f * &a[col][j];
                        a[r][j] -= t;
                    }
                }
            }
        }
        let mut out = IntMatrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let q = &a[i][n + j];
                debug_assert!(q.is_integer());
                out.set(i, j, q.to_integer());
            }
        }
        Ok(out)
    }

    pub fn block_diag(top: &IntMatrix, bottom: &IntMatrix) -> Result<IntMatrix, MatrepError> {
        if top.dim != 2 || bottom.dim != 2 {
            return Err(MatrepError::WrongDimension {
                expected: 2,
                got: if top.dim != 2 { top.dim } else { bottom.dim },
            });
        }
        Ok(IntMatrix::from_blocks(
            top,
            &IntMatrix::zero(2),
            &IntMatrix::zero(2),
            bottom,
        ))
    }

    /// Assembles `[[p, q], [s, t]]` from 2×2 blocks.
    pub fn from_blocks(p: &IntMatrix, q: &IntMatrix, s: &IntMatrix, t: &IntMatrix) -> IntMatrix {
        let mut m = IntMatrix::zero(4);
        for i in 0..2 {
            for j in 0..2 {
                m.set(i, j, p.get(i, j).clone());
                m.set(i, j + 2, q.get(i, j).clone());
                m.set(i + 2, j, s.get(i, j).clone());
                m.set(i + 2, j + 2, t.get(i, j).clone());
            }
        }
        m
    }

    /// The four 2×2 blocks `[p, q, s, t]` of a 4×4 matrix `[[p, q], [s, t]]`.
    pub fn blocks(&self) -> Result<[IntMatrix; 4], MatrepError> {
        if self.dim != 4 {
            return Err(MatrepError::WrongDimension {
                expected: 4,
                got: self.dim,
            });
        }
        let block = |r: usize, c: usize| {
            let mut b = IntMatrix::zero(2);
            for i in 0..2 {
                for j in 0..2 {
                    b.set(i, j, self.get(r + i, c + j).clone());
                }
            }
            b
        };
        Ok([block(0, 0), block(0, 2), block(2, 0), block(2, 2)])
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn is_identity_mod2(&self) -> bool {
        (0..self.dim).all(|i| {
            (0..self.dim).all(|j| {
                let want = if i == j { 1 } else { 0 };
                self.get(i, j).mod_floor(&BigInt::from(2)) == BigInt::from(want)
            })
        })
    }

    /// Sum of absolute values of the entries.
    pub fn magnitude(&self) -> BigInt {
        self.entries.iter().map(|x| x.abs()).sum()
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows()
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|x| x.to_string()).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// JSON entry: a number when it fits in an `i64`, a decimal string otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Small(i64),
    Big(String),
}

#[derive(Serialize, Deserialize)]
struct MatrixFile {
    dim: usize,
    rows: Vec<Vec<Entry>>,
}

impl Serialize for IntMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        MatrixFile {
            dim: self.dim,
            rows: self
                .rows()
                .into_iter()
                .map(|r| {
                    r.into_iter()
                        .map(|x| match x.to_i64() {
                            Some(v) => Entry::Small(v),
                            None => Entry::Big(x.to_string()),
                        })
                        .collect()
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let f = MatrixFile::deserialize(d)?;
        let rows = f
            .rows
            .into_iter()
            .map(|r| {
                r.into_iter()
                    .map(|e| match e {
                        Entry::Small(v) => Ok(BigInt::from(v)),
                        Entry::Big(s) => s.trim().parse::<BigInt>().map_err(D::Error::custom),
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let m = IntMatrix::from_rows(rows).map_err(D::Error::custom)?;
        if m.dim != f.dim {
            return Err(D::Error::custom(format!(
                "declared dim {} but rows give {}",
                f.dim, m.dim
            )));
        }
        Ok(m)
    }
}

/// The chart `a ↦ A`, `b ↦ B` of F₂ into SL(2,ℤ).
#[derive(Debug, Clone, Copy, Default)]
pub struct EmbeddingChart;

impl EmbeddingChart {
    pub const ID: &'static str = "sanov: a=[[1,2],[0,1]], b=[[1,0],[2,1]]";

    /// `A^n = [[1, 2n], [0, 1]]`.
    pub fn a_power(n: &BigInt) -> IntMatrix {
        let mut m = IntMatrix::identity(2);
        m.set(0, 1, n * 2);
        m
    }

    /// `B^n = [[1, 0], [2n, 1]]`.
    pub fn b_power(n: &BigInt) -> IntMatrix {
        let mut m = IntMatrix::identity(2);
        m.set(1, 0, n * 2);
        m
    }

    pub fn generator_power(generator: usize, n: &BigInt) -> IntMatrix {
        match generator {
            0 => Self::a_power(n),
            1 => Self::b_power(n),
            _ => panic!("the chart has two generators"),
        }
    }

    pub fn a() -> IntMatrix {
        Self::a_power(&BigInt::one())
    }

    pub fn b() -> IntMatrix {
        Self::b_power(&BigInt::one())
    }
}

/// Image of a rank-2 word in SL(2,ℤ).
pub fn eval2(w: &Word) -> IntMatrix {
    assert_eq!(w.rank(), 2, "eval2 takes words in F2");
    w.syllables().iter().fold(IntMatrix::identity(2), |acc, s| {
        acc.mul(&EmbeddingChart::generator_power(
            s.generator,
            &BigInt::from(s.exponent),
        ))
        .expect("2x2")
    })
}

/// Block-diagonal image of a pair in GL(4,ℤ).
pub fn eval4(p: &PairWord) -> IntMatrix {
    IntMatrix::block_diag(&eval2(p.left()), &eval2(p.right())).expect("2x2 blocks")
}

/// Nearest integer to `num / den` (ties toward +∞).
fn round_div(num: &BigInt, den: &BigInt) -> BigInt {
    let (num, den): (BigInt, BigInt) = if den.is_negative() {
        (-num, -den)
    } else {
        (num.clone(), den.clone())
    };
    let two = BigInt::from(2);
    let twice_den = &den * &two;
    (num * &two + den).div_floor(&twice_den)
}

/// Peels `X^n` off the left of `m` for `X = A` (generator 0) or `B`.
fn peel(m: &IntMatrix, generator: usize, n: &BigInt) -> IntMatrix {
    EmbeddingChart::generator_power(generator, &-n)
        .mul(m)
        .expect("2x2")
}

/// Candidate exponents for peeling generator `g` off `m`, smallest |n| first.
fn peel_candidates(m: &IntMatrix, generator: usize) -> Vec<BigInt> {
    let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    // A^{-n} m subtracts 2n·(row 2) from row 1; B^{-n} m subtracts 2n·(row 1) from row 2.
    let pairs = if generator == 0 {
        [(a, c), (b, d)]
    } else {
        [(c, a), (d, b)]
    };
    let mut out: Vec<BigInt> = pairs
        .iter()
        .filter(|(_, den)| !den.is_zero())
        .map(|(num, den)| round_div(num, &(*den * 2)))
        .filter(|n| !n.is_zero())
        .collect();
    out.sort_by(|x, y| x.abs().cmp(&y.abs()).then(x.cmp(y)));
    out.dedup();
    out
}

/// Recovers the unique reduced word with `eval2(w) = m`, or `None` when `m`
/// is outside the image of the chart.
pub fn member_f2(m: &IntMatrix) -> Option<Word> {
    if m.dim() != 2 || !m.det().is_one() || !m.is_identity_mod2() {
        return None;
    }
    let identity = IntMatrix::identity(2);
    let minus_identity = identity.neg();
    let mut current = m.clone();
    let mut syllables = Vec::new();
    loop {
        if current == identity {
            break;
        }
        if current == minus_identity {
            return None;
        }
        let size = current.magnitude();
        let unit = [BigInt::one(), -BigInt::one()];
        let step = (0..2)
            .flat_map(|g| {
                peel_candidates(&current, g)
                    .into_iter()
                    .map(move |n| (g, n))
            })
            .chain((0..2).flat_map(|g| unit.clone().into_iter().map(move |n| (g, n))))
            .map(|(g, n)| {
                let next = peel(&current, g, &n);
                (g, n, next)
            })
            .find(|(_, _, next)| next.magnitude() < size);
        let (g, n, next) = step?;
        assert!(next.magnitude() < size, "peeling must strictly shrink");
        syllables.push(Syllable {
            generator: g,
            exponent: n.to_i64()?,
        });
        current = next;
    }
    Word::from_syllables(2, syllables).ok()
}

/// Recovers `(u, v)` with `eval4((u, v)) = m`, or `None`.
pub fn member_f2xf2(m: &IntMatrix) -> Option<PairWord> {
    let [p, q, s, t] = m.blocks().ok()?;
    if !q.is_zero() || !s.is_zero() {
        return None;
    }
    PairWord::new(member_f2(&p)?, member_f2(&t)?).ok()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum PowerOutcome {
    Found { k: u64, pair: PairWord },
    NotFoundWithinBound { bound: u64 },
}

pub const DEFAULT_POWER_BOUND: u64 = 1200;

/// Smallest `k ∈ [1, bound]` with `g^k` in the image of F₂×F₂.
pub fn power_into_f2xf2(g: &IntMatrix, bound: u64) -> Result<PowerOutcome, MatrepError> {
    if g.dim() != 4 {
        return Err(MatrepError::WrongDimension {
            expected: 4,
            got: g.dim(),
        });
    }
    let d = g.det();
    if !d.abs().is_one() {
        return Err(MatrepError::NotUnimodular(d));
    }
    let mut power = IntMatrix::identity(4);
    for k in 1..=bound {
        power = power.mul(g)?;
        if !power.is_identity_mod2() {
            continue;
        }
        if let Some(pair) = member_f2xf2(&power) {
            return Ok(PowerOutcome::Found { k, pair });
        }
    }
    Ok(PowerOutcome::NotFoundWithinBound { bound })
}
