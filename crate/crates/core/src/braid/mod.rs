//! Exact combinatorics of braid words.
//!
//! Words are kept as free words in the Artin generators; no braid normal form
//! is computed. Element-level comparisons go through the
//! (matrix, writhe, permutation) triple, see [`sl2`].

pub mod brooks;
pub mod free;
pub mod sl2;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use brooks::{BrooksQm, QmCombination};
pub use free::{FreeLetter, FreeWord};
pub use sl2::IntMatrix2;

/// One Artin generator `σ_index^{±1}`; `index` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BraidLetter {
    pub index: usize,
    pub positive: bool,
}

impl BraidLetter {
    pub fn new(index: usize, positive: bool) -> Self {
        Self { index, positive }
    }

    pub fn sign(self) -> i64 {
        if self.positive {
            1
        } else {
            -1
        }
    }

    pub fn inverse(self) -> Self {
        Self { index: self.index, positive: !self.positive }
    }

    /// Signed-integer encoding: `σ_2^{-1}` is `-2`.
    pub fn to_signed(self) -> i32 {
        self.index as i32 * self.sign() as i32
    }
}

/// A word in the Artin generators of `B_n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "BraidWordRepr", into = "BraidWordRepr")]
pub struct BraidWord {
    strands: usize,
    letters: Vec<BraidLetter>,
}

#[derive(Serialize, Deserialize)]
struct BraidWordRepr {
    strands: usize,
    letters: Vec<i32>,
}

impl TryFrom<BraidWordRepr> for BraidWord {
    type Error = Error;

    fn try_from(r: BraidWordRepr) -> Result<Self> {
        BraidWord::from_signed(r.strands, &r.letters)
    }
}

impl From<BraidWord> for BraidWordRepr {
    fn from(w: BraidWord) -> Self {
        BraidWordRepr { strands: w.strands, letters: w.to_signed() }
    }
}

impl BraidWord {
    pub fn new(strands: usize, letters: Vec<BraidLetter>) -> Result<Self> {
        if strands < 2 {
            return Err(Error::InvalidArgument(format!("braids need at least 2 strands, got {strands}")));
        }
        for l in &letters {
            if l.index == 0 || l.index >= strands {
                return Err(Error::LetterOutOfRange { index: l.index, strands });
            }
        }
        Ok(Self { strands, letters })
    }

    pub fn identity(strands: usize) -> Result<Self> {
        Self::new(strands, Vec::new())
    }

    /// Parses the signed-integer form, e.g. `[1, 2, -1]` is `σ₁σ₂σ₁⁻¹`.
    pub fn from_signed(strands: usize, letters: &[i32]) -> Result<Self> {
        let mut out = Vec::with_capacity(letters.len());
        for &s in letters {
            if s == 0 {
                return Err(Error::Parse("generator index 0".into()));
            }
            out.push(BraidLetter::new(s.unsigned_abs() as usize, s > 0));
        }
        Self::new(strands, out)
    }

    pub fn to_signed(&self) -> Vec<i32> {
        self.letters.iter().map(|l| l.to_signed()).collect()
    }

    pub fn strands(&self) -> usize {
        self.strands
    }

    pub fn letters(&self) -> &[BraidLetter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Appends a letter without reduction. Panics on an out-of-range index.
    pub fn push(&mut self, letter: BraidLetter) {
        assert!(letter.index >= 1 && letter.index < self.strands, "letter out of range");
        self.letters.push(letter);
    }

    /// Cancels adjacent inverse pairs until none remain.
    pub fn free_reduce(&self) -> BraidWord {
        let mut stack: Vec<BraidLetter> = Vec::with_capacity(self.letters.len());
        for &l in &self.letters {
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        BraidWord { strands: self.strands, letters: stack }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|w| w[0] != w[1].inverse())
    }

    /// Arrangement after reading the word: entry `k` is the strand that ends
    /// at position `k` (0-based). Each `σ_i` swaps positions `i-1` and `i`.
    pub fn permutation(&self) -> Vec<usize> {
        let mut arrangement: Vec<usize> = (0..self.strands).collect();
        for l in &self.letters {
            arrangement.swap(l.index - 1, l.index);
        }
        arrangement
    }

    pub fn is_pure(&self) -> bool {
        self.permutation().iter().enumerate().all(|(k, &s)| k == s)
    }

    /// Exponent sum.
    pub fn writhe(&self) -> i64 {
        self.letters.iter().map(|l| l.sign()).sum()
    }

    pub fn inverse(&self) -> BraidWord {
        BraidWord {
            strands: self.strands,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn concat(&self, other: &BraidWord) -> Result<BraidWord> {
        if self.strands != other.strands {
            return Err(Error::InvalidArgument(format!(
                "strand mismatch: {} vs {}",
                self.strands, other.strands
            )));
        }
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Ok(BraidWord { strands: self.strands, letters })
    }

    /// `w^k` for any integer `k` (negative powers use the inverse word).
    pub fn pow(&self, k: i64) -> BraidWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut letters = Vec::with_capacity(base.letters.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            letters.extend_from_slice(&base.letters);
        }
        BraidWord { strands: self.strands, letters }
    }

    pub fn conjugate_by(&self, by: &BraidWord) -> Result<BraidWord> {
        by.concat(self)?.concat(&by.inverse())
    }
}

impl fmt::Display for BraidWord {
    /// Space-separated signed generator indices, the braid file format.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.letters.iter().map(|l| l.to_signed().to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl std::str::FromStr for BraidWord {
    type Err = Error;

    /// Parses `"<strands>: 1 1 -2"`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, tail) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("expected `<strands>: letters`, got `{s}`")))?;
        let strands: usize =
            head.trim().parse().map_err(|_| Error::Parse(format!("bad strand count `{head}`")))?;
        let letters = tail
            .split_whitespace()
            .map(|t| t.parse::<i32>().map_err(|_| Error::Parse(format!("bad letter `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        BraidWord::from_signed(strands, &letters)
    }
}

/// `σ_i^{±1}` in `B_n`.
pub fn sigma(strands: usize, index: usize, positive: bool) -> Result<BraidWord> {
    BraidWord::new(strands, vec![BraidLetter::new(index, positive)])
}

/// The standard pure generator `A_{j,i} = (σ_{i-1}…σ_{j+1}) σ_j² (σ_{j+1}^{-1}…σ_{i-1}^{-1})`
/// with `1 ≤ j < i ≤ n`: strand `i` loops once around strand `j`.
pub fn pure_generator(j: usize, i: usize, strands: usize) -> Result<BraidWord> {
    if !(1 <= j && j < i && i <= strands) {
        return Err(Error::InvalidArgument(format!("need 1 <= j < i <= n, got j={j}, i={i}, n={strands}")));
    }
    let mut letters = Vec::new();
    for k in ((j + 1)..i).rev() {
        letters.push(BraidLetter::new(k, true));
    }
    letters.push(BraidLetter::new(j, true));
    letters.push(BraidLetter::new(j, true));
    for k in (j + 1)..i {
        letters.push(BraidLetter::new(k, false));
    }
    BraidWord::new(strands, letters)
}

/// `η_{i,n} = A_{1,i} A_{2,i} ⋯ A_{i-1,i}`: strand `i` encircles strands
/// `1..i-1` once, positively.
pub fn eta(i: usize, strands: usize) -> Result<BraidWord> {
    if i < 2 || i > strands {
        return Err(Error::InvalidArgument(format!("eta needs 2 <= i <= n, got i={i}, n={strands}")));
    }
    let mut w = BraidWord::identity(strands)?;
    for j in 1..i {
        w = w.concat(&pure_generator(j, i, strands)?)?;
    }
    Ok(w)
}

/// `(σ_1 σ_2 ⋯ σ_{n-1})^n`, the generator of the centre.
pub fn full_twist(strands: usize) -> Result<BraidWord> {
    if strands < 2 {
        return Err(Error::InvalidArgument(format!("full twist needs n >= 2, got {strands}")));
    }
    let row: Vec<BraidLetter> = (1..strands).map(|i| BraidLetter::new(i, true)).collect();
    BraidWord::new(strands, row.repeat(strands))
}
