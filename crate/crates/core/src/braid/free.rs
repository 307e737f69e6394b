//! Reduced words in the free group `F₂ = ⟨x, y⟩`, with `x = σ₁²`, `y = σ₂²`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::sl2::IntMatrix2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FreeLetter {
    X,
    XInv,
    Y,
    YInv,
}

impl FreeLetter {
    pub const ALL: [FreeLetter; 4] = [FreeLetter::X, FreeLetter::XInv, FreeLetter::Y, FreeLetter::YInv];

    pub fn inverse(self) -> Self {
        match self {
            FreeLetter::X => FreeLetter::XInv,
            FreeLetter::XInv => FreeLetter::X,
            FreeLetter::Y => FreeLetter::YInv,
            FreeLetter::YInv => FreeLetter::Y,
        }
    }

    pub fn to_char(self) -> char {
        match self {
            FreeLetter::X => 'x',
            FreeLetter::XInv => 'X',
            FreeLetter::Y => 'y',
            FreeLetter::YInv => 'Y',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'x' => Some(FreeLetter::X),
            'X' => Some(FreeLetter::XInv),
            'y' => Some(FreeLetter::Y),
            'Y' => Some(FreeLetter::YInv),
            _ => None,
        }
    }

    pub fn is_x(self) -> bool {
        matches!(self, FreeLetter::X | FreeLetter::XInv)
    }

    /// `X = [[1,2],[0,1]]`, `Y = [[1,0],[-2,1]]` and their inverses.
    pub fn matrix(self) -> IntMatrix2 {
        match self {
            FreeLetter::X => IntMatrix2::new(1, 2, 0, 1),
            FreeLetter::XInv => IntMatrix2::new(1, -2, 0, 1),
            FreeLetter::Y => IntMatrix2::new(1, 0, -2, 1),
            FreeLetter::YInv => IntMatrix2::new(1, 0, 2, 1),
        }
    }
}

/// A freely reduced word. Every constructor reduces.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FreeWord(Vec<FreeLetter>);

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = FreeLetter>>(letters: I) -> Self {
        let mut w = FreeWord::identity();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Appends with cancellation.
    pub fn push(&mut self, l: FreeLetter) {
        if self.0.last() == Some(&l.inverse()) {
            self.0.pop();
        } else {
            self.0.push(l);
        }
    }

    pub fn letters(&self) -> &[FreeLetter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut w = self.clone();
        for &l in &other.0 {
            w.push(l);
        }
        w
    }

    pub fn pow(&self, k: i64) -> FreeWord {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut w = FreeWord::identity();
        for _ in 0..k.unsigned_abs() {
            w = w.concat(&base);
        }
        w
    }

    /// Splits `self = u · c · u⁻¹` with `c` cyclically reduced; returns `(u, c)`.
    pub fn cyclic_decomposition(&self) -> (FreeWord, FreeWord) {
        let l = &self.0;
        let mut k = 0;
        while 2 * k + 1 < l.len() && l[k] == l[l.len() - 1 - k].inverse() {
            k += 1;
        }
        (FreeWord(l[..k].to_vec()), FreeWord(l[k..l.len() - k].to_vec()))
    }

    pub fn cyclically_reduced(&self) -> FreeWord {
        self.cyclic_decomposition().1
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&a), Some(&b)) => self.0.len() == 1 || a != b.inverse(),
            _ => true,
        }
    }

    pub fn contains_x(&self) -> bool {
        self.0.iter().any(|l| l.is_x())
    }

    pub fn contains_y(&self) -> bool {
        self.0.iter().any(|l| !l.is_x())
    }

    /// Image under `x ↦ images.0`, `y ↦ images.1`.
    pub fn substitute(&self, images: &(FreeWord, FreeWord)) -> FreeWord {
        let xi = images.0.inverse();
        let yi = images.1.inverse();
        let mut w = FreeWord::identity();
        for &l in &self.0 {
            let part = match l {
                FreeLetter::X => &images.0,
                FreeLetter::XInv => &xi,
                FreeLetter::Y => &images.1,
                FreeLetter::YInv => &yi,
            };
            for &m in &part.0 {
                w.push(m);
            }
        }
        w
    }

    /// Evaluates on `X`, `Y` (left to right).
    pub fn matrix(&self) -> Result<IntMatrix2> {
        self.0.iter().try_fold(IntMatrix2::identity(), |acc, l| acc.checked_mul(&l.matrix()))
    }

    /// Every reduced word of length at most `max_len`, shortlex order.
    pub fn all_up_to(max_len: usize) -> Vec<FreeWord> {
        let mut out = vec![FreeWord::identity()];
        let mut frontier = vec![FreeWord::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for l in FreeLetter::ALL {
                    if w.0.last() == Some(&l.inverse()) {
                        continue;
                    }
                    let mut v = w.0.clone();
                    v.push(l);
                    next.push(FreeWord(v));
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        out
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for FreeWord {
    type Err = Error;

    /// Letters `x X y Y`; `""` and `"1"` are the identity.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(FreeWord::identity());
        }
        s.chars()
            .map(|c| FreeLetter::from_char(c).ok_or_else(|| Error::Parse(format!("bad free-group letter `{c}`"))))
            .collect::<Result<Vec<_>>>()
            .map(FreeWord::from_letters)
    }
}

impl TryFrom<String> for FreeWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<FreeWord> for String {
    fn from(w: FreeWord) -> String {
        w.to_string()
    }
}
