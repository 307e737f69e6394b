//! The `B₃ → SL(2,ℤ)` image and the projection `P₃ → F₂ = P₃ / Z(P₃)`.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::free::{FreeLetter, FreeWord};
use super::{BraidLetter, BraidWord};

/// `[[a, b], [c, d]]` with checked `i128` arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMatrix2 {
    pub a: i128,
    pub b: i128,
    pub c: i128,
    pub d: i128,
}

impl IntMatrix2 {
    pub const fn new(a: i128, b: i128, c: i128, d: i128) -> Self {
        Self { a, b, c, d }
    }

    pub const fn identity() -> Self {
        Self::new(1, 0, 0, 1)
    }

    pub fn det(&self) -> Result<i128> {
        let ad = self.a.checked_mul(self.d).ok_or(Error::Overflow)?;
        let bc = self.b.checked_mul(self.c).ok_or(Error::Overflow)?;
        ad.checked_sub(bc).ok_or(Error::Overflow)
    }

    pub fn checked_mul(&self, o: &IntMatrix2) -> Result<IntMatrix2> {
        let dot = |p: i128, q: i128, r: i128, s: i128| -> Result<i128> {
            let x = p.checked_mul(q).ok_or(Error::Overflow)?;
            let y = r.checked_mul(s).ok_or(Error::Overflow)?;
            x.checked_add(y).ok_or(Error::Overflow)
        };
        Ok(IntMatrix2::new(
            dot(self.a, o.a, self.b, o.c)?,
            dot(self.a, o.b, self.b, o.d)?,
            dot(self.c, o.a, self.d, o.c)?,
            dot(self.c, o.b, self.d, o.d)?,
        ))
    }

    /// Inverse of a determinant-one matrix.
    pub fn inverse_sl2(&self) -> IntMatrix2 {
        IntMatrix2::new(self.d, -self.b, -self.c, self.a)
    }

    pub fn neg(&self) -> IntMatrix2 {
        IntMatrix2::new(-self.a, -self.b, -self.c, -self.d)
    }

    pub fn is_plus_minus_identity(&self) -> bool {
        self.b == 0 && self.c == 0 && ((self.a == 1 && self.d == 1) || (self.a == -1 && self.d == -1))
    }

    /// Equality in `PSL(2,ℤ)`.
    pub fn eq_up_to_sign(&self, o: &IntMatrix2) -> bool {
        self == o || *self == o.neg()
    }

    /// `|a| + |b| + |c| + |d|`, saturating.
    pub fn l1(&self) -> u128 {
        [self.a, self.b, self.c, self.d]
            .iter()
            .fold(0u128, |acc, v| acc.saturating_add(v.unsigned_abs()))
    }
}

impl fmt::Display for IntMatrix2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

fn letter_matrix(l: BraidLetter) -> IntMatrix2 {
    match (l.index, l.positive) {
        (1, true) => IntMatrix2::new(1, 1, 0, 1),
        (1, false) => IntMatrix2::new(1, -1, 0, 1),
        (2, true) => IntMatrix2::new(1, 0, -1, 1),
        (2, false) => IntMatrix2::new(1, 0, 1, 1),
        _ => unreachable!("validated three-strand letter"),
    }
}

fn require_three(w: &BraidWord) -> Result<()> {
    if w.strands() != 3 {
        return Err(Error::NotThreeStrands(w.strands()));
    }
    Ok(())
}

/// `σ₁ ↦ [[1,1],[0,1]]`, `σ₂ ↦ [[1,0],[-1,1]]`, multiplied left to right.
pub fn sl2_matrix(w: &BraidWord) -> Result<IntMatrix2> {
    require_three(w)?;
    w.letters()
        .iter()
        .try_fold(IntMatrix2::identity(), |acc, &l| acc.checked_mul(&letter_matrix(l)))
}

/// Writes a matrix of the level-two subgroup as a word in `X`, `Y` up to sign.
///
/// Left-multiplies by whichever of `X^{±1}`, `Y^{±1}` strictly lowers the
/// entry sum until `±I` is reached; the answer is the inverse of the
/// recorded sequence.
pub fn descend(m: &IntMatrix2) -> Result<FreeWord> {
    let mut m = *m;
    let mut steps = Vec::new();
    while !m.is_plus_minus_identity() {
        let norm = m.l1();
        let mut best: Option<(u128, FreeLetter, IntMatrix2)> = None;
        for l in FreeLetter::ALL {
            let next = l.matrix().checked_mul(&m)?;
            let n = next.l1();
            if n < norm && best.is_none_or(|(b, _, _)| n < b) {
                best = Some((n, l, next));
            }
        }
        match best {
            Some((_, l, next)) => {
                steps.push(l);
                m = next;
            }
            None => return Err(Error::DescentFailed(format!("stuck at {m}"))),
        }
    }
    Ok(FreeWord::from_letters(steps.iter().map(|l| l.inverse())))
}

/// Image of a pure three-strand braid in `F₂ = ⟨x, y⟩`, `x = σ₁²`, `y = σ₂²`,
/// by descent on the full matrix. Entries grow exponentially, so long words
/// overflow; [`p3_to_f2`] has no such limit.
pub fn p3_to_f2_by_descent(w: &BraidWord) -> Result<FreeWord> {
    require_three(w)?;
    if !w.is_pure() {
        return Err(Error::NotPure(w.permutation()));
    }
    descend(&sl2_matrix(w)?)
}

/// Coset table for `P₃ ⊂ B₃`. Representatives are one short word per
/// permutation; reading a letter from coset `c` factors
/// `rep(c)·letter = piece·rep(c')` with `piece` pure.
struct CosetTable {
    perms: Vec<Vec<usize>>,
    reps: Vec<BraidWord>,
    /// `step[c][slot]`, slot `2·(index−1) + (negative as usize)`.
    step: Vec<[(usize, FreeWord); 4]>,
}

fn slot(l: BraidLetter) -> usize {
    2 * (l.index - 1) + usize::from(!l.positive)
}

impl CosetTable {
    fn build() -> Result<Self> {
        let rep_words: [&[i32]; 6] = [&[], &[1], &[2], &[1, 2], &[2, 1], &[1, 2, 1]];
        let reps: Vec<BraidWord> =
            rep_words.iter().map(|s| BraidWord::from_signed(3, s)).collect::<Result<_>>()?;
        let perms: Vec<Vec<usize>> = reps.iter().map(|r| r.permutation()).collect();
        let find = |p: &[usize]| perms.iter().position(|q| q == p).expect("all of S3 represented");
        let mut step = Vec::with_capacity(6);
        for rep in &reps {
            let mut row: Vec<(usize, FreeWord)> = Vec::with_capacity(4);
            for (index, positive) in [(1, true), (1, false), (2, true), (2, false)] {
                let mut moved = rep.clone();
                moved.push(BraidLetter::new(index, positive));
                let next = find(&moved.permutation());
                let piece = moved.concat(&reps[next].inverse())?;
                row.push((next, p3_to_f2_by_descent(&piece)?));
            }
            step.push(row.try_into().expect("four slots"));
        }
        Ok(Self { perms, reps, step })
    }

    fn get() -> &'static CosetTable {
        static TABLE: OnceLock<CosetTable> = OnceLock::new();
        TABLE.get_or_init(|| CosetTable::build().expect("coset table is built from short exact words"))
    }
}

/// Image of a pure three-strand braid in `F₂ = ⟨x, y⟩`.
///
/// Linear time and overflow-free: the word is cut into pure pieces of
/// bounded length through the coset table, and each piece's image was found
/// once by [`descend`].
pub fn p3_to_f2(w: &BraidWord) -> Result<FreeWord> {
    require_three(w)?;
    let table = CosetTable::get();
    let mut coset = 0;
    let mut out = FreeWord::identity();
    for &l in w.letters() {
        let (next, piece) = &table.step[coset][slot(l)];
        for &f in piece.letters() {
            out.push(f);
        }
        coset = *next;
    }
    if coset != 0 {
        return Err(Error::NotPure(table.perms[coset].clone()));
    }
    Ok(out)
}

/// Images of `x` and `y` under `g ↦ c g c⁻¹` for each coset representative
/// `c` of `P₃` in `B₃`, taken modulo the centre. Index 0 is the identity.
pub fn coset_conjugations() -> &'static [(FreeWord, FreeWord)] {
    static MAPS: OnceLock<Vec<(FreeWord, FreeWord)>> = OnceLock::new();
    MAPS.get_or_init(|| {
        let x = BraidWord::from_signed(3, &[1, 1]).expect("valid");
        let y = BraidWord::from_signed(3, &[2, 2]).expect("valid");
        CosetTable::get()
            .reps
            .iter()
            .map(|c| {
                let img = |g: &BraidWord| p3_to_f2(&g.conjugate_by(c).expect("same strands")).expect("pure");
                (img(&x), img(&y))
            })
            .collect()
    })
}
