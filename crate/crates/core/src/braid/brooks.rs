//! Brooks counting quasi-morphisms on `F₂` and their pullbacks to `P₃`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::free::{FreeLetter, FreeWord};
use super::sl2::{coset_conjugations, p3_to_f2};
use super::BraidWord;

/// Counting quasi-morphism for a fixed pattern `w`: occurrences of `w` minus
/// occurrences of `w⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "FreeWord", into = "FreeWord")]
pub struct BrooksQm {
    pattern: FreeWord,
}

impl BrooksQm {
    pub fn new(pattern: FreeWord) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::InvalidArgument("Brooks pattern must be non-trivial".into()));
        }
        if !pattern.is_cyclically_reduced() {
            return Err(Error::InvalidArgument(format!("Brooks pattern {pattern} is not cyclically reduced")));
        }
        Ok(Self { pattern })
    }

    pub fn pattern(&self) -> &FreeWord {
        &self.pattern
    }

    /// Overlapping occurrences in `g` of the pattern minus those of its inverse.
    pub fn count(&self, g: &FreeWord) -> i64 {
        let inv = self.pattern.inverse();
        occurrences(g.letters(), self.pattern.letters()) - occurrences(g.letters(), inv.letters())
    }

    /// Homogenization of [`count`](Self::count), computed exactly from the
    /// periodic word of the cyclic reduction.
    pub fn hom(&self, g: &FreeWord) -> i64 {
        let c = g.cyclically_reduced();
        let inv = self.pattern.inverse();
        periodic_occurrences(c.letters(), self.pattern.letters())
            - periodic_occurrences(c.letters(), inv.letters())
    }

    /// `hom ∘ p3_to_f2`, the plain pullback to `P₃`.
    ///
    /// This is invariant under conjugation in `P₃` only; for most patterns
    /// it does not vanish on the `B₃`-conjugates of `η₂,₃`, `η₃,₃`.
    pub fn pure_value(&self, w: &BraidWord) -> Result<i64> {
        Ok(self.hom(&p3_to_f2(w)?))
    }

    /// Sum of [`hom`](Self::hom) over the six coset conjugates of `g`,
    /// a homogeneous quasi-morphism on `P₃` invariant under conjugation in `B₃`.
    pub fn symmetrized(&self, g: &FreeWord) -> i64 {
        coset_conjugations().iter().map(|images| self.hom(&g.substitute(images))).sum()
    }

    /// Value of [`symmetrized`](Self::symmetrized) on `x = σ₁²`. It vanishes
    /// on the whole group generated by `η₂,₃`, `η₃,₃` iff this is zero.
    pub fn value_on_eta(&self) -> i64 {
        self.symmetrized(&FreeWord::from_letters([FreeLetter::X]))
    }

    pub fn is_admissible(&self) -> bool {
        self.pattern.contains_x() && self.pattern.contains_y() && self.value_on_eta() == 0
    }

    pub fn check_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::InadmissiblePattern { pattern: self.pattern.to_string(), value: self.value_on_eta() })
        }
    }

    /// The braid quasi-morphism: [`symmetrized`](Self::symmetrized) after
    /// projecting to `F₂`. Requires an admissible pattern.
    pub fn on_braid(&self, w: &BraidWord) -> Result<i64> {
        self.check_admissible()?;
        Ok(self.symmetrized(&p3_to_f2(w)?))
    }
}

impl TryFrom<FreeWord> for BrooksQm {
    type Error = Error;

    fn try_from(w: FreeWord) -> Result<Self> {
        BrooksQm::new(w)
    }
}

impl From<BrooksQm> for FreeWord {
    fn from(q: BrooksQm) -> FreeWord {
        q.pattern
    }
}

impl fmt::Display for BrooksQm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Brooks({})", self.pattern)
    }
}

fn occurrences(hay: &[FreeLetter], needle: &[FreeLetter]) -> i64 {
    if needle.len() > hay.len() {
        return 0;
    }
    hay.windows(needle.len()).filter(|w| *w == needle).count() as i64
}

fn periodic_occurrences(period: &[FreeLetter], needle: &[FreeLetter]) -> i64 {
    let n = period.len();
    if n == 0 {
        return 0;
    }
    (0..n)
        .filter(|&start| needle.iter().enumerate().all(|(k, l)| period[(start + k) % n] == *l))
        .count() as i64
}

/// See [`BrooksQm::on_braid`].
pub fn qm_on_braid(q: &BrooksQm, w: &BraidWord) -> Result<i64> {
    q.on_braid(w)
}

pub fn brooks_count(q: &BrooksQm, g: &FreeWord) -> i64 {
    q.count(g)
}

pub fn brooks_hom(q: &BrooksQm, g: &FreeWord) -> i64 {
    q.hom(g)
}

/// A real linear combination `Σ cᵢ·qᵢ` of braid quasi-morphisms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QmCombination {
    pub terms: Vec<(f64, BrooksQm)>,
}

impl QmCombination {
    pub fn single(q: BrooksQm) -> Self {
        Self { terms: vec![(1.0, q)] }
    }

    pub fn check_admissible(&self) -> Result<()> {
        self.terms.iter().try_for_each(|(_, q)| q.check_admissible())
    }

    /// Value on a pure braid from the projected free word.
    pub fn on_free(&self, g: &FreeWord) -> f64 {
        self.terms.iter().map(|(c, q)| c * q.symmetrized(g) as f64).sum()
    }

    pub fn on_braid(&self, w: &BraidWord) -> Result<f64> {
        self.check_admissible()?;
        Ok(self.on_free(&p3_to_f2(w)?))
    }
}
