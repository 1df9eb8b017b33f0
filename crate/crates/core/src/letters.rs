//! Alphabet letters and affine letter templates.
//!
//! Two involutive alphabets are supported:
//! * transposition letters `T(a,b)` (an unordered swap of the integer points
//!   `a` and `b`, with `T(a,b)^-1 = T(b,a)` as formal letters), and
//! * Nielsen letters `E(head, tail)` acting on a free group of countable rank
//!   by `head -> head * tail`, with `E(h,t)^-1 = E(h, t^-1)`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt;

/// A signed generator symbol `x_index^sign` of the free group, `index >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GenSym {
    pub index: u32,
    /// +1 or -1.
    pub sign: i8,
}

impl GenSym {
    pub fn new(index: u32, sign: i8) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidLetter("generator index must be >= 1".into()));
        }
        if sign != 1 && sign != -1 {
            return Err(Error::InvalidLetter("generator sign must be +1 or -1".into()));
        }
        Ok(GenSym { index, sign })
    }

    pub fn pos(index: u32) -> Self {
        GenSym { index, sign: 1 }
    }

    pub fn neg(index: u32) -> Self {
        GenSym { index, sign: -1 }
    }

    pub fn inverse(self) -> Self {
        GenSym { index: self.index, sign: -self.sign }
    }
}

impl fmt::Display for GenSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign >= 0 {
            write!(f, "x{}", self.index)
        } else {
            write!(f, "x{}^-1", self.index)
        }
    }
}

/// A transposition letter over integer points; `a != b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TranspositionLetter {
    pub a: i64,
    pub b: i64,
}

impl TranspositionLetter {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a == b {
            return Err(Error::InvalidLetter(format!("T({a},{b}): points must differ")));
        }
        Ok(TranspositionLetter { a, b })
    }

    pub fn inverse(self) -> Self {
        TranspositionLetter { a: self.b, b: self.a }
    }

    /// The unordered point pair, smaller first.
    pub fn points(self) -> (i64, i64) {
        if self.a <= self.b {
            (self.a, self.b)
        } else {
            (self.b, self.a)
        }
    }

    pub fn touches(self, x: i64) -> bool {
        self.a == x || self.b == x
    }

    /// The image of `x` under the swap (identity off `{a,b}`).
    pub fn apply(self, x: i64) -> i64 {
        if x == self.a {
            self.b
        } else if x == self.b {
            self.a
        } else {
            x
        }
    }
}

impl fmt::Display for TranspositionLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "T({},{})", self.a, self.b)
    }
}

/// A Nielsen letter `E(head, tail)`: the automorphism sending the signed
/// letter `head` to `head * tail` (and fixing every generator other than
/// `head`'s). Requires `tail.index != head.index`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NielsenLetter {
    pub head: GenSym,
    pub tail: GenSym,
}

impl NielsenLetter {
    pub fn new(head: GenSym, tail: GenSym) -> Result<Self> {
        if head.index == tail.index {
            return Err(Error::InvalidLetter(format!(
                "E({head},{tail}): tail must use a different generator than head"
            )));
        }
        Ok(NielsenLetter { head, tail })
    }

    pub fn inverse(self) -> Self {
        NielsenLetter { head: self.head, tail: self.tail.inverse() }
    }
}

impl fmt::Display for NielsenLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E({},{})", self.head, self.tail)
    }
}

/// Which alphabet a word is written over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Alphabet {
    Transposition,
    Nielsen,
}

/// A concrete letter of either alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    T(TranspositionLetter),
    E(NielsenLetter),
}

impl Letter {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            Letter::T(_) => Alphabet::Transposition,
            Letter::E(_) => Alphabet::Nielsen,
        }
    }

    pub fn inverse(&self) -> Letter {
        match self {
            Letter::T(t) => Letter::T(t.inverse()),
            Letter::E(e) => Letter::E(e.inverse()),
        }
    }

    pub fn as_t(&self) -> Option<TranspositionLetter> {
        match self {
            Letter::T(t) => Some(*t),
            _ => None,
        }
    }

    pub fn as_e(&self) -> Option<NielsenLetter> {
        match self {
            Letter::E(e) => Some(*e),
            _ => None,
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Letter::T(t) => t.fmt(f),
            Letter::E(e) => e.fmt(f),
        }
    }
}

/// The affine map `n -> coeff*n + offset` used in pattern letter templates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineMap {
    pub coeff: i64,
    pub offset: i64,
}

impl AffineMap {
    pub fn new(coeff: i64, offset: i64) -> Self {
        AffineMap { coeff, offset }
    }

    pub fn constant(offset: i64) -> Self {
        AffineMap { coeff: 0, offset }
    }

    pub fn eval(self, n: i64) -> i64 {
        self.coeff * n + self.offset
    }

    pub fn is_constant(self) -> bool {
        self.coeff == 0
    }

    /// Solutions of `self(n) == v`.
    pub fn solve(self, v: i64) -> SolveSet {
        if self.coeff == 0 {
            if self.offset == v {
                SolveSet::All
            } else {
                SolveSet::None
            }
        } else if (v - self.offset) % self.coeff == 0 {
            SolveSet::One((v - self.offset) / self.coeff)
        } else {
            SolveSet::None
        }
    }

    /// Substitute `n -> inner(n)`.
    pub fn compose(self, inner: AffineMap) -> AffineMap {
        AffineMap { coeff: self.coeff * inner.coeff, offset: self.coeff * inner.offset + self.offset }
    }

    /// Substitute `n -> n + shift`.
    pub fn shifted(self, shift: i64) -> AffineMap {
        AffineMap { coeff: self.coeff, offset: self.offset + self.coeff * shift }
    }

    /// Substitute `n -> -n`.
    pub fn negated_var(self) -> AffineMap {
        AffineMap { coeff: -self.coeff, offset: self.offset }
    }
}

impl fmt::Display for AffineMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.coeff, self.offset) {
            (0, b) => write!(f, "{b}"),
            (1, 0) => write!(f, "n"),
            (1, b) if b > 0 => write!(f, "n+{b}"),
            (1, b) => write!(f, "n{b}"),
            (-1, 0) => write!(f, "-n"),
            (-1, b) if b > 0 => write!(f, "-n+{b}"),
            (-1, b) => write!(f, "-n{b}"),
            (a, 0) => write!(f, "{a}*n"),
            (a, b) if b > 0 => write!(f, "{a}*n+{b}"),
            (a, b) => write!(f, "{a}*n{b}"),
        }
    }
}

/// Solution set of an affine equation over the pattern variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveSet {
    None,
    One(i64),
    All,
}

/// A signed-generator template: index varies affinely, sign is fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymTemplate {
    pub index: AffineMap,
    pub sign: i8,
}

impl SymTemplate {
    pub fn eval(self, n: i64) -> Result<GenSym> {
        let idx = self.index.eval(n);
        if idx < 1 {
            return Err(Error::InvalidLetter(format!(
                "generator index map {} evaluates to {idx} at n={n}",
                self.index
            )));
        }
        GenSym::new(idx as u32, self.sign)
    }
}

impl fmt::Display for SymTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sign >= 0 {
            write!(f, "x[{}]", self.index)
        } else {
            write!(f, "x[{}]^-1", self.index)
        }
    }
}

/// One letter of a pattern block, with affine subscripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LetterTemplate {
    T { a: AffineMap, b: AffineMap },
    E { head: SymTemplate, tail: SymTemplate },
}

impl LetterTemplate {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            LetterTemplate::T { .. } => Alphabet::Transposition,
            LetterTemplate::E { .. } => Alphabet::Nielsen,
        }
    }

    /// A template letter must actually vary with `n`: a constant template
    /// would repeat one concrete letter at every domain point, violating the
    /// finite-occurrence requirement on infinitary words.
    pub fn is_constant(&self) -> bool {
        match self {
            LetterTemplate::T { a, b } => a.is_constant() && b.is_constant(),
            LetterTemplate::E { head, tail } => head.index.is_constant() && tail.index.is_constant(),
        }
    }

    pub fn instantiate(&self, n: i64) -> Result<Letter> {
        match self {
            LetterTemplate::T { a, b } => {
                Ok(Letter::T(TranspositionLetter::new(a.eval(n), b.eval(n))?))
            }
            LetterTemplate::E { head, tail } => {
                Ok(Letter::E(NielsenLetter::new(head.eval(n)?, tail.eval(n)?)?))
            }
        }
    }

    pub fn inverse(&self) -> LetterTemplate {
        match self {
            LetterTemplate::T { a, b } => LetterTemplate::T { a: *b, b: *a },
            LetterTemplate::E { head, tail } => LetterTemplate::E {
                head: *head,
                tail: SymTemplate { index: tail.index, sign: -tail.sign },
            },
        }
    }

    /// Substitute `n -> n + shift` in all subscripts.
    pub fn shifted(&self, shift: i64) -> LetterTemplate {
        match self {
            LetterTemplate::T { a, b } => {
                LetterTemplate::T { a: a.shifted(shift), b: b.shifted(shift) }
            }
            LetterTemplate::E { head, tail } => LetterTemplate::E {
                head: SymTemplate { index: head.index.shifted(shift), sign: head.sign },
                tail: SymTemplate { index: tail.index.shifted(shift), sign: tail.sign },
            },
        }
    }

    /// Substitute `n -> -n` in all subscripts.
    pub fn negated_var(&self) -> LetterTemplate {
        match self {
            LetterTemplate::T { a, b } => {
                LetterTemplate::T { a: a.negated_var(), b: b.negated_var() }
            }
            LetterTemplate::E { head, tail } => LetterTemplate::E {
                head: SymTemplate { index: head.index.negated_var(), sign: head.sign },
                tail: SymTemplate { index: tail.index.negated_var(), sign: tail.sign },
            },
        }
    }
}

impl fmt::Display for LetterTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LetterTemplate::T { a, b } => write!(f, "T({a},{b})"),
            LetterTemplate::E { head, tail } => write!(f, "E({head},{tail})"),
        }
    }
}
