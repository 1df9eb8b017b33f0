//! Reduced words in finitely generated free groups, the graded
//! lexicographic order, the rank/weight/complexity machinery, and the
//! refined Nielsen reduction that never touches entries already equal to a
//! basis letter.

use crate::error::{Error, Result};
use crate::letters::GenSym;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// A freely reduced word over the basis `x1, x2, ...`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeWord {
    letters: Vec<GenSym>,
}

impl FreeWord {
    pub fn identity() -> Self {
        FreeWord { letters: Vec::new() }
    }

    /// Builds a word, freely reducing the given letter sequence.
    pub fn new(letters: Vec<GenSym>) -> Self {
        let mut stack: Vec<GenSym> = Vec::with_capacity(letters.len());
        for l in letters {
            if stack.last().is_some_and(|t| *t == l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        FreeWord { letters: stack }
    }

    pub fn gen(index: u32) -> Self {
        FreeWord { letters: vec![GenSym::pos(index)] }
    }

    pub fn letter(g: GenSym) -> Self {
        FreeWord { letters: vec![g] }
    }

    pub fn letters(&self) -> &[GenSym] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> FreeWord {
        FreeWord { letters: self.letters.iter().rev().map(|l| l.inverse()).collect() }
    }

    pub fn pow_sign(&self, e: i8) -> FreeWord {
        if e >= 0 {
            self.clone()
        } else {
            self.inverse()
        }
    }

    pub fn mul(&self, other: &FreeWord) -> FreeWord {
        let mut ls = self.letters.clone();
        ls.extend(other.letters.iter().copied());
        FreeWord::new(ls)
    }

    pub fn prefix(&self, len: usize) -> FreeWord {
        FreeWord { letters: self.letters[..len.min(self.letters.len())].to_vec() }
    }

    /// Largest generator index occurring (0 for the identity).
    pub fn max_index(&self) -> u32 {
        self.letters.iter().map(|l| l.index).max().unwrap_or(0)
    }

    /// Parse the whitespace-separated text form `x1 x2^-1 x3` (or `1` for the
    /// identity).
    pub fn parse(s: &str) -> Result<FreeWord> {
        let s = s.trim();
        if s.is_empty() || s == "1" {
            return Ok(FreeWord::identity());
        }
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (body, sign) = match tok.strip_suffix("^-1") {
                Some(b) => (b, -1),
                None => (tok, 1),
            };
            let idx: u32 = body
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .ok_or_else(|| Error::InvalidWord(format!("bad generator token `{tok}`")))?;
            letters.push(GenSym::new(idx, sign)?);
        }
        Ok(FreeWord::new(letters))
    }
}

impl fmt::Display for FreeWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for l in &self.letters {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// Position of a signed letter in the generator order
/// `x1^-1 < x1 < x2^-1 < x2 < ...`.
fn letter_key(g: GenSym) -> u64 {
    2 * (g.index as u64 - 1) + u64::from(g.sign > 0)
}

fn check_rank(w: &FreeWord, n: u32) -> Result<()> {
    if let Some(l) = w.letters().iter().find(|l| l.index > n) {
        return Err(Error::Precondition(format!("letter {l} exceeds rank {n}")));
    }
    Ok(())
}

/// The graded lexicographic order: shorter words first; same-length words
/// compared letterwise in the generator order.
pub fn graded_lex_cmp(u: &FreeWord, v: &FreeWord, n: u32) -> Result<Ordering> {
    check_rank(u, n)?;
    check_rank(v, n)?;
    Ok(u.len().cmp(&v.len()).then_with(|| {
        for (a, b) in u.letters().iter().zip(v.letters()) {
            let c = letter_key(*a).cmp(&letter_key(*b));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    }))
}

fn checked_pow(base: u128, exp: usize, what: &str) -> Result<u128> {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base).ok_or_else(|| Error::Overflow(what.into()))?;
    }
    Ok(acc)
}

/// Number of reduced words of length exactly `l` in rank `n`.
fn count_of_length(n: u32, l: usize) -> Result<u128> {
    if l == 0 {
        return Ok(1);
    }
    let n = n as u128;
    (2 * n)
        .checked_mul(checked_pow(2 * n - 1, l - 1, "word count")?)
        .ok_or_else(|| Error::Overflow("word count".into()))
}

/// The rank of `w` in the graded lexicographic order: the number of reduced
/// words `z` with `z <= w` in rank `n`.
pub fn rank_phi(w: &FreeWord, n: u32) -> Result<u128> {
    if n == 0 {
        return Err(Error::Precondition("rank must be positive".into()));
    }
    check_rank(w, n)?;
    let ll = w.len();
    let mut total: u128 = 0;
    for l in 0..ll {
        total = total
            .checked_add(count_of_length(n, l)?)
            .ok_or_else(|| Error::Overflow("rank phi".into()))?;
    }
    // Same-length words preceding w, digit by digit.
    for (i, &wi) in w.letters().iter().enumerate() {
        let tail = checked_pow(2 * n as u128 - 1, ll - 1 - i, "rank phi")?;
        let forbidden = if i > 0 { Some(w.letters()[i - 1].inverse()) } else { None };
        for idx in 1..=n {
            for sign in [-1i8, 1] {
                let c = GenSym { index: idx, sign };
                if Some(c) == forbidden || letter_key(c) >= letter_key(wi) {
                    continue;
                }
                total =
                    total.checked_add(tail).ok_or_else(|| Error::Overflow("rank phi".into()))?;
            }
        }
    }
    total.checked_add(1).ok_or_else(|| Error::Overflow("rank phi".into()))
}

/// The half prefix `L(v)`: the initial segment of length `floor((|v|+1)/2)`.
pub fn half_prefix(v: &FreeWord) -> FreeWord {
    v.prefix((v.len() + 1) / 2)
}

/// The weight `W(v) = phi(L(v)) + phi(L(v^-1))`.
pub fn weight(v: &FreeWord, n: u32) -> Result<u128> {
    Ok(rank_phi(&half_prefix(v), n)?
        .checked_add(rank_phi(&half_prefix(&v.inverse()), n)?)
        .ok_or_else(|| Error::Overflow("weight".into()))?)
}

/// The complexity pair `(|v|, W(v))`, compared lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Complexity {
    pub length: usize,
    pub weight: u128,
    pub ambient_rank: u32,
}

impl Complexity {
    pub fn cmp_lex(&self, other: &Complexity) -> Ordering {
        self.length.cmp(&other.length).then(self.weight.cmp(&other.weight))
    }
}

pub fn complexity(v: &FreeWord, n: u32) -> Result<Complexity> {
    Ok(Complexity { length: v.len(), weight: weight(v, n)?, ambient_rank: n })
}

/// An elementary Nielsen move on a tuple. Entry indices are 1-based.
///
/// `T { i, eps, j, tau }` is the unified form: the new entry satisfies
/// `(u_i')^eps = u_i^eps * u_j^tau`, so `(1,1)` is `R_ij`, `(1,-1)` is
/// `R_ij^-1`, `(-1,-1)` is `L_ij`, and `(-1,1)` is `L_ij^-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NielsenMove {
    T { i: usize, eps: i8, j: usize, tau: i8 },
    /// Invert entry `i`.
    I { i: usize },
    /// Delete entry `i`, which must be the empty word.
    D { i: usize },
}

impl NielsenMove {
    pub fn r(i: usize, j: usize) -> Self {
        NielsenMove::T { i, eps: 1, j, tau: 1 }
    }

    pub fn l(i: usize, j: usize) -> Self {
        NielsenMove::T { i, eps: -1, j, tau: -1 }
    }

    /// The inverse move (not defined for deletions).
    pub fn inverse(&self) -> Result<NielsenMove> {
        Ok(match self {
            NielsenMove::T { i, eps, j, tau } => {
                NielsenMove::T { i: *i, eps: *eps, j: *j, tau: -tau }
            }
            NielsenMove::I { i } => NielsenMove::I { i: *i },
            NielsenMove::D { .. } => {
                return Err(Error::NotInvertible("deletion move".into()))
            }
        })
    }
}

impl fmt::Display for NielsenMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NielsenMove::T { i, eps, j, tau } => {
                let name = match (eps, tau) {
                    (1, 1) => format!("R{i}{j}"),
                    (1, -1) => format!("R{i}{j}^-1"),
                    (-1, -1) => format!("L{i}{j}"),
                    (-1, 1) => format!("L{i}{j}^-1"),
                    _ => "?".into(),
                };
                write!(f, "T_{{{i}^{eps} {j}^{tau}}} ({name})")
            }
            NielsenMove::I { i } => write!(f, "I{i}"),
            NielsenMove::D { i } => write!(f, "D{i}"),
        }
    }
}

/// An ordered tuple of free words.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tuple(pub Vec<FreeWord>);

impl Tuple {
    pub fn entries(&self) -> &[FreeWord] {
        &self.0
    }

    /// Smallest rank containing every generator occurring in the tuple
    /// (at least 1).
    pub fn ambient_rank(&self) -> u32 {
        self.0.iter().map(|w| w.max_index()).max().unwrap_or(0).max(1)
    }
}

impl fmt::Display for Tuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, w) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{w}")?;
        }
        write!(f, "]")
    }
}

/// Apply one Nielsen move (1-based indices).
pub fn apply_move(t: &Tuple, m: &NielsenMove) -> Result<Tuple> {
    let mut entries = t.0.clone();
    let check = |i: usize| -> Result<usize> {
        if i == 0 || i > entries.len() {
            Err(Error::Precondition(format!("entry index {i} out of range")))
        } else {
            Ok(i - 1)
        }
    };
    match m {
        NielsenMove::T { i, eps, j, tau } => {
            let i = check(*i)?;
            let j = check(*j)?;
            if i == j {
                return Err(Error::Precondition("move requires i != j".into()));
            }
            let prod = entries[i].pow_sign(*eps).mul(&entries[j].pow_sign(*tau));
            entries[i] = prod.pow_sign(*eps);
        }
        NielsenMove::I { i } => {
            let i = check(*i)?;
            entries[i] = entries[i].inverse();
        }
        NielsenMove::D { i } => {
            let i = check(*i)?;
            if !entries[i].is_empty() {
                return Err(Error::Precondition("deletion applies only to an empty entry".into()));
            }
            entries.remove(i);
        }
    }
    Ok(Tuple(entries))
}

fn signed_entries(t: &Tuple) -> Vec<(usize, i8, FreeWord)> {
    let mut out = Vec::with_capacity(2 * t.0.len());
    for (i, w) in t.0.iter().enumerate() {
        out.push((i + 1, 1, w.clone()));
        out.push((i + 1, -1, w.inverse()));
    }
    out
}

/// Check the three Nielsen-reducedness conditions by exhaustive scan over
/// entries and their inverses.
pub fn is_nielsen_reduced(t: &Tuple) -> bool {
    if t.0.iter().any(|w| w.is_empty()) {
        return false;
    }
    let vs = signed_entries(t);
    for (_, _, v1) in &vs {
        for (_, _, v2) in &vs {
            let v12 = v1.mul(v2);
            if v12.is_empty() {
                continue;
            }
            if v12.len() < v1.len() || v12.len() < v2.len() {
                return false;
            }
            for (_, _, v3) in &vs {
                let v23 = v2.mul(v3);
                if v23.is_empty() {
                    continue;
                }
                let v123 = v12.mul(v3);
                if (v123.len() as i64) <= v1.len() as i64 - v2.len() as i64 + v3.len() as i64 {
                    return false;
                }
            }
        }
    }
    true
}

/// Length of the cancellation between `u` and `v` in the product `u v`.
fn cancellation(u: &FreeWord, v: &FreeWord) -> usize {
    let mut c = 0;
    let ul = u.letters();
    let vl = v.letters();
    while c < ul.len() && c < vl.len() && ul[ul.len() - 1 - c] == vl[c].inverse() {
        c += 1;
    }
    c
}

/// One step of the refined Nielsen reduction. Returns the chosen move, the
/// new tuple, and the ambient rank at which the complexity conditions were
/// certified. The move `T_{i^e j^t}` always satisfies: the modified entry's
/// complexity strictly drops, and the helper entry `j` has strictly smaller
/// complexity than the old entry `i`.
pub fn refined_step(t: &Tuple) -> Result<(NielsenMove, Tuple, u32)> {
    if t.0.iter().any(|w| w.is_empty()) {
        return Err(Error::Precondition("refined step requires nonempty entries".into()));
    }
    let n = t.ambient_rank();
    let vs = signed_entries(t);

    // Case a: a violation of condition (N2), normalized so that the product
    // is shorter than the *first* factor.
    for (i, eps, v1) in &vs {
        for (j, tau, v2) in &vs {
            if i == j {
                continue;
            }
            let v12 = v1.mul(v2);
            if v12.is_empty() || v12.len() >= v1.len() {
                continue;
            }
            let move_ = choose_case_a(t, n, (*i, *eps, v1), (*j, *tau, v2))?;
            return finish_step(t, n, move_);
        }
    }

    // Case b: (N2) holds, (N3) fails for some triple.
    for (kw, s1, v1) in &vs {
        for (iw, s2, v2) in &vs {
            let v12 = v1.mul(v2);
            if v12.is_empty() {
                continue;
            }
            for (jw, s3, v3) in &vs {
                let v23 = v2.mul(v3);
                if v23.is_empty() {
                    continue;
                }
                let v123 = v12.mul(v3);
                if (v123.len() as i64) > v1.len() as i64 - v2.len() as i64 + v3.len() as i64 {
                    continue;
                }
                let move_ =
                    choose_case_b(t, n, (*kw, *s1, v1), (*iw, *s2, v2), (*jw, *s3, v3))?;
                return finish_step(t, n, move_);
            }
        }
    }

    Err(Error::Precondition("tuple is already Nielsen reduced".into()))
}

/// Case a of the theorem: `|v1 v2| < |v1|`, with `v1 = u_i^eps`,
/// `v2 = u_j^tau`.
fn choose_case_a(
    t: &Tuple,
    n: u32,
    (i, eps, _v1): (usize, i8, &FreeWord),
    (j, tau, _v2): (usize, i8, &FreeWord),
) -> Result<NielsenMove> {
    let ui = &t.0[i - 1];
    let uj = &t.0[j - 1];
    if uj.len() < ui.len() {
        // R-form on the normalized pair: modify entry i.
        Ok(NielsenMove::T { i, eps, j, tau })
    } else if ui.len() < uj.len() {
        // L-form: modify entry j, multiplying from the matching side.
        Ok(NielsenMove::T { i: j, eps: -tau, j: i, tau: -eps })
    } else {
        // Equal lengths: the w-lemma guarantees distinct weights; pick the
        // direction that makes the helper entry lighter.
        let wi = weight(ui, n)?;
        let wj = weight(uj, n)?;
        match wj.cmp(&wi) {
            Ordering::Less => Ok(NielsenMove::T { i, eps, j, tau }),
            Ordering::Greater => Ok(NielsenMove::T { i: j, eps: -tau, j: i, tau: -eps }),
            Ordering::Equal => Err(Error::Defect(
                "equal weights on an N2-violating pair of equal lengths".into(),
            )),
        }
    }
}

/// Case b of the theorem: `(N3)` fails for `(v1, v2, v3)`; `v2 = u_{iw}^{s2}`,
/// `v3 = u_{jw}^{s3}`.
fn choose_case_b(
    t: &Tuple,
    n: u32,
    (kw, s1, v1): (usize, i8, &FreeWord),
    (iw, s2, v2): (usize, i8, &FreeWord),
    (jw, s3, v3): (usize, i8, &FreeWord),
) -> Result<NielsenMove> {
    // Maximal initial segment p of v2 canceling in v1 v2; maximal terminal
    // segment q^-1 of v2 canceling in v2 v3.
    let p = v2.prefix(cancellation(v1, v2));
    let q = v3.prefix(cancellation(v2, v3));
    if v2.len() % 2 != 0 || p.len() != v2.len() / 2 || q.len() != v2.len() / 2 {
        return Err(Error::Defect(
            "N3 violation without a clean half/half cancellation split".into(),
        ));
    }
    let phi_p = rank_phi(&p, n)?;
    let phi_q = rank_phi(&q, n)?;
    match phi_p.cmp(&phi_q) {
        Ordering::Less => {
            // Case 1. Normalized entries: v2 plays u_i, v3 plays u_j.
            if iw == jw {
                return Err(Error::Defect("case b pair collapsed to one entry".into()));
            }
            let ui_len = v2.len();
            let uj_len = v3.len();
            if ui_len < uj_len {
                // Case 1.1: L-form, modify v3's entry.
                Ok(NielsenMove::T { i: jw, eps: -s3, j: iw, tau: -s2 })
            } else if ui_len == uj_len {
                let w_i = weight(v2, n)?;
                let w_j = weight(v3, n)?;
                match w_j.cmp(&w_i) {
                    // Case 1.2.1: R-form, modify v2's entry.
                    Ordering::Less => Ok(NielsenMove::T { i: iw, eps: s2, j: jw, tau: s3 }),
                    // Case 1.2.2: L-form, modify v3's entry.
                    Ordering::Greater => {
                        Ok(NielsenMove::T { i: jw, eps: -s3, j: iw, tau: -s2 })
                    }
                    Ordering::Equal => Err(Error::Defect(
                        "equal weights in case b despite the p = d^-1 exclusion".into(),
                    )),
                }
            } else {
                Err(Error::Defect("case b with |u_j| < |u_i| despite (N2)".into()))
            }
        }
        Ordering::Greater => {
            // Case 2: rerun on the mirrored triple (v3^-1, v2^-1, v1^-1).
            choose_case_b(
                t,
                n,
                (jw, -s3, &v3.inverse()),
                (iw, -s2, &v2.inverse()),
                (kw, -s1, &v1.inverse()),
            )
        }
        Ordering::Equal => Err(Error::Defect("phi(p) == phi(q) forces p == q".into())),
    }
}

fn finish_step(t: &Tuple, n: u32, m: NielsenMove) -> Result<(NielsenMove, Tuple, u32)> {
    let out = apply_move(t, &m)?;
    // Certify both theorem conditions before handing the move back.
    let (i, j) = match m {
        NielsenMove::T { i, j, .. } => (i, j),
        _ => return Err(Error::Defect("refined step produced a non-T move".into())),
    };
    let ci_new = complexity(&out.0[i - 1], n)?;
    let ci_old = complexity(&t.0[i - 1], n)?;
    let cj = complexity(&t.0[j - 1], n)?;
    if ci_new.cmp_lex(&ci_old) != Ordering::Less || cj.cmp_lex(&ci_old) != Ordering::Less {
        return Err(Error::Defect(format!(
            "move {m} fails the complexity conditions at rank {n}"
        )));
    }
    Ok((m, out, n))
}

/// Iterate `refined_step` to a Nielsen reduced tuple, recording the moves.
/// Entries that are single basis letters are never modified (their
/// complexity cannot drop), which the loop re-checks as it goes.
pub fn nielsen_reduce(t: &Tuple, budget: u64) -> Result<(Tuple, Vec<NielsenMove>)> {
    let mut cur = t.clone();
    let mut moves = Vec::new();
    for _ in 0..budget {
        if let Some(i) = cur.0.iter().position(|w| w.is_empty()) {
            let m = NielsenMove::D { i: i + 1 };
            cur = apply_move(&cur, &m)?;
            moves.push(m);
            continue;
        }
        if is_nielsen_reduced(&cur) {
            return Ok((cur, moves));
        }
        let (m, next, _) = refined_step(&cur)?;
        for (old, new) in cur.0.iter().zip(next.0.iter()) {
            if old.len() == 1 && old != new {
                return Err(Error::Defect("a single-letter entry was modified".into()));
            }
        }
        moves.push(m);
        cur = next;
    }
    Err(Error::BudgetExhausted { budget, during: "nielsen reduction".into() })
}

/// Oracle for the lemma: under hypotheses `|u'| = |u|`,
/// `C(u') < C(u)`, `C(v) < C(u)` (with `u' = (u^eps v^tau)^eps`), the half
/// prefixes satisfy `L(u') <= L(u)` and `L(u'^-1) <= L(u^-1)`.
/// Returns an error if the hypotheses fail.
pub fn lemma_hard2_check(u: &FreeWord, v: &FreeWord, eps: i8, tau: i8, n: u32) -> Result<bool> {
    let u_new = u.pow_sign(eps).mul(&v.pow_sign(tau)).pow_sign(eps);
    if u_new.len() != u.len() {
        return Err(Error::Precondition("hypothesis |u'| = |u| fails".into()));
    }
    hard_hypotheses(u, v, &u_new, n)?;
    let a = graded_lex_cmp(&half_prefix(&u_new), &half_prefix(u), n)? != Ordering::Greater;
    let b = graded_lex_cmp(&half_prefix(&u_new.inverse()), &half_prefix(&u.inverse()), n)?
        != Ordering::Greater;
    Ok(a && b)
}

/// Oracle for the companion lemma: under hypotheses `|u| = |v|`,
/// `C(u') < C(u)`, `C(v) < C(u)`, one has `L(v^tau) = L(u^-eps)` and
/// `L(v^-tau) < L(u^eps)`.
pub fn lemma_hard_check(u: &FreeWord, v: &FreeWord, eps: i8, tau: i8, n: u32) -> Result<bool> {
    if u.len() != v.len() {
        return Err(Error::Precondition("hypothesis |u| = |v| fails".into()));
    }
    let u_new = u.pow_sign(eps).mul(&v.pow_sign(tau)).pow_sign(eps);
    hard_hypotheses(u, v, &u_new, n)?;
    let eq = half_prefix(&v.pow_sign(tau)) == half_prefix(&u.pow_sign(-eps));
    let lt = graded_lex_cmp(&half_prefix(&v.pow_sign(-tau)), &half_prefix(&u.pow_sign(eps)), n)?
        == Ordering::Less;
    Ok(eq && lt)
}

fn hard_hypotheses(u: &FreeWord, v: &FreeWord, u_new: &FreeWord, n: u32) -> Result<()> {
    if complexity(u_new, n)?.cmp_lex(&complexity(u, n)?) != Ordering::Less {
        return Err(Error::Precondition("hypothesis C(u') < C(u) fails".into()));
    }
    if complexity(v, n)?.cmp_lex(&complexity(u, n)?) != Ordering::Less {
        return Err(Error::Precondition("hypothesis C(v) < C(u) fails".into()));
    }
    Ok(())
}
