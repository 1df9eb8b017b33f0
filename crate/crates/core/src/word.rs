//! Infinitary words: totally ordered (possibly infinite) sequences of letters
//! in which every concrete letter occurs only finitely often.
//!
//! A word is a finite concatenation of segments; each segment is either an
//! explicit finite run of letters or an affine pattern block repeated over a
//! domain of order type omega (ascending), omega* (descending, no first
//! element), or zeta (bi-infinite).

use crate::error::{Error, Result};
use crate::letters::{Alphabet, Letter, LetterTemplate, SolveSet};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

/// How many letters a single pattern-splitting operation may materialize.
pub const MAX_MATERIALIZE: usize = 100_000;

/// Index domain of a pattern segment. In all cases the parameter `n` ranges in
/// ascending numeric order over the listed set; the *position* order differs:
/// omega reads blocks left-to-right with `n` ascending, omega* reads them with
/// `n` descending (so the segment has no first position), zeta is bi-infinite
/// with `n` ascending left-to-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// `n >= start`, positions ascend with `n`.
    Omega { start: i64 },
    /// `n >= start`, positions ascend as `n` *descends*; the rightmost block
    /// is `n = start`.
    OmegaStar { start: i64 },
    /// `n` over all integers, positions ascend with `n`.
    Zeta,
}

impl Domain {
    pub fn contains(self, n: i64) -> bool {
        match self {
            Domain::Omega { start } | Domain::OmegaStar { start } => n >= start,
            Domain::Zeta => true,
        }
    }

    /// Sort key of the block parameter inside the segment (ascending in
    /// position order).
    pub fn key(self, n: i64) -> i64 {
        match self {
            Domain::Omega { .. } | Domain::Zeta => n,
            Domain::OmegaStar { .. } => -n,
        }
    }

    /// Inverse of `key`.
    pub fn n_of_key(self, key: i64) -> i64 {
        match self {
            Domain::Omega { .. } | Domain::Zeta => key,
            Domain::OmegaStar { .. } => -key,
        }
    }
}

/// One segment of a word.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Segment {
    Explicit(Vec<Letter>),
    Pattern { domain: Domain, block: Vec<LetterTemplate> },
}

/// A position inside a word: segment number plus either an explicit offset or
/// a (block parameter, letter-in-block) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Position {
    pub segment: usize,
    pub inner: SegPos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SegPos {
    At(usize),
    Block { n: i64, k: usize },
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.inner {
            SegPos::At(i) => write!(f, "s{}:{}", self.segment, i),
            SegPos::Block { n, k } => write!(f, "s{}:n={},k={}", self.segment, n, k),
        }
    }
}

/// A word over one of the two involutive alphabets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TransfiniteWord {
    alphabet: Option<Alphabet>,
    segments: Vec<Segment>,
}

impl TransfiniteWord {
    pub fn empty() -> Self {
        TransfiniteWord { alphabet: None, segments: Vec::new() }
    }

    pub fn from_letters(letters: Vec<Letter>) -> Result<Self> {
        Self::from_segments(vec![Segment::Explicit(letters)])
    }

    pub fn from_segments(segments: Vec<Segment>) -> Result<Self> {
        let mut alphabet: Option<Alphabet> = None;
        for seg in &segments {
            let seg_alpha = validate_segment(seg)?;
            match (alphabet, seg_alpha) {
                (None, a) => alphabet = a,
                (Some(_), None) => {}
                (Some(a), Some(b)) if a == b => {}
                (Some(a), Some(b)) => {
                    return Err(Error::MixedAlphabets(format!(
                        "segment alphabet {b:?} conflicts with {a:?}"
                    )))
                }
            }
        }
        let mut w = TransfiniteWord { alphabet, segments };
        w.normalize();
        Ok(w)
    }

    pub fn alphabet(&self) -> Option<Alphabet> {
        self.alphabet
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.segments.iter().all(|s| matches!(s, Segment::Explicit(_)))
    }

    /// The letters of a finite word, or `None` if any pattern segment remains.
    pub fn as_finite(&self) -> Option<Vec<Letter>> {
        let mut out = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Explicit(ls) => out.extend_from_slice(ls),
                Segment::Pattern { .. } => return None,
            }
        }
        Some(out)
    }

    /// Merge adjacent explicit segments, drop empty ones, and shift omega /
    /// omega* pattern domains to start at 0 so that structurally equal words
    /// compare equal.
    fn normalize(&mut self) {
        let mut out: Vec<Segment> = Vec::new();
        for seg in self.segments.drain(..) {
            let seg = match seg {
                Segment::Explicit(ls) if ls.is_empty() => continue,
                Segment::Pattern { domain: Domain::Omega { start }, block } if start != 0 => {
                    Segment::Pattern {
                        domain: Domain::Omega { start: 0 },
                        block: block.iter().map(|t| t.shifted(start)).collect(),
                    }
                }
                Segment::Pattern { domain: Domain::OmegaStar { start }, block } if start != 0 => {
                    Segment::Pattern {
                        domain: Domain::OmegaStar { start: 0 },
                        block: block.iter().map(|t| t.shifted(start)).collect(),
                    }
                }
                other => other,
            };
            match (out.last_mut(), seg) {
                (Some(Segment::Explicit(prev)), Segment::Explicit(ls)) => prev.extend(ls),
                (_, seg) => out.push(seg),
            }
        }
        self.segments = out;
        if self.segments.is_empty() {
            self.alphabet = None;
        }
    }

    pub fn concat(&self, other: &TransfiniteWord) -> Result<TransfiniteWord> {
        match (self.alphabet, other.alphabet) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::MixedAlphabets(format!("cannot concatenate {a:?} and {b:?}")))
            }
            _ => {}
        }
        let mut segments = self.segments.clone();
        segments.extend(other.segments.iter().cloned());
        TransfiniteWord::from_segments(segments)
    }

    /// The inverse word: reversed position order, letters inverted.
    pub fn invert(&self) -> TransfiniteWord {
        let mut segments = Vec::with_capacity(self.segments.len());
        for seg in self.segments.iter().rev() {
            segments.push(match seg {
                Segment::Explicit(ls) => {
                    Segment::Explicit(ls.iter().rev().map(|l| l.inverse()).collect())
                }
                Segment::Pattern { domain, block } => {
                    let inv_block =
                        |b: &Vec<LetterTemplate>| b.iter().rev().map(|t| t.inverse()).collect();
                    match domain {
                        Domain::Omega { start } => Segment::Pattern {
                            domain: Domain::OmegaStar { start: *start },
                            block: inv_block(block),
                        },
                        Domain::OmegaStar { start } => Segment::Pattern {
                            domain: Domain::Omega { start: *start },
                            block: inv_block(block),
                        },
                        Domain::Zeta => Segment::Pattern {
                            domain: Domain::Zeta,
                            block: block
                                .iter()
                                .rev()
                                .map(|t| t.inverse().negated_var())
                                .collect(),
                        },
                    }
                }
            });
        }
        let mut w = TransfiniteWord { alphabet: self.alphabet, segments };
        w.normalize();
        w
    }

    pub fn letter_at(&self, p: &Position) -> Result<Letter> {
        let seg = self
            .segments
            .get(p.segment)
            .ok_or_else(|| Error::NoSuchPosition(p.to_string()))?;
        match (seg, p.inner) {
            (Segment::Explicit(ls), SegPos::At(i)) => {
                ls.get(i).copied().ok_or_else(|| Error::NoSuchPosition(p.to_string()))
            }
            (Segment::Pattern { domain, block }, SegPos::Block { n, k }) => {
                if !domain.contains(n) || k >= block.len() {
                    return Err(Error::NoSuchPosition(p.to_string()));
                }
                block[k].instantiate(n)
            }
            _ => Err(Error::NoSuchPosition(p.to_string())),
        }
    }

    /// Total order on positions of this word.
    pub fn pos_cmp(&self, a: &Position, b: &Position) -> Ordering {
        self.pos_key(a).cmp(&self.pos_key(b))
    }

    fn pos_key(&self, p: &Position) -> (usize, i64, usize) {
        match (&self.segments.get(p.segment), p.inner) {
            (Some(Segment::Explicit(_)), SegPos::At(i)) => (p.segment, i as i64, 0),
            (Some(Segment::Pattern { domain, .. }), SegPos::Block { n, k }) => {
                (p.segment, domain.key(n), k)
            }
            _ => (p.segment, i64::MAX, usize::MAX),
        }
    }

    /// Truncate every pattern to `depth` blocks (per infinite direction) and
    /// return the resulting explicit letter sequence. Finite words expand
    /// exactly.
    pub fn approx_expand(&self, depth: i64) -> Result<Vec<Letter>> {
        let mut out = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Explicit(ls) => out.extend_from_slice(ls),
                Segment::Pattern { domain, block } => {
                    let ns: Vec<i64> = match domain {
                        Domain::Omega { start } => (*start..*start + depth).collect(),
                        Domain::OmegaStar { start } => {
                            (*start..*start + depth).rev().collect()
                        }
                        Domain::Zeta => (-depth..=depth).collect(),
                    };
                    for n in ns {
                        for t in block {
                            out.push(t.instantiate(n)?);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    // ----- occurrence queries -------------------------------------------

    /// For transposition words: is the set of positions touching point `x`
    /// infinite? (Happens exactly when some pattern template has a constant
    /// subscript equal to `x`.)
    pub fn point_occurrences_unbounded(&self, x: i64) -> bool {
        self.segments.iter().any(|seg| match seg {
            Segment::Explicit(_) => false,
            Segment::Pattern { block, .. } => block.iter().any(|t| match t {
                LetterTemplate::T { a, b } => {
                    (a.is_constant() && a.offset == x) || (b.is_constant() && b.offset == x)
                }
                LetterTemplate::E { .. } => false,
            }),
        })
    }

    /// For Nielsen words: a head index with infinitely many occurrences, if
    /// any (a pattern template whose head subscript is constant).
    pub fn head_occurrences_unbounded(&self) -> Option<u32> {
        for seg in &self.segments {
            if let Segment::Pattern { block, .. } = seg {
                for t in block {
                    if let LetterTemplate::E { head, .. } = t {
                        if head.index.is_constant() && head.index.offset >= 1 {
                            return Some(head.index.offset as u32);
                        }
                    }
                }
            }
        }
        None
    }

    /// All positions (in position order) whose letter touches point `x`.
    /// Errors if that set is infinite.
    pub fn point_occurrences(&self, x: i64) -> Result<Vec<Position>> {
        if self.point_occurrences_unbounded(x) {
            return Err(Error::Inconclusive(format!("point {x} occurs infinitely often")));
        }
        let mut keyed: Vec<((usize, i64, usize), Position)> = Vec::new();
        for (si, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Explicit(ls) => {
                    for (i, l) in ls.iter().enumerate() {
                        if let Letter::T(t) = l {
                            if t.touches(x) {
                                let p = Position { segment: si, inner: SegPos::At(i) };
                                keyed.push((self.pos_key(&p), p));
                            }
                        }
                    }
                }
                Segment::Pattern { domain, block } => {
                    for (k, t) in block.iter().enumerate() {
                        if let LetterTemplate::T { a, b } = t {
                            for m in [a.solve(x), b.solve(x)] {
                                if let SolveSet::One(n) = m {
                                    if domain.contains(n) {
                                        let p = Position {
                                            segment: si,
                                            inner: SegPos::Block { n, k },
                                        };
                                        keyed.push((self.pos_key(&p), p));
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        keyed.sort_by_key(|(k, _)| *k);
        keyed.dedup_by_key(|(k, _)| *k);
        Ok(keyed.into_iter().map(|(_, p)| p).collect())
    }

    /// All positions whose letter's head generator index lies in `indices`.
    /// Errors if infinite.
    pub fn head_occurrences(&self, indices: &BTreeSet<u32>) -> Result<Vec<Position>> {
        let mut keyed: Vec<((usize, i64, usize), Position)> = Vec::new();
        for (si, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Explicit(ls) => {
                    for (i, l) in ls.iter().enumerate() {
                        if let Letter::E(e) = l {
                            if indices.contains(&e.head.index) {
                                let p = Position { segment: si, inner: SegPos::At(i) };
                                keyed.push((self.pos_key(&p), p));
                            }
                        }
                    }
                }
                Segment::Pattern { domain, block } => {
                    for (k, t) in block.iter().enumerate() {
                        if let LetterTemplate::E { head, .. } = t {
                            for &idx in indices {
                                match head.index.solve(idx as i64) {
                                    SolveSet::One(n) if domain.contains(n) => {
                                        let p = Position {
                                            segment: si,
                                            inner: SegPos::Block { n, k },
                                        };
                                        keyed.push((self.pos_key(&p), p));
                                    }
                                    SolveSet::All => {
                                        return Err(Error::Inconclusive(format!(
                                            "head index {idx} occurs infinitely often"
                                        )))
                                    }
                                    _ => {}
                                }
                            }
                        }
                    }
                }
            }
        }
        keyed.sort_by_key(|(k, _)| *k);
        keyed.dedup_by_key(|(k, _)| *k);
        Ok(keyed.into_iter().map(|(_, p)| p).collect())
    }

    /// Next position strictly after `after` (or the first, if `None`) whose
    /// letter touches point `x`.
    pub fn next_point_occ(&self, x: i64, after: Option<&Position>) -> Result<Option<Position>> {
        let occs = self.point_occurrences(x)?;
        Ok(match after {
            None => occs.first().copied(),
            Some(a) => {
                let ak = self.pos_key(a);
                occs.into_iter().find(|p| self.pos_key(p) > ak)
            }
        })
    }

    /// Previous position strictly before `before` (or the last, if `None`)
    /// whose letter touches point `x`.
    pub fn prev_point_occ(&self, x: i64, before: Option<&Position>) -> Result<Option<Position>> {
        let occs = self.point_occurrences(x)?;
        Ok(match before {
            None => occs.last().copied(),
            Some(b) => {
                let bk = self.pos_key(b);
                occs.into_iter().rev().find(|p| self.pos_key(p) < bk)
            }
        })
    }

    /// Next position strictly after `after` whose head index lies in the set.
    pub fn next_head_occ(
        &self,
        indices: &BTreeSet<u32>,
        after: Option<&Position>,
    ) -> Result<Option<Position>> {
        let occs = self.head_occurrences(indices)?;
        Ok(match after {
            None => occs.first().copied(),
            Some(a) => {
                let ak = self.pos_key(a);
                occs.into_iter().find(|p| self.pos_key(p) > ak)
            }
        })
    }

    /// All distinct points touched by explicit letters plus the boundary
    /// instantiations of each pattern (first `boundary_depth` blocks from each
    /// finite end).
    pub fn boundary_points(&self, boundary_depth: i64) -> Result<BTreeSet<i64>> {
        let mut pts = BTreeSet::new();
        for seg in &self.segments {
            match seg {
                Segment::Explicit(ls) => {
                    for l in ls {
                        if let Letter::T(t) = l {
                            pts.insert(t.a);
                            pts.insert(t.b);
                        }
                    }
                }
                Segment::Pattern { domain, block } => {
                    let ns: Vec<i64> = match domain {
                        Domain::Omega { start } | Domain::OmegaStar { start } => {
                            (*start..*start + boundary_depth).collect()
                        }
                        Domain::Zeta => (-boundary_depth..=boundary_depth).collect(),
                    };
                    for n in ns {
                        for t in block {
                            if let Letter::T(t) = t.instantiate(n)? {
                                pts.insert(t.a);
                                pts.insert(t.b);
                            }
                        }
                    }
                }
            }
        }
        Ok(pts)
    }

    // ----- segment surgery ----------------------------------------------

    /// Replace segment `seg_idx` by materializing all blocks with parameter
    /// between the extreme values of `ns` (clipped to the domain) as explicit
    /// letters, keeping the infinite remainder(s) as patterns.
    fn split_segment_at_ns(&self, seg_idx: usize, ns: &[i64]) -> Result<Vec<Segment>> {
        let (domain, block) = match &self.segments[seg_idx] {
            Segment::Explicit(ls) => return Ok(vec![Segment::Explicit(ls.clone())]),
            Segment::Pattern { domain, block } => (*domain, block.clone()),
        };
        if ns.is_empty() {
            return Ok(vec![Segment::Pattern { domain, block }]);
        }
        let lo = *ns.iter().min().unwrap();
        let hi = *ns.iter().max().unwrap();
        let materialize = |from: i64, to: i64, rev: bool| -> Result<Vec<Letter>> {
            let count = (to - from + 1).max(0) as usize * block.len();
            if count > MAX_MATERIALIZE {
                return Err(Error::Overflow(format!(
                    "pattern split would materialize {count} letters"
                )));
            }
            let mut out = Vec::with_capacity(count);
            let ns: Vec<i64> =
                if rev { (from..=to).rev().collect() } else { (from..=to).collect() };
            for n in ns {
                for t in &block {
                    out.push(t.instantiate(n)?);
                }
            }
            Ok(out)
        };
        Ok(match domain {
            Domain::Omega { start } => {
                let hi = hi.max(start - 1);
                let mut segs = Vec::new();
                if hi >= start {
                    segs.push(Segment::Explicit(materialize(start, hi, false)?));
                }
                segs.push(Segment::Pattern { domain: Domain::Omega { start: hi + 1 }, block });
                segs
            }
            Domain::OmegaStar { start } => {
                let hi = hi.max(start - 1);
                let mut segs = Vec::new();
                segs.push(Segment::Pattern {
                    domain: Domain::OmegaStar { start: hi + 1 },
                    block: block.clone(),
                });
                if hi >= start {
                    segs.push(Segment::Explicit(materialize(start, hi, true)?));
                }
                segs
            }
            Domain::Zeta => {
                // Left ray {n <= lo-1} read ascending is an omega* segment in
                // the substituted variable n' = -n.
                let left = Segment::Pattern {
                    domain: Domain::OmegaStar { start: -(lo - 1) },
                    block: block.iter().map(|t| t.negated_var()).collect(),
                };
                let mid = Segment::Explicit(materialize(lo, hi, false)?);
                let right = Segment::Pattern { domain: Domain::Omega { start: hi + 1 }, block };
                vec![left, mid, right]
            }
        })
    }

    /// Split the word at position `p` into (strict prefix, letter, strict
    /// suffix).
    pub fn split3_at(&self, p: &Position) -> Result<(TransfiniteWord, Letter, TransfiniteWord)> {
        let letter = self.letter_at(p)?;
        // Materialize the containing block (if a pattern position) so the cut
        // point lies in an explicit segment of an equivalent word.
        let (word, seg_idx, offset) = match p.inner {
            SegPos::At(i) => (self.clone(), p.segment, i),
            SegPos::Block { n, k } => {
                let repl = self.split_segment_at_ns(p.segment, &[n])?;
                // Locate the explicit run and the offset of (n, k) inside it.
                let (domain, block) = match &self.segments[p.segment] {
                    Segment::Pattern { domain, block } => (*domain, block),
                    _ => unreachable!(),
                };
                let (expl_pos_in_repl, off) = match domain {
                    Domain::Omega { start } => (0usize, ((n - start) as usize) * block.len() + k),
                    Domain::OmegaStar { start: _ } => {
                        // Explicit run holds blocks n = hi .. start descending;
                        // here hi == n is the max cut, so (n, k) is at offset k.
                        (1usize, k)
                    }
                    Domain::Zeta => (1usize, k),
                };
                let mut segments: Vec<Segment> =
                    self.segments[..p.segment].to_vec();
                let base = segments.len();
                segments.extend(repl.iter().cloned());
                let seg_idx = base + expl_pos_in_repl;
                segments.extend(self.segments[p.segment + 1..].iter().cloned());
                let w = TransfiniteWord { alphabet: self.alphabet, segments };
                (w, seg_idx, off)
            }
        };
        // Do not normalize `word` before cutting: segment indices must stay
        // aligned with the replacement above.
        let mut prefix_segs: Vec<Segment> = word.segments[..seg_idx].to_vec();
        let mut suffix_segs: Vec<Segment> = Vec::new();
        if let Segment::Explicit(ls) = &word.segments[seg_idx] {
            prefix_segs.push(Segment::Explicit(ls[..offset].to_vec()));
            suffix_segs.push(Segment::Explicit(ls[offset + 1..].to_vec()));
        } else {
            return Err(Error::Defect("split3_at: cut segment is not explicit".into()));
        }
        suffix_segs.extend(word.segments[seg_idx + 1..].iter().cloned());
        Ok((
            TransfiniteWord::from_segments(prefix_segs)?,
            letter,
            TransfiniteWord::from_segments(suffix_segs)?,
        ))
    }

    /// The subword of all positions strictly before `p`.
    pub fn prefix_before(&self, p: &Position) -> Result<TransfiniteWord> {
        Ok(self.split3_at(p)?.0)
    }

    /// The subword of all positions strictly after `p`.
    pub fn suffix_after(&self, p: &Position) -> Result<TransfiniteWord> {
        Ok(self.split3_at(p)?.2)
    }

    /// The subword of all positions from `p` on (inclusive).
    pub fn suffix_from(&self, p: &Position) -> Result<TransfiniteWord> {
        let (_, letter, suffix) = self.split3_at(p)?;
        TransfiniteWord::from_letters(vec![letter])?.concat(&suffix)
    }

    // ----- projection ----------------------------------------------------

    /// Keep exactly the letters selected by `spec`, preserving their order.
    pub fn project(&self, spec: &ProjectionSpec) -> Result<TransfiniteWord> {
        let mut segments: Vec<Segment> = Vec::new();
        for seg in &self.segments {
            match seg {
                Segment::Explicit(ls) => segments.push(Segment::Explicit(
                    ls.iter().filter(|l| spec.keeps(l)).copied().collect(),
                )),
                Segment::Pattern { domain, block } => {
                    segments.extend(self.project_pattern(spec, *domain, block)?)
                }
            }
        }
        TransfiniteWord::from_segments(segments)
    }

    fn project_pattern(
        &self,
        spec: &ProjectionSpec,
        domain: Domain,
        block: &[LetterTemplate],
    ) -> Result<Vec<Segment>> {
        match spec {
            ProjectionSpec::PointsIn(_) | ProjectionSpec::GeneratorsIn(_) => {
                // Finite retained sets match each template at finitely many
                // parameters; materialize the matches in position order.
                let mut keyed: Vec<(i64, usize, Letter)> = Vec::new();
                for (k, t) in block.iter().enumerate() {
                    for n in spec.matches_in(t) {
                        if domain.contains(n) {
                            let l = t.instantiate(n)?;
                            if spec.keeps(&l) {
                                keyed.push((domain.key(n), k, l));
                            }
                        }
                    }
                }
                keyed.sort_by_key(|(nk, k, _)| (*nk, *k));
                Ok(vec![Segment::Explicit(keyed.into_iter().map(|(_, _, l)| l).collect())])
            }
            ProjectionSpec::HeadIndexAtLeast(m) => {
                // Each template's head subscript crosses the threshold at most
                // once; split at the largest crossing, filter the explicit
                // part letterwise, and filter the block of the leftover tail.
                let mut cuts: Vec<i64> = Vec::new();
                for t in block {
                    if let LetterTemplate::E { head, .. } = t {
                        if head.index.coeff != 0 {
                            let c = head.index.coeff;
                            let thresh = (*m as i64) - head.index.offset;
                            // Smallest n with c*n + offset >= m (c > 0; E
                            // patterns cannot have negative head slope on an
                            // upward-infinite domain).
                            if c > 0 {
                                cuts.push(thresh.div_euclid(c) + i64::from(thresh % c != 0));
                            }
                        }
                    }
                }
                let repl = self.split_for_cuts(domain, block, &cuts)?;
                let mut out = Vec::new();
                for seg in repl {
                    match seg {
                        Segment::Explicit(ls) => out.push(Segment::Explicit(
                            ls.iter().filter(|l| spec.keeps(l)).copied().collect(),
                        )),
                        Segment::Pattern { domain, block } => {
                            let kept: Vec<LetterTemplate> = block
                                .iter()
                                .filter(|t| template_head_always_ge(t, domain, *m))
                                .copied()
                                .collect();
                            if !kept.is_empty() {
                                out.push(Segment::Pattern { domain, block: kept });
                            }
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn split_for_cuts(
        &self,
        domain: Domain,
        block: &[LetterTemplate],
        cuts: &[i64],
    ) -> Result<Vec<Segment>> {
        let tmp = TransfiniteWord {
            alphabet: self.alphabet,
            segments: vec![Segment::Pattern { domain, block: block.to_vec() }],
        };
        tmp.split_segment_at_ns(0, cuts)
    }

    /// The finite subword of positions whose letter lies in `retained`
    /// (which should be closed under inversion), in position order. Finite
    /// because every concrete letter occurs finitely often.
    pub fn project_to_subalphabet(&self, retained: &BTreeSet<Letter>) -> Result<Vec<Letter>> {
        let mut keyed: Vec<((usize, i64, usize), Letter)> = Vec::new();
        for (si, seg) in self.segments.iter().enumerate() {
            match seg {
                Segment::Explicit(ls) => {
                    for (i, l) in ls.iter().enumerate() {
                        if retained.contains(l) {
                            let p = Position { segment: si, inner: SegPos::At(i) };
                            keyed.push((self.pos_key(&p), *l));
                        }
                    }
                }
                Segment::Pattern { domain, block } => {
                    for (k, t) in block.iter().enumerate() {
                        for target in retained {
                            for n in template_matches(t, target) {
                                if domain.contains(n) && t.instantiate(n)? == *target {
                                    let p = Position { segment: si, inner: SegPos::Block { n, k } };
                                    keyed.push((self.pos_key(&p), *target));
                                }
                            }
                        }
                    }
                }
            }
        }
        keyed.sort_by_key(|(k, _)| *k);
        keyed.dedup_by_key(|(k, _)| *k);
        Ok(keyed.into_iter().map(|(_, l)| l).collect())
    }

    // ----- structural data ----------------------------------------------

    /// Magnitude bound on all affine data (offsets, coefficients, domain
    /// starts) occurring in the word; used by chain analyses to know when the
    /// relative order of distinct affine subscript maps has stabilized.
    pub fn affine_magnitude(&self) -> i64 {
        let mut m = 1i64;
        for seg in &self.segments {
            if let Segment::Pattern { domain, block } = seg {
                match domain {
                    Domain::Omega { start } | Domain::OmegaStar { start } => {
                        m = m.max(start.abs());
                    }
                    Domain::Zeta => {}
                }
                for t in block {
                    let maps = match t {
                        LetterTemplate::T { a, b } => vec![*a, *b],
                        LetterTemplate::E { head, tail } => vec![head.index, tail.index],
                    };
                    for map in maps {
                        m = m.max(map.coeff.abs()).max(map.offset.abs());
                    }
                }
            }
        }
        m
    }

    /// Least common multiple of the nonzero subscript slopes (capped).
    pub fn slope_lcm(&self) -> i64 {
        let mut l = 1i64;
        for seg in &self.segments {
            if let Segment::Pattern { block, .. } = seg {
                for t in block {
                    let maps = match t {
                        LetterTemplate::T { a, b } => vec![*a, *b],
                        LetterTemplate::E { head, tail } => vec![head.index, tail.index],
                    };
                    for map in maps {
                        if map.coeff != 0 {
                            let c = map.coeff.abs();
                            let g = gcd(l, c);
                            l = (l / g).saturating_mul(c).min(720);
                        }
                    }
                }
            }
        }
        l
    }
}

/// Parameters at which the template could instantiate to the given concrete
/// letter (a superset; the caller re-instantiates to confirm).
fn template_matches(t: &LetterTemplate, target: &Letter) -> Vec<i64> {
    let mut ns = Vec::new();
    let mut push = |s: SolveSet| {
        if let SolveSet::One(n) = s {
            ns.push(n);
        }
    };
    match (t, target) {
        (LetterTemplate::T { a, b }, Letter::T(tl)) => {
            push(a.solve(tl.a));
            push(b.solve(tl.a));
            push(a.solve(tl.b));
            push(b.solve(tl.b));
        }
        (LetterTemplate::E { head, tail }, Letter::E(e)) => {
            push(head.index.solve(e.head.index as i64));
            push(tail.index.solve(e.tail.index as i64));
        }
        _ => {}
    }
    ns.sort_unstable();
    ns.dedup();
    ns
}

fn template_head_always_ge(t: &LetterTemplate, domain: Domain, m: u32) -> bool {
    match t {
        LetterTemplate::E { head, .. } => match domain {
            Domain::Omega { start } | Domain::OmegaStar { start } => {
                head.index.coeff >= 0 && head.index.eval(start) >= m as i64
            }
            Domain::Zeta => head.index.coeff == 0 && head.index.offset >= m as i64,
        },
        LetterTemplate::T { .. } => false,
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Which letters a projection keeps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProjectionSpec {
    /// Transposition letters with *both* points inside the set.
    PointsIn(BTreeSet<i64>),
    /// Nielsen letters with both head and tail generator index inside the set.
    GeneratorsIn(BTreeSet<u32>),
    /// Nielsen letters whose head generator index is at least the bound.
    HeadIndexAtLeast(u32),
}

impl ProjectionSpec {
    pub fn keeps(&self, l: &Letter) -> bool {
        match (self, l) {
            (ProjectionSpec::PointsIn(pts), Letter::T(t)) => {
                pts.contains(&t.a) && pts.contains(&t.b)
            }
            (ProjectionSpec::GeneratorsIn(idx), Letter::E(e)) => {
                idx.contains(&e.head.index) && idx.contains(&e.tail.index)
            }
            (ProjectionSpec::HeadIndexAtLeast(m), Letter::E(e)) => e.head.index >= *m,
            _ => false,
        }
    }

    /// Parameters at which a pattern template can match a *finite* retained
    /// set (used for `PointsIn` / `GeneratorsIn`).
    fn matches_in(&self, t: &LetterTemplate) -> Vec<i64> {
        let mut ns = Vec::new();
        let mut push = |s: SolveSet| {
            if let SolveSet::One(n) = s {
                ns.push(n);
            }
        };
        match (self, t) {
            (ProjectionSpec::PointsIn(pts), LetterTemplate::T { a, b }) => {
                for &x in pts {
                    push(a.solve(x));
                    push(b.solve(x));
                }
            }
            (ProjectionSpec::GeneratorsIn(idx), LetterTemplate::E { head, tail }) => {
                for &i in idx {
                    push(head.index.solve(i as i64));
                    push(tail.index.solve(i as i64));
                }
            }
            _ => {}
        }
        ns.sort_unstable();
        ns.dedup();
        ns
    }
}

/// Freely reduce a finite letter sequence: repeatedly delete adjacent pairs
/// `l, l^-1`.
pub fn reduce_finite(letters: &[Letter]) -> Vec<Letter> {
    let mut stack: Vec<Letter> = Vec::with_capacity(letters.len());
    for &l in letters {
        if stack.last().is_some_and(|top| top.inverse() == l) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    stack
}

/// Factor family for an infinite product.
#[derive(Debug, Clone)]
pub enum FactorFamily {
    /// Finitely many factor words, multiplied left to right.
    Finite(Vec<TransfiniteWord>),
    /// One finite block of letters per domain parameter.
    Pattern { domain: Domain, block: Vec<LetterTemplate> },
}

/// Form the product of a factor family, enforcing the convergence condition:
/// for every basic neighborhood of the identity, all but finitely many factors
/// must lie inside it. For a pattern family this means every subscript of the
/// block must actually move with the parameter — a constant head index (or a
/// constant transposition point) pins infinitely many factors outside one
/// neighborhood and the product diverges.
pub fn infinite_product(factors: &FactorFamily) -> Result<TransfiniteWord> {
    match factors {
        FactorFamily::Finite(ws) => {
            let mut acc = TransfiniteWord::empty();
            for w in ws {
                acc = acc.concat(w)?;
            }
            Ok(acc)
        }
        FactorFamily::Pattern { domain, block } => {
            for t in block {
                let diverging = match t {
                    LetterTemplate::E { head, .. } => head.index.is_constant(),
                    LetterTemplate::T { a, b } => a.is_constant() || b.is_constant(),
                };
                if diverging {
                    return Err(Error::InvalidWord(format!(
                        "infinite product diverges: factor letter {t} stays outside a fixed identity neighborhood"
                    )));
                }
            }
            TransfiniteWord::from_segments(vec![Segment::Pattern {
                domain: *domain,
                block: block.clone(),
            }])
        }
    }
}

fn validate_segment(seg: &Segment) -> Result<Option<Alphabet>> {
    match seg {
        Segment::Explicit(ls) => {
            let mut alpha = None;
            for l in ls {
                match alpha {
                    None => alpha = Some(l.alphabet()),
                    Some(a) if a == l.alphabet() => {}
                    Some(a) => {
                        return Err(Error::MixedAlphabets(format!(
                            "explicit run mixes {a:?} with {:?}",
                            l.alphabet()
                        )))
                    }
                }
            }
            Ok(alpha)
        }
        Segment::Pattern { domain, block } => {
            if block.is_empty() {
                return Err(Error::InvalidWord("pattern block must be nonempty".into()));
            }
            let alpha = block[0].alphabet();
            for t in block {
                if t.alphabet() != alpha {
                    return Err(Error::MixedAlphabets("pattern block mixes alphabets".into()));
                }
                if t.is_constant() {
                    return Err(Error::InvalidWord(format!(
                        "constant pattern letter {t} would occur infinitely often"
                    )));
                }
                validate_template_on_domain(t, *domain)?;
            }
            Ok(Some(alpha))
        }
    }
}

fn validate_template_on_domain(t: &LetterTemplate, domain: Domain) -> Result<()> {
    match t {
        LetterTemplate::T { a, b } => {
            // Need a(n) != b(n) throughout the domain.
            let diff_coeff = a.coeff - b.coeff;
            let diff_off = a.offset - b.offset;
            let bad = if diff_coeff == 0 {
                if diff_off == 0 {
                    Some("everywhere".to_string())
                } else {
                    None
                }
            } else if diff_off % diff_coeff == 0 {
                let n = -diff_off / diff_coeff;
                domain.contains(n).then(|| format!("at n={n}"))
            } else {
                None
            };
            if let Some(wher) = bad {
                return Err(Error::InvalidWord(format!(
                    "template {t} degenerates to a fixed point {wher}"
                )));
            }
            Ok(())
        }
        LetterTemplate::E { head, tail } => {
            for (what, map) in [("head", head.index), ("tail", tail.index)] {
                match domain {
                    Domain::Omega { start } | Domain::OmegaStar { start } => {
                        if map.coeff < 0 || map.eval(start) < 1 {
                            return Err(Error::InvalidWord(format!(
                                "template {t}: {what} index map {map} leaves the positive range on its domain"
                            )));
                        }
                    }
                    Domain::Zeta => {
                        if map.coeff != 0 || map.offset < 1 {
                            return Err(Error::InvalidWord(format!(
                                "template {t}: {what} index map {map} leaves the positive range on a bi-infinite domain"
                            )));
                        }
                    }
                }
            }
            // Need head index != tail index throughout the domain.
            let dc = head.index.coeff - tail.index.coeff;
            let doff = head.index.offset - tail.index.offset;
            let collide = if dc == 0 {
                dc == 0 && doff == 0
            } else {
                doff % dc == 0 && domain.contains(-doff / dc)
            };
            if collide {
                return Err(Error::InvalidWord(format!(
                    "template {t}: head and tail subscripts collide on the domain"
                )));
            }
            Ok(())
        }
    }
}

impl fmt::Display for TransfiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.segments.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for seg in &self.segments {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            match seg {
                Segment::Explicit(ls) => {
                    let mut inner_first = true;
                    for l in ls {
                        if !inner_first {
                            write!(f, " ")?;
                        }
                        inner_first = false;
                        write!(f, "{l}")?;
                    }
                }
                Segment::Pattern { domain, block } => {
                    match domain {
                        Domain::Omega { start } => write!(f, "prod n = {start} to inf {{")?,
                        Domain::OmegaStar { start } => write!(f, "prod n = inf to {start} {{")?,
                        Domain::Zeta => write!(f, "prod n = -inf to inf {{")?,
                    }
                    for t in block {
                        write!(f, " {t}")?;
                    }
                    write!(f, " }}")?;
                }
            }
        }
        Ok(())
    }
}
