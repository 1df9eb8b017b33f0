//! Cancellation pairings: the witness structure under which an infinitary
//! word collapses to a subword.
//!
//! A pairing selects a set `T` of positions, matched into pairs `t <-> t*`,
//! subject to three conditions: paired letters are mutually inverse, the
//! interval spanned by any pair lies inside `T`, and every such interval is
//! itself closed under the pairing (so pairs nest or stack, never interleave
//! with the outside). A word with a full pairing of some subset cancels to
//! the word on the remaining positions.

use crate::error::{Error, Result};
use crate::letters::{AffineMap, LetterTemplate, SolveSet};
use crate::word::{Domain, Position, SegPos, Segment, TransfiniteWord};

/// How many parameter values per domain end are explicitly sampled when
/// checking pair-closure of intervals on pattern blocks.
const SAMPLE_DEPTH: i64 = 8;

/// A rule pairing the `k_a`-th block letter of pattern segment `seg_a` at
/// parameter `n` with the `k_b`-th block letter of pattern segment `seg_b`
/// at parameter `n_map(n)`, for every `n` in the domain of `seg_a`.
/// `n_map` must carry the domain of `seg_a` bijectively onto the domain of
/// `seg_b` (so `n_map.coeff` is `+1` or `-1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairRule {
    pub seg_a: usize,
    pub k_a: usize,
    pub seg_b: usize,
    pub k_b: usize,
    pub n_map: AffineMap,
}

/// A cancellation pairing over a fixed word: finitely many explicit pairs
/// plus finitely many pattern rules.
#[derive(Debug, Clone, Default)]
pub struct CancellationPairing {
    pub finite_pairs: Vec<(Position, Position)>,
    pub rules: Vec<PairRule>,
}

impl CancellationPairing {
    /// The full mirror pairing of `w * w^-1` for a word `w` with `seg_count`
    /// segments: position `p` of `w` pairs with its mirror image in the
    /// inverted copy.
    pub fn mirror_of(w: &TransfiniteWord) -> Result<(TransfiniteWord, CancellationPairing)> {
        let inv = w.invert();
        let prod = w.concat(&inv)?;
        if let Some(ls) = w.as_finite() {
            // Finite words concatenate into a single explicit run.
            let m = ls.len();
            let mut pairing = CancellationPairing::default();
            for i in 0..m {
                pairing.finite_pairs.push((
                    Position { segment: 0, inner: SegPos::At(i) },
                    Position { segment: 0, inner: SegPos::At(2 * m - 1 - i) },
                ));
            }
            return Ok((prod, pairing));
        }
        let n = w.segments().len();
        let total = prod.segments().len();
        if total != 2 * n {
            return Err(Error::Inconclusive(
                "mirror pairing: segment merge obscured the mirror axis".into(),
            ));
        }
        let mut pairing = CancellationPairing::default();
        for (si, seg) in w.segments().iter().enumerate() {
            let sj = total - 1 - si;
            match seg {
                Segment::Explicit(ls) => {
                    let m = ls.len();
                    for i in 0..m {
                        pairing.finite_pairs.push((
                            Position { segment: si, inner: SegPos::At(i) },
                            Position { segment: sj, inner: SegPos::At(m - 1 - i) },
                        ));
                    }
                }
                Segment::Pattern { domain, block } => {
                    // Inversion reverses the block and (for zeta) negates the
                    // parameter; normalization then shifts omega/omega* starts
                    // to 0. Recover the partner's parameter map accordingly.
                    let m = block.len();
                    let partner_domain = match prod.segments()[sj] {
                        Segment::Pattern { domain, .. } => domain,
                        _ => {
                            return Err(Error::Inconclusive(
                                "mirror pairing: shape mismatch".into(),
                            ))
                        }
                    };
                    let n_map = match (domain, partner_domain) {
                        (Domain::Zeta, Domain::Zeta) => AffineMap::new(-1, 0),
                        (
                            Domain::Omega { start } | Domain::OmegaStar { start },
                            Domain::Omega { start: s2 } | Domain::OmegaStar { start: s2 },
                        ) => AffineMap::new(1, s2 - start),
                        _ => {
                            return Err(Error::Inconclusive(
                                "mirror pairing: shape mismatch".into(),
                            ))
                        }
                    };
                    for k in 0..m {
                        pairing.rules.push(PairRule {
                            seg_a: si,
                            k_a: k,
                            seg_b: sj,
                            k_b: m - 1 - k,
                            n_map,
                        });
                    }
                }
            }
        }
        Ok((prod, pairing))
    }

    /// The pairing partner of `p`, if `p` is paired.
    pub fn partner(&self, w: &TransfiniteWord, p: &Position) -> Option<Position> {
        for (a, b) in &self.finite_pairs {
            if a == p {
                return Some(*b);
            }
            if b == p {
                return Some(*a);
            }
        }
        if let SegPos::Block { n, k } = p.inner {
            for r in &self.rules {
                if r.seg_a == p.segment && r.k_a == k && self.rule_domain_contains(w, r, n) {
                    return Some(Position {
                        segment: r.seg_b,
                        inner: SegPos::Block { n: r.n_map.eval(n), k: r.k_b },
                    });
                }
                if r.seg_b == p.segment && r.k_b == k {
                    if let SolveSet::One(na) = r.n_map.solve(n) {
                        if self.rule_domain_contains(w, r, na) {
                            return Some(Position {
                                segment: r.seg_a,
                                inner: SegPos::Block { n: na, k: r.k_a },
                            });
                        }
                    }
                }
            }
        }
        None
    }

    fn rule_domain_contains(&self, w: &TransfiniteWord, r: &PairRule, n: i64) -> bool {
        match w.segments().get(r.seg_a) {
            Some(Segment::Pattern { domain, .. }) => domain.contains(n),
            _ => false,
        }
    }

    pub fn contains(&self, w: &TransfiniteWord, p: &Position) -> bool {
        self.partner(w, p).is_some()
    }

    /// Verify the three pairing conditions against `w`. Letter inversion and
    /// interval coverage are checked symbolically on pattern blocks; the
    /// nesting/closure condition is checked explicitly on all finite pairs
    /// and on a boundary window of each rule.
    pub fn check(&self, w: &TransfiniteWord) -> Result<()> {
        self.check_involution(w)?;
        self.check_inverse_letters(w)?;
        for t in self.sample_positions(w)? {
            let t_star = self
                .partner(w, &t)
                .ok_or_else(|| Error::Defect("sampled position lost its partner".into()))?;
            self.check_interval(w, &t, &t_star)?;
        }
        Ok(())
    }

    fn check_involution(&self, w: &TransfiniteWord) -> Result<()> {
        // Finite pairs: distinct endpoints, no reuse, positions exist.
        let mut seen: Vec<Position> = Vec::new();
        for (a, b) in &self.finite_pairs {
            if a == b {
                return Err(Error::InvalidWord(format!("position {a} paired with itself")));
            }
            w.letter_at(a)?;
            w.letter_at(b)?;
            for p in [a, b] {
                if seen.contains(p) {
                    return Err(Error::InvalidWord(format!("position {p} paired twice")));
                }
                seen.push(*p);
            }
        }
        // Rules: bijective parameter maps, valid segments, no overlap of the
        // (segment, block-letter) slots they claim.
        let mut slots: Vec<(usize, usize)> = Vec::new();
        for r in &self.rules {
            if r.n_map.coeff.abs() != 1 {
                return Err(Error::InvalidWord(
                    "pairing rule parameter map must be a bijection (slope +-1)".into(),
                ));
            }
            let da = pattern_domain(w, r.seg_a)?;
            let db = pattern_domain(w, r.seg_b)?;
            let onto = match (da, db) {
                (Domain::Zeta, Domain::Zeta) => true,
                (
                    Domain::Omega { start: sa } | Domain::OmegaStar { start: sa },
                    Domain::Omega { start: sb } | Domain::OmegaStar { start: sb },
                ) => {
                    // Image of {n >= sa} must be {n >= sb}: ascending map with
                    // matching left endpoint.
                    r.n_map.coeff == 1 && r.n_map.eval(sa) == sb
                }
                _ => false,
            };
            if !onto {
                return Err(Error::InvalidWord(
                    "pairing rule parameter map is not onto the partner domain".into(),
                ));
            }
            for slot in [(r.seg_a, r.k_a), (r.seg_b, r.k_b)] {
                if slots.contains(&slot) {
                    return Err(Error::InvalidWord(format!(
                        "block letter slot {slot:?} claimed by two rules"
                    )));
                }
                slots.push(slot);
            }
            if (r.seg_a, r.k_a) == (r.seg_b, r.k_b) {
                return Err(Error::InvalidWord("rule pairs a block letter with itself".into()));
            }
        }
        Ok(())
    }

    fn check_inverse_letters(&self, w: &TransfiniteWord) -> Result<()> {
        for (a, b) in &self.finite_pairs {
            let la = w.letter_at(a)?;
            let lb = w.letter_at(b)?;
            if la.inverse() != lb {
                return Err(Error::InvalidWord(format!(
                    "paired letters {la} at {a} and {lb} at {b} are not mutually inverse"
                )));
            }
        }
        for r in &self.rules {
            let ta = pattern_template(w, r.seg_a, r.k_a)?;
            let tb = pattern_template(w, r.seg_b, r.k_b)?;
            // Require template_b(n_map(n)) == template_a(n)^-1 identically.
            let want = ta.inverse();
            let got = substitute(&tb, r.n_map);
            if want != got {
                return Err(Error::InvalidWord(format!(
                    "rule letters {ta} / {tb} are not mutually inverse under the parameter map"
                )));
            }
        }
        Ok(())
    }

    /// Finite-pair members plus rule instances near every finite domain end.
    fn sample_positions(&self, w: &TransfiniteWord) -> Result<Vec<Position>> {
        let mut out: Vec<Position> = Vec::new();
        for (a, b) in &self.finite_pairs {
            out.push(*a);
            out.push(*b);
        }
        for r in &self.rules {
            let da = pattern_domain(w, r.seg_a)?;
            let ns: Vec<i64> = match da {
                Domain::Omega { start } | Domain::OmegaStar { start } => {
                    (start..start + SAMPLE_DEPTH).collect()
                }
                Domain::Zeta => (-SAMPLE_DEPTH..=SAMPLE_DEPTH).collect(),
            };
            for n in ns {
                out.push(Position { segment: r.seg_a, inner: SegPos::Block { n, k: r.k_a } });
            }
        }
        Ok(out)
    }

    /// Check that the closed interval spanned by `t` and `t_star` lies in `T`
    /// and is closed under the pairing.
    fn check_interval(&self, w: &TransfiniteWord, t: &Position, t_star: &Position) -> Result<()> {
        let (lo, hi) = if w.pos_cmp(t, t_star) == std::cmp::Ordering::Less {
            (*t, *t_star)
        } else {
            (*t_star, *t)
        };
        // Walk every segment portion intersecting [lo, hi].
        for (si, seg) in w.segments().iter().enumerate() {
            if si < lo.segment || si > hi.segment {
                continue;
            }
            match seg {
                Segment::Explicit(ls) => {
                    let from = if si == lo.segment { expl_index(&lo) } else { 0 };
                    let to = if si == hi.segment { expl_index(&hi) } else { ls.len() - 1 };
                    for i in from..=to.min(ls.len().saturating_sub(1)) {
                        let p = Position { segment: si, inner: SegPos::At(i) };
                        let q = self.partner(w, &p).ok_or_else(|| {
                            Error::InvalidWord(format!(
                                "interval [{lo},{hi}] contains unpaired position {p}"
                            ))
                        })?;
                        if !in_interval(w, &q, &lo, &hi) {
                            return Err(Error::InvalidWord(format!(
                                "partner {q} of {p} escapes the interval [{lo},{hi}]"
                            )));
                        }
                    }
                }
                Segment::Pattern { domain, block } => {
                    // Portion of the segment inside the interval, as a range
                    // of position keys (key = domain.key(n), ascending).
                    let lo_key = if si == lo.segment { Some(block_key(domain, &lo)) } else { None };
                    let hi_key = if si == hi.segment { Some(block_key(domain, &hi)) } else { None };
                    // Coverage: every (k, key in range) must be matched by a
                    // rule claiming this slot over the full relevant range.
                    for k in 0..block.len() {
                        self.check_slot_coverage(w, si, k, *domain, lo_key, hi_key, &lo, &hi)?;
                    }
                    // Closure sampling near the portion boundaries.
                    for (n, k) in self.portion_samples(*domain, block.len(), lo_key, hi_key) {
                        let p = Position { segment: si, inner: SegPos::Block { n, k } };
                        if !in_interval(w, &p, &lo, &hi) {
                            continue;
                        }
                        let q = self.partner(w, &p).ok_or_else(|| {
                            Error::InvalidWord(format!(
                                "interval [{lo},{hi}] contains unpaired position {p}"
                            ))
                        })?;
                        if !in_interval(w, &q, &lo, &hi) {
                            return Err(Error::InvalidWord(format!(
                                "partner {q} of {p} escapes the interval [{lo},{hi}]"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Verify that rules cover slot (`si`, `k`) over the key range cut out of
    /// the segment by the interval. The covered key set of a rule claiming
    /// the slot is the whole domain, so coverage amounts to: some rule claims
    /// the slot, unless the portion is empty.
    #[allow(clippy::too_many_arguments)]
    fn check_slot_coverage(
        &self,
        w: &TransfiniteWord,
        si: usize,
        k: usize,
        domain: Domain,
        lo_key: Option<(i64, usize)>,
        hi_key: Option<(i64, usize)>,
        lo: &Position,
        hi: &Position,
    ) -> Result<()> {
        let claimed = self
            .rules
            .iter()
            .any(|r| (r.seg_a == si && r.k_a == k) || (r.seg_b == si && r.k_b == k));
        if claimed {
            return Ok(());
        }
        // The slot has no rule; it may still be covered by finite pairs if the
        // portion is finite, or the portion may be empty.
        let portion_infinite = match domain {
            Domain::Omega { .. } => hi_key.is_none(),
            Domain::OmegaStar { .. } => lo_key.is_none(),
            Domain::Zeta => lo_key.is_none() || hi_key.is_none(),
        };
        if portion_infinite {
            return Err(Error::InvalidWord(format!(
                "interval [{lo},{hi}] contains an infinite unpaired run in segment {si}"
            )));
        }
        let (lk, _) = lo_key.unwrap();
        let (hk, _) = hi_key.unwrap();
        for key in lk..=hk {
            let n = domain.n_of_key(key);
            let p = Position { segment: si, inner: SegPos::Block { n, k } };
            if in_interval(w, &p, lo, hi) && !self.contains(w, &p) {
                return Err(Error::InvalidWord(format!(
                    "interval [{lo},{hi}] contains unpaired position {p}"
                )));
            }
        }
        Ok(())
    }

    fn portion_samples(
        &self,
        domain: Domain,
        block_len: usize,
        lo_key: Option<(i64, usize)>,
        hi_key: Option<(i64, usize)>,
    ) -> Vec<(i64, usize)> {
        let mut keys: Vec<i64> = Vec::new();
        if let Some((lk, _)) = lo_key {
            keys.extend(lk..lk + SAMPLE_DEPTH);
        }
        if let Some((hk, _)) = hi_key {
            keys.extend(hk - SAMPLE_DEPTH..=hk);
        }
        match domain {
            Domain::Omega { start } | Domain::OmegaStar { start } => {
                let base = domain.key(start).min(domain.key(start));
                keys.extend(base..base + SAMPLE_DEPTH);
            }
            Domain::Zeta => keys.extend(-SAMPLE_DEPTH..=SAMPLE_DEPTH),
        }
        keys.sort_unstable();
        keys.dedup();
        let mut out = Vec::new();
        for key in keys {
            let n = domain.n_of_key(key);
            if domain.contains(n) {
                for k in 0..block_len {
                    out.push((n, k));
                }
            }
        }
        out
    }

    /// The word left after deleting every paired position. Requires each rule
    /// to cover its slots over full domains (which `check` enforces).
    pub fn residual(&self, w: &TransfiniteWord) -> Result<TransfiniteWord> {
        let mut segments: Vec<Segment> = Vec::new();
        for (si, seg) in w.segments().iter().enumerate() {
            match seg {
                Segment::Explicit(ls) => {
                    let mut kept = Vec::new();
                    for (i, l) in ls.iter().enumerate() {
                        let p = Position { segment: si, inner: SegPos::At(i) };
                        if !self.contains(w, &p) {
                            kept.push(*l);
                        }
                    }
                    segments.push(Segment::Explicit(kept));
                }
                Segment::Pattern { domain, block } => {
                    let mut kept = Vec::new();
                    for (k, t) in block.iter().enumerate() {
                        let claimed = self.rules.iter().any(|r| {
                            (r.seg_a == si && r.k_a == k) || (r.seg_b == si && r.k_b == k)
                        });
                        if !claimed {
                            // Finite pairs may still delete isolated blocks;
                            // that case needs a split, which we refuse rather
                            // than approximate.
                            let touched = self.finite_pairs.iter().any(|(a, b)| {
                                [a, b].iter().any(|p| {
                                    p.segment == si
                                        && matches!(p.inner, SegPos::Block { k: kk, .. } if kk == k)
                                })
                            });
                            if touched {
                                return Err(Error::Inconclusive(
                                    "residual of a partially-paired pattern slot".into(),
                                ));
                            }
                            kept.push(*t);
                        }
                    }
                    if !kept.is_empty() {
                        segments.push(Segment::Pattern { domain: *domain, block: kept });
                    }
                }
            }
        }
        TransfiniteWord::from_segments(segments)
    }

    /// Full check plus comparison of the residual with `g`.
    pub fn cancels_to(&self, w: &TransfiniteWord, g: &TransfiniteWord) -> Result<bool> {
        self.check(w)?;
        Ok(self.residual(w)? == *g)
    }
}

fn expl_index(p: &Position) -> usize {
    match p.inner {
        SegPos::At(i) => i,
        SegPos::Block { .. } => 0,
    }
}

fn block_key(domain: &Domain, p: &Position) -> (i64, usize) {
    match p.inner {
        SegPos::Block { n, k } => (domain.key(n), k),
        SegPos::At(i) => (i as i64, 0),
    }
}

fn in_interval(w: &TransfiniteWord, p: &Position, lo: &Position, hi: &Position) -> bool {
    w.pos_cmp(lo, p) != std::cmp::Ordering::Greater && w.pos_cmp(p, hi) != std::cmp::Ordering::Greater
}

fn pattern_domain(w: &TransfiniteWord, si: usize) -> Result<Domain> {
    match w.segments().get(si) {
        Some(Segment::Pattern { domain, .. }) => Ok(*domain),
        _ => Err(Error::InvalidWord(format!("segment {si} is not a pattern"))),
    }
}

fn pattern_template(w: &TransfiniteWord, si: usize, k: usize) -> Result<LetterTemplate> {
    match w.segments().get(si) {
        Some(Segment::Pattern { block, .. }) if k < block.len() => Ok(block[k]),
        _ => Err(Error::InvalidWord(format!("no block letter {k} in segment {si}"))),
    }
}

fn substitute(t: &LetterTemplate, m: AffineMap) -> LetterTemplate {
    match t {
        LetterTemplate::T { a, b } => LetterTemplate::T { a: a.compose(m), b: b.compose(m) },
        LetterTemplate::E { head, tail } => LetterTemplate::E {
            head: crate::letters::SymTemplate { index: head.index.compose(m), sign: head.sign },
            tail: crate::letters::SymTemplate { index: tail.index.compose(m), sign: tail.sign },
        },
    }
}
