//! Realizing permutations of an infinite point set by transfinite words over
//! the transposition alphabet.
//!
//! A transposition word acts on a point by *chain tracing*: starting from the
//! earliest occurrence of the point, each letter swaps the tracked point and
//! the trace jumps to the next occurrence of the new point further along the
//! word. The word is admissible when every such chain (in both directions) is
//! finite; the induced map point -> chain terminal is then a permutation.
//!
//! Admissibility over infinite pattern segments is decided symbolically: the
//! points occurring deep inside a pattern form finitely many affine families,
//! and a chain started at a generic member of a family is traced with affine
//! arithmetic, covering all but finitely many concrete points at once.

use crate::error::{Error, Result};
use crate::letters::{AffineMap, Alphabet, Letter, LetterTemplate, TranspositionLetter};
use crate::word::{reduce_finite, Domain, Position, SegPos, Segment, TransfiniteWord};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    fn flip(self) -> Direction {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

/// How a chain trace ended.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainOutcome {
    /// The chain reached a point with no further occurrence; the last entry
    /// of the point sequence is the terminal.
    Terminated,
    /// The chain provably never ends: a full period of steps repeats with a
    /// uniform shift moving away from every finite feature of the word.
    Diverges { period: usize },
    /// The step budget ran out before either of the above was established.
    BudgetExhausted { budget: u64 },
}

/// The trace of one chain: the visited points and the positions stepped
/// through, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainTrace {
    pub direction: Direction,
    /// `x_0, x_1, ...`; one more entry than `positions`.
    pub points: Vec<i64>,
    pub positions: Vec<Position>,
    pub outcome: ChainOutcome,
}

impl ChainTrace {
    pub fn terminal(&self) -> Option<i64> {
        match self.outcome {
            ChainOutcome::Terminated => self.points.last().copied(),
            _ => None,
        }
    }

    pub fn steps(&self) -> usize {
        self.positions.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Verified,
    Refuted,
    Unknown,
}

/// Evidence for a refutation: the point whose chain diverges and a prefix of
/// the diverging chain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub point: i64,
    pub direction: Direction,
    pub chain_prefix: Vec<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityVerdict {
    pub status: Status,
    pub witness: Option<Witness>,
    pub budget_used: u64,
}

impl AdmissibilityVerdict {
    fn verified(budget_used: u64) -> Self {
        AdmissibilityVerdict { status: Status::Verified, witness: None, budget_used }
    }

    fn unknown(budget_used: u64) -> Self {
        AdmissibilityVerdict { status: Status::Unknown, witness: None, budget_used }
    }

    fn refuted(witness: Witness, budget_used: u64) -> Self {
        AdmissibilityVerdict { status: Status::Refuted, witness: Some(witness), budget_used }
    }
}

fn require_transpositions(w: &TransfiniteWord) -> Result<()> {
    match w.alphabet() {
        None | Some(Alphabet::Transposition) => Ok(()),
        Some(Alphabet::Nielsen) => {
            Err(Error::MixedAlphabets("expected a transposition word".into()))
        }
    }
}

/// A recorded chain state used for divergence detection: the position about
/// to be consumed and the point entering it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct StepState {
    seg: usize,
    /// `None` for explicit positions (index stored in `n`), `Some(k)` for
    /// pattern positions with block offset `k` and parameter `n`.
    k: Option<usize>,
    n: i64,
    x: i64,
}

const MAX_PERIOD: usize = 64;
const HISTORY_PER_SLOT: usize = 16;

/// Traces the chain of `x` through `w`. `Forward` starts at the earliest
/// occurrence of `x` and steps to strictly later occurrences; `Backward` is
/// the mirror image. Divergence is certified by finding a repeating period
/// of steps whose shift escapes every bounded feature of the word.
pub fn chain_trace(
    w: &TransfiniteWord,
    x: i64,
    direction: Direction,
    budget: u64,
) -> Result<ChainTrace> {
    require_transpositions(w)?;
    let nstar = w.affine_magnitude();
    let slope_l = w.slope_lcm();

    let mut points = vec![x];
    let mut positions: Vec<Position> = Vec::new();
    let mut states: Vec<StepState> = Vec::new();
    let mut slots: HashMap<(usize, Option<usize>), Vec<usize>> = HashMap::new();

    let mut cur = x;
    let mut pos: Option<Position> = None;
    for _ in 0..budget {
        let next = match direction {
            Direction::Forward => w.next_point_occ(cur, pos.as_ref())?,
            Direction::Backward => w.prev_point_occ(cur, pos.as_ref())?,
        };
        let Some(p) = next else {
            return Ok(ChainTrace { direction, points, positions, outcome: ChainOutcome::Terminated });
        };
        let letter = w.letter_at(&p)?;
        let t = letter.as_t().ok_or_else(|| Error::MixedAlphabets("non-transposition".into()))?;
        let state = match p.inner {
            SegPos::At(i) => StepState { seg: p.segment, k: None, n: i as i64, x: cur },
            SegPos::Block { n, k } => StepState { seg: p.segment, k: Some(k), n, x: cur },
        };
        states.push(state);
        let step_idx = states.len() - 1;

        // Divergence check: does the window ending here repeat the previous
        // window of the same length with a uniformly escaping shift?
        let bucket = slots.entry((state.seg, state.k)).or_default();
        for &prev in bucket.iter().rev() {
            let period = step_idx - prev;
            if period == 0 || period > MAX_PERIOD || step_idx + 1 < 2 * period {
                continue;
            }
            if certify_divergence(w, &states, step_idx, period, direction, nstar, slope_l) {
                positions.push(p);
                points.push(t.apply(cur));
                return Ok(ChainTrace {
                    direction,
                    points,
                    positions,
                    outcome: ChainOutcome::Diverges { period },
                });
            }
        }
        bucket.push(step_idx);
        if bucket.len() > HISTORY_PER_SLOT {
            bucket.remove(0);
        }

        cur = t.apply(cur);
        positions.push(p);
        points.push(cur);
        pos = Some(p);
    }
    Ok(ChainTrace { direction, points, positions, outcome: ChainOutcome::BudgetExhausted { budget } })
}

/// Checks that states `[end-2p+1 ..= end-p]` and `[end-p+1 ..= end]` are
/// shift-equivalent and that the per-step shifts escape: each point is beyond
/// the word's bounded features, moving further away, with a shift divisible
/// by every template slope (so occurrence patterns repeat), and each
/// parameter shift heads into the unbounded side of its domain.
fn certify_divergence(
    w: &TransfiniteWord,
    states: &[StepState],
    end: usize,
    period: usize,
    direction: Direction,
    nstar: i64,
    slope_l: i64,
) -> bool {
    let hi = &states[end + 1 - period..=end];
    let lo = &states[end + 1 - 2 * period..=end - period];
    for (a, b) in lo.iter().zip(hi) {
        if a.seg != b.seg || a.k != b.k || a.k.is_none() {
            return false;
        }
        let dn = b.n - a.n;
        let dx = b.x - a.x;
        if dn == 0 || dx == 0 || dx % slope_l != 0 {
            return false;
        }
        // The point must already be clear of every constant feature and
        // shifting further away from zero.
        if b.x.abs() <= nstar || b.x.signum() != dx.signum() {
            return false;
        }
        // The parameter must be moving into the infinite side of the domain.
        let Segment::Pattern { domain, .. } = &w.segments()[a.seg] else {
            return false;
        };
        let ok = match (domain, direction) {
            (Domain::Omega { .. }, Direction::Forward) => dn > 0,
            (Domain::Omega { .. }, Direction::Backward) => false,
            (Domain::OmegaStar { .. }, Direction::Forward) => false,
            (Domain::OmegaStar { .. }, Direction::Backward) => dn > 0,
            (Domain::Zeta, _) => true,
        };
        if !ok || b.n.abs() <= nstar || b.n.signum() != dn.signum() {
            return false;
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Symbolic chain tracing over affine point families.
// ---------------------------------------------------------------------------

/// Result of tracing a whole affine family of points at once. `Terminates`
/// covers every point of the family from `from_q` on; smaller parameters
/// must be checked concretely by the caller.
enum SymOutcome {
    Terminates { from_q: i64 },
    Inconclusive,
}

/// A symbolic position: pattern segment, block offset, and the block
/// parameter as an affine function of the family parameter `q`.
#[derive(Clone, Copy, PartialEq, Eq)]
struct SymPos {
    seg: usize,
    k: usize,
    m: AffineMap,
}

const SYM_MAX_STEPS: usize = 128;
const SYM_MAX_RAISES: usize = 64;

struct SymTracer<'a> {
    w: &'a TransfiniteWord,
    /// Comparisons and domain checks hold uniformly for `q >= q0`; resolving
    /// a crossing raises `q0` (a bounded number of times).
    q0: i64,
    raises: usize,
    nstar: i64,
}

impl<'a> SymTracer<'a> {
    /// Raise `q0` to at least `v`; fails (returns false) once the raise
    /// allowance is spent.
    fn raise(&mut self, v: i64) -> bool {
        if self.raises >= SYM_MAX_RAISES {
            return false;
        }
        self.raises += 1;
        if v > self.q0 {
            self.q0 = v;
        }
        true
    }

    /// Sign of `f(q)` for all `q >= q0`, raising `q0` past a crossing if
    /// needed. `None` when the allowance is spent.
    fn uniform_sign(&mut self, f: AffineMap) -> Option<i64> {
        let v0 = f.eval(self.q0);
        if f.coeff == 0 {
            return Some(v0.signum());
        }
        // Raise past the root so the sign is that of the slope.
        let root = -f.offset / f.coeff;
        let clear = root + 2;
        if clear > self.q0 && !self.raise(clear) {
            return None;
        }
        Some(f.coeff.signum())
    }

    /// Uniform strict order between two in-segment position keys (affine in
    /// `q`), with block offsets as tie-breakers.
    fn key_cmp(&mut self, ka: AffineMap, kka: usize, kb: AffineMap, kkb: usize) -> Option<std::cmp::Ordering> {
        let d = AffineMap::new(ka.coeff - kb.coeff, ka.offset - kb.offset);
        match self.uniform_sign(d)? {
            s if s < 0 => Some(std::cmp::Ordering::Less),
            s if s > 0 => Some(std::cmp::Ordering::Greater),
            _ => Some(kka.cmp(&kkb)),
        }
    }

    /// All occurrences of the symbolic point `p` as symbolic positions that
    /// exist uniformly for `q >= q0`. Returns `None` when a candidate's
    /// existence is not uniform (family would need further splitting).
    fn occurrences(&mut self, p: AffineMap) -> Option<Vec<(SymPos, AffineMap)>> {
        // The point is non-constant in q, so for q past the stability raise
        // it misses every explicit letter; make sure of that first.
        debug_assert!(p.coeff != 0);
        let clear_mag = self.nstar + 1;
        // |p(q)| > nstar for all q >= q0: raise past both roots.
        for target in [clear_mag, -clear_mag] {
            let root = (target - p.offset) / p.coeff;
            if !self.raise(root + 2) {
                return None;
            }
        }
        let mut out = Vec::new();
        for (seg_idx, seg) in self.w.segments().iter().enumerate() {
            let Segment::Pattern { domain, block } = seg else { continue };
            for (k, t) in block.iter().enumerate() {
                let LetterTemplate::T { a, b } = t else { return None };
                for (coord, other) in [(a, b), (b, a)] {
                    match self.solve_coord(*coord, p) {
                        CoordSolve::NoSolution => {}
                        CoordSolve::NonUniform => return None,
                        CoordSolve::Uniform(m) => {
                            match self.domain_uniform(*domain, m) {
                                Some(true) => {
                                    let newp = AffineMap::new(
                                        other.coeff * m.coeff,
                                        other.coeff * m.offset + other.offset,
                                    );
                                    out.push((SymPos { seg: seg_idx, k, m }, newp));
                                }
                                Some(false) => {}
                                None => return None,
                            }
                        }
                    }
                }
            }
        }
        Some(out)
    }

    /// Does `m(q)` lie in the domain for all `q >= q0` (raising past a
    /// boundary crossing when the parameter heads inward)?
    fn domain_uniform(&mut self, domain: Domain, m: AffineMap) -> Option<bool> {
        let start = match domain {
            Domain::Zeta => return Some(true),
            Domain::Omega { start } | Domain::OmegaStar { start } => start,
        };
        // Need m(q) >= start.
        let d = AffineMap::new(m.coeff, m.offset - start);
        match self.uniform_sign(d)? {
            s if s < 0 => Some(false),
            0 => Some(m.offset - start >= 0),
            _ => Some(true),
        }
    }

    fn solve_coord(&self, coord: AffineMap, p: AffineMap) -> CoordSolve {
        // coord.coeff * m + coord.offset = p(q).
        let cc = coord.coeff;
        if cc == 0 {
            // Constant coordinate: p(q) equals it for at most one q.
            return CoordSolve::NoSolution;
        }
        let num = AffineMap::new(p.coeff, p.offset - coord.offset);
        if num.coeff % cc == 0 && num.offset % cc == 0 {
            CoordSolve::Uniform(AffineMap::new(num.coeff / cc, num.offset / cc))
        } else {
            // Solvable for some q iff gcd(cc, num.coeff) divides num.offset.
            let g = gcd_i64(cc, num.coeff);
            if num.offset % g == 0 {
                CoordSolve::NonUniform
            } else {
                CoordSolve::NoSolution
            }
        }
    }

    /// The position key of a symbolic position inside its segment, affine in
    /// `q`, matching the concrete position ordering.
    fn sym_key(&self, sp: SymPos) -> AffineMap {
        let Segment::Pattern { domain, .. } = &self.w.segments()[sp.seg] else {
            unreachable!();
        };
        match domain {
            Domain::Omega { .. } | Domain::Zeta => sp.m,
            Domain::OmegaStar { .. } => AffineMap::new(-sp.m.coeff, -sp.m.offset),
        }
    }

    /// One full symbolic trace; `p0` is the starting point family in `q`.
    fn trace(&mut self, p0: AffineMap, direction: Direction) -> SymOutcome {
        let mut p = p0;
        let mut cur: Option<SymPos> = None;
        for _ in 0..SYM_MAX_STEPS {
            let Some(cands) = self.occurrences(p) else { return SymOutcome::Inconclusive };
            // Keep candidates strictly beyond the current position.
            let mut viable: Vec<(SymPos, AffineMap)> = Vec::new();
            for (sp, newp) in cands {
                let keep = match cur {
                    None => true,
                    Some(c) => {
                        if sp.seg != c.seg {
                            match direction {
                                Direction::Forward => sp.seg > c.seg,
                                Direction::Backward => sp.seg < c.seg,
                            }
                        } else {
                            let ka = self.sym_key(sp);
                            let kb = self.sym_key(c);
                            match self.key_cmp(ka, sp.k, kb, c.k) {
                                None => return SymOutcome::Inconclusive,
                                Some(std::cmp::Ordering::Greater) => {
                                    direction == Direction::Forward
                                }
                                Some(std::cmp::Ordering::Less) => {
                                    direction == Direction::Backward
                                }
                                Some(std::cmp::Ordering::Equal) => false,
                            }
                        }
                    }
                };
                if keep {
                    viable.push((sp, newp));
                }
            }
            let Some(mut best) = viable.pop() else {
                return SymOutcome::Terminates { from_q: self.q0 };
            };
            for cand in viable {
                let earlier = if cand.0.seg != best.0.seg {
                    match direction {
                        Direction::Forward => cand.0.seg < best.0.seg,
                        Direction::Backward => cand.0.seg > best.0.seg,
                    }
                } else {
                    let ka = self.sym_key(cand.0);
                    let kb = self.sym_key(best.0);
                    match self.key_cmp(ka, cand.0.k, kb, best.0.k) {
                        None => return SymOutcome::Inconclusive,
                        Some(std::cmp::Ordering::Less) => direction == Direction::Forward,
                        Some(std::cmp::Ordering::Greater) => direction == Direction::Backward,
                        Some(std::cmp::Ordering::Equal) => false,
                    }
                };
                if earlier {
                    best = cand;
                }
            }
            cur = Some(best.0);
            p = best.1;
        }
        SymOutcome::Inconclusive
    }
}

enum CoordSolve {
    NoSolution,
    NonUniform,
    Uniform(AffineMap),
}

fn gcd_i64(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let r = a % b;
        a = b;
        b = r;
    }
    a.max(1)
}

/// The affine point families occurring in pattern segments: each template
/// coordinate, one family per residue class of the block parameter modulo
/// the word's slope lcm.
fn point_families(w: &TransfiniteWord) -> Vec<(Domain, AffineMap)> {
    let modulus = w.slope_lcm().max(1);
    let mut fams = Vec::new();
    for seg in w.segments() {
        let Segment::Pattern { domain, block } = seg else { continue };
        for t in block {
            let LetterTemplate::T { a, b } = t else { continue };
            for coord in [a, b] {
                if coord.coeff == 0 {
                    continue;
                }
                for r in 0..modulus {
                    // Parameter n = base + modulus * q; the family in q.
                    let base = match domain {
                        Domain::Omega { start } | Domain::OmegaStar { start } => start + r,
                        Domain::Zeta => r,
                    };
                    let fam = AffineMap::new(coord.coeff * modulus, coord.eval(base));
                    fams.push((*domain, fam));
                    if *domain == Domain::Zeta {
                        // Also cover the descending ray n = -base - modulus*q.
                        let neg =
                            AffineMap::new(-coord.coeff * modulus, coord.eval(-base));
                        fams.push((*domain, neg));
                    }
                }
            }
        }
    }
    fams
}

/// Decides membership of `w` in the admissible set: every point's chain is
/// finite in both directions. Exact for affine pattern words whenever the
/// symbolic family analysis is conclusive; otherwise Unknown.
pub fn membership_s(
    w: &TransfiniteWord,
    test_points: &[i64],
    budget: u64,
) -> Result<AdmissibilityVerdict> {
    require_transpositions(w)?;
    let mut budget_used = 0u64;

    // A point mentioned by a constant template coordinate occurs infinitely
    // often, violating the finite-occurrence precondition.
    for seg in w.segments() {
        if let Segment::Pattern { block, .. } = seg {
            for t in block {
                if let LetterTemplate::T { a, b } = t {
                    for coord in [a, b] {
                        if coord.coeff == 0 {
                            return Ok(AdmissibilityVerdict::refuted(
                                Witness {
                                    point: coord.offset,
                                    direction: Direction::Forward,
                                    chain_prefix: vec![coord.offset],
                                },
                                budget_used,
                            ));
                        }
                    }
                }
            }
        }
    }

    let nstar = w.affine_magnitude();
    let mut inconclusive = false;

    // Symbolic interior families; each conclusive family covers all of its
    // points from some parameter on, and contributes the earlier ones to the
    // concrete worklist.
    let mut concrete: BTreeSet<i64> = test_points.iter().copied().collect();
    concrete.extend(w.boundary_points(2)?);
    for x in -(2 * nstar + 2)..=(2 * nstar + 2) {
        concrete.insert(x);
    }
    for (_, fam) in point_families(w) {
        for direction in [Direction::Forward, Direction::Backward] {
            let mut tracer = SymTracer { w, q0: 0, raises: 0, nstar };
            match tracer.trace(fam, direction) {
                SymOutcome::Terminates { from_q } => {
                    for q in 0..from_q.max(0) {
                        concrete.insert(fam.eval(q));
                    }
                }
                SymOutcome::Inconclusive => {
                    // Sample a few members concretely; they may still yield a
                    // divergence certificate.
                    for q in 0..4 {
                        concrete.insert(fam.eval(q));
                    }
                    inconclusive = true;
                }
            }
        }
    }

    for &x in &concrete {
        for direction in [Direction::Forward, Direction::Backward] {
            let trace = chain_trace(w, x, direction, budget)?;
            budget_used += trace.steps() as u64;
            match trace.outcome {
                ChainOutcome::Terminated => {}
                ChainOutcome::Diverges { .. } => {
                    let prefix: Vec<i64> = trace.points.iter().take(16).copied().collect();
                    return Ok(AdmissibilityVerdict::refuted(
                        Witness { point: x, direction, chain_prefix: prefix },
                        budget_used,
                    ));
                }
                ChainOutcome::BudgetExhausted { .. } => {
                    inconclusive = true;
                }
            }
        }
    }

    if inconclusive {
        Ok(AdmissibilityVerdict::unknown(budget_used))
    } else {
        Ok(AdmissibilityVerdict::verified(budget_used))
    }
}

/// Decides membership in the stronger admissible set: every interval
/// restriction of `w` is admissible. The representation admits a finite
/// sufficient family of interval cuts: segment boundaries plus in-pattern
/// cuts through one full residue period (tails cut at congruent parameters
/// normalize to identical words).
pub fn membership_s_prime(
    w: &TransfiniteWord,
    test_points: &[i64],
    budget: u64,
) -> Result<AdmissibilityVerdict> {
    require_transpositions(w)?;
    if w.is_finite() {
        return Ok(AdmissibilityVerdict::verified(0));
    }
    let mut budget_used = 0u64;
    let mut unknown = false;

    let cuts = interval_cuts(w);
    // Rays: everything from a cut onward, and everything before a cut; plus
    // the whole word.
    let mut intervals: Vec<TransfiniteWord> = vec![w.clone()];
    for c in &cuts {
        intervals.push(w.suffix_from(c)?);
        intervals.push(w.prefix_before(c)?);
    }
    // Middles spanning at least one segment boundary (middles inside a
    // single pattern segment are finite, hence trivially admissible).
    for a in &cuts {
        for b in &cuts {
            if a.segment < b.segment {
                let tail = w.suffix_from(a)?;
                // Cut positions keep their segment indices relative to the
                // suffix start; relocate b.
                let reb = Position { segment: b.segment - a.segment, inner: b.inner };
                if let Ok(mid) = relocate_prefix(&tail, &reb) {
                    intervals.push(mid);
                }
            }
        }
    }

    for iv in &intervals {
        let v = membership_s(iv, test_points, budget)?;
        budget_used += v.budget_used;
        match v.status {
            Status::Refuted => {
                return Ok(AdmissibilityVerdict { status: Status::Refuted, witness: v.witness, budget_used });
            }
            Status::Unknown => unknown = true,
            Status::Verified => {}
        }
    }
    if unknown {
        Ok(AdmissibilityVerdict::unknown(budget_used))
    } else {
        Ok(AdmissibilityVerdict::verified(budget_used))
    }
}

/// `prefix_before(b)` on a word whose segment layout matches `b`'s frame;
/// fails harmlessly when normalization moved the cut out of range.
fn relocate_prefix(w: &TransfiniteWord, b: &Position) -> Result<TransfiniteWord> {
    if b.segment >= w.segments().len() {
        return Err(Error::NoSuchPosition("cut beyond word".into()));
    }
    w.prefix_before(b)
}

/// Cut positions: every explicit index, and pattern parameters through two
/// full residue periods past the domain edge (for zeta, symmetric around 0).
fn interval_cuts(w: &TransfiniteWord) -> Vec<Position> {
    let span = 2 * w.slope_lcm().max(1) + 2;
    let mut cuts = Vec::new();
    for (si, seg) in w.segments().iter().enumerate() {
        match seg {
            Segment::Explicit(ls) => {
                for i in 0..ls.len() {
                    cuts.push(Position { segment: si, inner: SegPos::At(i) });
                }
            }
            Segment::Pattern { domain, block } => {
                let ns: Vec<i64> = match domain {
                    Domain::Omega { start } | Domain::OmegaStar { start } => {
                        (*start..*start + span).collect()
                    }
                    Domain::Zeta => (-span..=span).collect(),
                };
                for n in ns {
                    for k in 0..block.len() {
                        cuts.push(Position { segment: si, inner: SegPos::Block { n, k } });
                    }
                }
            }
        }
    }
    cuts
}

/// The permutation induced by an admissible word, evaluated lazily per
/// point: forward chain terminal for the image, backward for the preimage.
#[derive(Debug, Clone)]
pub struct LazyPermutation {
    word: TransfiniteWord,
    budget: u64,
}

impl LazyPermutation {
    pub fn word(&self) -> &TransfiniteWord {
        &self.word
    }

    pub fn apply(&self, x: i64) -> Result<i64> {
        self.eval(x, Direction::Forward)
    }

    pub fn apply_inverse(&self, x: i64) -> Result<i64> {
        self.eval(x, Direction::Backward)
    }

    fn eval(&self, x: i64, direction: Direction) -> Result<i64> {
        let trace = chain_trace(&self.word, x, direction, self.budget)?;
        match trace.outcome {
            ChainOutcome::Terminated => Ok(*trace.points.last().unwrap()),
            ChainOutcome::Diverges { .. } => Err(Error::Precondition(format!(
                "chain of point {x} diverges; the word is not admissible"
            ))),
            ChainOutcome::BudgetExhausted { budget } => {
                Err(Error::BudgetExhausted { budget, during: format!("chain of point {x}") })
            }
        }
    }
}

/// The evaluation homomorphism: word -> permutation, queried point by point.
/// The caller is expected to have verified admissibility; evaluation itself
/// still reports divergence honestly.
pub fn eval_p(w: &TransfiniteWord, budget: u64) -> Result<LazyPermutation> {
    require_transpositions(w)?;
    Ok(LazyPermutation { word: w.clone(), budget })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RelatorFamily {
    /// `T(x,y) T(x,y)`.
    Involution,
    /// `[T(x,y), T(z,w)]` with four distinct points.
    DisjointCommutator,
    /// `T(x,y) T(x,z) T(x,y)^-1 T(y,z)^-1` with three distinct points.
    Triple,
}

/// All relator instances over the given finite point set, tagged by family.
pub fn sigma_relators(points: &[i64]) -> Vec<(RelatorFamily, Vec<Letter>)> {
    let pts: Vec<i64> = {
        let s: BTreeSet<i64> = points.iter().copied().collect();
        s.into_iter().collect()
    };
    let t = |a: i64, b: i64| Letter::T(TranspositionLetter::new(a, b).unwrap());
    let mut out = Vec::new();
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            out.push((RelatorFamily::Involution, vec![t(x, y), t(x, y)]));
        }
    }
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            for (j, &z) in pts.iter().enumerate() {
                for &v in &pts[j + 1..] {
                    if (x, y) < (z, v) && x != z && x != v && y != z && y != v {
                        out.push((
                            RelatorFamily::DisjointCommutator,
                            vec![t(x, y), t(z, v), t(y, x), t(v, z)],
                        ));
                    }
                }
            }
        }
    }
    for &x in &pts {
        for &y in &pts {
            for &z in &pts {
                if x != y && x != z && y != z {
                    out.push((
                        RelatorFamily::Triple,
                        vec![t(x, y), t(x, z), t(y, x), t(z, y)],
                    ));
                }
            }
        }
    }
    out
}

/// Membership in the basic neighborhood of the identity determined by the
/// finite point set `c`: the projection of `g` to letters inside `c` freely
/// reduces to nothing, and the chain of every point of `c` returns to it.
pub fn neighborhood_wc(g: &TransfiniteWord, c: &BTreeSet<i64>, budget: u64) -> Result<bool> {
    require_transpositions(g)?;
    let mut sub = BTreeSet::new();
    for &x in c {
        for &y in c {
            if x != y {
                sub.insert(Letter::T(TranspositionLetter::new(x, y)?));
            }
        }
    }
    let projected = g.project_to_subalphabet(&sub)?;
    if !reduce_finite(&projected).is_empty() {
        return Ok(false);
    }
    for &x in c {
        let trace = chain_trace(g, x, Direction::Forward, budget)?;
        match trace.outcome {
            ChainOutcome::Terminated => {
                if trace.terminal() != Some(x) {
                    return Ok(false);
                }
            }
            ChainOutcome::Diverges { .. } => {
                return Err(Error::Precondition(format!(
                    "chain of point {x} diverges; the word is not admissible"
                )));
            }
            ChainOutcome::BudgetExhausted { budget } => {
                return Err(Error::BudgetExhausted { budget, during: format!("chain of point {x}") });
            }
        }
    }
    Ok(true)
}

/// Convenience: with what direction does the inverse word trace a point?
/// (The backward chain of `w` and the forward chain of `w^-1` agree.)
pub fn inverse_direction(d: Direction) -> Direction {
    d.flip()
}
