//! Automorphism realization for Nielsen words.
//!
//! A word over the Nielsen alphabet induces an automorphism of the free group
//! on `x1, x2, ...` when it satisfies two admissibility conditions: every
//! generator occurs as a head only finitely often, and no infinite forward
//! chain of head/tail matches exists in either reading direction.  This module
//! provides:
//!
//! * finite-support automorphisms of the free group, with composition,
//!   inversion and decomposition into a signed permutation times a finite
//!   Nielsen word;
//! * the support closure of a generator under a word, and evaluation of the
//!   induced automorphism on arbitrary free-group elements;
//! * the admissibility check with explicit refutation witnesses;
//! * backward-chain length bounds, split/derived forms and the iterated
//!   relator-times-automorphism factorization;
//! * the standard elementary-automorphism relators and words realizing signed
//!   permutations, including infinite-support realizations of a single
//!   inversion and of an infinite cycle.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::freegroup::{nielsen_reduce, FreeWord, NielsenMove, Tuple};
use crate::letters::{AffineMap, Alphabet, GenSym, Letter, LetterTemplate, NielsenLetter, SolveSet, SymTemplate};
use crate::sym::Status;
use crate::word::{reduce_finite, Domain, Position, Segment, TransfiniteWord};

/// Default step budget used by constructors that cannot take one explicitly.
const DEFAULT_BUDGET: u64 = 10_000;

// ---------------------------------------------------------------------------
// Finite-support automorphisms
// ---------------------------------------------------------------------------

/// An automorphism of the free group on `x1, x2, ...` that moves only
/// finitely many generators, stored by its images `x_i -> images[i-1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinSuppAutomorphism {
    images: Vec<FreeWord>,
}

impl FinSuppAutomorphism {
    pub fn identity() -> Self {
        FinSuppAutomorphism { images: Vec::new() }
    }

    fn normalized(mut images: Vec<FreeWord>) -> Self {
        while let Some(last) = images.last() {
            let i = images.len() as u32;
            if last.letters() == [GenSym::pos(i)] {
                images.pop();
            } else {
                break;
            }
        }
        FinSuppAutomorphism { images }
    }

    /// Builds from generator images and certifies invertibility by reducing
    /// the image tuple to a signed basis.
    pub fn from_images(images: Vec<FreeWord>) -> Result<Self> {
        let cand = Self::normalized(images);
        // Fails with NotInvertible when the images are not a basis.
        cand.to_signed_basis()?;
        Ok(cand)
    }

    /// The single elementary automorphism `head -> head * tail`.
    pub fn elementary(l: NielsenLetter) -> Self {
        let i = l.head.index;
        let mut images: Vec<FreeWord> =
            (1..=i).map(FreeWord::gen).collect();
        let tail = FreeWord::letter(l.tail);
        let img = if l.head.sign > 0 {
            FreeWord::gen(i).mul(&tail)
        } else {
            tail.inverse().mul(&FreeWord::gen(i))
        };
        images[i as usize - 1] = img;
        Self::normalized(images)
    }

    pub fn monomial(m: &MonomialAutomorphism) -> Self {
        let bound = m.support().into_iter().max().unwrap_or(0);
        let images = (1..=bound)
            .map(|i| FreeWord::letter(m.apply_gen(GenSym::pos(i))))
            .collect();
        Self::normalized(images)
    }

    /// Number of generators with a stored (possibly moved) image.
    pub fn support_bound(&self) -> u32 {
        self.images.len() as u32
    }

    pub fn is_identity(&self) -> bool {
        self.images.is_empty()
    }

    pub fn image_of(&self, i: u32) -> FreeWord {
        match self.images.get(i as usize - 1) {
            Some(w) => w.clone(),
            None => FreeWord::gen(i),
        }
    }

    /// Applies the automorphism to a free word (right action by
    /// substitution).
    pub fn apply(&self, w: &FreeWord) -> FreeWord {
        let mut out = FreeWord::identity();
        for g in w.letters() {
            out = out.mul(&self.image_of(g.index).pow_sign(g.sign));
        }
        out
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &FinSuppAutomorphism) -> Self {
        let bound = self.support_bound().max(other.support_bound());
        let images = (1..=bound)
            .map(|i| other.apply(&self.image_of(i)))
            .collect();
        Self::normalized(images)
    }

    /// Largest image length over the support; a crude size measure.
    pub fn norm(&self) -> usize {
        self.images.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// The induced signed permutation, when every image is a single letter.
    pub fn to_monomial(&self) -> Option<MonomialAutomorphism> {
        let mut map = BTreeMap::new();
        for (i, w) in self.images.iter().enumerate() {
            if w.len() != 1 {
                return None;
            }
            map.insert(i as u32 + 1, w.letters()[0]);
        }
        MonomialAutomorphism::from_map(map).ok()
    }

    /// Reduces the image tuple to a signed permutation of the basis and
    /// records one elementary letter per reduction move.  Returns the signed
    /// permutation together with the letters in move order (first move
    /// first); the automorphism equals "apply the letters in *reverse* move
    /// order, then undo the permutation" — see [`Self::inverse`].
    fn to_signed_basis(&self) -> Result<(MonomialAutomorphism, Vec<NielsenLetter>)> {
        let m = self
            .images
            .iter()
            .map(|w| w.max_index() as usize)
            .chain([self.images.len(), 1])
            .max()
            .unwrap();
        let tuple = Tuple((1..=m as u32).map(|i| self.image_of(i)).collect());
        let budget = DEFAULT_BUDGET + 100 * tuple.0.iter().map(|w| w.len() as u64).sum::<u64>();
        let (reduced, moves) = nielsen_reduce(&tuple, budget)?;
        let mut letters = Vec::new();
        for mv in &moves {
            match mv {
                NielsenMove::T { i, eps, j, tau } => {
                    let head = GenSym::new(*i as u32, *eps)?;
                    let tail = GenSym::new(*j as u32, *tau)?;
                    letters.push(NielsenLetter::new(head, tail)?);
                }
                other => {
                    return Err(Error::NotInvertible(format!(
                        "image tuple required a non-multiplication move {other}"
                    )))
                }
            }
        }
        let mut map = BTreeMap::new();
        for (i, w) in reduced.0.iter().enumerate() {
            if w.len() != 1 {
                return Err(Error::NotInvertible(format!(
                    "images do not form a basis: entry {} reduced to {w}",
                    i + 1
                )));
            }
            map.insert(i as u32 + 1, w.letters()[0]);
        }
        Ok((MonomialAutomorphism::from_map(map)?, letters))
    }

    /// Inverse automorphism, computed from the reduction move log.
    pub fn inverse(&self) -> Result<FinSuppAutomorphism> {
        // Reducing the tuple (x_i self) by moves A_1..A_T yields X sigma,
        // where the composite action is "A_T, then ..., then A_1, then self".
        // Hence self^{-1} = sigma^{-1}, then A_T, ..., then A_1.
        let (sigma, letters) = self.to_signed_basis()?;
        let mut acc = Self::monomial(&sigma.inverse());
        for l in letters.iter().rev() {
            acc = acc.compose(&Self::elementary(*l));
        }
        if !self.compose(&acc).is_identity() {
            return Err(Error::Defect("inverse does not invert".into()));
        }
        Ok(acc)
    }
}

/// A finite-support signed permutation of the generators.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialAutomorphism {
    map: BTreeMap<u32, GenSym>,
}

impl MonomialAutomorphism {
    pub fn identity() -> Self {
        MonomialAutomorphism { map: BTreeMap::new() }
    }

    /// `x_i -> map[i]` (identity off the support).  The index parts must
    /// permute the support.
    pub fn from_map(map: BTreeMap<u32, GenSym>) -> Result<Self> {
        let mut cleaned = BTreeMap::new();
        for (&i, &g) in &map {
            if g != GenSym::pos(i) {
                cleaned.insert(i, g);
            }
        }
        let keys: BTreeSet<u32> = cleaned.keys().copied().collect();
        let vals: BTreeSet<u32> = cleaned.values().map(|g| g.index).collect();
        if keys != vals {
            return Err(Error::NotInvertible(
                "index images do not permute the moved generators".into(),
            ));
        }
        if cleaned.values().map(|g| g.index).collect::<Vec<_>>().len() != vals.len() {
            return Err(Error::NotInvertible("repeated index image".into()));
        }
        Ok(MonomialAutomorphism { map: cleaned })
    }

    pub fn transposition(a: u32, b: u32) -> Result<Self> {
        if a == b {
            return Err(Error::Precondition("transposition needs two generators".into()));
        }
        Self::from_map(BTreeMap::from([(a, GenSym::pos(b)), (b, GenSym::pos(a))]))
    }

    pub fn inversions(set: &BTreeSet<u32>) -> Self {
        MonomialAutomorphism {
            map: set.iter().map(|&i| (i, GenSym::neg(i))).collect(),
        }
    }

    pub fn support(&self) -> BTreeSet<u32> {
        self.map.keys().copied().collect()
    }

    pub fn is_identity(&self) -> bool {
        self.map.is_empty()
    }

    pub fn apply_gen(&self, g: GenSym) -> GenSym {
        match self.map.get(&g.index) {
            Some(&img) => {
                if g.sign > 0 {
                    img
                } else {
                    img.inverse()
                }
            }
            None => g,
        }
    }

    pub fn inverse(&self) -> Self {
        let map = self
            .map
            .iter()
            .map(|(&i, &g)| (g.index, GenSym::new(i, g.sign).expect("valid sign")))
            .collect();
        MonomialAutomorphism { map }
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &MonomialAutomorphism) -> Self {
        let support: BTreeSet<u32> =
            self.support().union(&other.support()).copied().collect();
        let map = support
            .into_iter()
            .map(|i| (i, other.apply_gen(self.apply_gen(GenSym::pos(i)))))
            .filter(|&(i, g)| g != GenSym::pos(i))
            .collect();
        MonomialAutomorphism { map }
    }
}

/// Folds a finite sequence of elementary letters into the automorphism they
/// induce (letters act in the given order).
pub fn automorphism_of_letters<'a, I>(letters: I) -> Result<FinSuppAutomorphism>
where
    I: IntoIterator<Item = &'a Letter>,
{
    let mut acc = FinSuppAutomorphism::identity();
    for l in letters {
        match l {
            Letter::E(e) => acc = acc.compose(&FinSuppAutomorphism::elementary(*e)),
            Letter::T(_) => {
                return Err(Error::MixedAlphabets(
                    "transposition letter in an automorphism word".into(),
                ))
            }
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Decomposition into signed permutation times a Nielsen word
// ---------------------------------------------------------------------------

/// Writes `alpha` as a signed permutation followed by the action of a finite
/// word of elementary letters: `alpha = sigma . Psi(word)`, with the word's
/// letters applied in the order returned.
pub fn decompose_automorphism(
    alpha: &FinSuppAutomorphism,
) -> Result<(MonomialAutomorphism, Vec<NielsenLetter>)> {
    let inv = alpha.inverse()?;
    // Reducing X alpha^{-1} by moves A_1..A_T gives sigma_v with
    // "A_T, ..., A_1, alpha^{-1}" = sigma_v, so
    // alpha = sigma_v^{-1}, then A_T, ..., then A_1.
    let (sigma_v, letters) = inv.to_signed_basis()?;
    let sigma = sigma_v.inverse();
    let word: Vec<NielsenLetter> = letters.into_iter().rev().collect();
    let mut check = FinSuppAutomorphism::monomial(&sigma);
    for l in &word {
        check = check.compose(&FinSuppAutomorphism::elementary(*l));
    }
    if &check != alpha {
        return Err(Error::Defect("decomposition does not recompose".into()));
    }
    Ok((sigma, word))
}

// ---------------------------------------------------------------------------
// Support closure and evaluation of the induced automorphism
// ---------------------------------------------------------------------------

/// The ascending sequence of positions a generator's support closure visits:
/// starting from the generator itself, each step takes the earliest later
/// position whose head lies in the set collected so far, then adds that
/// letter's tail generator to the set.
#[derive(Debug, Clone)]
pub struct SupportClosure {
    pub positions: Vec<Position>,
    /// Generator indices collected after each step (entry 0 is the start).
    pub sets: Vec<BTreeSet<u32>>,
}

fn require_nielsen(w: &TransfiniteWord) -> Result<()> {
    match w.alphabet() {
        None | Some(Alphabet::Nielsen) => Ok(()),
        Some(Alphabet::Transposition) => Err(Error::Precondition(
            "operation requires a word over the Nielsen alphabet".into(),
        )),
    }
}

pub fn support_closure(w: &TransfiniteWord, x: u32, budget: u64) -> Result<SupportClosure> {
    require_nielsen(w)?;
    let mut set: BTreeSet<u32> = BTreeSet::from([x]);
    let mut sets = vec![set.clone()];
    let mut positions = Vec::new();
    let mut cursor: Option<Position> = None;
    for _ in 0..budget {
        match w.next_head_occ(&set, cursor.as_ref())? {
            None => return Ok(SupportClosure { positions, sets }),
            Some(p) => {
                let e = w
                    .letter_at(&p)?
                    .as_e()
                    .ok_or_else(|| Error::Defect("head occurrence of a non-head letter".into()))?;
                set.insert(e.tail.index);
                sets.push(set.clone());
                positions.push(p);
                cursor = Some(p);
            }
        }
    }
    Err(Error::BudgetExhausted { budget, during: "support closure".into() })
}

/// The image of a single generator under the automorphism induced by `w`.
pub fn psi_generator_image(w: &TransfiniteWord, x: u32, budget: u64) -> Result<FreeWord> {
    let closure = support_closure(w, x, budget)?;
    let mut img = FreeWord::gen(x);
    for p in &closure.positions {
        let e = w.letter_at(p)?.as_e().expect("closure visits head letters");
        img = FinSuppAutomorphism::elementary(e).apply(&img);
    }
    Ok(img)
}

/// Evaluates the automorphism induced by `w` on a free word.
pub fn apply_psi(w: &TransfiniteWord, v: &FreeWord, budget: u64) -> Result<FreeWord> {
    require_nielsen(w)?;
    let mut cache: HashMap<u32, FreeWord> = HashMap::new();
    let mut out = FreeWord::identity();
    for g in v.letters() {
        if !cache.contains_key(&g.index) {
            let img = psi_generator_image(w, g.index, budget)?;
            cache.insert(g.index, img);
        }
        out = out.mul(&cache[&g.index].pow_sign(g.sign));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Admissibility
// ---------------------------------------------------------------------------

/// A refutation witness for the chain condition: the head indices of the
/// start of an infinite ascending chain of head/tail matches.  `reversed`
/// marks witnesses found in the formally inverted word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainWitness {
    pub reversed: bool,
    pub head_indices: Vec<i64>,
}

/// Outcome of the two-part admissibility check for Nielsen words.
#[derive(Debug, Clone)]
pub struct AutAdmissibility {
    /// Finite head occurrences for every generator.
    pub s0: Status,
    pub s0_unbounded_index: Option<u32>,
    /// No infinite forward chain in the word itself.
    pub s1: Status,
    /// No infinite forward chain in the formally inverted word.
    pub s1_bar: Status,
    pub witness: Option<ChainWitness>,
    pub status: Status,
}

fn worst(statuses: &[Status]) -> Status {
    if statuses.contains(&Status::Refuted) {
        Status::Refuted
    } else if statuses.contains(&Status::Unknown) {
        Status::Unknown
    } else {
        Status::Verified
    }
}

#[derive(Clone)]
struct SlotEdge {
    to: usize,
    shift: i64,
}

/// Looks for an infinite ascending chain of letters where each next letter's
/// head generator matches the previous letter's tail generator (up to sign).
/// Such a chain must eventually stay inside one ascending pattern segment and
/// follow block-shift edges whose subscript maps agree infinitely often, so a
/// cycle among those edges is both necessary and sufficient.
fn chain_cycle(w: &TransfiniteWord) -> Option<Vec<i64>> {
    for seg in w.segments() {
        let (domain, block) = match seg {
            Segment::Pattern { domain, block } => (*domain, block),
            Segment::Explicit(_) => continue,
        };
        // Only segments whose positions ascend without bound with the block
        // parameter can host an infinite ascending chain.
        match domain {
            Domain::Omega { .. } | Domain::Zeta => {}
            Domain::OmegaStar { .. } => continue,
        }
        let maps: Vec<(AffineMap, AffineMap)> = block
            .iter()
            .map(|t| match t {
                LetterTemplate::E { head, tail } => (head.index, tail.index),
                LetterTemplate::T { .. } => (AffineMap::constant(0), AffineMap::constant(0)),
            })
            .collect();
        let mut edges: Vec<Vec<SlotEdge>> = vec![Vec::new(); maps.len()];
        for (k, &(_, t)) in maps.iter().enumerate() {
            if t.coeff < 1 {
                continue; // constant tails match any fixed head map finitely often
            }
            for (k2, &(h, _)) in maps.iter().enumerate() {
                if h.coeff != t.coeff {
                    continue;
                }
                let diff = t.offset - h.offset;
                if diff % t.coeff != 0 {
                    continue;
                }
                let d = diff / t.coeff;
                if d > 0 || (d == 0 && k2 > k) {
                    edges[k].push(SlotEdge { to: k2, shift: d });
                }
            }
        }
        // Depth-first search for a directed cycle.
        let n = maps.len();
        let mut state = vec![0u8; n]; // 0 unvisited, 1 on stack, 2 done
        let mut stack: Vec<(usize, usize)> = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            state[start] = 1;
            stack.push((start, 0));
            while let Some(&mut (node, ref mut ei)) = stack.last_mut() {
                if *ei >= edges[node].len() {
                    state[node] = 2;
                    stack.pop();
                    continue;
                }
                let e = &edges[node][*ei];
                *ei += 1;
                if state[e.to] == 1 {
                    // Found a cycle: slots from e.to up the stack to node.
                    let from = stack.iter().position(|&(s, _)| s == e.to).unwrap();
                    let cycle: Vec<usize> = stack[from..].iter().map(|&(s, _)| s).collect();
                    return Some(witness_from_cycle(domain, &maps, &edges, &cycle));
                }
                if state[e.to] == 0 {
                    state[e.to] = 1;
                    stack.push((e.to, 0));
                }
            }
        }
    }
    None
}

fn witness_from_cycle(
    domain: Domain,
    maps: &[(AffineMap, AffineMap)],
    edges: &[Vec<SlotEdge>],
    cycle: &[usize],
) -> Vec<i64> {
    let shift_of = |from: usize, to: usize| -> i64 {
        edges[from]
            .iter()
            .find(|e| e.to == to)
            .map(|e| e.shift)
            .unwrap_or(0)
    };
    let total: i64 = (0..cycle.len())
        .map(|i| shift_of(cycle[i], cycle[(i + 1) % cycle.len()]).abs())
        .sum();
    let start = match domain {
        Domain::Omega { start } | Domain::OmegaStar { start } => start,
        Domain::Zeta => 0,
    };
    let mut n = start + total + 2;
    let mut out = Vec::new();
    for round in 0..2 {
        for i in 0..cycle.len() {
            let k = cycle[i];
            out.push(maps[k].0.eval(n));
            let next = cycle[(i + 1) % cycle.len()];
            if !(round == 1 && i == cycle.len() - 1) {
                n += shift_of(k, next);
            }
        }
    }
    out
}

/// Checks whether a Nielsen word induces an automorphism: finitely many head
/// occurrences per generator, and no infinite head/tail chain in either the
/// word or its formal inverse.
pub fn s0s1_check(w: &TransfiniteWord) -> Result<AutAdmissibility> {
    require_nielsen(w)?;
    let (s0, s0_unbounded_index) = match w.head_occurrences_unbounded() {
        Some(idx) => (Status::Refuted, Some(idx)),
        None => (Status::Verified, None),
    };
    let mut witness = None;
    let s1 = match chain_cycle(w) {
        Some(chain) => {
            witness = Some(ChainWitness { reversed: false, head_indices: chain });
            Status::Refuted
        }
        None => Status::Verified,
    };
    let s1_bar = match chain_cycle(&w.invert()) {
        Some(chain) => {
            if witness.is_none() {
                witness = Some(ChainWitness { reversed: true, head_indices: chain });
            }
            Status::Refuted
        }
        None => Status::Verified,
    };
    let status = worst(&[s0, s1, s1_bar]);
    Ok(AutAdmissibility { s0, s0_unbounded_index, s1, s1_bar, witness, status })
}

// ---------------------------------------------------------------------------
// Backward chains
// ---------------------------------------------------------------------------

/// The largest length of a backward chain for generator `x`: positions
/// strictly descend, the first letter's head is `x` up to sign, and each next
/// (earlier) letter's head matches the previous letter's tail up to sign.
pub fn backward_chain_bound(w: &TransfiniteWord, x: u32, budget: u64) -> Result<u64> {
    require_nielsen(w)?;
    let mut memo: HashMap<Position, u64> = HashMap::new();
    let mut steps = 0u64;
    let starts = w.head_occurrences(&BTreeSet::from([x]))?;
    let mut best = 0;
    for p in starts {
        best = best.max(longest_backward(w, &p, &mut memo, &mut steps, budget)?);
    }
    Ok(best)
}

fn longest_backward(
    w: &TransfiniteWord,
    p: &Position,
    memo: &mut HashMap<Position, u64>,
    steps: &mut u64,
    budget: u64,
) -> Result<u64> {
    // Iterative depth-first walk; chains strictly descend, so the dependency
    // graph is acyclic.
    enum Frame {
        Enter(Position),
        Exit(Position, Vec<Position>),
    }
    let mut stack = vec![Frame::Enter(*p)];
    while let Some(frame) = stack.pop() {
        match frame {
            Frame::Enter(q) => {
                if memo.contains_key(&q) {
                    continue;
                }
                *steps += 1;
                if *steps > budget {
                    return Err(Error::BudgetExhausted {
                        budget,
                        during: "backward chain search".into(),
                    });
                }
                let e = w.letter_at(&q)?.as_e().expect("nielsen word");
                let preds: Vec<Position> = w
                    .head_occurrences(&BTreeSet::from([e.tail.index]))?
                    .into_iter()
                    .filter(|r| w.pos_cmp(r, &q) == std::cmp::Ordering::Less)
                    .collect();
                stack.push(Frame::Exit(q, preds.clone()));
                for r in preds {
                    stack.push(Frame::Enter(r));
                }
            }
            Frame::Exit(q, preds) => {
                let sub = preds.iter().map(|r| memo.get(r).copied().unwrap_or(0)).max();
                memo.insert(q, 1 + sub.unwrap_or(0));
            }
        }
    }
    Ok(memo[p])
}

// ---------------------------------------------------------------------------
// Filtration, split form, rewriting past an elementary letter
// ---------------------------------------------------------------------------

/// The largest `n` such that every head index in the word is at least `n`
/// (i.e. the word's level in the head-index filtration).  `None` for the
/// empty word, which lies in every level.
pub fn filtration_level(w: &TransfiniteWord) -> Result<Option<u32>> {
    require_nielsen(w)?;
    let mut min: Option<i64> = None;
    let mut push = |v: i64| {
        min = Some(match min {
            None => v,
            Some(m) => m.min(v),
        })
    };
    for seg in w.segments() {
        match seg {
            Segment::Explicit(ls) => {
                for l in ls {
                    if let Letter::E(e) = l {
                        push(e.head.index as i64);
                    }
                }
            }
            Segment::Pattern { domain, block } => {
                for t in block {
                    if let LetterTemplate::E { head, .. } = t {
                        // Validated subscript maps have coeff >= 0, so the
                        // minimum over the domain sits at its low end.
                        let v = match domain {
                            Domain::Omega { start } | Domain::OmegaStar { start } => {
                                head.index.eval(*start)
                            }
                            Domain::Zeta => head.index.offset,
                        };
                        push(v);
                    }
                }
            }
        }
    }
    Ok(min.map(|m| m as u32))
}

/// Rewrites `beta` so that it commutes past the elementary letter `alpha`:
/// the returned word `beta_alpha` satisfies `alpha . beta = beta_alpha . alpha`
/// on the level of induced automorphisms.  Requires every head of `beta` to
/// avoid both generators of `alpha`.
pub fn beta_alpha(alpha: NielsenLetter, beta: &TransfiniteWord) -> Result<TransfiniteWord> {
    require_nielsen(beta)?;
    let x = alpha.head;
    let y = alpha.tail;
    check_alpha_admissible(alpha, beta)?;

    // First pass, segment by segment: expand template slots whose tails match
    // the pivot for every block parameter, and peel sporadic matches in
    // reverse-ascending segments into explicit blocks (those segments have no
    // earliest position).  Explicit letters are left to the second pass.
    let mut segments: Vec<Segment> = Vec::new();
    for seg in beta.segments() {
        match seg {
            Segment::Explicit(_) => segments.push(seg.clone()),
            Segment::Pattern { domain, block } => {
                let (expanded, sporadic) = expand_uniform_matches(block, *domain, x, y)?;
                match *domain {
                    Domain::OmegaStar { start } if !sporadic.is_empty() => {
                        let nmax = *sporadic.iter().max().unwrap();
                        segments.push(Segment::Pattern {
                            domain: Domain::OmegaStar { start: nmax + 1 },
                            block: expanded.clone(),
                        });
                        let mut tail = Vec::new();
                        for n in (start..=nmax).rev() {
                            for t in &expanded {
                                tail.push(t.instantiate(n)?);
                            }
                        }
                        segments.push(Segment::Explicit(tail));
                    }
                    _ => segments.push(Segment::Pattern { domain: *domain, block: expanded }),
                }
            }
        }
    }
    let mut rest = TransfiniteWord::from_segments(segments)?;

    // Second pass: the remaining sporadic matches live in ascending segments,
    // so each has an earliest position; split there, rewrite the single
    // letter, and continue on the suffix.
    let mut done: Vec<TransfiniteWord> = Vec::new();
    loop {
        match first_sporadic_match(&rest, x)? {
            None => break,
            Some(p) => {
                let (pre, l, suf) = rest.split3_at(&p)?;
                let mut out = Vec::new();
                rewrite_letter(l, x, y, &mut out)?;
                done.push(pre);
                done.push(TransfiniteWord::from_letters(out)?);
                rest = suf;
            }
        }
    }
    done.push(rest);
    let mut acc = TransfiniteWord::empty();
    for part in done {
        acc = acc.concat(&part)?;
    }
    Ok(acc)
}

fn check_alpha_admissible(alpha: NielsenLetter, beta: &TransfiniteWord) -> Result<()> {
    let banned = [alpha.head.index, alpha.tail.index];
    for seg in beta.segments() {
        match seg {
            Segment::Explicit(ls) => {
                for l in ls {
                    if let Letter::E(e) = l {
                        if banned.contains(&e.head.index) {
                            return Err(Error::Precondition(format!(
                                "word is not admissible for rewriting past {alpha}: letter {l} heads a pivot generator"
                            )));
                        }
                    }
                }
            }
            Segment::Pattern { domain, block } => {
                for t in block {
                    if let LetterTemplate::E { head, .. } = t {
                        for b in banned {
                            let hit = match head.index.solve(b as i64) {
                                SolveSet::One(n) => domain.contains(n),
                                SolveSet::All => true,
                                SolveSet::None => false,
                            };
                            if hit {
                                return Err(Error::Precondition(format!(
                                    "word is not admissible for rewriting past {alpha}: template {t} heads a pivot generator"
                                )));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Rewrites one explicit letter: tails equal to the pivot gain a compensating
/// letter before (same sign) or after (opposite sign).
fn rewrite_letter(l: Letter, x: GenSym, y: GenSym, out: &mut Vec<Letter>) -> Result<()> {
    let e = match l {
        Letter::E(e) => e,
        Letter::T(_) => {
            return Err(Error::MixedAlphabets("transposition letter in a Nielsen word".into()))
        }
    };
    if e.tail == x {
        out.push(Letter::E(NielsenLetter::new(e.head, y.inverse())?));
        out.push(l);
    } else if e.tail == x.inverse() {
        out.push(l);
        out.push(Letter::E(NielsenLetter::new(e.head, y)?));
    } else {
        out.push(l);
    }
    Ok(())
}

/// Expands template slots whose tails match the pivot at *every* block
/// parameter, and reports the block parameters with sporadic matches.
fn expand_uniform_matches(
    block: &[LetterTemplate],
    domain: Domain,
    x: GenSym,
    y: GenSym,
) -> Result<(Vec<LetterTemplate>, BTreeSet<i64>)> {
    let mut out = Vec::new();
    let mut sporadic = BTreeSet::new();
    for t in block {
        let (head, tail) = match t {
            LetterTemplate::E { head, tail } => (*head, *tail),
            LetterTemplate::T { .. } => {
                return Err(Error::MixedAlphabets(
                    "transposition template in a Nielsen word".into(),
                ))
            }
        };
        let mut uniform: Option<bool> = None; // Some(plain?) when matching everywhere
        for (target, plain) in [(x, true), (x.inverse(), false)] {
            if tail.sign != target.sign {
                continue;
            }
            match tail.index.solve(target.index as i64) {
                SolveSet::All => uniform = Some(plain),
                SolveSet::One(n) if domain.contains(n) => {
                    sporadic.insert(n);
                }
                _ => {}
            }
        }
        match uniform {
            Some(true) => {
                out.push(LetterTemplate::E {
                    head,
                    tail: SymTemplate {
                        index: AffineMap::constant(y.index as i64),
                        sign: -y.sign,
                    },
                });
                out.push(t.clone());
            }
            Some(false) => {
                out.push(t.clone());
                out.push(LetterTemplate::E {
                    head,
                    tail: SymTemplate {
                        index: AffineMap::constant(y.index as i64),
                        sign: y.sign,
                    },
                });
            }
            None => out.push(t.clone()),
        }
    }
    Ok((out, sporadic))
}

/// Earliest position whose tail equals the pivot up to sign, in a word whose
/// remaining matches all live in segments with an earliest occurrence.
fn first_sporadic_match(w: &TransfiniteWord, x: GenSym) -> Result<Option<Position>> {
    for (si, seg) in w.segments().iter().enumerate() {
        let mut best: Option<(i64, usize)> = None;
        match seg {
            Segment::Explicit(ls) => {
                for (i, l) in ls.iter().enumerate() {
                    if let Letter::E(e) = l {
                        if e.tail == x || e.tail == x.inverse() {
                            return Ok(Some(Position {
                                segment: si,
                                inner: crate::word::SegPos::At(i),
                            }));
                        }
                    }
                }
            }
            Segment::Pattern { domain, block } => {
                for (k, t) in block.iter().enumerate() {
                    if let LetterTemplate::E { tail, .. } = t {
                        for target in [x, x.inverse()] {
                            if tail.sign != target.sign {
                                continue;
                            }
                            if let SolveSet::One(n) = tail.index.solve(target.index as i64) {
                                if domain.contains(n) {
                                    let key = (domain.key(n), k);
                                    if best.map_or(true, |b| key < b) {
                                        best = Some(key);
                                    }
                                }
                            }
                        }
                    }
                }
                if let Some((key, k)) = best {
                    return Ok(Some(Position {
                        segment: si,
                        inner: crate::word::SegPos::Block { n: domain.n_of_key(key), k },
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// The relator `alpha . beta . alpha^{-1} . beta_alpha^{-1}` witnessing the
/// commutation rewrite.
pub fn relator_alpha_beta(alpha: NielsenLetter, beta: &TransfiniteWord) -> Result<TransfiniteWord> {
    let ba = beta_alpha(alpha, beta)?;
    let a = TransfiniteWord::from_letters(vec![Letter::E(alpha)])?;
    let a_inv = TransfiniteWord::from_letters(vec![Letter::E(alpha.inverse())])?;
    a.concat(beta)?.concat(&a_inv)?.concat(&ba.invert())
}

/// A word cut at the last position of the support closure of its lowest head
/// generator: `w = delta . alpha . beta`.
#[derive(Debug, Clone)]
pub struct SplitForm {
    pub level: u32,
    pub delta: TransfiniteWord,
    pub alpha: NielsenLetter,
    pub beta: TransfiniteWord,
    pub closure: SupportClosure,
}

pub fn split_form(w: &TransfiniteWord, budget: u64) -> Result<SplitForm> {
    let level = filtration_level(w)?
        .ok_or_else(|| Error::Precondition("empty word has no split form".into()))?;
    let closure = support_closure(w, level, budget)?;
    let s_plus = *closure
        .positions
        .last()
        .ok_or_else(|| Error::Defect("lowest head generator has no occurrence".into()))?;
    let (delta, l, beta) = w.split3_at(&s_plus)?;
    let alpha = l.as_e().expect("nielsen word");
    Ok(SplitForm { level, delta, alpha, beta, closure })
}

/// The derived form `w = r . f_bar . alpha` with
/// `r = delta . alpha . beta . alpha^{-1} . beta_alpha^{-1} . delta^{-1}` and
/// `f_bar = delta . beta_alpha`.
#[derive(Debug, Clone)]
pub struct DerivedForm {
    pub split: SplitForm,
    pub r: TransfiniteWord,
    pub f_bar: TransfiniteWord,
}

pub fn derived_form(w: &TransfiniteWord, budget: u64) -> Result<DerivedForm> {
    let split = split_form(w, budget)?;
    let ba = beta_alpha(split.alpha, &split.beta)?;
    let core = relator_alpha_beta(split.alpha, &split.beta)?;
    let r = split.delta.concat(&core)?.concat(&split.delta.invert())?;
    let f_bar = split.delta.concat(&ba)?;
    Ok(DerivedForm { split, r, f_bar })
}

/// Iterated derived forms: `w` equals (as an induced automorphism) the
/// product of the collected relator conjugates, the final residual word, and
/// the collected elementary letters applied in reverse collection order.
#[derive(Debug, Clone)]
pub struct RaFactorization {
    pub relator_parts: Vec<TransfiniteWord>,
    /// Letters in collection order (first peeled letter first); they act
    /// after the residual, last collected first.
    pub alphas: Vec<NielsenLetter>,
    pub residual: TransfiniteWord,
}

impl RaFactorization {
    /// The collected letters as a word, in application order.
    pub fn alpha_word(&self) -> TransfiniteWord {
        let letters = self.alphas.iter().rev().map(|&l| Letter::E(l)).collect();
        TransfiniteWord::from_letters(letters).expect("explicit letters")
    }
}

pub fn factor_ra(w: &TransfiniteWord, depth: u32, budget: u64) -> Result<RaFactorization> {
    let mut residual = w.clone();
    let mut relator_parts = Vec::new();
    let mut alphas = Vec::new();
    for _ in 0..depth {
        if residual.is_empty() {
            break;
        }
        let df = derived_form(&residual, budget)?;
        relator_parts.push(df.r);
        alphas.push(df.split.alpha);
        residual = df.f_bar;
    }
    Ok(RaFactorization { relator_parts, alphas, residual })
}

// ---------------------------------------------------------------------------
// Elementary-automorphism relators
// ---------------------------------------------------------------------------

/// The five standard relator families among elementary automorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GerstenClass {
    /// Inverse convention: `E(a,b)^{-1} = E(a,b^{-1})`.
    InverseConvention,
    /// Disjoint letters commute.
    Commuting,
    /// `[E(a,b), E(b,c)] = E(a,c)`.
    Composition,
    /// Conjugation by the letter-swap word permutes the letters.
    SwapConjugation,
    /// The letter-swap word has order four.
    SwapOrder,
}

/// The three-letter word inducing `a -> b^{-1}, b -> a` (both signed).
pub fn swap_word(a: GenSym, b: GenSym) -> Result<Vec<Letter>> {
    Ok(vec![
        Letter::E(NielsenLetter::new(b, a)?),
        Letter::E(NielsenLetter::new(a.inverse(), b)?),
        Letter::E(NielsenLetter::new(b.inverse(), a.inverse())?),
    ])
}

fn invert_letters(ls: &[Letter]) -> Vec<Letter> {
    ls.iter().rev().map(|l| l.inverse()).collect()
}

/// The signed permutation induced by [`swap_word`].
pub(crate) fn swap_sigma(a: GenSym, b: GenSym, g: GenSym) -> GenSym {
    if g == a {
        b.inverse()
    } else if g == a.inverse() {
        b
    } else if g == b {
        a
    } else if g == b.inverse() {
        a.inverse()
    } else {
        g
    }
}

/// All instances of the five relator families over generators `x1..xn`,
/// as words whose induced automorphism is trivial.
pub fn gersten_relators(n: u32) -> Result<Vec<(GerstenClass, Vec<Letter>)>> {
    let mut out = Vec::new();
    let syms: Vec<GenSym> = (1..=n)
        .flat_map(|i| [GenSym::pos(i), GenSym::neg(i)])
        .collect();
    let letter = |h: GenSym, t: GenSym| -> Result<Letter> {
        Ok(Letter::E(NielsenLetter::new(h, t)?))
    };
    for &a in &syms {
        for &b in &syms {
            if a.index == b.index {
                continue;
            }
            // Inverse convention.
            out.push((GerstenClass::InverseConvention, vec![letter(a, b)?, letter(a, b.inverse())?]));
            // Swap conjugation and swap order.
            if a.sign > 0 && b.sign > 0 {
                let w = swap_word(a, b)?;
                let w_inv = invert_letters(&w);
                for &c in &syms {
                    for &d in &syms {
                        if c.index == d.index {
                            continue;
                        }
                        let sc = swap_sigma(a, b, c);
                        let sd = swap_sigma(a, b, d);
                        let mut rel = w_inv.clone();
                        rel.push(letter(c, d)?);
                        rel.extend(w.iter().copied());
                        rel.push(letter(sc, sd)?.inverse());
                        out.push((GerstenClass::SwapConjugation, rel));
                    }
                }
                let mut pow4 = Vec::new();
                for _ in 0..4 {
                    pow4.extend(w.iter().copied());
                }
                out.push((GerstenClass::SwapOrder, pow4));
            }
            for &c in &syms {
                // Composition relator.
                if c.index != a.index && c.index != b.index {
                    let g = letter(a, b)?;
                    let h = letter(b, c)?;
                    out.push((
                        GerstenClass::Composition,
                        vec![g, h, g.inverse(), h.inverse(), letter(a, c)?.inverse()],
                    ));
                }
                // Commuting relator.
                for &d in &syms {
                    if c.index == d.index {
                        continue;
                    }
                    let disjoint = a != c
                        && a.index != d.index
                        && b.index != c.index;
                    if disjoint {
                        let g = letter(a, b)?;
                        let h = letter(c, d)?;
                        out.push((
                            GerstenClass::Commuting,
                            vec![g, h, g.inverse(), h.inverse()],
                        ));
                    }
                }
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Stabilizer neighborhoods and kernel probes
// ---------------------------------------------------------------------------

/// Whether `g` both fixes the generators listed in `y` and projects to the
/// trivial word on the retained letter set `a`.
pub fn neighborhood_uya(
    g: &TransfiniteWord,
    y: &[u32],
    a: &BTreeSet<Letter>,
    budget: u64,
) -> Result<bool> {
    for &k in y {
        if apply_psi(g, &FreeWord::gen(k), budget)? != FreeWord::gen(k) {
            return Ok(false);
        }
    }
    let proj = g.project_to_subalphabet(a)?;
    Ok(reduce_finite(&proj).is_empty())
}

/// Words whose heads all have index at least this bound automatically lie in
/// the neighborhood determined by `y` and `a`.
pub fn uya_rank_bound(y: &[u32], a: &BTreeSet<Letter>) -> u32 {
    let ymax = y.iter().copied().max().unwrap_or(0);
    let amax = a
        .iter()
        .filter_map(|l| l.as_e().map(|e| e.head.index))
        .max()
        .unwrap_or(0);
    ymax + amax + 1
}

/// A five-letter word over generators `{1, 2, t}` that induces the identity
/// automorphism, while its projection to the letters over `{1, 2}` is the
/// single letter `E(1,2)` for every `t`.
pub fn crossing_kernel_word(t: u32) -> Result<TransfiniteWord> {
    if t < 3 {
        return Err(Error::Precondition("auxiliary generator must differ from 1 and 2".into()));
    }
    let g = |h: GenSym, tl: GenSym| -> Result<Letter> {
        Ok(Letter::E(NielsenLetter::new(h, tl)?))
    };
    let x1 = GenSym::pos(1);
    let x2 = GenSym::pos(2);
    let xt = GenSym::pos(t);
    TransfiniteWord::from_letters(vec![
        g(x1, x2)?,
        g(x1, xt)?,
        g(xt, x2.inverse())?,
        g(x1, xt.inverse())?,
        g(xt, x2)?,
    ])
}

/// Whether the induced automorphism fixes `x1..xn` pointwise.
pub fn kernel_check(g: &TransfiniteWord, n: u32, budget: u64) -> Result<bool> {
    for k in 1..=n {
        if apply_psi(g, &FreeWord::gen(k), budget)? != FreeWord::gen(k) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Words realizing signed permutations
// ---------------------------------------------------------------------------

/// A signed permutation to realize as a (possibly infinite) Nielsen word.
#[derive(Debug, Clone)]
pub enum MonomialTask {
    /// Any finite-support signed permutation.
    Finite(MonomialAutomorphism),
    /// The infinite cycle that shifts a zigzag relabeling of the integers:
    /// `1 -> 2`, even `2k -> 2k+2`, odd `2k+1 -> 2k-1` for `k >= 1`.
    ZigzagShift,
}

/// The six-letter word flipping the signs of both `a` and `b`.
fn double_inversion_letters(a: u32, b: u32) -> Result<Vec<Letter>> {
    let mut out = swap_word(GenSym::pos(a), GenSym::pos(b))?;
    out.extend(swap_word(GenSym::pos(a), GenSym::pos(b))?);
    Ok(out)
}

fn double_inversion_templates(a: AffineMap, b: AffineMap) -> Vec<LetterTemplate> {
    let st = |index: AffineMap, sign: i8| SymTemplate { index, sign };
    let one = vec![
        LetterTemplate::E { head: st(b, 1), tail: st(a, 1) },
        LetterTemplate::E { head: st(a, -1), tail: st(b, 1) },
        LetterTemplate::E { head: st(b, -1), tail: st(a, -1) },
    ];
    let mut out = one.clone();
    out.extend(one);
    out
}

/// Builds a Nielsen word whose induced automorphism is the requested signed
/// permutation.  Permutations needing an odd number of sign flips cannot be
/// realized by a finite word; the word then continues with two infinite
/// products of disjoint double inversions whose overlap cancels everywhere
/// except at the requested generator.
pub fn monomial_to_nielsen_word(task: &MonomialTask) -> Result<TransfiniteWord> {
    match task {
        MonomialTask::ZigzagShift => zigzag_shift_word(),
        MonomialTask::Finite(sigma) => finite_monomial_word(sigma),
    }
}

fn finite_monomial_word(sigma: &MonomialAutomorphism) -> Result<TransfiniteWord> {
    // Realize the index permutation as a product of three-letter swap words,
    // one per transposition of a cycle decomposition.
    let support = sigma.support();
    let mut seen: BTreeSet<u32> = BTreeSet::new();
    let mut letters: Vec<Letter> = Vec::new();
    for &start in &support {
        if seen.contains(&start) {
            continue;
        }
        let mut cycle = vec![start];
        seen.insert(start);
        let mut cur = sigma.apply_gen(GenSym::pos(start)).index;
        while cur != start {
            cycle.push(cur);
            seen.insert(cur);
            cur = sigma.apply_gen(GenSym::pos(cur)).index;
        }
        for &next in &cycle[1..] {
            letters.extend(swap_word(GenSym::pos(cycle[0]), GenSym::pos(next))?);
        }
    }
    // The swap words get the indices right up to signs; compare and collect
    // the set of generators still needing a sign flip.
    let mu = automorphism_of_letters(&letters)?
        .to_monomial()
        .ok_or_else(|| Error::Defect("swap words did not compose to a permutation".into()))?;
    let rho = mu.inverse().compose(sigma);
    let mut flips: BTreeSet<u32> = BTreeSet::new();
    for i in rho.support() {
        let img = rho.apply_gen(GenSym::pos(i));
        if img.index != i {
            return Err(Error::Defect("sign correction is not index-fixing".into()));
        }
        flips.insert(i);
    }
    let flips: Vec<u32> = flips.into_iter().collect();
    for pair in flips.chunks(2) {
        if let [a, b] = pair {
            letters.extend(double_inversion_letters(*a, *b)?);
        }
    }
    if flips.len() % 2 == 0 {
        return TransfiniteWord::from_letters(letters);
    }

    // One flip remains; cancel it against two infinite towers of double
    // inversions over fresh generators.  The first tower flips
    // {d, m} u {m+2, m+4} u {m+6, m+8} u ..., the second flips
    // {m, m+2} u {m+4, m+6} u ...; together they flip exactly d.
    let d = *flips.last().unwrap();
    let used = support
        .iter()
        .copied()
        .chain(letters.iter().filter_map(|l| {
            l.as_e().map(|e| e.head.index.max(e.tail.index))
        }))
        .max()
        .unwrap_or(0);
    let m = used + 1;
    letters.extend(double_inversion_letters(d, m)?);
    let aff = |c: i64, o: u32| AffineMap::new(c, o as i64);
    let first_tower = Segment::Pattern {
        domain: Domain::Omega { start: 0 },
        block: double_inversion_templates(aff(4, m + 2), aff(4, m + 4)),
    };
    let second_tower = Segment::Pattern {
        domain: Domain::Omega { start: 0 },
        block: double_inversion_templates(aff(4, m), aff(4, m + 2)),
    };
    TransfiniteWord::from_segments(vec![
        Segment::Explicit(letters),
        first_tower,
        second_tower,
    ])
}

/// One infinite product of eight-letter blocks; block `i` induces the
/// three-cycle `x(2i+3) -> x(2i+1) -> x(2i+2) -> x(2i+3)`, and the full
/// product shifts the zigzag relabeling of the integers by one.
fn zigzag_shift_word() -> Result<TransfiniteWord> {
    let st = |c: i64, o: i64, sign: i8| SymTemplate { index: AffineMap::new(c, o), sign };
    // u = x(2i+3), v = x(2i+1), w = x(2i+2).
    let block = vec![
        LetterTemplate::E { head: st(2, 3, 1), tail: st(2, 1, 1) },
        LetterTemplate::E { head: st(2, 3, -1), tail: st(2, 1, 1) },
        LetterTemplate::E { head: st(2, 3, -1), tail: st(2, 2, 1) },
        LetterTemplate::E { head: st(2, 2, -1), tail: st(2, 3, -1) },
        LetterTemplate::E { head: st(2, 3, 1), tail: st(2, 2, -1) },
        LetterTemplate::E { head: st(2, 2, 1), tail: st(2, 1, -1) },
        LetterTemplate::E { head: st(2, 1, -1), tail: st(2, 2, -1) },
        LetterTemplate::E { head: st(2, 2, 1), tail: st(2, 1, -1) },
    ];
    TransfiniteWord::from_segments(vec![Segment::Pattern {
        domain: Domain::Omega { start: 0 },
        block,
    }])
}

/// The permutation realized by [`MonomialTask::ZigzagShift`].
pub fn zigzag_shift_image(i: u32) -> u32 {
    if i == 1 {
        2
    } else if i % 2 == 0 {
        i + 2
    } else {
        i - 2
    }
}

// ---------------------------------------------------------------------------
// Expressing stabilizer elements in restricted generators
// ---------------------------------------------------------------------------

/// Writes an automorphism that fixes `x1..xk` as a finite word of elementary
/// letters whose heads all have index above `k` (tails unrestricted).  Fails
/// when the residual signed permutation needs an odd number of sign flips,
/// which no finite word provides.
pub fn express_in_stabilizer_generators(
    phi: &FinSuppAutomorphism,
    k: u32,
) -> Result<Vec<Letter>> {
    for i in 1..=k {
        if phi.image_of(i) != FreeWord::gen(i) {
            return Err(Error::Precondition(format!(
                "automorphism moves x{i}, which must stay fixed"
            )));
        }
    }
    let (sigma, word) = decompose_automorphism(phi)?;
    for l in &word {
        if l.head.index <= k {
            return Err(Error::Defect(format!(
                "decomposition used a letter heading a fixed generator: {l}"
            )));
        }
    }
    if sigma.support().iter().any(|&i| i <= k) {
        return Err(Error::Defect("residual permutation moves a fixed generator".into()));
    }
    // Express the residual signed permutation with swap words above rank k.
    let sigma_word = match finite_monomial_word(&sigma)?.as_finite() {
        Some(ls) => ls,
        None => {
            return Err(Error::Inconclusive(
                "residual permutation needs an odd number of sign flips; no finite word over the stabilizer generators exists".into(),
            ))
        }
    };
    let mut letters = sigma_word;
    letters.extend(word.into_iter().map(Letter::E));
    for l in &letters {
        if let Some(e) = l.as_e() {
            if e.head.index <= k {
                return Err(Error::Defect(format!(
                    "stabilizer word heads a fixed generator: {l}"
                )));
            }
        }
    }
    if &automorphism_of_letters(&letters)? != phi {
        return Err(Error::Defect("stabilizer word does not recompose".into()));
    }
    Ok(letters)
}
