//! Permutation-realization tests: chain tracing, admissibility verdicts for
//! the two standard representations of the integer shift, lazy permutation
//! evaluation, relator families, and identity neighborhoods.

use bigfree::letters::{AffineMap, Letter, LetterTemplate, TranspositionLetter};
use bigfree::sym::{
    chain_trace, eval_p, membership_s, membership_s_prime, neighborhood_wc, sigma_relators,
    ChainOutcome, Direction, RelatorFamily, Status,
};
use bigfree::word::{Domain, Segment, TransfiniteWord};
use std::collections::BTreeSet;

const BUDGET: u64 = 10_000;

fn t(a: i64, b: i64) -> Letter {
    Letter::T(TranspositionLetter::new(a, b).unwrap())
}

fn am(c: i64, o: i64) -> AffineMap {
    AffineMap::new(c, o)
}

/// Bi-infinite shift word: ... T(1,2) T(0,1) T(-1,0) ... (positions ascend as
/// the argument descends).
fn shift_zeta() -> TransfiniteWord {
    TransfiniteWord::from_segments(vec![Segment::Pattern {
        domain: Domain::Zeta,
        block: vec![LetterTemplate::T { a: am(-1, 0), b: am(-1, 1) }],
    }])
    .unwrap()
}

/// One-sided shift word: T(0,1) T(0,-1) T(-1,2) T(-1,-2) ...
fn shift_omega() -> TransfiniteWord {
    TransfiniteWord::from_segments(vec![Segment::Pattern {
        domain: Domain::Omega { start: 0 },
        block: vec![
            LetterTemplate::T { a: am(-1, 0), b: am(1, 1) },
            LetterTemplate::T { a: am(-1, 0), b: am(-1, -1) },
        ],
    }])
    .unwrap()
}

/// The right ray of the bi-infinite shift from T(1,2) on: T(1,2) T(0,1)
/// T(-1,0) T(-2,-1) ...
fn shift_ray() -> TransfiniteWord {
    TransfiniteWord::from_segments(vec![Segment::Pattern {
        domain: Domain::Omega { start: 0 },
        block: vec![LetterTemplate::T { a: am(-1, 1), b: am(-1, 2) }],
    }])
    .unwrap()
}

#[test]
fn single_letter_trace() {
    let w = TransfiniteWord::from_letters(vec![t(1, 2)]).unwrap();
    let tr = chain_trace(&w, 1, Direction::Forward, BUDGET).unwrap();
    assert_eq!(tr.outcome, ChainOutcome::Terminated);
    assert_eq!(tr.terminal(), Some(2));
    assert_eq!(tr.steps(), 1);
    // An untouched point terminates immediately with zero steps.
    let tr2 = chain_trace(&w, 5, Direction::Forward, BUDGET).unwrap();
    assert_eq!(tr2.terminal(), Some(5));
    assert_eq!(tr2.steps(), 0);
}

#[test]
fn omega_shift_trace_of_one() {
    let tr = chain_trace(&shift_omega(), 1, Direction::Forward, BUDGET).unwrap();
    assert_eq!(tr.points, vec![1, 0, -1, 2]);
    assert_eq!(tr.terminal(), Some(2));
}

#[test]
fn ray_diverges_at_two() {
    let tr = chain_trace(&shift_ray(), 2, Direction::Forward, BUDGET).unwrap();
    match tr.outcome {
        ChainOutcome::Diverges { .. } => {}
        ref o => panic!("expected divergence, got {o:?}"),
    }
    assert_eq!(tr.points[..4], [2, 1, 0, -1]);
}

#[test]
fn zeta_shift_admissible() {
    let v = membership_s(&shift_zeta(), &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Verified, "witness {:?}", v.witness);
}

#[test]
fn omega_shift_admissible() {
    let v = membership_s(&shift_omega(), &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Verified, "witness {:?}", v.witness);
}

#[test]
fn ray_refuted_with_witness() {
    let v = membership_s(&shift_ray(), &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Refuted);
    let w = v.witness.expect("refutation must carry a witness");
    assert!(w.chain_prefix.len() >= 2);
}

#[test]
fn constant_coordinate_refutes_finiteness() {
    // T(0, n): the point 0 occurs in every letter.
    let w = TransfiniteWord::from_segments(vec![Segment::Pattern {
        domain: Domain::Omega { start: 1 },
        block: vec![LetterTemplate::T { a: am(0, 0), b: am(1, 0) }],
    }])
    .unwrap();
    let v = membership_s(&w, &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Refuted);
    assert_eq!(v.witness.unwrap().point, 0);
}

#[test]
fn interval_restrictions_of_omega_shift_admissible() {
    let v = membership_s_prime(&shift_omega(), &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Verified, "witness {:?}", v.witness);
}

#[test]
fn interval_restrictions_of_zeta_shift_refuted() {
    // The ray from T(1,2) rightward is an interval restriction and diverges.
    let v = membership_s_prime(&shift_zeta(), &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Refuted);
}

#[test]
fn finite_words_always_strongly_admissible() {
    let w = TransfiniteWord::from_letters(vec![t(1, 2), t(3, 4), t(2, 3)]).unwrap();
    let v = membership_s_prime(&w, &[], BUDGET).unwrap();
    assert_eq!(v.status, Status::Verified);
}

#[test]
fn strong_admissibility_implies_admissibility() {
    for w in [shift_omega(), shift_zeta(), shift_ray()] {
        let strong = membership_s_prime(&w, &[], BUDGET).unwrap();
        let plain = membership_s(&w, &[], BUDGET).unwrap();
        if strong.status == Status::Verified {
            assert_eq!(plain.status, Status::Verified);
        }
    }
}

#[test]
fn both_shift_words_evaluate_to_the_shift() {
    for w in [shift_zeta(), shift_omega()] {
        let p = eval_p(&w, BUDGET).unwrap();
        for n in -20..=20 {
            assert_eq!(p.apply(n).unwrap(), n + 1, "word {w} at {n}");
            assert_eq!(p.apply_inverse(n).unwrap(), n - 1, "word {w} inverse at {n}");
        }
    }
}

#[test]
fn finite_composition_left_to_right() {
    let w = TransfiniteWord::from_letters(vec![t(1, 2), t(2, 3)]).unwrap();
    let p = eval_p(&w, BUDGET).unwrap();
    assert_eq!(p.apply(1).unwrap(), 3);
    assert_eq!(p.apply(2).unwrap(), 1);
    assert_eq!(p.apply(3).unwrap(), 2);
}

#[test]
fn forward_backward_mutually_inverse() {
    for w in [shift_zeta(), shift_omega(), TransfiniteWord::from_letters(vec![t(1, 2), t(5, 9)]).unwrap()]
    {
        let p = eval_p(&w, BUDGET).unwrap();
        for n in -15..=15 {
            assert_eq!(p.apply_inverse(p.apply(n).unwrap()).unwrap(), n);
            assert_eq!(p.apply(p.apply_inverse(n).unwrap()).unwrap(), n);
        }
    }
}

#[test]
fn evaluation_is_a_homomorphism_on_ranges() {
    let u = shift_omega();
    let v = TransfiniteWord::from_letters(vec![t(0, 3), t(1, -1)]).unwrap();
    let uv = u.concat(&v).unwrap();
    let pu = eval_p(&u, BUDGET).unwrap();
    let pv = eval_p(&v, BUDGET).unwrap();
    let puv = eval_p(&uv, BUDGET).unwrap();
    for n in -15..=15 {
        assert_eq!(puv.apply(n).unwrap(), pv.apply(pu.apply(n).unwrap()).unwrap());
    }
}

#[test]
fn cancellation_preserves_terminals() {
    // The mirror product w * w^-1 fully cancels, so its permutation is the
    // identity on every point.
    let w = shift_omega();
    let prod = w.concat(&w.invert()).unwrap();
    let p = eval_p(&prod, BUDGET).unwrap();
    for n in -12..=12 {
        assert_eq!(p.apply(n).unwrap(), n);
    }
}

#[test]
fn relator_families_enumerated() {
    let rels = sigma_relators(&[1, 2, 3, 4]);
    let count = |f: RelatorFamily| rels.iter().filter(|(g, _)| *g == f).count();
    // 6 unordered pairs; 3 unordered disjoint pair-of-pairs; 24 ordered
    // triples.
    assert_eq!(count(RelatorFamily::Involution), 6);
    assert_eq!(count(RelatorFamily::DisjointCommutator), 3);
    assert_eq!(count(RelatorFamily::Triple), 24);
}

#[test]
fn relators_act_trivially() {
    for (fam, letters) in sigma_relators(&[-2, 1, 3, 7]) {
        let w = TransfiniteWord::from_letters(letters.clone()).unwrap();
        let p = eval_p(&w, BUDGET).unwrap();
        for n in -10..=10 {
            assert_eq!(p.apply(n).unwrap(), n, "family {fam:?}, word {letters:?}");
        }
    }
}

#[test]
fn neighborhood_basic_cases() {
    let empty = TransfiniteWord::empty();
    let c: BTreeSet<i64> = [1, 2].into();
    assert!(neighborhood_wc(&empty, &c, BUDGET).unwrap());

    let back_and_forth = TransfiniteWord::from_letters(vec![t(1, 2), t(2, 1)]).unwrap();
    assert!(neighborhood_wc(&back_and_forth, &c, BUDGET).unwrap());

    let single = TransfiniteWord::from_letters(vec![t(1, 2)]).unwrap();
    let c1: BTreeSet<i64> = [1].into();
    assert!(!neighborhood_wc(&single, &c1, BUDGET).unwrap());
}

#[test]
fn neighborhood_requires_points_to_return() {
    // Projection to {1,2}-letters is empty, but point 1 is moved to 3.
    let w = TransfiniteWord::from_letters(vec![t(1, 3)]).unwrap();
    let c: BTreeSet<i64> = [1, 2].into();
    assert!(!neighborhood_wc(&w, &c, BUDGET).unwrap());
}

#[test]
fn shift_word_not_in_small_neighborhoods() {
    let w = shift_omega();
    let c: BTreeSet<i64> = [0, 1].into();
    assert!(!neighborhood_wc(&w, &c, BUDGET).unwrap());
}

#[test]
fn nielsen_words_rejected() {
    let head = bigfree::letters::GenSym::pos(1);
    let tail = bigfree::letters::GenSym::pos(2);
    let e = Letter::E(bigfree::letters::NielsenLetter::new(head, tail).unwrap());
    let w = TransfiniteWord::from_letters(vec![e]).unwrap();
    assert!(chain_trace(&w, 1, Direction::Forward, BUDGET).is_err());
    assert!(membership_s(&w, &[], BUDGET).is_err());
}

#[test]
fn backward_trace_of_forward_terminal_returns() {
    for w in [shift_zeta(), shift_omega()] {
        for x in -10..=10 {
            let fwd = chain_trace(&w, x, Direction::Forward, BUDGET).unwrap();
            let y = fwd.terminal().unwrap();
            let bwd = chain_trace(&w, y, Direction::Backward, BUDGET).unwrap();
            assert_eq!(bwd.terminal(), Some(x));
        }
    }
}
