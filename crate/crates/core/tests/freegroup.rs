//! Finite-rank free group tests: the graded lexicographic order and the rank
//! function are cross-checked against a brute-force enumeration oracle, the
//! complexity-decreasing reduction step against frozen hand-worked cases, and
//! the full reducer against randomized automorphic images of reduced tuples.

use bigfree::freegroup::{
    apply_move, complexity, graded_lex_cmp, half_prefix, is_nielsen_reduced, lemma_hard2_check,
    lemma_hard_check, nielsen_reduce, rank_phi, refined_step, weight, Complexity, FreeWord,
    NielsenMove, Tuple,
};
use bigfree::letters::GenSym;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

fn w(s: &str) -> FreeWord {
    FreeWord::parse(s).unwrap()
}

fn sgen(i: u32, s: i8) -> FreeWord {
    FreeWord::letter(GenSym::new(i, s).unwrap())
}

/// Oracle: enumerate every reduced word of length <= max_len over rank n, in
/// generation order. Independently verifies both the comparator (via a direct
/// recursive definition) and the rank function (via sorted position).
fn enumerate_reduced(rank: u32, max_len: usize) -> Vec<FreeWord> {
    let mut letters = Vec::new();
    for i in 1..=rank {
        letters.push(sgen(i, -1));
        letters.push(sgen(i, 1));
    }
    let mut all = vec![FreeWord::identity()];
    let mut frontier = vec![FreeWord::identity()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for u in &frontier {
            for l in &letters {
                let v = u.mul(l);
                if v.len() == u.len() + 1 {
                    next.push(v);
                }
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

/// Direct restatement of the order: shorter first, then letter by letter with
/// x1^-1 < x1 < x2^-1 < x2 < ...
fn oracle_cmp(u: &FreeWord, v: &FreeWord) -> Ordering {
    fn key(i: u32, s: i8) -> u64 {
        (2 * (i as u64 - 1)) + if s > 0 { 1 } else { 0 }
    }
    u.len().cmp(&v.len()).then_with(|| {
        for (a, b) in u.letters().iter().zip(v.letters()) {
            let c = key(a.index, a.sign).cmp(&key(b.index, b.sign));
            if c != Ordering::Equal {
                return c;
            }
        }
        Ordering::Equal
    })
}

#[test]
fn graded_lex_matches_oracle() {
    for rank in 1..=3 {
        let words = enumerate_reduced(rank, 3);
        for a in &words {
            for b in &words {
                assert_eq!(
                    graded_lex_cmp(a, b, rank).unwrap(),
                    oracle_cmp(a, b),
                    "rank {rank}: {a} vs {b}"
                );
            }
        }
    }
}

#[test]
fn rank_phi_matches_sorted_position() {
    for rank in 1..=3u32 {
        let mut words = enumerate_reduced(rank, 4);
        words.sort_by(|a, b| oracle_cmp(a, b));
        for (idx, word) in words.iter().enumerate() {
            assert_eq!(
                rank_phi(word, rank).unwrap(),
                (idx + 1) as u128,
                "rank {rank}, word {word}"
            );
        }
    }
}

#[test]
fn frozen_rank_values() {
    assert_eq!(rank_phi(&FreeWord::identity(), 1).unwrap(), 1);
    assert_eq!(rank_phi(&w("x1"), 1).unwrap(), 3);
    assert_eq!(rank_phi(&w("x2^-1"), 2).unwrap(), 4);
}

#[test]
fn rank_phi_rejects_out_of_rank_words() {
    assert!(rank_phi(&w("x3"), 2).is_err());
    assert!(rank_phi(&w("x1"), 0).is_err());
}

#[test]
fn length_strata_sizes() {
    // Reduced words of length l over rank n number 2n * (2n-1)^(l-1); the
    // rank function of the first word of each length is the running total.
    let words = enumerate_reduced(3, 4);
    let n: u128 = 3;
    let mut expected = 1u128;
    for l in 0..=4usize {
        let count = words.iter().filter(|u| u.len() == l).count() as u128;
        let formula = if l == 0 { 1 } else { 2 * n * (2 * n - 1).pow(l as u32 - 1) };
        assert_eq!(count, formula, "length {l}");
        let first = words
            .iter()
            .filter(|u| u.len() == l)
            .min_by(|a, b| oracle_cmp(a, b))
            .unwrap();
        assert_eq!(rank_phi(first, 3).unwrap(), expected);
        expected += formula;
    }
}

#[test]
fn half_prefix_lengths() {
    assert_eq!(half_prefix(&w("x1 x2 x1")).len(), 2);
    assert_eq!(half_prefix(&w("x1 x2")).len(), 1);
    assert_eq!(half_prefix(&FreeWord::identity()).len(), 0);
}

#[test]
fn frozen_weight_values() {
    assert_eq!(weight(&FreeWord::identity(), 1).unwrap(), 2);
    assert_eq!(weight(&w("x1"), 1).unwrap(), 5);
    assert_eq!(weight(&w("x1 x2"), 2).unwrap(), 7);
}

#[test]
fn frozen_complexity_values() {
    let c0 = complexity(&FreeWord::identity(), 1).unwrap();
    assert_eq!((c0.length, c0.weight), (0, 2));
    let c1 = complexity(&w("x1"), 1).unwrap();
    assert_eq!((c1.length, c1.weight), (1, 5));
}

/// Equal-length words that cancel more than half against each other (with
/// nontrivial product) never share a weight.
#[test]
fn weight_separates_heavily_cancelling_pairs() {
    for rank in 1..=2u32 {
        let words = enumerate_reduced(rank, 5);
        for a in &words {
            for b in &words {
                let p = a.mul(b);
                if a.len() == b.len() && !p.is_empty() && p.len() < a.len() {
                    assert_ne!(
                        weight(a, rank).unwrap(),
                        weight(b, rank).unwrap(),
                        "rank {rank}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn apply_move_semantics() {
    let t = Tuple(vec![w("x1"), w("x2")]);
    // T_{1^1 2^-1}: u1 -> u1 * u2^-1.
    let m = NielsenMove::T { i: 1, eps: 1, j: 2, tau: -1 };
    let t2 = apply_move(&t, &m).unwrap();
    assert_eq!(t2.0, vec![w("x1 x2^-1"), w("x2")]);
    // T_{1^-1 2^1}: u1^-1 -> u1^-1 * u2, so u1 -> u2^-1 * u1.
    let m2 = NielsenMove::T { i: 1, eps: -1, j: 2, tau: 1 };
    let t3 = apply_move(&t, &m2).unwrap();
    assert_eq!(t3.0, vec![w("x2^-1 x1"), w("x2")]);
    // Inversion move.
    let t4 = apply_move(&t, &NielsenMove::I { i: 2 }).unwrap();
    assert_eq!(t4.0, vec![w("x1"), w("x2^-1")]);
}

#[test]
fn move_then_inverse_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let t = random_tuple_k(&mut rng, 3, 3, 4);
    for m in [
        NielsenMove::T { i: 1, eps: 1, j: 2, tau: 1 },
        NielsenMove::T { i: 2, eps: -1, j: 3, tau: -1 },
        NielsenMove::I { i: 1 },
    ] {
        let back = apply_move(&apply_move(&t, &m).unwrap(), &m.inverse().unwrap()).unwrap();
        assert_eq!(back, t);
    }
}

#[test]
fn nielsen_reduced_detection() {
    assert!(is_nielsen_reduced(&Tuple(vec![w("x1"), w("x2")])));
    // (x1, x1 x2): x1^-1 * (x1 x2) = x2 shortens.
    assert!(!is_nielsen_reduced(&Tuple(vec![w("x1"), w("x1 x2")])));
    // A tuple with a trivial entry is not reduced.
    assert!(!is_nielsen_reduced(&Tuple(vec![FreeWord::identity()])));
}

#[test]
fn refined_step_frozen_case_one() {
    // (x1 x2, x2): the first entry shortens against the second.
    let t = Tuple(vec![w("x1 x2"), w("x2")]);
    let (m, t2, _) = refined_step(&t).unwrap();
    assert_eq!(m, NielsenMove::T { i: 1, eps: 1, j: 2, tau: -1 });
    assert_eq!(t2.0, vec![w("x1"), w("x2")]);
}

#[test]
fn refined_step_frozen_case_two() {
    // (x2, x1 x2): entry 2 shortens on the right against entry 1, which is
    // the move T_{2^1 1^-1}.
    let t = Tuple(vec![w("x2"), w("x1 x2")]);
    let (m, t2, _) = refined_step(&t).unwrap();
    assert_eq!(m, NielsenMove::T { i: 2, eps: 1, j: 1, tau: -1 });
    assert_eq!(t2.0, vec![w("x2"), w("x1")]);
}

#[test]
fn refined_step_on_reduced_tuple_errors() {
    let t = Tuple(vec![w("x1"), w("x2")]);
    assert!(refined_step(&t).is_err());
}

#[test]
fn refined_step_strictly_decreases_complexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..300 {
        let t = random_tuple(&mut rng, 3, 5);
        if is_nielsen_reduced(&t) {
            continue;
        }
        let rank = t.ambient_rank();
        let before: Vec<Complexity> =
            t.0.iter().map(|u| complexity(u, rank).unwrap()).collect();
        if let Ok((m, t2, r2)) = refined_step(&t) {
            let after: Vec<Complexity> =
                t2.0.iter().map(|u| complexity(u, r2).unwrap()).collect();
            // Exactly one entry changed, and it got strictly smaller.
            let mut changed = 0;
            for (b, a) in before.iter().zip(&after) {
                match a.cmp_lex(b) {
                    Ordering::Less => changed += 1,
                    Ordering::Equal => {}
                    Ordering::Greater => panic!("complexity increased under {m} on {t}"),
                }
            }
            assert_eq!(changed, 1, "move {m} on {t}");
        }
    }
}

fn random_word(rng: &mut ChaCha8Rng, rank: u32, len: usize) -> FreeWord {
    let mut u = FreeWord::identity();
    for _ in 0..len {
        let i = rng.gen_range(1..=rank);
        let s = if rng.gen_bool(0.5) { 1 } else { -1 };
        u = u.mul(&sgen(i, s));
    }
    u
}

fn random_tuple(rng: &mut ChaCha8Rng, rank: u32, max_len: usize) -> Tuple {
    let k = rng.gen_range(1..=3);
    random_tuple_k(rng, rank, k, max_len)
}

fn random_tuple_k(rng: &mut ChaCha8Rng, rank: u32, k: usize, max_len: usize) -> Tuple {
    Tuple(
        (0..k)
            .map(|_| {
                let l = rng.gen_range(1..=max_len);
                random_word(rng, rank, l)
            })
            .collect(),
    )
}

/// Scramble a reduced basis-prefix tuple by random moves, then reduce: the
/// result must be reduced, consist of single letters again, and be reachable
/// by replaying the recorded move log.
#[test]
fn nielsen_reduce_roundtrip_on_scrambled_bases() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _case in 0..200 {
        let k = rng.gen_range(1..=3usize);
        let mut t = Tuple((1..=k as u32).map(FreeWord::gen).collect());
        for _ in 0..6 {
            let i = rng.gen_range(1..=k);
            let m = if k >= 2 && rng.gen_bool(0.7) {
                let mut j = rng.gen_range(1..=k);
                while j == i {
                    j = rng.gen_range(1..=k);
                }
                NielsenMove::T {
                    i,
                    eps: if rng.gen_bool(0.5) { 1 } else { -1 },
                    j,
                    tau: if rng.gen_bool(0.5) { 1 } else { -1 },
                }
            } else {
                NielsenMove::I { i }
            };
            t = apply_move(&t, &m).unwrap();
        }
        let (reduced, log) = nielsen_reduce(&t, 10_000).unwrap();
        assert!(is_nielsen_reduced(&reduced));
        for u in reduced.entries() {
            assert_eq!(u.len(), 1, "expected basis letters, got {reduced}");
        }
        let mut replay = t.clone();
        for m in &log {
            replay = apply_move(&replay, m).unwrap();
        }
        assert_eq!(replay, reduced);
    }
}

#[test]
fn nielsen_reduce_random_tuples_terminate_reduced() {
    let mut rng = ChaCha8Rng::seed_from_u64(4242);
    for _ in 0..500 {
        let t = random_tuple(&mut rng, 3, 6);
        let (reduced, log) = nielsen_reduce(&t, 10_000).unwrap();
        assert!(is_nielsen_reduced(&reduced), "input {t}");
        let mut replay = t.clone();
        for m in &log {
            replay = apply_move(&replay, m).unwrap();
        }
        assert_eq!(replay, reduced);
    }
}

/// Single-letter entries are left untouched by reduction.
#[test]
fn single_letters_preserved() {
    let t = Tuple(vec![w("x1"), w("x1 x2 x3"), w("x3")]);
    let (reduced, _) = nielsen_reduce(&t, 10_000).unwrap();
    assert_eq!(reduced.entries()[0], w("x1"));
    assert_eq!(reduced.entries()[2], w("x3"));
}

#[test]
fn lemma_checks_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut hard2_tested = 0u32;
    let mut hard_tested = 0u32;
    for _ in 0..20_000 {
        let rank = 2u32;
        let lu = rng.gen_range(1..=4);
        let lv = rng.gen_range(1..=4);
        let u = random_word(&mut rng, rank, lu);
        let v = random_word(&mut rng, rank, lv);
        for eps in [1i8, -1] {
            for tau in [1i8, -1] {
                if let Ok(holds) = lemma_hard2_check(&u, &v, eps, tau, rank) {
                    hard2_tested += 1;
                    assert!(holds, "half-prefix conclusion failed: u={u} v={v} eps={eps} tau={tau}");
                }
                if u.len() == v.len() {
                    if let Ok(holds) = lemma_hard_check(&u, &v, eps, tau, rank) {
                        hard_tested += 1;
                        assert!(
                            holds,
                            "conclusion failed: u={u} v={v} eps={eps} tau={tau}"
                        );
                    }
                }
            }
        }
    }
    assert!(hard2_tested > 50, "too few instances met the hypotheses: {hard2_tested}");
    assert!(hard_tested > 10, "too few instances met the hypotheses: {hard_tested}");
}
