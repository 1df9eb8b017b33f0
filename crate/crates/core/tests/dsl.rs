use bigfree::dsl::{parse_word, print_word};
use bigfree::error::Error;
use bigfree::letters::{AffineMap, Letter, LetterTemplate, SymTemplate, TranspositionLetter};
use bigfree::word::{Domain, Segment, TransfiniteWord};

fn t(a: i64, b: i64) -> Letter {
    Letter::T(TranspositionLetter::new(a, b).unwrap())
}

fn aff(c: i64, o: i64) -> AffineMap {
    AffineMap::new(c, o)
}

fn st(c: i64, o: i64, sign: i8) -> SymTemplate {
    SymTemplate { index: aff(c, o), sign }
}

#[test]
fn single_letters_parse() {
    let w = parse_word("T(1,2)").unwrap();
    assert_eq!(w.as_finite().unwrap(), vec![t(1, 2)]);

    let w = parse_word("E(1,-2)").unwrap();
    let l = w.as_finite().unwrap()[0].as_e().unwrap();
    assert_eq!((l.head.index, l.head.sign), (1, 1));
    assert_eq!((l.tail.index, l.tail.sign), (2, -1));

    let w = parse_word("E(-3, 4)").unwrap();
    let l = w.as_finite().unwrap()[0].as_e().unwrap();
    assert_eq!((l.head.index, l.head.sign), (3, -1));
    assert_eq!((l.tail.index, l.tail.sign), (4, 1));
}

#[test]
fn juxtaposition_concatenates() {
    let w = parse_word("T(1,2) T(3,4)\nT(5,6)").unwrap();
    assert_eq!(w.as_finite().unwrap(), vec![t(1, 2), t(3, 4), t(5, 6)]);
}

#[test]
fn ascending_block_with_negated_subscripts() {
    let w = parse_word("prod n = 0 to inf { T(-n, n+1) T(-n, -(n+1)) }").unwrap();
    assert_eq!(w.segments().len(), 1);
    match &w.segments()[0] {
        Segment::Pattern { domain, block } => {
            assert_eq!(*domain, Domain::Omega { start: 0 });
            assert_eq!(
                block[0],
                LetterTemplate::T { a: aff(-1, 0), b: aff(1, 1) }
            );
            assert_eq!(
                block[1],
                LetterTemplate::T { a: aff(-1, 0), b: aff(-1, -1) }
            );
        }
        other => panic!("expected a pattern, got {other:?}"),
    }
}

#[test]
fn descending_block_parses_to_omega_star() {
    let w = parse_word("prod n = inf to 1 { E(n+1, n) }").unwrap();
    match &w.segments()[0] {
        // Construction normalizes the start of a run to 0, shifting subscripts.
        Segment::Pattern { domain, block } => {
            assert_eq!(*domain, Domain::OmegaStar { start: 0 });
            assert_eq!(
                block[0],
                LetterTemplate::E { head: st(1, 2, 1), tail: st(1, 1, 1) }
            );
        }
        other => panic!("expected a pattern, got {other:?}"),
    }
}

#[test]
fn bi_infinite_block_parses_to_zeta() {
    let w = parse_word("prod n = -inf to inf { T(n, n+1) }").unwrap();
    match &w.segments()[0] {
        Segment::Pattern { domain, .. } => assert_eq!(*domain, Domain::Zeta),
        other => panic!("expected a pattern, got {other:?}"),
    }
}

#[test]
fn negative_template_subscript_is_an_inverse_generator() {
    let w = parse_word("prod n = 1 to inf { E(n+1, -n) }").unwrap();
    match &w.segments()[0] {
        Segment::Pattern { block, .. } => {
            assert_eq!(
                block[0],
                LetterTemplate::E { head: st(1, 2, 1), tail: st(1, 1, -1) }
            );
        }
        other => panic!("expected a pattern, got {other:?}"),
    }
}

#[test]
fn coefficients_and_spacing_are_accepted() {
    let w = parse_word("prod n = 0 to inf { T( 2*n , 2 * n + 1 ) }").unwrap();
    match &w.segments()[0] {
        Segment::Pattern { block, .. } => {
            assert_eq!(block[0], LetterTemplate::T { a: aff(2, 0), b: aff(2, 1) });
        }
        other => panic!("expected a pattern, got {other:?}"),
    }
}

#[test]
fn inv_inverts_the_enclosed_word() {
    let w = parse_word("inv(E(1,2) E(3,4))").unwrap();
    let ls = w.as_finite().unwrap();
    let expect = parse_word("E(3,-4) E(1,-2)").unwrap().as_finite().unwrap();
    assert_eq!(ls, expect);

    // Inverting a block flips the domain orientation.
    let w = parse_word("inv(prod n = 1 to inf { E(n+1, n) })").unwrap();
    let direct = parse_word("prod n = 1 to inf { E(n+1, n) }").unwrap().invert();
    assert_eq!(w, direct);
}

#[test]
fn semantic_errors_are_reported() {
    assert!(matches!(parse_word("E(1,1)"), Err(Error::InvalidLetter(_))));
    assert!(matches!(parse_word("E(1,-1)"), Err(Error::InvalidLetter(_))));
    assert!(matches!(parse_word("E(0,2)"), Err(Error::InvalidLetter(_))));
    assert!(matches!(parse_word("T(5,5)"), Err(Error::InvalidLetter(_))));
    // A block whose letters never vary is rejected at word construction.
    assert!(parse_word("prod n = 0 to inf { T(1,2) }").is_err());
}

#[test]
fn syntax_errors_carry_line_and_column() {
    match parse_word("T(1,2)\nT(3 4)") {
        Err(Error::Parse { line, col, .. }) => {
            assert_eq!(line, 2);
            assert!(col >= 4, "col {col}");
        }
        other => panic!("expected a parse error, got {other:?}"),
    }
    assert!(matches!(parse_word("Q(1,2)"), Err(Error::Parse { .. })));
    assert!(matches!(parse_word("T(1,2))"), Err(Error::Parse { .. })));
    assert!(matches!(parse_word("T(1,m)"), Err(Error::Parse { .. })));
    assert!(matches!(
        parse_word("prod n = 1 to 5 { T(n, n+1) }"),
        Err(Error::Parse { .. })
    ));
    assert!(matches!(
        parse_word("prod n = 0 to inf { prod m = 0 to inf { T(m,n) } }"),
        Err(Error::Parse { .. })
    ));
    // The block variable may not leak out of its block.
    assert!(matches!(
        parse_word("prod n = 0 to inf { T(n, n+1) } T(n, 3)"),
        Err(Error::Parse { .. })
    ));
    // Nonlinear subscripts are refused.
    assert!(matches!(
        parse_word("prod n = 0 to inf { T(n*n, 1) }"),
        Err(Error::Parse { .. })
    ));
}

#[test]
fn printing_round_trips() {
    let texts = [
        "T(1,2) T(-3,4)",
        "E(1,2) E(-3,-4) E(5,1)",
        "prod n = 0 to inf { T(-n,n+1) T(-n,-(n+1)) }",
        "prod n = inf to 1 { E(n+1,n) }",
        "prod n = -inf to inf { T(n,n+1) }",
        "E(2,1) prod n = 3 to inf { E(n+1,-n) } E(5,6)",
        "prod n = 1 to inf { E(2*n,2*n+1) }",
    ];
    for text in texts {
        let w = parse_word(text).unwrap();
        let printed = print_word(&w);
        let back = parse_word(&printed).unwrap();
        assert_eq!(back, w, "round trip failed for {text:?} -> {printed:?}");
    }
}

#[test]
fn printing_round_trips_constructed_words() {
    // A pattern with a constant inverse tail only arises programmatically.
    let seg = Segment::Pattern {
        domain: Domain::Omega { start: 4 },
        block: vec![LetterTemplate::E { head: st(1, 0, 1), tail: st(0, 2, -1) }],
    };
    let w = TransfiniteWord::from_segments(vec![seg]).unwrap();
    let printed = print_word(&w);
    assert_eq!(parse_word(&printed).unwrap(), w, "{printed:?}");

    let empty = TransfiniteWord::empty();
    assert_eq!(parse_word(&print_word(&empty)).unwrap(), empty);
}
