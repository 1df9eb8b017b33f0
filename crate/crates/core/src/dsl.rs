//! Text syntax for transfinite words.
//!
//! Grammar (whitespace separates tokens, newlines are insignificant):
//!
//! ```text
//! word    := item*
//! item    := letter | block | "inv" "(" word ")"
//! letter  := ("T" | "E") "(" expr "," expr ")"
//! block   := "prod" IDENT "=" bound "to" bound "{" letter* "}"
//! bound   := INT | "inf" | "-inf"
//! expr    := linear expression in the block variable
//!            (integers, the variable, "+", "-", "*", parentheses)
//! ```
//!
//! `T(a,b)` transposes the integer points `a` and `b`.  `E(a,b)` multiplies
//! generator `a` by generator `b` on the right; a negative argument denotes
//! an inverse generator.  Block bounds `s to inf`, `inf to s`, and
//! `-inf to inf` give ascending, descending (largest variable value
//! leftmost), and bi-infinite runs respectively.  `inv(...)` inverts the
//! enclosed word.

use crate::error::{Error, Result};
use crate::letters::{
    AffineMap, Letter, LetterTemplate, NielsenLetter, SymTemplate, TranspositionLetter,
};
use crate::word::{Domain, Segment, TransfiniteWord};

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Ident(String),
    Int(i64),
    Sym(char),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let bump = |c: char, line: &mut usize, col: &mut usize| {
            if c == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        };
        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut col);
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_ascii_digit() {
                    s.push(d);
                    chars.next();
                    bump(d, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let v: i64 = s.parse().map_err(|_| Error::Parse {
                line: tl,
                col: tc,
                msg: format!("integer {s} out of range"),
            })?;
            out.push(Token { kind: TokKind::Int(v), line: tl, col: tc });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&d) = chars.peek() {
                if d.is_alphanumeric() || d == '_' {
                    s.push(d);
                    chars.next();
                    bump(d, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Token { kind: TokKind::Ident(s), line: tl, col: tc });
            continue;
        }
        if "(),{}=+-*".contains(c) {
            chars.next();
            bump(c, &mut line, &mut col);
            out.push(Token { kind: TokKind::Sym(c), line: tl, col: tc });
            continue;
        }
        return Err(Error::Parse { line: tl, col: tc, msg: format!("unexpected character {c:?}") });
    }
    Ok(out)
}

/// A linear expression `coeff * var + offset` in the enclosing block variable.
#[derive(Debug, Clone, Copy)]
struct Linear {
    coeff: i64,
    offset: i64,
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&TokKind> {
        self.toks.get(self.at).map(|t| &t.kind)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|t| (t.line, t.col))
            .unwrap_or((1, 1))
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse { line, col, msg: msg.into() }
    }

    fn next(&mut self) -> Option<TokKind> {
        let t = self.toks.get(self.at).map(|t| t.kind.clone());
        if t.is_some() {
            self.at += 1;
        }
        t
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        match self.peek() {
            Some(TokKind::Sym(s)) if *s == c => {
                self.at += 1;
                Ok(())
            }
            other => Err(self.err(format!("expected {c:?}, found {}", describe(other)))),
        }
    }

    fn expect_ident(&mut self, word: &str) -> Result<()> {
        match self.peek() {
            Some(TokKind::Ident(s)) if s == word => {
                self.at += 1;
                Ok(())
            }
            other => Err(self.err(format!("expected {word:?}, found {}", describe(other)))),
        }
    }

    /// word := item*, stopping at `)` or end of input.
    fn word(&mut self, var: Option<&str>) -> Result<Vec<Segment>> {
        let mut segments: Vec<Segment> = Vec::new();
        let mut run: Vec<Letter> = Vec::new();
        let flush = |segments: &mut Vec<Segment>, run: &mut Vec<Letter>| {
            if !run.is_empty() {
                segments.push(Segment::Explicit(std::mem::take(run)));
            }
        };
        loop {
            match self.peek() {
                None | Some(TokKind::Sym(')')) => break,
                Some(TokKind::Ident(id)) if id == "prod" => {
                    if var.is_some() {
                        return Err(self.err("product blocks cannot nest"));
                    }
                    flush(&mut segments, &mut run);
                    segments.push(self.block()?);
                }
                Some(TokKind::Ident(id)) if id == "inv" => {
                    self.at += 1;
                    self.expect_sym('(')?;
                    let inner = self.word(var)?;
                    self.expect_sym(')')?;
                    flush(&mut segments, &mut run);
                    let inner = TransfiniteWord::from_segments(inner)?;
                    segments.extend(inner.invert().segments().iter().cloned());
                }
                Some(TokKind::Ident(id)) if id == "T" || id == "E" => {
                    // Peeking only: the letter may become a pattern template.
                    match self.letter(var)? {
                        Parsed::Concrete(l) => run.push(l),
                        Parsed::Template(_) => {
                            return Err(self
                                .err("the block variable may only appear inside a prod block"))
                        }
                    }
                }
                other => {
                    return Err(self.err(format!("expected a letter, found {}", describe(other))))
                }
            }
        }
        flush(&mut segments, &mut run);
        Ok(segments)
    }

    fn block(&mut self) -> Result<Segment> {
        self.expect_ident("prod")?;
        let var = match self.next() {
            Some(TokKind::Ident(v)) => v,
            other => {
                return Err(self.err(format!("expected a variable, found {}", describe(other.as_ref()))))
            }
        };
        self.expect_sym('=')?;
        let lo = self.bound()?;
        self.expect_ident("to")?;
        let hi = self.bound()?;
        let domain = match (lo, hi) {
            (Bound::Int(s), Bound::PlusInf) => Domain::Omega { start: s },
            (Bound::PlusInf, Bound::Int(s)) => Domain::OmegaStar { start: s },
            (Bound::MinusInf, Bound::PlusInf) => Domain::Zeta,
            _ => return Err(self.err("bounds must be `s to inf`, `inf to s`, or `-inf to inf`")),
        };
        self.expect_sym('{')?;
        let sample = match domain {
            Domain::Omega { start } | Domain::OmegaStar { start } => start,
            Domain::Zeta => 0,
        };
        let mut block = Vec::new();
        loop {
            match self.peek() {
                Some(TokKind::Sym('}')) => {
                    self.at += 1;
                    break;
                }
                Some(TokKind::Ident(id)) if id == "T" || id == "E" => {
                    block.push(match self.letter_template(&var, sample)? {
                        Parsed::Template(t) => t,
                        Parsed::Concrete(_) => unreachable!("letter_template always templates"),
                    });
                }
                other => {
                    return Err(self
                        .err(format!("expected a letter or '}}', found {}", describe(other))))
                }
            }
        }
        Ok(Segment::Pattern { domain, block })
    }

    fn bound(&mut self) -> Result<Bound> {
        match self.next() {
            Some(TokKind::Ident(s)) if s == "inf" => Ok(Bound::PlusInf),
            Some(TokKind::Int(v)) => Ok(Bound::Int(v)),
            Some(TokKind::Sym('-')) => match self.next() {
                Some(TokKind::Ident(s)) if s == "inf" => Ok(Bound::MinusInf),
                Some(TokKind::Int(v)) => Ok(Bound::Int(-v)),
                other => Err(self.err(format!("expected a bound, found {}", describe(other.as_ref())))),
            },
            other => Err(self.err(format!("expected a bound, found {}", describe(other.as_ref())))),
        }
    }

    /// A concrete letter outside any block.
    fn letter(&mut self, var: Option<&str>) -> Result<Parsed> {
        let kind = match self.next() {
            Some(TokKind::Ident(k)) => k,
            _ => unreachable!("caller peeked"),
        };
        self.expect_sym('(')?;
        let a = self.linear(var)?;
        self.expect_sym(',')?;
        let b = self.linear(var)?;
        self.expect_sym(')')?;
        if a.coeff != 0 || b.coeff != 0 {
            return Ok(Parsed::Template(self.template_of(&kind, a, b, 0)?));
        }
        let l = match kind.as_str() {
            "T" => Letter::T(TranspositionLetter::new(a.offset, b.offset)?),
            _ => Letter::E(NielsenLetter::new(signed_gen(a.offset)?, signed_gen(b.offset)?)?),
        };
        Ok(Parsed::Concrete(l))
    }

    /// A letter inside a block: always produces a template (validation of
    /// constant templates happens at word construction).
    fn letter_template(&mut self, var: &str, sample: i64) -> Result<Parsed> {
        let kind = match self.next() {
            Some(TokKind::Ident(k)) => k,
            _ => unreachable!("caller peeked"),
        };
        self.expect_sym('(')?;
        let a = self.linear(Some(var))?;
        self.expect_sym(',')?;
        let b = self.linear(Some(var))?;
        self.expect_sym(')')?;
        Ok(Parsed::Template(self.template_of(&kind, a, b, sample)?))
    }

    fn template_of(&self, kind: &str, a: Linear, b: Linear, sample: i64) -> Result<LetterTemplate> {
        match kind {
            "T" => Ok(LetterTemplate::T {
                a: AffineMap::new(a.coeff, a.offset),
                b: AffineMap::new(b.coeff, b.offset),
            }),
            _ => Ok(LetterTemplate::E {
                head: sym_template(a, sample),
                tail: sym_template(b, sample),
            }),
        }
    }

    /// linear := mul (('+'|'-') mul)*
    fn linear(&mut self, var: Option<&str>) -> Result<Linear> {
        let mut acc = self.mul(var)?;
        loop {
            match self.peek() {
                Some(TokKind::Sym('+')) => {
                    self.at += 1;
                    let t = self.mul(var)?;
                    acc = Linear { coeff: acc.coeff + t.coeff, offset: acc.offset + t.offset };
                }
                Some(TokKind::Sym('-')) => {
                    self.at += 1;
                    let t = self.mul(var)?;
                    acc = Linear { coeff: acc.coeff - t.coeff, offset: acc.offset - t.offset };
                }
                _ => return Ok(acc),
            }
        }
    }

    /// mul := atom ('*' atom)*, linearity enforced.
    fn mul(&mut self, var: Option<&str>) -> Result<Linear> {
        let mut acc = self.atom(var)?;
        while let Some(TokKind::Sym('*')) = self.peek() {
            self.at += 1;
            let t = self.atom(var)?;
            if acc.coeff != 0 && t.coeff != 0 {
                return Err(self.err("subscripts must be linear in the block variable"));
            }
            acc = Linear {
                coeff: acc.coeff * t.offset + t.coeff * acc.offset,
                offset: acc.offset * t.offset,
            };
        }
        Ok(acc)
    }

    fn atom(&mut self, var: Option<&str>) -> Result<Linear> {
        match self.peek().cloned() {
            Some(TokKind::Int(v)) => {
                self.at += 1;
                Ok(Linear { coeff: 0, offset: v })
            }
            Some(TokKind::Ident(id)) if Some(id.as_str()) == var => {
                self.at += 1;
                Ok(Linear { coeff: 1, offset: 0 })
            }
            Some(TokKind::Ident(id)) => Err(self.err(format!("unknown variable {id:?}"))),
            Some(TokKind::Sym('-')) => {
                self.at += 1;
                let t = self.atom(var)?;
                Ok(Linear { coeff: -t.coeff, offset: -t.offset })
            }
            Some(TokKind::Sym('(')) => {
                self.at += 1;
                let t = self.linear(var)?;
                self.expect_sym(')')?;
                Ok(t)
            }
            other => Err(self.err(format!("expected a subscript, found {}", describe(other.as_ref())))),
        }
    }
}

enum Parsed {
    Concrete(Letter),
    Template(LetterTemplate),
}

enum Bound {
    Int(i64),
    PlusInf,
    MinusInf,
}

fn describe(t: Option<&TokKind>) -> String {
    match t {
        None => "end of input".into(),
        Some(TokKind::Ident(s)) => format!("{s:?}"),
        Some(TokKind::Int(v)) => format!("{v}"),
        Some(TokKind::Sym(c)) => format!("{c:?}"),
    }
}

fn signed_gen(v: i64) -> Result<crate::letters::GenSym> {
    if v == 0 {
        return Err(Error::InvalidLetter("generator index must be nonzero".into()));
    }
    crate::letters::GenSym::new(v.unsigned_abs() as u32, if v < 0 { -1 } else { 1 })
}

/// Decides the generator sign of an affine subscript by its value at a domain
/// point: subscripts that stay negative denote inverse generators.
fn sym_template(l: Linear, sample: i64) -> SymTemplate {
    let m = AffineMap::new(l.coeff, l.offset);
    if m.eval(sample) < 0 {
        SymTemplate { index: AffineMap::new(-l.coeff, -l.offset), sign: -1 }
    } else {
        SymTemplate { index: m, sign: 1 }
    }
}

/// Parses the word syntax described in the module docs.
pub fn parse_word(text: &str) -> Result<TransfiniteWord> {
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0 };
    let segments = p.word(None)?;
    if p.at != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    TransfiniteWord::from_segments(segments)
}

fn print_affine(m: AffineMap) -> String {
    m.to_string()
}

fn print_sym(t: &SymTemplate) -> String {
    if t.sign < 0 {
        if t.index.is_constant() {
            format!("-{}", t.index.offset)
        } else {
            format!("-({})", print_affine(t.index))
        }
    } else {
        print_affine(t.index)
    }
}

fn print_letter(l: &Letter) -> String {
    match l {
        Letter::T(t) => format!("T({},{})", t.a, t.b),
        Letter::E(e) => format!(
            "E({},{})",
            e.head.index as i64 * e.head.sign as i64,
            e.tail.index as i64 * e.tail.sign as i64
        ),
    }
}

fn print_template(t: &LetterTemplate) -> String {
    match t {
        LetterTemplate::T { a, b } => format!("T({},{})", print_affine(*a), print_affine(*b)),
        LetterTemplate::E { head, tail } => format!("E({},{})", print_sym(head), print_sym(tail)),
    }
}

/// Prints a word in the syntax accepted by [`parse_word`]; re-parsing yields
/// a structurally equal word.
pub fn print_word(w: &TransfiniteWord) -> String {
    let mut parts = Vec::new();
    for seg in w.segments() {
        match seg {
            Segment::Explicit(ls) => parts.extend(ls.iter().map(print_letter)),
            Segment::Pattern { domain, block } => {
                let header = match domain {
                    Domain::Omega { start } => format!("prod n = {start} to inf"),
                    Domain::OmegaStar { start } => format!("prod n = inf to {start}"),
                    Domain::Zeta => "prod n = -inf to inf".to_string(),
                };
                let body: Vec<String> = block.iter().map(print_template).collect();
                parts.push(format!("{header} {{ {} }}", body.join(" ")));
            }
        }
    }
    parts.join(" ")
}
