//! Command-line front end: word parsing, admissibility checks, evaluation,
//! reduction, factorization, and presentation emission/verification.
//!
//! Exit codes: 0 success/verified, 1 refuted/false, 2 unknown or budget
//! exhausted, 3 usage or input error.

use std::collections::BTreeSet;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bigfree::aut;
use bigfree::dsl;
use bigfree::error::Error;
use bigfree::freegroup::{nielsen_reduce, FreeWord, Tuple};
use bigfree::presentations as pres;
use bigfree::sym;
use bigfree::sym::Status;
use bigfree::word::{ProjectionSpec, TransfiniteWord};

const DEFAULT_BUDGET: u64 = 10_000;

#[derive(Parser)]
#[command(name = "bigfree", version, about = "Transfinite words, big free groups, and their realizations")]
struct Cli {
    /// Emit machine-readable JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Step budget for chain searches (falls back to $BIGFREE_BUDGET, then 10000).
    #[arg(long, global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Args)]
struct WordInput {
    /// Word in the text syntax, e.g. "prod n = 1 to inf { T(n,n+1) }".
    #[arg(long, conflicts_with = "word_file")]
    word: Option<String>,
    /// Path to a UTF-8 file holding the word.
    #[arg(long)]
    word_file: Option<String>,
}

impl WordInput {
    fn read(&self) -> Result<TransfiniteWord, Error> {
        let text = match (&self.word, &self.word_file) {
            (Some(w), _) => w.clone(),
            (None, Some(p)) => std::fs::read_to_string(p).map_err(|e| Error::Parse {
                line: 0,
                col: 0,
                msg: format!("cannot read {p}: {e}"),
            })?,
            (None, None) => {
                return Err(Error::Precondition("pass --word or --word-file".into()))
            }
        };
        dsl::parse_word(&text)
    }
}

#[derive(Subcommand)]
enum Verb {
    /// Decide admissibility of a transposition word (finite chains everywhere).
    CheckSigmaAdmissible {
        #[command(flatten)]
        input: WordInput,
        /// Also require admissibility of every interval restriction.
        #[arg(long)]
        prime: bool,
        /// Extra probe points, e.g. "-20..20".
        #[arg(long, default_value = "-10..10", allow_hyphen_values = true)]
        points: String,
    },
    /// Decide admissibility of a Nielsen word (bounded head occurrences, no
    /// infinite forward chains in the word or its inverse).
    CheckAutAdmissible {
        #[command(flatten)]
        input: WordInput,
    },
    /// Evaluate the permutation induced by a transposition word on a range.
    EvalPerm {
        #[command(flatten)]
        input: WordInput,
        /// Inclusive range of points, e.g. "-20..20".
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Evaluate the automorphism induced by a Nielsen word on generators.
    EvalAut {
        #[command(flatten)]
        input: WordInput,
        /// Inclusive range of generator indices, e.g. "1..10".
        #[arg(long)]
        gens: String,
    },
    /// Nielsen-reduce a tuple of free-group words.
    ReduceTuple {
        /// One tuple entry per flag, e.g. --entry "x1 x2^-1".
        #[arg(long, required = true)]
        entry: Vec<String>,
    },
    /// Decompose a finite-support automorphism into a signed permutation
    /// followed by elementary letters.
    DecomposeAut {
        /// Image of x1, x2, ... in order, one per flag.
        #[arg(long, required = true)]
        image: Vec<String>,
    },
    /// Iterate the derived form, peeling relator conjugates and letters.
    FactorRa {
        #[command(flatten)]
        input: WordInput,
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
    /// Check that a Nielsen word acts trivially on the first n generators.
    KernelCheck {
        #[command(flatten)]
        input: WordInput,
        /// Number of generators to probe.
        #[arg(long)]
        gens: u32,
    },
    /// Emit a finite presentation as JSON.
    EmitPresentation {
        /// One of: saut, aut, mccool, stab-saut, stab-aut.
        #[arg(long)]
        group: String,
        #[arg(long)]
        n: u32,
        /// Stabilized prefix length (stab-* groups only).
        #[arg(long)]
        k: Option<u32>,
    },
    /// Re-verify a presentation JSON file: every relator must die.
    VerifyPresentation {
        /// Path to the JSON produced by emit-presentation.
        #[arg(long)]
        path: String,
    },
    /// Project a word onto a sub-alphabet.
    Project {
        #[command(flatten)]
        input: WordInput,
        /// Keep transposition letters with both points in this range.
        #[arg(long, conflicts_with_all = ["gens", "min_head"], allow_hyphen_values = true)]
        points: Option<String>,
        /// Keep Nielsen letters with both indices in this range.
        #[arg(long, conflicts_with = "min_head")]
        gens: Option<String>,
        /// Keep Nielsen letters whose head index is at least this bound.
        #[arg(long)]
        min_head: Option<u32>,
    },
    /// List the symmetric-group relator instances over a point range.
    Relators {
        #[arg(long, allow_hyphen_values = true)]
        points: String,
    },
    /// Evaluate every relator instance and check it fixes a window.
    VerifySigmaRelators {
        #[arg(long, allow_hyphen_values = true)]
        points: String,
        /// Inclusive window that must be fixed pointwise, e.g. "-10..10".
        #[arg(long, default_value = "-10..10", allow_hyphen_values = true)]
        window: String,
    },
}

fn parse_range(s: &str) -> Result<Vec<i64>, Error> {
    let err = || Error::Precondition(format!("range must look like a..b, got {s:?}"));
    let (lo, hi) = s.split_once("..").ok_or_else(err)?;
    let lo: i64 = lo.trim().parse().map_err(|_| err())?;
    let hi: i64 = hi.trim().parse().map_err(|_| err())?;
    if lo > hi {
        return Err(err());
    }
    Ok((lo..=hi).collect())
}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, code: u8, payload: Value, text: String) -> ExitCode {
        if self.json {
            let mut v = json!({ "schema": 1 });
            v.as_object_mut().unwrap().extend(payload.as_object().unwrap().clone());
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
        } else {
            println!("{text}");
        }
        ExitCode::from(code)
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Verified => 0,
        Status::Refuted => 1,
        Status::Unknown => 2,
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Verified => "verified",
        Status::Refuted => "refuted",
        Status::Unknown => "unknown",
    }
}

fn error_exit(e: &Error, json: bool) -> ExitCode {
    let code = match e {
        Error::BudgetExhausted { .. } | Error::Inconclusive(_) => 2u8,
        _ => 3u8,
    };
    if json {
        println!(
            "{}",
            serde_json::to_string_pretty(&json!({ "schema": 1, "error": e.to_string() })).unwrap()
        );
    } else {
        eprintln!("error: {e}");
    }
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // Help and version requests are not usage errors.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { ExitCode::SUCCESS } else { ExitCode::from(3) };
        }
    };
    let budget = cli
        .budget
        .or_else(|| std::env::var("BIGFREE_BUDGET").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(DEFAULT_BUDGET);
    let out = Out { json: cli.json };
    match run(cli.verb, budget, &out) {
        Ok(code) => code,
        Err(e) => error_exit(&e, out.json),
    }
}

fn run(verb: Verb, budget: u64, out: &Out) -> Result<ExitCode, Error> {
    match verb {
        Verb::CheckSigmaAdmissible { input, prime, points } => {
            let w = input.read()?;
            let pts = parse_range(&points)?;
            let v = if prime {
                sym::membership_s_prime(&w, &pts, budget)?
            } else {
                sym::membership_s(&w, &pts, budget)?
            };
            let text = match &v.witness {
                Some(wit) => format!(
                    "{}: point {} diverges ({:?}), chain prefix {:?}",
                    status_str(v.status),
                    wit.point,
                    wit.direction,
                    wit.chain_prefix
                ),
                None => status_str(v.status).to_string(),
            };
            Ok(out.emit(
                status_code(v.status),
                json!({
                    "status": status_str(v.status),
                    "witness": v.witness,
                    "budget_used": v.budget_used,
                }),
                text,
            ))
        }
        Verb::CheckAutAdmissible { input } => {
            let w = input.read()?;
            let v = aut::s0s1_check(&w)?;
            let witness = v.witness.as_ref().map(|c| {
                json!({ "reversed": c.reversed, "head_indices": c.head_indices })
            });
            let mut text = format!(
                "{} (head-bound {}, chains {}, inverse chains {})",
                status_str(v.status),
                status_str(v.s0),
                status_str(v.s1),
                status_str(v.s1_bar)
            );
            if let Some(i) = v.s0_unbounded_index {
                text.push_str(&format!("; generator x{i} occurs unboundedly"));
            }
            if let Some(c) = &v.witness {
                text.push_str(&format!(
                    "; ascending chain of head indices {:?}{}",
                    c.head_indices,
                    if c.reversed { " (in the inverted word)" } else { "" }
                ));
            }
            Ok(out.emit(
                status_code(v.status),
                json!({
                    "status": status_str(v.status),
                    "head_bound": status_str(v.s0),
                    "chains": status_str(v.s1),
                    "inverse_chains": status_str(v.s1_bar),
                    "unbounded_index": v.s0_unbounded_index,
                    "witness": witness,
                }),
                text,
            ))
        }
        Verb::EvalPerm { input, points } => {
            let w = input.read()?;
            let pts = parse_range(&points)?;
            let p = sym::eval_p(&w, budget)?;
            let mut rows = Vec::new();
            for &x in &pts {
                rows.push((x, p.apply(x)?));
            }
            let text = rows
                .iter()
                .map(|(x, y)| format!("{x} -> {y}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(out.emit(
                0,
                json!({ "map": rows.iter().map(|(x, y)| json!([x, y])).collect::<Vec<_>>() }),
                text,
            ))
        }
        Verb::EvalAut { input, gens } => {
            let w = input.read()?;
            let idx = parse_range(&gens)?;
            let mut rows = Vec::new();
            for &i in &idx {
                if i < 1 {
                    return Err(Error::Precondition("generator indices start at 1".into()));
                }
                let img = aut::apply_psi(&w, &FreeWord::gen(i as u32), budget)?;
                rows.push((i, img.to_string()));
            }
            let text = rows
                .iter()
                .map(|(i, img)| format!("x{i} -> {img}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(out.emit(
                0,
                json!({ "images": rows.iter().map(|(i, s)| json!([i, s])).collect::<Vec<_>>() }),
                text,
            ))
        }
        Verb::ReduceTuple { entry } => {
            let words: Result<Vec<FreeWord>, Error> =
                entry.iter().map(|s| FreeWord::parse(s)).collect();
            let t = Tuple(words?);
            let (reduced, moves) = nielsen_reduce(&t, budget)?;
            let text = format!(
                "reduced: {}\nmoves: {}",
                reduced,
                moves.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(" ")
            );
            Ok(out.emit(
                0,
                json!({
                    "reduced": reduced.entries().iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                    "moves": moves.iter().map(|m| m.to_string()).collect::<Vec<_>>(),
                }),
                text,
            ))
        }
        Verb::DecomposeAut { image } => {
            let images: Result<Vec<FreeWord>, Error> =
                image.iter().map(|s| FreeWord::parse(s)).collect();
            let phi = aut::FinSuppAutomorphism::from_images(images?)?;
            let (sigma, letters) = aut::decompose_automorphism(&phi)?;
            let sigma_rows: Vec<(u32, String)> = sigma
                .support()
                .iter()
                .map(|&i| (i, sigma.apply_gen(bigfree::letters::GenSym::pos(i)).to_string()))
                .collect();
            let letter_strs: Vec<String> = letters.iter().map(|l| l.to_string()).collect();
            let text = format!(
                "sigma: {}\nletters: {}",
                if sigma_rows.is_empty() {
                    "identity".to_string()
                } else {
                    sigma_rows
                        .iter()
                        .map(|(i, s)| format!("x{i} -> {s}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                },
                letter_strs.join(" ")
            );
            Ok(out.emit(
                0,
                json!({
                    "sigma": sigma_rows.iter().map(|(i, s)| json!([i, s])).collect::<Vec<_>>(),
                    "letters": letter_strs,
                }),
                text,
            ))
        }
        Verb::FactorRa { input, depth } => {
            let w = input.read()?;
            let f = aut::factor_ra(&w, depth, budget)?;
            let residual_level = aut::filtration_level(&f.residual)?;
            let text = format!(
                "relator conjugates: {}\nletters: {}\nresidual: {}\nresidual level: {}",
                f.relator_parts.len(),
                f.alphas.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
                dsl::print_word(&f.residual),
                residual_level.map_or("-".to_string(), |l| l.to_string()),
            );
            Ok(out.emit(
                0,
                json!({
                    "relator_parts": f.relator_parts.iter().map(dsl::print_word).collect::<Vec<_>>(),
                    "alphas": f.alphas.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                    "residual": dsl::print_word(&f.residual),
                    "residual_level": residual_level,
                }),
                text,
            ))
        }
        Verb::KernelCheck { input, gens } => {
            let w = input.read()?;
            let trivial = aut::kernel_check(&w, gens, budget)?;
            let text = if trivial {
                format!("acts trivially on x1..x{gens}")
            } else {
                format!("moves some generator among x1..x{gens}")
            };
            Ok(out.emit(if trivial { 0 } else { 1 }, json!({ "trivial": trivial }), text))
        }
        Verb::EmitPresentation { group, n, k } => {
            let p = match (group.as_str(), k) {
                ("saut", None) => pres::gersten_saut_presentation(n)?,
                ("aut", None) => pres::gersten_aut_presentation(n)?,
                ("mccool", None) => pres::mccool_presentation(n)?,
                ("stab-saut", Some(k)) => pres::stabilizer_saut_presentation(n, k)?,
                ("stab-aut", Some(k)) => pres::stabilizer_aut_presentation(n, k)?,
                ("stab-saut" | "stab-aut", None) => {
                    return Err(Error::Precondition("stabilizer groups need --k".into()))
                }
                _ => {
                    return Err(Error::Precondition(format!(
                        "unknown group {group:?} (expected saut, aut, mccool, stab-saut, stab-aut)"
                    )))
                }
            };
            // Presentations are always printed as JSON; they are data.
            println!("{}", serde_json::to_string_pretty(&p).unwrap());
            Ok(ExitCode::SUCCESS)
        }
        Verb::VerifyPresentation { path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::Parse {
                line: 0,
                col: 0,
                msg: format!("cannot read {path}: {e}"),
            })?;
            let p: pres::Presentation = serde_json::from_str(&text).map_err(|e| Error::Parse {
                line: e.line(),
                col: e.column(),
                msg: e.to_string(),
            })?;
            let report = pres::verify_presentation(&p);
            let ok = report.all_verified();
            let text = if ok {
                format!("all {} relators verified", report.relators)
            } else {
                format!(
                    "{} of {} relators failed: {:?}; unknown generators: {:?}",
                    report.failures.len(),
                    report.relators,
                    report.failures,
                    report.unknown_generators
                )
            };
            Ok(out.emit(
                if ok { 0 } else { 1 },
                json!({
                    "relators": report.relators,
                    "verified": report.verified,
                    "failures": report.failures,
                    "unknown_generators": report.unknown_generators,
                }),
                text,
            ))
        }
        Verb::Project { input, points, gens, min_head } => {
            let w = input.read()?;
            let spec = if let Some(r) = points {
                ProjectionSpec::PointsIn(parse_range(&r)?.into_iter().collect())
            } else if let Some(r) = gens {
                let idx: BTreeSet<u32> = parse_range(&r)?
                    .into_iter()
                    .filter(|&i| i >= 1)
                    .map(|i| i as u32)
                    .collect();
                ProjectionSpec::GeneratorsIn(idx)
            } else if let Some(m) = min_head {
                ProjectionSpec::HeadIndexAtLeast(m)
            } else {
                return Err(Error::Precondition(
                    "pass one of --points, --gens, --min-head".into(),
                ));
            };
            let projected = w.project(&spec)?;
            let text = dsl::print_word(&projected);
            Ok(out.emit(0, json!({ "word": dsl::print_word(&projected) }), text))
        }
        Verb::Relators { points } => {
            let pts = parse_range(&points)?;
            let rels = sym::sigma_relators(&pts);
            let rows: Vec<(String, String)> = rels
                .iter()
                .map(|(fam, ls)| {
                    (
                        format!("{fam:?}"),
                        ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "),
                    )
                })
                .collect();
            let text = rows
                .iter()
                .map(|(f, w)| format!("{f}: {w}"))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(out.emit(
                0,
                json!({ "relators": rows.iter().map(|(f, w)| json!([f, w])).collect::<Vec<_>>() }),
                text,
            ))
        }
        Verb::VerifySigmaRelators { points, window } => {
            let pts = parse_range(&points)?;
            let win = parse_range(&window)?;
            let rels = sym::sigma_relators(&pts);
            let mut failures = Vec::new();
            for (i, (fam, ls)) in rels.iter().enumerate() {
                let w = TransfiniteWord::from_letters(ls.clone())?;
                let p = sym::eval_p(&w, budget)?;
                for &x in &win {
                    if p.apply(x)? != x {
                        failures.push(format!("{fam:?} #{i} moves {x}"));
                        break;
                    }
                }
            }
            let ok = failures.is_empty();
            let text = if ok {
                format!("all {} relators fix the window", rels.len())
            } else {
                failures.join("\n")
            };
            Ok(out.emit(
                if ok { 0 } else { 1 },
                json!({ "relators": rels.len(), "failures": failures }),
                text,
            ))
        }
    }
}
