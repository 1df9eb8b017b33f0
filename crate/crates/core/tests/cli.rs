use std::process::{Command, Output};

const ZETA_SHIFT: &str = "prod n = -inf to inf { T(-n, -n+1) }";
const OMEGA_SHIFT: &str = "prod n = 0 to inf { T(-n, n+1) T(-n, -(n+1)) }";
const RAY: &str = "prod n = 0 to inf { T(-n+1, -n+2) }";

fn bigfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bigfree"))
        .args(args)
        .env_remove("BIGFREE_BUDGET")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_str(&stdout(o)).expect("valid JSON")
}

#[test]
fn eval_perm_prints_the_shift() {
    let o = bigfree(&["eval-perm", "--word", ZETA_SHIFT, "--points", "-20..20"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for n in -20i64..=20 {
        assert!(text.contains(&format!("{n} -> {}", n + 1)), "missing {n}");
    }

    let o = bigfree(&["--json", "eval-perm", "--word", OMEGA_SHIFT, "--points", "0..3"]);
    let v = json(&o);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["map"][0], serde_json::json!([0, 1]));
}

#[test]
fn sigma_admissibility_exit_codes() {
    let o = bigfree(&["check-sigma-admissible", "--word", ZETA_SHIFT]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let o = bigfree(&["check-sigma-admissible", "--word", ZETA_SHIFT, "--prime"]);
    assert_eq!(code(&o), 1);

    let o = bigfree(&["check-sigma-admissible", "--word", OMEGA_SHIFT, "--prime"]);
    assert_eq!(code(&o), 0);

    let o = bigfree(&["--json", "check-sigma-admissible", "--word", RAY]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["status"], "refuted");
    assert_eq!(v["witness"]["point"], 2);
}

#[test]
fn aut_admissibility_exit_codes() {
    let o = bigfree(&["check-aut-admissible", "--word", "prod n = 1 to inf { E(n+1, n) }"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let o = bigfree(&["--json", "check-aut-admissible", "--word", "prod n = 1 to inf { E(n, n+1) }"]);
    assert_eq!(code(&o), 1);
    let v = json(&o);
    assert_eq!(v["status"], "refuted");
    assert!(v["witness"]["head_indices"].as_array().unwrap().len() >= 2);
}

#[test]
fn eval_aut_reports_images() {
    let o = bigfree(&["eval-aut", "--word", "prod n = inf to 1 { E(n+1, n) }", "--gens", "1..4"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("x3 -> x3 x2 x1"), "{text}");
}

#[test]
fn reduce_tuple_outputs_moves() {
    let o = bigfree(&["--json", "reduce-tuple", "--entry", "x2", "--entry", "x1 x2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["reduced"], serde_json::json!(["x2", "x1"]));
    assert!(!v["moves"].as_array().unwrap().is_empty());
}

#[test]
fn decompose_aut_roundtrip_data() {
    let o = bigfree(&["--json", "decompose-aut", "--image", "x2", "--image", "x1 x2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(v["sigma"].as_array().is_some());
    assert!(v["letters"].as_array().is_some());
}

#[test]
fn factor_ra_reports_residual_level() {
    let o = bigfree(&[
        "--json",
        "factor-ra",
        "--word",
        "prod n = 1 to inf { E(n+1, n) }",
        "--depth",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json(&o);
    assert_eq!(v["alphas"].as_array().unwrap().len(), 3);
    assert!(v["residual_level"].as_u64().unwrap() >= 3);
}

#[test]
fn kernel_check_distinguishes() {
    let o = bigfree(&["kernel-check", "--word", "E(1,2) E(1,-2)", "--gens", "3"]);
    assert_eq!(code(&o), 0);
    let o = bigfree(&["kernel-check", "--word", "E(1,2)", "--gens", "3"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn presentations_emit_and_verify() {
    let o = bigfree(&["emit-presentation", "--group", "saut", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let dir = std::env::temp_dir().join("bigfree-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("saut3.json");
    std::fs::write(&path, stdout(&o)).unwrap();

    let o = bigfree(&["verify-presentation", "--path", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("relators verified"));

    // Tampering must be caught.
    let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let rels = v["relators"].as_array_mut().unwrap();
    rels[0]["word"].as_array_mut().unwrap().pop();
    let bad = dir.join("saut3-bad.json");
    std::fs::write(&bad, serde_json::to_string(&v).unwrap()).unwrap();
    let o = bigfree(&["verify-presentation", "--path", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);

    let o = bigfree(&["emit-presentation", "--group", "stab-saut", "--n", "3", "--k", "3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v["generators"].as_array().unwrap().is_empty());
}

#[test]
fn project_filters_letters() {
    let o = bigfree(&["project", "--word", "T(1,2) T(5,6) T(2,3)", "--points", "1..3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "T(1,2) T(2,3)");

    let o = bigfree(&["project", "--word", "E(1,2) E(4,1) E(3,2)", "--min-head", "3"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "E(4,1) E(3,2)");
}

#[test]
fn sigma_relators_all_die() {
    let o = bigfree(&["verify-sigma-relators", "--points", "-3..3", "--window", "-10..10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("fix the window"));

    let o = bigfree(&["--json", "relators", "--points", "0..2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert!(!v["relators"].as_array().unwrap().is_empty());
}

#[test]
fn usage_and_budget_exit_codes() {
    let o = bigfree(&["eval-perm", "--points", "0..3"]);
    assert_eq!(code(&o), 3, "missing word should be a usage error");

    let o = bigfree(&["check-sigma-admissible", "--word", "T(1,2"]);
    assert_eq!(code(&o), 3, "parse error should be a usage error");

    let o = bigfree(&["no-such-verb"]);
    assert_eq!(code(&o), 3);

    // An absurdly small budget turns evaluation into a budget failure.
    let o = bigfree(&["--budget", "1", "eval-perm", "--word", OMEGA_SHIFT, "--points", "-9..9"]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));

    let o = Command::new(env!("CARGO_BIN_EXE_bigfree"))
        .args(["eval-perm", "--word", OMEGA_SHIFT, "--points", "-9..9"])
        .env("BIGFREE_BUDGET", "1")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2, "env budget should apply");
}

#[test]
fn parse_errors_carry_position() {
    let o = bigfree(&["check-sigma-admissible", "--word", "T(1,2)\nT(3,,4)"]);
    assert_eq!(code(&o), 3);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}
