use std::path::PathBuf;

fn data(rel: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(rel)
        .display()
        .to_string()
}

fn pst(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("pst").chain(args.iter().copied());
    let code = pst::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn result_lines(out: &str) -> Vec<&str> {
    out.lines().filter(|l| l.starts_with("RESULT")).collect()
}

#[test]
fn algebra_check_prints_implication_table() {
    let (code, out, _) = pst(&["algebra", "check", &data("chain3.alg")]);
    assert_eq!(code, 0);
    assert!(out.contains("imp (row x, column y = x -> y)"));
    assert!(out.contains("  0 1 2"));
    assert!(out.contains("RESULT algebra=chain3 size=3 valid=yes boolean=no"));
}

#[test]
fn non_distributive_algebra_is_invalid() {
    let (code, out, _) = pst(&["algebra", "check", &data("broken.alg")]);
    assert_eq!(code, 1);
    assert!(out.contains("distributivity fails"));
}

#[test]
fn axiom_check_pairing_on_saturated_chain() {
    let (code, out, _) = pst(&["axiom", "check", "--axiom", "pairing", "--model", &data("sat3_n4.fst"), "--rank", "2"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.contains("axiom:      pairing"));
    assert_eq!(
        result_lines(&out),
        ["RESULT axiom=pairing mode=n4 rank=2 quant=all value=2 valid=yes assignment=none"]
    );
}

#[test]
fn bad_derivation_reports_line() {
    let (code, out, _) = pst(&["prove", "check", &data("derivations/bad.drv")]);
    assert_eq!(code, 1);
    assert!(out.contains("error line 3: bad justification"), "{out}");
    let (code, out, _) = pst(&["prove", "check", &data("derivations/identity.drv"), "--format", "machine"]);
    assert_eq!(code, 0);
    assert_eq!(out, "RESULT derivation=identity system=n4 status=ok\n");
}

#[test]
fn machine_output_is_stable_and_echoes_seed() {
    let args = ["counter", "search", "--goal", "non_explosion", "--max-algebra", "3", "--seed", "17", "--format", "machine"];
    let (code, a, _) = pst(&args);
    let (_, b, _) = pst(&args);
    assert_eq!(code, 0);
    assert_eq!(a, b);
    assert_eq!(result_lines(&a).len(), 1);
    assert!(a.contains("found=yes seed=17"));
    let mut jobs = args.to_vec();
    jobs.extend(["--jobs", "4"]);
    assert_eq!(pst(&jobs).1, a);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(pst(&["algebra", "check", "--bogus"]).0, 2);
    assert_eq!(pst(&["counter", "search", "--goal", "non_explosion", "--max-algebra", "9"]).0, 2);
    assert_eq!(pst(&["eval", "--model", &data("missing.fst"), "--formula", "bot"]).0, 2);
    let (code, _, err) = pst(&["counter", "search", "--goal", "refute_formula"]);
    assert_eq!(code, 2);
    assert!(err.contains("--formula"));
}

#[test]
fn every_subcommand_has_help() {
    let cases: [&[&str]; 16] = [
        &["algebra", "check"],
        &["algebra", "enum"],
        &["algebra", "refinable"],
        &["fstructure", "check"],
        &["fstructure", "saturate"],
        &["fstructure", "sub"],
        &["universe", "enum"],
        &["universe", "hat"],
        &["eval"],
        &["leibniz"],
        &["axiom", "check"],
        &["prove", "check"],
        &["prove", "audit"],
        &["counter", "search"],
        &["counter"],
        &[],
    ];
    for case in cases {
        let mut args = case.to_vec();
        args.push("--help");
        let (code, out, _) = pst(&args);
        assert_eq!(code, 0, "{case:?}");
        assert!(out.contains("--format"), "{case:?} help lacks flags: {out}");
    }
}

#[test]
fn structure_commands() {
    let (code, out, _) = pst(&["fstructure", "check", &data("sat3_cw.fst"), "--format", "machine"]);
    assert_eq!((code, out.as_str()), (0, "RESULT fstructure=sat3 kind=comega valid=yes explosive=no\n"));
    let (code, out, _) = pst(&["fstructure", "check", &data("sat3_n4.fst"), "--format", "machine"]);
    assert_eq!(code, 1);
    assert!(out.contains("valid=no"));
    let (code, out, _) = pst(&["fstructure", "saturate", "--algebra", "bool2"]);
    assert_eq!(code, 0);
    assert!(out.contains("N 1: 0 1"));
    let (code, out, _) = pst(&["fstructure", "sub", &data("classical2.fst"), &data("bool2_n4.fst"), "--format", "machine"]);
    assert_eq!((code, out.as_str()), (0, "RESULT substructure=yes embedding=0,1\n"));
    let (code, _, _) = pst(&["fstructure", "sub", &data("bool2_n4.fst"), &data("classical2.fst")]);
    assert_eq!(code, 1);
}

#[test]
fn universe_and_eval_commands() {
    let (code, out, _) = pst(&["universe", "enum", "--algebra", "bool2", "--rank", "2"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().filter(|l| l.starts_with("name ")).count(), 3);
    let (code, out, _) = pst(&["universe", "hat", "--algebra", &data("chain3.alg"), "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.contains("holds=yes"));
    let (code, out, _) = pst(&[
        "eval",
        "--model",
        "chain3",
        "--formula",
        "forall x . exists y . ~(y in x)",
        "--format",
        "machine",
    ]);
    assert!(out.starts_with("RESULT mode=heyting rank=2 quant=all"), "{out}");
    assert_eq!(code, if out.contains("valid=yes") { 0 } else { 1 });
    let (code, _, _) = pst(&["eval", "--model", &data("sat3_cw.fst"), "--formula", "exists x . ~(x eq x)"]);
    assert_eq!(code, 1);
}

#[test]
fn audit_and_refinable() {
    let (code, out, _) = pst(&["prove", "audit", "--system", "n4", "--max-domain", "1", "--max-algebra", "3", "--format", "machine"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("RESULT system=n4"));
    assert!(out.contains("failures=0"));
    assert_eq!(pst(&["algebra", "refinable", "bool4"]).0, 0);
}
