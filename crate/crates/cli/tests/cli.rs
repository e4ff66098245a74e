mod common;

use lexchain::sample::{random_chain, Sampler};
use lexchain::{format_chain, parse_chain};
use lexchain_cli::{run, EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK};
use serde_json::Value;

fn args(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

#[test]
fn golden_outputs() {
    let cases = common::golden_cases();
    assert!(cases.len() >= 6);
    for (name, expected, actual) in cases {
        assert_eq!(actual, expected, "golden case {name}");
    }
}

#[test]
fn exit_codes() {
    let cases: &[(&[&str], i32)] = &[
        (&["cmp", "pow(fin(2),f0,fin(2))", "{}", "{f1:f1}"], EXIT_OK),
        (&["solve", "3", "omega", "n0"], EXIT_NEGATIVE),
        (&["solve", "1", "omegastar", "s0"], EXIT_OK),
        (&["--budget", "20", "refute-convex", "pow(fin(2),f0,omega)"], EXIT_NEGATIVE),
        (&["--budget", "2", "refute-convex", "pow(fin(2),f0,omega)"], EXIT_OK),
        (&["cmp", "fin(0)", "f0", "f0"], EXIT_ERROR),
        (&["cmp", "fin(2)", "f0", "f7"], EXIT_ERROR),
        (&["solve", "4", "fin(2)", "f1"], EXIT_ERROR),
        (&["enumerate", "omega"], EXIT_ERROR),
        (&["--budget", "0", "refute-eq2", "fin(2)", "f0", "fin(2)"], EXIT_ERROR),
        (&["refute-eq2", "fin(2)", "f1", "fin(2)"], EXIT_ERROR),
        (&["frobnicate"], EXIT_ERROR),
    ];
    for (list, code) in cases {
        let (_, got) = common::run_bin(&args(list));
        assert_eq!(got, *code, "{list:?}");
    }
}

#[test]
fn error_lines_carry_codes() {
    let out = run(args(&["lexchain", "cmp", "fin(2)", "f0", "f7"]));
    assert_eq!(out.code, EXIT_ERROR);
    assert!(out.stderr.starts_with("error[E_NOT_MEMBER]:"), "{}", out.stderr);
    let out = run(args(&["lexchain", "cmp", "pow(fin(2) f0, omega)", "{}", "{}"]));
    assert!(out.stderr.starts_with("error[E_SYNTAX]:"), "{}", out.stderr);
}

#[test]
fn machine_records_have_fixed_fields() {
    for list in [
        vec!["lexchain", "--machine", "cmp", "omega", "n1", "n0"],
        vec!["lexchain", "--machine", "solve", "2", "fin(2)", "f0"],
        vec!["lexchain", "--machine", "--budget", "20", "refute-convex", "pow(fin(2),f0,omega)"],
        vec!["lexchain", "--machine", "enumerate", "omega"],
    ] {
        let out = run(args(&list));
        let v: Value = serde_json::from_str(out.stdout.trim()).expect("one JSON record");
        let obj = v.as_object().unwrap();
        let mut keys: Vec<&str> = obj.keys().map(String::as_str).collect();
        keys.sort_unstable();
        assert_eq!(keys, ["kind", "reason", "result", "trace", "witness"]);
    }
    let out = run(args(&["lexchain", "--machine", "cmp", "omega", "n1", "n0"]));
    let v: Value = serde_json::from_str(out.stdout.trim()).unwrap();
    assert_eq!(v["result"], "GREATER");
}

#[test]
fn oracle_and_enumerate_agree() {
    let a = run(args(&["lexchain", "oracle", "power", "pow(fin(3), f1, fin(2))"]));
    let b = run(args(&["lexchain", "enumerate", "pow(fin(3), f1, fin(2))"]));
    assert_eq!(a.code, EXIT_OK);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with("9 elements\n"));
}

#[test]
fn iso_commands_invert_each_other() {
    let to = run(args(&["lexchain", "iso-to", "1", "fin(2)", "f1", "{stage(0, f1):f0}"]));
    assert_eq!(to.stdout.trim(), "stage(0, f0)");
    let from = run(args(&["lexchain", "iso-from", "1", "fin(2)", "f1", "stage(0, f0)"]));
    assert_eq!(from.stdout.trim(), "{stage(0, f1):f0}");
}

#[test]
fn table_embeddings_are_accepted() {
    // two adjacent middle elements of pow(fin(2), f0, fin(2)): convex, finite source
    let out = run(args(&[
        "lexchain",
        "refute-convex",
        "pow(fin(2), f0, fin(2))",
        "--iota",
        "table",
        "--table",
        "{f0:{f1:f1}, f1:{f0:f1}}",
    ]));
    assert_eq!(out.code, EXIT_OK, "{}", out.stderr);
    assert!(out.stdout.starts_with("EXHAUSTED"));
}

#[test]
fn generated_chains_round_trip() {
    let mut s = Sampler::new(11);
    for _ in 0..300 {
        let c = random_chain(&mut s, 3);
        assert_eq!(parse_chain(&format_chain(&c)).unwrap(), c);
    }
}
