//! End-to-end checks of the command-line interface and its exit-code
//! contract: 0 success, 1 semantic rejection or counterexample, 2 usage or
//! validation error.

use std::path::PathBuf;
use std::process::{Command, Output};

fn catlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("catlab-test-{}-{name}", std::process::id()));
    path
}

#[test]
fn run_reverse_prints_ba_and_succeeds() {
    let out = catlab(&["run", "--builtin", "reverse", "--input", "ab"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("output: ba"), "{stdout}");
}

#[test]
fn run_square_marker_rejects_odd_words() {
    let out = catlab(&["run", "--builtin", "square_marker", "--input", "aba"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn run_sort_emits_everything_at_step_n() {
    let svg = tmp("sort.svg");
    let trace = tmp("sort.txt");
    let out = catlab(&[
        "run",
        "--builtin",
        "sort",
        "--input",
        "babaabba",
        "--svg",
        svg.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("output: aaaabbbb"), "{stdout}");
    assert!(stdout.contains("t_o = 8"), "{stdout}");
    let svg_text = std::fs::read_to_string(&svg).expect("svg written");
    assert!(svg_text.starts_with("<svg"), "svg document");
    // All eight emissions in the diagram sit on row 8 (y = PAD + 8 * CELL).
    let highlighted = svg_text
        .lines()
        .filter(|l| l.contains(r#"stroke="black""#))
        .collect::<Vec<_>>();
    assert_eq!(highlighted.len(), 8, "one highlighted rectangle per cell");
    assert!(
        highlighted.iter().all(|l| l.contains(r#"y="242""#)),
        "emissions at row 8: {highlighted:?}"
    );

    // The stored trace renders back to the same SVG.
    let rendered = tmp("sort-rendered.svg");
    let out = catlab(&[
        "render",
        trace.to_str().unwrap(),
        "--format",
        "svg",
        "--output",
        rendered.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let _ = std::fs::remove_file(svg);
    let _ = std::fs::remove_file(trace);
    let _ = std::fs::remove_file(rendered);
}

#[test]
fn check_builtin_against_its_oracle() {
    let out = catlab(&["check", "--builtin", "copy", "--oracle", "copy", "--max-len", "6"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("pass (126 words checked)"), "{stdout}");
}

#[test]
fn sync_reports_firing_times() {
    let out = catlab(&["sync", "--variant", "single-general", "-n", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("step 8"), "{stdout}");
    let out = catlab(&["sync", "--variant", "two-general", "-n", "8", "--verify", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("step 8"), "{stdout}");
    assert!(stdout.contains("verified"), "{stdout}");
}

#[test]
fn render_of_an_empty_trace_fails_with_usage_error() {
    let empty = tmp("empty.txt");
    std::fs::write(&empty, "# catlab trace v1\n").unwrap();
    let out = catlab(&["render", empty.to_str().unwrap(), "--format", "svg"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(empty);
}

#[test]
fn compile_and_check_pipeline() {
    use catlab::{serialize_machine, MachineSpec};
    let fst = tmp("dfst.json");
    let compiled = tmp("dfst-cat.json");
    std::fs::write(
        &fst,
        serialize_machine(&MachineSpec::Seq(catlab::samples::dfst_homomorphism())),
    )
    .unwrap();
    let out = catlab(&[
        "compile",
        "--from",
        "sfst",
        fst.to_str().unwrap(),
        "-o",
        compiled.to_str().unwrap(),
        "--sv-check-len",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let oracle = format!("fst:{}", fst.display());
    let out = catlab(&[
        "check",
        "--machine",
        compiled.to_str().unwrap(),
        "--oracle",
        &oracle,
        "--max-len",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_file(fst);
    let _ = std::fs::remove_file(compiled);
}

#[test]
fn compile_iat_source_end_to_end() {
    use catlab::{serialize_machine, MachineSpec};
    let iat = tmp("identity-iat.json");
    let compiled = tmp("identity-cat.json");
    std::fs::write(
        &iat,
        serialize_machine(&MachineSpec::Iat(catlab::samples::iat_identity())),
    )
    .unwrap();
    let out = catlab(&[
        "compile",
        "--from",
        "iat",
        iat.to_str().unwrap(),
        "-o",
        compiled.to_str().unwrap(),
        "--ti",
        "rt",
        "--to",
        "rt",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let oracle = format!("iat:{}", iat.display());
    let out = catlab(&[
        "check",
        "--machine",
        compiled.to_str().unwrap(),
        "--oracle",
        &oracle,
        "--max-len",
        "6",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let _ = std::fs::remove_file(iat);
    let _ = std::fs::remove_file(compiled);
}

#[test]
fn invalid_machine_document_exits_2() {
    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\"kind\": \"cat\"").unwrap();
    let out = catlab(&["run", "--machine", bad.to_str().unwrap(), "--input", "a"]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(bad);
}
