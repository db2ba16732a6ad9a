//! Acceptance suite: every shipped construction is checked against its
//! brute-force oracle at the stated bounds, with exact schedules and timing
//! limits pinned in code. Each criterion prints one pass/fail line
//! (visible with `cargo test --test acceptance -- --nocapture`).

use std::time::Instant;

use catlab::bridge::{
    compile_cat_to_iat, compile_cat_to_iat_with, compile_iat_to_cat, compile_iat_to_cat_with,
    Materialization,
};
use catlab::builtins;
use catlab::dpdt::{self, Seg, StackLine, StackOp};
use catlab::engine::{cat_run, default_step_cap, RunnableCat};
use catlab::fssp::{build_sync, verify_sync, SyncVariant};
use catlab::harness::{
    check_locality, equiv_check, equiv_check_full, equiv_check_with_note, fuzz_engine_invariants,
    join_word, machine_oracle, measure_complexity, measure_complexity_with_cap, Machine,
    ShortlexWords, Verdict,
};
use catlab::machine::{Rational, TimeComplexity, TimeModel};
use catlab::samples;
use catlab::sfst::{
    self, extract_nfa, powerset_dfa, to_grammar, vsets, RightLinearGrammar,
};

fn ab() -> Vec<String> {
    vec!["a".to_string(), "b".to_string()]
}

fn pass(criterion: &str, detail: String) {
    println!("PASS {criterion}: {detail}");
}

#[test]
fn criterion_01_builtin_correctness() {
    let started = Instant::now();
    let mut total_words = 0;
    for name in ["copy", "sort", "reverse"] {
        let spec = builtins::builtin_by_name(name).expect("builtin");
        let f = catlab::harness::oracle_function(name).expect("oracle");
        let oracle = move |w: &[String]| Ok(f(&join_word(w)));
        let report = equiv_check(Machine::Cat(spec), &oracle, &ab(), 10).expect("harness");
        assert_eq!(report.verdict, Verdict::Pass, "{name}: {report}");
        assert_eq!(report.words_checked, 2046, "{name}");
        total_words += report.words_checked;
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 60, "took {elapsed:?}");
    pass(
        "criterion 1 (builtin correctness)",
        format!("copy, sort, reverse exact on {total_words} words in {elapsed:.1?}"),
    );
}

#[test]
fn criterion_02_copy_schedule() {
    let spec = builtins::builtin_by_name("copy").expect("builtin");
    let cat = RunnableCat::new(spec).expect("valid");
    let mut checked = 0;
    for word in ShortlexWords::new(&ab(), 10) {
        let n = word.len();
        let trace = cat_run(&cat, &word, default_step_cap(n)).expect("run");
        let mut max_fill = 0;
        for i in 0..n {
            // Cell i fills at time i in the left half, mirrored on the
            // right; the odd middle fills at ⌈n/2⌉.
            let expected = (i + 1).min(n - i);
            let got = trace.fill_time(i).expect("filled");
            assert_eq!(got, expected, "cell {} of {}", i + 1, join_word(&word));
            max_fill = max_fill.max(got);
        }
        assert_eq!(max_fill, n.div_ceil(2), "max fill of {}", join_word(&word));
        checked += 1;
    }
    pass("criterion 2 (copy schedule)", format!("exact fill times on {checked} words"));
}

#[test]
fn criterion_03_sort_reverse_timing() {
    for name in ["sort", "reverse"] {
        let spec = builtins::builtin_by_name(name).expect("builtin");
        let cat = RunnableCat::new(spec).expect("valid");
        for word in ShortlexWords::new(&ab(), 10) {
            let n = word.len();
            let trace = cat_run(&cat, &word, default_step_cap(n)).expect("run");
            for i in 0..n {
                assert_eq!(
                    trace.fill_time(i),
                    Some(n),
                    "{name}: register {} of {}",
                    i + 1,
                    join_word(&word)
                );
            }
            assert!(
                trace.accept_time.expect("accepted") <= n,
                "{name}: acceptance of {}",
                join_word(&word)
            );
        }
    }
    pass(
        "criterion 3 (sort/reverse timing)",
        "every register fills at exactly step n; acceptance within n".into(),
    );
}

#[test]
fn criterion_04_fssp_exactness() {
    let started = Instant::now();
    let two = build_sync(SyncVariant::TwoGeneral);
    let one = build_sync(SyncVariant::SingleGeneral);
    let report_two = verify_sync(&two, 200);
    assert!(report_two.is_empty(), "two-general: {report_two:?}");
    let report_one = verify_sync(&one, 200);
    assert!(report_one.is_empty(), "single-general: {report_one:?}");
    for n in 2..=200 {
        assert_eq!(two.fire_time(n), n);
        assert_eq!(one.fire_time(n), 2 * n - 2);
    }
    let elapsed = started.elapsed();
    assert!(elapsed.as_secs() < 30, "took {elapsed:?}");
    pass(
        "criterion 4 (FSSP exactness)",
        format!("exact simultaneous firing for n in 2..=200 in {elapsed:.1?}"),
    );
}

#[test]
fn criterion_05_theorem_two_compiler() {
    let rt = TimeComplexity::real_time();
    let sources = [
        ("identity", samples::iat_identity()),
        ("parity-annotator", samples::iat_parity_annotator()),
        ("block-counter", samples::iat_block_counter()),
    ];
    for (name, src) in &sources {
        let compiled = compile_iat_to_cat(src, rt, rt).expect("compile");
        let oracle = machine_oracle(Machine::Iat(src)).expect("oracle");
        let report = equiv_check(Machine::Cat(&compiled), &oracle, &ab(), 8).expect("harness");
        assert_eq!(report.verdict, Verdict::Pass, "{name}: {report}");
        // Timing preservation on lengths 2..40 against the source's
        // real-time bounds (the identity-plus-one functions of the
        // sequential model).
        let profile = measure_complexity(Machine::Cat(&compiled), &ab(), 2..=40).expect("measure");
        assert_eq!(profile.model, TimeModel::Cat);
        for row in &profile.rows {
            if let Some(t) = row.max_accept {
                assert!(t <= row.len + 1, "{name}: t_i({}) = {t}", row.len);
            }
            if let Some(t) = row.max_complete {
                assert!(t <= row.len + 1, "{name}: t_o({}) = {t}", row.len);
            }
        }
    }
    pass(
        "criterion 5 (IAT→CAT compiler)",
        "identity, parity-annotator, block-counter: equivalent to length 8, \
         timing preserved on lengths 2..40"
            .into(),
    );
}

#[test]
fn criterion_06_theorem_three_and_round_trip() {
    // Reported linear factor for the store–synchronize–simulate–collect
    // construction; the measured profile must stay below it at every length.
    let declared = Rational::new(12, 1);
    // The compiled machines run past the default 4n + 16 cap (the firing
    // squad alone costs 3n), so the checks override it.
    let cap = |n: usize| 12 * n + 32;
    for (name, src) in
        [("copy", builtins::build_copy_cat()), ("sort", builtins::build_sort_cat())]
    {
        let compiled = compile_cat_to_iat(&src).expect("compile");
        let oracle = machine_oracle(Machine::Cat(&src)).expect("oracle");
        let report =
            equiv_check_full(Machine::Iat(&compiled), &oracle, &ab(), 8, None, Some(&cap))
                .expect("harness");
        assert_eq!(report.verdict, Verdict::Pass, "{name}: {report}");
        let profile =
            measure_complexity_with_cap(Machine::Iat(&compiled), &ab(), 2..=40, Some(&cap))
                .expect("measure");
        for row in &profile.rows {
            for t in [row.max_accept, row.max_complete].into_iter().flatten() {
                assert!(
                    declared.bounds(t as u64, row.len as u64),
                    "{name}: time {t} at length {} exceeds {declared}·n",
                    row.len
                );
            }
        }
        // Stability: the per-length factor does not grow with n.
        let early = profile.rows[..10]
            .iter()
            .filter_map(|r| r.max_complete.map(|t| t as f64 / r.len as f64))
            .fold(0.0f64, f64::max);
        let late = profile.rows[20..]
            .iter()
            .filter_map(|r| r.max_complete.map(|t| t as f64 / r.len as f64))
            .fold(0.0f64, f64::max);
        assert!(late <= early + 0.5, "{name}: factor grows from {early:.2} to {late:.2}");
    }

    // Double round trip: CAT → IAT → CAT preserves the transduction.
    let lt8 = TimeComplexity::linear(Rational::new(8, 1));
    for (name, src) in
        [("copy", builtins::build_copy_cat()), ("sort", builtins::build_sort_cat())]
    {
        let as_iat = compile_cat_to_iat_with(&src, 12).expect("compile down");
        let back = compile_iat_to_cat_with(
            &as_iat,
            lt8,
            lt8,
            Materialization::Runs { max_len: 6 },
        )
        .expect("compile back");
        let oracle = machine_oracle(Machine::Cat(&src)).expect("oracle");
        let report =
            equiv_check_full(Machine::Cat(&back), &oracle, &ab(), 6, None, Some(&cap))
                .expect("harness");
        assert_eq!(report.verdict, Verdict::Pass, "round trip of {name}: {report}");
    }
    pass(
        "criterion 6 (CAT→IAT compiler and round trip)",
        format!("copy and sort equivalent to length 8 within {declared}·n; double round trip exact to length 6"),
    );
}

/// Brute-force derivation search: `Y ⇒* word[i..]`, independent of the V
/// recurrence.
fn derives(grammar: &RightLinearGrammar, y: usize, word: &[usize], i: usize) -> bool {
    if i == word.len() {
        return false;
    }
    grammar.productions.iter().any(|p| {
        p.lhs == y
            && p.sym == word[i]
            && match p.rhs {
                None => i + 1 == word.len(),
                Some(z) => derives(grammar, z, word, i + 1),
            }
    })
}

#[test]
fn criterion_07_sfst_pipeline() {
    // Powerset equivalence to length 10.
    for spec in [samples::fst_ab_plus(), samples::sfst_ends_in_b(), samples::dfst_homomorphism()]
    {
        let nfa = extract_nfa(&spec).expect("λ-free");
        let dfa = powerset_dfa(&nfa);
        for word in ShortlexWords::new(&ab(), 10) {
            assert_eq!(nfa.accepts(&word), dfa.accepts(&word), "{}", join_word(&word));
        }
    }

    // V sets against a brute-force derivation search on random
    // (grammar, word) pairs.
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(naught());
    let mut pairs = 0;
    while pairs < 120 {
        let n_states = rng.random_range(2..=4);
        let mut spec = samples::fst_ab_plus();
        spec.states = (0..n_states).map(|i| format!("q{i}")).collect();
        spec.initial = "q0".into();
        spec.accepting =
            (0..n_states).filter(|_| rng.random_bool(0.4)).map(|i| format!("q{i}")).collect();
        if spec.accepting.is_empty() {
            spec.accepting.insert(format!("q{}", n_states - 1));
        }
        spec.rules.clear();
        for _ in 0..rng.random_range(2..=7) {
            let from = format!("q{}", rng.random_range(0..n_states));
            let to = format!("q{}", rng.random_range(0..n_states));
            let sym = if rng.random_bool(0.5) { "a" } else { "b" };
            spec.rules.push(catlab::machine::SeqRule {
                from,
                input: Some(sym.to_string()),
                pop: None,
                to,
                out: String::new(),
                push: None,
            });
        }
        let Ok(nfa) = extract_nfa(&spec) else { continue };
        let Ok(grammar) = to_grammar(&nfa) else { continue };
        let len = rng.random_range(1..=6);
        let word: Vec<usize> = (0..len).map(|_| rng.random_range(0..2)).collect();
        let v = vsets(&grammar, &word);
        for i in 0..word.len() {
            for y in 0..grammar.nonterminal_names.len() {
                assert_eq!(
                    RightLinearGrammar::contains(v[i], y),
                    derives(&grammar, y, &word, i),
                    "V_{} of {} in grammar with {} productions",
                    i + 1,
                    y,
                    grammar.productions.len()
                );
            }
        }
        pairs += 1;
    }

    // Compiled machines: equivalent to length 10 with every register filled
    // at exactly step n.
    for (name, spec) in
        [("dfst", samples::dfst_homomorphism()), ("ends-in-b", samples::sfst_ends_in_b())]
    {
        let compiled = sfst::compile_sfst_to_cat(&spec, sfst::SfstOptions::default()).expect("compile");
        let cat = RunnableCat::new(&compiled).expect("valid");
        for word in ShortlexWords::new(&ab(), 10) {
            let n = word.len();
            let trace = cat_run(&cat, &word, default_step_cap(n)).expect("run");
            let expected = {
                let outs = catlab::harness::oracle_fst_all_paths(&spec, &word).expect("oracle");
                outs.into_iter().next()
            };
            assert_eq!(trace.final_output, expected, "{name} on {}", join_word(&word));
            if expected.is_some() {
                assert_eq!(trace.accept_time, Some(n), "{name} t_i on {}", join_word(&word));
                for i in 0..n {
                    assert_eq!(
                        trace.fill_time(i),
                        Some(n),
                        "{name}: register {} of {}",
                        i + 1,
                        join_word(&word)
                    );
                }
            }
        }
    }
    pass(
        "criterion 7 (SFST pipeline)",
        format!("powerset exact to length 10; V sets match brute force on {pairs} random pairs; compiled machines (rt, rt)"),
    );
}

fn naught() -> u64 {
    0xC0FFEE
}

#[test]
fn criterion_08_dpdt_pipeline() {
    // Gadget replays.
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    let mut rng = StdRng::seed_from_u64(11);
    let gadget = dpdt::build_track_stack(3);
    for case in 0..500 {
        let len = rng.random_range(1..=50);
        let mut line = StackLine::new(&gadget, 60);
        let mut reference: Vec<u8> = Vec::new();
        for _ in 0..len {
            if reference.is_empty() || rng.random_bool(0.55) {
                let glen = rng.random_range(1..=3);
                let syms: Vec<u8> = (0..glen).map(|_| rng.random_range(0..4u8)).collect();
                line.step(StackOp::Push(Seg::from_slice(&syms)));
                for &s in syms.iter().rev() {
                    reference.push(s);
                }
            } else {
                assert_eq!(line.step(StackOp::Pop), reference.pop(), "stack case {case}");
            }
            assert_eq!(line.top(), reference.last().copied(), "stack case {case}");
        }
    }
    let mut rng = StdRng::seed_from_u64(12);
    for case in 0..500 {
        let len = rng.random_range(1..=50);
        let mut line = dpdt::QueueLine::new(len + 4);
        let mut reference: Vec<Seg> = Vec::new();
        for _ in 0..len {
            if rng.random_bool(0.7) {
                let glen = rng.random_range(1..=3);
                let syms: Vec<u8> = (0..glen).map(|_| rng.random_range(0..6u8)).collect();
                let group = Seg::from_slice(&syms);
                line.step(Some(group));
                reference.push(group);
            } else {
                line.step(None);
            }
        }
        for _ in 0..line.cells.len() {
            line.step(None);
        }
        assert!(line.stable(), "queue case {case}");
        assert_eq!(line.sweep(), reference, "queue case {case}");
    }

    // Compiled machines against the sequential interpreter.
    for (name, spec) in
        [("anbn-marker", samples::dpdt_an_bn()), ("lambda-burst", samples::dpdt_lambda_burst())]
    {
        let (compiled, report) = dpdt::compile_dpdt_to_cat(&spec).expect("compile");
        let cat = RunnableCat::new(&compiled).expect("valid");
        for word in ShortlexWords::new(&ab(), 8) {
            let n = word.len();
            let expected = catlab::harness::oracle_dpdt(&spec, &word).expect("oracle");
            let trace = cat_run(&cat, &word, default_step_cap(n)).expect("run");
            assert_eq!(trace.final_output, expected, "{name} on {}", join_word(&word));
            if expected.is_some() {
                assert!(
                    trace.accept_time.expect("accepted") <= n,
                    "{name} t_i on {}",
                    join_word(&word)
                );
                let to = trace.output_complete_time.expect("complete") as u64;
                assert!(
                    report.output_factor.bounds(to, n as u64),
                    "{name}: t_o({n}) = {to} exceeds c = {}",
                    report.output_factor
                );
            }
        }
        println!(
            "  {name}: k1 = {}, k2 = {}, k = {}, reported c = {}",
            report.constants.k1, report.constants.k2, report.constants.k, report.output_factor
        );
    }
    pass(
        "criterion 8 (DPDT pipeline)",
        "500 stack and 500 queue replays exact; compiled machines equivalent to length 8 \
         with t_i ≤ n and t_o ≤ c·n"
            .into(),
    );
}

#[test]
fn criterion_09_square_marker_relaxation() {
    let spec = builtins::builtin_by_name("square_marker").expect("builtin");
    let f = catlab::harness::oracle_function("square_marker").expect("oracle");
    let oracle = move |w: &[String]| Ok(f(&join_word(w)));
    let report = equiv_check_with_note(
        Machine::Cat(spec),
        &oracle,
        &ab(),
        10,
        Some("acceptance relaxed to 2n for this builtin (output stays rt)".into()),
    )
    .expect("harness");
    assert_eq!(report.verdict, Verdict::Pass, "{report}");
    assert!(report.bounds_note.is_some(), "the relaxed bound must be recorded");
    for row in &report.timing {
        if let Some(t) = row.max_complete {
            assert_eq!(t, row.len, "t_o({})", row.len);
        }
        if let Some(t) = row.max_accept {
            assert!(t <= 2 * row.len, "t_i({}) = {t}", row.len);
        }
    }
    pass(
        "criterion 9 (documented square-marker relaxation)",
        format!(
            "equivalent on 2046 words; t_o = n, t_i ≤ 2n; note: {}",
            report.bounds_note.as_deref().unwrap_or_default()
        ),
    );
}

#[test]
fn criterion_10_engine_invariants() {
    let fuzz = fuzz_engine_invariants(1000, 42);
    assert!(fuzz.failures.is_empty(), "{:?}", &fuzz.failures[..fuzz.failures.len().min(3)]);
    let locality = check_locality(250, 43);
    assert!(locality.failures.is_empty(), "{:?}", &locality.failures[..3.min(locality.failures.len())]);
    pass(
        "criterion 10 (engine invariants)",
        format!(
            "monotonicity and determinism on {} random (spec, word) cases; locality on {}",
            fuzz.cases, locality.cases
        ),
    );
}
