//! End-to-end checks of the binary: exit codes, pipe composability, and
//! deterministic output.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shabda"))
}

fn run_with_stdin(args: &[&str], stdin: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary spawns");
    child
        .stdin
        .as_mut()
        .expect("stdin piped")
        .write_all(stdin.as_bytes())
        .expect("stdin written");
    child.wait_with_output().expect("binary exits")
}

fn stdout_str(output: &Output) -> String {
    String::from_utf8(output.stdout.clone()).expect("utf-8 stdout")
}

#[test]
fn help_exits_zero() {
    let output = run_with_stdin(&["--help"], "");
    assert!(output.status.success());
}

#[test]
fn unknown_flag_is_usage_error() {
    let output = run_with_stdin(&["segment", "--bogus"], "");
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn missing_subcommand_is_usage_error() {
    let output = run_with_stdin(&[], "");
    assert_eq!(output.status.code(), Some(1));
}

#[test]
fn bad_data_line_is_data_error_with_line_number() {
    let output = run_with_stdin(&["sandhi-join"], "tatra api\nonlyone\n");
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("stdin:2"), "stderr: {stderr}");
}

#[test]
fn translit_normalize_roundtrip() {
    let output = run_with_stdin(&["translit", "--from", "devanagari", "--to", "slp1"], "संधि\n");
    assert_eq!(stdout_str(&output), "saMDi\n");
    let output = run_with_stdin(&["normalize", "--from", "slp1"], "saMDi\n");
    assert_eq!(stdout_str(&output), "sanDi\n");
}

#[test]
fn normalize_warns_on_final_anusvara() {
    let output = run_with_stdin(&["normalize"], "gfhaM\n");
    assert!(output.status.success());
    assert_eq!(stdout_str(&output), "gfhaM\n");
    let stderr = String::from_utf8(output.stderr).unwrap();
    assert!(stderr.contains("word-final anusvara"), "stderr: {stderr}");
}

#[test]
fn segment_uses_lexicon_file() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon = dir.path().join("lex.tsv");
    std::fs::write(&lexicon, "tatra\t1\napi\t1\n").unwrap();
    let output = run_with_stdin(
        &["segment", "--lexicon", lexicon.to_str().unwrap(), "-k", "1"],
        "tatrApi\n",
    );
    assert!(output.status.success());
    assert_eq!(stdout_str(&output), "tatra+api\n");
}

#[test]
fn encode_decode_roundtrip() {
    let output = run_with_stdin(&["encode"], "tatra+api\n");
    assert_eq!(stdout_str(&output), "&tatra+api$\n");
    let output = run_with_stdin(&["decode"], "&tatra+api$\n");
    assert_eq!(stdout_str(&output), "tatra+api\n");
}

#[test]
fn pipeline_matches_library_composition() {
    let dir = tempfile::tempdir().unwrap();
    let lexicon_path = dir.path().join("lex.tsv");
    std::fs::write(&lexicon_path, "sanDi\t2\ntatra\t2\napi\t2\nviccheda\t1\n").unwrap();
    let input = "saMDi\ntatrApi\n\nviccheda\n";

    let normalized = run_with_stdin(&["normalize"], input);
    let segmented = run_with_stdin(
        &["segment", "--lexicon", lexicon_path.to_str().unwrap()],
        &stdout_str(&normalized),
    );
    let encoded = run_with_stdin(&["encode"], &stdout_str(&segmented));
    assert!(encoded.status.success());

    // same three operations through the library
    let lexicon = shabda::segmenter::Lexicon::load(&lexicon_path).unwrap();
    let rules = shabda::sandhi::RuleTable::default_table();
    let mut expected = String::new();
    for line in input.lines() {
        if line.trim().is_empty() {
            expected.push('\n');
            continue;
        }
        let normalized = shabda::script::normalize_anusvara(&shabda::TaggedText::new(
            line,
            shabda::ScriptTag::Slp1,
        ))
        .unwrap();
        let top = shabda::segmenter::segment(normalized.text(), &lexicon, rules, 1).unwrap();
        expected.push_str(&shabda::segmenter::encode_target(&top[0].segments).unwrap());
        expected.push('\n');
    }
    assert_eq!(stdout_str(&encoded), expected);
}

#[test]
fn jobs_flag_preserves_output() {
    let mut input = String::new();
    for i in 0..500 {
        input.push_str(if i % 3 == 0 { "saMDi\n" } else { "tatrApi\n" });
    }
    let single = run_with_stdin(&["normalize", "--jobs", "1"], &input);
    let parallel = run_with_stdin(&["normalize", "--jobs", "4"], &input);
    assert!(single.status.success() && parallel.status.success());
    assert_eq!(single.stdout, parallel.stdout);
}

#[test]
fn eval_chrf_identity_corpus_scores_100() {
    let dir = tempfile::tempdir().unwrap();
    let hyp = dir.path().join("h.txt");
    let refr = dir.path().join("r.txt");
    std::fs::write(&hyp, "jana samūha\nracanā\n").unwrap();
    std::fs::write(&refr, "jana samūha\nracanā\n").unwrap();
    let output = run_with_stdin(
        &[
            "eval-chrf",
            "--hyp",
            hyp.to_str().unwrap(),
            "--ref",
            refr.to_str().unwrap(),
        ],
        "",
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&output)).unwrap();
    assert!((report["chrf_document"].as_f64().unwrap() - 100.0).abs() < 1e-9);
    assert!((report["chrf_mean"].as_f64().unwrap() - 100.0).abs() < 1e-9);
}

#[test]
fn eval_seg_gold_as_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let pred = dir.path().join("pred.jsonl");
    std::fs::write(
        &pred,
        concat!(
            "{\"input\":\"tatrApi\",\"gold\":[\"tatra\",\"api\"],\"pred\":[\"tatra\",\"api\"]}\n",
            "{\"input\":\"narendra\",\"gold\":[\"nara\",\"indra\"],\"pred\":\"&nara+indra$\"}\n",
        ),
    )
    .unwrap();
    let output = run_with_stdin(
        &["eval-seg", "--pred", pred.to_str().unwrap(), "--per-item"],
        "",
    );
    assert!(output.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&output)).unwrap();
    let scores = &report["segmentation"];
    for key in ["lpa", "spa", "precision", "recall", "f1", "pm"] {
        assert_eq!(scores[key].as_f64().unwrap(), 1.0, "{key}");
    }
    assert_eq!(report["per_item"].as_array().unwrap().len(), 2);
}

#[test]
fn prune_writes_kept_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.tsv");
    let report = dir.path().join("pruned.tsv");
    std::fs::write(&corpus, "tatrApi\ttatra+api\nxyz\t+\n").unwrap();
    let output = run_with_stdin(
        &[
            "prune",
            "--script",
            "slp1",
            "--report",
            report.to_str().unwrap(),
            corpus.to_str().unwrap(),
        ],
        "",
    );
    assert!(output.status.success());
    assert_eq!(stdout_str(&output), "tatrApi\ttatra+api\n");
    assert_eq!(
        std::fs::read_to_string(&report).unwrap(),
        "2\tempty-segments\n"
    );
}

#[test]
fn corpus_stats_reports_histogram() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus.tsv");
    std::fs::write(&corpus, "tatrApi\ttatra+api\nnarendra\tnara+indra\n").unwrap();
    let output = run_with_stdin(
        &["corpus-stats", "--script", "slp1", corpus.to_str().unwrap()],
        "",
    );
    assert!(output.status.success());
    let stats: serde_json::Value = serde_json::from_str(&stdout_str(&output)).unwrap();
    assert_eq!(stats["instances"], 2);
    assert_eq!(stats["segment_histogram"]["2"], 2);
}

#[test]
fn data_dir_env_supplies_tables() {
    let dir = tempfile::tempdir().unwrap();
    // a deliberately tiny rule table: only savarna a+a
    std::fs::write(dir.path().join("sandhi_rules.tsv"), "a\ta\tA\tvowel\n").unwrap();
    let mut child = bin()
        .args(["sandhi-join"])
        .env("SHABDA_DATA_DIR", dir.path())
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(b"nara indra\ntatra api\n")
        .unwrap();
    let output = child.wait_with_output().unwrap();
    assert!(output.status.success());
    // guna is absent from the tiny table, so nara+indra concatenates
    assert_eq!(stdout_str(&output), "naraindra\ntatrApi\n");
}

#[test]
fn config_file_supplies_paths_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let lex_a = dir.path().join("a.tsv");
    let lex_b = dir.path().join("b.tsv");
    std::fs::write(&lex_a, "tatra\t1\napi\t1\n").unwrap();
    std::fs::write(&lex_b, "tatrA\t5\npi\t5\n").unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(
        &config,
        format!("{{\"lexicon\": {:?}}}", lex_a.to_str().unwrap()),
    )
    .unwrap();

    let from_config = run_with_stdin(
        &["segment", "--config", config.to_str().unwrap()],
        "tatrApi\n",
    );
    assert_eq!(stdout_str(&from_config), "tatra+api\n");

    let flag_wins = run_with_stdin(
        &[
            "segment",
            "--config",
            config.to_str().unwrap(),
            "--lexicon",
            lex_b.to_str().unwrap(),
        ],
        "tatrApi\n",
    );
    assert_eq!(stdout_str(&flag_wins), "tatrA+pi\n");
}

#[test]
fn config_with_missing_path_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, "{\"lexicon\": \"/nonexistent/lex.tsv\"}").unwrap();
    let output = run_with_stdin(
        &["segment", "--config", config.to_str().unwrap()],
        "tatra\n",
    );
    assert_eq!(output.status.code(), Some(2));
}
