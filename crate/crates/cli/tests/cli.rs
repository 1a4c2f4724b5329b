//! End-to-end checks of the `lamina` binary against the bundled
//! corporate-web-service model.

use std::io::Write as _;
use std::process::{Command, Output};

const MODEL: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../models/casestudy.json");

fn lamina(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lamina"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = lamina(args);
    assert!(
        out.status.success(),
        "lamina {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

#[test]
fn validate_accepts_the_bundled_model() {
    let out = lamina(&["validate", "--model", MODEL]);
    assert_eq!(exit_code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "model valid\n");
}

#[test]
fn validate_rejects_malformed_json_with_exit_1() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(b"{ not json").unwrap();
    let path = file.path().to_str().unwrap();
    let out = lamina(&["validate", "--model", path]);
    assert_eq!(exit_code(&out), 1);
    assert!(out.stdout.is_empty());
}

#[test]
fn validate_reports_violations_with_exit_1() {
    // a self-loop parses but violates link structure
    let broken = std::fs::read_to_string(MODEL)
        .unwrap()
        .replace(r#"["Switch_1", "WS_1"]"#, r#"["WS_1", "WS_1"]"#);
    let mut file = tempfile::NamedTempFile::new().unwrap();
    file.write_all(broken.as_bytes()).unwrap();
    let path = file.path().to_str().unwrap();
    let out = lamina(&["validate", "--model", path]);
    assert_eq!(exit_code(&out), 1);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("violation"), "stderr: {stderr}");
}

#[test]
fn missing_model_file_is_exit_2() {
    let out = lamina(&["analyze", "--model", "/nonexistent/model.json"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("cannot read"));
}

#[test]
fn absent_model_flag_is_exit_2() {
    let out = lamina(&["flows"]);
    assert_eq!(exit_code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("--model"));
}

#[test]
fn flows_lists_projected_paths_per_layer() {
    let text = stdout_of(&["flows", "--model", MODEL]);
    assert!(text.starts_with("model: corporate-web-service (4 layers)\n"));
    assert!(text.contains("== data flows =="));
    // one of the sixteen physical routes serving requirement 1
    assert!(text.contains("[WS_1, Switch_1, Server_1]"), "{text}");
    assert!(text.contains("Requirement 1, layer 4 (functional): 1 flow"));
}

#[test]
fn analyze_prints_characteristic_sets() {
    let text = stdout_of(&["analyze", "--model", MODEL]);
    assert!(text.contains("== characteristic sets =="));
    assert!(text.contains("DNS_Server_1"));
    assert!(text.contains("WEB_Server_1"));
    assert!(text.contains("VLAN_1"));
    assert!(text.contains("1-out-of-2"));
}

#[test]
fn ascii_flag_switches_expression_operators() {
    let unicode = stdout_of(&["analyze", "--model", MODEL]);
    let ascii = stdout_of(&["analyze", "--model", MODEL, "--ascii"]);
    assert!(unicode.contains('\u{2227}') || unicode.contains('\u{2228}'));
    assert!(!ascii.contains('\u{2227}') && !ascii.contains('\u{2228}'));
    assert!(ascii.contains('&') || ascii.contains('|'));
}

#[test]
fn exact_reliability_figure_for_the_physical_layer() {
    let text = stdout_of(&[
        "reliability", "--model", MODEL, "--layer", "1", "--mode", "exact",
    ]);
    assert_eq!(text, "0.9693723651\n");
}

#[test]
fn limited_coverage_figure_for_the_physical_layer() {
    let text = stdout_of(&[
        "reliability", "--model", MODEL, "--layer", "1", "--mode", "limited", "--k", "1",
    ]);
    assert_eq!(text, "0.9593835902\n");
}

#[test]
fn closed_form_matches_exact_on_disjoint_groups() {
    let closed = stdout_of(&[
        "reliability", "--model", MODEL, "--layer", "1", "--mode", "closed",
    ]);
    assert_eq!(closed, "0.9693723651\n");
}

#[test]
fn reliability_report_includes_deviation() {
    let text = stdout_of(&["reliability", "--model", MODEL, "--layer", "1"]);
    assert!(text.contains("0.9693723651"), "{text}");
    assert!(text.contains("0.9593835902"), "{text}");
    assert!(text.contains("1.030"), "{text}");
}

#[test]
fn reliability_table_flag_appends_truth_table_rows() {
    let text = stdout_of(&[
        "reliability", "--model", MODEL, "--layer", "1", "--table",
    ]);
    assert!(text.contains("0.6580712823"), "{text}");
    assert!(text.contains("total"), "{text}");
}

#[test]
fn unknown_layer_is_exit_2() {
    let out = lamina(&["reliability", "--model", MODEL, "--layer", "9"]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn limited_mode_rejects_k_3() {
    let out = lamina(&[
        "reliability", "--model", MODEL, "--layer", "1", "--mode", "limited", "--k", "3",
    ]);
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn single_fault_plan_has_eight_templates() {
    let json = stdout_of(&["plan", "--model", MODEL, "--format", "json"]);
    let templates: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(templates.len(), 8);
    for t in &templates {
        let kind = t["kind"].as_str().unwrap();
        assert!(kind == "inject" || kind == "repair");
        assert_eq!(t["layer"], 1);
    }
}

#[test]
fn double_fault_plan_has_sixteen_templates() {
    let json = stdout_of(&[
        "plan", "--model", MODEL, "--tolerance", "2", "--format", "json",
    ]);
    let templates: Vec<serde_json::Value> = serde_json::from_str(&json).unwrap();
    assert_eq!(templates.len(), 16);
}

#[test]
fn plan_text_includes_bounds_and_steps() {
    let text = stdout_of(&["plan", "--model", MODEL]);
    assert!(text.contains("confirm monitoring detects"), "{text}");
    assert!(text.contains("(if necessary)"), "{text}");
    assert!(text.contains("agree"), "{text}");
}

#[test]
fn curve_emits_csv_rows() {
    let text = stdout_of(&[
        "curve", "--l", "2", "--r", "2", "--from", "0.9", "--to", "0.9", "--step", "0.05",
    ]);
    assert!(
        text.starts_with("p,deviation_percent\n0.9,3.30578512"),
        "{text}"
    );
}

#[test]
fn curve_rejects_degenerate_groups() {
    for args in [["--l", "0", "--r", "2"], ["--l", "2", "--r", "1"]] {
        let out = lamina(
            &[
                &["curve"],
                &args[..],
                &["--from", "0.9", "--to", "0.9", "--step", "0.05"],
            ]
            .concat(),
        );
        assert_eq!(exit_code(&out), 2, "{args:?}");
    }
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec!["analyze", "--model", MODEL, "--format", "json"],
        vec!["flows", "--model", MODEL, "--format", "csv"],
        vec!["plan", "--model", MODEL, "--tolerance", "2"],
        vec!["reliability", "--model", MODEL, "--format", "json"],
    ] {
        assert_eq!(stdout_of(&args), stdout_of(&args), "{args:?}");
    }
}

#[test]
fn quiet_drops_the_model_header() {
    let text = stdout_of(&["flows", "--model", MODEL, "--quiet"]);
    assert!(!text.contains("model:"));
    assert!(text.starts_with("== data flows =="));
}
