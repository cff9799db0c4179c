use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_folharness"));
    c.env_remove("LLM_API_KEY");
    c
}

fn sample(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/assets/sample").join(rel)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn parse_prints_tree_or_error_class() {
    let ok = bin().args(["parse", "all x. (P(x) -> Q(x))"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert!(stdout(&ok).starts_with("ForAll("));

    let empty = bin().args(["parse", "P()"]).output().unwrap();
    assert_eq!(empty.status.code(), Some(1));
    assert!(stdout(&empty).starts_with("EmptyPredicate at "));

    let eq = bin().args(["parse", "x = y"]).output().unwrap();
    assert_eq!(eq.status.code(), Some(1));
    assert!(stdout(&eq).starts_with("ForbiddenSymbol at 2"));
}

#[test]
fn prove_reports_label_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let worksheet = dir.path().join("worksheet.fol");
    fs::write(
        &worksheet,
        "# worksheet\n\
         all x. (Dispensable(x) -> EnvironmentFriendly(x))\n\
         all x. (Woodware(x) -> Dispensable(x))\n\
         all x. (Paper(x) -> Woodware(x))\n\
         all x. (Good(x) -> -Bad(x))\n\
         all x. (EnvironmentFriendly(x) -> Good(x))\n\
         ((Paper(Worksheet) & -EnvironmentFriendly(Worksheet)) | (-Paper(Worksheet) & EnvironmentFriendly(Worksheet)))\n",
    )
    .unwrap();
    let o = bin().args(["prove"]).arg(&worksheet).arg("-Dispensable(Worksheet)").output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let (label, trace) = out.split_once('\n').unwrap();
    assert_eq!(label, "Uncertain");
    let trace: serde_json::Value = serde_json::from_str(trace).unwrap();
    assert_eq!(trace["inconsistent_premises"], false);

    let unit = dir.path().join("unit.fol");
    fs::write(&unit, "P(a)\n").unwrap();
    let o = bin().args(["prove"]).arg(&unit).arg("P(a)").output().unwrap();
    assert!(stdout(&o).starts_with("True\n"));

    let bad = dir.path().join("bad.fol");
    fs::write(&bad, "P(a)\n-P(a)\n").unwrap();
    let o = bin().args(["prove"]).arg(&bad).arg("Q(b)").output().unwrap();
    let out = stdout(&o);
    assert!(out.starts_with("True\n"));
    let trace: serde_json::Value = serde_json::from_str(out.split_once('\n').unwrap().1).unwrap();
    assert_eq!(trace["inconsistent_premises"], true);
}

#[test]
fn run_rejects_endpoint_plus_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(sample("sample.jsonl"))
        .args(["--endpoint", "http://127.0.0.1:9/v1", "--model", "m", "--fixtures"])
        .arg(sample("fixtures.jsonl"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("mutually exclusive"));

    let neither = bin().arg("run").arg(sample("sample.jsonl")).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(neither.status.code(), Some(2));
}

#[test]
fn report_reproduces_run_and_flags_missing_instances() {
    let dir = tempfile::tempdir().unwrap();
    let run_dir = dir.path().join("run");
    let o = bin()
        .arg("run")
        .arg(sample("sample.jsonl"))
        .arg("--fixtures")
        .arg(sample("fixtures.jsonl"))
        .arg("--out")
        .arg(&run_dir)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("LINC\t60.00"));

    let rep_dir = dir.path().join("rep");
    let o = bin()
        .arg("report")
        .arg(run_dir.join("outcomes.jsonl"))
        .arg(sample("sample.jsonl"))
        .arg("--out")
        .arg(&rep_dir)
        .args(["--model", "fixtures"])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    for file in ["report_Naive.json", "report_ScratchPad.json", "report_CoT.json", "report_LINC.json", "report_NSCoT.json", "table.csv"] {
        assert_eq!(
            fs::read(run_dir.join(file)).unwrap(),
            fs::read(rep_dir.join(file)).unwrap(),
            "{file}"
        );
    }

    // drop every outcome of one instance
    let trimmed: String = fs::read_to_string(run_dir.join("outcomes.jsonl"))
        .unwrap()
        .lines()
        .filter(|l| !l.contains(r#""instance_id":"s4""#))
        .map(|l| format!("{l}\n"))
        .collect();
    let partial = dir.path().join("partial.jsonl");
    fs::write(&partial, trimmed).unwrap();
    let o = bin()
        .arg("report")
        .arg(&partial)
        .arg(sample("sample.jsonl"))
        .arg("--out")
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("count mismatch"));
}

#[test]
fn paired_report_has_delta_and_p_value() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(sample("sample_rr.jsonl"))
        .args(["--mode", "naive", "--fixtures"])
        .arg(sample("fixtures_rr.jsonl"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("report_Naive.json")).unwrap()).unwrap();
    assert_eq!(report["mcnemar_p"], 0.5);
    assert!((report["delta"].as_f64().unwrap() + 66.6667).abs() < 1e-3);
}

#[test]
fn convert_folio_to_internal_schema() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("folio.jsonl");
    fs::write(
        &input,
        r#"{"example_id": 7, "premises": "All cats purr.\nTom is a cat.", "conclusion": "Tom purrs.", "label": "True"}
{"example_id": 8, "premises": ["Some dogs bark."], "conclusion": "Rex barks.", "label": "Unknown"}
"#,
    )
    .unwrap();
    let out = dir.path().join("out.jsonl");
    let o = bin().arg("convert").arg(&input).args(["--format", "folio", "-o"]).arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let lines: Vec<serde_json::Value> = fs::read_to_string(&out)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0]["premises"].as_array().unwrap().len(), 2);
    assert_eq!(lines[1]["label"], "Uncertain");
}

#[test]
fn missing_dataset_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("run")
        .arg(dir.path().join("nope.jsonl"))
        .arg("--fixtures")
        .arg(sample("fixtures.jsonl"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
