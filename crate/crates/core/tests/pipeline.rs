mod common;

use std::fs;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};

use common::{asset, SAMPLE_PLAN};
use folharness::datasets::load_instances;
use folharness::evaluation::{EvalReport, TaxonomyBucket};
use folharness::gateway::{FixtureStore, Generation, GatewayError, GenerationSource, PromptKey, SamplingConfig};
use folharness::pipeline::{
    read_outcomes, report_file_name, reports_from_outcomes, run, RunConfig, OUTCOMES_FILE, TABLE_FILE,
};
use folharness::prompting::Mode;
use folharness::Label;

struct Counting {
    inner: FixtureStore,
    calls: AtomicUsize,
}

impl GenerationSource for Counting {
    fn generate(
        &self,
        key: &PromptKey,
        prompt: &str,
        sampling: &SamplingConfig,
        sample_indices: &[usize],
    ) -> Result<Vec<Generation>, GatewayError> {
        self.calls.fetch_add(sample_indices.len(), Ordering::SeqCst);
        self.inner.generate(key, prompt, sampling, sample_indices)
    }
}

fn counting(fixtures: &str) -> Counting {
    Counting {
        inner: FixtureStore::open(&asset(fixtures)).unwrap(),
        calls: AtomicUsize::new(0),
    }
}

fn config(dataset: &str, fixtures: &str, modes: Vec<Mode>, out: &Path) -> RunConfig {
    RunConfig::new(asset(dataset), modes, None, Some(asset(fixtures)), out.to_path_buf()).unwrap()
}

fn report_for<'a>(reports: &'a [EvalReport], mode: &str) -> &'a EvalReport {
    reports.iter().find(|r| r.mode.as_str() == mode).unwrap()
}

#[test]
fn sample_run_matches_the_fixture_plan() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", Mode::ALL.to_vec(), dir.path());
    let source = counting("sample/fixtures.jsonl");
    let summary = run(&cfg, &source).unwrap();
    assert_eq!(summary.queried, 250);
    assert_eq!(summary.reused, 0);

    for plan in &SAMPLE_PLAN {
        let r = report_for(&summary.reports, plan.mode);
        let labels: Vec<Option<&str>> = r.per_instance.iter().map(|i| i.label.map(Label::as_str)).collect();
        assert_eq!(labels, plan.labels, "{}", plan.mode);
        assert_eq!(r.accuracy, plan.accuracy, "{}", plan.mode);
        let counts = [TaxonomyBucket::ArityMismatch, TaxonomyBucket::UnexpectedToken, TaxonomyBucket::Other]
            .map(|b| r.taxonomy.counts[&b]);
        assert_eq!(counts, plan.buckets, "{}", plan.mode);
        let ties: Vec<&str> = r.per_instance.iter().filter(|i| i.tie_broken).map(|i| i.instance_id.as_str()).collect();
        assert_eq!(ties, plan.ties, "{}", plan.mode);
        assert_eq!(r.confusion.0, plan.confusion, "{}", plan.mode);
        assert_eq!(r.taxonomy.total_queries, 50);
        assert_eq!(r.confusion.total(), 5);
        assert_eq!(r.flags.inconsistent_premises, 0);
        assert_eq!(r.flags.resource_exhausted, 0);
    }
    for mode in Mode::ALL {
        assert!(dir.path().join(report_file_name(mode)).exists());
    }
    let table = fs::read_to_string(dir.path().join(TABLE_FILE)).unwrap();
    assert_eq!(
        table,
        "model,row,Naive,ScratchPad,CoT,LINC,NSCoT\nfixtures,Default,80.00,60.00,100.00,60.00,100.00\n"
    );
}

#[test]
fn confusion_marginals_match_gold_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", Mode::ALL.to_vec(), dir.path());
    let summary = run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();
    let instances = load_instances(&asset("sample/sample.jsonl")).unwrap();
    let mut gold = [0usize; 3];
    for i in &instances {
        gold[i.gold.index()] += 1;
    }
    for r in &summary.reports {
        assert_eq!(r.confusion.row_sums(), gold);
        let predicted: usize = r.per_instance.iter().filter(|i| i.label.is_some()).count();
        let non_error: usize = r.confusion.0.iter().map(|row| row[..3].iter().sum::<usize>()).sum();
        assert_eq!(predicted, non_error);
    }
}

#[test]
fn rerun_issues_no_queries_and_reproduces_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", Mode::ALL.to_vec(), dir.path());
    run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();
    let first: Vec<String> = Mode::ALL
        .iter()
        .map(|&m| fs::read_to_string(dir.path().join(report_file_name(m))).unwrap())
        .collect();

    let again = counting("sample/fixtures.jsonl");
    let summary = run(&cfg, &again).unwrap();
    assert_eq!(again.calls.load(Ordering::SeqCst), 0);
    assert_eq!(summary.queried, 0);
    assert_eq!(summary.reused, 250);
    for (m, before) in Mode::ALL.iter().zip(&first) {
        assert_eq!(&fs::read_to_string(dir.path().join(report_file_name(*m))).unwrap(), before);
    }
}

#[test]
fn interrupted_run_resumes_only_missing_samples() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", vec![Mode::Linc], dir.path());
    let full = run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();

    // keep 17 complete lines and half of the 18th
    let path = dir.path().join(OUTCOMES_FILE);
    let text = fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    let mut cut = lines[..17].join("\n") + "\n";
    cut.push_str(&lines[17][..lines[17].len() / 2]);
    fs::write(&path, cut).unwrap();
    assert_eq!(read_outcomes(&path).unwrap().len(), 17);

    let source = counting("sample/fixtures.jsonl");
    let resumed = run(&cfg, &source).unwrap();
    assert_eq!(source.calls.load(Ordering::SeqCst), 33);
    assert_eq!(resumed.reused, 17);
    assert_eq!(resumed.reports, full.reports);
    assert_eq!(read_outcomes(&path).unwrap().len(), 50);
}

#[test]
fn other_modes_survive_a_later_run() {
    let dir = tempfile::tempdir().unwrap();
    run(
        &config("sample/sample.jsonl", "sample/fixtures.jsonl", vec![Mode::Naive], dir.path()),
        &counting("sample/fixtures.jsonl"),
    )
    .unwrap();
    run(
        &config("sample/sample.jsonl", "sample/fixtures.jsonl", vec![Mode::CoT], dir.path()),
        &counting("sample/fixtures.jsonl"),
    )
    .unwrap();
    let records = read_outcomes(&dir.path().join(OUTCOMES_FILE)).unwrap();
    assert_eq!(records.len(), 100);
}

#[test]
fn report_from_outcomes_equals_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", Mode::ALL.to_vec(), dir.path());
    let summary = run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();
    let records = read_outcomes(&dir.path().join(OUTCOMES_FILE)).unwrap();
    let instances = load_instances(&asset("sample/sample.jsonl")).unwrap();
    let rebuilt = reports_from_outcomes(&records, &instances, "sample", None).unwrap();
    assert_eq!(rebuilt, summary.reports);
}

#[test]
fn outcomes_replay_as_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", vec![Mode::NsCot], dir.path());
    let summary = run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();

    let other = tempfile::tempdir().unwrap();
    let replay_from = dir.path().join(OUTCOMES_FILE);
    let cfg2 = RunConfig::new(asset("sample/sample.jsonl"), vec![Mode::NsCot], None, Some(replay_from.clone()), other.path().to_path_buf()).unwrap();
    let store = FixtureStore::open(&replay_from).unwrap();
    assert_eq!(run(&cfg2, &store).unwrap().reports, summary.reports);
}

#[test]
fn paired_sample_reports_delta_and_mcnemar() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample_rr.jsonl", "sample/fixtures_rr.jsonl", vec![Mode::Naive], dir.path());
    let summary = run(&cfg, &counting("sample/fixtures_rr.jsonl")).unwrap();
    let r = &summary.reports[0];
    assert_eq!(r.default_accuracy, Some(100.0));
    let cf = r.cf_accuracy.unwrap();
    assert!((cf - 100.0 / 3.0).abs() < 1e-9);
    assert!((r.delta.unwrap() + 200.0 / 3.0).abs() < 1e-9);
    // two discordant pairs, both default-only: p = 2 * 1/4
    assert_eq!(r.mcnemar_p, Some(0.5));
    assert_eq!(r.significant, Some(false));
    let table = fs::read_to_string(dir.path().join(TABLE_FILE)).unwrap();
    assert_eq!(
        table,
        "model,row,Naive,ScratchPad,CoT,LINC,NSCoT\n\
         fixtures,Default,100.00,,,,\n\
         fixtures,CF,33.33,,,,\n\
         fixtures,Delta,-66.67,,,,\n"
    );
}

#[test]
fn sample_count_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("sample/sample.jsonl", "sample/fixtures.jsonl", vec![Mode::Naive], dir.path());
    run(&cfg, &counting("sample/fixtures.jsonl")).unwrap();
    let path = dir.path().join(OUTCOMES_FILE);
    let kept: Vec<String> = fs::read_to_string(&path)
        .unwrap()
        .lines()
        .filter(|l| !(l.contains(r#""instance_id":"s2""#) && l.contains(r#""sample_index":9"#)))
        .map(String::from)
        .collect();
    fs::write(&path, kept.join("\n") + "\n").unwrap();
    let records = read_outcomes(&path).unwrap();
    let instances = load_instances(&asset("sample/sample.jsonl")).unwrap();
    let err = reports_from_outcomes(&records, &instances, "sample", None).unwrap_err();
    assert_eq!(err.exit_code(), 1);
    assert!(err.to_string().contains("s2"));
}
