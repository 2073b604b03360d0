use super::*;

fn small(out: &Path) -> ExperimentConfig {
    ExperimentConfig {
        out_dir: out.to_path_buf(),
        synth_authors: 5,
        synth_challenges: 4,
        tests_per_unit: 2,
        n_trees: 20,
        budget: 20,
        evade_limit: 4,
        pairgen_budget: 5,
        pairgen_limit: 2,
        workers: 2,
        ..Default::default()
    }
}

fn comparable(r: &MetricsReport) -> MetricsReport {
    let mut r = r.without_timing();
    r.config.out_dir = PathBuf::new();
    r
}

#[test]
fn small_synthetic_run_populates_every_field() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(dir.path())).unwrap();
    assert_eq!(report.attribution.len(), 2);
    assert!(report.transformation_samples > 0);
    assert_eq!(report.transformation_success_rate, 1.0);
    assert_eq!(report.evasion.iter().map(|e| e.method.as_str()).collect::<Vec<_>>(), [MCTS, RANDOM]);
    assert!(report.evasion.iter().all(|e| e.rate.len() == 2 && e.samples > 0));
    assert_eq!(report.pairs, Some(2 * 3));
    assert!(report.neural.is_none());
    let stages: Vec<&str> = report.timing.iter().map(|t| t.stage.as_str()).collect();
    assert_eq!(stages, ["ingest", "train", "evade", "pairgen", "verify", "report"]);
    let art = Artifacts { root: dir.path().to_path_buf() };
    assert!(art.pairs().exists() && art.report_text().exists());
    let text = fs::read_to_string(art.report_text()).unwrap();
    assert!(text.contains("Evasion success") && text.contains("syntax total"));
}

#[test]
fn rates_recompute_from_verdict_logs() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&small(dir.path())).unwrap();
    let art = Artifacts { root: dir.path().to_path_buf() };
    let logs: VerdictLogs = read_json(&art.verdicts()).unwrap();
    let all: Vec<&TransformVerdict> = logs.transform.values().flatten().collect();
    let equivalent = all.iter().filter(|v| v.verdict == Some(crate::interp::Verdict::Equivalent)).count();
    assert!((report.transformation_success_rate - equivalent as f64 / all.len() as f64).abs() <= 1e-12);
    let failures: usize = report.error_table.values().sum();
    assert_eq!(failures as f64, (1.0 - report.transformation_success_rate) * report.transformation_samples as f64);
    for e in &report.evasion {
        for (model, rate) in &e.rate {
            let log = &logs.evasion[&e.method][model];
            let hits = log.iter().filter(|v| v.predicted.as_ref().is_some_and(|p| *p != v.true_author)).count();
            assert!((rate - hits as f64 / log.len() as f64).abs() <= 1e-12);
        }
    }
}

#[test]
fn reruns_match_and_resume_from_artifacts() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let first = run_experiment(&small(a.path())).unwrap();
    let fresh = run_experiment(&small(b.path())).unwrap();
    assert_eq!(comparable(&first), comparable(&fresh));
    let resumed = run_experiment(&small(a.path())).unwrap();
    assert_eq!(comparable(&first), comparable(&resumed));
    let flags: Vec<bool> = resumed.timing.iter().map(|t| t.resumed).collect();
    assert_eq!(flags, [true, true, true, true, true, false]);
}

#[test]
fn neural_stage_adds_metrics_without_changing_primary_ones() {
    let dir = tempfile::tempdir().unwrap();
    let plain = run_experiment(&small(dir.path())).unwrap();
    let with = ExperimentConfig { neural_command: "cp inputs/* outputs/".into(), ..small(dir.path()) };
    let report = run_experiment(&with).unwrap();
    let neural = report.neural.as_ref().unwrap();
    assert_eq!(neural.transformation_success_rate, 1.0);
    assert_eq!(neural.samples, 5);
    assert!(neural.error_table.is_empty());
    let primary =
        |r: &MetricsReport| (r.transformation_success_rate, r.attribution.clone(), r.evasion.clone(), r.pairs);
    assert_eq!(primary(&plain), primary(&report));
    let manifest = fs::read_to_string(dir.path().join("neural").join("manifest.json")).unwrap();
    assert!(manifest.contains("pairs.jsonl"));
}

#[test]
fn failing_stage_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig { corpus_dir: dir.path().join("missing"), ..small(dir.path()) };
    match run_experiment(&cfg) {
        Err(ExperimentError::Stage { stage, .. }) => assert_eq!(stage, "ingest"),
        other => panic!("{other:?}"),
    }
    let cfg = ExperimentConfig { neural_command: "exit 1".into(), ..small(dir.path()) };
    match run_experiment(&cfg) {
        Err(ExperimentError::Stage { stage, .. }) => assert_eq!(stage, "neural"),
        other => panic!("{other:?}"),
    }
    assert!(Artifacts { root: dir.path().to_path_buf() }.evasion().exists());
}
