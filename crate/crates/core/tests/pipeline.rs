use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

use arcsym::harness::{run_eval, run_task, Config, Endpoints, HarnessError, ProposerKind, SelectorKind};
use arcsym::solution::Provenance;
use arcsym::synth::{planted_suite, SynthConfig};
use arcsym::transport::{RetryPolicy, TransportError};
use arcsym::{serialize_task, Grid, Pair, TaskRecord};

fn g(rows: &[&[u8]]) -> Grid {
    Grid::from_rows(rows).unwrap()
}

/// Every object turns red.
fn recolor_task() -> TaskRecord {
    let pair = |i: Grid, o: Grid| Pair { input: i, output: o };
    TaskRecord {
        task_id: "recolor".into(),
        train_pairs: vec![
            pair(g(&[&[1, 0, 0], &[0, 0, 3], &[0, 0, 3]]), g(&[&[2, 0, 0], &[0, 0, 2], &[0, 0, 2]])),
            pair(g(&[&[0, 4, 4], &[0, 0, 0], &[5, 0, 0]]), g(&[&[0, 2, 2], &[0, 0, 0], &[2, 0, 0]])),
        ],
        test_inputs: vec![g(&[&[6, 0, 0], &[0, 0, 0], &[0, 7, 7]])],
        test_outputs: Some(vec![g(&[&[2, 0, 0], &[0, 0, 0], &[0, 2, 2]])]),
    }
}

/// Outputs that no pattern explains.
fn noise_task() -> TaskRecord {
    let pair = |i: Grid, o: Grid| Pair { input: i, output: o };
    TaskRecord {
        task_id: "noise".into(),
        train_pairs: vec![
            pair(g(&[&[1, 0], &[0, 0]]), g(&[&[5, 6], &[7, 8]])),
            pair(g(&[&[0, 3], &[0, 0]]), g(&[&[8, 7], &[6, 5]])),
        ],
        test_inputs: vec![g(&[&[0, 0], &[4, 0]])],
        test_outputs: Some(vec![g(&[&[9, 9], &[9, 9]])]),
    }
}

fn stub(body: &'static str) -> impl Fn(&Value) -> Result<String, TransportError> + Send + Sync {
    move |_: &Value| Ok(body.to_string())
}

#[test]
fn builtin_pipeline_solves_planted_tasks() {
    for planted in planted_suite(5, 4, &SynthConfig::default()) {
        let outcome = run_task(&planted.task, &Config::default(), &Endpoints::default()).unwrap();
        assert_eq!(outcome.solved(), Some(true), "{}", planted.program.canonical());
        assert!(outcome.analysis.report.selected.as_ref().unwrap().depth() <= planted.program.depth());
        assert_eq!(outcome.tests[0].route, Some(Provenance::ExecutedProgram));
        assert!(outcome.tests.iter().all(|t| !t.pool.entries.is_empty()));
    }
}

#[test]
fn recolor_is_solved_on_the_first_attempt() {
    let outcome = run_task(&recolor_task(), &Config::default(), &Endpoints::default()).unwrap();
    assert_eq!(outcome.solved_first_attempt(), Some(true));
    assert_eq!(outcome.tests[0].submission.first_source, "executed_program");
}

#[test]
fn external_proposer_feeds_the_consistency_filter() {
    let calls = AtomicUsize::new(0);
    let proposer = |_: &Value| {
        calls.fetch_add(1, Ordering::SeqCst);
        Ok(r#"Here you go:
```json
[{"pattern_detected": true, "pattern_name": "Find Objects in the Input Image and Color Them",
  "params": {"new_color": "constant throughout"}, "reason": "all objects become red"},
 {"pattern_detected": false, "pattern_name": "Cavity Fill", "params": {}, "reason": "no holes"}]
```"#
            .to_string())
    };
    let config = Config { proposer: ProposerKind::External, repetitions: 3, ..Config::default() };
    let endpoints = Endpoints { proposer: Some(&proposer), policy: RetryPolicy::immediate(0), ..Endpoints::default() };
    let outcome = run_task(&recolor_task(), &config, &endpoints).unwrap();
    assert_eq!(calls.load(Ordering::SeqCst), 2 * 3);
    assert_eq!(outcome.analysis.ranked[0].count, 6);
    assert_eq!(outcome.solved(), Some(true));
}

#[test]
fn external_proposer_is_required_when_selected() {
    let config = Config { proposer: ProposerKind::External, ..Config::default() };
    let err = run_task(&recolor_task(), &config, &Endpoints::default()).unwrap_err();
    assert!(matches!(err, HarnessError::MissingEndpoint("proposer")));
}

#[test]
fn hint_path_votes_over_solver_samples() {
    let seen = AtomicUsize::new(0);
    let solver = |req: &Value| {
        assert!(req.get("hint").is_some());
        assert_eq!(req["seed"], 11);
        // One sample in five disagrees on a single cell.
        let i = seen.fetch_add(1, Ordering::SeqCst);
        Ok(if i == 0 { "[[9,9],[9,1]]".to_string() } else { "[[9, 9], [9, 9]]".to_string() })
    };
    let config = Config { seed: 11, ..Config::default() };
    let endpoints = Endpoints { solver: Some(&solver), policy: RetryPolicy::immediate(0), ..Endpoints::default() };
    let outcome = run_task(&noise_task(), &config, &endpoints).unwrap();
    assert!(outcome.analysis.report.hint.is_some());
    let test = &outcome.tests[0];
    assert_eq!(test.route, Some(Provenance::ExternalSolver));
    assert_eq!(test.votes_used, 5);
    assert_eq!(seen.load(Ordering::SeqCst), 5);
    assert_eq!(test.submission.first, g(&[&[9, 9], &[9, 9]]));
    assert_eq!(outcome.solved(), Some(true));
}

#[test]
fn unreachable_solver_does_not_abort_the_task() {
    let down = |_: &Value| Err(TransportError::Unreachable("offline".into()));
    let endpoints = Endpoints { solver: Some(&down), policy: RetryPolicy::immediate(1), ..Endpoints::default() };
    let outcome = run_task(&noise_task(), &Config::default(), &endpoints).unwrap();
    assert_ne!(outcome.tests[0].route, Some(Provenance::ExternalSolver));
    assert!(outcome.tests[0].low_confidence);
    assert_eq!(outcome.solved(), Some(false));
}

#[test]
fn external_selector_picks_by_index_and_falls_back() {
    let task = noise_task();
    let solver = |req: &Value| {
        let i = req["sample_index"].as_u64().unwrap();
        Ok(format!("[[{i},0],[0,0]]"))
    };
    let picks_last = stub("Solution 9999");
    let config = Config { selector: SelectorKind::External, ..Config::default() };
    let run = |selector: &dyn arcsym::transport::Transport| {
        let endpoints = Endpoints {
            solver: Some(&solver),
            selector: Some(selector),
            policy: RetryPolicy::immediate(0),
            ..Endpoints::default()
        };
        run_task(&task, &config, &endpoints).unwrap()
    };
    let second = stub("I would choose 2.");
    let chosen = run(&second);
    let pool = &chosen.tests[0].pool;
    assert_eq!(chosen.tests[0].submission.first, pool.entries[2].grid);
    let fallback = run(&picks_last);
    let endpoints = Endpoints { solver: Some(&solver), policy: RetryPolicy::immediate(0), ..Endpoints::default() };
    let default = run_task(&task, &Config::default(), &endpoints).unwrap();
    assert_eq!(fallback.tests[0].submission, default.tests[0].submission);
    let missing = run_task(&task, &config, &Endpoints { solver: Some(&solver), ..Endpoints::default() });
    assert!(matches!(missing, Err(HarnessError::MissingEndpoint("selector"))));
}

#[test]
fn eval_isolates_broken_files() {
    let dir = std::env::temp_dir().join(format!("arcsym-pipeline-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    std::fs::write(dir.join("a_recolor.json"), serialize_task(&recolor_task())).unwrap();
    std::fs::write(dir.join("b_noise.json"), serialize_task(&noise_task())).unwrap();
    std::fs::write(dir.join("c_broken.json"), b"{\"train\": [").unwrap();
    std::fs::write(dir.join("notes.txt"), b"ignored").unwrap();
    let report = run_eval(&dir, &Config::default(), &Endpoints::default()).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(report.task_count, 3);
    assert_eq!(report.errored_count, 1);
    assert_eq!(report.solved_count, 1);
    assert!((report.pass_at_2 - 1.0 / 3.0).abs() < 1e-12);
    assert!(report.tasks["c_broken"].error.is_some());
    assert_eq!(report.tasks["a_recolor"].solved, Some(true));
}

#[test]
fn eval_rejects_bad_configuration() {
    let config = Config { attempts: 2, ..Config::default() };
    let err = run_eval(std::path::Path::new("."), &config, &Endpoints::default()).unwrap_err();
    assert!(matches!(err, HarnessError::InvalidConfig(_)), "{err}");
}
