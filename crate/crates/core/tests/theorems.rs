use ginv::theorems::{replay, run_fixtures, run_theorems, SuiteConfig, TrialStatus, THEOREM_IDS};
use ginv::tolerances::Tolerances;

fn cfg(trials: usize, seed: u64) -> SuiteConfig {
    SuiteConfig {
        trials,
        seed,
        ..SuiteConfig::default()
    }
}

#[test]
fn every_theorem_holds_on_a_small_run() {
    let tol = Tolerances::default();
    let report = run_theorems(&THEOREM_IDS, &cfg(60, 11), &tol).unwrap();
    for t in &report.theorems {
        eprintln!("{t:?}");
    }
    for f in &report.failures {
        eprintln!("{f:?}");
    }
    assert!(report.passed, "{}", report.to_markdown());
    for t in &report.theorems {
        assert!(t.legs > 0, "{} asserted nothing", t.theorem_id);
    }
}

#[test]
fn fixtures_hold() {
    let report = run_fixtures(&Tolerances::default()).unwrap();
    assert!(report.passed, "{}", report.to_markdown());
    assert!(report.theorems.len() >= 9);
}

#[test]
fn reports_are_deterministic() {
    let tol = Tolerances::default();
    let ids = ["existence-equivalences", "anti-triangular"];
    let a = run_theorems(&ids, &cfg(20, 5), &tol).unwrap();
    let b = run_theorems(&ids, &cfg(20, 5), &tol).unwrap();
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn replay_reproduces_a_trial() {
    let tol = Tolerances::default();
    let c = cfg(1, 0);
    let first = replay("kast-properties", 12345, &c, &tol).unwrap();
    let second = replay("kast-properties", 12345, &c, &tol).unwrap();
    assert_eq!(first, second);
    assert_ne!(first.status, TrialStatus::Violated);
    assert!(replay("no-such-theorem", 1, &c, &tol).is_err());
}
