//! Frozen outputs. A change here means results moved, which should be a
//! deliberate decision.

use lassolab::cli::standard_instance;
use lassolab::datagen::{gen_linear, GenSpec};
use lassolab::pathwise::{
    build_counter_example, reproduce_counter_example, PathStatus, DEFAULT_BETAS,
};
use lassolab::verify::{bench_run, BenchConfig, SolverSpec};
use lassolab::SurrogateParams;
use sha2::{Digest, Sha256};

fn sha_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[test]
fn generated_dataset_checksum() {
    let d = gen_linear(&GenSpec::new(50, 20, 5, 0.5, 7)).unwrap();
    let mut buf = Vec::new();
    lassolab::csvio::write_dataset(&mut buf, &d.x, &d.y).unwrap();
    assert_eq!(
        sha_hex(&buf),
        "f01a59ff8995f1e55e7dc2d6e51996471e65467c4a10551056f6d28747e63765"
    );
}

#[test]
fn standard_instance_iterations_to_gap() {
    let prob = standard_instance(7).unwrap();
    let specs = [
        SolverSpec::Ista,
        SolverSpec::Fista,
        SolverSpec::Cgda,
        SolverSpec::Sla(SurrogateParams::new(200.0).unwrap()),
    ];
    let res = bench_run(&prob, &specs, &BenchConfig::default()).unwrap();
    let got: Vec<(String, [Option<usize>; 3])> = res
        .entries
        .iter()
        .map(|e| (e.label.clone(), e.iterations_to_gap))
        .collect();
    let want: Vec<(String, [Option<usize>; 3])> = vec![
        ("ista".into(), [Some(11), Some(20), Some(30)]),
        ("fista".into(), [Some(6), Some(13), Some(26)]),
        ("cgda".into(), [Some(3), Some(4), Some(5)]),
        // The surrogate bias keeps the gap above 1e-4 at alpha = 200.
        ("sla".into(), [Some(30), None, None]),
    ];
    assert_eq!(got, want);
    assert!(!res.any_violation());
}

#[test]
fn counter_example_seed_one_events() {
    let report = reproduce_counter_example(1, 6).unwrap();
    assert_eq!(report.n, 12);
    assert_eq!(report.supports, vec![vec![1], vec![1, 3]]);
    let PathStatus::FailedInsertion(f) = &report.status else {
        panic!("expected a failed insertion");
    };
    assert_eq!(f.loop_index, 3);
    assert!((f.lambda - 100.0 / 12.0).abs() < 1e-12);
    // Leading correlation is beta_1 + alpha_1 over n.
    let ce = build_counter_example(6, 12, None, DEFAULT_BETAS, 1).unwrap();
    assert!((report.lambda_max - (200.0 + ce.alphas[0]) / 12.0).abs() < 1e-12);
    assert!((report.lambda_max - 16.730540184154552).abs() < 1e-12);
}
