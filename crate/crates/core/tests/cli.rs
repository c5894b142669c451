//! End-to-end tests of the `replan` binary.

use std::path::Path;
use std::process::{Command, Output};

use replication_planner::replication::{AssignmentPlan, BatchingPlan, DatasetSpec, PlanFile};

fn replan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_replan"))
        .args(args)
        .output()
        .expect("spawn replan")
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn field(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

fn write_plan(dir: &Path, name: &str, batching: &BatchingPlan, workers: Vec<usize>) -> String {
    let plan = AssignmentPlan::explicit(batching, workers).unwrap();
    let path = dir.join(name);
    std::fs::write(&path, PlanFile::from_plans(batching, &plan).to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

fn halves(d: usize) -> BatchingPlan {
    BatchingPlan::non_overlapping(DatasetSpec::new(d).unwrap(), 2).unwrap()
}

#[test]
fn analyze_examples() {
    let out = stdout(&replan(&[
        "analyze",
        "--workers",
        "12",
        "--samples",
        "12",
        "--dist",
        "sexp",
        "--mu",
        "1",
        "--delta",
        "0.2",
        "--batches",
        "3",
    ]));
    assert!((field(&out, "mean") - 2.633333).abs() < 1e-6);

    let out = stdout(&replan(&[
        "analyze",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--workers",
        "4",
        "--samples",
        "4",
        "--batches",
        "1",
    ]));
    assert_eq!(field(&out, "mean"), 1.0);

    let bad = replan(&[
        "analyze",
        "--workers",
        "12",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--batches",
        "5",
    ]);
    assert_eq!(bad.status.code(), Some(2));
    let err = String::from_utf8_lossy(&bad.stderr);
    assert!(err.contains('5') && err.contains("12"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        vec![
            "analyze",
            "--workers",
            "4",
            "--dist",
            "sexp",
            "--mu",
            "1",
            "--batches",
            "2",
        ],
        vec![
            "analyze",
            "--workers",
            "4",
            "--dist",
            "exp",
            "--mu",
            "-1",
            "--batches",
            "2",
        ],
        vec!["analyze", "--dist", "exp", "--mu", "1", "--batches", "1"],
        vec![
            "optimize",
            "--workers",
            "4",
            "--dist",
            "exp",
            "--mu",
            "1",
            "--objective",
            "median",
        ],
        vec!["frobnicate"],
    ] {
        assert_eq!(replan(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn non_finite_result_exits_three() {
    let out = replan(&[
        "analyze",
        "--workers",
        "4",
        "--dist",
        "exp",
        "--mu",
        "1e-310",
        "--batches",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
}

fn parse_sweep(csv: &str) -> Vec<(usize, f64, f64, f64, f64)> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("B,mean,variance,mu,delta"));
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 5);
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].parse().unwrap(),
                f[3].parse().unwrap(),
                f[4].parse().unwrap(),
            )
        })
        .collect()
}

#[test]
fn sweep_reproduces_family_of_curves() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("fig.csv");
    let out = stdout(&replan(&[
        "sweep",
        "--workers",
        "12",
        "--dist",
        "sexp",
        "--mu",
        "1",
        "--delta",
        "0.001",
        "--delta",
        "0.2",
        "--delta",
        "10",
        "--out",
        csv.to_str().unwrap(),
        "--format",
        "svg",
    ]));
    let rows = parse_sweep(&std::fs::read_to_string(&csv).unwrap());
    assert_eq!(rows.len(), 18);
    for (delta, expected) in [(0.001, 1), (0.2, 3), (10.0, 12)] {
        let curve: Vec<_> = rows.iter().filter(|r| r.4 == delta).collect();
        assert_eq!(
            curve.iter().map(|r| r.0).collect::<Vec<_>>(),
            vec![1, 2, 3, 4, 6, 12]
        );
        let best = curve.iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(best.0, expected, "delta={delta}");
        assert!(out.contains(&format!("argmin_B={expected}")));
    }
    let svg = std::fs::read_to_string(dir.path().join("fig.svg")).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 3);
}

#[test]
fn sweep_exponential_and_single_point() {
    let out = stdout(&replan(&[
        "sweep",
        "--workers",
        "12",
        "--dist",
        "exp",
        "--mu",
        "1",
    ]));
    let rows = parse_sweep(&out);
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[1].1 > w[0].1));

    let out = stdout(&replan(&[
        "sweep",
        "--workers",
        "5",
        "--samples",
        "1",
        "--dist",
        "exp",
        "--mu",
        "1",
    ]));
    assert_eq!(parse_sweep(&out).len(), 1);

    let out = replan(&[
        "sweep",
        "--workers",
        "4",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--format",
        "svg",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_examples() {
    let base = [
        "optimize",
        "--workers",
        "12",
        "--dist",
        "sexp",
        "--mu",
        "1",
        "--delta",
        "10",
    ];
    let out = stdout(&replan(&[&base[..], &["--objective", "mean"]].concat()));
    assert_eq!(field(&out, "best_B"), 12.0);
    assert!((field(&out, "best_value") - 13.1032).abs() < 1e-4);
    let out = stdout(&replan(&[&base[..], &["--objective", "variance"]].concat()));
    assert_eq!(field(&out, "best_B"), 1.0);
    let out = stdout(&replan(&[
        "optimize",
        "--workers",
        "8",
        "--dist",
        "exp",
        "--mu",
        "2",
        "--objective",
        "mean",
    ]));
    assert_eq!(field(&out, "best_B"), 1.0);
    let out = stdout(&replan(&[
        "optimize",
        "--workers",
        "8",
        "--dist",
        "exp",
        "--mu",
        "2",
    ]));
    assert!(out.contains("B,mean,variance,mu,delta"));
}

#[test]
fn simulate_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sim.csv");
    let args = [
        "simulate",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--workers",
        "12",
        "--samples",
        "12",
        "--batches",
        "3",
        "--trials",
        "1000000",
        "--seed",
        "42",
        "--out",
        csv.to_str().unwrap(),
    ];
    let first = stdout(&replan(&args));
    let second = stdout(&replan(&args));
    assert_eq!(first, second);
    let mean = field(&first, "mean");
    let se = field(&first, "std_error");
    assert!((mean - 11.0 / 6.0).abs() <= 3.0 * se, "{mean} +- {se}");
    assert_eq!(field(&first, "seed"), 42.0);

    let table = std::fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "B,trials,seed,mean,variance,std_error");
    assert_eq!(lines.len(), 3, "second run appends one row");
    assert_eq!(lines[1], lines[2]);
    assert!(lines[1].starts_with("3,1000000,42,"));
}

#[test]
fn analyze_and_simulate_agree() {
    for (dist, extra) in [("exp", vec![]), ("sexp", vec!["--delta", "0.3"])] {
        for (w, d, b) in [("6", "6", "2"), ("8", "16", "4")] {
            let mut common = vec![
                "--dist",
                dist,
                "--mu",
                "1.5",
                "--workers",
                w,
                "--samples",
                d,
                "--batches",
                b,
            ];
            common.extend(&extra);
            let exact = field(
                &stdout(&replan(&[&["analyze"], &common[..]].concat())),
                "mean",
            );
            let sim = stdout(&replan(
                &[
                    &["simulate", "--trials", "200000", "--seed", "3"],
                    &common[..],
                ]
                .concat(),
            ));
            let (mean, se) = (field(&sim, "mean"), field(&sim, "std_error"));
            assert!(
                (mean - exact).abs() <= 3.0 * se,
                "{dist} W={w} D={d}: {mean} vs {exact}"
            );
        }
    }
}

#[test]
fn simulate_rejects_bad_plan_files() {
    let dir = tempfile::tempdir().unwrap();
    let uncovered = dir.path().join("uncovered.json");
    std::fs::write(
        &uncovered,
        r#"{"num_samples": 4, "batches": [[0,1],[2,3]], "worker_to_batch": [0,0,0,0]}"#,
    )
    .unwrap();
    let malformed = dir.path().join("malformed.json");
    std::fs::write(&malformed, "{ not json").unwrap();
    for path in [&uncovered, &malformed, &dir.path().join("missing.json")] {
        let out = replan(&[
            "simulate",
            "--dist",
            "exp",
            "--mu",
            "1",
            "--plan-file",
            path.to_str().unwrap(),
            "--trials",
            "10",
        ]);
        assert_eq!(out.status.code(), Some(2), "{}", path.display());
    }
    let out = replan(&["simulate", "--dist", "exp", "--mu", "1", "--workers", "4"]);
    assert_eq!(out.status.code(), Some(2));
}

fn compare_rows(out: &str) -> (Vec<Vec<String>>, Vec<Vec<String>>) {
    let mut plans = Vec::new();
    let mut pairs = Vec::new();
    let mut section = 0;
    for line in out.lines().skip(1) {
        if line.starts_with("plan_id,") {
            section = 1;
        } else if line.starts_with("plan_a,") {
            section = 2;
        } else if line.starts_with("empirical minimizer") {
            break;
        } else {
            let row = line.split(',').map(String::from).collect();
            if section == 1 {
                plans.push(row)
            } else {
                pairs.push(row)
            }
        }
    }
    (plans, pairs)
}

#[test]
fn compare_flags_balanced_plan() {
    let dir = tempfile::tempdir().unwrap();
    let halves = halves(4);
    let balanced = write_plan(dir.path(), "balanced.json", &halves, vec![0, 0, 1, 1]);
    let unbalanced = write_plan(dir.path(), "unbalanced.json", &halves, vec![0, 0, 0, 1]);
    let shingles = BatchingPlan::shingled(DatasetSpec::new(4).unwrap(), 4, 2).unwrap();
    let overlap = write_plan(dir.path(), "overlap.json", &shingles, vec![0, 1, 2, 3]);
    let csv = dir.path().join("cmp.csv");

    let out = stdout(&replan(&[
        "compare",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--trials",
        "300000",
        "--seed",
        "9",
        "--plan-file",
        &balanced,
        "--plan-file",
        &unbalanced,
        "--plan-file",
        &overlap,
        "--out",
        csv.to_str().unwrap(),
    ]));
    let (plans, pairs) = compare_rows(&out);
    assert_eq!(plans.len(), 3);
    assert_eq!(plans[0][3], "*");
    assert!(plans[1][3].is_empty() && plans[2][3].is_empty());
    assert!(out.contains(&format!("empirical minimizer: {balanced}")));
    for pair in pairs.iter().filter(|p| p[0] == balanced) {
        let ci_hi: f64 = pair[4].parse().unwrap();
        assert!(ci_hi < 0.0, "{pair:?}");
    }
    let mean_unbalanced: f64 = plans[1][1].parse().unwrap();
    assert!((mean_unbalanced - 13.0 / 6.0).abs() < 0.02);

    let table = std::fs::read_to_string(&csv).unwrap();
    assert!(table.starts_with("plan_id,mean,std_error\n"));
    assert_eq!(table.lines().count(), 4);
    let pair_table = std::fs::read_to_string(dir.path().join("cmp.pairs.csv")).unwrap();
    assert!(pair_table.starts_with("plan_a,plan_b,diff,ci_lo,ci_hi\n"));
    assert_eq!(pair_table.lines().count(), 4);
}

#[test]
fn compare_with_itself_and_arity() {
    let dir = tempfile::tempdir().unwrap();
    let plan = write_plan(dir.path(), "p.json", &halves(4), vec![0, 1, 1, 0]);
    let out = stdout(&replan(&[
        "compare",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--trials",
        "10000",
        "--plan-file",
        &plan,
        "--plan-file",
        &plan,
    ]));
    let (_, pairs) = compare_rows(&out);
    assert_eq!(&pairs[0][2..], &["0", "0", "0"]);

    let out = replan(&[
        "compare",
        "--dist",
        "exp",
        "--mu",
        "1",
        "--plan-file",
        &plan,
    ]);
    assert_eq!(out.status.code(), Some(2));
}
