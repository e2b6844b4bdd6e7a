use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayes-mcts"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small(sub: &str) -> Vec<&str> {
    vec![
        sub,
        "--seed",
        "9",
        "--trees",
        "8",
        "--max-trials",
        "60",
        "--quiet",
    ]
}

#[test]
fn table1_output_shape() {
    let out = run(&small("table1"));
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# argv: bayes-mcts table1 --seed 9"));
    assert_eq!(
        lines.next().unwrap(),
        "depth,width,payoff_model,algorithm,backend,trials_to_threshold,exceeded"
    );
    let rows: Vec<_> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows[0].starts_with("2,5,uniform,uct,none,"));
    assert!(rows[1].starts_with("2,5,uniform,bayes2,gaussian,"));
}

#[test]
fn every_subcommand_is_deterministic() {
    for sub in ["curve", "table1", "fig4a", "hybrid", "converge"] {
        let mut args = small(sub);
        args.extend(["--algos", "uct,bayes1,random", "--eval-every", "20"]);
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.status.code(), Some(0), "{sub}");
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{sub}");
    }
}

#[test]
fn job_count_does_not_change_results() {
    let mut one = small("curve");
    one.extend(["--jobs", "1"]);
    let mut three = small("curve");
    three.extend(["--jobs", "3"]);
    let strip = |o: Output| {
        String::from_utf8(o.stdout)
            .unwrap()
            .lines()
            .skip(1)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(run(&one)), strip(run(&three)));
}

#[test]
fn writes_to_out_file() {
    let dir = std::env::temp_dir().join(format!("bayes-mcts-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bench.csv");
    let mut args = small("bench");
    args.extend(["--out", path.to_str().unwrap()]);
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("algorithm,backend,raw_trials_per_sec"));
    assert_eq!(text.lines().count(), 4);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["curve"]).status.code(), Some(2));
    assert_eq!(
        run(&["curve", "--seed", "1", "--payoffs", "cauchy"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["curve", "--seed", "1", "--trees", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["curve", "--seed", "1", "--depth", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn selftest_passes() {
    let out = run(&["selftest"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 8);
    assert!(!text.contains("FAIL "));
}

#[test]
fn progress_goes_to_stderr() {
    let args = [
        "curve",
        "--seed",
        "2",
        "--trees",
        "10",
        "--max-trials",
        "20",
    ];
    let out = run(&args);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("trees"));
    let quiet = run(&[&args[..], &["--quiet"]].concat());
    assert!(quiet.stderr.is_empty());
}
