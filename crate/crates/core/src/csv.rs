//! CSV serialization of experiment results.
//!
//! Every file starts with an optional `# argv: ...` comment, then a header
//! row. Floats use six significant digits in `%g` style.

use std::fmt::Write as _;

use crate::experiments::{
    ConvergenceRun, ErrorCurve, EstimationErrors, SpeedResult, ThresholdResult, TreeSpec,
};

pub const CURVE_HEADER: &str = "algorithm,backend,trial,mean_error,stderr,num_trees";
pub const TABLE1_HEADER: &str =
    "depth,width,payoff_model,algorithm,backend,trials_to_threshold,exceeded";
pub const FIG4A_HEADER: &str = "algorithm,backend,visit_bin_lo,visit_bin_hi,mean_abs_error,count";
pub const BENCH_HEADER: &str =
    "algorithm,backend,raw_trials_per_sec,adjusted_trials_per_sec,payout_cost_sec";
pub const CONVERGE_HEADER: &str = "algorithm,backend,tree,trials,root_mean,true_value,abs_error";

/// Formats `x` with six significant digits, trimming trailing zeros.
pub fn fmt_g6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            sign,
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn start(argv: Option<&str>, header: &str) -> String {
    let mut out = String::new();
    if let Some(argv) = argv {
        let _ = writeln!(out, "# argv: {argv}");
    }
    out.push_str(header);
    out.push('\n');
    out
}

pub fn curves(argv: Option<&str>, curves: &[ErrorCurve]) -> String {
    let mut out = start(argv, CURVE_HEADER);
    for c in curves {
        for p in &c.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                c.policy.kind,
                c.policy.backend_label(),
                p.trial,
                fmt_g6(p.mean_error),
                fmt_g6(p.stderr),
                c.num_trees
            );
        }
    }
    out
}

pub fn table1(
    argv: Option<&str>,
    spec: &TreeSpec,
    max_trials: u64,
    rows: &[ThresholdResult],
) -> String {
    let mut out = start(argv, TABLE1_HEADER);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            spec.depth,
            spec.width,
            spec.payoffs.name(),
            r.policy.kind,
            r.policy.backend_label(),
            r.trials.unwrap_or(max_trials),
            r.trials.is_none()
        );
    }
    out
}

pub fn fig4a(argv: Option<&str>, rows: &[EstimationErrors]) -> String {
    let mut out = start(argv, FIG4A_HEADER);
    for e in rows {
        for b in &e.bins {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.policy.kind,
                e.policy.backend_label(),
                b.lo,
                b.hi,
                fmt_g6(b.mean_abs_error),
                b.count
            );
        }
    }
    out
}

pub fn bench(argv: Option<&str>, rows: &[SpeedResult]) -> String {
    let mut out = start(argv, BENCH_HEADER);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.policy.kind,
            r.policy.backend_label(),
            fmt_g6(r.raw_trials_per_sec),
            fmt_g6(r.adjusted_trials_per_sec),
            fmt_g6(r.payout_cost_sec)
        );
    }
    out
}

pub fn convergence(argv: Option<&str>, rows: &[ConvergenceRun]) -> String {
    let mut out = start(argv, CONVERGE_HEADER);
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.policy.kind,
            r.policy.backend_label(),
            r.tree,
            r.trials,
            fmt_g6(r.root_mean),
            fmt_g6(r.true_value),
            fmt_g6(r.abs_error())
        );
    }
    out
}
