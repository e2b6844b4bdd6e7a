//! Fast self-verification checks run by the `selftest` subcommand.
//!
//! The quadrature reference here integrates the density of `max(A, B)`
//! directly and shares no code with the pairwise formulas it checks.

use std::fmt::Write as _;

use crate::belief::{BetaPosterior, Grid, GridBelief};
use crate::csv::fmt_g6;
use crate::experiments::{converge_once, run_error_curve, ExperimentConfig, PayoffModel, TreeSpec};
use crate::extremum::{
    clark_max_moments_direct, clark_max_pair, grid_max, grid_min, std_normal_cdf, Exact,
    LookupTables, NormalFunctions,
};
use crate::policy::{Policy, PolicyKind};
use crate::tree::{Backend, BanditTree, BeliefConfig, TreeShape};
use crate::GaussianBelief;

/// Sweep of normalized gaps used by the pairwise checks.
pub const ALPHA_SWEEP: [f64; 7] = [-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0];
/// Sweep of `sigma1 / sigma2` used by the pairwise checks.
pub const SIGMA_RATIO_SWEEP: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

/// Input pair for a point of the sweep: `sigma2 = 1`, `mu2 = 0`, and `mu1`
/// chosen so the normalized gap equals `alpha` at zero correlation.
pub fn sweep_pair(alpha: f64, ratio: f64) -> (GaussianBelief, GaussianBelief) {
    let sigma_m = (ratio * ratio + 1.0).sqrt();
    (
        GaussianBelief::new(alpha * sigma_m, ratio),
        GaussianBelief::new(0.0, 1.0),
    )
}

/// Mean and variance of `max(A, B)` for independent Gaussians by Simpson
/// quadrature of `f_a F_b + f_b F_a`, with the CDFs themselves obtained by
/// cumulative trapezoid integration of the densities.
pub fn quadrature_max_moments(a: &GaussianBelief, b: &GaussianBelief) -> (f64, f64) {
    const STEPS: usize = 40_000;
    let spread = a.sigma.max(b.sigma);
    let lo = a.mu.min(b.mu) - 12.0 * spread;
    let hi = a.mu.max(b.mu) + 12.0 * spread;
    let h = (hi - lo) / STEPS as f64;
    let density = |g: &GaussianBelief, x: f64| {
        let z = (x - g.mu) / g.sigma;
        (-0.5 * z * z).exp() / (g.sigma * (2.0 * std::f64::consts::PI).sqrt())
    };
    let xs: Vec<f64> = (0..=STEPS).map(|k| lo + k as f64 * h).collect();
    let fa: Vec<f64> = xs.iter().map(|&x| density(a, x)).collect();
    let fb: Vec<f64> = xs.iter().map(|&x| density(b, x)).collect();
    let cumulative = |f: &[f64]| {
        let mut c = vec![0.0; f.len()];
        for k in 1..f.len() {
            c[k] = c[k - 1] + 0.5 * h * (f[k - 1] + f[k]);
        }
        c
    };
    let (ca, cb) = (cumulative(&fa), cumulative(&fb));
    let pdf: Vec<f64> = (0..xs.len())
        .map(|k| fa[k] * cb[k] + fb[k] * ca[k])
        .collect();
    let simpson = |g: &dyn Fn(usize) -> f64| {
        let mut s = g(0) + g(STEPS);
        for k in 1..STEPS {
            s += g(k) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    };
    let mean = simpson(&|k| xs[k] * pdf[k]);
    let var = simpson(&|k| (xs[k] - mean) * (xs[k] - mean) * pdf[k]);
    (mean, var)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{} {:<28} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(out, "{} checks, {} failed", self.checks.len(), failed);
        out
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        name,
        passed,
        detail,
    }
}

pub fn run_selftest() -> SelftestReport {
    run_selftest_with(LookupTables::shared())
}

/// Runs every check, using `tables` for the table-backed ones.
pub fn run_selftest_with(tables: &LookupTables) -> SelftestReport {
    let checks = vec![
        normal_reference(),
        table_accuracy(tables),
        clarke_quadrature_sweep(),
        restructured_identity_exact(),
        restructured_identity_tables(tables),
        grid_order_statistics(),
        grid_cdf_convergence(),
        beta_grid_agreement(),
        convergence_smoke(),
        curve_determinism(),
    ];
    SelftestReport { checks }
}

fn normal_reference() -> Check {
    let err = [
        (std_normal_cdf(0.0) - 0.5).abs(),
        (std_normal_cdf(-1.959_964) - 0.025).abs(),
        (std_normal_cdf(8.0) - 1.0).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    check(
        "normal_cdf_reference",
        err < 1e-6,
        format!("max err {}", fmt_g6(err)),
    )
}

fn table_accuracy(tables: &LookupTables) -> Check {
    let mut worst: f64 = 0.0;
    let (lo, hi) = tables.range();
    let steps = 20_000;
    for k in 0..=steps {
        let a = lo + (hi - lo) * k as f64 / steps as f64 + 1e-4;
        worst = worst
            .max((tables.cdf(a) - Exact.cdf(a)).abs())
            .max((tables.f1(a) - Exact.f1(a)).abs())
            .max((tables.f2(a) - Exact.f2(a)).abs());
    }
    check(
        "lookup_table_accuracy",
        worst <= 1e-5,
        format!("max err {}", fmt_g6(worst)),
    )
}

fn clarke_quadrature_sweep() -> Check {
    let (mut mean_err, mut var_rel): (f64, f64) = (0.0, 0.0);
    for &alpha in &ALPHA_SWEEP {
        for &ratio in &SIGMA_RATIO_SWEEP {
            let (a, b) = sweep_pair(alpha, ratio);
            let out = clark_max_pair(&a, &b, 0.0, &Exact).expect("valid sweep inputs");
            let (m, v) = quadrature_max_moments(&a, &b);
            mean_err = mean_err.max((out.mu - m).abs());
            var_rel = var_rel.max((out.variance() - v).abs() / v);
        }
    }
    check(
        "clarke_quadrature_sweep",
        mean_err <= 1e-3 && var_rel <= 1e-2,
        format!(
            "mean err {} var rel err {}",
            fmt_g6(mean_err),
            fmt_g6(var_rel)
        ),
    )
}

fn identity_gap<F: NormalFunctions>(fns: &F) -> f64 {
    let mut worst: f64 = 0.0;
    for &alpha in &ALPHA_SWEEP {
        for &ratio in &SIGMA_RATIO_SWEEP {
            let (a, b) = sweep_pair(alpha, ratio);
            let out = clark_max_pair(&a, &b, 0.0, fns).expect("valid sweep inputs");
            let (m, v) = clark_max_moments_direct(&a, &b, 0.0).expect("valid sweep inputs");
            worst = worst
                .max((out.mu - m).abs())
                .max((out.variance() - v).abs());
        }
    }
    worst
}

fn restructured_identity_exact() -> Check {
    let gap = identity_gap(&Exact);
    check(
        "restructured_identity_exact",
        gap <= 1e-9,
        format!("max gap {}", fmt_g6(gap)),
    )
}

fn restructured_identity_tables(tables: &LookupTables) -> Check {
    let gap = identity_gap(tables);
    check(
        "restructured_identity_table",
        gap <= 1e-4,
        format!("max gap {}", fmt_g6(gap)),
    )
}

fn grid_order_statistics() -> Check {
    let grid = Grid::new(1000).expect("valid grid");
    let u = GridBelief::uniform(grid);
    let results = (|| {
        let (m2, v2) = grid_max(&[&u, &u])?.moments();
        let m3 = grid_max(&[&u, &u, &u])?.mean();
        let n2 = grid_min(&[&u, &u])?.mean();
        Ok::<_, crate::Error>([
            (m2 - 2.0 / 3.0).abs(),
            (v2 - 1.0 / 18.0).abs(),
            (m3 - 0.75).abs(),
            (n2 - 1.0 / 3.0).abs(),
        ])
    })();
    match results {
        Ok(errs) => {
            let worst = errs.into_iter().fold(0.0, f64::max);
            check(
                "grid_order_statistics",
                worst <= 1e-3,
                format!("max err {}", fmt_g6(worst)),
            )
        }
        Err(e) => check("grid_order_statistics", false, e.to_string()),
    }
}

fn beta32_cdf_error(points: usize) -> f64 {
    let grid = Grid::new(points).expect("valid grid");
    let post = BetaPosterior::new(3.0, 2.0).expect("valid posterior");
    let g = post.to_grid(&grid);
    g.cdf()
        .iter()
        .zip(grid.points())
        .map(|(c, x)| (c - (4.0 * x.powi(3) - 3.0 * x.powi(4))).abs())
        .fold(0.0, f64::max)
}

fn grid_cdf_convergence() -> Check {
    let coarse = beta32_cdf_error(250);
    let fine = beta32_cdf_error(1000);
    let ratio = coarse / fine;
    check(
        "grid_cdf_convergence",
        ratio >= 10.0,
        format!("error ratio {}", fmt_g6(ratio)),
    )
}

fn beta_grid_agreement() -> Check {
    let grid = Grid::new(1000).expect("valid grid");
    let mut worst: f64 = 0.0;
    for (a, b) in [
        (1.0, 1.0),
        (2.0, 1.0),
        (4.0, 2.0),
        (30.0, 12.0),
        (3.0, 90.0),
    ] {
        let post = BetaPosterior::new(a, b).expect("valid posterior");
        let (m, v) = post.moments();
        let (gm, gv) = post.to_grid(&grid).moments();
        worst = worst.max((m - gm).abs()).max((v - gv).abs());
    }
    check(
        "beta_grid_agreement",
        worst <= 1e-4,
        format!("max err {}", fmt_g6(worst)),
    )
}

fn convergence_smoke() -> Check {
    let shape = TreeShape::Node(vec![
        TreeShape::Node(TreeShape::leaves(&[0.2, 0.5, 0.8])),
        TreeShape::Node(TreeShape::leaves(&[0.4, 0.6, 0.9])),
        TreeShape::Node(TreeShape::leaves(&[0.1, 0.3, 0.7])),
    ]);
    let policy = Policy::new(PolicyKind::BayesUct2, Backend::Gaussian);
    let result = BanditTree::from_shape(&shape, BeliefConfig::default())
        .and_then(|t| converge_once(t, &policy, 20_000, 5));
    match result {
        Ok((mean, truth)) => {
            let err = (mean - truth).abs();
            check(
                "bayes_uct2_convergence",
                err <= 0.03,
                format!("root err {}", fmt_g6(err)),
            )
        }
        Err(e) => check("bayes_uct2_convergence", false, e.to_string()),
    }
}

fn curve_determinism() -> Check {
    let mut config = ExperimentConfig::new(
        TreeSpec::fixed(2, 3, PayoffModel::Uniform),
        vec![
            Policy::UCT,
            Policy::new(PolicyKind::BayesUct2, Backend::Gaussian),
        ],
        17,
    );
    config.num_trees = 20;
    config.max_trials = 200;
    config.jobs = Some(1);
    match (run_error_curve(&config), run_error_curve(&config)) {
        (Ok(a), Ok(b)) => check("curve_determinism", a == b, format!("{} curves", a.len())),
        (Err(e), _) | (_, Err(e)) => check("curve_determinism", false, e.to_string()),
    }
}
