//! Random bandit-tree experiments.
//!
//! Every algorithm in an [`ExperimentConfig`] runs on the same set of trees:
//! tree `i` is generated from [`tree_seed`]`(master_seed, i)` and its trials
//! are driven by [`trial_seed`]`(master_seed, i)`. Per-tree results are
//! merged in tree-index order, so output never depends on thread scheduling.

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::belief::{Grid, DEFAULT_GRID_POINTS};
use crate::error::{Error, Result};
use crate::extremum::{Combiner, FunctionMode};
use crate::policy::{greedy_root_choice, run_trial, Policy, PolicyKind};
use crate::seed::{tree_seed, trial_seed};
use crate::tree::{Backend, BanditTree, BeliefConfig, NodeKind};

/// Distribution of leaf payoff rates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PayoffModel {
    /// Uniform on `(0, 1)`; the uniform leaf prior is correct.
    #[default]
    Uniform,
    /// Normal with mean 0.5 and standard deviation 0.1, redrawn outside `(0.001, 0.999)`.
    Gaussian,
}

impl PayoffModel {
    pub fn name(self) -> &'static str {
        match self {
            PayoffModel::Uniform => "uniform",
            PayoffModel::Gaussian => "gaussian",
        }
    }
}

impl FromStr for PayoffModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform" => Ok(PayoffModel::Uniform),
            "gaussian" => Ok(PayoffModel::Gaussian),
            _ => Err(Error::InvalidSpec(format!("unknown payoff model '{s}'"))),
        }
    }
}

/// Inclusive range of child counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WidthRange {
    pub lo: usize,
    pub hi: usize,
}

impl fmt::Display for WidthRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for WidthRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidSpec(format!("width range '{s}' is not lo:hi"));
        let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WidthSpec {
    Fixed(usize),
    /// Each interior node draws its width uniformly; the root from `root`,
    /// all other levels from `lower`.
    Random {
        root: WidthRange,
        lower: WidthRange,
    },
}

impl WidthSpec {
    /// Random widths with a mean near 5: `2..=10` at the root, `1..=10` below.
    pub const RANDOM_MEAN_FIVE: WidthSpec = WidthSpec::Random {
        root: WidthRange { lo: 2, hi: 10 },
        lower: WidthRange { lo: 1, hi: 10 },
    };
}

impl fmt::Display for WidthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WidthSpec::Fixed(w) => write!(f, "{w}"),
            WidthSpec::Random { root, lower } => write!(f, "{root}/{lower}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeSpec {
    /// Number of interior levels; leaves hang below level `depth`.
    pub depth: usize,
    pub width: WidthSpec,
    pub payoffs: PayoffModel,
}

impl TreeSpec {
    pub fn fixed(depth: usize, width: usize, payoffs: PayoffModel) -> Self {
        Self {
            depth,
            width: WidthSpec::Fixed(width),
            payoffs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidSpec("depth must be at least 1".into()));
        }
        match self.width {
            WidthSpec::Fixed(0) => Err(Error::InvalidSpec("width must be at least 1".into())),
            WidthSpec::Random { root, lower } => {
                if root.lo < 2 {
                    return Err(Error::InvalidSpec(
                        "root width range must start at 2 or more".into(),
                    ));
                }
                if lower.lo == 0 || lower.hi < lower.lo || root.hi < root.lo {
                    return Err(Error::InvalidSpec("empty width range".into()));
                }
                Ok(())
            }
            WidthSpec::Fixed(_) => Ok(()),
        }
    }
}

/// Builds a random tree: widths in breadth-first order, then one payoff per
/// leaf in leaf-id order, all from one stream seeded by `seed`.
pub fn generate_tree(spec: &TreeSpec, seed: u64, config: BeliefConfig) -> Result<BanditTree> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::new();
    let mut depths = vec![0usize];
    let mut next = 0;
    while next < depths.len() {
        let depth = depths[next];
        let width = if depth == spec.depth {
            0
        } else {
            match spec.width {
                WidthSpec::Fixed(w) => w,
                WidthSpec::Random { root, lower } => {
                    let r = if depth == 0 { root } else { lower };
                    rng.random_range(r.lo..=r.hi)
                }
            }
        };
        counts.push(width);
        depths.extend(std::iter::repeat_n(depth + 1, width));
        next += 1;
    }
    let leaves = counts.iter().filter(|&&c| c == 0).count();
    let payoffs: Vec<f64> = match spec.payoffs {
        PayoffModel::Uniform => (0..leaves).map(|_| rng.random::<f64>()).collect(),
        PayoffModel::Gaussian => {
            let normal = Normal::new(0.5, 0.1).expect("valid normal parameters");
            (0..leaves)
                .map(|_| loop {
                    let p = normal.sample(&mut rng);
                    if p > 0.001 && p < 0.999 {
                        break p;
                    }
                })
                .collect()
        }
    };
    BanditTree::from_bfs(&counts, &payoffs, config)
}

/// True loss of the greedy root move: best root-child value minus the value
/// of the child with the highest estimate.
pub fn greedy_decision_error(tree: &mut BanditTree, policy: &Policy) -> Result<f64> {
    let root = tree.root();
    let best = tree
        .children(root)
        .map(|c| tree.true_value(c))
        .fold(f64::NEG_INFINITY, f64::max);
    let chosen = greedy_root_choice(tree, policy)?;
    Ok(best - tree.true_value(chosen))
}

/// Description of one reproducible experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub tree_spec: TreeSpec,
    pub algorithms: Vec<Policy>,
    pub num_trees: usize,
    pub max_trials: u64,
    pub eval_every: u64,
    pub error_threshold: f64,
    pub master_seed: u64,
    /// Seconds per playout assumed by adjusted throughput.
    pub payout_cost_sec: f64,
    pub combiner: Combiner,
    pub functions: FunctionMode,
    pub grid_points: usize,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Log progress every this many trees (0 disables).
    pub progress_every: usize,
}

impl ExperimentConfig {
    pub fn new(tree_spec: TreeSpec, algorithms: Vec<Policy>, master_seed: u64) -> Self {
        Self {
            tree_spec,
            algorithms,
            num_trees: 1000,
            max_trials: 1000,
            eval_every: 10,
            error_threshold: 0.01,
            master_seed,
            payout_cost_sec: 1e-4,
            combiner: Combiner::RandomOrder,
            functions: FunctionMode::Tables,
            grid_points: DEFAULT_GRID_POINTS,
            jobs: None,
            progress_every: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.tree_spec.validate()?;
        if self.algorithms.is_empty() {
            return Err(Error::InvalidSpec("no algorithms selected".into()));
        }
        if self.num_trees == 0 || self.max_trials == 0 || self.eval_every == 0 {
            return Err(Error::InvalidSpec(
                "trees, max trials and evaluation spacing must be positive".into(),
            ));
        }
        Grid::new(self.grid_points)?;
        Ok(())
    }

    /// Evaluation checkpoints: `eval_every, 2 * eval_every, ...` up to `max_trials`.
    pub fn checkpoints(&self) -> Vec<u64> {
        (1..=self.max_trials / self.eval_every)
            .map(|k| k * self.eval_every)
            .collect()
    }

    /// Belief configuration for running `policy` on tree `index`.
    pub fn belief_config(&self, policy: &Policy, index: usize) -> Result<BeliefConfig> {
        let grid = if policy.backend == Backend::Numeric && policy.answers_with_beliefs() {
            Some(Grid::new(self.grid_points)?)
        } else {
            None
        };
        Ok(BeliefConfig {
            grid,
            functions: self.functions,
            combiner: self.combiner,
            salt: tree_seed(self.master_seed, index as u64),
            ..BeliefConfig::default()
        })
    }

    /// Tree `index` of the paired set, configured for `policy`.
    pub fn tree(&self, policy: &Policy, index: usize) -> Result<BanditTree> {
        generate_tree(
            &self.tree_spec,
            tree_seed(self.master_seed, index as u64),
            self.belief_config(policy, index)?,
        )
    }

    fn trial_rng(&self, index: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(trial_seed(self.master_seed, index as u64))
    }
}

fn run_per_tree<T, F>(config: &ExperimentConfig, label: &str, work: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    config.validate()?;
    let done = AtomicUsize::new(0);
    let job = || {
        (0..config.num_trees)
            .into_par_iter()
            .map(|i| {
                let out = work(i);
                let finished = done.fetch_add(1, Ordering::Relaxed) + 1;
                if config.progress_every > 0 && finished.is_multiple_of(config.progress_every) {
                    log::info!("{label}: {finished}/{} trees", config.num_trees);
                }
                out
            })
            .collect::<Result<Vec<T>>>()
    };
    match config.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidSpec(format!("thread pool: {e}")))?
            .install(job),
        None => job(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvePoint {
    pub trial: u64,
    pub mean_error: f64,
    pub stderr: f64,
}

/// Greedy decision error averaged over the paired tree set.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub policy: Policy,
    pub points: Vec<CurvePoint>,
    pub num_trees: usize,
}

fn curve_on_tree(config: &ExperimentConfig, policy: &Policy, index: usize) -> Result<Vec<f64>> {
    let mut tree = config.tree(policy, index)?;
    let mut rng = config.trial_rng(index);
    let mut errors = Vec::with_capacity((config.max_trials / config.eval_every) as usize);
    for t in 1..=config.max_trials {
        run_trial(&mut tree, policy, &mut rng)?;
        if t % config.eval_every == 0 {
            errors.push(greedy_decision_error(&mut tree, policy)?);
        }
    }
    Ok(errors)
}

fn mean_and_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Runs every algorithm on every tree and averages the greedy decision error
/// at each checkpoint.
pub fn run_error_curve(config: &ExperimentConfig) -> Result<Vec<ErrorCurve>> {
    let per_tree = run_per_tree(config, "curve", |i| {
        config
            .algorithms
            .iter()
            .map(|p| curve_on_tree(config, p, i))
            .collect::<Result<Vec<_>>>()
    })?;
    let checkpoints = config.checkpoints();
    Ok(config
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, policy)| ErrorCurve {
            policy: *policy,
            num_trees: per_tree.len(),
            points: checkpoints
                .iter()
                .enumerate()
                .map(|(c, &trial)| {
                    let (mean_error, stderr) =
                        mean_and_stderr(per_tree.iter().map(|tree| tree[a][c]));
                    CurvePoint {
                        trial,
                        mean_error,
                        stderr,
                    }
                })
                .collect(),
        })
        .collect())
}

/// Trials needed for the mean error to reach a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdResult {
    pub policy: Policy,
    /// First checkpoint with mean error at or below the threshold.
    pub trials: Option<u64>,
}

pub fn first_crossing(curve: &ErrorCurve, threshold: f64) -> ThresholdResult {
    ThresholdResult {
        policy: curve.policy,
        trials: curve
            .points
            .iter()
            .find(|p| p.mean_error <= threshold)
            .map(|p| p.trial),
    }
}

pub fn trials_to_threshold(config: &ExperimentConfig) -> Result<Vec<ThresholdResult>> {
    Ok(run_error_curve(config)?
        .iter()
        .map(|c| first_crossing(c, config.error_threshold))
        .collect())
}

/// Visit-count bin `[lo, hi]` of top-level estimation errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisitBin {
    pub lo: u64,
    pub hi: u64,
    pub mean_abs_error: f64,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationErrors {
    pub policy: Policy,
    /// Non-empty bins only, in increasing visit order.
    pub bins: Vec<VisitBin>,
}

/// Bin index of a visit count; bin `k` covers `[2^k, 2^(k+1) - 1]`.
pub fn visit_bin(n: u64) -> usize {
    debug_assert!(n > 0);
    (63 - n.leading_zeros()) as usize
}

fn estimation_on_tree(
    config: &ExperimentConfig,
    policy: &Policy,
    index: usize,
) -> Result<Vec<(f64, u64)>> {
    let mut tree = config.tree(policy, index)?;
    if policy.answers_with_beliefs() {
        tree.set_eager(true);
    }
    let mut rng = config.trial_rng(index);
    let mut bins: Vec<(f64, u64)> = Vec::new();
    for _ in 0..config.max_trials {
        let trial = run_trial(&mut tree, policy, &mut rng)?;
        let top = trial.path[1];
        let estimate = if policy.answers_with_beliefs() {
            tree.belief_moments(top, policy.backend).0
        } else {
            tree.stats(top)
                .mean_reward()
                .expect("top node was just visited")
        };
        let k = visit_bin(tree.stats(top).n);
        if bins.len() <= k {
            bins.resize(k + 1, (0.0, 0));
        }
        bins[k].0 += (estimate - tree.true_value(top)).abs();
        bins[k].1 += 1;
    }
    Ok(bins)
}

/// Absolute error of top-level value estimates, binned by the node's visit
/// count at the time of each sample. UCT is scored by average reward,
/// other policies by posterior mean.
pub fn estimation_error_binned(config: &ExperimentConfig) -> Result<Vec<EstimationErrors>> {
    let per_tree = run_per_tree(config, "fig4a", |i| {
        config
            .algorithms
            .iter()
            .map(|p| estimation_on_tree(config, p, i))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(config
        .algorithms
        .iter()
        .enumerate()
        .map(|(a, policy)| {
            let mut totals: Vec<(f64, u64)> = Vec::new();
            for tree in &per_tree {
                let bins = &tree[a];
                if totals.len() < bins.len() {
                    totals.resize(bins.len(), (0.0, 0));
                }
                for (t, b) in totals.iter_mut().zip(bins) {
                    t.0 += b.0;
                    t.1 += b.1;
                }
            }
            EstimationErrors {
                policy: *policy,
                bins: totals
                    .iter()
                    .enumerate()
                    .filter(|(_, (_, count))| *count > 0)
                    .map(|(k, &(sum, count))| VisitBin {
                        lo: 1 << k,
                        hi: (1 << (k + 1)) - 1,
                        mean_abs_error: sum / count as f64,
                        count,
                    })
                    .collect(),
            }
        })
        .collect())
}

/// Error curves for UCT, full Bayes-UCT2 and the UCT-sampling hybrid.
pub fn run_hybrid_study(config: &ExperimentConfig, backend: Backend) -> Result<Vec<ErrorCurve>> {
    let mut config = config.clone();
    config.algorithms = vec![
        Policy::UCT,
        Policy::new(PolicyKind::BayesUct2, backend),
        Policy::new(PolicyKind::Hybrid, backend),
    ];
    run_error_curve(&config)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedResult {
    pub policy: Policy,
    pub raw_trials_per_sec: f64,
    pub adjusted_trials_per_sec: f64,
    pub payout_cost_sec: f64,
}

/// Throughput once each trial also pays `payout_cost_sec` for its playout.
pub fn adjusted_rate(raw_trials_per_sec: f64, payout_cost_sec: f64) -> f64 {
    1.0 / (1.0 / raw_trials_per_sec + payout_cost_sec)
}

/// Wall-clock trials per second on the paired tree set. Runs sequentially on
/// the calling thread; tree construction is not timed.
pub fn speed_benchmark(config: &ExperimentConfig) -> Result<Vec<SpeedResult>> {
    config.validate()?;
    config
        .algorithms
        .iter()
        .map(|policy| {
            let mut trees = (0..config.num_trees)
                .map(|i| config.tree(policy, i))
                .collect::<Result<Vec<_>>>()?;
            let start = Instant::now();
            for (i, tree) in trees.iter_mut().enumerate() {
                let mut rng = config.trial_rng(i);
                for _ in 0..config.max_trials {
                    run_trial(tree, policy, &mut rng)?;
                }
            }
            let secs = start.elapsed().as_secs_f64().max(1e-9);
            let raw = (config.num_trees as u64 * config.max_trials) as f64 / secs;
            Ok(SpeedResult {
                policy: *policy,
                raw_trials_per_sec: raw,
                adjusted_trials_per_sec: adjusted_rate(raw, config.payout_cost_sec),
                payout_cost_sec: config.payout_cost_sec,
            })
        })
        .collect()
}

/// Final root estimate of one long run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRun {
    pub policy: Policy,
    pub tree: usize,
    pub trials: u64,
    pub root_mean: f64,
    pub true_value: f64,
}

impl ConvergenceRun {
    pub fn abs_error(&self) -> f64 {
        (self.root_mean - self.true_value).abs()
    }
}

/// Runs `trials` trials of `policy` on `tree` and reports the root posterior mean.
pub fn converge_once(
    mut tree: BanditTree,
    policy: &Policy,
    trials: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        run_trial(&mut tree, policy, &mut rng)?;
    }
    tree.refresh_beliefs()?;
    let root = tree.root();
    Ok((
        tree.belief_moments(root, policy.backend).0,
        tree.true_value(root),
    ))
}

/// Long single runs per tree and algorithm; `max_trials` trials each.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Vec<ConvergenceRun>> {
    let per_tree = run_per_tree(config, "converge", |i| {
        config
            .algorithms
            .iter()
            .map(|p| {
                let seed = trial_seed(config.master_seed, i as u64);
                let (root_mean, true_value) =
                    converge_once(config.tree(p, i)?, p, config.max_trials, seed)?;
                Ok(ConvergenceRun {
                    policy: *p,
                    tree: i,
                    trials: config.max_trials,
                    root_mean,
                    true_value,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut runs = Vec::with_capacity(per_tree.len() * config.algorithms.len());
    for a in 0..config.algorithms.len() {
        runs.extend(per_tree.iter().map(|t| t[a]));
    }
    Ok(runs)
}

/// Differences between Gaussian and numeric node means along runs that
/// track both representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementReport {
    pub comparisons: u64,
    pub within_tolerance: u64,
    pub max_abs_diff: f64,
}

impl AgreementReport {
    pub fn fraction_within(&self) -> f64 {
        self.within_tolerance as f64 / self.comparisons.max(1) as f64
    }
}

/// Runs `policy` with both belief representations kept current and compares
/// the Gaussian and grid means of every interior node at each checkpoint.
pub fn backend_agreement(
    config: &ExperimentConfig,
    policy: &Policy,
    tolerance: f64,
) -> Result<AgreementReport> {
    let per_tree = run_per_tree(config, "agreement", |i| {
        let mut belief = config.belief_config(policy, i)?;
        belief.grid = Some(Grid::new(config.grid_points)?);
        belief.eager = true;
        let mut tree = generate_tree(
            &config.tree_spec,
            tree_seed(config.master_seed, i as u64),
            belief,
        )?;
        let interior: Vec<_> = tree
            .ids()
            .filter(|&id| tree.kind(id) != NodeKind::Leaf)
            .collect();
        let mut rng = config.trial_rng(i);
        let mut report = AgreementReport {
            comparisons: 0,
            within_tolerance: 0,
            max_abs_diff: 0.0,
        };
        for t in 1..=config.max_trials {
            run_trial(&mut tree, policy, &mut rng)?;
            if t % config.eval_every != 0 {
                continue;
            }
            for &id in &interior {
                let g = tree.belief_moments(id, Backend::Gaussian).0;
                let n = tree.belief_moments(id, Backend::Numeric).0;
                let diff = (g - n).abs();
                report.comparisons += 1;
                report.within_tolerance += u64::from(diff <= tolerance);
                report.max_abs_diff = report.max_abs_diff.max(diff);
            }
        }
        Ok(report)
    })?;
    Ok(per_tree.iter().fold(
        AgreementReport {
            comparisons: 0,
            within_tolerance: 0,
            max_abs_diff: 0.0,
        },
        |acc, r| AgreementReport {
            comparisons: acc.comparisons + r.comparisons,
            within_tolerance: acc.within_tolerance + r.within_tolerance,
            max_abs_diff: acc.max_abs_diff.max(r.max_abs_diff),
        },
    ))
}
