//! How well UCT averages and Bayesian posteriors estimate top-level values.

use bayes_mcts::experiments::{estimation_error_binned, ExperimentConfig, PayoffModel, TreeSpec};
use bayes_mcts::policy::{Policy, PolicyKind};
use bayes_mcts::tree::Backend;

fn main() -> bayes_mcts::Result<()> {
    let mut config = ExperimentConfig::new(
        TreeSpec::fixed(2, 5, PayoffModel::Uniform),
        vec![
            Policy::UCT,
            Policy::new(PolicyKind::BayesUct2, Backend::Gaussian),
            Policy::new(PolicyKind::BayesUct2, Backend::Numeric),
        ],
        3,
    );
    config.num_trees = 40;
    config.max_trials = 1000;
    for row in estimation_error_binned(&config)? {
        println!("{} ({})", row.policy.kind, row.policy.backend_label());
        for bin in &row.bins {
            println!(
                "  visits {:>4}..{:<4} error {:.4} over {}",
                bin.lo, bin.hi, bin.mean_abs_error, bin.count
            );
        }
    }
    Ok(())
}
