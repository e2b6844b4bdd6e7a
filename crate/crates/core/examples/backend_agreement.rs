//! Gaussian and numeric node means tracked side by side.

use bayes_mcts::experiments::{backend_agreement, ExperimentConfig, PayoffModel, TreeSpec};
use bayes_mcts::policy::{Policy, PolicyKind};
use bayes_mcts::tree::Backend;

fn main() -> bayes_mcts::Result<()> {
    let policy = Policy::new(PolicyKind::BayesUct2, Backend::Gaussian);
    for depth in [2, 3] {
        let mut config = ExperimentConfig::new(
            TreeSpec::fixed(depth, 5, PayoffModel::Uniform),
            vec![policy],
            8,
        );
        config.num_trees = 20;
        config.max_trials = 1000;
        config.eval_every = 50;
        let report = backend_agreement(&config, &policy, 0.01)?;
        println!(
            "depth {depth}: {} comparisons, {:.2}% within 0.01, largest gap {:.4}",
            report.comparisons,
            100.0 * report.fraction_within(),
            report.max_abs_diff
        );
    }
    Ok(())
}
