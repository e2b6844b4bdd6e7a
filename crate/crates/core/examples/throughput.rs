//! Raw and playout-adjusted trials per second.

use bayes_mcts::experiments::{speed_benchmark, ExperimentConfig, PayoffModel, TreeSpec};
use bayes_mcts::policy::{Policy, PolicyKind};
use bayes_mcts::tree::Backend;

fn main() -> bayes_mcts::Result<()> {
    for width in [5, 20] {
        let mut config = ExperimentConfig::new(
            TreeSpec::fixed(2, width, PayoffModel::Uniform),
            vec![
                Policy::UCT,
                Policy::new(PolicyKind::BayesUct2, Backend::Gaussian),
            ],
            1,
        );
        config.num_trees = 50;
        config.max_trials = 2000;
        for r in speed_benchmark(&config)? {
            println!(
                "W={width:<2} {:<7} raw {:>10.0}/s  adjusted {:>7.0}/s",
                r.policy.kind.name(),
                r.raw_trials_per_sec,
                r.adjusted_trials_per_sec
            );
        }
    }
    Ok(())
}
