//! Trials until the mean greedy decision error drops to 0.01.

use bayes_mcts::experiments::{trials_to_threshold, ExperimentConfig, PayoffModel, TreeSpec};
use bayes_mcts::policy::{Policy, PolicyKind};
use bayes_mcts::tree::Backend;

fn main() -> bayes_mcts::Result<()> {
    let trees = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(300);
    for payoffs in [PayoffModel::Uniform, PayoffModel::Gaussian] {
        let mut config = ExperimentConfig::new(
            TreeSpec::fixed(2, 5, payoffs),
            vec![
                Policy::UCT,
                Policy::new(PolicyKind::BayesUct2, Backend::Gaussian),
            ],
            42,
        );
        config.num_trees = trees;
        config.max_trials = 4000;
        let rows = trials_to_threshold(&config)?;
        for r in &rows {
            let t = r
                .trials
                .map_or_else(|| "> 4000".to_string(), |t| t.to_string());
            println!("{:<8} {:<7} {t}", payoffs.name(), r.policy.kind.name());
        }
    }
    Ok(())
}
