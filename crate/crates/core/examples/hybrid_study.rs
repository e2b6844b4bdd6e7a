//! Sampling like UCT but answering like Bayes-UCT.

use bayes_mcts::experiments::{run_hybrid_study, ExperimentConfig, PayoffModel, TreeSpec};
use bayes_mcts::policy::Policy;
use bayes_mcts::tree::Backend;

fn main() -> bayes_mcts::Result<()> {
    let mut config = ExperimentConfig::new(
        TreeSpec::fixed(2, 5, PayoffModel::Uniform),
        vec![Policy::UCT],
        11,
    );
    config.num_trees = 300;
    config.max_trials = 600;
    config.eval_every = 100;
    let curves = run_hybrid_study(&config, Backend::Gaussian)?;
    print!("trials");
    for c in &curves {
        print!("  {:>8}", c.policy.kind.name());
    }
    println!();
    for i in 0..curves[0].points.len() {
        print!("{:>6}", curves[0].points[i].trial);
        for c in &curves {
            print!("  {:>8.4}", c.points[i].mean_error);
        }
        println!();
    }
    Ok(())
}
