//! Searching one random bandit tree with every sampling policy.

use bayes_mcts::experiments::{generate_tree, PayoffModel, TreeSpec};
use bayes_mcts::policy::{greedy_root_choice, run_trial, Policy, PolicyKind};
use bayes_mcts::tree::{Backend, BeliefConfig};
use bayes_mcts::Grid;
use rand::SeedableRng;

fn main() -> bayes_mcts::Result<()> {
    let spec = TreeSpec::fixed(2, 5, PayoffModel::Uniform);
    let policies = [
        Policy::UCT,
        Policy::new(PolicyKind::BayesUct1, Backend::Gaussian),
        Policy::new(PolicyKind::BayesUct2, Backend::Gaussian),
        Policy::new(PolicyKind::BayesUct2, Backend::Numeric),
        Policy::new(PolicyKind::UniformRandom, Backend::Gaussian),
        Policy::new(PolicyKind::Hybrid, Backend::Gaussian),
    ];
    for policy in policies {
        let mut config = BeliefConfig::default();
        if policy.backend == Backend::Numeric {
            config = config.with_grid(Grid::new(1000)?);
        }
        let mut tree = generate_tree(&spec, 2024, config)?;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..500 {
            run_trial(&mut tree, &policy, &mut rng)?;
        }
        let choice = greedy_root_choice(&mut tree, &policy)?;
        let root = tree.root();
        println!(
            "{:<7} {:<8} picks {:?}: value {:.3}, best {:.3}, root belief {:.3}",
            policy.kind.name(),
            policy.backend_label(),
            choice,
            tree.true_value(choice),
            tree.true_value(root),
            tree.belief_moments(root, policy.backend).0,
        );
    }

    let mut tree = generate_tree(
        &TreeSpec::fixed(2, 2, PayoffModel::Uniform),
        1,
        BeliefConfig::default(),
    )?;
    let policy = Policy::new(PolicyKind::BayesUct2, Backend::Gaussian);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        run_trial(&mut tree, &policy, &mut rng)?;
    }
    print!("{}", tree.dump());
    Ok(())
}
