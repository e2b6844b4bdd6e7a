//! Long runs drive the root belief to the minimax value.

use bayes_mcts::experiments::converge_once;
use bayes_mcts::policy::{Policy, PolicyKind};
use bayes_mcts::tree::{Backend, BanditTree, BeliefConfig, TreeShape};
use bayes_mcts::Grid;

fn main() -> bayes_mcts::Result<()> {
    let shape = TreeShape::Node(vec![
        TreeShape::Node(TreeShape::leaves(&[0.2, 0.5, 0.8])),
        TreeShape::Node(TreeShape::leaves(&[0.4, 0.6, 0.9])),
        TreeShape::Node(TreeShape::leaves(&[0.1, 0.3, 0.7])),
    ]);
    let runs = [
        (Policy::new(PolicyKind::BayesUct2, Backend::Gaussian), false),
        (Policy::new(PolicyKind::BayesUct1, Backend::Gaussian), false),
        (
            Policy::new(PolicyKind::UniformRandom, Backend::Numeric),
            true,
        ),
    ];
    for (policy, numeric) in runs {
        for trials in [1_000, 10_000, 100_000] {
            let mut config = BeliefConfig::default();
            if numeric {
                config = config.with_grid(Grid::new(1000)?);
            }
            let tree = BanditTree::from_shape(&shape, config)?;
            let (mean, truth) = converge_once(tree, &policy, trials, 9)?;
            println!(
                "{:<7} {:<8} {trials:>6} trials: root {mean:.4} (true {truth})",
                policy.kind.name(),
                policy.backend_label()
            );
        }
    }
    Ok(())
}
