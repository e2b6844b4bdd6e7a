//! Moments of the max and min of Gaussian beliefs, pairwise and K-way.

use bayes_mcts::belief::{BetaPosterior, GaussianBelief, Grid};
use bayes_mcts::extremum::{
    clark_max_pair, clark_min_pair, combine_gaussian, combine_grid, Combiner, Exact, Extremum,
    LookupTables,
};
use rand::SeedableRng;

fn main() -> bayes_mcts::Result<()> {
    let a = GaussianBelief::new(0.0, 1.0);
    let b = GaussianBelief::new(0.0, 1.0);
    let max = clark_max_pair(&a, &b, 0.0, &Exact)?;
    println!("max of two N(0,1): mean {:.6} sd {:.6}", max.mu, max.sigma);

    let a = GaussianBelief::new(0.6, 0.1);
    let b = GaussianBelief::new(0.5, 0.3);
    let tables = LookupTables::shared();
    for rho in [-0.5, 0.0, 0.5] {
        let hi = clark_max_pair(&a, &b, rho, tables)?;
        let lo = clark_min_pair(&a, &b, rho, tables)?;
        println!(
            "rho {rho:+.1}: max {:.4} +- {:.4}, min {:.4} +- {:.4}",
            hi.mu, hi.sigma, lo.mu, lo.sigma
        );
    }

    // K-way max of beta posteriors: Gaussian folding against the grid
    let posts = [(3.0, 5.0), (8.0, 6.0), (2.0, 2.0), (20.0, 18.0), (1.0, 4.0)]
        .map(|(a, b)| BetaPosterior::new(a, b).expect("positive parameters"));
    let gaussians: Vec<_> = posts.iter().map(BetaPosterior::to_gaussian).collect();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let grid = Grid::new(1000)?;
    let grids: Vec<_> = posts.iter().map(|p| p.to_grid(&grid)).collect();
    let refs: Vec<_> = grids.iter().collect();
    let numeric = combine_grid(Extremum::Max, &refs)?;
    for combiner in [Combiner::RandomOrder, Combiner::MinError] {
        let g = combine_gaussian(Extremum::Max, &gaussians, 0.0, combiner, tables, &mut rng)?;
        println!("{combiner:?}: mean {:.5} sd {:.5}", g.mu, g.sigma);
    }
    let (m, v) = numeric.moments();
    println!("grid: mean {m:.5} sd {:.5}", v.sqrt());
    Ok(())
}
