//! Numeric beliefs on a grid over [0, 1]: posteriors and their extrema.

use bayes_mcts::belief::{BetaPosterior, Grid, GridBelief};
use bayes_mcts::extremum::{grid_max, grid_min};

fn main() -> bayes_mcts::Result<()> {
    let grid = Grid::new(1000)?;
    let u = GridBelief::uniform(grid.clone());
    println!(
        "max of 2 uniforms: {:.5} (2/3)",
        grid_max(&[&u, &u])?.mean()
    );
    println!(
        "max of 3 uniforms: {:.5} (3/4)",
        grid_max(&[&u, &u, &u])?.mean()
    );
    println!(
        "min of 2 uniforms: {:.5} (1/3)",
        grid_min(&[&u, &u])?.mean()
    );

    // a leaf after 7 wins and 3 losses
    let post = BetaPosterior::uniform().observe(7, 3);
    let belief = post.to_grid(&grid);
    let (m, v) = belief.moments();
    let (em, ev) = post.moments();
    println!("Beta(8,4): grid {m:.6} / {v:.6}, closed form {em:.6} / {ev:.6}");

    let median = grid
        .points()
        .iter()
        .zip(belief.cdf())
        .find(|(_, &c)| c >= 0.5)
        .map(|(x, _)| *x)
        .unwrap_or(1.0);
    println!("median near {median:.3}");

    let rival = BetaPosterior::uniform().observe(30, 20).to_grid(&grid);
    let opponent = grid_min(&[&belief, &rival])?;
    println!("opponent picks the smaller: mean {:.4}", opponent.mean());
    Ok(())
}
