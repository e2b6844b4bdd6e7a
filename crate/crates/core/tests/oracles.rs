//! Independent numerical oracles and property tests for the belief algebra.

use bayes_mcts::belief::{BetaPosterior, GaussianBelief, Grid, GridBelief};
use bayes_mcts::extremum::{
    clark_max_moments_direct, clark_max_pair, clark_min_pair, combine_grid, combine_max_min_error,
    combine_max_random_order, grid_max, Exact, Extremum, LookupTables,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mean and variance of max(X, Y) for independent normals by brute-force
/// midpoint integration of the density of the max: f_X F_Y + f_Y F_X.
fn oracle_max(a: &GaussianBelief, b: &GaussianBelief) -> (f64, f64) {
    fn pdf(x: f64, g: &GaussianBelief) -> f64 {
        let z = (x - g.mu) / g.sigma;
        (-0.5 * z * z).exp() / (g.sigma * (2.0 * std::f64::consts::PI).sqrt())
    }
    let lo = (a.mu - 12.0 * a.sigma).min(b.mu - 12.0 * b.sigma);
    let hi = (a.mu + 12.0 * a.sigma).max(b.mu + 12.0 * b.sigma);
    let steps = 200_000;
    let h = (hi - lo) / steps as f64;
    // running CDFs by midpoint accumulation
    let (mut fa, mut fb) = (0.0, 0.0);
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for k in 0..steps {
        let x = lo + (k as f64 + 0.5) * h;
        let (pa, pb) = (pdf(x, a), pdf(x, b));
        let ca = fa + 0.5 * pa * h;
        let cb = fb + 0.5 * pb * h;
        let d = (pa * cb + pb * ca) * h;
        m0 += d;
        m1 += x * d;
        m2 += x * x * d;
        fa += pa * h;
        fb += pb * h;
    }
    let mean = m1 / m0;
    (mean, m2 / m0 - mean * mean)
}

#[test]
fn clark_matches_brute_force_integration() {
    let cases = [
        (0.0, 1.0, 0.0, 1.0),
        (0.3, 0.1, 0.5, 0.2),
        (2.0, 0.5, -1.0, 3.0),
        (0.5, 0.05, 0.49, 0.05),
        (-1.0, 2.0, 1.0, 0.25),
    ];
    for (m1, s1, m2, s2) in cases {
        let (a, b) = (GaussianBelief::new(m1, s1), GaussianBelief::new(m2, s2));
        let (om, ov) = oracle_max(&a, &b);
        let exact = clark_max_pair(&a, &b, 0.0, &Exact).unwrap();
        let tables = clark_max_pair(&a, &b, 0.0, LookupTables::shared()).unwrap();
        assert!(
            (exact.mu - om).abs() < 1e-6,
            "{m1} {s1} {m2} {s2}: {} vs {om}",
            exact.mu
        );
        assert!((exact.variance() - ov).abs() / ov < 1e-5);
        assert!((tables.mu - om).abs() < 1e-4);
        assert!((tables.variance() - ov).abs() / ov < 1e-3);
    }
}

#[test]
fn iid_standard_normals() {
    // E[max] = 1/sqrt(pi), Var = 1 - 1/pi
    let z = GaussianBelief::new(0.0, 1.0);
    let m = clark_max_pair(&z, &z, 0.0, &Exact).unwrap();
    assert!((m.mu - 0.564_189_583_547_756_3).abs() < 1e-12);
    assert!((m.variance() - 0.681_690_113_816_209_4).abs() < 1e-12);
}

#[test]
fn perfect_correlation_is_degenerate() {
    let a = GaussianBelief::new(0.6, 0.2);
    let b = GaussianBelief::new(0.4, 0.2);
    let m = clark_max_pair(&a, &b, 1.0, &Exact).unwrap();
    assert_eq!(m, a);
    assert!(clark_max_pair(&a, &b, 1.5, &Exact).is_err());
}

fn gaussian() -> impl Strategy<Value = GaussianBelief> {
    (-3.0..3.0f64, 0.01..2.0f64).prop_map(|(mu, sigma)| GaussianBelief::new(mu, sigma))
}

fn beta() -> impl Strategy<Value = BetaPosterior> {
    (1u64..60, 1u64..60).prop_map(|(a, b)| BetaPosterior::new(a as f64, b as f64).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn max_is_symmetric(a in gaussian(), b in gaussian()) {
        let ab = clark_max_pair(&a, &b, 0.0, &Exact).unwrap();
        let ba = clark_max_pair(&b, &a, 0.0, &Exact).unwrap();
        prop_assert!((ab.mu - ba.mu).abs() < 1e-9);
        prop_assert!((ab.sigma - ba.sigma).abs() < 1e-9);
    }

    #[test]
    fn max_dominates_both_means(a in gaussian(), b in gaussian()) {
        let m = clark_max_pair(&a, &b, 0.0, LookupTables::shared()).unwrap();
        prop_assert!(m.mu >= a.mu.max(b.mu) - 1e-6);
        prop_assert!(m.sigma >= 0.0);
    }

    #[test]
    fn max_mean_monotone_in_inputs(a in gaussian(), b in gaussian(), shift in 0.0..1.0f64) {
        let base = clark_max_pair(&a, &b, 0.0, &Exact).unwrap();
        let up = GaussianBelief::new(a.mu + shift, a.sigma);
        let moved = clark_max_pair(&up, &b, 0.0, &Exact).unwrap();
        prop_assert!(moved.mu >= base.mu - 1e-12);
    }

    #[test]
    fn restructured_form_matches_direct(a in gaussian(), b in gaussian()) {
        let m = clark_max_pair(&a, &b, 0.0, &Exact).unwrap();
        let (mean, var) = clark_max_moments_direct(&a, &b, 0.0).unwrap();
        prop_assert!((m.mu - mean).abs() < 1e-9);
        prop_assert!((m.variance() - var).abs() < 1e-9 * (1.0 + var));
    }

    #[test]
    fn min_is_negated_max(a in gaussian(), b in gaussian()) {
        let min = clark_min_pair(&a, &b, 0.0, &Exact).unwrap();
        let na = GaussianBelief::new(-a.mu, a.sigma);
        let nb = GaussianBelief::new(-b.mu, b.sigma);
        let max = clark_max_pair(&na, &nb, 0.0, &Exact).unwrap();
        prop_assert!((min.mu + max.mu).abs() < 1e-12);
        prop_assert!((min.sigma - max.sigma).abs() < 1e-12);
    }

    #[test]
    fn vanishing_variance_tends_to_larger_mean(m1 in 0.0..1.0f64, m2 in 0.0..1.0f64) {
        prop_assume!((m1 - m2).abs() > 1e-3);
        let a = GaussianBelief::new(m1, 1e-7);
        let b = GaussianBelief::new(m2, 1e-7);
        let m = clark_max_pair(&a, &b, 0.0, LookupTables::shared()).unwrap();
        prop_assert!((m.mu - m1.max(m2)).abs() < 1e-6);
        prop_assert!(m.sigma < 1e-6);
    }

    #[test]
    fn grid_max_is_order_free(a in beta(), b in beta(), c in beta()) {
        let grid = Grid::new(400).unwrap();
        let (ga, gb, gc) = (a.to_grid(&grid), b.to_grid(&grid), c.to_grid(&grid));
        let x = grid_max(&[&ga, &gb, &gc]).unwrap();
        let y = grid_max(&[&gc, &ga, &gb]).unwrap();
        for (p, q) in x.pdf().iter().zip(y.pdf()) {
            prop_assert!((p - q).abs() < 1e-9 * (1.0 + p.abs()));
        }
    }

    #[test]
    fn grid_cdf_is_monotone_and_normalized(a in beta(), b in beta()) {
        let grid = Grid::new(500).unwrap();
        for ext in [Extremum::Max, Extremum::Min] {
            let g = combine_grid(ext, &[&a.to_grid(&grid), &b.to_grid(&grid)]).unwrap();
            let cdf = g.cdf();
            prop_assert!(cdf.windows(2).all(|w| w[1] >= w[0] - 1e-12));
            prop_assert!((cdf[cdf.len() - 1] - 1.0).abs() < 1e-9);
            prop_assert!(g.pdf().iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn grid_min_max_reflection(a in beta(), b in beta()) {
        // min(X, Y) on [0,1] is 1 - max(1-X, 1-Y)
        let grid = Grid::new(500).unwrap();
        let (ga, gb) = (a.to_grid(&grid), b.to_grid(&grid));
        let min = combine_grid(Extremum::Min, &[&ga, &gb]).unwrap();
        let max = combine_grid(Extremum::Max, &[&ga.reflected(), &gb.reflected()]).unwrap();
        prop_assert!((min.mean() - (1.0 - max.mean())).abs() < 1e-9);
    }

    #[test]
    fn gaussian_and_grid_agree_for_one_posterior(a in beta()) {
        let grid = Grid::new(1000).unwrap();
        let (gm, gv) = a.to_grid(&grid).moments();
        let (m, v) = a.moments();
        prop_assert!((gm - m).abs() < 1e-4);
        prop_assert!((gv - v).abs() < 1e-4);
        let g = a.to_gaussian();
        prop_assert!((g.mu - m).abs() < 1e-15 && (g.variance() - v).abs() < 1e-15);
    }
}

/// Max of independent Beta posteriors by brute-force Monte Carlo.
fn monte_carlo_max_mean(posts: &[BetaPosterior], draws: usize, seed: u64) -> f64 {
    use rand_distr::{Beta, Distribution};
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dists: Vec<_> = posts
        .iter()
        .map(|p| Beta::new(p.alpha(), p.beta()).unwrap())
        .collect();
    (0..draws)
        .map(|_| dists.iter().map(|d| d.sample(&mut rng)).fold(0.0, f64::max))
        .sum::<f64>()
        / draws as f64
}

#[test]
fn grid_max_matches_monte_carlo() {
    let posts = [
        BetaPosterior::new(3.0, 7.0).unwrap(),
        BetaPosterior::new(5.0, 5.0).unwrap(),
        BetaPosterior::new(12.0, 20.0).unwrap(),
    ];
    let grid = Grid::new(1000).unwrap();
    let beliefs: Vec<GridBelief> = posts.iter().map(|p| p.to_grid(&grid)).collect();
    let refs: Vec<&GridBelief> = beliefs.iter().collect();
    let numeric = grid_max(&refs).unwrap().mean();
    let mc = monte_carlo_max_mean(&posts, 400_000, 5);
    // MC standard error is about 2e-4
    assert!((numeric - mc).abs() < 1.5e-3, "{numeric} vs {mc}");
}

#[test]
fn grid_cdf_error_is_second_order() {
    // Beta(3,2) has CDF 4x^3 - 3x^4
    let err = |g: usize| {
        let grid = Grid::new(g).unwrap();
        let b = BetaPosterior::new(3.0, 2.0).unwrap().to_grid(&grid);
        b.cdf()
            .iter()
            .zip(grid.points())
            .map(|(c, x)| (c - (4.0 * x.powi(3) - 3.0 * x.powi(4))).abs())
            .fold(0.0, f64::max)
    };
    let (coarse, fine) = (err(250), err(1000));
    assert!(coarse / fine > 10.0, "{coarse} / {fine}");
}

#[test]
fn random_order_and_min_error_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut diffs: Vec<f64> = (0..1000)
        .map(|_| {
            let children: Vec<GaussianBelief> = (0..5)
                .map(|_| {
                    let mu = rand::Rng::random_range(&mut rng, 0.0..1.0);
                    let sigma = rand::Rng::random_range(&mut rng, 0.01..0.3);
                    GaussianBelief::new(mu, sigma)
                })
                .collect();
            let tables = LookupTables::shared();
            let random = combine_max_random_order(&children, 0.0, tables, &mut rng).unwrap();
            let greedy = combine_max_min_error(&children, 0.0, tables).unwrap();
            (random.mu - greedy.mu).abs()
        })
        .collect();
    diffs.sort_by(f64::total_cmp);
    let p99 = diffs[990];
    assert!(p99 <= 0.02, "99th percentile {p99}");
}
