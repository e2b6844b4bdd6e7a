//! Bayesian Monte-Carlo tree search on static bandit trees.
//!
//! Leaves are Bernoulli bandit arms with conjugate beta posteriors. Interior
//! nodes of the alternating MAX/MIN tree hold the distribution of the
//! extremum of their children, propagated either as moment-matched Gaussians
//! (Clark's pairwise formulas, optionally table-accelerated) or exactly on a
//! grid over `[0, 1]`. Sampling uses UCT or its Bayesian analogues, which
//! replace the average reward by the posterior mean and, for Bayes-UCT2, the
//! `1/sqrt(n)` exploration factor by the posterior standard deviation.
//!
//! The [`experiments`] module generates random bandit trees and measures
//! greedy decision error, trials to a target error, estimation accuracy and
//! throughput over paired tree sets.
//!
//! ```
//! use bayes_mcts::{
//!     policy::{greedy_root_choice, run_trial, Policy, PolicyKind},
//!     tree::{Backend, BanditTree, BeliefConfig, TreeShape},
//! };
//! use rand::SeedableRng;
//!
//! let shape = TreeShape::Node(vec![
//!     TreeShape::Node(TreeShape::leaves(&[0.9, 0.1])),
//!     TreeShape::Node(TreeShape::leaves(&[0.6, 0.5])),
//! ]);
//! let mut tree = BanditTree::from_shape(&shape, BeliefConfig::default()).unwrap();
//! let policy = Policy::new(PolicyKind::BayesUct2, Backend::Gaussian);
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! for _ in 0..2000 {
//!     run_trial(&mut tree, &policy, &mut rng).unwrap();
//! }
//! let best = greedy_root_choice(&mut tree, &policy).unwrap();
//! assert_eq!(tree.true_value(best), tree.true_value(tree.root()));
//! ```

pub mod belief;
pub mod cli;
pub mod csv;
pub mod error;
pub mod experiments;
pub mod extremum;
pub mod policy;
pub mod seed;
pub mod selftest;
pub mod tree;

pub use belief::{BetaPosterior, GaussianBelief, Grid, GridBelief};
pub use error::{Error, Result};
pub use extremum::{Combiner, Extremum, FunctionMode, LookupTables};
pub use policy::{Policy, PolicyKind};
pub use tree::{Backend, BanditTree, BeliefConfig, NodeId, NodeKind, TreeShape};
