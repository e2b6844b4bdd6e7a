//! Sampling policies and the greedy root decision.
//!
//! Bounds are always written for the player to move. At MIN nodes the value
//! term is mirrored to `1 - value`, so maximizing the mirrored bound is the
//! same as minimizing `value - exploration`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::tree::{Backend, BanditTree, NodeId, NodeKind, Trial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Uct,
    BayesUct1,
    BayesUct2,
    UniformRandom,
    /// Samples like UCT, answers with posterior means.
    Hybrid,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Uct,
        PolicyKind::BayesUct1,
        PolicyKind::BayesUct2,
        PolicyKind::UniformRandom,
        PolicyKind::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Uct => "uct",
            PolicyKind::BayesUct1 => "bayes1",
            PolicyKind::BayesUct2 => "bayes2",
            PolicyKind::UniformRandom => "random",
            PolicyKind::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown algorithm '{s}'")))
    }
}

/// A policy kind together with the belief backend it reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Policy {
    pub kind: PolicyKind,
    pub backend: Backend,
}

impl Policy {
    pub const UCT: Policy = Policy {
        kind: PolicyKind::Uct,
        backend: Backend::Gaussian,
    };

    pub fn new(kind: PolicyKind, backend: Backend) -> Self {
        Self { kind, backend }
    }

    /// Whether selection reads beliefs, so they must be refreshed every trial.
    pub fn samples_with_beliefs(&self) -> bool {
        matches!(self.kind, PolicyKind::BayesUct1 | PolicyKind::BayesUct2)
    }

    /// Whether the root decision uses posterior means rather than average rewards.
    pub fn answers_with_beliefs(&self) -> bool {
        self.kind != PolicyKind::Uct
    }

    /// Backend label for reports; `none` when beliefs are never read.
    pub fn backend_label(&self) -> &'static str {
        if !self.answers_with_beliefs() {
            return "none";
        }
        match self.backend {
            Backend::Gaussian => "gaussian",
            Backend::Numeric => "numeric",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind, self.backend_label())
    }
}

#[inline]
fn ln_visits(parent_n: u64) -> f64 {
    (parent_n.max(1) as f64).ln()
}

/// UCB1: `mean + sqrt(2 ln N / n)`, infinite for unvisited arms.
pub fn ucb1_bound(mean_reward: f64, n: u64, parent_n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    mean_reward + (2.0 * ln_visits(parent_n) / n as f64).sqrt()
}

/// UCB1 with the average reward replaced by the posterior mean.
pub fn bayes_uct1_bound(mu: f64, n: u64, parent_n: u64) -> f64 {
    ucb1_bound(mu, n, parent_n)
}

/// `mu + sqrt(2 ln N) sigma`.
pub fn bayes_uct2_bound(mu: f64, sigma: f64, parent_n: u64) -> f64 {
    mu + (2.0 * ln_visits(parent_n)).sqrt() * sigma
}

fn player_bound(tree: &BanditTree, child: NodeId, policy: &Policy, mover: NodeKind) -> f64 {
    let inputs = tree.node_bound_inputs(child, policy.backend);
    let mirror = |v: f64| if mover == NodeKind::Min { 1.0 - v } else { v };
    match policy.kind {
        PolicyKind::Uct | PolicyKind::Hybrid => ucb1_bound(
            mirror(inputs.mean_reward.unwrap_or(0.0)),
            inputs.n,
            inputs.parent_n,
        ),
        PolicyKind::BayesUct1 => bayes_uct1_bound(mirror(inputs.mu), inputs.n, inputs.parent_n),
        PolicyKind::BayesUct2 => bayes_uct2_bound(mirror(inputs.mu), inputs.sigma, inputs.parent_n),
        PolicyKind::UniformRandom => 0.0,
    }
}

/// Index of a maximal score, ties broken uniformly at random.
pub fn argmax_random_tie<R: Rng + ?Sized>(
    scores: impl IntoIterator<Item = f64>,
    rng: &mut R,
) -> Option<usize> {
    let mut best = None;
    let mut best_score = f64::NEG_INFINITY;
    let mut ties = 0u32;
    for (i, s) in scores.into_iter().enumerate() {
        if best.is_none() || s > best_score {
            best = Some(i);
            best_score = s;
            ties = 1;
        } else if s == best_score {
            ties += 1;
            if rng.random_range(0..ties) == 0 {
                best = Some(i);
            }
        }
    }
    best
}

/// Picks the child of `node` with the best bound for the player to move.
pub fn select_child<R: Rng + ?Sized>(
    tree: &BanditTree,
    node: NodeId,
    policy: &Policy,
    rng: &mut R,
) -> Result<NodeId> {
    let mover = tree.kind(node);
    if mover == NodeKind::Leaf {
        return Err(Error::IsLeaf(node.0));
    }
    let mut children = tree.children(node);
    if policy.kind == PolicyKind::UniformRandom {
        let k = rng.random_range(0..children.len());
        return Ok(children.nth(k).expect("k is in range"));
    }
    let idx = argmax_random_tie(
        children
            .clone()
            .map(|c| player_bound(tree, c, policy, mover)),
        rng,
    )
    .expect("interior nodes have children");
    Ok(children.nth(idx).expect("idx is in range"))
}

/// Descends from the root to a leaf, samples it and backs the result up.
pub fn run_trial<R: Rng + ?Sized>(
    tree: &mut BanditTree,
    policy: &Policy,
    rng: &mut R,
) -> Result<Trial> {
    let mut path = vec![tree.root()];
    let mut node = tree.root();
    while tree.kind(node) != NodeKind::Leaf {
        node = select_child(tree, node, policy, rng)?;
        path.push(node);
    }
    let reward = tree.sample_leaf(node, rng)?;
    if policy.samples_with_beliefs() || tree.config().eager {
        tree.backprop_bayes(&path, reward)?;
    } else {
        tree.backprop_uct(&path, reward)?;
    }
    Ok(Trial { path, reward })
}

/// The root move with the highest estimated value, ties to the lowest id.
///
/// UCT ranks by average reward and ignores unvisited children unless none
/// has been visited. Other policies rank by posterior mean.
pub fn greedy_root_choice(tree: &mut BanditTree, policy: &Policy) -> Result<NodeId> {
    let root = tree.root();
    if policy.answers_with_beliefs() {
        tree.refresh_beliefs()?;
    }
    let mut best: Option<(NodeId, f64)> = None;
    for child in tree.children(root) {
        let value = if policy.answers_with_beliefs() {
            Some(tree.belief_moments(child, policy.backend).0)
        } else {
            tree.stats(child).mean_reward()
        };
        if let Some(v) = value {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((child, v));
            }
        }
    }
    Ok(best.map_or_else(
        || tree.children(root).next().expect("root has children"),
        |(id, _)| id,
    ))
}
