//! Static bandit trees with per-node trial statistics and cached beliefs.
//!
//! Nodes are stored densely in breadth-first order, so the children of a
//! node occupy a contiguous id range and every child id is larger than its
//! parent's. Interior beliefs are recomputed from the cached beliefs of all
//! children; a trial only marks its path stale, and [`BanditTree::refresh_beliefs`]
//! brings stale nodes up to date bottom-up.

use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::belief::{BetaPosterior, GaussianBelief, Grid, GridBelief};
use crate::error::{Error, Result};
use crate::extremum::{
    combine_gaussian, combine_grid, Combiner, Exact, Extremum, FunctionMode, LookupTables,
};
use crate::seed::mix_seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub const ROOT: NodeId = NodeId(0);

    pub fn index(self) -> usize {
        self.0
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Max,
    Min,
    Leaf,
}

impl NodeKind {
    pub fn extremum(self) -> Option<Extremum> {
        match self {
            NodeKind::Max => Some(Extremum::Max),
            NodeKind::Min => Some(Extremum::Min),
            NodeKind::Leaf => None,
        }
    }

    fn label(self) -> &'static str {
        match self {
            NodeKind::Max => "MAX",
            NodeKind::Min => "MIN",
            NodeKind::Leaf => "LEAF",
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    kind: NodeKind,
    parent: Option<NodeId>,
    children: Range<usize>,
    depth: usize,
    payoff: Option<f64>,
}

/// Trial statistics and cached beliefs of one node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeStats {
    pub n: u64,
    pub reward_sum: f64,
    /// Present on leaves only.
    pub leaf_posterior: Option<BetaPosterior>,
    pub gaussian: GaussianBelief,
    /// Present when the tree tracks numeric beliefs.
    pub grid: Option<GridBelief>,
    /// Trapezoid mean and standard deviation of `grid`.
    pub grid_moments: Option<(f64, f64)>,
}

impl NodeStats {
    /// `reward_sum / n`, or `None` before the first visit.
    pub fn mean_reward(&self) -> Option<f64> {
        (self.n > 0).then(|| self.reward_sum / self.n as f64)
    }
}

/// How beliefs are represented and propagated.
#[derive(Debug, Clone)]
pub struct BeliefConfig {
    pub prior: BetaPosterior,
    /// Grid for numeric beliefs; `None` keeps Gaussian beliefs only.
    pub grid: Option<Arc<Grid>>,
    pub functions: FunctionMode,
    pub combiner: Combiner,
    pub rho: f64,
    /// Refresh beliefs after every trial even when the policy does not read them.
    pub eager: bool,
    /// Mixed into the seeds of random-order combining.
    pub salt: u64,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        Self {
            prior: BetaPosterior::uniform(),
            grid: None,
            functions: FunctionMode::Tables,
            combiner: Combiner::RandomOrder,
            rho: 0.0,
            eager: false,
            salt: 0,
        }
    }
}

impl BeliefConfig {
    pub fn with_grid(mut self, grid: Arc<Grid>) -> Self {
        self.grid = Some(grid);
        self
    }
}

/// Nested description of a tree, used to build small trees by hand.
#[derive(Debug, Clone, PartialEq)]
pub enum TreeShape {
    Leaf(f64),
    Node(Vec<TreeShape>),
}

impl TreeShape {
    pub fn leaves(payoffs: &[f64]) -> Vec<TreeShape> {
        payoffs.iter().map(|&p| TreeShape::Leaf(p)).collect()
    }
}

/// Root-to-leaf node sequence of one trial and its Bernoulli reward.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trial {
    pub path: Vec<NodeId>,
    pub reward: bool,
}

/// Inputs to the selection bounds for one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub mu: f64,
    pub sigma: f64,
    pub n: u64,
    pub parent_n: u64,
    pub mean_reward: Option<f64>,
}

/// Which cached belief supplies means and spreads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Gaussian,
    Numeric,
}

#[derive(Debug, Clone)]
pub struct BanditTree {
    nodes: Vec<Node>,
    stats: Vec<NodeStats>,
    true_values: Vec<f64>,
    config: BeliefConfig,
    stale: Vec<bool>,
    stale_list: Vec<usize>,
}

impl BanditTree {
    /// Builds a tree from per-node child counts in breadth-first order
    /// (0 marks a leaf) and leaf payoff rates in leaf id order.
    pub fn from_bfs(child_counts: &[usize], payoffs: &[f64], config: BeliefConfig) -> Result<Self> {
        if child_counts.first().copied().unwrap_or(0) == 0 {
            return Err(Error::InvalidSpec(
                "root must have at least one child".into(),
            ));
        }
        if !(-1.0..=1.0).contains(&config.rho) {
            return Err(Error::InvalidCorrelation(config.rho));
        }
        let mut nodes = Vec::with_capacity(child_counts.len());
        nodes.push(Node {
            kind: NodeKind::Max,
            parent: None,
            children: 0..0,
            depth: 0,
            payoff: None,
        });
        let mut next_id = 1;
        let mut leaf_payoffs = payoffs.iter();
        for (id, &count) in child_counts.iter().enumerate() {
            if id >= nodes.len() {
                return Err(Error::InvalidSpec("child counts describe a forest".into()));
            }
            if count == 0 {
                let p = *leaf_payoffs
                    .next()
                    .ok_or_else(|| Error::InvalidSpec("too few leaf payoffs".into()))?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidSpec(format!("payoff {p} outside [0, 1]")));
                }
                nodes[id].kind = NodeKind::Leaf;
                nodes[id].payoff = Some(p);
                continue;
            }
            let depth = nodes[id].depth;
            nodes[id].kind = if depth % 2 == 0 {
                NodeKind::Max
            } else {
                NodeKind::Min
            };
            nodes[id].children = next_id..next_id + count;
            for _ in 0..count {
                nodes.push(Node {
                    kind: NodeKind::Leaf,
                    parent: Some(NodeId(id)),
                    children: 0..0,
                    depth: depth + 1,
                    payoff: None,
                });
            }
            next_id += count;
        }
        if nodes.len() != child_counts.len() {
            return Err(Error::InvalidSpec(format!(
                "child counts declare {} nodes but list {}",
                nodes.len(),
                child_counts.len()
            )));
        }
        if leaf_payoffs.next().is_some() {
            return Err(Error::InvalidSpec("too many leaf payoffs".into()));
        }

        let stats = nodes
            .iter()
            .map(|node| NodeStats {
                n: 0,
                reward_sum: 0.0,
                leaf_posterior: (node.kind == NodeKind::Leaf).then_some(config.prior),
                gaussian: config.prior.to_gaussian(),
                grid: None,
                grid_moments: None,
            })
            .collect();
        let len = nodes.len();
        let mut tree = Self {
            nodes,
            stats,
            true_values: vec![0.0; len],
            config,
            stale: vec![false; len],
            stale_list: Vec::new(),
        };
        tree.true_values = tree.compute_true_values();
        tree.recompute_all()?;
        Ok(tree)
    }

    pub fn from_shape(shape: &TreeShape, config: BeliefConfig) -> Result<Self> {
        let TreeShape::Node(_) = shape else {
            return Err(Error::InvalidSpec("root must be an interior node".into()));
        };
        let mut counts = Vec::new();
        let mut payoffs = Vec::new();
        let mut queue = std::collections::VecDeque::from([shape]);
        while let Some(s) = queue.pop_front() {
            match s {
                TreeShape::Leaf(p) => {
                    counts.push(0);
                    payoffs.push(*p);
                }
                TreeShape::Node(children) => {
                    if children.is_empty() {
                        return Err(Error::InvalidSpec("interior node without children".into()));
                    }
                    counts.push(children.len());
                    queue.extend(children.iter());
                }
            }
        }
        Self::from_bfs(&counts, &payoffs, config)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn config(&self) -> &BeliefConfig {
        &self.config
    }

    /// Keep beliefs current after every trial.
    pub fn set_eager(&mut self, eager: bool) {
        self.config.eager = eager;
    }

    pub fn root(&self) -> NodeId {
        NodeId::ROOT
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn kind(&self, id: NodeId) -> NodeKind {
        self.nodes[id.0].kind
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.nodes[id.0].parent
    }

    pub fn depth(&self, id: NodeId) -> usize {
        self.nodes[id.0].depth
    }

    pub fn children(&self, id: NodeId) -> impl ExactSizeIterator<Item = NodeId> + Clone {
        self.nodes[id.0].children.clone().map(NodeId)
    }

    pub fn child_count(&self, id: NodeId) -> usize {
        self.nodes[id.0].children.len()
    }

    pub fn payoff(&self, id: NodeId) -> Option<f64> {
        self.nodes[id.0].payoff
    }

    pub fn leaves(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids().filter(|&id| self.kind(id) == NodeKind::Leaf)
    }

    pub fn stats(&self, id: NodeId) -> &NodeStats {
        &self.stats[id.0]
    }

    /// True minimax value of every node, indexed by id.
    pub fn true_values(&self) -> &[f64] {
        &self.true_values
    }

    pub fn true_value(&self, id: NodeId) -> f64 {
        self.true_values[id.0]
    }

    fn compute_true_values(&self) -> Vec<f64> {
        let mut values = vec![0.0; self.nodes.len()];
        for id in (0..self.nodes.len()).rev() {
            let node = &self.nodes[id];
            values[id] = match node.kind {
                NodeKind::Leaf => node.payoff.expect("leaves carry payoffs"),
                NodeKind::Max => values[node.children.clone()]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max),
                NodeKind::Min => values[node.children.clone()]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min),
            };
        }
        values
    }

    /// Bernoulli draw from a leaf's payoff rate.
    pub fn sample_leaf<R: Rng + ?Sized>(&self, leaf: NodeId, rng: &mut R) -> Result<bool> {
        let p = self.nodes[leaf.0].payoff.ok_or(Error::NotALeaf(leaf.0))?;
        Ok(rng.random::<f64>() < p)
    }

    fn validate_path(&self, path: &[NodeId]) -> Result<()> {
        let (first, last) = match (path.first(), path.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(Error::MalformedPath("empty path")),
        };
        if first != NodeId::ROOT {
            return Err(Error::MalformedPath("path does not start at the root"));
        }
        if last.0 >= self.nodes.len() || self.kind(last) != NodeKind::Leaf {
            return Err(Error::MalformedPath("path does not end at a leaf"));
        }
        for pair in path.windows(2) {
            if pair[1].0 >= self.nodes.len() || self.parent(pair[1]) != Some(pair[0]) {
                return Err(Error::MalformedPath(
                    "consecutive nodes are not parent and child",
                ));
            }
        }
        Ok(())
    }

    /// Adds one trial outcome to the counts of every node on `path`.
    ///
    /// The leaf posterior is updated as well, but interior beliefs are only
    /// marked stale.
    pub fn backprop_uct(&mut self, path: &[NodeId], reward: bool) -> Result<()> {
        self.validate_path(path)?;
        let r = if reward { 1.0 } else { 0.0 };
        for &id in path {
            let s = &mut self.stats[id.0];
            s.n += 1;
            s.reward_sum += r;
            if !self.stale[id.0] {
                self.stale[id.0] = true;
                self.stale_list.push(id.0);
            }
        }
        let leaf = path[path.len() - 1];
        if let Some(post) = self.stats[leaf.0].leaf_posterior.as_mut() {
            post.update(reward);
        }
        Ok(())
    }

    /// [`backprop_uct`](Self::backprop_uct) followed by a belief refresh.
    pub fn backprop_bayes(&mut self, path: &[NodeId], reward: bool) -> Result<()> {
        self.backprop_uct(path, reward)?;
        self.refresh_beliefs()
    }

    pub fn has_stale_beliefs(&self) -> bool {
        !self.stale_list.is_empty()
    }

    /// Recomputes every stale belief, children before parents.
    pub fn refresh_beliefs(&mut self) -> Result<()> {
        if self.stale_list.is_empty() {
            return Ok(());
        }
        let mut pending = std::mem::take(&mut self.stale_list);
        pending.sort_unstable_by(|a, b| b.cmp(a));
        for &id in &pending {
            self.recompute_node(id)?;
            self.stale[id] = false;
        }
        pending.clear();
        self.stale_list = pending;
        Ok(())
    }

    /// Recomputes every belief from the leaf counts up.
    pub fn recompute_all(&mut self) -> Result<()> {
        for id in (0..self.nodes.len()).rev() {
            self.recompute_node(id)?;
            self.stale[id] = false;
        }
        self.stale_list.clear();
        Ok(())
    }

    fn recompute_node(&mut self, id: usize) -> Result<()> {
        let node = &self.nodes[id];
        let (gaussian, grid) = match node.kind.extremum() {
            None => {
                let post = self.stats[id]
                    .leaf_posterior
                    .expect("leaves carry posteriors");
                let grid = self.config.grid.as_ref().map(|g| post.to_grid(g));
                (post.to_gaussian(), grid)
            }
            Some(extremum) => {
                let children = &self.stats[node.children.clone()];
                let gaussians: Vec<GaussianBelief> = children.iter().map(|s| s.gaussian).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(
                    self.config.salt,
                    id as u64,
                    self.stats[id].n,
                ));
                let gaussian = match self.config.functions {
                    FunctionMode::Exact => combine_gaussian(
                        extremum,
                        &gaussians,
                        self.config.rho,
                        self.config.combiner,
                        &Exact,
                        &mut rng,
                    )?,
                    FunctionMode::Tables => combine_gaussian(
                        extremum,
                        &gaussians,
                        self.config.rho,
                        self.config.combiner,
                        LookupTables::shared(),
                        &mut rng,
                    )?,
                };
                let grid = if self.config.grid.is_some() {
                    let grids: Vec<&GridBelief> = children
                        .iter()
                        .map(|s| s.grid.as_ref().expect("children refreshed first"))
                        .collect();
                    Some(combine_grid(extremum, &grids)?)
                } else {
                    None
                };
                (gaussian, grid)
            }
        };
        let s = &mut self.stats[id];
        s.gaussian = gaussian;
        s.grid_moments = grid.as_ref().map(|g| {
            let (m, v) = g.moments();
            (m, v.max(0.0).sqrt())
        });
        s.grid = grid;
        Ok(())
    }

    /// Mean and standard deviation of a node's belief under `backend`.
    ///
    /// Falls back to the Gaussian belief when no grid is tracked.
    pub fn belief_moments(&self, id: NodeId, backend: Backend) -> (f64, f64) {
        let s = &self.stats[id.0];
        match (backend, s.grid_moments) {
            (Backend::Numeric, Some(m)) => m,
            _ => (s.gaussian.mu, s.gaussian.sigma),
        }
    }

    pub fn node_bound_inputs(&self, id: NodeId, backend: Backend) -> BoundInputs {
        let (mu, sigma) = self.belief_moments(id, backend);
        let s = &self.stats[id.0];
        let parent_n = self.parent(id).map_or(s.n, |p| self.stats[p.0].n);
        BoundInputs {
            mu,
            sigma,
            n: s.n,
            parent_n,
            mean_reward: s.mean_reward(),
        }
    }

    /// One line per node: `id kind depth parent p n reward_sum mu sigma`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for id in self.ids() {
            let node = &self.nodes[id.0];
            let s = &self.stats[id.0];
            let parent = node
                .parent
                .map_or_else(|| "-".to_string(), |p| p.to_string());
            let p = node
                .payoff
                .map_or_else(|| "-".to_string(), |p| format!("{p:.6}"));
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {} {:.6} {:.6}",
                id,
                node.kind.label(),
                node.depth,
                parent,
                p,
                s.n,
                s.reward_sum,
                s.gaussian.mu,
                s.gaussian.sigma
            );
        }
        out
    }
}
