//! Viewpoint hierarchies: a DAG of viewpoints under the virtual top `ALL`,
//! weighted consensus, and validity propagation for the two variants.
//!
//! Arcs are stored top-down (aggregate → part). Under [`Variant::Wtah`] a
//! claim valid at a node is valid at every descendant; under
//! [`Variant::Vph`] it is valid only where it was stated, except at `ALL`,
//! which reaches every node in both variants.

mod config;
mod consensus;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use thiserror::Error;

use crate::ids::{is_token, ViewpointId, ALL};

pub use consensus::{group_stance, Ballot, ConsensusConfig, RawStance, Stance, DEFAULT_THRESHOLD};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HierarchyError {
    #[error("arcs form a cycle through `{0}`")]
    CycleDetected(ViewpointId),
    #[error("viewpoint `{0}` is not reachable from ALL")]
    UnreachableNode(ViewpointId),
    #[error("`{0}` is a reserved or invalid viewpoint label")]
    ReservedLabel(String),
    #[error("unknown viewpoint `{0}`")]
    UnknownNode(ViewpointId),
    #[error("ballot members do not match the configured weights: {0}")]
    WeightMismatch(String),
    #[error("threshold {0} is outside (0, 1]")]
    InvalidThreshold(f64),
    #[error("weights must be non-negative with at least one positive entry")]
    InvalidWeights,
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },
}

pub type Result<T, E = HierarchyError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Variant {
    /// Winner-takes-all: validity is pushed down to every descendant.
    #[serde(rename = "WTAH")]
    Wtah,
    /// View-preserving: descendants may dissent.
    #[serde(rename = "VPH")]
    Vph,
}

impl Variant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "WTAH" => Some(Variant::Wtah),
            "VPH" => Some(Variant::Vph),
            _ => None,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Variant::Wtah => "WTAH",
            Variant::Vph => "VPH",
        })
    }
}

/// Per-node consensus overrides. Nodes without an override use the global
/// threshold and uniform weights over their members.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NodeConfigs {
    pub global_threshold: Option<f64>,
    pub thresholds: BTreeMap<ViewpointId, f64>,
    pub weights: BTreeMap<ViewpointId, BTreeMap<String, f64>>,
}

#[derive(Debug, Clone)]
pub struct ViewpointHierarchy {
    variant: Variant,
    nodes: BTreeSet<ViewpointId>,
    children: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
    parents: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
    /// Strict descendants per node.
    descendants: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
    /// Strict ancestors per node.
    ancestors: BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
    configs: NodeConfigs,
}

impl ViewpointHierarchy {
    /// Validates and indexes a hierarchy.
    ///
    /// If `ALL` is neither listed nor used in any arc it is added above every
    /// source node. Otherwise every node must already be reachable from it.
    pub fn build<N, A>(nodes: N, arcs: A, variant: Variant, configs: NodeConfigs) -> Result<Self>
    where
        N: IntoIterator,
        N::Item: Into<ViewpointId>,
        A: IntoIterator<Item = (ViewpointId, ViewpointId)>,
    {
        let all = ViewpointId::all();
        let mut node_set: BTreeSet<ViewpointId> = nodes.into_iter().map(Into::into).collect();
        let arcs: BTreeSet<(ViewpointId, ViewpointId)> = arcs.into_iter().collect();
        for (parent, child) in &arcs {
            node_set.insert(parent.clone());
            node_set.insert(child.clone());
        }
        for n in &node_set {
            if !is_token(n.as_str()) || n.as_str().contains('#') {
                return Err(HierarchyError::ReservedLabel(n.to_string()));
            }
        }
        if let Some((_, child)) = arcs.iter().find(|(_, c)| c.is_all()) {
            return Err(HierarchyError::ReservedLabel(format!(
                "{child} (ALL cannot have a parent)"
            )));
        }

        let mut children: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> = BTreeMap::new();
        let mut parents: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> = BTreeMap::new();
        for (parent, child) in &arcs {
            if parent == child {
                return Err(HierarchyError::CycleDetected(parent.clone()));
            }
            children.entry(parent.clone()).or_default().insert(child.clone());
            parents.entry(child.clone()).or_default().insert(parent.clone());
        }
        if !node_set.contains(&all) {
            let sources: Vec<ViewpointId> = node_set
                .iter()
                .filter(|n| !parents.contains_key(*n))
                .cloned()
                .collect();
            node_set.insert(all.clone());
            for s in sources {
                children.entry(all.clone()).or_default().insert(s.clone());
                parents.entry(s).or_default().insert(all.clone());
            }
        }

        let order = topological_order(&node_set, &children)?;

        let mut reachable = BTreeSet::from([all.clone()]);
        let mut queue = VecDeque::from([all.clone()]);
        while let Some(n) = queue.pop_front() {
            for c in children.get(&n).into_iter().flatten() {
                if reachable.insert(c.clone()) {
                    queue.push_back(c.clone());
                }
            }
        }
        if let Some(orphan) = node_set.iter().find(|n| !reachable.contains(*n)) {
            return Err(HierarchyError::UnreachableNode(orphan.clone()));
        }

        // Closures in reverse topological order.
        let mut descendants: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> = BTreeMap::new();
        for n in order.iter().rev() {
            let mut acc = BTreeSet::new();
            for c in children.get(n).into_iter().flatten() {
                acc.insert(c.clone());
                acc.extend(descendants[c].iter().cloned());
            }
            descendants.insert(n.clone(), acc);
        }
        let mut ancestors: BTreeMap<ViewpointId, BTreeSet<ViewpointId>> =
            node_set.iter().map(|n| (n.clone(), BTreeSet::new())).collect();
        for (n, below) in &descendants {
            for d in below {
                ancestors.get_mut(d).expect("node").insert(n.clone());
            }
        }

        if let Some(theta) = configs.global_threshold {
            ConsensusConfig::check_threshold(theta)?;
        }
        for (node, theta) in &configs.thresholds {
            if !node_set.contains(node) {
                return Err(HierarchyError::UnknownNode(node.clone()));
            }
            ConsensusConfig::check_threshold(*theta)?;
        }
        for (node, weights) in &configs.weights {
            if !node_set.contains(node) {
                return Err(HierarchyError::UnknownNode(node.clone()));
            }
            ConsensusConfig::check_weights(weights)?;
        }

        Ok(Self {
            variant,
            nodes: node_set,
            children,
            parents,
            descendants,
            ancestors,
            configs,
        })
    }

    pub fn from_config_str(text: &str) -> Result<Self> {
        config::parse(text)
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn nodes(&self) -> &BTreeSet<ViewpointId> {
        &self.nodes
    }

    pub fn contains(&self, v: &ViewpointId) -> bool {
        self.nodes.contains(v)
    }

    fn require(&self, v: &ViewpointId) -> Result<()> {
        if self.nodes.contains(v) {
            Ok(())
        } else {
            Err(HierarchyError::UnknownNode(v.clone()))
        }
    }

    pub fn children(&self, v: &ViewpointId) -> Result<&BTreeSet<ViewpointId>> {
        self.require(v)?;
        Ok(self.children.get(v).unwrap_or(&EMPTY))
    }

    pub fn parents(&self, v: &ViewpointId) -> Result<&BTreeSet<ViewpointId>> {
        self.require(v)?;
        Ok(self.parents.get(v).unwrap_or(&EMPTY))
    }

    /// Strict descendants.
    pub fn descendants(&self, v: &ViewpointId) -> Result<&BTreeSet<ViewpointId>> {
        self.descendants
            .get(v)
            .ok_or_else(|| HierarchyError::UnknownNode(v.clone()))
    }

    /// Strict ancestors.
    pub fn ancestors(&self, v: &ViewpointId) -> Result<&BTreeSet<ViewpointId>> {
        self.ancestors
            .get(v)
            .ok_or_else(|| HierarchyError::UnknownNode(v.clone()))
    }

    /// Arcs as `(parent, child)` pairs, including those added under `ALL`.
    pub fn arcs(&self) -> impl Iterator<Item = (&ViewpointId, &ViewpointId)> {
        self.children
            .iter()
            .flat_map(|(p, cs)| cs.iter().map(move |c| (p, c)))
    }

    pub fn configs(&self) -> &NodeConfigs {
        &self.configs
    }

    /// Viewpoints at which a claim attributed to `v` is valid.
    pub fn validity_set(&self, v: &ViewpointId) -> Result<BTreeSet<ViewpointId>> {
        self.require(v)?;
        if v.is_all() {
            return Ok(self.nodes.clone());
        }
        let mut out = BTreeSet::from([v.clone()]);
        if self.variant == Variant::Wtah {
            out.extend(self.descendants[v].iter().cloned());
        }
        Ok(out)
    }

    /// Membership test for [`Self::validity_set`] without allocating.
    pub fn is_valid_at(&self, claim_viewpoint: &ViewpointId, at: &ViewpointId) -> Result<bool> {
        self.require(claim_viewpoint)?;
        self.require(at)?;
        Ok(claim_viewpoint == at
            || claim_viewpoint.is_all()
            || (self.variant == Variant::Wtah && self.descendants[claim_viewpoint].contains(at)))
    }

    /// True iff one node is an ancestor of the other (reflexive).
    pub fn path_related(&self, a: &ViewpointId, b: &ViewpointId) -> Result<bool> {
        self.require(a)?;
        self.require(b)?;
        Ok(a == b || self.descendants[a].contains(b) || self.descendants[b].contains(a))
    }

    pub fn threshold(&self, v: &ViewpointId) -> f64 {
        self.configs
            .thresholds
            .get(v)
            .copied()
            .or(self.configs.global_threshold)
            .unwrap_or(DEFAULT_THRESHOLD)
    }

    /// Consensus configuration of `node` for the given members: the node's
    /// configured weights if any, otherwise uniform weights.
    pub fn consensus_for<'a, I>(&self, node: &ViewpointId, members: I) -> Result<ConsensusConfig>
    where
        I: IntoIterator<Item = &'a str>,
    {
        self.require(node)?;
        let weights = match self.configs.weights.get(node) {
            Some(w) => w.clone(),
            None => members.into_iter().map(|m| (m.to_owned(), 1.0)).collect(),
        };
        ConsensusConfig::new(weights, self.threshold(node))
    }

    /// Consensus of `node` over its children's stances.
    pub fn aggregate_stances(
        &self,
        child_stances: &BTreeMap<ViewpointId, Stance>,
        node: &ViewpointId,
    ) -> Result<Stance> {
        let children = self.children(node)?;
        let given: BTreeSet<&ViewpointId> = child_stances.keys().collect();
        if given != children.iter().collect() {
            return Err(HierarchyError::WeightMismatch(format!(
                "stances must cover exactly the children of {node}"
            )));
        }
        let config = self.consensus_for(node, children.iter().map(ViewpointId::as_str))?;
        let ballot = Ballot::new(
            child_stances
                .iter()
                .map(|(c, s)| (c.to_string(), RawStance::from(*s))),
        );
        group_stance(&ballot, &config)
    }

    /// Checks the structural invariants; used by tests.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let all = ViewpointId::all();
        if self.parents.get(&all).is_some_and(|p| !p.is_empty()) {
            return Err("ALL has a parent".into());
        }
        for n in &self.nodes {
            if !n.is_all() && !self.ancestors[n].contains(&all) {
                return Err(format!("{n} is not below {ALL}"));
            }
            if self.descendants[n].contains(n) {
                return Err(format!("{n} lies on a cycle"));
            }
        }
        Ok(())
    }
}

static EMPTY: BTreeSet<ViewpointId> = BTreeSet::new();

fn topological_order(
    nodes: &BTreeSet<ViewpointId>,
    children: &BTreeMap<ViewpointId, BTreeSet<ViewpointId>>,
) -> Result<Vec<ViewpointId>> {
    let mut indegree: BTreeMap<&ViewpointId, usize> = nodes.iter().map(|n| (n, 0)).collect();
    for cs in children.values() {
        for c in cs {
            *indegree.get_mut(c).expect("arc endpoints are nodes") += 1;
        }
    }
    let mut ready: VecDeque<&ViewpointId> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(n, _)| *n)
        .collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_front() {
        order.push(n.clone());
        for c in children.get(n).into_iter().flatten() {
            let d = indegree.get_mut(c).expect("node");
            *d -= 1;
            if *d == 0 {
                ready.push_back(c);
            }
        }
    }
    if order.len() != nodes.len() {
        let stuck = indegree
            .iter()
            .find(|(_, d)| **d > 0)
            .map(|(n, _)| (*n).clone())
            .expect("some node remains");
        return Err(HierarchyError::CycleDetected(stuck));
    }
    Ok(order)
}
