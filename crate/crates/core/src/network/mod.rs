//! Belief-network data model: configuration, validation and the built,
//! index-based network that the engine evolves.

mod config;
mod validate;

use std::collections::BTreeMap;

pub use config::{CouplingKind, EdgeConfig, NetworkConfig, NodeConfig, NodeKind, NodeParams};
pub use validate::{validate, validate_with, Issue, IssueCode, ValidationReport};

use crate::coupling::{Transform, TransformRegistry};
use crate::engine::{NodeBelief, NodeState};
use crate::error::{HgfError, Result};
use crate::io_nodes::{BinaryInputState, BinaryNodeState, BinaryPrecision, ContinuousInputState};
use crate::scalar::Scalar;

/// Node parameters converted to the network's scalar type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params<T> {
    pub rho: T,
    pub omega: T,
    pub zeta: T,
    pub eta0: T,
    pub eta1: T,
    pub mu0: T,
    pub pi0: T,
}

impl<T: Scalar> Params<T> {
    fn from_config(p: &NodeParams) -> Self {
        Self {
            rho: T::lit(p.rho),
            omega: T::lit(p.omega),
            zeta: T::lit(p.zeta),
            eta0: T::lit(p.eta0),
            eta1: T::lit(p.eta1),
            mu0: T::lit(p.mu0),
            pi0: T::lit(p.pi0),
        }
    }

    fn to_config(self) -> NodeParams {
        NodeParams {
            rho: self.rho.as_f64(),
            omega: self.omega.as_f64(),
            zeta: self.zeta.as_f64(),
            eta0: self.eta0.as_f64(),
            eta1: self.eta1.as_f64(),
            mu0: self.mu0.as_f64(),
            pi0: self.pi0.as_f64(),
        }
    }

    /// Observation channel of a binary input: a log-noise of exactly zero
    /// means noiseless observations.
    pub fn binary_precision(&self) -> BinaryPrecision<T> {
        if self.zeta == T::zero() {
            BinaryPrecision::Infinite
        } else {
            BinaryPrecision::Finite((-self.zeta).exp())
        }
    }
}

#[derive(Debug, Clone)]
pub struct Node<T> {
    pub id: String,
    pub kind: NodeKind,
    pub params: Params<T>,
}

#[derive(Debug, Clone)]
pub struct Edge<T> {
    pub child: usize,
    pub parent: usize,
    pub kind: CouplingKind,
    pub strength: T,
    pub transform: Transform<T>,
    /// Transform id as written in the config, `None` when omitted.
    declared_transform: Option<String>,
}

/// A validated network plus the current belief of every node.
#[derive(Debug, Clone)]
pub struct BeliefNetwork<T> {
    pub(crate) nodes: Vec<Node<T>>,
    pub(crate) edges: Vec<Edge<T>>,
    index: BTreeMap<String, usize>,
    /// Edge indices per child, in declaration order.
    pub(crate) value_parents: Vec<Vec<usize>>,
    pub(crate) volatility_parents: Vec<Vec<usize>>,
    pub(crate) noise_parent: Vec<Option<usize>>,
    /// Edge indices per parent, ordered by child id then coupling kind.
    pub(crate) child_edges: Vec<Vec<usize>>,
    /// Children before parents, inputs first.
    order: Vec<usize>,
    metadata: BTreeMap<String, String>,
    pub(crate) beliefs: Vec<NodeBelief<T>>,
    pub(crate) trial: u64,
    pub(crate) update_counts: Vec<u32>,
}

/// Builds a network with the built-in transforms.
pub fn build<T: Scalar>(config: &NetworkConfig) -> Result<BeliefNetwork<T>> {
    BeliefNetwork::build(config)
}

impl<T: Scalar> BeliefNetwork<T> {
    pub fn build(config: &NetworkConfig) -> Result<Self> {
        Self::build_with(config, &TransformRegistry::default())
    }

    pub fn build_with(config: &NetworkConfig, registry: &TransformRegistry<T>) -> Result<Self> {
        let report = validate_with(config, |id| registry.contains(id));
        if !report.is_empty() {
            return Err(HgfError::Invalid(report));
        }
        for w in &report.warnings {
            log::warn!("{w}");
        }

        let nodes: Vec<Node<T>> = config
            .nodes
            .iter()
            .map(|n| Node {
                id: n.id.clone(),
                kind: n.kind,
                params: Params::from_config(&n.params),
            })
            .collect();
        let index: BTreeMap<String, usize> =
            nodes.iter().enumerate().map(|(i, n)| (n.id.clone(), i)).collect();

        let mut edges = Vec::with_capacity(config.edges.len());
        for e in &config.edges {
            edges.push(Edge {
                child: index[&e.child],
                parent: index[&e.parent],
                kind: e.kind,
                strength: T::lit(e.strength),
                transform: registry.get(e.transform_id())?,
                declared_transform: e.transform.clone(),
            });
        }

        let n = nodes.len();
        let mut value_parents = vec![Vec::new(); n];
        let mut volatility_parents = vec![Vec::new(); n];
        let mut noise_parent = vec![None; n];
        let mut child_edges = vec![Vec::new(); n];
        for (ei, e) in edges.iter().enumerate() {
            match e.kind {
                CouplingKind::Value => value_parents[e.child].push(ei),
                CouplingKind::Volatility => volatility_parents[e.child].push(ei),
                CouplingKind::Noise => noise_parent[e.child] = Some(ei),
            }
            child_edges[e.parent].push(ei);
        }
        for list in &mut child_edges {
            list.sort_by(|&a, &b| {
                let (ea, eb) = (&edges[a], &edges[b]);
                nodes[ea.child].id.cmp(&nodes[eb.child].id).then(ea.kind.cmp(&eb.kind))
            });
        }

        let kinds: Vec<NodeKind> = nodes.iter().map(|n| n.kind).collect();
        let triples: Vec<_> = edges.iter().map(|e| (e.child, e.parent, e.kind)).collect();
        let precedence = validate::update_precedence(&kinds, &triples);
        let order = validate::linear_extension(n, &precedence, |i| {
            (u8::from(!nodes[i].kind.is_input()), nodes[i].id.clone())
        })
        .expect("validated network is acyclic");

        let mut net = Self {
            nodes,
            edges,
            index,
            value_parents,
            volatility_parents,
            noise_parent,
            child_edges,
            order,
            metadata: config.metadata.clone(),
            beliefs: Vec::new(),
            trial: 0,
            update_counts: vec![0; n],
        };
        net.beliefs = net.initial_beliefs();
        Ok(net)
    }

    fn initial_beliefs(&self) -> Vec<NodeBelief<T>> {
        let sigmoid = |x: T| T::one() / (T::one() + (-x).exp());
        let value_parent_mu0 = |i: usize| {
            self.value_parents[i]
                .first()
                .map(|&e| self.nodes[self.edges[e].parent].params.mu0)
        };
        self.nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                let p = &node.params;
                match node.kind {
                    NodeKind::ContinuousState => NodeBelief::State(NodeState::initial(
                        p.mu0,
                        p.pi0,
                        self.value_parents[i].len(),
                        self.volatility_parents[i].len(),
                    )),
                    NodeKind::BinaryState => {
                        let m = sigmoid(value_parent_mu0(i).unwrap_or(T::zero()));
                        NodeBelief::Binary(BinaryNodeState::initial(m))
                    }
                    NodeKind::ContinuousInput => NodeBelief::ContinuousInput(ContinuousInputState::initial(
                        value_parent_mu0(i).unwrap_or(T::zero()),
                        (-p.zeta).exp(),
                    )),
                    NodeKind::BinaryInput => NodeBelief::BinaryInput(BinaryInputState::initial()),
                }
            })
            .collect()
    }

    /// Restores every belief to its configured initial value.
    pub fn reset(&mut self) {
        self.beliefs = self.initial_beliefs();
        self.trial = 0;
        self.update_counts.iter_mut().for_each(|c| *c = 0);
    }

    pub fn to_config(&self) -> NetworkConfig {
        NetworkConfig {
            nodes: self
                .nodes
                .iter()
                .map(|n| NodeConfig {
                    id: n.id.clone(),
                    kind: n.kind,
                    params: n.params.to_config(),
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeConfig {
                    child: self.nodes[e.child].id.clone(),
                    parent: self.nodes[e.parent].id.clone(),
                    kind: e.kind,
                    strength: e.strength.as_f64(),
                    transform: e.declared_transform.clone(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node<T>] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn node(&self, id: &str) -> Option<&Node<T>> {
        self.index_of(id).map(|i| &self.nodes[i])
    }

    /// Update order: every child precedes all of its parents.
    pub fn topological_order(&self) -> &[usize] {
        &self.order
    }

    pub fn topological_ids(&self) -> Vec<&str> {
        self.order.iter().map(|&i| self.nodes[i].id.as_str()).collect()
    }

    pub fn input_ids(&self) -> Vec<&str> {
        self.nodes
            .iter()
            .filter(|n| n.kind.is_input())
            .map(|n| n.id.as_str())
            .collect()
    }

    pub fn beliefs(&self) -> &[NodeBelief<T>] {
        &self.beliefs
    }

    pub fn belief(&self, id: &str) -> Option<&NodeBelief<T>> {
        self.index_of(id).map(|i| &self.beliefs[i])
    }

    /// Number of completed trials.
    pub fn trial(&self) -> u64 {
        self.trial
    }

    /// How often each node was updated during the last completed trial.
    pub fn last_update_counts(&self) -> &[u32] {
        &self.update_counts
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }
}

#[cfg(test)]
mod tests;
