use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{HgfError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    ContinuousState,
    BinaryState,
    ContinuousInput,
    BinaryInput,
}

impl NodeKind {
    pub fn is_input(self) -> bool {
        matches!(self, NodeKind::ContinuousInput | NodeKind::BinaryInput)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::ContinuousState => "continuous_state",
            NodeKind::BinaryState => "binary_state",
            NodeKind::ContinuousInput => "continuous_input",
            NodeKind::BinaryInput => "binary_input",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    Value,
    Volatility,
    Noise,
}

impl CouplingKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CouplingKind::Value => "value",
            CouplingKind::Volatility => "volatility",
            CouplingKind::Noise => "noise",
        }
    }
}

/// Per-node parameters. Every field is optional in JSON and falls back to
/// the value from [`Default`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NodeParams {
    /// Drift per unit time.
    pub rho: f64,
    /// Tonic log-volatility.
    pub omega: f64,
    /// Tonic log observation noise (input nodes). For binary inputs `0`
    /// selects the noiseless channel.
    pub zeta: f64,
    pub eta0: f64,
    pub eta1: f64,
    pub mu0: f64,
    pub pi0: f64,
}

impl Default for NodeParams {
    fn default() -> Self {
        Self {
            rho: 0.0,
            omega: 0.0,
            zeta: 0.0,
            eta0: 0.0,
            eta1: 1.0,
            mu0: 0.0,
            pi0: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeConfig {
    pub id: String,
    pub kind: NodeKind,
    #[serde(default)]
    pub params: NodeParams,
}

fn unit_strength() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub child: String,
    pub parent: String,
    pub kind: CouplingKind,
    /// `alpha` for value edges, `kappa` for volatility and noise edges.
    #[serde(default = "unit_strength")]
    pub strength: f64,
    /// Transform id for value edges; absent means linear.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transform: Option<String>,
}

impl EdgeConfig {
    pub fn new(child: &str, parent: &str, kind: CouplingKind, strength: f64) -> Self {
        Self {
            child: child.to_string(),
            parent: parent.to_string(),
            kind,
            strength,
            transform: None,
        }
    }

    pub fn with_transform(mut self, id: &str) -> Self {
        self.transform = Some(id.to_string());
        self
    }

    pub fn transform_id(&self) -> &str {
        self.transform.as_deref().unwrap_or(crate::coupling::LINEAR)
    }
}

/// Serializable description of a belief network.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkConfig {
    pub nodes: Vec<NodeConfig>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub metadata: BTreeMap<String, String>,
}

impl NetworkConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| HgfError::Parse(e.to_string()))
    }

    /// Canonical form: pretty-printed, every parameter spelled out, trailing
    /// newline. `to_json(from_json(s)) == s` for any `s` in this form.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn node(&mut self, id: &str, kind: NodeKind, params: NodeParams) -> &mut Self {
        self.nodes.push(NodeConfig {
            id: id.to_string(),
            kind,
            params,
        });
        self
    }

    pub fn edge(&mut self, edge: EdgeConfig) -> &mut Self {
        self.edges.push(edge);
        self
    }
}
