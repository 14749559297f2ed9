//! Forward sampling from the generative model a network describes.
//!
//! Each trial is sampled top-down: parents first, so that value parents
//! contribute their current-trial value to a child's mean and volatility
//! parents their current-trial value to its step size.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sha2::{Digest, Sha256};

use crate::coupling::TransformRegistry;
use crate::error::{HgfError, Result};
use crate::network::{BeliefNetwork, CouplingKind, NetworkConfig, NodeKind};
use crate::output::format_value;

/// Trial intervals for a simulation.
#[derive(Debug, Clone, PartialEq)]
pub enum Times {
    Constant(f64),
    PerTrial(Vec<f64>),
}

impl Default for Times {
    fn default() -> Self {
        Times::Constant(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationSpec {
    pub config: NetworkConfig,
    pub trials: usize,
    pub times: Times,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn new(config: NetworkConfig, trials: usize, seed: u64) -> Self {
        Self {
            config,
            trials,
            times: Times::default(),
            seed,
        }
    }
}

/// Sampled hidden states and observations, `values[trial][node]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub ids: Vec<String>,
    pub kinds: Vec<NodeKind>,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn column(&self, id: &str) -> Option<Vec<f64>> {
        let i = self.ids.iter().position(|x| x == id)?;
        Some(self.values.iter().map(|row| row[i]).collect())
    }

    /// CSV with `trial`, `t`, then one column per node in id order:
    /// observations under the input id, hidden states as `true_<id>`.
    pub fn to_csv(&self) -> String {
        let mut cols: Vec<usize> = (0..self.ids.len()).collect();
        cols.sort_by(|&a, &b| self.ids[a].cmp(&self.ids[b]));
        let mut out = String::from("trial,t");
        for &c in &cols {
            out.push(',');
            if !self.kinds[c].is_input() {
                out.push_str("true_");
            }
            out.push_str(&self.ids[c]);
        }
        out.push('\n');
        for (k, row) in self.values.iter().enumerate() {
            out.push_str(&(k + 1).to_string());
            out.push(',');
            out.push_str(&format_value(self.times[k]));
            for &c in &cols {
                out.push(',');
                out.push_str(&format_value(row[c]));
            }
            out.push('\n');
        }
        out
    }
}

/// Independent stream per (seed, node, trial), so adding or removing a node
/// leaves the other nodes' draws unchanged.
fn node_rng(seed: u64, id: &str, trial: u64) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update((id.len() as u64).to_le_bytes());
    h.update(id.as_bytes());
    h.update(trial.to_le_bytes());
    let digest = h.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha8Rng::from_seed(key)
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn simulate(spec: &SimulationSpec) -> Result<GroundTruth> {
    simulate_with(spec, &TransformRegistry::default())
}

pub fn simulate_with(spec: &SimulationSpec, registry: &TransformRegistry<f64>) -> Result<GroundTruth> {
    if spec.trials == 0 {
        return Err(HgfError::NoTrials);
    }
    let times: Vec<f64> = match &spec.times {
        Times::Constant(t) => vec![*t; spec.trials],
        Times::PerTrial(ts) => {
            if ts.len() != spec.trials {
                return Err(HgfError::Parse(format!(
                    "{} trial times given for {} trials",
                    ts.len(),
                    spec.trials
                )));
            }
            ts.clone()
        }
    };
    if let Some(&bad) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
        return Err(HgfError::InvalidTime(bad));
    }

    let net = BeliefNetwork::<f64>::build_with(&spec.config, registry)?;
    let nodes = net.nodes();
    let edges = net.edges();
    let n = nodes.len();
    let top_down: Vec<usize> = net.topological_order().iter().rev().copied().collect();

    let mut previous: Vec<f64> = nodes.iter().map(|node| node.params.mu0).collect();
    let mut values = Vec::with_capacity(spec.trials);
    for (k, &t) in times.iter().enumerate() {
        let trial = k as u64 + 1;
        let mut x = vec![f64::NAN; n];
        for &i in &top_down {
            let node = &nodes[i];
            let p = node.params;
            let mut rng = node_rng(spec.seed, &node.id, trial);
            let z: f64 = rng.sample(StandardNormal);
            let parents = |kind: CouplingKind| {
                edges.iter().filter(move |e| e.child == i && e.kind == kind)
            };
            let variance_error = |variance: f64| HgfError::NegativeVariance {
                node: node.id.clone(),
                trial,
                variance,
            };
            x[i] = match node.kind {
                NodeKind::ContinuousState => {
                    let push: f64 = parents(CouplingKind::Value)
                        .map(|e| e.strength * e.transform.g(x[e.parent]))
                        .sum();
                    let mean = previous[i] + t * (p.rho + push);
                    let volatility: Vec<_> = parents(CouplingKind::Volatility).collect();
                    let variance = match volatility.as_slice() {
                        [] => t * p.omega.exp(),
                        [e] => t * (e.strength * x[e.parent] + p.omega).exp(),
                        many => t * p.omega.exp() + many.iter().map(|e| e.strength * x[e.parent]).sum::<f64>(),
                    };
                    if variance.is_nan() || variance < 0.0 {
                        return Err(variance_error(variance));
                    }
                    mean + variance.sqrt() * z
                }
                NodeKind::BinaryState => {
                    let parent = parents(CouplingKind::Value).next().expect("validated").parent;
                    let p1 = sigmoid(x[parent]);
                    if rng.random::<f64>() < p1 {
                        1.0
                    } else {
                        0.0
                    }
                }
                NodeKind::ContinuousInput => {
                    let mean = x[parents(CouplingKind::Value).next().expect("validated").parent];
                    let log_variance = match parents(CouplingKind::Noise).next() {
                        Some(e) => e.strength * x[e.parent] + p.zeta,
                        None => p.zeta,
                    };
                    mean + (0.5 * log_variance).exp() * z
                }
                NodeKind::BinaryInput => {
                    let outcome = x[parents(CouplingKind::Value).next().expect("validated").parent];
                    if p.zeta == 0.0 {
                        outcome
                    } else {
                        let eta = if outcome == 1.0 { p.eta1 } else { p.eta0 };
                        eta + (0.5 * p.zeta).exp() * z
                    }
                }
            };
            if !x[i].is_finite() {
                return Err(HgfError::SimulationNonFinite {
                    node: node.id.clone(),
                    trial,
                });
            }
        }
        previous.clone_from(&x);
        values.push(x);
    }

    Ok(GroundTruth {
        ids: nodes.iter().map(|n| n.id.clone()).collect(),
        kinds: nodes.iter().map(|n| n.kind).collect(),
        times,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{EdgeConfig, NodeParams};

    fn single(omega: f64) -> NetworkConfig {
        let mut c = NetworkConfig::default();
        c.node(
            "x",
            NodeKind::ContinuousState,
            NodeParams {
                omega,
                mu0: 0.3,
                ..Default::default()
            },
        );
        c
    }

    #[test]
    fn zero_variance_freezes_state() {
        let gt = simulate(&SimulationSpec::new(single(-1000.0), 50, 1)).unwrap();
        assert!(gt.column("x").unwrap().iter().all(|&v| v == 0.3));
    }

    #[test]
    fn identical_seeds_are_bit_identical() {
        let a = simulate(&SimulationSpec::new(single(0.0), 200, 9)).unwrap();
        let b = simulate(&SimulationSpec::new(single(0.0), 200, 9)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let c = simulate(&SimulationSpec::new(single(0.0), 200, 10)).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn adding_a_node_leaves_other_streams_alone() {
        let a = simulate(&SimulationSpec::new(single(0.0), 100, 3)).unwrap();
        let mut cfg = single(0.0);
        cfg.node("other", NodeKind::ContinuousState, NodeParams::default());
        let b = simulate(&SimulationSpec::new(cfg, 100, 3)).unwrap();
        assert_eq!(a.column("x"), b.column("x"));
    }

    #[test]
    fn zero_trials_rejected() {
        assert_eq!(
            simulate(&SimulationSpec::new(single(0.0), 0, 1)).unwrap_err(),
            HgfError::NoTrials
        );
    }

    #[test]
    fn bad_times_rejected() {
        let mut spec = SimulationSpec::new(single(0.0), 2, 1);
        spec.times = Times::PerTrial(vec![1.0, 0.0]);
        assert_eq!(simulate(&spec).unwrap_err(), HgfError::InvalidTime(0.0));
        spec.times = Times::PerTrial(vec![1.0]);
        assert!(matches!(simulate(&spec), Err(HgfError::Parse(_))));
    }

    #[test]
    fn additive_variance_can_go_negative() {
        let mut c = single(-5.0);
        c.node("v1", NodeKind::ContinuousState, NodeParams { mu0: -10.0, omega: -1000.0, ..Default::default() });
        c.node("v2", NodeKind::ContinuousState, NodeParams { mu0: -10.0, omega: -1000.0, ..Default::default() });
        c.edge(EdgeConfig::new("x", "v1", CouplingKind::Volatility, 1.0));
        c.edge(EdgeConfig::new("x", "v2", CouplingKind::Volatility, 1.0));
        let err = simulate(&SimulationSpec::new(c, 5, 1)).unwrap_err();
        assert!(matches!(err, HgfError::NegativeVariance { ref node, trial: 1, .. } if node == "x"), "{err}");
    }

    #[test]
    fn saturated_sigmoid_emits_ones() {
        let mut c = NetworkConfig::default();
        c.node("d", NodeKind::ContinuousState, NodeParams { mu0: 60.0, omega: -1000.0, ..Default::default() });
        c.node("b", NodeKind::BinaryState, NodeParams::default());
        c.node("u", NodeKind::BinaryInput, NodeParams::default());
        c.edge(EdgeConfig::new("b", "d", CouplingKind::Value, 1.0));
        c.edge(EdgeConfig::new("u", "b", CouplingKind::Value, 1.0));
        let gt = simulate(&SimulationSpec::new(c, 500, 4)).unwrap();
        assert!(gt.column("u").unwrap().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn csv_marks_hidden_states() {
        let mut c = single(0.0);
        c.node("u", NodeKind::ContinuousInput, NodeParams::default());
        c.edge(EdgeConfig::new("u", "x", CouplingKind::Value, 1.0));
        let csv = simulate(&SimulationSpec::new(c, 3, 1)).unwrap().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("trial,t,u,true_x"));
        assert_eq!(csv.lines().count(), 4);
    }
}
