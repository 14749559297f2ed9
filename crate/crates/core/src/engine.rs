//! One trial of filtering: a prediction pass over all nodes, followed by an
//! update pass from the inputs upward in which each node forms its posterior
//! from its children's prediction errors and then computes its own.

use crate::coupling::Transform;
use crate::error::{HgfError, PrecisionTerms, Result};
use crate::io_nodes::{self, BinaryInputState, BinaryNodeState, ContinuousInputState};
use crate::network::{BeliefNetwork, CouplingKind, NodeKind};
use crate::scalar::Scalar;

/// Mean and precision of a Gaussian belief.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Belief<T> {
    pub mu: T,
    pub pi: T,
}

impl<T> Belief<T> {
    pub fn new(mu: T, pi: T) -> Self {
        Self { mu, pi }
    }
}

/// Failure inside a single update equation, before node and trial are known.
#[derive(Debug, Clone, PartialEq)]
pub enum StepError {
    NegativePrecision {
        prior: f64,
        terms: Vec<(&'static str, f64)>,
        result: f64,
    },
    NonFinite {
        quantity: &'static str,
        value: f64,
        argument: f64,
    },
    MixtureUnderflow {
        mu_hat: f64,
        pi_hat: f64,
        delta1: f64,
        delta0: f64,
    },
    InvalidObservation {
        value: f64,
        reason: &'static str,
    },
}

impl StepError {
    pub(crate) fn at(self, node: &str, child: &str, trial: u64) -> HgfError {
        let node = node.to_string();
        match self {
            StepError::NegativePrecision {
                prior,
                terms,
                result,
            } => HgfError::NegativePrecision {
                node,
                trial,
                terms: PrecisionTerms {
                    prior,
                    child: child.to_string(),
                    terms,
                    result,
                },
            },
            StepError::NonFinite {
                quantity,
                value,
                argument,
            } => HgfError::NonFinite {
                node,
                trial,
                quantity,
                value,
                argument,
            },
            StepError::MixtureUnderflow {
                mu_hat,
                pi_hat,
                delta1,
                delta0,
            } => HgfError::MixtureUnderflow {
                node,
                trial,
                mu_hat,
                pi_hat,
                delta1,
                delta0,
            },
            StepError::InvalidObservation { value, reason } => HgfError::InvalidObservation {
                node,
                trial,
                value,
                reason,
            },
        }
    }
}

pub(crate) type StepResult<T> = std::result::Result<T, StepError>;

/// Quantities a child keeps for one of its value parents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueParentTerms<T> {
    /// Drift attributable to this parent alone, `P_{a,b}`.
    pub drift: T,
    pub mu_hat: T,
    pub vape: T,
}

/// Quantities a child keeps for one of its volatility parents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolatilityParentTerms<T> {
    /// Volatility attributable to this parent alone, `Omega_{a,b}`.
    pub volatility: T,
    pub pi_hat: T,
    pub gamma: T,
    pub vope: T,
}

/// Belief of a continuous state node at the current trial.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState<T> {
    pub mu: T,
    pub pi: T,
    pub mu_hat: T,
    pub pi_hat: T,
    /// Total predicted drift `P`.
    pub drift_total: T,
    /// Total predicted volatility `Omega`.
    pub vol_total: T,
    /// Effective precision of the prediction, `Omega * pi_hat`.
    pub gamma: T,
    pub vape: T,
    /// `NaN` unless the node has a volatility parent.
    pub vope: T,
    /// Aligned with the node's value-parent edges in declaration order.
    pub per_value_parent: Vec<ValueParentTerms<T>>,
    /// Aligned with the node's volatility-parent edges in declaration order.
    pub per_volatility_parent: Vec<VolatilityParentTerms<T>>,
}

impl<T: Scalar> NodeState<T> {
    /// Predictions start equal to the initial posterior.
    pub fn initial(mu0: T, pi0: T, value_parents: usize, volatility_parents: usize) -> Self {
        Self {
            mu: mu0,
            pi: pi0,
            mu_hat: mu0,
            pi_hat: pi0,
            drift_total: T::zero(),
            vol_total: T::zero(),
            gamma: T::zero(),
            vape: T::zero(),
            vope: if volatility_parents > 0 { T::zero() } else { T::nan() },
            per_value_parent: vec![
                ValueParentTerms {
                    drift: T::zero(),
                    mu_hat: mu0,
                    vape: T::zero(),
                };
                value_parents
            ],
            per_volatility_parent: vec![
                VolatilityParentTerms {
                    volatility: T::zero(),
                    pi_hat: pi0,
                    gamma: T::zero(),
                    vope: T::zero(),
                };
                volatility_parents
            ],
        }
    }

    pub fn posterior(&self) -> Belief<T> {
        Belief::new(self.mu, self.pi)
    }

    pub fn prediction(&self) -> Belief<T> {
        Belief::new(self.mu_hat, self.pi_hat)
    }
}

/// Belief held by any node of the network.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeBelief<T> {
    State(NodeState<T>),
    Binary(BinaryNodeState<T>),
    ContinuousInput(ContinuousInputState<T>),
    BinaryInput(BinaryInputState<T>),
}

impl<T: Scalar> NodeBelief<T> {
    pub fn as_state(&self) -> Option<&NodeState<T>> {
        match self {
            NodeBelief::State(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_binary(&self) -> Option<&BinaryNodeState<T>> {
        match self {
            NodeBelief::Binary(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_continuous_input(&self) -> Option<&ContinuousInputState<T>> {
        match self {
            NodeBelief::ContinuousInput(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_binary_input(&self) -> Option<&BinaryInputState<T>> {
        match self {
            NodeBelief::BinaryInput(s) => Some(s),
            _ => None,
        }
    }

    /// Posterior and predicted mean of a state or binary node.
    fn mu_and_mu_hat(&self) -> (T, T) {
        match self {
            NodeBelief::State(s) => (s.mu, s.mu_hat),
            NodeBelief::Binary(s) => (s.mu, s.mu_hat),
            NodeBelief::ContinuousInput(s) => (s.u, s.mu_hat),
            NodeBelief::BinaryInput(s) => (s.u, s.mu_hat),
        }
    }
}

/// Time since the previous input; finite and positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrialClock<T>(T);

impl<T: Scalar> TrialClock<T> {
    pub fn new(t: T) -> Result<Self> {
        if t.is_finite() && t > T::zero() {
            Ok(Self(t))
        } else {
            Err(HgfError::InvalidTime(t.as_f64()))
        }
    }

    pub fn get(self) -> T {
        self.0
    }
}

impl<T: Scalar> Default for TrialClock<T> {
    fn default() -> Self {
        Self(T::one())
    }
}

/// Influence of one value parent on a child's prediction.
#[derive(Debug, Clone, Copy)]
pub struct ValueCoupling<'a, T> {
    pub strength: T,
    pub transform: &'a Transform<T>,
    /// Parent's previous posterior mean.
    pub parent_mu: T,
}

/// Influence of one volatility parent on a child's prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolatilityCoupling<T> {
    pub strength: T,
    /// Parent's previous posterior mean.
    pub parent_mu: T,
}

/// Output of the prediction step of a continuous state node.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub mu_hat: T,
    pub pi_hat: T,
    pub drift_total: T,
    pub vol_total: T,
    pub gamma: T,
    pub per_value_parent: Vec<ValueParentTerms<T>>,
    pub per_volatility_parent: Vec<VolatilityParentTerms<T>>,
}

fn checked_volatility<T: Scalar>(t: T, exponent: T) -> StepResult<T> {
    let omega = t * exponent.exp();
    if omega.is_finite() {
        Ok(omega)
    } else {
        Err(StepError::NonFinite {
            quantity: "predicted volatility",
            value: omega.as_f64(),
            argument: exponent.as_f64(),
        })
    }
}

/// Prediction step of a continuous state node from its previous posterior
/// and its parents' previous posterior means.
pub fn predict<T: Scalar>(
    previous: Belief<T>,
    rho: T,
    omega: T,
    value_parents: &[ValueCoupling<'_, T>],
    volatility_parents: &[VolatilityCoupling<T>],
    t: T,
) -> StepResult<Prediction<T>> {
    let mut drift_rate = rho;
    let mut per_value_parent = Vec::with_capacity(value_parents.len());
    for vp in value_parents {
        let push = vp.strength * vp.transform.g(vp.parent_mu);
        drift_rate = drift_rate + push;
        let drift = t * (rho + push);
        per_value_parent.push(ValueParentTerms {
            drift,
            mu_hat: previous.mu + drift,
            vape: T::zero(),
        });
    }
    let drift_total = t * drift_rate;

    let mut exponent = omega;
    let mut per_volatility_parent = Vec::with_capacity(volatility_parents.len());
    for vp in volatility_parents {
        let phasic = vp.strength * vp.parent_mu;
        exponent = exponent + phasic;
        let volatility = checked_volatility(t, omega + phasic)?;
        let pi_hat = (previous.pi.recip() + volatility).recip();
        per_volatility_parent.push(VolatilityParentTerms {
            volatility,
            pi_hat,
            gamma: volatility * pi_hat,
            vope: T::zero(),
        });
    }
    let vol_total = checked_volatility(t, exponent)?;
    let pi_hat = (previous.pi.recip() + vol_total).recip();

    Ok(Prediction {
        mu_hat: previous.mu + drift_total,
        pi_hat,
        drift_total,
        vol_total,
        gamma: vol_total * pi_hat,
        per_value_parent,
        per_volatility_parent,
    })
}

fn positive_precision<T: Scalar>(
    prior: T,
    terms: &[(&'static str, T)],
    pi: T,
) -> StepResult<T> {
    if pi > T::zero() && pi.is_finite() {
        Ok(pi)
    } else {
        Err(StepError::NegativePrecision {
            prior: prior.as_f64(),
            terms: terms.iter().map(|&(n, v)| (n, v.as_f64())).collect(),
            result: pi.as_f64(),
        })
    }
}

/// Update of a value parent from one child's prediction error.
///
/// `prior` is the parent's current prediction (or its partially updated
/// posterior when several children contribute), `expansion` the parent's
/// previous posterior mean at which `g'` and `g''` are evaluated.
pub fn update_value_parent<T: Scalar>(
    prior: Belief<T>,
    expansion: T,
    strength: T,
    transform: &Transform<T>,
    child_pi_hat: T,
    child_vape: T,
) -> StepResult<Belief<T>> {
    let slope = strength * transform.g1(expansion);
    let curvature = strength * transform.g2(expansion) * child_vape;
    let pi = prior.pi + child_pi_hat * (slope * slope - curvature);
    let pi = positive_precision(
        prior.pi,
        &[
            ("child_pi_hat", child_pi_hat),
            ("slope_sq", slope * slope),
            ("curvature_x_vape", curvature),
        ],
        pi,
    )?;
    let mu = prior.mu + slope * child_pi_hat / pi * child_vape;
    Ok(Belief::new(mu, pi))
}

/// The same update specialised to `g(x) = x`.
pub fn update_value_parent_linear<T: Scalar>(
    prior: Belief<T>,
    strength: T,
    child_pi_hat: T,
    child_vape: T,
) -> StepResult<Belief<T>> {
    let pi = prior.pi + child_pi_hat * (strength * strength);
    let pi = positive_precision(prior.pi, &[("child_pi_hat", child_pi_hat)], pi)?;
    let mu = prior.mu + strength * child_pi_hat / pi * child_vape;
    Ok(Belief::new(mu, pi))
}

/// Update of a volatility parent from one child's VOPE and effective
/// precision.
pub fn update_volatility_parent<T: Scalar>(
    prior: Belief<T>,
    strength: T,
    child_gamma: T,
    child_vope: T,
) -> StepResult<Belief<T>> {
    let half = T::lit(0.5);
    let kg = strength * child_gamma;
    let kg_sq = kg * kg;
    let terms = [
        ("half_kg_sq", half * kg_sq),
        ("kg_sq_x_vope", kg_sq * child_vope),
        ("half_k_sq_g_x_vope", half * strength * strength * child_gamma * child_vope),
    ];
    let pi = prior.pi + terms[0].1 + terms[1].1 - terms[2].1;
    let pi = positive_precision(prior.pi, &terms, pi)?;
    let mu = prior.mu + half * kg / pi * child_vope;
    Ok(Belief::new(mu, pi))
}

/// Value prediction error.
#[inline]
pub fn vape<T: Scalar>(mu: T, mu_hat: T) -> T {
    mu - mu_hat
}

/// Volatility prediction error from the prediction precision and VAPE.
#[inline]
pub fn vope<T: Scalar>(pi_hat: T, pi: T, vape: T) -> T {
    pi_hat / pi + pi_hat * vape * vape - T::one()
}

/// The VOPE written with the previous posterior precision and the total
/// volatility instead of the prediction precision.
#[inline]
pub fn vope_from_volatility<T: Scalar>(pi_previous: T, vol_total: T, pi: T, vape: T) -> T {
    (pi.recip() + vape * vape) / (pi_previous.recip() + vol_total) - T::one()
}

/// Prediction errors a node sends to its parents.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionErrors<T> {
    pub vape: T,
    /// `None` without volatility parents.
    pub vope: Option<T>,
    pub per_value_parent: Vec<T>,
    pub per_volatility_parent: Vec<T>,
}

/// PE step for a node whose posterior for this trial is known.
pub fn pe_step<T: Scalar>(state: &NodeState<T>) -> PredictionErrors<T> {
    let delta = vape(state.mu, state.mu_hat);
    let has_volatility_parents = !state.per_volatility_parent.is_empty();
    PredictionErrors {
        vape: delta,
        vope: has_volatility_parents.then(|| vope(state.pi_hat, state.pi, delta)),
        per_value_parent: state
            .per_value_parent
            .iter()
            .map(|p| vape(state.mu, p.mu_hat))
            .collect(),
        per_volatility_parent: state
            .per_volatility_parent
            .iter()
            .map(|p| vope(p.pi_hat, state.pi, delta))
            .collect(),
    }
}

/// Values recorded for one node at the end of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeRecord<T> {
    pub mu: T,
    /// Infinite for a binary node that observed its input without noise.
    pub pi: T,
    pub mu_hat: T,
    pub pi_hat: T,
    pub vape: T,
    /// VOPE, or NOPE for continuous inputs; `NaN` when not computed.
    pub vope: T,
    /// Input nodes only.
    pub surprise: Option<T>,
}

/// Everything computed during one trial, index-aligned with the network's
/// nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord<T> {
    pub trial: u64,
    pub t: T,
    pub nodes: Vec<NodeRecord<T>>,
}

impl<T: Scalar> TrialRecord<T> {
    /// Sum of the surprise of all input nodes.
    pub fn surprise(&self) -> T {
        self.nodes
            .iter()
            .filter_map(|n| n.surprise)
            .fold(T::zero(), |a, b| a + b)
    }
}

impl<T: Scalar> BeliefNetwork<T> {
    /// Runs one trial with observations given by input-node id.
    pub fn run_trial_named(&mut self, inputs: &[(&str, T)], t: T) -> Result<TrialRecord<T>> {
        let input_ids = self.input_ids();
        for (id, _) in inputs {
            if !input_ids.contains(id) {
                return Err(HgfError::UnknownInput(id.to_string()));
            }
        }
        let values = input_ids
            .iter()
            .map(|id| {
                inputs
                    .iter()
                    .find(|(k, _)| k == id)
                    .map(|&(_, v)| v)
                    .ok_or_else(|| HgfError::MissingInput(id.to_string()))
            })
            .collect::<Result<Vec<T>>>()?;
        self.run_trial(&values, t)
    }

    /// Runs one trial. `inputs` is aligned with [`BeliefNetwork::input_ids`].
    ///
    /// On error every belief is restored to its value before the call.
    pub fn run_trial(&mut self, inputs: &[T], t: T) -> Result<TrialRecord<T>> {
        let clock = TrialClock::new(t)?;
        let ids = self.input_ids();
        if inputs.len() != ids.len() {
            let missing = ids.get(inputs.len()).copied().unwrap_or("<extra>");
            return Err(HgfError::MissingInput(missing.to_string()));
        }
        let snapshot = self.beliefs.clone();
        match self.step(inputs, clock.get()) {
            Ok(record) => {
                self.trial += 1;
                Ok(record)
            }
            Err(e) => {
                self.beliefs = snapshot;
                Err(e)
            }
        }
    }

    /// Runs consecutive trials, stopping at the first error.
    pub fn filter<'a>(
        &mut self,
        rows: impl IntoIterator<Item = (&'a [T], T)>,
    ) -> Result<Vec<TrialRecord<T>>> {
        rows.into_iter()
            .map(|(inputs, t)| self.run_trial(inputs, t))
            .collect()
    }

    fn step(&mut self, inputs: &[T], t: T) -> Result<TrialRecord<T>> {
        let trial = self.trial + 1;
        self.update_counts.iter_mut().for_each(|c| *c = 0);

        let mut observation = vec![None; self.nodes.len()];
        let mut k = 0;
        for (i, node) in self.nodes.iter().enumerate() {
            if node.kind.is_input() {
                observation[i] = Some(inputs[k]);
                k += 1;
            }
        }

        let order = self.topological_order().to_vec();
        for &i in order.iter().rev() {
            self.predict_node(i, t).map_err(|e| e.at(&self.nodes[i].id, "", trial))?;
        }
        for &i in &order {
            self.update_node(i, observation[i], trial)?;
            self.update_counts[i] += 1;
        }
        debug_assert!(self.update_counts.iter().all(|&c| c == 1));
        Ok(self.record(trial, t))
    }

    fn predict_node(&mut self, i: usize, t: T) -> StepResult<()> {
        let params = self.nodes[i].params;
        match self.nodes[i].kind {
            NodeKind::ContinuousState => {
                let value: Vec<ValueCoupling<'_, T>> = self.value_parents[i]
                    .iter()
                    .map(|&e| {
                        let edge = &self.edges[e];
                        ValueCoupling {
                            strength: edge.strength,
                            transform: &edge.transform,
                            parent_mu: self.beliefs[edge.parent].mu_and_mu_hat().0,
                        }
                    })
                    .collect();
                let volatility: Vec<VolatilityCoupling<T>> = self.volatility_parents[i]
                    .iter()
                    .map(|&e| VolatilityCoupling {
                        strength: self.edges[e].strength,
                        parent_mu: self.beliefs[self.edges[e].parent].mu_and_mu_hat().0,
                    })
                    .collect();
                let NodeBelief::State(state) = &self.beliefs[i] else {
                    unreachable!("state node holds a state belief")
                };
                let p = predict(state.posterior(), params.rho, params.omega, &value, &volatility, t)?;
                let NodeBelief::State(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                state.mu_hat = p.mu_hat;
                state.pi_hat = p.pi_hat;
                state.drift_total = p.drift_total;
                state.vol_total = p.vol_total;
                state.gamma = p.gamma;
                state.per_value_parent = p.per_value_parent;
                state.per_volatility_parent = p.per_volatility_parent;
            }
            NodeKind::BinaryState => {
                let parent = self.edges[self.value_parents[i][0]].parent;
                let parent_mu_hat = self.beliefs[parent].mu_and_mu_hat().1;
                let (mu_hat, pi_hat) = io_nodes::binary_node_predict(parent_mu_hat);
                let NodeBelief::Binary(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                state.mu_hat = mu_hat;
                state.pi_hat = pi_hat;
            }
            NodeKind::ContinuousInput => {
                let value_parent = self.edges[self.value_parents[i][0]].parent;
                let vapa_mu_hat = self.beliefs[value_parent].mu_and_mu_hat().1;
                let noise = self.noise_parent[i].map(|e| {
                    (
                        self.edges[e].strength,
                        self.beliefs[self.edges[e].parent].mu_and_mu_hat().0,
                    )
                });
                let (mu_hat, pi_hat) = io_nodes::cont_input_predict(vapa_mu_hat, params.zeta, noise)?;
                let NodeBelief::ContinuousInput(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                state.mu_hat = mu_hat;
                state.pi_hat = pi_hat;
            }
            NodeKind::BinaryInput => {
                let parent = self.edges[self.value_parents[i][0]].parent;
                let mu_hat = self.beliefs[parent].mu_and_mu_hat().1;
                let NodeBelief::BinaryInput(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                state.mu_hat = mu_hat;
            }
        }
        Ok(())
    }

    fn update_node(&mut self, i: usize, observation: Option<T>, trial: u64) -> Result<()> {
        let id = self.nodes[i].id.clone();
        let params = self.nodes[i].params;
        match self.nodes[i].kind {
            NodeKind::ContinuousInput => {
                let u = observation.expect("input node has an observation");
                let NodeBelief::ContinuousInput(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                if !u.is_finite() {
                    return Err(HgfError::InvalidObservation {
                        node: id,
                        trial,
                        value: u.as_f64(),
                        reason: "continuous inputs must be finite",
                    });
                }
                state.observe(u);
            }
            NodeKind::BinaryInput => {
                let u = observation.expect("input node has an observation");
                let mode = params.binary_precision();
                let NodeBelief::BinaryInput(state) = &mut self.beliefs[i] else {
                    unreachable!()
                };
                let step = io_nodes::binary_input_step(u, mode, params.eta0, params.eta1, state.mu_hat)
                    .map_err(|e| e.at(&id, "", trial))?;
                state.u = u;
                state.message = Some(step.message);
                state.surprise = step.surprise;
            }
            NodeKind::BinaryState => {
                let child = self.child_edges[i].first().map(|&e| self.edges[e].child);
                let NodeBelief::Binary(state) = &self.beliefs[i] else {
                    unreachable!()
                };
                let mut next = state.clone();
                match child {
                    Some(c) => {
                        let message = self.beliefs[c]
                            .as_binary_input()
                            .and_then(|s| s.message)
                            .ok_or_else(|| HgfError::Sequencing {
                                node: id.clone(),
                                trial,
                                detail: format!(
                                    "binary input `{}` has not observed yet",
                                    self.nodes[c].id
                                ),
                            })?;
                        let post = io_nodes::binary_node_update(state.mu_hat, message)
                            .map_err(|e| e.at(&id, &self.nodes[c].id, trial))?;
                        next.mu = post.mu;
                        next.certain = post.certain;
                        next.pi = post.pi;
                    }
                    None => {
                        next.mu = state.mu_hat;
                        next.pi = state.pi_hat;
                        next.certain = false;
                    }
                }
                next.delta = vape(next.mu, next.mu_hat);
                self.beliefs[i] = NodeBelief::Binary(next);
            }
            NodeKind::ContinuousState => self.update_state(i, trial)?,
        }
        Ok(())
    }

    fn update_state(&mut self, i: usize, trial: u64) -> Result<()> {
        let NodeBelief::State(state) = &self.beliefs[i] else {
            unreachable!()
        };
        let expansion = state.mu;
        let mut belief = state.prediction();
        let id = &self.nodes[i].id;

        for &e in &self.child_edges[i] {
            let edge = &self.edges[e];
            let c = edge.child;
            let child_id = &self.nodes[c].id;
            let fail = |err: StepError| err.at(id, child_id, trial);
            belief = match (&self.beliefs[c], edge.kind) {
                (NodeBelief::State(child), CouplingKind::Value) => {
                    let slot = self.value_parents[c]
                        .iter()
                        .position(|&x| x == e)
                        .expect("edge listed at child");
                    let vape = child.per_value_parent[slot].vape;
                    update_value_parent(belief, expansion, edge.strength, &edge.transform, child.pi_hat, vape)
                        .map_err(fail)?
                }
                (NodeBelief::State(child), CouplingKind::Volatility) => {
                    let slot = self.volatility_parents[c]
                        .iter()
                        .position(|&x| x == e)
                        .expect("edge listed at child");
                    let terms = child.per_volatility_parent[slot];
                    update_volatility_parent(belief, edge.strength, terms.gamma, terms.vope)
                        .map_err(fail)?
                }
                (NodeBelief::ContinuousInput(child), CouplingKind::Value) => {
                    update_value_parent(belief, expansion, edge.strength, &edge.transform, child.pi_hat, child.delta)
                        .map_err(fail)?
                }
                (NodeBelief::ContinuousInput(child), CouplingKind::Noise) => {
                    let vapa = self.edges[self.value_parents[c][0]].parent;
                    if self.update_counts[vapa] == 0 {
                        return Err(HgfError::Sequencing {
                            node: id.clone(),
                            trial,
                            detail: format!(
                                "noise update of `{child_id}` before its value parent `{}` has a posterior",
                                self.nodes[vapa].id
                            ),
                        });
                    }
                    let vapa_posterior = self.beliefs[vapa]
                        .as_state()
                        .expect("value parent of a continuous input is a state node")
                        .posterior();
                    let epsilon = io_nodes::nope(child.pi_hat, vapa_posterior, child.u);
                    let next = io_nodes::update_noise_parent(belief, edge.strength, epsilon).map_err(fail)?;
                    if let NodeBelief::ContinuousInput(child) = &mut self.beliefs[c] {
                        child.epsilon = Some(epsilon);
                    }
                    next
                }
                (NodeBelief::Binary(child), CouplingKind::Value) => {
                    io_nodes::update_binary_parent(belief, child.pi_hat, child.delta).map_err(fail)?
                }
                (child, kind) => unreachable!("validated network has no {kind:?} edge from {child:?}"),
            };
        }

        if !(belief.mu.is_finite() && belief.pi.is_finite()) {
            return Err(HgfError::NonFinite {
                node: id.clone(),
                trial,
                quantity: "posterior",
                value: belief.mu.as_f64(),
                argument: belief.pi.as_f64(),
            });
        }

        let NodeBelief::State(state) = &mut self.beliefs[i] else {
            unreachable!()
        };
        state.mu = belief.mu;
        state.pi = belief.pi;
        let pe = pe_step(state);
        state.vape = pe.vape;
        state.vope = pe.vope.unwrap_or(T::nan());
        for (slot, d) in state.per_value_parent.iter_mut().zip(pe.per_value_parent) {
            slot.vape = d;
        }
        for (slot, d) in state.per_volatility_parent.iter_mut().zip(pe.per_volatility_parent) {
            slot.vope = d;
        }
        Ok(())
    }

    fn record(&self, trial: u64, t: T) -> TrialRecord<T> {
        let nodes = self
            .beliefs
            .iter()
            .enumerate()
            .map(|(i, b)| match b {
                NodeBelief::State(s) => NodeRecord {
                    mu: s.mu,
                    pi: s.pi,
                    mu_hat: s.mu_hat,
                    pi_hat: s.pi_hat,
                    vape: s.vape,
                    vope: s.vope,
                    surprise: None,
                },
                NodeBelief::Binary(s) => NodeRecord {
                    mu: s.mu,
                    pi: if s.certain { T::infinity() } else { s.pi },
                    mu_hat: s.mu_hat,
                    pi_hat: s.pi_hat,
                    vape: s.delta,
                    vope: T::nan(),
                    surprise: None,
                },
                NodeBelief::ContinuousInput(s) => {
                    let vapa = self.edges[self.value_parents[i][0]].parent;
                    let pi = self.beliefs[vapa].as_state().map_or(T::nan(), |p| p.pi);
                    NodeRecord {
                        mu: s.u,
                        pi,
                        mu_hat: s.mu_hat,
                        pi_hat: s.pi_hat,
                        vape: s.delta,
                        vope: s.epsilon.unwrap_or(T::nan()),
                        surprise: Some(s.surprise),
                    }
                }
                NodeBelief::BinaryInput(s) => {
                    let pi_hat = match self.nodes[i].params.binary_precision() {
                        io_nodes::BinaryPrecision::Infinite => T::infinity(),
                        io_nodes::BinaryPrecision::Finite(p) => p,
                    };
                    NodeRecord {
                        mu: s.u,
                        pi: pi_hat,
                        mu_hat: s.mu_hat,
                        pi_hat,
                        vape: s.u - s.mu_hat,
                        vope: T::nan(),
                        surprise: Some(s.surprise),
                    }
                }
            })
            .collect();
        TrialRecord { trial, t, nodes }
    }
}
