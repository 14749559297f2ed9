//! Input nodes and binary nodes.
//!
//! Continuous inputs relay an observation to a value parent (with unit
//! coupling) and optionally send a noise prediction error to a noise parent.
//! Binary inputs feed a binary node whose prediction is the logistic sigmoid
//! of its continuous value parent's prediction.

use crate::engine::{update_volatility_parent, Belief, StepError, StepResult};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousInputState<T> {
    /// Last observation; `NaN` before the first trial.
    pub u: T,
    pub mu_hat: T,
    pub pi_hat: T,
    pub delta: T,
    /// NOPE, present only with a noise parent.
    pub epsilon: Option<T>,
    /// Negative log predictive density of `u`, in nats.
    pub surprise: T,
}

impl<T: Scalar> ContinuousInputState<T> {
    pub fn initial(mu_hat: T, pi_hat: T) -> Self {
        Self {
            u: T::nan(),
            mu_hat,
            pi_hat,
            delta: T::zero(),
            epsilon: None,
            surprise: T::zero(),
        }
    }

    /// Stores `u` and computes the VAPE and surprise against the current
    /// prediction.
    pub fn observe(&mut self, u: T) {
        self.u = u;
        self.delta = u - self.mu_hat;
        self.surprise = gaussian_surprise(u, self.mu_hat, self.pi_hat);
        self.epsilon = None;
    }
}

/// Precision of the observation channel of a binary input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinaryPrecision<T> {
    Infinite,
    Finite(T),
}

/// What a binary input sends to its binary parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinaryObservation<T> {
    /// Noiseless observation of the outcome (0 or 1).
    Certain(T),
    /// Deviations of `u` from the two outcome-specific means.
    Noisy { pi_hat: T, delta1: T, delta0: T },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinaryInputState<T> {
    pub u: T,
    /// Prediction of the binary parent for the current trial.
    pub mu_hat: T,
    pub message: Option<BinaryObservation<T>>,
    pub surprise: T,
}

impl<T: Scalar> BinaryInputState<T> {
    pub fn initial() -> Self {
        Self {
            u: T::nan(),
            mu_hat: T::lit(0.5),
            message: None,
            surprise: T::zero(),
        }
    }
}

/// Belief of a binary node about the probability of outcome 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryNodeState<T> {
    pub mu: T,
    /// Meaningful only when `certain` is false.
    pub pi: T,
    pub mu_hat: T,
    pub pi_hat: T,
    pub delta: T,
    /// The outcome was observed without noise; the posterior precision is
    /// infinite.
    pub certain: bool,
}

impl<T: Scalar> BinaryNodeState<T> {
    pub fn initial(mu_hat: T) -> Self {
        let pi_hat = (mu_hat * (T::one() - mu_hat)).recip();
        Self {
            mu: mu_hat,
            pi: pi_hat,
            mu_hat,
            pi_hat,
            delta: T::zero(),
            certain: false,
        }
    }
}

/// Prediction of a continuous input: the value parent's predicted mean and
/// the precision implied by the log noise `zeta` plus, when present, the
/// noise parent's previous posterior mean weighted by `kappa`.
pub fn cont_input_predict<T: Scalar>(
    vapa_mu_hat: T,
    zeta: T,
    noise_parent: Option<(T, T)>,
) -> StepResult<(T, T)> {
    let exponent = match noise_parent {
        Some((kappa, mu)) => kappa * mu + zeta,
        None => zeta,
    };
    let pi_hat = exponent.exp().recip();
    if !(pi_hat.is_finite() && pi_hat > T::zero()) {
        return Err(StepError::NonFinite {
            quantity: "input precision",
            value: pi_hat.as_f64(),
            argument: exponent.as_f64(),
        });
    }
    Ok((vapa_mu_hat, pi_hat))
}

/// `-log N(u; mu_hat, 1/pi_hat)`.
pub fn gaussian_surprise<T: Scalar>(u: T, mu_hat: T, pi_hat: T) -> T {
    let d = u - mu_hat;
    T::lit(0.5) * ((T::TAU()).ln() - pi_hat.ln() + pi_hat * d * d)
}

/// Noise prediction error, measured against the value parent's posterior.
pub fn nope<T: Scalar>(pi_hat_input: T, value_parent: Belief<T>, u: T) -> T {
    let d = u - value_parent.mu;
    pi_hat_input / value_parent.pi + pi_hat_input * d * d - T::one()
}

/// Noise parents reuse the volatility-parent update with unit effective
/// precision, which reduces to `pi = pi_hat + kappa^2 (1 + eps) / 2`.
pub fn update_noise_parent<T: Scalar>(prior: Belief<T>, kappa: T, nope: T) -> StepResult<Belief<T>> {
    update_volatility_parent(prior, kappa, T::one(), nope)
}

/// All quantities produced by one continuous input for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousInputStep<T> {
    pub delta: T,
    pub value_parent: Belief<T>,
    pub epsilon: Option<T>,
    pub noise_parent: Option<Belief<T>>,
    pub surprise: T,
}

/// Processes one observation for an input whose only children of interest
/// are a value parent and an optional noise parent (`prediction`, `kappa`).
///
/// The value parent is updated first; the NOPE needs its posterior.
pub fn cont_input_step<T: Scalar>(
    u: T,
    mu_hat: T,
    pi_hat: T,
    value_parent_prediction: Belief<T>,
    noise_parent: Option<(Belief<T>, T)>,
) -> StepResult<ContinuousInputStep<T>> {
    let delta = u - mu_hat;
    let surprise = gaussian_surprise(u, value_parent_prediction.mu, pi_hat);
    let pi = value_parent_prediction.pi + pi_hat;
    let value_parent = Belief::new(value_parent_prediction.mu + pi_hat / pi * delta, pi);
    let (epsilon, noise_parent) = match noise_parent {
        Some((prediction, kappa)) => {
            let eps = nope(pi_hat, value_parent, u);
            (Some(eps), Some(update_noise_parent(prediction, kappa, eps)?))
        }
        None => (None, None),
    };
    Ok(ContinuousInputStep {
        delta,
        value_parent,
        epsilon,
        noise_parent,
        surprise,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryInputStep<T> {
    pub message: BinaryObservation<T>,
    pub surprise: T,
}

fn log_normal_density<T: Scalar>(u: T, mean: T, precision: T) -> T {
    let d = u - mean;
    T::lit(0.5) * (precision.ln() - T::TAU().ln() - precision * d * d)
}

fn log_sum_exp<T: Scalar>(a: T, b: T) -> T {
    let m = a.max(b);
    if m == T::neg_infinity() {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Surprise and upward message of a binary input given its parent's
/// prediction `mu_hat` (probability of outcome 1).
///
/// Noiseless surprise is the Bernoulli negative log-likelihood:
/// `-ln mu_hat` for `u = 1` and `-ln(1 - mu_hat)` for `u = 0`.
pub fn binary_input_step<T: Scalar>(
    u: T,
    precision: BinaryPrecision<T>,
    eta0: T,
    eta1: T,
    mu_hat: T,
) -> StepResult<BinaryInputStep<T>> {
    match precision {
        BinaryPrecision::Infinite => {
            let surprise = if u == T::one() {
                -mu_hat.ln()
            } else if u == T::zero() {
                -(T::one() - mu_hat).ln()
            } else {
                return Err(StepError::InvalidObservation {
                    value: u.as_f64(),
                    reason: "noiseless binary inputs must be 0 or 1",
                });
            };
            Ok(BinaryInputStep {
                message: BinaryObservation::Certain(u),
                surprise,
            })
        }
        BinaryPrecision::Finite(pi_hat) => {
            if !u.is_finite() {
                return Err(StepError::InvalidObservation {
                    value: u.as_f64(),
                    reason: "binary inputs must be finite",
                });
            }
            let one = mu_hat.ln() + log_normal_density(u, eta1, pi_hat);
            let zero = (T::one() - mu_hat).ln() + log_normal_density(u, eta0, pi_hat);
            Ok(BinaryInputStep {
                message: BinaryObservation::Noisy {
                    pi_hat,
                    delta1: u - eta1,
                    delta0: u - eta0,
                },
                surprise: -log_sum_exp(one, zero),
            })
        }
    }
}

/// `(mu_hat, pi_hat)` of a binary node from its value parent's prediction.
pub fn binary_node_predict<T: Scalar>(parent_mu_hat: T) -> (T, T) {
    let mu_hat = (T::one() + (-parent_mu_hat).exp()).recip();
    (mu_hat, (mu_hat * (T::one() - mu_hat)).recip())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinaryPosterior<T> {
    pub mu: T,
    /// Infinite when `certain`.
    pub pi: T,
    pub certain: bool,
}

/// Posterior of a binary node after its input's message.
pub fn binary_node_update<T: Scalar>(
    mu_hat: T,
    message: BinaryObservation<T>,
) -> StepResult<BinaryPosterior<T>> {
    match message {
        BinaryObservation::Certain(u) => Ok(BinaryPosterior {
            mu: u,
            pi: T::infinity(),
            certain: true,
        }),
        BinaryObservation::Noisy {
            pi_hat,
            delta1,
            delta0,
        } => {
            let half = T::lit(0.5);
            let one = mu_hat.ln() - half * pi_hat * delta1 * delta1;
            let zero = (T::one() - mu_hat).ln() - half * pi_hat * delta0 * delta0;
            let m = one.max(zero);
            if !m.is_finite() {
                return Err(StepError::MixtureUnderflow {
                    mu_hat: mu_hat.as_f64(),
                    pi_hat: pi_hat.as_f64(),
                    delta1: delta1.as_f64(),
                    delta0: delta0.as_f64(),
                });
            }
            let (w1, w0) = ((one - m).exp(), (zero - m).exp());
            Ok(BinaryPosterior {
                mu: w1 / (w1 + w0),
                pi: (mu_hat * (T::one() - mu_hat)).recip(),
                certain: false,
            })
        }
    }
}

/// Update of the continuous value parent of a binary node. The VAPE is not
/// weighted by the binary node's precision, and the precision gain is the
/// Bernoulli variance `1 / pi_hat_bin`.
pub fn update_binary_parent<T: Scalar>(
    prior: Belief<T>,
    pi_hat_binary: T,
    delta_binary: T,
) -> StepResult<Belief<T>> {
    let pi = prior.pi + pi_hat_binary.recip();
    if !(pi > T::zero() && pi.is_finite()) {
        return Err(StepError::NegativePrecision {
            prior: prior.pi.as_f64(),
            terms: vec![("binary_variance", pi_hat_binary.recip().as_f64())],
            result: pi.as_f64(),
        });
    }
    Ok(Belief::new(prior.mu + delta_binary / pi, pi))
}
