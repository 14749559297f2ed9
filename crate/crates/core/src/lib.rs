//! Belief networks for the generalized Hierarchical Gaussian Filter.
//!
//! A network is a DAG of continuous state nodes, binary nodes and input
//! nodes joined by value, volatility and noise couplings. Every trial runs a
//! prediction pass over all nodes and then an update pass from the inputs
//! upward, driven by precision-weighted prediction errors.
//!
//! The numerical core is generic over the scalar type; [`Network`] and the
//! other aliases below fix it to `f64`.

pub mod coupling;
pub mod engine;
pub mod error;
pub mod generative;
pub mod io_nodes;
pub mod network;
pub mod output;
pub mod presets;
pub mod scalar;

pub use coupling::{builtin, check_derivatives, Transform, TransformRegistry};
pub use engine::{Belief, NodeBelief, NodeRecord, NodeState, TrialClock, TrialRecord};
pub use error::{HgfError, Result};
pub use generative::{simulate, GroundTruth, SimulationSpec, Times};
pub use network::{
    build, validate, BeliefNetwork, CouplingKind, EdgeConfig, NetworkConfig, NodeConfig, NodeKind,
    NodeParams, ValidationReport,
};
pub use scalar::Scalar;

pub type Network = BeliefNetwork<f64>;
pub type Network32 = BeliefNetwork<f32>;
pub type Record = TrialRecord<f64>;
pub type Record32 = TrialRecord<f32>;
pub type State = NodeState<f64>;
pub type Registry = TransformRegistry<f64>;
