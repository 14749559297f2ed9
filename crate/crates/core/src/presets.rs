//! Ready-made network configurations.

use crate::network::{CouplingKind, EdgeConfig, NetworkConfig, NodeKind, NodeParams};

fn state(mu0: f64, pi0: f64, omega: f64) -> NodeParams {
    NodeParams {
        mu0,
        pi0,
        omega,
        ..Default::default()
    }
}

/// Continuous input `u` with value parent `x1`; `x2` is the volatility
/// parent of `x1` and `x3` the volatility parent of `x2`.
pub fn three_level(zeta: f64, omegas: [f64; 3], kappas: [f64; 2]) -> NetworkConfig {
    let mut c = NetworkConfig::default();
    c.node("u", NodeKind::ContinuousInput, NodeParams { zeta, ..Default::default() })
        .node("x1", NodeKind::ContinuousState, state(0.0, 1.0, omegas[0]))
        .node("x2", NodeKind::ContinuousState, state(0.0, 1.0, omegas[1]))
        .node("x3", NodeKind::ContinuousState, state(0.0, 1.0, omegas[2]))
        .edge(EdgeConfig::new("u", "x1", CouplingKind::Value, 1.0))
        .edge(EdgeConfig::new("x1", "x2", CouplingKind::Volatility, kappas[0]))
        .edge(EdgeConfig::new("x2", "x3", CouplingKind::Volatility, kappas[1]));
    c
}

/// Binary input `u` observed through binary node `b`, whose logit `x2` has
/// volatility parent `x3`.
pub fn binary_three_level(omega2: f64, omega3: f64, kappa: f64) -> NetworkConfig {
    let mut c = NetworkConfig::default();
    c.node("u", NodeKind::BinaryInput, NodeParams::default())
        .node("b", NodeKind::BinaryState, NodeParams::default())
        .node("x2", NodeKind::ContinuousState, state(0.0, 1.0, omega2))
        .node("x3", NodeKind::ContinuousState, state(1.0, 1.0, omega3))
        .edge(EdgeConfig::new("u", "b", CouplingKind::Value, 1.0))
        .edge(EdgeConfig::new("b", "x2", CouplingKind::Value, 1.0))
        .edge(EdgeConfig::new("x2", "x3", CouplingKind::Volatility, kappa));
    c
}

/// Eleven hidden states and two outcomes: a continuous outcome `u_a` and a
/// binary outcome `u_b`, with local volatility states `v_*` and a shared
/// state `x_f` driving the volatility beliefs of `x_a` and `x_d`.
///
/// Value parents act as drift rates, so the drift states are slow and weakly
/// coupled to keep long simulations bounded.
pub fn two_outcome() -> NetworkConfig {
    let mut c = NetworkConfig::default();
    c.node("u_a", NodeKind::ContinuousInput, NodeParams { zeta: -2.0, ..Default::default() })
        .node("u_b", NodeKind::BinaryInput, NodeParams::default());
    c.node("x_a", NodeKind::ContinuousState, state(0.0, 1.0, -2.0))
        .node("x_d", NodeKind::ContinuousState, state(0.0, 1.0, -4.0));
    for id in ["x_c", "x_e", "x_f"] {
        c.node(id, NodeKind::ContinuousState, state(0.0, 1.0, -10.0));
    }
    for id in ["v_a", "v_c", "v_d", "v_e", "v_f"] {
        c.node(id, NodeKind::ContinuousState, state(0.0, 1.0, -6.0));
    }
    c.node("x_b", NodeKind::BinaryState, NodeParams::default());
    let value = |child: &str, parent: &str, a: f64| EdgeConfig::new(child, parent, CouplingKind::Value, a);
    let vol = |child: &str, parent: &str| EdgeConfig::new(child, parent, CouplingKind::Volatility, 1.0);
    c.edge(value("u_a", "x_a", 1.0))
        .edge(value("x_a", "x_c", 0.02))
        .edge(vol("x_a", "v_a"))
        .edge(value("v_a", "x_f", 0.02))
        .edge(vol("x_c", "v_c"))
        .edge(value("u_b", "x_b", 1.0))
        .edge(value("x_b", "x_d", 1.0))
        .edge(value("x_d", "x_e", 0.02))
        .edge(vol("x_d", "v_d"))
        .edge(value("v_d", "x_f", 0.02))
        .edge(vol("x_e", "v_e"))
        .edge(vol("x_f", "v_f"));
    c.metadata.insert("description".into(), "two outcomes, shared volatility driver".into());
    c
}
