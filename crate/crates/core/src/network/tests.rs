use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::presets;

fn minimal() -> NetworkConfig {
    let mut c = NetworkConfig::default();
    c.node("u", NodeKind::ContinuousInput, NodeParams::default())
        .node("x", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("u", "x", CouplingKind::Value, 1.0));
    c
}

#[test]
fn minimal_chain_is_valid() {
    let r = validate(&minimal());
    assert!(r.is_empty(), "{r}");
    assert!(r.warnings.is_empty());
}

#[test]
fn self_loop_is_a_cycle() {
    let mut c = minimal();
    c.edge(EdgeConfig::new("x", "x", CouplingKind::Volatility, 1.0));
    assert!(validate(&c).has(IssueCode::Cycle));
}

#[test]
fn longer_cycle_is_reported_with_members() {
    let mut c = minimal();
    c.node("y", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("x", "y", CouplingKind::Value, 1.0))
        .edge(EdgeConfig::new("y", "x", CouplingKind::Volatility, 1.0));
    let r = validate(&c);
    let cycle = r.violations.iter().find(|i| i.code == IssueCode::Cycle).expect("cycle");
    assert!(cycle.subject.contains('x') && cycle.subject.contains('y'), "{cycle}");
}

#[test]
fn noise_edge_into_state_is_a_kind_violation() {
    let mut c = minimal();
    c.node("n", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("x", "n", CouplingKind::Noise, 1.0));
    let r = validate(&c);
    assert!(r.has(IssueCode::KindMismatch), "{r}");
    assert_eq!(r.violations.len(), 1, "{r}");
    assert_eq!(r.violations[0].subject, "x->n");
}

/// Allowed (edge, child, parent) combinations, written out from the
/// structural rules independently of `validate`.
fn rule_table(kind: CouplingKind, child: NodeKind, parent: NodeKind) -> bool {
    use CouplingKind::*;
    use NodeKind::*;
    let allowed: &[(CouplingKind, NodeKind, NodeKind)] = &[
        (Value, ContinuousState, ContinuousState),
        (Value, ContinuousInput, ContinuousState),
        (Value, BinaryState, ContinuousState),
        (Value, BinaryInput, BinaryState),
        (Volatility, ContinuousState, ContinuousState),
        (Noise, ContinuousInput, ContinuousState),
    ];
    allowed.contains(&(kind, child, parent))
}

#[test]
fn edge_kind_rules_match_independent_table() {
    use CouplingKind::*;
    use NodeKind::*;
    let kinds = [ContinuousState, BinaryState, ContinuousInput, BinaryInput];
    let mut checked = 0;
    for edge in [Value, Volatility, Noise] {
        for child in kinds {
            for parent in kinds {
                let mut c = NetworkConfig::default();
                c.node("c", child, NodeParams::default())
                    .node("p", parent, NodeParams::default())
                    .edge(EdgeConfig::new("c", "p", edge, 1.0));
                let flagged = validate(&c).has(IssueCode::KindMismatch);
                assert_eq!(
                    !flagged,
                    rule_table(edge, child, parent),
                    "{edge:?} {child:?} <- {parent:?}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 48);
}

#[test]
fn parent_counts_are_enforced() {
    let mut c = NetworkConfig::default();
    c.node("u", NodeKind::ContinuousInput, NodeParams::default());
    assert!(validate(&c).has(IssueCode::ParentCount));

    let mut c = minimal();
    c.node("n1", NodeKind::ContinuousState, NodeParams::default())
        .node("n2", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("u", "n1", CouplingKind::Noise, 1.0))
        .edge(EdgeConfig::new("u", "n2", CouplingKind::Noise, 1.0));
    assert!(validate(&c).has(IssueCode::ParentCount));

    let mut c = NetworkConfig::default();
    c.node("b", NodeKind::BinaryState, NodeParams::default());
    assert!(validate(&c).has(IssueCode::ParentCount));
}

#[test]
fn binary_state_feeds_a_single_input() {
    let mut c = presets::binary_three_level(-2.0, -6.0, 1.0);
    c.node("u2", NodeKind::BinaryInput, NodeParams::default())
        .edge(EdgeConfig::new("u2", "b", CouplingKind::Value, 1.0));
    assert!(validate(&c).has(IssueCode::ChildCount));
}

#[test]
fn input_value_edge_is_fixed() {
    let mut c = minimal();
    c.edges[0].strength = 2.0;
    assert!(validate(&c).has(IssueCode::FixedCoupling));
    let mut c = minimal();
    c.edges[0].transform = Some("relu".into());
    assert!(validate(&c).has(IssueCode::FixedCoupling));
}

#[test]
fn noise_parent_distinct_from_value_parent() {
    let mut c = minimal();
    c.edge(EdgeConfig::new("u", "x", CouplingKind::Noise, 1.0));
    assert!(validate(&c).has(IssueCode::KindMismatch));
}

#[test]
fn noise_parent_below_value_parent_is_an_ordering_cycle() {
    // n is a value child of x, so x cannot be updated before n.
    let mut c = minimal();
    c.node("n", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("u", "n", CouplingKind::Noise, 1.0))
        .edge(EdgeConfig::new("n", "x", CouplingKind::Value, 1.0));
    assert!(validate(&c).has(IssueCode::Cycle));
}

#[test]
fn parameter_problems() {
    let mut c = minimal();
    c.nodes[1].params.pi0 = 0.0;
    assert!(validate(&c).has(IssueCode::InvalidParameter));
    let mut c = minimal();
    c.nodes[1].params.omega = f64::NAN;
    assert!(validate(&c).has(IssueCode::InvalidParameter));

    let mut c = presets::binary_three_level(-2.0, -6.0, 1.0);
    c.nodes[0].params.zeta = -1.0;
    c.nodes[0].params.eta0 = 0.5;
    c.nodes[0].params.eta1 = 0.5;
    assert!(validate(&c).has(IssueCode::InvalidParameter));
    c.nodes[0].params.zeta = 0.0;
    assert!(validate(&c).is_empty());
}

#[test]
fn dangling_duplicate_and_unknown_transform() {
    let mut c = minimal();
    c.edge(EdgeConfig::new("x", "ghost", CouplingKind::Value, 1.0));
    let r = validate(&c);
    assert!(r.has(IssueCode::DanglingEndpoint));
    assert!(r.violations[0].message.contains("ghost"));

    let mut c = minimal();
    c.edge(EdgeConfig::new("u", "x", CouplingKind::Value, 1.0));
    assert!(validate(&c).has(IssueCode::DuplicateEdge));

    let mut c = minimal();
    c.node("y", NodeKind::ContinuousState, NodeParams::default())
        .edge(EdgeConfig::new("x", "y", CouplingKind::Value, 1.0).with_transform("cube"));
    assert!(validate(&c).has(IssueCode::UnknownTransform));

    let mut c = minimal();
    c.node("x", NodeKind::ContinuousState, NodeParams::default());
    assert!(validate(&c).has(IssueCode::DuplicateId));
}

#[test]
fn warnings_do_not_fail_validation() {
    let c = presets::three_level(0.0, [-2.0, -4.0, -6.0], [1.0, 1.0]);
    let r = validate(&c);
    assert!(r.is_empty());
    assert!(r.warnings.iter().any(|w| w.code == IssueCode::NestedVolatility));

    let mut c = minimal();
    c.node("lonely", NodeKind::ContinuousState, NodeParams::default());
    let r = validate(&c);
    assert!(r.is_empty());
    assert!(r.warnings.iter().any(|w| w.code == IssueCode::Disconnected));
}

#[test]
fn two_outcome_network_builds_with_inputs_first() {
    let net = build::<f64>(&presets::two_outcome()).unwrap();
    assert_eq!(net.len(), 13);
    assert_eq!(net.nodes().iter().filter(|n| !n.kind.is_input()).count(), 11);
    assert_eq!(&net.topological_ids()[..2], &["u_a", "u_b"]);
}

#[test]
fn single_node_network() {
    let mut c = NetworkConfig::default();
    c.node("solo", NodeKind::ContinuousState, NodeParams::default());
    let net = build::<f64>(&c).unwrap();
    assert_eq!(net.topological_ids(), vec!["solo"]);
}

#[test]
fn build_rejects_invalid_config_with_report() {
    let mut c = minimal();
    c.edges[0].parent = "nope".into();
    match build::<f64>(&c) {
        Err(HgfError::Invalid(report)) => assert!(report.has(IssueCode::DanglingEndpoint)),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn build_initialises_predictions_to_priors() {
    let mut c = minimal();
    c.nodes[1].params.mu0 = 0.7;
    c.nodes[1].params.pi0 = 3.0;
    let net = build::<f64>(&c).unwrap();
    let s = net.belief("x").unwrap().as_state().unwrap();
    assert_eq!((s.mu, s.pi, s.mu_hat, s.pi_hat), (0.7, 3.0, 0.7, 3.0));
}

#[test]
fn canonical_config_round_trips_byte_identical() {
    let json = presets::three_level(-1.0, [-2.0, -4.0, -6.0], [1.0, 0.5]).to_json();
    let again = NetworkConfig::from_json(&json).unwrap().to_json();
    assert_eq!(json, again);
    let json = presets::two_outcome().to_json();
    assert_eq!(NetworkConfig::from_json(&json).unwrap().to_json(), json);
}

#[test]
fn defaults_are_filled_in() {
    let c = NetworkConfig::from_json(
        r#"{"nodes":[{"id":"x","kind":"continuous_state","params":{"omega":-3}}]}"#,
    )
    .unwrap();
    let p = c.nodes[0].params;
    assert_eq!((p.rho, p.omega, p.zeta, p.eta0, p.eta1, p.mu0, p.pi0), (0.0, -3.0, 0.0, 0.0, 1.0, 0.0, 1.0));
    assert!(c.edges.is_empty());
}

#[test]
fn unknown_field_is_named() {
    let err = NetworkConfig::from_json(
        r#"{"nodes":[{"id":"x","kind":"continuous_state","params":{"omgea":1}}],"edges":[]}"#,
    )
    .unwrap_err();
    let HgfError::Parse(msg) = err else { panic!() };
    assert!(msg.contains("omgea"), "{msg}");
    assert!(msg.contains("line 1"), "{msg}");

    let err = NetworkConfig::from_json(r#"{"nodes":[],"extra":1}"#).unwrap_err();
    assert!(err.to_string().contains("extra"));
    let err = NetworkConfig::from_json(r#"{"nodes":[{"id":"x","kind":"hidden"}]}"#).unwrap_err();
    assert!(err.to_string().contains("hidden"));
}

#[test]
fn to_config_after_build_is_identity_on_nodes_and_edges() {
    let cfg = presets::two_outcome();
    let back = build::<f64>(&cfg).unwrap().to_config();
    let nodes = |c: &NetworkConfig| {
        c.nodes
            .iter()
            .map(|n| (n.id.clone(), n.kind, format!("{:?}", n.params)))
            .collect::<BTreeSet<_>>()
    };
    let edges = |c: &NetworkConfig| {
        c.edges
            .iter()
            .map(|e| (e.child.clone(), e.parent.clone(), e.kind, e.strength.to_bits(), e.transform.clone()))
            .collect::<BTreeSet<_>>()
    };
    assert_eq!(nodes(&cfg), nodes(&back));
    assert_eq!(edges(&cfg), edges(&back));
    assert_eq!(cfg, back);
}

#[test]
fn binary_precision_mode_follows_zeta() {
    let mut p = NodeParams::default();
    assert_eq!(Params::<f64>::from_config(&p).binary_precision(), crate::io_nodes::BinaryPrecision::Infinite);
    p.zeta = 2.0f64.ln();
    assert_eq!(
        Params::<f64>::from_config(&p).binary_precision(),
        crate::io_nodes::BinaryPrecision::Finite(0.5)
    );
}

fn arb_kind() -> impl Strategy<Value = NodeKind> {
    prop_oneof![
        Just(NodeKind::ContinuousState),
        Just(NodeKind::BinaryState),
        Just(NodeKind::ContinuousInput),
        Just(NodeKind::BinaryInput),
    ]
}

fn arb_coupling() -> impl Strategy<Value = CouplingKind> {
    prop_oneof![
        Just(CouplingKind::Value),
        Just(CouplingKind::Volatility),
        Just(CouplingKind::Noise),
    ]
}

proptest! {
    #[test]
    fn validate_never_panics(
        kinds in proptest::collection::vec(arb_kind(), 0..8),
        edges in proptest::collection::vec((0usize..10, 0usize..10, arb_coupling(), -3.0f64..3.0, any::<bool>()), 0..16),
    ) {
        let mut c = NetworkConfig::default();
        for (i, k) in kinds.iter().enumerate() {
            c.node(&format!("n{i}"), *k, NodeParams::default());
        }
        for (a, b, k, s, relu) in edges {
            let mut e = EdgeConfig::new(&format!("n{a}"), &format!("n{b}"), k, s);
            if relu { e = e.with_transform("relu"); }
            c.edge(e);
        }
        let report = validate(&c);
        if report.is_empty() {
            let net = build::<f64>(&c).unwrap();
            let pos: Vec<usize> = {
                let mut p = vec![0; net.len()];
                for (k, &i) in net.topological_order().iter().enumerate() { p[i] = k; }
                p
            };
            for e in net.edges() {
                prop_assert!(pos[e.child] < pos[e.parent]);
            }
        }
    }

    #[test]
    fn random_dags_order_children_first(
        n in 1usize..12,
        raw in proptest::collection::vec((0usize..12, 0usize..12, any::<bool>()), 0..30),
    ) {
        let mut c = NetworkConfig::default();
        for i in 0..n {
            c.node(&format!("s{i:02}"), NodeKind::ContinuousState, NodeParams::default());
        }
        let mut seen = BTreeSet::new();
        for (a, b, vol) in raw {
            let (a, b) = (a % n, b % n);
            if a >= b { continue; }
            let kind = if vol { CouplingKind::Volatility } else { CouplingKind::Value };
            if seen.insert((a, b, kind)) {
                c.edge(EdgeConfig::new(&format!("s{a:02}"), &format!("s{b:02}"), kind, 0.5));
            }
        }
        let net = build::<f64>(&c).unwrap();
        let order = net.topological_order();
        prop_assert_eq!(order.len(), n);
        let mut pos = vec![0; n];
        for (k, &i) in order.iter().enumerate() { pos[i] = k; }
        for e in net.edges() {
            prop_assert!(pos[e.child] < pos[e.parent]);
        }
    }
}
