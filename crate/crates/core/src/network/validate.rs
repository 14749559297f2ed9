use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::fmt;

use super::config::{CouplingKind, NetworkConfig, NodeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IssueCode {
    DuplicateId,
    DanglingEndpoint,
    Cycle,
    KindMismatch,
    ParentCount,
    ChildCount,
    DuplicateEdge,
    FixedCoupling,
    UnknownTransform,
    InvalidParameter,
    // warnings
    NestedVolatility,
    Disconnected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: IssueCode,
    /// Node id, or `child->parent` for edges.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}] {}: {}", self.code, self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Issue>,
    pub warnings: Vec<Issue>,
}

impl ValidationReport {
    /// True when there are no violations. Warnings do not count.
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: IssueCode) -> bool {
        self.violations.iter().any(|i| i.code == code)
    }

    fn violation(&mut self, code: IssueCode, subject: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Issue {
            code,
            subject: subject.into(),
            message: message.into(),
        });
    }

    fn warning(&mut self, code: IssueCode, subject: impl Into<String>, message: impl Into<String>) {
        self.warnings.push(Issue {
            code,
            subject: subject.into(),
            message: message.into(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.violations {
            writeln!(f, "error {v}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning {w}")?;
        }
        Ok(())
    }
}

/// Kahn's algorithm over `n` nodes where `before[i]` lists nodes that must
/// come before `i`. Ready nodes are taken by ascending `rank`. On failure
/// returns the nodes that could not be ordered.
pub(crate) fn linear_extension(
    n: usize,
    precedes: &[(usize, usize)],
    rank: impl Fn(usize) -> (u8, String),
) -> Result<Vec<usize>, Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in precedes {
        succ[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: BinaryHeap<Reverse<((u8, String), usize)>> = (0..n)
        .filter(|&i| indegree[i] == 0)
        .map(|i| Reverse((rank(i), i)))
        .collect();
    let mut order = Vec::with_capacity(n);
    while let Some(Reverse((_, i))) = ready.pop() {
        order.push(i);
        for &j in &succ[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(Reverse((rank(j), j)));
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        let placed: BTreeSet<usize> = order.into_iter().collect();
        Err((0..n).filter(|i| !placed.contains(i)).collect())
    }
}

/// Precedence pairs (earlier, later) for the bottom-up update pass: every
/// child before its parents, and the value parent of a continuous input
/// before its noise parent.
pub(crate) fn update_precedence(
    kinds: &[NodeKind],
    edges: &[(usize, usize, CouplingKind)],
) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = edges.iter().map(|&(c, p, _)| (c, p)).collect();
    for (child, _) in kinds.iter().enumerate().filter(|(_, k)| **k == NodeKind::ContinuousInput) {
        let value: Vec<usize> = edges
            .iter()
            .filter(|e| e.0 == child && e.2 == CouplingKind::Value)
            .map(|e| e.1)
            .collect();
        let noise: Vec<usize> = edges
            .iter()
            .filter(|e| e.0 == child && e.2 == CouplingKind::Noise)
            .map(|e| e.1)
            .collect();
        for &v in &value {
            for &n in &noise {
                if v != n {
                    out.push((v, n));
                }
            }
        }
    }
    out
}

/// Checks the structural rules of a network. Never fails; every problem is
/// reported as data.
pub fn validate(config: &NetworkConfig) -> ValidationReport {
    validate_with(config, |id| {
        id == crate::coupling::LINEAR || id == crate::coupling::RELU
    })
}

/// Like [`validate`], with a caller-supplied set of known transform ids.
pub fn validate_with(config: &NetworkConfig, known_transform: impl Fn(&str) -> bool) -> ValidationReport {
    let mut report = ValidationReport::default();

    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, node) in config.nodes.iter().enumerate() {
        if index.insert(node.id.as_str(), i).is_some() {
            report.violation(IssueCode::DuplicateId, &node.id, "node id declared more than once");
        }
    }

    for node in &config.nodes {
        let p = &node.params;
        for (name, v) in [
            ("rho", p.rho),
            ("omega", p.omega),
            ("zeta", p.zeta),
            ("eta0", p.eta0),
            ("eta1", p.eta1),
            ("mu0", p.mu0),
            ("pi0", p.pi0),
        ] {
            if !v.is_finite() {
                report.violation(IssueCode::InvalidParameter, &node.id, format!("{name} must be finite, got {v}"));
            }
        }
        if node.kind == NodeKind::ContinuousState && (p.pi0.is_nan() || p.pi0 <= 0.0) {
            report.violation(IssueCode::InvalidParameter, &node.id, format!("pi0 must be > 0, got {}", p.pi0));
        }
        if node.kind == NodeKind::BinaryInput && p.zeta != 0.0 && p.eta0 == p.eta1 {
            report.violation(
                IssueCode::InvalidParameter,
                &node.id,
                "finite-precision binary input needs eta0 != eta1",
            );
        }
    }

    // Edges whose endpoints both resolve; used for all structural checks below.
    let mut resolved: Vec<(usize, usize, CouplingKind)> = Vec::new();
    let mut seen = BTreeSet::new();
    for edge in &config.edges {
        let subject = format!("{}->{}", edge.child, edge.parent);
        let (c, p) = match (index.get(edge.child.as_str()), index.get(edge.parent.as_str())) {
            (Some(&c), Some(&p)) => (c, p),
            (c, p) => {
                for (missing, role) in [(c.is_none(), &edge.child), (p.is_none(), &edge.parent)] {
                    if missing {
                        report.violation(IssueCode::DanglingEndpoint, &subject, format!("unknown node `{role}`"));
                    }
                }
                continue;
            }
        };
        if !edge.strength.is_finite() {
            report.violation(IssueCode::InvalidParameter, &subject, "coupling strength must be finite");
        }
        if !seen.insert((c, p, edge.kind)) {
            report.violation(
                IssueCode::DuplicateEdge,
                &subject,
                format!("{} edge declared more than once", edge.kind.as_str()),
            );
            continue;
        }
        if c == p {
            report.violation(IssueCode::Cycle, &subject, "node is its own parent");
            continue;
        }
        resolved.push((c, p, edge.kind));

        let ck = config.nodes[c].kind;
        let pk = config.nodes[p].kind;
        let kind_ok = match (edge.kind, ck, pk) {
            (_, _, NodeKind::ContinuousInput | NodeKind::BinaryInput) => false,
            (CouplingKind::Value, NodeKind::BinaryInput, NodeKind::BinaryState) => true,
            (CouplingKind::Value, NodeKind::BinaryInput, _) => false,
            (CouplingKind::Value, _, NodeKind::ContinuousState) => true,
            (CouplingKind::Volatility, NodeKind::ContinuousState, NodeKind::ContinuousState) => true,
            (CouplingKind::Noise, NodeKind::ContinuousInput, NodeKind::ContinuousState) => true,
            _ => false,
        };
        if !kind_ok {
            report.violation(
                IssueCode::KindMismatch,
                &subject,
                format!(
                    "{} edge from {} parent into {} child is not allowed",
                    edge.kind.as_str(),
                    pk.as_str(),
                    ck.as_str()
                ),
            );
        }

        match edge.kind {
            CouplingKind::Value => {
                let id = edge.transform_id();
                if !known_transform(id) {
                    report.violation(IssueCode::UnknownTransform, &subject, format!("unknown transform `{id}`"));
                }
                if ck != NodeKind::ContinuousState
                    && (edge.strength != 1.0 || id != crate::coupling::LINEAR)
                {
                    report.violation(
                        IssueCode::FixedCoupling,
                        &subject,
                        format!("value edge into {} must be linear with strength 1", ck.as_str()),
                    );
                }
            }
            CouplingKind::Volatility | CouplingKind::Noise => {
                if edge.transform.is_some() {
                    report.violation(
                        IssueCode::KindMismatch,
                        &subject,
                        "transforms apply to value edges only",
                    );
                }
            }
        }
    }

    let n = config.nodes.len();
    let count = |node: usize, kind: CouplingKind| {
        resolved.iter().filter(|e| e.0 == node && e.2 == kind).count()
    };
    for (i, node) in config.nodes.iter().enumerate() {
        let (value, vol, noise) = (
            count(i, CouplingKind::Value),
            count(i, CouplingKind::Volatility),
            count(i, CouplingKind::Noise),
        );
        let children = resolved.iter().filter(|e| e.1 == i).count();
        match node.kind {
            NodeKind::ContinuousInput => {
                if value != 1 {
                    report.violation(IssueCode::ParentCount, &node.id, format!("continuous input needs exactly one value parent, has {value}"));
                }
                if noise > 1 {
                    report.violation(IssueCode::ParentCount, &node.id, format!("continuous input allows at most one noise parent, has {noise}"));
                }
                let vp: Vec<usize> = resolved.iter().filter(|e| e.0 == i && e.2 == CouplingKind::Value).map(|e| e.1).collect();
                if resolved.iter().any(|e| e.0 == i && e.2 == CouplingKind::Noise && vp.contains(&e.1)) {
                    report.violation(IssueCode::KindMismatch, &node.id, "noise parent must differ from the value parent");
                }
            }
            NodeKind::BinaryInput => {
                if value + vol + noise != 1 {
                    report.violation(IssueCode::ParentCount, &node.id, format!("binary input needs exactly one parent, has {}", value + vol + noise));
                }
            }
            NodeKind::BinaryState => {
                if value != 1 || vol + noise != 0 {
                    report.violation(IssueCode::ParentCount, &node.id, "binary state needs exactly one value parent and nothing else");
                }
                if children > 1 {
                    report.violation(IssueCode::ChildCount, &node.id, format!("binary state feeds at most one binary input, has {children} children"));
                }
            }
            NodeKind::ContinuousState => {
                if value + vol + noise + children == 0 {
                    report.warning(IssueCode::Disconnected, &node.id, "state node has no edges; it only evolves its predictions");
                }
            }
        }
    }

    for &(c, p, k) in &resolved {
        if k == CouplingKind::Volatility && resolved.iter().any(|e| e.0 == p && e.2 == CouplingKind::Volatility) {
            report.warning(
                IssueCode::NestedVolatility,
                format!("{}->{}", config.nodes[c].id, config.nodes[p].id),
                "volatility parent has its own volatility parent",
            );
        }
    }

    if index.len() == n {
        let kinds: Vec<NodeKind> = config.nodes.iter().map(|n| n.kind).collect();
        let precedence = update_precedence(&kinds, &resolved);
        if let Err(stuck) = linear_extension(n, &precedence, |i| (0, config.nodes[i].id.clone())) {
            let ids: Vec<&str> = stuck.iter().map(|&i| config.nodes[i].id.as_str()).collect();
            report.violation(
                IssueCode::Cycle,
                ids.join(","),
                "nodes lie on or downstream of a cycle (including value-before-noise parent ordering)",
            );
        }
    }

    report
}
