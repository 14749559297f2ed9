//! Plain-text trajectory output.

use crate::engine::TrialRecord;
use crate::network::BeliefNetwork;
use crate::scalar::Scalar;

/// Shortest decimal text that parses back to the same `f64`.
///
/// Plain notation in `[1e-5, 1e16)`, scientific otherwise; `inf`, `-inf`
/// and `NaN` for non-finite values.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else if v == 0.0 || (1e-5..1e16).contains(&v.abs()) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Column suffixes written for every node; inputs also get `surprise`.
pub const STATE_COLUMNS: [&str; 6] = ["mu", "pi", "muhat", "pihat", "vape", "vope"];

fn sorted_nodes<T: Scalar>(net: &BeliefNetwork<T>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..net.len()).collect();
    idx.sort_by(|&a, &b| net.nodes()[a].id.cmp(&net.nodes()[b].id));
    idx
}

pub fn trajectory_header<T: Scalar>(net: &BeliefNetwork<T>) -> Vec<String> {
    let mut cols = vec!["trial".to_string(), "t".to_string()];
    for i in sorted_nodes(net) {
        let node = &net.nodes()[i];
        for c in STATE_COLUMNS {
            cols.push(format!("{}.{c}", node.id));
        }
        if node.kind.is_input() {
            cols.push(format!("{}.surprise", node.id));
        }
    }
    cols
}

/// Full trajectory CSV: one row per record, nodes in id order.
pub fn trajectory_csv<T: Scalar>(net: &BeliefNetwork<T>, records: &[TrialRecord<T>]) -> String {
    let order = sorted_nodes(net);
    let mut out = trajectory_header(net).join(",");
    out.push('\n');
    for rec in records {
        out.push_str(&rec.trial.to_string());
        out.push(',');
        out.push_str(&format_value(rec.t.as_f64()));
        for &i in &order {
            let r = &rec.nodes[i];
            for v in [r.mu, r.pi, r.mu_hat, r.pi_hat, r.vape, r.vope] {
                out.push(',');
                out.push_str(&format_value(v.as_f64()));
            }
            if net.nodes()[i].kind.is_input() {
                out.push(',');
                out.push_str(&format_value(r.surprise.map_or(f64::NAN, Scalar::as_f64)));
            }
        }
        out.push('\n');
    }
    out
}
