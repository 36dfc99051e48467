//! Error-rate vs. parity-gap trade-off between metrics.

use serde::{Deserialize, Serialize};

use super::AuditReport;
use crate::biasstats::{BiasSummary, PhiValue};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub metric_name: String,
    pub er_total: f64,
    /// Distance of the bias value from parity, `|1 - ratio|` or `|1 - Φ|`.
    pub gap: f64,
    pub on_frontier: bool,
}

/// Flags the non-dominated points under joint minimization of `(er_total, gap)`.
///
/// A point is dominated when another is no worse on both coordinates and strictly
/// better on one, so points with identical coordinates stay on the frontier together.
/// Input order is preserved.
pub fn pareto_points(points: &[(String, f64, f64)]) -> Vec<ParetoPoint> {
    points
        .iter()
        .map(|(name, er, gap)| {
            let dominated = points
                .iter()
                .any(|(_, e, g)| e <= er && g <= gap && (e < er || g < gap));
            ParetoPoint { metric_name: name.clone(), er_total: *er, gap: *gap, on_frontier: !dominated }
        })
        .collect()
}

/// Parity gap of a cell: from the mean ratio for ambiguous cells, from Φ otherwise.
/// Balanced zero error rates count as parity; an infinite Φ has no finite gap.
pub fn bias_gap(summary: &BiasSummary) -> Option<f64> {
    if let Some(mean) = summary.ratio.as_ref().and_then(|r| r.mean) {
        return Some((1.0 - mean).abs());
    }
    match summary.phi? {
        PhiValue::Finite(v) => Some((1.0 - v).abs()),
        PhiValue::UndefinedBalanced => Some(0.0),
        PhiValue::UndefinedInfinite => None,
    }
}

/// One `(name, er_total, gap)` point per unambiguous condition of a report, from the
/// cross-language mean when the cells carry languages and from the cell otherwise.
pub fn pareto_candidates(report: &AuditReport) -> Vec<(String, f64, f64)> {
    let scorer = &report.metadata.scorer;
    let mut out = Vec::new();
    for mean in report.cross_language.iter().filter(|m| m.condition.is_unambiguous()) {
        if let (Some(er), Some(phi)) = (mean.er_total, mean.phi) {
            out.push((format!("{scorer} {}", mean.condition), er, (1.0 - phi).abs()));
        }
    }
    for cell in report.cells.iter().filter(|c| c.condition.is_unambiguous() && c.language_pair.is_none()) {
        if let (Some(er), Some(gap)) = (cell.summary.er_total, bias_gap(&cell.summary)) {
            out.push((format!("{scorer} {}", cell.condition), er, gap));
        }
    }
    out
}
