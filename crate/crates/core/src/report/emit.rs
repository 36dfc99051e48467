//! Serializers for audit reports: structured JSON, CSV cell tables, and markdown
//! tables laid out like published bias tables.

use std::fmt::Write as _;
use std::str::FromStr;

use super::{AuditCell, AuditReport};
use crate::biasstats::{BiasSummary, PhiValue};
use crate::downstream::FilterStats;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Structured,
    CsvTables,
    MarkdownTables,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "structured" | "json" => Ok(Format::Structured),
            "csv_tables" | "csv" => Ok(Format::CsvTables),
            "markdown_tables" | "markdown" | "md" => Ok(Format::MarkdownTables),
            other => Err(format!("unknown format `{other}` (structured, csv_tables, markdown_tables)")),
        }
    }
}

/// Serializes `report`; the same report always yields the same bytes.
pub fn emit(report: &AuditReport, format: Format) -> Vec<u8> {
    match format {
        Format::Structured => {
            let mut out = report.to_json().into_bytes();
            out.push(b'\n');
            out
        }
        Format::CsvTables => csv_cells(report),
        Format::MarkdownTables => markdown(report).into_bytes(),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn phi_cell(p: Option<PhiValue>) -> String {
    match p {
        Some(PhiValue::Finite(v)) => v.to_string(),
        Some(PhiValue::UndefinedBalanced) => "undefined_balanced".into(),
        Some(PhiValue::UndefinedInfinite) => "undefined_infinite".into(),
        None => String::new(),
    }
}

const CSV_HEADER: [&str; 16] = [
    "metric",
    "language_pair",
    "condition",
    "n_instances",
    "er_total",
    "er_f",
    "er_m",
    "phi",
    "phi_p_value",
    "tie_rate",
    "ratio_mean",
    "ratio_ci95_low",
    "ratio_ci95_high",
    "t_statistic",
    "t_p_value",
    "excluded_zero_denominator",
];

fn csv_row(metric: &str, cell: &AuditCell) -> Vec<String> {
    let s = &cell.summary;
    let r = s.ratio.as_ref();
    vec![
        metric.to_string(),
        cell.language_pair.clone().unwrap_or_default(),
        cell.condition.to_string(),
        s.n_instances.to_string(),
        opt(s.er_total),
        opt(s.er_f),
        opt(s.er_m),
        phi_cell(s.phi),
        opt(s.phi_p_value),
        opt(s.tie_rate),
        opt(r.and_then(|r| r.mean)),
        opt(r.and_then(|r| r.ci95_low)),
        opt(r.and_then(|r| r.ci95_high)),
        opt(r.and_then(|r| r.t_statistic)),
        opt(r.and_then(|r| r.t_p_value)),
        r.map(|r| r.n_excluded_zero_denominator.to_string()).unwrap_or_default(),
    ]
}

fn csv_cells(report: &AuditReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory csv");
    for cell in &report.cells {
        w.write_record(csv_row(&report.metadata.scorer, cell)).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

fn fixed(v: Option<f64>, places: usize) -> String {
    v.map(|x| format!("{x:.places$}")).unwrap_or_else(|| "n/a".into())
}

fn phi_md(p: Option<PhiValue>) -> String {
    p.map(|p| p.to_string()).unwrap_or_else(|| "n/a".into())
}

fn judgment_table(out: &mut String, metric: &str, er: Option<f64>, phi: String, ties: Option<f64>, p: Option<f64>) {
    out.push_str("| Metric | ER | Φ | tie_rate | p |\n|---|---|---|---|---|\n");
    let _ = writeln!(out, "| {metric} | {} | {phi} | {} | {} |", fixed(er, 2), fixed(ties, 2), fixed(p, 3));
}

fn ratio_table(out: &mut String, metric: &str, s: &BiasSummary) {
    let r = s.ratio.as_ref();
    out.push_str("| Metric | Ratio | CI95 | t | p |\n|---|---|---|---|---|\n");
    let ci = match r.and_then(|r| r.ci95_low.zip(r.ci95_high)) {
        Some((lo, hi)) => format!("[{lo:.3}, {hi:.3}]"),
        None => "n/a".into(),
    };
    let _ = writeln!(
        out,
        "| {metric} | {} | {ci} | {} | {} |",
        fixed(r.and_then(|r| r.mean), 3),
        fixed(r.and_then(|r| r.t_statistic), 2),
        fixed(r.and_then(|r| r.t_p_value), 3),
    );
}

fn markdown(report: &AuditReport) -> String {
    let m = &report.metadata;
    let mut out = String::new();
    let _ = writeln!(out, "# Gender-bias audit: {}\n", m.scorer);
    let _ = writeln!(
        out,
        "dataset `{}` ({}), strategy {}, scale {}, seed {}, bootstrap resamples {}, alternative {}\n",
        m.dataset, m.schema, m.strategy, m.scale, m.seed, m.resamples, m.alternative
    );
    for cell in &report.cells {
        let lang = cell.language_pair.as_deref().unwrap_or("all");
        let _ = writeln!(out, "## {} · {lang} (n = {})\n", cell.condition, cell.summary.n_instances);
        let s = &cell.summary;
        if cell.condition.is_unambiguous() {
            judgment_table(&mut out, &m.scorer, s.er_total, phi_md(s.phi), s.tie_rate, s.phi_p_value);
        } else {
            ratio_table(&mut out, &m.scorer, s);
        }
        out.push('\n');
    }
    for mean in &report.cross_language {
        let _ = writeln!(out, "## {} · mean over {}\n", mean.condition, mean.languages.join(", "));
        if mean.condition.is_unambiguous() {
            let phi = match mean.phi {
                Some(v) => format!("{v:.2} ({})", mean.phi_languages.join(", ")),
                None => "n/a".into(),
            };
            judgment_table(&mut out, &m.scorer, mean.er_total, phi, mean.tie_rate, None);
        } else {
            out.push_str("| Metric | Ratio |\n|---|---|\n");
            let _ = writeln!(out, "| {} | {} |", m.scorer, fixed(mean.ratio_mean, 3));
        }
        out.push('\n');
    }
    let c = &report.counts;
    let _ = writeln!(
        out,
        "instances {}, scorer requests {} ({} from cache), clamped scores {}, ratios excluded for zero denominator {}, not-minimal-edit diagnostics {}",
        c.instances, c.requests, c.cache_hits, c.clamped, c.excluded_zero_denominator, c.diagnostics
    );
    out
}

/// Per-band counts of the counterfactual filter as a markdown table.
pub fn gt_filter_markdown(stats: &FilterStats) -> String {
    let mut out = String::from("| Quality | Stage 1 F | Stage 1 M | Stage 2 | Wilcoxon p |\n|---|---|---|---|---|\n");
    for (band, b) in stats.bands.iter().rev() {
        let p = b.wilcoxon.as_ref().map(|w| format!("{:.3}", w.p_value)).unwrap_or_else(|| "n/a".into());
        let _ = writeln!(out, "| {band} | {} | {} | {} | {p} |", b.stage1_f, b.stage1_m, b.stage2);
    }
    let (f, m) = stats.stage1_totals();
    let _ = writeln!(out, "| Total | {f} | {m} | {} | |", stats.stage2_total());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biasstats::{Alternative, BiasSummary, Judgment};
    use crate::corpus::{Condition, Gender};
    use crate::report::{AuditMetadata, RunCounts};
    use crate::scoring::{ScaleDescriptor, StrategyKind};

    fn report(cells: Vec<AuditCell>) -> AuditReport {
        AuditReport {
            metadata: AuditMetadata {
                scorer: "mock:hash".into(),
                scale: ScaleDescriptor::UNIT,
                dataset: "fixture.jsonl".into(),
                schema: "native".into(),
                strategy: StrategyKind::None,
                separator: " ".into(),
                seed: 42,
                resamples: 1000,
                alternative: Alternative::TwoSided,
                ratio_null: 1.0,
                timestamp: "2026-01-01T00:00:00Z".into(),
            },
            cross_language: super::super::cross_language_means(&cells),
            cells,
            retention: None,
            qad: None,
            counts: RunCounts::default(),
            diagnostics: vec![],
        }
    }

    fn unambiguous_cell() -> AuditCell {
        let js = vec![
            (Gender::F, Judgment::Error),
            (Gender::F, Judgment::Correct),
            (Gender::M, Judgment::Error),
            (Gender::M, Judgment::TieError),
            (Gender::M, Judgment::Correct),
        ];
        AuditCell {
            language_pair: Some("en-it".into()),
            condition: Condition::UnambiguousIntra,
            summary: BiasSummary::from_judgments(&js, 200, 7, Alternative::TwoSided),
        }
    }

    fn ambiguous_cell() -> AuditCell {
        AuditCell {
            language_pair: None,
            condition: Condition::AmbiguousFm,
            summary: BiasSummary::from_ratios(&[Some(0.9), Some(0.95), None], 1.0),
        }
    }

    #[test]
    fn structured_round_trips() {
        let r = report(vec![unambiguous_cell(), ambiguous_cell()]);
        let bytes = emit(&r, Format::Structured);
        let back = AuditReport::from_json(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(emit(&back, Format::Structured), bytes);
    }

    #[test]
    fn csv_has_header_and_one_row_per_cell() {
        let text = String::from_utf8(emit(&report(vec![unambiguous_cell()]), Format::CsvTables)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert!(lines[1].starts_with("mock:hash,en-it,unambiguous_intra,5,0.6,"));
    }

    #[test]
    fn markdown_columns() {
        let text = String::from_utf8(emit(&report(vec![unambiguous_cell()]), Format::MarkdownTables)).unwrap();
        let header = text.lines().find(|l| l.starts_with("| Metric")).unwrap();
        let cols: Vec<&str> = header.trim_matches('|').split('|').map(str::trim).collect();
        assert_eq!(cols, vec!["Metric", "ER", "Φ", "tie_rate", "p"]);
        assert!(text.contains("| mock:hash | 0.60 | 0.75 | 0.20 |"), "{text}");
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!("xml".parse::<Format>().is_err());
        assert_eq!("markdown_tables".parse::<Format>(), Ok(Format::MarkdownTables));
    }
}
