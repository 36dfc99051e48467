//! Every example under `examples/` runs to completion.

#[allow(dead_code)]
#[path = "../examples/validate_corpus.rs"]
mod validate_corpus;

#[test]
fn validate_corpus_runs() {
    validate_corpus::run_example().expect("validate_corpus example runs");
}

#[allow(dead_code)]
#[path = "../examples/context_strategies.rs"]
mod context_strategies;

#[test]
fn context_strategies_runs() {
    context_strategies::run_example().expect("context_strategies example runs");
}

#[allow(dead_code)]
#[path = "../examples/wire_scoring.rs"]
mod wire_scoring;

#[test]
fn wire_scoring_runs() {
    wire_scoring::run_example().expect("wire_scoring example runs");
}

#[allow(dead_code)]
#[path = "../examples/ambiguous_ratio_audit.rs"]
mod ambiguous_ratio_audit;

#[test]
fn ambiguous_ratio_audit_runs() {
    ambiguous_ratio_audit::run_example().expect("ambiguous_ratio_audit example runs");
}

#[allow(dead_code)]
#[path = "../examples/unambiguous_error_rates.rs"]
mod unambiguous_error_rates;

#[test]
fn unambiguous_error_rates_runs() {
    unambiguous_error_rates::run_example().expect("unambiguous_error_rates example runs");
}

#[allow(dead_code)]
#[path = "../examples/retention_filtering.rs"]
mod retention_filtering;

#[test]
fn retention_filtering_runs() {
    retention_filtering::run_example().expect("retention_filtering example runs");
}

#[allow(dead_code)]
#[path = "../examples/gt_filter_bands.rs"]
mod gt_filter_bands;

#[test]
fn gt_filter_bands_runs() {
    gt_filter_bands::run_example().expect("gt_filter_bands example runs");
}

#[allow(dead_code)]
#[path = "../examples/qad_rerank.rs"]
mod qad_rerank;

#[test]
fn qad_rerank_runs() {
    qad_rerank::run_example().expect("qad_rerank example runs");
}

#[allow(dead_code)]
#[path = "../examples/pareto_frontier.rs"]
mod pareto_frontier;

#[test]
fn pareto_frontier_runs() {
    pareto_frontier::run_example().expect("pareto_frontier example runs");
}
