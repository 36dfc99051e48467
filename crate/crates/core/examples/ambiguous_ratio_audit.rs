//! Audit ambiguous sources: how much lower does a scorer rate the feminine form than
//! the masculine one when both are acceptable? Scores pass through a cache, so the
//! second run never calls the scorer.

use std::collections::BTreeMap;
use std::error::Error;

use qe_bias::corpus::{LanguagePair, Schema};
use qe_bias::report::{audit_instances, emit, AuditConfig, Format};
use qe_bias::scoring::{MockScorer, ScoreCache};
use qe_bias::{Condition, EvaluationInstance, VariantLabel};

fn instance(i: usize, target: &str, f: &str, m: &str) -> EvaluationInstance {
    EvaluationInstance {
        id: format!("{target}-{i}"),
        language_pair: Some(LanguagePair::new("en", target)),
        source: format!("The engineer number {i} wrote the report."),
        context: None,
        condition: Condition::AmbiguousFm,
        variants: BTreeMap::from([(VariantLabel::F, format!("{f} {i}")), (VariantLabel::M, format!("{m} {i}"))]),
        correct_variant: None,
        source_group: None,
        metadata: BTreeMap::new(),
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut instances = Vec::new();
    for i in 0..40 {
        instances.push(instance(i, "it", "L'ingegnera ha scritto il rapporto", "L'ingegnere ha scritto il rapporto"));
        instances.push(instance(i, "es", "La ingeniera escribió el informe", "El ingeniero escribió el informe"));
    }
    // penalizes hypotheses containing feminine job titles
    let mock = MockScorer::Biased { base: 0.8, penalty: 0.05, markers: vec!["ingegnera".into(), "ingeniera".into()] };
    let config = AuditConfig::new("synthetic", Schema::Native, mock.name());
    let mut endpoint = mock.endpoint();
    let mut cache = ScoreCache::in_memory();

    let report = audit_instances(&config, &instances, &mut endpoint, None, &mut cache)?;
    print!("{}", String::from_utf8(emit(&report, Format::MarkdownTables))?);
    for cell in &report.cells {
        assert_eq!(cell.summary.ratio.as_ref().and_then(|r| r.mean), Some(0.9375));
    }

    let rerun = audit_instances(&config, &instances, &mut endpoint, None, &mut cache)?;
    println!("rerun: {} scorer calls, {} cache hits", rerun.counts.scorer_calls, rerun.counts.cache_hits);
    assert_eq!(rerun.cells, report.cells);
    assert_eq!(rerun.counts.scorer_calls, 0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
