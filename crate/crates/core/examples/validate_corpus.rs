//! Load a contrastive corpus from MT-GenEval-style TSV, check its invariants, and
//! inspect the token-level edit between the gendered variants.

use std::error::Error;

use qe_bias::corpus::{read_dataset, validate_minimal_edit, Schema};
use qe_bias::VariantLabel;

const TSV: &str = "\
id\tlang_pair\tsource\tcontext\tfeminine\tmasculine\tsubset\tgender
cf-1\ten-it\tShe has worked as an academic since 2010.\t\tHa lavorato come accademica dal 2010.\tHa lavorato come accademico dal 2010.\tcounterfactual\tfemale
ctx-1\ten-it\tThe professor published a book.\tHer students admired her.\tLa professoressa ha pubblicato un libro.\tIl professore ha pubblicato un libro.\tcontextual\tfemale
amb-1\ten-de\tThe nurse arrived early.\t\tDie Krankenpflegerin kam früh an.\tDer Krankenpfleger kam früh an.\tcontextual\t
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let report = read_dataset(TSV.as_bytes(), Schema::MtGenEval)?;
    for inst in &report.instances {
        let diff = validate_minimal_edit(
            inst.variant(VariantLabel::F).unwrap_or_default(),
            inst.variant(VariantLabel::M).unwrap_or_default(),
        );
        println!(
            "{:<6} {:<18} edits={} ratio={:.2} changed={:?}",
            inst.id,
            inst.condition,
            diff.edits(),
            diff.diff_ratio,
            diff.changed_tokens
        );
    }
    for d in &report.diagnostics {
        println!("line {}: {}", d.line, d.message);
    }
    assert_eq!(report.instances.len(), 3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
