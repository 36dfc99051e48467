//! How preceding context enters the scorer input under each strategy.

use std::collections::BTreeMap;
use std::error::Error;

use qe_bias::corpus::{Gender, LanguagePair};
use qe_bias::scoring::{build_scored_inputs, CachedTranslator, ContextStrategy, MapTranslator, StrategyKind};
use qe_bias::{Condition, EvaluationInstance, VariantLabel};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let inst = EvaluationInstance {
        id: "ctx-7".into(),
        language_pair: Some(LanguagePair::new("en", "it")),
        source: "The surgeon finished the operation.".into(),
        context: Some("She had trained for years.".into()),
        condition: Condition::UnambiguousExtra,
        variants: BTreeMap::from([
            (VariantLabel::F, "La chirurga ha terminato l'operazione.".into()),
            (VariantLabel::M, "Il chirurgo ha terminato l'operazione.".into()),
        ]),
        correct_variant: Some(VariantLabel::F),
        source_group: Some(Gender::F),
        metadata: BTreeMap::new(),
    };
    // a stand-in for a real MT system; any endpoint speaking the translation protocol works
    let translator = CachedTranslator::new(Box::new(MapTranslator::constant("Si era formata per anni.")));

    for kind in [StrategyKind::None, StrategyKind::ConcatSourceContext, StrategyKind::ConcatTranslatedContext] {
        let strategy = ContextStrategy::new(kind);
        let req = build_scored_inputs(&inst, VariantLabel::F, &strategy, Some(&translator))?;
        println!("[{kind}]\n  source:     {}\n  hypothesis: {}", req.source_text, req.hypothesis_text);
    }
    let again = build_scored_inputs(&inst, VariantLabel::M, &ContextStrategy::new(StrategyKind::ConcatTranslatedContext), Some(&translator))?;
    println!("M variant reuses the cached context translation: {}", again.hypothesis_text);
    assert_eq!(translator.upstream_texts(), 1);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
