//! Counterfactual filtering for ground-truth comparisons: keep pairs whose two
//! translations are correctly inflected and of the same BLEU quality band, then
//! check within each band that feminine and masculine BLEU do not differ.

use std::error::Error;

use qe_bias::downstream::{gt_filter, sentence_bleu, GtPair};
use qe_bias::report::gt_filter_markdown;

fn pair(i: usize, tf: &str, tm: &str, ok: bool) -> GtPair {
    GtPair {
        id_f: format!("{i}F"),
        id_m: format!("{i}M"),
        reference_f: "Lei è una brava insegnante di storia antica .".into(),
        reference_m: "Lui è un bravo insegnante di storia antica .".into(),
        translation_f: tf.into(),
        translation_m: tm.into(),
        inflection_ok_f: ok,
        inflection_ok_m: true,
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    println!("oracle BLEU: {:.6}", sentence_bleu("the cat is on the mat", "the cat sat on the mat"));
    let pairs = vec![
        pair(0, "Lei è una brava insegnante di storia antica .", "Lui è un bravo insegnante di storia antica .", true),
        pair(1, "Lei è una brava insegnante di storia .", "Lui è un bravo insegnante di storia .", true),
        pair(2, "Lei è un bravo insegnante di storia antica .", "Lui è un bravo insegnante di storia antica .", false),
        pair(3, "Lei insegna storia .", "Lui è un bravo insegnante di storia antica .", true),
        pair(4, "È una insegnante .", "È un insegnante .", true),
    ];
    let (retained, stats) = gt_filter(&pairs);
    for r in &retained {
        println!("kept {} / {}: BLEU {:.1} vs {:.1} ({})", r.id_f, r.id_m, r.bleu_f, r.bleu_m, r.band);
    }
    print!("{}", gt_filter_markdown(&stats));
    println!(
        "dropped {} for inflection, {} for band mismatch",
        stats.dropped_inflection, stats.dropped_band_mismatch
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
