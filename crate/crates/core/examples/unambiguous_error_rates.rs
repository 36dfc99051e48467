//! Unambiguous sources: the scorer should prefer the correctly gendered form. Ties
//! count as errors. Φ = ER_F / ER_M compares error rates for feminine and masculine
//! referents, tested with a seeded bootstrap.

use std::error::Error;

use qe_bias::biasstats::{bootstrap_phi_test, error_rates, judge_instance, phi, Alternative, Judgment};
use qe_bias::corpus::Gender;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // (referent gender, score of the correct form, score of the wrong form)
    let scored = [
        (Gender::F, 0.71, 0.74),
        (Gender::F, 0.80, 0.78),
        (Gender::F, 0.65, 0.65),
        (Gender::F, 0.70, 0.72),
        (Gender::F, 0.90, 0.85),
        (Gender::M, 0.82, 0.75),
        (Gender::M, 0.77, 0.79),
        (Gender::M, 0.88, 0.81),
        (Gender::M, 0.69, 0.60),
        (Gender::M, 0.74, 0.70),
    ];
    let judgments: Vec<(Gender, Judgment)> =
        scored.iter().map(|(g, correct, wrong)| (*g, judge_instance(*correct, *wrong))).collect();

    let rates = error_rates(&judgments);
    let (er_f, er_m) = (rates.f.error_rate().unwrap_or(0.0), rates.m.error_rate().unwrap_or(0.0));
    println!("ER_F = {er_f:.2} ({} ties), ER_M = {er_m:.2}, ER = {:.2}", rates.f.ties, rates.er_total.unwrap_or(0.0));
    println!("Φ = {}", phi(er_f, er_m));

    let test = bootstrap_phi_test(&judgments, 2000, 42, Alternative::FeminineHigher)?;
    println!("bootstrap p (H1: ER_F > ER_M) = {:.3} over {} resamples, {} skipped", test.p_value, test.resamples, test.skipped);
    assert_eq!(er_f, 0.6);
    assert_eq!(er_m, 0.2);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
