//! Threshold filtering with a QE scorer: which share of feminine and masculine
//! translations survive each quality cut-off?

use std::collections::BTreeMap;
use std::error::Error;

use qe_bias::corpus::Gender;
use qe_bias::downstream::{retention_curve, threshold_grid};
use qe_bias::scoring::MockScorer;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let hash = MockScorer::HashRange { lo: 0.3, hi: 0.95 };
    let m: Vec<f64> = (0..500).map(|i| hash.score("src", &format!("hyp {i}"))).collect();
    // feminine scores: the masculine distribution shifted down
    let f: Vec<f64> = m.iter().map(|s| s - 0.05).collect();
    let curve = retention_curve(&BTreeMap::from([(Gender::F, f), (Gender::M, m)]), &threshold_grid("0:1:0.1")?)?;

    println!("  τ    F      M      gap");
    for (i, t) in curve.thresholds.iter().enumerate() {
        let kept = &curve.retained_fraction_by_group;
        println!("{t:.1}  {:.3}  {:.3}  {:+.3}", kept[&Gender::F][i], kept[&Gender::M][i], curve.gap[i]);
    }
    assert!(curve.gap.iter().all(|g| *g >= 0.0));
    assert_eq!(curve.gap[0], 0.0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
