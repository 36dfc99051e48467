//! Compare metrics on error rate and distance from parity, and mark the ones no
//! other metric beats on both.

use std::error::Error;

use qe_bias::report::pareto_points;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let metrics = [
        ("metric-a", 0.11, 0.70),
        ("metric-b", 0.18, 0.22),
        ("metric-c", 0.25, 0.30),
        ("metric-d", 0.09, 0.95),
        ("metric-e", 0.18, 0.22),
    ];
    let input: Vec<(String, f64, f64)> = metrics.iter().map(|(n, e, g)| (n.to_string(), *e, *g)).collect();
    for p in pareto_points(&input) {
        println!("{:<9} ER {:.2}  gap {:.2}  {}", p.metric_name, p.er_total, p.gap, if p.on_frontier { "frontier" } else { "" });
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
