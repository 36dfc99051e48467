//! Quality-aware decoding: pick the best N-best candidate by QE score. A scorer that
//! penalizes feminine forms pushes the chosen outputs towards masculine ones, which
//! shows up as a negative δ_M.

use std::error::Error;

use qe_bias::downstream::NbestRecord;
use qe_bias::report::run_qad;
use qe_bias::scoring::{MockScorer, ScoreCache};

fn record(i: usize) -> NbestRecord {
    let (f, m) = ("La direttrice ha firmato il contratto.", "Il direttore ha firmato il contratto.");
    // alternate which form the MT system ranked first
    let candidates = if i % 2 == 0 { vec![f, m] } else { vec![m, f] };
    NbestRecord {
        instance_id: format!("n{i}"),
        source: Some(format!("The director signed contract {i}.")),
        candidates: candidates.into_iter().map(String::from).collect(),
        h_f: f.into(),
        h_m: m.into(),
        f_unique: None,
        m_unique: None,
    }
}

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let records: Vec<NbestRecord> = (0..50).map(record).collect();

    let mut neutral = MockScorer::Constant(0.5).endpoint();
    let baseline = run_qad(records.clone(), &mut neutral, &mut ScoreCache::in_memory(), None, false)?;
    let mut biased = MockScorer::Biased { base: 0.8, penalty: 0.05, markers: vec!["direttrice".into()] }.endpoint();
    let reranked = run_qad(records, &mut biased, &mut ScoreCache::in_memory(), None, false)?;

    for (name, r) in [("first candidate", &baseline), ("biased QE rerank", &reranked)] {
        let d = &r.delta;
        println!("{name:<17} δ_M = {:+.1} pp (F {}, M {}, both {}, none {})", d.delta_pp, d.count_f, d.count_m, d.count_both, d.count_none);
    }
    assert!(reranked.delta.delta_pp < baseline.delta.delta_pp);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
