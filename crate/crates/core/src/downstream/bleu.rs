use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tokenize::tokenize;

const MAX_ORDER: usize = 4;

fn ngram_counts<'a>(tokens: &'a [&'a str], n: usize) -> HashMap<&'a [&'a str], usize> {
    let mut counts = HashMap::new();
    for gram in tokens.windows(n) {
        *counts.entry(gram).or_insert(0) += 1;
    }
    counts
}

/// Sentence-level BLEU-4 in `[0, 100]`.
///
/// Uniform weights over orders 1-4, brevity penalty `exp(1 - r/c)` when the hypothesis
/// is shorter, unigram precision unsmoothed, and add-one smoothing
/// `(matches + 1) / (total + 1)` for orders 2-4.
pub fn sentence_bleu(hypothesis: &str, reference: &str) -> f64 {
    let hyp = tokenize(hypothesis);
    let refr = tokenize(reference);
    if hyp.is_empty() || refr.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=MAX_ORDER {
        let h = ngram_counts(&hyp, n);
        let r = ngram_counts(&refr, n);
        let total: usize = h.values().sum();
        let matches: usize = h.iter().map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0))).sum();
        let precision = if n == 1 {
            if matches == 0 {
                return 0.0;
            }
            matches as f64 / total as f64
        } else {
            (matches + 1) as f64 / (total + 1) as f64
        };
        log_sum += precision.ln();
    }
    let (c, r) = (hyp.len() as f64, refr.len() as f64);
    let bp = if c < r { (1.0 - r / c).exp() } else { 1.0 };
    100.0 * bp * (log_sum / MAX_ORDER as f64).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum QualityBand {
    Poor,
    Fair,
    Good,
    VeryGood,
    Excellent,
}

impl QualityBand {
    pub const ALL: [QualityBand; 5] = [
        QualityBand::Excellent,
        QualityBand::VeryGood,
        QualityBand::Good,
        QualityBand::Fair,
        QualityBand::Poor,
    ];

    /// Half-open BLEU range `[low, high)`; Excellent includes 100.
    pub fn range(self) -> (f64, f64) {
        match self {
            QualityBand::Poor => (0.0, 20.0),
            QualityBand::Fair => (20.0, 30.0),
            QualityBand::Good => (30.0, 40.0),
            QualityBand::VeryGood => (40.0, 50.0),
            QualityBand::Excellent => (50.0, 100.0),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            QualityBand::Poor => "Poor (<20)",
            QualityBand::Fair => "Fair (20-30)",
            QualityBand::Good => "Good (30-40)",
            QualityBand::VeryGood => "Very Good (40-50)",
            QualityBand::Excellent => "Excellent (50+)",
        }
    }
}

impl fmt::Display for QualityBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Band of a BLEU score; lower bounds are inclusive.
pub fn quality_band(bleu: f64) -> QualityBand {
    match bleu {
        b if b >= 50.0 => QualityBand::Excellent,
        b if b >= 40.0 => QualityBand::VeryGood,
        b if b >= 30.0 => QualityBand::Good,
        b if b >= 20.0 => QualityBand::Fair,
        _ => QualityBand::Poor,
    }
}
