use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{quality_band, sentence_bleu, wilcoxon_signed_rank, QualityBand, WilcoxonResult};

/// One counterfactual pair of machine translations with their references and
/// gender-inflection annotations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtPair {
    pub id_f: String,
    pub id_m: String,
    pub reference_f: String,
    pub reference_m: String,
    pub translation_f: String,
    pub translation_m: String,
    pub inflection_ok_f: bool,
    pub inflection_ok_m: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetainedPair {
    pub index: usize,
    pub id_f: String,
    pub id_m: String,
    pub bleu_f: f64,
    pub bleu_m: f64,
    pub band: QualityBand,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BandStats {
    /// Feminine translations with correct inflection, binned by their own BLEU.
    pub stage1_f: usize,
    /// Masculine translations with correct inflection, binned by their own BLEU.
    pub stage1_m: usize,
    /// Pairs retained after both stages whose sides share this band.
    pub stage2: usize,
    /// Wilcoxon test of feminine vs. masculine BLEU over the retained pairs.
    pub wilcoxon: Option<WilcoxonResult>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FilterStats {
    pub input_pairs: usize,
    pub dropped_inflection: usize,
    pub dropped_band_mismatch: usize,
    pub bands: BTreeMap<QualityBand, BandStats>,
}

impl FilterStats {
    pub fn stage1_totals(&self) -> (usize, usize) {
        self.bands.values().fold((0, 0), |(f, m), b| (f + b.stage1_f, m + b.stage1_m))
    }

    pub fn stage2_total(&self) -> usize {
        self.bands.values().map(|b| b.stage2).sum()
    }
}

/// Two-stage counterfactual filter.
///
/// Stage 1 drops pairs where either translation has the wrong gender inflection.
/// Stage 2 bands each side by sentence BLEU against its own reference and keeps pairs
/// whose sides land in the same band; within each band the retained pairs' BLEU is
/// compared between genders with a Wilcoxon signed-rank test.
pub fn gt_filter(pairs: &[GtPair]) -> (Vec<RetainedPair>, FilterStats) {
    let mut stats = FilterStats { input_pairs: pairs.len(), ..Default::default() };
    for band in QualityBand::ALL {
        stats.bands.insert(band, BandStats::default());
    }
    let mut retained = Vec::new();
    for (index, pair) in pairs.iter().enumerate() {
        let bleu_f = sentence_bleu(&pair.translation_f, &pair.reference_f);
        let bleu_m = sentence_bleu(&pair.translation_m, &pair.reference_m);
        let (band_f, band_m) = (quality_band(bleu_f), quality_band(bleu_m));
        if pair.inflection_ok_f {
            stats.bands.get_mut(&band_f).expect("all bands present").stage1_f += 1;
        }
        if pair.inflection_ok_m {
            stats.bands.get_mut(&band_m).expect("all bands present").stage1_m += 1;
        }
        if !(pair.inflection_ok_f && pair.inflection_ok_m) {
            stats.dropped_inflection += 1;
            continue;
        }
        if band_f != band_m {
            stats.dropped_band_mismatch += 1;
            continue;
        }
        stats.bands.get_mut(&band_f).expect("all bands present").stage2 += 1;
        retained.push(RetainedPair {
            index,
            id_f: pair.id_f.clone(),
            id_m: pair.id_m.clone(),
            bleu_f,
            bleu_m,
            band: band_f,
        });
    }
    for (band, band_stats) in stats.bands.iter_mut() {
        let (f, m): (Vec<f64>, Vec<f64>) =
            retained.iter().filter(|r| r.band == *band).map(|r| (r.bleu_f, r.bleu_m)).unzip();
        band_stats.wilcoxon = wilcoxon_signed_rank(&f, &m).ok();
    }
    (retained, stats)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(tf: &str, tm: &str, ok_f: bool, ok_m: bool) -> GtPair {
        GtPair {
            id_f: "f".into(),
            id_m: "m".into(),
            reference_f: "lei è una brava insegnante di storia antica".into(),
            reference_m: "lui è un bravo insegnante di storia antica".into(),
            translation_f: tf.into(),
            translation_m: tm.into(),
            inflection_ok_f: ok_f,
            inflection_ok_m: ok_m,
        }
    }

    #[test]
    fn inflection_flag_drops_pair() {
        let p = pair("lei è una brava insegnante di storia antica", "lui è un bravo insegnante di storia antica", false, true);
        let (kept, stats) = gt_filter(&[p]);
        assert!(kept.is_empty());
        assert_eq!(stats.dropped_inflection, 1);
        assert_eq!(stats.stage1_totals(), (0, 1));
    }

    #[test]
    fn same_band_pairs_are_kept() {
        let good = pair(
            "lei è una brava insegnante di storia antica",
            "lui è un bravo insegnante di storia moderna",
            true,
            true,
        );
        let (kept, stats) = gt_filter(&[good]);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].band, QualityBand::Excellent);
        assert!(kept[0].bleu_f >= 50.0 && kept[0].bleu_m >= 50.0);
        assert_eq!(stats.bands[&QualityBand::Excellent].stage2, 1);
    }

    #[test]
    fn band_mismatch_is_dropped() {
        let p = pair("lei è una brava insegnante di storia antica", "lui scrive romanzi", true, true);
        let (kept, stats) = gt_filter(&[p]);
        assert!(kept.is_empty());
        assert_eq!(stats.dropped_band_mismatch, 1);
        assert_eq!(stats.stage2_total(), 0);
    }
}
