use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::DownstreamError;
use crate::corpus::Gender;

/// Share of each group's instances scoring at least each threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetentionCurve {
    pub thresholds: Vec<f64>,
    pub retained_fraction_by_group: BTreeMap<Gender, Vec<f64>>,
    /// `retained_M - retained_F` per threshold.
    pub gap: Vec<f64>,
}

/// Retention per group for each threshold, with closed comparison `score >= τ`.
pub fn retention_curve(
    scores_by_group: &BTreeMap<Gender, Vec<f64>>,
    thresholds: &[f64],
) -> Result<RetentionCurve, DownstreamError> {
    if thresholds.windows(2).any(|w| w[0] > w[1]) {
        return Err(DownstreamError::UnsortedThresholds);
    }
    let mut retained = BTreeMap::new();
    for group in [Gender::F, Gender::M] {
        let scores = scores_by_group
            .get(&group)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| DownstreamError::EmptyGroup(group.to_string()))?;
        let mut sorted = scores.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len() as f64;
        let fractions: Vec<f64> = thresholds
            .iter()
            .map(|&t| {
                let below = sorted.partition_point(|&s| s < t);
                (sorted.len() - below) as f64 / n
            })
            .collect();
        retained.insert(group, fractions);
    }
    let gap = retained[&Gender::M].iter().zip(&retained[&Gender::F]).map(|(m, f)| m - f).collect();
    Ok(RetentionCurve { thresholds: thresholds.to_vec(), retained_fraction_by_group: retained, gap })
}

/// Parses `start:stop:step` into an inclusive grid. Points are `start + i * step`, so
/// `0:1:0.01` yields 101 thresholds without accumulated drift.
pub fn threshold_grid(spec: &str) -> Result<Vec<f64>, DownstreamError> {
    let bad = || DownstreamError::BadGrid(spec.to_string());
    let parts: Vec<f64> =
        spec.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts.as_slice() else { return Err(bad()) };
    if !(step > &0.0) || stop < start {
        return Err(bad());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| (start + i as f64 * step).min(*stop)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn groups(f: Vec<f64>, m: Vec<f64>) -> BTreeMap<Gender, Vec<f64>> {
        BTreeMap::from([(Gender::F, f), (Gender::M, m)])
    }

    #[test]
    fn zero_threshold_keeps_everything() {
        let c = retention_curve(&groups(vec![0.1, 0.0], vec![0.9]), &[0.0]).unwrap();
        assert_eq!(c.retained_fraction_by_group[&Gender::F], vec![1.0]);
        assert_eq!(c.gap, vec![0.0]);
    }

    #[test]
    fn closed_comparison() {
        let c = retention_curve(&groups(vec![0.5], vec![0.7, 0.85, 0.9]), &[0.8, 0.85]).unwrap();
        assert_eq!(c.retained_fraction_by_group[&Gender::M], vec![2.0 / 3.0, 2.0 / 3.0]);
    }

    #[test]
    fn empty_group_is_named() {
        let err = retention_curve(&groups(vec![], vec![0.5]), &[0.5]).unwrap_err();
        assert_eq!(err, DownstreamError::EmptyGroup("F".into()));
        assert_eq!(
            retention_curve(&groups(vec![0.1], vec![0.5]), &[0.5, 0.1]).unwrap_err(),
            DownstreamError::UnsortedThresholds
        );
    }

    #[test]
    fn grids() {
        let g = threshold_grid("0:1:0.01").unwrap();
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(threshold_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        assert!(threshold_grid("0:1:0").is_err());
        assert!(threshold_grid("1:0:0.1").is_err());
        assert!(threshold_grid("a:b").is_err());
    }

    proptest! {
        #[test]
        fn curves_are_monotone(f in prop::collection::vec(0.0f64..1.0, 1..40),
                               m in prop::collection::vec(0.0f64..1.0, 1..40)) {
            let grid = threshold_grid("0:1:0.05").unwrap();
            let c = retention_curve(&groups(f.clone(), m), &grid).unwrap();
            for fr in c.retained_fraction_by_group.values() {
                prop_assert!(fr.windows(2).all(|w| w[0] >= w[1]));
                prop_assert!(fr.iter().all(|x| (0.0..=1.0).contains(x)));
            }
            let min = f.iter().copied().fold(f64::INFINITY, f64::min);
            let at_min = retention_curve(&groups(f, vec![0.5]), &[min]).unwrap();
            prop_assert_eq!(at_min.retained_fraction_by_group[&Gender::F][0], 1.0);
        }
    }
}
