use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::DownstreamError;

/// Largest effective sample size that uses the exact null distribution.
pub const EXACT_MAX_N: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WilcoxonResult {
    /// Two-sided p-value.
    pub p_value: f64,
    /// Sum of ranks of positive differences `a - b`.
    pub w_plus: f64,
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    pub exact: bool,
    /// All differences were zero; `p_value` is 1 by convention.
    pub degenerate: bool,
}

/// Average ranks of `|d|`, 1-based.
fn average_ranks(abs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..abs.len()).collect();
    order.sort_by(|&i, &j| abs[i].total_cmp(&abs[j]));
    let mut ranks = vec![0.0; abs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && abs[order[end]] == abs[order[start]] {
            end += 1;
        }
        // positions start..end share rank (start+1 + end) / 2
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Two-sided Wilcoxon signed-rank test on paired samples.
///
/// Zero differences are dropped and tied magnitudes share their average rank. For up
/// to [`EXACT_MAX_N`] remaining pairs the p-value comes from the exact permutation
/// distribution of `W+` (ties included, computed over doubled integer ranks); above
/// that a normal approximation with tie and continuity corrections is used.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64]) -> Result<WilcoxonResult, DownstreamError> {
    if a.len() != b.len() {
        return Err(DownstreamError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(DownstreamError::EmptySample);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = diffs.len();
    if n == 0 {
        return Ok(WilcoxonResult { p_value: 1.0, w_plus: 0.0, n_effective: 0, exact: true, degenerate: true });
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = diffs.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();

    if n <= EXACT_MAX_N {
        // doubled ranks are integers even with ties
        let doubled: Vec<usize> = ranks.iter().map(|r| (r * 2.0).round() as usize).collect();
        let max: usize = doubled.iter().sum();
        let mut ways = vec![0u64; max + 1];
        ways[0] = 1;
        for &r in &doubled {
            for s in (r..=max).rev() {
                ways[s] += ways[s - r];
            }
        }
        let total = 2f64.powi(n as i32);
        let observed = (w_plus * 2.0).round() as usize;
        let lower: u64 = ways[..=observed].iter().sum();
        let upper: u64 = ways[observed..].iter().sum();
        let p = 2.0 * (lower.min(upper) as f64) / total;
        return Ok(WilcoxonResult { p_value: p.min(1.0), w_plus, n_effective: n, exact: true, degenerate: false });
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        tie_term += t * t * t - t;
        i = j;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    let diff = w_plus - mean;
    let correction = 0.5 * diff.signum();
    let z = (diff - correction) / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    let p = 2.0 * normal.sf(z.abs());
    Ok(WilcoxonResult { p_value: p.min(1.0), w_plus, n_effective: n, exact: false, degenerate: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_samples_are_degenerate() {
        let r = wilcoxon_signed_rank(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert!(r.degenerate);
    }

    #[test]
    fn all_positive_five() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0];
        let r = wilcoxon_signed_rank(&a, &[0.0; 5]).unwrap();
        assert_eq!(r.w_plus, 15.0);
        assert_eq!(r.p_value, 2.0 / 32.0);
    }

    #[test]
    fn input_errors() {
        assert_eq!(wilcoxon_signed_rank(&[1.0], &[]), Err(DownstreamError::LengthMismatch(1, 0)));
        assert_eq!(wilcoxon_signed_rank(&[], &[]), Err(DownstreamError::EmptySample));
    }

    #[test]
    fn average_ranks_with_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn normal_approximation_large_n() {
        // scipy.stats.wilcoxon(range(1, 31), zeros, correction=True, method="approx")
        let a: Vec<f64> = (1..=30).map(f64::from).collect();
        let r = wilcoxon_signed_rank(&a, &vec![0.0; 30]).unwrap();
        assert!(!r.exact);
        assert!((r.p_value - 1.8253714563612074e-06).abs() < 1e-12, "{}", r.p_value);

        // with tied magnitudes and negative differences
        let d = [1., 2., 2., 3., 3., 3., 4., 5., 6., 7., 7., 8., 9., 10., 11., 12., 13., 14., 15., 16., 17., 18., 19., 20., 21., -22., -5., -6.];
        let r = wilcoxon_signed_rank(&d, &[0.0; 28]).unwrap();
        assert!((r.p_value - 0.00039729406354348213).abs() < 1e-12, "{}", r.p_value);
    }
}
