//! Bias statistics over scored contrastive instances.
//!
//! Ambiguous instances yield per-instance score ratios (`QE(s,h_F)/QE(s,h_M)`, or
//! `QE(s,h_N)/QE(s,h_G)` for neutral rewrites), summarized with a normal-approximation
//! 95% interval and a one-sample t-test against 1. Unambiguous instances are judged
//! correct or wrong, ties counted as errors, and summarized as error rates per referent
//! gender and their ratio `Φ = ER_F / ER_M`, tested with a seeded bootstrap.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

use crate::corpus::Gender;

/// z-quantile used for the 95% interval.
pub const Z_95: f64 = 1.96;
pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("Φ not estimable: all {0} bootstrap resamples had ER_M = 0 or an empty group")]
    PhiNotEstimable(usize),
    #[error("bootstrap needs at least one resample")]
    NoResamples,
}

// =============================================================================
// Score ratios
// =============================================================================

/// `numerator / denominator`, or `None` (excluded) when the denominator is zero.
pub fn score_ratio(numerator: f64, denominator: f64) -> Option<f64> {
    if denominator == 0.0 {
        None
    } else {
        Some(numerator / denominator)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    BelowOne,
    AboveOne,
    AtOne,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub n_used: usize,
    pub n_excluded_zero_denominator: usize,
    pub null_value: f64,
    pub mean: Option<f64>,
    pub ci95_low: Option<f64>,
    pub ci95_high: Option<f64>,
    pub t_statistic: Option<f64>,
    /// Two-sided one-sample t-test against `null_value`.
    pub t_p_value: Option<f64>,
    pub direction: Option<Direction>,
}

/// Mean, 95% interval and two-sided t-test of `ratios` against `null_value`.
///
/// Zero-variance samples get `p = 1` when the mean equals the null value and `p = 0`
/// otherwise. A single value has no variance estimate and so no p-value.
pub fn aggregate_ratio(ratios: &[f64], null_value: f64) -> RatioSummary {
    let n = ratios.len();
    let mut out = RatioSummary {
        n_used: n,
        n_excluded_zero_denominator: 0,
        null_value,
        mean: None,
        ci95_low: None,
        ci95_high: None,
        t_statistic: None,
        t_p_value: None,
        direction: None,
    };
    if n == 0 {
        return out;
    }

    let constant = ratios.iter().all(|&r| r == ratios[0]);
    let mean = if constant { ratios[0] } else { ratios.iter().sum::<f64>() / n as f64 };
    out.mean = Some(mean);
    out.direction = Some(if mean < null_value {
        Direction::BelowOne
    } else if mean > null_value {
        Direction::AboveOne
    } else {
        Direction::AtOne
    });

    if constant {
        out.ci95_low = Some(mean);
        out.ci95_high = Some(mean);
        if n >= 2 {
            let at_null = mean == null_value;
            out.t_statistic = at_null.then_some(0.0);
            out.t_p_value = Some(if at_null { 1.0 } else { 0.0 });
        }
        return out;
    }

    let var = ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let se = var.sqrt() / (n as f64).sqrt();
    out.ci95_low = Some(mean - Z_95 * se);
    out.ci95_high = Some(mean + Z_95 * se);
    let t = (mean - null_value) / se;
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1");
    out.t_statistic = Some(t);
    out.t_p_value = Some((2.0 * dist.sf(t.abs())).min(1.0));
    out
}

/// Like [`aggregate_ratio`] over `score_ratio` outputs, counting exclusions.
pub fn summarize_ratios(ratios: &[Option<f64>], null_value: f64) -> RatioSummary {
    let used: Vec<f64> = ratios.iter().flatten().copied().collect();
    let mut summary = aggregate_ratio(&used, null_value);
    summary.n_excluded_zero_denominator = ratios.len() - used.len();
    summary
}

// =============================================================================
// Error rates
// =============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    Correct,
    Error,
    /// Equal scores; counted as an error.
    TieError,
}

impl Judgment {
    pub fn is_error(self) -> bool {
        !matches!(self, Judgment::Correct)
    }
}

/// Compares the scores of the correct and incorrect gender forms.
pub fn judge_instance(score_correct: f64, score_incorrect: f64) -> Judgment {
    if score_correct > score_incorrect {
        Judgment::Correct
    } else if score_correct == score_incorrect {
        Judgment::TieError
    } else {
        Judgment::Error
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupOutcome {
    pub group: Gender,
    pub n: usize,
    pub errors: usize,
    pub ties: usize,
}

impl GroupOutcome {
    pub fn empty(group: Gender) -> Self {
        GroupOutcome { group, n: 0, errors: 0, ties: 0 }
    }

    pub fn add(&mut self, j: Judgment) {
        self.n += 1;
        if j.is_error() {
            self.errors += 1;
        }
        if j == Judgment::TieError {
            self.ties += 1;
        }
    }

    /// `errors / n`, undefined for an empty group.
    pub fn error_rate(&self) -> Option<f64> {
        (self.n > 0).then(|| self.errors as f64 / self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorRates {
    pub f: GroupOutcome,
    pub m: GroupOutcome,
    pub er_total: Option<f64>,
}

pub fn error_rates(judgments: &[(Gender, Judgment)]) -> ErrorRates {
    let mut f = GroupOutcome::empty(Gender::F);
    let mut m = GroupOutcome::empty(Gender::M);
    for &(g, j) in judgments {
        match g {
            Gender::F => f.add(j),
            Gender::M => m.add(j),
        }
    }
    let n = f.n + m.n;
    let er_total = (n > 0).then(|| (f.errors + m.errors) as f64 / n as f64);
    ErrorRates { f, m, er_total }
}

/// Ties over all judgments; undefined when empty.
pub fn tie_rate(judgments: &[Judgment]) -> Option<f64> {
    if judgments.is_empty() {
        return None;
    }
    let ties = judgments.iter().filter(|j| **j == Judgment::TieError).count();
    Some(ties as f64 / judgments.len() as f64)
}

// =============================================================================
// Φ and its bootstrap test
// =============================================================================

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum PhiValue {
    Finite(f64),
    /// Both error rates are zero.
    UndefinedBalanced,
    /// `ER_M = 0` while `ER_F > 0`.
    UndefinedInfinite,
}

impl PhiValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            PhiValue::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl fmt::Display for PhiValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhiValue::Finite(v) => write!(f, "{v:.2}"),
            PhiValue::UndefinedBalanced => f.write_str("undefined (0/0)"),
            PhiValue::UndefinedInfinite => f.write_str("inf (ER_M = 0)"),
        }
    }
}

/// `Φ = ER_F / ER_M`; parity is 1.
pub fn phi(er_f: f64, er_m: f64) -> PhiValue {
    if er_m > 0.0 {
        PhiValue::Finite(er_f / er_m)
    } else if er_f > 0.0 {
        PhiValue::UndefinedInfinite
    } else {
        PhiValue::UndefinedBalanced
    }
}

/// Φ of a set of judgments, or `None` when a group is empty.
pub fn phi_of(judgments: &[(Gender, Judgment)]) -> Option<PhiValue> {
    let rates = error_rates(judgments);
    Some(phi(rates.f.error_rate()?, rates.m.error_rate()?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alternative {
    /// `H1: ER_F > ER_M`; p is the share of resamples with `Φ ≤ 1`.
    FeminineHigher,
    /// `H1: Φ ≠ 1`; p is twice the smaller tail share, capped at 1.
    TwoSided,
}

impl std::str::FromStr for Alternative {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "feminine-higher" | "feminine_higher" | "greater" => Ok(Alternative::FeminineHigher),
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            other => Err(format!("unknown alternative `{other}` (two-sided, feminine-higher)")),
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::FeminineHigher => "feminine-higher",
            Alternative::TwoSided => "two-sided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapPhi {
    pub p_value: f64,
    pub phi_point: Option<PhiValue>,
    pub resamples: usize,
    pub seed: u64,
    pub alternative: Alternative,
    /// Resamples skipped because `ER_M = 0` or a group was absent.
    pub skipped: usize,
}

/// Tail tallies of Φ over a set of resamples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Tally {
    valid: usize,
    at_most_one: usize,
    at_least_one: usize,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            valid: self.valid + o.valid,
            at_most_one: self.at_most_one + o.at_most_one,
            at_least_one: self.at_least_one + o.at_least_one,
        }
    }
}

/// Compares `ER_F / ER_M` with 1 from integer counts, without dividing.
fn tally_counts(nf: usize, ef: usize, nm: usize, em: usize) -> Tally {
    if nf == 0 || nm == 0 || em == 0 {
        return Tally::default();
    }
    // ER_F / ER_M <= 1  <=>  ef * nm <= em * nf
    let lhs = ef * nm;
    let rhs = em * nf;
    Tally { valid: 1, at_most_one: usize::from(lhs <= rhs), at_least_one: usize::from(lhs >= rhs) }
}

/// Paired bootstrap test of `Φ` against parity.
///
/// Each resample draws `n` instances with replacement, keeping every instance's group
/// and judgment together. Resample `b` uses its own ChaCha stream `(seed, b)`, so the
/// result is bit-for-bit reproducible and independent of thread scheduling.
pub fn bootstrap_phi_test(
    judgments: &[(Gender, Judgment)],
    resamples: usize,
    seed: u64,
    alternative: Alternative,
) -> Result<BootstrapPhi, StatsError> {
    if resamples == 0 {
        return Err(StatsError::NoResamples);
    }
    let n = judgments.len();
    let tally = (0..resamples)
        .into_par_iter()
        .map(|b| {
            if n == 0 {
                return Tally::default();
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b as u64);
            let (mut nf, mut ef, mut nm, mut em) = (0, 0, 0, 0);
            for _ in 0..n {
                let (g, j) = judgments[rng.gen_range(0..n)];
                let e = usize::from(j.is_error());
                match g {
                    Gender::F => {
                        nf += 1;
                        ef += e;
                    }
                    Gender::M => {
                        nm += 1;
                        em += e;
                    }
                }
            }
            tally_counts(nf, ef, nm, em)
        })
        .reduce(Tally::default, Tally::merge);

    if tally.valid == 0 {
        return Err(StatsError::PhiNotEstimable(resamples));
    }
    let valid = tally.valid as f64;
    let p_value = match alternative {
        Alternative::FeminineHigher => tally.at_most_one as f64 / valid,
        Alternative::TwoSided => {
            let lower = tally.at_most_one as f64 / valid;
            let upper = tally.at_least_one as f64 / valid;
            (2.0 * lower.min(upper)).min(1.0)
        }
    };
    Ok(BootstrapPhi {
        p_value,
        phi_point: phi_of(judgments),
        resamples,
        seed,
        alternative,
        skipped: resamples - tally.valid,
    })
}

// =============================================================================
// Per-cell summary
// =============================================================================

/// All bias statistics for one (scorer, dataset, language, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasSummary {
    pub n_instances: usize,
    pub er_total: Option<f64>,
    pub er_f: Option<f64>,
    pub er_m: Option<f64>,
    pub outcome_f: Option<GroupOutcome>,
    pub outcome_m: Option<GroupOutcome>,
    pub phi: Option<PhiValue>,
    pub phi_p_value: Option<f64>,
    /// Why the bootstrap p-value is absent, when it is.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_test_note: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap_skipped: Option<usize>,
    pub tie_rate: Option<f64>,
    pub ratio: Option<RatioSummary>,
}

impl BiasSummary {
    /// Summary of ambiguous-condition ratios.
    pub fn from_ratios(ratios: &[Option<f64>], null_value: f64) -> Self {
        BiasSummary {
            n_instances: ratios.len(),
            er_total: None,
            er_f: None,
            er_m: None,
            outcome_f: None,
            outcome_m: None,
            phi: None,
            phi_p_value: None,
            phi_test_note: None,
            bootstrap_skipped: None,
            tie_rate: None,
            ratio: Some(summarize_ratios(ratios, null_value)),
        }
    }

    /// Summary of unambiguous-condition judgments, with the bootstrap Φ test.
    pub fn from_judgments(
        judgments: &[(Gender, Judgment)],
        resamples: usize,
        seed: u64,
        alternative: Alternative,
    ) -> Self {
        let rates = error_rates(judgments);
        let er_f = rates.f.error_rate();
        let er_m = rates.m.error_rate();
        let phi_value = match (er_f, er_m) {
            (Some(f), Some(m)) => Some(phi(f, m)),
            _ => None,
        };
        let (phi_p_value, phi_test_note, skipped) =
            match bootstrap_phi_test(judgments, resamples, seed, alternative) {
                Ok(b) => (Some(b.p_value), None, Some(b.skipped)),
                Err(e) => (None, Some(e.to_string()), None),
            };
        let js: Vec<Judgment> = judgments.iter().map(|(_, j)| *j).collect();
        BiasSummary {
            n_instances: judgments.len(),
            er_total: rates.er_total,
            er_f,
            er_m,
            outcome_f: Some(rates.f),
            outcome_m: Some(rates.m),
            phi: phi_value,
            phi_p_value,
            phi_test_note,
            bootstrap_skipped: skipped,
            tie_rate: tie_rate(&js),
            ratio: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use Judgment::*;

    #[test]
    fn ratios() {
        assert_eq!(score_ratio(0.95, 0.95), Some(1.0));
        assert!((score_ratio(0.90, 0.95).unwrap() - 0.947_368_421_052_631_6).abs() < 1e-15);
        assert_eq!(score_ratio(0.5, 0.0), None);
    }

    #[test]
    fn symmetric_ratios_have_p_one() {
        let s = aggregate_ratio(&[0.9, 1.0, 1.1, 0.95, 1.05], 1.0);
        assert!((s.mean.unwrap() - 1.0).abs() < 1e-12);
        assert!(s.t_statistic.unwrap().abs() < 1e-9);
        assert!((s.t_p_value.unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn constant_ratios_at_null() {
        let s = aggregate_ratio(&[1.0, 1.0, 1.0], 1.0);
        assert_eq!(s.mean, Some(1.0));
        assert_eq!(s.t_p_value, Some(1.0));
        assert_eq!(s.ci95_low, s.ci95_high);
        assert_eq!(s.direction, Some(Direction::AtOne));
        let off = aggregate_ratio(&[0.9375; 4], 1.0);
        assert_eq!(off.t_p_value, Some(0.0));
        assert_eq!(off.direction, Some(Direction::BelowOne));
    }

    #[test]
    fn t_test_matches_reference_oracle() {
        // scipy.stats.ttest_1samp([0.90, 0.92, 0.94], 1.0)
        let s = aggregate_ratio(&[0.90, 0.92, 0.94], 1.0);
        assert!((s.t_statistic.unwrap() - -6.928203230275528).abs() < 1e-9);
        assert!((s.t_p_value.unwrap() - 0.020204102886728654).abs() < 1e-9);
        // CI: 0.92 ± 1.96 * 0.02 / sqrt(3)
        let half = 1.96 * 0.02 / 3f64.sqrt();
        assert!((s.ci95_low.unwrap() - (0.92 - half)).abs() < 1e-12);
        assert!((s.ci95_high.unwrap() - (0.92 + half)).abs() < 1e-12);
    }

    #[test]
    fn empty_and_single() {
        let s = aggregate_ratio(&[], 1.0);
        assert_eq!(s.n_used, 0);
        assert_eq!(s.mean, None);
        let one = aggregate_ratio(&[1.2], 1.0);
        assert_eq!(one.mean, Some(1.2));
        assert_eq!(one.t_p_value, None);
    }

    #[test]
    fn exclusions_are_counted() {
        let s = summarize_ratios(&[Some(1.0), None, Some(0.5), None], 1.0);
        assert_eq!(s.n_used, 2);
        assert_eq!(s.n_excluded_zero_denominator, 2);
    }

    #[test]
    fn judgments() {
        assert_eq!(judge_instance(0.9, 0.8), Correct);
        assert_eq!(judge_instance(0.8, 0.8), TieError);
        assert_eq!(judge_instance(0.7, 0.9), Error);
    }

    #[test]
    fn error_rate_counting() {
        let r = error_rates(&[(Gender::F, Error), (Gender::F, Correct), (Gender::F, Correct), (Gender::F, Correct)]);
        assert_eq!(r.f.error_rate(), Some(0.25));
        assert_eq!(r.m.error_rate(), None);

        let r = error_rates(&[(Gender::F, Correct), (Gender::M, Correct)]);
        assert_eq!((r.f.error_rate(), r.m.error_rate()), (Some(0.0), Some(0.0)));

        let mut js = vec![(Gender::F, Error), (Gender::F, TieError), (Gender::F, Correct), (Gender::F, Correct)];
        js.extend([(Gender::M, Correct); 4]);
        let r = error_rates(&js);
        assert_eq!(r.f.error_rate(), Some(0.5));
        assert_eq!(r.m.error_rate(), Some(0.0));
        assert_eq!(r.er_total, Some(0.25));
        assert_eq!(r.f.ties, 1);
    }

    #[test]
    fn phi_cases() {
        assert_eq!(phi(0.2, 0.1), PhiValue::Finite(2.0));
        assert_eq!(phi(0.0, 0.0), PhiValue::UndefinedBalanced);
        assert_eq!(phi(0.3, 0.0), PhiValue::UndefinedInfinite);
    }

    #[test]
    fn tie_rates() {
        assert_eq!(tie_rate(&[TieError, Correct, Correct, Correct]), Some(0.25));
        assert_eq!(tie_rate(&[Correct, Error]), Some(0.0));
        assert_eq!(tie_rate(&[]), None);
    }

    #[test]
    fn bootstrap_all_errors_gives_p_one() {
        let js = vec![(Gender::F, Error), (Gender::F, Error), (Gender::M, Error), (Gender::M, TieError)];
        let b = bootstrap_phi_test(&js, 500, 7, Alternative::FeminineHigher).unwrap();
        assert_eq!(b.p_value, 1.0);
        assert_eq!(b.phi_point, Some(PhiValue::Finite(1.0)));
    }

    #[test]
    fn bootstrap_not_estimable_when_m_never_errs() {
        let js = vec![(Gender::F, Error), (Gender::F, Error), (Gender::M, Correct), (Gender::M, Correct)];
        assert_eq!(
            bootstrap_phi_test(&js, 200, 1, Alternative::FeminineHigher),
            Err(StatsError::PhiNotEstimable(200))
        );
        assert_eq!(bootstrap_phi_test(&js, 0, 1, Alternative::FeminineHigher), Err(StatsError::NoResamples));
    }

    #[test]
    fn bootstrap_is_reproducible() {
        let js: Vec<(Gender, Judgment)> = (0..40)
            .map(|i| (if i % 2 == 0 { Gender::F } else { Gender::M }, if i % 4 == 0 || i % 3 == 0 { Error } else { Correct }))
            .collect();
        let a = bootstrap_phi_test(&js, 2000, 42, Alternative::TwoSided).unwrap();
        let b = bootstrap_phi_test(&js, 2000, 42, Alternative::TwoSided).unwrap();
        assert_eq!(a.p_value.to_bits(), b.p_value.to_bits());
        let c = bootstrap_phi_test(&js, 2000, 43, Alternative::TwoSided).unwrap();
        assert_ne!(a.p_value, c.p_value);
    }

    fn judgment() -> impl Strategy<Value = (Gender, Judgment)> {
        (prop::bool::ANY, prop::sample::select(vec![Correct, Error, TieError]))
            .prop_map(|(f, j)| (if f { Gender::F } else { Gender::M }, j))
    }

    proptest! {
        #[test]
        fn aggregate_is_permutation_invariant(mut xs in prop::collection::vec(0.5f64..1.5, 2..40), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            let a = aggregate_ratio(&xs, 1.0);
            xs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            let b = aggregate_ratio(&xs, 1.0);
            // summation order may move the last bits
            prop_assert!((a.mean.unwrap() - b.mean.unwrap()).abs() < 1e-12);
            prop_assert_eq!(a.direction.is_some(), b.direction.is_some());
            prop_assert!((a.ci95_low.unwrap() - b.ci95_low.unwrap()).abs() < 1e-12);
            match (a.t_p_value, b.t_p_value) {
                (Some(p), Some(q)) => prop_assert!((p - q).abs() < 1e-9),
                (p, q) => prop_assert_eq!(p, q),
            }
        }

        #[test]
        fn ci_brackets_mean(xs in prop::collection::vec(0.0f64..2.0, 1..50)) {
            let s = aggregate_ratio(&xs, 1.0);
            prop_assert!(s.ci95_low.unwrap() <= s.mean.unwrap());
            prop_assert!(s.mean.unwrap() <= s.ci95_high.unwrap());
        }

        #[test]
        fn judgments_invariant_under_positive_rescaling(i in 0u32..=1024, j in 0u32..=1024, k in 0.01f64..100.0) {
            // grid-valued scores keep distinct values far apart relative to rounding
            let (a, b) = (f64::from(i) / 1024.0, f64::from(j) / 1024.0);
            prop_assert_eq!(judge_instance(a * k, b * k), judge_instance(a, b));
        }

        #[test]
        fn er_and_phi_invariant_under_positive_rescaling(
            pairs in prop::collection::vec((prop::bool::ANY, 0u32..=64, 0u32..=64), 1..40),
            k in 0.01f64..100.0,
        ) {
            let judge = |scale: f64| -> Vec<(Gender, Judgment)> {
                pairs.iter().map(|&(f, c, w)| {
                    let g = if f { Gender::F } else { Gender::M };
                    (g, judge_instance(f64::from(c) / 64.0 * scale, f64::from(w) / 64.0 * scale))
                }).collect()
            };
            let (base, scaled) = (judge(1.0), judge(k));
            prop_assert_eq!(error_rates(&base), error_rates(&scaled));
            prop_assert_eq!(phi_of(&base), phi_of(&scaled));
        }

        #[test]
        fn group_outcome_invariants(js in prop::collection::vec(judgment(), 0..60)) {
            let r = error_rates(&js);
            for g in [r.f, r.m] {
                prop_assert!(g.ties <= g.errors && g.errors <= g.n);
            }
            if let Some(total) = r.er_total {
                let want = (r.f.errors + r.m.errors) as f64 / (r.f.n + r.m.n) as f64;
                prop_assert_eq!(total, want);
            }
        }
    }
}
