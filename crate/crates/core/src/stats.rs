//! Verdicts from estimates: point decision, one-sample t-test and accuracy.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::estimate::Estimate;
use crate::hypothesis::{Aggregate, Hypothesis, PredicateOp};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestResult {
    /// Predicate applied to the point estimate; `false` when inconclusive.
    pub outcome: bool,
    pub p_value: Option<f64>,
    /// 95% two-sided interval around the estimate.
    pub ci: Option<(f64, f64)>,
    pub estimate: Option<f64>,
    pub n: usize,
    pub n_effective: f64,
    /// Nothing relevant was sampled.
    pub inconclusive: bool,
}

impl TestResult {
    /// Whether the p-value clears `alpha`. Always false without a p-value.
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value.is_some_and(|p| p < alpha)
    }

    pub fn ci_width(&self) -> Option<f64> {
        self.ci.map(|(lo, hi)| hi - lo)
    }
}

/// Applies the hypothesis predicate to `est` and attaches a t-test when the
/// aggregate is a mean with at least two elements.
pub fn decide(est: &Estimate, h: &Hypothesis) -> TestResult {
    let Some(theta) = est.value else {
        return TestResult {
            outcome: false,
            p_value: None,
            ci: None,
            estimate: None,
            n: est.n_relevant,
            n_effective: est.n_effective,
            inconclusive: true,
        };
    };
    let c = h.constant;
    let outcome = h.op.holds(theta, c);
    let mut res = TestResult {
        outcome,
        p_value: None,
        ci: None,
        estimate: Some(theta),
        n: est.n_relevant,
        n_effective: est.n_effective,
        inconclusive: false,
    };
    if est.agg != Aggregate::Avg {
        return res;
    }
    let Some(var) = est.weighted_variance else {
        return res;
    };
    let n_eff = est.n_effective;
    let se = (var / n_eff).sqrt();
    if se == 0.0 {
        res.ci = Some((theta, theta));
        res.p_value = Some(degenerate_p(h.op, theta, c));
        return res;
    }
    let Ok(dist) = StudentsT::new(0.0, 1.0, n_eff - 1.0) else {
        return res;
    };
    let t = (theta - c) / se;
    let p = match h.op {
        PredicateOp::Gt => dist.sf(t),
        PredicateOp::Lt => dist.cdf(t),
        PredicateOp::Eq | PredicateOp::Ne => 2.0 * dist.sf(t.abs()),
    };
    let half = dist.inverse_cdf(0.975) * se;
    res.p_value = Some(p.clamp(0.0, 1.0));
    res.ci = Some((theta - half, theta + half));
    res
}

/// p-value when every contribution is identical.
fn degenerate_p(op: PredicateOp, theta: f64, c: f64) -> f64 {
    let hit = match op {
        PredicateOp::Gt => theta > c,
        PredicateOp::Lt => theta < c,
        PredicateOp::Eq | PredicateOp::Ne => theta != c,
    };
    if hit {
        0.0
    } else {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AccuracyReport {
    pub k: usize,
    pub matches: usize,
    pub accuracy: f64,
    /// Per replicate: `Some(outcome)`, or `None` when inconclusive.
    pub outcomes: Vec<Option<bool>>,
}

/// Fraction of replicates whose verdict equals `truth`; inconclusive ones never match.
pub fn accuracy(truth: bool, results: &[TestResult]) -> AccuracyReport {
    let outcomes: Vec<Option<bool>> = results
        .iter()
        .map(|r| (!r.inconclusive).then_some(r.outcome))
        .collect();
    let matches = outcomes.iter().filter(|o| **o == Some(truth)).count();
    let k = results.len();
    AccuracyReport {
        k,
        matches,
        accuracy: if k == 0 {
            0.0
        } else {
            matches as f64 / k as f64
        },
        outcomes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::parse_hypothesis;

    fn est(values: &[f64], agg: Aggregate) -> Estimate {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let value = match agg {
            Aggregate::Avg => mean,
            Aggregate::Min => values.iter().copied().fold(f64::INFINITY, f64::min),
            Aggregate::Max => values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        };
        Estimate {
            agg,
            value: (!values.is_empty()).then_some(value),
            n_relevant: values.len(),
            n_effective: n,
            weighted_variance: (values.len() >= 2).then_some(var),
            inconclusive: values.is_empty(),
            contributions: None,
        }
    }

    fn hyp(text: &str) -> Hypothesis {
        parse_hypothesis(text).unwrap()
    }

    /// Textbook: mean 60, s = sqrt(2/3), SE = s/2, t = 10/SE ≈ 24.49 on 3 df.
    #[test]
    fn textbook_one_sided() {
        let r = decide(
            &est(&[60.0, 61.0, 59.0, 60.0], Aggregate::Avg),
            &hyp("avg(v.x | v) > 50"),
        );
        assert!(r.outcome);
        let p = r.p_value.unwrap();
        assert!(p < 0.05);
        // 1 - F(24.4949; 3) from tables: about 7.4e-5
        assert!((p - 7.4e-5).abs() < 1e-5, "{p}");
        let (lo, hi) = r.ci.unwrap();
        // t_.975,3 = 3.18245
        let half = 3.182_446_305 * (2.0f64 / 3.0).sqrt() / 2.0;
        assert!((lo - (60.0 - half)).abs() < 1e-6 && (hi - (60.0 + half)).abs() < 1e-6);
    }

    #[test]
    fn strict_boundary_is_false() {
        let r = decide(
            &est(&[49.0, 51.0], Aggregate::Avg),
            &hyp("avg(v.x | v) > 50"),
        );
        assert!(!r.outcome);
        assert!((r.p_value.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn single_element_has_no_interval() {
        let r = decide(&est(&[7.0], Aggregate::Avg), &hyp("avg(v.x | v) > 5"));
        assert!(r.outcome && !r.inconclusive);
        assert!(r.p_value.is_none() && r.ci.is_none());
    }

    #[test]
    fn empty_is_inconclusive_false() {
        let r = decide(&est(&[], Aggregate::Avg), &hyp("avg(v.x | v) < 5"));
        assert!(r.inconclusive && !r.outcome && r.p_value.is_none());
    }

    #[test]
    fn extrema_skip_the_test() {
        let r = decide(
            &est(&[5.0, 2.0, 9.0], Aggregate::Min),
            &hyp("min(v.x | v) < 3"),
        );
        assert!(r.outcome);
        assert_eq!(r.estimate, Some(2.0));
        assert!(r.p_value.is_none());
    }

    #[test]
    fn two_sided_doubles_tail() {
        let vals = [1.0, 2.0, 4.0, 3.0, 5.0];
        let gt = decide(&est(&vals, Aggregate::Avg), &hyp("avg(v.x | v) > 2"))
            .p_value
            .unwrap();
        let ne = decide(&est(&vals, Aggregate::Avg), &hyp("avg(v.x | v) <> 2"))
            .p_value
            .unwrap();
        assert!((ne - 2.0 * gt).abs() < 1e-12);
    }

    #[test]
    fn scale_consistent() {
        let vals = [3.0, 1.5, 4.25, 2.0, 2.5, 3.75];
        let base = decide(&est(&vals, Aggregate::Avg), &hyp("avg(v.x | v) > 2.5"));
        let scaled: Vec<f64> = vals.iter().map(|x| x * 8.0).collect();
        let r = decide(&est(&scaled, Aggregate::Avg), &hyp("avg(v.x | v) > 20"));
        assert_eq!(base.outcome, r.outcome);
        assert!((base.p_value.unwrap() - r.p_value.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn accuracy_counts_inconclusive_as_miss() {
        let yes = decide(&est(&[6.0, 7.0], Aggregate::Avg), &hyp("avg(v.x | v) > 5"));
        let none = decide(&est(&[], Aggregate::Avg), &hyp("avg(v.x | v) > 5"));
        let mut rs = vec![yes.clone(); 27];
        rs.extend(vec![none; 3]);
        let rep = accuracy(true, &rs);
        assert_eq!((rep.k, rep.matches), (30, 27));
        assert!((rep.accuracy - 0.9).abs() < 1e-12);
        assert_eq!(accuracy(true, &vec![yes; 30]).accuracy, 1.0);
    }
}
