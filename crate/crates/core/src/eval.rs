//! Retrieval accuracy: interpolated N-point average precision, relevant
//! counts at a cutoff, and the pooled two-proportion z-test.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Default number of recall levels (the usual 11-point formula).
pub const DEFAULT_POINTS: usize = 11;

/// Interpolated precision averaged over recall levels `j/(N−1)`,
/// `j = 0..N`. The interpolated precision at recall `ρ` is the best precision
/// at any rank whose recall is at least `ρ`, or 0 if `ρ` is never reached.
pub fn n_point_avg_precision(
    ranked: &[usize],
    relevant: &BTreeSet<usize>,
    points: usize,
) -> Result<f64> {
    if relevant.is_empty() {
        return Err(Error::InvalidArgument("relevant set is empty".into()));
    }
    if points < 2 {
        return Err(Error::InvalidArgument("need at least two recall levels".into()));
    }
    let total = relevant.len();
    // precision after the i-th relevant document, i = 1..=found
    let mut precisions = Vec::new();
    let mut found = 0usize;
    for (pos, doc) in ranked.iter().enumerate() {
        if relevant.contains(doc) {
            found += 1;
            precisions.push(found as f64 / (pos + 1) as f64);
        }
    }
    // best precision at recall >= i/total is the max over suffix i..
    let mut suffix_max = vec![0.0f64; precisions.len() + 1];
    for i in (0..precisions.len()).rev() {
        suffix_max[i] = suffix_max[i + 1].max(precisions[i]);
    }
    let levels = points - 1;
    let mut sum = 0.0;
    for j in 0..points {
        // smallest i with i/total >= j/levels, compared exactly in integers
        let needed = (j * total).div_ceil(levels);
        let first = needed.saturating_sub(1);
        if needed <= found {
            sum += suffix_max[first];
        }
    }
    Ok(sum / points as f64)
}

/// Arithmetic mean of per-query average precisions.
pub fn mean_avg_precision(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument("no queries to average".into()));
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// `|top-j ∩ relevant|`.
pub fn relevant_in_top(ranked: &[usize], relevant: &BTreeSet<usize>, j: usize) -> usize {
    ranked.iter().take(j).filter(|d| relevant.contains(d)).count()
}

/// Two-tailed pooled z-test for `x₁/n₁` against `x₂/n₂`, without continuity
/// correction. Returns 1.0 when the proportions coincide.
pub fn two_proportion_test(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<f64> {
    if n1 == 0 || n2 == 0 || x1 > n1 || x2 > n2 {
        return Err(Error::InvalidArgument(format!(
            "invalid counts {x1}/{n1}, {x2}/{n2}"
        )));
    }
    let (x1, n1, x2, n2) = (x1 as f64, n1 as f64, x2 as f64, n2 as f64);
    let pooled = (x1 + x2) / (n1 + n2);
    let diff = x1 / n1 - x2 / n2;
    if diff == 0.0 || pooled <= 0.0 || pooled >= 1.0 {
        return Ok(1.0);
    }
    let z = diff / (pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)).sqrt();
    // 2 Φ(−|z|) = erfc(|z| / √2)
    Ok(libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0))
}

/// Per-query and aggregate precision numbers for one ranking pass.
#[derive(Debug, Clone, PartialEq)]
pub struct PrecisionReport {
    pub queries: Vec<QueryPrecision>,
    pub mean_average_precision: f64,
    pub cutoffs: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryPrecision {
    pub query: usize,
    pub average_precision: f64,
    /// Relevant documents among the top `cutoffs[i]`.
    pub relevant_at: Vec<usize>,
}

impl PrecisionReport {
    pub fn query_count(&self) -> usize {
        self.queries.len()
    }

    /// Builds a report from `(query id, ranking, relevant set)` triples;
    /// queries without relevant documents are skipped.
    pub fn from_rankings<'a, I>(rankings: I, points: usize, cutoffs: &[usize]) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, &'a [usize], &'a BTreeSet<usize>)>,
    {
        let mut queries = Vec::new();
        for (query, ranked, relevant) in rankings {
            if relevant.is_empty() {
                continue;
            }
            queries.push(QueryPrecision {
                query,
                average_precision: n_point_avg_precision(ranked, relevant, points)?,
                relevant_at: cutoffs
                    .iter()
                    .map(|&j| relevant_in_top(ranked, relevant, j))
                    .collect(),
            });
        }
        let aps: Vec<f64> = queries.iter().map(|q| q.average_precision).collect();
        let mean_average_precision = if aps.is_empty() {
            0.0
        } else {
            mean_avg_precision(&aps)?
        };
        Ok(Self {
            queries,
            mean_average_precision,
            cutoffs: cutoffs.to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(v: &[usize]) -> BTreeSet<usize> {
        v.iter().copied().collect()
    }

    #[test]
    fn perfect_ranking() {
        let ap = n_point_avg_precision(&[3, 1, 0, 2], &set(&[3, 1]), 11).unwrap();
        assert!((ap - 1.0).abs() < 1e-15);
    }

    #[test]
    fn nothing_retrieved() {
        let ap = n_point_avg_precision(&[0, 1, 2], &set(&[7]), 11).unwrap();
        assert_eq!(ap, 0.0);
    }

    #[test]
    fn half_recall_hand_value() {
        // precision 1 at recall levels 0, 0.1, ..., 0.5 and 0 above
        let ap = n_point_avg_precision(&[4, 0, 1], &set(&[4, 9]), 11).unwrap();
        assert!((ap - 6.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn ap_errors() {
        assert!(n_point_avg_precision(&[0], &BTreeSet::new(), 11).is_err());
        assert!(n_point_avg_precision(&[0], &set(&[0]), 1).is_err());
    }

    #[test]
    fn interpolation_takes_later_precision() {
        // relevant at ranks 2 and 3: precisions 1/2, 2/3; interpolated 2/3 everywhere
        let ap = n_point_avg_precision(&[5, 0, 1], &set(&[0, 1]), 11).unwrap();
        assert!((ap - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn map_cases() {
        assert_eq!(mean_avg_precision(&[1.0]).unwrap(), 1.0);
        assert_eq!(mean_avg_precision(&[0.0, 1.0]).unwrap(), 0.5);
        assert_eq!(
            mean_avg_precision(&[0.2, 0.5, 0.9]).unwrap(),
            mean_avg_precision(&[0.9, 0.2, 0.5]).unwrap()
        );
        assert!(mean_avg_precision(&[]).is_err());
    }

    #[test]
    fn relevant_counts() {
        assert_eq!(relevant_in_top(&[0, 1, 2], &set(&[5, 6]), 3), 0);
        assert_eq!(relevant_in_top(&[0, 1, 2], &set(&[0, 1, 2, 3]), 2), 2);
        let ranked = [4, 2, 9, 1, 0];
        let rel = set(&[2, 0]);
        let counts: Vec<_> = (1..=5).map(|j| relevant_in_top(&ranked, &rel, j)).collect();
        assert!(counts.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn proportion_test_table_values() {
        let p = two_proportion_test(7, 10, 10, 10).unwrap();
        assert!((p / 0.06 - 1.0).abs() < 0.2, "{p}");
        let p = two_proportion_test(17, 40, 35, 40).unwrap();
        assert!((p / 2.5e-5 - 1.0).abs() < 0.2, "{p}");
        assert_eq!(two_proportion_test(3, 10, 6, 20).unwrap(), 1.0);
    }

    #[test]
    fn proportion_test_degenerate() {
        assert_eq!(two_proportion_test(0, 5, 0, 9).unwrap(), 1.0);
        assert_eq!(two_proportion_test(5, 5, 9, 9).unwrap(), 1.0);
        assert!(two_proportion_test(6, 5, 1, 5).is_err());
        assert!(two_proportion_test(0, 0, 1, 5).is_err());
    }

    #[test]
    fn report_skips_queries_without_relevant_docs() {
        let r1 = vec![0, 1, 2];
        let r2 = vec![2, 1, 0];
        let rel1 = set(&[0]);
        let rel2 = BTreeSet::new();
        let rep = PrecisionReport::from_rankings(
            [(1, r1.as_slice(), &rel1), (2, r2.as_slice(), &rel2)],
            11,
            &[1, 3],
        )
        .unwrap();
        assert_eq!(rep.query_count(), 1);
        assert_eq!(rep.queries[0].relevant_at, vec![1, 1]);
        assert_eq!(rep.mean_average_precision, 1.0);
    }

    proptest! {
        #[test]
        fn proportion_symmetric(x1 in 0u64..50, x2 in 0u64..50, extra1 in 1u64..50, extra2 in 1u64..50) {
            let (n1, n2) = (x1 + extra1, x2 + extra2);
            let a = two_proportion_test(x1, n1, x2, n2).unwrap();
            let b = two_proportion_test(x2, n2, x1, n1).unwrap();
            prop_assert!((a - b).abs() <= 1e-15);
            prop_assert!((0.0..=1.0).contains(&a));
        }

        #[test]
        fn proportion_monotone_in_gap(n in 10u64..200, base in 0u64..10) {
            let x1 = base.min(n);
            let mut prev = 2.0;
            for x2 in x1..=n {
                let p = two_proportion_test(x1, n, x2, n).unwrap();
                prop_assert!(p <= prev + 1e-15);
                prev = p;
            }
        }

        #[test]
        fn ap_invariant_below_last_relevant(tail in proptest::collection::vec(100usize..200, 0..8), seed in any::<u64>()) {
            let head = vec![3usize, 50, 1, 60, 2];
            let rel = set(&[1, 2, 3, 4]);
            let mut a = head.clone();
            a.extend(tail.iter().copied());
            let mut shuffled_tail = tail.clone();
            let len = shuffled_tail.len();
            if len > 1 {
                shuffled_tail.rotate_left((seed as usize) % len);
            }
            let mut b = head;
            b.extend(shuffled_tail);
            prop_assert_eq!(
                n_point_avg_precision(&a, &rel, 11).unwrap(),
                n_point_avg_precision(&b, &rel, 11).unwrap()
            );
        }
    }
}
