//! Chi-square histogram distance, k-NN voting, and ranked retrieval scores.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::histogram::FeatureHistogram;

/// A feature vector with its class index.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledHistogram {
    pub hist: FeatureHistogram,
    pub class: usize,
}

/// `1/2 * sum (x_i - y_i)^2 / (x_i + y_i)`, skipping bins where both are zero.
pub fn chi_square(x: &FeatureHistogram, y: &FeatureHistogram) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Mismatch(format!("histograms have {} and {} bins", x.len(), y.len())));
    }
    Ok(chi_square_unchecked(x.bins(), y.bins()))
}

#[inline]
fn chi_square_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let sum: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let s = a + b;
            if s > 0.0 {
                (a - b) * (a - b) / s
            } else {
                0.0
            }
        })
        .sum();
    0.5 * sum
}

/// Query-by-reference distances, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    queries: usize,
    references: usize,
    distances: Vec<f64>,
}

impl DistanceMatrix {
    /// Rows are computed in parallel; each entry depends only on its pair.
    pub fn compute(queries: &[FeatureHistogram], references: &[FeatureHistogram]) -> Result<Self> {
        if let Some(bins) = references.first().map(FeatureHistogram::len) {
            if let Some(bad) = queries.iter().chain(references).find(|h| h.len() != bins) {
                return Err(Error::Mismatch(format!("histograms have {} and {} bins", bins, bad.len())));
            }
        }
        let distances = queries
            .par_iter()
            .flat_map_iter(|q| references.iter().map(move |r| chi_square_unchecked(q.bins(), r.bins())))
            .collect();
        Ok(DistanceMatrix {
            queries: queries.len(),
            references: references.len(),
            distances,
        })
    }

    pub fn queries(&self) -> usize {
        self.queries
    }

    pub fn references(&self) -> usize {
        self.references
    }

    pub fn row(&self, query: usize) -> &[f64] {
        &self.distances[query * self.references..(query + 1) * self.references]
    }

    pub fn get(&self, query: usize, reference: usize) -> f64 {
        self.distances[query * self.references + reference]
    }
}

/// Reference indices by ascending distance; equal distances keep enumeration order.
pub fn argsort_distances(distances: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..distances.len()).collect();
    order.sort_by(|&a, &b| distances[a].total_cmp(&distances[b]).then(a.cmp(&b)));
    order
}

/// Majority class among the `k` nearest labels. `labels` must already be in
/// rank order; a vote tie goes to the tied class whose member ranks first.
pub fn vote(ranked_labels: impl IntoIterator<Item = usize>, k: usize) -> Option<usize> {
    let top: Vec<usize> = ranked_labels.into_iter().take(k).collect();
    let mut counts = std::collections::BTreeMap::new();
    for &c in &top {
        *counts.entry(c).or_insert(0usize) += 1;
    }
    let best = counts.values().copied().max()?;
    top.into_iter().find(|c| counts[c] == best)
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Empty("training set"));
    }
    if k == 0 || k > n {
        return Err(Error::Param(format!("k = {k} must lie in 1..={n}")));
    }
    Ok(())
}

/// Predicts a class by majority vote of the `k` nearest training histograms.
pub fn knn_classify(query: &FeatureHistogram, train: &[LabeledHistogram], k: usize) -> Result<usize> {
    check_k(k, train.len())?;
    let distances = train
        .iter()
        .map(|t| chi_square(query, &t.hist))
        .collect::<Result<Vec<_>>>()?;
    knn_from_distances(&distances, train.iter().map(|t| t.class), k)
}

/// [`knn_classify`] over one precomputed distance row.
pub fn knn_from_distances(distances: &[f64], labels: impl IntoIterator<Item = usize>, k: usize) -> Result<usize> {
    check_k(k, distances.len())?;
    let labels: Vec<usize> = labels.into_iter().collect();
    if labels.len() != distances.len() {
        return Err(Error::Mismatch(format!("{} labels for {} distances", labels.len(), distances.len())));
    }
    let order = argsort_distances(distances);
    Ok(vote(order.iter().map(|&i| labels[i]), k).expect("k >= 1"))
}

/// A database ranked against one query.
#[derive(Clone, Debug, PartialEq)]
pub struct RankedRetrieval {
    pub query_class: usize,
    /// Reference indices, nearest first.
    pub ranked: Vec<usize>,
    /// Distance at each rank.
    pub distances: Vec<f64>,
    /// Whether the reference at each rank shares the query's class.
    pub relevant: Vec<bool>,
}

impl RankedRetrieval {
    pub fn from_distances(query_class: usize, distances: &[f64], db_classes: &[usize]) -> Result<Self> {
        if distances.is_empty() {
            return Err(Error::Empty("retrieval database"));
        }
        if distances.len() != db_classes.len() {
            return Err(Error::Mismatch(format!(
                "{} distances for {} references",
                distances.len(),
                db_classes.len()
            )));
        }
        let ranked = argsort_distances(distances);
        Ok(RankedRetrieval {
            query_class,
            distances: ranked.iter().map(|&i| distances[i]).collect(),
            relevant: ranked.iter().map(|&i| db_classes[i] == query_class).collect(),
            ranked,
        })
    }

    pub fn relevant_at(&self, k: usize) -> usize {
        self.relevant.iter().take(k).filter(|&&r| r).count()
    }
}

pub fn rank_references(query: &LabeledHistogram, db: &[LabeledHistogram]) -> Result<RankedRetrieval> {
    let distances = db
        .iter()
        .map(|d| chi_square(&query.hist, &d.hist))
        .collect::<Result<Vec<_>>>()?;
    let classes: Vec<usize> = db.iter().map(|d| d.class).collect();
    RankedRetrieval::from_distances(query.class, &distances, &classes)
}

/// `(recall, precision)` of the top `k`: relevant hits over the class size
/// and over `k` respectively.
pub fn recall_precision(r: &RankedRetrieval, k: usize, class_size: usize) -> Result<(f64, f64)> {
    if k == 0 || k > r.ranked.len() {
        return Err(Error::Param(format!("k = {k} must lie in 1..={}", r.ranked.len())));
    }
    if class_size == 0 {
        return Err(Error::Param("class size must be positive".into()));
    }
    let hits = r.relevant_at(k) as f64;
    Ok((hits / class_size as f64, hits / k as f64))
}

/// Mean recall and precision per cutoff.
#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    pub ks: Vec<usize>,
    pub recall: Vec<f64>,
    pub precision: Vec<f64>,
}

impl PrCurve {
    /// `k,recall,precision` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,recall,precision\n");
        for ((k, r), p) in self.ks.iter().zip(&self.recall).zip(&self.precision) {
            out.push_str(&format!("{k},{r},{p}\n"));
        }
        out
    }
}

/// Odd cutoffs `1, 3, ..., max` (at most `max`).
pub fn odd_ks(max: usize) -> Vec<usize> {
    (1..=max).step_by(2).collect()
}

fn check_ks(ks: &[usize], db_len: usize) -> Result<()> {
    if ks.is_empty() {
        return Err(Error::Empty("cutoff list"));
    }
    for w in ks.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Param(format!("cutoffs must be ascending: {} then {}", w[0], w[1])));
        }
    }
    for &k in ks {
        if k % 2 == 0 || k > db_len {
            return Err(Error::Param(format!("cutoff {k} must be odd and at most {db_len}")));
        }
    }
    Ok(())
}

/// Averages [`recall_precision`] over rankings; class sizes count database members.
pub fn pr_curve_from_rankings(rankings: &[RankedRetrieval], db_classes: &[usize], ks: &[usize]) -> Result<PrCurve> {
    if rankings.is_empty() {
        return Err(Error::Empty("query set"));
    }
    check_ks(ks, db_classes.len())?;
    let mut class_sizes = std::collections::HashMap::new();
    for &c in db_classes {
        *class_sizes.entry(c).or_insert(0usize) += 1;
    }
    let mut recall = vec![0.0; ks.len()];
    let mut precision = vec![0.0; ks.len()];
    for r in rankings {
        let size = *class_sizes
            .get(&r.query_class)
            .ok_or_else(|| Error::Param(format!("query class {} is absent from the database", r.query_class)))?;
        for (j, &k) in ks.iter().enumerate() {
            let (rc, pr) = recall_precision(r, k, size)?;
            recall[j] += rc;
            precision[j] += pr;
        }
    }
    let n = rankings.len() as f64;
    Ok(PrCurve {
        ks: ks.to_vec(),
        recall: recall.into_iter().map(|v| v / n).collect(),
        precision: precision.into_iter().map(|v| v / n).collect(),
    })
}

/// Mean recall/precision at each odd `k` for every query ranked against `db`.
pub fn pr_curve(queries: &[LabeledHistogram], db: &[LabeledHistogram], ks: &[usize]) -> Result<PrCurve> {
    if queries.is_empty() {
        return Err(Error::Empty("query set"));
    }
    if db.is_empty() {
        return Err(Error::Empty("retrieval database"));
    }
    let rankings = queries
        .iter()
        .map(|q| rank_references(q, db))
        .collect::<Result<Vec<_>>>()?;
    let classes: Vec<usize> = db.iter().map(|d| d.class).collect();
    pr_curve_from_rankings(&rankings, &classes, ks)
}

/// Fraction of equal pairs.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> f64 {
    if predicted.is_empty() {
        return 0.0;
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    correct as f64 / predicted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn h(bins: &[f64]) -> FeatureHistogram {
        FeatureHistogram::from_bins(bins.to_vec()).unwrap()
    }

    fn lh(bins: &[f64], class: usize) -> LabeledHistogram {
        LabeledHistogram { hist: h(bins), class }
    }

    #[test]
    fn chi_square_examples() {
        assert_eq!(chi_square(&h(&[0.3, 0.7]), &h(&[0.3, 0.7])).unwrap(), 0.0);
        assert_eq!(chi_square(&h(&[1.0, 0.0]), &h(&[0.0, 1.0])).unwrap(), 1.0);
        // 0.5 * (0.0625 / 0.75 + 0.0625 / 1.25) = 1/15
        let d = chi_square(&h(&[0.5, 0.5]), &h(&[0.25, 0.75])).unwrap();
        assert!((d - 1.0 / 15.0).abs() < 1e-15, "{d}");
        assert!(chi_square(&h(&[1.0]), &h(&[0.5, 0.5])).is_err());
    }

    fn random_hist(rng: &mut ChaCha8Rng, bins: usize) -> FeatureHistogram {
        let counts: Vec<u64> = (0..bins).map(|_| if rng.random::<f64>() < 0.3 { 0 } else { rng.random_range(0..20) }).collect();
        if counts.iter().sum::<u64>() == 0 {
            return FeatureHistogram::from_counts(&[1].repeat(bins));
        }
        FeatureHistogram::from_counts(&counts)
    }

    proptest! {
        #[test]
        fn chi_square_is_symmetric_premetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = random_hist(&mut rng, 16);
            let y = random_hist(&mut rng, 16);
            let dxy = chi_square(&x, &y).unwrap();
            prop_assert_eq!(dxy, chi_square(&y, &x).unwrap());
            prop_assert!((0.0..=1.0 + 1e-12).contains(&dxy));
            prop_assert_eq!(chi_square(&x, &x).unwrap(), 0.0);
        }
    }

    #[test]
    fn knn_examples() {
        let train = vec![lh(&[1.0, 0.0], 0), lh(&[0.9, 0.1], 0), lh(&[0.0, 1.0], 1), lh(&[0.6, 0.4], 1)];
        assert_eq!(knn_classify(&h(&[0.0, 1.0]), &train, 1).unwrap(), 1);
        // neighbors of [0.8, 0.2]: 0.9/0.1 (A), 1.0/0.0 (A), 0.6/0.4 (B)
        assert_eq!(knn_classify(&h(&[0.8, 0.2]), &train, 3).unwrap(), 0);
        assert!(knn_classify(&h(&[0.8, 0.2]), &[], 1).is_err());
        assert!(knn_classify(&h(&[0.8, 0.2]), &train, 5).is_err());
        assert!(knn_classify(&h(&[0.8, 0.2]), &train, 0).is_err());
    }

    #[test]
    fn vote_tie_goes_to_nearest_member() {
        assert_eq!(vote([2, 1, 1, 2], 4), Some(2));
        assert_eq!(vote([1, 2, 2, 1], 4), Some(1));
        assert_eq!(vote([3, 1, 1], 3), Some(1));
    }

    /// Sorts all (distance, index) pairs and counts votes with plain loops.
    fn oracle_knn(query: &FeatureHistogram, train: &[LabeledHistogram], k: usize) -> usize {
        let mut pairs: Vec<(f64, usize)> = train.iter().enumerate().map(|(i, t)| {
            let mut s = 0.0;
            for (a, b) in query.bins().iter().zip(t.hist.bins()) {
                if a + b != 0.0 {
                    s += (a - b) * (a - b) / (a + b);
                }
            }
            (s / 2.0, i)
        }).collect();
        pairs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let classes: Vec<usize> = pairs[..k].iter().map(|&(_, i)| train[i].class).collect();
        let max_class = *classes.iter().max().unwrap();
        let mut counts = vec![0; max_class + 1];
        for &c in &classes {
            counts[c] += 1;
        }
        let best = *counts.iter().max().unwrap();
        *classes.iter().find(|&&c| counts[c] == best).unwrap()
    }

    #[test]
    fn knn_matches_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..300 {
            let n = rng.random_range(1..15);
            let train: Vec<_> = (0..n).map(|_| LabeledHistogram { hist: random_hist(&mut rng, 6), class: rng.random_range(0..4) }).collect();
            let query = random_hist(&mut rng, 6);
            let k = rng.random_range(1..=n);
            assert_eq!(knn_classify(&query, &train, k).unwrap(), oracle_knn(&query, &train, k));
        }
    }

    #[test]
    fn ranking_with_exact_copy() {
        let db = vec![lh(&[0.5, 0.5], 0), lh(&[0.2, 0.8], 1), lh(&[1.0, 0.0], 0)];
        let r = rank_references(&lh(&[0.2, 0.8], 1), &db).unwrap();
        assert_eq!(r.ranked[0], 1);
        assert_eq!(r.distances[0], 0.0);
        assert_eq!(r.relevant, vec![true, false, false]);
        assert!(rank_references(&lh(&[0.2, 0.8], 1), &[]).is_err());
    }

    #[test]
    fn two_element_order() {
        // d([1,0],[0.5,0.5]) = 0.5*(0.25/1.5 + 0.25/0.5) = 1/3; d([1,0],[0,1]) = 1
        let db = vec![lh(&[0.0, 1.0], 0), lh(&[0.5, 0.5], 1)];
        let r = rank_references(&lh(&[1.0, 0.0], 1), &db).unwrap();
        assert_eq!(r.ranked, vec![1, 0]);
        assert!((r.distances[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.distances[1], 1.0);
    }

    #[test]
    fn permutation_only_reorders_ties() {
        let db = vec![lh(&[0.5, 0.5], 0), lh(&[0.5, 0.5], 1), lh(&[0.9, 0.1], 2)];
        let q = lh(&[0.5, 0.5], 0);
        assert_eq!(rank_references(&q, &db).unwrap().ranked, vec![0, 1, 2]);
        let swapped = vec![db[1].clone(), db[0].clone(), db[2].clone()];
        let r = rank_references(&q, &swapped).unwrap();
        assert_eq!(r.ranked, vec![0, 1, 2]);
        assert_eq!(r.relevant, vec![false, true, false]);
    }

    #[test]
    fn recall_precision_arithmetic() {
        let all = RankedRetrieval { query_class: 0, ranked: (0..5).collect(), distances: vec![0.0; 5], relevant: vec![true; 5] };
        assert_eq!(recall_precision(&all, 5, 40).unwrap(), (0.125, 1.0));
        let some = RankedRetrieval { relevant: vec![true, false, true, false, true], ..all.clone() };
        let (r, p) = recall_precision(&some, 5, 40).unwrap();
        assert!((r - 0.075).abs() < 1e-12 && (p - 0.6).abs() < 1e-12);
        assert!(recall_precision(&some, 6, 40).is_err());
        assert!(recall_precision(&some, 1, 0).is_err());
    }

    #[test]
    fn exhaustive_retrieval_has_full_recall() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let db: Vec<_> = (0..9).map(|i| LabeledHistogram { hist: random_hist(&mut rng, 5), class: i % 3 }).collect();
        let r = rank_references(&db[4], &db).unwrap();
        assert_eq!(recall_precision(&r, 9, 3).unwrap().0, 1.0);
    }

    #[test]
    fn pr_curve_self_match_and_single_class() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let db: Vec<_> = (0..12).map(|i| LabeledHistogram { hist: random_hist(&mut rng, 8), class: i % 4 }).collect();
        let c = pr_curve(&db, &db, &[1]).unwrap();
        assert_eq!(c.precision, vec![1.0]);
        let single: Vec<_> = db.iter().map(|d| LabeledHistogram { class: 0, ..d.clone() }).collect();
        let c = pr_curve(&single, &single, &odd_ks(12)).unwrap();
        assert!(c.precision.iter().all(|&p| p == 1.0));
        assert!(c.recall.windows(2).all(|w| w[0] <= w[1]));
        assert!(pr_curve(&[], &db, &[1]).is_err());
        assert!(pr_curve(&db, &db, &[2]).is_err());
        assert!(pr_curve(&db, &db, &[3, 1]).is_err());
    }

    #[test]
    fn pr_curve_toy_enumeration() {
        // 1-D positions on a line; histograms encode position t as [t, 1 - t]
        let pos = [(0.0, 0), (0.1, 0), (0.5, 1), (0.6, 1), (0.95, 0)];
        let db: Vec<_> = pos.iter().map(|&(t, c)| lh(&[t, 1.0 - t], c)).collect();
        let queries = vec![lh(&[0.05, 0.95], 0), lh(&[0.55, 0.45], 1)];
        let c = pr_curve(&queries, &db, &[1, 3, 5]).unwrap();
        // query 0 ranks 0,1 then 2 (class 1); query 1 ranks 2,3 then 4 or 1
        // k=1: q0 1 hit, q1 1 hit; k=3: q0 2 hits, q1 2 hits; k=5: 3 and 2
        let expect_recall = [(1.0 / 3.0 + 1.0 / 2.0) / 2.0, (2.0 / 3.0 + 2.0 / 2.0) / 2.0, (1.0 + 1.0) / 2.0];
        let expect_precision = [1.0, 2.0 / 3.0, (3.0 / 5.0 + 2.0 / 5.0) / 2.0];
        for j in 0..3 {
            assert!((c.recall[j] - expect_recall[j]).abs() < 1e-12);
            assert!((c.precision[j] - expect_precision[j]).abs() < 1e-12);
        }
        assert_eq!(c.to_csv().lines().next(), Some("k,recall,precision"));
    }

    #[test]
    fn distance_matrix_rows() {
        let a = vec![h(&[1.0, 0.0]), h(&[0.0, 1.0])];
        let m = DistanceMatrix::compute(&a, &a).unwrap();
        assert_eq!(m.row(0), &[0.0, 1.0]);
        assert_eq!(m.get(1, 0), 1.0);
        assert!(DistanceMatrix::compute(&a, &[h(&[1.0])]).is_err());
    }

    #[test]
    fn knn_of_one_is_top_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let db: Vec<_> = (0..10).map(|_| LabeledHistogram { hist: random_hist(&mut rng, 4), class: rng.random_range(0..3) }).collect();
            let q = LabeledHistogram { hist: random_hist(&mut rng, 4), class: 0 };
            let top = rank_references(&q, &db).unwrap().ranked[0];
            assert_eq!(knn_classify(&q.hist, &db, 1).unwrap(), db[top].class);
        }
    }
}
