//! Small supervised classifiers shared by component attribution and
//! guilt-by-association: inverse-distance-weighted k-NN over standardized
//! features, and multinomial logistic regression trained by full-batch
//! gradient descent. Both expose ranked class probabilities.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Per-feature z-scoring with parameters learned at fit time. Constant
/// features get unit scale so they drop out of distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        let dims = rows.first().map_or(0, Vec::len);
        let n = rows.len().max(1) as f64;
        let mut mean = vec![0.0; dims];
        for row in rows {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut std = vec![0.0; dims];
        for row in rows {
            for ((s, v), m) in std.iter_mut().zip(row).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut std {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { mean, std }
    }

    pub fn transform(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Which classifier to train, with its hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierChoice {
    Knn { k: usize },
    Softmax { learning_rate: f64, epochs: usize, l2: f64 },
}

impl ClassifierChoice {
    pub fn default_knn() -> ClassifierChoice {
        ClassifierChoice::Knn { k: 5 }
    }

    pub fn default_softmax() -> ClassifierChoice {
        ClassifierChoice::Softmax {
            learning_rate: 0.5,
            epochs: 400,
            l2: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedClassifier {
    Knn(KnnModel),
    Softmax(SoftmaxModel),
}

impl TrainedClassifier {
    pub fn classes(&self) -> &[String] {
        match self {
            TrainedClassifier::Knn(m) => &m.classes,
            TrainedClassifier::Softmax(m) => &m.classes,
        }
    }

    /// Probability per class, aligned with `classes()`, summing to 1.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        match self {
            TrainedClassifier::Knn(m) => m.predict_proba(x),
            TrainedClassifier::Softmax(m) => m.predict_proba(x),
        }
    }

    /// Classes ranked by probability, descending, ties by class name.
    pub fn rank(&self, x: &[f64]) -> Vec<(String, f64)> {
        let probs = self.predict_proba(x);
        let mut ranked: Vec<(String, f64)> = self
            .classes()
            .iter()
            .cloned()
            .zip(probs)
            .collect();
        ranked.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        ranked
    }
}

/// Trains the chosen classifier. At least two distinct labels are required.
pub fn train(
    choice: ClassifierChoice,
    rows: &[Vec<f64>],
    labels: &[String],
) -> Result<TrainedClassifier> {
    if rows.len() != labels.len() || rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "training needs matching non-empty rows and labels, got {} rows / {} labels",
            rows.len(),
            labels.len()
        )));
    }
    let mut classes: Vec<String> = labels.to_vec();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidInput(
            "training needs at least two classes".to_string(),
        ));
    }
    let class_index: BTreeMap<&str, usize> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let y: Vec<usize> = labels.iter().map(|l| class_index[l.as_str()]).collect();
    match choice {
        ClassifierChoice::Knn { k } => {
            if k == 0 {
                return Err(Error::InvalidConfig("knn k must be positive".to_string()));
            }
            Ok(TrainedClassifier::Knn(KnnModel {
                k,
                rows: rows.to_vec(),
                y,
                classes,
            }))
        }
        ClassifierChoice::Softmax {
            learning_rate,
            epochs,
            l2,
        } => Ok(TrainedClassifier::Softmax(SoftmaxModel::fit(
            rows,
            &y,
            classes,
            learning_rate,
            epochs,
            l2,
        ))),
    }
}

/// k nearest neighbors with inverse-distance-weighted votes. Probabilities
/// are the normalized vote shares among the k neighbors; an exact feature
/// match dominates the vote.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnnModel {
    pub k: usize,
    rows: Vec<Vec<f64>>,
    y: Vec<usize>,
    classes: Vec<String>,
}

impl KnnModel {
    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d: f64 = row
                    .iter()
                    .zip(x)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt();
                (d, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
        let mut votes = vec![0.0; self.classes.len()];
        for &(d, i) in dists.iter().take(self.k) {
            votes[self.y[i]] += 1.0 / (d + 1e-9);
        }
        let total: f64 = votes.iter().sum();
        for v in &mut votes {
            *v /= total;
        }
        votes
    }
}

/// Multinomial logistic regression, full-batch gradient descent. Zero
/// initialization and a fixed epoch count keep training deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SoftmaxModel {
    weights: Vec<Vec<f64>>, // class-major
    bias: Vec<f64>,
    classes: Vec<String>,
}

impl SoftmaxModel {
    fn fit(
        rows: &[Vec<f64>],
        y: &[usize],
        classes: Vec<String>,
        learning_rate: f64,
        epochs: usize,
        l2: f64,
    ) -> SoftmaxModel {
        let dims = rows[0].len();
        let n_classes = classes.len();
        let n = rows.len() as f64;
        let mut weights = vec![vec![0.0; dims]; n_classes];
        let mut bias = vec![0.0; n_classes];
        let mut grad_w = vec![vec![0.0; dims]; n_classes];
        let mut grad_b = vec![0.0; n_classes];
        for _ in 0..epochs {
            for g in grad_w.iter_mut() {
                g.iter_mut().for_each(|v| *v = 0.0);
            }
            grad_b.iter_mut().for_each(|v| *v = 0.0);
            for (row, &label) in rows.iter().zip(y) {
                let probs = softmax_scores(&weights, &bias, row);
                for c in 0..n_classes {
                    let err = probs[c] - if c == label { 1.0 } else { 0.0 };
                    for (g, v) in grad_w[c].iter_mut().zip(row) {
                        *g += err * v;
                    }
                    grad_b[c] += err;
                }
            }
            for c in 0..n_classes {
                for (w, g) in weights[c].iter_mut().zip(&grad_w[c]) {
                    *w -= learning_rate * (g / n + l2 * *w);
                }
                bias[c] -= learning_rate * grad_b[c] / n;
            }
        }
        SoftmaxModel {
            weights,
            bias,
            classes,
        }
    }

    fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        softmax_scores(&self.weights, &self.bias, x)
    }
}

fn softmax_scores(weights: &[Vec<f64>], bias: &[f64], x: &[f64]) -> Vec<f64> {
    let mut scores: Vec<f64> = weights
        .iter()
        .zip(bias)
        .map(|(w, b)| w.iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>() + b)
        .collect();
    let max = scores.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for s in &mut scores {
        *s = (*s - max).exp();
        total += *s;
    }
    for s in &mut scores {
        *s /= total;
    }
    scores
}

/// Precision, recall, and F1 for one class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prf {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

/// Per-class precision/recall/F1 plus micro and macro F over predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub per_class: BTreeMap<String, Prf>,
    pub micro_f1: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
}

pub fn classification_report(truth: &[String], predicted: &[String]) -> ClassificationReport {
    assert_eq!(truth.len(), predicted.len());
    let mut tp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fp: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fn_: BTreeMap<&str, usize> = BTreeMap::new();
    let mut correct = 0;
    for (t, p) in truth.iter().zip(predicted) {
        if t == p {
            correct += 1;
            *tp.entry(t).or_default() += 1;
        } else {
            *fp.entry(p).or_default() += 1;
            *fn_.entry(t).or_default() += 1;
        }
    }
    let classes: std::collections::BTreeSet<&str> = truth
        .iter()
        .chain(predicted)
        .map(String::as_str)
        .collect();
    let mut per_class = BTreeMap::new();
    let mut macro_sum = 0.0;
    for class in &classes {
        let tp = *tp.get(class).unwrap_or(&0) as f64;
        let fp = *fp.get(class).unwrap_or(&0) as f64;
        let fn_ = *fn_.get(class).unwrap_or(&0) as f64;
        let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
        let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        let support = truth.iter().filter(|t| t.as_str() == *class).count();
        macro_sum += f1;
        per_class.insert(class.to_string(), Prf { precision, recall, f1, support });
    }
    let accuracy = correct as f64 / truth.len().max(1) as f64;
    ClassificationReport {
        micro_f1: accuracy, // single-label multiclass: micro-F equals accuracy
        macro_f1: macro_sum / classes.len().max(1) as f64,
        per_class,
        accuracy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn knn_nearest_neighbor_is_itself() {
        let rows = vec![vec![0.0, 0.0], vec![5.0, 5.0], vec![9.0, 0.0]];
        let model = train(
            ClassifierChoice::Knn { k: 1 },
            &rows,
            &labels(&["a", "b", "c"]),
        )
        .unwrap();
        for (row, expected) in rows.iter().zip(["a", "b", "c"]) {
            assert_eq!(model.rank(row)[0].0, expected);
        }
    }

    #[test]
    fn knn_probabilities_sum_to_one() {
        let rows = vec![vec![0.0], vec![1.0], vec![2.0], vec![3.0]];
        let model = train(
            ClassifierChoice::Knn { k: 3 },
            &rows,
            &labels(&["a", "a", "b", "b"]),
        )
        .unwrap();
        let probs = model.predict_proba(&[1.4]);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_training_fails() {
        let rows = vec![vec![0.0], vec![1.0]];
        let err = train(ClassifierChoice::default_knn(), &rows, &labels(&["a", "a"]));
        assert!(err.is_err());
    }

    #[test]
    fn softmax_separates_linearly_separable_clusters() {
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in 0..10 {
            rows.push(vec![1.0 + (i as f64) * 0.01, 0.0]);
            y.push("left".to_string());
            rows.push(vec![-1.0 - (i as f64) * 0.01, 0.1]);
            y.push("right".to_string());
        }
        let model = train(ClassifierChoice::default_softmax(), &rows, &y).unwrap();
        assert_eq!(model.rank(&[2.0, 0.0])[0].0, "left");
        assert_eq!(model.rank(&[-2.0, 0.0])[0].0, "right");
        let probs = model.predict_proba(&[0.5, 0.0]);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn standardizer_zero_variance_features_drop_out() {
        let rows = vec![vec![3.0, 1.0], vec![3.0, 5.0]];
        let scaler = Standardizer::fit(&rows);
        let t = scaler.transform(&[3.0, 3.0]);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[1], 0.0);
    }

    #[test]
    fn report_counts_match_hand_computation() {
        let truth = labels(&["a", "a", "b", "b"]);
        let pred = labels(&["a", "b", "b", "b"]);
        let report = classification_report(&truth, &pred);
        assert_eq!(report.accuracy, 0.75);
        let a = report.per_class["a"];
        assert_eq!(a.precision, 1.0);
        assert_eq!(a.recall, 0.5);
        let b = report.per_class["b"];
        assert!((b.precision - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(b.recall, 1.0);
    }
}
