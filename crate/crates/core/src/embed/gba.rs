//! Guilt-by-association: label unknown accounts with the worker whose known
//! accounts they embed closest to, via a classifier over embedding vectors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::classify::{train, ClassifierChoice, TrainedClassifier};
use crate::{Error, Result};

use super::Embedding;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbaConfig {
    pub classifier: ClassifierChoice,
    /// Minimum top-class probability to accept a new label.
    pub threshold: f64,
}

impl Default for GbaConfig {
    fn default() -> Self {
        GbaConfig {
            classifier: ClassifierChoice::default_softmax(),
            threshold: 0.5,
        }
    }
}

/// Worker classifier over embedding vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GbaModel {
    classifier: TrainedClassifier,
}

impl GbaModel {
    pub fn classes(&self) -> &[String] {
        self.classifier.classes()
    }

    /// Ranked (worker, probability) for one embedded account.
    pub fn rank(&self, embedding: &Embedding, node: &str) -> Result<Vec<(String, f64)>> {
        let vector = embedding
            .vector(node)
            .ok_or_else(|| Error::InvalidInput(format!("node {node:?} has no embedding")))?;
        let x: Vec<f64> = vector.iter().map(|v| *v as f64).collect();
        Ok(self.classifier.rank(&x))
    }
}

/// Trains on the labeled subset of embedded nodes. Labels for nodes without
/// an embedding are an error; fewer than two distinct workers are an error.
pub fn train_gba(
    embedding: &Embedding,
    labels: &BTreeMap<String, String>,
    cfg: &GbaConfig,
) -> Result<GbaModel> {
    let mut rows = Vec::with_capacity(labels.len());
    let mut y = Vec::with_capacity(labels.len());
    for (node, worker) in labels {
        let vector = embedding
            .vector(node)
            .ok_or_else(|| Error::InvalidInput(format!("labeled node {node:?} has no embedding")))?;
        rows.push(vector.iter().map(|v| *v as f64).collect());
        y.push(worker.clone());
    }
    let classifier = train(cfg.classifier, &rows, &y)?;
    Ok(GbaModel { classifier })
}

/// Predicts a worker for each unlabeled account; accounts whose top
/// probability falls below the confidence threshold stay unlabeled.
pub fn guilt_by_association(
    embedding: &Embedding,
    labels: &BTreeMap<String, String>,
    unlabeled: &BTreeSet<String>,
    cfg: &GbaConfig,
) -> Result<BTreeMap<String, (String, f64)>> {
    let model = train_gba(embedding, labels, cfg)?;
    let mut out = BTreeMap::new();
    for node in unlabeled {
        let ranked = model.rank(embedding, node)?;
        let (worker, score) = &ranked[0];
        if *score >= cfg.threshold {
            out.insert(node.clone(), (worker.clone(), *score));
        }
    }
    Ok(out)
}
