//! Component attribution: train on known workers' review instances, then
//! name the worker behind each detected fraud component by its writing
//! style. Attribution abstains on components with too few reviews or
//! without a confident winner, since a detected component may simply be a
//! tight group of honest enthusiasts.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::classify::{train, ClassifierChoice, Standardizer, TrainedClassifier};
use crate::corpus::Corpus;
use crate::mcdense::{partition_product, suspicious_components, DensityConfig, FraudComponent};
use crate::stylo::{
    build_feature_space, candidate_instance, extract_features, FeatureSpace, KTop, ReviewInstance,
    DEFAULT_MIN_REVIEWS,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttributorConfig {
    pub classifier: ClassifierChoice,
    /// Top probability below this abstains instead of naming a worker.
    pub abstain_threshold: f64,
    /// Candidate instances need at least this many reviews.
    pub min_reviews: usize,
}

impl Default for AttributorConfig {
    fn default() -> Self {
        AttributorConfig {
            classifier: ClassifierChoice::default_knn(),
            abstain_threshold: 0.5,
            min_reviews: DEFAULT_MIN_REVIEWS,
        }
    }
}

/// A known worker: accounts and the training instances they produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerProfile {
    pub worker_id: String,
    pub accounts: BTreeSet<String>,
    /// Indices into the instance list the profiles were derived from.
    pub instance_ids: Vec<usize>,
}

pub fn worker_profiles(corpus: &Corpus, instances: &[ReviewInstance]) -> Vec<WorkerProfile> {
    let mut profiles: std::collections::BTreeMap<String, WorkerProfile> =
        std::collections::BTreeMap::new();
    for (account, worker) in corpus.attributions() {
        profiles
            .entry(worker.clone())
            .or_insert_with(|| WorkerProfile {
                worker_id: worker.clone(),
                accounts: BTreeSet::new(),
                instance_ids: Vec::new(),
            })
            .accounts
            .insert(account.clone());
    }
    for (i, instance) in instances.iter().enumerate() {
        if let Some(worker) = &instance.worker_id {
            if let Some(profile) = profiles.get_mut(worker) {
                profile.instance_ids.push(i);
            }
        }
    }
    profiles.into_values().collect()
}

/// Style classifier over a frozen feature space, with the standardization
/// learned at training time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionModel {
    scaler: Standardizer,
    classifier: TrainedClassifier,
}

impl AttributionModel {
    pub fn classes(&self) -> &[String] {
        self.classifier.classes()
    }

    /// Ranked (worker, probability) for an instance already in the space.
    pub fn rank(&self, space: &FeatureSpace, instance: &ReviewInstance) -> Vec<(String, f64)> {
        let vector = extract_features(instance, space);
        self.classifier.rank(&self.scaler.transform(&vector.values))
    }
}

/// Trains the attribution model on labeled instances. Needs at least two
/// distinct workers.
pub fn train_attributor(
    instances: &[ReviewInstance],
    space: &FeatureSpace,
    cfg: &AttributorConfig,
) -> Result<AttributionModel> {
    let mut rows = Vec::with_capacity(instances.len());
    let mut labels = Vec::with_capacity(instances.len());
    for instance in instances {
        let Some(worker) = &instance.worker_id else {
            return Err(Error::InvalidInput(
                "training instances must carry a worker id".to_string(),
            ));
        };
        rows.push(extract_features(instance, space).values);
        labels.push(worker.clone());
    }
    let scaler = Standardizer::fit(&rows);
    let scaled: Vec<Vec<f64>> = rows.iter().map(|r| scaler.transform(r)).collect();
    let classifier = train(cfg.classifier, &scaled, &labels)?;
    Ok(AttributionModel { scaler, classifier })
}

/// Outcome of attributing one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionResult {
    pub component_id: String,
    pub product_id: String,
    pub accounts: BTreeSet<String>,
    /// Workers by descending probability; empty when no ranking was run.
    pub ranking: Vec<(String, f64)>,
    /// Rank-1 worker, absent on abstention.
    pub attributed: Option<String>,
    pub abstained: bool,
    pub abstain_reason: Option<String>,
    /// Two or more workers shared the top probability; the attributed one
    /// is the lexicographically smallest.
    pub tie: bool,
}

/// Attributes one detected component by pooling its reviews of the
/// component's product into a candidate instance.
pub fn attribute_component(
    component_id: &str,
    component: &FraudComponent,
    corpus: &Corpus,
    model: &AttributionModel,
    space: &FeatureSpace,
    cfg: &AttributorConfig,
) -> AttributionResult {
    let instance = candidate_instance(corpus, &component.product_id, &component.accounts);
    let base = AttributionResult {
        component_id: component_id.to_string(),
        product_id: component.product_id.clone(),
        accounts: component.accounts.clone(),
        ranking: Vec::new(),
        attributed: None,
        abstained: true,
        abstain_reason: None,
        tie: false,
    };
    if instance.texts.len() < cfg.min_reviews {
        return AttributionResult {
            abstain_reason: Some(format!(
                "insufficient reviews: {} < {}",
                instance.texts.len(),
                cfg.min_reviews
            )),
            ..base
        };
    }
    let ranking = model.rank(space, &instance);
    let top = ranking[0].1;
    let tie = ranking.len() > 1 && (ranking[1].1 - top).abs() < 1e-12;
    if top < cfg.abstain_threshold {
        return AttributionResult {
            ranking,
            abstain_reason: Some(format!(
                "low confidence: {top:.3} < {}",
                cfg.abstain_threshold
            )),
            tie,
            ..base
        };
    }
    AttributionResult {
        attributed: Some(ranking[0].0.clone()),
        ranking,
        abstained: false,
        abstain_reason: None,
        tie,
        ..base
    }
}

/// Detection plus attribution for one product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductDeanonymization {
    pub product_id: String,
    pub results: Vec<AttributionResult>,
    /// Distinct workers behind the product's suspicious components.
    pub workers: BTreeSet<String>,
}

/// Partitions a product, keeps components at or above the density
/// threshold, and attributes each one.
pub fn deanonymize_product(
    corpus: &Corpus,
    product_id: &str,
    density: &DensityConfig,
    cfg: &AttributorConfig,
    model: &AttributionModel,
    space: &FeatureSpace,
) -> Result<ProductDeanonymization> {
    let partition = partition_product(corpus, product_id, density)?;
    let mut results = Vec::new();
    for (i, component) in suspicious_components(&partition, density.tau)
        .into_iter()
        .enumerate()
    {
        let id = format!("{product_id}/{i}");
        results.push(attribute_component(&id, component, corpus, model, space, cfg));
    }
    let workers = results
        .iter()
        .filter_map(|r| r.attributed.clone())
        .collect();
    Ok(ProductDeanonymization {
        product_id: product_id.to_string(),
        results,
        workers,
    })
}

/// One leave-one-out fold's outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct LooPrediction {
    pub worker_id: String,
    pub product_id: String,
    pub ranking: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooReport {
    pub predictions: Vec<LooPrediction>,
    /// Folds whose training remainder had fewer than two workers.
    pub skipped: usize,
}

/// Leave-one-out over labeled instances. The feature space is rebuilt per
/// fold from the training remainder so held-out text never shapes the
/// vocabularies.
pub fn leave_one_out(
    instances: &[ReviewInstance],
    k_top: &KTop,
    cfg: &AttributorConfig,
) -> Result<LooReport> {
    let mut predictions = Vec::with_capacity(instances.len());
    let mut skipped = 0;
    for held in 0..instances.len() {
        let train_set: Vec<ReviewInstance> = instances
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != held)
            .map(|(_, inst)| inst.clone())
            .collect();
        let workers: BTreeSet<&String> =
            train_set.iter().filter_map(|i| i.worker_id.as_ref()).collect();
        if workers.len() < 2 {
            skipped += 1;
            continue;
        }
        let space = build_feature_space(&train_set, k_top)?;
        let model = train_attributor(&train_set, &space, cfg)?;
        let instance = &instances[held];
        let ranking = model.rank(&space, instance);
        predictions.push(LooPrediction {
            worker_id: instance
                .worker_id
                .clone()
                .ok_or_else(|| Error::InvalidInput("unlabeled instance in fold".to_string()))?,
            product_id: instance.product_id.clone(),
            ranking,
        });
    }
    Ok(LooReport {
        predictions,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Review;
    use crate::ratio;

    fn instance(worker: &str, product: &str, texts: &[String]) -> ReviewInstance {
        ReviewInstance {
            worker_id: Some(worker.to_string()),
            product_id: product.to_string(),
            texts: texts.to_vec(),
            account_ids: BTreeSet::new(),
        }
    }

    /// Formulaic per-worker review text with disjoint vocabulary.
    fn styled_text(worker: usize, salt: usize) -> String {
        let pools: [&[&str]; 3] = [
            &["amazing", "awesome", "superb", "fantastic", "brilliant"],
            &["useful", "handy", "practical", "reliable", "solid"],
            &["broken", "buggy", "laggy", "unstable", "awful"],
        ];
        let pool = pools[worker % 3];
        let a = pool[salt % pool.len()];
        let b = pool[(salt + 1) % pool.len()];
        let c = pool[(salt + 2) % pool.len()];
        match worker % 3 {
            0 => format!("{a} {b} app!! truly {c} stuff!!"),
            1 => format!("quite {a}, fairly {b}; {c} overall."),
            _ => format!("{a}... {b}... {c}... sadly"),
        }
    }

    fn styled_instances(per_worker: usize) -> Vec<ReviewInstance> {
        let mut out = Vec::new();
        for worker in 0..2 {
            for p in 0..per_worker {
                let texts: Vec<String> =
                    (0..6).map(|s| styled_text(worker, s + p * 3)).collect();
                out.push(instance(&format!("W{worker}"), &format!("p{p:02}"), &texts));
            }
        }
        out
    }

    #[test]
    fn disjoint_vocabularies_give_perfect_loo() {
        let instances = styled_instances(10);
        let report = leave_one_out(&instances, &KTop::default(), &AttributorConfig::default())
            .unwrap();
        assert_eq!(report.skipped, 0);
        assert_eq!(report.predictions.len(), 20);
        for p in &report.predictions {
            assert_eq!(p.ranking[0].0, p.worker_id);
        }
    }

    #[test]
    fn resubstitution_with_k1_returns_own_label() {
        let instances = styled_instances(3);
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        let cfg = AttributorConfig {
            classifier: ClassifierChoice::Knn { k: 1 },
            ..Default::default()
        };
        let model = train_attributor(&instances, &space, &cfg).unwrap();
        for inst in &instances {
            let ranking = model.rank(&space, inst);
            assert_eq!(&ranking[0].0, inst.worker_id.as_ref().unwrap());
            assert!(ranking[0].1 > 0.99);
        }
    }

    #[test]
    fn ranked_probabilities_sum_to_one() {
        let instances = styled_instances(4);
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        let model =
            train_attributor(&instances, &space, &AttributorConfig::default()).unwrap();
        let ranking = model.rank(&space, &instances[0]);
        let total: f64 = ranking.iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-9);
        for pair in ranking.windows(2) {
            assert!(pair[0].1 >= pair[1].1);
        }
    }

    #[test]
    fn duplicate_instances_under_two_labels_tie_deterministically() {
        // identical text under two labels: k=2 finds both at distance ~0,
        // the vote splits evenly, and the smaller worker id wins the tie
        let texts: Vec<String> = (0..5).map(|s| styled_text(0, s)).collect();
        let instances = vec![
            instance("W_b", "p1", &texts),
            instance("W_a", "p2", &texts),
            instance("W_c", "p3", &(0..5).map(|s| styled_text(2, s)).collect::<Vec<_>>()),
        ];
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        let cfg = AttributorConfig {
            classifier: ClassifierChoice::Knn { k: 2 },
            ..Default::default()
        };
        let model = train_attributor(&instances, &space, &cfg).unwrap();
        let candidate = ReviewInstance {
            worker_id: None,
            product_id: "pX".to_string(),
            texts,
            account_ids: BTreeSet::new(),
        };
        let component = FraudComponent {
            product_id: "pX".to_string(),
            accounts: BTreeSet::new(),
            triangle_density: ratio(1, 1),
            edge_density: ratio(1, 1),
        };
        // route through attribute_component via a corpus carrying the texts
        let mut reviews = Vec::new();
        for (i, text) in candidate.texts.iter().enumerate() {
            reviews.push(Review {
                review_id: format!("r{i}"),
                account_id: format!("a{i}"),
                product_id: "pX".to_string(),
                text: text.clone(),
                rating: 5,
                timestamp: 0,
                snapshot_id: None,
                extra: serde_json::Map::new(),
            });
        }
        let corpus = Corpus::from_reviews(reviews).unwrap();
        let component = FraudComponent {
            accounts: corpus.accounts().clone(),
            ..component
        };
        let result = attribute_component("pX/0", &component, &corpus, &model, &space, &cfg);
        assert!(result.tie);
        assert_eq!(result.attributed.as_deref(), Some("W_a"));
    }

    #[test]
    fn too_few_reviews_abstains_with_reason() {
        let instances = styled_instances(3);
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        let model =
            train_attributor(&instances, &space, &AttributorConfig::default()).unwrap();
        let mut reviews = Vec::new();
        for i in 0..4 {
            reviews.push(Review {
                review_id: format!("r{i}"),
                account_id: format!("a{i}"),
                product_id: "P".to_string(),
                text: styled_text(0, i),
                rating: 5,
                timestamp: 0,
                snapshot_id: None,
                extra: serde_json::Map::new(),
            });
        }
        let corpus = Corpus::from_reviews(reviews).unwrap();
        let component = FraudComponent {
            product_id: "P".to_string(),
            accounts: corpus.accounts().clone(),
            triangle_density: ratio(1, 1),
            edge_density: ratio(1, 1),
        };
        let result = attribute_component(
            "P/0",
            &component,
            &corpus,
            &model,
            &space,
            &AttributorConfig::default(),
        );
        assert!(result.abstained);
        assert!(result.abstain_reason.as_ref().unwrap().contains("insufficient reviews"));
        assert!(result.attributed.is_none());
    }

    #[test]
    fn single_worker_training_fails() {
        let mut instances = styled_instances(2);
        instances.retain(|i| i.worker_id.as_deref() == Some("W0"));
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        assert!(train_attributor(&instances, &space, &AttributorConfig::default()).is_err());
    }

    #[test]
    fn attribution_is_deterministic() {
        let instances = styled_instances(5);
        let space = build_feature_space(&instances, &KTop::default()).unwrap();
        let cfg = AttributorConfig::default();
        let m1 = train_attributor(&instances, &space, &cfg).unwrap();
        let m2 = train_attributor(&instances, &space, &cfg).unwrap();
        assert_eq!(m1, m2);
        assert_eq!(m1.rank(&space, &instances[3]), m2.rank(&space, &instances[3]));
    }
}
