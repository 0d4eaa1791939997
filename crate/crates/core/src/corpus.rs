//! Review corpus: data model, JSONL ingestion, and longitudinal snapshots.
//!
//! A corpus is one `reviews.jsonl` file (one review per line) plus an
//! optional `attributions.jsonl` file mapping accounts to the workers known
//! to control them. The corpus is immutable once loaded; all indices are
//! built up front.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One user's text activity on one product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Review {
    pub review_id: String,
    pub account_id: String,
    pub product_id: String,
    pub text: String,
    pub rating: u8,
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_id: Option<String>,
    /// Unknown fields from evolving crawls, preserved opaquely on round-trip.
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// Non-fatal observations from a load.
#[derive(Debug, Default, Clone)]
pub struct LoadReport {
    pub reviews: usize,
    pub records_with_unknown_fields: usize,
    pub warnings: Vec<String>,
}

/// Outcome of merging an attribution file into a corpus.
#[derive(Debug, Default, Clone)]
pub struct AttributionReport {
    pub labeled: usize,
    pub skipped_unknown_accounts: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    reviews: Vec<Review>,
    accounts: BTreeSet<String>,
    products: BTreeSet<String>,
    attributions: BTreeMap<String, String>,
    by_account: BTreeMap<String, Vec<usize>>,
    by_product: BTreeMap<String, Vec<usize>>,
    by_id: HashMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus from in-memory reviews, rejecting duplicate ids.
    pub fn from_reviews(reviews: Vec<Review>) -> Result<Corpus> {
        let mut corpus = Corpus::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (i, review) in reviews.iter().enumerate() {
            if seen.insert(review.review_id.clone(), i).is_some() {
                return Err(Error::DuplicateReviewId {
                    line: i + 1,
                    review_id: review.review_id.clone(),
                });
            }
            validate_review(review).map_err(|message| Error::Parse {
                line: i + 1,
                message,
            })?;
        }
        for (i, review) in reviews.iter().enumerate() {
            corpus.accounts.insert(review.account_id.clone());
            corpus.products.insert(review.product_id.clone());
            corpus
                .by_account
                .entry(review.account_id.clone())
                .or_default()
                .push(i);
            corpus
                .by_product
                .entry(review.product_id.clone())
                .or_default()
                .push(i);
            corpus.by_id.insert(review.review_id.clone(), i);
        }
        corpus.reviews = reviews;
        Ok(corpus)
    }

    /// Loads a line-delimited JSON review file. Parse failures report the
    /// offending line; unknown fields are preserved and reported as warnings.
    pub fn load(path: &Path) -> Result<(Corpus, LoadReport)> {
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let mut reviews = Vec::new();
        let mut report = LoadReport::default();
        let mut seen: HashMap<String, usize> = HashMap::new();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let review: Review = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            validate_review(&review).map_err(|message| Error::Parse {
                line: line_no,
                message,
            })?;
            if seen.insert(review.review_id.clone(), line_no).is_some() {
                return Err(Error::DuplicateReviewId {
                    line: line_no,
                    review_id: review.review_id,
                });
            }
            if !review.extra.is_empty() {
                report.records_with_unknown_fields += 1;
                if report.warnings.len() < 10 {
                    let fields: Vec<&str> = review.extra.keys().map(String::as_str).collect();
                    report.warnings.push(format!(
                        "line {line_no}: unknown fields preserved: {}",
                        fields.join(", ")
                    ));
                }
            }
            reviews.push(review);
        }
        report.reviews = reviews.len();
        let corpus = Corpus::from_reviews(reviews)?;
        Ok((corpus, report))
    }

    /// Writes the corpus back out as reviews.jsonl, preserving record order
    /// and unknown fields so that load(save(c)) == c.
    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        for review in &self.reviews {
            serde_json::to_writer(&mut out, review)
                .map_err(|e| Error::InvalidInput(format!("serialize review: {e}")))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
        Ok(())
    }

    /// Merges an attributions.jsonl file (`{account_id, worker_id}` per line).
    /// Labels for accounts not in the corpus are skipped and counted;
    /// conflicting labels for one account are a hard error.
    pub fn load_attributions(&mut self, path: &Path) -> Result<AttributionReport> {
        #[derive(Deserialize)]
        struct Record {
            account_id: String,
            worker_id: String,
        }
        let file = File::open(path)?;
        let reader = BufReader::new(file);
        let mut report = AttributionReport::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: Record = serde_json::from_str(&line).map_err(|e| Error::Parse {
                line: line_no,
                message: e.to_string(),
            })?;
            if !self.accounts.contains(&record.account_id) {
                report.skipped_unknown_accounts += 1;
                if report.warnings.len() < 10 {
                    report.warnings.push(format!(
                        "line {line_no}: unknown account {:?} skipped",
                        record.account_id
                    ));
                }
                continue;
            }
            match self.attributions.get(&record.account_id) {
                Some(existing) if *existing != record.worker_id => {
                    return Err(Error::ConflictingAttribution {
                        account_id: record.account_id,
                        existing: existing.clone(),
                        incoming: record.worker_id,
                    });
                }
                Some(_) => {}
                None => {
                    self.attributions
                        .insert(record.account_id, record.worker_id);
                    report.labeled += 1;
                }
            }
        }
        Ok(report)
    }

    /// Adds a single attribution label. Same conflict semantics as the file
    /// loader; unknown accounts are rejected.
    pub fn attribute_account(&mut self, account_id: &str, worker_id: &str) -> Result<()> {
        if !self.accounts.contains(account_id) {
            return Err(Error::InvalidInput(format!(
                "unknown account {account_id:?}"
            )));
        }
        match self.attributions.get(account_id) {
            Some(existing) if existing != worker_id => Err(Error::ConflictingAttribution {
                account_id: account_id.to_string(),
                existing: existing.clone(),
                incoming: worker_id.to_string(),
            }),
            _ => {
                self.attributions
                    .insert(account_id.to_string(), worker_id.to_string());
                Ok(())
            }
        }
    }

    pub fn reviews(&self) -> &[Review] {
        &self.reviews
    }

    pub fn accounts(&self) -> &BTreeSet<String> {
        &self.accounts
    }

    pub fn products(&self) -> &BTreeSet<String> {
        &self.products
    }

    pub fn attributions(&self) -> &BTreeMap<String, String> {
        &self.attributions
    }

    pub fn worker_of(&self, account_id: &str) -> Option<&str> {
        self.attributions.get(account_id).map(String::as_str)
    }

    pub fn review_by_id(&self, review_id: &str) -> Option<&Review> {
        self.by_id.get(review_id).map(|&i| &self.reviews[i])
    }

    pub fn reviews_by_account(&self, account_id: &str) -> impl Iterator<Item = &Review> {
        self.by_account
            .get(account_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.reviews[i])
    }

    pub fn reviews_for_product(&self, product_id: &str) -> impl Iterator<Item = &Review> {
        self.by_product
            .get(product_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.reviews[i])
    }

    /// Distinct reviewer accounts of a product, sorted.
    pub fn reviewers_of(&self, product_id: &str) -> BTreeSet<String> {
        self.reviews_for_product(product_id)
            .map(|r| r.account_id.clone())
            .collect()
    }

    /// Distinct products reviewed by an account, sorted.
    pub fn products_of(&self, account_id: &str) -> BTreeSet<String> {
        self.reviews_by_account(account_id)
            .map(|r| r.product_id.clone())
            .collect()
    }

    /// Per-snapshot review-id sets for one product, in time order. Errors if
    /// any of the product's reviews lack a snapshot id.
    pub fn snapshot_series(&self, product_id: &str) -> Result<SnapshotSeries> {
        if !self.products.contains(product_id) {
            return Err(Error::UnknownProduct(product_id.to_string()));
        }
        let mut snapshots: BTreeMap<String, (i64, BTreeSet<String>)> = BTreeMap::new();
        for review in self.reviews_for_product(product_id) {
            let Some(snapshot_id) = &review.snapshot_id else {
                return Err(Error::MissingSnapshots(product_id.to_string()));
            };
            let entry = snapshots
                .entry(snapshot_id.clone())
                .or_insert((i64::MIN, BTreeSet::new()));
            entry.0 = entry.0.max(review.timestamp);
            entry.1.insert(review.review_id.clone());
        }
        let mut entries: Vec<SnapshotEntry> = snapshots
            .into_iter()
            .map(|(snapshot_id, (timestamp, review_ids))| SnapshotEntry {
                snapshot_id,
                timestamp,
                review_ids,
            })
            .collect();
        entries.sort_by(|a, b| (a.timestamp, &a.snapshot_id).cmp(&(b.timestamp, &b.snapshot_id)));
        for pair in entries.windows(2) {
            if pair[0].timestamp >= pair[1].timestamp {
                return Err(Error::InvalidInput(format!(
                    "product {product_id:?}: snapshots {:?} and {:?} do not have strictly increasing timestamps",
                    pair[0].snapshot_id, pair[1].snapshot_id
                )));
            }
        }
        Ok(SnapshotSeries {
            product_id: product_id.to_string(),
            entries,
        })
    }
}

fn validate_review(review: &Review) -> std::result::Result<(), String> {
    if !(1..=5).contains(&review.rating) {
        return Err(format!(
            "rating {} out of range 1-5 for review {:?}",
            review.rating, review.review_id
        ));
    }
    if review.review_id.is_empty() {
        return Err("empty review_id".to_string());
    }
    Ok(())
}

/// One crawl round of a product: which review records were visible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub snapshot_id: String,
    /// Latest review timestamp observed in the snapshot.
    pub timestamp: i64,
    pub review_ids: BTreeSet<String>,
}

/// Time-ordered snapshots of one product. A review id present in one
/// snapshot and missing from a later one was filtered by the platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnapshotSeries {
    pub product_id: String,
    pub entries: Vec<SnapshotEntry>,
}
