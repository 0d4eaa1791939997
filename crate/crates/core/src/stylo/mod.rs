//! Stylometry: review instances and feature extraction.
//!
//! A review instance bundles all reviews one worker (or one candidate
//! component) wrote for one product; it is the unit of authorship
//! attribution. Features cover character structure, punctuation and
//! misspelling habits, and letter/word/POS n-gram distributions against
//! vocabularies frozen at training time. N-grams never cross review
//! boundaries, so a vector is invariant to review order within an instance.

pub mod pos;
pub mod text;
pub mod words;

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::{Error, Result};

pub const DEFAULT_MIN_REVIEWS: usize = 5;

/// All reviews by one author (known worker or candidate component) for one
/// product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReviewInstance {
    /// `None` marks a candidate instance built from a detected component.
    pub worker_id: Option<String>,
    pub product_id: String,
    pub texts: Vec<String>,
    pub account_ids: BTreeSet<String>,
}

/// Top-K vocabulary limits for the n-gram blocks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KTop {
    pub letter_digrams: usize,
    pub letter_trigrams: usize,
    pub word_digrams: usize,
    pub word_trigrams: usize,
}

impl Default for KTop {
    fn default() -> Self {
        KTop {
            letter_digrams: 200,
            letter_trigrams: 200,
            word_digrams: 300,
            word_trigrams: 300,
        }
    }
}

/// Groups a corpus's attributed reviews into per-(worker, product)
/// instances. Instances with fewer than `min_reviews` reviews are dropped;
/// the second return is how many were dropped.
pub fn group_instances(corpus: &Corpus, min_reviews: usize) -> (Vec<ReviewInstance>, usize) {
    let mut grouped: BTreeMap<(String, String), ReviewInstance> = BTreeMap::new();
    for review in corpus.reviews() {
        let Some(worker) = corpus.worker_of(&review.account_id) else {
            continue;
        };
        let key = (worker.to_string(), review.product_id.clone());
        let instance = grouped.entry(key).or_insert_with(|| ReviewInstance {
            worker_id: Some(worker.to_string()),
            product_id: review.product_id.clone(),
            texts: Vec::new(),
            account_ids: BTreeSet::new(),
        });
        instance.texts.push(review.text.clone());
        instance.account_ids.insert(review.account_id.clone());
    }
    let mut instances = Vec::new();
    let mut dropped = 0;
    for (_, instance) in grouped {
        if instance.texts.len() >= min_reviews {
            instances.push(instance);
        } else {
            dropped += 1;
        }
    }
    (instances, dropped)
}

/// Builds the candidate instance for a set of accounts on one product.
pub fn candidate_instance(
    corpus: &Corpus,
    product_id: &str,
    accounts: &BTreeSet<String>,
) -> ReviewInstance {
    let mut texts = Vec::new();
    for review in corpus.reviews_for_product(product_id) {
        if accounts.contains(&review.account_id) {
            texts.push(review.text.clone());
        }
    }
    ReviewInstance {
        worker_id: None,
        product_id: product_id.to_string(),
        texts,
        account_ids: accounts.clone(),
    }
}

#[derive(Debug, Default, Clone)]
struct Counts {
    total_chars: u64,
    non_ws_chars: u64,
    letters: [u64; 26],
    uppercase: u64,
    digits: u64,
    punct: BTreeMap<char, u64>,
    special: u64,
    tokens: u64,
    number_tokens: u64,
    word_tokens: u64,
    misspelled: u64,
    letter_digrams: BTreeMap<String, u64>,
    letter_trigrams: BTreeMap<String, u64>,
    word_digrams: BTreeMap<String, u64>,
    word_trigrams: BTreeMap<String, u64>,
    pos_unigrams: BTreeMap<String, u64>,
    pos_digrams: BTreeMap<String, u64>,
    pos_trigrams: BTreeMap<String, u64>,
}

impl Counts {
    fn add_review(&mut self, raw: &str) {
        let normalized = text::nfc(raw);
        self.total_chars += normalized.chars().count() as u64;
        for c in normalized.chars() {
            if c.is_whitespace() {
                continue;
            }
            self.non_ws_chars += 1;
            if c.is_ascii_alphabetic() {
                self.letters[(c.to_ascii_lowercase() as u8 - b'a') as usize] += 1;
                if c.is_ascii_uppercase() {
                    self.uppercase += 1;
                }
            } else if c.is_ascii_digit() {
                self.digits += 1;
            } else if text::PUNCTUATION_MARKS.contains(&c) {
                *self.punct.entry(c).or_default() += 1;
            } else {
                self.special += 1;
            }
        }
        let tokens = text::tokens(&normalized);
        self.tokens += tokens.len() as u64;
        let mut cores = Vec::new();
        for token in &tokens {
            if text::is_number_token(token) {
                self.number_tokens += 1;
            }
            let core = text::word_core(token);
            if text::is_alphabetic_word(&core) {
                self.word_tokens += 1;
                if !words::is_known(&core) {
                    self.misspelled += 1;
                }
            }
            if !core.is_empty() {
                cores.push(core);
            }
        }
        for run in text::letter_runs(&normalized) {
            for gram in text::char_ngrams(&run, 2) {
                *self.letter_digrams.entry(gram).or_default() += 1;
            }
            for gram in text::char_ngrams(&run, 3) {
                *self.letter_trigrams.entry(gram).or_default() += 1;
            }
        }
        for gram in text::word_ngrams(&cores, 2) {
            *self.word_digrams.entry(gram).or_default() += 1;
        }
        for gram in text::word_ngrams(&cores, 3) {
            *self.word_trigrams.entry(gram).or_default() += 1;
        }
        let tags: Vec<&'static str> = pos::tag_text(&normalized)
            .into_iter()
            .map(pos::PosTag::as_str)
            .collect();
        for tag in &tags {
            *self.pos_unigrams.entry(tag.to_string()).or_default() += 1;
        }
        for pair in tags.windows(2) {
            *self.pos_digrams.entry(pair.join(" ")).or_default() += 1;
        }
        for triple in tags.windows(3) {
            *self.pos_trigrams.entry(triple.join(" ")).or_default() += 1;
        }
    }

    fn of_instance(instance: &ReviewInstance) -> Counts {
        let mut counts = Counts::default();
        for review_text in &instance.texts {
            counts.add_review(review_text);
        }
        counts
    }
}

/// Frozen vocabularies for the n-gram feature blocks, built from training
/// instances only. Misspelling detection uses the bundled dictionary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpace {
    pub letter_digrams: Vec<String>,
    pub letter_trigrams: Vec<String>,
    pub word_digrams: Vec<String>,
    pub word_trigrams: Vec<String>,
    pub pos_unigrams: Vec<String>,
    pub pos_digrams: Vec<String>,
    pub pos_trigrams: Vec<String>,
}

/// Most frequent grams first, ties broken lexicographically.
fn top_k(counts: &BTreeMap<String, u64>, k: usize) -> Vec<String> {
    let mut items: Vec<(&String, &u64)> = counts.iter().collect();
    items.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
    items.into_iter().take(k).map(|(g, _)| g.clone()).collect()
}

pub fn build_feature_space(instances: &[ReviewInstance], k: &KTop) -> Result<FeatureSpace> {
    if instances.is_empty() {
        return Err(Error::InvalidInput(
            "feature space needs at least one instance".to_string(),
        ));
    }
    let mut merged = Counts::default();
    for instance in instances {
        for review_text in &instance.texts {
            merged.add_review(review_text);
        }
    }
    Ok(FeatureSpace {
        letter_digrams: top_k(&merged.letter_digrams, k.letter_digrams),
        letter_trigrams: top_k(&merged.letter_trigrams, k.letter_trigrams),
        word_digrams: top_k(&merged.word_digrams, k.word_digrams),
        word_trigrams: top_k(&merged.word_trigrams, k.word_trigrams),
        pos_unigrams: merged.pos_unigrams.keys().cloned().collect(),
        pos_digrams: merged.pos_digrams.keys().cloned().collect(),
        pos_trigrams: merged.pos_trigrams.keys().cloned().collect(),
    })
}

const SCALAR_NAMES: [&str; 2] = ["log_char_count", "avg_chars_per_token"];
const CLASS_NAMES: [&str; 3] = [
    "uppercase_per_char",
    "special_per_char",
    "digit_per_char",
];
const TOKEN_NAMES: [&str; 2] = ["number_token_per_token", "misspelled_per_word"];

impl FeatureSpace {
    pub fn len(&self) -> usize {
        SCALAR_NAMES.len()
            + 26
            + CLASS_NAMES.len()
            + text::PUNCTUATION_MARKS.len()
            + TOKEN_NAMES.len()
            + self.letter_digrams.len()
            + self.letter_trigrams.len()
            + self.word_digrams.len()
            + self.word_trigrams.len()
            + self.pos_unigrams.len()
            + self.pos_digrams.len()
            + self.pos_trigrams.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Column names; frequency normalizers are part of the name so
    /// alternative normalizations can be diffed downstream.
    pub fn feature_names(&self) -> Vec<String> {
        let mut names: Vec<String> = SCALAR_NAMES.iter().map(|s| s.to_string()).collect();
        for c in b'a'..=b'z' {
            names.push(format!("letter_{}_per_char", c as char));
        }
        names.extend(CLASS_NAMES.iter().map(|s| s.to_string()));
        for mark in text::PUNCTUATION_MARKS {
            names.push(format!("punct_{}_per_char", mark_name(mark)));
        }
        names.extend(TOKEN_NAMES.iter().map(|s| s.to_string()));
        for (prefix, vocab) in [
            ("letter2", &self.letter_digrams),
            ("letter3", &self.letter_trigrams),
            ("word2", &self.word_digrams),
            ("word3", &self.word_trigrams),
            ("pos1", &self.pos_unigrams),
            ("pos2", &self.pos_digrams),
            ("pos3", &self.pos_trigrams),
        ] {
            for gram in vocab {
                names.push(format!("{prefix}:{gram}"));
            }
        }
        names
    }
}

fn mark_name(mark: char) -> &'static str {
    match mark {
        '.' => "period",
        ',' => "comma",
        '!' => "exclaim",
        '?' => "question",
        ';' => "semicolon",
        ':' => "colon",
        '\'' => "apostrophe",
        '"' => "quote",
        '(' => "open_paren",
        ')' => "close_paren",
        '-' => "hyphen",
        _ => "mark",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub values: Vec<f64>,
}

fn freq(count: u64, total: u64) -> f64 {
    if total == 0 {
        0.0
    } else {
        count as f64 / total as f64
    }
}

/// Extracts the feature vector of one instance in a frozen space. Grams
/// absent from the space's vocabulary contribute nothing.
pub fn extract_features(instance: &ReviewInstance, space: &FeatureSpace) -> FeatureVector {
    let c = Counts::of_instance(instance);
    let mut values = Vec::with_capacity(space.len());
    values.push((1.0 + c.total_chars as f64).ln());
    values.push(freq(c.non_ws_chars, c.tokens));
    for count in c.letters {
        values.push(freq(count, c.non_ws_chars));
    }
    values.push(freq(c.uppercase, c.non_ws_chars));
    values.push(freq(c.special, c.non_ws_chars));
    values.push(freq(c.digits, c.non_ws_chars));
    for mark in text::PUNCTUATION_MARKS {
        values.push(freq(c.punct.get(&mark).copied().unwrap_or(0), c.non_ws_chars));
    }
    values.push(freq(c.number_tokens, c.tokens));
    values.push(freq(c.misspelled, c.word_tokens));

    let blocks: [(&Vec<String>, &BTreeMap<String, u64>); 7] = [
        (&space.letter_digrams, &c.letter_digrams),
        (&space.letter_trigrams, &c.letter_trigrams),
        (&space.word_digrams, &c.word_digrams),
        (&space.word_trigrams, &c.word_trigrams),
        (&space.pos_unigrams, &c.pos_unigrams),
        (&space.pos_digrams, &c.pos_digrams),
        (&space.pos_trigrams, &c.pos_trigrams),
    ];
    for (vocab, counts) in blocks {
        let total: u64 = counts.values().sum();
        for gram in vocab {
            values.push(freq(counts.get(gram).copied().unwrap_or(0), total));
        }
    }
    FeatureVector { values }
}

/// Writes instances as CSV: worker, product, then one column per feature.
pub fn write_features_csv<W: Write>(
    out: &mut W,
    space: &FeatureSpace,
    instances: &[ReviewInstance],
) -> Result<()> {
    let mut header = vec!["worker_id".to_string(), "product_id".to_string()];
    header.extend(space.feature_names());
    writeln!(out, "{}", header.join(","))?;
    for instance in instances {
        let vector = extract_features(instance, space);
        let mut row = vec![
            instance.worker_id.clone().unwrap_or_else(|| "candidate".to_string()),
            instance.product_id.clone(),
        ];
        row.extend(vector.values.iter().map(f64::to_string));
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
