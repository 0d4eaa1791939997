//! Skip-gram with negative sampling over walk sequences.
//!
//! Two modes share one update routine: single-threaded (bitwise
//! reproducible under a fixed seed) and hogwild-style parallel, where
//! threads read and write the shared matrices with relaxed atomics and lost
//! updates are accepted.

use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::{Error, Result};

use super::{Embedding, WalkConfig};

/// Per-epoch average pair loss, for convergence checks.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub epoch_losses: Vec<f64>,
}

/// Embedding matrix shared across threads. Relaxed load/store keeps the
/// fast path free of synchronization; races only lose updates.
struct SharedMatrix {
    data: Vec<AtomicU32>,
    dims: usize,
}

impl SharedMatrix {
    fn new(values: Vec<f32>, dims: usize) -> SharedMatrix {
        SharedMatrix {
            data: values.into_iter().map(|v| AtomicU32::new(v.to_bits())).collect(),
            dims,
        }
    }

    fn read_row(&self, node: usize, out: &mut [f32]) {
        let base = node * self.dims;
        for (d, v) in out.iter_mut().enumerate() {
            *v = f32::from_bits(self.data[base + d].load(Ordering::Relaxed));
        }
    }

    fn add_row(&self, node: usize, delta: &[f32]) {
        let base = node * self.dims;
        for (d, delta) in delta.iter().enumerate() {
            let cell = &self.data[base + d];
            let v = f32::from_bits(cell.load(Ordering::Relaxed));
            cell.store((v + delta).to_bits(), Ordering::Relaxed);
        }
    }

    fn into_vec(self) -> Vec<f32> {
        self.data
            .into_iter()
            .map(|v| f32::from_bits(v.into_inner()))
            .collect()
    }
}

/// Cumulative table for unigram^(3/4) negative sampling.
struct NegativeTable {
    cumulative: Vec<f64>,
}

impl NegativeTable {
    fn build(counts: &[u64]) -> NegativeTable {
        let mut cumulative = Vec::with_capacity(counts.len());
        let mut total = 0.0;
        for &c in counts {
            total += (c as f64).powf(0.75);
            cumulative.push(total);
        }
        NegativeTable { cumulative }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> usize {
        let total = *self.cumulative.last().expect("non-empty vocabulary");
        let pick = rng.random::<f64>() * total;
        self.cumulative.partition_point(|&c| c <= pick).min(self.cumulative.len() - 1)
    }
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

struct UpdateScratch {
    center: Vec<f32>,
    other: Vec<f32>,
    accum: Vec<f32>,
}

/// One (center, context) update with negative samples; returns the pair loss.
#[allow(clippy::too_many_arguments)]
fn update_pair(
    input: &SharedMatrix,
    output: &SharedMatrix,
    center: usize,
    context: usize,
    negatives: usize,
    table: &NegativeTable,
    lr: f64,
    rng: &mut ChaCha8Rng,
    scratch: &mut UpdateScratch,
) -> f64 {
    let dims = input.dims;
    input.read_row(center, &mut scratch.center);
    scratch.accum.iter_mut().for_each(|v| *v = 0.0);
    let mut loss = 0.0;

    // positive target plus sampled negatives; label 1 for the true context
    for sample in 0..=negatives {
        let (target, label) = if sample == 0 {
            (context, 1.0)
        } else {
            let negative = table.sample(rng);
            if negative == context {
                continue;
            }
            (negative, 0.0)
        };
        output.read_row(target, &mut scratch.other);
        let z: f64 = scratch
            .center
            .iter()
            .zip(&scratch.other)
            .map(|(a, b)| (*a as f64) * (*b as f64))
            .sum();
        let p = sigmoid(z);
        loss -= if label == 1.0 { p.max(1e-10).ln() } else { (1.0 - p).max(1e-10).ln() };
        let g = (label - p) * lr;
        for d in 0..dims {
            scratch.accum[d] += (g as f32) * scratch.other[d];
            scratch.other[d] = (g as f32) * scratch.center[d];
        }
        output.add_row(target, &scratch.other);
    }
    input.add_row(center, &scratch.accum);
    loss
}

fn count_pairs(walks: &[Vec<usize>], window: usize) -> u64 {
    let mut pairs = 0u64;
    for walk in walks {
        for i in 0..walk.len() {
            let lo = i.saturating_sub(window);
            let hi = (i + window).min(walk.len() - 1);
            pairs += (hi - lo) as u64;
        }
    }
    pairs
}

/// Trains node embeddings over the walks. `nodes` names the vocabulary;
/// every walk entry indexes into it. Deterministic when `parallel` is off.
pub fn train_embedding(
    nodes: &[String],
    walks: &[Vec<usize>],
    cfg: &WalkConfig,
) -> Result<(Embedding, TrainStats)> {
    cfg.validate()?;
    if walks.is_empty() {
        return Err(Error::InvalidInput("no walks to train on".to_string()));
    }
    let n = nodes.len();
    let dims = cfg.dims;
    let mut counts = vec![0u64; n];
    for walk in walks {
        for &node in walk {
            counts[node] += 1;
        }
    }
    let table = NegativeTable::build(&counts);

    // word2vec-style init: small uniform input vectors, zero output vectors
    let mut init_rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5EED));
    let span = 0.5 / dims as f32;
    let init: Vec<f32> = (0..n * dims)
        .map(|_| init_rng.random_range(-span..span))
        .collect();
    let input = SharedMatrix::new(init, dims);
    let output = SharedMatrix::new(vec![0.0; n * dims], dims);

    let total_pairs = count_pairs(walks, cfg.window).max(1) * cfg.epochs as u64;
    let processed = AtomicU64::new(0);
    let min_lr = cfg.learning_rate * 1e-4;
    let lr_at = |done: u64| {
        let progress = done as f64 / total_pairs as f64;
        (cfg.learning_rate * (1.0 - progress)).max(min_lr)
    };

    let mut epoch_losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let (loss_sum, pair_count) = if cfg.parallel {
            let chunk = walks.len().div_ceil(rayon::current_num_threads().max(1) * 4);
            walks
                .par_chunks(chunk.max(1))
                .enumerate()
                .map(|(chunk_idx, chunk_walks)| {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        cfg.seed ^ ((epoch as u64) << 32) ^ (chunk_idx as u64 + 0xC0FFEE),
                    );
                    run_walks(
                        chunk_walks, &input, &output, cfg, &table, &processed, &lr_at, &mut rng,
                    )
                })
                .reduce(|| (0.0, 0u64), |a, b| (a.0 + b.0, a.1 + b.1))
        } else {
            // same negative stream every epoch keeps epoch losses comparable
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xA11CE);
            run_walks(walks, &input, &output, cfg, &table, &processed, &lr_at, &mut rng)
        };
        let avg = loss_sum / pair_count.max(1) as f64;
        epoch_losses.push(avg);
        let _ = epoch;
    }

    let embedding = Embedding::from_parts(dims, nodes.to_vec(), input.into_vec());
    Ok((embedding, TrainStats { epoch_losses }))
}

#[allow(clippy::too_many_arguments)]
fn run_walks(
    walks: &[Vec<usize>],
    input: &SharedMatrix,
    output: &SharedMatrix,
    cfg: &WalkConfig,
    table: &NegativeTable,
    processed: &AtomicU64,
    lr_at: &dyn Fn(u64) -> f64,
    rng: &mut ChaCha8Rng,
) -> (f64, u64) {
    let dims = cfg.dims;
    let mut scratch = UpdateScratch {
        center: vec![0.0; dims],
        other: vec![0.0; dims],
        accum: vec![0.0; dims],
    };
    let mut loss = 0.0;
    let mut pairs = 0u64;
    for walk in walks {
        for (i, &center) in walk.iter().enumerate() {
            let lo = i.saturating_sub(cfg.window);
            let hi = (i + cfg.window).min(walk.len() - 1);
            for j in lo..=hi {
                if j == i {
                    continue;
                }
                let done = processed.fetch_add(1, Ordering::Relaxed);
                loss += update_pair(
                    input,
                    output,
                    center,
                    walk[j],
                    cfg.negatives,
                    table,
                    lr_at(done),
                    rng,
                    &mut scratch,
                );
                pairs += 1;
            }
        }
    }
    (loss, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embed::{embed_graph, random_walks};
    use crate::graph::testutil::graph_from_edges;
    use crate::graph::WeightedGraph;

    fn two_cliques() -> WeightedGraph {
        let mut edges = Vec::new();
        for i in 0..5usize {
            for j in i + 1..5 {
                edges.push((i, j, 3));
                edges.push((i + 5, j + 5, 3));
            }
        }
        edges.push((0, 5, 1)); // thin bridge to keep the graph connected
        graph_from_edges(10, &edges)
    }

    fn small_cfg() -> WalkConfig {
        WalkConfig {
            gamma: 12,
            walk_len: 20,
            window: 3,
            dims: 16,
            seed: 42,
            negatives: 5,
            epochs: 4,
            learning_rate: 0.05,
            parallel: false,
        }
    }

    #[test]
    fn cliques_separate_in_embedding_space() {
        let g = two_cliques();
        let (embedding, _) = embed_graph(&g, &small_cfg()).unwrap();
        let names = g.nodes();
        let mut intra = Vec::new();
        let mut inter = Vec::new();
        for i in 0..10 {
            for j in i + 1..10 {
                let sim = embedding.cosine(&names[i], &names[j]).unwrap();
                if (i < 5) == (j < 5) {
                    intra.push(sim);
                } else {
                    inter.push(sim);
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert!(
            mean(&intra) > mean(&inter),
            "intra {} vs inter {}",
            mean(&intra),
            mean(&inter)
        );
    }

    #[test]
    fn single_node_graph_returns_initialized_vector() {
        let g = graph_from_edges(1, &[]);
        let (embedding, stats) = embed_graph(&g, &small_cfg()).unwrap();
        assert_eq!(embedding.len(), 1);
        assert_eq!(embedding.row(0).len(), 16);
        // no (center, context) pairs exist, so no loss was recorded
        assert!(stats.epoch_losses.iter().all(|l| *l == 0.0));
    }

    #[test]
    fn training_is_bitwise_deterministic_single_threaded() {
        let g = two_cliques();
        let (a, _) = embed_graph(&g, &small_cfg()).unwrap();
        let (b, _) = embed_graph(&g, &small_cfg()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn loss_does_not_increase_across_epochs_on_fixture() {
        // 8 cliques of 6 joined in a ring; big enough that negative samples
        // rarely collide with true context
        let mut names = Vec::new();
        for i in 0..48 {
            names.push(format!("a{i:02}"));
        }
        let mut g = WeightedGraph::new(names.clone());
        for c in 0..8usize {
            for i in 0..6 {
                for j in i + 1..6 {
                    g.set_edge(&names[c * 6 + i], &names[c * 6 + j], 3);
                }
            }
            g.set_edge(&names[c * 6], &names[((c + 1) % 8) * 6 + 1], 1);
        }
        let cfg = WalkConfig { epochs: 5, ..small_cfg() };
        let walks = random_walks(&g, &cfg).unwrap();
        let (_, stats) = train_embedding(g.nodes(), &walks, &cfg).unwrap();
        assert_eq!(stats.epoch_losses.len(), 5);
        // monotone while converging; once settled, the running loss may
        // drift within sampling noise but not climb back up
        for (i, pair) in stats.epoch_losses.windows(2).enumerate() {
            let slack = if i < 2 { 1e-9 } else { pair[0] * 0.01 };
            assert!(
                pair[1] <= pair[0] + slack,
                "epoch losses increased: {:?}",
                stats.epoch_losses
            );
        }
        assert!(stats.epoch_losses.last().unwrap() < stats.epoch_losses.first().unwrap());
    }

    #[test]
    fn parallel_mode_learns_comparable_structure() {
        let g = two_cliques();
        let cfg = WalkConfig { parallel: true, ..small_cfg() };
        let (embedding, stats) = embed_graph(&g, &cfg).unwrap();
        assert!(embedding.row(0).iter().all(|v| v.is_finite()));
        assert!(stats.epoch_losses.last().unwrap() < stats.epoch_losses.first().unwrap());
        let names = g.nodes();
        let intra = embedding.cosine(&names[1], &names[2]).unwrap();
        let inter = embedding.cosine(&names[1], &names[8]).unwrap();
        assert!(intra > inter);
    }

    #[test]
    fn empty_walks_rejected() {
        let nodes = vec!["a".to_string()];
        assert!(train_embedding(&nodes, &[], &small_cfg()).is_err());
    }
}
