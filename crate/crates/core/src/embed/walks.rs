//! Weighted random walks. Next-hop probability is proportional to edge
//! weight, matching a uniform walk over the multigraph where a weight-w edge
//! is w parallel edges. Each walk owns an RNG stream derived from (seed,
//! node, walk), so parallel generation is byte-identical to sequential.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::graph::WeightedGraph;
use crate::{Error, Result};

use super::WalkConfig;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn walk_seed(seed: u64, node: usize, walk: usize) -> u64 {
    splitmix64(splitmix64(seed ^ (node as u64)) ^ (walk as u64).wrapping_mul(0x9E37_79B9))
}

/// Per-node cumulative weights for O(log deg) weighted sampling.
struct HopTable {
    neighbors: Vec<Vec<usize>>,
    cumulative: Vec<Vec<u64>>,
}

impl HopTable {
    fn build(g: &WeightedGraph) -> HopTable {
        let mut neighbors = Vec::with_capacity(g.node_count());
        let mut cumulative = Vec::with_capacity(g.node_count());
        for i in 0..g.node_count() {
            let mut ns = Vec::new();
            let mut cum = Vec::new();
            let mut total = 0u64;
            for (j, w) in g.neighbors(i) {
                total += w;
                ns.push(j);
                cum.push(total);
            }
            neighbors.push(ns);
            cumulative.push(cum);
        }
        HopTable { neighbors, cumulative }
    }

    fn step(&self, from: usize, rng: &mut ChaCha8Rng) -> Option<usize> {
        let cum = &self.cumulative[from];
        let total = *cum.last()?;
        let pick = rng.random_range(0..total);
        let idx = cum.partition_point(|&c| c <= pick);
        Some(self.neighbors[from][idx])
    }
}

/// `gamma` walks from every node, as node-index sequences in node order.
/// Walks stop early only when the current node has no neighbors.
pub fn random_walks(g: &WeightedGraph, cfg: &WalkConfig) -> Result<Vec<Vec<usize>>> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(Error::InvalidInput("cannot walk an empty graph".to_string()));
    }
    let table = HopTable::build(g);
    let walks: Vec<Vec<usize>> = (0..g.node_count())
        .into_par_iter()
        .flat_map_iter(|node| {
            let table = &table;
            (0..cfg.gamma).map(move |k| {
                let mut rng = ChaCha8Rng::seed_from_u64(walk_seed(cfg.seed, node, k));
                let mut walk = Vec::with_capacity(cfg.walk_len);
                walk.push(node);
                let mut current = node;
                while walk.len() < cfg.walk_len {
                    match table.step(current, &mut rng) {
                        Some(next) => {
                            walk.push(next);
                            current = next;
                        }
                        None => break,
                    }
                }
                walk
            })
        })
        .collect();
    Ok(walks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::graph_from_edges;

    fn cfg(gamma: usize, walk_len: usize) -> WalkConfig {
        WalkConfig {
            gamma,
            walk_len,
            window: 2,
            dims: 4,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn isolated_node_walks_have_length_one() {
        let g = graph_from_edges(3, &[(0, 1, 1)]); // a02 isolated
        let walks = random_walks(&g, &cfg(4, 10)).unwrap();
        let from_isolated: Vec<&Vec<usize>> = walks.iter().filter(|w| w[0] == 2).collect();
        assert_eq!(from_isolated.len(), 4);
        assert!(from_isolated.iter().all(|w| w.len() == 1));
    }

    #[test]
    fn two_node_walks_alternate_to_full_length() {
        let g = graph_from_edges(2, &[(0, 1, 3)]);
        let walks = random_walks(&g, &cfg(2, 7)).unwrap();
        assert_eq!(walks.len(), 4);
        for walk in &walks {
            assert_eq!(walk.len(), 7);
            for pair in walk.windows(2) {
                assert_ne!(pair[0], pair[1]);
            }
        }
    }

    #[test]
    fn walk_counts_and_lengths_bounded() {
        let g = graph_from_edges(5, &[(0, 1, 2), (1, 2, 1), (2, 3, 5), (3, 4, 1), (4, 0, 1)]);
        let c = cfg(6, 9);
        let walks = random_walks(&g, &c).unwrap();
        assert_eq!(walks.len(), 5 * 6);
        for (w, walk) in walks.iter().enumerate() {
            assert!(walk.len() <= 9);
            assert_eq!(walk[0], w / 6, "walks come grouped by start node");
        }
    }

    #[test]
    fn next_hop_follows_edge_weights() {
        // a00 has neighbors a01 (weight 3) and a02 (weight 1)
        let g = graph_from_edges(3, &[(0, 1, 3), (0, 2, 1)]);
        let c = WalkConfig {
            gamma: 100_000,
            walk_len: 2,
            window: 1,
            dims: 4,
            seed: 7,
            ..Default::default()
        };
        let walks = random_walks(&g, &c).unwrap();
        let mut to_b = 0u64;
        let mut total = 0u64;
        for walk in walks.iter().filter(|w| w[0] == 0) {
            total += 1;
            if walk[1] == 1 {
                to_b += 1;
            }
        }
        assert_eq!(total, 100_000);
        let share = to_b as f64 / total as f64;
        assert!((share - 0.75).abs() < 0.03, "share {share}");

        // chi-square against the 3:1 split, df=1, critical value at 1% = 6.635
        let expected_b = total as f64 * 0.75;
        let expected_c = total as f64 * 0.25;
        let observed_b = to_b as f64;
        let chi2 = (observed_b - expected_b).powi(2) / expected_b
            + ((total - to_b) as f64 - expected_c).powi(2) / expected_c;
        assert!(chi2 < 6.635, "chi-square {chi2}");
    }

    #[test]
    fn walks_are_deterministic_under_seed() {
        let g = graph_from_edges(4, &[(0, 1, 1), (1, 2, 2), (2, 3, 1), (3, 0, 1)]);
        let a = random_walks(&g, &cfg(5, 12)).unwrap();
        let b = random_walks(&g, &cfg(5, 12)).unwrap();
        assert_eq!(a, b);
    }
}
