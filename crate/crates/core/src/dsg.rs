//! Greedy densest-subgraph baseline.
//!
//! Peels the node least connected to the rest, one at a time, tracking the
//! triangles-per-node density of what remains, and keeps the prefix subgraph
//! that scored highest. Iterating extraction on the leftover graph yields
//! multiple disjoint dense sets for comparison against the min-cut detector.

use std::collections::BTreeSet;

use crate::corpus::Corpus;
use crate::graph::{build_co_activity_graph, WeightedGraph};
use crate::mcdense::{sort_components, DensityConfig, FraudComponent, Partition};
use crate::{ratio, Rational, Result};

/// Removal order and the density after each removal. `best_index` is the
/// number of removals behind the densest prefix (0 keeps the whole graph;
/// the earliest maximum wins ties).
#[derive(Debug, Clone, PartialEq)]
pub struct PeelTrace {
    pub removals: Vec<(String, Rational)>,
    pub initial_density: Rational,
    pub best_index: usize,
    pub best_density: Rational,
}

/// Triangles over node count, the density the peel maximizes.
pub fn peel_density(g: &WeightedGraph) -> Rational {
    ratio(g.triangle_count() as u128, g.node_count() as u128)
}

/// Runs the full peel, recording density after every removal.
pub fn peel_trace(g: &WeightedGraph) -> PeelTrace {
    let initial_density = peel_density(g);
    let mut remaining: BTreeSet<usize> = (0..g.node_count()).collect();
    let mut removals = Vec::with_capacity(g.node_count());
    let mut best_index = 0;
    let mut best_density = initial_density;
    while !remaining.is_empty() {
        // least connected = minimum weighted degree within the remainder,
        // ties by node order
        let victim = *remaining
            .iter()
            .min_by_key(|&&i| {
                let deg: u64 = g
                    .neighbors(i)
                    .filter(|(j, _)| remaining.contains(j))
                    .map(|(_, w)| w)
                    .sum();
                (deg, i)
            })
            .expect("non-empty");
        remaining.remove(&victim);
        let density = if remaining.is_empty() {
            Rational::from_integer(0)
        } else {
            peel_density(&g.induced(&remaining))
        };
        removals.push((g.nodes()[victim].clone(), density));
        if density > best_density {
            best_density = density;
            best_index = removals.len();
        }
    }
    PeelTrace {
        removals,
        initial_density,
        best_index,
        best_density,
    }
}

/// Nodes of the densest prefix subgraph found by the peel.
pub fn densest_subgraph(g: &WeightedGraph) -> BTreeSet<String> {
    let trace = peel_trace(g);
    let removed: BTreeSet<&String> = trace.removals[..trace.best_index]
        .iter()
        .map(|(name, _)| name)
        .collect();
    g.nodes()
        .iter()
        .filter(|n| !removed.contains(n))
        .cloned()
        .collect()
}

/// Extracts dense sets repeatedly until one comes back smaller than `eta`
/// or the graph runs out of nodes; sub-`eta` finds are discarded.
pub fn dsg_components(g: &WeightedGraph, eta: usize) -> Vec<BTreeSet<String>> {
    let mut out = Vec::new();
    let mut current = g.clone();
    while current.node_count() > 0 {
        let found = densest_subgraph(&current);
        if found.len() < eta {
            break;
        }
        let keep: BTreeSet<usize> = (0..current.node_count())
            .filter(|&i| !found.contains(&current.nodes()[i]))
            .collect();
        out.push(found);
        current = current.induced(&keep);
    }
    out
}

/// Product partition with the same preprocessing and report shape as the
/// min-cut detector, so the two algorithms are directly comparable.
pub fn partition_product(
    corpus: &Corpus,
    product_id: &str,
    cfg: &DensityConfig,
) -> Result<Partition> {
    cfg.validate()?;
    let cag = build_co_activity_graph(corpus, product_id)?;
    let analysis = cag.beyond_anchor();
    let mut components: Vec<FraudComponent> = dsg_components(&analysis, cfg.eta)
        .into_iter()
        .map(|accounts| {
            let sub = analysis.induced_by_names(accounts.iter().map(String::as_str));
            FraudComponent::from_subgraph(product_id, &sub)
        })
        .collect();
    sort_components(&mut components);
    let in_components: BTreeSet<&String> =
        components.iter().flat_map(|c| c.accounts.iter()).collect();
    let honest = corpus
        .reviewers_of(product_id)
        .into_iter()
        .filter(|a| !in_components.contains(a))
        .collect();
    Ok(Partition {
        product_id: product_id.to_string(),
        components,
        honest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::testutil::graph_from_edges;

    fn k(n: usize, offset: usize) -> Vec<(usize, usize, u64)> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((offset + i, offset + j, 1));
            }
        }
        edges
    }

    #[test]
    fn single_triangle_returned_whole() {
        let g = graph_from_edges(3, &[(0, 1, 1), (1, 2, 1), (0, 2, 1)]);
        let dense = densest_subgraph(&g);
        assert_eq!(dense.len(), 3);
        assert_eq!(peel_trace(&g).best_density, ratio(1, 3));
    }

    #[test]
    fn pendant_node_is_peeled_off() {
        // triangle a00,a01,a02 plus pendant a03 hanging off a02
        let g = graph_from_edges(4, &[(0, 1, 1), (1, 2, 1), (0, 2, 1), (2, 3, 1)]);
        let trace = peel_trace(&g);
        assert_eq!(trace.initial_density, ratio(1, 4));
        assert_eq!(trace.removals[0].0, "a03");
        assert_eq!(trace.removals[0].1, ratio(1, 3));
        assert_eq!(trace.best_index, 1);
        let dense = densest_subgraph(&g);
        assert_eq!(
            dense,
            ["a00", "a01", "a02"].iter().map(|s| s.to_string()).collect()
        );
    }

    #[test]
    fn triangle_free_graph_keeps_everything() {
        let g = graph_from_edges(5, &[(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1)]);
        let dense = densest_subgraph(&g);
        assert_eq!(dense.len(), 5);
        assert_eq!(peel_trace(&g).best_density, Rational::from_integer(0));
    }

    #[test]
    fn disjoint_cliques_tie_keeps_the_union() {
        // Exact density tie: t/|U| is 40/12 = 20/6 for the union and for
        // either K6 alone, so the earliest (largest) prefix wins and the
        // first extraction returns all 12 nodes as one set.
        let mut edges = k(6, 0);
        edges.extend(k(6, 6));
        let g = graph_from_edges(12, &edges);
        let sets = dsg_components(&g, 5);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].len(), 12);
    }

    #[test]
    fn empty_graph_yields_nothing() {
        let g = graph_from_edges(0, &[]);
        assert!(dsg_components(&g, 5).is_empty());
    }

    #[test]
    fn isolated_nodes_peel_before_clique() {
        let mut edges = k(6, 0);
        edges.extend([] as [(usize, usize, u64); 0]);
        let g = graph_from_edges(10, &edges); // K6 + 4 isolated
        let sets = dsg_components(&g, 5);
        assert_eq!(sets.len(), 1);
        assert_eq!(sets[0].len(), 6);
        assert!(sets[0].iter().all(|n| n.as_str() < "a06"));
    }

    #[test]
    fn unbalanced_cliques_are_extracted_separately() {
        // K7 + K5 disjoint: no density tie, so extraction peels down to the
        // K7 first, then finds the K5 in the remainder.
        let mut edges = k(7, 0);
        edges.extend(k(5, 7));
        let g = graph_from_edges(12, &edges);
        let sets = dsg_components(&g, 5);
        assert_eq!(sets.len(), 2);
        assert_eq!(sets[0].len(), 7);
        assert_eq!(sets[1].len(), 5);
    }

    #[test]
    fn returned_sets_are_disjoint_and_at_least_as_dense() {
        let mut edges = k(7, 0);
        edges.extend(k(6, 7));
        edges.push((0, 7, 1));
        edges.push((12, 13, 1));
        let g = graph_from_edges(14, &edges);
        let sets = dsg_components(&g, 5);
        assert!(sets.len() >= 2);

        // each set must be at least as dense as the graph it was pulled from
        let mut seen: BTreeSet<String> = BTreeSet::new();
        let mut current = g.clone();
        for set in &sets {
            for node in set {
                assert!(seen.insert(node.clone()));
            }
            let source_density = peel_density(&current);
            let sub = current.induced_by_names(set.iter().map(String::as_str));
            assert!(peel_density(&sub) >= source_density);
            let keep: BTreeSet<usize> = (0..current.node_count())
                .filter(|&i| !set.contains(&current.nodes()[i]))
                .collect();
            current = current.induced(&keep);
        }
    }

    /// Exhaustive maximum of t(U)/|U| over non-empty subsets, n <= 12 only.
    fn exhaustive_best_density(g: &WeightedGraph) -> Rational {
        let n = g.node_count();
        let mut best = Rational::from_integer(0);
        for mask in 1u32..(1 << n) {
            let keep: BTreeSet<usize> = (0..n).filter(|i| (mask >> i) & 1 == 1).collect();
            let d = peel_density(&g.induced(&keep));
            if d > best {
                best = d;
            }
        }
        best
    }

    #[test]
    fn greedy_is_exact_on_cliques_and_logs_gap_elsewhere() {
        use rand::SeedableRng;
        let mut edges = k(6, 0);
        edges.push((0, 6, 1));
        edges.push((1, 7, 1));
        let clique_pendants = graph_from_edges(8, &edges);
        let greedy = peel_trace(&clique_pendants).best_density;
        assert_eq!(greedy, exhaustive_best_density(&clique_pendants));

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let mut gaps = 0;
        for _ in 0..10 {
            let g = crate::graph::testutil::random_graph(&mut rng, 9, 0.45, 2);
            let greedy = peel_trace(&g).best_density;
            let oracle = exhaustive_best_density(&g);
            assert!(greedy <= oracle);
            if greedy < oracle {
                gaps += 1;
            }
        }
        // recorded, not asserted: greedy may be suboptimal on random graphs
        eprintln!("greedy peel fell short of the exhaustive optimum on {gaps}/10 random graphs");
    }
}
