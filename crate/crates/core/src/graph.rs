//! Weighted co-activity graphs over reviewer accounts.
//!
//! Edge weights count co-reviewed products. The per-product co-activity
//! graph spans one product's reviewers with weights computed over the whole
//! corpus; the union fraud graph spans the reviewers of a product set,
//! deduplicated. Both are immutable after construction.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use crate::corpus::Corpus;
use crate::{ratio, Error, Rational, Result};

/// Undirected weighted graph keyed by account id. Nodes are held sorted so
/// every traversal, and therefore every downstream result, is deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedGraph {
    nodes: Vec<String>,
    index: BTreeMap<String, usize>,
    adj: Vec<BTreeMap<usize, u64>>,
}

impl WeightedGraph {
    pub fn new<I: IntoIterator<Item = S>, S: Into<String>>(nodes: I) -> WeightedGraph {
        let set: BTreeSet<String> = nodes.into_iter().map(Into::into).collect();
        let nodes: Vec<String> = set.into_iter().collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        let adj = vec![BTreeMap::new(); nodes.len()];
        WeightedGraph { nodes, index, adj }
    }

    /// Sets the weight of an undirected edge. Self-loops are ignored.
    pub fn set_edge(&mut self, a: &str, b: &str, w: u64) {
        let (i, j) = (self.index[a], self.index[b]);
        if i == j || w == 0 {
            return;
        }
        self.adj[i].insert(j, w);
        self.adj[j].insert(i, w);
    }

    pub fn add_edge_weight(&mut self, i: usize, j: usize, w: u64) {
        if i == j || w == 0 {
            return;
        }
        *self.adj[i].entry(j).or_insert(0) += w;
        *self.adj[j].entry(i).or_insert(0) += w;
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<u64> {
        let (i, j) = (self.node_index(a)?, self.node_index(b)?);
        self.adj[i].get(&j).copied()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.adj[i].iter().map(|(&j, &w)| (j, w))
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn weighted_degree(&self, i: usize) -> u64 {
        self.adj[i].values().sum()
    }

    /// Number of triangles; an edge participates regardless of weight.
    pub fn triangle_count(&self) -> u64 {
        let mut count = 0u64;
        for i in 0..self.nodes.len() {
            for (j, _) in self.neighbors(i) {
                if j <= i {
                    continue;
                }
                // common neighbors above j close a triangle exactly once
                count += self.adj[i]
                    .range(j + 1..)
                    .filter(|(k, _)| self.adj[j].contains_key(*k))
                    .count() as u64;
            }
        }
        count
    }

    /// Node-induced subgraph over the given indices.
    pub fn induced(&self, keep: &BTreeSet<usize>) -> WeightedGraph {
        let mut g = WeightedGraph::new(keep.iter().map(|&i| self.nodes[i].clone()));
        for &i in keep {
            let ni = g.index[&self.nodes[i]];
            for (j, w) in self.neighbors(i) {
                if j > i && keep.contains(&j) {
                    let nj = g.index[&self.nodes[j]];
                    g.adj[ni].insert(nj, w);
                    g.adj[nj].insert(ni, w);
                }
            }
        }
        g
    }

    pub fn induced_by_names<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> WeightedGraph {
        let keep: BTreeSet<usize> = names
            .into_iter()
            .filter_map(|n| self.node_index(n))
            .collect();
        self.induced(&keep)
    }

    /// Connected components as sorted index sets, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<BTreeSet<usize>> {
        let n = self.nodes.len();
        let mut seen = vec![false; n];
        let mut components = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut component = BTreeSet::new();
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(v) = stack.pop() {
                component.insert(v);
                for (u, _) in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
            components.push(component);
        }
        components
    }

    /// Lowers every edge weight by `by`, dropping edges that reach zero and
    /// keeping all nodes.
    pub fn discounted(&self, by: u64) -> WeightedGraph {
        let mut g = WeightedGraph::new(self.nodes.clone());
        for i in 0..self.nodes.len() {
            for (j, w) in self.neighbors(i) {
                if j > i && w > by {
                    g.adj[i].insert(j, w - by);
                    g.adj[j].insert(i, w - by);
                }
            }
        }
        g
    }

    /// Writes "u v w" edge lines for external visualization.
    pub fn write_edge_list<W: Write>(&self, out: &mut W) -> Result<()> {
        for i in 0..self.nodes.len() {
            for (j, w) in self.neighbors(i) {
                if j > i {
                    writeln!(out, "{} {} {}", self.nodes[i], self.nodes[j], w)?;
                }
            }
        }
        Ok(())
    }
}

/// Triangle density: triangles over possible node triples, 0 below 3 nodes.
pub fn triangle_density(g: &WeightedGraph) -> Rational {
    let n = g.node_count() as u128;
    if n < 3 {
        return Rational::from_integer(0);
    }
    ratio(g.triangle_count() as u128, n * (n - 1) * (n - 2) / 6)
}

/// Edge density: edges over possible node pairs, 0 below 2 nodes.
pub fn edge_density(g: &WeightedGraph) -> Rational {
    let n = g.node_count() as u128;
    if n < 2 {
        return Rational::from_integer(0);
    }
    ratio(g.edge_count() as u128, n * (n - 1) / 2)
}

/// Co-activity graph of a single product: nodes are its reviewers, weights
/// count all products co-reviewed by the endpoint accounts (including the
/// anchor product itself, which every pair shares).
#[derive(Debug, Clone)]
pub struct CoActivityGraph {
    pub product_id: String,
    graph: WeightedGraph,
}

impl CoActivityGraph {
    pub fn from_parts(product_id: &str, graph: WeightedGraph) -> CoActivityGraph {
        CoActivityGraph {
            product_id: product_id.to_string(),
            graph,
        }
    }

    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    /// The graph with the anchor product's trivial contribution removed:
    /// every pair of this product's reviewers shares the product itself, so
    /// raw weights make the graph complete. Dropping one unit per edge
    /// leaves only co-activity beyond the anchor, which is the structure
    /// component detection actually needs.
    pub fn beyond_anchor(&self) -> WeightedGraph {
        self.graph.discounted(1)
    }
}

/// Union fraud graph over the reviewers of a product set, deduplicated.
/// Node labels come from corpus attributions; unlabeled means unknown.
#[derive(Debug, Clone)]
pub struct UnionFraudGraph {
    graph: WeightedGraph,
    labels: BTreeMap<String, String>,
}

impl UnionFraudGraph {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn label(&self, account_id: &str) -> Option<&str> {
        self.labels.get(account_id).map(String::as_str)
    }

    pub fn labels(&self) -> &BTreeMap<String, String> {
        &self.labels
    }

    /// Writes an account-to-worker label sidecar ("account worker" lines,
    /// "unknown" for unlabeled nodes).
    pub fn write_labels<W: Write>(&self, out: &mut W) -> Result<()> {
        for node in self.graph.nodes() {
            writeln!(out, "{} {}", node, self.label(node).unwrap_or("unknown"))?;
        }
        Ok(())
    }
}

/// Pairwise co-review counts for a fixed node set, accumulated product by
/// product over the whole corpus.
fn co_review_graph(corpus: &Corpus, node_set: &BTreeSet<String>) -> WeightedGraph {
    let mut g = WeightedGraph::new(node_set.iter().cloned());
    for product in corpus.products() {
        let members: Vec<usize> = corpus
            .reviewers_of(product)
            .iter()
            .filter_map(|a| g.node_index(a))
            .collect();
        for (pos, &i) in members.iter().enumerate() {
            for &j in &members[pos + 1..] {
                g.add_edge_weight(i, j, 1);
            }
        }
    }
    g
}

/// Builds the co-activity graph of one product.
pub fn build_co_activity_graph(corpus: &Corpus, product_id: &str) -> Result<CoActivityGraph> {
    if !corpus.products().contains(product_id) {
        return Err(Error::UnknownProduct(product_id.to_string()));
    }
    let reviewers = corpus.reviewers_of(product_id);
    Ok(CoActivityGraph {
        product_id: product_id.to_string(),
        graph: co_review_graph(corpus, &reviewers),
    })
}

/// Builds the union fraud graph over a set of products.
pub fn build_union_graph(corpus: &Corpus, product_ids: &BTreeSet<String>) -> Result<UnionFraudGraph> {
    for product in product_ids {
        if !corpus.products().contains(product) {
            return Err(Error::UnknownProduct(product.clone()));
        }
    }
    let mut nodes = BTreeSet::new();
    for product in product_ids {
        nodes.extend(corpus.reviewers_of(product));
    }
    let graph = co_review_graph(corpus, &nodes);
    let labels = nodes
        .iter()
        .filter_map(|a| corpus.worker_of(a).map(|w| (a.clone(), w.to_string())))
        .collect();
    Ok(UnionFraudGraph { graph, labels })
}

/// A bipartition of a graph's nodes with the total crossing weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cut {
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
    pub weight: u64,
}

/// Global minimum weighted cut. Disconnected graphs get a weight-0 cut that
/// splits the connected component holding the smallest node id off from the
/// rest. Connected graphs run a deterministic maximum-adjacency contraction
/// with ties broken by node order, so equal-weight cuts always resolve the
/// same way.
pub fn min_cut(g: &WeightedGraph) -> Result<Cut> {
    let n = g.node_count();
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "min cut needs at least 2 nodes, got {n}"
        )));
    }
    let components = g.connected_components();
    if components.len() > 1 {
        let side: BTreeSet<usize> = components[0].clone();
        return Ok(make_cut(g, &side, 0));
    }

    // Stoer-Wagner with an explicit weight matrix; fine at per-product scale.
    let mut weights = vec![vec![0u64; n]; n];
    for i in 0..n {
        for (j, w) in g.neighbors(i) {
            weights[i][j] = w;
        }
    }
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut best_weight = u64::MAX;
    let mut best_side: Vec<usize> = Vec::new();

    while active.len() > 1 {
        let start = active[0];
        let mut in_a = vec![false; n];
        in_a[start] = true;
        let mut key: Vec<u64> = vec![0; n];
        for &v in &active {
            key[v] = weights[start][v];
        }
        let mut prev = start;
        let mut last = start;
        for _ in 1..active.len() {
            let mut pick = usize::MAX;
            let mut pick_key = 0u64;
            for &v in &active {
                if !in_a[v] && (pick == usize::MAX || key[v] > pick_key) {
                    pick = v;
                    pick_key = key[v];
                }
            }
            in_a[pick] = true;
            prev = last;
            last = pick;
            for &v in &active {
                if !in_a[v] {
                    key[v] += weights[pick][v];
                }
            }
        }
        let cut_of_phase = key[last];
        if cut_of_phase < best_weight {
            best_weight = cut_of_phase;
            best_side = members[last].clone();
        }
        // merge `last` into `prev`
        for &v in &active {
            if v != prev && v != last {
                weights[prev][v] += weights[last][v];
                weights[v][prev] = weights[prev][v];
            }
        }
        let moved = std::mem::take(&mut members[last]);
        members[prev].extend(moved);
        active.retain(|&v| v != last);
    }

    let side: BTreeSet<usize> = best_side.into_iter().collect();
    Ok(make_cut(g, &side, best_weight))
}

fn make_cut(g: &WeightedGraph, side: &BTreeSet<usize>, weight: u64) -> Cut {
    let mut side_a = Vec::new();
    let mut side_b = Vec::new();
    for (i, name) in g.nodes().iter().enumerate() {
        if side.contains(&i) {
            side_a.push(name.clone());
        } else {
            side_b.push(name.clone());
        }
    }
    // normalize: the side holding the smallest node id is side_a
    if side_b.first() < side_a.first() {
        std::mem::swap(&mut side_a, &mut side_b);
    }
    Cut {
        side_a,
        side_b,
        weight,
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::WeightedGraph;
    use rand::Rng;
    use rand_chacha::ChaCha8Rng;

    pub fn graph_from_edges(n: usize, edges: &[(usize, usize, u64)]) -> WeightedGraph {
        let names: Vec<String> = (0..n).map(|i| format!("a{i:02}")).collect();
        let mut g = WeightedGraph::new(names.clone());
        for &(a, b, w) in edges {
            g.set_edge(&names[a], &names[b], w);
        }
        g
    }

    pub fn clique(names: &[String], w: u64) -> Vec<(String, String, u64)> {
        let mut edges = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                edges.push((names[i].clone(), names[j].clone(), w));
            }
        }
        edges
    }

    pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64, max_w: u64) -> WeightedGraph {
        let names: Vec<String> = (0..n).map(|i| format!("a{i:02}")).collect();
        let mut g = WeightedGraph::new(names.clone());
        for i in 0..n {
            for j in i + 1..n {
                if rng.random::<f64>() < p {
                    g.set_edge(&names[i], &names[j], rng.random_range(1..=max_w));
                }
            }
        }
        g
    }
}
