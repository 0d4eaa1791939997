//! Fraud component detection by recursive min-cut splitting.
//!
//! The detector cuts a co-activity graph at its global minimum cut and keeps
//! recursing while both halves get strictly denser (by triangle density) and
//! the current graph is still below the density threshold. Whatever stops
//! splitting is emitted as one component: a set of accounts dense enough to
//! plausibly be one operator's pool.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::graph::{
    build_co_activity_graph, edge_density, min_cut, triangle_density, CoActivityGraph,
    WeightedGraph,
};
use crate::{ratio, Error, Rational, Result};

/// Splitting thresholds: `eta` is the minimum component size, `tau` the
/// triangle-density ceiling below which splitting may continue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub eta: usize,
    #[serde(with = "tau_serde")]
    pub tau: Rational,
}

impl Default for DensityConfig {
    fn default() -> Self {
        DensityConfig {
            eta: 5,
            tau: ratio(1, 2),
        }
    }
}

impl DensityConfig {
    pub fn with_tau_f64(eta: usize, tau: f64) -> Result<DensityConfig> {
        if !(0.0..=1.0).contains(&tau) || tau == 0.0 {
            return Err(Error::InvalidConfig(format!("tau {tau} outside (0,1]")));
        }
        // exact up to 1e-6 granularity, which is all config files carry
        let tau = ratio((tau * 1_000_000.0).round() as u128, 1_000_000);
        let cfg = DensityConfig { eta, tau };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.eta < 2 {
            return Err(Error::InvalidConfig(format!("eta {} < 2", self.eta)));
        }
        if self.tau <= Rational::from_integer(0) || self.tau > Rational::from_integer(1) {
            return Err(Error::InvalidConfig("tau outside (0,1]".to_string()));
        }
        Ok(())
    }
}

mod tau_serde {
    use super::Rational;
    use num_traits::ToPrimitive;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Rational, s: S) -> Result<S::Ok, S::Error> {
        v.to_f64().unwrap_or(0.0).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let v = f64::deserialize(d)?;
        Ok(super::ratio((v * 1_000_000.0).round() as u128, 1_000_000))
    }
}

/// A set of accounts believed to be controlled by one worker.
#[derive(Debug, Clone, PartialEq)]
pub struct FraudComponent {
    pub product_id: String,
    pub accounts: BTreeSet<String>,
    pub triangle_density: Rational,
    pub edge_density: Rational,
}

impl FraudComponent {
    pub(crate) fn from_subgraph(product_id: &str, g: &WeightedGraph) -> FraudComponent {
        FraudComponent {
            product_id: product_id.to_string(),
            accounts: g.nodes().iter().cloned().collect(),
            triangle_density: triangle_density(g),
            edge_density: edge_density(g),
        }
    }

    pub fn len(&self) -> usize {
        self.accounts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accounts.is_empty()
    }
}

/// Full partition of one product's reviewers: detected components plus the
/// remainder treated as honest.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub product_id: String,
    pub components: Vec<FraudComponent>,
    pub honest: BTreeSet<String>,
}

/// Runs the recursive splitter on a co-activity graph as given.
pub fn mcdense(g: &CoActivityGraph, cfg: &DensityConfig) -> Vec<FraudComponent> {
    detect_components(g.graph(), cfg)
        .into_iter()
        .map(|sub| FraudComponent::from_subgraph(&g.product_id, &sub))
        .collect()
}

/// The splitter over a bare weighted graph; returns emitted subgraphs.
pub fn detect_components(g: &WeightedGraph, cfg: &DensityConfig) -> Vec<WeightedGraph> {
    let mut out = Vec::new();
    split(g.clone(), cfg, &mut out);
    out
}

fn split(g: WeightedGraph, cfg: &DensityConfig, out: &mut Vec<WeightedGraph>) {
    if g.node_count() < cfg.eta {
        return;
    }
    let rho = triangle_density(&g);
    let cut = min_cut(&g).expect("node count checked above");
    let g1 = g.induced_by_names(cut.side_a.iter().map(String::as_str));
    let g2 = g.induced_by_names(cut.side_b.iter().map(String::as_str));
    if triangle_density(&g1) > rho && triangle_density(&g2) > rho && rho < cfg.tau {
        split(g1, cfg, out);
        split(g2, cfg, out);
    } else {
        out.push(g);
    }
}

/// Partitions one product's reviewers into fraud components and honest
/// accounts.
///
/// The raw co-activity graph of a product is complete (every reviewer pair
/// shares the product itself), so detection runs on the graph beyond the
/// anchor. Connected components smaller than `eta` can never be emitted and
/// only dilute density comparisons, so each sufficiently large connected
/// component is split independently; everything else is honest.
pub fn partition_product(
    corpus: &Corpus,
    product_id: &str,
    cfg: &DensityConfig,
) -> Result<Partition> {
    cfg.validate()?;
    let cag = build_co_activity_graph(corpus, product_id)?;
    let analysis = cag.beyond_anchor();
    let mut components = Vec::new();
    for nodes in analysis.connected_components() {
        if nodes.len() < cfg.eta {
            continue;
        }
        for sub in detect_components(&analysis.induced(&nodes), cfg) {
            components.push(FraudComponent::from_subgraph(product_id, &sub));
        }
    }
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

pub(crate) fn sort_components(components: &mut [FraudComponent]) {
    components.sort_by(|a, b| {
        b.triangle_density
            .cmp(&a.triangle_density)
            .then(b.accounts.len().cmp(&a.accounts.len()))
            .then(a.accounts.iter().next().cmp(&b.accounts.iter().next()))
    });
}

/// Components at or above a reporting density floor.
pub fn suspicious_components(p: &Partition, min_density: Rational) -> Vec<&FraudComponent> {
    p.components
        .iter()
        .filter(|c| c.triangle_density >= min_density)
        .collect()
}
