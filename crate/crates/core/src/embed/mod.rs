//! Graph embeddings for guilt-by-association account expansion.
//!
//! Weighted random walks over the union fraud graph feed a skip-gram model
//! with negative sampling; accounts controlled by the same worker share walk
//! context and land close together, so a classifier over the embedding can
//! label unknown accounts with the worker most likely to control them.

pub mod gba;
pub mod skipgram;
pub mod walks;

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::graph::WeightedGraph;
use crate::{Error, Result};

pub use gba::{guilt_by_association, train_gba, GbaConfig, GbaModel};
pub use skipgram::{train_embedding, TrainStats};
pub use walks::random_walks;

/// Walk and training parameters. Defaults follow the usual grid-searched
/// values for account graphs; desk-scale runs shrink them via config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Walks started per node.
    pub gamma: usize,
    /// Maximum walk length.
    pub walk_len: usize,
    /// Skip-gram context window.
    pub window: usize,
    /// Embedding dimension.
    pub dims: usize,
    pub seed: u64,
    /// Negative samples per (center, context) pair.
    pub negatives: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    /// Unsynchronized parallel updates; faster, mildly nondeterministic.
    pub parallel: bool,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            gamma: 80,
            walk_len: 100,
            window: 5,
            dims: 300,
            seed: 1,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            parallel: false,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.gamma == 0 || self.walk_len == 0 || self.window == 0 || self.epochs == 0 {
            return Err(Error::InvalidConfig(
                "walk parameters must be positive".to_string(),
            ));
        }
        if self.window >= self.walk_len {
            return Err(Error::InvalidConfig(format!(
                "window {} must be smaller than walk length {}",
                self.window, self.walk_len
            )));
        }
        if self.dims == 0 || self.dims > 65_536 {
            return Err(Error::InvalidConfig(format!(
                "dims {} outside supported range 1-65536",
                self.dims
            )));
        }
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".to_string()));
        }
        Ok(())
    }
}

/// Dense node embedding matrix with a node-id index.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    dims: usize,
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f32>,
}

impl Embedding {
    pub(crate) fn from_parts(dims: usize, nodes: Vec<String>, data: Vec<f32>) -> Embedding {
        debug_assert_eq!(nodes.len() * dims, data.len());
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Embedding {
            dims,
            nodes,
            index,
            data,
        }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dims..(i + 1) * self.dims]
    }

    pub fn vector(&self, node: &str) -> Option<&[f32]> {
        self.index.get(node).map(|&i| self.row(i))
    }

    pub fn cosine(&self, a: &str, b: &str) -> Option<f64> {
        let (va, vb) = (self.vector(a)?, self.vector(b)?);
        let dot: f64 = va.iter().zip(vb).map(|(x, y)| (*x as f64) * (*y as f64)).sum();
        let na: f64 = va.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
        let nb: f64 = vb.iter().map(|x| (*x as f64) * (*x as f64)).sum::<f64>().sqrt();
        if na == 0.0 || nb == 0.0 {
            return None;
        }
        Some(dot / (na * nb))
    }

    /// Writes the matrix as little-endian f32 with a small header, and the
    /// node index as a text sidecar (one id per line).
    pub fn save(&self, matrix_path: &Path, nodes_path: &Path) -> Result<()> {
        let mut out = BufWriter::new(File::create(matrix_path)?);
        out.write_all(b"CTEM")?;
        out.write_all(&1u32.to_le_bytes())?;
        out.write_all(&(self.dims as u32).to_le_bytes())?;
        out.write_all(&(self.nodes.len() as u64).to_le_bytes())?;
        for v in &self.data {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()?;
        let mut sidecar = BufWriter::new(File::create(nodes_path)?);
        for node in &self.nodes {
            writeln!(sidecar, "{node}")?;
        }
        sidecar.flush()?;
        Ok(())
    }

    pub fn load(matrix_path: &Path, nodes_path: &Path) -> Result<Embedding> {
        let mut input = BufReader::new(File::open(matrix_path)?);
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"CTEM" {
            return Err(Error::InvalidInput("not an embedding matrix file".to_string()));
        }
        let mut buf4 = [0u8; 4];
        input.read_exact(&mut buf4)?;
        let version = u32::from_le_bytes(buf4);
        if version != 1 {
            return Err(Error::InvalidInput(format!(
                "unsupported embedding version {version}"
            )));
        }
        input.read_exact(&mut buf4)?;
        let dims = u32::from_le_bytes(buf4) as usize;
        let mut buf8 = [0u8; 8];
        input.read_exact(&mut buf8)?;
        let count = u64::from_le_bytes(buf8) as usize;
        let mut data = vec![0f32; count * dims];
        for v in &mut data {
            input.read_exact(&mut buf4)?;
            *v = f32::from_le_bytes(buf4);
        }
        let nodes: Vec<String> = BufReader::new(File::open(nodes_path)?)
            .lines()
            .collect::<std::io::Result<_>>()?;
        if nodes.len() != count {
            return Err(Error::InvalidInput(format!(
                "node sidecar has {} entries, matrix has {count}",
                nodes.len()
            )));
        }
        Ok(Embedding::from_parts(dims, nodes, data))
    }
}

/// Walks plus training in one step.
pub fn embed_graph(g: &WeightedGraph, cfg: &WalkConfig) -> Result<(Embedding, TrainStats)> {
    let walks = random_walks(g, cfg)?;
    train_embedding(g.nodes(), &walks, cfg)
}
