//! JSON files for instances and matchings.
//!
//! Instance: `{"m", "n", "weights"?, "mask"?, "positions"?}`, agent-major.
//! When `weights` is absent they are the Euclidean distances between
//! `positions`. Matching: `{"matched_task": [...]}` with `-1` for a free agent.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{BapError, Result};
use crate::graph::{Matching, Positions, WeightedBipartiteGraph};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<Vec<bool>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positions: Option<Positions>,
}

impl InstanceFile {
    pub fn from_graph(g: &WeightedBipartiteGraph) -> Self {
        let mask = g.mask_matrix();
        let complete = mask.iter().flatten().all(|&p| p);
        let weights = g
            .weight_matrix()
            .into_iter()
            .zip(&mask)
            .map(|(row, mrow)| {
                row.into_iter()
                    .zip(mrow)
                    .map(|(w, &p)| if p { w } else { 0.0 })
                    .collect()
            })
            .collect();
        InstanceFile {
            m: g.agent_count(),
            n: g.task_count(),
            weights: Some(weights),
            mask: (!complete).then_some(mask),
            positions: g.positions.clone(),
        }
    }

    pub fn into_graph(self) -> Result<WeightedBipartiteGraph> {
        let g = match (self.weights, &self.positions) {
            (Some(weights), _) => {
                let mask = self
                    .mask
                    .unwrap_or_else(|| vec![vec![true; self.n]; self.m]);
                let mut g = WeightedBipartiteGraph::with_mask(weights, mask)?;
                g.positions = self.positions.clone();
                g
            }
            (None, Some(pos)) => {
                let mut g = WeightedBipartiteGraph::from_positions(pos.clone())?;
                if let Some(mask) = self.mask {
                    g = WeightedBipartiteGraph::with_mask(g.weight_matrix(), mask)?;
                    g.positions = self.positions.clone();
                }
                g
            }
            (None, None) => {
                return Err(BapError::invalid(
                    "instance has neither weights nor positions",
                ))
            }
        };
        if g.agent_count() != self.m || g.task_count() != self.n {
            return Err(BapError::invalid(format!(
                "declared {}x{} but the data is {}x{}",
                self.m,
                self.n,
                g.agent_count(),
                g.task_count()
            )));
        }
        Ok(g)
    }
}

pub fn instance_from_json(text: &str) -> Result<WeightedBipartiteGraph> {
    serde_json::from_str::<InstanceFile>(text)
        .map_err(|e| BapError::invalid(e.to_string()))?
        .into_graph()
}

pub fn instance_to_json(g: &WeightedBipartiteGraph) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_graph(g)).expect("instance serialises")
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| BapError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| BapError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_instance(path: &Path) -> Result<WeightedBipartiteGraph> {
    serde_json::from_str::<InstanceFile>(&read(path)?)
        .map_err(|source| BapError::Json {
            path: path.to_path_buf(),
            source,
        })?
        .into_graph()
}

pub fn write_instance(g: &WeightedBipartiteGraph, path: &Path) -> Result<()> {
    write(path, &instance_to_json(g))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchingFile {
    pub matched_task: Vec<i64>,
}

pub fn read_matching(path: &Path) -> Result<Matching> {
    let file: MatchingFile =
        serde_json::from_str(&read(path)?).map_err(|source| BapError::Json {
            path: path.to_path_buf(),
            source,
        })?;
    Matching::from_sentinel(&file.matched_task)
}

pub fn matching_to_json(m: &Matching) -> String {
    serde_json::to_string(&MatchingFile {
        matched_task: m.to_sentinel(),
    })
    .expect("matching serialises")
}

pub fn write_matching(m: &Matching, path: &Path) -> Result<()> {
    write(path, &matching_to_json(m))
}
