use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{BapError, Result};

/// Undirected, connected, time-invariant communication graph between agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommGraph {
    adjacency: Vec<Vec<usize>>,
    diameter: usize,
}

impl CommGraph {
    /// Builds the graph from adjacency lists. Links are symmetrised; self
    /// loops are ignored.
    pub fn from_adjacency(lists: Vec<Vec<usize>>) -> Result<Self> {
        let n = lists.len();
        if n == 0 {
            return Err(BapError::invalid(
                "communication graph needs at least one agent",
            ));
        }
        let mut sets = vec![BTreeSet::new(); n];
        for (i, list) in lists.iter().enumerate() {
            for &j in list {
                if j >= n {
                    return Err(BapError::invalid(format!(
                        "link {i}-{j} refers to a missing agent"
                    )));
                }
                if i != j {
                    sets[i].insert(j);
                    sets[j].insert(i);
                }
            }
        }
        let adjacency: Vec<Vec<usize>> =
            sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let diameter = diameter(&adjacency)?;
        Ok(CommGraph {
            adjacency,
            diameter,
        })
    }

    pub fn complete(n: usize) -> Result<Self> {
        Self::from_adjacency(
            (0..n)
                .map(|i| (0..n).filter(|&j| j != i).collect())
                .collect(),
        )
    }

    pub fn path(n: usize) -> Result<Self> {
        Self::from_adjacency(
            (0..n)
                .map(|i| if i + 1 < n { vec![i + 1] } else { vec![] })
                .collect(),
        )
    }

    pub fn ring(n: usize) -> Result<Self> {
        Self::from_adjacency(
            (0..n)
                .map(|i| if n > 1 { vec![(i + 1) % n] } else { vec![] })
                .collect(),
        )
    }

    /// Random spanning tree plus each remaining link with probability 0.1.
    pub fn random_connected(n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lists = vec![Vec::new(); n];
        for (i, list) in lists.iter_mut().enumerate().skip(1) {
            list.push(rng.gen_range(0..i));
        }
        for (i, list) in lists.iter_mut().enumerate() {
            for j in i + 1..n {
                if rng.gen_bool(0.1) {
                    list.push(j);
                }
            }
        }
        Self::from_adjacency(lists)
    }

    /// Reads adjacency lists from a JSON file: `[[1,2],[0],[0]]`.
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| BapError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let lists: Vec<Vec<usize>> =
            serde_json::from_str(&text).map_err(|source| BapError::Json {
                path: path.to_path_buf(),
                source,
            })?;
        Self::from_adjacency(lists)
    }

    /// Parses `complete`, `path`, `ring`, `random:<seed>` or `file:<json>`
    /// for `n` agents.
    pub fn parse(spec: &str, n: usize) -> Result<Self> {
        let graph = match spec.split_once(':') {
            Some(("file", path)) => Self::from_json_file(Path::new(path))?,
            Some(("random", seed)) => {
                let seed = seed
                    .parse()
                    .map_err(|_| BapError::invalid(format!("bad topology seed '{seed}'")))?;
                Self::random_connected(n, seed)?
            }
            None if spec == "complete" => Self::complete(n)?,
            None if spec == "path" => Self::path(n)?,
            None if spec == "ring" => Self::ring(n)?,
            _ => {
                return Err(BapError::invalid(format!(
                    "unknown topology '{spec}', expected complete, path, ring, random:<seed> or file:<path>"
                )))
            }
        };
        if graph.agent_count() != n {
            return Err(BapError::invalid(format!(
                "topology has {} agents, instance has {n}",
                graph.agent_count()
            )));
        }
        Ok(graph)
    }

    pub fn agent_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbours(&self, agent: usize) -> &[usize] {
        &self.adjacency[agent]
    }

    pub fn diameter(&self) -> usize {
        self.diameter
    }

    pub fn link_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Hop distances from `source`; `None` for unreachable agents.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        bfs(&self.adjacency, source)
    }
}

fn bfs(adjacency: &[Vec<usize>], source: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adjacency.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap_or(0);
        for &u in &adjacency[v] {
            if dist[u].is_none() {
                dist[u] = Some(d + 1);
                queue.push_back(u);
            }
        }
    }
    dist
}

fn diameter(adjacency: &[Vec<usize>]) -> Result<usize> {
    let mut best = 0;
    for source in 0..adjacency.len() {
        for d in bfs(adjacency, source) {
            best = best.max(d.ok_or(BapError::Disconnected)?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diameters_of_standard_topologies() {
        assert_eq!(CommGraph::complete(6).unwrap().diameter(), 1);
        assert_eq!(CommGraph::path(5).unwrap().diameter(), 4);
        assert_eq!(CommGraph::ring(10).unwrap().diameter(), 5);
        assert_eq!(CommGraph::ring(7).unwrap().diameter(), 3);
        assert_eq!(CommGraph::complete(1).unwrap().diameter(), 0);
        assert_eq!(CommGraph::ring(2).unwrap().link_count(), 1);
    }

    #[test]
    fn disconnected_is_rejected() {
        let r = CommGraph::from_adjacency(vec![vec![1], vec![0], vec![]]);
        assert!(matches!(r, Err(BapError::Disconnected)));
        assert!(CommGraph::from_adjacency(vec![vec![5]]).is_err());
    }

    #[test]
    fn random_graphs_are_connected_and_reproducible() {
        for seed in 0..20 {
            let a = CommGraph::random_connected(8, seed).unwrap();
            assert_eq!(a, CommGraph::random_connected(8, seed).unwrap());
            assert!(a.diameter() >= 1);
        }
    }

    #[test]
    fn parse_specs() {
        assert_eq!(CommGraph::parse("ring", 4).unwrap().diameter(), 2);
        assert_eq!(CommGraph::parse("random:3", 4).unwrap().agent_count(), 4);
        assert!(CommGraph::parse("star", 4).is_err());
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("adj.json");
        std::fs::write(&file, "[[1],[2],[]]").unwrap();
        let g = CommGraph::parse(&format!("file:{}", file.display()), 3).unwrap();
        assert_eq!(g.diameter(), 2);
        assert!(CommGraph::parse(&format!("file:{}", file.display()), 4).is_err());
    }
}
