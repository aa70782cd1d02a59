//! Random Euclidean instances and the experiment drivers behind the CLI.
//!
//! Every trial draws from its own RNG stream derived from `(seed, n, trial)`
//! and rows are sorted before they are written, so output bytes do not depend
//! on how trials are scheduled across threads.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BapError, Result};
use crate::graph::{Positions, WeightedBipartiteGraph};
use crate::greedy::greedy_assign;
use crate::merge::{check_merge_conditions, merge_or_warmstart, MergeDecision, Partition};
use crate::pruner::{default_initial_matching, prune_bap, Strategy};
use crate::sim::CommGraph;

/// Where agents and tasks are placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distribution {
    /// Uniform on `[0, 100]^2`.
    UniformSquare,
    /// First half of the agents and tasks uniform on `[5, 40]^2`, the rest on `[60, 95]^2`.
    TwoClusters,
}

impl FromStr for Distribution {
    type Err = BapError;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "uniform" | "uniform_square" => Ok(Distribution::UniformSquare),
            "clusters" | "two_clusters" => Ok(Distribution::TwoClusters),
            other => Err(BapError::invalid(format!(
                "unknown distribution '{other}', expected uniform_square or two_clusters"
            ))),
        }
    }
}

/// Agents and tasks in the first cluster of a two-cluster instance.
pub fn cluster_sizes(n: usize, m: usize) -> (usize, usize) {
    (m.div_ceil(2), n.div_ceil(2))
}

/// Mixes the experiment seed with the instance size and trial number.
pub fn trial_seed(seed: u64, n: usize, trial: usize) -> u64 {
    fn splitmix(mut z: u64) -> u64 {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }
    splitmix(splitmix(splitmix(seed) ^ n as u64) ^ trial as u64)
}

/// Places `m` agents and `n` tasks and weights every pair by distance.
pub fn generate_instance(
    n: usize,
    m: usize,
    dist: Distribution,
    seed: u64,
) -> Result<WeightedBipartiteGraph> {
    if n == 0 || m == 0 {
        return Err(BapError::invalid(
            "instances need at least one agent and one task",
        ));
    }
    if n > m {
        return Err(BapError::invalid(format!("{n} tasks but only {m} agents")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = |lo: f64, hi: f64| [rng.gen_range(lo..hi), rng.gen_range(lo..hi)];
    let positions = match dist {
        Distribution::UniformSquare => Positions {
            agents: (0..m).map(|_| point(0.0, 100.0)).collect(),
            tasks: (0..n).map(|_| point(0.0, 100.0)).collect(),
        },
        Distribution::TwoClusters => {
            let (m1, n1) = cluster_sizes(n, m);
            let mut place = |count: usize, first: usize| -> Vec<[f64; 2]> {
                (0..count)
                    .map(|k| {
                        if k < first {
                            point(5.0, 40.0)
                        } else {
                            point(60.0, 95.0)
                        }
                    })
                    .collect()
            };
            let agents = place(m, m1);
            let tasks = place(n, n1);
            Positions { agents, tasks }
        }
    };
    WeightedBipartiteGraph::from_positions(positions)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentName {
    Complexity,
    Convergence,
    Message,
    Optimgap,
    Kstar,
    Merge,
}

impl ExperimentName {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::Complexity => "complexity",
            ExperimentName::Convergence => "convergence",
            ExperimentName::Message => "message",
            ExperimentName::Optimgap => "optimgap",
            ExperimentName::Kstar => "kstar",
            ExperimentName::Merge => "merge",
        }
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = BapError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "complexity" => ExperimentName::Complexity,
            "convergence" => ExperimentName::Convergence,
            "message" => ExperimentName::Message,
            "optimgap" => ExperimentName::Optimgap,
            "kstar" => ExperimentName::Kstar,
            "merge" => ExperimentName::Merge,
            other => {
                return Err(BapError::invalid(format!(
                    "unknown experiment '{other}', expected complexity, convergence, message, optimgap, kstar or merge"
                )))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: ExperimentName,
    pub n_values: Vec<usize>,
    /// Agent count; `None` means as many agents as tasks.
    pub agents: Option<usize>,
    pub trials: usize,
    pub seed: u64,
    pub topology: String,
    pub strategies: Vec<Strategy>,
    pub dist: Distribution,
}

impl ExperimentConfig {
    /// Desk-scale defaults for each experiment.
    pub fn new(name: ExperimentName) -> Self {
        let (n_values, trials, strategies, dist) = match name {
            ExperimentName::Kstar => (
                vec![50],
                1,
                vec![Strategy::DfsGreedy],
                Distribution::UniformSquare,
            ),
            ExperimentName::Merge => (
                vec![20],
                20,
                vec![Strategy::DfsGreedy],
                Distribution::TwoClusters,
            ),
            ExperimentName::Optimgap => (
                (4..=28).step_by(4).collect(),
                100,
                vec![Strategy::DfsGreedy],
                Distribution::UniformSquare,
            ),
            _ => (
                (4..=28).step_by(4).collect(),
                100,
                vec![Strategy::DfsGreedy, Strategy::Bfs],
                Distribution::UniformSquare,
            ),
        };
        ExperimentConfig {
            name,
            n_values,
            agents: None,
            trials,
            seed: 0,
            topology: "complete".into(),
            strategies,
            dist,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(BapError::invalid("trials must be at least 1"));
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(BapError::invalid(
                "task counts must be a nonempty list of positive numbers",
            ));
        }
        if self.strategies.is_empty() {
            return Err(BapError::invalid("at least one strategy is required"));
        }
        if let Some(m) = self.agents {
            if let Some(&n) = self.n_values.iter().find(|&&n| n > m) {
                return Err(BapError::invalid(format!("{n} tasks but only {m} agents")));
            }
        }
        Ok(())
    }

    fn agent_count(&self, n: usize) -> usize {
        self.agents.unwrap_or(n)
    }

    fn jobs(&self) -> Vec<(usize, usize)> {
        self.n_values
            .iter()
            .flat_map(|&n| (0..self.trials).map(move |t| (n, t)))
            .collect()
    }

    fn instance(&self, n: usize, trial: usize) -> Result<WeightedBipartiteGraph> {
        generate_instance(
            n,
            self.agent_count(n),
            self.dist,
            trial_seed(self.seed, n, trial),
        )
    }
}

/// One `(n, trial, strategy)` row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub n: usize,
    pub trial: usize,
    pub strategy: Strategy,
    pub prune_iterations: usize,
    pub time_steps: usize,
    pub max_explored_per_round: usize,
    pub mean_explored_per_round: f64,
    pub bottleneck_weight: f64,
    pub greedy_weight: f64,
    pub gap: f64,
}

/// Solves every trial with every strategy and the greedy baseline.
pub fn run_trials(cfg: &ExperimentConfig) -> Result<Vec<TrialRow>> {
    cfg.validate()?;
    let comms = cfg
        .n_values
        .iter()
        .map(|&n| Ok((n, CommGraph::parse(&cfg.topology, cfg.agent_count(n))?)))
        .collect::<Result<std::collections::BTreeMap<_, _>>>()?;
    let nested: Vec<Vec<TrialRow>> = cfg
        .jobs()
        .into_par_iter()
        .map(|(n, trial)| {
            let g = cfg.instance(n, trial)?;
            let comm = &comms[&n];
            let greedy = greedy_assign(&g, comm)?;
            let m0 = default_initial_matching(&g);
            cfg.strategies
                .iter()
                .map(|&strategy| {
                    let (_, trace) = prune_bap(&g, &m0, strategy)?;
                    let rounds: Vec<usize> = trace.exploring_rounds().collect();
                    let h = trace.bottleneck_weight();
                    Ok(TrialRow {
                        n,
                        trial,
                        strategy,
                        prune_iterations: trace.iterations(),
                        time_steps: trace.time_steps(comm.diameter()),
                        max_explored_per_round: rounds.iter().copied().max().unwrap_or(0),
                        mean_explored_per_round: if rounds.is_empty() {
                            0.0
                        } else {
                            rounds.iter().sum::<usize>() as f64 / rounds.len() as f64
                        },
                        bottleneck_weight: h,
                        greedy_weight: greedy.largest_weight,
                        gap: greedy.largest_weight - h,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<TrialRow> = nested.into_iter().flatten().collect();
    rows.sort_by_key(|r| (r.n, r.trial, r.strategy));
    Ok(rows)
}

/// Running largest matched weight against elapsed time steps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KstarRow {
    pub n: usize,
    pub trial: usize,
    pub algorithm: String,
    pub time_step: usize,
    pub weight: f64,
}

pub fn run_kstar(cfg: &ExperimentConfig) -> Result<Vec<KstarRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for (n, trial) in cfg.jobs() {
        let g = cfg.instance(n, trial)?;
        let comm = CommGraph::parse(&cfg.topology, g.agent_count())?;
        let d = comm.diameter();
        let m0 = default_initial_matching(&g);
        for &strategy in &cfg.strategies {
            let (_, trace) = prune_bap(&g, &m0, strategy)?;
            let mut clock = 0;
            rows.push(KstarRow {
                n,
                trial,
                algorithm: strategy.to_string(),
                time_step: 0,
                weight: m0.max_weight(&g).unwrap_or(0.0),
            });
            for r in &trace.records {
                clock += d * (1 + r.search_iterations);
                rows.push(KstarRow {
                    n,
                    trial,
                    algorithm: strategy.to_string(),
                    time_step: clock,
                    weight: r.matching_weight,
                });
            }
        }
        let greedy = greedy_assign(&g, &comm)?;
        rows.push(KstarRow {
            n,
            trial,
            algorithm: "greedy".into(),
            time_step: greedy.time_steps,
            weight: greedy.largest_weight,
        });
    }
    Ok(rows)
}

/// Outcome of merging two clustered halves.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MergeRow {
    pub n: usize,
    pub trial: usize,
    pub bound: f64,
    pub first_is_cluster: bool,
    pub cond_i: bool,
    pub cond_ii: bool,
    pub cond_iii: bool,
    pub decision: MergeDecision,
    pub merged_weight: f64,
    pub optimal_weight: f64,
    pub warm_iterations: usize,
    pub cold_iterations: usize,
}

pub fn run_merge(cfg: &ExperimentConfig) -> Result<Vec<MergeRow>> {
    cfg.validate()?;
    let strategy = cfg.strategies[0];
    let mut rows: Vec<MergeRow> = cfg
        .jobs()
        .into_par_iter()
        .map(|(n, trial)| {
            let g = cfg.instance(n, trial)?;
            let (m1, n1) = cluster_sizes(n, g.agent_count());
            let agents: Vec<usize> = (0..m1).collect();
            let tasks: Vec<usize> = (0..n1).collect();
            let p = Partition::solve(g.clone(), &agents, &tasks, strategy)?;
            let report = check_merge_conditions(&p, false)?;
            let (merged, _, warm) = merge_or_warmstart(&p, strategy)?;
            let (_, cold) = prune_bap(&g, &default_initial_matching(&g), strategy)?;
            Ok(MergeRow {
                n,
                trial,
                bound: report.bound,
                first_is_cluster: report.hypotheses.first_is_cluster,
                cond_i: report.cond_i,
                cond_ii: report.cond_ii,
                cond_iii: report.cond_iii,
                decision: report.decision,
                merged_weight: merged.max_weight(&g).unwrap_or(0.0),
                optimal_weight: cold.bottleneck_weight(),
                warm_iterations: warm.map_or(0, |t| t.iterations()),
                cold_iterations: cold.iterations(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by_key(|r| (r.n, r.trial));
    Ok(rows)
}

fn write_rows<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Runs the configured experiment and writes its CSV to `out`; returns the
/// number of data rows.
pub fn run_experiment_to<W: Write>(cfg: &ExperimentConfig, out: W) -> Result<usize> {
    match cfg.name {
        ExperimentName::Kstar => {
            let rows = run_kstar(cfg)?;
            write_rows(&rows, out)?;
            Ok(rows.len())
        }
        ExperimentName::Merge => {
            let rows = run_merge(cfg)?;
            write_rows(&rows, out)?;
            Ok(rows.len())
        }
        _ => {
            let rows = run_trials(cfg)?;
            write_rows(&rows, out)?;
            Ok(rows.len())
        }
    }
}

/// Runs the experiment and writes the CSV file at `path`.
pub fn run_experiment(cfg: &ExperimentConfig, path: &Path) -> Result<usize> {
    let io = |source| BapError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io)?;
    let mut out = BufWriter::new(file);
    let rows = run_experiment_to(cfg, &mut out)?;
    out.flush().map_err(io)?;
    Ok(rows)
}

/// Parses `a:b`, `a:b:step` or a comma-separated list.
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let bad = || {
        BapError::invalid(format!(
            "bad range '{spec}', expected a:b, a:b:step or a,b,c"
        ))
    };
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let values: Vec<usize> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (num(lo)?, num(hi)?, 1),
            [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
            _ => return Err(bad()),
        };
        if step == 0 || lo > hi {
            return Err(bad());
        }
        (lo..=hi).step_by(step).collect()
    } else {
        spec.split(',').map(num).collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(bad());
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn instances_are_reproducible() {
        let a = generate_instance(4, 4, Distribution::UniformSquare, 11).unwrap();
        let b = generate_instance(4, 4, Distribution::UniformSquare, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            generate_instance(4, 4, Distribution::UniformSquare, 12).unwrap()
        );
        assert!(generate_instance(0, 4, Distribution::UniformSquare, 1).is_err());
        assert!(generate_instance(5, 4, Distribution::UniformSquare, 1).is_err());
    }

    #[test]
    fn two_clusters_are_separated() {
        let g = generate_instance(50, 50, Distribution::TwoClusters, 3).unwrap();
        let pos = g.positions.as_ref().unwrap();
        let (m1, n1) = cluster_sizes(50, 50);
        assert_eq!((m1, n1), (25, 25));
        for a in &pos.agents[..m1] {
            assert!(a.iter().all(|c| (5.0..40.0).contains(c)));
        }
        for t in &pos.tasks[n1..] {
            assert!(t.iter().all(|c| (60.0..95.0).contains(c)));
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("4:20").unwrap().len(), 17);
        assert_eq!(
            parse_range("4:28:4").unwrap(),
            vec![4, 8, 12, 16, 20, 24, 28]
        );
        assert_eq!(parse_range("3,5").unwrap(), vec![3, 5]);
        assert!(parse_range("5:1").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn trial_rows_are_sorted_and_consistent() {
        let mut cfg = ExperimentConfig::new(ExperimentName::Complexity);
        cfg.n_values = vec![3, 5];
        cfg.trials = 4;
        let rows = run_trials(&cfg).unwrap();
        assert_eq!(rows.len(), 16);
        for w in rows.windows(2) {
            assert!((w[0].n, w[0].trial, w[0].strategy) < (w[1].n, w[1].trial, w[1].strategy));
        }
        for r in &rows {
            assert!(r.bottleneck_weight <= r.greedy_weight);
            assert!(r.gap >= 0.0);
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = ExperimentConfig::new(ExperimentName::Optimgap);
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::new(ExperimentName::Optimgap);
        cfg.agents = Some(3);
        assert!(cfg.validate().is_err());
    }
}
