mod common;

use distbap::experiments::{generate_instance, Distribution};
use distbap::graph::check_mcm;
use distbap::greedy::greedy_assign;
use distbap::merge::{check_merge_conditions, merge_or_warmstart, MergeDecision, Partition};
use distbap::pruner::default_initial_matching;
use distbap::sim::{run_distributed_prune_bap, CommGraph};
use distbap::{
    aug_bfs, aug_dfs, augment, is_augmenting_path, max_edge_in_matching, mcm_oracle,
    pruned_edge_set, verify_alternating_search, Edge, Matching, Path, SearchInput, Strategy,
    WeightedBipartiteGraph,
};
use proptest::prelude::{
    any, prop_assert, prop_assert_eq, prop_assume, proptest, Just, ProptestConfig,
};
use proptest::strategy::Strategy as _;

/// Graphs with at least as many agents as tasks, small integer weights
/// (so ties are common) and random missing edges.
fn graphs(max_m: usize) -> impl proptest::strategy::Strategy<Value = WeightedBipartiteGraph> {
    (1..=max_m)
        .prop_flat_map(|m| (Just(m), 1..=m))
        .prop_flat_map(|(m, n)| {
            proptest::collection::vec(proptest::option::weighted(0.8, 1u8..20), m * n).prop_map(
                move |cells| {
                    let edges: Vec<(usize, usize, f64)> = cells
                        .iter()
                        .enumerate()
                        .filter_map(|(k, w)| w.map(|w| (k / n, k % n, f64::from(w))))
                        .collect();
                    WeightedBipartiteGraph::from_edges(m, n, &edges).unwrap()
                },
            )
        })
        .prop_filter("needs an edge", |g| !g.edges().is_empty())
}

fn task_perfect(g: &WeightedBipartiteGraph) -> bool {
    default_initial_matching(g).len() == g.task_count()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 300,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn pruned_set_is_matching_plus_lighter_edges(g in graphs(6)) {
        let m = default_initial_matching(&g);
        let top = m.edges().map(|e| g.weight(e)).fold(f64::NEG_INFINITY, f64::max);
        let phi = pruned_edge_set(&g, &m).unwrap();
        for e in g.edges().iter() {
            prop_assert_eq!(phi.edges.contains(e), m.contains(e) || g.weight(e) < top);
        }
        prop_assert_eq!(phi.threshold, top);
    }

    #[test]
    fn prune_bap_is_optimal_and_monotone(g in graphs(6)) {
        prop_assume!(task_perfect(&g));
        let expected = common::threshold_bottleneck(&g);
        let m0 = default_initial_matching(&g);
        for strategy in Strategy::ALL {
            let (m, trace) = distbap::prune_bap(&g, &m0, strategy).unwrap();
            check_mcm(&g, &m).unwrap();
            prop_assert_eq!(m.max_weight(&g), Some(expected));
            prop_assert_eq!(trace.bottleneck_weight(), expected);
            let weights: Vec<f64> = trace.records.iter().map(|r| r.bottleneck_weight).collect();
            prop_assert!(weights.windows(2).all(|w| w[1] <= w[0]));
            let last = trace.records.last().unwrap();
            prop_assert!(!last.search_found);
            prop_assert!(trace.records[..trace.records.len() - 1].iter().all(|r| r.search_found));
        }
    }

    #[test]
    fn searches_respect_bounds_and_agree_on_existence(g in graphs(6)) {
        prop_assume!(task_perfect(&g));
        let m = default_initial_matching(&g);
        let (removed, _) = max_edge_in_matching(&g, &m).unwrap();
        let mut edges = pruned_edge_set(&g, &m).unwrap().edges;
        edges.remove(removed);
        let reduced = m.without(removed);
        let input = SearchInput::new(&g, &edges, &reduced, removed).unwrap();
        let exists = common::matching_size(&g, |i, j| edges.contains(Edge::new(i, j))) == m.len();
        let n = g.task_count();
        let bfs = aug_bfs(&input).unwrap();
        prop_assert!(bfs.iterations <= n);
        prop_assert_eq!(bfs.found, exists);
        for greedy in [true, false] {
            let dfs = aug_dfs(&input, greedy).unwrap();
            prop_assert!(dfs.iterations < 2 * n);
            prop_assert_eq!(dfs.found, exists);
            // A failed search must have explored every reachable agent.
            prop_assert!(dfs.found || verify_alternating_search(&dfs.explored, &input));
            if exists {
                // Breadth-first paths are shortest.
                prop_assert!(bfs.path.len() <= dfs.path.len());
            }
        }
        prop_assert!(bfs.found || verify_alternating_search(&bfs.explored, &input));
        if exists {
            let path = Path::from_edges(&bfs.path).unwrap();
            prop_assert!(is_augmenting_path(&path, &reduced));
            let grown = augment(&reduced, &path).unwrap();
            prop_assert_eq!(grown.len(), reduced.len() + 1);
            prop_assert_eq!(grown, bfs.new_matching);
        } else {
            prop_assert_eq!(bfs.new_matching, reduced);
        }
    }

    #[test]
    fn distributed_replays_centralized(g in graphs(6), seed in any::<u64>()) {
        prop_assume!(task_perfect(&g));
        let m0 = default_initial_matching(&g);
        let k = g.agent_count();
        let topologies = [
            CommGraph::complete(k).unwrap(),
            CommGraph::ring(k).unwrap(),
            CommGraph::path(k).unwrap(),
            CommGraph::random_connected(k, seed).unwrap(),
        ];
        for strategy in Strategy::ALL {
            let (central_m, central) = distbap::prune_bap(&g, &m0, strategy).unwrap();
            for comm in &topologies {
                let (m, trace, metrics) = run_distributed_prune_bap(&g, comm, &m0, strategy).unwrap();
                prop_assert_eq!(&m, &central_m);
                prop_assert_eq!(&trace, &central);
                prop_assert_eq!(metrics.time_steps, central.time_steps(comm.diameter()));
            }
        }
    }

    #[test]
    fn greedy_never_beats_the_bottleneck(g in graphs(6)) {
        prop_assume!(g.edges().len() == g.agent_count() * g.task_count());
        let out = greedy_assign(&g, &CommGraph::complete(g.agent_count()).unwrap()).unwrap();
        check_mcm(&g, &out.matching).unwrap();
        prop_assert!(out.largest_weight >= common::threshold_bottleneck(&g));
        prop_assert_eq!(out.time_steps, out.matching.len() * usize::from(g.agent_count() > 1));
    }

    #[test]
    fn merge_never_loses_optimality(g in graphs(7), split in (1usize..4, 1usize..4)) {
        let (a1, t1) = (split.0.min(g.agent_count()), split.1.min(g.task_count()));
        let agents: Vec<usize> = (0..a1).collect();
        let tasks: Vec<usize> = (0..t1).collect();
        let Ok(p) = Partition::solve(g.clone(), &agents, &tasks, Strategy::DfsGreedy) else {
            return Ok(());
        };
        let Ok(report) = check_merge_conditions(&p, false) else { return Ok(()) };
        let best = common::threshold_bottleneck(&g);
        let (m, report2, _) = merge_or_warmstart(&p, Strategy::Bfs).unwrap();
        prop_assert_eq!(&report, &report2);
        if report.decision == MergeDecision::ReuseUnion {
            prop_assert_eq!(m.max_weight(&g), Some(best));
        }
        if check_mcm(&g, &m).is_ok() {
            prop_assert_eq!(m.max_weight(&g), Some(best));
        }
        if report.hypotheses.union_maximum {
            prop_assert!(best <= report.bound);
        }
    }

    #[test]
    fn oracle_matchings_are_maximum(g in graphs(7)) {
        let m = mcm_oracle(&g, &g.edges());
        prop_assert_eq!(m.len(), common::matching_size(&g, |i, j| g.has_edge(Edge::new(i, j))));
    }

    #[test]
    fn instances_depend_only_on_the_seed(n in 1usize..8, extra in 0usize..3, seed in any::<u64>()) {
        for dist in [Distribution::UniformSquare, Distribution::TwoClusters] {
            let a = generate_instance(n, n + extra, dist, seed).unwrap();
            prop_assert_eq!(&a, &generate_instance(n, n + extra, dist, seed).unwrap());
            prop_assert_eq!((a.agent_count(), a.task_count()), (n + extra, n));
        }
    }

    #[test]
    fn matching_union_rejects_shared_agents(t1 in 0usize..3, t2 in 3usize..6) {
        let a = Matching::from_edges(2, [Edge::new(0, t1)]).unwrap();
        let b = Matching::from_edges(2, [Edge::new(0, t2)]).unwrap();
        prop_assert!(a.union(&b).is_err());
    }
}
