mod common;

use common::{exhaustive_optimum, held_karp};
use qaco::clustering::{build_cluster_tree, TreeParams};
use qaco::hybrid::{merge_cycles, solve_on_tree, stitch, SubSolution};
use qaco::tsplib::EdgeWeightType;
use qaco::{gen_random_instance, solve_hybrid, validate_tour, HybridConfig, Instance, LeafSolver, MetricMode, NoiseSpec, Refinement};

const PLAIN: MetricMode = MetricMode::PlainEuclidean;

fn quads() -> Instance {
    let mut pts = Vec::new();
    for (cx, cy) in [(0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (0.0, 100.0)] {
        for (dx, dy) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)] {
            pts.push((cx + dx, cy + dy));
        }
    }
    Instance::new("quads16", EdgeWeightType::Euc2d, pts).unwrap()
}

fn plain(seed: u64) -> HybridConfig {
    HybridConfig { metric: PLAIN, seed, ..HybridConfig::default() }
}

#[test]
fn separated_quads_are_solved_and_visited_around_the_perimeter() {
    let inst = quads();
    let opt = held_karp(&inst.distance_matrix(PLAIN));
    for seed in 0..5 {
        let res = solve_hybrid(&inst, &plain(seed)).unwrap();
        assert!(validate_tour(res.tour.order(), 16));
        assert_eq!(res.stats.leaf_lengths.len(), 4);
        assert!(res.stats.leaf_lengths.iter().all(|&l| (l - 8.0).abs() < 1e-9), "{:?}", res.stats.leaf_lengths);
        // Pairwise merges plus 2-opt can leave a quad opened at the wrong
        // edge, which costs a few hundredths here.
        assert!(res.length >= opt - 1e-9 && res.length <= opt * 1.001, "seed {seed}: {} vs optimum {opt}", res.length);
        // Quads appear as contiguous runs, visited around the perimeter.
        let quad_seq: Vec<usize> = res.tour.order().iter().map(|c| c / 4).collect();
        let changes: Vec<(usize, usize)> =
            (0..16).map(|p| (quad_seq[p], quad_seq[(p + 1) % 16])).filter(|(a, b)| a != b).collect();
        assert_eq!(changes.len(), 4);
        assert!(changes.iter().all(|(a, b)| (a + 2) % 4 != *b), "diagonal hop in {changes:?}");
    }
}

#[test]
fn two_pairs_merge_through_the_cheapest_exchange() {
    let inst = Instance::new("pairs", EdgeWeightType::Euc2d, vec![(0.0, 0.0), (0.0, 1.0), (5.0, 0.0), (5.0, 1.5)]).unwrap();
    let d = inst.distance_matrix(PLAIN);
    let (merged, delta) = merge_cycles(&[0, 1], &[2, 3], &d);
    let opt = exhaustive_optimum(&|a, b| d.get(a, b), 4);
    assert!((d.cycle_length(&merged) - opt).abs() < 1e-12);
    assert!((d.cycle_length(&[0, 1]) + d.cycle_length(&[2, 3]) + delta - opt).abs() < 1e-12);
}

#[test]
fn stitched_length_is_leaves_plus_reported_cost() {
    for seed in 0..10u64 {
        let inst = gen_random_instance(37, seed, 100.0).unwrap();
        let cfg = HybridConfig { refinement: Refinement::None, leaf_solver: LeafSolver::BruteForce, ..plain(seed) };
        let res = solve_hybrid(&inst, &cfg).unwrap();
        let leaves: f64 = res.stats.leaf_lengths.iter().sum();
        assert!((res.stats.stitched_length - (leaves + res.stats.stitch_cost)).abs() < 1e-6);
        assert_eq!(res.length, res.stats.stitched_length);
    }
    let inst = gen_random_instance(9, 1, 10.0).unwrap();
    let d = inst.distance_matrix(PLAIN);
    let subs = vec![
        SubSolution { indices: vec![0, 1, 2], cycle: vec![0, 1, 2], length: d.cycle_length(&[0, 1, 2]) },
        SubSolution { indices: vec![3, 4], cycle: vec![3, 4], length: d.cycle_length(&[3, 4]) },
        SubSolution { indices: vec![5, 6, 7, 8], cycle: vec![5, 6, 7, 8], length: d.cycle_length(&[5, 6, 7, 8]) },
    ];
    let (cycle, added) = stitch(&subs, &d);
    assert!(validate_tour(&cycle, 9));
    let base: f64 = subs.iter().map(|s| s.length).sum();
    assert!((d.cycle_length(&cycle) - base - added).abs() < 1e-9);
}

#[test]
fn qaco_leaves_never_beat_brute_force_leaves() {
    for seed in 0..5u64 {
        let inst = gen_random_instance(40, 100 + seed, 100.0).unwrap();
        let tree = build_cluster_tree(&inst, TreeParams::default(), seed);
        let exact = solve_on_tree(&inst, &tree, &HybridConfig { leaf_solver: LeafSolver::BruteForce, ..plain(seed) }).unwrap();
        let noisy = HybridConfig { noise: NoiseSpec::bit_flip(0.1).unwrap(), ..plain(seed) };
        let quantum = solve_on_tree(&inst, &tree, &noisy).unwrap();
        assert_eq!(exact.stats.leaf_lengths.len(), quantum.stats.leaf_lengths.len());
        for (q, b) in quantum.stats.leaf_lengths.iter().zip(&exact.stats.leaf_lengths) {
            assert!(q + 1e-9 >= *b);
        }
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let inst = common::load("eil51");
    let cfg = HybridConfig { noise: NoiseSpec::thermal(0.05).unwrap(), seed: 3, ..HybridConfig::default() };
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| solve_hybrid(&inst, &cfg).unwrap())
    };
    let one = run(1);
    let many = run(8);
    assert_eq!(one.tour, many.tour);
    assert_eq!(one.length, many.length);
    assert_eq!(one.stats.leaf_lengths, many.stats.leaf_lengths);
}

#[test]
fn refinements_never_lengthen_the_tour() {
    let inst = common::load("berlin52");
    for refinement in [Refinement::None, Refinement::TwoOpt, Refinement::AcoPolish] {
        let res = solve_hybrid(&inst, &HybridConfig { refinement, ..HybridConfig::default() }).unwrap();
        assert!(validate_tour(res.tour.order(), 52));
        assert!(res.length <= res.stats.stitched_length + 1e-9, "{refinement:?}");
    }
}
