mod common;

use common::{exhaustive_optimum, four_sigma};
use qaco::aco::{aco_solve, construct_tour, PheromoneMatrix};
use qaco::tsplib::EdgeWeightType;
use qaco::{gen_random_instance, rng, AcoParams, Instance, MetricMode};

const PLAIN: MetricMode = MetricMode::PlainEuclidean;

fn square() -> Instance {
    Instance::new("sq", EdgeWeightType::Euc2d, vec![(0.0, 0.0), (0.0, 1.0), (1.0, 1.0), (1.0, 0.0)]).unwrap()
}

#[test]
fn unit_square_found_within_fifty_iterations() {
    let inst = square();
    let params = AcoParams { iterations: 50, ..AcoParams::default() };
    let hits = (0..100u64)
        .filter(|&seed| (aco_solve(&inst, &[0, 1, 2, 3], &params, PLAIN, seed).unwrap().length - 4.0).abs() < 1e-9)
        .count();
    assert!(hits >= 99, "optimum in {hits}/100 seeds");
}

#[test]
fn seven_cities_match_exhaustive_optimum() {
    let params = AcoParams::default();
    let mut hits = 0;
    for seed in 0..100u64 {
        let inst = gen_random_instance(7, 1000 + seed, 100.0).unwrap();
        let d = |a, b| inst.distance(a, b, PLAIN).unwrap();
        let opt = exhaustive_optimum(&d, 7);
        let all: Vec<usize> = (0..7).collect();
        let r = aco_solve(&inst, &all, &params, PLAIN, seed).unwrap();
        assert!(r.length >= opt - 1e-9);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]), "history must not increase");
        if r.length - opt < 1e-9 {
            hits += 1;
        }
    }
    assert!(hits >= 90, "optimum in {hits}/100 instances");
}

#[test]
fn uninformed_construction_is_uniform_over_cycles() {
    const SHOTS: usize = 10_000;
    let inst = Instance::new("k4", EdgeWeightType::Euc2d, vec![(0.0, 0.0), (3.0, 0.5), (1.0, 4.0), (5.0, 5.0)]).unwrap();
    let dist = inst.distance_matrix(PLAIN);
    let tau = PheromoneMatrix::uniform(4, 1.0);
    let params = AcoParams { alpha: 0.0, beta: 0.0, q0: 0.0, ..AcoParams::default() };
    let mut r = rng::stream(8);
    let mut counts = [0usize; 3];
    for _ in 0..SHOTS {
        let t = construct_tour(&tau, &dist, &params, &mut r);
        let o = t.order();
        // The three undirected 4-cycles differ in which city sits opposite city 0.
        let at = o.iter().position(|&c| c == 0).unwrap();
        counts[o[(at + 2) % 4] - 1] += 1;
    }
    for c in counts {
        assert!((c as f64 - SHOTS as f64 / 3.0).abs() <= four_sigma(SHOTS, 1.0 / 3.0), "{counts:?}");
    }
}

#[test]
fn same_seed_same_result() {
    let inst = gen_random_instance(20, 3, 50.0).unwrap();
    let all: Vec<usize> = (0..20).collect();
    let params = AcoParams { iterations: 100, ..AcoParams::default() };
    let a = aco_solve(&inst, &all, &params, PLAIN, 9).unwrap();
    let b = aco_solve(&inst, &all, &params, PLAIN, 9).unwrap();
    assert_eq!(a, b);
}
