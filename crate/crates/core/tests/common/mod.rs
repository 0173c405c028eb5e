#![allow(dead_code)]

use std::path::PathBuf;

use qaco::tsplib::DistanceMatrix;
use qaco::{parse_instance, Instance};

pub fn data_dir() -> PathBuf {
    std::env::var_os("QACO_TSPLIB_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/tsplib"))
}

pub fn load(name: &str) -> Instance {
    let path = data_dir().join(format!("{name}.tsp"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_instance(&text).unwrap()
}

pub const TSPLIB: [&str; 6] = ["ulysses16", "ulysses22", "bayg29", "eil51", "berlin52", "eil76"];

/// Shortest cycle by trying every permutation that starts at city 0.
pub fn exhaustive_optimum(d: &dyn Fn(usize, usize) -> f64, n: usize) -> f64 {
    fn rec(d: &dyn Fn(usize, usize) -> f64, n: usize, path: &mut Vec<usize>, used: &mut [bool], acc: f64, best: &mut f64) {
        let last = *path.last().unwrap();
        if path.len() == n {
            *best = best.min(acc + d(last, path[0]));
            return;
        }
        for c in 1..n {
            if !used[c] {
                used[c] = true;
                path.push(c);
                rec(d, n, path, used, acc + d(last, c), best);
                path.pop();
                used[c] = false;
            }
        }
    }
    if n < 2 {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    let mut used = vec![false; n];
    used[0] = true;
    rec(d, n, &mut vec![0], &mut used, 0.0, &mut best);
    best
}

/// Held-Karp dynamic program, exact for up to ~20 cities.
pub fn held_karp(d: &DistanceMatrix) -> f64 {
    let n = d.len();
    if n < 2 {
        return 0.0;
    }
    let m = n - 1;
    let full = 1usize << m;
    let mut dp = vec![f64::INFINITY; full * m];
    for j in 0..m {
        dp[(1 << j) * m + j] = d.get(0, j + 1);
    }
    for set in 1..full {
        for j in 0..m {
            let cur = dp[set * m + j];
            if set & (1 << j) == 0 || !cur.is_finite() {
                continue;
            }
            for k in 0..m {
                if set & (1 << k) == 0 {
                    let next = (set | (1 << k)) * m + k;
                    let cand = cur + d.get(j + 1, k + 1);
                    if cand < dp[next] {
                        dp[next] = cand;
                    }
                }
            }
        }
    }
    (0..m).map(|j| dp[(full - 1) * m + j] + d.get(j + 1, 0)).fold(f64::INFINITY, f64::min)
}

/// Allowed gap between an observed count and its expectation: 4σ plus one.
pub fn four_sigma(n: usize, p: f64) -> f64 {
    4.0 * (n as f64 * p * (1.0 - p)).sqrt() + 1.0
}
