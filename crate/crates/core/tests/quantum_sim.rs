mod common;

use std::f64::consts::PI;

use common::four_sigma;
use qaco::quantum::{noisy_sample, noisy_sample_statevector, AngleVector, StateVector};
use qaco::rng;
use qaco::{BitString, NoiseKind, NoiseSpec};

/// Single-qubit real amplitudes `(a0, a1)`.
type Qubit = (f64, f64);

/// Outcome distribution over `2^n` basis states (qubit q = bit q) by
/// enumerating every noise trajectory of the product register.
fn enumerate(thetas: &[f64], noise: NoiseSpec) -> Vec<f64> {
    let r = noise.effective_rate();
    // Per-qubit list of (trajectory weight, final state, readout flipped).
    let per_qubit: Vec<Vec<(f64, Qubit, bool)>> = thetas
        .iter()
        .map(|&t| {
            let prepared = ((t / 2.0).cos(), (t / 2.0).sin());
            let mut out = Vec::new();
            match noise.kind {
                NoiseKind::None => out.push((1.0, prepared, false)),
                NoiseKind::BitFlip => {
                    for gate_flip in [false, true] {
                        for read_flip in [false, true] {
                            let w = (if gate_flip { r } else { 1.0 - r }) * (if read_flip { r } else { 1.0 - r });
                            let s = if gate_flip { (prepared.1, prepared.0) } else { prepared };
                            out.push((w, s, read_flip));
                        }
                    }
                }
                NoiseKind::ThermalRelaxation => {
                    for reset in [false, true] {
                        for phase in [false, true] {
                            let w = (if reset { r } else { 1.0 - r }) * (if phase { r / 2.0 } else { 1.0 - r / 2.0 });
                            let s = if reset { (1.0, 0.0) } else { prepared };
                            let s = if phase { (s.0, -s.1) } else { s };
                            out.push((w, s, false));
                        }
                    }
                }
            }
            out
        })
        .collect();

    let n = thetas.len();
    let mut probs = vec![0.0; 1 << n];
    let mut choice = vec![0usize; n];
    loop {
        let mut weight = 1.0;
        for q in 0..n {
            weight *= per_qubit[q][choice[q]].0;
        }
        for (idx, p) in probs.iter_mut().enumerate() {
            let mut amp_sq = 1.0;
            for q in 0..n {
                let (_, s, flipped) = per_qubit[q][choice[q]];
                let measured = (idx >> q) & 1 == 1;
                let pre = measured ^ flipped;
                amp_sq *= if pre { s.1 * s.1 } else { s.0 * s.0 };
            }
            *p += weight * amp_sq;
        }
        let mut q = 0;
        while q < n {
            choice[q] += 1;
            if choice[q] < per_qubit[q].len() {
                break;
            }
            choice[q] = 0;
            q += 1;
        }
        if q == n {
            break;
        }
    }
    probs
}

fn histogram(shots: usize, n: usize, mut draw: impl FnMut() -> BitString) -> Vec<usize> {
    let mut counts = vec![0; 1 << n];
    for _ in 0..shots {
        counts[draw().to_index() as usize] += 1;
    }
    counts
}

fn assert_matches(counts: &[usize], probs: &[f64], shots: usize, what: &str) {
    let total: f64 = probs.iter().sum();
    assert!((total - 1.0).abs() < 1e-12, "{what}: oracle sums to {total}");
    for (i, (&c, &p)) in counts.iter().zip(probs).enumerate() {
        let expected = shots as f64 * p;
        assert!(
            (c as f64 - expected).abs() <= four_sigma(shots, p),
            "{what}: outcome {i} seen {c} times, expected {expected:.1}"
        );
    }
}

fn noise_cases() -> Vec<NoiseSpec> {
    vec![
        NoiseSpec::none(),
        NoiseSpec::bit_flip(0.1).unwrap(),
        NoiseSpec::bit_flip(0.35).unwrap(),
        NoiseSpec::thermal(0.2).unwrap(),
        NoiseSpec::thermal(0.6).unwrap(),
    ]
}

#[test]
fn noisy_sampling_matches_trajectory_enumeration() {
    const SHOTS: usize = 50_000;
    let registers: [&[f64]; 3] = [&[1.1], &[0.7, 2.1], &[PI / 2.0, 0.3]];
    for (case, thetas) in registers.iter().enumerate() {
        let angles = AngleVector::new(thetas.to_vec()).unwrap();
        for (k, noise) in noise_cases().into_iter().enumerate() {
            let probs = enumerate(thetas, noise);
            let mut r = rng::substream(11, &[case as u64, k as u64]);
            let fast = histogram(SHOTS, thetas.len(), || noisy_sample(&angles, &noise, &mut r));
            assert_matches(&fast, &probs, SHOTS, &format!("product path {thetas:?} {noise:?}"));
            let mut r = rng::substream(12, &[case as u64, k as u64]);
            let full = histogram(SHOTS, thetas.len(), || noisy_sample_statevector(&angles, &noise, &mut r));
            assert_matches(&full, &probs, SHOTS, &format!("statevector path {thetas:?} {noise:?}"));
        }
    }
}

#[test]
fn ry_amplitudes_follow_closed_form() {
    let thetas = [0.0, 0.4, 1.3, PI / 2.0, 2.9, PI];
    for (a, &t0) in thetas.iter().enumerate() {
        let t1 = thetas[(a + 2) % thetas.len()];
        let s = StateVector::new(2).unwrap().apply_ry(0, t0).unwrap().apply_ry(1, t1).unwrap();
        let p = s.probabilities();
        let (c0, s0) = ((t0 / 2.0).cos().powi(2), (t0 / 2.0).sin().powi(2));
        let (c1, s1) = ((t1 / 2.0).cos().powi(2), (t1 / 2.0).sin().powi(2));
        let want = [c0 * c1, s0 * c1, c0 * s1, s0 * s1];
        for i in 0..4 {
            assert!((p[i] - want[i]).abs() < 1e-10, "theta=({t0},{t1}) outcome {i}");
        }
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

#[test]
fn gates_preserve_norm_and_invert() {
    let mut r = rng::stream(5);
    use rand::Rng;
    let mut s = StateVector::new(4).unwrap();
    let mut applied = Vec::new();
    for _ in 0..200 {
        let q = r.gen_range(0..4);
        let t: f64 = r.gen_range(-PI..PI);
        s = match r.gen_range(0..3) {
            0 => {
                applied.push((0, q, t));
                s.apply_ry(q, t).unwrap()
            }
            1 => {
                applied.push((1, q, 0.0));
                s.apply_x(q).unwrap()
            }
            _ => {
                applied.push((2, q, 0.0));
                s.apply_z(q).unwrap()
            }
        };
        assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
    for &(g, q, t) in applied.iter().rev() {
        s = match g {
            0 => s.apply_ry(q, -t).unwrap(),
            1 => s.apply_x(q).unwrap(),
            _ => s.apply_z(q).unwrap(),
        };
    }
    assert!((s.amplitudes()[0].re - 1.0).abs() < 1e-10);
    assert!(s.amplitudes()[1..].iter().all(|a| a.norm() < 1e-10));
}

#[test]
fn born_rule_sampling_on_three_qubits() {
    const SHOTS: usize = 50_000;
    let state = StateVector::new(3).unwrap().apply_ry(0, 0.9).unwrap().apply_ry(1, 2.2).unwrap().apply_ry(2, 1.6).unwrap();
    let probs = state.probabilities();
    let mut r = rng::stream(21);
    let counts = histogram(SHOTS, 3, || state.clone().measure_all(&mut r));
    assert_matches(&counts, &probs, SHOTS, "three-qubit Born rule");
}

#[test]
fn total_variation_grows_with_bit_flip_rate() {
    let thetas = [0.2, 2.8];
    let ideal = enumerate(&thetas, NoiseSpec::none());
    let tv = |p: &[f64]| p.iter().zip(&ideal).map(|(a, b)| (a - b).abs()).sum::<f64>() / 2.0;
    let mut last = 0.0;
    for rate in [0.0, 0.01, 0.05, 0.1, 0.2, 0.3] {
        let d = tv(&enumerate(&thetas, NoiseSpec::bit_flip(rate).unwrap()));
        assert!(d + 1e-12 >= last, "TV fell from {last} to {d} at rate {rate}");
        last = d;
    }
}
