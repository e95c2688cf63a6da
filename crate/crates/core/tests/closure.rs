//! Simulated measurement records against the analytic transition matrices.

use std::f64::consts::PI;

use qmarkov::markov::{simulate_chain, Distribution, RngState, StochasticMatrix, Trajectory};
use qmarkov::qubit::{qubit_transition_matrix, simulate_register, QubitChainSpec};
use qmarkov::spin::{coin_toss_stream, simulate_measurements, spin_transition_matrix, QuantumState, SpinChainSpec};
use qmarkov::stats::{bit_summary, compare_rows, transition_counts, transition_counts_by_parity, TransitionCounts};
use qmarkov::HalfInt;

const STEPS: usize = 1_000_000;
const TV_LIMIT: f64 = 0.02;
const MIN_VISITS: u64 = 10_000;

fn max_tv(counts: &TransitionCounts, theory: &StochasticMatrix) -> f64 {
    compare_rows(counts, theory, TV_LIMIT)
        .unwrap()
        .iter()
        .filter(|r| r.visits >= MIN_VISITS)
        .map(|r| r.tv)
        .fold(0.0, f64::max)
}

fn spin_run(s: HalfInt, beta: f64, steps: usize, seed: u64) -> (Trajectory, StochasticMatrix) {
    let spec = SpinChainSpec::new(s, beta).unwrap();
    let psi = QuantumState::basis(s, s).unwrap();
    let (t, _) = simulate_measurements(&spec, &psi, steps, &mut RngState::from_seed(seed)).unwrap();
    (t, spin_transition_matrix(&spec).unwrap())
}

#[test]
fn spin_measurements_follow_the_matrix() {
    for (k, twice_s) in [1, 2, 3].into_iter().enumerate() {
        for (l, beta) in [PI / 6.0, PI / 2.0, 2.5].into_iter().enumerate() {
            let seed = 100 + 10 * k as u64 + l as u64;
            let (t, p) = spin_run(HalfInt::from_twice(twice_s), beta, STEPS, seed);
            let counts = transition_counts(&t);
            let rows = compare_rows(&counts, &p, TV_LIMIT).unwrap();
            assert!(rows.iter().any(|r| r.visits >= MIN_VISITS));
            let worst = max_tv(&counts, &p);
            assert!(worst < TV_LIMIT, "2s = {twice_s}, beta = {beta}: TV {worst}");
        }
    }
}

#[test]
fn even_and_odd_steps_share_one_matrix() {
    // z-to-n and n-to-z transitions are tallied separately
    let (t, p) = spin_run(HalfInt::from_int(1), 1.0, STEPS, 7);
    for odd in [false, true] {
        let worst = max_tv(&transition_counts_by_parity(&t, odd), &p);
        assert!(worst < TV_LIMIT, "odd = {odd}: TV {worst}");
    }
}

#[test]
fn register_readouts_follow_the_binomial_matrix() {
    let spec = QubitChainSpec::new(8, 1.0).unwrap();
    let q = qubit_transition_matrix(&spec).unwrap();
    let t = simulate_register(&spec, HalfInt::ZERO, STEPS, &mut RngState::from_seed(8)).unwrap();
    let counts = transition_counts(&t);
    let visited = (0..q.dim()).filter(|&i| counts.visits(i) >= MIN_VISITS).count();
    assert!(visited >= 5, "only {visited} rows reached {MIN_VISITS} visits");
    let worst = max_tv(&counts, &q);
    assert!(worst < TV_LIMIT, "TV {worst}");
}

#[test]
fn longer_runs_land_closer() {
    let chains = [
        spin_transition_matrix(&SpinChainSpec::new(HalfInt::HALF, PI / 2.0).unwrap()).unwrap(),
        spin_transition_matrix(&SpinChainSpec::new(HalfInt::from_int(1), 1.0).unwrap()).unwrap(),
        qubit_transition_matrix(&QubitChainSpec::new(4, 1.0).unwrap()).unwrap(),
    ];
    for (k, p) in chains.iter().enumerate() {
        let start = Distribution::point_mass(p.labels().to_vec(), 0).unwrap();
        let tv_at = |steps| {
            let t = simulate_chain(p, &start, steps, &mut RngState::from_seed(500 + k as u64)).unwrap();
            compare_rows(&transition_counts(&t), p, TV_LIMIT).unwrap().iter().map(|r| r.tv).fold(0.0, f64::max)
        };
        let (short, long) = (tv_at(10_000), tv_at(STEPS));
        assert!(long < short, "chain {k}: {long} at 1e6 steps vs {short} at 1e4");
    }
}

#[test]
fn coin_stream_passes_fair_coin_checks() {
    for seed in [42, 43, 44] {
        let bits = coin_toss_stream(STEPS, &mut RngState::from_seed(seed));
        let s = bit_summary(&bits).unwrap();
        assert!((s.mean - 0.5).abs() < 0.002, "seed {seed}: mean {}", s.mean);
        assert!(s.lag1_autocorrelation.abs() < 0.003, "seed {seed}: autocorrelation {}", s.lag1_autocorrelation);
        assert!(s.chi_square < s.critical_999, "seed {seed}: chi-square {}", s.chi_square);
    }
}

#[test]
fn independent_streams_pool_cleanly() {
    let spec = SpinChainSpec::new(HalfInt::from_twice(3), 2.5).unwrap();
    let p = spin_transition_matrix(&spec).unwrap();
    let psi = QuantumState::basis(spec.s, HalfInt::HALF).unwrap();
    let mut pooled = TransitionCounts::empty(p.labels().to_vec());
    for i in 0..4 {
        let (t, _) = simulate_measurements(&spec, &psi, 250_000, &mut RngState::stream(9, i)).unwrap();
        assert_eq!(t.stream, i);
        pooled.merge(&transition_counts(&t)).unwrap();
    }
    assert_eq!(pooled.total(), 1_000_000);
    let worst = max_tv(&pooled, &p);
    assert!(worst < TV_LIMIT, "TV {worst}");
}

#[test]
fn register_steps_are_direction_symmetric() {
    let spec = QubitChainSpec::new(6, 1.3).unwrap();
    let q = qubit_transition_matrix(&spec).unwrap();
    let t = simulate_register(&spec, HalfInt::from_int(3), STEPS, &mut RngState::from_seed(66)).unwrap();
    for odd in [false, true] {
        let worst = max_tv(&transition_counts_by_parity(&t, odd), &q);
        assert!(worst < TV_LIMIT, "odd = {odd}: TV {worst}");
    }
}

#[test]
fn single_qubit_register_tosses_a_fair_coin() {
    let spec = QubitChainSpec::new(1, PI / 2.0).unwrap();
    let t = simulate_register(&spec, HalfInt::HALF, STEPS, &mut RngState::from_seed(12)).unwrap();
    let uniform = StochasticMatrix::new(spec.labels(), vec![vec![0.5, 0.5]; 2]).unwrap();
    let worst = max_tv(&transition_counts(&t), &uniform);
    assert!(worst < 0.01, "TV {worst}");
}
