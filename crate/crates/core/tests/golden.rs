//! Deterministic cross-module checks: limit placements against
//! textbook closed forms, the simulator against both, the outage view
//! against the rate engine, and one negative control proving the
//! identity comparisons can actually fail.

use coopcache::*;

fn params(beta: f64, n_cache: usize) -> SystemParams {
    SystemParams::builder()
        .users(25)
        .clusters(5)
        .library(108)
        .popular_files(60)
        .user_cache(4)
        .cluster_cache(n_cache)
        .beta(beta)
        .mean_file_size(4e6)
        .arrival_rate_uniform(0.5)
        .d2d_rate(120e6)
        .cell_rate_avg(50e6)
        .backhaul_rate_avg(5e6)
        .build()
        .unwrap()
}

/// Nothing cached: every cluster is a pure backhaul M/M/1 queue with
/// mu = 1.25/s, so the delay is 1/(1.25 - 0.5) = 4/3 s, and the
/// simulator agrees.
#[test]
fn empty_placement_is_backhaul_mm1() {
    let p = params(0.5, 20);
    let pop = zipf_popularity(&p).unwrap();
    let c = CachePlacement::empty(p.clusters, p.library);
    let rep = delay_report(&network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap())
        .unwrap();
    let expect = 1.0 / (1.25 - 0.5);
    for d in &rep.per_cluster {
        assert!((d - expect).abs() < 1e-12 * expect, "{d} vs {expect}");
    }
    let cfg = SimConfig { num_requests: 60_000, seed: 5, ..SimConfig::default() };
    let sim = simulate_network(&c, &pop, &p, ServiceModel::FixedAverage, &cfg).unwrap();
    let rel = (sim.network_delay - expect).abs() / expect;
    assert!(rel < 0.03, "simulated {} vs {expect}, rel {rel}", sim.network_delay);
}

/// Everything cached: pure local service at mu = 30/s, delay
/// 1/(30 - 0.5), zero outage, critical demand at the full local rate.
#[test]
fn full_placement_is_local_mm1() {
    let p = params(0.5, 108);
    let pop = zipf_popularity(&p).unwrap();
    let c = CachePlacement::full(p.clusters, p.library);
    let rates = network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap();
    let rep = delay_report(&rates).unwrap();
    let expect = 1.0 / (30.0 - 0.5);
    assert!((rep.network - expect).abs() < 1e-12 * expect);
    let t = throughput_report(&rates[0], &p);
    assert!((t.zeta_c - p.d2d_rate * rates[0].lambda() * 4e6 / (rates[0].lambda() * 4e6)).abs() < 1e-6);
}

/// Random placements cache exactly min(N, m) distinct files per
/// cluster, and across seeds every file is included at the binomial
/// frequency N/m (4 sigma band).
#[test]
fn random_placement_statistics() {
    let p = params(0.5, 20);
    let trials = 400;
    let mut hits = 0u32;
    for seed in 0..trials {
        let c = random_placement(&p, seed as u64);
        for k in 1..=p.clusters {
            assert_eq!(c.cluster_load(k), 20);
        }
        assert_ne!(random_placement(&p, seed as u64 + 10_000), c, "distinct seeds collide");
        if c.is_cached(1, 1) {
            hits += 1;
        }
    }
    let q = 20.0 / 108.0;
    let mean = trials as f64 * q;
    let sigma = (trials as f64 * q * (1.0 - q)).sqrt();
    assert!(
        (hits as f64 - mean).abs() <= 4.0 * sigma,
        "file 1 cached {hits} times, expected {mean:.1} +- {:.1}",
        4.0 * sigma
    );
}

/// With identical popularity in every cluster (no shift), duplicating
/// the head like the popular-files scheme is strictly worse than the
/// exhaustive optimum, which diversifies across clusters.
#[test]
fn brute_force_beats_duplication_when_rankings_coincide() {
    let p = SystemParams::builder()
        .users(6)
        .clusters(2)
        .library(6)
        .popular_files(0) // no shift: both clusters rank files identically
        .user_cache(1)
        .cluster_cache(2)
        .beta(1.2)
        .mean_file_size(4e6)
        .arrival_rate_uniform(0.5)
        .d2d_rate(120e6)
        .cell_rate_avg(50e6)
        .backhaul_rate_avg(5e6)
        .build()
        .unwrap();
    let pop = zipf_popularity(&p).unwrap();
    assert_eq!(pop.most_popular_file(1), pop.most_popular_file(2));
    let cpf = cpf_placement(&p, &pop);
    let d_cpf = avg_download_time(&cpf, &pop, &p).unwrap();
    let (best, d_opt) = brute_force_optimal(
        &p,
        &pop,
        Objective::AvgDownloadTime,
        ServiceModel::FixedAverage,
    )
    .unwrap();
    assert!(d_opt < d_cpf - 1e-12, "optimum {d_opt} should beat duplication {d_cpf}");
    // the optimum diversifies completely: no file cached twice, the
    // four cache slots cover the four most popular files between them
    let cached: Vec<usize> = (1..=p.library)
        .filter(|&f| best.is_cached(1, f) || best.is_cached(2, f))
        .collect();
    assert_eq!(cached, vec![1, 2, 3, 4]);
    assert!((1..=p.library).all(|f| !(best.is_cached(1, f) && best.is_cached(2, f))));
}

/// Negative control: the two delay arrangements are separate code
/// paths, and a 1% perturbation of one input makes them disagree far
/// beyond the identity tolerance.
#[test]
fn delay_identity_has_teeth() {
    let r = ClusterRates {
        lambda_lc: 0.8,
        lambda_rc: 0.6,
        lambda_bh: 0.1,
        mu_lc: 30.0,
        mu_rc: 12.5,
        mu_bh: 1.25,
    };
    let a = cluster_delay(&r).unwrap();
    let b = pk_sojourn(&r).unwrap();
    assert!((a - b).abs() <= 1e-12 * a);
    let tampered = ClusterRates { lambda_bh: r.lambda_bh * 1.01, ..r };
    let c = cluster_delay(&tampered).unwrap();
    assert!(
        (c - b).abs() > 1e-6 * b,
        "perturbed delay {c} indistinguishable from {b}"
    );
}

/// The outage view and the rate engine compute the same union masses:
/// under the canonical cache of M*y ranks per cluster, no-outage
/// probabilities equal the mode shares of cluster 1.
#[test]
fn outage_matches_mode_shares() {
    for beta in [0.0, 0.5, 1.0, 1.3] {
        let p = params(beta, 20); // N = M*y = 20
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        let (lc, rc, _) = mode_arrival_rates(&c, &pop, &p, 1);
        let lambda = p.arrival_rates[0];
        let exact = outage_exact(&p, &pop);
        assert!(
            (exact.p_no_outage_noncoop - lc / lambda).abs() < 1e-9,
            "beta={beta}: noncoop {} vs local share {}",
            exact.p_no_outage_noncoop,
            lc / lambda
        );
        assert!(
            (exact.p_no_outage_coop - (lc + rc) / lambda).abs() < 1e-9,
            "beta={beta}: coop {} vs coverage share {}",
            exact.p_no_outage_coop,
            (lc + rc) / lambda
        );
    }
}

/// The no-queueing objective equals the mode-weighted transfer time
/// computed straight from the arrival split.
#[test]
fn download_time_is_mode_weighted_transfer_time() {
    let p = params(0.7, 24);
    let pop = zipf_popularity(&p).unwrap();
    let c = random_placement(&p, 9);
    let got = avg_download_time(&c, &pop, &p).unwrap();
    let s = p.mean_file_size;
    let taus = [s / p.d2d_rate, s / p.cell_rate_avg, s / p.backhaul_rate_avg];
    let mut expect = 0.0;
    for k in 1..=p.clusters {
        let (lc, rc, bh) = mode_arrival_rates(&c, &pop, &p, k);
        expect += lc * taus[0] + rc * taus[1] + bh * taus[2];
    }
    expect /= p.total_arrival_rate();
    assert!((got - expect).abs() < 1e-12, "{got} vs {expect}");
}

/// At uniform popularity the popular-files placement still caches each
/// cluster's shifted range, keeping the closed-form split valid.
#[test]
fn popular_files_range_is_stable_under_uniform_popularity() {
    let p = params(0.0, 20);
    let pop = zipf_popularity(&p).unwrap();
    let c = cpf_placement(&p, &pop);
    for k in 1..=p.clusters {
        let s = p.popularity_shift(k);
        for r in 0..20 {
            let f = (s + r) % p.library + 1;
            assert!(c.is_cached(k, f), "cluster {k} misses file {f}");
        }
    }
}

/// One seed, one report: repeated network simulations are identical,
/// and different seeds differ.
#[test]
fn network_simulation_reproducible() {
    let p = params(0.5, 20);
    let pop = zipf_popularity(&p).unwrap();
    let c = cpf_placement(&p, &pop);
    let cfg = SimConfig { num_requests: 20_000, seed: 123, ..SimConfig::default() };
    let a = simulate_network(&c, &pop, &p, ServiceModel::FixedAverage, &cfg).unwrap();
    let b = simulate_network(&c, &pop, &p, ServiceModel::FixedAverage, &cfg).unwrap();
    assert_eq!(a, b);
    let cfg2 = SimConfig { seed: 124, ..cfg };
    let d = simulate_network(&c, &pop, &p, ServiceModel::FixedAverage, &cfg2).unwrap();
    assert_ne!(a.network_delay, d.network_delay);
}

/// In a single cluster the greedy placement reaches the exhaustive
/// optimum exactly: with one cluster the objective is modular, every
/// step's best pick is globally safe.
#[test]
fn greedy_is_optimal_for_single_cluster() {
    for beta in [0.3, 0.9] {
        let p = SystemParams::builder()
            .users(3)
            .clusters(1)
            .library(8)
            .popular_files(8)
            .user_cache(1)
            .cluster_cache(3)
            .beta(beta)
            .mean_file_size(4e6)
            .arrival_rate_uniform(0.5)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .build()
            .unwrap();
        let pop = zipf_popularity(&p).unwrap();
        let tr = greedy_caching(
            &p,
            &pop,
            Objective::AvgDownloadTime,
            ServiceModel::FixedAverage,
            BaselinePolicy::Strict,
        )
        .unwrap();
        let (_, opt) = brute_force_optimal(
            &p,
            &pop,
            Objective::AvgDownloadTime,
            ServiceModel::FixedAverage,
        )
        .unwrap();
        assert!((tr.final_objective - opt).abs() < 1e-12, "beta={beta}");
    }
}
