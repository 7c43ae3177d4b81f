//! Property-based checks of the structural invariants: popularity rows
//! are shifted permutations summing to one, mode splits conserve the
//! arrival rate, coverage can only grow under additions, the delay
//! formula's two arrangements agree, stability equals the demand
//! condition, and the capacity system is downward closed.

use proptest::prelude::*;

use coopcache::*;

/// Small but non-degenerate parameter sets; rates fixed to the
/// validated 120/50/5 Mbps ordering, loads kept below saturation.
fn arb_params() -> impl Strategy<Value = SystemParams> {
    (1usize..=4, 2usize..=16, 1usize..=3, 0.0f64..=1.5, 0.05f64..=0.4).prop_flat_map(
        |(clusters, library, user_cache, beta, rate)| {
            (0usize..=library, 0usize..=library).prop_map(move |(popular, n_cache)| {
                SystemParams::builder()
                    .users(3 * clusters)
                    .clusters(clusters)
                    .library(library)
                    .popular_files(popular)
                    .user_cache(user_cache)
                    .cluster_cache(n_cache)
                    .beta(beta)
                    .mean_file_size(4e6)
                    .arrival_rate_uniform(rate)
                    .d2d_rate(120e6)
                    .cell_rate_avg(50e6)
                    .backhaul_rate_avg(5e6)
                    .build()
                    .unwrap()
            })
        },
    )
}

/// A placement within capacity for the given parameters, plus the seed
/// that generated it.
fn arb_placement(p: &SystemParams, seed: u64) -> CachePlacement {
    random_placement(p, seed)
}

proptest! {
    #[test]
    fn ground_set_roundtrip(p in arb_params(), seed in any::<u64>()) {
        let c = arb_placement(&p, seed);
        let back = CachePlacement::from_ground_set(
            p.clusters, p.library, c.to_ground_set()).unwrap();
        prop_assert_eq!(c, back);
    }

    #[test]
    fn popularity_rows_are_shifted_permutations(p in arb_params()) {
        let pop = zipf_popularity(&p).unwrap();
        let mut base = pop.row(1);
        base.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for k in 1..=p.clusters {
            let row = pop.row(k);
            let sum: f64 = row.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-9, "row {k} sums to {sum}");
            let mut sorted = row;
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for (a, b) in sorted.iter().zip(&base) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            prop_assert_eq!(pop.rank(k, pop.most_popular_file(k)), 1);
        }
    }

    #[test]
    fn mode_rates_conserve_arrivals(p in arb_params(), seed in any::<u64>()) {
        let pop = zipf_popularity(&p).unwrap();
        let c = arb_placement(&p, seed);
        for (k, (lc, rc, bh)) in network_arrival_rates(&c, &pop, &p).unwrap()
            .into_iter().enumerate()
        {
            let lambda = p.arrival_rates[k];
            prop_assert!((lc + rc + bh - lambda).abs() <= 1e-12 * lambda.max(1.0));
            prop_assert!(lc >= 0.0 && rc >= 0.0 && bh >= 0.0);
        }
    }

    /// The relayed share counts exactly the files cached elsewhere but
    /// not locally: an independent indicator-product evaluation.
    #[test]
    fn remote_share_matches_indicator_form(p in arb_params(), seed in any::<u64>()) {
        let pop = zipf_popularity(&p).unwrap();
        let c = arb_placement(&p, seed);
        for k in 1..=p.clusters {
            let (_, rc, _) = mode_arrival_rates(&c, &pop, &p, k);
            let mut expect = 0.0;
            for f in 1..=p.library {
                let others = (1..=p.clusters).any(|j| j != k && c.is_cached(j, f));
                if !c.is_cached(k, f) && others {
                    expect += pop.prob(k, f);
                }
            }
            expect *= p.arrival_rates[k - 1];
            prop_assert!((rc - expect).abs() <= 1e-12 * expect.max(1.0));
        }
    }

    /// Caching one more file anywhere never sends more traffic to the
    /// backhaul and never shrinks any cluster's local share.
    #[test]
    fn additions_never_hurt_coverage(
        p in arb_params(),
        seed in any::<u64>(),
        pick in any::<u64>(),
    ) {
        let pop = zipf_popularity(&p).unwrap();
        let c = arb_placement(&p, seed);
        let uncached: Vec<_> = (1..=p.clusters)
            .flat_map(|k| (1..=p.library).map(move |f| (k, f)))
            .filter(|&(k, f)| !c.is_cached(k, f))
            .collect();
        if uncached.is_empty() {
            return Ok(()); // full placement, nothing to add
        }
        let (k, f) = uncached[pick as usize % uncached.len()];
        let mut bigger = c.clone();
        bigger.insert(k, f);
        let before = network_arrival_rates(&c, &pop, &p).unwrap();
        let after = network_arrival_rates(&bigger, &pop, &p).unwrap();
        for (b, a) in before.iter().zip(&after) {
            prop_assert!(a.2 <= b.2 + 1e-12, "backhaul grew: {b:?} -> {a:?}");
            prop_assert!(a.0 >= b.0 - 1e-12, "local shrank: {b:?} -> {a:?}");
        }
    }

    /// The closed-form split of the popular-files placement agrees
    /// with the generic engine on arbitrary parameters.
    #[test]
    fn popular_files_closed_form_matches_engine(p in arb_params()) {
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        let generic = network_arrival_rates(&c, &pop, &p).unwrap();
        for k in 1..=p.clusters {
            let (lc, rc, bh) = cpf_arrival_rates_closed_form(&p, &pop, k);
            let g = generic[k - 1];
            prop_assert!((lc - g.0).abs() < 1e-9, "k={k} local {lc} vs {}", g.0);
            prop_assert!((rc - g.1).abs() < 1e-9, "k={k} remote {rc} vs {}", g.1);
            prop_assert!((bh - g.2).abs() < 1e-9, "k={k} backhaul {bh} vs {}", g.2);
        }
    }

    /// Two arrangements of the sojourn-time formula agree on random
    /// stable rate vectors.
    #[test]
    fn delay_identity_on_random_vectors(
        mus in (0.5f64..40.0, 0.5f64..40.0, 0.5f64..40.0),
        shares in (0.01f64..1.0, 0.01f64..1.0, 0.01f64..1.0),
        rho in 0.05f64..0.95,
    ) {
        let total = shares.0 + shares.1 + shares.2;
        let r = ClusterRates {
            lambda_lc: rho * shares.0 / total * mus.0,
            lambda_rc: rho * shares.1 / total * mus.1,
            lambda_bh: rho * shares.2 / total * mus.2,
            mu_lc: mus.0,
            mu_rc: mus.1,
            mu_bh: mus.2,
        };
        let a = cluster_delay(&r).unwrap();
        let b = pk_sojourn(&r).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        prop_assert!((r.rho() - rho).abs() < 1e-9);
    }

    /// A queue is stable exactly when its offered demand is below the
    /// critical demand, and the demand ratio reproduces the intensity.
    #[test]
    fn stability_equals_demand_condition(p in arb_params(), seed in any::<u64>()) {
        let pop = zipf_popularity(&p).unwrap();
        let c = arb_placement(&p, seed);
        for r in network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap() {
            let rep = throughput_report(&r, &p);
            if r.lambda() > 0.0 {
                prop_assert_eq!(rep.stable, r.is_stable());
                prop_assert!((rep.zeta / rep.zeta_c - r.rho()).abs() < 1e-12);
            }
        }
    }

    /// Removing anything from a feasible placement leaves it feasible.
    #[test]
    fn capacity_is_downward_closed(
        p in arb_params(),
        seed in any::<u64>(),
        mask in any::<u64>(),
    ) {
        let c = arb_placement(&p, seed);
        prop_assert!(is_independent(&c, p.cluster_cache));
        let mut sub = c.clone();
        for (i, e) in c.to_ground_set().into_iter().enumerate() {
            if mask >> (i % 64) & 1 == 1 {
                sub.remove(e.cluster, e.file);
            }
        }
        prop_assert!(is_independent(&sub, p.cluster_cache));
    }

    /// Cooperation never makes the stationary delay worse, so the gain
    /// sits in [0, 1] whenever the baseline is stable.
    #[test]
    fn gain_is_bounded(p in arb_params(), seed in any::<u64>()) {
        let pop = zipf_popularity(&p).unwrap();
        let c = arb_placement(&p, seed);
        match cooperation_gain(&c, &pop, &p, ServiceModel::FixedAverage) {
            Ok(g) => {
                if !g.baseline_unstable {
                    prop_assert!(g.gain >= -1e-12 && g.gain <= 1.0, "gain {}", g.gain);
                    prop_assert!(g.delay_coop <= g.delay_noncoop.unwrap() + 1e-12);
                }
            }
            // the cooperative system itself can saturate at high load
            Err(Error::Unstable { .. }) | Err(Error::UnstableCluster { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    /// Greedy marginals under the download-time objective never grow
    /// from one step to the next: the decreasing-returns structure as
    /// seen by the algorithm itself.
    #[test]
    fn greedy_marginals_never_increase(p in arb_params()) {
        prop_assume!(p.cluster_cache > 0);
        let pop = zipf_popularity(&p).unwrap();
        let tr = greedy_caching(
            &p, &pop, Objective::AvgDownloadTime,
            ServiceModel::FixedAverage, BaselinePolicy::Strict,
        ).unwrap();
        for w in tr.steps.windows(2) {
            prop_assert!(
                w[1].reduction <= w[0].reduction + 1e-12,
                "marginal grew: {:?} -> {:?}", w[0], w[1]
            );
        }
        let claimed: f64 = tr.steps.iter().map(|s| s.reduction).sum();
        let actual = tr.initial_objective - tr.final_objective;
        prop_assert!((claimed - actual).abs() < 1e-9);
    }

    /// A fixed seed reproduces a simulation bit for bit.
    #[test]
    fn simulation_is_deterministic(seed in any::<u64>(), rho in 0.1f64..0.9) {
        let r = ClusterRates {
            lambda_lc: rho * 10.0, lambda_rc: 0.0, lambda_bh: 0.0,
            mu_lc: 10.0, mu_rc: 1.0, mu_bh: 1.0,
        };
        for discipline in [Discipline::Fifo, Discipline::ProcessorSharing] {
            let cfg = SimConfig {
                num_requests: 2_000, seed, discipline, ..SimConfig::default()
            };
            let a = simulate_cluster(&r, &cfg).unwrap();
            let b = simulate_cluster(&r, &cfg).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
