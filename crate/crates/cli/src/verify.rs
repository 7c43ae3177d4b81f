//! One-shot verification: the structural properties behind the greedy
//! guarantee, the delay-engine identities with a deliberately mutated
//! negative control, a queue-law simulation, and the outage/rate
//! cross-check. Every check prints a measured value; exit code 2 if
//! any fails.

use anyhow::Result;
use coopcache::{
    brute_force_optimal, cluster_delay, cpf_placement, critical_demand, geometric_fit,
    greedy_caching, matroid_properties_exhaustive, mode_arrival_rates, monotonicity_check,
    network_rates, outage_exact, pk_sojourn, simulate_cluster, supermodularity_check,
    traffic_demand, zipf_popularity, BaselinePolicy, ClusterRates, Discipline, Objective,
    ServiceModel, SimConfig, SystemParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub measured: String,
    pub requirement: &'static str,
}

#[derive(Serialize)]
pub struct Report {
    pub pass: bool,
    pub checks: Vec<Check>,
}

fn params_vi(beta: f64) -> SystemParams {
    SystemParams::builder()
        .users(25)
        .clusters(5)
        .library(108)
        .popular_files(60)
        .user_cache(4)
        .cluster_cache(20)
        .beta(beta)
        .mean_file_size(4e6)
        .arrival_rate_uniform(0.5)
        .d2d_rate(120e6)
        .cell_rate_avg(50e6)
        .backhaul_rate_avg(5e6)
        .build()
        .unwrap()
}

fn random_rates(rng: &mut impl Rng) -> ClusterRates {
    // service far enough above arrival that every draw is stable
    ClusterRates {
        lambda_lc: rng.gen_range(0.01..1.0),
        lambda_rc: rng.gen_range(0.01..1.0),
        lambda_bh: rng.gen_range(0.01..0.5),
        mu_lc: rng.gen_range(20.0..40.0),
        mu_rc: rng.gen_range(8.0..20.0),
        mu_bh: rng.gen_range(3.0..8.0),
    }
}

fn check_matroid() -> Check {
    let c = matroid_properties_exhaustive(2, 4, 2).unwrap();
    Check {
        name: "matroid-axioms",
        pass: c.downward_closed && c.exchange_holds,
        measured: format!(
            "{} subsets, {} independent, downward_closed={}, exchange={}",
            c.subsets, c.independent_sets, c.downward_closed, c.exchange_holds
        ),
        requirement: "both axioms hold on the exhaustive 2x4 ground set",
    }
}

fn chain_fixture() -> SystemParams {
    SystemParams::builder()
        .users(8)
        .clusters(4)
        .library(12)
        .popular_files(8)
        .user_cache(1)
        .cluster_cache(3)
        .beta(0.8)
        .mean_file_size(4e6)
        .arrival_rate_uniform(0.5)
        .d2d_rate(120e6)
        .cell_rate_avg(50e6)
        .backhaul_rate_avg(5e6)
        .build()
        .unwrap()
}

fn check_supermodularity() -> Check {
    let p = chain_fixture();
    let pop = zipf_popularity(&p).unwrap();
    let rep = supermodularity_check(
        &p,
        &pop,
        Objective::AvgDownloadTime,
        ServiceModel::FixedAverage,
        2_000,
        42,
    )
    .unwrap();
    Check {
        name: "supermodular-marginals",
        pass: rep.violation_count == 0,
        measured: format!(
            "{} sampled chain triples, {} evaluated, {} violations",
            rep.samples, rep.evaluated, rep.violation_count
        ),
        requirement: "zero violations for the download-time objective",
    }
}

fn check_monotonicity() -> Check {
    let p = chain_fixture();
    let pop = zipf_popularity(&p).unwrap();
    let rep = monotonicity_check(
        &p,
        &pop,
        Objective::AvgDownloadTime,
        ServiceModel::FixedAverage,
        2_000,
        43,
    )
    .unwrap();
    Check {
        name: "monotone-improvement",
        pass: rep.violation_count == 0,
        measured: format!(
            "{} sampled extensions, {} evaluated, {} violations",
            rep.samples, rep.evaluated, rep.violation_count
        ),
        requirement: "caching more never increases the objective",
    }
}

fn check_pk_identity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let r = random_rates(&mut rng);
        let a = cluster_delay(&r).unwrap();
        let b = pk_sojourn(&r).unwrap();
        worst = worst.max((a - b).abs() / a);
    }
    Check {
        name: "pk-identity",
        pass: worst <= 1e-12,
        measured: format!("max relative deviation {worst:.3e} over 200 rate vectors"),
        requirement: "the two delay arrangements agree to 1e-12",
    }
}

/// The identity comparison must be able to fail: a mutated residual
/// term (second moments scaled by 1.01) has to disagree with the
/// reference arrangement on every vector.
fn check_pk_mutation_detected() -> Check {
    fn mutated(r: &ClusterRates) -> f64 {
        let lambda = r.lambda_lc + r.lambda_rc + r.lambda_bh;
        let rho =
            r.lambda_lc / r.mu_lc + r.lambda_rc / r.mu_rc + r.lambda_bh / r.mu_bh;
        let second = r.lambda_lc / (r.mu_lc * r.mu_lc)
            + r.lambda_rc / (r.mu_rc * r.mu_rc)
            + r.lambda_bh / (r.mu_bh * r.mu_bh);
        rho / lambda + 1.01 * second / (1.0 - rho)
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut min_dev = f64::INFINITY;
    for _ in 0..200 {
        let r = random_rates(&mut rng);
        let b = pk_sojourn(&r).unwrap();
        min_dev = min_dev.min((mutated(&r) - b).abs() / b);
    }
    Check {
        name: "pk-mutation-detected",
        pass: min_dev > 1e-12,
        measured: format!("min relative deviation {min_dev:.3e} for the mutated formula"),
        requirement: "a 1% mutation never passes the identity tolerance",
    }
}

fn check_greedy_ratio() -> Check {
    let p = SystemParams::builder()
        .users(6)
        .clusters(2)
        .library(6)
        .popular_files(4)
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
    let ratio = (tr.initial_objective - tr.final_objective)
        / (tr.initial_objective - opt);
    let bound = 1.0 - (-1.0f64).exp();
    Check {
        name: "greedy-vs-optimum",
        pass: ratio >= bound,
        measured: format!(
            "reduction ratio {ratio:.4} on the 2-cluster 6-file instance (bound {bound:.4})"
        ),
        requirement: "greedy captures at least 1 - 1/e of the optimal reduction",
    }
}

fn check_geometric_queue() -> Check {
    let p = params_vi(0.5);
    let pop = zipf_popularity(&p).unwrap();
    let c = cpf_placement(&p, &pop);
    let rates = network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap();
    let r1 = rates[0];
    // rescale arrivals to utilization 0.5 for a fast, well-mixed run
    let scale = 0.5 / r1.rho();
    let r = ClusterRates {
        lambda_lc: r1.lambda_lc * scale,
        lambda_rc: r1.lambda_rc * scale,
        lambda_bh: r1.lambda_bh * scale,
        ..r1
    };
    let cfg = SimConfig {
        num_requests: 150_000,
        seed: 17,
        discipline: Discipline::ProcessorSharing,
        ..SimConfig::default()
    };
    let stats = simulate_cluster(&r, &cfg).unwrap();
    let d = traffic_demand(&r, &p);
    let zc = critical_demand(&d, &p);
    let fit = geometric_fit(&stats, d.total(), zc).unwrap();
    Check {
        name: "queue-length-law",
        pass: fit.relative_error <= 0.05,
        measured: format!(
            "mean queue {:.4} vs predicted {:.4} (rel {:.3}%, tv {:.4})",
            fit.empirical_mean,
            fit.predicted_mean,
            fit.relative_error * 100.0,
            fit.tv_distance
        ),
        requirement: "simulated mean within 5% of zeta/(zeta_c - zeta)",
    }
}

fn check_outage_cross() -> Check {
    let mut worst = 0.0f64;
    for beta in [0.0, 0.5, 1.3] {
        let p = params_vi(beta); // N = M * y = 20: canonical cache
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        let (lc, rc, _) = mode_arrival_rates(&c, &pop, &p, 1);
        let lambda = p.arrival_rates[0];
        let exact = outage_exact(&p, &pop);
        worst = worst
            .max((exact.p_no_outage_noncoop - lc / lambda).abs())
            .max((exact.p_no_outage_coop - (lc + rc) / lambda).abs());
    }
    Check {
        name: "outage-rate-crosscheck",
        pass: worst <= 1e-9,
        measured: format!("max deviation {worst:.3e} across beta in {{0, 0.5, 1.3}}"),
        requirement: "outage masses equal the mode shares of the rate engine",
    }
}

pub fn verify_suite() -> Result<Report> {
    let checks = vec![
        check_matroid(),
        check_supermodularity(),
        check_monotonicity(),
        check_pk_identity(),
        check_pk_mutation_detected(),
        check_greedy_ratio(),
        check_geometric_queue(),
        check_outage_cross(),
    ];
    let pass = checks.iter().all(|c| c.pass);
    Ok(Report { pass, checks })
}

impl Report {
    pub fn print_text(&self) {
        for c in &self.checks {
            println!(
                "[{}] {:<24} {}",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured
            );
        }
        let passed = self.checks.iter().filter(|c| c.pass).count();
        println!("verify: {passed}/{} checks passed", self.checks.len());
    }
}
