//! Per-mode arrival and service rates of the cluster queues.
//!
//! A request in cluster k is served in exactly one of three modes,
//! always the fastest available one:
//!
//! * local: the file sits in cluster k's own cache and travels one
//!   device-to-device hop;
//! * remote: some other cluster caches it and the base station relays
//!   it over the cellular link;
//! * backhaul: nobody caches it and it comes from the core network.
//!
//! Splitting cluster k's Poisson request stream over the file
//! popularity gives the per-mode arrival rates; pairing them with the
//! mode service rates gives the load of the cluster's serving queue.
//! The three masses partition the library, so the mode rates always
//! sum back to lambda_k exactly.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::placement::CachePlacement;
use crate::popularity::PopularityMatrix;

/// How the shared cellular and backhaul links enter the service rates.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum ServiceModel {
    /// Effective per-cluster average rates, used directly. The default.
    #[default]
    FixedAverage,
    /// Aggregate link rates divided by the mean number of clusters
    /// using them concurrently (one fixed-point pass, no iteration).
    SharedByMean,
}

/// Arrival and service rates of one cluster's three-mode queue.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ClusterRates {
    pub lambda_lc: f64,
    pub lambda_rc: f64,
    pub lambda_bh: f64,
    pub mu_lc: f64,
    pub mu_rc: f64,
    pub mu_bh: f64,
}

impl ClusterRates {
    /// Total arrival rate of the cluster.
    pub fn lambda(&self) -> f64 {
        self.lambda_lc + self.lambda_rc + self.lambda_bh
    }

    /// Traffic intensity rho = sum of lambda_j / mu_j over the modes.
    pub fn rho(&self) -> f64 {
        self.lambda_lc / self.mu_lc + self.lambda_rc / self.mu_rc + self.lambda_bh / self.mu_bh
    }

    pub fn is_stable(&self) -> bool {
        self.rho() < 1.0
    }

    /// Mode probabilities (local, remote, backhaul); zero lambda gives zeros.
    pub fn mode_split(&self) -> [f64; 3] {
        let l = self.lambda();
        if l <= 0.0 {
            [0.0; 3]
        } else {
            [self.lambda_lc / l, self.lambda_rc / l, self.lambda_bh / l]
        }
    }

    pub fn arrivals(&self) -> [f64; 3] {
        [self.lambda_lc, self.lambda_rc, self.lambda_bh]
    }

    pub fn services(&self) -> [f64; 3] {
        [self.mu_lc, self.mu_rc, self.mu_bh]
    }
}

/// Mean numbers of clusters concurrently holding the cellular relay
/// and the backhaul.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SharingCounts {
    pub cellular: f64,
    pub backhaul: f64,
}

/// Per-mode arrival rates (local, remote, backhaul) of cluster k.
pub fn mode_arrival_rates(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    k: usize,
) -> (f64, f64, f64) {
    let replicas = c.replica_counts();
    split_cluster(c, pop, params, k, &replicas)
}

fn split_cluster(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    k: usize,
    replicas: &[usize],
) -> (f64, f64, f64) {
    let lambda = params.arrival_rates[k - 1];
    let (mut lc, mut rc, mut bh) = (0.0, 0.0, 0.0);
    for f in 1..=params.library {
        let p = pop.prob(k, f);
        if c.is_cached(k, f) {
            lc += p;
        } else if replicas[f - 1] > 0 {
            rc += p;
        } else {
            bh += p;
        }
    }
    (lambda * lc, lambda * rc, lambda * bh)
}

/// Per-mode arrival rates for every cluster, one replica pass.
pub fn network_arrival_rates(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
) -> Result<Vec<(f64, f64, f64)>> {
    if c.clusters() != params.clusters || c.library() != params.library {
        return Err(Error::DimensionMismatch(format!(
            "placement is {} x {}, parameters say {} x {}",
            c.clusters(),
            c.library(),
            params.clusters,
            params.library
        )));
    }
    let replicas = c.replica_counts();
    Ok((1..=params.clusters).map(|k| split_cluster(c, pop, params, k, &replicas)).collect())
}

/// Closed-form per-mode arrival rates of cluster k when every cluster
/// j caches its own top-N range s_j+1 ..= s_j+N (the popular-files
/// scheme), without building the placement.
///
/// The local mass is the first min(N, m) ranks of cluster k's own
/// ordering. For the remote mass the union of all cached ranges is
/// accumulated by walking the ranges in sorted order and counting only
/// the newly covered segment of each (a running end cursor keeps
/// segments disjoint; ranges wrapping past the library end split in
/// two), then the local mass is subtracted. Nothing is double-counted
/// and the backhaul mass is the complement of the union.
pub fn cpf_arrival_rates_closed_form(
    params: &SystemParams,
    pop: &PopularityMatrix,
    k: usize,
) -> (f64, f64, f64) {
    let m = params.library;
    let n = params.cluster_cache.min(m);
    let lambda = params.arrival_rates[k - 1];
    if n == 0 {
        return (0.0, 0.0, lambda);
    }
    let local = pop.rank_mass(1, n);
    if n == m {
        return (lambda, 0.0, 0.0);
    }

    let mut segments: Vec<(usize, usize)> = Vec::with_capacity(2 * params.clusters);
    for j in 1..=params.clusters {
        let s_j = params.popularity_shift(j);
        if s_j + n <= m {
            segments.push((s_j + 1, s_j + n));
        } else {
            segments.push((s_j + 1, m));
            segments.push((1, s_j + n - m));
        }
    }
    segments.sort_unstable();

    let mut covered_end = 0usize;
    let mut union = 0.0;
    for (lo, hi) in segments {
        let lo = lo.max(covered_end + 1);
        if lo <= hi {
            union += pop.file_mass(k, lo, hi);
            covered_end = hi;
        }
    }
    let remote = (union - local).max(0.0);
    let backhaul = (1.0 - union).max(0.0);
    (lambda * local, lambda * remote, lambda * backhaul)
}

/// Mean concurrent users of the shared links, from per-cluster
/// arrival triples: each count is the total mode rate over the mean
/// cluster arrival rate. Errors when no requests arrive at all.
pub fn mean_sharing_counts(
    params: &SystemParams,
    arrivals: &[(f64, f64, f64)],
) -> Result<SharingCounts> {
    let total: f64 = params.total_arrival_rate();
    if total <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let mean = total / params.clusters as f64;
    let rc: f64 = arrivals.iter().map(|a| a.1).sum();
    let bh: f64 = arrivals.iter().map(|a| a.2).sum();
    Ok(SharingCounts { cellular: rc / mean, backhaul: bh / mean })
}

/// Service rates (mu_lc, mu_rc, mu_bh) in requests per second.
///
/// Local service is always the in-cluster rate over the mean file
/// size. Under `SharedByMean` the aggregate cellular and backhaul
/// rates are divided by the mean sharing counts; a divisor below one
/// is clamped to one, since a single transfer cannot run faster than
/// the whole aggregate link.
pub fn service_rates(
    params: &SystemParams,
    model: ServiceModel,
    sharing: &SharingCounts,
) -> (f64, f64, f64) {
    let s = params.mean_file_size;
    let mu_lc = params.d2d_rate / s;
    match model {
        ServiceModel::FixedAverage => {
            (mu_lc, params.cell_rate_avg / s, params.backhaul_rate_avg / s)
        }
        ServiceModel::SharedByMean => {
            let na = sharing.cellular.max(1.0);
            let nb = sharing.backhaul.max(1.0);
            (mu_lc, params.cell_rate / (s * na), params.backhaul_rate_avg / (s * nb))
        }
    }
}

/// Full pipeline for a placement: arrivals, sharing means, service
/// rates, one [`ClusterRates`] per cluster.
pub fn network_rates(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<Vec<ClusterRates>> {
    let arrivals = network_arrival_rates(c, pop, params)?;
    rates_from_arrivals(&arrivals, params, model)
}

/// The same system without inter-cluster cooperation: requests that
/// would have been relayed from another cluster's cache go to the
/// backhaul instead. Local caching is kept.
pub fn noncoop_network_rates(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<Vec<ClusterRates>> {
    let arrivals: Vec<(f64, f64, f64)> = network_arrival_rates(c, pop, params)?
        .into_iter()
        .map(|(lc, rc, bh)| (lc, 0.0, bh + rc))
        .collect();
    rates_from_arrivals(&arrivals, params, model)
}

/// Pairs arrival triples with service rates under the given model.
pub fn rates_from_arrivals(
    arrivals: &[(f64, f64, f64)],
    params: &SystemParams,
    model: ServiceModel,
) -> Result<Vec<ClusterRates>> {
    if arrivals.len() != params.clusters {
        return Err(Error::DimensionMismatch(format!(
            "{} arrival triples for {} clusters",
            arrivals.len(),
            params.clusters
        )));
    }
    let (mu_lc, mu_rc, mu_bh) = match model {
        ServiceModel::FixedAverage => {
            service_rates(params, model, &SharingCounts { cellular: 0.0, backhaul: 0.0 })
        }
        ServiceModel::SharedByMean => {
            let sharing = mean_sharing_counts(params, arrivals)?;
            service_rates(params, model, &sharing)
        }
    };
    Ok(arrivals
        .iter()
        .map(|&(lambda_lc, lambda_rc, lambda_bh)| ClusterRates {
            lambda_lc,
            lambda_rc,
            lambda_bh,
            mu_lc,
            mu_rc,
            mu_bh,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf_popularity;
    use crate::schemes::cpf_placement;

    fn params(
        clusters: usize,
        library: usize,
        popular: usize,
        cache: usize,
        beta: f64,
    ) -> SystemParams {
        SystemParams::builder()
            .users(5 * clusters)
            .clusters(clusters)
            .library(library)
            .popular_files(popular)
            .user_cache(4)
            .cluster_cache(cache)
            .beta(beta)
            .mean_file_size(4e6)
            .arrival_rate_uniform(0.5)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .build()
            .unwrap()
    }

    #[test]
    fn modes_partition_the_arrival_rate() {
        let p = params(5, 108, 60, 20, 0.5);
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        for (k, &(lc, rc, bh)) in
            network_arrival_rates(&c, &pop, &p).unwrap().iter().enumerate()
        {
            let sum = lc + rc + bh;
            assert!((sum - p.arrival_rates[k]).abs() < 1e-12, "cluster {}", k + 1);
        }
    }

    /// Section-style sanity point: mu = (30, 12.5, 1.25)/s for 4 Mbit
    /// files over 120/50/5 Mbps links.
    #[test]
    fn fixed_average_service_rates() {
        let p = params(5, 108, 60, 20, 0.5);
        let sharing = SharingCounts { cellular: 0.0, backhaul: 0.0 };
        let (lc, rc, bh) = service_rates(&p, ServiceModel::FixedAverage, &sharing);
        assert_eq!((lc, rc, bh), (30.0, 12.5, 1.25));
    }

    /// Closed form against the generic engine on the canonical
    /// placement, across cluster counts, library sizes and exponents.
    #[test]
    fn closed_form_matches_generic_engine() {
        for clusters in [1usize, 2, 3, 5, 8] {
            for (library, popular) in [(12, 7), (60, 60), (108, 60), (200, 111)] {
                for cache in [1usize, 4, 20, 300] {
                    for beta in [0.0, 0.5, 1.0, 1.7] {
                        let p = params(clusters, library, popular, cache, beta);
                        let pop = zipf_popularity(&p).unwrap();
                        let c = cpf_placement(&p, &pop);
                        let generic = network_arrival_rates(&c, &pop, &p).unwrap();
                        for k in 1..=clusters {
                            let closed = cpf_arrival_rates_closed_form(&p, &pop, k);
                            let g = generic[k - 1];
                            for (a, b) in [(closed.0, g.0), (closed.1, g.1), (closed.2, g.2)] {
                                assert!(
                                    (a - b).abs() < 1e-12,
                                    "K={clusters} m={library} m0={popular} N={cache} beta={beta} k={k}: closed {closed:?} generic {g:?}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sharing_counts_match_hand_example() {
        // Homogeneous: every cluster sends 0.3 of its 1.0 rate to the
        // relay, so on average K * 0.3 = 1.5 clusters hold it.
        let p = SystemParams::builder()
            .users(25)
            .clusters(5)
            .library(10)
            .popular_files(5)
            .user_cache(1)
            .beta(0.0)
            .mean_file_size(4e6)
            .arrival_rate_uniform(1.0)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .build()
            .unwrap();
        let arrivals = vec![(0.5, 0.3, 0.2); 5];
        let s = mean_sharing_counts(&p, &arrivals).unwrap();
        assert!((s.cellular - 1.5).abs() < 1e-12);
        assert!((s.backhaul - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shared_by_mean_divides_and_clamps() {
        let p = params(5, 108, 60, 20, 0.5);
        let (_, rc, bh) =
            service_rates(&p, ServiceModel::SharedByMean, &SharingCounts {
                cellular: 2.0,
                backhaul: 0.25,
            });
        assert!((rc - 50e6 / 4e6 / 2.0).abs() < 1e-12);
        // 0.25 clamps to 1: a lone transfer gets the whole link.
        assert!((bh - 5e6 / 4e6).abs() < 1e-12);
    }

    #[test]
    fn noncoop_folds_remote_into_backhaul() {
        let p = params(5, 108, 60, 20, 0.5);
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        let coop = network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap();
        let nc = noncoop_network_rates(&c, &pop, &p, ServiceModel::FixedAverage).unwrap();
        for (a, b) in coop.iter().zip(&nc) {
            assert_eq!(b.lambda_rc, 0.0);
            assert!((b.lambda_bh - (a.lambda_bh + a.lambda_rc)).abs() < 1e-12);
            assert!((a.lambda() - b.lambda()).abs() < 1e-12);
            assert!(b.rho() >= a.rho());
        }
    }

    #[test]
    fn empty_and_full_placements_are_pure_modes() {
        let p = params(3, 30, 10, 5, 0.7);
        let pop = zipf_popularity(&p).unwrap();
        let empty = CachePlacement::empty(3, 30);
        for r in network_rates(&empty, &pop, &p, ServiceModel::FixedAverage).unwrap() {
            assert_eq!((r.lambda_lc, r.lambda_rc), (0.0, 0.0));
            assert!((r.lambda_bh - 0.5).abs() < 1e-12);
        }
        let full = CachePlacement::full(3, 30);
        for r in network_rates(&full, &pop, &p, ServiceModel::FixedAverage).unwrap() {
            assert_eq!((r.lambda_rc, r.lambda_bh), (0.0, 0.0));
            assert!((r.lambda_lc - 0.5).abs() < 1e-12);
        }
    }
}
