//! Stationary delay of the per-cluster serving queues, the
//! cooperation gain, and the energy and download-time side objectives.
//!
//! Each cluster's serving process is one queue fed by the three
//! Poisson mode streams with exponential service at the mode rates.
//! Its stationary mean sojourn time has the closed form
//!
//! ```text
//! D_k = rho_k / lambda_k + (sum_j lambda_j / mu_j^2) / (1 - rho_k)
//! ```
//!
//! with rho_k = sum_j lambda_j / mu_j, defined for lambda_k > 0 and
//! rho_k < 1. The network delay averages the clusters by their share
//! of the traffic. `pk_sojourn` gives the same quantity in the
//! textbook mean-service / residual-service arrangement; the two are
//! algebraically identical, which the test suite checks to 1e-12 on
//! random rate vectors.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::placement::CachePlacement;
use crate::popularity::PopularityMatrix;
use crate::rates::{
    network_rates, noncoop_network_rates, ClusterRates, ServiceModel,
};

/// Network delay with per-cluster detail.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayReport {
    /// Mean sojourn time per cluster, seconds. Clusters with zero
    /// arrival rate contribute nothing and report 0.
    pub per_cluster: Vec<f64>,
    /// Traffic-weighted network mean delay, seconds.
    pub network: f64,
    /// Traffic intensity per cluster.
    pub rho: Vec<f64>,
}

/// Mean sojourn time of one cluster's queue, seconds.
pub fn cluster_delay(rates: &ClusterRates) -> Result<f64> {
    let lambda = rates.lambda();
    if lambda <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let rho = rates.rho();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    let second_moment_load = rates.lambda_lc / (rates.mu_lc * rates.mu_lc)
        + rates.lambda_rc / (rates.mu_rc * rates.mu_rc)
        + rates.lambda_bh / (rates.mu_bh * rates.mu_bh);
    Ok(rho / lambda + second_moment_load / (1.0 - rho))
}

/// Reference Pollaczek-Khinchine arrangement of the same sojourn time:
/// E[S] + lambda E[S^2] / (2 (1 - rho)) with the mixed service moments.
/// Kept separate so tests and the verifier can check the identity.
pub fn pk_sojourn(rates: &ClusterRates) -> Result<f64> {
    let lambda = rates.lambda();
    if lambda <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let rho = rates.rho();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    let split = rates.mode_split();
    let mus = rates.services();
    let mean_s: f64 = split.iter().zip(&mus).map(|(p, mu)| p / mu).sum();
    let mean_s2: f64 = split.iter().zip(&mus).map(|(p, mu)| 2.0 * p / (mu * mu)).sum();
    Ok(mean_s + lambda * mean_s2 / (2.0 * (1.0 - rho)))
}

/// Aggregates per-cluster rates into a [`DelayReport`].
pub fn delay_report(rates: &[ClusterRates]) -> Result<DelayReport> {
    let total: f64 = rates.iter().map(|r| r.lambda()).sum();
    if total <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let mut per_cluster = Vec::with_capacity(rates.len());
    let mut rho = Vec::with_capacity(rates.len());
    let mut network = 0.0;
    for (i, r) in rates.iter().enumerate() {
        rho.push(r.rho());
        let lambda = r.lambda();
        if lambda <= 0.0 {
            per_cluster.push(0.0);
            continue;
        }
        let d = cluster_delay(r).map_err(|e| match e {
            Error::Unstable { rho } => Error::UnstableCluster { cluster: i + 1, rho },
            other => other,
        })?;
        per_cluster.push(d);
        network += lambda / total * d;
    }
    Ok(DelayReport { per_cluster, network, rho })
}

/// Network delay of a placement under the cooperative system.
pub fn network_delay(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<DelayReport> {
    delay_report(&network_rates(c, pop, params, model)?)
}

/// Network delay with cooperation disabled (remote mass on the backhaul).
pub fn noncoop_network_delay(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<DelayReport> {
    delay_report(&noncoop_network_rates(c, pop, params, model)?)
}

/// Relative delay reduction 1 - d_coop / d_noncoop.
pub fn delay_gain(d_coop: f64, d_noncoop: f64) -> Result<f64> {
    if !(d_coop > 0.0) || !(d_noncoop > 0.0) {
        return Err(Error::InvalidParams(format!(
            "delays must be positive, got coop {d_coop}, noncoop {d_noncoop}"
        )));
    }
    Ok(1.0 - d_coop / d_noncoop)
}

/// Cooperation gain of a placement.
#[derive(Debug, Clone, PartialEq)]
pub struct GainReport {
    /// 1 - d_coop / d_noncoop; 1.0 when only the baseline saturates.
    pub gain: f64,
    pub delay_coop: f64,
    /// None when the baseline is unstable.
    pub delay_noncoop: Option<f64>,
    /// The no-cooperation system saturates while the cooperative one
    /// is stable; the gain is reported as 1.0.
    pub baseline_unstable: bool,
}

/// Delay gain of cooperation for one placement. The cooperative system
/// must be stable; a saturated baseline yields gain 1.0, flagged.
pub fn cooperation_gain(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<GainReport> {
    let coop = network_delay(c, pop, params, model)?;
    match noncoop_network_delay(c, pop, params, model) {
        Ok(nc) => Ok(GainReport {
            gain: delay_gain(coop.network, nc.network)?,
            delay_coop: coop.network,
            delay_noncoop: Some(nc.network),
            baseline_unstable: false,
        }),
        Err(Error::Unstable { .. }) | Err(Error::UnstableCluster { .. }) => Ok(GainReport {
            gain: 1.0,
            delay_coop: coop.network,
            delay_noncoop: None,
            baseline_unstable: true,
        }),
        Err(e) => Err(e),
    }
}

/// Mean download time of a placement: the popularity-weighted mode
/// transfer time, averaged over clusters by arrival share. Pure
/// transfer time, no queueing, so it is defined for any load.
pub fn avg_download_time(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
) -> Result<f64> {
    let total = params.total_arrival_rate();
    if total <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let s = params.mean_file_size;
    let tau = [s / params.d2d_rate, s / params.cell_rate_avg, s / params.backhaul_rate_avg];
    let arrivals = crate::rates::network_arrival_rates(c, pop, params)?;
    let mut time = 0.0;
    for &(lc, rc, bh) in &arrivals {
        time += (lc * tau[0] + rc * tau[1] + bh * tau[2]) / total;
    }
    Ok(time)
}

/// Energy drawn by a cluster's cache traffic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    /// Mean energy per local (one-hop) delivery, joules.
    pub e_lc_per_request: f64,
    /// Mean energy per relayed delivery, joules.
    pub e_rc_per_request: f64,
    /// Local energy drawn per second (power * utilization), watts.
    pub e_lc_per_s: f64,
    /// Relay energy drawn per second, watts.
    pub e_rc_per_s: f64,
}

/// Energy use of one cluster: transmit power times transfer time per
/// request, and power times the mode's offered load per second.
pub fn energy_per_cluster(rates: &ClusterRates, params: &SystemParams) -> EnergyReport {
    let t_lc = 1.0 / rates.mu_lc;
    let t_rc = 1.0 / rates.mu_rc;
    EnergyReport {
        e_lc_per_request: params.local_power * t_lc,
        e_rc_per_request: params.remote_power * t_rc,
        e_lc_per_s: params.local_power * rates.lambda_lc * t_lc,
        e_rc_per_s: params.remote_power * rates.lambda_rc * t_rc,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rates(lams: [f64; 3], mus: [f64; 3]) -> ClusterRates {
        ClusterRates {
            lambda_lc: lams[0],
            lambda_rc: lams[1],
            lambda_bh: lams[2],
            mu_lc: mus[0],
            mu_rc: mus[1],
            mu_bh: mus[2],
        }
    }

    /// Single active mode is a plain M/M/1: D = 1/(mu - lambda).
    #[test]
    fn reduces_to_mm1() {
        for (lam, mu) in [(0.5, 1.0), (2.0, 3.0), (0.01, 30.0)] {
            let r = rates([0.0, lam, 0.0], [7.0, mu, 0.3]);
            let d = cluster_delay(&r).unwrap();
            assert!((d - 1.0 / (mu - lam)).abs() < 1e-12, "{lam}/{mu}");
        }
    }

    #[test]
    fn matches_pk_arrangement() {
        let r = rates([0.07, 0.06, 0.37], [30.0, 12.5, 1.25]);
        let a = cluster_delay(&r).unwrap();
        let b = pk_sojourn(&r).unwrap();
        assert!((a - b).abs() < 1e-14 * a.abs());
    }

    #[test]
    fn rejects_unstable_and_idle_queues() {
        let r = rates([0.0, 0.0, 2.0], [30.0, 12.5, 1.25]);
        assert!(matches!(cluster_delay(&r).unwrap_err(), Error::Unstable { .. }));
        let idle = rates([0.0, 0.0, 0.0], [30.0, 12.5, 1.25]);
        assert!(matches!(cluster_delay(&idle).unwrap_err(), Error::ZeroArrivalRate));
    }

    #[test]
    fn network_average_weights_by_traffic() {
        let a = rates([0.2, 0.0, 0.0], [1.0, 1.0, 1.0]);
        let b = rates([0.0, 0.0, 0.6], [1.0, 1.0, 1.0]);
        let report = delay_report(&[a, b]).unwrap();
        let da = cluster_delay(&a).unwrap();
        let db = cluster_delay(&b).unwrap();
        let want = 0.25 * da + 0.75 * db;
        assert!((report.network - want).abs() < 1e-14);
    }

    #[test]
    fn idle_cluster_contributes_nothing() {
        let a = rates([0.2, 0.1, 0.1], [30.0, 12.5, 1.25]);
        let idle = rates([0.0, 0.0, 0.0], [30.0, 12.5, 1.25]);
        let report = delay_report(&[a, idle]).unwrap();
        assert_eq!(report.per_cluster[1], 0.0);
        assert!((report.network - cluster_delay(&a).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn gain_requires_positive_delays() {
        assert!(delay_gain(0.0, 1.0).is_err());
        assert!((delay_gain(0.25, 1.0).unwrap() - 0.75).abs() < 1e-15);
    }

    /// 0.1 W for a 4 Mbit file at 120 Mbps: 33.3 ms transfer, 3.33 mJ.
    #[test]
    fn energy_hand_example() {
        let p = crate::SystemParams::builder()
            .users(25)
            .clusters(5)
            .library(108)
            .popular_files(60)
            .user_cache(4)
            .beta(0.5)
            .mean_file_size(4e6)
            .arrival_rate_uniform(0.5)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .local_power(0.1)
            .remote_power(0.2)
            .build()
            .unwrap();
        let r = rates([0.3, 0.1, 0.1], [30.0, 12.5, 1.25]);
        let e = energy_per_cluster(&r, &p);
        assert!((e.e_lc_per_request - 0.1 / 30.0).abs() < 1e-15);
        assert!((e.e_rc_per_request - 0.2 / 12.5).abs() < 1e-15);
        assert!((e.e_lc_per_s - 0.1 * 0.3 / 30.0).abs() < 1e-15);
        assert!((e.e_rc_per_s - 0.2 * 0.1 / 12.5).abs() < 1e-15);
    }
}
