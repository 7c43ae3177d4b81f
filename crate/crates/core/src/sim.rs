//! Discrete-event validation of the queue model.
//!
//! Two disciplines share one front end. `Fifo` replays the serving
//! queue exactly as the delay formula models it: Poisson arrivals,
//! mode drawn with probability lambda_j / lambda, exponential service
//! at the mode rate, one server, first-in-first-out. Departures follow
//! the recurrence d_i = max(a_i, d_{i-1}) + s_i, so no event calendar
//! is needed. `ProcessorSharing` runs the continuous-time chain on the
//! per-mode occupancy vector (departure rate mu_j x_j / x_total) and
//! reads the delay off the time-average occupancy through Little's
//! law; its stationary total occupancy is geometric, which is what
//! `geometric_fit` checks.
//!
//! Everything is deterministic in the seed. Queue lengths are sampled
//! just before each arrival, so the histogram estimates the
//! stationary distribution by PASTA. Confidence intervals come from
//! batch means with a Student-t quantile.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::delay::{delay_report, DelayReport};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::placement::CachePlacement;
use crate::popularity::PopularityMatrix;
use crate::rates::{network_rates, ClusterRates, ServiceModel};

/// Queueing discipline of the simulated server.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum Discipline {
    /// Single server, first-in-first-out.
    #[default]
    Fifo,
    /// Egalitarian processor sharing over everything in the system.
    ProcessorSharing,
}

/// Simulation configuration.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Requests to generate per cluster.
    pub num_requests: usize,
    /// Leading fraction of requests discarded before measuring.
    pub warmup_fraction: f64,
    pub seed: u64,
    /// Number of batch means behind the confidence interval.
    pub batch_count: usize,
    pub discipline: Discipline,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            num_requests: 100_000,
            warmup_fraction: 0.1,
            seed: 0,
            batch_count: 20,
            discipline: Discipline::Fifo,
        }
    }
}

impl SimConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::SimConfig(format!(
                "warmup_fraction = {} must be in [0, 1)",
                self.warmup_fraction
            )));
        }
        if self.batch_count < 2 {
            return Err(Error::SimConfig("batch_count must be >= 2".into()));
        }
        let measured = self.num_requests - self.warmup_count();
        if measured < self.batch_count {
            return Err(Error::SimConfig(format!(
                "{} measured requests cannot fill {} batches",
                measured, self.batch_count
            )));
        }
        Ok(())
    }

    fn warmup_count(&self) -> usize {
        (self.num_requests as f64 * self.warmup_fraction) as usize
    }
}

/// Measurements of one simulated cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct SimStats {
    /// Requests contributing to the statistics (post-warmup).
    pub served: u64,
    /// Mean sojourn time, seconds.
    pub mean_delay: f64,
    /// Half width of the 95% confidence interval on the mean delay.
    pub ci95_half_width: f64,
    /// Post-warmup requests served per mode (local, remote, backhaul).
    pub per_mode_counts: [u64; 3],
    /// Distribution of the number in system seen by arrivals (PASTA).
    pub queue_length_histogram: Vec<f64>,
    /// Mean of that distribution.
    pub mean_queue_length: f64,
    /// Fraction of time the server was busy.
    pub empirical_rho: f64,
}

impl SimStats {
    /// A cluster with no arrivals: everything zero.
    fn idle() -> Self {
        SimStats {
            served: 0,
            mean_delay: 0.0,
            ci95_half_width: 0.0,
            per_mode_counts: [0; 3],
            queue_length_histogram: vec![1.0],
            mean_queue_length: 0.0,
            empirical_rho: 0.0,
        }
    }
}

fn t_quantile_975(df: usize) -> f64 {
    StudentsT::new(0.0, 1.0, df as f64)
        .expect("df >= 1")
        .inverse_cdf(0.975)
}

fn batch_ci(batch_means: &[f64]) -> (f64, f64) {
    let b = batch_means.len();
    let mean = batch_means.iter().sum::<f64>() / b as f64;
    let var = batch_means.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>()
        / (b - 1) as f64;
    let half = t_quantile_975(b - 1) * (var / b as f64).sqrt();
    (mean, half)
}

fn exp_dist(rate: f64) -> Result<Exp<f64>> {
    Exp::new(rate).map_err(|_| Error::SimConfig(format!("cannot sample Exp({rate})")))
}

/// Simulates one cluster's queue. The rates must describe a stable,
/// non-idle queue; saturated input is an error rather than a hung run.
pub fn simulate_cluster(rates: &ClusterRates, cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let lambda = rates.lambda();
    if lambda <= 0.0 {
        return Err(Error::ZeroArrivalRate);
    }
    let rho = rates.rho();
    if rho >= 1.0 {
        return Err(Error::Unstable { rho });
    }
    match cfg.discipline {
        Discipline::Fifo => simulate_fifo(rates, cfg),
        Discipline::ProcessorSharing => simulate_ps(rates, cfg),
    }
}

fn pick_mode(split: &[f64; 3], u: f64) -> usize {
    if u < split[0] {
        0
    } else if u < split[0] + split[1] {
        1
    } else {
        2
    }
}

fn simulate_fifo(rates: &ClusterRates, cfg: &SimConfig) -> Result<SimStats> {
    let lambda = rates.lambda();
    let split = rates.mode_split();
    let mus = rates.services();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let interarrival = exp_dist(lambda)?;
    let service = [exp_dist(mus[0])?, exp_dist(mus[1])?, exp_dist(mus[2])?];

    let warmup = cfg.warmup_count();
    let mut sojourns: Vec<f64> = Vec::with_capacity(cfg.num_requests - warmup);
    let mut in_flight: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    let mut histogram: Vec<u64> = Vec::new();
    let mut per_mode_counts = [0u64; 3];
    let mut queue_sum: u128 = 0;
    let mut busy_time = 0.0;
    let mut arrival = 0.0;
    let mut depart_prev = 0.0;

    for i in 0..cfg.num_requests {
        arrival += interarrival.sample(&mut rng);
        while in_flight.front().is_some_and(|&d| d <= arrival) {
            in_flight.pop_front();
        }
        let seen = in_flight.len();
        let mode = pick_mode(&split, rng.gen::<f64>());
        let s = service[mode].sample(&mut rng);
        let depart = arrival.max(depart_prev) + s;
        depart_prev = depart;
        in_flight.push_back(depart);
        busy_time += s;
        if i >= warmup {
            sojourns.push(depart - arrival);
            per_mode_counts[mode] += 1;
            if histogram.len() <= seen {
                histogram.resize(seen + 1, 0);
            }
            histogram[seen] += 1;
            queue_sum += seen as u128;
        }
    }

    let served = sojourns.len() as u64;
    let bsize = sojourns.len() / cfg.batch_count;
    let batch_means: Vec<f64> = (0..cfg.batch_count)
        .map(|b| {
            let chunk = &sojourns[b * bsize..(b + 1) * bsize];
            chunk.iter().sum::<f64>() / bsize as f64
        })
        .collect();
    let (mean_delay, ci95_half_width) = batch_ci(&batch_means);
    let total_samples: u64 = histogram.iter().sum();
    let queue_length_histogram: Vec<f64> =
        histogram.iter().map(|&c| c as f64 / total_samples as f64).collect();
    Ok(SimStats {
        served,
        mean_delay,
        ci95_half_width,
        per_mode_counts,
        queue_length_histogram,
        mean_queue_length: queue_sum as f64 / total_samples as f64,
        // full-horizon utilization; the warmup bias vanishes at the
        // sample sizes this is used with
        empirical_rho: busy_time / depart_prev,
    })
}

fn simulate_ps(rates: &ClusterRates, cfg: &SimConfig) -> Result<SimStats> {
    let lambda = rates.lambda();
    let split = rates.mode_split();
    let mus = rates.services();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let warmup = cfg.warmup_count();
    let measured = cfg.num_requests - warmup;
    let bsize = measured / cfg.batch_count;
    let batches = cfg.batch_count;

    let mut x = [0u64; 3];
    let mut arrivals = 0usize;
    let mut histogram: Vec<u64> = Vec::new();
    let mut per_mode_counts = [0u64; 3];
    let mut batch_area = vec![0.0f64; batches];
    let mut batch_dur = vec![0.0f64; batches];
    let mut busy = 0.0;
    let mut elapsed_measured = 0.0;

    while arrivals < cfg.num_requests {
        let x_tot: u64 = x.iter().sum();
        let total_rate = lambda
            + if x_tot > 0 {
                x.iter().zip(&mus).map(|(&xi, mu)| mu * xi as f64).sum::<f64>() / x_tot as f64
            } else {
                0.0
            };
        let dt = Exp::new(total_rate)
            .map_err(|_| Error::SimConfig("zero event rate".into()))?
            .sample(&mut rng);
        if arrivals >= warmup {
            let batch = (arrivals - warmup) / bsize;
            if batch < batches {
                batch_area[batch] += x_tot as f64 * dt;
                batch_dur[batch] += dt;
            }
            elapsed_measured += dt;
            if x_tot > 0 {
                busy += dt;
            }
        }
        // pick the event proportionally to its rate
        let u = rng.gen::<f64>() * total_rate;
        if u < lambda {
            if arrivals >= warmup {
                if histogram.len() <= x_tot as usize {
                    histogram.resize(x_tot as usize + 1, 0);
                }
                histogram[x_tot as usize] += 1;
            }
            let mode = pick_mode(&split, rng.gen::<f64>());
            x[mode] += 1;
            arrivals += 1;
        } else {
            let mut acc = lambda;
            let mut chosen = None;
            for j in 0..3 {
                if x[j] == 0 {
                    continue;
                }
                acc += mus[j] * x[j] as f64 / x_tot as f64;
                if u < acc {
                    chosen = Some(j);
                    break;
                }
            }
            // rounding can leave u just past the last rate; take the
            // last occupied mode then
            let chosen =
                chosen.unwrap_or_else(|| (0..3).rev().find(|&j| x[j] > 0).unwrap());
            x[chosen] -= 1;
            if arrivals >= warmup {
                per_mode_counts[chosen] += 1;
            }
        }
    }

    let batch_means: Vec<f64> = batch_area
        .iter()
        .zip(&batch_dur)
        .map(|(a, d)| a / d / lambda)
        .collect();
    let (mean_delay, ci95_half_width) = batch_ci(&batch_means);
    let total_samples: u64 = histogram.iter().sum();
    let queue_length_histogram: Vec<f64> =
        histogram.iter().map(|&c| c as f64 / total_samples as f64).collect();
    let mean_queue_length = queue_length_histogram
        .iter()
        .enumerate()
        .map(|(i, p)| i as f64 * p)
        .sum();
    Ok(SimStats {
        served: per_mode_counts.iter().sum(),
        mean_delay,
        ci95_half_width,
        per_mode_counts,
        queue_length_histogram,
        mean_queue_length,
        empirical_rho: busy / elapsed_measured,
    })
}

/// Network simulation next to its analytic counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSimReport {
    pub per_cluster: Vec<SimStats>,
    /// Traffic-weighted mean of the per-cluster simulated delays.
    pub network_delay: f64,
    /// Half width propagated from the per-cluster intervals.
    pub ci95_half_width: f64,
    pub analytic: DelayReport,
}

/// Simulates every cluster of a placement and aggregates like the
/// analytic network delay. Cluster i + 1 runs on a seed derived from
/// `cfg.seed` with a golden-ratio stride, so clusters are independent
/// but the whole report is reproducible.
pub fn simulate_network(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
    cfg: &SimConfig,
) -> Result<NetworkSimReport> {
    let rates = network_rates(c, pop, params, model)?;
    let analytic = delay_report(&rates)?;
    let total: f64 = rates.iter().map(|r| r.lambda()).sum();
    let mut per_cluster = Vec::with_capacity(rates.len());
    let mut network_delay = 0.0;
    let mut var = 0.0;
    for (i, r) in rates.iter().enumerate() {
        if r.lambda() <= 0.0 {
            per_cluster.push(SimStats::idle());
            continue;
        }
        let cluster_cfg = SimConfig {
            seed: cfg.seed ^ ((i as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..*cfg
        };
        let stats = simulate_cluster(r, &cluster_cfg).map_err(|e| match e {
            Error::Unstable { rho } => Error::UnstableCluster { cluster: i + 1, rho },
            other => other,
        })?;
        let w = r.lambda() / total;
        network_delay += w * stats.mean_delay;
        var += (w * stats.ci95_half_width).powi(2);
        per_cluster.push(stats);
    }
    Ok(NetworkSimReport {
        per_cluster,
        network_delay,
        ci95_half_width: var.sqrt(),
        analytic,
    })
}

/// Comparison of a sampled queue-length distribution with the
/// geometric law of a stable system at utilization zeta / zeta_c.
#[derive(Debug, Clone, PartialEq)]
pub struct GeometricFit {
    pub empirical_mean: f64,
    /// zeta / (zeta_c - zeta).
    pub predicted_mean: f64,
    pub relative_error: f64,
    /// Total variation distance between the sampled histogram and the
    /// geometric probability mass function.
    pub tv_distance: f64,
}

/// Fits the sampled queue-length histogram against the geometric
/// distribution with success ratio zeta / zeta_c.
pub fn geometric_fit(stats: &SimStats, zeta: f64, zeta_c: f64) -> Result<GeometricFit> {
    if !(zeta >= 0.0) || !(zeta_c > 0.0) {
        return Err(Error::InvalidParams(format!(
            "demands must be nonnegative with zeta_c > 0, got {zeta}, {zeta_c}"
        )));
    }
    if zeta >= zeta_c {
        return Err(Error::Saturated { zeta, zeta_c });
    }
    let r = zeta / zeta_c;
    let predicted_mean = zeta / (zeta_c - zeta);
    let empirical_mean = stats.mean_queue_length;
    let relative_error = if predicted_mean > 0.0 {
        (empirical_mean - predicted_mean).abs() / predicted_mean
    } else {
        empirical_mean.abs()
    };
    let mut tv = 0.0;
    let mut geom_mass = 0.0;
    for (i, &p) in stats.queue_length_histogram.iter().enumerate() {
        let g = (1.0 - r) * r.powi(i as i32);
        geom_mass += g;
        tv += (p - g).abs();
    }
    tv = 0.5 * (tv + (1.0 - geom_mass));
    Ok(GeometricFit { empirical_mean, predicted_mean, relative_error, tv_distance: tv })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mm1(lambda: f64, mu: f64) -> ClusterRates {
        ClusterRates {
            lambda_lc: 0.0,
            lambda_rc: lambda,
            lambda_bh: 0.0,
            mu_lc: 1.0,
            mu_rc: mu,
            mu_bh: 1.0,
        }
    }

    fn quick_cfg(discipline: Discipline) -> SimConfig {
        SimConfig { num_requests: 60_000, seed: 11, discipline, ..SimConfig::default() }
    }

    /// M/M/1 at rho = 0.5: sojourn 1/(mu - lambda) = 2 s, mean queue
    /// length rho/(1 - rho) = 1, utilization 0.5.
    #[test]
    fn fifo_matches_mm1() {
        let stats = simulate_cluster(&mm1(0.5, 1.0), &quick_cfg(Discipline::Fifo)).unwrap();
        assert!(
            (stats.mean_delay - 2.0).abs() < 3.0 * stats.ci95_half_width.max(0.02),
            "delay {} +- {}",
            stats.mean_delay,
            stats.ci95_half_width
        );
        assert!((stats.mean_queue_length - 1.0).abs() < 0.06);
        assert!((stats.empirical_rho - 0.5).abs() < 0.02);
    }

    #[test]
    fn processor_sharing_matches_mm1_too() {
        // Single class PS has the same mean behavior as FIFO M/M/1.
        let stats =
            simulate_cluster(&mm1(0.5, 1.0), &quick_cfg(Discipline::ProcessorSharing)).unwrap();
        assert!((stats.mean_delay - 2.0).abs() < 0.1, "delay {}", stats.mean_delay);
        assert!((stats.mean_queue_length - 1.0).abs() < 0.06);
        assert!((stats.empirical_rho - 0.5).abs() < 0.02);
    }

    #[test]
    fn deterministic_in_the_seed() {
        let a = simulate_cluster(&mm1(0.3, 1.0), &quick_cfg(Discipline::Fifo)).unwrap();
        let b = simulate_cluster(&mm1(0.3, 1.0), &quick_cfg(Discipline::Fifo)).unwrap();
        assert_eq!(a, b);
        let c = simulate_cluster(
            &mm1(0.3, 1.0),
            &SimConfig { seed: 12, ..quick_cfg(Discipline::Fifo) },
        )
        .unwrap();
        assert_ne!(a.mean_delay, c.mean_delay);
    }

    #[test]
    fn rejects_saturated_and_idle_input() {
        let err = simulate_cluster(&mm1(1.5, 1.0), &SimConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Unstable { .. }));
        let err = simulate_cluster(&mm1(0.0, 1.0), &SimConfig::default()).unwrap_err();
        assert!(matches!(err, Error::ZeroArrivalRate));
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = SimConfig { warmup_fraction: 1.2, ..SimConfig::default() };
        assert!(simulate_cluster(&mm1(0.5, 1.0), &cfg).is_err());
        let cfg = SimConfig { num_requests: 30, batch_count: 40, ..SimConfig::default() };
        assert!(simulate_cluster(&mm1(0.5, 1.0), &cfg).is_err());
    }

    #[test]
    fn geometric_fit_is_tight_for_mm1_ps() {
        let stats =
            simulate_cluster(&mm1(0.5, 1.0), &quick_cfg(Discipline::ProcessorSharing)).unwrap();
        // zeta / zeta_c = rho = 0.5 regardless of the file-size scale.
        let fit = geometric_fit(&stats, 0.5, 1.0).unwrap();
        assert!(fit.relative_error < 0.05, "{fit:?}");
        assert!(fit.tv_distance < 0.02, "{fit:?}");
    }

    #[test]
    fn geometric_fit_rejects_saturation() {
        let stats = SimStats::idle();
        assert!(matches!(
            geometric_fit(&stats, 2.0, 1.0).unwrap_err(),
            Error::Saturated { .. }
        ));
    }
}
