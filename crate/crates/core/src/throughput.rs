//! Traffic demand, per-request throughput, outage probabilities and
//! the sum-throughput scaling bound.
//!
//! Demand-side view of the same queues the delay module analyzes: a
//! mode's demand is its arrival rate times the mean file size, the
//! critical demand is where the serving queue saturates, and the
//! residual zeta_c - zeta is what an extra request would get. The
//! outage and scaling pieces look at one reference cluster under the
//! canonical cache of M * y files and ask how cooperation moves the
//! probability of serving without the backhaul, and how the total
//! cache-hit throughput can scale with the library when the cluster
//! size follows y = rho_scale * m^gamma.

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::popularity::PopularityMatrix;
use crate::rates::ClusterRates;

/// Offered traffic per mode, bits per second.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TrafficDemand {
    pub local: f64,
    pub remote: f64,
    pub backhaul: f64,
}

impl TrafficDemand {
    pub fn total(&self) -> f64 {
        self.local + self.remote + self.backhaul
    }
}

/// Demand of one cluster: zeta_j = lambda_j * mean file size.
pub fn traffic_demand(rates: &ClusterRates, params: &SystemParams) -> TrafficDemand {
    let s = params.mean_file_size;
    TrafficDemand {
        local: rates.lambda_lc * s,
        remote: rates.lambda_rc * s,
        backhaul: rates.lambda_bh * s,
    }
}

/// Critical demand: the total offered load at which the cluster's
/// queue saturates, i.e. total demand over the utilization it causes.
/// Zero demand returns the in-cluster rate (the all-local limit).
pub fn critical_demand(d: &TrafficDemand, params: &SystemParams) -> f64 {
    let zeta = d.total();
    if zeta <= 0.0 {
        return params.d2d_rate;
    }
    zeta / (d.local / params.d2d_rate
        + d.remote / params.cell_rate_avg
        + d.backhaul / params.backhaul_rate_avg)
}

/// Mean number queued and residual per-request throughput at demand
/// zeta against critical demand zeta_c. Saturation is an error.
pub fn per_request_throughput(zeta: f64, zeta_c: f64) -> Result<(f64, f64)> {
    if zeta >= zeta_c {
        return Err(Error::Saturated { zeta, zeta_c });
    }
    Ok((zeta / (zeta_c - zeta), zeta_c - zeta))
}

/// Demand-side summary of one cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputReport {
    pub demand: TrafficDemand,
    pub zeta: f64,
    pub zeta_c: f64,
    /// zeta / (zeta_c - zeta); NaN when saturated.
    pub mean_queue_length: f64,
    /// zeta_c - zeta; NaN when saturated.
    pub per_request_throughput: f64,
    pub stable: bool,
    /// No demand at all; zeta_c reported as the in-cluster rate.
    pub all_local: bool,
}

/// Builds the demand summary of one cluster, tolerating saturation
/// (flagged, with NaN placeholders) instead of erroring.
pub fn throughput_report(rates: &ClusterRates, params: &SystemParams) -> ThroughputReport {
    let demand = traffic_demand(rates, params);
    let zeta = demand.total();
    let zeta_c = critical_demand(&demand, params);
    match per_request_throughput(zeta, zeta_c) {
        Ok((n_q, r)) => ThroughputReport {
            demand,
            zeta,
            zeta_c,
            mean_queue_length: n_q,
            per_request_throughput: r,
            stable: true,
            all_local: zeta <= 0.0,
        },
        Err(_) => ThroughputReport {
            demand,
            zeta,
            zeta_c,
            mean_queue_length: f64::NAN,
            per_request_throughput: f64::NAN,
            stable: false,
            all_local: false,
        },
    }
}

/// Exact no-outage probabilities of the reference cluster (cluster 1)
/// when every cluster caches its M * y most popular files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageExact {
    /// Served from any cache, own or relayed.
    pub p_no_outage_coop: f64,
    /// Served from the own cache only.
    pub p_no_outage_noncoop: f64,
}

/// Exact cache-hit probabilities under the canonical placement with
/// per-cluster capacity min(M * y, m). The cooperative probability is
/// the union mass of all cached ranges in cluster 1's popularity,
/// accumulated segment by segment like the closed-form rates.
pub fn outage_exact(params: &SystemParams, pop: &PopularityMatrix) -> OutageExact {
    let m = params.library;
    let my = (params.user_cache * params.users_per_cluster()).min(m);
    if my == 0 {
        return OutageExact { p_no_outage_coop: 0.0, p_no_outage_noncoop: 0.0 };
    }
    let noncoop = pop.rank_mass(1, my);
    let mut covered_end = 0usize;
    let mut union = 0.0;
    for j in 1..=params.clusters {
        let s_j = params.popularity_shift(j);
        let lo = (covered_end + 1).max(s_j + 1);
        let hi = (s_j + my).min(m);
        if lo <= hi {
            union += pop.file_mass(1, lo, hi);
            covered_end = hi;
        }
    }
    OutageExact { p_no_outage_coop: union.min(1.0), p_no_outage_noncoop: noncoop }
}

/// Integral approximations of the no-outage probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageApprox {
    pub p_no_outage_noncoop: f64,
    /// Extra probability contributed by the other clusters' caches.
    pub cooperation_increment: f64,
    pub p_no_outage_coop: f64,
}

/// Power-integral approximation with trapezoid end corrections.
///
/// The Zipf partial sum over ranks 1..q is approximated by
/// ((q+1)^(1-b) - 1)/(1-b); a partial range (w, q] gets the integral
/// plus the end correction -(w^-b + q^-b)/2, and each range term is
/// clamped at zero so empty ranges cannot go negative. Exponent 1 is a
/// singularity of this form and is rejected; use [`outage_exact`].
pub fn outage_approx(params: &SystemParams) -> Result<OutageApprox> {
    let b = params.beta;
    if (b - 1.0).abs() < 1e-12 {
        return Err(Error::SingularExponent);
    }
    let m = params.library as f64;
    let my = (params.user_cache * params.users_per_cluster()).min(params.library) as f64;
    let h_approx = ((m + 1.0).powf(1.0 - b) - 1.0) / (1.0 - b);
    let zipf_head = |q: f64| ((q + 1.0).powf(1.0 - b) - 1.0) / (1.0 - b);
    let noncoop = (zipf_head(my) / h_approx).clamp(0.0, 1.0);

    // Each cluster j >= 2 adds the slice of its cached range that the
    // reference cache and cluster j-1's range miss: ranks w+1 .. q-1
    // with w exclusive below and q exclusive above, approximated by
    // the integral over [w, q] minus the endpoint trapezoid.
    let mut increment = 0.0;
    for j in 2..=params.clusters {
        let s_j = params.popularity_shift(j) as f64;
        let s_prev = params.popularity_shift(j - 1) as f64;
        let w = s_j.max(s_prev + my);
        let q = (s_j + my + 1.0).min(m + 1.0);
        if q <= w + 1.0 {
            continue;
        }
        let integral = (q.powf(1.0 - b) - w.powf(1.0 - b)) / (1.0 - b);
        let correction = -(w.powf(-b) + q.powf(-b)) / 2.0;
        increment += ((integral + correction) / h_approx).max(0.0);
    }
    let coop = (noncoop + increment).clamp(0.0, 1.0);
    Ok(OutageApprox {
        p_no_outage_noncoop: noncoop,
        cooperation_increment: increment,
        p_no_outage_coop: coop,
    })
}

/// Exact and approximate outage, side by side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageReport {
    pub p_outage_coop: f64,
    pub p_outage_noncoop: f64,
    /// None at the approximation's singular exponent.
    pub p_outage_coop_approx: Option<f64>,
    pub p_outage_noncoop_approx: Option<f64>,
}

/// Combines [`outage_exact`] and [`outage_approx`]; the approximation
/// slots stay empty at its singular exponent instead of failing.
pub fn outage_report(params: &SystemParams, pop: &PopularityMatrix) -> OutageReport {
    let exact = outage_exact(params, pop);
    let approx = outage_approx(params).ok();
    // Complements are clamped: rank-mass sums can overshoot 1 by an ulp.
    OutageReport {
        p_outage_coop: (1.0 - exact.p_no_outage_coop).clamp(0.0, 1.0),
        p_outage_noncoop: (1.0 - exact.p_no_outage_noncoop).clamp(0.0, 1.0),
        p_outage_coop_approx: approx.map(|a| (1.0 - a.p_no_outage_coop).clamp(0.0, 1.0)),
        p_outage_noncoop_approx: approx.map(|a| (1.0 - a.p_no_outage_noncoop).clamp(0.0, 1.0)),
    }
}

/// Scaling exponent gamma = (1 - beta) / (2 - beta) of the optimal
/// cluster-size regime y ~ m^gamma. Exactly 1/2 at beta = 0 and 0 at
/// beta = 1; meaningful for beta in [0, 1].
pub fn gamma_exponent(beta: f64) -> f64 {
    (1.0 - beta) / (2.0 - beta)
}

/// Sum-throughput bound in the scaling regime.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub gamma: f64,
    /// Regime cluster size y = max(1, floor(rho_scale * m^gamma)).
    pub cluster_size: usize,
    /// Expected number of clusters that can serve a round locally,
    /// (n / y) * (1 - (1 - p)^y) with p the single-user hit probability.
    pub expected_good_clusters: f64,
    /// C * (expected good clusters + k1), bits per second.
    pub t_sum_upper: f64,
    /// Closed asymptotic form of the same bound.
    pub t_sum_asymptotic: f64,
    /// Least-squares slope of log t_sum_dominant over log m across the
    /// supplied grid; -gamma by construction.
    pub loglog_slope: f64,
    /// Exponent 1 handled through the logarithmic limit of the hit
    /// probability.
    pub degenerate_beta: bool,
}

/// Single-user hit probability approximation: the mass of the top M*y
/// ranks, by the integral head ratio; beta = 1 uses the log limit.
fn hit_probability(my: f64, m: f64, beta: f64) -> f64 {
    if (beta - 1.0).abs() < 1e-12 {
        ((my + 1.0).ln() / (m + 1.0).ln()).clamp(0.0, 1.0)
    } else {
        let head = |q: f64| (q + 1.0).powf(1.0 - beta) - 1.0;
        (head(my) / head(m)).clamp(0.0, 1.0)
    }
}

fn dominant_term(params: &SystemParams, m: f64) -> f64 {
    let beta = params.beta;
    let gamma = gamma_exponent(beta);
    let c = params.d2d_rate;
    let rho = params.rho_scale;
    let m_big = params.user_cache as f64;
    let n = params.users as f64;
    (c / rho) * (1.0 - (-rho.powf(2.0 - beta) * m_big.powf(beta - 1.0)).exp()) * n
        / m.powf(gamma)
}

/// Evaluates the sum-throughput bound at the regime cluster size for
/// the parameter library size, and fits the log-log slope of the
/// dominant asymptotic term over `m_grid` (at least two points).
pub fn scaling_bound(params: &SystemParams, m_grid: &[f64]) -> Result<ScalingReport> {
    params.validate()?;
    if m_grid.len() < 2 {
        return Err(Error::InvalidParams(
            "m_grid needs at least two points to fit a slope".into(),
        ));
    }
    let beta = params.beta;
    let gamma = gamma_exponent(beta);
    let degenerate_beta = (beta - 1.0).abs() < 1e-12;
    let m = params.library as f64;
    let y = ((params.rho_scale * m.powf(gamma)).floor() as usize).max(1);
    let my = ((params.user_cache * y) as f64).min(m);
    let p_hit = hit_probability(my, m, beta);
    let n = params.users as f64;
    let expected_good_clusters = n / y as f64 * (1.0 - (1.0 - p_hit).powf(y as f64));
    let c = params.d2d_rate;
    let k1 = params.k1_rate_ratio;
    let t_sum_upper = c * (expected_good_clusters + k1);
    let t_sum_asymptotic = dominant_term(params, m) + k1 * c;

    // least-squares slope of ln(dominant) against ln(m)
    let pts: Vec<(f64, f64)> =
        m_grid.iter().map(|&mi| (mi.ln(), dominant_term(params, mi).ln())).collect();
    let n_pts = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n_pts;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n_pts;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_x) * (p.0 - mean_x)).sum();
    let loglog_slope = sxy / sxx;

    Ok(ScalingReport {
        gamma,
        cluster_size: y,
        expected_good_clusters,
        t_sum_upper,
        t_sum_asymptotic,
        loglog_slope,
        degenerate_beta,
    })
}

/// One point of the bound-vs-cluster-size curve at fixed n and m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterSizePoint {
    pub y: usize,
    pub expected_good_clusters: f64,
    pub t_sum_bound: f64,
    /// Bound per user, bits per second.
    pub per_user: f64,
}

/// Sweeps the sum-throughput bound over cluster sizes and reports the
/// index of the maximizing grid point.
pub fn throughput_vs_cluster_size(
    params: &SystemParams,
    y_grid: &[usize],
) -> Result<(Vec<ClusterSizePoint>, usize)> {
    params.validate()?;
    if y_grid.is_empty() {
        return Err(Error::InvalidParams("empty cluster-size grid".into()));
    }
    let m = params.library as f64;
    let n = params.users as f64;
    let c = params.d2d_rate;
    let k1 = params.k1_rate_ratio;
    let mut points = Vec::with_capacity(y_grid.len());
    for &y in y_grid {
        if y == 0 || y as f64 > n {
            return Err(Error::InvalidParams(format!(
                "cluster size {y} outside 1..={n}"
            )));
        }
        let my = ((params.user_cache * y) as f64).min(m);
        let p_hit = hit_probability(my, m, params.beta);
        let good = n / y as f64 * (1.0 - (1.0 - p_hit).powf(y as f64));
        let bound = c * (good + k1);
        points.push(ClusterSizePoint {
            y,
            expected_good_clusters: good,
            t_sum_bound: bound,
            per_user: bound / n,
        });
    }
    let argmax = points
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.t_sum_bound.partial_cmp(&b.1.t_sum_bound).unwrap())
        .unwrap()
        .0;
    Ok((points, argmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf_popularity;

    fn params(beta: f64) -> SystemParams {
        SystemParams::builder()
            .users(25)
            .clusters(5)
            .library(108)
            .popular_files(60)
            .user_cache(4)
            .beta(beta)
            .mean_file_size(4e6)
            .arrival_rate_uniform(0.5)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .build()
            .unwrap()
    }

    fn rates() -> ClusterRates {
        ClusterRates {
            lambda_lc: 0.8,
            lambda_rc: 0.6,
            lambda_bh: 0.6,
            mu_lc: 30.0,
            mu_rc: 12.5,
            mu_bh: 1.25,
        }
    }

    /// zeta = 2.0 req/s * 4 Mbit = 8 Mbps; utilization terms
    /// 3.2/120 + 2.4/50 + 2.4/5 = 0.5547; zeta_c = 8/0.5547 = 14.423.
    #[test]
    fn critical_demand_hand_example() {
        let p = params(0.5);
        let d = traffic_demand(&rates(), &p);
        assert!((d.total() - 8e6).abs() < 1e-6);
        let zc = critical_demand(&d, &p);
        let util = 3.2 / 120.0 + 2.4 / 50.0 + 2.4 / 5.0;
        assert!((zc - 8e6 / util).abs() < 1.0);
        let (n_q, r) = per_request_throughput(d.total(), zc).unwrap();
        assert!((n_q - d.total() / (zc - d.total())).abs() < 1e-9);
        assert!((r - (zc - d.total())).abs() < 1e-6);
    }

    #[test]
    fn utilization_equals_demand_ratio() {
        let p = params(0.5);
        let r = rates();
        let d = traffic_demand(&r, &p);
        let zc = critical_demand(&d, &p);
        assert!((d.total() / zc - r.rho()).abs() < 1e-12);
    }

    #[test]
    fn saturation_is_flagged_not_fatal() {
        let p = params(0.5);
        let r = ClusterRates { lambda_bh: 2.0, ..rates() };
        let report = throughput_report(&r, &p);
        assert!(!report.stable);
        assert!(report.mean_queue_length.is_nan());
        assert!(matches!(
            per_request_throughput(report.zeta, report.zeta_c).unwrap_err(),
            Error::Saturated { .. }
        ));
    }

    #[test]
    fn zero_demand_reports_local_limit() {
        let p = params(0.5);
        let r = ClusterRates {
            lambda_lc: 0.0,
            lambda_rc: 0.0,
            lambda_bh: 0.0,
            ..rates()
        };
        let report = throughput_report(&r, &p);
        assert!(report.all_local);
        assert_eq!(report.zeta_c, 120e6);
    }

    #[test]
    fn outage_coop_never_below_noncoop() {
        for beta in [0.0, 0.5, 1.0, 1.4] {
            let p = params(beta);
            let pop = zipf_popularity(&p).unwrap();
            let o = outage_exact(&p, &pop);
            assert!(o.p_no_outage_coop >= o.p_no_outage_noncoop - 1e-15, "beta {beta}");
            assert!(o.p_no_outage_coop <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn outage_approx_exact_at_beta_zero() {
        // At beta = 0 the integral form is an exact sum: each range of
        // r files has mass r / m.
        let p = params(0.0);
        let pop = zipf_popularity(&p).unwrap();
        let exact = outage_exact(&p, &pop);
        let approx = outage_approx(&p).unwrap();
        assert!((approx.p_no_outage_noncoop - exact.p_no_outage_noncoop).abs() < 1e-12);
        assert!((approx.p_no_outage_coop - exact.p_no_outage_coop).abs() < 1e-12);
    }

    #[test]
    fn outage_approx_rejects_singular_exponent() {
        assert!(matches!(
            outage_approx(&params(1.0)).unwrap_err(),
            Error::SingularExponent
        ));
        let report = outage_report(&params(1.0), &zipf_popularity(&params(1.0)).unwrap());
        assert!(report.p_outage_coop_approx.is_none());
    }

    #[test]
    fn gamma_endpoints_are_exact() {
        assert_eq!(gamma_exponent(0.0), 0.5);
        assert_eq!(gamma_exponent(1.0), 0.0);
        assert!((gamma_exponent(0.5) - 1.0 / 3.0).abs() < 1e-15);
    }

    fn scaling_params(beta: f64) -> SystemParams {
        SystemParams::builder()
            .users(10_000)
            .clusters(100)
            .library(1000)
            .popular_files(200)
            .user_cache(1)
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
    fn loglog_slope_recovers_gamma() {
        for beta in [0.2, 0.5, 0.8] {
            let p = scaling_params(beta);
            let r = scaling_bound(&p, &[1e3, 1e4, 1e5, 1e6]).unwrap();
            assert!(
                (r.loglog_slope + r.gamma).abs() < 1e-12,
                "beta {beta}: slope {} vs -gamma {}",
                r.loglog_slope,
                -r.gamma
            );
            assert!(r.t_sum_upper > 0.0);
        }
    }

    #[test]
    fn bound_scales_linearly_in_users() {
        let p = scaling_params(0.5);
        let mut p2 = p.clone();
        p2.users = 2 * p.users;
        p2.arrival_rates = vec![0.5; p2.clusters];
        let grid = [1e3, 1e4];
        let a = scaling_bound(&p, &grid).unwrap();
        let b = scaling_bound(&p2, &grid).unwrap();
        let da = a.t_sum_asymptotic - p.k1_rate_ratio * p.d2d_rate;
        let db = b.t_sum_asymptotic - p2.k1_rate_ratio * p2.d2d_rate;
        assert!((db / da - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_exponent_uses_log_limit() {
        let p = scaling_params(1.0);
        let r = scaling_bound(&p, &[1e3, 1e4]).unwrap();
        assert!(r.degenerate_beta);
        assert_eq!(r.gamma, 0.0);
        assert!(r.expected_good_clusters.is_finite() && r.expected_good_clusters > 0.0);
    }

    #[test]
    fn cluster_size_sweep_has_interior_peak() {
        let p = scaling_params(0.5);
        let grid: Vec<usize> = vec![1, 2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64, 96];
        let (points, argmax) = throughput_vs_cluster_size(&p, &grid).unwrap();
        assert!(argmax > 0 && argmax < points.len() - 1, "argmax {argmax}");
    }
}
