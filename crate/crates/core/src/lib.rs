//! Analysis and simulation toolkit for clustered device-to-device
//! caching networks with inter-cluster cooperation.
//!
//! # Overview
//!
//! A cell is split into `K` clusters of users. Each cluster holds a
//! cache of `N` files; a request is served over one device-to-device
//! hop when its own cluster caches the file, relayed over the cellular
//! link when only another cluster caches it, and fetched over the slow
//! backhaul otherwise. Each cluster's serving queue is a multiclass
//! M/M-style station whose stationary delay has a closed form, so any
//! cache placement can be scored analytically, and placements can be
//! searched: per-cluster most-popular files ([`cpf_placement`]),
//! uniform random caches ([`random_placement`]), and a greedy
//! placement with a `1 - 1/e` style guarantee backed by the
//! supermodularity of the objective over a partition matroid
//! ([`greedy_caching`]).
//!
//! Every analytic claim is checkable from inside the crate: a
//! discrete-event simulator replays the queues ([`simulate_network`]),
//! samplers probe monotonicity and decreasing returns
//! ([`supermodularity_check`]), brute force recovers exact optima on
//! small instances ([`brute_force_optimal`]), and the demand, outage
//! and scaling views ([`throughput_report`], [`outage_report`],
//! [`scaling_bound`]) cover the non-queueing claims.
//!
//! # Quick start
//!
//! ```
//! use coopcache::*;
//!
//! let params = SystemParams::builder()
//!     .users(25)
//!     .clusters(5)
//!     .library(108)
//!     .popular_files(60)
//!     .user_cache(4)
//!     .beta(0.5)
//!     .mean_file_size(4e6) // 4 Mbit files
//!     .arrival_rate_uniform(0.5) // requests per second per cluster
//!     .d2d_rate(120e6)
//!     .cell_rate_avg(50e6)
//!     .backhaul_rate_avg(5e6)
//!     .build()?;
//!
//! let pop = zipf_popularity(&params)?;
//! let placement = cpf_placement(&params, &pop);
//! let delay = network_delay(&placement, &pop, &params, ServiceModel::FixedAverage)?;
//! let gain = cooperation_gain(&placement, &pop, &params, ServiceModel::FixedAverage)?;
//! assert!(delay.network > 0.0 && gain.gain > 0.0);
//! # Ok::<(), coopcache::Error>(())
//! ```
//!
//! # Units and conventions
//!
//! Rates in bits per second, sizes in bits, arrival rates in requests
//! per second, delays in seconds, powers in watts. Clusters and files
//! are 1-based. All randomized pieces take explicit seeds and are
//! reproducible bit for bit.

pub mod delay;
pub mod error;
pub mod params;
pub mod placement;
pub mod popularity;
pub mod rates;
pub mod schemes;
pub mod sim;
pub mod throughput;

pub use delay::{
    avg_download_time, cluster_delay, cooperation_gain, delay_gain, delay_report,
    energy_per_cluster, network_delay, noncoop_network_delay, pk_sojourn, DelayReport,
    EnergyReport, GainReport,
};
pub use error::{CapacityReport, Error, Result};
pub use params::{SystemParams, SystemParamsBuilder, Warning};
pub use placement::{
    is_independent, matroid_properties_exhaustive, validate_placement, CachePlacement,
    CapacityViolation, GroundSetElement, MatroidCheck,
};
pub use popularity::{zipf_popularity, PopularityMatrix};
pub use rates::{
    cpf_arrival_rates_closed_form, mean_sharing_counts, mode_arrival_rates,
    network_arrival_rates, network_rates, noncoop_network_rates, rates_from_arrivals,
    service_rates, ClusterRates, ServiceModel, SharingCounts,
};
pub use schemes::{
    brute_force_optimal, cpf_placement, evaluate_objective, greedy_caching,
    monotonicity_check, random_placement, supermodularity_check, BaselinePolicy,
    ChainViolation, GreedyStep, GreedyTrace, Objective, PropertyReport,
};
pub use sim::{
    geometric_fit, simulate_cluster, simulate_network, Discipline, GeometricFit,
    NetworkSimReport, SimConfig, SimStats,
};
pub use throughput::{
    critical_demand, gamma_exponent, outage_approx, outage_exact, outage_report,
    per_request_throughput, scaling_bound, throughput_report, throughput_vs_cluster_size,
    traffic_demand, ClusterSizePoint, OutageApprox, OutageExact, OutageReport,
    ScalingReport, ThroughputReport, TrafficDemand,
};
