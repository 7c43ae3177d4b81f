//! Network-wide parameter set, validation and derived quantities.
//!
//! Units are fixed across the crate: rates in bits per second, file
//! sizes in bits, arrival rates in requests per second, powers in
//! watts. Cluster indices `k` and file indices `f` are 1-based in the
//! public API.

use crate::error::{Error, Result};

/// Complete description of one network configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Total number of users n.
    pub users: usize,
    /// Number of clusters K.
    pub clusters: usize,
    /// Library size m: number of distinct files.
    pub library: usize,
    /// Size m0 of the sliding popular set; cluster k's ranking is the
    /// base ranking cyclically shifted by `popularity_shift(k)`.
    pub popular_files: usize,
    /// Per-user cache size M, in files.
    pub user_cache: usize,
    /// Per-cluster cache size N, in files.
    pub cluster_cache: usize,
    /// Popularity skew exponent beta >= 0 (0 = uniform).
    pub beta: f64,
    /// Mean file size in bits.
    pub mean_file_size: f64,
    /// Per-cluster request arrival rates, length K.
    pub arrival_rates: Vec<f64>,
    /// In-cluster device-to-device rate R_D.
    pub d2d_rate: f64,
    /// Aggregate cellular rate shared by all relayed clusters.
    pub cell_rate: f64,
    /// Effective per-cluster cellular rate (fixed-average model).
    pub cell_rate_avg: f64,
    /// Effective per-cluster backhaul rate.
    pub backhaul_rate_avg: f64,
    /// Transmit power of a device-to-device sender, watts.
    pub local_power: f64,
    /// Transmit power of the cellular relay, watts.
    pub remote_power: f64,
    /// Additive constant in the sum-throughput bound, as a multiple of
    /// the in-cluster rate.
    pub k1_rate_ratio: f64,
    /// Scale factor in the cluster-size regime y = rho_scale * m^gamma.
    pub rho_scale: f64,
}

/// Non-fatal configuration oddities surfaced by [`SystemParams::warnings`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Warning {
    /// Every user can cache the whole library; caching is trivial.
    UserCacheCoversLibrary { user_cache: usize, library: usize },
    /// A cluster cache can hold the whole library; remote and backhaul
    /// traffic vanish under canonical placements.
    ClusterCacheCoversLibrary { cluster_cache: usize, library: usize },
    /// More clusters than users; cluster size floors to zero.
    EmptyClusters { users: usize, clusters: usize },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::UserCacheCoversLibrary { user_cache, library } => write!(
                f,
                "user cache M = {user_cache} covers the library of {library} files"
            ),
            Warning::ClusterCacheCoversLibrary { cluster_cache, library } => write!(
                f,
                "cluster cache N = {cluster_cache} covers the library of {library} files"
            ),
            Warning::EmptyClusters { users, clusters } => {
                write!(f, "{clusters} clusters share only {users} users")
            }
        }
    }
}

impl SystemParams {
    pub fn builder() -> SystemParamsBuilder {
        SystemParamsBuilder::default()
    }

    /// Users per cluster, y = floor(n / K).
    pub fn users_per_cluster(&self) -> usize {
        self.users / self.clusters
    }

    /// Popularity shift s_k = floor((k-1) m0 / k) of cluster k (1-based).
    ///
    /// s_1 = 0; the shift grows toward m0 as k grows, so neighbouring
    /// clusters have staggered, partially overlapping popular sets.
    pub fn popularity_shift(&self, k: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.clusters);
        (k - 1) * self.popular_files / k
    }

    /// Sum of the per-cluster arrival rates.
    pub fn total_arrival_rate(&self) -> f64 {
        self.arrival_rates.iter().sum()
    }

    /// Hard validation; returns the first offending field.
    pub fn validate(&self) -> Result<()> {
        fn bad(msg: String) -> Result<()> {
            Err(Error::InvalidParams(msg))
        }
        if self.users == 0 {
            return bad("users must be >= 1".into());
        }
        if self.clusters == 0 {
            return bad("clusters must be >= 1".into());
        }
        if self.library == 0 {
            return bad("library must hold at least one file".into());
        }
        if self.popular_files > self.library {
            return bad(format!(
                "popular_files = {} exceeds library = {}",
                self.popular_files, self.library
            ));
        }
        if !self.beta.is_finite() || self.beta < 0.0 {
            return bad(format!("beta = {} must be finite and >= 0", self.beta));
        }
        if !(self.mean_file_size > 0.0) || !self.mean_file_size.is_finite() {
            return bad(format!(
                "mean_file_size = {} must be positive",
                self.mean_file_size
            ));
        }
        if self.arrival_rates.len() != self.clusters {
            return Err(Error::DimensionMismatch(format!(
                "{} arrival rates for {} clusters",
                self.arrival_rates.len(),
                self.clusters
            )));
        }
        for (i, &l) in self.arrival_rates.iter().enumerate() {
            if !l.is_finite() || l < 0.0 {
                return bad(format!("arrival rate for cluster {} = {l}", i + 1));
            }
        }
        for (name, r) in [
            ("d2d_rate", self.d2d_rate),
            ("cell_rate", self.cell_rate),
            ("cell_rate_avg", self.cell_rate_avg),
            ("backhaul_rate_avg", self.backhaul_rate_avg),
        ] {
            if !(r > 0.0) || !r.is_finite() {
                return bad(format!("{name} = {r} must be positive"));
            }
        }
        // The mode hierarchy only makes sense when local beats remote
        // beats backhaul; anything else silently inverts every gain.
        if !(self.d2d_rate > self.cell_rate_avg && self.cell_rate_avg > self.backhaul_rate_avg) {
            return bad(format!(
                "rate ordering violated: need d2d > cell_avg > backhaul_avg, got {} / {} / {}",
                self.d2d_rate, self.cell_rate_avg, self.backhaul_rate_avg
            ));
        }
        for (name, p) in [("local_power", self.local_power), ("remote_power", self.remote_power)]
        {
            if !p.is_finite() || p < 0.0 {
                return bad(format!("{name} = {p} must be >= 0"));
            }
        }
        if !self.k1_rate_ratio.is_finite() || self.k1_rate_ratio < 0.0 {
            return bad(format!("k1_rate_ratio = {}", self.k1_rate_ratio));
        }
        if !(self.rho_scale > 0.0) || !self.rho_scale.is_finite() {
            return bad(format!("rho_scale = {}", self.rho_scale));
        }
        Ok(())
    }

    /// Oddities worth surfacing without refusing to run.
    pub fn warnings(&self) -> Vec<Warning> {
        let mut w = Vec::new();
        if self.user_cache >= self.library {
            w.push(Warning::UserCacheCoversLibrary {
                user_cache: self.user_cache,
                library: self.library,
            });
        }
        if self.cluster_cache >= self.library {
            w.push(Warning::ClusterCacheCoversLibrary {
                cluster_cache: self.cluster_cache,
                library: self.library,
            });
        }
        if self.clusters > self.users {
            w.push(Warning::EmptyClusters { users: self.users, clusters: self.clusters });
        }
        w
    }
}

/// Builder with the derivable fields defaulted.
///
/// Required: users, clusters, library, popular_files, user_cache, beta,
/// mean_file_size, arrival rates, and the three effective link rates.
/// Defaults: cluster_cache = users_per_cluster * user_cache, cell_rate =
/// cell_rate_avg, powers = 0, k1_rate_ratio = cell_rate_avg / d2d_rate,
/// rho_scale = 1.
#[derive(Debug, Clone, Default)]
pub struct SystemParamsBuilder {
    users: Option<usize>,
    clusters: Option<usize>,
    library: Option<usize>,
    popular_files: Option<usize>,
    user_cache: Option<usize>,
    cluster_cache: Option<usize>,
    beta: Option<f64>,
    mean_file_size: Option<f64>,
    arrival_rates: Option<Vec<f64>>,
    d2d_rate: Option<f64>,
    cell_rate: Option<f64>,
    cell_rate_avg: Option<f64>,
    backhaul_rate_avg: Option<f64>,
    local_power: Option<f64>,
    remote_power: Option<f64>,
    k1_rate_ratio: Option<f64>,
    rho_scale: Option<f64>,
    uniform_rate: Option<f64>,
}

macro_rules! setter {
    ($name:ident, $ty:ty) => {
        pub fn $name(mut self, v: $ty) -> Self {
            self.$name = Some(v);
            self
        }
    };
}

impl SystemParamsBuilder {
    setter!(users, usize);
    setter!(clusters, usize);
    setter!(library, usize);
    setter!(popular_files, usize);
    setter!(user_cache, usize);
    setter!(cluster_cache, usize);
    setter!(beta, f64);
    setter!(mean_file_size, f64);
    setter!(d2d_rate, f64);
    setter!(cell_rate, f64);
    setter!(cell_rate_avg, f64);
    setter!(backhaul_rate_avg, f64);
    setter!(local_power, f64);
    setter!(remote_power, f64);
    setter!(k1_rate_ratio, f64);
    setter!(rho_scale, f64);

    /// Per-cluster arrival rates, one entry per cluster. Overrides any
    /// earlier `arrival_rate_uniform` call, and vice versa.
    pub fn arrival_rates(mut self, rates: Vec<f64>) -> Self {
        self.arrival_rates = Some(rates);
        self.uniform_rate = None;
        self
    }

    /// The same arrival rate for every cluster.
    pub fn arrival_rate_uniform(mut self, rate: f64) -> Self {
        self.uniform_rate = Some(rate);
        self.arrival_rates = None;
        self
    }

    pub fn build(self) -> Result<SystemParams> {
        fn req<T>(v: Option<T>, name: &str) -> Result<T> {
            v.ok_or_else(|| Error::InvalidParams(format!("missing field: {name}")))
        }
        let users = req(self.users, "users")?;
        let clusters = req(self.clusters, "clusters")?;
        let library = req(self.library, "library")?;
        let popular_files = req(self.popular_files, "popular_files")?;
        let user_cache = req(self.user_cache, "user_cache")?;
        let beta = req(self.beta, "beta")?;
        let mean_file_size = req(self.mean_file_size, "mean_file_size")?;
        let d2d_rate = req(self.d2d_rate, "d2d_rate")?;
        let cell_rate_avg = req(self.cell_rate_avg, "cell_rate_avg")?;
        let backhaul_rate_avg = req(self.backhaul_rate_avg, "backhaul_rate_avg")?;
        let arrival_rates = match (self.arrival_rates, self.uniform_rate) {
            (Some(v), _) => v,
            (None, Some(r)) => vec![r; clusters],
            (None, None) => return req(None, "arrival_rates"),
        };
        let cluster_cache =
            self.cluster_cache.unwrap_or((users / clusters.max(1)) * user_cache);
        let params = SystemParams {
            users,
            clusters,
            library,
            popular_files,
            user_cache,
            cluster_cache,
            beta,
            mean_file_size,
            arrival_rates,
            d2d_rate,
            cell_rate: self.cell_rate.unwrap_or(cell_rate_avg),
            cell_rate_avg,
            backhaul_rate_avg,
            local_power: self.local_power.unwrap_or(0.0),
            remote_power: self.remote_power.unwrap_or(0.0),
            k1_rate_ratio: self.k1_rate_ratio.unwrap_or(cell_rate_avg / d2d_rate),
            rho_scale: self.rho_scale.unwrap_or(1.0),
        };
        params.validate()?;
        Ok(params)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> SystemParamsBuilder {
        SystemParams::builder()
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
    }

    #[test]
    fn builder_defaults() {
        let p = base().build().unwrap();
        assert_eq!(p.users_per_cluster(), 5);
        assert_eq!(p.cluster_cache, 20); // y * M
        assert_eq!(p.cell_rate, 50e6);
        assert!((p.k1_rate_ratio - 50.0 / 120.0).abs() < 1e-15);
        assert_eq!(p.arrival_rates, vec![0.5; 5]);
        assert!(p.warnings().is_empty());
    }

    #[test]
    fn shift_sequence() {
        let p = base().build().unwrap();
        let shifts: Vec<usize> = (1..=5).map(|k| p.popularity_shift(k)).collect();
        assert_eq!(shifts, vec![0, 30, 40, 45, 48]);
    }

    #[test]
    fn rejects_inverted_rate_order() {
        let err = base().backhaul_rate_avg(200e6).build().unwrap_err();
        assert!(matches!(err, Error::InvalidParams(_)), "{err}");
    }

    #[test]
    fn rejects_popular_set_larger_than_library() {
        let err = base().popular_files(200).build().unwrap_err();
        assert!(err.to_string().contains("popular_files"));
    }

    #[test]
    fn rejects_arrival_rate_length_mismatch() {
        let err = base().arrival_rates(vec![0.5; 3]).build().unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn warns_when_caches_cover_library() {
        let p = base()
            .library(10)
            .popular_files(6)
            .user_cache(10)
            .cluster_cache(20)
            .build()
            .unwrap();
        let w = p.warnings();
        assert_eq!(w.len(), 2, "{w:?}");
    }
}
