//! Scenario files: TOML sections with `#` comments. Rates are given in
//! Mbps and file sizes in Mbit at this boundary only; everything is
//! converted to bits and bits/second before it reaches the library.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coopcache::{
    BaselinePolicy, CachePlacement, Discipline, GroundSetElement, Objective, ServiceModel,
    SimConfig, SystemParams,
};
use serde::Deserialize;

/// A grid entry: TOML integers and floats are both accepted.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum Num {
    I(i64),
    F(f64),
}

impl Num {
    pub fn as_f64(self) -> f64 {
        match self {
            Num::I(i) => i as f64,
            Num::F(f) => f,
        }
    }

    pub fn as_usize(self) -> Result<usize> {
        match self {
            Num::I(i) if i >= 0 => Ok(i as usize),
            _ => bail!("expected a nonnegative integer, got {:?}", self),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub params: ParamsSection,
    pub scenario: Option<RunSection>,
    pub sim: Option<SimSection>,
    pub scaling: Option<ScalingSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub users: usize,
    pub clusters: usize,
    pub library: usize,
    pub popular_files: usize,
    pub user_cache: usize,
    pub cluster_cache: Option<usize>,
    pub beta: f64,
    pub mean_file_size_mbit: f64,
    /// Uniform per-cluster arrival rate, requests per second.
    pub arrival_rate: Option<f64>,
    /// Explicit per-cluster rates; mutually exclusive with arrival_rate.
    pub arrival_rates: Option<Vec<f64>>,
    pub d2d_rate_mbps: f64,
    pub cell_rate_mbps: f64,
    pub backhaul_rate_mbps: f64,
    /// Total cellular rate before sharing; defaults to cell_rate_mbps.
    pub cell_rate_total_mbps: Option<f64>,
    pub local_power_w: Option<f64>,
    pub remote_power_w: Option<f64>,
    pub k1_rate_ratio: Option<f64>,
    pub rho_scale: Option<f64>,
}

impl ParamsSection {
    pub fn build(&self) -> Result<SystemParams> {
        let mut b = SystemParams::builder()
            .users(self.users)
            .clusters(self.clusters)
            .library(self.library)
            .popular_files(self.popular_files)
            .user_cache(self.user_cache)
            .beta(self.beta)
            .mean_file_size(self.mean_file_size_mbit * 1e6)
            .d2d_rate(self.d2d_rate_mbps * 1e6)
            .cell_rate_avg(self.cell_rate_mbps * 1e6)
            .backhaul_rate_avg(self.backhaul_rate_mbps * 1e6);
        match (&self.arrival_rates, self.arrival_rate) {
            (Some(_), Some(_)) => {
                bail!("set either arrival_rate or arrival_rates, not both")
            }
            (Some(v), None) => b = b.arrival_rates(v.clone()),
            (None, Some(r)) => b = b.arrival_rate_uniform(r),
            (None, None) => bail!("missing key: arrival_rate (or arrival_rates)"),
        }
        if let Some(n) = self.cluster_cache {
            b = b.cluster_cache(n);
        }
        if let Some(r) = self.cell_rate_total_mbps {
            b = b.cell_rate(r * 1e6);
        }
        if let Some(p) = self.local_power_w {
            b = b.local_power(p);
        }
        if let Some(p) = self.remote_power_w {
            b = b.remote_power(p);
        }
        if let Some(k) = self.k1_rate_ratio {
            b = b.k1_rate_ratio(k);
        }
        if let Some(r) = self.rho_scale {
            b = b.rho_scale(r);
        }
        b.build().context("invalid [params]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Cpf,
    Rc,
    Gca,
    Custom,
}

impl Scheme {
    pub fn tag(self) -> &'static str {
        match self {
            Scheme::Cpf => "cpf",
            Scheme::Rc => "rc",
            Scheme::Gca => "gca",
            Scheme::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepVar {
    Beta,
    NCache,
    Lambda,
    Y,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Placement schemes to sweep; y sweeps ignore this.
    pub schemes: Option<Vec<Scheme>>,
    pub sweep: SweepVar,
    pub grid: Vec<Num>,
    /// Cache sizes evaluated per grid point of a beta or lambda sweep.
    pub n_cache: Option<Vec<usize>>,
    pub rc_replications: Option<u64>,
    /// Placement for the custom scheme, relative to the scenario file.
    pub placement_file: Option<PathBuf>,
    pub objective: Option<ObjectiveKey>,
    pub baseline: Option<BaselineKey>,
    pub service_model: Option<ServiceModelKey>,
    /// Output directory; overridden by --out, falls back to
    /// COOPCACHE_OUT_DIR, then ./out.
    pub outputs: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKey {
    MpsqDelay,
    AvgDownloadTime,
}

impl From<ObjectiveKey> for Objective {
    fn from(k: ObjectiveKey) -> Objective {
        match k {
            ObjectiveKey::MpsqDelay => Objective::MpsqDelay,
            ObjectiveKey::AvgDownloadTime => Objective::AvgDownloadTime,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKey {
    Strict,
    FallbackToDownloadTime,
}

impl From<BaselineKey> for BaselinePolicy {
    fn from(k: BaselineKey) -> BaselinePolicy {
        match k {
            BaselineKey::Strict => BaselinePolicy::Strict,
            BaselineKey::FallbackToDownloadTime => BaselinePolicy::FallbackToDownloadTime,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ServiceModelKey {
    FixedAverage,
    SharedByMean,
}

impl From<ServiceModelKey> for ServiceModel {
    fn from(k: ServiceModelKey) -> ServiceModel {
        match k {
            ServiceModelKey::FixedAverage => ServiceModel::FixedAverage,
            ServiceModelKey::SharedByMean => ServiceModel::SharedByMean,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub num_requests: Option<usize>,
    pub batches: Option<usize>,
    pub seed: Option<u64>,
    pub warmup_fraction: Option<f64>,
    pub discipline: Option<DisciplineKey>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisciplineKey {
    Fifo,
    ProcessorSharing,
}

impl SimSection {
    pub fn to_config(&self) -> SimConfig {
        let d = SimConfig::default();
        SimConfig {
            num_requests: self.num_requests.unwrap_or(d.num_requests),
            batch_count: self.batches.unwrap_or(d.batch_count),
            seed: self.seed.unwrap_or(d.seed),
            warmup_fraction: self.warmup_fraction.unwrap_or(d.warmup_fraction),
            discipline: match self.discipline {
                Some(DisciplineKey::Fifo) | None => Discipline::Fifo,
                Some(DisciplineKey::ProcessorSharing) => Discipline::ProcessorSharing,
            },
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    /// Popularity exponents evaluated independently.
    pub betas: Vec<f64>,
    /// Library sizes for the bound and its log-log slope.
    pub m_grid: Option<Vec<Num>>,
    /// Cluster sizes for the bound-vs-cluster-size curve.
    pub y_grid: Option<Vec<Num>>,
}

/// A parsed scenario plus the directory it came from (placement files
/// resolve against it).
pub struct Scenario {
    pub file: ScenarioFile,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read scenario {}", path.display()))?;
    let file: ScenarioFile = toml::from_str(&text)
        .with_context(|| format!("cannot parse scenario {}", path.display()))?;
    let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let s = Scenario { file, dir };
    s.validate()?;
    Ok(s)
}

impl Scenario {
    fn validate(&self) -> Result<()> {
        self.file.params.build()?;
        if let Some(run) = &self.file.scenario {
            if run.grid.is_empty() {
                bail!("[scenario] grid is empty");
            }
            let vals: Vec<f64> = run.grid.iter().map(|n| n.as_f64()).collect();
            if vals.windows(2).any(|w| w[0] >= w[1]) {
                bail!("[scenario] grid must be strictly increasing");
            }
            match run.sweep {
                SweepVar::Y => {
                    for n in &run.grid {
                        n.as_usize().context("y grid entries must be integers")?;
                    }
                }
                SweepVar::NCache => {
                    for n in &run.grid {
                        n.as_usize().context("n_cache grid entries must be integers")?;
                    }
                    let schemes = run.schemes.as_deref().unwrap_or(&[Scheme::Cpf]);
                    if schemes.len() != 1 {
                        bail!("an n-cache sweep takes exactly one scheme");
                    }
                }
                SweepVar::Beta | SweepVar::Lambda => {}
            }
            if let Some(ns) = &run.n_cache {
                if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
                    bail!("[scenario] n_cache must be a strictly increasing list");
                }
                if run.sweep == SweepVar::NCache || run.sweep == SweepVar::Y {
                    bail!("n_cache list only applies to beta and lambda sweeps");
                }
            }
            let schemes = run.schemes.as_deref().unwrap_or(&[Scheme::Cpf]);
            if schemes.contains(&Scheme::Custom) && run.placement_file.is_none() {
                bail!("the custom scheme needs placement_file");
            }
        }
        if let Some(sc) = &self.file.scaling {
            if sc.betas.is_empty() {
                bail!("[scaling] betas is empty");
            }
            if sc.m_grid.is_none() && sc.y_grid.is_none() {
                bail!("[scaling] needs m_grid or y_grid");
            }
            if let Some(g) = &sc.m_grid {
                if g.len() < 2 {
                    bail!("[scaling] m_grid needs at least two points");
                }
            }
        }
        Ok(())
    }

    pub fn params(&self) -> SystemParams {
        // validated in load()
        self.file.params.build().expect("validated")
    }

    /// Loads the custom placement: a CSV of `cluster,file` pairs with
    /// a header line, indices 1-based.
    pub fn load_placement(&self, params: &SystemParams) -> Result<CachePlacement> {
        let run = self.file.scenario.as_ref().context("no [scenario] section")?;
        let rel = run.placement_file.as_ref().context("placement_file not set")?;
        let path = self.dir.join(rel);
        let text = fs::read_to_string(&path)
            .with_context(|| format!("cannot read placement {}", path.display()))?;
        let mut elements = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line == "cluster,file") {
                continue;
            }
            let (k, f) = line
                .split_once(',')
                .with_context(|| format!("{}:{}: expected cluster,file", path.display(), i + 1))?;
            elements.push(GroundSetElement {
                cluster: k.trim().parse().with_context(|| format!("line {}", i + 1))?,
                file: f.trim().parse().with_context(|| format!("line {}", i + 1))?,
            });
        }
        let c = CachePlacement::from_ground_set(params.clusters, params.library, elements)?;
        coopcache::validate_placement(&c, params)?;
        Ok(c)
    }
}

/// Output directory resolution: --out flag, then the scenario's
/// `outputs`, then COOPCACHE_OUT_DIR, then ./out.
pub fn resolve_out_dir(flag: Option<PathBuf>, scenario: Option<&Path>) -> PathBuf {
    flag.or_else(|| scenario.map(|p| p.to_path_buf()))
        .or_else(|| std::env::var_os("COOPCACHE_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}
