//! Scenario execution: one placement per scheme per grid point, the
//! analytic pipeline plus optional simulation, rows buffered in grid
//! order and written once per file.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use coopcache::{
    cooperation_gain, cpf_placement, delay_report, energy_per_cluster, greedy_caching,
    network_rates, outage_report, random_placement, scaling_bound, simulate_network,
    throughput_report, throughput_vs_cluster_size, zipf_popularity, BaselinePolicy,
    CachePlacement, Error, Objective, PopularityMatrix, ServiceModel, SimConfig, SystemParams,
};

use crate::scenario::{Scenario, Scheme, SweepVar};

struct Csv {
    name: &'static str,
    header: &'static str,
    rows: Vec<String>,
}

impl Csv {
    fn new(name: &'static str, header: &'static str) -> Self {
        Csv { name, header, rows: Vec::new() }
    }

    fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(self.name);
        let mut text = String::from(self.header);
        text.push('\n');
        for r in &self.rows {
            text.push_str(r);
            text.push('\n');
        }
        fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(path)
    }
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

fn is_instability(e: &Error) -> bool {
    matches!(
        e,
        Error::Unstable { .. } | Error::UnstableCluster { .. } | Error::UnstableBaseline(_)
    )
}

/// Analytic outcome of one placement at one grid point.
struct Point {
    delay: Option<f64>,
    /// Network per-request throughput: sum of the per-cluster residuals.
    throughput: Option<f64>,
    stable: bool,
}

fn eval_placement(
    c: &CachePlacement,
    pop: &PopularityMatrix,
    p: &SystemParams,
    model: ServiceModel,
) -> Result<Point> {
    let rates = network_rates(c, pop, p, model)?;
    let reports: Vec<_> = rates.iter().map(|r| throughput_report(r, p)).collect();
    let throughput = reports
        .iter()
        .all(|t| t.stable)
        .then(|| reports.iter().map(|t| t.per_request_throughput).sum());
    match delay_report(&rates) {
        Ok(rep) => Ok(Point { delay: Some(rep.network), throughput, stable: true }),
        Err(e) if is_instability(&e) => Ok(Point { delay: None, throughput, stable: false }),
        Err(e) => Err(e.into()),
    }
}

/// Per-scheme outcome, random placements averaged over replications.
struct SchemePoint {
    delay: Option<f64>,
    throughput: Option<f64>,
    stable: bool,
    sim: Option<(f64, f64)>,
}

struct Ctx<'a> {
    scenario: &'a Scenario,
    objective: Objective,
    baseline: BaselinePolicy,
    model: ServiceModel,
    rc_replications: u64,
    sim: Option<SimConfig>,
}

impl<'a> Ctx<'a> {
    fn new(scenario: &'a Scenario) -> Self {
        let run = scenario.file.scenario.as_ref();
        Ctx {
            scenario,
            objective: run
                .and_then(|r| r.objective)
                .map_or(Objective::MpsqDelay, Into::into),
            baseline: run
                .and_then(|r| r.baseline)
                .map_or(BaselinePolicy::Strict, Into::into),
            model: run
                .and_then(|r| r.service_model)
                .map_or(ServiceModel::FixedAverage, Into::into),
            rc_replications: run.and_then(|r| r.rc_replications).unwrap_or(50),
            sim: scenario.file.sim.as_ref().map(|s| s.to_config()),
        }
    }

    fn placements(
        &self,
        scheme: Scheme,
        p: &SystemParams,
        pop: &PopularityMatrix,
    ) -> Result<Vec<CachePlacement>> {
        Ok(match scheme {
            Scheme::Cpf => vec![cpf_placement(p, pop)],
            Scheme::Gca => {
                let tr = greedy_caching(p, pop, self.objective, self.model, self.baseline)?;
                vec![tr.placement]
            }
            Scheme::Rc => (0..self.rc_replications)
                .map(|seed| random_placement(p, seed))
                .collect(),
            Scheme::Custom => vec![self.scenario.load_placement(p)?],
        })
    }

    fn eval_scheme(
        &self,
        scheme: Scheme,
        p: &SystemParams,
        pop: &PopularityMatrix,
    ) -> Result<SchemePoint> {
        let placements = match self.placements(scheme, p, pop) {
            Ok(v) => v,
            // a scheme that cannot even build a placement at this load
            // is an unstable grid point, not a fatal error
            Err(e) if e.downcast_ref::<Error>().map_or(false, is_instability) => {
                return Ok(SchemePoint {
                    delay: None,
                    throughput: None,
                    stable: false,
                    sim: None,
                })
            }
            Err(e) => return Err(e),
        };
        let mut points = Vec::with_capacity(placements.len());
        for c in &placements {
            points.push(eval_placement(c, pop, p, self.model)?);
        }
        let stable = points.iter().all(|pt| pt.stable);
        let n = points.len() as f64;
        let delay = stable
            .then(|| points.iter().map(|pt| pt.delay.unwrap()).sum::<f64>() / n);
        let throughput = points
            .iter()
            .all(|pt| pt.throughput.is_some())
            .then(|| points.iter().map(|pt| pt.throughput.unwrap()).sum::<f64>() / n);
        let sim = match (&self.sim, stable) {
            (Some(cfg), true) => {
                let mut mean = 0.0;
                let mut var = 0.0;
                for (i, c) in placements.iter().enumerate() {
                    let cfg_i = SimConfig { seed: cfg.seed.wrapping_add(i as u64), ..*cfg };
                    let rep = simulate_network(c, pop, p, self.model, &cfg_i)?;
                    mean += rep.network_delay;
                    var += rep.ci95_half_width.powi(2);
                }
                Some((mean / n, var.sqrt() / n))
            }
            _ => None,
        };
        Ok(SchemePoint { delay, throughput, stable, sim })
    }
}

fn with_beta(base: &SystemParams, beta: f64) -> Result<SystemParams> {
    let mut p = base.clone();
    p.beta = beta;
    p.validate()?;
    Ok(p)
}

fn with_n_cache(base: &SystemParams, n: usize) -> Result<SystemParams> {
    let mut p = base.clone();
    p.cluster_cache = n;
    p.validate()?;
    Ok(p)
}

fn with_lambda(base: &SystemParams, lambda: f64) -> Result<SystemParams> {
    let mut p = base.clone();
    p.arrival_rates = vec![lambda; p.clusters];
    p.validate()?;
    Ok(p)
}

/// Regroups n users into clusters of y, capping the cluster cache at
/// the library size; needs a uniform arrival rate.
fn with_cluster_size(base: &SystemParams, y: usize) -> Result<SystemParams> {
    let rate = base.arrival_rates[0];
    if base.arrival_rates.iter().any(|&r| r != rate) {
        bail!("a y sweep needs a uniform arrival rate");
    }
    let mut p = base.clone();
    p.clusters = base.users / y;
    p.cluster_cache = (base.user_cache * y).min(base.library);
    p.arrival_rates = vec![rate; p.clusters];
    p.validate()?;
    Ok(p)
}

pub struct RunReport {
    pub files: Vec<(PathBuf, usize)>,
    pub notes: Vec<String>,
}

impl RunReport {
    pub fn print(&self) {
        for (path, rows) in &self.files {
            println!("wrote {} ({} rows)", path.display(), rows);
        }
        for n in &self.notes {
            println!("{n}");
        }
    }
}

pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunReport> {
    if scenario.file.scenario.is_none() && scenario.file.scaling.is_none() {
        bail!("nothing to run: add a [scenario] sweep or a [scaling] section");
    }
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create {}", out_dir.display()))?;
    let base = scenario.params();
    let ctx = Ctx::new(scenario);
    let mut files = Vec::new();
    let mut notes = Vec::new();

    if let Some(run) = &scenario.file.scenario {
        let schemes: Vec<Scheme> =
            run.schemes.clone().unwrap_or_else(|| vec![Scheme::Cpf]);
        let mut unstable_points = 0usize;
        match run.sweep {
            SweepVar::Beta | SweepVar::Lambda => {
                let sweeping_beta = run.sweep == SweepVar::Beta;
                let (delay_name, delay_header, thr_name) = if sweeping_beta {
                    (
                        "delay_vs_beta.csv",
                        "scheme,beta,n_cache,analytic_delay_s,sim_delay_s,sim_ci95_s,stable",
                        "throughput_vs_beta.csv",
                    )
                } else {
                    (
                        "delay_vs_lambda.csv",
                        "scheme,lambda,n_cache,analytic_delay_s,sim_delay_s,sim_ci95_s,stable",
                        "throughput_vs_lambda.csv",
                    )
                };
                let mut delay_csv = Csv::new(delay_name, delay_header);
                let mut thr_csv =
                    Csv::new(thr_name, "scheme,x,per_request_throughput_bps");
                let n_values =
                    run.n_cache.clone().unwrap_or_else(|| vec![base.cluster_cache]);
                for &scheme in &schemes {
                    for &n in &n_values {
                        for x in run.grid.iter().map(|g| g.as_f64()) {
                            let p = if sweeping_beta {
                                with_n_cache(&with_beta(&base, x)?, n)?
                            } else {
                                with_n_cache(&with_lambda(&base, x)?, n)?
                            };
                            let pop = zipf_popularity(&p)?;
                            let pt = ctx.eval_scheme(scheme, &p, &pop)?;
                            if !pt.stable {
                                unstable_points += 1;
                            }
                            let (sim_d, sim_ci) = match pt.sim {
                                Some((d, ci)) => (Some(d), Some(ci)),
                                None => (None, None),
                            };
                            delay_csv.rows.push(format!(
                                "{},{},{},{},{},{},{}",
                                scheme.tag(),
                                fmt(x),
                                n,
                                fmt_opt(pt.delay),
                                fmt_opt(sim_d),
                                fmt_opt(sim_ci),
                                pt.stable
                            ));
                            if n == base.cluster_cache {
                                thr_csv.rows.push(format!(
                                    "{},{},{}",
                                    scheme.tag(),
                                    fmt(x),
                                    fmt_opt(pt.throughput)
                                ));
                            }
                        }
                    }
                }
                files.push((delay_csv.write(out_dir)?, delay_csv.rows.len()));
                files.push((thr_csv.write(out_dir)?, thr_csv.rows.len()));
            }
            SweepVar::NCache => {
                let scheme = schemes[0];
                let mut gain_csv = Csv::new(
                    "gain_vs_cache.csv",
                    "n_cache,delay_coop_s,delay_noncoop_s,gain,baseline_unstable",
                );
                let mut energy_csv = Csv::new(
                    "energy_vs_cache.csv",
                    "n_cache,e_lc_j_per_s,e_rc_j_per_s,gain",
                );
                let mut thr_csv = Csv::new(
                    "throughput_vs_cache.csv",
                    "scheme,x,per_request_throughput_bps",
                );
                let mut gains: Vec<f64> = Vec::new();
                for g in &run.grid {
                    let n = g.as_usize()?;
                    let p = with_n_cache(&base, n)?;
                    let pop = zipf_popularity(&p)?;
                    // gain and energy describe a single placement; the
                    // validator rejects multi-scheme n-cache sweeps
                    let c = &ctx.placements(scheme, &p, &pop)?[0];
                    let row = match cooperation_gain(c, &pop, &p, ctx.model) {
                        Ok(rep) => {
                            gains.push(rep.gain);
                            (
                                Some(rep.delay_coop),
                                rep.delay_noncoop,
                                Some(rep.gain),
                                rep.baseline_unstable,
                            )
                        }
                        Err(e) if is_instability(&e) => {
                            unstable_points += 1;
                            (None, None, None, true)
                        }
                        Err(e) => return Err(e.into()),
                    };
                    gain_csv.rows.push(format!(
                        "{},{},{},{},{}",
                        n,
                        fmt_opt(row.0),
                        fmt_opt(row.1),
                        fmt_opt(row.2),
                        row.3
                    ));
                    let rates = network_rates(c, &pop, &p, ctx.model)?;
                    let k = rates.len() as f64;
                    let (mut e_lc, mut e_rc) = (0.0, 0.0);
                    for r in &rates {
                        let e = energy_per_cluster(r, &p);
                        e_lc += e.e_lc_per_s / k;
                        e_rc += e.e_rc_per_s / k;
                    }
                    energy_csv.rows.push(format!(
                        "{},{},{},{}",
                        n,
                        fmt(e_lc),
                        fmt(e_rc),
                        fmt_opt(row.2)
                    ));
                    let pt = ctx.eval_scheme(scheme, &p, &pop)?;
                    thr_csv.rows.push(format!(
                        "{},{},{}",
                        scheme.tag(),
                        n,
                        fmt_opt(pt.throughput)
                    ));
                }
                files.push((gain_csv.write(out_dir)?, gain_csv.rows.len()));
                files.push((energy_csv.write(out_dir)?, energy_csv.rows.len()));
                files.push((thr_csv.write(out_dir)?, thr_csv.rows.len()));
                if let (Some(lo), Some(hi)) = (
                    gains.iter().cloned().reduce(f64::min),
                    gains.iter().cloned().reduce(f64::max),
                ) {
                    notes.push(format!("gain range {lo:.4}..{hi:.4}"));
                }
            }
            SweepVar::Y => {
                let mut outage_csv = Csv::new(
                    "outage_vs_y.csv",
                    "y,p_outage_coop,p_outage_noncoop,p_outage_noncoop_approx",
                );
                let mut skipped = Vec::new();
                for g in &run.grid {
                    let y = g.as_usize()?;
                    if y == 0 || base.users % y != 0 {
                        skipped.push(y);
                        continue;
                    }
                    let p = with_cluster_size(&base, y)?;
                    let pop = zipf_popularity(&p)?;
                    let rep = outage_report(&p, &pop);
                    outage_csv.rows.push(format!(
                        "{},{},{},{}",
                        y,
                        fmt(rep.p_outage_coop),
                        fmt(rep.p_outage_noncoop),
                        fmt_opt(rep.p_outage_noncoop_approx)
                    ));
                }
                files.push((outage_csv.write(out_dir)?, outage_csv.rows.len()));
                if !skipped.is_empty() {
                    notes.push(format!(
                        "skipped y values not dividing the user count: {skipped:?}"
                    ));
                }
            }
        }
        if unstable_points > 0 {
            notes.push(format!("unstable grid points: {unstable_points}"));
        }
    }

    if let Some(sc) = &scenario.file.scaling {
        if let Some(grid) = &sc.m_grid {
            let m_grid: Vec<f64> = grid.iter().map(|g| g.as_f64()).collect();
            let mut csv =
                Csv::new("scaling_vs_m.csv", "m,gamma,t_sum_bound_bps,loglog_slope");
            for &beta in &sc.betas {
                for g in grid {
                    let m = g.as_usize()?;
                    let mut p = with_beta(&base, beta)?;
                    p.library = m;
                    p.validate()?;
                    let rep = scaling_bound(&p, &m_grid)?;
                    csv.rows.push(format!(
                        "{},{},{},{}",
                        m,
                        fmt(rep.gamma),
                        fmt(rep.t_sum_upper),
                        fmt(rep.loglog_slope)
                    ));
                }
            }
            files.push((csv.write(out_dir)?, csv.rows.len()));
        }
        if let Some(grid) = &sc.y_grid {
            let y_grid: Vec<usize> =
                grid.iter().map(|g| g.as_usize()).collect::<Result<_>>()?;
            let mut csv = Csv::new(
                "tsum_vs_y.csv",
                "beta,y,expected_good_clusters,t_sum_bound_bps,per_user_bps",
            );
            for &beta in &sc.betas {
                let p = with_beta(&base, beta)?;
                let (points, argmax) = throughput_vs_cluster_size(&p, &y_grid)?;
                for pt in &points {
                    csv.rows.push(format!(
                        "{},{},{},{},{}",
                        fmt(beta),
                        pt.y,
                        fmt(pt.expected_good_clusters),
                        fmt(pt.t_sum_bound),
                        fmt(pt.per_user)
                    ));
                }
                notes.push(format!(
                    "beta {beta}: bound maximized at y = {}",
                    points[argmax].y
                ));
            }
            files.push((csv.write(out_dir)?, csv.rows.len()));
        }
    }

    Ok(RunReport { files, notes })
}
