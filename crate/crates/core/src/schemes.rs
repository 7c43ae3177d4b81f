//! Cache placement schemes and their optimality machinery.
//!
//! Three placements are compared throughout: every cluster caching its
//! own most popular files (`cpf_placement`), uniform random caches
//! (`random_placement`), and a greedy placement built one slot at a
//! time against an objective (`greedy_caching`). The greedy guarantee
//! lives on two structural facts checked by `supermodularity_check`,
//! `monotonicity_check` and the matroid tools in [`crate::placement`]:
//! the objective decreases when anything is cached, with decreasing
//! returns, and the capacity constraint is a partition matroid. Small
//! instances can be enumerated outright with `brute_force_optimal` to
//! measure how close greedy lands.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::delay::{avg_download_time, network_delay};
use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::placement::{CachePlacement, GroundSetElement};
use crate::popularity::PopularityMatrix;
use crate::rates::ServiceModel;

/// What a placement is optimized against.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Objective {
    /// Stationary network mean delay of the multiclass serving queues.
    MpsqDelay,
    /// Popularity-weighted mean transfer time, no queueing.
    AvgDownloadTime,
}

/// Objective value of a placement; lower is better.
pub fn evaluate_objective(
    objective: Objective,
    c: &CachePlacement,
    pop: &PopularityMatrix,
    params: &SystemParams,
    model: ServiceModel,
) -> Result<f64> {
    match objective {
        Objective::MpsqDelay => network_delay(c, pop, params, model).map(|r| r.network),
        Objective::AvgDownloadTime => avg_download_time(c, pop, params),
    }
}

/// Each cluster caches the first min(N, m) ranks of its own ordering,
/// i.e. its N most popular files; rank order breaks ties, so at
/// exponent zero the cached set is still the cluster's shifted range.
pub fn cpf_placement(params: &SystemParams, pop: &PopularityMatrix) -> CachePlacement {
    let m = params.library;
    let n = params.cluster_cache.min(m);
    let mut c = CachePlacement::empty(params.clusters, m);
    for k in 1..=params.clusters {
        let s = pop.shift(k);
        for r in 0..n {
            c.insert(k, (s + r) % m + 1);
        }
    }
    c
}

/// Each cluster caches min(N, m) distinct files drawn uniformly,
/// independently across clusters. Deterministic in the seed.
pub fn random_placement(params: &SystemParams, seed: u64) -> CachePlacement {
    let m = params.library;
    let n = params.cluster_cache.min(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = CachePlacement::empty(params.clusters, m);
    for k in 1..=params.clusters {
        for i in rand::seq::index::sample(&mut rng, m, n) {
            c.insert(k, i + 1);
        }
    }
    c
}

/// What greedy does when the objective is undefined (saturated queues)
/// at the empty placement.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
pub enum BaselinePolicy {
    /// Refuse to run. The default.
    #[default]
    Strict,
    /// Swap the whole run to the download-time objective, which is
    /// defined at any load.
    FallbackToDownloadTime,
}

/// One greedy step: the slot cached and the objective reduction it bought.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GreedyStep {
    pub cluster: usize,
    pub file: usize,
    /// Objective before the step minus after; seconds for both objectives.
    pub reduction: f64,
}

/// Full record of a greedy run.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyTrace {
    pub steps: Vec<GreedyStep>,
    pub placement: CachePlacement,
    pub initial_objective: f64,
    pub final_objective: f64,
    /// The objective actually optimized (differs from the request only
    /// after a configured fallback).
    pub objective_used: Objective,
}

/// Greedy placement: min(N, m) * K steps, each caching the uncached
/// (cluster, file) slot with the largest objective reduction among
/// clusters with spare capacity. Ties keep the lowest cluster, then
/// the lowest file. Zero-reduction slots are still cached; the
/// objectives never increase when something is added, so filling every
/// slot is free.
///
/// Candidates whose evaluation is unstable are skipped. An unstable
/// empty placement is an error under [`BaselinePolicy::Strict`].
pub fn greedy_caching(
    params: &SystemParams,
    pop: &PopularityMatrix,
    objective: Objective,
    model: ServiceModel,
    policy: BaselinePolicy,
) -> Result<GreedyTrace> {
    let m = params.library;
    let clusters = params.clusters;
    let n_eff = params.cluster_cache.min(m);
    let mut c = CachePlacement::empty(clusters, m);
    let mut objective_used = objective;
    let mut current = match evaluate_objective(objective, &c, pop, params, model) {
        Ok(v) => v,
        Err(Error::Unstable { .. } | Error::UnstableCluster { .. }) => match policy {
            BaselinePolicy::FallbackToDownloadTime
                if objective == Objective::MpsqDelay =>
            {
                objective_used = Objective::AvgDownloadTime;
                evaluate_objective(objective_used, &c, pop, params, model)?
            }
            _ => {
                return Err(Error::UnstableBaseline(
                    "the empty placement saturates the queues; lower the load or \
                     allow the download-time fallback"
                        .into(),
                ))
            }
        },
        Err(e) => return Err(e),
    };
    let initial_objective = current;
    let mut steps = Vec::with_capacity(n_eff * clusters);
    for _ in 0..n_eff * clusters {
        let mut best: Option<(f64, usize, usize)> = None;
        for k in 1..=clusters {
            if c.cluster_load(k) >= n_eff {
                continue;
            }
            for f in 1..=m {
                if c.is_cached(k, f) {
                    continue;
                }
                c.insert(k, f);
                if let Ok(v) = evaluate_objective(objective_used, &c, pop, params, model) {
                    // strict < keeps the earliest minimizer, which is the
                    // lowest (cluster, file) in this scan order
                    if best.map_or(true, |(bv, _, _)| v < bv) {
                        best = Some((v, k, f));
                    }
                }
                c.remove(k, f);
            }
        }
        let Some((value, k, f)) = best else {
            return Err(Error::UnstableBaseline(
                "no candidate slot evaluates to a stable system".into(),
            ));
        };
        c.insert(k, f);
        steps.push(GreedyStep { cluster: k, file: f, reduction: current - value });
        current = value;
    }
    Ok(GreedyTrace {
        steps,
        placement: c,
        initial_objective,
        final_objective: current,
        objective_used,
    })
}

const ENUMERATION_LIMIT: u128 = 1_000_000;

fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// All k-subsets of 1..=n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=k).collect();
    if k == 0 {
        return vec![vec![]];
    }
    loop {
        out.push(cur.clone());
        // advance the rightmost index that still has room
        let mut i = k;
        while i > 0 {
            i -= 1;
            if cur[i] < n - (k - 1 - i) {
                cur[i] += 1;
                for j in i + 1..k {
                    cur[j] = cur[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return out;
            }
        }
    }
}

/// Exhaustive optimum over all placements with full rows of min(N, m)
/// files per cluster. Full rows lose nothing: both objectives are
/// non-increasing under additions, so some full placement attains the
/// minimum. Rows are enumerated in lexicographic order and only strict
/// improvements are kept, so the returned optimum is the
/// lexicographically smallest one. Unstable placements are skipped.
///
/// Guarded: C(m, min(N, m))^K placements must not exceed 10^6.
pub fn brute_force_optimal(
    params: &SystemParams,
    pop: &PopularityMatrix,
    objective: Objective,
    model: ServiceModel,
) -> Result<(CachePlacement, f64)> {
    let m = params.library;
    let clusters = params.clusters;
    let n_eff = params.cluster_cache.min(m);
    let per_row = binomial(m, n_eff).unwrap_or(u128::MAX);
    let total = per_row
        .checked_pow(clusters as u32)
        .unwrap_or(u128::MAX);
    if total > ENUMERATION_LIMIT {
        return Err(Error::EnumerationTooLarge { placements: total, limit: ENUMERATION_LIMIT });
    }
    let row_combos = combinations(m, n_eff);
    let mut idx = vec![0usize; clusters];
    let mut best: Option<(f64, CachePlacement)> = None;
    loop {
        let mut c = CachePlacement::empty(clusters, m);
        for (k, &i) in idx.iter().enumerate() {
            for &f in &row_combos[i] {
                c.insert(k + 1, f);
            }
        }
        if let Ok(v) = evaluate_objective(objective, &c, pop, params, model) {
            if best.as_ref().map_or(true, |(bv, _)| v < *bv) {
                best = Some((v, c));
            }
        }
        // odometer, last cluster fastest
        let mut pos = clusters;
        loop {
            if pos == 0 {
                let Some((v, c)) = best else {
                    return Err(Error::UnstableBaseline(
                        "every full placement is unstable".into(),
                    ));
                };
                return Ok((c, v));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < row_combos.len() {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// One sampled chain that broke the property under test.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainViolation {
    pub base: Vec<GroundSetElement>,
    pub superset: Vec<GroundSetElement>,
    pub added: GroundSetElement,
    /// g(base + x) - g(base).
    pub margin_base: f64,
    /// g(superset + x) - g(superset). Equals `margin_base` in
    /// monotonicity reports, where base and superset coincide.
    pub margin_superset: f64,
}

/// Tally of a sampled structural check.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub samples: usize,
    /// Chains whose evaluations all succeeded.
    pub evaluated: usize,
    /// Chains dropped: an endpoint was unstable, or no slot with spare
    /// capacity existed.
    pub skipped: usize,
    pub violation_count: usize,
    /// Largest observed excess over the tolerance band (negative when
    /// the property held everywhere).
    pub worst_excess: f64,
    /// At most eight concrete counterexamples.
    pub counterexamples: Vec<ChainViolation>,
}

impl PropertyReport {
    fn new(samples: usize) -> Self {
        PropertyReport {
            samples,
            evaluated: 0,
            skipped: 0,
            violation_count: 0,
            worst_excess: f64::NEG_INFINITY,
            counterexamples: Vec::new(),
        }
    }

    fn record(&mut self, excess: f64, v: ChainViolation) {
        self.worst_excess = self.worst_excess.max(excess);
        if excess > 0.0 {
            self.violation_count += 1;
            if self.counterexamples.len() < 8 {
                self.counterexamples.push(v);
            }
        }
    }
}

// Recomputation noise across two O(K m) evaluations is ~1e-13 at
// second-scale objectives; 1e-9 relative separates it from real
// violations by four orders of magnitude.
fn tolerance(scale: f64) -> f64 {
    1e-9 * scale.abs().max(1.0)
}

fn random_row_sized_placement(
    rng: &mut ChaCha8Rng,
    clusters: usize,
    m: usize,
    n_eff: usize,
) -> CachePlacement {
    let mut c = CachePlacement::empty(clusters, m);
    for k in 1..=clusters {
        let size = rng.gen_range(0..=n_eff);
        for i in rand::seq::index::sample(rng, m, size) {
            c.insert(k, i + 1);
        }
    }
    c
}

fn addable_slots(c: &CachePlacement, n_eff: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for k in 1..=c.clusters() {
        if c.cluster_load(k) >= n_eff {
            continue;
        }
        for f in 1..=c.library() {
            if !c.is_cached(k, f) {
                out.push((k, f));
            }
        }
    }
    out
}

/// Samples random chains A subset-of B and a slot x addable to B, and
/// checks decreasing returns: g(A + x) - g(A) <= g(B + x) - g(B), up
/// to the noise tolerance. Chains with unstable endpoints are skipped
/// and counted.
pub fn supermodularity_check(
    params: &SystemParams,
    pop: &PopularityMatrix,
    objective: Objective,
    model: ServiceModel,
    samples: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = params.library;
    let clusters = params.clusters;
    let n_eff = params.cluster_cache.min(m);
    let mut report = PropertyReport::new(samples);
    for _ in 0..samples {
        let mut b = random_row_sized_placement(&mut rng, clusters, m, n_eff);
        let slots = addable_slots(&b, n_eff);
        let Some(&(k, f)) = slots.choose(&mut rng) else {
            report.skipped += 1;
            continue;
        };
        let mut a = CachePlacement::empty(clusters, m);
        for e in b.to_ground_set() {
            if rng.gen_bool(0.5) {
                a.insert(e.cluster, e.file);
            }
        }
        let corners = {
            let g_a = evaluate_objective(objective, &a, pop, params, model);
            a.insert(k, f);
            let g_ax = evaluate_objective(objective, &a, pop, params, model);
            a.remove(k, f);
            let g_b = evaluate_objective(objective, &b, pop, params, model);
            b.insert(k, f);
            let g_bx = evaluate_objective(objective, &b, pop, params, model);
            b.remove(k, f);
            (g_a, g_ax, g_b, g_bx)
        };
        let (Ok(g_a), Ok(g_ax), Ok(g_b), Ok(g_bx)) = corners else {
            report.skipped += 1;
            continue;
        };
        report.evaluated += 1;
        let margin_a = g_ax - g_a;
        let margin_b = g_bx - g_b;
        let excess = (margin_a - margin_b) - tolerance(g_a.max(g_bx));
        report.record(
            excess,
            ChainViolation {
                base: a.to_ground_set(),
                superset: b.to_ground_set(),
                added: GroundSetElement { cluster: k, file: f },
                margin_base: margin_a,
                margin_superset: margin_b,
            },
        );
    }
    Ok(report)
}

/// Samples random placements A and an addable slot x and checks that
/// caching never hurts: g(A + x) <= g(A), up to the noise tolerance.
pub fn monotonicity_check(
    params: &SystemParams,
    pop: &PopularityMatrix,
    objective: Objective,
    model: ServiceModel,
    samples: usize,
    seed: u64,
) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = params.library;
    let clusters = params.clusters;
    let n_eff = params.cluster_cache.min(m);
    let mut report = PropertyReport::new(samples);
    for _ in 0..samples {
        let mut a = random_row_sized_placement(&mut rng, clusters, m, n_eff);
        let slots = addable_slots(&a, n_eff);
        let Some(&(k, f)) = slots.choose(&mut rng) else {
            report.skipped += 1;
            continue;
        };
        let g_a = evaluate_objective(objective, &a, pop, params, model);
        a.insert(k, f);
        let g_ax = evaluate_objective(objective, &a, pop, params, model);
        a.remove(k, f);
        let (Ok(g_a), Ok(g_ax)) = (g_a, g_ax) else {
            report.skipped += 1;
            continue;
        };
        report.evaluated += 1;
        let margin = g_ax - g_a;
        let excess = margin - tolerance(g_a);
        let base = a.to_ground_set();
        report.record(
            excess,
            ChainViolation {
                superset: base.clone(),
                base,
                added: GroundSetElement { cluster: k, file: f },
                margin_base: margin,
                margin_superset: margin,
            },
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::popularity::zipf_popularity;

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
    fn cpf_caches_shifted_ranges() {
        let p = params(2, 108, 60, 20, 1.2);
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        for f in 1..=108 {
            assert_eq!(c.is_cached(1, f), f <= 20);
            assert_eq!(c.is_cached(2, f), (31..=50).contains(&f), "file {f}");
        }
    }

    #[test]
    fn cpf_single_cluster_uniform_is_first_files() {
        let p = params(1, 10, 0, 4, 0.0);
        let pop = zipf_popularity(&p).unwrap();
        let c = cpf_placement(&p, &pop);
        assert_eq!(
            c.to_ground_set().iter().map(|e| e.file).collect::<Vec<_>>(),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn random_placement_is_seed_deterministic_with_exact_loads() {
        let p = params(3, 20, 10, 6, 0.5);
        let a = random_placement(&p, 7);
        let b = random_placement(&p, 7);
        let c = random_placement(&p, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
        for k in 1..=3 {
            assert_eq!(a.cluster_load(k), 6);
        }
    }

    #[test]
    fn greedy_single_cluster_picks_top_ranks() {
        let p = params(1, 8, 0, 3, 0.7);
        let pop = zipf_popularity(&p).unwrap();
        let trace = greedy_caching(
            &p,
            &pop,
            Objective::AvgDownloadTime,
            ServiceModel::FixedAverage,
            BaselinePolicy::Strict,
        )
        .unwrap();
        assert_eq!(trace.placement, cpf_placement(&p, &pop));
        assert_eq!(trace.steps.len(), 3);
        assert_eq!(trace.steps[0].file, 1);
        assert!(trace.steps.windows(2).all(|w| w[0].reduction >= w[1].reduction - 1e-12));
        let total: f64 = trace.steps.iter().map(|s| s.reduction).sum();
        assert!((total - (trace.initial_objective - trace.final_objective)).abs() < 1e-12);
    }

    #[test]
    fn greedy_fills_every_slot_even_past_coverage() {
        // N >= m: every slot ends up cached, zero-reduction steps included.
        let p = params(2, 4, 2, 10, 0.5);
        let pop = zipf_popularity(&p).unwrap();
        let trace = greedy_caching(
            &p,
            &pop,
            Objective::MpsqDelay,
            ServiceModel::FixedAverage,
            BaselinePolicy::Strict,
        )
        .unwrap();
        assert_eq!(trace.placement, CachePlacement::full(2, 4));
        assert_eq!(trace.steps.len(), 8);
    }

    #[test]
    fn greedy_unstable_baseline_errors_unless_fallback_allowed() {
        let mut p = params(2, 12, 6, 3, 0.5);
        p.arrival_rates = vec![2.0; 2]; // rho_empty = 2 / 1.25 > 1
        let pop = zipf_popularity(&p).unwrap();
        let err = greedy_caching(
            &p,
            &pop,
            Objective::MpsqDelay,
            ServiceModel::FixedAverage,
            BaselinePolicy::Strict,
        )
        .unwrap_err();
        assert!(matches!(err, Error::UnstableBaseline(_)));
        let trace = greedy_caching(
            &p,
            &pop,
            Objective::MpsqDelay,
            ServiceModel::FixedAverage,
            BaselinePolicy::FallbackToDownloadTime,
        )
        .unwrap();
        assert_eq!(trace.objective_used, Objective::AvgDownloadTime);
    }

    #[test]
    fn brute_force_guard_trips_on_large_instances() {
        let p = params(3, 30, 15, 10, 0.5);
        let pop = zipf_popularity(&p).unwrap();
        let err = brute_force_optimal(
            &p,
            &pop,
            Objective::AvgDownloadTime,
            ServiceModel::FixedAverage,
        )
        .unwrap_err();
        assert!(matches!(err, Error::EnumerationTooLarge { .. }));
    }

    #[test]
    fn brute_force_single_cluster_matches_cpf() {
        let p = params(1, 6, 0, 2, 0.9);
        let pop = zipf_popularity(&p).unwrap();
        let (opt, _) = brute_force_optimal(
            &p,
            &pop,
            Objective::AvgDownloadTime,
            ServiceModel::FixedAverage,
        )
        .unwrap();
        assert_eq!(opt, cpf_placement(&p, &pop));
    }

    #[test]
    fn download_time_properties_hold_on_small_instance() {
        let p = params(3, 8, 4, 2, 0.6);
        let pop = zipf_popularity(&p).unwrap();
        for check in [supermodularity_check, monotonicity_check] {
            let r = check(
                &p,
                &pop,
                Objective::AvgDownloadTime,
                ServiceModel::FixedAverage,
                1000,
                42,
            )
            .unwrap();
            assert_eq!(r.violation_count, 0, "{r:?}");
            assert!(r.evaluated >= 900);
        }
    }
}
