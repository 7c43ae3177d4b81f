//! Cluster-shifted Zipf popularity.
//!
//! Every cluster ranks the library by the same Zipf law with exponent
//! beta; cluster k's ranking is the base ranking cyclically shifted by
//! s_k = floor((k-1) m0 / k). Cluster k's most popular file is
//! therefore s_k + 1, and every cluster row is a permutation of the
//! base row. Probabilities are stored once per rank together with a
//! prefix-sum table, so the matrix costs O(m + K) memory and any
//! contiguous rank or file range is summed in O(1). That matters:
//! scaling studies push K and m to 10^4 and beyond, where a dense
//! K x m matrix would be hundreds of megabytes.

use crate::error::Result;
use crate::params::SystemParams;

/// Popularity of every file in every cluster, in O(m + K) memory.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityMatrix {
    /// base[r-1] = probability of the rank-r file, any cluster.
    base: Vec<f64>,
    /// prefix[r] = base[0] + .. + base[r-1]; prefix[0] = 0.
    prefix: Vec<f64>,
    /// shifts[k-1] = s_k.
    shifts: Vec<usize>,
}

/// Builds the popularity matrix for a validated parameter set.
pub fn zipf_popularity(params: &SystemParams) -> Result<PopularityMatrix> {
    params.validate()?;
    let m = params.library;
    let mut base: Vec<f64> = (1..=m).map(|r| (r as f64).powf(-params.beta)).collect();
    let h: f64 = base.iter().sum();
    for p in &mut base {
        *p /= h;
    }
    let mut prefix = vec![0.0; m + 1];
    for r in 0..m {
        prefix[r + 1] = prefix[r] + base[r];
    }
    let shifts = (1..=params.clusters).map(|k| params.popularity_shift(k)).collect();
    Ok(PopularityMatrix { base, prefix, shifts })
}

impl PopularityMatrix {
    pub fn clusters(&self) -> usize {
        self.shifts.len()
    }

    pub fn library(&self) -> usize {
        self.base.len()
    }

    /// Shift s_k of cluster k (1-based).
    pub fn shift(&self, k: usize) -> usize {
        self.shifts[k - 1]
    }

    /// Rank of file f in cluster k's ordering; all 1-based.
    ///
    /// rank = ((f - 1 - s_k) mod m) + 1, the inverse of the cyclic
    /// shift, so file s_k + 1 has rank 1.
    pub fn rank(&self, k: usize, f: usize) -> usize {
        let m = self.base.len();
        debug_assert!(f >= 1 && f <= m);
        let s = self.shifts[k - 1]; // s < m by construction
        (f + m - 1 - s) % m + 1
    }

    /// Request probability P_{k,f}; indices 1-based.
    pub fn prob(&self, k: usize, f: usize) -> f64 {
        self.base[self.rank(k, f) - 1]
    }

    /// File index of cluster k's rank-1 entry.
    pub fn most_popular_file(&self, k: usize) -> usize {
        self.shifts[k - 1] + 1
    }

    /// Total probability of ranks lo..=hi (clamped to [1, m]; empty
    /// ranges sum to zero). Cluster-independent.
    pub fn rank_mass(&self, lo: usize, hi: usize) -> f64 {
        let m = self.base.len();
        let lo = lo.max(1);
        let hi = hi.min(m);
        if lo > hi {
            0.0
        } else {
            self.prefix[hi] - self.prefix[lo - 1]
        }
    }

    /// Total probability cluster k puts on files lo..=hi (clamped).
    ///
    /// A contiguous file range maps through the cyclic shift to at most
    /// two contiguous rank ranges: files above the shift sit at ranks
    /// f - s, files at or below it wrap to ranks f + m - s.
    pub fn file_mass(&self, k: usize, lo: usize, hi: usize) -> f64 {
        let m = self.base.len();
        let s = self.shifts[k - 1];
        let lo = lo.max(1);
        let hi = hi.min(m);
        if lo > hi {
            return 0.0;
        }
        let mut total = 0.0;
        if lo <= s {
            let b = hi.min(s);
            total += self.rank_mass(lo + m - s, b + m - s);
        }
        if hi > s {
            let a = lo.max(s + 1);
            total += self.rank_mass(a - s, hi - s);
        }
        total
    }

    /// Cluster k's full row as a dense vector indexed by file - 1.
    pub fn row(&self, k: usize) -> Vec<f64> {
        (1..=self.base.len()).map(|f| self.prob(k, f)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(clusters: usize, library: usize, popular: usize, beta: f64) -> SystemParams {
        SystemParams::builder()
            .users(4 * clusters)
            .clusters(clusters)
            .library(library)
            .popular_files(popular)
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

    /// Hand-computed single-cluster law: m = 3, beta = 1 gives
    /// H = 1 + 1/2 + 1/3 = 11/6 and probabilities 6/11, 3/11, 2/11.
    #[test]
    fn hand_zipf_row() {
        let pop = zipf_popularity(&params(1, 3, 0, 1.0)).unwrap();
        let want = [6.0 / 11.0, 3.0 / 11.0, 2.0 / 11.0];
        for (f, w) in want.iter().enumerate() {
            assert!((pop.prob(1, f + 1) - w).abs() < 1e-15);
        }
    }

    /// The indicator form of the shifted law, evaluated literally:
    /// P_{k,f} = (f - s_k a + (m - s_k) b)^(-beta) / H with a = 1 when
    /// f > s_k and b = 1 otherwise. Must agree with the rank-space
    /// evaluation everywhere.
    fn literal_prob(p: &SystemParams, k: usize, f: usize) -> f64 {
        let m = p.library as f64;
        let s = p.popularity_shift(k) as f64;
        let (a, b) = if f as f64 > s { (1.0, 0.0) } else { (0.0, 1.0) };
        let idx = f as f64 - s * a + (m - s) * b;
        let h: f64 = (1..=p.library).map(|r| (r as f64).powf(-p.beta)).sum();
        idx.powf(-p.beta) / h
    }

    #[test]
    fn matches_literal_indicator_form() {
        for clusters in [1usize, 2, 3, 5, 8] {
            for library in [3usize, 17, 60, 108, 200] {
                for popular in [0usize, library / 2, library] {
                    for beta in [0.0, 0.5, 1.0, 1.7] {
                        let p = params(clusters, library, popular, beta);
                        let pop = zipf_popularity(&p).unwrap();
                        for k in 1..=clusters {
                            for f in 1..=library {
                                let lit = literal_prob(&p, k, f);
                                let got = pop.prob(k, f);
                                assert!(
                                    (got - lit).abs() <= 1e-15_f64.max(lit * 1e-12),
                                    "K={clusters} m={library} m0={popular} beta={beta} k={k} f={f}: {got} vs {lit}"
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn rows_sum_to_one_and_argmax_is_shift_plus_one() {
        let p = params(3, 108, 60, 1.2);
        let pop = zipf_popularity(&p).unwrap();
        for k in 1..=3 {
            let row = pop.row(k);
            let sum: f64 = row.iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
            let argmax = row
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .unwrap()
                .0
                + 1;
            assert_eq!(argmax, pop.most_popular_file(k));
        }
        assert_eq!(pop.most_popular_file(2), 31);
        assert_eq!(pop.most_popular_file(3), 41);
    }

    #[test]
    fn beta_zero_is_uniform() {
        let pop = zipf_popularity(&params(4, 12, 6, 0.0)).unwrap();
        for k in 1..=4 {
            for f in 1..=12 {
                assert!((pop.prob(k, f) - 1.0 / 12.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn file_mass_equals_explicit_sum() {
        let p = params(5, 41, 23, 0.8);
        let pop = zipf_popularity(&p).unwrap();
        for k in 1..=5 {
            for (lo, hi) in [(1, 41), (5, 5), (7, 23), (23, 41), (30, 9999), (0, 3), (9, 8)] {
                let explicit: f64 = (lo.max(1)..=hi.min(41)).map(|f| pop.prob(k, f)).sum();
                assert!(
                    (pop.file_mass(k, lo, hi) - explicit).abs() < 1e-13,
                    "k={k} range {lo}..={hi}"
                );
            }
        }
    }

    #[test]
    fn rank_is_inverse_of_shift() {
        let pop = zipf_popularity(&params(6, 30, 19, 0.5)).unwrap();
        for k in 1..=6 {
            let mut seen = vec![false; 30];
            for f in 1..=30 {
                let r = pop.rank(k, f);
                assert!(!seen[r - 1]);
                seen[r - 1] = true;
            }
            assert_eq!(pop.rank(k, pop.most_popular_file(k)), 1);
        }
    }
}
