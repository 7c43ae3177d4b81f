//! Cache placements and the per-cluster capacity matroid.
//!
//! A placement is a binary K x m matrix: entry (k, f) says cluster k
//! caches file f. The feasible placements are exactly the independent
//! sets of a partition matroid over the ground set of (cluster, file)
//! pairs: each cluster may cache at most N files. The greedy scheme's
//! approximation guarantee rests on that structure, so the matroid
//! axioms get their own exhaustive checker here.

use crate::error::{CapacityReport, Error, Result};
use crate::params::SystemParams;

/// One cache slot: file `file` cached in cluster `cluster` (1-based).
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GroundSetElement {
    pub cluster: usize,
    pub file: usize,
}

/// A cluster that caches more files than its capacity.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct CapacityViolation {
    pub cluster: usize,
    pub cached: usize,
    pub capacity: usize,
}

/// Binary cache placement matrix, row-major over clusters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CachePlacement {
    clusters: usize,
    library: usize,
    bits: Vec<bool>,
}

impl CachePlacement {
    pub fn empty(clusters: usize, library: usize) -> Self {
        CachePlacement { clusters, library, bits: vec![false; clusters * library] }
    }

    /// Everything cached everywhere.
    pub fn full(clusters: usize, library: usize) -> Self {
        CachePlacement { clusters, library, bits: vec![true; clusters * library] }
    }

    pub fn clusters(&self) -> usize {
        self.clusters
    }

    pub fn library(&self) -> usize {
        self.library
    }

    fn idx(&self, k: usize, f: usize) -> usize {
        debug_assert!(k >= 1 && k <= self.clusters, "cluster {k} of {}", self.clusters);
        debug_assert!(f >= 1 && f <= self.library, "file {f} of {}", self.library);
        (k - 1) * self.library + (f - 1)
    }

    pub fn is_cached(&self, k: usize, f: usize) -> bool {
        self.bits[self.idx(k, f)]
    }

    pub fn insert(&mut self, k: usize, f: usize) {
        let i = self.idx(k, f);
        self.bits[i] = true;
    }

    pub fn remove(&mut self, k: usize, f: usize) {
        let i = self.idx(k, f);
        self.bits[i] = false;
    }

    /// Number of files cluster k caches.
    pub fn cluster_load(&self, k: usize) -> usize {
        let start = (k - 1) * self.library;
        self.bits[start..start + self.library].iter().filter(|&&b| b).count()
    }

    pub fn total_cached(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    /// replicas[f-1] = number of clusters caching file f.
    pub fn replica_counts(&self) -> Vec<usize> {
        let mut counts = vec![0usize; self.library];
        for k in 0..self.clusters {
            let row = &self.bits[k * self.library..(k + 1) * self.library];
            for (f, &b) in row.iter().enumerate() {
                counts[f] += b as usize;
            }
        }
        counts
    }

    /// Cached slots in (cluster, file) order.
    pub fn iter_cached(&self) -> impl Iterator<Item = GroundSetElement> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| GroundSetElement {
            cluster: i / self.library + 1,
            file: i % self.library + 1,
        })
    }

    /// The placement as a sorted ground-set vector.
    pub fn to_ground_set(&self) -> Vec<GroundSetElement> {
        self.iter_cached().collect()
    }

    /// Rebuilds a placement from ground-set elements. Out-of-range
    /// indices are a dimension error; duplicates are idempotent.
    pub fn from_ground_set(
        clusters: usize,
        library: usize,
        elements: impl IntoIterator<Item = GroundSetElement>,
    ) -> Result<Self> {
        let mut c = CachePlacement::empty(clusters, library);
        for e in elements {
            if e.cluster < 1 || e.cluster > clusters || e.file < 1 || e.file > library {
                return Err(Error::DimensionMismatch(format!(
                    "element (cluster {}, file {}) outside a {clusters} x {library} placement",
                    e.cluster, e.file
                )));
            }
            c.insert(e.cluster, e.file);
        }
        Ok(c)
    }
}

/// Checks the partition-matroid constraint: every cluster caches at
/// most `params.cluster_cache` files, and dimensions match.
pub fn validate_placement(c: &CachePlacement, params: &SystemParams) -> Result<()> {
    if c.clusters() != params.clusters || c.library() != params.library {
        return Err(Error::DimensionMismatch(format!(
            "placement is {} x {}, parameters say {} x {}",
            c.clusters(),
            c.library(),
            params.clusters,
            params.library
        )));
    }
    let violations: Vec<CapacityViolation> = (1..=params.clusters)
        .filter_map(|k| {
            let cached = c.cluster_load(k);
            (cached > params.cluster_cache).then_some(CapacityViolation {
                cluster: k,
                cached,
                capacity: params.cluster_cache,
            })
        })
        .collect();
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::CapacityExceeded(CapacityReport(violations)))
    }
}

/// True when every cluster caches at most `capacity` files.
pub fn is_independent(c: &CachePlacement, capacity: usize) -> bool {
    (1..=c.clusters()).all(|k| c.cluster_load(k) <= capacity)
}

/// Result of [`matroid_properties_exhaustive`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatroidCheck {
    pub subsets: u64,
    pub independent_sets: u64,
    pub downward_closed: bool,
    pub exchange_holds: bool,
}

/// Exhaustively verifies the two matroid axioms of the capacity
/// constraint on a small ground set (up to 12 slots; the exchange
/// check is quadratic in the number of subsets):
/// every subset of an independent set is independent, and for any two
/// independent sets |A| < |B| some element of B \ A extends A.
pub fn matroid_properties_exhaustive(
    clusters: usize,
    library: usize,
    capacity: usize,
) -> Result<MatroidCheck> {
    let slots = clusters * library;
    if slots > 12 {
        return Err(Error::EnumerationTooLarge {
            placements: 1u128 << slots,
            limit: 1 << 12,
        });
    }
    let independent = |mask: u32| -> bool {
        (0..clusters).all(|k| {
            let row = (mask >> (k * library)) & ((1u32 << library) - 1);
            row.count_ones() as usize <= capacity
        })
    };
    let all: Vec<u32> = (0..1u32 << slots).collect();
    let ind: Vec<u32> = all.iter().copied().filter(|&m| independent(m)).collect();

    let mut downward_closed = true;
    for &a in &ind {
        let mut rest = a;
        while rest != 0 {
            let bit = rest & rest.wrapping_neg();
            if !independent(a & !bit) {
                downward_closed = false;
            }
            rest &= rest - 1;
        }
    }

    let mut exchange_holds = true;
    'outer: for &a in &ind {
        for &b in &ind {
            if a.count_ones() >= b.count_ones() {
                continue;
            }
            let mut extendable = false;
            let mut diff = b & !a;
            while diff != 0 {
                let bit = diff & diff.wrapping_neg();
                if independent(a | bit) {
                    extendable = true;
                    break;
                }
                diff &= diff - 1;
            }
            if !extendable {
                exchange_holds = false;
                break 'outer;
            }
        }
    }

    Ok(MatroidCheck {
        subsets: all.len() as u64,
        independent_sets: ind.len() as u64,
        downward_closed,
        exchange_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_through_ground_set() {
        let mut c = CachePlacement::empty(3, 5);
        c.insert(1, 2);
        c.insert(2, 5);
        c.insert(3, 1);
        c.insert(3, 4);
        let back = CachePlacement::from_ground_set(3, 5, c.to_ground_set()).unwrap();
        assert_eq!(c, back);
        assert_eq!(c.total_cached(), 4);
        assert_eq!(c.replica_counts(), vec![1, 1, 0, 1, 1]);
    }

    #[test]
    fn from_ground_set_rejects_out_of_range() {
        let err = CachePlacement::from_ground_set(
            2,
            3,
            [GroundSetElement { cluster: 3, file: 1 }],
        )
        .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch(_)));
    }

    #[test]
    fn validate_reports_every_overfull_cluster() {
        let p = crate::SystemParams::builder()
            .users(4)
            .clusters(2)
            .library(4)
            .popular_files(2)
            .user_cache(1)
            .cluster_cache(1)
            .beta(0.5)
            .mean_file_size(1e6)
            .arrival_rate_uniform(0.5)
            .d2d_rate(120e6)
            .cell_rate_avg(50e6)
            .backhaul_rate_avg(5e6)
            .build()
            .unwrap();
        let mut c = CachePlacement::empty(2, 4);
        c.insert(1, 1);
        c.insert(1, 2);
        c.insert(2, 1);
        c.insert(2, 2);
        c.insert(2, 3);
        match validate_placement(&c, &p) {
            Err(Error::CapacityExceeded(report)) => {
                assert_eq!(report.0.len(), 2);
                assert_eq!(report.0[1].cached, 3);
            }
            other => panic!("expected capacity error, got {other:?}"),
        }
    }

    #[test]
    fn matroid_axioms_hold_on_small_ground_set() {
        let check = matroid_properties_exhaustive(2, 4, 2).unwrap();
        assert_eq!(check.subsets, 256);
        assert!(check.downward_closed);
        assert!(check.exchange_holds);
    }

    #[test]
    fn matroid_checker_refuses_large_ground_sets() {
        assert!(matroid_properties_exhaustive(3, 8, 2).is_err());
    }
}
