//! Agglomerative clustering and per-epoch cluster geometry.
//!
//! `cluster_hierarchical` starts from singletons and repeatedly merges the
//! pair of clusters with minimum average linkage (the mean of all cross-pair
//! Euclidean distances) until the requested count remains. Ties break on the
//! lowest (cluster, cluster) slot pair, so results are fully deterministic.
//!
//! `compute_geometry` freezes each cluster's centroid (member mean) and
//! radius (maximum member-to-centroid distance) into a value snapshot. The
//! snapshot is what the radial distance loss reads for the rest of the epoch;
//! later embedding updates cannot alter it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{euclidean, norm, FeatureMatrix};

/// Per-sample cluster indices in `0..num_clusters`.
///
/// Outputs of [`cluster_hierarchical`] additionally guarantee that every
/// cluster index is used at least once.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl ClusterAssignment {
    pub fn from_labels(labels: Vec<usize>, num_clusters: usize) -> Result<Self> {
        if num_clusters == 0 {
            return Err(Error::InvalidClusterCount("zero clusters".into()));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_clusters) {
            return Err(Error::Index(format!(
                "cluster label {} outside 0..{}",
                bad, num_clusters
            )));
        }
        Ok(Self {
            labels,
            num_clusters,
        })
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Member indices per cluster, in sample order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }
}

/// Frozen per-epoch snapshot of centroids and radii.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGeometry {
    centroids: FeatureMatrix,
    radii: Vec<f64>,
    epoch_stamp: u64,
}

impl ClusterGeometry {
    pub fn centroids(&self) -> &FeatureMatrix {
        &self.centroids
    }

    pub fn centroid(&self, l: usize) -> &[f64] {
        self.centroids.row(l)
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn num_clusters(&self) -> usize {
        self.radii.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids.dim()
    }

    pub fn epoch_stamp(&self) -> u64 {
        self.epoch_stamp
    }

    pub fn mean_radius(&self) -> f64 {
        if self.radii.is_empty() {
            0.0
        } else {
            self.radii.iter().sum::<f64>() / self.radii.len() as f64
        }
    }
}

// Condensed upper-triangle index over n slots, i < j.
#[inline]
fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Agglomerates `embeddings` down to `c` clusters by minimum average linkage.
///
/// Cross-pair distance sums are cached and merged additively, so each linkage
/// equals the exact mean of the underlying pairwise distances.
pub fn cluster_hierarchical(embeddings: &FeatureMatrix, c: usize) -> Result<ClusterAssignment> {
    let n = embeddings.rows();
    if c < 1 || c > n {
        return Err(Error::InvalidClusterCount(format!(
            "C={} outside 1..={}",
            c, n
        )));
    }

    // Slot state. A merge keeps the smaller slot and kills the larger one, so
    // slot order is stable and the (i, j) tie-break is well defined.
    let mut alive = vec![true; n];
    let mut members: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    let mut sizes = vec![1usize; n];

    let mut sums = vec![0.0f64; n * (n - 1) / 2];
    for i in 0..n {
        for j in (i + 1)..n {
            sums[pair_index(n, i, j)] = euclidean(embeddings.row(i), embeddings.row(j));
        }
    }

    let linkage = |sums: &[f64], sizes: &[usize], i: usize, j: usize| -> f64 {
        sums[pair_index(n, i, j)] / (sizes[i] * sizes[j]) as f64
    };

    // Per-slot best partner among larger alive slots: (linkage, partner).
    let recompute_row = |sums: &[f64],
                         sizes: &[usize],
                         alive: &[bool],
                         i: usize|
     -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for j in (i + 1)..n {
            if !alive[j] {
                continue;
            }
            let v = linkage(sums, sizes, i, j);
            match best {
                Some((bv, _)) if v >= bv => {}
                _ => best = Some((v, j)),
            }
        }
        best
    };

    let mut best: Vec<Option<(f64, usize)>> = (0..n)
        .map(|i| recompute_row(&sums, &sizes, &alive, i))
        .collect();

    let mut active = n;
    while active > c {
        // Global minimum with (value, i, j) lexicographic tie-break. Row
        // caches already keep the smallest j per value, and scanning i in
        // ascending order with a strict < keeps the smallest i.
        let mut pick: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            if let Some((v, j)) = best[i] {
                match pick {
                    Some((bv, _, _)) if v >= bv => {}
                    _ => pick = Some((v, i, j)),
                }
            }
        }
        let (_, bi, bj) = pick.expect("at least two alive clusters");

        // Merge bj into bi: cross sums add exactly.
        for k in 0..n {
            if !alive[k] || k == bi || k == bj {
                continue;
            }
            let with_bi = pair_index(n, bi.min(k), bi.max(k));
            let with_bj = pair_index(n, bj.min(k), bj.max(k));
            sums[with_bi] += sums[with_bj];
        }
        let moved = std::mem::take(&mut members[bj]);
        members[bi].extend(moved);
        sizes[bi] += sizes[bj];
        sizes[bj] = 0;
        alive[bj] = false;
        best[bj] = None;
        active -= 1;

        // Refresh caches: rows pointing at bi or bj are stale; other rows
        // below bi only need to consider the new bi column.
        for k in 0..n {
            if !alive[k] {
                continue;
            }
            if k == bi {
                best[k] = recompute_row(&sums, &sizes, &alive, k);
                continue;
            }
            let stale = matches!(best[k], Some((_, p)) if p == bi || p == bj);
            if stale {
                best[k] = recompute_row(&sums, &sizes, &alive, k);
            } else if k < bi {
                let v = linkage(&sums, &sizes, k, bi);
                best[k] = match best[k] {
                    Some((bv, bp)) if bv < v || (bv == v && bp < bi) => Some((bv, bp)),
                    _ => Some((v, bi)),
                };
            }
        }
    }

    let mut labels = vec![0usize; n];
    let mut rank = 0;
    for slot in 0..n {
        if alive[slot] {
            for &m in &members[slot] {
                labels[m] = rank;
            }
            rank += 1;
        }
    }
    debug_assert_eq!(rank, c);
    ClusterAssignment::from_labels(labels, c)
}

/// Computes the frozen centroid/radius snapshot for an assignment.
pub fn compute_geometry(
    embeddings: &FeatureMatrix,
    assignment: &ClusterAssignment,
    epoch: u64,
) -> Result<ClusterGeometry> {
    if assignment.len() != embeddings.rows() {
        return Err(Error::Shape(format!(
            "assignment covers {} samples, embeddings have {} rows",
            assignment.len(),
            embeddings.rows()
        )));
    }
    let c = assignment.num_clusters();
    let d = embeddings.dim();
    let mut sums = FeatureMatrix::zeros(c, d);
    let mut counts = vec![0usize; c];
    for (i, &l) in assignment.labels().iter().enumerate() {
        counts[l] += 1;
        let row = sums.row_mut(l);
        for (acc, v) in row.iter_mut().zip(embeddings.row(i)) {
            *acc += v;
        }
    }
    if let Some(l) = counts.iter().position(|&cnt| cnt == 0) {
        return Err(Error::Shape(format!("cluster {} has no members", l)));
    }
    for l in 0..c {
        let inv = 1.0 / counts[l] as f64;
        for v in sums.row_mut(l) {
            *v *= inv;
        }
    }
    let mut radii = vec![0.0f64; c];
    for (i, &l) in assignment.labels().iter().enumerate() {
        let d = euclidean(sums.row(l), embeddings.row(i));
        if d > radii[l] {
            radii[l] = d;
        }
    }
    Ok(ClusterGeometry {
        centroids: sums,
        radii,
        epoch_stamp: epoch,
    })
}

/// Euclidean distance from an embedding to a cluster centroid.
pub fn radial_distance(
    geometry: &ClusterGeometry,
    embedding: &[f64],
    cluster_index: usize,
) -> Result<f64> {
    if cluster_index >= geometry.num_clusters() {
        return Err(Error::Index(format!(
            "cluster {} outside 0..{}",
            cluster_index,
            geometry.num_clusters()
        )));
    }
    if embedding.len() != geometry.dim() {
        return Err(Error::Shape(format!(
            "embedding dim {} vs centroid dim {}",
            embedding.len(),
            geometry.dim()
        )));
    }
    Ok(euclidean(embedding, geometry.centroid(cluster_index)))
}

#[derive(Debug, Serialize)]
pub struct ClusterStatsEntry {
    pub cluster: usize,
    pub size: usize,
    pub radius: f64,
    pub centroid_norm: f64,
    pub min_inter_centroid_dist: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct ClusterStats {
    pub num_clusters: usize,
    pub clusters: Vec<ClusterStatsEntry>,
}

pub fn cluster_stats(
    geometry: &ClusterGeometry,
    assignment: &ClusterAssignment,
) -> Result<ClusterStats> {
    if assignment.num_clusters() != geometry.num_clusters() {
        return Err(Error::Shape(format!(
            "assignment has {} clusters, geometry {}",
            assignment.num_clusters(),
            geometry.num_clusters()
        )));
    }
    let c = geometry.num_clusters();
    let mut sizes = vec![0usize; c];
    for &l in assignment.labels() {
        sizes[l] += 1;
    }
    let mut clusters = Vec::with_capacity(c);
    for l in 0..c {
        let mut min_dist: Option<f64> = None;
        for m in 0..c {
            if m == l {
                continue;
            }
            let d = euclidean(geometry.centroid(l), geometry.centroid(m));
            min_dist = Some(min_dist.map_or(d, |cur: f64| cur.min(d)));
        }
        clusters.push(ClusterStatsEntry {
            cluster: l,
            size: sizes[l],
            radius: geometry.radii()[l],
            centroid_norm: norm(geometry.centroid(l)),
            min_inter_centroid_dist: min_dist,
        });
    }
    Ok(ClusterStats {
        num_clusters: c,
        clusters,
    })
}
