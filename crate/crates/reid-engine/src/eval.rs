//! Retrieval evaluation: query-gallery distances, CMC and mAP under the
//! standard cross-camera protocol, plus a 2D principal-component export for
//! cluster-structure inspection.
//!
//! Ranking is ascending by distance with ties broken by gallery index. With
//! camera filtering on, gallery entries sharing both identity and camera with
//! the query are dropped before ranking. Queries left without any correct
//! match are excluded from the averages and reported via
//! `num_queries_evaluated`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{euclidean, FeatureMatrix};

/// Evaluation-side ground truth; never visible to training.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalSample {
    pub identity: u64,
    pub camera: Option<u32>,
}

/// CMC values at selected ranks, the full curve, and mAP.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub cmc: BTreeMap<usize, f64>,
    pub cmc_curve: Vec<f64>,
    pub map_score: f64,
    pub num_queries_evaluated: usize,
    pub num_queries_total: usize,
}

/// The JSON shape of `report.json`.
#[derive(Debug, Clone, Serialize)]
pub struct ReportSummary {
    pub rank1: f64,
    pub rank5: f64,
    pub rank10: f64,
    pub map: f64,
    pub queries_evaluated: usize,
}

impl EvalReport {
    /// CMC at rank k; ranks beyond the curve saturate at the final value.
    pub fn cmc_at(&self, k: usize) -> f64 {
        if self.cmc_curve.is_empty() || k == 0 {
            return 0.0;
        }
        self.cmc_curve[(k - 1).min(self.cmc_curve.len() - 1)]
    }

    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            rank1: self.cmc_at(1),
            rank5: self.cmc_at(5),
            rank10: self.cmc_at(10),
            map: self.map_score,
            queries_evaluated: self.num_queries_evaluated,
        }
    }
}

/// Q x G matrix of Euclidean distances.
pub fn distance_matrix(queries: &FeatureMatrix, gallery: &FeatureMatrix) -> Result<FeatureMatrix> {
    if queries.dim() != gallery.dim() {
        return Err(Error::Shape(format!(
            "query dim {} vs gallery dim {}",
            queries.dim(),
            gallery.dim()
        )));
    }
    let (q, g) = (queries.rows(), gallery.rows());
    let mut out = FeatureMatrix::zeros(q, g);
    for i in 0..q {
        let row = out.row_mut(i);
        for j in 0..g {
            row[j] = euclidean(queries.row(i), gallery.row(j));
        }
    }
    Ok(out)
}

/// Single-query CMC/mAP evaluation.
pub fn evaluate(
    queries: &[EvalSample],
    gallery: &[EvalSample],
    dist: &FeatureMatrix,
    camera_filter: bool,
) -> Result<EvalReport> {
    if dist.rows() != queries.len() || dist.dim() != gallery.len() {
        return Err(Error::Shape(format!(
            "distance matrix {}x{} for {} queries and {} gallery entries",
            dist.rows(),
            dist.dim(),
            queries.len(),
            gallery.len()
        )));
    }

    let mut first_correct_ranks: Vec<usize> = Vec::new();
    let mut ap_sum = 0.0;
    let mut evaluated = 0usize;
    let mut max_list = 0usize;

    for (qi, q) in queries.iter().enumerate() {
        // Filter, then sort ascending by (distance, gallery index).
        let mut order: Vec<usize> = (0..gallery.len())
            .filter(|&gi| {
                if !camera_filter {
                    return true;
                }
                let same_id = gallery[gi].identity == q.identity;
                let same_cam = match (gallery[gi].camera, q.camera) {
                    (Some(a), Some(b)) => a == b,
                    _ => false,
                };
                !(same_id && same_cam)
            })
            .collect();
        let drow = dist.row(qi);
        order.sort_by(|&a, &b| {
            drow[a]
                .partial_cmp(&drow[b])
                .expect("finite distances")
                .then(a.cmp(&b))
        });

        let mut correct_positions: Vec<usize> = Vec::new();
        for (pos, &gi) in order.iter().enumerate() {
            if gallery[gi].identity == q.identity {
                correct_positions.push(pos + 1);
            }
        }
        if correct_positions.is_empty() {
            continue; // no valid match: excluded, still counted in the total
        }
        evaluated += 1;
        max_list = max_list.max(order.len());
        first_correct_ranks.push(correct_positions[0]);
        let ap: f64 = correct_positions
            .iter()
            .enumerate()
            .map(|(j, &pos)| (j + 1) as f64 / pos as f64)
            .sum::<f64>()
            / correct_positions.len() as f64;
        ap_sum += ap;
    }

    let mut cmc_curve = vec![0.0; max_list];
    if evaluated > 0 {
        for &r in &first_correct_ranks {
            cmc_curve[r - 1] += 1.0;
        }
        let mut acc = 0.0;
        for v in cmc_curve.iter_mut() {
            acc += *v;
            *v = acc / evaluated as f64;
        }
    }
    let map_score = if evaluated > 0 {
        ap_sum / evaluated as f64
    } else {
        0.0
    };
    let mut cmc = BTreeMap::new();
    let report = EvalReport {
        cmc: BTreeMap::new(),
        cmc_curve,
        map_score,
        num_queries_evaluated: evaluated,
        num_queries_total: queries.len(),
    };
    for k in [1usize, 5, 10, 20] {
        cmc.insert(k, report.cmc_at(k));
    }
    Ok(EvalReport { cmc, ..report })
}

/// Projects embeddings onto their top-2 principal components.
///
/// Deterministic sign convention: the first nonzero loading of each component
/// is positive. Rank-deficient inputs degrade to a zero second (or first)
/// axis.
pub fn export_projection(
    embeddings: &FeatureMatrix,
    labels: &[u64],
) -> Result<Vec<(f64, f64, u64)>> {
    let n = embeddings.rows();
    if n < 2 {
        return Err(Error::Shape(format!("need at least 2 rows, got {}", n)));
    }
    if labels.len() != n {
        return Err(Error::Shape(format!(
            "{} labels for {} rows",
            labels.len(),
            n
        )));
    }
    let d = embeddings.dim();
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(embeddings.row(r)) {
            *m += v / n as f64;
        }
    }
    // Covariance (biased normalization; eigenvectors are scale-invariant).
    let mut cov = vec![0.0; d * d];
    for r in 0..n {
        let row = embeddings.row(r);
        for i in 0..d {
            let ci = row[i] - mean[i];
            for j in i..d {
                cov[i * d + j] += ci * (row[j] - mean[j]) / n as f64;
            }
        }
    }
    for i in 0..d {
        for j in 0..i {
            cov[i * d + j] = cov[j * d + i];
        }
    }
    let (eigenvalues, eigenvectors) = jacobi_eigen(&cov, d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[b]
            .partial_cmp(&eigenvalues[a])
            .expect("finite eigenvalues")
            .then(a.cmp(&b))
    });
    let mut axes = [vec![0.0; d], vec![0.0; d]];
    for (slot, axis) in axes.iter_mut().enumerate() {
        if slot >= d {
            break; // 1-D input: second axis stays zero
        }
        let col = order[slot];
        for i in 0..d {
            axis[i] = eigenvectors[i * d + col];
        }
        if let Some(first) = axis.iter().find(|v| v.abs() > 1e-12) {
            if *first < 0.0 {
                for v in axis.iter_mut() {
                    *v = -*v;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for r in 0..n {
        let row = embeddings.row(r);
        let centered: Vec<f64> = row.iter().zip(&mean).map(|(v, m)| v - m).collect();
        let x: f64 = centered.iter().zip(&axes[0]).map(|(a, b)| a * b).sum();
        let y: f64 = centered.iter().zip(&axes[1]).map(|(a, b)| a * b).sum();
        out.push((x, y, labels[r]));
    }
    Ok(out)
}

/// CSV with header `x,y,label`.
pub fn write_projection_csv(path: &Path, rows: &[(f64, f64, u64)]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "x,y,label").map_err(|e| Error::io(path, e))?;
    for (x, y, label) in rows {
        writeln!(w, "{},{},{}", x, y, label).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
/// eigenvalues and column eigenvectors.
fn jacobi_eigen(matrix: &[f64], d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i * d + j] * a[i * d + j];
            }
        }
        if off < 1e-24 {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * d + p];
                let aqq = a[q * d + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let eigenvalues: Vec<f64> = (0..d).map(|i| a[i * d + i]).collect();
    (eigenvalues, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ids(identities: &[u64]) -> Vec<EvalSample> {
        identities
            .iter()
            .map(|&identity| EvalSample {
                identity,
                camera: None,
            })
            .collect()
    }

    #[test]
    fn distance_matrix_basics() {
        let q = FeatureMatrix::new(1, 2, vec![0.0, 0.0]).unwrap();
        let same = distance_matrix(&q, &q).unwrap();
        assert_eq!(same.row(0), &[0.0]);
        let g = FeatureMatrix::new(1, 2, vec![3.0, 4.0]).unwrap();
        assert_eq!(distance_matrix(&q, &g).unwrap().row(0), &[5.0]);

        let bad = FeatureMatrix::zeros(1, 3);
        assert!(matches!(distance_matrix(&q, &bad), Err(Error::Shape(_))));
    }

    #[test]
    fn distance_matrix_matches_elementwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let a = FeatureMatrix::new(5, 3, (0..15).map(|_| rng.random_range(-4.0..4.0)).collect())
            .unwrap();
        let b = FeatureMatrix::new(7, 3, (0..21).map(|_| rng.random_range(-4.0..4.0)).collect())
            .unwrap();
        let d = distance_matrix(&a, &b).unwrap();
        for i in 0..5 {
            for j in 0..7 {
                let mut ss = 0.0;
                for k in 0..3 {
                    ss += (a.row(i)[k] - b.row(j)[k]) * (a.row(i)[k] - b.row(j)[k]);
                }
                assert!((d.row(i)[j] - ss.sqrt()).abs() < 1e-12);
            }
        }
        let sym = distance_matrix(&a, &a).unwrap();
        for i in 0..5 {
            assert_eq!(sym.row(i)[i], 0.0);
            for j in 0..5 {
                assert_eq!(sym.row(i)[j], sym.row(j)[i]);
            }
        }
    }

    #[test]
    fn single_query_perfect_match() {
        let dist = FeatureMatrix::new(1, 3, vec![0.1, 0.5, 0.9]).unwrap();
        let report = evaluate(&ids(&[7]), &ids(&[7, 1, 2]), &dist, false).unwrap();
        assert_eq!(report.cmc_at(1), 1.0);
        assert_eq!(report.map_score, 1.0);
        assert_eq!(report.num_queries_evaluated, 1);
    }

    #[test]
    fn correct_match_last_of_four() {
        let dist = FeatureMatrix::new(1, 4, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let report = evaluate(&ids(&[9]), &ids(&[1, 2, 3, 9]), &dist, false).unwrap();
        assert_eq!(report.cmc_at(1), 0.0);
        assert_eq!(report.cmc_at(4), 1.0);
        assert!((report.map_score - 0.25).abs() < 1e-15);
    }

    #[test]
    fn two_query_hand_computed_ap() {
        // Query 0 (id 1): ranking = [g0(id1), g2(id2), g1(id1), g3(id3),
        // g4(id1)], correct at ranks 1, 3, 5: AP = (1 + 2/3 + 3/5) / 3.
        // Query 1 (id 2): ranking = [g3, g1, g2(id2), g4, g0], correct at
        // rank 3: AP = 1/3.
        let dist = FeatureMatrix::new(
            2,
            5,
            vec![
                0.1, 0.3, 0.2, 0.4, 0.5, //
                0.9, 0.3, 0.5, 0.1, 0.6,
            ],
        )
        .unwrap();
        let report = evaluate(&ids(&[1, 2]), &ids(&[1, 1, 2, 3, 1]), &dist, false).unwrap();
        let expected = ((1.0 + 2.0 / 3.0 + 3.0 / 5.0) / 3.0 + 1.0 / 3.0) / 2.0;
        assert!((report.map_score - expected).abs() < 1e-12);
        assert_eq!(report.cmc_at(1), 0.5);
        assert_eq!(report.cmc_at(3), 1.0);
    }

    #[test]
    fn camera_filter_drops_same_identity_same_camera() {
        let q = vec![EvalSample {
            identity: 1,
            camera: Some(0),
        }];
        let g = vec![
            EvalSample {
                identity: 1,
                camera: Some(0), // dropped under the filter
            },
            EvalSample {
                identity: 1,
                camera: Some(1),
            },
            EvalSample {
                identity: 2,
                camera: Some(0),
            },
        ];
        let dist = FeatureMatrix::new(1, 3, vec![0.05, 0.5, 0.2]).unwrap();
        let unfiltered = evaluate(&q, &g, &dist, false).unwrap();
        assert_eq!(unfiltered.cmc_at(1), 1.0);
        let filtered = evaluate(&q, &g, &dist, true).unwrap();
        // Remaining ranking: g2 (wrong) then g1 (right).
        assert_eq!(filtered.cmc_at(1), 0.0);
        assert_eq!(filtered.cmc_at(2), 1.0);
        assert!((filtered.map_score - 0.5).abs() < 1e-15);
    }

    #[test]
    fn query_without_valid_match_is_excluded_but_counted() {
        let dist = FeatureMatrix::new(2, 2, vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let report = evaluate(&ids(&[1, 99]), &ids(&[1, 2]), &dist, false).unwrap();
        assert_eq!(report.num_queries_evaluated, 1);
        assert_eq!(report.num_queries_total, 2);
        assert_eq!(report.map_score, 1.0);
    }

    #[test]
    fn cmc_is_monotone_and_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let nq = rng.random_range(1..5usize);
            let ng = rng.random_range(2..9usize);
            let queries: Vec<EvalSample> = (0..nq)
                .map(|_| EvalSample {
                    identity: rng.random_range(0..3),
                    camera: Some(rng.random_range(0..2)),
                })
                .collect();
            let gallery: Vec<EvalSample> = (0..ng)
                .map(|_| EvalSample {
                    identity: rng.random_range(0..3),
                    camera: Some(rng.random_range(0..2)),
                })
                .collect();
            let data: Vec<f64> = (0..nq * ng).map(|_| rng.random_range(0.01..5.0)).collect();
            let dist = FeatureMatrix::new(nq, ng, data.clone()).unwrap();
            let report = evaluate(&queries, &gallery, &dist, true).unwrap();
            for w in report.cmc_curve.windows(2) {
                assert!(w[0] <= w[1] + 1e-15);
            }
            let scaled =
                FeatureMatrix::new(nq, ng, data.iter().map(|v| v * 3.7).collect()).unwrap();
            let scaled_report = evaluate(&queries, &gallery, &scaled, true).unwrap();
            assert_eq!(report.cmc_curve, scaled_report.cmc_curve);
            assert_eq!(report.map_score, scaled_report.map_score);
        }
    }

    #[test]
    fn camera_filter_off_equals_all_distinct_cameras() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let queries: Vec<EvalSample> = (0..3)
            .map(|i| EvalSample {
                identity: i as u64 % 2,
                camera: Some(0),
            })
            .collect();
        // Distinct cameras everywhere: the filter can never drop anything.
        let gallery: Vec<EvalSample> = (0..6)
            .map(|i| EvalSample {
                identity: i as u64 % 3,
                camera: Some(10 + i as u32),
            })
            .collect();
        let data: Vec<f64> = (0..18).map(|_| rng.random_range(0.0..1.0)).collect();
        let dist = FeatureMatrix::new(3, 6, data).unwrap();
        let off = evaluate(&queries, &gallery, &dist, false).unwrap();
        let on = evaluate(&queries, &gallery, &dist, true).unwrap();
        assert_eq!(off.cmc_curve, on.cmc_curve);
        assert_eq!(off.map_score, on.map_score);
    }

    #[test]
    fn projection_preserves_2d_distances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 12;
        let mut data = Vec::new();
        for _ in 0..n {
            data.push(rng.random_range(-2.0..2.0));
            data.push(rng.random_range(-2.0..2.0));
        }
        // Center the data first.
        let mx = data.iter().step_by(2).sum::<f64>() / n as f64;
        let my = data.iter().skip(1).step_by(2).sum::<f64>() / n as f64;
        for i in 0..n {
            data[2 * i] -= mx;
            data[2 * i + 1] -= my;
        }
        let m = FeatureMatrix::new(n, 2, data).unwrap();
        let labels: Vec<u64> = (0..n as u64).collect();
        let proj = export_projection(&m, &labels).unwrap();
        for i in 0..n {
            for j in (i + 1)..n {
                let orig = euclidean(m.row(i), m.row(j));
                let dx = proj[i].0 - proj[j].0;
                let dy = proj[i].1 - proj[j].1;
                let new = (dx * dx + dy * dy).sqrt();
                assert!((orig - new).abs() < 1e-9, "{} vs {}", orig, new);
            }
        }
    }

    #[test]
    fn projection_of_identical_points_is_zero() {
        let m = FeatureMatrix::new(3, 4, vec![1.0; 12]).unwrap();
        let proj = export_projection(&m, &[0, 0, 0]).unwrap();
        for (x, y, _) in proj {
            assert_eq!(x, 0.0);
            assert_eq!(y, 0.0);
        }
    }

    #[test]
    fn projection_separates_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let d = 10;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for b in 0..3u64 {
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(-20.0..20.0)).collect();
            for _ in 0..15 {
                let row: Vec<f64> = center
                    .iter()
                    .map(|c| c + rng.random_range(-0.5..0.5))
                    .collect();
                rows.push(row);
                labels.push(b);
            }
        }
        let m = FeatureMatrix::from_rows(&rows).unwrap();
        let proj = export_projection(&m, &labels).unwrap();
        let mut blob_means = vec![(0.0, 0.0); 3];
        for (x, y, l) in &proj {
            blob_means[*l as usize].0 += x / 15.0;
            blob_means[*l as usize].1 += y / 15.0;
        }
        let mut spread = 0.0;
        for (x, y, l) in &proj {
            let (mx, my) = blob_means[*l as usize];
            spread += ((x - mx).powi(2) + (y - my).powi(2)).sqrt() / 45.0;
        }
        for a in 0..3 {
            for b in (a + 1)..3 {
                let (ax, ay) = blob_means[a];
                let (bx, by) = blob_means[b];
                let between = ((ax - bx).powi(2) + (ay - by).powi(2)).sqrt();
                assert!(
                    between > 2.0 * spread,
                    "blobs {} and {} overlap: {} vs spread {}",
                    a,
                    b,
                    between,
                    spread
                );
            }
        }
    }

    #[test]
    fn summary_fields() {
        let dist = FeatureMatrix::new(1, 2, vec![0.1, 0.2]).unwrap();
        let report = evaluate(&ids(&[5]), &ids(&[5, 5]), &dist, false).unwrap();
        let s = report.summary();
        assert_eq!(s.rank1, 1.0);
        assert_eq!(s.map, 1.0);
        assert_eq!(s.queries_evaluated, 1);
    }
}
