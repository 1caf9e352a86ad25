//! Dataset representation: samples, pseudo labels, and the merged
//! pose-transformed (PT) dataset.
//!
//! Pseudo labels are 1-based dense integers. A freshly ingested dataset of N
//! rows gets the bijective labeling 1..=N; transformed samples inherit the
//! label of their source sample. File formats: a binary feature container
//! ("RDF1"), a CSV alternative, and a JSON-lines sample manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::FeatureMatrix;

const FEATURE_MAGIC: &[u8; 4] = b"RDF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Original,
    Transformed,
}

/// One dataset record: a feature vector plus bookkeeping.
///
/// `source` is the `sample_id` of the original this sample was derived from;
/// it is `None` exactly when `origin == Original`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub sample_id: usize,
    pub features: Vec<f64>,
    pub pseudo_label: usize,
    pub camera_id: Option<u32>,
    pub origin: Origin,
    pub source: Option<usize>,
}

/// Train/query/gallery split over sample indices.
#[derive(Debug, Clone, Default)]
pub struct DatasetSplit {
    pub train: Vec<usize>,
    pub query: Vec<usize>,
    pub gallery: Vec<usize>,
}

impl DatasetSplit {
    /// Query and gallery must not overlap the train set.
    pub fn validate(&self) -> Result<()> {
        let train: std::collections::BTreeSet<usize> = self.train.iter().copied().collect();
        for &i in self.query.iter().chain(self.gallery.iter()) {
            if train.contains(&i) {
                return Err(Error::Cardinality(format!(
                    "sample {} appears in train and in query/gallery",
                    i
                )));
            }
        }
        Ok(())
    }
}

/// Originals plus their K pose-transformed variants.
#[derive(Debug, Clone)]
pub struct PTDataset {
    samples: Vec<Sample>,
    k_factor: usize,
    n_original: usize,
}

impl PTDataset {
    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn k_factor(&self) -> usize {
        self.k_factor
    }

    pub fn n_original(&self) -> usize {
        self.n_original
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Rebuilds a PT dataset from a flat sample list (e.g. a loaded manifest),
    /// validating every structural invariant.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self> {
        let originals: Vec<Sample> = samples
            .iter()
            .filter(|s| s.origin == Origin::Original)
            .cloned()
            .collect();
        let transformed: Vec<Sample> = samples
            .iter()
            .filter(|s| s.origin == Origin::Transformed)
            .cloned()
            .collect();
        if originals.is_empty() {
            return Err(Error::EmptyDataset("no original samples".into()));
        }
        if transformed.len() % originals.len() != 0 {
            return Err(Error::Cardinality(format!(
                "{} transformed samples not divisible by {} originals",
                transformed.len(),
                originals.len()
            )));
        }
        let k = transformed.len() / originals.len();
        // merge_pt re-derives inherited labels; reject manifests that disagree.
        let by_id: BTreeMap<usize, usize> = originals
            .iter()
            .map(|s| (s.sample_id, s.pseudo_label))
            .collect();
        for t in &transformed {
            let src = t
                .source
                .ok_or_else(|| Error::Provenance(format!("sample {} has no source", t.sample_id)))?;
            let expected = by_id.get(&src).ok_or_else(|| {
                Error::Provenance(format!("sample {} references unknown source {}", t.sample_id, src))
            })?;
            if t.pseudo_label != *expected {
                return Err(Error::Provenance(format!(
                    "sample {} has label {} but its source {} has label {}",
                    t.sample_id, t.pseudo_label, src, expected
                )));
            }
        }
        let merged = merge_pt(&originals, &transformed, k)?;
        // Preserve the manifest order rather than the merge order.
        Ok(Self {
            samples,
            k_factor: merged.k_factor,
            n_original: merged.n_original,
        })
    }
}

/// Assigns each row its own unique 1-based pseudo label.
pub fn assign_pseudo_labels(features: &FeatureMatrix) -> Result<Vec<Sample>> {
    assign_pseudo_labels_with_cameras(features, None)
}

/// Same as [`assign_pseudo_labels`] but attaches per-row camera ids.
pub fn assign_pseudo_labels_with_cameras(
    features: &FeatureMatrix,
    cameras: Option<&[Option<u32>]>,
) -> Result<Vec<Sample>> {
    if features.rows() == 0 {
        return Err(Error::EmptyDataset("feature matrix has no rows".into()));
    }
    if let Some(c) = cameras {
        if c.len() != features.rows() {
            return Err(Error::Shape(format!(
                "{} camera ids for {} rows",
                c.len(),
                features.rows()
            )));
        }
    }
    Ok((0..features.rows())
        .map(|i| Sample {
            sample_id: i,
            features: features.row(i).to_vec(),
            pseudo_label: i + 1,
            camera_id: cameras.and_then(|c| c[i]),
            origin: Origin::Original,
            source: None,
        })
        .collect())
}

/// Merges originals with their transformed variants into a PT dataset.
///
/// Transformed samples take the pseudo label of their source original. The
/// originals must carry the bijective labeling 1..=N and every original must
/// have exactly K transformed variants.
pub fn merge_pt(originals: &[Sample], transformed: &[Sample], k: usize) -> Result<PTDataset> {
    let n = originals.len();
    if n == 0 {
        return Err(Error::EmptyDataset("no original samples".into()));
    }
    if transformed.len() != k * n {
        return Err(Error::Cardinality(format!(
            "expected {} transformed samples (K={} x N={}), got {}",
            k * n,
            k,
            n,
            transformed.len()
        )));
    }

    let mut label_seen = vec![false; n];
    let mut label_by_id: BTreeMap<usize, usize> = BTreeMap::new();
    for s in originals {
        if s.origin != Origin::Original {
            return Err(Error::Provenance(format!(
                "sample {} in the original list is not an original",
                s.sample_id
            )));
        }
        if s.pseudo_label == 0 || s.pseudo_label > n {
            return Err(Error::Cardinality(format!(
                "original label {} outside 1..={}",
                s.pseudo_label, n
            )));
        }
        if label_seen[s.pseudo_label - 1] {
            return Err(Error::Cardinality(format!(
                "original label {} repeated",
                s.pseudo_label
            )));
        }
        label_seen[s.pseudo_label - 1] = true;
        if label_by_id.insert(s.sample_id, s.pseudo_label).is_some() {
            return Err(Error::Provenance(format!(
                "duplicate sample id {}",
                s.sample_id
            )));
        }
    }

    let mut per_source: BTreeMap<usize, usize> = BTreeMap::new();
    let mut samples: Vec<Sample> = originals.to_vec();
    for t in transformed {
        if t.origin != Origin::Transformed {
            return Err(Error::Provenance(format!(
                "sample {} in the transformed list is not transformed",
                t.sample_id
            )));
        }
        let src = t
            .source
            .ok_or_else(|| Error::Provenance(format!("sample {} has no source", t.sample_id)))?;
        let label = *label_by_id.get(&src).ok_or_else(|| {
            Error::Provenance(format!(
                "sample {} references unknown source {}",
                t.sample_id, src
            ))
        })?;
        if label_by_id.contains_key(&t.sample_id) || per_source.contains_key(&t.sample_id) {
            return Err(Error::Provenance(format!(
                "duplicate sample id {}",
                t.sample_id
            )));
        }
        per_source.insert(t.sample_id, src);
        let mut s = t.clone();
        s.pseudo_label = label;
        samples.push(s);
    }

    // Each original contributes exactly K variants.
    let mut counts: BTreeMap<usize, usize> = label_by_id.keys().map(|&id| (id, 0)).collect();
    for src in per_source.values() {
        *counts.get_mut(src).expect("source validated above") += 1;
    }
    if let Some((id, c)) = counts.iter().find(|(_, &c)| c != k) {
        return Err(Error::Cardinality(format!(
            "original {} has {} transformed variants, expected K={}",
            id, c, k
        )));
    }

    Ok(PTDataset {
        samples,
        k_factor: k,
        n_original: n,
    })
}

/// Keeps only original samples, preserving order.
pub fn drop_transformed(pt: &PTDataset) -> Vec<Sample> {
    pt.samples
        .iter()
        .filter(|s| s.origin == Origin::Original)
        .cloned()
        .collect()
}

// ---------------------------------------------------------------------------
// Binary feature container: "RDF1", u32 rows, u32 dim, row-major f32 (LE).
// ---------------------------------------------------------------------------

pub fn write_features_binary(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(FEATURE_MAGIC).map_err(io_err)?;
    w.write_all(&(features.rows() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(&(features.dim() as u32).to_le_bytes())
        .map_err(io_err)?;
    for v in features.data() {
        w.write_all(&(*v as f32).to_le_bytes()).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn read_features_binary(path: &Path) -> Result<FeatureMatrix> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io_err = |e| Error::io(path, e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != FEATURE_MAGIC {
        return Err(Error::format(path, "bad magic, expected RDF1"));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4).map_err(io_err)?;
    let rows = u32::from_le_bytes(buf4) as usize;
    r.read_exact(&mut buf4).map_err(io_err)?;
    let dim = u32::from_le_bytes(buf4) as usize;
    let mut data = Vec::with_capacity(rows * dim);
    for _ in 0..rows * dim {
        r.read_exact(&mut buf4).map_err(io_err)?;
        data.push(f32::from_le_bytes(buf4) as f64);
    }
    let mut tail = [0u8; 1];
    match r.read(&mut tail) {
        Ok(0) => {}
        Ok(_) => return Err(Error::format(path, "trailing bytes after feature data")),
        Err(e) => return Err(Error::io(path, e)),
    }
    FeatureMatrix::new(rows, dim, data)
}

// ---------------------------------------------------------------------------
// CSV alternative: header `id,f0,...,f{D-1}` with an optional trailing
// `camera` column.
// ---------------------------------------------------------------------------

pub fn write_features_csv(
    path: &Path,
    features: &FeatureMatrix,
    ids: &[usize],
    cameras: Option<&[Option<u32>]>,
) -> Result<()> {
    if ids.len() != features.rows() {
        return Err(Error::Shape(format!(
            "{} ids for {} rows",
            ids.len(),
            features.rows()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    let mut header = String::from("id");
    for d in 0..features.dim() {
        header.push_str(&format!(",f{}", d));
    }
    if cameras.is_some() {
        header.push_str(",camera");
    }
    writeln!(w, "{}", header).map_err(io_err)?;
    for i in 0..features.rows() {
        let mut line = ids[i].to_string();
        for v in features.row(i) {
            line.push_str(&format!(",{}", v));
        }
        if let Some(c) = cameras {
            match c[i] {
                Some(cam) => line.push_str(&format!(",{}", cam)),
                None => line.push(','),
            }
        }
        writeln!(w, "{}", line).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub struct CsvFeatures {
    pub features: FeatureMatrix,
    pub ids: Vec<usize>,
    pub cameras: Option<Vec<Option<u32>>>,
}

pub fn read_features_csv(path: &Path) -> Result<CsvFeatures> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::format(path, "empty file"))?
        .map_err(|e| Error::io(path, e))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"id") {
        return Err(Error::format(path, "header must start with 'id'"));
    }
    let has_camera = cols.last() == Some(&"camera");
    let dim = cols.len() - 1 - usize::from(has_camera);
    for (d, c) in cols[1..1 + dim].iter().enumerate() {
        if *c != format!("f{}", d) {
            return Err(Error::format(path, format!("unexpected column '{}'", c)));
        }
    }
    let mut ids = Vec::new();
    let mut data = Vec::new();
    let mut cameras = Vec::new();
    for (ln, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::format(
                path,
                format!("line {}: {} fields, expected {}", ln + 2, fields.len(), cols.len()),
            ));
        }
        let id: usize = fields[0]
            .parse()
            .map_err(|_| Error::format(path, format!("line {}: bad id '{}'", ln + 2, fields[0])))?;
        ids.push(id);
        for f in &fields[1..1 + dim] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::format(path, format!("line {}: bad float '{}'", ln + 2, f)))?;
            data.push(v);
        }
        if has_camera {
            let c = fields[cols.len() - 1];
            cameras.push(if c.is_empty() {
                None
            } else {
                Some(c.parse().map_err(|_| {
                    Error::format(path, format!("line {}: bad camera '{}'", ln + 2, c))
                })?)
            });
        }
    }
    let rows = ids.len();
    Ok(CsvFeatures {
        features: FeatureMatrix::new(rows, dim, data)?,
        ids,
        cameras: has_camera.then_some(cameras),
    })
}

// ---------------------------------------------------------------------------
// Sample manifest: JSON lines, one object per sample. Line order matches the
// row order of the companion feature file.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct ManifestRecord {
    id: usize,
    label: usize,
    camera: Option<u32>,
    origin: Origin,
    source: Option<usize>,
}

pub fn write_manifest(path: &Path, samples: &[Sample]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in samples {
        let rec = ManifestRecord {
            id: s.sample_id,
            label: s.pseudo_label,
            camera: s.camera_id,
            origin: s.origin,
            source: s.source,
        };
        let line = serde_json::to_string(&rec)
            .map_err(|e| Error::format(path, format!("serialize: {}", e)))?;
        writeln!(w, "{}", line).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads a manifest and joins it with a feature matrix by line/row order.
pub fn read_manifest(path: &Path, features: &FeatureMatrix) -> Result<Vec<Sample>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut samples = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: ManifestRecord = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {}", ln + 1, e)))?;
        if ln >= features.rows() {
            return Err(Error::Cardinality(format!(
                "manifest {} has more lines than feature rows ({})",
                path.display(),
                features.rows()
            )));
        }
        samples.push(Sample {
            sample_id: rec.id,
            features: features.row(ln).to_vec(),
            pseudo_label: rec.label,
            camera_id: rec.camera,
            origin: rec.origin,
            source: rec.source,
        });
    }
    if samples.len() != features.rows() {
        return Err(Error::Cardinality(format!(
            "manifest {} has {} lines for {} feature rows",
            path.display(),
            samples.len(),
            features.rows()
        )));
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn originals(n: usize) -> Vec<Sample> {
        let m = FeatureMatrix::new(n, 2, (0..2 * n).map(|v| v as f64).collect()).unwrap();
        assign_pseudo_labels(&m).unwrap()
    }

    fn variants(originals: &[Sample], k: usize) -> Vec<Sample> {
        let n = originals.len();
        let mut out = Vec::new();
        for (j, o) in originals.iter().enumerate() {
            for c in 0..k {
                out.push(Sample {
                    sample_id: n + j * k + c,
                    features: o.features.clone(),
                    pseudo_label: 0, // merge assigns it
                    camera_id: None,
                    origin: Origin::Transformed,
                    source: Some(o.sample_id),
                });
            }
        }
        out
    }

    #[test]
    fn labels_are_identity_bijection() {
        let s = originals(3);
        assert_eq!(
            s.iter().map(|x| x.pseudo_label).collect::<Vec<_>>(),
            vec![1, 2, 3]
        );
        let one = originals(1);
        assert_eq!(one[0].pseudo_label, 1);
    }

    #[test]
    fn training_set_scale_gets_distinct_labels() {
        // Per-image labels at a real train-split size: 12,936 rows.
        let n = 12_936;
        let m = FeatureMatrix::new(n, 1, vec![0.5; n]).unwrap();
        let samples = assign_pseudo_labels(&m).unwrap();
        let labels: std::collections::BTreeSet<usize> =
            samples.iter().map(|s| s.pseudo_label).collect();
        assert_eq!(labels.len(), n);
        assert_eq!(*labels.first().unwrap(), 1);
        assert_eq!(*labels.last().unwrap(), n);
    }

    #[test]
    fn split_rejects_train_overlap() {
        let good = DatasetSplit {
            train: vec![0, 1],
            query: vec![2],
            gallery: vec![3, 4],
        };
        good.validate().unwrap();
        let bad = DatasetSplit {
            train: vec![0, 1],
            query: vec![1],
            gallery: vec![3],
        };
        assert!(matches!(bad.validate(), Err(Error::Cardinality(_))));
    }

    #[test]
    fn empty_features_rejected() {
        let m = FeatureMatrix::zeros(0, 4);
        assert!(matches!(
            assign_pseudo_labels(&m),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn permuted_rows_get_permuted_labels() {
        // Labels follow row positions: permuting rows permutes the identity
        // labeling the same way.
        let m = FeatureMatrix::new(4, 1, vec![10.0, 20.0, 30.0, 40.0]).unwrap();
        let perm = [2usize, 0, 3, 1];
        let pm = m.gather(&perm).unwrap();
        let base = assign_pseudo_labels(&m).unwrap();
        let permuted = assign_pseudo_labels(&pm).unwrap();
        for (pos, &src) in perm.iter().enumerate() {
            assert_eq!(permuted[pos].features, base[src].features);
            assert_eq!(permuted[pos].pseudo_label, pos + 1);
        }
    }

    #[test]
    fn merge_counts_and_inheritance() {
        let o = originals(5);
        let t = variants(&o, 3);
        let pt = merge_pt(&o, &t, 3).unwrap();
        assert_eq!(pt.len(), 20);
        let mut counts = vec![0usize; 5];
        for s in pt.samples() {
            counts[s.pseudo_label - 1] += 1;
        }
        assert!(counts.iter().all(|&c| c == 4));
    }

    #[test]
    fn merge_k0_is_identity() {
        let o = originals(4);
        let pt = merge_pt(&o, &[], 0).unwrap();
        assert_eq!(pt.samples(), o.as_slice());
    }

    #[test]
    fn transformed_inherits_source_label() {
        let o = originals(2);
        let t = vec![
            Sample {
                sample_id: 2,
                features: vec![0.0, 0.0],
                pseudo_label: 0,
                camera_id: None,
                origin: Origin::Transformed,
                source: Some(o[1].sample_id),
            },
            Sample {
                sample_id: 3,
                features: vec![0.0, 0.0],
                pseudo_label: 0,
                camera_id: None,
                origin: Origin::Transformed,
                source: Some(o[0].sample_id),
            },
        ];
        let pt = merge_pt(&o, &t, 1).unwrap();
        assert_eq!(pt.samples()[2].pseudo_label, o[1].pseudo_label);
        assert_eq!(pt.samples()[3].pseudo_label, o[0].pseudo_label);
    }

    #[test]
    fn merge_errors() {
        let o = originals(3);
        let t = variants(&o, 2);
        assert!(matches!(
            merge_pt(&o, &t, 1),
            Err(Error::Cardinality(_))
        ));
        let mut dangling = variants(&o, 1);
        dangling[0].source = Some(999);
        assert!(matches!(
            merge_pt(&o, &dangling, 1),
            Err(Error::Provenance(_))
        ));
        let mut uneven = variants(&o, 1);
        uneven[0].source = Some(o[1].sample_id); // original 0 gets none, 1 gets two
        assert!(matches!(merge_pt(&o, &uneven, 1), Err(Error::Cardinality(_))));
    }

    #[test]
    fn drop_then_remerge_round_trip() {
        let o = originals(5);
        let t = variants(&o, 3);
        let pt = merge_pt(&o, &t, 3).unwrap();
        let dropped = drop_transformed(&pt);
        assert_eq!(dropped.len(), 5);
        assert_eq!(dropped, o);
        let again = merge_pt(&dropped, &[], 0).unwrap();
        assert_eq!(again.len(), 5);
        // K=0 dataset: drop is the identity.
        assert_eq!(drop_transformed(&again), o);
    }

    #[test]
    fn pt_size_invariant_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(1..8usize);
            let k = rng.random_range(0..4usize);
            let o = originals(n);
            let t = variants(&o, k);
            let pt = merge_pt(&o, &t, k).unwrap();
            assert_eq!(pt.len(), (k + 1) * n);
        }
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.rdf");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data: Vec<f64> = (0..24).map(|_| rng.random_range(-5.0..5.0f64)).collect();
        let m = FeatureMatrix::new(4, 6, data).unwrap();
        write_features_binary(&path, &m).unwrap();
        let bytes1 = std::fs::read(&path).unwrap();
        let loaded = read_features_binary(&path).unwrap();
        write_features_binary(&path, &loaded).unwrap();
        let bytes2 = std::fs::read(&path).unwrap();
        assert_eq!(bytes1, bytes2);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        let m = FeatureMatrix::new(2, 3, vec![0.25, -1.5, 3.0, 0.1, 0.2, 0.3]).unwrap();
        write_features_csv(&path, &m, &[7, 9], Some(&[Some(0), None])).unwrap();
        let back = read_features_csv(&path).unwrap();
        assert_eq!(back.features, m);
        assert_eq!(back.ids, vec![7, 9]);
        assert_eq!(back.cameras, Some(vec![Some(0), None]));
    }

    #[test]
    fn manifest_round_trip_and_pt_rebuild() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("samples.jsonl");
        let o = originals(3);
        let t = variants(&o, 2);
        let pt = merge_pt(&o, &t, 2).unwrap();
        write_manifest(&path, pt.samples()).unwrap();
        let rows: Vec<Vec<f64>> = pt.samples().iter().map(|s| s.features.clone()).collect();
        let features = FeatureMatrix::from_rows(&rows).unwrap();
        let loaded = read_manifest(&path, &features).unwrap();
        assert_eq!(loaded, pt.samples());
        let rebuilt = PTDataset::from_samples(loaded).unwrap();
        assert_eq!(rebuilt.k_factor(), 2);
        assert_eq!(rebuilt.n_original(), 3);
    }
}
