//! Pose-transformed sample generation.
//!
//! Each body part is anchored by a pair of skeleton joints. The part's
//! similarity transform (rotation, uniform scale, translation) is the unique
//! 4-DOF map taking the source joint pair onto the target joint pair; part
//! pixels are warped by it and composited over the original image in a fixed
//! order. Target poses are drawn per image from the other images' poses,
//! without replacement, using a per-image seed of `seed ^ image_index`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{GrayRaster, RgbRaster};

pub const NUM_KEYPOINTS: usize = 15;
pub const NUM_PARTS: usize = 10;

/// Length below which a joint segment cannot anchor a transform.
pub const SEGMENT_EPS: f64 = 1e-9;

/// Parts whose joints fall below this confidence in either pose are left in
/// place untransformed.
pub const DEFAULT_CONF_THRESHOLD: f64 = 0.2;

/// 15-joint skeleton index map.
pub mod joints {
    pub const HEAD_TOP: usize = 0;
    pub const NECK: usize = 1;
    pub const LEFT_SHOULDER: usize = 2;
    pub const LEFT_ELBOW: usize = 3;
    pub const LEFT_WRIST: usize = 4;
    pub const RIGHT_SHOULDER: usize = 5;
    pub const RIGHT_ELBOW: usize = 6;
    pub const RIGHT_WRIST: usize = 7;
    pub const PELVIS: usize = 8;
    pub const LEFT_HIP: usize = 9;
    pub const LEFT_KNEE: usize = 10;
    pub const LEFT_ANKLE: usize = 11;
    pub const RIGHT_HIP: usize = 12;
    pub const RIGHT_KNEE: usize = 13;
    pub const RIGHT_ANKLE: usize = 14;
}

/// Canonical part order: head, torso, L/R upper arm, L/R forearm,
/// L/R thigh, L/R shin. Each part is anchored by one joint pair.
pub const PART_JOINTS: [(usize, usize); NUM_PARTS] = [
    (joints::NECK, joints::HEAD_TOP),           // 0 head
    (joints::NECK, joints::PELVIS),             // 1 torso
    (joints::LEFT_SHOULDER, joints::LEFT_ELBOW), // 2 left upper arm
    (joints::RIGHT_SHOULDER, joints::RIGHT_ELBOW), // 3 right upper arm
    (joints::LEFT_ELBOW, joints::LEFT_WRIST),   // 4 left forearm
    (joints::RIGHT_ELBOW, joints::RIGHT_WRIST), // 5 right forearm
    (joints::LEFT_HIP, joints::LEFT_KNEE),      // 6 left thigh
    (joints::RIGHT_HIP, joints::RIGHT_KNEE),    // 7 right thigh
    (joints::LEFT_KNEE, joints::LEFT_ANKLE),    // 8 left shin
    (joints::RIGHT_KNEE, joints::RIGHT_ANKLE),  // 9 right shin
];

/// Compositing order, first drawn to last (later parts overwrite earlier):
/// torso, head, left thigh, right thigh, left shin, right shin,
/// left upper arm, right upper arm, left forearm, right forearm.
pub const COMPOSITE_ORDER: [usize; NUM_PARTS] = [1, 0, 6, 7, 8, 9, 2, 3, 4, 5];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    pub x: f64,
    pub y: f64,
    pub confidence: f64,
}

/// 15 keypoints with confidences in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct Pose {
    keypoints: [Keypoint; NUM_KEYPOINTS],
}

impl Pose {
    pub fn new(keypoints: [Keypoint; NUM_KEYPOINTS]) -> Result<Self> {
        for (i, k) in keypoints.iter().enumerate() {
            if !(0.0..=1.0).contains(&k.confidence) {
                return Err(Error::Param(format!(
                    "keypoint {} confidence {} outside [0, 1]",
                    i, k.confidence
                )));
            }
            if !k.x.is_finite() || !k.y.is_finite() {
                return Err(Error::Numerics(format!("keypoint {} not finite", i)));
            }
        }
        Ok(Self { keypoints })
    }

    pub fn from_triples(triples: &[[f64; 3]]) -> Result<Self> {
        if triples.len() != NUM_KEYPOINTS {
            return Err(Error::Shape(format!(
                "{} keypoints, expected {}",
                triples.len(),
                NUM_KEYPOINTS
            )));
        }
        let mut kps = [Keypoint {
            x: 0.0,
            y: 0.0,
            confidence: 0.0,
        }; NUM_KEYPOINTS];
        for (i, t) in triples.iter().enumerate() {
            kps[i] = Keypoint {
                x: t[0],
                y: t[1],
                confidence: t[2],
            };
        }
        Self::new(kps)
    }

    pub fn keypoint(&self, i: usize) -> Keypoint {
        self.keypoints[i]
    }

    pub fn point(&self, i: usize) -> (f64, f64) {
        (self.keypoints[i].x, self.keypoints[i].y)
    }

    pub fn keypoints(&self) -> &[Keypoint; NUM_KEYPOINTS] {
        &self.keypoints
    }
}

/// Part region: raster mask (nonzero = member) or polygon vertex list.
#[derive(Debug, Clone, PartialEq)]
pub enum PartShape {
    Mask(GrayRaster),
    Polygon(Vec<(f64, f64)>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Part {
    pub joint_pair: (usize, usize),
    pub shape: PartShape,
}

/// Exactly 10 parts with valid, distinct joint anchors.
#[derive(Debug, Clone, PartialEq)]
pub struct PartSet {
    parts: Vec<Part>,
}

impl PartSet {
    pub fn new(parts: Vec<Part>) -> Result<Self> {
        if parts.len() != NUM_PARTS {
            return Err(Error::Shape(format!(
                "{} parts, expected {}",
                parts.len(),
                NUM_PARTS
            )));
        }
        for (i, p) in parts.iter().enumerate() {
            let (a, b) = p.joint_pair;
            if a >= NUM_KEYPOINTS || b >= NUM_KEYPOINTS || a == b {
                return Err(Error::Shape(format!(
                    "part {} has invalid joint pair ({}, {})",
                    i, a, b
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Part] {
        &self.parts
    }
}

/// 4-DOF planar similarity transform: p -> scale * R(rotation) * p + translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimilarityTransform {
    pub rotation: f64,
    pub scale: f64,
    pub translation: (f64, f64),
}

impl SimilarityTransform {
    pub fn identity() -> Self {
        Self {
            rotation: 0.0,
            scale: 1.0,
            translation: (0.0, 0.0),
        }
    }

    pub fn apply(&self, p: (f64, f64)) -> (f64, f64) {
        let (c, s) = (self.rotation.cos(), self.rotation.sin());
        (
            self.scale * (c * p.0 - s * p.1) + self.translation.0,
            self.scale * (s * p.0 + c * p.1) + self.translation.1,
        )
    }

    pub fn inverse(&self) -> Self {
        let inv_scale = 1.0 / self.scale;
        let (c, s) = ((-self.rotation).cos(), (-self.rotation).sin());
        let tx = -inv_scale * (c * self.translation.0 - s * self.translation.1);
        let ty = -inv_scale * (s * self.translation.0 + c * self.translation.1);
        Self {
            rotation: -self.rotation,
            scale: inv_scale,
            translation: (tx, ty),
        }
    }
}

fn segment_length(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt()
}

/// The unique similarity transform mapping segment (src_a, src_b) onto
/// (tgt_a, tgt_b): scale is the length ratio, rotation the angle difference,
/// and the translation closes the correspondence at `src_a`.
pub fn estimate_part_transform(
    src_a: (f64, f64),
    src_b: (f64, f64),
    tgt_a: (f64, f64),
    tgt_b: (f64, f64),
) -> Result<SimilarityTransform> {
    let src_len = segment_length(src_a, src_b);
    let tgt_len = segment_length(tgt_a, tgt_b);
    if src_len <= SEGMENT_EPS {
        return Err(Error::DegenerateSegment(format!(
            "source segment length {:.3e}",
            src_len
        )));
    }
    if tgt_len <= SEGMENT_EPS {
        return Err(Error::DegenerateSegment(format!(
            "target segment length {:.3e}",
            tgt_len
        )));
    }
    let scale = tgt_len / src_len;
    let rotation = (tgt_b.1 - tgt_a.1).atan2(tgt_b.0 - tgt_a.0)
        - (src_b.1 - src_a.1).atan2(src_b.0 - src_a.0);
    let (c, s) = (rotation.cos(), rotation.sin());
    let translation = (
        tgt_a.0 - scale * (c * src_a.0 - s * src_a.1),
        tgt_a.1 - scale * (s * src_a.0 + c * src_a.1),
    );
    Ok(SimilarityTransform {
        rotation,
        scale,
        translation,
    })
}

/// Even-odd rule point-in-polygon test.
pub fn point_in_polygon(p: (f64, f64), polygon: &[(f64, f64)]) -> bool {
    let n = polygon.len();
    if n < 3 {
        return false;
    }
    let mut inside = false;
    let mut j = n - 1;
    for i in 0..n {
        let (xi, yi) = polygon[i];
        let (xj, yj) = polygon[j];
        if (yi > p.1) != (yj > p.1) {
            let x_cross = xj + (p.1 - yj) / (yi - yj) * (xi - xj);
            if p.0 < x_cross {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn shape_covers(shape: &PartShape, src: (f64, f64), xi: i64, yi: i64) -> bool {
    match shape {
        PartShape::Mask(mask) => {
            xi >= 0
                && yi >= 0
                && (xi as usize) < mask.width()
                && (yi as usize) < mask.height()
                && mask.get(xi as usize, yi as usize) != 0
        }
        PartShape::Polygon(poly) => point_in_polygon(src, poly),
    }
}

/// Warps each confident part from the source pose to the target pose and
/// composites the results over a copy of the original image.
///
/// Sampling is nearest-neighbor via the inverse transform, so a part whose
/// target segment equals its source segment reproduces its pixels bit-exactly.
/// Parts with a low-confidence or degenerate joint segment are left in place.
pub fn apply_part_transforms(
    image: &RgbRaster,
    parts: &PartSet,
    src_pose: &Pose,
    tgt_pose: &Pose,
    conf_threshold: f64,
) -> Result<RgbRaster> {
    for part in parts.parts() {
        if let PartShape::Mask(mask) = &part.shape {
            if mask.width() != image.width() || mask.height() != image.height() {
                return Err(Error::Shape(format!(
                    "part mask {}x{} does not match image {}x{}",
                    mask.width(),
                    mask.height(),
                    image.width(),
                    image.height()
                )));
            }
        }
    }

    let (w, h) = (image.width(), image.height());
    let mut out = image.clone();
    for &pi in COMPOSITE_ORDER.iter() {
        let part = &parts.parts()[pi];
        let (a, b) = part.joint_pair;
        let conf = [
            src_pose.keypoint(a).confidence,
            src_pose.keypoint(b).confidence,
            tgt_pose.keypoint(a).confidence,
            tgt_pose.keypoint(b).confidence,
        ];
        if conf.iter().any(|&c| c < conf_threshold) {
            continue;
        }
        let transform = match estimate_part_transform(
            src_pose.point(a),
            src_pose.point(b),
            tgt_pose.point(a),
            tgt_pose.point(b),
        ) {
            Ok(t) => t,
            // Untransformable segment: treat like a low-confidence part.
            Err(Error::DegenerateSegment(_)) => continue,
            Err(e) => return Err(e),
        };
        let inverse = transform.inverse();
        for y in 0..h {
            for x in 0..w {
                let src = inverse.apply((x as f64, y as f64));
                let xi = src.0.round() as i64;
                let yi = src.1.round() as i64;
                if xi < 0 || yi < 0 || xi >= w as i64 || yi >= h as i64 {
                    continue;
                }
                if shape_covers(&part.shape, src, xi, yi) {
                    out.set(x, y, image.get(xi as usize, yi as usize));
                }
            }
        }
    }
    Ok(out)
}

/// Generates K pose-transformed variants per image.
///
/// Target poses for image `i` are drawn uniformly without replacement from
/// the other images' poses using a ChaCha stream seeded with
/// `seed ^ i`. Returns the transformed rasters together with the source image
/// index of each output; outputs are grouped by source image.
pub fn generate_pt(
    images: &[RgbRaster],
    poses: &[Pose],
    parts: &[PartSet],
    k: usize,
    seed: u64,
) -> Result<(Vec<RgbRaster>, Vec<usize>)> {
    let n = images.len();
    if poses.len() != n || parts.len() != n {
        return Err(Error::Shape(format!(
            "{} images, {} poses, {} part sets",
            n,
            poses.len(),
            parts.len()
        )));
    }
    if k > 0 && k >= n {
        return Err(Error::InsufficientPoses(format!(
            "cannot draw K={} distinct target poses from {} other images",
            k,
            n.saturating_sub(1)
        )));
    }
    let mut rasters = Vec::with_capacity(k * n);
    let mut sources = Vec::with_capacity(k * n);
    for i in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let mut candidates: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        let (chosen, _) = candidates.partial_shuffle(&mut rng, k);
        for &t in chosen.iter() {
            let warped = apply_part_transforms(
                &images[i],
                &parts[i],
                &poses[i],
                &poses[t],
                DEFAULT_CONF_THRESHOLD,
            )?;
            rasters.push(warped);
            sources.push(i);
        }
    }
    Ok((rasters, sources))
}

/// Warps a single canonical part annotation to a target pose, yielding a
/// per-image part set without a per-image part estimator.
pub fn warp_sia_parts(
    canonical_parts: &PartSet,
    canonical_pose: &Pose,
    target_pose: &Pose,
) -> Result<PartSet> {
    let mut parts = Vec::with_capacity(NUM_PARTS);
    for part in canonical_parts.parts() {
        let (a, b) = part.joint_pair;
        let transform = estimate_part_transform(
            canonical_pose.point(a),
            canonical_pose.point(b),
            target_pose.point(a),
            target_pose.point(b),
        )?;
        let shape = match &part.shape {
            PartShape::Polygon(poly) => {
                PartShape::Polygon(poly.iter().map(|&v| transform.apply(v)).collect())
            }
            PartShape::Mask(mask) => {
                let inverse = transform.inverse();
                let mut out = GrayRaster::new(mask.width(), mask.height());
                for y in 0..mask.height() {
                    for x in 0..mask.width() {
                        let src = inverse.apply((x as f64, y as f64));
                        let xi = src.0.round() as i64;
                        let yi = src.1.round() as i64;
                        if xi >= 0
                            && yi >= 0
                            && (xi as usize) < mask.width()
                            && (yi as usize) < mask.height()
                        {
                            out.set(x, y, mask.get(xi as usize, yi as usize));
                        }
                    }
                }
                PartShape::Mask(out)
            }
        };
        parts.push(Part {
            joint_pair: part.joint_pair,
            shape,
        });
    }
    PartSet::new(parts)
}

// ---------------------------------------------------------------------------
// Keypoint and annotation files.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct KeypointRecord {
    id: usize,
    camera: Option<u32>,
    keypoints: Vec<[f64; 3]>,
}

pub struct PoseEntry {
    pub id: usize,
    pub camera: Option<u32>,
    pub pose: Pose,
}

/// JSON lines, one `{"id", "camera", "keypoints": [[x, y, c] x 15]}` per image.
pub fn write_keypoints(path: &Path, entries: &[PoseEntry]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in entries {
        let rec = KeypointRecord {
            id: e.id,
            camera: e.camera,
            keypoints: e
                .pose
                .keypoints()
                .iter()
                .map(|k| [k.x, k.y, k.confidence])
                .collect(),
        };
        let line = serde_json::to_string(&rec)
            .map_err(|err| Error::format(path, format!("serialize: {}", err)))?;
        writeln!(w, "{}", line).map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_keypoints(path: &Path) -> Result<Vec<PoseEntry>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut entries = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: KeypointRecord = serde_json::from_str(&line)
            .map_err(|e| Error::format(path, format!("line {}: {}", ln + 1, e)))?;
        entries.push(PoseEntry {
            id: rec.id,
            camera: rec.camera,
            pose: Pose::from_triples(&rec.keypoints)?,
        });
    }
    Ok(entries)
}

#[derive(Debug, Serialize, Deserialize)]
struct SiaPartRecord {
    joints: [usize; 2],
    polygon: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct SiaRecord {
    pose: Vec<[f64; 3]>,
    parts: Vec<SiaPartRecord>,
}

pub struct SiaAnnotation {
    pub pose: Pose,
    pub parts: PartSet,
}

/// Single-image annotation: the canonical pose plus 10 part polygons.
pub fn write_sia(path: &Path, annotation: &SiaAnnotation) -> Result<()> {
    let mut parts = Vec::with_capacity(NUM_PARTS);
    for p in annotation.parts.parts() {
        let polygon = match &p.shape {
            PartShape::Polygon(poly) => poly.iter().map(|&(x, y)| [x, y]).collect(),
            PartShape::Mask(_) => {
                return Err(Error::Param(
                    "single-image annotations store polygons, not masks".into(),
                ))
            }
        };
        parts.push(SiaPartRecord {
            joints: [p.joint_pair.0, p.joint_pair.1],
            polygon,
        });
    }
    let rec = SiaRecord {
        pose: annotation
            .pose
            .keypoints()
            .iter()
            .map(|k| [k.x, k.y, k.confidence])
            .collect(),
        parts,
    };
    let text = serde_json::to_string_pretty(&rec)
        .map_err(|e| Error::format(path, format!("serialize: {}", e)))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_sia(path: &Path) -> Result<SiaAnnotation> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let rec: SiaRecord =
        serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
    let pose = Pose::from_triples(&rec.pose)?;
    let parts = PartSet::new(
        rec.parts
            .into_iter()
            .map(|p| Part {
                joint_pair: (p.joints[0], p.joints[1]),
                shape: PartShape::Polygon(p.polygon.into_iter().map(|v| (v[0], v[1])).collect()),
            })
            .collect(),
    )?;
    Ok(SiaAnnotation { pose, parts })
}
