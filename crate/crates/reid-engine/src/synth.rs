//! Seeded synthetic datasets: identity-structured feature clouds and stick
//! figures with exact ground-truth poses and part masks.
//!
//! The feature generator places identity centroids at a minimum pairwise
//! separation, draws isotropic samples around them, assigns cameras
//! round-robin within each identity and adds a fixed per-camera bias vector.
//! The figure generator renders capsule limbs with fixed lengths (so part
//! transforms between figures are rotation plus translation) and records the
//! exact mask of every limb it stamps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::{euclidean, FeatureMatrix};
use crate::pose_transform::{joints, Part, PartSet, PartShape, Pose, NUM_KEYPOINTS, PART_JOINTS};
use crate::raster::{GrayRaster, RgbRaster};

#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub num_identities: usize,
    /// Per-identity sample counts; uneven distributions are first-class.
    pub samples_per_identity: Vec<usize>,
    pub feature_dim: usize,
    pub identity_spread: f64,
    pub identity_separation: f64,
    pub num_cameras: usize,
    /// Std of each camera's fixed additive bias vector (0 disables it).
    pub camera_bias: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn uniform(num_identities: usize, samples_each: usize, feature_dim: usize) -> Self {
        Self {
            num_identities,
            samples_per_identity: vec![samples_each; num_identities],
            feature_dim,
            identity_spread: 1.0,
            identity_separation: 10.0,
            num_cameras: 0,
            camera_bias: 0.0,
            seed: 7,
        }
    }

    /// Uneven per-identity counts drawn uniformly from `[min, max]`.
    pub fn uneven(
        num_identities: usize,
        min_samples: usize,
        max_samples: usize,
        feature_dim: usize,
        seed: u64,
    ) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples_per_identity = (0..num_identities)
            .map(|_| rng.random_range(min_samples..=max_samples))
            .collect();
        Self {
            num_identities,
            samples_per_identity,
            feature_dim,
            identity_spread: 1.0,
            identity_separation: 10.0,
            num_cameras: 0,
            camera_bias: 0.0,
            seed,
        }
    }

    pub fn total_samples(&self) -> usize {
        self.samples_per_identity.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_identities == 0 {
            return Err(Error::Param("need at least one identity".into()));
        }
        if self.samples_per_identity.len() != self.num_identities {
            return Err(Error::Param(format!(
                "{} per-identity counts for {} identities",
                self.samples_per_identity.len(),
                self.num_identities
            )));
        }
        if self.samples_per_identity.iter().any(|&s| s == 0) {
            return Err(Error::Param("every identity needs >= 1 sample".into()));
        }
        if self.feature_dim == 0 {
            return Err(Error::Param("feature_dim must be positive".into()));
        }
        if self.identity_spread <= 0.0 || self.identity_separation <= 0.0 {
            return Err(Error::Param("spread and separation must be positive".into()));
        }
        if self.camera_bias < 0.0 {
            return Err(Error::Param("camera_bias must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthFeatures {
    pub features: FeatureMatrix,
    pub identities: Vec<u64>,
    pub cameras: Vec<Option<u32>>,
    pub centroids: FeatureMatrix,
}

/// Identity centroids at pairwise distance >= `identity_separation` inside a
/// growing sampling box; bounded retries, then `Placement`.
fn place_centroids(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<FeatureMatrix> {
    let d = spec.feature_dim;
    let k = spec.num_identities;
    let base = spec.identity_separation * (k as f64).powf(1.0 / d as f64).max(1.0);
    for round in 0..8 {
        let side = base * (1 << round) as f64;
        let mut centroids: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut attempts = 0usize;
        while centroids.len() < k && attempts < 200 * k {
            attempts += 1;
            let candidate: Vec<f64> = (0..d).map(|_| rng.random_range(-side..side)).collect();
            if centroids
                .iter()
                .all(|c| euclidean(c, &candidate) >= spec.identity_separation)
            {
                centroids.push(candidate);
            }
        }
        if centroids.len() == k {
            return FeatureMatrix::from_rows(&centroids);
        }
    }
    Err(Error::Placement(format!(
        "could not place {} centroids at separation {} in {} dims",
        k, spec.identity_separation, d
    )))
}

/// Seeded identity-structured feature cloud with camera bias.
pub fn generate_features(spec: &SynthSpec) -> Result<SynthFeatures> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centroids = place_centroids(spec, &mut rng)?;
    let noise = Normal::new(0.0, spec.identity_spread).expect("positive spread");

    let camera_biases: Vec<Vec<f64>> = if spec.num_cameras > 0 && spec.camera_bias > 0.0 {
        let bias = Normal::new(0.0, spec.camera_bias).expect("nonnegative bias");
        (0..spec.num_cameras)
            .map(|_| (0..spec.feature_dim).map(|_| bias.sample(&mut rng)).collect())
            .collect()
    } else {
        vec![vec![0.0; spec.feature_dim]; spec.num_cameras.max(1)]
    };

    let total = spec.total_samples();
    let mut rows = Vec::with_capacity(total);
    let mut identities = Vec::with_capacity(total);
    let mut cameras = Vec::with_capacity(total);
    for (id, &count) in spec.samples_per_identity.iter().enumerate() {
        for s in 0..count {
            let camera = if spec.num_cameras > 0 {
                Some((s % spec.num_cameras) as u32)
            } else {
                None
            };
            let row: Vec<f64> = centroids
                .row(id)
                .iter()
                .enumerate()
                .map(|(j, &c)| {
                    let bias = camera.map_or(0.0, |cam| camera_biases[cam as usize][j]);
                    c + noise.sample(&mut rng) + bias
                })
                .collect();
            rows.push(row);
            identities.push(id as u64);
            cameras.push(camera);
        }
    }
    Ok(SynthFeatures {
        features: FeatureMatrix::from_rows(&rows)?,
        identities,
        cameras,
        centroids,
    })
}

/// K jittered copies per feature row: the keypoint-free stand-in for pose
/// transformation in pure feature pipelines. Output is grouped by source row;
/// each row's jitter stream is seeded with `seed ^ row`.
pub fn jitter_features(
    features: &FeatureMatrix,
    k: usize,
    std: f64,
    seed: u64,
) -> Result<(FeatureMatrix, Vec<usize>)> {
    if std < 0.0 {
        return Err(Error::Param("jitter std must be >= 0".into()));
    }
    let mut rows = Vec::with_capacity(k * features.rows());
    let mut sources = Vec::with_capacity(k * features.rows());
    for i in 0..features.rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let noise = Normal::new(0.0, std.max(f64::MIN_POSITIVE)).expect("valid std");
        for _ in 0..k {
            let row: Vec<f64> = features
                .row(i)
                .iter()
                .map(|v| if std > 0.0 { v + noise.sample(&mut rng) } else { *v })
                .collect();
            rows.push(row);
            sources.push(i);
        }
    }
    let dim = features.dim();
    let matrix = if rows.is_empty() {
        FeatureMatrix::zeros(0, dim)
    } else {
        FeatureMatrix::from_rows(&rows)?
    };
    Ok((matrix, sources))
}

#[derive(Debug, Clone)]
pub struct SynthFigures {
    pub rasters: Vec<RgbRaster>,
    pub poses: Vec<Pose>,
    pub part_sets: Vec<PartSet>,
    pub identities: Vec<u64>,
}

// Limb half-thickness in pixels, per canonical part index.
const PART_RADIUS: [f64; 10] = [4.0, 6.0, 3.0, 3.0, 3.0, 3.0, 3.5, 3.5, 3.0, 3.0];

fn part_color(identity: u64, part: usize) -> [u8; 3] {
    // Distinct hue per identity, shade varied per part.
    let hue = (identity.wrapping_mul(47) % 360) as f64;
    let shade = 150.0 + 10.0 * part as f64;
    let h = hue / 60.0;
    let x = shade * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 % 6 {
        0 => (shade, x, 0.0),
        1 => (x, shade, 0.0),
        2 => (0.0, shade, x),
        3 => (0.0, x, shade),
        4 => (x, 0.0, shade),
        _ => (shade, 0.0, x),
    };
    [
        (r + 40.0).min(255.0) as u8,
        (g + 40.0).min(255.0) as u8,
        (b + 40.0).min(255.0) as u8,
    ]
}

fn point_segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (vx, vy) = (b.0 - a.0, b.1 - a.1);
    let len2 = vx * vx + vy * vy;
    if len2 == 0.0 {
        return ((p.0 - a.0).powi(2) + (p.1 - a.1).powi(2)).sqrt();
    }
    let t = (((p.0 - a.0) * vx + (p.1 - a.1) * vy) / len2).clamp(0.0, 1.0);
    let (cx, cy) = (a.0 + t * vx, a.1 + t * vy);
    ((p.0 - cx).powi(2) + (p.1 - cy).powi(2)).sqrt()
}

fn stamp_capsule(
    raster: &mut RgbRaster,
    mask: &mut GrayRaster,
    a: (f64, f64),
    b: (f64, f64),
    radius: f64,
    color: [u8; 3],
) {
    let (w, h) = (raster.width() as i64, raster.height() as i64);
    let x0 = ((a.0.min(b.0) - radius).floor() as i64).max(0);
    let x1 = ((a.0.max(b.0) + radius).ceil() as i64).min(w - 1);
    let y0 = ((a.1.min(b.1) - radius).floor() as i64).max(0);
    let y1 = ((a.1.max(b.1) + radius).ceil() as i64).min(h - 1);
    for y in y0..=y1 {
        for x in x0..=x1 {
            if point_segment_distance((x as f64, y as f64), a, b) <= radius {
                raster.set(x as usize, y as usize, color);
                mask.set(x as usize, y as usize, 255);
            }
        }
    }
}

/// A randomized 15-joint skeleton with fixed limb lengths.
///
/// Only joint angles vary between figures, so every part transform between
/// two figures is a pure rotation plus translation (scale 1).
fn random_pose(h: usize, w: usize, rng: &mut ChaCha8Rng) -> Pose {
    let scale = h as f64 / 96.0;
    let torso = 22.0 * scale;
    let head = 10.0 * scale;
    let upper_arm = 12.0 * scale;
    let forearm = 11.0 * scale;
    let thigh = 14.0 * scale;
    let shin = 13.0 * scale;
    let shoulder_w = 7.0 * scale;
    let hip_w = 5.0 * scale;

    let cx = w as f64 / 2.0 + rng.random_range(-4.0..4.0) * scale;
    let cy = h as f64 * 0.52 + rng.random_range(-3.0..3.0) * scale;
    let down = std::f64::consts::FRAC_PI_2; // +y is down in raster space
    let torso_tilt = rng.random_range(-0.15..0.15);

    let mut kp = [[0.0f64; 3]; NUM_KEYPOINTS];
    let pelvis = (cx, cy);
    let neck = (
        cx - torso * (down + torso_tilt).cos() * 0.0 - torso * torso_tilt.sin(),
        cy - torso * torso_tilt.cos(),
    );
    let head_tilt = torso_tilt + rng.random_range(-0.2..0.2);
    let head_top = (neck.0 - head * head_tilt.sin(), neck.1 - head * head_tilt.cos());

    let l_shoulder = (neck.0 - shoulder_w, neck.1 + 1.0 * scale);
    let r_shoulder = (neck.0 + shoulder_w, neck.1 + 1.0 * scale);
    let l_hip = (pelvis.0 - hip_w, pelvis.1);
    let r_hip = (pelvis.0 + hip_w, pelvis.1);

    let mut limb = |origin: (f64, f64), len: f64, base: f64, swing: f64| -> (f64, f64) {
        let angle = base + rng.random_range(-swing..swing);
        (origin.0 + len * angle.cos(), origin.1 + len * angle.sin())
    };
    let l_elbow = limb(l_shoulder, upper_arm, down + 0.5, 0.45);
    let l_wrist = limb(l_elbow, forearm, down + 0.5, 0.5);
    let r_elbow = limb(r_shoulder, upper_arm, down - 0.5, 0.45);
    let r_wrist = limb(r_elbow, forearm, down - 0.5, 0.5);
    let l_knee = limb(l_hip, thigh, down + 0.18, 0.3);
    let l_ankle = limb(l_knee, shin, down + 0.1, 0.3);
    let r_knee = limb(r_hip, thigh, down - 0.18, 0.3);
    let r_ankle = limb(r_knee, shin, down - 0.1, 0.3);

    kp[joints::HEAD_TOP] = [head_top.0, head_top.1, 1.0];
    kp[joints::NECK] = [neck.0, neck.1, 1.0];
    kp[joints::LEFT_SHOULDER] = [l_shoulder.0, l_shoulder.1, 1.0];
    kp[joints::LEFT_ELBOW] = [l_elbow.0, l_elbow.1, 1.0];
    kp[joints::LEFT_WRIST] = [l_wrist.0, l_wrist.1, 1.0];
    kp[joints::RIGHT_SHOULDER] = [r_shoulder.0, r_shoulder.1, 1.0];
    kp[joints::RIGHT_ELBOW] = [r_elbow.0, r_elbow.1, 1.0];
    kp[joints::RIGHT_WRIST] = [r_wrist.0, r_wrist.1, 1.0];
    kp[joints::PELVIS] = [pelvis.0, pelvis.1, 1.0];
    kp[joints::LEFT_HIP] = [l_hip.0, l_hip.1, 1.0];
    kp[joints::LEFT_KNEE] = [l_knee.0, l_knee.1, 1.0];
    kp[joints::LEFT_ANKLE] = [l_ankle.0, l_ankle.1, 1.0];
    kp[joints::RIGHT_HIP] = [r_hip.0, r_hip.1, 1.0];
    kp[joints::RIGHT_KNEE] = [r_knee.0, r_knee.1, 1.0];
    kp[joints::RIGHT_ANKLE] = [r_ankle.0, r_ankle.1, 1.0];
    Pose::from_triples(&kp).expect("generated pose is valid")
}

/// Stick figures with per-identity limb colors, exact part masks and matching
/// pose records. One figure per configured sample.
pub fn generate_figures(spec: &SynthSpec, h: usize, w: usize) -> Result<SynthFigures> {
    spec.validate()?;
    if h < 64 || w < 64 {
        return Err(Error::Param(format!(
            "figure canvas {}x{} below the 64-pixel minimum",
            w, h
        )));
    }
    let mut rasters = Vec::new();
    let mut poses = Vec::new();
    let mut part_sets = Vec::new();
    let mut identities = Vec::new();
    let mut figure_index = 0u64;
    for (id, &count) in spec.samples_per_identity.iter().enumerate() {
        for _ in 0..count {
            // Per-figure stream keeps generation order-independent.
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ figure_index);
            let pose = random_pose(h, w, &mut rng);
            let mut raster = RgbRaster::new(w, h);
            let mut parts = Vec::with_capacity(PART_JOINTS.len());
            // Draw in compositing order so occlusion matches the warper.
            let mut masks: Vec<GrayRaster> = (0..PART_JOINTS.len())
                .map(|_| GrayRaster::new(w, h))
                .collect();
            for &pi in crate::pose_transform::COMPOSITE_ORDER.iter() {
                let (a, b) = PART_JOINTS[pi];
                stamp_capsule(
                    &mut raster,
                    &mut masks[pi],
                    pose.point(a),
                    pose.point(b),
                    PART_RADIUS[pi] * (h as f64 / 96.0),
                    part_color(id as u64, pi),
                );
            }
            for (pi, mask) in masks.into_iter().enumerate() {
                parts.push(Part {
                    joint_pair: PART_JOINTS[pi],
                    shape: PartShape::Mask(mask),
                });
            }
            rasters.push(raster);
            poses.push(pose);
            part_sets.push(PartSet::new(parts)?);
            identities.push(id as u64);
            figure_index += 1;
        }
    }
    Ok(SynthFigures {
        rasters,
        poses,
        part_sets,
        identities,
    })
}

/// Capsule outline polygon for a joint segment: the SIA annotation shape.
pub fn capsule_polygon(a: (f64, f64), b: (f64, f64), radius: f64) -> Vec<(f64, f64)> {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len = (dx * dx + dy * dy).sqrt().max(1e-12);
    let axis = dy.atan2(dx);
    let mut poly = Vec::with_capacity(14);
    // Half circle around b, then half circle around a.
    for k in 0..=6 {
        let t = axis - std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 6.0;
        poly.push((b.0 + radius * t.cos(), b.1 + radius * t.sin()));
    }
    for k in 0..=6 {
        let t = axis + std::f64::consts::FRAC_PI_2 + k as f64 * std::f64::consts::PI / 6.0;
        poly.push((a.0 + radius * t.cos(), a.1 + radius * t.sin()));
    }
    let _ = len;
    poly
}

/// Polygon part set matching a figure's pose: the single-image annotation.
pub fn sia_annotation_for(pose: &Pose, h: usize) -> Result<PartSet> {
    let scale = h as f64 / 96.0;
    let parts = PART_JOINTS
        .iter()
        .enumerate()
        .map(|(pi, &(a, b))| Part {
            joint_pair: (a, b),
            shape: PartShape::Polygon(capsule_polygon(
                pose.point(a),
                pose.point(b),
                PART_RADIUS[pi] * scale,
            )),
        })
        .collect();
    PartSet::new(parts)
}
