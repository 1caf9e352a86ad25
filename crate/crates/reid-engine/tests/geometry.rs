//! Geometric round-trips between the synthetic figure generator and the part
//! transform machinery.

use reid_engine::pose_transform::{
    point_in_polygon, warp_sia_parts, PartSet, PartShape, Pose,
};
use reid_engine::raster::GrayRaster;
use reid_engine::synth::{generate_figures, sia_annotation_for, SynthSpec};

fn mask_pixels(mask: &GrayRaster) -> Vec<(f64, f64)> {
    mask.nonzero_pixels()
        .into_iter()
        .map(|(x, y)| (x as f64, y as f64))
        .collect()
}

fn polygon_pixels(poly: &[(f64, f64)], w: usize, h: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for y in 0..h {
        for x in 0..w {
            if point_in_polygon((x as f64, y as f64), poly) {
                out.push((x as f64, y as f64));
            }
        }
    }
    out
}

fn hausdorff(a: &[(f64, f64)], b: &[(f64, f64)]) -> f64 {
    let directed = |from: &[(f64, f64)], to: &[(f64, f64)]| -> f64 {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

#[test]
fn sia_warped_annotation_covers_drawn_limbs() {
    // One annotated figure, warped to the poses of the other figures, must
    // land on their true limb masks.
    let spec = SynthSpec::uniform(3, 1, 4);
    let figures = generate_figures(&spec, 96, 64).unwrap();
    let canonical_pose = figures.poses[0].clone();
    let canonical = sia_annotation_for(&canonical_pose, 96).unwrap();

    for i in 0..3 {
        let warped = warp_sia_parts(&canonical, &canonical_pose, &figures.poses[i]).unwrap();
        for (part_idx, (warped_part, true_part)) in warped
            .parts()
            .iter()
            .zip(figures.part_sets[i].parts())
            .enumerate()
        {
            let PartShape::Polygon(poly) = &warped_part.shape else {
                panic!("warped annotation must stay polygonal");
            };
            let PartShape::Mask(mask) = &true_part.shape else {
                panic!("figure parts are masks");
            };
            let poly_px = polygon_pixels(poly, 64, 96);
            let mask_px = mask_pixels(mask);
            assert!(!poly_px.is_empty() && !mask_px.is_empty());
            let d = hausdorff(&poly_px, &mask_px);
            assert!(
                d <= 2.0,
                "figure {} part {}: Hausdorff {:.2}px",
                i,
                part_idx,
                d
            );
        }
    }
}

/// Least-squares segment fit: principal axis of the pixel cloud, trimmed by
/// the estimated half-thickness at both ends.
fn estimate_segment(pixels: &[(f64, f64)]) -> ((f64, f64), (f64, f64)) {
    let n = pixels.len() as f64;
    let mx = pixels.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pixels.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in pixels {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    // Leading eigenvector of the 2x2 covariance.
    let trace_half = (sxx + syy) / 2.0;
    let det = sxx * syy - sxy * sxy;
    let lambda = trace_half + (trace_half * trace_half - det).max(0.0).sqrt();
    let (vx, vy) = if sxy.abs() > 1e-12 {
        let norm = ((lambda - syy).powi(2) + sxy * sxy).sqrt();
        ((lambda - syy) / norm, sxy / norm)
    } else if sxx >= syy {
        (1.0, 0.0)
    } else {
        (0.0, 1.0)
    };
    let (mut tmin, mut tmax, mut perp) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for p in pixels {
        let (dx, dy) = (p.0 - mx, p.1 - my);
        let t = dx * vx + dy * vy;
        let s = (-dx * vy + dy * vx).abs();
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        perp = perp.max(s);
    }
    (
        (mx + (tmin + perp) * vx, my + (tmin + perp) * vy),
        (mx + (tmax - perp) * vx, my + (tmax - perp) * vy),
    )
}

#[test]
fn transformed_masks_recover_target_joints() {
    let spec = SynthSpec::uniform(4, 1, 4);
    let figures = generate_figures(&spec, 96, 64).unwrap();

    // Warp each figure's part masks toward another figure's pose and fit the
    // limb segment back out of the warped mask.
    for (src, tgt) in [(0usize, 1usize), (1, 2), (2, 3)] {
        let warped: PartSet = warp_sia_parts(
            &figures.part_sets[src],
            &figures.poses[src],
            &figures.poses[tgt],
        )
        .unwrap();
        let tgt_pose: &Pose = &figures.poses[tgt];
        for (part_idx, part) in warped.parts().iter().enumerate() {
            let PartShape::Mask(mask) = &part.shape else {
                panic!("mask-based parts expected");
            };
            let pixels = mask_pixels(mask);
            // Parts warped partially out of frame lose pixels; skip only if
            // badly clipped.
            let (a, b) = part.joint_pair;
            let ja = tgt_pose.point(a);
            let jb = tgt_pose.point(b);
            if pixels.len() < 40 {
                continue;
            }
            let (e1, e2) = estimate_segment(&pixels);
            let d = |p: (f64, f64), q: (f64, f64)| ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
            let direct = d(e1, ja).max(d(e2, jb));
            let swapped = d(e1, jb).max(d(e2, ja));
            let err = direct.min(swapped);
            assert!(
                err <= 2.0,
                "{} -> {} part {}: joints off by {:.2}px",
                src,
                tgt,
                part_idx,
                err
            );
        }
    }
}
