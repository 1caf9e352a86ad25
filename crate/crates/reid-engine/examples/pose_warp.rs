//! Part transforms on stick figures: estimate a similarity transform from a
//! joint pair, warp parts to another figure's pose, and write the results.

use reid_engine::pose_transform::{estimate_part_transform, generate_pt, joints};
use reid_engine::raster::write_ppm;
use reid_engine::synth::{generate_figures, SynthSpec};

fn main() -> reid_engine::Result<()> {
    let out = std::env::temp_dir().join("reid-example-pose-warp");
    std::fs::create_dir_all(&out).expect("create output dir");

    let spec = SynthSpec::uniform(3, 1, 4);
    let figures = generate_figures(&spec, 96, 64)?;

    // The torso transform between the first two figures.
    let (a, b) = (joints::NECK, joints::PELVIS);
    let t = estimate_part_transform(
        figures.poses[0].point(a),
        figures.poses[0].point(b),
        figures.poses[1].point(a),
        figures.poses[1].point(b),
    )?;
    println!(
        "torso transform figure 0 -> 1: rotation {:.4} rad, scale {:.4}, translation ({:.2}, {:.2})",
        t.rotation, t.scale, t.translation.0, t.translation.1
    );
    let mapped = t.apply(figures.poses[0].point(a));
    println!(
        "  maps the neck to ({:.3}, {:.3}); target is ({:.3}, {:.3})",
        mapped.0,
        mapped.1,
        figures.poses[1].point(a).0,
        figures.poses[1].point(a).1
    );

    // K pose-transformed variants per figure, deterministic under the seed.
    let (warped, sources) = generate_pt(
        &figures.rasters,
        &figures.poses,
        &figures.part_sets,
        2,
        42,
    )?;
    println!("generated {} warped rasters (sources {:?})", warped.len(), sources);
    for (i, raster) in figures.rasters.iter().enumerate() {
        write_ppm(&out.join(format!("original_{}.ppm", i)), raster)?;
    }
    for (i, raster) in warped.iter().enumerate() {
        write_ppm(&out.join(format!("warped_{}.ppm", i)), raster)?;
    }
    println!("wrote {}", out.display());
    Ok(())
}
