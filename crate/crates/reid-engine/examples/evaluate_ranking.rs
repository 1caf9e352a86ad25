//! CMC/mAP evaluation under the cross-camera protocol, plus the 2D
//! principal-component projection export.

use reid_engine::eval::{distance_matrix, evaluate, export_projection, write_projection_csv,
    EvalSample};
use reid_engine::synth::{generate_features, SynthSpec};

fn main() -> reid_engine::Result<()> {
    let out = std::env::temp_dir().join("reid-example-eval");
    std::fs::create_dir_all(&out).expect("create output dir");

    let mut spec = SynthSpec::uniform(6, 6, 8);
    spec.num_cameras = 2;
    spec.camera_bias = 0.8;
    let data = generate_features(&spec)?;

    // First sample of each identity queries the rest.
    let mut seen = std::collections::BTreeSet::new();
    let mut query_rows = Vec::new();
    let mut gallery_rows = Vec::new();
    for (i, &id) in data.identities.iter().enumerate() {
        if seen.insert(id) {
            query_rows.push(i);
        } else {
            gallery_rows.push(i);
        }
    }
    let sample = |i: usize| EvalSample {
        identity: data.identities[i],
        camera: data.cameras[i],
    };
    let queries: Vec<EvalSample> = query_rows.iter().map(|&i| sample(i)).collect();
    let gallery: Vec<EvalSample> = gallery_rows.iter().map(|&i| sample(i)).collect();

    let dist = distance_matrix(
        &data.features.gather(&query_rows)?,
        &data.features.gather(&gallery_rows)?,
    )?;
    for camera_filter in [false, true] {
        let report = evaluate(&queries, &gallery, &dist, camera_filter)?;
        println!(
            "camera_filter={}: rank1 {:.3}, rank5 {:.3}, mAP {:.3} ({} queries evaluated)",
            camera_filter,
            report.cmc_at(1),
            report.cmc_at(5),
            report.map_score,
            report.num_queries_evaluated
        );
    }

    let projection = export_projection(&data.features, &data.identities)?;
    let csv = out.join("projection.csv");
    write_projection_csv(&csv, &projection)?;
    println!("projection written to {}", csv.display());
    Ok(())
}
