//! The three training objectives and their closed-form gradients, checked
//! against central finite differences on the spot.

use reid_engine::clustering::{compute_geometry, ClusterAssignment};
use reid_engine::losses::{loss_cls, loss_combined, loss_radial, loss_triplet_softmax};
use reid_engine::FeatureMatrix;

fn main() -> reid_engine::Result<()> {
    // Classification: uniform logits over 4 classes cost ln 4.
    let logits = FeatureMatrix::zeros(1, 4);
    let cls = loss_cls(&logits, &[2])?;
    println!("uniform 4-way cross entropy = {:.6} (ln 4 = {:.6})", cls.value, 4f64.ln());

    // Softmax-triplet: equal positive and negative distances give 1/2.
    let tri = loss_triplet_softmax(&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0], 1.0)?;
    println!("symmetric triplet = {:.6}", tri.value);
    let tri = loss_triplet_softmax(&[0.0, 0.0], &[1.0, 0.0], &[2.0, 0.0], 1.0)?;
    println!("d+=1, d-=2 triplet = {:.6} (e/(e+e^2) = {:.6})", tri.value, 1f64.exp() / (1f64.exp() + 2f64.exp()));

    // Radial distance: a point 1.2 from a radius-1 cluster with margin 0.5
    // owes exactly 0.3.
    let emb = FeatureMatrix::new(3, 2, vec![0.0, 1.0, 0.0, -1.0, 1.2, 0.0])?;
    let assign = ClusterAssignment::from_labels(vec![0, 0, 1], 2)?;
    let geometry = compute_geometry(&emb, &assign, 0)?;
    let rd = loss_radial(&emb, &assign, &geometry, 0.5)?;
    println!("radial hinge = {:.6}", rd.value);

    println!(
        "combined (lambda_tri = 0.5, lambda_rd = 2): {:.6}",
        loss_combined(cls.value, tri.value, rd.value, 0.5, 2.0)
    );

    // Spot-check the radial gradient against finite differences.
    let h = 1e-5;
    let mut max_err = 0.0f64;
    for k in 0..2 {
        let perturb = |delta: f64| {
            let mut data = emb.data().to_vec();
            data[2 * 2 + k] += delta; // sample 2, coordinate k
            loss_radial(&FeatureMatrix::new(3, 2, data).unwrap(), &assign, &geometry, 0.5)
                .unwrap()
                .value
        };
        let fd = (perturb(h) - perturb(-h)) / (2.0 * h);
        let analytic = rd.grad_embeddings.row(2)[k];
        max_err = max_err.max((fd - analytic).abs());
        println!(
            "  d rd / d emb[2][{}]: analytic {:+.6}, finite difference {:+.6}",
            k, analytic, fd
        );
    }
    println!("max gradient deviation: {:.2e}", max_err);
    Ok(())
}
