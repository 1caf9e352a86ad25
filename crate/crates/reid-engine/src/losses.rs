//! Training objectives with closed-form gradients.
//!
//! Three terms: batch cross-entropy over classifier logits, a per-triplet
//! softmax weighting of anchor-positive vs anchor-negative distances under a
//! temperature, and the radial distance loss — a hinge penalty charged to any
//! sample that intrudes into a foreign cluster's radius-plus-margin shell.
//! The combined objective is `cls + lambda_tri * tri + lambda_rd * rd`.
//!
//! All gradients are exact and validated against central finite differences
//! in the acceptance suite. Subgradient conventions: hinge kinks and
//! zero-length distance gradients contribute zero.

use crate::clustering::{ClusterAssignment, ClusterGeometry};
use crate::error::{Error, Result};
use crate::matrix::{euclidean, FeatureMatrix};

/// Which functional form the triplet term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TripletVariant {
    /// The softmax weight on the positive distance,
    /// `e^{d+} / (e^{d+} + e^{d-})`, in (0, 1).
    #[default]
    Literal,
    /// `-log` of the softmax over negated distances, `softplus(d+ - d-)`.
    LogSoftmax,
}

#[derive(Debug, Clone)]
pub struct ClassificationLoss {
    pub value: f64,
    /// d value / d logits, shaped like the logits: `(softmax - onehot) / B`.
    pub grad_logits: FeatureMatrix,
}

/// Mean negative log-softmax probability of the true label.
pub fn loss_cls(logits: &FeatureMatrix, labels: &[usize]) -> Result<ClassificationLoss> {
    let b = logits.rows();
    let m = logits.dim();
    if labels.len() != b {
        return Err(Error::Shape(format!(
            "{} labels for {} logit rows",
            labels.len(),
            b
        )));
    }
    if b == 0 {
        return Err(Error::EmptyDataset("empty logit batch".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= m) {
        return Err(Error::Label(format!("label {} outside 0..{}", bad, m)));
    }
    let mut value = 0.0;
    let mut grad = FeatureMatrix::zeros(b, m);
    for i in 0..b {
        let row = logits.row(i);
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut denom = 0.0;
        for &v in row {
            denom += (v - max).exp();
        }
        let log_denom = denom.ln() + max;
        value += log_denom - row[labels[i]];
        let g = grad.row_mut(i);
        for (k, &v) in row.iter().enumerate() {
            g[k] = (v - max).exp() / denom / b as f64;
        }
        g[labels[i]] -= 1.0 / b as f64;
    }
    Ok(ClassificationLoss {
        value: value / b as f64,
        grad_logits: grad,
    })
}

#[derive(Debug, Clone)]
pub struct TripletLoss {
    pub value: f64,
    pub grad_anchor: Vec<f64>,
    pub grad_positive: Vec<f64>,
    pub grad_negative: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Unit vector from `b` toward `a`, or zeros when the points coincide (the
/// distance subgradient at zero).
fn unit_diff(a: &[f64], b: &[f64]) -> (Vec<f64>, f64) {
    let d = euclidean(a, b);
    if d == 0.0 {
        return (vec![0.0; a.len()], 0.0);
    }
    (
        a.iter().zip(b).map(|(x, y)| (x - y) / d).collect(),
        d,
    )
}

fn triplet_core(
    anchor: &[f64],
    positive: &[f64],
    negative: &[f64],
    tau: f64,
    variant: TripletVariant,
) -> Result<TripletLoss> {
    if tau <= 0.0 {
        return Err(Error::Param(format!("tau {} must be positive", tau)));
    }
    if anchor.len() != positive.len() || anchor.len() != negative.len() {
        return Err(Error::Shape(format!(
            "triplet dims {}, {}, {}",
            anchor.len(),
            positive.len(),
            negative.len()
        )));
    }
    let (u_ap, d_ap) = unit_diff(anchor, positive);
    let (u_an, d_an) = unit_diff(anchor, negative);
    let dp = d_ap / tau;
    let dn = d_an / tau;
    let s = sigmoid(dp - dn);
    let (value, coeff) = match variant {
        TripletVariant::Literal => (s, s * (1.0 - s)),
        TripletVariant::LogSoftmax => (softplus(dp - dn), s),
    };
    // d value / d dp = coeff, d value / d dn = -coeff.
    let dim = anchor.len();
    let mut grad_anchor = vec![0.0; dim];
    let mut grad_positive = vec![0.0; dim];
    let mut grad_negative = vec![0.0; dim];
    for k in 0..dim {
        grad_anchor[k] = coeff * (u_ap[k] - u_an[k]) / tau;
        grad_positive[k] = -coeff * u_ap[k] / tau;
        grad_negative[k] = coeff * u_an[k] / tau;
    }
    Ok(TripletLoss {
        value,
        grad_anchor,
        grad_positive,
        grad_negative,
    })
}

/// Softmax-triplet loss: the weight placed on the positive distance.
/// Minimizing it drives the anchor-positive distance below the
/// anchor-negative distance.
pub fn loss_triplet_softmax(
    anchor: &[f64],
    positive: &[f64],
    negative: &[f64],
    tau: f64,
) -> Result<TripletLoss> {
    triplet_core(anchor, positive, negative, tau, TripletVariant::Literal)
}

/// The `-log` softmax variant: `softplus((d+ - d-) / ...)`; same minimizer,
/// unbounded above.
pub fn loss_triplet_logsoftmax(
    anchor: &[f64],
    positive: &[f64],
    negative: &[f64],
    tau: f64,
) -> Result<TripletLoss> {
    triplet_core(anchor, positive, negative, tau, TripletVariant::LogSoftmax)
}

pub fn loss_triplet(
    anchor: &[f64],
    positive: &[f64],
    negative: &[f64],
    tau: f64,
    variant: TripletVariant,
) -> Result<TripletLoss> {
    triplet_core(anchor, positive, negative, tau, variant)
}

#[derive(Debug, Clone)]
pub struct RadialLoss {
    pub value: f64,
    /// d value / d embeddings, one row per sample; `(c_l - e_i) / d_i^l`
    /// accumulated over active hinge terms.
    pub grad_embeddings: FeatureMatrix,
}

/// Radial distance loss over a frozen geometry snapshot:
/// `sum_i sum_{l != k(i)} max(0, r_l + gamma - ||c_l - e_i||)`.
///
/// Centroids and radii are constants of the snapshot and are never
/// differentiated through. `assignment` may cover a batch subset, so empty
/// clusters are fine here; only its label range must match the geometry.
pub fn loss_radial(
    embeddings: &FeatureMatrix,
    assignment: &ClusterAssignment,
    geometry: &ClusterGeometry,
    gamma: f64,
) -> Result<RadialLoss> {
    if gamma < 0.0 {
        return Err(Error::Param(format!("gamma {} must be >= 0", gamma)));
    }
    if assignment.len() != embeddings.rows() {
        return Err(Error::Shape(format!(
            "assignment covers {} samples, embeddings have {} rows",
            assignment.len(),
            embeddings.rows()
        )));
    }
    if assignment.num_clusters() != geometry.num_clusters() {
        return Err(Error::Shape(format!(
            "assignment has {} clusters, geometry {}",
            assignment.num_clusters(),
            geometry.num_clusters()
        )));
    }
    if embeddings.dim() != geometry.dim() {
        return Err(Error::Shape(format!(
            "embedding dim {} vs centroid dim {}",
            embeddings.dim(),
            geometry.dim()
        )));
    }
    let c = geometry.num_clusters();
    let mut value = 0.0;
    let mut grad = FeatureMatrix::zeros(embeddings.rows(), embeddings.dim());
    for (i, &own) in assignment.labels().iter().enumerate() {
        let e = embeddings.row(i);
        for l in 0..c {
            if l == own {
                continue;
            }
            let centroid = geometry.centroid(l);
            let d = euclidean(centroid, e);
            let violation = geometry.radii()[l] + gamma - d;
            if violation > 0.0 {
                value += violation;
                if d > 0.0 {
                    let g = grad.row_mut(i);
                    for k in 0..e.len() {
                        g[k] += (centroid[k] - e[k]) / d;
                    }
                }
            }
        }
    }
    Ok(RadialLoss {
        value,
        grad_embeddings: grad,
    })
}

/// Eq-style linear combination of the three loss values.
pub fn loss_combined(cls: f64, tri: f64, rd: f64, lambda_tri: f64, lambda_rd: f64) -> f64 {
    cls + lambda_tri * tri + lambda_rd * rd
}
