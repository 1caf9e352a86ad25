//! Trainable encoder, Adam optimizer, identity-balanced batch sampling and
//! the two-stage training schedule.
//!
//! Stage one trains on the full PT dataset with classification and
//! softmax-triplet losses. Stage two drops every transformed sample,
//! re-clusters the originals before each epoch, freezes that epoch's cluster
//! geometry, relabels samples by cluster index and adds the radial distance
//! loss. The classifier head is rebuilt whenever the label space changes,
//! i.e. at every re-clustering.
//!
//! Everything is seeded and single-threaded: identical config and seed give
//! bit-identical parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::clustering::{
    cluster_hierarchical, compute_geometry, ClusterAssignment, ClusterGeometry,
};
use crate::dataset::{Origin, PTDataset, Sample};
use crate::error::{Error, Result};
use crate::losses::{loss_cls, loss_radial, loss_triplet, TripletVariant};
use crate::matrix::FeatureMatrix;

const CHECKPOINT_MAGIC: &[u8; 4] = b"RDC1";

/// In-batch triplet mining strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mining {
    /// Farthest same-label positive, closest different-label negative.
    #[default]
    Hardest,
    /// Uniform random positive and negative.
    Uniform,
}

/// One affine map, `y = W x + b`, with `W` stored out-dim by in-dim.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: FeatureMatrix,
    pub bias: Vec<f64>,
}

impl Layer {
    pub fn out_dim(&self) -> usize {
        self.weight.rows()
    }

    pub fn in_dim(&self) -> usize {
        self.weight.dim()
    }

    /// Uniform Xavier initialization.
    pub fn init(out_dim: usize, in_dim: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let data: Vec<f64> = (0..out_dim * in_dim)
            .map(|_| rng.random_range(-bound..bound))
            .collect();
        Self {
            weight: FeatureMatrix::from_raw(out_dim, in_dim, data),
            bias: vec![0.0; out_dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut weight = FeatureMatrix::zeros(dim, dim);
        for i in 0..dim {
            weight.row_mut(i)[i] = 1.0;
        }
        Self {
            weight,
            bias: vec![0.0; dim],
        }
    }

    /// Row-wise affine forward.
    pub fn forward(&self, input: &FeatureMatrix) -> Result<FeatureMatrix> {
        if input.dim() != self.in_dim() {
            return Err(Error::Shape(format!(
                "layer expects dim {}, got {}",
                self.in_dim(),
                input.dim()
            )));
        }
        let (b, out) = (input.rows(), self.out_dim());
        let mut data = vec![0.0; b * out];
        for r in 0..b {
            let x = input.row(r);
            for o in 0..out {
                let w = self.weight.row(o);
                let mut acc = self.bias[o];
                for j in 0..x.len() {
                    acc += w[j] * x[j];
                }
                data[r * out + o] = acc;
            }
        }
        Ok(FeatureMatrix::from_raw(b, out, data))
    }
}

/// Gradient buffers shaped like a [`Layer`].
#[derive(Debug, Clone)]
pub struct LayerGrads {
    pub weight: FeatureMatrix,
    pub bias: Vec<f64>,
}

impl LayerGrads {
    fn zeros_like(layer: &Layer) -> Self {
        Self {
            weight: FeatureMatrix::zeros(layer.out_dim(), layer.in_dim()),
            bias: vec![0.0; layer.bias.len()],
        }
    }
}

/// The trainable encoder: a chain of affine layers with tanh between them
/// (none after the last) and optional L2 normalization of the output rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    layers: Vec<Layer>,
    normalize_output: bool,
}

impl EncoderParams {
    pub fn new(layers: Vec<Layer>, normalize_output: bool) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Param("encoder needs at least one layer".into()));
        }
        for w in layers.windows(2) {
            if w[0].out_dim() != w[1].in_dim() {
                return Err(Error::Shape(format!(
                    "layer output dim {} feeds layer input dim {}",
                    w[0].out_dim(),
                    w[1].in_dim()
                )));
            }
        }
        Ok(Self {
            layers,
            normalize_output,
        })
    }

    /// Default two-layer encoder (affine, tanh, affine).
    pub fn init(
        d_in: usize,
        hidden: usize,
        d_out: usize,
        normalize_output: bool,
        rng: &mut ChaCha8Rng,
    ) -> Result<Self> {
        Self::new(
            vec![
                Layer::init(hidden, d_in, rng),
                Layer::init(d_out, hidden, rng),
            ],
            normalize_output,
        )
    }

    /// Single identity layer without normalization; forwards input unchanged.
    pub fn identity(dim: usize) -> Self {
        Self {
            layers: vec![Layer::identity(dim)],
            normalize_output: false,
        }
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn normalize_output(&self) -> bool {
        self.normalize_output
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().expect("nonempty").out_dim()
    }

    pub fn all_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weight.is_finite() && l.bias.iter().all(|v| v.is_finite()))
    }

    /// Rescales the first layer so the encoder sees `(x - mean) / std`
    /// without a separate preprocessing step.
    pub fn fold_standardization(&mut self, mean: &[f64], std: &[f64]) -> Result<()> {
        let first = &mut self.layers[0];
        if mean.len() != first.in_dim() || std.len() != first.in_dim() {
            return Err(Error::Shape(format!(
                "standardization dim {} vs input dim {}",
                mean.len(),
                first.in_dim()
            )));
        }
        for o in 0..first.out_dim() {
            let row = first.weight.row_mut(o);
            let mut shift = 0.0;
            for j in 0..row.len() {
                row[j] /= std[j];
                shift += row[j] * mean[j];
            }
            first.bias[o] -= shift;
        }
        Ok(())
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(self.layers.len() * 2);
        for layer in self.layers.iter_mut() {
            let Layer { weight, bias } = layer;
            out.push(weight.data_mut());
            out.push(bias.as_mut_slice());
        }
        out
    }
}

/// Cached activations for one forward pass.
struct ForwardCache {
    /// Input to each affine layer; `inputs[0]` is the batch itself and later
    /// entries are tanh outputs (also the values the tanh derivative needs).
    inputs: Vec<FeatureMatrix>,
    norms: Vec<f64>,
    output: FeatureMatrix,
}

fn forward_cached(params: &EncoderParams, features: &FeatureMatrix) -> Result<ForwardCache> {
    let mut inputs = vec![features.clone()];
    let last = params.layers.len() - 1;
    for (i, layer) in params.layers.iter().enumerate() {
        let mut out = layer.forward(inputs.last().expect("nonempty"))?;
        if i < last {
            for v in out.data_mut() {
                *v = v.tanh();
            }
            inputs.push(out);
        } else {
            let (output, norms) = if params.normalize_output {
                let mut normalized = out;
                let mut norms = Vec::with_capacity(normalized.rows());
                for r in 0..normalized.rows() {
                    let row = normalized.row_mut(r);
                    let n = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    norms.push(n);
                    if n > 0.0 {
                        for v in row.iter_mut() {
                            *v /= n;
                        }
                    }
                }
                (normalized, norms)
            } else {
                (out, Vec::new())
            };
            return Ok(ForwardCache {
                inputs,
                norms,
                output,
            });
        }
    }
    unreachable!("loop returns on the last layer")
}

/// Deterministic row-wise encoder output.
pub fn forward(params: &EncoderParams, features: &FeatureMatrix) -> Result<FeatureMatrix> {
    Ok(forward_cached(params, features)?.output)
}

/// Backpropagates d(loss)/d(output) through the cached pass.
fn backward(
    params: &EncoderParams,
    cache: &ForwardCache,
    grad_output: &FeatureMatrix,
) -> Result<Vec<LayerGrads>> {
    let mut grads: Vec<LayerGrads> = params.layers.iter().map(LayerGrads::zeros_like).collect();
    let mut d = grad_output.clone();

    if params.normalize_output {
        // y = u / ||u||: dL/du = (g - y (y . g)) / ||u||. A zero row passed
        // through unnormalized, so its gradient passes through too.
        for r in 0..d.rows() {
            let n = cache.norms[r];
            if n > 0.0 {
                let y = cache.output.row(r).to_vec();
                let g = d.row_mut(r);
                let yg: f64 = y.iter().zip(g.iter()).map(|(a, b)| a * b).sum();
                for k in 0..g.len() {
                    g[k] = (g[k] - y[k] * yg) / n;
                }
            }
        }
    }

    for i in (0..params.layers.len()).rev() {
        let layer = &params.layers[i];
        let input = &cache.inputs[i];
        let b = d.rows();
        for r in 0..b {
            let drow = d.row(r);
            let xrow = input.row(r);
            for o in 0..layer.out_dim() {
                let w = grads[i].weight.row_mut(o);
                for j in 0..xrow.len() {
                    w[j] += drow[o] * xrow[j];
                }
                grads[i].bias[o] += drow[o];
            }
        }
        if i == 0 {
            break;
        }
        // d_input = d . W, then through the tanh at this input.
        let mut d_input = FeatureMatrix::zeros(b, layer.in_dim());
        for r in 0..b {
            let drow = d.row(r);
            let target = d_input.row_mut(r);
            for o in 0..layer.out_dim() {
                let w = layer.weight.row(o);
                for j in 0..w.len() {
                    target[j] += drow[o] * w[j];
                }
            }
            let activated = input.row(r);
            for j in 0..target.len() {
                target[j] *= 1.0 - activated[j] * activated[j];
            }
        }
        d = d_input;
    }
    Ok(grads)
}

/// Adam moment buffers, one pair per parameter tensor.
#[derive(Debug, Clone)]
pub struct AdamState {
    first_moment: Vec<Vec<f64>>,
    second_moment: Vec<Vec<f64>>,
    step_count: u64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    pub fn new(tensor_sizes: &[usize]) -> Self {
        Self {
            first_moment: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            second_moment: tensor_sizes.iter().map(|&s| vec![0.0; s]).collect(),
            step_count: 0,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    pub fn for_encoder(params: &EncoderParams) -> Self {
        let sizes: Vec<usize> = params
            .layers
            .iter()
            .flat_map(|l| [l.weight.data().len(), l.bias.len()])
            .collect();
        Self::new(&sizes)
    }

    pub fn for_layer(layer: &Layer) -> Self {
        Self::new(&[layer.weight.data().len(), layer.bias.len()])
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    #[cfg(test)]
    fn moments(&self) -> (&[Vec<f64>], &[Vec<f64>]) {
        (&self.first_moment, &self.second_moment)
    }
}

/// One Adam update with bias correction and decoupled weight decay
/// (`p <- p - lr * wd * p` applied before the moment update).
pub fn adam_step(
    tensors: &mut [&mut [f64]],
    grads: &[&[f64]],
    state: &mut AdamState,
    lr: f64,
    weight_decay: f64,
) -> Result<()> {
    if tensors.len() != grads.len() || tensors.len() != state.first_moment.len() {
        return Err(Error::Shape(format!(
            "{} tensors, {} grads, {} moment buffers",
            tensors.len(),
            grads.len(),
            state.first_moment.len()
        )));
    }
    for (t, g) in tensors.iter().zip(grads.iter()) {
        if t.len() != g.len() {
            return Err(Error::Shape("tensor/grad length mismatch".into()));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerics("non-finite gradient".into()));
        }
    }
    state.step_count += 1;
    let t = state.step_count;
    let bc1 = 1.0 - state.beta1.powi(t as i32);
    let bc2 = 1.0 - state.beta2.powi(t as i32);
    for ((params, grad), (m, v)) in tensors.iter_mut().zip(grads.iter()).zip(
        state
            .first_moment
            .iter_mut()
            .zip(state.second_moment.iter_mut()),
    ) {
        for k in 0..params.len() {
            params[k] -= lr * weight_decay * params[k];
            m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * grad[k];
            v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
            let m_hat = m[k] / bc1;
            let v_hat = v[k] / bc2;
            params[k] -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
        }
    }
    Ok(())
}

/// Draws P distinct labels and M samples per label.
///
/// Labels are chosen uniformly without replacement; within a label, samples
/// are drawn without replacement when it has at least M, with replacement
/// otherwise. The returned indices are grouped by label.
pub fn sample_pk_batch(
    labels: &[usize],
    p: usize,
    m: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    if p == 0 || m == 0 {
        return Err(Error::Param("P and M must be positive".into()));
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &l) in labels.iter().enumerate() {
        groups.entry(l).or_default().push(i);
    }
    if groups.len() < p {
        return Err(Error::Sampler(format!(
            "{} distinct labels, need P={}",
            groups.len(),
            p
        )));
    }
    let mut distinct: Vec<usize> = groups.keys().copied().collect();
    let (chosen, _) = distinct.partial_shuffle(rng, p);
    let mut batch = Vec::with_capacity(p * m);
    for &label in chosen.iter() {
        let members = &groups[&label];
        if members.len() >= m {
            let mut pool = members.clone();
            let (take, _) = pool.partial_shuffle(rng, m);
            batch.extend_from_slice(take);
        } else {
            for _ in 0..m {
                batch.push(members[rng.random_range(0..members.len())]);
            }
        }
    }
    Ok(batch)
}

/// Hyperparameters for both stages.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs_init: usize,
    pub epochs_cluster: usize,
    pub lr: f64,
    pub weight_decay: f64,
    pub batch_p: usize,
    pub batch_m: usize,
    pub tau: f64,
    pub gamma: f64,
    pub lambda_tri: f64,
    pub lambda_rd: f64,
    pub k_factor: usize,
    pub clusters_start: usize,
    pub clusters_end: usize,
    pub seed: u64,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub normalize: bool,
    pub standardize: bool,
    pub triplet_variant: TripletVariant,
    pub mining: Mining,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs_init: 40,
            epochs_cluster: 40,
            lr: 3.5e-4,
            weight_decay: 5e-4,
            batch_p: 16,
            batch_m: 4,
            tau: 1.0,
            gamma: 0.5,
            lambda_tri: 1.0,
            lambda_rd: 1.0,
            k_factor: 3,
            clusters_start: 20,
            clusters_end: 20,
            seed: 42,
            embed_dim: 64,
            hidden_dim: 64,
            normalize: true,
            standardize: true,
            triplet_variant: TripletVariant::Literal,
            mining: Mining::Hardest,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_p == 0 || self.batch_m == 0 {
            return Err(Error::Param("batch_p and batch_m must be positive".into()));
        }
        if self.lr <= 0.0 {
            return Err(Error::Param(format!("lr {} must be positive", self.lr)));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::Param("weight_decay must be >= 0".into()));
        }
        if self.tau <= 0.0 {
            return Err(Error::Param(format!("tau {} must be positive", self.tau)));
        }
        if self.gamma < 0.0 {
            return Err(Error::Param("gamma must be >= 0".into()));
        }
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return Err(Error::Param("encoder dims must be positive".into()));
        }
        if self.clusters_start == 0 || self.clusters_end == 0 {
            return Err(Error::Param("cluster counts must be positive".into()));
        }
        Ok(())
    }

    pub fn batch_size(&self) -> usize {
        self.batch_p * self.batch_m
    }
}

/// Per-epoch training log record.
#[derive(Debug, Clone, Serialize)]
pub struct LogEntry {
    pub epoch: usize,
    pub stage: String,
    pub loss_cls: f64,
    pub loss_tri: f64,
    pub loss_rd: f64,
    pub num_clusters: Option<usize>,
    pub mean_radius: Option<f64>,
}

/// Result of a training stage.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: EncoderParams,
    pub log: Vec<LogEntry>,
    /// Stage-two per-epoch cluster assignments (empty for stage one).
    pub assignments: Vec<ClusterAssignment>,
}

struct BatchStep {
    cls: f64,
    tri: f64,
    rd: f64,
    encoder_grads: Vec<LayerGrads>,
    head_grads: LayerGrads,
}

/// Forward, all loss terms and all gradients for one batch. `radial` carries
/// the frozen epoch geometry plus gamma; batch labels double as the radial
/// own-cluster indices in stage two.
fn batch_losses(
    params: &EncoderParams,
    head: &Layer,
    features: &FeatureMatrix,
    classes: &[usize],
    radial: Option<(&ClusterGeometry, f64)>,
    config: &TrainConfig,
    rng: &mut ChaCha8Rng,
) -> Result<BatchStep> {
    let cache = forward_cached(params, features)?;
    let emb = &cache.output;
    let b = emb.rows();

    // Classification over the head's logits.
    let logits = head.forward(emb)?;
    let cls = loss_cls(&logits, classes)?;
    let mut head_grads = LayerGrads::zeros_like(head);
    let mut d_emb = FeatureMatrix::zeros(b, emb.dim());
    for r in 0..b {
        let g = cls.grad_logits.row(r);
        let x = emb.row(r);
        let d = d_emb.row_mut(r);
        for o in 0..head.out_dim() {
            let w = head.weight.row(o);
            let hg = head_grads.weight.row_mut(o);
            for j in 0..x.len() {
                hg[j] += g[o] * x[j];
                d[j] += g[o] * w[j];
            }
            head_grads.bias[o] += g[o];
        }
    }

    // Triplets: one per anchor with an in-batch positive and negative.
    let mut dist = vec![0.0; b * b];
    for i in 0..b {
        for j in (i + 1)..b {
            let d = crate::matrix::euclidean(emb.row(i), emb.row(j));
            dist[i * b + j] = d;
            dist[j * b + i] = d;
        }
    }
    let mut tri_sum = 0.0;
    let mut tri_grad = FeatureMatrix::zeros(b, emb.dim());
    let mut tri_count = 0usize;
    for a in 0..b {
        let positives: Vec<usize> = (0..b)
            .filter(|&j| j != a && classes[j] == classes[a])
            .collect();
        let negatives: Vec<usize> = (0..b).filter(|&j| classes[j] != classes[a]).collect();
        if negatives.is_empty() {
            continue;
        }
        // An anchor without a distinct positive pairs with itself (d+ = 0).
        let pos = match config.mining {
            Mining::Hardest => positives
                .iter()
                .copied()
                .max_by(|&x, &y| {
                    dist[a * b + x]
                        .partial_cmp(&dist[a * b + y])
                        .expect("finite distances")
                        .then(y.cmp(&x)) // tie: keep the smallest index
                })
                .unwrap_or(a),
            Mining::Uniform => {
                if positives.is_empty() {
                    a
                } else {
                    positives[rng.random_range(0..positives.len())]
                }
            }
        };
        let neg = match config.mining {
            Mining::Hardest => negatives
                .iter()
                .copied()
                .min_by(|&x, &y| {
                    dist[a * b + x]
                        .partial_cmp(&dist[a * b + y])
                        .expect("finite distances")
                        .then(x.cmp(&y))
                })
                .expect("nonempty"),
            Mining::Uniform => negatives[rng.random_range(0..negatives.len())],
        };
        let t = loss_triplet(
            emb.row(a),
            emb.row(pos),
            emb.row(neg),
            config.tau,
            config.triplet_variant,
        )?;
        tri_sum += t.value;
        for k in 0..emb.dim() {
            tri_grad.row_mut(a)[k] += t.grad_anchor[k];
            tri_grad.row_mut(pos)[k] += t.grad_positive[k];
            tri_grad.row_mut(neg)[k] += t.grad_negative[k];
        }
        tri_count += 1;
    }
    let tri = if tri_count > 0 {
        tri_sum / tri_count as f64
    } else {
        0.0
    };
    if tri_count > 0 {
        let scale = config.lambda_tri / tri_count as f64;
        d_emb.add_scaled(&tri_grad, scale)?;
    }

    // Radial distance against the frozen snapshot (batch subset sum).
    let mut rd = 0.0;
    if let Some((geometry, gamma)) = radial {
        let batch_assign =
            ClusterAssignment::from_labels(classes.to_vec(), geometry.num_clusters())?;
        let r = loss_radial(emb, &batch_assign, geometry, gamma)?;
        rd = r.value;
        d_emb.add_scaled(&r.grad_embeddings, config.lambda_rd)?;
    }

    let encoder_grads = backward(params, &cache, &d_emb)?;
    Ok(BatchStep {
        cls: cls.value,
        tri,
        rd,
        encoder_grads,
        head_grads,
    })
}

fn apply_updates(
    params: &mut EncoderParams,
    head: &mut Layer,
    step: &BatchStep,
    enc_state: &mut AdamState,
    head_state: &mut AdamState,
    config: &TrainConfig,
) -> Result<()> {
    {
        let grads: Vec<&[f64]> = step
            .encoder_grads
            .iter()
            .flat_map(|g| [g.weight.data(), g.bias.as_slice()])
            .collect();
        let mut tensors = params.tensors_mut();
        adam_step(
            &mut tensors,
            &grads,
            enc_state,
            config.lr,
            config.weight_decay,
        )?;
    }
    {
        let grads = [
            step.head_grads.weight.data(),
            step.head_grads.bias.as_slice(),
        ];
        let mut tensors = [head.weight.data_mut(), head.bias.as_mut_slice()];
        adam_step(
            &mut tensors,
            &grads,
            head_state,
            config.lr,
            config.weight_decay,
        )?;
    }
    if !params.all_finite() {
        return Err(Error::Numerics(
            "encoder parameters became non-finite".into(),
        ));
    }
    Ok(())
}

fn features_of(samples: &[Sample]) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| s.features.clone()).collect();
    FeatureMatrix::from_rows(&rows)
}

fn batches_per_epoch(n: usize, batch: usize) -> usize {
    n.div_ceil(batch).max(1)
}

/// Stage one: supervised initialization over the full PT dataset with the
/// classification and triplet losses (no radial term).
pub fn train_init(pt: &PTDataset, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    let features = features_of(pt.samples())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = EncoderParams::init(
        features.dim(),
        config.hidden_dim,
        config.embed_dim,
        config.normalize,
        &mut rng,
    )?;
    if config.standardize {
        let (mean, std) = column_stats(&features);
        params.fold_standardization(&mean, &std)?;
    }

    // Pseudo labels are 1-based; the head classifies their 0-based indices.
    let classes: Vec<usize> = pt.samples().iter().map(|s| s.pseudo_label - 1).collect();
    let mut head = Layer::init(pt.n_original(), config.embed_dim, &mut rng);
    let mut enc_state = AdamState::for_encoder(&params);
    let mut head_state = AdamState::for_layer(&head);

    let mut log = Vec::with_capacity(config.epochs_init);
    let num_batches = batches_per_epoch(pt.len(), config.batch_size());
    for epoch in 0..config.epochs_init {
        let mut sums = (0.0, 0.0);
        for batch_idx in 0..num_batches {
            let idx = sample_pk_batch(&classes, config.batch_p, config.batch_m, &mut rng)?;
            let batch_features = features.gather(&idx)?;
            let batch_classes: Vec<usize> = idx.iter().map(|&i| classes[i]).collect();
            let step = batch_losses(
                &params,
                &head,
                &batch_features,
                &batch_classes,
                None,
                config,
                &mut rng,
            )
            .map_err(|e| stamp_batch(e, epoch, batch_idx))?;
            apply_updates(
                &mut params,
                &mut head,
                &step,
                &mut enc_state,
                &mut head_state,
                config,
            )
            .map_err(|e| stamp_batch(e, epoch, batch_idx))?;
            sums.0 += step.cls;
            sums.1 += step.tri;
        }
        log.push(LogEntry {
            epoch,
            stage: "init".into(),
            loss_cls: sums.0 / num_batches as f64,
            loss_tri: sums.1 / num_batches as f64,
            loss_rd: 0.0,
            num_clusters: None,
            mean_radius: None,
        });
    }
    Ok(TrainOutcome {
        params,
        log,
        assignments: Vec::new(),
    })
}

/// Linear cluster-count schedule across stage-two epochs, clamped to [1, n].
pub fn cluster_schedule(config: &TrainConfig, epoch: usize, n: usize) -> usize {
    let (start, end) = (config.clusters_start as f64, config.clusters_end as f64);
    let t = if config.epochs_cluster <= 1 {
        0.0
    } else {
        epoch as f64 / (config.epochs_cluster - 1) as f64
    };
    let c = (start + (end - start) * t).round() as usize;
    c.clamp(1, n)
}

/// Stage two: discriminative clustering over originals only.
///
/// Before each epoch the originals are embedded and re-clustered, the epoch's
/// geometry is frozen, samples are relabeled by cluster index, and a fresh
/// C-way classifier head is built. Batches then minimize
/// `cls + lambda_tri * tri + lambda_rd * rd` against the frozen snapshot.
pub fn train_discriminative(
    originals: &[Sample],
    params: EncoderParams,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if originals.is_empty() {
        return Err(Error::EmptyDataset("no original samples".into()));
    }
    if let Some(bad) = originals.iter().find(|s| s.origin != Origin::Original) {
        return Err(Error::StageViolation(format!(
            "transformed sample {} present in stage-two training data",
            bad.sample_id
        )));
    }
    let features = features_of(originals)?;
    let n = features.rows();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut params = params;
    let mut enc_state = AdamState::for_encoder(&params);

    let mut log = Vec::with_capacity(config.epochs_cluster);
    let mut assignments = Vec::with_capacity(config.epochs_cluster);
    let num_batches = batches_per_epoch(n, config.batch_size());
    for epoch in 0..config.epochs_cluster {
        let c = cluster_schedule(config, epoch, n);
        let embeddings = forward(&params, &features)?;
        let assignment = cluster_hierarchical(&embeddings, c)?;
        // Frozen for the whole epoch: every batch reads this one snapshot.
        let geometry = compute_geometry(&embeddings, &assignment, epoch as u64)?;
        let labels = assignment.labels().to_vec();

        let mut head = Layer::init(c, config.embed_dim, &mut rng);
        let mut head_state = AdamState::for_layer(&head);

        let mut sums = (0.0, 0.0, 0.0);
        for batch_idx in 0..num_batches {
            let idx = sample_pk_batch(&labels, config.batch_p, config.batch_m, &mut rng)?;
            let batch_features = features.gather(&idx)?;
            let batch_classes: Vec<usize> = idx.iter().map(|&i| labels[i]).collect();
            let step = batch_losses(
                &params,
                &head,
                &batch_features,
                &batch_classes,
                Some((&geometry, config.gamma)),
                config,
                &mut rng,
            )
            .map_err(|e| stamp_batch(e, epoch, batch_idx))?;
            apply_updates(
                &mut params,
                &mut head,
                &step,
                &mut enc_state,
                &mut head_state,
                config,
            )
            .map_err(|e| stamp_batch(e, epoch, batch_idx))?;
            sums.0 += step.cls;
            sums.1 += step.tri;
            sums.2 += step.rd;
        }
        log.push(LogEntry {
            epoch,
            stage: "cluster".into(),
            loss_cls: sums.0 / num_batches as f64,
            loss_tri: sums.1 / num_batches as f64,
            loss_rd: sums.2 / num_batches as f64,
            num_clusters: Some(c),
            mean_radius: Some(geometry.mean_radius()),
        });
        assignments.push(assignment);
    }
    Ok(TrainOutcome {
        params,
        log,
        assignments,
    })
}

fn stamp_batch(e: Error, epoch: usize, batch: usize) -> Error {
    match e {
        Error::Numerics(msg) => Error::Numerics(format!(
            "epoch {} batch {}: {} (epoch aborted)",
            epoch, batch, msg
        )),
        other => other,
    }
}

fn column_stats(features: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, d) = (features.rows(), features.dim());
    let mut mean = vec![0.0; d];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(features.row(r)) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n as f64;
    }
    let mut var = vec![0.0; d];
    for r in 0..n {
        for j in 0..d {
            let diff = features.row(r)[j] - mean[j];
            var[j] += diff * diff;
        }
    }
    let std: Vec<f64> = var
        .iter()
        .map(|&v| {
            let s = (v / n as f64).sqrt();
            if s < 1e-9 {
                1.0
            } else {
                s
            }
        })
        .collect();
    (mean, std)
}

// ---------------------------------------------------------------------------
// Checkpoint container: "RDC1", u32 config-echo length + UTF-8 bytes, u32
// tensor count, then per tensor a u32 rank, u32 dims and f32 data (LE).
// Encoder tensors appear in declaration order: weight then bias per layer.
// ---------------------------------------------------------------------------

pub fn save_checkpoint(path: &Path, params: &EncoderParams, config_echo: &str) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    w.write_all(CHECKPOINT_MAGIC).map_err(io_err)?;
    let echo = config_echo.as_bytes();
    w.write_all(&(echo.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    w.write_all(echo).map_err(io_err)?;
    let tensors: Vec<(Vec<u32>, &[f64])> = params
        .layers
        .iter()
        .flat_map(|l| {
            [
                (
                    vec![l.out_dim() as u32, l.in_dim() as u32],
                    l.weight.data(),
                ),
                (vec![l.bias.len() as u32], l.bias.as_slice()),
            ]
        })
        .collect();
    w.write_all(&(tensors.len() as u32).to_le_bytes())
        .map_err(io_err)?;
    for (shape, data) in tensors {
        w.write_all(&(shape.len() as u32).to_le_bytes())
            .map_err(io_err)?;
        for d in &shape {
            w.write_all(&d.to_le_bytes()).map_err(io_err)?;
        }
        for v in data {
            w.write_all(&(*v as f32).to_le_bytes()).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub struct Checkpoint {
    pub config_echo: String,
    pub tensors: Vec<(Vec<usize>, Vec<f64>)>,
}

pub fn load_checkpoint(path: &Path) -> Result<Checkpoint> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let io_err = |e| Error::io(path, e);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::format(path, "bad magic, expected RDC1"));
    }
    let mut buf4 = [0u8; 4];
    r.read_exact(&mut buf4).map_err(io_err)?;
    let echo_len = u32::from_le_bytes(buf4) as usize;
    let mut echo = vec![0u8; echo_len];
    r.read_exact(&mut echo).map_err(io_err)?;
    let config_echo =
        String::from_utf8(echo).map_err(|_| Error::format(path, "config echo is not UTF-8"))?;
    r.read_exact(&mut buf4).map_err(io_err)?;
    let count = u32::from_le_bytes(buf4) as usize;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        r.read_exact(&mut buf4).map_err(io_err)?;
        let rank = u32::from_le_bytes(buf4) as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            r.read_exact(&mut buf4).map_err(io_err)?;
            shape.push(u32::from_le_bytes(buf4) as usize);
        }
        let len: usize = shape.iter().product();
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            r.read_exact(&mut buf4).map_err(io_err)?;
            data.push(f32::from_le_bytes(buf4) as f64);
        }
        tensors.push((shape, data));
    }
    Ok(Checkpoint {
        config_echo,
        tensors,
    })
}

/// Rebuilds an encoder from checkpoint tensors (weight/bias pairs).
pub fn encoder_from_tensors(
    tensors: &[(Vec<usize>, Vec<f64>)],
    normalize_output: bool,
) -> Result<EncoderParams> {
    if tensors.is_empty() || tensors.len() % 2 != 0 {
        return Err(Error::Shape(format!(
            "{} tensors cannot form weight/bias layer pairs",
            tensors.len()
        )));
    }
    let mut layers = Vec::with_capacity(tensors.len() / 2);
    for pair in tensors.chunks(2) {
        let (wshape, wdata) = &pair[0];
        let (bshape, bdata) = &pair[1];
        if wshape.len() != 2 || bshape.len() != 1 || bshape[0] != wshape[0] {
            return Err(Error::Shape(format!(
                "bad layer tensor shapes {:?} / {:?}",
                wshape, bshape
            )));
        }
        layers.push(Layer {
            weight: FeatureMatrix::new(wshape[0], wshape[1], wdata.clone())?,
            bias: bdata.clone(),
        });
    }
    EncoderParams::new(layers, normalize_output)
}
