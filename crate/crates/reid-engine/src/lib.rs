//! Unsupervised re-identification training engine.
//!
//! The pipeline bootstraps per-image pseudo labels, augments the dataset with
//! pose-transformed variants, trains a small encoder in two stages
//! (classification + softmax-triplet initialization, then discriminative
//! clustering with a radial distance loss over per-epoch frozen cluster
//! geometry) and evaluates retrieval quality with CMC and mAP under the
//! cross-camera protocol.
//!
//! Start with the runnable examples, one per capability:
//!
//! ```text
//! cargo run --example synth_features     # seeded synthetic identity data
//! cargo run --example pose_warp          # part transforms on stick figures
//! cargo run --example cluster_geometry   # agglomeration + frozen geometry
//! cargo run --example loss_gradients     # the three losses and their grads
//! cargo run --example train_pipeline     # both training stages end to end
//! cargo run --example evaluate_ranking   # CMC/mAP and the 2D projection
//! cargo run --example ablate_margin      # margin sweep table
//! ```
//!
//! The same functionality is scriptable through the thin `reid` binary
//! (`synth`, `gen-pt`, `train-init`, `train-cluster`, `eval`, `cluster-stats`,
//! `ablate`).

pub mod clustering;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod losses;
pub mod matrix;
pub mod pipeline;
pub mod pose_transform;
pub mod raster;
pub mod synth;
pub mod trainer;

pub use error::{Error, Result};
pub use matrix::FeatureMatrix;
