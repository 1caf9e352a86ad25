//! Run orchestration behind the `reid` binary: one function per subcommand,
//! all driven by a [`RunConfig`].
//!
//! Every run owns its output directory (`data.dir`) exclusively and writes a
//! `manifest` file with the resolved configuration before doing anything
//! else. Exit codes: 0 success, 1 config error, 2 data error, 3 numeric
//! failure.

use std::fs;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::{PtMode, RunConfig};
use crate::dataset::{
    self, assign_pseudo_labels_with_cameras, drop_transformed, merge_pt, Origin, PTDataset, Sample,
};
use crate::error::{Error, Result};
use crate::eval::{distance_matrix, evaluate, export_projection, write_projection_csv, EvalSample,
    ReportSummary};
use crate::matrix::FeatureMatrix;
use crate::pose_transform::{
    self, generate_pt, read_keypoints, read_sia, warp_sia_parts, PartSet, Pose, PoseEntry,
    NUM_PARTS,
};
use crate::raster::{read_pgm, read_ppm, write_ppm, RgbRaster};
use crate::synth::{generate_features, generate_figures, jitter_features, sia_annotation_for,
    SynthSpec};
use crate::trainer::{
    encoder_from_tensors, forward, load_checkpoint, save_checkpoint, train_discriminative,
    train_init, EncoderParams, LogEntry,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Synth,
    GenPt,
    TrainInit,
    TrainCluster,
    Eval,
    ClusterStats,
    Ablate,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Synth => "synth",
            Subcommand::GenPt => "gen-pt",
            Subcommand::TrainInit => "train-init",
            Subcommand::TrainCluster => "train-cluster",
            Subcommand::Eval => "eval",
            Subcommand::ClusterStats => "cluster-stats",
            Subcommand::Ablate => "ablate",
        }
    }
}

fn chatty() -> bool {
    std::env::var("REID_LOG").map(|v| v != "quiet").unwrap_or(true)
}

fn info(msg: &str) {
    if chatty() {
        eprintln!("[reid] {}", msg);
    }
}

/// CLI entry: prints the error and maps it to an exit code.
pub fn run(sub: Subcommand, config_path: Option<&Path>, overrides: &[String]) -> i32 {
    match run_checked(sub, config_path, overrides) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error ({}): {}", sub.name(), e);
            e.exit_code()
        }
    }
}

pub fn run_checked(
    sub: Subcommand,
    config_path: Option<&Path>,
    overrides: &[String],
) -> Result<()> {
    let cfg = RunConfig::load(config_path, overrides)?;
    let dir = run_dir(&cfg)?;
    fs::write(dir.join("manifest"), cfg.resolved_text())
        .map_err(|e| Error::io(&dir.join("manifest"), e))?;
    match sub {
        Subcommand::Synth => cmd_synth(&cfg),
        Subcommand::GenPt => cmd_gen_pt(&cfg).map(|_| ()),
        Subcommand::TrainInit => cmd_train_init(&cfg),
        Subcommand::TrainCluster => cmd_train_cluster(&cfg),
        Subcommand::Eval => cmd_eval(&cfg).map(|_| ()),
        Subcommand::ClusterStats => cmd_cluster_stats(&cfg),
        Subcommand::Ablate => cmd_ablate(&cfg),
    }
}

fn run_dir(cfg: &RunConfig) -> Result<PathBuf> {
    if cfg.data.dir.is_empty() {
        return Err(Error::Config("key 'data.dir' is empty".into()));
    }
    let dir = PathBuf::from(&cfg.data.dir);
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn require_input(value: &str, key: &str) -> Result<PathBuf> {
    if value.is_empty() {
        return Err(Error::Config(format!("key '{}' is required but empty", key)));
    }
    let path = PathBuf::from(value);
    if !path.exists() {
        return Err(Error::Format {
            path: path.display().to_string(),
            msg: format!("input named by '{}' does not exist", key),
        });
    }
    Ok(path)
}

// ---------------------------------------------------------------------------
// Ground-truth identities (evaluation only): JSON lines.
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct TruthRecord {
    id: usize,
    identity: u64,
    camera: Option<u32>,
}

fn write_truth(path: &Path, ids: &[usize], identities: &[u64], cameras: &[Option<u32>]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for i in 0..ids.len() {
        let rec = TruthRecord {
            id: ids[i],
            identity: identities[i],
            camera: cameras[i],
        };
        let line = serde_json::to_string(&rec)
            .map_err(|e| Error::format(path, format!("serialize: {}", e)))?;
        writeln!(w, "{}", line).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn read_truth(path: &Path) -> Result<Vec<TruthRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (ln, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| Error::format(path, format!("line {}: {}", ln + 1, e)))?,
        );
    }
    Ok(out)
}

/// Binary container unless the path ends in `.csv`.
fn load_features(path: &Path) -> Result<FeatureMatrix> {
    if path.extension().is_some_and(|e| e == "csv") {
        Ok(dataset::read_features_csv(path)?.features)
    } else {
        dataset::read_features_binary(path)
    }
}

fn load_encoder(cfg: &RunConfig) -> Result<EncoderParams> {
    let path = require_input(&cfg.data.checkpoint, "data.checkpoint")?;
    let ckpt = load_checkpoint(&path)?;
    encoder_from_tensors(&ckpt.tensors, cfg.train.normalize)
}

fn write_log(path: &Path, entries: &[LogEntry]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for e in entries {
        let line = serde_json::to_string(e)
            .map_err(|err| Error::format(path, format!("serialize: {}", err)))?;
        writeln!(w, "{}", line).map_err(|err| Error::io(path, err))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let dir = run_dir(cfg)?;
    if cfg.synth.samples_min > cfg.synth.samples_max {
        return Err(Error::Config(
            "synth.samples_min exceeds synth.samples_max".into(),
        ));
    }
    let mut spec = SynthSpec::uneven(
        cfg.synth.identities,
        cfg.synth.samples_min,
        cfg.synth.samples_max,
        cfg.synth.feature_dim,
        cfg.synth.seed,
    );
    spec.identity_spread = cfg.synth.spread;
    spec.identity_separation = cfg.synth.separation;
    spec.num_cameras = cfg.synth.cameras;
    spec.camera_bias = cfg.synth.camera_bias;

    let out = generate_features(&spec)?;
    dataset::write_features_binary(&dir.join("features.rdf"), &out.features)?;
    let samples = assign_pseudo_labels_with_cameras(&out.features, Some(&out.cameras))?;
    dataset::write_manifest(&dir.join("samples.jsonl"), &samples)?;
    let ids: Vec<usize> = (0..out.features.rows()).collect();
    write_truth(&dir.join("truth.jsonl"), &ids, &out.identities, &out.cameras)?;

    if cfg.synth.figures {
        let figures = generate_figures(&spec, cfg.synth.figure_height, cfg.synth.figure_width)?;
        let images_dir = dir.join("images");
        let masks_dir = dir.join("masks");
        fs::create_dir_all(&images_dir).map_err(|e| Error::io(&images_dir, e))?;
        fs::create_dir_all(&masks_dir).map_err(|e| Error::io(&masks_dir, e))?;
        let mut entries = Vec::new();
        for (i, raster) in figures.rasters.iter().enumerate() {
            write_ppm(&images_dir.join(format!("{}.ppm", i)), raster)?;
            for (k, part) in figures.part_sets[i].parts().iter().enumerate() {
                if let pose_transform::PartShape::Mask(mask) = &part.shape {
                    crate::raster::write_pgm(
                        &masks_dir.join(format!("{}_part{}.pgm", i, k)),
                        mask,
                    )?;
                }
            }
            entries.push(PoseEntry {
                id: i,
                camera: out.cameras.get(i).copied().flatten(),
                pose: figures.poses[i].clone(),
            });
        }
        pose_transform::write_keypoints(&dir.join("poses.jsonl"), &entries)?;
        let annotation = pose_transform::SiaAnnotation {
            pose: figures.poses[0].clone(),
            parts: sia_annotation_for(&figures.poses[0], cfg.synth.figure_height)?,
        };
        pose_transform::write_sia(&dir.join("sia.json"), &annotation)?;
        info(&format!("synth: wrote {} figures", figures.rasters.len()));
    }
    info(&format!(
        "synth: {} samples, {} identities -> {}",
        out.features.rows(),
        cfg.synth.identities,
        dir.display()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// gen-pt
// ---------------------------------------------------------------------------

struct GeneratedPt {
    pt: PTDataset,
    /// Transformed rasters (raster modes only), aligned with the transformed
    /// tail of the dataset.
    rasters: Vec<RgbRaster>,
}

fn next_id(originals: &[Sample]) -> usize {
    originals.iter().map(|s| s.sample_id + 1).max().unwrap_or(0)
}

fn transformed_sample(
    id: usize,
    features: Vec<f64>,
    source: &Sample,
) -> Sample {
    Sample {
        sample_id: id,
        features,
        pseudo_label: 0, // assigned by merge_pt
        camera_id: source.camera_id,
        origin: Origin::Transformed,
        source: Some(source.sample_id),
    }
}

fn gen_pt_feature_mode(cfg: &RunConfig) -> Result<PTDataset> {
    let features_path = require_input(&cfg.data.features, "data.features")?;
    let samples_path = require_input(&cfg.data.samples, "data.samples")?;
    let features = load_features(&features_path)?;
    let originals = dataset::read_manifest(&samples_path, &features)?;
    if let Some(bad) = originals.iter().find(|s| s.origin != Origin::Original) {
        return Err(Error::Provenance(format!(
            "gen-pt input contains transformed sample {}",
            bad.sample_id
        )));
    }

    let (pt_rows, pt_sources) = jitter_features(&features, cfg.pt.k, cfg.pt.jitter, cfg.pt.seed)?;
    let mut transformed = Vec::new();
    let mut id = next_id(&originals);
    for (r, &src) in pt_sources.iter().enumerate() {
        transformed.push(transformed_sample(
            id,
            pt_rows.row(r).to_vec(),
            &originals[src],
        ));
        id += 1;
    }
    let mut k_eff = cfg.pt.k;
    if cfg.aug.flips {
        // Traditional-augmentation arm: one jittered copy per original.
        let (aug_rows, aug_sources) =
            jitter_features(&features, 1, cfg.aug.jitter, cfg.pt.seed ^ 0x4155_4731)?;
        for (r, &src) in aug_sources.iter().enumerate() {
            transformed.push(transformed_sample(
                id,
                aug_rows.row(r).to_vec(),
                &originals[src],
            ));
            id += 1;
        }
        k_eff += 1;
    }
    merge_pt(&originals, &transformed, k_eff)
}

fn load_pose_entries(cfg: &RunConfig) -> Result<Vec<PoseEntry>> {
    let path = require_input(&cfg.data.poses, "data.poses")?;
    let entries = read_keypoints(&path)?;
    if entries.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "no keypoint records in {}",
            path.display()
        )));
    }
    Ok(entries)
}

fn load_images(cfg: &RunConfig, entries: &[PoseEntry]) -> Result<Vec<RgbRaster>> {
    let dir = require_input(&cfg.data.images_dir, "data.images_dir")?;
    entries
        .iter()
        .map(|e| read_ppm(&dir.join(format!("{}.ppm", e.id))))
        .collect()
}

fn load_mask_part_sets(cfg: &RunConfig, entries: &[PoseEntry]) -> Result<Vec<PartSet>> {
    let dir = require_input(&cfg.data.masks_dir, "data.masks_dir")?;
    entries
        .iter()
        .map(|e| {
            let parts = (0..NUM_PARTS)
                .map(|k| {
                    let mask = read_pgm(&dir.join(format!("{}_part{}.pgm", e.id, k)))?;
                    Ok(pose_transform::Part {
                        joint_pair: pose_transform::PART_JOINTS[k],
                        shape: pose_transform::PartShape::Mask(mask),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            PartSet::new(parts)
        })
        .collect()
}

fn gen_pt_raster_mode(cfg: &RunConfig) -> Result<GeneratedPt> {
    let entries = load_pose_entries(cfg)?;
    let images = load_images(cfg, &entries)?;
    let poses: Vec<Pose> = entries.iter().map(|e| e.pose.clone()).collect();
    let part_sets: Vec<PartSet> = match cfg.pt.mode {
        PtMode::Pe => load_mask_part_sets(cfg, &entries)?,
        PtMode::Sia => {
            let annotation = read_sia(&require_input(&cfg.data.sia, "data.sia")?)?;
            poses
                .iter()
                .map(|p| warp_sia_parts(&annotation.parts, &annotation.pose, p))
                .collect::<Result<Vec<_>>>()?
        }
        PtMode::Feature => unreachable!("caller dispatches on mode"),
    };

    let grid = cfg.pt.feature_grid.max(1);
    let feature_rows: Vec<Vec<f64>> = images
        .iter()
        .map(|img| img.block_mean_features(grid))
        .collect();
    let features = FeatureMatrix::from_rows(&feature_rows)?;
    let cameras: Vec<Option<u32>> = entries.iter().map(|e| e.camera).collect();
    let originals = assign_pseudo_labels_with_cameras(&features, Some(&cameras))?;
    // Keep file ids authoritative for provenance.
    let originals: Vec<Sample> = originals
        .into_iter()
        .zip(&entries)
        .map(|(mut s, e)| {
            s.sample_id = e.id;
            s
        })
        .collect();

    let (rasters, sources) = generate_pt(&images, &poses, &part_sets, cfg.pt.k, cfg.pt.seed)?;
    let mut transformed = Vec::new();
    let mut all_rasters = Vec::new();
    let mut id = next_id(&originals);
    for (raster, &src) in rasters.iter().zip(&sources) {
        transformed.push(transformed_sample(
            id,
            raster.block_mean_features(grid),
            &originals[src],
        ));
        all_rasters.push(raster.clone());
        id += 1;
    }
    let mut k_eff = cfg.pt.k;
    if cfg.aug.flips {
        for (src, img) in images.iter().enumerate() {
            let flipped = img.flip_horizontal();
            transformed.push(transformed_sample(
                id,
                flipped.block_mean_features(grid),
                &originals[src],
            ));
            all_rasters.push(flipped);
            id += 1;
        }
        k_eff += 1;
    }
    let pt = merge_pt(&originals, &transformed, k_eff)?;
    Ok(GeneratedPt {
        pt,
        rasters: all_rasters,
    })
}

fn cmd_gen_pt(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = run_dir(cfg)?;
    let generated = match cfg.pt.mode {
        PtMode::Feature => GeneratedPt {
            pt: gen_pt_feature_mode(cfg)?,
            rasters: Vec::new(),
        },
        PtMode::Pe | PtMode::Sia => gen_pt_raster_mode(cfg)?,
    };
    let pt = &generated.pt;
    let rows: Vec<Vec<f64>> = pt.samples().iter().map(|s| s.features.clone()).collect();
    let features = FeatureMatrix::from_rows(&rows)?;
    dataset::write_features_binary(&dir.join("pt_features.rdf"), &features)?;
    dataset::write_manifest(&dir.join("pt_samples.jsonl"), pt.samples())?;
    if !generated.rasters.is_empty() {
        let img_dir = dir.join("pt_images");
        fs::create_dir_all(&img_dir).map_err(|e| Error::io(&img_dir, e))?;
        let transformed: Vec<&Sample> = pt
            .samples()
            .iter()
            .filter(|s| s.origin == Origin::Transformed)
            .collect();
        for (raster, sample) in generated.rasters.iter().zip(transformed) {
            write_ppm(&img_dir.join(format!("{}.ppm", sample.sample_id)), raster)?;
        }
    }
    info(&format!(
        "gen-pt: {} originals x (K={}) -> {} samples",
        pt.n_original(),
        pt.k_factor(),
        pt.len()
    ));
    Ok(dir)
}

// ---------------------------------------------------------------------------
// train-init / train-cluster
// ---------------------------------------------------------------------------

fn load_pt_dataset(cfg: &RunConfig) -> Result<PTDataset> {
    let features_path = require_input(&cfg.data.features, "data.features")?;
    let samples_path = require_input(&cfg.data.samples, "data.samples")?;
    let features = load_features(&features_path)?;
    let samples = dataset::read_manifest(&samples_path, &features)?;
    PTDataset::from_samples(samples)
}

fn cmd_train_init(cfg: &RunConfig) -> Result<()> {
    let dir = run_dir(cfg)?;
    let mut train = cfg.train.clone();
    train.k_factor = cfg.pt.k;
    let pt = load_pt_dataset(cfg)?;
    let outcome = train_init(&pt, &train)?;
    save_checkpoint(&dir.join("checkpoint"), &outcome.params, &cfg.resolved_text())?;
    write_log(&dir.join("log.jsonl"), &outcome.log)?;
    info(&format!(
        "train-init: {} epochs over {} samples -> {}",
        train.epochs_init,
        pt.len(),
        dir.join("checkpoint").display()
    ));
    Ok(())
}

fn cmd_train_cluster(cfg: &RunConfig) -> Result<()> {
    let dir = run_dir(cfg)?;
    let mut train = cfg.train.clone();
    train.k_factor = cfg.pt.k;
    let pt = load_pt_dataset(cfg)?;
    // Transformed samples are dropped here; stage two trains on originals.
    let originals = drop_transformed(&pt);
    let params = load_encoder(cfg)?;
    let outcome = train_discriminative(&originals, params, &train)?;
    save_checkpoint(&dir.join("checkpoint"), &outcome.params, &cfg.resolved_text())?;
    write_log(&dir.join("log.jsonl"), &outcome.log)?;
    info(&format!(
        "train-cluster: {} epochs over {} originals -> {}",
        train.epochs_cluster,
        originals.len(),
        dir.join("checkpoint").display()
    ));
    Ok(())
}

// ---------------------------------------------------------------------------
// eval / cluster-stats
// ---------------------------------------------------------------------------

/// First `queries_per_identity` samples of each identity become queries, the
/// rest gallery.
fn split_queries(
    truth: &[TruthRecord],
    queries_per_identity: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut seen: std::collections::BTreeMap<u64, usize> = Default::default();
    let mut queries = Vec::new();
    let mut gallery = Vec::new();
    for (row, rec) in truth.iter().enumerate() {
        let count = seen.entry(rec.identity).or_insert(0);
        if *count < queries_per_identity {
            queries.push(row);
        } else {
            gallery.push(row);
        }
        *count += 1;
    }
    (queries, gallery)
}

fn cmd_eval(cfg: &RunConfig) -> Result<ReportSummary> {
    let dir = run_dir(cfg)?;
    let features_path = require_input(&cfg.data.features, "data.features")?;
    let truth_path = require_input(&cfg.data.truth, "data.truth")?;
    let features = load_features(&features_path)?;
    let truth = read_truth(&truth_path)?;
    if truth.len() != features.rows() {
        return Err(Error::Cardinality(format!(
            "{} truth records for {} feature rows",
            truth.len(),
            features.rows()
        )));
    }
    let params = load_encoder(cfg)?;
    let embeddings = forward(&params, &features)?;

    let (query_rows, gallery_rows) = split_queries(&truth, cfg.eval.queries_per_identity);
    let split = dataset::DatasetSplit {
        train: Vec::new(),
        query: query_rows.clone(),
        gallery: gallery_rows.clone(),
    };
    split.validate()?;
    let sample_of = |row: usize| EvalSample {
        identity: truth[row].identity,
        camera: truth[row].camera,
    };
    let queries: Vec<EvalSample> = query_rows.iter().map(|&r| sample_of(r)).collect();
    let gallery: Vec<EvalSample> = gallery_rows.iter().map(|&r| sample_of(r)).collect();
    let dist = distance_matrix(
        &embeddings.gather(&query_rows)?,
        &embeddings.gather(&gallery_rows)?,
    )?;
    let report = evaluate(&queries, &gallery, &dist, cfg.eval.camera_filter)?;
    let summary = report.summary();

    let report_path = dir.join("report.json");
    let json = serde_json::to_string(&summary)
        .map_err(|e| Error::format(&report_path, format!("serialize: {}", e)))?;
    fs::write(&report_path, format!("{}\n", json)).map_err(|e| Error::io(&report_path, e))?;

    let identities: Vec<u64> = truth.iter().map(|t| t.identity).collect();
    let projection = export_projection(&embeddings, &identities)?;
    write_projection_csv(&dir.join("projection.csv"), &projection)?;

    info(&format!(
        "eval: rank1={:.4} map={:.4} over {} queries -> {}",
        summary.rank1,
        summary.map,
        summary.queries_evaluated,
        report_path.display()
    ));
    Ok(summary)
}

fn cmd_cluster_stats(cfg: &RunConfig) -> Result<()> {
    let dir = run_dir(cfg)?;
    let features_path = require_input(&cfg.data.features, "data.features")?;
    let features = load_features(&features_path)?;
    let params = load_encoder(cfg)?;
    let embeddings = forward(&params, &features)?;
    let c = cfg.train.clusters_start.min(embeddings.rows()).max(1);
    let assignment = crate::clustering::cluster_hierarchical(&embeddings, c)?;
    let geometry = crate::clustering::compute_geometry(&embeddings, &assignment, 0)?;
    let stats = crate::clustering::cluster_stats(&geometry, &assignment)?;
    let path = dir.join("cluster_stats.json");
    let json = serde_json::to_string_pretty(&stats)
        .map_err(|e| Error::format(&path, format!("serialize: {}", e)))?;
    fs::write(&path, format!("{}\n", json)).map_err(|e| Error::io(&path, e))?;
    println!("{}", json);
    Ok(())
}

// ---------------------------------------------------------------------------
// ablate
// ---------------------------------------------------------------------------

/// The canonical chain over existing dataset files: gen-pt, train-init,
/// train-cluster, eval, each in a subdirectory of `data.dir`.
pub fn run_experiment(base: &RunConfig) -> Result<ReportSummary> {
    let dir = run_dir(base)?;
    fs::write(dir.join("manifest"), base.resolved_text())
        .map_err(|e| Error::io(&dir.join("manifest"), e))?;

    let mut gen = base.clone();
    gen.data.dir = dir.join("pt").display().to_string();
    let pt_dir = cmd_gen_pt(&gen)?;

    let mut init = base.clone();
    init.data.dir = dir.join("init").display().to_string();
    init.data.features = pt_dir.join("pt_features.rdf").display().to_string();
    init.data.samples = pt_dir.join("pt_samples.jsonl").display().to_string();
    cmd_train_init(&init)?;

    let mut cluster = base.clone();
    cluster.data.dir = dir.join("cluster").display().to_string();
    cluster.data.features = init.data.features.clone();
    cluster.data.samples = init.data.samples.clone();
    cluster.data.checkpoint = dir.join("init").join("checkpoint").display().to_string();
    cmd_train_cluster(&cluster)?;

    let mut eval_cfg = base.clone();
    eval_cfg.data.dir = dir.join("eval").display().to_string();
    eval_cfg.data.checkpoint = dir.join("cluster").join("checkpoint").display().to_string();
    cmd_eval(&eval_cfg)
}

fn cmd_ablate(cfg: &RunConfig) -> Result<()> {
    let dir = run_dir(cfg)?;
    require_input(&cfg.data.features, "data.features")?;
    require_input(&cfg.data.samples, "data.samples")?;
    require_input(&cfg.data.truth, "data.truth")?;
    let values = cfg.ablate_values()?;
    let param = cfg.ablate.param.clone();
    let mut rows = Vec::new();
    for v in &values {
        let mut sub = cfg.clone();
        match param.as_str() {
            "gamma" => sub.train.gamma = *v,
            "k" => {
                if v.fract() != 0.0 || *v < 0.0 {
                    return Err(Error::Config(format!(
                        "key 'ablate.values': K value {} is not a non-negative integer",
                        v
                    )));
                }
                sub.pt.k = *v as usize;
            }
            _ => unreachable!("validated at parse time"),
        }
        sub.data.dir = dir.join(format!("{}_{}", param, v)).display().to_string();
        info(&format!("ablate: {} = {}", param, v));
        let summary = run_experiment(&sub)?;
        rows.push((*v, summary));
    }
    let csv_path = dir.join("ablate.csv");
    let mut out = String::from("param,value,rank1,rank5,rank10,map\n");
    for (v, s) in &rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            param, v, s.rank1, s.rank5, s.rank10, s.map
        ));
    }
    fs::write(&csv_path, out).map_err(|e| Error::io(&csv_path, e))?;
    info(&format!("ablate: wrote {}", csv_path.display()));
    Ok(())
}
