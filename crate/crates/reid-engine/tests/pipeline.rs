//! CLI-surface contracts: config handling, exit codes, file outputs, and the
//! canonical smoke pipeline across every subcommand.

use std::path::Path;

use reid_engine::pipeline::{run, run_checked, Subcommand};

fn set(k: &str, v: impl std::fmt::Display) -> String {
    format!("{}={}", k, v)
}

fn synth_small(dir: &Path) {
    run_checked(
        Subcommand::Synth,
        None,
        &[
            set("data.dir", dir.display()),
            set("synth.identities", 8),
            set("synth.samples_min", 4),
            set("synth.samples_max", 7),
            set("synth.cameras", 2),
            set("synth.camera_bias", 1.5),
        ],
    )
    .unwrap();
}

const SMALL_TRAIN: [(&str, &str); 6] = [
    ("train.epochs_init", "3"),
    ("train.epochs_cluster", "3"),
    ("train.batch_p", "4"),
    ("train.batch_m", "2"),
    ("train.clusters_start", "8"),
    ("train.clusters_end", "8"),
];

fn small_train_sets() -> Vec<String> {
    SMALL_TRAIN.iter().map(|(k, v)| set(k, v)).collect()
}

#[test]
fn unknown_config_key_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "[train]\nlerning_rate = 0.1\n").unwrap();
    let code = run(Subcommand::Synth, Some(&cfg), &[]);
    assert_eq!(code, 1);

    let code = run(
        Subcommand::Synth,
        None,
        &["train.no_such_key=1".to_string()],
    );
    assert_eq!(code, 1);
}

#[test]
fn missing_input_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let code = run(
        Subcommand::TrainInit,
        None,
        &[
            set("data.dir", tmp.path().join("out").display()),
            set("data.features", "/no/such/file.rdf"),
            set("data.samples", "/no/such/file.jsonl"),
        ],
    );
    assert_eq!(code, 2);

    // Empty required key is a config error, not a data error.
    let code = run(
        Subcommand::TrainInit,
        None,
        &[set("data.dir", tmp.path().join("out2").display())],
    );
    assert_eq!(code, 1);
}

#[test]
fn smoke_pipeline_all_subcommands() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    synth_small(&root.join("data"));
    for name in ["features.rdf", "samples.jsonl", "truth.jsonl", "manifest"] {
        assert!(root.join("data").join(name).exists(), "missing {}", name);
    }

    run_checked(
        Subcommand::GenPt,
        None,
        &[
            set("data.dir", root.join("pt").display()),
            set("data.features", root.join("data/features.rdf").display()),
            set("data.samples", root.join("data/samples.jsonl").display()),
            set("pt.k", 2),
        ],
    )
    .unwrap();
    let pt_manifest = std::fs::read_to_string(root.join("pt/pt_samples.jsonl")).unwrap();
    let lines = pt_manifest.lines().count();
    let originals = std::fs::read_to_string(root.join("data/samples.jsonl"))
        .unwrap()
        .lines()
        .count();
    assert_eq!(lines, 3 * originals); // (K+1) * N with K = 2

    let mut init_sets = small_train_sets();
    init_sets.extend([
        set("data.dir", root.join("init").display()),
        set("data.features", root.join("pt/pt_features.rdf").display()),
        set("data.samples", root.join("pt/pt_samples.jsonl").display()),
        set("pt.k", 2),
    ]);
    run_checked(Subcommand::TrainInit, None, &init_sets).unwrap();
    assert!(root.join("init/checkpoint").exists());
    let log = std::fs::read_to_string(root.join("init/log.jsonl")).unwrap();
    assert_eq!(log.lines().count(), 3);
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["stage"], "init");
        assert!(v["loss_cls"].is_number());
        assert!(v["loss_tri"].is_number());
        assert!(v["num_clusters"].is_null());
    }

    let mut cluster_sets = small_train_sets();
    cluster_sets.extend([
        set("data.dir", root.join("cluster").display()),
        set("data.features", root.join("pt/pt_features.rdf").display()),
        set("data.samples", root.join("pt/pt_samples.jsonl").display()),
        set("data.checkpoint", root.join("init/checkpoint").display()),
        set("pt.k", 2),
    ]);
    run_checked(Subcommand::TrainCluster, None, &cluster_sets).unwrap();
    let log = std::fs::read_to_string(root.join("cluster/log.jsonl")).unwrap();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["stage"], "cluster");
        assert_eq!(v["num_clusters"], 8);
        assert!(v["mean_radius"].is_number());
        assert!(v["loss_rd"].is_number());
    }

    run_checked(
        Subcommand::Eval,
        None,
        &[
            set("data.dir", root.join("eval").display()),
            set("data.features", root.join("data/features.rdf").display()),
            set("data.truth", root.join("data/truth.jsonl").display()),
            set("data.checkpoint", root.join("cluster/checkpoint").display()),
        ],
    )
    .unwrap();
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("eval/report.json")).unwrap())
            .unwrap();
    for key in ["rank1", "rank5", "rank10", "map"] {
        assert!(report[key].is_number(), "report missing {}", key);
        let v = report[key].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&v));
    }
    assert_eq!(report["queries_evaluated"], 8);
    let projection = std::fs::read_to_string(root.join("eval/projection.csv")).unwrap();
    assert!(projection.starts_with("x,y,label\n"));

    run_checked(
        Subcommand::ClusterStats,
        None,
        &[
            set("data.dir", root.join("stats").display()),
            set("data.features", root.join("data/features.rdf").display()),
            set("data.checkpoint", root.join("cluster/checkpoint").display()),
            set("train.clusters_start", 8),
        ],
    )
    .unwrap();
    let stats: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(root.join("stats/cluster_stats.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(stats["num_clusters"], 8);
    assert_eq!(stats["clusters"].as_array().unwrap().len(), 8);
    let first = &stats["clusters"][0];
    for key in ["size", "radius", "centroid_norm", "min_inter_centroid_dist"] {
        assert!(!first[key].is_null(), "cluster stats missing {}", key);
    }
}

#[test]
fn train_init_zero_epochs_writes_initialization() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    synth_small(&root.join("data"));
    run_checked(
        Subcommand::GenPt,
        None,
        &[
            set("data.dir", root.join("pt").display()),
            set("data.features", root.join("data/features.rdf").display()),
            set("data.samples", root.join("data/samples.jsonl").display()),
        ],
    )
    .unwrap();
    let code = run(
        Subcommand::TrainInit,
        None,
        &[
            set("data.dir", root.join("init").display()),
            set("data.features", root.join("pt/pt_features.rdf").display()),
            set("data.samples", root.join("pt/pt_samples.jsonl").display()),
            set("train.epochs_init", 0),
        ],
    );
    assert_eq!(code, 0);
    let ckpt = reid_engine::trainer::load_checkpoint(&root.join("init/checkpoint")).unwrap();
    let params = reid_engine::trainer::encoder_from_tensors(&ckpt.tensors, true).unwrap();
    assert!(params.all_finite());
    assert_eq!(params.input_dim(), 32);
    assert_eq!(params.output_dim(), 64);
    // Log exists and is empty for a zero-epoch run.
    assert_eq!(
        std::fs::read_to_string(root.join("init/log.jsonl")).unwrap(),
        ""
    );
}

#[test]
fn ablate_gamma_produces_one_row_per_value() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    synth_small(&root.join("data"));

    let mut sets = small_train_sets();
    sets.extend([
        set("data.dir", root.join("sweep").display()),
        set("data.features", root.join("data/features.rdf").display()),
        set("data.samples", root.join("data/samples.jsonl").display()),
        set("data.truth", root.join("data/truth.jsonl").display()),
        set("ablate.param", "gamma"),
        set("ablate.values", "0.1,0.5,1.0"),
    ]);
    run_checked(Subcommand::Ablate, None, &sets).unwrap();

    let csv = std::fs::read_to_string(root.join("sweep/ablate.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "param,value,rank1,rank5,rank10,map");
    assert_eq!(lines.len(), 4); // header + one row per gamma
    for (line, gamma) in lines[1..].iter().zip(["0.1", "0.5", "1"]) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], "gamma");
        assert_eq!(fields[1], gamma);
        for f in &fields[2..] {
            let v: f64 = f.parse().unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }
    // Every value ran the full chain in its own directory.
    for value in ["gamma_0.1", "gamma_0.5", "gamma_1"] {
        assert!(root.join("sweep").join(value).join("eval/report.json").exists());
    }
}

#[test]
fn gen_pt_raster_modes_write_images_and_features() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    // Figures on: synth writes images, masks, poses and the SIA annotation.
    run_checked(
        Subcommand::Synth,
        None,
        &[
            set("data.dir", root.join("data").display()),
            set("synth.identities", 3),
            set("synth.samples_min", 2),
            set("synth.samples_max", 2),
            set("synth.figures", "true"),
        ],
    )
    .unwrap();
    for name in ["images", "masks", "poses.jsonl", "sia.json"] {
        assert!(root.join("data").join(name).exists(), "missing {}", name);
    }

    for (mode, dir) in [("pe", "pt_pe"), ("sia", "pt_sia")] {
        let mut sets = vec![
            set("data.dir", root.join(dir).display()),
            set("data.images_dir", root.join("data/images").display()),
            set("data.poses", root.join("data/poses.jsonl").display()),
            set("pt.mode", mode),
            set("pt.k", 2),
        ];
        if mode == "pe" {
            sets.push(set("data.masks_dir", root.join("data/masks").display()));
        } else {
            sets.push(set("data.sia", root.join("data/sia.json").display()));
        }
        run_checked(Subcommand::GenPt, None, &sets).unwrap();
        let manifest = std::fs::read_to_string(root.join(dir).join("pt_samples.jsonl")).unwrap();
        assert_eq!(manifest.lines().count(), 18); // 6 originals x (K+1)
        let features =
            reid_engine::dataset::read_features_binary(&root.join(dir).join("pt_features.rdf"))
                .unwrap();
        assert_eq!(features.rows(), 18);
        assert_eq!(features.dim(), 48); // 4x4 grid x 3 channels
        // Transformed rasters on disk, one per generated sample.
        let images = std::fs::read_dir(root.join(dir).join("pt_images")).unwrap().count();
        assert_eq!(images, 12);
    }
}

#[test]
fn aug_flag_adds_one_variant_per_original() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    synth_small(&root.join("data"));
    run_checked(
        Subcommand::GenPt,
        None,
        &[
            set("data.dir", root.join("pt").display()),
            set("data.features", root.join("data/features.rdf").display()),
            set("data.samples", root.join("data/samples.jsonl").display()),
            set("pt.k", 2),
            set("aug.flips", "true"),
        ],
    )
    .unwrap();
    let manifest = std::fs::read_to_string(root.join("pt/pt_samples.jsonl")).unwrap();
    let originals = std::fs::read_to_string(root.join("data/samples.jsonl"))
        .unwrap()
        .lines()
        .count();
    // K = 2 plus the augmentation variant: (2 + 1 + 1) * N.
    assert_eq!(manifest.lines().count(), 4 * originals);
}

#[test]
fn manifest_echoes_resolved_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run_checked(
        Subcommand::Synth,
        None,
        &[
            set("data.dir", dir.display()),
            set("synth.identities", 2),
            set("synth.samples_min", 2),
            set("synth.samples_max", 2),
            set("train.gamma", 0.75),
        ],
    )
    .unwrap();
    let manifest = std::fs::read_to_string(dir.join("manifest")).unwrap();
    assert!(manifest.contains("train.gamma = 0.75"));
    assert!(manifest.contains("synth.identities = 2"));
    assert!(manifest.contains("train.seed = 42"));
}
