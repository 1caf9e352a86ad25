//! Run configuration: a sectioned `key = value` text file plus
//! `--set section.key=value` overrides.
//!
//! Unknown keys are a hard error, never a silent default. The resolved
//! configuration (every key, final value, sorted) is echoed into each run's
//! `manifest` file and into checkpoints, which is what makes runs
//! reproducible byte for byte.

use std::path::Path;

use crate::error::{Error, Result};
use crate::losses::TripletVariant;
use crate::trainer::{Mining, TrainConfig};

/// How `gen-pt` produces transformed samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PtMode {
    /// Keypoint-free stand-in: seeded feature-space jitter.
    Feature,
    /// Per-image estimated part masks (mask rasters on disk).
    Pe,
    /// Single-image annotation warped to every image's pose.
    Sia,
}

#[derive(Debug, Clone)]
pub struct DataCfg {
    pub dir: String,
    pub features: String,
    pub samples: String,
    pub truth: String,
    pub images_dir: String,
    pub poses: String,
    pub masks_dir: String,
    pub sia: String,
    pub checkpoint: String,
}

#[derive(Debug, Clone)]
pub struct SynthCfg {
    pub identities: usize,
    pub samples_min: usize,
    pub samples_max: usize,
    pub feature_dim: usize,
    pub spread: f64,
    pub separation: f64,
    pub cameras: usize,
    pub camera_bias: f64,
    pub figures: bool,
    pub figure_height: usize,
    pub figure_width: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PtCfg {
    pub k: usize,
    pub mode: PtMode,
    pub jitter: f64,
    pub conf_threshold: f64,
    pub feature_grid: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct EvalCfg {
    pub camera_filter: bool,
    pub queries_per_identity: usize,
}

#[derive(Debug, Clone)]
pub struct AugCfg {
    /// Adds one traditional-augmentation variant per original at `gen-pt`
    /// time: a horizontal flip in raster modes, a feature jitter otherwise.
    pub flips: bool,
    pub jitter: f64,
}

#[derive(Debug, Clone)]
pub struct AblateCfg {
    pub param: String,
    pub values: String,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub data: DataCfg,
    pub synth: SynthCfg,
    pub pt: PtCfg,
    pub train: TrainConfig,
    pub eval: EvalCfg,
    pub aug: AugCfg,
    pub ablate: AblateCfg,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            data: DataCfg {
                dir: "out".into(),
                features: String::new(),
                samples: String::new(),
                truth: String::new(),
                images_dir: String::new(),
                poses: String::new(),
                masks_dir: String::new(),
                sia: String::new(),
                checkpoint: String::new(),
            },
            synth: SynthCfg {
                identities: 20,
                samples_min: 5,
                samples_max: 15,
                feature_dim: 32,
                spread: 1.0,
                separation: 10.0,
                cameras: 2,
                camera_bias: 0.0,
                figures: false,
                figure_height: 96,
                figure_width: 64,
                seed: 7,
            },
            pt: PtCfg {
                k: 3,
                mode: PtMode::Feature,
                jitter: 0.5,
                conf_threshold: 0.2,
                feature_grid: 4,
                seed: 13,
            },
            train: TrainConfig::default(),
            eval: EvalCfg {
                camera_filter: true,
                queries_per_identity: 1,
            },
            aug: AugCfg {
                flips: false,
                jitter: 0.1,
            },
            ablate: AblateCfg {
                param: "gamma".into(),
                values: "0.1,0.5,1.0".into(),
            },
        }
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::Config(format!("key '{}': '{}' is not a non-negative integer", key, v)))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::Config(format!("key '{}': '{}' is not a non-negative integer", key, v)))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| Error::Config(format!("key '{}': '{}' is not a number", key, v)))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("key '{}': '{}' is not finite", key, v)));
    }
    Ok(x)
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::Config(format!(
            "key '{}': '{}' is not a boolean (true/false)",
            key, v
        ))),
    }
}

impl RunConfig {
    /// Applies one `section.key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "data.dir" => self.data.dir = v.into(),
            "data.features" => self.data.features = v.into(),
            "data.samples" => self.data.samples = v.into(),
            "data.truth" => self.data.truth = v.into(),
            "data.images_dir" => self.data.images_dir = v.into(),
            "data.poses" => self.data.poses = v.into(),
            "data.masks_dir" => self.data.masks_dir = v.into(),
            "data.sia" => self.data.sia = v.into(),
            "data.checkpoint" => self.data.checkpoint = v.into(),

            "synth.identities" => self.synth.identities = parse_usize(key, v)?,
            "synth.samples_min" => self.synth.samples_min = parse_usize(key, v)?,
            "synth.samples_max" => self.synth.samples_max = parse_usize(key, v)?,
            "synth.feature_dim" => self.synth.feature_dim = parse_usize(key, v)?,
            "synth.spread" => self.synth.spread = parse_f64(key, v)?,
            "synth.separation" => self.synth.separation = parse_f64(key, v)?,
            "synth.cameras" => self.synth.cameras = parse_usize(key, v)?,
            "synth.camera_bias" => self.synth.camera_bias = parse_f64(key, v)?,
            "synth.figures" => self.synth.figures = parse_bool(key, v)?,
            "synth.figure_height" => self.synth.figure_height = parse_usize(key, v)?,
            "synth.figure_width" => self.synth.figure_width = parse_usize(key, v)?,
            "synth.seed" => self.synth.seed = parse_u64(key, v)?,

            "pt.k" => self.pt.k = parse_usize(key, v)?,
            "pt.mode" => {
                self.pt.mode = match v {
                    "feature" => PtMode::Feature,
                    "pe" => PtMode::Pe,
                    "sia" => PtMode::Sia,
                    _ => {
                        return Err(Error::Config(format!(
                            "key '{}': '{}' is not one of feature|pe|sia",
                            key, v
                        )))
                    }
                }
            }
            "pt.jitter" => self.pt.jitter = parse_f64(key, v)?,
            "pt.conf_threshold" => self.pt.conf_threshold = parse_f64(key, v)?,
            "pt.feature_grid" => self.pt.feature_grid = parse_usize(key, v)?,
            "pt.seed" => self.pt.seed = parse_u64(key, v)?,

            "train.epochs_init" => self.train.epochs_init = parse_usize(key, v)?,
            "train.epochs_cluster" => self.train.epochs_cluster = parse_usize(key, v)?,
            "train.lr" => self.train.lr = parse_f64(key, v)?,
            "train.weight_decay" => self.train.weight_decay = parse_f64(key, v)?,
            "train.batch_p" => self.train.batch_p = parse_usize(key, v)?,
            "train.batch_m" => self.train.batch_m = parse_usize(key, v)?,
            "train.tau" => self.train.tau = parse_f64(key, v)?,
            "train.gamma" => self.train.gamma = parse_f64(key, v)?,
            "train.lambda_tri" => self.train.lambda_tri = parse_f64(key, v)?,
            "train.lambda_rd" => self.train.lambda_rd = parse_f64(key, v)?,
            "train.clusters_start" => self.train.clusters_start = parse_usize(key, v)?,
            "train.clusters_end" => self.train.clusters_end = parse_usize(key, v)?,
            "train.seed" => self.train.seed = parse_u64(key, v)?,
            "train.embed_dim" => self.train.embed_dim = parse_usize(key, v)?,
            "train.hidden_dim" => self.train.hidden_dim = parse_usize(key, v)?,
            "train.normalize" => self.train.normalize = parse_bool(key, v)?,
            "train.standardize" => self.train.standardize = parse_bool(key, v)?,
            "train.triplet_variant" => {
                self.train.triplet_variant = match v {
                    "literal" => TripletVariant::Literal,
                    "logsoftmax" => TripletVariant::LogSoftmax,
                    _ => {
                        return Err(Error::Config(format!(
                            "key '{}': '{}' is not one of literal|logsoftmax",
                            key, v
                        )))
                    }
                }
            }
            "train.mining" => {
                self.train.mining = match v {
                    "hardest" => Mining::Hardest,
                    "uniform" => Mining::Uniform,
                    _ => {
                        return Err(Error::Config(format!(
                            "key '{}': '{}' is not one of hardest|uniform",
                            key, v
                        )))
                    }
                }
            }

            "eval.camera_filter" => self.eval.camera_filter = parse_bool(key, v)?,
            "eval.queries_per_identity" => {
                self.eval.queries_per_identity = parse_usize(key, v)?
            }

            "aug.flips" => self.aug.flips = parse_bool(key, v)?,
            "aug.jitter" => self.aug.jitter = parse_f64(key, v)?,

            "ablate.param" => {
                if v != "gamma" && v != "k" {
                    return Err(Error::Config(format!(
                        "key '{}': '{}' is not one of gamma|k",
                        key, v
                    )));
                }
                self.ablate.param = v.into();
            }
            "ablate.values" => self.ablate.values = v.into(),

            _ => return Err(Error::Config(format!("unknown config key '{}'", key))),
        }
        Ok(())
    }

    /// Parses a sectioned config file. `#` and `;` start comments.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        let mut section: Option<String> = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                section = Some(name.trim().to_string());
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected 'key = value', got '{}'",
                    path.display(),
                    ln + 1,
                    line
                )));
            };
            let key = key.trim();
            let full = match &section {
                Some(s) => format!("{}.{}", s, key),
                None => {
                    return Err(Error::Config(format!(
                        "{}:{}: key '{}' appears before any [section]",
                        path.display(),
                        ln + 1,
                        key
                    )))
                }
            };
            self.set(&full, value)
                .map_err(|e| match e {
                    Error::Config(msg) => {
                        Error::Config(format!("{}:{}: {}", path.display(), ln + 1, msg))
                    }
                    other => other,
                })?;
        }
        Ok(())
    }

    /// Applies `section.key=value` override strings (CLI `--set`).
    pub fn apply_overrides(&mut self, overrides: &[String]) -> Result<()> {
        for o in overrides {
            let Some((key, value)) = o.split_once('=') else {
                return Err(Error::Config(format!(
                    "override '{}' is not of the form section.key=value",
                    o
                )));
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Defaults, then the optional file, then overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let mut cfg = Self::default();
        if let Some(p) = path {
            cfg.apply_file(p)?;
        }
        cfg.apply_overrides(overrides)?;
        Ok(cfg)
    }

    /// Every key with its final value, sorted; the run manifest body and the
    /// checkpoint config echo.
    pub fn resolved_text(&self) -> String {
        let mut entries: Vec<(String, String)> = vec![
            ("data.dir".into(), self.data.dir.clone()),
            ("data.features".into(), self.data.features.clone()),
            ("data.samples".into(), self.data.samples.clone()),
            ("data.truth".into(), self.data.truth.clone()),
            ("data.images_dir".into(), self.data.images_dir.clone()),
            ("data.poses".into(), self.data.poses.clone()),
            ("data.masks_dir".into(), self.data.masks_dir.clone()),
            ("data.sia".into(), self.data.sia.clone()),
            ("data.checkpoint".into(), self.data.checkpoint.clone()),
            ("synth.identities".into(), self.synth.identities.to_string()),
            ("synth.samples_min".into(), self.synth.samples_min.to_string()),
            ("synth.samples_max".into(), self.synth.samples_max.to_string()),
            ("synth.feature_dim".into(), self.synth.feature_dim.to_string()),
            ("synth.spread".into(), self.synth.spread.to_string()),
            ("synth.separation".into(), self.synth.separation.to_string()),
            ("synth.cameras".into(), self.synth.cameras.to_string()),
            ("synth.camera_bias".into(), self.synth.camera_bias.to_string()),
            ("synth.figures".into(), self.synth.figures.to_string()),
            (
                "synth.figure_height".into(),
                self.synth.figure_height.to_string(),
            ),
            (
                "synth.figure_width".into(),
                self.synth.figure_width.to_string(),
            ),
            ("synth.seed".into(), self.synth.seed.to_string()),
            ("pt.k".into(), self.pt.k.to_string()),
            (
                "pt.mode".into(),
                match self.pt.mode {
                    PtMode::Feature => "feature".into(),
                    PtMode::Pe => "pe".into(),
                    PtMode::Sia => "sia".into(),
                },
            ),
            ("pt.jitter".into(), self.pt.jitter.to_string()),
            ("pt.conf_threshold".into(), self.pt.conf_threshold.to_string()),
            ("pt.feature_grid".into(), self.pt.feature_grid.to_string()),
            ("pt.seed".into(), self.pt.seed.to_string()),
            ("train.epochs_init".into(), self.train.epochs_init.to_string()),
            (
                "train.epochs_cluster".into(),
                self.train.epochs_cluster.to_string(),
            ),
            ("train.lr".into(), self.train.lr.to_string()),
            ("train.weight_decay".into(), self.train.weight_decay.to_string()),
            ("train.batch_p".into(), self.train.batch_p.to_string()),
            ("train.batch_m".into(), self.train.batch_m.to_string()),
            ("train.tau".into(), self.train.tau.to_string()),
            ("train.gamma".into(), self.train.gamma.to_string()),
            ("train.lambda_tri".into(), self.train.lambda_tri.to_string()),
            ("train.lambda_rd".into(), self.train.lambda_rd.to_string()),
            (
                "train.clusters_start".into(),
                self.train.clusters_start.to_string(),
            ),
            (
                "train.clusters_end".into(),
                self.train.clusters_end.to_string(),
            ),
            ("train.seed".into(), self.train.seed.to_string()),
            ("train.embed_dim".into(), self.train.embed_dim.to_string()),
            ("train.hidden_dim".into(), self.train.hidden_dim.to_string()),
            ("train.normalize".into(), self.train.normalize.to_string()),
            ("train.standardize".into(), self.train.standardize.to_string()),
            (
                "train.triplet_variant".into(),
                match self.train.triplet_variant {
                    TripletVariant::Literal => "literal".into(),
                    TripletVariant::LogSoftmax => "logsoftmax".into(),
                },
            ),
            (
                "train.mining".into(),
                match self.train.mining {
                    Mining::Hardest => "hardest".into(),
                    Mining::Uniform => "uniform".into(),
                },
            ),
            (
                "eval.camera_filter".into(),
                self.eval.camera_filter.to_string(),
            ),
            (
                "eval.queries_per_identity".into(),
                self.eval.queries_per_identity.to_string(),
            ),
            ("aug.flips".into(), self.aug.flips.to_string()),
            ("aug.jitter".into(), self.aug.jitter.to_string()),
            ("ablate.param".into(), self.ablate.param.clone()),
            ("ablate.values".into(), self.ablate.values.clone()),
        ];
        entries.sort();
        let mut out = String::new();
        for (k, v) in entries {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }

    pub fn ablate_values(&self) -> Result<Vec<f64>> {
        let values: Result<Vec<f64>> = self
            .ablate
            .values
            .split(',')
            .map(|s| parse_f64("ablate.values", s.trim()))
            .collect();
        let values = values?;
        if values.is_empty() {
            return Err(Error::Config("ablate.values is empty".into()));
        }
        Ok(values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_is_hard_error() {
        let mut cfg = RunConfig::default();
        let err = cfg.set("train.leraning_rate", "0.1").unwrap_err();
        match err {
            Error::Config(msg) => assert!(msg.contains("train.leraning_rate")),
            other => panic!("expected Config error, got {:?}", other),
        }
    }

    #[test]
    fn file_and_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(
            &path,
            "# comment\n[train]\nlr = 0.01\ngamma = 0.7\n\n[pt]\nk = 5\nmode = sia\n",
        )
        .unwrap();
        let cfg = RunConfig::load(
            Some(&path),
            &["train.gamma=0.9".into(), "data.dir=elsewhere".into()],
        )
        .unwrap();
        assert_eq!(cfg.train.lr, 0.01);
        assert_eq!(cfg.train.gamma, 0.9); // override wins
        assert_eq!(cfg.pt.k, 5);
        assert_eq!(cfg.pt.mode, PtMode::Sia);
        assert_eq!(cfg.data.dir, "elsewhere");
    }

    #[test]
    fn file_errors_name_the_offender() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.cfg");
        std::fs::write(&path, "[train]\nnope = 3\n").unwrap();
        let err = RunConfig::load(Some(&path), &[]).unwrap_err();
        match err {
            Error::Config(msg) => {
                assert!(msg.contains("nope"));
                assert!(msg.contains("bad.cfg"));
            }
            other => panic!("expected Config error, got {:?}", other),
        }

        std::fs::write(&path, "lr = 3\n").unwrap();
        assert!(matches!(
            RunConfig::load(Some(&path), &[]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn resolved_text_is_sorted_and_stable() {
        let cfg = RunConfig::default();
        let a = cfg.resolved_text();
        let b = cfg.resolved_text();
        assert_eq!(a, b);
        let keys: Vec<&str> = a.lines().map(|l| l.split(" = ").next().unwrap()).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(a.contains("train.lr = 0.00035"));
    }

    #[test]
    fn ablate_value_list() {
        let mut cfg = RunConfig::default();
        cfg.set("ablate.values", "0.1, 0.5 ,1.0").unwrap();
        assert_eq!(cfg.ablate_values().unwrap(), vec![0.1, 0.5, 1.0]);
        cfg.set("ablate.values", "0.1,oops").unwrap();
        assert!(cfg.ablate_values().is_err());
        assert!(cfg.set("ablate.param", "tau").is_err());
    }

    #[test]
    fn bad_values_name_key() {
        let mut cfg = RunConfig::default();
        for (k, v) in [
            ("train.lr", "fast"),
            ("train.batch_p", "-1"),
            ("synth.figures", "yes"),
            ("pt.mode", "warp"),
            ("train.mining", "softest"),
        ] {
            let err = cfg.set(k, v).unwrap_err();
            match err {
                Error::Config(msg) => assert!(msg.contains(k), "{} missing from '{}'", k, msg),
                other => panic!("expected Config error, got {:?}", other),
            }
        }
    }
}
