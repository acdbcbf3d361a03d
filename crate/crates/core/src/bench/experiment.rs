use std::path::PathBuf;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{flops_model, retention_stats, trajectory_sum};
use crate::error::Result;
use crate::scalar::Scalar;
use crate::stapune::StaConfig;
use crate::vitcore::{forward, init_weights, ForwardOutput, ModelConfig, Pruning, Video};

use super::io::read_video32;
use super::masks::export_masks;
use super::report::{
    Aggregate, Deterministic, MeanStd, Report, RunRecord, Timing, TrajectoryTriple,
    REPORT_SCHEMA_VERSION,
};
use super::synthetic::{gen_synthetic_video, SyntheticSpec};

/// Where the clip comes from — exactly one source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic(SyntheticSpec),
    /// STTN file holding a TxHxWx3 video tensor; identical across repeats.
    TensorPath(PathBuf),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub sta: StaConfig,
    pub data: DataSource,
    pub repeats: usize,
    pub seed: u64,
    pub report_path: Option<PathBuf>,
    pub mask_dir: Option<PathBuf>,
}

/// Run the pruned / unpruned / random-pruned pipelines over `repeats` seeds
/// and aggregate drift, trajectory-sum, retention, and cost numbers.
///
/// Repeat `i` derives its weight/pruning seed as `seed + i`; synthetic data
/// is regenerated per repeat from the same derived seed, while a tensor file
/// is shared across repeats. The deterministic part of the report is
/// byte-for-byte reproducible for a fixed config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Report> {
    let started = Instant::now();
    cfg.model.validate()?;
    cfg.sta.validate(cfg.model.n_s(), cfg.model.depth)?;
    let repeats = cfg.repeats.max(1);

    let loaded: Option<Video<f32>> = match &cfg.data {
        DataSource::TensorPath(path) => Some(read_video32(path)?),
        DataSource::Synthetic(_) => None,
    };

    let mut runs = Vec::with_capacity(repeats);
    let mut masks_written = false;
    for i in 0..repeats {
        let run_seed = cfg.seed + i as u64;
        let video: Video<f32> = match &cfg.data {
            DataSource::Synthetic(spec) => gen_synthetic_video(spec, run_seed)?,
            DataSource::TensorPath(_) => loaded.clone().expect("loaded above"),
        };
        let weights = init_weights::<f32>(&cfg.model, run_seed)?;
        let sta = StaConfig {
            seed: run_seed,
            ..cfg.sta.clone()
        };

        let plain = forward(&video, &cfg.model, &weights, &Pruning::Disabled)?;
        let pruned = forward(&video, &cfg.model, &weights, &Pruning::Sta(sta.clone()))?;
        let random = forward(&video, &cfg.model, &weights, &Pruning::Random(sta))?;

        if let (Some(dir), false) = (&cfg.mask_dir, masks_written) {
            let n_s = cfg.model.n_s();
            let cols = cfg.model.width / cfg.model.tube_w;
            export_masks(&pruned.trace, (n_s / cols, cols), dir)?;
            masks_written = true;
        }

        runs.push(run_record(run_seed, &plain, &pruned, &random)?);
    }

    let flops = flops_model(&cfg.model, Some(&cfg.sta))?;
    let collect = |f: fn(&RunRecord) -> f64| -> Vec<f64> { runs.iter().map(f).collect() };
    let aggregate = Aggregate {
        logits_drift: MeanStd::of(&collect(|r| r.logits_drift)),
        trajectory_unpruned: MeanStd::of(&collect(|r| r.trajectory.unpruned)),
        trajectory_random: MeanStd::of(&collect(|r| r.trajectory.random)),
        trajectory_sta: MeanStd::of(&collect(|r| r.trajectory.sta)),
        retention: MeanStd::of(&collect(|r| r.retention)),
    };

    let report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        deterministic: Deterministic {
            runs,
            aggregate,
            flops,
        },
        timing: Timing {
            wall_clock_seconds: started.elapsed().as_secs_f64(),
        },
    };
    if let Some(path) = &cfg.report_path {
        super::report::write_report(path, &report)?;
    }
    Ok(report)
}

fn run_record(
    seed: u64,
    plain: &ForwardOutput<f32>,
    pruned: &ForwardOutput<f32>,
    random: &ForwardOutput<f32>,
) -> Result<RunRecord> {
    let drift = plain
        .logits
        .iter()
        .zip(&pruned.logits)
        .map(|(a, b)| (a - b).abs() as f64)
        .fold(0.0, f64::max);
    let trajectory = TrajectoryTriple {
        unpruned: trajectory_sum(&plain.final_tokens)?.widen(),
        random: trajectory_sum(&random.final_tokens)?.widen(),
        sta: trajectory_sum(&pruned.final_tokens)?.widen(),
    };
    let mut retention_acc = 0.0;
    for stage in &pruned.trace.stages {
        retention_acc += retention_stats(stage, &stage.semantic_scores).top_decile_retention;
    }
    let retention = retention_acc / pruned.trace.stages.len().max(1) as f64;
    Ok(RunRecord {
        seed,
        logits_drift: drift,
        per_block_tokens: pruned.trace.per_block_tokens.clone(),
        trajectory,
        retention,
    })
}
