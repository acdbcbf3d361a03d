//! `sta` — run the token-pruning pipeline, cost model, and diagnostics
//! from the command line. See `sta <subcommand> --help` for flags.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sta_core::bench::{
    export_masks, gen_synthetic_video, read_tensor, write_tensor, write_tokens32,
    DataSource, ExperimentConfig, SyntheticSpec,
};
use sta_core::diagnostics::{flops_model, gradnorm_fd};
use sta_core::stapune::{
    make_order_plan, prune_clip, FirstFrameMethod, OrderPattern, ScheduleKind, SimilarityHead,
    StaConfig,
};
use sta_core::vitcore::{forward, init_weights, ModelConfig, Pruning, TokenTensor, Video};
use sta_core::{Error, Result};

#[derive(Parser)]
#[command(name = "sta", version, about = "Token pruning lab for video transformers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run STA pruning over a video (rank-4 STTN) or token tensor (rank-3).
    Prune(PruneArgs),
    /// Print the analytic FLOPs table for a model and pruning plan.
    Flops(FlopsArgs),
    /// Full experiment: pruned vs unpruned vs random-pruned, with a JSON report.
    Bench(BenchArgs),
    /// Export per-stage PGM masks and kept-index JSON.
    Masks(MasksArgs),
    /// Finite-difference gradient-norm heatmap.
    Gradnorm(GradnormArgs),
}

/// Model selector: a preset name (`micro`, `toy`, `vit-s`, `vit-b`, `vit-l`,
/// `vit-h`) or ten comma-separated dims
/// `T,H,W,tube_t,tube_h,tube_w,depth,dim,heads,classes`.
#[derive(Clone)]
struct ModelArg(ModelConfig);

impl FromStr for ModelArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if let Some(cfg) = ModelConfig::preset(s) {
            return Ok(ModelArg(cfg));
        }
        let parts: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format!("unknown preset or malformed dims: {s}"))?;
        if parts.len() != 10 {
            return Err(format!(
                "expected 10 comma-separated dims (T,H,W,tube_t,tube_h,tube_w,depth,dim,heads,classes), got {}",
                parts.len()
            ));
        }
        let cfg = ModelConfig {
            frames: parts[0],
            height: parts[1],
            width: parts[2],
            tube_t: parts[3],
            tube_h: parts[4],
            tube_w: parts[5],
            depth: parts[6],
            dim: parts[7],
            heads: parts[8],
            classes: parts[9],
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(ModelArg(cfg))
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Decreasing,
    Constant,
    Increasing,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Fbf,
    Bfb,
    Fff,
    Bbb,
}

#[derive(Clone, Copy, ValueEnum)]
enum FirstFrameArg {
    Random,
    Grid,
    Bipartite,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimHeadArg {
    Q,
    K,
    V,
    Ffn,
}

#[derive(Args)]
struct StaArgs {
    /// Tokens dropped per frame at the first stage.
    #[arg(long, default_value_t = 16)]
    r1: usize,

    #[arg(long, value_enum, default_value_t = ScheduleArg::Decreasing)]
    schedule: ScheduleArg,

    /// Accumulation order across the three stages.
    #[arg(long, value_enum, default_value_t = OrderArg::Fbf)]
    order: OrderArg,

    #[arg(long = "first-frame", value_enum, default_value_t = FirstFrameArg::Bipartite)]
    first_frame: FirstFrameArg,

    #[arg(long = "sim-head", value_enum, default_value_t = SimHeadArg::K)]
    sim_head: SimHeadArg,

    /// Scale affinity logits by 1/sqrt(d') before the softmax.
    #[arg(long = "scaled-softmax", default_value_t = false)]
    scaled_softmax: bool,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl StaArgs {
    fn config(&self, depth: usize) -> StaConfig {
        let mut cfg = StaConfig::for_depth(self.r1, depth);
        cfg.schedule_kind = match self.schedule {
            ScheduleArg::Decreasing => ScheduleKind::Decreasing,
            ScheduleArg::Constant => ScheduleKind::Constant,
            ScheduleArg::Increasing => ScheduleKind::Increasing,
        };
        let pattern = match self.order {
            OrderArg::Fbf => OrderPattern::AlternatingFbf,
            OrderArg::Bfb => OrderPattern::AlternatingBfb,
            OrderArg::Fff => OrderPattern::AllForward,
            OrderArg::Bbb => OrderPattern::AllBackward,
        };
        cfg.order_pattern = make_order_plan(cfg.insertion_blocks.len(), pattern);
        cfg.first_frame_method = match self.first_frame {
            FirstFrameArg::Random => FirstFrameMethod::Random,
            FirstFrameArg::Grid => FirstFrameMethod::Grid,
            FirstFrameArg::Bipartite => FirstFrameMethod::Bipartite,
        };
        cfg.similarity_head = match self.sim_head {
            SimHeadArg::Q => SimilarityHead::Q,
            SimHeadArg::K => SimilarityHead::K,
            SimHeadArg::V => SimilarityHead::V,
            SimHeadArg::Ffn => SimilarityHead::Ffn,
        };
        cfg.scaled_softmax = self.scaled_softmax;
        cfg.seed = self.seed;
        cfg
    }
}

#[derive(Args)]
struct PruneArgs {
    #[arg(long, default_value = "toy")]
    model: ModelArg,

    #[command(flatten)]
    sta: StaArgs,

    /// STTN input; synthesized from the seed when omitted.
    #[arg(long)]
    input: Option<PathBuf>,

    /// Write the pruned final token tensor here (STTN).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Also export PGM/JSON masks into this directory.
    #[arg(long)]
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long, default_value = "vit-b")]
    model: ModelArg,

    #[arg(long, default_value_t = 64)]
    r1: usize,

    #[arg(long, value_enum, default_value_t = ScheduleArg::Decreasing)]
    schedule: ScheduleArg,

    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "toy")]
    model: ModelArg,

    #[command(flatten)]
    sta: StaArgs,

    /// Video tensor to reuse across repeats; synthetic when omitted.
    #[arg(long)]
    input: Option<PathBuf>,

    #[arg(long, default_value_t = 3)]
    repeats: usize,

    /// Report JSON path.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long)]
    masks: Option<PathBuf>,
}

#[derive(Args)]
struct MasksArgs {
    #[arg(long, default_value = "toy")]
    model: ModelArg,

    #[command(flatten)]
    sta: StaArgs,

    #[arg(long)]
    input: Option<PathBuf>,

    /// Output directory for stage/frame PGMs and masks.json.
    #[arg(long)]
    masks: PathBuf,
}

#[derive(Args)]
struct GradnormArgs {
    /// Cost grows as depth^2 * tokens * channels; keep this small.
    #[arg(long, default_value = "micro")]
    model: ModelArg,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long)]
    input: Option<PathBuf>,

    /// Class index whose cross-entropy loss is probed.
    #[arg(long, default_value_t = 0)]
    label: usize,

    /// Central-difference step.
    #[arg(long, default_value_t = 1e-3)]
    step: f32,

    /// Write the n_t x n_s heatmap as a rank-2 STTN tensor.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_video(cfg: &ModelConfig, seed: u64) -> Result<Video<f32>> {
    let spec = SyntheticSpec::high_redundancy(cfg.frames, cfg.height, cfg.width);
    gen_synthetic_video(&spec, seed)
}

fn load_video(path: &Path, cfg: &ModelConfig) -> Result<Video<f32>> {
    let (dims, data) = read_tensor(path)?;
    if dims.len() != 4 || dims[3] != 3 {
        return Err(Error::Shape(format!(
            "expected a rank-4 TxHxWx3 tensor, got dims {dims:?}"
        )));
    }
    let video = Video::new(dims[0] as usize, dims[1] as usize, dims[2] as usize, data)?;
    if video.frames != cfg.frames || video.height != cfg.height || video.width != cfg.width {
        return Err(Error::Shape(format!(
            "tensor {}x{}x{} does not match model input {}x{}x{}",
            video.frames, video.height, video.width, cfg.frames, cfg.height, cfg.width
        )));
    }
    Ok(video)
}

fn cmd_prune(args: PruneArgs) -> Result<()> {
    let cfg = args.model.0;
    let sta = args.sta.config(cfg.depth);

    // A rank-3 input is treated as pre-embedded tokens: run the pruning
    // stages directly with the tokens as their own similarity features.
    if let Some(path) = &args.input {
        let (dims, data) = read_tensor(path)?;
        if dims.len() == 3 {
            let mut tokens = TokenTensor::new(
                dims[0] as usize,
                dims[1] as usize,
                dims[2] as usize,
                data,
            )?;
            sta.validate(tokens.n_s(), cfg.depth)?;
            let drops = sta.drops();
            println!("pruning token tensor {}x{}x{}", tokens.n_t(), tokens.n_s(), tokens.d());
            for (stage, (&r, &order)) in drops.iter().zip(&sta.order_pattern).enumerate() {
                let feats = tokens.clone();
                let (next, trace) = prune_clip(&tokens, r, &sta, order, &feats, stage)?;
                println!(
                    "stage {stage}: dropped {r}/frame, {} tokens left per frame, {} affinity dot products",
                    trace.kept_per_frame(),
                    trace.dot_products
                );
                tokens = next;
            }
            if let Some(out) = &args.out {
                write_tokens32(out, &tokens)?;
                println!("wrote {}", out.display());
            }
            return Ok(());
        }
    }

    let video = match &args.input {
        Some(path) => load_video(path, &cfg)?,
        None => default_video(&cfg, sta.seed)?,
    };
    let weights = init_weights::<f32>(&cfg, sta.seed)?;
    let out = forward(&video, &cfg, &weights, &Pruning::Sta(sta))?;
    println!("tokens per block: {:?}", out.trace.per_block_tokens);
    for stage in &out.trace.stages {
        println!(
            "stage {}: {} -> {} tokens per frame ({} affinity dot products)",
            stage.stage,
            stage.n_s_before,
            stage.kept_per_frame(),
            stage.dot_products
        );
    }
    if let Some(dir) = &args.masks {
        let cols = cfg.width / cfg.tube_w;
        let files = export_masks(&out.trace, (cfg.n_s() / cols, cols), dir)?;
        println!("wrote {} mask files to {}", files.len(), dir.display());
    }
    if let Some(path) = &args.out {
        write_tokens32(path, &out.final_tokens)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_flops(args: FlopsArgs) -> Result<()> {
    let cfg = args.model.0;
    let report = if args.r1 == 0 {
        flops_model(&cfg, None)?
    } else {
        let mut sta = StaConfig::for_depth(args.r1, cfg.depth);
        sta.schedule_kind = match args.schedule {
            ScheduleArg::Decreasing => ScheduleKind::Decreasing,
            ScheduleArg::Constant => ScheduleKind::Constant,
            ScheduleArg::Increasing => ScheduleKind::Increasing,
        };
        flops_model(&cfg, Some(&sta))?
    };
    println!("{:>6} {:>8} {:>14}", "block", "tokens", "MACs");
    for b in &report.per_block {
        println!("{:>6} {:>8} {:>14}", b.block, b.tokens, b.macs);
    }
    println!("embed MACs: {}", report.embed_macs);
    println!("head  MACs: {}", report.head_macs);
    println!(
        "total: {:.1} GFLOPs (baseline {:.1}, reduction {:.1}%)",
        report.total_gflops(),
        report.baseline_total_macs as f64 / 1e9,
        report.reduction_fraction * 100.0
    );
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| Error::Numeric(format!("flops json: {e}")))?;
        sta_core::bench::atomic_write(path, json.as_bytes())?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let model = args.model.0;
    let sta = args.sta.config(model.depth);
    let data = match &args.input {
        Some(path) => DataSource::TensorPath(path.clone()),
        None => DataSource::Synthetic(SyntheticSpec::high_redundancy(
            model.frames,
            model.height,
            model.width,
        )),
    };
    let cfg = ExperimentConfig {
        seed: sta.seed,
        model,
        sta,
        data,
        repeats: args.repeats,
        report_path: args.out.clone(),
        mask_dir: args.masks.clone(),
    };
    run_and_summarize(&cfg)?;
    if let Some(path) = &args.out {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn run_and_summarize(cfg: &ExperimentConfig) -> Result<sta_core::bench::Report> {
    let report = sta_core::bench::run_experiment(cfg)?;
    let agg = &report.deterministic.aggregate;
    println!("runs: {}", report.deterministic.runs.len());
    println!(
        "logits drift (Linf): {:.6} +- {:.6}",
        agg.logits_drift.mean, agg.logits_drift.std
    );
    println!(
        "trajectory sums: unpruned {:.4} | random {:.4} | sta {:.4}",
        agg.trajectory_unpruned.mean, agg.trajectory_random.mean, agg.trajectory_sta.mean
    );
    println!(
        "top-decile retention: {:.3} +- {:.3}",
        agg.retention.mean, agg.retention.std
    );
    println!(
        "flops: {:.2} GFLOPs, reduction {:.1}%",
        report.deterministic.flops.total_gflops(),
        report.deterministic.flops.reduction_fraction * 100.0
    );
    println!("wall clock: {:.2}s", report.timing.wall_clock_seconds);
    Ok(report)
}

fn cmd_masks(args: MasksArgs) -> Result<()> {
    let cfg = args.model.0;
    let sta = args.sta.config(cfg.depth);
    let video = match &args.input {
        Some(path) => load_video(path, &cfg)?,
        None => default_video(&cfg, sta.seed)?,
    };
    let weights = init_weights::<f32>(&cfg, sta.seed)?;
    let out = forward(&video, &cfg, &weights, &Pruning::Sta(sta))?;
    let cols = cfg.width / cfg.tube_w;
    let files = export_masks(&out.trace, (cfg.n_s() / cols, cols), &args.masks)?;
    println!("wrote {} files to {}", files.len(), args.masks.display());
    Ok(())
}

fn cmd_gradnorm(args: GradnormArgs) -> Result<()> {
    let cfg = args.model.0;
    if args.label >= cfg.classes {
        return Err(Error::Config(format!(
            "label {} out of range for {} classes",
            args.label, cfg.classes
        )));
    }
    let video = match &args.input {
        Some(path) => load_video(path, &cfg)?,
        None => default_video(&cfg, args.seed)?,
    };
    let weights = init_weights::<f32>(&cfg, args.seed)?;
    let heat = gradnorm_fd(&video, &cfg, &weights, args.label, args.step)?;
    let max = heat.values.iter().cloned().fold(0f32, f32::max);
    let mean = heat.values.iter().sum::<f32>() / heat.values.len() as f32;
    println!(
        "gradnorm heatmap {}x{} (step {}): mean {:.6}, max {:.6}",
        heat.n_t, heat.n_s, heat.step, mean, max
    );
    if let Some(path) = &args.out {
        write_tensor(path, &[heat.n_t as u32, heat.n_s as u32], &heat.values)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Prune(args) => cmd_prune(args),
        Command::Flops(args) => cmd_flops(args),
        Command::Bench(args) => cmd_bench(args),
        Command::Masks(args) => cmd_masks(args),
        Command::Gradnorm(args) => cmd_gradnorm(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
