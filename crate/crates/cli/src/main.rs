use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aerodet_core::anchors::{kmeans_anchors, mean_best_iou, parse_anchor_pairs, prune_largest};
use aerodet_core::dataset::{
    compute_stats, format_detection, load_annotations, load_detections, split, RatioMode, SplitConfig,
};
use aerodet_core::decoder::{decode, nms, read_tensor_file, AnchorBox};
use aerodet_core::eval::{evaluate, ApMode, EvalConfig};
use aerodet_core::netcfg::{parse_cfg, propagate_shapes, validate_net, LayerSpec, NetConfig, Severity};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

/// Shape analysis, anchor estimation, decoding and evaluation for
/// YOLOv2-style aerial vehicle detectors.
#[derive(Debug, Parser)]
#[command(name = "aerodet", version)]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, env = "AERODET_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the per-layer output shapes of a darknet cfg and lint it.
    AnalyzeCfg(AnalyzeCfgArgs),
    /// Estimate anchor boxes from annotations with IoU k-means.
    Anchors(AnchorsArgs),
    /// Dataset statistics: mean box size, area ratio, overlap percentage.
    Stats(StatsArgs),
    /// Sequence-aware train/validation/test split.
    Split(SplitArgs),
    /// Decode a head tensor file into detection lines.
    Decode(DecodeArgs),
    /// Score detections against ground truth.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct AnalyzeCfgArgs {
    cfg: PathBuf,
    /// Override the input width.
    #[arg(long)]
    width: Option<usize>,
    /// Override the input height.
    #[arg(long)]
    height: Option<usize>,
}

#[derive(Debug, Args)]
struct AnchorsArgs {
    /// Annotation file.
    annotations: PathBuf,
    /// Number of clusters.
    #[arg(long, default_value_t = aerodet_core::anchors::DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = aerodet_core::anchors::DEFAULT_MAX_ITERS)]
    max_iters: usize,
    /// Drop this many of the largest anchors after clustering.
    #[arg(long, default_value_t = 0)]
    prune_largest: usize,
    /// Grid columns used to express anchors in cell units.
    #[arg(long, default_value_t = 13)]
    grid_w: usize,
    /// Grid rows used to express anchors in cell units.
    #[arg(long, default_value_t = 13)]
    grid_h: usize,
}

#[derive(Debug, Args)]
struct StatsArgs {
    annotations: PathBuf,
    /// mean-of-ratios or ratio-of-means.
    #[arg(long, default_value_t = RatioMode::MeanOfRatios)]
    ratio_mode: RatioMode,
}

#[derive(Debug, Args)]
struct SplitArgs {
    annotations: PathBuf,
    #[arg(long, default_value_t = 0.6)]
    train: f64,
    #[arg(long, default_value_t = 0.2)]
    val: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    /// Tensor file (YTN1).
    tensor: PathBuf,
    /// Image id written on each line (default: tensor file stem).
    #[arg(long)]
    image_id: Option<String>,
    #[arg(long)]
    image_width: f64,
    #[arg(long)]
    image_height: f64,
    /// Anchors as `w,h, w,h, ...` in grid cells.
    #[arg(long, conflicts_with = "cfg", required_unless_present = "cfg")]
    anchors: Option<String>,
    /// Take anchors from the region section of this cfg.
    #[arg(long)]
    cfg: Option<PathBuf>,
    #[arg(long, default_value_t = aerodet_core::decoder::DEFAULT_CONF_THRESHOLD)]
    conf: f64,
    /// NMS overlap threshold.
    #[arg(long, default_value_t = aerodet_core::decoder::DEFAULT_NMS_THRESHOLD)]
    nms: f64,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    /// Ground-truth annotation file.
    truths: PathBuf,
    /// Detection file.
    detections: PathBuf,
    #[arg(long, default_value_t = aerodet_core::eval::DEFAULT_IOU_THRESHOLD)]
    iou: f64,
    #[arg(long, default_value_t = aerodet_core::decoder::DEFAULT_CONF_THRESHOLD)]
    conf: f64,
    /// Also report small/medium/large strata.
    #[arg(long)]
    size_strata: bool,
    /// per-image or voc.
    #[arg(long, default_value_t = ApMode::PerImage)]
    ap_mode: ApMode,
}

fn main() -> ExitCode {
    // Die quietly on a closed pipe (`aerodet split ... | head`) instead of panicking in println!.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match cli.command {
        Command::AnalyzeCfg(a) => analyze_cfg(a),
        Command::Anchors(a) => anchors(a),
        Command::Stats(a) => stats(a),
        Command::Split(a) => split_cmd(a),
        Command::Decode(a) => decode_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn load_cfg(path: &Path) -> Result<NetConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = parse_cfg(&text).with_context(|| format!("parsing {}", path.display()))?;
    for w in &parsed.warnings {
        eprintln!("warning: {w}");
    }
    Ok(parsed.net)
}

fn layer_columns(layer: &LayerSpec) -> (String, String) {
    match layer {
        LayerSpec::Convolutional {
            filters,
            kernel,
            stride,
        } => (filters.to_string(), format!("{kernel} x {kernel} / {stride}")),
        LayerSpec::Maxpool { kernel, stride } => (String::new(), format!("{kernel} x {kernel} / {stride}")),
        LayerSpec::Route { sources } => (
            String::new(),
            sources
                .iter()
                .map(|s| s.to_string())
                .collect::<Vec<_>>()
                .join(","),
        ),
        LayerSpec::Reorg { stride } => (String::new(), format!("/ {stride}")),
        _ => (String::new(), String::new()),
    }
}

fn analyze_cfg(args: AnalyzeCfgArgs) -> Result<()> {
    let mut net = load_cfg(&args.cfg)?;
    let width = args.width.unwrap_or(net.input_shape.width);
    let height = args.height.unwrap_or(net.input_shape.height);
    net = net.with_input_size(width, height);

    let diags = validate_net(&net);
    match propagate_shapes(&net) {
        Ok(shapes) => {
            println!(
                "{:>3}  {:<13}  {:>7}  {:<10}  output",
                "#", "layer", "filters", "size"
            );
            for (i, (layer, shape)) in net.layers.iter().zip(&shapes).enumerate() {
                let (filters, size) = layer_columns(layer);
                println!(
                    "{i:>3}  {:<13}  {filters:>7}  {size:<10}  {shape}",
                    layer.kind_name()
                );
            }
            println!();
        }
        Err(e) => println!("shape propagation failed: {e}\n"),
    }
    for d in &diags {
        println!("{d}");
    }
    let errors = diags.iter().filter(|d| d.severity == Severity::Error).count();
    if errors > 0 {
        bail!("{errors} error diagnostic(s)");
    }
    Ok(())
}

fn anchors(args: AnchorsArgs) -> Result<()> {
    if args.grid_w == 0 || args.grid_h == 0 {
        bail!("grid dimensions must be positive");
    }
    let ann = load_annotations::<f64>(&args.annotations)?;
    for w in &ann.warnings {
        eprintln!("warning: {w}");
    }
    let (gw, gh) = (args.grid_w as f64, args.grid_h as f64);
    let boxes: Vec<AnchorBox<f64>> = ann
        .records
        .iter()
        .flat_map(|r| {
            r.boxes
                .iter()
                .map(move |b| AnchorBox::new(b.w / r.width * gw, b.h / r.height * gh))
        })
        .collect::<aerodet_core::Result<_>>()?;

    let outcome = kmeans_anchors(&boxes, args.k, args.seed, args.max_iters)?;
    let kept = if args.prune_largest > 0 {
        prune_largest(&outcome.anchors, args.prune_largest)?
    } else {
        outcome.anchors.clone()
    };
    for a in &kept {
        println!("{:.6},{:.6}", a.w, a.h);
    }
    let pairs: Vec<String> = kept.iter().map(|a| format!("{:.4},{:.4}", a.w, a.h)).collect();
    println!("anchors={}", pairs.join(", "));
    println!("mean_best_iou={:.6}", mean_best_iou(&boxes, &kept)?);
    println!("iterations={}", outcome.iterations);
    println!("converged={}", outcome.converged);
    Ok(())
}

fn stats(args: StatsArgs) -> Result<()> {
    let ann = load_annotations::<f64>(&args.annotations)?;
    for w in &ann.warnings {
        eprintln!("warning: {w}");
    }
    let s = compute_stats(&ann.records, args.ratio_mode)?;
    println!("images={}", s.num_images);
    println!("boxes={}", s.num_boxes);
    println!("mean_box_w={:.4}", s.mean_box_w);
    println!("mean_box_h={:.4}", s.mean_box_h);
    println!("ratio_mode={}", args.ratio_mode);
    println!("area_ratio={:.8}", s.area_ratio);
    println!("pct_overlapping={:.4}", s.pct_overlapping);
    println!("clamped_boxes={}", ann.clamped_boxes());
    Ok(())
}

fn split_cmd(args: SplitArgs) -> Result<()> {
    let ann = load_annotations::<f64>(&args.annotations)?;
    for w in &ann.warnings {
        eprintln!("warning: {w}");
    }
    let config = SplitConfig {
        train_frac: args.train,
        val_frac: args.val,
        seed: args.seed,
    };
    let s = split(&ann.records, config)?;
    let (ti, vi, si) = s.image_counts(&ann.records);
    println!("{:<9}  {:>9}  {:>6}", "partition", "sequences", "images");
    for (name, seqs, images) in [
        ("train", &s.train, ti),
        ("val", &s.val, vi),
        ("test", &s.test, si),
    ] {
        println!("{name:<9}  {:>9}  {images:>6}", seqs.len());
    }
    println!();
    for (name, seqs) in [("train", &s.train), ("val", &s.val), ("test", &s.test)] {
        println!("{name}: {}", seqs.join(" "));
    }
    Ok(())
}

fn decode_cmd(args: DecodeArgs) -> Result<()> {
    let started = Instant::now();
    let tensor =
        read_tensor_file(&args.tensor).with_context(|| format!("reading {}", args.tensor.display()))?;
    let anchors: Vec<AnchorBox<f64>> = match (&args.anchors, &args.cfg) {
        (Some(text), _) => parse_anchor_pairs(text)?,
        (None, Some(path)) => {
            let net = load_cfg(path)?;
            let Some((params, pairs)) = net.region() else {
                bail!("{} has no region section", path.display());
            };
            if params.classes != tensor.classes() {
                bail!(
                    "cfg declares {} classes but the tensor carries {}",
                    params.classes,
                    tensor.classes()
                );
            }
            pairs
                .iter()
                .map(|&(w, h)| AnchorBox::new(w, h))
                .collect::<aerodet_core::Result<_>>()?
        }
        (None, None) => bail!("either --anchors or --cfg is required"),
    };
    let image_id = match args.image_id {
        Some(id) => id,
        None => args
            .tensor
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .context("cannot derive an image id from the tensor path")?,
    };
    if image_id.is_empty() || image_id.contains(char::is_whitespace) {
        bail!("image id `{image_id}` must be non-empty and contain no whitespace");
    }

    let boxes = decode(
        &tensor.cast::<f64>(),
        &anchors,
        args.image_width,
        args.image_height,
        args.conf,
    )?;
    let kept = nms(&boxes, args.nms)?;
    for b in &kept {
        println!("{}", format_detection(&image_id, b));
    }
    let secs = started.elapsed().as_secs_f64();
    eprintln!(
        "decode throughput (this tool, not network inference): {} predictions in {:.3} ms",
        tensor.grid_w() * tensor.grid_h() * tensor.num_anchors(),
        secs * 1e3
    );
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let started = Instant::now();
    let ann = load_annotations::<f64>(&args.truths)?;
    for w in &ann.warnings {
        eprintln!("warning: {w}");
    }
    let dets = load_detections::<f64>(&args.detections)?;
    let config = EvalConfig {
        iou_threshold: args.iou,
        conf_threshold: args.conf,
        ap_mode: args.ap_mode,
        size_strata: args.size_strata,
    };
    let report = evaluate(&dets, &ann.records, &config)?;
    print!("{}", report.to_table());
    println!();
    print!("{}", report.to_key_value());
    if !report.unknown_images.is_empty() {
        eprintln!(
            "warning: detections for images without truth ignored: {}",
            report.unknown_images.join(" ")
        );
    }
    eprintln!(
        "evaluate throughput (this tool): {} images in {:.3} ms",
        report.per_image.len(),
        started.elapsed().as_secs_f64() * 1e3
    );
    Ok(())
}
