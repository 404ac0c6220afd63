use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use facells_core::facells::{compose_facell, score_drawings, AttributeScores, FaCellSpec, Polarity};
use facells_core::model::gradcheck::{gradient_check, FD_STEP};
use facells_core::model::{Checkpoint, EncodingInfo};
use facells_core::order::{plan_tour, apply_tour, ReorderOptions};
use facells_core::sketch::io::{read_drawings, write_drawings, write_jsonl};
use facells_core::sketch::{encode as encode_drawing, CoordMode, Drawing, EncodedSequence, Format};
use facells_core::train::{
    compare_matrix, encode_dataset, evaluate, load_attributes, ordering_for, run_stage_with, toy, write_attributes,
    ExperimentPlan, MetricsRow,
};
use facells_core::vectorize::{vectorize as trace_image, RasterImage, VectorizeConfig};
use facells_core::{Model, ModelConfig, OrderMethod, SequenceBatch};

use crate::{Global, Status, UsageError};

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(())
}

#[derive(Args)]
pub struct VectorizeArgs {
    /// Directory of binary (P5) or ASCII (P2) PGM files.
    #[arg(long)]
    input: PathBuf,
    /// Drawings JSONL.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = VectorizeConfig::default().blur_sigma)]
    sigma: f64,
    #[arg(long, default_value_t = VectorizeConfig::default().canny_low)]
    low: f64,
    #[arg(long, default_value_t = VectorizeConfig::default().canny_high)]
    high: f64,
    #[arg(long, default_value_t = VectorizeConfig::default().min_stroke_points)]
    min_points: usize,
    #[arg(long, default_value_t = VectorizeConfig::default().simplify_epsilon)]
    epsilon: f64,
}

pub fn vectorize(g: &Global, a: VectorizeArgs) -> Result<Status> {
    let cfg = VectorizeConfig {
        blur_sigma: a.sigma,
        canny_low: a.low,
        canny_high: a.high,
        min_stroke_points: a.min_points,
        simplify_epsilon: a.epsilon,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut files: Vec<PathBuf> = fs::read_dir(&a.input)
        .with_context(|| format!("reading {}", a.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    let drawings: Vec<Drawing> = files
        .par_iter()
        .map(|p| {
            let id = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let img = RasterImage::read_pgm(p)?;
            trace_image(&img, &cfg, &id)
        })
        .collect::<facells_core::Result<_>>()?;
    if g.verbose > 0 {
        for d in &drawings {
            eprintln!("{}: {} strokes", d.id, d.strokes().len());
        }
    }
    create_parent(&a.output)?;
    write_drawings(&a.output, &drawings)?;
    let strokes: usize = drawings.iter().map(|d| d.strokes().len()).sum();
    Ok(Status::default()
        .with("drawings", drawings.len())
        .with("strokes", strokes)
        .with("output", a.output.display()))
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Min,
    Random,
    Identity,
}

#[derive(Args)]
pub struct OrderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "min")]
    method: MethodArg,
    /// Drawings with at most this many strokes are solved exactly (max 10).
    #[arg(long, default_value_t = 10)]
    exact_max: usize,
    /// Per-drawing cost CSV; stdout when omitted.
    #[arg(long)]
    stats: Option<PathBuf>,
}

pub fn order(g: &Global, a: OrderArgs) -> Result<Status> {
    if a.exact_max > 10 {
        return Err(usage("--exact-max is at most 10"));
    }
    let drawings = read_drawings(&a.input)?;
    let method = match a.method {
        MethodArg::Min => OrderMethod::MinLength,
        MethodArg::Random => OrderMethod::Random { seed: g.seed },
        MethodArg::Identity => OrderMethod::Identity,
    };
    let opts = ReorderOptions { exact_max: a.exact_max };
    let results: Vec<(Drawing, f64, f64)> = drawings
        .par_iter()
        .map(|d| {
            let before = facells_core::sketch::pen_up_length(d);
            let tour = plan_tour(d, ordering_for(method, &d.id), g.seed, opts)?;
            let out = apply_tour(d, &tour)?;
            Ok((out, before, tour.pen_up_cost))
        })
        .collect::<facells_core::Result<_>>()?;

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["id", "strokes", "pen_up_before", "pen_up_after"])?;
    for (d, before, after) in &results {
        w.write_record([d.id.clone(), d.strokes().len().to_string(), before.to_string(), after.to_string()])?;
    }
    let csv_bytes = w.into_inner().map_err(|e| e.into_error())?;
    match &a.stats {
        Some(p) => {
            create_parent(p)?;
            fs::write(p, &csv_bytes).with_context(|| format!("writing {}", p.display()))?;
        }
        None => std::io::stdout().write_all(&csv_bytes)?,
    }
    let (before, after) = results.iter().fold((0.0, 0.0), |(b, f), r| (b + r.1, f + r.2));
    let ordered: Vec<Drawing> = results.into_iter().map(|r| r.0).collect();
    create_parent(&a.output)?;
    write_drawings(&a.output, &ordered)?;
    Ok(Status::default()
        .with("drawings", ordered.len())
        .with("pen_up_before", format!("{before:.3}"))
        .with("pen_up_after", format!("{after:.3}"))
        .with("output", a.output.display()))
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Absolute,
    Relative,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Absolute => Format::Absolute,
            FormatArg::Relative => Format::Relative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Normalized,
}

#[derive(Args)]
pub struct EncodeArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSONL of `{id, sequence}` records.
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "absolute")]
    format: FormatArg,
    #[arg(long, value_enum, default_value = "normalized")]
    mode: ModeArg,
}

#[derive(Serialize)]
struct EncodedRecord {
    id: String,
    sequence: EncodedSequence,
}

pub fn encode(_g: &Global, a: EncodeArgs) -> Result<Status> {
    let drawings = read_drawings(&a.input)?;
    let mode = match a.mode {
        ModeArg::Raw => CoordMode::Raw,
        ModeArg::Normalized => CoordMode::Normalized,
    };
    let records: Vec<EncodedRecord> = drawings
        .par_iter()
        .map(|d| EncodedRecord {
            id: d.id.clone(),
            sequence: encode_drawing(d, a.format.into(), mode),
        })
        .collect();
    let steps: usize = records.iter().map(|r| r.sequence.len()).sum();
    create_parent(&a.output)?;
    write_jsonl(&a.output, &records)?;
    Ok(Status::default()
        .with("drawings", records.len())
        .with("steps", steps)
        .with("output", a.output.display()))
}

#[derive(Args)]
pub struct MakeToyArgs {
    /// Number of drawings (at least 2).
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Drawings JSONL (labels included).
    #[arg(long)]
    out: PathBuf,
    /// Attribute table in the CelebA text layout.
    #[arg(long)]
    attrs: PathBuf,
}

pub fn make_toy(g: &Global, a: MakeToyArgs) -> Result<Status> {
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let drawings = toy::make_toy_dataset(a.n, g.seed);
    let table = toy::labels_to_table(&drawings);
    create_parent(&a.out)?;
    create_parent(&a.attrs)?;
    write_drawings(&a.out, &drawings)?;
    write_attributes(&a.attrs, &table)?;
    let positive = drawings.iter().filter(|d| d.target(toy::TOY_ATTRIBUTE) == Some(1.0)).count();
    Ok(Status::default()
        .with("drawings", drawings.len())
        .with("positive", positive)
        .with("output", a.out.display()))
}

#[derive(Args)]
pub struct TrainArgs {
    /// Plan file (`key = value` lines).
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    attrs: PathBuf,
    /// Output directory for metrics.csv, checkpoint.json, eligible_attributes.txt.
    #[arg(long)]
    out: PathBuf,
    /// Continue from this checkpoint instead of a fresh initialisation.
    #[arg(long)]
    init: Option<PathBuf>,
}

fn print_row(r: &MetricsRow, attributes: &[String]) {
    let bacc: Vec<String> = attributes
        .iter()
        .zip(&r.balanced_accuracy)
        .map(|(a, b)| format!("{a}={}", b.map_or("-".into(), |v| format!("{v:.4}"))))
        .collect();
    eprintln!("epoch {:>3} {:<5} loss {:.5} {}", r.epoch, r.split, r.loss, bacc.join(" "));
}

pub fn train(g: &Global, a: TrainArgs) -> Result<Status> {
    let plan = ExperimentPlan::load_seeded(&a.plan, g.seed)?;
    let drawings = read_drawings(&a.data)?;
    let table = load_attributes(&a.attrs)?;
    let init = a.init.as_deref().map(Checkpoint::load).transpose()?;
    let attributes = plan.resolve_attributes(table.names())?;
    let verbose = g.verbose;
    let outcome = run_stage_with(&plan, &drawings, &table, init, |r| {
        if verbose > 0 {
            print_row(r, &attributes);
        }
    })?;
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    outcome.metrics.write_csv(&a.out.join("metrics.csv"))?;
    outcome.checkpoint.save(&a.out.join("checkpoint.json"))?;
    let mut eligible = outcome.eligible.join("\n");
    if !eligible.is_empty() {
        eligible.push('\n');
    }
    fs::write(a.out.join("eligible_attributes.txt"), eligible)?;
    let last_test = outcome.metrics.split_rows("test").last().map(|r| r.loss);
    let last_train = outcome.metrics.split_rows("train").last().map(|r| r.loss);
    Ok(Status::default()
        .with("plan", plan.label())
        .with("epochs", plan.epochs)
        .with("train_loss", last_train.map_or("-".into(), |v| format!("{v:.6}")))
        .with("test_loss", last_test.map_or("-".into(), |v| format!("{v:.6}")))
        .with("eligible", outcome.eligible.len())
        .with("output", a.out.display()))
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    attrs: PathBuf,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
}

fn encoding_of(c: &Checkpoint) -> EncodingInfo {
    c.encoding.unwrap_or(EncodingInfo {
        format: Format::Absolute,
        ordering: OrderMethod::MinLength,
    })
}

pub fn eval(g: &Global, a: EvalArgs) -> Result<Status> {
    if a.batch_size == 0 {
        return Err(usage("--batch-size must be at least 1"));
    }
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let drawings = read_drawings(&a.data)?;
    let table = load_attributes(&a.attrs)?;
    if ckpt.attributes.len() != ckpt.model.config.outputs {
        return Err(usage("checkpoint does not name its attributes"));
    }
    let enc = encoding_of(&ckpt);
    let data = encode_dataset(&drawings, &table, &ckpt.attributes, enc.format, enc.ordering, g.seed)?;
    let rows: Vec<usize> = (0..data.len()).collect();
    let (loss, bacc) = evaluate(&ckpt.model, &data.batches(&rows, a.batch_size)?)?;
    let mut status = Status::default().with("drawings", data.len()).with("loss", format!("{loss:.6}"));
    for (name, b) in ckpt.attributes.iter().zip(&bacc) {
        println!("{name}\t{}", b.map_or("-".into(), |v| format!("{v:.6}")));
        status = status.with(&format!("bacc_{name}"), b.map_or("-".into(), |v| format!("{v:.6}")));
    }
    Ok(status)
}

#[derive(Args)]
pub struct CompareArgs {
    /// Two or more plan files.
    #[arg(long, num_args = 2.., required = true)]
    plans: Vec<PathBuf>,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    attrs: PathBuf,
    /// Per-epoch test loss CSV, one column per plan.
    #[arg(long)]
    out: PathBuf,
}

pub fn compare(g: &Global, a: CompareArgs) -> Result<Status> {
    let plans = a
        .plans
        .iter()
        .map(|p| ExperimentPlan::load_seeded(p, g.seed).with_context(|| p.display().to_string()))
        .collect::<Result<Vec<_>>>()?;
    let drawings = read_drawings(&a.data)?;
    let table = load_attributes(&a.attrs)?;
    let report = compare_matrix(&plans, &drawings, &table)?;
    create_parent(&a.out)?;
    report.write_csv(&a.out)?;
    let ranking = report.ranking();
    for (i, (label, loss)) in ranking.iter().enumerate() {
        println!("{}. {label}\t{loss:.6}", i + 1);
    }
    Ok(Status::default()
        .with("plans", plans.len())
        .with("best", ranking.first().map_or("-".into(), |r| r.0.clone()))
        .with("output", a.out.display()))
}

fn scored_items(g: &Global, checkpoint: &Path, data: &Path, attribute: &str) -> Result<Vec<(Drawing, AttributeScores)>> {
    let ckpt = Checkpoint::load(checkpoint)?;
    let k = ckpt.attribute_index(attribute)?;
    let drawings = read_drawings(data)?;
    let scored = score_drawings(&ckpt.model, &drawings, encoding_of(&ckpt), g.seed)?;
    scored
        .into_iter()
        .map(|s| Ok((s.drawing, s.scores.column(k)?)))
        .collect()
}

#[derive(Args)]
pub struct ScoreArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    attribute: String,
    /// Include per-point scores (otherwise only the logit).
    #[arg(long)]
    per_point: bool,
    /// JSONL of `{id, logit, points}`.
    #[arg(long)]
    out: PathBuf,
}

pub fn score(g: &Global, a: ScoreArgs) -> Result<Status> {
    let items = scored_items(g, &a.checkpoint, &a.data, &a.attribute)?;
    let positive = items.iter().filter(|(_, s)| s.logit > 0.0).count();
    let records: Vec<AttributeScores> = items
        .into_iter()
        .map(|(_, mut s)| {
            if !a.per_point {
                s.points.clear();
            }
            s
        })
        .collect();
    create_parent(&a.out)?;
    write_jsonl(&a.out, &records)?;
    Ok(Status::default()
        .with("drawings", records.len())
        .with("positive", positive)
        .with("output", a.out.display()))
}

#[derive(Args)]
pub struct FacellArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    attribute: String,
    /// Number of qualifying drawings to overlay.
    #[arg(long, default_value_t = 1000)]
    count: usize,
    /// Per-point score threshold, in logit units.
    #[arg(long, allow_negative_numbers = true)]
    threshold: f64,
    /// Keep points below minus the threshold, from negatively predicted drawings.
    #[arg(long)]
    negate: bool,
    /// SVG output.
    #[arg(long)]
    out: PathBuf,
    /// Grayscale PGM raster output.
    #[arg(long)]
    png: Option<PathBuf>,
    /// SVG dot opacity.
    #[arg(long, default_value_t = 0.05)]
    opacity: f64,
    /// Grey levels removed per accumulated point in the raster.
    #[arg(long, default_value_t = 16)]
    darken: u8,
}

pub fn facell(g: &Global, a: FacellArgs) -> Result<Status> {
    if a.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    if !a.threshold.is_finite() {
        return Err(usage("--threshold must be finite"));
    }
    let spec = FaCellSpec {
        attribute: a.attribute.clone(),
        count: a.count,
        threshold: a.threshold,
        polarity: if a.negate { Polarity::Negative } else { Polarity::Positive },
    };
    let items = scored_items(g, &a.checkpoint, &a.data, &a.attribute)?;
    let cell = compose_facell(&items, &spec, g.seed)?;
    create_parent(&a.out)?;
    fs::write(&a.out, cell.to_svg(a.opacity)).with_context(|| format!("writing {}", a.out.display()))?;
    if let Some(p) = &a.png {
        create_parent(p)?;
        cell.write_pgm(p, a.darken)?;
    }
    Ok(Status::default()
        .with("attribute", &a.attribute)
        .with("drawings", cell.ids.len())
        .with("points", cell.points.len())
        .with("output", a.out.display()))
}

#[derive(Args)]
pub struct GradcheckArgs {
    /// LSTM cells per direction.
    #[arg(long, default_value_t = 8)]
    cells: usize,
    /// Random batches per configuration.
    #[arg(long, default_value_t = 20)]
    batches: usize,
    /// Pass threshold on the relative error.
    #[arg(long, default_value_t = 1e-5)]
    tolerance: f64,
}

pub const GRADCHECK_CONFIGS: [&str; 5] = ["1bi-fs-d1", "1bi-ga-d1", "1bi-ga-d40", "3bi-ga-d1", "3bi-ga-d40"];

fn random_batch(rng: &mut ChaCha8Rng) -> facells_core::Result<SequenceBatch> {
    let seqs: Vec<Vec<f64>> = (0..4)
        .map(|_| {
            let t = rng.random_range(1..=10);
            (0..3 * t).map(|_| rng.random_range(-1.0..1.0)).collect()
        })
        .collect();
    let targets: Vec<Vec<f64>> = (0..4).map(|_| vec![f64::from(rng.random_bool(0.5))]).collect();
    let refs: Vec<&[f64]> = seqs.iter().map(Vec::as_slice).collect();
    SequenceBatch::new(&refs, &targets, 3)
}

pub fn gradcheck(g: &Global, a: GradcheckArgs) -> Result<Status> {
    if a.cells == 0 || a.batches == 0 {
        return Err(usage("--cells and --batches must be at least 1"));
    }
    let mut worst = 0.0f64;
    for (ci, name) in GRADCHECK_CONFIGS.iter().enumerate() {
        let (layers, rest) = name.split_once('-').expect("names have dashes");
        let config = ModelConfig::from_name(&format!("{layers}({})-{rest}", a.cells), 1)?;
        let mut rng = ChaCha8Rng::seed_from_u64(g.seed.wrapping_add(ci as u64));
        let (mut max_rel, mut checked, mut kinks) = (0.0f64, 0, 0);
        for b in 0..a.batches {
            let model = Model::init(config.clone(), g.seed.wrapping_mul(31).wrapping_add((ci * 1000 + b) as u64))?;
            let report = gradient_check(&model, &random_batch(&mut rng)?, FD_STEP)?;
            max_rel = max_rel.max(report.max_rel_error);
            checked += report.checked;
            kinks += report.at_kinks;
        }
        println!("{name}\tmax_rel_error={max_rel:.3e}\tchecked={checked}\tat_kinks={kinks}");
        worst = worst.max(max_rel);
    }
    if worst >= a.tolerance {
        return Err(facells_core::Error::Numeric(format!(
            "gradient check failed: max relative error {worst:.3e} >= {:.1e}",
            a.tolerance
        ))
        .into());
    }
    Ok(Status::default().with("configs", GRADCHECK_CONFIGS.len()).with("max_rel_error", format!("{worst:.3e}")))
}
