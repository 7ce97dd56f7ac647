//! Command-line front end: `synth`, `convert`, `mine`, `eval`, `explain`.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::data::{generate_synthetic, load_csv, normalize_sample, pad_to_length, write_csv_to, SynthSpec};
use crate::error::{Result, StemError};
use crate::eval::{
    baseline_histogram_eval, evaluate_pipeline, ClassifierConfig, DatasetReport, Metric, PipelineConfig, ReportFile,
    SplitSpec,
};
use crate::features::{FeatureVocabulary, MinerSnapshot};
use crate::miner::{build_forest, extract_rts_features, prune_bottom_up, MinSupport, MinerConfig, DEFAULT_MAX_LEN};
use crate::symbolize::{
    explain_event, load_events, read_events, symbolize_sample, write_events, EventCode, SymbolizerConfig, DEFAULT_DELTA,
};

#[derive(Debug, Parser)]
#[command(
    name = "stem",
    version,
    about = "Spatial-change event mining for multidimensional time series"
)]
pub struct Cli {
    /// Random seed; overrides the seed of a synthetic spec.
    #[arg(long, global = true, env = "STEM_SEED")]
    pub seed: Option<u64>,

    /// Only report errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,

    /// More log output (repeat for debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    /// Worker threads for per-sample stages.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a labeled dataset CSV from a TOML spec.
    Synth(SynthArgs),
    /// Normalize and symbolize a dataset into an event file.
    Convert(ConvertArgs),
    /// Mine root-to-leaf tuple features from an event file.
    Mine(MineArgs),
    /// Split, mine, vectorize and classify; write reports.
    Eval(EvalArgs),
    /// Describe event codes or a mined feature file.
    Explain(ExplainArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Synthetic spec file.
    pub spec: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    /// Dataset CSV, or `-` for standard input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    /// Pad every sample to the longest sample length before symbolizing.
    #[arg(long, overrides_with = "no_pad")]
    pub pad: bool,
    #[arg(long, overrides_with = "pad")]
    pub no_pad: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MinerArgs {
    /// Minimum document support: an integer count or a fraction such as `0.05`.
    #[arg(long, default_value = "0.05")]
    pub min_support: MinSupport,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    /// Prune leaves whose support is below this fraction of their parent's.
    #[arg(long, default_value_t = 0.0)]
    pub gain_gamma: f64,
}

impl MinerArgs {
    fn config(&self) -> Result<MinerConfig> {
        MinerConfig::new(self.min_support, self.max_len)?.with_gain_gamma(self.gain_gamma)
    }
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Event file, or `-` for standard input.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClassifierKind {
    Knn,
    Centroid,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Dataset CSV; repeat for one table column per dataset.
    #[arg(long = "in", required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_DELTA)]
    pub delta: f64,
    #[command(flatten)]
    pub miner: MinerArgs,
    #[arg(long, value_enum, default_value_t = ClassifierKind::Knn)]
    pub classifier: ClassifierKind,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value = "euclidean")]
    pub metric: Metric,
    #[arg(long, default_value_t = 0.8)]
    pub train_frac: f64,
    /// Split without per-class stratification.
    #[arg(long)]
    pub no_stratify: bool,
    /// Evaluate on the training set itself.
    #[arg(long)]
    pub resubstitution: bool,
    /// Add the 1-gram event histogram baseline.
    #[arg(long)]
    pub baseline: bool,
    /// Output directory for `report.json`, `report.txt` and vocabularies.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
#[command(group(clap::ArgGroup::new("source").required(true).args(["code", "features"])))]
pub struct ExplainArgs {
    #[arg(long, requires = "dims")]
    pub code: Option<u32>,
    #[arg(long)]
    pub dims: Option<usize>,
    /// Mined feature or vocabulary file, or `-` for standard input.
    #[arg(long)]
    pub features: Option<PathBuf>,
    /// Comma-separated dimension names.
    #[arg(long, value_delimiter = ',')]
    pub names: Option<Vec<String>>,
}

pub fn init_logging(cli: &Cli) {
    let level = if cli.quiet {
        log::LevelFilter::Error
    } else {
        match cli.verbose {
            0 => log::LevelFilter::Warn,
            1 => log::LevelFilter::Info,
            _ => log::LevelFilter::Debug,
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
}

pub fn run(cli: Cli) -> Result<()> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs.max(1))
        .build()
        .map_err(|e| StemError::Config(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Synth(args) => cmd_synth(args, cli.seed),
        Command::Convert(args) => cmd_convert(args),
        Command::Mine(args) => cmd_mine(args),
        Command::Eval(args) => cmd_eval(args, cli.seed.unwrap_or(0), cli.quiet),
        Command::Explain(args) => cmd_explain(args),
    })
}

fn is_stdio(path: &Path) -> bool {
    path.as_os_str() == "-"
}

fn open_input(path: &Path) -> Result<Box<dyn Read>> {
    if is_stdio(path) {
        return Ok(Box::new(std::io::stdin().lock()));
    }
    let f = File::open(path).map_err(|e| StemError::io(path, e))?;
    Ok(Box::new(std::io::BufReader::new(f)))
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
        Some(p) if is_stdio(p) => Ok(Box::new(BufWriter::new(std::io::stdout().lock()))),
        Some(p) => {
            let f = File::create(p).map_err(|e| StemError::io(p, e))?;
            Ok(Box::new(BufWriter::new(f)))
        }
    }
}

fn finish(mut w: Box<dyn Write>, path: Option<&Path>) -> Result<()> {
    w.flush()
        .map_err(|e| StemError::io(path.unwrap_or(Path::new("<stdout>")), e))
}

pub fn cmd_synth(args: &SynthArgs, seed: Option<u64>) -> Result<()> {
    let mut spec = SynthSpec::load(&args.spec)?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let ds = generate_synthetic(&spec)?;
    let out = open_output(args.out.as_deref())?;
    write_csv_to(&ds, out)?;
    log::info!("wrote {} samples", ds.len());
    Ok(())
}

pub fn cmd_convert(args: &ConvertArgs) -> Result<()> {
    let cfg = SymbolizerConfig::new(args.delta)?;
    let ds = crate::data::read_csv(open_input(&args.input)?).map_err(|e| with_path(e, &args.input))?;
    let target = ds.max_len();
    let pad = args.pad && !args.no_pad;
    use rayon::prelude::*;
    let seqs = ds
        .samples()
        .par_iter()
        .map(|s| {
            let mut s = normalize_sample(s);
            if pad {
                s = pad_to_length(&s, target)?;
            }
            symbolize_sample(&s, &cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = open_output(args.out.as_deref())?;
    write_events(&seqs, ds.dims(), cfg.delta(), &mut out)?;
    finish(out, args.out.as_deref())
}

fn with_path(e: StemError, path: &Path) -> StemError {
    match e {
        StemError::Io { .. } => e,
        other if !is_stdio(path) => StemError::Schema(format!("{}: {other}", path.display())),
        other => other,
    }
}

pub fn cmd_mine(args: &MineArgs) -> Result<()> {
    let cfg = args.miner.config()?;
    let events = if is_stdio(&args.input) {
        read_events(open_input(&args.input)?)?
    } else {
        load_events(&args.input)?
    };
    let forest = build_forest(&events.sequences, &cfg)?;
    let sigma = cfg.min_support.resolve(forest.n_samples());
    if sigma as usize > forest.n_samples() {
        log::warn!(
            "min support {sigma} exceeds the {} mined samples; no feature can survive",
            forest.n_samples()
        );
    }
    let mined = extract_rts_features(&prune_bottom_up(&forest, &cfg));
    if mined.is_empty() {
        log::warn!("no features survived mining");
    }
    let vocab = FeatureVocabulary::from_mined(
        &mined,
        events.dims,
        events.delta,
        Some(MinerSnapshot::new(&cfg, forest.n_samples())),
    )?;
    let mut out = open_output(args.out.as_deref())?;
    vocab.write_json(&mut out)?;
    finish(out, args.out.as_deref())
}

fn dataset_names(paths: &[PathBuf]) -> Vec<String> {
    let mut seen = HashSet::new();
    paths
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let stem = p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| format!("dataset{i}"));
            if seen.insert(stem.clone()) {
                stem
            } else {
                format!("{stem}-{i}")
            }
        })
        .collect()
}

pub fn cmd_eval(args: &EvalArgs, seed: u64, quiet: bool) -> Result<()> {
    let metric = args.metric;
    let classifier = match args.classifier {
        ClassifierKind::Knn => ClassifierConfig::Knn { k: args.k, metric },
        ClassifierKind::Centroid => ClassifierConfig::NearestCentroid { metric },
    };
    let cfg = PipelineConfig {
        symbolizer: SymbolizerConfig::new(args.delta)?,
        miner: args.miner.config()?,
        split: SplitSpec {
            train_fraction: args.train_frac,
            seed,
            stratified: !args.no_stratify,
        },
        classifier,
        resubstitution: args.resubstitution,
    };

    std::fs::create_dir_all(&args.out).map_err(|e| StemError::io(&args.out, e))?;
    let mut datasets = Vec::new();
    for (path, name) in args.input.iter().zip(dataset_names(&args.input)) {
        let ds = load_csv(path).map_err(|e| with_path(e, path))?;
        let outcome = evaluate_pipeline(&ds, &cfg)?;
        let vocab_path = args.out.join(format!("{name}.vocab.json"));
        outcome.vocabulary.save(&vocab_path)?;
        let mut reports = vec![outcome.report];
        if args.baseline {
            reports.push(baseline_histogram_eval(&ds, &cfg)?);
        }
        datasets.push(DatasetReport { dataset: name, reports });
    }
    let file = ReportFile { datasets };
    let json_path = args.out.join("report.json");
    std::fs::write(&json_path, file.to_json()?).map_err(|e| StemError::io(&json_path, e))?;
    let tables = file.render_tables();
    let txt_path = args.out.join("report.txt");
    std::fs::write(&txt_path, &tables).map_err(|e| StemError::io(&txt_path, e))?;
    if !quiet {
        print!("{tables}");
    }
    Ok(())
}

pub fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let names = args.names.as_deref();
    let mut out = open_output(None)?;
    let write_err = |e| StemError::io("<stdout>", e);
    if let Some(code) = args.code {
        let dims = args.dims.expect("clap requires --dims with --code");
        let text = explain_event(EventCode(code), dims, names)?;
        writeln!(out, "{text}").map_err(write_err)?;
    } else if let Some(path) = &args.features {
        let vocab = FeatureVocabulary::read_json(open_input(path)?).map_err(|e| with_path(e, path))?;
        for (i, tuple) in vocab.features().iter().enumerate() {
            let steps = tuple
                .codes()
                .iter()
                .map(|&c| explain_event(c, vocab.dims(), names).map(|t| format!("[{t}]")))
                .collect::<Result<Vec<_>>>()?;
            let stats = vocab
                .stats(i)
                .map(|s| format!(" doc={} occ={}", s.doc_support, s.occ_count))
                .unwrap_or_default();
            writeln!(out, "f{i} {tuple}{stats}: {}", steps.join(" -> ")).map_err(write_err)?;
        }
    }
    finish(out, None)
}
