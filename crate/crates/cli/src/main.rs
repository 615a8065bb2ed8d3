use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nntensor::harness::{
    export_decomposition, render_heatmap, robustness_sweep, run_method, write_report, Method, RobustnessConfig,
    RunSummary,
};
use nntensor::io::{read_matrix_csv, read_tensor, read_tensor_csv_dir, write_tensor, write_tensor_csv_dir};
use nntensor::synth::{Dataset, NoiseKind, NoiseSpec};
use nntensor::text::{
    assemble_tensor, build_vocabulary, newsgroups_for_schedule, top_keywords, Corpus, ScheduleSpec, VocabConfig,
    Vocabulary,
};
use nntensor::{Mode, SolverOptions, Tensor3};

#[derive(Parser)]
#[command(name = "nntensor", version, about = "Nonnegative tensor decompositions for dynamic topic modeling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic tensor, optionally with added noise.
    Synth(SynthArgs),
    /// Build a documents x terms x time TF-IDF tensor from a corpus.
    Ingest(IngestArgs),
    /// Decompose a tensor and export its factors. Reports ‖T − T̂‖_F.
    Decompose(DecomposeArgs),
    /// Print the top terms of each column of a term factor.
    Keywords(KeywordsArgs),
    /// Noise-robustness rank sweep. Reports ‖X − T̂‖_F against the clean tensor.
    Robustness(RobustnessArgs),
    /// Render a CSV matrix as a grayscale PGM image.
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct SynthArgs {
    /// correlated, correlated-noisy, correlated-rows, correlated-rows-noisy, emergence or shift.
    dataset: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Add noise of this kind: dense or lowrank<N>.
    #[arg(long, requires = "sigma")]
    noise: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    noise_seed: u64,
    /// Output path; a `.bin` file, or a directory of slice CSVs with `--csv`.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct IngestArgs {
    /// JSON-lines corpus.
    #[arg(long, required_unless_present = "newsgroups", conflicts_with = "newsgroups")]
    corpus: Option<PathBuf>,
    /// Root of a 20 Newsgroups directory tree to sample from instead of a corpus file.
    #[arg(long)]
    newsgroups: Option<PathBuf>,
    /// JSON schedule; defaults to the four-group newsgroup schedule.
    #[arg(long)]
    schedule: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    min_df: usize,
    #[arg(long, default_value_t = 0.95)]
    max_df: f64,
    #[arg(long, default_value_t = 5000)]
    max_features: usize,
    /// Keep the stopwords.
    #[arg(long)]
    no_stopwords: bool,
    /// Skip header, quote and footer removal.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    vocab_out: PathBuf,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 500)]
    max_iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// Independent NNCPD starts; the lowest error is kept.
    #[arg(long, default_value_t = 1)]
    restarts: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            rel_tol: self.rel_tol,
            seed: self.seed,
            restarts: self.restarts,
            ..Default::default()
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Tensor `.bin` file or slice-CSV directory.
    #[arg(long)]
    input: PathBuf,
    /// nncpd, direct_nmf or fixed_nmf.
    #[arg(long)]
    method: String,
    #[arg(long)]
    rank: usize,
    /// Slicing mode (1, 2 or 3) for direct_nmf and fixed_nmf.
    #[arg(long)]
    slice_mode: Option<usize>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct KeywordsArgs {
    /// Term factor CSV, one row per vocabulary term.
    #[arg(long)]
    factor: PathBuf,
    #[arg(long)]
    vocab: PathBuf,
    #[arg(long, short, default_value_t = 10)]
    k: usize,
}

#[derive(Args)]
struct RobustnessArgs {
    /// TOML file with any RobustnessConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<String>,
    /// Comma-separated noise kinds, e.g. lowrank1,dense.
    #[arg(long, value_delimiter = ',')]
    noise: Option<Vec<String>>,
    #[arg(long, value_delimiter = ',')]
    sigmas: Option<Vec<f64>>,
    /// Use ranks 1..=r_max.
    #[arg(long)]
    r_max: Option<usize>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<String>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct HeatmapArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

/// Exponent notation for small magnitudes, plain shortest form otherwise.
fn num(v: f64) -> String {
    if v != 0.0 && v.abs() < 1e-3 {
        format!("{v:e}")
    } else {
        v.to_string()
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<nntensor::Error> for Failure {
    fn from(e: nntensor::Error) -> Self {
        match e {
            nntensor::Error::InvalidArgument(m) => Failure::Usage(m),
            e => Failure::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn existing(path: &Path) -> CliResult<&Path> {
    if path.exists() {
        Ok(path)
    } else {
        Err(Failure::Usage(format!("{}: no such file or directory", path.display())))
    }
}

fn read_any_tensor(path: &Path) -> CliResult<Tensor3> {
    let path = existing(path)?;
    Ok(if path.is_dir() { read_tensor_csv_dir(path)? } else { read_tensor(path)? })
}

fn save_tensor(t: &Tensor3, out: &Path, csv: bool) -> CliResult<()> {
    if csv {
        write_tensor_csv_dir(out, t)?;
    } else {
        write_tensor(out, t)?;
    }
    Ok(())
}

fn synth(a: SynthArgs) -> CliResult<()> {
    let dataset = Dataset::parse(&a.dataset)?;
    let mut t = dataset.generate(a.seed)?;
    if let (Some(kind), Some(sigma)) = (&a.noise, a.sigma) {
        let spec = NoiseSpec { kind: NoiseKind::parse(kind)?, sigma, seed: a.noise_seed };
        let n = spec.generate(t.shape())?;
        println!("noise_norm {}", num(n.frobenius_norm()));
        t = t.add(&n)?;
    }
    save_tensor(&t, &a.out, a.csv)?;
    let [n1, n2, n3] = t.shape();
    println!("{} {n1}x{n2}x{n3} norm {}", dataset.name(), num(t.frobenius_norm()));
    Ok(())
}

fn ingest(a: IngestArgs) -> CliResult<()> {
    let schedule = match &a.schedule {
        Some(p) => ScheduleSpec::read(existing(p)?)?,
        None => ScheduleSpec::newsgroups(),
    };
    let corpus = match (&a.corpus, &a.newsgroups) {
        (Some(p), _) => Corpus::read_jsonl(existing(p)?)?,
        (None, Some(root)) => newsgroups_for_schedule(existing(root)?, &schedule, a.seed)?,
        (None, None) => return Err(Failure::Usage("--corpus or --newsgroups is required".into())),
    };
    let corpus = if a.raw { corpus } else { corpus.preprocessed() };
    let cfg = VocabConfig {
        min_df: a.min_df,
        max_df_ratio: a.max_df,
        max_features: a.max_features,
        stopwords: if a.no_stopwords { Vec::new() } else { VocabConfig::default().stopwords },
    };
    let vocab = build_vocabulary(&corpus, &cfg)?;
    let t = assemble_tensor(&corpus, &vocab, &schedule)?;
    write_tensor(&a.out, &t)?;
    vocab.write(&a.vocab_out)?;
    let [n1, n2, n3] = t.shape();
    println!("{} documents, {} terms, tensor {n1}x{n2}x{n3}", corpus.len(), vocab.len());
    Ok(())
}

fn decompose(a: DecomposeArgs) -> CliResult<()> {
    let method: Method = a.method.parse()?;
    let slice_mode = a.slice_mode.map(Mode::try_from).transpose().map_err(|e| Failure::Usage(e.to_string()))?;
    if method.needs_slice_mode() && slice_mode.is_none() {
        return Err(Failure::Usage(format!("--slice-mode is required for {method}")));
    }
    let t = read_any_tensor(&a.input)?;
    let opts = a.solver.options();
    let dec = run_method(&t, method, a.rank, slice_mode, &opts)?;
    let summary = RunSummary::new(&t, method, a.rank, slice_mode, opts.seed, &dec);
    export_decomposition(&a.out_dir, &dec, &summary)?;
    println!("error {}", num(summary.error));
    println!("relative_error {}", num(summary.relative_error));
    println!("iterations {} converged {}", summary.iterations, summary.converged);
    Ok(())
}

fn keywords(a: KeywordsArgs) -> CliResult<()> {
    let b = read_matrix_csv(existing(&a.factor)?)?;
    let vocab = Vocabulary::read(existing(&a.vocab)?)?;
    for (l, words) in top_keywords(&b, &vocab, a.k)?.iter().enumerate() {
        println!("{}: {}", l + 1, words.join(" "));
    }
    Ok(())
}

fn robustness(a: RobustnessArgs) -> CliResult<()> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text =
                std::fs::read_to_string(existing(p)?).map_err(|e| Failure::Runtime(format!("{}: {e}", p.display())))?;
            toml::from_str::<RobustnessConfig>(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => RobustnessConfig::default(),
    };
    if let Some(d) = &a.dataset {
        cfg.dataset = Dataset::parse(d)?;
    }
    if let Some(kinds) = &a.noise {
        cfg.noise = kinds.iter().map(|k| NoiseKind::parse(k)).collect::<Result<_, _>>()?;
    }
    if let Some(s) = &a.sigmas {
        cfg.sigmas = s.clone();
    }
    if let Some(r) = a.r_max {
        cfg.ranks = (1..=r).collect();
    }
    if let Some(n) = a.runs {
        cfg.runs = n;
    }
    if let Some(ms) = &a.methods {
        cfg.methods = ms.iter().map(|m| m.parse()).collect::<Result<_, _>>()?;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(n) = a.max_iters {
        cfg.solver.max_iters = n;
    }
    cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let report = robustness_sweep(&cfg)?;
    write_report(&report, &a.out_dir)?;
    let failures: usize = report.cells.iter().map(|c| c.failures).sum();
    println!(
        "{} runs, {} failed, x_norm {}, reports in {}",
        report.runs.len(),
        failures,
        num(report.x_norm),
        a.out_dir.display()
    );
    Ok(())
}

fn heatmap(a: HeatmapArgs) -> CliResult<()> {
    let m = read_matrix_csv(existing(&a.input)?)?;
    render_heatmap(&m, &a.out)?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Synth(a) => synth(a),
        Command::Ingest(a) => ingest(a),
        Command::Decompose(a) => decompose(a),
        Command::Keywords(a) => keywords(a),
        Command::Robustness(a) => robustness(a),
        Command::Heatmap(a) => heatmap(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
