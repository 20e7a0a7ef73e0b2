//! Command-line interface.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | success (also `--help` and `--version`) |
//! | 1    | I/O or other runtime failure |
//! | 2    | corpus directory not found |
//! | 3    | empty corpus or empty test set |
//! | 4    | index cannot be loaded or saved |
//! | 5    | input file does not parse |
//! | 64   | usage error: unknown flag, bad value, invalid configuration |

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::evaluation::{self, EvalError, EvalOptions, GridError, Split, SweepParam};
use crate::index::{BuildError, CorpusIndex, IndexBuilder};
use crate::recovery::{recover_file, RecoveryConfig, TscMode};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_MISSING_DIR: i32 = 2;
pub const EXIT_EMPTY: i32 = 3;
pub const EXIT_INDEX: i32 = 4;
pub const EXIT_PARSE: i32 = 5;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "name-loom", version, about = "Recover variable names in minified JavaScript")]
struct Cli {
    /// Log progress to stderr.
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Index a corpus of non-minified .js files.
    BuildIndex {
        corpus: PathBuf,
        /// Output index directory.
        #[arg(short, long)]
        output: PathBuf,
        /// Parser threads [default: all cores].
        #[arg(long)]
        jobs: Option<usize>,
        /// Build time stored in meta.json, seconds since the epoch [default: now].
        #[arg(long)]
        timestamp: Option<u64>,
    },
    /// Rename the local variables of a minified file.
    Recover {
        file: PathBuf,
        #[arg(long, env = "NAME_LOOM_INDEX")]
        index: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = Emit::Js)]
        emit: Emit,
        /// Output path. With `--emit both` the report goes next to it with a .json extension.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Include per-function recovery times in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Rename local variables to short names, recording the originals.
    Minify {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Write the ground-truth name map here.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Measure recovery accuracy on a corpus.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    corpus: PathBuf,
    /// Index containing the corpus (self-recovery).
    #[arg(long, env = "NAME_LOOM_INDEX")]
    index: Option<PathBuf>,
    /// Cross-validate with this many folds instead of using --index.
    #[arg(long)]
    folds: Option<usize>,
    /// Also report each combination of contexts.
    #[arg(long)]
    ablate: bool,
    /// Sweep one parameter (phi, beam, assoc-j, alpha, gamma, data-size) over a grid
    /// written `start:end:step` or `a,b,c`; prints CSV.
    #[arg(long, num_args = 2, value_names = ["PARAM", "GRID"])]
    sweep: Option<Vec<String>>,
    /// Count top-level variables too.
    #[arg(long)]
    all_vars: bool,
    /// Files are already minified; ground truth is read from `<stem>.truth.json`.
    #[arg(long)]
    pre_minified: bool,
    #[arg(long, default_value_t = 0)]
    minify_seed: u64,
    #[arg(long)]
    timings: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Js,
    Json,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TscArg {
    Full,
    Token,
}

/// Recovery settings; each overrides the config file, which overrides the defaults.
#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML file with recovery settings.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Minimum graph match score for single-variable candidates [default: 0.8]
    #[arg(long)]
    phi: Option<f64>,
    /// Beam size [default: 30]
    #[arg(long)]
    beam: Option<usize>,
    /// Subset size of the co-occurrence association [default: 2]
    #[arg(long)]
    assoc_j: Option<usize>,
    /// Weight of the single-variable score [default: 0.75]
    #[arg(long)]
    alpha: Option<f64>,
    /// Weight of the task score [default: 0.25]
    #[arg(long)]
    beta: Option<f64>,
    /// Weight of the multi-variable score in the beam [default: 1.0]
    #[arg(long)]
    gamma: Option<f64>,
    /// Weight of the summed candidate scores in the beam [default: 0.0]
    #[arg(long)]
    theta: Option<f64>,
    /// Candidates kept per variable [default: 50]
    #[arg(long)]
    cmax: Option<usize>,
    /// Match function names whole or by token [default: full]
    #[arg(long, value_enum)]
    tsc: Option<TscArg>,
    /// Seed for tie-breaking fallbacks [default: 0]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn fail(code: i32, message: impl std::fmt::Display) -> Failure {
    Failure { code, message: message.to_string() }
}

type Outcome = Result<(), Failure>;

impl ConfigArgs {
    fn resolve(&self) -> Result<RecoveryConfig, Failure> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?;
                toml::from_str(&text).map_err(|e| fail(EXIT_USAGE, format!("{}: {e}", path.display())))?
            }
            None => RecoveryConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { config.$field = v; })*
            };
        }
        set!(phi => phi, beam => beam_k, assoc_j => assoc_j, alpha => alpha, beta => beta,
             gamma => gamma, theta => theta, cmax => c_max, seed => seed);
        if let Some(tsc) = self.tsc {
            config.tsc_mode = match tsc {
                TscArg::Full => TscMode::FullName,
                TscArg::Token => TscMode::Tokenized,
            };
        }
        config.validate().map_err(|e| fail(EXIT_USAGE, e))?;
        Ok(config)
    }
}

fn write_output(path: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Outcome {
    match path {
        Some(path) => std::fs::write(path, text).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| fail(EXIT_FAILURE, e)),
    }
}

fn read_source(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| fail(EXIT_FAILURE, format!("{}: {e}", path.display())))
}

fn load_index(dir: &Path) -> Result<CorpusIndex, Failure> {
    CorpusIndex::load(dir).map_err(|e| fail(EXIT_INDEX, format!("cannot load index {}: {e}", dir.display())))
}

fn build_error(err: BuildError) -> Failure {
    let code = match err {
        BuildError::MissingDir(_) => EXIT_MISSING_DIR,
        BuildError::EmptyCorpus => EXIT_EMPTY,
        BuildError::Io { .. } => EXIT_FAILURE,
    };
    fail(code, err)
}

fn eval_error(err: EvalError) -> Failure {
    match err {
        EvalError::Build(err) => build_error(err),
        EvalError::EmptyTestSet => fail(EXIT_EMPTY, err),
        EvalError::Split(_) | EvalError::Config(_) | EvalError::Grid(_) => fail(EXIT_USAGE, err),
        EvalError::Pool(_) => fail(EXIT_FAILURE, err),
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

fn build_index(corpus: &Path, output: &Path, jobs: Option<usize>, timestamp: Option<u64>, stdout: &mut dyn Write) -> Outcome {
    let secs = timestamp.unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()));
    let mut builder = IndexBuilder::new().timestamp(secs);
    if let Some(jobs) = jobs {
        builder = builder.jobs(jobs);
    }
    let index = builder.build_dir(corpus).map_err(build_error)?;
    index.save(output).map_err(|e| fail(EXIT_INDEX, format!("cannot save index {}: {e}", output.display())))?;
    let c = &index.meta().counts;
    let stats = format!(
        "files                     {} (skipped {}, duplicates {})\n\
         functions                 {}\n\
         names                     {}\n\
         pivots                    {}\n\
         graphs                    {}\n\
         edges                     {}\n\
         mean edges per graph      {:.2}\n\
         mean graphs per function  {:.2}\n",
        c.files,
        c.skipped_files,
        c.duplicate_files,
        c.functions,
        c.names,
        c.pivots,
        c.graphs,
        c.edges,
        c.mean_edges_per_graph,
        c.mean_graphs_per_function
    );
    write_output(None, &stats, stdout)
}

fn recover(
    file: &Path,
    index: &Path,
    config: &ConfigArgs,
    emit: Emit,
    output: Option<&Path>,
    timings: bool,
    stdout: &mut dyn Write,
) -> Outcome {
    if emit == Emit::Both && output.is_none() {
        return Err(fail(EXIT_USAGE, "--emit both needs -o"));
    }
    let config = config.resolve()?;
    let index = load_index(index)?;
    let source = read_source(file)?;
    let name = file.to_string_lossy();
    let out = recover_file(&source, &name, &index, &config, timings).map_err(|e| fail(EXIT_PARSE, e))?;
    let unrecovered: usize =
        out.report.functions.iter().map(|f| f.variables.iter().filter(|v| v.predicted.is_none()).count()).sum();
    if unrecovered > 0 {
        log::info!("{unrecovered} variable(s) without a candidate");
    }
    match emit {
        Emit::Js => write_output(output, &out.source, stdout),
        Emit::Json => write_output(output, &json(&out.report), stdout),
        Emit::Both => {
            let output = output.expect("checked");
            write_output(Some(output), &out.source, stdout)?;
            write_output(Some(&output.with_extension("json")), &json(&out.report), stdout)
        }
    }
}

fn minify(file: &Path, seed: u64, output: Option<&Path>, truth: Option<&Path>, stdout: &mut dyn Write) -> Outcome {
    let source = read_source(file)?;
    let out = evaluation::alpha_minify(&source, &file.to_string_lossy(), seed).map_err(|e| fail(EXIT_PARSE, e))?;
    if out.dynamic_scope {
        log::warn!("{}: uses eval or with, left unchanged", file.display());
    }
    if let Some(truth) = truth {
        write_output(Some(truth), &json(&out.truth), stdout)?;
    }
    write_output(output, &out.source, stdout)
}

fn evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Outcome {
    let config = args.config.resolve()?;
    let sweep = match &args.sweep {
        Some(v) => {
            let param: SweepParam = v[0].parse().map_err(|e: GridError| fail(EXIT_USAGE, e))?;
            let grid = evaluation::parse_grid(&v[1]).map_err(|e| fail(EXIT_USAGE, e))?;
            Some((param, grid))
        }
        None => None,
    };
    let mut opts = EvalOptions {
        config,
        split: Split::SelfRecovery,
        minify_seed: args.minify_seed,
        all_vars: args.all_vars,
        timings: args.timings,
        ablate: args.ablate,
        pre_minified: args.pre_minified,
        jobs: args.jobs,
    };
    let index = match (args.folds, &args.index) {
        (Some(folds), _) => {
            if args.pre_minified {
                return Err(fail(EXIT_USAGE, "--folds cannot be combined with --pre-minified"));
            }
            opts.split = Split::HoldOut { folds, test_fold: 0 };
            None
        }
        (None, Some(dir)) => Some(load_index(dir)?),
        (None, None) => return Err(fail(EXIT_USAGE, "evaluate needs --index or --folds")),
    };

    if let Some((param, grid)) = sweep {
        let rows = evaluation::sweep(&args.corpus, index.as_ref(), &opts, param, &grid).map_err(eval_error)?;
        return write_output(args.output.as_deref(), &evaluation::sweep_csv(&rows), stdout);
    }
    let report = match (&index, opts.split) {
        (Some(index), _) => evaluation::evaluate(&args.corpus, index, &opts),
        (None, Split::HoldOut { folds, .. }) => evaluation::cross_validate(&args.corpus, folds, &opts),
        (None, Split::SelfRecovery) => unreachable!("index or folds"),
    }
    .map_err(eval_error)?;
    let text = match args.format {
        Format::Table => report.table(),
        Format::Json => json(&report),
    };
    write_output(args.output.as_deref(), &text, stdout)
}

fn init_logging(verbose: bool) {
    let level = if verbose { log::LevelFilter::Debug } else { log::LevelFilter::Warn };
    let _ = env_logger::Builder::new().filter_level(level).parse_env("NAME_LOOM_LOG").try_init();
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Machine output goes to `stdout`; diagnostics to `stderr`.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let text = err.render().to_string();
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    EXIT_OK
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    EXIT_USAGE
                }
            };
        }
    };
    init_logging(cli.verbose);
    let outcome = match &cli.command {
        Command::BuildIndex { corpus, output, jobs, timestamp } => build_index(corpus, output, *jobs, *timestamp, stdout),
        Command::Recover { file, index, config, emit, output, timings } => {
            recover(file, index, config, *emit, output.as_deref(), *timings, stdout)
        }
        Command::Minify { file, seed, output, truth } => minify(file, *seed, output.as_deref(), truth.as_deref(), stdout),
        Command::Evaluate(args) => evaluate(args, stdout),
    };
    let _ = stdout.flush();
    match outcome {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(stderr, "error: {}", failure.message);
            failure.code
        }
    }
}

/// Runs the CLI against the process's stdout and stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
