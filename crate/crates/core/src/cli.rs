//! Command-line front end: `synth`, `train`, `mine`, `baseline`, `compare`
//! and `stats`.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal invariant
//! violation.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::apriori::{mine_rules, MiningParams};
use crate::dataset::{load_transactions, SyntheticCorpus, SyntheticParams, WeightedDataset};
use crate::error::{Error, Result};
use crate::marc::{mine, mine_assignments, MarcParams, RuleCollection, DEFAULT_E_CAP};
use crate::model::Model;
use crate::multisom::{build_hierarchy, default_levels};
use crate::report::{compare_with_baseline, level_stats, write_stats_csv};
use crate::rule_io::{read_rules, write_rules, write_symbolic_rules, RuleFormat};
use crate::som::{init_map, train, ClusterAssignment, Distance, SomParams};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "marc", version, about = "Association rules from MultiSOM clusterings")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Base map rows.
    #[arg(long, global = true, default_value_t = 10)]
    rows: usize,
    /// Base map columns.
    #[arg(long, global = true, default_value_t = 10)]
    cols: usize,
    /// Generalization levels above the base map [default: min(rows, cols) - 2].
    #[arg(long, global = true)]
    levels: Option<usize>,
    /// Absolute minimum support for Apriori passes.
    #[arg(long, global = true, default_value_t = 2)]
    minsup: usize,
    /// Minimum confidence for Apriori passes.
    #[arg(long, global = true, default_value_t = 0.0)]
    minconf: f64,
    /// Dataset: matrix CSV (`.csv`) or transaction file (anything else).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output file [default: stdout].
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    /// Rule output format: csv or jsonl.
    #[arg(long, global = true, default_value = "csv")]
    format: String,
}

#[derive(Debug, Args)]
struct ClusteringArgs {
    /// Model file written by `train`.
    #[arg(long, conflicts_with = "assignment", required_unless_present = "assignment")]
    model: Option<PathBuf>,
    /// Fixed single-level clustering as `object,row,col` CSV (bypasses training).
    #[arg(long)]
    assignment: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a planted-structure corpus as matrix CSV.
    Synth {
        #[arg(long, default_value_t = 4)]
        groups: usize,
        #[arg(long, default_value_t = 250)]
        objects_per_group: usize,
        #[arg(long, default_value_t = 58)]
        features_per_group: usize,
        #[arg(long, default_value_t = 0.02)]
        noise: f64,
    },
    /// Train the base map, build the generalization levels, write the model.
    Train {
        #[arg(long, default_value_t = 20)]
        epochs: usize,
        #[arg(long, default_value_t = 0.5)]
        learning_rate: f64,
        /// Initial neighbourhood radius [default: max(rows, cols) / 2].
        #[arg(long)]
        radius: Option<f64>,
        /// euclidean or cosine.
        #[arg(long, default_value = "euclidean")]
        distance: String,
    },
    /// Extract Type I and Type II rules from every level.
    Mine {
        #[command(flatten)]
        clustering: ClusteringArgs,
        /// Largest |B| for which E is found by scanning every subset.
        #[arg(long, default_value_t = DEFAULT_E_CAP)]
        e_cap: usize,
    },
    /// Apriori on the whole dataset.
    Baseline,
    /// Mean confidence and length: Apriori baseline against MARC rules.
    Compare {
        #[command(flatten)]
        clustering: ClusteringArgs,
        /// Minimum support of the baseline [default: --minsup].
        #[arg(long)]
        baseline_minsup: Option<usize>,
        /// Minimum confidence of the baseline.
        #[arg(long, default_value_t = 0.0)]
        baseline_minconf: f64,
    },
    /// Per-level rule counts and averages as CSV.
    Stats {
        #[command(flatten)]
        clustering: ClusteringArgs,
        /// Rule file written by `mine`.
        #[arg(long)]
        rules: PathBuf,
    },
}

/// Runs the CLI with `args` (program name first), printing errors to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("marc: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Param(_) | Error::TooManyLevels { .. } | Error::NotReducible { .. } => EXIT_USAGE,
        Error::Invariant(_) => EXIT_INVARIANT,
        _ => EXIT_DATA,
    }
}

fn execute(cli: Cli) -> Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth {
            groups,
            objects_per_group,
            features_per_group,
            noise,
        } => {
            let params = SyntheticParams::new(*groups, *objects_per_group, *features_per_group, *noise, g.seed);
            let corpus = SyntheticCorpus::generate(params)?;
            with_output(g, |w| corpus.dataset.write_matrix_csv(w))
        }
        Command::Train {
            epochs,
            learning_rate,
            radius,
            distance,
        } => {
            let d = load_data(g)?;
            let levels = g.levels.unwrap_or_else(|| default_levels(g.rows, g.cols));
            let params = SomParams {
                epochs: *epochs,
                initial_learning_rate: *learning_rate,
                initial_radius: radius.unwrap_or_else(|| SomParams::for_grid(g.rows, g.cols, g.seed).initial_radius),
                seed: g.seed,
                distance: distance.parse::<Distance>()?,
            };
            let base = train(&init_map(g.rows, g.cols, &d, g.seed)?, &d, &params)?;
            let h = build_hierarchy(&base, &d, levels)?;
            let model = Model::new(h, &d, Some(params));
            with_output(g, |w| model.write(w))
        }
        Command::Mine { clustering, e_cap } => {
            let d = load_data(g)?;
            let params = MarcParams {
                type2: mining_params(g)?,
                e_cap: *e_cap,
            };
            let (rules, _) = mine_clustering(clustering, &d, &params)?;
            let format: RuleFormat = g.format.parse()?;
            with_output(g, |w| write_rules(w, &rules, d.feature_names(), format))
        }
        Command::Baseline => {
            let d = load_data(g)?;
            let symbolic = mine_rules(&d.binarize(), &mining_params(g)?)?;
            let format: RuleFormat = g.format.parse()?;
            with_output(g, |w| write_symbolic_rules(w, &symbolic, d.num_objects(), d.feature_names(), format))
        }
        Command::Compare {
            clustering,
            baseline_minsup,
            baseline_minconf,
        } => {
            let d = load_data(g)?;
            let (rules, _) = mine_clustering(clustering, &d, &mining_params(g)?.into())?;
            let base = MiningParams::new(baseline_minsup.unwrap_or(g.minsup), *baseline_minconf);
            base.validate()?;
            let symbolic = mine_rules(&d.binarize(), &base)?;
            let report = compare_with_baseline(&rules, &symbolic);
            with_output(g, |w| report.write_csv(w))
        }
        Command::Stats { clustering, rules } => {
            let d = load_data(g)?;
            let counts = cluster_counts(clustering, &d)?;
            let file = File::open(rules).map_err(|e| Error::io(rules, e))?;
            let rules = read_rules(BufReader::new(file), d.feature_names(), &rules.display().to_string())?;
            if let Some(r) = rules.iter().find(|r| r.level >= counts.len()) {
                return Err(Error::Dataset(format!(
                    "rule file mentions level {} but the clustering has {} level(s)",
                    r.level,
                    counts.len()
                )));
            }
            let stats = level_stats(&rules, &counts);
            with_output(g, |w| write_stats_csv(w, &stats))
        }
    }
}

fn mining_params(g: &GlobalArgs) -> Result<MiningParams> {
    let p = MiningParams::new(g.minsup, g.minconf);
    p.validate()?;
    Ok(p)
}

fn load_data(g: &GlobalArgs) -> Result<WeightedDataset> {
    let path = g
        .data
        .as_deref()
        .ok_or_else(|| Error::Param("--data is required for this command".into()))?;
    load_dataset(path)
}

/// Matrix CSV for `.csv` files, transaction lines otherwise.
pub fn load_dataset(path: &Path) -> Result<WeightedDataset> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        WeightedDataset::load_matrix_csv(path)
    } else {
        load_transactions(path)
    }
}

fn load_clustering(c: &ClusteringArgs, d: &WeightedDataset) -> Result<Vec<ClusterAssignment>> {
    match (&c.model, &c.assignment) {
        (Some(path), _) => {
            let model = Model::load(path)?;
            model.check_dataset(d)?;
            Ok(model.hierarchy.assignments().cloned().collect())
        }
        (None, Some(path)) => Ok(vec![ClusterAssignment::load_csv(path, d)?]),
        (None, None) => Err(Error::Param("either --model or --assignment is required".into())),
    }
}

fn cluster_counts(c: &ClusteringArgs, d: &WeightedDataset) -> Result<Vec<usize>> {
    Ok(load_clustering(c, d)?.iter().map(ClusterAssignment::num_clusters).collect())
}

fn mine_clustering(
    c: &ClusteringArgs,
    d: &WeightedDataset,
    params: &MarcParams,
) -> Result<(RuleCollection, Vec<usize>)> {
    if let Some(path) = &c.model {
        let model = Model::load(path)?;
        model.check_dataset(d)?;
        let rules = mine(&model.hierarchy, d, params)?;
        return Ok((rules, model.hierarchy.neuron_counts()));
    }
    let levels = load_clustering(c, d)?;
    let rules = mine_assignments(&levels, d, params)?;
    Ok((rules, levels.iter().map(ClusterAssignment::num_clusters).collect()))
}

fn with_output<F>(g: &GlobalArgs, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    match &g.out {
        Some(path) => {
            let file = File::create(path).map_err(|e| Error::io(path, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w)?;
            w.flush().map_err(|e| Error::io(path, e))
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock)
        }
    }
}
