//! `mci` — feature-importance scoring, comparison and diagnostics over
//! value tables, CSV datasets and external valuation oracles.

mod output;

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mci_core::{
    check_valuation, mkd, ndcg_at_k, rank, robustness_harness, sample_size, BinningMode,
    BinningSpec, CheckOptions, Dataset, Error, ImportanceScores, Method, MethodSpec,
    PacParameters, Ranking, Valuation, ValuationTable, DEFAULT_PERMUTATION_COUNT,
    ENUMERATION_CAP,
};

#[derive(Parser)]
#[command(name = "mci", version, about = "Marginal contribution feature importance toolkit")]
struct Cli {
    /// Worker threads for parallel scoring (output does not depend on this).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score features with one method and print a ranked table.
    Score(ScoreArgs),
    /// Run several methods on one valuation and compare their rankings.
    Compare(CompareArgs),
    /// Duplicate the top feature and measure ranking stability.
    Robustness(RobustnessArgs),
    /// Diagnose an evaluation function (normalization, monotonicity, ...).
    Check(CheckArgs),
    /// PAC sample-size bound for estimating MCI from data.
    SampleSize(SampleSizeArgs),
    /// Materialize a full value table from a dataset or oracle.
    ExportTable(ExportTableArgs),
}

#[derive(Args)]
struct InputArgs {
    /// JSON value-table path ({"n": .., "values": {"0,2": ..}}).
    #[arg(long)]
    table: Option<PathBuf>,

    /// CSV dataset path; header row required.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Target column name for --csv (default: last column).
    #[arg(long, requires = "csv")]
    target: Option<String>,

    /// External oracle command, run as `sh -c CMD` once per subset.
    #[arg(long, requires = "features")]
    oracle: Option<String>,

    /// Feature count when using --oracle.
    #[arg(long)]
    features: Option<usize>,

    /// Bin count for continuous CSV columns.
    #[arg(long, default_value_t = 8)]
    bins: usize,

    /// Binning mode for continuous CSV columns.
    #[arg(long, value_enum, default_value_t = BinningArg::Quantile)]
    binning: BinningArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum BinningArg {
    Quantile,
    Width,
}

#[derive(Args)]
struct MethodArgs {
    /// Context-size bound for mci-k.
    #[arg(long)]
    k: Option<usize>,

    /// Bracket width at which mci-bnb stops deepening.
    #[arg(long, default_value_t = 0.0)]
    tolerance: f64,

    /// Seed for sampled methods.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Permutation count for sampled methods.
    #[arg(long, default_value_t = DEFAULT_PERMUTATION_COUNT)]
    permutations: usize,
}

#[derive(Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Scoring method.
    #[arg(long)]
    method: String,

    #[command(flatten)]
    params: MethodArgs,

    /// Write the score JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Comma-separated list of at least two methods.
    #[arg(long, value_delimiter = ',')]
    method: Vec<String>,

    #[command(flatten)]
    params: MethodArgs,

    /// Prefix lengths for pairwise MKD and NDCG (default: the full length).
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,

    /// Relevant feature ids for NDCG.
    #[arg(long, value_delimiter = ',')]
    relevant: Vec<usize>,

    /// Write the comparison JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RobustnessArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Scoring method.
    #[arg(long)]
    method: String,

    #[command(flatten)]
    params: MethodArgs,

    /// How many copies of the top-ranked feature to add.
    #[arg(long, default_value_t = 3)]
    copies: usize,

    /// Prefix lengths to report (default: 1..=n).
    #[arg(long, value_delimiter = ',')]
    ks: Vec<usize>,

    /// Write the report JSON here; the plot CSV lands next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Also verify k-size and soft k-size submodularity at this k.
    #[arg(long)]
    k: Option<usize>,

    /// Write the monotone closure as a new value table to --out.
    #[arg(long, requires = "out")]
    repair: bool,

    /// Output path: the repaired table with --repair, the report otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleSizeArgs {
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: f64,
    #[arg(long)]
    hypothesis_count: u64,
    #[arg(long)]
    feature_count: u64,
}

#[derive(Args)]
struct ExportTableArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Where to write the value-table JSON.
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    let cli = Cli::parse();
    if let Some(workers) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global();
    }
    if let Err(err) = run(cli.command) {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}

/// Exit codes: 2 config, 3 data, 4 cap, 5 oracle.
fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParameter(_) => 2,
        Error::CapExceeded { .. } => 4,
        Error::OracleFailure { .. } => 5,
        _ => 3,
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Score(args) => cmd_score(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Robustness(args) => cmd_robustness(args),
        Command::Check(args) => cmd_check(args),
        Command::SampleSize(args) => cmd_sample_size(args),
        Command::ExportTable(args) => cmd_export_table(args),
    }
}

/// The loaded valuation plus display names for its features.
struct Loaded {
    valuation: Valuation,
    names: Vec<String>,
}

fn load_valuation(input: &InputArgs) -> Result<Loaded, Error> {
    let sources =
        input.table.is_some() as u8 + input.csv.is_some() as u8 + input.oracle.is_some() as u8;
    if sources != 1 {
        return Err(Error::InvalidParameter(
            "exactly one of --table, --csv, --oracle is required".into(),
        ));
    }
    if let Some(path) = &input.table {
        let table = ValuationTable::from_json_path(path)?;
        let n = table.n();
        return Ok(Loaded {
            valuation: Valuation::from_table(table),
            names: default_names(n),
        });
    }
    if let Some(path) = &input.csv {
        let binning = BinningSpec {
            bins: input.bins,
            mode: match input.binning {
                BinningArg::Quantile => BinningMode::Quantile,
                BinningArg::Width => BinningMode::Width,
            },
        };
        let dataset = Dataset::from_csv_path(path, input.target.as_deref(), binning)?;
        let names = dataset.names()[..dataset.feature_count()].to_vec();
        return Ok(Loaded { valuation: Valuation::mutual_information(dataset), names });
    }
    let command = input.oracle.as_ref().expect("one source is present");
    let n = input
        .features
        .ok_or_else(|| Error::InvalidParameter("--oracle requires --features".into()))?;
    let cache = oracle_cache_path(command, n);
    Ok(Loaded {
        valuation: Valuation::oracle(command, n, Some(cache))?,
        names: default_names(n),
    })
}

fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("f{i}")).collect()
}

/// Cache file under $MCI_CACHE_DIR (default ./.mci-cache), keyed by the
/// command text and feature count.
fn oracle_cache_path(command: &str, n: usize) -> PathBuf {
    let dir = std::env::var_os("MCI_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(".mci-cache"));
    dir.join(format!("oracle-{:016x}-{n}.json", fnv1a(command.as_bytes())))
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

fn parse_method(name: &str) -> Result<Method, Error> {
    name.trim().parse()
}

fn build_spec(method: Method, params: &MethodArgs) -> Result<MethodSpec, Error> {
    Ok(match method {
        Method::MciExact => MethodSpec::MciExact,
        Method::MciK => {
            let k = params
                .k
                .ok_or_else(|| Error::InvalidParameter("mci-k requires --k".into()))?;
            MethodSpec::MciK { k }
        }
        Method::MciBnb => MethodSpec::MciBnb { tolerance: params.tolerance },
        Method::MciSampled => {
            MethodSpec::MciSampled { seed: params.seed, count: sample_count(params)? }
        }
        Method::ShapleyExact => MethodSpec::ShapleyExact,
        Method::ShapleySampled => {
            MethodSpec::ShapleySampled { seed: params.seed, count: sample_count(params)? }
        }
        Method::Ablation => MethodSpec::Ablation,
        Method::Bivariate => MethodSpec::Bivariate,
    })
}

fn emit_json(out: Option<&Path>, json: &serde_json::Value) -> Result<(), Error> {
    let text = format!("{}\n", serde_json::to_string_pretty(json)?);
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_score(args: ScoreArgs) -> Result<(), Error> {
    let loaded = load_valuation(&args.input)?;
    let method = parse_method(&args.method)?;
    let spec = build_spec(method, &args.params)?;
    let scores = spec.score(&loaded.valuation)?;
    eprint!("{}", output::score_table(&scores, &loaded.names));
    emit_json(args.out.as_deref(), &scores.to_json())
}

#[derive(Serialize)]
struct CompareReport {
    n: usize,
    ks: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    methods: Vec<CompareMethod>,
    mkd: Vec<PairwiseMkd>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ndcg: Option<Vec<NdcgRow>>,
}

#[derive(Serialize)]
struct CompareMethod {
    method: Method,
    ranking: Vec<usize>,
    scores: serde_json::Value,
}

#[derive(Serialize)]
struct PairwiseMkd {
    a: Method,
    b: Method,
    k: usize,
    mkd: u64,
}

#[derive(Serialize)]
struct NdcgRow {
    method: Method,
    k: usize,
    ndcg: f64,
}

fn cmd_compare(args: CompareArgs) -> Result<(), Error> {
    let methods: Vec<Method> =
        args.method.iter().map(|m| parse_method(m)).collect::<Result<_, _>>()?;
    if methods.len() < 2 {
        return Err(Error::InvalidParameter("compare needs at least two methods".into()));
    }
    let loaded = load_valuation(&args.input)?;
    let n = loaded.valuation.n();
    let ks = if args.ks.is_empty() { vec![n] } else { args.ks.clone() };
    for &k in &ks {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("prefix length {k} not in 1..={n}")));
        }
    }
    let relevant: HashSet<usize> = args.relevant.iter().copied().collect();
    for &id in &relevant {
        if id >= n {
            return Err(Error::InvalidParameter(format!("relevant id {id} out of range")));
        }
    }

    let mut results: Vec<(Method, ImportanceScores, Ranking)> = Vec::new();
    for &method in &methods {
        let spec = build_spec(method, &args.params)?;
        let scores = spec.score(&loaded.valuation)?;
        let ranking = rank(&scores, None);
        results.push((method, scores, ranking));
    }

    let uses_sampling =
        methods.iter().any(|m| matches!(m, Method::MciSampled | Method::ShapleySampled));
    let universe: Vec<usize> = (0..n).collect();
    let mut pairwise = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            for &k in &ks {
                let d = mkd(&results[i].2.order[..k], &results[j].2.order[..k], &universe)?;
                pairwise.push(PairwiseMkd { a: results[i].0, b: results[j].0, k, mkd: d });
            }
        }
    }
    let ndcg = if relevant.is_empty() {
        None
    } else {
        let mut rows = Vec::new();
        for (method, _, ranking) in &results {
            for &k in &ks {
                rows.push(NdcgRow { method: *method, k, ndcg: ndcg_at_k(ranking, &relevant, k)? });
            }
        }
        Some(rows)
    };

    eprint!("{}", output::compare_table(&results, &pairwise, ndcg.as_deref(), &loaded.names));
    let report = CompareReport {
        n,
        ks,
        seed: uses_sampling.then_some(args.params.seed),
        methods: results
            .into_iter()
            .map(|(method, scores, ranking)| CompareMethod {
                method,
                ranking: ranking.order,
                scores: scores.to_json(),
            })
            .collect(),
        mkd: pairwise,
        ndcg,
    };
    emit_json(args.out.as_deref(), &serde_json::to_value(report)?)
}

fn cmd_robustness(args: RobustnessArgs) -> Result<(), Error> {
    let loaded = load_valuation(&args.input)?;
    let n = loaded.valuation.n();
    let method = parse_method(&args.method)?;
    let spec = build_spec(method, &args.params)?;
    let ks = if args.ks.is_empty() { (1..=n).collect() } else { args.ks.clone() };
    let report = robustness_harness(&loaded.valuation, &spec, args.copies, &ks)?;

    eprint!("{}", output::robustness_table(&report, &loaded.names));
    let csv = report.plot_csv();
    match &args.out {
        Some(path) => {
            emit_json(Some(path), &serde_json::to_value(&report)?)?;
            std::fs::write(path.with_extension("csv"), csv)?;
        }
        None => {
            emit_json(None, &serde_json::to_value(&report)?)?;
            eprint!("{csv}");
        }
    }
    Ok(())
}

fn cmd_check(args: CheckArgs) -> Result<(), Error> {
    let loaded = load_valuation(&args.input)?;
    let report = check_valuation(
        &loaded.valuation,
        CheckOptions { k: args.k, ..Default::default() },
    )?;
    eprint!("{}", output::check_table(&report));
    if args.repair {
        let out = args.out.as_ref().expect("clap enforces --out with --repair");
        let closed = loaded.valuation.monotone_closure()?;
        let n = closed.n();
        let table = ValuationTable::from_fn(n, |s| {
            closed.value(s).expect("closure is table-backed")
        })?;
        table.to_json_path(out)?;
        println!("{}", serde_json::to_string_pretty(&report)?);
        return Ok(());
    }
    emit_json(args.out.as_deref(), &serde_json::to_value(&report)?)
}

fn cmd_sample_size(args: SampleSizeArgs) -> Result<(), Error> {
    let params = PacParameters {
        epsilon: args.epsilon,
        delta: args.delta,
        hypothesis_count: args.hypothesis_count,
        feature_count: args.feature_count,
    };
    let m = sample_size(&params)?;
    let mut json = serde_json::to_value(params)?;
    json["sample_size"] = serde_json::Value::from(m);
    println!("{}", serde_json::to_string_pretty(&json)?);
    Ok(())
}

fn cmd_export_table(args: ExportTableArgs) -> Result<(), Error> {
    let loaded = load_valuation(&args.input)?;
    let n = loaded.valuation.n();
    if n > ENUMERATION_CAP {
        return Err(Error::CapExceeded { n, cap: ENUMERATION_CAP });
    }
    let mut table = ValuationTable::new(n)?;
    for mask in 1..1u64 << n {
        let ids: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let s = mci_core::FeatureSet::from_indices(n, &ids)?;
        table.insert(s, loaded.valuation.value(s)?)?;
    }
    table.to_json_path(&args.out)?;
    eprintln!("wrote {} entries over {n} features to {}", table.len(), args.out.display());
    Ok(())
}
