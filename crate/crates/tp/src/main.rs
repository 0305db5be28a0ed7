use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use tp::benchmark::{run_benchmark, BenchConfig, ModelKind};
use tp::config::StackConfig;
use tp::data::{parse_grid, read_inputs, read_series, series_to_csv, write_atomic};
use tp::diagnose::{diagnose, from_stack, read_pairs, PairCopula};
use tp::error::{CliError, CliResult};
use tp::fetch::{fetch, Dataset};
use tp::fit_parallel;
use tp::model::ModelFile;
use tp_core::probcore::SplitRng;
use tp_core::stack::quantiles;
use tp_core::trainer::{init_pseudo_data, TrainConfig};

#[derive(Parser)]
#[command(name = "tp", version, about = "Transport-process regression for time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a stack on a series and write a model file.
    Fit(FitArgs),
    /// Draw posterior sample paths from a model.
    Sample(SampleArgs),
    /// Print the negative log-likelihood of a series under a model.
    Nll(NllArgs),
    /// Report tail-dependence coefficients of a copula.
    Diagnose(DiagnoseArgs),
    /// Compare WGP and TGP over random train/validation splits.
    Benchmark(BenchmarkArgs),
    /// Write a benchmark dataset as a t,y file.
    Fetch(FetchArgs),
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Overrides `train.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the fit report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    allow_duplicates: bool,
    /// Train in sparse mode with this many pseudo-points, initialized from a
    /// uniform subsample of the training inputs.
    #[arg(long)]
    pseudo_count: Option<usize>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    /// File with a `t` column of prediction inputs.
    #[arg(long, conflicts_with = "grid")]
    inputs: Option<PathBuf>,
    /// Evenly spaced inputs `start:end:count`.
    #[arg(long)]
    grid: Option<String>,
    #[arg(long = "n")]
    n: usize,
    /// Sample file (columns t, sample_id, value).
    #[arg(long)]
    out: PathBuf,
    /// Quantile file (columns t, mean, q025, q50, q975); defaults to
    /// `<out>.quantiles.csv`.
    #[arg(long)]
    quantiles: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct NllArgs {
    #[arg(long)]
    model: PathBuf,
    /// Series to score; defaults to the training data stored in the model.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    allow_duplicates: bool,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long, conflicts_with = "copula")]
    model: Option<PathBuf>,
    /// Pair copula as JSON, e.g. `{"kind":"student_t","theta":1,"rho":0}`.
    #[arg(long)]
    copula: Option<String>,
    /// Two-column file of observed pairs used for the empirical estimates.
    #[arg(long)]
    pairs: Option<PathBuf>,
    #[arg(long, default_value_t = 1_000_000)]
    n_pairs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Inputs whose correlation defines the model's pair copula; defaults to
    /// the first two training inputs.
    #[arg(long, requires = "t2")]
    t1: Option<f64>,
    #[arg(long, requires = "t1")]
    t2: Option<f64>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Dataset name (sunspots, heart, tb3ms) or a t,y file.
    #[arg(long, default_value = "sunspots")]
    dataset: String,
    #[arg(long, default_value = "wgp,tgp")]
    models: String,
    #[arg(long, default_value_t = 10)]
    splits: usize,
    #[arg(long, default_value_t = 0.15)]
    train_frac: f64,
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Training settings as JSON (the `train` section of a config file).
    #[arg(long)]
    train: Option<PathBuf>,
    /// Directory for `benchmark.csv`, `benchmark.txt` and `benchmark.json`.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct FetchArgs {
    #[arg(long)]
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// Download even if a cached or bundled copy exists.
    #[arg(long)]
    refresh: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Sample(a) => cmd_sample(a),
        Command::Nll(a) => cmd_nll(a),
        Command::Diagnose(a) => cmd_diagnose(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Fetch(a) => cmd_fetch(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn cmd_fit(a: FitArgs) -> CliResult<()> {
    let data = read_series(&a.data, a.allow_duplicates)?;
    let mut cfg = StackConfig::load(&a.config)?;
    if let Some(seed) = a.seed {
        cfg.train.seed = seed;
    }
    let mut stack = cfg.stack();
    if let Some(m) = a.pseudo_count {
        let mut rng = SplitRng::new(cfg.train.seed).split(u64::MAX);
        stack = init_pseudo_data(&stack, &data.t, &data.y, m, &mut rng)?;
    }
    let out = fit_parallel(&stack, &data.t, &data.y, &cfg.train)?;
    let fitted = StackConfig::from_stack(&out.stack, cfg.train.clone());
    let model = ModelFile::new(fitted, data, out.report);
    model.save(&a.out)?;
    if let Some(p) = &a.report {
        write_atomic(p, json(&model.report).as_bytes())?;
    }
    println!("final NLL {:.9}", model.report.final_nll);
    println!("model hash {}", model.hash);
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> CliResult<()> {
    if a.n == 0 {
        return Err(CliError::Validation("--n must be positive".into()));
    }
    let model = ModelFile::load(&a.model)?;
    let tbar = match (&a.inputs, &a.grid) {
        (Some(p), _) => read_inputs(p)?,
        (None, Some(g)) => parse_grid(g)?,
        (None, None) => return Err(CliError::Validation("give --inputs or --grid".into())),
    };
    if tbar.is_empty() {
        return Err(CliError::Validation("no prediction inputs".into()));
    }
    let stack = model.config.stack();
    let set = stack
        .posterior_sample(&model.data.t, &model.data.y, &tbar, a.n, &SplitRng::new(a.seed))?
        .with_model_hash(model.hash.clone());
    let mut out = String::from("t,sample_id,value\n");
    for (k, row) in set.samples.iter().enumerate() {
        for (t, v) in tbar.iter().zip(row) {
            out.push_str(&format!("{t},{k},{v}\n"));
        }
    }
    write_atomic(&a.out, out.as_bytes())?;
    let qpath = a.quantiles.unwrap_or_else(|| a.out.with_extension("quantiles.csv"));
    let q = quantiles(&set, &[0.025, 0.5, 0.975])?;
    let mut qs = String::from("t,mean,q025,q50,q975\n");
    for (i, t) in q.tbar.iter().enumerate() {
        let v = &q.values[i];
        qs.push_str(&format!("{t},{},{},{},{}\n", q.mean[i], v[0], v[1], v[2]));
    }
    write_atomic(&qpath, qs.as_bytes())?;
    println!("wrote {} samples at {} inputs (seed {}, model {})", set.len(), tbar.len(), set.seed, set.model_hash);
    Ok(())
}

fn cmd_nll(a: NllArgs) -> CliResult<()> {
    let model = ModelFile::load(&a.model)?;
    let data = match &a.data {
        Some(p) => read_series(p, a.allow_duplicates)?,
        None => model.data.clone(),
    };
    let e = model.config.stack().nll(&data.t, &data.y)?;
    if let Some(r) = e.rejection {
        return Err(CliError::Validation(format!("data outside the model's support: {r}")));
    }
    println!("{:.9}", e.value);
    Ok(())
}

fn cmd_diagnose(a: DiagnoseArgs) -> CliResult<()> {
    let copula = match (&a.model, &a.copula) {
        (Some(p), _) => {
            let m = ModelFile::load(p)?;
            let (t1, t2) = match (a.t1, a.t2) {
                (Some(x), Some(y)) => (x, y),
                _ if m.data.len() >= 2 => (m.data.t[0], m.data.t[1]),
                _ => return Err(CliError::Validation("model has fewer than two inputs; pass --t1/--t2".into())),
            };
            Some(from_stack(&m.config.stack(), t1, t2)?)
        }
        (None, Some(s)) => Some(
            serde_json::from_str::<PairCopula>(s).map_err(|e| CliError::Parse(format!("--copula: {e}")))?,
        ),
        (None, None) => None,
    };
    let pairs = a.pairs.as_deref().map(read_pairs).transpose()?;
    let report = diagnose(copula, pairs, a.n_pairs, a.seed)?;
    if a.json {
        println!("{}", json(&report));
    } else {
        print!("{}", report.to_text());
    }
    Ok(())
}

fn load_dataset(name: &str) -> CliResult<tp::data::Series> {
    match Dataset::parse(name) {
        Ok(d) => Ok(fetch(d, false)?.series),
        Err(_) if Path::new(name).exists() => read_series(Path::new(name), false),
        Err(e) => Err(e),
    }
}

fn cmd_benchmark(a: BenchmarkArgs) -> CliResult<()> {
    let series = load_dataset(&a.dataset)?;
    let train = match &a.train {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?;
            serde_json::from_str::<TrainConfig>(&text).map_err(|e| CliError::Parse(format!("{}: {e}", p.display())))?
        }
        None => TrainConfig::default(),
    };
    let cfg = BenchConfig {
        models: ModelKind::parse_list(&a.models)?,
        splits: a.splits,
        train_frac: a.train_frac,
        samples: a.samples,
        seed: a.seed,
        train,
    };
    let report = run_benchmark(&series, &cfg)?;
    print!("{}", report.to_table());
    if let Some(dir) = &a.out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Parse(format!("{}: {e}", dir.display())))?;
        write_atomic(&dir.join("benchmark.csv"), report.to_csv().as_bytes())?;
        write_atomic(&dir.join("benchmark.txt"), report.to_table().as_bytes())?;
        write_atomic(&dir.join("benchmark.json"), json(&report).as_bytes())?;
    }
    Ok(())
}

fn cmd_fetch(a: FetchArgs) -> CliResult<()> {
    let d = Dataset::parse(&a.name)?;
    let f = fetch(d, a.refresh)?;
    write_atomic(&a.out, series_to_csv(&f.series).as_bytes())?;
    println!("{}: {} rows from {}", d.name(), f.series.len(), f.origin);
    println!("source {}", d.source_url());
    println!("sha256 {}", f.sha256);
    Ok(())
}
