//! `gpdevopt`: fit, predict, benchmark and surface dumps from the command
//! line.

mod data;
mod model_file;
mod report;

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gpdevopt::testbed::{replicate_data, run_benchmark, test_function, BenchmarkOptions, FUNCTION_NAMES};
use gpdevopt::{default_beta_box, fit, DesignSet, DevianceEvaluator, FitOptions, FittedGp, ModelOptions, StrategyId};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use data::{read_table, InputScaling};
use model_file::{ModelFile, MODEL_VERSION};
use report::Format;

#[derive(Parser)]
#[command(name = "gpdevopt", version, about = "Gaussian process emulators fitted by global deviance minimization")]
struct Cli {
    /// Worker threads for benchmarks (GPDEVOPT_THREADS takes precedence).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model to a CSV with columns x1..xd and y.
    Fit(FitArgs),
    /// Predict at the rows of a CSV with columns x1..xd.
    Predict(PredictArgs),
    /// Compare strategies on the test functions.
    Benchmark(BenchmarkArgs),
    /// Dump the deviance or the predictor on a regular grid.
    Surface(SurfaceArgs),
}

#[derive(Args, Clone)]
struct ModelConfig {
    #[arg(long, default_value = "DIRECT-BFGS", value_parser = parse_strategy)]
    strategy: StrategyId,
    /// Smoothness exponent: 2 or 1.99.
    #[arg(long, default_value_t = 2.0, value_parser = parse_p)]
    p: f64,
    /// Expansion factor for the default beta boxes.
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    box_scale: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl ModelConfig {
    fn fit_options(&self) -> FitOptions<f64> {
        let mut o = FitOptions::default();
        o.model.p = self.p;
        o.search.box_scale = self.box_scale;
        o
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    config: ModelConfig,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    points: PathBuf,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Test function name, or `all`.
    #[arg(long)]
    function: String,
    /// Comma-separated strategy labels; all seven when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    strategies: Vec<StrategyId>,
    #[arg(long, default_value_t = 25)]
    replicates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2.0, value_parser = parse_p)]
    p: f64,
    #[arg(long, default_value_t = 1.0, value_parser = parse_positive)]
    box_scale: f64,
    #[arg(long, value_enum, default_value_t = Format::Markdown)]
    format: Format,
    /// Results table; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-replicate CSV.
    #[arg(long)]
    raw: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SurfaceKind {
    Deviance,
    Prediction,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    function: Option<String>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Nodes per dimension.
    #[arg(long, default_value_t = 101)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = SurfaceKind::Deviance)]
    kind: SurfaceKind,
    #[command(flatten)]
    config: ModelConfig,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_strategy(s: &str) -> Result<StrategyId, String> {
    s.parse().map_err(|e: gpdevopt::Error| e.to_string())
}

fn parse_p(s: &str) -> Result<f64, String> {
    match s.trim() {
        "2" | "2.0" => Ok(2.0),
        "1.99" => Ok(1.99),
        _ => Err(format!("p must be 2 or 1.99, got {s}")),
    }
}

fn parse_positive(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
        _ => Err(format!("expected a positive number, got {s}")),
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let env = std::env::var("GPDEVOPT_THREADS").ok();
    let threads = match env {
        Some(v) => Some(v.trim().parse::<usize>().context("GPDEVOPT_THREADS must be a positive integer")?),
        None => flag,
    };
    if let Some(n) = threads {
        if n == 0 {
            bail!("thread count must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// Design in `[0, 1]^d` and the map that produced it.
fn load_design(path: &std::path::Path) -> Result<(DesignSet<f64>, InputScaling)> {
    let table = read_table(path)?;
    let x = table.inputs()?;
    let y = table.outputs()?;
    if y.len() < 2 {
        bail!("need at least two data rows");
    }
    let scaling = InputScaling::fit(&x)?;
    let unit: Vec<Vec<f64>> = x.iter().map(|r| scaling.to_unit(r)).collect();
    let design = DesignSet::from_rows(&unit, y).context("invalid design")?;
    Ok((design, scaling))
}

fn fit_design(design: &DesignSet<f64>, config: &ModelConfig) -> Result<FittedGp<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    fit(design, config.strategy, &config.fit_options(), &mut rng).context("fit failed")
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let (design, scaling) = load_design(&args.data)?;
    let model = fit_design(&design, &args.config)?;
    let file = ModelFile {
        version: MODEL_VERSION,
        strategy: args.config.strategy.to_string(),
        seed: args.config.seed,
        box_scale: args.config.box_scale,
        p: args.config.p,
        condition_exponent: ModelOptions::<f64>::default().condition_exponent,
        beta_star: model.beta_star().to_vec(),
        mu_hat: model.mu_hat(),
        sigma2_hat: model.sigma2_hat(),
        delta: model.delta(),
        deviance: model.deviance(),
        fe_count: model.fe_count(),
        input_scaling: scaling,
        points: design.points().to_rows(),
        outputs: design.outputs().to_vec(),
    };
    file.save(&args.out)?;
    println!("deviance  {}", model.deviance());
    println!("fe        {}", model.fe_count());
    println!("delta_lb  {:e}", model.delta());
    println!("beta_star {:?}", model.beta_star());
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    let model = file.to_model()?;
    let table = read_table(&args.points)?;
    if table.dim() != model.design().dim() {
        bail!("points have {} inputs, model expects {}", table.dim(), model.design().dim());
    }
    let x = table.inputs()?;
    let mut w = csv::Writer::from_writer(data::output(args.out.as_deref())?);
    let mut header = table.headers.clone();
    header.extend(["y_hat".to_string(), "mse".to_string()]);
    w.write_record(&header)?;
    for (i, (row, xi)) in table.rows.iter().zip(&x).enumerate() {
        let p = model.predict(&file.input_scaling.to_unit_clamped(xi, i));
        let mut rec = row.clone();
        rec.extend([p.y_hat.to_string(), p.mse.to_string()]);
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_benchmark(args: BenchmarkArgs) -> Result<()> {
    let names: Vec<&str> = if args.function == "all" {
        FUNCTION_NAMES.to_vec()
    } else {
        vec![args.function.as_str()]
    };
    let strategies = if args.strategies.is_empty() {
        StrategyId::ALL.to_vec()
    } else {
        args.strategies.clone()
    };
    let mut opts = BenchmarkOptions::default();
    opts.fit.model.p = args.p;
    opts.fit.search.box_scale = args.box_scale;

    let mut results = Vec::new();
    let mut records = Vec::new();
    for name in names {
        let f = test_function(name)?;
        info!("benchmark {name}: {} strategies x {} replicates", strategies.len(), args.replicates);
        let out = run_benchmark(&f, &strategies, args.replicates, args.seed, &opts)?;
        results.extend(out.results);
        records.extend(out.records);
    }
    let mut out = data::output(args.out.as_deref())?;
    report::write_results(&mut out, &results, args.format)?;
    out.flush()?;
    if let Some(raw) = &args.raw {
        report::write_records(data::output(Some(raw))?, &records)?;
    }
    Ok(())
}

use std::io::Write as _;

fn grid_axis(lo: f64, hi: f64, nodes: usize) -> Vec<f64> {
    if nodes == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..nodes).map(|i| lo + (hi - lo) * i as f64 / (nodes - 1) as f64).collect()
}

fn cmd_surface(args: SurfaceArgs) -> Result<()> {
    if args.grid == 0 {
        bail!("grid must be positive");
    }
    let (design, scaling) = match (&args.function, &args.data) {
        (Some(name), _) => {
            let f = test_function(name)?;
            let data = replicate_data(&f, args.config.seed, 0, &BenchmarkOptions::default())?;
            let d = f.dim();
            (data.design, InputScaling { lower: vec![0.0; d], upper: vec![1.0; d] })
        }
        (None, Some(path)) => load_design(path)?,
        (None, None) => bail!("either --function or --data is required"),
    };
    let d = design.dim();
    let mut w = csv::Writer::from_writer(data::output(args.out.as_deref())?);
    match args.kind {
        SurfaceKind::Deviance => {
            if d > 2 {
                bail!("deviance surfaces need d <= 2, got d = {d}");
            }
            let b = default_beta_box::<f64>(d).scaled(args.config.box_scale)?;
            let mut opts = ModelOptions::default();
            opts.p = args.config.p;
            let ev = DevianceEvaluator::new(&design, &opts)?;
            let axes: Vec<Vec<f64>> = (0..d).map(|k| grid_axis(b.lower()[k], b.upper()[k], args.grid)).collect();
            let mut header: Vec<String> = (1..=d).map(|k| format!("beta{k}")).collect();
            header.push("L".into());
            w.write_record(&header)?;
            for beta in cartesian(&axes) {
                let mut rec: Vec<String> = beta.iter().map(f64::to_string).collect();
                rec.push(ev.deviance(&beta).to_string());
                w.write_record(&rec)?;
            }
        }
        SurfaceKind::Prediction => {
            if d != 2 {
                bail!("prediction surfaces need d = 2, got d = {d}");
            }
            let model = fit_design(&design, &args.config)?;
            let axes: Vec<Vec<f64>> = (0..d).map(|_| grid_axis(0.0, 1.0, args.grid)).collect();
            w.write_record(["x1", "x2", "y_hat", "mse"])?;
            for z in cartesian(&axes) {
                let p = model.predict(&z);
                let x = scaling.from_unit(&z);
                w.write_record([x[0].to_string(), x[1].to_string(), p.y_hat.to_string(), p.mse.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Predict(a) => cmd_predict(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::Surface(a) => cmd_surface(a),
    }
}
