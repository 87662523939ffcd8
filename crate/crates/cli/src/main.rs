mod plan;
mod roster;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gkss::config::load_model;
use gkss::ergm::{glauber_sample, solve_a_star, ErgmModel, GlauberConfig, PhiConvention};
use gkss::graph::{read_edge_list, write_edge_list, Graph};
use gkss::kernels::{gram, min_eigenvalue, KernelSpec};
use gkss::rng;
use serde::Serialize;

use plan::{CsvSink, ExperimentPlan};
use roster::{TestKind, TestParams};

/// Kernel Stein goodness-of-fit tests for exponential random graph models.
#[derive(Parser)]
#[command(name = "gkss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one test on observed edge lists and print the report as JSON.
    Test(TestArgs),
    /// Run a power-curve plan and write CSV.
    Power(PowerArgs),
    /// Solve for the edge probability of the approximating Bernoulli graph.
    Astar(AstarArgs),
    /// Simulate networks from a model and write them as edge lists.
    Sample(SampleArgs),
    /// Report the smallest Gram eigenvalue on random graphs.
    GramCheck(GramArgs),
}

#[derive(Args)]
struct SamplerArgs {
    /// Sweeps discarded before the first sample.
    #[arg(long, default_value_t = GlauberConfig::default().burn_in)]
    burn_in: usize,
    /// Sweeps between samples.
    #[arg(long, default_value_t = GlauberConfig::default().thin)]
    thin: usize,
}

impl SamplerArgs {
    fn config(&self) -> GlauberConfig {
        GlauberConfig { burn_in: self.burn_in, thin: self.thin }
    }
}

#[derive(Args)]
struct TestArgs {
    /// Edge-list file; repeat for the multi-sample tests.
    #[arg(long = "graph", required = true)]
    graphs: Vec<PathBuf>,
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value = "gkss")]
    test: TestKind,
    #[arg(long, default_value_t = KernelSpec::default())]
    kernel: KernelSpec,
    #[arg(long = "B", default_value_t = 100)]
    b: usize,
    #[arg(long, default_value_t = 200)]
    m: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Independent reruns with consecutive seeds; prints one report per line.
    #[arg(long, default_value_t = 1)]
    reps: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    sampler: SamplerArgs,
}

#[derive(Args)]
struct PowerArgs {
    plan: PathBuf,
    /// Overrides the plan's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    Tanh,
    Sigmoid,
}

impl From<Convention> for PhiConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Tanh => PhiConvention::TanhHalf,
            Convention::Sigmoid => PhiConvention::Sigmoid,
        }
    }
}

#[derive(Args)]
struct AstarArgs {
    #[arg(long)]
    model: PathBuf,
    /// Both conventions when absent.
    #[arg(long)]
    convention: Option<Convention>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long, default_value_t = 1)]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    sampler: SamplerArgs,
}

#[derive(Args)]
struct GramArgs {
    /// Repeat to check several kernels.
    #[arg(long = "kernel", required = true)]
    kernels: Vec<KernelSpec>,
    #[arg(long, default_value_t = 12)]
    n: usize,
    #[arg(long, default_value_t = 10)]
    count: usize,
    /// Edge probability of the random graphs.
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tolerance: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn read_model(path: &Path) -> Result<ErgmModel> {
    load_model(path).with_context(|| format!("model {}", path.display()))
}

fn cmd_test(args: TestArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let graphs = args
        .graphs
        .iter()
        .map(|p| {
            let g = read_edge_list(p).with_context(|| format!("reading {}", p.display()))?;
            if g.n() != model.n() {
                bail!("{} has n = {}, model has n = {}", p.display(), g.n(), model.n());
            }
            Ok(g)
        })
        .collect::<Result<Vec<Graph>>>()?;
    let params = TestParams {
        b: args.b,
        m: args.m,
        alpha: args.alpha,
        kernel: args.kernel.to_string(),
        observations: graphs.len(),
        ..TestParams::new(args.test)
    };
    params.validate()?;
    let mut out = output(args.out.as_deref())?;
    for rep in 0..args.reps {
        let report = params.run(&model, &graphs, args.seed + rep, args.sampler.config())?;
        serde_json::to_writer(&mut out, &report)?;
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_power(args: PowerArgs) -> Result<()> {
    let mut plan = ExperimentPlan::read(&args.plan)?;
    if args.out.is_some() {
        plan.out = args.out;
    }
    let mut csv = CsvSink::new(output(plan.out.as_deref())?);
    let mut reports = plan.reports.as_deref().map(|p| output(Some(p))).transpose()?;
    plan.run(args.plan.parent(), |rows, trials| {
        csv.write(rows)?;
        if let Some(out) = reports.as_mut() {
            for r in trials.iter().flatten() {
                serde_json::to_writer(&mut *out, r)?;
                writeln!(out)?;
            }
            out.flush()?;
        }
        Ok(())
    })?;
    Ok(())
}

#[derive(Serialize)]
struct AstarRecord {
    model: String,
    results: Vec<gkss::ergm::ErApproximation>,
}

fn cmd_astar(args: AstarArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let conventions = match args.convention {
        Some(c) => vec![c.into()],
        None => vec![PhiConvention::TanhHalf, PhiConvention::Sigmoid],
    };
    let results = conventions
        .into_iter()
        .map(|c| solve_a_star(&model, c, 1e-12, 10_000))
        .collect::<gkss::Result<Vec<_>>>()?;
    if results[0].assumption1_margin < 0.0 {
        eprintln!(
            "warning: Assumption 1 margin is {:.4} < 0; the fixed point may not be unique",
            results[0].assumption1_margin
        );
    }
    let record = AstarRecord { model: args.model.display().to_string(), results };
    let mut out = output(args.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &record)?;
    writeln!(out)?;
    Ok(())
}

fn cmd_sample(args: SampleArgs) -> Result<()> {
    let model = read_model(&args.model)?;
    let cfg = args.sampler.config();
    let graphs = glauber_sample(&model, args.m, cfg.burn_in, cfg.thin, args.seed)?;
    std::fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let width = args.m.saturating_sub(1).to_string().len().max(4);
    for (i, g) in graphs.iter().enumerate() {
        let path = args.out.join(format!("sample_{i:0width$}.txt"));
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        let mut w = BufWriter::new(file);
        write_edge_list(g, &mut w)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(Serialize)]
struct GramRecord {
    kernel: String,
    min_eigenvalue: f64,
    max_diagonal: f64,
    psd: bool,
}

fn cmd_gram_check(args: GramArgs) -> Result<()> {
    if args.count == 0 {
        bail!("count must be at least 1");
    }
    let mut rng = rng::stream(args.seed, 0);
    let graphs: Vec<Graph> = (0..args.count).map(|_| Graph::erdos_renyi(args.n, args.p, &mut rng)).collect();
    let mut out = output(args.out.as_deref())?;
    let mut all_psd = true;
    for spec in &args.kernels {
        let k = gram(spec, &graphs).with_context(|| format!("kernel {spec}"))?;
        let min = min_eigenvalue(&k);
        let record = GramRecord {
            kernel: spec.to_string(),
            min_eigenvalue: min,
            max_diagonal: k.diagonal().max(),
            psd: min >= -args.tolerance,
        };
        all_psd &= record.psd;
        serde_json::to_writer(&mut out, &record)?;
        writeln!(out)?;
    }
    out.flush()?;
    if !all_psd {
        bail!("a Gram matrix has an eigenvalue below -{}", args.tolerance);
    }
    Ok(())
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("GKSS_THREADS") {
        let n: usize = v.parse().with_context(|| format!("GKSS_THREADS=`{v}`"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::Test(a) => cmd_test(a),
        Command::Power(a) => cmd_power(a),
        Command::Astar(a) => cmd_astar(a),
        Command::Sample(a) => cmd_sample(a),
        Command::GramCheck(a) => cmd_gram_check(a),
    }
}
