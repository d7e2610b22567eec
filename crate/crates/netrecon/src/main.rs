use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use netrecon::chains::sample_posterior;
use netrecon::config::ExperimentConfig;
use netrecon::experiment::run_grid;
use netrecon::report::{evaluate, summarize};
use netrecon::{io, output_path};
use netrecon_core::calibrate::{match_contagion, CalibrationTarget, ContagionFamily, IntensityStatistic};
use netrecon_core::dynamics::{simulate, DynamicsParams};
use netrecon_core::inference::{EdgeTally, Hyperparameters, McmcConfig};
use netrecon_core::metrics::spectral_radius;
use netrecon_core::netgen::NetworkModelSpec;
use netrecon_core::rng::{seeded, stream};
use rand::Rng;
use serde_json::json;

#[derive(Parser)]
#[command(
    name = "netrecon",
    version,
    about = "Reconstruct networks from binary contagion traces",
    after_help = "Relative output paths are resolved against $NETRECON_OUTPUT_DIR when it is set."
)]
struct Cli {
    /// Base random seed. For `experiment` it overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reuse finished cells of an earlier `experiment` run in the same directory.
    #[arg(long, global = true)]
    resume: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random network and write it as an edge list plus a JSON sidecar.
    Generate(GenerateArgs),
    /// Simulate the contagion on a network and write the state matrix as CSV.
    Simulate(SimulateArgs),
    /// Sample the network posterior of a state matrix.
    Infer(InferArgs),
    /// Score posterior samples against the true network.
    Evaluate(EvaluateArgs),
    /// Tune a contagion's beta to match a simple contagion's intensity.
    Calibrate(CalibrateArgs),
    /// Run a full experiment grid from a TOML config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    ErdosRenyi,
    PowerlawCm,
    Clustered,
    SmallWorld,
    Sbm2,
    Zkc,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct GenerateArgs {
    #[arg(long, value_enum)]
    model: Model,
    /// Number of nodes.
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability (erdos-renyi) or rewiring probability (small-world).
    #[arg(long)]
    p: Option<f64>,
    /// Degree exponent of the power law.
    #[arg(long)]
    alpha: Option<f64>,
    /// Number of type-1 nodes of the clustered model.
    #[arg(long)]
    n_type1: Option<usize>,
    /// Clique size of the clustered model.
    #[arg(long)]
    s: Option<usize>,
    /// Ring degree of the small-world model.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    mean_degree: Option<f64>,
    /// Block separation of the two-block model, in [-1, 1].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Edge list to write; the sidecar gets a `.json` extension.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Simple,
    Threshold,
    Mixture,
}

#[derive(Args)]
struct ContagionArgs {
    #[arg(long, value_enum, default_value = "simple")]
    contagion: Kind,
    #[arg(long)]
    beta: f64,
    /// Threshold of the threshold and mixture contagions.
    #[arg(long, default_value_t = 2)]
    tau: usize,
    /// Weight of the simple part of the mixture contagion.
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
}

impl ContagionArgs {
    fn family(&self) -> ContagionFamily {
        family(self.contagion, self.tau, self.omega)
    }
}

fn family(kind: Kind, tau: usize, omega: f64) -> ContagionFamily {
    match kind {
        Kind::Simple => ContagionFamily::Simple,
        Kind::Threshold => ContagionFamily::Threshold { tau },
        Kind::Mixture => ContagionFamily::Mixture { omega, tau },
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Statistic {
    /// Mean over traces of the busiest node's count.
    MeanOfMax,
    /// Busiest node's mean count over traces.
    MaxOfMean,
}

#[derive(Args)]
struct InitialArgs {
    /// Infect each node at t = 0 with this probability instead of infecting all.
    #[arg(long)]
    initial_fraction: Option<f64>,
}

impl InitialArgs {
    fn draw<R: Rng>(&self, n: usize, rng: &mut R) -> Result<Vec<u8>> {
        Ok(match self.initial_fraction {
            None => vec![1; n],
            Some(f) if (0.0..=1.0).contains(&f) => (0..n).map(|_| rng.random_bool(f) as u8).collect(),
            Some(f) => bail!("--initial-fraction must lie in [0, 1], got {f}"),
        })
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// Edge list of the network.
    #[arg(long)]
    graph: PathBuf,
    /// Recovery probability.
    #[arg(long)]
    gamma: f64,
    #[command(flatten)]
    contagion: ContagionArgs,
    /// Number of transitions; the CSV has steps + 1 rows.
    #[arg(long)]
    steps: usize,
    #[command(flatten)]
    initial: InitialArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct InferArgs {
    /// State matrix CSV.
    #[arg(long)]
    states: PathBuf,
    /// True network; if given, parameter posteriors are conditioned on it.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    burn_in: u64,
    #[arg(long, default_value_t = 25)]
    thinning: u64,
    /// Retained samples per chain.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 4)]
    chains: usize,
    #[arg(long, default_value_t = 0.5)]
    init_density: f64,
    #[arg(long, default_value_t = 0.5)]
    hdpi_mass: f64,
    /// Directory for samples.jsonl and summary.json.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    truth: PathBuf,
    /// samples.jsonl written by `infer`.
    #[arg(long)]
    samples: PathBuf,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    gamma: f64,
    /// Beta of the simple contagion whose intensity is matched.
    #[arg(long)]
    reference_beta: f64,
    /// Contagion to tune.
    #[arg(long, value_enum, default_value = "threshold")]
    contagion: Kind,
    #[arg(long, default_value_t = 2)]
    tau: usize,
    #[arg(long, default_value_t = 0.5)]
    omega: f64,
    #[arg(long)]
    steps: usize,
    /// Simulations of the reference contagion.
    #[arg(long, default_value_t = 100)]
    replicates: usize,
    /// Simulations per Robbins-Monro iteration.
    #[arg(long, default_value_t = 4)]
    batch: usize,
    #[arg(long, default_value_t = 200)]
    max_iterations: usize,
    /// Reduction of per-node infection counts to one intensity.
    #[arg(long, value_enum, default_value = "mean-of-max")]
    statistic: Statistic,
    /// Step on raw residuals instead of residuals relative to the reference.
    #[arg(long)]
    absolute_residuals: bool,
    #[command(flatten)]
    initial: InitialArgs,
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment config (TOML). Defaults to the karate club sweep.
    #[arg(long, conflicts_with = "write_config")]
    config: Option<PathBuf>,
    /// Write the default config to this path and exit.
    #[arg(long)]
    write_config: Option<PathBuf>,
    /// Output directory.
    #[arg(short, long, required_unless_present = "write_config")]
    output: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("setting up the thread pool")?;
    }
    let seed = cli.seed.unwrap_or(0);
    match cli.command {
        Command::Generate(a) => generate(a, seed),
        Command::Simulate(a) => run_simulate(a, seed),
        Command::Infer(a) => infer(a, seed),
        Command::Evaluate(a) => run_evaluate(a),
        Command::Calibrate(a) => calibrate(a, seed),
        Command::Experiment(a) => experiment(a, cli.seed, cli.resume),
    }
}

fn need<T>(v: Option<T>, flag: &str, model: &str) -> Result<T> {
    v.with_context(|| format!("--{flag} is required for {model}"))
}

fn generate(a: GenerateArgs, seed: u64) -> Result<()> {
    let spec = match a.model {
        Model::ErdosRenyi => NetworkModelSpec::ErdosRenyi {
            n: need(a.n, "n", "erdos-renyi")?,
            p: need(a.p, "p", "erdos-renyi")?,
        },
        Model::PowerlawCm => NetworkModelSpec::PowerlawCm {
            n: need(a.n, "n", "powerlaw-cm")?,
            alpha: need(a.alpha, "alpha", "powerlaw-cm")?,
        },
        Model::Clustered => NetworkModelSpec::Clustered {
            n_type1: need(a.n_type1, "n-type1", "clustered")?,
            s: need(a.s, "s", "clustered")?,
        },
        Model::SmallWorld => NetworkModelSpec::SmallWorld {
            n: need(a.n, "n", "small-world")?,
            k: need(a.k, "k", "small-world")?,
            p: need(a.p, "p", "small-world")?,
        },
        Model::Sbm2 => NetworkModelSpec::Sbm2 {
            n: need(a.n, "n", "sbm2")?,
            mean_degree: need(a.mean_degree, "mean-degree", "sbm2")?,
            epsilon: need(a.epsilon, "epsilon", "sbm2")?,
        },
        Model::Zkc => NetworkModelSpec::Zkc,
    };
    let g = spec.generate(&mut seeded(seed))?;
    let out = output_path(&a.output);
    io::save_edge_list(&out, &g)?;
    let sidecar = json!({
        "spec": spec,
        "seed": seed,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "spectral_radius": spectral_radius(&g)?,
    });
    io::save_json(&out.with_extension("json"), &sidecar)?;
    eprintln!("{} nodes, {} edges -> {}", g.node_count(), g.edge_count(), out.display());
    Ok(())
}

fn run_simulate(a: SimulateArgs, seed: u64) -> Result<()> {
    let g = io::load_edge_list(&output_path(&a.graph), None)?;
    let params = DynamicsParams::new(a.gamma, a.contagion.family().with_beta(a.contagion.beta)?)?;
    let x0 = a.initial.draw(g.node_count(), &mut stream(seed, &[0]))?;
    let x = simulate(&g, &params, &x0, a.steps, &mut stream(seed, &[1]))?;
    let out = output_path(&a.output);
    io::save_states_csv(&out, &x)?;
    let prevalence = x.prevalence();
    eprintln!(
        "final prevalence {:.3} -> {}",
        prevalence.last().copied().unwrap_or(0.0),
        out.display()
    );
    Ok(())
}

fn infer(a: InferArgs, seed: u64) -> Result<()> {
    let x = io::load_states_csv(&output_path(&a.states))?;
    let n = x.node_count();
    let truth = a
        .truth
        .as_deref()
        .map(|p| io::load_edge_list(&output_path(p), Some(n)))
        .transpose()?;
    let config = McmcConfig {
        burn_in: a.burn_in,
        thinning: a.thinning,
        n_samples: a.samples,
        n_chains: a.chains,
        init_density: a.init_density,
    };
    let hyper = Hyperparameters::uniform(n);
    let posterior = sample_posterior(&x, &hyper, &config, seed)?;
    let dir = output_path(&a.output);
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    io::save_samples_jsonl(&dir.join("samples.jsonl"), &posterior.samples)?;
    let summary = summarize(&x, &posterior, &hyper, &config, seed, truth.as_ref(), a.hdpi_mass)?;
    io::save_json(&dir.join("summary.json"), &summary)?;
    eprintln!(
        "{} samples, expected density {:.4} -> {}",
        summary.total_samples,
        summary.expected_density,
        dir.display()
    );
    Ok(())
}

fn run_evaluate(a: EvaluateArgs) -> Result<()> {
    let truth = io::load_edge_list(&output_path(&a.truth), None)?;
    let records = io::load_samples_jsonl(&output_path(&a.samples))?;
    if records.is_empty() {
        bail!("{} holds no samples", a.samples.display());
    }
    let mut tally = EdgeTally::new(truth.node_count());
    for r in &records {
        let g = r.graph()?;
        if g.node_count() != truth.node_count() {
            bail!(
                "sample has {} nodes but the true network has {}",
                g.node_count(),
                truth.node_count()
            );
        }
        tally.add(&g);
    }
    let e = evaluate(&tally.matrix(), tally.densities(), &truth)?;
    let out = output_path(&a.output);
    io::save_json(&out, &e.to_flat_json())?;
    eprintln!("AUROC {:.4}, phi_rho {:.4} -> {}", e.auroc, e.phi_rho, out.display());
    Ok(())
}

fn calibrate(a: CalibrateArgs, seed: u64) -> Result<()> {
    let g = io::load_edge_list(&output_path(&a.graph), None)?;
    let reference = DynamicsParams::new(a.gamma, ContagionFamily::Simple.with_beta(a.reference_beta)?)?;
    let template = family(a.contagion, a.tau, a.omega);
    let x0 = a.initial.draw(g.node_count(), &mut stream(seed, &[0]))?;
    let settings = CalibrationTarget {
        max_iterations: a.max_iterations,
        batch: a.batch,
        statistic: match a.statistic {
            Statistic::MeanOfMax => IntensityStatistic::MeanOfMax,
            Statistic::MaxOfMean => IntensityStatistic::MaxOfMean,
        },
        relative: !a.absolute_residuals,
        ..CalibrationTarget::default()
    };
    let cal = match_contagion(
        &g,
        &reference,
        template,
        &x0,
        a.steps,
        a.replicates,
        &settings,
        &mut stream(seed, &[2]),
    )?;
    let out = output_path(&a.output);
    io::save_json(
        &out,
        &json!({ "seed": seed, "template": template, "reference_beta": a.reference_beta, "gamma": a.gamma, "steps": a.steps, "result": cal }),
    )?;
    eprintln!(
        "beta {:.5} ({}converged after {} iterations) -> {}",
        cal.beta,
        if cal.converged { "" } else { "not " },
        cal.iterations,
        out.display()
    );
    Ok(())
}

fn experiment(a: ExperimentArgs, seed: Option<u64>, resume: bool) -> Result<()> {
    if let Some(path) = a.write_config {
        let path = output_path(&path);
        io::write_atomic(&path, ExperimentConfig::karate_sweep().to_toml()?.as_bytes())?;
        eprintln!("wrote {}", path.display());
        return Ok(());
    }
    let mut config = match &a.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::karate_sweep(),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    let dir = output_path(a.output.as_deref().unwrap_or(Path::new(".")));
    let out = run_grid(&config, &dir, resume)?;
    eprintln!(
        "{} cells ({} resumed, {} failed) -> {}",
        out.cells.len() + out.failed.len(),
        out.resumed,
        out.failed.len(),
        dir.display()
    );
    for (id, err) in &out.failed {
        eprintln!("cell {id} failed: {err}");
    }
    if !out.failed.is_empty() {
        bail!("{} of the cells failed; see above", out.failed.len());
    }
    Ok(())
}
