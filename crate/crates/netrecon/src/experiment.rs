//! Grid runner: generate, simulate, reconstruct and score every cell.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use netrecon_core::calibrate::match_contagion;
use netrecon_core::dynamics::{simulate, DynamicsParams};
use netrecon_core::metrics::spectral_radius;
use netrecon_core::netgen::NetworkModelSpec;
use netrecon_core::rng::{derive_seed, stream};
use netrecon_core::Adjacency;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chains::tally_posterior;
use crate::config::{CalibrationScope, ConfigError, ExperimentConfig, InitialCondition};
use crate::io::{self, IoError};
use crate::plot::{line_chart_svg, Heatmap, Series};
use crate::report::{evaluate, Evaluation};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Model(#[from] netrecon_core::Error),
    #[error("cell {cell}: all {repetitions} repetitions failed; first error: {first}")]
    AllFailed {
        cell: String,
        repetitions: usize,
        first: String,
    },
    #[error("{} holds a different config; rerun without --resume or pick another directory", path.display())]
    ConfigMismatch { path: PathBuf },
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

// Seed roles below the (cell, repetition) prefix.
const ROLE_NETWORK: u64 = 0;
const ROLE_SIMULATION: u64 = 1;
const ROLE_CALIBRATION: u64 = 2;
const ROLE_SAMPLER: u64 = 3;
const ROLE_INITIAL: u64 = 4;

/// Stable key of a contagion label, so seeds follow the contagion rather
/// than its position in the config.
fn label_key(label: &str) -> u64 {
    label
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
            (h ^ b as u64).wrapping_mul(0x0100_0000_01b3)
        })
}

/// Position of a cell along the network, beta and steps axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellCoords {
    pub axis: usize,
    pub beta: usize,
    pub steps: usize,
}

impl CellCoords {
    pub fn id(&self) -> String {
        format!("a{}_b{}_t{}", self.axis, self.beta, self.steps)
    }

    fn seed_path(&self) -> [u64; 3] {
        [self.axis as u64, self.beta as u64, self.steps as u64]
    }
}

/// All cells in axis-major order.
pub fn cells(config: &ExperimentConfig) -> Vec<CellCoords> {
    let mut out = Vec::with_capacity(config.cell_count());
    for axis in 0..config.axis_len() {
        for beta in 0..config.beta.len() {
            for steps in 0..config.steps.len() {
                out.push(CellCoords { axis, beta, steps });
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContagionOutcome {
    pub label: String,
    pub beta: f64,
    pub extinct: bool,
    pub mean_prevalence: f64,
    pub acceptance_rate: f64,
    pub evaluation: Evaluation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionResult {
    pub repetition: usize,
    pub edges: usize,
    // Network fields are empty when the repetition failed.
    pub density: Option<f64>,
    pub spectral_radius: Option<f64>,
    /// `beta * sigma / gamma` for the cell's reference `beta`.
    pub r0: Option<f64>,
    pub outcomes: Vec<ContagionOutcome>,
    /// Second contagion minus first.
    pub delta_auroc: Option<f64>,
    pub delta_phi_rho: Option<f64>,
    pub delta_phi_by_coreness: BTreeMap<usize, f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRecord {
    pub label: String,
    pub beta: f64,
    pub converged: bool,
    pub iterations: usize,
    pub reference_value: f64,
    /// Repetition whose network was used; `None` for per-cell and global runs.
    pub repetition: Option<usize>,
}

/// Median and highest-density interval of a set of repetition values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub hdpi: [f64; 2],
    /// Share of values above zero.
    pub positive_fraction: f64,
}

impl Aggregate {
    pub fn of(values: &[f64], mass: f64) -> Option<Self> {
        let mut v: Vec<f64> = values.iter().copied().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            0.5 * (v[n / 2 - 1] + v[n / 2])
        };
        // Shortest window holding `mass` of the sorted values.
        let k = ((mass * n as f64).ceil() as usize).clamp(1, n);
        let start = (0..=n - k)
            .min_by(|&a, &b| (v[a + k - 1] - v[a]).total_cmp(&(v[b + k - 1] - v[b])))
            .unwrap_or(0);
        Some(Self {
            count: n,
            mean: v.iter().sum::<f64>() / n as f64,
            median,
            hdpi: [v[start], v[start + k - 1]],
            positive_fraction: v.iter().filter(|&&x| x > 0.0).count() as f64 / n as f64,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub id: String,
    pub coords: CellCoords,
    pub network: NetworkModelSpec,
    pub axis_parameter: Option<String>,
    pub axis_value: Option<f64>,
    pub beta: f64,
    pub steps: usize,
    pub gamma: f64,
    pub calibrations: Vec<CalibrationRecord>,
    pub repetitions: Vec<RepetitionResult>,
    pub failures: usize,
    pub r0_mean: f64,
    pub auroc: BTreeMap<String, Aggregate>,
    pub phi_rho: BTreeMap<String, Aggregate>,
    pub delta_auroc: Option<Aggregate>,
    pub delta_phi_rho: Option<Aggregate>,
    pub delta_phi_by_coreness: BTreeMap<usize, Aggregate>,
    /// Wall-clock time; the only field that differs between identical runs.
    pub runtime_seconds: f64,
}

fn initial_state(config: &ExperimentConfig, n: usize, path: &[u64]) -> Vec<u8> {
    match config.initial {
        InitialCondition::AllInfected => vec![1; n],
        InitialCondition::Random { fraction } => {
            let mut rng = stream(config.seed, path);
            (0..n).map(|_| rng.random_bool(fraction) as u8).collect()
        }
    }
}

/// Generates repetition `rep`'s network of the cell at `coords`.
fn network(config: &ExperimentConfig, coords: CellCoords, rep: usize) -> Result<Adjacency> {
    let spec = config.network_at(coords.axis)?;
    let [a, b, t] = coords.seed_path();
    let mut rng = stream(config.seed, &[a, b, t, rep as u64, ROLE_NETWORK]);
    Ok(spec.generate(&mut rng)?)
}

/// Tunes `beta` of every matched contagion on `a`.
fn calibrate_on(
    config: &ExperimentConfig,
    a: &Adjacency,
    beta: f64,
    steps: usize,
    path: &[u64],
    repetition: Option<usize>,
) -> Result<Vec<CalibrationRecord>> {
    let reference = config.reference().expect("validated");
    let ref_params = DynamicsParams::new(config.gamma, reference.family.with_beta(beta)?)?;
    let mut out = Vec::new();
    for c in config.contagions.iter().filter(|c| c.matched) {
        let mut p = path.to_vec();
        p.extend([ROLE_CALIBRATION, label_key(&c.label)]);
        let mut init = p.clone();
        init.push(ROLE_INITIAL);
        let x0 = initial_state(config, a.node_count(), &init);
        let mut rng = stream(config.seed, &p);
        let cal = match_contagion(
            a,
            &ref_params,
            c.family,
            &x0,
            steps,
            config.calibration.reference_replicates,
            &config.calibration.target,
            &mut rng,
        )?;
        out.push(CalibrationRecord {
            label: c.label.clone(),
            beta: cal.beta,
            converged: cal.converged,
            iterations: cal.iterations,
            reference_value: cal.reference_value,
            repetition,
        });
    }
    Ok(out)
}

/// Calibrations shared by all repetitions of a cell.
fn cell_calibrations(config: &ExperimentConfig, coords: CellCoords) -> Result<Vec<CalibrationRecord>> {
    if !config.contagions.iter().any(|c| c.matched) {
        return Ok(Vec::new());
    }
    let beta = config.beta[coords.beta];
    let steps = config.steps[coords.steps];
    match config.calibration.scope {
        CalibrationScope::None | CalibrationScope::PerRepetition => Ok(Vec::new()),
        CalibrationScope::PerCell => {
            let a = network(config, coords, 0)?;
            calibrate_on(config, &a, beta, steps, &coords.seed_path(), None)
        }
        CalibrationScope::Global => {
            let first = CellCoords { axis: 0, ..coords };
            let a = network(config, first, 0)?;
            calibrate_on(config, &a, beta, steps, &first.seed_path(), None)
        }
    }
}

fn run_repetition(
    config: &ExperimentConfig,
    coords: CellCoords,
    rep: usize,
    shared: &[CalibrationRecord],
) -> Result<(RepetitionResult, Vec<CalibrationRecord>)> {
    let beta = config.beta[coords.beta];
    let steps = config.steps[coords.steps];
    let a = network(config, coords, rep)?;
    let sigma = spectral_radius(&a)?;
    let [ca, cb, ct] = coords.seed_path();
    let prefix = [ca, cb, ct, rep as u64];
    let own = if config.calibration.scope == CalibrationScope::PerRepetition
        && config.contagions.iter().any(|c| c.matched)
    {
        calibrate_on(config, &a, beta, steps, &prefix, Some(rep))?
    } else {
        Vec::new()
    };
    let calibrated = |label: &str| {
        own.iter()
            .chain(shared)
            .find(|c| c.label == label)
            .map(|c| c.beta)
    };
    let mut init = prefix.to_vec();
    init.push(ROLE_INITIAL);
    let x0 = initial_state(config, a.node_count(), &init);
    let hyper = config.hyperparameters(a.node_count());
    let mut outcomes = Vec::with_capacity(config.contagions.len());
    for c in &config.contagions {
        let key = label_key(&c.label);
        let b = if c.matched {
            calibrated(&c.label).expect("matched contagions are calibrated")
        } else {
            beta
        };
        let params = DynamicsParams::new(config.gamma, c.family.with_beta(b)?)?;
        let mut rng = stream(config.seed, &[ca, cb, ct, rep as u64, ROLE_SIMULATION, key]);
        let x = simulate(&a, &params, &x0, steps, &mut rng)?;
        let extinct = x.row(steps).iter().all(|&s| s == 0);
        if extinct && config.discard_extinct {
            return Err(ExperimentError::Model(netrecon_core::Error::Empty(
                "infections (trace went extinct)",
            )));
        }
        let prevalence = x.prevalence();
        let mean_prevalence = prevalence.iter().sum::<f64>() / prevalence.len() as f64;
        let sampler_seed = derive_seed(config.seed, &[ca, cb, ct, rep as u64, ROLE_SAMPLER, key]);
        let (tally, diagnostics) = tally_posterior(&x, &hyper, &config.mcmc, sampler_seed)?;
        let evaluation = evaluate(&tally.matrix(), tally.densities(), &a)?;
        let acceptance_rate = diagnostics.iter().map(|d| d.acceptance_rate()).sum::<f64>()
            / diagnostics.len() as f64;
        outcomes.push(ContagionOutcome {
            label: c.label.clone(),
            beta: b,
            extinct,
            mean_prevalence,
            acceptance_rate,
            evaluation,
        });
    }
    let (delta_auroc, delta_phi_rho, delta_phi_by_coreness) = match outcomes.as_slice() {
        [first, second] => {
            let (e1, e2) = (&first.evaluation, &second.evaluation);
            let by_core = e1
                .phi_by_coreness
                .iter()
                .filter_map(|(k, v)| e2.phi_by_coreness.get(k).map(|w| (*k, w - v)))
                .collect();
            (
                Some(e2.auroc - e1.auroc),
                Some(e2.phi_rho - e1.phi_rho),
                by_core,
            )
        }
        _ => (None, None, BTreeMap::new()),
    };
    Ok((
        RepetitionResult {
            repetition: rep,
            edges: a.edge_count(),
            density: Some(a.density()),
            spectral_radius: Some(sigma),
            r0: Some(beta * sigma / config.gamma),
            outcomes,
            delta_auroc,
            delta_phi_rho,
            delta_phi_by_coreness,
            error: None,
        },
        own,
    ))
}

fn failed_repetition(rep: usize, err: &ExperimentError) -> RepetitionResult {
    RepetitionResult {
        repetition: rep,
        edges: 0,
        density: None,
        spectral_radius: None,
        r0: None,
        outcomes: Vec::new(),
        delta_auroc: None,
        delta_phi_rho: None,
        delta_phi_by_coreness: BTreeMap::new(),
        error: Some(err.to_string()),
    }
}

/// Runs every repetition of one cell. Individual repetition failures are
/// recorded; the cell fails only if all of them do.
pub fn run_cell(config: &ExperimentConfig, coords: CellCoords) -> Result<CellResult> {
    config.validate()?;
    let start = Instant::now();
    let mut calibrations = cell_calibrations(config, coords)?;
    let runs: Vec<(RepetitionResult, Vec<CalibrationRecord>)> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            run_repetition(config, coords, rep, &calibrations)
                .unwrap_or_else(|e| (failed_repetition(rep, &e), Vec::new()))
        })
        .collect();
    let mut repetitions = Vec::with_capacity(runs.len());
    for (r, own) in runs {
        repetitions.push(r);
        calibrations.extend(own);
    }
    let failures = repetitions.iter().filter(|r| r.error.is_some()).count();
    if failures == repetitions.len() {
        return Err(ExperimentError::AllFailed {
            cell: coords.id(),
            repetitions: failures,
            first: repetitions[0].error.clone().unwrap_or_default(),
        });
    }
    let ok: Vec<&RepetitionResult> = repetitions.iter().filter(|r| r.error.is_none()).collect();
    let mass = config.hdpi_mass;
    let per_label = |f: fn(&Evaluation) -> f64| -> BTreeMap<String, Aggregate> {
        config
            .contagions
            .iter()
            .filter_map(|c| {
                let vals: Vec<f64> = ok
                    .iter()
                    .filter_map(|r| r.outcomes.iter().find(|o| o.label == c.label))
                    .map(|o| f(&o.evaluation))
                    .collect();
                Aggregate::of(&vals, mass).map(|a| (c.label.clone(), a))
            })
            .collect()
    };
    let collect = |f: fn(&RepetitionResult) -> Option<f64>| {
        let v: Vec<f64> = ok.iter().filter_map(|r| f(r)).collect();
        Aggregate::of(&v, mass)
    };
    let mut by_core: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &ok {
        for (k, v) in &r.delta_phi_by_coreness {
            by_core.entry(*k).or_default().push(*v);
        }
    }
    Ok(CellResult {
        id: coords.id(),
        coords,
        network: config.network_at(coords.axis)?,
        axis_parameter: config.network_axis.as_ref().map(|a| a.parameter.clone()),
        axis_value: config.axis_value(coords.axis),
        beta: config.beta[coords.beta],
        steps: config.steps[coords.steps],
        gamma: config.gamma,
        calibrations,
        failures,
        r0_mean: ok.iter().filter_map(|r| r.r0).sum::<f64>() / ok.len() as f64,
        auroc: per_label(|e| e.auroc),
        phi_rho: per_label(|e| e.phi_rho),
        delta_auroc: collect(|r| r.delta_auroc),
        delta_phi_rho: collect(|r| r.delta_phi_rho),
        delta_phi_by_coreness: by_core
            .into_iter()
            .filter_map(|(k, v)| Aggregate::of(&v, mass).map(|a| (k, a)))
            .collect(),
        runtime_seconds: start.elapsed().as_secs_f64(),
        repetitions,
    })
}

/// Where a grid run put its files.
#[derive(Debug, Clone)]
pub struct GridOutput {
    pub dir: PathBuf,
    pub cells: Vec<CellResult>,
    /// Cells that failed outright, with the reason.
    pub failed: Vec<(String, String)>,
    /// Cells taken from a previous run instead of being recomputed.
    pub resumed: usize,
}

fn cell_path(dir: &Path, id: &str) -> PathBuf {
    dir.join("cells").join(format!("{id}.json"))
}

/// Runs every cell of `config` into `dir`.
///
/// Each finished cell is written to `cells/<id>.json`, which doubles as its
/// completion marker. With `resume`, cells whose marker exists are loaded
/// instead of recomputed. The combined CSV, metrics and plots are rebuilt
/// from the cell files at the end, so they do not depend on scheduling or on
/// how many times the run was interrupted.
pub fn run_grid(config: &ExperimentConfig, dir: &Path, resume: bool) -> Result<GridOutput> {
    config.validate()?;
    fs::create_dir_all(dir.join("cells")).map_err(IoError::from)?;
    let config_path = dir.join("config.toml");
    if resume && config_path.exists() {
        let previous = ExperimentConfig::load(&config_path)?;
        if &previous != config {
            return Err(ExperimentError::ConfigMismatch { path: config_path });
        }
    }
    io::write_atomic(&config_path, config.to_toml()?.as_bytes())?;

    let coords = cells(config);
    let results: Vec<(CellCoords, Result<(CellResult, bool)>)> = coords
        .par_iter()
        .map(|&c| {
            let path = cell_path(dir, &c.id());
            if resume {
                if let Ok(done) = io::load_json::<CellResult>(&path) {
                    if done.coords == c {
                        return (c, Ok((done, true)));
                    }
                }
            }
            let r = run_cell(config, c).and_then(|cell| {
                io::save_json(&path, &cell)?;
                eprintln!(
                    "cell {} done in {:.1}s ({} failed repetitions)",
                    cell.id, cell.runtime_seconds, cell.failures
                );
                Ok((cell, false))
            });
            (c, r)
        })
        .collect();

    let mut out = GridOutput {
        dir: dir.to_owned(),
        cells: Vec::new(),
        failed: Vec::new(),
        resumed: 0,
    };
    for (c, r) in results {
        match r {
            Ok((cell, resumed)) => {
                out.resumed += resumed as usize;
                out.cells.push(cell);
            }
            Err(e) => out.failed.push((c.id(), e.to_string())),
        }
    }
    write_results_csv(config, &out.cells, &dir.join("results.csv"))?;
    write_metrics_jsonl(&out.cells, &dir.join("metrics.jsonl"))?;
    write_plots(config, &out.cells, dir)?;
    Ok(out)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Long-format CSV, one row per (cell, repetition).
pub fn write_results_csv(config: &ExperimentConfig, cells: &[CellResult], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = [
        "cell", "axis_parameter", "axis_value", "beta", "steps", "gamma", "repetition", "edges",
        "density", "spectral_radius", "r0",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for c in &config.contagions {
        for field in ["beta", "auroc", "phi_rho", "rho_mean", "extinct", "acceptance_rate"] {
            header.push(format!("{}_{field}", c.label));
        }
    }
    header.extend(
        ["delta_auroc", "delta_phi_rho", "delta_phi_by_coreness", "error"]
            .iter()
            .map(|s| s.to_string()),
    );
    w.write_record(&header).map_err(IoError::from)?;
    for cell in cells {
        for r in &cell.repetitions {
            let mut row = vec![
                cell.id.clone(),
                cell.axis_parameter.clone().unwrap_or_default(),
                fmt_opt(cell.axis_value),
                cell.beta.to_string(),
                cell.steps.to_string(),
                cell.gamma.to_string(),
                r.repetition.to_string(),
                r.edges.to_string(),
                fmt_opt(r.density),
                fmt_opt(r.spectral_radius),
                fmt_opt(r.r0),
            ];
            for c in &config.contagions {
                match r.outcomes.iter().find(|o| o.label == c.label) {
                    Some(o) => row.extend([
                        o.beta.to_string(),
                        o.evaluation.auroc.to_string(),
                        o.evaluation.phi_rho.to_string(),
                        o.evaluation.rho_mean.to_string(),
                        o.extinct.to_string(),
                        o.acceptance_rate.to_string(),
                    ]),
                    None => row.extend(std::iter::repeat_n(String::new(), 6)),
                }
            }
            let cores: Vec<String> = r
                .delta_phi_by_coreness
                .iter()
                .map(|(k, v)| format!("{k}:{v}"))
                .collect();
            row.extend([
                fmt_opt(r.delta_auroc),
                fmt_opt(r.delta_phi_rho),
                cores.join(";"),
                r.error.clone().unwrap_or_default(),
            ]);
            w.write_record(&row).map_err(IoError::from)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| IoError::Io(e.into_error()))?;
    Ok(io::write_atomic(path, &bytes)?)
}

/// One flat JSON record per (cell, repetition, contagion).
fn write_metrics_jsonl(cells: &[CellResult], path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    for cell in cells {
        for r in cell.repetitions.iter().filter(|r| r.error.is_none()) {
            for o in &r.outcomes {
                let mut m = serde_json::Map::new();
                m.insert("cell".into(), cell.id.clone().into());
                m.insert("axis_value".into(), cell.axis_value.into());
                m.insert("beta".into(), cell.beta.into());
                m.insert("steps".into(), cell.steps.into());
                m.insert("repetition".into(), r.repetition.into());
                m.insert("contagion".into(), o.label.clone().into());
                m.insert("contagion_beta".into(), o.beta.into());
                m.insert("r0".into(), r.r0.into());
                m.extend(o.evaluation.to_flat_json());
                serde_json::to_writer(&mut buf, &m).map_err(IoError::from)?;
                buf.push(b'\n');
            }
        }
    }
    Ok(io::write_atomic(path, &buf)?)
}

/// R0 iso-line levels 1, 11, 21, ... up to the largest value in the grid.
fn r0_levels(max: f64) -> Vec<f64> {
    (0..)
        .map(|k| 1.0 + 10.0 * k as f64)
        .take_while(|&l| l <= max.max(1.0))
        .collect()
}

fn write_plots(config: &ExperimentConfig, cells: &[CellResult], dir: &Path) -> Result<()> {
    let find = |a: usize, b: usize, t: usize| {
        cells
            .iter()
            .find(|c| c.coords == CellCoords { axis: a, beta: b, steps: t })
    };
    let [first, second] = match config.contagions.as_slice() {
        [x, y] => [x.label.as_str(), y.label.as_str()],
        _ => return Ok(()),
    };
    let positive = format!("{second} better");
    let negative = format!("{first} better");
    let y_label = config
        .network_axis
        .as_ref()
        .map_or(config.network.family().to_string(), |a| a.parameter.clone());
    for (t, steps) in config.steps.iter().enumerate() {
        let grid = |f: &dyn Fn(&CellResult) -> Option<f64>| -> Vec<Vec<Option<f64>>> {
            (0..config.axis_len())
                .map(|a| {
                    (0..config.beta.len())
                        .map(|b| find(a, b, t).and_then(f))
                        .collect()
                })
                .collect()
        };
        let r0: Vec<Vec<f64>> = grid(&|c| Some(c.r0_mean))
            .into_iter()
            .map(|row| row.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
            .collect();
        let max_r0 = r0.iter().flatten().cloned().filter(|v| v.is_finite()).fold(0.0, f64::max);
        let x_ticks: Vec<String> = config.beta.iter().map(|b| b.to_string()).collect();
        let y_ticks: Vec<String> = (0..config.axis_len())
            .map(|a| config.axis_value(a).map_or(String::new(), |v| v.to_string()))
            .collect();
        for (name, title, f) in [
            (
                "delta_auroc",
                format!("AUROC({second}) - AUROC({first}), T = {steps}"),
                (|c: &CellResult| c.delta_auroc.as_ref().map(|a| a.mean)) as fn(&CellResult) -> Option<f64>,
            ),
            (
                "delta_phi_rho",
                format!("phi_rho({second}) - phi_rho({first}), T = {steps}"),
                |c: &CellResult| c.delta_phi_rho.as_ref().map(|a| a.mean),
            ),
        ] {
            let h = Heatmap {
                title: &title,
                x_label: "beta",
                y_label: &y_label,
                x_ticks: x_ticks.clone(),
                y_ticks: y_ticks.clone(),
                values: grid(&f),
                contour_field: Some(r0.clone()),
                contour_levels: r0_levels(max_r0),
                positive: &positive,
                negative: &negative,
            };
            io::write_atomic(&dir.join(format!("heatmap_{name}_t{t}.svg")), h.to_svg().as_bytes())?;
        }
    }
    if config.steps.len() > 1 {
        for a in 0..config.axis_len() {
            for b in 0..config.beta.len() {
                let series: Vec<Series> = config
                    .contagions
                    .iter()
                    .map(|c| {
                        let mut s = Series {
                            name: c.label.clone(),
                            points: Vec::new(),
                            band: Vec::new(),
                        };
                        for (t, steps) in config.steps.iter().enumerate() {
                            if let Some(agg) = find(a, b, t).and_then(|cell| cell.auroc.get(&c.label)) {
                                s.points.push((*steps as f64, agg.median));
                                s.band.push((*steps as f64, agg.hdpi[0], agg.hdpi[1]));
                            }
                        }
                        s
                    })
                    .collect();
                let svg = line_chart_svg(
                    &format!("median AUROC, beta = {}", config.beta[b]),
                    "T",
                    "AUROC",
                    &series,
                );
                io::write_atomic(&dir.join(format!("auroc_vs_steps_a{a}_b{b}.svg")), svg.as_bytes())?;
            }
        }
    }
    Ok(())
}
