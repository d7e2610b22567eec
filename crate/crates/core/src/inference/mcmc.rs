use alloc::vec::Vec;

use rand::Rng;

use super::{EdgeProbabilityMatrix, FlipState, Hyperparameters, TraceIndex};
use crate::dynamics::StateMatrix;
use crate::error::{check_probability, Error, Result};
use crate::graph::{pair_index, Adjacency};
use crate::netgen::erdos_renyi;
use crate::rng;

/// Sampler settings. `n_samples` is per chain, so the total number of
/// retained graphs is `n_samples * n_chains`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct McmcConfig {
    pub burn_in: u64,
    pub thinning: u64,
    pub n_samples: usize,
    pub n_chains: usize,
    /// Edge probability of the random starting graphs.
    pub init_density: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 100_000,
            thinning: 10_000,
            n_samples: 25,
            n_chains: 4,
            init_density: 0.5,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: u64| {
            if v == 0 {
                Err(Error::OutOfRange {
                    name,
                    value: 0.0,
                    range: "[1, inf)",
                })
            } else {
                Ok(())
            }
        };
        positive("thinning", self.thinning)?;
        positive("n_samples", self.n_samples as u64)?;
        positive("n_chains", self.n_chains as u64)?;
        check_probability("init_density", self.init_density)?;
        Ok(())
    }

    /// Total proposals made by one chain.
    pub fn steps_per_chain(&self) -> u64 {
        self.burn_in + self.thinning * self.n_samples as u64
    }
}

/// Receives the retained states of a chain.
pub trait SampleSink {
    fn record(&mut self, chain: usize, step: u64, graph: &Adjacency, log_posterior: f64);
}

/// One retained network.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSample {
    pub chain: usize,
    /// Proposal count at which the state was retained.
    pub step: u64,
    pub log_posterior: f64,
    pub graph: Adjacency,
}

impl SampleSink for Vec<GraphSample> {
    fn record(&mut self, chain: usize, step: u64, graph: &Adjacency, log_posterior: f64) {
        self.push(GraphSample {
            chain,
            step,
            log_posterior,
            graph: graph.clone(),
        });
    }
}

/// Running per-pair edge counts; enough to build `Q` and the sampled densities
/// without keeping every graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTally {
    n: usize,
    counts: Vec<u64>,
    samples: u64,
    densities: Vec<f64>,
}

impl EdgeTally {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            counts: alloc::vec![0; n * n.saturating_sub(1) / 2],
            samples: 0,
            densities: Vec::new(),
        }
    }

    pub fn add(&mut self, graph: &Adjacency) {
        for (u, v) in graph.edges() {
            self.counts[pair_index(self.n, u, v)] += 1;
        }
        self.samples += 1;
        self.densities.push(graph.density());
    }

    /// Folds another tally over the same node set into this one.
    pub fn merge(&mut self, other: &EdgeTally) {
        assert_eq!(self.n, other.n, "tallies over different node sets");
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self.samples += other.samples;
        self.densities.extend_from_slice(&other.densities);
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    /// Density of every recorded graph, in recording order.
    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    /// # Panics
    /// If nothing has been recorded.
    pub fn matrix(&self) -> EdgeProbabilityMatrix {
        assert!(self.samples > 0, "empty tally");
        EdgeProbabilityMatrix::from_pair_counts(self.n, &self.counts, self.samples)
    }
}

impl SampleSink for EdgeTally {
    fn record(&mut self, _chain: usize, _step: u64, graph: &Adjacency, _log_posterior: f64) {
        self.add(graph);
    }
}

/// Per-chain acceptance statistics and log-posterior trace.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChainDiagnostics {
    pub chain: usize,
    pub proposals: u64,
    pub accepted: u64,
    /// `(step, log posterior)` every `thinning` proposals, burn-in included.
    pub trace: Vec<(u64, f64)>,
    pub final_log_posterior: f64,
}

impl ChainDiagnostics {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// Seed of chain `chain` under base seed `seed`.
pub fn chain_seed(seed: u64, chain: usize) -> u64 {
    rng::derive_seed(seed, &[chain as u64])
}

/// Runs one Metropolis–Hastings chain over networks.
///
/// Starts from an Erdős–Rényi graph with `init_density`, proposes toggling a
/// uniformly random node pair and accepts with probability
/// `min(1, exp(delta))`. After `burn_in` proposals, every `thinning`-th state
/// is passed to `sink`.
pub fn run_chain<R: Rng + ?Sized, S: SampleSink + ?Sized>(
    trace: &TraceIndex,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    chain: usize,
    rng: &mut R,
    sink: &mut S,
) -> Result<ChainDiagnostics> {
    config.validate()?;
    let n = trace.node_count();
    if n < 2 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "[2, inf)",
        });
    }
    let start = erdos_renyi(n, config.init_density, rng)?;
    let mut state = FlipState::new(trace, hyper, start)?;
    let mut accepted = 0;
    let total = config.steps_per_chain();
    let mut trace_points = Vec::with_capacity((total / config.thinning) as usize + 1);
    trace_points.push((0, state.log_posterior()));
    for step in 1..=total {
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let delta = state.propose(i, j);
        if delta >= 0.0 || libm::log(rng.random::<f64>()) < delta {
            state.accept();
            accepted += 1;
        } else {
            state.reject();
        }
        if step % config.thinning == 0 {
            state.resync();
            trace_points.push((step, state.log_posterior()));
        }
        if step > config.burn_in && (step - config.burn_in).is_multiple_of(config.thinning) {
            sink.record(chain, step, state.graph(), state.log_posterior());
        }
    }
    Ok(ChainDiagnostics {
        chain,
        proposals: total,
        accepted,
        trace: trace_points,
        final_log_posterior: state.log_posterior(),
    })
}

/// Retained samples and diagnostics of all chains.
#[derive(Debug, Clone, PartialEq)]
pub struct Posterior {
    pub samples: Vec<GraphSample>,
    pub diagnostics: Vec<ChainDiagnostics>,
}

impl Posterior {
    pub fn edge_probabilities(&self) -> Result<EdgeProbabilityMatrix> {
        super::edge_probability_matrix(self.samples.iter().map(|s| &s.graph))
    }

    /// Density `|E_s| / C(N,2)` of every sample.
    pub fn densities(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.graph.density()).collect()
    }

    /// Retained sample with the highest log posterior.
    pub fn best(&self) -> Option<&GraphSample> {
        self.samples
            .iter()
            .max_by(|a, b| a.log_posterior.total_cmp(&b.log_posterior))
    }
}

/// Samples networks from `P(A | X)` with `config.n_chains` independent chains,
/// run one after another. Chain `k` uses the stream [`chain_seed`]`(seed, k)`,
/// so running the chains in parallel elsewhere gives identical output.
pub fn edge_flip_mcmc(
    x: &StateMatrix,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    seed: u64,
) -> Result<Posterior> {
    let trace = TraceIndex::new(x);
    let mut samples = Vec::with_capacity(config.n_samples * config.n_chains);
    let mut diagnostics = Vec::with_capacity(config.n_chains);
    for chain in 0..config.n_chains {
        let mut rng = rng::seeded(chain_seed(seed, chain));
        diagnostics.push(run_chain(
            &trace,
            hyper,
            config,
            chain,
            &mut rng,
            &mut samples,
        )?);
    }
    Ok(Posterior {
        samples,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use crate::dynamics::{simulate, ContagionFunction, DynamicsParams};
    use crate::inference::{log_marginal_posterior, sufficient_statistics};

    fn small_config() -> McmcConfig {
        McmcConfig {
            burn_in: 1_000,
            thinning: 10,
            n_samples: 200,
            n_chains: 2,
            init_density: 0.5,
        }
    }

    #[test]
    fn defaults_follow_reference_schedule() {
        let c = McmcConfig::default();
        assert_eq!((c.burn_in, c.thinning), (100_000, 10_000));
    }

    #[test]
    fn sample_count_and_steps() {
        let x = StateMatrix::from_rows(&[vec![0; 5], vec![0; 5]]).unwrap();
        let hyper = Hyperparameters::uniform(5);
        let cfg = small_config();
        let post = edge_flip_mcmc(&x, &hyper, &cfg, 11).unwrap();
        assert_eq!(post.samples.len(), 400);
        assert_eq!(post.diagnostics.len(), 2);
        let steps: Vec<u64> = post.samples.iter().take(3).map(|s| s.step).collect();
        assert_eq!(steps, vec![1_010, 1_020, 1_030]);
        for s in &post.samples {
            let stats = sufficient_statistics(&x, &s.graph).unwrap();
            let lp = log_marginal_posterior(&s.graph, &stats, &hyper).unwrap();
            assert!((lp - s.log_posterior).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_single_node() {
        let x = StateMatrix::from_rows(&[vec![0], vec![1]]).unwrap();
        let hyper = Hyperparameters::uniform(1);
        assert!(edge_flip_mcmc(&x, &hyper, &small_config(), 0).is_err());
    }

    #[test]
    fn same_seed_same_chain() {
        let mut r = rng::seeded(5);
        let g = erdos_renyi(6, 0.4, &mut r).unwrap();
        let p = DynamicsParams::new(0.2, ContagionFunction::simple(0.4).unwrap()).unwrap();
        let x = simulate(&g, &p, &[1; 6], 60, &mut r).unwrap();
        let hyper = Hyperparameters::uniform(6);
        let a = edge_flip_mcmc(&x, &hyper, &small_config(), 3).unwrap();
        let b = edge_flip_mcmc(&x, &hyper, &small_config(), 3).unwrap();
        assert_eq!(a, b);
        let c = edge_flip_mcmc(&x, &hyper, &small_config(), 4).unwrap();
        assert_ne!(a.samples, c.samples);
    }

    #[test]
    fn tally_agrees_with_sample_list() {
        let x = StateMatrix::from_rows(&[vec![0, 1, 0, 1], vec![1, 0, 0, 1]]).unwrap();
        let hyper = Hyperparameters::uniform(4);
        let cfg = small_config();
        let post = edge_flip_mcmc(&x, &hyper, &cfg, 8).unwrap();
        let trace = TraceIndex::new(&x);
        let mut tally = EdgeTally::new(4);
        for chain in 0..cfg.n_chains {
            let mut rng = rng::seeded(chain_seed(8, chain));
            run_chain(&trace, &hyper, &cfg, chain, &mut rng, &mut tally).unwrap();
        }
        assert_eq!(tally.matrix(), post.edge_probabilities().unwrap());
        assert_eq!(tally.densities(), &post.densities()[..]);
    }
}
