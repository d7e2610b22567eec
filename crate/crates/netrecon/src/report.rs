//! Posterior summaries and reconstruction metrics in their JSON shapes.

use std::collections::BTreeMap;

use netrecon_core::dynamics::StateMatrix;
use netrecon_core::inference::{
    contagion_posterior, gamma_posterior, rho_posterior, sufficient_statistics, BetaParams,
    ChainDiagnostics, EdgeProbabilityMatrix, Hyperparameters, McmcConfig, Posterior,
};
use netrecon_core::metrics::{auroc, density_quality, kcore, nodal_recovery_all};
use netrecon_core::Adjacency;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub const SUMMARY_VERSION: u32 = 1;

/// A beta posterior with its mean and highest-density interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BetaSummary {
    pub alpha: f64,
    pub beta: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub hdpi: [f64; 2],
}

impl BetaSummary {
    pub fn new(p: &BetaParams, mass: f64) -> Self {
        let (lo, hi) = p.hdpi(mass);
        Self {
            alpha: p.alpha,
            beta: p.beta,
            mean: p.mean(),
            std_dev: p.std_dev(),
            hdpi: [lo, hi],
        }
    }
}

/// Which network the `c` and `rho` posteriors are conditioned on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "graph", rename_all = "snake_case")]
pub enum Conditioning {
    Truth,
    BestSample {
        chain: usize,
        step: u64,
        log_posterior: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferenceSummary {
    pub version: u32,
    pub nodes: usize,
    pub steps: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub total_samples: usize,
    pub hdpi_mass: f64,
    /// Edge probabilities, row by row.
    pub q: Vec<Vec<f64>>,
    pub expected_density: f64,
    pub gamma: BetaSummary,
    /// One entry per infected-neighbor count `0..N`.
    pub contagion: Vec<BetaSummary>,
    pub rho: BetaSummary,
    pub conditioned_on: Conditioning,
    pub diagnostics: Vec<ChainDiagnostics>,
}

/// Builds the summary of a finished run. `truth`, when given, is the
/// network the `c` and `rho` posteriors are conditioned on; otherwise the
/// retained sample with the highest posterior is used.
pub fn summarize(
    x: &StateMatrix,
    posterior: &Posterior,
    hyper: &Hyperparameters,
    config: &McmcConfig,
    seed: u64,
    truth: Option<&Adjacency>,
    hdpi_mass: f64,
) -> netrecon_core::Result<InferenceSummary> {
    let q = posterior.edge_probabilities()?;
    let (graph, conditioned_on) = match truth {
        Some(a) => (a, Conditioning::Truth),
        None => {
            let best = posterior
                .best()
                .ok_or(netrecon_core::Error::Empty("posterior samples"))?;
            (
                &best.graph,
                Conditioning::BestSample {
                    chain: best.chain,
                    step: best.step,
                    log_posterior: best.log_posterior,
                },
            )
        }
    };
    let stats = sufficient_statistics(x, graph)?;
    let n = x.node_count();
    Ok(InferenceSummary {
        version: SUMMARY_VERSION,
        nodes: n,
        steps: x.steps(),
        seed,
        mcmc: config.clone(),
        total_samples: posterior.samples.len(),
        hdpi_mass,
        q: (0..n).map(|i| q.row(i).to_vec()).collect(),
        expected_density: q.expected_density(),
        gamma: BetaSummary::new(&gamma_posterior(&stats, hyper), hdpi_mass),
        contagion: contagion_posterior(&stats, hyper)
            .iter()
            .map(|p| BetaSummary::new(p, hdpi_mass))
            .collect(),
        rho: BetaSummary::new(&rho_posterior(graph, hyper), hdpi_mass),
        conditioned_on,
        diagnostics: posterior.diagnostics.clone(),
    })
}

/// Reconstruction quality of a posterior against the true network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub auroc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
    pub phi_rho: f64,
    pub rho_true: f64,
    pub rho_mean: f64,
    pub n_samples: usize,
    pub phi: Vec<f64>,
    pub coreness: Vec<usize>,
    /// Mean `phi_i` over the nodes of each coreness class.
    pub phi_by_coreness: BTreeMap<usize, f64>,
}

pub fn evaluate(
    q: &EdgeProbabilityMatrix,
    densities: &[f64],
    truth: &Adjacency,
) -> netrecon_core::Result<Evaluation> {
    let roc = auroc(q, truth)?;
    let phi = nodal_recovery_all(q, truth)?;
    let core = kcore(truth);
    let by_class = netrecon_core::metrics::class_means(&phi, &core);
    Ok(Evaluation {
        auroc: roc.auroc,
        n_positive: roc.n_positive,
        n_negative: roc.n_negative,
        phi_rho: density_quality(densities, truth.density())?,
        rho_true: truth.density(),
        rho_mean: densities.iter().sum::<f64>() / densities.len() as f64,
        n_samples: densities.len(),
        phi,
        coreness: core.0,
        phi_by_coreness: by_class,
    })
}

impl Evaluation {
    /// Flat key/value form: scalars as is, node and class values spread over
    /// `phi_node_<i>`, `coreness_node_<i>` and `phi_core_<k>` keys.
    pub fn to_flat_json(&self) -> Map<String, Value> {
        let mut m = Map::new();
        m.insert("auroc".into(), self.auroc.into());
        m.insert("n_positive".into(), self.n_positive.into());
        m.insert("n_negative".into(), self.n_negative.into());
        m.insert("phi_rho".into(), self.phi_rho.into());
        m.insert("rho_true".into(), self.rho_true.into());
        m.insert("rho_mean".into(), self.rho_mean.into());
        m.insert("n_samples".into(), self.n_samples.into());
        let mean_phi = self.phi.iter().sum::<f64>() / self.phi.len() as f64;
        m.insert("phi_mean".into(), mean_phi.into());
        for (k, v) in &self.phi_by_coreness {
            m.insert(format!("phi_core_{k}"), (*v).into());
        }
        for (i, (p, c)) in self.phi.iter().zip(&self.coreness).enumerate() {
            m.insert(format!("phi_node_{i}"), (*p).into());
            m.insert(format!("coreness_node_{i}"), (*c).into());
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use netrecon_core::inference::GraphSample;
    use netrecon_core::netgen::zkc;

    #[test]
    fn perfect_posterior_scores_perfectly() {
        let a = zkc();
        let posterior = Posterior {
            samples: vec![GraphSample {
                chain: 0,
                step: 1,
                log_posterior: 0.0,
                graph: a.clone(),
            }],
            diagnostics: vec![],
        };
        let q = posterior.edge_probabilities().unwrap();
        let e = evaluate(&q, &posterior.densities(), &a).unwrap();
        assert_eq!((e.auroc, e.phi_rho), (1.0, 1.0));
        assert_eq!(e.phi_by_coreness.keys().copied().collect::<Vec<_>>(), vec![1, 2, 3, 4]);
        let flat = e.to_flat_json();
        assert_eq!(flat["phi_core_4"], 1.0);
        assert_eq!(flat["coreness_node_11"], 1);
        assert!(flat.values().all(|v| !v.is_object() && !v.is_array()));
    }

    #[test]
    fn summary_conditions_on_best_sample_without_truth() {
        let x = StateMatrix::from_rows(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]).unwrap();
        let path = Adjacency::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let posterior = Posterior {
            samples: vec![
                GraphSample {
                    chain: 0,
                    step: 10,
                    log_posterior: -5.0,
                    graph: Adjacency::empty(3),
                },
                GraphSample {
                    chain: 1,
                    step: 10,
                    log_posterior: -2.0,
                    graph: path.clone(),
                },
            ],
            diagnostics: vec![],
        };
        let hyper = Hyperparameters::uniform(3);
        let cfg = McmcConfig::default();
        let s = summarize(&x, &posterior, &hyper, &cfg, 1, None, 0.5).unwrap();
        assert!(matches!(s.conditioned_on, Conditioning::BestSample { chain: 1, .. }));
        // On the path, nodes 1 and 2 catch it from one neighbor and node 0
        // resists one exposure.
        assert_eq!((s.contagion[1].alpha, s.contagion[1].beta), (3.0, 2.0));
        assert_eq!((s.gamma.alpha, s.gamma.beta), (3.0, 1.0));
        assert_eq!(s.q[0][1], 0.5);
        let t = summarize(&x, &posterior, &hyper, &cfg, 1, Some(&Adjacency::empty(3)), 0.5).unwrap();
        assert_eq!(t.conditioned_on, Conditioning::Truth);
        assert_eq!((t.rho.alpha, t.rho.beta), (1.0, 4.0));
    }
}
