//! Bayesian reconstruction of the network and the dynamics.
//!
//! Given a trace `X` and a candidate network `A`, the likelihood depends on
//! the data only through the counts in [`SufficientStats`]. With conjugate
//! beta priors on `gamma`, every `c_l` and the Erdős–Rényi density `rho`, all
//! parameters integrate out and the marginal posterior over networks is
//!
//! ```text
//! P(A | X) ∝ B(|E| + a_rho, C(N,2) - |E| + b_rho) · Π_l B(m_l + a_l, n_l + b_l)
//! ```
//!
//! which [`log_marginal_posterior`] evaluates and the edge-flip sampler in
//! [`edge_flip_mcmc`] explores.

mod beta;
mod flip;
mod mcmc;

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

pub use beta::{log_beta, BetaParams, HDPI_GRID};
pub use flip::{FlipState, TraceIndex};
pub use mcmc::{
    chain_seed, edge_flip_mcmc, run_chain, ChainDiagnostics, EdgeTally, GraphSample,
    McmcConfig, Posterior, SampleSink,
};

use crate::dynamics::StateMatrix;
use crate::error::{check_positive, Error, Result};
use crate::graph::Adjacency;

/// Beta prior hyperparameters for `c_l` (one pair per `l = 0..N-1`), `gamma`
/// and `rho`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Hyperparameters {
    pub a_c: Vec<f64>,
    pub b_c: Vec<f64>,
    pub a_gamma: f64,
    pub b_gamma: f64,
    pub a_rho: f64,
    pub b_rho: f64,
}

impl Hyperparameters {
    /// Uniform `Beta(1, 1)` priors everywhere.
    pub fn uniform(n: usize) -> Self {
        Self {
            a_c: vec![1.0; n],
            b_c: vec![1.0; n],
            a_gamma: 1.0,
            b_gamma: 1.0,
            a_rho: 1.0,
            b_rho: 1.0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.a_c.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.a_c.len() != self.b_c.len() {
            return Err(Error::Dimension(format!(
                "a_c has {} entries, b_c has {}",
                self.a_c.len(),
                self.b_c.len()
            )));
        }
        for (&a, &b) in self.a_c.iter().zip(&self.b_c) {
            check_positive("a_c", a)?;
            check_positive("b_c", b)?;
        }
        check_positive("a_gamma", self.a_gamma)?;
        check_positive("b_gamma", self.b_gamma)?;
        check_positive("a_rho", self.a_rho)?;
        check_positive("b_rho", self.b_rho)?;
        Ok(())
    }

    fn check_nodes(&self, n: usize) -> Result<()> {
        self.validate()?;
        if self.node_count() == n {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "hyperparameters cover {} nodes, data has {n}",
                self.node_count()
            )))
        }
    }
}

/// Transition counts that carry all the information in a trace.
///
/// `m[l]` (`n[l]`) counts susceptible node-steps with `l` infected neighbors
/// that did (did not) become infected. `h` counts recoveries and `g`
/// infected node-steps that stayed infected.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SufficientStats {
    pub m: Vec<u64>,
    pub n: Vec<u64>,
    pub g: u64,
    pub h: u64,
}

impl SufficientStats {
    /// Number of susceptible node-steps, `sum_l (m_l + n_l)`.
    pub fn susceptible_exposures(&self) -> u64 {
        self.m.iter().chain(&self.n).sum()
    }

    /// Number of infected node-steps, `g + h`.
    pub fn infected_exposures(&self) -> u64 {
        self.g + self.h
    }
}

fn check_dims(x: &StateMatrix, a: &Adjacency) -> Result<()> {
    if x.node_count() == a.node_count() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "trace has {} nodes, graph has {}",
            x.node_count(),
            a.node_count()
        )))
    }
}

/// Counts `m`, `n`, `g`, `h` of a trace on a given network, with `l` ranging
/// over `0..N`.
pub fn sufficient_statistics(x: &StateMatrix, a: &Adjacency) -> Result<SufficientStats> {
    check_dims(x, a)?;
    let n = x.node_count();
    let mut stats = SufficientStats {
        m: vec![0; n],
        n: vec![0; n],
        g: 0,
        h: 0,
    };
    let mut nu = vec![0usize; n];
    for t in 0..x.steps() {
        let (cur, next) = (x.row(t), x.row(t + 1));
        nu.iter_mut().for_each(|k| *k = 0);
        for j in (0..n).filter(|&j| cur[j] == 1) {
            for &i in a.neighbors(j) {
                nu[i] += 1;
            }
        }
        for i in 0..n {
            match (cur[i], next[i]) {
                (0, 1) => stats.m[nu[i]] += 1,
                (0, _) => stats.n[nu[i]] += 1,
                (_, 1) => stats.g += 1,
                _ => stats.h += 1,
            }
        }
    }
    Ok(stats)
}

/// `ln B(|E| + a_rho, C(N,2) - |E| + b_rho)`, the network prior after
/// integrating out `rho`.
pub fn log_density_prior(edges: usize, n: usize, hyper: &Hyperparameters) -> f64 {
    let pairs = n * n.saturating_sub(1) / 2;
    log_beta(
        edges as f64 + hyper.a_rho,
        (pairs - edges) as f64 + hyper.b_rho,
    )
}

/// Unnormalized log marginal posterior of a network, `ln P(A | X)` up to a
/// constant. `stats` must be the statistics of the trace on `a`.
pub fn log_marginal_posterior(
    a: &Adjacency,
    stats: &SufficientStats,
    hyper: &Hyperparameters,
) -> Result<f64> {
    hyper.check_nodes(a.node_count())?;
    if stats.m.len() != a.node_count() || stats.n.len() != a.node_count() {
        return Err(Error::Dimension(format!(
            "statistics have {} bins for {} nodes",
            stats.m.len(),
            a.node_count()
        )));
    }
    let data: f64 = stats
        .m
        .iter()
        .zip(&stats.n)
        .zip(hyper.a_c.iter().zip(&hyper.b_c))
        .map(|((&m, &n), (&a, &b))| log_beta(m as f64 + a, n as f64 + b))
        .sum();
    Ok(log_density_prior(a.edge_count(), a.node_count(), hyper) + data)
}

fn xlogy(k: u64, p: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * libm::log(p)
    }
}

/// `ln P(X | A, gamma, c)` from the counts:
/// `h ln gamma + g ln(1 - gamma) + sum_l [m_l ln c_l + n_l ln(1 - c_l)]`.
pub fn log_likelihood(stats: &SufficientStats, gamma: f64, c: &[f64]) -> Result<f64> {
    if c.len() < stats.m.len() {
        return Err(Error::Dimension(format!(
            "contagion vector has {} entries, need {}",
            c.len(),
            stats.m.len()
        )));
    }
    let recovery = xlogy(stats.h, gamma) + xlogy(stats.g, 1.0 - gamma);
    let infection: f64 = stats
        .m
        .iter()
        .zip(&stats.n)
        .zip(c)
        .map(|((&m, &n), &cl)| xlogy(m, cl) + xlogy(n, 1.0 - cl))
        .sum();
    Ok(recovery + infection)
}

/// Posterior of the recovery probability: `Beta(h + a_gamma, g + b_gamma)`.
pub fn gamma_posterior(stats: &SufficientStats, hyper: &Hyperparameters) -> BetaParams {
    BetaParams {
        alpha: stats.h as f64 + hyper.a_gamma,
        beta: stats.g as f64 + hyper.b_gamma,
    }
}

/// Posteriors of the contagion vector: `c_l ~ Beta(m_l + a_l, n_l + b_l)`.
pub fn contagion_posterior(stats: &SufficientStats, hyper: &Hyperparameters) -> Vec<BetaParams> {
    stats
        .m
        .iter()
        .zip(&stats.n)
        .zip(hyper.a_c.iter().zip(&hyper.b_c))
        .map(|((&m, &n), (&a, &b))| BetaParams {
            alpha: m as f64 + a,
            beta: n as f64 + b,
        })
        .collect()
}

/// Posterior of the density: `Beta(|E| + a_rho, C(N,2) - |E| + b_rho)`.
pub fn rho_posterior(a: &Adjacency, hyper: &Hyperparameters) -> BetaParams {
    BetaParams {
        alpha: a.edge_count() as f64 + hyper.a_rho,
        beta: (a.pair_count() - a.edge_count()) as f64 + hyper.b_rho,
    }
}

/// Posterior edge probabilities `Q`, the mean of sampled adjacency matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeProbabilityMatrix {
    n: usize,
    q: Vec<f64>,
}

impl EdgeProbabilityMatrix {
    /// Builds `Q` from a symmetric row-major matrix with entries in `[0, 1]`.
    pub fn from_dense(n: usize, q: Vec<f64>) -> Result<Self> {
        if q.len() != n * n {
            return Err(Error::Dimension(format!(
                "{} entries for a {n}x{n} matrix",
                q.len()
            )));
        }
        for i in 0..n {
            if q[i * n + i] != 0.0 {
                return Err(Error::InvalidGraph(format!("nonzero diagonal at {i}")));
            }
            for j in 0..n {
                let v = q[i * n + j];
                if !(0.0..=1.0).contains(&v) || v != q[j * n + i] {
                    return Err(Error::InvalidGraph(format!(
                        "entry ({i}, {j}) = {v} is not a symmetric probability"
                    )));
                }
            }
        }
        Ok(Self { n, q })
    }

    /// Builds `Q` from per-pair edge counts over `samples` draws.
    pub(crate) fn from_pair_counts(n: usize, counts: &[u64], samples: u64) -> Self {
        let mut q = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in i + 1..n {
                let v = counts[k] as f64 / samples as f64;
                q[i * n + j] = v;
                q[j * n + i] = v;
                k += 1;
            }
        }
        Self { n, q }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.n..(i + 1) * self.n]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.q
    }

    /// Expected density `sum_{i<j} Q_ij / C(N,2)`.
    pub fn expected_density(&self) -> f64 {
        let pairs = self.n * self.n.saturating_sub(1) / 2;
        if pairs == 0 {
            return 0.0;
        }
        let total: f64 = (0..self.n)
            .flat_map(|i| (i + 1..self.n).map(move |j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .sum();
        total / pairs as f64
    }
}

/// `Q = (1/N_s) sum_s A^(s)`.
pub fn edge_probability_matrix<'a, I>(samples: I) -> Result<EdgeProbabilityMatrix>
where
    I: IntoIterator<Item = &'a Adjacency>,
{
    let mut iter = samples.into_iter();
    let first = iter.next().ok_or(Error::Empty("sample list"))?;
    let n = first.node_count();
    let mut tally = EdgeTally::new(n);
    tally.add(first);
    for a in iter {
        if a.node_count() != n {
            return Err(Error::Dimension(format!(
                "sample with {} nodes among samples with {n}",
                a.node_count()
            )));
        }
        tally.add(a);
    }
    Ok(tally.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_node_trace() -> (StateMatrix, Adjacency) {
        let x = StateMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap();
        (x, Adjacency::from_edges(2, [(0, 1)]).unwrap())
    }

    #[test]
    fn stats_single_edge_example() {
        let (x, a) = two_node_trace();
        let s = sufficient_statistics(&x, &a).unwrap();
        assert_eq!(s.m, vec![0, 1]);
        assert_eq!(s.n, vec![0, 0]);
        assert_eq!((s.g, s.h), (0, 1));
    }

    #[test]
    fn stats_constant_traces() {
        let a = Adjacency::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let zeros = StateMatrix::from_rows(&vec![vec![0; 3]; 5]).unwrap();
        let s = sufficient_statistics(&zeros, &a).unwrap();
        assert_eq!(s.m, vec![0; 3]);
        assert_eq!(s.n, vec![12, 0, 0]);
        assert_eq!((s.g, s.h), (0, 0));
        let ones = StateMatrix::from_rows(&vec![vec![1; 3]; 5]).unwrap();
        let s = sufficient_statistics(&ones, &a).unwrap();
        assert_eq!(s.susceptible_exposures(), 0);
        assert_eq!((s.g, s.h), (12, 0));
    }

    #[test]
    fn stats_dimension_mismatch() {
        let (x, _) = two_node_trace();
        assert!(sufficient_statistics(&x, &Adjacency::empty(3)).is_err());
    }

    #[test]
    fn data_free_posterior_depends_only_on_edge_count() {
        let zeros = StateMatrix::from_rows(&[vec![0; 4]]).unwrap();
        let hyper = Hyperparameters::uniform(4);
        let a = Adjacency::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let b = Adjacency::from_edges(4, [(0, 2), (1, 3)]).unwrap();
        let la = log_marginal_posterior(&a, &sufficient_statistics(&zeros, &a).unwrap(), &hyper);
        let lb = log_marginal_posterior(&b, &sufficient_statistics(&zeros, &b).unwrap(), &hyper);
        assert_eq!(la.unwrap(), lb.unwrap());
    }

    #[test]
    fn posteriors_without_data_are_uniform() {
        let zeros = StateMatrix::from_rows(&[vec![0; 3]]).unwrap();
        let a = Adjacency::empty(3);
        let hyper = Hyperparameters::uniform(3);
        let s = sufficient_statistics(&zeros, &a).unwrap();
        assert_eq!(gamma_posterior(&s, &hyper), BetaParams::uniform());
        assert!(contagion_posterior(&s, &hyper)
            .iter()
            .all(|p| *p == BetaParams::uniform()));
        // Three empty pairs: Beta(1, 4) rather than Beta(1, 1).
        assert_eq!(
            rho_posterior(&a, &hyper),
            BetaParams {
                alpha: 1.0,
                beta: 4.0
            }
        );
    }

    #[test]
    fn gamma_posterior_example() {
        let s = SufficientStats {
            m: vec![],
            n: vec![],
            g: 0,
            h: 10,
        };
        let p = gamma_posterior(&s, &Hyperparameters::uniform(0));
        assert_eq!((p.alpha, p.beta), (11.0, 1.0));
        assert!((p.mean() - 11.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn q_from_identical_and_extreme_samples() {
        let a = Adjacency::from_edges(4, [(0, 1), (1, 3)]).unwrap();
        let q = edge_probability_matrix([&a, &a, &a]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(q.get(i, j), a.entry(i, j) as f64);
            }
        }
        let (e, k) = (Adjacency::empty(4), Adjacency::complete(4));
        let q = edge_probability_matrix([&e, &k]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(q.get(i, j), if i == j { 0.0 } else { 0.5 });
            }
        }
        assert!(edge_probability_matrix(core::iter::empty()).is_err());
        assert!(edge_probability_matrix([&e, &Adjacency::empty(3)]).is_err());
    }

    #[test]
    fn likelihood_handles_zero_probabilities() {
        let s = SufficientStats {
            m: vec![0, 2],
            n: vec![5, 0],
            g: 0,
            h: 3,
        };
        let ll = log_likelihood(&s, 1.0, &[0.0, 1.0]).unwrap();
        assert_eq!(ll, 0.0);
        let ll = log_likelihood(&s, 0.5, &[0.0, 0.5]).unwrap();
        assert!((ll - 5.0 * libm::log(0.5)).abs() < 1e-12);
    }
}
