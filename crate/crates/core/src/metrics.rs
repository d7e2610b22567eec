//! Reconstruction quality and descriptors of the dynamical regime.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::graph::Adjacency;
use crate::inference::EdgeProbabilityMatrix;

/// Power-iteration residual tolerance of [`spectral_radius`].
pub const SPECTRAL_TOLERANCE: f64 = 1e-10;
/// Iteration cap of [`spectral_radius`].
pub const SPECTRAL_MAX_ITERATIONS: usize = 100_000;

/// Area under the ROC curve with its label counts.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RocResult {
    pub auroc: f64,
    pub n_positive: usize,
    pub n_negative: usize,
}

/// Tie-aware Mann–Whitney AUROC: the probability that a random positive
/// scores above a random negative, counting ties as one half.
pub fn auroc_scores(scores: &[f64], labels: &[bool]) -> Result<RocResult> {
    if scores.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    let n_positive = labels.iter().filter(|&&l| l).count();
    let n_negative = labels.len() - n_positive;
    if n_positive == 0 || n_negative == 0 {
        return Err(Error::DegenerateLabels {
            positives: n_positive,
            negatives: n_negative,
        });
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut positive_rank_sum = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        // Ranks start..end (1-based start+1..=end) share their average.
        let mid_rank = (start + 1 + end) as f64 / 2.0;
        let tied_positives = order[start..end].iter().filter(|&&k| labels[k]).count();
        positive_rank_sum += mid_rank * tied_positives as f64;
        start = end;
    }
    let (p, n) = (n_positive as f64, n_negative as f64);
    let u = positive_rank_sum - p * (p + 1.0) / 2.0;
    Ok(RocResult {
        auroc: u / (p * n),
        n_positive,
        n_negative,
    })
}

/// AUROC of edge probabilities `q` against the true edges, over unordered
/// pairs.
pub fn auroc(q: &EdgeProbabilityMatrix, truth: &Adjacency) -> Result<RocResult> {
    let n = check_same_nodes(q, truth)?;
    let mut scores = Vec::with_capacity(truth.pair_count());
    let mut labels = Vec::with_capacity(truth.pair_count());
    for i in 0..n {
        for j in i + 1..n {
            scores.push(q.get(i, j));
            labels.push(truth.has_edge(i, j));
        }
    }
    auroc_scores(&scores, &labels)
}

fn check_same_nodes(q: &EdgeProbabilityMatrix, truth: &Adjacency) -> Result<usize> {
    if q.node_count() == truth.node_count() {
        Ok(q.node_count())
    } else {
        Err(Error::Dimension(format!(
            "Q covers {} nodes, the true network {}",
            q.node_count(),
            truth.node_count()
        )))
    }
}

/// Density estimate quality `1 - mean_s |rho_s - rho|`.
pub fn density_quality(rho_samples: &[f64], rho_true: f64) -> Result<f64> {
    if rho_samples.is_empty() {
        return Err(Error::Empty("density samples"));
    }
    let err: f64 = rho_samples.iter().map(|r| (r - rho_true).abs()).sum();
    Ok(1.0 - err / rho_samples.len() as f64)
}

/// Per-node recovery `phi_i = 1 - (1/N) sum_j |Q_ij - A_ij|`.
///
/// The per-sample average around this expression is constant in the sample
/// index. For binary `A` it also equals the mean over samples of
/// `1 - (1/N) sum_j |A^(s)_ij - A_ij|`, see [`nodal_recovery_from_samples`].
pub fn nodal_recovery(q: &EdgeProbabilityMatrix, truth: &Adjacency, i: usize) -> Result<f64> {
    let n = check_same_nodes(q, truth)?;
    let err: f64 = q
        .row(i)
        .iter()
        .enumerate()
        .map(|(j, &qij)| (qij - truth.entry(i, j) as f64).abs())
        .sum();
    Ok(1.0 - err / n as f64)
}

/// [`nodal_recovery`] for every node.
pub fn nodal_recovery_all(q: &EdgeProbabilityMatrix, truth: &Adjacency) -> Result<Vec<f64>> {
    (0..truth.node_count())
        .map(|i| nodal_recovery(q, truth, i))
        .collect()
}

/// Per-node recovery averaged over sampled networks:
/// `1 - (1/N_s) sum_s (1/N) sum_j |A^(s)_ij - A_ij|`.
pub fn nodal_recovery_from_samples<'a, I>(samples: I, truth: &Adjacency, i: usize) -> Result<f64>
where
    I: IntoIterator<Item = &'a Adjacency>,
{
    let n = truth.node_count();
    let (mut total, mut count) = (0.0, 0usize);
    for s in samples {
        if s.node_count() != n {
            return Err(Error::Dimension(format!(
                "sample with {} nodes, truth has {n}",
                s.node_count()
            )));
        }
        let wrong = (0..n).filter(|&j| s.has_edge(i, j) != truth.has_edge(i, j)).count();
        total += wrong as f64 / n as f64;
        count += 1;
    }
    if count == 0 {
        return Err(Error::Empty("sample list"));
    }
    Ok(1.0 - total / count as f64)
}

/// Mean of `values` over the nodes of each coreness class, keyed by coreness.
pub fn class_means(values: &[f64], coreness: &CorenessVector) -> BTreeMap<usize, f64> {
    let mut acc: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for (&v, &k) in values.iter().zip(coreness.as_slice()) {
        let e = acc.entry(k).or_insert((0.0, 0));
        e.0 += v;
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(k, (sum, count))| (k, sum / count as f64))
        .collect()
}

/// Coreness of every node.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CorenessVector(pub Vec<usize>);

impl CorenessVector {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn max(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// Distinct coreness values in increasing order.
    pub fn classes(&self) -> Vec<usize> {
        let mut c = self.0.clone();
        c.sort_unstable();
        c.dedup();
        c
    }
}

/// k-core decomposition by bucket peeling (Batagelj–Zaversnik).
pub fn kcore(a: &Adjacency) -> CorenessVector {
    let n = a.node_count();
    let mut degree = a.degrees();
    let max_degree = degree.iter().copied().max().unwrap_or(0);
    let mut bin_start = vec![0usize; max_degree + 1];
    for &d in &degree {
        bin_start[d] += 1;
    }
    let mut start = 0;
    for b in bin_start.iter_mut() {
        let size = *b;
        *b = start;
        start += size;
    }
    let mut order = vec![0usize; n];
    let mut pos = vec![0usize; n];
    {
        let mut next = bin_start.clone();
        for v in 0..n {
            pos[v] = next[degree[v]];
            order[pos[v]] = v;
            next[degree[v]] += 1;
        }
    }
    for k in 0..n {
        let v = order[k];
        for &u in a.neighbors(v) {
            if degree[u] > degree[v] {
                let du = degree[u];
                let pu = pos[u];
                let pw = bin_start[du];
                let w = order[pw];
                if u != w {
                    order.swap(pu, pw);
                    pos[u] = pw;
                    pos[w] = pu;
                }
                bin_start[du] += 1;
                degree[u] -= 1;
            }
        }
    }
    CorenessVector(degree)
}

/// Largest eigenvalue magnitude of the adjacency matrix.
///
/// Power iteration on `A + I` from the all-ones vector; the shift makes the
/// Perron eigenvalue strictly dominant in magnitude, so bipartite graphs do
/// not oscillate. Stops once the eigen-residual drops below
/// [`SPECTRAL_TOLERANCE`].
pub fn spectral_radius(a: &Adjacency) -> Result<f64> {
    let n = a.node_count();
    if a.edge_count() == 0 {
        return Ok(0.0);
    }
    let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let mut x = vec![1.0 / libm::sqrt(n as f64); n];
    let mut y = vec![0.0; n];
    let mut estimate = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..SPECTRAL_MAX_ITERATIONS {
        for i in 0..n {
            y[i] = x[i] + a.neighbors(i).iter().map(|&j| x[j]).sum::<f64>();
        }
        let mu: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        residual = libm::sqrt(
            x.iter()
                .zip(&y)
                .map(|(xi, yi)| (yi - mu * xi) * (yi - mu * xi))
                .sum::<f64>(),
        );
        estimate = mu - 1.0;
        if residual <= SPECTRAL_TOLERANCE * mu.max(1.0) {
            return Ok(estimate);
        }
        let ny = norm(&y);
        for (xi, yi) in x.iter_mut().zip(&y) {
            *xi = yi / ny;
        }
    }
    Err(Error::NoConvergence {
        iterations: SPECTRAL_MAX_ITERATIONS,
        estimate,
        change: residual,
    })
}

/// Basic reproduction number `beta * sigma / gamma` for a given spectral radius.
pub fn r0(beta: f64, sigma: f64, gamma: f64) -> f64 {
    beta * sigma / gamma
}

/// Basic reproduction number of a simple contagion on `a`.
pub fn r0_on(beta: f64, a: &Adjacency, gamma: f64) -> Result<f64> {
    Ok(r0(beta, spectral_radius(a)?, gamma))
}
