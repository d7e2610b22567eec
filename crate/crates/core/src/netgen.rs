//! Random network families and the karate club network.
//!
//! Every generator returns a simple undirected graph and is deterministic
//! given the state of the random source.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::graph::Adjacency;

/// Degree-sequence resamples attempted by [`powerlaw_cm`] before giving up.
pub const MAX_DEGREE_RESAMPLES: usize = 100;

/// A network family with its parameters.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "model", rename_all = "snake_case"))]
pub enum NetworkModelSpec {
    ErdosRenyi { n: usize, p: f64 },
    PowerlawCm { n: usize, alpha: f64 },
    Clustered { n_type1: usize, s: usize },
    SmallWorld { n: usize, k: usize, p: f64 },
    Sbm2 { n: usize, mean_degree: f64, epsilon: f64 },
    Zkc,
}

impl NetworkModelSpec {
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Adjacency> {
        match *self {
            Self::ErdosRenyi { n, p } => erdos_renyi(n, p, rng),
            Self::PowerlawCm { n, alpha } => powerlaw_cm(n, alpha, rng),
            Self::Clustered { n_type1, s } => clustered(n_type1, s, rng),
            Self::SmallWorld { n, k, p } => small_world(n, k, p, rng),
            Self::Sbm2 {
                n,
                mean_degree,
                epsilon,
            } => sbm_two_block(n, mean_degree, epsilon, rng),
            Self::Zkc => Ok(zkc()),
        }
    }

    /// Short family name.
    pub fn family(&self) -> &'static str {
        match self {
            Self::ErdosRenyi { .. } => "erdos_renyi",
            Self::PowerlawCm { .. } => "powerlaw_cm",
            Self::Clustered { .. } => "clustered",
            Self::SmallWorld { .. } => "small_world",
            Self::Sbm2 { .. } => "sbm2",
            Self::Zkc => "zkc",
        }
    }
}

/// G(n, p): every pair independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Adjacency> {
    check_probability("p", p)?;
    let mut g = Adjacency::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

/// Normalized law `P(k) ∝ k^alpha` on `{2, ..., n-1}`, as cumulative weights.
fn powerlaw_cdf(n: usize, alpha: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut cdf: Vec<f64> = (2..n)
        .map(|k| {
            acc += libm::pow(k as f64, alpha);
            acc
        })
        .collect();
    for c in &mut cdf {
        *c /= acc;
    }
    cdf
}

fn draw_degree<R: Rng + ?Sized>(cdf: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    2 + cdf.partition_point(|&c| c <= u).min(cdf.len() - 1)
}

/// Draws `n` i.i.d. degrees from `P(k) ∝ k^alpha` on `{2, ..., n-1}` and
/// redraws single nodes until the total is even.
pub fn powerlaw_degrees<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<Vec<usize>> {
    if n < 3 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "[3, inf)",
        });
    }
    if !alpha.is_finite() {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "finite reals",
        });
    }
    let cdf = powerlaw_cdf(n, alpha);
    let mut degrees: Vec<usize> = (0..n).map(|_| draw_degree(&cdf, rng)).collect();
    let mut total: usize = degrees.iter().sum();
    while total % 2 == 1 {
        let i = rng.random_range(0..n);
        total -= degrees[i];
        degrees[i] = draw_degree(&cdf, rng);
        total += degrees[i];
    }
    Ok(degrees)
}

fn ordered(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Pairs stubs uniformly at random, then removes self-loops and repeated
/// edges with degree-preserving double-edge swaps. Returns `None` when the
/// swap budget runs out.
fn match_stubs<R: Rng + ?Sized>(degrees: &[usize], rng: &mut R) -> Option<Adjacency> {
    let mut stubs: Vec<usize> = degrees
        .iter()
        .enumerate()
        .flat_map(|(i, &d)| core::iter::repeat_n(i, d))
        .collect();
    stubs.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = stubs.chunks(2).map(|c| ordered(c[0], c[1])).collect();
    let mut count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut bad = Vec::new();
    for (k, &e) in edges.iter().enumerate() {
        let c = count.entry(e).or_insert(0);
        *c += 1;
        if e.0 == e.1 || *c > 1 {
            bad.push(k);
        }
    }
    let is_bad = |e: (usize, usize), count: &BTreeMap<(usize, usize), u32>| {
        e.0 == e.1 || count.get(&e).copied().unwrap_or(0) > 1
    };
    let mut budget = 100 * edges.len() + 1_000;
    while let Some(&b) = bad.last() {
        if !is_bad(edges[b], &count) {
            bad.pop();
            continue;
        }
        if budget == 0 || edges.len() < 2 {
            return None;
        }
        budget -= 1;
        let e = rng.random_range(0..edges.len());
        if e == b {
            continue;
        }
        let (u, v) = edges[b];
        let (mut x, mut y) = edges[e];
        if rng.random_bool(0.5) {
            core::mem::swap(&mut x, &mut y);
        }
        let (f1, f2) = (ordered(u, x), ordered(v, y));
        if u == x || v == y || f1 == f2 || count.contains_key(&f1) || count.contains_key(&f2) {
            continue;
        }
        for old in [edges[b], edges[e]] {
            let c = count.get_mut(&old).unwrap();
            *c -= 1;
            if *c == 0 {
                count.remove(&old);
            }
        }
        count.insert(f1, 1);
        count.insert(f2, 1);
        edges[b] = f1;
        edges[e] = f2;
    }
    Adjacency::from_edges(degrees.len(), edges).ok()
}

/// Erdős–Gallai test: whether some simple graph has these degrees.
pub fn is_graphical(degrees: &[usize]) -> bool {
    let mut d = degrees.to_vec();
    d.sort_unstable_by(|a, b| b.cmp(a));
    let n = d.len();
    if d.iter().sum::<usize>() % 2 == 1 || d.first().is_some_and(|&m| m >= n.max(1)) {
        return false;
    }
    let mut lhs = 0;
    for k in 1..=n {
        lhs += d[k - 1];
        let rhs = k * (k - 1) + d[k..].iter().map(|&x| x.min(k)).sum::<usize>();
        if lhs > rhs {
            return false;
        }
    }
    true
}

/// Havel–Hakimi realisation of a graphical sequence.
fn havel_hakimi(degrees: &[usize]) -> Option<Adjacency> {
    let n = degrees.len();
    let mut g = Adjacency::empty(n);
    let mut residual: Vec<(usize, usize)> = degrees.iter().copied().zip(0..n).collect();
    loop {
        residual.sort_unstable_by(|a, b| b.cmp(a));
        let (d, u) = residual[0];
        if d == 0 {
            return Some(g);
        }
        residual[0].0 = 0;
        for slot in residual.iter_mut().skip(1).take(d) {
            if slot.0 == 0 {
                return None;
            }
            slot.0 -= 1;
            g.add_edge(u, slot.1);
        }
    }
}

/// Degree-preserving double-edge swaps that keep the graph simple.
fn randomize_swaps<R: Rng + ?Sized>(g: &mut Adjacency, swaps: usize, rng: &mut R) {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    if edges.len() < 2 {
        return;
    }
    for _ in 0..swaps {
        let a = rng.random_range(0..edges.len());
        let b = rng.random_range(0..edges.len());
        let ((u, v), (mut x, mut y)) = (edges[a], edges[b]);
        if rng.random_bool(0.5) {
            core::mem::swap(&mut x, &mut y);
        }
        if u == x || u == y || v == x || v == y || g.has_edge(u, x) || g.has_edge(v, y) {
            continue;
        }
        g.remove_edge(u, v);
        g.remove_edge(x, y);
        g.add_edge(u, x);
        g.add_edge(v, y);
        edges[a] = ordered(u, x);
        edges[b] = ordered(v, y);
    }
}

/// Configuration model with power-law degrees `P(k) ∝ k^alpha` on
/// `{2, ..., n-1}`.
///
/// Multi-edges and self-loops are rewired away rather than deleted, so the
/// minimum degree stays 2. Non-graphical degree draws are redrawn. Dense
/// sequences where local rewiring gets stuck are realised deterministically
/// and then scrambled with simple-graph edge swaps.
pub fn powerlaw_cm<R: Rng + ?Sized>(n: usize, alpha: f64, rng: &mut R) -> Result<Adjacency> {
    for _ in 0..MAX_DEGREE_RESAMPLES {
        let degrees = powerlaw_degrees(n, alpha, rng)?;
        if !is_graphical(&degrees) {
            continue;
        }
        if let Some(g) = match_stubs(&degrees, rng) {
            return Ok(g);
        }
        if let Some(mut g) = havel_hakimi(&degrees) {
            let swaps = 10 * g.edge_count();
            randomize_swaps(&mut g, swaps, rng);
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_DEGREE_RESAMPLES,
    })
}

/// Projection of a random bipartite graph in which each of the `n_type1`
/// nodes has degree 2 and each of the `2 * n_type1 / s` type-2 nodes has
/// degree `s`. Every type-2 node becomes a clique of size `s`.
pub fn clustered<R: Rng + ?Sized>(n_type1: usize, s: usize, rng: &mut R) -> Result<Adjacency> {
    if s < 2 {
        return Err(Error::OutOfRange {
            name: "s",
            value: s as f64,
            range: "[2, inf)",
        });
    }
    if !(2 * n_type1).is_multiple_of(s) {
        return Err(Error::Infeasible(format!(
            "2 * n_type1 = {} is not divisible by the clique size {s}",
            2 * n_type1
        )));
    }
    if s > n_type1 {
        return Err(Error::Infeasible(format!(
            "clique size {s} exceeds the {n_type1} type-1 nodes"
        )));
    }
    let groups = 2 * n_type1 / s;
    for _ in 0..MAX_DEGREE_RESAMPLES {
        if let Some(members) = bipartite_match(n_type1, groups, s, rng) {
            let mut g = Adjacency::empty(n_type1);
            for clique in members.chunks(s) {
                for (a, &u) in clique.iter().enumerate() {
                    for &v in &clique[a + 1..] {
                        g.add_edge(u, v);
                    }
                }
            }
            return Ok(g);
        }
    }
    Err(Error::GenerationFailed {
        attempts: MAX_DEGREE_RESAMPLES,
    })
}

/// Random bipartite matching of `n1` degree-2 nodes to `groups` degree-`s`
/// nodes without repeated edges. Returns the type-1 members of each group,
/// concatenated in group order.
fn bipartite_match<R: Rng + ?Sized>(
    n1: usize,
    groups: usize,
    s: usize,
    rng: &mut R,
) -> Option<Vec<usize>> {
    let mut members: Vec<usize> = (0..n1).flat_map(|i| [i, i]).collect();
    members.shuffle(rng);
    let group_of = |slot: usize| slot / s;
    let mut count: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut bad = Vec::new();
    for (slot, &u) in members.iter().enumerate() {
        let c = count.entry((u, group_of(slot))).or_insert(0);
        *c += 1;
        if *c > 1 {
            bad.push(slot);
        }
    }
    let mut budget = 100 * members.len() + 1_000;
    while let Some(&b) = bad.last() {
        let key = (members[b], group_of(b));
        if count.get(&key).copied().unwrap_or(0) <= 1 {
            bad.pop();
            continue;
        }
        if budget == 0 || groups < 2 {
            return None;
        }
        budget -= 1;
        let e = rng.random_range(0..members.len());
        let (gb, ge) = (group_of(b), group_of(e));
        let (u, w) = (members[b], members[e]);
        if gb == ge || count.contains_key(&(u, ge)) || count.contains_key(&(w, gb)) {
            continue;
        }
        for old in [(u, gb), (w, ge)] {
            let c = count.get_mut(&old).unwrap();
            *c -= 1;
            if *c == 0 {
                count.remove(&old);
            }
        }
        count.insert((u, ge), 1);
        count.insert((w, gb), 1);
        members.swap(b, e);
    }
    Some(members)
}

/// Watts–Strogatz graph: a ring where every node links to its `k / 2`
/// nearest neighbors on each side, with each lattice edge rewired to a
/// uniformly chosen new endpoint with probability `p`.
pub fn small_world<R: Rng + ?Sized>(n: usize, k: usize, p: f64, rng: &mut R) -> Result<Adjacency> {
    check_probability("p", p)?;
    if k % 2 == 1 || k == 0 || k >= n {
        return Err(Error::OutOfRange {
            name: "k",
            value: k as f64,
            range: "even, in [2, N)",
        });
    }
    let mut g = Adjacency::empty(n);
    for u in 0..n {
        for j in 1..=k / 2 {
            g.add_edge(u, (u + j) % n);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            if !rng.random_bool(p) {
                continue;
            }
            let v = (u + j) % n;
            if g.degree(u) >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !g.has_edge(u, w) {
                    break w;
                }
            };
            g.remove_edge(u, v);
            g.add_edge(u, w);
        }
    }
    Ok(g)
}

/// In- and out-block connection probabilities of [`sbm_two_block`].
///
/// `p_out = (1 - epsilon) * p0` with `p0 = mean_degree / (n - 1)`, and
/// `p_in` is set so the expected mean degree stays `mean_degree`. At
/// `epsilon = 0` both equal `p0`; at `epsilon = 1` no edges cross blocks.
pub fn sbm_probabilities(n: usize, mean_degree: f64, epsilon: f64) -> Result<(f64, f64)> {
    check_probability("epsilon", epsilon)?;
    if n < 4 {
        return Err(Error::OutOfRange {
            name: "N",
            value: n as f64,
            range: "[4, inf)",
        });
    }
    if mean_degree.is_nan() || mean_degree < 0.0 {
        return Err(Error::OutOfRange {
            name: "mean_degree",
            value: mean_degree,
            range: "[0, inf)",
        });
    }
    let (n1, n2) = ((n / 2) as f64, (n - n / 2) as f64);
    let within = n1 * (n1 - 1.0) / 2.0 + n2 * (n2 - 1.0) / 2.0;
    let p0 = mean_degree / (n as f64 - 1.0);
    let p_out = (1.0 - epsilon) * p0;
    let p_in = (n as f64 * mean_degree / 2.0 - n1 * n2 * p_out) / within;
    if p_in > 1.0 || p0 > 1.0 {
        return Err(Error::Infeasible(format!(
            "mean degree {mean_degree} cannot be reached with epsilon {epsilon} on {n} nodes"
        )));
    }
    Ok((p_in, p_out))
}

/// Two equal blocks (nodes `0..n/2` and `n/2..n`) with fixed expected mean
/// degree and imbalance `epsilon` interpolating from Erdős–Rényi (`0`) to two
/// disconnected communities (`1`).
pub fn sbm_two_block<R: Rng + ?Sized>(
    n: usize,
    mean_degree: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<Adjacency> {
    let (p_in, p_out) = sbm_probabilities(n, mean_degree, epsilon)?;
    let half = n / 2;
    let mut g = Adjacency::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < half) == (j < half) { p_in } else { p_out };
            if rng.random_bool(p) {
                g.add_edge(i, j);
            }
        }
    }
    Ok(g)
}

#[rustfmt::skip]
const ZKC_EDGES: [(usize, usize); 78] = [
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10), (0, 11),
    (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3), (1, 7), (1, 13),
    (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8), (2, 9), (2, 13), (2, 27),
    (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6), (4, 10), (5, 6), (5, 10), (5, 16),
    (6, 16), (8, 30), (8, 32), (8, 33), (9, 33), (13, 33), (14, 32), (14, 33), (15, 32),
    (15, 33), (18, 32), (18, 33), (19, 33), (20, 32), (20, 33), (22, 32), (22, 33), (23, 25),
    (23, 27), (23, 29), (23, 32), (23, 33), (24, 25), (24, 27), (24, 31), (25, 31), (26, 29),
    (26, 33), (27, 33), (28, 31), (28, 33), (29, 32), (29, 33), (30, 32), (30, 33), (31, 32),
    (31, 33), (32, 33),
];

/// Zachary's karate club: 34 members, 78 ties, 0-indexed.
pub fn zkc() -> Adjacency {
    Adjacency::from_edges(34, ZKC_EDGES).expect("static edge list is simple")
}
