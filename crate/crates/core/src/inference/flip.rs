//! Incremental evaluation of single edge flips.
//!
//! Toggling `{i, j}` only changes `nu_i(t)` at steps where `j` is infected and
//! `nu_j(t)` at steps where `i` is infected, and only susceptible steps feed
//! the counts. For every node we keep one bitset per infected-neighbor level
//! `l` marking the susceptible steps with `nu = l`. The count changes of a
//! flip are then popcounts of level bitsets against the partner's infection
//! bitset, `O(levels * T / 64)` word operations, and applying a flip shifts
//! the partner's infected steps one level up or down.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{log_beta, log_density_prior, Hyperparameters, SufficientStats};
use crate::dynamics::StateMatrix;
use crate::error::{Error, Result};
use crate::graph::Adjacency;

/// Bitset view of a trace, shared read-only by every chain.
#[derive(Debug, Clone)]
pub struct TraceIndex {
    nodes: usize,
    steps: usize,
    words: usize,
    /// `x_i(t) = 1` for `t < T`.
    infected: Vec<u64>,
    /// `x_i(t) = 0` for `t < T`.
    susceptible: Vec<u64>,
    /// `x_i(t + 1) = 1` for `t < T`.
    next_infected: Vec<u64>,
    g: u64,
    h: u64,
}

impl TraceIndex {
    pub fn new(x: &StateMatrix) -> Self {
        let (nodes, steps) = (x.node_count(), x.steps());
        let words = steps.div_ceil(64).max(1);
        let mut infected = vec![0u64; nodes * words];
        let mut susceptible = vec![0u64; nodes * words];
        let mut next_infected = vec![0u64; nodes * words];
        let (mut g, mut h) = (0, 0);
        for t in 0..steps {
            let (cur, next) = (x.row(t), x.row(t + 1));
            let (w, bit) = (t / 64, 1u64 << (t % 64));
            for i in 0..nodes {
                let at = i * words + w;
                if cur[i] == 1 {
                    infected[at] |= bit;
                    if next[i] == 1 {
                        g += 1;
                    } else {
                        h += 1;
                    }
                } else {
                    susceptible[at] |= bit;
                }
                if next[i] == 1 {
                    next_infected[at] |= bit;
                }
            }
        }
        Self {
            nodes,
            steps,
            words,
            infected,
            susceptible,
            next_infected,
            g,
            h,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn infected(&self, i: usize) -> &[u64] {
        &self.infected[i * self.words..(i + 1) * self.words]
    }

    fn susceptible(&self, i: usize) -> &[u64] {
        &self.susceptible[i * self.words..(i + 1) * self.words]
    }

    fn next_infected(&self, i: usize) -> &[u64] {
        &self.next_infected[i * self.words..(i + 1) * self.words]
    }

    fn is_infected(&self, i: usize, t: usize) -> bool {
        self.infected(i)[t / 64] >> (t % 64) & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    i: usize,
    j: usize,
    adding: bool,
    delta: f64,
    prior: f64,
}

/// Graph state of one chain together with its sufficient statistics and log
/// posterior, updated in place by edge flips.
#[derive(Debug, Clone)]
pub struct FlipState<'a> {
    trace: &'a TraceIndex,
    hyper: &'a Hyperparameters,
    graph: Adjacency,
    /// Per node, `levels[i].len() / words` level bitsets, level-major.
    levels: Vec<Vec<u64>>,
    m: Vec<u64>,
    n: Vec<u64>,
    /// Cached `ln B(m_l + a_l, n_l + b_l)`.
    ln_b: Vec<f64>,
    ln_prior: f64,
    log_post: f64,
    dm: Vec<i64>,
    dn: Vec<i64>,
    touched: Vec<usize>,
    is_touched: Vec<bool>,
    new_ln_b: Vec<f64>,
    pending: Option<Pending>,
}

impl<'a> FlipState<'a> {
    pub fn new(trace: &'a TraceIndex, hyper: &'a Hyperparameters, graph: Adjacency) -> Result<Self> {
        let nodes = trace.node_count();
        if graph.node_count() != nodes {
            return Err(Error::Dimension(format!(
                "graph has {} nodes, trace has {nodes}",
                graph.node_count()
            )));
        }
        hyper.check_nodes(nodes)?;
        let words = trace.words;
        let mut levels: Vec<Vec<u64>> = (0..nodes)
            .map(|i| vec![0u64; (graph.degree(i) + 2) * words])
            .collect();
        let mut m = vec![0u64; nodes];
        let mut n = vec![0u64; nodes];
        for t in 0..trace.steps() {
            let (w, bit) = (t / 64, 1u64 << (t % 64));
            for (i, level) in levels.iter_mut().enumerate() {
                if trace.susceptible(i)[w] & bit == 0 {
                    continue;
                }
                let nu = graph
                    .neighbors(i)
                    .iter()
                    .filter(|&&j| trace.is_infected(j, t))
                    .count();
                level[nu * words + w] |= bit;
                if trace.next_infected(i)[w] & bit != 0 {
                    m[nu] += 1;
                } else {
                    n[nu] += 1;
                }
            }
        }
        let ln_b: Vec<f64> = (0..nodes)
            .map(|l| log_beta(m[l] as f64 + hyper.a_c[l], n[l] as f64 + hyper.b_c[l]))
            .collect();
        let ln_prior = log_density_prior(graph.edge_count(), nodes, hyper);
        let log_post = ln_prior + ln_b.iter().sum::<f64>();
        Ok(Self {
            trace,
            hyper,
            graph,
            levels,
            m,
            n,
            ln_b,
            ln_prior,
            log_post,
            dm: vec![0; nodes],
            dn: vec![0; nodes],
            touched: Vec::new(),
            is_touched: vec![false; nodes],
            new_ln_b: Vec::new(),
            pending: None,
        })
    }

    pub fn graph(&self) -> &Adjacency {
        &self.graph
    }

    /// Current unnormalized log marginal posterior (accumulated from deltas).
    pub fn log_posterior(&self) -> f64 {
        self.log_post
    }

    pub fn stats(&self) -> SufficientStats {
        SufficientStats {
            m: self.m.clone(),
            n: self.n.clone(),
            g: self.trace.g,
            h: self.trace.h,
        }
    }

    /// Recomputes the log posterior from the maintained counts, discarding
    /// rounding drift accumulated over many deltas.
    pub fn resync(&mut self) {
        self.log_post = self.ln_prior + self.ln_b.iter().sum::<f64>();
    }

    fn mark(&mut self, l: usize) {
        if !self.is_touched[l] {
            self.is_touched[l] = true;
            self.touched.push(l);
        }
    }

    /// Accumulates the count changes seen by `node` when its edge to
    /// `partner` is toggled.
    fn accumulate(&mut self, node: usize, partner: usize, adding: bool) {
        let words = self.trace.words;
        let infected = self.trace.infected(partner);
        let outcome = self.trace.next_infected(node);
        let top = self.graph.degree(node);
        for l in 0..=top {
            let level = &self.levels[node][l * words..(l + 1) * words];
            let (mut total, mut hits) = (0u32, 0u32);
            for ((&b, &inf), &out) in level.iter().zip(infected).zip(outcome) {
                let moved = b & inf;
                total += moved.count_ones();
                hits += (moved & out).count_ones();
            }
            if total == 0 {
                continue;
            }
            let target = if adding { l + 1 } else { l - 1 };
            let (hits, misses) = (hits as i64, (total - hits) as i64);
            self.dm[l] -= hits;
            self.dn[l] -= misses;
            self.dm[target] += hits;
            self.dn[target] += misses;
            self.mark(l);
            self.mark(target);
        }
    }

    /// Change in log posterior from toggling `{i, j}`, without applying it.
    /// Follow with [`accept`](Self::accept) or [`reject`](Self::reject).
    ///
    /// # Panics
    /// If `i == j`, a node is out of range, or a proposal is already pending.
    pub fn propose(&mut self, i: usize, j: usize) -> f64 {
        assert!(i != j, "cannot flip a self-loop");
        assert!(self.pending.is_none(), "a flip is already pending");
        let adding = !self.graph.has_edge(i, j);
        self.accumulate(i, j, adding);
        self.accumulate(j, i, adding);

        self.new_ln_b.clear();
        let mut delta = 0.0;
        for &l in &self.touched {
            let m = (self.m[l] as i64 + self.dm[l]) as f64;
            let n = (self.n[l] as i64 + self.dn[l]) as f64;
            let v = if self.dm[l] == 0 && self.dn[l] == 0 {
                self.ln_b[l]
            } else {
                log_beta(m + self.hyper.a_c[l], n + self.hyper.b_c[l])
            };
            delta += v - self.ln_b[l];
            self.new_ln_b.push(v);
        }
        let edges = self.graph.edge_count();
        let edges = if adding { edges + 1 } else { edges - 1 };
        let prior = log_density_prior(edges, self.trace.node_count(), self.hyper);
        delta += prior - self.ln_prior;
        self.pending = Some(Pending {
            i,
            j,
            adding,
            delta,
            prior,
        });
        delta
    }

    fn clear_scratch(&mut self) {
        for &l in &self.touched {
            self.dm[l] = 0;
            self.dn[l] = 0;
            self.is_touched[l] = false;
        }
        self.touched.clear();
        self.pending = None;
    }

    /// Discards the pending proposal.
    pub fn reject(&mut self) {
        self.clear_scratch();
    }

    /// Applies the pending proposal.
    ///
    /// # Panics
    /// If nothing is pending.
    pub fn accept(&mut self) {
        let p = self.pending.expect("no pending flip");
        for (k, &l) in self.touched.iter().enumerate() {
            self.m[l] = (self.m[l] as i64 + self.dm[l]) as u64;
            self.n[l] = (self.n[l] as i64 + self.dn[l]) as u64;
            self.ln_b[l] = self.new_ln_b[k];
        }
        self.ln_prior = p.prior;
        self.log_post += p.delta;
        self.shift_levels(p.i, p.j, p.adding);
        self.shift_levels(p.j, p.i, p.adding);
        self.graph.toggle(p.i, p.j);
        self.clear_scratch();
    }

    /// Proposes and applies the flip of `{i, j}`, returning the change in log
    /// posterior.
    pub fn flip(&mut self, i: usize, j: usize) -> f64 {
        let d = self.propose(i, j);
        self.accept();
        d
    }

    /// Moves the steps where `partner` is infected one level up (edge added)
    /// or down (edge removed) in `node`'s level bitsets. Must run before the
    /// graph is toggled, since the current degree bounds the occupied levels.
    fn shift_levels(&mut self, node: usize, partner: usize, adding: bool) {
        let words = self.trace.words;
        let degree = self.graph.degree(node);
        let needed = (degree + 3) * words;
        if self.levels[node].len() < needed {
            self.levels[node].resize(needed, 0);
        }
        let infected = self.trace.infected(partner);
        let levels = &mut self.levels[node];
        if adding {
            for l in (0..=degree + 1).rev() {
                for w in 0..words {
                    let below = if l == 0 { 0 } else { levels[(l - 1) * words + w] };
                    let here = &mut levels[l * words + w];
                    *here = (*here & !infected[w]) | (below & infected[w]);
                }
            }
        } else {
            for l in 0..=degree {
                for w in 0..words {
                    let above = levels[(l + 1) * words + w];
                    let here = &mut levels[l * words + w];
                    *here = (*here & !infected[w]) | (above & infected[w]);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, ContagionFunction, DynamicsParams};
    use crate::inference::{log_marginal_posterior, sufficient_statistics};
    use crate::netgen::erdos_renyi;
    use crate::rng::seeded;
    use rand::Rng;

    fn random_instance(seed: u64, n: usize, steps: usize) -> (StateMatrix, Adjacency) {
        let mut rng = seeded(seed);
        let truth = erdos_renyi(n, 0.3, &mut rng).unwrap();
        let params =
            DynamicsParams::new(0.3, ContagionFunction::simple(0.3).unwrap()).unwrap();
        let x0: Vec<u8> = (0..n).map(|_| rng.random_bool(0.5) as u8).collect();
        let x = simulate(&truth, &params, &x0, steps, &mut rng).unwrap();
        let start = erdos_renyi(n, 0.5, &mut rng).unwrap();
        (x, start)
    }

    #[test]
    fn initial_state_matches_full_computation() {
        let (x, a) = random_instance(1, 9, 150);
        let trace = TraceIndex::new(&x);
        let hyper = Hyperparameters::uniform(9);
        let state = FlipState::new(&trace, &hyper, a.clone()).unwrap();
        let stats = sufficient_statistics(&x, &a).unwrap();
        assert_eq!(state.stats(), stats);
        let full = log_marginal_posterior(&a, &stats, &hyper).unwrap();
        assert!((state.log_posterior() - full).abs() < 1e-9);
    }

    #[test]
    fn flips_track_full_recomputation() {
        let (x, a) = random_instance(2, 12, 300);
        let trace = TraceIndex::new(&x);
        let hyper = Hyperparameters::uniform(12);
        let mut state = FlipState::new(&trace, &hyper, a).unwrap();
        let mut rng = seeded(3);
        for _ in 0..500 {
            let i = rng.random_range(0..12);
            let j = (i + rng.random_range(1..12)) % 12;
            let before = state.log_posterior();
            let delta = state.propose(i, j);
            if rng.random_bool(0.5) {
                state.accept();
                let stats = sufficient_statistics(&x, state.graph()).unwrap();
                assert_eq!(state.stats(), stats);
                let full = log_marginal_posterior(state.graph(), &stats, &hyper).unwrap();
                assert!((before + delta - full).abs() < 1e-8);
            } else {
                state.reject();
                assert_eq!(state.log_posterior(), before);
            }
        }
    }

    #[test]
    fn double_flip_restores_counts() {
        let (x, a) = random_instance(4, 8, 200);
        let trace = TraceIndex::new(&x);
        let hyper = Hyperparameters::uniform(8);
        let mut state = FlipState::new(&trace, &hyper, a.clone()).unwrap();
        let before = state.stats();
        let levels = state.levels.clone();
        let d1 = state.flip(2, 5);
        let d2 = state.flip(5, 2);
        assert_eq!(state.stats(), before);
        assert_eq!(state.graph(), &a);
        assert!((d1 + d2).abs() < 1e-9);
        for (old, new) in levels.iter().zip(&state.levels) {
            assert_eq!(old[..], new[..old.len()]);
            assert!(new[old.len()..].iter().all(|&w| w == 0));
        }
    }

    #[test]
    fn dormant_pair_changes_only_the_prior() {
        // Nodes 0 and 1 always share a state, so neither is ever susceptible
        // while the other is infected.
        let rows = vec![vec![1, 1, 0], vec![0, 0, 1], vec![1, 1, 0], vec![0, 0, 0]];
        let x = StateMatrix::from_rows(&rows).unwrap();
        let trace = TraceIndex::new(&x);
        let hyper = Hyperparameters::uniform(3);
        let mut state = FlipState::new(&trace, &hyper, Adjacency::empty(3)).unwrap();
        let delta = state.flip(0, 1);
        let expected = log_density_prior(1, 3, &hyper) - log_density_prior(0, 3, &hyper);
        assert!((delta - expected).abs() < 1e-12);
        assert_eq!(state.stats(), sufficient_statistics(&x, state.graph()).unwrap());
    }
}
