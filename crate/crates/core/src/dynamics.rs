//! Neighborhood-based SIS dynamics.
//!
//! At every step each infected node recovers with probability `gamma` and each
//! susceptible node with `nu` infected neighbors becomes infected with
//! probability `c(nu)`. All nodes update synchronously from the state at the
//! start of the step.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{check_probability, Error, Result};
use crate::graph::Adjacency;

/// `1 - (1 - beta)^nu`: independent exposures, each transmitting with `beta`.
pub fn eval_simple(nu: usize, beta: f64) -> Result<f64> {
    check_probability("beta", beta)?;
    Ok(simple(nu, beta))
}

/// `beta` when `nu >= tau`, zero otherwise.
pub fn eval_threshold(nu: usize, beta: f64, tau: usize) -> Result<f64> {
    check_probability("beta", beta)?;
    check_tau(tau)?;
    Ok(threshold(nu, beta, tau))
}

/// `(1 - omega) * simple + omega * threshold`.
pub fn eval_mixture(nu: usize, beta: f64, omega: f64, tau: usize) -> Result<f64> {
    check_probability("beta", beta)?;
    check_probability("omega", omega)?;
    check_tau(tau)?;
    Ok(mixture(nu, beta, omega, tau))
}

fn check_tau(tau: usize) -> Result<usize> {
    if tau == 0 {
        Err(Error::OutOfRange {
            name: "tau",
            value: 0.0,
            range: "[1, inf)",
        })
    } else {
        Ok(tau)
    }
}

fn simple(nu: usize, beta: f64) -> f64 {
    if nu == 0 {
        0.0
    } else {
        1.0 - libm::pow(1.0 - beta, nu as f64)
    }
}

fn threshold(nu: usize, beta: f64, tau: usize) -> f64 {
    if nu >= tau {
        beta
    } else {
        0.0
    }
}

fn mixture(nu: usize, beta: f64, omega: f64, tau: usize) -> f64 {
    (1.0 - omega) * simple(nu, beta) + omega * threshold(nu, beta, tau)
}

/// Infection probability as a function of the number of infected neighbors.
///
/// Construct through the checked constructors; evaluation is then infallible.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ContagionFunction {
    Simple { beta: f64 },
    Threshold { beta: f64, tau: usize },
    Mixture { beta: f64, omega: f64, tau: usize },
    /// Nonparametric vector `c_0, c_1, ...`; counts past the end use the last entry.
    Tabulated { values: Vec<f64> },
}

impl ContagionFunction {
    pub fn simple(beta: f64) -> Result<Self> {
        check_probability("beta", beta)?;
        Ok(Self::Simple { beta })
    }

    pub fn threshold(beta: f64, tau: usize) -> Result<Self> {
        check_probability("beta", beta)?;
        check_tau(tau)?;
        Ok(Self::Threshold { beta, tau })
    }

    pub fn mixture(beta: f64, omega: f64, tau: usize) -> Result<Self> {
        check_probability("beta", beta)?;
        check_probability("omega", omega)?;
        check_tau(tau)?;
        Ok(Self::Mixture { beta, omega, tau })
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("contagion vector"));
        }
        for &v in &values {
            check_probability("c", v)?;
        }
        Ok(Self::Tabulated { values })
    }

    /// Re-checks the parameter ranges (for values that bypassed the constructors,
    /// e.g. after deserialization).
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Simple { beta } => Self::simple(*beta).map(drop),
            Self::Threshold { beta, tau } => Self::threshold(*beta, *tau).map(drop),
            Self::Mixture { beta, omega, tau } => Self::mixture(*beta, *omega, *tau).map(drop),
            Self::Tabulated { values } => Self::tabulated(values.clone()).map(drop),
        }
    }

    pub fn eval(&self, nu: usize) -> f64 {
        match *self {
            Self::Simple { beta } => simple(nu, beta),
            Self::Threshold { beta, tau } => threshold(nu, beta, tau),
            Self::Mixture { beta, omega, tau } => mixture(nu, beta, omega, tau),
            Self::Tabulated { ref values } => values[nu.min(values.len() - 1)],
        }
    }

    /// The contagion vector `c_0 .. c_{n-1}`.
    pub fn to_vector(&self, n: usize) -> Vec<f64> {
        (0..n).map(|nu| self.eval(nu)).collect()
    }

    /// The infectivity parameter, if the function has one.
    pub fn beta(&self) -> Option<f64> {
        match *self {
            Self::Simple { beta } | Self::Threshold { beta, .. } | Self::Mixture { beta, .. } => {
                Some(beta)
            }
            Self::Tabulated { .. } => None,
        }
    }
}

/// Recovery probability plus contagion function.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DynamicsParams {
    pub gamma: f64,
    pub contagion: ContagionFunction,
}

impl DynamicsParams {
    pub fn new(gamma: f64, contagion: ContagionFunction) -> Result<Self> {
        check_probability("gamma", gamma)?;
        contagion.validate()?;
        Ok(Self { gamma, contagion })
    }
}

/// Node states over time: row `t` is `x(t)`, for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMatrix {
    nodes: usize,
    states: Vec<u8>,
}

impl StateMatrix {
    /// Builds a matrix from rows of 0/1 states. Needs at least one row and
    /// equal row lengths.
    pub fn from_rows(rows: &[Vec<u8>]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("state matrix"))?;
        let nodes = first.len();
        let mut states = Vec::with_capacity(rows.len() * nodes);
        for (t, row) in rows.iter().enumerate() {
            if row.len() != nodes {
                return Err(Error::Dimension(format!(
                    "row {t} has {} columns, expected {nodes}",
                    row.len()
                )));
            }
            check_binary(row, t)?;
            states.extend_from_slice(row);
        }
        Ok(Self { nodes, states })
    }

    fn with_first_row(x0: &[u8], steps: usize) -> Self {
        let mut states = Vec::with_capacity((steps + 1) * x0.len());
        states.extend_from_slice(x0);
        Self {
            nodes: x0.len(),
            states,
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes
    }

    /// Number of observed transitions `T` (one less than the row count).
    pub fn steps(&self) -> usize {
        self.states
            .len()
            .checked_div(self.nodes)
            .map_or(0, |rows| rows - 1)
    }

    pub fn row(&self, t: usize) -> &[u8] {
        &self.states[t * self.nodes..(t + 1) * self.nodes]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        self.states.chunks(self.nodes.max(1))
    }

    pub fn get(&self, t: usize, i: usize) -> u8 {
        self.states[t * self.nodes + i]
    }

    /// Time series of node `i`.
    pub fn column(&self, i: usize) -> Vec<u8> {
        (0..=self.steps()).map(|t| self.get(t, i)).collect()
    }

    /// Fraction of infected nodes at each time.
    pub fn prevalence(&self) -> Vec<f64> {
        self.rows()
            .map(|r| r.iter().map(|&x| x as usize).sum::<usize>() as f64 / self.nodes as f64)
            .collect()
    }

    fn push_row(&mut self, row: &[u8]) {
        self.states.extend_from_slice(row);
    }
}

fn check_binary(x: &[u8], t: usize) -> Result<()> {
    match x.iter().position(|&v| v > 1) {
        Some(i) => Err(Error::InvalidStates(format!(
            "state {} at (t={t}, node={i}) is not 0/1",
            x[i]
        ))),
        None => Ok(()),
    }
}

fn check_len(a: &Adjacency, x: &[u8]) -> Result<()> {
    if a.node_count() == x.len() {
        Ok(())
    } else {
        Err(Error::Dimension(format!(
            "graph has {} nodes but the state vector has {}",
            a.node_count(),
            x.len()
        )))
    }
}

/// `nu_i = sum_j A_ij x_j` for every node.
pub fn infected_neighbor_counts(a: &Adjacency, x: &[u8]) -> Result<Vec<usize>> {
    check_len(a, x)?;
    Ok(neighbor_counts(a, x))
}

fn neighbor_counts(a: &Adjacency, x: &[u8]) -> Vec<usize> {
    let mut nu = vec![0usize; x.len()];
    for (j, _) in x.iter().enumerate().filter(|(_, &s)| s == 1) {
        for &i in a.neighbors(j) {
            nu[i] += 1;
        }
    }
    nu
}

/// One synchronous update driven by a uniform draw per node: node `i`
/// recovers (if infected) when `u[i] < gamma` and gets infected (if
/// susceptible) when `u[i] < c(nu_i)`.
pub fn step_with_uniforms(
    a: &Adjacency,
    x: &[u8],
    params: &DynamicsParams,
    uniforms: &[f64],
) -> Result<Vec<u8>> {
    check_len(a, x)?;
    if uniforms.len() != x.len() {
        return Err(Error::Dimension(format!(
            "{} uniforms for {} nodes",
            uniforms.len(),
            x.len()
        )));
    }
    let nu = neighbor_counts(a, x);
    Ok(x.iter()
        .zip(&nu)
        .zip(uniforms)
        .map(|((&xi, &k), &u)| next_state(xi, k, u, params))
        .collect())
}

#[inline]
fn next_state(xi: u8, nu: usize, u: f64, params: &DynamicsParams) -> u8 {
    if xi == 1 {
        (u >= params.gamma) as u8
    } else {
        (u < params.contagion.eval(nu)) as u8
    }
}

/// One synchronous update with fresh draws from `rng` (one uniform per node,
/// in node order).
pub fn step<R: Rng + ?Sized>(
    a: &Adjacency,
    x: &[u8],
    params: &DynamicsParams,
    rng: &mut R,
) -> Result<Vec<u8>> {
    check_len(a, x)?;
    let mut out = vec![0u8; x.len()];
    step_into(a, x, params, rng, &mut vec![0; x.len()], &mut out);
    Ok(out)
}

fn step_into<R: Rng + ?Sized>(
    a: &Adjacency,
    x: &[u8],
    params: &DynamicsParams,
    rng: &mut R,
    nu: &mut [usize],
    out: &mut [u8],
) {
    nu.iter_mut().for_each(|k| *k = 0);
    for (j, _) in x.iter().enumerate().filter(|(_, &s)| s == 1) {
        for &i in a.neighbors(j) {
            nu[i] += 1;
        }
    }
    for i in 0..x.len() {
        let u: f64 = rng.random();
        out[i] = next_state(x[i], nu[i], u, params);
    }
}

/// Runs `steps` updates from `x0` and records every state, `x(0) = x0`.
///
/// An absorbing all-susceptible state is recorded as is until the end.
pub fn simulate<R: Rng + ?Sized>(
    a: &Adjacency,
    params: &DynamicsParams,
    x0: &[u8],
    steps: usize,
    rng: &mut R,
) -> Result<StateMatrix> {
    check_len(a, x0)?;
    check_binary(x0, 0)?;
    if steps == 0 {
        return Err(Error::OutOfRange {
            name: "T",
            value: 0.0,
            range: "[1, inf)",
        });
    }
    let n = x0.len();
    let mut out = StateMatrix::with_first_row(x0, steps);
    let mut cur = x0.to_vec();
    let mut next = vec![0u8; n];
    let mut nu = vec![0usize; n];
    for _ in 0..steps {
        step_into(a, &cur, params, rng, &mut nu, &mut next);
        out.push_row(&next);
        core::mem::swap(&mut cur, &mut next);
    }
    Ok(out)
}

/// Log-probability of one node's transition `x_prev -> x_next` given its
/// infected-neighbor count.
pub fn transition_log_prob(x_prev: u8, x_next: u8, nu: usize, params: &DynamicsParams) -> f64 {
    let (p, event) = if x_prev == 1 {
        (params.gamma, x_next == 0)
    } else {
        (params.contagion.eval(nu), x_next == 1)
    };
    if event {
        libm::log(p)
    } else {
        libm::log1p(-p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn triangle() -> Adjacency {
        Adjacency::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    fn star(leaves: usize) -> Adjacency {
        Adjacency::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l))).unwrap()
    }

    #[test]
    fn simple_values() {
        assert_eq!(eval_simple(0, 0.5).unwrap(), 0.0);
        assert!((eval_simple(1, 0.04).unwrap() - 0.04).abs() < 1e-15);
        assert!((eval_simple(2, 0.5).unwrap() - 0.75).abs() < 1e-15);
        assert!(eval_simple(1, 1.5).is_err());
        assert!(eval_simple(1, -0.1).is_err());
    }

    #[test]
    fn threshold_values() {
        assert_eq!(eval_threshold(1, 1.0, 2).unwrap(), 0.0);
        assert_eq!(eval_threshold(2, 1.0, 2).unwrap(), 1.0);
        assert_eq!(eval_threshold(5, 0.3, 3).unwrap(), 0.3);
        assert!(eval_threshold(5, 0.3, 0).is_err());
    }

    #[test]
    fn mixture_values() {
        assert_eq!(
            eval_mixture(3, 0.2, 0.0, 2).unwrap(),
            eval_simple(3, 0.2).unwrap()
        );
        assert_eq!(eval_mixture(3, 0.2, 1.0, 2).unwrap(), 0.2);
        assert!((eval_mixture(2, 0.5, 0.5, 2).unwrap() - 0.625).abs() < 1e-15);
        assert!(eval_mixture(2, 0.5, 1.5, 2).is_err());
    }

    #[test]
    fn tabulated_clamps_past_end() {
        let c = ContagionFunction::tabulated(vec![0.0, 0.2, 0.9]).unwrap();
        assert_eq!(c.eval(1), 0.2);
        assert_eq!(c.eval(7), 0.9);
        assert!(ContagionFunction::tabulated(vec![0.1, 1.1]).is_err());
        assert!(ContagionFunction::tabulated(vec![]).is_err());
    }

    #[test]
    fn neighbor_counts_examples() {
        let g = triangle();
        assert_eq!(infected_neighbor_counts(&g, &[1, 1, 0]).unwrap(), vec![1, 1, 2]);
        assert_eq!(infected_neighbor_counts(&g, &[0, 0, 0]).unwrap(), vec![0, 0, 0]);
        let empty = Adjacency::empty(3);
        assert_eq!(infected_neighbor_counts(&empty, &[1, 1, 1]).unwrap(), vec![0, 0, 0]);
        assert!(infected_neighbor_counts(&g, &[1, 1]).is_err());
    }

    #[test]
    fn full_recovery_when_gamma_is_one() {
        let g = triangle();
        let p = DynamicsParams::new(1.0, ContagionFunction::simple(0.0).unwrap()).unwrap();
        let mut rng = seeded(1);
        assert_eq!(step(&g, &[1, 0, 1], &p, &mut rng).unwrap(), vec![0, 0, 0]);
    }

    #[test]
    fn frozen_dynamics_keep_state() {
        let g = star(4);
        let p = DynamicsParams::new(0.0, ContagionFunction::simple(0.0).unwrap()).unwrap();
        let x0 = [1, 0, 1, 0, 0];
        let x = simulate(&g, &p, &x0, 5, &mut seeded(2)).unwrap();
        assert_eq!(x.steps(), 5);
        assert!(x.rows().all(|r| r == x0));
    }

    #[test]
    fn single_step_simulation_matches_step() {
        let g = triangle();
        let p = DynamicsParams::new(0.3, ContagionFunction::simple(0.6).unwrap()).unwrap();
        let x = simulate(&g, &p, &[1, 0, 0], 1, &mut seeded(5)).unwrap();
        let y = step(&g, &[1, 0, 0], &p, &mut seeded(5)).unwrap();
        assert_eq!(x.steps(), 1);
        assert_eq!(x.row(0), &[1, 0, 0]);
        assert_eq!(x.row(1), &y[..]);
        assert!(simulate(&g, &p, &[1, 0, 0], 0, &mut seeded(5)).is_err());
    }

    #[test]
    fn threshold_star_never_infects_leaves() {
        let g = star(6);
        let p = DynamicsParams::new(0.2, ContagionFunction::threshold(1.0, 2).unwrap()).unwrap();
        let mut x0 = vec![0u8; 7];
        x0[0] = 1;
        let x = simulate(&g, &p, &x0, 200, &mut seeded(9)).unwrap();
        for t in 0..=200 {
            for leaf in 1..7 {
                assert_eq!(x.get(t, leaf), 0);
            }
        }
    }

    #[test]
    fn update_is_synchronous() {
        // Reference that visits nodes in reverse order while reading only the
        // old state.
        let g = Adjacency::from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0), (1, 3)]).unwrap();
        let p = DynamicsParams::new(0.4, ContagionFunction::simple(0.5).unwrap()).unwrap();
        let x = [1, 0, 0, 1, 0];
        let u = [0.1, 0.3, 0.6, 0.9, 0.45];
        let fwd = step_with_uniforms(&g, &x, &p, &u).unwrap();
        let mut rev = vec![0u8; 5];
        for i in (0..5).rev() {
            let nu = g.neighbors(i).iter().filter(|&&j| x[j] == 1).count();
            rev[i] = next_state(x[i], nu, u[i], &p);
        }
        assert_eq!(fwd, rev);
        assert_eq!(fwd, vec![0, 1, 0, 1, 1]);
    }

    #[test]
    fn transition_probabilities_are_normalized() {
        let p = DynamicsParams::new(0.3, ContagionFunction::simple(0.2).unwrap()).unwrap();
        for prev in 0..2 {
            for nu in 0..4 {
                let total: f64 = (0..2)
                    .map(|next| libm::exp(transition_log_prob(prev, next, nu, &p)))
                    .sum();
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn state_matrix_validation() {
        assert!(StateMatrix::from_rows(&[]).is_err());
        assert!(StateMatrix::from_rows(&[vec![0, 1], vec![1]]).is_err());
        assert!(StateMatrix::from_rows(&[vec![0, 2]]).is_err());
        let x = StateMatrix::from_rows(&[vec![0, 1], vec![1, 1]]).unwrap();
        assert_eq!(x.steps(), 1);
        assert_eq!(x.column(0), vec![0, 1]);
        assert_eq!(x.prevalence(), vec![0.5, 1.0]);
    }
}
