//! Matching the intensity of one contagion to another.
//!
//! Intensity is measured by the largest number of infection events any node
//! experiences in a trace. A contagion family with a free `beta` is tuned by
//! Robbins–Monro stochastic approximation until its expected intensity
//! matches a reference process.

use alloc::vec::Vec;

use rand::Rng;

use crate::dynamics::{simulate, ContagionFunction, DynamicsParams, StateMatrix};
use crate::error::{check_positive, check_probability, Error, Result};
use crate::graph::Adjacency;

/// Infection events (susceptible to infected transitions) of every node.
pub fn infection_counts(x: &StateMatrix) -> Vec<u64> {
    let n = x.node_count();
    let mut counts = alloc::vec![0u64; n];
    for t in 0..x.steps() {
        let (cur, next) = (x.row(t), x.row(t + 1));
        for i in 0..n {
            if cur[i] == 0 && next[i] == 1 {
                counts[i] += 1;
            }
        }
    }
    counts
}

/// Largest per-node number of infection events in the trace.
pub fn trace_statistic(x: &StateMatrix) -> f64 {
    infection_counts(x).into_iter().max().unwrap_or(0) as f64
}

/// How per-trace infection counts are reduced to an intensity over a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum IntensityStatistic {
    /// Mean over traces of the per-trace maximum over nodes.
    #[default]
    MeanOfMax,
    /// Maximum over nodes of the per-node mean over traces.
    MaxOfMean,
}

impl IntensityStatistic {
    /// Reduces a batch of traces; also returns the standard error for
    /// `MeanOfMax` (zero for `MaxOfMean` and for single traces).
    pub fn reduce(&self, traces: &[StateMatrix]) -> (f64, f64) {
        let r = traces.len() as f64;
        match self {
            Self::MeanOfMax => {
                let values: Vec<f64> = traces.iter().map(trace_statistic).collect();
                let mean = values.iter().sum::<f64>() / r;
                if traces.len() < 2 {
                    return (mean, 0.0);
                }
                let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
                (mean, libm::sqrt(var / r))
            }
            Self::MaxOfMean => {
                let mut totals: Vec<u64> = Vec::new();
                for x in traces {
                    let c = infection_counts(x);
                    if totals.is_empty() {
                        totals = c;
                    } else {
                        totals.iter_mut().zip(c).for_each(|(t, v)| *t += v);
                    }
                }
                let max = totals.into_iter().max().unwrap_or(0) as f64;
                (max / r, 0.0)
            }
        }
    }
}

/// A contagion family with `beta` left free.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ContagionFamily {
    Simple,
    Threshold { tau: usize },
    Mixture { omega: f64, tau: usize },
}

impl ContagionFamily {
    pub fn with_beta(&self, beta: f64) -> Result<ContagionFunction> {
        match *self {
            Self::Simple => ContagionFunction::simple(beta),
            Self::Threshold { tau } => ContagionFunction::threshold(beta, tau),
            Self::Mixture { omega, tau } => ContagionFunction::mixture(beta, omega, tau),
        }
    }

    /// The family a parametric contagion function belongs to.
    pub fn of(c: &ContagionFunction) -> Option<Self> {
        match *c {
            ContagionFunction::Simple { .. } => Some(Self::Simple),
            ContagionFunction::Threshold { tau, .. } => Some(Self::Threshold { tau }),
            ContagionFunction::Mixture { omega, tau, .. } => Some(Self::Mixture { omega, tau }),
            ContagionFunction::Tabulated { .. } => None,
        }
    }
}

/// Robbins–Monro settings.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct CalibrationTarget {
    /// Intensity to match.
    pub reference_value: f64,
    /// Largest spread of the averaging window, and largest mean residual, for
    /// the run to count as converged.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Step sizes are `a0 / k`.
    pub a0: f64,
    /// Starting `beta`.
    pub beta0: f64,
    /// Fraction of final iterates averaged into the result.
    pub averaging_fraction: f64,
    /// Traces simulated per iteration.
    pub batch: usize,
    pub statistic: IntensityStatistic,
    /// Divide residuals by `reference_value` so `a0` is unitless. Without it
    /// count statistics in the hundreds swamp any `beta` step.
    pub relative: bool,
}

impl Default for CalibrationTarget {
    fn default() -> Self {
        Self {
            reference_value: 0.0,
            tolerance: 0.01,
            max_iterations: 200,
            a0: 0.1,
            beta0: 0.5,
            averaging_fraction: 0.25,
            batch: 1,
            statistic: IntensityStatistic::MeanOfMax,
            relative: false,
        }
    }
}

impl CalibrationTarget {
    pub fn validate(&self) -> Result<()> {
        check_positive("tolerance", self.tolerance)?;
        check_positive("a0", self.a0)?;
        check_probability("beta0", self.beta0)?;
        check_probability("averaging_fraction", self.averaging_fraction)?;
        if self.max_iterations == 0 || self.batch == 0 {
            return Err(Error::OutOfRange {
                name: "max_iterations/batch",
                value: 0.0,
                range: "[1, inf)",
            });
        }
        if !self.reference_value.is_finite() {
            return Err(Error::OutOfRange {
                name: "reference_value",
                value: self.reference_value,
                range: "finite reals",
            });
        }
        Ok(())
    }
}

/// Outcome of a calibration run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Calibration {
    /// Average of the final window of iterates.
    pub beta: f64,
    pub converged: bool,
    pub iterations: usize,
    /// `beta_1, beta_2, ...` (the starting value first).
    pub iterates: Vec<f64>,
    /// Observed statistic at each iterate.
    pub observations: Vec<f64>,
    pub reference_value: f64,
}

/// Runs `beta_{k+1} = clamp(beta_k + (a0 / k) (reference - observe(beta_k)), 0, 1)`
/// (residual divided by `|reference|` when `relative` is set) for `max_iterations` steps and returns the average of the last
/// `averaging_fraction` of the iterates.
///
/// The run is flagged converged when the averaged window spans less than
/// `tolerance` and its mean residual is within `tolerance` or two standard
/// errors of zero.
pub fn robbins_monro<F>(target: &CalibrationTarget, mut observe: F) -> Result<Calibration>
where
    F: FnMut(f64) -> Result<f64>,
{
    target.validate()?;
    let scale = if target.relative && target.reference_value != 0.0 {
        libm::fabs(target.reference_value)
    } else {
        1.0
    };
    let mut beta = target.beta0;
    let mut iterates = Vec::with_capacity(target.max_iterations);
    let mut observations = Vec::with_capacity(target.max_iterations);
    for k in 1..=target.max_iterations {
        let observed = observe(beta)?;
        iterates.push(beta);
        observations.push(observed);
        let step = target.a0 / k as f64 / scale;
        beta = (beta + step * (target.reference_value - observed)).clamp(0.0, 1.0);
    }
    let window = (libm::ceil(target.max_iterations as f64 * target.averaging_fraction) as usize)
        .clamp(1, target.max_iterations);
    let start = target.max_iterations - window;
    let tail = &iterates[start..];
    let avg = tail.iter().sum::<f64>() / window as f64;
    let spread = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().copied().fold(f64::INFINITY, f64::min);
    let residuals: Vec<f64> = observations[start..]
        .iter()
        .map(|o| (target.reference_value - o) / scale)
        .collect();
    let mean_res = residuals.iter().sum::<f64>() / window as f64;
    let se = if window > 1 {
        let var = residuals
            .iter()
            .map(|r| (r - mean_res) * (r - mean_res))
            .sum::<f64>()
            / (window as f64 - 1.0);
        libm::sqrt(var / window as f64)
    } else {
        0.0
    };
    let converged = spread <= target.tolerance
        && (libm::fabs(mean_res) <= target.tolerance || libm::fabs(mean_res) <= 2.0 * se);
    Ok(Calibration {
        beta: avg,
        converged,
        iterations: target.max_iterations,
        iterates,
        observations,
        reference_value: target.reference_value,
    })
}

/// Simulates `replicates` traces and reduces them to an intensity, returning
/// `(value, standard error)`.
pub fn estimate_intensity<R: Rng + ?Sized>(
    a: &Adjacency,
    params: &DynamicsParams,
    x0: &[u8],
    steps: usize,
    replicates: usize,
    statistic: IntensityStatistic,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if replicates == 0 {
        return Err(Error::Empty("replicates"));
    }
    let traces = (0..replicates)
        .map(|_| simulate(a, params, x0, steps, rng))
        .collect::<Result<Vec<_>>>()?;
    Ok(statistic.reduce(&traces))
}

/// Tunes `beta` of `template` so its intensity on `a` matches
/// `target.reference_value`, with fresh simulations at every iteration.
pub fn robbins_monro_match<R: Rng + ?Sized>(
    a: &Adjacency,
    gamma: f64,
    template: ContagionFamily,
    x0: &[u8],
    steps: usize,
    target: &CalibrationTarget,
    rng: &mut R,
) -> Result<Calibration> {
    robbins_monro(target, |beta| {
        let params = DynamicsParams::new(gamma, template.with_beta(beta)?)?;
        estimate_intensity(a, &params, x0, steps, target.batch, target.statistic, rng)
            .map(|(v, _)| v)
    })
}

/// Estimates the reference intensity from `replicates` simulations of
/// `reference` and then calibrates `template` against it.
#[allow(clippy::too_many_arguments)]
pub fn match_contagion<R: Rng + ?Sized>(
    a: &Adjacency,
    reference: &DynamicsParams,
    template: ContagionFamily,
    x0: &[u8],
    steps: usize,
    replicates: usize,
    settings: &CalibrationTarget,
    rng: &mut R,
) -> Result<Calibration> {
    let (value, _) =
        estimate_intensity(a, reference, x0, steps, replicates, settings.statistic, rng)?;
    let target = CalibrationTarget {
        reference_value: value,
        ..settings.clone()
    };
    robbins_monro_match(a, reference.gamma, template, x0, steps, &target, rng)
}
