use alloc::vec::Vec;

use crate::error::{check_positive, Result};

/// Number of grid points used by [`BetaParams::hdpi`].
pub const HDPI_GRID: usize = 10_000;

/// `ln B(a, b)` through log-gamma.
pub fn log_beta(a: f64, b: f64) -> f64 {
    libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b)
}

/// Parameters of a beta distribution.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        Ok(Self { alpha, beta })
    }

    pub const fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }

    pub fn std_dev(&self) -> f64 {
        libm::sqrt(self.variance())
    }

    /// Mode, when the density is unimodal with an interior maximum.
    pub fn mode(&self) -> Option<f64> {
        (self.alpha > 1.0 && self.beta > 1.0)
            .then(|| (self.alpha - 1.0) / (self.alpha + self.beta - 2.0))
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        (self.alpha - 1.0) * libm::log(x) + (self.beta - 1.0) * libm::log1p(-x)
            - log_beta(self.alpha, self.beta)
    }

    /// Highest-density interval holding `mass` of the distribution.
    ///
    /// Grid points are placed at cell midpoints over the support (narrowed to
    /// twelve standard deviations around the mean for concentrated densities),
    /// sorted by density and accumulated until `mass` is reached. Returns the
    /// span of the retained cells.
    pub fn hdpi(&self, mass: f64) -> (f64, f64) {
        let mass = mass.clamp(0.0, 1.0);
        let (m, sd) = (self.mean(), self.std_dev());
        let lo = (m - 12.0 * sd).max(0.0);
        let hi = (m + 12.0 * sd).min(1.0);
        let width = (hi - lo) / HDPI_GRID as f64;
        let mut cells: Vec<(f64, f64)> = (0..HDPI_GRID)
            .map(|k| {
                let x = lo + (k as f64 + 0.5) * width;
                (x, self.ln_pdf(x))
            })
            .collect();
        let peak = cells
            .iter()
            .map(|c| c.1)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut weights: Vec<(f64, f64)> = cells
            .drain(..)
            .map(|(x, lp)| (x, libm::exp(lp - peak)))
            .collect();
        let total: f64 = weights.iter().map(|w| w.1).sum();
        weights.sort_by(|a, b| b.1.total_cmp(&a.1));
        let (mut left, mut right) = (f64::INFINITY, f64::NEG_INFINITY);
        let mut acc = 0.0;
        for (x, w) in weights {
            left = left.min(x - 0.5 * width);
            right = right.max(x + 0.5 * width);
            acc += w / total;
            if acc >= mass {
                break;
            }
        }
        (left.max(0.0), right.min(1.0))
    }
}
