//! Node value beliefs.
//!
//! Leaves carry a conjugate [`BetaPosterior`] over their win rate. For
//! propagation up the tree a posterior is converted either to a
//! moment-matched [`GaussianBelief`] or to a [`GridBelief`], a density
//! sampled on equally spaced points of `[0, 1]` and integrated with the
//! trapezoid rule.

use std::sync::Arc;

use crate::error::{Error, Result};

/// Default number of grid points for numeric beliefs.
pub const DEFAULT_GRID_POINTS: usize = 1000;

/// Smallest grid accepted by [`Grid::new`].
pub const MIN_GRID_POINTS: usize = 16;

/// Beta posterior over a Bernoulli win rate.
///
/// `alpha` counts prior pseudo-wins plus observed wins, `beta` prior
/// pseudo-losses plus observed losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPosterior {
    alpha: f64,
    beta: f64,
}

impl BetaPosterior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite()) {
            return Err(Error::NonFinite("beta posterior parameter"));
        }
        if alpha <= 0.0 || beta <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "beta parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self { alpha, beta })
    }

    /// The uniform prior, `Beta(1, 1)`.
    pub const fn uniform() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Conjugate update with one Bernoulli outcome.
    pub fn update(&mut self, win: bool) {
        if win {
            self.alpha += 1.0;
        } else {
            self.beta += 1.0;
        }
    }

    /// Returns the posterior after `wins` wins and `losses` losses.
    pub fn observe(self, wins: u64, losses: u64) -> Self {
        Self {
            alpha: self.alpha + wins as f64,
            beta: self.beta + losses as f64,
        }
    }

    /// Mean and variance.
    pub fn moments(&self) -> (f64, f64) {
        let total = self.alpha + self.beta;
        let mean = self.alpha / total;
        let var = self.alpha * self.beta / (total * total * (total + 1.0));
        (mean, var)
    }

    pub fn to_gaussian(&self) -> GaussianBelief {
        let (mu, var) = self.moments();
        GaussianBelief {
            mu,
            sigma: var.sqrt(),
        }
    }

    /// Samples the density on `grid` and renormalizes it to unit trapezoid mass.
    pub fn to_grid(&self, grid: &Arc<Grid>) -> GridBelief {
        let a = self.alpha - 1.0;
        let b = self.beta - 1.0;
        let mut pdf: Vec<f64> = grid
            .ln_x
            .iter()
            .zip(&grid.ln_one_minus_x)
            .map(|(&lx, &l1x)| scaled_log_term(a, lx) + scaled_log_term(b, l1x))
            .collect();
        let peak = pdf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for v in &mut pdf {
            *v = (*v - peak).exp();
        }
        GridBelief::from_normalizable(Arc::clone(grid), pdf)
    }
}

impl Default for BetaPosterior {
    fn default() -> Self {
        Self::uniform()
    }
}

// `0 * ln 0` is taken as 0 so that unit exponents give finite endpoints.
#[inline]
fn scaled_log_term(coeff: f64, ln: f64) -> f64 {
    if coeff == 0.0 {
        0.0
    } else {
        coeff * ln
    }
}

/// Moment-matched Gaussian summary of a node value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBelief {
    pub mu: f64,
    pub sigma: f64,
}

impl GaussianBelief {
    pub fn new(mu: f64, sigma: f64) -> Self {
        debug_assert!(sigma >= 0.0, "negative sigma {sigma}");
        Self { mu, sigma }
    }

    /// A degenerate belief concentrated at `value`.
    pub fn point(value: f64) -> Self {
        Self {
            mu: value,
            sigma: 0.0,
        }
    }

    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub(crate) fn negated(self) -> Self {
        Self {
            mu: -self.mu,
            sigma: self.sigma,
        }
    }
}

/// Equally spaced abscissae on `[0, 1]` shared by all grid beliefs of a run.
#[derive(Debug)]
pub struct Grid {
    points: Vec<f64>,
    ln_x: Vec<f64>,
    ln_one_minus_x: Vec<f64>,
    step: f64,
}

impl Grid {
    pub fn new(len: usize) -> Result<Arc<Self>> {
        if len < MIN_GRID_POINTS {
            return Err(Error::GridTooSmall {
                got: len,
                min: MIN_GRID_POINTS,
            });
        }
        let step = 1.0 / (len - 1) as f64;
        let points: Vec<f64> = (0..len)
            .map(|k| if k == len - 1 { 1.0 } else { k as f64 * step })
            .collect();
        let ln_x = points.iter().map(|x| x.ln()).collect();
        // 1 - x computed from the mirrored index so the grid is exactly symmetric.
        let ln_one_minus_x = (0..len).map(|k| points[len - 1 - k].ln()).collect();
        Ok(Arc::new(Self {
            points,
            ln_x,
            ln_one_minus_x,
            step,
        }))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Trapezoid-rule integral of samples taken on this grid.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        self.step * (interior + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Density of a node value on a [`Grid`], with its cumulative distribution.
#[derive(Debug, Clone)]
pub struct GridBelief {
    grid: Arc<Grid>,
    pdf: Vec<f64>,
    cdf: Vec<f64>,
}

impl PartialEq for GridBelief {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) && self.pdf == other.pdf
    }
}

impl GridBelief {
    /// Builds a belief from unnormalized non-negative density samples.
    pub fn from_pdf(grid: Arc<Grid>, pdf: Vec<f64>) -> Result<Self> {
        if pdf.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if pdf.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("grid density"));
        }
        if pdf.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidSpec("negative grid density".into()));
        }
        if grid.integrate(&pdf) <= 0.0 {
            return Err(Error::InvalidSpec("grid density has zero mass".into()));
        }
        Ok(Self::from_normalizable(grid, pdf))
    }

    /// Flat density on `[0, 1]`.
    pub fn uniform(grid: Arc<Grid>) -> Self {
        let pdf = vec![1.0; grid.len()];
        Self::from_normalizable(grid, pdf)
    }

    pub(crate) fn from_normalizable(grid: Arc<Grid>, mut pdf: Vec<f64>) -> Self {
        let mass = grid.integrate(&pdf);
        debug_assert!(mass > 0.0 && mass.is_finite());
        let inv = 1.0 / mass;
        for v in &mut pdf {
            *v *= inv;
        }
        let cdf = cumulative_trapezoid(&pdf, grid.step);
        Self { grid, pdf, cdf }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn pdf(&self) -> &[f64] {
        &self.pdf
    }

    /// Cumulative trapezoid integral of the density; starts at 0 and ends at 1.
    pub fn cdf(&self) -> &[f64] {
        &self.cdf
    }

    /// Mean and variance by the trapezoid rule.
    pub fn moments(&self) -> (f64, f64) {
        let xs = self.grid.points();
        let weighted: Vec<f64> = xs.iter().zip(&self.pdf).map(|(x, p)| x * p).collect();
        let mean = self.grid.integrate(&weighted);
        let centered: Vec<f64> = xs
            .iter()
            .zip(&self.pdf)
            .map(|(x, p)| (x - mean) * (x - mean) * p)
            .collect();
        (mean, self.grid.integrate(&centered))
    }

    pub fn mean(&self) -> f64 {
        self.moments().0
    }

    pub fn to_gaussian(&self) -> GaussianBelief {
        let (mu, var) = self.moments();
        GaussianBelief::new(mu, var.max(0.0).sqrt())
    }

    /// The density of `1 - X`.
    pub fn reflected(&self) -> Self {
        let pdf = self.pdf.iter().rev().copied().collect();
        Self::from_normalizable(Arc::clone(&self.grid), pdf)
    }
}

fn cumulative_trapezoid(pdf: &[f64], step: f64) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(pdf.len());
    let mut acc = 0.0;
    cdf.push(0.0);
    for w in pdf.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        cdf.push(acc);
    }
    cdf
}
