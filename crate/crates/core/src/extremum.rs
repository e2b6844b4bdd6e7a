//! MAX/MIN distributions over child beliefs.
//!
//! Gaussian beliefs are combined pairwise with Clark's moment-matching
//! formulas, written in the shifted form
//!
//! ```text
//! mu    = mu2 + s * F1(a)
//! var   = sigma2^2 + (sigma1^2 - sigma2^2) * Phi(a) + s^2 * F2(a)
//! s     = sqrt(sigma1^2 - 2 rho sigma1 sigma2 + sigma2^2),  a = (mu1 - mu2) / s
//! F1(a) = a Phi(a) + phi(a)
//! F2(a) = a^2 Phi(a) (1 - Phi(a)) + (1 - 2 Phi(a)) a phi(a) - phi(a)^2
//! ```
//!
//! so that `Phi`, `F1` and `F2` can come from one-dimensional
//! [`LookupTables`]. K-way Gaussian extrema fold pairs together, either in a
//! random order or by always merging the pair with the smallest estimated
//! approximation error. Grid beliefs are combined exactly through products
//! of CDFs.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::belief::{GaussianBelief, GridBelief};
use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density and distribution function at `x`.
pub fn std_normal(x: f64) -> (f64, f64) {
    (std_normal_pdf(x), std_normal_cdf(x))
}

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x * std::f64::consts::FRAC_1_SQRT_2)
}

/// `a Phi(a) + phi(a)`, the expected positive part of `a + Z`.
#[inline]
pub fn clark_f1(a: f64) -> f64 {
    a * std_normal_cdf(a) + std_normal_pdf(a)
}

#[inline]
pub fn clark_f2(a: f64) -> f64 {
    let cdf = std_normal_cdf(a);
    let pdf = std_normal_pdf(a);
    a * a * cdf * (1.0 - cdf) + (1.0 - 2.0 * cdf) * a * pdf - pdf * pdf
}

/// Source of the normal-derived functions used by the pairwise formulas.
pub trait NormalFunctions {
    fn cdf(&self, a: f64) -> f64;
    fn f1(&self, a: f64) -> f64;
    fn f2(&self, a: f64) -> f64;
}

/// Evaluates `Phi`, `F1` and `F2` directly.
#[derive(Debug, Clone, Copy, Default)]
pub struct Exact;

impl NormalFunctions for Exact {
    #[inline]
    fn cdf(&self, a: f64) -> f64 {
        std_normal_cdf(a)
    }

    #[inline]
    fn f1(&self, a: f64) -> f64 {
        clark_f1(a)
    }

    #[inline]
    fn f2(&self, a: f64) -> f64 {
        clark_f2(a)
    }
}

/// Linearly interpolated samples of `Phi`, `F1` and `F2`.
///
/// Outside `[alpha_min, alpha_max]` lookups return the asymptotes:
/// `Phi` goes to 0 or 1, `F1` to 0 or `a`, and `F2` to 0.
#[derive(Debug, Clone)]
pub struct LookupTables {
    alpha_min: f64,
    alpha_max: f64,
    step: f64,
    inv_step: f64,
    f1_values: Vec<f64>,
    f2_values: Vec<f64>,
    cdf_values: Vec<f64>,
}

impl LookupTables {
    pub const DEFAULT_RANGE: f64 = 8.0;
    pub const DEFAULT_STEP: f64 = 1.0 / 1024.0;

    pub fn new(alpha_min: f64, alpha_max: f64, step: f64) -> Result<Self> {
        if !(alpha_min.is_finite() && alpha_max.is_finite() && step.is_finite()) {
            return Err(Error::NonFinite("lookup table range"));
        }
        if alpha_max <= alpha_min || step <= 0.0 {
            return Err(Error::InvalidSpec(format!(
                "bad lookup table range [{alpha_min}, {alpha_max}] step {step}"
            )));
        }
        let intervals = ((alpha_max - alpha_min) / step).round() as usize;
        let at = |k: usize| alpha_min + k as f64 * step;
        Ok(Self {
            alpha_min,
            alpha_max: at(intervals),
            step,
            inv_step: 1.0 / step,
            f1_values: (0..=intervals).map(|k| clark_f1(at(k))).collect(),
            f2_values: (0..=intervals).map(|k| clark_f2(at(k))).collect(),
            cdf_values: (0..=intervals).map(|k| std_normal_cdf(at(k))).collect(),
        })
    }

    /// Process-wide tables over `[-8, 8]` with step `2^-10`.
    pub fn shared() -> &'static LookupTables {
        static TABLES: OnceLock<LookupTables> = OnceLock::new();
        TABLES.get_or_init(|| {
            LookupTables::new(
                -Self::DEFAULT_RANGE,
                Self::DEFAULT_RANGE,
                Self::DEFAULT_STEP,
            )
            .expect("default table parameters are valid")
        })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.alpha_min, self.alpha_max)
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Adds `offset` to every stored `F2` sample. Only useful as a negative
    /// control for consistency checks.
    #[doc(hidden)]
    pub fn with_f2_offset(mut self, offset: f64) -> Self {
        for v in &mut self.f2_values {
            *v += offset;
        }
        self
    }

    #[inline]
    fn interpolate(&self, values: &[f64], a: f64) -> f64 {
        let pos = (a - self.alpha_min) * self.inv_step;
        let idx = (pos as usize).min(values.len() - 2);
        let t = pos - idx as f64;
        values[idx] + t * (values[idx + 1] - values[idx])
    }
}

impl NormalFunctions for LookupTables {
    #[inline]
    fn cdf(&self, a: f64) -> f64 {
        if a <= self.alpha_min {
            0.0
        } else if a >= self.alpha_max {
            1.0
        } else {
            self.interpolate(&self.cdf_values, a)
        }
    }

    #[inline]
    fn f1(&self, a: f64) -> f64 {
        if a <= self.alpha_min {
            0.0
        } else if a >= self.alpha_max {
            a
        } else {
            self.interpolate(&self.f1_values, a)
        }
    }

    #[inline]
    fn f2(&self, a: f64) -> f64 {
        if a <= self.alpha_min || a >= self.alpha_max {
            0.0
        } else {
            self.interpolate(&self.f2_values, a)
        }
    }
}

/// Selects exact or table-backed normal functions at run time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum FunctionMode {
    Exact,
    #[default]
    Tables,
}

/// Normalized gap between two Gaussians and the spread of their difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairGeometry {
    pub alpha: f64,
    pub sigma_m: f64,
}

impl PairGeometry {
    pub fn new(a: &GaussianBelief, b: &GaussianBelief, rho: f64) -> Result<Self> {
        validate_pair(a, b, rho)?;
        let var_m = a.sigma * a.sigma - 2.0 * rho * a.sigma * b.sigma + b.sigma * b.sigma;
        let sigma_m = var_m.max(0.0).sqrt();
        let alpha = if sigma_m > 0.0 {
            (a.mu - b.mu) / sigma_m
        } else if a.mu >= b.mu {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        Ok(Self { alpha, sigma_m })
    }

    fn is_degenerate(&self) -> bool {
        !self.alpha.is_finite()
    }
}

fn validate_pair(a: &GaussianBelief, b: &GaussianBelief, rho: f64) -> Result<()> {
    if !(a.mu.is_finite() && a.sigma.is_finite() && b.mu.is_finite() && b.sigma.is_finite()) {
        return Err(Error::NonFinite("gaussian belief"));
    }
    if rho.is_nan() || !(-1.0..=1.0).contains(&rho) {
        return Err(Error::InvalidCorrelation(rho));
    }
    Ok(())
}

/// Moment-matched Gaussian of `max(A, B)` for correlation `rho`.
pub fn clark_max_pair<F: NormalFunctions + ?Sized>(
    a: &GaussianBelief,
    b: &GaussianBelief,
    rho: f64,
    fns: &F,
) -> Result<GaussianBelief> {
    let geom = PairGeometry::new(a, b, rho)?;
    if geom.is_degenerate() {
        // A zero-spread difference means one input dominates everywhere.
        return Ok(if a.mu >= b.mu { *a } else { *b });
    }
    let (alpha, s) = (geom.alpha, geom.sigma_m);
    let mu = b.mu + s * fns.f1(alpha);
    let var = b.variance() + (a.variance() - b.variance()) * fns.cdf(alpha) + s * s * fns.f2(alpha);
    Ok(GaussianBelief::new(mu, var.max(0.0).sqrt()))
}

/// Moment-matched Gaussian of `min(A, B)`, via `min(A, B) = -max(-A, -B)`.
pub fn clark_min_pair<F: NormalFunctions + ?Sized>(
    a: &GaussianBelief,
    b: &GaussianBelief,
    rho: f64,
    fns: &F,
) -> Result<GaussianBelief> {
    clark_max_pair(&a.negated(), &b.negated(), rho, fns).map(GaussianBelief::negated)
}

/// Clark's moments of `max(A, B)` from the unshifted first and second moment
/// expressions, with exact `Phi` and `phi`. Returns `(mean, variance)`.
pub fn clark_max_moments_direct(
    a: &GaussianBelief,
    b: &GaussianBelief,
    rho: f64,
) -> Result<(f64, f64)> {
    let geom = PairGeometry::new(a, b, rho)?;
    if geom.is_degenerate() {
        let top = if a.mu >= b.mu { a } else { b };
        return Ok((top.mu, top.variance()));
    }
    let (alpha, s) = (geom.alpha, geom.sigma_m);
    let (pdf, cdf) = std_normal(alpha);
    let cdf_neg = std_normal_cdf(-alpha);
    let mean = a.mu * cdf + b.mu * cdf_neg + pdf * s;
    let second = (a.mu * a.mu + a.variance()) * cdf
        + (b.mu * b.mu + b.variance()) * cdf_neg
        + (a.mu + b.mu) * s * pdf;
    Ok((mean, second - mean * mean))
}

/// Which extremum an interior node takes over its children.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

/// Order in which K-way Gaussian extrema are folded pairwise.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Combiner {
    #[default]
    RandomOrder,
    MinError,
}

/// Folds `clark_max_pair` over the children in a shuffled order.
pub fn combine_max_random_order<F, R>(
    children: &[GaussianBelief],
    rho: f64,
    fns: &F,
    rng: &mut R,
) -> Result<GaussianBelief>
where
    F: NormalFunctions + ?Sized,
    R: Rng + ?Sized,
{
    if children.is_empty() {
        return Err(Error::EmptyChildren);
    }
    if children.len() == 1 {
        return Ok(children[0]);
    }
    let mut order = children.to_vec();
    order.shuffle(rng);
    let mut acc = order[0];
    for next in &order[1..] {
        acc = clark_max_pair(&acc, next, rho, fns)?;
    }
    Ok(acc)
}

#[derive(Debug, PartialEq)]
struct Candidate {
    error: f64,
    i: usize,
    j: usize,
    generation_i: u32,
    generation_j: u32,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(self.i.cmp(&other.i))
            .then(self.j.cmp(&other.j))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Repeatedly merges the pair with the smallest [`pair_error_estimate`].
///
/// Candidate errors live in a min-heap; entries made stale by a merge are
/// skipped through per-slot generation counters. `O(K^2 log K)` time.
pub fn combine_max_min_error<F>(
    children: &[GaussianBelief],
    rho: f64,
    fns: &F,
) -> Result<GaussianBelief>
where
    F: NormalFunctions + ?Sized,
{
    match children.len() {
        0 => return Err(Error::EmptyChildren),
        1 => return Ok(children[0]),
        2 => return clark_max_pair(&children[0], &children[1], rho, fns),
        _ => {}
    }
    let mut slots: Vec<Option<GaussianBelief>> = children.iter().copied().map(Some).collect();
    let mut generation = vec![0u32; slots.len()];
    let mut heap = BinaryHeap::with_capacity(slots.len() * (slots.len() - 1) / 2);
    for i in 0..slots.len() {
        for j in i + 1..slots.len() {
            heap.push(Reverse(Candidate {
                error: pair_error_estimate(&children[i], &children[j], rho)?,
                i,
                j,
                generation_i: 0,
                generation_j: 0,
            }));
        }
    }
    let mut remaining = slots.len();
    while remaining > 1 {
        let Reverse(c) = heap
            .pop()
            .expect("heap holds a live pair while two slots remain");
        if generation[c.i] != c.generation_i || generation[c.j] != c.generation_j {
            continue;
        }
        let (Some(a), Some(b)) = (slots[c.i], slots[c.j]) else {
            continue;
        };
        let merged = clark_max_pair(&a, &b, rho, fns)?;
        slots[c.i] = Some(merged);
        slots[c.j] = None;
        generation[c.i] += 1;
        generation[c.j] += 1;
        remaining -= 1;
        for (k, other) in slots.iter().enumerate() {
            if k == c.i {
                continue;
            }
            if let Some(other) = other {
                let (i, j) = if k < c.i { (k, c.i) } else { (c.i, k) };
                heap.push(Reverse(Candidate {
                    error: pair_error_estimate(&merged, other, rho)?,
                    i,
                    j,
                    generation_i: generation[i],
                    generation_j: generation[j],
                }));
            }
        }
    }
    Ok(slots
        .into_iter()
        .flatten()
        .next()
        .expect("one slot remains"))
}

/// Combines Gaussian children into the MAX or MIN belief of their parent.
pub fn combine_gaussian<F, R>(
    extremum: Extremum,
    children: &[GaussianBelief],
    rho: f64,
    combiner: Combiner,
    fns: &F,
    rng: &mut R,
) -> Result<GaussianBelief>
where
    F: NormalFunctions + ?Sized,
    R: Rng + ?Sized,
{
    let fold = |xs: &[GaussianBelief], rng: &mut R| match combiner {
        Combiner::RandomOrder => combine_max_random_order(xs, rho, fns, rng),
        Combiner::MinError => combine_max_min_error(xs, rho, fns),
    };
    match extremum {
        Extremum::Max => fold(children, rng),
        Extremum::Min => {
            let negated: Vec<GaussianBelief> = children.iter().map(|c| c.negated()).collect();
            fold(&negated, rng).map(GaussianBelief::negated)
        }
    }
}

// Standard normal deciles 0.1, 0.2, ..., 0.9.
const DECILE_Z: [f64; 9] = [
    -1.281_551_565_544_601,
    -0.841_621_233_572_914,
    -0.524_400_512_708_041,
    -0.253_347_103_135_800,
    0.0,
    0.253_347_103_135_800,
    0.524_400_512_708_041,
    0.841_621_233_572_914,
    1.281_551_565_544_601,
];

/// Estimated error of replacing `max(A, B)` by its moment-matched Gaussian.
///
/// At the nine deciles of the matched Gaussian, compares its CDF with the
/// product of the input CDFs (the exact CDF of the max for independent
/// inputs) and returns the largest absolute gap.
pub fn pair_error_estimate(a: &GaussianBelief, b: &GaussianBelief, rho: f64) -> Result<f64> {
    let out = clark_max_pair(a, b, rho, &Exact)?;
    if out.sigma == 0.0 {
        return Ok(0.0);
    }
    let cdf_of = |g: &GaussianBelief, x: f64| {
        if g.sigma > 0.0 {
            std_normal_cdf((x - g.mu) / g.sigma)
        } else if x >= g.mu {
            1.0
        } else {
            0.0
        }
    };
    let worst = DECILE_Z
        .iter()
        .enumerate()
        .map(|(k, z)| {
            let x = out.mu + out.sigma * z;
            let exact = cdf_of(a, x) * cdf_of(b, x);
            (exact - (k + 1) as f64 / 10.0).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

fn same_grid<'a>(children: &[&'a GridBelief]) -> Result<&'a Arc<crate::belief::Grid>> {
    let first = children.first().ok_or(Error::EmptyChildren)?;
    let grid = first.grid();
    if children[1..]
        .iter()
        .any(|c| !Arc::ptr_eq(c.grid(), grid) && c.grid().len() != grid.len())
    {
        return Err(Error::GridMismatch);
    }
    Ok(grid)
}

/// Central differences of a sampled CDF, one-sided at the endpoints.
fn differentiate(cdf: &[f64], step: f64) -> Vec<f64> {
    let n = cdf.len();
    let mut pdf = Vec::with_capacity(n);
    pdf.push((cdf[1] - cdf[0]) / step);
    let inv = 0.5 / step;
    for k in 1..n - 1 {
        pdf.push((cdf[k + 1] - cdf[k - 1]) * inv);
    }
    pdf.push((cdf[n - 1] - cdf[n - 2]) / step);
    for v in &mut pdf {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    pdf
}

/// Exact MAX over grid beliefs: the product of child CDFs, differentiated.
pub fn grid_max(children: &[&GridBelief]) -> Result<GridBelief> {
    let grid = same_grid(children)?;
    let mut cdf = children[0].cdf().to_vec();
    for child in &children[1..] {
        for (acc, c) in cdf.iter_mut().zip(child.cdf()) {
            *acc *= c;
        }
    }
    let pdf = differentiate(&cdf, grid.step());
    Ok(GridBelief::from_normalizable(Arc::clone(grid), pdf))
}

/// Exact MIN over grid beliefs: `1 - prod(1 - C_i)`, differentiated.
pub fn grid_min(children: &[&GridBelief]) -> Result<GridBelief> {
    let grid = same_grid(children)?;
    let mut survival: Vec<f64> = children[0].cdf().iter().map(|c| 1.0 - c).collect();
    for child in &children[1..] {
        for (acc, c) in survival.iter_mut().zip(child.cdf()) {
            *acc *= 1.0 - c;
        }
    }
    let cdf: Vec<f64> = survival.iter().map(|s| 1.0 - s).collect();
    let pdf = differentiate(&cdf, grid.step());
    Ok(GridBelief::from_normalizable(Arc::clone(grid), pdf))
}

pub fn combine_grid(extremum: Extremum, children: &[&GridBelief]) -> Result<GridBelief> {
    match extremum {
        Extremum::Max => grid_max(children),
        Extremum::Min => grid_min(children),
    }
}
