//! Belief over a trustee's capabilities and trust prediction.
//!
//! The trustor keeps a discrete probability distribution over the trustee's
//! capability vector and revises it by Bayes' rule from observed task
//! outcomes. Trust in an agent for a task is the belief-weighted probability
//! of success under a chosen success model.
//!
//! Two storage modes exist: an exact joint grid (`G^n` cells, used for
//! `n <= 3`) and a factored per-dimension approximation (`n` marginal grids,
//! used above that). Success likelihoods factor across dimensions, so the
//! factored success update is exact; the factored failure update applies the
//! marginalized factor `1 - s_i(x) * prod_{j != i} E[s_j]`, which equals the
//! true one-step posterior marginals of a product prior.

use std::fmt;
use std::str::FromStr;

use crate::capability::{CapabilityError, CapabilitySpace, CapabilityVector, Observation, Outcome};

use thiserror::Error;

/// Likelihood clamp used inside belief updates when the model is `Sigmoid`.
/// `Step` keeps hard zeros so contradictory observations stay detectable.
pub const LIKELIHOOD_FLOOR: f64 = 1e-9;

/// Below this total unnormalized posterior mass an observation is treated as
/// contradicting the model.
pub const MASS_EPSILON: f64 = 1e-12;

/// Tolerance on "weights sum to 1".
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// Default credible-interval quantiles (a central 95% interval).
pub const DEFAULT_QUANTILES: (f64, f64) = (0.025, 0.975);

/// Default steepness scale for the trustor's assumed success model.
pub const DEFAULT_BELIEF_BETA: f64 = 0.05;

/// Errors raised by belief construction, updates, and queries.
#[derive(Debug, Error, PartialEq)]
pub enum TrustError {
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error(
        "observation is impossible under the model: unnormalized posterior mass < {MASS_EPSILON:e}"
    )]
    ImpossibleObservation,
    #[error("quantiles must satisfy 0 <= lo < hi <= 1, got ({lo}, {hi})")]
    BadQuantiles { lo: f64, hi: f64 },
    #[error("dimension {dim} out of range for a {n}-dimensional space")]
    BadDimension { dim: usize, n: usize },
    #[error("trust value {0} is outside [0, 1]")]
    BadTrust(f64),
    #[error("sigmoid steepness must be positive and finite, got {0}")]
    BadSteepness(f64),
    #[error("cannot parse success model `{0}`: expected `step` or `sigmoid:<beta>`")]
    BadModelString(String),
    #[error("tempering exponent must be in (0, 1], got {0}")]
    BadExponent(f64),
    #[error(
        "belief weights must be nonnegative and sum to 1 within {WEIGHT_SUM_TOL:e}, got sum {sum}"
    )]
    BadWeights { sum: f64 },
    #[error("batch fit needs at least one observation")]
    NoObservations,
    #[error("sweep budget must be at least 1")]
    ZeroSweepBudget,
}

fn logistic(z: f64) -> f64 {
    // Split on the sign so large |z| never overflows exp.
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Maps an agent's capabilities and a task's requirements to a success
/// probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SuccessModel {
    /// Success iff every capability meets its requirement.
    Step,
    /// Smooth threshold: product over dimensions of
    /// `logistic((lambda_i - lambda_bar_i) / beta)`.
    Sigmoid { beta: f64 },
}

impl SuccessModel {
    pub fn sigmoid(beta: f64) -> Result<Self, TrustError> {
        if !beta.is_finite() || beta <= 0.0 {
            return Err(TrustError::BadSteepness(beta));
        }
        Ok(SuccessModel::Sigmoid { beta })
    }

    /// Default model the trustor assumes when updating beliefs. Smooth, so
    /// noisy outcomes never zero out the posterior.
    pub fn default_belief() -> Self {
        SuccessModel::Sigmoid {
            beta: DEFAULT_BELIEF_BETA,
        }
    }

    /// Default ground-truth outcome law in simulations.
    pub fn default_ground_truth() -> Self {
        SuccessModel::Step
    }

    /// Per-dimension success factor; the full likelihood is the product.
    fn dim_factor(&self, lambda: f64, lambda_bar: f64) -> f64 {
        match *self {
            SuccessModel::Step => {
                if lambda >= lambda_bar {
                    1.0
                } else {
                    0.0
                }
            }
            SuccessModel::Sigmoid { beta } => logistic((lambda - lambda_bar) / beta),
        }
    }

    /// Success probability for capabilities `lambda` on requirements
    /// `lambda_bar`. Non-decreasing in each `lambda_i`, non-increasing in
    /// each `lambda_bar_i`.
    pub fn likelihood(&self, lambda: &[f64], lambda_bar: &[f64]) -> Result<f64, TrustError> {
        if lambda.len() != lambda_bar.len() {
            return Err(CapabilityError::DimensionMismatch {
                expected: lambda.len(),
                got: lambda_bar.len(),
            }
            .into());
        }
        let mut p = 1.0;
        for (&l, &r) in lambda.iter().zip(lambda_bar) {
            p *= self.dim_factor(l, r);
        }
        Ok(p)
    }

    /// `factor_table[k] = dim_factor(grid_point(k), lambda_bar_d)` for one
    /// dimension's requirement.
    fn factor_table(&self, space: &CapabilitySpace, lambda_bar_d: f64) -> Vec<f64> {
        (0..space.grid_resolution())
            .map(|k| self.dim_factor(space.grid_point(k), lambda_bar_d))
            .collect()
    }
}

impl fmt::Display for SuccessModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SuccessModel::Step => f.write_str("step"),
            SuccessModel::Sigmoid { beta } => write!(f, "sigmoid:{beta}"),
        }
    }
}

impl FromStr for SuccessModel {
    type Err = TrustError;

    fn from_str(s: &str) -> Result<Self, TrustError> {
        let t = s.trim();
        if t.eq_ignore_ascii_case("step") {
            return Ok(SuccessModel::Step);
        }
        if let Some(rest) = t
            .strip_prefix("sigmoid:")
            .or_else(|| t.strip_prefix("Sigmoid:"))
            .or_else(|| t.strip_prefix("SIGMOID:"))
        {
            let beta: f64 = rest
                .trim()
                .parse()
                .map_err(|_| TrustError::BadModelString(s.to_string()))?;
            return SuccessModel::sigmoid(beta);
        }
        Err(TrustError::BadModelString(s.to_string()))
    }
}

/// Probability that an agent succeeds at a task; always in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TrustEstimate(f64);

impl TrustEstimate {
    pub fn new(value: f64) -> Result<Self, TrustError> {
        if !(0.0..=1.0).contains(&value) {
            return Err(TrustError::BadTrust(value));
        }
        Ok(TrustEstimate(value))
    }

    /// Wraps an internally computed probability, absorbing float excursions
    /// a hair outside `[0, 1]`.
    fn from_computed(value: f64) -> Self {
        debug_assert!((-1e-6..=1.0 + 1e-6).contains(&value));
        TrustEstimate(value.clamp(0.0, 1.0))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl fmt::Display for TrustEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How belief weights are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefMode {
    /// One weight per joint grid cell; exact.
    Joint,
    /// One weight vector per dimension; dimensions treated as independent.
    Factored,
}

impl fmt::Display for BeliefMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BeliefMode::Joint => "joint",
            BeliefMode::Factored => "factored",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
enum BeliefWeights {
    /// Row-major over dimensions: dimension 0 varies slowest, dimension
    /// n-1 fastest.
    Joint(Vec<f64>),
    /// `n` normalized marginal grids of length G.
    Factored(Vec<Vec<f64>>),
}

/// Largest dimensionality stored as an exact joint grid by default.
pub const MAX_JOINT_DIMS: usize = 3;

/// A normalized probability distribution over the capability grid.
///
/// Values are immutable; updates return a new belief.
#[derive(Debug, Clone, PartialEq)]
pub struct CapabilityBelief {
    space: CapabilitySpace,
    weights: BeliefWeights,
}

impl CapabilityBelief {
    /// Uniform belief over the grid; joint storage for `n <= 3`, factored
    /// above.
    pub fn uniform(space: &CapabilitySpace) -> Self {
        if space.n() <= MAX_JOINT_DIMS {
            Self::uniform_joint(space)
        } else {
            Self::uniform_factored(space)
        }
    }

    pub fn uniform_joint(space: &CapabilitySpace) -> Self {
        let cells = space.joint_cells();
        CapabilityBelief {
            space: *space,
            weights: BeliefWeights::Joint(vec![1.0 / cells as f64; cells]),
        }
    }

    pub fn uniform_factored(space: &CapabilitySpace) -> Self {
        let g = space.grid_resolution();
        CapabilityBelief {
            space: *space,
            weights: BeliefWeights::Factored(vec![vec![1.0 / g as f64; g]; space.n()]),
        }
    }

    /// Rebuilds a joint-mode belief from raw weights (row-major). The
    /// weights are kept verbatim so persisted beliefs reload bit-exactly.
    pub fn from_joint_weights(
        space: &CapabilitySpace,
        weights: Vec<f64>,
    ) -> Result<Self, TrustError> {
        if weights.len() != space.joint_cells() {
            return Err(CapabilityError::DimensionMismatch {
                expected: space.joint_cells(),
                got: weights.len(),
            }
            .into());
        }
        check_normalized(&weights)?;
        Ok(CapabilityBelief {
            space: *space,
            weights: BeliefWeights::Joint(weights),
        })
    }

    /// Rebuilds a factored-mode belief from one weight vector per dimension.
    pub fn from_factored_weights(
        space: &CapabilitySpace,
        per_dim: Vec<Vec<f64>>,
    ) -> Result<Self, TrustError> {
        if per_dim.len() != space.n() {
            return Err(CapabilityError::DimensionMismatch {
                expected: space.n(),
                got: per_dim.len(),
            }
            .into());
        }
        for dim in &per_dim {
            if dim.len() != space.grid_resolution() {
                return Err(CapabilityError::DimensionMismatch {
                    expected: space.grid_resolution(),
                    got: dim.len(),
                }
                .into());
            }
            check_normalized(dim)?;
        }
        Ok(CapabilityBelief {
            space: *space,
            weights: BeliefWeights::Factored(per_dim),
        })
    }

    pub fn space(&self) -> &CapabilitySpace {
        &self.space
    }

    pub fn mode(&self) -> BeliefMode {
        match self.weights {
            BeliefWeights::Joint(_) => BeliefMode::Joint,
            BeliefWeights::Factored(_) => BeliefMode::Factored,
        }
    }

    /// Joint-mode weights in row-major order, if stored jointly.
    pub fn joint_weights(&self) -> Option<&[f64]> {
        match &self.weights {
            BeliefWeights::Joint(w) => Some(w),
            BeliefWeights::Factored(_) => None,
        }
    }

    /// Per-dimension weights, if stored factored.
    pub fn factored_weights(&self) -> Option<&[Vec<f64>]> {
        match &self.weights {
            BeliefWeights::Joint(_) => None,
            BeliefWeights::Factored(w) => Some(w),
        }
    }

    /// Bayes update on one observation: posterior proportional to
    /// `prior * L` with `L` the likelihood of the outcome.
    pub fn update(
        &self,
        obs: &Observation,
        model: &SuccessModel,
    ) -> Result<CapabilityBelief, TrustError> {
        self.update_tempered(obs, model, 1.0)
    }

    /// Bayes update with the likelihood raised to `exponent` in `(0, 1]`.
    /// Used by sweep-based fitting so each pass applies a fraction of the
    /// evidence.
    pub fn update_tempered(
        &self,
        obs: &Observation,
        model: &SuccessModel,
        exponent: f64,
    ) -> Result<CapabilityBelief, TrustError> {
        if !(exponent > 0.0 && exponent <= 1.0) {
            return Err(TrustError::BadExponent(exponent));
        }
        self.space.check_values(obs.requirements.values())?;
        let tables: Vec<Vec<f64>> = obs
            .requirements
            .values()
            .iter()
            .map(|&r| model.factor_table(&self.space, r))
            .collect();
        let clamp = matches!(model, SuccessModel::Sigmoid { .. });
        let weights = match &self.weights {
            BeliefWeights::Joint(w) => BeliefWeights::Joint(joint_posterior(
                &self.space,
                w,
                &tables,
                obs.outcome,
                clamp,
                exponent,
            )?),
            BeliefWeights::Factored(w) => BeliefWeights::Factored(factored_posterior(
                w,
                &tables,
                obs.outcome,
                clamp,
                exponent,
            )?),
        };
        Ok(CapabilityBelief {
            space: self.space,
            weights,
        })
    }

    /// Trust for a task: belief-weighted success probability,
    /// `sum_cells weight * likelihood`.
    pub fn predict_trust(
        &self,
        lambda_bar: &[f64],
        model: &SuccessModel,
    ) -> Result<TrustEstimate, TrustError> {
        self.space.check_values(lambda_bar)?;
        let tables: Vec<Vec<f64>> = lambda_bar
            .iter()
            .map(|&r| model.factor_table(&self.space, r))
            .collect();
        let tau = match &self.weights {
            BeliefWeights::Joint(w) => {
                let mut total = 0.0;
                for_each_cell(&self.space, |idx, coords| {
                    let mut l = 1.0;
                    for (d, &k) in coords.iter().enumerate() {
                        l *= tables[d][k];
                    }
                    total += w[idx] * l;
                });
                total
            }
            BeliefWeights::Factored(per_dim) => per_dim
                .iter()
                .zip(&tables)
                .map(|(w, t)| w.iter().zip(t).map(|(a, b)| a * b).sum::<f64>())
                .product(),
        };
        Ok(TrustEstimate::from_computed(tau))
    }

    /// Marginal probability masses of one dimension over the grid points.
    pub fn marginal(&self, dim: usize) -> Result<Vec<f64>, TrustError> {
        self.check_dim(dim)?;
        match &self.weights {
            BeliefWeights::Joint(w) => {
                let mut m = vec![0.0; self.space.grid_resolution()];
                for_each_cell(&self.space, |idx, coords| {
                    m[coords[dim]] += w[idx];
                });
                Ok(m)
            }
            BeliefWeights::Factored(per_dim) => Ok(per_dim[dim].clone()),
        }
    }

    /// Expectation of one capability dimension under the belief.
    pub fn marginal_mean(&self, dim: usize) -> Result<f64, TrustError> {
        let m = self.marginal(dim)?;
        Ok(m.iter()
            .enumerate()
            .map(|(k, &p)| self.space.grid_point(k) * p)
            .sum())
    }

    /// Quantile endpoints `(lo_q, hi_q)` of one dimension's marginal.
    ///
    /// The discrete marginal is smoothed into a piecewise-linear CDF through
    /// the mid-mass knots `F(x_k) = cum_{k-1} + m_k / 2`, anchored at zero
    /// one grid step below the grid and at one a step above; quantiles are
    /// read off by linear interpolation and clamped to `[0, 1]`. A
    /// degenerate (near point-mass) marginal yields a tight but still
    /// ordered pair.
    pub fn credible_bounds(
        &self,
        dim: usize,
        lo_q: f64,
        hi_q: f64,
    ) -> Result<(f64, f64), TrustError> {
        if !(lo_q >= 0.0 && lo_q < hi_q && hi_q <= 1.0) {
            return Err(TrustError::BadQuantiles { lo: lo_q, hi: hi_q });
        }
        let m = self.marginal(dim)?;
        Ok(bounds_from_marginal(&self.space, &m, lo_q, hi_q))
    }

    fn check_dim(&self, dim: usize) -> Result<(), TrustError> {
        if dim >= self.space.n() {
            return Err(TrustError::BadDimension {
                dim,
                n: self.space.n(),
            });
        }
        Ok(())
    }
}

/// Uniform initial belief over the capability grid.
pub fn init_belief(space: &CapabilitySpace) -> CapabilityBelief {
    CapabilityBelief::uniform(space)
}

/// Success probability of `lambda` against requirements `lambda_bar`.
pub fn likelihood(
    model: &SuccessModel,
    lambda: &CapabilityVector,
    lambda_bar: &CapabilityVector,
) -> Result<f64, TrustError> {
    model.likelihood(lambda.values(), lambda_bar.values())
}

/// Bayes update of `belief` on one observation.
pub fn update_belief(
    belief: &CapabilityBelief,
    obs: &Observation,
    model: &SuccessModel,
) -> Result<CapabilityBelief, TrustError> {
    belief.update(obs, model)
}

/// Trust prediction for requirements `lambda_bar` under `belief`.
pub fn predict_trust(
    belief: &CapabilityBelief,
    lambda_bar: &CapabilityVector,
    model: &SuccessModel,
) -> Result<TrustEstimate, TrustError> {
    belief.predict_trust(lambda_bar.values(), model)
}

/// Credible-bound endpoints of one dimension's marginal belief.
pub fn credible_bounds(
    belief: &CapabilityBelief,
    dim: usize,
    lo_q: f64,
    hi_q: f64,
) -> Result<(f64, f64), TrustError> {
    belief.credible_bounds(dim, lo_q, hi_q)
}

/// Expectation of one capability dimension under `belief`.
pub fn marginal_mean(belief: &CapabilityBelief, dim: usize) -> Result<f64, TrustError> {
    belief.marginal_mean(dim)
}

fn check_normalized(weights: &[f64]) -> Result<(), TrustError> {
    let mut sum = 0.0;
    for &w in weights {
        if w.is_nan() || w < 0.0 {
            return Err(TrustError::BadWeights { sum: f64::NAN });
        }
        sum += w;
    }
    if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
        return Err(TrustError::BadWeights { sum });
    }
    Ok(())
}

/// Visits every joint cell in row-major order (last dimension fastest),
/// passing the flat index and the per-dimension grid indices.
fn for_each_cell(space: &CapabilitySpace, mut f: impl FnMut(usize, &[usize])) {
    let n = space.n();
    let g = space.grid_resolution();
    let cells = space.joint_cells();
    let mut coords = vec![0usize; n];
    for idx in 0..cells {
        f(idx, &coords);
        for d in (0..n).rev() {
            coords[d] += 1;
            if coords[d] == g {
                coords[d] = 0;
            } else {
                break;
            }
        }
    }
}

fn joint_posterior(
    space: &CapabilitySpace,
    prior: &[f64],
    tables: &[Vec<f64>],
    outcome: Outcome,
    clamp: bool,
    exponent: f64,
) -> Result<Vec<f64>, TrustError> {
    let mut post = vec![0.0; prior.len()];
    // The clamp only matters where the raw product leaves [floor, 1-floor];
    // when it cannot, a success update factors across dimensions and the
    // whole tempered likelihood is a product of per-dimension tables.
    let (lmin, lmax) = tables.iter().fold((1.0, 1.0), |(lo, hi), t| {
        let (tmin, tmax) = t
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            });
        (lo * tmin, hi * tmax)
    });
    let clamp_can_bite = clamp && (lmin < LIKELIHOOD_FLOOR || lmax > 1.0 - LIKELIHOOD_FLOOR);
    if outcome == Outcome::Success && !clamp_can_bite {
        let tempered: Vec<Vec<f64>> = tables
            .iter()
            .map(|t| {
                t.iter()
                    .map(|&v| if exponent == 1.0 { v } else { v.powf(exponent) })
                    .collect()
            })
            .collect();
        for_each_cell(space, |idx, coords| {
            let mut f = prior[idx];
            for (d, &k) in coords.iter().enumerate() {
                f *= tempered[d][k];
            }
            post[idx] = f;
        });
    } else {
        for_each_cell(space, |idx, coords| {
            let mut l = 1.0;
            for (d, &k) in coords.iter().enumerate() {
                l *= tables[d][k];
            }
            if clamp {
                l = l.clamp(LIKELIHOOD_FLOOR, 1.0 - LIKELIHOOD_FLOOR);
            }
            let s = match outcome {
                Outcome::Success => l,
                Outcome::Failure => 1.0 - l,
            };
            post[idx] = prior[idx] * if exponent == 1.0 { s } else { s.powf(exponent) };
        });
    }
    normalize(&mut post)?;
    Ok(post)
}

fn factored_posterior(
    prior: &[Vec<f64>],
    tables: &[Vec<f64>],
    outcome: Outcome,
    clamp: bool,
    exponent: f64,
) -> Result<Vec<Vec<f64>>, TrustError> {
    let n = prior.len();
    let clamped: Vec<Vec<f64>> = tables
        .iter()
        .map(|t| {
            t.iter()
                .map(|&v| {
                    if clamp {
                        v.clamp(LIKELIHOOD_FLOOR, 1.0 - LIKELIHOOD_FLOOR)
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut post = Vec::with_capacity(n);
    match outcome {
        Outcome::Success => {
            for d in 0..n {
                let mut w: Vec<f64> = prior[d]
                    .iter()
                    .zip(&clamped[d])
                    .map(|(&p, &s)| p * if exponent == 1.0 { s } else { s.powf(exponent) })
                    .collect();
                normalize(&mut w)?;
                post.push(w);
            }
        }
        Outcome::Failure => {
            // expected_success[j] = E[s_j] under the prior marginal of j.
            let expected_success: Vec<f64> = (0..n)
                .map(|j| {
                    prior[j]
                        .iter()
                        .zip(&clamped[j])
                        .map(|(&p, &s)| p * s)
                        .sum::<f64>()
                })
                .collect();
            for d in 0..n {
                let mut k_other = 1.0;
                for (j, &e) in expected_success.iter().enumerate() {
                    if j != d {
                        k_other *= e;
                    }
                }
                let mut w: Vec<f64> = prior[d]
                    .iter()
                    .zip(&clamped[d])
                    .map(|(&p, &s)| {
                        let f = 1.0 - s * k_other;
                        p * if exponent == 1.0 { f } else { f.powf(exponent) }
                    })
                    .collect();
                normalize(&mut w)?;
                post.push(w);
            }
        }
    }
    Ok(post)
}

fn normalize(weights: &mut [f64]) -> Result<(), TrustError> {
    let mass: f64 = weights.iter().sum();
    if mass < MASS_EPSILON {
        return Err(TrustError::ImpossibleObservation);
    }
    for w in weights.iter_mut() {
        *w /= mass;
    }
    Ok(())
}

/// Quantile pair of a discrete marginal via a mid-mass piecewise-linear CDF.
fn bounds_from_marginal(
    space: &CapabilitySpace,
    marginal: &[f64],
    lo_q: f64,
    hi_q: f64,
) -> (f64, f64) {
    let g = marginal.len();
    let h = space.grid_spacing();
    // Knots: (x_0 - h, 0), (x_k, cum_{k-1} + m_k/2) for each k, (x_{G-1} + h, 1).
    let mut xs = Vec::with_capacity(g + 2);
    let mut fs = Vec::with_capacity(g + 2);
    xs.push(space.grid_point(0) - h);
    fs.push(0.0);
    let mut cum = 0.0;
    for (k, &mk) in marginal.iter().enumerate() {
        xs.push(space.grid_point(k));
        fs.push((cum + mk / 2.0).min(1.0));
        cum += mk;
    }
    xs.push(space.grid_point(g - 1) + h);
    fs.push(1.0);

    let invert = |q: f64| -> f64 {
        let j = fs.partition_point(|&f| f < q);
        if j == 0 {
            return xs[0].clamp(0.0, 1.0);
        }
        // fs[j-1] < q <= fs[j], so the segment has positive rise.
        let t = (q - fs[j - 1]) / (fs[j] - fs[j - 1]);
        (xs[j - 1] + t * (xs[j] - xs[j - 1])).clamp(0.0, 1.0)
    };
    let lower = invert(lo_q);
    let upper = invert(hi_q).max(lower);
    (lower, upper)
}
