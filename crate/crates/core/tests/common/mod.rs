//! Reference implementations by direct enumeration, independent of the
//! library internals: likelihoods are recomputed from first principles and
//! posteriors come from a single normalization pass over the explicit joint
//! grid rather than sequential updates.
#![allow(dead_code)]

use trustalloc::CapabilitySpace;

/// Success model recomputed from its definition.
pub enum RefModel {
    Step,
    Sigmoid { beta: f64 },
}

impl RefModel {
    pub fn likelihood(&self, lambda: &[f64], req: &[f64]) -> f64 {
        match self {
            RefModel::Step => {
                if lambda.iter().zip(req).all(|(l, r)| l >= r) {
                    1.0
                } else {
                    0.0
                }
            }
            RefModel::Sigmoid { beta } => lambda
                .iter()
                .zip(req)
                .map(|(l, r)| 1.0 / (1.0 + (-(l - r) / beta).exp()))
                .product(),
        }
    }
}

/// One observation as the oracle sees it: requirements and success flag.
pub struct RefObservation {
    pub requirements: Vec<f64>,
    pub success: bool,
}

/// Every joint grid cell as an explicit coordinate vector, row-major with
/// dimension 0 slowest (the documented snapshot order).
pub fn grid_cells(space: &CapabilitySpace) -> Vec<Vec<f64>> {
    let g = space.grid_resolution();
    let n = space.n();
    let cells = g.pow(n as u32);
    (0..cells)
        .map(|idx| {
            (0..n)
                .map(|d| {
                    let stride = g.pow((n - 1 - d) as u32);
                    let k = (idx / stride) % g;
                    k as f64 / (g - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Brute-force Bayes: uniform prior times the product of all observation
/// likelihoods, normalized once at the end.
pub fn posterior(
    space: &CapabilitySpace,
    observations: &[RefObservation],
    model: &RefModel,
) -> Vec<f64> {
    let mut weights: Vec<f64> = grid_cells(space)
        .iter()
        .map(|lambda| {
            observations
                .iter()
                .map(|obs| {
                    let l = model.likelihood(lambda, &obs.requirements);
                    if obs.success {
                        l
                    } else {
                        1.0 - l
                    }
                })
                .product()
        })
        .collect();
    let mass: f64 = weights.iter().sum();
    assert!(mass > 0.0, "oracle posterior lost all mass");
    for w in &mut weights {
        *w /= mass;
    }
    weights
}

/// Belief-weighted success probability by direct summation.
pub fn trust(space: &CapabilitySpace, weights: &[f64], req: &[f64], model: &RefModel) -> f64 {
    grid_cells(space)
        .iter()
        .zip(weights)
        .map(|(lambda, w)| w * model.likelihood(lambda, req))
        .sum()
}

/// Marginal masses of one dimension by direct summation.
pub fn marginal(space: &CapabilitySpace, weights: &[f64], dim: usize) -> Vec<f64> {
    let g = space.grid_resolution();
    let n = space.n();
    let stride = g.pow((n - 1 - dim) as u32);
    let mut m = vec![0.0; g];
    for (idx, &w) in weights.iter().enumerate() {
        m[(idx / stride) % g] += w;
    }
    m
}

/// Mean of a marginal over the grid points.
pub fn marginal_mean(space: &CapabilitySpace, masses: &[f64]) -> f64 {
    let g = space.grid_resolution();
    masses
        .iter()
        .enumerate()
        .map(|(k, &m)| m * k as f64 / (g - 1) as f64)
        .sum()
}
