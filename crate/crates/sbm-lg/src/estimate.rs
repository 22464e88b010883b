//! Plug-in moment estimators of the model parameters.
//!
//! Given any partition of the nodes, the class proportions are estimated by
//! the empirical frequencies and each connection probability by the observed
//! edge frequency over the available node pairs of that class pair. All
//! counting is exact integer arithmetic; division happens once at the end.

use crate::degrees::DegreeProfile;
use crate::error::{Error, Result};
use crate::lg::{lg_partition, LgResult};
use crate::model::{Graph, LabelVector};

/// Estimated parameters plus the integer counts behind them.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateResult {
    pub q: usize,
    /// Class proportion estimates `N_q / n`.
    pub alpha_hat: Vec<f64>,
    /// Connection probability estimates, row-major `q x q`, symmetric.
    /// `None` where the class pair has no available node pairs: "no data"
    /// is distinct from "estimated zero".
    pub pi_hat: Vec<Option<f64>>,
    /// Available node pairs per class pair: `N_q(N_q-1)/2` on the diagonal,
    /// `N_q N_r` off it. Row-major, symmetric.
    pub pair_counts: Vec<u64>,
    /// Observed edges per class pair. Row-major, symmetric.
    pub edge_counts: Vec<u64>,
    /// Class occupancies `N_q`.
    pub class_counts: Vec<u64>,
}

impl EstimateResult {
    pub fn pi_hat_at(&self, a: usize, b: usize) -> Option<f64> {
        self.pi_hat[a * self.q + b]
    }

    /// Largest absolute componentwise error against reference parameters;
    /// `None` if any needed entry is absent.
    pub fn sup_error(&self, alpha: &[f64], pi: &dyn Fn(usize, usize) -> f64) -> Option<f64> {
        let mut err = 0.0f64;
        for (a, &ah) in self.alpha_hat.iter().enumerate() {
            err = err.max((ah - alpha[a]).abs());
        }
        for a in 0..self.q {
            for b in a..self.q {
                err = err.max((self.pi_hat_at(a, b)? - pi(a, b)).abs());
            }
        }
        Some(err)
    }
}

/// Assembles the estimate from integer tallies. `edge_counts` is a full
/// symmetric `q x q` matrix of observed edges per class pair.
pub fn estimate_from_counts(
    n: usize,
    class_counts: &[u64],
    edge_counts: &[Vec<u64>],
) -> EstimateResult {
    let q = class_counts.len();
    let mut pair_counts = vec![0u64; q * q];
    let mut edges_flat = vec![0u64; q * q];
    let mut pi_hat = vec![None; q * q];
    for a in 0..q {
        for b in 0..q {
            let pairs = if a == b {
                class_counts[a] * class_counts[a].saturating_sub(1) / 2
            } else {
                class_counts[a] * class_counts[b]
            };
            pair_counts[a * q + b] = pairs;
            edges_flat[a * q + b] = edge_counts[a][b];
            if pairs > 0 {
                pi_hat[a * q + b] = Some(edge_counts[a][b] as f64 / pairs as f64);
            }
        }
    }
    let alpha_hat = class_counts
        .iter()
        .map(|&c| c as f64 / n as f64)
        .collect();
    EstimateResult {
        q,
        alpha_hat,
        pi_hat,
        pair_counts,
        edge_counts: edges_flat,
        class_counts: class_counts.to_vec(),
    }
}

/// Moment estimates from a graph and a label vector with `q` classes, in one
/// streaming pass over the edges.
pub fn estimate(g: &Graph, z: &LabelVector, q: usize) -> Result<EstimateResult> {
    if z.len() != g.n() {
        return Err(Error::LengthMismatch(z.len(), g.n()));
    }
    if z.q() > q {
        return Err(Error::LabelOutOfRange { label: z.q() - 1, q });
    }
    let mut edge_counts = vec![vec![0u64; q]; q];
    for &(i, j) in g.edges() {
        let (a, b) = (z.get(i as usize) as usize, z.get(j as usize) as usize);
        edge_counts[a][b] += 1;
        if a != b {
            edge_counts[b][a] += 1;
        }
    }
    let mut class_counts = vec![0u64; q];
    for &l in z.as_slice() {
        class_counts[l as usize] += 1;
    }
    Ok(estimate_from_counts(g.n(), &class_counts, &edge_counts))
}

/// Runs the largest-gaps classifier on the graph's degrees and plugs the
/// predicted partition into the moment estimators.
pub fn estimate_via_lg(g: &Graph, q: usize) -> Result<(LgResult, EstimateResult)> {
    let profile = DegreeProfile::from_graph(g)?;
    let lg = lg_partition(&profile, q)?;
    let est = estimate(g, &lg.labels, q)?;
    Ok((lg, est))
}
