//! Normalized degrees and their ordering.

use crate::error::{Error, Result};
use crate::model::Graph;

/// Normalized degrees `t[i] = degree(i) / (n-1)` together with a stable
/// ascending ordering. Everything downstream (classification, gap sequences,
/// model selection) reads the graph only through this profile.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeProfile {
    n: usize,
    t: Vec<f64>,
    order: Vec<u32>,
}

fn argsort_stable(t: &[f64]) -> Vec<u32> {
    let mut order: Vec<u32> = (0..t.len() as u32).collect();
    // keys (t[i], i) are unique, so an unstable sort yields the stable order
    let sort = |o: &mut [u32]| {
        o.sort_unstable_by(|&a, &b| {
            t[a as usize]
                .partial_cmp(&t[b as usize])
                .expect("no NaN after validation")
                .then(a.cmp(&b))
        })
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if t.len() >= 1 << 14 {
            order.par_sort_unstable_by(|&a, &b| {
                t[a as usize]
                    .partial_cmp(&t[b as usize])
                    .expect("no NaN after validation")
                    .then(a.cmp(&b))
            });
            return order;
        }
    }
    sort(&mut order);
    order
}

impl DegreeProfile {
    /// Degrees from one streaming pass over the edges, then a stable sort.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        if g.n() < 2 {
            return Err(Error::TooFewNodes {
                got: g.n(),
                needed: 2,
            });
        }
        Self::from_degrees(g.n(), &g.degrees())
    }

    /// Degrees supplied directly, for workflows that never see the graph.
    pub fn from_degrees(n: usize, degrees: &[u32]) -> Result<Self> {
        if n < 2 {
            return Err(Error::TooFewNodes { got: n, needed: 2 });
        }
        if degrees.len() != n {
            return Err(Error::LengthMismatch(degrees.len(), n));
        }
        let max = (n - 1) as u32;
        if let Some(&d) = degrees.iter().find(|&&d| d > max) {
            return Err(Error::DegreeOutOfRange {
                degree: d as u64,
                max: max as u64,
            });
        }
        let denom = (n - 1) as f64;
        let t: Vec<f64> = degrees.iter().map(|&d| d as f64 / denom).collect();
        let order = argsort_stable(&t);
        Ok(Self { n, t, order })
    }

    /// A profile over raw values in `[0, 1]`, used when the quantities being
    /// split are not literal degrees (for instance pair statistics).
    pub fn from_normalized(t: Vec<f64>) -> Result<Self> {
        let n = t.len();
        if n < 2 {
            return Err(Error::TooFewNodes { got: n, needed: 2 });
        }
        if let Some(&v) = t.iter().find(|&&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::ParamOutOfRange(format!(
                "normalized value {v} outside [0,1]"
            )));
        }
        let order = argsort_stable(&t);
        Ok(Self { n, t, order })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Normalized degree of node `i`.
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    /// Node indices in ascending degree order (ties by node index).
    pub fn order(&self) -> &[u32] {
        &self.order
    }

    /// k-th smallest normalized degree.
    pub fn sorted_t(&self, k: usize) -> f64 {
        self.t[self.order[k] as usize]
    }

    /// Consecutive differences of the sorted values, in sorted-position
    /// order (not yet sorted by size); length `n - 1`.
    pub(crate) fn consecutive_gaps(&self) -> Vec<f64> {
        (0..self.n - 1)
            .map(|k| self.sorted_t(k + 1) - self.sorted_t(k))
            .collect()
    }
}
