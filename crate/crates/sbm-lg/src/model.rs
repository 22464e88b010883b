//! Model parameters, graphs and label vectors.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for the "alpha sums to one" check. Entries are never
/// renormalized: a config that fails this check is rejected, not repaired.
pub const ALPHA_SUM_TOLERANCE: f64 = 1e-12;

/// Block-model parameters: class count `q`, class proportions `alpha` and a
/// symmetric matrix `pi` of connection probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    q: usize,
    alpha: Vec<f64>,
    pi: Vec<f64>, // row-major q x q
}

/// Quantities derived from the parameters: per-class conditional mean degrees,
/// their minimal separation, the smallest proportion and the overall
/// connectivity (expected normalized degree).
#[derive(Debug, Clone, PartialEq)]
pub struct MeanDegrees {
    pub pibar: Vec<f64>,
    /// Minimal distance between distinct conditional means; `None` for q = 1.
    pub delta: Option<f64>,
    pub alpha0: f64,
    pub connectivity: f64,
}

/// Result of testing whether all conditional mean degrees are pairwise
/// distinct (up to `tolerance`).
#[derive(Debug, Clone, PartialEq)]
pub struct AssumptionCheck {
    pub holds: bool,
    /// Class pairs (0-based, q < r) whose conditional means collide.
    pub colliding: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct ParamsRepr {
    #[serde(rename = "Q")]
    q: usize,
    alpha: Vec<f64>,
    pi: Vec<Vec<f64>>,
}

impl ModelParams {
    /// Validates raw parameters. Never repairs: non-stochastic `alpha`,
    /// asymmetric or out-of-range `pi` and `q = 0` are all rejected.
    pub fn new(q: usize, alpha: Vec<f64>, pi: Vec<Vec<f64>>) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroQ);
        }
        if alpha.len() != q {
            return Err(Error::NonStochasticAlpha(format!(
                "expected {} entries, got {}",
                q,
                alpha.len()
            )));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !a.is_finite() || a <= 0.0 || a > 1.0 {
                return Err(Error::NonStochasticAlpha(format!(
                    "alpha[{i}] = {a} not in (0,1]"
                )));
            }
        }
        let sum: f64 = alpha.iter().sum();
        if (sum - 1.0).abs() > ALPHA_SUM_TOLERANCE {
            return Err(Error::NonStochasticAlpha(format!("sum = {sum}")));
        }
        if pi.len() != q {
            return Err(Error::ParamOutOfRange(format!(
                "pi has {} rows, expected {}",
                pi.len(),
                q
            )));
        }
        let mut flat = Vec::with_capacity(q * q);
        for (r, row) in pi.iter().enumerate() {
            if row.len() != q {
                return Err(Error::ParamOutOfRange(format!(
                    "pi row {} has {} entries, expected {}",
                    r,
                    row.len(),
                    q
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfRangePi(r, c, v));
                }
                flat.push(v);
            }
        }
        for r in 0..q {
            for c in (r + 1)..q {
                // bitwise equality: symmetry must hold exactly
                if flat[r * q + c] != flat[c * q + r] {
                    return Err(Error::AsymmetricPi(r, c));
                }
            }
        }
        Ok(Self { q, alpha, pi: flat })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn pi(&self, q: usize, r: usize) -> f64 {
        self.pi[q * self.q + r]
    }

    pub fn pi_row(&self, q: usize) -> &[f64] {
        &self.pi[q * self.q..(q + 1) * self.q]
    }

    /// Conditional mean degrees, their minimal gap, the smallest proportion
    /// and the connectivity.
    pub fn mean_degrees(&self) -> MeanDegrees {
        let pibar: Vec<f64> = (0..self.q)
            .map(|r| {
                self.pi_row(r)
                    .iter()
                    .zip(&self.alpha)
                    .map(|(p, a)| p * a)
                    .sum()
            })
            .collect();
        let mut delta: Option<f64> = None;
        for a in 0..self.q {
            for b in (a + 1)..self.q {
                let d = (pibar[a] - pibar[b]).abs();
                delta = Some(match delta {
                    Some(cur) => cur.min(d),
                    None => d,
                });
            }
        }
        let alpha0 = self.alpha.iter().cloned().fold(f64::INFINITY, f64::min);
        let connectivity = pibar.iter().zip(&self.alpha).map(|(p, a)| p * a).sum();
        MeanDegrees {
            pibar,
            delta,
            alpha0,
            connectivity,
        }
    }

    /// Checks that all conditional mean degrees are pairwise more than
    /// `tolerance` apart. Vacuously true for q = 1.
    pub fn check_assumption_a(&self, tolerance: f64) -> AssumptionCheck {
        let pibar = self.mean_degrees().pibar;
        let mut colliding = Vec::new();
        for a in 0..self.q {
            for b in (a + 1)..self.q {
                if (pibar[a] - pibar[b]).abs() <= tolerance {
                    colliding.push((a, b));
                }
            }
        }
        AssumptionCheck {
            holds: colliding.is_empty(),
            colliding,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let repr: ParamsRepr = serde_json::from_str(text)?;
        Self::new(repr.q, repr.alpha, repr.pi)
    }

    pub fn to_json(&self) -> String {
        let repr = ParamsRepr {
            q: self.q,
            alpha: self.alpha.clone(),
            pi: (0..self.q).map(|r| self.pi_row(r).to_vec()).collect(),
        };
        serde_json::to_string_pretty(&repr).expect("params serialize")
    }
}

/// Undirected simple graph on nodes `0..n`. Edges are stored as unique
/// `(i, j)` pairs with `i < j`, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    /// Normalizes, sorts and validates an edge list: self-loops, duplicates
    /// and out-of-range endpoints are rejected.
    pub fn new(n: usize, edges: Vec<(u32, u32)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::TooFewNodes { got: 0, needed: 1 });
        }
        let mut edges: Vec<(u32, u32)> = edges
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        for &(i, j) in &edges {
            if i == j {
                return Err(Error::InvalidEdge {
                    i: i as u64,
                    j: j as u64,
                    n,
                    reason: "self-loop",
                });
            }
            if j as usize >= n {
                return Err(Error::InvalidEdge {
                    i: i as u64,
                    j: j as u64,
                    n,
                    reason: "endpoint out of range",
                });
            }
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).position(|w| w[0] == w[1]) {
            let (i, j) = edges[w];
            return Err(Error::InvalidEdge {
                i: i as u64,
                j: j as u64,
                n,
                reason: "duplicate edge",
            });
        }
        Ok(Self { n, edges })
    }

    /// Edges already unique and normalized (`i < j`); sorts only.
    pub(crate) fn from_unique_edges(n: usize, mut edges: Vec<(u32, u32)>) -> Self {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            edges.par_sort_unstable();
        }
        #[cfg(not(feature = "parallel"))]
        edges.sort_unstable();
        Self::from_sorted_unique_edges(n, edges)
    }

    /// Edges already sorted, unique and normalized.
    pub(crate) fn from_sorted_unique_edges(n: usize, edges: Vec<(u32, u32)>) -> Self {
        debug_assert!(edges.iter().all(|&(i, j)| i < j && (j as usize) < n));
        debug_assert!(edges.windows(2).all(|w| w[0] < w[1]));
        Self { n, edges }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    /// Per-node degrees in one pass over the edge list.
    pub fn degrees(&self) -> Vec<u32> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            // shard, then reduce with integer adds: bit-identical to sequential
            return self
                .edges
                .par_chunks(1 << 20)
                .fold(
                    || vec![0u32; self.n],
                    |mut deg, chunk| {
                        for &(i, j) in chunk {
                            deg[i as usize] += 1;
                            deg[j as usize] += 1;
                        }
                        deg
                    },
                )
                .reduce(
                    || vec![0u32; self.n],
                    |mut a, b| {
                        for (x, y) in a.iter_mut().zip(b) {
                            *x += y;
                        }
                        a
                    },
                );
        }
        #[cfg(not(feature = "parallel"))]
        {
            let mut deg = vec![0u32; self.n];
            for &(i, j) in &self.edges {
                deg[i as usize] += 1;
                deg[j as usize] += 1;
            }
            deg
        }
    }
}

/// Assignment of each node to one of `q` classes (0-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<u32>,
    q: usize,
}

impl LabelVector {
    pub fn new(labels: Vec<u32>, q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::ZeroQ);
        }
        if let Some(&bad) = labels.iter().find(|&&l| l as usize >= q) {
            return Err(Error::LabelOutOfRange {
                label: bad as usize,
                q,
            });
        }
        Ok(Self { labels, q })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn get(&self, i: usize) -> u32 {
        self.labels[i]
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.labels
    }

    /// Class occupancy counts.
    pub fn counts(&self) -> Vec<u64> {
        let mut c = vec![0u64; self.q];
        for &l in &self.labels {
            c[l as usize] += 1;
        }
        c
    }

    /// Node indices grouped by class, each group ascending.
    pub fn groups(&self) -> Vec<Vec<u32>> {
        let mut g = vec![Vec::new(); self.q];
        for (i, &l) in self.labels.iter().enumerate() {
            g[l as usize].push(i as u32);
        }
        g
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_params() -> ModelParams {
        ModelParams::new(
            3,
            vec![0.3, 0.6, 0.1],
            vec![
                vec![0.95, 0.4, 0.4],
                vec![0.4, 0.7, 0.75],
                vec![0.4, 0.75, 0.65],
            ],
        )
        .unwrap()
    }

    #[test]
    fn validate_accepts_simulation_design() {
        let p = paper_params();
        assert_eq!(p.q(), 3);
    }

    #[test]
    fn validate_accepts_single_block() {
        let p = ModelParams::new(1, vec![1.0], vec![vec![0.5]]).unwrap();
        let md = p.mean_degrees();
        assert_eq!(md.pibar, vec![0.5]);
        assert_eq!(md.delta, None);
        assert_eq!(md.alpha0, 1.0);
    }

    #[test]
    fn validate_rejects_bad_alpha_sum() {
        let err = ModelParams::new(2, vec![0.5, 0.6], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::NonStochasticAlpha(_))));
    }

    #[test]
    fn validate_rejects_zero_alpha_entry() {
        let err = ModelParams::new(2, vec![0.0, 1.0], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::NonStochasticAlpha(_))));
    }

    #[test]
    fn validate_rejects_asymmetric_pi() {
        let err = ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.5, 0.4], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(Error::AsymmetricPi(0, 1))));
    }

    #[test]
    fn validate_rejects_out_of_range_pi() {
        let err = ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.5, 1.4], vec![1.4, 0.5]]);
        assert!(matches!(err, Err(Error::OutOfRangePi(0, 1, _))));
    }

    #[test]
    fn validate_rejects_zero_q() {
        assert!(matches!(
            ModelParams::new(0, vec![], vec![]),
            Err(Error::ZeroQ)
        ));
    }

    #[test]
    fn mean_degrees_match_simulation_design() {
        let md = paper_params().mean_degrees();
        let want = [0.565, 0.615, 0.635];
        for (got, want) in md.pibar.iter().zip(want) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert!((md.delta.unwrap() - 0.02).abs() < 1e-12);
        assert!((md.alpha0 - 0.1).abs() < 1e-15);
        assert!((md.connectivity - 0.602).abs() < 1e-12);
    }

    #[test]
    fn mean_degrees_symmetric_two_block_fixture() {
        let p = ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let md = p.mean_degrees();
        assert_eq!(md.pibar, vec![0.5, 0.5]);
        assert_eq!(md.delta, Some(0.0));
    }

    #[test]
    fn assumption_a_examples() {
        assert!(paper_params().check_assumption_a(1e-9).holds);
        let sym =
            ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        let chk = sym.check_assumption_a(1e-9);
        assert!(!chk.holds);
        assert_eq!(chk.colliding, vec![(0, 1)]);
        let single = ModelParams::new(1, vec![1.0], vec![vec![0.3]]).unwrap();
        assert!(single.check_assumption_a(1e-9).holds);
    }

    #[test]
    fn mean_degrees_label_permutation_equivariant() {
        // permuting blocks permutes pibar the same way
        let p = paper_params();
        let perm = [2usize, 0, 1]; // new index -> old index
        let alpha: Vec<f64> = perm.iter().map(|&o| p.alpha()[o]).collect();
        let pi: Vec<Vec<f64>> = perm
            .iter()
            .map(|&r| perm.iter().map(|&c| p.pi(r, c)).collect())
            .collect();
        let permuted = ModelParams::new(3, alpha, pi).unwrap();
        let md = p.mean_degrees();
        let mdp = permuted.mean_degrees();
        for (new, &old) in perm.iter().enumerate() {
            assert_eq!(mdp.pibar[new], md.pibar[old]);
        }
        assert_eq!(md.delta, mdp.delta);
        assert!((md.connectivity - mdp.connectivity).abs() < 1e-15);
    }

    #[test]
    fn params_json_round_trip() {
        let p = paper_params();
        let p2 = ModelParams::from_json(&p.to_json()).unwrap();
        assert_eq!(p, p2);
        let explicit = r#"{"Q":2,"alpha":[0.5,0.5],"pi":[[0.1,0.2],[0.2,0.3]]}"#;
        assert_eq!(ModelParams::from_json(explicit).unwrap().pi(0, 1), 0.2);
    }

    #[test]
    fn graph_rejects_bad_edges() {
        assert!(matches!(
            Graph::new(3, vec![(1, 1)]),
            Err(Error::InvalidEdge { reason: "self-loop", .. })
        ));
        assert!(matches!(
            Graph::new(3, vec![(0, 3)]),
            Err(Error::InvalidEdge { reason: "endpoint out of range", .. })
        ));
        assert!(matches!(
            Graph::new(3, vec![(0, 1), (1, 0)]),
            Err(Error::InvalidEdge { reason: "duplicate edge", .. })
        ));
    }

    #[test]
    fn graph_normalizes_and_sorts() {
        let g = Graph::new(4, vec![(3, 2), (0, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
        assert_eq!(g.degrees(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn label_vector_counts_and_bounds() {
        let z = LabelVector::new(vec![0, 0, 1, 2], 3).unwrap();
        assert_eq!(z.counts(), vec![2, 1, 1]);
        assert_eq!(z.groups()[0], vec![0, 1]);
        assert!(matches!(
            LabelVector::new(vec![0, 3], 3),
            Err(Error::LabelOutOfRange { label: 3, q: 3 })
        ));
    }
}
