//! Seeded sampling of labels and graphs, with streaming consumers.
//!
//! Graphs are sampled block pair by block pair. Within one block pair the
//! candidate node pairs form a linear index space and edges are placed by
//! drawing geometric skip distances, so the expected cost is proportional to
//! the number of events rather than the number of candidate pairs. Block
//! pairs with connection probability above 1/2 are sampled through their
//! complement (non-edges), which keeps the event rate at most 1/2.
//!
//! The index space of every block pair is cut into fixed-size chunks, each
//! driven by its own RNG substream. Chunk boundaries depend only on the
//! labels, never on the thread count, and the geometric process is
//! memoryless, so results are identical however the chunks are scheduled.

use rand::Rng;

use crate::error::Result;
use crate::model::{Graph, LabelVector, ModelParams};
use crate::rng::{stream_rng, LABEL_STREAM, SAMPLER_STREAM_BASE};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Candidate pairs per work chunk. Fixed: changing it changes nothing but
/// scheduling granularity, yet it must not be derived from the thread count
/// or outputs would stop being reproducible across machines.
const CHUNK_PAIRS: u64 = 1 << 22;

/// Draws `n` i.i.d. class labels from the model proportions.
pub fn sample_labels(params: &ModelParams, n: usize, seed: u64) -> LabelVector {
    let mut rng = stream_rng(seed, LABEL_STREAM);
    let alpha = params.alpha();
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut class = params.q() - 1;
        for (k, &a) in alpha.iter().enumerate() {
            acc += a;
            if u < acc {
                class = k;
                break;
            }
        }
        labels.push(class as u32);
    }
    LabelVector::new(labels, params.q()).expect("labels in range by construction")
}

#[derive(Debug, Clone, Copy)]
struct PairPlan {
    /// Block pair, `q <= r`.
    q: usize,
    r: usize,
    /// Probability of one *event* (edge in direct mode, non-edge in
    /// complement mode); always in [0, 1/2].
    event_p: f64,
    complement: bool,
}

#[derive(Debug, Clone, Copy)]
struct Chunk {
    pair: usize,
    lo: u64,
    hi: u64,
    stream: u64,
    /// Cursor for linear index `lo` in a within-block combination space;
    /// unused for cross-block chunks.
    start_row: u64,
    start_col: u64,
}

struct Plan {
    pairs: Vec<PairPlan>,
    chunks: Vec<Chunk>,
}

/// Advances a combination-space cursor `(row, col)` (0 <= row < col < m,
/// row-major) forward by `steps` positions.
fn advance_combination(m: u64, row: &mut u64, col: &mut u64, mut steps: u64) {
    loop {
        let left_in_row = (m - 1) - *col;
        if steps <= left_in_row {
            *col += steps;
            return;
        }
        steps -= left_in_row + 1;
        *row += 1;
        *col = *row + 1;
        if *row >= m - 1 {
            // past the last position; only reachable for a sentinel advance
            return;
        }
    }
}

fn build_plan(params: &ModelParams, counts: &[u64]) -> Plan {
    let q = params.q();
    let mut pairs = Vec::new();
    let mut chunks = Vec::new();
    let mut stream = SAMPLER_STREAM_BASE;
    for a in 0..q {
        for b in a..q {
            let n_pairs = if a == b {
                counts[a] * counts[a].saturating_sub(1) / 2
            } else {
                counts[a] * counts[b]
            };
            if n_pairs == 0 {
                continue;
            }
            let p = params.pi(a, b);
            let complement = p > 0.5;
            let event_p = if complement { 1.0 - p } else { p };
            let pair_idx = pairs.len();
            pairs.push(PairPlan {
                q: a,
                r: b,
                event_p,
                complement,
            });
            let mut lo = 0u64;
            let (mut row, mut col) = (0u64, 1u64);
            while lo < n_pairs {
                let hi = (lo + CHUNK_PAIRS).min(n_pairs);
                chunks.push(Chunk {
                    pair: pair_idx,
                    lo,
                    hi,
                    stream,
                    start_row: row,
                    start_col: col,
                });
                stream += 1;
                if a == b && hi < n_pairs {
                    advance_combination(counts[a], &mut row, &mut col, hi - lo);
                }
                lo = hi;
            }
        }
    }
    Plan { pairs, chunks }
}

/// Lazily yields ascending event positions in `[lo, hi)`.
///
/// Skip distances are geometric, drawn by inversion: one uniform and one
/// logarithm per event, `skip = floor(ln(U) / ln(1 - p))`.
struct EventStream {
    rng: rand_chacha::ChaCha8Rng,
    /// `1 / ln(1 - p)`; `None` when events are impossible (`p = 0`).
    inv_log1mp: Option<f64>,
    next: u64,
    hi: u64,
}

impl EventStream {
    fn new(seed: u64, chunk: &Chunk, event_p: f64) -> Self {
        let rng = stream_rng(seed, chunk.stream);
        let inv_log1mp = (event_p > 0.0).then(|| (-event_p).ln_1p().recip());
        Self {
            rng,
            inv_log1mp,
            next: chunk.lo,
            hi: chunk.hi,
        }
    }

    fn next_event(&mut self) -> Option<u64> {
        let inv = self.inv_log1mp?;
        let u: f64 = self.rng.random();
        // u = 0 maps to an effectively infinite skip; the cast saturates
        let skip = (u.ln() * inv).floor() as u64;
        let pos = self.next.checked_add(skip)?;
        if pos >= self.hi {
            return None;
        }
        self.next = pos + 1;
        Some(pos)
    }
}

/// Calls `emit` for every event position of `chunk`, already decoded into a
/// node pair `(i, j)` with `i < j`.
fn for_each_event(
    seed: u64,
    chunk: &Chunk,
    pair: &PairPlan,
    groups: &[Vec<u32>],
    mut emit: impl FnMut(u32, u32),
) {
    let mut ev = EventStream::new(seed, chunk, pair.event_p);
    if pair.q == pair.r {
        let members = &groups[pair.q];
        let m = members.len() as u64;
        let (mut row, mut col) = (chunk.start_row, chunk.start_col);
        let mut at = chunk.lo;
        while let Some(pos) = ev.next_event() {
            advance_combination(m, &mut row, &mut col, pos - at);
            at = pos;
            emit(members[row as usize], members[col as usize]);
        }
    } else {
        let left = &groups[pair.q];
        let right = &groups[pair.r];
        let nr = right.len() as u64;
        // incremental decode: a division only when a jump crosses rows,
        // which is rare in dense blocks
        let mut row = chunk.lo / nr;
        let mut col = chunk.lo % nr;
        let mut at = chunk.lo;
        while let Some(pos) = ev.next_event() {
            col += pos - at;
            if col >= nr {
                row += col / nr;
                col %= nr;
            }
            at = pos;
            let i = left[row as usize];
            let j = right[col as usize];
            emit(i.min(j), i.max(j));
        }
    }
}

/// Walks every candidate pair of `chunk`, calling `emit(i, j, is_event)`.
/// Used to materialize complement-mode chunks.
fn for_each_pair(
    seed: u64,
    chunk: &Chunk,
    pair: &PairPlan,
    groups: &[Vec<u32>],
    mut emit: impl FnMut(u32, u32, bool),
) {
    let mut ev = EventStream::new(seed, chunk, pair.event_p);
    let mut next_event = ev.next_event();
    if pair.q == pair.r {
        let members = &groups[pair.q];
        let m = members.len() as u64;
        let (mut row, mut col) = (chunk.start_row, chunk.start_col);
        for pos in chunk.lo..chunk.hi {
            let is_event = next_event == Some(pos);
            if is_event {
                next_event = ev.next_event();
            }
            emit(members[row as usize], members[col as usize], is_event);
            advance_combination(m, &mut row, &mut col, 1);
        }
    } else {
        let left = &groups[pair.q];
        let right = &groups[pair.r];
        let nr = right.len() as u64;
        let mut row = (chunk.lo / nr) as usize;
        let mut col = (chunk.lo % nr) as usize;
        for pos in chunk.lo..chunk.hi {
            let is_event = next_event == Some(pos);
            if is_event {
                next_event = ev.next_event();
            }
            let (i, j) = (left[row], right[col]);
            emit(i.min(j), i.max(j), is_event);
            col += 1;
            if col == nr as usize {
                col = 0;
                row += 1;
            }
        }
    }
}

fn chunk_edges(seed: u64, chunk: &Chunk, pair: &PairPlan, groups: &[Vec<u32>]) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    if pair.complement {
        for_each_pair(seed, chunk, pair, groups, |i, j, is_event| {
            if !is_event {
                out.push((i, j));
            }
        });
    } else {
        for_each_event(seed, chunk, pair, groups, |i, j| out.push((i, j)));
    }
    out
}

/// Samples a graph: each candidate pair `{i,j}` is an edge independently
/// with probability `pi[z_i][z_j]`. Expected time is linear in `n` plus the
/// number of edges (or non-edges, for blocks denser than 1/2).
///
/// Note the edge list is materialized; for degree-only workloads prefer
/// [`sampled_degrees`], which streams in O(n) memory.
pub fn sample_graph(params: &ModelParams, z: &LabelVector, seed: u64) -> Graph {
    let groups = z.groups();
    let counts: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();
    let plan = build_plan(params, &counts);
    #[cfg(feature = "parallel")]
    let per_chunk: Vec<Vec<(u32, u32)>> = plan
        .chunks
        .par_iter()
        .map(|c| chunk_edges(seed, c, &plan.pairs[c.pair], &groups))
        .collect();
    #[cfg(not(feature = "parallel"))]
    let per_chunk: Vec<Vec<(u32, u32)>> = plan
        .chunks
        .iter()
        .map(|c| chunk_edges(seed, c, &plan.pairs[c.pair], &groups))
        .collect();
    let total = per_chunk.iter().map(Vec::len).sum();
    let mut edges = Vec::with_capacity(total);
    for mut v in per_chunk {
        edges.append(&mut v);
    }
    Graph::from_unique_edges(z.len(), edges)
}

/// Sequential twin of [`sample_graph`]; same output for the same seed.
pub fn sample_graph_sequential(params: &ModelParams, z: &LabelVector, seed: u64) -> Graph {
    let groups = z.groups();
    let counts: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();
    let plan = build_plan(params, &counts);
    let mut edges = Vec::new();
    for c in &plan.chunks {
        edges.extend(chunk_edges(seed, c, &plan.pairs[c.pair], &groups));
    }
    edges.sort_unstable();
    Graph::from_sorted_unique_edges(z.len(), edges)
}

fn degree_deltas(seed: u64, plan: &Plan, groups: &[Vec<u32>], deg: &mut [i64], chunk: &Chunk) {
    let pair = &plan.pairs[chunk.pair];
    let sign: i64 = if pair.complement { -1 } else { 1 };
    for_each_event(seed, chunk, pair, groups, |i, j| {
        deg[i as usize] += sign;
        deg[j as usize] += sign;
    });
}

fn apply_full_degree_contributions(plan: &Plan, groups: &[Vec<u32>], deg: &mut [i64]) {
    for pair in &plan.pairs {
        if !pair.complement {
            continue;
        }
        if pair.q == pair.r {
            let add = groups[pair.q].len() as i64 - 1;
            for &i in &groups[pair.q] {
                deg[i as usize] += add;
            }
        } else {
            let (nq, nr) = (groups[pair.q].len() as i64, groups[pair.r].len() as i64);
            for &i in &groups[pair.q] {
                deg[i as usize] += nr;
            }
            for &j in &groups[pair.r] {
                deg[j as usize] += nq;
            }
        }
    }
}

/// Streams the sampled graph and accumulates node degrees without
/// materializing any edge. Identical to `sample_graph(..).degrees()` for the
/// same seed.
pub fn sampled_degrees(params: &ModelParams, z: &LabelVector, seed: u64) -> Vec<u32> {
    let groups = z.groups();
    let counts: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();
    let plan = build_plan(params, &counts);
    let n = z.len();
    #[cfg(feature = "parallel")]
    let mut deg: Vec<i64> = plan
        .chunks
        .par_iter()
        .fold(
            || vec![0i64; n],
            |mut acc, c| {
                degree_deltas(seed, &plan, &groups, &mut acc, c);
                acc
            },
        )
        .reduce(
            || vec![0i64; n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    #[cfg(not(feature = "parallel"))]
    let mut deg: Vec<i64> = {
        let mut acc = vec![0i64; n];
        for c in &plan.chunks {
            degree_deltas(seed, &plan, &groups, &mut acc, c);
        }
        acc
    };
    apply_full_degree_contributions(&plan, &groups, &mut deg);
    deg.into_iter()
        .map(|d| {
            debug_assert!(d >= 0 && d < n as i64);
            d as u32
        })
        .collect()
}

/// Sequential twin of [`sampled_degrees`].
pub fn sampled_degrees_sequential(params: &ModelParams, z: &LabelVector, seed: u64) -> Vec<u32> {
    let groups = z.groups();
    let counts: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();
    let plan = build_plan(params, &counts);
    let mut deg = vec![0i64; z.len()];
    for c in &plan.chunks {
        degree_deltas(seed, &plan, &groups, &mut deg, c);
    }
    apply_full_degree_contributions(&plan, &groups, &mut deg);
    deg.into_iter().map(|d| d as u32).collect()
}

/// Edge counts of the sampled graph, tallied per unordered pair of
/// *counting* classes (for example the classes predicted by a classifier).
/// Streams the same edge process as [`sample_graph`] for the same seed.
///
/// Returns a `k x k` matrix `counts` with `counts[a][b] = counts[b][a]` =
/// number of sampled edges whose endpoints carry counting labels `{a, b}`.
pub fn sampled_pair_counts(
    params: &ModelParams,
    z: &LabelVector,
    counting: &LabelVector,
    seed: u64,
) -> Result<Vec<Vec<u64>>> {
    if z.len() != counting.len() {
        return Err(crate::error::Error::LengthMismatch(z.len(), counting.len()));
    }
    let k = counting.q();
    let groups = z.groups();
    let counts: Vec<u64> = groups.iter().map(|g| g.len() as u64).collect();
    let plan = build_plan(params, &counts);
    let cl = counting.as_slice();

    let tally = |acc: &mut [i64], c: &Chunk| {
        let pair = &plan.pairs[c.pair];
        let sign: i64 = if pair.complement { -1 } else { 1 };
        for_each_event(seed, c, pair, &groups, |i, j| {
            let (a, b) = (cl[i as usize] as usize, cl[j as usize] as usize);
            let (a, b) = (a.min(b), a.max(b));
            acc[a * k + b] += sign;
        });
    };

    #[cfg(feature = "parallel")]
    let mut flat: Vec<i64> = plan
        .chunks
        .par_iter()
        .fold(
            || vec![0i64; k * k],
            |mut acc, c| {
                tally(&mut acc, c);
                acc
            },
        )
        .reduce(
            || vec![0i64; k * k],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    #[cfg(not(feature = "parallel"))]
    let mut flat: Vec<i64> = {
        let mut acc = vec![0i64; k * k];
        for c in &plan.chunks {
            tally(&mut acc, c);
        }
        acc
    };

    // Full-space contributions of complement-mode block pairs, from the
    // (true class, counting class) joint table.
    let mut joint = vec![0u64; params.q() * k];
    for (i, &t) in z.as_slice().iter().enumerate() {
        joint[t as usize * k + cl[i] as usize] += 1;
    }
    for pair in &plan.pairs {
        if !pair.complement {
            continue;
        }
        let jq = &joint[pair.q * k..(pair.q + 1) * k];
        let jr = &joint[pair.r * k..(pair.r + 1) * k];
        for a in 0..k {
            for b in 0..k {
                let pairs = if pair.q == pair.r {
                    match a.cmp(&b) {
                        std::cmp::Ordering::Less => jq[a] * jq[b],
                        std::cmp::Ordering::Equal => jq[a] * jq[a].saturating_sub(1) / 2,
                        std::cmp::Ordering::Greater => continue,
                    }
                } else {
                    jq[a] * jr[b]
                };
                let (x, y) = (a.min(b), a.max(b));
                flat[x * k + y] += pairs as i64;
            }
        }
    }

    let mut out = vec![vec![0u64; k]; k];
    for a in 0..k {
        for b in a..k {
            let v = flat[a * k + b];
            debug_assert!(v >= 0);
            out[a][b] = v as u64;
            out[b][a] = v as u64;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(q: usize, alpha: Vec<f64>, pi: Vec<Vec<f64>>) -> ModelParams {
        ModelParams::new(q, alpha, pi).unwrap()
    }

    fn paper_params() -> ModelParams {
        params(
            3,
            vec![0.3, 0.6, 0.1],
            vec![
                vec![0.95, 0.4, 0.4],
                vec![0.4, 0.7, 0.75],
                vec![0.4, 0.75, 0.65],
            ],
        )
    }

    #[test]
    fn labels_point_mass() {
        let p = params(1, vec![1.0], vec![vec![0.5]]);
        let z = sample_labels(&p, 5, 7);
        assert_eq!(z.as_slice(), &[0, 0, 0, 0, 0]);
    }

    #[test]
    fn labels_deterministic() {
        let p = paper_params();
        let a = sample_labels(&p, 1000, 42);
        let b = sample_labels(&p, 1000, 42);
        assert_eq!(a, b);
        let c = sample_labels(&p, 1000, 43);
        assert_ne!(a, c);
    }

    #[test]
    fn labels_frequency_concentrates() {
        // Hoeffding half-width at 1e6 draws and 1e-6 failure level is ~0.0027
        let p = paper_params();
        let n = 1_000_000;
        let z = sample_labels(&p, n, 11);
        let counts = z.counts();
        for (k, &a) in p.alpha().iter().enumerate() {
            let freq = counts[k] as f64 / n as f64;
            assert!((freq - a).abs() < 0.005, "class {k}: {freq} vs {a}");
        }
    }

    #[test]
    fn empty_and_complete_graphs() {
        let p0 = params(1, vec![1.0], vec![vec![0.0]]);
        let z = sample_labels(&p0, 10, 1);
        assert_eq!(sample_graph(&p0, &z, 1).edge_count(), 0);

        let p1 = params(1, vec![1.0], vec![vec![1.0]]);
        let z = sample_labels(&p1, 4, 1);
        let g = sample_graph(&p1, &z, 1);
        assert_eq!(g.edge_count(), 6);
    }

    #[test]
    fn graph_deterministic_and_seq_par_agree() {
        let p = paper_params();
        let z = sample_labels(&p, 500, 3);
        let a = sample_graph(&p, &z, 9);
        let b = sample_graph(&p, &z, 9);
        assert_eq!(a, b);
        let c = sample_graph_sequential(&p, &z, 9);
        assert_eq!(a, c);
        let d = sample_graph(&p, &z, 10);
        assert_ne!(a, d);
    }

    #[test]
    fn degree_sum_is_twice_edge_count() {
        let p = paper_params();
        let z = sample_labels(&p, 400, 5);
        let g = sample_graph(&p, &z, 5);
        let sum: u64 = g.degrees().iter().map(|&d| d as u64).sum();
        assert_eq!(sum, 2 * g.edge_count() as u64);
    }

    #[test]
    fn streaming_degrees_match_materialized() {
        let p = paper_params();
        for n in [1usize, 2, 3, 57, 400] {
            let z = sample_labels(&p, n, 21);
            let g = sample_graph(&p, &z, 33);
            assert_eq!(sampled_degrees(&p, &z, 33), g.degrees(), "n={n}");
            assert_eq!(sampled_degrees_sequential(&p, &z, 33), g.degrees());
        }
    }

    #[test]
    fn single_block_edge_count_within_four_sigma() {
        // m ~ Binomial(C(2000,2), 0.3)
        let p = params(1, vec![1.0], vec![vec![0.3]]);
        let z = sample_labels(&p, 2000, 2);
        let g = sample_graph(&p, &z, 2);
        let pairs: f64 = 2000.0 * 1999.0 / 2.0;
        let mean = 0.3 * pairs;
        let sd = (pairs * 0.3 * 0.7).sqrt();
        let m = g.edge_count() as f64;
        assert!((m - mean).abs() < 4.0 * sd, "m={m} mean={mean} sd={sd}");
    }

    #[test]
    fn block_pair_frequencies_within_hoeffding_width() {
        // per-pair check at the 99.9% level
        let p = paper_params();
        let n = 1500;
        let z = sample_labels(&p, n, 17);
        let g = sample_graph(&p, &z, 17);
        let counts = z.counts();
        let mut edge_cnt = vec![vec![0u64; 3]; 3];
        for &(i, j) in g.edges() {
            let (a, b) = (z.get(i as usize) as usize, z.get(j as usize) as usize);
            edge_cnt[a.min(b)][a.max(b)] += 1;
        }
        for a in 0..3 {
            for b in a..3 {
                let pairs = if a == b {
                    counts[a] * (counts[a] - 1) / 2
                } else {
                    counts[a] * counts[b]
                } as f64;
                let freq = edge_cnt[a][b] as f64 / pairs;
                let width = ((2.0 * 9.0 / 0.001f64).ln() / (2.0 * pairs)).sqrt();
                assert!(
                    (freq - p.pi(a, b)).abs() <= width,
                    "pair ({a},{b}): freq {freq}, pi {}, width {width}",
                    p.pi(a, b)
                );
            }
        }
    }

    #[test]
    fn dense_block_uses_complement_and_matches_distribution() {
        // p = 0.9 goes through the complement path; check the realized
        // density lands where it should
        let p = params(1, vec![1.0], vec![vec![0.9]]);
        let z = sample_labels(&p, 1200, 8);
        let g = sample_graph(&p, &z, 8);
        let pairs: f64 = 1200.0 * 1199.0 / 2.0;
        let mean = 0.9 * pairs;
        let sd = (pairs * 0.9 * 0.1).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() < 4.0 * sd);
    }

    #[test]
    fn chunk_boundaries_do_not_change_the_law() {
        // a block larger than one chunk: degree mean within 4 sigma per node
        // group; mostly this guards the within-block cursor arithmetic
        let p = params(1, vec![1.0], vec![vec![0.4]]);
        let n = 3000; // C(3000,2) = 4_498_500 pairs > one chunk
        let z = sample_labels(&p, n, 4);
        let deg = sampled_degrees(&p, &z, 4);
        let mean = 0.4 * (n as f64 - 1.0);
        let avg = deg.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
        let se = (0.4 * 0.6 / (n as f64 * (n as f64 - 1.0))).sqrt() * (n as f64 - 1.0) * 2.0;
        assert!((avg - mean).abs() < 6.0 * se, "avg={avg} mean={mean}");
        assert_eq!(deg, sampled_degrees_sequential(&p, &z, 4));
    }

    #[test]
    fn advance_combination_walks_row_major() {
        let m = 5u64;
        let (mut r, mut c) = (0u64, 1u64);
        let mut seen = vec![(0, 1)];
        for _ in 0..9 {
            advance_combination(m, &mut r, &mut c, 1);
            seen.push((r, c));
        }
        let expect: Vec<(u64, u64)> = (0..5)
            .flat_map(|i| ((i + 1)..5).map(move |j| (i, j)))
            .collect();
        assert_eq!(seen, expect);
        // long jumps agree with repeated single steps
        let (mut r2, mut c2) = (0u64, 1u64);
        advance_combination(m, &mut r2, &mut c2, 7);
        assert_eq!((r2, c2), expect[7]);
    }
}
