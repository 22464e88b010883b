//! The largest-gaps classifier and its gap sequences.
//!
//! Sorting the normalized degrees and cutting at the `q - 1` widest
//! consecutive gaps yields a partition into contiguous degree intervals;
//! classes are numbered in order of increasing degree. The full descending
//! gap sequence and the gaps between class means feed model selection.

use crate::degrees::DegreeProfile;
use crate::error::{Error, Result};
use crate::model::{LabelVector, ModelParams};

/// Output of one largest-gaps run.
#[derive(Debug, Clone, PartialEq)]
pub struct LgResult {
    /// Class count used.
    pub q: usize,
    /// Per-node class, 0-based, increasing with degree.
    pub labels: LabelVector,
    /// The `q - 1` selected cut positions, strictly increasing. A cut at
    /// position `k` separates sorted positions `k` and `k + 1`.
    pub boundaries: Vec<usize>,
    /// Every consecutive sorted-degree gap, in decreasing order (length `n - 1`).
    pub gaps_desc: Vec<f64>,
    /// Mean normalized degree of each class, nondecreasing in the class index.
    pub class_means: Vec<f64>,
    /// Gaps between consecutive class means, in decreasing order (length `q - 1`).
    pub mean_gaps_desc: Vec<f64>,
    /// Set when a zero-width gap had to be selected (equal degrees at a cut).
    pub degenerate: bool,
}

fn sort_desc(values: &mut [f64]) {
    values.sort_unstable_by(|a, b| b.partial_cmp(a).expect("no NaN"));
}

/// Runs the largest-gaps algorithm with `q` classes.
///
/// Ties between equal gaps are broken toward the smaller cut position, which
/// makes the partition deterministic on any input.
pub fn lg_partition(profile: &DegreeProfile, q: usize) -> Result<LgResult> {
    let n = profile.n();
    if q == 0 {
        return Err(Error::ZeroQ);
    }
    if q > n {
        return Err(Error::QTooLarge { q, n });
    }
    let gaps = profile.consecutive_gaps();

    // One ordering serves both the cut selection (take the first q-1) and
    // the descending gap sequence.
    let mut by_size: Vec<u32> = (0..gaps.len() as u32).collect();
    by_size.sort_unstable_by(|&a, &b| {
        gaps[b as usize]
            .partial_cmp(&gaps[a as usize])
            .expect("no NaN")
            .then(a.cmp(&b))
    });
    let gaps_desc: Vec<f64> = by_size.iter().map(|&k| gaps[k as usize]).collect();

    let mut boundaries: Vec<usize> = by_size[..q - 1].iter().map(|&k| k as usize).collect();
    boundaries.sort_unstable();
    let degenerate = boundaries.iter().any(|&k| gaps[k] == 0.0);

    let mut labels = vec![0u32; n];
    let mut class_means = Vec::with_capacity(q);
    let mut start = 0usize;
    for class in 0..q {
        let end = if class + 1 < q { boundaries[class] + 1 } else { n };
        let mut sum = 0.0;
        for pos in start..end {
            labels[profile.order()[pos] as usize] = class as u32;
            sum += profile.sorted_t(pos);
        }
        // clamping keeps the mean inside the class range under rounding,
        // which is what makes H_k >= G_k hold exactly in floating point
        let mean = (sum / (end - start) as f64)
            .max(profile.sorted_t(start))
            .min(profile.sorted_t(end - 1));
        class_means.push(mean);
        start = end;
    }

    let mut mean_gaps_desc: Vec<f64> =
        class_means.windows(2).map(|w| w[1] - w[0]).collect();
    sort_desc(&mut mean_gaps_desc);

    Ok(LgResult {
        q,
        labels: LabelVector::new(labels, q).expect("labels in range"),
        boundaries,
        gaps_desc,
        class_means,
        mean_gaps_desc,
        degenerate,
    })
}

/// All `n - 1` consecutive sorted-degree gaps, sorted in decreasing order.
/// Independent of any class count.
pub fn gap_sequence(profile: &DegreeProfile) -> Result<Vec<f64>> {
    let mut gaps = profile.consecutive_gaps();
    sort_desc(&mut gaps);
    Ok(gaps)
}

/// Consecutive differences of the sorted conditional mean degrees, in
/// decreasing order. Errors if two classes share a conditional mean.
pub fn theoretical_gaps(params: &ModelParams) -> Result<Vec<f64>> {
    let chk = params.check_assumption_a(0.0);
    if let Some(&(a, b)) = chk.colliding.first() {
        return Err(Error::AssumptionAViolated(a, b));
    }
    let mut pibar = params.mean_degrees().pibar;
    pibar.sort_unstable_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let mut gaps: Vec<f64> = pibar.windows(2).map(|w| w[1] - w[0]).collect();
    sort_desc(&mut gaps);
    Ok(gaps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(t: Vec<f64>) -> DegreeProfile {
        DegreeProfile::from_normalized(t).unwrap()
    }

    /// Eleven sorted values whose two widest gaps sit after sorted
    /// positions 2 and 9 (1-based).
    fn eleven_point_fixture() -> DegreeProfile {
        profile(vec![
            0.086, 0.15, 0.6, 0.62, 0.63, 0.645, 0.655, 0.675, 0.697, 0.87, 0.89,
        ])
    }

    #[test]
    fn three_groups_from_two_widest_gaps() {
        let r = lg_partition(&eleven_point_fixture(), 3).unwrap();
        let want = [0u32, 0, 1, 1, 1, 1, 1, 1, 1, 2, 2];
        assert_eq!(r.labels.as_slice(), &want);
        assert_eq!(r.boundaries, vec![1, 8]);
    }

    #[test]
    fn single_class_is_trivial() {
        let r = lg_partition(&eleven_point_fixture(), 1).unwrap();
        assert!(r.labels.as_slice().iter().all(|&l| l == 0));
        assert!(r.boundaries.is_empty());
        assert!(r.mean_gaps_desc.is_empty());
        assert_eq!(r.class_means.len(), 1);
    }

    #[test]
    fn near_tied_widest_gaps_both_selected() {
        let p = profile(vec![0.10, 0.12, 0.50, 0.52, 0.90]);
        let r = lg_partition(&p, 3).unwrap();
        assert_eq!(r.labels.as_slice(), &[0, 0, 1, 1, 2]);
        assert!((r.gaps_desc[0] - 0.38).abs() < 1e-12);
        assert!((r.gaps_desc[1] - 0.38).abs() < 1e-12);
        assert!((r.gaps_desc[2] - 0.02).abs() < 1e-12);
        assert!((r.gaps_desc[3] - 0.02).abs() < 1e-12);
    }

    #[test]
    fn exact_ties_break_toward_smaller_position() {
        // all three gaps equal 0.25 exactly
        let p = profile(vec![0.0, 0.25, 0.5, 0.75]);
        let r = lg_partition(&p, 2).unwrap();
        assert_eq!(r.boundaries, vec![0]);
        assert_eq!(r.labels.as_slice(), &[0, 1, 1, 1]);
        let r3 = lg_partition(&p, 3).unwrap();
        assert_eq!(r3.boundaries, vec![0, 1]);
    }

    #[test]
    fn q_too_large_rejected() {
        let p = profile(vec![0.1, 0.2, 0.3]);
        assert!(matches!(
            lg_partition(&p, 4),
            Err(Error::QTooLarge { q: 4, n: 3 })
        ));
    }

    #[test]
    fn degenerate_flag_on_equal_degrees() {
        let p = profile(vec![0.5, 0.5, 0.5]);
        let r = lg_partition(&p, 2).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.boundaries.len(), 1);
        let counts = r.labels.counts();
        assert!(counts.iter().all(|&c| c > 0));
    }

    #[test]
    fn gap_sequence_examples() {
        let p = profile(vec![0.1, 0.4, 0.5]);
        let g = gap_sequence(&p).unwrap();
        assert!((g[0] - 0.3).abs() < 1e-12);
        assert!((g[1] - 0.1).abs() < 1e-12);

        let c = profile(vec![0.3, 0.3, 0.3, 0.3]);
        assert!(gap_sequence(&c).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gaps_telescope_to_range() {
        let p = profile(vec![0.93, 0.12, 0.57, 0.3, 0.77]);
        let g = gap_sequence(&p).unwrap();
        let sum: f64 = g.iter().sum();
        assert!((sum - (0.93 - 0.12)).abs() < 1e-12);
    }

    #[test]
    fn theoretical_gaps_examples() {
        let p = ModelParams::new(
            3,
            vec![0.3, 0.6, 0.1],
            vec![
                vec![0.95, 0.4, 0.4],
                vec![0.4, 0.7, 0.75],
                vec![0.4, 0.75, 0.65],
            ],
        )
        .unwrap();
        let g = theoretical_gaps(&p).unwrap();
        assert!((g[0] - 0.05).abs() < 1e-12);
        assert!((g[1] - 0.02).abs() < 1e-12);

        let two = ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.2, 0.2], vec![0.2, 1.0]]).unwrap();
        // pibar = (0.2, 0.6) -> single gap 0.4
        let g2 = theoretical_gaps(&two).unwrap();
        assert_eq!(g2.len(), 1);
        assert!((g2[0] - 0.4).abs() < 1e-12);

        let tied =
            ModelParams::new(2, vec![0.5, 0.5], vec![vec![0.8, 0.2], vec![0.2, 0.8]]).unwrap();
        assert!(matches!(
            theoretical_gaps(&tied),
            Err(Error::AssumptionAViolated(0, 1))
        ));
    }

    #[test]
    fn mean_gaps_dominate_selected_gaps() {
        // H_k >= G_k for each k, on a handful of irregular inputs
        for (t, q) in [
            (vec![0.1, 0.11, 0.12, 0.5, 0.51, 0.52], 2usize),
            (vec![0.1, 0.11, 0.12, 0.5, 0.51, 0.52], 4),
            (vec![0.0, 0.0, 0.4, 0.4, 0.9], 3),
            (vec![0.33, 0.1, 0.95, 0.6, 0.61, 0.22], 5),
        ] {
            let r = lg_partition(&profile(t), q).unwrap();
            for k in 0..q - 1 {
                assert!(
                    r.mean_gaps_desc[k] >= r.gaps_desc[k],
                    "H_{k} < G_{k}: {} < {}",
                    r.mean_gaps_desc[k],
                    r.gaps_desc[k]
                );
            }
        }
    }

    #[test]
    fn monotone_labeling_by_degree() {
        let p = profile(vec![0.9, 0.1, 0.5, 0.45, 0.2, 0.85]);
        let r = lg_partition(&p, 3).unwrap();
        for i in 0..p.n() {
            for j in 0..p.n() {
                if r.labels.get(i) < r.labels.get(j) {
                    assert!(p.t()[i] <= p.t()[j]);
                }
            }
        }
    }
}
