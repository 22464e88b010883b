//! Classification error metrics and label alignment.

use crate::degrees::DegreeProfile;
use crate::error::{Error, Result};
use crate::model::LabelVector;

/// Per-replicate error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    /// Pair-counting global error rate in [0, 1].
    pub g: f64,
    /// True iff the two label vectors induce the same set partition.
    pub exact: bool,
    /// Intruder (false positive) rate per predicted class; `None` when the
    /// predicted class is empty.
    pub intruders: Vec<Option<f64>>,
    /// Missing (false negative) rate per true class; `None` when the true
    /// class is empty.
    pub missing: Vec<Option<f64>>,
}

/// Intruder and missing rates per class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassRates {
    pub intruders: Vec<Option<f64>>,
    pub missing: Vec<Option<f64>>,
}

fn contingency(z: &LabelVector, zhat: &LabelVector) -> Vec<u64> {
    let (a, b) = (z.q(), zhat.q());
    let mut table = vec![0u64; a * b];
    for (i, &t) in z.as_slice().iter().enumerate() {
        table[t as usize * b + zhat.get(i) as usize] += 1;
    }
    table
}

fn choose2(x: u64) -> u64 {
    x * x.saturating_sub(1) / 2
}

/// Number of node pairs on which the two partitions disagree (same class in
/// one, different classes in the other). Integer-exact.
pub(crate) fn pair_disagreements(z: &LabelVector, zhat: &LabelVector) -> Result<u64> {
    if z.len() != zhat.len() {
        return Err(Error::LengthMismatch(z.len(), zhat.len()));
    }
    let table = contingency(z, zhat);
    let together_z: u64 = z.counts().iter().map(|&c| choose2(c)).sum();
    let together_zh: u64 = zhat.counts().iter().map(|&c| choose2(c)).sum();
    let together_both: u64 = table.iter().map(|&c| choose2(c)).sum();
    Ok(together_z + together_zh - 2 * together_both)
}

/// Pair-counting global error rate: the proportion of node pairs classified
/// together in one partition and apart in the other. Computed from the
/// contingency table in O(n + q^2); equal to the literal double sum over
/// all pairs.
pub fn global_error_rate(z: &LabelVector, zhat: &LabelVector) -> Result<f64> {
    let n = z.len() as u64;
    if n < 2 {
        return Err(Error::TooFewNodes {
            got: z.len(),
            needed: 2,
        });
    }
    let d = pair_disagreements(z, zhat)?;
    Ok(d as f64 / choose2(n) as f64)
}

/// Intruder rate `I_q` (fraction of predicted class q with a different true
/// label) and missing rate `M_q` (fraction of true class q predicted
/// elsewhere). Assumes labels already aligned; rates on empty classes are
/// reported as absent, never as zero.
pub fn class_rates(z: &LabelVector, zhat: &LabelVector, q: usize) -> Result<ClassRates> {
    if z.len() != zhat.len() {
        return Err(Error::LengthMismatch(z.len(), zhat.len()));
    }
    if z.q() > q || zhat.q() > q {
        return Err(Error::LabelOutOfRange {
            label: z.q().max(zhat.q()) - 1,
            q,
        });
    }
    let mut pred_total = vec![0u64; q];
    let mut pred_wrong = vec![0u64; q];
    let mut true_total = vec![0u64; q];
    let mut true_missed = vec![0u64; q];
    for (i, &t) in z.as_slice().iter().enumerate() {
        let p = zhat.get(i);
        pred_total[p as usize] += 1;
        true_total[t as usize] += 1;
        if p != t {
            pred_wrong[p as usize] += 1;
            true_missed[t as usize] += 1;
        }
    }
    let rate = |num: &[u64], den: &[u64]| {
        num.iter()
            .zip(den)
            .map(|(&x, &d)| (d > 0).then(|| x as f64 / d as f64))
            .collect()
    };
    Ok(ClassRates {
        intruders: rate(&pred_wrong, &pred_total),
        missing: rate(&true_missed, &true_total),
    })
}

fn agreement(table: &[u64], q: usize, perm: &[usize]) -> u64 {
    // perm maps predicted class -> true class
    (0..q).map(|p| table[perm[p] * q + p]).sum()
}

/// Relabels `zhat` to maximize per-node agreement with `z`.
///
/// When both vectors already follow the increasing-degree label convention
/// this is the identity. Exhaustive over class permutations for q <= 8,
/// greedy contingency matching above.
pub fn align_labels(z: &LabelVector, zhat: &LabelVector, q: usize) -> Result<LabelVector> {
    if z.len() != zhat.len() {
        return Err(Error::LengthMismatch(z.len(), zhat.len()));
    }
    if z.q() > q || zhat.q() > q {
        return Err(Error::LabelOutOfRange {
            label: z.q().max(zhat.q()) - 1,
            q,
        });
    }
    let mut zq = vec![0u64; q * q];
    for (i, &t) in z.as_slice().iter().enumerate() {
        zq[t as usize * q + zhat.get(i) as usize] += 1;
    }
    let mapping: Vec<usize> = if q <= 8 {
        // exhaustive; identity wins ties, otherwise first visited
        let mut best: Vec<usize> = (0..q).collect();
        let mut best_score = agreement(&zq, q, &best);
        let mut perm: Vec<usize> = (0..q).collect();
        permute(&mut perm, 0, &mut |cand: &[usize]| {
            let s = agreement(&zq, q, cand);
            if s > best_score {
                best_score = s;
                best = cand.to_vec();
            }
        });
        best
    } else {
        // greedy: repeatedly take the heaviest remaining (true, predicted) cell
        let mut mapping = vec![usize::MAX; q];
        let mut used_true = vec![false; q];
        let mut used_pred = vec![false; q];
        for _ in 0..q {
            let mut best = (0usize, 0usize, 0u64);
            let mut found = false;
            for t in 0..q {
                if used_true[t] {
                    continue;
                }
                for p in 0..q {
                    if used_pred[p] {
                        continue;
                    }
                    let c = zq[t * q + p];
                    if !found || c > best.2 {
                        best = (t, p, c);
                        found = true;
                    }
                }
            }
            let (t, p, _) = best;
            mapping[p] = t;
            used_true[t] = true;
            used_pred[p] = true;
        }
        mapping
    };
    let labels = zhat
        .as_slice()
        .iter()
        .map(|&p| mapping[p as usize] as u32)
        .collect();
    LabelVector::new(labels, q)
}

fn permute(perm: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == perm.len() {
        visit(perm);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, visit);
        perm.swap(k, i);
    }
}

/// Realized spreading: the largest distance between a node's normalized
/// degree and the conditional mean of its true class.
pub fn spreading(profile: &DegreeProfile, z: &LabelVector, pibar: &[f64]) -> Result<f64> {
    if profile.n() != z.len() {
        return Err(Error::LengthMismatch(profile.n(), z.len()));
    }
    if z.q() > pibar.len() {
        return Err(Error::LengthMismatch(z.q(), pibar.len()));
    }
    let mut d = 0.0f64;
    for (i, &t) in profile.t().iter().enumerate() {
        d = d.max((t - pibar[z.get(i) as usize]).abs());
    }
    Ok(d)
}

/// Assembles the full error report for one (truth, prediction) pair.
pub fn metric_report(z: &LabelVector, zhat: &LabelVector, q: usize) -> Result<MetricReport> {
    let g = global_error_rate(z, zhat)?;
    let rates = class_rates(z, zhat, q)?;
    Ok(MetricReport {
        g,
        exact: g == 0.0,
        intruders: rates.intruders,
        missing: rates.missing,
    })
}
