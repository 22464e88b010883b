//! Penalized selection of the class count.
//!
//! For each candidate Q the criterion adds the summed slack between
//! class-mean gaps and the selected degree gaps (which punishes merging
//! distinct classes) to a penalty `1 / (n^{(1-beta)/2} G_{Q-1})` that blows
//! up once the smallest selected gap is a within-class one (which punishes
//! splitting). The minimizer over `2..=q_max` estimates the class count.

use crate::degrees::DegreeProfile;
use crate::error::{Error, Result};
use crate::lg::lg_partition;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateScore {
    pub q: usize,
    /// `sum_{k<q} (H_k - G_k)`; nonnegative by the gap-dominance invariant.
    pub sum_hg: f64,
    /// `1 / (n^{(1-beta)/2} G_{q-1})`, infinite when `G_{q-1} = 0`.
    pub penalty: f64,
    /// `sum_hg + penalty`.
    pub f: f64,
}

/// All candidate scores plus the chosen class count.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub beta: f64,
    pub candidates: Vec<CandidateScore>,
    /// Smallest minimizer of `f` among the candidates.
    pub q_hat: usize,
    /// Set when the two-class penalty alone exceeds 1, the largest value the
    /// gap-slack term can take on [0,1] data: even the best split shows no
    /// usable gap, so the data carry no evidence of block structure (a single
    /// class is never a candidate; this flag is the nearest signal).
    pub weak_evidence: bool,
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::BetaOutOfRange(beta));
    }
    Ok(())
}

/// Evaluates the criterion for one candidate `q` (2 <= q <= n).
pub fn f_criterion(profile: &DegreeProfile, q: usize, beta: f64) -> Result<CandidateScore> {
    check_beta(beta)?;
    if q < 2 {
        return Err(Error::ParamOutOfRange(format!(
            "candidate class count {q} must be at least 2"
        )));
    }
    let lg = lg_partition(profile, q)?;
    let mut sum_hg = 0.0;
    for k in 0..q - 1 {
        sum_hg += lg.mean_gaps_desc[k] - lg.gaps_desc[k];
    }
    let smallest_selected = lg.gaps_desc[q - 2];
    let penalty = if smallest_selected == 0.0 {
        f64::INFINITY
    } else {
        1.0 / ((profile.n() as f64).powf((1.0 - beta) / 2.0) * smallest_selected)
    };
    Ok(CandidateScore {
        q,
        sum_hg,
        penalty,
        f: sum_hg + penalty,
    })
}

fn check_q_max(profile: &DegreeProfile, q_max: usize) -> Result<()> {
    if q_max < 2 {
        return Err(Error::ParamOutOfRange(format!(
            "q_max = {q_max} must be at least 2"
        )));
    }
    if q_max > profile.n() {
        return Err(Error::QTooLarge {
            q: q_max,
            n: profile.n(),
        });
    }
    Ok(())
}

fn report(beta: f64, candidates: Vec<CandidateScore>) -> SelectionReport {
    // ties go to the smallest candidate, which comes first
    let mut q_hat = candidates[0].q;
    let mut best = candidates[0].f;
    for c in &candidates[1..] {
        if c.f < best {
            best = c.f;
            q_hat = c.q;
        }
    }
    SelectionReport {
        beta,
        candidates,
        q_hat,
    }
}

/// Evaluates every candidate in `2..=q_max` and returns the smallest
/// minimizer.
pub fn select_q(profile: &DegreeProfile, q_max: usize, beta: f64) -> Result<SelectionReport> {
    check_beta(beta)?;
    check_q_max(profile, q_max)?;
    let qs: Vec<usize> = (2..=q_max).collect();
    #[cfg(feature = "parallel")]
    let candidates: Vec<CandidateScore> = qs
        .par_iter()
        .map(|&q| f_criterion(profile, q, beta))
        .collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let candidates: Vec<CandidateScore> = qs
        .iter()
        .map(|&q| f_criterion(profile, q, beta))
        .collect::<Result<_>>()?;
    Ok(report(beta, candidates))
}

/// Sequential twin of [`select_q`].
pub fn select_q_sequential(
    profile: &DegreeProfile,
    q_max: usize,
    beta: f64,
) -> Result<SelectionReport> {
    check_beta(beta)?;
    check_q_max(profile, q_max)?;
    let candidates: Vec<CandidateScore> = (2..=q_max)
        .map(|q| f_criterion(profile, q, beta))
        .collect::<Result<_>>()?;
    Ok(report(beta, candidates))
}
