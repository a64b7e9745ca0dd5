//! Error probabilities of the linear-optics receivers: the asymptotic
//! (infinite reference) baselines, the generalized Kennedy and homodyne
//! receivers, and the maximum-likelihood receiver over the beamsplitter family.

use std::f64::consts::FRAC_PI_4;

use rayon::prelude::*;

use crate::model::{
    output_means, Accuracy, Beamsplitter, ClickOutcome, DiscriminationResult, Method, OutputMeans,
    PulsePair,
};
use crate::numerics::{gaussian_upper_tail, log_poisson_pmf, PoissonWindow};
use crate::{Error, Result};

pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

/// Outcomes whose log-likelihoods differ by less than this are ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Angle tolerance of the golden-section refinement in [`best_angle`].
pub const ANGLE_TOLERANCE: f64 = 1e-6;

fn check_alpha2(alpha2: f64) -> Result<()> {
    if !alpha2.is_finite() || alpha2 < 0.0 {
        return Err(Error::Domain(format!(
            "alpha2 must be finite and >= 0, got {alpha2}"
        )));
    }
    Ok(())
}

fn check_tail_tol(tail_tol: f64) -> Result<()> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::Domain(format!(
            "tail tolerance must lie in (0, 1), got {tail_tol}"
        )));
    }
    Ok(())
}

/// Minimum error for the pure states `|±alpha>`: `[1 - sqrt(1 - e^{-4 alpha^2})] / 2`.
pub fn p_min_pure(alpha2: f64) -> Result<DiscriminationResult> {
    check_alpha2(alpha2)?;
    let overlap = (-4.0 * alpha2).exp();
    // (1 - sqrt(1 - x)) / 2 rewritten to avoid cancellation when x is small
    let root = (-(-4.0 * alpha2).exp_m1()).sqrt();
    let p = overlap / (2.0 * (1.0 + root));
    Ok(DiscriminationResult::new(
        p,
        Method::PureHelstrom,
        Accuracy::default(),
    ))
}

/// Kennedy receiver with an infinitely strong reference: `e^{-4 alpha^2} / 2`.
pub fn p_kennedy_asymptotic(alpha2: f64) -> Result<DiscriminationResult> {
    check_alpha2(alpha2)?;
    Ok(DiscriminationResult::new(
        0.5 * (-4.0 * alpha2).exp(),
        Method::KennedyAsymptotic,
        Accuracy::default(),
    ))
}

/// Homodyne detection with an infinitely strong reference: `Q(2 alpha)`.
pub fn p_homodyne_asymptotic(alpha2: f64) -> Result<DiscriminationResult> {
    check_alpha2(alpha2)?;
    Ok(DiscriminationResult::new(
        gaussian_upper_tail(2.0 * alpha2.sqrt()),
        Method::HomodyneAsymptotic,
        Accuracy::default(),
    ))
}

/// Kennedy receiver with a finite reference: `exp(-4 alpha^2 beta^2 / (alpha^2 + beta^2)) / 2`.
///
/// Symmetric in signal and reference.
pub fn p_kennedy_generalized(p: &PulsePair) -> DiscriminationResult {
    let total = p.total();
    if total == 0.0 {
        return DiscriminationResult::degenerate(Method::KennedyGeneralized);
    }
    let exponent = 4.0 * (p.alpha2() * p.beta2()) / total;
    DiscriminationResult::new(
        0.5 * (-exponent).exp(),
        Method::KennedyGeneralized,
        Accuracy::default(),
    )
}

/// Homodyne receiver with a finite reference: 50/50 splitter, guess that the
/// brighter port is the one that actually registered more photons, and flip a
/// coin on equal counts.
///
/// Port means are `(beta ± alpha)^2 / 2`. The double sum over counts is cut
/// so each of the four neglected Poisson tails carries less than `tail_tol / 4`.
pub fn p_homodyne_generalized(p: &PulsePair, tail_tol: f64) -> Result<DiscriminationResult> {
    check_tail_tol(tail_tol)?;
    if p.total() == 0.0 {
        return Ok(DiscriminationResult::degenerate(
            Method::HomodyneGeneralized,
        ));
    }
    if p.alpha2() == 0.0 {
        // both ports see the same distribution; any rule is a coin flip
        return Ok(DiscriminationResult::new(
            0.5,
            Method::HomodyneGeneralized,
            Accuracy::default(),
        ));
    }
    let (a, b) = (p.alpha(), p.beta());
    let bright = PoissonWindow::new(0.5 * (b + a).powi(2), 0.25 * tail_tol)?;
    let dim = PoissonWindow::new(0.5 * (b - a).powi(2), 0.25 * tail_tol)?;

    let dim_pmf: Vec<f64> = dim.log_pmf_slice().iter().map(|lp| lp.exp()).collect();
    // suffix[k] = P(dim count >= dim.lo + k), summed from the small end
    let mut suffix = vec![0.0; dim_pmf.len() + 1];
    for k in (0..dim_pmf.len()).rev() {
        suffix[k] = suffix[k + 1] + dim_pmf[k];
    }
    let dim_above = |n: u64| -> f64 {
        if n < dim.lo {
            suffix[0]
        } else {
            let idx = ((n - dim.lo) as usize).min(dim_pmf.len());
            suffix[idx]
        }
    };
    let dim_at = |n: u64| -> f64 {
        if n < dim.lo || n > dim.hi {
            0.0
        } else {
            dim_pmf[(n - dim.lo) as usize]
        }
    };

    let mut total = 0.0;
    for n in bright.counts() {
        let wrong = dim_above(n + 1) + 0.5 * dim_at(n);
        if wrong > 0.0 {
            total += (bright.log_pmf(n) + wrong.ln()).exp();
        }
    }
    let accuracy = Accuracy {
        tail_tol: Some(tail_tol),
        truncation_bound: bright.outside_mass + dim.outside_mass,
        max_photons: Some(bright.hi.max(dim.hi)),
        degenerate: false,
    };
    Ok(DiscriminationResult::new(
        total,
        Method::HomodyneGeneralized,
        accuracy,
    ))
}

/// Verdict of the maximum-likelihood rule on one outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Plus,
    Minus,
    Tie,
}

/// Compares joint log-likelihoods. An outcome impossible under one
/// hypothesis (log-likelihood `-inf`) decides for the other with certainty.
/// Returns `None` when the outcome is impossible under both.
pub fn ml_decision(log_plus: f64, log_minus: f64) -> Option<Decision> {
    match (
        log_plus == f64::NEG_INFINITY,
        log_minus == f64::NEG_INFINITY,
    ) {
        (true, true) => None,
        (true, false) => Some(Decision::Minus),
        (false, true) => Some(Decision::Plus),
        (false, false) => {
            let llr = log_plus - log_minus;
            Some(if llr.abs() < TIE_TOLERANCE {
                Decision::Tie
            } else if llr > 0.0 {
                Decision::Plus
            } else {
                Decision::Minus
            })
        }
    }
}

/// Maximum-likelihood verdict for counts `(n, m)` given the port means.
pub fn ml_decide(means: &OutputMeans, outcome: ClickOutcome) -> Decision {
    let lp = |n: u64, mean: f64| log_poisson_pmf(n, mean).unwrap_or(f64::NEG_INFINITY);
    let log_plus = lp(outcome.n, means.n1_plus) + lp(outcome.m, means.n2_plus);
    let log_minus = lp(outcome.n, means.n1_minus) + lp(outcome.m, means.n2_minus);
    ml_decision(log_plus, log_minus).unwrap_or(Decision::Tie)
}

/// Poisson windows for one output port, sharing a common count range that
/// covers the distributions under both hypotheses.
fn port_windows(
    mean_plus: f64,
    mean_minus: f64,
    tail_tol: f64,
) -> Result<(PoissonWindow, PoissonWindow)> {
    let wp = PoissonWindow::new(mean_plus, tail_tol)?;
    let wm = PoissonWindow::new(mean_minus, tail_tol)?;
    let (lo, hi) = (wp.lo.min(wm.lo), wp.hi.max(wm.hi));
    Ok((
        PoissonWindow::with_range(mean_plus, lo, hi)?,
        PoissonWindow::with_range(mean_minus, lo, hi)?,
    ))
}

/// Error of the maximum-likelihood decision on the joint counts of the two
/// detectors behind splitter `bs`:
/// `1/2 [sum_{decide -} P+(n,m) + sum_{decide +} P-(n,m) + sum_{tie} (P+ + P-)/2]`.
///
/// Each port's counts are cut so that every neglected Poisson tail carries
/// less than `tail_tol`; the reported truncation bound is the neglected mass
/// actually dropped, which stays below `4 tail_tol`.
pub fn p_beamsplitter_ml(
    p: &PulsePair,
    bs: &Beamsplitter,
    tail_tol: f64,
) -> Result<DiscriminationResult> {
    check_tail_tol(tail_tol)?;
    if p.total() == 0.0 {
        return Ok(DiscriminationResult::degenerate(Method::BeamsplitterMl));
    }
    if p.alpha2() == 0.0 {
        return Ok(DiscriminationResult::new(
            0.5,
            Method::BeamsplitterMl,
            Accuracy::default(),
        ));
    }
    let means = output_means(p, bs);
    let (p1_plus, p1_minus) = port_windows(means.n1_plus, means.n1_minus, tail_tol)?;
    let (p2_plus, p2_minus) = port_windows(means.n2_plus, means.n2_minus, tail_tol)?;

    let a_plus = p1_plus.log_pmf_slice();
    let a_minus = p1_minus.log_pmf_slice();
    let b_plus = p2_plus.log_pmf_slice();
    let b_minus = p2_minus.log_pmf_slice();

    let rows: Vec<f64> = (0..a_plus.len())
        .into_par_iter()
        .map(|i| {
            let mut row = 0.0;
            for j in 0..b_plus.len() {
                let lp = a_plus[i] + b_plus[j];
                let lm = a_minus[i] + b_minus[j];
                row += match ml_decision(lp, lm) {
                    None => 0.0,
                    Some(Decision::Minus) => lp.exp(),
                    Some(Decision::Plus) => lm.exp(),
                    Some(Decision::Tie) => 0.5 * (lp.exp() + lm.exp()),
                };
            }
            row
        })
        .collect();
    let total: f64 = rows.iter().sum();

    let out_plus = p1_plus.outside_mass + p2_plus.outside_mass;
    let out_minus = p1_minus.outside_mass + p2_minus.outside_mass;
    let accuracy = Accuracy {
        tail_tol: Some(tail_tol),
        truncation_bound: 0.5 * (out_plus + out_minus),
        max_photons: Some(p1_plus.hi.max(p2_plus.hi)),
        degenerate: false,
    };
    Ok(DiscriminationResult::new(
        0.5 * total,
        Method::BeamsplitterMl,
        accuracy,
    ))
}

/// `n_angles` splitters evenly spaced over `[0, pi/4]`, endpoints included.
pub fn angle_grid(n_angles: usize) -> Result<Vec<Beamsplitter>> {
    if n_angles < 2 {
        return Err(Error::Config(format!(
            "need at least 2 angles, got {n_angles}"
        )));
    }
    (0..n_angles)
        .map(|i| {
            if i + 1 == n_angles {
                Ok(Beamsplitter::fifty_fifty())
            } else {
                Beamsplitter::from_angle(FRAC_PI_4 * i as f64 / (n_angles - 1) as f64)
            }
        })
        .collect()
}

/// The maximum-likelihood error at every angle of `grid`, in grid order.
pub fn angle_sweep(
    p: &PulsePair,
    grid: &[Beamsplitter],
    tail_tol: f64,
) -> Result<Vec<DiscriminationResult>> {
    grid.par_iter()
        .map(|bs| p_beamsplitter_ml(p, bs, tail_tol))
        .collect()
}

/// Best splitter in the family: a uniform grid scan followed by golden-section
/// refinement between the neighbours of the grid minimum.
///
/// The objective has kinks where decision regions change, so no derivatives
/// are used.
pub fn best_angle(
    p: &PulsePair,
    grid_points: usize,
    tail_tol: f64,
) -> Result<(Beamsplitter, DiscriminationResult)> {
    if grid_points < 16 {
        return Err(Error::Config(format!(
            "best_angle needs at least 16 grid points, got {grid_points}"
        )));
    }
    check_tail_tol(tail_tol)?;
    let grid = angle_grid(grid_points)?;
    let values = angle_sweep(p, &grid, tail_tol)?;
    let (best_idx, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.error_probability.total_cmp(&b.1.error_probability))
        .expect("non-empty grid");
    let mut best = (grid[best_idx], values[best_idx]);
    if p.total() == 0.0 {
        return Ok(best);
    }

    let eval = |phi: f64| -> Result<(Beamsplitter, DiscriminationResult)> {
        let bs = Beamsplitter::from_angle(phi.clamp(0.0, FRAC_PI_4))?;
        Ok((bs, p_beamsplitter_ml(p, &bs, tail_tol)?))
    };
    let mut lo = grid[best_idx.saturating_sub(1)].phi();
    let mut hi = grid[(best_idx + 1).min(grid_points - 1)].phi();
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = eval(x1)?;
    let mut f2 = eval(x2)?;
    while hi - lo > ANGLE_TOLERANCE {
        if f1.1.error_probability <= f2.1.error_probability {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = eval(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = eval(x2)?;
        }
    }
    for candidate in [f1, f2] {
        if candidate.1.error_probability < best.1.error_probability {
            best = candidate;
        }
    }
    Ok(best)
}
