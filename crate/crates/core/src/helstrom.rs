//! Minimum-error discrimination of the phase-averaged signal/reference states.
//!
//! Averaging over the unknown common phase makes `rho_1 - rho_0` conserve the
//! total photon number `N = n_ref + n_sig`, so the operator is a direct sum of
//! `(N+1) x (N+1)` blocks. Each block is diagonalized on its own and the trace
//! norm is the sum of absolute eigenvalues over all blocks.

use std::f64::consts::FRAC_1_SQRT_2;

use rayon::prelude::*;
use serde::Serialize;

use crate::model::{Accuracy, DiscriminationResult, Method, PulsePair};
use crate::numerics::{
    eigenvalues_symmetric, ln_factorial, poisson_tail_cutoff, poisson_upper_tail, SymmetricMatrix,
};
use crate::{Error, Result};

pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

/// Photons added on top of the Poisson cutoff of the total intensity.
pub const SAFETY_MARGIN: u64 = 10;

/// Relative accuracy target of the small-alpha series.
const SERIES_REL_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy)]
pub struct HelstromConfig {
    pub tail_tol: f64,
    /// Largest total photon number the truncated basis may reach.
    pub max_photons: usize,
}

impl Default for HelstromConfig {
    fn default() -> Self {
        Self {
            tail_tol: DEFAULT_TAIL_TOL,
            max_photons: 400,
        }
    }
}

impl HelstromConfig {
    pub fn with_tail_tol(tail_tol: f64) -> Self {
        Self {
            tail_tol,
            ..Self::default()
        }
    }
}

/// One basis state of the two modes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct BasisState {
    pub n_ref: u64,
    pub n_sig: u64,
}

/// `rho_1 - rho_0` on all states with at most `n_max` photons in total,
/// stored as one block per total photon number.
///
/// Block `N` uses the basis `(n_ref, n_sig) = (i, N - i)` for `i = 0..=N`.
#[derive(Debug, Clone)]
pub struct TruncatedOperator {
    pub pulses: PulsePair,
    pub n_max: u64,
    pub blocks: Vec<SymmetricMatrix>,
}

impl TruncatedOperator {
    /// Truncation chosen from the Poisson tail of the total intensity plus
    /// [`SAFETY_MARGIN`].
    pub fn build(p: &PulsePair, cfg: &HelstromConfig) -> Result<Self> {
        if !(cfg.tail_tol > 0.0 && cfg.tail_tol < 1.0) {
            return Err(Error::Domain(format!(
                "tail tolerance must lie in (0, 1), got {}",
                cfg.tail_tol
            )));
        }
        let n_max = poisson_tail_cutoff(p.total(), cfg.tail_tol)? + SAFETY_MARGIN;
        if n_max as usize > cfg.max_photons {
            return Err(Error::Resource {
                required: n_max as usize,
                ceiling: cfg.max_photons,
            });
        }
        Ok(Self::with_n_max(p, n_max))
    }

    pub fn with_n_max(p: &PulsePair, n_max: u64) -> Self {
        let blocks = (0..=n_max)
            .into_par_iter()
            .map(|total| build_block(p, total))
            .collect();
        Self {
            pulses: *p,
            n_max,
            blocks,
        }
    }

    pub fn block(&self, total: u64) -> &SymmetricMatrix {
        &self.blocks[total as usize]
    }

    pub fn basis(total: u64) -> impl Iterator<Item = BasisState> {
        (0..=total).map(move |i| BasisState {
            n_ref: i,
            n_sig: total - i,
        })
    }

    pub fn trace(&self) -> f64 {
        self.blocks.iter().map(SymmetricMatrix::trace).sum()
    }

    /// Every nonzero matrix element as `(bra, ket, value)`.
    pub fn nonzero_entries(&self) -> Vec<(BasisState, BasisState, f64)> {
        let mut out = Vec::new();
        for (total, block) in self.blocks.iter().enumerate() {
            let total = total as u64;
            for i in 0..=total {
                for j in 0..=total {
                    let v = block.get(i as usize, j as usize);
                    if v != 0.0 {
                        out.push((
                            BasisState {
                                n_ref: i,
                                n_sig: total - i,
                            },
                            BasisState {
                                n_ref: j,
                                n_sig: total - j,
                            },
                            v,
                        ));
                    }
                }
            }
        }
        out
    }
}

/// `<n, p| rho_1 - rho_0 |m, q>` for `n + p = m + q`:
/// `e^{-a^2-b^2} (1 - (-1)^{p+q}) b^{n+m} a^{p+q} / sqrt(n! m! p! q!)`.
pub fn matrix_element(p: &PulsePair, bra: BasisState, ket: BasisState) -> f64 {
    if bra.n_ref + bra.n_sig != ket.n_ref + ket.n_sig {
        return 0.0;
    }
    let sig_power = bra.n_sig + ket.n_sig;
    if sig_power.is_multiple_of(2) {
        return 0.0;
    }
    let ref_power = bra.n_ref + ket.n_ref;
    let log_pow = |base2: f64, k: u64| -> Option<f64> {
        if k == 0 {
            Some(0.0)
        } else if base2 == 0.0 {
            None
        } else {
            Some(0.5 * k as f64 * base2.ln())
        }
    };
    let (Some(lb), Some(la)) = (
        log_pow(p.beta2(), ref_power),
        log_pow(p.alpha2(), sig_power),
    ) else {
        return 0.0;
    };
    let log_norm = 0.5
        * (ln_factorial(bra.n_ref)
            + ln_factorial(ket.n_ref)
            + ln_factorial(bra.n_sig)
            + ln_factorial(ket.n_sig));
    // parity factor is exactly 2 here; all amplitudes are non-negative reals
    2.0 * (lb + la - p.total() - log_norm).exp()
}

fn build_block(p: &PulsePair, total: u64) -> SymmetricMatrix {
    let dim = total as usize + 1;
    SymmetricMatrix::from_upper_fn(dim, |i, j| {
        matrix_element(
            p,
            BasisState {
                n_ref: i as u64,
                n_sig: total - i as u64,
            },
            BasisState {
                n_ref: j as u64,
                n_sig: total - j as u64,
            },
        )
    })
    .expect("block dimension is at least 1")
}

/// Convenience wrapper for [`TruncatedOperator::build`].
pub fn build_rho_diff(p: &PulsePair, cfg: &HelstromConfig) -> Result<TruncatedOperator> {
    TruncatedOperator::build(p, cfg)
}

/// Sum of `|lambda|` over every block.
pub fn trace_norm(op: &TruncatedOperator) -> Result<f64> {
    let per_block: Vec<f64> = op
        .blocks
        .par_iter()
        .map(|b| eigenvalues_symmetric(b).map(|s| s.trace_norm()))
        .collect::<Result<_>>()?;
    Ok(per_block.iter().sum())
}

/// Minimum error probability `1/2 - Tr|rho_1 - rho_0| / 4` for equal priors.
///
/// The blocks beyond `n_max` are dropped whole; their trace norm is at most
/// the Poisson mass of both states above `n_max`, so the reported
/// truncation bound on `P` is half that tail.
pub fn p_err_optimal(p: &PulsePair, cfg: &HelstromConfig) -> Result<DiscriminationResult> {
    let op = TruncatedOperator::build(p, cfg)?;
    let norm = trace_norm(&op)?;
    let accuracy = Accuracy {
        tail_tol: Some(cfg.tail_tol),
        truncation_bound: 0.5 * poisson_upper_tail(p.total(), op.n_max)?,
        max_photons: Some(op.n_max),
        degenerate: p.total() == 0.0,
    };
    Ok(DiscriminationResult::new(
        0.5 - 0.25 * norm,
        Method::OptimalExact,
        accuracy,
    ))
}

/// An eigenvector of the leading-order operator,
/// `(|n>|1> ± |n+1>|0>) / sqrt 2` with the reference mode written first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenvectorDescriptor {
    pub components: [(BasisState, f64); 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallAlphaLevel {
    pub n: u64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub vector_plus: EigenvectorDescriptor,
    pub vector_minus: EigenvectorDescriptor,
}

/// Spectrum of `rho_1 - rho_0` to first order in the signal amplitude.
/// The projectors onto these eigenvectors form the optimum measurement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallAlphaSpectrum {
    pub levels: Vec<SmallAlphaLevel>,
}

fn log_series_term(beta2: f64, n: u64) -> f64 {
    // ln[e^{-b^2} b^{2n+1} / sqrt(n! (n+1)!)]
    -beta2 + (n as f64 + 0.5) * beta2.ln() - 0.5 * (ln_factorial(n) + ln_factorial(n + 1))
}

/// Partial sum of `e^{-b^2} sum_n b^{2n+1} / sqrt(n! (n+1)!)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesSum {
    pub value: f64,
    /// Last index included.
    pub n_cut: u64,
    /// Bound on the neglected tail.
    pub tail_bound: f64,
}

/// The small-alpha distinguishability divided by `2 alpha`; depends on the
/// reference intensity only.
///
/// Terms shrink by `b^2 / sqrt((n+1)(n+2))`; once that ratio is below one the
/// tail is bounded by a geometric series, and summation stops when the
/// bound falls under `1e-13` of the partial sum.
pub fn small_alpha_ratio(beta2: f64) -> Result<SeriesSum> {
    if !beta2.is_finite() || beta2 < 0.0 {
        return Err(Error::Domain(format!(
            "beta2 must be finite and >= 0, got {beta2}"
        )));
    }
    if beta2 == 0.0 {
        return Ok(SeriesSum {
            value: 0.0,
            n_cut: 0,
            tail_bound: 0.0,
        });
    }
    let mut sum = 0.0;
    let mut n = 0u64;
    loop {
        sum += log_series_term(beta2, n).exp();
        let next_ratio = beta2 / (((n + 2) * (n + 3)) as f64).sqrt();
        if next_ratio < 1.0 {
            let next = log_series_term(beta2, n + 1).exp();
            let bound = next / (1.0 - next_ratio);
            if bound <= SERIES_REL_TOL * sum {
                return Ok(SeriesSum {
                    value: sum,
                    n_cut: n,
                    tail_bound: bound,
                });
            }
        }
        n += 1;
    }
}

/// Index of the last term [`small_alpha_ratio`] keeps.
pub fn series_cutoff(beta2: f64) -> Result<u64> {
    Ok(small_alpha_ratio(beta2)?.n_cut)
}

/// Leading-order eigenvalues `± 2 alpha e^{-b^2} b^{2n+1} / sqrt(n! (n+1)!)`
/// and eigenvectors for `n = 0..=n_cut`.
pub fn small_alpha_spectrum(p: &PulsePair, n_cut: u64) -> SmallAlphaSpectrum {
    let levels = (0..=n_cut)
        .map(|n| {
            let lambda = if p.alpha2() == 0.0 || p.beta2() == 0.0 {
                0.0
            } else {
                2.0 * p.alpha() * log_series_term(p.beta2(), n).exp()
            };
            let one_signal = BasisState { n_ref: n, n_sig: 1 };
            let no_signal = BasisState {
                n_ref: n + 1,
                n_sig: 0,
            };
            SmallAlphaLevel {
                n,
                lambda_plus: lambda,
                lambda_minus: -lambda,
                vector_plus: EigenvectorDescriptor {
                    components: [(one_signal, FRAC_1_SQRT_2), (no_signal, FRAC_1_SQRT_2)],
                },
                vector_minus: EigenvectorDescriptor {
                    components: [(one_signal, FRAC_1_SQRT_2), (no_signal, -FRAC_1_SQRT_2)],
                },
            }
        })
        .collect();
    SmallAlphaSpectrum { levels }
}

/// Optimum distinguishability to first order in the signal amplitude:
/// `D_err ≈ 2 alpha e^{-b^2} sum_n b^{2n+1} / sqrt(n! (n+1)!)`.
pub fn d_err_small_alpha(p: &PulsePair) -> Result<f64> {
    Ok(2.0 * p.alpha() * small_alpha_ratio(p.beta2())?.value)
}

/// [`d_err_small_alpha`] as an error probability.
pub fn p_err_small_alpha(p: &PulsePair) -> Result<DiscriminationResult> {
    let series = small_alpha_ratio(p.beta2())?;
    let accuracy = Accuracy {
        tail_tol: None,
        truncation_bound: p.alpha() * series.tail_bound,
        max_photons: Some(series.n_cut + 1),
        degenerate: p.total() == 0.0,
    };
    Ok(DiscriminationResult::from_distinguishability(
        2.0 * p.alpha() * series.value,
        Method::OptimalSmallAlpha,
        accuracy,
    ))
}
