//! Seeded simulation of photodetection trials for any receiver in the
//! beamsplitter family, used as an oracle independent of the analytic sums.
//!
//! Trials are split into fixed-size blocks. Block `k` draws from a ChaCha8
//! generator seeded with the run seed and set to stream `k`, so the result
//! depends only on the seed and the configuration, never on scheduling.

use std::f64::consts::TAU;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::Serialize;

use crate::model::{
    kennedy_angle, output_means, Beamsplitter, ClickOutcome, Hypothesis, OutputMeans, PulsePair,
};
use crate::receivers::{ml_decide, Decision};
use crate::{Error, Result};

pub const BLOCK_SIZE: u64 = 1 << 16;

/// Two-sided 99% standard normal quantile.
pub const Z_99: f64 = 2.5758293035489004;

/// Below this mean, counts are drawn by sequential CDF inversion.
pub const INVERSION_LIMIT: f64 = 30.0;

/// How a receiver turns detector counts into a guess.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionRule {
    /// Maximum likelihood over both counts.
    MlJoint,
    /// Any click in port 2 means `Minus`; requires the Kennedy angle.
    KennedySinglePort,
    /// The brighter-under-`Plus` port (port 1) wins if it has more counts;
    /// requires the 50/50 splitter.
    HomodyneCompare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialConfig {
    pub pulses: PulsePair,
    pub splitter: Beamsplitter,
    pub rule: DecisionRule,
    pub trials: u64,
    pub seed: u64,
    /// Rotate signal and reference by a fresh common phase every trial.
    pub random_global_phase: bool,
}

impl TrialConfig {
    pub fn new(
        pulses: PulsePair,
        splitter: Beamsplitter,
        rule: DecisionRule,
        trials: u64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            pulses,
            splitter,
            rule,
            trials,
            seed,
            random_global_phase: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_random_global_phase(mut self, on: bool) -> Self {
        self.random_global_phase = on;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trial count must be at least 1".into()));
        }
        match self.rule {
            DecisionRule::MlJoint => {}
            DecisionRule::HomodyneCompare => {
                if !self.splitter.is_fifty_fifty() {
                    return Err(Error::Config(format!(
                        "homodyne comparison needs the 50/50 splitter, got phi/pi = {}",
                        self.splitter.phi_over_pi()
                    )));
                }
            }
            DecisionRule::KennedySinglePort => {
                let want = kennedy_angle(&self.pulses)
                    .map_err(|e| Error::Config(format!("Kennedy rule unavailable: {e}")))?;
                if (want.phi() - self.splitter.phi()).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "Kennedy rule needs phi/pi = {}, got {}",
                        want.phi_over_pi(),
                        self.splitter.phi_over_pi()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Empirical error rate with a 99% Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateResult {
    pub errors: u64,
    pub trials: u64,
    pub rate: f64,
    pub standard_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

impl EstimateResult {
    pub fn from_counts(errors: u64, trials: u64, seed: u64) -> Self {
        let rate = errors as f64 / trials as f64;
        let standard_error = (rate * (1.0 - rate) / trials as f64).sqrt();
        Self {
            errors,
            trials,
            rate,
            standard_error,
            ci_low: (rate - Z_99 * standard_error).max(0.0),
            ci_high: (rate + Z_99 * standard_error).min(1.0),
            seed,
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

/// Draws a Poisson count; a zero mean always yields zero.
pub fn sample_poisson<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < INVERSION_LIMIT {
        let u: f64 = rng.random();
        let mut k = 0u64;
        let mut pmf = (-mean).exp();
        let mut cdf = pmf;
        while u > cdf {
            k += 1;
            pmf *= mean / k as f64;
            let next = cdf + pmf;
            if next == cdf {
                // cdf stalled just below 1 through rounding
                break;
            }
            cdf = next;
        }
        k
    } else {
        Poisson::new(mean)
            .expect("positive finite mean")
            .sample(rng) as u64
    }
}

fn port_means_with_phase(
    p: &PulsePair,
    bs: &Beamsplitter,
    h: Hypothesis,
    phase: f64,
) -> (f64, f64) {
    // complex amplitudes (r b e^{i phase} ± t a e^{i phase}), (t b e^{i phase} ∓ r a e^{i phase})
    let (c, s) = (phase.cos(), phase.sin());
    let sig = h.sign() * p.alpha();
    let port1 = bs.r() * p.beta() + bs.t() * sig;
    let port2 = bs.t() * p.beta() - bs.r() * sig;
    let norm2 = |x: f64| (x * c).powi(2) + (x * s).powi(2);
    (norm2(port1), norm2(port2))
}

fn decide(rule: DecisionRule, means: &OutputMeans, outcome: ClickOutcome) -> Decision {
    match rule {
        DecisionRule::MlJoint => ml_decide(means, outcome),
        DecisionRule::KennedySinglePort => {
            if outcome.m > 0 {
                Decision::Minus
            } else {
                Decision::Plus
            }
        }
        DecisionRule::HomodyneCompare => match outcome.n.cmp(&outcome.m) {
            std::cmp::Ordering::Greater => Decision::Plus,
            std::cmp::Ordering::Less => Decision::Minus,
            std::cmp::Ordering::Equal => Decision::Tie,
        },
    }
}

fn run_block(cfg: &TrialConfig, means: &OutputMeans, block: u64, trials: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(block);
    let mut errors = 0;
    for _ in 0..trials {
        let truth = if rng.random::<bool>() {
            Hypothesis::Plus
        } else {
            Hypothesis::Minus
        };
        let (mean1, mean2) = if cfg.random_global_phase {
            let phase = rng.random::<f64>() * TAU;
            port_means_with_phase(&cfg.pulses, &cfg.splitter, truth, phase)
        } else {
            means.ports(truth)
        };
        let outcome = ClickOutcome {
            n: sample_poisson(mean1, &mut rng),
            m: sample_poisson(mean2, &mut rng),
        };
        let guess = match decide(cfg.rule, means, outcome) {
            Decision::Plus => Hypothesis::Plus,
            Decision::Minus => Hypothesis::Minus,
            Decision::Tie => {
                if rng.random::<bool>() {
                    Hypothesis::Plus
                } else {
                    Hypothesis::Minus
                }
            }
        };
        if guess != truth {
            errors += 1;
        }
    }
    errors
}

/// Runs `cfg.trials` independent trials and tallies wrong guesses.
pub fn run_trials(cfg: &TrialConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let means = output_means(&cfg.pulses, &cfg.splitter);
    let blocks = cfg.trials.div_ceil(BLOCK_SIZE);
    let per_block: Vec<u64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK_SIZE.min(cfg.trials - b * BLOCK_SIZE);
            run_block(cfg, &means, b, len)
        })
        .collect();
    Ok(EstimateResult::from_counts(
        per_block.iter().sum(),
        cfg.trials,
        cfg.seed,
    ))
}

/// Default splitter for a rule: the 50/50 splitter for homodyne comparison,
/// the Kennedy angle for the single-port rule.
pub fn default_splitter(rule: DecisionRule, p: &PulsePair) -> Result<Beamsplitter> {
    match rule {
        DecisionRule::HomodyneCompare => Ok(Beamsplitter::fifty_fifty()),
        DecisionRule::KennedySinglePort => kennedy_angle(p),
        DecisionRule::MlJoint => Err(Error::Config(
            "the ML rule needs an explicit splitter angle".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(a2: f64, b2: f64) -> PulsePair {
        PulsePair::new(a2, b2).unwrap()
    }

    #[test]
    fn zero_mean_always_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..1000).all(|_| sample_poisson(0.0, &mut rng) == 0));
    }

    #[test]
    fn unit_mean_sample_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 1_000_000;
        let total: u64 = (0..n).map(|_| sample_poisson(1.0, &mut rng)).sum();
        let mean = total as f64 / n as f64;
        assert!((0.997..=1.003).contains(&mean), "{mean}");
    }

    #[test]
    fn fano_factor_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n)
            .map(|_| sample_poisson(10.0, &mut rng) as f64)
            .collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        let fano = var / mean;
        assert!((0.99..=1.01).contains(&fano), "{fano}");
    }

    #[test]
    fn large_means_use_the_library_sampler() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 200_000;
        let mean = (0..n).map(|_| sample_poisson(250.0, &mut rng)).sum::<u64>() as f64 / n as f64;
        assert!((mean - 250.0).abs() < 3.0 * (250.0f64 / n as f64).sqrt() * 1.5);
    }

    #[test]
    fn rule_angle_pairings_are_checked() {
        let p = pair(0.1, 1.0);
        let off = Beamsplitter::from_angle(0.3).unwrap();
        assert!(TrialConfig::new(p, off, DecisionRule::HomodyneCompare, 10, 1).is_err());
        assert!(TrialConfig::new(p, off, DecisionRule::KennedySinglePort, 10, 1).is_err());
        assert!(TrialConfig::new(p, off, DecisionRule::MlJoint, 0, 1).is_err());
        assert!(TrialConfig::new(p, off, DecisionRule::MlJoint, 10, 1).is_ok());
        let ken = kennedy_angle(&p).unwrap();
        assert!(TrialConfig::new(p, ken, DecisionRule::KennedySinglePort, 10, 1).is_ok());
    }

    #[test]
    fn estimate_interval_invariants() {
        let e = EstimateResult::from_counts(300, 1000, 0);
        assert!((e.standard_error - (0.3f64 * 0.7 / 1000.0).sqrt()).abs() < 1e-15);
        assert!(e.contains(e.rate));
        let none = EstimateResult::from_counts(0, 10, 0);
        assert_eq!((none.ci_low, none.ci_high), (0.0, 0.0));
    }

    #[test]
    fn same_seed_same_result() {
        let p = pair(0.1, 1.0);
        let cfg = TrialConfig::new(
            p,
            Beamsplitter::fifty_fifty(),
            DecisionRule::HomodyneCompare,
            200_000,
            77,
        )
        .unwrap();
        assert_eq!(run_trials(&cfg).unwrap(), run_trials(&cfg).unwrap());
        let other = TrialConfig { seed: 78, ..cfg };
        assert_ne!(
            run_trials(&cfg).unwrap().errors,
            run_trials(&other).unwrap().errors
        );
    }

    #[test]
    fn block_result_does_not_depend_on_thread_count() {
        let p = pair(0.2, 4.0);
        let cfg = TrialConfig::new(
            p,
            Beamsplitter::from_angle(0.4).unwrap(),
            DecisionRule::MlJoint,
            300_000,
            5,
        )
        .unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run_trials(&cfg).unwrap());
        let many = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| run_trials(&cfg).unwrap());
        assert_eq!(single, many);
    }

    #[test]
    fn no_signal_is_a_coin_flip() {
        let cfg = TrialConfig::new(
            pair(0.0, 2.0),
            Beamsplitter::from_angle(0.5).unwrap(),
            DecisionRule::MlJoint,
            1_000_000,
            11,
        )
        .unwrap();
        let e = run_trials(&cfg).unwrap();
        assert!((e.rate - 0.5).abs() < 3.0 * e.standard_error);
    }
}
