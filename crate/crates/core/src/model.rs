//! Value types shared by the receivers, the Helstrom computation, the Monte
//! Carlo oracle and the scans.
//!
//! Two different angles appear in this problem. The *mixture phase* is the
//! unknown common phase averaged over in the laser model; it never changes
//! click statistics because all amplitudes here are real and only the
//! relative phase matters. The *splitter angle* `phi` parametrizes the
//! beamsplitter as `r = cos(phi)`, `t = sin(phi)`. Only the latter is a
//! parameter of this crate.

use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use crate::{Error, Result};

/// Mean photon numbers of the signal (`alpha2`) and reference (`beta2`) pulses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PulsePair {
    alpha2: f64,
    beta2: f64,
}

impl PulsePair {
    pub fn new(alpha2: f64, beta2: f64) -> Result<Self> {
        for (name, v) in [("alpha2", alpha2), ("beta2", beta2)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Domain(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        Ok(Self { alpha2, beta2 })
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha2
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }

    pub fn alpha(&self) -> f64 {
        self.alpha2.sqrt()
    }

    pub fn beta(&self) -> f64 {
        self.beta2.sqrt()
    }

    pub fn total(&self) -> f64 {
        self.alpha2 + self.beta2
    }

    /// Signal and reference exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha2: self.beta2,
            beta2: self.alpha2,
        }
    }
}

/// Which of the two equally likely signal phases was sent: `Plus` is
/// relative phase 0, `Minus` is relative phase pi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Hypothesis {
    Plus,
    Minus,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 2] = [Hypothesis::Plus, Hypothesis::Minus];

    pub const PRIOR: f64 = 0.5;

    pub fn sign(self) -> f64 {
        match self {
            Hypothesis::Plus => 1.0,
            Hypothesis::Minus => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Hypothesis::Plus => Hypothesis::Minus,
            Hypothesis::Minus => Hypothesis::Plus,
        }
    }
}

/// Lossless two-port splitter with reflection `r = cos(phi)` and
/// transmission `t = sin(phi)`, `0 <= phi <= pi/4`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Beamsplitter {
    phi: f64,
    r: f64,
    t: f64,
}

impl Beamsplitter {
    pub fn from_angle(phi: f64) -> Result<Self> {
        if !phi.is_finite() || !(0.0..=FRAC_PI_4).contains(&phi) {
            return Err(Error::OutOfFamily(format!(
                "splitter angle {phi} rad is outside [0, pi/4]"
            )));
        }
        if phi == FRAC_PI_4 {
            return Ok(Self::fifty_fifty());
        }
        Ok(Self {
            phi,
            r: phi.cos(),
            t: phi.sin(),
        })
    }

    pub fn from_phi_over_pi(phi_over_pi: f64) -> Result<Self> {
        Self::from_angle(phi_over_pi * std::f64::consts::PI)
    }

    /// The 50/50 splitter of homodyne detection, with `r = t` exactly.
    pub fn fifty_fifty() -> Self {
        Self {
            phi: FRAC_PI_4,
            r: std::f64::consts::FRAC_1_SQRT_2,
            t: std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn phi_over_pi(&self) -> f64 {
        self.phi / std::f64::consts::PI
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn is_fifty_fifty(&self) -> bool {
        self.phi == FRAC_PI_4
    }
}

/// Expected photon numbers in output ports 1 and 2 under each hypothesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputMeans {
    pub n1_plus: f64,
    pub n1_minus: f64,
    pub n2_plus: f64,
    pub n2_minus: f64,
}

impl OutputMeans {
    /// Means of (port 1, port 2) under `h`.
    pub fn ports(&self, h: Hypothesis) -> (f64, f64) {
        match h {
            Hypothesis::Plus => (self.n1_plus, self.n2_plus),
            Hypothesis::Minus => (self.n1_minus, self.n2_minus),
        }
    }

    pub fn total(&self, h: Hypothesis) -> f64 {
        let (a, b) = self.ports(h);
        a + b
    }
}

/// Port means `N1± = (r beta ± t alpha)^2`, `N2± = (t beta ∓ r alpha)^2`.
///
/// Because the amplitudes are real, a common phase rotation of signal and
/// reference multiplies both port amplitudes by the same unit phasor and
/// leaves these means unchanged.
pub fn output_means(p: &PulsePair, bs: &Beamsplitter) -> OutputMeans {
    let (a, b) = (p.alpha(), p.beta());
    let (r, t) = (bs.r, bs.t);
    OutputMeans {
        n1_plus: (r * b + t * a).powi(2),
        n1_minus: (r * b - t * a).powi(2),
        n2_plus: (t * b - r * a).powi(2),
        n2_minus: (t * b + r * a).powi(2),
    }
}

/// The splitter that cancels the `Plus` amplitude in port 2:
/// `r^2 = beta^2 / (alpha^2 + beta^2)`, `phi = arctan(alpha / beta)`.
pub fn kennedy_angle(p: &PulsePair) -> Result<Beamsplitter> {
    if p.total() <= 0.0 {
        return Err(Error::Domain(
            "Kennedy angle undefined without light".into(),
        ));
    }
    let (a, b) = (p.alpha(), p.beta());
    if b < a {
        return Err(Error::OutOfFamily(format!(
            "reference weaker than signal (beta2 = {} < alpha2 = {}); swap their roles",
            p.beta2, p.alpha2
        )));
    }
    if a == b {
        return Ok(Beamsplitter::fifty_fifty());
    }
    let norm = p.total().sqrt();
    Ok(Beamsplitter {
        phi: a.atan2(b),
        r: b / norm,
        t: a / norm,
    })
}

/// A pair of detector counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ClickOutcome {
    pub n: u64,
    pub m: u64,
}

/// Which computation produced a [`DiscriminationResult`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PureHelstrom,
    KennedyAsymptotic,
    HomodyneAsymptotic,
    KennedyGeneralized,
    HomodyneGeneralized,
    BeamsplitterMl,
    OptimalExact,
    OptimalSmallAlpha,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::PureHelstrom => "pure_helstrom",
            Method::KennedyAsymptotic => "kennedy_asymptotic",
            Method::HomodyneAsymptotic => "homodyne_asymptotic",
            Method::KennedyGeneralized => "kennedy_generalized",
            Method::HomodyneGeneralized => "homodyne_generalized",
            Method::BeamsplitterMl => "beamsplitter_ml",
            Method::OptimalExact => "optimal_exact",
            Method::OptimalSmallAlpha => "optimal_small_alpha",
        }
    }
}

/// Numerical provenance of a result.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Accuracy {
    /// Tail tolerance used for truncating infinite sums, if any.
    pub tail_tol: Option<f64>,
    /// Rigorous bound on `|P_true - P_reported|` from truncation.
    pub truncation_bound: f64,
    /// Largest photon number kept in any truncated sum or basis.
    pub max_photons: Option<u64>,
    /// Set when there was no light at all and the answer is a forced guess.
    pub degenerate: bool,
}

/// An error probability `P` in `[0, 1/2]` with its distinguishability `D = 1 - 2P`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiscriminationResult {
    pub error_probability: f64,
    pub distinguishability: f64,
    pub method: Method,
    pub accuracy: Accuracy,
}

impl DiscriminationResult {
    /// Clamps round-off excursions outside `[0, 1/2]`.
    pub fn new(error_probability: f64, method: Method, accuracy: Accuracy) -> Self {
        let p = error_probability.clamp(0.0, 0.5);
        Self {
            error_probability: p,
            distinguishability: 1.0 - 2.0 * p,
            method,
            accuracy,
        }
    }

    pub fn from_distinguishability(d: f64, method: Method, accuracy: Accuracy) -> Self {
        Self::new(0.5 - 0.5 * d, method, accuracy)
    }

    pub fn degenerate(method: Method) -> Self {
        Self::new(
            0.5,
            method,
            Accuracy {
                degenerate: true,
                ..Accuracy::default()
            },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pulse_pair_rejects_negative_and_non_finite() {
        assert!(PulsePair::new(-0.1, 1.0).is_err());
        assert!(PulsePair::new(0.1, f64::INFINITY).is_err());
        assert!(PulsePair::new(0.0, 0.0).is_ok());
    }

    #[test]
    fn splitter_family_is_closed_over_zero_to_quarter_pi() {
        assert!(Beamsplitter::from_angle(-1e-9).is_err());
        assert!(Beamsplitter::from_angle(FRAC_PI_4 + 1e-12).is_err());
        assert!(Beamsplitter::from_phi_over_pi(0.25)
            .unwrap()
            .is_fifty_fifty());
        for i in 0..=100 {
            let bs = Beamsplitter::from_angle(FRAC_PI_4 * f64::from(i) / 100.0).unwrap();
            assert!((bs.r() * bs.r() + bs.t() * bs.t() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn means_at_fifty_fifty() {
        let p = PulsePair::new(0.1, 1.0).unwrap();
        let m = output_means(&p, &Beamsplitter::fifty_fifty());
        assert!((m.n1_plus - 0.866_227_766_016_837_9).abs() < 1e-14);
        assert!((m.n1_minus - 0.233_772_233_983_162_08).abs() < 1e-14);
        assert!((m.n2_plus - 0.233_772_233_983_162_08).abs() < 1e-14);
        assert!((m.n2_minus - 0.866_227_766_016_837_9).abs() < 1e-14);
    }

    #[test]
    fn no_signal_means_no_information() {
        let p = PulsePair::new(0.0, 3.0).unwrap();
        for i in 0..=10 {
            let m = output_means(
                &p,
                &Beamsplitter::from_angle(FRAC_PI_4 * f64::from(i) / 10.0).unwrap(),
            );
            assert_eq!(m.n1_plus, m.n1_minus);
            assert_eq!(m.n2_plus, m.n2_minus);
        }
    }

    #[test]
    fn kennedy_angle_cancels_port_two_exactly() {
        let p = PulsePair::new(0.1, 1.0).unwrap();
        let bs = kennedy_angle(&p).unwrap();
        assert_eq!(output_means(&p, &bs).n2_plus, 0.0);
        assert!((bs.r().powi(2) - 1.0 / 1.1).abs() < 1e-14);
        assert!((bs.phi().cos().powi(2) - 1.0 / 1.1).abs() < 1e-14);
        assert!((bs.phi() - (0.1f64.sqrt()).atan()).abs() < 1e-15);
    }

    #[test]
    fn kennedy_angle_limits_and_errors() {
        assert!(kennedy_angle(&PulsePair::new(0.4, 0.4).unwrap())
            .unwrap()
            .is_fifty_fifty());
        let far = kennedy_angle(&PulsePair::new(0.1, 1e12).unwrap()).unwrap();
        assert!(far.phi() < 1e-6 && (far.r() - 1.0).abs() < 1e-12);
        assert!(matches!(
            kennedy_angle(&PulsePair::new(1.0, 0.5).unwrap()),
            Err(Error::OutOfFamily(_))
        ));
        assert!(matches!(
            kennedy_angle(&PulsePair::new(0.0, 0.0).unwrap()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn result_keeps_d_consistent_with_p() {
        let r = DiscriminationResult::new(
            0.5000000000000002,
            Method::BeamsplitterMl,
            Accuracy::default(),
        );
        assert_eq!(r.error_probability, 0.5);
        assert_eq!(r.distinguishability, 0.0);
        let r = DiscriminationResult::new(0.2, Method::PureHelstrom, Accuracy::default());
        assert!((r.distinguishability - 0.6).abs() < 1e-15);
    }
}
