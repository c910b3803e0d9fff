//! Measurement accuracy and its effect on parity statistics.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::QUANTUM_BOUND;

/// Probability that a party's instrument detects and faithfully reports its qubit.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Accuracy(f64);

impl Accuracy {
    pub const PERFECT: Accuracy = Accuracy(1.0);

    pub fn new(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("accuracy {p} outside [0, 1]"));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `(2p - 1)^n`, the surviving weight of an `n`-party parity.
    pub fn parity_contrast(self, n: usize) -> f64 {
        (2.0 * self.0 - 1.0).powi(n as i32)
    }

    pub(crate) fn require_at_least_half(self) -> Result<Self> {
        if self.0 < 0.5 {
            return domain(format!("accuracy {} below 1/2", self.0));
        }
        Ok(self)
    }
}

impl TryFrom<f64> for Accuracy {
    type Error = crate::Error;

    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<Accuracy> for f64 {
    fn from(p: Accuracy) -> f64 {
        p.0
    }
}

/// How undetected events enter the recorded data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetectionPolicy {
    /// Undetected events are discarded; detected ones are assumed representative.
    FairSampling,
    /// Undetected events are assigned an outcome, assumed unbiased.
    BindUndetected,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectorParams {
    /// Rate at which the instrument reflects the qubit state correctly.
    pub q1: f64,
    /// Detection efficiency.
    pub q2: f64,
    pub policy: DetectionPolicy,
}

impl DetectorParams {
    pub fn new(q1: f64, q2: f64, policy: DetectionPolicy) -> Result<Self> {
        for (name, q) in [("q1", q1), ("q2", q2)] {
            if !(0.0..=1.0).contains(&q) {
                return domain(format!("{name} = {q} outside [0, 1]"));
            }
        }
        Ok(Self { q1, q2, policy })
    }
}

/// Fair sampling gives `p = q1`; binding undetected events gives
/// `p = q1 q2 + (1 - q2)/2`.
pub fn accuracy_from_detector(d: &DetectorParams) -> Result<Accuracy> {
    let d = DetectorParams::new(d.q1, d.q2, d.policy)?;
    let p = match d.policy {
        DetectionPolicy::FairSampling => d.q1,
        DetectionPolicy::BindUndetected => d.q1 * d.q2 + (1.0 - d.q2) / 2.0,
    };
    Accuracy::new(p.clamp(0.0, 1.0))
}

/// Probability that independent per-party flips change the `n`-party parity.
pub fn parity_flip_probability(p: Accuracy, n: usize) -> f64 {
    (1.0 - p.parity_contrast(n)) / 2.0
}

/// Success probability observed at accuracy `p` when perfect measurements
/// would succeed with `p_perfect`: `(2p-1)^n p_perfect + (1 - (2p-1)^n)/2`.
///
/// The map is affine in `p_perfect`; inputs outside `[0, 1]` are extrapolated.
pub fn degrade_success_prob(p_perfect: f64, p: Accuracy, n: usize) -> f64 {
    let c = p.parity_contrast(n);
    c * p_perfect + (1.0 - c) / 2.0
}

/// Probability-form Svetlichny value at accuracy `p` for a source at the
/// quantum bound.
pub fn degraded_si_value(p: Accuracy, n: usize) -> f64 {
    degrade_success_prob(QUANTUM_BOUND, p, n)
}

/// Bit mask of independent flips, each set with probability `1 - p`.
pub fn flip_mask<R: Rng + ?Sized>(n: usize, p: Accuracy, rng: &mut R) -> u32 {
    let q = 1.0 - p.value();
    (0..n).fold(0u32, |mask, i| {
        if rng.random::<f64>() < q {
            mask | 1 << i
        } else {
            mask
        }
    })
}

/// Flips each party's outcome bit independently with probability `1 - p`.
pub fn flip_channel<R: Rng + ?Sized>(outcomes: &[u8], p: Accuracy, rng: &mut R) -> Vec<u8> {
    let mask = flip_mask(outcomes.len(), p, rng);
    outcomes
        .iter()
        .enumerate()
        .map(|(i, &b)| (b & 1) ^ ((mask >> i) & 1) as u8)
        .collect()
}
