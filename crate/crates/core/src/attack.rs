//! Local weight of the convex combination attack.
//!
//! Eve reproduces the observed isotropic success probability as a mixture of
//! the maximal Svetlichny-local correlation (value 3/4, fully known to her)
//! and the GHZ correlation at the quantum bound (unknown to her). The weight
//! of the local part is `q_L`.

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::noise::{degrade_success_prob, Accuracy};
use crate::{LOCAL_BOUND, QUANTUM_BOUND};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    ThreeParty,
    NParty { n: usize },
    Werner { v: f64 },
}

impl Scenario {
    pub fn parties(&self) -> usize {
        match self {
            Scenario::ThreeParty | Scenario::Werner { .. } => 3,
            Scenario::NParty { n } => *n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackDecomposition {
    /// Closed-form solution of the mimicry equation; exceeds 1 when the
    /// observed correlation is Svetlichny-local.
    pub q_l_raw: f64,
    /// `q_l_raw` clamped into `[0, 1]`.
    pub q_l: f64,
    pub local_value: f64,
    pub nonlocal_value: f64,
    pub scenario: Scenario,
}

impl AttackDecomposition {
    fn new(q_l_raw: f64, scenario: Scenario) -> Self {
        Self {
            q_l_raw,
            q_l: q_l_raw.clamp(0.0, 1.0),
            local_value: LOCAL_BOUND,
            nonlocal_value: QUANTUM_BOUND,
            scenario,
        }
    }

    /// The observed correlation does not violate the inequality, so the
    /// legitimate users abort.
    pub fn aborts(&self) -> bool {
        self.q_l_raw > 1.0
    }

    /// Success probability of Eve's mixture, `3/4 q + (1/2 + √2/4)(1 - q)`,
    /// evaluated with the unclamped weight.
    pub fn mixture_value(&self) -> f64 {
        self.local_value * self.q_l_raw + self.nonlocal_value * (1.0 - self.q_l_raw)
    }
}

fn check_visibility(v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("visibility {v} outside [0, 1]"));
    }
    Ok(())
}

/// Three-party weight in its polynomial form
/// `2√2 (1 - 3p + 6p² - 4p³) / (√2 - 1)`.
pub fn local_weight_3party(p: Accuracy) -> Result<AttackDecomposition> {
    let p = p.require_at_least_half()?.value();
    let poly = 1.0 - 3.0 * p + 6.0 * p * p - 4.0 * p * p * p;
    let raw = 2.0 * SQRT_2 * poly / (SQRT_2 - 1.0);
    Ok(AttackDecomposition::new(raw, Scenario::ThreeParty))
}

/// `q_L = √2 [1 - (2p-1)^n] / (√2 - 1)`.
pub fn local_weight_nparty(p: Accuracy, n: usize) -> Result<AttackDecomposition> {
    if n < 3 {
        return domain(format!("party count {n} below 3"));
    }
    let p = p.require_at_least_half()?;
    let raw = SQRT_2 * (1.0 - p.parity_contrast(n)) / (SQRT_2 - 1.0);
    Ok(AttackDecomposition::new(raw, Scenario::NParty { n }))
}

/// Three-party Werner source: `q_L = (2 + √2) [1 - (2p-1)³ v]`.
pub fn local_weight_werner(p: Accuracy, v: f64) -> Result<AttackDecomposition> {
    check_visibility(v)?;
    let p = p.require_at_least_half()?;
    let raw = (2.0 + SQRT_2) * (1.0 - p.parity_contrast(3) * v);
    Ok(AttackDecomposition::new(raw, Scenario::Werner { v }))
}

/// Success probability the legitimate users observe for the scenario,
/// the right-hand side of the mimicry equation.
pub fn observed_value(p: Accuracy, scenario: Scenario) -> f64 {
    match scenario {
        Scenario::ThreeParty => degrade_success_prob(QUANTUM_BOUND, p, 3),
        Scenario::NParty { n } => degrade_success_prob(QUANTUM_BOUND, p, n),
        Scenario::Werner { v } => {
            degrade_success_prob(v * QUANTUM_BOUND + (1.0 - v) * 0.5, p, 3)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn acc(p: f64) -> Accuracy {
        Accuracy::new(p).unwrap()
    }

    #[test]
    fn perfect_measurement_gives_zero_weight() {
        assert!(local_weight_3party(Accuracy::PERFECT).unwrap().q_l_raw.abs() < 1e-15);
        for n in 3..=10 {
            assert_eq!(local_weight_nparty(Accuracy::PERFECT, n).unwrap().q_l_raw, 0.0);
        }
        assert!(local_weight_werner(Accuracy::PERFECT, 1.0).unwrap().q_l_raw.abs() < 1e-15);
    }

    #[test]
    fn reference_values() {
        // 40-digit reference
        let q = local_weight_3party(acc(0.96)).unwrap();
        assert!((q.q_l - 0.755_606_431_915_914_4).abs() < 1e-12);
        let q = local_weight_nparty(acc(0.98), 5).unwrap();
        assert!((q.q_l_raw - 0.630_357_039_838_438_7).abs() < 1e-12);
        let q = local_weight_werner(Accuracy::PERFECT, 0.9).unwrap();
        assert!((q.q_l_raw - 0.341_421_356_237_309_5).abs() < 1e-12);
    }

    #[test]
    fn weight_is_one_at_critical_accuracy() {
        let p_cr = (1.0 + 2f64.powf(-1.0 / 6.0)) / 2.0;
        let q = local_weight_3party(acc(p_cr)).unwrap();
        assert!((q.q_l_raw - 1.0).abs() < 1e-5);
    }

    #[test]
    fn clamping_and_abort_flag() {
        let q = local_weight_3party(acc(0.9)).unwrap();
        assert!(q.q_l_raw > 1.0);
        assert_eq!(q.q_l, 1.0);
        assert!(q.aborts());
        let q = local_weight_3party(acc(0.99)).unwrap();
        assert!(!q.aborts());
        assert_eq!(q.q_l, q.q_l_raw);
    }

    #[test]
    fn domain_errors() {
        assert!(local_weight_3party(acc(0.49)).is_err());
        assert!(local_weight_nparty(acc(0.9), 2).is_err());
        assert!(local_weight_werner(acc(0.9), 1.5).is_err());
        assert!(local_weight_werner(acc(0.4), 0.5).is_err());
    }

    #[test]
    fn werner_full_visibility_reduces_to_three_party() {
        for i in 0..=1000 {
            let p = acc(0.5 + 0.5 * i as f64 / 1000.0);
            let a = local_weight_werner(p, 1.0).unwrap().q_l_raw;
            let b = local_weight_3party(p).unwrap().q_l_raw;
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn mimicry_equation_holds() {
        for i in 0..=200 {
            let p = acc(0.5 + 0.5 * i as f64 / 200.0);
            for att in [
                local_weight_3party(p).unwrap(),
                local_weight_nparty(p, 6).unwrap(),
                local_weight_werner(p, 0.83).unwrap(),
            ] {
                let rhs = observed_value(p, att.scenario);
                assert!((att.mixture_value() - rhs).abs() < 1e-12);
            }
        }
    }
}
