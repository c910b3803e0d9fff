//! Conditional entropies and Devetak–Winter key rates, in bits.

use serde::{Deserialize, Serialize};

use crate::attack::{
    local_weight_nparty, local_weight_werner, AttackDecomposition, Scenario,
};
use crate::error::{domain, Result};
use crate::noise::Accuracy;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeyRateReport {
    pub h_a_given_e: f64,
    pub h_a_given_rest: f64,
    /// `h_a_given_e - h_a_given_rest`; may be negative.
    pub r_dw: f64,
    /// `max(0, r_dw)`, and 0 when the protocol aborts.
    pub r_effective: f64,
    /// No Svetlichny violation is observed (`q_L_raw > 1`); no key is extracted.
    pub aborted: bool,
    pub q_l_raw: f64,
    pub q_l: f64,
    pub scenario: Scenario,
    pub p: f64,
    pub n: usize,
    pub v: Option<f64>,
}

/// `-x log2 x - (1-x) log2 (1-x)` with `0 log 0 = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return domain(format!("binary entropy argument {x} outside [0, 1]"));
    }
    let term = |t: f64| if t > 0.0 { -t * t.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// `H(A|E) = h((1 + q_L)/2)` using the clamped weight.
pub fn h_a_given_e(att: &AttackDecomposition) -> f64 {
    // q_l is clamped, so the argument always lies in [1/2, 1]
    binary_entropy((1.0 + att.q_l) / 2.0).unwrap_or(0.0)
}

/// `H(A_1 | A_2 … A_n) = h((1 + (2p-1)^n)/2)`.
pub fn h_a_given_rest(p: Accuracy, n: usize) -> Result<f64> {
    if n < 3 {
        return domain(format!("party count {n} below 3"));
    }
    let p = p.require_at_least_half()?;
    binary_entropy((1.0 + p.parity_contrast(n)) / 2.0)
}

/// Three-party Werner source: `h(v (1 + (2p-1)³)/2 + (1 - v)/2)`.
pub fn h_a_given_rest_werner(p: Accuracy, v: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("visibility {v} outside [0, 1]"));
    }
    let p = p.require_at_least_half()?;
    binary_entropy(v * (1.0 + p.parity_contrast(3)) / 2.0 + (1.0 - v) / 2.0)
}

fn report(att: AttackDecomposition, h_rest: f64, p: Accuracy, v: Option<f64>) -> KeyRateReport {
    let h_e = h_a_given_e(&att);
    let r_dw = h_e - h_rest;
    let aborted = att.aborts();
    KeyRateReport {
        h_a_given_e: h_e,
        h_a_given_rest: h_rest,
        r_dw,
        r_effective: if aborted { 0.0 } else { r_dw.max(0.0) },
        aborted,
        q_l_raw: att.q_l_raw,
        q_l: att.q_l,
        scenario: att.scenario,
        p: p.value(),
        n: att.scenario.parties(),
        v,
    }
}

/// Devetak–Winter lower bound for `n` parties sharing a GHZ state.
pub fn dw_rate(p: Accuracy, n: usize) -> Result<KeyRateReport> {
    let att = local_weight_nparty(p, n)?;
    let h_rest = h_a_given_rest(p, n)?;
    Ok(report(att, h_rest, p, None))
}

/// Devetak–Winter lower bound for three parties sharing a Werner state.
pub fn dw_rate_werner(p: Accuracy, v: f64) -> Result<KeyRateReport> {
    let att = local_weight_werner(p, v)?;
    let h_rest = h_a_given_rest_werner(p, v)?;
    Ok(report(att, h_rest, p, Some(v)))
}
