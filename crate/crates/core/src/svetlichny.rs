//! Svetlichny expression in correlator and probability form.
//!
//! A setting vector assigns each party a binary choice `x_i`. The winning
//! condition of the probability form is `⊕ a_i = ⊕_{i<j} x_i x_j`, whose
//! right-hand side only depends on the number of ones `k` as `C(k, 2) mod 2`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::qstate::{Measurable, MeasurementSetting};
use crate::{LOCAL_BOUND, QUANTUM_BOUND};

/// Largest party count accepted by [`deterministic_bound`].
pub const ENUMERATION_CAP: usize = 10;

const ISOTROPY_TOL: f64 = 1e-12;

/// Setting vector packed as bits, party 0 in the most significant position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SettingVector(pub u32);

impl SettingVector {
    pub fn from_choices(choices: &[u8]) -> Self {
        Self(choices.iter().fold(0u32, |acc, &x| (acc << 1) | u32::from(x & 1)))
    }

    pub fn choices(&self, n: usize) -> Vec<u8> {
        (0..n).map(|i| self.choice(n, i)).collect()
    }

    pub fn choice(&self, n: usize, party: usize) -> u8 {
        ((self.0 >> (n - 1 - party)) & 1) as u8
    }

    /// `Σ_{i<j} x_i x_j mod 2`.
    pub fn target_parity(&self) -> u8 {
        pair_parity(self.0.count_ones())
    }

    /// All `2^n` setting vectors in index order.
    pub fn all(n: usize) -> impl Iterator<Item = SettingVector> {
        (0..1u32 << n).map(SettingVector)
    }
}

/// `C(k, 2) mod 2`.
pub(crate) fn pair_parity(k: u32) -> u8 {
    ((k * k.saturating_sub(1) / 2) & 1) as u8
}

/// Conditional success probabilities `P(⊕a = ⊕x_i x_j | x)` for every setting vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel {
    n: usize,
    success_prob: Vec<f64>,
    isotropic: bool,
}

impl CorrelationModel {
    /// Builds a model from explicit `(choices, probability)` entries. Every one of
    /// the `2^n` setting vectors must be present.
    pub fn new<I>(n: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u8>, f64)>,
    {
        if !(2..=16).contains(&n) {
            return Err(Error::Dimension(format!("party count {n} outside [2, 16]")));
        }
        let mut slots: Vec<Option<f64>> = vec![None; 1 << n];
        for (choices, prob) in entries {
            if choices.len() != n || choices.iter().any(|&x| x > 1) {
                return Err(Error::Dimension(format!(
                    "setting vector {choices:?} is not a {n}-bit choice vector"
                )));
            }
            slots[SettingVector::from_choices(&choices).0 as usize] = Some(prob);
        }
        let mut success_prob = Vec::with_capacity(slots.len());
        for (idx, slot) in slots.into_iter().enumerate() {
            match slot {
                Some(p) => success_prob.push(p),
                None => {
                    return Err(Error::IncompleteModel(
                        SettingVector(idx as u32).choices(n),
                    ))
                }
            }
        }
        Self::from_vec(n, success_prob)
    }

    /// Builds a model from probabilities in setting-vector index order.
    pub fn from_vec(n: usize, success_prob: Vec<f64>) -> Result<Self> {
        if success_prob.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} entries for {n} parties",
                success_prob.len()
            )));
        }
        if let Some(bad) = success_prob.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return domain(format!("success probability {bad} outside [0, 1]"));
        }
        let first = success_prob[0];
        let isotropic = success_prob.iter().all(|p| (p - first).abs() <= ISOTROPY_TOL);
        Ok(Self {
            n,
            success_prob,
            isotropic,
        })
    }

    /// Every setting vector succeeds with the same probability.
    pub fn isotropic(n: usize, prob: f64) -> Result<Self> {
        Self::from_vec(n, vec![prob; 1 << n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn success_prob(&self, setting: SettingVector) -> f64 {
        self.success_prob[setting.0 as usize]
    }

    pub fn entries(&self) -> &[f64] {
        &self.success_prob
    }

    pub fn is_isotropic(&self) -> bool {
        self.isotropic
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiForm {
    Correlator,
    Probability,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvetlichnyValue {
    pub value: f64,
    pub form: SiForm,
    pub classical_bound: f64,
    pub quantum_bound: f64,
}

impl SvetlichnyValue {
    pub fn probability(value: f64) -> Self {
        Self {
            value,
            form: SiForm::Probability,
            classical_bound: LOCAL_BOUND,
            quantum_bound: QUANTUM_BOUND,
        }
    }

    /// Three-party correlator form, bounds 4 and 4√2.
    pub fn correlator(value: f64) -> Self {
        Self {
            value,
            form: SiForm::Correlator,
            classical_bound: 4.0,
            quantum_bound: 4.0 * std::f64::consts::SQRT_2,
        }
    }

    pub fn violates(&self) -> bool {
        match self.form {
            SiForm::Probability => self.value > self.classical_bound,
            SiForm::Correlator => self.value.abs() > self.classical_bound,
        }
    }

    /// Affine map between the three-party forms, `P = 1/2 + |S|/16`. A negative
    /// `S` violates the relabelled inequality, hence the absolute value.
    pub fn to_probability_form(&self) -> Self {
        match self.form {
            SiForm::Probability => *self,
            SiForm::Correlator => Self::probability(0.5 + self.value.abs() / 16.0),
        }
    }
}

/// Probability-form value `2^{-n} Σ_x P(success | x)`.
pub fn si_probability_value(model: &CorrelationModel) -> SvetlichnyValue {
    let sum: f64 = model.success_prob.iter().sum();
    SvetlichnyValue::probability(sum / model.success_prob.len() as f64)
}

/// Three-party correlator-form expression
/// `E000 + E001 + E010 + E100 - E011 - E101 - E110 - E111`.
pub fn si_correlator_value(correlators: &BTreeMap<[u8; 3], f64>) -> Result<SvetlichnyValue> {
    let mut total = 0.0;
    for setting in SettingVector::all(3) {
        let key = [setting.choice(3, 0), setting.choice(3, 1), setting.choice(3, 2)];
        let e = correlators
            .get(&key)
            .ok_or_else(|| Error::IncompleteModel(key.to_vec()))?;
        total += parity_sign(setting.target_parity()) * e;
    }
    Ok(SvetlichnyValue::correlator(total))
}

fn parity_sign(bit: u8) -> f64 {
    if bit == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Two measurement angles per party: entry `x` is the observable for choice `x`.
pub type SettingPair = [MeasurementSetting; 2];

/// The protocol reaching the quantum bound on GHZ states: party 0 uses
/// `{-π/4, π/4}`, every other party `{0, π/2}`.
pub fn protocol_settings(n: usize) -> Vec<SettingPair> {
    (0..n)
        .map(|party| {
            let offset = if party == 0 { -FRAC_PI_4 } else { 0.0 };
            [
                MeasurementSetting::new(offset),
                MeasurementSetting::new(offset + FRAC_PI_2),
            ]
        })
        .collect()
}

fn settings_for(setting: SettingVector, pairs: &[SettingPair]) -> Vec<MeasurementSetting> {
    let n = pairs.len();
    (0..n)
        .map(|party| pairs[party][setting.choice(n, party) as usize])
        .collect()
}

/// Success probabilities of `state` measured with the given per-party pairs.
pub fn probability_form_from_settings<S: Measurable + ?Sized>(
    state: &S,
    pairs: &[SettingPair],
) -> Result<CorrelationModel> {
    let n = state.n();
    if pairs.len() != n {
        return Err(Error::Dimension(format!(
            "{} setting pairs supplied for {n} parties",
            pairs.len()
        )));
    }
    let probs = SettingVector::all(n)
        .map(|setting| {
            let table = state.outcome_table(&settings_for(setting, pairs))?;
            Ok(table.parity_prob(setting.target_parity()))
        })
        .collect::<Result<Vec<_>>>()?;
    CorrelationModel::from_vec(n, probs)
}

/// The eight three-party correlators `⟨A_x B_y C_z⟩` for the given pairs.
pub fn correlators_from_settings<S: Measurable + ?Sized>(
    state: &S,
    pairs: &[SettingPair],
) -> Result<BTreeMap<[u8; 3], f64>> {
    if state.n() != 3 || pairs.len() != 3 {
        return Err(Error::Dimension(
            "correlator form is defined for three parties".into(),
        ));
    }
    SettingVector::all(3)
        .map(|setting| {
            let key = [setting.choice(3, 0), setting.choice(3, 1), setting.choice(3, 2)];
            let e = state
                .outcome_table(&settings_for(setting, pairs))?
                .product_expectation();
            Ok((key, e))
        })
        .collect()
}

/// Maximum of the correlator-form Svetlichny expression
/// `Σ_x (-1)^{C(|x|,2)} Π_i A_i(x_i)` over all deterministic ±1 assignments
/// of the `2n` observables, by exhaustive enumeration.
pub fn deterministic_bound(n: usize) -> Result<f64> {
    if n > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            parties: n,
            cap: ENUMERATION_CAP,
        });
    }
    if n < 2 {
        return Err(Error::Dimension(format!("party count {n} below 2")));
    }
    let best = (0u64..1 << (2 * n))
        .into_par_iter()
        .map(|assignment| deterministic_value(n, assignment))
        .max()
        .unwrap_or(0);
    Ok(best as f64)
}

/// Value of the expression for one assignment; bit `2i` holds `A_i(0)`, bit
/// `2i + 1` holds `A_i(1)` (set bit means -1).
///
/// The sign only depends on `|x| mod 4`, so the sum is contracted party by
/// party over the four residues.
fn deterministic_value(n: usize, assignment: u64) -> i64 {
    let mut by_residue = [1i64, 0, 0, 0];
    for party in 0..n {
        let a0 = if assignment >> (2 * party) & 1 == 1 { -1 } else { 1 };
        let a1 = if assignment >> (2 * party + 1) & 1 == 1 { -1 } else { 1 };
        let mut next = [0i64; 4];
        for r in 0..4 {
            next[r] = a0 * by_residue[r] + a1 * by_residue[(r + 3) % 4];
        }
        by_residue = next;
    }
    by_residue[0] + by_residue[1] - by_residue[2] - by_residue[3]
}
