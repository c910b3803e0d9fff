//! Dense n-qubit states and equatorial spin measurements.
//!
//! Outcome tables are indexed by a bit string in which party `i` (0-based)
//! occupies bit `n - 1 - i`, the same order as the computational-basis
//! amplitudes. Outcome bit 0 encodes eigenvalue +1 and bit 1 encodes -1.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Largest party count accepted by the dense constructors.
pub const DEFAULT_MAX_PARTIES: usize = 12;

const NORM_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Equatorial spin observable `cos(angle) σx + sin(angle) σy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSetting {
    angle: f64,
}

impl MeasurementSetting {
    /// Builds a setting, normalizing the azimuth into `(-π, π]`.
    pub fn new(angle: f64) -> Self {
        let mut a = angle.rem_euclid(TAU);
        if a > PI {
            a -= TAU;
        }
        Self { angle: a }
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Eigenvector for outcome bit `0` (+1) or `1` (-1): `(1, ±e^{iθ})/√2`.
    pub fn eigenvector(&self, outcome: u8) -> [Complex64; 2] {
        let phase = Complex64::from_polar(FRAC_1_SQRT_2, self.angle);
        let first = Complex64::new(FRAC_1_SQRT_2, 0.0);
        if outcome == 0 {
            [first, phase]
        } else {
            [first, -phase]
        }
    }

    /// Rows of the basis change taking computational amplitudes to
    /// eigenbasis amplitudes: row `b` is the conjugate of eigenvector `b`.
    fn rotation(&self) -> [[Complex64; 2]; 2] {
        let e0 = self.eigenvector(0);
        let e1 = self.eigenvector(1);
        [[e0[0].conj(), e0[1].conj()], [e1[0].conj(), e1[1].conj()]]
    }
}

impl From<f64> for MeasurementSetting {
    fn from(angle: f64) -> Self {
        Self::new(angle)
    }
}

/// Normalized pure state of `n` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_parties(n, DEFAULT_MAX_PARTIES)?;
        if amplitudes.len() != 1 << n {
            return Err(Error::Dimension(format!(
                "{} amplitudes supplied for {n} qubits",
                amplitudes.len()
            )));
        }
        let norm: f64 = amplitudes.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return domain(format!("state is not normalized (squared norm {norm})"));
        }
        Ok(Self { n, amplitudes })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Hermitian, unit-trace, positive semidefinite operator on `n` qubits.
/// Entries are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    entries: Vec<Complex64>,
}

impl DensityMatrix {
    /// Validates and wraps a row-major `2^n x 2^n` matrix.
    pub fn from_entries(n: usize, entries: Vec<Complex64>) -> Result<Self> {
        check_parties(n, DEFAULT_MAX_PARTIES)?;
        let dim = 1usize << n;
        if entries.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries supplied for a {dim}x{dim} matrix",
                entries.len()
            )));
        }
        let rho = Self { n, entries };
        for r in 0..dim {
            for c in r..dim {
                if (rho.entry(r, c) - rho.entry(c, r).conj()).norm() > NORM_TOL {
                    return domain(format!("matrix is not Hermitian at ({r}, {c})"));
                }
            }
        }
        let trace = rho.trace();
        if (trace - 1.0).abs() > NORM_TOL {
            return domain(format!("trace is {trace}, expected 1"));
        }
        let min_eig = rho.min_eigenvalue();
        if min_eig < -PSD_TOL {
            return domain(format!("matrix is not positive semidefinite (eigenvalue {min_eig})"));
        }
        Ok(rho)
    }

    /// The projector `|ψ⟩⟨ψ|`.
    pub fn from_pure(state: &StateVector) -> Self {
        let amps = state.amplitudes();
        let dim = amps.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(amps[r] * amps[c].conj());
            }
        }
        Self { n: state.n(), entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.entries[row * self.dim() + col]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.entry(i, i).re).sum()
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ²) = Σ |ρ_rc|² for Hermitian ρ
        self.entries.iter().map(|e| e.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let dim = self.dim();
        let m = DMatrix::from_row_slice(dim, dim, &self.entries);
        let mut eig: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }
}

/// Joint outcome distribution of `n` binary measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    n: usize,
    probs: Vec<f64>,
}

impl OutcomeTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Probabilities indexed by outcome bit string (party 0 most significant).
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability of an explicit outcome vector, one bit per party.
    pub fn prob(&self, outcomes: &[u8]) -> f64 {
        self.probs[outcome_index(outcomes)]
    }

    /// Probability that the outcome bits XOR to `parity`.
    pub fn parity_prob(&self, parity: u8) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| (idx.count_ones() & 1) as u8 == parity & 1)
            .map(|(_, p)| p)
            .sum()
    }

    /// Probability that `party` reports outcome bit 0.
    pub fn marginal_zero(&self, party: usize) -> f64 {
        let mask = 1usize << (self.n - 1 - party);
        self.probs
            .iter()
            .enumerate()
            .filter(|(idx, _)| idx & mask == 0)
            .map(|(_, p)| p)
            .sum()
    }

    /// Expectation of the product of the ±1 outcomes.
    pub fn product_expectation(&self) -> f64 {
        self.parity_prob(0) - self.parity_prob(1)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }
}

/// Index of an outcome vector in an [`OutcomeTable`].
pub fn outcome_index(outcomes: &[u8]) -> usize {
    outcomes
        .iter()
        .fold(0usize, |acc, &b| (acc << 1) | usize::from(b & 1))
}

/// Anything that can be measured party-by-party in equatorial bases.
pub trait Measurable {
    fn n(&self) -> usize;

    /// Joint outcome probabilities for one equatorial setting per party.
    fn outcome_table(&self, settings: &[MeasurementSetting]) -> Result<OutcomeTable>;
}

impl Measurable for StateVector {
    fn n(&self) -> usize {
        self.n
    }

    fn outcome_table(&self, settings: &[MeasurementSetting]) -> Result<OutcomeTable> {
        check_settings(self.n, settings)?;
        let mut amps = self.amplitudes.clone();
        for (party, setting) in settings.iter().enumerate() {
            let mask = 1usize << (self.n - 1 - party);
            let u = setting.rotation();
            for i in (0..amps.len()).filter(|i| i & mask == 0) {
                let (a0, a1) = (amps[i], amps[i | mask]);
                amps[i] = u[0][0] * a0 + u[0][1] * a1;
                amps[i | mask] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
        Ok(OutcomeTable {
            n: self.n,
            probs: amps.iter().map(|a| a.norm_sqr()).collect(),
        })
    }
}

impl Measurable for DensityMatrix {
    fn n(&self) -> usize {
        self.n
    }

    fn outcome_table(&self, settings: &[MeasurementSetting]) -> Result<OutcomeTable> {
        check_settings(self.n, settings)?;
        let dim = self.dim();
        let mut m = self.entries.clone();
        // ρ -> U ρ U†, one qubit at a time
        for (party, setting) in settings.iter().enumerate() {
            let mask = 1usize << (self.n - 1 - party);
            let u = setting.rotation();
            for col in 0..dim {
                for r in (0..dim).filter(|r| r & mask == 0) {
                    let (a0, a1) = (m[r * dim + col], m[(r | mask) * dim + col]);
                    m[r * dim + col] = u[0][0] * a0 + u[0][1] * a1;
                    m[(r | mask) * dim + col] = u[1][0] * a0 + u[1][1] * a1;
                }
            }
            for row in 0..dim {
                for c in (0..dim).filter(|c| c & mask == 0) {
                    let (a0, a1) = (m[row * dim + c], m[row * dim + (c | mask)]);
                    m[row * dim + c] = u[0][0].conj() * a0 + u[0][1].conj() * a1;
                    m[row * dim + (c | mask)] = u[1][0].conj() * a0 + u[1][1].conj() * a1;
                }
            }
        }
        Ok(OutcomeTable {
            n: self.n,
            probs: (0..dim).map(|i| m[i * dim + i].re.max(0.0)).collect(),
        })
    }
}

/// `(|0…0⟩ + |1…1⟩)/√2` on `n` qubits, `2 <= n <= DEFAULT_MAX_PARTIES`.
pub fn ghz_state(n: usize) -> Result<StateVector> {
    ghz_state_capped(n, DEFAULT_MAX_PARTIES)
}

/// [`ghz_state`] with an explicit party cap (never above the dense limit).
pub fn ghz_state_capped(n: usize, max_n: usize) -> Result<StateVector> {
    check_parties(n, max_n.min(DEFAULT_MAX_PARTIES))?;
    let dim = 1usize << n;
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    amplitudes[0] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    amplitudes[dim - 1] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Ok(StateVector { n, amplitudes })
}

/// Three-qubit Werner state `v |GHZ⟩⟨GHZ| + (1 - v) I/8`.
pub fn werner_state(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) {
        return domain(format!("visibility {v} outside [0, 1]"));
    }
    let ghz = DensityMatrix::from_pure(&ghz_state(3)?);
    let dim = ghz.dim();
    let mut entries: Vec<Complex64> = ghz.entries.iter().map(|e| e * v).collect();
    for i in 0..dim {
        entries[i * dim + i] += (1.0 - v) / dim as f64;
    }
    Ok(DensityMatrix { n: 3, entries })
}

/// Joint outcome probabilities of `state` under one setting per party.
pub fn joint_outcome_probs<S: Measurable + ?Sized>(
    state: &S,
    settings: &[MeasurementSetting],
) -> Result<OutcomeTable> {
    state.outcome_table(settings)
}

/// Expectation of the tensor product of the equatorial observables.
pub fn correlator<S: Measurable + ?Sized>(state: &S, settings: &[MeasurementSetting]) -> Result<f64> {
    Ok(state.outcome_table(settings)?.product_expectation())
}

fn check_parties(n: usize, max_n: usize) -> Result<()> {
    if !(2..=max_n).contains(&n) {
        return Err(Error::Dimension(format!(
            "party count {n} outside [2, {max_n}]"
        )));
    }
    Ok(())
}

fn check_settings(n: usize, settings: &[MeasurementSetting]) -> Result<()> {
    if settings.len() != n {
        return Err(Error::Dimension(format!(
            "{} settings supplied for {n} parties",
            settings.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn settings(angles: &[f64]) -> Vec<MeasurementSetting> {
        angles.iter().copied().map(MeasurementSetting::new).collect()
    }

    #[test]
    fn angle_normalization() {
        assert_eq!(MeasurementSetting::new(-PI).angle(), PI);
        assert!((MeasurementSetting::new(3.0 * PI / 2.0).angle() + FRAC_PI_2).abs() < 1e-15);
        assert_eq!(MeasurementSetting::new(0.25).angle(), 0.25);
    }

    #[test]
    fn ghz_rejects_bad_party_counts() {
        assert!(matches!(ghz_state(1), Err(Error::Dimension(_))));
        assert!(matches!(ghz_state(13), Err(Error::Dimension(_))));
        assert!(matches!(ghz_state_capped(6, 5), Err(Error::Dimension(_))));
    }

    #[test]
    fn ghz_two_qubits() {
        let s = ghz_state(2).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(s.amplitudes()[0], s.amplitudes()[3]);
    }

    #[test]
    fn ghz_stabilizer_eigenvalues() {
        let s = ghz_state(3).unwrap();
        let xxx = correlator(&s, &settings(&[0.0, 0.0, 0.0])).unwrap();
        let xyy = correlator(&s, &settings(&[0.0, FRAC_PI_2, FRAC_PI_2])).unwrap();
        let yxy = correlator(&s, &settings(&[FRAC_PI_2, 0.0, FRAC_PI_2])).unwrap();
        let yyx = correlator(&s, &settings(&[FRAC_PI_2, FRAC_PI_2, 0.0])).unwrap();
        assert!((xxx - 1.0).abs() < 1e-12);
        for v in [xyy, yxy, yyx] {
            assert!((v + 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn even_parity_at_x_settings() {
        let s = ghz_state(3).unwrap();
        let t = joint_outcome_probs(&s, &settings(&[0.0; 3])).unwrap();
        assert!((t.parity_prob(0) - 1.0).abs() < 1e-12);
        let t = joint_outcome_probs(&s, &settings(&[-FRAC_PI_4, 0.0, 0.0])).unwrap();
        assert!((t.parity_prob(0) - (1.0 + FRAC_1_SQRT_2) / 2.0).abs() < 1e-12);
    }

    #[test]
    fn mismatched_settings_rejected() {
        let s = ghz_state(3).unwrap();
        assert!(matches!(
            joint_outcome_probs(&s, &settings(&[0.0, 0.0])),
            Err(Error::Dimension(_))
        ));
        let w = werner_state(0.5).unwrap();
        assert!(matches!(
            correlator(&w, &settings(&[0.0; 4])),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn werner_limits() {
        let ghz = DensityMatrix::from_pure(&ghz_state(3).unwrap());
        let w1 = werner_state(1.0).unwrap();
        for (a, b) in w1.entries().iter().zip(ghz.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        let w0 = werner_state(0.0).unwrap();
        for e in w0.eigenvalues() {
            assert!((e - 0.125).abs() < 1e-12);
        }
        assert!(matches!(werner_state(1.2), Err(Error::Domain(_))));
        assert!(matches!(werner_state(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn werner_passes_validation() {
        for v in [0.0, 0.3, 0.77, 1.0] {
            let w = werner_state(v).unwrap();
            let checked = DensityMatrix::from_entries(3, w.entries().to_vec()).unwrap();
            assert!((checked.trace() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_validation_rejects_bad_matrices() {
        let mut e = vec![Complex64::new(0.0, 0.0); 16];
        e[0] = Complex64::new(1.5, 0.0);
        e[5] = Complex64::new(-0.5, 0.0);
        assert!(matches!(DensityMatrix::from_entries(2, e), Err(Error::Domain(_))));

        let mut e = vec![Complex64::new(0.0, 0.0); 16];
        e[0] = Complex64::new(0.5, 0.0);
        e[5] = Complex64::new(0.5, 0.0);
        e[1] = Complex64::new(0.0, 0.1);
        assert!(matches!(DensityMatrix::from_entries(2, e), Err(Error::Domain(_))));

        assert!(matches!(
            DensityMatrix::from_entries(2, vec![Complex64::new(0.25, 0.0); 8]),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn unnormalized_state_rejected() {
        let amps = vec![Complex64::new(1.0, 0.0); 4];
        assert!(matches!(StateVector::new(2, amps), Err(Error::Domain(_))));
    }
}
