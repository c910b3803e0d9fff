//! Round-level Monte Carlo simulation of the protocol.
//!
//! Each round, party 0 draws one of four angles `{-π/4, π/4, 0, π/2}` and
//! every other party one of `{0, π/2}`. Outcomes are sampled from the exact
//! joint distribution of the source, then each bit is flipped with
//! probability `1 - p`.
//!
//! - party 0 at `±π/4`: test round, feeds the Svetlichny estimate;
//! - all angles in `{0, π/2}` with an even number of `π/2`: key round;
//! - anything else is discarded during sifting.
//!
//! Randomness for round `r` comes from a ChaCha stream keyed by `(seed, r)`,
//! so results do not depend on how rounds are split across workers.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::noise::{degrade_success_prob, flip_mask, Accuracy};
use crate::qstate::{correlator, ghz_state, werner_state, Measurable, MeasurementSetting};
use crate::svetlichny::SettingVector;
use crate::QUANTUM_BOUND;

/// Largest party count the simulator precomputes outcome tables for.
pub const MAX_SIM_PARTIES: usize = 10;

/// Angles available to party 0, indexed by its choice.
pub const FIRST_PARTY_ANGLES: [f64; 4] = [-FRAC_PI_4, FRAC_PI_4, 0.0, FRAC_PI_2];
/// Angles available to every other party.
pub const OTHER_PARTY_ANGLES: [f64; 2] = [0.0, FRAC_PI_2];

const CHUNK_ROUNDS: u64 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Source {
    Ghz,
    Werner { v: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n: usize,
    pub rounds: u64,
    pub p: Accuracy,
    pub source: Source,
    pub seed: u64,
    /// Relative weights of party 0's four angles.
    pub first_party_weights: [f64; 4],
    /// Worker threads; `None` uses the global pool.
    #[serde(skip)]
    pub workers: Option<usize>,
    /// Keep the raw key bits of every key round.
    pub retain_raw_keys: bool,
}

impl SimConfig {
    pub fn new(n: usize, rounds: u64, p: Accuracy, source: Source, seed: u64) -> Self {
        Self {
            n,
            rounds,
            p,
            source,
            seed,
            first_party_weights: [1.0; 4],
            workers: None,
            retain_raw_keys: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(3..=MAX_SIM_PARTIES).contains(&self.n) {
            return Err(Error::Dimension(format!(
                "party count {} outside [3, {MAX_SIM_PARTIES}]",
                self.n
            )));
        }
        if self.rounds == 0 {
            return domain("at least one round is required");
        }
        if let Source::Werner { v } = self.source {
            if self.n != 3 {
                return domain("the Werner source is defined for three parties");
            }
            if !(0.0..=1.0).contains(&v) {
                return domain(format!("visibility {v} outside [0, 1]"));
            }
        }
        let w = &self.first_party_weights;
        if w.iter().any(|x| !x.is_finite() || *x < 0.0) || w.iter().sum::<f64>() <= 0.0 {
            return domain(format!("invalid setting weights {w:?}"));
        }
        if self.workers == Some(0) {
            return domain("worker count must be positive");
        }
        Ok(())
    }
}

/// One retained key round: full setting mask and post-noise outcome bits,
/// party 0 in the most significant position of both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyRound {
    pub round: u64,
    pub setting: u32,
    pub outcomes: u32,
}

/// Outcome counts accumulated over rounds. Merging is plain addition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimStats {
    pub n: usize,
    /// Per test setting vector: rounds meeting the parity condition.
    pub test_success: Vec<u64>,
    /// Per test setting vector: rounds failing it.
    pub test_failure: Vec<u64>,
    /// Per key setting (bit set = angle π/2): party 0 consistent with the rest.
    pub key_consistent: Vec<u64>,
    pub key_inconsistent: Vec<u64>,
    /// Histogram over (party-0 choice, other parties' bits).
    pub setting_counts: Vec<u64>,
    pub test_rounds: u64,
    pub key_rounds: u64,
    pub discarded_rounds: u64,
    pub raw_key: Option<Vec<KeyRound>>,
}

impl SimStats {
    fn empty(n: usize, retain: bool) -> Self {
        Self {
            n,
            test_success: vec![0; 1 << n],
            test_failure: vec![0; 1 << n],
            key_consistent: vec![0; 1 << n],
            key_inconsistent: vec![0; 1 << n],
            setting_counts: vec![0; 4 << (n - 1)],
            test_rounds: 0,
            key_rounds: 0,
            discarded_rounds: 0,
            raw_key: retain.then(Vec::new),
        }
    }

    fn merge(mut self, other: SimStats) -> Self {
        let add = |a: &mut Vec<u64>, b: &[u64]| a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        add(&mut self.test_success, &other.test_success);
        add(&mut self.test_failure, &other.test_failure);
        add(&mut self.key_consistent, &other.key_consistent);
        add(&mut self.key_inconsistent, &other.key_inconsistent);
        add(&mut self.setting_counts, &other.setting_counts);
        self.test_rounds += other.test_rounds;
        self.key_rounds += other.key_rounds;
        self.discarded_rounds += other.discarded_rounds;
        if let (Some(mine), Some(theirs)) = (self.raw_key.as_mut(), other.raw_key) {
            mine.extend(theirs);
        }
        self
    }

    pub fn total_rounds(&self) -> u64 {
        self.test_rounds + self.key_rounds + self.discarded_rounds
    }

    /// Whether `setting` (bit set = angle π/2) is a key setting.
    pub fn is_key_setting(&self, setting: u32) -> bool {
        setting.count_ones().is_multiple_of(2)
    }

    /// Raw key strings, one per party, in round order.
    pub fn raw_key_strings(&self) -> Option<Vec<String>> {
        let rounds = self.raw_key.as_ref()?;
        Some(
            (0..self.n)
                .map(|party| {
                    rounds
                        .iter()
                        .map(|k| if k.outcomes >> (self.n - 1 - party) & 1 == 1 { '1' } else { '0' })
                        .collect()
                })
                .collect(),
        )
    }
}

/// Cumulative outcome distributions for every setting combination.
struct SamplingTables {
    n: usize,
    cumulative: Vec<Vec<f64>>,
    /// Expected parity bit of the outcomes for each key setting.
    key_parity: Vec<u8>,
}

impl SamplingTables {
    fn build(cfg: &SimConfig) -> Result<Self> {
        let n = cfg.n;
        let ghz = ghz_state(n)?;
        let state: Box<dyn Measurable + Sync> = match cfg.source {
            Source::Ghz => Box::new(ghz.clone()),
            Source::Werner { v } => Box::new(werner_state(v)?),
        };
        let others = 1usize << (n - 1);
        let mut cumulative = Vec::with_capacity(4 * others);
        for first in 0..4 {
            for rest in 0..others {
                let settings = round_settings(n, first, rest as u32);
                let table = state.outcome_table(&settings)?;
                let mut acc = 0.0;
                cumulative.push(
                    table
                        .probs()
                        .iter()
                        .map(|p| {
                            acc += p;
                            acc
                        })
                        .collect(),
                );
            }
        }
        // eigenvalue of the σx/σy tensor on GHZ_n for each key setting
        let mut key_parity = vec![0u8; 1 << n];
        for setting in 0..1u32 << n {
            if setting.count_ones() % 2 == 1 {
                continue;
            }
            let angles: Vec<MeasurementSetting> = (0..n)
                .map(|i| MeasurementSetting::new(OTHER_PARTY_ANGLES[(setting >> (n - 1 - i) & 1) as usize]))
                .collect();
            let eigen = correlator(&ghz, &angles)?;
            key_parity[setting as usize] = u8::from(eigen < 0.0);
        }
        Ok(Self {
            n,
            cumulative,
            key_parity,
        })
    }

    fn sample<R: Rng + ?Sized>(&self, first: usize, rest: u32, rng: &mut R) -> u32 {
        let cdf = &self.cumulative[(first << (self.n - 1)) | rest as usize];
        let u: f64 = rng.random::<f64>() * cdf[cdf.len() - 1];
        cdf.partition_point(|&c| c <= u).min(cdf.len() - 1) as u32
    }
}

fn round_settings(n: usize, first: usize, rest: u32) -> Vec<MeasurementSetting> {
    std::iter::once(MeasurementSetting::new(FIRST_PARTY_ANGLES[first]))
        .chain((1..n).map(|i| {
            MeasurementSetting::new(OTHER_PARTY_ANGLES[(rest >> (n - 1 - i) & 1) as usize])
        }))
        .collect()
}

fn round_rng(seed: &[u8; 32], round: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(*seed);
    rng.set_stream(round);
    rng
}

fn seed_bytes(seed: u64) -> [u8; 32] {
    let mut bytes = [0u8; 32];
    ChaCha8Rng::seed_from_u64(seed).fill(&mut bytes);
    bytes
}

fn run_chunk(
    cfg: &SimConfig,
    tables: &SamplingTables,
    seed: &[u8; 32],
    start: u64,
    end: u64,
) -> SimStats {
    let n = cfg.n;
    let mut stats = SimStats::empty(n, cfg.retain_raw_keys);
    let total_weight: f64 = cfg.first_party_weights.iter().sum();
    for round in start..end {
        let mut rng = round_rng(seed, round);
        let mut u = rng.random::<f64>() * total_weight;
        let mut first = 3;
        for (i, w) in cfg.first_party_weights.iter().enumerate() {
            if u < *w {
                first = i;
                break;
            }
            u -= w;
        }
        let rest = (rng.random::<u32>()) & ((1 << (n - 1)) - 1);
        stats.setting_counts[(first << (n - 1)) | rest as usize] += 1;

        let ideal = tables.sample(first, rest, &mut rng);
        let outcomes = ideal ^ flip_mask_msb(n, cfg.p, &mut rng);
        let parity = (outcomes.count_ones() & 1) as u8;

        if first < 2 {
            let setting = ((first as u32) << (n - 1)) | rest;
            stats.test_rounds += 1;
            if parity == SettingVector(setting).target_parity() {
                stats.test_success[setting as usize] += 1;
            } else {
                stats.test_failure[setting as usize] += 1;
            }
            continue;
        }
        let setting = (((first - 2) as u32) << (n - 1)) | rest;
        if setting.count_ones() % 2 == 1 {
            stats.discarded_rounds += 1;
            continue;
        }
        stats.key_rounds += 1;
        if parity == tables.key_parity[setting as usize] {
            stats.key_consistent[setting as usize] += 1;
        } else {
            stats.key_inconsistent[setting as usize] += 1;
        }
        if let Some(raw) = stats.raw_key.as_mut() {
            raw.push(KeyRound {
                round,
                setting,
                outcomes,
            });
        }
    }
    stats
}

/// Flip mask in outcome-table bit order.
fn flip_mask_msb<R: Rng + ?Sized>(n: usize, p: Accuracy, rng: &mut R) -> u32 {
    // party i is drawn i-th but lives at bit n-1-i
    flip_mask(n, p, rng).reverse_bits() >> (32 - n)
}

/// Runs `cfg.rounds` protocol rounds and accumulates their statistics.
pub fn run_protocol(cfg: &SimConfig) -> Result<SimStats> {
    cfg.validate()?;
    let tables = SamplingTables::build(cfg)?;
    let seed = seed_bytes(cfg.seed);
    let chunks = cfg.rounds.div_ceil(CHUNK_ROUNDS);
    let run = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let start = c * CHUNK_ROUNDS;
                let end = (start + CHUNK_ROUNDS).min(cfg.rounds);
                run_chunk(cfg, &tables, &seed, start, end)
            })
            .collect::<Vec<_>>()
    };
    let parts = match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::NumericalFailure(format!("thread pool: {e}")))?
            .install(run),
        None => run(),
    };
    Ok(parts
        .into_iter()
        .fold(SimStats::empty(cfg.n, cfg.retain_raw_keys), SimStats::merge))
}

/// A frequency estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    fn frequency(success: u64, total: u64) -> Self {
        let f = success as f64 / total as f64;
        Self {
            value: f,
            std_error: (f * (1.0 - f) / total as f64).sqrt(),
        }
    }

    /// `(value - target) / std_error`; `None` when the error is zero and the
    /// estimate misses the target.
    pub fn z_score(&self, target: f64) -> Option<f64> {
        let diff = self.value - target;
        if self.std_error > 0.0 {
            Some(diff / self.std_error)
        } else if diff.abs() < 1e-12 {
            Some(0.0)
        } else {
            None
        }
    }
}

/// Uniform average of per-setting success frequencies over all `2^n` test
/// setting vectors.
pub fn estimate_si(stats: &SimStats) -> Result<Estimate> {
    let mut sum = 0.0;
    let mut var = 0.0;
    for (idx, (&s, &f)) in stats.test_success.iter().zip(&stats.test_failure).enumerate() {
        if s + f == 0 {
            return Err(Error::InsufficientData(format!(
                "test setting vector {:?} never observed",
                SettingVector(idx as u32).choices(stats.n)
            )));
        }
        let e = Estimate::frequency(s, s + f);
        sum += e.value;
        var += e.std_error * e.std_error;
    }
    let m = stats.test_success.len() as f64;
    Ok(Estimate {
        value: sum / m,
        std_error: var.sqrt() / m,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeySettingEstimate {
    /// Per-party choice, 0 for angle 0 and 1 for angle π/2.
    pub setting: Vec<u8>,
    pub rounds: u64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeyConsistency {
    pub pooled: Estimate,
    pub per_setting: Vec<KeySettingEstimate>,
}

/// Frequency with which party 0's key bit matches the value implied by the
/// other parties' bits and the GHZ eigenvalue of the setting.
pub fn estimate_key_consistency(stats: &SimStats) -> Result<KeyConsistency> {
    if stats.key_rounds == 0 {
        return Err(Error::InsufficientData("no key rounds".into()));
    }
    let consistent: u64 = stats.key_consistent.iter().sum();
    let per_setting = (0..1u32 << stats.n)
        .filter_map(|setting| {
            let c = stats.key_consistent[setting as usize];
            let total = c + stats.key_inconsistent[setting as usize];
            (total > 0).then(|| KeySettingEstimate {
                setting: SettingVector(setting).choices(stats.n),
                rounds: total,
                estimate: Estimate::frequency(c, total),
            })
        })
        .collect();
    Ok(KeyConsistency {
        pooled: Estimate::frequency(consistent, stats.key_rounds),
        per_setting,
    })
}

/// Closed-form targets the simulation should reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticPrediction {
    pub si_value: f64,
    pub key_consistency: f64,
}

pub fn analytic_prediction(cfg: &SimConfig) -> AnalyticPrediction {
    let (perfect_si, visibility) = match cfg.source {
        Source::Ghz => (QUANTUM_BOUND, 1.0),
        Source::Werner { v } => (v * QUANTUM_BOUND + (1.0 - v) * 0.5, v),
    };
    let contrast = cfg.p.parity_contrast(cfg.n);
    AnalyticPrediction {
        si_value: degrade_success_prob(perfect_si, cfg.p, cfg.n),
        key_consistency: visibility * (1.0 + contrast) / 2.0 + (1.0 - visibility) / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub si: Estimate,
    pub si_predicted: f64,
    pub si_z: Option<f64>,
    pub key_consistency: KeyConsistency,
    pub key_predicted: f64,
    pub key_z: Option<f64>,
    pub test_rounds: u64,
    pub key_rounds: u64,
    pub discarded_rounds: u64,
    pub raw_keys: Option<Vec<String>>,
}

/// Runs the protocol and compares the estimates with the closed forms.
pub fn simulate(cfg: &SimConfig) -> Result<SimReport> {
    let stats = run_protocol(cfg)?;
    SimReport::from_stats(cfg, &stats)
}

impl SimReport {
    pub fn from_stats(cfg: &SimConfig, stats: &SimStats) -> Result<Self> {
        let si = estimate_si(stats)?;
        let key = estimate_key_consistency(stats)?;
        let pred = analytic_prediction(cfg);
        Ok(Self {
            config: cfg.clone(),
            si,
            si_predicted: pred.si_value,
            si_z: si.z_score(pred.si_value),
            key_z: key.pooled.z_score(pred.key_consistency),
            key_consistency: key,
            key_predicted: pred.key_consistency,
            test_rounds: stats.test_rounds,
            key_rounds: stats.key_rounds,
            discarded_rounds: stats.discarded_rounds,
            raw_keys: stats.raw_key_strings(),
        })
    }
}
