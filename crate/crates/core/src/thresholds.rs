//! Critical accuracy for Svetlichny violation, threshold accuracy for a
//! positive key rate, and the zero-rate boundary of the Werner plane.

use std::f64::consts::SQRT_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::keyrate::{dw_rate, dw_rate_werner};
use crate::noise::{degraded_si_value, Accuracy};
use crate::LOCAL_BOUND;

/// `√2 / (2√2 - 1)`: value of `(2p-1)^n` (or `v (2p-1)^3`) at which the two
/// entropies of the key rate coincide.
pub const ZERO_RATE_CONTRAST: f64 = SQRT_2 / (2.0 * SQRT_2 - 1.0);

/// Offset keeping the bracket off the interval ends.
const BRACKET_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionConfig {
    pub tolerance: f64,
    pub max_iter: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iter: 200,
        }
    }
}

/// Final bracket of a bisection. `f(lo)` and `f(hi)` have opposite signs
/// (or one of them is zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub lo: f64,
    pub hi: f64,
    pub iterations: usize,
}

impl Root {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Bisection on `[lo, hi]` until the bracket is narrower than the tolerance.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, cfg: &BisectionConfig) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Root { lo, hi: lo, iterations: 0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { lo: hi, hi, iterations: 0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NumericalFailure(format!(
            "no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"
        )));
    }
    let lo_negative = f_lo < 0.0;
    for iterations in 1..=cfg.max_iter {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(Root { lo: mid, hi: mid, iterations });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < cfg.tolerance {
            return Ok(Root { lo, hi, iterations });
        }
    }
    Err(Error::NumericalFailure(format!(
        "bisection did not reach {} within {} iterations",
        cfg.tolerance, cfg.max_iter
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    Bisection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n: usize,
    pub p_cr: f64,
    pub p_th: f64,
    pub p_cr_method: Method,
    pub p_th_method: Method,
    /// Width of the final bisection bracket for `p_th`.
    pub tolerance: f64,
    pub iterations: usize,
}

fn check_parties(n: usize) -> Result<()> {
    if n < 3 {
        return domain(format!("party count {n} below 3"));
    }
    Ok(())
}

/// `p_cr = (1 + 2^{-1/(2n)})/2`, where the degraded value meets 3/4.
pub fn critical_accuracy(n: usize) -> Result<f64> {
    check_parties(n)?;
    Ok((1.0 + 2f64.powf(-1.0 / (2.0 * n as f64))) / 2.0)
}

/// `p_cr` located by bisection on `degraded_si_value(p, n) - 3/4`.
pub fn critical_accuracy_bisect(n: usize, cfg: &BisectionConfig) -> Result<Root> {
    check_parties(n)?;
    bisect(
        |p| Ok(degraded_si_value(Accuracy::new(p)?, n) - LOCAL_BOUND),
        0.5 + BRACKET_EPS,
        1.0,
        cfg,
    )
}

/// Smallest accuracy with a non-negative key rate, by bisection of `r_DW`
/// on `[p_cr + ε, 1 - ε]`. Returns the upper end of the final bracket, where
/// the rate is non-negative.
pub fn threshold_accuracy_bisect(n: usize, cfg: &BisectionConfig) -> Result<Root> {
    let p_cr = critical_accuracy(n)?;
    bisect(
        |p| Ok(dw_rate(Accuracy::new(p)?, n)?.r_dw),
        p_cr + BRACKET_EPS,
        1.0 - BRACKET_EPS,
        cfg,
    )
}

pub fn threshold_accuracy(n: usize) -> Result<f64> {
    Ok(threshold_accuracy_bisect(n, &BisectionConfig::default())?.hi)
}

/// Algebraic reduction: the rate vanishes where `q_L = (2p-1)^n`, i.e.
/// `(2p-1)^n = √2/(2√2-1)`.
pub fn threshold_accuracy_closed_form(n: usize) -> Result<f64> {
    check_parties(n)?;
    Ok((1.0 + ZERO_RATE_CONTRAST.powf(1.0 / n as f64)) / 2.0)
}

pub fn threshold_report(n: usize, cfg: &BisectionConfig) -> Result<ThresholdReport> {
    let p_cr = critical_accuracy(n)?;
    let root = threshold_accuracy_bisect(n, cfg)?;
    Ok(ThresholdReport {
        n,
        p_cr,
        p_th: root.hi,
        p_cr_method: Method::ClosedForm,
        p_th_method: Method::Bisection,
        tolerance: root.width(),
        iterations: root.iterations,
    })
}

/// One report per party count in `n_min..=n_max`, in order.
pub fn thresholds_table(n_min: usize, n_max: usize) -> Result<Vec<ThresholdReport>> {
    thresholds_table_with(n_min, n_max, &BisectionConfig::default())
}

pub fn thresholds_table_with(
    n_min: usize,
    n_max: usize,
    cfg: &BisectionConfig,
) -> Result<Vec<ThresholdReport>> {
    check_parties(n_min)?;
    if n_max < n_min {
        return domain(format!("empty party range {n_min}..={n_max}"));
    }
    (n_min..=n_max)
        .into_par_iter()
        .map(|n| threshold_report(n, cfg))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WernerBoundaryPoint {
    pub p: f64,
    /// Smallest visibility with a non-negative rate; `None` when even `v = 1`
    /// gives a negative rate.
    pub v_threshold: Option<f64>,
}

/// Zero-rate visibility for each accuracy in `p_grid`.
pub fn werner_boundary(p_grid: &[f64]) -> Result<Vec<WernerBoundaryPoint>> {
    werner_boundary_with(p_grid, &BisectionConfig::default())
}

pub fn werner_boundary_with(
    p_grid: &[f64],
    cfg: &BisectionConfig,
) -> Result<Vec<WernerBoundaryPoint>> {
    p_grid
        .iter()
        .map(|&p| {
            if !(p > 0.5 && p <= 1.0) {
                return domain(format!("accuracy {p} outside (1/2, 1]"));
            }
            let acc = Accuracy::new(p)?;
            let rate = |v: f64| Ok(dw_rate_werner(acc, v)?.r_dw);
            if rate(1.0)? < 0.0 {
                return Ok(WernerBoundaryPoint { p, v_threshold: None });
            }
            let root = bisect(rate, 0.0, 1.0, cfg)?;
            Ok(WernerBoundaryPoint {
                p,
                v_threshold: Some(root.hi),
            })
        })
        .collect()
}
