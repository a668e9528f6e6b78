//! Noise tolerance from a target error probability per gate.
//!
//! Using the worst-case fidelity over one Hadamard duration,
//! `delta = (1 - exp(-tau_op/tau_dec)) / 2`, a target `delta` bounds
//! `tau_op / tau_dec`, then `eps`, then the voltage-noise strength `lambda`
//! and finally the rms pulse-area fluctuation `sqrt(lambda / tau_op)`.
//! Nothing is linearised; `2 delta` is carried alongside for comparison.

use crate::device::DeviceParameters;
use crate::error::{Error, Result};

/// Lower end of the commonly quoted tolerable error range.
pub const DELTA_RANGE_LOW: f64 = 1e-6;
/// Upper end of the commonly quoted tolerable error range.
pub const DELTA_RANGE_HIGH: f64 = 1e-4;
/// Headline target.
pub const DELTA_HEADLINE: f64 = 1e-5;

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_nan() || delta <= 0.0 {
        return Err(Error::NonPositiveTarget(delta));
    }
    if delta >= 0.5 {
        return Err(Error::UnreachableTarget(delta));
    }
    Ok(())
}

/// Largest `tau_op / tau_dec` compatible with error probability `delta`:
/// `-ln(1 - 2 delta)`.
pub fn ratio_bound_from_delta(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok(-(-2.0 * delta).ln_1p())
}

/// `Delta Gamma_rms / Gamma_mean = sqrt(lambda / tau)`.
pub fn pulse_area_ratio(lambda: f64, tau: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::param("lambda", format!("must be >= 0, got {lambda}")));
    }
    if !(tau > 0.0) {
        return Err(Error::param("tau", format!("pulse duration must be > 0, got {tau}")));
    }
    Ok((lambda / tau).sqrt())
}

/// Mean and rms fluctuation of the pulse area `Gamma(tau) = V0 tau + Delta Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseAreaStats {
    /// `V0 tau`, V s.
    pub mean: f64,
    /// `V0 sqrt(lambda tau)`, V s.
    pub rms: f64,
}

impl PulseAreaStats {
    pub fn variance(&self) -> f64 {
        self.rms * self.rms
    }
}

pub fn pulse_area_statistics(v0: f64, lambda: f64, tau: f64) -> Result<PulseAreaStats> {
    if !(tau > 0.0) {
        return Err(Error::param("tau", format!("pulse duration must be > 0, got {tau}")));
    }
    if !(lambda >= 0.0) {
        return Err(Error::param("lambda", format!("must be >= 0, got {lambda}")));
    }
    Ok(PulseAreaStats {
        mean: v0 * tau,
        rms: v0 * (lambda * tau).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceBudget {
    pub delta: f64,
    /// Maximum `tau_op / tau_dec`.
    pub ratio_bound: f64,
    /// `2 delta`, the small-delta form of `ratio_bound`.
    pub ratio_bound_linear: f64,
    /// Hadamard duration, s.
    pub tau_op: f64,
    /// Shortest admissible dephasing time, s.
    pub tau_dec_min: f64,
    /// (J/T)^2 s.
    pub epsilon_max: f64,
    /// s.
    pub lambda_max: f64,
    pub pulse_area_ratio_max: f64,
}

/// Full tolerance chain for a device at target `delta`.
pub fn compute_budget(params: &DeviceParameters, delta: f64) -> Result<ToleranceBudget> {
    let ratio = ratio_bound_from_delta(delta)?;
    let tau_op = params.tau_op()?;
    if params.v0() == 0.0 {
        return Err(Error::param("v0", "zero bias: voltage noise does not reach the qubit"));
    }
    let hbar = params.constants().hbar;
    // eps_max = ratio hbar^2 / (2 B_z^2 tau_op)
    let h_over_b = hbar / params.b_z();
    let epsilon_max = ratio * h_over_b * h_over_b / (2.0 * tau_op);
    let lambda_max = params.lambda_from_epsilon(epsilon_max)?;
    Ok(ToleranceBudget {
        delta,
        ratio_bound: ratio,
        ratio_bound_linear: 2.0 * delta,
        tau_op,
        tau_dec_min: tau_op / ratio,
        epsilon_max,
        lambda_max,
        pulse_area_ratio_max: pulse_area_ratio(lambda_max, tau_op)?,
    })
}

/// Budgets at each target in `deltas`.
pub fn sweep_delta(params: &DeviceParameters, deltas: &[f64]) -> Result<Vec<ToleranceBudget>> {
    deltas.iter().map(|&d| compute_budget(params, d)).collect()
}

/// Budgets at each A-gate bias in `biases` (V).
pub fn sweep_bias(params: &DeviceParameters, delta: f64, biases: &[f64]) -> Result<Vec<(f64, ToleranceBudget)>> {
    biases
        .iter()
        .map(|&v| Ok((v, compute_budget(&params.with_bias(v)?, delta)?)))
        .collect()
}

/// `n` log-spaced targets from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) {
        return Err(Error::param("delta range", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    if n == 0 {
        return Err(Error::param("points", "need at least one point"));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}
