//! Decay-rate estimation from ensemble means.

use crate::scalar::Real;

/// Signal-to-error ratio a sample must exceed to enter the fit.
pub const DEFAULT_MIN_SNR: f64 = 10.0;

/// Ordinary least squares of `ln|y|` on `t` over the samples with
/// `|y| > min_snr * stderr`, returning the decay rate `-slope`.
///
/// `None` when fewer than two samples qualify or all qualifying samples
/// share one time.
pub fn log_linear_decay_rate<T: Real>(times: &[T], values: &[T], stderr: &[T], min_snr: T) -> Option<T> {
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(values)
        .zip(stderr)
        .filter(|((_, y), s)| y.abs() > min_snr * **s && **y != T::zero())
        .map(|((t, y), _)| (*t, y.abs().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = T::from_count(pts.len());
    let (st, sy) = pts
        .iter()
        .fold((T::zero(), T::zero()), |(a, b), (t, y)| (a + *t, b + *y));
    let (mt, my) = (st / n, sy / n);
    let (sxy, sxx) = pts.iter().fold((T::zero(), T::zero()), |(a, b), (t, y)| {
        let dt = *t - mt;
        (a + dt * (*y - my), b + dt * dt)
    });
    if sxx == T::zero() {
        return None;
    }
    Some(-(sxy / sxx))
}
