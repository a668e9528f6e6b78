//! Monte Carlo noise histories and their ensemble statistics.
//!
//! Each trajectory is advanced by exact SU(2) unitaries. A register step is
//! `exp(-i sqrt(kappa) dW sigma_z)`; a driven step splits the drive around the
//! noise kick,
//!
//! ```text
//! U = exp(-i theta_y sigma_y / 2) exp(-i theta_z sigma_z) exp(-i theta_y sigma_y / 2),
//!     theta_z = sqrt(kappa) dW,   theta_y = -Omega dt / 2,
//! ```
//!
//! so every trajectory stays pure and `P_z` is conserved exactly when
//! undriven. The noise amplitude follows from the Larmor noise
//! `B_z xi dt / hbar = sqrt(kappa) dW`. Since `E[exp(i a dW)] = exp(-a^2 dt / 2)`,
//! the coherence multiplier `E[exp(2 i sqrt(kappa) dW)] = exp(-2 kappa dt)`
//! reproduces the averaged dephasing for any `dt`. The symmetric split makes
//! the averaged driven step agree with the master equation to `O(dt^3)`
//! locally; sampling both generators as one constant exponent instead leaves
//! an `O(kappa Omega dt^2)` error per step, which dominates the tiny early-time
//! spread of the ensemble.
//!
//! Trajectory `j` draws from its own ChaCha8 stream `(seed, j)`, and the
//! reduction runs over fixed blocks in index order, so results do not depend
//! on the rayon thread count.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bloch::PolarizationVector;
use crate::error::{Error, Result};
use crate::rotation::{rotate_about_y_sc, rotate_about_z};
use crate::scalar::Real;

/// Upper bound on `kappa dt` and `Omega dt` accepted by [`SimPlan::validate`].
pub const MAX_RATE_STEP: f64 = 0.1;
/// Default cap on `n_traj * n_steps`.
pub const DEFAULT_MAX_WORK: u128 = 4_000_000_000;
/// Trajectories reduced serially per parallel task.
const BLOCK: u64 = 128;

/// Deterministic Wiener increments for one trajectory.
#[derive(Debug, Clone)]
pub struct WienerStream<T> {
    seed: u64,
    stream_index: u64,
    sqrt_dt: T,
    rng: ChaCha8Rng,
}

impl<T: Real> WienerStream<T> {
    pub fn new(seed: u64, stream_index: u64, dt: T) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            sqrt_dt: dt.sqrt(),
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Next increment, `N(0, dt)`.
    #[inline]
    pub fn increment(&mut self) -> T {
        T::standard_normal(&mut self.rng) * self.sqrt_dt
    }
}

impl<T: Real> Iterator for WienerStream<T> {
    type Item = T;
    fn next(&mut self) -> Option<T> {
        Some(self.increment())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Idle register qubit: noise only. `omega_rabi` is ignored.
    Register,
    /// Resonantly driven y-rotation.
    Rotation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPlan<T> {
    /// `kappa = B_z^2 eps / hbar^2` (1/s).
    pub kappa: T,
    /// `Omega = 2 B_ac g_n mu_n / hbar` (rad/s).
    pub omega_rabi: T,
    pub dt: T,
    pub n_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    pub p0: PolarizationVector<T>,
}

impl<T: Real> SimPlan<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPlan(msg));
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if self.n_steps < 1 {
            return bad("n_steps must be >= 1".into());
        }
        if self.n_traj < 1 {
            return bad("n_traj must be >= 1".into());
        }
        if !(self.kappa.is_finite() && self.kappa >= T::zero()) {
            return bad(format!("kappa must be >= 0, got {}", self.kappa));
        }
        if !(self.omega_rabi.is_finite() && self.omega_rabi >= T::zero()) {
            return bad(format!("omega_rabi must be >= 0, got {}", self.omega_rabi));
        }
        let limit = T::lit(MAX_RATE_STEP);
        if self.kappa * self.dt > limit {
            return bad(format!(
                "kappa*dt = {:e} exceeds {MAX_RATE_STEP}",
                self.kappa * self.dt
            ));
        }
        if self.omega_rabi * self.dt > limit {
            return bad(format!(
                "omega*dt = {:e} exceeds {MAX_RATE_STEP}",
                self.omega_rabi * self.dt
            ));
        }
        if !self.p0.is_physical() {
            return Err(Error::UnphysicalPolarization {
                norm: self.p0.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    pub fn t_final(&self) -> T {
        self.dt * T::from_count(self.n_steps)
    }

    pub fn stepper(&self, mode: Mode) -> Stepper<T> {
        let theta_y = match mode {
            Mode::Register => T::zero(),
            Mode::Rotation => -self.omega_rabi * self.dt * T::lit(0.5),
        };
        // each half of the drive turns P by theta_y about y
        let (half_sin, half_cos) = theta_y.sin_cos();
        Stepper {
            sqrt_kappa: self.kappa.sqrt(),
            driven: theta_y != T::zero(),
            half_sin,
            half_cos,
        }
    }
}

/// Per-step coefficients precomputed from a plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepper<T> {
    sqrt_kappa: T,
    driven: bool,
    half_sin: T,
    half_cos: T,
}

impl<T: Real> Stepper<T> {
    #[inline]
    pub fn register(&self, p: PolarizationVector<T>, dw: T) -> PolarizationVector<T> {
        let theta_z = self.sqrt_kappa * dw;
        rotate_about_z(p, theta_z + theta_z)
    }

    #[inline]
    pub fn rotation(&self, p: PolarizationVector<T>, dw: T) -> PolarizationVector<T> {
        if !self.driven {
            return self.register(p, dw);
        }
        let p = rotate_about_y_sc(p, self.half_sin, self.half_cos);
        let p = self.register(p, dw);
        rotate_about_y_sc(p, self.half_sin, self.half_cos)
    }

    #[inline]
    pub fn step(&self, mode: Mode, p: PolarizationVector<T>, dw: T) -> PolarizationVector<T> {
        match mode {
            Mode::Register => self.register(p, dw),
            Mode::Rotation => self.rotation(p, dw),
        }
    }
}

/// One register step: `exp(-i sqrt(kappa) dW sigma_z)`.
pub fn step_register<T: Real>(p: PolarizationVector<T>, dw: T, plan: &SimPlan<T>) -> PolarizationVector<T> {
    plan.stepper(Mode::Register).register(p, dw)
}

/// One driven step: half the drive, the noise kick, the other half.
pub fn step_rotation<T: Real>(p: PolarizationVector<T>, dw: T, plan: &SimPlan<T>) -> PolarizationVector<T> {
    plan.stepper(Mode::Rotation).rotation(p, dw)
}

/// Full path of trajectory `index`, `n_steps + 1` samples.
pub fn simulate_trajectory<T: Real>(
    plan: &SimPlan<T>,
    mode: Mode,
    index: u64,
) -> Result<Vec<PolarizationVector<T>>> {
    plan.validate()?;
    let stepper = plan.stepper(mode);
    let mut noise = WienerStream::new(plan.seed, index, plan.dt);
    let mut p = plan.p0;
    let mut path = Vec::with_capacity(plan.n_steps + 1);
    path.push(p);
    for _ in 0..plan.n_steps {
        p = stepper.step(mode, p, noise.increment());
        path.push(p);
    }
    Ok(path)
}

/// Running mean and centred second moment per time sample and component.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleAccumulator<T> {
    count: usize,
    mean: Vec<[T; 3]>,
    m2: Vec<[T; 3]>,
}

impl<T: Real> EnsembleAccumulator<T> {
    pub fn new(n_samples: usize) -> Self {
        Self {
            count: 0,
            mean: vec![[T::zero(); 3]; n_samples],
            m2: vec![[T::zero(); 3]; n_samples],
        }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Adds one trajectory, supplied sample by sample.
    fn push_trajectory(&mut self, mut samples: impl Iterator<Item = PolarizationVector<T>>) {
        self.count += 1;
        let inv = T::from_count(self.count).recip();
        for (mean, m2) in self.mean.iter_mut().zip(self.m2.iter_mut()) {
            let p = samples.next().expect("trajectory shorter than accumulator").to_array();
            for c in 0..3 {
                let delta = p[c] - mean[c];
                mean[c] = mean[c] + delta * inv;
                m2[c] = m2[c] + delta * (p[c] - mean[c]);
            }
        }
    }

    /// Pairwise combination of two disjoint sets of trajectories.
    pub fn merge(mut self, other: &Self) -> Self {
        assert_eq!(self.mean.len(), other.mean.len(), "sample count mismatch");
        if other.count == 0 {
            return self;
        }
        if self.count == 0 {
            return other.clone();
        }
        let na = T::from_count(self.count);
        let nb = T::from_count(other.count);
        let n = na + nb;
        for k in 0..self.mean.len() {
            for c in 0..3 {
                let delta = other.mean[k][c] - self.mean[k][c];
                self.mean[k][c] = self.mean[k][c] + delta * (nb / n);
                self.m2[k][c] = self.m2[k][c] + other.m2[k][c] + delta * delta * (na * nb / n);
            }
        }
        self.count += other.count;
        self
    }

    pub fn finish(self, dt: T) -> TrajectoryEnsemble<T> {
        let n = self.count;
        let times = (0..self.mean.len()).map(|k| T::from_count(k) * dt).collect();
        let mean_p = self.mean.iter().map(|m| PolarizationVector::from_array(*m)).collect();
        let stderr_p = self
            .m2
            .iter()
            .map(|m2| {
                if n < 2 {
                    return PolarizationVector::zero();
                }
                let var_of_mean = T::from_count(n - 1) * T::from_count(n);
                PolarizationVector::from_array(m2.map(|v| (v.max(T::zero()) / var_of_mean).sqrt()))
            })
            .collect();
        TrajectoryEnsemble {
            times,
            mean_p,
            stderr_p,
            n_traj: n,
        }
    }
}

/// Accumulates trajectories `range` of a plan.
///
/// Blocks of fixed size are reduced in parallel and merged in index order;
/// the result is bitwise reproducible for a given `(plan, mode, range)`.
pub fn run_trajectories<T: Real>(
    plan: &SimPlan<T>,
    mode: Mode,
    range: Range<u64>,
) -> Result<EnsembleAccumulator<T>> {
    plan.validate()?;
    let stepper = plan.stepper(mode);
    let n_samples = plan.n_steps + 1;
    let starts: Vec<u64> = (range.start..range.end).step_by(BLOCK as usize).collect();
    let blocks: Vec<EnsembleAccumulator<T>> = starts
        .par_iter()
        .map(|&start| {
            let end = (start + BLOCK).min(range.end);
            let mut acc = EnsembleAccumulator::new(n_samples);
            for index in start..end {
                let mut noise = WienerStream::new(plan.seed, index, plan.dt);
                let mut p = plan.p0;
                let path = std::iter::once(p).chain((0..plan.n_steps).map(|_| {
                    p = stepper.step(mode, p, noise.increment());
                    p
                }));
                acc.push_trajectory(path);
            }
            acc
        })
        .collect();
    Ok(blocks
        .iter()
        .fold(EnsembleAccumulator::new(n_samples), |acc, b| acc.merge(b)))
}

/// Ensemble mean and standard error of `plan.n_traj` trajectories.
pub fn run_ensemble<T: Real>(plan: &SimPlan<T>, mode: Mode) -> Result<TrajectoryEnsemble<T>> {
    run_ensemble_with_cap(plan, mode, DEFAULT_MAX_WORK)
}

pub fn run_ensemble_with_cap<T: Real>(
    plan: &SimPlan<T>,
    mode: Mode,
    max_work: u128,
) -> Result<TrajectoryEnsemble<T>> {
    plan.validate()?;
    let work = plan.n_traj as u128 * plan.n_steps as u128;
    if work > max_work {
        return Err(Error::PlanTooLarge { work, cap: max_work });
    }
    let acc = run_trajectories(plan, mode, 0..plan.n_traj as u64)?;
    Ok(acc.finish(plan.dt))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryEnsemble<T> {
    /// `n_steps + 1` sample times, `times[k] = k dt`.
    pub times: Vec<T>,
    pub mean_p: Vec<PolarizationVector<T>>,
    /// Per-component sample standard deviation over `sqrt(n_traj)`.
    pub stderr_p: Vec<PolarizationVector<T>>,
    pub n_traj: usize,
}

impl<T: Real> TrajectoryEnsemble<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|mean - reference(t)|` over samples and components.
    pub fn max_abs_error<F: Fn(T) -> PolarizationVector<T>>(&self, reference: F) -> T {
        self.times
            .iter()
            .zip(&self.mean_p)
            .map(|(&t, m)| m.max_abs_diff(&reference(t)))
            .fold(T::zero(), T::max)
    }

    /// Largest standard error over samples and components.
    pub fn max_stderr(&self) -> T {
        self.stderr_p
            .iter()
            .map(|s| s.x.max(s.y).max(s.z))
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow<T> {
    pub dt: T,
    pub n_steps: usize,
    /// `max |mean - analytic|` over samples and components.
    pub max_error: T,
    /// Largest standard error of the ensemble mean.
    pub noise_floor: T,
}

impl<T: Real> ConvergenceRow<T> {
    /// Error in excess of three standard errors, clipped at zero.
    pub fn bias_estimate(&self) -> T {
        (self.max_error - T::lit(3.0) * self.noise_floor).max(T::zero())
    }
}

/// Reruns `plan` at each step size in `dts` over the same horizon
/// `plan.dt * plan.n_steps` and reports the worst deviation from `analytic`.
pub fn convergence_report<T: Real, F: Fn(T) -> PolarizationVector<T>>(
    plan: &SimPlan<T>,
    mode: Mode,
    analytic: F,
    dts: &[T],
) -> Result<Vec<ConvergenceRow<T>>> {
    let horizon = plan.t_final();
    dts.iter()
        .map(|&dt| {
            if !(dt > T::zero()) {
                return Err(Error::InvalidPlan(format!("dt must be > 0, got {dt}")));
            }
            let n_steps = (horizon / dt).round().to_usize().unwrap_or(0).max(1);
            let sub = SimPlan {
                dt: horizon / T::from_count(n_steps),
                n_steps,
                ..*plan
            };
            let ens = run_ensemble(&sub, mode)?;
            Ok(ConvergenceRow {
                dt: sub.dt,
                n_steps,
                max_error: ens.max_abs_error(&analytic),
                noise_floor: ens.max_stderr(),
            })
        })
        .collect()
}
