//! Ensemble decoherence of a donor nuclear-spin qubit driven by white noise
//! on its A-gate voltage.
//!
//! The crate is split along the physics:
//!
//! * [`device`] turns SI device parameters into the two rates every dynamics
//!   routine consumes: the dephasing rate `kappa = B_z^2 eps / hbar^2` and the
//!   Rabi rate `omega = 2 B_ac g_n mu_n / hbar`.
//! * [`bloch`] holds the two-level state algebra (polarization vectors,
//!   density operators, trace-product fidelity).
//! * [`stochastic`] samples individual noise histories with exact per-step
//!   SU(2) propagators and reduces them into ensemble statistics.
//! * [`analytic`] evaluates the closed-form noise-averaged solutions.
//! * [`budget`] inverts a target gate-error probability into bounds on the
//!   tolerable voltage noise.
//! * [`oracle`] is a deterministic RK4 integrator of the averaged master
//!   equation in density-matrix form, used to cross-check [`analytic`].
//!
//! Dynamics are generic over [`Real`] (`f32` or `f64`). Device and budget
//! arithmetic is `f64` only: SI products such as `hbar^2 ~ 1e-68` are far
//! below the `f32` range.

pub mod analytic;
pub mod bloch;
pub mod budget;
pub mod device;
mod error;
pub mod fit;
pub mod oracle;
pub mod rotation;
mod scalar;
pub mod stochastic;

pub use error::{Error, Result};
pub use scalar::Real;

pub use device::{DeviceParameters, NoiseSpec, PhysicalConstants};
pub use budget::ToleranceBudget;
pub use stochastic::Mode;

/// Double-precision polarization vector.
pub type Polarization = bloch::PolarizationVector<f64>;
/// Single-precision polarization vector.
pub type Polarization32 = bloch::PolarizationVector<f32>;
/// Double-precision density operator.
pub type Density = bloch::DensityOperator<f64>;
/// Double-precision simulation plan.
pub type Plan = stochastic::SimPlan<f64>;
/// Single-precision simulation plan.
pub type Plan32 = stochastic::SimPlan<f32>;
/// Double-precision ensemble result.
pub type Ensemble = stochastic::TrajectoryEnsemble<f64>;
/// Double-precision closed-form rotation parameters.
pub type RotationParams = analytic::RotationSolutionParams<f64>;
