//! Closed-form noise-averaged dynamics and fidelities.
//!
//! In reduced rates the averaged Bloch equations of the driven qubit read
//!
//! ```text
//! dPx/dt = -2 kappa Px - Omega Pz
//! dPy/dt = -2 kappa Py
//! dPz/dt =  Omega Px
//! ```
//!
//! whose `(Px, Pz)` block has eigenvalues `-kappa +- a`, `a = sqrt(kappa^2 - Omega^2)`.
//! `a` is the physical `alpha / hbar^2`; it is imaginary in the underdamped
//! regime `kappa < Omega`, where the hyperbolic functions become
//! trigonometric. One complex code path covers both regimes.

use num_complex::Complex;

use crate::bloch::PolarizationVector;
use crate::scalar::Real;

/// Below this `|a| t` the hyperbolic terms use their Taylor series.
pub const SERIES_THRESHOLD: f64 = 1e-6;

/// Register qubit: `(Px, Py)` scaled by `exp(-2 kappa t)`, `Pz` fixed.
pub fn register_polarization<T: Real>(
    p0: &PolarizationVector<T>,
    kappa: T,
    t: T,
) -> PolarizationVector<T> {
    let d = (-(kappa + kappa) * t).exp();
    PolarizationVector::new(p0.x * d, p0.y * d, p0.z)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationSolutionParams<T> {
    pub kappa: T,
    pub omega_rabi: T,
}

impl<T: Real> RotationSolutionParams<T> {
    pub fn new(kappa: T, omega_rabi: T) -> Self {
        Self { kappa, omega_rabi }
    }

    /// `a = sqrt(kappa^2 - Omega^2)` on the principal branch (`Re a >= 0`,
    /// imaginary when underdamped).
    pub fn alpha_reduced(&self) -> Complex<T> {
        let d = (self.kappa - self.omega_rabi) * (self.kappa + self.omega_rabi);
        if d >= T::zero() {
            Complex::new(d.sqrt(), T::zero())
        } else {
            Complex::new(T::zero(), (-d).sqrt())
        }
    }
}

/// `exp(-kappa t) cosh(a t)`, `exp(-kappa t) sinh(a t)/a`, and the two
/// combinations `exp(-kappa t)(cosh(a t) -+ kappa sinh(a t)/a)`.
struct Propagator<T> {
    s: Complex<T>,
    c_minus: Complex<T>,
    c_plus: Complex<T>,
}

fn propagator<T: Real>(kappa: T, omega: T, a: Complex<T>, t: T) -> Propagator<T> {
    let damp = (-kappa * t).exp();
    let at = a * t;
    if at.norm() < T::lit(SERIES_THRESHOLD) {
        // cosh x = 1 + x^2/2 + x^4/24, sinh(x)/x = 1 + x^2/6 + x^4/120
        let x2 = at * at;
        let x4 = x2 * x2;
        let one = Complex::new(T::one(), T::zero());
        let ch = (one + x2 * T::lit(0.5) + x4 / T::lit(24.0)) * damp;
        let sh = (one + x2 / T::lit(6.0) + x4 / T::lit(120.0)) * (damp * t);
        return Propagator {
            s: sh,
            c_minus: ch - sh * kappa,
            c_plus: ch + sh * kappa,
        };
    }
    // E1 = exp((a - kappa) t), E2 = exp(-(a + kappa) t); Re(a) <= kappa keeps
    // both bounded.
    let kc = Complex::new(kappa, T::zero());
    let e1 = ((a - kc) * t).exp();
    let e2 = (-(a + kc) * t).exp();
    let half = T::lit(0.5);
    let s = if at.re > T::one() {
        (e1 - e2) * half / a
    } else {
        at.sinh() * damp / a
    };
    // 1 - kappa/a = -Omega^2 / (a (a + kappa)) avoids cancellation near
    // the overdamped asymptote.
    let small = -Complex::new(omega * omega, T::zero()) / (a * (a + kc));
    let big = Complex::new(T::one(), T::zero()) + kc / a;
    Propagator {
        s,
        c_minus: (e1 * small + e2 * big) * half,
        c_plus: (e1 * big + e2 * small) * half,
    }
}

/// Exact averaged solution of the driven qubit, with the largest imaginary
/// residue of the complex evaluation.
pub fn rotation_polarization_exact_with_residue<T: Real>(
    p0: &PolarizationVector<T>,
    params: &RotationSolutionParams<T>,
    t: T,
) -> (PolarizationVector<T>, T) {
    let kappa = params.kappa;
    let omega = params.omega_rabi;
    let pr = propagator(kappa, omega, params.alpha_reduced(), t);
    let px = pr.c_minus * p0.x - pr.s * (omega * p0.z);
    let pz = pr.c_plus * p0.z + pr.s * (omega * p0.x);
    let py = (-(kappa + kappa) * t).exp() * p0.y;
    let residue = px.im.abs().max(pz.im.abs());
    (PolarizationVector::new(px.re, py, pz.re), residue)
}

/// Exact averaged solution of the driven qubit:
///
/// ```text
/// Px(t) = e^{-kt} [(cosh at - (k/a) sinh at) Px0 - (Omega/a) sinh at Pz0]
/// Py(t) = e^{-2kt} Py0
/// Pz(t) = e^{-kt} [(cosh at + (k/a) sinh at) Pz0 + (Omega/a) sinh at Px0]
/// ```
pub fn rotation_polarization_exact<T: Real>(
    p0: &PolarizationVector<T>,
    params: &RotationSolutionParams<T>,
    t: T,
) -> PolarizationVector<T> {
    let (p, residue) = rotation_polarization_exact_with_residue(p0, params, t);
    debug_assert!(
        residue <= T::lit(1e-10) * (T::one() + p0.norm()),
        "imaginary residue {residue}"
    );
    p
}

/// Noiseless drive: rotation by `-Omega t` about y.
pub fn noiseless_rotation<T: Real>(p0: &PolarizationVector<T>, omega_rabi: T, t: T) -> PolarizationVector<T> {
    rotation_polarization_approx(p0, T::zero(), omega_rabi, t)
}

/// Zeroth order in `kappa/Omega`: `(Px, Pz)` rotate at `Omega` and damp at
/// `kappa`, `Py` damps at `2 kappa`.
pub fn rotation_polarization_approx<T: Real>(
    p0: &PolarizationVector<T>,
    kappa: T,
    omega_rabi: T,
    t: T,
) -> PolarizationVector<T> {
    let d = (-kappa * t).exp();
    let (s, c) = (-omega_rabi * t).sin_cos();
    PolarizationVector::new(
        d * (c * p0.x + s * p0.z),
        (-(kappa + kappa) * t).exp() * p0.y,
        d * (c * p0.z - s * p0.x),
    )
}

/// Register fidelity `Tr[rho(t) rho(0)] = (1 + Pz0^2 + (Px0^2 + Py0^2) e^{-2 kappa t}) / 2`.
pub fn register_fidelity<T: Real>(p0: &PolarizationVector<T>, kappa: T, t: T) -> T {
    let d = (-(kappa + kappa) * t).exp();
    T::lit(0.5) * (T::one() + p0.z * p0.z + (p0.x * p0.x + p0.y * p0.y) * d)
}

/// Equatorial (maximally coherent) input: `(1 + e^{-2 kappa t}) / 2`.
pub fn worst_case_register_fidelity<T: Real>(kappa: T, t: T) -> T {
    T::lit(0.5) * (T::one() + (-(kappa + kappa) * t).exp())
}

/// Driven-qubit fidelity against the noiseless rotation,
/// `(1 + e^{-2 kappa t} Py0^2 + e^{-kappa t}(Px0^2 + Pz0^2)) / 2`.
///
/// Meant for pure inputs; a mixed input starts below 1.
pub fn rotation_fidelity<T: Real>(p0: &PolarizationVector<T>, kappa: T, t: T) -> T {
    let d1 = (-kappa * t).exp();
    let d2 = (-(kappa + kappa) * t).exp();
    T::lit(0.5) * (T::one() + d2 * p0.y * p0.y + d1 * (p0.x * p0.x + p0.z * p0.z))
}
