//! Deterministic integration of the averaged master equation
//!
//! ```text
//! d rho / dt = -i [H, rho] - (kappa / 2) [sigma_z, [sigma_z, rho]],   H = -(Omega / 2) sigma_y
//! ```
//!
//! by classical RK4 on the 2x2 density matrix itself. It shares nothing with
//! the closed forms in [`crate::analytic`] beyond the equation of motion and
//! serves as their reference.

use num_complex::Complex64;

use crate::bloch::{matmul, pauli, DensityOperator, Matrix2};
use crate::error::Result;
use crate::Polarization;

type M = Matrix2<f64>;

fn add(a: &M, b: &M, s: f64) -> M {
    let mut out = *a;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += b[i][j] * s;
        }
    }
    out
}

fn commutator(a: &M, b: &M) -> M {
    add(&matmul(a, b), &matmul(b, a), -1.0)
}

struct Lindblad {
    hamiltonian: M,
    sz: M,
    half_kappa: f64,
}

impl Lindblad {
    fn new(kappa: f64, omega_rabi: f64) -> Self {
        let [_, sy, sz] = pauli::<f64>();
        let mut h = sy;
        for row in h.iter_mut() {
            for e in row.iter_mut() {
                *e *= -0.5 * omega_rabi;
            }
        }
        Self {
            hamiltonian: h,
            sz,
            half_kappa: 0.5 * kappa,
        }
    }

    fn rhs(&self, rho: &M) -> M {
        let unitary = commutator(&self.hamiltonian, rho);
        let dephase = commutator(&self.sz, &commutator(&self.sz, rho));
        let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] = Complex64::new(0.0, -1.0) * unitary[i][j] - dephase[i][j] * self.half_kappa;
            }
        }
        out
    }

    fn rk4(&self, rho: &M, h: f64) -> M {
        let k1 = self.rhs(rho);
        let k2 = self.rhs(&add(rho, &k1, 0.5 * h));
        let k3 = self.rhs(&add(rho, &k2, 0.5 * h));
        let k4 = self.rhs(&add(rho, &k3, h));
        let mut out = *rho;
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += (k1[i][j] + (k2[i][j] + k3[i][j]) * 2.0 + k4[i][j]) * (h / 6.0);
            }
        }
        out
    }
}

/// Polarization at each of `sample_times` (ascending, starting at or after
/// 0), integrating with steps no larger than `max_step`.
pub fn master_equation_trajectory(
    p0: &Polarization,
    kappa: f64,
    omega_rabi: f64,
    sample_times: &[f64],
    max_step: f64,
) -> Result<Vec<Polarization>> {
    let model = Lindblad::new(kappa, omega_rabi);
    let mut rho = *DensityOperator::from_polarization(p0)?.matrix();
    let mut now = 0.0;
    let mut out = Vec::with_capacity(sample_times.len());
    for &target in sample_times {
        let span = target - now;
        if span > 0.0 {
            let n = (span / max_step).ceil().max(1.0) as usize;
            let h = span / n as f64;
            for _ in 0..n {
                rho = model.rk4(&rho, h);
            }
            now = target;
        }
        let two = 2.0;
        out.push(Polarization::new(
            two * rho[0][1].re,
            -two * rho[0][1].im,
            rho[0][0].re - rho[1][1].re,
        ));
    }
    Ok(out)
}
