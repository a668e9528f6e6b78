//! Two-level state algebra.
//!
//! Convention: `sigma_z |0> = +|0>`, so `|0>` has polarization `(0, 0, 1)`
//! and `rho = (I + P . sigma) / 2`.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Slack on `|P| <= 1` before a vector is rejected as unphysical.
pub const NORM_SLACK: f64 = 1e-9;
/// Tolerance for the Hermitian, unit-trace and positivity checks.
pub const DENSITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PolarizationVector<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> PolarizationVector<T> {
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn unit_x() -> Self {
        Self::new(T::one(), T::zero(), T::zero())
    }

    pub fn unit_y() -> Self {
        Self::new(T::zero(), T::one(), T::zero())
    }

    pub fn unit_z() -> Self {
        Self::new(T::zero(), T::zero(), T::one())
    }

    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm_sqr(&self) -> T {
        self.dot(self)
    }

    /// Purity measure `|P|`: 1 for pure states, 0 for the maximally mixed one.
    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    /// Largest componentwise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn is_physical(&self) -> bool {
        self.norm() <= T::one() + T::lit(NORM_SLACK)
    }

    pub fn cast<U: Real>(self) -> PolarizationVector<U> {
        let c = |v: T| U::from_f64(v.to_f64().expect("finite")).expect("representable");
        PolarizationVector::new(c(self.x), c(self.y), c(self.z))
    }
}

impl<T: Real> Add for PolarizationVector<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for PolarizationVector<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for PolarizationVector<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for PolarizationVector<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// 2x2 complex matrix, row-major.
pub type Matrix2<T> = [[Complex<T>; 2]; 2];

pub fn matmul<T: Real>(a: &Matrix2<T>, b: &Matrix2<T>) -> Matrix2<T> {
    let mut out = [[Complex::new(T::zero(), T::zero()); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub fn adjoint<T: Real>(a: &Matrix2<T>) -> Matrix2<T> {
    [
        [a[0][0].conj(), a[1][0].conj()],
        [a[0][1].conj(), a[1][1].conj()],
    ]
}

/// Pauli matrices `[sigma_x, sigma_y, sigma_z]`.
pub fn pauli<T: Real>() -> [Matrix2<T>; 3] {
    let o = Complex::new(T::zero(), T::zero());
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    [
        [[o, one], [one, o]],
        [[o, -i], [i, o]],
        [[one, o], [o, -one]],
    ]
}

/// Density operator of a single qubit. Construction validates the
/// Hermitian, unit-trace and positivity invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator<T> {
    m: Matrix2<T>,
}

impl<T: Real> DensityOperator<T> {
    /// `(I + P . sigma) / 2`.
    pub fn from_polarization(p: &PolarizationVector<T>) -> Result<Self> {
        if !p.is_physical() {
            return Err(Error::UnphysicalPolarization {
                norm: p.norm().to_f64().unwrap_or(f64::NAN),
            });
        }
        let h = T::lit(0.5);
        let m = [
            [
                Complex::new(h * (T::one() + p.z), T::zero()),
                Complex::new(h * p.x, -h * p.y),
            ],
            [
                Complex::new(h * p.x, h * p.y),
                Complex::new(h * (T::one() - p.z), T::zero()),
            ],
        ];
        Ok(Self { m })
    }

    pub fn from_matrix(m: Matrix2<T>) -> Result<Self> {
        let tol = T::lit(DENSITY_TOL);
        if m[0][0].im.abs() > tol || m[1][1].im.abs() > tol {
            return Err(Error::InvalidDensity("diagonal is not real".into()));
        }
        if (m[1][0] - m[0][1].conj()).norm() > tol {
            return Err(Error::InvalidDensity("not Hermitian".into()));
        }
        let tr = m[0][0].re + m[1][1].re;
        if (tr - T::one()).abs() > tol {
            return Err(Error::InvalidDensity(format!("trace = {tr}")));
        }
        // eigenvalues of a unit-trace Hermitian 2x2 are (1 +- |P|)/2
        let rho = Self { m };
        let lowest = T::lit(0.5) * (T::one() - rho.polarization().norm());
        if lowest < -tol {
            return Err(Error::InvalidDensity(format!("eigenvalue {lowest} < 0")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed() -> Self {
        Self::from_polarization(&PolarizationVector::zero()).expect("zero vector is physical")
    }

    pub fn matrix(&self) -> &Matrix2<T> {
        &self.m
    }

    /// `P_i = Tr(rho sigma_i)`.
    pub fn polarization(&self) -> PolarizationVector<T> {
        let m = &self.m;
        let two = T::lit(2.0);
        PolarizationVector::new(
            two * m[0][1].re,
            -two * m[0][1].im,
            m[0][0].re - m[1][1].re,
        )
    }

    pub fn trace(&self) -> Complex<T> {
        self.m[0][0] + self.m[1][1]
    }

    /// `Tr(rho^2) = (1 + |P|^2)/2`.
    pub fn purity(&self) -> T {
        trace_fidelity(self, self)
    }

    /// `U rho U^dagger`. `u` is assumed unitary.
    pub fn conjugate(&self, u: &Matrix2<T>) -> Self {
        Self {
            m: matmul(&matmul(u, &self.m), &adjoint(u)),
        }
    }
}

/// Trace-product overlap `Tr(rho_a rho_b) = (1 + P_a . P_b)/2`.
///
/// This is the fidelity used throughout the crate. It is not the Uhlmann
/// fidelity; the two agree only when at least one state is pure.
pub fn trace_fidelity<T: Real>(a: &DensityOperator<T>, b: &DensityOperator<T>) -> T {
    let p = matmul(&a.m, &b.m);
    (p[0][0] + p[1][1]).re
}
