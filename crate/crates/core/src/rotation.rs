//! Action of `U = exp(-i theta . sigma)` on a polarization vector.
//!
//! Conjugating `rho` by `U` rotates `P` right-handedly by the angle
//! `2 |theta|` about `theta / |theta|` (Rodrigues formula).

use crate::bloch::PolarizationVector;
use crate::scalar::Real;

/// `P -> R P` for `rho -> U rho U^dagger`, `U = exp(-i theta . sigma)`.
pub fn su2_rotate<T: Real>(p: PolarizationVector<T>, theta: [T; 3]) -> PolarizationVector<T> {
    let t = PolarizationVector::from_array(theta);
    let half = t.norm();
    if half == T::zero() {
        return p;
    }
    let n = t.scale(half.recip());
    let angle = half + half;
    let (s, c) = angle.sin_cos();
    // 1 - cos(angle) without cancellation at small angles
    let sh = half.sin();
    let vers = (sh * sh) * T::lit(2.0);
    let nxp = n.cross(&p);
    let ndp = n.dot(&p);
    PolarizationVector::new(
        p.x * c + nxp.x * s + n.x * ndp * vers,
        p.y * c + nxp.y * s + n.y * ndp * vers,
        p.z * c + nxp.z * s + n.z * ndp * vers,
    )
}

/// Rotation by `angle` about +z. `P_z` is returned untouched.
#[inline]
pub fn rotate_about_z<T: Real>(p: PolarizationVector<T>, angle: T) -> PolarizationVector<T> {
    let (s, c) = angle.sin_cos();
    PolarizationVector::new(c * p.x - s * p.y, s * p.x + c * p.y, p.z)
}

/// Rotation by `angle` about +y: `z` turns towards `+x`.
#[inline]
pub fn rotate_about_y<T: Real>(p: PolarizationVector<T>, angle: T) -> PolarizationVector<T> {
    let (s, c) = angle.sin_cos();
    rotate_about_y_sc(p, s, c)
}

/// [`rotate_about_y`] from a precomputed `(sin, cos)` of the angle.
#[inline]
pub(crate) fn rotate_about_y_sc<T: Real>(p: PolarizationVector<T>, s: T, c: T) -> PolarizationVector<T> {
    PolarizationVector::new(c * p.x + s * p.z, p.y, c * p.z - s * p.x)
}
