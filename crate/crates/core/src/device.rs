//! Physical constants and device parameters of a donor nuclear-spin qubit.
//!
//! The register Hamiltonian is `H = B_z gamma(V) sigma_z` with the A-gate
//! tuned coupling
//!
//! ```text
//! gamma(V) = -g_n mu_n - (A0 - hbar eta V) / B_z
//! ```
//!
//! The printed form of this relation in the literature reads
//! `-g_n mu_B - (A0 - eta V)/B_z`; that form is dimensionally inconsistent
//! with the nuclear Zeeman term and with the `hbar eta V0` factor of the
//! noise conversion below, so the nuclear magneton and `hbar eta V` are used.
//!
//! White voltage noise `V(t) = V0 (1 + Delta(t))`, `Delta dt = sqrt(lambda) dW`,
//! shifts the coupling by `xi(t) = (eta hbar V0 / B_z) Delta(t)`, so the
//! Larmor-noise strength is `eps = (eta hbar V0 / B_z)^2 lambda`.
//!
//! All dynamics downstream consume only the reduced rates returned by
//! [`DeviceParameters::dephasing_rate`] and [`DeviceParameters::rabi_rate`].

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ratio `mu_B / (g_n mu_n)` separating electron and nuclear Zeeman scales.
pub const ELECTRON_NUCLEAR_RATIO: f64 = 1633.8;

/// Bohr magneton, J/T (CODATA 2018).
pub const BOHR_MAGNETON: f64 = 9.274_010_078_3e-24;
/// Nuclear magneton, J/T (CODATA 2018).
pub const NUCLEAR_MAGNETON: f64 = 5.050_783_746_1e-27;
/// Reduced Planck constant, J s (exact in SI 2019).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Field ratio above which the secular (small drive) picture is suspect.
pub const DRIVE_WARNING_RATIO: f64 = 0.01;

/// Kane operating point: static field, T.
pub const KANE_B_Z: f64 = 2.0;
/// Kane operating point: transverse drive amplitude, T.
pub const KANE_B_AC: f64 = 1.0e-3;
/// Kane operating point: A-gate bias, V.
pub const KANE_V0: f64 = 1.0;
/// A-gate voltage-to-frequency coefficient, Hz/V.
pub const KANE_ETA: f64 = 5.0 * PI * 1.0e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Bohr magneton, J/T.
    pub mu_b: f64,
    /// Nuclear magneton, J/T.
    pub mu_n: f64,
    /// Nuclear g-factor (dimensionless).
    pub g_n: f64,
    /// Reduced Planck constant, J s.
    pub hbar: f64,
}

impl PhysicalConstants {
    /// CODATA magnetons and `hbar`, with `g_n` fixed by
    /// `mu_B / (g_n mu_n) = 1633.8`.
    ///
    /// This anchored `g_n ~ 1.1238` is what reproduces the published
    /// pulse-area bound; the tabulated 31P value (~2.26) does not.
    pub fn anchored() -> Self {
        Self {
            mu_b: BOHR_MAGNETON,
            mu_n: NUCLEAR_MAGNETON,
            g_n: BOHR_MAGNETON / (ELECTRON_NUCLEAR_RATIO * NUCLEAR_MAGNETON),
            hbar: HBAR,
        }
    }

    /// `g_n mu_n`, the nuclear energy per unit field (J/T).
    pub fn nuclear_moment(&self) -> f64 {
        self.g_n * self.mu_n
    }

    pub fn electron_nuclear_ratio(&self) -> f64 {
        self.mu_b / self.nuclear_moment()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("mu_b", self.mu_b),
            ("mu_n", self.mu_n),
            ("g_n", self.g_n),
            ("hbar", self.hbar),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        let rel = (self.electron_nuclear_ratio() / ELECTRON_NUCLEAR_RATIO - 1.0).abs();
        if rel > 1e-3 {
            return Err(Error::param(
                "g_n",
                format!(
                    "mu_B/(g_n mu_n) = {} is not within 0.1% of {ELECTRON_NUCLEAR_RATIO}",
                    self.electron_nuclear_ratio()
                ),
            ));
        }
        Ok(())
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::anchored()
    }
}

/// Static configuration of one qubit site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceParameters {
    b_z: f64,
    b_ac: f64,
    v0: f64,
    eta: f64,
    a0: Option<f64>,
    constants: PhysicalConstants,
}

impl DeviceParameters {
    /// `b_z`, `b_ac` in T, `v0` in V, `eta` in Hz/V.
    pub fn new(b_z: f64, b_ac: f64, v0: f64, eta: f64) -> Result<Self> {
        Self::with_constants(b_z, b_ac, v0, eta, PhysicalConstants::anchored())
    }

    pub fn with_constants(
        b_z: f64,
        b_ac: f64,
        v0: f64,
        eta: f64,
        constants: PhysicalConstants,
    ) -> Result<Self> {
        constants.validate()?;
        check(b_z.is_finite() && b_z > 0.0, "b_z", "must be > 0", b_z)?;
        check(b_ac.is_finite() && b_ac >= 0.0, "b_ac", "must be >= 0", b_ac)?;
        check(v0.is_finite() && v0 >= 0.0, "v0", "must be >= 0", v0)?;
        check(eta.is_finite() && eta > 0.0, "eta", "must be > 0", eta)?;
        Ok(Self {
            b_z,
            b_ac,
            v0,
            eta,
            a0: None,
            constants,
        })
    }

    /// B_z = 2 T, B_ac = 1 mT, V0 = 1 V, eta = 5 pi 1e7 Hz/V; A0 unset.
    pub fn kane() -> Self {
        Self::new(KANE_B_Z, KANE_B_AC, KANE_V0, KANE_ETA).expect("Kane defaults are valid")
    }

    /// Sets the zero-bias hyperfine energy A0 (J).
    pub fn with_hyperfine(mut self, a0: f64) -> Result<Self> {
        check(a0.is_finite(), "a0", "must be finite", a0)?;
        self.a0 = Some(a0);
        Ok(self)
    }

    pub fn with_bias(mut self, v0: f64) -> Result<Self> {
        check(v0.is_finite() && v0 >= 0.0, "v0", "must be >= 0", v0)?;
        self.v0 = v0;
        Ok(self)
    }

    pub fn with_drive(mut self, b_ac: f64) -> Result<Self> {
        check(b_ac.is_finite() && b_ac >= 0.0, "b_ac", "must be >= 0", b_ac)?;
        self.b_ac = b_ac;
        Ok(self)
    }

    pub fn with_field(mut self, b_z: f64) -> Result<Self> {
        check(b_z.is_finite() && b_z > 0.0, "b_z", "must be > 0", b_z)?;
        self.b_z = b_z;
        Ok(self)
    }

    pub fn b_z(&self) -> f64 {
        self.b_z
    }
    pub fn b_ac(&self) -> f64 {
        self.b_ac
    }
    pub fn v0(&self) -> f64 {
        self.v0
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn a0(&self) -> Option<f64> {
        self.a0
    }
    pub fn constants(&self) -> &PhysicalConstants {
        &self.constants
    }

    /// Human-readable warnings for parameter regimes outside the model's
    /// comfort zone. Empty when everything is nominal.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.b_ac / self.b_z > DRIVE_WARNING_RATIO {
            out.push(format!(
                "B_ac/B_z = {:.3e} exceeds {DRIVE_WARNING_RATIO}: drive is not small against the static field",
                self.b_ac / self.b_z
            ));
        }
        out
    }

    /// `gamma(V) = -g_n mu_n - (A0 - hbar eta V)/B_z`, in J/T.
    pub fn gamma_of_voltage(&self, v: f64) -> Result<f64> {
        check(v.is_finite() && v >= 0.0, "V", "must be >= 0", v)?;
        let a0 = self.a0.ok_or(Error::MissingHyperfine)?;
        let c = &self.constants;
        Ok(-c.nuclear_moment() - (a0 - c.hbar * self.eta * v) / self.b_z)
    }

    /// Resonance `omega = 2 B_z gamma / hbar` in rad/s; the sign of `gamma`
    /// is carried through.
    pub fn resonance_frequency(&self, gamma: f64) -> f64 {
        2.0 * self.b_z * gamma / self.constants.hbar
    }

    /// `eta hbar V0 / B_z`, the coupling from fractional voltage noise to
    /// Larmor noise (J/T).
    pub fn noise_coupling(&self) -> f64 {
        self.eta * self.constants.hbar * self.v0 / self.b_z
    }

    pub fn epsilon_from_lambda(&self, lambda: f64) -> f64 {
        let k = self.noise_coupling();
        k * k * lambda
    }

    /// Inverse of [`epsilon_from_lambda`](Self::epsilon_from_lambda).
    /// Undefined (returns an error) at zero bias, where no voltage noise
    /// reaches the qubit.
    pub fn lambda_from_epsilon(&self, epsilon: f64) -> Result<f64> {
        let k = self.noise_coupling();
        if k == 0.0 {
            return Err(Error::param("v0", "zero bias: lambda is not determined by epsilon"));
        }
        Ok(epsilon / (k * k))
    }

    /// Hadamard duration `tau_op = pi hbar / (4 B_ac g_n mu_n)`.
    pub fn tau_op(&self) -> Result<f64> {
        if self.b_ac == 0.0 {
            return Err(Error::NoDrive);
        }
        let c = &self.constants;
        Ok(PI * c.hbar / (4.0 * self.b_ac * c.nuclear_moment()))
    }

    /// Dephasing time `tau_dec = hbar^2 / (2 B_z^2 eps)`.
    pub fn tau_dec(&self, noise: &NoiseSpec) -> Result<f64> {
        if noise.epsilon == 0.0 {
            return Err(Error::Noiseless);
        }
        let h = self.constants.hbar;
        Ok(h * h / (2.0 * self.b_z * self.b_z * noise.epsilon))
    }

    /// `tau_op / tau_dec` in closed form, `pi B_z^2 eps / (2 B_ac g_n mu_n hbar)`.
    pub fn tau_ratio(&self, noise: &NoiseSpec) -> Result<f64> {
        if self.b_ac == 0.0 {
            return Err(Error::NoDrive);
        }
        let c = &self.constants;
        Ok(PI * self.b_z * self.b_z * noise.epsilon
            / (2.0 * self.b_ac * c.nuclear_moment() * c.hbar))
    }

    /// `kappa = B_z^2 eps / hbar^2` (1/s). The ensemble coherence decays as
    /// `exp(-2 kappa t)`.
    ///
    /// Evaluated as `(B_z/hbar)^2 eps` so the intermediate stays in range.
    pub fn dephasing_rate(&self, noise: &NoiseSpec) -> f64 {
        let r = self.b_z / self.constants.hbar;
        r * r * noise.epsilon
    }

    /// `Omega = 2 B_ac g_n mu_n / hbar` (rad/s), the rotating-frame Rabi rate.
    pub fn rabi_rate(&self) -> f64 {
        2.0 * self.b_ac * self.constants.nuclear_moment() / self.constants.hbar
    }
}

fn check(ok: bool, name: &'static str, what: &str, v: f64) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::param(name, format!("{what}, got {v}")))
    }
}

/// Voltage-noise strength `lambda` (s) together with the Larmor-noise
/// strength `eps` ((J/T)^2 s) it induces at a given device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    lambda: f64,
    epsilon: f64,
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self {
            lambda: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn from_lambda(params: &DeviceParameters, lambda: f64) -> Result<Self> {
        check(lambda.is_finite() && lambda >= 0.0, "lambda", "must be >= 0", lambda)?;
        Ok(Self {
            lambda,
            epsilon: params.epsilon_from_lambda(lambda),
        })
    }

    pub fn from_epsilon(params: &DeviceParameters, epsilon: f64) -> Result<Self> {
        check(epsilon.is_finite() && epsilon >= 0.0, "epsilon", "must be >= 0", epsilon)?;
        let lambda = if epsilon == 0.0 {
            0.0
        } else {
            params.lambda_from_epsilon(epsilon)?
        };
        Ok(Self { lambda, epsilon })
    }

    /// Noise that yields the reduced dephasing rate `kappa` (1/s).
    pub fn from_dephasing_rate(params: &DeviceParameters, kappa: f64) -> Result<Self> {
        check(kappa.is_finite() && kappa >= 0.0, "kappa", "must be >= 0", kappa)?;
        let r = params.constants.hbar / params.b_z;
        Self::from_epsilon(params, r * r * kappa)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}
