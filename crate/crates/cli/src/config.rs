//! JSON run configuration.

use std::path::{Path, PathBuf};

use kane_noise::{DeviceParameters, NoiseSpec, Plan, Polarization};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Relative slack allowed between a given `lambda` and `epsilon`.
pub const NOISE_CONSISTENCY: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub device: DeviceConfig,
    pub noise: NoiseConfig,
    pub initial: InitialState,
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    /// T
    pub b_z: f64,
    /// T
    pub b_ac: f64,
    /// V
    pub v0: f64,
    /// Hz/V
    pub eta: f64,
    /// J
    pub a0: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// (J/T)^2 s
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialState {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// s
    pub dt: f64,
    pub n_steps: usize,
    pub n_traj: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_work: Option<u128>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_stride")]
    pub stride: usize,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_stride() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            stride: default_stride(),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub traj: Option<usize>,
    pub dt: Option<f64>,
}

/// Validated, physics-ready view of a config.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub device: DeviceParameters,
    pub noise: NoiseSpec,
    pub p0: Polarization,
    pub simulation: SimulationConfig,
    pub output: OutputConfig,
}

impl Resolved {
    pub fn kappa(&self) -> f64 {
        self.device.dephasing_rate(&self.noise)
    }

    pub fn plan(&self, omega_rabi: f64) -> Plan {
        Plan {
            kappa: self.kappa(),
            omega_rabi,
            dt: self.simulation.dt,
            n_steps: self.simulation.n_steps,
            n_traj: self.simulation.n_traj,
            seed: self.simulation.seed,
            p0: self.p0,
        }
    }
}

fn field(name: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{name}: {err}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(seed) = o.seed {
            self.simulation.seed = seed;
        }
        if let Some(out) = &o.out {
            self.output.dir = out.clone();
        }
        if let Some(traj) = o.traj {
            self.simulation.n_traj = traj;
        }
        if let Some(dt) = o.dt {
            self.simulation.dt = dt;
        }
    }

    pub fn device_parameters(&self) -> Result<DeviceParameters, CliError> {
        let d = &self.device;
        let map = |e: kane_noise::Error| match e {
            kane_noise::Error::InvalidParameter { name, reason } => field(&format!("device.{name}"), reason),
            other => field("device", other),
        };
        DeviceParameters::new(d.b_z, d.b_ac, d.v0, d.eta)
            .and_then(|p| p.with_hyperfine(d.a0))
            .map_err(map)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let device = self.device_parameters()?;
        let noise = match (self.noise.lambda, self.noise.epsilon) {
            (None, None) => return Err(field("noise", "one of `lambda` or `epsilon` is required")),
            (Some(l), None) => NoiseSpec::from_lambda(&device, l).map_err(|e| field("noise.lambda", e))?,
            (None, Some(e)) => NoiseSpec::from_epsilon(&device, e).map_err(|err| field("noise.epsilon", err))?,
            (Some(l), Some(e)) => {
                let spec = NoiseSpec::from_lambda(&device, l).map_err(|err| field("noise.lambda", err))?;
                let implied = spec.epsilon();
                let scale = implied.abs().max(e.abs());
                if scale > 0.0 && (implied - e).abs() > NOISE_CONSISTENCY * scale {
                    return Err(field(
                        "noise",
                        format!("`lambda` implies epsilon = {implied:e}, which disagrees with `epsilon` = {e:e}"),
                    ));
                }
                spec
            }
        };
        let i = &self.initial;
        let p0 = Polarization::new(i.x, i.y, i.z);
        if !p0.is_physical() {
            return Err(field("initial", format!("|P| = {} exceeds 1", p0.norm())));
        }
        let s = &self.simulation;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(field("simulation.dt", format!("must be > 0, got {}", s.dt)));
        }
        if s.n_steps == 0 {
            return Err(field("simulation.n_steps", "must be >= 1"));
        }
        if s.n_traj == 0 {
            return Err(field("simulation.n_traj", "must be >= 1"));
        }
        if self.output.stride == 0 {
            return Err(field("output.stride", "must be >= 1"));
        }
        Ok(Resolved {
            device,
            noise,
            p0,
            simulation: s.clone(),
            output: self.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "device": {"b_z": 2.0, "b_ac": 0.001, "v0": 1.0, "eta": 157079632.67948966, "a0": 1.9385e-26},
        "noise": {"lambda": 4.3e-14},
        "initial": {"x": 1.0, "y": 0.0, "z": 0.0},
        "simulation": {"dt": 1e-6, "n_steps": 100, "n_traj": 64, "seed": 1},
        "output": {"dir": "out", "stride": 5}
    }"#;

    fn sample() -> RunConfig {
        RunConfig::parse(SAMPLE).unwrap()
    }

    #[test]
    fn parses_and_resolves() {
        let r = sample().resolve().unwrap();
        assert_eq!(r.simulation.n_traj, 64);
        assert_eq!(r.output.stride, 5);
        assert!(r.kappa() > 0.0);
    }

    #[test]
    fn round_trip() {
        let c = sample();
        assert_eq!(RunConfig::parse(&c.to_json()).unwrap(), c);
        let mut both = c.clone();
        both.noise.epsilon = Some(1.0);
        both.simulation.max_work = Some(12);
        assert_eq!(RunConfig::parse(&both.to_json()).unwrap(), both);
    }

    #[test]
    fn output_block_is_optional() {
        let text = SAMPLE.replace(r#",
        "output": {"dir": "out", "stride": 5}"#, "");
        let c = RunConfig::parse(&text).unwrap();
        assert_eq!(c.output, OutputConfig::default());
    }

    #[test]
    fn missing_a0_is_reported_with_location() {
        let text = SAMPLE.replace(r#", "a0": 1.9385e-26"#, "");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("missing field `a0`") && err.contains("line"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let text = SAMPLE.replace(r#""seed": 1"#, r#""seed": 1, "sede": 2"#);
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("sede"), "{err}");
    }

    #[test]
    fn noise_block_rules() {
        let mut c = sample();
        c.noise = NoiseConfig::default();
        assert!(c.resolve().unwrap_err().to_string().contains("noise"));

        let mut c = sample();
        let eps = c.device_parameters().unwrap().epsilon_from_lambda(4.3e-14);
        c.noise.epsilon = Some(eps * (1.0 + 1e-12));
        assert!(c.resolve().is_ok());
        c.noise.epsilon = Some(eps * 1.001);
        assert!(c.resolve().unwrap_err().to_string().contains("disagrees"));

        let mut c = sample();
        c.noise.lambda = Some(-1.0);
        assert!(c.resolve().unwrap_err().to_string().contains("noise.lambda"));
    }

    #[test]
    fn field_diagnostics() {
        let mut c = sample();
        c.device.b_z = 0.0;
        assert!(c.resolve().unwrap_err().to_string().starts_with("device.b_z"));
        let mut c = sample();
        c.output.stride = 0;
        assert!(c.resolve().unwrap_err().to_string().starts_with("output.stride"));
        let mut c = sample();
        c.initial.y = 1.0;
        assert!(c.resolve().unwrap_err().to_string().starts_with("initial"));
        let mut c = sample();
        c.simulation.n_traj = 0;
        assert!(c.resolve().unwrap_err().to_string().starts_with("simulation.n_traj"));
    }

    #[test]
    fn overrides_win() {
        let mut c = sample();
        c.apply(&Overrides {
            seed: Some(9),
            out: Some("elsewhere".into()),
            traj: Some(3),
            dt: Some(2e-6),
        });
        assert_eq!(c.simulation.seed, 9);
        assert_eq!(c.simulation.n_traj, 3);
        assert_eq!(c.simulation.dt, 2e-6);
        assert_eq!(c.output.dir, PathBuf::from("elsewhere"));
    }
}
