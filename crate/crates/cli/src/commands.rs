//! Subcommand bodies. Each returns the JSON summary it printed.

use std::path::PathBuf;

use kane_noise::analytic::{
    register_polarization, rotation_fidelity, rotation_polarization_approx, rotation_polarization_exact,
    worst_case_register_fidelity,
};
use kane_noise::budget::{compute_budget, log_grid, sweep_bias, sweep_delta};
use kane_noise::fit::{log_linear_decay_rate, DEFAULT_MIN_SNR};
use kane_noise::oracle::master_equation_trajectory;
use kane_noise::stochastic::{run_ensemble_with_cap, DEFAULT_MAX_WORK};
use kane_noise::{DeviceParameters, Ensemble, Mode, NoiseSpec, Plan, Polarization, RotationParams, ToleranceBudget};
use serde_json::{json, Value};

use crate::config::Resolved;
use crate::error::CliError;
use crate::output::{count, decimate, maybe_quantity, object, quantity, write_json, write_outputs, Table, DIMENSIONLESS};

const RATE: &str = "1/s";
const EPSILON_UNIT: &str = "(J/T)^2 s";

fn simulation_error(e: kane_noise::Error) -> CliError {
    CliError::Config(format!("simulation: {e}"))
}

fn run(resolved: &Resolved, plan: &Plan, mode: Mode) -> Result<Ensemble, CliError> {
    let cap = resolved.simulation.max_work.unwrap_or(DEFAULT_MAX_WORK);
    run_ensemble_with_cap(plan, mode, cap).map_err(simulation_error)
}

fn components(p: &Polarization) -> [f64; 3] {
    p.to_array()
}

/// Largest `|mean - reference|` over the emitted `rows`, and the largest
/// `|mean - reference| / stderr` among components with nonzero stderr.
fn deviations(ens: &Ensemble, rows: &[usize], reference: impl Fn(f64) -> Polarization) -> (f64, Option<f64>) {
    let mut abs = 0.0f64;
    let mut rel: Option<f64> = None;
    for &k in rows {
        let (m, s) = (&ens.mean_p[k], &ens.stderr_p[k]);
        let r = reference(ens.times[k]);
        for ((a, b), se) in components(m).iter().zip(components(&r)).zip(components(s)) {
            let d = (a - b).abs();
            abs = abs.max(d);
            if se > 0.0 {
                rel = Some(rel.unwrap_or(0.0).max(d / se));
            }
        }
    }
    (abs, rel)
}

fn common_fields(r: &Resolved, plan: &Plan) -> Vec<(&'static str, Value)> {
    let tau_dec = r.device.tau_dec(&r.noise).ok();
    vec![
        ("dt", quantity(plan.dt, "s")),
        ("epsilon", quantity(r.noise.epsilon(), EPSILON_UNIT)),
        ("kappa", quantity(plan.kappa, RATE)),
        ("lambda", quantity(r.noise.lambda(), "s")),
        ("n_steps", count(plan.n_steps)),
        ("n_traj", count(plan.n_traj)),
        ("seed", json!({ "unit": "id", "value": plan.seed })),
        ("t_final", quantity(plan.t_final(), "s")),
        ("tau_dec", maybe_quantity(tau_dec, "s")),
        ("warnings", json!(r.device.warnings())),
    ]
}

pub fn register_decay(r: &Resolved) -> Result<Value, CliError> {
    let plan = r.plan(0.0);
    let ens = run(r, &plan, Mode::Register)?;
    let kappa = plan.kappa;
    let analytic = |t: f64| register_polarization(&r.p0, kappa, t);

    let mut table = Table::new(vec![
        "t",
        "Px_mc",
        "Py_mc",
        "Pz_mc",
        "stderr_x",
        "stderr_y",
        "stderr_z",
        "Px_analytic",
        "Py_analytic",
        "Pz_analytic",
        "worst_case_fidelity",
    ]);
    let rows = decimate(ens.len(), r.output.stride);
    for &k in &rows {
        let t = ens.times[k];
        let (m, s, a) = (ens.mean_p[k], ens.stderr_p[k], analytic(t));
        table.push(&[t, m.x, m.y, m.z, s.x, s.y, s.z, a.x, a.y, a.z, worst_case_register_fidelity(kappa, t)]);
    }

    let fitted = if kappa > 0.0 {
        let px: Vec<f64> = ens.mean_p.iter().map(|p| p.x).collect();
        let sx: Vec<f64> = ens.stderr_p.iter().map(|p| p.x).collect();
        log_linear_decay_rate(&ens.times, &px, &sx, DEFAULT_MIN_SNR)
    } else {
        None
    };
    let (max_abs, max_rel) = deviations(&ens, &rows, analytic);
    let pz_drift = ens.mean_p.iter().map(|p| (p.z - r.p0.z).abs()).fold(0.0, f64::max);

    let mut fields = common_fields(r, &plan);
    fields.extend([
        ("command", json!("register-decay")),
        ("expected_rate", quantity(2.0 * kappa, RATE)),
        ("fitted_rate", maybe_quantity(fitted, RATE)),
        ("rate_ratio", maybe_quantity(fitted.map(|f| f / (2.0 * kappa)), DIMENSIONLESS)),
        ("max_abs_mc_minus_analytic", quantity(max_abs, DIMENSIONLESS)),
        ("max_mc_minus_analytic_stderr", maybe_quantity(max_rel, "stderr")),
        ("max_abs_pz_drift", quantity(pz_drift, DIMENSIONLESS)),
    ]);
    let summary = object(fields);
    write_outputs(&r.output.dir, "register_decay", &table, &summary)?;
    Ok(summary)
}

pub fn rotation(r: &Resolved) -> Result<Value, CliError> {
    let omega = r.device.rabi_rate();
    if omega <= 0.0 {
        return Err(CliError::Config("device.b_ac: the rotation needs a drive field > 0".into()));
    }
    let plan = r.plan(omega);
    let ens = run(r, &plan, Mode::Rotation)?;
    let kappa = plan.kappa;
    let params = RotationParams::new(kappa, omega);
    let exact = |t: f64| rotation_polarization_exact(&r.p0, &params, t);
    let approx = |t: f64| rotation_polarization_approx(&r.p0, kappa, omega, t);

    let mut table = Table::new(vec![
        "t",
        "Px_mc",
        "Py_mc",
        "Pz_mc",
        "stderr_x",
        "stderr_y",
        "stderr_z",
        "Px_exact",
        "Py_exact",
        "Pz_exact",
        "Px_approx",
        "Py_approx",
        "Pz_approx",
        "rotation_fidelity",
    ]);
    let rows = decimate(ens.len(), r.output.stride);
    for &k in &rows {
        let t = ens.times[k];
        let (m, s, e, a) = (ens.mean_p[k], ens.stderr_p[k], exact(t), approx(t));
        table.push(&[
            t,
            m.x,
            m.y,
            m.z,
            s.x,
            s.y,
            s.z,
            e.x,
            e.y,
            e.z,
            a.x,
            a.y,
            a.z,
            rotation_fidelity(&r.p0, kappa, t),
        ]);
    }

    let exact_vs_approx = rows
        .iter()
        .map(|&k| exact(ens.times[k]).max_abs_diff(&approx(ens.times[k])))
        .fold(0.0, f64::max);
    let (max_abs, max_rel) = deviations(&ens, &rows, exact);
    let t_final = plan.t_final();
    let gamma = r.device.gamma_of_voltage(r.device.v0()).map_err(|e| CliError::Config(format!("device: {e}")))?;

    let mut fields = common_fields(r, &plan);
    fields.extend([
        ("command", json!("rotation")),
        ("omega_rabi", quantity(omega, "rad/s")),
        ("tau_op", quantity(r.device.tau_op().map_err(|e| CliError::Config(format!("device: {e}")))?, "s")),
        ("tau_ratio", maybe_quantity(r.device.tau_ratio(&r.noise).ok(), DIMENSIONLESS)),
        ("gamma", quantity(gamma, "J/T")),
        ("resonance_frequency", quantity(r.device.resonance_frequency(gamma), "rad/s")),
        ("max_abs_exact_minus_approx", quantity(exact_vs_approx, DIMENSIONLESS)),
        ("max_abs_mc_minus_exact", quantity(max_abs, DIMENSIONLESS)),
        ("max_mc_minus_exact_stderr", maybe_quantity(max_rel, "stderr")),
        ("final_rotation_fidelity", quantity(rotation_fidelity(&r.p0, kappa, t_final), DIMENSIONLESS)),
    ]);
    let summary = object(fields);
    write_outputs(&r.output.dir, "rotation", &table, &summary)?;
    Ok(summary)
}

fn budget_json(b: &ToleranceBudget) -> Value {
    object(vec![
        ("delta", quantity(b.delta, DIMENSIONLESS)),
        ("epsilon_max", quantity(b.epsilon_max, EPSILON_UNIT)),
        ("lambda_max", quantity(b.lambda_max, "s")),
        ("pulse_area_ratio_max", quantity(b.pulse_area_ratio_max, DIMENSIONLESS)),
        ("ratio_bound", quantity(b.ratio_bound, DIMENSIONLESS)),
        ("ratio_bound_linear", quantity(b.ratio_bound_linear, DIMENSIONLESS)),
        ("tau_dec_min", quantity(b.tau_dec_min, "s")),
        ("tau_op", quantity(b.tau_op, "s")),
    ])
}

#[derive(Debug, Clone)]
pub struct BudgetRequest {
    pub delta: f64,
    /// `(lo, hi, points)`.
    pub delta_range: Option<(f64, f64, usize)>,
    pub biases: Vec<f64>,
    pub out: Option<PathBuf>,
}

pub fn budget(device: &DeviceParameters, req: &BudgetRequest) -> Result<Value, CliError> {
    let range = |e: kane_noise::Error| CliError::Config(format!("delta: {e}"));
    let headline = compute_budget(device, req.delta).map_err(range)?;
    let mut fields = vec![
        ("command", json!("budget")),
        ("b_ac", quantity(device.b_ac(), "T")),
        ("b_z", quantity(device.b_z(), "T")),
        ("eta", quantity(device.eta(), "Hz/V")),
        ("v0", quantity(device.v0(), "V")),
        ("budget", budget_json(&headline)),
    ];
    if let Some((lo, hi, n)) = req.delta_range {
        let grid = log_grid(lo, hi, n).map_err(range)?;
        let rows = sweep_delta(device, &grid).map_err(range)?;
        fields.push(("delta_sweep", Value::Array(rows.iter().map(budget_json).collect())));
    }
    if !req.biases.is_empty() {
        let rows = sweep_bias(device, req.delta, &req.biases)
            .map_err(|e| CliError::Config(format!("bias: {e}")))?;
        let rows = rows
            .iter()
            .map(|(v, b)| object(vec![("v0", quantity(*v, "V")), ("budget", budget_json(b))]))
            .collect();
        fields.push(("bias_sweep", Value::Array(rows)));
    }
    let summary = object(fields);
    if let Some(dir) = &req.out {
        write_json(&dir.join("budget.json"), &summary)?;
    }
    Ok(summary)
}

/// Inputs to the self-check suite.
#[derive(Debug, Clone)]
pub struct ValidateRequest {
    pub device: DeviceParameters,
    pub noise: NoiseSpec,
    pub n_traj: usize,
    pub seed: u64,
    /// Scales kappa by this factor in the analytic references only.
    pub analytic_kappa_scale: f64,
}

pub const VALIDATE_TRAJ: usize = 10_000;
pub const VALIDATE_SEED: u64 = 20240101;
/// Default desk-scale dephasing as a fraction of the Rabi rate.
pub const DESK_KAPPA_OVER_OMEGA: f64 = 0.01;
const ORACLE_TOLERANCE: f64 = 1e-8;
const STDERR_MULTIPLE: f64 = 4.0;

impl ValidateRequest {
    pub fn desk() -> Self {
        let device = DeviceParameters::kane();
        let noise = NoiseSpec::from_dephasing_rate(&device, DESK_KAPPA_OVER_OMEGA * device.rabi_rate())
            .expect("desk noise");
        Self {
            device,
            noise,
            n_traj: VALIDATE_TRAJ,
            seed: VALIDATE_SEED,
            analytic_kappa_scale: 1.0,
        }
    }
}

fn check(pass: bool, metric: Value, tolerance: Value) -> Value {
    object(vec![("metric", metric), ("pass", json!(pass)), ("tolerance", tolerance)])
}

fn register_check(req: &ValidateRequest) -> Result<Value, CliError> {
    let kappa = req.device.dephasing_rate(&req.noise);
    let n_steps = 400;
    // 2 kappa t_final = 4
    let t_final = if kappa > 0.0 { 2.0 / kappa } else { 1.0 };
    let plan = Plan {
        kappa,
        omega_rabi: 0.0,
        dt: t_final / n_steps as f64,
        n_steps,
        n_traj: req.n_traj,
        seed: req.seed,
        p0: Polarization::unit_x(),
    };
    let ens = run_ensemble_with_cap(&plan, Mode::Register, DEFAULT_MAX_WORK).map_err(simulation_error)?;
    let kappa_ref = kappa * req.analytic_kappa_scale;
    let mut worst = 0.0f64;
    for ((&t, m), s) in ens.times.iter().zip(&ens.mean_p).zip(&ens.stderr_p) {
        let a = register_polarization(&plan.p0, kappa_ref, t);
        for ((x, y), se) in m.to_array().iter().zip(a.to_array()).zip(s.to_array()) {
            // excess over the allowed band, in stderr units when there is noise
            let excess = (x - y).abs() - 1e-12;
            worst = worst.max(if se > 0.0 { excess / se } else if excess > 0.0 { f64::INFINITY } else { 0.0 });
        }
    }
    Ok(check(
        worst <= STDERR_MULTIPLE,
        quantity(worst, "stderr"),
        quantity(STDERR_MULTIPLE, "stderr"),
    ))
}

fn oracle_check(req: &ValidateRequest) -> Result<Value, CliError> {
    let kappa = req.device.dephasing_rate(&req.noise);
    let omega = req.device.rabi_rate();
    let scale = omega.max(2.0 * kappa);
    let horizon = if scale > 0.0 { 5.0 / scale } else { 1.0 };
    let times: Vec<f64> = (0..=50).map(|k| horizon * k as f64 / 50.0).collect();
    let p0 = Polarization::new(1.0, 1.0, 1.0).scale(1.0 / 3f64.sqrt());
    let step = if scale > 0.0 { 1e-3 / scale } else { 1e-3 };
    let reference = master_equation_trajectory(&p0, kappa, omega, &times, step)
        .map_err(|e| CliError::Config(format!("noise: {e}")))?;
    let params = RotationParams::new(kappa * req.analytic_kappa_scale, omega);
    let err = times
        .iter()
        .zip(&reference)
        .map(|(&t, p)| rotation_polarization_exact(&p0, &params, t).max_abs_diff(p))
        .fold(0.0, f64::max);
    Ok(check(
        err <= ORACLE_TOLERANCE,
        quantity(err, DIMENSIONLESS),
        quantity(ORACLE_TOLERANCE, DIMENSIONLESS),
    ))
}

/// Kane device at delta = 1e-5.
pub const BUDGET_RATIO_REFERENCE: f64 = 2.000020000266671e-5;
pub const BUDGET_PULSE_AREA_REFERENCE: f64 = 1.3797008253125258e-6;
const BUDGET_TOLERANCE: f64 = 1e-9;

fn budget_check() -> Result<Value, CliError> {
    let b = compute_budget(&DeviceParameters::kane(), 1e-5).map_err(|e| CliError::Config(e.to_string()))?;
    let rel = ((b.ratio_bound - BUDGET_RATIO_REFERENCE) / BUDGET_RATIO_REFERENCE)
        .abs()
        .max(((b.pulse_area_ratio_max - BUDGET_PULSE_AREA_REFERENCE) / BUDGET_PULSE_AREA_REFERENCE).abs());
    Ok(check(
        rel <= BUDGET_TOLERANCE,
        quantity(rel, "relative"),
        quantity(BUDGET_TOLERANCE, "relative"),
    ))
}

/// Runs every check; `Err(Check)` carries nothing beyond the printed report.
pub fn validate(req: &ValidateRequest) -> Result<Value, CliError> {
    let checks = object(vec![
        ("budget_regression", budget_check()?),
        ("register_mc_vs_analytic", register_check(req)?),
        ("rotation_exact_vs_oracle", oracle_check(req)?),
    ]);
    let pass = checks
        .as_object()
        .expect("object")
        .values()
        .all(|c| c["pass"] == json!(true));
    Ok(object(vec![
        ("checks", checks),
        ("command", json!("validate")),
        ("kappa", quantity(req.device.dephasing_rate(&req.noise), RATE)),
        ("n_traj", count(req.n_traj)),
        ("omega_rabi", quantity(req.device.rabi_rate(), "rad/s")),
        ("pass", json!(pass)),
    ]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn desk_validate_passes_and_fault_fails() {
        let mut req = ValidateRequest::desk();
        req.n_traj = 2000;
        assert_eq!(validate(&req).unwrap()["pass"], json!(true));
        req.analytic_kappa_scale = 1.1;
        let report = validate(&req).unwrap();
        assert_eq!(report["pass"], json!(false));
        assert_eq!(report["checks"]["budget_regression"]["pass"], json!(true));
        assert_eq!(report["checks"]["rotation_exact_vs_oracle"]["pass"], json!(false));
    }

    #[test]
    fn budget_sweeps_are_attached() {
        let req = BudgetRequest {
            delta: 1e-5,
            delta_range: Some((1e-6, 1e-4, 3)),
            biases: vec![0.5, 1.0],
            out: None,
        };
        let v = budget(&DeviceParameters::kane(), &req).unwrap();
        assert_eq!(v["delta_sweep"].as_array().unwrap().len(), 3);
        assert_eq!(v["bias_sweep"][1]["budget"], v["budget"]);
    }
}
