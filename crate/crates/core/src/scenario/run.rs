use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::assembly::{assemble_system_with, ProblemSpec};
use crate::coefficient::CoefficientFunction;
use crate::discretization::{build_grid, Grading, QuadratureSettings};
use crate::error::{Error, Result};
use crate::scenario::config::{render, CoefficientSpec, Command, GradingSpec, ScenarioConfig};
use crate::scenario::registry::{initial_field, source_fn};
use crate::solver::{dense_spectrum, evolve};
use crate::verification::{default_green_battery, manufactured_convergence, ManufacturedCase, BATTERY_TOLERANCE};

pub const STATUS_OK: i32 = 0;
pub const STATUS_VIOLATION: i32 = 2;

/// Relative slack allowed in the step-to-step pivot norm comparison.
const CONTRACTION_SLACK: f64 = 1e-10;
/// Eigenvalues below `-NEGATIVITY_TOL * max|S|` count as negative.
const NEGATIVITY_TOL: f64 = 1e-9;

/// Outcome of one scenario run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub summary: Vec<String>,
    /// Names of the violated properties; empty on success.
    pub violations: Vec<String>,
    pub files: Vec<PathBuf>,
    pub status: i32,
}

fn coefficient(cfg: &ScenarioConfig) -> Result<CoefficientFunction<f64>> {
    match cfg.coefficient {
        CoefficientSpec::Power { alpha } => CoefficientFunction::power_law(alpha, cfg.x0),
        CoefficientSpec::Constant { value } => CoefficientFunction::constant(value),
    }
}

fn grading(cfg: &ScenarioConfig) -> Grading<f64> {
    match cfg.grading {
        GradingSpec::Uniform => Grading::Uniform,
        GradingSpec::Geometric { ratio, layers } => Grading::GeometricTowardX0 { ratio, layers },
    }
}

fn registry_error(key: &str, reason: String) -> Error {
    Error::Config(crate::scenario::ConfigError::Invalid {
        line: 0,
        key: key.into(),
        reason,
    })
}

struct Outcome {
    csv_name: &'static str,
    csv: String,
    summary: Vec<String>,
    violations: Vec<String>,
}

fn solve(cfg: &ScenarioConfig) -> Result<Outcome> {
    let a = coefficient(cfg)?;
    let grid = build_grid(cfg.n_elements, a.x0(), grading(cfg))?;
    let initial = initial_field(&cfg.initial, a.x0()).map_err(|r| registry_error("initial", r))?;
    let source = source_fn(&cfg.source, a.x0()).map_err(|r| registry_error("source", r))?;
    let mut spec = ProblemSpec::new(cfg.form, a, initial, cfg.horizon, cfg.dt, cfg.theta)?;
    spec.source = source;
    let system = assemble_system_with(&spec, &grid, QuadratureSettings::with_order(cfg.rule_order))?;
    let traj = evolve(&spec, &system)?;

    let mut csv = String::from("step,time,pivot_norm,energy\n");
    for (n, ((t, p), e)) in traj.times.iter().zip(&traj.pivot_norms).zip(&traj.energies).enumerate() {
        let _ = writeln!(csv, "{n},{t:.16e},{p:.16e},{e:.16e}");
    }
    let worst = traj.max_contraction_violation();
    let mut violations = Vec::new();
    if spec.source.is_none() && cfg.theta >= 0.5 && worst > CONTRACTION_SLACK {
        violations.push(format!("contraction: pivot norm grew by relative {worst:.3e}"));
    }
    if traj.pivot_norms.iter().chain(&traj.energies).any(|v| !v.is_finite()) {
        violations.push("finiteness: non-finite norm or energy".into());
    }
    let summary = vec![
        format!("case: {}", spec.case()),
        format!("steps: {}", traj.times.len() - 1),
        format!("initial pivot norm: {:.16e}", traj.pivot_norms[0]),
        format!(
            "final pivot norm: {:.16e}",
            traj.pivot_norms.last().copied().unwrap_or(0.0)
        ),
        format!("max contraction violation: {worst:.16e}"),
    ];
    Ok(Outcome {
        csv_name: "trajectory.csv",
        csv,
        summary,
        violations,
    })
}

fn spectrum(cfg: &ScenarioConfig) -> Result<Outcome> {
    let a = coefficient(cfg)?;
    let grid = build_grid(cfg.n_elements, a.x0(), grading(cfg))?;
    let spec = ProblemSpec::stationary(cfg.form, a)?;
    let system = assemble_system_with(&spec, &grid, QuadratureSettings::with_order(cfg.rule_order))?;
    let eig = dense_spectrum(&system, cfg.eigen_count)?;
    let mut csv = String::from("index,eigenvalue\n");
    for (i, l) in eig.iter().enumerate() {
        let _ = writeln!(csv, "{},{:.16e}", i + 1, l);
    }
    let min = eig.first().copied().unwrap_or(0.0);
    let floor = -NEGATIVITY_TOL * system.stiffness().max_abs();
    let mut violations = Vec::new();
    if min < floor {
        violations.push(format!("non-negativity: eigenvalue {min:.3e} below {floor:.3e}"));
    }
    Ok(Outcome {
        csv_name: "spectrum.csv",
        csv,
        summary: vec![format!("case: {}", spec.case()), format!("min eigenvalue: {min:.16e}")],
        violations,
    })
}

fn converge(cfg: &ScenarioConfig) -> Result<Outcome> {
    let a = coefficient(cfg)?;
    let case = ManufacturedCase::polynomial_decay(cfg.form, a)?;
    let table = manufactured_convergence(&case, &cfg.levels, cfg.theta, cfg.dt, cfg.horizon)?;
    let mut violations = Vec::new();
    if !table.errors.iter().all(|e| e.is_finite()) {
        violations.push("finiteness: non-finite error".into());
    } else if !table.strictly_decreasing() {
        violations.push("refinement: errors not strictly decreasing".into());
    }
    let orders: Vec<String> = table.orders.iter().map(|o| format!("{o:.3}")).collect();
    Ok(Outcome {
        csv_name: "convergence.csv",
        csv: table.to_csv(),
        summary: vec![
            format!("case: {}", case.bc().labels),
            format!("observed orders: {}", orders.join(", ")),
        ],
        violations,
    })
}

fn greencheck(cfg: &ScenarioConfig) -> Result<Outcome> {
    let battery = default_green_battery::<f64>(cfg.rule_order)?;
    let mut csv = String::from("case,residual\n");
    let mut violations = Vec::new();
    let mut worst = 0.0f64;
    for c in &battery {
        let _ = writeln!(csv, "{},{:.16e}", c.name, c.residual);
        worst = worst.max(c.residual);
        if !(c.residual <= BATTERY_TOLERANCE) {
            violations.push(format!("gauss-green: {} residual {:.3e}", c.name, c.residual));
        }
    }
    Ok(Outcome {
        csv_name: "residuals.csv",
        csv,
        summary: vec![
            format!("cases: {}", battery.len()),
            format!("max residual: {worst:.16e}"),
        ],
        violations,
    })
}

/// Runs the configured command and writes its CSV and `summary.txt` into
/// `out` (or the configured `output_dir`, or `./output`).
pub fn run_scenario(cfg: &ScenarioConfig, out: Option<&Path>) -> Result<RunReport> {
    let outcome = match cfg.command {
        Command::Solve => solve(cfg)?,
        Command::Spectrum => spectrum(cfg)?,
        Command::Converge => converge(cfg)?,
        Command::GreenCheck => greencheck(cfg)?,
    };
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("output"));
    fs::create_dir_all(&dir)?;
    let csv_path = dir.join(outcome.csv_name);
    fs::write(&csv_path, &outcome.csv)?;

    let status = if outcome.violations.is_empty() {
        STATUS_OK
    } else {
        STATUS_VIOLATION
    };
    let mut text = String::from("# config\n");
    text.push_str(&render(cfg));
    text.push_str("# results\n");
    for line in &outcome.summary {
        let _ = writeln!(text, "{line}");
    }
    for v in &outcome.violations {
        let _ = writeln!(text, "violated {v}");
    }
    let _ = writeln!(text, "status: {status}");
    let summary_path = dir.join("summary.txt");
    fs::write(&summary_path, &text)?;

    Ok(RunReport {
        config: cfg.clone(),
        summary: outcome.summary,
        violations: outcome.violations,
        files: vec![csv_path, summary_path],
        status,
    })
}
