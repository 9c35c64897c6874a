//! Configuration-driven scenarios: closure solve, profile build, the
//! coupled PDE + shift run, diagnostics emission (NDJSON records, CSV
//! snapshots, CSV summary) and parameter sweeps.

use crate::diagnostics::{
    assemble_record_with_frame, entropy_dissipation_check, DiagnosticsError, DiagnosticsRecord,
    DissipationReport, ShiftedFrame,
};
use crate::hugoniot::{
    impermeable_closure, left_state_on_s3, outflow_closure, HugoniotError, ShockData,
};
use crate::profile::{build_profile, ProfileError, ProfileOptions, ShockProfile};
use crate::shift::{advance_shift, shift_rhs, shift_rhs_from_frame, truncation_estimate, ShiftState};
use crate::solver::{
    initialize, AdvectionScheme, BoundaryKind, BoundarySpec, Field, Grid1D, HalfLineSolver,
    SolverError,
};
use crate::thermo::{GasParams, State};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Hugoniot(#[from] HugoniotError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// Exit code contract: 1 for validation problems, 2 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config(_) => 1,
            ScenarioError::Io(_) => 1,
            _ => 2,
        }
    }
}

fn config_err(msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Config(msg.into())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShockSection {
    pub boundary: BoundaryKind,
    pub rho_plus: f64,
    pub u_plus: f64,
    pub theta_plus: f64,
    /// Curve parameter for the outflow closure; forbidden for the
    /// impermeable closure, where the left state is fully derived.
    #[serde(default)]
    pub rho_minus: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DomainSection {
    pub beta: f64,
    /// Domain length; omit for the automatic `beta + sigma T + 60/delta`.
    pub length: Option<f64>,
    pub max_nodes: usize,
    /// Upper bound on the grid spacing (combined with `0.5/delta`).
    pub h_cap: f64,
}

impl Default for DomainSection {
    fn default() -> Self {
        DomainSection { beta: 400.0, length: None, max_nodes: 8192, h_cap: 0.15 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_final: f64,
    pub cfl: f64,
    pub cfl_diff: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { t_final: 200.0, cfl: 0.4, cfl_diff: 0.25 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    /// Stencil for the density advection term. Upwind is the robust
    /// default; central keeps smooth resolved runs second order so long
    /// horizons do not sit on the first-order truncation floor.
    pub advection: AdvectionScheme,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { advection: AdvectionScheme::Upwind }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationShape {
    None,
    Gaussian,
    RandomBumps,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PerturbationSection {
    pub shape: PerturbationShape,
    pub amplitude: f64,
    /// Defaults to `beta` (a bump sitting on the initial shock location).
    pub center: Option<f64>,
    pub width: f64,
}

impl Default for PerturbationSection {
    fn default() -> Self {
        PerturbationSection {
            shape: PerturbationShape::None,
            amplitude: 0.01,
            center: None,
            width: 5.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// NDJSON stream of diagnostics records, one per line.
    pub records: Option<String>,
    pub summary: Option<String>,
    /// Times at which full (x, rho, u, theta) CSV snapshots are dumped.
    pub snapshots: Vec<f64>,
    pub snapshot_prefix: String,
    /// Record cadence in steps; the initial and final states are always
    /// recorded.
    pub record_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            records: Some("diagnostics.ndjson".to_string()),
            summary: Some("summary.csv".to_string()),
            snapshots: Vec::new(),
            snapshot_prefix: "snapshot".to_string(),
            record_every: 20,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    pub compat_tol: f64,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 0, compat_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub gas: GasParams,
    pub shock: ShockSection,
    #[serde(default)]
    pub domain: DomainSection,
    #[serde(default)]
    pub time: TimeSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub perturbation: PerturbationSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub run: RunSection,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ScenarioError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ScenarioError> {
        let text = fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    /// Parses with `key=value` overrides (dotted paths into the TOML
    /// tree) applied before deserialization.
    pub fn from_toml_with_overrides(
        text: &str,
        overrides: &[String],
    ) -> Result<Self, ScenarioError> {
        let mut value: toml::Value =
            toml::from_str(text).map_err(|e| config_err(e.to_string()))?;
        for ov in overrides {
            apply_override(&mut value, ov)?;
        }
        let cfg: ScenarioConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        self.gas
            .validate()
            .map_err(|e| config_err(format!("gas: {e}")))?;
        let s = &self.shock;
        if !(s.rho_plus > 0.0) {
            return Err(config_err(format!("shock.rho_plus = {} must be > 0", s.rho_plus)));
        }
        if !(s.theta_plus > 0.0) {
            return Err(config_err(format!(
                "shock.theta_plus = {} must be > 0",
                s.theta_plus
            )));
        }
        if !(s.u_plus < 0.0) {
            return Err(config_err(format!(
                "shock.u_plus = {} must be negative for an outgoing 3-shock",
                s.u_plus
            )));
        }
        let c_plus = (self.gas.gamma * self.gas.r * s.theta_plus).sqrt();
        match s.boundary {
            BoundaryKind::Outflow => {
                if s.u_plus < -c_plus {
                    return Err(config_err(format!(
                        "shock.u_plus = {} is supersonic (c+ = {c_plus}); the outflow \
                         problem needs the far field in the subsonic closure",
                        s.u_plus
                    )));
                }
                let rm = s.rho_minus.ok_or_else(|| {
                    config_err("shock.rho_minus is required for the outflow closure")
                })?;
                if !(rm >= s.rho_plus) {
                    return Err(config_err(format!(
                        "shock.rho_minus = {rm} must be >= shock.rho_plus on the 3-branch"
                    )));
                }
            }
            BoundaryKind::Impermeable => {
                if s.rho_minus.is_some() {
                    return Err(config_err(
                        "shock.rho_minus is derived by the impermeable closure; remove it",
                    ));
                }
            }
        }
        let d = &self.domain;
        if !(d.beta > 0.0) {
            return Err(config_err(format!("domain.beta = {} must be > 0", d.beta)));
        }
        if let Some(l) = d.length {
            if !(l > 0.0) {
                return Err(config_err(format!("domain.length = {l} must be > 0")));
            }
        }
        if d.max_nodes < 16 {
            return Err(config_err(format!(
                "domain.max_nodes = {} must be at least 16",
                d.max_nodes
            )));
        }
        if !(d.h_cap > 0.0) {
            return Err(config_err(format!("domain.h_cap = {} must be > 0", d.h_cap)));
        }
        let t = &self.time;
        if !(t.t_final > 0.0) {
            return Err(config_err(format!("time.t_final = {} must be > 0", t.t_final)));
        }
        if !(t.cfl > 0.0 && t.cfl <= 1.0) {
            return Err(config_err(format!("time.cfl = {} must be in (0, 1]", t.cfl)));
        }
        if !(t.cfl_diff > 0.0 && t.cfl_diff <= 0.5) {
            return Err(config_err(format!(
                "time.cfl_diff = {} must be in (0, 0.5]",
                t.cfl_diff
            )));
        }
        let p = &self.perturbation;
        if !(p.amplitude >= 0.0) {
            return Err(config_err(format!(
                "perturbation.amplitude = {} must be >= 0",
                p.amplitude
            )));
        }
        if !(p.width > 0.0) {
            return Err(config_err(format!(
                "perturbation.width = {} must be > 0",
                p.width
            )));
        }
        if self.output.record_every == 0 {
            return Err(config_err("output.record_every must be at least 1"));
        }
        Ok(())
    }

    /// Solves the boundary closure for this scenario.
    pub fn resolve_shock(&self) -> Result<ShockData, ScenarioError> {
        let right = State::new(self.shock.rho_plus, self.shock.u_plus, self.shock.theta_plus)
            .map_err(|e| config_err(format!("shock right state: {e}")))?;
        match self.shock.boundary {
            BoundaryKind::Outflow => {
                let rm = self.shock.rho_minus.expect("validated");
                // parameterize the curve, then run the closure on the
                // boundary pair as the on-curve consistency gate
                let on_curve = left_state_on_s3(&self.gas, &right, rm)?;
                let shock =
                    outflow_closure(&self.gas, &right, on_curve.left.u, on_curve.left.theta, 1e-8)?;
                if (shock.left.rho - rm).abs() > 1e-6 * rm {
                    return Err(config_err(format!(
                        "outflow closure disagrees with the curve parameter: {} vs {rm}",
                        shock.left.rho
                    )));
                }
                Ok(shock)
            }
            BoundaryKind::Impermeable => Ok(impermeable_closure(&self.gas, &right)?),
        }
    }
}

/// Sets `section.key = value` inside a parsed TOML tree. The value is
/// parsed as TOML (so numbers and booleans work); bare words fall back to
/// strings.
pub fn apply_override(root: &mut toml::Value, spec: &str) -> Result<(), ScenarioError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| config_err(format!("override '{spec}' is not key=value")))?;
    let raw = raw.trim();
    let parsed: toml::Value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut table) => table.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let mut node = root;
    let parts: Vec<&str> = path.trim().split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| config_err(format!("override path '{path}' is not a table")))?;
        if i == parts.len() - 1 {
            table.insert(part.to_string(), parsed);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert(toml::Value::Table(Default::default()));
    }
    Ok(())
}

/// End-of-run facts: norms, shift behavior, boundary-term statistics and
/// the dissipation report.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioSummary {
    pub boundary: BoundaryKind,
    pub delta: f64,
    pub sigma: f64,
    pub beta: f64,
    pub length: f64,
    pub nodes: usize,
    pub steps: usize,
    pub t_final: f64,
    pub sup_err_initial: f64,
    pub sup_err_peak: f64,
    pub sup_err_post_transient_peak: f64,
    pub sup_err_final: f64,
    pub l2_err_final: f64,
    pub x_final: f64,
    pub xdot_final: f64,
    /// mean |Xdot| over the last quarter divided by the quarter before
    /// it; below 1 means the shift velocity keeps decaying
    pub xdot_trend_ratio: f64,
    /// worst relative defect of `Xdot = -(M/delta)(Y1+Y2+Y3)` over all steps
    pub identity_max_rel: f64,
    /// fitted projection constant: largest |Xdot| / sup_err over the run
    pub xdot_over_sup_max: f64,
    /// steps on which |X(t)| exceeded (sigma/2) t
    pub shift_bound_violations: usize,
    /// largest signed P1 over all steps
    pub p1_max: f64,
    /// time average of |P4| + |P5|
    pub p45_time_avg: f64,
    pub truncation_estimate: f64,
    pub dissipation: Option<DissipationReport>,
}

/// Fully resolved scenario ready to run.
pub struct PreparedScenario {
    pub config: ScenarioConfig,
    pub shock: ShockData,
    pub profile: ShockProfile,
    pub grid: Grid1D,
    pub solver: HalfLineSolver,
}

pub fn prepare(config: &ScenarioConfig) -> Result<PreparedScenario, ScenarioError> {
    config.validate()?;
    let shock = config.resolve_shock()?;
    let profile = build_profile(&shock, &ProfileOptions::default())?;
    let d = &config.domain;
    let length = d
        .length
        .unwrap_or(d.beta + shock.sigma * config.time.t_final + 60.0 / shock.delta);
    let h_target = d.h_cap.min(0.5 / shock.delta);
    let nodes = (length / h_target).ceil() as usize + 1;
    if nodes > d.max_nodes {
        return Err(config_err(format!(
            "resolving h <= {h_target} over length {length} needs {nodes} nodes, more than \
             domain.max_nodes = {}; raise max_nodes or h_cap",
            d.max_nodes
        )));
    }
    let grid = Grid1D::new(length, nodes)?;
    let trunc = truncation_estimate(&profile, d.beta, config.time.t_final, length);
    if trunc > 1e-10 {
        return Err(config_err(format!(
            "domain truncation would contribute {trunc:.3e} to the shift integral \
             (limit 1e-10); enlarge the domain or beta"
        )));
    }
    let bc = BoundarySpec::new(config.shock.boundary, shock.left.u, shock.left.theta)?;
    let mut solver = HalfLineSolver::new(config.gas, grid, bc, shock.right)?;
    solver.scheme = config.solver.advection;
    solver.cfl = config.time.cfl;
    solver.cfl_diff = config.time.cfl_diff;
    Ok(PreparedScenario { config: config.clone(), shock, profile, grid, solver })
}

fn perturbation_fn(
    config: &ScenarioConfig,
) -> Option<Box<dyn Fn(f64) -> (f64, f64, f64) + Sync>> {
    let p = &config.perturbation;
    let center = p.center.unwrap_or(config.domain.beta);
    match p.shape {
        PerturbationShape::None => None,
        PerturbationShape::Gaussian => {
            let (amp, width) = (p.amplitude, p.width);
            Some(Box::new(move |x: f64| {
                let z = (x - center) / width;
                (0.0, amp * (-z * z).exp(), 0.0)
            }))
        }
        PerturbationShape::RandomBumps => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.run.seed);
            let bumps: Vec<(f64, f64, f64)> = (0..6)
                .map(|_| {
                    (
                        p.amplitude * rng.gen_range(-1.0..1.0f64),
                        center + 3.0 * p.width * rng.gen_range(-1.0..1.0f64),
                        p.width * rng.gen_range(0.5..1.0f64),
                    )
                })
                .collect();
            Some(Box::new(move |x: f64| {
                let mut du = 0.0;
                for &(a, c, w) in &bumps {
                    let z = (x - c) / w;
                    du += a * (-z * z).exp();
                }
                (0.0, du, 0.0)
            }))
        }
    }
}

struct Emitter {
    records: Option<BufWriter<fs::File>>,
    out_dir: PathBuf,
    snapshot_prefix: String,
}

impl Emitter {
    fn new(config: &ScenarioConfig, out_dir: &Path) -> Result<Self, ScenarioError> {
        fs::create_dir_all(out_dir)?;
        let records = match &config.output.records {
            Some(name) => Some(BufWriter::new(fs::File::create(out_dir.join(name))?)),
            None => None,
        };
        Ok(Emitter {
            records,
            out_dir: out_dir.to_path_buf(),
            snapshot_prefix: config.output.snapshot_prefix.clone(),
        })
    }

    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<(), ScenarioError> {
        if let Some(w) = &mut self.records {
            serde_json::to_writer(&mut *w, rec).map_err(|e| config_err(e.to_string()))?;
            writeln!(w)?;
        }
        Ok(())
    }

    fn snapshot(&mut self, grid: &Grid1D, field: &Field, index: usize) -> Result<(), ScenarioError> {
        let path = self
            .out_dir
            .join(format!("{}_{index:03}.csv", self.snapshot_prefix));
        let mut w = BufWriter::new(fs::File::create(path)?);
        writeln!(w, "x,rho,u,theta")?;
        for i in 0..grid.n {
            writeln!(
                w,
                "{:.17e},{:.17e},{:.17e},{:.17e}",
                grid.x(i),
                field.rho[i],
                field.u[i],
                field.theta[i]
            )?;
        }
        Ok(())
    }

    fn finish(mut self) -> Result<(), ScenarioError> {
        if let Some(w) = &mut self.records {
            w.flush()?;
        }
        Ok(())
    }
}

fn write_summary(
    path: &Path,
    summary: &ScenarioSummary,
) -> Result<(), ScenarioError> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    writeln!(w, "key,value")?;
    let kind = match summary.boundary {
        BoundaryKind::Outflow => "outflow",
        BoundaryKind::Impermeable => "impermeable",
    };
    writeln!(w, "boundary,{kind}")?;
    let pairs: Vec<(&str, f64)> = vec![
        ("delta", summary.delta),
        ("sigma", summary.sigma),
        ("beta", summary.beta),
        ("length", summary.length),
        ("nodes", summary.nodes as f64),
        ("steps", summary.steps as f64),
        ("t_final", summary.t_final),
        ("sup_err_initial", summary.sup_err_initial),
        ("sup_err_peak", summary.sup_err_peak),
        ("sup_err_post_transient_peak", summary.sup_err_post_transient_peak),
        ("sup_err_final", summary.sup_err_final),
        ("l2_err_final", summary.l2_err_final),
        ("x_final", summary.x_final),
        ("xdot_final", summary.xdot_final),
        ("xdot_trend_ratio", summary.xdot_trend_ratio),
        ("identity_max_rel", summary.identity_max_rel),
        ("xdot_over_sup_max", summary.xdot_over_sup_max),
        ("shift_bound_violations", summary.shift_bound_violations as f64),
        ("p1_max", summary.p1_max),
        ("p45_time_avg", summary.p45_time_avg),
        ("truncation_estimate", summary.truncation_estimate),
    ];
    for (k, v) in pairs {
        writeln!(w, "{k},{v:.17e}")?;
    }
    if let Some(d) = &summary.dissipation {
        writeln!(w, "dissipation_c_star,{:.17e}", d.c_star)?;
        writeln!(w, "dissipation_fraction_ok,{:.17e}", d.fraction_ok)?;
        writeln!(w, "dissipation_violations,{}", d.violations)?;
        writeln!(w, "dissipation_gronwall_ok,{}", d.gronwall_ok)?;
    }
    Ok(())
}

/// Runs a prepared scenario, emitting into `out_dir`, and returns the
/// summary together with the per-step record series (files receive every
/// `record_every`-th record; the in-memory series carries every step so
/// the dissipation balance is checked per timestep).
pub fn run_prepared(
    prepared: &PreparedScenario,
    out_dir: &Path,
) -> Result<(ScenarioSummary, Vec<DiagnosticsRecord>), ScenarioError> {
    let config = &prepared.config;
    let gas = &config.gas;
    let grid = &prepared.grid;
    let profile = &prepared.profile;
    let solver = &prepared.solver;
    let beta = config.domain.beta;
    let t_final = config.time.t_final;
    let shock_left = prepared.shock.left;

    let pert = perturbation_fn(config);
    let pert_ref: Option<&dyn Fn(f64) -> (f64, f64, f64)> =
        pert.as_ref().map(|b| b.as_ref() as &dyn Fn(f64) -> (f64, f64, f64));
    let compat_tol = config.run.compat_tol.max(1e-14);
    let mut field = initialize(grid, profile, beta, pert_ref, compat_tol)?;

    let mut shift = ShiftState::new(profile, beta);
    let m_const = shift.m_const;
    let delta = shift.delta;

    let mut emitter = Emitter::new(config, out_dir)?;
    let mut records: Vec<DiagnosticsRecord> = Vec::new();

    let frame0 = ShiftedFrame::build(profile, grid, field.t, shift.x, beta);
    shift.xdot = shift_rhs_from_frame(gas, grid, &field, &frame0, m_const, delta);
    let rec0 =
        assemble_record_with_frame(gas, grid, &field, &frame0, &shock_left, shift.x, shift.xdot);
    emitter.record(&rec0)?;
    records.push(rec0);

    let mut snapshots: Vec<f64> = config.output.snapshots.clone();
    snapshots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    snapshots.retain(|&t| t <= t_final);
    let mut snap_idx = 0usize;
    if snapshots.first().is_some_and(|&t| t <= 0.0) {
        emitter.snapshot(grid, &field, 0)?;
        snap_idx = 1;
    }

    let mut steps = 0usize;
    let mut identity_max_rel = 0.0f64;
    let mut xdot_over_sup_max = 0.0f64;
    let mut shift_bound_violations = 0usize;
    let mut p1_max = f64::NEG_INFINITY;
    let mut p45_sum = 0.0f64;
    let mut sup_peak = records[0].sup_err;
    let mut sup_post_peak = 0.0f64;
    let transient = 0.05 * t_final;

    while field.t < t_final * (1.0 - 1e-12) {
        let mut dt = solver.max_dt(&field).min(t_final - field.t);
        if snap_idx < snapshots.len() {
            let next_snap = snapshots[snap_idx];
            if next_snap > field.t {
                dt = dt.min(next_snap - field.t);
            }
        }
        let k1x = shift.xdot;
        let (mid, next) = solver.step_with_stages(&field, dt, None)?;
        let x_pred = shift.x + dt * k1x;
        let k2x = shift_rhs(gas, grid, &mid, profile, x_pred, beta, m_const);
        shift = advance_shift(&shift, k1x, k2x, dt);
        field = next;
        steps += 1;

        // fresh evaluation at the new time level; it doubles as the first
        // stage of the next step
        let frame = ShiftedFrame::build(profile, grid, field.t, shift.x, beta);
        shift.xdot = shift_rhs_from_frame(gas, grid, &field, &frame, m_const, delta);

        let rec = assemble_record_with_frame(
            gas, grid, &field, &frame, &shock_left, shift.x, shift.xdot,
        );

        // shift identity: the independently summed Y-parts must reproduce
        // the fused shift velocity
        let rhs = -(m_const / delta) * (rec.y[0] + rec.y[1] + rec.y[2]);
        let resid = (shift.xdot - rhs).abs();
        if resid > 0.0 {
            let scale = shift
                .xdot
                .abs()
                .max(m_const / delta * (rec.y[0].abs() + rec.y[1].abs() + rec.y[2].abs()));
            if scale > 0.0 {
                identity_max_rel = identity_max_rel.max(resid / scale);
            }
        }

        if field.t > 1.0 && shift.x.abs() > 0.5 * prepared.shock.sigma * field.t {
            shift_bound_violations += 1;
        }

        p1_max = p1_max.max(rec.p[0]);
        p45_sum += (rec.p[3].abs() + rec.p[4].abs()) * dt;
        if rec.sup_err > 1e-13 {
            xdot_over_sup_max = xdot_over_sup_max.max(shift.xdot.abs() / rec.sup_err);
        }
        sup_peak = sup_peak.max(rec.sup_err);
        if rec.t >= transient {
            sup_post_peak = sup_post_peak.max(rec.sup_err);
        }

        let record_now = steps % config.output.record_every == 0
            || field.t >= t_final * (1.0 - 1e-12);
        if record_now {
            emitter.record(&rec)?;
        }
        records.push(rec);

        if snap_idx < snapshots.len() && field.t >= snapshots[snap_idx] * (1.0 - 1e-12) {
            emitter.snapshot(grid, &field, snap_idx)?;
            snap_idx += 1;
        }
    }
    emitter.finish()?;

    let last = records.last().expect("at least the initial record");
    let dissipation = if records.len() >= 8 {
        Some(entropy_dissipation_check(&records, m_const, delta, 1e-3, 1e-12)?)
    } else {
        None
    };

    // |Xdot| trend over the last half of the run, quarter against quarter
    let mean_abs_xdot = |lo: f64, hi: f64| -> f64 {
        let vals: Vec<f64> = records
            .iter()
            .filter(|r| r.t >= lo && r.t < hi)
            .map(|r| r.xdot.abs())
            .collect();
        if vals.is_empty() {
            f64::NAN
        } else {
            vals.iter().sum::<f64>() / vals.len() as f64
        }
    };
    let q3 = mean_abs_xdot(0.5 * t_final, 0.75 * t_final);
    let q4 = mean_abs_xdot(0.75 * t_final, t_final + 1.0);
    let xdot_trend_ratio = q4 / q3;

    let summary = ScenarioSummary {
        boundary: config.shock.boundary,
        delta,
        sigma: prepared.shock.sigma,
        beta,
        length: grid.length,
        nodes: grid.n,
        steps,
        t_final: field.t,
        sup_err_initial: records[0].sup_err,
        sup_err_peak: sup_peak,
        sup_err_post_transient_peak: sup_post_peak,
        sup_err_final: last.sup_err,
        l2_err_final: last.l2_err,
        x_final: shift.x,
        xdot_final: shift.xdot,
        xdot_trend_ratio,
        identity_max_rel,
        xdot_over_sup_max,
        shift_bound_violations,
        p1_max,
        p45_time_avg: p45_sum / field.t.max(1e-300),
        truncation_estimate: truncation_estimate(profile, beta, t_final, grid.length),
        dissipation,
    };
    if let Some(name) = &config.output.summary {
        write_summary(&out_dir.join(name), &summary)?;
    }
    Ok((summary, records))
}

/// Convenience wrapper: prepare + run.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
) -> Result<(ScenarioSummary, Vec<DiagnosticsRecord>), ScenarioError> {
    let prepared = prepare(config)?;
    run_prepared(&prepared, out_dir)
}

#[derive(Debug, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub summary: Option<ScenarioSummary>,
    pub error: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub param: String,
    pub points: Vec<SweepPoint>,
    /// log-log slopes of positive summary metrics against the parameter,
    /// when every point succeeded
    pub slopes: Vec<(String, f64)>,
}

/// Runs the scenario once per parameter value (failures are recorded and
/// the sweep continues) and fits scaling exponents of the headline
/// metrics against the parameter. Points run concurrently, one owned
/// simulation per thread with its own output directory; the report and
/// the sweep table are merged single-threaded afterwards.
pub fn sweep(
    base: &str,
    param: &str,
    values: &[f64],
    out_dir: &Path,
) -> Result<SweepReport, ScenarioError> {
    let points: Vec<SweepPoint> = std::thread::scope(|scope| {
        let handles: Vec<_> = values
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let point_dir = out_dir.join(format!("point_{k:02}"));
                scope.spawn(move || {
                    let ov = vec![format!("{param}={v}")];
                    let outcome = ScenarioConfig::from_toml_with_overrides(base, &ov)
                        .and_then(|cfg| run_scenario(&cfg, &point_dir));
                    match outcome {
                        Ok((summary, _)) => SweepPoint {
                            value: v,
                            summary: Some(summary),
                            error: None,
                        },
                        Err(e) => SweepPoint {
                            value: v,
                            summary: None,
                            error: Some(e.to_string()),
                        },
                    }
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    let mut slopes = Vec::new();
    if points.iter().all(|p| p.summary.is_some()) && values.iter().all(|&v| v > 0.0) {
        let metric = |name: &str, f: &dyn Fn(&ScenarioSummary) -> f64| -> Option<(String, f64)> {
            let ys: Vec<f64> = points
                .iter()
                .map(|p| f(p.summary.as_ref().unwrap()))
                .collect();
            if ys.iter().all(|&y| y > 0.0) && ys.len() >= 2 {
                Some((name.to_string(), crate::fitting::log_log_slope(values, &ys)))
            } else {
                None
            }
        };
        for item in [
            metric("sup_err_final", &|s: &ScenarioSummary| s.sup_err_final),
            metric("p45_time_avg", &|s: &ScenarioSummary| s.p45_time_avg),
            metric("l2_err_final", &|s: &ScenarioSummary| s.l2_err_final),
        ]
        .into_iter()
        .flatten()
        {
            slopes.push(item);
        }
    }
    let report = SweepReport { param: param.to_string(), points, slopes };
    fs::create_dir_all(out_dir)?;
    let mut w = BufWriter::new(fs::File::create(out_dir.join("sweep.csv"))?);
    writeln!(w, "value,status,sup_err_final,p45_time_avg,l2_err_final,detail")?;
    for p in &report.points {
        match (&p.summary, &p.error) {
            (Some(s), _) => writeln!(
                w,
                "{:.17e},ok,{:.17e},{:.17e},{:.17e},",
                p.value, s.sup_err_final, s.p45_time_avg, s.l2_err_final
            )?,
            (_, Some(e)) => writeln!(w, "{:.17e},error,,,,\"{e}\"", p.value)?,
            _ => unreachable!(),
        }
    }
    for (name, slope) in &report.slopes {
        writeln!(w, "slope_{name},,{slope:.17e},,,")?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
[gas]
r = 1.0
gamma = 1.6666666666666667
mu = 1.0
kappa = 1.0

[shock]
boundary = "outflow"
rho_plus = 1.0
u_plus = -1.2
theta_plus = 1.0
rho_minus = 1.08
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = ScenarioConfig::from_toml_str(BASE).unwrap();
        assert_eq!(cfg.domain.beta, 400.0);
        assert_eq!(cfg.time.t_final, 200.0);
        assert_eq!(cfg.perturbation.shape, PerturbationShape::None);
    }

    #[test]
    fn unknown_keys_are_errors() {
        let bad = format!("{BASE}\n[domain]\nbetaa = 3.0\n");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("betaa"), "{err}");
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn validation_names_the_field() {
        let bad = BASE.replace("theta_plus = 1.0", "theta_plus = -0.5");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("theta_plus"), "{err}");
    }

    #[test]
    fn impermeable_rejects_rho_minus_and_outflow_requires_it() {
        let bad = BASE.replace("\"outflow\"", "\"impermeable\"");
        let err = ScenarioConfig::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("rho_minus"), "{err}");
        let missing = BASE.replace("rho_minus = 1.08\n", "");
        let err = ScenarioConfig::from_toml_str(&missing).unwrap_err();
        assert!(err.to_string().contains("rho_minus"), "{err}");
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let cfg = ScenarioConfig::from_toml_with_overrides(
            BASE,
            &["domain.beta=120.0".to_string(), "time.t_final=5.0".to_string()],
        )
        .unwrap();
        assert_eq!(cfg.domain.beta, 120.0);
        assert_eq!(cfg.time.t_final, 5.0);
        let err = ScenarioConfig::from_toml_with_overrides(
            BASE,
            &["domain.bogus=1.0".to_string()],
        )
        .unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn resolves_both_closures() {
        let cfg = ScenarioConfig::from_toml_str(BASE).unwrap();
        let shock = cfg.resolve_shock().unwrap();
        assert!((shock.left.rho - 1.08).abs() < 1e-8);

        let imp = format!(
            "{}\n",
            BASE.replace("\"outflow\"", "\"impermeable\"")
                .replace("rho_minus = 1.08\n", "")
                .replace("u_plus = -1.2", "u_plus = -0.1")
        );
        let cfg = ScenarioConfig::from_toml_str(&imp).unwrap();
        let shock = cfg.resolve_shock().unwrap();
        assert_eq!(shock.left.u, 0.0);
    }
}
