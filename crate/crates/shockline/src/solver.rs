//! Explicit finite-difference integration of the nonconservative
//! Navier-Stokes-Fourier system on a truncated half-line.
//!
//! Spatial discretization: first-order upwinding for the density
//! advection `u rho_x` (the boundary-compatible choice, switchable to
//! central for smooth-data convergence studies), second-order central
//! differences for every other first derivative and for the diffusion.
//! Time stepping is the two-stage second-order Heun scheme under a
//! combined advective/diffusive CFL restriction.
//!
//! Boundary closure at `x = 0`: `u` and `theta` are Dirichlet (outflow or
//! impermeable values), while `rho` is advanced by the one-sided upwinded
//! continuity equation, legitimate because `u(0) <= 0` means the density
//! characteristic leaves the domain. The far node is pinned to the
//! prescribed far-field state.

use crate::profile::ShockProfile;
use crate::thermo::{GasParams, State};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid setup: {0}")]
    InvalidSetup(String),
    #[error("positivity loss at t = {t}, x = {x}: rho = {rho}, theta = {theta}")]
    PositivityLoss { t: f64, x: f64, rho: f64, theta: f64 },
    #[error("time step {dt} violates the CFL limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("perturbation incompatible with the boundary data: |{which}| = {value} exceeds {tol}")]
    IncompatiblePerturbation { which: &'static str, value: f64, tol: f64 },
}

/// Uniform grid on `[0, length]` with node 0 on the boundary.
#[derive(Debug, Clone, Copy)]
pub struct Grid1D {
    pub length: f64,
    pub n: usize,
}

impl Grid1D {
    pub fn new(length: f64, n: usize) -> Result<Self, SolverError> {
        if !(length > 0.0) {
            return Err(SolverError::InvalidSetup(format!("length = {length} must be positive")));
        }
        if n < 16 {
            return Err(SolverError::InvalidSetup(format!("n = {n} must be at least 16")));
        }
        Ok(Grid1D { length, n })
    }

    pub fn h(&self) -> f64 {
        self.length / (self.n - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }
}

/// Solution snapshot: time plus the three nodal arrays.
#[derive(Debug, Clone)]
pub struct Field {
    pub t: f64,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
}

impl Field {
    pub fn constant(grid: &Grid1D, s: &State) -> Field {
        Field {
            t: 0.0,
            rho: vec![s.rho; grid.n],
            u: vec![s.u; grid.n],
            theta: vec![s.theta; grid.n],
        }
    }

    fn first_violation(&self) -> Option<(usize, f64, f64)> {
        for i in 0..self.rho.len() {
            if !(self.rho[i] > 0.0) || !(self.theta[i] > 0.0) {
                return Some((i, self.rho[i], self.theta[i]));
            }
        }
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryKind {
    Outflow,
    Impermeable,
}

/// Dirichlet data at the wall: `u(t,0) = u_minus` (negative for outflow,
/// zero for an impermeable wall) and `theta(t,0) = theta_minus`.
#[derive(Debug, Clone, Copy)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    pub u_minus: f64,
    pub theta_minus: f64,
}

impl BoundarySpec {
    pub fn new(kind: BoundaryKind, u_minus: f64, theta_minus: f64) -> Result<Self, SolverError> {
        match kind {
            BoundaryKind::Outflow if !(u_minus < 0.0) => {
                return Err(SolverError::InvalidSetup(format!(
                    "outflow boundary needs u_minus < 0, got {u_minus}"
                )));
            }
            BoundaryKind::Impermeable if u_minus != 0.0 => {
                return Err(SolverError::InvalidSetup(format!(
                    "impermeable boundary needs u_minus = 0, got {u_minus}"
                )));
            }
            _ => {}
        }
        if !(theta_minus > 0.0) {
            return Err(SolverError::InvalidSetup(format!(
                "theta_minus = {theta_minus} must be positive"
            )));
        }
        Ok(BoundarySpec { kind, u_minus, theta_minus })
    }
}

/// Which stencil carries the density advection term `u rho_x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdvectionScheme {
    Upwind,
    Central,
}

/// Optional manufactured-solution forcing `(t, x) -> (f_rho, f_u, f_theta)`
/// added to the right-hand sides.
pub type Forcing<'a> = &'a dyn Fn(f64, f64) -> (f64, f64, f64);

pub struct HalfLineSolver {
    pub gas: GasParams,
    pub grid: Grid1D,
    pub bc: BoundarySpec,
    pub far_state: State,
    pub scheme: AdvectionScheme,
    pub cfl: f64,
    pub cfl_diff: f64,
}

struct Rates {
    rho: Vec<f64>,
    u: Vec<f64>,
    theta: Vec<f64>,
}

impl HalfLineSolver {
    pub fn new(
        gas: GasParams,
        grid: Grid1D,
        bc: BoundarySpec,
        far_state: State,
    ) -> Result<Self, SolverError> {
        gas.validate()
            .map_err(|e| SolverError::InvalidSetup(e.to_string()))?;
        far_state
            .validate()
            .map_err(|e| SolverError::InvalidSetup(e.to_string()))?;
        Ok(HalfLineSolver {
            gas,
            grid,
            bc,
            far_state,
            scheme: AdvectionScheme::Upwind,
            cfl: 0.4,
            cfl_diff: 0.25,
        })
    }

    /// Largest admissible step: advective `cfl h / max(|u| + c)` combined
    /// with the diffusive `cfl_d h^2 min(rho) / max(mu, kappa (gamma-1)/R)`.
    pub fn max_dt(&self, field: &Field) -> f64 {
        let h = self.grid.h();
        let gas = &self.gas;
        let mut speed: f64 = 0.0;
        let mut rho_min = f64::INFINITY;
        for i in 0..field.rho.len() {
            let c = (gas.gamma * gas.r * field.theta[i]).sqrt();
            speed = speed.max(field.u[i].abs() + c);
            rho_min = rho_min.min(field.rho[i]);
        }
        let adv = self.cfl * h / speed;
        let diffusivity = gas.mu.max(gas.kappa * (gas.gamma - 1.0) / gas.r);
        let diff = self.cfl_diff * h * h * rho_min / diffusivity;
        adv.min(diff)
    }

    /// Dirichlet assignments: `u(0)`, `theta(0)` and the pinned far node.
    pub fn apply_bc(&self, field: &mut Field) {
        field.u[0] = self.bc.u_minus;
        field.theta[0] = self.bc.theta_minus;
        let last = field.rho.len() - 1;
        field.rho[last] = self.far_state.rho;
        field.u[last] = self.far_state.u;
        field.theta[last] = self.far_state.theta;
    }

    fn rates(&self, field: &Field, t: f64, forcing: Option<Forcing>) -> Rates {
        let n = self.grid.n;
        let h = self.grid.h();
        let gas = &self.gas;
        let (r, gamma, mu, kappa) = (gas.r, gas.gamma, gas.mu, gas.kappa);
        let (rho, u, th) = (&field.rho, &field.u, &field.theta);
        let mut out = Rates {
            rho: vec![0.0; n],
            u: vec![0.0; n],
            theta: vec![0.0; n],
        };

        for i in 1..n - 1 {
            let u_x = (u[i + 1] - u[i - 1]) / (2.0 * h);
            let th_x = (th[i + 1] - th[i - 1]) / (2.0 * h);
            let p_x = r * (rho[i + 1] * th[i + 1] - rho[i - 1] * th[i - 1]) / (2.0 * h);
            let u_xx = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (h * h);
            let th_xx = (th[i + 1] - 2.0 * th[i] + th[i - 1]) / (h * h);
            let rho_x = match self.scheme {
                AdvectionScheme::Upwind => {
                    if u[i] >= 0.0 {
                        (rho[i] - rho[i - 1]) / h
                    } else {
                        (rho[i + 1] - rho[i]) / h
                    }
                }
                AdvectionScheme::Central => (rho[i + 1] - rho[i - 1]) / (2.0 * h),
            };
            out.rho[i] = -(u[i] * rho_x + rho[i] * u_x);
            out.u[i] = -(u[i] * u_x + p_x / rho[i]) + mu * u_xx / rho[i];
            out.theta[i] = -(u[i] * th_x + (gamma - 1.0) * th[i] * u_x)
                + (gamma - 1.0) / r * (kappa * th_xx + mu * u_x * u_x) / rho[i];
        }

        // wall node: one-sided continuity only (u and theta are Dirichlet);
        // u(0) <= 0 makes the forward difference the upwind direction
        let u_x0 = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        let rho_x0 = (rho[1] - rho[0]) / h;
        out.rho[0] = -(u[0] * rho_x0 + rho[0] * u_x0);

        if let Some(f) = forcing {
            for i in 0..n - 1 {
                let (frho, fu, fth) = f(t, self.grid.x(i));
                out.rho[i] += frho;
                if i > 0 {
                    out.u[i] += fu;
                    out.theta[i] += fth;
                }
            }
        }
        out
    }

    /// One Heun step of size `dt`. Errors on CFL violation and on any
    /// positivity loss; never clamps silently.
    pub fn step(
        &self,
        field: &Field,
        dt: f64,
        forcing: Option<Forcing>,
    ) -> Result<Field, SolverError> {
        self.step_with_stages(field, dt, forcing).map(|(_, next)| next)
    }

    /// Like [`Self::step`], but also returns the first-stage predictor at
    /// `t + dt` so co-integrated quantities (the shift) can evaluate
    /// their stage rates on it.
    pub fn step_with_stages(
        &self,
        field: &Field,
        dt: f64,
        forcing: Option<Forcing>,
    ) -> Result<(Field, Field), SolverError> {
        let limit = self.max_dt(field);
        if dt > limit * (1.0 + 1e-9) {
            return Err(SolverError::CflViolation { dt, limit });
        }
        let n = self.grid.n;
        let k1 = self.rates(field, field.t, forcing);
        let mut mid = Field {
            t: field.t + dt,
            rho: (0..n).map(|i| field.rho[i] + dt * k1.rho[i]).collect(),
            u: (0..n).map(|i| field.u[i] + dt * k1.u[i]).collect(),
            theta: (0..n).map(|i| field.theta[i] + dt * k1.theta[i]).collect(),
        };
        self.apply_bc(&mut mid);
        self.check_positive(&mid)?;
        let k2 = self.rates(&mid, mid.t, forcing);
        let mut next = Field {
            t: field.t + dt,
            rho: (0..n)
                .map(|i| field.rho[i] + 0.5 * dt * (k1.rho[i] + k2.rho[i]))
                .collect(),
            u: (0..n)
                .map(|i| field.u[i] + 0.5 * dt * (k1.u[i] + k2.u[i]))
                .collect(),
            theta: (0..n)
                .map(|i| field.theta[i] + 0.5 * dt * (k1.theta[i] + k2.theta[i]))
                .collect(),
        };
        self.apply_bc(&mut next);
        self.check_positive(&next)?;
        Ok((mid, next))
    }

    fn check_positive(&self, field: &Field) -> Result<(), SolverError> {
        if let Some((i, rho, theta)) = field.first_violation() {
            return Err(SolverError::PositivityLoss {
                t: field.t,
                x: self.grid.x(i),
                rho,
                theta,
            });
        }
        Ok(())
    }
}

/// Initial data: the profile sampled at `x - beta` plus an optional
/// perturbation `(x) -> (d_rho, d_u, d_theta)`. The perturbation must
/// vanish at the wall (`u`, `theta` components) and at the far boundary.
pub fn initialize(
    grid: &Grid1D,
    profile: &ShockProfile,
    beta: f64,
    perturbation: Option<&dyn Fn(f64) -> (f64, f64, f64)>,
    compat_tol: f64,
) -> Result<Field, SolverError> {
    if let Some(p) = perturbation {
        let (_, du0, dth0) = p(0.0);
        if du0.abs() > compat_tol {
            return Err(SolverError::IncompatiblePerturbation {
                which: "u perturbation at x=0",
                value: du0.abs(),
                tol: compat_tol,
            });
        }
        if dth0.abs() > compat_tol {
            return Err(SolverError::IncompatiblePerturbation {
                which: "theta perturbation at x=0",
                value: dth0.abs(),
                tol: compat_tol,
            });
        }
        let (drl, dul, dthl) = p(grid.length);
        let far = drl.abs().max(dul.abs()).max(dthl.abs());
        if far > compat_tol {
            return Err(SolverError::IncompatiblePerturbation {
                which: "perturbation at x=L",
                value: far,
                tol: compat_tol,
            });
        }
    }
    let mut field = Field {
        t: 0.0,
        rho: Vec::with_capacity(grid.n),
        u: Vec::with_capacity(grid.n),
        theta: Vec::with_capacity(grid.n),
    };
    for i in 0..grid.n {
        let x = grid.x(i);
        let s = profile.sample(x - beta);
        let (drho, du, dth) = perturbation.map_or((0.0, 0.0, 0.0), |p| p(x));
        field.rho.push(s.rho + drho);
        field.u.push(s.u + du);
        field.theta.push(s.theta + dth);
    }
    if let Some((i, rho, theta)) = field.first_violation() {
        return Err(SolverError::PositivityLoss { t: 0.0, x: grid.x(i), rho, theta });
    }
    Ok(field)
}
