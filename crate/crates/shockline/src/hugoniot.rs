//! Rankine-Hugoniot relations for the 3-shock family.
//!
//! Two boundary closures are provided on top of the curve parameterization
//! by the left density: the outflow closure recovers `rho_minus` from a
//! boundary pair `(u_minus, theta_minus)` that must already sit on the
//! projected curve, and the impermeable closure pins `u_minus = 0` and
//! solves for `(rho_minus, theta_minus)`.

use crate::fitting::solve_dense;
use crate::thermo::{eigenvalues, pressure, GasParams, State};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HugoniotError {
    #[error("densities coincide: the 3-shock speed formula needs rho_minus != rho_plus")]
    CoincidentDensities,
    #[error("nonpositive radicand in the 3-shock speed: (p- - p+)/(rho- - rho+) = {0}")]
    NonpositiveRadicand(f64),
    #[error("Newton iteration stalled after {iterations} steps, residual {residual}")]
    NewtonStalled { iterations: usize, residual: f64 },
    #[error("bisection failed to bracket a root for the {0} closure")]
    BracketFailure(&'static str),
    #[error("boundary data is not on the shock curve: residual {residual} exceeds {tol}")]
    NotOnShockCurve { residual: f64, tol: f64 },
    #[error("invalid shock data: {0}")]
    InvalidShock(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Residual tolerance used by the Newton solves, in the natural units of
/// the Rankine-Hugoniot fluxes.
pub const NEWTON_TOL: f64 = 1e-13;
const NEWTON_MAX_ITER: usize = 80;

/// A converged 3-shock: end states, speed and amplitude. Construction
/// checks the jump conditions, the Lax condition, the 3-family ordering
/// and positivity of the speed, so a `ShockData` in hand is always usable.
#[derive(Debug, Clone, Copy)]
pub struct ShockData {
    pub gas: GasParams,
    pub left: State,
    pub right: State,
    pub sigma: f64,
    /// Shock strength `delta = |u_plus - u_minus|`.
    pub delta: f64,
}

impl ShockData {
    pub fn new(gas: GasParams, left: State, right: State, sigma: f64) -> Result<Self, HugoniotError> {
        let delta = (right.u - left.u).abs();
        let shock = ShockData { gas, left, right, sigma, delta };
        shock.validate()?;
        Ok(shock)
    }

    /// Mass flux in the wave frame, `j = rho (u - sigma)`; negative for a
    /// 3-shock and identical on both sides by the first jump condition.
    pub fn mass_flux(&self) -> f64 {
        self.right.rho * (self.right.u - self.sigma)
    }

    fn validate(&self) -> Result<(), HugoniotError> {
        let gas = &self.gas;
        let scale = rh_scale(gas, &self.right);
        let res = rh_residual(gas, &self.left, &self.right, self.sigma);
        let res_norm = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if res_norm > 1e-10 * scale {
            return Err(HugoniotError::InvalidShock(format!(
                "RH residual {res_norm} exceeds tolerance"
            )));
        }
        let (_, _, l3_left) = eigenvalues(gas, &self.left).map_err(to_input_err)?;
        let (_, _, l3_right) = eigenvalues(gas, &self.right).map_err(to_input_err)?;
        if self.delta == 0.0 {
            // degenerate zero-amplitude wave: the speed collapses to the
            // right characteristic and no ordering is required
            if (self.sigma - l3_right).abs() > 1e-10 * scale {
                return Err(HugoniotError::InvalidShock(
                    "zero-amplitude wave must travel at lambda_3(right)".into(),
                ));
            }
            return Ok(());
        }
        if !(l3_left > self.sigma && self.sigma > l3_right) {
            return Err(HugoniotError::InvalidShock(format!(
                "Lax condition violated: lambda3- = {l3_left}, sigma = {}, lambda3+ = {l3_right}",
                self.sigma
            )));
        }
        if !(self.left.rho > self.right.rho
            && self.left.u > self.right.u
            && self.left.theta > self.right.theta)
        {
            return Err(HugoniotError::InvalidShock(
                "3-family ordering rho- > rho+, u- > u+, theta- > theta+ violated".into(),
            ));
        }
        if !(self.sigma > 0.0) {
            return Err(HugoniotError::InvalidShock(format!(
                "shock is not outgoing: sigma = {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

fn to_input_err(e: crate::thermo::ThermoError) -> HugoniotError {
    HugoniotError::InvalidInput(e.to_string())
}

fn total_energy(gas: &GasParams, s: &State) -> f64 {
    s.rho * (gas.cv() * s.theta + 0.5 * s.u * s.u)
}

/// Magnitude of the flux entries, used to scale residual tolerances.
fn rh_scale(gas: &GasParams, right: &State) -> f64 {
    let p = pressure(gas, right);
    let e = total_energy(gas, right);
    let speed = right.u.abs() + (gas.gamma * gas.r * right.theta).sqrt();
    1.0f64
        .max(p)
        .max(right.rho * speed * speed)
        .max(e * speed)
}

/// The three Rankine-Hugoniot residuals (mass, momentum, energy).
pub fn rh_residual(gas: &GasParams, left: &State, right: &State, sigma: f64) -> [f64; 3] {
    let (pl, pr) = (pressure(gas, left), pressure(gas, right));
    let (el, er) = (total_energy(gas, left), total_energy(gas, right));
    let (ml, mr) = (left.rho * left.u, right.rho * right.u);
    [
        -sigma * (right.rho - left.rho) + (mr - ml),
        -sigma * (mr - ml) + ((mr * right.u + pr) - (ml * left.u + pl)),
        -sigma * (er - el) + (right.u * (er + pr) - left.u * (el + pl)),
    ]
}

/// 3-shock speed `sigma = u+ + sqrt((rho-/rho+)(p- - p+)/(rho- - rho+))`,
/// the branch whose radicand is positive for `rho- > rho+`, `p- > p+`.
pub fn shock_speed_3(gas: &GasParams, left: &State, right: &State) -> Result<f64, HugoniotError> {
    if left.rho == right.rho {
        return Err(HugoniotError::CoincidentDensities);
    }
    let ratio = (pressure(gas, left) - pressure(gas, right)) / (left.rho - right.rho);
    let radicand = left.rho / right.rho * ratio;
    if !(radicand > 0.0) {
        return Err(HugoniotError::NonpositiveRadicand(radicand));
    }
    Ok(right.u + radicand.sqrt())
}

struct NewtonOutcome {
    x: Vec<f64>,
    converged: bool,
}

/// Damped Newton on `f` with analytic Jacobian `jac`; `feasible` rejects
/// iterates that leave the physical region before they are evaluated.
fn damped_newton(
    x0: Vec<f64>,
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    jac: &dyn Fn(&[f64]) -> Vec<Vec<f64>>,
    feasible: &dyn Fn(&[f64]) -> bool,
    tol: f64,
) -> NewtonOutcome {
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut x = x0;
    let mut res = f(&x);
    let mut res_norm = norm(&res);
    for _ in 0..NEWTON_MAX_ITER {
        if res_norm < tol {
            return NewtonOutcome { x, converged: true };
        }
        let mut a = jac(&x);
        let mut b: Vec<f64> = res.iter().map(|r| -r).collect();
        let Some(dx) = solve_dense(&mut a, &mut b) else {
            break;
        };
        let mut lambda = 1.0;
        let mut advanced = false;
        while lambda > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(xi, di)| xi + lambda * di).collect();
            if feasible(&trial) {
                let trial_res = f(&trial);
                let trial_norm = norm(&trial_res);
                if trial_norm < res_norm || trial_norm < tol {
                    x = trial;
                    res = trial_res;
                    res_norm = trial_norm;
                    advanced = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !advanced {
            break;
        }
    }
    NewtonOutcome { x, converged: res_norm < tol }
}

/// Solves the full jump conditions for `(u-, theta-, sigma)` given the left
/// density `rho_minus > rho_plus` on the 3-branch. `rho_minus = rho_plus`
/// returns the degenerate zero-amplitude wave.
pub fn left_state_on_s3(
    gas: &GasParams,
    right: &State,
    rho_minus: f64,
) -> Result<ShockData, HugoniotError> {
    right.validate().map_err(to_input_err)?;
    gas.validate().map_err(to_input_err)?;
    if !(rho_minus >= right.rho) {
        return Err(HugoniotError::InvalidInput(format!(
            "rho_minus = {rho_minus} must be >= rho_plus = {} on the 3-branch",
            right.rho
        )));
    }
    let (_, _, l3) = eigenvalues(gas, right).map_err(to_input_err)?;
    if rho_minus == right.rho {
        return ShockData::new(*gas, *right, *right, l3);
    }
    let c_plus = (gas.gamma * gas.r * right.theta).sqrt();
    let drho = rho_minus - right.rho;
    // weak-shock seed, accurate to O(delta^2)
    let seed = vec![
        right.u + c_plus * drho / rho_minus,
        right.theta * (1.0 + (gas.gamma - 1.0) * drho / right.rho),
        l3 + 0.25 * (gas.gamma + 1.0) * c_plus * drho / right.rho,
    ];
    let f = |x: &[f64]| {
        let left = State { rho: rho_minus, u: x[0], theta: x[1] };
        rh_residual(gas, &left, right, x[2]).to_vec()
    };
    let jac = |x: &[f64]| {
        let (u, th, sigma) = (x[0], x[1], x[2]);
        let p = gas.r * rho_minus * th;
        let e = rho_minus * (gas.cv() * th + 0.5 * u * u);
        let e_r = total_energy(gas, right);
        vec![
            vec![-rho_minus, 0.0, rho_minus - right.rho],
            vec![
                sigma * rho_minus - 2.0 * rho_minus * u,
                -gas.r * rho_minus,
                rho_minus * u - right.rho * right.u,
            ],
            vec![
                sigma * rho_minus * u - e - rho_minus * u * u - p,
                rho_minus * gas.r * ((sigma - u) / (gas.gamma - 1.0) - u),
                e - e_r,
            ],
        ]
    };
    let feasible = |x: &[f64]| x[1] > 0.0;
    let scale = rh_scale(gas, right);
    let out = damped_newton(seed, &f, &jac, &feasible, NEWTON_TOL * scale);
    let out = if out.converged {
        out
    } else {
        left_state_bisection(gas, right, rho_minus, scale)?
    };
    let left = State::new(rho_minus, out.x[0], out.x[1]).map_err(to_input_err)?;
    ShockData::new(*gas, left, *right, out.x[2])
}

/// One-parameter fallback: for fixed `rho_minus`, mass and momentum give
/// `u-` and `theta-` in closed form as functions of `sigma`; bisect the
/// energy residual in `sigma`.
fn left_state_bisection(
    gas: &GasParams,
    right: &State,
    rho_minus: f64,
    scale: f64,
) -> Result<NewtonOutcome, HugoniotError> {
    let reduced = |sigma: f64| -> (f64, f64, f64) {
        let u = (sigma * (rho_minus - right.rho) + right.rho * right.u) / rho_minus;
        let p = -sigma * (right.rho * right.u - rho_minus * u)
            + right.rho * right.u * right.u
            + pressure(gas, right)
            - rho_minus * u * u;
        let theta = p / (gas.r * rho_minus);
        (u, theta, p)
    };
    let energy_res = |sigma: f64| -> Option<f64> {
        let (u, theta, _) = reduced(sigma);
        if theta <= 0.0 {
            return None;
        }
        let left = State { rho: rho_minus, u, theta };
        Some(rh_residual(gas, &left, right, sigma)[2])
    };
    let (_, _, l3) = eigenvalues(gas, right).map_err(to_input_err)?;
    let c_plus = (gas.gamma * gas.r * right.theta).sqrt();
    let mut lo = l3 * (1.0 + 1e-12) + 1e-12;
    let mut hi = l3 + 10.0 * c_plus;
    let f_lo = energy_res(lo).ok_or(HugoniotError::BracketFailure("left-state"))?;
    let mut f_hi = energy_res(hi);
    while f_hi.map_or(true, |v| v * f_lo > 0.0) && hi < l3 + 1e6 * c_plus {
        hi *= 2.0;
        f_hi = energy_res(hi);
    }
    let f_hi = f_hi.ok_or(HugoniotError::BracketFailure("left-state"))?;
    if f_lo * f_hi > 0.0 {
        return Err(HugoniotError::BracketFailure("left-state"));
    }
    let mut flo = f_lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = energy_res(mid).ok_or(HugoniotError::BracketFailure("left-state"))?;
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let sigma = 0.5 * (lo + hi);
    let (u, theta, _) = reduced(sigma);
    let left = State { rho: rho_minus, u, theta };
    let res = rh_residual(gas, &left, right, sigma);
    let residual = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if residual > NEWTON_TOL * scale * 100.0 {
        return Err(HugoniotError::NewtonStalled { iterations: NEWTON_MAX_ITER, residual });
    }
    Ok(NewtonOutcome { x: vec![u, theta, sigma], converged: true })
}

/// Outflow closure: recover `rho_minus` (and `sigma`) from boundary data
/// `(u_minus, theta_minus)` with `u+ < u- < 0`. The pair must lie on the
/// projected 3-curve: after solving mass and momentum, the energy residual
/// is the acceptance check against `on_curve_tol` (sup-norm over all three
/// residuals).
pub fn outflow_closure(
    gas: &GasParams,
    right: &State,
    u_minus: f64,
    theta_minus: f64,
    on_curve_tol: f64,
) -> Result<ShockData, HugoniotError> {
    right.validate().map_err(to_input_err)?;
    if !(theta_minus > 0.0) {
        return Err(HugoniotError::InvalidInput(format!(
            "theta_minus = {theta_minus} must be positive"
        )));
    }
    if !(u_minus >= right.u) {
        return Err(HugoniotError::InvalidInput(format!(
            "outflow closure needs u+ <= u- (got u- = {u_minus} < u+ = {})",
            right.u
        )));
    }
    let scale = rh_scale(gas, right);
    let (_, _, l3) = eigenvalues(gas, right).map_err(to_input_err)?;
    if (u_minus - right.u).abs() + (theta_minus - right.theta).abs() < 1e-14 * scale {
        return ShockData::new(*gas, *right, *right, l3);
    }
    let c_plus = (gas.gamma * gas.r * right.theta).sqrt();
    let du = u_minus - right.u;
    let seed = vec![
        right.rho / (1.0 - du / c_plus).max(0.1),
        l3 + 0.25 * (gas.gamma + 1.0) * du,
    ];
    let f = |x: &[f64]| {
        let left = State { rho: x[0], u: u_minus, theta: theta_minus };
        let r = rh_residual(gas, &left, right, x[1]);
        vec![r[0], r[1]]
    };
    let jac = |x: &[f64]| {
        let (rho, sigma) = (x[0], x[1]);
        vec![
            vec![sigma - u_minus, rho - right.rho],
            vec![
                sigma * u_minus - u_minus * u_minus - gas.r * theta_minus,
                rho * u_minus - right.rho * right.u,
            ],
        ]
    };
    let feasible = |x: &[f64]| x[0] > 0.0;
    let out = damped_newton(seed, &f, &jac, &feasible, NEWTON_TOL * scale);
    let out = if out.converged {
        out
    } else {
        outflow_bisection(gas, right, u_minus, theta_minus, scale)?
    };
    let left = State::new(out.x[0], u_minus, theta_minus).map_err(to_input_err)?;
    let sigma = out.x[1];
    let full = rh_residual(gas, &left, right, sigma);
    let full_norm = full.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if full_norm > on_curve_tol * scale.max(1.0) {
        return Err(HugoniotError::NotOnShockCurve { residual: full_norm, tol: on_curve_tol });
    }
    ShockData::new(*gas, left, *right, sigma)
}

/// Fallback for the outflow closure: with `sigma(rho-)` eliminated through
/// the mass condition, bisect the momentum residual in `rho-`.
fn outflow_bisection(
    gas: &GasParams,
    right: &State,
    u_minus: f64,
    theta_minus: f64,
    scale: f64,
) -> Result<NewtonOutcome, HugoniotError> {
    let mom_res = |rho: f64| -> f64 {
        let sigma = (rho * u_minus - right.rho * right.u) / (rho - right.rho);
        let left = State { rho, u: u_minus, theta: theta_minus };
        rh_residual(gas, &left, right, sigma)[1]
    };
    let mut lo = right.rho * (1.0 + 1e-10);
    let hi_limit = right.rho * (gas.gamma + 1.0) / (gas.gamma - 1.0);
    let mut hi = right.rho * 1.5;
    let mut flo = mom_res(lo);
    let mut fhi = mom_res(hi);
    while flo * fhi > 0.0 && hi < hi_limit {
        hi = (hi * 1.5).min(hi_limit * (1.0 - 1e-12));
        fhi = mom_res(hi);
    }
    if flo * fhi > 0.0 {
        return Err(HugoniotError::BracketFailure("outflow"));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = mom_res(mid);
        if fm * flo <= 0.0 {
            hi = mid;
            fhi = fm;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let _ = fhi;
    let rho = 0.5 * (lo + hi);
    let sigma = (rho * u_minus - right.rho * right.u) / (rho - right.rho);
    let left = State { rho, u: u_minus, theta: theta_minus };
    let res = rh_residual(gas, &left, right, sigma);
    let residual = res[0].abs().max(res[1].abs());
    if residual > NEWTON_TOL * scale * 100.0 {
        return Err(HugoniotError::NewtonStalled { iterations: NEWTON_MAX_ITER, residual });
    }
    Ok(NewtonOutcome { x: vec![rho, sigma], converged: true })
}

/// Impermeable closure: with `u- = 0` fixed, solve the full jump
/// conditions for `(rho-, theta-, sigma)`. Requires `u+ < 0`; the mass
/// condition then forces `sigma > 0`.
pub fn impermeable_closure(gas: &GasParams, right: &State) -> Result<ShockData, HugoniotError> {
    right.validate().map_err(to_input_err)?;
    if !(right.u < 0.0) {
        return Err(HugoniotError::InvalidInput(format!(
            "impermeable closure needs u+ < 0, got {}",
            right.u
        )));
    }
    let scale = rh_scale(gas, right);
    let (_, _, l3) = eigenvalues(gas, right).map_err(to_input_err)?;
    let c_plus = (gas.gamma * gas.r * right.theta).sqrt();
    let delta = -right.u;
    let seed = vec![
        right.rho * (1.0 + delta / c_plus),
        right.theta * (1.0 + (gas.gamma - 1.0) * delta / c_plus),
        l3 + 0.25 * (gas.gamma + 1.0) * delta,
    ];
    let f = |x: &[f64]| {
        let left = State { rho: x[0], u: 0.0, theta: x[1] };
        rh_residual(gas, &left, right, x[2]).to_vec()
    };
    let jac = |x: &[f64]| {
        let (rho, th, sigma) = (x[0], x[1], x[2]);
        let e = rho * gas.cv() * th;
        let e_r = total_energy(gas, right);
        vec![
            vec![sigma, 0.0, rho - right.rho],
            vec![-gas.r * th, -gas.r * rho, -right.rho * right.u],
            vec![sigma * gas.cv() * th, sigma * rho * gas.cv(), e - e_r],
        ]
    };
    let feasible = |x: &[f64]| x[0] > 0.0 && x[1] > 0.0;
    let out = damped_newton(seed, &f, &jac, &feasible, NEWTON_TOL * scale);
    let out = if out.converged {
        out
    } else {
        impermeable_bisection(gas, right, scale)?
    };
    let left = State::new(out.x[0], 0.0, out.x[1]).map_err(to_input_err)?;
    ShockData::new(*gas, left, *right, out.x[2])
}

/// Fallback for the impermeable closure: mass and momentum give `sigma`
/// and `theta-` in closed form for each `rho-`; bisect the energy residual.
fn impermeable_bisection(
    gas: &GasParams,
    right: &State,
    scale: f64,
) -> Result<NewtonOutcome, HugoniotError> {
    let reduced = |rho: f64| -> (f64, f64) {
        let sigma = right.rho * right.u / (right.rho - rho);
        let p = -sigma * right.rho * right.u
            + right.rho * right.u * right.u
            + pressure(gas, right);
        (sigma, p / (gas.r * rho))
    };
    let energy_res = |rho: f64| -> Option<f64> {
        let (sigma, theta) = reduced(rho);
        if theta <= 0.0 {
            return None;
        }
        let left = State { rho, u: 0.0, theta };
        Some(rh_residual(gas, &left, right, sigma)[2])
    };
    let mut lo = right.rho * (1.0 + 1e-10);
    let hi_limit = right.rho * (gas.gamma + 1.0) / (gas.gamma - 1.0);
    let mut hi = right.rho * 1.5;
    let flo = energy_res(lo).ok_or(HugoniotError::BracketFailure("impermeable"))?;
    let mut fhi = energy_res(hi);
    while fhi.map_or(true, |v| v * flo > 0.0) && hi < hi_limit {
        hi = (hi * 1.5).min(hi_limit * (1.0 - 1e-12));
        fhi = energy_res(hi);
    }
    let fhi = fhi.ok_or(HugoniotError::BracketFailure("impermeable"))?;
    if flo * fhi > 0.0 {
        return Err(HugoniotError::BracketFailure("impermeable"));
    }
    let mut flo = flo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = energy_res(mid).ok_or(HugoniotError::BracketFailure("impermeable"))?;
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    let rho = 0.5 * (lo + hi);
    let (sigma, theta) = reduced(rho);
    let left = State { rho, u: 0.0, theta };
    let res = rh_residual(gas, &left, right, sigma);
    let residual = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if residual > NEWTON_TOL * scale * 100.0 {
        return Err(HugoniotError::NewtonStalled { iterations: NEWTON_MAX_ITER, residual });
    }
    Ok(NewtonOutcome { x: vec![rho, theta, sigma], converged: true })
}

/// Finds the left state whose velocity jump equals `delta` by bisecting
/// the curve parameter `rho_minus`. Used by the amplitude sweeps.
pub fn left_state_for_delta(
    gas: &GasParams,
    right: &State,
    delta: f64,
) -> Result<ShockData, HugoniotError> {
    if !(delta > 0.0) {
        return Err(HugoniotError::InvalidInput(format!("delta = {delta} must be positive")));
    }
    let jump = |rho: f64| -> Result<f64, HugoniotError> {
        Ok(left_state_on_s3(gas, right, rho)?.delta - delta)
    };
    let mut lo = right.rho;
    let hi_limit = right.rho * (gas.gamma + 1.0) / (gas.gamma - 1.0);
    let mut hi = right.rho * 1.05;
    while jump(hi)? < 0.0 {
        lo = hi;
        hi = (hi * 1.3).min(hi_limit * (1.0 - 1e-9));
        if hi_limit - hi < 1e-12 {
            return Err(HugoniotError::BracketFailure("delta sweep"));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if jump(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    left_state_on_s3(gas, right, 0.5 * (lo + hi))
}
