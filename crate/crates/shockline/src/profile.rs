//! Viscous 3-shock profile construction.
//!
//! The second-order traveling-wave system reduces, after one integration
//! and algebraic elimination of the density through the mass relation
//! `rho (u - sigma) = j`, to an autonomous plane system for `(u, theta)`:
//!
//! ```text
//! mu  u'     = j (u - u+) + p - p+
//! kappa th'  = j [ cv (th - th+) - (u - u+)^2 / 2 ] + p+ (u - u+)
//! ```
//!
//! with `j = rho+ (u+ - sigma) < 0` and `p = R j th / (u - sigma)`. The
//! left end state is a saddle whose one-dimensional unstable manifold
//! carries the connecting orbit into the stable node at the right end
//! state. The orbit is integrated with an adaptive embedded Runge-Kutta
//! pair, translated so that the density crosses `(rho- + rho+)/2` at
//! `xi = 0`, and resampled onto a uniform grid wide enough to hold the
//! exponential tails.

use crate::hugoniot::ShockData;
use crate::thermo::State;
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("profile needs a positive-amplitude shock (delta = 0)")]
    DegenerateAmplitude,
    #[error("unexpected fixed-point structure: {0}")]
    FixedPointStructure(String),
    #[error("orbit integration failed: {0}")]
    IntegrationFailed(String),
    #[error("orbit failed to connect to the right state within the span budget")]
    FailedToConnect,
    #[error("profile violates {0}")]
    InvariantViolated(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Knobs for [`build_profile`]; the defaults follow the tail scalings, so
/// usually only `halfwidth` or `nodes` are overridden (for refinement
/// studies).
#[derive(Debug, Clone)]
pub struct ProfileOptions {
    /// Half-width of the xi grid; defaults to `40 / delta`.
    pub halfwidth: Option<f64>,
    /// Number of grid nodes (forced odd); defaults to resolving the layer
    /// scale with about ten nodes per e-folding length.
    pub nodes: Option<usize>,
    /// Admissible endpoint mismatch at the grid boundary, relative to the
    /// jump sizes.
    pub tail_tol: f64,
    /// Launch distance from the left fixed point, relative to `delta`.
    pub launch_offset: f64,
    /// Relative tolerance of the orbit integrator.
    pub rtol: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            halfwidth: None,
            nodes: None,
            tail_tol: 1e-8,
            launch_offset: 1e-6,
            rtol: 1e-10,
        }
    }
}

/// Tabulated traveling wave on a uniform grid, with ODE-derived first and
/// second derivatives. Immutable after construction.
#[derive(Debug, Clone)]
pub struct ShockProfile {
    pub shock: ShockData,
    pub xi: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub theta: Vec<f64>,
    pub d_rho: Vec<f64>,
    pub d_u: Vec<f64>,
    pub d_theta: Vec<f64>,
    pub dd_u: Vec<f64>,
    pub dd_theta: Vec<f64>,
    /// Index of the node where `rho` crosses the arithmetic mean of the
    /// end densities (the normalization point, `xi = 0`).
    pub xi0_index: usize,
    /// Unstable rate at the left end state (tail rate for `xi -> -inf`).
    pub left_rate: f64,
    /// Slow stable rate at the right end state (negative).
    pub right_rate: f64,
    h: f64,
}

/// Values and derivatives of the profile at one point.
#[derive(Debug, Clone, Copy)]
pub struct ProfileSample {
    pub rho: f64,
    pub u: f64,
    pub theta: f64,
    pub d_rho: f64,
    pub d_u: f64,
    pub d_theta: f64,
    pub dd_u: f64,
    pub dd_theta: f64,
}

/// The reduced plane system and its Jacobian.
struct ReducedOde {
    j: f64,
    sigma: f64,
    r: f64,
    cv: f64,
    mu: f64,
    kappa: f64,
    u_plus: f64,
    theta_plus: f64,
    p_plus: f64,
}

impl ReducedOde {
    fn new(shock: &ShockData) -> Self {
        let gas = shock.gas;
        ReducedOde {
            j: shock.mass_flux(),
            sigma: shock.sigma,
            r: gas.r,
            cv: gas.cv(),
            mu: gas.mu,
            kappa: gas.kappa,
            u_plus: shock.right.u,
            theta_plus: shock.right.theta,
            p_plus: gas.r * shock.right.rho * shock.right.theta,
        }
    }

    fn rho(&self, u: f64) -> f64 {
        self.j / (u - self.sigma)
    }

    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let (u, th) = (y[0], y[1]);
        let p = self.r * self.rho(u) * th;
        let du = (self.j * (u - self.u_plus) + p - self.p_plus) / self.mu;
        let dth = (self.j * (self.cv * (th - self.theta_plus) - 0.5 * (u - self.u_plus).powi(2))
            + self.p_plus * (u - self.u_plus))
            / self.kappa;
        [du, dth]
    }

    fn jacobian(&self, y: [f64; 2]) -> [[f64; 2]; 2] {
        let (u, th) = (y[0], y[1]);
        let w = u - self.sigma;
        [
            [
                self.j / self.mu * (1.0 - self.r * th / (w * w)),
                self.r * self.rho(u) / self.mu,
            ],
            [
                (-self.j * (u - self.u_plus) + self.p_plus) / self.kappa,
                self.j * self.cv / self.kappa,
            ],
        ]
    }
}

fn eigen_2x2(m: [[f64; 2]; 2]) -> Option<[(f64, [f64; 2]); 2]> {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr - 4.0 * det;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let mut out = [(0.0, [0.0; 2]); 2];
    for (k, lambda) in [(0, 0.5 * (tr - sq)), (1, 0.5 * (tr + sq))] {
        // eigenvector from the better conditioned row
        let v = if m[0][1].abs() > m[1][0].abs() {
            [m[0][1], lambda - m[0][0]]
        } else {
            [lambda - m[1][1], m[1][0]]
        };
        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
        if norm == 0.0 {
            return None;
        }
        out[k] = (lambda, [v[0] / norm, v[1] / norm]);
    }
    Some(out)
}

/// One orbit point: position, state and right-hand side.
struct OrbitPoint {
    xi: f64,
    y: [f64; 2],
    dy: [f64; 2],
}

/// Dormand-Prince 5(4) with standard step control.
fn integrate_orbit(
    ode: &ReducedOde,
    y0: [f64; 2],
    stop_dist: [f64; 2],
    target: [f64; 2],
    rtol: f64,
    span_budget: f64,
    h_init: f64,
) -> Result<Vec<OrbitPoint>, ProfileError> {
    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const ERR: [f64; 7] = [
        71.0 / 57600.0,
        0.0,
        -71.0 / 16695.0,
        71.0 / 1920.0,
        -17253.0 / 339200.0,
        22.0 / 525.0,
        -1.0 / 40.0,
    ];
    // Error control is relative to the deviation from the target fixed
    // point, so the exponential approach stays resolved all the way down
    // to the stop distance.
    let atol = [0.03 * stop_dist[0], 0.03 * stop_dist[1]];

    let mut points = Vec::with_capacity(4096);
    let mut xi = 0.0;
    let mut y = y0;
    let mut dy = ode.rhs(y);
    points.push(OrbitPoint { xi, y, dy });

    let mut h = h_init;
    let h_min = 1e-10 * h_init;

    let mut k = [[0.0f64; 2]; 7];
    for _ in 0..2_000_000 {
        if (y[0] - target[0]).abs() < stop_dist[0] && (y[1] - target[1]).abs() < stop_dist[1] {
            return Ok(points);
        }
        if xi > span_budget {
            return Err(ProfileError::FailedToConnect);
        }
        k[0] = dy;
        let mut blew_up = false;
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys[0] += h * A[s - 1][j] * kj[0];
                ys[1] += h * A[s - 1][j] * kj[1];
            }
            if ys[1] <= 0.0 || ys[0] >= ode.sigma {
                blew_up = true;
                break;
            }
            k[s] = ode.rhs(ys);
        }
        if blew_up {
            h *= 0.2;
            if h < h_min {
                return Err(ProfileError::IntegrationFailed(format!(
                    "left the physical region near xi = {xi}"
                )));
            }
            continue;
        }
        // stage 7 evaluates at the 5th-order solution (FSAL)
        let y_new = {
            let mut yn = y;
            for (j, kj) in k.iter().enumerate().take(6) {
                yn[0] += h * A[5][j] * kj[0];
                yn[1] += h * A[5][j] * kj[1];
            }
            yn
        };
        let mut err: f64 = 0.0;
        for i in 0..2 {
            let mut e = 0.0;
            for (j, kj) in k.iter().enumerate() {
                e += ERR[j] * kj[i];
            }
            e *= h;
            let scale = atol[i] + rtol * (y[i] - target[i]).abs();
            err = err.max((e / scale).abs());
        }
        if err <= 1.0 {
            xi += h;
            y = y_new;
            dy = k[6];
            points.push(OrbitPoint { xi, y, dy });
        }
        let factor = if err > 0.0 { 0.9 * err.powf(-0.2) } else { 5.0 };
        h *= factor.clamp(0.2, 5.0);
        if h < h_min {
            return Err(ProfileError::IntegrationFailed(format!(
                "step size collapsed near xi = {xi}"
            )));
        }
    }
    Err(ProfileError::FailedToConnect)
}

/// Cubic Hermite evaluation of value and derivative on `[x0, x0 + dx]`.
fn hermite(
    x: f64,
    x0: f64,
    dx: f64,
    f0: f64,
    f1: f64,
    d0: f64,
    d1: f64,
) -> f64 {
    let s = (x - x0) / dx;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * f0 + h10 * dx * d0 + h01 * f1 + h11 * dx * d1
}

/// Builds the viscous 3-shock profile for a converged `ShockData`.
pub fn build_profile(shock: &ShockData, opts: &ProfileOptions) -> Result<ShockProfile, ProfileError> {
    if shock.delta == 0.0 {
        return Err(ProfileError::DegenerateAmplitude);
    }
    let ode = ReducedOde::new(shock);
    let delta = shock.delta;
    let d_theta_jump = shock.left.theta - shock.right.theta;

    let left_fix = [shock.left.u, shock.left.theta];
    let right_fix = [shock.right.u, shock.right.theta];

    let eig_left = eigen_2x2(ode.jacobian(left_fix)).ok_or_else(|| {
        ProfileError::FixedPointStructure("complex eigenvalues at the left state".into())
    })?;
    let (lam_unstable, mut v_unstable) = eig_left[1];
    if !(lam_unstable > 0.0 && eig_left[0].0 < 0.0) {
        return Err(ProfileError::FixedPointStructure(format!(
            "left state is not a saddle: eigenvalues {} and {}",
            eig_left[0].0, eig_left[1].0
        )));
    }
    if v_unstable[0] == 0.0 {
        return Err(ProfileError::FixedPointStructure(
            "unstable direction is tangent to constant u".into(),
        ));
    }
    if v_unstable[0] > 0.0 {
        v_unstable = [-v_unstable[0], -v_unstable[1]];
    }

    let eig_right = eigen_2x2(ode.jacobian(right_fix)).ok_or_else(|| {
        ProfileError::FixedPointStructure("complex eigenvalues at the right state".into())
    })?;
    if !(eig_right[1].0 < 0.0) {
        return Err(ProfileError::FixedPointStructure(format!(
            "right state is not a stable node: eigenvalues {} and {}",
            eig_right[0].0, eig_right[1].0
        )));
    }
    let right_rate = eig_right[1].0; // slow (least negative) rate

    // launch on the unstable manifold
    let offset = opts.launch_offset * delta;
    let y0 = [
        left_fix[0] + offset * v_unstable[0],
        left_fix[1] + offset * v_unstable[1],
    ];
    let stop_dist = [
        (1e-12 * delta).max(64.0 * f64::EPSILON * shock.right.u.abs()),
        (1e-12 * d_theta_jump.abs()).max(64.0 * f64::EPSILON * shock.right.theta),
    ];
    let span_budget = 1e4 / lam_unstable.min(-right_rate);
    let h_init = 0.1 / lam_unstable.max(-right_rate);
    let orbit = integrate_orbit(&ode, y0, stop_dist, right_fix, opts.rtol, span_budget, h_init)?;
    if orbit.len() < 8 {
        return Err(ProfileError::IntegrationFailed("orbit collapsed to too few points".into()));
    }

    // locate the normalization point: u value where rho crosses the mean density
    let rho_mid = 0.5 * (shock.left.rho + shock.right.rho);
    let u_mid = ode.sigma + ode.j / rho_mid;
    let seg = orbit
        .windows(2)
        .position(|w| w[0].y[0] >= u_mid && u_mid >= w[1].y[0])
        .ok_or_else(|| ProfileError::IntegrationFailed("orbit misses the mean density".into()))?;
    let (p0, p1) = (&orbit[seg], &orbit[seg + 1]);
    let dx = p1.xi - p0.xi;
    let mut xi_star = p0.xi + dx * (p0.y[0] - u_mid) / (p0.y[0] - p1.y[0]);
    for _ in 0..60 {
        let f = hermite(xi_star, p0.xi, dx, p0.y[0], p1.y[0], p0.dy[0], p1.dy[0]) - u_mid;
        let lo = hermite(
            xi_star - 1e-7 * dx, p0.xi, dx, p0.y[0], p1.y[0], p0.dy[0], p1.dy[0],
        );
        let hi = hermite(
            xi_star + 1e-7 * dx, p0.xi, dx, p0.y[0], p1.y[0], p0.dy[0], p1.dy[0],
        );
        let slope = (hi - lo) / (2e-7 * dx);
        if slope == 0.0 {
            break;
        }
        let step = f / slope;
        xi_star -= step;
        xi_star = xi_star.clamp(p0.xi, p1.xi);
        if step.abs() < 1e-14 * dx {
            break;
        }
    }

    // uniform grid
    let halfwidth = opts.halfwidth.unwrap_or(40.0 / delta);
    let nodes = opts.nodes.unwrap_or_else(|| {
        let h_target = 0.1 / lam_unstable;
        let n = (2.0 * halfwidth / h_target).ceil() as usize + 1;
        n.clamp(501, 2_000_001)
    });
    let nodes = if nodes % 2 == 0 { nodes + 1 } else { nodes };
    let h = 2.0 * halfwidth / (nodes - 1) as f64;

    let mut xi = Vec::with_capacity(nodes);
    let mut u = Vec::with_capacity(nodes);
    let mut theta = Vec::with_capacity(nodes);

    let first = orbit.first().unwrap();
    let last = orbit.last().unwrap();
    let launch_delta = [y0[0] - left_fix[0], y0[1] - left_fix[1]];
    let end_delta = [last.y[0] - right_fix[0], last.y[1] - right_fix[1]];

    let mut seg_idx = 0usize;
    for i in 0..nodes {
        let x = -halfwidth + i as f64 * h;
        xi.push(x);
        let xq = x + xi_star; // orbit coordinate
        if xq <= first.xi {
            // left tail from the unstable-manifold linearization
            let decay = (lam_unstable * (xq - first.xi)).exp();
            u.push(left_fix[0] + launch_delta[0] * decay);
            theta.push(left_fix[1] + launch_delta[1] * decay);
        } else if xq >= last.xi {
            // right tail at the slow stable rate
            let decay = (right_rate * (xq - last.xi)).exp();
            u.push(right_fix[0] + end_delta[0] * decay);
            theta.push(right_fix[1] + end_delta[1] * decay);
        } else {
            while orbit[seg_idx + 1].xi < xq {
                seg_idx += 1;
            }
            let (a, b) = (&orbit[seg_idx], &orbit[seg_idx + 1]);
            let dxs = b.xi - a.xi;
            u.push(hermite(xq, a.xi, dxs, a.y[0], b.y[0], a.dy[0], b.dy[0]));
            theta.push(hermite(xq, a.xi, dxs, a.y[1], b.y[1], a.dy[1], b.dy[1]));
        }
    }

    // density and derivatives from the algebra, never finite differences
    let mut rho = Vec::with_capacity(nodes);
    let mut d_rho = Vec::with_capacity(nodes);
    let mut d_u = Vec::with_capacity(nodes);
    let mut d_theta = Vec::with_capacity(nodes);
    let mut dd_u = Vec::with_capacity(nodes);
    let mut dd_theta = Vec::with_capacity(nodes);
    for i in 0..nodes {
        let y = [u[i], theta[i]];
        let rhoi = ode.rho(u[i]);
        rho.push(rhoi);
        // tail nodes that round to an end state get exact zero slopes
        // instead of the rounding noise of the right-hand side
        if y == left_fix || y == right_fix {
            d_u.push(0.0);
            d_theta.push(0.0);
            d_rho.push(0.0);
            dd_u.push(0.0);
            dd_theta.push(0.0);
            continue;
        }
        let dy = ode.rhs(y);
        let jac = ode.jacobian(y);
        d_u.push(dy[0]);
        d_theta.push(dy[1]);
        d_rho.push(-rhoi * dy[0] / (u[i] - ode.sigma));
        dd_u.push(jac[0][0] * dy[0] + jac[0][1] * dy[1]);
        dd_theta.push(jac[1][0] * dy[0] + jac[1][1] * dy[1]);
    }

    let profile = ShockProfile {
        shock: *shock,
        xi,
        rho,
        u,
        theta,
        d_rho,
        d_u,
        d_theta,
        dd_u,
        dd_theta,
        xi0_index: (nodes - 1) / 2,
        left_rate: lam_unstable,
        right_rate,
        h,
    };
    profile.check_invariants(opts.tail_tol)?;
    Ok(profile)
}

impl ShockProfile {
    fn check_invariants(&self, tail_tol: f64) -> Result<(), ProfileError> {
        let n = self.xi.len();
        let shock = &self.shock;
        let delta = shock.delta;
        let jumps = [
            shock.left.rho - shock.right.rho,
            delta,
            shock.left.theta - shock.right.theta,
        ];
        for (name, (vals, jump), (lo, hi)) in [
            ("rho", (&self.rho, jumps[0]), (shock.right.rho, shock.left.rho)),
            ("u", (&self.u, jumps[1]), (shock.right.u, shock.left.u)),
            ("theta", (&self.theta, jumps[2]), (shock.right.theta, shock.left.theta)),
        ] {
            if (vals[0] - hi).abs() > tail_tol * jump {
                return Err(ProfileError::InvariantViolated(format!(
                    "{name} left endpoint: |{} - {hi}| > {}",
                    vals[0],
                    tail_tol * jump
                )));
            }
            if (vals[n - 1] - lo).abs() > tail_tol * jump {
                return Err(ProfileError::InvariantViolated(format!(
                    "{name} right endpoint: |{} - {lo}| > {}",
                    vals[n - 1],
                    tail_tol * jump
                )));
            }
            if !is_monotone_decreasing(vals, lo, hi, 1e-12 * jump) {
                return Err(ProfileError::InvariantViolated(format!("{name} monotonicity")));
            }
        }
        let mid = 0.5 * (shock.left.rho + shock.right.rho);
        if (self.rho[self.xi0_index] - mid).abs() > 1e-9 * mid {
            return Err(ProfileError::InvariantViolated(format!(
                "normalization: rho(0) = {} but the mean density is {mid}",
                self.rho[self.xi0_index]
            )));
        }
        let j = shock.mass_flux();
        for i in 0..n {
            if (self.rho[i] * (self.u[i] - shock.sigma) - j).abs() > 1e-10 * j.abs() {
                return Err(ProfileError::InvariantViolated(format!(
                    "mass relation at node {i}"
                )));
            }
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    /// Values and derivatives at traveling-wave coordinate `xi`; beyond
    /// the grid the exact end states with zero derivatives are returned.
    pub fn sample(&self, xi: f64) -> ProfileSample {
        let n = self.xi.len();
        let shock = &self.shock;
        if xi <= self.xi[0] {
            return end_sample(&shock.left);
        }
        if xi >= self.xi[n - 1] {
            return end_sample(&shock.right);
        }
        let pos = (xi - self.xi[0]) / self.h;
        let mut i = pos.floor() as usize;
        if i >= n - 1 {
            i = n - 2;
        }
        if xi == self.xi[i] {
            return self.node_sample(i);
        }
        let (x0, dx) = (self.xi[i], self.h);
        let u = hermite(xi, x0, dx, self.u[i], self.u[i + 1], self.d_u[i], self.d_u[i + 1]);
        let theta = hermite(
            xi, x0, dx, self.theta[i], self.theta[i + 1], self.d_theta[i], self.d_theta[i + 1],
        );
        let d_u = hermite(xi, x0, dx, self.d_u[i], self.d_u[i + 1], self.dd_u[i], self.dd_u[i + 1]);
        let d_theta = hermite(
            xi, x0, dx, self.d_theta[i], self.d_theta[i + 1], self.dd_theta[i], self.dd_theta[i + 1],
        );
        let s = (xi - x0) / dx;
        let dd_u = self.dd_u[i] * (1.0 - s) + self.dd_u[i + 1] * s;
        let dd_theta = self.dd_theta[i] * (1.0 - s) + self.dd_theta[i + 1] * s;
        // density honors the mass relation exactly wherever it is sampled
        let j = shock.mass_flux();
        let w = u - shock.sigma;
        let rho = j / w;
        let d_rho = -rho * d_u / w;
        ProfileSample { rho, u, theta, d_rho, d_u, d_theta, dd_u, dd_theta }
    }

    fn node_sample(&self, i: usize) -> ProfileSample {
        ProfileSample {
            rho: self.rho[i],
            u: self.u[i],
            theta: self.theta[i],
            d_rho: self.d_rho[i],
            d_u: self.d_u[i],
            d_theta: self.d_theta[i],
            dd_u: self.dd_u[i],
            dd_theta: self.dd_theta[i],
        }
    }

    /// Sample the shifted wave at position `x` and time `t`: the profile
    /// is evaluated at `x - sigma t - shift - beta`.
    pub fn sample_shifted(&self, x: f64, t: f64, shift: f64, beta: f64) -> ProfileSample {
        self.sample(x - self.shock.sigma * t - shift - beta)
    }

    /// Sup-norm residuals of the original second-order traveling-wave
    /// system, reconstructed from the tabulated derivatives.
    pub fn ode_residual(&self) -> [f64; 3] {
        let gas = &self.shock.gas;
        let sigma = self.shock.sigma;
        let (r, cv, mu, kappa) = (gas.r, gas.cv(), gas.mu, gas.kappa);
        let mut sup = [0.0f64; 3];
        for i in 0..self.xi.len() {
            let (rho, u, th) = (self.rho[i], self.u[i], self.theta[i]);
            let (drho, du, dth) = (self.d_rho[i], self.d_u[i], self.d_theta[i]);
            let (ddu, ddth) = (self.dd_u[i], self.dd_theta[i]);
            let dm = drho * u + rho * du;
            let dp = r * (drho * th + rho * dth);
            let e = rho * (cv * th + 0.5 * u * u);
            let de = drho * (cv * th + 0.5 * u * u) + rho * (cv * dth + u * du);
            let r1 = -sigma * drho + dm;
            let r2 = -sigma * dm + (drho * u * u + 2.0 * rho * u * du + dp) - mu * ddu;
            let r3 = -sigma * de + (de * u + e * du + dp * u + r * rho * th * du)
                - kappa * ddth
                - mu * (du * du + u * ddu);
            sup[0] = sup[0].max(r1.abs());
            sup[1] = sup[1].max(r2.abs());
            sup[2] = sup[2].max(r3.abs());
        }
        sup
    }

    /// Dumps the tabulated profile as CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "xi,rho_bar,u_bar,theta_bar,d_rho,d_u,d_theta")?;
        for i in 0..self.xi.len() {
            writeln!(
                out,
                "{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}",
                self.xi[i],
                self.rho[i],
                self.u[i],
                self.theta[i],
                self.d_rho[i],
                self.d_u[i],
                self.d_theta[i]
            )?;
        }
        Ok(())
    }
}

fn end_sample(s: &State) -> ProfileSample {
    ProfileSample {
        rho: s.rho,
        u: s.u,
        theta: s.theta,
        d_rho: 0.0,
        d_u: 0.0,
        d_theta: 0.0,
        dd_u: 0.0,
        dd_theta: 0.0,
    }
}

/// Monotone decrease with ties tolerated only where the values are within
/// resolution of an end state (the far tails are flat in f64).
fn is_monotone_decreasing(vals: &[f64], lo: f64, hi: f64, tie_tol: f64) -> bool {
    for w in vals.windows(2) {
        if w[1] > w[0] {
            return false;
        }
        if w[1] == w[0] {
            let near_end = (w[0] - hi).abs() <= tie_tol || (w[0] - lo).abs() <= tie_tol;
            if !near_end {
                return false;
            }
        }
    }
    true
}

/// Per-profile findings of the traveling-wave property checks.
#[derive(Debug, Clone)]
pub struct ProfileProperties {
    pub delta: f64,
    pub monotone: bool,
    /// sup |rho' - (rho_-/c_-) u'| / |u'| with c_- = sqrt(gamma R theta_-)
    pub deriv_ratio_rho: f64,
    /// sup |theta' - ((gamma-1) theta_-/c_-) u'| / |u'|
    pub deriv_ratio_theta: f64,
    /// sup |u''| / |u'|
    pub second_ratio: f64,
    /// |sigma - (u_- + c_-)|
    pub sigma_gap: f64,
    /// fitted right-tail decay rate of |rho - rho_+|
    pub right_tail_rate: f64,
    /// fitted left-tail decay rate of |rho - rho_-|
    pub left_tail_rate: f64,
    /// linearization rates of the reduced system
    pub right_rate_lin: f64,
    pub left_rate_lin: f64,
    /// min over the grid of sigma - u; positive when the wave outruns the
    /// fluid everywhere, which is what the weighted entropy sign argument
    /// needs
    pub speed_gap_min: f64,
    /// sup over the grid of |sigma - u - sqrt(gamma R theta)|, an O(delta)
    /// quantity
    pub char_gap_sup: f64,
    /// weight function range [min a, max a]
    pub weight_range: (f64, f64),
}

/// Checks the sign, derivative-equivalence, tail and weight properties of
/// a built profile. Failures are reported, not panicked on.
pub fn verify_profile_properties(profile: &ShockProfile) -> ProfileProperties {
    let shock = &profile.shock;
    let gas = &shock.gas;
    let delta = shock.delta;
    let n = profile.xi.len();

    let monotone = ["rho", "u", "theta"].into_iter().all(|name| {
        let (vals, lo, hi) = match name {
            "rho" => (&profile.rho, shock.right.rho, shock.left.rho),
            "u" => (&profile.u, shock.right.u, shock.left.u),
            _ => (&profile.theta, shock.right.theta, shock.left.theta),
        };
        is_monotone_decreasing(vals, lo, hi, 1e-12 * (hi - lo))
    });

    let c_minus = (gas.gamma * gas.r * shock.left.theta).sqrt();
    let coef_rho = shock.left.rho / c_minus;
    let coef_theta = (gas.gamma - 1.0) * shock.left.theta / c_minus;
    // below ~1e-6 of the peak slope the residual of the jump conditions
    // (solver tolerance, not machine epsilon) dominates the direction of
    // the tail derivatives, so the ratio sups are evaluated above it
    let floor = profile
        .d_u
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        * 1e-6;
    let mut ratio_rho: f64 = 0.0;
    let mut ratio_theta: f64 = 0.0;
    let mut ratio_second: f64 = 0.0;
    for i in 0..n {
        let du = profile.d_u[i];
        if du.abs() <= floor {
            continue;
        }
        ratio_rho = ratio_rho.max((profile.d_rho[i] - coef_rho * du).abs() / du.abs());
        ratio_theta = ratio_theta.max((profile.d_theta[i] - coef_theta * du).abs() / du.abs());
        ratio_second = ratio_second.max(profile.dd_u[i].abs() / du.abs());
    }

    let sigma_gap = (shock.sigma - (shock.left.u + c_minus)).abs();

    let tail_rate = |side_right: bool| -> f64 {
        let jump = shock.left.rho - shock.right.rho;
        let target = if side_right { shock.right.rho } else { shock.left.rho };
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..n {
            let dev = (profile.rho[i] - target).abs();
            if dev > 1e-4 * jump && dev < 1e-3 * jump {
                let sign_ok = if side_right { profile.xi[i] > 0.0 } else { profile.xi[i] < 0.0 };
                if sign_ok {
                    xs.push(if side_right { profile.xi[i] } else { -profile.xi[i] });
                    ys.push(dev);
                }
            }
        }
        if xs.len() < 4 {
            return f64::NAN;
        }
        crate::fitting::exp_decay_rate(&xs, &ys)
    };

    let mut speed_gap_min = f64::INFINITY;
    let mut char_gap_sup = 0.0f64;
    for i in 0..n {
        let c = (gas.gamma * gas.r * profile.theta[i]).sqrt();
        speed_gap_min = speed_gap_min.min(shock.sigma - profile.u[i]);
        char_gap_sup = char_gap_sup.max((shock.sigma - profile.u[i] - c).abs());
    }

    let sq = delta.sqrt();
    let mut a_min = f64::INFINITY;
    let mut a_max = f64::NEG_INFINITY;
    for i in 0..n {
        let a = 1.0 + (shock.left.u - profile.u[i]) / sq;
        a_min = a_min.min(a);
        a_max = a_max.max(a);
    }

    ProfileProperties {
        delta,
        monotone,
        deriv_ratio_rho: ratio_rho,
        deriv_ratio_theta: ratio_theta,
        second_ratio: ratio_second,
        sigma_gap,
        right_tail_rate: tail_rate(true),
        left_tail_rate: tail_rate(false),
        right_rate_lin: -profile.right_rate,
        left_rate_lin: profile.left_rate,
        speed_gap_min,
        char_gap_sup,
        weight_range: (a_min, a_max),
    }
}

/// Sweep summary: log-log slopes of the delta-scaling quantities.
#[derive(Debug, Clone)]
pub struct ProfileSweepReport {
    pub properties: Vec<ProfileProperties>,
    pub deriv_ratio_slope: f64,
    pub sigma_gap_slope: f64,
    pub second_ratio_slope: f64,
}

pub fn sweep_profile_properties(profiles: &[ShockProfile]) -> ProfileSweepReport {
    let properties: Vec<ProfileProperties> =
        profiles.iter().map(verify_profile_properties).collect();
    let deltas: Vec<f64> = properties.iter().map(|p| p.delta).collect();
    let ratios: Vec<f64> = properties
        .iter()
        .map(|p| p.deriv_ratio_rho.max(p.deriv_ratio_theta))
        .collect();
    let gaps: Vec<f64> = properties.iter().map(|p| p.sigma_gap).collect();
    let seconds: Vec<f64> = properties.iter().map(|p| p.second_ratio).collect();
    ProfileSweepReport {
        deriv_ratio_slope: crate::fitting::log_log_slope(&deltas, &ratios),
        sigma_gap_slope: crate::fitting::log_log_slope(&deltas, &gaps),
        second_ratio_slope: crate::fitting::log_log_slope(&deltas, &seconds),
        properties,
    }
}

/// Sup deviation of `mu (y(1-y))^{-1} dy/dx` from its leading constant
/// `(gamma+1)/2 rho_- mu R gamma / (mu R gamma + kappa (gamma-1)^2) delta`,
/// evaluated where `y` is away from the endpoints.
pub fn jacobian_identity_check(profile: &ShockProfile) -> f64 {
    let shock = &profile.shock;
    let gas = &shock.gas;
    let delta = shock.delta;
    let constant = jacobian_leading_constant(profile) * delta;
    let mut sup = 0.0f64;
    for i in 0..profile.xi.len() {
        let y = (shock.left.u - profile.u[i]) / delta;
        if !(0.05..=0.95).contains(&y) {
            continue;
        }
        let dy_dx = -profile.d_u[i] / delta;
        let lhs = gas.mu / (y * (1.0 - y)) * dy_dx;
        sup = sup.max((lhs - constant).abs());
    }
    sup
}

/// The leading constant of the Jacobian identity, without the `delta`.
pub fn jacobian_leading_constant(profile: &ShockProfile) -> f64 {
    let gas = &profile.shock.gas;
    let g = gas.gamma;
    0.5 * (g + 1.0)
        * profile.shock.left.rho
        * (gas.mu * gas.r * g)
        / (gas.mu * gas.r * g + gas.kappa * (g - 1.0) * (g - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hugoniot::{left_state_for_delta, left_state_on_s3};
    use crate::thermo::GasParams;

    fn gas() -> GasParams {
        GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap()
    }

    fn right() -> State {
        State::new(1.0, -1.2, 1.0).unwrap()
    }

    fn profile_for_delta(delta: f64) -> ShockProfile {
        let shock = left_state_for_delta(&gas(), &right(), delta).unwrap();
        build_profile(&shock, &ProfileOptions::default()).unwrap()
    }

    #[test]
    fn endpoints_normalization_and_mass_relation() {
        let p = profile_for_delta(0.1);
        let shock = &p.shock;
        let n = p.xi.len();
        assert!((p.u[0] - shock.left.u).abs() < 1e-9 * shock.delta);
        assert!((p.u[n - 1] - shock.right.u).abs() < 1e-9 * shock.delta);
        let mid = 0.5 * (shock.left.rho + shock.right.rho);
        assert!((p.rho[p.xi0_index] - mid).abs() < 1e-10);
        assert_eq!(p.xi[p.xi0_index], 0.0);
        let j = shock.mass_flux();
        for i in 0..n {
            assert!((p.rho[i] * (p.u[i] - shock.sigma) - j).abs() <= 1e-10 * j.abs());
        }
    }

    #[test]
    fn ode_residual_is_tiny() {
        let p = profile_for_delta(0.1);
        let res = p.ode_residual();
        for r in res {
            assert!(r < 1e-8, "residual {r}");
        }
    }

    #[test]
    fn properties_at_moderate_amplitude() {
        let p = profile_for_delta(0.1);
        let props = verify_profile_properties(&p);
        assert!(props.monotone);
        assert!(props.deriv_ratio_rho < 1.0);
        assert!(props.deriv_ratio_theta < 1.0);
        assert!(props.speed_gap_min > 0.0);
        assert!(props.char_gap_sup < 5.0 * p.shock.delta);
        let sq = p.shock.delta.sqrt();
        assert!(props.weight_range.0 >= 1.0 - 1e-12);
        assert!(props.weight_range.1 <= 1.0 + sq + 1e-12);
        // tail rates track the linearization
        assert!(
            (props.right_tail_rate - props.right_rate_lin).abs()
                < 0.3 * props.right_rate_lin
        );
        assert!((props.left_tail_rate - props.left_rate_lin).abs() < 0.3 * props.left_rate_lin);
    }

    #[test]
    fn sampling_reproduces_nodes_and_clamps_tails() {
        let p = profile_for_delta(0.1);
        let i = p.xi0_index + 7;
        let s = p.sample(p.xi[i]);
        assert_eq!(s.u, p.u[i]);
        assert_eq!(s.theta, p.theta[i]);
        assert_eq!(s.d_u, p.d_u[i]);

        let far = p.sample(p.xi[p.xi.len() - 1] + 100.0);
        assert_eq!(far.rho, p.shock.right.rho);
        assert_eq!(far.u, p.shock.right.u);
        assert_eq!(far.d_u, 0.0);

        // translation identity for the shifted wave
        let (x, t, shift, beta) = (3.7, 1.3, 0.21, 40.0);
        let a = p.sample_shifted(x, t, shift, beta);
        let b = p.sample_shifted(x - shift - beta, t, 0.0, 0.0);
        assert!((a.u - b.u).abs() < 1e-14);
        assert!((a.theta - b.theta).abs() < 1e-14);
    }

    #[test]
    fn interpolated_mass_relation_holds_off_nodes() {
        let p = profile_for_delta(0.1);
        let j = p.shock.mass_flux();
        for k in 0..50 {
            let xi = -20.0 + 0.813 * k as f64;
            let s = p.sample(xi);
            assert!((s.rho * (s.u - p.shock.sigma) - j).abs() < 1e-12 * j.abs());
        }
    }

    #[test]
    fn finite_difference_consistency_improves_with_resolution() {
        let shock = left_state_on_s3(&gas(), &right(), 1.08).unwrap();
        let err = |nodes: usize| -> f64 {
            let opts = ProfileOptions { nodes: Some(nodes), ..Default::default() };
            let p = build_profile(&shock, &opts).unwrap();
            let h = p.spacing();
            let mut sup = 0.0f64;
            for i in 1..p.xi.len() - 1 {
                let fd = (p.u[i + 1] - p.u[i - 1]) / (2.0 * h);
                sup = sup.max((fd - p.d_u[i]).abs());
            }
            sup
        };
        let coarse = err(2001);
        let fine = err(4001);
        let factor = coarse / fine;
        assert!((2.5..6.0).contains(&factor), "O(h^2) factor was {factor}");
    }

    #[test]
    fn jacobian_identity_sweep() {
        let deltas = [0.2, 0.1, 0.05];
        let devs: Vec<f64> = deltas
            .iter()
            .map(|&d| jacobian_identity_check(&profile_for_delta(d)))
            .collect();
        let slope = crate::fitting::log_log_slope(&deltas, &devs);
        assert!((slope - 2.0).abs() < 0.3, "slope {slope} devs {devs:?}");

        // leading value at delta = 0.1 with the default gas
        let p = profile_for_delta(0.1);
        let k = jacobian_leading_constant(&p) * 0.1;
        let y_mid = 0.5;
        let i = (0..p.xi.len())
            .min_by(|&a, &b| {
                let ya = ((p.shock.left.u - p.u[a]) / p.shock.delta - y_mid).abs();
                let yb = ((p.shock.left.u - p.u[b]) / p.shock.delta - y_mid).abs();
                ya.partial_cmp(&yb).unwrap()
            })
            .unwrap();
        let y = (p.shock.left.u - p.u[i]) / p.shock.delta;
        let lhs = p.shock.gas.mu / (y * (1.0 - y)) * (-p.d_u[i] / p.shock.delta);
        assert!((lhs - k).abs() < 0.1 * k, "lhs {lhs} vs constant {k}");
    }

    #[test]
    fn nondefault_gas_and_far_field() {
        // different gas constant, adiabatic exponent and transport
        // coefficients; everything downstream of the closure must hold
        let gas = GasParams::new(2.0, 1.4, 0.5, 1.5).unwrap();
        let right = State::new(0.8, -0.9, 1.2).unwrap();
        let shock = left_state_for_delta(&gas, &right, 0.12).unwrap();
        let p = build_profile(&shock, &ProfileOptions::default()).unwrap();
        let props = verify_profile_properties(&p);
        assert!(props.monotone);
        assert!(props.speed_gap_min > 0.0);
        assert!((props.right_tail_rate - props.right_rate_lin).abs() < 0.3 * props.right_rate_lin);
        let res = p.ode_residual();
        let scale = crate::thermo::pressure(&gas, &right).max(1.0);
        assert!(res[0].max(res[1]).max(res[2]) < 1e-8 * scale);
        // identity constant reflects the transport coefficients
        let k = jacobian_leading_constant(&p);
        let g = gas.gamma;
        let expected = 0.5 * (g + 1.0) * shock.left.rho * (0.5 * 2.0 * g)
            / (0.5 * 2.0 * g + 1.5 * (g - 1.0) * (g - 1.0));
        assert!((k - expected).abs() < 1e-12 * expected);
        let dev = jacobian_identity_check(&p);
        assert!(dev < 0.3 * k * shock.delta, "deviation {dev} vs constant {}", k * shock.delta);
    }

    #[test]
    fn degenerate_shock_is_rejected() {
        let shock = left_state_on_s3(&gas(), &right(), 1.0).unwrap();
        assert!(matches!(
            build_profile(&shock, &ProfileOptions::default()),
            Err(ProfileError::DegenerateAmplitude)
        ));
    }
}
