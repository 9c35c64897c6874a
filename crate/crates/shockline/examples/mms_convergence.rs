//! Manufactured-solution convergence study of the half-line solver: a
//! Gaussian pulse in all three fields with its closed-form forcing, run
//! under both density-advection stencils.
//!
//!     cargo run --release --example mms_convergence

use shockline::fitting::log_log_slope;
use shockline::solver::{
    AdvectionScheme, BoundaryKind, BoundarySpec, Field, Grid1D, HalfLineSolver,
};
use shockline::thermo::{GasParams, State};

struct Pulse {
    gas: GasParams,
    center: f64,
    width: f64,
    omega: f64,
}

impl Pulse {
    fn shape(&self, x: f64) -> (f64, f64, f64) {
        let z = (x - self.center) / self.width;
        let g = (-z * z).exp();
        let gx = -2.0 * z / self.width * g;
        let gxx = (4.0 * z * z - 2.0) / (self.width * self.width) * g;
        (g, gx, gxx)
    }

    fn exact(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let (g, _, _) = self.shape(x);
        let (c, s) = ((self.omega * t).cos(), (self.omega * t).sin());
        (1.0 + 0.05 * g * c, -0.8 + 0.05 * g * c, 1.0 + 0.05 * g * s)
    }

    fn forcing(&self, t: f64, x: f64) -> (f64, f64, f64) {
        let gas = &self.gas;
        let (g, gx, gxx) = self.shape(x);
        let (cos, sin) = ((self.omega * t).cos(), (self.omega * t).sin());
        let (rho, u, th) = self.exact(t, x);
        let rho_t = -0.05 * g * self.omega * sin;
        let u_t = -0.05 * g * self.omega * sin;
        let th_t = 0.05 * g * self.omega * cos;
        let rho_x = 0.05 * gx * cos;
        let u_x = 0.05 * gx * cos;
        let th_x = 0.05 * gx * sin;
        let u_xx = 0.05 * gxx * cos;
        let th_xx = 0.05 * gxx * sin;
        let p_x = gas.r * (rho_x * th + rho * th_x);
        (
            rho_t + u * rho_x + rho * u_x,
            u_t + u * u_x + p_x / rho - gas.mu * u_xx / rho,
            th_t + u * th_x + (gas.gamma - 1.0) * th * u_x
                - (gas.gamma - 1.0) / gas.r * (gas.kappa * th_xx + gas.mu * u_x * u_x) / rho,
        )
    }
}

fn run(pulse: &Pulse, n: usize, scheme: AdvectionScheme) -> f64 {
    let grid = Grid1D::new(10.0, n).unwrap();
    let far = State::new(1.0, -0.8, 1.0).unwrap();
    let bc = BoundarySpec::new(BoundaryKind::Outflow, -0.8, 1.0).unwrap();
    let mut solver = HalfLineSolver::new(pulse.gas, grid, bc, far).unwrap();
    solver.scheme = scheme;
    let mut field = Field::constant(&grid, &far);
    for i in 0..grid.n {
        let (r, u, th) = pulse.exact(0.0, grid.x(i));
        field.rho[i] = r;
        field.u[i] = u;
        field.theta[i] = th;
    }
    let t_final = 0.5;
    let forcing = |t: f64, x: f64| pulse.forcing(t, x);
    while field.t < t_final {
        let dt = solver.max_dt(&field).min(t_final - field.t);
        field = solver.step(&field, dt, Some(&forcing)).unwrap();
    }
    let mut sup = 0.0f64;
    for i in 0..grid.n {
        let (r, u, th) = pulse.exact(t_final, grid.x(i));
        sup = sup
            .max((field.rho[i] - r).abs())
            .max((field.u[i] - u).abs())
            .max((field.theta[i] - th).abs());
    }
    sup
}

fn main() {
    let gas = GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap();
    let pulse = Pulse { gas, center: 5.0, width: 0.8, omega: 1.0 };
    let ns = [129usize, 257, 513, 1025];
    let hs: Vec<f64> = ns.iter().map(|&n| 10.0 / (n - 1) as f64).collect();

    for scheme in [AdvectionScheme::Upwind, AdvectionScheme::Central] {
        println!("{scheme:?} density advection:");
        println!("{:>8} {:>12} {:>8}", "h", "sup error", "order");
        let mut errors = Vec::new();
        for (&n, &h) in ns.iter().zip(&hs) {
            let e = run(&pulse, n, scheme);
            let order = errors
                .last()
                .map(|&prev: &f64| (prev / e).log2())
                .map(|o| format!("{o:.2}"))
                .unwrap_or_default();
            println!("{h:8.4} {e:12.4e} {order:>8}");
            errors.push(e);
        }
        println!("fitted order: {:.3}\n", log_log_slope(&hs, &errors));
    }
}
