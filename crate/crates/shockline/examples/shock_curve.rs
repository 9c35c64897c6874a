//! Walks the 3-shock curve from a fixed right state and exercises both
//! boundary closures: the outflow closure recovers the curve parameter
//! from the boundary pair, and the impermeable closure pins u_- = 0.
//!
//!     cargo run --release --example shock_curve

use shockline::hugoniot::{impermeable_closure, left_state_on_s3, outflow_closure, rh_residual};
use shockline::thermo::{eigenvalues, GasParams, State};

fn main() {
    let gas = GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap();
    let right = State::new(1.0, -1.2, 1.0).unwrap();
    let (_, _, l3_right) = eigenvalues(&gas, &right).unwrap();

    println!("3-shock curve from right state (rho, u, theta) = (1, -1.2, 1), gamma = 5/3");
    println!("lambda_3(right) = {l3_right:.6}\n");
    println!(
        "{:>8} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "rho-", "u-", "theta-", "sigma", "delta", "lax left", "lax right"
    );
    for k in 1..=8 {
        let rho_minus = 1.0 + 0.05 * k as f64;
        let shock = left_state_on_s3(&gas, &right, rho_minus).unwrap();
        let (_, _, l3_left) = eigenvalues(&gas, &shock.left).unwrap();
        println!(
            "{:8.3} {:10.6} {:10.6} {:10.6} {:10.6} {:10.6} {:10.6}",
            rho_minus,
            shock.left.u,
            shock.left.theta,
            shock.sigma,
            shock.delta,
            l3_left - shock.sigma,
            shock.sigma - l3_right
        );
    }

    // round trip: the outflow closure recovers the curve parameter from
    // the boundary pair alone
    let shock = left_state_on_s3(&gas, &right, 1.1).unwrap();
    let closed = outflow_closure(&gas, &right, shock.left.u, shock.left.theta, 1e-8).unwrap();
    println!(
        "\noutflow closure round trip at rho- = 1.1: recovered {:.12} (defect {:.2e})",
        closed.left.rho,
        (closed.left.rho - 1.1).abs()
    );
    let res = rh_residual(&gas, &closed.left, &closed.right, closed.sigma);
    println!("jump-condition residuals: {:.2e} {:.2e} {:.2e}", res[0], res[1], res[2]);

    // boundary data off the curve is rejected
    let off = outflow_closure(&gas, &right, shock.left.u, shock.left.theta + 0.01, 1e-8);
    println!("perturbed boundary pair: {}", off.unwrap_err());

    // impermeable closure: u- = 0 and the wall speed follows from mass
    let right_wall = State::new(1.0, -0.1, 1.0).unwrap();
    let wall = impermeable_closure(&gas, &right_wall).unwrap();
    println!(
        "\nimpermeable closure for u+ = -0.1: rho- = {:.6}, theta- = {:.6}, sigma = {:.6}",
        wall.left.rho, wall.left.theta, wall.sigma
    );
    let sigma_mass = right_wall.rho * right_wall.u / (right_wall.rho - wall.left.rho);
    println!("mass-condition speed: {sigma_mass:.12} (defect {:.2e})", (wall.sigma - sigma_mass).abs());
}
