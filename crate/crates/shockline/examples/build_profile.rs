//! Builds one viscous 3-shock profile, reports its analytic
//! properties, and dumps the table as CSV for plotting.
//!
//!     cargo run --release --example build_profile
//!
//! Writes `out/profile_delta_0.1.csv` with columns
//! (xi, rho_bar, u_bar, theta_bar, d_rho, d_u, d_theta).

use shockline::hugoniot::left_state_for_delta;
use shockline::profile::{build_profile, verify_profile_properties, ProfileOptions};
use shockline::thermo::{GasParams, State};
use std::fs;

fn main() {
    let gas = GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap();
    let right = State::new(1.0, -1.2, 1.0).unwrap();
    let shock = left_state_for_delta(&gas, &right, 0.1).unwrap();
    println!(
        "shock: left = ({:.6}, {:.6}, {:.6}), sigma = {:.6}, delta = {:.6}",
        shock.left.rho, shock.left.u, shock.left.theta, shock.sigma, shock.delta
    );

    let profile = build_profile(&shock, &ProfileOptions::default()).unwrap();
    println!(
        "profile: {} nodes on [{:.1}, {:.1}], normalization rho(0) = {:.12}",
        profile.xi.len(),
        profile.xi[0],
        profile.xi[profile.xi.len() - 1],
        profile.rho[profile.xi0_index]
    );
    let res = profile.ode_residual();
    println!(
        "traveling-wave residuals (sup): mass {:.2e}, momentum {:.2e}, energy {:.2e}",
        res[0], res[1], res[2]
    );

    let props = verify_profile_properties(&profile);
    println!("monotone decrease: {}", props.monotone);
    println!(
        "derivative equivalence ratios: rho {:.3e}, theta {:.3e} (O(delta))",
        props.deriv_ratio_rho, props.deriv_ratio_theta
    );
    println!(
        "tail rates: left {:.4} (linearized {:.4}), right {:.4} (linearized {:.4})",
        props.left_tail_rate, props.left_rate_lin, props.right_tail_rate, props.right_rate_lin
    );
    println!(
        "sigma - u > 0 margin: {:.4}; sup |sigma - u - c| = {:.4}",
        props.speed_gap_min, props.char_gap_sup
    );
    println!(
        "weight range: [{:.6}, {:.6}] inside [1, 1 + sqrt(delta) = {:.6}]",
        props.weight_range.0,
        props.weight_range.1,
        1.0 + shock.delta.sqrt()
    );

    fs::create_dir_all("out").unwrap();
    let path = "out/profile_delta_0.1.csv";
    let file = fs::File::create(path).unwrap();
    profile.write_csv(std::io::BufWriter::new(file)).unwrap();
    println!("table written to {path}");
}
