//! Amplitude sweep of profile properties: derivative-equivalence ratios,
//! the shock-speed gap, second-derivative bounds and the reduced-system
//! Jacobian identity, with their fitted scaling exponents in delta.
//!
//!     cargo run --release --example profile_scaling

use shockline::fitting::log_log_slope;
use shockline::hugoniot::left_state_for_delta;
use shockline::profile::{
    build_profile, jacobian_identity_check, jacobian_leading_constant, sweep_profile_properties,
    ProfileOptions,
};
use shockline::thermo::{GasParams, State};

fn main() {
    let gas = GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap();
    let right = State::new(1.0, -1.2, 1.0).unwrap();
    let deltas = [0.2, 0.1, 0.05, 0.025];

    let profiles: Vec<_> = deltas
        .iter()
        .map(|&d| {
            let shock = left_state_for_delta(&gas, &right, d).unwrap();
            build_profile(&shock, &ProfileOptions::default()).unwrap()
        })
        .collect();

    println!(
        "{:>8} {:>11} {:>11} {:>11} {:>11} {:>12}",
        "delta", "drho-ratio", "dth-ratio", "ddu-ratio", "sigma-gap", "jac-dev"
    );
    let mut jac_devs = Vec::new();
    for p in &profiles {
        let props = shockline::profile::verify_profile_properties(p);
        let dev = jacobian_identity_check(p);
        jac_devs.push(dev);
        println!(
            "{:8.4} {:11.4e} {:11.4e} {:11.4e} {:11.4e} {:12.4e}",
            props.delta,
            props.deriv_ratio_rho,
            props.deriv_ratio_theta,
            props.second_ratio,
            props.sigma_gap,
            dev
        );
    }

    let report = sweep_profile_properties(&profiles);
    let ds: Vec<f64> = profiles.iter().map(|p| p.shock.delta).collect();
    println!("\nfitted exponents vs delta:");
    println!("  derivative-equivalence ratio: {:.3} (expected 1)", report.deriv_ratio_slope);
    println!("  sigma-gap |sigma - u_- - c_-|: {:.3} (expected 1)", report.sigma_gap_slope);
    println!("  second-derivative ratio:      {:.3} (expected 1)", report.second_ratio_slope);
    println!(
        "  jacobian-identity deviation:  {:.3} (expected 2)",
        log_log_slope(&ds, &jac_devs)
    );

    let p = &profiles[1];
    println!(
        "\nat delta = 0.1 the identity constant is {:.5} (per unit delta: {:.5})",
        jacobian_leading_constant(p) * p.shock.delta,
        jacobian_leading_constant(p)
    );
}
