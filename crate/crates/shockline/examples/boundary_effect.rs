//! Boundary-effect scaling: the wall terms P4, P5 are products of two
//! boundary mismatches, each of size ~ delta e^{-kappa beta}, so their
//! time-averages should decay in the offset beta at twice the profile's
//! left tail rate. Zero-perturbation outflow runs over a beta sweep.
//!
//!     cargo run --release --example boundary_effect

use shockline::fitting::exp_decay_rate;
use shockline::hugoniot::left_state_for_delta;
use shockline::profile::{build_profile, ProfileOptions};
use shockline::scenario::{run_scenario, ScenarioConfig};
use shockline::thermo::{GasParams, State};

fn main() {
    let gas = GasParams::new(1.0, 5.0 / 3.0, 1.0, 1.0).unwrap();
    let right = State::new(1.0, -1.2, 1.0).unwrap();
    let shock = left_state_for_delta(&gas, &right, 0.1).unwrap();
    let profile = build_profile(&shock, &ProfileOptions::default()).unwrap();
    println!(
        "delta = {:.4}, left tail rate kappa = {:.4}, model decay rate 2 kappa = {:.4}\n",
        shock.delta,
        profile.left_rate,
        2.0 * profile.left_rate
    );

    let betas = [40.0, 80.0, 160.0];
    let mut averages = Vec::new();
    println!("{:>8} {:>14} {:>14}", "beta", "avg |P4|+|P5|", "sup_err final");
    for &beta in &betas {
        let text = format!(
            r#"
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
rho_minus = {}

[domain]
beta = {beta}
max_nodes = 8192
h_cap = 0.127

[time]
t_final = 20.0

[solver]
advection = "central"

[output]
record_every = 5000
"#,
            shock.left.rho
        );
        let cfg = ScenarioConfig::from_toml_str(&text).unwrap();
        let out = format!("out/beta_sweep/beta_{beta}");
        let (summary, _) = run_scenario(&cfg, std::path::Path::new(&out)).unwrap();
        println!("{beta:8.0} {:14.4e} {:14.4e}", summary.p45_time_avg, summary.sup_err_final);
        averages.push(summary.p45_time_avg);
    }
    let rate = exp_decay_rate(&betas, &averages);
    println!(
        "\nfitted exponential rate in beta: {:.4} (model 2 kappa = {:.4})",
        rate,
        2.0 * profile.left_rate
    );
}
