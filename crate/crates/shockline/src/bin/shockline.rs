//! Thin command-line front end over the library: configuration-driven
//! runs and sweeps, plus the profile and Poincare check suites.

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shockline::diagnostics::poincare_check;
use shockline::hugoniot::left_state_for_delta;
use shockline::profile::{
    build_profile, jacobian_identity_check, jacobian_leading_constant, sweep_profile_properties,
    ProfileOptions,
};
use shockline::scenario::{run_scenario, sweep, ScenarioConfig, ScenarioError};
use shockline::thermo::{GasParams, State};
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "shockline", version, about = "Viscous 3-shock runs on the half-line")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario from a TOML config
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory for NDJSON records, snapshots and the summary
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Config overrides, e.g. -s time.t_final=50 -s domain.beta=200
        #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the scenario once per value of one parameter
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Dotted config key to sweep, e.g. domain.beta
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[arg(short = 's', long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Build profiles over an amplitude sweep and verify their properties
    CheckProfile {
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05,0.025")]
        deltas: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        rho_plus: f64,
        #[arg(long, default_value_t = -1.2)]
        u_plus: f64,
        #[arg(long, default_value_t = 1.0)]
        theta_plus: f64,
        #[arg(long, default_value_t = 1.0)]
        r: f64,
        #[arg(long, default_value_t = 5.0 / 3.0)]
        gamma: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Directory for per-profile CSV dumps (omit to skip)
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Randomized suite for the weighted Poincare inequality
    CheckPoincare {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 2049)]
        nodes: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        qtol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { config, out, overrides } => cmd_run(&config, &out, &overrides),
        Command::Sweep { config, out, param, values, overrides } => {
            cmd_sweep(&config, &out, &param, &values, &overrides)
        }
        Command::CheckProfile {
            deltas,
            rho_plus,
            u_plus,
            theta_plus,
            r,
            gamma,
            mu,
            kappa,
            dump,
        } => cmd_check_profile(
            &deltas, rho_plus, u_plus, theta_plus, r, gamma, mu, kappa, dump,
        ),
        Command::CheckPoincare { count, nodes, seed, qtol } => {
            cmd_check_poincare(count, nodes, seed, qtol)
        }
    };
    ExitCode::from(code)
}

fn report_error(err: &ScenarioError) -> u8 {
    eprintln!("error: {err}");
    err.exit_code() as u8
}

fn cmd_run(config: &PathBuf, out: &PathBuf, overrides: &[String]) -> u8 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 1;
        }
    };
    let cfg = match ScenarioConfig::from_toml_with_overrides(&text, overrides) {
        Ok(c) => c,
        Err(e) => return report_error(&e),
    };
    match run_scenario(&cfg, out) {
        Ok((summary, _records)) => {
            println!(
                "{:?} run: delta = {:.4}, sigma = {:.4}, {} nodes, {} steps to t = {}",
                summary.boundary, summary.delta, summary.sigma, summary.nodes, summary.steps,
                summary.t_final
            );
            println!(
                "sup_err: initial {:.3e}, post-transient peak {:.3e}, final {:.3e}",
                summary.sup_err_initial, summary.sup_err_post_transient_peak, summary.sup_err_final
            );
            println!(
                "shift: X(T) = {:.4}, |Xdot(T)| = {:.3e}, trend ratio {:.3}, identity defect {:.2e}",
                summary.x_final,
                summary.xdot_final.abs(),
                summary.xdot_trend_ratio,
                summary.identity_max_rel
            );
            if let Some(d) = &summary.dissipation {
                println!(
                    "dissipation: C* = {:.3}, ok at {:.2}% of steps, Gronwall ok = {}",
                    d.c_star,
                    100.0 * d.fraction_ok,
                    d.gronwall_ok
                );
            }
            println!("outputs in {}", out.display());
            0
        }
        Err(e) => report_error(&e),
    }
}

fn cmd_sweep(
    config: &PathBuf,
    out: &PathBuf,
    param: &str,
    values: &[f64],
    overrides: &[String],
) -> u8 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return 1;
        }
    };
    // apply shared overrides to the template once
    let base = match ScenarioConfig::from_toml_with_overrides(&text, overrides) {
        Ok(_) => {
            let mut value: toml::Value = toml::from_str(&text).expect("validated above");
            for ov in overrides {
                if let Err(e) = shockline::scenario::apply_override(&mut value, ov) {
                    return report_error(&e);
                }
            }
            toml::to_string(&value).expect("serializable")
        }
        Err(e) => return report_error(&e),
    };
    match sweep(&base, param, values, out) {
        Ok(report) => {
            for p in &report.points {
                match (&p.summary, &p.error) {
                    (Some(s), _) => println!(
                        "{param} = {:-10}: sup_err final {:.3e}, |P4|+|P5| avg {:.3e}",
                        p.value, s.sup_err_final, s.p45_time_avg
                    ),
                    (_, Some(e)) => println!("{param} = {:-10}: FAILED: {e}", p.value),
                    _ => {}
                }
            }
            for (name, slope) in &report.slopes {
                println!("log-log slope of {name} vs {param}: {slope:.3}");
            }
            println!("sweep table in {}", out.join("sweep.csv").display());
            0
        }
        Err(e) => report_error(&e),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_check_profile(
    deltas: &[f64],
    rho_plus: f64,
    u_plus: f64,
    theta_plus: f64,
    r: f64,
    gamma: f64,
    mu: f64,
    kappa: f64,
    dump: Option<PathBuf>,
) -> u8 {
    let gas = match GasParams::new(r, gamma, mu, kappa) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let right = match State::new(rho_plus, u_plus, theta_plus) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    let mut profiles = Vec::new();
    for &d in deltas {
        let shock = match left_state_for_delta(&gas, &right, d) {
            Ok(s) => s,
            Err(e) => {
                eprintln!("error: closure at delta = {d}: {e}");
                return 2;
            }
        };
        match build_profile(&shock, &ProfileOptions::default()) {
            Ok(p) => profiles.push(p),
            Err(e) => {
                eprintln!("error: profile at delta = {d}: {e}");
                return 2;
            }
        }
    }
    if let Some(dir) = &dump {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: {e}");
            return 1;
        }
        for p in &profiles {
            let path = dir.join(format!("profile_delta_{:.4}.csv", p.shock.delta));
            let file = match fs::File::create(&path) {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            };
            if let Err(e) = p.write_csv(std::io::BufWriter::new(file)) {
                eprintln!("error: {e}");
                return 1;
            }
        }
    }

    let report = sweep_profile_properties(&profiles);
    println!(
        "{:>8} {:>9} {:>10} {:>10} {:>10} {:>10} {:>11} {:>10}",
        "delta", "monotone", "dr-ratio", "dth-ratio", "ddu-ratio", "sig-gap", "tail(R)", "resid"
    );
    let mut ok = true;
    for (p, props) in profiles.iter().zip(&report.properties) {
        let res = p.ode_residual();
        let resid = res[0].max(res[1]).max(res[2]);
        println!(
            "{:>8.4} {:>9} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e} {:>11.4} {:>10.2e}",
            props.delta,
            props.monotone,
            props.deriv_ratio_rho,
            props.deriv_ratio_theta,
            props.second_ratio,
            props.sigma_gap,
            props.right_tail_rate,
            resid
        );
        ok &= props.monotone && resid < 1e-8 && props.speed_gap_min > 0.0;
    }
    println!(
        "scaling slopes vs delta: deriv-ratio {:.3}, sigma-gap {:.3}, second-ratio {:.3}",
        report.deriv_ratio_slope, report.sigma_gap_slope, report.second_ratio_slope
    );
    let jac_devs: Vec<f64> = profiles.iter().map(jacobian_identity_check).collect();
    let jd: Vec<f64> = profiles.iter().map(|p| p.shock.delta).collect();
    let jac_slope = shockline::fitting::log_log_slope(&jd, &jac_devs);
    for (p, dev) in profiles.iter().zip(&jac_devs) {
        println!(
            "jacobian identity at delta {:.4}: deviation {:.3e} about constant {:.4e}",
            p.shock.delta,
            dev,
            jacobian_leading_constant(p) * p.shock.delta
        );
    }
    println!("jacobian deviation slope vs delta: {jac_slope:.3}");
    ok &= (report.deriv_ratio_slope - 1.0).abs() <= 0.3
        && (report.sigma_gap_slope - 1.0).abs() <= 0.3
        && (jac_slope - 2.0).abs() <= 0.3;
    println!("check-profile: {}", if ok { "PASS" } else { "FAIL" });
    if ok {
        0
    } else {
        2
    }
}

fn cmd_check_poincare(count: usize, nodes: usize, seed: u64, qtol: f64) -> u8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    for _ in 0..count {
        let c: f64 = rng.gen_range(-3.0..3.0);
        let d: f64 = c + rng.gen_range(0.5..5.0);
        let modes: usize = rng.gen_range(1..=5);
        let coefs: Vec<(f64, f64)> = (0..modes)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f: Vec<f64> = (0..nodes)
            .map(|i| {
                let s = i as f64 / (nodes - 1) as f64;
                coefs
                    .iter()
                    .enumerate()
                    .map(|(k, (a, b))| {
                        let w = (k + 1) as f64 * std::f64::consts::PI;
                        a * (w * s).sin() + b * (w * s).cos()
                    })
                    .sum()
            })
            .collect();
        if !poincare_check(&f, c, d, qtol).ok {
            failures += 1;
        }
    }
    // the optimal case: a linear function saturates the inequality
    let n = 4001;
    let f: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
    let opt = poincare_check(&f, 0.0, 1.0, 1e-6);
    println!(
        "random suite: {}/{count} passed; linear optimum lhs = {:.8}, rhs = {:.8} (1/12 = {:.8})",
        count - failures,
        opt.lhs,
        opt.rhs,
        1.0 / 12.0
    );
    if failures == 0 {
        println!("check-poincare: PASS");
        0
    } else {
        println!("check-poincare: FAIL ({failures} violations)");
        2
    }
}
