//! The weighted Poincare inequality behind the leading-order absorption:
//! for f on [c, d],
//!
//!     int |f - avg|^2 <= 1/2 int (y - c)(d - y) |f'|^2,
//!
//! with optimal constant 1/2. Runs a randomized trig-polynomial suite and
//! shows the saturating linear case where both sides equal 1/12.
//!
//!     cargo run --release --example poincare

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shockline::diagnostics::poincare_check;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let n = 2049;
    let mut worst: (f64, f64, f64) = (f64::INFINITY, 0.0, 0.0); // (margin, lhs, rhs)
    let mut failures = 0usize;
    let count = 1000;
    for _ in 0..count {
        let c: f64 = rng.gen_range(-3.0..3.0);
        let d: f64 = c + rng.gen_range(0.5..5.0);
        let modes: usize = rng.gen_range(1..=5);
        let coefs: Vec<(f64, f64)> = (0..modes)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
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
        let chk = poincare_check(&f, c, d, 1e-8);
        if !chk.ok {
            failures += 1;
        }
        let margin = (chk.rhs - chk.lhs) / chk.rhs.max(1e-300);
        if margin < worst.0 {
            worst = (margin, chk.lhs, chk.rhs);
        }
    }
    println!("{count} random trig polynomials on random intervals: {failures} violations");
    println!(
        "tightest case: lhs = {:.6}, rhs = {:.6} (relative margin {:.3})",
        worst.1, worst.2, worst.0
    );

    let m = 4001;
    let f: Vec<f64> = (0..m).map(|i| i as f64 / (m - 1) as f64).collect();
    let opt = poincare_check(&f, 0.0, 1.0, 1e-6);
    println!(
        "\nlinear function on [0,1] (the optimal case): lhs = {:.9}, rhs = {:.9}, 1/12 = {:.9}",
        opt.lhs,
        opt.rhs,
        1.0 / 12.0
    );
}
