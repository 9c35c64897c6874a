//! Ideal-gas thermodynamics: equation of state, characteristic speeds,
//! state-space classification, and the (relative) entropy algebra.
//!
//! Everything here is a pure function of a [`GasParams`] and one or two
//! [`State`]s, so the module is freely shareable across threads.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ThermoError {
    #[error("invalid gas parameter: {0}")]
    InvalidGas(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("recovered temperature is nonpositive: theta = {0}")]
    NonpositiveTemperature(f64),
    #[error("velocity within {tol} of zero: region classification is ambiguous")]
    AmbiguousRegion { tol: f64 },
}

/// Fluid constants shared by every module: gas constant `R`, adiabatic
/// exponent `gamma`, viscosity `mu`, heat conductivity `kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GasParams {
    pub r: f64,
    pub gamma: f64,
    pub mu: f64,
    pub kappa: f64,
}

impl GasParams {
    pub fn new(r: f64, gamma: f64, mu: f64, kappa: f64) -> Result<Self, ThermoError> {
        let gas = GasParams { r, gamma, mu, kappa };
        gas.validate()?;
        Ok(gas)
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        if !(self.r > 0.0) {
            return Err(ThermoError::InvalidGas(format!("R = {} must be > 0", self.r)));
        }
        if !(self.gamma > 1.0) {
            return Err(ThermoError::InvalidGas(format!(
                "gamma = {} must be > 1",
                self.gamma
            )));
        }
        if !(self.mu > 0.0) {
            return Err(ThermoError::InvalidGas(format!("mu = {} must be > 0", self.mu)));
        }
        if !(self.kappa > 0.0) {
            return Err(ThermoError::InvalidGas(format!(
                "kappa = {} must be > 0",
                self.kappa
            )));
        }
        Ok(())
    }

    /// Specific heat at constant volume, `R/(gamma-1)`.
    pub fn cv(&self) -> f64 {
        self.r / (self.gamma - 1.0)
    }
}

/// Primitive state `(rho, u, theta)` with `rho > 0`, `theta > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub rho: f64,
    pub u: f64,
    pub theta: f64,
}

impl State {
    pub fn new(rho: f64, u: f64, theta: f64) -> Result<Self, ThermoError> {
        let s = State { rho, u, theta };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), ThermoError> {
        if !(self.rho > 0.0) || !self.rho.is_finite() {
            return Err(ThermoError::InvalidState(format!(
                "rho = {} must be positive and finite",
                self.rho
            )));
        }
        if !self.u.is_finite() {
            return Err(ThermoError::InvalidState(format!("u = {} must be finite", self.u)));
        }
        if !(self.theta > 0.0) || !self.theta.is_finite() {
            return Err(ThermoError::InvalidState(format!(
                "theta = {} must be positive and finite",
                self.theta
            )));
        }
        Ok(())
    }
}

/// Conserved triple `(rho, m, E)` with `m = rho u` and
/// `E = rho (e + u^2/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedState {
    pub rho: f64,
    pub m: f64,
    pub e_total: f64,
}

/// The six regions of the state space, split by the sign of `u` and the
/// comparison of `|u|` with the sound speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionTag {
    SuperPlus,
    TransPlus,
    SubPlus,
    SubMinus,
    TransMinus,
    SuperMinus,
}

/// Pressure `p = R rho theta`.
pub fn pressure(gas: &GasParams, s: &State) -> f64 {
    gas.r * s.rho * s.theta
}

/// Specific internal energy `e = R theta / (gamma - 1)`; the additive
/// constant is fixed to zero (only differences of `e` ever enter).
pub fn internal_energy(gas: &GasParams, s: &State) -> f64 {
    gas.cv() * s.theta
}

/// Sound speed `c = sqrt(gamma R theta)`.
pub fn sound_speed(gas: &GasParams, s: &State) -> Result<f64, ThermoError> {
    if !(s.theta > 0.0) {
        return Err(ThermoError::InvalidState(format!(
            "theta = {} must be positive for a sound speed",
            s.theta
        )));
    }
    Ok((gas.gamma * gas.r * s.theta).sqrt())
}

/// Characteristic speeds `(u - c, u, u + c)`.
pub fn eigenvalues(gas: &GasParams, s: &State) -> Result<(f64, f64, f64), ThermoError> {
    let c = sound_speed(gas, s)?;
    Ok((s.u - c, s.u, s.u + c))
}

/// Classifies a state into one of the six regions. `u = +-c` (exact
/// comparison) maps to the transonic tags. Because the sub regions are
/// open, `|u| <= zero_tol` is ambiguous and reported as an error;
/// pass `zero_tol = 0.0` for exact classification.
pub fn classify_region(gas: &GasParams, s: &State, zero_tol: f64) -> Result<RegionTag, ThermoError> {
    let c = sound_speed(gas, s)?;
    if s.u.abs() <= zero_tol {
        return Err(ThermoError::AmbiguousRegion { tol: zero_tol });
    }
    Ok(if s.u > 0.0 {
        if s.u > c {
            RegionTag::SuperPlus
        } else if s.u == c {
            RegionTag::TransPlus
        } else {
            RegionTag::SubPlus
        }
    } else {
        if s.u < -c {
            RegionTag::SuperMinus
        } else if s.u == -c {
            RegionTag::TransMinus
        } else {
            RegionTag::SubMinus
        }
    })
}

/// Physical entropy `s = -R ln(rho) + R/(gamma-1) ln(theta)`.
pub fn entropy(gas: &GasParams, s: &State) -> f64 {
    -gas.r * s.rho.ln() + gas.cv() * s.theta.ln()
}

/// `Phi(z) = z - ln(z) - 1`, the convex kernel of the relative entropy.
///
/// Near `z = 1` the direct formula loses all significant digits to
/// cancellation while the true value is quadratically small, so a short
/// series in `w = z - 1` is used there.
pub fn phi(z: f64) -> f64 {
    debug_assert!(z > 0.0);
    let w = z - 1.0;
    if w.abs() < 1e-4 {
        // w - ln(1+w) = w^2/2 - w^3/3 + w^4/4 - ...
        let w2 = w * w;
        w2 * (0.5 - w / 3.0 + w2 / 4.0 - w2 * w / 5.0)
    } else {
        w - w.ln_1p()
    }
}

/// Relative entropy weighted by the reference temperature,
/// `thetabar eta(U|Ubar) = rho [ R thetabar Phi(rhobar/rho)
/// + R/(gamma-1) thetabar Phi(theta/thetabar) + (u - ubar)^2 / 2 ]`.
///
/// Nonnegative, and zero exactly when the states coincide.
pub fn weighted_relative_entropy_density(gas: &GasParams, s: &State, sbar: &State) -> f64 {
    let du = s.u - sbar.u;
    s.rho
        * (gas.r * sbar.theta * phi(sbar.rho / s.rho)
            + gas.cv() * sbar.theta * phi(s.theta / sbar.theta)
            + 0.5 * du * du)
}

pub fn primitive_to_conserved(gas: &GasParams, s: &State) -> ConservedState {
    let e = internal_energy(gas, s);
    ConservedState {
        rho: s.rho,
        m: s.rho * s.u,
        e_total: s.rho * (e + 0.5 * s.u * s.u),
    }
}

pub fn conserved_to_primitive(gas: &GasParams, c: &ConservedState) -> Result<State, ThermoError> {
    if !(c.rho > 0.0) {
        return Err(ThermoError::InvalidState(format!(
            "rho = {} must be positive",
            c.rho
        )));
    }
    let u = c.m / c.rho;
    let theta = (c.e_total / c.rho - 0.5 * u * u) / gas.cv();
    if !(theta > 0.0) {
        return Err(ThermoError::NonpositiveTemperature(theta));
    }
    Ok(State { rho: c.rho, u, theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gas(r: f64, gamma: f64) -> GasParams {
        GasParams::new(r, gamma, 1.0, 1.0).unwrap()
    }

    #[test]
    fn pressure_is_r_rho_theta() {
        let g = gas(1.0, 1.4);
        assert_eq!(pressure(&g, &State::new(1.0, 0.0, 1.0).unwrap()), 1.0);
        assert_eq!(pressure(&g, &State::new(2.0, 0.0, 3.0).unwrap()), 6.0);
        let g = gas(8.314, 1.4);
        let p = pressure(&g, &State::new(1.2, 0.0, 300.0).unwrap());
        assert!((p - 2993.04).abs() < 1e-10 * 2993.04);
    }

    #[test]
    fn sound_speed_cases() {
        let g = gas(1.0, 5.0 / 3.0);
        let c = sound_speed(&g, &State::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert!((c - 1.2909944487358056).abs() < 1e-15);
        // theta = 0 is rejected before the square root
        let bad = State { rho: 1.0, u: 0.0, theta: 0.0 };
        assert!(sound_speed(&gas(1.0, 1.4), &bad).is_err());
        let g = gas(1.0, 2.0);
        let c = sound_speed(&g, &State::new(1.0, 0.0, 0.5).unwrap()).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
    }

    #[test]
    fn eigenvalue_ordering_and_values() {
        let g = gas(1.0, 5.0 / 3.0);
        let (l1, l2, l3) = eigenvalues(&g, &State::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        assert!((l1 + 1.2909944487358056).abs() < 1e-15);
        assert_eq!(l2, 0.0);
        assert!((l3 - 1.2909944487358056).abs() < 1e-15);

        let (l1, l2, l3) = eigenvalues(&g, &State::new(1.0, -0.5, 1.0).unwrap()).unwrap();
        assert!((l1 + 1.7909944487358056).abs() < 1e-14);
        assert_eq!(l2, -0.5);
        assert!((l3 - 0.7909944487358056).abs() < 1e-14);

        // all-negative eigenvalues mean supersonic inflow-directed state
        let g2 = GasParams::new(1.0, 2.0, 1.0, 1.0).unwrap();
        let s = State::new(1.0, -2.0, 0.5).unwrap();
        let (l1, l2, l3) = eigenvalues(&g2, &s).unwrap();
        assert_eq!((l1, l2, l3), (-3.0, -2.0, -1.0));
        assert_eq!(classify_region(&g2, &s, 0.0).unwrap(), RegionTag::SuperMinus);
    }

    #[test]
    fn region_classification() {
        let g = gas(1.0, 5.0 / 3.0);
        let sub = State::new(1.0, -0.5, 1.0).unwrap();
        assert_eq!(classify_region(&g, &sub, 0.0).unwrap(), RegionTag::SubMinus);

        let c = sound_speed(&g, &State::new(1.0, 0.0, 1.0).unwrap()).unwrap();
        let trans = State::new(1.0, -c, 1.0).unwrap();
        assert_eq!(classify_region(&g, &trans, 0.0).unwrap(), RegionTag::TransMinus);

        let g2 = gas(1.0, 2.0);
        let sup = State::new(1.0, 2.0, 0.5).unwrap();
        assert_eq!(classify_region(&g2, &sup, 0.0).unwrap(), RegionTag::SuperPlus);

        // the remaining three regions of the table
        let c2 = 1.0; // gamma R theta = 2 * 0.5
        assert_eq!(
            classify_region(&g2, &State::new(1.0, c2, 0.5).unwrap(), 0.0).unwrap(),
            RegionTag::TransPlus
        );
        assert_eq!(
            classify_region(&g2, &State::new(1.0, 0.4, 0.5).unwrap(), 0.0).unwrap(),
            RegionTag::SubPlus
        );
        assert_eq!(
            classify_region(&g2, &State::new(1.0, -2.0, 0.5).unwrap(), 0.0).unwrap(),
            RegionTag::SuperMinus
        );

        let still = State::new(1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            classify_region(&g, &still, 0.0),
            Err(ThermoError::AmbiguousRegion { .. })
        ));
        let slow = State::new(1.0, -1e-12, 1.0).unwrap();
        assert!(classify_region(&g, &slow, 1e-10).is_err());
        assert_eq!(classify_region(&g, &slow, 0.0).unwrap(), RegionTag::SubMinus);
    }

    #[test]
    fn entropy_values() {
        let g = gas(1.0, 1.4);
        assert_eq!(entropy(&g, &State::new(1.0, 0.0, 1.0).unwrap()), 0.0);
        let g = gas(1.0, 2.0);
        let e = std::f64::consts::E;
        assert!(entropy(&g, &State::new(e, 0.0, e).unwrap()).abs() < 1e-15);
        let g = gas(1.0, 5.0 / 3.0);
        let s = entropy(&g, &State::new(2.0, 0.0, 3.0).unwrap());
        assert!((s - 0.9547712524422193).abs() < 1e-14);
    }

    #[test]
    fn relative_entropy_reference_values() {
        let g = gas(1.0, 2.0);
        let a = State::new(1.0, 0.3, 1.0).unwrap();
        assert_eq!(weighted_relative_entropy_density(&g, &a, &a), 0.0);

        // only the kinetic term survives
        let b = State::new(1.0, 1.3, 1.0).unwrap();
        assert!((weighted_relative_entropy_density(&g, &b, &a) - 0.5).abs() < 1e-15);

        // pure density imbalance: rho Phi(2) with R = 1, theta = 1
        let s = State::new(1.0, 0.0, 1.0).unwrap();
        let sbar = State::new(2.0, 0.0, 1.0).unwrap();
        let v = weighted_relative_entropy_density(&g, &s, &sbar);
        assert!((v - (1.0 - std::f64::consts::LN_2)).abs() < 1e-15);
    }

    #[test]
    fn conserved_round_trip_example() {
        let g = gas(1.0, 2.0);
        let c = primitive_to_conserved(&g, &State::new(1.0, 0.0, 1.0).unwrap());
        assert_eq!((c.rho, c.m, c.e_total), (1.0, 0.0, 1.0));

        let g = gas(1.0, 5.0 / 3.0);
        let c = primitive_to_conserved(&g, &State::new(2.0, -1.0, 1.0).unwrap());
        assert_eq!(c.m, -2.0);
        assert!((c.e_total - 4.0).abs() < 1e-14);

        let neg = ConservedState { rho: 1.0, m: 10.0, e_total: 1.0 };
        assert!(matches!(
            conserved_to_primitive(&g, &neg),
            Err(ThermoError::NonpositiveTemperature(_))
        ));
    }

    #[test]
    fn phi_accuracy_near_one() {
        // Phi(1+w) ~ w^2/2 for small w; direct evaluation would cancel.
        for &w in &[1e-5, -1e-5, 1e-7, -1e-7, 1e-9] {
            let v = phi(1.0 + w);
            let exact = w * w / 2.0 - w * w * w / 3.0;
            assert!((v - exact).abs() <= 1e-3 * exact.abs().max(1e-300));
            assert!(v >= 0.0);
        }
        assert_eq!(phi(1.0), 0.0);
    }

    proptest! {
        #[test]
        fn relative_entropy_nonnegative(
            rho in 0.05..20.0f64, u in -5.0..5.0f64, th in 0.05..20.0f64,
            rho2 in 0.05..20.0f64, u2 in -5.0..5.0f64, th2 in 0.05..20.0f64,
            gamma in 1.05..3.0f64, r in 0.1..10.0f64,
        ) {
            let g = GasParams::new(r, gamma, 1.0, 1.0).unwrap();
            let s = State::new(rho, u, th).unwrap();
            let sbar = State::new(rho2, u2, th2).unwrap();
            let v = weighted_relative_entropy_density(&g, &s, &sbar);
            prop_assert!(v >= 0.0);
            let same = weighted_relative_entropy_density(&g, &s, &s);
            prop_assert!(same == 0.0);
            // strict positivity away from equality
            if (rho - rho2).abs() > 1e-3 || (u - u2).abs() > 1e-3 || (th - th2).abs() > 1e-3 {
                prop_assert!(v > 0.0);
            }
        }

        #[test]
        fn conversion_round_trip(
            rho in 0.05..20.0f64, u in -5.0..5.0f64, th in 0.05..20.0f64,
            gamma in 1.05..3.0f64, r in 0.1..10.0f64,
        ) {
            let g = GasParams::new(r, gamma, 1.0, 1.0).unwrap();
            let s = State::new(rho, u, th).unwrap();
            let back = conserved_to_primitive(&g, &primitive_to_conserved(&g, &s)).unwrap();
            prop_assert!((back.rho - s.rho).abs() <= 1e-12 * s.rho.abs());
            prop_assert!((back.u - s.u).abs() <= 1e-12 * s.u.abs().max(1.0));
            prop_assert!((back.theta - s.theta).abs() <= 1e-12 * s.theta.abs());
        }

        #[test]
        fn classification_exhaustive_and_lambda3_sign(
            rho in 0.05..20.0f64, u in -5.0..5.0f64, th in 0.05..20.0f64,
        ) {
            let g = GasParams::new(1.0, 5.0/3.0, 1.0, 1.0).unwrap();
            let s = State::new(rho, u, th).unwrap();
            if u != 0.0 {
                let tag = classify_region(&g, &s, 0.0).unwrap();
                let (_, _, l3) = eigenvalues(&g, &s).unwrap();
                let in_left_closure = matches!(tag, RegionTag::SuperMinus | RegionTag::TransMinus);
                prop_assert_eq!(l3 > 0.0, !in_left_closure);
            }
        }
    }
}
