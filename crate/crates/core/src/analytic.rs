//! Exact static kink and antikink of the `n = 2` family, and topological charge.
//!
//! The closed form `2 arccos(-+ sinh(k x) / sqrt(4 eps + cosh^2(k x)))` with
//! `k = sqrt(4 eps + 1)` is evaluated as `pi +- 2 atan(sinh(k x) / k)`, which is
//! the same function but stays finite and accurate for any `x`.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{DsgError, Result};
use crate::potential::PotentialParams;
use crate::quadrature::{self, Grading};

const ENERGY_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    Kink,
    Antikink,
}

impl Polarity {
    fn sign(self) -> f64 {
        match self {
            Polarity::Kink => 1.0,
            Polarity::Antikink => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinkSpec {
    params: PotentialParams,
    polarity: Polarity,
}

impl KinkSpec {
    /// Only the `n = 2` potential has a closed-form kink.
    pub fn new(params: PotentialParams, polarity: Polarity) -> Result<Self> {
        if params.n() != 2 {
            return Err(DsgError::InvalidParams(format!(
                "closed-form kink exists only for n = 2, got n = {}",
                params.n()
            )));
        }
        Ok(Self { params, polarity })
    }

    pub fn params(&self) -> PotentialParams {
        self.params
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    /// `sqrt(4 eps + 1)`, the inverse width of the kink core.
    pub fn stiffness(&self) -> f64 {
        (4.0 * self.params.eps() + 1.0).sqrt()
    }

    /// Position beyond which the profile equals its vacuum value to machine precision.
    pub fn far_field(&self) -> f64 {
        40.0 / self.stiffness()
    }

    pub fn phi(&self, x: f64) -> f64 {
        let k = self.stiffness();
        PI + self.polarity.sign() * 2.0 * ((k * x).sinh() / k).atan()
    }

    /// `dphi/dx` from the BPS relation `(dphi/dx)^2 / 2 = V(phi)`.
    pub fn slope(&self, x: f64) -> f64 {
        self.polarity.sign() * (2.0 * self.params.eval(self.phi(x))).sqrt()
    }

    /// `H(x) = 2 V(phi(x))`
    pub fn energy_density(&self, x: f64) -> f64 {
        2.0 * self.params.eval(self.phi(x))
    }

    /// Rest energy by integrating the energy density over the line.
    pub fn energy_by_profile(&self) -> Result<f64> {
        let half = quadrature::integrate_scalar(
            |x| self.energy_density(x),
            0.0,
            self.far_field(),
            Grading::None,
            ENERGY_REL_TOL,
        )?;
        Ok(2.0 * half)
    }
}

/// Kink rest energy `int_0^{2 pi} sqrt(2 V) dphi`.
///
/// This is also the isolated-soliton limit of the energy per soliton for any
/// harmonic index, so `n` is not restricted here.
pub fn kink_rest_energy(params: &PotentialParams) -> f64 {
    let half = quadrature::integrate_scalar(
        |phi| (2.0 * params.eval(phi)).sqrt(),
        0.0,
        PI,
        Grading::Both,
        ENERGY_REL_TOL,
    )
    .expect("sqrt(2V) is smooth on (0, pi)");
    2.0 * half
}

/// Net topological charge in units of half a kink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TopologicalCharge {
    half_units: i64,
}

impl TopologicalCharge {
    pub fn from_half_units(half_units: i64) -> Self {
        Self { half_units }
    }

    pub fn half_units(&self) -> i64 {
        self.half_units
    }

    pub fn value(&self) -> f64 {
        self.half_units as f64 / 2.0
    }
}

impl std::ops::Add for TopologicalCharge {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self::from_half_units(self.half_units + rhs.half_units)
    }
}

impl fmt::Display for TopologicalCharge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half_units % 2 == 0 {
            write!(f, "{}", self.half_units / 2)
        } else {
            write!(f, "{}/2", self.half_units)
        }
    }
}

/// `(phi_right - phi_left) / 2 pi` for boundary values sitting on vacua.
pub fn topological_charge(phi_left: f64, phi_right: f64) -> Result<TopologicalCharge> {
    const BOUNDARY_TOL: f64 = 1e-3;
    let near_pi_multiple = |v: f64| {
        let k = (v / PI).round();
        v.is_finite() && (v - k * PI).abs() <= BOUNDARY_TOL
    };
    if !near_pi_multiple(phi_left) || !near_pi_multiple(phi_right) {
        return Err(DsgError::NonVacuumBoundary {
            left: phi_left,
            right: phi_right,
        });
    }
    let half_units = (2.0 * (phi_right - phi_left) / TAU).round() as i64;
    Ok(TopologicalCharge::from_half_units(half_units))
}
