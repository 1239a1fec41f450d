//! Static solutions of the double sine-Gordon equation.
//!
//! `V(phi) = (1 - cos phi) + eps (1 - cos n phi)`; the static field equation is
//! `phi'' = V'(phi)` with first integral `P = phi'^2 / 2 - V`. Starting from
//! `phi(0) = pi`, `P > 0` gives step-like chains of kinks and `-V(pi) < P < 0`
//! gives periodic kink/antikink chains. This crate computes their periods,
//! energies, inter-soliton forces and equation of state.

pub mod analytic;
pub mod eos;
pub mod error;
pub mod integrate;
pub mod orbit;
pub mod potential;
pub mod quadrature;
pub mod sweep;

pub use analytic::{kink_rest_energy, topological_charge, KinkSpec, Polarity, TopologicalCharge};
pub use eos::{
    compressibility_profile, diagram_from_curve, false_vacuum_state, state_diagram,
    CompressibilityProfile,
    StateDiagram, StateRow,
};
pub use error::{DsgError, Result};
pub use integrate::{
    derivs, detect_events, first_integral, integrate, EventKind, EventRecord, FieldState,
    IntegratorConfig, Method, Trajectory,
};
pub use orbit::{
    classify, energy_per_period, period_quadrature, period_rk, soliton_metrics, turning_points,
    IntoPressure, OrbitSummary, Pressure, SolutionClass,
};
pub use potential::{PotentialParams, VacuumInfo, VacuumKind, VacuumStructure};
pub use sweep::{
    assign_branches, build_curve, critical_epsilon, force_curve, locate_pstar, sweep, Branch,
    CurvePoint, FailedPoint, GridSpec, SweepCurve,
};
