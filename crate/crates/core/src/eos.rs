//! Equation of state: pressure `P` against average density `rho_bar`, the
//! compressibility `chi = d rho_bar / dP`, and the point of maximum density.

use serde::Serialize;

use crate::error::{DsgError, Result};
use crate::orbit::{IntoPressure, Pressure, SolutionClass, QUADRATURE_TOL};
use crate::sweep::{
    assign_branches, build_curve, nonuniform_derivative, smooth_coordinate, Branch, FailedPoint,
    SweepCurve,
};
use crate::potential::PotentialParams;

/// Rows needed by [`compressibility_profile`].
const MIN_PROFILE_ROWS: usize = 5;
/// Derivatives of `rho_bar` smaller than this many quadrature tolerances per
/// unit spacing are indistinguishable from zero.
const CHI_NOISE_FACTOR: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StateRow {
    #[serde(rename = "P")]
    pub p: f64,
    pub floor_gap: f64,
    pub rho_bar: f64,
    pub chi: Option<f64>,
    pub inv_chi: Option<f64>,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateDiagram {
    pub params: PotentialParams,
    pub class: SolutionClass,
    /// Ordered by increasing `P`.
    pub rows: Vec<StateRow>,
    pub failures: Vec<FailedPoint>,
    pub rho_max: f64,
    #[serde(rename = "P_at_max")]
    pub p_at_max: f64,
    #[serde(rename = "P_star")]
    pub p_star: Option<f64>,
}

/// `dP/dt` in the coordinate used by [`smooth_coordinate`].
fn pressure_rate(params: &PotentialParams, class: SolutionClass, pr: Pressure) -> f64 {
    match class {
        SolutionClass::Periodic => pr.floor_gap() * -pr.value() / params.center_value(),
        _ => pr.value(),
    }
}

fn pressure_at(params: &PotentialParams, class: SolutionClass, t: f64) -> f64 {
    match class {
        SolutionClass::Periodic => Pressure::from_logit(params, t).value(),
        _ => t.exp(),
    }
}

/// Turns a labelled curve into a state diagram.
pub fn diagram_from_curve(curve: &SweepCurve) -> StateDiagram {
    let params = curve.params;
    let class = curve.class;
    let pts = &curve.points;
    let t: Vec<f64> = pts.iter().map(|p| smooth_coordinate(class, p.pressure())).collect();
    let rho: Vec<f64> = pts.iter().map(|p| p.rho_bar).collect();
    let chi: Vec<Option<f64>> = if pts.len() >= 3 {
        nonuniform_derivative(&t, &rho)
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let h = match i {
                    0 => t[1] - t[0],
                    _ if i + 1 == t.len() => t[i] - t[i - 1],
                    _ => (t[i] - t[i - 1]).min(t[i + 1] - t[i]),
                };
                let noise = CHI_NOISE_FACTOR * QUADRATURE_TOL * rho[i].abs() / h;
                let c = d / pressure_rate(&params, class, pts[i].pressure());
                (d.abs() > noise && c.is_finite()).then_some(c)
            })
            .collect()
    } else {
        vec![None; pts.len()]
    };
    let rows: Vec<StateRow> = pts
        .iter()
        .zip(&chi)
        .map(|(p, &c)| StateRow {
            p: p.p,
            floor_gap: p.floor_gap,
            rho_bar: p.rho_bar,
            chi: c,
            inv_chi: c.filter(|&c| c != 0.0).map(|c| 1.0 / c),
            branch: p.branch,
        })
        .collect();

    let (mut rho_max, mut p_at_max) = (f64::NAN, f64::NAN);
    if let Some(i) = (0..rho.len()).max_by(|&a, &b| rho[a].total_cmp(&rho[b])) {
        rho_max = rho[i];
        p_at_max = pts[i].p;
        if i > 0 && i + 1 < rho.len() {
            // parabola through the three nodes around the maximum
            let (t0, t1, t2) = (t[i - 1], t[i], t[i + 1]);
            let (r0, r1, r2) = (rho[i - 1], rho[i], rho[i + 1]);
            let d01 = (r1 - r0) / (t1 - t0);
            let d12 = (r2 - r1) / (t2 - t1);
            let a = (d12 - d01) / (t2 - t0);
            if a < 0.0 {
                let b = d01 - a * (t0 + t1);
                let ts = -b / (2.0 * a);
                if ts > t0 && ts < t2 {
                    rho_max = r1 + d01 * (ts - t1) + a * (ts - t0) * (ts - t1);
                    p_at_max = pressure_at(&params, class, ts);
                }
            }
        }
    }

    StateDiagram {
        params,
        class,
        rows,
        failures: curve.failures.clone(),
        rho_max,
        p_at_max,
        p_star: curve.p_star,
    }
}

pub fn state_diagram<T: IntoPressure + Copy + Sync>(
    params: &PotentialParams,
    grid: &[T],
    class: SolutionClass,
) -> Result<StateDiagram> {
    let curve = assign_branches(build_curve(params, grid, class)?);
    Ok(diagram_from_curve(&curve))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompressibilityProfile {
    /// `(P, 1/chi)` for rows where `chi` is defined and nonzero.
    pub points: Vec<(f64, f64)>,
    /// Pressures where `chi` changes sign (and `1/chi` passes through a pole),
    /// by linear interpolation between the bracketing rows.
    pub sign_changes: Vec<f64>,
}

pub fn compressibility_profile(diagram: &StateDiagram) -> Result<CompressibilityProfile> {
    let rows = &diagram.rows;
    if rows.len() < MIN_PROFILE_ROWS {
        return Err(DsgError::TooFewRows { rows: rows.len() });
    }
    let points = rows
        .iter()
        .filter_map(|r| r.inv_chi.map(|v| (r.p, v)))
        .collect();
    let defined: Vec<(f64, f64)> = rows.iter().filter_map(|r| r.chi.map(|c| (r.p, c))).collect();
    let sign_changes = defined
        .windows(2)
        .filter(|w| w[0].1 * w[1].1 < 0.0)
        .map(|w| {
            let ((pa, ca), (pb, cb)) = (w[0], w[1]);
            pa - ca * (pb - pa) / (cb - ca)
        })
        .collect();
    Ok(CompressibilityProfile {
        points,
        sign_changes,
    })
}

/// `(P, rho) = (-2, 2)`: the false vacuum, where pressure equals minus density.
pub fn false_vacuum_state() -> (f64, f64) {
    (-2.0, 2.0)
}
