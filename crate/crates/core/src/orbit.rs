//! Classification and period/energy integrals of the `phi(0) = pi` solution family.
//!
//! Orbits are parametrized by the first integral `P`. Because the interesting
//! limits sit at `P -> 0` and `P -> -V(pi)`, a [`Pressure`] carries both `P` and
//! the floor gap `P + V(pi)` so that either end can be approached to full
//! relative precision.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{DsgError, Result};
use crate::integrate::{
    detect_events, energy_density, integrate, EventKind, FieldState, HermiteSegment,
    IntegratorConfig, Trajectory,
};
use crate::potential::PotentialParams;
use crate::quadrature::{self, Grading};

/// `|P|` at or below this is the separatrix.
pub const SEPARATRIX_TOL: f64 = 1e-14;
/// Orbit integrals are refused for `|P|` at or below this (the period diverges).
pub const SEPARATRIX_GUARD: f64 = 1e-12;
/// Periodic orbits are refused for floor gaps at or below this.
pub const FLOOR_GUARD: f64 = 1e-30;
/// Relative convergence target of the orbit quadratures.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Cells used to bracket the turning point.
const TURN_SCAN_CELLS: usize = 4096;
/// Energy-density peaks less prominent than this are ignored.
const PEAK_PROMINENCE: f64 = 1e-6;
/// Two peaks are the same phase if their `phi mod 2 pi` agree this closely.
const PHASE_MATCH: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionClass {
    StepLike,
    Periodic,
    Separatrix,
    Forbidden,
}

impl SolutionClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::StepLike => "step-like",
            Self::Periodic => "periodic",
            Self::Separatrix => "separatrix",
            Self::Forbidden => "forbidden",
        }
    }

    /// Number of solitons in one spatial period.
    pub fn solitons_per_period(&self) -> Option<u32> {
        match self {
            Self::StepLike => Some(1),
            Self::Periodic => Some(2),
            _ => None,
        }
    }
}

impl std::fmt::Display for SolutionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// First integral `P` together with its distance to the floor `-V(pi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pressure {
    value: f64,
    floor_gap: f64,
}

impl Pressure {
    pub fn new(params: &PotentialParams, p: f64) -> Self {
        Self {
            value: p,
            floor_gap: p + params.center_value(),
        }
    }

    /// `P = -V(pi) + gap`, keeping `gap` exact.
    pub fn from_floor_gap(params: &PotentialParams, gap: f64) -> Self {
        Self {
            value: gap - params.center_value(),
            floor_gap: gap,
        }
    }

    /// Periodic pressures from `t = ln(gap / |P|)`, exact at both ends.
    pub fn from_logit(params: &PotentialParams, t: f64) -> Self {
        let v = params.center_value();
        let (value, floor_gap) = if t > 0.0 {
            let e = (-t).exp();
            (-v * e / (1.0 + e), v / (1.0 + e))
        } else {
            let e = t.exp();
            (-v / (1.0 + e), v * e / (1.0 + e))
        };
        Self { value, floor_gap }
    }

    pub(crate) fn from_parts(value: f64, floor_gap: f64) -> Self {
        Self { value, floor_gap }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn floor_gap(&self) -> f64 {
        self.floor_gap
    }

    /// `ln(gap / |P|)`; finite only for periodic pressures.
    pub fn logit(&self) -> f64 {
        self.floor_gap.ln() - (-self.value).ln()
    }
}

/// Accepts either a bare `P` or a [`Pressure`].
pub trait IntoPressure {
    fn resolve(self, params: &PotentialParams) -> Pressure;
}

impl IntoPressure for f64 {
    fn resolve(self, params: &PotentialParams) -> Pressure {
        Pressure::new(params, self)
    }
}

impl IntoPressure for Pressure {
    fn resolve(self, _: &PotentialParams) -> Pressure {
        self
    }
}

pub fn classify(params: &PotentialParams, p: impl IntoPressure) -> SolutionClass {
    let pr = p.resolve(params);
    if !(pr.floor_gap > 0.0) {
        SolutionClass::Forbidden
    } else if pr.value.abs() <= SEPARATRIX_TOL {
        SolutionClass::Separatrix
    } else if pr.value > 0.0 {
        SolutionClass::StepLike
    } else {
        SolutionClass::Periodic
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Turn {
    phi: f64,
    /// `pi - phi`, kept separately for orbits hugging `pi`.
    u: f64,
}

/// Walks the bracket toward the sign change until it cannot shrink further;
/// returns the end where `f > 0`.
fn bisect_to_ulp(f: impl Fn(f64) -> f64, mut pos: f64, mut neg: f64) -> f64 {
    loop {
        let mid = 0.5 * (pos + neg);
        if mid == pos || mid == neg {
            return pos;
        }
        if f(mid) > 0.0 {
            pos = mid;
        } else {
            neg = mid;
        }
    }
}

fn turning(params: &PotentialParams, pr: Pressure) -> Result<Turn> {
    if pr.floor_gap < 0.0 || pr.value >= 0.0 {
        return Err(DsgError::NotPeriodic { p: pr.value });
    }
    if pr.floor_gap == 0.0 {
        return Ok(Turn { phi: PI, u: 0.0 });
    }
    let n = TURN_SCAN_CELLS;
    let h = PI / n as f64;
    let g_u = |u: f64| pr.floor_gap - params.center_drop(u);
    let g_phi = |phi: f64| pr.value + params.eval(phi);
    for k in 1..=n {
        if 2 * k <= n {
            if g_u(k as f64 * h) <= 0.0 {
                let u = bisect_to_ulp(g_u, (k - 1) as f64 * h, k as f64 * h);
                return Ok(Turn { phi: PI - u, u });
            }
        } else if g_phi((n - k) as f64 * h) <= 0.0 {
            let phi = bisect_to_ulp(g_phi, (n - k + 1) as f64 * h, (n - k) as f64 * h);
            return Ok(Turn { phi, u: PI - phi });
        }
    }
    // P + V(0) = P < 0, so the last cell always brackets a root
    Err(DsgError::NotPeriodic { p: pr.value })
}

/// Lower turning point `phi_t` in `(0, pi]` and its mirror `2 pi - phi_t`.
pub fn turning_points(params: &PotentialParams, p: impl IntoPressure) -> Result<(f64, f64)> {
    let pr = p.resolve(params);
    let t = turning(params, pr)?;
    Ok((t.phi, TAU - t.phi))
}

/// Local minima of `V` strictly inside `(lo, pi)`; none exist for `n = 2`.
fn interior_minima(params: &PotentialParams, lo: f64) -> Vec<f64> {
    if params.n() == 2 {
        return Vec::new();
    }
    params
        .false_vacua()
        .into_iter()
        .map(|v| v.location)
        .filter(|&m| m > lo && m < PI - 1e-9)
        .collect()
}

/// `[int 1/sqrt(2g), int sqrt(2g), int V/sqrt(2g)]` over `phi in [phi_t, pi]`
/// (periodic) or `[0, pi]` (step-like), where `g = P + V`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Integrals {
    i0: f64,
    i1: f64,
    i2: f64,
}

fn sum_pieces(
    f: impl Fn(f64) -> [f64; 3],
    breaks: &[f64],
) -> Result<Integrals> {
    let mut acc = [0.0; 3];
    for w in breaks.windows(2) {
        let v = quadrature::integrate(&f, w[0], w[1], Grading::Both, QUADRATURE_TOL)?;
        for k in 0..3 {
            acc[k] += v[k];
        }
    }
    Ok(Integrals {
        i0: acc[0],
        i1: acc[1],
        i2: acc[2],
    })
}

fn periodic_integrals(params: &PotentialParams, pr: Pressure, turn: Turn) -> Result<Integrals> {
    let (phi_t, u_t) = (turn.phi, turn.u);
    let delta = u_t;
    let gap = pr.floor_gap;
    let v_pi = params.center_value();
    let nf = f64::from(params.n());
    let parity = params.parity();
    let near_bottom = phi_t <= u_t;

    // phi = phi_t + delta sin^2(theta), so u = pi - phi = delta cos^2(theta)
    let f = |theta: f64| -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        let d = delta * s * s;
        let u = delta * c * c;
        let (g, v) = if u < 0.5 * u_t {
            let drop = params.center_drop(u);
            (gap - drop, v_pi - drop)
        } else {
            let (sh, snh) = if near_bottom {
                let m = phi_t + 0.5 * d;
                (m.sin(), (nf * m).sin())
            } else {
                let m = 0.5 * (u + u_t);
                (m.sin(), -parity * (nf * m).sin())
            };
            (params.difference(sh, snh, d), params.eval(phi_t + d))
        };
        if !(g > 0.0) {
            return [0.0; 3];
        }
        let w = 2.0 * delta * s * c / (2.0 * g).sqrt();
        [w, w * 2.0 * g, w * v]
    };

    let mut breaks = vec![0.0];
    for m in interior_minima(params, phi_t) {
        breaks.push(((m - phi_t) / delta).sqrt().min(1.0).asin());
    }
    breaks.push(FRAC_PI_2);
    sum_pieces(f, &breaks)
}

fn step_like_integrals(params: &PotentialParams, pr: Pressure) -> Result<Integrals> {
    let p = pr.value;
    let f = |phi: f64| -> [f64; 3] {
        let v = params.eval(phi);
        let g = p + v;
        let w = 1.0 / (2.0 * g).sqrt();
        [w, w * 2.0 * g, w * v]
    };
    let mut breaks = vec![0.0];
    breaks.extend(interior_minima(params, 0.0));
    breaks.push(PI);
    sum_pieces(f, &breaks)
}

fn orbit_integrals(params: &PotentialParams, pr: Pressure) -> Result<(SolutionClass, Integrals, Option<Turn>)> {
    let class = classify(params, pr);
    match class {
        SolutionClass::StepLike | SolutionClass::Periodic => {}
        _ => return Err(DsgError::NotPeriodicOrStepLike { class }),
    }
    if pr.value.abs() <= SEPARATRIX_GUARD
        || (class == SolutionClass::Periodic && pr.floor_gap <= FLOOR_GUARD)
    {
        return Err(DsgError::NotBounded { p: pr.value });
    }
    if class == SolutionClass::Periodic {
        let turn = turning(params, pr)?;
        Ok((class, periodic_integrals(params, pr, turn)?, Some(turn)))
    } else {
        Ok((class, step_like_integrals(params, pr)?, None))
    }
}

/// Full spatial period `Lambda`.
pub fn period_quadrature(params: &PotentialParams, p: impl IntoPressure) -> Result<f64> {
    soliton_metrics(params, p).map(|s| s.lambda)
}

/// `int H dx` over one period `Lambda`.
pub fn energy_per_period(params: &PotentialParams, p: impl IntoPressure) -> Result<f64> {
    soliton_metrics(params, p).map(|s| s.e_sol * f64::from(s.solitons))
}

/// One classified orbit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitSummary {
    pub params: PotentialParams,
    #[serde(rename = "P")]
    pub p: f64,
    /// `P + V(pi)`
    pub floor_gap: f64,
    pub class: SolutionClass,
    /// Lower turning point; periodic orbits only.
    pub phi_turn: Option<f64>,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E_sol")]
    pub e_sol: f64,
    pub rho_bar: f64,
    /// Period average of `V`, from its own quadrature.
    pub mean_potential: f64,
    pub solitons: u32,
}

impl OrbitSummary {
    pub fn pressure(&self) -> Pressure {
        Pressure {
            value: self.p,
            floor_gap: self.floor_gap,
        }
    }
}

pub fn soliton_metrics(params: &PotentialParams, p: impl IntoPressure) -> Result<OrbitSummary> {
    let pr = p.resolve(params);
    let (class, it, turn) = orbit_integrals(params, pr)?;
    let p = pr.value;
    let (lambda, l, e_sol) = match class {
        // the quarter [phi_t, pi] is traversed four times per period
        SolutionClass::Periodic => (4.0 * it.i0, 2.0 * it.i0, 2.0 * (it.i1 - p * it.i0)),
        // [0, pi] is half of one 2 pi winding
        _ => (2.0 * it.i0, 2.0 * it.i0, 2.0 * (p * it.i0 + 2.0 * it.i2)),
    };
    Ok(OrbitSummary {
        params: *params,
        p,
        floor_gap: pr.floor_gap,
        class,
        phi_turn: turn.map(|t| t.phi),
        lambda,
        l,
        e_sol,
        rho_bar: e_sol / l,
        mean_potential: it.i2 / it.i0,
        solitons: class.solitons_per_period().unwrap_or(1),
    })
}

/// `(int over [phi_t, pi], int over [pi, 2 pi - phi_t])` of `dphi / sqrt(2(P+V))`.
///
/// The second half is evaluated in its own coordinates, so agreement checks the
/// mirror symmetry of the orbit rather than re-using the first half.
pub fn half_domain_periods(params: &PotentialParams, p: impl IntoPressure) -> Result<(f64, f64)> {
    let pr = p.resolve(params);
    let (class, it, turn) = orbit_integrals(params, pr)?;
    let turn = match (class, turn) {
        (SolutionClass::Periodic, Some(t)) => t,
        _ => return Err(DsgError::NotPeriodic { p: pr.value }),
    };
    let b = TAU - turn.phi;
    let delta = turn.u;
    let nf = f64::from(params.n());
    let f = |theta: f64| -> [f64; 3] {
        let (s, c) = theta.sin_cos();
        let d = delta * s * s;
        let m = b - 0.5 * d;
        let g = params.difference(m.sin(), (nf * m).sin(), -d);
        if !(g > 0.0) {
            return [0.0; 3];
        }
        let w = 2.0 * delta * s * c / (2.0 * g).sqrt();
        [w, 0.0, 0.0]
    };
    let second = sum_pieces(f, &[0.0, FRAC_PI_2])?.i0;
    Ok((it.i0, second))
}

/// `(x = 0, phi = pi, dphi = sqrt(2(P + V(pi))))`
pub fn center_initial_state(params: &PotentialParams, p: impl IntoPressure) -> FieldState {
    FieldState::at_center(p.resolve(params).floor_gap)
}

/// Period from the spacing of successive center crossings of an RK trajectory.
pub fn period_rk(
    params: &PotentialParams,
    p: impl IntoPressure,
    config: &IntegratorConfig,
) -> Result<f64> {
    let pr = p.resolve(params);
    let class = classify(params, pr);
    if !matches!(class, SolutionClass::StepLike | SolutionClass::Periodic) {
        return Err(DsgError::NotPeriodicOrStepLike { class });
    }
    if pr.value.abs() <= SEPARATRIX_GUARD {
        return Err(DsgError::NotBounded { p: pr.value });
    }
    let traj = integrate(center_initial_state(params, pr), params, config)?;
    let xs: Vec<f64> = detect_events(&traj)
        .into_iter()
        .filter(|e| e.kind == EventKind::CenterCrossing)
        .map(|e| e.x)
        .collect();
    if xs.len() < 2 {
        return Err(DsgError::EventNotFound {
            found: xs.len(),
            x_max: config.x_max,
        });
    }
    Ok((xs[xs.len() - 1] - xs[0]) / (xs.len() - 1) as f64)
}

/// A local maximum of the energy density along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyPeak {
    pub x: f64,
    pub phi: f64,
    pub height: f64,
    pub prominence: f64,
}

/// Energy-density maxima, located as sign changes of `dH/dx = 2 phi' V'(phi)`
/// refined on the Hermite interpolant.
pub fn energy_peaks(traj: &Trajectory) -> Vec<EnergyPeak> {
    let params = traj.params;
    let slope = |s: &FieldState| 2.0 * s.dphi * params.grad(s.phi);
    // (x, phi, H, is_peak)
    let mut extrema: Vec<(f64, f64, f64, bool)> = Vec::new();
    for w in traj.samples.windows(2) {
        let (ha, hb) = (slope(&w[0]), slope(&w[1]));
        if ha == 0.0 || ha.signum() == hb.signum() {
            continue;
        }
        let s = HermiteSegment::new(w[0], w[1], &params).refine(slope);
        extrema.push((s.x, s.phi, energy_density(&s, &params), ha > 0.0));
    }
    let troughs: Vec<(f64, f64)> = extrema
        .iter()
        .filter(|e| !e.3)
        .map(|e| (e.0, e.2))
        .collect();
    extrema
        .iter()
        .filter(|e| e.3)
        .filter_map(|&(x, phi, h, _)| {
            let left = troughs.iter().rev().find(|t| t.0 < x).map(|t| t.1);
            let right = troughs.iter().find(|t| t.0 > x).map(|t| t.1);
            let base = match (left, right) {
                (Some(a), Some(b)) => a.max(b),
                (Some(a), None) | (None, Some(a)) => a,
                (None, None) => return None,
            };
            let prominence = h - base;
            (prominence > PEAK_PROMINENCE).then_some(EnergyPeak {
                x,
                phi,
                height: h,
                prominence,
            })
        })
        .collect()
}

/// Mean spacing of successive same-phase energy-density peaks (the
/// inter-soliton distance), over an even number of intervals.
pub fn peak_spacing(traj: &Trajectory) -> Option<f64> {
    let peaks = energy_peaks(traj);
    let first = peaks.first()?;
    let phase = first.phi.rem_euclid(TAU);
    let same: Vec<f64> = peaks
        .iter()
        .filter(|pk| {
            let d = (pk.phi.rem_euclid(TAU) - phase).abs();
            d.min(TAU - d) < PHASE_MATCH
        })
        .map(|pk| pk.x)
        .collect();
    let intervals = (same.len().saturating_sub(1)) & !1;
    if intervals == 0 {
        return None;
    }
    Some((same[intervals] - same[0]) / intervals as f64)
}

/// `(1 / (b - a)) int_a^b H dx` on the Hermite interpolant of a trajectory.
pub fn mean_energy_density(traj: &Trajectory, a: f64, b: f64) -> f64 {
    // three-point Gauss-Legendre on [-1, 1]
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let params = traj.params;
    let mut acc = 0.0;
    for w in traj.samples.windows(2) {
        let lo = w[0].x.max(a);
        let hi = w[1].x.min(b);
        if hi <= lo {
            continue;
        }
        let seg = HermiteSegment::new(w[0], w[1], &params);
        let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
        for (x, wt) in NODES.iter().zip(WEIGHTS) {
            acc += wt * half * energy_density(&seg.eval(mid + half * x), &params);
        }
    }
    acc / (b - a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::kink_rest_energy;
    use crate::integrate::first_integral;

    fn dsg(eps: f64) -> PotentialParams {
        PotentialParams::double(eps).unwrap()
    }

    #[test]
    fn classify_examples() {
        let p = dsg(1.0);
        assert_eq!(classify(&p, 0.42), SolutionClass::StepLike);
        assert_eq!(classify(&p, -1.8848), SolutionClass::Periodic);
        assert_eq!(classify(&p, -2.5), SolutionClass::Forbidden);
        assert_eq!(classify(&p, -2.0), SolutionClass::Forbidden);
        assert_eq!(classify(&p, 0.0), SolutionClass::Separatrix);
        assert_eq!(classify(&p, 5e-15), SolutionClass::Separatrix);
        // odd n lifts the floor to -(2 + 2 eps)
        let odd = PotentialParams::new(1.0, 3).unwrap();
        assert_eq!(classify(&odd, -3.0), SolutionClass::Periodic);
        assert_eq!(classify(&odd, -4.0), SolutionClass::Forbidden);
    }

    #[test]
    fn pressure_constructors_agree() {
        let params = dsg(1.0);
        for t in [-40.0, -3.0, 0.0, 2.5, 40.0] {
            let pr = Pressure::from_logit(&params, t);
            assert!((pr.logit() - t).abs() < 1e-12 * t.abs().max(1.0));
            assert!((pr.value() + 2.0 - pr.floor_gap()).abs() < 1e-15);
        }
        let pr = Pressure::from_floor_gap(&params, 1e-25);
        assert_eq!(pr.floor_gap(), 1e-25);
        assert_eq!(classify(&params, pr), SolutionClass::Periodic);
    }

    #[test]
    fn turning_point_examples() {
        let sg = PotentialParams::sine_gordon();
        assert_eq!(turning_points(&sg, -2.0).unwrap().0, PI);
        let (lo, hi) = turning_points(&sg, -1.0).unwrap();
        assert!((lo - FRAC_PI_2).abs() < 1e-14);
        assert!((hi - 3.0 * FRAC_PI_2).abs() < 1e-14);
        let p1 = dsg(1.0);
        let (t, _) = turning_points(&p1, -1.9996).unwrap();
        assert!((p1.eval(t) - 1.9996).abs() < 1e-12);
        assert!(matches!(turning_points(&p1, 0.5), Err(DsgError::NotPeriodic { .. })));
        assert!(matches!(turning_points(&p1, -2.5), Err(DsgError::NotPeriodic { .. })));
    }

    #[test]
    fn turning_point_residual_near_both_ends() {
        for eps in [0.0, 0.1, 1.0, 10.0] {
            let params = dsg(eps);
            for gap in [1e-20, 1e-8, 0.3, 1.7] {
                let pr = Pressure::from_floor_gap(&params, gap);
                let (t, _) = turning_points(&params, pr).unwrap();
                let r = pr.value() + params.eval(t);
                assert!(r.abs() < 1e-14, "eps {eps} gap {gap}: residual {r}");
            }
        }
    }

    #[test]
    fn sine_gordon_periods_match_elliptic_limits() {
        let sg = PotentialParams::sine_gordon();
        let s = soliton_metrics(&sg, Pressure::from_floor_gap(&sg, 1e-8)).unwrap();
        assert!((s.l - PI).abs() < 1e-3);
        assert!((s.lambda - 2.0 * s.l).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inter_soliton_distance() {
        let p1 = dsg(1.0);
        let lower = soliton_metrics(&p1, -2.14e-5).unwrap();
        let upper = soliton_metrics(&p1, -1.9996).unwrap();
        assert!((lower.l - 7.798).abs() / 7.798 < 0.02, "{}", lower.l);
        assert!((upper.l - 7.798).abs() / 7.798 < 0.02, "{}", upper.l);
        assert!((lower.l - upper.l).abs() / lower.l < 0.005);
    }

    #[test]
    fn near_separatrix_energy_matches_kink() {
        let sg = PotentialParams::sine_gordon();
        let e = energy_per_period(&sg, -1e-8).unwrap();
        assert!((e / 2.0 - 8.0).abs() < 1e-3);
        for eps in [1.0, 10.0] {
            let params = dsg(eps);
            let kink = kink_rest_energy(&params);
            let periodic = soliton_metrics(&params, -1e-9).unwrap();
            assert!((periodic.e_sol - kink).abs() < 1e-3);
            let step = soliton_metrics(&params, 1e-6).unwrap();
            assert!((step.e_sol - kink).abs() < 1e-3, "eps {eps}: {}", step.e_sol);
        }
    }

    #[test]
    fn floor_limit_density() {
        let sg = PotentialParams::sine_gordon();
        let s = soliton_metrics(&sg, Pressure::from_floor_gap(&sg, 1e-8)).unwrap();
        assert!((s.rho_bar - 2.0).abs() < 1e-3);
        // with a false vacuum the density approaches 2 from above as L grows
        let p1 = dsg(1.0);
        let rho: Vec<f64> = [1e-4, 1e-8, 1e-16, 1e-28]
            .iter()
            .map(|&g| soliton_metrics(&p1, Pressure::from_floor_gap(&p1, g)).unwrap().rho_bar)
            .collect();
        assert!(rho.windows(2).all(|w| w[1] < w[0] && w[1] > 2.0), "{rho:?}");
    }

    #[test]
    fn summary_bookkeeping() {
        let p1 = dsg(1.0);
        let s = soliton_metrics(&p1, -1.0).unwrap();
        assert_eq!(s.class, SolutionClass::Periodic);
        assert_eq!(s.solitons, 2);
        assert_eq!(s.rho_bar, s.e_sol / s.l);
        assert!((s.lambda - 2.0 * s.l).abs() < 1e-14);
        assert!((energy_per_period(&p1, -1.0).unwrap() - 2.0 * s.e_sol).abs() < 1e-12);
        let st = soliton_metrics(&p1, 0.42).unwrap();
        assert_eq!(st.class, SolutionClass::StepLike);
        assert_eq!(st.lambda, st.l);
        assert!(st.phi_turn.is_none());
    }

    #[test]
    fn density_identity_through_mean_potential() {
        for eps in [0.0, 1.0, 10.0] {
            let params = dsg(eps);
            for p in [-1.9, -1.0, -1e-3, 0.42, 50.0] {
                let s = soliton_metrics(&params, p).unwrap();
                let alt = s.p + 2.0 * s.mean_potential;
                assert!((s.rho_bar - alt).abs() < 1e-8, "eps {eps} P {p}");
            }
        }
    }

    #[test]
    fn half_domains_agree() {
        for eps in [0.0, 1.0, 10.0] {
            let params = dsg(eps);
            for p in [-1.5, -1.0, -0.2] {
                let (a, b) = half_domain_periods(&params, p).unwrap();
                assert!((a - b).abs() < 1e-12 * a, "eps {eps} P {p}: {a} {b}");
            }
        }
    }

    #[test]
    fn guards() {
        let p1 = dsg(1.0);
        assert!(matches!(soliton_metrics(&p1, 1e-13), Err(DsgError::NotBounded { .. })));
        assert!(matches!(soliton_metrics(&p1, -1e-13), Err(DsgError::NotBounded { .. })));
        assert!(matches!(
            soliton_metrics(&p1, Pressure::from_floor_gap(&p1, 1e-31)),
            Err(DsgError::NotBounded { .. })
        ));
        assert!(matches!(
            soliton_metrics(&p1, -3.0),
            Err(DsgError::NotPeriodicOrStepLike { class: SolutionClass::Forbidden })
        ));
        assert!(matches!(
            soliton_metrics(&p1, 0.0),
            Err(DsgError::NotPeriodicOrStepLike { class: SolutionClass::Separatrix })
        ));
    }

    #[test]
    fn rk_period_agrees_with_quadrature() {
        for (eps, p) in [(1.0, -1.0), (0.0, 1.0), (10.0, -1.5)] {
            let params = dsg(eps);
            let lambda = period_quadrature(&params, p).unwrap();
            let config = IntegratorConfig::default().with_x_max(4.2 * lambda);
            let rk = period_rk(&params, p, &config).unwrap();
            assert!((rk - lambda).abs() / lambda < 1e-6, "eps {eps} P {p}: {rk} vs {lambda}");
        }
    }

    #[test]
    fn rk_period_needs_two_crossings() {
        let params = dsg(1.0);
        let lambda = period_quadrature(&params, -1.0).unwrap();
        let config = IntegratorConfig::default().with_x_max(1.5 * lambda);
        assert!(matches!(
            period_rk(&params, -1.0, &config),
            Err(DsgError::EventNotFound { found: 1, .. })
        ));
    }

    #[test]
    fn center_crossings_count_whole_periods() {
        let params = dsg(1.0);
        let lambda = period_quadrature(&params, -1.0).unwrap();
        for (span, expected) in [(3.05, 3), (2.95, 2)] {
            let traj = integrate(
                center_initial_state(&params, -1.0),
                &params,
                &IntegratorConfig::default().with_x_max(span * lambda),
            )
            .unwrap();
            let n = detect_events(&traj)
                .iter()
                .filter(|e| e.kind == EventKind::CenterCrossing)
                .count();
            assert_eq!(n, expected, "span {span}");
        }
    }

    #[test]
    fn step_like_peak_spacing_is_l() {
        let params = dsg(1.0);
        let s = soliton_metrics(&params, 0.42).unwrap();
        let traj = integrate(
            center_initial_state(&params, 0.42),
            &params,
            &IntegratorConfig::default().with_x_max(8.0 * s.l),
        )
        .unwrap();
        let spacing = peak_spacing(&traj).unwrap();
        assert!((spacing - s.l).abs() < 1e-6, "{spacing} vs {}", s.l);
        // two sub-kink peaks per winding at eps = 1
        let peaks = energy_peaks(&traj);
        assert!(peaks.len() >= 14);
    }

    #[test]
    fn trajectory_average_matches_rho_bar() {
        for (eps, p) in [(1.0, -1.0), (1.0, 0.42), (10.0, -0.5)] {
            let params = dsg(eps);
            let s = soliton_metrics(&params, p).unwrap();
            let config = IntegratorConfig::default().with_x_max(1.5 * s.lambda);
            let traj = integrate(center_initial_state(&params, p), &params, &config).unwrap();
            let mean = mean_energy_density(&traj, 0.0, s.lambda);
            assert!((mean - s.rho_bar).abs() < 1e-8, "eps {eps} P {p}: {mean} vs {}", s.rho_bar);
            for st in &traj.samples {
                let h = energy_density(st, &params);
                let r = h - (first_integral(st, &params) + 2.0 * params.eval(st.phi));
                assert!(r.abs() < 1e-10);
                assert!((first_integral(st, &params) - s.p).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn step_like_winds_faster_than_sqrt_2p() {
        let params = dsg(10.0);
        let traj = integrate(
            center_initial_state(&params, 0.5),
            &params,
            &IntegratorConfig::default().with_x_max(30.0),
        )
        .unwrap();
        assert!(traj.samples.iter().all(|s| s.dphi >= 1.0 - 1e-9));
    }

    #[test]
    fn odd_harmonic_orbits() {
        let params = PotentialParams::new(1.0, 3).unwrap();
        for p in [-3.9, -2.0, -0.5, 0.7] {
            let s = soliton_metrics(&params, p).unwrap();
            let alt = s.p + 2.0 * s.mean_potential;
            assert!((s.rho_bar - alt).abs() < 1e-8, "P {p}");
            let lambda = s.lambda;
            let rk = period_rk(&params, p, &IntegratorConfig::default().with_x_max(3.2 * lambda))
                .unwrap();
            assert!((rk - lambda).abs() / lambda < 1e-6, "P {p}: {rk} vs {lambda}");
        }
    }
}
