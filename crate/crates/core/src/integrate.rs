//! Runge-Kutta integration of the static field equation `phi'' = V'(phi)`.
//!
//! The state `(phi, dphi)` is advanced either with classical fixed-step RK4 or
//! with the embedded Fehlberg 4(5) pair (fifth-order solution propagated). The
//! first integral `P = dphi^2/2 - V(phi)` is monitored on every accepted step.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{DsgError, Result};
use crate::potential::PotentialParams;

/// Magnitude of `phi` or `dphi` treated as a blow-up.
const BLOW_UP: f64 = 1e6;
/// Events are refined on the interpolant to this width in `x`.
const EVENT_X_TOL: f64 = 1e-12;
/// `|dphi|` below this is treated as identically zero by event detection.
const STATIONARY_DPHI: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldState {
    pub x: f64,
    pub phi: f64,
    pub dphi: f64,
}

impl FieldState {
    pub fn new(x: f64, phi: f64, dphi: f64) -> Self {
        Self { x, phi, dphi }
    }

    /// The family used throughout: `phi(x0) = pi` with slope fixed by `P`.
    ///
    /// `floor_gap` is `P + V(pi)`, so the slope is `sqrt(2 floor_gap)`.
    pub fn at_center(floor_gap: f64) -> Self {
        Self::new(0.0, PI, (2.0 * floor_gap.max(0.0)).sqrt())
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.phi.is_finite() && self.dphi.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4Fixed,
    Rkf45Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for RK4, initial step for RKF45.
    pub step: f64,
    /// Largest step RKF45 may take; keeps samples dense enough for events.
    pub max_step: f64,
    pub x_max: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::Rkf45Adaptive,
            step: 1e-3,
            max_step: 2e-3,
            x_max: 200.0,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn with_x_max(mut self, x_max: f64) -> Self {
        self.x_max = x_max;
        self
    }

    pub fn rk4(step: f64, x_max: f64) -> Self {
        let max_steps = (x_max / step).ceil() as usize + 1;
        Self {
            method: Method::Rk4Fixed,
            step,
            max_step: step,
            x_max,
            max_steps: max_steps.max(Self::default().max_steps),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(DsgError::InvalidConfig(what.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be > 0");
        }
        if !(self.max_step >= self.step && self.max_step.is_finite()) {
            return bad("max_step must be >= step");
        }
        if !(self.x_max > 0.0 && self.x_max.is_finite()) {
            return bad("x_max must be > 0");
        }
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return bad("tolerances must be > 0");
        }
        if (self.max_steps as f64) < self.x_max / self.step {
            return bad("max_steps must be >= x_max / step");
        }
        Ok(())
    }
}

/// `(dphi/dx, d2phi/dx2)` for the static equation.
pub fn derivs(state: &FieldState, params: &PotentialParams) -> (f64, f64) {
    (state.dphi, params.grad(state.phi))
}

/// `P = dphi^2 / 2 - V(phi)`
pub fn first_integral(state: &FieldState, params: &PotentialParams) -> f64 {
    0.5 * state.dphi * state.dphi - params.eval(state.phi)
}

/// Energy density `H = dphi^2 / 2 + V(phi)`.
pub fn energy_density(state: &FieldState, params: &PotentialParams) -> f64 {
    0.5 * state.dphi * state.dphi + params.eval(state.phi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: PotentialParams,
    pub samples: Vec<FieldState>,
    /// First integral of the initial condition.
    pub p0: f64,
    /// Largest `|P(x) - p0|` over accepted steps.
    pub max_drift: f64,
}

impl Trajectory {
    pub fn first(&self) -> &FieldState {
        &self.samples[0]
    }

    pub fn last(&self) -> &FieldState {
        self.samples.last().expect("trajectory is never empty")
    }
}

type Vec2 = [f64; 2];

fn rhs(params: &PotentialParams, y: Vec2) -> Vec2 {
    [y[1], params.grad(y[0])]
}

fn axpy(y: Vec2, h: f64, terms: &[(f64, Vec2)]) -> Vec2 {
    let mut out = y;
    for &(c, k) in terms {
        out[0] += h * c * k[0];
        out[1] += h * c * k[1];
    }
    out
}

fn rk4_step(params: &PotentialParams, y: Vec2, h: f64) -> Vec2 {
    let k1 = rhs(params, y);
    let k2 = rhs(params, axpy(y, h, &[(0.5, k1)]));
    let k3 = rhs(params, axpy(y, h, &[(0.5, k2)]));
    let k4 = rhs(params, axpy(y, h, &[(1.0, k3)]));
    axpy(
        y,
        h,
        &[(1.0 / 6.0, k1), (1.0 / 3.0, k2), (1.0 / 3.0, k3), (1.0 / 6.0, k4)],
    )
}

/// One Fehlberg step: (fifth-order solution, fourth-order solution).
fn rkf45_step(params: &PotentialParams, y: Vec2, h: f64) -> (Vec2, Vec2) {
    let k1 = rhs(params, y);
    let k2 = rhs(params, axpy(y, h, &[(1.0 / 4.0, k1)]));
    let k3 = rhs(params, axpy(y, h, &[(3.0 / 32.0, k1), (9.0 / 32.0, k2)]));
    let k4 = rhs(
        params,
        axpy(
            y,
            h,
            &[(1932.0 / 2197.0, k1), (-7200.0 / 2197.0, k2), (7296.0 / 2197.0, k3)],
        ),
    );
    let k5 = rhs(
        params,
        axpy(
            y,
            h,
            &[
                (439.0 / 216.0, k1),
                (-8.0, k2),
                (3680.0 / 513.0, k3),
                (-845.0 / 4104.0, k4),
            ],
        ),
    );
    let k6 = rhs(
        params,
        axpy(
            y,
            h,
            &[
                (-8.0 / 27.0, k1),
                (2.0, k2),
                (-3544.0 / 2565.0, k3),
                (1859.0 / 4104.0, k4),
                (-11.0 / 40.0, k5),
            ],
        ),
    );
    let y5 = axpy(
        y,
        h,
        &[
            (16.0 / 135.0, k1),
            (6656.0 / 12825.0, k3),
            (28561.0 / 56430.0, k4),
            (-9.0 / 50.0, k5),
            (2.0 / 55.0, k6),
        ],
    );
    let y4 = axpy(
        y,
        h,
        &[
            (25.0 / 216.0, k1),
            (1408.0 / 2565.0, k3),
            (2197.0 / 4104.0, k4),
            (-1.0 / 5.0, k5),
        ],
    );
    (y5, y4)
}

/// Integrates from `ic.x` to `ic.x + config.x_max`.
pub fn integrate(
    ic: FieldState,
    params: &PotentialParams,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if !ic.is_finite() {
        return Err(DsgError::NonFiniteState {
            x: ic.x,
            phi: ic.phi,
            dphi: ic.dphi,
        });
    }
    let p0 = first_integral(&ic, params);
    let x_end = ic.x + config.x_max;
    let mut samples = vec![ic];
    let mut max_drift: f64 = 0.0;
    let mut x = ic.x;
    let mut y = [ic.phi, ic.dphi];
    let mut h = config.step.min(config.max_step);
    let mut steps = 0usize;

    while x < x_end {
        if steps >= config.max_steps {
            return Err(DsgError::StepLimitExceeded { steps, x });
        }
        steps += 1;
        let remaining = x_end - x;
        let last = remaining <= h * (1.0 + 1e-12);
        let h_try = if last { remaining } else { h };

        let y_new = match config.method {
            Method::Rk4Fixed => rk4_step(params, y, h_try),
            Method::Rkf45Adaptive => {
                let (y5, y4) = rkf45_step(params, y, h_try);
                let err = (0..2)
                    .map(|i| {
                        let mut size = y[i].abs().max(y5[i].abs());
                        if i == 0 {
                            // V is 2 pi periodic: a wound-up angle is no more precise than pi
                            size = size.min(PI);
                        }
                        let scale = config.abs_tol + config.rel_tol * size;
                        ((y5[i] - y4[i]) / scale).abs()
                    })
                    .fold(0.0, f64::max);
                let factor = if err == 0.0 {
                    5.0
                } else {
                    (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                };
                if err > 1.0 {
                    h = (h_try * factor).max(f64::EPSILON * x.abs().max(1.0));
                    continue;
                }
                h = (h_try * factor).min(config.max_step);
                y5
            }
        };

        x = if last { x_end } else { x + h_try };
        y = y_new;
        let state = FieldState::new(x, y[0], y[1]);
        if !state.is_finite() || y[0].abs() > BLOW_UP || y[1].abs() > BLOW_UP {
            return Err(DsgError::NonFiniteState {
                x,
                phi: y[0],
                dphi: y[1],
            });
        }
        max_drift = max_drift.max((first_integral(&state, params) - p0).abs());
        samples.push(state);
    }

    Ok(Trajectory {
        params: *params,
        samples,
        p0,
        max_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    /// `phi = pi (mod 2 pi)` crossed with `dphi > 0`.
    CenterCrossing,
    /// `dphi = 0`.
    TurningPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub kind: EventKind,
    pub x: f64,
    pub state: FieldState,
}

/// Cubic Hermite interpolant of `(phi, dphi)` between two samples.
#[derive(Debug, Clone, Copy)]
pub struct HermiteSegment {
    a: FieldState,
    b: FieldState,
    dd_a: f64,
    dd_b: f64,
}

impl HermiteSegment {
    pub fn new(a: FieldState, b: FieldState, params: &PotentialParams) -> Self {
        Self {
            a,
            b,
            dd_a: params.grad(a.phi),
            dd_b: params.grad(b.phi),
        }
    }

    fn cubic(h: f64, s: f64, f0: f64, d0: f64, f1: f64, d1: f64) -> f64 {
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
    }

    pub fn eval(&self, x: f64) -> FieldState {
        let h = self.b.x - self.a.x;
        let s = (x - self.a.x) / h;
        FieldState::new(
            x,
            Self::cubic(h, s, self.a.phi, self.a.dphi, self.b.phi, self.b.dphi),
            Self::cubic(h, s, self.a.dphi, self.dd_a, self.b.dphi, self.dd_b),
        )
    }

    /// Bisection on `f(interpolated state)`; requires a sign change across the segment.
    pub fn refine(&self, f: impl Fn(&FieldState) -> f64) -> FieldState {
        let mut lo = self.a.x;
        let mut hi = self.b.x;
        let mut f_lo = f(&self.a);
        while hi - lo > EVENT_X_TOL {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let f_mid = f(&self.eval(mid));
            if f_mid == 0.0 {
                return self.eval(mid);
            }
            if f_mid.signum() == f_lo.signum() {
                lo = mid;
                f_lo = f_mid;
            } else {
                hi = mid;
            }
        }
        self.eval(0.5 * (lo + hi))
    }
}

fn center_condition(s: &FieldState) -> f64 {
    (0.5 * s.phi).cos()
}

fn turning_condition(s: &FieldState) -> f64 {
    s.dphi
}

/// All center crossings and turning points on `(x0, x_end]`.
pub fn detect_events(traj: &Trajectory) -> Vec<EventRecord> {
    let mut events = Vec::new();
    for (i, w) in traj.samples.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let segment = HermiteSegment::new(a, b, &traj.params);

        // an event sitting on the initial sample is not counted
        let (ca, cb) = (center_condition(&a), center_condition(&b));
        let at_start = i == 0 && ca.abs() <= STATIONARY_DPHI;
        if !at_start && ca != 0.0 && ca.signum() != cb.signum() {
            let s = segment.refine(center_condition);
            if s.dphi > STATIONARY_DPHI {
                events.push(EventRecord {
                    kind: EventKind::CenterCrossing,
                    x: s.x,
                    state: s,
                });
            }
        }

        let (ta, tb) = (turning_condition(&a), turning_condition(&b));
        let moving = ta.abs() > STATIONARY_DPHI || tb.abs() > STATIONARY_DPHI;
        let at_start = i == 0 && ta.abs() <= STATIONARY_DPHI;
        if moving && !at_start && ta != 0.0 && ta.signum() != tb.signum() {
            let s = segment.refine(turning_condition);
            events.push(EventRecord {
                kind: EventKind::TurningPoint,
                x: s.x,
                state: s,
            });
        }
    }
    events.sort_by(|a, b| a.x.total_cmp(&b.x));
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{KinkSpec, Polarity};
    use std::f64::consts::TAU;

    fn dsg(eps: f64) -> PotentialParams {
        PotentialParams::double(eps).unwrap()
    }

    fn from_p(params: &PotentialParams, p: f64) -> FieldState {
        FieldState::at_center(p + params.center_value())
    }

    #[test]
    fn derivs_examples() {
        let s = FieldState::new(0.0, 0.0, 0.0);
        assert_eq!(derivs(&s, &dsg(0.7)), (0.0, 0.0));
        let (a, b) = derivs(&FieldState::new(0.0, PI, 0.0), &dsg(3.0));
        assert_eq!(a, 0.0);
        assert!(b.abs() < 1e-14);
        let (a, b) = derivs(&FieldState::new(0.0, PI / 2.0, 1.0), &dsg(1.0));
        assert_eq!(a, 1.0);
        assert!((b - 1.0).abs() < 1e-15);
    }

    #[test]
    fn first_integral_examples() {
        let p = dsg(1.0);
        assert!((first_integral(&FieldState::new(0.0, PI, 0.0), &p) + 2.0).abs() < 1e-15);
        assert_eq!(first_integral(&FieldState::new(0.0, 0.0, 0.0), &p), 0.0);
        assert!(first_integral(&FieldState::new(0.0, PI, 2.0), &p).abs() < 1e-15);
    }

    #[test]
    fn separatrix_matches_exact_kink() {
        let params = PotentialParams::sine_gordon();
        let traj = integrate(
            FieldState::new(0.0, PI, 2.0),
            &params,
            &IntegratorConfig::default().with_x_max(10.0),
        )
        .unwrap();
        let kink = KinkSpec::new(params, Polarity::Kink).unwrap();
        let err = traj
            .samples
            .iter()
            .map(|s| (s.phi - kink.phi(s.x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "max error {err}");
    }

    #[test]
    fn fixed_point_stays_put() {
        for eps in [0.0, 1.0, 10.0] {
            let traj = integrate(
                FieldState::new(0.0, PI, 0.0),
                &dsg(eps),
                &IntegratorConfig::default().with_x_max(20.0),
            )
            .unwrap();
            assert!(traj.samples.iter().all(|s| (s.phi - PI).abs() < 1e-12));
            assert!(detect_events(&traj).is_empty());
        }
    }

    #[test]
    fn step_like_is_monotone() {
        let params = dsg(1.0);
        let traj = integrate(
            from_p(&params, 0.42),
            &params,
            &IntegratorConfig::default().with_x_max(60.0),
        )
        .unwrap();
        assert!(traj.samples.windows(2).all(|w| w[1].phi > w[0].phi));
        // dphi >= sqrt(2P) everywhere
        let floor = (2.0f64 * 0.42).sqrt();
        assert!(traj.samples.iter().all(|s| s.dphi >= floor - 1e-9));
        assert!(traj.last().phi > 4.0 * TAU);
    }

    #[test]
    fn drift_stays_below_bound() {
        for eps in [0.0, 1.0, 10.0] {
            for p in [0.42, -1.0, -1.9996] {
                let params = dsg(eps);
                let traj = integrate(
                    from_p(&params, p),
                    &params,
                    &IntegratorConfig::default().with_x_max(50.0),
                )
                .unwrap();
                assert!(traj.max_drift < 1e-8, "eps {eps} P {p}: {}", traj.max_drift);
            }
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        // steps above ~0.02 sit in a pre-asymptotic regime where the drift falls like h^5
        let params = dsg(0.1);
        let ic = from_p(&params, -1.0);
        let coarse = integrate(ic, &params, &IntegratorConfig::rk4(0.01, 50.0)).unwrap();
        let fine = integrate(ic, &params, &IntegratorConfig::rk4(0.005, 50.0)).unwrap();
        let order = (coarse.max_drift / fine.max_drift).log2();
        assert!((3.7..=4.3).contains(&order), "measured order {order}");
    }

    #[test]
    fn reversible() {
        let params = dsg(1.0);
        let ic = from_p(&params, -1.0);
        let config = IntegratorConfig::default().with_x_max(20.0);
        let fwd = integrate(ic, &params, &config).unwrap();
        let end = *fwd.last();
        // phi(-x) solves the same equation, so flip the slope and go forward again
        let back = integrate(FieldState::new(0.0, end.phi, -end.dphi), &params, &config).unwrap();
        let r = back.last();
        assert!((r.phi - ic.phi).abs() < 1e-9);
        assert!((-r.dphi - ic.dphi).abs() < 1e-9);
    }

    #[test]
    fn blow_up_is_reported() {
        // far outside the bounded family the field runs away quickly
        let params = dsg(1.0);
        let config = IntegratorConfig {
            max_step: 1e-3,
            ..IntegratorConfig::default().with_x_max(1e3)
        };
        let r = integrate(FieldState::new(0.0, 0.0, 5e5), &params, &config);
        assert!(matches!(r, Err(DsgError::NonFiniteState { .. })));
    }

    #[test]
    fn step_limit_is_reported() {
        let params = dsg(1.0);
        let config = IntegratorConfig {
            max_steps: 10_000,
            step: 1e-3,
            max_step: 1e-3,
            ..IntegratorConfig::default().with_x_max(10.0)
        };
        let r = integrate(from_p(&params, -1.0), &params, &config);
        assert!(matches!(r, Err(DsgError::StepLimitExceeded { .. })));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let params = dsg(1.0);
        let ic = from_p(&params, -1.0);
        for config in [
            IntegratorConfig { step: 0.0, ..Default::default() },
            IntegratorConfig { x_max: -1.0, ..Default::default() },
            IntegratorConfig { abs_tol: 0.0, ..Default::default() },
            IntegratorConfig { max_steps: 10, ..Default::default() },
        ] {
            assert!(matches!(
                integrate(ic, &params, &config),
                Err(DsgError::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn separatrix_has_one_center_crossing() {
        let params = PotentialParams::sine_gordon();
        // start left of the center so the crossing is interior
        let kink = KinkSpec::new(params, Polarity::Kink).unwrap();
        let x0 = -5.0;
        let ic = FieldState::new(x0, kink.phi(x0), kink.slope(x0));
        let traj = integrate(ic, &params, &IntegratorConfig::default().with_x_max(10.0)).unwrap();
        let events = detect_events(&traj);
        let centers: Vec<_> = events
            .iter()
            .filter(|e| e.kind == EventKind::CenterCrossing)
            .collect();
        assert_eq!(centers.len(), 1);
        assert!(centers[0].x.abs() < 1e-7);
        assert!(events.iter().all(|e| e.kind != EventKind::TurningPoint));
    }

    #[test]
    fn periodic_events_are_evenly_spaced() {
        let params = dsg(1.0);
        let traj = integrate(
            from_p(&params, -1.0),
            &params,
            &IntegratorConfig::default().with_x_max(40.0),
        )
        .unwrap();
        let events = detect_events(&traj);
        for kind in [EventKind::CenterCrossing, EventKind::TurningPoint] {
            let xs: Vec<f64> = events.iter().filter(|e| e.kind == kind).map(|e| e.x).collect();
            assert!(xs.len() >= 4);
            let gaps: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let (lo, hi) = gaps
                .iter()
                .fold((f64::INFINITY, 0.0f64), |(lo, hi), &g| (lo.min(g), hi.max(g)));
            let spread = (hi - lo) / hi;
            // turning points alternate between the two symmetric ends, so they come at half periods
            assert!(spread < 1e-8, "{kind:?} spread {spread}");
        }
        for e in &events {
            match e.kind {
                EventKind::CenterCrossing => {
                    assert!(center_condition(&e.state).abs() < 1e-10);
                    assert!(e.state.dphi > 0.0);
                }
                EventKind::TurningPoint => assert!(e.state.dphi.abs() < 1e-10),
            }
        }
    }
}
