//! Energy and force curves over grids of `P`, and the branch structure of the
//! periodic family.
//!
//! Periodic pressures are handled in the logit coordinate `t = ln(gap / |P|)`,
//! which resolves both divergent ends of `(-V(pi), 0)` evenly. For `n = 2` and
//! `eps > 1/4` the period diverges at both ends, so `L(P)` has an interior
//! minimum `P_star` where a lower (true-vacuum) and an upper (false-vacuum)
//! branch meet.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{DsgError, Result};
use crate::orbit::{
    classify, soliton_metrics, IntoPressure, OrbitSummary, Pressure, SolutionClass, FLOOR_GUARD,
    SEPARATRIX_GUARD,
};
use crate::potential::{PotentialParams, VacuumKind};

/// Range of the logit coordinate scanned for stationary points of `L`.
const LOGIT_SPAN: f64 = 27.0;
/// Scan spacing in the logit coordinate.
const LOGIT_STEP: f64 = 0.25;
/// Floor gaps used to probe whether the period diverges at the floor.
const DIVERGENCE_PROBES: [f64; 3] = [1e-10, 1e-12, 1e-14];
/// A logarithmic divergence grows by equal amounts per decade and a power law
/// by more; a convergent end shrinks its increments by about 100x per two
/// decades. Anything above this ratio counts as divergent.
const DIVERGENCE_RATIO: f64 = 0.3;
/// Nodes on each side of a stationary point of `L` where the force is not reported.
const FORCE_EXCLUSION: usize = 3;
/// Bisection width on `eps` in [`critical_epsilon`].
const EPS_TOL: f64 = 1e-3;
/// Largest coupling searched by [`critical_epsilon`].
const EPS_SEARCH_MAX: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Single,
    /// `P > P_star`: separated by true vacuum.
    Lower,
    /// `P < P_star`: the false-vacuum plateau.
    Upper,
    /// General `n`: counted down from the separatrix.
    Index(u32),
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Single => f.write_str("single"),
            Self::Lower => f.write_str("lower"),
            Self::Upper => f.write_str("upper"),
            Self::Index(k) => write!(f, "branch-{k}"),
        }
    }
}

impl Serialize for Branch {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Default `P` grids.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Log-spaced points in each edge region.
    pub edge_points: usize,
    /// Points between the edge regions: uniform in `P` for periodic grids,
    /// log-spaced up to `step_like_max` for step-like ones.
    pub interior_points: usize,
    /// Smallest `|P|`.
    pub separatrix_clip: f64,
    /// Smallest `P + V(pi)` (periodic grids).
    pub floor_clip: f64,
    /// Width of each edge region in `P`.
    pub edge_width: f64,
    /// Largest `P` of step-like grids.
    pub step_like_max: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            edge_points: 400,
            interior_points: 200,
            separatrix_clip: 1e-9,
            floor_clip: 1e-9,
            edge_width: 0.1,
            step_like_max: 50.0,
        }
    }
}

fn log_space(lo: f64, hi: f64, n: usize) -> impl DoubleEndedIterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| {
        if i + 1 == n {
            hi
        } else if i == 0 {
            lo
        } else {
            (a + (b - a) * i as f64 / (n - 1) as f64).exp()
        }
    })
}

impl GridSpec {
    pub fn validate(&self, params: &PotentialParams, class: SolutionClass) -> Result<()> {
        let bad = |m: String| Err(DsgError::InvalidConfig(m));
        if self.edge_points < 2 {
            return bad(format!("edge_points must be >= 2, got {}", self.edge_points));
        }
        if !(self.separatrix_clip > SEPARATRIX_GUARD && self.separatrix_clip < self.edge_width) {
            return bad(format!(
                "separatrix_clip must lie in ({SEPARATRIX_GUARD}, edge_width), got {}",
                self.separatrix_clip
            ));
        }
        match class {
            SolutionClass::Periodic => {
                if !(self.floor_clip > FLOOR_GUARD && self.floor_clip < self.edge_width) {
                    return bad(format!(
                        "floor_clip must lie in ({FLOOR_GUARD}, edge_width), got {}",
                        self.floor_clip
                    ));
                }
                if !(2.0 * self.edge_width < params.center_value()) {
                    return bad(format!(
                        "edge_width {} leaves no interior in (-{}, 0)",
                        self.edge_width,
                        params.center_value()
                    ));
                }
            }
            SolutionClass::StepLike => {
                if !(self.step_like_max > self.edge_width && self.step_like_max.is_finite()) {
                    return bad(format!(
                        "step_like_max must exceed edge_width, got {}",
                        self.step_like_max
                    ));
                }
            }
            other => return bad(format!("no grid for class {other}")),
        }
        Ok(())
    }

    /// Grid ordered by increasing `P`.
    pub fn pressures(&self, params: &PotentialParams, class: SolutionClass) -> Result<Vec<Pressure>> {
        self.validate(params, class)?;
        let w = self.edge_width;
        let m = self.interior_points;
        let mut out: Vec<Pressure> = Vec::new();
        if class == SolutionClass::Periodic {
            let v = params.center_value();
            out.extend(
                log_space(self.floor_clip, w, self.edge_points)
                    .map(|g| Pressure::from_floor_gap(params, g)),
            );
            let (a, b) = (-v + w, -w);
            out.extend((1..=m).map(|i| Pressure::new(params, a + (b - a) * i as f64 / (m + 1) as f64)));
            out.extend(
                log_space(self.separatrix_clip, w, self.edge_points)
                    .rev()
                    .map(|q| Pressure::new(params, -q)),
            );
        } else {
            out.extend(log_space(self.separatrix_clip, w, self.edge_points).map(|q| Pressure::new(params, q)));
            // log-spaced as well, so the spacing in ln P has no jump at the edge
            out.extend(log_space(w, self.step_like_max, m + 1).skip(1).map(|q| Pressure::new(params, q)));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    #[serde(rename = "P")]
    pub p: f64,
    pub floor_gap: f64,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "E_sol")]
    pub e_sol: f64,
    pub rho_bar: f64,
    /// `-dE/dL`; `None` until [`force_curve`] runs, and next to stationary points of `L`.
    #[serde(rename = "F")]
    pub f: Option<f64>,
    pub branch: Branch,
}

impl CurvePoint {
    fn from_summary(s: &OrbitSummary) -> Self {
        Self {
            p: s.p,
            floor_gap: s.floor_gap,
            l: s.l,
            e_sol: s.e_sol,
            rho_bar: s.rho_bar,
            f: None,
            branch: Branch::Single,
        }
    }

    pub fn pressure(&self) -> Pressure {
        Pressure::from_parts(self.p, self.floor_gap)
    }
}

/// A grid point whose orbit could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailedPoint {
    #[serde(rename = "P")]
    pub p: f64,
    pub floor_gap: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub params: PotentialParams,
    pub class: SolutionClass,
    /// Ordered by increasing `P`.
    pub points: Vec<CurvePoint>,
    pub failures: Vec<FailedPoint>,
    #[serde(rename = "P_star")]
    pub p_star: Option<f64>,
    /// Pressures separating branches, in decreasing order.
    pub branch_breaks: Vec<BranchBreak>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BranchBreak {
    #[serde(rename = "P")]
    pub p: f64,
    /// `true` where `L` is stationary, `false` where it diverges.
    pub stationary: bool,
}

/// Orbit metrics for every grid point, evaluated in parallel and gathered in grid order.
pub fn build_curve<T: IntoPressure + Copy + Sync>(
    params: &PotentialParams,
    grid: &[T],
    class: SolutionClass,
) -> Result<SweepCurve> {
    let pressures: Vec<Pressure> = grid.iter().map(|&p| p.resolve(params)).collect();
    for pr in &pressures {
        let found = classify(params, *pr);
        if found != class {
            return Err(DsgError::MixedClasses {
                p: pr.value(),
                found,
                expected: class,
            });
        }
    }
    let results: Vec<(Pressure, Result<OrbitSummary>)> = pressures
        .par_iter()
        .map(|&pr| (pr, soliton_metrics(params, pr)))
        .collect();
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (pr, r) in results {
        match r {
            Ok(s) => points.push(CurvePoint::from_summary(&s)),
            Err(e) => failures.push(FailedPoint {
                p: pr.value(),
                floor_gap: pr.floor_gap(),
                error: e.to_string(),
            }),
        }
    }
    points.sort_by(|a, b| a.floor_gap.total_cmp(&b.floor_gap));
    failures.sort_by(|a, b| a.floor_gap.total_cmp(&b.floor_gap));
    Ok(SweepCurve {
        params: *params,
        class,
        points,
        failures,
        p_star: None,
        branch_breaks: Vec::new(),
    })
}

/// A range of periodic pressures on which `L` is finite, with divergent or
/// floor ends.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Segment {
    lo: f64,
    hi: f64,
    /// `lo` is the floor `-V(pi)` rather than a singular pressure.
    floor: bool,
}

impl Segment {
    /// Pressure at logit `t = ln((P - lo) / (hi - P))`.
    fn at(&self, params: &PotentialParams, t: f64) -> Pressure {
        if self.floor && self.hi == 0.0 {
            return Pressure::from_logit(params, t);
        }
        let w = self.hi - self.lo;
        let (below, above) = if t > 0.0 {
            let e = (-t).exp();
            (w / (1.0 + e), w * e / (1.0 + e))
        } else {
            let e = t.exp();
            (w * e / (1.0 + e), w / (1.0 + e))
        };
        let value = self.hi - above;
        if self.floor {
            Pressure::from_parts(value, below)
        } else {
            Pressure::new(params, value)
        }
    }
}

/// Pressures `-V(m)` at which the orbit grazes a false vacuum `m` in `(0, pi)`
/// that it can reach from `pi`; the period diverges there. Decreasing order.
pub fn singular_pressures(params: &PotentialParams) -> Vec<f64> {
    if params.n() == 2 {
        return Vec::new();
    }
    let vacua: Vec<_> = params
        .classify_vacua()
        .vacua
        .into_iter()
        .filter(|v| v.kind == VacuumKind::FalseVacuum && v.location < PI - 1e-9)
        .collect();
    let v_pi = params.center_value();
    let mut out: Vec<f64> = vacua
        .iter()
        .filter(|m| {
            m.value < v_pi
                && vacua
                    .iter()
                    .filter(|o| o.location > m.location)
                    .all(|o| o.value > m.value)
        })
        .map(|m| -m.value)
        .collect();
    out.sort_by(|a, b| b.total_cmp(a));
    out
}

fn segments(params: &PotentialParams) -> Vec<Segment> {
    let mut out = Vec::new();
    let mut hi = 0.0;
    for s in singular_pressures(params) {
        out.push(Segment { lo: s, hi, floor: false });
        hi = s;
    }
    out.push(Segment {
        lo: -params.center_value(),
        hi,
        floor: true,
    });
    out
}

fn l_of(params: &PotentialParams, pr: Pressure) -> f64 {
    soliton_metrics(params, pr).map(|s| s.l).unwrap_or(f64::INFINITY)
}

/// Whether `L -> infinity` as `P -> -V(pi)`.
pub fn floor_divergent(params: &PotentialParams) -> bool {
    let l: Vec<f64> = DIVERGENCE_PROBES
        .iter()
        .map(|&g| l_of(params, Pressure::from_floor_gap(params, g)))
        .collect();
    if l.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let d1 = l[1] - l[0];
    let d2 = l[2] - l[1];
    d1 > 1e-6 * l[0] && d2 > DIVERGENCE_RATIO * d1
}

/// Whether the periodic family has a second branch: the segment next to the
/// separatrix must diverge at its lower end too.
pub fn has_second_branch(params: &PotentialParams) -> bool {
    let top = segments(params)[0];
    !top.floor || floor_divergent(params)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

/// Interior local extrema of `L` on a segment, as `(t, is_minimum)`.
fn stationary_logits(params: &PotentialParams, seg: Segment) -> Vec<(f64, bool)> {
    let n = (2.0 * LOGIT_SPAN / LOGIT_STEP).round() as usize;
    let ts: Vec<f64> = (0..=n).map(|i| -LOGIT_SPAN + i as f64 * LOGIT_STEP).collect();
    let ls: Vec<f64> = ts.par_iter().map(|&t| l_of(params, seg.at(params, t))).collect();
    let mut out = Vec::new();
    for i in 1..n {
        let (a, b, c) = (ls[i - 1], ls[i], ls[i + 1]);
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            continue;
        }
        let is_min = b < a && b <= c;
        let is_max = b > a && b >= c;
        if !(is_min || is_max) {
            continue;
        }
        let sign = if is_min { 1.0 } else { -1.0 };
        let t = golden_min(
            |t| sign * l_of(params, seg.at(params, t)),
            ts[i - 1],
            ts[i + 1],
            1e-10,
        );
        out.push((t, is_min));
    }
    out
}

/// The pressure minimizing `L` between the separatrix and the next divergence
/// below it; `None` when the periodic family has a single branch.
pub fn locate_pstar(params: &PotentialParams) -> Option<f64> {
    if !has_second_branch(params) {
        return None;
    }
    let top = segments(params)[0];
    stationary_logits(params, top)
        .into_iter()
        .filter(|&(_, is_min)| is_min)
        .map(|(t, _)| top.at(params, t))
        .min_by(|a, b| l_of(params, *a).total_cmp(&l_of(params, *b)))
        .map(|pr| pr.value())
}

/// Branch boundaries of the periodic family, in decreasing `P`.
fn branch_breaks(params: &PotentialParams) -> (Option<f64>, Vec<BranchBreak>) {
    let p_star = locate_pstar(params);
    if params.n() == 2 {
        let breaks = p_star
            .map(|p| vec![BranchBreak { p, stationary: true }])
            .unwrap_or_default();
        return (p_star, breaks);
    }
    let mut breaks = Vec::new();
    for (i, seg) in segments(params).into_iter().enumerate() {
        if i > 0 {
            breaks.push(BranchBreak {
                p: seg.hi,
                stationary: false,
            });
        }
        // a floor segment that stays finite has no second branch to split off
        if seg.floor && !floor_divergent(params) {
            continue;
        }
        for (t, _) in stationary_logits(params, seg) {
            breaks.push(BranchBreak {
                p: seg.at(params, t).value(),
                stationary: true,
            });
        }
    }
    breaks.sort_by(|a, b| b.p.total_cmp(&a.p));
    (p_star, breaks)
}

/// Labels each point with its branch and records `P_star`.
pub fn assign_branches(mut curve: SweepCurve) -> SweepCurve {
    if curve.class != SolutionClass::Periodic {
        for pt in &mut curve.points {
            pt.branch = Branch::Single;
        }
        curve.p_star = None;
        curve.branch_breaks.clear();
        return curve;
    }
    let (p_star, breaks) = branch_breaks(&curve.params);
    let n2 = curve.params.n() == 2;
    for pt in &mut curve.points {
        pt.branch = if breaks.is_empty() {
            Branch::Single
        } else if n2 {
            if pt.p >= breaks[0].p {
                Branch::Lower
            } else {
                Branch::Upper
            }
        } else {
            Branch::Index(breaks.iter().filter(|b| b.p > pt.p).count() as u32)
        };
    }
    curve.p_star = p_star;
    curve.branch_breaks = breaks;
    curve
}

/// Coordinate in which curves are differentiated: the logit for periodic
/// pressures, `ln P` for step-like ones.
pub(crate) fn smooth_coordinate(class: SolutionClass, pr: Pressure) -> f64 {
    match class {
        SolutionClass::Periodic => pr.logit(),
        _ => pr.value().ln(),
    }
}

/// Derivative of the local interpolating polynomial through up to five
/// neighbouring nodes (fourth order where five fit); stencils shift inward at the ends.
pub(crate) fn nonuniform_derivative(t: &[f64], f: &[f64]) -> Vec<f64> {
    let n = t.len();
    assert!(n >= 3 && f.len() == n);
    let width = n.min(5);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(width / 2).min(n - width);
            let nodes = lo..lo + width;
            let ti = t[i];
            nodes
                .clone()
                .map(|j| {
                    let w = if j == i {
                        nodes.clone().filter(|&k| k != i).map(|k| 1.0 / (ti - t[k])).sum()
                    } else {
                        let num: f64 = nodes.clone().filter(|&k| k != i && k != j).map(|k| ti - t[k]).product();
                        let den: f64 = nodes.clone().filter(|&k| k != j).map(|k| t[j] - t[k]).product();
                        num / den
                    };
                    w * f[j]
                })
                .sum()
        })
        .collect()
}

/// Fills `F = -(dE/dt) / (dL/dt)` within each branch.
pub fn force_curve(mut curve: SweepCurve) -> Result<SweepCurve> {
    let class = curve.class;
    let breaks = curve.branch_breaks.clone();
    let mut start = 0;
    while start < curve.points.len() {
        let branch = curve.points[start].branch;
        let mut end = start;
        while end < curve.points.len() && curve.points[end].branch == branch {
            end += 1;
        }
        let run = &mut curve.points[start..end];
        if run.len() < 3 {
            return Err(DsgError::BranchTooSmall {
                p: run[0].p,
                points: run.len(),
            });
        }
        let t: Vec<f64> = run.iter().map(|pt| smooth_coordinate(class, pt.pressure())).collect();
        let e: Vec<f64> = run.iter().map(|pt| pt.e_sol).collect();
        let l: Vec<f64> = run.iter().map(|pt| pt.l).collect();
        let de = nonuniform_derivative(&t, &e);
        let dl = nonuniform_derivative(&t, &l);
        let (p_lo, p_hi) = (run[0].p, run[run.len() - 1].p);
        let below = breaks.iter().filter(|b| b.p <= p_lo).max_by(|a, b| a.p.total_cmp(&b.p));
        let above = breaks.iter().filter(|b| b.p >= p_hi).min_by(|a, b| a.p.total_cmp(&b.p));
        let stationary_below = below.is_some_and(|b| b.stationary);
        let stationary_above = above.is_some_and(|b| b.stationary);
        let len = run.len();
        for (i, pt) in run.iter_mut().enumerate() {
            let near_below = stationary_below && i < FORCE_EXCLUSION;
            let near_above = stationary_above && i + FORCE_EXCLUSION >= len;
            let f = -de[i] / dl[i];
            pt.f = (!(near_below || near_above) && f.is_finite()).then_some(f);
        }
        start = end;
    }
    Ok(curve)
}

/// Smallest `eps` at which the periodic family of harmonic `n` has a second
/// branch, by bisection to `1e-3`; `None` if there is no transition in `[0, 10]`.
pub fn critical_epsilon(n: u32) -> Result<Option<f64>> {
    let present = |eps: f64| -> Result<bool> { Ok(has_second_branch(&PotentialParams::new(eps, n)?)) };
    let (mut lo, mut hi) = (0.0, EPS_SEARCH_MAX);
    if present(lo)? || !present(hi)? {
        return Ok(None);
    }
    while hi - lo > EPS_TOL {
        let mid = 0.5 * (lo + hi);
        if present(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Builds, labels and differentiates a curve on the default grid for `class`.
pub fn sweep(params: &PotentialParams, grid: &GridSpec, class: SolutionClass) -> Result<SweepCurve> {
    let pressures = grid.pressures(params, class)?;
    force_curve(assign_branches(build_curve(params, &pressures, class)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dsg(eps: f64) -> PotentialParams {
        PotentialParams::double(eps).unwrap()
    }

    #[test]
    fn default_grids_classify_uniformly() {
        for eps in [0.0, 1.0, 10.0] {
            let params = dsg(eps);
            for class in [SolutionClass::Periodic, SolutionClass::StepLike] {
                let g = GridSpec::default().pressures(&params, class).unwrap();
                assert_eq!(g.len(), if class == SolutionClass::Periodic { 1000 } else { 600 });
                assert!(g.iter().all(|p| classify(&params, *p) == class));
                assert!(g.windows(2).all(|w| w[1].floor_gap() > w[0].floor_gap()));
            }
        }
    }

    #[test]
    fn grid_validation() {
        let params = dsg(1.0);
        let bad = [
            GridSpec { edge_points: 1, ..Default::default() },
            GridSpec { separatrix_clip: 1e-13, ..Default::default() },
            GridSpec { floor_clip: 0.0, ..Default::default() },
            GridSpec { edge_width: 1.5, ..Default::default() },
        ];
        for g in bad {
            assert!(matches!(
                g.pressures(&params, SolutionClass::Periodic),
                Err(DsgError::InvalidConfig(_))
            ));
        }
        let g = GridSpec { step_like_max: 0.05, ..Default::default() };
        assert!(g.pressures(&params, SolutionClass::StepLike).is_err());
        assert!(GridSpec::default().pressures(&params, SolutionClass::Forbidden).is_err());
    }

    #[test]
    fn mixed_classes_rejected() {
        let params = dsg(1.0);
        let r = build_curve(&params, &[-1.0, 0.5], SolutionClass::Periodic);
        assert!(matches!(r, Err(DsgError::MixedClasses { .. })));
    }

    #[test]
    fn build_curve_records_failures() {
        let params = dsg(1.0);
        let c = build_curve(&params, &[-1.0, -1e-13, -0.5], SolutionClass::Periodic).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.failures.len(), 1);
        assert!(c.points[0].p < c.points[1].p);
    }

    #[test]
    fn pstar_presence() {
        assert_eq!(locate_pstar(&dsg(0.1)), None);
        assert_eq!(locate_pstar(&dsg(0.2)), None);
        // L dips below its harmonic limit here but still has a single branch
        assert_eq!(locate_pstar(&dsg(0.15)), None);
        let p1 = dsg(1.0);
        let p_star = locate_pstar(&p1).unwrap();
        let l_star = soliton_metrics(&p1, p_star).unwrap().l;
        assert!(l_star <= 7.798);
        for dp in [-1e-3, 1e-3] {
            assert!(soliton_metrics(&p1, p_star + dp).unwrap().l > l_star);
        }
        assert!(locate_pstar(&dsg(0.3)).is_some());
        assert!(locate_pstar(&dsg(10.0)).is_some());
    }

    #[test]
    fn presence_flips_at_quarter() {
        assert!(!has_second_branch(&dsg(0.24)));
        assert!(has_second_branch(&dsg(0.26)));
    }

    #[test]
    fn branch_labels() {
        let p1 = dsg(1.0);
        let c = assign_branches(build_curve(&p1, &[-1.9996, -1.0, -0.5, -2.14e-5], SolutionClass::Periodic).unwrap());
        let labels: Vec<Branch> = c.points.iter().map(|p| p.branch).collect();
        assert_eq!(labels, [Branch::Upper, Branch::Upper, Branch::Lower, Branch::Lower]);
        let sg = PotentialParams::sine_gordon();
        let c = assign_branches(build_curve(&sg, &[-1.5, -0.5], SolutionClass::Periodic).unwrap());
        assert!(c.points.iter().all(|p| p.branch == Branch::Single));
        assert!(c.p_star.is_none());
    }

    #[test]
    fn derivative_is_exact_for_quartics() {
        let t = [0.0_f64, 0.3, 0.35, 1.0, 2.2, 2.3, 4.0];
        let f: Vec<f64> = t.iter().map(|x| x.powi(4) - 3.0 * x * x - x + 2.0).collect();
        let d = nonuniform_derivative(&t, &f);
        for (x, v) in t.iter().zip(d) {
            assert!((v - (4.0 * x.powi(3) - 6.0 * x - 1.0)).abs() < 1e-10, "{x}");
        }
        // three nodes: exact for quadratics
        let d = nonuniform_derivative(&t[..3], &[2.0, 2.0 + 0.3 * 0.3, 2.0 + 0.35 * 0.35]);
        assert!((d[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn tiny_branch_is_rejected() {
        let params = dsg(1.0);
        let c = assign_branches(build_curve(&params, &[-1.99, -1.5, -0.5, -0.3, -0.1], SolutionClass::Periodic).unwrap());
        assert!(matches!(force_curve(c), Err(DsgError::BranchTooSmall { .. })));
    }

    #[test]
    fn force_excluded_next_to_pstar() {
        let params = dsg(1.0);
        let grid: Vec<f64> = (1..40).map(|i| -2.0 + 0.05 * i as f64).collect();
        let c = force_curve(assign_branches(build_curve(&params, &grid, SolutionClass::Periodic).unwrap())).unwrap();
        let p_star = c.p_star.unwrap();
        let undefined: Vec<f64> = c.points.iter().filter(|p| p.f.is_none()).map(|p| p.p).collect();
        assert_eq!(undefined.len(), 2 * FORCE_EXCLUSION);
        assert!(undefined.iter().all(|p| (p - p_star).abs() < 0.05 * (FORCE_EXCLUSION as f64 + 1.0)));
    }

    #[test]
    fn odd_harmonic_branches() {
        let params = PotentialParams::new(1.0, 3).unwrap();
        // pi is the top of V for odd n, so the floor end stays finite
        assert!(!floor_divergent(&params));
        let sing = singular_pressures(&params);
        assert!(sing.iter().all(|&p| p < 0.0 && p > -params.center_value()));
        assert_eq!(has_second_branch(&params), !sing.is_empty());
    }
}
