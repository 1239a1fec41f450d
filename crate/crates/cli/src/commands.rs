use std::f64::consts::PI;

use dsg_core::integrate::{energy_density, HermiteSegment};
use dsg_core::orbit::SEPARATRIX_GUARD;
use dsg_core::sweep::BranchBreak;
use dsg_core::{
    assign_branches, build_curve, classify, compressibility_profile, critical_epsilon, diagram_from_curve,
    first_integral, force_curve, integrate, kink_rest_energy, soliton_metrics, CurvePoint, FailedPoint,
    FieldState, KinkSpec, PotentialParams, Pressure, SolutionClass, StateRow,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{ClassifySettings, KinkSettings, SolveSettings, SweepSettings};
use crate::output::{csv_writer, io_err, opt, sig, sink, Summary};
use crate::CliError;

/// Smallest floor gap `classify` accepts; closer orbits have a divergent period.
const CLASSIFY_FLOOR_MIN: f64 = 1e-9;
/// Fraction of grid rows that must succeed for a sweep to exit cleanly.
const MIN_SUCCESS: f64 = 0.9;

fn params(eps: f64, n: u32) -> Result<PotentialParams, CliError> {
    PotentialParams::new(eps, n).map_err(|e| CliError::Config(e.to_string()))
}

fn write_summary<C: Serialize, R: Serialize>(
    path: Option<&std::path::Path>,
    summary: &Summary<'_, C, R>,
) -> Result<(), CliError> {
    if let Some(p) = path {
        summary.write_to(&mut *sink(Some(p))?)?;
    }
    Ok(())
}

pub fn kink(s: &KinkSettings) -> Result<(), CliError> {
    s.validate()?;
    let specs = s
        .eps
        .values()
        .into_iter()
        .map(|e| KinkSpec::new(params(e, s.n)?, s.polarity).map_err(|e| CliError::Config(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let count = ((s.x_max - s.x_min) / s.x_step + 1e-9).floor() as usize + 1;
    let mut w = csv_writer(s.out.as_deref(), &["eps", "x", "phi", "dphi", "energy_density"])?;
    for k in &specs {
        let e = sig(k.params().eps());
        for i in 0..count {
            let x = s.x_min + s.x_step * i as f64;
            w.write_record([e.clone(), sig(x), sig(k.phi(x)), sig(k.slope(x)), sig(k.energy_density(x))])
                .map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)?;

    let energies: Vec<_> = specs
        .iter()
        .map(|k| json!({"eps": k.params().eps(), "rest_energy": kink_rest_energy(&k.params())}))
        .collect();
    let provenance = json!({
        "phi": "closed form",
        "dphi": "closed form (first-order equation)",
        "energy_density": "closed form",
        "rest_energy": "quadrature",
    });
    let result = json!({"rows_per_eps": count, "kinks": energies});
    write_summary(s.summary.as_deref(), &Summary::new("kink", s, provenance, result))
}

pub fn solve(s: &SolveSettings) -> Result<(), CliError> {
    let params = params(s.eps.single()?, s.n)?;
    let config = s.integrator()?;
    let start = match (s.p, s.dphi0) {
        (Some(p), None) => {
            let pr = Pressure::new(&params, p);
            if classify(&params, pr) == SolutionClass::Forbidden {
                return Err(CliError::Forbidden(format!("P = {p} is below the floor -{}", params.center_value())));
            }
            FieldState::at_center(pr.floor_gap())
        }
        (None, Some(d)) if d.is_finite() => FieldState::new(0.0, PI, d),
        _ => return Err(CliError::Config("give exactly one of p and dphi0".into())),
    };
    let traj = integrate(start, &params, &config).map_err(CliError::from_core)?;

    let mut w = csv_writer(s.out.as_deref(), &["x", "phi", "dphi", "P_instant", "H"])?;
    let mut row = |st: &FieldState| {
        w.write_record([
            sig(st.x),
            sig(st.phi),
            sig(st.dphi),
            sig(first_integral(st, &params)),
            sig(energy_density(st, &params)),
        ])
        .map_err(io_err)
    };
    match s.x_step {
        None => traj.samples.iter().try_for_each(&mut row)?,
        Some(h) => {
            let mut seg = 0;
            let end = traj.last().x;
            let mut i = 0usize;
            loop {
                let x = start.x + h * i as f64;
                if x > end + 1e-12 {
                    break;
                }
                while seg + 2 < traj.samples.len() && traj.samples[seg + 1].x < x {
                    seg += 1;
                }
                let st = if traj.samples.len() < 2 {
                    traj.samples[0]
                } else {
                    HermiteSegment::new(traj.samples[seg], traj.samples[seg + 1], &params).eval(x.min(end))
                };
                row(&st)?;
                i += 1;
            }
        }
    }
    w.flush().map_err(io_err)?;

    let result = json!({
        "P": traj.p0,
        "class": classify(&params, traj.p0),
        "samples": traj.samples.len(),
        "x_end": traj.last().x,
        "max_drift": traj.max_drift,
    });
    let provenance = json!({
        "trajectory": format!("runge-kutta ({})", serde_json::to_value(s.method).unwrap().as_str().unwrap()),
        "resampling": if s.x_step.is_some() { "cubic hermite" } else { "none" },
    });
    write_summary(s.summary.as_deref(), &Summary::new("solve", s, provenance, result))
}

pub fn classify_cmd(s: &ClassifySettings) -> Result<(), CliError> {
    let params = params(s.eps.single()?, s.n)?;
    let p = s.p.ok_or_else(|| CliError::Config("classify needs p".into()))?;
    if !p.is_finite() {
        return Err(CliError::Config(format!("p must be finite, got {p}")));
    }
    let pr = Pressure::new(&params, p);
    match classify(&params, pr) {
        SolutionClass::Forbidden => {
            return Err(CliError::Forbidden(format!(
                "P = {p} lies below the floor -{}",
                params.center_value()
            )))
        }
        SolutionClass::Separatrix => return Err(CliError::Forbidden(format!("P = {p} is the separatrix"))),
        _ => {}
    }
    if pr.floor_gap() < CLASSIFY_FLOOR_MIN || p.abs() <= SEPARATRIX_GUARD {
        return Err(CliError::Forbidden(format!("P = {p} is too close to a divergent limit")));
    }
    let summary = soliton_metrics(&params, pr).map_err(CliError::from_core)?;
    let provenance = json!({
        "class": "sign of P and V(pi)",
        "L": "quadrature",
        "Lambda": "quadrature",
        "E_sol": "quadrature",
        "rho_bar": "quadrature",
        "mean_potential": "quadrature",
        "phi_turn": "root bracketing",
    });
    let mut out = sink(s.out.as_deref())?;
    Summary::new("classify", s, provenance, summary).write_to(&mut *out)
}

/// One CSV row: a successful point or a failure.
enum Row<'a> {
    Ok(&'a CurvePoint, &'a StateRow),
    Failed(&'a FailedPoint),
}

impl Row<'_> {
    fn p(&self) -> f64 {
        match self {
            Row::Ok(c, _) => c.p,
            Row::Failed(f) => f.p,
        }
    }
}

#[derive(Serialize)]
struct SweepResult {
    class: SolutionClass,
    eps: f64,
    n: u32,
    rows: usize,
    failed: usize,
    #[serde(rename = "P_star")]
    p_star: Option<f64>,
    branch_breaks: Vec<BranchBreak>,
    rho_max: f64,
    #[serde(rename = "P_at_max")]
    p_at_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    inv_chi_sign_changes: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_c: Option<Option<f64>>,
}

/// `sweep` and `eos` share the table; `eos` adds the compressibility summary.
pub fn sweep_cmd(s: &SweepSettings, command: &str) -> Result<(), CliError> {
    let eps = s.eps.single()?;
    let params = params(eps, s.n)?;
    if !matches!(s.class, SolutionClass::Periodic | SolutionClass::StepLike) {
        return Err(CliError::Config(format!("class must be periodic or step-like, got {}", s.class)));
    }
    let grid: Vec<Pressure> = match &s.p_values {
        Some(v) => {
            if v.is_empty() || v.iter().any(|p| !p.is_finite()) {
                return Err(CliError::Config("p-values must be finite and non-empty".into()));
            }
            let mut v = v.clone();
            v.sort_by(f64::total_cmp);
            v.dedup();
            v.iter().map(|&p| Pressure::new(&params, p)).collect()
        }
        None => s.grid().pressures(&params, s.class).map_err(|e| CliError::Config(e.to_string()))?,
    };
    let curve = assign_branches(build_curve(&params, &grid, s.class).map_err(|e| CliError::Config(e.to_string()))?);
    let total = curve.points.len() + curve.failures.len();
    let success = curve.points.len() as f64 / total as f64;
    let curve = match force_curve(curve.clone()) {
        Ok(c) => c,
        Err(_) if success < MIN_SUCCESS => curve,
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let diagram = diagram_from_curve(&curve);

    let mut rows: Vec<Row> = curve
        .points
        .iter()
        .zip(&diagram.rows)
        .map(|(c, r)| Row::Ok(c, r))
        .chain(curve.failures.iter().map(Row::Failed))
        .collect();
    rows.sort_by(|a, b| a.p().total_cmp(&b.p()));
    let header = ["P_tension", "class", "branch", "L", "E_sol", "F", "rho_bar", "chi", "inv_chi", "error"];
    let mut w = csv_writer(s.out.as_deref(), &header)?;
    for row in &rows {
        let rec = match row {
            Row::Ok(c, r) => [
                sig(c.p),
                s.class.to_string(),
                c.branch.to_string(),
                sig(c.l),
                sig(c.e_sol),
                opt(c.f),
                sig(c.rho_bar),
                opt(r.chi),
                opt(r.inv_chi),
                String::new(),
            ],
            Row::Failed(f) => [
                sig(f.p),
                s.class.to_string(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
                f.error.clone(),
            ],
        };
        w.write_record(&rec).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;

    let eos = command == "eos";
    let sign_changes = if eos {
        Some(compressibility_profile(&diagram).map(|p| p.sign_changes).unwrap_or_default())
    } else {
        None
    };
    let eps_c = if s.find_eps_c {
        Some(critical_epsilon(s.n).map_err(CliError::from_core)?)
    } else {
        None
    };
    let result = SweepResult {
        class: s.class,
        eps,
        n: s.n,
        rows: curve.points.len(),
        failed: curve.failures.len(),
        p_star: curve.p_star,
        branch_breaks: curve.branch_breaks.clone(),
        rho_max: diagram.rho_max,
        p_at_max: diagram.p_at_max,
        inv_chi_sign_changes: sign_changes,
        eps_c,
    };
    let provenance = json!({
        "L": "quadrature",
        "E_sol": "quadrature",
        "rho_bar": "quadrature",
        "F": "finite differences of quadrature E_sol and L",
        "chi": "finite differences of quadrature rho_bar",
        "P_star": "golden-section search on quadrature L",
        "rho_max": "parabolic refinement of rho_bar rows",
        "eps_c": "bisection on presence of a second branch",
    });
    let summary = Summary::new(command, s, provenance, result);
    match s.summary.as_deref() {
        Some(p) => write_summary(Some(p), &summary)?,
        None => summary.write_to(&mut std::io::stderr().lock())?,
    }
    if success < MIN_SUCCESS {
        return Err(CliError::MostlyFailed {
            ok: curve.points.len(),
            total,
        });
    }
    Ok(())
}
