//! The (multi-)double sine-Gordon potential
//!
//! ```text
//! V(phi) = (1 - cos phi) + eps (1 - cos n phi) = 2 sin^2(phi/2) + 2 eps sin^2(n phi/2)
//! ```
//!
//! The half-angle form is what gets evaluated: it has no cancellation near the
//! true vacua, which matters for orbits that graze them.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{DsgError, Result};

/// Number of grid cells used to bracket stationary points of `V`.
const VACUUM_SCAN_CELLS: usize = 4096;
/// Absolute tolerance of the bisection on `V'`.
const VACUUM_ROOT_TOL: f64 = 1e-12;

/// Coupling `eps >= 0` and harmonic index `n >= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialParams {
    eps: f64,
    n: u32,
}

impl PotentialParams {
    pub fn new(eps: f64, n: u32) -> Result<Self> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(DsgError::InvalidParams(format!(
                "eps must be finite and >= 0, got {eps}"
            )));
        }
        if n < 2 {
            return Err(DsgError::InvalidParams(format!(
                "harmonic index n must be >= 2, got {n}"
            )));
        }
        Ok(Self { eps, n })
    }

    /// The `n = 2` family.
    pub fn double(eps: f64) -> Result<Self> {
        Self::new(eps, 2)
    }

    /// Ordinary sine-Gordon (`eps = 0`).
    pub fn sine_gordon() -> Self {
        Self { eps: 0.0, n: 2 }
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `(-1)^n`
    pub(crate) fn parity(&self) -> f64 {
        if self.n.is_multiple_of(2) {
            1.0
        } else {
            -1.0
        }
    }

    /// `V(phi)`
    pub fn eval(&self, phi: f64) -> f64 {
        let a = (0.5 * phi).sin();
        let b = (0.5 * self.nf() * phi).sin();
        2.0 * a * a + 2.0 * self.eps * b * b
    }

    /// `dV/dphi = sin phi + n eps sin(n phi)`
    ///
    /// Evaluated from the offset to the nearest multiple of `pi`, so that the
    /// stationary points `k pi` are exact fixed points of the field equation.
    pub fn grad(&self, phi: f64) -> f64 {
        let n = self.nf();
        let k = (phi / PI).round();
        let r = phi - k * PI;
        let odd = k.rem_euclid(2.0) == 1.0;
        let s1 = if odd { -r.sin() } else { r.sin() };
        let sn = if odd && self.n % 2 == 1 {
            -(n * r).sin()
        } else {
            (n * r).sin()
        };
        s1 + n * self.eps * sn
    }

    /// `d2V/dphi2 = cos phi + n^2 eps cos(n phi)`
    pub fn curvature(&self, phi: f64) -> f64 {
        let n = self.nf();
        phi.cos() + n * n * self.eps * (n * phi).cos()
    }

    /// `V(pi)`: 2 for even `n`, `2 + 2 eps` for odd `n`.
    pub fn center_value(&self) -> f64 {
        2.0 + self.eps * (1.0 - self.parity())
    }

    /// `V(pi) - V(pi - u)`, evaluated without cancellation for small `u`.
    pub(crate) fn center_drop(&self, u: f64) -> f64 {
        let a = (0.5 * u).sin();
        let b = (0.5 * self.nf() * u).sin();
        2.0 * a * a - 2.0 * self.eps * self.parity() * b * b
    }

    /// `V(a) - V(b)` from the half-sum and half-difference of the arguments.
    ///
    /// `sin_half_sum` is `sin((a+b)/2)`, `sin_n_half_sum` is `sin(n(a+b)/2)` and
    /// `diff` is `a - b`; callers pick whichever representation of the half-sum
    /// is exact for their coordinates.
    pub(crate) fn difference(&self, sin_half_sum: f64, sin_n_half_sum: f64, diff: f64) -> f64 {
        let n = self.nf();
        2.0 * sin_half_sum * (0.5 * diff).sin()
            + 2.0 * self.eps * sin_n_half_sum * (0.5 * n * diff).sin()
    }

    /// Local minima (vacua) and maxima (barriers) of `V` on `[0, 2 pi)`.
    pub fn classify_vacua(&self) -> VacuumStructure {
        let h = TAU / VACUUM_SCAN_CELLS as f64;
        // Offset grid so that the symmetric stationary points 0 and pi never sit on a node.
        let node = |k: usize| (k as f64 + 0.5) * h;
        let mut vacua = Vec::new();
        let mut barriers = Vec::new();

        for k in 0..VACUUM_SCAN_CELLS {
            let (lo, hi) = if k + 1 == VACUUM_SCAN_CELLS {
                (node(k), node(0) + TAU)
            } else {
                (node(k), node(k + 1))
            };
            let (g_lo, g_hi) = (self.grad(lo), self.grad(hi));
            if g_lo == 0.0 || g_lo.signum() == g_hi.signum() {
                continue;
            }
            let mut root = bisect(|x| self.grad(x), lo, hi, VACUUM_ROOT_TOL);
            root = root.rem_euclid(TAU);
            if root < VACUUM_ROOT_TOL || TAU - root < VACUUM_ROOT_TOL {
                root = 0.0;
            }
            let curvature = self.curvature(root);
            let value = self.eval(root);
            if g_lo < 0.0 {
                if curvature <= 0.0 {
                    // degenerate (e.g. eps = 1/4 at pi): not a strict minimum
                    continue;
                }
                let kind = if root == 0.0 {
                    VacuumKind::TrueVacuum
                } else {
                    VacuumKind::FalseVacuum
                };
                let value = if kind == VacuumKind::TrueVacuum { 0.0 } else { value };
                vacua.push(VacuumInfo {
                    location: root,
                    kind,
                    value,
                    curvature,
                });
            } else {
                barriers.push(Barrier {
                    location: root,
                    value,
                    curvature,
                });
            }
        }
        vacua.sort_by(|a, b| a.location.total_cmp(&b.location));
        barriers.sort_by(|a, b| a.location.total_cmp(&b.location));
        VacuumStructure { vacua, barriers }
    }

    /// False vacua strictly inside `(0, pi]`.
    pub fn false_vacua(&self) -> Vec<VacuumInfo> {
        self.classify_vacua()
            .vacua
            .into_iter()
            .filter(|v| v.kind == VacuumKind::FalseVacuum && v.location <= PI + 1e-9)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VacuumKind {
    TrueVacuum,
    FalseVacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VacuumInfo {
    pub location: f64,
    pub kind: VacuumKind,
    pub value: f64,
    pub curvature: f64,
}

/// A local maximum of `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Barrier {
    pub location: f64,
    pub value: f64,
    pub curvature: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VacuumStructure {
    pub vacua: Vec<VacuumInfo>,
    pub barriers: Vec<Barrier>,
}

impl VacuumStructure {
    pub fn has_false_vacuum(&self) -> bool {
        self.vacua.iter().any(|v| v.kind == VacuumKind::FalseVacuum)
    }

    /// The highest barrier, if any.
    pub fn top_barrier(&self) -> Option<Barrier> {
        self.barriers
            .iter()
            .copied()
            .max_by(|a, b| a.value.total_cmp(&b.value))
    }
}

/// Plain bisection on a sign-changing bracket.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
