//! Periodically perturbed stirring: the vortex radius follows
//! `r_ε(t) = r0 + ε f(t) + ε² g(t)` with `T`-periodic `f` and `g`, which makes
//! the corotating flow `T`-periodic in time.
//!
//! Periodic orbits are fixed points of iterates of the stroboscopic map and
//! are located by multi-start Newton iteration on `P^m - id`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{orbit_period_in, period_annulus, winding_number, PeriodAnnulus, WindingReference};
use crate::error::{Error, Result};
use crate::model::{field_with_vortex, hamiltonian_with_vortex, Params, PhaseState, Velocity};
use crate::ode::{solve_dense, solve_to, OdeOptions};
use crate::scalar::Scalar;

/// Samples used when checking that a protocol stays inside the disk.
pub const PROTOCOL_CHECK_SAMPLES: usize = 1024;

/// One harmonic `cos·cos(2πkt/T) + sin·sin(2πkt/T)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierMode<T> {
    pub k: u32,
    #[serde(default)]
    pub cos: T,
    #[serde(default)]
    pub sin: T,
}

fn series_eval<T: Scalar>(modes: &[FourierMode<T>], t: T, period: T) -> T {
    let w = T::TAU() * t / period;
    modes.iter().fold(T::zero(), |acc, m| {
        let arg = w * T::lit(m.k as f64);
        acc + m.cos * arg.cos() + m.sin * arg.sin()
    })
}

/// Radial stirring protocol `r_ε(t) = r0 + ε f(t) + ε² g(t)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StirringProtocol<T> {
    pub r0: T,
    pub epsilon: T,
    /// Period `T` of the perturbation.
    #[serde(rename = "T")]
    pub period: T,
    /// Coefficients of `f`.
    #[serde(rename = "f")]
    pub f_modes: Vec<FourierMode<T>>,
    /// Coefficients of `g`; empty means `g ≡ 0`.
    #[serde(rename = "g", default, skip_serializing_if = "Vec::is_empty")]
    pub g_modes: Vec<FourierMode<T>>,
}

impl<T: Scalar> StirringProtocol<T> {
    /// `f(t) = cos(2πt/T)`.
    pub fn cosine(r0: T, epsilon: T, period: T) -> Self {
        Self {
            r0,
            epsilon,
            period,
            f_modes: vec![FourierMode {
                k: 1,
                cos: T::one(),
                sin: T::zero(),
            }],
            g_modes: Vec::new(),
        }
    }

    /// The same protocol with `ε = 0`.
    pub fn unperturbed(&self) -> Self {
        Self {
            epsilon: T::zero(),
            ..self.clone()
        }
    }

    pub fn is_unperturbed(&self) -> bool {
        self.epsilon == T::zero()
    }

    /// `r_ε(t)`.
    pub fn radius_at(&self, t: T) -> T {
        let e = self.epsilon;
        self.r0 + e * series_eval(&self.f_modes, t, self.period) + e * e * series_eval(&self.g_modes, t, self.period)
    }

    /// Checks the period and that `r_ε` stays in `(δ, R - δ)` on a uniform grid.
    pub fn validate(&self, p: &Params<T>) -> Result<()> {
        if !(self.period > T::zero() && self.period.is_finite()) {
            return Err(Error::InvalidProtocol(format!(
                "period {} must be positive",
                self.period
            )));
        }
        if !self.epsilon.is_finite() {
            return Err(Error::InvalidProtocol("epsilon must be finite".into()));
        }
        let r = p.domain_radius;
        if (self.r0 - p.path_radius).abs() > T::lit(1e-12) * r {
            return Err(Error::InvalidProtocol(format!(
                "protocol r0 = {} differs from the path radius {}",
                self.r0, p.path_radius
            )));
        }
        let delta = p.exclusion_radius();
        for i in 0..PROTOCOL_CHECK_SAMPLES {
            let t = self.period * T::count(i) / T::count(PROTOCOL_CHECK_SAMPLES);
            let rt = self.radius_at(t);
            if !(rt > delta && rt < r - delta) {
                return Err(Error::InvalidProtocol(format!(
                    "r(t = {}) = {} leaves (delta, R - delta)",
                    t, rt
                )));
            }
        }
        Ok(())
    }
}

/// `r_ε(t)` of the protocol.
pub fn protocol_eval<T: Scalar>(pr: &StirringProtocol<T>, t: T) -> T {
    pr.radius_at(t)
}

/// Velocity of the time-dependent corotating flow; `s` must carry a time.
pub fn eval_perturbed_field<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    s: &PhaseState<T>,
) -> Result<Velocity<T>> {
    let t = s.t.ok_or(Error::MissingTimeTag)?;
    field_with_vortex(p, pr.radius_at(t), s.x, s.y)
}

/// Stream function of the time-dependent corotating flow.
pub fn eval_perturbed_hamiltonian<T: Scalar>(p: &Params<T>, pr: &StirringProtocol<T>, s: &PhaseState<T>) -> Result<T> {
    let t = s.t.ok_or(Error::MissingTimeTag)?;
    hamiltonian_with_vortex(p, pr.radius_at(t), s.x, s.y)
}

fn perturbed_rhs<'a, T: Scalar>(
    p: &'a Params<T>,
    pr: &'a StirringProtocol<T>,
) -> impl FnMut(T, &[T; 2]) -> Result<[T; 2]> + 'a {
    move |t, y| {
        let v = field_with_vortex(p, pr.radius_at(t), y[0], y[1])?;
        Ok([v.dx, v.dy])
    }
}

fn options<T: Scalar>(p: &Params<T>, tol: T) -> OdeOptions<T> {
    OdeOptions::new(tol, tol * p.domain_radius)
}

/// Flow of the perturbed system from `s0` at its time tag (or 0) over `m` periods.
pub fn stroboscopic_map<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    s0: &PhaseState<T>,
    periods: usize,
    tol: T,
) -> Result<PhaseState<T>> {
    let t0 = s0.time();
    let t1 = t0 + T::count(periods) * pr.period;
    let y = solve_to(perturbed_rhs(p, pr), t0, [s0.x, s0.y], t1, options(p, tol))?;
    Ok(PhaseState::at(y[0], y[1], t1))
}

/// Trajectory over `[t0, t0 + m T]` sampled at `n + 1` equally spaced times.
pub fn sample_trajectory<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    s0: &PhaseState<T>,
    periods: usize,
    n: usize,
    tol: T,
) -> Result<Vec<PhaseState<T>>> {
    let t0 = s0.time();
    let span = T::count(periods) * pr.period;
    let times: Vec<T> = (0..=n).map(|k| t0 + span * T::count(k) / T::count(n)).collect();
    let ys = solve_dense(perturbed_rhs(p, pr), t0, [s0.x, s0.y], &times, options(p, tol))?;
    Ok(times
        .iter()
        .zip(ys)
        .map(|(&t, y)| PhaseState::at(y[0], y[1], t))
        .collect())
}

/// A resonance `(m, n)`: `mT`-periodic orbits making `n` turns about the center.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResonancePair<T> {
    pub m: usize,
    pub n: usize,
    /// `mT / n`, the unperturbed period that resonates.
    pub ratio: T,
}

/// All `(m, n)` with `T_min < mT/n < T_max`, sorted by `mT/n` (then by `m`).
pub fn resonance_pairs<T: Scalar>(t_min: T, t_max: T, period: T, m_max: usize, n_max: usize) -> Vec<ResonancePair<T>> {
    let mut out = Vec::new();
    for m in 1..=m_max {
        for n in 1..=n_max {
            let ratio = T::count(m) * period / T::count(n);
            if t_min < ratio && ratio < t_max {
                out.push(ResonancePair { m, n, ratio });
            }
        }
    }
    out.sort_by(|a, b| {
        a.ratio
            .partial_cmp(&b.ratio)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.m.cmp(&b.m))
    });
    out
}

/// Settings of the multi-start Newton search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SearchConfig<T> {
    /// Seeds along the section between the center and the separatrix.
    pub radial: usize,
    /// Seeds per radial seed, spread along its unperturbed orbit.
    pub angular: usize,
    /// Newton stops once `|P^m(s) - s| ≤ residual_tol · R`.
    pub residual_tol: T,
    /// Relative tolerance of every integration.
    pub integration_tol: T,
    pub max_iterations: usize,
    /// Finite-difference step relative to `R`.
    pub fd_step: T,
    /// Fixed points closer than this (relative to `R`) are merged.
    pub dedup_radius: T,
    /// Relative singular-value cutoff of the Newton pseudo-inverse.
    pub svd_cutoff: T,
    /// Trajectory samples per period used for rotation and winding counts.
    pub samples_per_period: usize,
}

impl<T: Scalar> Default for SearchConfig<T> {
    fn default() -> Self {
        Self {
            radial: 32,
            angular: 8,
            residual_tol: T::lit(1e-10),
            integration_tol: T::lit(1e-12),
            max_iterations: 40,
            fd_step: T::lit(1e-6),
            dedup_radius: T::lit(1e-6),
            svd_cutoff: T::lit(1e-9),
            samples_per_period: 256,
        }
    }
}

/// A located `mT`-periodic orbit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbitResult<T> {
    pub fixed_point: PhaseState<T>,
    pub m: usize,
    pub n: usize,
    /// Signed turns about the unperturbed center over `[0, mT]`.
    pub rotations: i64,
    /// Turns about the moving vortex `(r_ε(t), 0)` in the corotating frame.
    pub winding_about_vortex: i64,
    /// The same count from lab-frame positions of particle and vortex.
    pub winding_lab_frame: i64,
    /// `|P^m(s) - s|`.
    pub residual: T,
    /// Fixed points related by the one-period map share a class.
    pub orbit_class: usize,
    pub seed: usize,
    /// Set when the result is not isolated, e.g. for the unperturbed flow.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flag: Option<String>,
}

/// Outcome of a single Newton start.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedDiagnostic<T> {
    pub seed: usize,
    pub start: PhaseState<T>,
    /// `converged`, `duplicate`, `rejected: …` or `no convergence: …`.
    pub status: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport<T> {
    pub orbits: Vec<PeriodicOrbitResult<T>>,
    pub diagnostics: Vec<SeedDiagnostic<T>>,
    /// Number of distinct periodic orbits among `orbits`.
    pub orbit_classes: usize,
}

/// Flag attached to every result of an `ε = 0` search.
pub const UNPERTURBED_FLAG: &str = "degenerate: unperturbed";

fn seeds<T: Scalar>(p: &Params<T>, annulus: &PeriodAnnulus<T>, cfg: &SearchConfig<T>) -> Vec<PhaseState<T>> {
    let w = annulus.width();
    let radial: Vec<T> = (0..cfg.radial)
        .map(|i| annulus.center.x + w * (T::count(i) + T::lit(0.5)) / T::count(cfg.radial))
        .collect();
    radial
        .par_iter()
        .flat_map_iter(|&x| {
            let s = PhaseState::new(x, T::zero());
            let mut out = vec![s];
            if cfg.angular > 1 {
                if let Ok(period) = orbit_period_in(p, annulus, &s, cfg.integration_tol) {
                    let times: Vec<T> = (1..cfg.angular)
                        .map(|j| period * T::count(j) / T::count(cfg.angular))
                        .collect();
                    let rhs = |_: T, y: &[T; 2]| {
                        let v = field_with_vortex(p, p.path_radius, y[0], y[1])?;
                        Ok([v.dx, v.dy])
                    };
                    if let Ok(ys) = solve_dense(rhs, T::zero(), [x, T::zero()], &times, options(p, cfg.integration_tol))
                    {
                        out.extend(ys.into_iter().map(|y| PhaseState::new(y[0], y[1])));
                    }
                }
            }
            out
        })
        .collect()
}

// Solves J d = -r with a 2x2 pseudo-inverse (singular values below
// `cutoff · σ_max` are dropped).
fn pinv_solve<T: Scalar>(j: [[T; 2]; 2], r: [T; 2], cutoff: T) -> [T; 2] {
    let [[a, b], [c, d]] = j;
    // Eigen-decomposition of JᵀJ = [[p, q], [q, s]].
    let p = a * a + c * c;
    let q = a * b + c * d;
    let s = b * b + d * d;
    let half = T::lit(0.5);
    let mean = half * (p + s);
    let rad = (half * (p - s)).hypot(q);
    let l1 = mean + rad;
    let l2 = (mean - rad).max(T::zero());
    if !(l1 > T::zero()) {
        return [T::zero(), T::zero()];
    }
    // Unit eigenvector of the larger eigenvalue.
    let (vx, vy) = if q.abs() > T::zero() {
        let (ex, ey) = (l1 - s, q);
        let n = ex.hypot(ey);
        (ex / n, ey / n)
    } else if p >= s {
        (T::one(), T::zero())
    } else {
        (T::zero(), T::one())
    };
    let basis = [(vx, vy, l1), (-vy, vx, l2)];
    let sigma_max = l1.sqrt();
    let mut out = [T::zero(), T::zero()];
    for (ux, uy, l) in basis {
        let sigma = l.sqrt();
        if sigma <= cutoff * sigma_max || sigma == T::zero() {
            continue;
        }
        // d = -Σ v (u·r)/σ with u = J v / σ.
        let jx = a * ux + b * uy;
        let jy = c * ux + d * uy;
        let coef = -(jx * r[0] + jy * r[1]) / l;
        out[0] = out[0] + coef * ux;
        out[1] = out[1] + coef * uy;
    }
    out
}

struct Converged<T> {
    point: PhaseState<T>,
    residual: T,
}

fn newton<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    m: usize,
    start: PhaseState<T>,
    cfg: &SearchConfig<T>,
    cutoff: T,
) -> Result<Converged<T>> {
    let r = p.domain_radius;
    let tol = cfg.integration_tol;
    let map = |s: [T; 2]| -> Result<[T; 2]> {
        let out = stroboscopic_map(p, pr, &PhaseState::new(s[0], s[1]), m, tol)?;
        Ok([out.x - s[0], out.y - s[1]])
    };
    let norm = |v: [T; 2]| v[0].hypot(v[1]);
    let target = cfg.residual_tol * r;
    let h = cfg.fd_step * r;
    let two_h = h + h;
    let mut s = [start.x, start.y];
    let mut f = map(s)?;
    for _ in 0..cfg.max_iterations {
        if norm(f) <= target {
            return Ok(Converged {
                point: PhaseState::new(s[0], s[1]),
                residual: norm(f),
            });
        }
        let fxp = map([s[0] + h, s[1]])?;
        let fxm = map([s[0] - h, s[1]])?;
        let fyp = map([s[0], s[1] + h])?;
        let fym = map([s[0], s[1] - h])?;
        let jac = [
            [(fxp[0] - fxm[0]) / two_h, (fyp[0] - fym[0]) / two_h],
            [(fxp[1] - fxm[1]) / two_h, (fyp[1] - fym[1]) / two_h],
        ];
        let step = pinv_solve(jac, f, cutoff);
        let mut lambda = T::one();
        let mut accepted = false;
        for _ in 0..12 {
            let trial = [s[0] + lambda * step[0], s[1] + lambda * step[1]];
            if let Ok(ft) = map(trial) {
                if norm(ft) < norm(f) {
                    s = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
            }
            lambda = lambda * T::lit(0.5);
        }
        if !accepted {
            return Err(Error::NoConvergence(format!(
                "line search stalled at residual {}",
                norm(f)
            )));
        }
    }
    if norm(f) <= target {
        return Ok(Converged {
            point: PhaseState::new(s[0], s[1]),
            residual: norm(f),
        });
    }
    Err(Error::NoConvergence(format!(
        "residual {} after {} iterations",
        norm(f),
        cfg.max_iterations
    )))
}

/// Winding counts of a sampled `mT`-periodic trajectory: (about the
/// center, about the vortex in the corotating frame, about the vortex in the
/// lab frame).
fn winding_counts<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    center: &PhaseState<T>,
    traj: &[PhaseState<T>],
) -> Result<(i64, i64, i64)> {
    // The end points differ by the map residual; closure is judged in space.
    let closure = T::lit(1e-6) * p.domain_radius;
    let about_center = winding_number(traj, &WindingReference::Point(*center), closure)?;
    let vortex = |t: T| PhaseState::at(pr.radius_at(t), T::zero(), t);
    let about_vortex = winding_number(traj, &WindingReference::Path(&vortex), closure)?;
    // Lab frame: turns of ζ - z minus the turns of z itself.
    let th = p.angular_velocity;
    let rot = |s: &PhaseState<T>, t: T| {
        let (sn, cs) = (th * t).sin_cos();
        (cs * s.x - sn * s.y, sn * s.x + cs * s.y)
    };
    let mut rel = T::zero();
    let mut own = T::zero();
    let mut prev: Option<(T, T)> = None;
    for s in traj {
        let t = s.time();
        let (zx, zy) = rot(&PhaseState::new(pr.radius_at(t), T::zero()), t);
        let (px, py) = rot(s, t);
        let a_rel = (py - zy).atan2(px - zx);
        let a_own = zy.atan2(zx);
        if let Some((pr_rel, pr_own)) = prev {
            let d_rel = crate::scalar::wrap_angle(a_rel - pr_rel);
            let d_own = crate::scalar::wrap_angle(a_own - pr_own);
            let quarter = T::lit(0.25) * T::TAU();
            if d_rel.abs() >= quarter || d_own.abs() >= quarter {
                return Err(Error::AmbiguousWinding {
                    fraction: (d_rel.abs().max(d_own.abs()) / T::TAU()).as_f64(),
                });
            }
            rel = rel + d_rel;
            own = own + d_own;
        }
        prev = Some((a_rel, a_own));
    }
    let turns = (rel - own) / T::TAU();
    let lab = turns.round();
    if (turns - lab).abs() >= T::lit(0.25) {
        return Err(Error::AmbiguousWinding {
            fraction: (turns - lab).abs().as_f64(),
        });
    }
    Ok((about_center, about_vortex, lab.to_i64().unwrap_or(0)))
}

// Periodic solutions of interest stay in the period annulus: the
// unperturbed energy along them must remain strictly between the center and
// separatrix levels. Orbits of the stochastic layer around the separatrix
// fail this test.
fn check_inside_annulus<T: Scalar>(p: &Params<T>, annulus: &PeriodAnnulus<T>, traj: &[PhaseState<T>]) -> Result<()> {
    for s in traj {
        let e = hamiltonian_with_vortex(p, p.path_radius, s.x, s.y)?;
        if !annulus.contains_energy(e) {
            return Err(Error::NotClosed(format!(
                "leaves the period annulus near ({}, {}) at t = {}",
                s.x,
                s.y,
                s.time()
            )));
        }
    }
    Ok(())
}

/// Multi-start Newton search for `mT`-periodic orbits with `n` turns about
/// the center.
///
/// Seeds sit on `radial` section points across the period annulus and on
/// `angular - 1` further points along each unperturbed orbit. Converged
/// points are kept when their trajectory stays in the period annulus and
/// makes `n` turns about the center; they are merged within the dedup
/// radius (in seed order) and grouped into periodic orbits.
pub fn find_periodic_orbits<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    pair: &ResonancePair<T>,
    cfg: &SearchConfig<T>,
) -> Result<SearchReport<T>> {
    pr.validate(p)?;
    if pair.m == 0 || pair.n == 0 {
        return Err(Error::Domain("resonance pair needs m, n >= 1".into()));
    }
    let annulus = period_annulus(p)?;
    let starts = seeds(p, &annulus, cfg);
    let unperturbed = pr.is_unperturbed();
    // The unperturbed map has a curve of fixed points; drop the tangent
    // direction instead of chasing it.
    let cutoff = if unperturbed {
        cfg.svd_cutoff.max(T::lit(1e-4))
    } else {
        cfg.svd_cutoff
    };
    let m = pair.m;
    let outcomes: Vec<Result<(Converged<T>, (i64, i64, i64))>> = starts
        .par_iter()
        .map(|s| {
            let c = newton(p, pr, m, *s, cfg, cutoff)?;
            let n = cfg.samples_per_period * m;
            let traj = sample_trajectory(p, pr, &c.point, m, n, cfg.integration_tol)?;
            check_inside_annulus(p, &annulus, &traj)?;
            let counts = winding_counts(p, pr, &annulus.center, &traj)?;
            let fine = sample_trajectory(p, pr, &c.point, m, 2 * n, cfg.integration_tol)?;
            if counts != winding_counts(p, pr, &annulus.center, &fine)? {
                return Err(Error::AmbiguousWinding { fraction: 0.5 });
            }
            Ok((c, counts))
        })
        .collect();

    let r = p.domain_radius;
    let dedup = cfg.dedup_radius * r;
    let mut orbits: Vec<PeriodicOrbitResult<T>> = Vec::new();
    let mut diagnostics = Vec::with_capacity(starts.len());
    for (seed, (start, outcome)) in starts.iter().zip(outcomes).enumerate() {
        let status = match outcome {
            Err(Error::NoConvergence(msg)) => format!("no convergence: {msg}"),
            Err(e) => format!("rejected: {e}"),
            Ok((c, (rot, wind, lab))) => {
                if rot.unsigned_abs() as usize != pair.n {
                    format!("rejected: {} turns about the center, expected {}", rot, pair.n)
                } else if orbits.iter().any(|o| o.fixed_point.distance_to(&c.point) <= dedup) {
                    "duplicate".to_string()
                } else {
                    orbits.push(PeriodicOrbitResult {
                        fixed_point: c.point,
                        m,
                        n: pair.n,
                        rotations: rot,
                        winding_about_vortex: wind,
                        winding_lab_frame: lab,
                        residual: c.residual,
                        orbit_class: 0,
                        seed,
                        flag: unperturbed.then(|| UNPERTURBED_FLAG.to_string()),
                    });
                    "converged".to_string()
                }
            }
        };
        diagnostics.push(SeedDiagnostic {
            seed,
            start: *start,
            status,
        });
    }
    let orbit_classes = assign_classes(p, pr, m, &mut orbits, cfg)?;
    Ok(SearchReport {
        orbits,
        diagnostics,
        orbit_classes,
    })
}

// Fixed points s and P^k(s) (0 < k < m) belong to the same periodic orbit.
fn assign_classes<T: Scalar>(
    p: &Params<T>,
    pr: &StirringProtocol<T>,
    m: usize,
    orbits: &mut [PeriodicOrbitResult<T>],
    cfg: &SearchConfig<T>,
) -> Result<usize> {
    let match_radius = T::lit(10.0) * cfg.dedup_radius * p.domain_radius;
    let images: Vec<Vec<PhaseState<T>>> = orbits
        .par_iter()
        .map(|o| {
            let mut out = Vec::with_capacity(m);
            let mut s = o.fixed_point;
            for _ in 1..m {
                s = stroboscopic_map(p, pr, &s, 1, cfg.integration_tol)?;
                out.push(PhaseState::new(s.x, s.y));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    let mut class: Vec<Option<usize>> = vec![None; orbits.len()];
    let mut next = 0;
    for i in 0..orbits.len() {
        if class[i].is_some() {
            continue;
        }
        class[i] = Some(next);
        for j in (i + 1)..orbits.len() {
            if class[j].is_none()
                && images[i]
                    .iter()
                    .any(|q| q.distance_to(&orbits[j].fixed_point) <= match_radius)
            {
                class[j] = Some(next);
            }
        }
        next += 1;
    }
    for (o, c) in orbits.iter_mut().zip(class) {
        o.orbit_class = c.unwrap_or(0);
    }
    Ok(next)
}
