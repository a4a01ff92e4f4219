//! Orbits of the autonomous corotating flow, the period function of the
//! center and winding numbers.
//!
//! Periods are measured as the time the polar angle about the center takes
//! to sweep one full turn, which is the first return to the ray from the
//! center through the initial point. The angle is integrated alongside the
//! state and the crossing is located on the continuous extension.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{axis_equilibria, boundary_saddles, EquilibriumKind};
use crate::error::{Error, Result};
use crate::model::{eval_field, eval_hamiltonian, Params, PhaseState};
use crate::ode::{locate_event, OdeOptions, Solver};
use crate::roots::brent;
use crate::scalar::{wrap_angle, Scalar};

/// Orbits passing this close to a saddle (relative to `R`) are treated as
/// lying on the separatrix.
pub const SADDLE_RADIUS_REL: f64 = 1e-6;
/// Return times beyond this multiple of the linearized period count as unbounded.
pub const PERIOD_CAP_FACTOR: f64 = 50.0;
/// Default closure tolerance for winding numbers, relative to `R`.
pub const CLOSURE_TOL_REL: f64 = 1e-6;
/// Dense samples recorded per accepted step, besides the step end points.
pub const DEFAULT_SUBSTEPS: usize = 4;
/// Orbit integration runs the step control at this fraction of the requested
/// tolerance so that the accumulated Hamiltonian drift, not just the local
/// error, stays within `100 · tol` of the energy scale.
pub const ORBIT_TOL_SAFETY: f64 = 0.1;

fn state_rhs<T: Scalar>(p: &Params<T>) -> impl FnMut(T, &[T; 2]) -> Result<[T; 2]> + '_ {
    move |_, y| {
        let v = eval_field(p, &PhaseState::new(y[0], y[1]))?;
        Ok([v.dx, v.dy])
    }
}

/// A sampled trajectory with its Hamiltonian bookkeeping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit<T> {
    /// Time-ordered in the direction of integration; every sample carries a time.
    pub samples: Vec<PhaseState<T>>,
    pub params: Params<T>,
    /// `Ψ` at the initial point.
    pub energy0: T,
    /// Relative integration tolerance used.
    pub tolerance: T,
    /// Largest `|Ψ(sample) - energy0|` over the samples.
    pub max_energy_drift: T,
}

impl<T: Scalar> Orbit<T> {
    /// Scale against which drift is judged: `max(|Ψ0|, |θ0| R²)`.
    pub fn energy_scale(&self) -> T {
        let r = self.params.domain_radius;
        self.energy0.abs().max(self.params.angular_velocity.abs() * r * r)
    }

    pub fn relative_drift(&self) -> T {
        self.max_energy_drift / self.energy_scale()
    }

    pub fn first(&self) -> &PhaseState<T> {
        &self.samples[0]
    }

    pub fn last(&self) -> &PhaseState<T> {
        self.samples.last().expect("orbit has at least one sample")
    }

    /// Largest distance from the disk center over the samples.
    pub fn max_radius(&self) -> T {
        self.samples.iter().fold(T::zero(), |m, s| m.max(s.x.hypot(s.y)))
    }

    /// Winding number about `reference`, requiring closure to `1e-6·R`.
    pub fn winding(&self, reference: &WindingReference<'_, T>) -> Result<i64> {
        winding_number(
            &self.samples,
            reference,
            T::lit(CLOSURE_TOL_REL) * self.params.domain_radius,
        )
    }
}

/// Integrates from `s0` (at its time tag, or 0) over a duration `t_end`
/// (negative for backward time). The relative Hamiltonian drift stays of the
/// order of `tol` per hundred time units.
pub fn integrate_orbit<T: Scalar>(p: &Params<T>, s0: &PhaseState<T>, t_end: T, tol: T) -> Result<Orbit<T>> {
    integrate_until(p, s0, t_end, tol, DEFAULT_SUBSTEPS, |_| false)
}

/// Like [`integrate_orbit`] but stops at the first sample for which `stop`
/// returns true, recording `substeps` interpolated samples inside each step.
pub fn integrate_until<T, S>(
    p: &Params<T>,
    s0: &PhaseState<T>,
    t_end: T,
    tol: T,
    substeps: usize,
    mut stop: S,
) -> Result<Orbit<T>>
where
    T: Scalar,
    S: FnMut(&PhaseState<T>) -> bool,
{
    p.validate()?;
    let t0 = s0.time();
    let energy0 = eval_hamiltonian(p, s0)?;
    let mut samples = vec![PhaseState::at(s0.x, s0.y, t0)];
    let mut drift = T::zero();
    let mut record = |s: PhaseState<T>, samples: &mut Vec<PhaseState<T>>| -> Result<()> {
        drift = drift.max((eval_hamiltonian(p, &s)? - energy0).abs());
        samples.push(s);
        Ok(())
    };
    if t_end != T::zero() && !stop(&samples[0]) {
        let local = tol * T::lit(ORBIT_TOL_SAFETY);
        let opts = OdeOptions::new(local, local * p.domain_radius);
        let mut solver = Solver::new(state_rhs(p), t0, [s0.x, s0.y], t0 + t_end, opts)?;
        'outer: while !solver.finished() {
            solver.step()?;
            if substeps > 0 {
                let dense = solver.dense()?;
                let (ta, tb) = (dense.t_old, dense.t);
                for k in 1..=substeps {
                    let t = ta + (tb - ta) * T::count(k) / T::count(substeps + 1);
                    let y = dense.eval(t);
                    let s = PhaseState::at(y[0], y[1], t);
                    record(s, &mut samples)?;
                    if stop(&s) {
                        break 'outer;
                    }
                }
            }
            let y = *solver.y();
            let s = PhaseState::at(y[0], y[1], solver.t());
            record(s, &mut samples)?;
            if stop(&s) {
                break;
            }
        }
    }
    Ok(Orbit {
        samples,
        params: *p,
        energy0,
        tolerance: tol,
        max_energy_drift: drift,
    })
}

/// The center of the portrait and the separatrix bounding its period annulus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodAnnulus<T> {
    pub center: PhaseState<T>,
    pub center_energy: T,
    /// Where the bounding separatrix crosses the ray `{y = 0, x > x_c}`.
    pub separatrix_x: T,
    pub separatrix_energy: T,
    /// Saddles on the separatrix.
    pub saddles: Vec<PhaseState<T>>,
    /// Linearized period at the center.
    pub linear_period: T,
}

impl<T: Scalar> PeriodAnnulus<T> {
    /// Width of the annulus along the section.
    pub fn width(&self) -> T {
        self.separatrix_x - self.center.x
    }

    /// Whether energy `e` lies strictly between the center and separatrix levels.
    pub fn contains_energy(&self, e: T) -> bool {
        (e - self.center_energy) * (self.separatrix_energy - e) > T::zero()
    }
}

/// Locates the center and the separatrix of its period annulus.
pub fn period_annulus<T: Scalar>(p: &Params<T>) -> Result<PeriodAnnulus<T>> {
    let axis = axis_equilibria(p)?;
    let center = axis
        .iter()
        .find(|e| e.kind == EquilibriumKind::Center)
        .ok_or_else(|| Error::NotACenter(format!("no center at rho0 = {}, phi0 = {}", p.rho0(), p.phi0())))?
        .location;
    let center_energy = eval_hamiltonian(p, &center)?;
    let r0 = p.path_radius;
    let inner_saddle = axis
        .iter()
        .find(|e| e.kind == EquilibriumKind::HyperbolicSaddle && e.location.x > center.x && e.location.x < r0);
    let (separatrix_x, separatrix_energy, saddles) = if let Some(s) = inner_saddle {
        (s.location.x, eval_hamiltonian(p, &s.location)?, vec![s.location])
    } else {
        let saddles: Vec<_> = match boundary_saddles(p)? {
            Some(pair) => pair.iter().map(|e| e.location).collect(),
            None => axis
                .iter()
                .filter(|e| e.kind != EquilibriumKind::Center)
                .map(|e| e.location)
                .collect(),
        };
        let first = saddles
            .first()
            .ok_or_else(|| Error::NotACenter("center without a bounding saddle".into()))?;
        let level = eval_hamiltonian(p, first)?;
        let hi = r0 - T::lit(1e-6) * p.domain_radius;
        let g = |x: T| eval_hamiltonian(p, &PhaseState::new(x, T::zero())).map_or(T::nan(), |v| v - level);
        let xtol = T::lit(4.0) * T::epsilon() * p.domain_radius;
        let x = brent(g, center.x, hi, xtol, 300)
            .ok_or_else(|| Error::NotACenter("separatrix does not cross the section".into()))?;
        (x, level, saddles)
    };
    Ok(PeriodAnnulus {
        center,
        center_energy,
        separatrix_x,
        separatrix_energy,
        saddles,
        linear_period: linearized_period(p, center.x)?,
    })
}

/// `T0 = 2π / (|θ0| √(-ν(2 + ν)))` with
/// `ν = ((x/R)² - 1) / ((x/R - ρ0)(x/R - 1/ρ0))`.
pub fn linearized_period<T: Scalar>(p: &Params<T>, center_x: T) -> Result<T> {
    p.validate()?;
    let x = center_x / p.domain_radius;
    let rho = p.rho0();
    let one = T::one();
    let nu = (x * x - one) / ((x - rho) * (x - rho.recip()));
    let omega2 = -nu * (T::lit(2.0) + nu);
    if !(omega2 > T::zero()) {
        return Err(Error::NotACenter(format!(
            "x = {} gives nu(2 + nu) = {} >= 0",
            center_x, -omega2
        )));
    }
    Ok(T::TAU() / (p.angular_velocity.abs() * omega2.sqrt()))
}

/// First-return time of the orbit through `s0` around the center.
pub fn orbit_period<T: Scalar>(p: &Params<T>, s0: &PhaseState<T>, tol: T) -> Result<T> {
    let annulus = period_annulus(p)?;
    orbit_period_in(p, &annulus, s0, tol)
}

/// [`orbit_period`] with a precomputed annulus.
pub fn orbit_period_in<T: Scalar>(p: &Params<T>, annulus: &PeriodAnnulus<T>, s0: &PhaseState<T>, tol: T) -> Result<T> {
    let e0 = eval_hamiltonian(p, s0)?;
    if !annulus.contains_energy(e0) {
        return Err(Error::NotClosed(format!(
            "energy {} outside the annulus ({}, {})",
            e0, annulus.center_energy, annulus.separatrix_energy
        )));
    }
    let r = p.domain_radius;
    let near_saddle = T::lit(SADDLE_RADIUS_REL) * r;
    let check_saddles = |x: T, y: T| -> Result<()> {
        let s = PhaseState::new(x, y);
        match annulus.saddles.iter().find(|q| s.distance_to(q) < near_saddle) {
            Some(q) => Err(Error::NotClosed(format!(
                "passes within {} of the saddle at ({}, {})",
                near_saddle, q.x, q.y
            ))),
            None => Ok(()),
        }
    };
    check_saddles(s0.x, s0.y)?;
    let (xc, yc) = (annulus.center.x, annulus.center.y);
    let rhs = move |_: T, y: &[T; 3]| -> Result<[T; 3]> {
        let v = eval_field(p, &PhaseState::new(y[0], y[1]))?;
        let (dx, dy) = (y[0] - xc, y[1] - yc);
        Ok([v.dx, v.dy, (dx * v.dy - dy * v.dx) / (dx * dx + dy * dy)])
    };
    let cap = T::lit(PERIOD_CAP_FACTOR) * annulus.linear_period;
    let t0 = s0.time();
    let opts = OdeOptions::new(tol, tol * r);
    let mut solver = Solver::new(rhs, t0, [s0.x, s0.y, T::zero()], t0 + cap, opts)?;
    let turn = T::TAU();
    while !solver.finished() {
        solver.step()?;
        let y = *solver.y();
        check_saddles(y[0], y[1])?;
        if y[2].abs() >= turn {
            let dense = solver.dense()?;
            let t = locate_event(&dense, |_, y| y[2].abs() - turn)
                .ok_or_else(|| Error::NotClosed("return could not be located".into()))?;
            let back = dense.eval(t);
            let miss = (back[0] - s0.x).hypot(back[1] - s0.y);
            let closure = T::lit(CLOSURE_TOL_REL).max(T::lit(1e3) * tol) * r;
            if miss > closure {
                return Err(Error::NotClosed(format!("returns {} away from the start", miss)));
            }
            return Ok(t - t0);
        }
    }
    Err(Error::NotClosed(format!(
        "no return within {} (50 linear periods)",
        cap
    )))
}

/// One sample of the period function along the section.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionPoint<T> {
    pub x: T,
    pub period: T,
    pub energy: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodScan<T> {
    /// Ordered from the center outward; truncated before the first failure.
    pub section_points: Vec<SectionPoint<T>>,
    pub center: PhaseState<T>,
    pub linear_period: T,
    pub separatrix_x: T,
    /// Why the scan stopped early, if it did.
    pub stopped: Option<String>,
}

impl<T: Scalar> PeriodScan<T> {
    pub fn min_period(&self) -> Option<T> {
        self.section_points.first().map(|s| s.period)
    }

    pub fn max_period(&self) -> Option<T> {
        self.section_points.last().map(|s| s.period)
    }
}

/// Placement of scan samples between the center and the separatrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions<T> {
    /// Offset of the first sample from the center, relative to the annulus width.
    pub first_offset: T,
    /// Distance of the last sample to the separatrix, relative to the width.
    pub last_gap: T,
    /// Relative integration tolerance.
    pub tol: T,
}

impl<T: Scalar> Default for ScanOptions<T> {
    fn default() -> Self {
        Self {
            first_offset: T::lit(1e-3),
            last_gap: T::lit(1e-12),
            tol: T::lit(1e-12),
        }
    }
}

/// Period function sampled on `n_samples` section points whose distance to
/// the separatrix shrinks geometrically.
pub fn period_scan<T: Scalar>(p: &Params<T>, n_samples: usize) -> Result<PeriodScan<T>> {
    period_scan_with(p, n_samples, &ScanOptions::default())
}

pub fn period_scan_with<T: Scalar>(p: &Params<T>, n_samples: usize, opts: &ScanOptions<T>) -> Result<PeriodScan<T>> {
    let annulus = period_annulus(p)?;
    let w = annulus.width();
    let first_gap = T::one() - opts.first_offset;
    let xs: Vec<T> = (0..n_samples)
        .map(|k| {
            let frac = if n_samples > 1 {
                T::count(k) / T::count(n_samples - 1)
            } else {
                T::zero()
            };
            let gap = first_gap * (opts.last_gap / first_gap).powf(frac);
            annulus.separatrix_x - gap * w
        })
        .collect();
    let results: Vec<Result<SectionPoint<T>>> = xs
        .par_iter()
        .map(|&x| {
            let s = PhaseState::new(x, T::zero());
            let period = orbit_period_in(p, &annulus, &s, opts.tol)?;
            Ok(SectionPoint {
                x,
                period,
                energy: eval_hamiltonian(p, &s)?,
            })
        })
        .collect();
    let mut section_points = Vec::with_capacity(n_samples);
    let mut stopped = None;
    for r in results {
        match r {
            Ok(sp) => section_points.push(sp),
            Err(e) => {
                stopped = Some(e.to_string());
                break;
            }
        }
    }
    Ok(PeriodScan {
        section_points,
        center: annulus.center,
        linear_period: annulus.linear_period,
        separatrix_x: annulus.separatrix_x,
        stopped,
    })
}

/// What a winding number is measured around.
pub enum WindingReference<'a, T> {
    Point(PhaseState<T>),
    /// A moving reference evaluated at each sample's time.
    Path(&'a (dyn Fn(T) -> PhaseState<T> + Sync)),
}

impl<T: Scalar> WindingReference<'_, T> {
    fn at(&self, s: &PhaseState<T>) -> Result<PhaseState<T>> {
        match self {
            WindingReference::Point(q) => Ok(*q),
            WindingReference::Path(f) => Ok(f(s.t.ok_or(Error::MissingTimeTag)?)),
        }
    }
}

/// Signed number of turns of `samples - reference`.
///
/// The curve must close to within `closure_tol`. A sample-to-sample turn of a
/// quarter revolution or more, or a total that misses an integer by a quarter
/// turn or more, is reported as [`Error::AmbiguousWinding`].
pub fn winding_number<T: Scalar>(
    samples: &[PhaseState<T>],
    reference: &WindingReference<'_, T>,
    closure_tol: T,
) -> Result<i64> {
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        return Err(Error::NotClosed("empty orbit".into()));
    };
    let gap = first.distance_to(last);
    if !(gap <= closure_tol) {
        return Err(Error::NotClosed(format!("end points are {} apart", gap)));
    }
    let quarter = T::lit(0.25);
    let mut total = T::zero();
    let mut prev: Option<T> = None;
    for s in samples {
        let q = reference.at(s)?;
        let angle = (s.y - q.y).atan2(s.x - q.x);
        if let Some(a) = prev {
            let d = wrap_angle(angle - a);
            let fraction = d.abs() / T::TAU();
            if fraction >= quarter {
                return Err(Error::AmbiguousWinding {
                    fraction: fraction.as_f64(),
                });
            }
            total = total + d;
        }
        prev = Some(angle);
    }
    let turns = total / T::TAU();
    let n = turns.round();
    let fraction = (turns - n).abs();
    if fraction >= quarter {
        return Err(Error::AmbiguousWinding {
            fraction: fraction.as_f64(),
        });
    }
    Ok(n.to_i64().unwrap_or(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn r4() -> Params<f64> {
        Params::new(1.0, TAU * -0.05, 1.0, 0.5).unwrap()
    }

    #[test]
    fn linearized_period_at_r4_center() {
        let p = r4();
        let t0 = linearized_period(&p, 0.09812777000372608).unwrap();
        assert_relative_eq!(t0, 6.577470565662431, epsilon = 1e-9);
        assert!(matches!(
            linearized_period(&p, 0.377566260030013),
            Err(Error::NotACenter(_))
        ));
    }

    #[test]
    fn annulus_in_r4_is_bounded_by_the_axis_saddle() {
        let a = period_annulus(&r4()).unwrap();
        assert_relative_eq!(a.center.x, 0.09812777000372608, epsilon = 1e-12);
        assert_relative_eq!(a.separatrix_x, 0.377566260030013, epsilon = 1e-12);
        assert_eq!(a.saddles.len(), 1);
    }

    #[test]
    fn annulus_in_r2_is_bounded_by_the_heteroclinic() {
        let p = Params::new(1.0, TAU, 2.5, 0.5).unwrap();
        let a = period_annulus(&p).unwrap();
        assert_relative_eq!(a.center.x, -0.31697, epsilon = 1e-5);
        assert_relative_eq!(a.separatrix_x, 0.22911, epsilon = 1e-5);
        assert_eq!(a.saddles.len(), 2);
    }

    #[test]
    fn no_center_in_r1() {
        let p = Params::from_dimensionless(0.5, 0.2).unwrap();
        assert!(matches!(period_annulus(&p), Err(Error::NotACenter(_))));
        assert!(matches!(period_scan(&p, 4), Err(Error::NotACenter(_))));
    }

    #[test]
    fn fixed_point_orbit_is_constant() {
        let p = r4();
        let s0 = PhaseState::new(0.09812777000372608, 0.0);
        let o = integrate_orbit(&p, &s0, 20.0, 1e-12).unwrap();
        for s in &o.samples {
            assert!(s.distance_to(&s0) < 1e-10);
        }
    }

    #[test]
    fn small_orbit_period_matches_linearization() {
        let p = r4();
        let a = period_annulus(&p).unwrap();
        let s0 = PhaseState::new(a.center.x + 1e-3 * a.width(), 0.0);
        let t = orbit_period(&p, &s0, 1e-12).unwrap();
        assert_relative_eq!(t, a.linear_period, max_relative = 1e-3);
    }

    #[test]
    fn separatrix_and_outside_points_are_not_closed() {
        let p = r4();
        let a = period_annulus(&p).unwrap();
        let on = PhaseState::new(a.separatrix_x, 0.0);
        assert!(matches!(orbit_period(&p, &on, 1e-10), Err(Error::NotClosed(_))));
        let outside = PhaseState::new(-0.5, 0.0);
        assert!(matches!(orbit_period(&p, &outside, 1e-10), Err(Error::NotClosed(_))));
    }

    #[test]
    fn circle_around_point_winds_once() {
        let q = PhaseState::new(0.5, 0.0);
        let circle: Vec<_> = (0..=64)
            .map(|k| {
                let a = TAU * k as f64 / 64.0;
                PhaseState::new(0.5 + 0.1 * a.cos(), 0.1 * a.sin())
            })
            .collect();
        assert_eq!(winding_number(&circle, &WindingReference::Point(q), 1e-9).unwrap(), 1);
        let reversed: Vec<_> = circle.iter().rev().copied().collect();
        assert_eq!(
            winding_number(&reversed, &WindingReference::Point(q), 1e-9).unwrap(),
            -1
        );
        let far = PhaseState::new(2.0, 0.0);
        assert_eq!(winding_number(&circle, &WindingReference::Point(far), 1e-9).unwrap(), 0);
        assert!(matches!(
            winding_number(&circle[..40], &WindingReference::Point(q), 1e-9),
            Err(Error::NotClosed(_))
        ));
        let coarse: Vec<_> = circle.iter().step_by(16).copied().collect();
        assert!(matches!(
            winding_number(&coarse, &WindingReference::Point(q), 1e-9),
            Err(Error::AmbiguousWinding { .. })
        ));
    }

    #[test]
    fn moving_reference_needs_time_tags() {
        let path = |_t: f64| PhaseState::new(0.0, 0.0);
        let samples = [PhaseState::new(1.0, 0.0), PhaseState::new(1.0, 0.0)];
        assert_eq!(
            winding_number(&samples, &WindingReference::Path(&path), 1e-9),
            Err(Error::MissingTimeTag)
        );
    }
}
