//! Relative equilibria of the corotating flow and the bifurcation diagram in
//! the `(ρ0, φ0)` plane.
//!
//! Axis equilibria solve `P(x) = x (x - r0)(x - R²/r0) = λ`. On `[-R, R]` the
//! cubic increases up to its local maximum `x_M ∈ (0, r0)` and decreases
//! afterwards (the local minimum lies beyond `R`), so each side of `x_M`
//! holds at most one root and is searched by bracketing.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{eval_jacobian, vortex_point, Params, PhaseState};
use crate::roots::brent;
use crate::scalar::Scalar;

/// Default half-width of the curves `C1`–`C3` in the classifier.
pub const DEFAULT_TOL_CURVE: f64 = 1e-9;
/// Default bound on `|P(x) - λ| / R³` for a point to count as an axis root.
pub const DEFAULT_TOL_RESIDUAL: f64 = 1e-10;
/// Default bound on `|det DX| / θ0²` below which a critical point is degenerate.
pub const DEFAULT_TOL_DET: f64 = 1e-9;

fn check_rho<T: Scalar>(rho0: T) -> Result<()> {
    if rho0 > T::zero() && rho0 < T::one() {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho0 = {} must lie in (0, 1)", rho0)))
    }
}

// Returns (A, B) with f = A + φ0 B. B < 0 on (0, 1) and is evaluated without
// the cancellation the textbook form suffers for small ρ0.
fn bifurcation_parts<T: Scalar>(rho0: T) -> (T, T) {
    let u = rho0 * rho0;
    let one = T::one();
    let two = T::lit(2.0);
    let k27 = T::lit(27.0);
    let a = k27 * u * (u - one);
    // 2 - 3u - 3u² + 2u³ factors as (u + 1)(2u - 1)(u - 2).
    let p = (u + one) * (two * u - one) * (u - two);
    let q = two * (one - u + u * u).powf(T::lit(1.5));
    // p² - q² = -27 u² (1 - u)²
    let b = if p < T::zero() {
        p - q
    } else {
        -k27 * u * u * (one - u) * (one - u) / (p + q)
    };
    (a, b)
}

/// `f(ρ0, φ0) = 27ρ0²(ρ0² - 1) + φ0 (2 - 3ρ0² - 3ρ0⁴ + 2ρ0⁶ - 2(1 - ρ0² + ρ0⁴)^{3/2})`.
pub fn bifurcation_f<T: Scalar>(rho0: T, phi0: T) -> Result<T> {
    check_rho(rho0)?;
    let (a, b) = bifurcation_parts(rho0);
    Ok(a + phi0 * b)
}

/// The unique `φ0` with `f(ρ0, φ0) = 0`; always negative.
pub fn cusp_phi0<T: Scalar>(rho0: T) -> Result<T> {
    check_rho(rho0)?;
    let (a, b) = bifurcation_parts(rho0);
    Ok(-a / b)
}

/// Regions and separating curves of the `(ρ0, φ0)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    /// `φ0 > 0`, `ρ0 < (1 - φ0)/(1 + φ0)`: no equilibria.
    R1,
    /// `φ0 > 0`, `ρ0` above both curves: a center and two boundary saddles.
    R2,
    /// `φ0 > 0`, `ρ0 < (φ0 - 1)/(1 + φ0)`: a center and a saddle beyond `r0`.
    R3,
    /// `φ0 < 0`, `f > 0`: a center and a saddle between the origin and `r0`.
    R4,
    /// `φ0 < 0`, `f < 0`: no equilibria.
    R5,
    /// `ρ0 = (1 - φ0)/(1 + φ0)`.
    C1,
    /// `ρ0 = (φ0 - 1)/(1 + φ0)`.
    C2,
    /// `f(ρ0, φ0) = 0` with `φ0 < 0`: cusp.
    C3,
}

impl Region {
    pub const ALL: [Region; 8] = [
        Region::R1,
        Region::R2,
        Region::R3,
        Region::R4,
        Region::R5,
        Region::C1,
        Region::C2,
        Region::C3,
    ];

    pub fn is_curve(self) -> bool {
        matches!(self, Region::C1 | Region::C2 | Region::C3)
    }

    /// Whether the phase portrait has a nondegenerate center.
    pub fn has_center(self) -> bool {
        matches!(self, Region::R2 | Region::R3 | Region::R4 | Region::C1 | Region::C2)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Region::R1 => "R1",
            Region::R2 => "R2",
            Region::R3 => "R3",
            Region::R4 => "R4",
            Region::R5 => "R5",
            Region::C1 => "C1",
            Region::C2 => "C2",
            Region::C3 => "C3",
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Classification of a parameter pair.
///
/// `boundary_distance` is a signed margin to the nearest relevant curve: for
/// `φ0 > 0` it is `ρ0 - |1 - φ0|/(1 + φ0)` (negative in `R1`/`R3`, positive
/// in `R2`); for `φ0 < 0` it is `(φ_c - φ0)/max(1, |φ_c|)` where `φ_c` is the
/// cusp value, positive in `R4` and negative in `R5`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionLabel<T> {
    pub label: Region,
    pub boundary_distance: T,
}

pub fn classify_parameters<T: Scalar>(rho0: T, phi0: T, tol_curve: T) -> Result<RegionLabel<T>> {
    check_rho(rho0)?;
    if !(phi0.is_finite() && phi0 != T::zero()) {
        return Err(Error::Domain(format!("phi0 = {} must be finite and nonzero", phi0)));
    }
    let one = T::one();
    if phi0 > T::zero() {
        let g = (one - phi0) / (one + phi0);
        let margin = rho0 - g.abs();
        let label = if margin.abs() <= tol_curve {
            if g > T::zero() {
                Region::C1
            } else if g < T::zero() {
                Region::C2
            } else {
                // φ0 = 1 exactly: both curves meet ρ0 = 0, outside the domain.
                Region::R2
            }
        } else if margin > T::zero() {
            Region::R2
        } else if g > T::zero() {
            Region::R1
        } else {
            Region::R3
        };
        Ok(RegionLabel {
            label,
            boundary_distance: margin,
        })
    } else {
        let root = cusp_phi0(rho0)?;
        let margin = (root - phi0) / root.abs().max(one);
        let label = if margin.abs() <= tol_curve {
            Region::C3
        } else if margin > T::zero() {
            Region::R4
        } else {
            Region::R5
        };
        Ok(RegionLabel {
            label,
            boundary_distance: margin,
        })
    }
}

/// [`classify_parameters`] applied to a physical configuration.
pub fn classify_params<T: Scalar>(p: &Params<T>, tol_curve: T) -> Result<RegionLabel<T>> {
    p.validate()?;
    classify_parameters(p.rho0(), p.phi0(), tol_curve)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    Vortex,
    Center,
    HyperbolicSaddle,
    DegenerateSaddle,
    Cusp,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium<T> {
    pub location: PhaseState<T>,
    pub kind: EquilibriumKind,
    /// Absent for the vortex, where the field is singular.
    pub jacobian_det: Option<T>,
}

/// Extrema of the axis cubic. `cusp` is where the double root sits on `C3`
/// and coincides with `local_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicLandmarks<T> {
    pub local_max: T,
    pub local_min: T,
    pub cusp: T,
}

pub fn cubic_landmarks<T: Scalar>(p: &Params<T>) -> CubicLandmarks<T> {
    let r2 = p.domain_radius * p.domain_radius;
    let q2 = p.path_radius * p.path_radius;
    let disc = (r2 * r2 - r2 * q2 + q2 * q2).sqrt();
    let three_r = T::lit(3.0) * p.path_radius;
    let local_max = (r2 + q2 - disc) / three_r;
    CubicLandmarks {
        local_max,
        local_min: (r2 + q2 + disc) / three_r,
        cusp: local_max,
    }
}

/// `P(x) - λ`.
pub fn axis_residual<T: Scalar>(p: &Params<T>, x: T) -> T {
    x * (x - p.path_radius) * (x - p.image_radius()) - p.axis_level()
}

/// Stability type of a critical point from the sign of its Jacobian determinant.
pub fn classify_equilibrium<T: Scalar>(p: &Params<T>, s: &PhaseState<T>, tol_det: T) -> Result<EquilibriumKind> {
    if s.distance_to(&vortex_point(p)) <= p.exclusion_radius() {
        return Ok(EquilibriumKind::Vortex);
    }
    let det = eval_jacobian(p, s)?.det();
    let scale = p.angular_velocity * p.angular_velocity;
    let r = p.domain_radius;
    let on_boundary = ((s.x * s.x + s.y * s.y).sqrt() - r).abs() <= T::lit(1e-9) * r;
    Ok(if det > tol_det * scale {
        EquilibriumKind::Center
    } else if det < -tol_det * scale {
        EquilibriumKind::HyperbolicSaddle
    } else if on_boundary {
        EquilibriumKind::DegenerateSaddle
    } else {
        EquilibriumKind::Cusp
    })
}

fn axis_equilibrium<T: Scalar>(p: &Params<T>, x: T, kind: Option<EquilibriumKind>) -> Result<Equilibrium<T>> {
    let location = PhaseState::new(x, T::zero());
    let det = eval_jacobian(p, &location)?.det();
    let kind = match kind {
        Some(k) => k,
        None => classify_equilibrium(p, &location, T::lit(DEFAULT_TOL_DET))?,
    };
    Ok(Equilibrium {
        location,
        kind,
        jacobian_det: Some(det),
    })
}

/// Critical points on the symmetry axis inside the closed disk, ordered by `x`.
///
/// Roots on the boundary (curves `C1`, `C2`) are reported at exactly `±R` as
/// degenerate saddles; the double root on `C3` is reported once as a cusp.
pub fn axis_equilibria<T: Scalar>(p: &Params<T>) -> Result<Vec<Equilibrium<T>>> {
    axis_equilibria_with(p, T::lit(DEFAULT_TOL_RESIDUAL))
}

/// [`axis_equilibria`] with an explicit residual tolerance (relative to `R³`).
pub fn axis_equilibria_with<T: Scalar>(p: &Params<T>, tol_residual: T) -> Result<Vec<Equilibrium<T>>> {
    p.validate()?;
    let r = p.domain_radius;
    let tol = tol_residual * r * r * r;
    let q = |x: T| axis_residual(p, x);
    let x_max = cubic_landmarks(p).local_max;
    let q_max = q(x_max);
    if q_max.abs() <= tol {
        return Ok(vec![axis_equilibrium(p, x_max, Some(EquilibriumKind::Cusp))?]);
    }
    if q_max < T::zero() {
        return Ok(Vec::new());
    }
    let xtol = T::lit(4.0) * T::epsilon() * r;
    let mut out = Vec::with_capacity(2);
    for end in [-r, r] {
        let q_end = q(end);
        if q_end.abs() <= tol {
            out.push(axis_equilibrium(p, end, Some(EquilibriumKind::DegenerateSaddle))?);
        } else if q_end < T::zero() {
            let (lo, hi) = if end < x_max { (end, x_max) } else { (x_max, end) };
            let x = brent(q, lo, hi, xtol, 200)
                .ok_or_else(|| Error::Domain(format!("axis root bracket [{}, {}] failed", lo, hi)))?;
            out.push(axis_equilibrium(p, x, None)?);
        }
    }
    Ok(out)
}

/// Determinant of the Jacobian at the boundary saddles, from its closed form.
pub fn boundary_saddle_det<T: Scalar>(p: &Params<T>) -> T {
    let r = p.domain_radius;
    let r0 = p.path_radius;
    let c = p.strength_ratio();
    let th = p.angular_velocity;
    let base = c * r - r * r * r;
    let shift = (c + r * r) * r0;
    (base - shift) * (base + shift) * th * th / (c * c * (r * r - r0 * r0))
}

/// The pair of saddles `(x_s, ±y_s)` on the boundary circle, present in `R2` only.
pub fn boundary_saddles<T: Scalar>(p: &Params<T>) -> Result<Option<[Equilibrium<T>; 2]>> {
    p.validate()?;
    let phi0 = p.phi0();
    if phi0 <= T::zero() {
        return Ok(None);
    }
    let one = T::one();
    let rho0 = p.rho0();
    if rho0 <= ((one - phi0) / (one + phi0)).abs() {
        return Ok(None);
    }
    let r = p.domain_radius;
    let r2 = r * r;
    let r0 = p.path_radius;
    let c = p.strength_ratio();
    let two = T::lit(2.0);
    let quarter = T::lit(0.25);
    let x = (r2 + r0 * r0) / (two * r0) - c / (two * r0) * (one - r0 * r0 / r2);
    let y2 = quarter
        * (two * (c * c + r2 * r2) / r2 - (c - r2) * (c - r2) / (r0 * r0) - (c + r2) * (c + r2) * r0 * r0 / (r2 * r2));
    if !(y2 > T::zero()) {
        return Ok(None);
    }
    let y = y2.sqrt();
    let det = boundary_saddle_det(p);
    let make = |y: T| Equilibrium {
        location: PhaseState::new(x, y),
        kind: EquilibriumKind::HyperbolicSaddle,
        jacobian_det: Some(det),
    };
    Ok(Some([make(y), make(-y)]))
}

/// Every critical point of the portrait: the vortex, the axis equilibria and,
/// in `R2`, the boundary saddles (upper first).
pub fn phase_census<T: Scalar>(p: &Params<T>) -> Result<Vec<Equilibrium<T>>> {
    phase_census_with(p, T::lit(DEFAULT_TOL_RESIDUAL))
}

pub fn phase_census_with<T: Scalar>(p: &Params<T>, tol_residual: T) -> Result<Vec<Equilibrium<T>>> {
    let mut out = vec![Equilibrium {
        location: vortex_point(p),
        kind: EquilibriumKind::Vortex,
        jacobian_det: None,
    }];
    out.extend(axis_equilibria_with(p, tol_residual)?);
    if let Some(pair) = boundary_saddles(p)? {
        out.extend(pair);
    }
    Ok(out)
}

/// The nondegenerate center of the portrait, if any.
pub fn find_center<T: Scalar>(p: &Params<T>) -> Result<Option<Equilibrium<T>>> {
    Ok(axis_equilibria(p)?
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::Center))
}

/// Angular velocities at which a positive-circulation configuration crosses
/// `C1` (`theta0_star`) and `C2` (`theta0_double_star`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationThresholds<T> {
    pub theta0_star: T,
    pub theta0_double_star: T,
}

/// `θ0* = Γ/(2πR²) · (R - r0)/(R + r0)` and `θ0** = Γ/(2πR²) · (R + r0)/(R - r0)`.
/// Only the `R`, `Γ` and `r0` of `p` are used.
pub fn rotation_thresholds<T: Scalar>(p: &Params<T>) -> Result<RotationThresholds<T>> {
    if !(p.circulation > T::zero()) {
        return Err(Error::Domain(format!("Gamma = {} must be positive", p.circulation)));
    }
    let r = p.domain_radius;
    let r0 = p.path_radius;
    if !(r > T::zero() && r0 > T::zero() && r0 < r) {
        return Err(Error::InvalidParams(format!("r0 = {} must lie in (0, R = {})", r0, r)));
    }
    let base = p.circulation / (T::TAU() * r * r);
    Ok(RotationThresholds {
        theta0_star: base * (r - r0) / (r + r0),
        theta0_double_star: base * (r + r0) / (r - r0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    fn textbook_f(rho: f64, phi: f64) -> f64 {
        let u = rho * rho;
        27.0 * u * (u - 1.0) + phi * (2.0 - 3.0 * u - 3.0 * u * u + 2.0 * u * u * u - 2.0 * (1.0 - u + u * u).powf(1.5))
    }

    #[test]
    fn bifurcation_f_values() {
        assert_relative_eq!(bifurcation_f(0.5, 0.0).unwrap(), -5.0625, epsilon = 1e-14);
        assert_relative_eq!(bifurcation_f(0.5, -20.0).unwrap(), 2.357604113144914, epsilon = 1e-12);
        assert_relative_eq!(bifurcation_f(0.5, -1.0).unwrap(), -4.691494794342754, epsilon = 1e-12);
        for &rho in &[0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for &phi in &[-30.0, -2.0, 0.5, 7.0] {
                let a = bifurcation_f(rho, phi).unwrap();
                assert_relative_eq!(a, textbook_f(rho, phi), epsilon = 1e-10, max_relative = 1e-10);
            }
        }
        assert!(bifurcation_f(1.0, 1.0).is_err());
        assert!(bifurcation_f(0.0, 1.0).is_err());
    }

    #[test]
    fn cusp_root_matches_bisection() {
        let root = cusp_phi0(0.5).unwrap();
        let bis = crate::roots::bisect(|phi| textbook_f(0.5, phi), -20.0, -1.0, 200).unwrap();
        assert_relative_eq!(root, bis, epsilon = 1e-10);
        assert_relative_eq!(root, -13.645361096838641, epsilon = 1e-9);
        assert!(bifurcation_f(0.5, root).unwrap().abs() < 1e-12);
    }

    #[test]
    fn classifier_examples() {
        let tol = DEFAULT_TOL_CURVE;
        let lab = |r: f64, p: f64| classify_parameters(r, p, tol).unwrap().label;
        assert_eq!(lab(0.5, 0.2), Region::R1);
        assert_eq!(lab(2.0 / 3.0, 0.2), Region::C1);
        assert_eq!(lab(0.5, 1.0), Region::R2);
        assert_eq!(lab(0.5, 4.0), Region::R3);
        assert_eq!(lab(0.6, 4.0), Region::C2);
        assert_eq!(lab(0.5, -20.0), Region::R4);
        assert_eq!(lab(0.5, -1.0), Region::R5);
        assert_eq!(lab(0.5, cusp_phi0(0.5).unwrap()), Region::C3);
        assert_eq!(classify_parameters(0.6667, 0.2, 1e-3).unwrap().label, Region::C1);
        assert!(classify_parameters(1.5, 1.0, tol).is_err());
        assert!(classify_parameters(0.5, 0.0, tol).is_err());
        let m = classify_parameters(0.5, 0.2, tol).unwrap().boundary_distance;
        assert_relative_eq!(m, 0.5 - 0.8 / 1.2, epsilon = 1e-15);
    }

    fn c_params(c: f64) -> Params<f64> {
        Params::new(1.0, TAU * c, 1.0, 0.5).unwrap()
    }

    #[test]
    fn r4_axis_roots() {
        let p = c_params(-0.05);
        assert_relative_eq!(p.axis_level(), 0.075, epsilon = 1e-15);
        let eq = axis_equilibria(&p).unwrap();
        assert_eq!(eq.len(), 2);
        assert_eq!(eq[0].kind, EquilibriumKind::Center);
        assert_eq!(eq[1].kind, EquilibriumKind::HyperbolicSaddle);
        assert_relative_eq!(eq[0].location.x, 0.09812777000372608, epsilon = 1e-13);
        assert_relative_eq!(eq[1].location.x, 0.377566260030013, epsilon = 1e-13);
    }

    #[test]
    fn r2_axis_root_and_boundary_saddles() {
        let p = c_params(1.0);
        let eq = axis_equilibria(&p).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq[0].kind, EquilibriumKind::Center);
        assert!(eq[0].location.x > -1.0 && eq[0].location.x < 0.0);
        let [up, down] = boundary_saddles(&p).unwrap().unwrap();
        assert_relative_eq!(up.location.x, 0.5, epsilon = 1e-15);
        assert_relative_eq!(up.location.y, 0.75f64.sqrt(), epsilon = 1e-15);
        assert_eq!(down.location.y, -up.location.y);
        assert_relative_eq!(up.jacobian_det.unwrap(), -4.0 / 3.0, epsilon = 1e-14);
        let numeric = eval_jacobian(&p, &up.location).unwrap().det();
        assert_relative_eq!(numeric, -4.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn r1_is_empty() {
        let p = Params::from_dimensionless(0.5, 0.2).unwrap();
        assert!(axis_equilibria(&p).unwrap().is_empty());
        assert!(boundary_saddles(&p).unwrap().is_none());
        let census = phase_census(&p).unwrap();
        assert_eq!(census.len(), 1);
        assert_eq!(census[0].kind, EquilibriumKind::Vortex);
    }

    #[test]
    fn landmarks() {
        let p = c_params(1.0);
        let l = cubic_landmarks(&p);
        assert_relative_eq!(l.local_max, 0.232408, epsilon = 1e-6);
        assert_relative_eq!(l.local_min, 1.434259, epsilon = 1e-6);
        assert_eq!(l.cusp, l.local_max);
    }

    #[test]
    fn cusp_is_a_double_root() {
        let p = Params::<f64>::from_dimensionless(0.5, cusp_phi0(0.5).unwrap()).unwrap();
        let eq = axis_equilibria(&p).unwrap();
        assert_eq!(eq.len(), 1);
        assert_eq!(eq[0].kind, EquilibriumKind::Cusp);
        assert_relative_eq!(eq[0].location.x, 0.232408, epsilon = 1e-6);
        assert!(eq[0].jacobian_det.unwrap().abs() < 1e-6);
    }

    #[test]
    fn boundary_roots_on_c1_and_c2() {
        let c1 = Params::from_dimensionless(0.5, 1.0 / 3.0).unwrap();
        let eq = axis_equilibria(&c1).unwrap();
        assert_eq!(eq[0].location.x, -1.0);
        assert_eq!(eq[0].kind, EquilibriumKind::DegenerateSaddle);
        let c2 = Params::from_dimensionless(0.5, 3.0).unwrap();
        let eq = axis_equilibria(&c2).unwrap();
        assert_eq!(eq.last().unwrap().location.x, 1.0);
        assert_eq!(eq.last().unwrap().kind, EquilibriumKind::DegenerateSaddle);
    }

    #[test]
    fn thresholds() {
        let p = c_params(1.0);
        let t = rotation_thresholds(&p).unwrap();
        assert_relative_eq!(t.theta0_star, 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(t.theta0_double_star, 3.0, epsilon = 1e-14);
        let at = |th: f64| {
            let q = Params::new(1.0, TAU, th, 0.5).unwrap();
            classify_params(&q, DEFAULT_TOL_CURVE).unwrap().label
        };
        assert_eq!(at(t.theta0_star), Region::C1);
        assert_eq!(at(t.theta0_double_star), Region::C2);
        assert!(rotation_thresholds(&c_params(-1.0)).is_err());
    }

    #[test]
    fn works_in_single_precision() {
        let p = Params::<f32>::new(1.0, std::f32::consts::TAU * -0.05, 1.0, 0.5).unwrap();
        let eq = axis_equilibria_with(&p, 1e-6).unwrap();
        assert_eq!(eq.len(), 2);
        assert!((eq[0].location.x - 0.098_127_77).abs() < 1e-5);
        assert_eq!(classify_parameters(0.5f32, -20.0, 1e-6).unwrap().label, Region::R4);
    }
}
