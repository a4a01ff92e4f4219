//! Corotating-frame vector field, stream function and Jacobian for a tracer
//! advected by a point vortex moving on a circle inside a disk.
//!
//! With the vortex at `(r, 0)` in the corotating frame, its image sits at
//! `(R²/r, 0)` and the stream function is
//!
//! ```text
//! Ψ(x, y) = -θ0/2 (x² + y²) + Γ/(2π) · ½ ln( ((x-r)² + y²) / ((x-R²/r)² + y²) )
//! ```
//!
//! The velocity is its symplectic gradient `(∂Ψ/∂y, -∂Ψ/∂x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default singularity exclusion radius, relative to the domain radius.
pub const DEFAULT_EXCLUSION_REL: f64 = 1e-9;

/// Physical configuration of the circular stirring protocol.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params<T> {
    /// Domain radius `R`.
    #[serde(rename = "R")]
    pub domain_radius: T,
    /// Vortex circulation `Γ`.
    #[serde(rename = "Gamma")]
    pub circulation: T,
    /// Angular velocity `θ0` of the vortex path.
    #[serde(rename = "theta0")]
    pub angular_velocity: T,
    /// Radius `r0` of the vortex path.
    #[serde(rename = "r0")]
    pub path_radius: T,
}

impl<T: Scalar> Params<T> {
    pub fn new(domain_radius: T, circulation: T, angular_velocity: T, path_radius: T) -> Result<Self> {
        let p = Self {
            domain_radius,
            circulation,
            angular_velocity,
            path_radius,
        };
        p.validate()?;
        Ok(p)
    }

    /// Unit disk and unit angular velocity realizing the given `(ρ0, φ0)`.
    pub fn from_dimensionless(rho0: T, phi0: T) -> Result<Self> {
        if !(phi0.is_finite() && phi0 != T::zero()) {
            return Err(Error::Domain(format!("phi0 = {} must be finite and nonzero", phi0)));
        }
        Self::new(T::one(), T::TAU() / phi0, T::one(), rho0)
    }

    pub fn validate(&self) -> Result<()> {
        let all_finite = [
            self.domain_radius,
            self.circulation,
            self.angular_velocity,
            self.path_radius,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        if self.domain_radius <= T::zero() {
            return Err(Error::InvalidParams(format!(
                "R = {} must be positive",
                self.domain_radius
            )));
        }
        if !(self.path_radius > T::zero() && self.path_radius < self.domain_radius) {
            return Err(Error::InvalidParams(format!(
                "r0 = {} must lie in (0, R = {})",
                self.path_radius, self.domain_radius
            )));
        }
        if self.circulation == T::zero() {
            return Err(Error::InvalidParams("Gamma must be nonzero".into()));
        }
        if self.angular_velocity == T::zero() {
            return Err(Error::InvalidParams("theta0 must be nonzero".into()));
        }
        Ok(())
    }

    /// `ρ0 = r0 / R`.
    pub fn rho0(&self) -> T {
        self.path_radius / self.domain_radius
    }

    /// `φ0 = 2π R² θ0 / Γ`.
    pub fn phi0(&self) -> T {
        T::TAU() * self.domain_radius * self.domain_radius * self.angular_velocity / self.circulation
    }

    /// `c = Γ / (2π θ0)`, an area; `φ0 = R² / c`.
    pub fn strength_ratio(&self) -> T {
        self.circulation / (T::TAU() * self.angular_velocity)
    }

    /// Right-hand side `λ = c (r0 - R²/r0)` of the axis equilibrium condition.
    pub fn axis_level(&self) -> T {
        self.strength_ratio() * (self.path_radius - self.image_radius())
    }

    /// `R² / r0`.
    pub fn image_radius(&self) -> T {
        self.domain_radius * self.domain_radius / self.path_radius
    }

    pub fn exclusion_radius(&self) -> T {
        T::lit(DEFAULT_EXCLUSION_REL) * self.domain_radius
    }

    /// `Γ / 2π`, the prefactor of the logarithmic term.
    pub(crate) fn log_prefactor(&self) -> T {
        self.circulation / T::TAU()
    }
}

/// A point of the corotating plane, optionally tagged with a time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<T> {
    pub x: T,
    pub y: T,
    #[serde(default = "untimed", skip_serializing_if = "Option::is_none")]
    pub t: Option<T>,
}

fn untimed<T>() -> Option<T> {
    None
}

impl<T: Scalar> PhaseState<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y, t: None }
    }

    pub fn at(x: T, y: T, t: T) -> Self {
        Self { x, y, t: Some(t) }
    }

    pub fn time(&self) -> T {
        self.t.unwrap_or_else(T::zero)
    }

    pub fn distance_to(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn mirrored(&self) -> Self {
        Self { y: -self.y, ..*self }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Velocity<T> {
    pub dx: T,
    pub dy: T,
}

/// Row-major 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jacobian2<T> {
    pub a11: T,
    pub a12: T,
    pub a21: T,
    pub a22: T,
}

impl<T: Scalar> Jacobian2<T> {
    pub fn det(&self) -> T {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn trace(&self) -> T {
        self.a11 + self.a22
    }
}

struct Distances<T> {
    a: T,
    b: T,
    den_a: T,
    den_b: T,
}

// Squared distances to the vortex at (r, 0) and its image at (R²/r, 0).
fn distances<T: Scalar>(p: &Params<T>, vortex: T, x: T, y: T) -> Result<Distances<T>> {
    let image = p.domain_radius * p.domain_radius / vortex;
    let a = x - vortex;
    let b = x - image;
    let den_a = a * a + y * y;
    let den_b = b * b + y * y;
    let delta = p.exclusion_radius();
    for (den, sx) in [(den_a, vortex), (den_b, image)] {
        if !(den >= delta * delta) {
            return Err(Error::SingularityProximity {
                x: x.as_f64(),
                y: y.as_f64(),
                sx: sx.as_f64(),
                sy: 0.0,
                distance: den.sqrt().as_f64(),
            });
        }
    }
    Ok(Distances { a, b, den_a, den_b })
}

pub(crate) fn field_with_vortex<T: Scalar>(p: &Params<T>, vortex: T, x: T, y: T) -> Result<Velocity<T>> {
    let d = distances(p, vortex, x, y)?;
    let th = p.angular_velocity;
    let c = p.strength_ratio();
    let dx = -th * y + c * th * y * (d.den_a.recip() - d.den_b.recip());
    let dy = th * x - c * th * (d.a / d.den_a - d.b / d.den_b);
    Ok(Velocity { dx, dy })
}

pub(crate) fn hamiltonian_with_vortex<T: Scalar>(p: &Params<T>, vortex: T, x: T, y: T) -> Result<T> {
    let d = distances(p, vortex, x, y)?;
    let half = T::lit(0.5);
    Ok(-half * p.angular_velocity * (x * x + y * y) + p.log_prefactor() * half * (d.den_a / d.den_b).ln())
}

pub(crate) fn jacobian_with_vortex<T: Scalar>(p: &Params<T>, vortex: T, x: T, y: T) -> Result<Jacobian2<T>> {
    let d = distances(p, vortex, x, y)?;
    let th = p.angular_velocity;
    let c = p.strength_ratio();
    let two = T::lit(2.0);
    let (a2, b2) = (d.den_a * d.den_a, d.den_b * d.den_b);
    let a11 = two * c * th * y * (d.b / b2 - d.a / a2);
    let a12 =
        th * (-T::one() + c * (d.den_a.recip() - d.den_b.recip())) + two * c * th * y * y * (b2.recip() - a2.recip());
    let a21 = th - c * th * ((d.den_a - two * d.a * d.a) / a2 - (d.den_b - two * d.b * d.b) / b2);
    let a22 = -a11;
    Ok(Jacobian2 { a11, a12, a21, a22 })
}

/// Velocity `(ẋ, ẏ)` of a tracer at `s` in the corotating frame.
pub fn eval_field<T: Scalar>(p: &Params<T>, s: &PhaseState<T>) -> Result<Velocity<T>> {
    field_with_vortex(p, p.path_radius, s.x, s.y)
}

/// Stream function `Ψ(x, y)`.
pub fn eval_hamiltonian<T: Scalar>(p: &Params<T>, s: &PhaseState<T>) -> Result<T> {
    hamiltonian_with_vortex(p, p.path_radius, s.x, s.y)
}

/// Analytic Jacobian of [`eval_field`]; traceless everywhere.
pub fn eval_jacobian<T: Scalar>(p: &Params<T>, s: &PhaseState<T>) -> Result<Jacobian2<T>> {
    jacobian_with_vortex(p, p.path_radius, s.x, s.y)
}

/// Position of the image vortex, `(R²/r0, 0)`.
pub fn image_point<T: Scalar>(p: &Params<T>) -> PhaseState<T> {
    PhaseState::new(p.image_radius(), T::zero())
}

/// Position of the vortex in the corotating frame, `(r0, 0)`.
pub fn vortex_point<T: Scalar>(p: &Params<T>) -> PhaseState<T> {
    PhaseState::new(p.path_radius, T::zero())
}

/// Rotates each time-tagged corotating state by `θ0 t` into the laboratory frame.
pub fn to_lab_frame<T: Scalar>(orbit: &[PhaseState<T>], p: &Params<T>) -> Result<Vec<PhaseState<T>>> {
    orbit
        .iter()
        .map(|s| {
            let t = s.t.ok_or(Error::MissingTimeTag)?;
            let (sin, cos) = (p.angular_velocity * t).sin_cos();
            Ok(PhaseState::at(cos * s.x - sin * s.y, sin * s.x + cos * s.y, t))
        })
        .collect()
}
