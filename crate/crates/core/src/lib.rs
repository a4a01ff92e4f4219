//! Passive tracer dynamics in a disk stirred by a point vortex moving on a
//! circle.
//!
//! The crate covers the autonomous corotating flow ([`model`]), its relative
//! equilibria and the bifurcation diagram in the `(ρ0, φ0)` plane
//! ([`equilibria`]), orbit integration and the period function of the center
//! ([`dynamics`]), and periodic orbits of periodically perturbed protocols
//! ([`perturbation`]).
//!
//! Every routine is generic over [`Scalar`]; `f64` aliases are provided at the
//! crate root for the common case.

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod io;
pub mod model;
pub mod ode;
pub mod perturbation;
pub mod roots;
pub mod scalar;
pub mod sweep;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use dynamics::{
    integrate_orbit, linearized_period, orbit_period, period_annulus, period_scan, winding_number, Orbit, PeriodScan,
    WindingReference,
};
pub use equilibria::{
    axis_equilibria, bifurcation_f, boundary_saddles, classify_equilibrium, classify_parameters, cubic_landmarks,
    cusp_phi0, phase_census, rotation_thresholds, EquilibriumKind, Region,
};
pub use model::{
    eval_field, eval_hamiltonian, eval_jacobian, image_point, to_lab_frame, Jacobian2, PhaseState, Velocity,
};
pub use perturbation::{
    eval_perturbed_field, find_periodic_orbits, protocol_eval, resonance_pairs, stroboscopic_map, PeriodicOrbitResult,
    ResonancePair, SearchConfig,
};
pub use sweep::{sweep, SweepGrid};

/// Double-precision parameter set.
pub type Params = model::Params<f64>;
/// Single-precision parameter set.
pub type Params32 = model::Params<f32>;
pub type State = model::PhaseState<f64>;
pub type State32 = model::PhaseState<f32>;
pub type Equilibrium = equilibria::Equilibrium<f64>;
pub type Label = equilibria::RegionLabel<f64>;
pub type Protocol = perturbation::StirringProtocol<f64>;
