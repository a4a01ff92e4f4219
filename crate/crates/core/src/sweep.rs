//! Classification of a rectangular grid of `(ρ0, φ0)` pairs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{classify_parameters, Region};
use crate::error::{Error, Result};
use crate::io::render_csv;
use crate::scalar::Scalar;

/// Cell-centered grid: `ρ0_i = rho_min + (i + ½)(rho_max - rho_min)/n_rho`,
/// likewise for `φ0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid<T> {
    pub rho_min: T,
    pub rho_max: T,
    pub n_rho: usize,
    pub phi_min: T,
    pub phi_max: T,
    pub n_phi: usize,
}

impl<T: Scalar> SweepGrid<T> {
    pub fn validate(&self) -> Result<()> {
        let ok = |lo: T, hi: T, n: usize| lo.is_finite() && hi.is_finite() && lo < hi && n > 0;
        if !ok(self.rho_min, self.rho_max, self.n_rho) || !ok(self.phi_min, self.phi_max, self.n_phi) {
            return Err(Error::Domain(
                "grid needs finite bounds with min < max and at least one cell per axis".into(),
            ));
        }
        Ok(())
    }

    fn centers(lo: T, hi: T, n: usize) -> impl Iterator<Item = T> {
        let step = (hi - lo) / T::count(n);
        (0..n).map(move |i| lo + (T::count(i) + T::lit(0.5)) * step)
    }

    /// Grid points inside the parameter domain, `ρ0`-major.
    pub fn points(&self) -> Vec<(T, T)> {
        let phis: Vec<T> = Self::centers(self.phi_min, self.phi_max, self.n_phi).collect();
        Self::centers(self.rho_min, self.rho_max, self.n_rho)
            .flat_map(|r| phis.iter().map(move |&f| (r, f)))
            .filter(|&(r, f)| r > T::zero() && r < T::one() && f != T::zero() && f.is_finite())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint<T> {
    pub rho0: T,
    pub phi0: T,
    pub label: Region,
}

/// Classifies every grid point in parallel; the output order is the grid order.
pub fn sweep<T: Scalar>(grid: &SweepGrid<T>, tol_curve: T) -> Result<Vec<SweepPoint<T>>> {
    grid.validate()?;
    grid.points()
        .into_par_iter()
        .map(|(rho0, phi0)| {
            Ok(SweepPoint {
                rho0,
                phi0,
                label: classify_parameters(rho0, phi0, tol_curve)?.label,
            })
        })
        .collect()
}

/// `rho0,phi0,label` rows under a `#` header carrying `meta`.
pub fn sweep_csv<T: Scalar>(points: &[SweepPoint<T>], meta: &str) -> String {
    let rows = points
        .iter()
        .map(|p| [p.rho0.to_string(), p.phi0.to_string(), p.label.to_string()]);
    render_csv(&["rho0", "phi0", "label"], meta, rows)
}
