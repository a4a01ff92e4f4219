#![allow(dead_code)]

//! Shared oracles: region sampling and an axis-root sign scan that does not
//! use the library's root finder.

use std::f64::consts::TAU;

use vortex_stir::equilibria::{axis_equilibria, boundary_saddles, classify_parameters, cubic_landmarks, cusp_phi0};
use vortex_stir::{EquilibriumKind, Params, Region};

// Weyl sequence in [0, 1); deterministic and well spread.
pub fn weyl(i: usize, k: usize) -> f64 {
    const ALPHAS: [f64; 4] = [
        0.618_033_988_749_895,
        0.754_877_666_246_693,
        0.569_840_290_998_053,
        0.438_579_853_378_291,
    ];
    ((i + 1) as f64 * ALPHAS[k]).fract()
}

pub fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

pub fn sample(region: Region, i: usize) -> (f64, f64) {
    let (u, v) = (lerp(0.05, 0.95, weyl(i, 0)), weyl(i, 1));
    match region {
        Region::R1 => {
            let phi = lerp(0.02, 0.9, v);
            (u * (1.0 - phi) / (1.0 + phi), phi)
        }
        Region::R2 => {
            let phi = lerp(0.05, 20.0, v);
            let g = ((1.0 - phi) / (1.0 + phi)).abs();
            (g + u * (1.0 - g), phi)
        }
        Region::R3 => {
            let phi = lerp(1.2, 40.0, v);
            (u * (phi - 1.0) / (1.0 + phi), phi)
        }
        Region::R4 | Region::R5 => {
            let rho = lerp(0.05, 0.95, v);
            let root = cusp_phi0(rho).unwrap();
            let phi = if region == Region::R4 {
                root * lerp(1.01, 3.0, u)
            } else {
                root * lerp(0.01, 0.99, u)
            };
            (rho, phi)
        }
        _ => unreachable!(),
    }
}

// Physical realization with a varying scale and rotation sense.
pub fn physical(rho0: f64, phi0: f64, i: usize) -> Params {
    let r = lerp(0.5, 3.0, weyl(i, 2));
    let sense = if i % 2 == 0 { 1.0 } else { -1.0 };
    let theta0 = sense * lerp(0.3, 3.0, weyl(i, 3));
    let gamma = TAU * r * r * theta0 / phi0;
    Params::new(r, gamma, theta0, rho0 * r).unwrap()
}

pub fn field(p: &Params, x: f64, y: f64) -> [f64; 2] {
    let (r, r0, th) = (p.domain_radius, p.path_radius, p.angular_velocity);
    let c = p.circulation / (TAU * th);
    let a = x - r0;
    let b = x - r * r / r0;
    let da = a * a + y * y;
    let db = b * b + y * y;
    [
        -th * y + c * th * y * (1.0 / da - 1.0 / db),
        th * x - c * th * (a / da - b / db),
    ]
}

pub fn fd_det(p: &Params, x: f64, y: f64) -> f64 {
    let h = 1e-6 * p.domain_radius;
    let fx = |dx: f64, dy: f64| field(p, x + dx, y + dy);
    let (xp, xm, yp, ym) = (fx(h, 0.0), fx(-h, 0.0), fx(0.0, h), fx(0.0, -h));
    let j11 = (xp[0] - xm[0]) / (2.0 * h);
    let j21 = (xp[1] - xm[1]) / (2.0 * h);
    let j12 = (yp[0] - ym[0]) / (2.0 * h);
    let j22 = (yp[1] - ym[1]) / (2.0 * h);
    j11 * j22 - j12 * j21
}

// Roots of x (x - r0)(x - R²/r0) - λ on [-R, R] by a 1e4-cell sign scan
// followed by bisection.
pub fn oracle_roots(p: &Params) -> Vec<f64> {
    let (r, r0) = (p.domain_radius, p.path_radius);
    let c = p.circulation / (TAU * p.angular_velocity);
    let lambda = c * (r0 - r * r / r0);
    let q = |x: f64| x * (x - r0) * (x - r * r / r0) - lambda;
    let n = 10_000;
    let mut roots = Vec::new();
    for k in 0..n {
        let (mut lo, mut hi) = (
            -r + 2.0 * r * k as f64 / n as f64,
            -r + 2.0 * r * (k + 1) as f64 / n as f64,
        );
        if q(lo).signum() == q(hi).signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if q(mid).signum() == q(lo).signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots
}

pub const REGIONS: [Region; 5] = [Region::R1, Region::R2, Region::R3, Region::R4, Region::R5];

/// Checks one sampled parameter pair: classifier label, axis roots against
/// the oracle, root residuals, kinds from a finite-difference Jacobian and the
/// ordering expected in each region.
pub fn check_census(region: Region, idx: usize) -> Result<(), String> {
    let (rho0, phi0) = sample(region, idx);
    let label = classify_parameters(rho0, phi0, 1e-9).map_err(|e| e.to_string())?.label;
    if label != region {
        return Err(format!("({rho0}, {phi0}) labelled {label}, sampled in {region}"));
    }
    let p = physical(rho0, phi0, idx);
    let r = p.domain_radius;
    let eq = axis_equilibria(&p).map_err(|e| e.to_string())?;
    let oracle = oracle_roots(&p);
    if eq.len() != oracle.len() {
        return Err(format!(
            "{region} ({rho0}, {phi0}): {} roots, oracle {}",
            eq.len(),
            oracle.len()
        ));
    }
    for (e, x) in eq.iter().zip(&oracle) {
        if (e.location.x - x).abs() > 1e-9 * r {
            return Err(format!("{region}: root {} vs oracle {x}", e.location.x));
        }
        let x = e.location.x;
        let res = (x * (x - p.path_radius) * (x - p.image_radius()) - p.axis_level()) / (r * r * r);
        if res.abs() > 1e-10 {
            return Err(format!("{region}: residual {res}"));
        }
        let det = fd_det(&p, x, 0.0);
        let expect = if det > 0.0 {
            EquilibriumKind::Center
        } else {
            EquilibriumKind::HyperbolicSaddle
        };
        if e.kind != expect {
            return Err(format!("{region}: kind {:?} at {x}, Jacobian says {expect:?}", e.kind));
        }
    }
    let kinds: Vec<_> = eq.iter().map(|e| e.kind).collect();
    let bs = boundary_saddles(&p).map_err(|e| e.to_string())?;
    let r0 = p.path_radius;
    let ok = match region {
        Region::R1 | Region::R5 => eq.is_empty() && bs.is_none(),
        Region::R2 => {
            kinds == [EquilibriumKind::Center]
                && eq[0].location.x > -r
                && eq[0].location.x < 0.0
                && bs.is_some_and(|pair| {
                    pair.iter().all(|s| {
                        (s.location.x.hypot(s.location.y) - r).abs() <= 1e-10 * r
                            && fd_det(&p, s.location.x, s.location.y) < 0.0
                    })
                })
        }
        Region::R3 => {
            kinds == [EquilibriumKind::Center, EquilibriumKind::HyperbolicSaddle]
                && eq[0].location.x > -r
                && eq[0].location.x < 0.0
                && eq[1].location.x > r0
                && eq[1].location.x < r
                && bs.is_none()
        }
        Region::R4 => {
            let x_max = cubic_landmarks(&p).local_max;
            kinds == [EquilibriumKind::Center, EquilibriumKind::HyperbolicSaddle]
                && {
                    let (xc, xs) = (eq[0].location.x, eq[1].location.x);
                    0.0 < xc && xc < x_max && x_max < xs && xs < r0
                }
                && bs.is_none()
        }
        _ => false,
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "{region} ({rho0}, {phi0}): census {kinds:?} violates the region's structure"
        ))
    }
}
