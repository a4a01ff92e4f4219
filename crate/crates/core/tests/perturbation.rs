use std::f64::consts::TAU;

use vortex_stir::dynamics::{orbit_period, period_annulus};
use vortex_stir::perturbation::{
    find_periodic_orbits, stroboscopic_map, ResonancePair, SearchConfig, StirringProtocol, UNPERTURBED_FLAG,
};
use vortex_stir::roots::brent;
use vortex_stir::{eval_hamiltonian, Params, State};

fn r4() -> Params {
    Params::new(1.0, TAU * -0.05, 1.0, 0.5).unwrap()
}

#[test]
fn unperturbed_map_conserves_energy() {
    let p = r4();
    let pr = StirringProtocol::cosine(0.5, 0.0, 1.0);
    for k in 0..10 {
        let s0 = State::new(-0.6 + 0.09 * k as f64, 0.2);
        let out = stroboscopic_map(&p, &pr, &s0, 1, 1e-12).unwrap();
        let e0 = eval_hamiltonian(&p, &s0).unwrap();
        let e1 = eval_hamiltonian(&p, &out).unwrap();
        assert!((e1 - e0).abs() <= 1e-10 * e0.abs().max(1.0));
    }
}

#[test]
fn unperturbed_resonant_orbit_returns_after_m_periods() {
    let p = r4();
    let a = period_annulus(&p).unwrap();
    let (m, n) = (7usize, 1usize);
    let target = m as f64 / n as f64;
    let period = |x: f64| orbit_period(&p, &State::new(x, 0.0), 1e-13).unwrap() - target;
    let lo = a.center.x + 0.05 * a.width();
    let hi = a.separatrix_x - 1e-5 * a.width();
    let x = brent(period, lo, hi, 1e-14, 200).unwrap();
    let pr = StirringProtocol::cosine(0.5, 0.0, 1.0);
    let s0 = State::new(x, 0.0);
    let out = stroboscopic_map(&p, &pr, &s0, m, 1e-13).unwrap();
    assert!(out.distance_to(&s0) < 1e-8, "{:?}", out);
}

#[test]
fn unperturbed_search_reports_torus_samples_flagged_degenerate() {
    let p = r4();
    let pr = StirringProtocol::cosine(0.5, 0.0, 1.0);
    let pair = ResonancePair { m: 7, n: 1, ratio: 7.0 };
    let cfg = SearchConfig {
        radial: 6,
        angular: 2,
        ..SearchConfig::default()
    };
    let report = find_periodic_orbits(&p, &pr, &pair, &cfg).unwrap();
    assert!(!report.orbits.is_empty());
    assert_eq!(report.diagnostics.len(), 12);
    for o in &report.orbits {
        assert_eq!(o.flag.as_deref(), Some(UNPERTURBED_FLAG));
        assert!(o.residual <= 1e-10);
        assert_eq!(o.winding_about_vortex, 0);
        assert_eq!(o.rotations.abs(), 1);
    }
}

#[test]
fn search_requires_a_center() {
    let p = Params::from_dimensionless(0.5, 0.2).unwrap();
    let pr = StirringProtocol::cosine(0.5, 1e-3, 1.0);
    let pair = ResonancePair { m: 7, n: 1, ratio: 7.0 };
    assert!(find_periodic_orbits(&p, &pr, &pair, &SearchConfig::default()).is_err());
}
