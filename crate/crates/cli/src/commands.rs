//! One function per subcommand. Computation runs on the rayon pool; files are
//! written afterwards from the calling thread.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde_json::json;
use vortex_stir::dynamics::{integrate_until, period_scan_with, ScanOptions};
use vortex_stir::equilibria::{classify_params, phase_census_with, EquilibriumKind};
use vortex_stir::io::{params_meta, render_csv, scan_csv, ORBIT_COLUMNS};
use vortex_stir::perturbation::{find_periodic_orbits, resonance_pairs, sample_trajectory, UNPERTURBED_FLAG};
use vortex_stir::sweep::{sweep, sweep_csv};
use vortex_stir::{eval_hamiltonian, eval_jacobian, to_lab_frame, Equilibrium, Params, State};

use crate::config::RunConfig;
use crate::Failure;

/// Output directory prepared with the resolved config echoed into it.
pub struct Run {
    pub cfg: RunConfig,
    pub hash: String,
}

impl Run {
    pub fn start(cfg: RunConfig) -> Result<Self, Failure> {
        fs::create_dir_all(&cfg.output_dir).map_err(|e| Failure::io(&cfg.output_dir, e))?;
        let hash = cfg.hash();
        write(&cfg.output_dir.join("config.resolved.json"), &cfg.resolved_json())?;
        Ok(Self { cfg, hash })
    }

    fn meta(&self, p: Option<&Params>) -> String {
        match p {
            Some(p) => format!("{} config_sha256={}", params_meta(p), self.hash),
            None => format!("config_sha256={}", self.hash),
        }
    }

    fn path(&self, name: &str) -> std::path::PathBuf {
        self.cfg.output_dir.join(name)
    }
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes") + "\n"
}

fn census_json(run: &Run, p: &Params) -> Result<(serde_json::Value, Vec<Equilibrium>), Failure> {
    let label = classify_params(p, run.cfg.tolerances.curve)?;
    let census = phase_census_with(p, run.cfg.tolerances.residual)?;
    let value = json!({
        "params": p,
        "rho0": p.rho0(),
        "phi0": p.phi0(),
        "label": label,
        "equilibria": census,
        "config_sha256": run.hash,
    });
    Ok((value, census))
}

pub fn equilibria(run: &Run) -> Result<String, Failure> {
    let p = run.cfg.params()?;
    let (value, _) = census_json(run, &p)?;
    let text = pretty(&value);
    write(&run.path("equilibria.json"), &text)?;
    Ok(text)
}

#[derive(Clone, Copy, PartialEq)]
enum Manifold {
    Unstable,
    Stable,
}

struct Branch {
    saddle: usize,
    manifold: Manifold,
    samples: Vec<State>,
}

// Unit eigenvectors of a 2×2 matrix with det < 0, unstable first.
fn saddle_directions(p: &Params, s: &State) -> Result<[[f64; 2]; 2], Failure> {
    let j = eval_jacobian(p, s)?;
    let half_tr = 0.5 * j.trace();
    let disc = (half_tr * half_tr - j.det()).sqrt();
    let vec_for = |lambda: f64| {
        let a = [j.a12, lambda - j.a11];
        let b = [lambda - j.a22, j.a21];
        let v = if a[0].hypot(a[1]) >= b[0].hypot(b[1]) { a } else { b };
        let n = v[0].hypot(v[1]);
        [v[0] / n, v[1] / n]
    };
    Ok([vec_for(half_tr + disc), vec_for(half_tr - disc)])
}

fn separatrix_branches(run: &Run, p: &Params, saddles: &[State]) -> Result<Vec<Branch>, Failure> {
    let pc = run.cfg.portrait;
    let r = p.domain_radius;
    let h = pc.separatrix_offset * r;
    let stop_r = pc.stop_radius * r;
    let t_span = pc.separatrix_time / p.angular_velocity.abs();
    let mut starts = Vec::new();
    for (i, s) in saddles.iter().enumerate() {
        let dirs = saddle_directions(p, s)?;
        for (manifold, v) in [(Manifold::Unstable, dirs[0]), (Manifold::Stable, dirs[1])] {
            for sign in [1.0, -1.0] {
                let q = State::new(s.x + sign * h * v[0], s.y + sign * h * v[1]);
                if q.x.hypot(q.y) <= r * (1.0 + 1e-12) {
                    starts.push((i, manifold, q));
                }
            }
        }
    }
    let tol = run.cfg.tolerances.orbit;
    let branches = starts
        .par_iter()
        .filter_map(|&(i, manifold, q)| {
            let mut left_home = false;
            let stop = |st: &State| {
                let home = st.distance_to(&saddles[i]);
                left_home |= home > 100.0 * stop_r;
                saddles
                    .iter()
                    .enumerate()
                    .any(|(k, o)| (k != i || left_home) && st.distance_to(o) < stop_r)
            };
            let t_end = if manifold == Manifold::Unstable {
                t_span
            } else {
                -t_span
            };
            match integrate_until(p, &q, t_end, tol, 4, stop) {
                Ok(orbit) => Some(Branch {
                    saddle: i,
                    manifold,
                    samples: orbit.samples,
                }),
                Err(e) => {
                    eprintln!("warning: separatrix branch from saddle {i} dropped: {e}");
                    None
                }
            }
        })
        .collect();
    Ok(branches)
}

fn streamlines(run: &Run, p: &Params) -> Vec<Option<Vec<State>>> {
    let pc = run.cfg.portrait;
    let r = p.domain_radius;
    let n = pc.streamlines;
    let t_end = pc.streamline_time / p.angular_velocity.abs();
    let tol = run.cfg.tolerances.orbit;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let x = -r + 2.0 * r * (i as f64 + 0.5) / n as f64;
            if (x - p.path_radius).abs() < 0.05 * r {
                return None;
            }
            let s0 = State::new(x, 0.0);
            let mut away = false;
            let closed = |s: &State| {
                let d = s.distance_to(&s0);
                away |= d > 1e-2 * r;
                away && d < 1e-3 * r
            };
            match integrate_until(p, &s0, t_end, tol, 4, closed) {
                Ok(o) => Some(o.samples),
                Err(e) => {
                    eprintln!("warning: streamline {i} dropped: {e}");
                    None
                }
            }
        })
        .collect()
}

pub fn portrait(run: &Run) -> Result<String, Failure> {
    let p = run.cfg.params()?;
    let (value, census) = census_json(run, &p)?;
    write(&run.path("equilibria.json"), &pretty(&value))?;

    let saddles: Vec<State> = census
        .iter()
        .filter(|e| e.kind == EquilibriumKind::HyperbolicSaddle)
        .map(|e| e.location)
        .collect();
    let branches = separatrix_branches(run, &p, &saddles)?;
    let mut rows = Vec::new();
    for (b, branch) in branches.iter().enumerate() {
        let kind = match branch.manifold {
            Manifold::Unstable => "unstable",
            Manifold::Stable => "stable",
        };
        for s in &branch.samples {
            rows.push([
                b.to_string(),
                branch.saddle.to_string(),
                kind.to_string(),
                s.time().to_string(),
                s.x.to_string(),
                s.y.to_string(),
                eval_hamiltonian(&p, s)?.to_string(),
            ]);
        }
    }
    let meta = run.meta(Some(&p));
    let columns = ["branch", "saddle", "manifold", "t", "x", "y", "psi"];
    write(&run.path("separatrices.csv"), &render_csv(&columns, &meta, rows))?;

    let dir = run.path("streamlines");
    fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
    let mut written = 0;
    for (i, line) in streamlines(run, &p).into_iter().enumerate() {
        let Some(samples) = line else { continue };
        let rows = samples
            .iter()
            .map(|s| Ok([s.time(), s.x, s.y, eval_hamiltonian(&p, s)?]))
            .collect::<Result<Vec<_>, vortex_stir::Error>>()?;
        write(
            &dir.join(format!("stream_{i:03}.csv")),
            &render_csv(&ORBIT_COLUMNS, &meta, rows),
        )?;
        written += 1;
    }
    Ok(pretty(&json!({
        "label": value["label"],
        "equilibria": census.len(),
        "separatrix_branches": branches.len(),
        "streamlines": written,
    })))
}

fn scan(run: &Run, p: &Params) -> Result<vortex_stir::PeriodScan<f64>, Failure> {
    let sc = run.cfg.scan;
    let opts = ScanOptions {
        first_offset: sc.first_offset,
        last_gap: sc.last_gap,
        tol: run.cfg.tolerances.period,
    };
    Ok(period_scan_with(p, sc.samples, &opts)?)
}

pub fn period_scan(run: &Run) -> Result<String, Failure> {
    let p = run.cfg.params()?;
    let result = scan(run, &p)?;
    write(&run.path("period_scan.csv"), &scan_csv(&result, &run.meta(Some(&p))))?;
    let summary = pretty(&json!({
        "center": result.center,
        "linear_period": result.linear_period,
        "separatrix_x": result.separatrix_x,
        "samples": result.section_points.len(),
        "min_period": result.min_period(),
        "max_period": result.max_period(),
        "stopped": result.stopped,
        "config_sha256": run.hash,
    }));
    write(&run.path("period_scan.json"), &summary)?;
    Ok(summary)
}

pub fn periodic_orbits(run: &Run) -> Result<String, Failure> {
    let p = run.cfg.params()?;
    let pr = run.cfg.protocol()?;
    pr.validate(&p)?;
    let result = scan(run, &p)?;
    let periods = result.section_points.iter().map(|s| s.period);
    let t_min = periods.clone().fold(result.linear_period, f64::min);
    let t_max = periods.fold(result.linear_period, f64::max);
    let rc = run.cfg.resonance;
    let pairs = resonance_pairs(t_min, t_max, pr.period, rc.m_max, rc.n_max);

    let mut searches = Vec::new();
    let meta = run.meta(Some(&p));
    for pair in pairs.iter().take(rc.max_pairs) {
        let report = find_periodic_orbits(&p, &pr, pair, &run.cfg.seed_grid)?;
        let mut files = Vec::new();
        if rc.dump_trajectories {
            let dir = run.path("orbits");
            fs::create_dir_all(&dir).map_err(|e| Failure::io(&dir, e))?;
            for (k, o) in report.orbits.iter().enumerate() {
                let n = rc.trajectory_samples_per_period * pair.m;
                let traj = sample_trajectory(&p, &pr, &o.fixed_point, pair.m, n, run.cfg.seed_grid.integration_tol)?;
                let lab = to_lab_frame(&traj, &p)?;
                let rows = traj.iter().zip(&lab).map(|(s, l)| [s.time(), s.x, s.y, l.x, l.y]);
                let name = format!("m{}_n{}_orbit{k:03}.csv", pair.m, pair.n);
                write(
                    &dir.join(&name),
                    &render_csv(&["t", "x", "y", "x_lab", "y_lab"], &meta, rows),
                )?;
                files.push(format!("orbits/{name}"));
            }
        }
        searches.push(json!({
            "pair": pair,
            "orbit_classes": report.orbit_classes,
            "orbits": report.orbits,
            "trajectories": files,
            "diagnostics": report.diagnostics,
        }));
    }
    let value = json!({
        "params": p,
        "protocol": pr,
        "degenerate": pr.is_unperturbed().then_some(UNPERTURBED_FLAG),
        "period_range": [t_min, t_max],
        "scan_stopped": result.stopped,
        "resonance_pairs": pairs,
        "searches": searches,
        "config_sha256": run.hash,
    });
    let text = pretty(&value);
    write(&run.path("periodic_orbits.json"), &text)?;
    Ok(pretty(&json!({
        "resonance_pairs": pairs.len(),
        "searched": searches.len(),
        "orbits": searches.iter().map(|s| s["orbits"].as_array().map_or(0, Vec::len)).collect::<Vec<_>>(),
        "degenerate": pr.is_unperturbed(),
    })))
}

pub fn sweep_grid(run: &Run) -> Result<String, Failure> {
    let grid = run
        .cfg
        .sweep
        .ok_or_else(|| Failure::Usage("sweep needs a \"sweep\" grid in the config".into()))?;
    let points = sweep(&grid, run.cfg.tolerances.curve)?;
    write(&run.path("sweep.csv"), &sweep_csv(&points, &run.meta(None)))?;
    Ok(pretty(&json!({ "points": points.len(), "config_sha256": run.hash })))
}

pub fn schema() -> String {
    let orbit = ORBIT_COLUMNS.join(",");
    pretty(&json!({
        "config": {
            "description": "JSON run config; unknown keys are rejected. Every command echoes the resolved config to <output_dir>/config.resolved.json.",
            "defaults": RunConfig::default(),
            "example_params": {"R": 1.0, "Gamma": -0.3141592653589793, "theta0": 1.0, "r0": 0.5},
            "example_protocol": {"epsilon": 0.001, "T": 1.0, "f": [{"k": 1, "cos": 1.0, "sin": 0.0}], "g": []},
            "example_sweep": {"rho_min": 0.0, "rho_max": 1.0, "n_rho": 100, "phi_min": -30.0, "phi_max": 30.0, "n_phi": 100},
        },
        "csv": {
            "header": "first line '# columns=<names> [R=.. Gamma=.. theta0=.. r0=..] config_sha256=<hex>'; numbers are shortest round-trip decimals",
            "separatrices.csv": "branch,saddle,manifold,t,x,y,psi",
            "streamlines/stream_NNN.csv": orbit,
            "period_scan.csv": "x,period,energy",
            "orbits/mM_nN_orbitKKK.csv": "t,x,y,x_lab,y_lab",
            "sweep.csv": "rho0,phi0,label",
        },
        "json": {
            "equilibria.json": "params, rho0, phi0, label {label, boundary_distance}, equilibria [{location {x, y}, kind, jacobian_det}]",
            "period_scan.json": "center, linear_period, separatrix_x, samples, min_period, max_period, stopped",
            "periodic_orbits.json": "params, protocol, degenerate, period_range, resonance_pairs, searches [{pair, orbit_classes, orbits, trajectories, diagnostics}]",
        },
        "exit_codes": {"0": "success", "1": "i/o or numerical failure", "2": "usage, config or domain error", "3": "no center for this parameter set"},
        "environment": {"VORTEX_STIR_THREADS": "size of the worker pool"},
    }))
}
