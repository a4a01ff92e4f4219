//! Plain-text CSV output with a single `#` header line.
//!
//! Numbers are written with `Display`, which for `f32`/`f64` is the shortest
//! representation that parses back to the same value. Lines end with `\n`.

use std::fmt::{Display, Write as _};

use crate::dynamics::{Orbit, PeriodScan};
use crate::error::Result;
use crate::model::eval_hamiltonian;
use crate::scalar::Scalar;

/// `# columns=a,b,c <meta>`.
pub fn header_line(columns: &[&str], meta: &str) -> String {
    let mut line = format!("# columns={}", columns.join(","));
    if !meta.is_empty() {
        line.push(' ');
        line.push_str(meta);
    }
    line.push('\n');
    line
}

/// Renders a header followed by one comma-separated line per row.
pub fn render_csv<V, R, I>(columns: &[&str], meta: &str, rows: I) -> String
where
    V: Display,
    R: AsRef<[V]>,
    I: IntoIterator<Item = R>,
{
    let mut out = header_line(columns, meta);
    for row in rows {
        let mut first = true;
        for v in row.as_ref() {
            if !first {
                out.push(',');
            }
            first = false;
            let _ = write!(out, "{v}");
        }
        out.push('\n');
    }
    out
}

/// Header metadata describing a parameter set.
pub fn params_meta<T: Scalar>(p: &crate::model::Params<T>) -> String {
    format!(
        "R={} Gamma={} theta0={} r0={}",
        p.domain_radius, p.circulation, p.angular_velocity, p.path_radius
    )
}

pub const ORBIT_COLUMNS: [&str; 4] = ["t", "x", "y", "psi"];
pub const SCAN_COLUMNS: [&str; 3] = ["x", "period", "energy"];

/// Orbit samples as `t,x,y,psi`.
pub fn orbit_csv<T: Scalar>(orbit: &Orbit<T>, meta: &str) -> Result<String> {
    let rows = orbit
        .samples
        .iter()
        .map(|s| Ok([s.time(), s.x, s.y, eval_hamiltonian(&orbit.params, s)?]))
        .collect::<Result<Vec<_>>>()?;
    Ok(render_csv(&ORBIT_COLUMNS, meta, rows))
}

/// Period-function samples as `x,period,energy`.
pub fn scan_csv<T: Scalar>(scan: &PeriodScan<T>, meta: &str) -> String {
    render_csv(
        &SCAN_COLUMNS,
        meta,
        scan.section_points.iter().map(|s| [s.x, s.period, s.energy]),
    )
}
