//! Adaptive explicit Runge–Kutta integration (Dormand–Prince 8(5,3)) with a
//! 7th-order continuous extension for event location and resampling.
//!
//! The state is a fixed-size array so that the same code serves the planar
//! flows (`N = 2`) and augmented systems without heap traffic per stage.

mod tableau;

use crate::error::{Error, Result};
use crate::roots::brent;
use crate::scalar::Scalar;

const N_STAGES: usize = 12;
const N_EXTENDED: usize = 16;
const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Step-size control settings.
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions<T> {
    pub rtol: T,
    pub atol: T,
    pub max_step: T,
    pub max_steps: usize,
}

impl<T: Scalar> OdeOptions<T> {
    pub fn new(rtol: T, atol: T) -> Self {
        Self {
            rtol,
            atol,
            max_step: T::infinity(),
            max_steps: 2_000_000,
        }
    }

    pub fn with_max_step(mut self, max_step: T) -> Self {
        self.max_step = max_step;
        self
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }
}

struct Tableau<T> {
    c: [T; N_EXTENDED],
    a: [[T; N_EXTENDED]; N_EXTENDED],
    b: [T; N_STAGES],
    e3: [T; N_STAGES + 1],
    e5: [T; N_STAGES + 1],
    d: [[T; N_EXTENDED]; 4],
}

impl<T: Scalar> Tableau<T> {
    fn new() -> Self {
        let conv = |v: f64| T::lit(v);
        Self {
            c: tableau::C.map(conv),
            a: tableau::A.map(|row| row.map(conv)),
            b: tableau::B.map(conv),
            e3: tableau::E3.map(conv),
            e5: tableau::E5.map(conv),
            d: tableau::D.map(|row| row.map(conv)),
        }
    }
}

/// Polynomial interpolant over the most recent accepted step.
#[derive(Clone, Debug)]
pub struct DenseStep<T, const N: usize> {
    pub t_old: T,
    pub t: T,
    y_old: [T; N],
    coeffs: [[T; N]; 7],
}

impl<T: Scalar, const N: usize> DenseStep<T, N> {
    /// Evaluates the interpolant; `t` is expected in `[t_old, t]`.
    pub fn eval(&self, t: T) -> [T; N] {
        let h = self.t - self.t_old;
        let x = (t - self.t_old) / h;
        let one_minus = T::one() - x;
        let mut y = [T::zero(); N];
        for (i, f) in self.coeffs.iter().rev().enumerate() {
            for k in 0..N {
                y[k] = y[k] + f[k];
                y[k] = y[k] * if i % 2 == 0 { x } else { one_minus };
            }
        }
        for k in 0..N {
            y[k] = y[k] + self.y_old[k];
        }
        y
    }
}

/// Stepper for `y' = f(t, y)` from `t0` towards `t_bound` (either direction).
pub struct Solver<T, F, const N: usize>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    rhs: F,
    tab: Tableau<T>,
    opts: OdeOptions<T>,
    t: T,
    y: [T; N],
    f: [T; N],
    t_old: T,
    y_old: [T; N],
    h_prev: T,
    h_abs: T,
    direction: T,
    t_bound: T,
    k: [[T; N]; N_EXTENDED],
    extra_ready: bool,
    steps: usize,
    pub nfev: usize,
}

impl<T, F, const N: usize> Solver<T, F, N>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    pub fn new(mut rhs: F, t0: T, y0: [T; N], t_bound: T, opts: OdeOptions<T>) -> Result<Self> {
        let f0 = rhs(t0, &y0)?;
        let direction = if t_bound >= t0 { T::one() } else { -T::one() };
        let mut solver = Self {
            rhs,
            tab: Tableau::new(),
            opts,
            t: t0,
            y: y0,
            f: f0,
            t_old: t0,
            y_old: y0,
            h_prev: T::zero(),
            h_abs: T::zero(),
            direction,
            t_bound,
            k: [[T::zero(); N]; N_EXTENDED],
            extra_ready: false,
            steps: 0,
            nfev: 1,
        };
        solver.h_abs = solver.initial_step()?;
        Ok(solver)
    }

    pub fn t(&self) -> T {
        self.t
    }

    pub fn y(&self) -> &[T; N] {
        &self.y
    }

    pub fn finished(&self) -> bool {
        self.t == self.t_bound
    }

    fn scale(&self, y: &[T; N], k: usize) -> T {
        self.opts.atol + y[k].abs() * self.opts.rtol
    }

    fn rms(v: &[T; N]) -> T {
        let s = v.iter().fold(T::zero(), |acc, &x| acc + x * x);
        (s / T::count(N)).sqrt()
    }

    // Hairer, Nørsett & Wanner's starting-step heuristic.
    fn initial_step(&mut self) -> Result<T> {
        let span = (self.t_bound - self.t).abs();
        if span == T::zero() {
            return Ok(T::zero());
        }
        let mut d0 = [T::zero(); N];
        let mut d1 = [T::zero(); N];
        for k in 0..N {
            let sc = self.scale(&self.y, k);
            d0[k] = self.y[k] / sc;
            d1[k] = self.f[k] / sc;
        }
        let (d0, d1) = (Self::rms(&d0), Self::rms(&d1));
        let small = T::lit(1e-5);
        let mut h0 = if d0 < small || d1 < small {
            T::lit(1e-6)
        } else {
            T::lit(0.01) * d0 / d1
        };
        h0 = h0.min(span);
        let mut y1 = self.y;
        for k in 0..N {
            y1[k] = y1[k] + h0 * self.direction * self.f[k];
        }
        let f1 = (self.rhs)(self.t + h0 * self.direction, &y1)?;
        self.nfev += 1;
        let mut d2 = [T::zero(); N];
        for k in 0..N {
            d2[k] = (f1[k] - self.f[k]) / self.scale(&self.y, k);
        }
        let d2 = Self::rms(&d2) / h0;
        let tiny = T::lit(1e-15);
        let h1 = if d1 <= tiny && d2 <= tiny {
            (h0 * T::lit(1e-3)).max(T::lit(1e-6))
        } else {
            (T::lit(0.01) / d1.max(d2)).powf(T::one() / T::lit(8.0))
        };
        Ok((T::lit(100.0) * h0).min(h1).min(span).min(self.opts.max_step))
    }

    fn stage_sum(&self, s: usize, h: T) -> [T; N] {
        let mut y = self.y;
        for (j, kj) in self.k.iter().enumerate().take(s) {
            let a = self.tab.a[s][j];
            if a != T::zero() {
                for i in 0..N {
                    y[i] = y[i] + h * a * kj[i];
                }
            }
        }
        y
    }

    /// Advances one accepted step, shrinking the step on rejection.
    pub fn step(&mut self) -> Result<()> {
        if self.finished() {
            return Ok(());
        }
        if self.steps >= self.opts.max_steps {
            return Err(Error::StepFailure {
                t: self.t.as_f64(),
                reason: format!("step budget of {} exhausted", self.opts.max_steps),
            });
        }
        let min_step = T::lit(10.0) * T::epsilon() * self.t.abs().max(T::min_positive_value());
        let mut h_abs = self.h_abs.min(self.opts.max_step).max(min_step);
        let mut rejected = false;
        let exponent = -T::one() / T::lit(8.0);
        loop {
            if h_abs < min_step {
                return Err(Error::StepFailure {
                    t: self.t.as_f64(),
                    reason: "step size underflow".into(),
                });
            }
            let mut t_new = self.t + h_abs * self.direction;
            if self.direction * (t_new - self.t_bound) > T::zero() {
                t_new = self.t_bound;
            }
            let h = t_new - self.t;
            h_abs = h.abs();

            self.k[0] = self.f;
            for s in 1..N_STAGES {
                let ys = self.stage_sum(s, h);
                self.k[s] = (self.rhs)(self.t + self.tab.c[s] * h, &ys)?;
            }
            let mut y_new = self.y;
            for (s, ks) in self.k.iter().enumerate().take(N_STAGES) {
                for i in 0..N {
                    y_new[i] = y_new[i] + h * self.tab.b[s] * ks[i];
                }
            }
            let f_new = (self.rhs)(t_new, &y_new)?;
            self.k[N_STAGES] = f_new;
            self.nfev += N_STAGES;

            let mut err5 = [T::zero(); N];
            let mut err3 = [T::zero(); N];
            for i in 0..N {
                let sc = self.opts.atol + self.y[i].abs().max(y_new[i].abs()) * self.opts.rtol;
                let (mut s5, mut s3) = (T::zero(), T::zero());
                for s in 0..=N_STAGES {
                    s5 = s5 + self.tab.e5[s] * self.k[s][i];
                    s3 = s3 + self.tab.e3[s] * self.k[s][i];
                }
                err5[i] = s5 / sc;
                err3[i] = s3 / sc;
            }
            let n5 = err5.iter().fold(T::zero(), |a, &x| a + x * x);
            let n3 = err3.iter().fold(T::zero(), |a, &x| a + x * x);
            let err = if n5 == T::zero() && n3 == T::zero() {
                T::zero()
            } else {
                h_abs * n5 / ((n5 + T::lit(0.01) * n3) * T::count(N)).sqrt()
            };
            if !err.is_finite() {
                h_abs = h_abs * T::lit(MIN_FACTOR);
                rejected = true;
                continue;
            }

            if err < T::one() {
                let mut factor = if err == T::zero() {
                    T::lit(MAX_FACTOR)
                } else {
                    T::lit(MAX_FACTOR).min(T::lit(SAFETY) * err.powf(exponent))
                };
                if rejected {
                    factor = factor.min(T::one());
                }
                self.h_prev = h;
                self.t_old = self.t;
                self.y_old = self.y;
                self.t = t_new;
                self.y = y_new;
                self.f = f_new;
                self.h_abs = h_abs * factor;
                self.extra_ready = false;
                self.steps += 1;
                return Ok(());
            }
            h_abs = h_abs * T::lit(MIN_FACTOR).max(T::lit(SAFETY) * err.powf(exponent));
            rejected = true;
        }
    }

    /// Interpolant for the last accepted step (costs three extra evaluations
    /// the first time it is requested per step).
    pub fn dense(&mut self) -> Result<DenseStep<T, N>> {
        let h = self.h_prev;
        if !self.extra_ready {
            for s in (N_STAGES + 1)..N_EXTENDED {
                let mut ys = self.y_old;
                for j in 0..s {
                    let a = self.tab.a[s][j];
                    if a != T::zero() {
                        for i in 0..N {
                            ys[i] = ys[i] + h * a * self.k[j][i];
                        }
                    }
                }
                self.k[s] = (self.rhs)(self.t_old + self.tab.c[s] * h, &ys)?;
            }
            self.nfev += N_EXTENDED - N_STAGES - 1;
            self.extra_ready = true;
        }
        let mut coeffs = [[T::zero(); N]; 7];
        for i in 0..N {
            let dy = self.y[i] - self.y_old[i];
            let f_old = self.k[0][i];
            coeffs[0][i] = dy;
            coeffs[1][i] = h * f_old - dy;
            coeffs[2][i] = T::lit(2.0) * dy - h * (self.f[i] + f_old);
            for (r, drow) in self.tab.d.iter().enumerate() {
                let mut acc = T::zero();
                for (s, ks) in self.k.iter().enumerate() {
                    acc = acc + drow[s] * ks[i];
                }
                coeffs[3 + r][i] = h * acc;
            }
        }
        Ok(DenseStep {
            t_old: self.t_old,
            t: self.t,
            y_old: self.y_old,
            coeffs,
        })
    }
}

/// Integrates from `t0` to `t1` and returns the final state.
pub fn solve_to<T, F, const N: usize>(rhs: F, t0: T, y0: [T; N], t1: T, opts: OdeOptions<T>) -> Result<[T; N]>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let mut solver = Solver::new(rhs, t0, y0, t1, opts)?;
    while !solver.finished() {
        solver.step()?;
    }
    Ok(*solver.y())
}

/// Samples the solution on `times` (monotone in the integration direction,
/// within `[t0, t1]`) using the continuous extension.
pub fn solve_dense<T, F, const N: usize>(
    rhs: F,
    t0: T,
    y0: [T; N],
    times: &[T],
    opts: OdeOptions<T>,
) -> Result<Vec<[T; N]>>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> Result<[T; N]>,
{
    let Some(&t1) = times.last() else {
        return Ok(Vec::new());
    };
    let mut out = Vec::with_capacity(times.len());
    let mut idx = 0;
    while idx < times.len() && times[idx] == t0 {
        out.push(y0);
        idx += 1;
    }
    if idx == times.len() {
        return Ok(out);
    }
    let mut solver = Solver::new(rhs, t0, y0, t1, opts)?;
    let dir = if t1 >= t0 { T::one() } else { -T::one() };
    while idx < times.len() {
        solver.step()?;
        if dir * (times[idx] - solver.t()) > T::zero() {
            continue;
        }
        let dense = solver.dense()?;
        while idx < times.len() && dir * (times[idx] - solver.t()) <= T::zero() {
            out.push(if times[idx] == solver.t() {
                *solver.y()
            } else {
                dense.eval(times[idx])
            });
            idx += 1;
        }
    }
    Ok(out)
}

/// Locates a sign change of `g` along the interpolant inside one step.
pub fn locate_event<T, G, const N: usize>(dense: &DenseStep<T, N>, mut g: G) -> Option<T>
where
    T: Scalar,
    G: FnMut(T, &[T; N]) -> T,
{
    let (a, b) = (dense.t_old, dense.t);
    let tol = T::lit(4.0) * T::epsilon() * a.abs().max(b.abs()).max(T::one());
    brent(|t| g(t, &dense.eval(t)), a, b, tol, 200)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(_t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
        Ok([y[1], -y[0]])
    }

    #[test]
    fn harmonic_oscillator_is_accurate_over_many_periods() {
        let tau = std::f64::consts::TAU;
        let y = solve_to(harmonic, 0.0, [1.0, 0.0], 10.0 * tau, OdeOptions::new(1e-12, 1e-12)).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-9, "{y:?}");
        assert!(y[1].abs() < 1e-9, "{y:?}");
    }

    #[test]
    fn backward_integration_inverts_forward() {
        let opts = OdeOptions::new(1e-12, 1e-12);
        let fwd = solve_to(harmonic, 0.0, [0.3, -0.7], 3.7, opts).unwrap();
        let back = solve_to(harmonic, 3.7, fwd, 0.0, opts).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-10 && (back[1] + 0.7).abs() < 1e-10);
    }

    #[test]
    fn dense_output_matches_exact_solution_inside_steps() {
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.05).collect();
        let ys = solve_dense(harmonic, 0.0, [1.0, 0.0], &times, OdeOptions::new(1e-11, 1e-11)).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-9, "t={t}");
            assert!((y[1] + t.sin()).abs() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn event_location_finds_quarter_period() {
        let mut solver = Solver::new(harmonic, 0.0, [1.0, 0.0], 3.0, OdeOptions::new(1e-12, 1e-12)).unwrap();
        let mut found = None;
        while !solver.finished() && found.is_none() {
            let prev = solver.y()[0];
            solver.step().unwrap();
            if prev > 0.0 && solver.y()[0] <= 0.0 {
                let dense = solver.dense().unwrap();
                found = locate_event(&dense, |_, y| y[0]);
            }
        }
        assert!((found.unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn works_in_single_precision() {
        let y = solve_to(
            |_t: f32, y: &[f32; 2]| Ok([y[1], -y[0]]),
            0.0f32,
            [1.0, 0.0],
            std::f32::consts::TAU,
            OdeOptions::new(1e-6, 1e-6),
        )
        .unwrap();
        assert!((y[0] - 1.0).abs() < 1e-4);
    }

    #[test]
    fn rhs_errors_propagate() {
        let r = solve_to(
            |t: f64, _y: &[f64; 1]| {
                if t > 0.5 {
                    Err(Error::MissingTimeTag)
                } else {
                    Ok([1.0])
                }
            },
            0.0,
            [0.0],
            1.0,
            OdeOptions::new(1e-8, 1e-8),
        );
        assert!(r.is_err());
    }
}
