//! Explicit Runge-Kutta integration of autonomous vector fields.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::par::Execution;

/// Time-stamped states plus named per-step diagnostics.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub meta: BTreeMap<String, Vec<f64>>,
}

impl Trajectory {
    fn start(t0: f64, s0: &[f64]) -> Self {
        Trajectory { times: vec![t0], states: vec![s0.to_vec()], meta: BTreeMap::new() }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &[f64] {
        self.states.last().map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn final_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(f64::NAN)
    }

    /// Column `k` of the state over time.
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.states.iter().map(|s| s[k]).collect()
    }
}

fn check_interval(t0: f64, t1: f64) -> Result<()> {
    if t0.is_finite() && t1.is_finite() && t1 > t0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("integration interval [{t0}, {t1}] must have t1 > t0")))
    }
}

fn check_finite(state: &[f64], step: usize, t: f64) -> Result<()> {
    if state.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteState { step, t })
    }
}

fn axpy(s: &[f64], h: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let mut out = s.to_vec();
    for &(c, k) in terms {
        if c == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(k) {
            *o += h * c * v;
        }
    }
    out
}

fn call<F>(f: &mut F, s: &[f64], step: usize, t: f64) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let d = f(s)?;
    if d.len() != s.len() {
        return Err(Error::Dimension(format!(
            "vector field returned {} components for a state of length {}",
            d.len(),
            s.len()
        )));
    }
    check_finite(&d, step, t)?;
    Ok(d)
}

/// Classical fixed-step RK4 on `[t0, t1]`; the last step is shortened to
/// land on `t1`.
pub fn integrate_rk4<F>(mut f: F, state0: &[f64], t0: f64, t1: f64, dt: f64) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    check_interval(t0, t1)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Domain(format!("step {dt} must be positive")));
    }
    check_finite(state0, 0, t0)?;
    let steps = (((t1 - t0) / dt) - 1e-9).ceil().max(1.0) as usize;
    let mut traj = Trajectory::start(t0, state0);
    traj.states.reserve(steps);
    traj.times.reserve(steps);
    let mut s = state0.to_vec();
    let mut t = t0;
    for k in 1..=steps {
        let t_next = if k == steps { t1 } else { t0 + k as f64 * dt };
        let h = t_next - t;
        let k1 = call(&mut f, &s, k, t)?;
        let k2 = call(&mut f, &axpy(&s, h, &[(0.5, &k1)]), k, t)?;
        let k3 = call(&mut f, &axpy(&s, h, &[(0.5, &k2)]), k, t)?;
        let k4 = call(&mut f, &axpy(&s, h, &[(1.0, &k3)]), k, t)?;
        s = axpy(&s, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]);
        t = t_next;
        check_finite(&s, k, t)?;
        traj.times.push(t);
        traj.states.push(s.clone());
    }
    Ok(traj)
}

// Dormand-Prince 5(4) tableau. The fields are autonomous, so the node
// row is not needed.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] =
    [71.0 / 57600.0, 0.0, -71.0 / 16695.0, 71.0 / 1920.0, -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0];

/// Adaptive Dormand-Prince integration. Accepted step sizes and error
/// estimates are stored in `meta` under `h` and `error`.
pub fn integrate_rk45<F>(
    mut f: F,
    state0: &[f64],
    t0: f64,
    t1: f64,
    rtol: f64,
    atol: f64,
) -> Result<Trajectory>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    check_interval(t0, t1)?;
    if !(rtol > 0.0 && atol > 0.0) {
        return Err(Error::Domain("rtol and atol must be positive".into()));
    }
    check_finite(state0, 0, t0)?;
    let span = t1 - t0;
    let h_min = 1e-14 * span;
    let dim = state0.len();
    let scale = |a: &[f64], b: &[f64], i: usize| atol + rtol * a[i].abs().max(b[i].abs());
    let rms = |v: &[f64], a: &[f64], b: &[f64]| -> f64 {
        if dim == 0 {
            return 0.0;
        }
        let sum: f64 = (0..dim).map(|i| (v[i] / scale(a, b, i)).powi(2)).sum();
        (sum / dim as f64).sqrt()
    };

    let mut traj = Trajectory::start(t0, state0);
    let mut hs = Vec::new();
    let mut errs = Vec::new();
    let mut s = state0.to_vec();
    let mut t = t0;
    let mut k1 = call(&mut f, &s, 0, t)?;

    // Starting step from the size of the state and its derivative.
    let d0 = rms(&s, &s, &s);
    let d1 = rms(&k1, &s, &s);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span.max(1.0) } else { 0.01 * d0 / d1 };
    h = h.min(span).max(h_min);

    let mut step = 0;
    while t < t1 {
        if t + h > t1 || (t1 - (t + h)) < h_min {
            h = t1 - t;
        }
        step += 1;
        let mut k = vec![k1.clone()];
        for stage in 1..7 {
            let terms: Vec<(f64, &[f64])> = (0..stage).map(|j| (A[stage][j], k[j].as_slice())).collect();
            let probe = axpy(&s, h, &terms);
            k.push(call(&mut f, &probe, step, t)?);
        }
        let terms: Vec<(f64, &[f64])> = (0..6).map(|j| (A[6][j], k[j].as_slice())).collect();
        let next = axpy(&s, h, &terms);
        let mut err_vec = vec![0.0; dim];
        for (j, kj) in k.iter().enumerate() {
            for i in 0..dim {
                err_vec[i] += h * E[j] * kj[i];
            }
        }
        let err = rms(&err_vec, &s, &next);
        if !err.is_finite() {
            return Err(Error::NonFiniteState { step, t });
        }
        if err <= 1.0 {
            t = if t1 - (t + h) < h_min { t1 } else { t + h };
            s = next;
            check_finite(&s, step, t)?;
            k1 = k.swap_remove(6);
            traj.times.push(t);
            traj.states.push(s.clone());
            hs.push(h);
            errs.push(err);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < h_min && t < t1 {
            return Err(Error::StepUnderflow { t, h });
        }
    }
    traj.meta.insert("h".into(), hs);
    traj.meta.insert("error".into(), errs);
    Ok(traj)
}

/// Integrates one trajectory per initial state. `make_field` builds a fresh
/// vector field for each run so fields with warm-start caches stay private
/// to their trajectory.
pub fn integrate_ensemble<G, F>(
    make_field: G,
    initial: &[Vec<f64>],
    t0: f64,
    t1: f64,
    dt: f64,
    exec: Execution,
) -> Vec<Result<Trajectory>>
where
    G: Fn() -> F + Sync + Send,
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    exec.map(initial, |s0| integrate_rk4(make_field(), s0, t0, t1, dt))
}

/// Derivative of sampled data in time: centered differences inside,
/// second-order one-sided stencils at the two ends. Works on non-uniform
/// grids.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    if n == 2 {
        let d = (values[1] - values[0]) / (times[1] - times[0]);
        return vec![d, d];
    }
    // Derivative at node `at` of the quadratic through nodes i, i+1, i+2.
    let three = |i: usize, at: usize| {
        let (x0, x1, x2) = (times[i], times[i + 1], times[i + 2]);
        let (y0, y1, y2) = (values[i], values[i + 1], values[i + 2]);
        let x = times[at];
        y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2))
            + y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2))
            + y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))
    };
    let mut out = Vec::with_capacity(n);
    out.push(three(0, 0));
    for i in 1..n - 1 {
        out.push(three(i - 1, i));
    }
    out.push(three(n - 3, n - 1));
    out
}
