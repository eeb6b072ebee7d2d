use nalgebra::{DMatrix, DVector};

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Relative singularity test `|det| < 1e-12 * max(1, ||m||_inf^n)`.
pub(crate) fn singular(m: &DMatrix<f64>, det: f64) -> bool {
    let scale = inf_norm(m).powi(m.nrows() as i32).max(1.0);
    det.is_nan() || det.abs() < 1e-12 * scale
}

/// LU solve with partial pivoting.
pub(crate) fn solve(m: &DMatrix<f64>, rhs: &[f64]) -> Option<Vec<f64>> {
    let b = DVector::from_column_slice(rhs);
    m.clone().lu().solve(&b).map(|x| x.as_slice().to_vec())
}

pub(crate) fn condition_number(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Adds `c * (a ∧ b)` to `m`, where `(a ∧ b)(u, v) = a(u) b(v) - a(v) b(u)`.
pub(crate) fn add_wedge(m: &mut DMatrix<f64>, c: f64, a: &[f64], b: &[f64]) {
    if c == 0.0 {
        return;
    }
    let k = m.nrows();
    for i in 0..k {
        if a[i] == 0.0 && b[i] == 0.0 {
            continue;
        }
        for j in 0..k {
            m[(i, j)] += c * (a[i] * b[j] - a[j] * b[i]);
        }
    }
}

pub(crate) fn unit(k: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; k];
    v[i] = 1.0;
    v
}
