#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use affmech::atiyah::AtiyahSpec;
use affmech::config::Problem;
use affmech::model::{from_lie_algebroid, LieAlgebroid, ModelBuilder};
use affmech::{AffgebroidModel, Chart};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SHIPPED: &[&str] =
    &["oscillator", "rigid_body", "free_particle", "atiyah_flat", "atiyah_magnetic", "atiyah_so3"];

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(format!("{name}.json"))
}

pub fn load(name: &str) -> Problem {
    Problem::from_path(config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn so3_constants() -> Vec<Vec<Vec<f64>>> {
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    for (a, b, g) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
        c[a][b][g] = 1.0;
        c[b][a][g] = -1.0;
    }
    c
}

/// `[e1, e2] = e2`
pub fn affine_constants() -> Vec<Vec<Vec<f64>>> {
    let mut c = vec![vec![vec![0.0; 2]; 2]; 2];
    c[0][1][1] = 1.0;
    c[1][0][1] = -1.0;
    c
}

/// `[e1, e2] = e3`
pub fn heisenberg_constants() -> Vec<Vec<Vec<f64>>> {
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    c[0][1][2] = 1.0;
    c[1][0][2] = -1.0;
    c
}

/// so(3) as a Lie affgebroid over a single point coordinate.
pub fn so3_model() -> AffgebroidModel {
    let chart = Chart::new(&["s"], 3).unwrap();
    from_lie_algebroid(chart, &LieAlgebroid::from_constants(&["s"], &so3_constants())).unwrap()
}

/// Chart `(t, q)` with `rho0 = d/dt`, `rho1 = d/dq` and no brackets.
pub fn flat_tq() -> Arc<AffgebroidModel> {
    let chart = Chart::new(&["t", "q"], 1).unwrap();
    let model = ModelBuilder::new(chart).rho0(0, "1").unwrap().rho(0, 1, "1").unwrap().build();
    Arc::new(model)
}

/// One fibre coordinate with `C0_1^1 = c0` over a one-dimensional base.
pub fn drift_model(c0: f64) -> AffgebroidModel {
    let chart = Chart::new(&["x"], 1).unwrap();
    ModelBuilder::new(chart).rho0(0, "1").unwrap().c0(0, 0, &format!("{c0}")).unwrap().build()
}

/// Constants `c` rewritten in the basis `e'_a = P_a^d e_d`.
pub fn change_basis(c: &[Vec<Vec<f64>>], p: &DMatrix<f64>) -> Vec<Vec<Vec<f64>>> {
    let r = c.len();
    let q = p.clone().try_inverse().expect("basis change must be invertible");
    let mut out = vec![vec![vec![0.0; r]; r]; r];
    for a in 0..r {
        for b in a + 1..r {
            for g in 0..r {
                let mut v = 0.0;
                for d in 0..r {
                    for e in 0..r {
                        for f in 0..r {
                            v += p[(a, d)] * p[(b, e)] * c[d][e][f] * q[(f, g)];
                        }
                    }
                }
                out[a][b][g] = v;
                out[b][a][g] = -v;
            }
        }
    }
    out
}

fn affine_expr(rng: &mut ChaCha8Rng, vars: &[&str]) -> String {
    let mut s = format!("{:.4}", rng.gen_range(-1.0..1.0));
    for v in vars {
        s.push_str(&format!(" + ({:.4})*{v}", rng.gen_range(-1.0..1.0)));
    }
    s
}

/// A random connection on `(t, x1, x2)` with coefficients affine in the
/// base and one of so(3), aff(1) or the Heisenberg algebra in a random
/// basis. Its reduction has structure functions of degree at most two.
pub fn random_atiyah(seed: u64) -> AtiyahSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = ["t", "x1", "x2"];
    let c = match seed % 3 {
        0 => so3_constants(),
        1 => affine_constants(),
        _ => heisenberg_constants(),
    };
    let r = c.len();
    let p = DMatrix::from_fn(r, r, |i, j| {
        let d = if i == j { 1.0 } else { 0.0 };
        d + rng.gen_range(-0.4..0.4)
    });
    let c = change_basis(&c, &p);
    let k0: Vec<String> = (0..r).map(|_| affine_expr(&mut rng, &base)).collect();
    let k: Vec<Vec<String>> =
        (0..2).map(|_| (0..r).map(|_| affine_expr(&mut rng, &base)).collect()).collect();
    AtiyahSpec::parse(&base, c, &k0, &k).unwrap()
}

/// Expressions over `(x, y, z)`, all smooth on `[0.5, 1.5]^3`.
pub const CORPUS: &[&str] = &[
    "x*y*z",
    "x^2 + y^2 + z^2",
    "sin(x)*cos(y) + z",
    "exp(x*y) - z^3",
    "log(x + y)*z",
    "sqrt(x^2 + y^2 + z^2)",
    "x^y",
    "tan(x/3) + y",
    "(x - y)/(z + 1)",
    "x^3 - 2*x*y + y^2*z",
    "exp(-x^2)*sin(3*y)",
    "1/(x*y*z)",
    "cos(x + 2*y - z)^2",
    "log(x)*log(y)*log(z)",
    "abs(x - 3)*y",
    "-x^2/2 + 0.25*y^4 - z",
    "sqrt(x)*exp(y)/z",
    "pi*x - e^y",
    "(x*y + 1)^(-2)",
    "sin(x*y*z)/(1 + x^2)",
];
