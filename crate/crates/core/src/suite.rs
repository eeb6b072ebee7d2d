//! Residual suites run against a loaded problem. Each row is one property
//! with its largest residual over seeded random samples.

use std::fmt;
use std::str::FromStr;

use crate::atiyah::ReducedSystem;
use crate::config::Problem;
use crate::error::{Error, Result};
use crate::flow::integrate_rk4;
use crate::legendre::{fh_inverse, LegendrePair};
use crate::model::{validate_structure, APoint, VStarPoint};
use crate::par::Execution;
use crate::sampling::Sampler;
use crate::tulczyjew::{
    a_map, a_map_inverse, admissibility_residual, cross_residuals, dual_map_residual, s_h_point, s_l_point,
    s_l_residual, sigma,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Structure,
    Involution,
    Tulczyjew,
    Flows,
    Poisson,
    Atiyah,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Suite> {
        Ok(match s {
            "all" => Suite::All,
            "structure" => Suite::Structure,
            "involution" => Suite::Involution,
            "tulczyjew" => Suite::Tulczyjew,
            "flows" => Suite::Flows,
            "poisson" => Suite::Poisson,
            "atiyah" => Suite::Atiyah,
            other => return Err(Error::Config(format!("unknown suite `{other}`"))),
        })
    }
}

/// One checked property.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub name: String,
    pub residual: f64,
    pub tol: f64,
    pub pass: bool,
    /// Set when the check could not be evaluated.
    pub error: Option<String>,
}

impl PropertyRow {
    fn new(name: &str, outcome: Result<f64>, tol: f64) -> Self {
        match outcome {
            Ok(r) => PropertyRow {
                name: name.into(),
                residual: r,
                tol,
                pass: r.is_finite() && r < tol,
                error: None,
            },
            Err(e) => PropertyRow {
                name: name.into(),
                residual: f64::INFINITY,
                tol,
                pass: false,
                error: Some(e.to_string()),
            },
        }
    }
}

impl fmt::Display for PropertyRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        write!(f, "{:<32} {:>12.3e} {:>10.1e} {verdict}", self.name, self.residual, self.tol)?;
        if let Some(e) = &self.error {
            write!(f, "  ({e})")?;
        }
        Ok(())
    }
}

/// Settings shared by all suites.
#[derive(Debug, Clone, Copy)]
pub struct SuiteOptions {
    pub samples: usize,
    pub seed: u64,
    pub exec: Execution,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { samples: 100, seed: 0, exec: Execution::Parallel }
    }
}

fn worst<T, F>(exec: Execution, items: &[T], f: F) -> Result<f64>
where
    T: Sync,
    F: Fn(&T) -> Result<f64> + Sync + Send,
{
    Ok(exec.try_map(items, f)?.into_iter().fold(0.0, f64::max))
}

/// Samples velocities where `L` is regular, giving up after many misses.
fn regular_velocities(problem: &Problem, sampler: &mut Sampler, count: usize) -> Result<Vec<APoint>> {
    let lag = problem.lagrangian.as_ref().expect("caller checks");
    let chart = problem.model.chart();
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        if tries > 20 * count + 100 {
            return Err(Error::Domain("too few regular sample points in the box".into()));
        }
        let a = sampler.a_point(chart);
        if lag.is_regular(&a).map(|r| r.regular).unwrap_or(false) {
            out.push(a);
        }
    }
    Ok(out)
}

pub fn structure_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let mut sampler = Sampler::new(opts.seed);
    let points = sampler.base_points(problem.model.chart(), opts.samples);
    let outcome = validate_structure(&problem.model, &points, 1e-10, opts.exec).map(|r| r.max_residual());
    vec![PropertyRow::new("structure", outcome, 1e-10)]
}

pub fn involution_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let model = &problem.model;
    let mut sampler = Sampler::new(opts.seed ^ 0x1);
    let jets: Vec<_> = (0..opts.samples).map(|_| sampler.jet_point(model.chart())).collect();
    let twice = worst(opts.exec, &jets, |j| Ok(sigma(model, &sigma(model, j)?)?.max_distance(j)));
    let dual = worst(opts.exec, &jets, |j| dual_map_residual(model, &j.x, &j.y, &j.z, &j.v));
    let phases: Vec<_> = (0..opts.samples).map(|_| sampler.phase_point(model.chart())).collect();
    let round = worst(opts.exec, &phases, |p| Ok(a_map_inverse(model, &a_map(model, p)?)?.max_distance(p)));
    vec![
        PropertyRow::new("involution.sigma_squared", twice, 1e-12),
        PropertyRow::new("involution.dual_map", dual, 1e-12),
        PropertyRow::new("tulczyjew.round_trip", round, 1e-12),
    ]
}

pub fn tulczyjew_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let Some(lag) = &problem.lagrangian else { return Vec::new() };
    let mut rows = Vec::new();
    let mut sampler = Sampler::new(opts.seed ^ 0x2);
    let points = match regular_velocities(problem, &mut sampler, opts.samples) {
        Ok(p) => p,
        Err(e) => return vec![PropertyRow::new("tulczyjew.samples", Err(e), 0.0)],
    };
    let generated = worst(opts.exec, &points, |a| s_l_residual(lag, a, &s_l_point(lag, a)?).map(|r| r.max()));
    rows.push(PropertyRow::new("tulczyjew.s_l_generated", generated, 1e-12));

    let pair = LegendrePair::new(lag.clone(), problem.newton());
    let cross = exec_pair(opts.exec, &points, |a| cross_residuals(&pair, a));
    rows.push(PropertyRow::new("tulczyjew.s_l_in_s_hl", cross.clone().map(|c| c.0), 1e-8));
    rows.push(PropertyRow::new("tulczyjew.s_hl_in_s_l", cross.map(|c| c.1), 1e-8));

    if let Some(ham) = &problem.hamiltonian {
        let given = worst(opts.exec, &points, |a| {
            let q = pair.leg(a)?;
            Ok(s_l_residual(lag, a, &s_h_point(ham, &q)?)?.max())
        });
        rows.push(PropertyRow::new("tulczyjew.s_h_in_s_l", given, 1e-8));
    }

    let admissible = (|| {
        let t0 = problem.config.integrator.t0;
        let a0 = initial_velocity(problem)?;
        let traj = integrate_rk4(lag.el_vector_field(), &a0.coords(), t0, t0 + 0.5, 1e-3)?;
        let m = problem.model.base_dim();
        let lifted = traj
            .states
            .iter()
            .map(|s| s_l_point(lag, &APoint::new(&s[..m], &s[m..])))
            .collect::<Result<Vec<_>>>()?;
        let (dx, dp) = admissibility_residual(&problem.model, &traj.times, &lifted)?;
        Ok(dx.max(dp))
    })();
    rows.push(PropertyRow::new("tulczyjew.admissible_lift", admissible, 1e-5));
    rows
}

fn exec_pair<T, F>(exec: Execution, items: &[T], f: F) -> Result<(f64, f64)>
where
    T: Sync,
    F: Fn(&T) -> Result<(f64, f64)> + Sync + Send,
{
    Ok(exec
        .try_map(items, f)?
        .into_iter()
        .fold((0.0, 0.0), |(a, b), (u, v)| (f64::max(a, u), f64::max(b, v))))
}

/// The configured initial velocity, or the box centre of the fibre.
pub fn initial_velocity(problem: &Problem) -> Result<APoint> {
    let x = problem.initial_x()?;
    let y = match problem.initial_y()? {
        Some(y) => y,
        None => problem.model.chart().fibre_box().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect(),
    };
    Ok(APoint::new(x, y))
}

pub fn flow_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let mut rows = Vec::new();
    let chart = problem.model.chart();
    if let Some(lag) = &problem.lagrangian {
        let mut sampler = Sampler::new(opts.seed ^ 0x3);
        match regular_velocities(problem, &mut sampler, opts.samples) {
            Ok(points) => {
                let cos = exec_pair(opts.exec, &points, |a| lag.cosymplectic_check(a));
                rows.push(PropertyRow::new("flows.lagrangian_reeb_kernel", cos.clone().map(|c| c.0), 1e-9));
                rows.push(PropertyRow::new("flows.lagrangian_reeb_normal", cos.map(|c| c.1), 1e-12));
                let pair = LegendrePair::new(lag.clone(), problem.newton());
                let round =
                    worst(opts.exec, &points, |a| Ok(pair.leg_inverse(&pair.leg(a)?, None)?.max_distance(a)));
                rows.push(PropertyRow::new("flows.legendre_round_trip", round, 1e-10));
                if let Some(ham) = &problem.hamiltonian {
                    let inverse = worst(opts.exec, &points, |a| {
                        let q = pair.leg(a)?;
                        let back = fh_inverse(ham, a, Some(&q.p), problem.newton())?;
                        Ok(back.max_distance(&q))
                    });
                    rows.push(PropertyRow::new("flows.fibre_derivative_inverse", inverse, 1e-10));
                }
                let commute =
                    initial_velocity(problem).and_then(|a0| pair.flow_commutation_check(&a0, 1.0, 1e-3));
                rows.push(PropertyRow::new("flows.legendre_commutes", commute, 1e-5));
            }
            Err(e) => rows.push(PropertyRow::new("flows.samples", Err(e), 0.0)),
        }
    }
    if let Some(ham) = &problem.hamiltonian {
        let mut sampler = Sampler::new(opts.seed ^ 0x4);
        let points: Vec<VStarPoint> = (0..opts.samples).map(|_| sampler.vstar_point(chart)).collect();
        let cos = exec_pair(opts.exec, &points, |q| ham.cosymplectic_check(q));
        rows.push(PropertyRow::new("flows.hamiltonian_reeb_kernel", cos.clone().map(|c| c.0), 1e-9));
        rows.push(PropertyRow::new("flows.hamiltonian_reeb_normal", cos.map(|c| c.1), 1e-12));
    }
    rows
}

pub fn poisson_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let Some(ham) = &problem.hamiltonian else { return Vec::new() };
    let mut sampler = Sampler::new(opts.seed ^ 0x5);
    let points: Vec<VStarPoint> =
        (0..opts.samples).map(|_| sampler.vstar_point(problem.model.chart())).collect();
    let routes = worst(opts.exec, &points, |q| {
        let direct = ham.hamilton_rhs(&q.coords())?;
        let mut dev = 0.0f64;
        for p0 in [-1.0, 0.0, 1.0] {
            let via = ham.poisson_rhs(&q.coords(), p0)?;
            dev = direct.iter().zip(&via).fold(dev, |acc, (u, v)| acc.max((u - v).abs()));
        }
        Ok(dev)
    });
    vec![PropertyRow::new("poisson.route_equality", routes, 1e-10)]
}

pub fn atiyah_rows(problem: &Problem, opts: SuiteOptions) -> Vec<PropertyRow> {
    let Some(spec) = &problem.atiyah else { return Vec::new() };
    let red = match ReducedSystem::new(spec.clone()) {
        Ok(r) => r,
        Err(e) => return vec![PropertyRow::new("atiyah.reduce", Err(e), 0.0)],
    };
    let chart = problem.model.chart();
    let mut rows = Vec::new();
    let mut sampler = Sampler::new(opts.seed ^ 0x6);
    let base = sampler.base_points(chart, opts.samples);
    let valid = validate_structure(&problem.model, &base, 1e-9, opts.exec).map(|r| r.max_residual());
    rows.push(PropertyRow::new("atiyah.reduced_structure", valid, 1e-9));
    if let Some(lag) = &problem.lagrangian {
        let points: Vec<APoint> = (0..opts.samples).map(|_| sampler.a_point(chart)).collect();
        let lp = worst(opts.exec, &points, |a| red.lp_residual(lag, a));
        rows.push(PropertyRow::new("atiyah.lagrange_poincare", lp, 1e-10));
    }
    if let Some(ham) = &problem.hamiltonian {
        let points: Vec<VStarPoint> = (0..opts.samples).map(|_| sampler.vstar_point(chart)).collect();
        let hp = worst(opts.exec, &points, |q| red.hp_residual(ham, q));
        rows.push(PropertyRow::new("atiyah.hamilton_poincare", hp, 1e-10));
    }
    rows
}

/// Runs `suite` and returns its rows in a fixed order.
pub fn run_suite(problem: &Problem, suite: Suite, opts: SuiteOptions) -> Vec<PropertyRow> {
    match suite {
        Suite::Structure => structure_rows(problem, opts),
        Suite::Involution => involution_rows(problem, opts),
        Suite::Tulczyjew => tulczyjew_rows(problem, opts),
        Suite::Flows => flow_rows(problem, opts),
        Suite::Poisson => poisson_rows(problem, opts),
        Suite::Atiyah => atiyah_rows(problem, opts),
        Suite::All => [
            Suite::Structure,
            Suite::Involution,
            Suite::Tulczyjew,
            Suite::Flows,
            Suite::Poisson,
            Suite::Atiyah,
        ]
        .into_iter()
        .flat_map(|s| run_suite(problem, s, opts))
        .collect(),
    }
}
