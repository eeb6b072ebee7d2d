use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use affmech::config::{Config, Method, Problem};
use affmech::flow::{integrate_rk4, integrate_rk45, Trajectory};
use affmech::legendre::LegendrePair;
use affmech::model::validate_structure;
use affmech::sampling::Sampler;
use affmech::suite::{run_suite, Suite, SuiteOptions};
use affmech::{APoint, Error, Execution};

/// Mechanics on Lie affgebroids from JSON model files.
#[derive(Parser)]
#[command(name = "affmech", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check anchor compatibility and the Jacobi identity at random points.
    Validate {
        config: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Integrate the equations of motion and write a CSV trajectory.
    Simulate {
        config: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Legendre round trip over a grid of velocities.
    Legendre {
        config: PathBuf,
        /// Comma separated `name=lo:hi:count` axes.
        #[arg(long, default_value = "")]
        grid: String,
    },
    /// Run residual suites.
    Check {
        config: PathBuf,
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Operations on connection-based models.
    Atiyah {
        #[command(subcommand)]
        action: AtiyahAction,
    },
}

#[derive(Subcommand)]
enum AtiyahAction {
    /// Write the equivalent plain structure-function config.
    Expand {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Lagrangian,
    Hamiltonian,
}

/// A failure with the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Syntax { .. }
            | Error::UnknownVariable(_)
            | Error::UnknownFunction(_)
            | Error::Dimension(_)
            | Error::Config(_) => 2,
            Error::JacobiViolation(_) => 1,
            Error::Domain(_)
            | Error::NonFiniteState { .. }
            | Error::StepUnderflow { .. }
            | Error::SingularLagrangian { .. }
            | Error::SingularHamiltonian { .. }
            | Error::NewtonDivergence { .. } => 3,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 2, message: message.into() }
}

type Outcome = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Validate { config, samples, tol, seed } => validate(&config, samples, tol, seed),
        Command::Simulate { config, mode, out } => simulate(&config, mode, out.as_deref()),
        Command::Legendre { config, grid } => legendre(&config, &grid),
        Command::Check { config, suite, samples, seed } => check(&config, &suite, samples, seed),
        Command::Atiyah { action: AtiyahAction::Expand { config, out } } => expand(&config, out.as_deref()),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
        }
        // A closed pipe (e.g. `| head`) is not an error worth reporting.
        None => match io::Write::write_all(&mut io::stdout().lock(), text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => {
                Err(usage(format!("cannot write output: {e}")))
            }
            _ => Ok(()),
        },
    }
}

fn validate(path: &Path, samples: usize, tol: f64, seed: Option<u64>) -> Outcome {
    let problem = Problem::from_path(path)?;
    let mut sampler = Sampler::new(seed.unwrap_or(problem.seed()));
    let points = sampler.base_points(problem.model.chart(), samples);
    let report = validate_structure(&problem.model, &points, tol, Execution::Parallel)?;
    println!("samples              {}", report.samples);
    println!("max anchor residual  {:.6e}", report.max_anchor);
    println!("max jacobi residual  {:.6e}", report.max_jacobi);
    if let (Some(x), Some(what), true) = (&report.worst_point, &report.worst, report.max_residual() > 0.0) {
        let coords: Vec<String> = x.iter().map(|v| format!("{v}")).collect();
        println!("worst                {what} at ({})", coords.join(", "));
    }
    let passed = report.passed();
    println!("{}", if passed { "PASS" } else { "FAIL" });
    Ok(if passed { 0 } else { 1 })
}

fn integrate<F>(config: &Config, field: F, s0: &[f64]) -> Result<Trajectory, Failure>
where
    F: FnMut(&[f64]) -> affmech::Result<Vec<f64>>,
{
    let ic = &config.integrator;
    let traj = match ic.method {
        Method::Rk4 => {
            let dt = ic.dt.ok_or_else(|| usage("integrator.dt is required for rk4"))?;
            integrate_rk4(field, s0, ic.t0, ic.t1, dt)?
        }
        Method::Rk45 => {
            let rtol = ic.rtol.unwrap_or(1e-8);
            let atol = ic.atol.unwrap_or(1e-10);
            integrate_rk45(field, s0, ic.t0, ic.t1, rtol, atol)?
        }
    };
    Ok(traj)
}

fn simulate(path: &Path, mode: Mode, out: Option<&Path>) -> Outcome {
    let problem = Problem::from_path(path)?;
    let chart = problem.model.chart();
    let m = chart.base_dim();
    let x0 = problem.initial_x()?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(chart.base_names().iter().map(|n| if n == "t" { "t_base".to_string() } else { n.clone() }));
    let (traj, energy, residual) = match mode {
        Mode::Lagrangian => {
            let lag = problem
                .lagrangian
                .as_ref()
                .ok_or_else(|| usage("config has no `lagrangian` for --mode lagrangian"))?;
            let y0 = match (problem.initial_y()?, problem.initial_p()?) {
                (Some(y), _) => y,
                (None, Some(p)) => {
                    let pair = LegendrePair::new(lag.clone(), problem.newton());
                    pair.leg_inverse(&affmech::VStarPoint::new(x0.clone(), p), None)?.y
                }
                (None, None) => return Err(usage("initial.y is required for --mode lagrangian")),
            };
            let s0 = APoint::new(x0, y0).coords();
            let traj = integrate(&problem.config, lag.el_vector_field(), &s0)?;
            let energy = traj
                .states
                .iter()
                .map(|s| lag.energy(&APoint::new(&s[..m], &s[m..])))
                .collect::<affmech::Result<Vec<_>>>()?;
            let residual = lag.el_residual(&traj.times, &traj.states)?;
            header.extend(chart.fibre_names().iter().cloned());
            header.extend(["energy".into(), "el_residual".into()]);
            (traj, energy, residual)
        }
        Mode::Hamiltonian => {
            let ham = problem
                .hamiltonian
                .as_ref()
                .ok_or_else(|| usage("config has no `hamiltonian` for --mode hamiltonian"))?;
            let p0 = match (problem.initial_p()?, problem.initial_y()?, &problem.lagrangian) {
                (Some(p), _, _) => p,
                (None, Some(y), Some(lag)) => {
                    LegendrePair::new(lag.clone(), problem.newton()).leg(&APoint::new(x0.clone(), y))?.p
                }
                _ => return Err(usage("initial.p is required for --mode hamiltonian")),
            };
            let s0 = affmech::VStarPoint::new(x0, p0).coords();
            let traj = integrate(&problem.config, ham.hamilton_vector_field(), &s0)?;
            let energy = traj
                .states
                .iter()
                .map(|s| ham.value(&affmech::VStarPoint::new(&s[..m], &s[m..])))
                .collect::<affmech::Result<Vec<_>>>()?;
            let residual = ham.hamilton_residual(&traj.times, &traj.states)?;
            header.extend(chart.momentum_names().iter().cloned());
            header.extend(["energy".into(), "hamilton_residual".into()]);
            (traj, energy, residual)
        }
    };
    let casimir = match (&problem.casimir, mode) {
        (Some(c), Mode::Hamiltonian) => {
            header.push("casimir".into());
            Some(traj.states.iter().map(|s| c.eval(s)).collect::<affmech::Result<Vec<_>>>()?)
        }
        _ => None,
    };

    let mut text = header.join(",");
    text.push('\n');
    for (k, (t, s)) in traj.times.iter().zip(&traj.states).enumerate() {
        let mut row = vec![*t];
        row.extend_from_slice(s);
        row.push(energy[k]);
        row.push(residual[k]);
        if let Some(c) = &casimir {
            row.push(c[k]);
        }
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    emit(&text, out)?;
    Ok(0)
}

/// One axis of a `--grid` argument.
struct Axis {
    slot: usize,
    values: Vec<f64>,
}

fn parse_grid(spec: &str, problem: &Problem) -> Result<Vec<Axis>, Failure> {
    let chart = problem.model.chart();
    let vars = chart.lagrangian_vars();
    let mut axes = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let bad = || usage(format!("grid axis `{part}` must be name=lo:hi:count"));
        let (name, range) = part.split_once('=').ok_or_else(bad)?;
        let name = name.trim();
        let slot = vars
            .iter()
            .position(|v| v == name)
            .ok_or_else(|| usage(format!("grid names unknown coordinate `{name}`")))?;
        let fields: Vec<&str> = range.split(':').collect();
        if fields.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = fields[0].trim().parse().map_err(|_| bad())?;
        let hi: f64 = fields[1].trim().parse().map_err(|_| bad())?;
        let count: usize = fields[2].trim().parse().map_err(|_| bad())?;
        if count == 0 || !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(bad());
        }
        let (blo, bhi) = chart.bounds(name).expect("known coordinate");
        if lo < blo || hi > bhi {
            return Err(usage(format!("grid [{lo}, {hi}] for `{name}` leaves its box [{blo}, {bhi}]")));
        }
        let values = if count == 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
        };
        axes.push(Axis { slot, values });
    }
    Ok(axes)
}

fn legendre(path: &Path, grid: &str) -> Outcome {
    let problem = Problem::from_path(path)?;
    let lag = problem.lagrangian.as_ref().ok_or_else(|| usage("config has no `lagrangian`"))?;
    let axes = parse_grid(grid, &problem)?;
    let chart = problem.model.chart();
    let m = chart.base_dim();
    let centre: Vec<f64> =
        chart.base_box().iter().chain(chart.fibre_box()).map(|(lo, hi)| 0.5 * (lo + hi)).collect();
    let pair = LegendrePair::new(lag.clone(), problem.newton());

    let mut cells = vec![centre];
    for axis in &axes {
        cells = cells
            .iter()
            .flat_map(|c| {
                axis.values.iter().map(move |v| {
                    let mut c = c.clone();
                    c[axis.slot] = *v;
                    c
                })
            })
            .collect();
    }

    let vars = chart.lagrangian_vars();
    let mut text = String::new();
    writeln!(text, "{} {:>12} {:>12} verdict", vars.join(" "), "det_W", "round_trip").unwrap();
    let mut all_converged = true;
    let mut signs = Vec::new();
    for c in &cells {
        let a = APoint::new(&c[..m], &c[m..]);
        let det = lag.is_regular(&a)?.det;
        let trip = pair.leg(&a).and_then(|q| pair.leg_inverse(&q, None));
        let coords: Vec<String> = c.iter().map(|v| format!("{v:.4}")).collect();
        match trip {
            Ok(back) => {
                let err = back.max_distance(&a);
                let ok = err < 1e-10;
                all_converged &= ok;
                signs.push(det.signum());
                let verdict = if ok { "regular" } else { "inaccurate" };
                writeln!(text, "{} {det:>12.4e} {err:>12.4e} {verdict}", coords.join(" ")).unwrap();
            }
            Err(e) => {
                all_converged = false;
                writeln!(text, "{} {det:>12.4e} {:>12} singular ({e})", coords.join(" "), "-").unwrap();
            }
        }
    }
    let constant_sign = signs.windows(2).all(|w| w[0] == w[1]) && signs.iter().all(|s| *s != 0.0);
    let hyper = all_converged && constant_sign;
    writeln!(text, "hyperregular on grid: {}", if hyper { "yes" } else { "no" }).unwrap();
    emit(&text, None)?;
    Ok(0)
}

fn check(path: &Path, suite: &str, samples: usize, seed: Option<u64>) -> Outcome {
    let suite: Suite = suite.parse()?;
    let problem = Problem::from_path(path)?;
    let opts = SuiteOptions { samples, seed: seed.unwrap_or(problem.seed()), exec: Execution::Parallel };
    let rows = run_suite(&problem, suite, opts);
    if rows.is_empty() {
        println!("no applicable properties");
        return Ok(0);
    }
    for row in &rows {
        println!("{row}");
    }
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 1 })
}

fn expand(path: &Path, out: Option<&Path>) -> Outcome {
    let config = Config::from_path(path)?;
    if config.atiyah.is_none() {
        return Err(usage("config has no `atiyah` block"));
    }
    let mut text = config.expanded()?.to_json();
    text.push('\n');
    emit(&text, out)?;
    Ok(0)
}
