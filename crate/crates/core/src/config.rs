//! JSON problem files. Unknown keys are rejected everywhere.
//!
//! Indices in the `c` and `structure_constants` maps are 1-based pairs
//! `"a,b"` with `a < b`; the antisymmetric partner is implied.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::atiyah::AtiyahSpec;
use crate::error::{Error, Result};
use crate::hamiltonian::HamiltonianSystem;
use crate::lagrangian::LagrangianSystem;
use crate::legendre::NewtonOptions;
use crate::model::{AffgebroidModel, Chart, ModelBuilder};
use crate::scalarfield::ScalarField;

/// An expression written either as a string or as a bare JSON number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expression {
    Number(f64),
    Text(String),
}

impl Expression {
    pub fn source(&self) -> String {
        match self {
            Expression::Number(v) => format!("{v}"),
            Expression::Text(s) => s.clone(),
        }
    }

    fn field<S: AsRef<str>>(&self, vars: &[S]) -> Result<ScalarField> {
        match self {
            Expression::Number(v) if v.is_finite() => Ok(ScalarField::constant(*v, vars)),
            Expression::Number(v) => Err(Error::Config(format!("non-finite constant {v}"))),
            Expression::Text(s) => ScalarField::parse(s, vars),
        }
    }
}

impl From<&str> for Expression {
    fn from(s: &str) -> Self {
        Expression::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartConfig {
    pub base: Vec<String>,
    pub fibre_dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fibre_names: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub momentum_names: Option<Vec<String>>,
    #[serde(rename = "box", default, skip_serializing_if = "BTreeMap::is_empty")]
    pub boxes: BTreeMap<String, [f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureConfig {
    pub rho0: Vec<Expression>,
    pub rho: Vec<Vec<Expression>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub c0: Vec<Vec<Expression>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub c: BTreeMap<String, Vec<Expression>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AtiyahConfig {
    pub algebra_dim: usize,
    #[serde(default)]
    pub structure_constants: BTreeMap<String, Vec<f64>>,
    pub k0: Vec<Expression>,
    pub k: Vec<Vec<Expression>>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rtol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atol: Option<f64>,
    #[serde(default)]
    pub t0: f64,
    pub t1: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig { method: Method::Rk4, dt: Some(1e-3), rtol: None, atol: None, t0: 0.0, t1: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewtonConfig {
    pub tol: f64,
    pub max_iter: usize,
}

/// The whole file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub chart: ChartConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<StructureConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub atiyah: Option<AtiyahConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian: Option<Expression>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<Expression>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub casimir: Option<Expression>,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub newton: Option<NewtonConfig>,
    #[serde(default)]
    pub seed: u64,
}

// serde_json messages already end with the line and column.
fn json_error(e: serde_json::Error) -> Error {
    Error::Config(e.to_string())
}

/// Parses `"a,b"` into zero-based `(a, b)` with `a < b <= n`.
fn parse_pair(key: &str, n: usize) -> Result<(usize, usize)> {
    let bad = || Error::Config(format!("index pair `{key}` must be \"a,b\" with 1 <= a < b <= {n}"));
    let (a, b) = key.split_once(',').ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || b == 0 || a >= b || b > n {
        return Err(bad());
    }
    Ok((a - 1, b - 1))
}

fn expect_len<T>(what: &str, v: &[T], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::Config(format!("{what} needs {n} entries, found {}", v.len())));
    }
    Ok(())
}

impl Config {
    pub fn from_json(text: &str) -> Result<Config> {
        let config: Config = serde_json::from_str(text).map_err(json_error)?;
        config.check_shape()?;
        Ok(config)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Config::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn check_shape(&self) -> Result<()> {
        match (&self.structure, &self.atiyah) {
            (Some(_), Some(_)) => Err(Error::Config("give either `structure` or `atiyah`, not both".into())),
            (None, None) => Err(Error::Config("missing `structure` or `atiyah`".into())),
            _ => Ok(()),
        }
    }

    pub fn chart(&self) -> Result<Chart> {
        let c = &self.chart;
        let n = c.fibre_dim;
        let fibre = c.fibre_names.clone().unwrap_or_else(|| (1..=n).map(|a| format!("y{a}")).collect());
        let momenta = c.momentum_names.clone().unwrap_or_else(|| (1..=n).map(|a| format!("p{a}")).collect());
        expect_len("fibre_names", &fibre, n)?;
        expect_len("momentum_names", &momenta, n)?;
        let mut chart = Chart::with_names(&c.base, &fibre, &momenta)?;
        for (name, [lo, hi]) in &c.boxes {
            chart.set_box(name, *lo, *hi)?;
        }
        Ok(chart)
    }

    /// The Atiyah spec of an `atiyah` config, on this chart's base.
    pub fn atiyah_spec(&self) -> Result<Option<AtiyahSpec>> {
        let Some(at) = &self.atiyah else { return Ok(None) };
        let base = &self.chart.base;
        let r = at.algebra_dim;
        let mut c = vec![vec![vec![0.0; r]; r]; r];
        for (key, values) in &at.structure_constants {
            let (a, b) = parse_pair(key, r)?;
            expect_len(&format!("structure_constants[{key}]"), values, r)?;
            for (g, v) in values.iter().enumerate() {
                c[a][b][g] = *v;
                c[b][a][g] = -*v;
            }
        }
        let m = base.len().saturating_sub(1);
        expect_len("atiyah.k0", &at.k0, r)?;
        expect_len("atiyah.k", &at.k, m)?;
        let k0 = at.k0.iter().map(|e| e.field(base)).collect::<Result<_>>()?;
        let k =
            at.k.iter()
                .map(|row| {
                    expect_len("atiyah.k row", row, r)?;
                    row.iter().map(|e| e.field(base)).collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
        Ok(Some(AtiyahSpec::new(base, c, k0, k)?))
    }

    pub fn model(&self) -> Result<AffgebroidModel> {
        let chart = self.chart()?;
        if let Some(spec) = self.atiyah_spec()? {
            return spec.reduce_on(chart);
        }
        let s = self.structure.as_ref().expect("checked shape");
        let (m, n) = (chart.base_dim(), chart.fibre_dim());
        let base = chart.base_names().to_vec();
        let mut b = ModelBuilder::new(chart);
        expect_len("structure.rho0", &s.rho0, m)?;
        for (i, e) in s.rho0.iter().enumerate() {
            b.set_rho0(i, e.field(&base)?)?;
        }
        expect_len("structure.rho", &s.rho, n)?;
        for (a, row) in s.rho.iter().enumerate() {
            expect_len("structure.rho row", row, m)?;
            for (i, e) in row.iter().enumerate() {
                b.set_rho(a, i, e.field(&base)?)?;
            }
        }
        if !s.c0.is_empty() {
            expect_len("structure.c0", &s.c0, n)?;
            for (a, row) in s.c0.iter().enumerate() {
                expect_len("structure.c0 row", row, n)?;
                for (g, e) in row.iter().enumerate() {
                    b.set_c0(a, g, e.field(&base)?)?;
                }
            }
        }
        for (key, values) in &s.c {
            let (a, bb) = parse_pair(key, n)?;
            expect_len(&format!("structure.c[{key}]"), values, n)?;
            for (g, e) in values.iter().enumerate() {
                b.set_c(a, bb, g, e.field(&base)?)?;
            }
        }
        Ok(b.build())
    }

    /// Replaces an `atiyah` block by the equivalent plain structure, with
    /// every function pretty-printed.
    pub fn expanded(&self) -> Result<Config> {
        let model = self.model()?;
        let (m, n) = (model.base_dim(), model.fibre_dim());
        let text = |f: &ScalarField| Expression::Text(f.to_string());
        let mut c = BTreeMap::new();
        for a in 0..n {
            for b in a + 1..n {
                let row: Vec<ScalarField> = (0..n).map(|g| model.c(a, b, g).expect("a != b")).collect();
                if row.iter().any(|f| !f.is_zero()) {
                    c.insert(format!("{},{}", a + 1, b + 1), row.iter().map(text).collect());
                }
            }
        }
        let structure = StructureConfig {
            rho0: (0..m).map(|i| text(model.rho0(i))).collect(),
            rho: (0..n).map(|a| (0..m).map(|i| text(model.rho(a, i))).collect()).collect(),
            c0: (0..n).map(|a| (0..n).map(|g| text(model.c0(a, g))).collect()).collect(),
            c,
        };
        Ok(Config { structure: Some(structure), atiyah: None, ..self.clone() })
    }

    pub fn newton_options(&self) -> NewtonOptions {
        self.newton.map(|n| NewtonOptions { tol: n.tol, max_iter: n.max_iter }).unwrap_or_default()
    }
}

/// A loaded config with its model and dynamics built.
#[derive(Debug, Clone)]
pub struct Problem {
    pub config: Config,
    pub model: Arc<AffgebroidModel>,
    pub atiyah: Option<AtiyahSpec>,
    pub lagrangian: Option<LagrangianSystem>,
    pub hamiltonian: Option<HamiltonianSystem>,
    /// Conserved quantity over the Hamiltonian variables.
    pub casimir: Option<ScalarField>,
}

impl Problem {
    pub fn from_config(config: Config) -> Result<Problem> {
        let model = Arc::new(config.model()?);
        let chart = model.chart().clone();
        let lvars = chart.lagrangian_vars();
        let hvars = chart.hamiltonian_vars();
        let lagrangian = config
            .lagrangian
            .as_ref()
            .map(|e| LagrangianSystem::new(model.clone(), e.field(&lvars)?))
            .transpose()?;
        let hamiltonian = config
            .hamiltonian
            .as_ref()
            .map(|e| HamiltonianSystem::new(model.clone(), e.field(&hvars)?))
            .transpose()?;
        let casimir = config.casimir.as_ref().map(|e| e.field(&hvars)).transpose()?;
        let atiyah = config.atiyah_spec()?;
        Ok(Problem { config, model, atiyah, lagrangian, hamiltonian, casimir })
    }

    pub fn from_json(text: &str) -> Result<Problem> {
        Problem::from_config(Config::from_json(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Problem> {
        Problem::from_config(Config::from_path(path)?)
    }

    pub fn newton(&self) -> NewtonOptions {
        self.config.newton_options()
    }

    pub fn seed(&self) -> u64 {
        self.config.seed
    }

    /// Initial base point; the box centre when not given.
    pub fn initial_x(&self) -> Result<Vec<f64>> {
        let chart = self.model.chart();
        match &self.config.initial.x {
            Some(x) => {
                expect_len("initial.x", x, chart.base_dim())?;
                Ok(x.clone())
            }
            None => Ok(chart.base_box().iter().map(|(lo, hi)| 0.5 * (lo + hi)).collect()),
        }
    }

    pub fn initial_y(&self) -> Result<Option<Vec<f64>>> {
        let n = self.model.fibre_dim();
        self.config.initial.y.as_ref().map(|y| expect_len("initial.y", y, n).map(|_| y.clone())).transpose()
    }

    pub fn initial_p(&self) -> Result<Option<Vec<f64>>> {
        let n = self.model.fibre_dim();
        self.config.initial.p.as_ref().map(|p| expect_len("initial.p", p, n).map(|_| p.clone())).transpose()
    }
}
