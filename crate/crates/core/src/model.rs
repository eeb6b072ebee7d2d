//! Lie affgebroid models in one adapted chart.
//!
//! The bidual algebroid has the frame `{e0, e1..en}`; brackets never have
//! an `e0` component. Structure functions are `rho0[i]`, `rho[a][i]`,
//! `c0[a][g]` (bracket of `e0` with `e_a`) and `c[a][b][g]`, antisymmetric
//! in `(a, b)`.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::scalarfield::ScalarField;

/// Base coordinates, fibre coordinates and their duals, plus the box
/// random checks sample from.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    base: Vec<String>,
    fibre: Vec<String>,
    momenta: Vec<String>,
    base_box: Vec<(f64, f64)>,
    fibre_box: Vec<(f64, f64)>,
    momentum_box: Vec<(f64, f64)>,
}

pub const DEFAULT_BOX: (f64, f64) = (-1.0, 1.0);

impl Chart {
    /// Chart with fibre names `y1..yn` and momentum names `p1..pn`.
    pub fn new<S: AsRef<str>>(base: &[S], fibre_dim: usize) -> Result<Chart> {
        let fibre: Vec<String> = (1..=fibre_dim).map(|a| format!("y{a}")).collect();
        let momenta: Vec<String> = (1..=fibre_dim).map(|a| format!("p{a}")).collect();
        Self::with_names(base, &fibre, &momenta)
    }

    pub fn with_names<S: AsRef<str>, T: AsRef<str>, U: AsRef<str>>(
        base: &[S],
        fibre: &[T],
        momenta: &[U],
    ) -> Result<Chart> {
        let base: Vec<String> = base.iter().map(|s| s.as_ref().to_string()).collect();
        let fibre: Vec<String> = fibre.iter().map(|s| s.as_ref().to_string()).collect();
        let momenta: Vec<String> = momenta.iter().map(|s| s.as_ref().to_string()).collect();
        if base.is_empty() {
            return Err(Error::Config("chart needs at least one base coordinate".into()));
        }
        if fibre.is_empty() {
            return Err(Error::Config("chart needs fibre dimension at least 1".into()));
        }
        if fibre.len() != momenta.len() {
            return Err(Error::Config(format!(
                "{} fibre names but {} momentum names",
                fibre.len(),
                momenta.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in base.iter().chain(&fibre).chain(&momenta) {
            if !is_identifier(name) {
                return Err(Error::Config(format!("`{name}` is not a valid coordinate name")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Config(format!("coordinate name `{name}` is used twice")));
            }
        }
        Ok(Chart {
            base_box: vec![DEFAULT_BOX; base.len()],
            fibre_box: vec![DEFAULT_BOX; fibre.len()],
            momentum_box: vec![DEFAULT_BOX; momenta.len()],
            base,
            fibre,
            momenta,
        })
    }

    /// Sets the sampling interval of the coordinate called `name`.
    pub fn set_box(&mut self, name: &str, lo: f64, hi: f64) -> Result<()> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Config(format!("invalid interval [{lo}, {hi}] for `{name}`")));
        }
        let slot = if let Some(i) = self.base.iter().position(|v| v == name) {
            &mut self.base_box[i]
        } else if let Some(i) = self.fibre.iter().position(|v| v == name) {
            &mut self.fibre_box[i]
        } else if let Some(i) = self.momenta.iter().position(|v| v == name) {
            &mut self.momentum_box[i]
        } else {
            return Err(Error::Config(format!("box given for unknown coordinate `{name}`")));
        };
        *slot = (lo, hi);
        Ok(())
    }

    pub fn with_box(mut self, name: &str, lo: f64, hi: f64) -> Result<Chart> {
        self.set_box(name, lo, hi)?;
        Ok(self)
    }

    pub fn base_dim(&self) -> usize {
        self.base.len()
    }

    pub fn fibre_dim(&self) -> usize {
        self.fibre.len()
    }

    pub fn base_names(&self) -> &[String] {
        &self.base
    }

    pub fn fibre_names(&self) -> &[String] {
        &self.fibre
    }

    pub fn momentum_names(&self) -> &[String] {
        &self.momenta
    }

    /// `(x, y)`: the variables a Lagrangian is written in.
    pub fn lagrangian_vars(&self) -> Vec<String> {
        self.base.iter().chain(&self.fibre).cloned().collect()
    }

    /// `(x, p)`: the variables a Hamiltonian is written in.
    pub fn hamiltonian_vars(&self) -> Vec<String> {
        self.base.iter().chain(&self.momenta).cloned().collect()
    }

    pub fn base_box(&self) -> &[(f64, f64)] {
        &self.base_box
    }

    pub fn fibre_box(&self) -> &[(f64, f64)] {
        &self.fibre_box
    }

    pub fn momentum_box(&self) -> &[(f64, f64)] {
        &self.momentum_box
    }

    /// Interval of any coordinate by name.
    pub fn bounds(&self, name: &str) -> Option<(f64, f64)> {
        let find =
            |names: &[String], boxes: &[(f64, f64)]| names.iter().position(|v| v == name).map(|i| boxes[i]);
        find(&self.base, &self.base_box)
            .or_else(|| find(&self.fibre, &self.fibre_box))
            .or_else(|| find(&self.momenta, &self.momentum_box))
    }
}

fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// A point `(x, y)` of the affine bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct APoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A point `(x, p)` of the dual of the model vector bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct VStarPoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
}

/// A point `(x, y; z, v)` of the prolongation of the affine bundle over itself.
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    pub v: Vec<f64>,
}

/// A point `(x, p; z, w)` of the pull-back of `T(V*)` by the anchor.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub p: Vec<f64>,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl APoint {
    pub fn new(x: impl Into<Vec<f64>>, y: impl Into<Vec<f64>>) -> Self {
        APoint { x: x.into(), y: y.into() }
    }

    /// `(x, y)` concatenated, the layout Lagrangian fields are bound to.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn max_distance(&self, other: &APoint) -> f64 {
        dist(&[&self.x, &self.y], &[&other.x, &other.y])
    }
}

impl VStarPoint {
    pub fn new(x: impl Into<Vec<f64>>, p: impl Into<Vec<f64>>) -> Self {
        VStarPoint { x: x.into(), p: p.into() }
    }

    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.p).copied().collect()
    }

    pub fn max_distance(&self, other: &VStarPoint) -> f64 {
        dist(&[&self.x, &self.p], &[&other.x, &other.p])
    }
}

impl JetPoint {
    pub fn new(
        x: impl Into<Vec<f64>>,
        y: impl Into<Vec<f64>>,
        z: impl Into<Vec<f64>>,
        v: impl Into<Vec<f64>>,
    ) -> Self {
        JetPoint { x: x.into(), y: y.into(), z: z.into(), v: v.into() }
    }

    pub fn max_distance(&self, other: &JetPoint) -> f64 {
        dist(&[&self.x, &self.y, &self.z, &self.v], &[&other.x, &other.y, &other.z, &other.v])
    }
}

impl PhasePoint {
    pub fn new(
        x: impl Into<Vec<f64>>,
        p: impl Into<Vec<f64>>,
        z: impl Into<Vec<f64>>,
        w: impl Into<Vec<f64>>,
    ) -> Self {
        PhasePoint { x: x.into(), p: p.into(), z: z.into(), w: w.into() }
    }

    pub fn max_distance(&self, other: &PhasePoint) -> f64 {
        dist(&[&self.x, &self.p, &self.z, &self.w], &[&other.x, &other.p, &other.z, &other.w])
    }
}

fn dist(a: &[&Vec<f64>], b: &[&Vec<f64>]) -> f64 {
    a.iter().zip(b).flat_map(|(u, v)| u.iter().zip(v.iter())).fold(0.0, |acc, (s, t)| acc.max((s - t).abs()))
}

/// Structure functions of a Lie affgebroid in an adapted chart.
#[derive(Debug, Clone, PartialEq)]
pub struct AffgebroidModel {
    chart: Chart,
    rho0: Vec<ScalarField>,
    rho: Vec<Vec<ScalarField>>,
    c0: Vec<Vec<ScalarField>>,
    /// Upper triangle only: entry `pair(a, b)` with `a < b` holds the `n`
    /// components `c[a][b][..]`.
    c: Vec<Vec<ScalarField>>,
}

fn pair_index(n: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < n);
    a * n - a * (a + 1) / 2 + (b - a - 1)
}

impl AffgebroidModel {
    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn base_dim(&self) -> usize {
        self.chart.base_dim()
    }

    pub fn fibre_dim(&self) -> usize {
        self.chart.fibre_dim()
    }

    pub fn rho0(&self, i: usize) -> &ScalarField {
        &self.rho0[i]
    }

    pub fn rho(&self, a: usize, i: usize) -> &ScalarField {
        &self.rho[a][i]
    }

    pub fn c0(&self, a: usize, g: usize) -> &ScalarField {
        &self.c0[a][g]
    }

    /// `C_ab^g` as a field; `None` when `a == b` (identically zero).
    /// For `a > b` the stored field is negated.
    pub fn c(&self, a: usize, b: usize, g: usize) -> Option<ScalarField> {
        let n = self.fibre_dim();
        match a.cmp(&b) {
            std::cmp::Ordering::Less => Some(self.c[pair_index(n, a, b)][g].clone()),
            std::cmp::Ordering::Greater => Some(self.c[pair_index(n, b, a)][g].neg()),
            std::cmp::Ordering::Equal => None,
        }
    }

    /// Replaces the chart, e.g. to change the sampling box. Names and
    /// dimensions must match.
    pub fn with_chart(mut self, chart: Chart) -> Result<Self> {
        if chart.base_names() != self.chart.base_names() || chart.fibre_dim() != self.chart.fibre_dim() {
            return Err(Error::Dimension("replacement chart differs in shape".into()));
        }
        self.chart = chart;
        Ok(self)
    }

    fn fields(&self) -> impl Iterator<Item = &ScalarField> {
        self.rho0
            .iter()
            .chain(self.rho.iter().flatten())
            .chain(self.c0.iter().flatten())
            .chain(self.c.iter().flatten())
    }

    /// True when no structure function depends on the base point.
    pub fn is_constant(&self) -> bool {
        self.fields().all(|f| f.is_constant())
    }

    fn check_base(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.base_dim() {
            return Err(Error::Dimension(format!(
                "base point of length {} for a chart with {} base coordinates",
                x.len(),
                self.base_dim()
            )));
        }
        Ok(())
    }

    /// All structure functions evaluated at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<StructureValues> {
        self.check_base(x)?;
        let (m, n) = (self.base_dim(), self.fibre_dim());
        let mut sv = StructureValues::zeros(m, n);
        for i in 0..m {
            sv.rho0[i] = self.rho0[i].eval(x)?;
        }
        for a in 0..n {
            for i in 0..m {
                sv.rho[a * m + i] = self.rho[a][i].eval(x)?;
            }
            for g in 0..n {
                sv.c0[a * n + g] = self.c0[a][g].eval(x)?;
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for g in 0..n {
                    let v = self.c[pair_index(n, a, b)][g].eval(x)?;
                    sv.c[(a * n + b) * n + g] = v;
                    sv.c[(b * n + a) * n + g] = -v;
                }
            }
        }
        Ok(sv)
    }

    /// Values and base-coordinate gradients of every structure function.
    pub fn eval_jet(&self, x: &[f64]) -> Result<StructureJet> {
        self.check_base(x)?;
        let (m, n) = (self.base_dim(), self.fibre_dim());
        let all: Vec<usize> = (0..m).collect();
        let mut jet = StructureJet {
            values: StructureValues::zeros(m, n),
            d_rho0: vec![0.0; m * m],
            d_rho: vec![0.0; n * m * m],
            d_c0: vec![0.0; n * n * m],
            d_c: vec![0.0; n * n * n * m],
        };
        let grad = |f: &ScalarField| -> Result<(f64, Vec<f64>)> {
            if f.is_constant() {
                return Ok((f.eval(x)?, vec![0.0; m]));
            }
            let d = f.eval_grad(x, &all)?;
            Ok((d.value, d.grad))
        };
        for i in 0..m {
            let (v, g) = grad(&self.rho0[i])?;
            jet.values.rho0[i] = v;
            jet.d_rho0[i * m..(i + 1) * m].copy_from_slice(&g);
        }
        for a in 0..n {
            for i in 0..m {
                let (v, g) = grad(&self.rho[a][i])?;
                jet.values.rho[a * m + i] = v;
                let k = (a * m + i) * m;
                jet.d_rho[k..k + m].copy_from_slice(&g);
            }
            for gm in 0..n {
                let (v, g) = grad(&self.c0[a][gm])?;
                jet.values.c0[a * n + gm] = v;
                let k = (a * n + gm) * m;
                jet.d_c0[k..k + m].copy_from_slice(&g);
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for gm in 0..n {
                    let (v, g) = grad(&self.c[pair_index(n, a, b)][gm])?;
                    jet.values.c[(a * n + b) * n + gm] = v;
                    jet.values.c[(b * n + a) * n + gm] = -v;
                    let k1 = ((a * n + b) * n + gm) * m;
                    let k2 = ((b * n + a) * n + gm) * m;
                    for j in 0..m {
                        jet.d_c[k1 + j] = g[j];
                        jet.d_c[k2 + j] = -g[j];
                    }
                }
            }
        }
        Ok(jet)
    }
}

/// Assembles a model entry by entry. Unset entries are zero.
#[derive(Debug, Clone)]
pub struct ModelBuilder {
    model: AffgebroidModel,
}

impl ModelBuilder {
    pub fn new(chart: Chart) -> Self {
        let (m, n) = (chart.base_dim(), chart.fibre_dim());
        let zero = ScalarField::zero(chart.base_names());
        let model = AffgebroidModel {
            rho0: vec![zero.clone(); m],
            rho: vec![vec![zero.clone(); m]; n],
            c0: vec![vec![zero.clone(); n]; n],
            c: vec![vec![zero; n]; n * n.saturating_sub(1) / 2],
            chart,
        };
        ModelBuilder { model }
    }

    pub fn chart(&self) -> &Chart {
        &self.model.chart
    }

    /// Parses `src` as a function of the base coordinates.
    pub fn field(&self, src: &str) -> Result<ScalarField> {
        ScalarField::parse(src, self.model.chart.base_names())
    }

    fn bind(&self, f: ScalarField) -> Result<ScalarField> {
        if f.vars() == self.model.chart.base_names() {
            Ok(f)
        } else {
            f.rebind(self.model.chart.base_names())
        }
    }

    fn check(&self, idx: &[(usize, usize)]) -> Result<()> {
        for &(i, bound) in idx {
            if i >= bound {
                return Err(Error::Dimension(format!("index {} out of range 1..={bound}", i + 1)));
            }
        }
        Ok(())
    }

    pub fn set_rho0(&mut self, i: usize, f: ScalarField) -> Result<()> {
        self.check(&[(i, self.model.base_dim())])?;
        self.model.rho0[i] = self.bind(f)?;
        Ok(())
    }

    pub fn set_rho(&mut self, a: usize, i: usize, f: ScalarField) -> Result<()> {
        self.check(&[(a, self.model.fibre_dim()), (i, self.model.base_dim())])?;
        self.model.rho[a][i] = self.bind(f)?;
        Ok(())
    }

    pub fn set_c0(&mut self, a: usize, g: usize, f: ScalarField) -> Result<()> {
        let n = self.model.fibre_dim();
        self.check(&[(a, n), (g, n)])?;
        self.model.c0[a][g] = self.bind(f)?;
        Ok(())
    }

    /// Sets `C_ab^g`; with `a > b` the negation is stored at `(b, a)`.
    pub fn set_c(&mut self, a: usize, b: usize, g: usize, f: ScalarField) -> Result<()> {
        let n = self.model.fibre_dim();
        self.check(&[(a, n), (b, n), (g, n)])?;
        if a == b {
            if f.is_zero() {
                return Ok(());
            }
            return Err(Error::Config(format!(
                "C with equal lower indices ({}, {}) must vanish",
                a + 1,
                b + 1
            )));
        }
        let f = self.bind(f)?;
        let (k, f) = if a < b { (pair_index(n, a, b), f) } else { (pair_index(n, b, a), f.neg()) };
        self.model.c[k][g] = f;
        Ok(())
    }

    pub fn rho0(mut self, i: usize, src: &str) -> Result<Self> {
        let f = self.field(src)?;
        self.set_rho0(i, f)?;
        Ok(self)
    }

    pub fn rho(mut self, a: usize, i: usize, src: &str) -> Result<Self> {
        let f = self.field(src)?;
        self.set_rho(a, i, f)?;
        Ok(self)
    }

    pub fn c0(mut self, a: usize, g: usize, src: &str) -> Result<Self> {
        let f = self.field(src)?;
        self.set_c0(a, g, f)?;
        Ok(self)
    }

    pub fn c(mut self, a: usize, b: usize, g: usize, src: &str) -> Result<Self> {
        let f = self.field(src)?;
        self.set_c(a, b, g, f)?;
        Ok(self)
    }

    pub fn build(self) -> AffgebroidModel {
        self.model
    }
}

/// Lie algebroid data: anchors `rho[a][i]` and brackets `C_ab^g`, given as
/// `(a, b, g, field)` entries with zero-based indices.
#[derive(Debug, Clone)]
pub struct LieAlgebroid {
    pub anchors: Vec<Vec<ScalarField>>,
    pub brackets: Vec<(usize, usize, usize, ScalarField)>,
}

impl LieAlgebroid {
    /// A Lie algebra with constant structure constants `c[a][b][g]`.
    pub fn from_constants<S: AsRef<str>>(base: &[S], c: &[Vec<Vec<f64>>]) -> Self {
        let n = c.len();
        let zero = ScalarField::zero(base);
        let mut brackets = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for g in 0..n {
                    if c[a][b][g] != 0.0 {
                        brackets.push((a, b, g, ScalarField::constant(c[a][b][g], base)));
                    }
                }
            }
        }
        LieAlgebroid { anchors: vec![vec![zero; base.len()]; n], brackets }
    }
}

/// Views a Lie algebroid as a Lie affgebroid: `e0` is central and has
/// zero anchor.
pub fn from_lie_algebroid(chart: Chart, data: &LieAlgebroid) -> Result<AffgebroidModel> {
    let (m, n) = (chart.base_dim(), chart.fibre_dim());
    if data.anchors.len() != n || data.anchors.iter().any(|row| row.len() != m) {
        return Err(Error::Dimension(format!("anchor data must be {n} rows of {m} components")));
    }
    let mut b = ModelBuilder::new(chart);
    for (a, row) in data.anchors.iter().enumerate() {
        for (i, f) in row.iter().enumerate() {
            b.set_rho(a, i, f.clone())?;
        }
    }
    for (a, bb, g, f) in &data.brackets {
        b.set_c(*a, *bb, *g, f.clone())?;
    }
    Ok(b.build())
}

/// Numerical values of all structure functions at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureValues {
    m: usize,
    n: usize,
    rho0: Vec<f64>,
    rho: Vec<f64>,
    c0: Vec<f64>,
    c: Vec<f64>,
}

impl StructureValues {
    fn zeros(m: usize, n: usize) -> Self {
        StructureValues {
            m,
            n,
            rho0: vec![0.0; m],
            rho: vec![0.0; n * m],
            c0: vec![0.0; n * n],
            c: vec![0.0; n * n * n],
        }
    }

    pub fn base_dim(&self) -> usize {
        self.m
    }

    pub fn fibre_dim(&self) -> usize {
        self.n
    }

    pub fn rho0(&self, i: usize) -> f64 {
        self.rho0[i]
    }

    pub fn rho(&self, a: usize, i: usize) -> f64 {
        self.rho[a * self.m + i]
    }

    pub fn c0(&self, a: usize, g: usize) -> f64 {
        self.c0[a * self.n + g]
    }

    pub fn c(&self, a: usize, b: usize, g: usize) -> f64 {
        self.c[(a * self.n + b) * self.n + g]
    }

    /// `rho0 * s + sum_a rho_a * y^a`, the base velocity of an anchored vector.
    pub fn anchor(&self, s: f64, y: &[f64]) -> Vec<f64> {
        (0..self.m)
            .map(|i| s * self.rho0(i) + (0..self.n).map(|a| self.rho(a, i) * y[a]).sum::<f64>())
            .collect()
    }

    /// `sum_i rho_a^i df_i` for each `a`.
    pub fn anchor_dual(&self, df: &[f64]) -> Vec<f64> {
        (0..self.n).map(|a| (0..self.m).map(|i| self.rho(a, i) * df[i]).sum()).collect()
    }
}

/// Structure values with their base gradients; gradient arrays carry the
/// derivative index last.
#[derive(Debug, Clone)]
pub struct StructureJet {
    pub values: StructureValues,
    d_rho0: Vec<f64>,
    d_rho: Vec<f64>,
    d_c0: Vec<f64>,
    d_c: Vec<f64>,
}

impl StructureJet {
    fn m(&self) -> usize {
        self.values.m
    }

    fn n(&self) -> usize {
        self.values.n
    }

    /// Anchor of the bidual frame element `I` (0 is `e0`).
    pub fn rho_b(&self, big_i: usize, i: usize) -> f64 {
        if big_i == 0 {
            self.values.rho0(i)
        } else {
            self.values.rho(big_i - 1, i)
        }
    }

    pub fn d_rho_b(&self, big_i: usize, i: usize, j: usize) -> f64 {
        let m = self.m();
        if big_i == 0 {
            self.d_rho0[i * m + j]
        } else {
            self.d_rho[((big_i - 1) * m + i) * m + j]
        }
    }

    /// Bidual structure function `C_IJ^K`; the `e0` component of every
    /// bracket is zero.
    pub fn c_b(&self, i: usize, j: usize, k: usize) -> f64 {
        if k == 0 || i == j {
            return 0.0;
        }
        let v = &self.values;
        match (i, j) {
            (0, j) => v.c0(j - 1, k - 1),
            (i, 0) => -v.c0(i - 1, k - 1),
            (i, j) => v.c(i - 1, j - 1, k - 1),
        }
    }

    pub fn d_c_b(&self, i: usize, j: usize, k: usize, d: usize) -> f64 {
        if k == 0 || i == j {
            return 0.0;
        }
        let (m, n) = (self.m(), self.n());
        match (i, j) {
            (0, j) => self.d_c0[((j - 1) * n + (k - 1)) * m + d],
            (i, 0) => -self.d_c0[((i - 1) * n + (k - 1)) * m + d],
            (i, j) => self.d_c[(((i - 1) * n + (j - 1)) * n + (k - 1)) * m + d],
        }
    }
}

/// Outcome of [`validate_structure`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub samples: usize,
    pub tol: f64,
    pub max_anchor: f64,
    pub max_jacobi: f64,
    /// Base point and description of the largest residual seen.
    pub worst_point: Option<Vec<f64>>,
    pub worst: Option<String>,
}

impl ValidationReport {
    pub fn max_residual(&self) -> f64 {
        self.max_anchor.max(self.max_jacobi)
    }

    pub fn passed(&self) -> bool {
        self.max_residual() <= self.tol
    }
}

/// Largest residual at one point with a label.
#[derive(Debug, Clone)]
struct PointResidual {
    anchor: f64,
    jacobi: f64,
    worst: String,
    worst_value: f64,
}

fn residuals_at(model: &AffgebroidModel, x: &[f64]) -> Result<PointResidual> {
    let jet = model.eval_jet(x)?;
    let (m, n) = (model.base_dim(), model.fibre_dim());
    let rank = n + 1;
    let mut out = PointResidual { anchor: 0.0, jacobi: 0.0, worst: String::new(), worst_value: -1.0 };
    for bi in 0..rank {
        for bj in bi + 1..rank {
            for j in 0..m {
                let mut r = 0.0;
                for i in 0..m {
                    r += jet.rho_b(bi, i) * jet.d_rho_b(bj, j, i) - jet.rho_b(bj, i) * jet.d_rho_b(bi, j, i);
                }
                for bk in 0..rank {
                    r -= jet.c_b(bi, bj, bk) * jet.rho_b(bk, j);
                }
                let r = r.abs();
                out.anchor = out.anchor.max(r);
                if r > out.worst_value {
                    out.worst_value = r;
                    out.worst = format!("anchor (I,J)=({bi},{bj}) j={}", j + 1);
                }
            }
        }
    }
    for bi in 0..rank {
        for bj in bi + 1..rank {
            for bk in bj + 1..rank {
                for l in 0..rank {
                    let mut r = 0.0;
                    for (a, b, c) in [(bi, bj, bk), (bj, bk, bi), (bk, bi, bj)] {
                        for i in 0..m {
                            r += jet.rho_b(a, i) * jet.d_c_b(b, c, l, i);
                        }
                        for mm in 0..rank {
                            r += jet.c_b(b, c, mm) * jet.c_b(a, mm, l);
                        }
                    }
                    let r = r.abs();
                    out.jacobi = out.jacobi.max(r);
                    if r > out.worst_value {
                        out.worst_value = r;
                        out.worst = format!("jacobi (I,J,K)=({bi},{bj},{bk}) L={l}");
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Checks anchor compatibility and the Jacobi identity of the bidual
/// algebroid at each sample point. Derivatives come from forward-mode AD.
pub fn validate_structure(
    model: &AffgebroidModel,
    points: &[Vec<f64>],
    tol: f64,
    exec: Execution,
) -> Result<ValidationReport> {
    let per_point = exec.try_map(points, |x| residuals_at(model, x))?;
    let mut report = ValidationReport {
        samples: points.len(),
        tol,
        max_anchor: 0.0,
        max_jacobi: 0.0,
        worst_point: None,
        worst: None,
    };
    let mut worst_value = -1.0;
    for (x, r) in points.iter().zip(&per_point) {
        report.max_anchor = report.max_anchor.max(r.anchor);
        report.max_jacobi = report.max_jacobi.max(r.jacobi);
        if r.worst_value > worst_value {
            worst_value = r.worst_value;
            report.worst_point = Some(x.clone());
            report.worst = Some(r.worst.clone());
        }
    }
    Ok(report)
}
