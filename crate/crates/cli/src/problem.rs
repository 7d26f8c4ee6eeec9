//! Problem files: a TOML document with `n`, an optional alias map, the system,
//! operators, symmetries, search bounds and golden expectations.

use std::collections::BTreeMap;

use hhokit_core::covering::EvolutionSystem;
use hhokit_core::geometry::{Connection, Matrix, Metric, NonlocalTail, SecondOrderData, ThirdOrderData, Tensor3};
use hhokit_core::kernel::{parse_with_aliases, DiffPoly, Rat, RatFunc};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    CheckOp,
    CheckCompat,
    FindBivectors,
    FindFluxes,
    Classify,
    Reduce,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::CheckOp => "check-op",
            Task::CheckCompat => "check-compat",
            Task::FindBivectors => "find-bivectors",
            Task::FindFluxes => "find-fluxes",
            Task::Classify => "classify",
            Task::Reduce => "reduce",
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub name: Option<String>,
    pub description: Option<String>,
    pub n: usize,
    pub task: Option<Task>,
    /// Alias → canonical base name, e.g. `rho = "u1"`.
    #[serde(default)]
    pub variables: BTreeMap<String, String>,
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub operators: Vec<OperatorSpec>,
    #[serde(default)]
    pub symmetries: Vec<Vec<String>>,
    #[serde(default)]
    pub search: SearchSpec,
    #[serde(default)]
    pub expect: Vec<Expectation>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Right-hand sides of `u_t = F`.
    pub fluxes: Option<Vec<String>>,
    /// `u_t = V u_x`.
    pub velocity: Option<Vec<Vec<String>>>,
    /// `u_t = (V(u))_x`.
    pub conservative: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    Form,
    FirstOrder,
    NonlocalFirstOrder,
    SecondOrder,
    ThirdOrder,
}

/// One entry `value` at 1-based `index`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Entry {
    pub index: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailSpec {
    pub weight: String,
    pub w: Vec<Vec<String>>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub name: String,
    pub kind: OperatorKind,
    /// Odd-variable components for `kind = "form"`.
    pub form: Option<Vec<String>>,
    pub g_upper: Option<Vec<Vec<String>>>,
    pub g_lower: Option<Vec<Vec<String>>>,
    /// `Γ^{ij}_k`; Levi-Civita when absent.
    pub gamma: Option<Vec<Entry>>,
    /// Representative `T_{ijk}` entries, extended by skew-symmetry.
    #[serde(default)]
    pub t: Vec<Entry>,
    /// Representative `g0_{ij}` entries, extended by skew-symmetry.
    #[serde(default)]
    pub g0: Vec<Entry>,
    /// `c^{ij}_k`; taken from the metric when absent.
    pub c: Option<Vec<Entry>>,
    /// First-order tail matrix `W`.
    pub w: Option<Vec<Vec<String>>>,
    #[serde(default)]
    pub tails: Vec<TailSpec>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    pub order: Option<usize>,
    pub degree: Option<usize>,
    /// `total` (default) or `coefficient`.
    pub counting: Option<String>,
    /// Shared flux denominator.
    pub denominator: Option<String>,
    pub operator: Option<String>,
}

/// A golden assertion checked by `examples run`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectation {
    pub task: Task,
    pub operator: Option<String>,
    pub order: Option<usize>,
    pub degree: Option<usize>,
    pub pass: Option<bool>,
    pub dimension: Option<usize>,
    pub basis: Option<Vec<Vec<String>>>,
    /// Families that must fail, e.g. `"coefficient-u_xx-p"`.
    #[serde(default)]
    pub failing_families: Vec<String>,
    pub linear_degeneracy: Option<bool>,
    pub haantjes_zero: Option<bool>,
    pub perfect_square: Option<bool>,
}

/// Engine objects built from a problem file.
#[derive(Clone, Debug)]
pub struct Problem {
    pub file: ProblemFile,
    pub system: Option<SystemData>,
    pub operators: Vec<Operator>,
    pub symmetries: Vec<Vec<DiffPoly>>,
}

#[derive(Clone, Debug)]
pub enum SystemData {
    General(Vec<DiffPoly>),
    Hydrodynamic(Matrix),
    Conservative(Vec<RatFunc>),
}

impl SystemData {
    pub fn evolution(&self) -> Result<EvolutionSystem, CliError> {
        Ok(match self {
            SystemData::General(f) => EvolutionSystem::general(f.clone())?,
            SystemData::Hydrodynamic(v) => EvolutionSystem::hydrodynamic(v.clone())?,
            SystemData::Conservative(f) => EvolutionSystem::conservative(f.clone())?,
        })
    }

    /// Velocity matrix `V` of a hydrodynamic or conservative system.
    pub fn velocity(&self) -> Option<Matrix> {
        match self {
            SystemData::General(_) => None,
            SystemData::Hydrodynamic(v) => Some(v.clone()),
            SystemData::Conservative(f) => Some(hhokit_core::geometry::linalg::jacobian(f)),
        }
    }
}

#[derive(Clone, Debug)]
pub enum OperatorData {
    Form(Vec<DiffPoly>),
    FirstOrder { metric: Metric, conn: Connection },
    NonlocalFirstOrder { metric: Metric, conn: Connection, w: Matrix },
    SecondOrder(SecondOrderData),
    ThirdOrder { data: ThirdOrderData, tails: Vec<NonlocalTail> },
}

#[derive(Clone, Debug)]
pub struct Operator {
    pub name: String,
    pub data: OperatorData,
}

struct Ctx<'a> {
    n: usize,
    aliases: &'a BTreeMap<String, String>,
}

impl Ctx<'_> {
    fn dp(&self, what: &str, s: &str) -> Result<DiffPoly, CliError> {
        let e = parse_with_aliases(s, self.aliases)
            .map_err(|e| CliError::Parse { what: what.to_string(), expr: s.to_string(), column: e.column, msg: e.msg })?;
        if e.field_arity() > self.n {
            return Err(CliError::Input(format!("{what}: '{s}' refers to a field beyond u{}", self.n)));
        }
        Ok(e)
    }

    fn rf(&self, what: &str, s: &str) -> Result<RatFunc, CliError> {
        self.dp(what, s)?
            .as_ratfunc()
            .ok_or_else(|| CliError::Input(format!("{what}: '{s}' must be a function of u1..u{} only", self.n)))
    }

    fn rat(&self, what: &str, s: &str) -> Result<Rat, CliError> {
        self.rf(what, s)?.as_constant().ok_or_else(|| CliError::Input(format!("{what}: '{s}' must be a constant")))
    }

    fn vector(&self, what: &str, v: &[String]) -> Result<Vec<RatFunc>, CliError> {
        if v.len() != self.n {
            return Err(CliError::Input(format!("{what}: expected {} entries, got {}", self.n, v.len())));
        }
        v.iter().map(|s| self.rf(what, s)).collect()
    }

    fn matrix(&self, what: &str, m: &[Vec<String>]) -> Result<Matrix, CliError> {
        if m.len() != self.n || m.iter().any(|r| r.len() != self.n) {
            return Err(CliError::Input(format!("{what}: expected a {0}x{0} matrix", self.n)));
        }
        m.iter().map(|r| r.iter().map(|s| self.rf(what, s)).collect()).collect()
    }

    fn index(&self, what: &str, e: &Entry, arity: usize) -> Result<Vec<usize>, CliError> {
        if e.index.len() != arity || e.index.iter().any(|&i| i == 0 || i > self.n) {
            return Err(CliError::Input(format!(
                "{what}: index {:?} must have {arity} entries in 1..={}",
                e.index, self.n
            )));
        }
        Ok(e.index.iter().map(|i| i - 1).collect())
    }

    fn tensor(&self, what: &str, entries: &[Entry]) -> Result<Tensor3, CliError> {
        let n = self.n;
        let mut t = vec![vec![vec![RatFunc::zero(); n]; n]; n];
        for e in entries {
            let ix = self.index(what, e, 3)?;
            t[ix[0]][ix[1]][ix[2]] = self.rf(what, &e.value)?;
        }
        Ok(t)
    }
}

fn metric_of(spec: &OperatorSpec, ctx: &Ctx, lower_default: bool) -> Result<Metric, CliError> {
    let what = format!("operator {}", spec.name);
    match (&spec.g_upper, &spec.g_lower) {
        (Some(g), None) if !lower_default => Ok(Metric::upper(ctx.matrix(&what, g)?)?),
        (None, Some(g)) => Ok(Metric::lower(ctx.matrix(&what, g)?)?),
        (Some(g), None) => {
            let m = Metric::upper(ctx.matrix(&what, g)?)?;
            Ok(Metric::lower(m.low().clone())?)
        }
        _ => Err(CliError::Input(format!("{what}: give exactly one of g_upper, g_lower"))),
    }
}

fn connection_of(spec: &OperatorSpec, ctx: &Ctx, metric: &Metric) -> Result<Connection, CliError> {
    match &spec.gamma {
        None => Ok(Connection::levi_civita(metric)),
        Some(entries) => Ok(Connection::new(ctx.tensor(&format!("operator {} gamma", spec.name), entries)?)?),
    }
}

fn operator_of(spec: &OperatorSpec, ctx: &Ctx) -> Result<Operator, CliError> {
    let what = format!("operator {}", spec.name);
    let data = match spec.kind {
        OperatorKind::Form => {
            let comps = spec.form.as_ref().ok_or_else(|| CliError::Input(format!("{what}: missing form")))?;
            if comps.len() != ctx.n {
                return Err(CliError::Input(format!("{what}: form needs {} components", ctx.n)));
            }
            OperatorData::Form(comps.iter().map(|s| ctx.dp(&what, s)).collect::<Result<_, _>>()?)
        }
        OperatorKind::FirstOrder => {
            let metric = metric_of(spec, ctx, false)?;
            let conn = connection_of(spec, ctx, &metric)?;
            OperatorData::FirstOrder { metric, conn }
        }
        OperatorKind::NonlocalFirstOrder => {
            let metric = metric_of(spec, ctx, false)?;
            let conn = connection_of(spec, ctx, &metric)?;
            let w = spec.w.as_ref().ok_or_else(|| CliError::Input(format!("{what}: missing w")))?;
            OperatorData::NonlocalFirstOrder { metric, conn, w: ctx.matrix(&what, w)? }
        }
        OperatorKind::SecondOrder => {
            let mut t = Vec::new();
            for e in &spec.t {
                let ix = ctx.index(&what, e, 3)?;
                t.push(([ix[0], ix[1], ix[2]], ctx.rat(&what, &e.value)?));
            }
            let mut g0 = Vec::new();
            for e in &spec.g0 {
                let ix = ctx.index(&what, e, 2)?;
                g0.push(([ix[0], ix[1]], ctx.rat(&what, &e.value)?));
            }
            OperatorData::SecondOrder(SecondOrderData::alternating(ctx.n, &t, &g0))
        }
        OperatorKind::ThirdOrder => {
            let metric = metric_of(spec, ctx, true)?;
            let g_low = metric.low().clone();
            let data = match &spec.c {
                None => ThirdOrderData::from_metric(g_low)?,
                Some(entries) => ThirdOrderData::new(g_low, ctx.tensor(&what, entries)?)?,
            };
            let tails = spec
                .tails
                .iter()
                .map(|t| Ok(NonlocalTail { weight: ctx.rat(&what, &t.weight)?, w: ctx.matrix(&what, &t.w)? }))
                .collect::<Result<_, CliError>>()?;
            OperatorData::ThirdOrder { data, tails }
        }
    };
    Ok(Operator { name: spec.name.clone(), data })
}

fn is_canonical_name(s: &str) -> bool {
    let mut ch = s.chars();
    matches!(ch.next(), Some('u' | 'p' | 'r' | 'c')) && {
        let rest: String = ch.collect();
        !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit())
    }
}

impl ProblemFile {
    pub fn from_toml(src: &str) -> Result<Self, CliError> {
        toml::from_str(src).map_err(|e| CliError::Toml(e.to_string()))
    }

    pub fn build(self) -> Result<Problem, CliError> {
        if self.n == 0 {
            return Err(CliError::Input("n must be at least 1".into()));
        }
        for (alias, target) in &self.variables {
            if is_canonical_name(alias) || alias.contains('_') {
                return Err(CliError::Input(format!("alias '{alias}' shadows a built-in name")));
            }
            if !is_canonical_name(target) {
                return Err(CliError::Input(format!("alias '{alias}' must map to a name like u1, p1, r1 or c1")));
            }
        }
        let ctx = Ctx { n: self.n, aliases: &self.variables };
        let system = match &self.system {
            None => None,
            Some(s) => Some(match (&s.fluxes, &s.velocity, &s.conservative) {
                (Some(f), None, None) => {
                    if f.len() != self.n {
                        return Err(CliError::Input(format!("system: expected {} fluxes", self.n)));
                    }
                    SystemData::General(f.iter().map(|x| ctx.dp("system", x)).collect::<Result<_, _>>()?)
                }
                (None, Some(v), None) => SystemData::Hydrodynamic(ctx.matrix("system velocity", v)?),
                (None, None, Some(f)) => SystemData::Conservative(ctx.vector("system conservative", f)?),
                _ => return Err(CliError::Input("system: give exactly one of fluxes, velocity, conservative".into())),
            }),
        };
        let mut names = std::collections::BTreeSet::new();
        let mut operators = Vec::new();
        for spec in &self.operators {
            if !names.insert(spec.name.clone()) {
                return Err(CliError::Input(format!("duplicate operator name '{}'", spec.name)));
            }
            operators.push(operator_of(spec, &ctx)?);
        }
        let symmetries = self
            .symmetries
            .iter()
            .map(|phi| {
                if phi.len() != self.n {
                    return Err(CliError::Input(format!("symmetry needs {} components", self.n)));
                }
                phi.iter().map(|s| ctx.dp("symmetry", s)).collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        Ok(Problem { file: self, system, operators, symmetries })
    }
}

impl Problem {
    pub fn n(&self) -> usize {
        self.file.n
    }

    pub fn system(&self) -> Result<&SystemData, CliError> {
        self.system.as_ref().ok_or_else(|| CliError::Input("this task needs a [system]".into()))
    }

    /// The named operator, or all of them.
    pub fn select(&self, name: Option<&str>) -> Result<Vec<&Operator>, CliError> {
        match name {
            Some(n) => self
                .operators
                .iter()
                .find(|o| o.name == n)
                .map(|o| vec![o])
                .ok_or_else(|| CliError::Input(format!("no operator named '{n}'"))),
            None if self.operators.is_empty() => Err(CliError::Input("this task needs an operator".into())),
            None => Ok(self.operators.iter().collect()),
        }
    }

    /// Parses an expression with the problem's aliases.
    pub fn parse(&self, what: &str, s: &str) -> Result<DiffPoly, CliError> {
        Ctx { n: self.n(), aliases: &self.file.variables }.dp(what, s)
    }
}
