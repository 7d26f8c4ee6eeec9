//! Dispatch of the six tasks to the engine, producing serializable outcomes.

use hhokit_core::covering::{extract_conditions, BivectorForm, CoveringContext, CoveringError, EvolutionSystem};
use hhokit_core::geometry::{
    self, first_order_form, first_order_hamiltonian_check, haantjes, hydrodynamic_characteristic, linalg,
    linear_degeneracy_check, multiplicity_certificate, nijenhuis, nonlocal_first_order_check,
    second_order_canonical_check, second_order_compat, second_order_potential_form, third_order_compat,
    third_order_conservative_form, third_order_hamiltonian_check, third_order_nonlocal_checks,
    third_order_potential_form, tsarev_check, ConditionReport, Matrix,
};
use hhokit_core::kernel::{DiffPoly, Poly, RatFunc};
use hhokit_core::solver::{
    find_bivectors, find_fluxes_second_order, find_fluxes_third_order, make_operator_ansatz, DegreeCounting,
    FluxAnsatz, FluxFamily,
};
use serde::Serialize;

use crate::error::CliError;
use crate::problem::{Operator, OperatorData, Problem, SystemData, Task};

pub const DEFAULT_TRUNCATION: usize = 20;

#[derive(Clone, Debug, Default)]
pub struct Options {
    pub operator: Option<String>,
    pub order: Option<usize>,
    pub degree: Option<usize>,
    pub jet_cap: Option<usize>,
    /// Keep every residual entry instead of the first [`DEFAULT_TRUNCATION`].
    pub full: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FamilyVerdict {
    pub name: String,
    pub pass: bool,
    pub nonzero: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ResidualOut {
    pub family: String,
    /// 1-based.
    pub indices: Vec<usize>,
    pub value: String,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Verdict {
    pub subject: String,
    pub check: String,
    pub pass: bool,
    pub families: Vec<FamilyVerdict>,
    pub residuals_total: usize,
    pub residuals: Vec<ResidualOut>,
    pub notes: Vec<String>,
}

impl Verdict {
    fn from_report(subject: &str, rep: &ConditionReport, full: bool) -> Self {
        let families = rep
            .families
            .iter()
            .map(|f| {
                let nonzero = rep.residuals_of(f).count();
                FamilyVerdict { name: f.clone(), pass: nonzero == 0, nonzero }
            })
            .collect();
        let limit = if full { usize::MAX } else { DEFAULT_TRUNCATION };
        let residuals = rep
            .residuals
            .iter()
            .take(limit)
            .map(|r| ResidualOut {
                family: r.family.clone(),
                indices: r.indices.iter().map(|i| i + 1).collect(),
                value: r.value.to_string(),
            })
            .collect();
        Verdict {
            subject: subject.to_string(),
            check: rep.name.clone(),
            pass: rep.pass,
            families,
            residuals_total: rep.residuals.len(),
            residuals,
            notes: rep.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SampleOut {
    pub free_values: Vec<String>,
    pub flux: Vec<String>,
    pub linear_degeneracy: bool,
    pub haantjes_zero: bool,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct FamilyOut {
    pub subject: String,
    pub parameters: usize,
    pub dimension: usize,
    pub consistent: bool,
    /// Free parameter names.
    pub free: Vec<String>,
    pub general: Vec<String>,
    pub basis: Vec<Vec<String>>,
    pub sample: Option<SampleOut>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Classification {
    pub velocity: Vec<Vec<String>>,
    /// `[1, f1, ..., fn]` of `det(λI - V)`.
    pub charpoly: Vec<String>,
    pub linear_degeneracy: Verdict,
    pub nijenhuis_zero: bool,
    pub haantjes_zero: bool,
    pub perfect_square: bool,
    pub square_root: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ReducedOperator {
    pub name: String,
    pub form: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Reduction {
    pub potential_system: Vec<String>,
    pub operators: Vec<ReducedOperator>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Outcome {
    pub task: Task,
    /// False exactly when some checked condition is violated.
    pub pass: bool,
    pub verdicts: Vec<Verdict>,
    pub families: Vec<FamilyOut>,
    pub classification: Option<Classification>,
    pub reduction: Option<Reduction>,
}

impl Outcome {
    fn new(task: Task) -> Self {
        Outcome { task, pass: true, verdicts: Vec::new(), families: Vec::new(), classification: None, reduction: None }
    }

    fn push(&mut self, v: Verdict) {
        self.pass &= v.pass;
        self.verdicts.push(v);
    }
}

fn strings<T: ToString>(v: &[T]) -> Vec<String> {
    v.iter().map(ToString::to_string).collect()
}

fn covering(system: EvolutionSystem, opts: &Options) -> CoveringContext {
    let ctx = CoveringContext::new(system);
    match opts.jet_cap {
        Some(cap) => ctx.with_jet_cap(cap),
        None => ctx,
    }
}

/// Collected covering residual as a verdict; one entry per odd monomial.
fn residual_verdict(subject: &str, ctx: &CoveringContext, a: &BivectorForm, full: bool) -> Result<Verdict, CliError> {
    let residual = ctx.bivector_residual(a)?;
    let mut rep = ConditionReport::new("covering residual");
    for c in extract_conditions(&residual) {
        let label = format!("residual[{}]", DiffPoly::term(c.monomial.clone(), RatFunc::one()));
        rep.check(&label, &[c.component], c.coefficient);
    }
    Ok(Verdict::from_report(subject, &rep, full))
}

fn symmetry_failure(subject: &str, residual: &[DiffPoly], full: bool) -> Verdict {
    let mut rep = ConditionReport::new("symmetry registration");
    for c in extract_conditions(residual) {
        rep.check("not-a-symmetry", &[c.component], c.coefficient);
    }
    if rep.pass {
        rep.check("not-a-symmetry", &[0], RatFunc::one());
    }
    Verdict::from_report(subject, &rep, full)
}

fn velocity_of(problem: &Problem) -> Result<Matrix, CliError> {
    problem
        .system()?
        .velocity()
        .ok_or_else(|| CliError::Input("this check needs a hydrodynamic or conservative system".into()))
}

fn conservative_of(problem: &Problem) -> Result<Vec<RatFunc>, CliError> {
    match problem.system()? {
        SystemData::Conservative(f) => Ok(f.clone()),
        _ => Err(CliError::Input("this check needs a conservative system".into())),
    }
}

fn check_op(op: &Operator, out: &mut Outcome, opts: &Options) -> Result<(), CliError> {
    let rep = match &op.data {
        OperatorData::Form(_) => {
            return Err(CliError::Input(format!(
                "check-op needs a structured operator; '{}' is given as a raw form",
                op.name
            )))
        }
        OperatorData::FirstOrder { metric, conn } => first_order_hamiltonian_check(metric, conn)?,
        OperatorData::NonlocalFirstOrder { metric, conn, .. } => {
            let mut rep = first_order_hamiltonian_check(metric, conn)?;
            rep.note("local part only; tail conditions are not checked");
            rep
        }
        OperatorData::SecondOrder(d) => second_order_canonical_check(d),
        OperatorData::ThirdOrder { data, tails } => {
            let mut rep = third_order_hamiltonian_check(data);
            if !tails.is_empty() {
                rep.note("tail conditions depend on the system; use check-compat");
            }
            rep
        }
    };
    out.push(Verdict::from_report(&op.name, &rep, opts.full));
    Ok(())
}

fn check_compat(problem: &Problem, op: &Operator, out: &mut Outcome, opts: &Options) -> Result<(), CliError> {
    let name = op.name.as_str();
    match &op.data {
        OperatorData::Form(comps) => {
            let mut ctx = covering(problem.system()?.evolution()?, opts);
            for phi in &problem.symmetries {
                match ctx.register_symmetry(phi.clone()) {
                    Ok(_) => {}
                    Err(CoveringError::NotASymmetry { residual }) => {
                        out.push(symmetry_failure(name, &residual, opts.full));
                        return Ok(());
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            let form = BivectorForm::new(comps.clone())?;
            out.push(residual_verdict(name, &ctx, &form, opts.full)?);
        }
        OperatorData::FirstOrder { metric, conn } => {
            let v = velocity_of(problem)?;
            out.push(Verdict::from_report(name, &tsarev_check(metric, conn, &v)?, opts.full));
            let ctx = covering(EvolutionSystem::hydrodynamic(v)?, opts);
            out.push(residual_verdict(name, &ctx, &first_order_form(metric.up(), conn), opts.full)?);
        }
        OperatorData::NonlocalFirstOrder { metric, conn, w } => {
            let v = velocity_of(problem)?;
            out.push(Verdict::from_report(name, &nonlocal_first_order_check(metric, conn, w, &v)?, opts.full));
            let mut ctx = covering(EvolutionSystem::hydrodynamic(v)?, opts);
            let slot = match ctx.register_symmetry(hydrodynamic_characteristic(w)) {
                Ok(slot) => slot,
                Err(CoveringError::NotASymmetry { residual }) => {
                    out.push(symmetry_failure(name, &residual, opts.full));
                    return Ok(());
                }
                Err(e) => return Err(e.into()),
            };
            let mut comps = first_order_form(metric.up(), conn).components;
            for (c, row) in comps.iter_mut().zip(w) {
                for (s, ws) in row.iter().enumerate() {
                    if !ws.is_zero() {
                        *c += &DiffPoly::u(s, 1).checked_mul(&DiffPoly::r(slot))?.scale(ws);
                    }
                }
            }
            out.push(residual_verdict(name, &ctx, &BivectorForm::new(comps)?, opts.full)?);
        }
        OperatorData::SecondOrder(d) => {
            let flux = conservative_of(problem)?;
            out.push(Verdict::from_report(name, &second_order_compat(d, &flux)?, opts.full));
            let ctx = covering(EvolutionSystem::potential(flux)?, opts);
            let form = second_order_potential_form(d.metric()?.up());
            out.push(residual_verdict(name, &ctx, &form, opts.full)?);
        }
        OperatorData::ThirdOrder { data, tails } => {
            let flux = conservative_of(problem)?;
            if tails.is_empty() {
                out.push(Verdict::from_report(name, &third_order_compat(data, &flux)?, opts.full));
                let ctx = covering(EvolutionSystem::conservative(flux)?, opts);
                out.push(residual_verdict(name, &ctx, &third_order_conservative_form(data), opts.full)?);
            } else {
                let rep = third_order_nonlocal_checks(data, tails, &flux)?;
                out.push(Verdict::from_report(name, &rep, opts.full));
            }
        }
    }
    Ok(())
}

fn flux_family_out(subject: &str, ansatz: &FluxAnsatz, fam: &FluxFamily) -> FamilyOut {
    let sol = &fam.family.solution;
    FamilyOut {
        subject: subject.to_string(),
        parameters: ansatz.params(),
        dimension: fam.family.dimension,
        consistent: !sol.inconsistent,
        free: sol.free.iter().map(|k| format!("c{}", k + 1)).collect(),
        general: fam.family.general.as_deref().map(strings).unwrap_or_default(),
        basis: fam.family.basis.iter().map(|b| strings(b)).collect(),
        sample: fam.classification.as_ref().map(|m| SampleOut {
            free_values: strings(&m.free_values),
            flux: strings(&m.flux),
            linear_degeneracy: m.linear_degeneracy.pass,
            haantjes_zero: m.haantjes_zero,
        }),
    }
}

fn counting(problem: &Problem) -> Result<DegreeCounting, CliError> {
    match problem.file.search.counting.as_deref() {
        None | Some("total") => Ok(DegreeCounting::Total),
        Some("coefficient") => Ok(DegreeCounting::Coefficient),
        Some(other) => Err(CliError::Input(format!("unknown degree counting '{other}'"))),
    }
}

fn find_fluxes(problem: &Problem, op: &Operator, out: &mut Outcome, opts: &Options) -> Result<(), CliError> {
    let n = problem.n();
    let degree = opts.degree.or(problem.file.search.degree).unwrap_or(2);
    let ansatz = match &problem.file.search.denominator {
        None => FluxAnsatz::polynomial(n, degree)?,
        Some(s) => {
            let den = problem.parse("search denominator", s)?.as_ratfunc().filter(RatFunc::is_polynomial);
            let den: Poly = den.map(|d| d.num().clone()).ok_or_else(|| {
                CliError::Input(format!("search denominator '{s}' must be a polynomial in u1..u{n}"))
            })?;
            FluxAnsatz::with_denominator(n, degree, den)?
        }
    };
    let fam = match &op.data {
        OperatorData::SecondOrder(d) => find_fluxes_second_order(d, &ansatz)?,
        OperatorData::ThirdOrder { data, tails } if tails.is_empty() => find_fluxes_third_order(data, &ansatz)?,
        _ => {
            return Err(CliError::Input(format!(
                "find-fluxes supports local second- and third-order operators; '{}' is neither",
                op.name
            )))
        }
    };
    out.families.push(flux_family_out(&op.name, &ansatz, &fam));
    Ok(())
}

fn classify(problem: &Problem, opts: &Options) -> Result<Classification, CliError> {
    let v = velocity_of(problem)?;
    let cp = linalg::charpoly(&v);
    let cert = multiplicity_certificate(&v, &[]);
    let zero3 = |t: &geometry::Tensor3| t.iter().flatten().flatten().all(RatFunc::is_zero);
    Ok(Classification {
        velocity: v.iter().map(|r| strings(r)).collect(),
        charpoly: strings(&cp),
        linear_degeneracy: Verdict::from_report("system", &linear_degeneracy_check(&v), opts.full),
        nijenhuis_zero: zero3(&nijenhuis(&v)),
        haantjes_zero: zero3(&haantjes(&v)),
        perfect_square: cert.is_perfect_square(),
        square_root: cert.q.as_deref().map(strings),
    })
}

fn reduce(problem: &Problem) -> Result<Reduction, CliError> {
    let flux = conservative_of(problem)?;
    let potential = geometry::potentialize(&EvolutionSystem::conservative(flux)?)?;
    let mut operators = Vec::new();
    for op in &problem.operators {
        let form = match &op.data {
            OperatorData::SecondOrder(d) => second_order_potential_form(d.metric()?.up()),
            OperatorData::ThirdOrder { data, .. } => third_order_potential_form(data),
            _ => continue,
        };
        operators.push(ReducedOperator { name: op.name.clone(), form: strings(&form.components) });
    }
    Ok(Reduction { potential_system: strings(potential.fluxes()), operators })
}

pub fn run(problem: &Problem, task: Task, opts: &Options) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(task);
    let selected = opts.operator.as_deref().or(problem.file.search.operator.as_deref());
    match task {
        Task::CheckOp => {
            for op in problem.select(selected)? {
                check_op(op, &mut out, opts)?;
            }
        }
        Task::CheckCompat => {
            for op in problem.select(selected)? {
                check_compat(problem, op, &mut out, opts)?;
            }
        }
        Task::FindBivectors => {
            let order = opts.order.or(problem.file.search.order).unwrap_or(1);
            let degree = opts.degree.or(problem.file.search.degree).unwrap_or(1);
            let ansatz = make_operator_ansatz(problem.n(), order, degree, counting(problem)?)?;
            let ctx = covering(problem.system()?.evolution()?, opts);
            let fam = find_bivectors(&ctx, &ansatz)?;
            let sol = &fam.solution;
            out.families.push(FamilyOut {
                subject: "system".into(),
                parameters: ansatz.params(),
                dimension: fam.dimension,
                consistent: !sol.inconsistent,
                free: sol.free.iter().map(|k| format!("c{}", k + 1)).collect(),
                general: fam.general.as_ref().map(|g| strings(&g.components)).unwrap_or_default(),
                basis: fam.basis.iter().map(|b| strings(&b.components)).collect(),
                sample: None,
            });
        }
        Task::FindFluxes => {
            for op in problem.select(selected)? {
                find_fluxes(problem, op, &mut out, opts)?;
            }
        }
        Task::Classify => out.classification = Some(classify(problem, opts)?),
        Task::Reduce => out.reduction = Some(reduce(problem)?),
    }
    Ok(out)
}
