//! Built-in problem files and their golden expectations.

use std::collections::BTreeSet;

use crate::error::CliError;
use crate::problem::{Expectation, OperatorData, Problem, ProblemFile};
use crate::tasks::{self, Options};

pub struct Entry {
    pub name: &'static str,
    pub source: &'static str,
}

pub const CATALOG: &[Entry] = &[
    Entry { name: "kdv", source: include_str!("../catalog/kdv.toml") },
    Entry { name: "first-order-pass", source: include_str!("../catalog/first-order-pass.toml") },
    Entry { name: "first-order-fail", source: include_str!("../catalog/first-order-fail.toml") },
    Entry { name: "nonlocal-first-order-n1", source: include_str!("../catalog/nonlocal-first-order-n1.toml") },
    Entry { name: "n2-second-order", source: include_str!("../catalog/n2-second-order.toml") },
    Entry { name: "n4-second-order", source: include_str!("../catalog/n4-second-order.toml") },
    Entry { name: "oriented-assoc", source: include_str!("../catalog/oriented-assoc.toml") },
    Entry { name: "third-order-monge-n2", source: include_str!("../catalog/third-order-monge-n2.toml") },
];

pub fn find(name: &str) -> Result<&'static Entry, CliError> {
    CATALOG.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
        CliError::Input(format!("unknown example '{name}'; available: {}", names.join(", ")))
    })
}

pub fn load(entry: &Entry) -> Result<Problem, CliError> {
    ProblemFile::from_toml(entry.source)?.build()
}

/// Text for `examples show`: the source plus the assembled `g_{ij}` of
/// second-order operators.
pub fn show(entry: &Entry) -> Result<String, CliError> {
    let problem = load(entry)?;
    let mut s = entry.source.to_string();
    for op in &problem.operators {
        if let OperatorData::SecondOrder(d) = &op.data {
            s.push_str(&format!("\n# {}: g_ij = T_ijk u^k + g0_ij\n", op.name));
            for row in d.g_low() {
                let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
                s.push_str(&format!("#   [{}]\n", cells.join(", ")));
            }
        }
    }
    Ok(s)
}

/// Basis as a set of normal forms.
fn normalize_basis(problem: &Problem, basis: &[Vec<String>]) -> Result<BTreeSet<Vec<String>>, CliError> {
    basis
        .iter()
        .map(|b| b.iter().map(|s| problem.parse("basis", s).map(|e| e.to_string())).collect::<Result<Vec<_>, _>>())
        .collect()
}

/// Runs one expectation; returns a description of each mismatch.
pub fn check(problem: &Problem, exp: &Expectation, base: &Options) -> Result<Vec<String>, CliError> {
    let opts = Options {
        operator: exp.operator.clone(),
        order: exp.order.or(base.order),
        degree: exp.degree.or(base.degree),
        jet_cap: base.jet_cap,
        full: false,
    };
    let out = tasks::run(problem, exp.task, &opts)?;
    let mut bad = Vec::new();
    if let Some(p) = exp.pass {
        if out.pass != p {
            bad.push(format!("expected pass = {p}, got {}", out.pass));
        }
    }
    for fam in &exp.failing_families {
        let failed = out.verdicts.iter().flat_map(|v| &v.families).any(|f| &f.name == fam && !f.pass);
        if !failed {
            bad.push(format!("expected family {fam} to fail"));
        }
    }
    if exp.dimension.is_some() || exp.basis.is_some() {
        match out.families.first() {
            None => bad.push("no solution family produced".into()),
            Some(f) => {
                if let Some(d) = exp.dimension {
                    if f.dimension != d {
                        bad.push(format!("expected dimension {d}, got {}", f.dimension));
                    }
                }
                if let Some(b) = &exp.basis {
                    if normalize_basis(problem, b)? != normalize_basis(problem, &f.basis)? {
                        bad.push(format!("expected basis {b:?}, got {:?}", f.basis));
                    }
                }
            }
        }
    }
    let c = out.classification.as_ref();
    let flags = [
        ("linear_degeneracy", exp.linear_degeneracy, c.map(|c| c.linear_degeneracy.pass)),
        ("haantjes_zero", exp.haantjes_zero, c.map(|c| c.haantjes_zero)),
        ("perfect_square", exp.perfect_square, c.map(|c| c.perfect_square)),
    ];
    for (name, want, got) in flags {
        if let Some(w) = want {
            if got != Some(w) {
                bad.push(format!("expected {name} = {w}, got {got:?}"));
            }
        }
    }
    Ok(bad)
}

/// Outcome of all expectations of one entry.
pub struct EntryResult {
    pub name: &'static str,
    pub lines: Vec<String>,
    pub pass: bool,
}

pub fn run_entry(entry: &'static Entry, base: &Options) -> EntryResult {
    let mut lines = Vec::new();
    let mut pass = true;
    match load(entry) {
        Err(e) => {
            pass = false;
            lines.push(format!("load error: {e}"));
        }
        Ok(problem) => {
            for (k, exp) in problem.file.expect.iter().enumerate() {
                let label = match &exp.operator {
                    Some(op) => format!("#{} {} {op}", k + 1, exp.task.name()),
                    None => format!("#{} {}", k + 1, exp.task.name()),
                };
                match check(&problem, exp, base) {
                    Ok(bad) if bad.is_empty() => lines.push(format!("{label}: ok")),
                    Ok(bad) => {
                        pass = false;
                        lines.push(format!("{label}: MISMATCH {}", bad.join("; ")));
                    }
                    Err(e) => {
                        pass = false;
                        lines.push(format!("{label}: error {e}"));
                    }
                }
            }
        }
    }
    EntryResult { name: entry.name, lines, pass }
}

/// Runs the given entries on worker threads; results keep catalog order.
pub fn run_all(entries: &[&'static Entry], base: &Options) -> Vec<EntryResult> {
    std::thread::scope(|s| {
        let handles: Vec<_> = entries.iter().map(|e| s.spawn(move || run_entry(e, base))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_parses_and_has_expectations() {
        assert!(CATALOG.len() >= 5);
        for e in CATALOG {
            let p = load(e).unwrap_or_else(|err| panic!("{}: {err}", e.name));
            assert_eq!(p.file.name.as_deref(), Some(e.name));
            assert!(!p.file.expect.is_empty(), "{}", e.name);
        }
    }
}
