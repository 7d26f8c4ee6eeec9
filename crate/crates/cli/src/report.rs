//! Structured report (`"schema": 1`) and its plain-text rendering.

use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::tasks::{Outcome, Verdict};

pub const SCHEMA: u32 = 1;

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub engine: String,
    pub input_sha256: String,
    pub source: String,
    pub problem: Option<String>,
    #[serde(flatten)]
    pub outcome: Outcome,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

impl Report {
    pub fn new(source: &str, input: &[u8], problem: Option<String>, outcome: Outcome) -> Self {
        Report {
            schema: SCHEMA,
            engine: format!("hhokit {}", env!("CARGO_PKG_VERSION")),
            input_sha256: sha256_hex(input),
            source: source.to_string(),
            problem,
            outcome,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let o = &self.outcome;
        let mut s = String::new();
        let name = self.problem.as_deref().unwrap_or(&self.source);
        let _ = writeln!(s, "{} [{}]: {}", o.task.name(), name, if o.pass { "pass" } else { "FAIL" });
        for v in &o.verdicts {
            render_verdict(&mut s, v, "  ");
        }
        for f in &o.families {
            let _ = writeln!(
                s,
                "  {}: dimension {} ({} parameters{})",
                f.subject,
                f.dimension,
                f.parameters,
                if f.consistent { "" } else { ", inconsistent" }
            );
            for (k, b) in f.basis.iter().enumerate() {
                let _ = writeln!(s, "    basis {}: {}", k + 1, b.join(" ; "));
            }
            if let Some(m) = &f.sample {
                let _ = writeln!(s, "    sample member ({}): {}", m.free_values.join(", "), m.flux.join(" ; "));
                let _ = writeln!(
                    s,
                    "    sample linear-degeneracy: {}; haantjes-zero: {}",
                    pf(m.linear_degeneracy),
                    pf(m.haantjes_zero)
                );
            }
        }
        if let Some(c) = &o.classification {
            let _ = writeln!(s, "  linear-degeneracy: {}", pf(c.linear_degeneracy.pass));
            let _ = writeln!(s, "  nijenhuis-zero: {}", pf(c.nijenhuis_zero));
            let _ = writeln!(
                s,
                "  haantjes-zero: {}{}",
                pf(c.haantjes_zero),
                if c.haantjes_zero { "" } else { " (non-diagonalizable)" }
            );
            let _ = writeln!(s, "  characteristic polynomial perfect square: {}", pf(c.perfect_square));
            for note in &c.linear_degeneracy.notes {
                let _ = writeln!(s, "  note: {note}");
            }
        }
        if let Some(r) = &o.reduction {
            let _ = writeln!(s, "  potential system: {}", r.potential_system.join(" ; "));
            for op in &r.operators {
                let _ = writeln!(s, "  {}: {}", op.name, op.form.join(" ; "));
            }
        }
        s
    }
}

fn pf(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

fn render_verdict(s: &mut String, v: &Verdict, indent: &str) {
    let _ = writeln!(s, "{indent}{} / {}: {}", v.subject, v.check, pf(v.pass));
    for f in &v.families {
        if f.pass {
            let _ = writeln!(s, "{indent}  {}: pass", f.name);
        } else {
            let _ = writeln!(s, "{indent}  {}: fail ({} nonzero)", f.name, f.nonzero);
        }
    }
    for r in &v.residuals {
        let ix: Vec<String> = r.indices.iter().map(ToString::to_string).collect();
        let _ = writeln!(s, "{indent}    {}[{}] = {}", r.family, ix.join(","), r.value);
    }
    if v.residuals.len() < v.residuals_total {
        let _ = writeln!(
            s,
            "{indent}    ... {} more (use --full)",
            v.residuals_total - v.residuals.len()
        );
    }
    for note in &v.notes {
        let _ = writeln!(s, "{indent}  note: {note}");
    }
}
