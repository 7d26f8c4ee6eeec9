//! Condition reports.

use std::fmt;

use crate::kernel::RatFunc;

/// A nonzero entry of a condition family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Residual {
    pub family: String,
    /// 0-based index positions of the entry.
    pub indices: Vec<usize>,
    pub value: RatFunc,
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let idx: Vec<String> = self.indices.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{}[{}] = {}", self.family, idx.join(","), self.value)
    }
}

/// Outcome of a checker: every evaluated family and its nonzero entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConditionReport {
    pub name: String,
    pub families: Vec<String>,
    pub residuals: Vec<Residual>,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl ConditionReport {
    pub fn new(name: impl Into<String>) -> Self {
        ConditionReport { name: name.into(), families: Vec::new(), residuals: Vec::new(), pass: true, notes: Vec::new() }
    }

    /// Declares a family so that it is listed even when it passes.
    pub fn family(&mut self, family: &str) {
        if !self.families.iter().any(|f| f == family) {
            self.families.push(family.to_string());
        }
    }

    /// Records an entry; zero values are dropped.
    pub fn check(&mut self, family: &str, indices: &[usize], value: RatFunc) {
        self.family(family);
        if !value.is_zero() {
            self.pass = false;
            self.residuals.push(Residual { family: family.to_string(), indices: indices.to_vec(), value });
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn family_passes(&self, family: &str) -> bool {
        !self.residuals.iter().any(|r| r.family == family)
    }

    pub fn residuals_of<'a>(&'a self, family: &'a str) -> impl Iterator<Item = &'a Residual> + 'a {
        self.residuals.iter().filter(move |r| r.family == family)
    }

    /// Appends the families and residuals of `other`.
    pub fn absorb(&mut self, other: ConditionReport) {
        for f in other.families {
            self.family(&f);
        }
        self.pass &= other.pass;
        self.residuals.extend(other.residuals);
        self.notes.extend(other.notes);
    }
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, if self.pass { "pass" } else { "fail" })?;
        for fam in &self.families {
            let n = self.residuals_of(fam).count();
            if n == 0 {
                writeln!(f, "  {fam}: pass")?;
            } else {
                writeln!(f, "  {fam}: fail ({n} nonzero)")?;
            }
        }
        for note in &self.notes {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}
