use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One checked predicate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Case {
    pub id: String,
    /// The statement being checked, written out.
    pub anchor: String,
    /// Measured quantity, when there is a single one.
    pub value: Option<f64>,
    /// Relative slack; `pass` iff `margin ≥ 0`.
    pub margin: f64,
    pub pass: bool,
    /// Reported-only cases never fail a run.
    pub asserted: bool,
    /// Why the check could not be evaluated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub seed: u64,
    pub grids: BTreeMap<String, usize>,
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite_name: String,
    pub cases: Vec<Case>,
    pub environment: Environment,
}

impl SuiteReport {
    pub fn new(suite_name: impl Into<String>) -> Self {
        SuiteReport { suite_name: suite_name.into(), cases: Vec::new(), environment: Environment::default() }
    }

    /// Register a check; refuses one without an anchor.
    pub fn register(&mut self, id: impl Into<String>, anchor: &str, value: Option<f64>, margin: f64, asserted: bool) -> Result<()> {
        let id = id.into();
        if anchor.trim().is_empty() {
            return Err(Error::MissingAnchor(id));
        }
        // keep margins finite so reports stay valid JSON
        let margin = if margin.is_nan() { f64::MIN } else { margin.clamp(f64::MIN, f64::MAX) };
        let value = value.map(|v| if v.is_finite() { v } else { v.clamp(f64::MIN, f64::MAX) });
        let pass = margin >= 0.0;
        self.cases.push(Case { id, anchor: anchor.to_string(), value, margin, pass, asserted, note: None });
        Ok(())
    }

    /// Asserted check of `value ≤ bound`, margin `1 - value / bound`.
    pub fn at_most(&mut self, id: impl Into<String>, anchor: &str, value: f64, bound: f64) -> Result<()> {
        self.register(id, anchor, Some(value), upper_margin(value, bound), true)
    }

    /// Asserted check of `value ≥ bound`, margin `value / bound - 1`.
    pub fn at_least(&mut self, id: impl Into<String>, anchor: &str, value: f64, bound: f64) -> Result<()> {
        self.register(id, anchor, Some(value), lower_margin(value, bound), true)
    }

    /// Reported value with no pass/fail meaning.
    pub fn record(&mut self, id: impl Into<String>, anchor: &str, value: f64) -> Result<()> {
        self.register(id, anchor, Some(value), 0.0, false)
    }

    /// A check that could not be evaluated.
    pub fn error(&mut self, id: impl Into<String>, anchor: &str, asserted: bool) -> Result<()> {
        self.register(id, anchor, None, f64::MIN, asserted)
    }

    /// An asserted check that failed with `err` before producing a value.
    pub fn failed(&mut self, id: impl Into<String>, anchor: &str, err: &Error) -> Result<()> {
        self.register(id, anchor, None, f64::MIN, true)?;
        if let Some(case) = self.cases.last_mut() {
            case.note = Some(err.to_string());
        }
        Ok(())
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| c.asserted && !c.pass)
    }

    pub fn all_pass(&self) -> bool {
        self.failures().next().is_none()
    }

    pub fn extend(&mut self, other: SuiteReport) {
        self.cases.extend(other.cases);
        self.environment.grids.extend(other.environment.grids);
        self.environment.tolerances.extend(other.environment.tolerances);
    }

    pub fn grid(&mut self, name: &str, points: usize) -> &mut Self {
        self.environment.grids.insert(name.to_string(), points);
        self
    }

    pub fn tolerance(&mut self, name: &str, tol: f64) -> &mut Self {
        self.environment.tolerances.insert(name.to_string(), tol);
        self
    }
}

/// Relative slack of `value ≤ bound`; against a zero bound a violation is reported as `-value`.
pub fn upper_margin(value: f64, bound: f64) -> f64 {
    if value.is_nan() || bound.is_nan() {
        return f64::MIN;
    }
    if bound == 0.0 {
        return if value <= 0.0 { 1.0 } else { -value };
    }
    1.0 - value / bound
}

pub fn lower_margin(value: f64, bound: f64) -> f64 {
    if value.is_nan() || bound.is_nan() {
        return f64::MIN;
    }
    if bound <= 0.0 {
        return if value >= bound { 1.0 } else { value - bound };
    }
    value / bound - 1.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchors_are_mandatory() {
        let mut r = SuiteReport::new("x");
        assert!(matches!(r.register("a", "  ", None, 0.0, true), Err(Error::MissingAnchor(_))));
        r.at_most("b", "b ≤ 1", 0.5, 1.0).unwrap();
        r.at_least("c", "c ≥ 1", 0.5, 1.0).unwrap();
        assert_eq!(r.cases[0].margin, 0.5);
        assert!(!r.cases[1].pass);
        assert!(!r.all_pass());
        assert_eq!(r.failures().count(), 1);
    }
}
