//! Norm-estimate bookkeeping: each entry is an inequality `lhs ≤ C rhs`
//! together with the constant `C = lhs / rhs` it needed on this run.

use std::collections::BTreeMap;

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
}

/// Estimates in insertion order, plus named scalar diagnostics.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct NormLedger {
    pub estimates: Vec<LedgerEntry>,
    pub diagnostics: BTreeMap<String, f64>,
}

impl NormLedger {
    pub fn record(&mut self, name: &str, lhs: f64, rhs: f64) {
        let constant = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        self.estimates.push(LedgerEntry { name: name.to_string(), lhs, rhs, constant });
    }

    pub fn note(&mut self, name: &str, value: f64) {
        self.diagnostics.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<&LedgerEntry> {
        self.estimates.iter().find(|e| e.name == name)
    }

    pub fn diagnostic(&self, name: &str) -> Option<f64> {
        self.diagnostics.get(name).copied()
    }
}

/// How one estimate behaves across a refinement family.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stability {
    pub name: String,
    /// The constant fitted on the first (coarsest) member.
    pub recorded: f64,
    pub constants: Vec<f64>,
    /// `(max - min) / max` over the family.
    pub spread: f64,
    /// Every member satisfies `lhs ≤ (1 + slack) · recorded · rhs` and the
    /// spread is at most `slack`.
    pub holds: bool,
}

/// Compare the constants of every estimate present in the first ledger
/// across all ledgers of the family.
pub fn stability(family: &[&NormLedger], slack: f64) -> Vec<Stability> {
    let Some(first) = family.first() else { return Vec::new() };
    first
        .estimates
        .iter()
        .map(|e| {
            let entries: Vec<Option<&LedgerEntry>> = family.iter().map(|l| l.get(&e.name)).collect();
            let constants: Vec<f64> = entries.iter().map(|x| x.map_or(f64::NAN, |x| x.constant)).collect();
            let recorded = e.constant;
            let max = constants.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = constants.iter().copied().fold(f64::INFINITY, f64::min);
            let spread = if max > 0.0 { (max - min) / max } else { 0.0 };
            let bound_ok = entries
                .iter()
                .all(|x| x.is_some_and(|x| x.lhs <= (1.0 + slack) * recorded * x.rhs && x.constant.is_finite()));
            Stability { name: e.name.clone(), recorded, constants, spread, holds: bound_ok && spread <= slack }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_and_stability() {
        let mut a = NormLedger::default();
        a.record("x", 2.0, 4.0);
        a.record("zero", 0.0, 0.0);
        let mut b = NormLedger::default();
        b.record("x", 2.04, 4.0);
        b.record("zero", 0.0, 1.0);
        let s = stability(&[&a, &b], 0.05);
        assert_eq!(s[0].recorded, 0.5);
        assert!(s[0].holds);
        assert!(s[1].holds);

        let mut c = NormLedger::default();
        c.record("x", 3.0, 4.0);
        assert!(!stability(&[&a, &c], 0.05)[0].holds);
    }
}
