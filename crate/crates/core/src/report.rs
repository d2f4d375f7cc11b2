//! Audit rows and their two output encodings.

use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    AtMost,
    #[serde(rename = ">=")]
    AtLeast,
    /// Reported for information; passes when the value is finite.
    #[serde(rename = "report")]
    Report,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditRow {
    pub key: String,
    pub quantity: String,
    pub value: f64,
    pub relation: Relation,
    pub tolerance: f64,
    pub pass: bool,
    /// The mathematical statement being checked.
    pub claim: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<serde_json::Value>,
}

impl AuditRow {
    pub fn new(
        key: impl Into<String>,
        quantity: impl Into<String>,
        value: f64,
        relation: Relation,
        tolerance: f64,
        claim: impl Into<String>,
    ) -> Self {
        let pass = match relation {
            Relation::AtMost => value <= tolerance,
            Relation::AtLeast => value >= tolerance,
            Relation::Report => value.is_finite(),
        };
        AuditRow {
            key: key.into(),
            quantity: quantity.into(),
            value,
            relation,
            tolerance,
            pass,
            claim: claim.into(),
            detail: None,
        }
    }

    pub fn at_most(key: impl Into<String>, quantity: impl Into<String>, value: f64, tol: f64, claim: impl Into<String>) -> Self {
        Self::new(key, quantity, value, Relation::AtMost, tol, claim)
    }

    pub fn at_least(key: impl Into<String>, quantity: impl Into<String>, value: f64, tol: f64, claim: impl Into<String>) -> Self {
        Self::new(key, quantity, value, Relation::AtLeast, tol, claim)
    }

    pub fn report(key: impl Into<String>, quantity: impl Into<String>, value: f64, claim: impl Into<String>) -> Self {
        Self::new(key, quantity, value, Relation::Report, 0.0, claim)
    }

    /// A row recording a numerical failure; never passes.
    pub fn failure(key: impl Into<String>, quantity: impl Into<String>, message: impl Into<String>) -> Self {
        let mut row = Self::new(key, quantity, f64::NAN, Relation::AtMost, 0.0, "");
        row.pass = false;
        row.claim = message.into();
        row
    }

    pub fn with_detail(mut self, detail: impl Serialize) -> Self {
        self.detail = serde_json::to_value(detail).ok();
        self
    }

    /// Extra condition that must also hold for the row to pass.
    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub rows: Vec<AuditRow>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: AuditRow) {
        self.rows.push(row);
    }

    pub fn extend(&mut self, other: Report) {
        self.rows.extend(other.rows);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AuditRow> {
        self.rows.iter().filter(|r| !r.pass)
    }

    pub fn get(&self, key: &str) -> Option<&AuditRow> {
        self.rows.iter().find(|r| r.key == key)
    }

    /// Rows in canonical (key) order.
    pub fn sorted(mut self) -> Self {
        self.rows.sort_by(|a, b| a.key.cmp(&b.key).then(a.quantity.cmp(&b.quantity)));
        self
    }

    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            out.push_str(&serde_json::to_string(r).expect("rows serialize"));
            out.push('\n');
        }
        out
    }

    pub fn to_table(&self) -> String {
        let mut out = String::from("key\tquantity\tvalue\trelation\ttolerance\tpass\tclaim\n");
        for r in &self.rows {
            let rel = match r.relation {
                Relation::AtMost => "<=",
                Relation::AtLeast => ">=",
                Relation::Report => "report",
            };
            out.push_str(&format!(
                "{}\t{}\t{:e}\t{}\t{:e}\t{}\t{}\n",
                r.key,
                r.quantity,
                r.value,
                rel,
                r.tolerance,
                r.pass,
                r.claim.replace(['\t', '\n'], " ")
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relations_decide_pass() {
        assert!(AuditRow::at_most("k", "q", 1e-10, 1e-9, "").pass);
        assert!(!AuditRow::at_most("k", "q", f64::NAN, 1e-9, "").pass);
        assert!(AuditRow::at_least("k", "q", 3.0, 2.0, "").pass);
        assert!(AuditRow::report("k", "q", 5.0, "").pass);
        assert!(!AuditRow::failure("k", "q", "boom").pass);
    }

    #[test]
    fn sorted_output_is_canonical() {
        let mut r = Report::new();
        r.push(AuditRow::at_most("b", "q", 0.0, 1.0, "x"));
        r.push(AuditRow::at_most("a", "q", 0.0, 1.0, "y"));
        let r = r.sorted();
        assert_eq!(r.rows[0].key, "a");
        let lines = r.to_json_lines();
        assert_eq!(lines.lines().count(), 2);
        assert!(lines.starts_with("{\"key\":\"a\""));
        assert_eq!(r.to_table().lines().count(), 3);
    }
}
