use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use serde_json::Value;

/// One checked item of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Item {
    pub name: String,
    pub pass: bool,
    /// False for diagnostic companions whose failure does not fail the report.
    pub asserted: bool,
    pub residual: String,
}

impl Item {
    pub fn new(name: impl Into<String>, pass: bool, residual: impl Into<String>) -> Self {
        Self { name: name.into(), pass, asserted: true, residual: residual.into() }
    }

    pub fn derived(mut self) -> Self {
        self.asserted = false;
        self
    }

    pub fn asserted(mut self, asserted: bool) -> Self {
        self.asserted = asserted;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub passed: usize,
    /// Asserted items that fail.
    pub failed: usize,
    /// Diagnostic items that fail.
    pub informational: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub engine: String,
    pub verb: String,
    pub suite: Option<String>,
    pub inputs: BTreeMap<String, String>,
    pub items: Vec<Item>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<Value>,
    pub summary: Summary,
}

impl Report {
    pub fn new(verb: &str, suite: Option<&str>) -> Self {
        Self {
            engine: format!("qweyl {}", env!("CARGO_PKG_VERSION")),
            verb: verb.to_string(),
            suite: suite.map(str::to_string),
            inputs: BTreeMap::new(),
            items: Vec::new(),
            notes: Vec::new(),
            data: None,
            summary: Summary { passed: 0, failed: 0, informational: 0 },
        }
    }

    pub fn input(mut self, key: &str, value: impl ToString) -> Self {
        self.inputs.insert(key.to_string(), value.to_string());
        self
    }

    pub fn push(&mut self, item: Item) {
        self.items.push(item);
        self.summary = summarize(&self.items);
    }

    pub fn extend(&mut self, items: impl IntoIterator<Item = Item>) {
        self.items.extend(items);
        self.summary = summarize(&self.items);
    }

    pub fn passed(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn item(&self, name: &str) -> Option<&Item> {
        self.items.iter().find(|i| i.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn summarize(items: &[Item]) -> Summary {
    Summary {
        passed: items.iter().filter(|i| i.pass).count(),
        failed: items.iter().filter(|i| !i.pass && i.asserted).count(),
        informational: items.iter().filter(|i| !i.pass && !i.asserted).count(),
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.suite {
            Some(s) => writeln!(f, "{} {s}", self.verb)?,
            None => writeln!(f, "{}", self.verb)?,
        }
        for (k, v) in &self.inputs {
            writeln!(f, "  {k} = {v}")?;
        }
        let width = self.items.iter().map(|i| i.name.chars().count()).max().unwrap_or(0);
        for i in &self.items {
            let verdict = match (i.pass, i.asserted) {
                (true, _) => "PASS",
                (false, true) => "FAIL",
                (false, false) => "note",
            };
            writeln!(f, "{verdict}  {:<width$}  {}", i.name, i.residual)?;
        }
        for n in &self.notes {
            writeln!(f, "  {n}")?;
        }
        let s = self.summary;
        writeln!(f, "{} passed, {} failed, {} informational", s.passed, s.failed, s.informational)
    }
}
