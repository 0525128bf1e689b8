use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub label: String,
    pub value: f64,
    pub tolerance: f64,
    pub residual: f64,
    pub pass: bool,
}

impl Row {
    /// A row that passes when `residual ≤ tolerance`.
    pub fn check(label: impl Into<String>, value: f64, residual: f64, tolerance: f64) -> Row {
        Row {
            label: label.into(),
            value,
            tolerance,
            residual,
            pass: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: String,
    pub params: BTreeMap<String, Value>,
    pub rows: Vec<Row>,
    pub status: Status,
    pub diagnostics: Vec<String>,
    /// Exit code of the first error, when `status` is `Error`.
    #[serde(skip)]
    pub error_code: Option<u8>,
}

impl RunReport {
    pub fn new(command: &str) -> Self {
        RunReport {
            command: command.to_string(),
            params: BTreeMap::new(),
            rows: Vec::new(),
            status: Status::Pass,
            diagnostics: Vec::new(),
            error_code: None,
        }
    }

    pub fn param(&mut self, key: &str, value: impl Into<Value>) {
        self.params.insert(key.to_string(), value.into());
    }

    pub fn push(&mut self, row: Row) {
        if !row.pass && self.status == Status::Pass {
            self.status = Status::Fail;
        }
        self.rows.push(row);
    }

    pub fn note(&mut self, message: impl Into<String>) {
        self.diagnostics.push(message.into());
    }

    /// Records a check that could not be carried out.
    pub fn error(&mut self, code: u8, message: impl Into<String>) {
        self.status = Status::Error;
        self.error_code.get_or_insert(code);
        self.note(message);
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}: {:?}\n", self.command, self.status);
        for r in &self.rows {
            let mark = if r.pass { "ok  " } else { "FAIL" };
            let _ = writeln!(
                s,
                "  {mark} {:<60} value {:>24} residual {:.3e} (tol {:.1e})",
                r.label,
                num(r.value),
                r.residual,
                r.tolerance
            );
        }
        for d in &self.diagnostics {
            let _ = writeln!(s, "  note: {d}");
        }
        s
    }
}

/// 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => std::fs::write(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}
