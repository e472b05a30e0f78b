use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde_json::{json, Value};

use crate::CliError;

/// Twelve significant digits.
pub fn num(x: f64) -> String {
    // adding +0 folds -0 into 0
    format!("{:.11e}", x + 0.0)
}

/// `re+imi` at twelve significant digits, or just `re` when the value is real.
pub fn cnum(z: Complex64) -> String {
    if z.im == 0.0 {
        return num(z.re);
    }
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{}{sign}{}i", num(z.re), num(z.im))
}

/// JSON number rounded to twelve significant digits; non-finite values become `null`.
pub fn jnum(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    let rounded: f64 = num(x).parse().unwrap_or(x) + 0.0;
    json!(rounded)
}

pub fn jcomplex(z: Complex64) -> Value {
    json!({ "re": jnum(z.re), "im": jnum(z.im) })
}

pub fn jmatrix(m: &dirac_point::Mat2) -> Value {
    Value::Array(
        m.m.iter()
            .map(|row| Value::Array(row.iter().map(|&z| jcomplex(z)).collect()))
            .collect(),
    )
}

/// Accumulates CSV lines; numbers are pre-formatted by the caller.
pub struct Table {
    text: String,
}

impl Table {
    pub fn new(header: &[&str], seed: Option<u64>) -> Self {
        let mut text = String::new();
        if let Some(seed) = seed {
            text.push_str(&format!("# seed={seed}\n"));
        }
        text.push_str(&header.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn pretty(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when absent.
pub fn emit(text: &str, path: Option<&Path>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| {
            CliError::Validation(format!("field `output`: cannot write {}: {e}", p.display()))
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}
