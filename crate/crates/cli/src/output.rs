use std::io::Write;

use anyhow::{Context, Result};
use branchdyn::group::GroupSpec;
use branchdyn::invariants::{DisplayBase, LogQuantity};
use serde_json::{json, Value};

use crate::args::{Common, Format};

/// A command result: the JSON payload, a flat table for CSV output, and
/// whether every mathematical check passed.
pub struct Report {
    pub result: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub passed: bool,
}

impl Report {
    pub fn new(result: Value, header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Report {
            result,
            header,
            rows,
            passed: true,
        }
    }

    pub fn with_passed(mut self, passed: bool) -> Self {
        self.passed = passed;
        self
    }
}

/// Exact value in the display base when rational there, else the symbolic
/// form.
pub fn show(q: &LogQuantity, base: DisplayBase) -> String {
    match q.in_base(base) {
        Some(c) => c.to_string(),
        None => q.to_string(),
    }
}

pub fn envelope(command: &str, common: &Common, spec: &GroupSpec, base: DisplayBase, report: &Report) -> Value {
    json!({
        "tool": "branchdyn",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "spec": {
            "label": spec.label(),
            "arity": spec.arity(),
            "definition": spec.to_json(),
            "warnings": spec.warnings(),
        },
        "conventions": {
            "letters": "1-based; vertices are words over {1..m}",
            "leaf_order": "lexicographic",
            "composition": "left to right: v^(gh) = (v^g)^h",
            "portrait_text": "`depth arity` then one 1-based label per internal vertex in breadth-first order",
            "circulant": "first row (alpha_1, ..., alpha_{p-1}, 0); each further row is the right shift of the previous",
            "display_base": base,
            "log_quantities": "exact coefficients of ln(prime); `exact_in_base` present when rational in the display base",
        },
        "caps": {
            "max_enum": common.max_enum,
            "max_states": common.max_states,
        },
        "levels": common.levels,
        "seed": common.seed,
        "passed": report.passed,
        "result": report.result,
    })
}

pub fn render(format: Format, envelope: &Value, report: &Report) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(envelope)?;
            out.push(b'\n');
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.header)?;
            for row in &report.rows {
                w.write_record(row)?;
            }
            w.into_inner().context("flushing CSV")
        }
    }
}

pub fn emit(common: &Common, bytes: &[u8]) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
