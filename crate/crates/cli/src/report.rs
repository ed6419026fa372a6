//! Report assembly. A report is a list of entries that render either as a
//! human-readable table or as `name,value[,value..]` records with 17
//! significant digits.

use gaussct_core::dynamics::format_record_value;
use gaussct_core::DMatrix;

use crate::Format;

/// Up to ten decimals, trailing zeros removed, no negative zero.
pub fn short(x: f64) -> String {
    let s = format!("{:.10}", if x == 0.0 { 0.0 } else { x });
    let s = if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// Scientific notation with one decimal, e.g. `-1.0e-1`, `0.0e0`.
pub fn sci1(x: f64) -> String {
    format!("{:.1e}", if x == 0.0 { 0.0 } else { x })
}

/// Scientific notation with three decimals.
pub fn sci(x: f64) -> String {
    format!("{:.3e}", if x == 0.0 { 0.0 } else { x })
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn list(xs: impl IntoIterator<Item = f64>) -> String {
    xs.into_iter().map(short).collect::<Vec<_>>().join(", ")
}

enum Entry {
    Text(String),
    Field {
        key: String,
        human: String,
        machine: Vec<String>,
    },
    Matrix {
        key: String,
        matrix: DMatrix<f64>,
    },
}

#[derive(Default)]
pub struct Report {
    entries: Vec<Entry>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Free text; shown in tables only.
    pub fn text(&mut self, line: impl Into<String>) -> &mut Self {
        self.entries.push(Entry::Text(line.into()));
        self
    }

    /// Numeric field.
    pub fn num(&mut self, key: &str, human: impl Into<String>, values: &[f64]) -> &mut Self {
        self.entries.push(Entry::Field {
            key: key.into(),
            human: human.into(),
            machine: values.iter().map(|v| format_record_value(*v)).collect(),
        });
        self
    }

    /// Yes/no field; records carry 1 or 0.
    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.entries.push(Entry::Field {
            key: key.into(),
            human: yes_no(value).into(),
            machine: vec![if value { "1" } else { "0" }.into()],
        });
        self
    }

    /// Free-form string field.
    pub fn word(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        let value = value.into();
        self.entries.push(Entry::Field {
            key: key.into(),
            human: value.clone(),
            machine: vec![value],
        });
        self
    }

    pub fn matrix(&mut self, key: &str, matrix: &DMatrix<f64>) -> &mut Self {
        self.entries.push(Entry::Matrix {
            key: key.into(),
            matrix: matrix.clone(),
        });
        self
    }

    pub fn render(&self, format: Format) -> String {
        let mut out = String::new();
        for entry in &self.entries {
            match (entry, format) {
                (Entry::Text(line), Format::Table) => {
                    out.push_str(line);
                    out.push('\n');
                }
                (Entry::Text(_), Format::Records) => {}
                (Entry::Field { key, human, .. }, Format::Table) => {
                    out.push_str(&format!("{key}: {human}\n"));
                }
                (Entry::Field { key, machine, .. }, Format::Records) => {
                    out.push_str(&format!("{key},{}\n", machine.join(",")));
                }
                (Entry::Matrix { key, matrix }, Format::Table) => {
                    out.push_str(&format!("{key}:\n"));
                    let cells: Vec<Vec<String>> = matrix
                        .row_iter()
                        .map(|r| r.iter().map(|x| short(*x)).collect())
                        .collect();
                    let width = cells.iter().flatten().map(String::len).max().unwrap_or(1);
                    for row in cells {
                        let padded: Vec<String> =
                            row.iter().map(|c| format!("{c:>width$}")).collect();
                        out.push_str(&format!("  [{}]\n", padded.join("  ")));
                    }
                }
                (Entry::Matrix { key, matrix }, Format::Records) => {
                    for (i, row) in matrix.row_iter().enumerate() {
                        let values: Vec<String> =
                            row.iter().map(|x| format_record_value(*x)).collect();
                        out.push_str(&format!("{key}[{}],{}\n", i + 1, values.join(",")));
                    }
                }
            }
        }
        out
    }
}
