//! Deterministic JSON and CSV serialization.
//!
//! Floats are written with 12 significant digits in a fixed scientific
//! format so output checksums are stable across platforms.

use std::fmt::Write as _;

/// JSON value with checksum-stable number formatting.
#[derive(Debug, Clone)]
pub enum JVal {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<JVal>),
    Obj(Vec<(String, JVal)>),
}

impl JVal {
    pub fn obj(fields: Vec<(&str, JVal)>) -> JVal {
        JVal::Obj(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn nums(values: &[f64]) -> JVal {
        JVal::Arr(values.iter().map(|&v| JVal::Num(v)).collect())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out);
        out.push('\n');
        out
    }

    fn write(&self, out: &mut String) {
        match self {
            JVal::Null => out.push_str("null"),
            JVal::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            JVal::Int(i) => {
                let _ = write!(out, "{i}");
            }
            JVal::Num(v) => out.push_str(&format_f64(*v)),
            JVal::Str(s) => {
                out.push('"');
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        ch if (ch as u32) < 0x20 => {
                            let _ = write!(out, "\\u{:04x}", ch as u32);
                        }
                        ch => out.push(ch),
                    }
                }
                out.push('"');
            }
            JVal::Arr(items) => {
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    item.write(out);
                }
                out.push(']');
            }
            JVal::Obj(fields) => {
                out.push('{');
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    JVal::Str(k.clone()).write(out);
                    out.push(':');
                    v.write(out);
                }
                out.push('}');
            }
        }
    }
}

/// 12 significant digits, scientific notation, stable across platforms.
pub fn format_f64(v: f64) -> String {
    if v == 0.0 {
        return "0.0".to_string();
    }
    if !v.is_finite() {
        return "null".to_string();
    }
    format!("{v:.11e}")
}

/// Render a CSV table with a header row.
pub fn render_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|&v| format_f64(v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
