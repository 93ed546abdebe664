//! Structured reports: an ordered JSON object, rendered as JSON or as indented text.

use std::fmt::Write;

use clap::ValueEnum;
use serde_json::{Map, Value};

pub const REPORT_FORMAT: &str = "regsparse-report v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, Default)]
pub struct Report {
    root: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        let mut root = Map::new();
        root.insert("format".into(), REPORT_FORMAT.into());
        root.insert("command".into(), command.into());
        Self { root }
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.root.insert(key.to_string(), value.into());
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => {
                let mut s =
                    serde_json::to_string_pretty(&self.root).expect("report values serialize");
                s.push('\n');
                s
            }
            Format::Text => {
                let mut s = String::new();
                text_object(&mut s, &self.root, 0);
                s
            }
        }
    }
}

/// Key/value pairs from the core crates' `to_record` methods.
pub fn record<K: AsRef<str>>(pairs: impl IntoIterator<Item = (K, String)>) -> Value {
    let mut m = Map::new();
    for (k, v) in pairs {
        m.insert(k.as_ref().to_string(), scalar_value(v));
    }
    Value::Object(m)
}

/// A number when `s` parses as one, otherwise the string (exact rationals stay
/// strings such as `7/2`).
pub fn scalar_value(s: String) -> Value {
    s.parse::<i64>()
        .map(Value::from)
        .or_else(|_| s.parse::<f64>().map(Value::from))
        .unwrap_or(Value::String(s))
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Null => Some("-".into()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Number(n) => Some(n.to_string()),
        Value::String(s) if !s.contains('\n') => Some(s.clone()),
        _ => None,
    }
}

fn text_object(out: &mut String, m: &Map<String, Value>, depth: usize) {
    let pad = "  ".repeat(depth);
    for (k, v) in m {
        if let Some(s) = scalar(v) {
            let _ = writeln!(out, "{pad}{k}: {s}");
            continue;
        }
        match v {
            Value::String(s) => {
                let _ = writeln!(out, "{pad}{k}:");
                for line in s.lines() {
                    let _ = writeln!(out, "{pad}  {line}");
                }
            }
            Value::Object(inner) => {
                let _ = writeln!(out, "{pad}{k}:");
                text_object(out, inner, depth + 1);
            }
            Value::Array(items) => {
                if let Some(flat) = items.iter().map(scalar).collect::<Option<Vec<_>>>() {
                    let _ = writeln!(out, "{pad}{k}: [{}]", flat.join(", "));
                    continue;
                }
                let _ = writeln!(out, "{pad}{k}:");
                for item in items {
                    match item {
                        Value::Object(o) if o.values().all(|x| scalar(x).is_some()) => {
                            let fields: Vec<String> = o
                                .iter()
                                .map(|(a, b)| format!("{a}={}", scalar(b).unwrap_or_default()))
                                .collect();
                            let _ = writeln!(out, "{pad}  - {}", fields.join(" "));
                        }
                        Value::Object(o) => {
                            let _ = writeln!(out, "{pad}  -");
                            text_object(out, o, depth + 2);
                        }
                        other => {
                            let _ = writeln!(
                                out,
                                "{pad}  - {}",
                                scalar(other).unwrap_or_else(|| other.to_string())
                            );
                        }
                    }
                }
            }
            _ => unreachable!("scalars handled above"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn text_rendering_keeps_insertion_order() {
        let mut r = Report::new("tile");
        r.set("zeta", 1);
        r.set("alpha", json!({"b": 2, "a": [1, 2]}));
        r.set("rows", json!([{"x": 1, "y": "p"}]));
        r.set("plan", "line one\nline two");
        let text = r.render(Format::Text);
        assert_eq!(
            text,
            "format: regsparse-report v1\ncommand: tile\nzeta: 1\nalpha:\n  b: 2\n  a: [1, 2]\nrows:\n  - x=1 y=p\nplan:\n  line one\n  line two\n"
        );
    }

    #[test]
    fn records_keep_numbers_numeric() {
        let v = record([
            ("lambda", "7".to_string()),
            ("cost", "7/2".to_string()),
            ("f", "0.5".to_string()),
        ]);
        assert_eq!(v, json!({"lambda": 7, "cost": "7/2", "f": 0.5}));
    }

    #[test]
    fn json_is_stable() {
        let mut r = Report::new("analyze");
        r.set("verdict", "regular");
        assert_eq!(r.render(Format::Json), r.clone().render(Format::Json));
        assert!(r
            .render(Format::Json)
            .starts_with("{\n  \"format\": \"regsparse-report v1\""));
    }
}
