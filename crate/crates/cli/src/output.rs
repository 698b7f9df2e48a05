//! Report rendering: one JSON value per run, printed as JSON, flat
//! key/value text, or two-column CSV. Keys are emitted in sorted order, so
//! output bytes are a pure function of the result value.

use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value).expect("serializable");
            s.push('\n');
            s
        }
        Format::Text => {
            let mut out = String::new();
            flatten(value, "", &mut |k, v| {
                out.push_str(&format!("{k}: {v}\n"));
            });
            out
        }
        Format::Csv => {
            let mut out = String::from("field,value\n");
            flatten(value, "", &mut |k, v| {
                out.push_str(&format!("{},{}\n", csv_escape(k), csv_escape(&v)));
            });
            out
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn flatten(value: &Value, prefix: &str, emit: &mut impl FnMut(&str, String)) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(v, &key, emit);
            }
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten(v, &format!("{prefix}[{i}]"), emit);
            }
        }
        Value::Null => emit(prefix, "null".into()),
        Value::Bool(b) => emit(prefix, b.to_string()),
        Value::Number(n) => emit(prefix, n.to_string()),
        Value::String(s) => emit(prefix, s.replace('\n', "\\n")),
    }
}
