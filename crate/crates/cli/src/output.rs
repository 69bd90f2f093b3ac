use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde_json::{Map, Value};

use crate::Format;

/// Flattens nested objects into dotted keys; arrays become JSON strings.
fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                flatten(&key, x, out);
            }
        }
        other => {
            out.insert(prefix.to_string(), other.clone());
        }
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(_) | Value::Object(_) => v.to_string(),
        other => other.to_string(),
    }
}

/// CSV with one line per record; the header is the union of flattened keys
/// in first-seen order.
pub fn to_csv(records: &[Value]) -> Result<String> {
    let flat: Vec<Map<String, Value>> = records
        .iter()
        .map(|r| {
            let mut m = Map::new();
            flatten("", r, &mut m);
            m
        })
        .collect();
    let mut header: Vec<String> = Vec::new();
    for m in &flat {
        for k in m.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for m in &flat {
        w.write_record(header.iter().map(|k| m.get(k).map(cell).unwrap_or_default()))?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render(records: &[Value], format: Format) -> Result<String> {
    match format {
        Format::Json => {
            let v = if records.len() == 1 {
                records[0].clone()
            } else {
                Value::Array(records.to_vec())
            };
            Ok(serde_json::to_string_pretty(&v)? + "\n")
        }
        Format::Csv => to_csv(records),
    }
}

/// Prints to stdout.
pub fn emit(records: &[Value], format: Format) -> Result<()> {
    let text = render(records, format)?;
    std::io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn csv_flattens_nested_records() {
        let rows = [json!({"a": 1, "b": {"c": 2.5, "d": [1, 2]}}), json!({"a": 3, "e": null})];
        let text = to_csv(&rows).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "a,b.c,b.d,e");
        assert_eq!(lines[1], "1,2.5,\"[1,2]\",");
        assert_eq!(lines[2], "3,,,");
    }

    #[test]
    fn json_single_record_is_unwrapped() {
        let text = render(&[json!({"x": 1})], Format::Json).unwrap();
        assert!(text.trim_start().starts_with('{'));
    }
}
