use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};

pub type Meta = BTreeMap<String, String>;

pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// `prefix key=value` lines.
pub fn comment_header(out: &mut dyn Write, prefix: &str, meta: &Meta) -> io::Result<()> {
    for (k, v) in meta {
        writeln!(out, "{prefix} {k}={v}")?;
    }
    Ok(())
}

pub fn meta_json(meta: &Meta) -> Value {
    Value::Object(meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect())
}

/// CSV body preceded by `# key=value` comments.
pub fn write_csv<S: AsRef<str>>(
    out: &mut dyn Write,
    meta: &Meta,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<S>>,
) -> io::Result<()> {
    comment_header(out, "#", meta)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|s| s.as_ref()))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON document with `meta` as its first key.
pub fn write_json(out: &mut dyn Write, meta: &Meta, mut body: Value) -> io::Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), meta_json(meta));
    if let Value::Object(fields) = &mut body {
        doc.append(fields);
    }
    serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
    writeln!(out)
}

pub fn write_json_line(out: &mut dyn Write, value: &Value) -> io::Result<()> {
    serde_json::to_writer(&mut *out, value)?;
    writeln!(out)
}

pub fn meta_line(meta: &Meta) -> Value {
    json!({ "meta": meta_json(meta) })
}

/// Shortest round-trip form, in exponent notation when very small or
/// large. Non-finite values print as empty CSV cells.
pub fn cell(x: f64) -> String {
    if !x.is_finite() {
        String::new()
    } else if x != 0.0 && !(1e-4..1e15).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// Non-finite values become `null`.
pub fn num(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}
