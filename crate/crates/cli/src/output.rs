//! Report assembly and rendering.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Map, Value};
use vvcode::{Error, Result};

use crate::{Command, Format};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    Fail,
    Inconclusive,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Fail => 1,
            Status::Inconclusive => 3,
        }
    }

    pub fn from_verdict(v: vvcode::Verdict) -> Self {
        match v {
            vvcode::Verdict::Pass => Status::Ok,
            vvcode::Verdict::Fail => Status::Fail,
            vvcode::Verdict::Inconclusive => Status::Inconclusive,
        }
    }

    pub fn pass_if(ok: bool) -> Self {
        if ok {
            Status::Ok
        } else {
            Status::Fail
        }
    }
}

pub fn error_code(e: &Error) -> u8 {
    match e {
        Error::Simulation { .. } => 1,
        _ => 2,
    }
}

/// What a command produced.
pub struct Outcome {
    pub result: Value,
    /// Rows for CSV output; a single row built from `result` when empty.
    pub rows: Vec<Value>,
    pub status: Status,
}

impl Outcome {
    pub fn new<T: Serialize>(result: &T, status: Status) -> Self {
        Outcome { result: to_value(result), rows: Vec::new(), status }
    }

    pub fn with_rows<T: Serialize>(mut self, rows: &[T]) -> Self {
        self.rows = rows.iter().map(to_value).collect();
        self
    }
}

pub fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report values serialize")
}

/// Configuration block embedded in every report.
#[derive(Serialize, serde::Deserialize)]
pub struct StoredConfig {
    pub format: Format,
    #[serde(flatten)]
    pub command: Command,
}

pub fn report(format: Format, command: &Command, result: Value) -> Value {
    json!({
        "format_version": FORMAT_VERSION,
        "tool": { "name": "vvcode", "version": env!("CARGO_PKG_VERSION") },
        "config": to_value(&StoredConfig { format, command: command.clone() }),
        "result": result,
    })
}

pub fn render(format: Format, report: &Value, outcome: &Outcome) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        Format::Csv => {
            let rows = if outcome.rows.is_empty() { vec![outcome.result.clone()] } else { outcome.rows.clone() };
            csv_table(&rows)
        }
    }
}

/// Header from the first row's keys; nested values become JSON text.
fn csv_table(rows: &[Value]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let empty = Map::new();
    let first = rows.first().and_then(Value::as_object).unwrap_or(&empty);
    let header: Vec<&String> = first.keys().collect();
    w.write_record(header.iter().map(|s| s.as_str()))?;
    for r in rows {
        let obj = r.as_object().unwrap_or(&empty);
        w.write_record(header.iter().map(|k| cell(obj.get(*k))))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn cell(v: Option<&Value>) -> String {
    match v {
        None | Some(Value::Null) => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        Some(Value::Bool(b)) => b.to_string(),
        Some(other) => other.to_string(),
    }
}

pub fn emit(text: &str, dest: Option<&Path>) -> Result<()> {
    match dest {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_flattens_nested_values() {
        let rows = vec![json!({"a": 1, "b": [1, 2], "c": null, "d": "x,y"})];
        assert_eq!(csv_table(&rows).unwrap(), "a,b,c,d\n1,\"[1,2]\",,\"x,y\"\n");
    }

    #[test]
    fn config_round_trips() {
        let cmd = Command::Measure { dict: "d.json".into(), source: "s.json".into(), depth: 9 };
        let v = to_value(&StoredConfig { format: Format::Csv, command: cmd.clone() });
        assert_eq!(v["command"], "measure");
        let back: StoredConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back.command, cmd);
        assert_eq!(back.format, Format::Csv);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(Status::from_verdict(vvcode::Verdict::Inconclusive).code(), 3);
        assert_eq!(Status::pass_if(false).code(), 1);
        assert_eq!(error_code(&Error::Input("x".into())), 2);
    }
}
