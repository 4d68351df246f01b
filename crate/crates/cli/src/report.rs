//! Report assembly and emission. JSON is the primary format; CSV carries
//! the same content with config and constants folded into `#` comment
//! lines. Field order is fixed, so a fixed seed produces identical bytes.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::OutputFormat;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub experiment: String,
    pub config: Value,
    pub rows: Vec<Value>,
    pub constants: Value,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        out.push_str(&format!("# experiment={}\n", self.experiment));
        for line in comment_lines("config", &self.config)? {
            out.push_str(&line);
        }
        for line in comment_lines("constants", &self.constants)? {
            out.push_str(&line);
        }
        out.push_str(&format!("# pass={}\n", self.pass));

        let mut columns: BTreeSet<String> = BTreeSet::new();
        for row in &self.rows {
            let Value::Object(map) = row else {
                bail!("CSV export needs object rows, got {row}");
            };
            columns.extend(map.keys().cloned());
        }
        let columns: Vec<String> = columns.into_iter().collect();
        out.push_str(&columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let map = row.as_object().expect("checked above");
            let cells: Vec<String> = columns
                .iter()
                .map(|c| map.get(c).map(csv_cell).unwrap_or_default())
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn render(&self, format: OutputFormat) -> Result<String> {
        match format {
            OutputFormat::Json => self.to_json(),
            OutputFormat::Csv => self.to_csv(),
        }
    }

    /// Writes to `out` when given, otherwise prints to stdout.
    pub fn emit(&self, out: Option<&Path>, format: OutputFormat) -> Result<()> {
        let text = self.render(format)?;
        match out {
            Some(path) => fs::write(path, &text)
                .with_context(|| format!("writing report to {}", path.display()))?,
            None => print!("{text}"),
        }
        Ok(())
    }

    /// One-line summary for the terminal when the report goes to a file.
    pub fn status_line(&self) -> String {
        format!(
            "{}: {} ({} rows)",
            self.experiment,
            if self.pass { "pass" } else { "FAIL" },
            self.rows.len()
        )
    }
}

fn comment_lines(prefix: &str, value: &Value) -> Result<Vec<String>> {
    let Value::Object(map) = value else {
        bail!("{prefix} section must be a JSON object, got {value}");
    };
    Ok(map
        .iter()
        .map(|(k, v)| format!("# {prefix}.{k}={}\n", csv_cell(v)))
        .collect())
}

fn csv_cell(v: &Value) -> String {
    let raw = match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    };
    if raw.contains(',') || raw.contains('"') || raw.contains('\n') {
        format!("\"{}\"", raw.replace('"', "\"\""))
    } else {
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn sample() -> Report {
        Report {
            experiment: "demo".into(),
            config: json!({"resolution": 4, "seed": 7}),
            rows: vec![
                json!({"p": 1.5, "note": "a,b"}),
                json!({"p": 2.0, "extra": true}),
            ],
            constants: json!({"c": 1.25}),
            pass: true,
        }
    }

    #[test]
    fn json_is_stable_and_schema_shaped() {
        let r = sample();
        let a = r.to_json().unwrap();
        let b = r.to_json().unwrap();
        assert_eq!(a, b);
        let v: Value = serde_json::from_str(&a).unwrap();
        assert_eq!(v["experiment"], "demo");
        assert!(v["rows"].is_array());
        assert_eq!(v["pass"], true);
    }

    #[test]
    fn csv_quotes_commas_and_unions_columns() {
        let text = sample().to_csv().unwrap();
        assert!(text.contains("# experiment=demo\n"));
        assert!(text.contains("# config.resolution=4\n"));
        assert!(text.contains("# constants.c=1.25\n"));
        assert!(text.contains("extra,note,p\n"));
        assert!(text.contains("\"a,b\""));
    }

    #[test]
    fn csv_rejects_non_object_rows() {
        let mut r = sample();
        r.rows.push(json!(3));
        assert!(r.to_csv().is_err());
    }
}
