//! Record output: JSON Lines with a leading `"v":1`, or aligned tables.

use std::io::Write;

use serde::Serialize;
use serde_json::Value;

use crate::error::CliResult;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Versioned<'a, T: Serialize> {
    v: u32,
    #[serde(flatten)]
    body: &'a T,
}

/// Serializes one record as a single JSON line, schema version first.
pub fn to_line<T: Serialize>(record: &T) -> serde_json::Result<String> {
    serde_json::to_string(&Versioned {
        v: SCHEMA_VERSION,
        body: record,
    })
}

pub struct Output<W: Write> {
    out: W,
    pretty: bool,
    held: Vec<Value>,
}

impl<W: Write> Output<W> {
    pub fn new(out: W, pretty: bool) -> Self {
        Output {
            out,
            pretty,
            held: Vec::new(),
        }
    }

    pub fn emit<T: Serialize>(&mut self, record: &T) -> CliResult<()> {
        if self.pretty {
            self.held
                .push(serde_json::to_value(record).map_err(std::io::Error::from)?);
        } else {
            let line = to_line(record).map_err(std::io::Error::from)?;
            writeln!(self.out, "{line}")?;
            self.out.flush()?;
        }
        Ok(())
    }

    /// Flushes held records; in table mode this is when they are printed.
    pub fn finish(mut self) -> CliResult<W> {
        if self.pretty {
            let text = render_tables(&self.held);
            self.out.write_all(text.as_bytes())?;
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

fn cell(v: &Value) -> String {
    const WIDE: usize = 40;
    match v {
        Value::String(s) => s.clone(),
        Value::Null => "-".into(),
        Value::Array(items) => {
            let s = v.to_string();
            if s.len() <= WIDE {
                s
            } else {
                format!("[{} items]", items.len())
            }
        }
        Value::Object(fields) => {
            let s = v.to_string();
            if s.len() <= WIDE {
                s
            } else {
                format!("{{{} fields}}", fields.len())
            }
        }
        other => other.to_string(),
    }
}

fn columns(v: &Value) -> Vec<String> {
    match v {
        Value::Object(map) => map.keys().cloned().collect(),
        _ => vec!["value".into()],
    }
}

/// Consecutive records with the same fields share one table.
pub fn render_tables(records: &[Value]) -> String {
    let mut text = String::new();
    let mut start = 0;
    while start < records.len() {
        let cols = columns(&records[start]);
        let end = (start..records.len())
            .find(|&i| columns(&records[i]) != cols)
            .unwrap_or(records.len());
        let rows: Vec<Vec<String>> = records[start..end]
            .iter()
            .map(|r| match r {
                Value::Object(map) => cols.iter().map(|c| cell(&map[c])).collect(),
                other => vec![cell(other)],
            })
            .collect();
        let widths: Vec<usize> = cols
            .iter()
            .enumerate()
            .map(|(j, c)| {
                rows.iter()
                    .map(|r| r[j].chars().count())
                    .chain([c.len()])
                    .max()
                    .unwrap()
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        if !text.is_empty() {
            text.push('\n');
        }
        text += &line(&cols);
        text += &line(&widths.iter().map(|&w| "-".repeat(w)).collect::<Vec<_>>());
        for row in &rows {
            text += &line(row);
        }
        start = end;
    }
    text
}
