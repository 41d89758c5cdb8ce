//! Rendering results as CSV, JSON or aligned tables.

use std::fs;
use std::io::Write;
use std::path::Path;

use clap::ValueEnum;
use serde_json::Value;

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Table,
}

/// A result in both of its forms. Tables are rendered from the CSV.
pub struct Output {
    pub csv: Vec<u8>,
    pub json: Value,
}

impl Output {
    pub fn render(&self, format: Format) -> Result<Vec<u8>, Failure> {
        match format {
            Format::Csv => Ok(self.csv.clone()),
            Format::Json => {
                let mut out = serde_json::to_vec_pretty(&self.json)
                    .map_err(|e| Failure::Input(format!("cannot encode JSON: {e}")))?;
                out.push(b'\n');
                Ok(out)
            }
            Format::Table => table(&self.csv),
        }
    }

    pub fn emit(&self, format: Format, out: Option<&Path>) -> Result<(), Failure> {
        let bytes = self.render(format)?;
        match out {
            Some(path) => fs::write(path, bytes)
                .map_err(|e| Failure::Input(format!("{}: {e}", path.display()))),
            None => std::io::stdout()
                .write_all(&bytes)
                .map_err(|e| Failure::Input(format!("stdout: {e}"))),
        }
    }
}

/// Shortest round-trip form of a scientific-notation field.
fn humanize(field: &str) -> String {
    match field.parse::<f64>() {
        Ok(x) if field.contains('e') => {
            if x != 0.0 && !(1e-4..1e15).contains(&x.abs()) {
                format!("{x:e}")
            } else {
                format!("{x}")
            }
        }
        _ => field.to_string(),
    }
}

fn table(csv_bytes: &[u8]) -> Result<Vec<u8>, Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(csv_bytes);
    let mut rows: Vec<Vec<String>> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::Input(format!("cannot render table: {e}")))?;
        rows.push(rec.iter().map(humanize).collect());
    }
    let columns = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| {
            rows.iter()
                .filter_map(|r| r.get(c))
                .map(|f| f.chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for (i, row) in rows.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(c, f)| format!("{f:<width$}", width = widths[c]))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    Ok(out.into_bytes())
}

pub fn write_rows(header: &[&str], rows: &[Vec<String>]) -> Vec<u8> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let mut write = || -> csv::Result<()> {
        wtr.write_record(header)?;
        for row in rows {
            wtr.write_record(row)?;
        }
        wtr.flush()?;
        Ok(())
    };
    write().expect("writing to memory cannot fail");
    wtr.into_inner().expect("flushed")
}

/// `field,value` records for results that are a handful of named values.
pub fn write_summary(fields: &[(&str, String)]) -> Vec<u8> {
    let rows: Vec<Vec<String>> = fields
        .iter()
        .map(|(k, v)| vec![k.to_string(), v.clone()])
        .collect();
    write_rows(&["field", "value"], &rows)
}

pub fn read_summary(bytes: &[u8]) -> Result<Vec<(String, String)>, Failure> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr
        .headers()
        .map_err(|e| Failure::Input(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["field", "value"] {
        return Err(Failure::Input("expected header field,value".into()));
    }
    rdr.records()
        .map(|r| {
            let r = r.map_err(|e| Failure::Input(e.to_string()))?;
            Ok((r[0].to_string(), r[1].to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_round_trip() {
        let fields = [
            ("gap", "2.5000000000000000e-1".to_string()),
            ("members", "0 3".to_string()),
            ("label", "[H=-1, or so]".to_string()),
        ];
        let bytes = write_summary(&fields);
        let back = read_summary(&bytes).unwrap();
        assert_eq!(back.len(), 3);
        assert_eq!(back[2], ("label".to_string(), "[H=-1, or so]".to_string()));
    }

    #[test]
    fn tables_align_and_shorten() {
        let csv = b"lambda,probability\n-2.0000000000000000e0,2.5000000000000000e-1\n\
                    0.0000000000000000e0,1.2500000000000000e-17\n";
        let t = String::from_utf8(table(csv).unwrap()).unwrap();
        assert_eq!(
            t,
            "lambda  probability\n------  -----------\n-2      0.25\n0       1.25e-17\n"
        );
    }
}
