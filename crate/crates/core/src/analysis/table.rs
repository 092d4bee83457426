use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use super::ModelRecord;
use crate::error::{Error, Result};

/// Shortest rendering of `v` at 6 significant digits: fixed notation for
/// decimal exponents in `-4..6`, scientific otherwise, trailing zeros
/// trimmed.
pub fn format_sig6(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let sci = format!("{v:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let fixed = format!("{v:.*}", (5 - exp) as usize);
        trim_zeros(&fixed).to_string()
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RenderedTable {
    pub csv: String,
    pub json: String,
}

#[derive(Serialize)]
struct JsonRow<'a> {
    model: &'a str,
    source: &'a str,
    values: BTreeMap<&'a str, f64>,
}

/// Records sorted by `sort_by` descending (ties by model name ascending)
/// as CSV with a `model,source,<columns>` header, plus the same rows as
/// JSON. Numbers carry 6 significant digits in both.
pub fn render_table(records: &[ModelRecord], columns: &[String], sort_by: &str) -> Result<RenderedTable> {
    let mut rows: Vec<(&ModelRecord, Vec<f64>, f64)> = Vec::with_capacity(records.len());
    for r in records {
        let values = columns.iter().map(|c| r.require(c)).collect::<Result<Vec<f64>>>()?;
        rows.push((r, values, r.require(sort_by)?));
    }
    rows.sort_by(|a, b| b.2.total_cmp(&a.2).then_with(|| a.0.model.cmp(&b.0.model)));

    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["model".to_string(), "source".to_string()];
    header.extend(columns.iter().cloned());
    writer.write_record(&header)?;
    let mut json_rows = Vec::with_capacity(rows.len());
    for (record, values, _) in &rows {
        let text: Vec<String> = values.iter().map(|&v| format_sig6(v)).collect();
        let mut line = vec![record.model.clone(), record.source.clone()];
        line.extend(text.iter().cloned());
        writer.write_record(&line)?;
        json_rows.push(JsonRow {
            model: &record.model,
            source: &record.source,
            values: columns
                .iter()
                .zip(&text)
                .map(|(c, t)| (c.as_str(), t.parse::<f64>().expect("formatted number")))
                .collect(),
        });
    }
    let csv = writer
        .into_inner()
        .map_err(|e| Error::Invalid(format!("csv buffer: {e}")))?;
    let mut json = serde_json::to_string_pretty(&json_rows)?;
    json.push('\n');
    Ok(RenderedTable {
        csv: String::from_utf8(csv).expect("csv output is UTF-8"),
        json,
    })
}

/// Writes the CSV to `path` and its JSON twin next to it with a `.json`
/// extension.
pub fn emit_table(records: &[ModelRecord], columns: &[String], sort_by: &str, path: &Path) -> Result<()> {
    let table = render_table(records, columns, sort_by)?;
    std::fs::write(path, &table.csv).map_err(|e| Error::io(path, e))?;
    let json_path = path.with_extension("json");
    std::fs::write(&json_path, &table.json).map_err(|e| Error::io(&json_path, e))?;
    Ok(())
}
