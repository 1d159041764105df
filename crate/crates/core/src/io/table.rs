use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::model::table::{Provenance, Statistic, SummaryTable};

use super::{read_to_string, write_bytes};

/// Metadata written as `# key: value` comment lines above a table.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub config: Value,
}

/// `r,value` rows; undefined values are left empty.
pub fn write_summary_table(table: &SummaryTable, header: &TableHeader, path: &Path) -> Result<()> {
    write_bytes(path, render(table, header).as_bytes())
}

pub(crate) fn render(table: &SummaryTable, header: &TableHeader) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# statistic: {}", table.statistic.name());
    let prov = serde_json::to_value(table.provenance).expect("enum serializes");
    let _ = writeln!(s, "# provenance: {}", prov.as_str().unwrap_or_default());
    if let Some(seed) = header.seed {
        let _ = writeln!(s, "# seed: {seed}");
    }
    if !header.config.is_null() {
        let _ = writeln!(s, "# config: {}", header.config);
    }
    s.push_str("r,value\n");
    for (r, v) in table.r.iter().zip(&table.values) {
        if v.is_nan() {
            let _ = writeln!(s, "{r},");
        } else {
            let _ = writeln!(s, "{r},{v}");
        }
    }
    s
}

pub fn read_summary_table(path: &Path) -> Result<(SummaryTable, TableHeader)> {
    parse(&read_to_string(path)?, &path.display().to_string())
}

pub(crate) fn parse(text: &str, origin: &str) -> Result<(SummaryTable, TableHeader)> {
    let at = |line: usize, reason: String| Error::Parse {
        location: format!("{origin}: line {line}"),
        reason,
    };
    let mut statistic = None;
    let mut provenance = Provenance::Empirical;
    let mut header = TableHeader::default();
    let (mut r, mut values) = (Vec::new(), Vec::new());
    let mut seen_columns = false;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let t = raw.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            let Some((k, v)) = c.split_once(':') else { continue };
            let v = v.trim();
            match k.trim() {
                "statistic" => {
                    statistic = Some(Statistic::parse(v).ok_or_else(|| at(line, format!("unknown statistic `{v}`")))?)
                }
                "provenance" => {
                    provenance = serde_json::from_value(Value::String(v.to_string()))
                        .map_err(|_| at(line, format!("unknown provenance `{v}`")))?
                }
                "seed" => header.seed = Some(v.parse().map_err(|_| at(line, format!("bad seed `{v}`")))?),
                "config" => header.config = serde_json::from_str(v).map_err(|e| at(line, e.to_string()))?,
                _ => {}
            }
            continue;
        }
        if !seen_columns {
            if t.replace(' ', "") != "r,value" {
                return Err(at(line, format!("expected header `r,value`, found `{t}`")));
            }
            seen_columns = true;
            continue;
        }
        let (a, b) = t
            .split_once(',')
            .ok_or_else(|| at(line, "expected two fields".to_string()))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| at(line, format!("`{s}` is not a number")));
        r.push(num(a)?);
        values.push(if b.trim().is_empty() { f64::NAN } else { num(b)? });
    }
    let statistic = statistic.ok_or_else(|| at(1, "missing `# statistic:` line".to_string()))?;
    Ok((SummaryTable::new(statistic, provenance, r, values)?, header))
}
