//! Row-by-row comparison of two CSV reports of the same schema.

use std::path::Path;

use serde::Serialize;

use crate::error::{CliError, CliResult};

/// Value columns tried, in order, when none is named.
const VALUE_COLUMNS: [&str; 5] = ["error", "resid", "objective", "mean_rmse", "rank"];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RowComparison {
    pub key: String,
    pub a: f64,
    pub b: f64,
    /// `b / a`; 1 when both vanish.
    pub ratio: f64,
    pub regression: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Comparison {
    pub key_column: String,
    pub value_column: String,
    pub factor: f64,
    pub rows: Vec<RowComparison>,
}

impl Comparison {
    pub fn regressions(&self) -> usize {
        self.rows.iter().filter(|r| r.regression).count()
    }

    /// CSV `key,a,b,ratio,regression`.
    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::io("writing comparison", std::io::Error::other(e.to_string()));
        w.write_record([self.key_column.as_str(), "a", "b", "ratio", "regression"]).map_err(io)?;
        for r in &self.rows {
            w.write_record([
                r.key.clone(),
                format!("{:e}", r.a),
                format!("{:e}", r.b),
                format!("{:e}", r.ratio),
                r.regression.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes =
            w.into_inner().map_err(|e| CliError::io("writing comparison", std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

struct Table {
    headers: Vec<String>,
    rows: Vec<Vec<String>>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let mut rdr = csv::Reader::from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read report {}: {e}", path.display())))?;
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        .iter()
        .map(String::from)
        .collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<Vec<Vec<String>>, _>>()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    if headers.is_empty() || rows.is_empty() {
        return Err(CliError::Usage(format!("report {} is empty", path.display())));
    }
    Ok(Table { headers, rows })
}

/// Compares report `b` against baseline `a`: rows are matched on the first
/// column and a ratio `b/a` above `factor` is flagged.
pub fn compare(a: &Path, b: &Path, factor: f64, column: Option<&str>) -> CliResult<Comparison> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(CliError::Usage(format!("factor must be positive, got {factor}")));
    }
    let (ta, tb) = (read_table(a)?, read_table(b)?);
    if ta.headers != tb.headers {
        return Err(CliError::Usage(format!("schema mismatch: {:?} vs {:?}", ta.headers, tb.headers)));
    }
    let value_column = match column {
        Some(c) => c.to_string(),
        None => VALUE_COLUMNS
            .iter()
            .find(|c| ta.headers.iter().any(|h| h == *c))
            .map(|c| c.to_string())
            .ok_or_else(|| CliError::Usage(format!("no comparable column in {:?}; pass --column", ta.headers)))?,
    };
    let vi = ta
        .headers
        .iter()
        .position(|h| *h == value_column)
        .ok_or_else(|| CliError::Usage(format!("column {value_column:?} not in {:?}", ta.headers)))?;
    if vi == 0 {
        return Err(CliError::Usage("the first column is the row key and cannot be compared".into()));
    }
    let number = |s: &str, path: &Path| {
        s.trim().parse::<f64>().map_err(|_| CliError::Usage(format!("{}: {s:?} is not a number", path.display())))
    };
    let mut rows = Vec::new();
    for ra in &ta.rows {
        let Some(rb) = tb.rows.iter().find(|rb| rb[0] == ra[0]) else { continue };
        let (va, vb) = (number(&ra[vi], a)?, number(&rb[vi], b)?);
        let ratio = if va == vb {
            1.0
        } else if va == 0.0 {
            f64::INFINITY
        } else {
            vb / va
        };
        rows.push(RowComparison { key: ra[0].clone(), a: va, b: vb, ratio, regression: ratio > factor });
    }
    if rows.is_empty() {
        return Err(CliError::Usage("the reports share no row keys".into()));
    }
    Ok(Comparison { key_column: ta.headers[0].clone(), value_column, factor, rows })
}
