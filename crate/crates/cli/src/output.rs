//! Record types and the CSV / JSON writers.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use cone_spectra::Branch;

use crate::{Failure, Format};

/// Fixed leading CSV columns.
pub const CSV_HEADER: [&str; 8] = [
    "alpha",
    "p",
    "n",
    "branch",
    "lambda",
    "residual_alpha",
    "residual_ode",
    "status",
];

/// One solved (or failed) problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub alpha: f64,
    pub p: f64,
    pub n: u32,
    pub branch: Branch,
    pub lambda: Option<f64>,
    pub residual_alpha: Option<f64>,
    pub residual_ode: Option<f64>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_achieved: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda_exact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Record {
    pub(crate) fn empty(alpha: f64, p: f64, n: u32, branch: Branch) -> Self {
        Record {
            alpha,
            p,
            n,
            branch,
            lambda: None,
            residual_alpha: None,
            residual_ode: None,
            status: String::new(),
            alpha_achieved: None,
            bracket: None,
            iterations: None,
            wall_time: None,
            lambda_exact: None,
            provenance: None,
            error: None,
        }
    }

    fn csv_fields(&self) -> Vec<String> {
        vec![
            fmt_f64(self.alpha),
            fmt_f64(self.p),
            self.n.to_string(),
            self.branch.to_string(),
            fmt_opt(self.lambda),
            fmt_opt(self.residual_alpha),
            fmt_opt(self.residual_ode),
            self.status.clone(),
        ]
    }
}

/// Output document: `{"meta": ..., "records": [...]}` plus optional sections.
#[derive(Debug, Deserialize)]
pub struct Document {
    pub meta: serde_json::Value,
    pub records: Vec<serde_json::Value>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// 17 significant digits.
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub(crate) struct Output {
    format: Format,
    path: Option<PathBuf>,
}

impl Output {
    pub fn new(format: Format, path: Option<PathBuf>) -> Self {
        Output { format, path }
    }

    pub fn format(&self) -> Format {
        self.format
    }

    fn sink(&self) -> Result<Box<dyn Write>, Failure> {
        match &self.path {
            Some(p) => File::create(p)
                .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
                .map_err(|e| Failure::Domain(format!("cannot create {}: {e}", p.display()))),
            None => Ok(Box::new(io::stdout().lock())),
        }
    }

    /// Records in the standard schema. Extra CSV columns are appended after
    /// the fixed ones when any record carries an exact reference value.
    pub fn write_records<M: Serialize>(
        &self,
        meta: &M,
        records: &[Record],
        extra: Option<(&str, serde_json::Value)>,
    ) -> Result<(), Failure> {
        match self.format {
            Format::Json => self.write_json(meta, records, extra),
            Format::Csv => {
                let anchors = records.iter().any(|r| r.lambda_exact.is_some());
                let mut header: Vec<&str> = CSV_HEADER.to_vec();
                if anchors {
                    header.extend(["lambda_exact", "abs_error", "provenance"]);
                }
                let rows: Vec<Vec<String>> = records
                    .iter()
                    .map(|r| {
                        let mut f = r.csv_fields();
                        if anchors {
                            let err = match (r.lambda, r.lambda_exact) {
                                (Some(l), Some(e)) => Some((l - e).abs()),
                                _ => None,
                            };
                            f.push(fmt_opt(r.lambda_exact));
                            f.push(fmt_opt(err));
                            f.push(r.provenance.clone().unwrap_or_default());
                        }
                        f
                    })
                    .collect();
                self.write_csv(&header, &rows)
            }
        }
    }

    pub fn write_json<M: Serialize, R: Serialize>(
        &self,
        meta: &M,
        records: &[R],
        extra: Option<(&str, serde_json::Value)>,
    ) -> Result<(), Failure> {
        let mut doc = serde_json::Map::new();
        doc.insert("meta".into(), to_value(meta)?);
        doc.insert("records".into(), to_value(records)?);
        if let Some((key, value)) = extra {
            doc.insert(key.into(), value);
        }
        let mut w = self.sink()?;
        serde_json::to_writer_pretty(&mut w, &doc).map_err(io_failure)?;
        writeln!(w).map_err(io_failure)?;
        w.flush().map_err(io_failure)
    }

    pub fn write_csv(&self, header: &[&str], rows: &[Vec<String>]) -> Result<(), Failure> {
        let mut w = csv::Writer::from_writer(self.sink()?);
        w.write_record(header).map_err(io_failure)?;
        for row in rows {
            w.write_record(row).map_err(io_failure)?;
        }
        w.flush().map_err(io_failure)
    }
}

fn to_value<T: Serialize + ?Sized>(v: &T) -> Result<serde_json::Value, Failure> {
    serde_json::to_value(v).map_err(|e| Failure::Numerical(format!("cannot serialize output: {e}")))
}

fn io_failure<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Domain(format!("cannot write output: {e}"))
}
