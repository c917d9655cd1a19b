//! Low-rank solvers for tensor-structured linear systems `A u = b`:
//! Kronecker-structured operators acting on TT tensors, truncated Richardson
//! iteration and greedy rank-one corrections.

mod kron;
mod pgd;
mod richardson;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use kron::{assemble_from_affine, KroneckerOperator, ModeMatrix};
pub use pgd::{greedy_rank_one, PgdOptions, PgdOutcome};
pub use richardson::{
    auto_step, estimate_spectrum, truncated_richardson, RichardsonOptions, RichardsonOutcome, Spectrum, StepSize,
    StopReason,
};

use crate::error::{Error, Result};

/// One record per solver iteration (or per rank-one correction).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub ranks: Vec<usize>,
    /// `‖A u − b‖`.
    pub residual: f64,
    /// `J(u) = ‖A u − b‖²`.
    pub functional: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveTrace {
    pub records: Vec<IterationRecord>,
}

impl SolveTrace {
    pub fn residuals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.residual).collect()
    }

    pub fn functionals(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.functional).collect()
    }

    /// CSV with header `k,ranks,resid,J,seconds`; ranks are `;`-separated.
    /// Without `timings` the seconds column is 0 for reproducible bytes.
    pub fn write_csv<W: Write>(&self, out: W, timings: bool) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "ranks", "resid", "J", "seconds"])?;
        for r in &self.records {
            let ranks = r.ranks.iter().map(usize::to_string).collect::<Vec<_>>().join(";");
            let secs = if timings { r.seconds } else { 0.0 };
            w.write_record([
                r.iteration.to_string(),
                ranks,
                format!("{:e}", r.residual),
                format!("{:e}", r.functional),
                format!("{secs:e}"),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != ["k", "ranks", "resid", "J", "seconds"] {
            return Err(Error::Format(format!("unexpected trace header {headers:?}")));
        }
        let bad = |what: &str, v: &str| Error::Format(format!("bad {what} {v:?}"));
        let mut trace = SolveTrace::default();
        for row in rdr.records() {
            let row = row?;
            let num = |i: usize, what: &str| row[i].trim().parse::<f64>().map_err(|_| bad(what, &row[i]));
            let ranks = if row[1].is_empty() {
                vec![]
            } else {
                row[1].split(';').map(|s| s.parse::<usize>().map_err(|_| bad("rank", s))).collect::<Result<Vec<_>>>()?
            };
            trace.records.push(IterationRecord {
                iteration: row[0].trim().parse().map_err(|_| bad("iteration", &row[0]))?,
                ranks,
                residual: num(2, "residual")?,
                functional: num(3, "functional")?,
                seconds: num(4, "seconds")?,
            });
        }
        Ok(trace)
    }
}
