use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::statistics::IterationStatistics;

pub const CSV_HEADER: [&str; 8] = ["iteration", "mean", "std", "median", "q1", "q3", "obj_evals", "fid_evals"];

/// Shortest decimal text that parses back to exactly `x`.
pub fn format_float(x: f64) -> String {
    // Rust's `Display` for floats already prints the shortest round-trip form.
    format!("{x}")
}

/// One header line, then one row per iteration.
pub fn write_statistics_csv<W: Write>(out: W, stats: &[IterationStatistics]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for s in stats {
        w.write_record([
            s.k.to_string(),
            format_float(s.mean),
            format_float(s.std),
            format_float(s.median),
            format_float(s.q1),
            format_float(s.q3),
            s.objective_evals.to_string(),
            s.fidelity_evals.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Inverse of [`write_statistics_csv`].
pub fn read_statistics_csv<R: Read>(input: R) -> Result<Vec<IterationStatistics>> {
    let mut r = csv::Reader::from_reader(input);
    if r.headers()?.iter().ne(CSV_HEADER) {
        return Err(Error::Statistics("unexpected CSV header".into()));
    }
    let parse_err = |e: &dyn std::fmt::Display| Error::Statistics(format!("bad CSV field: {e}"));
    r.records()
        .map(|rec| {
            let rec = rec?;
            let f = |i: usize| rec[i].parse::<f64>().map_err(|e| parse_err(&e));
            let u = |i: usize| rec[i].parse::<u64>().map_err(|e| parse_err(&e));
            Ok(IterationStatistics {
                k: u(0)?,
                mean: f(1)?,
                std: f(2)?,
                median: f(3)?,
                q1: f(4)?,
                q3: f(5)?,
                objective_evals: u(6)?,
                fidelity_evals: u(7)?,
            })
        })
        .collect()
}
