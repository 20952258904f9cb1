//! Trace CSV: header `t,action,r,c_1,...,c_d`, one row per (round, action).
//! Rounds are 1-based; rows for action 0 may be omitted.

use std::io::{Read, Write};

use super::{EnvironmentTrace, ProblemDims, Realization};
use crate::error::{BwkError, Result};

/// Writes every materialized round of `trace`, all actions included.
pub fn write_trace_csv<W: Write>(trace: &EnvironmentTrace, out: W) -> Result<()> {
    let dims = trace.dims();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["t".to_string(), "action".to_string(), "r".to_string()];
    header.extend((1..=dims.resources).map(|i| format!("c_{i}")));
    w.write_record(&header)?;
    let mut row = Vec::with_capacity(header.len());
    for t in 1..=trace.materialized_rounds() {
        for a in 0..dims.actions {
            row.clear();
            row.push(t.to_string());
            row.push(a.to_string());
            row.push(trace.reward(t, a).to_string());
            for i in 0..dims.resources {
                row.push(trace.consumption(t, i, a).to_string());
            }
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads a trace; `T` and `K` are inferred from the largest round and action present.
pub fn read_trace_csv<R: Read>(input: R, budget: f64, realization: Realization) -> Result<EnvironmentTrace> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rdr.headers()?.clone();
    let cols: Vec<&str> = header.iter().collect();
    if cols.len() < 4 || cols[0] != "t" || cols[1] != "action" || cols[2] != "r" {
        return Err(BwkError::validation(
            "trace header must be `t,action,r,c_1,...,c_d`",
        ));
    }
    for (i, name) in cols[3..].iter().enumerate() {
        if *name != format!("c_{}", i + 1) {
            return Err(BwkError::validation(format!(
                "unexpected trace column `{name}`, expected `c_{}`",
                i + 1
            )));
        }
    }
    let d = cols.len() - 3;

    let mut rows = Vec::new();
    let mut horizon = 0usize;
    let mut actions = 1usize;
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        if rec.len() != cols.len() {
            return Err(BwkError::validation(format!(
                "row {} has {} fields, expected {}",
                line + 2,
                rec.len(),
                cols.len()
            )));
        }
        let parse_usize = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| BwkError::validation(format!("row {}: bad integer `{s}`", line + 2)))
        };
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| BwkError::validation(format!("row {}: bad number `{s}`", line + 2)))
        };
        let t = parse_usize(&rec[0])?;
        if t == 0 {
            return Err(BwkError::validation(format!("row {}: rounds are 1-based", line + 2)));
        }
        let a = parse_usize(&rec[1])?;
        let r = parse_f64(&rec[2])?;
        let c = (0..d).map(|i| parse_f64(&rec[3 + i])).collect::<Result<Vec<_>>>()?;
        horizon = horizon.max(t);
        actions = actions.max(a + 1);
        rows.push((t, a, r, c));
    }
    if horizon == 0 {
        return Err(BwkError::validation("trace has no rows"));
    }
    let dims = ProblemDims::new(horizon, actions, d, budget)?;
    let mut trace = EnvironmentTrace::zeros(dims, realization)?;
    for (t, a, r, c) in rows {
        trace.set_reward(t, a, r)?;
        for (i, v) in c.into_iter().enumerate() {
            trace.set_consumption(t, i, a, v)?;
        }
    }
    Ok(trace)
}
