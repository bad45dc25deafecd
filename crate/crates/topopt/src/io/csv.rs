//! CSV iteration log. Floats are written with the shortest representation
//! that round-trips, so re-parsing a log reproduces the history exactly.

use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::optimizer::IterationRecord;

pub const HEADER: &str = "iter,F,vol_frac,Gv,GvMaxEx,LagGv,LsfDiffMax,AbsTd1,cg_iters,wall_ms";

pub fn write_iteration_log_to(history: &[IterationRecord], mut w: impl Write) -> Result<()> {
    writeln!(w, "{HEADER}")?;
    for r in history {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.iter,
            r.compliance,
            r.vol_frac,
            r.gv,
            r.gv_max_ex,
            r.lag_gv,
            r.lsf_diff_max,
            r.abs_td1,
            r.cg_iters,
            r.wall_ms
        )?;
    }
    Ok(())
}

pub fn write_iteration_log(history: &[IterationRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    write_iteration_log_to(history, &mut w)?;
    w.flush()?;
    Ok(())
}

fn field_err(line: usize, what: &str) -> Error {
    Error::Config {
        key: "csv".into(),
        message: format!("line {line}: {what}"),
    }
}

pub fn read_iteration_log(path: &Path) -> Result<Vec<IterationRecord>> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines();
    match lines.next() {
        Some(Ok(h)) if h == HEADER => {}
        _ => return Err(field_err(1, "missing or unexpected header")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let lineno = idx + 2;
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 10 {
            return Err(field_err(lineno, "expected 10 columns"));
        }
        let f = |i: usize| -> Result<f64> {
            cols[i]
                .parse::<f64>()
                .map_err(|_| field_err(lineno, "bad float"))
        };
        out.push(IterationRecord {
            iter: cols[0]
                .parse::<usize>()
                .map_err(|_| field_err(lineno, "bad iter"))?,
            compliance: f(1)?,
            vol_frac: f(2)?,
            gv: f(3)?,
            gv_max_ex: f(4)?,
            lag_gv: f(5)?,
            lsf_diff_max: f(6)?,
            abs_td1: f(7)?,
            cg_iters: cols[8]
                .parse::<usize>()
                .map_err(|_| field_err(lineno, "bad cg_iters"))?,
            wall_ms: f(9)?,
        });
    }
    Ok(out)
}
