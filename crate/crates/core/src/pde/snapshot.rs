use std::io::{BufRead, Write};

use super::{Grid, PdeError};

/// One species field at one time, as stored on disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub species: String,
    pub t: f64,
    pub lengths: Vec<f64>,
    pub cells: Vec<usize>,
    pub values: Vec<f64>,
}

fn io(e: std::io::Error) -> PdeError {
    PdeError::Io(e.to_string())
}

/// Writes a `rdnet-field/1` document: header lines, then one grid row per
/// line (x fastest), every value with 17 significant digits.
pub fn write_snapshot<W: Write>(
    w: &mut W,
    grid: &Grid,
    species: &str,
    t: f64,
    values: &[f64],
) -> Result<(), PdeError> {
    if values.len() != grid.len() {
        return Err(PdeError::ShapeMismatch(format!(
            "{} values for {} cells",
            values.len(),
            grid.len()
        )));
    }
    let join_f = |v: &[f64]| v.iter().map(|x| format!("{x:.16e}")).collect::<Vec<_>>().join(" ");
    writeln!(w, "rdnet-field/1").map_err(io)?;
    writeln!(w, "species {species}").map_err(io)?;
    writeln!(w, "t {t:.16e}").map_err(io)?;
    writeln!(w, "dim {}", grid.dim()).map_err(io)?;
    writeln!(w, "lengths {}", join_f(grid.lengths())).map_err(io)?;
    let cells: Vec<String> = grid.cells().iter().map(|c| c.to_string()).collect();
    writeln!(w, "cells {}", cells.join(" ")).map_err(io)?;
    for row in values.chunks(grid.nx()) {
        writeln!(w, "{}", join_f(row)).map_err(io)?;
    }
    Ok(())
}

pub fn read_snapshot<R: BufRead>(r: R) -> Result<Snapshot, PdeError> {
    let bad = |msg: &str| PdeError::Io(format!("malformed snapshot: {msg}"));
    let mut lines = r.lines();
    let mut next = || -> Result<String, PdeError> {
        lines.next().ok_or_else(|| bad("truncated"))?.map_err(io)
    };
    // leading `#` lines are the output header and are skipped
    let mut first = next()?;
    while first.starts_with('#') {
        first = next()?;
    }
    if first.trim() != "rdnet-field/1" {
        return Err(bad("missing rdnet-field/1 header"));
    }
    let mut field = |key: &str| -> Result<String, PdeError> {
        let line = next()?;
        line.strip_prefix(key)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| bad(&format!("expected `{key}`")))
    };
    let species = field("species")?;
    let t: f64 = field("t")?.trim().parse().map_err(|_| bad("t"))?;
    let _dim = field("dim")?;
    let lengths: Vec<f64> = field("lengths")?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad("lengths")))
        .collect::<Result<_, _>>()?;
    let cells: Vec<usize> = field("cells")?
        .split_whitespace()
        .map(|s| s.parse().map_err(|_| bad("cells")))
        .collect::<Result<_, _>>()?;
    let total: usize = cells.iter().product();
    let mut values = Vec::with_capacity(total);
    while values.len() < total {
        let line = next()?;
        for tok in line.split_whitespace() {
            values.push(tok.parse().map_err(|_| bad("value"))?);
        }
    }
    if values.len() != total {
        return Err(bad("value count"));
    }
    Ok(Snapshot {
        species,
        t,
        lengths,
        cells,
        values,
    })
}
