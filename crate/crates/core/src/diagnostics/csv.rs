use std::io::{self, Write};

use super::series::entropy_density;
use crate::pde::SimTrace;

/// Header lines written at the top of every output file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutputHeader {
    pub tool: String,
    pub version: String,
    /// Hex digest of the configuration that produced the output.
    pub config_hash: String,
    pub seed: u64,
}

impl OutputHeader {
    /// Writes `<prefix> key = value` lines.
    pub fn write<W: Write>(&self, w: &mut W, prefix: &str) -> io::Result<()> {
        writeln!(w, "{prefix} tool = {} {}", self.tool, self.version)?;
        writeln!(w, "{prefix} config_hash = {}", self.config_hash)?;
        writeln!(w, "{prefix} seed = {}", self.seed)
    }
}

/// Optional reference data for the entropy and distance columns; missing
/// columns are written as `nan`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TraceColumns {
    pub z: Option<Vec<f64>>,
    pub u_inf: Option<Vec<f64>>,
    /// Order of `dist_lp_to_eq`.
    pub p: f64,
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.16e}"),
        None => "nan".into(),
    }
}

/// One row per sample and species:
/// `t,species,sup_norm,l1_mass,entropy,dist_l1_to_eq,dist_lp_to_eq`.
pub fn write_trace_csv<W: Write>(
    w: &mut W,
    header: &OutputHeader,
    trace: &SimTrace,
    cols: &TraceColumns,
) -> io::Result<()> {
    header.write(w, "#")?;
    writeln!(w, "t,species,sup_norm,l1_mass,entropy,dist_l1_to_eq,dist_lp_to_eq")?;
    let vol = trace.grid.cell_volume();
    let p = cols.p;
    for s in &trace.samples {
        for (i, (name, field)) in trace.species.iter().zip(&s.fields).enumerate() {
            let sup = field.iter().fold(0.0f64, |m, u| m.max(u.abs()));
            let l1 = field.iter().map(|u| u.abs()).sum::<f64>() * vol;
            let ent = cols
                .z
                .as_ref()
                .map(|z| field.iter().map(|&u| entropy_density(u, z[i])).sum::<f64>() * vol);
            let d1 = cols
                .u_inf
                .as_ref()
                .map(|e| field.iter().map(|u| (u - e[i]).abs()).sum::<f64>() * vol);
            let dp = cols.u_inf.as_ref().map(|e| {
                if p.is_infinite() {
                    field.iter().fold(0.0f64, |m, u| m.max((u - e[i]).abs()))
                } else {
                    (field.iter().map(|u| (u - e[i]).abs().powf(p)).sum::<f64>() * vol).powf(1.0 / p)
                }
            });
            writeln!(
                w,
                "{:.16e},{name},{:.16e},{:.16e},{},{},{}",
                s.t,
                sup,
                l1,
                cell(ent),
                cell(d1),
                cell(dp)
            )?;
        }
    }
    Ok(())
}
