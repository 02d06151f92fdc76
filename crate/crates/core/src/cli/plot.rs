//! Whitespace-separated column files for external plotting tools.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::dynamics::{Cloud, GapSeries};
use crate::error::{Error, Result};
use crate::integrate::TrajectoryRecord;
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotStyle {
    /// `t E dissipation residual`
    Energy,
    /// `t gap_Heps gap_H0`
    Gap,
    /// `norm u_mid v_mid`, one row per point
    Cloud,
}

pub enum PlotInput<'a> {
    Trajectory(&'a TrajectoryRecord),
    Gap(&'a GapSeries),
    /// Midpoint values are read from the stored states.
    Cloud(&'a Cloud, &'a Mesh),
}

pub fn emit_plot_data(input: PlotInput<'_>, style: PlotStyle, path: &Path) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(f);
    let io = |e| Error::io(path, e);
    match (input, style) {
        (PlotInput::Trajectory(rec), PlotStyle::Energy) => {
            writeln!(out, "# t E dissipation residual").map_err(io)?;
            for (i, t) in rec.times.iter().enumerate() {
                // the step ending at sample i; zeros at t = 0
                let (d, r) = if i == 0 {
                    (0.0, 0.0)
                } else {
                    let k = ((t / rec.dt).round() as usize).saturating_sub(1);
                    (rec.dissipation[k], rec.balance_residuals[k])
                };
                writeln!(out, "{t:e} {:e} {d:e} {r:e}", rec.energies[i].total).map_err(io)?;
            }
        }
        (PlotInput::Gap(s), PlotStyle::Gap) => {
            writeln!(out, "# t gap_Heps gap_H0  (eps = {:e})", s.eps).map_err(io)?;
            for ((t, a), b) in s.times.iter().zip(&s.lifted).zip(&s.projected) {
                writeln!(out, "{t:e} {a:e} {b:e}").map_err(io)?;
            }
        }
        (PlotInput::Cloud(c, mesh), PlotStyle::Cloud) => {
            if c.states.len() != c.points.len() {
                return Err(Error::KindMismatch("cloud plot needs the sampled states".into()));
            }
            writeln!(out, "# norm u_mid v_mid").map_err(io)?;
            let mid = mesh.n_nodes() / 2;
            for (n, s) in c.norms().iter().zip(&c.states) {
                writeln!(out, "{n:e} {:e} {:e}", s.u().0[mid], s.v().0[mid]).map_err(io)?;
            }
        }
        _ => return Err(Error::KindMismatch(format!("plot style {style:?} does not fit the input"))),
    }
    out.flush().map_err(io)
}
