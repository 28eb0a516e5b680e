use super::DiagError;
use crate::pde::SimTrace;

/// The space-time slab `Ω × (tau, tau + length)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CylinderWindow {
    pub tau: f64,
    pub length: f64,
}

impl CylinderWindow {
    pub fn unit(tau: f64) -> Self {
        CylinderWindow { tau, length: 1.0 }
    }
}

impl Default for CylinderWindow {
    fn default() -> Self {
        CylinderWindow::unit(0.0)
    }
}

pub(super) fn check_species(trace: &SimTrace, i: usize) -> Result<(), DiagError> {
    if trace.samples.is_empty() {
        return Err(DiagError::EmptyTrace);
    }
    if i >= trace.species.len() {
        return Err(DiagError::NoSuchSpecies(i));
    }
    Ok(())
}

/// Integral over the piecewise-linear interpolant of `(ts, gs)` on `[a, b]`.
fn integrate_linear(ts: &[f64], gs: &[f64], a: f64, b: f64) -> f64 {
    let interp = |k: usize, t: f64| {
        let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
        gs[k] + w * (gs[k + 1] - gs[k])
    };
    let mut acc = 0.0;
    for k in 0..ts.len() - 1 {
        let lo = ts[k].max(a);
        let hi = ts[k + 1].min(b);
        if hi > lo {
            acc += 0.5 * (hi - lo) * (interp(k, lo) + interp(k, hi));
        }
    }
    acc
}

/// `‖u_i‖_{L^p(Ω × window)}`, integrating the per-sample spatial integral
/// of `u_i^p` piecewise-linearly in time. `p = ∞` takes the max over
/// samples inside the window.
pub fn lp_cylinder_norm(trace: &SimTrace, i: usize, p: f64, w: CylinderWindow) -> Result<f64, DiagError> {
    check_species(trace, i)?;
    if !(p >= 1.0) {
        return Err(DiagError::Precondition(format!("p = {p} must be at least 1")));
    }
    if !(w.length > 0.0 && w.tau >= 0.0) {
        return Err(DiagError::Precondition("window needs tau ≥ 0 and positive length".into()));
    }
    let (t0, t1) = trace.t_span();
    let (a, b) = (w.tau, w.tau + w.length);
    let slack = 1e-9 * t1.abs().max(1.0);
    if a < t0 - slack || b > t1 + slack || trace.samples.len() < 2 {
        return Err(DiagError::WindowOutOfRange { start: a, end: b, t0, t1 });
    }
    if p.is_infinite() {
        return trace
            .samples
            .iter()
            .filter(|s| s.t >= a - slack && s.t <= b + slack)
            .flat_map(|s| s.fields[i].iter().copied())
            .reduce(f64::max)
            .ok_or(DiagError::WindowOutOfRange { start: a, end: b, t0, t1 });
    }
    let vol = trace.grid.cell_volume();
    let ts: Vec<f64> = trace.samples.iter().map(|s| s.t).collect();
    let gs: Vec<f64> = trace
        .samples
        .iter()
        .map(|s| s.fields[i].iter().map(|u| u.abs().powf(p)).sum::<f64>() * vol)
        .collect();
    Ok(integrate_linear(&ts, &gs, a.max(t0), b.min(t1)).powf(1.0 / p))
}

/// `(t, max_x u_i(t, x))` per sample.
pub fn sup_norms(trace: &SimTrace, i: usize) -> Result<Vec<(f64, f64)>, DiagError> {
    check_species(trace, i)?;
    Ok(trace
        .samples
        .iter()
        .map(|s| (s.t, s.fields[i].iter().fold(0.0f64, |m, u| m.max(u.abs()))))
        .collect())
}

/// Cumulative maximum of [`sup_norms`].
pub fn running_sup_norm(trace: &SimTrace, i: usize) -> Result<Vec<(f64, f64)>, DiagError> {
    let mut best = f64::NEG_INFINITY;
    Ok(sup_norms(trace, i)?
        .into_iter()
        .map(|(t, v)| {
            best = best.max(v);
            (t, best)
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plateau {
    /// Max over the first three quarters of the time span.
    pub early_max: f64,
    /// Max over the last quarter.
    pub late_max: f64,
    pub holds: bool,
}

/// Whether a series stops growing: its max over the last quarter of the
/// time span is at most the earlier max plus `tol`.
pub fn plateau_check(series: &[(f64, f64)], tol: f64) -> Result<Plateau, DiagError> {
    let (Some(first), Some(last)) = (series.first(), series.last()) else {
        return Err(DiagError::EmptyTrace);
    };
    let cut = first.0 + 0.75 * (last.0 - first.0);
    let mut early = f64::NEG_INFINITY;
    let mut late = f64::NEG_INFINITY;
    for &(t, v) in series {
        if t <= cut {
            early = early.max(v);
        } else {
            late = late.max(v);
        }
    }
    if late == f64::NEG_INFINITY {
        return Err(DiagError::InsufficientSamples { found: series.len(), needed: 2 });
    }
    Ok(Plateau {
        early_max: early,
        late_max: late,
        holds: late <= early + tol,
    })
}
