use super::DiagError;
use crate::pde::SimTrace;

/// Fewest points a decay fit accepts.
pub const MIN_FIT_SAMPLES: usize = 10;
/// Distances below this end the fit window.
pub const UNDERFLOW: f64 = 1e-14;
/// Fits on simulated traces also stop once the distance falls below this
/// fraction of `‖u_inf‖_p`: accumulated roundoff leaves a floor near 1e-12
/// that would otherwise flatten the tail of the fit.
pub const RELATIVE_FLOOR: f64 = 1e-10;

/// Least-squares fit of `d(t) ≈ prefactor · e^{−lambda t}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub lambda: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Norm order of the fitted distance.
    pub p: f64,
    pub samples: usize,
}

/// `(t, ‖u(t) − u_inf‖_{L^p(Ω)})` with the norm taken over all species
/// jointly; `p = ∞` gives the max.
pub fn distance_series(trace: &SimTrace, u_inf: &[f64], p: f64) -> Result<Vec<(f64, f64)>, DiagError> {
    if trace.samples.is_empty() {
        return Err(DiagError::EmptyTrace);
    }
    if u_inf.len() != trace.species.len() {
        return Err(DiagError::DimensionMismatch(format!(
            "equilibrium has {} entries for {} species",
            u_inf.len(),
            trace.species.len()
        )));
    }
    if !(p >= 1.0) {
        return Err(DiagError::Precondition(format!("p = {p} must be at least 1")));
    }
    let vol = trace.grid.cell_volume();
    Ok(trace
        .samples
        .iter()
        .map(|s| {
            let diffs = s.fields.iter().zip(u_inf).flat_map(|(f, &e)| f.iter().map(move |u| (u - e).abs()));
            let d = if p.is_infinite() {
                diffs.fold(0.0, f64::max)
            } else {
                (diffs.map(|x| x.powf(p)).sum::<f64>() * vol).powf(1.0 / p)
            };
            (s.t, d)
        })
        .collect())
}

/// Fits the points with `t ≥ t_start`, stopping at the first distance below
/// `floor` (never less than [`UNDERFLOW`]).
pub fn fit_exponential(series: &[(f64, f64)], t_start: f64, p: f64, floor: f64) -> Result<DecayFit, DiagError> {
    let floor = floor.max(UNDERFLOW);
    let mut pts = Vec::new();
    for &(t, d) in series.iter().filter(|(t, _)| *t >= t_start) {
        if !(d >= floor) {
            if pts.len() < MIN_FIT_SAMPLES {
                return Err(DiagError::DistanceUnderflow {
                    t,
                    found: pts.len(),
                    needed: MIN_FIT_SAMPLES,
                });
            }
            break;
        }
        pts.push((t, d.ln()));
    }
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(DiagError::InsufficientSamples {
            found: pts.len(),
            needed: MIN_FIT_SAMPLES,
        });
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * tm;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(DecayFit {
        lambda: -slope,
        prefactor: intercept.exp(),
        r_squared,
        p,
        samples: pts.len(),
    })
}

/// Decay of `‖u(t) − u_inf‖_{L^p}` from `t_start` on; the window ends at the
/// noise floor `RELATIVE_FLOOR · ‖u_inf‖_{L^p}`.
pub fn fit_decay(trace: &SimTrace, u_inf: &[f64], p: f64, t_start: f64) -> Result<DecayFit, DiagError> {
    let series = distance_series(trace, u_inf, p)?;
    let measure = trace.grid.measure();
    let scale = if p.is_infinite() {
        u_inf.iter().fold(0.0f64, |m, u| m.max(u.abs()))
    } else {
        (u_inf.iter().map(|u| u.abs().powf(p)).sum::<f64>() * measure).powf(1.0 / p)
    };
    fit_exponential(&series, t_start, p, RELATIVE_FLOOR * scale)
}
