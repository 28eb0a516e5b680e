use super::DiagError;
use crate::pde::SimTrace;

/// `φ(x) = x log x − x + 1`, evaluated without cancellation near `x = 1`.
fn phi(x: f64) -> f64 {
    if x == 0.0 {
        return 1.0;
    }
    let e = x - 1.0;
    if e.abs() < 0.1 {
        // Σ_{k≥2} (−e)^k / (k(k−1))
        let mut acc = 0.0;
        let mut pow = e * e;
        for k in 2..24 {
            let term = pow / (k * (k - 1)) as f64;
            acc += if k % 2 == 0 { term } else { -term };
            pow *= e;
        }
        acc
    } else {
        x * x.ln() - x + 1.0
    }
}

/// `h(u) = u log(u/z) − u + z`, with `0 · log 0 = 0`.
pub fn entropy_density(u: f64, z: f64) -> f64 {
    z * phi(u / z)
}

fn check_weights(trace: &SimTrace, w: &[f64], what: &str) -> Result<(), DiagError> {
    if trace.samples.is_empty() {
        return Err(DiagError::EmptyTrace);
    }
    if w.len() != trace.species.len() {
        return Err(DiagError::DimensionMismatch(format!(
            "{} {what} values for {} species",
            w.len(),
            trace.species.len()
        )));
    }
    if w.iter().any(|x| !(*x > 0.0)) {
        return Err(DiagError::Precondition(format!("{what} must be positive")));
    }
    Ok(())
}

/// `Σ_i ∫ h_i(u_i)` per sample.
pub fn entropy_series(trace: &SimTrace, z: &[f64]) -> Result<Vec<(f64, f64)>, DiagError> {
    check_weights(trace, z, "z")?;
    let vol = trace.grid.cell_volume();
    Ok(trace
        .samples
        .iter()
        .map(|s| {
            let e: f64 = s
                .fields
                .iter()
                .zip(z)
                .map(|(field, &zi)| field.iter().map(|&u| entropy_density(u, zi)).sum::<f64>())
                .sum();
            (s.t, e * vol)
        })
        .collect())
}

/// `Σ_i α_i ∫ u_i` per sample.
pub fn mass_series(trace: &SimTrace, alpha: &[f64]) -> Result<Vec<(f64, f64)>, DiagError> {
    check_weights(trace, alpha, "alpha")?;
    let vol = trace.grid.cell_volume();
    Ok(trace
        .samples
        .iter()
        .map(|s| {
            let m: f64 = s
                .fields
                .iter()
                .zip(alpha)
                .map(|(field, a)| a * field.iter().sum::<f64>())
                .sum();
            (s.t, m * vol)
        })
        .collect())
}
