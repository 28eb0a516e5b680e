//! The bootstrap exponent sequence
//! `p_{N+1} = (n+2)(p_N/r) / (n+2 − 2p_N/r)`, which lifts an `L^{p_0}` bound
//! to `L^∞` once some `p_N` reaches `r(n+2)/2`.

use thiserror::Error;

/// Iteration cap.
pub const MAX_STEPS: usize = 10_000;
/// Tolerance for recognising the fixed point `p_0 = (n+2)(r−1)/2`.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Offset above the threshold used when no `p_0` is given.
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LadderError {
    #[error("invalid ladder query: {0}")]
    InvalidQuery(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LadderQuery {
    pub n: u32,
    pub r: f64,
    pub p0: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LadderVerdict {
    /// Some `p_N ≥ r(n+2)/2`; the next exponent is infinite.
    Terminal { n0: usize },
    /// `p_0` sits on the threshold and is a fixed point.
    Stalls,
    /// `p_0` is below the threshold and the sequence decreases.
    Decreases,
    /// Increasing but not terminal within [`MAX_STEPS`].
    CapReached,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LadderResult {
    pub sequence: Vec<f64>,
    pub verdict: LadderVerdict,
}

impl LadderResult {
    pub fn terminal(&self) -> bool {
        matches!(self.verdict, LadderVerdict::Terminal { .. })
    }

    pub fn n0(&self) -> Option<usize> {
        match self.verdict {
            LadderVerdict::Terminal { n0 } => Some(n0),
            _ => None,
        }
    }

    /// Comma-separated sequence followed by the verdict, e.g.
    /// `2.5, 3.33333, 10, terminal N0=2`.
    pub fn to_csv_line(&self) -> String {
        let mut parts: Vec<String> = self.sequence.iter().map(|p| format!("{}", Short(*p))).collect();
        parts.push(match self.verdict {
            LadderVerdict::Terminal { n0 } => format!("terminal N0={n0}"),
            LadderVerdict::Stalls => "stalls".into(),
            LadderVerdict::Decreases => "decreases".into(),
            LadderVerdict::CapReached => "cap reached".into(),
        });
        parts.join(", ")
    }
}

/// Six significant digits without trailing zeros.
struct Short(f64);

impl std::fmt::Display for Short {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = format!("{:.*}", 5usize.saturating_sub(self.0.abs().log10().floor().max(0.0) as usize), self.0);
        let s = if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        };
        f.write_str(&s)
    }
}

impl LadderQuery {
    /// `(n+2)(r−1)/2`: below it the sequence cannot grow.
    pub fn threshold(&self) -> f64 {
        (self.n as f64 + 2.0) * (self.r - 1.0) / 2.0
    }

    /// `r(n+2)/2`: reaching it ends the bootstrap.
    pub fn pole(&self) -> f64 {
        self.r * (self.n as f64 + 2.0) / 2.0
    }

    pub fn next(&self, p: f64) -> f64 {
        let n2 = self.n as f64 + 2.0;
        let q = p / self.r;
        let den = n2 - 2.0 * q;
        if den <= 0.0 {
            f64::INFINITY
        } else {
            n2 * q / den
        }
    }

    fn validate(&self) -> Result<(), LadderError> {
        if self.n < 1 {
            return Err(LadderError::InvalidQuery("n must be at least 1".into()));
        }
        if !(self.r >= 1.0 && self.r.is_finite()) {
            return Err(LadderError::InvalidQuery("r must be at least 1".into()));
        }
        if !(self.p0 > 1.0 && self.p0.is_finite()) {
            return Err(LadderError::InvalidQuery("p0 must exceed 1".into()));
        }
        Ok(())
    }
}

/// Default starting exponent: `max(threshold, 1) + δ`.
pub fn default_p0(n: u32, r: f64) -> f64 {
    let q = LadderQuery { n, r, p0: 2.0 };
    q.threshold().max(1.0) + DEFAULT_DELTA
}

pub fn ladder(q: &LadderQuery) -> Result<LadderResult, LadderError> {
    q.validate()?;
    let low = q.threshold();
    let pole = q.pole();
    if (q.p0 - low).abs() <= FIXED_POINT_TOL * low.max(1.0) {
        return Ok(LadderResult {
            sequence: vec![q.p0],
            verdict: LadderVerdict::Stalls,
        });
    }
    if q.p0 < low {
        return Ok(LadderResult {
            sequence: vec![q.p0, q.next(q.p0)],
            verdict: LadderVerdict::Decreases,
        });
    }
    let mut seq = vec![q.p0];
    let mut p = q.p0;
    for n in 0..MAX_STEPS {
        if p >= pole {
            return Ok(LadderResult {
                sequence: seq,
                verdict: LadderVerdict::Terminal { n0: n },
            });
        }
        p = q.next(p);
        seq.push(p);
    }
    Ok(LadderResult {
        sequence: seq,
        verdict: LadderVerdict::CapReached,
    })
}

/// Lower bound `(n+2)/(r(n+2) − 2p_0)` on `p_{N+1}/p_N`; attained at `N = 0`.
pub fn ladder_ratio_bound(q: &LadderQuery) -> Result<f64, LadderError> {
    q.validate()?;
    if !(q.p0 > q.threshold() && q.p0 < q.pole()) {
        return Err(LadderError::InvalidQuery(format!(
            "p0 must lie strictly between {} and {}",
            q.threshold(),
            q.pole()
        )));
    }
    let n2 = q.n as f64 + 2.0;
    Ok(n2 / (q.r * n2 - 2.0 * q.p0))
}
