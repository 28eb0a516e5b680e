use std::fmt::Write as _;

use num::{BigRational, Zero};

use super::{
    check_entropy_dissipation, check_quasi_uniform, check_quasipositivity, find_intermediate_sum,
    find_mass_control, verify_mass_control, EntropyCert, IntermediateSumCert, MassClass,
    MassControlCert, QuasiUniformQuery, QuasiUniformResult, QuasiWitness, StructuralError, Verdict,
    DEFAULT_ENTROPY_SAMPLES,
};
use super::mass::control_constant;
use crate::dsl::{fmt_rational, LyapunovHints};
use crate::netmodel::{growth_degree, rational_to_f64, ReactionNetwork};

#[derive(Clone, Debug, PartialEq)]
pub struct AnalyzeOptions {
    /// Spatial dimension the verdict is stated for.
    pub n: u32,
    pub r_max: u32,
    pub entropy_tol: f64,
    pub entropy_samples: usize,
    pub p_prime: f64,
    pub c_estimate: Option<f64>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            n: 2,
            r_max: 4,
            entropy_tol: 1e-10,
            entropy_samples: DEFAULT_ENTROPY_SAMPLES,
            p_prime: 2.0,
            c_estimate: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EntropyStatus {
    Dissipative(EntropyCert),
    Violated(EntropyCert),
    NoComplexBalance { residual: f64 },
}

impl EntropyStatus {
    pub fn is_dissipative(&self) -> bool {
        matches!(self, EntropyStatus::Dissipative(_))
    }

    pub fn cert(&self) -> Option<&EntropyCert> {
        match self {
            EntropyStatus::Dissipative(c) | EntropyStatus::Violated(c) => Some(c),
            EntropyStatus::NoComplexBalance { .. } => None,
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            EntropyStatus::Dissipative(_) => "dissipative",
            EntropyStatus::Violated(_) => "violated",
            EntropyStatus::NoComplexBalance { .. } => "no-complex-balance",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Applicability {
    pub verified: bool,
    pub uniform_in_time: bool,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StructuralReport {
    pub species: Vec<String>,
    pub diffusion: Vec<BigRational>,
    pub quasipositive: Result<(), QuasiWitness>,
    pub mass: MassControlCert,
    pub entropy: EntropyStatus,
    pub intermediate: Option<IntermediateSumCert>,
    pub growth: u32,
    pub quasi_uniform: Option<QuasiUniformResult>,
    /// Class reached by the user-supplied weights, if any were given.
    pub hint_alpha: Option<MassClass>,
    pub n: u32,
    pub applicability: Applicability,
}

fn quasi_uniform(net: &ReactionNetwork, r: u32, opts: &AnalyzeOptions) -> QuasiUniformResult {
    let d = net.diffusion_f64();
    let a = d.iter().cloned().fold(f64::INFINITY, f64::min);
    let b = d.iter().cloned().fold(0.0, f64::max);
    let q = QuasiUniformQuery {
        n: opts.n,
        r,
        a: if d.is_empty() { 1.0 } else { a },
        b: if d.is_empty() { 1.0 } else { b },
        p_prime: opts.p_prime,
        c_estimate: opts.c_estimate,
    };
    check_quasi_uniform(&q).unwrap_or_else(|e| QuasiUniformResult {
        verdict: Verdict::Inconclusive,
        margin: None,
        p: opts.p_prime / (opts.p_prime - 1.0),
        threshold: (opts.n as f64 + 2.0) * (r as f64 - 1.0) / 2.0,
        reason: e.to_string(),
    })
}

fn hint_class(net: &ReactionNetwork, alpha: &[BigRational]) -> Result<Option<MassClass>, StructuralError> {
    let f = net.compile_rhs();
    for class in [MassClass::Conservation, MassClass::Dissipation, MassClass::Control] {
        let k = if class == MassClass::Control {
            control_constant(&f.weighted_sum(alpha), alpha)
        } else {
            BigRational::zero()
        };
        let cert = MassControlCert {
            alpha: alpha.to_vec(),
            k,
            class,
        };
        if verify_mass_control(&f, &cert)? {
            return Ok(Some(class));
        }
    }
    Ok(None)
}

/// Runs every structural check and states which global-existence route, if
/// any, covers the system in dimension `opts.n`.
pub fn analyze(
    net: &ReactionNetwork,
    hints: &LyapunovHints,
    opts: &AnalyzeOptions,
) -> Result<StructuralReport, StructuralError> {
    let f = net.compile_rhs();
    let quasipositive = check_quasipositivity(&f);
    let mass = find_mass_control(&f)?;
    let entropy = match check_entropy_dissipation(net, opts.entropy_tol, opts.entropy_samples) {
        Ok(c) if c.is_dissipative() => EntropyStatus::Dissipative(c),
        Ok(c) => EntropyStatus::Violated(c),
        Err(StructuralError::NoComplexBalance { residual, .. }) => EntropyStatus::NoComplexBalance { residual },
        Err(e) => return Err(e),
    };
    let intermediate = find_intermediate_sum(&f, opts.r_max)?;
    let quasi_uniform = intermediate.as_ref().map(|c| quasi_uniform(net, c.r, opts));
    let hint_alpha = match &hints.alpha {
        Some(a) => hint_class(net, a)?,
        None => None,
    };

    let mut missing = Vec::new();
    if quasipositive.is_err() {
        missing.push("quasipositivity");
    }
    let a3 = mass.class != MassClass::None || entropy.is_dissipative();
    if !a3 {
        missing.push("mass control or entropy dissipation");
    }
    if intermediate.is_none() {
        missing.push("intermediate sum condition");
    }
    let uniform_in_time = mass.is_dissipative() || entropy.is_dissipative();
    let applicability = if !missing.is_empty() {
        Applicability {
            verified: false,
            uniform_in_time: false,
            message: format!("not verified: missing {}", missing.join(", ")),
        }
    } else {
        let r = intermediate.as_ref().unwrap().r;
        let qu = quasi_uniform.as_ref().unwrap();
        let (verified, message) = if r == 1 {
            (true, "global existence and boundedness in all dimensions (r = 1)".to_string())
        } else if opts.n == 2 && r <= 2 {
            (true, "global existence for n=2 (quadratic intermediate sums)".to_string())
        } else if qu.verdict == Verdict::Holds {
            (true, format!("global existence for n={} (quasi-uniform diffusion)", opts.n))
        } else {
            (
                false,
                format!("not verified: quasi-uniform criterion {} for n={}, r={r}", qu.verdict.as_str(), opts.n),
            )
        };
        Applicability {
            verified,
            uniform_in_time: verified && uniform_in_time,
            message,
        }
    };
    Ok(StructuralReport {
        species: net.species().to_vec(),
        diffusion: net.diffusion().to_vec(),
        quasipositive,
        mass,
        entropy,
        intermediate,
        growth: growth_degree(&f),
        quasi_uniform,
        hint_alpha,
        n: opts.n,
        applicability,
    })
}

fn join_q(v: &[BigRational]) -> String {
    v.iter().map(fmt_rational).collect::<Vec<_>>().join(",")
}

fn join_f(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(",")
}

fn fmt_margin(m: Option<f64>) -> String {
    match m {
        Some(x) if x.is_infinite() => "inf".into(),
        Some(x) => format!("{x:.17e}"),
        None => "n/a".into(),
    }
}

impl StructuralReport {
    /// Versioned `key = value` document, one entry per line.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        kv("schema", "rdnet-report/1".into());
        kv("species", self.species.join(","));
        kv("diffusion", join_q(&self.diffusion));
        kv("dimension", self.n.to_string());
        kv("quasipositive", self.quasipositive.is_ok().to_string());
        if let Err(w) = &self.quasipositive {
            kv("quasipositive.witness.species", self.species[w.species].clone());
            kv(
                "quasipositive.witness.monomial",
                w.monomial.exponents().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" "),
            );
            kv("quasipositive.witness.coeff", fmt_rational(&w.coeff));
        }
        kv("growth", self.growth.to_string());
        kv("mass.class", self.mass.class.as_str().into());
        if self.mass.class != MassClass::None {
            kv("mass.alpha", join_q(&self.mass.alpha));
            kv("mass.K", fmt_rational(&self.mass.k));
        }
        if let Some(c) = self.hint_alpha {
            kv("hint.alpha.class", c.as_str().into());
        }
        kv("entropy.status", self.entropy.as_str().into());
        match &self.entropy {
            EntropyStatus::NoComplexBalance { residual } => kv("entropy.residual", format!("{residual:e}")),
            EntropyStatus::Dissipative(c) | EntropyStatus::Violated(c) => {
                kv("entropy.z", join_f(&c.z));
                kv("entropy.residual", format!("{:e}", c.residual));
                kv("entropy.shifted", c.shifted.to_string());
                kv("entropy.samples", c.samples.to_string());
                if let Some(u) = &c.sample_violation {
                    kv("entropy.violation", join_f(u));
                }
            }
        }
        match &self.intermediate {
            None => kv("intermediate.found", "false".into()),
            Some(c) => {
                kv("intermediate.found", "true".into());
                kv("intermediate.r", c.r.to_string());
                kv(
                    "intermediate.ordering",
                    c.ordering.iter().map(|&s| self.species[s].clone()).collect::<Vec<_>>().join(","),
                );
                kv(
                    "intermediate.A",
                    c.a.iter().map(|row| join_q(row)).collect::<Vec<_>>().join(";"),
                );
            }
        }
        if let Some(q) = &self.quasi_uniform {
            kv("quasi_uniform.verdict", q.verdict.as_str().into());
            kv("quasi_uniform.margin", fmt_margin(q.margin));
            kv("quasi_uniform.p", format!("{}", q.p));
            kv("quasi_uniform.threshold", format!("{}", q.threshold));
            kv("quasi_uniform.reason", q.reason.clone());
        }
        kv("verdict.verified", self.applicability.verified.to_string());
        kv("verdict.uniform_in_time", self.applicability.uniform_in_time.to_string());
        kv("verdict.message", self.applicability.message.clone());
        out
    }

    /// Plain-text summary for terminals.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "species: {}", self.species.join(", "));
        let _ = writeln!(
            out,
            "quasipositivity: {}",
            match &self.quasipositive {
                Ok(()) => "holds".to_string(),
                Err(w) => format!(
                    "fails (f_{} has a negative term without {})",
                    self.species[w.species], self.species[w.species]
                ),
            }
        );
        let mass = match self.mass.class {
            MassClass::None => "none".to_string(),
            c => format!(
                "{} with alpha = ({}), K = {}",
                c.as_str(),
                self.mass.alpha.iter().map(fmt_rational).collect::<Vec<_>>().join(", "),
                fmt_rational(&self.mass.k)
            ),
        };
        let _ = writeln!(out, "mass: {mass}");
        let entropy = match &self.entropy {
            EntropyStatus::Dissipative(c) => format!(
                "dissipative, z = ({}), defect {:.1e}{}",
                c.z.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(", "),
                c.residual,
                if c.shifted { ", shifted" } else { "" }
            ),
            EntropyStatus::Violated(_) => "sampled inequality violated".to_string(),
            EntropyStatus::NoComplexBalance { residual } => {
                format!("no complex-balanced equilibrium found (defect {residual:.1e})")
            }
        };
        let _ = writeln!(out, "entropy: {entropy}");
        match &self.intermediate {
            None => {
                let _ = writeln!(out, "intermediate sums: none found");
            }
            Some(c) => {
                let _ = writeln!(
                    out,
                    "intermediate sums: r = {}, ordering {}",
                    c.r,
                    c.ordering.iter().map(|&s| self.species[s].as_str()).collect::<Vec<_>>().join(" ")
                );
                for row in &c.a {
                    let _ = writeln!(out, "  [{}]", row.iter().map(fmt_rational).collect::<Vec<_>>().join(" "));
                }
            }
        }
        let _ = writeln!(out, "growth degree: {}", self.growth);
        if let Some(q) = &self.quasi_uniform {
            let _ = writeln!(
                out,
                "quasi-uniform (p = {}): {} ({}), margin {}",
                q.p,
                q.verdict.as_str(),
                q.reason,
                fmt_margin(q.margin)
            );
        }
        let _ = writeln!(out, "verdict: {}", self.applicability.message);
        if self.applicability.uniform_in_time {
            let _ = writeln!(out, "bounds are uniform in time (K = 0)");
        }
        out
    }

    pub fn diffusion_f64(&self) -> Vec<f64> {
        self.diffusion.iter().map(rational_to_f64).collect()
    }
}
