//! Run configuration: a sectioned `key = value` file.
//!
//! ```text
//! # network path relative to this file
//! [network]
//! file = s1.crn
//!
//! # one value per axis, one or two axes
//! [grid]
//! lengths = 1.0
//! cells = 64
//!
//! # one profile per species: constant c | cosine mean amp | uniform lo hi
//! [init]
//! A = cosine 2.0 1.0
//! B = uniform 0.5 1.5
//! C = constant 0.5
//!
//! # mode: splitting | imex; positivity: reject_retry | clip_report
//! [step]
//! dt = 0.01
//! mode = splitting
//! substeps = 4
//! positivity = reject_retry
//!
//! # output is relative to the working directory
//! [run]
//! horizon = 50
//! cadence = 0.25
//! seed = 1
//! output = runs/s1
//! snapshots = true
//!
//! # t_start defaults to 20% of the horizon, totals to the initial means
//! [diagnostics]
//! p = 2
//! t_start = 10
//! totals = 4
//!
//! [analyze]
//! n = 2
//! r_max = 4
//! p_prime = 2
//! ```
//!
//! `cosine` is `mean + amp·cos(πx/Lx)` (times `cos(πy/Ly)` in 2D); `uniform` draws
//! i.i.d. values per cell from the run seed.
//! Comments must sit on their own line (`#` or `;`).

use std::path::{Path, PathBuf};

use ini::Ini;
use rdnet_core::dsl::{parse_network_file, NetworkFile};
use rdnet_core::pde::{Grid, PositivityMode, Profile, StepControl, StepMode};
use rdnet_core::structural::AnalyzeOptions;
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub path: PathBuf,
    pub network_path: PathBuf,
    pub network: NetworkFile,
    pub grid: Grid,
    pub profiles: Vec<Profile>,
    pub control: StepControl,
    pub horizon: f64,
    pub cadence: f64,
    pub seed: u64,
    pub output: PathBuf,
    pub snapshots: bool,
    pub p: f64,
    pub t_start: Option<f64>,
    pub totals: Option<Vec<f64>>,
    pub analyze: AnalyzeOptions,
    /// SHA-256 of the config text followed by the network text.
    pub hash: String,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("network", &["file"]),
    ("grid", &["lengths", "cells"]),
    ("init", &[]),
    ("step", &["dt", "mode", "substeps", "positivity"]),
    ("run", &["horizon", "cadence", "seed", "output", "snapshots"]),
    ("diagnostics", &["p", "t_start", "totals"]),
    ("analyze", &["n", "r_max", "p_prime", "c_estimate", "entropy_samples"]),
];

struct Reader<'a> {
    ini: &'a Ini,
    path: &'a Path,
}

impl Reader<'_> {
    fn err(&self, msg: impl Into<String>) -> CliError {
        CliError::Config {
            path: self.path.to_path_buf(),
            msg: msg.into(),
        }
    }

    fn raw(&self, section: &str, key: &str) -> Option<&str> {
        self.ini.section(Some(section)).and_then(|s| s.get(key)).map(str::trim)
    }

    fn required(&self, section: &str, key: &str) -> Result<&str, CliError> {
        self.raw(section, key)
            .ok_or_else(|| self.err(format!("missing `{key}` in [{section}]")))
    }

    fn parse<T: std::str::FromStr>(&self, section: &str, key: &str, text: &str) -> Result<T, CliError> {
        text.parse()
            .map_err(|_| self.err(format!("[{section}] {key}: cannot parse `{text}`")))
    }

    fn get<T: std::str::FromStr>(&self, section: &str, key: &str) -> Result<Option<T>, CliError> {
        self.raw(section, key).map(|t| self.parse(section, key, t)).transpose()
    }

    fn list<T: std::str::FromStr>(&self, section: &str, key: &str, text: &str) -> Result<Vec<T>, CliError> {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(|s| self.parse(section, key, s))
            .collect()
    }

    fn check_keys(&self) -> Result<(), CliError> {
        for (name, props) in self.ini.iter() {
            let Some(name) = name else {
                if let Some((k, _)) = props.iter().next() {
                    return Err(self.err(format!("`{k}` appears before any section")));
                }
                continue;
            };
            let Some((_, keys)) = SECTIONS.iter().find(|(s, _)| *s == name) else {
                return Err(self.err(format!("unknown section [{name}]")));
            };
            if name == "init" {
                continue;
            }
            if let Some((k, _)) = props.iter().find(|(k, _)| !keys.contains(k)) {
                return Err(self.err(format!("unknown key `{k}` in [{name}]")));
            }
        }
        Ok(())
    }
}

fn parse_profile(text: &str) -> Option<Profile> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    let nums: Option<Vec<f64>> = parts.iter().skip(1).map(|s| s.parse().ok()).collect();
    match (parts.first().copied(), nums?.as_slice()) {
        (Some("constant"), &[c]) => Some(Profile::Constant(c)),
        (Some("cosine"), &[mean, amp]) => Some(Profile::Cosine { mean, amp }),
        (Some("uniform"), &[lo, hi]) => Some(Profile::Uniform { lo, hi }),
        _ => None,
    }
}

pub fn hash_bytes(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    hex::encode(h.finalize())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_str(&text, path, base)
    }

    /// Parses config text; relative network paths resolve against `base`.
    pub fn from_str(text: &str, path: &Path, base: &Path) -> Result<RunConfig, CliError> {
        let ini = Ini::load_from_str(text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        let r = Reader { ini: &ini, path };
        r.check_keys()?;

        let network_path = base.join(r.required("network", "file")?);
        let net_text = std::fs::read_to_string(&network_path).map_err(CliError::io(&network_path))?;
        let network = parse_network_file(&net_text).map_err(|source| CliError::Network {
            path: network_path.clone(),
            source,
        })?;
        let species = network.network.species().to_vec();

        let lengths: Vec<f64> = r.list("grid", "lengths", r.required("grid", "lengths")?)?;
        let cells: Vec<usize> = r.list("grid", "cells", r.required("grid", "cells")?)?;
        let grid = Grid::new(&lengths, &cells).map_err(|e| r.err(e.to_string()))?;

        let init = ini.section(Some("init"));
        if let Some(props) = init {
            if let Some((k, _)) = props.iter().find(|(k, _)| !species.iter().any(|s| s == k)) {
                return Err(r.err(format!("[init] names unknown species `{k}`")));
            }
        }
        let profiles = species
            .iter()
            .map(|s| {
                let text = init
                    .and_then(|p| p.get(s))
                    .ok_or_else(|| r.err(format!("[init] has no profile for `{s}`")))?;
                parse_profile(text).ok_or_else(|| r.err(format!("[init] {s}: bad profile `{text}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;

        let mut control = StepControl::new(r.parse("step", "dt", r.required("step", "dt")?)?);
        if let Some(mode) = r.raw("step", "mode") {
            control.mode = match mode {
                "splitting" => StepMode::Splitting,
                "imex" => StepMode::Imex,
                other => return Err(r.err(format!("[step] mode: expected splitting or imex, got `{other}`"))),
            };
        }
        if let Some(n) = r.get("step", "substeps")? {
            control.reaction_substeps = n;
        }
        if let Some(p) = r.raw("step", "positivity") {
            control.positivity = match p {
                "reject_retry" => PositivityMode::RejectRetry,
                "clip_report" => PositivityMode::ClipReport,
                other => {
                    return Err(r.err(format!(
                        "[step] positivity: expected reject_retry or clip_report, got `{other}`"
                    )))
                }
            };
        }
        control.validate().map_err(|e| r.err(e.to_string()))?;

        let horizon: f64 = r.parse("run", "horizon", r.required("run", "horizon")?)?;
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(r.err("[run] horizon must be positive (an empty run has no trace)"));
        }
        let cadence: f64 = r.get("run", "cadence")?.unwrap_or(horizon / 100.0);
        if !(cadence > 0.0) {
            return Err(r.err("[run] cadence must be positive"));
        }
        let seed = r.get("run", "seed")?.unwrap_or(0);
        let output = PathBuf::from(r.raw("run", "output").unwrap_or("rdnet-run"));
        let snapshots = r.get("run", "snapshots")?.unwrap_or(true);

        let p: f64 = r.get("diagnostics", "p")?.unwrap_or(2.0);
        if !(p >= 1.0) {
            return Err(r.err("[diagnostics] p must be at least 1"));
        }
        let t_start = r.get("diagnostics", "t_start")?;
        let totals = r
            .raw("diagnostics", "totals")
            .map(|t| r.list("diagnostics", "totals", t))
            .transpose()?;

        let mut analyze = AnalyzeOptions::default();
        if let Some(n) = r.get("analyze", "n")? {
            analyze.n = n;
        }
        if let Some(v) = r.get("analyze", "r_max")? {
            analyze.r_max = v;
        }
        if let Some(v) = r.get("analyze", "p_prime")? {
            analyze.p_prime = v;
        }
        if let Some(v) = r.get("analyze", "entropy_samples")? {
            analyze.entropy_samples = v;
        }
        analyze.c_estimate = r.get("analyze", "c_estimate")?;

        Ok(RunConfig {
            path: path.to_path_buf(),
            network_path,
            network,
            grid,
            profiles,
            control,
            horizon,
            cadence,
            seed,
            output,
            snapshots,
            p,
            t_start,
            totals,
            analyze,
            hash: hash_bytes(&[text.as_bytes(), net_text.as_bytes()]),
        })
    }
}
