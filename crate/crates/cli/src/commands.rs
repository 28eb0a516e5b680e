use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num::BigRational;
use rdnet_core::diagnostics::{
    conservation_laws, entropy_series, fit_decay, lp_cylinder_norm, mass_series, plateau_check, solve_equilibrium,
    sup_norms, totals_from_means, write_trace_csv, CylinderWindow, EquilibriumResult, OutputHeader, TraceColumns,
};
use rdnet_core::dsl::{fmt_rational, parse_network_file};
use rdnet_core::ladder::{default_p0, ladder, LadderQuery};
use rdnet_core::netmodel::{rational_to_f64, CompiledRhs, ReactionNetwork};
use rdnet_core::pde::{advance, init_state, write_snapshot, Grid, Observer, PdeError, SimState, SimTrace};
use rdnet_core::structural::{analyze, AnalyzeOptions, EntropyStatus, MassClass, StructuralReport};

use crate::config::{hash_bytes, RunConfig};
use crate::{CliError, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_VERIFIED: i32 = 2;

/// Caps the rayon pool at `RDNET_THREADS` workers when the variable is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("RDNET_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n >= 1)
        .ok_or_else(|| CliError::Usage(format!("RDNET_THREADS must be a positive integer, got `{v}`")))?;
    // a second initialisation (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn header(hash: &str, seed: u64) -> OutputHeader {
    OutputHeader {
        tool: "rdnet".into(),
        version: VERSION.into(),
        config_hash: hash.into(),
        seed,
    }
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(CliError::io(path))
}

fn write_text(path: &Path, head: &OutputHeader, body: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    head.write(&mut w, "#").map_err(CliError::io(path))?;
    w.write_all(body.as_bytes()).map_err(CliError::io(path))?;
    w.flush().map_err(CliError::io(path))
}

/// Shortest decimal with at most 12 significant digits: `1`, `0.5`, `3.33333333333`.
fn short(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let digits = (11 - x.abs().log10().floor() as i32).clamp(0, 17) as usize;
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Round-trip decimal, switching to exponent form for very small or large
/// magnitudes.
fn num(x: f64) -> String {
    let x = x + 0.0;
    if x != 0.0 && x.is_finite() && !(1e-3..1e7).contains(&x.abs()) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn format_vector(v: &[f64]) -> String {
    format!("({})", v.iter().map(|x| short(*x)).collect::<Vec<_>>().join(", "))
}

fn format_law(species: &[String], law: &[BigRational]) -> String {
    let terms: Vec<String> = law
        .iter()
        .zip(species)
        .filter(|(c, _)| !num::Zero::is_zero(*c))
        .map(|(c, s)| {
            if num::One::is_one(c) {
                s.clone()
            } else {
                format!("{} {s}", fmt_rational(c))
            }
        })
        .collect();
    terms.join(" + ")
}

// ---------------------------------------------------------------- analyze

pub struct AnalyzeArgs {
    pub file: PathBuf,
    pub opts: AnalyzeOptions,
    pub out: Option<PathBuf>,
}

/// Parses and analyses a `.crn` file; returns the report and the file hash.
pub fn analyze_file(path: &Path, opts: &AnalyzeOptions) -> Result<(StructuralReport, String), CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let file = parse_network_file(&text).map_err(|source| CliError::Network {
        path: path.to_path_buf(),
        source,
    })?;
    let report = analyze(&file.network, &file.hints, opts)?;
    Ok((report, hash_bytes(&[text.as_bytes()])))
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let (report, hash) = analyze_file(&args.file, &args.opts)?;
    let stdout = PathBuf::from("<stdout>");
    out.write_all(report.to_text().as_bytes()).map_err(CliError::io(&stdout))?;
    if let Some(path) = &args.out {
        write_text(path, &header(&hash, 0), &report.to_kv())?;
    }
    Ok(if report.applicability.verified {
        EXIT_OK
    } else {
        EXIT_NOT_VERIFIED
    })
}

// --------------------------------------------------------------- simulate

struct SnapshotWriter {
    dir: PathBuf,
    species: Vec<String>,
    head: OutputHeader,
    count: usize,
}

impl Observer for SnapshotWriter {
    fn observe(&mut self, grid: &Grid, state: &SimState) -> Result<(), PdeError> {
        let io = |e: std::io::Error| PdeError::Io(e.to_string());
        for (name, field) in self.species.iter().zip(&state.fields) {
            let path = self.dir.join(format!("{:05}_{name}.field", self.count));
            let mut w = BufWriter::new(File::create(&path).map_err(io)?);
            self.head.write(&mut w, "#").map_err(io)?;
            write_snapshot(&mut w, grid, name, state.t, field)?;
            w.flush().map_err(io)?;
        }
        self.count += 1;
        Ok(())
    }
}

/// Everything a simulation produced; the files are already on disk.
pub struct SimOutcome {
    pub trace: SimTrace,
    pub report: StructuralReport,
    pub equilibrium: Result<EquilibriumResult, String>,
    /// `(key, value)` lines of `simulate.txt`.
    pub summary: Vec<(String, String)>,
    pub dir: PathBuf,
}

impl SimOutcome {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn equilibrium_for(
    net: &ReactionNetwork,
    totals: Option<&[f64]>,
    initial: &SimState,
    grid: &Grid,
) -> (Vec<Vec<BigRational>>, Vec<f64>, Result<EquilibriumResult, String>) {
    let laws = conservation_laws(net);
    let totals = totals
        .map(<[f64]>::to_vec)
        .unwrap_or_else(|| totals_from_means(&laws, initial, grid.measure(), grid.cell_volume()));
    let eq = solve_equilibrium(net, &laws, &totals).map_err(|e| e.to_string());
    (laws, totals, eq)
}

fn max_rel_drift(series: &[(f64, f64)]) -> f64 {
    let m0 = series[0].1;
    series.iter().map(|(_, m)| (m - m0).abs()).fold(0.0, f64::max) / m0.abs().max(f64::MIN_POSITIVE)
}

/// Runs the configured simulation and writes `analyze.txt`, `trace.csv`,
/// `cylinder.csv`, `simulate.txt` and, optionally, per-sample snapshots
/// into `cfg.output`.
pub fn simulate(cfg: &RunConfig) -> Result<SimOutcome, CliError> {
    let net = &cfg.network.network;
    let dir = cfg.output.clone();
    fs::create_dir_all(&dir).map_err(CliError::io(&dir))?;
    let head = header(&cfg.hash, cfg.seed);

    let report = analyze(net, &cfg.network.hints, &cfg.analyze)?;
    write_text(&dir.join("analyze.txt"), &head, &report.to_kv())?;

    let mut state = init_state(&cfg.grid, &cfg.profiles, cfg.seed)?;
    let initial = state.clone();
    let f = CompiledRhs::new(&net.compile_rhs());
    let mut snaps = SnapshotWriter {
        dir: dir.join("snapshots"),
        species: net.species().to_vec(),
        head: head.clone(),
        count: 0,
    };
    let trace = if cfg.snapshots {
        fs::create_dir_all(&snaps.dir).map_err(CliError::io(&snaps.dir))?;
        let mut obs: [&mut dyn Observer; 1] = [&mut snaps];
        advance(&mut state, &cfg.grid, net, &f, &cfg.control, cfg.horizon, cfg.cadence, &mut obs)?
    } else {
        advance(&mut state, &cfg.grid, net, &f, &cfg.control, cfg.horizon, cfg.cadence, &mut [])?
    };

    let (laws, totals, equilibrium) = equilibrium_for(net, cfg.totals.as_deref(), &initial, &cfg.grid);
    let z = match &report.entropy {
        EntropyStatus::Dissipative(c) => Some(c.z.clone()),
        _ => None,
    };
    let cols = TraceColumns {
        z: z.clone(),
        u_inf: equilibrium.as_ref().ok().map(|e| e.u_inf.clone()),
        p: cfg.p,
    };
    let trace_path = dir.join("trace.csv");
    let mut w = create(&trace_path)?;
    write_trace_csv(&mut w, &head, &trace, &cols).map_err(CliError::io(&trace_path))?;
    w.flush().map_err(CliError::io(&trace_path))?;

    let mut kv: Vec<(String, String)> = Vec::new();
    let mut put = |k: &str, v: String| kv.push((k.to_string(), v));
    put("schema", "rdnet-simulate/1".into());
    put("run.horizon", num(cfg.horizon));
    put("run.steps", trace.steps.to_string());
    put("run.samples", trace.samples.len().to_string());
    put("run.clip_count", trace.clip_count.to_string());
    put("run.clipped_mass", num(trace.clipped_mass));
    put("run.retries", trace.retries.to_string());
    put("run.valid", trace.is_valid().to_string());

    if report.mass.class != MassClass::None {
        let alpha: Vec<f64> = report.mass.alpha.iter().map(rational_to_f64).collect();
        let m = mass_series(&trace, &alpha)?;
        put("mass.class", report.mass.class.as_str().into());
        put("mass.initial", num(m[0].1));
        put("mass.final", num(m[m.len() - 1].1));
        put("mass.max_rel_drift", num(max_rel_drift(&m)));
    }
    if let Some(z) = &z {
        let e = entropy_series(&trace, z)?;
        let inc = e.windows(2).map(|w| w[1].1 - w[0].1).fold(0.0, f64::max);
        put("entropy.initial", num(e[0].1));
        put("entropy.final", num(e[e.len() - 1].1));
        put("entropy.max_increase", num(inc));
    }

    let species = net.species();
    let mut cyl = String::from("tau,species,l2,linf\n");
    for (i, name) in species.iter().enumerate() {
        let sup = sup_norms(&trace, i)?;
        let plateau = plateau_check(&sup, 1e-6)?;
        put(&format!("sup.{name}.max"), num(plateau.early_max.max(plateau.late_max)));
        put(&format!("sup.{name}.early_max"), num(plateau.early_max));
        put(&format!("sup.{name}.late_max"), num(plateau.late_max));
        put(&format!("sup.{name}.plateau"), plateau.holds.to_string());
        let windows = (cfg.horizon + 1e-9).floor() as usize;
        let mut l2 = Vec::with_capacity(windows);
        for tau in 0..windows {
            let w = CylinderWindow::unit(tau as f64);
            let a = lp_cylinder_norm(&trace, i, 2.0, w)?;
            let b = lp_cylinder_norm(&trace, i, f64::INFINITY, w)?;
            let _ = writeln!(cyl, "{tau},{name},{a:.16e},{b:.16e}");
            l2.push(a);
        }
        if !l2.is_empty() {
            let lo = l2.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = l2.iter().cloned().fold(0.0, f64::max);
            put(&format!("cylinder.{name}.l2.min"), num(lo));
            put(&format!("cylinder.{name}.l2.max"), num(hi));
            put(&format!("cylinder.{name}.l2.ratio"), num(hi / lo));
        }
    }
    write_text(&dir.join("cylinder.csv"), &head, &cyl)?;

    put("equilibrium.laws", laws.iter().map(|l| format_law(species, l)).collect::<Vec<_>>().join("; "));
    put("equilibrium.totals", totals.iter().map(|t| num(*t)).collect::<Vec<_>>().join(","));
    match &equilibrium {
        Ok(eq) => {
            put("equilibrium.u_inf", eq.u_inf.iter().map(|t| num(*t)).collect::<Vec<_>>().join(","));
            put("equilibrium.residual", num(eq.residual));
            let t_start = cfg.t_start.unwrap_or(0.2 * cfg.horizon);
            for (label, p) in [("l1".to_string(), 1.0), (format!("l{}", cfg.p), cfg.p)] {
                match fit_decay(&trace, &eq.u_inf, p, t_start) {
                    Ok(fit) => {
                        put(&format!("decay.{label}.lambda"), num(fit.lambda));
                        put(&format!("decay.{label}.prefactor"), num(fit.prefactor));
                        put(&format!("decay.{label}.r_squared"), num(fit.r_squared));
                        put(&format!("decay.{label}.samples"), fit.samples.to_string());
                    }
                    Err(e) => put(&format!("decay.{label}.error"), e.to_string()),
                }
            }
        }
        Err(e) => put("equilibrium.error", e.clone()),
    }

    let body: String = kv.iter().map(|(k, v)| format!("{k} = {v}\n")).collect();
    write_text(&dir.join("simulate.txt"), &head, &body)?;
    Ok(SimOutcome {
        trace,
        report,
        equilibrium,
        summary: kv,
        dir,
    })
}

pub fn cmd_simulate(config: &Path, out_dir: Option<PathBuf>, out: &mut dyn Write) -> Result<i32, CliError> {
    let mut cfg = RunConfig::load(config)?;
    if let Some(d) = out_dir {
        cfg.output = d;
    }
    let res = simulate(&cfg)?;
    let stdout = PathBuf::from("<stdout>");
    let mut text = format!(
        "wrote {} ({} samples, {} steps)\n",
        res.dir.display(),
        res.trace.samples.len(),
        res.trace.steps
    );
    for key in ["run.valid", "mass.max_rel_drift", "entropy.max_increase", "equilibrium.u_inf", "decay.l1.lambda"] {
        if let Some(v) = res.get(key) {
            let _ = writeln!(text, "{key} = {v}");
        }
    }
    if !res.trace.is_valid() {
        text.push_str("warning: clamping removed more than 1e-6 of the initial mass\n");
    }
    out.write_all(text.as_bytes()).map_err(CliError::io(&stdout))?;
    Ok(EXIT_OK)
}

// ------------------------------------------------------------ equilibrium

pub struct EquilibriumArgs {
    /// A run config, or a bare `.crn` file (then `totals` is required
    /// whenever the network has conservation laws).
    pub input: PathBuf,
    pub totals: Option<Vec<f64>>,
}

pub fn cmd_equilibrium(args: &EquilibriumArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let is_crn = args.input.extension().is_some_and(|e| e == "crn");
    let (net, totals) = if is_crn {
        let text = fs::read_to_string(&args.input).map_err(CliError::io(&args.input))?;
        let file = parse_network_file(&text).map_err(|source| CliError::Network {
            path: args.input.clone(),
            source,
        })?;
        let laws = conservation_laws(&file.network);
        let totals = match &args.totals {
            Some(t) => t.clone(),
            None if laws.is_empty() => Vec::new(),
            None => return Err(CliError::Usage("--totals is required for a bare network file".into())),
        };
        (file.network, totals)
    } else {
        let cfg = RunConfig::load(&args.input)?;
        let totals = match args.totals.clone().or(cfg.totals.clone()) {
            Some(t) => t,
            None => {
                let s = init_state(&cfg.grid, &cfg.profiles, cfg.seed)?;
                let laws = conservation_laws(&cfg.network.network);
                totals_from_means(&laws, &s, cfg.grid.measure(), cfg.grid.cell_volume())
            }
        };
        (cfg.network.network, totals)
    };
    let laws = conservation_laws(&net);
    let eq = solve_equilibrium(&net, &laws, &totals)?;
    let mut text = format!("u_inf = {}\n", format_vector(&eq.u_inf));
    for (s, u) in net.species().iter().zip(&eq.u_inf) {
        let _ = writeln!(text, "{s} = {u:.16e}");
    }
    for (law, t) in laws.iter().zip(&totals) {
        let _ = writeln!(text, "conserved: {} = {}", format_law(net.species(), law), short(*t));
    }
    let _ = writeln!(text, "residual = {:.3e}", eq.residual);
    out.write_all(text.as_bytes()).map_err(CliError::io("<stdout>"))?;
    Ok(EXIT_OK)
}

// ----------------------------------------------------------------- ladder

pub fn cmd_ladder(n: u32, r: f64, p0: Option<f64>, out: &mut dyn Write) -> Result<i32, CliError> {
    let q = LadderQuery {
        n,
        r,
        p0: p0.unwrap_or_else(|| default_p0(n, r)),
    };
    let res = ladder(&q)?;
    writeln!(out, "{}", res.to_csv_line()).map_err(CliError::io("<stdout>"))?;
    Ok(EXIT_OK)
}

// ----------------------------------------------------------------- report

fn read_kv(path: &Path) -> Result<(Vec<String>, Vec<String>), CliError> {
    let text = fs::read_to_string(path).map_err(CliError::io(path))?;
    let (comments, body): (Vec<&str>, Vec<&str>) = text.lines().partition(|l| l.starts_with('#'));
    Ok((
        comments.into_iter().map(String::from).collect(),
        body.into_iter().filter(|l| !l.trim().is_empty()).map(String::from).collect(),
    ))
}

/// Merges the analysis and simulation outputs of a run directory into
/// `report.txt` and prints it.
pub fn cmd_report(dir: &Path, out: &mut dyn Write) -> Result<i32, CliError> {
    if !dir.is_dir() {
        return Err(CliError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "run directory not found"),
        });
    }
    let (head, analyze) = read_kv(&dir.join("analyze.txt"))?;
    let (_, sim) = read_kv(&dir.join("simulate.txt"))?;
    let mut doc = String::new();
    for h in &head {
        let _ = writeln!(doc, "{h}");
    }
    let _ = writeln!(doc, "\n[analyze]");
    for l in &analyze {
        let _ = writeln!(doc, "{l}");
    }
    let _ = writeln!(doc, "\n[simulate]");
    for l in sim.iter().filter(|l| !l.starts_with("decay.")) {
        let _ = writeln!(doc, "{l}");
    }
    let _ = writeln!(doc, "\n[decay]");
    for l in sim.iter().filter(|l| l.starts_with("decay.")) {
        let _ = writeln!(doc, "{l}");
    }
    let cyl = dir.join("cylinder.csv");
    if cyl.exists() {
        let (_, rows) = read_kv(&cyl)?;
        let _ = writeln!(doc, "\n[cylinder]");
        for l in &rows {
            let _ = writeln!(doc, "{l}");
        }
    }
    let path = dir.join("report.txt");
    fs::write(&path, &doc).map_err(CliError::io(&path))?;
    out.write_all(doc.as_bytes()).map_err(CliError::io("<stdout>"))?;
    Ok(EXIT_OK)
}

