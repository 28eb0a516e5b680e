//! Acceptance suite: one PASS/FAIL line per criterion. Runs as a plain
//! binary so the lines are always printed; exits nonzero if any fails.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rdnet_cli::{analyze_file, simulate, RunConfig, SimOutcome};
use rdnet_core::catalog;
use rdnet_core::diagnostics::{conservation_laws, entropy_series, solve_equilibrium};
use rdnet_core::ladder::{ladder, LadderQuery};
use rdnet_core::netmodel::{int, CompiledRhs};
use rdnet_core::pde::{advance, init_state, Grid, Profile, StepControl};
use rdnet_core::structural::{
    check_quasi_uniform, estimate_maxreg_with, find_intermediate_sum, find_mass_control, verify_intermediate_sum,
    AnalyzeOptions, EntropyStatus, IntermediateSumCert, MassClass, MaxRegSettings, QuasiUniformQuery, Verdict,
};

type Outcome = Result<String, String>;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(limit: f64, what: &str, f: impl FnOnce() -> Result<T, String>) -> Result<(T, f64), String> {
    let start = Instant::now();
    let v = f()?;
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < limit, || format!("{what} took {secs:.1}s (limit {limit}s)"))?;
    Ok((v, secs))
}

fn load(name: &str, out: &Path) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::load(&configs().join(name)).map_err(|e| e.to_string())?;
    cfg.output = out.to_path_buf();
    cfg.snapshots = false;
    Ok(cfg)
}

fn run(cfg: &RunConfig) -> Result<SimOutcome, String> {
    simulate(cfg).map_err(|e| e.to_string())
}

fn value(res: &SimOutcome, key: &str) -> Result<f64, String> {
    res.get(key)
        .ok_or_else(|| format!("no `{key}` in summary"))?
        .parse()
        .map_err(|_| format!("`{key}` is not a number"))
}

fn ac1_certificates() -> Outcome {
    let (p, q, l) = (2i64, 3i64, 2i64);
    let opts = AnalyzeOptions::default();
    let ((report, _), t_intro) = timed(5.0, "intro analysis", || {
        analyze_file(&configs().join("intro.crn"), &opts).map_err(|e| e.to_string())
    })?;
    let f = catalog::intro(p as u32, q as u32, l as u32).compile_rhs();
    let displayed = IntermediateSumCert {
        ordering: vec![0, 1, 2],
        a: vec![
            vec![int(1), int(0), int(0)],
            vec![int(0), int(1), int(0)],
            vec![int(q), int(p), int(2 * p * q / l)],
        ],
        r: l as u32,
    };
    ensure(verify_intermediate_sum(&f, &displayed).unwrap(), || "displayed matrix rejected".into())?;
    let found = report.intermediate.ok_or("no certificate for the intro example")?;
    ensure(found.r == 2, || format!("intro: r = {}", found.r))?;
    ensure(verify_intermediate_sum(&f, &found).unwrap(), || "intro certificate fails re-check".into())?;
    ensure(find_intermediate_sum(&f, 1).unwrap().is_none(), || "intro: r = 1 should be infeasible".into())?;

    let mut times = vec![t_intro];
    let mut rs = Vec::new();
    for (name, want) in [("s3.crn", 2), ("example5.crn", 1)] {
        let ((rep, _), t) = timed(5.0, name, || analyze_file(&configs().join(name), &opts).map_err(|e| e.to_string()))?;
        let c = rep.intermediate.ok_or_else(|| format!("{name}: no certificate"))?;
        ensure(c.r == want, || format!("{name}: r = {}, want {want}", c.r))?;
        let lower = c.a.iter().enumerate().all(|(k, row)| row[k + 1..].iter().all(num::Zero::is_zero));
        ensure(lower, || format!("{name}: matrix not lower triangular"))?;
        times.push(t);
        rs.push(c.r);
    }
    Ok(format!(
        "intro displayed matrix verified, minimal r = 2; S3 r = {}; example5 r = {} (max {:.2}s)",
        rs[0],
        rs[1],
        times.iter().cloned().fold(0.0, f64::max)
    ))
}

fn ac2_mass() -> Outcome {
    let ((), secs) = timed(10.0, "mass checks", || {
        let c = find_mass_control(&catalog::s1(2, 1, 1).compile_rhs()).map_err(|e| e.to_string())?;
        ensure(c.class == MassClass::Conservation && c.alpha == vec![int(1), int(1), int(2)], || {
            format!("S1: {:?} {:?}", c.class, c.alpha)
        })?;
        for name in ["s2.crn", "s3.crn"] {
            let (rep, _) = analyze_file(&configs().join(name), &AnalyzeOptions::default()).map_err(|e| e.to_string())?;
            ensure(rep.mass.class == MassClass::None, || format!("{name}: class {:?}", rep.mass.class))?;
            let EntropyStatus::Dissipative(cert) = &rep.entropy else {
                return Err(format!("{name}: entropy not certified"));
            };
            ensure(cert.z.iter().all(|z| *z == 1.0), || format!("{name}: z = {:?}", cert.z))?;
            ensure(cert.residual <= 1e-10, || format!("{name}: residual {}", cert.residual))?;
        }
        Ok(())
    })?;
    Ok(format!("S1 alpha = (1,1,2) exact; S2, S3 class none, entropy z = 1 ({secs:.2}s)"))
}

fn ac3_ladder() -> Outcome {
    let res = ladder(&LadderQuery { n: 2, r: 2.0, p0: 2.5 }).map_err(|e| e.to_string())?;
    let want = [2.5, 10.0 / 3.0, 10.0];
    ensure(res.sequence.len() == 3, || format!("sequence {:?}", res.sequence))?;
    let err = res.sequence.iter().zip(want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-12 && res.n0() == Some(2), || format!("{:?}", res))?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let n = rng.gen_range(1..=5u32);
        let r = rng.gen_range(1.0..6.0);
        let q = LadderQuery { n, r, p0: 2.0 };
        let p0 = q.threshold();
        let d = (LadderQuery { p0, ..q }.next(p0) - p0).abs();
        worst = worst.max(d);
        ensure(d <= 1e-12, || format!("n={n}, r={r}: |p1 - p0| = {d:e}"))?;
    }
    Ok(format!("(2.5, 10/3, 10), N0 = 2, error {err:.1e}; 20 thresholds fixed (max drift {worst:.1e})"))
}

fn dense_oracle(m: f64, grid: &Grid, s: &MaxRegSettings) -> f64 {
    let dt = s.horizon / s.time_steps as f64;
    let (ex, ey) = (grid.axis_eigenvalues(0), grid.axis_eigenvalues(1));
    let mut best: f64 = 0.0;
    for a in &ex {
        for b in &ey {
            let mu = a + b;
            let rho = 1.0 / (1.0 + dt * m * mu);
            let t = nalgebra::DMatrix::from_fn(s.time_steps, s.time_steps, |k, j| {
                if j <= k {
                    mu * dt * rho.powi((k - j + 1) as i32)
                } else {
                    0.0
                }
            });
            best = best.max(t.singular_values().max());
        }
    }
    best
}

fn ac4_quasi_uniform() -> Outcome {
    let ((est, oracle), secs) = timed(30.0, "quasi-uniform checks", || {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..100 {
            let d: Vec<f64> = (0..rng.gen_range(1..6)).map(|_| rng.gen_range(0.01..100.0)).collect();
            let q = QuasiUniformQuery {
                n: rng.gen_range(1..=3),
                r: 1,
                a: d.iter().cloned().fold(f64::INFINITY, f64::min),
                b: d.iter().cloned().fold(0.0, f64::max),
                p_prime: rng.gen_range(1.05..=2.0),
                c_estimate: None,
            };
            let v = check_quasi_uniform(&q).map_err(|e| e.to_string())?.verdict;
            ensure(v == Verdict::Holds, || format!("r = 1 with {d:?}: {v:?}"))?;
        }
        for _ in 0..100 {
            let a = rng.gen_range(1e-3..10.0);
            let q = QuasiUniformQuery {
                n: 2,
                r: 2,
                a,
                b: a + rng.gen_range(0.0..1e3),
                p_prime: 2.0,
                c_estimate: None,
            };
            let v = check_quasi_uniform(&q).map_err(|e| e.to_string())?.verdict;
            ensure(v == Verdict::Holds, || format!("p' = 2 with A = {}, B = {}: {v:?}", q.a, q.b))?;
        }
        let g = Grid::rect(1.0, 1.0, 16, 16).map_err(|e| e.to_string())?;
        let s = MaxRegSettings::default();
        let m = 1.5;
        let est = estimate_maxreg_with(m, 2.0, &g, &s).map_err(|e| e.to_string())?.value;
        let oracle = dense_oracle(m, &g, &s);
        ensure(est <= 1.0 / m + 1e-6, || format!("estimate {est} above 1/m"))?;
        ensure(est <= oracle * (1.0 + 1e-9), || format!("estimate {est} above oracle {oracle}"))?;
        Ok((est, oracle))
    })?;
    Ok(format!(
        "r = 1 holds x100; p' = 2 holds x100; C(16x16, m = 1.5) = {est:.6} <= oracle {oracle:.6} <= 1/m ({secs:.1}s)"
    ))
}

/// Amplitude of `cos(πx/L)` in a cell-centred field.
fn cosine_amplitude(grid: &Grid, u: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mean = u.iter().sum::<f64>() / n;
    let l = grid.lengths()[0];
    2.0 / n
        * u.iter()
            .enumerate()
            .map(|(k, v)| (v - mean) * (std::f64::consts::PI * grid.center(k)[0] / l).cos())
            .sum::<f64>()
}

fn heat_amplitude(cells: usize, dt: f64, t_end: f64) -> Result<(Grid, f64), String> {
    let g = Grid::line(1.0, cells).map_err(|e| e.to_string())?;
    let net = rdnet_core::dsl::parse_network("species U d=1").map_err(|e| e.to_string())?;
    let f = CompiledRhs::new(&net.compile_rhs());
    let mut s = init_state(&g, &[Profile::Cosine { mean: 1.0, amp: 1.0 }], 0).map_err(|e| e.to_string())?;
    advance(&mut s, &g, &net, &f, &StepControl::new(dt), t_end, t_end, &mut []).map_err(|e| e.to_string())?;
    Ok((g.clone(), cosine_amplitude(&g, &s.fields[0])))
}

fn ac5_solver() -> Outcome {
    let ((mode_err, orders), secs) = timed(60.0, "solver checks", || {
        let (dt, t) = (1e-4, 0.1);
        let (g, amp) = heat_amplitude(64, dt, t)?;
        let mu = g.axis_eigenvalues(0)[1];
        let semi = (-mu * t).exp();
        let mode_err = (amp - semi).abs();
        ensure(mode_err <= 1e-3, || format!("cosine mode off by {mode_err:e}"))?;
        let discrete = (1.0 + dt * mu).powi(-((t / dt).round() as i32));
        ensure((amp - discrete).abs() <= 1e-10, || format!("amplitude {amp} vs discrete {discrete}"))?;

        // spatial order against the continuous decay; dt small enough that
        // time stepping error is negligible
        let (dt, t) = (1e-6, 0.01);
        let exact = (-std::f64::consts::PI.powi(2) * t).exp();
        let errs: Vec<f64> = [8, 16, 32, 64]
            .iter()
            .map(|&n| heat_amplitude(n, dt, t).map(|(_, a)| (a - exact).abs()))
            .collect::<Result<_, _>>()?;
        let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
        ensure(orders.iter().all(|o| *o >= 1.9), || format!("observed orders {orders:?}"))?;
        Ok((mode_err, orders))
    })?;
    Ok(format!(
        "cosine mode within {mode_err:.1e} of exp(-mu_h t); spatial orders {} ({secs:.1}s)",
        orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>().join(", ")
    ))
}

fn ac6_conservation_entropy(tmp: &Path) -> Outcome {
    let ((drift, inc), secs) = timed(120.0, "conservation and entropy runs", || {
        let mut cfg = load("s1.ini", &tmp.join("ac6-s1"))?;
        cfg.horizon = 50.0;
        ensure(cfg.grid.len() == 64 && cfg.grid.dim() == 1, || "S1 config is not 1D/64".into())?;
        let res = run(&cfg)?;
        let drift = value(&res, "mass.max_rel_drift")?;
        ensure(drift <= 1e-6, || format!("mass drift {drift:e}"))?;

        let cfg = load("s3.ini", &tmp.join("ac6-s3"))?;
        let res = run(&cfg)?;
        let e = entropy_series(&res.trace, &[1.0; 3]).map_err(|e| e.to_string())?;
        let inc = e.windows(2).map(|w| w[1].1 - w[0].1).fold(f64::NEG_INFINITY, f64::max);
        ensure(inc <= 1e-8, || format!("entropy rose by {inc:e} between samples"))?;
        Ok((drift, inc))
    })?;
    Ok(format!(
        "S1 t = 50 mass drift {drift:.1e}; S3 entropy max step change {inc:.1e} ({secs:.1}s)"
    ))
}

fn ac7_boundedness(tmp: &Path) -> Outcome {
    let (summary, secs) = timed(600.0, "2D boundedness run", || {
        let cfg = load("intro.ini", &tmp.join("ac7"))?;
        ensure(cfg.grid.cells() == [64, 64] && cfg.horizon == 100.0, || "intro config is not 64x64, t = 100".into())?;
        let res = run(&cfg)?;
        let mut parts = Vec::new();
        for s in res.trace.species.clone() {
            let plateau = res.get(&format!("sup.{s}.plateau")) == Some("true");
            let early = value(&res, &format!("sup.{s}.early_max"))?;
            let late = value(&res, &format!("sup.{s}.late_max"))?;
            ensure(plateau, || format!("{s}: late max {late} exceeds early max {early}"))?;
            let ratio = value(&res, &format!("cylinder.{s}.l2.ratio"))?;
            parts.push(format!("{s} L2 max/min {ratio:.4}"));
        }
        let windows = fs::read_to_string(res.dir.join("cylinder.csv")).map_err(|e| e.to_string())?;
        let rows = windows.lines().filter(|l| !l.starts_with('#')).count() - 1;
        ensure(rows == 100 * 3, || format!("{rows} cylinder rows, want 300"))?;
        Ok(parts.join(", "))
    })?;
    Ok(format!("no blow-up, sup norms plateau; {summary} over tau = 0..99 ({secs:.0}s)"))
}

fn ac8_equilibration(tmp: &Path) -> Outcome {
    let (parts, secs) = timed(300.0, "equilibration runs", || {
        let net = catalog::example5(1);
        let eq = solve_equilibrium(&net, &conservation_laws(&net), &[4.0]).map_err(|e| e.to_string())?;
        let err = eq.u_inf.iter().map(|u| (u - 1.0).abs()).fold(0.0, f64::max);
        ensure(err <= 1e-10, || format!("equilibrium {:?}", eq.u_inf))?;
        let mut parts = vec![format!("(1,1,1) to {err:.0e}")];
        for name in ["s1.ini", "example5.ini"] {
            let cfg = load(name, &tmp.join(format!("ac8-{name}")))?;
            let s = init_state(&cfg.grid, &cfg.profiles, cfg.seed).map_err(|e| e.to_string())?;
            let u2min = s.fields[1].iter().cloned().fold(f64::INFINITY, f64::min);
            ensure(u2min >= 0.1, || format!("{name}: second species starts at {u2min}"))?;
            let res = run(&cfg)?;
            let lambda = value(&res, "decay.l1.lambda")?;
            let r2 = value(&res, "decay.l1.r_squared")?;
            ensure(lambda > 0.0 && r2 >= 0.99, || format!("{name}: lambda {lambda}, r^2 {r2}"))?;
            parts.push(format!("{name}: lambda_1 = {lambda:.4}, r^2 = {r2:.6}"));
        }
        Ok(parts)
    })?;
    Ok(format!("{} ({secs:.1}s)", parts.join("; ")))
}

fn ac9_determinism(tmp: &Path) -> Outcome {
    let config = configs().join("example5.ini");
    let mut traces = Vec::new();
    for (k, threads) in ["1", "4", "4"].iter().enumerate() {
        let out = tmp.join(format!("ac9-{k}"));
        let o = Command::new(env!("CARGO_BIN_EXE_rdnet"))
            .arg("simulate")
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("RDNET_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), || String::from_utf8_lossy(&o.stderr).into_owned())?;
        traces.push(fs::read(out.join("trace.csv")).map_err(|e| e.to_string())?);
    }
    ensure(traces.windows(2).all(|w| w[0] == w[1]), || "trace.csv differs between runs".into())?;
    Ok(format!("3 runs (1, 4, 4 threads) byte-identical, {} bytes", traces[0].len()))
}

fn main() {
    let tmp = tempfile::tempdir().expect("temp dir");
    let t = tmp.path();
    let criteria: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("certificate reproduction", Box::new(ac1_certificates)),
        ("mass certificates", Box::new(ac2_mass)),
        ("ladder", Box::new(ac3_ladder)),
        ("quasi-uniform", Box::new(ac4_quasi_uniform)),
        ("solver correctness", Box::new(ac5_solver)),
        ("conservation and entropy in simulation", Box::new(|| ac6_conservation_entropy(t))),
        ("uniform-in-time boundedness", Box::new(|| ac7_boundedness(t))),
        ("exponential equilibration", Box::new(|| ac8_equilibration(t))),
        ("determinism", Box::new(|| ac9_determinism(t))),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("[PASS] AC-{} {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] AC-{} {name}: {why}", k + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
