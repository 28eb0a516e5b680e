use super::*;
use crate::catalog;
use crate::netmodel::{int, CompiledRhs, Monomial, PolyVec, Polynomial, ReactionNetwork};

fn diffusion_only(d: i64) -> ReactionNetwork {
    ReactionNetwork::new(vec!["U".into()], vec![], vec![int(d)]).unwrap()
}

fn cosine_amplitude(grid: &Grid, u: &[f64]) -> f64 {
    // projection on the first Neumann mode
    let c: Vec<f64> = (0..grid.nx())
        .map(|j| (std::f64::consts::PI * grid.center(j)[0] / grid.lengths()[0]).cos())
        .collect();
    let num: f64 = c.iter().zip(u).map(|(a, b)| a * b).sum();
    num / c.iter().map(|a| a * a).sum::<f64>()
}

#[test]
fn init_examples() {
    let g = Grid::line(1.0, 32).unwrap();
    let s = init_state(&g, &[Profile::Constant(1.0), Profile::Constant(1.0), Profile::Constant(1.0)], 0).unwrap();
    assert!(s.fields.iter().flatten().all(|&v| v == 1.0));
    let s = init_state(&g, &[Profile::Cosine { mean: 1.0, amp: 1.0 }], 0).unwrap();
    assert!(s.min_value() >= 0.0);
    assert!(matches!(
        init_state(&g, &[Profile::Constant(1.0), Profile::Constant(-0.1)], 0),
        Err(PdeError::NegativeInitialData { species: 1, cell: 0 })
    ));
    let a = init_state(&g, &[Profile::Uniform { lo: 0.5, hi: 2.0 }], 7).unwrap();
    let b = init_state(&g, &[Profile::Uniform { lo: 0.5, hi: 2.0 }], 7).unwrap();
    assert_eq!(a, b);
}

#[test]
fn constant_field_unchanged_by_diffusion() {
    let g = Grid::rect(1.0, 1.0, 8, 8).unwrap();
    let net = diffusion_only(3);
    let mut s = init_state(&g, &[Profile::Constant(2.5)], 0).unwrap();
    diffusion_step(&mut s, &DiffusionSolver::new(&g), &net, 0.1).unwrap();
    assert!(s.fields[0].iter().all(|&v| (v - 2.5).abs() < 1e-13));
}

#[test]
fn cosine_mode_decays_at_discrete_rate() {
    let g = Grid::line(1.0, 64).unwrap();
    let net = diffusion_only(1);
    let solver = DiffusionSolver::new(&g);
    let mut s = init_state(&g, &[Profile::Cosine { mean: 1.0, amp: 1.0 }], 0).unwrap();
    let mass0: f64 = s.fields[0].iter().sum();
    let dt = 1e-4;
    for _ in 0..1000 {
        diffusion_step(&mut s, &solver, &net, dt).unwrap();
        let mass: f64 = s.fields[0].iter().sum();
        assert!((mass - mass0).abs() <= 1e-12 * mass0);
    }
    let amp = cosine_amplitude(&g, &s.fields[0]);
    let mu = g.axis_eigenvalues(0)[1];
    let discrete = (1.0 + dt * mu).powi(-1000);
    assert!((amp - discrete).abs() < 1e-10, "{amp} vs {discrete}");
    let exact = (-0.1 * std::f64::consts::PI.powi(2)).exp();
    assert!((amp - exact).abs() < 1e-3);
}

#[test]
fn reaction_zero_rhs_is_identity() {
    let g = Grid::line(1.0, 8).unwrap();
    let f = CompiledRhs::new(&PolyVec::zero(2));
    let mut s = init_state(&g, &[Profile::Cosine { mean: 1.0, amp: 0.5 }, Profile::Constant(2.0)], 0).unwrap();
    let before = s.clone();
    reaction_step(&mut s, &f, 0.3, &StepControl::new(0.3)).unwrap();
    assert_eq!(s, before);
}

#[test]
fn reaction_at_equilibrium_stays() {
    let g = Grid::line(1.0, 4).unwrap();
    let f = catalog::example5(1).compile_rhs();
    let f = CompiledRhs::new(&f);
    let mut s = init_state(&g, &[Profile::Constant(1.0), Profile::Constant(1.0), Profile::Constant(1.0)], 0).unwrap();
    reaction_step(&mut s, &f, 0.5, &StepControl::new(0.5)).unwrap();
    assert!(s.fields.iter().flatten().all(|&v| (v - 1.0).abs() < 1e-15));
}

#[test]
fn reaction_exponential_decay() {
    let g = Grid::line(1.0, 3).unwrap();
    let mut p = Polynomial::zero(1);
    p.add_term(Monomial::var(1, 0), int(-1));
    let f = CompiledRhs::new(&PolyVec::new(vec![p]).unwrap());
    let mut s = init_state(&g, &[Profile::Constant(1.0)], 0).unwrap();
    let ctrl = StepControl {
        reaction_substeps: 16,
        ..StepControl::new(0.1)
    };
    reaction_step(&mut s, &f, 0.1, &ctrl).unwrap();
    assert!((s.fields[0][0] - (-0.1f64).exp()).abs() < 1e-8);
}

#[test]
fn reject_retry_recovers_and_clip_reports() {
    // u' = -u - 4 is not quasipositive: the exact flow leaves the orthant
    let g = Grid::line(1.0, 3).unwrap();
    let mut p = Polynomial::zero(1);
    p.add_term(Monomial::var(1, 0), int(-1));
    p.add_term(Monomial::one(1), int(-4));
    let f = CompiledRhs::new(&PolyVec::new(vec![p]).unwrap());
    let clip = StepControl {
        positivity: PositivityMode::ClipReport,
        reaction_substeps: 1,
        ..StepControl::new(1.0)
    };
    let mut s = init_state(&g, &[Profile::Constant(1.0)], 0).unwrap();
    let log = reaction_step(&mut s, &f, 1.0, &clip).unwrap();
    assert_eq!(log.clips.len(), 3);
    assert!(s.fields[0].iter().all(|&v| v == 0.0));
    let retry = StepControl {
        positivity: PositivityMode::RejectRetry,
        ..clip
    };
    let mut s = init_state(&g, &[Profile::Constant(1.0)], 0).unwrap();
    assert!(matches!(
        reaction_step(&mut s, &f, 1.0, &retry),
        Err(PdeError::PositivityFailure { .. })
    ));
}

#[test]
fn blowup_is_detected() {
    let g = Grid::line(1.0, 3).unwrap();
    let mut p = Polynomial::zero(1);
    p.add_term(Monomial::new(vec![3]), int(1));
    let f = CompiledRhs::new(&PolyVec::new(vec![p]).unwrap());
    let mut s = init_state(&g, &[Profile::Constant(10.0)], 0).unwrap();
    let err = reaction_step(&mut s, &f, 1.0, &StepControl::new(1.0)).unwrap_err();
    assert!(matches!(err, PdeError::BlowupDetected { .. }), "{err:?}");
}

#[test]
fn zero_rhs_constant_trace() {
    let g = Grid::line(2.0, 16).unwrap();
    let net = ReactionNetwork::new(vec!["X".into(), "Y".into()], vec![], vec![int(1), int(2)]).unwrap();
    let f = CompiledRhs::new(&net.compile_rhs());
    let mut s = init_state(&g, &[Profile::Constant(0.7), Profile::Constant(3.0)], 0).unwrap();
    let tr = advance(&mut s, &g, &net, &f, &StepControl::new(0.1), 1.0, 0.2, &mut []).unwrap();
    assert_eq!(tr.samples.len(), 6);
    for smp in &tr.samples {
        assert!(smp.fields[0].iter().all(|&v| (v - 0.7).abs() < 1e-14));
        assert!(smp.fields[1].iter().all(|&v| (v - 3.0).abs() < 1e-14));
    }
    assert!((tr.samples.last().unwrap().t - 1.0).abs() < 1e-15);
}

#[test]
fn s1_conserves_weighted_mass_and_is_deterministic() {
    let g = Grid::line(1.0, 32).unwrap();
    let net = catalog::s1(2, 1, 1);
    let f = CompiledRhs::new(&net.compile_rhs());
    let init = [
        Profile::Cosine { mean: 2.0, amp: 1.0 },
        Profile::Constant(1.0),
        Profile::Constant(0.5),
    ];
    let run = |mode| {
        let mut s = init_state(&g, &init, 0).unwrap();
        let ctrl = StepControl {
            mode,
            ..StepControl::new(0.01)
        };
        advance(&mut s, &g, &net, &f, &ctrl, 2.0, 0.5, &mut []).unwrap()
    };
    for mode in [StepMode::Splitting, StepMode::Imex] {
        let tr = run(mode);
        let mass = |smp: &Sample| -> f64 {
            let w = [1.0, 1.0, 2.0];
            smp.fields.iter().zip(w).map(|(u, a)| a * u.iter().sum::<f64>()).sum()
        };
        let m0 = mass(&tr.samples[0]);
        for smp in &tr.samples {
            assert!((mass(smp) - m0).abs() <= 1e-12 * m0);
            assert!(smp.fields.iter().flatten().all(|&v| v >= 0.0));
        }
        assert!(tr.is_valid());
        assert_eq!(tr, run(mode));
    }
}

struct Counter(usize);
impl Observer for Counter {
    fn observe(&mut self, _: &Grid, _: &SimState) -> Result<(), PdeError> {
        self.0 += 1;
        Ok(())
    }
}

#[test]
fn observers_follow_cadence() {
    let g = Grid::line(1.0, 8).unwrap();
    let net = diffusion_only(1);
    let f = CompiledRhs::new(&net.compile_rhs());
    let mut s = init_state(&g, &[Profile::Constant(1.0)], 0).unwrap();
    let mut c = Counter(0);
    let tr = advance(&mut s, &g, &net, &f, &StepControl::new(0.01), 1.0, 0.1, &mut [&mut c]).unwrap();
    assert_eq!(c.0, 11);
    assert_eq!(tr.samples.len(), 11);
    assert!(advance(&mut s, &g, &net, &f, &StepControl::new(0.01), 1.0, 0.1, &mut []).is_err());
}

#[test]
fn snapshot_round_trip() {
    let g = Grid::rect(1.0, 2.0, 4, 3).unwrap();
    let vals: Vec<f64> = (0..12).map(|k| 0.1 * k as f64 + 1.0 / 3.0).collect();
    let mut buf = Vec::new();
    write_snapshot(&mut buf, &g, "A", 0.25, &vals).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("rdnet-field/1\n"));
    let snap = read_snapshot(&buf[..]).unwrap();
    assert_eq!(snap.values, vals);
    assert_eq!(snap.cells, vec![4, 3]);
    assert_eq!(snap.t, 0.25);
    let mut commented = b"# seed = 1\n".to_vec();
    commented.extend_from_slice(&buf);
    assert_eq!(read_snapshot(&commented[..]).unwrap(), snap);
}
