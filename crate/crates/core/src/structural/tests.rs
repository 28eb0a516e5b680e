use num::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::catalog;
use crate::dsl::LyapunovHints;
use crate::netmodel::{int, random_network, Monomial, PolyVec, Polynomial, RandomNetworkSpec};
use crate::pde::Grid;

fn ints(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| int(x)).collect()
}

fn lower_ones(m: usize) -> Vec<Vec<BigRational>> {
    (0..m)
        .map(|k| (0..m).map(|j| int(if j <= k { 1 } else { 0 })).collect())
        .collect()
}

#[test]
fn quasipositivity_examples() {
    assert!(check_quasipositivity(&catalog::s1(2, 1, 1).compile_rhs()).is_ok());
    let f = PolyVec::new(vec![Polynomial::constant(1, int(-1))]).unwrap();
    let w = check_quasipositivity(&f).unwrap_err();
    assert_eq!(w.species, 0);
    assert_eq!(w.monomial, Monomial::one(1));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let net = random_network(&mut rng, &RandomNetworkSpec::default());
        assert!(check_quasipositivity(&net.compile_rhs()).is_ok());
    }
}

#[test]
fn mass_control_examples() {
    let c = find_mass_control(&catalog::s1(2, 1, 1).compile_rhs()).unwrap();
    assert_eq!(c.class, MassClass::Conservation);
    assert_eq!(c.alpha, ints(&[1, 1, 2]));
    let c = find_mass_control(&catalog::intro(2, 2, 2).compile_rhs()).unwrap();
    assert_eq!(c.class, MassClass::Conservation);
    assert_eq!(c.alpha, ints(&[1, 1, 2]));
    for net in [catalog::s2(2, 2, 2, 1), catalog::s3()] {
        assert_eq!(find_mass_control(&net.compile_rhs()).unwrap().class, MassClass::None);
    }
}

#[test]
fn mass_control_dissipation_and_control() {
    // A -> 0 only dissipates; 0 -> A with A -> 0 needs a K
    let mut p = Polynomial::zero(1);
    p.add_term(Monomial::var(1, 0), int(-1));
    let f = PolyVec::new(vec![p.clone()]).unwrap();
    let c = find_mass_control(&f).unwrap();
    assert_eq!(c.class, MassClass::Dissipation);
    p.add_term(Monomial::one(1), int(3));
    let f = PolyVec::new(vec![p]).unwrap();
    let c = find_mass_control(&f).unwrap();
    assert_eq!(c.class, MassClass::Control);
    assert_eq!(c.k, int(3));
    assert!(verify_mass_control(&f, &c).unwrap());
}

#[test]
fn mass_certificates_verify_and_scale() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let net = random_network(&mut rng, &RandomNetworkSpec::default());
        let f = net.compile_rhs();
        let c = find_mass_control(&f).unwrap();
        assert!(verify_mass_control(&f, &c).unwrap());
        let scaled = find_mass_control(&f.scale(&int(7))).unwrap();
        assert_eq!(scaled.class, c.class);
    }
}

#[test]
fn lp_size_limit_is_reported() {
    // many monomials: u^k for k = 0..n in one species
    let mut p = Polynomial::zero(1);
    for k in 0..10 {
        p.add_term(Monomial::new(vec![k]), int(1));
    }
    let f = PolyVec::new(vec![p]).unwrap();
    let err = find_intermediate_sum_with_limit(&f, 1, 3).unwrap_err();
    assert!(matches!(err, StructuralError::LpTooLarge { .. }));
}

#[test]
fn entropy_examples() {
    for net in [catalog::s3(), catalog::s2(2, 2, 2, 1), catalog::example5(1)] {
        let c = check_entropy_dissipation(&net, 1e-10, 10_000).unwrap();
        assert!(c.is_dissipative(), "{:?}", c.sample_violation);
        assert!(!c.shifted);
        assert_eq!(c.z, vec![1.0; net.num_species()]);
        assert!(c.residual <= 1e-10);
    }
    let f = catalog::s3().compile_rhs();
    assert!(f.eval(&[1.0, 1.0, 1.0]).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn entropy_shifted_equilibrium() {
    // A <-> B with rates 2, 1: z_B = 2 z_A, complex balanced at (1, 2)
    let net = crate::dsl::parse_network("species A d=1\nspecies B d=1\nA <-> B @ 2, 1").unwrap();
    let c = check_entropy_dissipation(&net, 1e-10, 2000).unwrap();
    assert!(c.shifted);
    assert!(c.is_dissipative());
    assert!((c.z[1] / c.z[0] - 2.0).abs() < 1e-9);
}

#[test]
fn entropy_fails_without_complex_balance() {
    // A -> B, A + B -> 2A: not weakly reversible, no positive complex balance
    let net = crate::dsl::parse_network("species A d=1\nspecies B d=1\nA -> B @ 1\nA + B -> 2 A @ 1").unwrap();
    assert!(matches!(
        check_entropy_dissipation(&net, 1e-10, 100),
        Err(StructuralError::NoComplexBalance { .. })
    ));
}

#[test]
fn intermediate_sum_examples() {
    let s3 = catalog::s3().compile_rhs();
    let c = find_intermediate_sum(&s3, 4).unwrap().unwrap();
    assert_eq!(c.r, 2);
    assert!(verify_intermediate_sum(&s3, &c).unwrap());
    let displayed = IntermediateSumCert {
        ordering: vec![0, 1, 2],
        a: lower_ones(3),
        r: 2,
    };
    assert!(verify_intermediate_sum(&s3, &displayed).unwrap());

    let e5 = catalog::example5(1).compile_rhs();
    let c = find_intermediate_sum(&e5, 4).unwrap().unwrap();
    assert_eq!(c.r, 1);
    assert!(verify_intermediate_sum(&e5, &c).unwrap());

    let mut p = Polynomial::zero(1);
    p.add_term(Monomial::new(vec![2]), int(1));
    let sq = PolyVec::new(vec![p]).unwrap();
    assert!(find_intermediate_sum(&sq, 1).unwrap().is_none());
    let c = find_intermediate_sum(&sq, 2).unwrap().unwrap();
    assert_eq!((c.r, c.a.clone()), (2, vec![vec![int(1)]]));
}

#[test]
fn intro_matrix_and_minimal_r() {
    let (p, q, l) = (2i64, 3i64, 2i64);
    let f = catalog::intro(p as u32, q as u32, l as u32).compile_rhs();
    let displayed = IntermediateSumCert {
        ordering: vec![0, 1, 2],
        a: vec![
            ints(&[1, 0, 0]),
            ints(&[0, 1, 0]),
            vec![int(q), int(p), int(2 * p * q / l)],
        ],
        r: l as u32,
    };
    assert!(verify_intermediate_sum(&f, &displayed).unwrap());
    let found = find_intermediate_sum(&f, 4).unwrap().unwrap();
    assert_eq!(found.r, 2);
    assert!(find_intermediate_sum(&f, 1).unwrap().is_none());

    let ident = IntermediateSumCert {
        ordering: vec![0, 1, 2],
        a: vec![ints(&[1, 0, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])],
        r: 1,
    };
    let f222 = catalog::intro(1, 2, 2).compile_rhs();
    assert!(!verify_intermediate_sum(&f222, &ident).unwrap());
}

#[test]
fn minimal_r_is_minimal() {
    for (net, r) in [(catalog::s1(2, 1, 1), 2), (catalog::s3(), 2), (catalog::example5(1), 1)] {
        let f = net.compile_rhs();
        let c = find_intermediate_sum(&f, 4).unwrap().unwrap();
        assert_eq!(c.r, r);
        if r > 1 {
            assert!(find_intermediate_sum(&f, r - 1).unwrap().is_none());
        }
    }
}

#[test]
fn intermediate_certificates_round_trip_on_random_networks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let spec = RandomNetworkSpec {
        max_species: 4,
        max_reactions: 4,
        max_coeff: 2,
        ..RandomNetworkSpec::default()
    };
    for _ in 0..60 {
        let net = random_network(&mut rng, &spec);
        let f = net.compile_rhs();
        if let Some(c) = find_intermediate_sum(&f, 4).unwrap() {
            assert!(verify_intermediate_sum(&f, &c).unwrap());
            // scaling invariance of the feasible r
            let s = find_intermediate_sum(&f.scale(&int(5)), 4).unwrap().unwrap();
            assert_eq!(s.r, c.r);
        }
    }
}

#[test]
fn verify_rejects_bad_shapes() {
    let f = catalog::s3().compile_rhs();
    let c = IntermediateSumCert {
        ordering: vec![0, 1],
        a: lower_ones(2),
        r: 2,
    };
    assert!(verify_intermediate_sum(&f, &c).is_err());
    let upper = IntermediateSumCert {
        ordering: vec![0, 1, 2],
        a: vec![ints(&[1, 1, 0]), ints(&[0, 1, 0]), ints(&[0, 0, 1])],
        r: 4,
    };
    assert!(!verify_intermediate_sum(&f, &upper).unwrap());
}

/// Largest singular value of the lower-triangular Toeplitz block of one
/// Laplacian eigenvalue, maximised over the grid spectrum.
fn dense_oracle(m: f64, grid: &Grid, horizon: f64, nt: usize) -> f64 {
    let dt = horizon / nt as f64;
    let ex = grid.axis_eigenvalues(0);
    let ey = if grid.dim() == 2 { grid.axis_eigenvalues(1) } else { vec![0.0] };
    let mut best: f64 = 0.0;
    for &a in &ex {
        for &b in &ey {
            let mu = a + b;
            let rho = 1.0 / (1.0 + dt * m * mu);
            let t = nalgebra::DMatrix::from_fn(nt, nt, |k, j| {
                if j <= k {
                    mu * dt * rho.powi((k - j + 1) as i32)
                } else {
                    0.0
                }
            });
            let s = t.singular_values().max();
            best = best.max(s);
        }
    }
    best
}

#[test]
fn maxreg_matches_dense_oracle_and_energy_bound() {
    let g = Grid::rect(1.0, 1.0, 16, 16).unwrap();
    let s = MaxRegSettings::default();
    for m in [1.0, 2.0, 0.5] {
        let est = estimate_maxreg_with(m, 2.0, &g, &s).unwrap();
        let oracle = dense_oracle(m, &g, s.horizon, s.time_steps);
        assert!(est.value <= 1.0 / m + 1e-6);
        assert!(oracle <= 1.0 / m + 1e-12);
        assert!(est.value <= oracle * (1.0 + 1e-9));
        assert!((est.value - oracle).abs() <= 1e-4 * oracle, "{} vs {oracle}", est.value);
        assert_eq!(est.analytic_bound, Some(1.0 / m));
    }
    let a = estimate_maxreg_with(1.0, 2.0, &g, &s).unwrap().value;
    let b = estimate_maxreg_with(2.0, 2.0, &g, &s).unwrap().value;
    assert!((2.0 * b / a - 1.0).abs() <= 1e-4, "{a} {b}");
}

#[test]
fn maxreg_dictionary() {
    let g = Grid::rect(1.0, 1.0, 8, 8).unwrap();
    let s = MaxRegSettings {
        time_steps: 8,
        ..MaxRegSettings::default()
    };
    let n = 8 * g.len();
    assert!(matches!(
        maxreg_dictionary_bound(1.0, 1.5, &g, &s, &[vec![0.0; n]]),
        Err(StructuralError::EmptyDictionary)
    ));
    let est = estimate_maxreg_with(1.0, 1.5, &g, &s).unwrap();
    assert!(est.value > 0.0 && est.analytic_bound.is_none());
    assert!(estimate_maxreg_with(0.0, 2.0, &g, &s).is_err());
    assert!(estimate_maxreg_with(1.0, 2.5, &g, &s).is_err());
}

#[test]
fn quasi_uniform_verdicts() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..100 {
        let a: f64 = rng.gen_range(0.01..10.0);
        let b = a + rng.gen_range(0.0..100.0);
        let q = QuasiUniformQuery {
            n: rng.gen_range(1..5),
            r: 1,
            a,
            b,
            p_prime: rng.gen_range(1.01..=2.0),
            c_estimate: None,
        };
        assert_eq!(check_quasi_uniform(&q).unwrap().verdict, Verdict::Holds);
        let q2 = QuasiUniformQuery {
            n: 2,
            r: 2,
            p_prime: 2.0,
            ..q
        };
        let res = check_quasi_uniform(&q2).unwrap();
        assert_eq!(res.verdict, Verdict::Holds);
        // direct numeric evaluation of 1/m < 2/(B−A)
        assert!(b == a || 2.0 / (a + b) < 2.0 / (b - a));
    }
    let eq = QuasiUniformQuery {
        n: 3,
        r: 2,
        a: 2.0,
        b: 2.0,
        p_prime: 1.5,
        c_estimate: None,
    };
    let res = check_quasi_uniform(&eq).unwrap();
    assert_eq!(res.verdict, Verdict::Holds);
    assert_eq!(res.margin, Some(f64::INFINITY));
    // p = 2 below the n = 3, r = 2 threshold of 2.5
    let bad = QuasiUniformQuery {
        p_prime: 2.0,
        b: 3.0,
        ..eq.clone()
    };
    assert!(check_quasi_uniform(&bad).is_err());
    let low = QuasiUniformQuery {
        n: 2,
        p_prime: 1.5,
        a: 1.0,
        b: 100.0,
        c_estimate: Some(0.5),
        ..eq.clone()
    };
    assert_eq!(check_quasi_uniform(&low).unwrap().verdict, Verdict::Fails);
    let low = QuasiUniformQuery {
        c_estimate: Some(0.001),
        ..low
    };
    assert_eq!(check_quasi_uniform(&low).unwrap().verdict, Verdict::Inconclusive);
}

#[test]
fn analyze_summaries() {
    let opts = AnalyzeOptions::default();
    let none = LyapunovHints::default();
    let rep = analyze(&catalog::s3(), &none, &opts).unwrap();
    assert_eq!(rep.mass.class, MassClass::None);
    assert!(rep.entropy.is_dissipative());
    assert_eq!(rep.intermediate.as_ref().unwrap().r, 2);
    assert_eq!(rep.growth, 3);
    assert!(rep.applicability.verified);
    assert!(rep.applicability.message.contains("n=2"));

    let rep = analyze(&catalog::example5(1), &none, &opts).unwrap();
    assert_eq!(rep.intermediate.as_ref().unwrap().r, 1);
    assert!(rep.applicability.message.contains("all dimensions"));

    let empty = crate::netmodel::ReactionNetwork::new(vec![], vec![], vec![]).unwrap();
    let rep = analyze(&empty, &none, &opts).unwrap();
    assert!(rep.applicability.verified);
    let kv = rep.to_kv();
    assert!(kv.starts_with("schema = rdnet-report/1\n"));

    let hints = LyapunovHints {
        alpha: Some(ints(&[1, 1, 2])),
        z: None,
    };
    let rep = analyze(&catalog::s1(2, 1, 1), &hints, &opts).unwrap();
    assert_eq!(rep.hint_alpha, Some(MassClass::Conservation));
    let kv = rep.to_kv();
    assert!(kv.contains("mass.alpha = 1,1,2\n"));
    assert!(kv.contains("intermediate.r = 2\n"));
    assert!(rep.to_text().contains("conservation"));
}
