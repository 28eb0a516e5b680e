//! Reference networks used throughout the tests and bundled configs.
//!
//! All diffusion coefficients default to `1, 2, 3, ...`; callers that care
//! rebuild the network with their own coefficients.

use num::BigRational;

use crate::netmodel::{int, Reaction, ReactionNetwork};

fn default_diffusion(m: usize) -> Vec<BigRational> {
    (1..=m as i64).map(int).collect()
}

fn build(species: &[&str], reactions: Vec<Reaction>) -> ReactionNetwork {
    ReactionNetwork::new(
        species.iter().map(|s| s.to_string()).collect(),
        reactions,
        default_diffusion(species.len()),
    )
    .expect("catalog networks are valid")
}

/// `A + kB ⇌ B + C` with forward rate `k1` and backward rate `k2`.
pub fn s1(k: u32, k1: i64, k2: i64) -> ReactionNetwork {
    build(
        &["A", "B", "C"],
        vec![Reaction::new(vec![1, k, 0], vec![0, 1, 1], int(k1), int(k2)).unwrap()],
    )
}

/// `A_1 + ... + A_m + k A_{m+1} ⇌ A_m + A_{m+1} ⇌ B_1 + ... + B_h + l A_m`
/// with unit rates. Species order: `A_1..A_{m+1}, B_1..B_h`.
pub fn s2(m: usize, k: u32, l: u32, h: usize) -> ReactionNetwork {
    assert!(m >= 1 && h >= 1);
    let n = m + 1 + h;
    let mut names: Vec<String> = (1..=m + 1).map(|i| format!("A{i}")).collect();
    names.extend((1..=h).map(|j| format!("B{j}")));
    let mut big = vec![0u32; n];
    for e in big.iter_mut().take(m) {
        *e = 1;
    }
    big[m] = k;
    let mut mid = vec![0u32; n];
    mid[m - 1] = 1;
    mid[m] = 1;
    let mut low = vec![0u32; n];
    low[m - 1] = l;
    for e in low.iter_mut().skip(m + 1) {
        *e = 1;
    }
    let reactions = vec![
        Reaction::new(big, mid.clone(), int(1), int(1)).unwrap(),
        Reaction::new(mid, low, int(1), int(1)).unwrap(),
    ];
    ReactionNetwork::new(names, reactions, default_diffusion(n)).unwrap()
}

/// The four-complex cycle `S1+S2 → 3S1 → 2S1+S3 → 2S2 → S1+S2`, unit rates.
pub fn s3() -> ReactionNetwork {
    let r = |a: [u32; 3], b: [u32; 3]| Reaction::irreversible(a.to_vec(), b.to_vec(), int(1)).unwrap();
    build(
        &["S1", "S2", "S3"],
        vec![
            r([1, 1, 0], [3, 0, 0]),
            r([3, 0, 0], [2, 0, 1]),
            r([2, 0, 1], [0, 2, 0]),
            r([0, 2, 0], [1, 1, 0]),
        ],
    )
}

/// `pS1 + qS2 ⇌ lS3` with unit rates.
pub fn intro(p: u32, q: u32, l: u32) -> ReactionNetwork {
    build(
        &["S1", "S2", "S3"],
        vec![Reaction::new(vec![p, q, 0], vec![0, 0, l], int(1), int(1)).unwrap()],
    )
}

/// `S1 + qS2 → (q+1)S2 → S3 → S1 + qS2`, unit rates.
pub fn example5(q: u32) -> ReactionNetwork {
    let r = |a: [u32; 3], b: [u32; 3]| Reaction::irreversible(a.to_vec(), b.to_vec(), int(1)).unwrap();
    build(
        &["S1", "S2", "S3"],
        vec![
            r([1, q, 0], [0, q + 1, 0]),
            r([0, q + 1, 0], [0, 0, 1]),
            r([0, 0, 1], [1, q, 0]),
        ],
    )
}

/// Replaces the diffusion coefficients of `net`.
pub fn with_diffusion(net: &ReactionNetwork, d: Vec<BigRational>) -> ReactionNetwork {
    ReactionNetwork::new(net.species().to_vec(), net.reactions().to_vec(), d)
        .expect("diffusion vector must match species count")
}
