//! Shared oracles and corpus builders for the integration suites.
//!
//! Everything here recomputes expected values by routes independent of
//! the library implementation paths under test (factorial-time cycle
//! sums, explicit tuple expansions, brute-force subset sums).

#![allow(dead_code)]

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jdpp::jop::JKernel;
use jdpp::space::PartitionedSpace;
use jdpp::C64;

pub fn space_12() -> PartitionedSpace {
    PartitionedSpace::from_labels(&[1, 2]).unwrap()
}

pub fn fixture() -> JKernel {
    JKernel::from_real(space_12(), nalgebra::dmatrix![0.5, 0.5; -0.5, 0.5]).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_labels(n: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    (0..n)
        .map(|_| if rng.random::<f64>() < 0.5 { 1 } else { 2 })
        .collect()
}

pub fn random_complex_matrix(n: usize, scale: f64, rng: &mut ChaCha8Rng) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(
            scale * (rng.random::<f64>() - 0.5),
            scale * (rng.random::<f64>() - 0.5),
        )
    })
}

/// Random J-Hermitian kernel with unconstrained hat spectrum.
pub fn random_j_hermitian(labels: &[u8], scale: f64, rng: &mut ChaCha8Rng) -> JKernel {
    let space = PartitionedSpace::from_labels(labels).unwrap();
    let n = space.n();
    let mut entries = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = C64::new(
                scale * (rng.random::<f64>() - 0.5),
                scale * (rng.random::<f64>() - 0.5),
            );
            if i == j {
                entries[(i, i)] = C64::new(v.re, 0.0);
            } else if space.part(i) == space.part(j) {
                entries[(i, j)] = v;
                entries[(j, i)] = v.conj();
            } else {
                entries[(i, j)] = v;
                entries[(j, i)] = -v.conj();
            }
        }
    }
    JKernel::new(space, entries).unwrap()
}

/// Valid kernel whose hat is a projection with a range vector supported
/// entirely on X₁, forcing ‖K‖ = ‖K^Δ‖ = 1 for any window containing
/// that support.
pub fn norm_one_projection(labels: &[u8], rank: usize, seed: u64) -> JKernel {
    let space = PartitionedSpace::from_labels(labels).unwrap();
    let n = space.n();
    let ones = space.indices_of(jdpp::Part::One);
    assert!(!ones.is_empty() && rank >= 1 && rank <= n);
    let mut r = rng(seed);
    // first column: random unit vector supported on X₁
    let mut first = DVector::<C64>::zeros(n);
    for &i in &ones {
        first[i] = C64::new(r.random::<f64>() - 0.5, r.random::<f64>() - 0.5);
    }
    let norm = first.norm();
    first /= C64::new(norm, 0.0);
    let mut m = random_complex_matrix(n, 1.0, &mut r);
    m.set_column(0, &first);
    let q = m.qr().q();
    let frame = q.columns(0, rank);
    let projection = frame * frame.adjoint();
    JKernel::from_op_matrix(space, projection).unwrap().hat()
}

/// Same kernel entries bound to the space with part labels exchanged.
pub fn parts_swapped(kernel: &JKernel) -> JKernel {
    let labels: Vec<u8> = kernel
        .space()
        .parts()
        .iter()
        .map(|p| p.other().label())
        .collect();
    let space = PartitionedSpace::from_labels(&labels).unwrap();
    JKernel::new(space, kernel.entries().clone()).unwrap()
}

fn cycle_lengths(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut at = start;
        while !seen[at] {
            seen[at] = true;
            at = perm[at];
            len += 1;
        }
        lengths.push(len);
    }
    lengths
}

/// Factorial-time cycle-sum oracle for the extended determinant series:
/// C_m = (1/m!) Σ_{ξ∈S_m} sign(ξ) Π_{η∈Cycle(ξ)} p_{|η|}, with the
/// extended trace p₁ = Tr(A_even) (= the matrix trace: odd blocks are
/// off-diagonal).
pub fn cycle_sum_oracle(kernel: &JKernel, n_max: usize) -> Vec<C64> {
    let op = kernel.op_matrix();
    let mut traces = vec![C64::new(0.0, 0.0)];
    let mut power = DMatrix::<C64>::identity(op.nrows(), op.ncols());
    for _ in 1..=n_max {
        power = &power * &op;
        traces.push(power.trace());
    }
    (1..=n_max)
        .map(|m| {
            let mut total = C64::new(0.0, 0.0);
            for perm in (0..m).permutations(m) {
                let lengths = cycle_lengths(&perm);
                let sign = if (m - lengths.len()).is_multiple_of(2) {
                    1.0
                } else {
                    -1.0
                };
                let mut product = C64::new(sign, 0.0);
                for len in lengths {
                    product *= traces[len];
                }
                total += product;
            }
            let factorial: f64 = (1..=m).map(|k| k as f64).product();
            total / C64::new(factorial, 0.0)
        })
        .collect()
}

/// Explicit tuple expansion of Det(1 + Kφ):
/// 1 + Σ_n (1/n!) Σ_{x₁..x_n} φ(x₁)⋯φ(x_n)·det[K(x_i,x_j)]·w(x₁)⋯w(x_n),
/// summed over all ordered index tuples (repeats contribute zero
/// determinants).
pub fn multiplier_expansion_oracle(kernel: &JKernel, phi: &[f64]) -> C64 {
    let n = kernel.n();
    let entries = kernel.entries();
    let weights = kernel.space().weights();
    let mut total = C64::new(1.0, 0.0);
    for order in 1..=n {
        let mut level = C64::new(0.0, 0.0);
        for tuple in (0..n).combinations_with_replacement(order) {
            // ordered tuples grouped by multiset: distinct multisets with
            // repeats vanish, distinct-index multisets occur order! times
            if tuple.iter().duplicates().next().is_some() {
                continue;
            }
            let sub = DMatrix::from_fn(order, order, |i, j| entries[(tuple[i], tuple[j])]);
            let det = if order == 0 {
                C64::new(1.0, 0.0)
            } else {
                sub.lu().determinant()
            };
            let factor: f64 = tuple.iter().map(|&i| phi[i] * weights[i]).product();
            level += det * C64::new(factor, 0.0);
        }
        total += level;
    }
    total
}

pub fn rel_close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(b.norm()).max(1.0)
}
