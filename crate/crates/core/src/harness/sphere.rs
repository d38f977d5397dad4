//! Constant chain of the hypersurface example on odd spheres `S^(2m+1)`.
//!
//! Clifford generators satisfy `gamma_j^2 = -1` and are normalized so that
//! `i^(m+1) gamma_1 ... gamma_(2m+1)` is the identity.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::linalg::{identity, matmul, trace};
use crate::C64;

fn kron(a: &[C64], na: usize, b: &[C64], nb: usize) -> Vec<C64> {
    let n = na * nb;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..na {
        for j in 0..na {
            for k in 0..nb {
                for l in 0..nb {
                    out[(i * nb + k) * n + j * nb + l] = a[i * na + j] * b[k * nb + l];
                }
            }
        }
    }
    out
}

fn pauli() -> [[C64; 4]; 4] {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    [[l, o, o, l], [o, l, l, o], [o, -i, i, o], [l, o, o, -l]]
}

fn tensor(factors: &[usize]) -> Vec<C64> {
    let p = pauli();
    factors
        .iter()
        .fold((vec![C64::new(1.0, 0.0)], 1usize), |(acc, n), &f| (kron(&acc, n, &p[f], 2), n * 2))
        .0
}

/// Generators of the complex Clifford algebra of `R^(2m+1)` on `C^(2^m)`.
pub fn clifford_generators(m: usize) -> Vec<Vec<C64>> {
    let n = 2 * m + 1;
    let dim = 1usize << m;
    let mut hermitian = Vec::with_capacity(n);
    for k in 0..m {
        for pauli_index in [1usize, 2] {
            let mut f = vec![0usize; m];
            f[..k].fill(3);
            f[k] = pauli_index;
            hermitian.push(tensor(&f));
        }
    }
    hermitian.push(tensor(&vec![3; m]));
    let mut gens: Vec<Vec<C64>> = hermitian
        .into_iter()
        .map(|e| e.into_iter().map(|z| z * C64::new(0.0, 1.0)).collect())
        .collect();
    let volume = volume_element(&gens, m);
    if volume[0].re < 0.0 {
        for z in gens[n - 1].iter_mut() {
            *z = -*z;
        }
    }
    debug_assert_eq!(gens[0].len(), dim * dim);
    gens
}

/// `i^(m+1) gamma_1 ... gamma_(2m+1)`.
pub fn volume_element(gens: &[Vec<C64>], m: usize) -> Vec<C64> {
    let dim = 1usize << m;
    let product = gens.iter().fold(identity(dim), |acc, g| matmul(&acc, g, dim));
    let phase = C64::new(0.0, 1.0).powu(m as u32 + 1);
    product.into_iter().map(|z| z * phase).collect()
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, sign: f64, out: &mut Vec<(Vec<usize>, f64)>) {
        if rest.is_empty() {
            out.push((prefix.clone(), sign));
            return;
        }
        for pos in 0..rest.len() {
            let v = rest.remove(pos);
            prefix.push(v);
            rec(prefix, rest, if pos % 2 == 0 { sign } else { -sign }, out);
            prefix.pop();
            rest.insert(pos, v);
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut (0..n).collect(), 1.0, &mut out);
    out
}

/// Trace of the antisymmetrized product of `kappa_j gamma_j` over all
/// orderings, i.e. the frame value of `tr((gamma o W)^(2m+1))` for a
/// Weingarten map with principal curvatures `kappas`.
pub fn clifford_top_trace(m: usize, kappas: &[f64]) -> C64 {
    let n = 2 * m + 1;
    assert_eq!(kappas.len(), n, "need one principal curvature per direction");
    let dim = 1usize << m;
    let gens: Vec<Vec<C64>> = clifford_generators(m)
        .into_iter()
        .zip(kappas)
        .map(|(g, &k)| g.into_iter().map(|z| z * k).collect())
        .collect();
    permutations(n)
        .into_iter()
        .map(|(perm, sign)| {
            let prod = perm.iter().fold(identity(dim), |acc, &j| matmul(&acc, &gens[j], dim));
            trace(&prod, dim) * sign
        })
        .sum()
}

/// Closed form `(2m+1)! det(W) (-i)^(m+1) 2^m`.
pub fn clifford_top_trace_closed(m: usize, det_w: f64) -> C64 {
    let fact: f64 = (1..=2 * m + 1).map(|k| k as f64).product();
    C64::new(0.0, -1.0).powu(m as u32 + 1) * (fact * det_w * (1u64 << m) as f64)
}

/// Volume of the unit sphere `S^n` by the two-step recursion.
pub fn sphere_volume(n: usize) -> f64 {
    match n {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (n as f64 - 1.0) * sphere_volume(n - 2),
    }
}

/// The prefactor multiplying `int f^* (-nu)^* vol` in the flow, assembled
/// from the complex constants: `-(-1)^m m! / (2 pi i)^(m+1) * (-i)^(m+1) * 2^m`.
pub fn sphere_prefactor(m: usize) -> Complex64 {
    let fact_m: f64 = (1..=m).map(|k| k as f64).product();
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let two_pi_i = C64::new(0.0, 2.0 * PI).powu(m as u32 + 1);
    let minus_i = C64::new(0.0, -1.0).powu(m as u32 + 1);
    -C64::new(sign * fact_m, 0.0) / two_pi_i * minus_i * (1u64 << m) as f64
}

/// Flow predicted for a degree-`deg_f` map, `deg(-nu) = 1`.
pub fn sphere_chain(m: usize, deg_f: i64) -> Complex64 {
    sphere_prefactor(m) * (deg_f as f64 * sphere_volume(2 * m + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_anticommute_and_square_to_minus_one() {
        for m in 0..3 {
            let dim = 1usize << m;
            let g = clifford_generators(m);
            for a in 0..g.len() {
                for b in 0..g.len() {
                    let ab = matmul(&g[a], &g[b], dim);
                    let ba = matmul(&g[b], &g[a], dim);
                    let expected = if a == b { -2.0 } else { 0.0 };
                    for i in 0..dim * dim {
                        let diag = if i % (dim + 1) == 0 { expected } else { 0.0 };
                        assert!((ab[i] + ba[i] - C64::new(diag, 0.0)).norm() < 1e-14);
                    }
                }
            }
            let vol = volume_element(&g, m);
            let id = identity(dim);
            assert!(vol.iter().zip(&id).all(|(x, y)| (x - y).norm() < 1e-14));
        }
    }

    #[test]
    fn circle_generator_is_minus_i() {
        assert_eq!(clifford_generators(0)[0], vec![C64::new(0.0, -1.0)]);
    }

    #[test]
    fn top_trace_matches_closed_form() {
        let kappas = [0.7, 1.3, 2.0, 0.4, 1.1];
        for m in 0..3 {
            let k = &kappas[..2 * m + 1];
            let det: f64 = k.iter().product();
            let lhs = clifford_top_trace(m, k);
            let rhs = clifford_top_trace_closed(m, det);
            assert!((lhs - rhs).norm() < 1e-10 * rhs.norm(), "m = {m}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn chain_collapses_to_the_degree() {
        for m in 0..4 {
            let fact: f64 = (1..=m).map(|k| k as f64).product();
            let pref = sphere_prefactor(m);
            assert!((pref - C64::new(fact / (2.0 * PI.powi(m as i32 + 1)), 0.0)).norm() < 1e-14);
            for d in [-2, 0, 1, 3] {
                assert!((sphere_chain(m, d) - C64::new(d as f64, 0.0)).norm() < 1e-12);
            }
        }
    }
}
