//! Dense linear algebra kernels: small complex matrix products used per grid
//! node, a cyclic Jacobi eigenvalue solver for Hermitian matrices, and a
//! one-sided Jacobi singular value routine for real matrices.

use crate::C64;

/// `out += scale * a * b` for row-major `n x n` matrices.
#[inline]
pub fn matmul_acc(out: &mut [C64], a: &[C64], b: &[C64], n: usize, scale: C64) {
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k] * scale;
            if aik == C64::new(0.0, 0.0) {
                continue;
            }
            let row = &b[k * n..(k + 1) * n];
            let dst = &mut out[i * n..(i + 1) * n];
            for (d, bkj) in dst.iter_mut().zip(row) {
                *d += aik * bkj;
            }
        }
    }
}

pub fn matmul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    matmul_acc(&mut out, a, b, n, C64::new(1.0, 0.0));
    out
}

pub fn identity(n: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        m[i * n + i] = C64::new(1.0, 0.0);
    }
    m
}

pub fn trace(a: &[C64], n: usize) -> C64 {
    (0..n).map(|i| a[i * n + i]).sum()
}

pub fn adjoint(a: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[j * n + i] = a[i * n + j].conj();
        }
    }
    out
}

/// Largest entrywise deviation from Hermiticity, `max |a_ij - conj(a_ji)|`.
pub fn hermitian_deviation(a: &[C64], n: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[i * n + j] - a[j * n + i].conj()).norm());
        }
    }
    dev
}

/// Largest entrywise deviation from skew-Hermiticity, `max |a_ij + conj(a_ji)|`.
pub fn skew_hermitian_deviation(a: &[C64], n: usize) -> f64 {
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((a[i * n + j] + a[j * n + i].conj()).norm());
        }
    }
    dev
}

/// Off-diagonal relative tolerance at which the Jacobi sweeps stop.
pub const JACOBI_TOL: f64 = 1e-13;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) of a Hermitian row-major `n x n` matrix by cyclic
/// Jacobi rotations.
///
/// Only the upper triangle and the real part of the diagonal are trusted; the
/// caller is responsible for checking Hermiticity. Iteration stops once the
/// off-diagonal Frobenius norm drops below `JACOBI_TOL` times the Frobenius
/// norm of the matrix.
pub fn hermitian_eigenvalues(matrix: &[C64], n: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    // Mirror the upper triangle so the lower triangle is consistent.
    for i in 0..n {
        a[i * n + i] = C64::new(a[i * n + i].re, 0.0);
        for j in i + 1..n {
            a[j * n + i] = a[i * n + j].conj();
        }
    }
    let frob: f64 = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let threshold = JACOBI_TOL * frob.max(f64::MIN_POSITIVE);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += 2.0 * a[i * n + j].norm_sqr();
            }
        }
        if off.sqrt() <= threshold {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= f64::MIN_POSITIVE || r < 1e-3 * threshold / n as f64 {
                    continue;
                }
                rotate(&mut a, n, p, q, apq, r);
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
    eig.sort_by(|x, y| x.total_cmp(y));
    eig
}

/// One complex Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut [C64], n: usize, p: usize, q: usize, apq: C64, r: f64) {
    // Conjugating by diag(.., e^{-i alpha} at q, ..) makes the pivot real.
    let phase = apq / r;
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q] * phase.conj();
        let new_kp = akp * c - akq * s;
        let new_kq = akp * s + akq * c;
        a[k * n + p] = new_kp;
        a[p * n + k] = new_kp.conj();
        a[k * n + q] = new_kq;
        a[q * n + k] = new_kq.conj();
    }
    a[p * n + p] = C64::new(app - t * r, 0.0);
    a[q * n + q] = C64::new(aqq + t * r, 0.0);
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
}

/// Eigenvalues (ascending) of a real symmetric row-major matrix.
pub fn symmetric_eigenvalues(matrix: &[f64], n: usize) -> Vec<f64> {
    let complex: Vec<C64> = matrix.iter().map(|&x| C64::new(x, 0.0)).collect();
    hermitian_eigenvalues(&complex, n)
}

/// Singular values (descending) of a real row-major `rows x cols` matrix by
/// one-sided Jacobi orthogonalization of the columns.
pub fn singular_values(matrix: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    assert_eq!(matrix.len(), rows * cols);
    // Column-major working copy.
    let mut u: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| matrix[i * cols + j]).collect())
        .collect();
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = u[p].iter().map(|x| x * x).sum();
                let beta: f64 = u[q].iter().map(|x| x * x).sum();
                let gamma: f64 = u[p].iter().zip(&u[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let x = u[p][i];
                    let y = u[q][i];
                    u[p][i] = c * x - s * y;
                    u[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = u
        .iter()
        .map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv.truncate(rows.min(cols));
    sv
}
