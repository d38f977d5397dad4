//! The inequality `|B F|_tr <= tr(B) |F|_op` for a symmetric positive
//! semidefinite `B`, with the equality diagnostic.

use serde::Serialize;

use crate::linalg::{singular_values, symmetric_eigenvalues};
use crate::{Error, Result};

const PSD_TOL: f64 = 1e-12;
const EQUALITY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceNormCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub equality: bool,
    /// `Some(true)` when `B` is positive definite, equality holds and all
    /// singular values of `F` coincide. `None` when no equality case applies.
    pub isometry: Option<bool>,
}

impl TraceNormCheck {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs * (1.0 + EQUALITY_TOL) + EQUALITY_TOL
    }
}

/// `b` and `f` are row-major `n x n` real matrices.
pub fn trace_norm_check(b: &[f64], f: &[f64], n: usize) -> Result<TraceNormCheck> {
    if b.len() != n * n || f.len() != n * n {
        return Err(Error::RankMismatch {
            left: b.len(),
            right: f.len(),
        });
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (b[i * n + j] - b[j * n + i]).abs())
        .fold(0.0, f64::max);
    let scale = b.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    let eigs = symmetric_eigenvalues(b, n);
    let min_eig = eigs.iter().copied().fold(f64::INFINITY, f64::min);
    if asym > PSD_TOL * scale || min_eig < -PSD_TOL * scale {
        return Err(Error::NotPositiveSemidefinite(if asym > PSD_TOL * scale { f64::NAN } else { min_eig }));
    }
    let mut product = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let bik = b[i * n + k];
            for j in 0..n {
                product[i * n + j] += bik * f[k * n + j];
            }
        }
    }
    let lhs: f64 = singular_values(&product, n, n).iter().sum();
    let sv_f = singular_values(f, n, n);
    let op = sv_f.first().copied().unwrap_or(0.0);
    let trace_b: f64 = (0..n).map(|i| b[i * n + i]).sum();
    let rhs = trace_b * op;
    let equality = (rhs - lhs).abs() <= EQUALITY_TOL * rhs.abs().max(1.0);
    let definite = min_eig > PSD_TOL * scale;
    let isometry = (equality && definite).then(|| {
        let smallest = sv_f.last().copied().unwrap_or(0.0);
        (op - smallest).abs() <= 1e-8 * op.max(1.0)
    });
    Ok(TraceNormCheck {
        lhs,
        rhs,
        equality,
        isometry,
    })
}
