//! Mode-wise APS and modified APS index of `d/dt + D^t` on `M x [a, b]` for
//! diagonal families.
//!
//! On branch `k` the equation `u' + lambda_k(t) u = 0` has the one-dimensional
//! solution space `u = C exp(-int lambda_k)`. The APS condition kills the
//! nonnegative spectral part at `t = a` and the nonpositive part at `t = b`; the
//! modified condition uses the strictly negative projector at `t = b`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::DiracFamily;
use crate::{Error, Result};

/// Endpoint eigenvalues this close to zero are treated as zero.
pub const ENDPOINT_ZERO: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ApsIndexResult {
    pub ind_aps: i64,
    pub ind_maps: i64,
    pub kernel_modes: Vec<i64>,
    pub cokernel_modes: Vec<i64>,
    pub maps_kernel_modes: Vec<i64>,
    pub maps_cokernel_modes: Vec<i64>,
    pub h_a: usize,
    pub h_b: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Sign {
    Neg,
    Zero,
    Pos,
}

fn sign(l: f64) -> Sign {
    if l.abs() <= ENDPOINT_ZERO {
        Sign::Zero
    } else if l < 0.0 {
        Sign::Neg
    } else {
        Sign::Pos
    }
}

#[derive(Default)]
struct Modes {
    kernel: Vec<i64>,
    cokernel: Vec<i64>,
    maps_kernel: Vec<i64>,
    maps_cokernel: Vec<i64>,
    h_a: usize,
    h_b: usize,
}

pub fn aps_index(fam: &DiracFamily) -> Result<ApsIndexResult> {
    let (lo, hi) = fam.branches().ok_or(Error::NotDiagonal)?;
    let (a, b) = fam.interval();
    let signs = (lo..=hi)
        .into_par_iter()
        .map(|k| Ok((k, sign(fam.eigencurve(k, a)?), sign(fam.eigencurve(k, b)?))))
        .collect::<Result<Vec<_>>>()?;
    let mut m = Modes::default();
    for (k, sa, sb) in signs {
        let a_neg = sa == Sign::Neg;
        if a_neg && sb == Sign::Pos {
            m.kernel.push(k);
        }
        if !a_neg && sb != Sign::Pos {
            m.cokernel.push(k);
        }
        if a_neg && sb != Sign::Neg {
            m.maps_kernel.push(k);
        }
        if !a_neg && sb == Sign::Neg {
            m.maps_cokernel.push(k);
        }
        m.h_a += usize::from(sa == Sign::Zero);
        m.h_b += usize::from(sb == Sign::Zero);
    }
    Ok(ApsIndexResult {
        ind_aps: m.kernel.len() as i64 - m.cokernel.len() as i64,
        ind_maps: m.maps_kernel.len() as i64 - m.maps_cokernel.len() as i64,
        kernel_modes: m.kernel,
        cokernel_modes: m.cokernel,
        maps_kernel_modes: m.maps_kernel,
        maps_cokernel_modes: m.maps_cokernel,
        h_a: m.h_a,
        h_b: m.h_b,
    })
}
