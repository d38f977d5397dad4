//! Eta and xi invariants: exact values for spectra `{k + c}` and a truncated
//! estimate with analytic tail correction for asymptotically affine spectra.

use num_rational::Rational64;
use serde::Serialize;

use crate::{Error, Result};

pub const KERNEL_TOL: f64 = 1e-9;
/// Maximal deviation of consecutive tail eigenvalue gaps from 1.
pub const TAIL_FIT_TOL: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EtaMethod {
    ExactAffine,
    TruncatedExtrapolated,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EtaResult {
    pub eta: f64,
    pub h: usize,
    pub xi: f64,
    pub method: EtaMethod,
    pub error_bound: f64,
}

impl EtaResult {
    fn new(eta: f64, h: usize, method: EtaMethod, error_bound: f64) -> Self {
        Self {
            eta,
            h,
            xi: 0.5 * (eta + h as f64),
            method,
            error_bound,
        }
    }
}

/// Fractional part in `[0, 1)`.
pub fn frac(c: f64) -> f64 {
    let f = c - c.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Spectrum `{k + c : k in Z}`, each eigenvalue simple.
pub fn xi_affine(offset: f64) -> EtaResult {
    xi_affine_with_multiplicity(offset, 1)
}

/// Spectrum `{k + c}` with every eigenvalue of multiplicity `mult`.
pub fn xi_affine_with_multiplicity(offset: f64, mult: usize) -> EtaResult {
    let f = frac(offset);
    let (eta, h) = if f == 0.0 { (0.0, mult) } else { (mult as f64 * (1.0 - 2.0 * f), 0) };
    EtaResult::new(eta, h, EtaMethod::ExactAffine, 0.0)
}

/// Exact rational eta, kernel dimension and xi of `{k + c}` with
/// multiplicity `mult`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RationalXi {
    pub eta: Rational64,
    pub h: i64,
    pub xi: Rational64,
}

pub fn xi_affine_rational(offset: Rational64, mult: i64) -> RationalXi {
    let f = offset - offset.floor();
    let one = Rational64::from_integer(1);
    let (eta, h) = if f == Rational64::from_integer(0) {
        (Rational64::from_integer(0), mult)
    } else {
        ((one - f * 2) * mult, 0)
    };
    RationalXi {
        eta,
        h,
        xi: (eta + h) / 2,
    }
}

/// Both sides of the boundary-term identity
/// `-(xi(D^a) + xi(-D^b)) + h(D^b) = xi(D^b) - xi(D^a)`
/// for endpoint spectra `{k + c_a}`, `{k + c_b}` (`-D^b` has offset `-c_b`).
pub fn boundary_term_identity(ca: Rational64, cb: Rational64, mult: i64) -> (Rational64, Rational64) {
    let xa = xi_affine_rational(ca, mult);
    let xb = xi_affine_rational(cb, mult);
    let xb_neg = xi_affine_rational(-cb, mult);
    (-(xa.xi + xb_neg.xi) + xb.h, xb.xi - xa.xi)
}

/// Asymptotic Hurwitz zeta `sum_{j >= 0} (x + j)^{-z}` for large `x`; at
/// `z = 1` the finite part `-psi(x)`.
fn hurwitz_tail(z: f64, x: f64) -> f64 {
    if (z - 1.0).abs() < 1e-14 {
        return -x.ln() + 0.5 / x + 1.0 / (12.0 * x * x) - 1.0 / (120.0 * x.powi(4));
    }
    x.powf(1.0 - z) / (z - 1.0) + 0.5 * x.powf(-z) + z / 12.0 * x.powf(-z - 1.0)
        - z * (z + 1.0) * (z + 2.0) / 720.0 * x.powf(-z - 3.0)
}

/// Affine tail model on one side of the spectrum.
struct Tail {
    /// First predicted eigenvalue magnitude beyond the cutoff.
    next: f64,
    mult: usize,
}

/// Fit `|lambda| ~ j + c` with constant multiplicity to the magnitudes in
/// `[cutoff / 2, cutoff]`.
fn fit_tail(mags: &mut [f64], cutoff: f64) -> Result<Tail> {
    mags.sort_by(f64::total_cmp);
    let window: Vec<f64> = mags.iter().copied().filter(|&m| m >= 0.5 * cutoff && m <= cutoff).collect();
    let mut clusters: Vec<(f64, usize)> = Vec::new();
    for m in window {
        match clusters.last_mut() {
            Some((v, k)) if (m - *v).abs() < 0.25 => *k += 1,
            _ => clusters.push((m, 1)),
        }
    }
    if clusters.len() < 3 {
        return Err(Error::NonAffineTail(f64::INFINITY));
    }
    let mult = clusters[0].1;
    let mut residual: f64 = 0.0;
    for w in clusters.windows(2) {
        residual = residual.max((w[1].0 - w[0].0 - 1.0).abs());
        if w[1].1 != mult {
            return Err(Error::NonAffineTail(residual.max(1.0)));
        }
    }
    if residual > TAIL_FIT_TOL {
        return Err(Error::NonAffineTail(residual));
    }
    let last = clusters.last().expect("nonempty").0;
    Ok(Tail { next: last + 1.0, mult })
}

/// Tail-corrected `eta(z)` from the eigenvalues with `|lambda| <= cutoff`.
fn eta_estimate(eigs: &[f64], cutoff: f64, z: f64) -> Result<f64> {
    let inside: Vec<f64> = eigs.iter().copied().filter(|l| l.abs() <= cutoff).collect();
    let mut pos: Vec<f64> = inside.iter().copied().filter(|&l| l > KERNEL_TOL).collect();
    let mut neg: Vec<f64> = inside.iter().filter(|&&l| l < -KERNEL_TOL).map(|l| -l).collect();
    let partial: f64 = pos.iter().map(|l| l.powf(-z)).sum::<f64>() - neg.iter().map(|l| l.powf(-z)).sum::<f64>();
    let tp = fit_tail(&mut pos, cutoff)?;
    let tn = fit_tail(&mut neg, cutoff)?;
    Ok(partial + tp.mult as f64 * hurwitz_tail(z, tp.next) - tn.mult as f64 * hurwitz_tail(z, tn.next))
}

/// Truncated eta with affine tail correction. `eigs` must contain every
/// eigenvalue with `|lambda| <= cutoff`. The error bound compares the
/// estimates at `cutoff` and `cutoff / 2`, at `z = 0` and on `z_eval`.
pub fn xi_truncated(eigs: &[f64], cutoff: f64, z_eval: &[f64]) -> Result<EtaResult> {
    let h = eigs.iter().filter(|l| l.abs() <= KERNEL_TOL).count();
    let eta = eta_estimate(eigs, cutoff, 0.0)?;
    let mut bound = (eta - eta_estimate(eigs, 0.5 * cutoff, 0.0)?).abs();
    let balanced = {
        let mut pos: Vec<f64> = eigs.iter().copied().filter(|&l| l > KERNEL_TOL && l <= cutoff).collect();
        let mut neg: Vec<f64> = eigs.iter().filter(|&&l| l < -KERNEL_TOL && -l <= cutoff).map(|l| -l).collect();
        fit_tail(&mut pos, cutoff)?.mult == fit_tail(&mut neg, cutoff)?.mult
    };
    for &z in z_eval {
        if (z - 1.0).abs() < 1e-14 && !balanced {
            continue;
        }
        let full = eta_estimate(eigs, cutoff, z)?;
        let half = eta_estimate(eigs, 0.5 * cutoff, z)?;
        bound = bound.max((full - half).abs());
    }
    Ok(EtaResult::new(eta, h, EtaMethod::TruncatedExtrapolated, bound))
}

/// The default extrapolation grid.
pub const DEFAULT_Z_EVAL: [f64; 3] = [2.0, 1.5, 1.0];

/// Eigenvalues `k + offset` with `|k + offset| <= cutoff`.
pub fn affine_spectrum(offset: f64, cutoff: f64) -> Vec<f64> {
    let lo = (-cutoff - offset).ceil() as i64;
    let hi = (cutoff - offset).floor() as i64;
    (lo..=hi).map(|k| k as f64 + offset).collect()
}
