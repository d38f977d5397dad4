//! Spectral flow by the partition definition: on each piece
//! `[s_{i-1}, s_i]` of a subdivision pick a level `a_i` that no eigenvalue
//! approaches, and add `rank chi_[0, a_i](D^{s_i}) - rank chi_[0, a_i](D^{s_{i-1}})`.

use rayon::prelude::*;
use serde::Serialize;

use crate::dirac::DiracFamily;
use crate::{Error, Result};

pub const DEFAULT_GAP_MARGIN: f64 = 1e-6;
pub const DEFAULT_RESOLUTION: usize = 16;
pub const SAMPLES_PER_PIECE: usize = 33;
/// Eigenvalues with `|lambda| <= ZERO_TOL` count as zero, hence as
/// nonnegative.
pub const ZERO_TOL: f64 = 1e-9;
const ENDPOINT_ZERO: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct FlowOptions {
    pub s_resolution: usize,
    pub gap_margin: f64,
    pub samples_per_piece: usize,
    pub max_depth: u32,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self {
            s_resolution: DEFAULT_RESOLUTION,
            gap_margin: DEFAULT_GAP_MARGIN,
            samples_per_piece: SAMPLES_PER_PIECE,
            max_depth: 24,
        }
    }
}

/// One certified piece of the partition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowPiece {
    pub s_start: f64,
    pub s_end: f64,
    pub level: f64,
    pub rank_start: usize,
    pub rank_end: usize,
    /// Smallest sampled distance from the spectrum to `{-level, level}`.
    pub clearance: f64,
    /// Required clearance: gap margin plus the Lipschitz allowance.
    pub required: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlowResult {
    pub sf: i64,
    pub pieces: Vec<FlowPiece>,
}

impl FlowResult {
    pub fn partition(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.pieces.iter().map(|p| p.s_start).collect();
        if let Some(last) = self.pieces.last() {
            pts.push(last.s_end);
        }
        pts
    }

    /// Recompute the sum of rank differences from the certificate.
    pub fn certificate_sum(&self) -> i64 {
        self.pieces
            .iter()
            .map(|p| p.rank_end as i64 - p.rank_start as i64)
            .sum()
    }
}

/// Spectral flow with default sampling and depth.
pub fn flow(fam: &DiracFamily, s_resolution: usize, gap_margin: f64) -> Result<FlowResult> {
    flow_with(
        fam,
        &FlowOptions {
            s_resolution,
            gap_margin,
            ..FlowOptions::default()
        },
    )
}

pub fn flow_with(fam: &DiracFamily, opts: &FlowOptions) -> Result<FlowResult> {
    if opts.s_resolution < 16 {
        return Err(Error::InvalidArgument(format!(
            "s_resolution must be at least 16, got {}",
            opts.s_resolution
        )));
    }
    if opts.samples_per_piece < 3 {
        return Err(Error::InvalidArgument("need at least 3 samples per piece".into()));
    }
    let (a, b) = fam.interval();
    let n = opts.s_resolution;
    let knots: Vec<f64> = (0..=n)
        .map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 })
        .collect();
    let chunks = knots
        .par_windows(2)
        .map(|w| certify(fam, w[0], w[1], opts, 0))
        .collect::<Result<Vec<_>>>()?;
    let pieces: Vec<FlowPiece> = chunks.into_iter().flatten().collect();
    let sf = pieces
        .iter()
        .map(|p| p.rank_end as i64 - p.rank_start as i64)
        .sum();
    Ok(FlowResult { sf, pieces })
}

fn certify(fam: &DiracFamily, s0: f64, s1: f64, opts: &FlowOptions, depth: u32) -> Result<Vec<FlowPiece>> {
    let window = fam.trust_radius();
    let m = opts.samples_per_piece;
    let ds = (s1 - s0) / (m - 1) as f64;
    let spectra = (0..m)
        .into_par_iter()
        .map(|j| {
            let s = if j == m - 1 { s1 } else { s0 + ds * j as f64 };
            fam.spectrum(s, window).map(|slice| slice.eigenvalues)
        })
        .collect::<Result<Vec<_>>>()?;

    let lipschitz = lipschitz_estimate(&spectra, ds, 0.75 * window);
    let required = opts.gap_margin + 1.5 * lipschitz * ds;

    let clearance = |level: f64| -> f64 {
        spectra
            .iter()
            .flatten()
            .map(|l| (l.abs() - level).abs())
            .fold(f64::INFINITY, f64::min)
    };
    for level in candidate_levels(&spectra, window) {
        if level <= required {
            continue;
        }
        let c = clearance(level);
        if c > required {
            let rank = |eigs: &Vec<f64>| eigs.iter().filter(|&&l| l >= -ZERO_TOL && l <= level).count();
            return Ok(vec![FlowPiece {
                s_start: s0,
                s_end: s1,
                level,
                rank_start: rank(&spectra[0]),
                rank_end: rank(&spectra[m - 1]),
                clearance: c,
                required,
            }]);
        }
    }
    if depth >= opts.max_depth {
        return Err(Error::NoCertifiableGap { s_start: s0, s_end: s1 });
    }
    let mid = 0.5 * (s0 + s1);
    let mut left = certify(fam, s0, mid, opts, depth + 1)?;
    left.extend(certify(fam, mid, s1, opts, depth + 1)?);
    Ok(left)
}

/// Largest nearest-neighbour eigenvalue motion between consecutive samples,
/// per unit parameter, among eigenvalues with `|lambda| <= cap`.
fn lipschitz_estimate(spectra: &[Vec<f64>], ds: f64, cap: f64) -> f64 {
    let nearest = |l: f64, other: &[f64]| -> f64 {
        let i = other.partition_point(|&x| x < l);
        let mut best = f64::INFINITY;
        if i < other.len() {
            best = best.min(other[i] - l);
        }
        if i > 0 {
            best = best.min(l - other[i - 1]);
        }
        best
    };
    let mut worst: f64 = 0.0;
    for pair in spectra.windows(2) {
        for (from, to) in [(&pair[0], &pair[1]), (&pair[1], &pair[0])] {
            for &l in from.iter().filter(|l| l.abs() <= cap) {
                let d = nearest(l, to);
                if d.is_finite() {
                    worst = worst.max(d);
                }
            }
        }
    }
    worst / ds
}

/// Levels to try: fractions of the smallest nonzero sampled `|lambda|`, then
/// midpoints of the gaps between sampled `|lambda|` values, widest first.
fn candidate_levels(spectra: &[Vec<f64>], window: f64) -> Vec<f64> {
    let limit = 0.5 * window;
    let mut mags: Vec<f64> = spectra
        .iter()
        .flatten()
        .map(|l| l.abs())
        .filter(|&x| x <= limit)
        .collect();
    mags.sort_by(f64::total_cmp);
    let mut levels = Vec::new();
    if let Some(&smallest) = mags.iter().find(|&&x| x > ZERO_TOL) {
        levels.extend([0.25, 0.5, 0.75].map(|f| f * smallest));
    }
    let mut gaps: Vec<(f64, f64)> = mags.windows(2).map(|w| (w[1] - w[0], 0.5 * (w[0] + w[1]))).collect();
    if let Some(&top) = mags.last() {
        gaps.push((limit - top, 0.5 * (top + limit)));
    } else {
        gaps.push((limit, 0.5 * limit));
    }
    gaps.sort_by(|x, y| y.0.total_cmp(&x.0));
    levels.extend(gaps.into_iter().map(|(_, mid)| mid));
    levels.retain(|&a| a > 0.0 && a < limit);
    levels
}

fn snap_zero(l: f64) -> f64 {
    if l.abs() <= ENDPOINT_ZERO {
        0.0
    } else {
        l
    }
}

/// Exact crossing count for diagonal families:
/// `#{lambda(a) < 0 <= lambda(b)} - #{lambda(b) < 0 <= lambda(a)}`.
pub fn crossing_oracle(fam: &DiracFamily) -> Result<i64> {
    let (lo, hi) = fam.branches().ok_or(Error::NotDiagonal)?;
    let (a, b) = fam.interval();
    let mut sf = 0;
    for k in lo..=hi {
        let la = snap_zero(fam.eigencurve(k, a)?);
        let lb = snap_zero(fam.eigencurve(k, b)?);
        if la < 0.0 && lb >= 0.0 {
            sf += 1;
        } else if lb < 0.0 && la >= 0.0 {
            sf -= 1;
        }
    }
    Ok(sf)
}
