//! Spectra of twisted Dirac families `D^s`, either from a Fourier truncation
//! of `-i (d/dtheta + omega^s(d/dtheta))` on the circle or from closed-form
//! eigenvalue curves.

use std::fmt;
use std::sync::Arc;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::connections::ConnectionFamily;
use crate::linalg;
use crate::param::Reparam;
use crate::{Error, Result, C64};

pub const DEFAULT_CUTOFF: usize = 64;
const HERMITIAN_TOL: f64 = 1e-12;

/// Spin structure on the circle: periodic spinors (integer Fourier modes) or
/// the structure induced from a disk (half-integer modes).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpinStructure {
    Trivial,
    Bounding,
}

impl SpinStructure {
    /// Modes are `k + offset` for integer `k`.
    pub fn mode_offset(self) -> f64 {
        match self {
            SpinStructure::Trivial => 0.0,
            SpinStructure::Bounding => 0.5,
        }
    }
}

/// `(branch k, s) -> lambda_k(s)`.
pub type EigenCurve = Arc<dyn Fn(i64, f64) -> f64 + Send + Sync>;
type ParamFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Fourier {
        twist: ConnectionFamily,
        cutoff: usize,
        spin: SpinStructure,
    },
    Diagonal {
        curve: EigenCurve,
        branches: (i64, i64),
        trust: f64,
    },
}

#[derive(Clone)]
pub struct DiracFamily {
    name: String,
    kind: Kind,
    interval: (f64, f64),
    /// Outer parameter -> parameter of the underlying twist or curves.
    param: ParamFn,
}

impl fmt::Debug for DiracFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("DiracFamily");
        d.field("name", &self.name).field("interval", &self.interval);
        match &self.kind {
            Kind::Fourier { cutoff, spin, twist } => d
                .field("kind", &"fourier-circle")
                .field("cutoff", cutoff)
                .field("spin", spin)
                .field("rank", &twist.rank()),
            Kind::Diagonal { branches, trust, .. } => d
                .field("kind", &"diagonal")
                .field("branches", branches)
                .field("trust", trust),
        };
        d.finish()
    }
}

/// Eigenvalues of `D^s` inside `[-window, window]`, ascending and repeated
/// according to multiplicity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumSlice {
    pub s: f64,
    pub window: f64,
    pub eigenvalues: Vec<f64>,
    /// Fourier cutoff `K` (absent for closed-form curves).
    pub cutoff: Option<usize>,
    pub rank: usize,
}

impl SpectrumSlice {
    /// Distinct eigenvalues with multiplicities, merging values closer than
    /// `tol`.
    pub fn clusters(&self, tol: f64) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if (l - *v).abs() <= tol => *m += 1,
                _ => out.push((l, 1)),
            }
        }
        out
    }

    pub fn count_in(&self, lo: f64, hi: f64) -> usize {
        self.eigenvalues.iter().filter(|&&l| l >= lo && l <= hi).count()
    }

    /// Largest distance between two equally long sorted lists of eigenvalues
    /// restricted to `[-window, window]`; `None` when the counts differ.
    pub fn max_deviation(&self, other: &SpectrumSlice, window: f64) -> Option<f64> {
        let pick = |s: &SpectrumSlice| -> Vec<f64> {
            s.eigenvalues.iter().copied().filter(|l| l.abs() <= window).collect()
        };
        let (x, y) = (pick(self), pick(other));
        (x.len() == y.len()).then(|| x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }
}

impl DiracFamily {
    /// `-i (d/dtheta + omega^s(d/dtheta))` on `C^N`-valued spinors on the unit
    /// circle, truncated to Fourier modes `k + offset`, `|k| <= cutoff`.
    pub fn fourier_circle(twist: ConnectionFamily, cutoff: usize, spin: SpinStructure) -> Result<Self> {
        let chart = twist.chart();
        if chart.dim() != 1
            || !chart.axis(0).periodic
            || (chart.axis(0).length() - std::f64::consts::TAU).abs() > 1e-12
        {
            return Err(Error::InvalidChart(
                "Fourier circle operators need a twist on the unit circle chart".into(),
            ));
        }
        if cutoff == 0 {
            return Err(Error::InvalidArgument("Fourier cutoff must be positive".into()));
        }
        let interval = twist.interval();
        Ok(Self {
            name: format!("fourier({})", twist.name()),
            kind: Kind::Fourier { twist, cutoff, spin },
            interval,
            param: Arc::new(|s| s),
        })
    }

    /// Closed-form branches `k in branches.0..=branches.1`, reliable inside
    /// `[-trust, trust]`.
    pub fn diagonal(
        name: impl Into<String>,
        interval: (f64, f64),
        branches: (i64, i64),
        trust: f64,
        curve: EigenCurve,
    ) -> Result<Self> {
        if !(interval.0 < interval.1) || branches.0 > branches.1 || !(trust > 0.0) {
            return Err(Error::InvalidArgument("malformed diagonal family".into()));
        }
        Ok(Self {
            name: name.into(),
            kind: Kind::Diagonal {
                curve,
                branches,
                trust,
            },
            interval,
            param: Arc::new(|s| s),
        })
    }

    /// `lambda_k(s) = k + slope s + offsets[k - first]` for
    /// `k in first..first + offsets.len()`.
    pub fn affine_diagonal(interval: (f64, f64), slope: f64, first: i64, offsets: Vec<f64>) -> Result<Self> {
        if offsets.is_empty() {
            return Err(Error::InvalidArgument("no branches".into()));
        }
        let last = first + offsets.len() as i64 - 1;
        let reach = slope.abs() * interval.0.abs().max(interval.1.abs())
            + offsets.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let trust = (first.abs().min(last.abs()) as f64 - reach - 1.0).max(0.5);
        let offsets = Arc::new(offsets);
        Self::diagonal(
            format!("affine(slope={slope})"),
            interval,
            (first, last),
            trust,
            Arc::new(move |k, s| k as f64 + slope * s + offsets[(k - first) as usize]),
        )
    }

    /// `lambda_k(s) = k + slope s + offset` with `|k| <= half_width`.
    pub fn uniform_affine(interval: (f64, f64), slope: f64, offset: f64, half_width: i64) -> Result<Self> {
        Self::affine_diagonal(interval, slope, -half_width, vec![offset; (2 * half_width + 1) as usize])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.kind, Kind::Diagonal { .. })
    }

    pub fn cutoff(&self) -> Option<usize> {
        match self.kind {
            Kind::Fourier { cutoff, .. } => Some(cutoff),
            Kind::Diagonal { .. } => None,
        }
    }

    pub fn spin(&self) -> Option<SpinStructure> {
        match self.kind {
            Kind::Fourier { spin, .. } => Some(spin),
            Kind::Diagonal { .. } => None,
        }
    }

    pub fn rank(&self) -> usize {
        match &self.kind {
            Kind::Fourier { twist, .. } => twist.rank(),
            Kind::Diagonal { .. } => 1,
        }
    }

    /// Half-width of the window inside which eigenvalues are trusted.
    pub fn trust_radius(&self) -> f64 {
        match &self.kind {
            Kind::Fourier { cutoff, .. } => *cutoff as f64 / 2.0,
            Kind::Diagonal { trust, .. } => *trust,
        }
    }

    pub fn branches(&self) -> Option<(i64, i64)> {
        match self.kind {
            Kind::Diagonal { branches, .. } => Some(branches),
            Kind::Fourier { .. } => None,
        }
    }

    fn check_param(&self, s: f64) -> Result<()> {
        let (a, b) = self.interval;
        let slack = 1e-12 * (b - a);
        if s.is_nan() || s < a - slack || s > b + slack {
            return Err(Error::ParameterOutOfRange { s, a, b });
        }
        Ok(())
    }

    /// Value of branch `k` at `s` for diagonal families.
    pub fn eigencurve(&self, k: i64, s: f64) -> Result<f64> {
        self.check_param(s)?;
        match &self.kind {
            Kind::Diagonal { curve, .. } => Ok(curve(k, (self.param)(s))),
            Kind::Fourier { .. } => Err(Error::NotDiagonal),
        }
    }

    /// Assembled Fourier matrix (dimension `(2K + 1) N`) at `s`.
    pub fn operator_matrix(&self, s: f64) -> Result<(Vec<C64>, usize)> {
        self.check_param(s)?;
        let Kind::Fourier { twist, cutoff, spin } = &self.kind else {
            return Err(Error::NotDiagonal);
        };
        let coeffs = self.twist_coefficients(twist, *cutoff, s);
        let n = twist.rank();
        let modes = 2 * cutoff + 1;
        let dim = modes * n;
        let mut h = vec![C64::new(0.0, 0.0); dim * dim];
        for i in 0..modes {
            for j in 0..modes {
                let shift = i as i64 - j as i64;
                let block = &coeffs[coeff_slot(shift, coeffs.len() / (n * n)) * n * n..][..n * n];
                for a in 0..n {
                    for b in 0..n {
                        h[(i * n + a) * dim + j * n + b] = block[a * n + b];
                    }
                }
            }
            let mode = i as f64 - *cutoff as f64 + spin.mode_offset();
            for a in 0..n {
                h[(i * n + a) * dim + i * n + a] += mode;
            }
        }
        Ok((h, dim))
    }

    /// Fourier coefficients of `A = -i omega(d/dtheta)`, as `M` consecutive
    /// `N x N` blocks in FFT order.
    fn twist_coefficients(&self, twist: &ConnectionFamily, cutoff: usize, s: f64) -> Vec<C64> {
        let (ta, tb) = twist.interval();
        let inner = (self.param)(s).clamp(ta, tb);
        let n2 = twist.rank() * twist.rank();
        let samples = (4 * cutoff + 2).next_power_of_two().max(8);
        let mut series = vec![vec![C64::new(0.0, 0.0); samples]; n2];
        for l in 0..samples {
            let theta = std::f64::consts::TAU * l as f64 / samples as f64;
            let w = twist.omega_values(inner, &[theta]);
            for e in 0..n2 {
                series[e][l] = w[e] * C64::new(0.0, -1.0);
            }
        }
        let fft = FftPlanner::new().plan_fft_forward(samples);
        let mut out = vec![C64::new(0.0, 0.0); samples * n2];
        for (e, data) in series.iter_mut().enumerate() {
            fft.process(data);
            for (j, z) in data.iter().enumerate() {
                out[j * n2 + e] = z / samples as f64;
            }
        }
        out
    }

    /// Spectrum inside `[-window, window]`.
    pub fn spectrum(&self, s: f64, window: f64) -> Result<SpectrumSlice> {
        self.check_param(s)?;
        let trust = self.trust_radius();
        if window > trust * (1.0 + 1e-12) {
            return Err(Error::WindowExceedsTrust { window, trust });
        }
        let eigenvalues = match &self.kind {
            Kind::Diagonal { curve, branches, .. } => {
                let t = (self.param)(s);
                let mut v: Vec<f64> = (branches.0..=branches.1).map(|k| curve(k, t)).collect();
                v.sort_by(f64::total_cmp);
                v
            }
            Kind::Fourier { twist, cutoff, spin } => self.fourier_eigenvalues(twist, *cutoff, *spin, s)?,
        };
        Ok(SpectrumSlice {
            s,
            window,
            eigenvalues: eigenvalues.into_iter().filter(|l| l.abs() <= window).collect(),
            cutoff: self.cutoff(),
            rank: self.rank(),
        })
    }

    fn fourier_eigenvalues(
        &self,
        twist: &ConnectionFamily,
        cutoff: usize,
        spin: SpinStructure,
        s: f64,
    ) -> Result<Vec<f64>> {
        let n = twist.rank();
        let n2 = n * n;
        let coeffs = self.twist_coefficients(twist, cutoff, s);
        let samples = coeffs.len() / n2;
        let scale = 1.0 + coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        let offblock = (1..samples).flat_map(|j| &coeffs[j * n2..(j + 1) * n2]).fold(0.0f64, |m, z| m.max(z.norm()));
        if offblock <= 1e-14 * scale {
            // Theta-independent twist: the matrix is a direct sum of N x N
            // blocks `mode + A_0`.
            let block = &coeffs[..n2];
            let dev = linalg::hermitian_deviation(block, n);
            if dev > HERMITIAN_TOL {
                return Err(Error::NonHermitian(dev));
            }
            let base = linalg::hermitian_eigenvalues(block, n);
            let mut eig = Vec::with_capacity((2 * cutoff + 1) * n);
            for i in 0..=2 * cutoff {
                let mode = i as f64 - cutoff as f64 + spin.mode_offset();
                eig.extend(base.iter().map(|b| b + mode));
            }
            eig.sort_by(f64::total_cmp);
            return Ok(eig);
        }
        let (h, dim) = self.operator_matrix(s)?;
        let dev = linalg::hermitian_deviation(&h, dim);
        if dev > HERMITIAN_TOL {
            return Err(Error::NonHermitian(dev));
        }
        Ok(linalg::hermitian_eigenvalues(&h, dim))
    }

    /// Number of eigenvalues with `|lambda| <= zero_tol`; refuses when an
    /// eigenvalue lies in `(zero_tol, 2 zero_tol]`.
    pub fn kernel_dim(&self, s: f64, zero_tol: f64) -> Result<usize> {
        let window = self.trust_radius().min(1.0).max(2.0 * zero_tol).min(self.trust_radius());
        let slice = self.spectrum(s, window)?;
        if let Some(&lambda) = slice
            .eigenvalues
            .iter()
            .find(|l| l.abs() > zero_tol && l.abs() <= 2.0 * zero_tol)
        {
            return Err(Error::ToleranceAmbiguity { tol: zero_tol, lambda });
        }
        Ok(slice.count_in(-zero_tol, zero_tol))
    }

    /// The family `t -> D^{phi(t)}` over the domain of `phi`.
    pub fn reparametrized(&self, phi: &Reparam) -> Result<Self> {
        let (ta, tb) = phi.target();
        let (a, b) = self.interval;
        if (ta - a).abs() > 1e-12 * (b - a) || (tb - b).abs() > 1e-12 * (b - a) {
            return Err(Error::InvalidArgument(format!(
                "reparametrization targets [{ta}, {tb}] but the family lives on [{a}, {b}]"
            )));
        }
        let inner = self.param.clone();
        let phi = phi.clone();
        Ok(Self {
            name: format!("{}(reparametrized)", self.name),
            kind: self.kind.clone(),
            interval: phi.domain(),
            param: Arc::new(move |t| inner(phi.eval(t))),
        })
    }

    pub fn restricted(&self, a: f64, b: f64) -> Result<Self> {
        self.check_param(a)?;
        self.check_param(b)?;
        if !(a < b) {
            return Err(Error::InvalidArgument(format!("empty sub-interval [{a}, {b}]")));
        }
        let mut out = self.clone();
        out.interval = (a, b);
        Ok(out)
    }

    /// `s -> D^{a + b - s}`.
    pub fn reversed(&self) -> Self {
        let (a, b) = self.interval;
        let inner = self.param.clone();
        Self {
            name: format!("{}(reversed)", self.name),
            kind: self.kind.clone(),
            interval: self.interval,
            param: Arc::new(move |s| inner(a + b - s)),
        }
    }
}

/// FFT slot of the coefficient of `e^{i shift theta}`.
fn coeff_slot(shift: i64, samples: usize) -> usize {
    shift.rem_euclid(samples as i64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::families::*;
    use crate::exterior::Chart;

    fn untwisted(rank: usize) -> ConnectionFamily {
        ConnectionFamily::new(
            "flat",
            Arc::new(Chart::circle(16)),
            rank,
            (0.0, 1.0),
            Arc::new(move |_, _| vec![C64::new(0.0, 0.0); rank * rank]),
        )
        .unwrap()
    }

    #[test]
    fn winding_spectrum_is_shifted_integers() {
        let fam = DiracFamily::fourier_circle(maurer_cartan_u1(16, 1, 0.0), 64, SpinStructure::Trivial).unwrap();
        for s in [0.0, 0.25, 0.7] {
            let slice = fam.spectrum(s, 10.0).unwrap();
            for l in &slice.eigenvalues {
                let k = (l - s).round();
                assert!((l - (k + s)).abs() < 1e-12);
            }
            let expected = (-20..=20).filter(|k| (*k as f64 + s).abs() <= 10.0).count();
            assert_eq!(slice.eigenvalues.len(), expected);
        }
    }

    #[test]
    fn perturbed_winding_keeps_gauge_spectrum() {
        let flat = DiracFamily::fourier_circle(maurer_cartan_u1(16, 2, 0.0), 32, SpinStructure::Trivial).unwrap();
        let bumpy = DiracFamily::fourier_circle(maurer_cartan_u1(16, 2, 0.4), 32, SpinStructure::Trivial).unwrap();
        for s in [0.1, 0.6] {
            let dev = flat
                .spectrum(s, 8.0)
                .unwrap()
                .max_deviation(&bumpy.spectrum(s, 8.0).unwrap(), 7.5)
                .unwrap();
            assert!(dev < 1e-10, "dev {dev}");
        }
    }

    #[test]
    fn assembled_matrix_is_hermitian() {
        let fam = DiracFamily::fourier_circle(maurer_cartan_u1(16, 1, 0.3), 8, SpinStructure::Bounding).unwrap();
        let (h, dim) = fam.operator_matrix(0.4).unwrap();
        assert_eq!(dim, 17);
        assert!(linalg::hermitian_deviation(&h, dim) < 1e-12);
    }

    #[test]
    fn untwisted_spectra_and_kernels() {
        let bounding = DiracFamily::fourier_circle(untwisted(2), 16, SpinStructure::Bounding).unwrap();
        let slice = bounding.spectrum(0.3, 3.0).unwrap();
        assert!(slice.eigenvalues.iter().all(|l| (l - l.floor() - 0.5).abs() < 1e-15));
        assert_eq!(bounding.kernel_dim(0.3, 1e-9).unwrap(), 0);
        let trivial = DiracFamily::fourier_circle(untwisted(3), 16, SpinStructure::Trivial).unwrap();
        assert_eq!(trivial.kernel_dim(0.0, 1e-9).unwrap(), 3);
    }

    #[test]
    fn kernel_dim_refuses_ambiguous_tolerance() {
        let fam = DiracFamily::uniform_affine((0.0, 1.0), 1.0, 0.0, 10).unwrap();
        assert_eq!(fam.kernel_dim(0.5, 1e-9).unwrap(), 0);
        assert!(matches!(fam.kernel_dim(1.5e-9, 1e-9), Err(Error::ToleranceAmbiguity { .. })));
    }

    #[test]
    fn window_beyond_trust_is_refused() {
        let fam = DiracFamily::fourier_circle(maurer_cartan_u1(16, 1, 0.0), 16, SpinStructure::Trivial).unwrap();
        assert!(matches!(fam.spectrum(0.0, 9.0), Err(Error::WindowExceedsTrust { .. })));
    }

    #[test]
    fn hypersurface_fourier_matches_closed_form() {
        for d in [-2i64, 1, 3] {
            let fam =
                DiracFamily::fourier_circle(hypersurface_circle(16, d, 1.0), 64, SpinStructure::Bounding).unwrap();
            for s in [-0.5, -0.1, 0.5] {
                let slice = fam.spectrum(s, 20.0).unwrap();
                let mut expected: Vec<f64> = (-80..=80)
                    .map(|k| (k as f64 + 0.5) - (s - 0.5) * d as f64)
                    .filter(|l: &f64| l.abs() <= 20.0)
                    .collect();
                expected.sort_by(f64::total_cmp);
                assert_eq!(slice.eigenvalues.len(), expected.len());
                for (a, b) in slice.eigenvalues.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn reversal_and_restriction_remap_parameters() {
        let fam = DiracFamily::uniform_affine((0.0, 1.0), 2.0, 0.0, 10).unwrap();
        let rev = fam.reversed();
        assert!((rev.eigencurve(0, 0.25).unwrap() - 1.5).abs() < 1e-15);
        let sub = fam.restricted(0.25, 0.5).unwrap();
        assert_eq!(sub.interval(), (0.25, 0.5));
        assert!(sub.eigencurve(0, 0.1).is_err());
    }
}
