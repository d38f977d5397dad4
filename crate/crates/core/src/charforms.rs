//! Characteristic forms of connection families: Chern character, additive
//! characteristic forms `tr q(Omega / 2 pi i)`, the odd Chern character form of
//! a path of connections, the closed-form Maurer-Cartan series, the Â-form for
//! low dimensions, and the geometric side of the index formula.
//!
//! All `1 / (2 pi i)` factors are applied while building forms.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::connections::{ConnectionFamily, LiftedConnection};
use crate::exterior::{integrate_top, Chart, CharPowerSeries, GradedMatrixForm, ScalarForm};
use crate::{Error, Result, C64};

pub const DEFAULT_S_SAMPLES: usize = 65;
pub const IMAGINARY_RESIDUE_LIMIT: f64 = 1e-6;

pub fn two_pi_i() -> C64 {
    C64::new(0.0, 2.0 * PI)
}

/// Composite Simpson weights for `samples` equispaced nodes on `[a, b]`.
pub fn simpson_weights(samples: usize, a: f64, b: f64) -> Result<Vec<f64>> {
    if samples < 3 || samples.is_multiple_of(2) {
        return Err(Error::SimpsonParity(samples));
    }
    let h = (b - a) / (samples - 1) as f64;
    Ok((0..samples)
        .map(|j| {
            let w = if j == 0 || j == samples - 1 {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            w * h / 3.0
        })
        .collect())
}

/// `tr q(Omega^s / 2 pi i)`.
pub fn char_form(fam: &ConnectionFamily, s: f64, q: &CharPowerSeries) -> Result<ScalarForm> {
    let curv = fam.curvature(s)?.scale(two_pi_i().inv());
    Ok(curv.apply_series(q)?.trace())
}

/// `tr exp(Omega^s / 2 pi i)`.
pub fn chern_character(fam: &ConnectionFamily, s: f64) -> Result<ScalarForm> {
    char_form(fam, s, &CharPowerSeries::exp_for_dim(fam.chart().dim()))
}

/// `tr(d omega^s/ds / (2 pi i) ^ q'(Omega^s / 2 pi i))`, the integrand of the
/// odd characteristic form.
pub fn odd_char_integrand(fam: &ConnectionFamily, q: &CharPowerSeries, s: f64) -> Result<ScalarForm> {
    let inv = two_pi_i().inv();
    let curv = fam.curvature(s)?.scale(inv);
    let dq = curv.apply_series(&q.derivative())?;
    Ok(fam.ds_omega(s)?.scale(inv).wedge(&dq)?.trace())
}

/// Odd characteristic form of the path, by Simpson quadrature in `s`.
pub fn odd_char_form(fam: &ConnectionFamily, q: &CharPowerSeries, s_samples: usize) -> Result<ScalarForm> {
    let (a, b) = fam.interval();
    let weights = simpson_weights(s_samples, a, b)?;
    let h = (b - a) / (s_samples - 1) as f64;
    let terms = (0..s_samples)
        .into_par_iter()
        .map(|j| {
            let s = if j == s_samples - 1 { b } else { a + h * j as f64 };
            Ok(odd_char_integrand(fam, q, s)?.scale(C64::new(weights[j], 0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut acc = GradedMatrixForm::zero(fam.chart().clone(), 1);
    for t in &terms {
        acc = acc.add(t)?;
    }
    Ok(acc)
}

/// The odd Chern character form (`q = exp`).
pub fn chern_simons_form(fam: &ConnectionFamily, s_samples: usize) -> Result<ScalarForm> {
    odd_char_form(fam, &CharPowerSeries::exp_for_dim(fam.chart().dim()), s_samples)
}

/// `int_0^1 s^k (s - 1)^k ds = (-1)^k (k!)^2 / (2k + 1)!`.
pub fn beta_moment(k: u32) -> f64 {
    let mut v = 1.0;
    for j in 1..=k {
        v *= (j * j) as f64 / ((2 * j) as f64 * (2 * j + 1) as f64);
    }
    if k % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Simpson quadrature of `s^k (s - 1)^k` over `[0, 1]`.
pub fn beta_moment_quadrature(k: u32, samples: usize) -> Result<f64> {
    let w = simpson_weights(samples, 0.0, 1.0)?;
    Ok(w.iter()
        .enumerate()
        .map(|(j, wj)| {
            let s = j as f64 / (samples - 1) as f64;
            wj * (s * (s - 1.0)).powi(k as i32)
        })
        .sum())
}

/// Closed-form odd Chern character of `d + s omega`, `s in [0, 1]`, for a
/// Maurer-Cartan form `omega`:
/// `sum_{2k+1 <= dim} (-1)^k k!/(2k+1)! tr(omega^{2k+1}) / (2 pi i)^{k+1}`.
///
/// `structural_tol` bounds `|d omega + omega ^ omega|` (finite differences).
pub fn maurer_cartan_cs_closed(omega: &GradedMatrixForm, structural_tol: f64) -> Result<ScalarForm> {
    let residual = omega.d()?.add(&omega.wedge(omega)?)?.max_abs();
    if residual > structural_tol {
        return Err(Error::StructuralEquation {
            residual,
            tol: structural_tol,
        });
    }
    let dim = omega.chart().dim();
    let mut acc = GradedMatrixForm::zero(omega.chart().clone(), 1);
    let square = omega.wedge(omega)?;
    let mut odd_power = omega.clone();
    let mut k = 0u32;
    let mut fact_ratio = 1.0; // k! / (2k+1)!
    while (2 * k + 1) as usize <= dim {
        if k > 0 {
            odd_power = odd_power.wedge(&square)?;
            fact_ratio *= k as f64 / ((2 * k) as f64 * (2 * k + 1) as f64);
        }
        let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
        let coeff = two_pi_i().powu(k + 1).inv() * (sign * fact_ratio);
        acc = acc.add(&odd_power.trace().scale(coeff))?;
        k += 1;
    }
    Ok(acc)
}

/// Input describing the tangent curvature for the Â-form.
#[derive(Clone, Debug)]
pub enum TangentCurvature {
    Flat,
    /// Riemannian curvature 2-form, real antisymmetric `dim x dim` blocks.
    Form(GradedMatrixForm),
}

/// `p_1 = -tr(R ^ R) / (8 pi^2)`.
pub fn pontryagin_p1(curvature: &GradedMatrixForm) -> Result<ScalarForm> {
    Ok(curvature
        .wedge(curvature)?
        .trace()
        .scale(C64::new(-1.0 / (8.0 * PI * PI), 0.0)))
}

/// Â-form truncated after `p_1`: `1` in dimension <= 3 or for flat metrics,
/// `1 - p_1 / 24` otherwise. Dimensions above 7 are refused.
pub fn a_hat_form(chart: &Arc<Chart>, curvature: &TangentCurvature) -> Result<ScalarForm> {
    let dim = chart.dim();
    if dim > 7 {
        return Err(Error::AHatDimension(dim));
    }
    let one = GradedMatrixForm::identity(chart.clone(), 1);
    match curvature {
        TangentCurvature::Form(r) if dim >= 4 => {
            if !r.chart().as_ref().eq(chart.as_ref()) {
                return Err(Error::ChartMismatch("tangent curvature chart".into()));
            }
            one.sub(&pontryagin_p1(r)?.scale(C64::new(1.0 / 24.0, 0.0)))
        }
        _ => Ok(one),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricSideResult {
    /// `-int Â ^ cs` as computed; its real part is the geometric side.
    pub value_re: f64,
    pub value_im: f64,
    pub imaginary_residue: f64,
    pub s_samples: usize,
    pub grid_nodes: usize,
    pub missing_top: bool,
}

impl GeometricSideResult {
    pub fn value(&self) -> f64 {
        self.value_re
    }
}

/// `-int_M Â ^ cs(nabla)`, integrated with the family chart's orientation.
pub fn geometric_side(fam: &ConnectionFamily, ahat: &ScalarForm, s_samples: usize) -> Result<GeometricSideResult> {
    if **ahat.chart() != **fam.chart() {
        return Err(Error::ChartMismatch("Â-form and family live on different charts".into()));
    }
    let cs = chern_simons_form(fam, s_samples)?;
    let integral = integrate_top(&ahat.wedge(&cs)?)?;
    let value = -integral.value;
    let residue = value.im.abs();
    if residue > IMAGINARY_RESIDUE_LIMIT {
        return Err(Error::ImaginaryResidue(residue));
    }
    Ok(GeometricSideResult {
        value_re: value.re,
        value_im: value.im,
        imaginary_residue: residue,
        s_samples,
        grid_nodes: fam.chart().nodes(),
        missing_top: integral.missing_top,
    })
}

/// `tr q(Omega_bar / 2 pi i)` from the structural curvature on the cylinder.
pub fn cylinder_char_form(lifted: &LiftedConnection, q: &CharPowerSeries) -> Result<ScalarForm> {
    let curv = lifted.curvature_structural()?.scale(two_pi_i().inv());
    Ok(curv.apply_series(q)?.trace())
}

/// `pi^* tr q(Omega^t / 2 pi i) + dt ^ pi^* tr(d_t omega^t / (2 pi i) ^ q'(Omega^t / 2 pi i))`.
pub fn cylinder_char_form_decomposed(lifted: &LiftedConnection, q: &CharPowerSeries) -> Result<ScalarForm> {
    let base = lifted.base();
    let phi = lifted.phi();
    let ts = lifted.t_values();
    let closed = ts
        .iter()
        .map(|&t| char_form(base, phi.eval(t), q))
        .collect::<Result<Vec<_>>>()?;
    let transgressive = ts
        .iter()
        .map(|&t| Ok(odd_char_integrand(base, q, phi.eval(t))?.scale(C64::new(phi.deriv(t), 0.0))))
        .collect::<Result<Vec<_>>>()?;
    let chart = lifted.chart();
    let dt = GradedMatrixForm::constant(
        chart.clone(),
        1,
        crate::exterior::MultiIndex::single(lifted.t_axis()),
        &[C64::new(1.0, 0.0)],
    );
    crate::connections::pi_star(chart, &closed)?.add(&dt.wedge(&crate::connections::pi_star(chart, &transgressive)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::families::*;
    use crate::exterior::MultiIndex;
    use crate::param::Reparam;

    #[test]
    fn flat_connection_has_constant_chern_character() {
        let fam = maurer_cartan_un(16, &[1, 2]);
        let ch = chern_character(&fam, 0.3).unwrap();
        assert_eq!(ch.grades().into_iter().collect::<Vec<_>>(), vec![0]);
        assert!((ch.scalar_at(MultiIndex::EMPTY, 5) - 2.0).norm() < 1e-15);
    }

    #[test]
    fn torus_chern_character_degree_two_part() {
        let fam = torus_test_u2([4, 6, 6]);
        let s = 0.6;
        let ch = chern_character(&fam, s).unwrap();
        let expected = fam.curvature(s).unwrap().trace().scale(two_pi_i().inv());
        assert!(ch.grade_part(2).max_abs_diff(&expected).unwrap() < 1e-15);
        // exp truncated through k = 1 by hand.
        let omega = fam.curvature(s).unwrap().scale(two_pi_i().inv());
        let by_hand = GradedMatrixForm::identity(fam.chart().clone(), 2).add(&omega).unwrap().trace();
        assert!(ch.max_abs_diff(&by_hand).unwrap() < 1e-10);
    }

    #[test]
    fn winding_cs_integrates_to_winding() {
        let fam = maurer_cartan_u1(64, 3, 0.0);
        let cs = chern_simons_form(&fam, 65).unwrap();
        let v = integrate_top(&cs).unwrap().value;
        assert!((v - 3.0).norm() < 1e-10);
        let node_value = cs.scalar_at(MultiIndex::single(0), 7);
        assert!((node_value - 3.0 / (2.0 * PI)).norm() < 1e-12);
    }

    #[test]
    fn constant_family_has_no_cs() {
        let chart = Arc::new(Chart::circle(16));
        let fam = ConnectionFamily::new("const", chart, 1, (0.0, 1.0), Arc::new(|_, _| vec![C64::new(0.0, 2.0)]))
            .unwrap();
        let cs = chern_simons_form(&fam, 33).unwrap();
        assert!(cs.max_abs() < 1e-12);
    }

    #[test]
    fn even_s_samples_are_rejected() {
        let fam = maurer_cartan_u1(16, 1, 0.0);
        assert!(matches!(chern_simons_form(&fam, 64), Err(Error::SimpsonParity(64))));
    }

    #[test]
    fn moments_match_closed_form() {
        assert!((beta_moment(0) - 1.0).abs() < 1e-15);
        assert!((beta_moment(1) + 1.0 / 6.0).abs() < 1e-15);
        assert!((beta_moment(2) - 1.0 / 30.0).abs() < 1e-15);
        assert!((beta_moment_quadrature(1, 65).unwrap() + 1.0 / 6.0).abs() < 1e-10);
        assert!((beta_moment_quadrature(3, 129).unwrap() - beta_moment(3)).abs() < 1e-9);
    }

    #[test]
    fn closed_form_matches_quadrature_on_winding() {
        let fam = maurer_cartan_u1(64, 2, 0.0);
        let closed = maurer_cartan_cs_closed(&fam.ds_omega(0.0).unwrap(), 1e-12).unwrap();
        let quad = chern_simons_form(&fam, 65).unwrap();
        assert!(closed.max_abs_diff(&quad).unwrap() < 1e-8);
    }

    #[test]
    fn closed_form_rejects_non_maurer_cartan() {
        let fam = torus_test_u2([8, 8, 8]);
        assert!(matches!(
            maurer_cartan_cs_closed(&fam.omega(1.0).unwrap(), 1e-6),
            Err(Error::StructuralEquation { .. })
        ));
    }

    #[test]
    fn a_hat_is_one_in_low_dimension_and_refuses_eight() {
        let chart = Arc::new(Chart::torus(&[4, 4, 4]));
        let a = a_hat_form(&chart, &TangentCurvature::Flat).unwrap();
        assert_eq!(a.grades().into_iter().collect::<Vec<_>>(), vec![0]);
        let big = Arc::new(Chart::torus(&[1; 8]));
        assert!(matches!(a_hat_form(&big, &TangentCurvature::Flat), Err(Error::AHatDimension(8))));
    }

    #[test]
    fn hypersurface_geometric_side_is_degree_times_orientation() {
        for d in [-2, 0, 1, 2, 3] {
            let fam = hypersurface_circle(32, d, 1.0);
            let ahat = a_hat_form(fam.chart(), &TangentCurvature::Flat).unwrap();
            let g = geometric_side(&fam, &ahat, 65).unwrap();
            assert!((g.value() - d as f64).abs() < 1e-10, "d={d} value={}", g.value());
            assert!(g.imaginary_residue < 1e-12);
        }
    }

    #[test]
    fn cylinder_trace_identity_for_exp_and_square() {
        let fam = torus_test_u2([4, 8, 8]).with_structural_curvature();
        let lifted = fam.lift(Reparam::identity(0.0, 1.0), 129).unwrap();
        for q in [CharPowerSeries::exp(2), CharPowerSeries::monomial(2)] {
            let lhs = cylinder_char_form(&lifted, &q).unwrap();
            let rhs = cylinder_char_form_decomposed(&lifted, &q).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-10);
        }
    }
}
