//! Acceptance suite. Each test prints one `PASS`/`FAIL` line for its
//! criterion and then asserts it.

mod common;

use std::time::Instant;

use nalgebra::DMatrix;
use num_rational::Rational64;
use rand::Rng;
use rayon::prelude::*;

use common::{eta_affine_oracle, random_affine_family, rng, verdict, wobbly};
use sflab::charforms::{
    beta_moment_quadrature, chern_character, chern_simons_form, cylinder_char_form, cylinder_char_form_decomposed,
    maurer_cartan_cs_closed,
};
use sflab::connections::families::{maurer_cartan_torus_u2, maurer_cartan_u1, torus_test_u2};
use sflab::cylinder::aps_index;
use sflab::eta::{affine_spectrum, boundary_term_identity, xi_affine_rational, xi_affine, xi_truncated, DEFAULT_Z_EVAL};
use sflab::exterior::CharPowerSeries;
use sflab::harness::{calibrate, trace_norm_check, verify, ConventionLedger, Scenario, ScenarioReport};
use sflab::param::Reparam;
use sflab::spectralflow::{crossing_oracle, flow};

const FAMILIES: usize = 200;

fn main_scenarios() -> Vec<Scenario> {
    let mut v: Vec<Scenario> = [-3, -1, 1, 2, 3].into_iter().map(Scenario::winding).collect();
    v.extend([-2, 0, 1, 3].into_iter().map(|d| Scenario::hypersurface(d, 1.0)));
    v
}

fn run_all(scenarios: &[Scenario], ledger: &ConventionLedger) -> Vec<ScenarioReport> {
    scenarios.par_iter().map(|s| verify(s, ledger).unwrap()).collect()
}

#[test]
fn criterion_1_spectral_equals_geometric() {
    let start = Instant::now();
    let ledger = calibrate().unwrap();
    let scenarios = main_scenarios();
    for s in &scenarios {
        assert_eq!(s.settings.cutoff, 64);
        assert_eq!(s.settings.s_samples, 65);
        assert_eq!(s.settings.grid_nodes, 512);
        assert_eq!(s.settings.residual_tol, 1e-6);
    }
    let reports = run_all(&scenarios, &ledger);
    let elapsed = start.elapsed().as_secs_f64();
    let failures: Vec<_> = reports
        .iter()
        .filter(|r| !(r.passed && r.residual.abs() < 1e-6 && r.predicted == r.sf && r.sf.unsigned_abs() as i64 == r.expected_abs_sf))
        .map(|r| r.name.clone())
        .collect();
    let worst = reports.iter().map(|r| r.residual.abs()).fold(0.0, f64::max);
    let ok = failures.is_empty() && elapsed < 60.0;
    verdict(
        1,
        ok,
        &format!("{} scenarios, max residual {worst:.1e}, {elapsed:.2} s, failures {failures:?}", reports.len()),
    );
    assert!(ok);
}

#[test]
fn criterion_2_aps_consistency() {
    let mut r = rng(2);
    let families: Vec<_> = (0..FAMILIES).map(|_| random_affine_family(&mut r)).collect();
    let failures = families
        .par_iter()
        .filter(|fam| {
            let aps = aps_index(fam).unwrap();
            let sf = flow(fam, 16, 1e-6).unwrap().sf;
            let h_b = aps.h_b as i64;
            sf != aps.ind_aps + h_b || aps.ind_maps != aps.ind_aps + h_b
        })
        .count();
    let endpoint_zeros = families.iter().filter(|f| aps_index(f).unwrap().h_a + aps_index(f).unwrap().h_b > 0).count();
    verdict(
        2,
        failures == 0,
        &format!("{FAMILIES} diagonal affine families ({endpoint_zeros} with endpoint kernels), {failures} failures"),
    );
    assert_eq!(failures, 0);
}

#[test]
fn criterion_3_flow_oracle_and_homotopy() {
    let mut r = rng(3);
    let families: Vec<_> = (0..FAMILIES).map(|_| random_affine_family(&mut r)).collect();
    let failures = families
        .par_iter()
        .filter(|fam| {
            let sf = flow(fam, 16, 1e-6).unwrap().sf;
            let oracle = crossing_oracle(fam).unwrap();
            let (a, b) = fam.interval();
            let smooth = fam.reparametrized(&Reparam::smoothstep(a, b)).unwrap();
            let wobble = fam.reparametrized(&wobbly(a, b)).unwrap();
            sf != oracle || flow(&smooth, 16, 1e-6).unwrap().sf != sf || flow(&wobble, 16, 1e-6).unwrap().sf != sf
        })
        .count();
    verdict(3, failures == 0, &format!("{FAMILIES} families x 2 reparametrizations, {failures} failures"));
    assert_eq!(failures, 0);
}

/// `|d cs - (ch(b) - ch(a))|` on a family whose endpoint Chern characters
/// differ, so the transgression is not satisfied trivially.
fn d_residual_cs(n: usize) -> f64 {
    let fam = torus_test_u2([n; 3]);
    let (a, b) = fam.interval();
    let jump = chern_character(&fam, b).unwrap().sub(&chern_character(&fam, a).unwrap()).unwrap();
    chern_simons_form(&fam, 33).unwrap().d().unwrap().max_abs_diff(&jump).unwrap()
}

fn d_residual_ch(n: usize) -> f64 {
    let fam = torus_test_u2([n; 3]);
    chern_character(&fam, 0.7).unwrap().d().unwrap().max_abs()
}

#[test]
fn criterion_4_form_engine() {
    let fam = torus_test_u2([4, 8, 8]).with_structural_curvature();
    let lifted = fam.lift(Reparam::identity(0.0, 1.0), 129).unwrap();
    let curvature_split = lifted
        .curvature_structural()
        .unwrap()
        .max_abs_diff(&lifted.curvature_decomposed().unwrap())
        .unwrap();
    let trace_identity = [CharPowerSeries::exp(2), CharPowerSeries::monomial(2)]
        .iter()
        .map(|q| {
            cylinder_char_form(&lifted, q)
                .unwrap()
                .max_abs_diff(&cylinder_char_form_decomposed(&lifted, q).unwrap())
                .unwrap()
        })
        .fold(0.0, f64::max);
    let (cs_coarse, cs_fine) = (d_residual_cs(16), d_residual_cs(32));
    let (ch_coarse, ch_fine) = (d_residual_ch(16), d_residual_ch(32));
    // Flat endpoints: cs itself is closed.
    let flat_closed = chern_simons_form(&maurer_cartan_torus_u2([16; 3]), 33).unwrap().d().unwrap().max_abs();
    let (cs_ratio, ch_ratio) = (cs_coarse / cs_fine, ch_coarse / ch_fine);
    let ok = curvature_split < 1e-6
        && trace_identity < 1e-6
        && flat_closed < 1e-10
        && (12.0..=20.0).contains(&cs_ratio)
        && (12.0..=20.0).contains(&ch_ratio);
    verdict(
        4,
        ok,
        &format!(
            "curvature split {curvature_split:.1e}, trace identity {trace_identity:.1e}, \
             flat-endpoint |d cs| {flat_closed:.1e}, \
             |d cs - ch jump| {cs_coarse:.1e} -> {cs_fine:.1e} (ratio {cs_ratio:.2}), \
             |d ch| {ch_coarse:.1e} -> {ch_fine:.1e} (ratio {ch_ratio:.2})"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_closed_form_cs() {
    let winding = maurer_cartan_u1(512, 2, 0.0);
    let err_winding = maurer_cartan_cs_closed(&winding.ds_omega(0.0).unwrap(), 1e-12)
        .unwrap()
        .max_abs_diff(&chern_simons_form(&winding, 65).unwrap())
        .unwrap();
    // The structural guard uses finite differences, O(h^4) on 16^3 nodes.
    let torus = maurer_cartan_torus_u2([16; 3]);
    let err_torus = maurer_cartan_cs_closed(&torus.ds_omega(0.0).unwrap(), 1e-3)
        .unwrap()
        .max_abs_diff(&chern_simons_form(&torus, 65).unwrap())
        .unwrap();
    let moment = beta_moment_quadrature(1, 65).unwrap();
    let err_moment = (moment + 1.0 / 6.0).abs();
    let ok = err_winding < 1e-8 && err_torus < 1e-8 && err_moment < 1e-10;
    verdict(
        5,
        ok,
        &format!("winding {err_winding:.1e}, U(2) on 3-torus {err_torus:.1e}, k = 1 moment {moment:.12} (err {err_moment:.1e})"),
    );
    assert!(ok);
}

#[test]
fn criterion_6_xi_exactness() {
    let mut r = rng(6);
    let offsets: Vec<f64> = (0..20).map(|_| r.gen_range(-3.0..3.0)).collect();
    let worst = offsets
        .par_iter()
        .map(|&c| {
            let exact = xi_affine(c);
            let (eta0, h) = eta_affine_oracle(c);
            let oracle_xi = (eta0 + h as f64) / 2.0;
            let trunc = xi_truncated(&affine_spectrum(c, 1e4), 1e4, &DEFAULT_Z_EVAL).unwrap();
            (exact.xi - oracle_xi).abs().max((exact.xi - trunc.xi).abs())
        })
        .reduce(|| 0.0, f64::max);
    let mut identity_failures = 0;
    for _ in 0..200 {
        let ca = Rational64::new(r.gen_range(-40..40), r.gen_range(1..12));
        let cb = Rational64::new(r.gen_range(-40..40), r.gen_range(1..12));
        let mult = r.gen_range(1..4);
        let (lhs, rhs) = boundary_term_identity(ca, cb, mult);
        let direct = xi_affine_rational(cb, mult).xi - xi_affine_rational(ca, mult).xi;
        if lhs != rhs || rhs != direct {
            identity_failures += 1;
        }
    }
    let ok = worst < 1e-3 && identity_failures == 0;
    verdict(
        6,
        ok,
        &format!("20 offsets, max |xi error| {worst:.1e}; boundary identity exact on 200 rational pairs ({identity_failures} failures)"),
    );
    assert!(ok);
}

fn random_psd(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let rank = r.gen_range(1..=n);
    let a: Vec<f64> = (0..n * rank).map(|_| r.gen_range(-1.0..1.0)).collect();
    let mut b = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            b[i * n + j] = (0..rank).map(|k| a[i * rank + k] * a[j * rank + k]).sum();
        }
    }
    for i in 0..n {
        for j in 0..i {
            b[j * n + i] = b[i * n + j];
        }
    }
    b
}

fn trace_norm_oracle(b: &[f64], f: &[f64], n: usize) -> f64 {
    let bm = DMatrix::from_row_slice(n, n, b);
    let fm = DMatrix::from_row_slice(n, n, f);
    (bm * fm).singular_values().sum()
}

fn random_orthogonal(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(n, n, |_, _| r.gen_range(-1.0..1.0));
    let q = m.qr().q();
    (0..n * n).map(|k| q[(k / n, k % n)]).collect()
}

#[test]
fn criterion_7_trace_norm_inequality() {
    let mut r = rng(7);
    let mut violations = 0;
    let mut oracle_mismatch = 0;
    for _ in 0..500 {
        let n = r.gen_range(2..=6);
        let b = random_psd(&mut r, n);
        let f: Vec<f64> = (0..n * n).map(|_| r.gen_range(-2.0..2.0)).collect();
        let check = trace_norm_check(&b, &f, n).unwrap();
        if !check.holds() {
            violations += 1;
        }
        let oracle = trace_norm_oracle(&b, &f, n);
        if (check.lhs - oracle).abs() > 1e-9 * oracle.max(1.0) {
            oracle_mismatch += 1;
        }
    }
    let mut equality_missed = 0;
    for _ in 0..50 {
        let n = r.gen_range(2..=6);
        let mut b = vec![0.0; n * n];
        for i in 0..n {
            b[i * n + i] = r.gen_range(0.1..3.0);
        }
        let c = r.gen_range(0.2..4.0);
        // B positive definite and F a scaled orthogonal map: equality case.
        let f: Vec<f64> = random_orthogonal(&mut r, n).into_iter().map(|x| x * c).collect();
        let check = trace_norm_check(&b, &f, n).unwrap();
        if !(check.equality && check.isometry == Some(true)) {
            equality_missed += 1;
        }
    }
    let ok = violations == 0 && oracle_mismatch == 0 && equality_missed == 0;
    verdict(
        7,
        ok,
        &format!("500 pairs: {violations} violations, {oracle_mismatch} oracle mismatches; 50 equality cases, {equality_missed} missed"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_convention_robustness() {
    let ledger = calibrate().unwrap();
    assert_eq!(calibrate().unwrap(), ledger);
    let scenarios = main_scenarios();
    let first = run_all(&scenarios, &ledger);
    let again = run_all(&scenarios, &ledger);
    let stable = first.iter().zip(&again).all(|(x, y)| x.sf == y.sf && x.predicted == y.predicted);
    let calibrated_ok = first.iter().all(|r| r.passed);
    let flipped = run_all(&scenarios, &ledger.flipped());
    let nontrivial: Vec<_> = flipped.iter().filter(|r| r.expected_abs_sf != 0).collect();
    let still_passing: Vec<_> = nontrivial.iter().filter(|r| r.passed).map(|r| r.name.clone()).collect();
    let ok = stable && calibrated_ok && still_passing.is_empty() && !nontrivial.is_empty();
    verdict(
        8,
        ok,
        &format!(
            "sigma = {} passes all {}; flipped sigma fails {}/{} nontrivial scenarios",
            ledger.sigma,
            first.len(),
            nontrivial.len() - still_passing.len(),
            nontrivial.len()
        ),
    );
    assert!(ok);
}
