//! Scenario registry, sign calibration and end-to-end verification of
//! `sf = -int Â ^ cs + xi(D^b) - xi(D^a)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charforms::{a_hat_form, geometric_side, TangentCurvature};
use crate::connections::families::BuiltinFamily;
use crate::connections::ConnectionFamily;
use crate::dirac::{DiracFamily, SpinStructure};
use crate::eta::{xi_truncated, EtaResult, DEFAULT_Z_EVAL};
use crate::spectralflow::flow;
use crate::{Error, Result};

pub mod config;
pub mod output;
pub mod sphere;
pub mod trace_norm;

pub use trace_norm::{trace_norm_check, TraceNormCheck};

/// Numerical settings shared by the spectral and geometric sides.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Settings {
    pub cutoff: usize,
    pub s_samples: usize,
    pub grid_nodes: usize,
    pub s_resolution: usize,
    pub gap_margin: f64,
    /// Bound on `|sf - geometric side - xi difference|` before rounding.
    pub residual_tol: f64,
    /// Window for the endpoint isospectrality probe.
    pub probe_window: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            cutoff: 64,
            s_samples: 65,
            grid_nodes: 512,
            s_resolution: 16,
            gap_margin: 1e-6,
            residual_tol: 1e-6,
            probe_window: 10.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub family: BuiltinFamily,
    pub spin: SpinStructure,
    /// Optional sub-interval of the family parameter.
    #[serde(default)]
    pub restrict: Option<(f64, f64)>,
    pub expected_abs_sf: i64,
    /// Where the expected value comes from.
    pub expected_source: String,
    /// Endpoint operators are claimed isospectral, so the xi terms cancel.
    pub xi_cancels: bool,
    #[serde(default)]
    pub settings: Settings,
}

impl Scenario {
    pub fn winding(m: i64) -> Self {
        Self {
            name: format!("winding-m={m}"),
            family: BuiltinFamily::MaurerCartanU1 {
                winding: m,
                perturbation: 0.0,
            },
            spin: SpinStructure::Trivial,
            restrict: None,
            expected_abs_sf: m.abs(),
            expected_source: "winding number of the pulled-back U(1) map".into(),
            xi_cancels: true,
            settings: Settings::default(),
        }
    }

    pub fn hypersurface(degree: i64, radius: f64) -> Self {
        Self {
            name: if radius == 1.0 {
                format!("hypersurface-d={degree}")
            } else {
                format!("hypersurface-d={degree}-r={radius}")
            },
            family: BuiltinFamily::HypersurfaceCircle { degree, radius },
            spin: SpinStructure::Bounding,
            restrict: None,
            expected_abs_sf: degree.abs(),
            expected_source: "degree of the map to the hypersurface".into(),
            xi_cancels: true,
            settings: Settings::default(),
        }
    }

    pub fn unitary(windings: Vec<i64>) -> Self {
        let total: i64 = windings.iter().sum();
        Self {
            name: format!(
                "maurer-cartan-u{}-{}",
                windings.len(),
                windings.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(",")
            ),
            family: BuiltinFamily::MaurerCartanUN { windings },
            spin: SpinStructure::Trivial,
            restrict: None,
            expected_abs_sf: total.abs(),
            expected_source: "sum of the windings of the diagonalized U(N) map".into(),
            xi_cancels: true,
            settings: Settings::default(),
        }
    }

    /// Winding family stopped at `s = end`: endpoint spectra differ, the
    /// xi terms compensate the non-integral geometric side.
    pub fn partial_winding(m: i64, end: f64, label: &str) -> Self {
        Self {
            name: format!("partial-winding-m={m}-{label}"),
            family: BuiltinFamily::MaurerCartanU1 {
                winding: m,
                perturbation: 0.0,
            },
            spin: SpinStructure::Trivial,
            restrict: Some((0.0, end)),
            expected_abs_sf: 0,
            expected_source: "no eigenvalue reaches zero from below on the sub-interval".into(),
            xi_cancels: false,
            settings: Settings::default(),
        }
    }

    /// Connection family with chart orientation `sigma`.
    pub fn connection(&self, sigma: i8) -> Result<ConnectionFamily> {
        let mut fam = self
            .family
            .build(self.settings.grid_nodes)?
            .with_orientation(f64::from(sigma));
        if let Some((a, b)) = self.restrict {
            fam = fam.restricted(a, b)?;
        }
        Ok(fam)
    }

    pub fn dirac(&self) -> Result<DiracFamily> {
        DiracFamily::fourier_circle(self.connection(1)?, self.settings.cutoff, self.spin)
    }
}

/// Scenarios run by `verify --all` and the acceptance suite.
pub fn registry() -> Vec<Scenario> {
    let mut out: Vec<Scenario> = [-3, -1, 1, 2, 3].into_iter().map(Scenario::winding).collect();
    out.extend([-2, 0, 1, 3].into_iter().map(|d| Scenario::hypersurface(d, 1.0)));
    out.push(Scenario::hypersurface(2, 1.0));
    out.push(Scenario::hypersurface(2, 2.5));
    out.push(Scenario::unitary(vec![2, -1, 1]));
    out.push(Scenario::partial_winding(1, 0.5, "half"));
    out.push(Scenario::partial_winding(1, 1.0 / 3.0, "third"));
    out
}

pub fn find_scenario(name: &str) -> Result<Scenario> {
    registry()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::Unknown(name.to_string()))
}

/// Global conventions fixed once by calibration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConventionLedger {
    /// Orientation of the base circle used on the geometric side.
    pub sigma: i8,
    pub spin_structures: BTreeMap<String, SpinStructure>,
    /// Clifford multiplication by the unit tangent of the circle.
    pub clifford_constant: String,
    pub calibration_scenario: String,
    pub calibration_sf: i64,
    pub calibration_geometric_raw: f64,
}

impl ConventionLedger {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// The ledger with the opposite sign, for sensitivity checks.
    pub fn flipped(&self) -> Self {
        Self {
            sigma: -self.sigma,
            ..self.clone()
        }
    }
}

/// Fix `sigma` from the winding `m = 1` scenario.
pub fn calibrate() -> Result<ConventionLedger> {
    let scenario = Scenario::winding(1);
    let sf = flow(&scenario.dirac()?, scenario.settings.s_resolution, scenario.settings.gap_margin)?.sf;
    let fam = scenario.connection(1)?;
    let ahat = a_hat_form(fam.chart(), &TangentCurvature::Flat)?;
    let raw = geometric_side(&fam, &ahat, scenario.settings.s_samples)?.value();
    let tol = scenario.settings.residual_tol;
    if (raw.abs() - 1.0).abs() > tol || sf.abs() != 1 {
        return Err(Error::Calibration(format!("expected |sf| = |geometric| = 1, got sf = {sf}, geometric = {raw}")));
    }
    let sigma = [1i8, -1]
        .into_iter()
        .find(|&sg| (sf as f64 - f64::from(sg) * raw).abs() < tol)
        .ok_or_else(|| Error::Calibration(format!("no sign matches sf = {sf} and geometric = {raw}")))?;
    let spin_structures = BuiltinFamily::NAMES
        .iter()
        .filter(|n| **n != "torus-test-u2")
        .map(|n| {
            let spin = if *n == "hypersurface-circle" {
                SpinStructure::Bounding
            } else {
                SpinStructure::Trivial
            };
            (n.to_string(), spin)
        })
        .collect();
    Ok(ConventionLedger {
        sigma,
        spin_structures,
        clifford_constant: "-i".into(),
        calibration_scenario: scenario.name,
        calibration_sf: sf,
        calibration_geometric_raw: raw,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub sf: i64,
    pub geometric: f64,
    pub xi_a: Option<EtaResult>,
    pub xi_b: Option<EtaResult>,
    pub xi_difference: f64,
    /// Largest endpoint eigenvalue deviation when the xi terms cancel.
    pub isospectral_deviation: Option<f64>,
    /// `sf - (geometric + xi difference)`.
    pub residual: f64,
    pub predicted: i64,
    pub expected_abs_sf: i64,
    pub passed: bool,
    pub runtime_ms: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub sigma: i8,
    pub entries: Vec<ScenarioReport>,
    pub all_passed: bool,
}

fn round_half_away(x: f64) -> i64 {
    x.round() as i64
}

/// Run both sides of the formula on one scenario.
pub fn verify(scenario: &Scenario, ledger: &ConventionLedger) -> Result<ScenarioReport> {
    let start = Instant::now();
    let settings = &scenario.settings;
    let dirac = scenario.dirac()?;
    let sf = flow(&dirac, settings.s_resolution, settings.gap_margin)?.sf;

    let fam = scenario.connection(ledger.sigma)?;
    let ahat = a_hat_form(fam.chart(), &TangentCurvature::Flat)?;
    let geometric = geometric_side(&fam, &ahat, settings.s_samples)?.value();

    let (a, b) = dirac.interval();
    let (mut xi_a, mut xi_b, mut iso) = (None, None, None);
    let xi_difference = if scenario.xi_cancels {
        let window = settings.probe_window.min(dirac.trust_radius());
        let dev = dirac
            .spectrum(a, window)?
            .max_deviation(&dirac.spectrum(b, window)?, window - 0.5)
            .unwrap_or(f64::INFINITY);
        if dev > 1e-9 {
            return Err(Error::NotIsospectral(dev));
        }
        iso = Some(dev);
        0.0
    } else {
        let trust = dirac.trust_radius();
        let ea = xi_truncated(&dirac.spectrum(a, trust)?.eigenvalues, trust, &DEFAULT_Z_EVAL)?;
        let eb = xi_truncated(&dirac.spectrum(b, trust)?.eigenvalues, trust, &DEFAULT_Z_EVAL)?;
        xi_a = Some(ea);
        xi_b = Some(eb);
        eb.xi - ea.xi
    };
    let prediction = geometric + xi_difference;
    let residual = sf as f64 - prediction;
    let predicted = round_half_away(prediction);
    let passed = residual.abs() < settings.residual_tol && predicted == sf && sf.abs() == scenario.expected_abs_sf;
    Ok(ScenarioReport {
        name: scenario.name.clone(),
        sf,
        geometric,
        xi_a,
        xi_b,
        xi_difference,
        isospectral_deviation: iso,
        residual,
        predicted,
        expected_abs_sf: scenario.expected_abs_sf,
        passed,
        runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Verify scenarios in parallel; entries are ordered by scenario name.
pub fn verify_all(scenarios: &[Scenario], ledger: &ConventionLedger) -> Result<VerificationReport> {
    let mut entries = scenarios
        .par_iter()
        .map(|s| verify(s, ledger))
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|x, y| x.name.cmp(&y.name));
    let all_passed = entries.iter().all(|e| e.passed);
    Ok(VerificationReport {
        sigma: ledger.sigma,
        entries,
        all_passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_is_idempotent() {
        let a = calibrate().unwrap();
        let b = calibrate().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.sigma, -1);
    }

    #[test]
    fn winding_minus_two_passes_after_calibration() {
        let ledger = calibrate().unwrap();
        let r = verify(&Scenario::winding(-2), &ledger).unwrap();
        assert!(r.passed, "{r:?}");
        assert_eq!(r.sf, -2);
    }

    #[test]
    fn constant_map_is_trivial() {
        let ledger = calibrate().unwrap();
        let r = verify(&Scenario::hypersurface(0, 1.0), &ledger).unwrap();
        assert!(r.passed);
        assert_eq!(r.sf, 0);
        assert!(r.geometric.abs() < 1e-12);
    }

    #[test]
    fn partial_winding_needs_xi_terms() {
        let ledger = calibrate().unwrap();
        let r = verify(&Scenario::partial_winding(1, 0.5, "half"), &ledger).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.geometric - 0.5).abs() < 1e-9);
        assert!((r.xi_difference + 0.5).abs() < 1e-9);
    }

    #[test]
    fn ledger_round_trips_through_json() {
        let ledger = calibrate().unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ledger.json");
        ledger.save(&path).unwrap();
        assert_eq!(ConventionLedger::load(&path).unwrap(), ledger);
    }

    #[test]
    fn registry_names_are_unique() {
        let names: std::collections::BTreeSet<String> = registry().into_iter().map(|s| s.name).collect();
        assert_eq!(names.len(), registry().len());
        assert!(find_scenario("winding-m=2").is_ok());
        assert!(find_scenario("nope").is_err());
    }
}
