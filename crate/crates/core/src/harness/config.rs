//! JSON scenario configuration.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{find_scenario, Scenario};
use crate::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub residual: Option<f64>,
    pub gap_margin: Option<f64>,
    pub probe_window: Option<f64>,
}

/// `scenario` is either a registered scenario name or one of the kinds
/// `winding`, `hypersurface`, `unitary`, `partial-winding`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub m: Option<i64>,
    pub degree: Option<i64>,
    pub radius: Option<f64>,
    /// Rank of the unitary family; every diagonal entry gets winding `m`
    /// unless `windings` is given.
    pub rank: Option<usize>,
    pub windings: Option<Vec<i64>>,
    /// End of the parameter interval for `partial-winding`.
    pub end: Option<f64>,
    pub cutoff: Option<usize>,
    pub s_samples: Option<usize>,
    pub grid_nodes: Option<usize>,
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn to_scenario(&self) -> Result<Scenario> {
        let need = |v: Option<i64>, key: &str| {
            v.ok_or_else(|| Error::InvalidArgument(format!("scenario {:?} needs key {key:?}", self.scenario)))
        };
        let mut sc = match self.scenario.as_str() {
            "winding" => Scenario::winding(need(self.m, "m")?),
            "hypersurface" => Scenario::hypersurface(need(self.degree, "degree")?, self.radius.unwrap_or(1.0)),
            "unitary" => {
                let windings = match (&self.windings, self.rank) {
                    (Some(w), rank) => {
                        if rank.is_some_and(|r| r != w.len()) {
                            return Err(Error::InvalidArgument("rank disagrees with windings".into()));
                        }
                        w.clone()
                    }
                    (None, Some(r)) => vec![need(self.m, "m")?; r],
                    (None, None) => return Err(Error::InvalidArgument("unitary needs rank or windings".into())),
                };
                Scenario::unitary(windings)
            }
            "partial-winding" => {
                let end = self.end.unwrap_or(0.5);
                Scenario::partial_winding(need(self.m, "m")?, end, &format!("end={end}"))
            }
            name => find_scenario(name)?,
        };
        let st = &mut sc.settings;
        if let Some(k) = self.cutoff {
            st.cutoff = k;
        }
        if let Some(n) = self.s_samples {
            st.s_samples = n;
        }
        if let Some(n) = self.grid_nodes {
            st.grid_nodes = n;
        }
        if let Some(t) = self.tolerances.residual {
            st.residual_tol = t;
        }
        if let Some(t) = self.tolerances.gap_margin {
            st.gap_margin = t;
        }
        if let Some(w) = self.tolerances.probe_window {
            st.probe_window = w;
        }
        Ok(sc)
    }
}
