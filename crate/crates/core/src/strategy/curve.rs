use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{interpolate, TimeGrid};

/// How the strategy coefficient turns into a control.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ControlForm {
    /// Dollar amount `u_t = total(t) sqrt(nu_t)` in the stock.
    Dollar,
    /// Proportion `pi_t = total(t) nu_t^power` entering
    /// `dL = [r + theta nu pi - pi^2 nu / 2] dt + sqrt(nu) pi dW_1`.
    Proportion { variance_power: f64 },
}

/// Value-function coefficients; absent entries do not apply to the objective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValueCoefficients {
    #[serde(rename = "V1", skip_serializing_if = "Option::is_none")]
    pub v1: Option<Vec<f64>>,
    #[serde(rename = "V2", skip_serializing_if = "Option::is_none")]
    pub v2: Option<Vec<f64>>,
    #[serde(rename = "V0", skip_serializing_if = "Option::is_none")]
    pub v0: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g1: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g2: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g0: Option<Vec<f64>>,
}

impl ValueCoefficients {
    fn columns(&self) -> [(&'static str, Option<&Vec<f64>>); 6] {
        [
            ("V1", self.v1.as_ref()),
            ("V2", self.v2.as_ref()),
            ("V0", self.v0.as_ref()),
            ("g1", self.g1.as_ref()),
            ("g2", self.g2.as_ref()),
            ("g0", self.g0.as_ref()),
        ]
    }
}

/// Equilibrium strategy coefficients on a calendar grid over `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyCurve {
    pub grid: TimeGrid,
    pub myopic: Vec<f64>,
    pub hedge: Vec<f64>,
    pub total: Vec<f64>,
    pub control: ControlForm,
    /// Consumption rate per unit wealth, for objectives with consumption.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub consumption: Option<Vec<f64>>,
    pub value_coeffs: ValueCoefficients,
}

impl StrategyCurve {
    /// Curve with `total = myopic + hedge`. Both must have one sample per
    /// grid node.
    pub fn from_parts(
        grid: TimeGrid,
        myopic: Vec<f64>,
        hedge: Vec<f64>,
        control: ControlForm,
        value_coeffs: ValueCoefficients,
    ) -> Self {
        debug_assert!(myopic.len() == grid.len() && hedge.len() == grid.len());
        let total = myopic.iter().zip(&hedge).map(|(m, h)| m + h).collect();
        Self { grid, myopic, hedge, total, control, consumption: None, value_coeffs }
    }

    pub fn horizon(&self) -> f64 {
        self.grid.t_end()
    }

    /// `total(t)` by linear interpolation.
    pub fn total_at(&self, t: f64) -> f64 {
        interpolate(&self.grid, &self.total, t)
    }

    /// CSV with columns `t, myopic, hedge, total, V1, V2, V0, g1, g2, g0`;
    /// coefficients that do not apply are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,myopic,hedge,total,V1,V2,V0,g1,g2,g0\n");
        let cols = self.value_coeffs.columns();
        for i in 0..self.grid.len() {
            let _ = write!(
                out,
                "{:?},{:?},{:?},{:?}",
                self.grid.time(i),
                self.myopic[i],
                self.hedge[i],
                self.total[i]
            );
            for (_, col) in &cols {
                match col {
                    Some(v) => {
                        let _ = write!(out, ",{:?}", v[i]);
                    }
                    None => out.push(','),
                }
            }
            out.push('\n');
        }
        out
    }

    /// CSV with only `t, myopic, hedge, total`.
    pub fn to_hedge_csv(&self) -> String {
        let mut out = String::from("t,myopic,hedge,total\n");
        for i in 0..self.grid.len() {
            let _ = writeln!(
                out,
                "{:?},{:?},{:?},{:?}",
                self.grid.time(i),
                self.myopic[i],
                self.hedge[i],
                self.total[i]
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Numeric(format!("serialization failed: {e}")))
    }
}

/// `c = max{2p |theta| sup|pi|, (8p^2 - 2p) sup pi^2}`, the exponential-moment
/// constant that makes a log mean-variance strategy admissible.
pub fn admissibility_constant(theta: f64, strategy: &StrategyCurve, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidArgument(format!("p must be > 1, got {p}")));
    }
    admissibility_constant_of(theta, &strategy.total, p)
}

pub(crate) fn admissibility_constant_of(theta: f64, total: &[f64], p: f64) -> Result<f64> {
    if total.is_empty() {
        return Err(Error::InvalidArgument("strategy curve is empty".into()));
    }
    let sup = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok((2.0 * p * theta.abs() * sup).max((8.0 * p * p - 2.0 * p) * sup * sup))
}
