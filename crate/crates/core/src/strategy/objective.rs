use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Discount function `h` of the non-exponential objective, `h(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiscountFunction {
    /// `h(s) = e^{-rate s}`.
    Exponential { rate: f64 },
    /// `h(s) = (1 + a s)^{-b/a}`.
    Hyperbolic { a: f64, b: f64 },
    /// Linear interpolation of `values` at `times` (starting at 0), held
    /// constant past the last sample.
    Tabulated { times: Vec<f64>, values: Vec<f64> },
}

impl DiscountFunction {
    /// Validate, rescaling a tabulated `h` whose `h(0)` is within 1e-9 of 1.
    pub fn normalized(&self) -> Result<Self> {
        let invalid = |m: String| Err(Error::Validation(m));
        match self {
            DiscountFunction::Exponential { rate } => {
                if !rate.is_finite() || *rate < 0.0 {
                    return invalid(format!("discount rate must be >= 0, got {rate}"));
                }
            }
            DiscountFunction::Hyperbolic { a, b } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return invalid(format!("hyperbolic discount needs a, b > 0, got a = {a}, b = {b}"));
                }
            }
            DiscountFunction::Tabulated { times, values } => {
                if times.len() < 2 || times.len() != values.len() {
                    return invalid("tabulated discount needs at least two (time, value) pairs".into());
                }
                if times[0] != 0.0 || times.windows(2).any(|w| !(w[1] > w[0])) {
                    return invalid("tabulated discount times must start at 0 and increase".into());
                }
                if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
                    return invalid("tabulated discount values must be finite and >= 0".into());
                }
                let h0 = values[0];
                if (h0 - 1.0).abs() > 1e-9 {
                    return invalid(format!("discount must satisfy h(0) = 1, got {h0}"));
                }
                return Ok(DiscountFunction::Tabulated {
                    times: times.clone(),
                    values: values.iter().map(|v| v / h0).collect(),
                });
            }
        }
        Ok(self.clone())
    }

    /// `h(s)` for `s >= 0`.
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            DiscountFunction::Exponential { rate } => (-rate * s).exp(),
            DiscountFunction::Hyperbolic { a, b } => (1.0 + a * s).powf(-b / a),
            DiscountFunction::Tabulated { times, values } => {
                let i = times.partition_point(|t| *t <= s);
                if i >= times.len() {
                    return *values.last().unwrap();
                }
                let i = i.max(1);
                let w = (s - times[i - 1]) / (times[i] - times[i - 1]);
                values[i - 1] + w * (values[i] - values[i - 1])
            }
        }
    }

    /// `int_0^x h(s) ds` (exact for every variant).
    pub fn integral(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match self {
            DiscountFunction::Exponential { rate } => x * crate::kernels::phi1(rate * x),
            DiscountFunction::Hyperbolic { a, b } => {
                let u = (a * x).ln_1p();
                let k = 1.0 - b / a;
                // ((1 + a x)^k - 1) / (a k), continuous at k = 0
                if k.abs() * u < 1e-8 {
                    u / a * (1.0 + 0.5 * k * u)
                } else {
                    (k * u).exp_m1() / (a * k)
                }
            }
            DiscountFunction::Tabulated { times, values } => {
                let mut total = 0.0;
                for i in 1..times.len() {
                    let (t0, t1) = (times[i - 1], times[i]);
                    if t0 >= x {
                        return total;
                    }
                    let hi = t1.min(x);
                    total += 0.5 * (hi - t0) * (values[i - 1] + self.eval(hi));
                }
                total + (x - times.last().unwrap()).max(0.0) * values.last().unwrap()
            }
        }
    }
}

/// Objective variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Objective {
    /// Mean-variance of terminal wealth with constant risk aversion.
    ConstMv { gamma: f64 },
    /// Mean-variance of terminal log-wealth; `delta` is the general-Heston exponent.
    LogMv {
        gamma: f64,
        #[serde(default = "one")]
        delta: f64,
    },
    /// Log utility of consumption and terminal wealth with discount `h`.
    NonExpLog { discount: DiscountFunction },
}

fn one() -> f64 {
    1.0
}

/// Objective plus horizon `T`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveSpec {
    pub objective: Objective,
    pub horizon: f64,
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::InvalidArgument(format!("horizon must be > 0, got {}", self.horizon)));
        }
        match &self.objective {
            Objective::ConstMv { gamma } => check_gamma(*gamma),
            Objective::LogMv { gamma, delta } => {
                check_gamma(*gamma)?;
                if !(*delta > 0.0) || !delta.is_finite() {
                    return Err(Error::Precondition(format!("delta must be > 0, got {delta}")));
                }
                Ok(())
            }
            Objective::NonExpLog { discount } => discount.normalized().map(|_| ()),
        }
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::Precondition(format!("risk aversion gamma must be > 0, got {gamma}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussLegendre;

    #[test]
    fn integrals_match_quadrature() {
        let rule = GaussLegendre::new(40);
        let cases = [
            DiscountFunction::Exponential { rate: 0.1 },
            DiscountFunction::Exponential { rate: 0.0 },
            DiscountFunction::Hyperbolic { a: 0.5, b: 0.2 },
            DiscountFunction::Hyperbolic { a: 0.3, b: 0.3 },
        ];
        for h in cases {
            let q = rule.integrate(0.0, 3.0, |s| h.eval(s));
            assert!((h.integral(3.0) - q).abs() < 1e-12, "{h:?}");
        }
        let tab = DiscountFunction::Tabulated { times: vec![0.0, 1.0, 2.0], values: vec![1.0, 0.5, 0.4] };
        assert!((tab.integral(1.5) - (0.75 + 0.5 * 0.5 * (0.5 + 0.45))).abs() < 1e-15);
        assert!((tab.integral(3.0) - (0.75 + 0.45 + 0.4)).abs() < 1e-15);
    }

    #[test]
    fn tabulated_normalization() {
        let near = DiscountFunction::Tabulated { times: vec![0.0, 1.0], values: vec![1.0 + 5e-10, 0.5] };
        match near.normalized().unwrap() {
            DiscountFunction::Tabulated { values, .. } => assert_eq!(values[0], 1.0),
            _ => unreachable!(),
        }
        let far = DiscountFunction::Tabulated { times: vec![0.0, 1.0], values: vec![0.9, 0.5] };
        assert!(matches!(far.normalized(), Err(Error::Validation(_))));
    }

    #[test]
    fn objective_validation() {
        let o = ObjectiveSpec { objective: Objective::ConstMv { gamma: 0.0 }, horizon: 1.0 };
        assert!(matches!(o.validate(), Err(Error::Precondition(_))));
        let o: ObjectiveSpec =
            serde_json::from_str(r#"{"objective": {"type": "log_mv", "gamma": 0.5}, "horizon": 3}"#).unwrap();
        assert_eq!(o.objective, Objective::LogMv { gamma: 0.5, delta: 1.0 });
    }
}
