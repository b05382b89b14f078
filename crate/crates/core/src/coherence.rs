//! Prediction coherence and coherent aggregation.
//!
//! A forecaster is coherent on a forecasting argument `f` when their
//! prediction sits on the same side of `xi2(f)` as their derived strength
//! `sigma(f)` sits relative to `xi1(f)`; a strength at the midpoint requires a
//! prediction within `epsilon` of `xi2(f)`.

use serde::{Deserialize, Serialize};

use crate::acf::{forecaster_strengths, Acf, ForecastBase, ForecasterId, PerArgument};
use crate::error::{Error, Result};
use crate::qbaf::ArgumentId;

pub const DEFAULT_XI: f64 = 0.5;
pub const DEFAULT_EPSILON: f64 = 0.05;
pub const DEFAULT_SIGMA_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    pub xi1: PerArgument,
    pub xi2: PerArgument,
    pub epsilon: f64,
    pub sigma_eq_tol: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            xi1: PerArgument::constant(DEFAULT_XI),
            xi2: PerArgument::constant(DEFAULT_XI),
            epsilon: DEFAULT_EPSILON,
            sigma_eq_tol: DEFAULT_SIGMA_EQ_TOL,
        }
    }
}

impl ThresholdConfig {
    /// Checks that every threshold lies strictly inside (0, 1) and that the
    /// tolerances are non-negative.
    pub fn validate(&self) -> Result<()> {
        for (name, map) in [("xi1", &self.xi1), ("xi2", &self.xi2)] {
            for (arg, v) in map.values() {
                if !(v > 0.0 && v < 1.0) {
                    let what = match arg {
                        Some(a) => format!("{name}({a})"),
                        None => name.to_string(),
                    };
                    return Err(Error::OutOfRange {
                        what,
                        value: v,
                        interval: "(0, 1)",
                    });
                }
            }
        }
        for (what, v) in [("epsilon", self.epsilon), ("sigma_eq_tol", self.sigma_eq_tol)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange {
                    what: what.into(),
                    value: v,
                    interval: "[0, inf)",
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Branch {
    Below,
    Above,
    AtThreshold,
    NoPrediction,
}

/// Which side of `xi1` a strength falls on.
pub fn strength_branch(sigma: f64, xi1: f64, tol: f64) -> Branch {
    if (sigma - xi1).abs() <= tol {
        Branch::AtThreshold
    } else if sigma < xi1 {
        Branch::Below
    } else {
        Branch::Above
    }
}

/// Coherence of a single (strength, prediction) pair.
pub fn judge(sigma: f64, prediction: Option<f64>, xi1: f64, xi2: f64, epsilon: f64, tol: f64) -> (Branch, bool) {
    let Some(p) = prediction else {
        return (Branch::NoPrediction, false);
    };
    let branch = strength_branch(sigma, xi1, tol);
    let coherent = match branch {
        Branch::Below => p < xi2,
        Branch::Above => p > xi2,
        Branch::AtThreshold => (xi2 - epsilon..=xi2 + epsilon).contains(&p),
        Branch::NoPrediction => unreachable!(),
    };
    (branch, coherent)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherenceVerdict {
    pub forecaster: ForecasterId,
    pub argument: ArgumentId,
    pub sigma: f64,
    pub prediction: Option<f64>,
    pub xi1: f64,
    pub xi2: f64,
    pub coherent: bool,
    pub branch: Branch,
}

/// One verdict per forecasting argument for forecaster `u`.
pub fn check_coherence(
    acf: &Acf,
    u: &ForecasterId,
    cfg: &ThresholdConfig,
    forecast_base: &ForecastBase,
) -> Result<Vec<CoherenceVerdict>> {
    cfg.validate()?;
    let strengths = forecaster_strengths(acf, u, forecast_base)?;
    Ok(acf
        .forecasting_args()
        .map(|f| {
            let sigma = strengths.get(&f.id).expect("strength for every argument");
            let prediction = acf.prediction(u, &f.id);
            let (xi1, xi2) = (cfg.xi1.get(&f.id), cfg.xi2.get(&f.id));
            let (branch, coherent) = judge(sigma, prediction, xi1, xi2, cfg.epsilon, cfg.sigma_eq_tol);
            CoherenceVerdict {
                forecaster: u.clone(),
                argument: f.id.clone(),
                sigma,
                prediction,
                xi1,
                xi2,
                coherent,
                branch,
            }
        })
        .collect())
}

/// True iff every predicted argument is coherent and at least one
/// prediction exists.
pub fn forecaster_is_coherent(verdicts: &[CoherenceVerdict]) -> Result<bool> {
    if let Some(first) = verdicts.first() {
        if let Some(other) = verdicts.iter().find(|v| v.forecaster != first.forecaster) {
            return Err(Error::Domain(format!(
                "verdicts mix forecasters `{}` and `{}`",
                first.forecaster, other.forecaster
            )));
        }
    }
    let predicted: Vec<_> = verdicts.iter().filter(|v| v.branch != Branch::NoPrediction).collect();
    Ok(!predicted.is_empty() && predicted.iter().all(|v| v.coherent))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastSummary {
    pub argument: ArgumentId,
    pub raw_mean: Option<f64>,
    pub coherent_mean: Option<f64>,
    pub n_raw: usize,
    pub n_coherent: usize,
}

impl ForecastSummary {
    pub fn from_predictions(argument: ArgumentId, judged: &[(f64, bool)]) -> Self {
        let mean = |xs: &[f64]| (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64);
        let raw: Vec<f64> = judged.iter().map(|(p, _)| *p).collect();
        let coherent: Vec<f64> = judged.iter().filter(|(_, c)| *c).map(|(p, _)| *p).collect();
        Self {
            argument,
            raw_mean: mean(&raw),
            coherent_mean: mean(&coherent),
            n_raw: raw.len(),
            n_coherent: coherent.len(),
        }
    }
}

/// Raw and coherence-filtered mean predictions on `f`. Coherence is judged
/// per question.
pub fn aggregate_forecast(
    acf: &Acf,
    f: &ArgumentId,
    cfg: &ThresholdConfig,
    forecast_base: &ForecastBase,
) -> Result<ForecastSummary> {
    if !acf.is_forecasting(f) {
        return Err(Error::NotFound {
            kind: "forecasting argument",
            id: f.to_string(),
        });
    }
    cfg.validate()?;
    let (xi1, xi2) = (cfg.xi1.get(f), cfg.xi2.get(f));
    let mut judged = Vec::new();
    for u in acf.forecasters() {
        let Some(p) = acf.prediction(u, f) else {
            continue;
        };
        let sigma = forecaster_strengths(acf, u, forecast_base)?
            .get(f)
            .expect("strength for every argument");
        let (_, coherent) = judge(sigma, Some(p), xi1, xi2, cfg.epsilon, cfg.sigma_eq_tol);
        judged.push((p, coherent));
    }
    Ok(ForecastSummary::from_predictions(f.clone(), &judged))
}
