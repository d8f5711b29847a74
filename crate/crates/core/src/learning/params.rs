use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hyperparameters shared by every classifier.
///
/// The JSON form is a flat object keyed by field name; unknown keys are
/// rejected and every value is range-checked on construction and on every
/// override.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifierParams {
    /// Prior mean for a component the learner has not met.
    pub init_mean: f64,
    /// Prior variance for a component the learner has not met.
    pub init_variance: f64,
    /// Performance noise (standard deviation) per team member.
    pub beta: f64,
    /// Dynamics noise (standard deviation) added before each update.
    pub tau: f64,
    /// Draw probability used to derive the novelty margin.
    pub draw_probability: f64,
    /// Fixed novelty margin; overrides `draw_probability` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draw_margin: Option<f64>,
    /// Interest forgetting rate, in units of `tau^2` per hour.
    pub decay_rate: f64,
    /// Decision threshold on the engagement probability.
    pub threshold: f64,
    /// Mean interest level at which engagement is even odds.
    pub interest_threshold: f64,
    /// Multiplicative-weights learning rate of the ensemble.
    pub ink_learning_rate: f64,
}

impl Default for ClassifierParams {
    fn default() -> Self {
        ClassifierParams {
            init_mean: 0.0,
            init_variance: 0.5,
            // beta^2 = init_variance / 2
            beta: 0.5,
            tau: 0.0,
            draw_probability: 0.1,
            draw_margin: None,
            decay_rate: 0.0,
            threshold: 0.5,
            interest_threshold: 0.5,
            ink_learning_rate: 0.5,
        }
    }
}

fn check(ok: bool, name: &str, value: f64, rule: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::invalid_parameter(name, format!("{rule}, got {value}")))
    }
}

impl ClassifierParams {
    pub fn validate(&self) -> Result<()> {
        check(self.init_mean.is_finite(), "init_mean", self.init_mean, "must be finite")?;
        check(
            self.init_variance > 0.0 && self.init_variance.is_finite(),
            "init_variance",
            self.init_variance,
            "must be positive",
        )?;
        check(self.beta > 0.0 && self.beta.is_finite(), "beta", self.beta, "must be positive")?;
        check(self.tau >= 0.0 && self.tau.is_finite(), "tau", self.tau, "must be >= 0")?;
        check(
            self.draw_probability > 0.0 && self.draw_probability < 1.0,
            "draw_probability",
            self.draw_probability,
            "must lie in (0, 1)",
        )?;
        if let Some(m) = self.draw_margin {
            check(m >= 0.0 && !m.is_nan(), "draw_margin", m, "must be >= 0")?;
        }
        check(
            self.decay_rate >= 0.0 && self.decay_rate.is_finite(),
            "decay_rate",
            self.decay_rate,
            "must be >= 0",
        )?;
        check(
            (0.0..=1.0).contains(&self.threshold),
            "threshold",
            self.threshold,
            "must lie in [0, 1]",
        )?;
        check(
            self.interest_threshold.is_finite(),
            "interest_threshold",
            self.interest_threshold,
            "must be finite",
        )?;
        check(
            self.ink_learning_rate >= 0.0 && self.ink_learning_rate.is_finite(),
            "ink_learning_rate",
            self.ink_learning_rate,
            "must be >= 0",
        )?;
        Ok(())
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn from_json_value(value: serde_json::Value) -> Result<Self> {
        let params: ClassifierParams = serde_json::from_value(value)
            .map_err(|e| Error::invalid_parameter("params", e.to_string()))?;
        params.validated()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        Self::from_json_value(value)
    }

    /// Returns a copy with one field replaced by name.
    pub fn with(&self, name: &str, value: f64) -> Result<Self> {
        let mut overrides = BTreeMap::new();
        overrides.insert(name.to_string(), value);
        self.with_overrides(&overrides)
    }

    /// Returns a copy with the named fields replaced.
    pub fn with_overrides(&self, overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut value = serde_json::to_value(self)?;
        let obj = value.as_object_mut().expect("params serialize to an object");
        for (name, v) in overrides {
            let number = serde_json::Number::from_f64(*v)
                .ok_or_else(|| Error::invalid_parameter(name, format!("must be finite, got {v}")))?;
            obj.insert(name.clone(), serde_json::Value::Number(number));
        }
        Self::from_json_value(value)
    }

    /// Variance of one side's performance noise, summed over `members`.
    pub(crate) fn performance_variance(&self, members: usize) -> f64 {
        members as f64 * self.beta * self.beta
    }
}
