//! Experiment configuration files.
//!
//! A config is a JSON object. Every field is optional and falls back to the
//! experiment's default; unknown fields are rejected. Errors carry the path
//! of the offending field, e.g. `lmm.vol_scale`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capacity::{AccumulationRule, StepSurvivalFunction};
use crate::diversify::{DiversificationSpec, QuantileRule};
use crate::error::{Error, Result};
use crate::stochastic::{GbmSpec, LmmSpec};
use crate::valuation::{Bracket, CompensationMode, Kernel};

/// Decay rates accept a number or the string `"inf"`.
mod decay {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Number(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(value: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *value == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*value)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Number(x) if x >= 0.0 => Ok(x),
            Repr::Text(t) if matches!(t.as_str(), "inf" | "infinity") => Ok(f64::INFINITY),
            _ => Err(serde::de::Error::custom("expected a non-negative number or \"inf\"")),
        }
    }
}

/// Shape of the marginal survival kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelConfig {
    /// Explicit `[breakpoint, value]` pairs.
    Steps { steps: StepSurvivalFunction },
    /// Default-free below `threshold`, `beyond` above.
    Threshold { threshold: f64, beyond: f64 },
    /// Default-free below `threshold`, then a stepped linear decline.
    Ramp {
        threshold: f64,
        scale: f64,
        width: f64,
        steps: usize,
        floor: f64,
    },
}

impl KernelConfig {
    pub fn build(&self) -> Result<StepSurvivalFunction> {
        let kernel = match self {
            KernelConfig::Steps { steps } => Ok(steps.clone()),
            KernelConfig::Threshold { threshold, beyond } => StepSurvivalFunction::threshold(*threshold, *beyond),
            KernelConfig::Ramp {
                threshold,
                scale,
                width,
                steps,
                floor,
            } => StepSurvivalFunction::threshold_ramp(*threshold, *scale, *width, *steps, *floor),
        };
        kernel.map_err(|e| Error::config("kernel", e.to_string()))
    }
}

fn check(path: &str, ok: bool, message: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::config(path, message))
    }
}

fn check_sweep(path: &str, values: &[f64]) -> Result<()> {
    check(path, !values.is_empty(), "sweep must not be empty")?;
    check(path, values.iter().all(|v| v.is_finite()), "sweep values must be finite")
}

fn check_increasing(path: &str, values: &[f64]) -> Result<()> {
    check_sweep(path, values)?;
    check(
        path,
        values[0] > 0.0 && values.windows(2).all(|w| w[1] > w[0]),
        "values must be positive and strictly increasing",
    )
}

fn nested<T>(path: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(path, other.to_string()),
    })
}

fn state_mode(kernel: &KernelConfig, decay: f64, rule: AccumulationRule, asymmetric: bool) -> Result<CompensationMode> {
    Ok(CompensationMode::new(
        Kernel::StateDependent {
            kernel: kernel.build()?,
            decay,
            rule,
        },
        asymmetric,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntensityAnalogyConfig {
    pub mu: f64,
    pub beta: f64,
    pub horizon: f64,
    pub steps_per_year: usize,
    pub paths: usize,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for IntensityAnalogyConfig {
    fn default() -> Self {
        Self {
            mu: 0.1,
            beta: 0.2,
            horizon: 10.0,
            steps_per_year: 52,
            paths: 100_000,
            seed: 1,
            output: None,
        }
    }
}

impl IntensityAnalogyConfig {
    pub fn validate(&self) -> Result<()> {
        check("mu", self.mu.is_finite(), "must be finite")?;
        check("beta", self.beta.is_finite(), "must be finite")?;
        check("horizon", self.horizon > 0.0 && self.horizon.is_finite(), "must be positive")?;
        check("steps_per_year", self.steps_per_year > 0, "must be positive")?;
        check("paths", self.paths > 0, "must be positive")
    }

    pub fn grid(&self) -> Vec<f64> {
        let n = (self.horizon * self.steps_per_year as f64).round() as usize;
        (0..=n).map(|k| k as f64 / self.steps_per_year as f64).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardCompensationConfig {
    pub x0: f64,
    pub r: f64,
    pub maturity: f64,
    pub sigmas: Vec<f64>,
    pub kernel: KernelConfig,
    /// Intensity of the constant-intensity benchmark.
    pub lambda_objective: f64,
    pub paths: usize,
    pub seed: u64,
    pub output: Option<String>,
}

/// `-ln(0.75) / 5`: the constant intensity whose compensation factor over
/// five years equals the threshold kernel's deep factor `1/0.75`.
const BENCHMARK_INTENSITY: f64 = 0.057_536_414_490_356_18;

fn sigma_sweep() -> Vec<f64> {
    (0..=10).map(|k| f64::from(k) / 20.0).collect()
}

impl Default for ForwardCompensationConfig {
    fn default() -> Self {
        Self {
            x0: 1.0,
            r: 0.02,
            maturity: 5.0,
            sigmas: sigma_sweep(),
            kernel: KernelConfig::Threshold {
                threshold: 1.5,
                beyond: 0.75,
            },
            lambda_objective: BENCHMARK_INTENSITY,
            paths: 100_000,
            seed: 2,
            output: None,
        }
    }
}

impl ForwardCompensationConfig {
    pub fn gbm(&self, sigma: f64) -> GbmSpec {
        GbmSpec {
            x0: self.x0,
            r: self.r,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("maturity", self.maturity > 0.0 && self.maturity.is_finite(), "must be positive")?;
        check_sweep("sigmas", &self.sigmas)?;
        for (i, &s) in self.sigmas.iter().enumerate() {
            nested(&format!("sigmas[{i}]"), self.gbm(s).validate())?;
        }
        check("lambda_objective", self.lambda_objective.is_finite(), "must be finite")?;
        self.kernel.build()?;
        check("paths", self.paths > 0, "must be positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForwardAsymmetryConfig {
    pub x0: f64,
    pub r: f64,
    pub maturity: f64,
    pub strike: f64,
    pub sigmas: Vec<f64>,
    pub kernel: KernelConfig,
    /// Compensate positive requirements only.
    pub asymmetric: bool,
    pub lambda_objective: f64,
    pub paths: usize,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for ForwardAsymmetryConfig {
    fn default() -> Self {
        Self {
            x0: 1.0,
            r: 0.02,
            maturity: 5.0,
            strike: 1.0,
            sigmas: sigma_sweep(),
            kernel: KernelConfig::Threshold {
                threshold: 0.5,
                beyond: 0.75,
            },
            asymmetric: true,
            lambda_objective: BENCHMARK_INTENSITY,
            paths: 100_000,
            seed: 3,
            output: None,
        }
    }
}

impl ForwardAsymmetryConfig {
    pub fn gbm(&self, sigma: f64) -> GbmSpec {
        GbmSpec {
            x0: self.x0,
            r: self.r,
            sigma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check("maturity", self.maturity > 0.0 && self.maturity.is_finite(), "must be positive")?;
        check("strike", self.strike.is_finite(), "must be finite")?;
        check_sweep("sigmas", &self.sigmas)?;
        for (i, &s) in self.sigmas.iter().enumerate() {
            nested(&format!("sigmas[{i}]"), self.gbm(s).validate())?;
        }
        check("lambda_objective", self.lambda_objective.is_finite(), "must be finite")?;
        self.kernel.build()?;
        check("paths", self.paths > 0, "must be positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StreamTemporalConfig {
    pub gbm: GbmSpec,
    pub maturities: Vec<f64>,
    pub strikes: Vec<f64>,
    pub kernel: KernelConfig,
    #[serde(with = "decay")]
    pub decay: f64,
    pub rule: AccumulationRule,
    pub asymmetric: bool,
    pub lambda_objective: f64,
    pub paths: usize,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for StreamTemporalConfig {
    fn default() -> Self {
        Self {
            gbm: GbmSpec {
                x0: 1.0,
                r: 0.02,
                sigma: 0.3,
            },
            maturities: (1..=10).map(f64::from).collect(),
            strikes: vec![0.0, 1.3],
            kernel: KernelConfig::Threshold {
                threshold: 1.5,
                beyond: 0.75,
            },
            decay: 0.1,
            rule: AccumulationRule::Requested,
            asymmetric: true,
            lambda_objective: BENCHMARK_INTENSITY,
            paths: 100_000,
            seed: 4,
            output: None,
        }
    }
}

impl StreamTemporalConfig {
    pub fn mode(&self) -> Result<CompensationMode> {
        state_mode(&self.kernel, self.decay, self.rule, self.asymmetric)
    }

    pub fn validate(&self) -> Result<()> {
        nested("gbm", self.gbm.validate())?;
        check_increasing("maturities", &self.maturities)?;
        check_sweep("strikes", &self.strikes)?;
        check("lambda_objective", self.lambda_objective.is_finite(), "must be finite")?;
        self.mode()?;
        check("paths", self.paths > 0, "must be positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParRateConfig {
    pub lmm: LmmSpec,
    pub kernel: KernelConfig,
    /// Decay of the consumption level across swap periods; `"inf"` resets
    /// it every period.
    #[serde(with = "decay")]
    pub decay: f64,
    pub rule: AccumulationRule,
    pub asymmetric: bool,
    pub notionals: Vec<f64>,
    pub bracket: Bracket,
    pub exhausted_limit: f64,
    pub paths: usize,
    pub seed: u64,
    pub output: Option<String>,
}

impl Default for ParRateConfig {
    fn default() -> Self {
        Self {
            lmm: LmmSpec {
                tenor: 0.5,
                horizon: 20.0,
                initial_rate: 0.05,
                vol_scale: 0.5,
                vol_decay: 0.25,
            },
            kernel: KernelConfig::Ramp {
                threshold: 0.7,
                scale: 4.0,
                width: 0.1,
                steps: 60,
                floor: 0.05,
            },
            decay: 1.0,
            rule: AccumulationRule::Requested,
            asymmetric: false,
            notionals: vec![1.0, 5.0, 10.0, 25.0, 50.0, 100.0, 200.0],
            bracket: Bracket::default(),
            exhausted_limit: 0.0,
            paths: 10_000,
            seed: 5,
            output: None,
        }
    }
}

impl ParRateConfig {
    fn forward_curve_default() -> Self {
        Self {
            notionals: vec![10.0, 25.0, 50.0, 100.0],
            seed: 6,
            ..Self::default()
        }
    }

    pub fn mode(&self) -> Result<CompensationMode> {
        let mut mode = state_mode(&self.kernel, self.decay, self.rule, self.asymmetric)?;
        mode.exhausted_limit = self.exhausted_limit;
        Ok(mode)
    }

    pub fn validate(&self) -> Result<()> {
        nested("lmm", self.lmm.validate())?;
        check_increasing("notionals", &self.notionals)?;
        check(
            "bracket",
            self.bracket.lower < self.bracket.upper && self.bracket.tolerance > 0.0,
            "needs lower < upper and a positive tolerance",
        )?;
        check(
            "exhausted_limit",
            (0.0..=1.0).contains(&self.exhausted_limit),
            "must lie in [0, 1]",
        )?;
        self.mode()?;
        check("paths", self.paths > 0, "must be positive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IamRateConfig {
    pub r: f64,
    pub lambda: f64,
    /// Objective intensity for the exact adjusted rate.
    pub lambda_objective: f64,
    pub maturity: f64,
    pub diversification: DiversificationSpec,
    pub output: Option<String>,
}

impl Default for IamRateConfig {
    fn default() -> Self {
        Self {
            r: 0.01,
            lambda: 0.01,
            lambda_objective: 0.01,
            maturity: 25.0,
            diversification: DiversificationSpec {
                n: 10,
                epsilon: 0.01,
                rule: QuantileRule::Normal,
            },
            output: None,
        }
    }
}

impl IamRateConfig {
    pub fn validate(&self) -> Result<()> {
        check("r", self.r.is_finite(), "must be finite")?;
        check("lambda", self.lambda >= 0.0 && self.lambda.is_finite(), "must be non-negative")?;
        check("lambda_objective", self.lambda_objective.is_finite(), "must be finite")?;
        check("maturity", self.maturity > 0.0 && self.maturity.is_finite(), "must be positive")?;
        nested("diversification", self.diversification.validate())
    }
}

/// Names of the runnable experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    IntensityAnalogy,
    ForwardCompensation,
    ForwardAsymmetry,
    StreamTemporal,
    ParSwapNotional,
    ForwardCurveNotional,
    IamRate,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 7] = [
        ExperimentName::IntensityAnalogy,
        ExperimentName::ForwardCompensation,
        ExperimentName::ForwardAsymmetry,
        ExperimentName::StreamTemporal,
        ExperimentName::ParSwapNotional,
        ExperimentName::ForwardCurveNotional,
        ExperimentName::IamRate,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ExperimentName::IntensityAnalogy => "intensity-analogy",
            ExperimentName::ForwardCompensation => "forward-compensation",
            ExperimentName::ForwardAsymmetry => "forward-asymmetry",
            ExperimentName::StreamTemporal => "stream-temporal",
            ExperimentName::ParSwapNotional => "par-swap-notional",
            ExperimentName::ForwardCurveNotional => "forward-curve-notional",
            ExperimentName::IamRate => "iam-rate",
        }
    }
}

impl std::fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown experiment `{s}`")))
    }
}

/// A validated configuration for one experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentConfig {
    IntensityAnalogy(IntensityAnalogyConfig),
    ForwardCompensation(ForwardCompensationConfig),
    ForwardAsymmetry(ForwardAsymmetryConfig),
    StreamTemporal(StreamTemporalConfig),
    ParSwapNotional(ParRateConfig),
    ForwardCurveNotional(ParRateConfig),
    IamRate(IamRateConfig),
}

fn parse<T: DeserializeOwned>(value: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        Error::config(if path == "." { String::new() } else { path }, e.into_inner().to_string())
    })
}

fn overlay(base: &mut serde_json::Value, fields: serde_json::Value) {
    match (base, fields) {
        // tagged objects (kernels) are replaced whole
        (serde_json::Value::Object(base), serde_json::Value::Object(fields)) if !fields.contains_key("shape") => {
            for (k, v) in fields {
                match base.get_mut(&k) {
                    Some(slot) => overlay(slot, v),
                    None => {
                        base.insert(k, v);
                    }
                }
            }
        }
        (slot, value) => *slot = value,
    }
}

/// Overlays the given fields on the experiment's defaults.
fn parse_or<T: DeserializeOwned + Serialize>(value: serde_json::Value, default: T) -> Result<T> {
    let mut merged = serde_json::to_value(default).expect("defaults serialize");
    overlay(&mut merged, value);
    parse(merged)
}

impl ExperimentConfig {
    /// Defaults for `name`.
    pub fn defaults(name: ExperimentName) -> Self {
        match name {
            ExperimentName::IntensityAnalogy => Self::IntensityAnalogy(Default::default()),
            ExperimentName::ForwardCompensation => Self::ForwardCompensation(Default::default()),
            ExperimentName::ForwardAsymmetry => Self::ForwardAsymmetry(Default::default()),
            ExperimentName::StreamTemporal => Self::StreamTemporal(Default::default()),
            ExperimentName::ParSwapNotional => Self::ParSwapNotional(Default::default()),
            ExperimentName::ForwardCurveNotional => Self::ForwardCurveNotional(ParRateConfig::forward_curve_default()),
            ExperimentName::IamRate => Self::IamRate(Default::default()),
        }
    }

    /// Parses a JSON config for `name`. An `experiment` field, if present,
    /// must name the same experiment.
    pub fn from_json(name: ExperimentName, text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::config("", e.to_string()))?;
        let Some(fields) = value.as_object_mut() else {
            return Err(Error::config("", "config must be a JSON object"));
        };
        if let Some(declared) = fields.remove("experiment") {
            if declared.as_str() != Some(name.as_str()) {
                return Err(Error::config("experiment", format!("config is for {declared}, not `{name}`")));
            }
        }
        let config = match name {
            ExperimentName::IntensityAnalogy => Self::IntensityAnalogy(parse_or(value, Default::default())?),
            ExperimentName::ForwardCompensation => Self::ForwardCompensation(parse_or(value, Default::default())?),
            ExperimentName::ForwardAsymmetry => Self::ForwardAsymmetry(parse_or(value, Default::default())?),
            ExperimentName::StreamTemporal => Self::StreamTemporal(parse_or(value, Default::default())?),
            ExperimentName::ParSwapNotional => Self::ParSwapNotional(parse_or(value, Default::default())?),
            ExperimentName::ForwardCurveNotional => {
                Self::ForwardCurveNotional(parse_or(value, ParRateConfig::forward_curve_default())?)
            }
            ExperimentName::IamRate => Self::IamRate(parse_or(value, Default::default())?),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn name(&self) -> ExperimentName {
        match self {
            Self::IntensityAnalogy(_) => ExperimentName::IntensityAnalogy,
            Self::ForwardCompensation(_) => ExperimentName::ForwardCompensation,
            Self::ForwardAsymmetry(_) => ExperimentName::ForwardAsymmetry,
            Self::StreamTemporal(_) => ExperimentName::StreamTemporal,
            Self::ParSwapNotional(_) => ExperimentName::ParSwapNotional,
            Self::ForwardCurveNotional(_) => ExperimentName::ForwardCurveNotional,
            Self::IamRate(_) => ExperimentName::IamRate,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::IntensityAnalogy(c) => c.validate(),
            Self::ForwardCompensation(c) => c.validate(),
            Self::ForwardAsymmetry(c) => c.validate(),
            Self::StreamTemporal(c) => c.validate(),
            Self::ParSwapNotional(c) | Self::ForwardCurveNotional(c) => c.validate(),
            Self::IamRate(c) => c.validate(),
        }
    }

    fn run_settings(&mut self) -> (Option<&mut usize>, Option<&mut u64>, &mut Option<String>) {
        match self {
            Self::IntensityAnalogy(c) => (Some(&mut c.paths), Some(&mut c.seed), &mut c.output),
            Self::ForwardCompensation(c) => (Some(&mut c.paths), Some(&mut c.seed), &mut c.output),
            Self::ForwardAsymmetry(c) => (Some(&mut c.paths), Some(&mut c.seed), &mut c.output),
            Self::StreamTemporal(c) => (Some(&mut c.paths), Some(&mut c.seed), &mut c.output),
            Self::ParSwapNotional(c) | Self::ForwardCurveNotional(c) => {
                (Some(&mut c.paths), Some(&mut c.seed), &mut c.output)
            }
            Self::IamRate(c) => (None, None, &mut c.output),
        }
    }

    /// Applies command-line overrides. Path and seed overrides are ignored
    /// by deterministic experiments.
    pub fn set_overrides(&mut self, paths: Option<usize>, seed: Option<u64>, output: Option<String>) -> Result<()> {
        let (p, s, o) = self.run_settings();
        if let (Some(slot), Some(v)) = (p, paths) {
            *slot = v;
        }
        if let (Some(slot), Some(v)) = (s, seed) {
            *slot = v;
        }
        if output.is_some() {
            *o = output;
        }
        self.validate()
    }

    pub fn paths(&self) -> Option<usize> {
        self.clone().run_settings().0.map(|p| *p)
    }

    pub fn seed(&self) -> Option<u64> {
        self.clone().run_settings().1.map(|s| *s)
    }

    pub fn output(&self) -> Option<String> {
        self.clone().run_settings().2.clone()
    }

    /// Effective configuration as canonical JSON (output path excluded).
    pub fn to_json(&self) -> String {
        let mut clean = self.clone();
        *clean.run_settings().2 = None;
        let value = match &clean {
            Self::IntensityAnalogy(c) => serde_json::to_value(c),
            Self::ForwardCompensation(c) => serde_json::to_value(c),
            Self::ForwardAsymmetry(c) => serde_json::to_value(c),
            Self::StreamTemporal(c) => serde_json::to_value(c),
            Self::ParSwapNotional(c) | Self::ForwardCurveNotional(c) => serde_json::to_value(c),
            Self::IamRate(c) => serde_json::to_value(c),
        }
        .expect("config serializes");
        let mut object = serde_json::Map::new();
        object.insert("experiment".into(), self.name().as_str().into());
        if let serde_json::Value::Object(fields) = value {
            object.extend(fields.into_iter().filter(|(k, _)| k != "output"));
        }
        serde_json::Value::Object(object).to_string()
    }

    /// SHA-256 of [`Self::to_json`].
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_json().as_bytes()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for name in ExperimentName::ALL {
            assert_eq!(name.as_str().parse::<ExperimentName>().unwrap(), name);
        }
        assert!("no-such-experiment".parse::<ExperimentName>().is_err());
    }

    #[test]
    fn empty_config_gives_defaults() {
        for name in ExperimentName::ALL {
            let parsed = ExperimentConfig::from_json(name, "{}").unwrap();
            assert_eq!(parsed, ExperimentConfig::defaults(name));
        }
    }

    #[test]
    fn fields_overlay_defaults() {
        let c = ExperimentConfig::from_json(
            ExperimentName::ParSwapNotional,
            r#"{"experiment": "par-swap-notional", "decay": "inf", "notionals": [1, 2]}"#,
        )
        .unwrap();
        let ExperimentConfig::ParSwapNotional(p) = &c else { panic!() };
        assert_eq!(p.decay, f64::INFINITY);
        assert_eq!(p.notionals, vec![1.0, 2.0]);
        assert_eq!(p.paths, 10_000);
        let vol = ExperimentConfig::from_json(ExperimentName::ForwardCurveNotional, r#"{"lmm": {"vol_scale": 1.0}}"#).unwrap();
        let ExperimentConfig::ForwardCurveNotional(v) = &vol else { panic!() };
        assert_eq!(v.lmm.vol_scale, 1.0);
        assert_eq!(v.lmm.horizon, 20.0);
        assert!(c.to_json().contains("\"decay\":\"inf\""));
        let again = ExperimentConfig::from_json(ExperimentName::ParSwapNotional, &c.to_json()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn errors_name_the_field() {
        let err = |name, text| match ExperimentConfig::from_json(name, text).unwrap_err() {
            Error::Config { path, .. } => path,
            other => panic!("{other:?}"),
        };
        assert_eq!(err(ExperimentName::IntensityAnalogy, r#"{"mu": "x"}"#), "mu");
        assert_eq!(err(ExperimentName::IntensityAnalogy, r#"{"paths": 0}"#), "paths");
        assert_eq!(err(ExperimentName::IntensityAnalogy, r#"{"colour": 1}"#), "colour");
        assert_eq!(
            err(
                ExperimentName::ForwardCompensation,
                r#"{"kernel": {"shape": "steps", "steps": [[0, 1], [1, 1.2]]}}"#
            ),
            "kernel"
        );
        assert_eq!(err(ExperimentName::ForwardAsymmetry, r#"{"sigmas": []}"#), "sigmas");
        assert_eq!(err(ExperimentName::StreamTemporal, r#"{"gbm": {"x0": -1, "r": 0, "sigma": 0.1}}"#), "gbm");
        assert_eq!(err(ExperimentName::StreamTemporal, r#"{"decay": -1}"#), "decay");
        assert_eq!(
            err(ExperimentName::ParSwapNotional, r#"{"lmm": {"tenor": 0.5, "horizon": 20.2, "initial_rate": 0.05, "vol_scale": 0.5, "vol_decay": 0.25}}"#),
            "lmm"
        );
        assert_eq!(err(ExperimentName::IamRate, r#"{"experiment": "iam"}"#), "experiment");
        assert_eq!(
            err(ExperimentName::IamRate, r#"{"diversification": {"n": 10, "epsilon": 1.5, "rule": "normal"}}"#),
            "diversification"
        );
        assert_eq!(err(ExperimentName::IamRate, "[1]"), "");
    }

    #[test]
    fn overrides_and_hash() {
        let mut c = ExperimentConfig::defaults(ExperimentName::IntensityAnalogy);
        let before = c.hash();
        c.set_overrides(Some(1_000), Some(9), Some("out.csv".into())).unwrap();
        assert_eq!(c.paths(), Some(1_000));
        assert_eq!(c.seed(), Some(9));
        assert_eq!(c.output().as_deref(), Some("out.csv"));
        assert_ne!(c.hash(), before);
        assert_eq!(c.hash(), c.clone().hash());
        assert!(c.set_overrides(Some(0), None, None).is_err());

        let mut iam = ExperimentConfig::defaults(ExperimentName::IamRate);
        iam.set_overrides(Some(10), Some(1), None).unwrap();
        assert_eq!(iam, ExperimentConfig::defaults(ExperimentName::IamRate));
    }
}
