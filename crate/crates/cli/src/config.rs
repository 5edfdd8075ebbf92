use std::path::{Path, PathBuf};

use quantevo_core::calibration::{ParamSpace, TpeConfig};
use quantevo_core::evolution::EvolutionConfig;
use quantevo_core::forecaster::ForecasterConfig;
use quantevo_core::impact::ImpactParams;
use quantevo_core::market_data::{
    load_csv, synthesize, BarSeries, ColumnSchema, SplitSpec, SynthSpec,
};
use quantevo_core::simulator::SimConfig;
use quantevo_core::strategy::default_param_space;
use quantevo_core::Genome;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

/// Prefix for environment overrides: `QEVO_SIM__HIT_RATIO=0.5` sets
/// `sim.hit_ratio`. Nested keys are joined with `__`.
pub const ENV_PREFIX: &str = "QEVO_";

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub splits: SplitsConfig,
    pub sim: SimConfig,
    pub impact: ImpactParams,
    pub forecaster: ForecasterConfig,
    /// Genome overrides applied on top of the baseline defaults.
    pub strategy: Genome,
    pub calibration: CalibrationConfig,
    pub evolution: EvolutionSection,
    pub features: FeaturesConfig,
    pub analysis: AnalysisConfig,
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// Minute-bar CSV; relative paths resolve against the config file.
    pub csv: Option<PathBuf>,
    pub columns: ColumnSchema,
    /// Used when no CSV is given, and by `synth-data`.
    pub synth: Option<SynthSpec>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitsConfig {
    /// Calendar windows; the default covers 2022–2025.
    pub dates: SplitSpec,
    /// `[train, validation]` day fractions. Overrides `dates` when set.
    pub fractions: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub tpe: TpeConfig,
    /// Search space; defaults to the baseline strategy bounds.
    pub space: Option<ParamSpace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalMutatorConfig {
    pub name: String,
    pub command: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionSection {
    #[serde(flatten)]
    pub engine: EvolutionConfig,
    /// Include the built-in parameter-perturbation mutator.
    pub perturb: bool,
    pub external_mutators: Vec<ExternalMutatorConfig>,
}

impl Default for EvolutionSection {
    fn default() -> Self {
        EvolutionSection {
            engine: EvolutionConfig::default(),
            perturb: true,
            external_mutators: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeaturesConfig {
    /// EMA windows of the candidate pool.
    pub windows: Vec<f64>,
    pub max_features: usize,
    pub corr_cap: f64,
    /// Forward-return horizon (minutes) the candidates are ranked against.
    pub horizon: usize,
}

impl Default for FeaturesConfig {
    fn default() -> Self {
        FeaturesConfig {
            windows: vec![
                1.0, 2.0, 3.0, 5.0, 8.0, 10.0, 15.0, 20.0, 30.0, 50.0, 100.0, 200.0,
            ],
            max_features: quantevo_core::forecaster::DEFAULT_MAX_FEATURES,
            corr_cap: quantevo_core::forecaster::DEFAULT_CORR_CAP,
            horizon: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NullModelConfig {
    /// Baseline validation PnL and Sharpe, and the window they cover.
    pub pnl0: f64,
    pub s0: f64,
    pub window_days: f64,
    /// Baseline PnL and length of the test window, if one is reported.
    pub test_pnl0: Option<f64>,
    pub test_days: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisConfig {
    pub null_model: Option<NullModelConfig>,
    pub top_k: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            null_model: None,
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
        }
    }
}

/// Parses an override value: JSON if it parses, otherwise a bare string.
fn parse_env_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

fn set_path(root: &mut Value, path: &[String], value: Value) -> Result<(), CliError> {
    let mut cur = root;
    for (i, key) in path.iter().enumerate() {
        let obj = match cur {
            Value::Object(map) => map,
            Value::Null => {
                *cur = Value::Object(Default::default());
                cur.as_object_mut().expect("just set")
            }
            _ => {
                return Err(CliError::Usage(format!(
                    "cannot override `{}`: parent is not a section",
                    path.join(".")
                )))
            }
        };
        if i + 1 == path.len() {
            obj.insert(key.clone(), value);
            return Ok(());
        }
        cur = obj.entry(key.clone()).or_insert(Value::Null);
    }
    Ok(())
}

/// Applies `QEVO_SECTION__KEY=value` pairs to a config document. Strategy
/// genome keys keep their upper-case spelling; everything else is lowered.
pub fn apply_env<I: IntoIterator<Item = (String, String)>>(
    doc: &mut Value,
    vars: I,
) -> Result<(), CliError> {
    let mut vars: Vec<_> = vars
        .into_iter()
        .filter(|(k, _)| k.starts_with(ENV_PREFIX))
        .collect();
    vars.sort();
    for (key, raw) in vars {
        let parts: Vec<String> = key[ENV_PREFIX.len()..]
            .split("__")
            .map(str::to_string)
            .collect();
        if parts.iter().any(String::is_empty) {
            return Err(CliError::Usage(format!(
                "malformed override variable {key}"
            )));
        }
        let path: Vec<String> = parts
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if i == 1 && parts[0].eq_ignore_ascii_case("strategy") {
                    p.clone()
                } else {
                    p.to_lowercase()
                }
            })
            .collect();
        log::debug!("override {} = {raw}", path.join("."));
        set_path(doc, &path, parse_env_value(&raw))?;
    }
    Ok(())
}

/// Reads a JSON or TOML (by extension) config, applies environment
/// overrides and fills defaults.
pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
    let (mut doc, base) = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", p.display())))?;
            let doc = if p.extension().is_some_and(|e| e == "toml") {
                let t: toml::Table = toml::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?;
                serde_json::to_value(t).map_err(|e| CliError::Usage(e.to_string()))?
            } else {
                serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", p.display())))?
            };
            (doc, p.parent().map(Path::to_path_buf).unwrap_or_default())
        }
        None => (Value::Object(Default::default()), PathBuf::from(".")),
    };
    apply_env(&mut doc, std::env::vars())?;
    let mut cfg: RunConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    if let Some(csv) = &cfg.data.csv {
        if csv.is_relative() {
            cfg.data.csv = Some(base.join(csv));
        }
    }
    Ok(cfg)
}

impl RunConfig {
    pub fn load_series(&self) -> Result<BarSeries, CliError> {
        match (&self.data.csv, &self.data.synth) {
            (Some(path), _) => {
                if !path.exists() {
                    return Err(CliError::Usage(format!(
                        "data file not found: {}",
                        path.display()
                    )));
                }
                load_csv(path, &self.data.columns)
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
            }
            (None, Some(spec)) => synthesize(spec).map_err(|e| CliError::Runtime(e.to_string())),
            (None, None) => Err(CliError::Usage(
                "no data source: set data.csv or data.synth".into(),
            )),
        }
    }

    pub fn split_spec(&self, series: &BarSeries) -> Result<SplitSpec, CliError> {
        match self.splits.fractions {
            Some([train, val]) => SplitSpec::by_fractions(series, train, val)
                .map_err(|e| CliError::Usage(e.to_string())),
            None => Ok(self.splits.dates),
        }
    }

    pub fn param_space(&self) -> ParamSpace {
        self.calibration
            .space
            .clone()
            .unwrap_or_else(default_param_space)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn vars(pairs: &[(&str, &str)]) -> Vec<(String, String)> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect()
    }

    #[test]
    fn env_overrides_nest_and_parse() {
        let mut doc = json!({"sim": {"fee_rate": 0.1}});
        apply_env(
            &mut doc,
            vars(&[
                ("QEVO_SIM__HIT_RATIO", "0.5"),
                ("QEVO_STRATEGY__SIZING_FACTOR", "3000"),
                ("QEVO_OUTPUT__DIR", "runs/a"),
                ("QEVO_EVOLUTION__GRID__BINS", "[4,4,4]"),
                ("HOME", "/root"),
            ]),
        )
        .unwrap();
        assert_eq!(doc["sim"]["hit_ratio"], 0.5);
        assert_eq!(doc["sim"]["fee_rate"], 0.1);
        assert_eq!(doc["strategy"]["SIZING_FACTOR"], 3000);
        assert_eq!(doc["output"]["dir"], "runs/a");
        assert_eq!(doc["evolution"]["grid"]["bins"], json!([4, 4, 4]));
        let cfg: RunConfig = serde_json::from_value(doc).unwrap();
        assert_eq!(cfg.sim.hit_ratio, 0.5);
        assert_eq!(cfg.evolution.engine.grid.bins, [4, 4, 4]);
    }

    #[test]
    fn malformed_override_is_usage_error() {
        let mut doc = json!({});
        assert!(matches!(
            apply_env(&mut doc, vars(&[("QEVO_SIM____X", "1")])),
            Err(CliError::Usage(_))
        ));
        let mut doc = json!({"sim": 3});
        assert!(matches!(
            apply_env(&mut doc, vars(&[("QEVO_SIM__X", "1")])),
            Err(CliError::Usage(_))
        ));
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        let back: RunConfig = serde_json::from_value(serde_json::to_value(&cfg).unwrap()).unwrap();
        assert_eq!(
            serde_json::to_value(back).unwrap(),
            serde_json::to_value(cfg).unwrap()
        );
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_value::<RunConfig>(json!({"simm": {}})).is_err());
    }
}
