//! Protocol configuration layered as defaults, then a JSON file, then flags.

use std::fs;
use std::path::Path;

use prqs_core::estimators::CheckMode;
use prqs_core::simulate::ProtocolConfig;
use serde::Deserialize;

use crate::LabError;

/// A partial [`ProtocolConfig`]. The amplitude may be given either as
/// `alpha` or as the mean photon number `alpha2`, not both.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub alpha: Option<f64>,
    pub alpha2: Option<f64>,
    pub eta: Option<f64>,
    pub n_rounds: Option<u64>,
    pub phi_true: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub seed: Option<u64>,
    pub n_trials: Option<u64>,
    pub check_mode: Option<CheckMode>,
}

impl ConfigOverrides {
    pub fn from_json_file(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| LabError::Data {
            path: path.to_owned(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    }

    /// Applies every field that is set on top of `base`.
    pub fn apply(&self, base: &mut ProtocolConfig) -> Result<(), LabError> {
        match (self.alpha, self.alpha2) {
            (Some(_), Some(_)) => {
                return Err(LabError::Usage(
                    "give either alpha or alpha2, not both".into(),
                ))
            }
            (Some(a), None) => base.alpha = a,
            (None, Some(a2)) => {
                if !(a2 >= 0.0) {
                    return Err(LabError::Usage(format!(
                        "alpha2 must be non-negative, got {a2}"
                    )));
                }
                base.alpha = a2.sqrt();
            }
            (None, None) => {}
        }
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = self.$field {
                    base.$field = v;
                }
            )*};
        }
        take!(eta, n_rounds, phi_true, epsilon, delta, seed, n_trials, check_mode);
        Ok(())
    }
}

/// Defaults, overlaid with the optional config file, overlaid with flags.
pub fn resolve(file: Option<&Path>, flags: &ConfigOverrides) -> Result<ProtocolConfig, LabError> {
    let mut config = ProtocolConfig::default();
    if let Some(path) = file {
        ConfigOverrides::from_json_file(path)?.apply(&mut config)?;
    }
    // A flag naming the amplitude either way replaces the file's choice.
    if flags.alpha.is_some() || flags.alpha2.is_some() {
        config.alpha = f64::NAN;
    }
    flags.apply(&mut config)?;
    config.validate()?;
    Ok(config)
}
