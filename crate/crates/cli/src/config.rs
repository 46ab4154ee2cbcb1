//! Experiment configuration files and the built-in presets.

use std::path::{Path, PathBuf};

use cfbmc::{OffsetSpec, PacketConfig, WindowKind};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Spectrum,
    Leakage,
    Validate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumParams {
    pub subcarrier: usize,
    /// 1-based real-symbol slots to export.
    pub symbols: Vec<usize>,
    pub grid_size: usize,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self { subcarrier: 0, symbols: Vec::new(), grid_size: cfbmc::spectrum::DEFAULT_GRID }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseReference {
    /// Frequency-offset phase referenced to the middle of the packet body.
    #[default]
    PacketCenter,
    /// Referenced to sample zero of the global time axis.
    Origin,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OffsetPair {
    pub delta_n: i64,
    /// Cycles per sample.
    pub delta_f: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeakageParams {
    /// `(k, l)` pairs, `l` 1-based.
    pub sources: Vec<(usize, usize)>,
    pub offsets: Vec<OffsetPair>,
    #[serde(default)]
    pub phase_reference: PhaseReference,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValidateParams {
    pub trials: usize,
    pub seed: u64,
    /// Added to `c_{±1}` before validation. Zero leaves the design intact.
    #[serde(default)]
    pub inject_coefficient_error: f64,
}

impl Default for ValidateParams {
    fn default() -> Self {
        Self { trials: 200, seed: 1, inject_coefficient_error: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub packet: PacketConfig,
    pub tx_window: WindowKind,
    pub rx_window: WindowKind,
    pub experiment: ExperimentKind,
    #[serde(default)]
    pub spectrum: SpectrumParams,
    #[serde(default)]
    pub leakage: LeakageParams,
    #[serde(default)]
    pub validate: ValidateParams,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    /// Validation run on the 16-subcarrier, 8-overlap asynchronous setup.
    fn default() -> Self {
        Self {
            packet: async_packet(),
            tx_window: WindowKind::RaisedCosine,
            rx_window: WindowKind::RaisedCosine,
            experiment: ExperimentKind::Validate,
            spectrum: SpectrumParams::default(),
            leakage: LeakageParams::default(),
            validate: ValidateParams::default(),
            output_dir: PathBuf::from("out/validate"),
        }
    }
}

fn async_packet() -> PacketConfig {
    PacketConfig { num_subcarriers: 16, num_complex_slots: 8, cp_len: 8, cs_len: 0, tx_rolloff: 8, rx_rolloff: 8 }
}

pub const PRESET_NAMES: [&str; 4] = ["fig2", "fig3", "fig5", "fig6"];

pub fn preset_source(name: &str) -> Option<&'static str> {
    match name {
        "fig2" => Some(include_str!("../presets/fig2.json")),
        "fig3" => Some(include_str!("../presets/fig3.json")),
        "fig5" => Some(include_str!("../presets/fig5.json")),
        "fig6" => Some(include_str!("../presets/fig6.json")),
        _ => None,
    }
}

impl ExperimentConfig {
    /// Parses without checking ranges, so overrides can be applied first.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg = Self::parse(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads and parses a config file; see [`Self::parse`].
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn preset(name: &str) -> Result<Self, CliError> {
        let text = preset_source(name).ok_or_else(|| {
            CliError::Config(format!("unknown preset {name:?} (available: {})", PRESET_NAMES.join(", ")))
        })?;
        Self::from_json(text)
    }

    /// Pretty-printed JSON in declaration order. Parsing it back yields an
    /// equal config, and printing that again yields the same text.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn offset_spec(&self, pair: &OffsetPair) -> OffsetSpec {
        let phase_ref = match self.leakage.phase_reference {
            PhaseReference::PacketCenter => self.packet.body_len() as i64 / 2,
            PhaseReference::Origin => 0,
        };
        OffsetSpec { delta_n: pair.delta_n, delta_f: pair.delta_f, phase_ref }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        self.packet.validate()?;
        if self.rx_window == WindowKind::RaisedCosine && self.packet.rx_rolloff > self.packet.body_len() / 2 {
            return bad(format!(
                "rx roll-off {} exceeds half the packet body ({})",
                self.packet.rx_rolloff,
                self.packet.body_len() / 2
            ));
        }
        let n = self.packet.n();
        let slots = self.packet.num_slots();
        match self.experiment {
            ExperimentKind::Spectrum => {
                let sp = &self.spectrum;
                if sp.subcarrier >= n {
                    return bad(format!("spectrum subcarrier {} out of range 0..{n}", sp.subcarrier));
                }
                if let Some(l) = sp.symbols.iter().find(|&&l| l == 0 || l > slots) {
                    return bad(format!("spectrum symbol slot {l} out of range 1..={slots}"));
                }
                if sp.grid_size < 2 {
                    return bad(format!("grid size must be at least 2, got {}", sp.grid_size));
                }
            }
            ExperimentKind::Leakage => {
                let lk = &self.leakage;
                if let Some((k, l)) = lk.sources.iter().find(|&&(k, l)| k >= n || l == 0 || l > slots) {
                    return bad(format!("leakage source ({k}, {l}) outside the {n}x{slots} grid"));
                }
                for pair in &lk.offsets {
                    self.offset_spec(pair).validate()?;
                }
            }
            ExperimentKind::Validate => {
                if !self.validate.inject_coefficient_error.is_finite() {
                    return bad("injected coefficient error must be finite".into());
                }
            }
        }
        Ok(())
    }
}
