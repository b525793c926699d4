//! Training configuration, read from a flat TOML file.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! seed = 7
//! epochs = 40
//! head_variant = "AOA_CLS"
//! aspect_mode = "phrase"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::absa::{AspectMode, HeadVariant};
use crate::encoder::MiniEncoderConfig;
use crate::error::{Error, Result};
use crate::linking::{Distance, LinkVariant};

/// Which parameters the ℓ² penalty covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum L2Scope {
    Head,
    All,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub seed: u64,
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Share of the training set held out to pick the best epoch. With no
    /// held-out examples the training objective is monitored instead.
    pub validation_fraction: f64,
    pub l2_weight: f64,
    pub l2_scope: L2Scope,
    /// Weight each example's loss by `N / (K · count(class))`.
    pub class_weighted: bool,
    /// Keep the encoder fixed and train the head only.
    pub freeze_encoder: bool,

    /// Encoder backend id; only `"mini"` is built in.
    pub backend: String,
    pub d_model: usize,
    pub n_heads: usize,
    pub n_layers: usize,
    pub d_ff: usize,
    pub max_len: usize,
    pub vocab_min_count: usize,
    pub vocab_max_size: usize,

    pub head_variant: HeadVariant,
    pub aspect_mode: AspectMode,

    pub link_variant: LinkVariant,
    /// Jaro-Winkler match threshold for the overlap baseline, decision
    /// threshold otherwise. Defaults to 0.9 and 0.5 respectively.
    pub threshold: Option<f64>,
    pub distance: Distance,
    pub lstm_hidden: usize,
    pub siamese_embedding: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let enc = MiniEncoderConfig::default();
        TrainConfig {
            seed: 13,
            epochs: 30,
            lr: 2e-3,
            batch_size: 8,
            validation_fraction: 0.1,
            l2_weight: 1e-4,
            l2_scope: L2Scope::Head,
            class_weighted: false,
            freeze_encoder: false,
            backend: "mini".into(),
            d_model: enc.d_model,
            n_heads: enc.n_heads,
            n_layers: enc.n_layers,
            d_ff: enc.d_ff,
            max_len: enc.max_len,
            vocab_min_count: 1,
            vocab_max_size: 30_000,
            head_variant: HeadVariant::AoaCls,
            aspect_mode: AspectMode::Phrase,
            link_variant: LinkVariant::PairSpc,
            threshold: None,
            distance: Distance::Manhattan,
            lstm_hidden: 32,
            siamese_embedding: 32,
        }
    }
}

impl TrainConfig {
    pub fn from_toml(raw: &str) -> Result<Self> {
        let cfg: TrainConfig = toml::from_str(raw).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn encoder_config(&self) -> MiniEncoderConfig {
        MiniEncoderConfig {
            d_model: self.d_model,
            n_heads: self.n_heads,
            n_layers: self.n_layers,
            d_ff: self.d_ff,
            max_len: self.max_len,
        }
    }

    /// The threshold for `link_variant`, falling back to its default.
    pub fn link_threshold(&self) -> f64 {
        self.threshold.unwrap_or(match self.link_variant {
            LinkVariant::Overlap => 0.9,
            _ => 0.5,
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.backend != "mini" {
            return bad(format!("unknown encoder backend {:?}", self.backend));
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return bad("epochs and batch_size must be positive".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if !(self.l2_weight >= 0.0 && self.l2_weight.is_finite()) {
            return bad(format!("l2_weight must be nonnegative, got {}", self.l2_weight));
        }
        if !(0.0..1.0).contains(&self.validation_fraction) {
            return bad("validation_fraction must be in [0, 1)".into());
        }
        if let Some(t) = self.threshold {
            if !(0.0..=1.0).contains(&t) {
                return bad(format!("threshold must be in [0, 1], got {t}"));
            }
        }
        if self.lstm_hidden == 0 || self.siamese_embedding == 0 {
            return bad("lstm_hidden and siamese_embedding must be positive".into());
        }
        self.encoder_config().validate()
    }
}
