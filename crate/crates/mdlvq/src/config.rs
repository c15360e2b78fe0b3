//! Experiment configuration: one JSON document per run, validated against
//! the library preconditions before any compute.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use mdlvq_core::lattice::{LatticeName, LatticeSpec};
use mdlvq_core::nested::{NestedSystem, ProductRule, SimilarityKind};
use mdlvq_core::sim::SourceSpec;
use mdlvq_core::weights::{mask_from_indices, Mask, WeightProfile};

use crate::CliError;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub system: SystemConfig,
    /// Distortion weights per erasure pattern, keyed by sorted description
    /// digits, e.g. "0", "02".
    pub gamma: BTreeMap<String, f64>,
    /// Optional pairwise sphere-radius factors, keyed like gamma pairs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_factors: Option<BTreeMap<String, f64>>,
    pub source: SourceConfig,
    pub samples: u64,
    pub seed: u64,
    /// Derive the central cell volume from a target description rate
    /// instead of `system.central_scale`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_lock: Option<RateLock>,
    /// Binning experiment knobs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub binning: Option<BinningConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub lattice: String,
    pub dim: usize,
    #[serde(default = "one")]
    pub central_scale: f64,
    pub subs: Vec<SimilarityConfig>,
    #[serde(default)]
    pub product: ProductConfig,
    pub mu: Vec<f64>,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimilarityConfig {
    Scalar(i64),
    Gaussian([i64; 2]),
    Eisenstein([i64; 2]),
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductConfig {
    /// Footnote-style deduplication of repeated similarities.
    #[default]
    Dedup,
    /// Product of all similarity matrices.
    Full,
    /// Explicit integer matrix over the central basis.
    Explicit(Vec<Vec<i64>>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceConfig {
    Gaussian { variance: f64 },
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateLock {
    pub description: usize,
    pub bits_per_dim: f64,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinningConfig {
    pub rate_bits_per_dim: f64,
    pub trials: u64,
}

impl SimilarityConfig {
    pub fn to_kind(&self) -> SimilarityKind {
        match self {
            SimilarityConfig::Scalar(k) => SimilarityKind::Scalar(*k),
            SimilarityConfig::Gaussian([a, b]) => SimilarityKind::Gaussian(*a, *b),
            SimilarityConfig::Eisenstein([a, b]) => SimilarityKind::Eisenstein(*a, *b),
        }
    }
}

pub fn lattice_name(s: &str) -> Result<LatticeName, CliError> {
    match s {
        "z" => Ok(LatticeName::Integer),
        "a2" => Ok(LatticeName::Hexagonal),
        "d4" => Ok(LatticeName::Checkerboard),
        other => Err(CliError::invalid(format!(
            "unknown lattice '{other}' (expected z, a2 or d4)"
        ))),
    }
}

pub fn lattice_label(name: LatticeName) -> &'static str {
    match name {
        LatticeName::Integer => "z",
        LatticeName::Hexagonal => "a2",
        LatticeName::Checkerboard => "d4",
    }
}

/// Parse a pattern key like "02" into a mask, validating order and range.
pub fn parse_pattern_key(key: &str, n: usize) -> Result<Mask, CliError> {
    if key.is_empty() {
        return Err(CliError::invalid("empty pattern key"));
    }
    let mut idx = Vec::new();
    for ch in key.chars() {
        let d = ch
            .to_digit(10)
            .ok_or_else(|| CliError::invalid(format!("pattern key '{key}' is not digits")))?
            as usize;
        if d >= n {
            return Err(CliError::invalid(format!(
                "pattern key '{key}' references description {d}, but n = {n}"
            )));
        }
        if idx.last().is_some_and(|&p| p >= d) {
            return Err(CliError::invalid(format!(
                "pattern key '{key}' must list strictly increasing digits"
            )));
        }
        idx.push(d);
    }
    Ok(mask_from_indices(&idx))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::invalid(format!("config: {e}")))?;
        if cfg.version != CONFIG_VERSION {
            return Err(CliError::invalid(format!(
                "config version {} unsupported (expected {CONFIG_VERSION})",
                cfg.version
            )));
        }
        Ok(cfg)
    }

    pub fn descriptions(&self) -> usize {
        self.system.subs.len()
    }

    pub fn source_spec(&self) -> SourceSpec {
        match self.source {
            SourceConfig::Gaussian { variance } => SourceSpec::Gaussian { variance },
        }
    }

    /// Central cell scale: configured directly or derived from a rate lock.
    pub fn central_scale(&self) -> Result<f64, CliError> {
        let name = lattice_name(&self.system.lattice)?;
        let Some(lock) = self.rate_lock else {
            return Ok(self.system.central_scale);
        };
        if lock.description >= self.descriptions() {
            return Err(CliError::invalid("rate_lock.description out of range"));
        }
        let l = self.system.dim;
        let unit = LatticeSpec::with_scale(name, l, 1.0)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let kind = self.system.subs[lock.description].to_kind();
        let m = kind
            .to_matrix(name, l)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let index = mdlvq_core::nested::SublatticeSpec::from_matrix(m, l)
            .map_err(|e| CliError::invalid(e.to_string()))?
            .index();
        let h = self.source_spec().entropy_bits(l);
        let mu = self.system.mu.get(lock.description).copied().unwrap_or(1.0);
        // nu_c = 2^{h - L R} / (N mu); scale^L * unit_volume = nu_c
        let nu_c = (h - l as f64 * lock.bits_per_dim).exp2() / (index as f64 * mu);
        if !(nu_c > 0.0) || !nu_c.is_finite() {
            return Err(CliError::invalid("rate lock yields a non-positive cell volume"));
        }
        Ok((nu_c / unit.cell_volume()).powf(1.0 / l as f64))
    }

    pub fn build_system(&self) -> Result<NestedSystem, CliError> {
        let name = lattice_name(&self.system.lattice)?;
        let scale = self.central_scale()?;
        let central = LatticeSpec::with_scale(name, self.system.dim, scale)
            .map_err(|e| CliError::invalid(e.to_string()))?;
        let kinds: Vec<SimilarityKind> =
            self.system.subs.iter().map(|s| s.to_kind()).collect();
        let rule = match &self.system.product {
            ProductConfig::Dedup => ProductRule::Deduplicated,
            ProductConfig::Full => ProductRule::FullProduct,
            ProductConfig::Explicit(m) => ProductRule::Explicit(m.clone()),
        };
        NestedSystem::build(central, &kinds, &self.system.mu, rule)
            .map_err(|e| CliError::invalid(e.to_string()))
    }

    pub fn build_profile(&self) -> Result<WeightProfile, CliError> {
        let n = self.descriptions();
        let mut gamma = BTreeMap::new();
        for (key, &value) in &self.gamma {
            gamma.insert(parse_pattern_key(key, n)?, value);
        }
        let factors = match &self.radius_factors {
            None => None,
            Some(map) => {
                let mut out = BTreeMap::new();
                for (key, &value) in map {
                    let mask = parse_pattern_key(key, n)?;
                    let idx: Vec<usize> =
                        (0..n).filter(|i| mask >> i & 1 == 1).collect();
                    if idx.len() != 2 {
                        return Err(CliError::invalid(format!(
                            "radius factor key '{key}' must name exactly two descriptions"
                        )));
                    }
                    out.insert((idx[0], idx[1]), value);
                }
                Some(out)
            }
        };
        WeightProfile::new(n, gamma, self.system.mu.clone(), factors)
            .map_err(|e| CliError::invalid(e.to_string()))
    }

    /// Validate everything cheaply (before any heavy compute).
    pub fn validate(&self) -> Result<(), CliError> {
        if self.samples == 0 {
            return Err(CliError::invalid("samples must be >= 1"));
        }
        if self.descriptions() < 2 {
            return Err(CliError::invalid("need at least 2 descriptions"));
        }
        if self.system.mu.len() != self.descriptions() {
            return Err(CliError::invalid("mu length must match the number of descriptions"));
        }
        self.build_system()?;
        self.build_profile()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> String {
        r#"{
            "version": 1,
            "system": {
                "lattice": "z", "dim": 1,
                "subs": [{"scalar": 4}, {"scalar": 5}],
                "mu": [1.0, 1.0]
            },
            "gamma": {"0": 1.0, "1": 1.0},
            "source": {"gaussian": {"variance": 1.0}},
            "samples": 1000,
            "seed": 7
        }"#
        .to_string()
    }

    #[test]
    fn parses_and_validates() {
        let cfg = RunConfig::from_json(&minimal()).unwrap();
        cfg.validate().unwrap();
        let sys = cfg.build_system().unwrap();
        assert_eq!(sys.product_index(), 20);
    }

    #[test]
    fn rejects_bad_pattern_keys() {
        let text = minimal().replace("\"1\": 1.0", "\"9\": 1.0");
        let cfg = RunConfig::from_json(&text).unwrap();
        assert!(cfg.validate().is_err());
        let text = minimal().replace("\"0\": 1.0", "\"10\": 1.0");
        let cfg = RunConfig::from_json(&text).unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn rejects_zero_samples_and_unknown_fields() {
        let text = minimal().replace("\"samples\": 1000", "\"samples\": 0");
        assert!(RunConfig::from_json(&text).unwrap().validate().is_err());
        let text = minimal().replace("\"seed\": 7", "\"seed\": 7, \"bogus\": 1");
        assert!(RunConfig::from_json(&text).is_err());
    }

    #[test]
    fn rate_lock_derives_scale() {
        let text = minimal().replace(
            "\"seed\": 7",
            "\"seed\": 7, \"rate_lock\": {\"description\": 0, \"bits_per_dim\": 5.0}",
        );
        let cfg = RunConfig::from_json(&text).unwrap();
        let scale = cfg.central_scale().unwrap();
        // R0 = h - log2(4 * scale) must equal 5 bits
        let h = cfg.source_spec().entropy_bits(1);
        let r0 = h - (4.0 * scale).log2();
        assert!((r0 - 5.0).abs() < 1e-12, "{r0}");
    }
}
