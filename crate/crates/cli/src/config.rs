//! TOML configuration and experiment files.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sndn_core::baselines::SchemeId;
use sndn_core::engine::{derive_run_seed, SimConfig};
use sndn_core::social::StrengthParams;
use sndn_core::traces::SyntheticSpec;
use sndn_core::Duration;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineSection {
    pub scheme: SchemeId,
    pub ttl: Duration,
    pub request_interval: Duration,
    pub direct_serve_prob: f64,
    pub warmup: Duration,
    pub warmup_ttl: Duration,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link_budget: Option<u32>,
    pub seed: u64,
    pub shuffle_profiles: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocialSection {
    pub alpha: f64,
    pub window: Duration,
    pub freshness_tick: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircleSection {
    pub threshold: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StcrSection {
    pub bloom_bits: u32,
    pub bloom_hashes: u32,
}

/// Sweep axes; an empty axis keeps the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub scheme: Vec<SchemeId>,
    pub ttl: Vec<Duration>,
    pub alpha: Vec<f64>,
    pub window: Vec<Duration>,
    pub kappa: Vec<f64>,
    pub seed: Vec<u64>,
    /// Number of runs with seeds derived from `engine.seed`; ignored when
    /// `seed` is given.
    pub runs: Option<u64>,
}

/// A run configuration file; an experiment file adds `[sweep]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub engine: EngineSection,
    pub social: SocialSection,
    pub circle: CircleSection,
    pub stcr: StcrSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        ConfigFile::from_sim(&SimConfig::default())
    }
}

impl Default for EngineSection {
    fn default() -> Self {
        ConfigFile::default().engine
    }
}

impl Default for SocialSection {
    fn default() -> Self {
        ConfigFile::default().social
    }
}

impl Default for CircleSection {
    fn default() -> Self {
        ConfigFile::default().circle
    }
}

impl Default for StcrSection {
    fn default() -> Self {
        ConfigFile::default().stcr
    }
}

impl ConfigFile {
    pub fn from_sim(c: &SimConfig) -> Self {
        ConfigFile {
            engine: EngineSection {
                scheme: c.scheme,
                ttl: c.ttl,
                request_interval: c.request_interval,
                direct_serve_prob: c.direct_serve_prob,
                warmup: c.warmup,
                warmup_ttl: c.warmup_ttl,
                link_budget: c.link_budget,
                seed: c.seed,
                shuffle_profiles: c.shuffle_profiles,
            },
            social: SocialSection {
                alpha: c.params.alpha,
                window: c.params.window,
                freshness_tick: c.params.freshness_tick,
            },
            circle: CircleSection {
                threshold: c.params.circle_threshold,
                kappa: c.kappa,
            },
            stcr: StcrSection {
                bloom_bits: c.bloom_bits,
                bloom_hashes: c.bloom_hashes,
            },
            sweep: None,
        }
    }

    pub fn to_sim(&self) -> SimConfig {
        SimConfig {
            scheme: self.engine.scheme,
            params: StrengthParams {
                alpha: self.social.alpha,
                window: self.social.window,
                circle_threshold: self.circle.threshold,
                freshness_tick: self.social.freshness_tick,
            },
            kappa: self.circle.kappa,
            ttl: self.engine.ttl,
            request_interval: self.engine.request_interval,
            direct_serve_prob: self.engine.direct_serve_prob,
            warmup: self.engine.warmup,
            warmup_ttl: self.engine.warmup_ttl,
            link_budget: self.engine.link_budget,
            seed: self.engine.seed,
            shuffle_profiles: self.engine.shuffle_profiles,
            bloom_bits: self.stcr.bloom_bits,
            bloom_hashes: self.stcr.bloom_hashes,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| missing(path, e))?;
        toml::from_str(&text).with_context(|| format!("{}: invalid configuration", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Every run of the sweep, validated, in axis order.
    pub fn expand(&self) -> Result<Vec<SimConfig>> {
        let base = self.to_sim();
        base.validate()?;
        let sweep = self.sweep.clone().unwrap_or_default();
        let schemes = or_base(&sweep.scheme, base.scheme);
        let ttls = or_base(&sweep.ttl, base.ttl);
        let alphas = or_base(&sweep.alpha, base.params.alpha);
        let windows = or_base(&sweep.window, base.params.window);
        let kappas = or_base(&sweep.kappa, base.kappa);
        let seeds: Vec<u64> = if !sweep.seed.is_empty() {
            sweep.seed.clone()
        } else if let Some(n) = sweep.runs {
            if n == 0 {
                bail!("sweep.runs must be positive");
            }
            (0..n).map(|i| derive_run_seed(base.seed, i)).collect()
        } else {
            vec![base.seed]
        };
        let mut out = Vec::new();
        for &scheme in &schemes {
            for &ttl in &ttls {
                for &alpha in &alphas {
                    for &window in &windows {
                        for &kappa in &kappas {
                            for &seed in &seeds {
                                let mut c = base.clone();
                                c.scheme = scheme;
                                c.ttl = ttl;
                                c.params.alpha = alpha;
                                c.params.window = window;
                                c.kappa = kappa;
                                c.seed = seed;
                                c.validate()?;
                                out.push(c);
                            }
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn or_base<T: Clone>(axis: &[T], base: T) -> Vec<T> {
    if axis.is_empty() {
        vec![base]
    } else {
        axis.to_vec()
    }
}

/// Synthetic-trace spec file: a `[synthetic]` table.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TraceSpecFile {
    pub synthetic: SyntheticSpec,
}

impl TraceSpecFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| missing(path, e))?;
        toml::from_str(&text).with_context(|| format!("{}: invalid trace spec", path.display()))
    }
}

fn missing(path: &Path, e: std::io::Error) -> anyhow::Error {
    anyhow::Error::new(sndn_core::Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}
