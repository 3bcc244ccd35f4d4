use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::baselines::stcr::{DEFAULT_BLOOM_BITS, DEFAULT_BLOOM_HASHES};
use crate::baselines::SchemeId;
use crate::circle::DEFAULT_KAPPA;
use crate::error::{Error, Result};
use crate::social::StrengthParams;
use crate::Duration;

/// Everything one simulation run depends on besides its inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: SchemeId,
    pub params: StrengthParams,
    /// Key-component threshold κ.
    pub kappa: f64,
    pub ttl: Duration,
    pub request_interval: Duration,
    /// Chance a request made while attached to a base station is served by
    /// it directly.
    pub direct_serve_prob: f64,
    /// Length of the warm-up period; zero disables it.
    pub warmup: Duration,
    pub warmup_ttl: Duration,
    /// Packets allowed across one contact; `None` is unlimited.
    pub link_budget: Option<u32>,
    pub seed: u64,
    /// Permute profiles among users with the run seed before starting.
    pub shuffle_profiles: bool,
    pub bloom_bits: u32,
    pub bloom_hashes: u32,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeId::Sndn,
            params: StrengthParams::default(),
            kappa: DEFAULT_KAPPA,
            ttl: 2 * 3600,
            request_interval: 600,
            direct_serve_prob: 0.5,
            warmup: 86_400,
            warmup_ttl: 2 * 3600,
            link_budget: None,
            seed: 1,
            shuffle_profiles: false,
            bloom_bits: DEFAULT_BLOOM_BITS,
            bloom_hashes: DEFAULT_BLOOM_HASHES,
        }
    }
}

fn unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must lie in [0, 1], got {v}")))
    }
}

fn positive(name: &str, v: u64) -> Result<()> {
    if v > 0 {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive")))
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        positive("ttl", self.ttl)?;
        positive("request_interval", self.request_interval)?;
        positive("warmup_ttl", self.warmup_ttl)?;
        positive("window", self.params.window)?;
        positive("freshness_tick", self.params.freshness_tick)?;
        positive("bloom_bits", self.bloom_bits as u64)?;
        positive("bloom_hashes", self.bloom_hashes as u64)?;
        if let Some(b) = self.link_budget {
            positive("link_budget", b as u64)?;
        }
        unit("alpha", self.params.alpha)?;
        unit("direct_serve_prob", self.direct_serve_prob)?;
        for (name, v) in [("kappa", self.kappa), ("threshold", self.params.circle_threshold)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidConfig(format!("{name} must be a non-negative number")));
            }
        }
        Ok(())
    }

    /// Stable textual form; equal configs give equal text.
    pub fn canonical_text(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical_text`].
    pub fn hash(&self) -> String {
        short_hash(self.canonical_text().as_bytes())
    }
}

/// First 16 hex digits of the SHA-256 of `bytes`.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Run seed for run `index` of a sweep with master seed `master`
/// (splitmix64 over the pair).
pub fn derive_run_seed(master: u64, index: u64) -> u64 {
    let mut x = master ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}
