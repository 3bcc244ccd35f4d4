//! Preference-driven request sampling.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::derive_run_seed;
use crate::error::{Error, Result};
use crate::naming::{Catalog, DataName};
use crate::traces::PreferenceProfile;
use crate::NodeId;

/// Draws catalog items with probability proportional to the product of the
/// user's weights on the item's components; uniform if every product is zero.
#[derive(Debug, Clone)]
pub struct ItemSampler {
    dist: Option<WeightedIndex<f64>>,
    len: usize,
}

impl ItemSampler {
    pub fn new(profile: &PreferenceProfile, catalog: &Catalog) -> Result<Self> {
        if catalog.items.is_empty() {
            return Err(Error::EmptyCatalog);
        }
        let weights: Vec<f64> = catalog
            .items
            .iter()
            .map(|item| item.sorted().iter().map(|c| profile.weight(*c)).product())
            .collect();
        Ok(Self {
            dist: WeightedIndex::new(&weights).ok(),
            len: catalog.items.len(),
        })
    }

    /// Index into the catalog's item list.
    pub fn sample_index<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        match &self.dist {
            Some(d) => d.sample(rng),
            None => rng.gen_range(0..self.len),
        }
    }

    pub fn sample<'c, R: Rng + ?Sized>(&self, catalog: &'c Catalog, rng: &mut R) -> &'c DataName {
        &catalog.items[self.sample_index(rng)]
    }
}

/// Random stream for one user's request slot. Streams are independent of the
/// routing scheme, so every scheme sees the same requests.
pub fn request_rng(seed: u64, user: NodeId, slot: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_run_seed(derive_run_seed(seed, user.0 as u64 + 1), slot))
}
