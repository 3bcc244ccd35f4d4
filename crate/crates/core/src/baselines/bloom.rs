//! Bloom filters over data names, using double hashing.

use crate::naming::DataName;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BloomFilter {
    bits: Vec<u64>,
    m: u32,
    k: u32,
    inserted: u32,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Token hash of a name: order-independent since it walks the sorted
/// components.
fn name_hash(name: &DataName) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for c in name.sorted() {
        for b in c.0.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        h ^= 0xff;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix(h)
}

impl BloomFilter {
    /// Filter with `m` bits and `k` hash functions. Both must be positive.
    pub fn new(m: u32, k: u32) -> Self {
        assert!(m > 0 && k > 0, "bloom filter needs m > 0 and k > 0");
        Self {
            bits: vec![0; (m as usize).div_ceil(64)],
            m,
            k,
            inserted: 0,
        }
    }

    fn indices(&self, name: &DataName) -> impl Iterator<Item = usize> + '_ {
        let h1 = name_hash(name);
        let h2 = splitmix(h1 ^ 0x5851_f42d_4c95_7f2d) | 1;
        (0..self.k as u64).map(move |i| (h1.wrapping_add(i.wrapping_mul(h2)) % self.m as u64) as usize)
    }

    pub fn insert(&mut self, name: &DataName) {
        let idx: Vec<usize> = self.indices(name).collect();
        for i in idx {
            self.bits[i / 64] |= 1 << (i % 64);
        }
        self.inserted += 1;
    }

    pub fn contains(&self, name: &DataName) -> bool {
        self.indices(name).all(|i| self.bits[i / 64] & (1 << (i % 64)) != 0)
    }

    pub fn bits(&self) -> u32 {
        self.m
    }

    pub fn hashes(&self) -> u32 {
        self.k
    }

    /// Number of insert calls so far.
    pub fn inserted(&self) -> u32 {
        self.inserted
    }

    /// `(1 - e^{-kn/m})^k` for `n` inserted names.
    pub fn analytic_fp_rate(m: u32, k: u32, n: u32) -> f64 {
        let k = k as f64;
        (1.0 - (-k * n as f64 / m as f64).exp()).powf(k)
    }
}
